"""Command line entry point: ``wsnbroadcast {analytic,simulate,figures,validate}``.

Exit codes: 0 ok, 2 usage, 3 non-convergence, 4 validation band failure, 5 I/O.
Settings resolve as command line over ``--config`` file over defaults.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import experiments as ex
from .analytic import NetworkParams, SchemeParams, throughput
from .errors import BroadcastModelError, UsageError, ValidationBandError
from .geometry import area_breakdown, fraction_to_cs_radius
from .simulator import SimConfig, pool, run_batch, seed_configs


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _strs(text):
    return [x.strip() for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file mirroring the sweep settings")
    common.add_argument("--scheme", type=_strs, help="csma, aloha (comma-separated)")
    common.add_argument("--gate", type=_floats, help="threshold gate factor(s) in (0, 1]")
    common.add_argument("--n", type=_floats, help="mean neighbour count(s) N")
    common.add_argument("--p", type=_floats, help="ready probability value(s)")
    common.add_argument("--hidden-fraction", type=_floats,
                        help="share of the worst-case hidden area, in [0, 1]")
    common.add_argument("--cs-radius", type=_floats,
                        help="carrier-sense radius in units of R, in [1, 2]")
    common.add_argument("--delta", type=int, help="frame length in slots")
    common.add_argument("--slots", type=int, help="simulated slots per run")
    common.add_argument("--warmup", type=int, help="discarded leading slots")
    common.add_argument("--seed", type=int, help="first RNG seed")
    common.add_argument("--seeds", type=int, help="number of consecutive seeds")
    common.add_argument("--format", choices=["csv", "json", "svg"])
    common.add_argument("--out", help="output path (stdout if omitted)")

    parser = argparse.ArgumentParser(prog="wsnbroadcast", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analytic", parents=[common], help="closed-form throughput over a grid")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo runs at one grid point")
    fig = sub.add_parser("figures", parents=[common], help="canned figure tables fig5 to fig8")
    fig.add_argument("figure", choices=ex.FIGURES)
    sub.add_parser("validate", parents=[common], help="analytic vs simulation over a grid")
    return parser


SIMULATE_DEFAULTS = {"schemes": ["csma"], "gates": [1.0], "n_grid": [5.0], "p_grid": [0.01],
                     "hidden_fractions": [1.0]}


def resolve_spec(args) -> ex.SweepSpec:
    data = dict(SIMULATE_DEFAULTS) if args.command == "simulate" else {}
    if args.config:
        data.update(ex.SweepSpec.from_json(args.config).explicit)
    overrides = {"schemes": args.scheme, "gates": args.gate, "n_grid": args.n, "p_grid": args.p,
                 "delta_slots": args.delta, "format": args.format, "out": args.out}
    if args.hidden_fraction is not None and args.cs_radius is not None:
        raise UsageError("give either --hidden-fraction or --cs-radius, not both")
    if args.hidden_fraction is not None:
        overrides["hidden_fractions"] = args.hidden_fraction
    if args.cs_radius is not None:
        overrides["hidden_fractions"] = [area_breakdown(1.0, c).hidden_fraction
                                         for c in args.cs_radius]
    data.update({k: v for k, v in overrides.items() if v is not None})

    sim = data.get("simulation")
    sim_flags = (args.slots, args.warmup, args.seed, args.seeds)
    if any(v is not None for v in sim_flags):
        block = dict(sim) if sim else {}
        if args.slots is not None:
            block["slots"] = args.slots
        if args.warmup is not None:
            block["warmup"] = args.warmup
        if args.seed is not None or args.seeds is not None:
            old = block.get("seeds") or [0]
            first = args.seed if args.seed is not None else old[0]
            count = args.seeds if args.seeds is not None else (len(old) if "seeds" in block else 1)
            block["seeds"] = list(range(first, first + count))
        data["simulation"] = block
    return ex.SweepSpec.from_dict(data)


def _write(rows, spec, meta, title=""):
    text = ex.emit(rows, spec.format, spec.out, meta=meta, title=title)
    if spec.out is None:
        sys.stdout.write(text)


def _seed_of(spec):
    return spec.simulation.seeds[0] if spec.simulation and spec.simulation.seeds else None


def cmd_analytic(spec):
    rows = ex.sweep(spec, spec.schemes, spec.gates)
    _write(rows, spec, ex.metadata(seed=_seed_of(spec)), "analytic throughput")
    return 0


def cmd_figures(spec, figure):
    rows = ex.run_figure(figure, spec)
    _write(rows, spec, ex.metadata(seed=_seed_of(spec), figure=figure), figure)
    return 0


def cmd_simulate(spec):
    if spec.simulation is None:
        spec.simulation = ex.SimulationBlock(seeds=[0])
    grid = [spec.schemes, spec.gates, spec.n_grid, spec.p_grid, spec.hidden_fractions]
    if any(len(g) != 1 for g in grid):
        raise UsageError("simulate runs a single point: give one value each for "
                         "--scheme, --gate, --n, --p and --hidden-fraction/--cs-radius")
    (scheme,), (gate,), (n,), (p,), (frac,) = grid
    sim = spec.simulation
    net = NetworkParams.from_mean_neighbors(n)
    sp = SchemeParams(scheme=scheme, p_ready=p, delta_slots=spec.delta_slots, threshold_gate=gate)
    cfg = SimConfig(network=net, scheme=sp, cs_radius=fraction_to_cs_radius(1.0, frac),
                    world_side=sim.world_side, slots=sim.slots, warmup_slots=sim.warmup)
    runs = run_batch(seed_configs(cfg, sim.seeds))
    pooled = pool(runs)
    analytic = throughput(net, sp, cfg.n_ph)
    doc = {
        "metadata": ex.metadata(seed=sim.seeds[0]),
        "point": {"scheme": sp.scheme.value, "gate": gate, "n_mean": n, "p": p,
                  "hidden_fraction": frac, "cs_radius": cfg.cs_radius,
                  "delta_slots": spec.delta_slots, "slots": sim.slots, "warmup": sim.warmup},
        "runs": [r.summary() for r in runs],
        "pooled": {"throughput_mean": pooled.throughput_mean,
                   "ci95_halfwidth": pooled.ci95_halfwidth, "n_runs": pooled.n_runs},
        "analytic_throughput": analytic.th,
    }
    if spec.format == "csv":
        text = ex.to_csv_records(doc["runs"])
    else:
        text = json.dumps(doc, indent=2) + "\n"
    ex.write_text(text, spec.out)
    if spec.out is None:
        sys.stdout.write(text)
    return 0


def cmd_validate(spec):
    if spec.format == "svg":
        raise UsageError("validate writes csv or json")
    rows = ex.run_validation(spec)
    _write(rows, spec, ex.metadata(seed=_seed_of(spec)))
    if not ex.all_within_band(rows):
        failed = sum(not r["within_band"] for r in rows)
        raise ValidationBandError(f"{failed} of {len(rows)} points outside the validation band")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = resolve_spec(args)
        if args.command == "analytic":
            return cmd_analytic(spec)
        if args.command == "figures":
            return cmd_figures(spec, args.figure)
        if args.command == "simulate":
            return cmd_simulate(spec)
        return cmd_validate(spec)
    except BroadcastModelError as exc:
        print(f"wsnbroadcast: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
