"""Parameter sweeps behind the throughput figures, simulation checks, and emitters."""
from __future__ import annotations

import csv
import datetime as _dt
import io
import itertools
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import NetworkParams, Scheme, SchemeParams, throughput
from .errors import OutputError, UsageError
from .geometry import fraction_to_cs_radius, hidden_count_for_fraction
from .simulator import RNG_ALGORITHM, SimConfig, compare, pool, run_batch, seed_configs

COLUMNS = ("scheme", "gate", "n_mean", "p", "p_attempt", "hidden_fraction", "n_ph",
           "v_slots", "p1", "p2", "p3", "throughput")
VALIDATION_COLUMNS = COLUMNS + ("sim_mean", "ci95_halfwidth", "band_low", "band_high",
                                "abs_gap", "rel_gap", "within_ci", "within_band")
FIGURES = ("fig5", "fig6", "fig7", "fig8")


def default_p_grid() -> list[float]:
    return [float(x) for x in np.logspace(-4, 0, 40)]


@dataclass
class SimulationBlock:
    slots: int = 200_000
    warmup: int = 1_000
    seeds: list[int] = field(default_factory=lambda: list(range(30)))
    world_side: float | None = None  # in units of R; None means 8R
    rel_margin: float = 0.2


@dataclass
class SweepSpec:
    schemes: list[str] = field(default_factory=lambda: ["csma", "aloha"])
    p_grid: list[float] = field(default_factory=default_p_grid)
    n_grid: list[float] = field(default_factory=lambda: [2.0, 5.0, 10.0, 20.0])
    hidden_fractions: list[float] = field(default_factory=lambda: [1.0, 0.5, 0.0])
    delta_slots: int = 100
    gates: list[float] = field(default_factory=lambda: [1.0, 0.5, 0.25, 0.1])
    format: str = "csv"
    out: str | None = None
    simulation: SimulationBlock | None = None
    # keys set explicitly by a config document, used for override precedence
    explicit: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.schemes = [Scheme.parse(s).value for s in self.schemes]
        for f in self.hidden_fractions:
            if not 0.0 <= f <= 1.0:
                raise UsageError(f"hidden fraction {f} outside [0, 1]")
        if self.format not in ("csv", "json", "svg"):
            raise UsageError(f"unknown output format {self.format!r}")
        if isinstance(self.simulation, dict):
            self.simulation = SimulationBlock(**self.simulation)

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        known = {f.name for f in fields(cls)} - {"explicit"}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        spec = cls(**data)
        spec.explicit = dict(data)
        return spec

    @classmethod
    def from_json(cls, path) -> "SweepSpec":
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise OutputError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def require_nonempty(self):
        for name in ("schemes", "p_grid", "n_grid", "hidden_fractions", "gates"):
            if not getattr(self, name):
                raise UsageError(f"grid {name!r} is empty")


def analytic_row(scheme: str, gate: float, n_mean: float, p: float, hidden_fraction: float,
                 delta_slots: int) -> dict:
    net = NetworkParams.from_mean_neighbors(n_mean)
    sp = SchemeParams(scheme=scheme, p_ready=p, delta_slots=delta_slots, threshold_gate=gate)
    n_ph = hidden_count_for_fraction(net, hidden_fraction)
    res = throughput(net, sp, n_ph)
    return {
        "scheme": sp.scheme.value, "gate": float(gate), "n_mean": float(n_mean), "p": float(p),
        "p_attempt": res.p_attempt, "hidden_fraction": float(hidden_fraction), "n_ph": n_ph,
        "v_slots": res.vulnerable_slots, "p1": res.p1, "p2": res.p2, "p3": res.p3,
        "throughput": res.th,
    }


def sweep(spec: SweepSpec, schemes, gates) -> list[dict]:
    """Rows in grid order: scheme, gate, hidden fraction, N, p."""
    return [
        analytic_row(s, g, n, p, f, spec.delta_slots)
        for s, g, f, n, p in itertools.product(schemes, gates, spec.hidden_fractions,
                                                spec.n_grid, spec.p_grid)
    ]


def run_figure(figure: str, spec: SweepSpec | None = None) -> list[dict]:
    """Data behind one figure.

    fig5: CSMA broadcast without gating; fig6: CSMA broadcast with each gate
    below 1; fig7: slotted aloha at every gate; fig8: fig5 + fig6 + fig7.
    """
    spec = spec or SweepSpec()
    spec.require_nonempty()
    if figure == "fig5":
        return sweep(spec, ["csma"], [1.0])
    if figure == "fig6":
        return sweep(spec, ["csma"], [g for g in spec.gates if g < 1.0])
    if figure == "fig7":
        return sweep(spec, ["aloha"], spec.gates)
    if figure == "fig8":
        return run_figure("fig5", spec) + run_figure("fig6", spec) + run_figure("fig7", spec)
    raise UsageError(f"unknown figure {figure!r}; expected one of {', '.join(FIGURES)}")


def run_validation(spec: SweepSpec) -> list[dict]:
    """Analytic throughput against pooled simulation at every grid point."""
    sim = spec.simulation
    if sim is None:
        raise UsageError("validation needs a simulation block (slots, warmup, seeds)")
    rows = []
    for s, g, f, n, p in itertools.product(spec.schemes, spec.gates, spec.hidden_fractions,
                                           spec.n_grid, spec.p_grid):
        row = analytic_row(s, g, n, p, f, spec.delta_slots)
        net = NetworkParams.from_mean_neighbors(n)
        sp = SchemeParams(scheme=s, p_ready=p, delta_slots=spec.delta_slots, threshold_gate=g)
        cfg = SimConfig(
            network=net, scheme=sp, cs_radius=fraction_to_cs_radius(net.radius, f),
            world_side=None if sim.world_side is None else sim.world_side * net.radius,
            slots=sim.slots, warmup_slots=sim.warmup,
        )
        pooled = pool(run_batch(seed_configs(cfg, sim.seeds)))
        res = throughput(net, sp, cfg.n_ph)
        cmp_ = compare(res, pooled, rel_margin=sim.rel_margin)
        row.update(sim_mean=cmp_.sim_mean, ci95_halfwidth=pooled.ci95_halfwidth,
                   band_low=cmp_.band_low, band_high=cmp_.band_high, abs_gap=cmp_.abs_gap,
                   rel_gap=cmp_.rel_gap, within_ci=cmp_.within_ci, within_band=cmp_.within_band)
        rows.append(row)
    return rows


def all_within_band(rows) -> bool:
    return all(r["within_band"] for r in rows)


# --- emitters ---------------------------------------------------------------

def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)  # shortest round-trip
    return str(value)


def _columns(rows):
    if rows and "sim_mean" in rows[0]:
        return VALIDATION_COLUMNS
    return COLUMNS


def to_csv(rows) -> str:
    buf = io.StringIO()
    cols = _columns(rows)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r[c]) for c in cols])
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    """Inverse of :func:`to_csv`."""
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        row = {}
        for k, v in rec.items():
            if k == "scheme":
                row[k] = v
            elif k == "v_slots":
                row[k] = int(v)
            elif v in ("true", "false"):
                row[k] = v == "true"
            else:
                row[k] = float(v)
        out.append(row)
    return out


def metadata(seed=None, figure=None, timestamp=True) -> dict:
    meta = {"version": __version__, "rng_algorithm": RNG_ALGORITHM, "seed": seed,
            "figure": figure}
    if timestamp:
        meta["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    return meta


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def to_json(rows, meta: dict | None = None) -> str:
    doc = {"metadata": meta if meta is not None else metadata(),
           "rows": [{k: _json_safe(v) for k, v in r.items()} for r in rows]}
    return json.dumps(doc, indent=2) + "\n"


def schema_path() -> Path:
    return Path(__file__).with_name("schema") / "table.schema.json"


def to_svg(rows, title: str = "") -> str:
    """Throughput against p on a log axis, one curve per (scheme, gate, fraction, N)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "wsnbroadcast", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(8, 5))
        families = {}
        for r in rows:
            key = (r["scheme"], r["gate"], r["hidden_fraction"], r["n_mean"])
            families.setdefault(key, []).append((r["p"], r["throughput"]))
        for (scheme, gate, frac, n), pts in families.items():
            pts.sort()
            ax.plot([x for x, _ in pts], [y for _, y in pts],
                    label=f"{scheme} q={gate:g} hidden={frac:.0%} N={n:g}")
        ax.set_xscale("log")
        ax.set_xlabel("ready probability p")
        ax.set_ylabel("throughput")
        if title:
            ax.set_title(title)
        if families and len(families) <= 24:
            ax.legend(fontsize=6, ncol=2)
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


def render(rows, fmt: str, meta: dict | None = None, title: str = "") -> str:
    if fmt == "csv":
        return to_csv(rows)
    if fmt == "json":
        return to_json(rows, meta)
    if fmt == "svg":
        return to_svg(rows, title)
    raise UsageError(f"unknown output format {fmt!r}")


def emit(rows, fmt: str, path=None, meta: dict | None = None, title: str = "") -> str:
    """Render ``rows`` and write them to ``path`` (if given). Returns the text."""
    text = render(rows, fmt, meta, title)
    write_text(text, path)
    return text


def write_text(text: str, path) -> None:
    if path is None:
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def to_csv_records(records) -> str:
    """CSV of homogeneous dicts, columns in first-record order."""
    buf = io.StringIO()
    if records:
        cols = list(records[0])
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in records:
            w.writerow([_cell(r[c]) for c in cols])
    return buf.getvalue()


def spec_to_dict(spec: SweepSpec) -> dict:
    d = asdict(spec)
    d.pop("explicit", None)
    return d
