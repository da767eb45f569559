"""Slot-synchronous Monte Carlo simulation of broadcast over a Poisson field.

Nodes live on a torus of side ``world_side``. In every slot each waiting node
becomes ready with probability ``p_ready * threshold_gate``; a ready node
starts a ``delta_slots`` long frame unless carrier sensing (CSMA only) saw a
transmitter within ``cs_radius`` in the previous slot. A receiver within R of
the sender loses the frame if, in any slot of it, the receiver transmits or a
second transmitter within R of the receiver is active. A broadcast succeeds
only if every neighbour of the sender received it.

Several independent worlds (one per seed) can be packed into one
block-diagonal world and advanced together; each world draws from its own
generator, so packed and single runs give identical numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse, stats
from numba import njit
from scipy.spatial import cKDTree

from .analytic import NetworkParams, Scheme, SchemeParams, _fingerprint
from .errors import CapacityError, DomainError, UsageError
from .geometry import area_breakdown, hidden_count

RNG_ALGORITHM = "numpy.random.PCG64"
MAX_EXPECTED_NODES = 10**7
READY_BLOCK = 512  # slots of readiness draws per generator call


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SimConfig:
    network: NetworkParams
    scheme: SchemeParams
    cs_radius: float | None = None  # defaults to R
    world_side: float | None = None  # defaults to 8R
    slots: int = 200_000
    warmup_slots: int = 1_000
    seed: int = 0

    def __post_init__(self):
        r = self.network.radius
        if self.cs_radius is None:
            object.__setattr__(self, "cs_radius", r)
        if self.world_side is None:
            object.__setattr__(self, "world_side", 8 * r)
        area_breakdown(r, self.cs_radius)  # range check
        if self.world_side < 8 * r:
            raise DomainError(f"world_side must be >= 8R = {8 * r}, got {self.world_side}")
        if not self.slots > self.warmup_slots >= 0:
            raise DomainError(f"need slots > warmup_slots >= 0, got {self.slots}, {self.warmup_slots}")

    @property
    def n_ph(self) -> float:
        return hidden_count(self.network, area_breakdown(self.network.radius, self.cs_radius).a_ph)

    @property
    def hidden_fraction(self) -> float:
        return area_breakdown(self.network.radius, self.cs_radius).hidden_fraction

    def fingerprint(self) -> tuple:
        return _fingerprint(self.network, self.scheme, self.n_ph)


@dataclass
class Topology:
    positions: np.ndarray
    side: float
    neighbors: sparse.csr_matrix  # within R, no self loops
    sensing: sparse.csr_matrix  # within cs_radius, no self loops

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    @property
    def degree(self) -> np.ndarray:
        return np.diff(self.neighbors.indptr)


def _adjacency(tree: cKDTree, n: int, r: float) -> sparse.csr_matrix:
    pairs = tree.query_pairs(r, output_type="ndarray") if n > 1 else np.empty((0, 2), dtype=int)
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    data = np.ones(len(rows), dtype=np.int32)
    return sparse.csr_matrix((data, (rows, cols)), shape=(n, n))


def build_topology(positions, side: float, radius: float, cs_radius: float) -> Topology:
    """Neighbour and sensing graphs for given positions on a torus of ``side``."""
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    pos = np.mod(pos, side)
    n = len(pos)
    if n:
        tree = cKDTree(pos, boxsize=side)
        nbr = _adjacency(tree, n, radius)
        sense = _adjacency(tree, n, cs_radius)
    else:
        nbr = sense = sparse.csr_matrix((0, 0), dtype=np.int32)
    return Topology(positions=pos, side=side, neighbors=nbr, sensing=sense)


def generate_topology(config: SimConfig, rng: np.random.Generator | None = None) -> Topology:
    """Poisson(lam L^2) nodes placed uniformly on the torus."""
    expected = config.network.lam * config.world_side**2
    if expected > MAX_EXPECTED_NODES:
        raise CapacityError(f"expected node count {expected:.3g} exceeds {MAX_EXPECTED_NODES}")
    if rng is None:
        rng = make_rng(config.seed)
    n = rng.poisson(expected)
    positions = rng.random((n, 2)) * config.world_side
    return build_topology(positions, config.world_side, config.network.radius, config.cs_radius)


@dataclass(frozen=True)
class StepEvents:
    slot: int
    started: np.ndarray
    ended: np.ndarray
    succeeded: np.ndarray
    transmitting: np.ndarray


class World:
    """Mutable slot state of one (possibly packed) node field."""

    def __init__(self, topology: Topology, scheme: SchemeParams, warmup_slots: int = 0):
        self.topology = topology
        self.scheme = scheme
        self.warmup_slots = warmup_slots
        self.carrier_sense = scheme.scheme is Scheme.CSMA
        n = topology.n_nodes
        self.remaining = np.zeros(n, dtype=np.int64)  # 0 means waiting
        self.corrupt = np.zeros(n, dtype=np.bool_)
        self.transmitting = np.zeros(n, dtype=np.bool_)  # during the last slot
        self.frame_slots = np.zeros(n, dtype=np.int64)  # measured slots of current frame
        self.tx_slots = np.zeros(n, dtype=np.int64)
        self.wait_slots = np.zeros(n, dtype=np.int64)
        self.success_slots = np.zeros(n, dtype=np.int64)
        self.attempted = np.zeros(n, dtype=np.int64)
        self.succeeded = np.zeros(n, dtype=np.int64)
        # per-node flags for the most recent slot
        self.started = np.zeros(n, dtype=np.bool_)
        self.ended = np.zeros(n, dtype=np.bool_)
        self.ok = np.zeros(n, dtype=np.bool_)

    @property
    def n_nodes(self) -> int:
        return self.topology.n_nodes

    def advance(self, first_slot: int, ready: np.ndarray) -> None:
        """Run ``len(ready)`` slots; row k of ``ready`` holds the draws for slot first_slot + k."""
        nbr, sense = self.topology.neighbors, self.topology.sensing
        _advance(
            nbr.indptr, nbr.indices, sense.indptr, sense.indices,
            np.ascontiguousarray(ready, dtype=np.bool_), first_slot, self.warmup_slots,
            self.scheme.delta_slots, self.carrier_sense,
            self.remaining, self.corrupt, self.transmitting, self.frame_slots, self.tx_slots,
            self.wait_slots, self.success_slots, self.attempted, self.succeeded,
            self.started, self.ended, self.ok,
        )


@njit(cache=True)
def _advance(nbr_ptr, nbr_idx, cs_ptr, cs_idx, ready, first_slot, warmup, delta, csma,
             remaining, corrupt, transmitting, frame_slots, tx_slots, wait_slots,
             success_slots, attempted, succeeded, started, ended, ok):
    n = remaining.shape[0]
    deaf = np.zeros(n, dtype=np.bool_)
    for k in range(ready.shape[0]):
        measured = first_slot + k >= warmup
        # start decisions look at the previous slot's transmitters
        for i in range(n):
            started[i] = False
            ended[i] = False
            ok[i] = False
            if remaining[i] == 0 and ready[k, i]:
                go = True
                if csma:
                    for jj in range(cs_ptr[i], cs_ptr[i + 1]):
                        if transmitting[cs_idx[jj]]:
                            go = False
                            break
                if go:
                    started[i] = True
        for i in range(n):
            if started[i]:
                remaining[i] = delta
                corrupt[i] = False
                frame_slots[i] = 0
            transmitting[i] = remaining[i] > 0
        # a node decodes nothing while it transmits or hears two or more senders
        for i in range(n):
            if transmitting[i]:
                deaf[i] = True
            else:
                heard = 0
                for jj in range(nbr_ptr[i], nbr_ptr[i + 1]):
                    if transmitting[nbr_idx[jj]]:
                        heard += 1
                deaf[i] = heard >= 2
        for i in range(n):
            if not transmitting[i]:
                if measured:
                    wait_slots[i] += 1
                continue
            if not corrupt[i]:
                for jj in range(nbr_ptr[i], nbr_ptr[i + 1]):
                    if deaf[nbr_idx[jj]]:
                        corrupt[i] = True
                        break
            if measured:
                tx_slots[i] += 1
                frame_slots[i] += 1
            remaining[i] -= 1
            if remaining[i] == 0:
                ended[i] = True
                if frame_slots[i] > 0:
                    attempted[i] += 1
                if not corrupt[i]:
                    ok[i] = True
                    success_slots[i] += frame_slots[i]
                    if frame_slots[i] > 0:
                        succeeded[i] += 1


def step(world: World, slot: int, ready) -> StepEvents:
    """Advance ``world`` by one slot given this slot's readiness draws."""
    ready = np.asarray(ready, dtype=np.bool_).reshape(1, world.n_nodes)
    world.advance(slot, ready)
    return StepEvents(
        slot=slot,
        started=np.flatnonzero(world.started),
        ended=np.flatnonzero(world.ended),
        succeeded=np.flatnonzero(world.ok),
        transmitting=world.transmitting.copy(),
    )


@dataclass(frozen=True)
class SimStats:
    per_node_success_slots: np.ndarray = field(repr=False)
    per_node_tx_slots: np.ndarray = field(repr=False)
    per_node_wait_slots: np.ndarray = field(repr=False)
    per_node_degree: np.ndarray = field(repr=False)
    total_slots: int
    throughput_mean: float
    ci95_halfwidth: float
    broadcasts_attempted: int
    broadcasts_succeeded: int
    n_nodes: int
    config: SimConfig
    rng_algorithm: str = RNG_ALGORITHM

    @property
    def per_node_throughput(self) -> np.ndarray:
        return self.per_node_success_slots / self.total_slots

    def fingerprint(self) -> tuple:
        return self.config.fingerprint()

    def summary(self) -> dict:
        return {
            "seed": self.config.seed, "rng_algorithm": self.rng_algorithm,
            "n_nodes": self.n_nodes, "total_slots": self.total_slots,
            "throughput_mean": self.throughput_mean, "ci95_halfwidth": self.ci95_halfwidth,
            "broadcasts_attempted": self.broadcasts_attempted,
            "broadcasts_succeeded": self.broadcasts_succeeded,
        }


def ci95_halfwidth(samples) -> float:
    """Student-t 95% half-width of the sample mean; 0 with fewer than two samples."""
    x = np.asarray(samples, dtype=float)
    if len(x) < 2:
        return 0.0
    return float(stats.t.ppf(0.975, len(x) - 1) * x.std(ddof=1) / math.sqrt(len(x)))


def _pack(topologies):
    nbr = sparse.block_diag([t.neighbors for t in topologies], format="csr", dtype=np.int32)
    sense = sparse.block_diag([t.sensing for t in topologies], format="csr", dtype=np.int32)
    pos = np.concatenate([t.positions for t in topologies]) if topologies else np.empty((0, 2))
    return Topology(positions=pos, side=topologies[0].side, neighbors=nbr, sensing=sense)


def run_batch(configs) -> list[SimStats]:
    """Run several configs that differ only in seed, packed into one slot loop."""
    configs = list(configs)
    if not configs:
        return []
    base = configs[0]
    for c in configs[1:]:
        if (c.network, c.scheme, c.cs_radius, c.world_side, c.slots, c.warmup_slots) != (
                base.network, base.scheme, base.cs_radius, base.world_side, base.slots,
                base.warmup_slots):
            raise UsageError("run_batch configs may differ only in seed")

    rngs = [make_rng(c.seed) for c in configs]
    topologies = [generate_topology(c, rng) for c, rng in zip(configs, rngs)]
    sizes = [t.n_nodes for t in topologies]
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    world = World(_pack(topologies), base.scheme, base.warmup_slots)
    p = base.scheme.p_effective

    for block_start in range(0, base.slots, READY_BLOCK):
        ready = np.concatenate([rng.random((READY_BLOCK, n)) < p for rng, n in zip(rngs, sizes)],
                               axis=1)
        world.advance(block_start, ready[: base.slots - block_start])

    measured = base.slots - base.warmup_slots
    out = []
    for i, (c, topo) in enumerate(zip(configs, topologies)):
        sl = slice(bounds[i], bounds[i + 1])
        succ = world.success_slots[sl].copy()
        frac = succ / measured
        out.append(SimStats(
            per_node_success_slots=succ,
            per_node_tx_slots=world.tx_slots[sl].copy(),
            per_node_wait_slots=world.wait_slots[sl].copy(),
            per_node_degree=topo.degree,
            total_slots=measured,
            throughput_mean=float(frac.mean()) if len(frac) else 0.0,
            ci95_halfwidth=ci95_halfwidth(frac),
            broadcasts_attempted=int(world.attempted[sl].sum()),
            broadcasts_succeeded=int(world.succeeded[sl].sum()),
            n_nodes=topo.n_nodes,
            config=c,
        ))
    return out


def run(config: SimConfig) -> SimStats:
    return run_batch([config])[0]


def seed_configs(config: SimConfig, seeds) -> list[SimConfig]:
    from dataclasses import replace
    return [replace(config, seed=int(s)) for s in seeds]


@dataclass(frozen=True)
class PooledStats:
    """Across-seed summary: mean of per-run node means, t-interval over runs."""

    throughput_mean: float
    ci95_halfwidth: float
    n_runs: int
    runs: tuple = field(repr=False)

    def fingerprint(self) -> tuple:
        return self.runs[0].fingerprint()

    @property
    def config(self) -> SimConfig:
        return self.runs[0].config


def pool(runs) -> PooledStats:
    runs = tuple(runs)
    if not runs:
        raise UsageError("cannot pool an empty set of runs")
    fps = {r.fingerprint() for r in runs}
    if len(fps) != 1:
        raise UsageError("pooled runs must share every parameter except the seed")
    means = np.array([r.throughput_mean for r in runs])
    return PooledStats(throughput_mean=float(means.mean()), ci95_halfwidth=ci95_halfwidth(means),
                       n_runs=len(runs), runs=runs)


@dataclass(frozen=True)
class Comparison:
    analytic_th: float
    sim_mean: float
    ci_low: float
    ci_high: float
    abs_gap: float
    rel_gap: float
    within_ci: bool
    band_low: float
    band_high: float
    within_band: bool


def compare(analytic, sim, rel_margin: float = 0.2, rtol: float = 1e-9) -> Comparison:
    """Place an analytic throughput against a simulated mean and its 95% CI.

    The acceptance band is the CI widened on each side by ``rel_margin`` times
    the simulated mean.
    """
    fa, fs = analytic.fingerprint(), sim.fingerprint()
    if fa[:4] != fs[:4] or not np.allclose(fa[4:], fs[4:], rtol=rtol, atol=1e-12):
        raise UsageError(f"parameter mismatch: analytic {fa} vs simulation {fs}")
    th, mean, hw = analytic.th, sim.throughput_mean, sim.ci95_halfwidth
    lo, hi = mean - hw, mean + hw
    band_lo, band_hi = lo - rel_margin * mean, hi + rel_margin * mean
    gap = th - mean
    rel = gap / mean if mean else (0.0 if gap == 0 else math.inf)
    return Comparison(
        analytic_th=th, sim_mean=mean, ci_low=lo, ci_high=hi, abs_gap=gap, rel_gap=rel,
        within_ci=lo <= th <= hi, band_low=band_lo, band_high=band_hi,
        within_band=band_lo <= th <= band_hi,
    )
