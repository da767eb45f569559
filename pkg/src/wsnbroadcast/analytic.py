"""Markov-chain throughput model for broadcast MAC schemes.

All times are measured in slots (the slot duration is the unit, ``TAU = 1``).
The model couples a two-state channel chain (idle/busy) around a tagged node
with a three-state node chain (wait/succeed/collide). The per-slot attempt
probability ``p'`` enters both, so it is obtained as a fixed point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConvergenceError, DomainError

TAU = 1.0
BISECTION_CAP = 10_000
RESIDUAL_TOL = 1e-12


class Scheme(str, Enum):
    CSMA = "csma"
    ALOHA = "aloha"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        aliases = {
            "csma": cls.CSMA, "csmabroadcast": cls.CSMA, "802.11": cls.CSMA,
            "aloha": cls.ALOHA, "slottedaloha": cls.ALOHA, "slotted-aloha": cls.ALOHA,
        }
        try:
            return aliases[str(value).strip().lower().replace("_", "")]
        except KeyError:
            raise DomainError(f"unknown scheme {value!r}") from None


@dataclass(frozen=True)
class NetworkParams:
    """Poisson node field: density ``lam`` and common radio range ``radius``."""

    lam: float
    radius: float = 1.0

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError(f"node density must be positive, got {self.lam}")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise DomainError(f"radius must be positive, got {self.radius}")

    @property
    def n_mean(self) -> float:
        """Mean neighbour count N = lam * pi * R^2."""
        return self.lam * math.pi * self.radius**2

    @classmethod
    def from_mean_neighbors(cls, n_mean: float, radius: float = 1.0) -> "NetworkParams":
        if not n_mean > 0:
            raise DomainError(f"mean neighbour count must be positive, got {n_mean}")
        return cls(lam=n_mean / (math.pi * radius**2), radius=radius)


@dataclass(frozen=True)
class SchemeParams:
    scheme: Scheme = Scheme.CSMA
    p_ready: float = 0.01
    delta_slots: int = 100
    threshold_gate: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if not 0.0 <= self.p_ready <= 1.0:
            raise DomainError(f"p_ready must be in [0, 1], got {self.p_ready}")
        if not 0.0 < self.threshold_gate <= 1.0:
            raise DomainError(f"threshold_gate must be in (0, 1], got {self.threshold_gate}")
        if isinstance(self.delta_slots, bool) or int(self.delta_slots) != self.delta_slots:
            raise DomainError(f"delta_slots must be an integer, got {self.delta_slots}")
        if self.delta_slots < 1:
            raise DomainError(f"delta_slots must be >= 1, got {self.delta_slots}")
        object.__setattr__(self, "delta_slots", int(self.delta_slots))

    @property
    def p_effective(self) -> float:
        """Ready probability after threshold gating."""
        return self.p_ready * self.threshold_gate


@dataclass(frozen=True)
class ChannelChain:
    p_ii: float
    phi_idle: float
    phi_busy: float
    p_limit: float
    t_busy: float
    p_bi: float = 1.0
    t_idle: float = TAU

    def transition_matrix(self) -> np.ndarray:
        return np.array([[self.p_ii, 1.0 - self.p_ii], [self.p_bi, 0.0]])

    @property
    def stationary(self) -> np.ndarray:
        return np.array([self.phi_idle, self.phi_busy])


@dataclass(frozen=True)
class NodeChain:
    p_ww: float
    p_ws: float
    p_wc: float
    phi_wait: float
    phi_succ: float
    phi_coll: float
    t_succ: float
    t_coll: float
    p_sw: float = 1.0
    p_cw: float = 1.0
    t_wait: float = TAU

    def transition_matrix(self) -> np.ndarray:
        # state order: wait, succeed, collide
        return np.array([
            [self.p_ww, self.p_ws, self.p_wc],
            [self.p_sw, 0.0, 0.0],
            [self.p_cw, 0.0, 0.0],
        ])

    @property
    def stationary(self) -> np.ndarray:
        return np.array([self.phi_wait, self.phi_succ, self.phi_coll])


@dataclass(frozen=True)
class ThroughputResult:
    p_attempt: float
    p1: float
    p2: float
    p3: float
    n_ph: float
    vulnerable_slots: int
    th: float
    th_alt: float
    network: NetworkParams
    scheme: SchemeParams
    channel: ChannelChain = field(repr=False)
    node: NodeChain = field(repr=False)

    @property
    def p_ws(self) -> float:
        return self.p1 * self.p2 * self.p3

    def fingerprint(self) -> tuple:
        return _fingerprint(self.network, self.scheme, self.n_ph)


def _fingerprint(network, scheme, n_ph):
    return (scheme.scheme.value, scheme.threshold_gate, scheme.p_ready,
            scheme.delta_slots, network.n_mean, n_ph)


def poisson_pmf(i: int, mean: float) -> float:
    """P{i nodes} for a Poisson count with the given mean, evaluated in log space."""
    if i < 0 or int(i) != i:
        raise DomainError(f"count must be a non-negative integer, got {i}")
    if not mean >= 0:
        raise DomainError(f"mean must be non-negative, got {mean}")
    if mean == 0:
        return 1.0 if i == 0 else 0.0
    return math.exp(i * math.log(mean) - mean - math.lgamma(i + 1))


def _attempt_map(x, p_eff, n_mean, delta):
    """g(x): attempt probability implied by an assumed attempt probability x."""
    return TAU * p_eff / (delta * -math.expm1(-x * n_mean) + TAU)


def solve_attempt_probability(params: NetworkParams, scheme: SchemeParams) -> float:
    """Solve p' = p g(p') by bisection on h(x) = x - g(x) over [0, p_eff].

    g is strictly decreasing so the root is unique. Slotted aloha does no
    carrier sensing and returns ``p_eff`` directly.
    """
    p_eff = scheme.p_effective
    if scheme.scheme is Scheme.ALOHA or p_eff == 0.0:
        return p_eff
    n, delta = params.n_mean, scheme.delta_slots

    def h(x):
        return x - _attempt_map(x, p_eff, n, delta)

    lo, hi = 0.0, p_eff
    for _ in range(BISECTION_CAP):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break  # bracket exhausted at float resolution
        hm = h(mid)
        if hm == 0.0:
            return mid
        if hm > 0:
            hi = mid
        else:
            lo = mid
    x = min((lo, hi), key=lambda t: abs(h(t)))
    if abs(h(x)) <= RESIDUAL_TOL:
        return x
    raise ConvergenceError("bisection did not reach the residual tolerance", bracket=(lo, hi))


def solve_attempt_probability_damped(params: NetworkParams, scheme: SchemeParams,
                                     max_iter: int = 10_000) -> float:
    """Cross-check solver: relaxed fixed-point iteration x <- x + a (g(x) - x).

    The relaxation weight is 1 / (1 + |g'(x)|), recomputed every step, which
    keeps the iteration contractive even when g is steep near zero.
    """
    p_eff = scheme.p_effective
    if scheme.scheme is Scheme.ALOHA or p_eff == 0.0:
        return p_eff
    n, delta = params.n_mean, scheme.delta_slots
    x = 0.0
    for _ in range(max_iter):
        gx = _attempt_map(x, p_eff, n, delta)
        denom = delta * -math.expm1(-x * n) + TAU
        slope = TAU * p_eff * delta * n * math.exp(-x * n) / denom**2
        x_new = min(max(x + (gx - x) / (1.0 + slope), 0.0), p_eff)
        if abs(x_new - x) <= 1e-17:
            x = x_new
            break
        x = x_new
    if abs(x - _attempt_map(x, p_eff, n, delta)) > RESIDUAL_TOL:
        raise ConvergenceError("damped iteration did not converge", bracket=(x, x))
    return x


def channel_chain(p_attempt: float, params: NetworkParams, delta_slots: int) -> ChannelChain:
    if not 0.0 <= p_attempt <= 1.0:
        raise DomainError(f"p_attempt must be in [0, 1], got {p_attempt}")
    x = p_attempt * params.n_mean
    p_ii = math.exp(-x)
    phi_idle = 1.0 / (2.0 - p_ii)
    p_limit = TAU / (delta_slots * -math.expm1(-x) + TAU)
    return ChannelChain(p_ii=p_ii, phi_idle=phi_idle, phi_busy=1.0 - phi_idle,
                        p_limit=p_limit, t_busy=float(delta_slots))


def vulnerable_slots(scheme: SchemeParams) -> int:
    """Slots during which a hidden transmission ruins the frame."""
    if scheme.scheme is Scheme.ALOHA:
        return scheme.delta_slots + 1
    return 2 * scheme.delta_slots + 1


def success_probability(p_attempt: float, params: NetworkParams, n_ph: float, v: int):
    """Return ``(p1, p2, p3, p_ws)``.

    p1: the tagged node transmits; p2: no neighbour transmits in that slot;
    p3: no potential hidden node transmits during the ``v`` vulnerable slots.
    """
    if n_ph < 0:
        raise DomainError(f"hidden node count must be non-negative, got {n_ph}")
    if v < 1:
        raise DomainError(f"vulnerable period must be at least one slot, got {v}")
    p1 = p_attempt
    p2 = math.exp(-p_attempt * params.n_mean)
    p3 = math.exp(-p_attempt * n_ph * v)
    return p1, p2, p3, p1 * p2 * p3


def node_chain(p_attempt: float, p_ws: float, delta_slots: int) -> NodeChain:
    if not 0.0 <= p_attempt <= 1.0:
        raise DomainError(f"p_attempt must be in [0, 1], got {p_attempt}")
    if p_ws < 0 or p_ws > p_attempt:
        raise DomainError(f"need 0 <= p_ws <= p_attempt, got p_ws={p_ws}, p'={p_attempt}")
    phi_wait = 1.0 / (1.0 + p_attempt)
    t_frame = delta_slots + TAU
    return NodeChain(
        p_ww=1.0 - p_attempt, p_ws=p_ws, p_wc=p_attempt - p_ws,
        phi_wait=phi_wait, phi_succ=p_ws * phi_wait, phi_coll=(p_attempt - p_ws) * phi_wait,
        t_succ=t_frame, t_coll=t_frame,
    )


def throughput(params: NetworkParams, scheme: SchemeParams, n_ph: float = 0.0,
               p_attempt: float | None = None) -> ThroughputResult:
    """Fraction of time spent in successful broadcast.

    ``p_attempt`` forces the attempt probability instead of solving for it.
    """
    if p_attempt is None:
        p_attempt = solve_attempt_probability(params, scheme)
    delta = scheme.delta_slots
    v = vulnerable_slots(scheme)
    p1, p2, p3, p_ws = success_probability(p_attempt, params, n_ph, v)
    chan = channel_chain(p_attempt, params, delta)
    node = node_chain(p_attempt, p_ws, delta)

    th = p_ws * delta / (TAU + p_attempt * (delta + TAU))
    busy = node.phi_succ * node.t_succ + node.phi_coll * node.t_coll + node.phi_wait * node.t_wait
    th_alt = node.phi_succ * delta / busy
    return ThroughputResult(
        p_attempt=p_attempt, p1=p1, p2=p2, p3=p3, n_ph=n_ph, vulnerable_slots=v,
        th=th, th_alt=th_alt, network=params, scheme=scheme, channel=chan, node=node,
    )


def stationary_by_power_iteration(matrix: np.ndarray, max_steps: int = 100_000,
                                  tol: float = 1e-15) -> np.ndarray:
    """Stationary row vector by power iteration on the lazy chain (P + I) / 2.

    The lazy chain has the same stationary vector and is aperiodic, so the
    iteration converges even when P itself alternates between states.
    """
    m = np.asarray(matrix, dtype=float)
    lazy = 0.5 * (m + np.eye(m.shape[0]))
    pi = np.full(m.shape[0], 1.0 / m.shape[0])
    for _ in range(max_steps):
        nxt = pi @ lazy
        if np.max(np.abs(nxt - pi)) < tol:
            return nxt
        pi = nxt
    return pi
