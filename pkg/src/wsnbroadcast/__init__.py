"""Throughput of broadcast MAC schemes in multi-hop wireless sensor networks.

Analytic Markov-chain model (:mod:`.analytic`), hidden-area geometry
(:mod:`.geometry`), a slot-level Monte Carlo simulator (:mod:`.simulator`)
and the sweep/CLI harness (:mod:`.experiments`, :mod:`.cli`).
"""

__version__ = "0.1.0"

from .analytic import (  # noqa: E402
    ChannelChain, NetworkParams, NodeChain, Scheme, SchemeParams, ThroughputResult,
    channel_chain, node_chain, poisson_pmf, solve_attempt_probability,
    solve_attempt_probability_damped, success_probability, throughput, vulnerable_slots,
)
from .geometry import (  # noqa: E402
    AreaBreakdown, area_breakdown, fraction_to_cs_radius, hidden_count,
    hidden_count_for_fraction,
)

__all__ = [
    "ChannelChain", "NetworkParams", "NodeChain", "Scheme", "SchemeParams", "ThroughputResult",
    "channel_chain", "node_chain", "poisson_pmf", "solve_attempt_probability",
    "solve_attempt_probability_damped", "success_probability", "throughput", "vulnerable_slots",
    "AreaBreakdown", "area_breakdown", "fraction_to_cs_radius", "hidden_count",
    "hidden_count_for_fraction",
]
