"""Worst-case hidden-node area around a broadcasting node.

With all receivers on the edge of the sender's range R, anything inside the
2R disk may interfere with some receiver. Carrier sensing out to ``cs_radius``
removes the sensed part of that disk from the hidden area.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .analytic import NetworkParams
from .errors import DomainError

# slack for radii produced by sqrt round-off at the interval ends
_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class AreaBreakdown:
    a_tx: float
    a_cs: float
    a_ph: float
    hidden_fraction: float


def area_breakdown(radius: float, cs_radius: float) -> AreaBreakdown:
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    if not radius * (1 - _EDGE_TOL) <= cs_radius <= 2 * radius * (1 + _EDGE_TOL):
        raise DomainError(f"cs_radius must lie in [R, 2R] = [{radius}, {2 * radius}], got {cs_radius}")
    cs_radius = min(max(cs_radius, radius), 2 * radius)
    r2 = radius * radius
    a_tx = math.pi * r2
    a_cs = math.pi * (cs_radius * cs_radius - r2)
    a_ph = math.pi * (4 * r2 - cs_radius * cs_radius)
    return AreaBreakdown(a_tx=a_tx, a_cs=a_cs, a_ph=a_ph,
                         hidden_fraction=a_ph / (3 * math.pi * r2))


def hidden_count(params: NetworkParams, a_ph: float) -> float:
    """Expected number of nodes inside the potential hidden area."""
    a_max = 3 * math.pi * params.radius**2
    if not -_EDGE_TOL * a_max <= a_ph <= a_max * (1 + _EDGE_TOL):
        raise DomainError(f"hidden area must lie in [0, 3 pi R^2], got {a_ph}")
    return params.lam * min(max(a_ph, 0.0), a_max)


def fraction_to_cs_radius(radius: float, hidden_fraction: float) -> float:
    """Carrier-sense radius leaving ``hidden_fraction`` of the worst-case hidden area."""
    if not 0.0 <= hidden_fraction <= 1.0:
        raise DomainError(f"hidden fraction must be in [0, 1], got {hidden_fraction}")
    return radius * math.sqrt(4.0 - 3.0 * hidden_fraction)


def hidden_count_for_fraction(params: NetworkParams, hidden_fraction: float) -> float:
    cs = fraction_to_cs_radius(params.radius, hidden_fraction)
    return hidden_count(params, area_breakdown(params.radius, cs).a_ph)
