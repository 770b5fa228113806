"""Comparison thresholds: the thin-channel (delta) and deep-well limits.

Squeezing the channel as V_eps(u) = V(u/eps)/eps drives the transverse
threshold to -alpha^2/4 with alpha = int V; cranking the depth of a flat
bottom drives eps0 + V0 to the Dirichlet value pi^2/|J|^2.  Both limits are
checked numerically, never asserted with a rate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .transverse import FLAT, TransverseWell, solve_ground_state


def delta_coupling(well: TransverseWell) -> tuple[float, float]:
    """(alpha, -alpha^2/4): the squeezed-channel coupling and threshold."""
    alpha = well.integral()
    return alpha, -0.25 * alpha * alpha


def dirichlet_threshold(j_width: float) -> float:
    """pi^2 / |J|^2, the hard-wall continuum threshold for interval width |J|."""
    if j_width <= 0:
        raise ValueError("interval width must be positive")
    return float(np.pi ** 2 / j_width ** 2)


def scaled_well(well: TransverseWell, eps: float) -> TransverseWell:
    """V_eps(u) = V(u/eps)/eps; support and strip halfwidth shrink by eps."""
    if eps <= 0:
        raise ValueError("scale must be positive")
    if well.kind == FLAT:
        return TransverseWell(halfwidth=well.halfwidth * eps, kind=FLAT,
                              depth=well.depth / eps,
                              edge_lo=well.edge_lo * eps,
                              edge_hi=well.edge_hi * eps)
    return TransverseWell(halfwidth=well.halfwidth * eps, kind=well.kind,
                          samples_u=well.samples_u * eps,
                          samples_v=well.samples_v / eps)


@dataclass(frozen=True)
class LimitSummary:
    alpha: float
    delta_threshold: float
    dirichlet: float
    ladder: tuple[float, ...]
    energies: tuple[float, ...]
    gaps: tuple[float, ...]


def delta_limit_study(well: TransverseWell,
                      ladder=(1.0, 0.5, 0.25, 0.125, 0.0625)) -> LimitSummary:
    """Transverse threshold of the squeezed family along a scale ladder.

    Gaps |eps0(V_eps) + alpha^2/4| are reported in ladder order; they are
    expected (and tested) to decrease, but no rate is claimed.
    """
    alpha, thr = delta_coupling(well)
    energies = []
    for eps in ladder:
        state = solve_ground_state(scaled_well(well, eps))
        energies.append(state.energy)
    gaps = tuple(abs(e - thr) for e in energies)
    lo, hi = well.support
    return LimitSummary(alpha=alpha, delta_threshold=thr,
                        dirichlet=dirichlet_threshold(hi - lo),
                        ladder=tuple(ladder), energies=tuple(energies),
                        gaps=gaps)
