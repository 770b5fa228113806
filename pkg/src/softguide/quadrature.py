"""Quadrature rules and the Macdonald function K0.

Everything here is pure and deterministic; rules are plain frozen containers
of nodes and weights, safe to share between threads.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import k0 as _k0

_LEGGAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def macdonald_k0(x):
    """Modified Bessel function of the second kind, order zero.

    Accepts a positive scalar or array.  Arguments so large that the true
    value underflows return exactly 0.0 (the kernels built on top multiply
    K0 by bounded factors, so 0 is the correct limit).

    Raises ValueError for nonpositive or non-finite arguments.
    """
    arr = np.asarray(x, dtype=float)
    if arr.size and (not np.all(np.isfinite(arr)) or np.min(arr) <= 0.0):
        raise ValueError("macdonald_k0 requires finite x > 0")
    out = _k0(arr)
    if np.ndim(x) == 0:
        return float(out)
    return out


def leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Cached Gauss-Legendre nodes/weights on [-1, 1]."""
    if n not in _LEGGAUSS_CACHE:
        _LEGGAUSS_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _LEGGAUSS_CACHE[n]


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights on a fixed interval (default the reference [-1, 1])."""

    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-d arrays of equal length")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        length = self.interval[1] - self.interval[0]
        if abs(weights.sum() - length) > 1e-13 * max(1.0, abs(length)):
            raise ValueError("weights do not sum to the interval length")

    def integrate(self, f) -> float:
        return float(np.dot(np.asarray(f(self.nodes), dtype=float), self.weights))

    def mapped(self, lo: float, hi: float) -> "QuadratureRule":
        """Affine image of the rule on [lo, hi]."""
        a, b = self.interval
        scale = (hi - lo) / (b - a)
        return QuadratureRule(lo + (self.nodes - a) * scale, self.weights * scale, (lo, hi))


def gauss_legendre(n: int) -> QuadratureRule:
    """n-point Gauss-Legendre rule on [-1, 1], exact through degree 2n-1."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= 256:
        raise ValueError(f"gauss_legendre order must be an integer in [1, 256], got {n!r}")
    x, w = leggauss(int(n))
    return QuadratureRule(x, w)


@dataclass(frozen=True)
class PanelPartition:
    """Strictly increasing breakpoints, optionally dyadically refined.

    `depth` records how many times the panel adjacent to the marked point was
    halved; it is metadata for reporting, the geometry lives in `breakpoints`.
    """

    breakpoints: np.ndarray
    depth: int = 0

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        object.__setattr__(self, "breakpoints", bp)
        if bp.ndim != 1 or bp.size < 2:
            raise ValueError("need at least two breakpoints")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if self.depth < 0:
            raise ValueError("depth must be nonnegative")

    @classmethod
    def uniform(cls, lo: float, hi: float, n_panels: int) -> "PanelPartition":
        if n_panels < 1 or not hi > lo:
            raise ValueError("need hi > lo and at least one panel")
        return cls(np.linspace(lo, hi, n_panels + 1))

    @classmethod
    def dyadic(cls, lo: float, hi: float, toward: float, depth: int = 24,
               coarse: float | None = None) -> "PanelPartition":
        """Graded partition whose panels halve toward one endpoint.

        `toward` must be `lo` or `hi`.  Panels of width <= `coarse` (default
        the full interval) are split off the far end first, then halved
        `depth` times approaching the marked point.
        """
        if not hi > lo:
            raise ValueError("need hi > lo")
        length = hi - lo
        if coarse is None or coarse >= length:
            pts = [lo, hi]
        else:
            n_far = int(np.ceil(length / coarse))
            pts = list(np.linspace(lo, hi, n_far + 1))
        if toward == lo:
            w = pts[1] - pts[0]
            extra = [lo + w * 0.5 ** k for k in range(1, depth + 1)]
            bp = np.array(sorted(set(pts + extra)))
        elif toward == hi:
            w = pts[-1] - pts[-2]
            extra = [hi - w * 0.5 ** k for k in range(1, depth + 1)]
            bp = np.array(sorted(set(pts + extra)))
        else:
            raise ValueError("`toward` must coincide with lo or hi")
        return cls(bp, depth=depth)


def composite_rule(partition: PanelPartition, base: QuadratureRule) -> QuadratureRule:
    """Concatenate affine images of `base` over every panel of `partition`."""
    bp = partition.breakpoints
    a, b = base.interval
    scale = (bp[1:] - bp[:-1]) / (b - a)
    nodes = bp[:-1, None] + (base.nodes[None, :] - a) * scale[:, None]
    weights = base.weights[None, :] * scale[:, None]
    return QuadratureRule(nodes.ravel(), weights.ravel(), (float(bp[0]), float(bp[-1])))
