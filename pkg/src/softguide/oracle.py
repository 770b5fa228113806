"""Independent ground truth: 2D finite differences for -Laplacian - V.

Five-point Dirichlet discretization on a box that contains the potential
strip with a wide decay margin.  This module deliberately shares nothing
with the Birman-Schwinger engine beyond curve projection: eigenvalues come
from sparse linear algebra on the PDE, so agreement between the two routes
is evidence, not tautology.

The channel potential is discontinuous across the strip boundary; sampling
it pointwise at nodes makes the eigenvalue error wobble irregularly in h and
defeats Richardson extrapolation (measured, not hypothesized).  Boundary
cells therefore carry the exact area fraction of the strip, computed from
the locally linear signed distance: the cut of a square cell by a half-plane
has a closed-form area.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg, eigsh, lobpcg

from .errors import ConvergenceError
from .geometry import CurvatureProfile, PlanarCurve, _project_points, reconstruct_curve
from .transverse import FLAT, GroundState, TransverseWell


@dataclass(frozen=True)
class BoxGrid:
    """Uniform Dirichlet box; nodes are the interior lattice points."""

    x0: float
    y0: float
    x1: float
    y1: float
    h: float

    @property
    def xs(self) -> np.ndarray:
        n = int(round((self.x1 - self.x0) / self.h))
        return self.x0 + self.h * np.arange(1, n)

    @property
    def ys(self) -> np.ndarray:
        n = int(round((self.y1 - self.y0) / self.h))
        return self.y0 + self.h * np.arange(1, n)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.xs), len(self.ys))

    @property
    def n_nodes(self) -> int:
        nx, ny = self.shape
        return nx * ny

    def nodes(self) -> np.ndarray:
        X, Y = np.meshgrid(self.xs, self.ys, indexing="ij")
        return np.stack([X.ravel(), Y.ravel()], axis=-1)

    def coarsened(self) -> "BoxGrid":
        return dataclasses.replace(self, h=2.0 * self.h)


def default_step(well: TransverseWell, kappa0: float) -> float:
    return min(0.1 / kappa0, well.halfwidth / 8.0)


def box_for_scenario(profile: CurvatureProfile, well: TransverseWell,
                     state: GroundState, margin_lengths: float = 15.0,
                     step: float | None = None) -> tuple[BoxGrid, PlanarCurve]:
    """Box containing the strip over the truncation window plus decay margin.

    The curve window extends one extra unit past the box so projections of
    candidate nodes never run off the sampled arc.
    """
    kap0 = state.kappa
    margin = margin_lengths / kap0
    s_box = profile.support_radius() + margin
    grid = np.arange(-s_box - 1.0, s_box + 1.0 + 1e-9, 0.01)
    curve = reconstruct_curve(profile, 0.0, (0.0, 0.0), grid)
    window = np.abs(curve.s) <= s_box
    pts = curve.points[window]
    pad = well.halfwidth + margin
    h = default_step(well, kap0) if step is None else step
    if h * kap0 >= 0.2:
        raise ValueError("grid step too coarse: need h * kappa0 < 0.2")
    box = BoxGrid(x0=float(pts[:, 0].min() - pad), y0=float(pts[:, 1].min() - pad),
                  x1=float(pts[:, 0].max() + pad), y1=float(pts[:, 1].max() + pad),
                  h=float(h))
    return box, curve


def _cut_square_area(delta: np.ndarray, nx: np.ndarray, ny: np.ndarray,
                     h: float) -> np.ndarray:
    """Area of {p . n <= delta} inside a centered h x h square, unit normal n.

    Piecewise quadratic in delta: zero below the far corner, a corner
    triangle, a linear trapezoid band, the complementary corner triangle,
    then the full square.
    """
    ahi = np.maximum(np.abs(nx), np.abs(ny))
    alo = np.minimum(np.abs(nx), np.abs(ny))
    d1 = 0.5 * h * (ahi - alo)
    d2 = 0.5 * h * (ahi + alo)
    prod = np.where(ahi * alo > 0, 2.0 * ahi * alo, 1.0)
    return np.select(
        [delta <= -d2, delta < -d1, delta <= d1, delta < d2],
        [0.0,
         (delta + d2) ** 2 / prod,
         0.5 * h * h + delta * h / np.where(ahi > 0, ahi, 1.0),
         h * h - (d2 - delta) ** 2 / prod],
        default=h * h)


def potential_on_grid(curve: PlanarCurve, well: TransverseWell,
                      grid: BoxGrid) -> np.ndarray:
    """Channel potential at the grid nodes, strip-boundary cells averaged.

    Interior strip nodes get V(u) exactly; cells cut by the strip boundary
    get V times the exact cell/strip overlap fraction inferred from the
    locally linear signed distance (flat wells), or plain V(u) for smooth
    sampled wells where no jump exists.
    """
    pts = grid.nodes()
    a = well.halfwidth
    h = grid.h
    s, u, inside, _ = _project_points(curve, pts, a, slack=2.0 * h)
    v = np.zeros(len(pts))
    near = np.isfinite(u)
    if well.kind != FLAT:
        v[near & inside] = well(u[near & inside])
        return v
    lo, hi = well.edge_lo, well.edge_hi
    band = near & (u > lo - 1.5 * h) & (u < hi + 1.5 * h)
    if not np.any(band):
        return v
    nvec = curve.normal_at(s[band])
    nx, ny = nvec[..., 0], nvec[..., 1]
    # fraction of the cell with u_point < hi minus fraction with u_point < lo
    upper = _cut_square_area(hi - u[band], nx, ny, h)
    lower = _cut_square_area(lo - u[band], nx, ny, h)
    v[band] = well.depth * np.clip((upper - lower) / (h * h), 0.0, 1.0)
    return v


@dataclass
class SparseHamiltonian:
    matrix: sp.csr_matrix
    grid: BoxGrid
    potential: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def assemble(curve: PlanarCurve, well: TransverseWell, grid: BoxGrid,
             node_budget: int = 3_000_000) -> SparseHamiltonian:
    """Five-point -Laplacian minus the channel potential, Dirichlet edges."""
    nx, ny = grid.shape
    if nx * ny > node_budget:
        raise MemoryError(f"{nx * ny} nodes exceed the {node_budget} budget")
    h2 = grid.h ** 2
    dx = sp.diags([np.ones(nx - 1), -2.0 * np.ones(nx), np.ones(nx - 1)],
                  [-1, 0, 1]) / h2
    dy = sp.diags([np.ones(ny - 1), -2.0 * np.ones(ny), np.ones(ny - 1)],
                  [-1, 0, 1]) / h2
    v = potential_on_grid(curve, well, grid)
    ham = (-sp.kronsum(dy, dx, format="csr") - sp.diags(v)).tocsr()
    return SparseHamiltonian(matrix=ham, grid=grid, potential=v)


def _prolong(field: np.ndarray, coarse: BoxGrid, fine: BoxGrid) -> np.ndarray:
    """Bilinear interpolation of a coarse node field onto the fine lattice."""
    from scipy.interpolate import RegularGridInterpolator

    nxc, nyc = coarse.shape
    padded = np.zeros((nxc + 2, nyc + 2))
    padded[1:-1, 1:-1] = field.reshape(nxc, nyc)
    xs = np.concatenate([[coarse.x0], coarse.xs, [coarse.x1]])
    ys = np.concatenate([[coarse.y0], coarse.ys, [coarse.y1]])
    interp = RegularGridInterpolator((xs, ys), padded, method="linear",
                                     bounds_error=False, fill_value=0.0)
    return interp(fine.nodes())


def lowest_eigenvalues(ham: SparseHamiltonian, k: int = 4,
                       target: float | None = None,
                       initial: np.ndarray | None = None,
                       residual_tol: float = 1e-8,
                       direct_limit: int = 420_000):
    """k lowest eigenpairs of the sparse Hamiltonian.

    Small problems go through shift-invert Lanczos with a direct
    factorization; large ones use LOBPCG preconditioned by smoothed
    aggregation, warm-started from `initial` when given (two-grid mode), with
    a shift-inverted Lanczos fallback if residuals miss the target.  All
    starting vectors are fixed, so repeated runs are bit-identical.
    """
    H = ham.matrix
    n = H.shape[0]
    if target is None:
        target = float(-np.max(ham.potential) - 1.0)
    scale = float(np.abs(H).sum(axis=1).max())

    def _check(vals, vecs):
        resid = np.linalg.norm(H @ vecs - vecs * vals[None, :], axis=0)
        return np.max(resid) <= residual_tol * scale

    if n <= direct_limit:
        v0 = np.full(n, 1.0 / np.sqrt(n))
        vals, vecs = eigsh(H, k=k, sigma=target, which="LM", v0=v0)
        order = np.argsort(vals)
        return vals[order], vecs[:, order]

    import pyamg

    shifted = (H - target * sp.eye(n, format="csr")).tocsr()
    ml = pyamg.smoothed_aggregation_solver(shifted, max_coarse=1000)
    if initial is not None and initial.shape == (n, k):
        X = initial.copy()
    else:
        # deterministic, loosely oscillatory starting block
        idx = np.arange(n, dtype=float)
        X = np.cos(np.outer(idx, np.arange(1, k + 1)) * (np.pi / n)) + 1e-3
    vals, vecs = lobpcg(H, X, M=ml.aspreconditioner(), largest=False,
                        tol=residual_tol * scale * 0.3, maxiter=120)
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    if _check(vals, vecs):
        return vals, vecs

    def solve(b):
        x, info = cg(shifted, b, rtol=1e-10, atol=0.0,
                     M=ml.aspreconditioner(), maxiter=600)
        if info != 0:
            raise ConvergenceError(f"inner CG failed (info={info})")
        return x

    opinv = LinearOperator((n, n), matvec=solve)
    v0 = np.full(n, 1.0 / np.sqrt(n))
    vals, vecs = eigsh(H, k=k, sigma=target, which="LM", OPinv=opinv, v0=v0)
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    if not _check(vals, vecs):
        raise ConvergenceError("eigen residuals above tolerance after fallback")
    return vals, vecs


@dataclass(frozen=True)
class OracleVerdict:
    """Two-level FD eigenvalues with a conservative below-threshold count."""

    energies: tuple[float, ...]          # Richardson-extrapolated
    energies_fine: tuple[float, ...]
    energies_coarse: tuple[float, ...]
    error_estimates: tuple[float, ...]   # |fine - coarse| / 3 per state
    epsilon0: float
    below_threshold: tuple[bool, ...]
    inconclusive: tuple[bool, ...]
    n_below: int
    h_fine: float

    @property
    def found_discrete_spectrum(self) -> bool:
        return self.n_below > 0


def discrete_spectrum_report(profile: CurvatureProfile, well: TransverseWell,
                             state: GroundState, k: int = 4,
                             margin_lengths: float = 15.0,
                             step: float | None = None,
                             safety: float = 3.0) -> OracleVerdict:
    """Run the FD oracle on a (2h, h) ladder and classify eigenvalues.

    An extrapolated eigenvalue counts as discrete spectrum only when it sits
    below epsilon0 by more than `safety` times the observed Richardson error
    |E_h - E_2h| / 3; values inside the bar are reported as inconclusive.
    """
    fine, curve = box_for_scenario(profile, well, state, margin_lengths, step)
    coarse = fine.coarsened()
    sigma = state.energy - well.sup_norm / 2.0

    ham_c = assemble(curve, well, coarse)
    vals_c, vecs_c = lowest_eigenvalues(ham_c, k=k, target=sigma)
    ham_f = assemble(curve, well, fine)
    warm = np.column_stack([_prolong(vecs_c[:, j], coarse, fine)
                            for j in range(vecs_c.shape[1])])
    vals_f, _ = lowest_eigenvalues(ham_f, k=k, target=sigma, initial=warm)

    kk = min(len(vals_c), len(vals_f))
    extrap = (4.0 * vals_f[:kk] - vals_c[:kk]) / 3.0
    err = np.abs(vals_f[:kk] - vals_c[:kk]) / 3.0
    below = extrap < state.energy - safety * err
    inconc = np.abs(extrap - state.energy) <= safety * err
    return OracleVerdict(energies=tuple(float(e) for e in extrap),
                         energies_fine=tuple(float(e) for e in vals_f[:kk]),
                         energies_coarse=tuple(float(e) for e in vals_c[:kk]),
                         error_estimates=tuple(float(e) for e in err),
                         epsilon0=float(state.energy),
                         below_threshold=tuple(bool(b) for b in below),
                         inconclusive=tuple(bool(b) for b in inconc),
                         n_below=int(np.sum(below)), h_fine=float(fine.h))


def dump_eigenvector(path, grid: BoxGrid, vec: np.ndarray):
    """Plain-text 'x y value' rows for external plotting."""
    pts = grid.nodes()
    with open(path, "w", encoding="utf-8") as f:
        for (x, y), v in zip(pts, vec):
            f.write(f"{x:.10g} {y:.10g} {v:.10g}\n")
