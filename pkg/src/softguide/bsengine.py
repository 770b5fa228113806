"""Birman-Schwinger machinery: fibers, bent-guide matrices, existence tests.

The object of study is the family of integral operators with kernel

    (1/2pi) W(s,u)^(1/2) K0(kappa |x(s,u) - x(s',u')|) W(s',u')^(1/2),

W = (1 + u gamma(s)) V(u), acting on the straightened strip.  A bound state
of the waveguide at energy -kappa^2 corresponds to eigenvalue 1 of this
operator.  Discretization is symmetrized Nystrom on a tensor grid of
Gauss panels (longitudinal) times Gauss nodes (transverse); the kernel's
logarithmic diagonal is never evaluated at zero distance, the diagonal
entries instead carry the exact cell average of K0 (closed-form log moment
plus a smooth remainder).

Quadrature-bias calibration: on identical grids, a straight guide wrapped
periodically has a known top eigenvalue (the p = 0 fiber value, up to
exp(-kappa S) wrap corrections), so the twin's eigenvalue error measures the
pure discretization bias of the assembly.  Subtracting it from the bent
curve removes the leading bias without touching the operator itself; both
raw and calibrated values are reported.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import brentq
from scipy.sparse.linalg import eigsh
from scipy.special import k0 as _k0

from .errors import ConvergenceError, ToleranceError, TruncationError
from .geometry import CurvatureProfile, FrenetTable
from .quadrature import leggauss
from .transverse import GroundState, TransverseWell

TWO_PI = 2.0 * np.pi

# ---------------------------------------------------------------------------
# fibers of the straight guide
# ---------------------------------------------------------------------------


def fiber_matrix(well: TransverseWell, kappa: float, p: float = 0.0,
                 n: int = 400, restrict_support: bool = False) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Symmetrized Nystrom matrix of the (kappa, p) fiber kernel.

    Kernel V^(1/2)(u) exp(-t|u-u'|)/(2t) V^(1/2)(u') with t^2 = kappa^2+p^2,
    on [-a, a] (or on supp V, which carries the same nonzero spectrum).
    Returns (matrix, nodes, weights).
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    t = float(np.hypot(kappa, p))
    if restrict_support:
        lo, hi = well.support
    else:
        lo, hi = -well.halfwidth, well.halfwidth
    gx, gw = leggauss(n)
    u = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gx
    w = 0.5 * (hi - lo) * gw
    g = np.sqrt(well(u) * w)
    kern = np.exp(-t * np.abs(u[:, None] - u[None, :])) / (2.0 * t)
    return g[:, None] * kern * g[None, :], u, w


def fiber_top_eigenvalue(well: TransverseWell, kappa: float, p: float = 0.0,
                         n: int = 400) -> float:
    """Largest eigenvalue of the (kappa, p) fiber; depends on kappa^2 + p^2."""
    mat, _, _ = fiber_matrix(well, kappa, p, n)
    return float(eigh(mat, eigvals_only=True, subset_by_index=[n - 1, n - 1])[0])


@dataclass(frozen=True)
class StraightCheck:
    """Residuals of the straight-guide identities at kappa0."""

    lambda_residual: float
    cosine_similarity: float
    dispersion_residuals: tuple[float, ...]
    n: int


def straight_bs_check(well: TransverseWell, state: GroundState, n: int = 400,
                      p_fractions=(0.3, 0.6)) -> StraightCheck:
    """Verify sup-spectrum 1 at kappa0 and the g0 eigenvector identity.

    Also samples the dispersion relation: the fiber at (kappa, p) with
    kappa^2 + p^2 = kappa0^2 must again have top eigenvalue 1.
    """
    kap0 = state.kappa
    mat, u, w = fiber_matrix(well, kap0, 0.0, n)
    vals, vecs = eigh(mat, subset_by_index=[n - 1, n - 1])
    lam, vec = float(vals[0]), vecs[:, 0]
    g0 = np.sqrt(well(u)) * state(u)
    ghat = vec / np.sqrt(w)
    denom = np.sqrt(np.dot(w * ghat, ghat) * np.dot(w * g0, g0))
    cos = abs(np.dot(w * ghat, g0)) / denom if denom > 0 else 0.0
    resid = []
    for f in p_fractions:
        p = f * kap0
        kap = kap0 * np.sqrt(1.0 - f * f)
        resid.append(abs(fiber_top_eigenvalue(well, kap, p, n) - 1.0))
    return StraightCheck(lambda_residual=abs(lam - 1.0),
                         cosine_similarity=float(cos),
                         dispersion_residuals=tuple(resid), n=n)


# ---------------------------------------------------------------------------
# generic symmetric top-eigenpair with residual control
# ---------------------------------------------------------------------------


def top_eigenvalue(matrix: np.ndarray, k: int = 1,
                   residual_tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """k largest eigenpairs of a symmetric matrix, residual-checked.

    Dense solve below 600 rows, deterministic Lanczos above.  Raises
    ConvergenceError if ||Mv - lam v|| / max|lam| exceeds residual_tol.
    """
    m = np.asarray(matrix)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(m, m.T, atol=1e-12 * max(1.0, float(np.max(np.abs(m))))):
        raise ValueError("matrix must be symmetric")
    if n <= 600 or k >= n - 1:
        vals, vecs = eigh(m)
        order = np.argsort(vals)[::-1][:k]
        vals, vecs = vals[order], vecs[:, order]
    else:
        v0 = np.full(n, 1.0 / np.sqrt(n))
        vals, vecs = eigsh(m, k=k, which="LA", v0=v0)
        order = np.argsort(vals)[::-1]
        vals, vecs = vals[order], vecs[:, order]
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    resid = float(np.max(np.linalg.norm(m @ vecs - vecs * vals[None, :], axis=0)))
    if resid / scale > residual_tol:
        raise ConvergenceError(
            f"eigen residual {resid / scale:.3e} above {residual_tol:.1e}")
    return vals, vecs


# ---------------------------------------------------------------------------
# bent-guide Nystrom operator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BentResolution:
    """Grid densities for the bent Birman-Schwinger matrix."""

    n_u: int = 14
    panels_per_kappa: float = 2.0     # longitudinal panels per 1/kappa
    gauss_s: int = 4
    max_nodes: int = 8000

    def refined(self) -> "BentResolution":
        return dataclasses.replace(self, n_u=self.n_u + 4,
                                   panels_per_kappa=1.5 * self.panels_per_kappa)


def truncation_halflength(profile: CurvatureProfile, kappa: float,
                          margin: float = 23.0) -> float:
    """Window half-length: curvature support plus margin/kappa decay lengths."""
    return profile.support_radius() + margin / kappa


_G8X, _G8W = np.polynomial.legendre.leggauss(8)


def _avg_log_r(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Exact mean of ln r over an alpha x beta rectangle centered at 0."""
    A, B = 0.5 * alpha, 0.5 * beta
    quarter = (A * B * np.log(np.hypot(A, B)) - 1.5 * A * B
               + 0.5 * A * A * np.arctan2(B, A) + 0.5 * B * B * np.arctan2(A, B))
    return 4.0 * quarter / (alpha * beta)


def _avg_k0_cell(kappa: float, alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Mean of K0(kappa r) over centered rectangles, log moment split off."""
    x = 0.25 * alpha[:, None] * (_G8X + 1.0)
    y = 0.25 * beta[:, None] * (_G8X + 1.0)
    wx = 0.25 * alpha[:, None] * _G8W
    wy = 0.25 * beta[:, None] * _G8W
    r = np.hypot(x[:, :, None], y[:, None, :])
    z = kappa * r
    smooth = _k0(z) + np.log(z)                       # bounded near 0
    avg_smooth = 4.0 * np.einsum("ijk,ij,ik->i", smooth, wx, wy) / (alpha * beta)
    return avg_smooth - np.log(kappa) - _avg_log_r(alpha, beta)


class BentBSMatrix:
    """Nystrom discretization of the straightened Birman-Schwinger operator.

    Geometry (node positions, pairwise distances, modified potential W) is
    assembled once; each spectral-parameter evaluation only re-applies K0 and
    re-solves for the top of the spectrum.  `periodic_straight=True` builds
    the zero-curvature twin with wrapped longitudinal distances, whose exact
    top eigenvalue is the p = 0 fiber value; it is used to measure the
    discretization bias of this exact grid.
    """

    def __init__(self, profile: CurvatureProfile, well: TransverseWell,
                 kappa0: float, halflength: float | None = None,
                 resolution: BentResolution = BentResolution(),
                 periodic_straight: bool = False):
        self.profile = profile
        self.well = well
        self.resolution = resolution
        if halflength is None:
            halflength = truncation_halflength(profile, kappa0)
        if halflength < profile.support_radius() + 5.0 / kappa0:
            raise TruncationError(
                "window shorter than the curvature support plus 5 decay lengths")
        self.halflength = float(halflength)

        width = 1.0 / (kappa0 * resolution.panels_per_kappa)
        n_pan = max(4, int(np.ceil(2.0 * self.halflength / width)))
        edges = np.linspace(-self.halflength, self.halflength, n_pan + 1)
        gx, gw = leggauss(resolution.gauss_s)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        s_nodes = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
        s_w = (half[:, None] * gw[None, :]).ravel()

        lo, hi = well.support
        ux, uw = leggauss(resolution.n_u)
        u_nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * ux
        u_w = 0.5 * (hi - lo) * uw

        ns, nu = len(s_nodes), len(u_nodes)
        n = ns * nu
        if n > resolution.max_nodes:
            raise TruncationError(
                f"{n} Nystrom nodes exceed the {resolution.max_nodes} budget; "
                "coarsen the grids or shorten the window")
        self.n = n
        self.s_nodes, self.s_weights = s_nodes, s_w
        self.u_nodes, self.u_weights = u_nodes, u_w
        self.periodic = periodic_straight

        if periodic_straight:
            gam = np.zeros(ns)
            pos = np.stack([s_nodes, np.zeros(ns)], axis=-1)
            nrm = np.tile(np.array([0.0, 1.0]), (ns, 1))
        else:
            table = FrenetTable(profile, -self.halflength - 0.5,
                                self.halflength + 0.5)
            gam = profile(s_nodes)
            pos, nrm = table.position_normal(s_nodes)

        jac = 1.0 + u_nodes[None, :] * gam[:, None]
        if np.any(jac <= 0):
            raise TruncationError("1 + u gamma <= 0 at a node; halfwidth assumption violated")
        self.jacobian = jac.ravel()
        vvals = well(u_nodes)
        self.wpot = (jac * vvals[None, :]).ravel()
        wtot = (s_w[:, None] * u_w[None, :]).ravel()
        self.wtot = wtot
        self.sqrt_wW = np.sqrt(wtot * self.wpot)
        self.points = (pos[:, None, :] + u_nodes[None, :, None] * nrm[:, None, :]
                       ).reshape(n, 2)
        # physical cell footprint: longitudinal width is stretched by the
        # jacobian, transverse width is the bare Gauss weight
        self.cell_alpha = np.repeat(s_w, nu) * self.jacobian
        self.cell_beta = np.tile(u_w, ns)

        self.dist = np.empty((n, n))
        blk = 512
        if periodic_straight:
            period = 2.0 * self.halflength
            su = np.empty((n, 2))
            su[:, 0] = np.repeat(s_nodes, nu)
            su[:, 1] = np.tile(u_nodes, ns)
            for i0 in range(0, n, blk):
                i1 = min(i0 + blk, n)
                ds = np.abs(su[i0:i1, 0][:, None] - su[:, 0][None, :])
                ds = np.minimum(ds, period - ds)
                du = su[i0:i1, 1][:, None] - su[:, 1][None, :]
                self.dist[i0:i1] = np.sqrt(ds * ds + du * du)
        else:
            P = self.points
            for i0 in range(0, n, blk):
                i1 = min(i0 + blk, n)
                dx = P[i0:i1, 0][:, None] - P[:, 0][None, :]
                dy = P[i0:i1, 1][:, None] - P[:, 1][None, :]
                self.dist[i0:i1] = np.sqrt(dx * dx + dy * dy)
        np.fill_diagonal(self.dist, 1.0)   # placeholder, replaced per kappa
        self._lam_cache: dict[tuple[float, int], np.ndarray] = {}
        self._vec_cache: dict[float, np.ndarray] = {}

    def matrix(self, kappa: float) -> np.ndarray:
        """Symmetrized Nystrom matrix at spectral parameter -kappa^2."""
        a = _k0(kappa * self.dist)
        a *= self.sqrt_wW[:, None]
        a *= self.sqrt_wW[None, :]
        a /= TWO_PI
        diag = self.wtot * self.wpot * _avg_k0_cell(
            kappa, self.cell_alpha, self.cell_beta) / TWO_PI
        np.fill_diagonal(a, diag)
        return a

    def top_eigenvalues(self, kappa: float, k: int = 1) -> np.ndarray:
        """k largest eigenvalues at this kappa (cached, deterministic)."""
        key = (round(float(kappa), 14), k)
        if key not in self._lam_cache:
            m = self.matrix(kappa)
            v0 = np.full(self.n, 1.0 / np.sqrt(self.n))
            vals = eigsh(m, k=k, which="LA", v0=v0, return_eigenvectors=False)
            self._lam_cache[key] = np.sort(vals)[::-1]
        return self._lam_cache[key]

    def top_eigenpair(self, kappa: float) -> tuple[float, np.ndarray]:
        kap = round(float(kappa), 14)
        if kap not in self._vec_cache:
            m = self.matrix(kappa)
            v0 = np.full(self.n, 1.0 / np.sqrt(self.n))
            vals, vecs = eigsh(m, k=1, which="LA", v0=v0)
            self._vec_cache[kap] = (float(vals[0]), vecs[:, 0])
        return self._vec_cache[kap]

    def kernel_edge_ratio(self, kappa: float) -> float:
        """Kernel mass at the window edge relative to its peak (truncation check)."""
        edge = _k0(kappa * 2.0 * self.halflength)
        peak = _k0(kappa * min(np.min(self.cell_beta), 1.0 / kappa))
        return float(edge / peak)


# ---------------------------------------------------------------------------
# calibrated eigenvalue curves and bound states
# ---------------------------------------------------------------------------


class SpectralCurve:
    """lambda_max(kappa) of a bent operator, with straight-twin calibration.

    calibrated(kappa) subtracts delta(kappa) = lambda_twin(kappa) -
    lambda_fiber(kappa), the measured discretization bias of the shared grid
    layout.  delta is sampled on a coarse kappa grid and interpolated with a
    quadratic fit, it varies slowly.
    """

    def __init__(self, bent: BentBSMatrix, twin: BentBSMatrix,
                 well: TransverseWell, fiber_n: int = 800):
        self.bent = bent
        self.twin = twin
        self.well = well
        self.fiber_n = fiber_n
        self._delta_fit: np.ndarray | None = None
        self._delta_range: tuple[float, float] | None = None

    def _fiber_reference(self, kappa: float) -> float:
        mat, _, _ = fiber_matrix(self.well, kappa, 0.0, self.fiber_n,
                                 restrict_support=True)
        return float(eigh(mat, eigvals_only=True,
                          subset_by_index=[self.fiber_n - 1, self.fiber_n - 1])[0])

    def delta(self, kappa: float) -> float:
        """Discretization bias measured on the periodic straight twin."""
        if self._delta_fit is not None:
            lo, hi = self._delta_range
            if lo <= kappa <= hi:
                return float(np.polyval(self._delta_fit, kappa))
        lam_twin = float(self.twin.top_eigenvalues(kappa, 1)[0])
        return lam_twin - self._fiber_reference(kappa)

    def fit_delta(self, lo: float, hi: float, n_samples: int = 4):
        ks = np.linspace(lo, hi, n_samples)
        ds = np.array([float(self.twin.top_eigenvalues(k, 1)[0])
                       - self._fiber_reference(k) for k in ks])
        self._delta_fit = np.polyfit(ks, ds, 2)
        self._delta_range = (lo, hi)

    def raw(self, kappa: float, branch: int = 0) -> float:
        return float(self.bent.top_eigenvalues(kappa, branch + 1)[branch])

    def calibrated(self, kappa: float, branch: int = 0) -> float:
        return self.raw(kappa, branch) - self.delta(kappa)


@dataclass(frozen=True)
class BoundState:
    kappa_star: float
    energy: float
    branch: int
    lambda_residual: float
    calibration: float          # bias subtracted at kappa_star
    kappa_star_raw: float | None


@dataclass(frozen=True)
class BoundStateSearch:
    states: tuple[BoundState, ...]
    kappa0: float
    halflength: float
    lambda_at_threshold: float          # calibrated lambda just above kappa0
    lambda_at_threshold_raw: float
    n_nodes: int

    @property
    def energies(self) -> tuple[float, ...]:
        return tuple(s.energy for s in self.states)


def find_bound_states(profile: CurvatureProfile, well: TransverseWell,
                      state: GroundState, halflength: float | None = None,
                      resolution: BentResolution = BentResolution(),
                      n_branches: int = 3, kappa_tol: float = 1e-10,
                      calibrate: bool = True) -> BoundStateSearch:
    """All kappa* > kappa0 with lambda(kappa*) = 1, by bracketed root search.

    The top eigenvalue curve is continuous and strictly decreasing, so each
    branch crossing unity is a bracketed root between kappa0 (exclusive) and
    kappa0 + sqrt(sup V), above which lambda < 1 by the norm bound
    lambda <= sup V / kappa^2.
    """
    kap0 = state.kappa
    bent = BentBSMatrix(profile, well, kap0, halflength, resolution)
    twin = BentBSMatrix(profile, well, kap0, bent.halflength, resolution,
                        periodic_straight=True)
    curve = SpectralCurve(bent, twin, well)
    kap_lo = kap0 * (1.0 + 1e-6)
    kap_hi = kap0 + np.sqrt(well.sup_norm)
    if calibrate:
        curve.fit_delta(kap_lo, kap_hi)

    lam_fn = curve.calibrated if calibrate else curve.raw
    lam_lo_top = lam_fn(kap_lo, 0)
    lam_raw_top = curve.raw(kap_lo, 0)
    states: list[BoundState] = []
    if lam_fn(kap_hi, 0) > 1.0:
        raise ConvergenceError(
            f"top eigenvalue still {lam_fn(kap_hi, 0):.4f} > 1 at the search cap")
    for b in range(n_branches):
        lam_here = lam_fn(kap_lo, b)
        if lam_here <= 1.0:
            break
        kap_star = brentq(lambda kk: lam_fn(kk, b) - 1.0, kap_lo, kap_hi,
                          xtol=kappa_tol)
        resid = abs(lam_fn(kap_star, b) - 1.0)
        kap_raw = None
        if calibrate and b == 0 and curve.raw(kap_lo, 0) > 1.0:
            kap_raw = brentq(lambda kk: curve.raw(kk, 0) - 1.0, kap_lo, kap_hi,
                             xtol=kappa_tol)
        states.append(BoundState(kappa_star=float(kap_star),
                                 energy=float(-kap_star ** 2), branch=b,
                                 lambda_residual=float(resid),
                                 calibration=float(curve.delta(kap_star)) if calibrate else 0.0,
                                 kappa_star_raw=kap_raw))
    search = BoundStateSearch(states=tuple(states), kappa0=float(kap0),
                              halflength=bent.halflength,
                              lambda_at_threshold=float(lam_lo_top),
                              lambda_at_threshold_raw=float(lam_raw_top),
                              n_nodes=bent.n)
    # stash the operator for eigenfunction reconstruction by callers
    search.__dict__["_operator"] = bent
    return search


# ---------------------------------------------------------------------------
# the existence condition: quadruple integral of the kernel difference
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExcessResolution:
    """(m, sigma) quadrature densities for the kernel-difference integrals."""

    panels_per_kappa: float = 2.0
    gauss_m: int = 5
    gauss_sigma: int = 5
    dyadic_depth: int = 24
    n_u: int = 12

    def refined(self) -> "ExcessResolution":
        return dataclasses.replace(self, panels_per_kappa=2.0 * self.panels_per_kappa,
                                   dyadic_depth=self.dyadic_depth + 2,
                                   n_u=self.n_u + 4)


def _sigma_rule(S: float, kappa: float, res: ExcessResolution):
    """Composite rule on sigma in (0, 2S], dyadically refined toward 0."""
    w = 1.0 / (kappa * res.panels_per_kappa)
    edges = [2.0 * S]
    x = 2.0 * S
    while x > w:
        x = max(x - w, w)
        edges.append(x)
    for k in range(1, res.dyadic_depth + 1):
        edges.append(w * 0.5 ** k)
    edges = np.array(sorted(set(edges)))
    edges = np.concatenate([[0.0], edges])
    gx, gw = leggauss(res.gauss_sigma)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    weights = (half[:, None] * gw[None, :]).ravel()
    return nodes, weights


def _excess_accumulate(profile: CurvatureProfile, kappa: float,
                       u_nodes: np.ndarray, S: float, res: ExcessResolution,
                       table: FrenetTable) -> np.ndarray:
    """Integral over {sigma > 0} of the kernel difference, per (u, u') pair.

    Returns ACC with ACC[a, b] = int dm dsigma G(m, sigma; u_a, u_b); the
    full symmetric integral over both sigma signs is ACC + ACC^T.  The
    integrand difference kills the K0 singularity up to terms handled by the
    dyadic sigma panels.
    """
    nu = len(u_nodes)
    sig_nodes, sig_weights = _sigma_rule(S, kappa, res)
    gm_x, gm_w = leggauss(res.gauss_m)
    w_m = 1.0 / (kappa * res.panels_per_kappa)
    du2 = (u_nodes[:, None] - u_nodes[None, :]) ** 2
    acc = np.zeros((nu, nu))
    for sig, wsig in zip(sig_nodes, sig_weights):
        m_hi = S - 0.5 * sig
        if m_hi <= -m_hi:
            continue
        n_pan = max(1, int(np.ceil(2.0 * m_hi / w_m)))
        edges = np.linspace(-m_hi, m_hi, n_pan + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        m_nodes = (mid[:, None] + half[:, None] * gm_x[None, :]).ravel()
        m_weights = (half[:, None] * gm_w[None, :]).ravel()

        s1 = m_nodes + 0.5 * sig
        s2 = m_nodes - 0.5 * sig
        pos1, nrm1 = table.position_normal(s1)
        pos2, nrm2 = table.position_normal(s2)
        g1 = profile(s1)
        g2 = profile(s2)
        # jacobian factors per (m, u)
        j1 = 1.0 + np.outer(g1, u_nodes)
        j2 = 1.0 + np.outer(g2, u_nodes)
        p1 = pos1[:, None, :] + u_nodes[None, :, None] * nrm1[:, None, :]
        p2 = pos2[:, None, :] + u_nodes[None, :, None] * nrm2[:, None, :]
        diff = p1[:, :, None, :] - p2[:, None, :, :]
        d = np.sqrt(np.sum(diff * diff, axis=-1))
        d0 = np.sqrt(sig * sig + du2)[None, :, :]
        kern = (np.sqrt(j1[:, :, None] * j2[:, None, :]) * _k0(kappa * d)
                - _k0(kappa * d0))
        acc += wsig * np.einsum("m,mab->ab", m_weights, kern)
    return acc


@dataclass(frozen=True)
class ExcessReport:
    value: float
    error_estimate: float
    coarse_value: float
    halflength: float
    sigma_nodes: int


def on_curve_excess(profile: CurvatureProfile, kappa0: float,
                    halflength: float | None = None,
                    resolution: ExcessResolution = ExcessResolution(),
                    with_error: bool = True) -> ExcessReport:
    """F(0,0): the on-axis kernel excess of the bent guide over the line.

    The integrand K0(kappa |Gamma(s) - Gamma(s')|) - K0(kappa |s - s'|) is
    pointwise nonnegative (arc length dominates the chord and K0 decreases),
    so a strictly positive value is meaningful at any resolution; the error
    estimate is the difference against a refined pass.
    """
    if halflength is None:
        halflength = truncation_halflength(profile, kappa0)
    table = FrenetTable(profile, -halflength - 0.5, halflength + 0.5)
    u0 = np.zeros(1)

    def run(res):
        acc = _excess_accumulate(profile, kappa0, u0, halflength, res, table)
        return 2.0 * float(acc[0, 0])

    coarse = run(resolution)
    if not with_error:
        return ExcessReport(value=coarse, error_estimate=float("nan"),
                            coarse_value=coarse, halflength=float(halflength),
                            sigma_nodes=len(_sigma_rule(halflength, kappa0, resolution)[0]))
    fine_res = resolution.refined()
    fine = run(fine_res)
    return ExcessReport(value=fine, error_estimate=abs(fine - coarse),
                        coarse_value=coarse, halflength=float(halflength),
                        sigma_nodes=len(_sigma_rule(halflength, kappa0, fine_res)[0]))


@dataclass(frozen=True)
class ConditionReport:
    """Existence condition integral with its certification."""

    value: float
    error_estimate: float
    coarse_value: float
    certified: bool
    normalized: float            # value / ||V phi0||_L2^2, for comparability
    halflength: float
    kappa0: float

    @property
    def predicts_bound_state(self) -> bool:
        return self.certified


def condition_integral(profile: CurvatureProfile, well: TransverseWell,
                       state: GroundState, halflength: float | None = None,
                       resolution: ExcessResolution = ExcessResolution(),
                       tolerance: float | None = None,
                       certify_factor: float = 10.0) -> ConditionReport:
    """Quadruple integral of the bent-minus-straight weighted kernel.

    Positivity at kappa0 is the sufficient condition for a curvature-induced
    bound state.  Certification requires the value to exceed `certify_factor`
    times the two-level quadrature error estimate.
    """
    kap0 = state.kappa
    if halflength is None:
        halflength = truncation_halflength(profile, kap0)
    table = FrenetTable(profile, -halflength - 0.5, halflength + 0.5)

    def run(res: ExcessResolution) -> float:
        gx, gw = leggauss(res.n_u)
        lo, hi = well.support
        u_nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gx
        u_w = 0.5 * (hi - lo) * gw
        q = u_w * well(u_nodes) * state(u_nodes)
        acc = _excess_accumulate(profile, kap0, u_nodes, halflength, res, table)
        f_mat = acc + acc.T
        return float(q @ f_mat @ q) / TWO_PI

    coarse = run(resolution)
    fine = run(resolution.refined())
    err = abs(fine - coarse)
    if tolerance is not None and err > tolerance:
        raise ToleranceError(
            f"condition-integral error estimate {err:.3e} exceeds tolerance {tolerance:.3e}")
    gx, gw = leggauss(64)
    lo, hi = well.support
    uu = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gx
    norm_vphi = float(np.sum(0.5 * (hi - lo) * gw * (well(uu) * state(uu)) ** 2))
    certified = bool(fine > certify_factor * max(err, 1e-300) and fine > 0.0)
    return ConditionReport(value=fine, error_estimate=err, coarse_value=coarse,
                           certified=certified,
                           normalized=fine / norm_vphi,
                           halflength=float(halflength), kappa0=float(kap0))


# ---------------------------------------------------------------------------
# eigenfunction reconstruction
# ---------------------------------------------------------------------------


def reconstruct_eigenfunction(search: BoundStateSearch, points,
                              branch: int = 0) -> np.ndarray:
    """Waveguide eigenfunction at plane points from the BS eigenvector.

    phi(x) = sum_i w_i^(1/2) (2pi)^(-1) K0(kappa* |x - x_i|) W_i^(1/2) v_i,
    the discrete image of the resolvent-kernel integral; decays like
    exp(-kappa* dist) away from the channel.
    """
    if branch >= len(search.states):
        raise ValueError("no bound state on that branch")
    bent: BentBSMatrix = search.__dict__["_operator"]
    kap = search.states[branch].kappa_star
    _, vec = bent.top_eigenpair(kap)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    coef = np.sqrt(bent.wtot) * np.sqrt(bent.wpot) * vec / TWO_PI
    out = np.empty(len(pts))
    blk = 2048
    for i0 in range(0, len(pts), blk):
        i1 = min(i0 + blk, len(pts))
        dx = pts[i0:i1, 0][:, None] - bent.points[:, 0][None, :]
        dy = pts[i0:i1, 1][:, None] - bent.points[:, 1][None, :]
        d = np.maximum(np.hypot(dx, dy), 1e-14)
        out[i0:i1] = _k0(kap * d) @ coef
    return out if np.ndim(points) > 1 else out
