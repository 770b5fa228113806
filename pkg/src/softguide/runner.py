"""Scenario execution: dependency-ordered analyses assembled into a report.

Analyses run in a fixed order (validation, transverse solve, then the
independent investigations); a failure inside one analysis is recorded in
the report's error map without aborting the others, only configuration
validation is fatal.  Execution is sequential and deterministic regardless
of the configured worker count, which is recorded for interface stability.
"""
from __future__ import annotations

import dataclasses
import time

import numpy as np

from . import bsengine, limits as limits_mod, oracle as oracle_mod
from .config import ANALYSES, ScenarioConfig
from .errors import SoftguideError
from .geometry import FrenetTable, validate_assumptions
from .report import (AssumptionSection, BoundStateEntry, BoundStatesSection,
                     ExistenceSection, LimitsSection, Measurement, OracleSection,
                     RunReport, StraightCheckSection, SweepRow, TransverseSection)
from .transverse import neumann_threshold, solve_ground_state

_ORDER = ("validate", "transverse", "straight-check", "exists",
          "bound-states", "oracle", "limits")
_NEEDS_TRANSVERSE = {"straight-check", "exists", "bound-states", "oracle", "limits"}


def resolve_analyses(requested) -> list[str]:
    """Dependency-closed, fixed-order analysis list."""
    want = set(requested)
    if want & _NEEDS_TRANSVERSE:
        want.add("transverse")
    want.add("validate")
    return [a for a in _ORDER if a in want]


def _transverse_state_count(well) -> int | None:
    """Number of transverse bound states (flat wells: exact mode count)."""
    if well.kind != "flat":
        return None
    w = 0.5 * (well.edge_hi - well.edge_lo)
    return 1 + int(np.floor(2.0 * w * np.sqrt(well.depth) / np.pi))


def run(config: ScenarioConfig, analyses=None) -> RunReport:
    """Execute the requested analyses (default: the config's run block)."""
    requested = list(analyses) if analyses is not None else list(config.run.analyses)
    for a in requested:
        if a not in ANALYSES:
            raise SoftguideError(f"unknown analysis {a!r}")
    plan = resolve_analyses(requested)
    report = RunReport(config=config)
    report.analyses_run = plan
    profile = config.profile.build()
    well = config.well.build()
    num = config.numerics
    state = None

    for name in plan:
        t0 = time.perf_counter()
        try:
            if name == "validate":
                window = profile.support_radius() + 8.0 * max(well.halfwidth, 1.0)
                rep = validate_assumptions(profile, well.halfwidth, window,
                                           seed=config.seed)
                report.assumptions = AssumptionSection(
                    sup_gamma=rep.sup_gamma, halfwidth=rep.halfwidth,
                    product=rep.product, halfwidth_ok=rep.halfwidth_ok,
                    smooth_ok=rep.smooth_ok,
                    injectivity_margin=rep.injectivity_margin,
                    injectivity_ok=rep.injectivity_ok,
                    compact_support=rep.compact_support,
                    decay_values=rep.decay_values, all_ok=rep.all_ok)
            elif name == "transverse":
                state = solve_ground_state(well)
                sec = TransverseSection(
                    epsilon0=Measurement(value=state.energy, method=state.method),
                    kappa0=Measurement(value=state.kappa, method=state.method),
                    sup_v=well.sup_norm, alpha=well.integral(),
                    n_transverse_states=_transverse_state_count(well))
                if num.neumann_u1 is not None:
                    sec.neumann_u1 = num.neumann_u1
                    sec.neumann_value = Measurement(
                        value=neumann_threshold(well, num.neumann_u1),
                        method="analytic" if well.kind == "flat" else "fd")
                report.transverse = sec
            elif name == "straight-check":
                chk = bsengine.straight_bs_check(well, state, n=num.fiber_n)
                report.straight_check = StraightCheckSection(
                    lambda_residual=chk.lambda_residual,
                    cosine_similarity=chk.cosine_similarity,
                    dispersion_residuals=list(chk.dispersion_residuals),
                    fiber_n=chk.n)
            elif name == "exists":
                ci = bsengine.condition_integral(
                    profile, well, state, halflength=num.halflength,
                    resolution=num.excess_resolution(),
                    certify_factor=num.certify_factor)
                exc = bsengine.on_curve_excess(
                    profile, state.kappa,
                    halflength=num.halflength,
                    resolution=num.excess_resolution())
                report.existence = ExistenceSection(
                    condition_integral=Measurement(value=ci.value, method="nystrom",
                                                   error=ci.error_estimate),
                    condition_normalized=ci.normalized, certified=ci.certified,
                    on_curve_excess=Measurement(value=exc.value, method="nystrom",
                                                error=exc.error_estimate),
                    halflength=ci.halflength)
            elif name == "bound-states":
                search = bsengine.find_bound_states(
                    profile, well, state, halflength=num.halflength,
                    resolution=num.bent_resolution(), n_branches=num.n_branches,
                    kappa_tol=num.kappa_tol, calibrate=num.calibrate)
                entries = [BoundStateEntry(
                    branch=s.branch, kappa_star=s.kappa_star,
                    energy=Measurement(value=s.energy, method="nystrom",
                                       error=abs(s.calibration) * 2.0 * s.kappa_star),
                    calibration=s.calibration, kappa_star_raw=s.kappa_star_raw)
                    for s in search.states]
                curve_pts = sorted(
                    (k, float(v[0])) for (k, _n), v in
                    search.__dict__["_operator"]._lam_cache.items())
                axis_slice = None
                if search.states:
                    ss = np.linspace(-search.halflength, search.halflength, 201)
                    table = FrenetTable(profile, ss[0] - 0.5, ss[-1] + 0.5)
                    pts, _ = table.position_normal(ss)
                    vals = bsengine.reconstruct_eigenfunction(search, pts)
                    peak = np.max(np.abs(vals))
                    if peak > 0:
                        vals = vals / peak
                    axis_slice = [(float(a), float(b)) for a, b in zip(ss, vals)]
                report.bound_states = BoundStatesSection(
                    states=entries,
                    lambda_at_threshold=search.lambda_at_threshold,
                    lambda_at_threshold_raw=search.lambda_at_threshold_raw,
                    halflength=search.halflength, n_nodes=search.n_nodes,
                    lambda_curve=[(float(a), float(b)) for a, b in curve_pts],
                    axis_slice=axis_slice)
            elif name == "oracle":
                verdict = oracle_mod.discrete_spectrum_report(
                    profile, well, state, k=num.eig_count,
                    margin_lengths=num.oracle_margin_lengths,
                    step=num.oracle_step)
                report.oracle = OracleSection(
                    energies=[Measurement(value=e, method="fd", error=er)
                              for e, er in zip(verdict.energies,
                                               verdict.error_estimates)],
                    energies_fine=list(verdict.energies_fine),
                    energies_coarse=list(verdict.energies_coarse),
                    epsilon0=verdict.epsilon0,
                    below_threshold=list(verdict.below_threshold),
                    inconclusive=list(verdict.inconclusive),
                    n_below=verdict.n_below, h_fine=verdict.h_fine)
            elif name == "limits":
                summary = limits_mod.delta_limit_study(well)
                report.limits = LimitsSection(
                    alpha=summary.alpha, delta_threshold=summary.delta_threshold,
                    dirichlet_threshold=summary.dirichlet,
                    ladder=list(summary.ladder), energies=list(summary.energies),
                    gaps=list(summary.gaps))
        except Exception as exc:  # analysis-local failure, keep going
            report.errors[name] = f"{type(exc).__name__}: {exc}"
        finally:
            report.timing[name] = time.perf_counter() - t0
        if name == "transverse" and state is None:
            break   # downstream analyses all need the ground state
    return report


_AXIS_FIELD = {"amplitude": ("profile", "amplitude"), "depth": ("well", "depth"),
               "halfwidth": ("well", "halfwidth")}


def _with_axis_value(config: ScenarioConfig, axis: str, value: float) -> ScenarioConfig:
    data = config.model_dump()
    data.pop("sweep", None)
    if axis == "scale":
        # squeeze the well: V -> V/eps on eps-scaled support, strip follows
        wd = data["well"]
        eps = value
        if wd["kind"] == "flat":
            lo, hi = wd["j"] if wd["j"] is not None else (-wd["halfwidth"], wd["halfwidth"])
            wd["j"] = (lo * eps, hi * eps)
            wd["depth"] = wd["depth"] / eps
        else:
            wd["samples_u"] = [u * eps for u in wd["samples_u"]]
            wd["samples_v"] = [v / eps for v in wd["samples_v"]]
        wd["halfwidth"] = wd["halfwidth"] * eps
    else:
        block, fieldname = _AXIS_FIELD[axis]
        data[block][fieldname] = value
    return ScenarioConfig.model_validate(data)


def run_sweep(config: ScenarioConfig) -> RunReport:
    """One analysis batch per sweep value, flattened into a row table."""
    if config.sweep is None:
        raise SoftguideError("sweep requested but no sweep block configured")
    rows = []
    base = RunReport(config=config)
    base.analyses_run = ["sweep"]
    t0 = time.perf_counter()
    for value in config.sweep.values:
        sub = _with_axis_value(config, config.sweep.axis, value)
        rep = run(sub, analyses=config.sweep.analyses)
        row = SweepRow(c=value)
        if rep.transverse is not None:
            row.epsilon0 = rep.transverse.epsilon0.value
        if rep.existence is not None:
            row.condition_integral = rep.existence.condition_integral.value
            row.excess_F00 = rep.existence.on_curve_excess.value
        if rep.bound_states is not None and rep.bound_states.states:
            row.kappa_star = rep.bound_states.states[0].kappa_star
            row.energy_bs = rep.bound_states.states[0].energy.value
        if rep.oracle is not None and rep.oracle.n_below > 0:
            idx = list(rep.oracle.below_threshold).index(True)
            row.energy_fd = rep.oracle.energies[idx].value
            row.fd_error = rep.oracle.energies[idx].error
        for key, msg in rep.errors.items():
            base.errors[f"{config.sweep.axis}={value}:{key}"] = msg
        rows.append(row)
    base.sweep = rows
    base.timing["sweep"] = time.perf_counter() - t0
    return base
