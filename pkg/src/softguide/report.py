"""Run report schema and emission (canonical JSON, fixed-header CSV tables)."""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from .config import ScenarioConfig

SCHEMA_VERSION = "softguide-report/1"

SWEEP_HEADER = ["c", "epsilon0", "condition_integral", "excess_F00",
                "kappa_star", "energy_bs", "energy_fd", "fd_error"]
LAMBDA_HEADER = ["kappa", "lambda_max"]
SLICE_HEADER = ["s", "phi"]
ORACLE_HEADER = ["index", "energy", "energy_fine", "energy_coarse",
                 "error_estimate", "below_epsilon0", "inconclusive"]


class Measurement(BaseModel):
    """A number with its provenance tag and an error estimate when available."""

    model_config = ConfigDict(extra="forbid")
    value: float
    method: str                      # analytic | nystrom | fd
    error: Optional[float] = None


class AssumptionSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    sup_gamma: float
    halfwidth: float
    product: float
    halfwidth_ok: bool
    smooth_ok: bool
    injectivity_margin: float
    injectivity_ok: bool
    compact_support: bool
    decay_values: dict
    all_ok: bool


class TransverseSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    epsilon0: Measurement
    kappa0: Measurement
    sup_v: float
    alpha: float
    n_transverse_states: Optional[int] = None
    neumann_u1: Optional[float] = None
    neumann_value: Optional[Measurement] = None


class StraightCheckSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    lambda_residual: float
    cosine_similarity: float
    dispersion_residuals: list[float]
    fiber_n: int


class ExistenceSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    condition_integral: Measurement
    condition_normalized: float
    certified: bool
    on_curve_excess: Measurement
    halflength: float


class BoundStateEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")
    branch: int
    kappa_star: float
    energy: Measurement
    calibration: float
    kappa_star_raw: Optional[float] = None


class BoundStatesSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    states: list[BoundStateEntry]
    lambda_at_threshold: float
    lambda_at_threshold_raw: float
    halflength: float
    n_nodes: int
    lambda_curve: list[tuple[float, float]]
    axis_slice: Optional[list[tuple[float, float]]] = None


class OracleSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    energies: list[Measurement]
    energies_fine: list[float]
    energies_coarse: list[float]
    epsilon0: float
    below_threshold: list[bool]
    inconclusive: list[bool]
    n_below: int
    h_fine: float


class LimitsSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    alpha: float
    delta_threshold: float
    dirichlet_threshold: float
    ladder: list[float]
    energies: list[float]
    gaps: list[float]


class SweepRow(BaseModel):
    model_config = ConfigDict(extra="forbid")
    c: float
    epsilon0: Optional[float] = None
    condition_integral: Optional[float] = None
    excess_F00: Optional[float] = None
    kappa_star: Optional[float] = None
    energy_bs: Optional[float] = None
    energy_fd: Optional[float] = None
    fd_error: Optional[float] = None


class RunReport(BaseModel):
    """Everything a run produced, including the fully defaulted config."""

    model_config = ConfigDict(extra="forbid")
    schema_version: str = SCHEMA_VERSION
    config: ScenarioConfig
    analyses_run: list[str] = Field(default_factory=list)
    assumptions: Optional[AssumptionSection] = None
    transverse: Optional[TransverseSection] = None
    straight_check: Optional[StraightCheckSection] = None
    existence: Optional[ExistenceSection] = None
    bound_states: Optional[BoundStatesSection] = None
    oracle: Optional[OracleSection] = None
    limits: Optional[LimitsSection] = None
    sweep: Optional[list[SweepRow]] = None
    errors: dict[str, str] = Field(default_factory=dict)
    timing: dict[str, float] = Field(default_factory=dict)


def report_json(report: RunReport) -> str:
    """Canonical JSON: sorted keys, fixed separators; bit-stable per input."""
    return json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2)


def strip_timing(payload: dict) -> dict:
    out = dict(payload)
    out.pop("timing", None)
    return out


def _write_csv(path: Path, header: list[str], rows) -> Path:
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])
    return path


def emit(report: RunReport, out_dir, fmt: str = "both") -> list[str]:
    """Write report.json and per-analysis CSV tables; returns written paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        if fmt in ("json", "both"):
            p = out / "report.json"
            p.write_text(report_json(report), encoding="utf-8")
            written.append(str(p))
        if fmt in ("csv", "both"):
            if report.sweep is not None:
                rows = [[r.c, r.epsilon0, r.condition_integral, r.excess_F00,
                         r.kappa_star, r.energy_bs, r.energy_fd, r.fd_error]
                        for r in report.sweep]
                written.append(str(_write_csv(out / "sweep.csv", SWEEP_HEADER, rows)))
            if report.bound_states is not None:
                curve = sorted(report.bound_states.lambda_curve)
                written.append(str(_write_csv(out / "lambda_curve.csv",
                                              LAMBDA_HEADER, curve)))
                if report.bound_states.axis_slice:
                    written.append(str(_write_csv(out / "eigenfunction_slice.csv",
                                                  SLICE_HEADER,
                                                  report.bound_states.axis_slice)))
            if report.oracle is not None:
                orc = report.oracle
                rows = [[i, m.value, fe, ce, m.error, b, inc]
                        for i, (m, fe, ce, b, inc) in enumerate(zip(
                            orc.energies, orc.energies_fine, orc.energies_coarse,
                            orc.below_threshold, orc.inconclusive))]
                written.append(str(_write_csv(out / "oracle.csv", ORACLE_HEADER, rows)))
        return written
    except OSError as exc:
        raise IOError(f"failed writing report to {out}: {exc}") from exc
