"""Scenario configuration: pydantic models, JSON loading, validation."""
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .bsengine import BentResolution, ExcessResolution
from .errors import ConfigError
from .geometry import CurvatureProfile
from .transverse import TransverseWell

ANALYSES = ("validate", "transverse", "straight-check", "exists",
            "bound-states", "oracle", "limits")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProfileConfig(_Strict):
    family: Literal["zero", "bump", "gaussian", "tabulated"] = "zero"
    amplitude: float = 0.0
    width: float = 1.0
    samples_s: Optional[list[float]] = None
    samples_gamma: Optional[list[float]] = None

    def build(self) -> CurvatureProfile:
        if self.family == "zero":
            return CurvatureProfile.zero()
        if self.family == "bump":
            return CurvatureProfile.smooth_bump(self.amplitude, self.width)
        if self.family == "gaussian":
            return CurvatureProfile.gaussian(self.amplitude, self.width)
        return CurvatureProfile.tabulated(self.samples_s, self.samples_gamma)

    def sup_gamma(self) -> float:
        return self.build().sup_gamma()


class WellConfig(_Strict):
    kind: Literal["flat", "sampled"] = "flat"
    halfwidth: float = Field(gt=0)
    depth: float = 1.0
    j: Optional[tuple[float, float]] = None     # flat-bottom interval [lo, hi]
    samples_u: Optional[list[float]] = None
    samples_v: Optional[list[float]] = None

    @model_validator(mode="after")
    def _nonnegative_channel(self):
        if self.kind == "flat":
            if self.depth <= 0:
                raise ValueError(
                    "channel potential must be positive: the model assumes a "
                    f"nonzero well V >= 0, got depth {self.depth}")
            lo, hi = self.j if self.j is not None else (-self.halfwidth, self.halfwidth)
            if not (-self.halfwidth - 1e-12 <= lo < hi <= self.halfwidth + 1e-12):
                raise ValueError("flat-bottom interval must sit inside [-a, a]")
        else:
            if self.samples_u is None or self.samples_v is None:
                raise ValueError("sampled well needs samples_u and samples_v")
            if min(self.samples_v) < 0:
                raise ValueError("channel potential must be nonnegative everywhere")
        return self

    def build(self) -> TransverseWell:
        if self.kind == "flat":
            lo, hi = self.j if self.j is not None else (-self.halfwidth, self.halfwidth)
            return TransverseWell(halfwidth=self.halfwidth, kind="flat",
                                  depth=self.depth, edge_lo=lo, edge_hi=hi)
        return TransverseWell.sampled(self.samples_u, self.samples_v,
                                      halfwidth=self.halfwidth)


class NumericsConfig(_Strict):
    fiber_n: int = Field(default=400, ge=4, le=4096)
    bent_n_u: int = Field(default=14, ge=4, le=64)
    bent_panels_per_kappa: float = Field(default=2.0, gt=0)
    bent_gauss_s: int = Field(default=4, ge=2, le=16)
    bent_max_nodes: int = Field(default=8000, ge=100)
    excess_n_u: int = Field(default=12, ge=2, le=64)
    excess_panels_per_kappa: float = Field(default=2.0, gt=0)
    excess_gauss: int = Field(default=5, ge=2, le=16)
    dyadic_depth: int = Field(default=24, ge=4, le=48)
    truncation_lengths: float = Field(default=23.0, gt=0)
    halflength: Optional[float] = Field(default=None, gt=0)
    oracle_margin_lengths: float = Field(default=15.0, gt=0)
    oracle_step: Optional[float] = Field(default=None, gt=0)
    eig_count: int = Field(default=4, ge=1, le=12)
    n_branches: int = Field(default=3, ge=1, le=6)
    kappa_tol: float = Field(default=1e-10, gt=0)
    certify_factor: float = Field(default=10.0, gt=0)
    calibrate: bool = True
    neumann_u1: Optional[float] = Field(default=None, gt=0)

    def bent_resolution(self) -> BentResolution:
        return BentResolution(n_u=self.bent_n_u,
                              panels_per_kappa=self.bent_panels_per_kappa,
                              gauss_s=self.bent_gauss_s,
                              max_nodes=self.bent_max_nodes)

    def excess_resolution(self) -> ExcessResolution:
        return ExcessResolution(panels_per_kappa=self.excess_panels_per_kappa,
                                gauss_m=self.excess_gauss,
                                gauss_sigma=self.excess_gauss,
                                dyadic_depth=self.dyadic_depth,
                                n_u=self.excess_n_u)


class RunConfig(_Strict):
    analyses: list[Literal[ANALYSES]] = Field(  # type: ignore[valid-type]
        default_factory=lambda: ["validate", "transverse"])


class SweepConfig(_Strict):
    axis: Literal["amplitude", "depth", "halfwidth", "scale"]
    values: list[float] = Field(min_length=1)
    analyses: list[Literal[ANALYSES]] = Field(  # type: ignore[valid-type]
        default_factory=lambda: ["validate", "transverse", "exists", "bound-states"])


class OutputConfig(_Strict):
    directory: str = "out"
    format: Literal["json", "csv", "both"] = "both"


class ScenarioConfig(_Strict):
    profile: ProfileConfig = Field(default_factory=ProfileConfig)
    well: WellConfig
    numerics: NumericsConfig = Field(default_factory=NumericsConfig)
    run: RunConfig = Field(default_factory=RunConfig)
    sweep: Optional[SweepConfig] = None
    output: OutputConfig = Field(default_factory=OutputConfig)
    seed: int = 0
    threads: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _strip_halfwidth(self):
        sup_g = self.profile.sup_gamma()
        prod = self.well.halfwidth * sup_g
        if prod >= 1.0:
            raise ValueError(
                "halfwidth assumption violated: a * sup|gamma| = "
                f"{prod:.4g} >= 1; shrink the strip or flatten the bend")
        return self

    def effective_threads(self) -> int:
        if self.threads is not None:
            return self.threads
        env = os.environ.get("SOFTGUIDE_THREADS")
        if env and env.isdigit():
            return max(1, int(env))
        return 1


def _format_pydantic_error(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{loc}: {err['msg']}")
    return "; ".join(lines)


def parse_config(data: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {_format_pydantic_error(exc)}") from exc


def load_config(path) -> ScenarioConfig:
    """Parse and validate a JSON scenario file.

    Parse errors carry line/column; validation errors name the offending key.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    return parse_config(data)
