"""HTTP service exposing the analyses: one endpoint per verb.

Every endpoint takes a full scenario configuration and returns a RunReport;
the verb decides which analyses run (dependencies are pulled in
automatically).  The CLI is a thin client of this app, talking to it either
in-process or over the network.
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import ValidationError

from . import __version__
from .config import ANALYSES, ScenarioConfig
from .errors import ConfigError, SoftguideError
from .report import RunReport
from .runner import run, run_sweep

app = FastAPI(title="softguide", version=__version__,
              description="Soft quantum waveguide spectral analysis")


@app.get("/v1/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


def _execute(config: ScenarioConfig, analyses) -> RunReport:
    try:
        return run(config, analyses=analyses)
    except (ConfigError, ValidationError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    except SoftguideError as exc:
        raise HTTPException(status_code=500, detail=str(exc)) from exc


@app.post("/v1/run", response_model=RunReport)
def run_configured(config: ScenarioConfig) -> RunReport:
    """Run the analyses listed in the config's run block."""
    return _execute(config, None)


@app.post("/v1/all", response_model=RunReport)
def run_all(config: ScenarioConfig) -> RunReport:
    return _execute(config, list(ANALYSES))


@app.post("/v1/sweep", response_model=RunReport)
def sweep(config: ScenarioConfig) -> RunReport:
    try:
        return run_sweep(config)
    except SoftguideError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def _make_single(verb: str):
    async def endpoint(config: ScenarioConfig) -> RunReport:
        return _execute(config, [verb])
    endpoint.__name__ = verb.replace("-", "_")
    endpoint.__doc__ = f"Run the '{verb}' analysis (plus its dependencies)."
    return endpoint


for _verb in ANALYSES:
    app.post(f"/v1/{_verb}", response_model=RunReport)(_make_single(_verb))
