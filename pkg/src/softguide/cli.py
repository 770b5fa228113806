"""Command-line client for the analysis service.

Each subcommand posts the scenario configuration to the corresponding
service endpoint and writes the returned report to disk.  By default the
service app runs in-process (no server needed); `--server URL` targets a
running instance instead, and `softguide serve` starts one.

Exit codes: 0 success, 2 configuration error, 3 numerical-tolerance or
convergence failure inside an analysis, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import httpx

from . import __version__
from .config import ANALYSES, load_config
from .errors import ConfigError
from .report import RunReport, emit

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICS = 3
EXIT_IO = 4

_NUMERIC_FAILURES = ("ToleranceError", "ConvergenceError", "TruncationError",
                     "NoBoundStateError")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="softguide",
        description="Bound states of soft quantum waveguides: existence "
                    "condition, spectral curves, and a finite-difference "
                    "cross-check.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="scenario JSON file")
    common.add_argument("--out", default=None, help="output directory "
                        "(default: the config's output block)")
    common.add_argument("--format", choices=("json", "csv", "both"), default=None)
    common.add_argument("--threads", type=int, default=None,
                        help="worker cap (results are independent of it; "
                        "SOFTGUIDE_THREADS is the fallback)")
    common.add_argument("--seed", type=int, default=None,
                        help="seed for randomized self-checks only")
    common.add_argument("--server", default=None,
                        help="base URL of a running service; default in-process")

    for verb in ANALYSES + ("sweep", "all", "run"):
        sub.add_parser(verb, parents=[common],
                       help=f"run the '{verb}' analysis")

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _client(server: str | None):
    if server:
        return httpx.Client(base_url=server, timeout=None)
    # no server given: drive the ASGI app in-process through the sync bridge
    from fastapi.testclient import TestClient

    from .service import app
    return TestClient(app)


def _post(args, verb: str) -> int:
    try:
        config = load_config(args.config)
        overrides = {}
        if args.threads is not None:
            overrides["threads"] = args.threads
        if args.seed is not None:
            overrides["seed"] = args.seed
        if overrides:
            config = config.model_copy(update=overrides)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    with _client(args.server) as client:
        resp = client.post(f"/v1/{verb}", json=config.model_dump(mode="json"))
    if resp.status_code == 422:
        print(f"error: {resp.json().get('detail', resp.text)}", file=sys.stderr)
        return EXIT_CONFIG
    if resp.status_code != 200:
        print(f"error: service returned {resp.status_code}: {resp.text}",
              file=sys.stderr)
        return EXIT_NUMERICS
    report = RunReport.model_validate(resp.json())

    out_dir = args.out if args.out is not None else config.output.directory
    fmt = args.format if args.format is not None else config.output.format
    try:
        written = emit(report, out_dir, fmt)
    except (IOError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in written:
        print(f"wrote {path}")
    if report.errors:
        for name, msg in sorted(report.errors.items()):
            print(f"analysis '{name}' failed: {msg}", file=sys.stderr)
        if any(msg.split(":")[0] in _NUMERIC_FAILURES
               for msg in report.errors.values()):
            return EXIT_NUMERICS
        return EXIT_NUMERICS
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .service import app
        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK
    if args.threads is not None:
        os.environ.setdefault("SOFTGUIDE_THREADS", str(args.threads))
    return _post(args, args.command)


if __name__ == "__main__":
    sys.exit(main())
