"""Command-line client for the command layer.

Each subcommand builds the same request document the HTTP service takes,
runs it in-process by default or ships it to a running server with
`--server`, then writes the returned artifacts and prints the summary as
JSON. Exit codes: 0 success, 2 config error, 3 integrity failure, 4
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from pydantic import ValidationError

from .commands import (
    IntegrityError,
    build_group_command,
    calibrate_command,
    dump_json,
    fit_command,
    orbit_command,
    run_rb_command,
    verify_designs_command,
)
from .fitting import FitNonConvergenceError
from .groups import GroupConstructionError
from .pulse import CalibrationError
from .schemas import (
    BuildGroupRequest,
    CalibrateRequest,
    CommandResponse,
    FitRequest,
    OrbitRequest,
    RBRunRequest,
    VerifyDesignsRequest,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTEGRITY = 3
EXIT_NONCONVERGENCE = 4

ROUTES = {
    "build-group": ("/groups/build", BuildGroupRequest, build_group_command),
    "verify-designs": ("/designs/verify", VerifyDesignsRequest, verify_designs_command),
    "run-rb": ("/rb/run", RBRunRequest, run_rb_command),
    "calibrate": ("/calibrate", CalibrateRequest, calibrate_command),
    "orbit": ("/orbit", OrbitRequest, orbit_command),
    "fit": ("/fit", FitRequest, fit_command),
}


class CliError(Exception):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}", EXIT_CONFIG)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"config {path} is not valid JSON: {exc}", EXIT_CONFIG)
    if not isinstance(doc, dict):
        raise CliError(f"config {path} must hold a JSON object", EXIT_CONFIG)
    return doc


def _validate(model, doc: dict):
    try:
        return model.model_validate(doc)
    except ValidationError as exc:
        lines = [
            f"  {'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}"
            for err in exc.errors()
        ]
        raise CliError("config schema error:\n" + "\n".join(lines), EXIT_CONFIG)


def _build_request(args) -> tuple[str, object]:
    command = args.command
    if command == "build-group":
        doc = {"kind": args.kind}
    elif command == "verify-designs":
        doc = {"kind": args.kind, "t_max": args.t_max}
    elif command == "run-rb":
        doc = _load_config(args.config)
        if args.seed is not None:
            doc["seed"] = args.seed
        if args.threads is not None:
            doc["threads"] = args.threads
    elif command == "calibrate":
        if (args.config is None) == (args.kind is None):
            raise CliError("calibrate needs exactly one of --config or --kind", EXIT_CONFIG)
        doc = _load_config(args.config) if args.config else {"group_kind": args.kind}
    elif command == "orbit":
        doc = _load_config(args.config)
        if args.seed is not None:
            doc["seed"] = args.seed
    elif command == "fit":
        try:
            doc = {"csv_text": Path(args.csv).read_text()}
        except OSError as exc:
            raise CliError(f"cannot read CSV {args.csv}: {exc}", EXIT_CONFIG)
    else:
        raise CliError(f"unknown command {command!r}", EXIT_CONFIG)
    _, model, _ = ROUTES[command]
    return command, _validate(model, doc)


def _run_local(command: str, request) -> CommandResponse:
    _, _, runner = ROUTES[command]
    try:
        return runner(request)
    except (GroupConstructionError, IntegrityError) as exc:
        raise CliError(str(exc), EXIT_INTEGRITY)
    except (FitNonConvergenceError, CalibrationError) as exc:
        raise CliError(str(exc), EXIT_NONCONVERGENCE)
    except (ValueError, KeyError) as exc:
        raise CliError(str(exc), EXIT_CONFIG)


def _run_remote(command: str, request, server: str) -> CommandResponse:
    import httpx

    route, _, _ = ROUTES[command]
    url = server.rstrip("/") + route
    try:
        reply = httpx.post(url, json=request.model_dump(mode="json"), timeout=600.0)
    except httpx.HTTPError as exc:
        raise CliError(f"cannot reach {url}: {exc}", EXIT_CONFIG)
    if reply.status_code == 200:
        return CommandResponse.model_validate(reply.json())
    try:
        detail = reply.json().get("detail")
    except ValueError:
        detail = None
    if isinstance(detail, dict) and "exit_code" in detail:
        raise CliError(str(detail.get("message", "")), int(detail["exit_code"]))
    raise CliError(f"server error {reply.status_code}: {reply.text}", EXIT_CONFIG)


def _emit(response: CommandResponse, out_dir: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, content in response.artifacts.items():
        (out / name).write_text(content)
    sys.stdout.write(dump_json(response.summary))


def _serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="platonic-rb",
        description="Rotation-group benchmarking runner: group construction, "
        "design checks, RB curves and fits, pulse calibration, and tuning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=".", help="directory for artifact files")
        p.add_argument("--server", default=None, help="run against this server URL")

    p = sub.add_parser("build-group", help="construct a group and export it as JSON")
    p.add_argument("--kind", required=True)
    common(p)

    p = sub.add_parser("verify-designs", help="frame-potential report vs Catalan targets")
    p.add_argument("--kind", required=True)
    p.add_argument("--t-max", type=int, default=6, dest="t_max")
    common(p)

    p = sub.add_parser("run-rb", help="run benchmarking curves from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--threads", type=int, default=None, help="override the config threads")
    common(p)

    p = sub.add_parser("calibrate", help="solve pulse parameters for a group")
    p.add_argument("--config", default=None)
    p.add_argument("--kind", default=None)
    common(p)

    p = sub.add_parser("orbit", help="tune pulse parameters from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    common(p)

    p = sub.add_parser("fit", help="re-fit an existing curve CSV")
    p.add_argument("--csv", required=True)
    common(p)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return _serve(args)
    try:
        command, request = _build_request(args)
        if args.server:
            response = _run_remote(command, request, args.server)
        else:
            response = _run_local(command, request)
        _emit(response, args.out)
    except CliError as exc:
        sys.stderr.write(str(exc) + "\n")
        return exc.exit_code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
