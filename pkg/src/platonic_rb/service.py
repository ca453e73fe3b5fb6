"""HTTP front end over the command layer.

One POST endpoint per command, all taking the same validated request
documents the CLI reads from config files and all returning the uniform
summary-plus-artifacts shape. Domain failures map onto status codes that
carry the CLI exit-code convention in the body: 400 for config mistakes
that pass schema validation, 409 for integrity failures, 422 (automatic)
for schema violations, and 424 for non-convergence.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import __version__
from .commands import (
    IntegrityError,
    build_group_command,
    calibrate_command,
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

app = FastAPI(title="platonic-rb", version=__version__)


def _guarded(command, request) -> CommandResponse:
    try:
        return command(request)
    except (GroupConstructionError, IntegrityError) as exc:
        raise HTTPException(status_code=409, detail={"message": str(exc), "exit_code": 3})
    except (FitNonConvergenceError, CalibrationError) as exc:
        raise HTTPException(status_code=424, detail={"message": str(exc), "exit_code": 4})
    except (ValueError, KeyError) as exc:
        raise HTTPException(status_code=400, detail={"message": str(exc), "exit_code": 2})


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/groups/build")
def groups_build(request: BuildGroupRequest) -> CommandResponse:
    return _guarded(build_group_command, request)


@app.post("/designs/verify")
def designs_verify(request: VerifyDesignsRequest) -> CommandResponse:
    return _guarded(verify_designs_command, request)


@app.post("/rb/run")
def rb_run(request: RBRunRequest) -> CommandResponse:
    return _guarded(run_rb_command, request)


@app.post("/calibrate")
def calibrate_endpoint(request: CalibrateRequest) -> CommandResponse:
    return _guarded(calibrate_command, request)


@app.post("/orbit")
def orbit_endpoint(request: OrbitRequest) -> CommandResponse:
    return _guarded(orbit_command, request)


@app.post("/fit")
def fit_endpoint(request: FitRequest) -> CommandResponse:
    return _guarded(fit_command, request)
