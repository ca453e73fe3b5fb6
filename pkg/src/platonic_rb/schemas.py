"""Request and response models shared by the HTTP service and the CLI.

Every run is described by one JSON document validated here before any
computation starts; unknown fields are rejected so config typos surface
as schema errors with field paths rather than silently ignored knobs.
The CLI validates config files through these same models, so a config
accepted locally is exactly what the service accepts remotely.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

GroupKind = Literal["tetrahedral", "octahedral", "icosahedral"]

NoiseModelName = Literal[
    "none",
    "depolarizing",
    "amplitude_damping",
    "phase_damping",
    "duration_damping",
    "amplitude_error",
]


class NoiseSpec(BaseModel):
    """Named gate-level noise model plus its parameters."""

    model_config = ConfigDict(extra="forbid")

    model: NoiseModelName
    params: dict[str, float] = Field(default_factory=dict)


class InjectSpec(BaseModel):
    """Extra depolarizing error attached to one group element by its word."""

    model_config = ConfigDict(extra="forbid")

    word: str
    extra_error: float = Field(gt=0.0, lt=0.5)


class PulseSettings(BaseModel):
    """Pulse-simulation knobs for pulse-level runs and calibration."""

    model_config = ConfigDict(extra="forbid")

    levels: Literal[2, 3] = 3
    anharmonicity: float | None = None
    time_step: float = Field(default=0.01, gt=0.0)
    t1: float | None = Field(default=None, gt=0.0)
    tphi: float | None = Field(default=None, gt=0.0)


class PulseParamsDoc(BaseModel):
    """Explicit pulse parameters, matching the calibration JSON artifact."""

    model_config = ConfigDict(extra="forbid")

    xy_amplitudes: dict[str, float]
    z_amplitudes: dict[str, float] = Field(default_factory=dict)
    drag_coefficient: float = 0.0
    xy_duration_ns: float = Field(default=12.0, gt=0.0)
    z_duration_ns: float = Field(default=10.0, gt=0.0)


class BuildGroupRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: GroupKind


class VerifyDesignsRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: GroupKind
    t_max: int = Field(default=6, ge=1, le=8)


class RBRunRequest(BaseModel):
    """One benchmarking run: groups, noise, grid, and interleaved words."""

    model_config = ConfigDict(extra="forbid")

    group_kinds: list[GroupKind] = Field(min_length=1)
    mode: Literal["gate-level", "pulse-level"] = "gate-level"
    noise: NoiseSpec | None = None
    pulse: PulseSettings | None = None
    pulse_params: PulseParamsDoc | None = None
    inject: InjectSpec | None = None
    m_values: list[int] | None = None
    k: int = Field(default=50, ge=1)
    shots: int | None = Field(default=None, ge=1)
    seed: int = 0
    threads: int = Field(default=1, ge=1)
    interleaved: list[str] = Field(default_factory=list)

    @field_validator("group_kinds", mode="before")
    @classmethod
    def _single_kind_ok(cls, v):
        if isinstance(v, str):
            return [v]
        return v


class CalibrateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    group_kind: GroupKind
    pulse: PulseSettings = Field(default_factory=PulseSettings)


class OrbitRequest(BaseModel):
    """Tuning run: start point, frozen-bank definition, and budget."""

    model_config = ConfigDict(extra="forbid")

    group_kind: GroupKind
    budget: int = Field(ge=1)
    seed: int = 0
    fixed_m: int | None = Field(default=None, ge=1)
    n_sequences: int = Field(default=20, ge=1)
    pulse: PulseSettings = Field(default_factory=PulseSettings)
    start_params: PulseParamsDoc | None = None
    perturb_amplitudes: float = Field(default=0.0, ge=0.0, lt=0.5)
    perturb_seed: int = 0


class FitRequest(BaseModel):
    """Re-run decay fitting on an existing curve CSV."""

    model_config = ConfigDict(extra="forbid")

    csv_text: str


class CommandResponse(BaseModel):
    """Uniform command outcome: a summary plus named artifact texts.

    Artifacts are complete file contents keyed by file name; writing them
    to disk verbatim reproduces exactly what a local run would emit.
    """

    summary: dict
    artifacts: dict[str, str] = Field(default_factory=dict)


class ErrorReport(BaseModel):
    """Service-side failure with the CLI exit code it corresponds to."""

    message: str
    exit_code: int
