"""Pulse-parameter tuning against fixed-length benchmarking fidelity.

The objective wires the pulse synthesizer into the sequence engine: a
parameter vector is unpacked into a pulse set, every distinct physical gate
is synthesized once (cached across evaluations by its scalar inputs), and
1 minus the mean fidelity of a bank of random sequences, all at one fixed
length, is returned. Under the frozen-set policy the bank depends only on
the configured seed, so the objective is a deterministic function of the
vector and can be minimized by the derivative-free simplex search below.

Tuning never accepts a candidate that scores worse than the start on the
frozen bank, then re-scores both points on a held-out bank (fresh seed
stream, more sequences) and falls back to the start if the improvement
does not carry over. Every evaluation is recorded as an (index, objective)
pair for CSV export. Evaluations are vectorized over the sequence bank;
the simplex itself advances single-threaded.
"""

from __future__ import annotations

import csv
import functools
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .groups import Group, build_group
from .pulse import (
    PulseParams,
    PulseSimConfig,
    _raw_xy_unitary,
    _z_unitary,
    required_angle_names,
    simulate_idle,
)
from .rb import generate_sequence
from .tables import angle_name

SEED_POLICIES = ("frozen-set", "resampled")

# tags the two independent sequence-bank streams
_TUNING_BANK = 0
_VALIDATION_BANK = 1

_resample_counter = itertools.count(1)


@dataclass(frozen=True)
class ObjectiveSpec:
    """What one objective evaluation averages over.

    `template` fixes the parameter vector layout (which amplitude entries
    exist, in which order) and the pulse durations; its values are
    irrelevant. The template must carry exactly the entries the group's
    gate alphabet needs, so vectors unpack without ambiguity.
    """

    group_kind: str
    template: PulseParams
    fixed_m: int
    n_sequences: int = 20
    seed: int = 0
    seed_policy: str = "frozen-set"
    sim_config: PulseSimConfig = field(default_factory=PulseSimConfig)

    def __post_init__(self):
        if self.fixed_m < 1:
            raise ValueError("fixed_m must be >= 1")
        if self.n_sequences < 1:
            raise ValueError("n_sequences must be >= 1")
        if self.seed_policy not in SEED_POLICIES:
            raise ValueError(f"seed_policy must be one of {SEED_POLICIES}")
        group = build_group(self.group_kind)
        need_xy, need_z = required_angle_names(group.gate_alphabet())
        if set(self.template.xy_amplitudes) != set(need_xy) or set(
            self.template.z_amplitudes
        ) != set(need_z):
            raise ValueError(
                f"template entries do not match the {self.group_kind} gate "
                f"alphabet (need XY {need_xy}, Z {need_z})"
            )


@functools.lru_cache(maxsize=50_000)
def _cached_xy_unitary(
    signed_amplitude: float,
    axis: str,
    drag: float,
    duration: float,
    levels: int,
    anharmonicity: float,
    time_step: float,
) -> np.ndarray:
    cfg = PulseSimConfig(
        anharmonicity=anharmonicity, time_step=time_step, levels=levels
    )
    u = _raw_xy_unitary(signed_amplitude, axis, drag, cfg, duration)
    u.flags.writeable = False
    return u


@functools.lru_cache(maxsize=50_000)
def _cached_z_unitary(
    amplitude: float,
    duration: float,
    levels: int,
    anharmonicity: float,
    time_step: float,
) -> np.ndarray:
    cfg = PulseSimConfig(
        anharmonicity=anharmonicity, time_step=time_step, levels=levels
    )
    u = _z_unitary(amplitude, cfg, duration)
    u.flags.writeable = False
    return u


def _element_unitaries(
    group: Group, params: PulseParams, cfg: PulseSimConfig
) -> np.ndarray:
    """Per-element unitaries synthesized from the pulse parameters."""
    gate_us = {}
    for gate in group.gate_alphabet(include_idle=True):
        if gate.axis == "I":
            gate_us[gate] = simulate_idle(cfg, gate.duration)
        elif gate.axis == "Z":
            amp = params.z_amplitudes[angle_name(gate.angle)]
            gate_us[gate] = _cached_z_unitary(
                amp, params.z_duration, cfg.levels, cfg.anharmonicity, cfg.time_step
            )
        else:
            amp = params.xy_amplitudes[angle_name(abs(gate.angle))]
            gate_us[gate] = _cached_xy_unitary(
                math.copysign(amp, gate.angle),
                gate.axis,
                params.drag_coefficient,
                params.xy_duration,
                cfg.levels,
                cfg.anharmonicity,
                cfg.time_step,
            )
    mats = np.empty((group.order, cfg.levels, cfg.levels), dtype=complex)
    for el in group.elements:
        u = np.eye(cfg.levels, dtype=complex)
        for gate in el.word:
            u = gate_us[gate] @ u
        mats[el.index] = u
    return mats


@functools.lru_cache(maxsize=256)
def _frozen_bank(
    group_kind: str, fixed_m: int, n_sequences: int, seed: int, bank: int
) -> np.ndarray:
    group = build_group(group_kind)
    table = np.empty((n_sequences, fixed_m + 1), dtype=np.intp)
    for j in range(n_sequences):
        rng = np.random.default_rng([seed, bank, fixed_m, j])
        table[j] = generate_sequence(group, fixed_m, None, rng)
    table.flags.writeable = False
    return table


def _sequence_bank(spec: ObjectiveSpec, bank: int, n_sequences: int) -> np.ndarray:
    if spec.seed_policy == "frozen-set":
        return _frozen_bank(
            spec.group_kind, spec.fixed_m, n_sequences, spec.seed, bank
        )
    # resampled: a fresh draw on every call, deliberately not repeatable
    group = build_group(spec.group_kind)
    salt = next(_resample_counter)
    table = np.empty((n_sequences, spec.fixed_m + 1), dtype=np.intp)
    for j in range(n_sequences):
        rng = np.random.default_rng([spec.seed, bank, spec.fixed_m, j, salt])
        table[j] = generate_sequence(group, spec.fixed_m, None, rng)
    return table


def _bank_objective(vector, spec: ObjectiveSpec, bank: int, n_sequences: int) -> float:
    vector = np.asarray(vector, dtype=float)
    if not np.all(np.isfinite(vector)):
        raise ValueError("parameter vector must be finite")
    params = spec.template.with_vector(vector)
    group = build_group(spec.group_kind)
    mats = _element_unitaries(group, params, spec.sim_config)
    table = _sequence_bank(spec, bank, n_sequences)
    states = np.zeros((table.shape[0], spec.sim_config.levels), dtype=complex)
    states[:, 0] = 1.0
    for pos in range(table.shape[1]):
        states = np.einsum("nij,nj->ni", mats[table[:, pos]], states)
    fidelities = np.abs(states[:, 0]) ** 2
    return float(1.0 - fidelities.mean())


def orbit_objective(vector, spec: ObjectiveSpec) -> float:
    """1 minus the mean sequence fidelity of the spec's tuning bank.

    Bit-identical across repeated calls at the same vector under the
    frozen-set policy; every gate is synthesized at the pulse level from
    the unpacked parameters, with no decoherence.
    """
    return _bank_objective(vector, spec, _TUNING_BANK, spec.n_sequences)


def validation_objective(
    vector, spec: ObjectiveSpec, n_sequences: int = 50
) -> float:
    """Same objective on the held-out bank (independent seed stream)."""
    return _bank_objective(vector, spec, _VALIDATION_BANK, n_sequences)


def per_gate_error_estimate(objective_value: float, spec: ObjectiveSpec) -> float:
    """Average physical-gate error implied by one objective value.

    Inverts the exponential-decay model at the bank's fixed length, then
    spreads the per-element error over the mean word length.
    """
    group = build_group(spec.group_kind)
    decay_power = np.clip(1.0 - 2.0 * objective_value, 1e-300, 1.0)
    p = float(decay_power) ** (1.0 / spec.fixed_m)
    element_error = (1.0 - p) / 2.0
    mean_gates = sum(len(el.word) for el in group.elements) / group.order
    return element_error / mean_gates


@dataclass(frozen=True)
class NelderMeadResult:
    x: np.ndarray
    value: float
    evaluations: int
    converged: bool
    trace: tuple[tuple[int, float], ...]


class _BudgetExhausted(Exception):
    pass


def nelder_mead(objective, x0, scale, budget: int) -> NelderMeadResult:
    """Minimize with a classic reflect/expand/contract/shrink simplex.

    `scale` (scalar or per-coordinate) sets the initial vertex offsets and
    the convergence yardstick: the search stops once every vertex is
    within 1e-6 * scale of the best one per coordinate, or after `budget`
    objective evaluations. The best point ever evaluated is returned, so
    budget 1 returns x0.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    scale = np.broadcast_to(np.asarray(scale, dtype=float), (n,)).astype(float)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite")
    if not np.all(scale > 0):
        raise ValueError("scale must be positive")

    trace: list[tuple[int, float]] = []
    best_x = x0.copy()
    best_v = math.inf

    def f(x: np.ndarray) -> float:
        nonlocal best_x, best_v
        if len(trace) >= budget:
            raise _BudgetExhausted
        v = float(objective(x))
        trace.append((len(trace), v))
        if v < best_v:
            best_v = v
            best_x = x.copy()
        return v

    converged = False
    try:
        simplex = np.empty((n + 1, n))
        values = np.empty(n + 1)
        simplex[0] = x0
        values[0] = f(x0)
        for i in range(n):
            simplex[i + 1] = x0
            simplex[i + 1, i] += scale[i]
            values[i + 1] = f(simplex[i + 1])
        while True:
            order = np.argsort(values, kind="stable")
            simplex = simplex[order]
            values = values[order]
            diameter = np.max(np.abs(simplex[1:] - simplex[0]) / scale)
            if diameter < 1e-6:
                converged = True
                break
            centroid = simplex[:-1].mean(axis=0)
            xr = centroid + (centroid - simplex[-1])
            fr = f(xr)
            if fr < values[0]:
                xe = centroid + 2.0 * (centroid - simplex[-1])
                fe = f(xe)
                if fe < fr:
                    simplex[-1], values[-1] = xe, fe
                else:
                    simplex[-1], values[-1] = xr, fr
            elif fr < values[-2]:
                simplex[-1], values[-1] = xr, fr
            else:
                if fr < values[-1]:
                    xc = centroid + 0.5 * (xr - centroid)
                    fc = f(xc)
                    accept = fc <= fr
                else:
                    xc = centroid + 0.5 * (simplex[-1] - centroid)
                    fc = f(xc)
                    accept = fc < values[-1]
                if accept:
                    simplex[-1], values[-1] = xc, fc
                else:
                    for i in range(1, n + 1):
                        simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                        values[i] = f(simplex[i])
    except _BudgetExhausted:
        pass

    return NelderMeadResult(
        x=best_x,
        value=best_v,
        evaluations=len(trace),
        converged=converged,
        trace=tuple(trace),
    )


@dataclass(frozen=True)
class OrbitResult:
    """Outcome of one tuning run, scored on both sequence banks."""

    params: PulseParams
    start_objective: float
    tuned_objective: float
    heldout_start: float
    heldout_tuned: float
    evaluations: int
    reverted: bool
    trace: tuple[tuple[int, float], ...]


def default_simplex_scale(start: PulseParams) -> np.ndarray:
    """1% of each amplitude, 0.05 absolute in the quadrature coefficient."""
    amps = start.vector()[:-1]
    return np.append(np.maximum(np.abs(amps) * 0.01, 1e-6), 0.05)


def recommended_fixed_m(
    start: PulseParams,
    group_kind: str,
    cfg: PulseSimConfig | None = None,
    cap: int = 400,
) -> int:
    """Sequence length near the decay's steepest-sensitivity point.

    Uses 1/(1-p) for the start parameters' expected per-element decay,
    capped to keep evaluation cost bounded when the start is already good.
    """
    from . import rb
    from .pulse import pulse_noise_model

    cfg = cfg or PulseSimConfig()
    group = build_group(group_kind)
    noise = pulse_noise_model(start, cfg, group.gate_alphabet(include_idle=True))
    p = rb.expected_decay(group, noise)
    if p >= 1.0:
        return cap
    return int(np.clip(round(1.0 / (1.0 - p)), 1, cap))


def orbit_tune(start: PulseParams, spec: ObjectiveSpec, budget: int) -> OrbitResult:
    """Tune pulse parameters by minimizing the frozen-bank objective.

    The returned parameters never score worse than the start on the frozen
    bank; if they fail to also improve the held-out bank the start is
    returned unchanged (the apparent gain was bank-specific).
    """
    if spec.seed_policy != "frozen-set":
        raise ValueError("tuning requires the frozen-set seed policy")
    x0 = start.vector()
    result = nelder_mead(
        lambda v: orbit_objective(v, spec),
        x0,
        default_simplex_scale(start),
        budget,
    )
    start_objective = result.trace[0][1]
    candidate_x, candidate_v = result.x, result.value
    if candidate_v > start_objective:
        candidate_x, candidate_v = x0, start_objective

    heldout_start = validation_objective(x0, spec)
    heldout_candidate = validation_objective(candidate_x, spec)
    reverted = heldout_candidate > heldout_start
    if reverted:
        candidate_x, candidate_v = x0, start_objective
        heldout_candidate = heldout_start

    return OrbitResult(
        params=start.with_vector(candidate_x),
        start_objective=start_objective,
        tuned_objective=candidate_v,
        heldout_start=heldout_start,
        heldout_tuned=heldout_candidate,
        evaluations=result.evaluations,
        reverted=reverted,
        trace=result.trace,
    )


def trace_to_csv(trace) -> str:
    """Render an (evaluation index, objective) trace as CSV text."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["evaluation", "objective"])
    for index, value in trace:
        writer.writerow([index, f"{value:.12g}"])
    return out.getvalue()
