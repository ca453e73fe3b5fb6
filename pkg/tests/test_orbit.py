"""Sequence-fidelity tuning: the simplex optimizer, the objective, and the
full tune loop with held-out validation.

The objective has an independent oracle here: propagating full element
unitaries built gate by gate through the public simulation entry points
must reproduce the batched state-vector path bit-for-bit (same frozen
sequence table, same arithmetic up to association order, tolerance 1e-12).
"""

import math

import numpy as np
import pytest
from conftest import calibrated

from platonic_rb.groups import avg_word_length, build_group
from platonic_rb.orbit import (
    ObjectiveSpec,
    default_simplex_scale,
    nelder_mead,
    orbit_objective,
    orbit_tune,
    per_gate_error_estimate,
    recommended_fixed_m,
    trace_to_csv,
    validation_objective,
)
from platonic_rb.pulse import PulseSimConfig, simulate_gate
from platonic_rb.rb import generate_sequence


def _spec(kind="octahedral", levels=3, fixed_m=25, n_sequences=5, seed=0, **kw):
    params, cfg = calibrated(kind, levels=levels)
    spec = ObjectiveSpec(
        group_kind=kind,
        template=params,
        fixed_m=fixed_m,
        n_sequences=n_sequences,
        seed=seed,
        sim_config=cfg,
        **kw,
    )
    return params, spec


# ---------------------------------------------------------------- optimizer


def test_bowl_low_dimensions_converges_fast():
    rng = np.random.default_rng(0)
    for n in (2, 5):
        center = rng.uniform(-0.5, 0.5, size=n)
        result = nelder_mead(lambda x: float(np.sum((x - center) ** 2)),
                             rng.uniform(-1, 1, size=n), 1.0, 500)
        assert result.evaluations <= 500
        assert np.max(np.abs(result.x - center)) < 1e-5


def test_bowl_fourteen_dimensions_within_budget():
    rng = np.random.default_rng(1)
    center = rng.uniform(-0.5, 0.5, size=14)
    result = nelder_mead(lambda x: float(np.sum((x - center) ** 2)),
                         rng.uniform(-1, 1, size=14), 1.0, 2000)
    assert result.value < 1e-4


def test_rosenbrock_valley():
    def rosen(x):
        return float(100.0 * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2)

    result = nelder_mead(rosen, np.array([-1.2, 1.0]), 0.5, 2000)
    assert result.value < 1e-6
    assert result.converged


def test_budget_one_returns_start():
    x0 = np.array([3.0, -1.0])
    result = nelder_mead(lambda x: float(x @ x), x0, 1.0, 1)
    assert result.evaluations == 1
    assert np.array_equal(result.x, x0)
    assert not result.converged


def test_trace_records_every_evaluation_in_order():
    seen = []

    def f(x):
        v = float(x @ x)
        seen.append(v)
        return v

    result = nelder_mead(f, np.array([1.0, 2.0]), 0.5, 60)
    assert [i for i, _ in result.trace] == list(range(len(seen)))
    assert [v for _, v in result.trace] == seen
    assert result.value == min(seen)


def test_optimizer_input_validation():
    with pytest.raises(ValueError):
        nelder_mead(lambda x: 0.0, np.array([1.0]), 1.0, 0)
    with pytest.raises(ValueError):
        nelder_mead(lambda x: 0.0, np.array([math.nan]), 1.0, 10)
    with pytest.raises(ValueError):
        nelder_mead(lambda x: 0.0, np.array([1.0]), -1.0, 10)


# ---------------------------------------------------------------- objective


def test_objective_deterministic():
    params, spec = _spec()
    a = orbit_objective(params.vector(), spec)
    _, spec2 = _spec()
    b = orbit_objective(params.vector(), spec2)
    assert a == b


def test_objective_matches_unitary_product_oracle():
    params, spec = _spec(fixed_m=3, n_sequences=2)
    got = orbit_objective(params.vector(), spec)

    group = build_group(spec.group_kind)
    survivals = []
    for j in range(spec.n_sequences):
        rng = np.random.default_rng([spec.seed, 0, spec.fixed_m, j])
        seq = generate_sequence(group, spec.fixed_m, None, rng)
        total = np.eye(spec.sim_config.levels, dtype=complex)
        for idx in seq:
            element = np.eye(spec.sim_config.levels, dtype=complex)
            for gate in group.elements[idx].word:
                element = simulate_gate(params, gate, spec.sim_config) @ element
            total = element @ total
        survivals.append(abs(total[0, 0]) ** 2)
    assert abs(got - (1.0 - np.mean(survivals))) < 1e-12


def test_validation_bank_is_disjoint_from_tuning_bank():
    params, spec = _spec()
    assert orbit_objective(params.vector(), spec) != validation_objective(
        params.vector(), spec, n_sequences=spec.n_sequences
    )


def test_frozen_policy_is_stable_resampled_is_not():
    params, spec = _spec()
    assert orbit_objective(params.vector(), spec) == orbit_objective(
        params.vector(), spec
    )
    _, resampled = _spec(seed_policy="resampled")
    a = orbit_objective(params.vector(), resampled)
    b = orbit_objective(params.vector(), resampled)
    assert a != b


def test_objective_rejects_bad_vectors():
    params, spec = _spec()
    with pytest.raises(ValueError):
        orbit_objective(np.full(params.parameter_count(), math.nan), spec)
    with pytest.raises(ValueError):
        orbit_objective(params.vector()[:-1], spec)


def test_template_keys_must_match_group_alphabet():
    params, _ = calibrated("tetrahedral", levels=3)
    with pytest.raises(ValueError):
        ObjectiveSpec(group_kind="icosahedral", template=params, fixed_m=10)


def test_amplitude_perturbation_raises_objective():
    params, spec = _spec(fixed_m=50, n_sequences=10)
    clean = orbit_objective(params.vector(), spec)
    bumped = params.vector()
    bumped[:-1] *= 1.01
    assert orbit_objective(bumped, spec) > clean


def test_calibrated_two_level_objective_is_tiny():
    params, spec = _spec(levels=2, fixed_m=200, n_sequences=10)
    assert orbit_objective(params.vector(), spec) < 1e-6


def test_calibrated_params_are_coordinatewise_local_minimum():
    # +-0.5% probes along every coordinate, large frozen banks so bank
    # noise does not swamp the comparison
    for kind in ("tetrahedral", "octahedral"):
        for seed in (5, 23):
            params, spec = _spec(kind, fixed_m=400, n_sequences=300, seed=seed)
            center = params.vector()
            base = orbit_objective(center, spec)
            for i in range(len(center)):
                for sign in (1.0, -1.0):
                    probe = center.copy()
                    probe[i] *= 1.0 + sign * 0.005
                    assert orbit_objective(probe, spec) >= base, (kind, seed, i, sign)


def test_per_gate_error_estimate_inverts_decay():
    _, spec = _spec(kind="tetrahedral", fixed_m=50)
    p = 0.998
    objective = (1.0 - p**50) / 2.0
    want = ((1.0 - p) / 2.0) / float(avg_word_length(build_group("tetrahedral")))
    assert abs(per_gate_error_estimate(objective, spec) - want) < 1e-12


def test_recommended_fixed_m_hits_cap_for_calibrated_start():
    params, cfg = calibrated("tetrahedral", levels=3)
    assert recommended_fixed_m(params, "tetrahedral", cfg) == 400
    bad = params.with_vector(params.vector() * 1.05)
    m_bad = recommended_fixed_m(bad, "tetrahedral", cfg)
    assert 1 <= m_bad < 400


def test_default_simplex_scale_layout():
    params, _ = calibrated("octahedral", levels=3)
    scale = default_simplex_scale(params)
    assert len(scale) == params.parameter_count()
    assert scale[-1] == 0.05
    assert np.all(scale[:-1] > 0)


# ---------------------------------------------------------------- tune loop


def test_two_level_tune_recovers_from_perturbation():
    params, spec = _spec(kind="tetrahedral", levels=2, fixed_m=25,
                         n_sequences=5, seed=3)
    bumped = params.vector()
    bumped[:-1] *= 1.01
    start = params.with_vector(bumped)
    result = orbit_tune(start, spec, budget=150)
    assert not result.reverted
    assert result.heldout_tuned < result.heldout_start / 10.0
    assert result.tuned_objective <= result.start_objective
    assert result.evaluations <= 150


def test_tune_never_returns_worse_heldout_params():
    # overfitting trap: a single tuning sequence, validated on many
    params, spec = _spec(kind="octahedral", levels=3, fixed_m=10,
                         n_sequences=1, seed=2)
    result = orbit_tune(params, spec, budget=60)
    if result.reverted:
        assert result.params == params
    else:
        assert result.heldout_tuned <= result.heldout_start


def test_tune_requires_frozen_seed_policy():
    params, spec = _spec(seed_policy="resampled")
    with pytest.raises(ValueError):
        orbit_tune(params, spec, budget=10)


def test_fourteen_parameter_tune_stays_near_calibrated_heldout():
    params, spec = _spec(kind="icosahedral", levels=3, fixed_m=250,
                         n_sequences=20, seed=29)
    calibrated_heldout = validation_objective(params.vector(), spec)
    rng = np.random.default_rng(3)
    bumped = params.vector()
    bumped[:-1] *= 1.0 + rng.uniform(-0.005, 0.005, size=len(bumped) - 1)
    result = orbit_tune(params.with_vector(bumped), spec, budget=700)
    assert result.heldout_tuned <= 2.0 * calibrated_heldout


def test_trace_csv_format():
    result = nelder_mead(lambda x: float(x @ x), np.array([1.0, 1.0]), 0.5, 20)
    text = trace_to_csv(result.trace)
    lines = text.strip().split("\n")
    assert lines[0] == "evaluation,objective"
    assert len(lines) == len(result.trace) + 1
    first = lines[1].split(",")
    assert first[0] == "0" and float(first[1]) >= 0.0
