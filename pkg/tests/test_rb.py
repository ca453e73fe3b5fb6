"""Sequence generation and benchmarking runs.

The depolarizing closed form is the main oracle: with a depolarizing
channel after every physical gate, rotations cancel along the closed
sequence and the exact survival is 0.5 + 0.5 * (1 - s)^(total gates).
"""

import numpy as np
import pytest

from platonic_rb.channels import depolarizing, noise_model_from_spec
from platonic_rb.fitting import fit_decay
from platonic_rb.groups import build_group
from platonic_rb.rb import (
    RBConfig,
    default_m_values,
    expected_decay,
    generate_sequence,
    run_rb,
    sequence_fidelity,
)

TETRA = build_group("tetrahedral")
OCTA = build_group("octahedral")


def _noise(r=5e-4, group=TETRA):
    return noise_model_from_spec(
        "depolarizing", {"error_per_gate": r}, group.gate_alphabet()
    )


def test_sequence_layout_reference():
    rng = np.random.default_rng(0)
    for m in (1, 2, 7, 30):
        seq = generate_sequence(TETRA, m, None, rng)
        assert len(seq) == m + 1
        assert all(0 <= i < TETRA.order for i in seq)
        total = np.eye(3)
        for idx in seq:
            total = TETRA.elements[idx].bloch @ total
        assert np.max(np.abs(total - np.eye(3))) < 1e-9


def test_sequence_layout_interleaved():
    rng = np.random.default_rng(1)
    fixed = TETRA.find_word("Xpi")
    for m in (1, 3, 11):
        seq = generate_sequence(TETRA, m, fixed, rng)
        assert len(seq) == 2 * m + 1
        assert seq[1:-1:2] == [fixed] * m
        total = np.eye(3)
        for idx in seq:
            total = TETRA.elements[idx].bloch @ total
        assert np.max(np.abs(total - np.eye(3))) < 1e-9


def test_sequence_deterministic_for_seeded_stream():
    a = generate_sequence(OCTA, 20, None, np.random.default_rng([7, 0, 20, 3]))
    b = generate_sequence(OCTA, 20, None, np.random.default_rng([7, 0, 20, 3]))
    assert a == b


def test_random_elements_roughly_uniform():
    rng = np.random.default_rng(2)
    counts = np.zeros(TETRA.order, dtype=int)
    for _ in range(3000):
        counts[generate_sequence(TETRA, 1, None, rng)[0]] += 1
    assert counts.min() > 150 and counts.max() < 350  # mean 250, sigma ~15


def test_exact_fidelity_matches_closed_form():
    rng = np.random.default_rng(3)
    noise = _noise(1e-3)
    s = 2e-3  # depolarizing strength for r = 1e-3
    for m in (1, 5, 20):
        seq = generate_sequence(TETRA, m, None, rng)
        n_gates = sum(len(TETRA.elements[i].word) for i in seq)
        want = 0.5 + 0.5 * (1.0 - s) ** n_gates
        got = sequence_fidelity(TETRA, seq, noise)
        assert abs(got - want) < 1e-12


def test_shot_sampling_converges_to_exact():
    rng = np.random.default_rng(4)
    noise = _noise(2e-3)
    seq = generate_sequence(TETRA, 10, None, rng)
    exact = sequence_fidelity(TETRA, seq, noise)
    sampled = sequence_fidelity(
        TETRA, seq, noise, shots=200_000, rng=np.random.default_rng(5)
    )
    assert sampled != exact
    assert abs(sampled - exact) < 5e-3


def test_run_rb_recovers_expected_decay():
    noise = _noise(5e-4)
    config = RBConfig(group_kind="tetrahedral", noise=noise, seed=11,
                      m_values=(1, 5, 10, 20, 40, 80, 160), k=40)
    result = run_rb(config)
    fit = fit_decay(result.reference.fit_points())
    assert abs(fit.p - expected_decay(TETRA, noise)) < 2e-4


def test_run_rb_deterministic_and_thread_invariant():
    noise = _noise(1e-3)
    base = dict(group_kind="octahedral", noise=noise, seed=5,
                m_values=(1, 4, 16, 64), k=12)
    r1 = run_rb(RBConfig(**base))
    r2 = run_rb(RBConfig(**base))
    r3 = run_rb(RBConfig(**base, threads=4))
    for a, b in ((r1, r2), (r1, r3)):
        for pa, pb in zip(a.reference.points, b.reference.points):
            assert pa.fidelities == pb.fidelities


def test_seed_changes_sampled_sequences():
    noise = _noise(1e-3)
    base = dict(group_kind="tetrahedral", noise=noise, m_values=(1, 4, 16), k=8)
    r1 = run_rb(RBConfig(seed=1, **base))
    r2 = run_rb(RBConfig(seed=2, **base))
    assert r1.reference.points[0].fidelities != r2.reference.points[0].fidelities


def test_interleaved_run_isolates_injected_error():
    fixed = TETRA.find_word("Xpi")
    injected = 1e-3
    noise = _noise(5e-4)
    noise = type(noise)(
        per_gate=noise.per_gate,
        idle_channel=noise.idle_channel,
        element_extras={fixed: depolarizing(2 * injected)},
    )
    ms = (1, 5, 10, 20, 40, 80, 160, 300)
    ref = run_rb(RBConfig(group_kind="tetrahedral", noise=noise, seed=9,
                          m_values=ms, k=40))
    inter = run_rb(RBConfig(group_kind="tetrahedral", noise=noise, seed=9,
                            m_values=ms, k=40, interleaved=fixed))
    p_ref = fit_decay(ref.reference.fit_points()).p
    p_gate = fit_decay(inter.interleaved.fit_points()).p
    r_gate = (1.0 - p_gate / p_ref) / 2.0
    # the Xpi word is one physical gate: ambient 5e-4 plus the injection
    assert abs(r_gate - (injected + 5e-4)) < 2e-4


def test_expected_decay_tracks_word_lengths():
    # reference error per element ~ avg word length * per-gate error
    r = 5e-4
    for group, avg in ((TETRA, 7 / 4), (OCTA, 15 / 8)):
        p = expected_decay(group, _noise(r, group))
        assert abs((1.0 - p) / 2.0 - avg * r) / (avg * r) < 0.05


def test_default_m_values_strictly_increasing():
    for p in (0.999, 0.99, 0.9):
        ms = default_m_values(p)
        assert ms[0] == 1
        assert all(b > a for a, b in zip(ms, ms[1:]))
        assert ms[-1] <= 10_000


def test_config_validation():
    noise = _noise()
    with pytest.raises(ValueError):
        RBConfig(group_kind="tetrahedral", noise=noise, seed=0, m_values=(4, 2))
    with pytest.raises(ValueError):
        RBConfig(group_kind="tetrahedral", noise=noise, seed=0, k=0)
    with pytest.raises(ValueError):
        RBConfig(group_kind="tetrahedral", noise=noise, seed=0, shots=0)
    with pytest.raises(ValueError):
        RBConfig(group_kind="tetrahedral", noise=noise, seed=0, threads=0)
