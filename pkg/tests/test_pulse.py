"""Three-level pulse simulation, calibration, and the derived noise model.

The integrator is cross-checked against a brute-force product of matrix
exponentials over a much finer time grid, an independent route with its
own convergence behavior.
"""

import math

import numpy as np
import pytest
from conftest import calibrated

from platonic_rb.fitting import fit_decay
from platonic_rb.groups import build_group
from platonic_rb.pulse import (
    DETUNING_COEFFICIENT,
    PulseSimConfig,
    _raw_xy_unitary,
    leakage,
    pulse_noise_model,
    qutrit_damping_superop,
    rabi_scan,
    required_angle_names,
    simulate_gate,
    simulate_idle,
    simulate_xy_gate,
    simulate_z_gate,
    z_phase_scan,
)
from platonic_rb.qmath import equal_up_to_phase, rotation_unitary
from platonic_rb.rb import RBConfig, run_rb
from platonic_rb.tables import PhysicalGate


def _qubit_block_error(u3: np.ndarray, ideal: np.ndarray) -> float:
    """Average infidelity of the qubit block against an ideal rotation."""
    m = ideal.conj().T @ u3[:2, :2]
    fid = (np.trace(m.conj().T @ m).real + abs(np.trace(m)) ** 2) / 6.0
    return 1.0 - fid


def test_two_level_amplitude_matches_pulse_area():
    # raised-cosine area: amplitude * duration / 2 = rotation angle
    params, _ = calibrated("octahedral", levels=2)
    for name, angle in (("pi", math.pi), ("pi/2", math.pi / 2)):
        assert abs(params.xy_amplitudes[name] - 2.0 * angle / 12.0) < 1e-9


def test_two_level_gates_are_ideal_rotations():
    params, cfg = calibrated("octahedral", levels=2)
    for axis in ("X", "Y"):
        for angle in (math.pi, math.pi / 2, -math.pi / 2):
            u = simulate_xy_gate(params, axis, angle, cfg)
            assert equal_up_to_phase(u, rotation_unitary(axis, angle), tol=1e-8)


def test_three_level_calibrated_gate_errors_below_1e4():
    for kind in ("tetrahedral", "octahedral"):
        params, cfg = calibrated(kind, levels=3)
        for gate in build_group(kind).gate_alphabet():
            u = simulate_gate(params, gate, cfg)
            err = _qubit_block_error(u, rotation_unitary(gate.axis, gate.angle))
            assert err < 1e-4, (kind, gate, err)


def test_rabi_scan_follows_sin_squared():
    cfg = PulseSimConfig(levels=2)
    amps = np.linspace(0.05, 0.9, 40)
    pops = rabi_scan(amps, cfg)
    residual = pops - np.sin(amps * 12.0 / 4.0) ** 2
    assert float(np.max(np.abs(residual))) < 1e-4


def test_drag_reduces_pi_pulse_leakage_at_least_5x():
    params, cfg = calibrated("octahedral", levels=3)
    amp = params.xy_amplitudes["pi"]
    with_drag = leakage(_raw_xy_unitary(amp, "X", params.drag_coefficient, cfg, 12.0))
    without = leakage(_raw_xy_unitary(amp, "X", 0.0, cfg, 12.0))
    assert without / with_drag >= 5.0


def test_half_angle_pulses_compose_to_full():
    # exact in the two-level limit: pulse area is linear in amplitude and
    # rotations about a fixed axis commute
    params, cfg = calibrated("octahedral", levels=2)
    half = simulate_xy_gate(params, "X", math.pi / 2, cfg)
    full = simulate_xy_gate(params, "X", math.pi, cfg)
    assert equal_up_to_phase(half @ half, full, tol=1e-8)


def test_z_phase_scan_is_linear():
    cfg = PulseSimConfig(levels=3)
    amps = np.linspace(-0.5, 0.5, 21)
    phases = z_phase_scan(amps, cfg)
    slope = np.polyfit(amps, phases, 1)[0]
    assert abs(slope - 5.0) < 1e-9  # duration 10 ns / 2
    line = np.polyval(np.polyfit(amps, phases, 1), amps)
    assert np.max(np.abs(phases - line)) < 1e-12


def test_z_gates_match_ideal_rotations():
    params, cfg = calibrated("icosahedral", levels=3)
    for gate in build_group("icosahedral").gate_alphabet():
        if gate.axis != "Z":
            continue
        u = simulate_z_gate(params, gate.angle, cfg)
        err = _qubit_block_error(u, rotation_unitary("Z", gate.angle))
        assert err < 1e-6, (gate, err)


def test_idle_accumulates_no_qubit_phase():
    cfg = PulseSimConfig(levels=3)
    u = simulate_idle(cfg, 12.0)
    assert abs(u[0, 0] - 1.0) < 1e-12 and abs(u[1, 1] - 1.0) < 1e-12


def test_integrator_matches_brute_force_product():
    # independent route: rebuild H(t) from the stated model and multiply
    # midpoint matrix exponentials on a 20x finer grid
    def expm_hermitian(h, dt):
        vals, vecs = np.linalg.eigh(h)
        return (vecs * np.exp(-1j * vals * dt)) @ vecs.conj().T

    cfg = PulseSimConfig(levels=3, time_step=0.01)
    amp, drag, duration = 0.52, -0.9, 12.0
    fast = _raw_xy_unitary(amp, "X", drag, cfg, duration)

    eta = cfg.anharmonicity
    a = np.diag([1.0, math.sqrt(2.0)], k=1).astype(complex)
    dt = 0.0005
    n = int(round(duration / dt))
    brute = np.eye(3, dtype=complex)
    for k in range(n):
        t = (k + 0.5) * dt
        env = amp * (1.0 - math.cos(2.0 * math.pi * t / duration)) / 2.0
        slope = amp * (math.pi / duration) * math.sin(2.0 * math.pi * t / duration)
        omega = env + 1j * (drag / eta) * slope
        h = eta * np.diag([0.0, 0.0, 1.0]).astype(complex)
        h += (DETUNING_COEFFICIENT * env**2 / eta) * np.diag([0.0, 1.0, 1.0])
        h += 0.5 * (omega * a.conj().T + np.conj(omega) * a)
        brute = expm_hermitian(h, dt) @ brute
    assert np.max(np.abs(fast - brute)) < 1e-5


def test_leakage_measure():
    u = np.eye(3, dtype=complex)
    assert leakage(u) == 0.0
    swap02 = np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]], dtype=complex)
    assert abs(leakage(swap02) - 1.0) < 1e-15
    assert leakage(np.eye(2, dtype=complex)) == 0.0


def test_required_angle_names_split():
    gates = build_group("icosahedral").gate_alphabet()
    xy, z = required_angle_names(gates)
    assert "pi" in xy and all(not n.startswith("-") for n in xy)
    assert any(n.startswith("-") for n in z)


def test_calibration_rejects_missing_levels():
    with pytest.raises(ValueError):
        PulseSimConfig(levels=4)


def test_damping_superop_preserves_trace_and_decays():
    sup = qutrit_damping_superop(12.0, t1=30_000.0, tphi=None)
    rho = np.diag([0.0, 1.0, 0.0]).astype(complex)
    out = (sup @ rho.reshape(-1)).reshape(3, 3)
    assert abs(np.trace(out) - 1.0) < 1e-12
    assert abs(out[1, 1].real - math.exp(-12.0 / 30_000.0)) < 1e-6


def test_pulse_noise_model_covers_alphabet():
    params, cfg = calibrated("tetrahedral", levels=3)
    gates = build_group("tetrahedral").gate_alphabet(include_idle=True)
    model = pulse_noise_model(params, cfg, gates)
    for gate in gates:
        u = model.unitary_for(gate)
        assert np.max(np.abs(u.conj().T @ u - np.eye(3))) < 1e-9


def test_pulse_level_reference_rb_below_1e4():
    params, cfg = calibrated("tetrahedral", levels=3)
    gates = build_group("tetrahedral").gate_alphabet(include_idle=True)
    model = pulse_noise_model(params, cfg, gates)
    config = RBConfig(group_kind="tetrahedral", noise=model, seed=13,
                      m_values=(1, 30, 100, 300, 1000, 3000), k=20)
    fit = fit_decay(run_rb(config).reference.fit_points())
    r_ref = (1.0 - fit.p) / 2.0
    assert 0.0 < r_ref < 1e-4


def test_unknown_gate_raises():
    params, cfg = calibrated("tetrahedral", levels=3)
    gates = build_group("tetrahedral").gate_alphabet()
    model = pulse_noise_model(params, cfg, gates)
    with pytest.raises(KeyError):
        model.unitary_for(PhysicalGate("X", math.pi / 3))


def test_vector_round_trip():
    params, _ = calibrated("octahedral", levels=3)
    vec = params.vector()
    assert len(vec) == params.parameter_count()
    again = params.with_vector(vec)
    assert again == params
    bumped = params.with_vector(vec + 0.01)
    assert bumped != params
