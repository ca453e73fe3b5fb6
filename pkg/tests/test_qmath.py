import math

import numpy as np

from platonic_rb.qmath import (
    bloch_rotation,
    equal_up_to_phase,
    golden_angle,
    is_bloch_rotation,
    is_density_matrix,
    is_unitary,
    rotation_angle,
    rotation_axis,
    rotation_unitary,
)


def _random_axis(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def test_rotation_unitary_is_unitary():
    rng = np.random.default_rng(1)
    for _ in range(50):
        u = rotation_unitary(_random_axis(rng), rng.uniform(-2 * math.pi, 2 * math.pi))
        assert is_unitary(u)


def test_rotation_angles_add_about_fixed_axis():
    rng = np.random.default_rng(2)
    for _ in range(30):
        axis = _random_axis(rng)
        a, b = rng.uniform(-math.pi, math.pi, size=2)
        left = rotation_unitary(axis, a) @ rotation_unitary(axis, b)
        assert equal_up_to_phase(left, rotation_unitary(axis, a + b))


def test_bloch_rotation_is_a_homomorphism():
    rng = np.random.default_rng(3)
    for _ in range(30):
        u = rotation_unitary(_random_axis(rng), rng.uniform(-math.pi, math.pi))
        v = rotation_unitary(_random_axis(rng), rng.uniform(-math.pi, math.pi))
        got = bloch_rotation(u @ v)
        want = bloch_rotation(u) @ bloch_rotation(v)
        assert np.max(np.abs(got - want)) < 1e-12
        assert is_bloch_rotation(got)


def test_axis_angle_round_trip():
    rng = np.random.default_rng(4)
    for _ in range(40):
        axis = _random_axis(rng)
        angle = rng.uniform(0.05, math.pi - 0.05)
        m = bloch_rotation(rotation_unitary(axis, angle))
        assert abs(rotation_angle(m) - angle) < 1e-10
        recovered = rotation_axis(m)
        assert min(np.linalg.norm(recovered - axis), np.linalg.norm(recovered + axis)) < 1e-9


def test_named_axes_match_pauli_conjugation():
    # R_z(pi/2) sends x to y on the Bloch sphere
    m = bloch_rotation(rotation_unitary("Z", math.pi / 2))
    assert np.allclose(m @ np.array([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0], atol=1e-12)


def test_equal_up_to_phase_detects_global_phase_only():
    rng = np.random.default_rng(5)
    u = rotation_unitary(_random_axis(rng), 0.7)
    assert equal_up_to_phase(u, np.exp(1j * 1.234) * u)
    assert not equal_up_to_phase(u, rotation_unitary("X", 0.71) @ u)


def test_golden_angle_tangent():
    assert abs(math.tan(golden_angle()) - (1 + math.sqrt(5)) / 2) < 1e-14


def test_density_matrix_predicate():
    assert is_density_matrix(np.array([[0.5, 0.5], [0.5, 0.5]]))
    assert not is_density_matrix(np.array([[1.5, 0.0], [0.0, -0.5]]))
