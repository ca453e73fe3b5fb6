import math

import numpy as np
import pytest

from platonic_rb.fitting import (
    DecayFit,
    bootstrap_p_std,
    fit_decay,
    gate_fidelity,
    interleaved_error,
    reference_error,
    weights_from_stderr,
)


def _curve(a, b, p, ms):
    return [(m, a * p**m + b) for m in ms]


def test_noiseless_round_trip():
    rng = np.random.default_rng(0)
    ms = [1, 2, 5, 10, 20, 50, 100, 200]
    for _ in range(50):
        a = rng.uniform(0.3, 0.5)
        b = rng.uniform(0.4, 0.6)
        p = rng.uniform(0.9, 0.9995)
        fit = fit_decay(_curve(a, b, p, ms))
        assert abs(fit.A - a) < 1e-9
        assert abs(fit.B - b) < 1e-9
        assert abs(fit.p - p) < 1e-9
        assert fit.residual_norm < 1e-9


def test_fit_invariant_under_reordering():
    pts = _curve(0.45, 0.5, 0.97, [1, 4, 9, 16, 30, 60])
    fwd = fit_decay(pts)
    rev = fit_decay(list(reversed(pts)))
    assert fwd.p == rev.p and fwd.A == rev.A and fwd.B == rev.B


def test_noisy_recovery_within_three_sigma():
    rng = np.random.default_rng(1)
    ms = [1, 3, 7, 15, 30, 60, 120, 240]
    hits = 0
    for _ in range(40):
        pts = [(m, f + rng.normal(0, 0.005)) for m, f in _curve(0.45, 0.5, 0.985, ms)]
        fit = fit_decay(pts)
        if abs(fit.p - 0.985) <= 3 * fit.p_std_error:
            hits += 1
    assert hits >= 36


def test_weights_downweight_noisy_points():
    rng = np.random.default_rng(2)
    ms = [1, 3, 7, 15, 30, 60, 120]
    pts = _curve(0.45, 0.5, 0.98, ms)
    # corrupt one point badly but give it a tiny weight
    noisy = [(m, f, 1.0) for m, f in pts]
    noisy[3] = (pts[3][0], pts[3][1] + 0.2, 1e-8)
    fit = fit_decay(noisy)
    assert abs(fit.p - 0.98) < 1e-4
    del rng


def test_too_few_lengths_rejected():
    with pytest.raises(ValueError):
        fit_decay([(1, 0.9), (2, 0.8)])
    with pytest.raises(ValueError):
        fit_decay([(1, 0.9), (1, 0.91), (1, 0.89)])


def test_bad_rows_rejected():
    with pytest.raises(ValueError):
        fit_decay([(1, 0.9, 1.0, 7.0), (2, 0.8), (3, 0.7)])
    with pytest.raises(ValueError):
        fit_decay([(1, math.nan), (2, 0.8), (3, 0.7)])
    with pytest.raises(ValueError):
        fit_decay([(1, 0.9, -1.0), (2, 0.8), (3, 0.7)])


def test_flat_data_flagged_unidentifiable():
    fit = fit_decay([(1, 0.5), (2, 0.5), (3, 0.5)])
    assert fit.B == 0.5
    assert "p_unidentifiable" in fit.flags


def test_weights_from_stderr():
    w = weights_from_stderr([0.1, 0.2, 0.0])
    assert np.allclose(w, 1.0)  # any zero stderr falls back to uniform
    w = weights_from_stderr([0.1, 0.2])
    assert np.allclose(w, [100.0, 25.0])


def test_bootstrap_p_std_reasonable():
    rng = np.random.default_rng(3)
    ms = [1, 5, 10, 20, 40, 80]
    per_m = {
        m: np.clip(0.45 * 0.98**m + 0.5 + rng.normal(0, 0.01, size=50), 0, 1)
        for m in ms
    }
    std = bootstrap_p_std(per_m, n_boot=60, rng=np.random.default_rng(4))
    assert 0.0 < std < 0.05
    again = bootstrap_p_std(per_m, n_boot=60, rng=np.random.default_rng(4))
    assert std == again


def test_error_rate_relations():
    fit = DecayFit(A=0.5, B=0.5, p=0.998, residual_norm=0.0,
                   p_std_error=0.0, iterations=1, flags=())
    r = reference_error(fit)
    assert abs(r - 0.001) < 1e-15
    assert gate_fidelity(r) == 1.0 - r
    # interleaved: p_gate = p_ref * p_extra isolates the extra decay
    assert abs(interleaved_error(0.998 * 0.996, 0.998) - 0.002) < 1e-12


def test_json_dict_fields():
    fit = fit_decay(_curve(0.4, 0.55, 0.99, [1, 5, 10, 25, 50]))
    doc = fit.to_json_dict()
    assert set(doc) == {"A", "B", "p", "p_std_error", "residual_norm", "iterations", "flags"}
