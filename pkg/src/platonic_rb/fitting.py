"""Weighted nonlinear least-squares fitting of benchmarking decays
F(m) = A p^m + B and extraction of the derived error numbers.

The optimizer is a damped Gauss-Newton iteration with p kept inside (0, 1)
by a logistic reparameterization. Initialization is fixed and documented so
identical inputs give bit-identical fits: B0 = 0.5, p0 solved from the first
and last points, A0 from the first point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DecayFit",
    "FitNonConvergenceError",
    "fit_decay",
    "weights_from_stderr",
    "bootstrap_p_std",
    "reference_error",
    "interleaved_error",
    "gate_fidelity",
]

_MAX_ITER = 200
_STEP_TOL = 1e-12


class FitNonConvergenceError(Exception):
    """Raised when damping cannot find any improving Gauss-Newton step."""


@dataclass(frozen=True)
class DecayFit:
    """Result of fitting F(m) = A p^m + B.

    `p_std_error` comes from the inverse Gauss-Newton normal matrix at the
    optimum (delta method through the logistic reparameterization), scaled
    by the reduced chi-square. `flags` may contain "p_unidentifiable" for
    degenerate (constant-fidelity) data.
    """

    A: float
    B: float
    p: float
    residual_norm: float
    p_std_error: float
    iterations: int
    flags: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "A": self.A,
            "B": self.B,
            "p": self.p,
            "p_std_error": self.p_std_error,
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "flags": list(self.flags),
        }


def weights_from_stderr(stderr) -> np.ndarray:
    """Weights 1/stderr^2 when every stderr is positive, else uniform."""
    stderr = np.asarray(stderr, dtype=float)
    if np.all(stderr > 0.0):
        return 1.0 / stderr**2
    return np.ones_like(stderr)


def _initial_guess(ms: np.ndarray, fs: np.ndarray) -> tuple[float, float, float]:
    b0 = 0.5
    num = fs[-1] - b0
    den = fs[0] - b0
    if den != 0.0 and num / den > 0.0:
        p0 = (num / den) ** (1.0 / (ms[-1] - ms[0]))
    else:
        p0 = 0.9
    p0 = min(max(p0, 1e-6), 1.0 - 1e-6)
    a0 = (fs[0] - b0) / p0 ** ms[0]
    return a0, b0, p0


def fit_decay(points) -> DecayFit:
    """Fit F(m) = A p^m + B by weighted least squares.

    Parameters
    ----------
    points : iterable
        Items (m, fidelity) or (m, fidelity, weight); missing weights
        default to 1. The fit is invariant under reordering.

    Returns
    -------
    DecayFit

    Raises
    ------
    ValueError
        For fewer than 3 distinct m values.
    FitNonConvergenceError
        If no damping factor yields an improving step.
    """
    rows = [tuple(pt) for pt in points]
    if any(len(r) not in (2, 3) for r in rows):
        raise ValueError("points must be (m, fidelity) or (m, fidelity, weight)")
    rows.sort(key=lambda r: (r[0], r[1]))
    ms = np.array([r[0] for r in rows], dtype=float)
    fs = np.array([r[1] for r in rows], dtype=float)
    ws = np.array([r[2] if len(r) == 3 else 1.0 for r in rows], dtype=float)
    if len(np.unique(ms)) < 3:
        raise ValueError("need at least 3 distinct sequence lengths")
    if np.any(ws < 0.0) or not np.all(np.isfinite(ms) & np.isfinite(fs) & np.isfinite(ws)):
        raise ValueError("non-finite input or negative weight")

    if np.ptp(fs) == 0.0:
        # flat data: B is the common value, p carries no information
        return DecayFit(
            A=0.0,
            B=float(fs[0]),
            p=0.5,
            residual_norm=0.0,
            p_std_error=math.inf,
            iterations=0,
            flags=("p_unidentifiable",),
        )

    sw = np.sqrt(ws)
    a, b, p = _initial_guess(ms, fs)
    u = math.log(p / (1.0 - p))

    def model(a_, b_, u_):
        p_ = 1.0 / (1.0 + math.exp(-u_))
        return a_ * p_**ms + b_, p_

    pred, p = model(a, b, u)
    resid = sw * (fs - pred)
    chi2 = float(resid @ resid)
    mu = 1e-3
    iterations = 0
    for iterations in range(1, _MAX_ITER + 1):
        pm = p**ms
        jac = np.column_stack(
            [
                -sw * pm,
                -sw,
                -sw * a * ms * np.where(ms > 0, p ** (ms - 1.0), 0.0) * p * (1.0 - p),
            ]
        )
        grad = jac.T @ resid
        normal = jac.T @ jac
        step = None
        for _ in range(60):
            try:
                candidate = np.linalg.solve(
                    normal + mu * np.diag(np.diag(normal).clip(min=1e-30)), -grad
                )
            except np.linalg.LinAlgError:
                mu *= 4.0
                continue
            na, nb, nu = a + candidate[0], b + candidate[1], u + candidate[2]
            new_pred, new_p = model(na, nb, nu)
            new_resid = sw * (fs - new_pred)
            new_chi2 = float(new_resid @ new_resid)
            if math.isfinite(new_chi2) and new_chi2 <= chi2:
                step = candidate
                a, b, u, p = na, nb, nu, new_p
                pred, resid, chi2 = new_pred, new_resid, new_chi2
                mu = max(mu * 0.5, 1e-12)
                break
            mu *= 4.0
        if step is None:
            if iterations == 1:
                raise FitNonConvergenceError("no improving step from initialization")
            break
        if np.linalg.norm(step) < _STEP_TOL:
            break

    pm = p**ms
    jac = np.column_stack(
        [
            -sw * pm,
            -sw,
            -sw * a * ms * np.where(ms > 0, p ** (ms - 1.0), 0.0) * p * (1.0 - p),
        ]
    )
    normal = jac.T @ jac
    dof = max(len(ms) - 3, 1)
    scale = chi2 / dof
    try:
        cov = np.linalg.inv(normal) * scale
        sigma_u = math.sqrt(max(cov[2, 2], 0.0))
        p_std = sigma_u * p * (1.0 - p)
    except np.linalg.LinAlgError:
        p_std = math.inf

    flags = []
    if not math.isfinite(p_std) or p_std == 0.0 and chi2 > 0.0:
        flags.append("p_uncertainty_unavailable")
    return DecayFit(
        A=float(a),
        B=float(b),
        p=float(p),
        residual_norm=math.sqrt(chi2),
        p_std_error=float(p_std),
        iterations=iterations,
        flags=tuple(flags),
    )


def bootstrap_p_std(per_m_fidelities: dict[int, np.ndarray], n_boot: int, rng) -> float:
    """Bootstrap standard deviation of p by resampling the k fidelities per m.

    Parameters
    ----------
    per_m_fidelities : dict
        Maps sequence length m to the array of per-sequence fidelities.
    n_boot : int
        Number of bootstrap resamples.
    rng : numpy.random.Generator
    """
    ps = []
    ms = sorted(per_m_fidelities)
    for _ in range(n_boot):
        points = []
        for m in ms:
            vals = np.asarray(per_m_fidelities[m], dtype=float)
            sample = vals[rng.integers(0, len(vals), size=len(vals))]
            points.append((m, float(np.mean(sample))))
        ps.append(fit_decay(points).p)
    return float(np.std(ps, ddof=1))


def reference_error(fit: DecayFit) -> float:
    """Average element error of the reference decay: (1 - p)/2."""
    return (1.0 - fit.p) / 2.0


def interleaved_error(p_gate: float, p_ref: float) -> float:
    """Interleaved-gate error (1 - p_gate/p_ref)/2.

    May come out negative when noise fluctuations push p_gate above p_ref;
    callers flag rather than clamp that case.
    """
    if p_ref == 0.0:
        raise ZeroDivisionError("reference decay parameter is zero")
    return (1.0 - p_gate / p_ref) / 2.0


def gate_fidelity(r: float) -> float:
    """Gate fidelity 1 - r."""
    return 1.0 - r
