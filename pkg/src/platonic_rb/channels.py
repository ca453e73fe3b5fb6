"""Qubit noise channels in Kraus and Pauli-transfer form, plus the per-gate
noise models used by the benchmarking engine.

A channel's Pauli transfer matrix R satisfies, for rho = (1/2) sum_a x_a P_a
with P = (I, X, Y, Z): x' = R x, R[a, b] = Tr(P_a ch(P_b)) / 2. Composition
"apply `first`, then `second`" is the matrix product R_second @ R_first.
Noise attaches per physical gate: a noisy gate acts as ideal unitary followed
by its channel. The idle is a real 12 ns gate and is noisy like any other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .qmath import IDENTITY2, PAULI_X, PAULI_Y, PAULI_Z, bloch_rotation, rotation_unitary
from .tables import PhysicalGate

__all__ = [
    "Channel",
    "identity_channel",
    "unitary_channel",
    "depolarizing",
    "amplitude_damping",
    "phase_damping",
    "coherent_error",
    "compose",
    "apply_channel",
    "channel_from_ptm",
    "choi_matrix",
    "is_cptp",
    "average_gate_error",
    "NoiseModel",
    "noise_model_from_spec",
    "NOISE_MODEL_NAMES",
]

_PAULIS4 = (IDENTITY2, PAULI_X, PAULI_Y, PAULI_Z)


def _kraus_to_ptm(kraus: tuple[np.ndarray, ...]) -> np.ndarray:
    r = np.empty((4, 4))
    for b, pb in enumerate(_PAULIS4):
        out = sum(k @ pb @ k.conj().T for k in kraus)
        for a, pa in enumerate(_PAULIS4):
            r[a, b] = np.trace(pa @ out).real / 2.0
    return r


@dataclass(frozen=True, eq=False)
class Channel:
    """Completely positive trace-preserving qubit map.

    Holds a Kraus decomposition; the transfer matrix is derived once and
    cached. Instances are immutable and safe to share across threads.
    """

    kraus: tuple[np.ndarray, ...]
    _ptm: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        kraus = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        total = sum(k.conj().T @ k for k in kraus)
        if np.max(np.abs(total - np.eye(kraus[0].shape[0]))) > 1e-12:
            raise ValueError("Kraus operators are not trace preserving")
        object.__setattr__(self, "kraus", kraus)
        if self._ptm is None:
            object.__setattr__(self, "_ptm", _kraus_to_ptm(kraus))
        self._ptm.setflags(write=False)

    @property
    def ptm(self) -> np.ndarray:
        """4x4 real Pauli transfer matrix; first row (1, 0, 0, 0)."""
        return self._ptm

    @property
    def bloch_block(self) -> np.ndarray:
        """The 3x3 rotation/contraction block of the transfer matrix."""
        return self._ptm[1:, 1:]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Evolve a density matrix: sum K rho K^dag."""
        rho = np.asarray(rho, dtype=complex)
        return sum(k @ rho @ k.conj().T for k in self.kraus)


def identity_channel() -> Channel:
    return Channel((np.eye(2, dtype=complex),))


def unitary_channel(u: np.ndarray) -> Channel:
    """The channel rho -> U rho U^dag."""
    return Channel((np.asarray(u, dtype=complex),))


def depolarizing(strength: float) -> Channel:
    """rho -> (1 - strength) rho + strength I/2; Bloch block (1-strength) I.

    Average gate error relative to the identity is strength/2.
    """
    if not 0.0 <= strength <= 1.0:
        raise ValueError(f"depolarizing strength must be in [0, 1], got {strength}")
    p = strength * 3.0 / 4.0  # Pauli-error weight reproducing the Bloch contraction
    kraus = (
        math.sqrt(1.0 - p) * IDENTITY2,
        math.sqrt(p / 3.0) * PAULI_X,
        math.sqrt(p / 3.0) * PAULI_Y,
        math.sqrt(p / 3.0) * PAULI_Z,
    )
    return Channel(kraus)


def amplitude_damping(gamma: float) -> Channel:
    """Energy relaxation toward |0>; Bloch block diag(sqrt(1-g), sqrt(1-g), 1-g)."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"damping gamma must be in [0, 1], got {gamma}")
    k0 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - gamma)]], dtype=complex)
    k1 = np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    return Channel((k0, k1))


def phase_damping(lam: float) -> Channel:
    """Pure dephasing; off-diagonals shrink by sqrt(1 - lam)."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"dephasing lambda must be in [0, 1], got {lam}")
    k0 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - lam)]], dtype=complex)
    k1 = np.array([[0.0, 0.0], [0.0, math.sqrt(lam)]], dtype=complex)
    return Channel((k0, k1))


def coherent_error(axis, epsilon: float) -> Channel:
    """Unitary over-rotation by `epsilon` radians about `axis`."""
    return unitary_channel(rotation_unitary(axis, epsilon))


def compose(first: Channel, second: Channel) -> Channel:
    """The channel "apply `first`, then `second`"."""
    ptm = second.ptm @ first.ptm
    if len(first.kraus) * len(second.kraus) <= 4:
        kraus = tuple(b @ a for b in second.kraus for a in first.kraus)
        return Channel(kraus, ptm)
    return channel_from_ptm(ptm)


def apply_channel(channel: Channel, rho: np.ndarray) -> np.ndarray:
    return channel.apply(rho)


def _ptm_to_choi(ptm: np.ndarray) -> np.ndarray:
    # Choi = (1/2) sum_ab R[a,b] P_a (x) P_b^T, unit trace normalization
    choi = np.zeros((4, 4), dtype=complex)
    for a, pa in enumerate(_PAULIS4):
        for b, pb in enumerate(_PAULIS4):
            choi += ptm[a, b] * np.kron(pa, pb.T)
    return choi / 4.0


def channel_from_ptm(ptm: np.ndarray) -> Channel:
    """Reconstruct a canonical Kraus decomposition from a transfer matrix.

    Raises
    ------
    ValueError
        If the transfer matrix is not completely positive and trace
        preserving (Choi eigenvalues below -1e-10 or first row not e_0).
    """
    ptm = np.asarray(ptm, dtype=float)
    if np.max(np.abs(ptm[0] - np.array([1.0, 0.0, 0.0, 0.0]))) > 1e-10:
        raise ValueError("transfer matrix is not trace preserving")
    choi = _ptm_to_choi(ptm)
    vals, vecs = np.linalg.eigh(choi)
    if vals.min() < -1e-10:
        raise ValueError(f"transfer matrix is not completely positive: {vals.min()}")
    kraus = []
    for val, vec in zip(vals, vecs.T):
        if val > 1e-14:
            # eigenvector is the column-stacked operator sqrt(2*val) * K
            kraus.append(math.sqrt(2.0 * val) * vec.reshape(2, 2))
    return Channel(tuple(kraus))


def choi_matrix(channel: Channel) -> np.ndarray:
    """Unit-trace Choi state of the channel."""
    return _ptm_to_choi(channel.ptm)


def is_cptp(channel: Channel, tol: float = 1e-10) -> bool:
    """Complete positivity and trace preservation check via the Choi state."""
    choi = choi_matrix(channel)
    if np.min(np.linalg.eigvalsh(choi)) < -tol:
        return False
    return np.max(np.abs(channel.ptm[0] - np.array([1.0, 0.0, 0.0, 0.0]))) <= tol


def average_gate_error(channel: Channel, target: np.ndarray) -> float:
    """Average infidelity of `channel` with respect to a target unitary.

    r = (3 - Tr(O^T M)) / 6 with O the target's Bloch rotation and M the
    channel's Bloch block; equals strength/2 when the channel is the target
    followed by depolarizing(strength). Equivalent to one minus the state
    fidelity averaged over the Bloch sphere (or over the 6 cardinal states).
    """
    o = bloch_rotation(np.asarray(target, dtype=complex))
    return (3.0 - float(np.trace(o.T @ channel.bloch_block))) / 6.0


NOISE_MODEL_NAMES = (
    "none",
    "depolarizing",
    "amplitude_damping",
    "phase_damping",
    "duration_damping",
    "amplitude_error",
)


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Per-physical-gate channel assignment.

    `per_gate` maps (axis, angle) to the channel applied after that gate's
    ideal unitary; `idle_channel` covers the idle. `element_extras` holds
    optional additional channels applied after specific group elements
    (keyed by element index), used to inject a known error on one gate.
    """

    per_gate: dict[PhysicalGate, Channel]
    idle_channel: Channel
    mode: str = "gate-level"
    element_extras: dict[int, Channel] = field(default_factory=dict)

    def channel_for(self, gate: PhysicalGate) -> Channel:
        if gate.axis == "I":
            return self.idle_channel
        try:
            return self.per_gate[gate]
        except KeyError:
            raise KeyError(f"noise model has no channel for gate {gate}") from None


def _duration_damping(duration: float, t1: float | None, tphi: float | None) -> Channel:
    ch = identity_channel()
    if t1 is not None:
        ch = compose(ch, amplitude_damping(1.0 - math.exp(-duration / t1)))
    if tphi is not None:
        ch = compose(ch, phase_damping(1.0 - math.exp(-2.0 * duration / tphi)))
    return ch


def noise_model_from_spec(
    model: str,
    params: dict[str, float],
    gates: tuple[PhysicalGate, ...],
    mode: str = "gate-level",
) -> NoiseModel:
    """Build a NoiseModel for a gate alphabet from a named model + parameters.

    Supported models and parameters:

    * "none" - no parameters.
    * "depolarizing" - error_per_gate: average error r per physical gate
      (channel strength 2r), applied to every gate including the idle.
    * "amplitude_damping" - gamma (fixed per gate) or t1 (ns,
      duration-scaled gamma = 1 - exp(-duration/T1)).
    * "phase_damping" - lam (fixed) or tphi (ns, duration-scaled).
    * "duration_damping" - t1 and/or tphi (ns); both applied per gate
      scaled by that gate's duration, so 10 ns Z gates decohere less.
    * "amplitude_error" - relative: each non-idle gate over-rotates about
      its own axis by relative*angle radians.
    """
    params = dict(params)
    gates = tuple(g for g in gates if g.axis != "I")

    def take(*names, required=()):
        unknown = set(params) - set(names)
        if unknown:
            raise ValueError(f"noise model {model!r}: unknown parameters {sorted(unknown)}")
        missing = [n for n in required if n not in params]
        if missing:
            raise ValueError(f"noise model {model!r}: missing parameters {missing}")

    per_gate: dict[PhysicalGate, Channel] = {}
    if model == "none":
        take()
        idle = identity_channel()
        per_gate = {g: idle for g in gates}
    elif model == "depolarizing":
        take("error_per_gate", required=("error_per_gate",))
        ch = depolarizing(2.0 * params["error_per_gate"])
        idle = ch
        per_gate = {g: ch for g in gates}
    elif model == "amplitude_damping":
        take("gamma", "t1")
        if ("gamma" in params) == ("t1" in params):
            raise ValueError("amplitude_damping takes exactly one of gamma, t1")
        if "gamma" in params:
            ch = amplitude_damping(params["gamma"])
            idle = ch
            per_gate = {g: ch for g in gates}
        else:
            idle = _duration_damping(12.0, params["t1"], None)
            per_gate = {g: _duration_damping(g.duration, params["t1"], None) for g in gates}
    elif model == "phase_damping":
        take("lam", "tphi")
        if ("lam" in params) == ("tphi" in params):
            raise ValueError("phase_damping takes exactly one of lam, tphi")
        if "lam" in params:
            ch = phase_damping(params["lam"])
            idle = ch
            per_gate = {g: ch for g in gates}
        else:
            idle = _duration_damping(12.0, None, params["tphi"])
            per_gate = {g: _duration_damping(g.duration, None, params["tphi"]) for g in gates}
    elif model == "duration_damping":
        take("t1", "tphi")
        if not params:
            raise ValueError("duration_damping requires t1 and/or tphi")
        idle = _duration_damping(12.0, params.get("t1"), params.get("tphi"))
        per_gate = {
            g: _duration_damping(g.duration, params.get("t1"), params.get("tphi"))
            for g in gates
        }
    elif model == "amplitude_error":
        take("relative", required=("relative",))
        idle = identity_channel()
        per_gate = {
            g: coherent_error(g.axis, params["relative"] * g.angle) for g in gates
        }
    else:
        raise ValueError(f"unknown noise model {model!r}")
    return NoiseModel(per_gate, idle, mode)
