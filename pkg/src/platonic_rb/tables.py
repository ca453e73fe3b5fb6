"""Physical-gate vocabulary and the decomposition tables of the three
Platonic rotation groups.

Each group element is a *word*: an ordered tuple of physical gates written in
time order, first-applied first. The textual form mirrors that ordering, e.g.
``"Xpi/2 Ypi/2"`` is the X rotation followed by the Y rotation, i.e. the
unitary ``R_Y(pi/2) @ R_X(pi/2)``. Negative angles are realized physically as
rotations about the opposite axis but are stored here as signed angles.

The idle is its own length-1 word ``"I"`` and counts toward word-length
statistics. X, Y, and idle gates last 12 ns; Z gates last 10 ns.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .qmath import golden_angle

__all__ = [
    "PHI",
    "ANGLE_VALUES",
    "XY_DURATION_NS",
    "Z_DURATION_NS",
    "PhysicalGate",
    "Word",
    "angle_name",
    "parse_gate",
    "parse_word",
    "format_gate",
    "format_word",
    "GROUP_TABLES",
    "GROUP_KINDS",
]

PHI = golden_angle()

# Canonical angle spellings used in gate tokens, with their values in radians.
ANGLE_VALUES: dict[str, float] = {
    "pi": math.pi,
    "pi/2": math.pi / 2.0,
    "2pi/5": 2.0 * math.pi / 5.0,
    "4pi/5": 4.0 * math.pi / 5.0,
    "phi": PHI,
    "2phi": 2.0 * PHI,
}

XY_DURATION_NS = 12.0
Z_DURATION_NS = 10.0


class PhysicalGate(NamedTuple):
    """One elementary rotation as applied in hardware.

    axis is "X", "Y", "Z", or "I" for the idle; angle is the signed rotation
    angle in radians (0 for the idle).
    """

    axis: str
    angle: float

    @property
    def duration(self) -> float:
        """Gate duration in nanoseconds (12 for X/Y/idle, 10 for Z)."""
        return Z_DURATION_NS if self.axis == "Z" else XY_DURATION_NS


Word = tuple[PhysicalGate, ...]

IDLE = PhysicalGate("I", 0.0)


def angle_name(angle: float) -> str:
    """Canonical signed spelling of an allowed angle, e.g. "-pi/2"."""
    for name, value in ANGLE_VALUES.items():
        if abs(angle - value) < 1e-12:
            return name
        if abs(angle + value) < 1e-12:
            return "-" + name
    raise ValueError(f"angle {angle!r} is not in the allowed set")


def parse_gate(token: str) -> PhysicalGate:
    """Parse one gate token such as "Xpi", "Y-pi/2", "Z2pi/5", or "I".

    A bare axis letter means a pi rotation, matching the shorthand used for
    interleaved-gate lists; "I" alone is the idle.
    """
    token = token.strip()
    if not token:
        raise ValueError("empty gate token")
    axis, rest = token[0].upper(), token[1:]
    if axis == "I":
        if rest:
            raise ValueError(f"idle gate takes no angle, got {token!r}")
        return IDLE
    if axis not in ("X", "Y", "Z"):
        raise ValueError(f"unknown axis in gate token {token!r}")
    if not rest:
        return PhysicalGate(axis, math.pi)
    sign = 1.0
    if rest[0] in "+-":
        sign = -1.0 if rest[0] == "-" else 1.0
        rest = rest[1:]
    if rest not in ANGLE_VALUES:
        raise ValueError(f"unknown angle {rest!r} in gate token {token!r}")
    return PhysicalGate(axis, sign * ANGLE_VALUES[rest])


def parse_word(text: str) -> Word:
    """Parse a whitespace-separated gate word, time order left to right."""
    tokens = text.split()
    if not tokens:
        raise ValueError("empty gate word")
    return tuple(parse_gate(tok) for tok in tokens)


def format_gate(gate: PhysicalGate) -> str:
    """Canonical token of a gate; inverse of `parse_gate`."""
    if gate.axis == "I":
        return "I"
    return gate.axis + angle_name(gate.angle)


def format_word(word: Word) -> str:
    """Canonical text of a word; inverse of `parse_word`."""
    return " ".join(format_gate(g) for g in word)


# --- Decomposition tables ------------------------------------------------
#
# Each entry is (rotation class, word text). Within a group the words are
# pairwise distinct rotations; class labels follow the geometry of the solid
# (axes through edges, faces, or vertices) plus the octahedron-specific
# order-4 and hadamard-like families.

_TETRAHEDRAL = [
    ("identity", "I"),
    # pi about the coordinate axes: tetrahedron edge midpoints
    ("edge-pi", "Xpi"),
    ("edge-pi", "Ypi"),
    ("edge-pi", "Ypi Xpi"),
    # +/-2pi/3 about the four body diagonals
    ("face-2pi/3", "Xpi/2 Ypi/2"),
    ("face-2pi/3", "Xpi/2 Y-pi/2"),
    ("face-2pi/3", "X-pi/2 Ypi/2"),
    ("face-2pi/3", "X-pi/2 Y-pi/2"),
    ("face-2pi/3", "Ypi/2 Xpi/2"),
    ("face-2pi/3", "Ypi/2 X-pi/2"),
    ("face-2pi/3", "Y-pi/2 Xpi/2"),
    ("face-2pi/3", "Y-pi/2 X-pi/2"),
]

_OCTAHEDRAL = _TETRAHEDRAL + [
    # +/-pi/2 about the coordinate axes (octahedron vertices)
    ("order-4", "Xpi/2"),
    ("order-4", "X-pi/2"),
    ("order-4", "Ypi/2"),
    ("order-4", "Y-pi/2"),
    ("order-4", "X-pi/2 Ypi/2 Xpi/2"),
    ("order-4", "X-pi/2 Y-pi/2 Xpi/2"),
    # pi about the six edge-midpoint diagonals
    ("hadamard-like", "Xpi Ypi/2"),
    ("hadamard-like", "Xpi Y-pi/2"),
    ("hadamard-like", "Ypi Xpi/2"),
    ("hadamard-like", "Ypi X-pi/2"),
    ("hadamard-like", "Xpi/2 Ypi/2 Xpi/2"),
    ("hadamard-like", "X-pi/2 Ypi/2 X-pi/2"),
]

_ICOSAHEDRAL = [
    ("identity", "I"),
    # +/-2pi/5 about the six vertex axes
    ("vertex-2pi/5", "Yphi X2pi/5 Y-phi"),
    ("vertex-2pi/5", "Yphi X-2pi/5 Y-phi"),
    ("vertex-2pi/5", "Y-phi X2pi/5 Yphi"),
    ("vertex-2pi/5", "Y-phi X-2pi/5 Yphi"),
    ("vertex-2pi/5", "Zphi Y2pi/5 Z-phi"),
    ("vertex-2pi/5", "Zphi Y-2pi/5 Z-phi"),
    ("vertex-2pi/5", "Z-phi Y2pi/5 Zphi"),
    ("vertex-2pi/5", "Z-phi Y-2pi/5 Zphi"),
    ("vertex-2pi/5", "Xphi Z2pi/5 X-phi"),
    ("vertex-2pi/5", "Xphi Z-2pi/5 X-phi"),
    ("vertex-2pi/5", "X-phi Z2pi/5 Xphi"),
    ("vertex-2pi/5", "X-phi Z-2pi/5 Xphi"),
    # +/-4pi/5 about the same axes
    ("vertex-4pi/5", "Yphi X4pi/5 Y-phi"),
    ("vertex-4pi/5", "Yphi X-4pi/5 Y-phi"),
    ("vertex-4pi/5", "Y-phi X4pi/5 Yphi"),
    ("vertex-4pi/5", "Y-phi X-4pi/5 Yphi"),
    ("vertex-4pi/5", "Zphi Y4pi/5 Z-phi"),
    ("vertex-4pi/5", "Zphi Y-4pi/5 Z-phi"),
    ("vertex-4pi/5", "Z-phi Y4pi/5 Zphi"),
    ("vertex-4pi/5", "Z-phi Y-4pi/5 Zphi"),
    ("vertex-4pi/5", "Xphi Z4pi/5 X-phi"),
    ("vertex-4pi/5", "Xphi Z-4pi/5 X-phi"),
    ("vertex-4pi/5", "X-phi Z4pi/5 Xphi"),
    ("vertex-4pi/5", "X-phi Z-4pi/5 Xphi"),
    # +/-2pi/3 about the ten face axes
    ("face-2pi/3", "X-pi/2 Y-pi/2"),
    ("face-2pi/3", "Ypi/2 Xpi/2"),
    ("face-2pi/3", "Xphi Z-2pi/5 X-phi X-pi/2 Y-pi/2 Xphi Z2pi/5 X-phi"),
    ("face-2pi/3", "Xphi Z-2pi/5 X-phi Ypi/2 Xpi/2 Xphi Z2pi/5 X-phi"),
    ("face-2pi/3", "Xphi Z-4pi/5 X-phi X-pi/2 Y-pi/2 Xphi Z4pi/5 X-phi"),
    ("face-2pi/3", "Xphi Z-4pi/5 X-phi Ypi/2 Xpi/2 Xphi Z4pi/5 X-phi"),
    ("face-2pi/3", "X-pi/2 Ypi/2"),
    ("face-2pi/3", "Y-pi/2 Xpi/2"),
    ("face-2pi/3", "Xphi Z2pi/5 X-phi X-pi/2 Y-pi/2 Xphi Z-2pi/5 X-phi"),
    ("face-2pi/3", "Xphi Z2pi/5 X-phi Ypi/2 Xpi/2 Xphi Z-2pi/5 X-phi"),
    ("face-2pi/3", "Xpi/2 Ypi/2"),
    ("face-2pi/3", "Y-pi/2 X-pi/2"),
    ("face-2pi/3", "Xphi Z-4pi/5 X-phi Xpi/2 Ypi/2 Xphi Z4pi/5 X-phi"),
    ("face-2pi/3", "Xphi Z-4pi/5 X-phi Y-pi/2 X-pi/2 Xphi Z4pi/5 X-phi"),
    ("face-2pi/3", "Xphi Z4pi/5 X-phi Xpi/2 Ypi/2 Xphi Z-4pi/5 X-phi"),
    ("face-2pi/3", "Xphi Z4pi/5 X-phi Y-pi/2 X-pi/2 Xphi Z-4pi/5 X-phi"),
    ("face-2pi/3", "Xphi Z2pi/5 X-phi Xpi/2 Ypi/2 Xphi Z-2pi/5 X-phi"),
    ("face-2pi/3", "Xphi Z2pi/5 X-phi Y-pi/2 X-pi/2 Xphi Z-2pi/5 X-phi"),
    ("face-2pi/3", "Xpi/2 Y-pi/2"),
    ("face-2pi/3", "Ypi/2 X-pi/2"),
    # pi about the fifteen edge-midpoint axes
    ("edge-pi", "Xpi"),
    ("edge-pi", "Xphi Z2pi/5 Xpi Z-2pi/5 X-phi"),
    ("edge-pi", "Xphi Z-2pi/5 Xpi Z2pi/5 X-phi"),
    ("edge-pi", "Xphi Z4pi/5 Xpi Z-4pi/5 X-phi"),
    ("edge-pi", "Xphi Z-4pi/5 Xpi Z4pi/5 X-phi"),
    ("edge-pi", "Ypi"),
    ("edge-pi", "Xphi Z2pi/5 Ypi X2phi Z-2pi/5 X-phi"),
    ("edge-pi", "Xphi Z-2pi/5 Ypi X2phi Z2pi/5 X-phi"),
    ("edge-pi", "Xphi Z4pi/5 Ypi X2phi Z-4pi/5 X-phi"),
    ("edge-pi", "Xphi Z-4pi/5 Ypi X2phi Z4pi/5 X-phi"),
    ("edge-pi", "Zpi"),
    ("edge-pi", "Xphi Z2pi/5 Zpi X2phi Z-2pi/5 X-phi"),
    ("edge-pi", "Xphi Z-2pi/5 Zpi X2phi Z2pi/5 X-phi"),
    ("edge-pi", "Xphi Z4pi/5 Zpi X2phi Z-4pi/5 X-phi"),
    ("edge-pi", "Xphi Z-4pi/5 Zpi X2phi Z4pi/5 X-phi"),
]

GROUP_TABLES: dict[str, list[tuple[str, str]]] = {
    "tetrahedral": _TETRAHEDRAL,
    "octahedral": _OCTAHEDRAL,
    "icosahedral": _ICOSAHEDRAL,
}

GROUP_KINDS = tuple(GROUP_TABLES)
