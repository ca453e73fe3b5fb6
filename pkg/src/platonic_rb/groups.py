"""Construction and certification of the tetrahedral, octahedral, and
icosahedral rotation groups from their physical-gate decomposition tables.

Elements are identified by their Bloch rotations, which are free of the
SU(2) global-phase/sign ambiguity: matrices are hashed by rounding entries
to 1e-6 and every match is verified elementwise at 1e-9. Construction fails
loudly if two table rows collide or any pairwise product leaves the set, so
a successfully built `Group` is certified closed and distinct.

``mult_table[i, j]`` holds the index of the element whose rotation equals
``bloch[i] @ bloch[j]``, i.e. element ``j`` applied first, then element ``i``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import channels
from .qmath import bloch_rotation, rotation_angle, rotation_axis, rotation_unitary
from .tables import GROUP_TABLES, PhysicalGate, Word, format_word, parse_word

__all__ = [
    "GroupConstructionError",
    "GroupElement",
    "Group",
    "build_group",
    "word_unitary",
    "avg_word_length",
    "frame_potential",
    "twirl_channel",
    "recovery_element",
    "OrbitCheckResult",
    "solid_orbit_check",
]

_EXPECTED_ORDER = {"tetrahedral": 12, "octahedral": 24, "icosahedral": 60}

# Rotation angle implied by each class label, used as a construction check.
_CLASS_ANGLES = {
    "identity": 0.0,
    "edge-pi": math.pi,
    "hadamard-like": math.pi,
    "face-2pi/3": 2.0 * math.pi / 3.0,
    "order-4": math.pi / 2.0,
    "vertex-2pi/5": 2.0 * math.pi / 5.0,
    "vertex-4pi/5": 4.0 * math.pi / 5.0,
}


class GroupConstructionError(Exception):
    """Raised when a decomposition table fails distinctness or closure."""


@dataclass(frozen=True, eq=False)
class GroupElement:
    index: int
    word: Word
    unitary: np.ndarray
    bloch: np.ndarray
    rotation_class: str

    @property
    def word_text(self) -> str:
        return format_word(self.word)


def word_unitary(word: Word) -> np.ndarray:
    """SU(2) product of a word, last-applied gate leftmost."""
    u = np.eye(2, dtype=complex)
    for gate in word:
        if gate.axis != "I":
            u = rotation_unitary(gate.axis, gate.angle) @ u
    return u


def _bloch_key(m: np.ndarray) -> tuple:
    return tuple(np.round(m, 6).flatten().tolist())


@dataclass(frozen=True, eq=False)
class Group:
    """One Platonic rotation group with its lookup tables.

    Immutable after construction; all lookups are read-only and safe to use
    from multiple threads.
    """

    kind: str
    elements: tuple[GroupElement, ...]
    mult_table: np.ndarray
    inv_table: np.ndarray
    identity_index: int
    bloch_index: dict[tuple, int]

    @property
    def order(self) -> int:
        return len(self.elements)

    def find_bloch(self, m: np.ndarray, tol: float = 1e-9) -> int:
        """Index of the element with Bloch rotation `m`.

        Raises
        ------
        KeyError
            If no element matches within `tol`.
        """
        index = self.bloch_index.get(_bloch_key(m))
        if index is None or np.max(np.abs(self.elements[index].bloch - m)) > tol:
            raise KeyError(f"no {self.kind} element matches the given rotation")
        return index

    def find_unitary(self, u: np.ndarray, tol: float = 1e-9) -> int:
        """Index of the element equal to `u` up to global phase."""
        return self.find_bloch(bloch_rotation(u), tol)

    def find_word(self, word: str | Word) -> int:
        """Resolve a gate word (text or parsed) to the element it composes to."""
        parsed = parse_word(word) if isinstance(word, str) else word
        return self.find_unitary(word_unitary(parsed))

    def class_sizes(self) -> dict[str, int]:
        sizes: dict[str, int] = {}
        for el in self.elements:
            sizes[el.rotation_class] = sizes.get(el.rotation_class, 0) + 1
        return sizes

    def gate_alphabet(self, include_idle: bool = False) -> tuple[PhysicalGate, ...]:
        """Distinct physical gates appearing in the word table, sorted."""
        gates = {g for el in self.elements for g in el.word}
        if not include_idle:
            gates = {g for g in gates if g.axis != "I"}
        return tuple(sorted(gates, key=lambda g: (g.axis, g.angle)))

    def to_json_dict(self) -> dict:
        """JSON-ready description: words, classes, Bloch matrices (12 decimals)."""
        return {
            "kind": self.kind,
            "order": self.order,
            "avg_word_length": str(avg_word_length(self)),
            "class_sizes": self.class_sizes(),
            "elements": [
                {
                    "index": el.index,
                    "class": el.rotation_class,
                    "word": [
                        {"axis": g.axis, "angle": g.angle, "duration": g.duration}
                        for g in el.word
                    ],
                    "bloch": np.round(el.bloch, 12).tolist(),
                }
                for el in self.elements
            ],
        }


@functools.lru_cache(maxsize=None)
def build_group(kind: str) -> Group:
    """Build and certify a rotation group from its decomposition table.

    Parameters
    ----------
    kind : str
        "tetrahedral", "octahedral", or "icosahedral".

    Returns
    -------
    Group
        With verified distinctness, closure, and inverse tables.

    Raises
    ------
    GroupConstructionError
        If the table rows are not pairwise-distinct rotations, a class label
        disagrees with its rotation angle, or closure fails.
    """
    if kind not in GROUP_TABLES:
        raise ValueError(f"unknown group kind {kind!r}")
    rows = GROUP_TABLES[kind]
    if len(rows) != _EXPECTED_ORDER[kind]:
        raise GroupConstructionError(
            f"{kind} table has {len(rows)} rows, expected {_EXPECTED_ORDER[kind]}"
        )

    elements: list[GroupElement] = []
    seen: dict[tuple, int] = {}
    for index, (rotation_class, text) in enumerate(rows):
        word = parse_word(text)
        unitary = word_unitary(word)
        bloch = bloch_rotation(unitary)
        key = _bloch_key(bloch)
        if key in seen:
            raise GroupConstructionError(
                f"{kind} rows {seen[key]} and {index} produce the same rotation"
            )
        seen[key] = index
        # compare traces, not angles: acos is ill-conditioned near 0 and pi
        expected_trace = 1.0 + 2.0 * math.cos(_CLASS_ANGLES[rotation_class])
        if abs(np.trace(bloch) - expected_trace) > 1e-9:
            raise GroupConstructionError(
                f"{kind} row {index} ({text!r}) labeled {rotation_class} but has "
                f"rotation angle {rotation_angle(bloch):.6f}"
            )
        unitary.setflags(write=False)
        bloch.setflags(write=False)
        elements.append(GroupElement(index, word, unitary, bloch, rotation_class))

    n = len(elements)
    blochs = np.stack([el.bloch for el in elements])

    def lookup(m: np.ndarray, context: str) -> int:
        index = seen.get(_bloch_key(m))
        if index is None or np.max(np.abs(blochs[index] - m)) > 1e-9:
            raise GroupConstructionError(f"{kind}: {context} falls outside the set")
        return index

    mult = np.empty((n, n), dtype=np.intp)
    for i in range(n):
        products = blochs[i] @ blochs  # (n, 3, 3), j applied first
        for j in range(n):
            mult[i, j] = lookup(products[j], f"product of elements {i} and {j}")

    inv = np.empty(n, dtype=np.intp)
    for i in range(n):
        inv[i] = lookup(blochs[i].T, f"inverse of element {i}")

    identity_index = lookup(np.eye(3), "identity")
    for i in range(n):
        if mult[i, inv[i]] != identity_index:
            raise GroupConstructionError(f"{kind}: inverse table inconsistent at {i}")

    mult.setflags(write=False)
    inv.setflags(write=False)
    return Group(kind, tuple(elements), mult, inv, identity_index, dict(seen))


def avg_word_length(group: Group) -> Fraction:
    """Exact mean number of physical gates per element; idle counts as 1."""
    total = sum(len(el.word) for el in group.elements)
    return Fraction(total, group.order)


def frame_potential(group: Group, t: int) -> float:
    """Frame potential (1/|G|^2) sum |Tr(u^dag v)|^(2t) over all pairs.

    Equals the Catalan number C_t exactly when the group is a unitary
    t-design; exceeds it otherwise. Uses one SU(2) representative per
    rotation, which is enough because |Tr(u^dag v)| is sign-invariant.
    """
    if t < 1:
        raise ValueError("t must be a positive integer")
    us = np.stack([el.unitary for el in group.elements])
    traces = np.einsum("aij,bij->ab", us.conj(), us)
    return float(np.mean(np.abs(traces) ** (2 * t)))


def twirl_channel(group: Group, channel: "channels.Channel") -> "channels.Channel":
    """Average the channel over conjugation by every group element.

    Returns (1/|G|) sum_u U^dag o ch o U. Over a 2-design the result is
    depolarizing-like: Bloch block lambda*I with lambda = trace of the
    input's Bloch block over 3.
    """
    ptm = channel.ptm
    total = np.zeros((4, 4))
    for el in group.elements:
        r = np.eye(4)
        r[1:, 1:] = el.bloch
        rt = np.eye(4)
        rt[1:, 1:] = el.bloch.T
        total += rt @ ptm @ r
    return channels.channel_from_ptm(total / group.order)


def recovery_element(group: Group, sequence: Sequence[int]) -> int:
    """Index of the element inverting the composed (time-ordered) sequence."""
    total = group.identity_index
    for index in sequence:
        total = group.mult_table[index, total]
    return int(group.inv_table[total])


@dataclass(frozen=True)
class OrbitCheckResult:
    passed: bool
    points: np.ndarray
    inner_products: tuple[float, ...]


# Class whose rotation axes trace out the solid, and the inner products the
# resulting point set must exhibit (up to sign and self-pairing).
_ORBIT_CLASS = {
    "tetrahedral": ("face-2pi/3", 8, (-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0)),
    "octahedral": ("order-4", 6, (-1.0, 0.0, 1.0)),
    "icosahedral": (
        "vertex-2pi/5",
        12,
        (-1.0, -1.0 / math.sqrt(5.0), 1.0 / math.sqrt(5.0), 1.0),
    ),
}


def solid_orbit_check(group: Group) -> OrbitCheckResult:
    """Verify the rotation-axis geometry of the group's defining solid.

    Collects the oriented axes of one rotation class (icosahedron vertices,
    octahedron vertices, or tetrahedral body diagonals = cube corners) and
    checks that the point set is closed under every group rotation and shows
    exactly the solid's pairwise inner-product spectrum.
    """
    class_name, expected_count, expected_dots = _ORBIT_CLASS[group.kind]
    points = np.array(
        [
            rotation_axis(el.bloch)
            for el in group.elements
            if el.rotation_class == class_name
        ]
    )
    if len(points) != expected_count:
        return OrbitCheckResult(False, points, ())

    dots = np.round(points @ points.T, 9)
    values = tuple(sorted(set(dots.flatten().tolist())))
    if values != tuple(np.round(expected_dots, 9).tolist()):
        return OrbitCheckResult(False, points, values)

    for el in group.elements:
        rotated = points @ el.bloch.T
        dist = np.abs(rotated[:, None, :] - points[None, :, :]).max(axis=2)
        if np.max(dist.min(axis=1)) > 1e-9:
            return OrbitCheckResult(False, points, values)
    return OrbitCheckResult(True, points, values)
