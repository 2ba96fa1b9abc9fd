"""Rotated surface-code layouts for the three memory experiments.

Data qubits sit on a d x d grid; plaquettes are anchored at (r, c) and
cover the up-to-four qubits {(r,c), (r,c+1), (r+1,c), (r+1,c+1)}.  CSS
plaquettes alternate X/Z on a checkerboard with X checks terminating the
north/south boundaries; the XZZX layout reuses the same geometry with leg
bases fixed by corner position (X on NW/SE, Z on NE/SW).

Slot order within a plaquette is (NW, SW, NE, SE); two plaquettes sharing
a data qubit always use it in different slots, and the alternation of
ancilla spins over slots realises the hook-safe gate ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CORNERS = ((0, 0), (1, 0), (0, 1), (1, 1))     # NW, SW, NE, SE in slot order
CORNER_NAMES = ("NW", "SW", "NE", "SE")
# XZZX leg basis by corner position within the plaquette.
XZZX_LEG = {"NW": "X", "SW": "Z", "NE": "Z", "SE": "X"}


@dataclass(frozen=True)
class Stabiliser:
    index: int
    anchor: tuple
    stype: str                 # "X", "Z" or "XZZX"
    support: tuple             # ((qubit, slot, leg_basis), ...)

    @property
    def qubits(self):
        return tuple(q for q, _, _ in self.support)

    def leg(self, q: int) -> str:
        for qq, _, basis in self.support:
            if qq == q:
                return basis
        raise KeyError(q)


@dataclass
class CodeLayout:
    """Lattice geometry, check supports, schedules and logical operators."""

    family: str                # "css_ld", "css_st" or "xzzx_st"
    distance: int
    stabilisers: list = field(default_factory=list)
    logical_x: dict = field(default_factory=dict)   # qubit -> pauli letter
    logical_z: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.distance % 2 == 0 or self.distance < 3:
            raise ValueError("distance must be odd and >= 3")

    @property
    def n_data(self) -> int:
        return self.distance ** 2

    @property
    def n_rounds(self) -> int:
        return self.distance

    @property
    def encoding(self) -> str:
        return "ld" if self.family == "css_ld" else "st"

    @property
    def d_eff(self) -> float:
        return self.distance if self.encoding == "ld" \
            else self.distance / np.sqrt(2.0)

    def qubit_index(self, r: int, c: int) -> int:
        return r * self.distance + c

    def stabs_on(self, q: int):
        return [s for s in self.stabilisers if q in s.qubits]


def _plaquette_exists(d: int, r: int, c: int) -> bool:
    if 0 <= r <= d - 2 and 0 <= c <= d - 2:
        return True
    if r == -1 and 0 <= c <= d - 2:
        return c % 2 == 1          # north: X type only
    if r == d - 1 and 0 <= c <= d - 2:
        return c % 2 == 0          # south: X type only
    if c == -1 and 0 <= r <= d - 2:
        return r % 2 == 0          # west: Z type only
    if c == d - 1 and 0 <= r <= d - 2:
        return r % 2 == 1          # east: Z type only
    return False


def _css_type(r: int, c: int) -> str:
    return "X" if (r + c) % 2 == 0 else "Z"


def build_layout(family: str, d: int) -> CodeLayout:
    if family not in ("css_ld", "css_st", "xzzx_st"):
        raise ValueError(f"unknown code family {family!r}")
    layout = CodeLayout(family=family, distance=d)
    idx = 0
    for r in range(-1, d):
        for c in range(-1, d):
            if not _plaquette_exists(d, r, c):
                continue
            stype = _css_type(r, c)
            support = []
            for slot, (dr, dc) in enumerate(CORNERS):
                rr, cc = r + dr, c + dc
                if not (0 <= rr < d and 0 <= cc < d):
                    continue
                q = layout.qubit_index(rr, cc)
                if family == "xzzx_st":
                    basis = XZZX_LEG[CORNER_NAMES[slot]]
                else:
                    basis = stype
                support.append((q, slot, basis))
            layout.stabilisers.append(Stabiliser(
                index=idx, anchor=(r, c),
                stype="XZZX" if family == "xzzx_st" else stype,
                support=tuple(support)))
            idx += 1

    if family == "xzzx_st":
        # Conjugated CSS logicals: alternating strings along row 0 / col 0.
        layout.logical_z = {layout.qubit_index(0, c): ("Z" if c % 2 == 0 else "X")
                            for c in range(d)}
        layout.logical_x = {layout.qubit_index(r, 0): ("X" if r % 2 == 0 else "Z")
                            for r in range(d)}
    else:
        layout.logical_z = {layout.qubit_index(0, c): "Z" for c in range(d)}
        layout.logical_x = {layout.qubit_index(r, 0): "X" for r in range(d)}
    return layout


def check_matrices(layout: CodeLayout):
    """Symplectic (x|z) stabiliser and logical matrices for F2 checks."""
    n = layout.n_data
    rows = []
    for s in layout.stabilisers:
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        for q, _, basis in s.support:
            if basis in ("X", "Y"):
                x[q] = 1
            if basis in ("Z", "Y"):
                z[q] = 1
        rows.append(np.concatenate([x, z]))
    stab = np.array(rows, dtype=np.uint8)

    def logical_row(op):
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        for q, basis in op.items():
            if basis in ("X", "Y"):
                x[q] = 1
            if basis in ("Z", "Y"):
                z[q] = 1
        return np.concatenate([x, z])

    return stab, logical_row(layout.logical_x), logical_row(layout.logical_z)


def symplectic_commutes(a: np.ndarray, b: np.ndarray) -> bool:
    n = a.shape[-1] // 2
    return int(a[:n] @ b[n:] + a[n:] @ b[:n]) % 2 == 0


def edge_endpoints(layout: CodeLayout, q: int, error: str):
    """Detector pair flipped by a single-qubit error of the given basis.

    Returns the (up to two) stabiliser indices whose legs anticommute with
    the error; one endpoint means a boundary edge, none means the error is
    undetectable by parity checks (does not occur on these layouts).
    """
    hit = []
    for s in layout.stabilisers:
        for qq, _, basis in s.support:
            if qq != q:
                continue
            if basis != error and "I" not in (basis, error):
                hit.append(s.index)
    return hit
