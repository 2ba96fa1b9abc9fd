"""Spin-level Pauli strings, the spin-to-qubit error map, and frame rules.

A dual-spin qubit stores its computational state in the odd-parity sector
of two spins.  Spin-level Pauli errors map onto qubit-level errors
{I, X, Y, Z} or leakage L; leakage carries a tag naming the even-parity
state (up-up or down-down) when it is known.

Frames are tracked per qubit as (x, z) bits plus a leakage flag.  The
propagation rules treat exchange gates as spin conserving (a leaked pair
is frozen by H and kicks a conditional Z through a CZ), while the driven
CNOT can move leakage between pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Single-spin Pauli codes (x bit, z bit).
SPIN_I, SPIN_X, SPIN_Y, SPIN_Z = 0, 1, 3, 2
_LABEL_TO_CODE = {"I": 0, "X": 1, "Y": 3, "Z": 2}
_CODE_TO_LABEL = {v: k for k, v in _LABEL_TO_CODE.items()}

# Leak tags.
TAG_TP = 0      # up-up
TAG_TM = 1      # down-down
TAG_UNKNOWN = 2


@dataclass(frozen=True)
class STError:
    """Qubit-level image of a spin-pair error: one of I, X, Y, Z or L."""

    kind: str
    tag: int = TAG_UNKNOWN

    def __str__(self):
        if self.kind != "L":
            return self.kind
        return {TAG_TP: "L+", TAG_TM: "L-", TAG_UNKNOWN: "L?"}[self.tag]


def st_from_spins(a, b) -> STError:
    """Map a Pauli pair on the two spins to the qubit-level error.

    II, ZZ -> I;  ZI, IZ -> Z;  XX, YY -> X;  XY, YX -> Y;
    anything flipping exactly one spin -> L.
    """
    ca = _LABEL_TO_CODE[a] if isinstance(a, str) else a
    cb = _LABEL_TO_CODE[b] if isinstance(b, str) else b
    xa, za = ca & 1, (ca >> 1) & 1
    xb, zb = cb & 1, (cb >> 1) & 1
    if xa ^ xb:
        return STError("L")
    if xa:
        return STError("Y" if za ^ zb else "X")
    return STError("Z" if za ^ zb else "I")


def pair_code(a, b) -> int:
    """Pack two spin Paulis into a 4-bit code (xa, za, xb, zb)."""
    ca = _LABEL_TO_CODE[a] if isinstance(a, str) else a
    cb = _LABEL_TO_CODE[b] if isinstance(b, str) else b
    return (ca & 3) | ((cb & 3) << 2)


def pair_code_effect(code: int) -> tuple[int, int, int]:
    """Decode a 4-bit pair code into (leak_toggle, st_x, st_z).

    For the non-leaking codes the qubit-level (x, z) bits follow from the
    conversion table; for leaking codes st bits are unused.
    """
    xa, za = code & 1, (code >> 1) & 1
    xb, zb = (code >> 2) & 1, (code >> 3) & 1
    if xa ^ xb:
        return 1, 0, 0
    return 0, xa, za ^ zb


class PauliString:
    """Bit-packed n-spin Pauli with a phase (power of i)."""

    __slots__ = ("n", "x", "z", "phase")

    def __init__(self, n: int, x: int = 0, z: int = 0, phase: int = 0):
        self.n = n
        self.x = x
        self.z = z
        self.phase = phase & 3

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        x = z = 0
        for i, ch in enumerate(label):
            c = _LABEL_TO_CODE[ch]
            x |= (c & 1) << i
            z |= ((c >> 1) & 1) << i
        return cls(len(label), x, z)

    def to_label(self) -> str:
        return "".join(
            _CODE_TO_LABEL[((self.x >> i) & 1) | (((self.z >> i) & 1) << 1)]
            for i in range(self.n))

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("length mismatch")
        # i^phase bookkeeping: Y = i X Z; count anticommutations Z_a X_b.
        phase = (self.phase + other.phase
                 + 2 * bin(self.z & other.x).count("1")) & 3
        return PauliString(self.n, self.x ^ other.x, self.z ^ other.z, phase)

    def commutes(self, other: "PauliString") -> bool:
        return (bin(self.x & other.z).count("1")
                + bin(self.z & other.x).count("1")) % 2 == 0

    def weight(self) -> int:
        return bin(self.x | self.z).count("1")

    def __eq__(self, other):
        return (self.n, self.x, self.z, self.phase) == (other.n, other.x, other.z, other.phase)

    def __hash__(self):
        return hash((self.n, self.x, self.z, self.phase))

    def __repr__(self):
        return f"PauliString({self.to_label()!r})"


class FrameState:
    """Per-qubit error frame plus leakage flags for one lattice.

    ``logical`` optionally carries definite computational values, letting
    the statevector oracle compare leak tags deterministically; Monte-Carlo
    shots leave it unset and coin-flip instead.
    """

    def __init__(self, n_qubits: int, logical: np.ndarray | None = None):
        self.n = n_qubits
        self.fx = np.zeros(n_qubits, dtype=np.uint8)
        self.fz = np.zeros(n_qubits, dtype=np.uint8)
        self.leaked = np.zeros(n_qubits, dtype=np.uint8)
        self.tag = np.full(n_qubits, TAG_UNKNOWN, dtype=np.uint8)
        self.logical = logical

    def copy(self) -> "FrameState":
        out = FrameState(self.n, self.logical)
        out.fx = self.fx.copy()
        out.fz = self.fz.copy()
        out.leaked = self.leaked.copy()
        out.tag = self.tag.copy()
        return out

    def classify(self, q: int) -> STError:
        if self.leaked[q]:
            return STError("L", int(self.tag[q]))
        return STError("IXZY"[self.fx[q] + 2 * self.fz[q]])

    def dump(self) -> str:
        return " ".join(str(self.classify(q)) for q in range(self.n))

    def value(self, q: int) -> int | None:
        """Current computational value of qubit q if known."""
        if self.logical is None:
            return None
        return int(self.logical[q] ^ self.fx[q])


def _branch_coin(branches, apply):
    """Split every branch in two on a fair coin; ``apply(frame, bit)``."""
    out = []
    for w, fr in branches:
        for bit in (0, 1):
            nf = fr.copy()
            apply(nf, bit)
            out.append((w / 2, nf))
    return out


def propagate_branches(frame: FrameState, gate: tuple) -> list[tuple[float, FrameState]]:
    """All weighted outcomes of pushing a frame through one ideal gate.

    Deterministic rules yield a single branch; rules that depend on an
    unknown computational value split on a fair coin.  Gate tags:
    ("h", q), ("cz", a, b), ("cnot", control, target).
    """
    kind = gate[0]
    branches = [(1.0, frame.copy())]

    if kind == "h":
        q = gate[1]
        for _, fr in branches:
            if not fr.leaked[q]:
                fr.fx[q], fr.fz[q] = fr.fz[q], fr.fx[q]
        return branches

    if kind == "cz":
        a, b = gate[1], gate[2]
        for _, fr in branches:
            la, lb = fr.leaked[a], fr.leaked[b]
            if not la and not lb:
                fr.fz[b] ^= fr.fx[a]
                fr.fz[a] ^= fr.fx[b]
            elif la and not lb:
                fr.fz[b] ^= fr.tag[a] == TAG_TM
            elif lb and not la:
                fr.fz[a] ^= fr.tag[b] == TAG_TM
        return branches

    if kind == "cnot":
        c, t = gate[1], gate[2]
        fr0 = branches[0][1]
        lc, lt = fr0.leaked[c], fr0.leaked[t]
        if not lc and not lt:
            fr0.fx[t] ^= fr0.fx[c]
            fr0.fz[c] ^= fr0.fz[t]
            return branches
        if lc and not lt:
            # Leaked control flips one spin of the target: the target leaks,
            # with a tag set by its (possibly unknown) computational value.
            val = fr0.value(t)

            def leak_target(fr, v):
                fr.leaked[t] = 1
                if fr.tag[c] == TAG_TP:
                    fr.tag[t] = TAG_TP if v == 0 else TAG_TM
                else:
                    fr.tag[t] = TAG_TM if v == 0 else TAG_TP
                fr.fx[t] = fr.fz[t] = 0

            if val is None:
                return _branch_coin(branches, leak_target)
            leak_target(fr0, val)
            return branches
        if lt and not lc:
            # Leaked target randomises the control's phase information.
            return _branch_coin(branches, lambda fr, bit: fr.fz.__setitem__(c, fr.fz[c] ^ bit))
        # Both leaked: the control's definite spins flip one target spin,
        # returning the target to a definite computational state.
        fr0.leaked[t] = 0
        if fr0.tag[c] == TAG_TP:
            new_val = 0 if fr0.tag[t] == TAG_TP else 1
        else:
            new_val = 1 if fr0.tag[t] == TAG_TP else 0
        if fr0.logical is not None:
            fr0.fx[t] = fr0.logical[t] ^ new_val
            fr0.fz[t] = 0
            out = []
            for w, fr in branches:
                for zbit in (0, 1):
                    nf = fr.copy()
                    nf.fz[t] = zbit
                    out.append((w / 2, nf))
            return out
        return _branch_coin(_branch_coin(branches,
                                         lambda fr, bit: fr.fx.__setitem__(t, bit)),
                            lambda fr, bit: fr.fz.__setitem__(t, bit))

    raise ValueError(f"unknown gate tag {kind!r}")


def propagate(frame: FrameState, gate: tuple, rng: np.random.Generator) -> FrameState:
    """Sample one outcome of pushing a frame through an ideal gate."""
    branches = propagate_branches(frame, gate)
    if len(branches) == 1:
        return branches[0][1]
    weights = np.array([w for w, _ in branches])
    idx = rng.choice(len(branches), p=weights / weights.sum())
    return branches[idx][1]


def apply_pair_pauli(frame: FrameState, q: int, code: int,
                     rng: np.random.Generator | None = None,
                     coins: list | None = None) -> None:
    """Compose a sampled 2-spin Pauli onto qubit ``q``'s frame.

    A code with odd X weight toggles the leakage flag: a fresh leak gets a
    coin-flipped tag, an (unlikely) un-leak re-enters in a random frame.
    ``coins`` may supply pre-drawn bits for deterministic replay.
    """
    def coin():
        if coins is not None:
            return coins.pop(0)
        return int(rng.integers(2))

    toggle, st_x, st_z = pair_code_effect(code)
    if toggle:
        if frame.leaked[q]:
            frame.leaked[q] = 0
            frame.fx[q] = coin()
            frame.fz[q] = coin()
            frame.tag[q] = TAG_UNKNOWN
        else:
            frame.leaked[q] = 1
            frame.tag[q] = TAG_TP if coin() == 0 else TAG_TM
    elif not frame.leaked[q]:
        frame.fx[q] ^= st_x
        frame.fz[q] ^= st_z


def commutes_with_stabiliser(frame: FrameState, support: list[int],
                             legs: str) -> int:
    """Outcome flip of an ideal check caused by the frame.

    ``legs`` holds one basis letter per supported qubit.  Leaked qubits are
    skipped; their effect on a measurement is handled by the leakage rules.
    """
    parity = 0
    for q, basis in zip(support, legs):
        if frame.leaked[q]:
            continue
        if basis == "X":
            parity ^= int(frame.fz[q])
        elif basis == "Z":
            parity ^= int(frame.fx[q])
        elif basis == "Y":
            parity ^= int(frame.fx[q] ^ frame.fz[q])
        else:
            raise ValueError(f"bad leg basis {basis!r}")
    return parity
