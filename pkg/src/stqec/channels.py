"""Exact statevector engine, Choi-Jamiolkowski extraction and Pauli twirling.

Spins are indexed big-endian: spin 0 is the leftmost tensor factor of a
state vector of length 2**n.  Gate applications accept either a state
vector or a (2**n, m) matrix of column vectors, so building a circuit's
full unitary is just applying it to the identity.

The measured spin pair of a circuit is read out in the three-outcome basis
{singlet, triplet-0, even parity}; the even branch keeps two Kraus
components (up-up and down-down).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .gates import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z

PAULIS_1Q = np.stack([PAULI_I, PAULI_X, PAULI_Y, PAULI_Z])
PAULI_LETTERS = "IXYZ"

SINGLET = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / math.sqrt(2.0)
TRIPLET0 = np.array([0.0, 1.0, 1.0, 0.0], dtype=complex) / math.sqrt(2.0)
UP_UP = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)
DOWN_DOWN = np.array([0.0, 0.0, 0.0, 1.0], dtype=complex)

OUTCOME_S, OUTCOME_T0, OUTCOME_TPM = "S", "T0", "TPM"


def apply_unitary(state: np.ndarray, u: np.ndarray, targets: tuple[int, ...],
                  n: int) -> np.ndarray:
    """Apply a k-spin unitary to the given spins of an n-spin state.

    ``state`` may be a vector (2**n,) or a batch matrix (2**n, m).
    """
    k = len(targets)
    batch = state.ndim == 2
    m = state.shape[1] if batch else 1
    t = state.reshape((2,) * n + ((m,) if batch else ()))
    src = list(targets)
    t = np.moveaxis(t, src, range(k))
    rest = t.shape[k:]
    t = t.reshape(2 ** k, -1)
    t = u @ t
    t = t.reshape((2,) * k + rest)
    t = np.moveaxis(t, range(k), src)
    return t.reshape(state.shape)


def run_ops(state: np.ndarray, ops, n: int) -> np.ndarray:
    for u, targets in ops:
        state = apply_unitary(state, u, targets, n)
    return state


def circuit_matrix(ops, n: int) -> np.ndarray:
    """Full unitary of a gate list, built by evolving identity columns."""
    return run_ops(np.eye(2 ** n, dtype=complex), ops, n)


def basis_state(n: int, bits: int) -> np.ndarray:
    psi = np.zeros(2 ** n, dtype=complex)
    psi[bits] = 1.0
    return psi


def product_state(factors: list[np.ndarray]) -> np.ndarray:
    psi = factors[0]
    for f in factors[1:]:
        psi = np.kron(psi, f)
    return psi


def choi_extract(ops, n_data: int) -> np.ndarray:
    """Recover a purely unitary circuit's matrix with the Bell-pair method.

    Prepares n Bell pairs, applies the circuit to the first half of each,
    and reshapes the doubled state vector back into a 2**n x 2**n matrix.
    Circuits containing a measurement must use kraus_branches instead.
    """
    if 2 * n_data > 20:
        raise ValueError("doubled register exceeds 20 spins")
    n = 2 * n_data
    # Bell pair between spin i (circuit half) and spin n_data + i.
    psi = np.zeros((2,) * n, dtype=complex)
    for bits in range(2 ** n_data):
        idx = tuple((bits >> (n_data - 1 - i)) & 1 for i in range(n_data))
        psi[idx + idx] = 1.0
    psi = psi.reshape(-1) / math.sqrt(2 ** n_data)
    psi = run_ops(psi, ops, n)
    u = psi.reshape(2 ** n_data, 2 ** n_data) * math.sqrt(2 ** n_data)
    return u


@dataclass
class KrausBranch:
    """One measurement outcome with its Kraus components on the data."""

    outcome: str
    kraus: list[np.ndarray]
    probability: float


def kraus_branches(ops, n: int, measured: tuple[int, int],
                   prepared: dict[tuple[int, int], np.ndarray] | None = None,
                   drop_empty: bool = True) -> list[KrausBranch]:
    """Kraus decomposition of a circuit with one measured spin pair.

    ``prepared`` maps spin pairs to their initial two-spin states (fresh
    singlets and the measured ancilla).  Branch probabilities are quoted
    for a maximally mixed input on the remaining (data) spins, so they sum
    to one by completeness.
    """
    if prepared is None:
        prepared = {measured: SINGLET}
    u = circuit_matrix(ops, n)
    t = u.reshape((2,) * (2 * n))

    # Contract prepared input axes sequentially, tracking axis shifts.
    t_axes_in = {s: n + s for s in range(n)}
    for (a, b), state in prepared.items():
        st = state.reshape(2, 2)
        t = np.tensordot(t, st, axes=([t_axes_in[a], t_axes_in[b]], [0, 1]))
        removed = sorted([t_axes_in[a], t_axes_in[b]])
        del t_axes_in[a], t_axes_in[b]
        for s in list(t_axes_in):
            t_axes_in[s] -= sum(1 for r in removed if t_axes_in[s] > r)

    n_data_in = len(t_axes_in)
    ma, mb = measured
    out_keep = [s for s in range(n) if s not in measured]

    branches = []
    outcome_states = [(OUTCOME_S, [SINGLET]), (OUTCOME_T0, [TRIPLET0]),
                      (OUTCOME_TPM, [UP_UP, DOWN_DOWN])]
    for outcome, comps in outcome_states:
        kraus = []
        prob = 0.0
        for comp in comps:
            cm = comp.conj().reshape(2, 2)
            kt = np.tensordot(t, cm, axes=([ma, mb], [0, 1]))
            # Axes now: remaining outputs (ascending), remaining inputs, then
            # the tensordot-appended axes are scalars already contracted.
            k = kt.reshape(2 ** len(out_keep), 2 ** n_data_in)
            kraus.append(k)
            prob += float(np.einsum("ij,ij->", k.conj(), k).real) / 2 ** n_data_in
        if drop_empty and prob < 1e-14:
            continue
        branches.append(KrausBranch(outcome=outcome, kraus=kraus, probability=prob))
    return branches


def pauli_transform(m: np.ndarray, n: int) -> np.ndarray:
    """Coefficients of an operator in the n-spin Pauli basis.

    Returns gamma with shape (4,)*n where
    ``m = sum_p gamma[p] * P_p`` and gamma[p] = Tr(P_p m) / 2**n.
    """
    sig = PAULIS_1Q.conj()
    t = m.reshape((2,) * (2 * n))
    for k in range(n):
        t = np.tensordot(t, sig, axes=([0, n - k], [1, 2]))
    return t / 2 ** n


def pauli_weights(m: np.ndarray, n: int) -> np.ndarray:
    """Twirled weights |gamma_p|^2 of an operator, flattened to 4**n."""
    g = pauli_transform(m, n)
    return np.abs(g.reshape(-1)) ** 2


def index_to_label(idx: int, n: int) -> str:
    digits = []
    for k in range(n):
        digits.append(PAULI_LETTERS[(idx >> (2 * (n - 1 - k))) & 3])
    return "".join(digits)


def label_to_index(label: str) -> int:
    idx = 0
    for ch in label:
        idx = (idx << 2) | PAULI_LETTERS.index(ch)
    return idx


@dataclass
class ChannelTable:
    """Twirled per-location error table: (Pauli string, outcome) -> prob."""

    n_spins: int
    entries: dict = field(default_factory=dict)   # (pauli_idx, outcome) -> prob
    header: dict = field(default_factory=dict)

    def total(self) -> float:
        return float(sum(self.entries.values()))

    def check_normalised(self, tol: float = 1e-9) -> None:
        if abs(self.total() - 1.0) > tol:
            raise ValueError(f"table mass {self.total()} deviates from 1")

    def probability(self, label: str, outcome: str) -> float:
        return self.entries.get((label_to_index(label), outcome), 0.0)

    def to_json(self) -> str:
        payload = {
            "header": self.header,
            "n_spins": self.n_spins,
            "entries": {
                f"{index_to_label(idx, self.n_spins)}|{outcome}": p
                for (idx, outcome), p in sorted(self.entries.items())
            },
        }
        return json.dumps(payload, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ChannelTable":
        payload = json.loads(text)
        n = payload["n_spins"]
        entries = {}
        for key, p in payload["entries"].items():
            label, outcome = key.split("|")
            entries[(label_to_index(label), outcome)] = p
        return cls(n_spins=n, entries=entries, header=payload.get("header", {}))


def pauli_twirl(branches: list[KrausBranch], k0: np.ndarray,
                threshold: float = 1e-14) -> ChannelTable:
    """Twirl Kraus branches against the ideal action ``k0``.

    Each component K is decomposed as K k0^{-1} = sum_j alpha_j P_j; the
    table weight of (P_j, outcome) accumulates |alpha_j|^2 (components are
    kept unnormalised so completeness makes the table sum to one).
    """
    d = k0.shape[0]
    n = int(round(math.log2(d)))
    if abs(np.linalg.det(k0)) < 1e-12:
        raise ValueError("ideal action k0 is not invertible")
    k0_inv = np.linalg.inv(k0)
    table = ChannelTable(n_spins=n)
    total = 0.0
    for branch in branches:
        for k in branch.kraus:
            w = pauli_weights(k @ k0_inv, n)
            total += float(w.sum())
            keep = np.nonzero(w > threshold)[0]
            for idx in keep:
                key = (int(idx), branch.outcome)
                table.entries[key] = table.entries.get(key, 0.0) + float(w[idx])
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"non-Pauli residual after decomposition: mass {total}")
    # Renormalise away the pruned dust.
    mass = table.total()
    for key in table.entries:
        table.entries[key] /= mass
    return table


def statevector_oracle(ops, n: int, psi0: np.ndarray) -> np.ndarray:
    """Exact evolution of an input state through a gate list."""
    psi = run_ops(psi0.astype(complex), ops, n)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"state norm drifted to {norm}")
    return psi


# Measurement basis per pair: 0 -> |ud>, 1 -> |du>, 2 -> |uu>, 3 -> |dd>.
_PAIR_BASIS = np.stack([
    np.array([0, 1, 0, 0], dtype=complex),
    np.array([0, 0, 1, 0], dtype=complex),
    UP_UP,
    DOWN_DOWN,
])


def pair_distribution(psi: np.ndarray, n: int, pairs: list[tuple[int, int]],
                      hadamard_first: bool = False) -> dict:
    """Joint distribution of per-pair results {0: ud, 1: du, 2: uu, 3: dd}.

    Optionally applies an ideal encoded Hadamard to each pair first, which
    exposes phase-flip frames as value flips.  Returns a dict mapping
    result tuples to probabilities (pruned below 1e-12).
    """
    if hadamard_first:
        from .gates import ideal_gate
        h_enc = ideal_gate("h")
        psi = run_ops(psi, [(h_enc, p) for p in pairs], n)
    t = psi.reshape(-1)
    for a, b in pairs:
        t = apply_unitary(t, _PAIR_BASIS.conj(), (a, b), n)
    probs = np.abs(t) ** 2
    out = {}
    npairs = len(pairs)
    order = [s for ab in pairs for s in ab]
    t2 = np.moveaxis(probs.reshape((2,) * n), order, range(2 * npairs))
    t2 = t2.reshape((4,) * npairs + (-1,)).sum(axis=-1)
    for idx, p in np.ndenumerate(t2):
        if p > 1e-12:
            out[idx] = float(p)
    return out
