"""Twirled per-location error tables compiled for the Monte-Carlo kernel.

A location's noisy circuit U is reduced to its noise unitary N = U Uideal'
(the ideal gates inverted at their nominal durations), which is decomposed
in the spin Pauli basis and twirled: each surviving Pauli string becomes a
table entry with weight |coefficient|^2.  The string's action splits into
a data part (4-bit pair codes, packed per leg) and a measured-pair class:
none, readout flip, or leak.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import channels as C
from . import gates as G
from .circuits import Circuit

# Map transform digit (I,X,Y,Z) to the 2-bit spin code (x | z<<1).
_DIGIT_TO_CODE = np.array([0, 1, 3, 2], dtype=np.int64)
_DIGIT_X = np.array([0, 1, 1, 0], dtype=np.int64)
_DIGIT_Z = np.array([0, 0, 1, 1], dtype=np.int64)

ANC_NONE, ANC_FLIP, ANC_LEAK = 0, 1, 2


@dataclass
class ShotTable:
    """Sampling-ready table: cumulative weights, leg codes, outcome class."""

    cum: np.ndarray        # float64, ascending cumulative probabilities
    legs: np.ndarray       # uint32, 4 bits per data qubit in support order
    anc: np.ndarray        # int8
    header: dict

    def sample(self, u: float) -> int:
        return int(np.searchsorted(self.cum, u, side="right"))


def noise_unitary(circ: Circuit, durations: list[float]) -> np.ndarray:
    """N = U_noisy U_ideal^dagger on the circuit's spins."""
    n = circ.n_spins
    u = C.circuit_matrix(circ.compiled(durations), n)
    m = np.ascontiguousarray(u.T)
    for g, spins in circ.compiled():
        m = C.apply_unitary(m, g.conj(), spins, n)
    return np.ascontiguousarray(m.T)


def draw_durations(circ: Circuit, rng: np.random.Generator,
                   sigma_t: dict) -> list[float]:
    out = []
    for g in circ.gates:
        t0 = G.nominal_duration(g.family)
        s = sigma_t.get(g.family, 0.0)
        out.append(t0 if s == 0.0 else rng.normal(t0, s))
    return out


def compile_table(circ: Circuit, durations: list[float],
                  mass_keep: float = 1.0 - 1e-11,
                  header: dict | None = None) -> ShotTable:
    """Twirl one location's noisy circuit into a sampling table."""
    n = circ.n_spins
    nmat = noise_unitary(circ, durations)
    weights = C.pauli_weights(nmat, n)
    idx = np.nonzero(weights > 1e-15)[0]
    w = weights[idx]
    order = np.argsort(w)[::-1]
    idx, w = idx[order], w[order]
    csum = np.cumsum(w)
    keep = int(np.searchsorted(csum, mass_keep * csum[-1])) + 1
    idx, w = idx[:keep], w[:keep]
    w = w / w.sum()

    # Per-spin Pauli digits, site 0 most significant.
    digits = np.empty((len(idx), n), dtype=np.int64)
    for s in range(n):
        digits[:, s] = (idx >> (2 * (n - 1 - s))) & 3

    if circ.encoding == "st":
        legs = np.zeros(len(idx), dtype=np.uint32)
        for i, q in enumerate(circ.data_out):
            a, b = circ.pair(q)
            code = _DIGIT_TO_CODE[digits[:, a]] | (_DIGIT_TO_CODE[digits[:, b]] << 2)
            legs |= (code << (4 * i)).astype(np.uint32)
        ma, mb = circ.pair(circ.measured_qubit)
        xa, za = _DIGIT_X[digits[:, ma]], _DIGIT_Z[digits[:, ma]]
        xb, zb = _DIGIT_X[digits[:, mb]], _DIGIT_Z[digits[:, mb]]
        leak = xa ^ xb
        flip = za ^ zb
        anc = np.where(leak == 1, ANC_LEAK, flip).astype(np.int8)
    else:
        legs = np.zeros(len(idx), dtype=np.uint32)
        for i, q in enumerate(circ.data_out):
            code = _DIGIT_TO_CODE[digits[:, q]]
            legs |= (code << (4 * i)).astype(np.uint32)
        anc = _DIGIT_X[digits[:, circ.measured_qubit]].astype(np.int8)

    return ShotTable(cum=np.cumsum(w), legs=legs, anc=anc,
                     header=header or {})


def table_to_channel(table: ShotTable, n_spins: int) -> "C.ChannelTable":
    """Expand a compiled table back into a labelled ChannelTable."""
    out = C.ChannelTable(n_spins=n_spins, header=table.header)
    prev = 0.0
    outcome_name = {ANC_NONE: "S", ANC_FLIP: "T0", ANC_LEAK: "TPM"}
    for k in range(len(table.cum)):
        p = float(table.cum[k] - prev)
        prev = float(table.cum[k])
        legs = int(table.legs[k])
        pauli_idx = 0
        for i in range(n_spins // 2):
            code = (legs >> (4 * i)) & 0xF
            ca, cb = code & 3, (code >> 2) & 3
            back = {0: 0, 1: 1, 3: 2, 2: 3}
            pauli_idx = pauli_idx
            pauli_idx |= back[ca] << (2 * (n_spins - 1 - 2 * i))
            pauli_idx |= back[cb] << (2 * (n_spins - 1 - (2 * i + 1)))
        key = (pauli_idx, outcome_name[int(table.anc[k])])
        out.entries[key] = out.entries.get(key, 0.0) + p
    return out
