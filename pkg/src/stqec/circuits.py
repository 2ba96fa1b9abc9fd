"""Canonical circuits: ST two-qubit gates, the leakage gadget, stabilisers.

Each circuit is an ordered list of physical gate applications on spins.
Pair ``q`` owns spins ``(2q, 2q+1)``; the first spin of a pair is the one
whose orientation defines the computational value (up-down = 0).

Cross-pair CZ legs couple the data pair's first spin to alternating
ancilla spins; the driven CNOT between two pairs is one CNOT plus one
anti-controlled CNOT with distinct control spins, acting in parallel.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from . import gates as G
from . import paulis as P
from . import channels as C


@dataclass(frozen=True)
class GateApp:
    """One physical gate: family/variant, the spins it acts on, a label."""

    family: str
    spins: tuple
    variant: str = ""
    label: str = ""


@dataclass
class Circuit:
    """A gate list plus declared roles of the spin pairs."""

    name: str
    encoding: str                     # "st" or "ld"
    n_spins: int
    gates: list = field(default_factory=list)
    data_in: list = field(default_factory=list)     # pair (or LD spin) indices
    data_out: list = field(default_factory=list)
    measured_qubit: int | None = None
    fresh_qubits: list = field(default_factory=list)
    check: str = ""                   # leg bases over data_in, "" for non-checks
    # Interpreter units: ("h_pair", q) / ("cz", sa, sb) / ("cnot_leg", c, t, anti_first)
    units: list = field(default_factory=list)
    # Map from physical gate index to the unit it belongs to.
    gate_unit: list = field(default_factory=list)

    @property
    def n_pairs(self) -> int:
        return self.n_spins // 2

    def pair(self, q: int) -> tuple[int, int]:
        return (2 * q, 2 * q + 1)

    def compiled(self, durations: list | None = None):
        """Matrix op list; ``durations`` overrides the nominal gate times."""
        ops = []
        for i, g in enumerate(self.gates):
            t = durations[i] if durations is not None else G.nominal_duration(g.family)
            ops.append((G.calibrated_gate(g.family, t, g.variant), g.spins))
        return ops

    def to_json(self) -> str:
        payload = {
            "name": self.name,
            "encoding": self.encoding,
            "n_spins": self.n_spins,
            "check": self.check,
            "data_in": self.data_in,
            "data_out": self.data_out,
            "measured_qubit": self.measured_qubit,
            "fresh_qubits": self.fresh_qubits,
            "gates": [asdict(g) for g in self.gates],
        }
        return json.dumps(payload, indent=1)


def _add_gate(circ: Circuit, family: str, spins: tuple, unit_idx: int,
              variant: str = "", label: str = ""):
    circ.gates.append(GateApp(family=family, spins=spins, variant=variant, label=label))
    circ.gate_unit.append(unit_idx)


def _add_cz_unit(circ: Circuit, data_pair: int, other_spin: int, label: str):
    sa = circ.pair(data_pair)[0]
    circ.units.append(("cz", sa, other_spin))
    _add_gate(circ, "cz", (sa, other_spin), len(circ.units) - 1, label=label)


def _add_h_unit(circ: Circuit, q: int, label: str):
    circ.units.append(("h_pair", q))
    _add_gate(circ, "h", circ.pair(q), len(circ.units) - 1, label=label)


def _add_cnot_unit(circ: Circuit, c_pair: int, t_pair: int, label: str):
    c1, c2 = circ.pair(c_pair)
    t1, t2 = circ.pair(t_pair)
    circ.units.append(("cnot_leg", c_pair, t_pair))
    u = len(circ.units) - 1
    _add_gate(circ, "cnot", (c1, t1), u, label=f"{label}.cnot")
    _add_gate(circ, "cnot", (c2, t2), u, variant="anti", label=f"{label}.acnot")


def build_st_cz() -> Circuit:
    """Encoded CZ between two ST qubits: one CZ between the first spins."""
    circ = Circuit(name="st_cz", encoding="st", n_spins=4,
                   data_in=[0, 1], data_out=[0, 1])
    sa, sb = circ.pair(0)[0], circ.pair(1)[0]
    circ.units.append(("cz", sa, sb))
    _add_gate(circ, "cz", (sa, sb), 0, label="cz")
    return circ


def build_st_cnot() -> Circuit:
    """Encoded CNOT: CNOT plus anti-CNOT with distinct control spins."""
    circ = Circuit(name="st_cnot", encoding="st", n_spins=4,
                   data_in=[0, 1], data_out=[0, 1])
    _add_cnot_unit(circ, 0, 1, "leg")
    return circ


def build_leakage_gadget() -> Circuit:
    """Transfer a data pair onto a fresh singlet and measure the old pair.

    Sequence CZ - (H on each pair) - CZ; outcome S means the input was in
    the computational subspace (the output then carries a deterministic X
    that is cancelled in software), T-pm flags an input leak projected back.
    """
    circ = Circuit(name="leakage_gadget", encoding="st", n_spins=4,
                   data_in=[0], data_out=[1], measured_qubit=0,
                   fresh_qubits=[1])
    old1 = circ.pair(0)[0]
    new1 = circ.pair(1)[0]
    circ.units.append(("cz", old1, new1))
    _add_gate(circ, "cz", (old1, new1), 0, label="cz1")
    _add_h_unit(circ, 0, "h_old")
    _add_h_unit(circ, 1, "h_new")
    circ.units.append(("cz", old1, new1))
    _add_gate(circ, "cz", (old1, new1), len(circ.units) - 1, label="cz2")
    return circ


def build_css_stabiliser(basis: str, slots: tuple = (0, 1, 2, 3)) -> Circuit:
    """Exchange-only CSS check on the given schedule slots plus an ancilla.

    Z check: CZ legs onto alternating ancilla spins (slot parity picks the
    spin).  X check: the same with an encoded Hadamard on each data pair
    before and after its leg.  Boundary checks drop slots but keep the
    four-slot timing; data pair i corresponds to slots[i], the ancilla is
    the last pair.
    """
    if basis not in ("X", "Z"):
        raise ValueError("basis must be X or Z")
    k = len(slots)
    circ = Circuit(name=f"css_{basis.lower()}_stabiliser", encoding="st",
                   n_spins=2 * k + 2, data_in=list(range(k)),
                   data_out=list(range(k)), measured_qubit=k,
                   check=basis * k)
    anc = circ.pair(k)
    for i, slot in enumerate(slots):
        anc_spin = anc[slot % 2]
        if basis == "X":
            _add_h_unit(circ, i, f"h_pre{i}")
        _add_cz_unit(circ, i, anc_spin, f"leg{slot}")
        if basis == "X":
            _add_h_unit(circ, i, f"h_post{i}")
    return circ


def build_xzzx_stabiliser(slots: tuple = (0, 1, 2, 3)) -> Circuit:
    """Bias-preserving XZZX check: CNOT, CZ, CZ, CNOT over the four slots.

    The ancilla is always the control; the two CZ legs couple to distinct
    ancilla spins, and each CNOT leg splits its controls across both.
    Data pair i corresponds to slots[i]; the ancilla is the last pair.
    """
    k = len(slots)
    circ = Circuit(name="xzzx_stabiliser", encoding="st", n_spins=2 * k + 2,
                   data_in=list(range(k)), data_out=list(range(k)),
                   measured_qubit=k,
                   check="".join("XZZX"[s] for s in slots))
    anc = circ.pair(k)
    for i, slot in enumerate(slots):
        if slot in (0, 3):
            _add_cnot_unit(circ, k, i, f"leg{slot}")
        else:
            anc_spin = anc[slot % 2]
            _add_cz_unit(circ, i, anc_spin, f"leg{slot}")
    return circ


def build_ld_stabiliser(basis: str, slots: tuple = (0, 1, 2, 3)) -> Circuit:
    """Single-spin-qubit check from the same hardware primitives: driven
    Hadamards plus exchange CZ legs.

    The ancilla is rotated into the X basis, accumulates CZ phases, and is
    rotated back before a Z-basis readout; X checks sandwich each data leg
    between driven Hadamards on the data spin.
    """
    if basis not in ("X", "Z"):
        raise ValueError("basis must be X or Z")
    k = len(slots)
    circ = Circuit(name=f"ld_{basis.lower()}_stabiliser", encoding="ld",
                   n_spins=k + 1, data_in=list(range(k)),
                   data_out=list(range(k)),
                   measured_qubit=k, check=basis * k)
    anc = k
    _add_gate(circ, "1qld", (anc,), -1, variant="h", label="h_anc_pre")
    for i in range(k):
        if basis == "X":
            _add_gate(circ, "1qld", (i,), -1, variant="h", label=f"h_pre{i}")
        _add_gate(circ, "cz", (i, anc), -1, label=f"leg{slots[i]}")
        if basis == "X":
            _add_gate(circ, "1qld", (i,), -1, variant="h", label=f"h_post{i}")
    _add_gate(circ, "1qld", (anc,), -1, variant="h", label="h_anc_post")
    return circ


LIBRARY = {
    "st_cz": build_st_cz,
    "st_cnot": build_st_cnot,
    "leakage_gadget": build_leakage_gadget,
    "css_x_stabiliser": lambda: build_css_stabiliser("X"),
    "css_z_stabiliser": lambda: build_css_stabiliser("Z"),
    "xzzx_stabiliser": build_xzzx_stabiliser,
}


# ---------------------------------------------------------------------------
# Frame interpreter: ideal-gate propagation of error frames with leakage.
# ---------------------------------------------------------------------------

CLS_Z, CLS_X, CLS_NONE = 0, 1, 2


class OracleState:
    """One interpreter branch: frames plus the symbolic ideal pair states.

    ``cls``/``val`` follow each pair's ideal state through the circuit as a
    computational value ('z'), an X-basis value ('x', with 1 = singlet) or
    unknown; leak tags are then deterministic wherever the value is known.

    A pair leaked out of an X-basis state keeps a coherent (uu +/- dd)
    superposition (``xcoh`` mode with a sign bit) until a spin-conserving
    interaction decoheres it; leaks out of definite values carry a tag.
    """

    def __init__(self, n_pairs: int):
        self.frame = P.FrameState(n_pairs)
        self.cls = np.zeros(n_pairs, dtype=np.int8)
        self.val = np.zeros(n_pairs, dtype=np.int8)
        self.xcoh = np.zeros(n_pairs, dtype=np.int8)   # coherent-leak flag
        self.lsign = np.zeros(n_pairs, dtype=np.int8)  # its relative sign
        self.outcome: str | None = None

    def copy(self) -> "OracleState":
        out = OracleState.__new__(OracleState)
        out.frame = self.frame.copy()
        out.cls = self.cls.copy()
        out.val = self.val.copy()
        out.xcoh = self.xcoh.copy()
        out.lsign = self.lsign.copy()
        out.outcome = self.outcome
        return out


def _split(branches, options):
    """Replace each branch by weighted variants.

    ``options(state)`` returns a list of (weight, mutate) pairs; each
    mutate receives a fresh copy of the branch state.
    """
    out = []
    for w, st in branches:
        for wo, mutate in options(st):
            ns = st.copy()
            mutate(ns)
            out.append((w * wo, ns))
    return out


def _leak_options(st: OracleState, q: int, flipped_first_spin: bool,
                  z_extra: int = 0):
    """Options for leaking an unleaked pair via a single spin flip."""
    def mk_tag(tag):
        def mutate(s):
            s.frame.leaked[q] = 1
            s.frame.tag[q] = tag
            s.xcoh[q] = 0
        return mutate
    if st.cls[q] == CLS_Z:
        v = st.val[q] ^ st.frame.fx[q]
        if flipped_first_spin:
            tag = P.TAG_TM if v == 0 else P.TAG_TP
        else:
            tag = P.TAG_TP if v == 0 else P.TAG_TM
        return [(1.0, mk_tag(tag))]
    if st.cls[q] == CLS_X:
        sign = st.val[q] ^ st.frame.fz[q] ^ z_extra
        def mutate(s, sign=sign):
            s.frame.leaked[q] = 1
            s.frame.tag[q] = P.TAG_UNKNOWN
            s.xcoh[q] = 1
            s.lsign[q] = sign
        return [(1.0, mutate)]
    return [(0.5, mk_tag(P.TAG_TP)), (0.5, mk_tag(P.TAG_TM))]


def _unleak_options(st: OracleState, q: int, flipped_first_spin: bool,
                    z_extra: int = 0):
    """Options for a spin flip returning a leaked pair to the code space."""
    if st.xcoh[q]:
        w = st.lsign[q] ^ z_extra
        def mutate(s, w=w):
            s.frame.leaked[q] = 0
            s.xcoh[q] = 0
            s.cls[q] = CLS_X
            s.val[q] = w
            s.frame.fx[q] = 0
            s.frame.fz[q] = 0
            s.frame.tag[q] = P.TAG_UNKNOWN
        return [(1.0, mutate)]
    tag = st.frame.tag[q]
    if flipped_first_spin:
        v = 0 if tag == P.TAG_TM else 1
    else:
        v = 0 if tag == P.TAG_TP else 1
    def mk(zbit):
        def mutate(s):
            s.frame.leaked[q] = 0
            s.frame.tag[q] = P.TAG_UNKNOWN
            s.xcoh[q] = 0
            s.cls[q] = CLS_Z
            s.val[q] = v
            s.frame.fx[q] = 0
            s.frame.fz[q] = zbit
        return mutate
    return [(0.5, mk(0)), (0.5, mk(1))]


def _decohere_options(st: OracleState, q: int):
    """Collapse a coherent leak into definite-tag branches."""
    def mk(tag):
        def mutate(s):
            s.xcoh[q] = 0
            s.frame.tag[q] = tag
        return mutate
    return [(0.5, mk(P.TAG_TP)), (0.5, mk(P.TAG_TM))]


def apply_spin_fault(branches, circ: Circuit, spin_paulis: dict):
    """Compose single-spin Paulis (spin index -> 'X'/'Y'/'Z') into frames."""
    codes = {}
    for spin, pl in spin_paulis.items():
        q, slot = divmod(spin, 2)
        a, b = codes.get(q, ("I", "I"))
        codes[q] = (pl, b) if slot == 0 else (a, pl)
    out = branches
    for q, (pa, pb) in codes.items():
        code = P.pair_code(pa, pb)
        toggle, st_x, st_z = P.pair_code_effect(code)
        z_extra = ((code >> 1) & 1) ^ ((code >> 3) & 1)
        if toggle:
            first = (P._LABEL_TO_CODE[pa] & 1) == 1
            def options(st, q=q, first=first, z_extra=z_extra):
                if st.frame.leaked[q]:
                    return _unleak_options(st, q, first, z_extra)
                return _leak_options(st, q, first, z_extra)
            out = _split(out, options)
        else:
            def options(st, q=q, sx=st_x, sz=st_z):
                def mutate(s):
                    if not s.frame.leaked[q]:
                        s.frame.fx[q] ^= sx
                        s.frame.fz[q] ^= sz
                    elif s.xcoh[q]:
                        # A Z component flips the coherent leak's sign.
                        s.lsign[q] ^= sz
                    elif sx:
                        # A double spin flip swaps the leaked state's tag.
                        s.frame.tag[q] ^= 1
                return [(1.0, mutate)]
            out = _split(out, options)
    return out


def _degrade(st: OracleState, q: int):
    if st.cls[q] == CLS_X:
        st.cls[q] = CLS_NONE


def _unit_apply(branches, circ: Circuit, unit):
    kind = unit[0]
    if kind == "h_pair":
        q = unit[1]
        def options(st, q=q):
            def mutate(s):
                f = s.frame
                if not f.leaked[q]:
                    f.fx[q], f.fz[q] = f.fz[q], f.fx[q]
                    if s.cls[q] != CLS_NONE:
                        s.cls[q] ^= 1
            return [(1.0, mutate)]
        return _split(branches, options)

    if kind == "cz":
        sa, sb = unit[1], unit[2]
        qa, fa = divmod(sa, 2)
        qb, fb = divmod(sb, 2)
        # A coherent leak meeting a partner with definite computational
        # value only picks up a sign on its (uu +/- dd) coherence; any
        # other partner measures the coherence and decoheres it.
        for q, other, fo in ((qa, qb, fb), (qb, qa, fa)):
            def options(st, q=q, other=other, fo=fo):
                if not (st.frame.leaked[q] and st.xcoh[q]):
                    return [(1.0, lambda s: None)]
                if not st.frame.leaked[other] and st.cls[other] == CLS_Z:
                    bit = (st.val[other] ^ st.frame.fx[other]) ^ fo
                    def mutate(s, bit=bit):
                        s.lsign[q] ^= bit
                    return [(1.0, mutate)]
                return _decohere_options(st, q)
            branches = _split(branches, options)
        def options(st, qa=qa, qb=qb, fa=fa, fb=fb):
            def mutate(s):
                f = s.frame
                la, lb = f.leaked[qa], f.leaked[qb]
                if not la and not lb:
                    f.fz[qb] ^= f.fx[qa]
                    f.fz[qa] ^= f.fx[qb]
                    ca, cb = s.cls[qa], s.cls[qb]
                    # Ideal-state bookkeeping: a definite value kicks the
                    # partner's X-basis value through the coupled spin.
                    if ca == CLS_Z and cb == CLS_X:
                        s.val[qb] ^= s.val[qa] ^ fa
                    elif cb == CLS_Z and ca == CLS_X:
                        s.val[qa] ^= s.val[qb] ^ fb
                    elif ca == CLS_Z and cb == CLS_Z:
                        pass
                    else:
                        _degrade(s, qa)
                        _degrade(s, qb)
                elif la and not lb:
                    f.fz[qb] ^= f.tag[qa] == P.TAG_TM
                elif lb and not la:
                    f.fz[qa] ^= f.tag[qb] == P.TAG_TM
            return [(1.0, mutate)]
        return _split(branches, options)

    if kind == "cnot_leg":
        c, t = unit[1], unit[2]
        # A coherent-leaked control picks which half fires per component:
        # it decoheres.  A coherent-leaked target is an X (x) X eigenstate
        # and survives; its sign kicks the control's phase deterministically.
        branches = _split(branches, lambda st: (
            _decohere_options(st, c) if st.frame.leaked[c] and st.xcoh[c]
            else [(1.0, lambda s: None)]))
        out = []
        for w, st in branches:
            f = st.frame
            lc, lt = f.leaked[c], f.leaked[t]
            if not lc and not lt:
                ns = st.copy()
                nf = ns.frame
                nf.fx[t] ^= nf.fx[c]
                nf.fz[c] ^= nf.fz[t]
                cc, ct = ns.cls[c], ns.cls[t]
                if cc == CLS_Z and ct == CLS_Z:
                    ns.val[t] ^= ns.val[c]
                elif cc == CLS_X and ct == CLS_X:
                    ns.val[c] ^= ns.val[t]
                elif cc == CLS_Z and ct == CLS_X:
                    pass
                else:
                    ns.cls[c] = CLS_NONE
                    ns.cls[t] = CLS_NONE
                out.append((w, ns))
            elif lc and not lt:
                # The control tag decides which half fires: T+ triggers the
                # anti-controlled CNOT (second target spin), T- the plain one.
                first = f.tag[c] == P.TAG_TM
                for wo, mutate in _leak_options(st, t, first):
                    ns = st.copy()
                    mutate(ns)
                    out.append((w * wo, ns))
            elif lt and not lc:
                if st.xcoh[t]:
                    ns = st.copy()
                    # (uu - dd) leaks carry X(x)X eigenvalue -1: Z kick on
                    # the control; (uu + dd) leaks pass through unchanged.
                    ns.frame.fz[c] ^= ns.lsign[t]
                    out.append((w, ns))
                elif st.cls[c] == CLS_Z:
                    # Definite control value: both target spins flip iff the
                    # actual control value is one, swapping the leak tag.
                    ns = st.copy()
                    if ns.val[c] ^ ns.frame.fx[c]:
                        ns.frame.tag[t] ^= 1
                    out.append((w, ns))
                else:
                    # Superposed control entangles with the definite leak;
                    # the mixture of collapsed control values, each with its
                    # correlated tag flip, reproduces every pair-local
                    # measurement statistic of the coherent state.
                    for b in (0, 1):
                        ns = st.copy()
                        ns.cls[c] = CLS_Z
                        ns.val[c] = b
                        ns.frame.fx[c] = 0
                        ns.frame.fz[c] = 0
                        if b:
                            ns.frame.tag[t] ^= 1
                        out.append((w / 2, ns))
            else:
                first = f.tag[c] == P.TAG_TM
                for wo, mutate in _unleak_options(st, t, first):
                    ns = st.copy()
                    mutate(ns)
                    out.append((w * wo, ns))
        return out

    raise ValueError(f"unknown unit {unit!r}")


def simulate_frames(circ: Circuit, input_cls: dict, input_fault: dict | None = None,
                    gate_fault: tuple | None = None,
                    leaked_inputs: dict | None = None):
    """Run the frame rules through a circuit, returning weighted branches.

    ``input_cls`` maps data pairs to ('z', v) or ('x', w) ideal states.
    ``input_fault`` maps spins to Pauli letters applied at the input;
    ``gate_fault`` is (gate_index, {spin: letter}) applied after that
    physical gate; ``leaked_inputs`` maps pairs to 'T+'/'T-' prepared leaks.
    """
    if circ.encoding != "st":
        raise ValueError("frame interpreter covers ST circuits")
    n_pairs = circ.n_pairs
    st = OracleState(n_pairs)
    for q in range(n_pairs):
        st.cls[q] = CLS_X
        st.val[q] = 1          # fresh pairs and the ancilla start as singlets
    for q, spec in input_cls.items():
        st.cls[q] = {"z": CLS_Z, "x": CLS_X, "n": CLS_NONE}[spec[0]]
        st.val[q] = spec[1]
    for q, tag in (leaked_inputs or {}).items():
        st.frame.leaked[q] = 1
        st.frame.tag[q] = P.TAG_TP if tag == "T+" else P.TAG_TM
    branches = [(1.0, st)]
    if input_fault:
        branches = apply_spin_fault(branches, circ, input_fault)

    fault_gate, fault_paulis = (gate_fault if gate_fault else (-1, None))
    done_units = set()
    for gi, unit_idx in enumerate(circ.gate_unit):
        if unit_idx not in done_units:
            done_units.add(unit_idx)
            branches = _unit_apply(branches, circ, circ.units[unit_idx])
        if gi == fault_gate:
            branches = apply_spin_fault(branches, circ, fault_paulis)

    # Measurement of the designated pair.
    if circ.measured_qubit is not None:
        m = circ.measured_qubit
        out = []
        for w, st in branches:
            f = st.frame
            if f.leaked[m]:
                st.outcome = "TPM"
                out.append((w, st))
            elif st.cls[m] == CLS_X:
                eff = st.val[m] ^ f.fz[m]
                st.outcome = "S" if eff == 1 else "T0"
                out.append((w, st))
            else:
                # No X-basis information: the readout is a fair coin.
                for oc in ("S", "T0"):
                    ns = st.copy()
                    ns.outcome = oc
                    out.append((w / 2, ns))
        branches = out
    return branches


# ---------------------------------------------------------------------------
# Oracle comparison: frame-rule predictions vs exact statevector statistics.
# ---------------------------------------------------------------------------

def frame_distribution(branches, circ: Circuit, protocol: str) -> dict:
    """Joint (outcome, per-pair result) distribution predicted by frames.

    Results use the convention of channels.pair_distribution: 0/1 are
    computational values, 2/3 the up-up/down-down leaked states.  Protocol
    "a" measures pairs directly, "b" after an ideal encoded Hadamard.
    """
    dist: dict = {}
    for w, st in branches:
        partial = [((), w)]
        for q in circ.data_out:
            new = []
            f = st.frame
            for prefix, pw in partial:
                if f.leaked[q]:
                    if st.xcoh[q]:
                        new.append((prefix + (2,), pw / 2))
                        new.append((prefix + (3,), pw / 2))
                    else:
                        res = 2 if f.tag[q] == P.TAG_TP else 3
                        new.append((prefix + (res,), pw))
                    continue
                if protocol == "a":
                    known = st.cls[q] == CLS_Z
                    base = st.val[q] ^ f.fx[q]
                elif protocol == "b":
                    known = st.cls[q] == CLS_X
                    base = st.val[q] ^ f.fz[q]
                else:
                    raise ValueError(protocol)
                if known:
                    new.append((prefix + (int(base),), pw))
                else:
                    new.append((prefix + (0,), pw / 2))
                    new.append((prefix + (1,), pw / 2))
            partial = new
        for prefix, pw in partial:
            key = (st.outcome, prefix)
            dist[key] = dist.get(key, 0.0) + pw
    return dist


_PAIR_INPUTS = {
    ("z", 0): C.basis_state(2, 0b01),
    ("z", 1): C.basis_state(2, 0b10),
    ("x", 0): C.TRIPLET0,
    ("x", 1): C.SINGLET,
    "T+": C.UP_UP,
    "T-": C.DOWN_DOWN,
}

_PAULI_MATS = {"I": G.PAULI_I, "X": G.PAULI_X, "Y": G.PAULI_Y, "Z": G.PAULI_Z}


def statevector_distribution(circ: Circuit, input_cls: dict,
                             input_fault: dict | None = None,
                             gate_fault: tuple | None = None,
                             leaked_inputs: dict | None = None,
                             protocol: str = "a") -> dict:
    """Exact joint (outcome, per-pair result) distribution of the circuit."""
    n = circ.n_spins
    factors = []
    for q in range(circ.n_pairs):
        if leaked_inputs and q in leaked_inputs:
            factors.append(_PAIR_INPUTS[leaked_inputs[q]])
        elif q in input_cls:
            factors.append(_PAIR_INPUTS[tuple(input_cls[q])])
        else:
            factors.append(C.SINGLET)
    psi = C.product_state(factors)
    ops = []
    if input_fault:
        for spin, pl in input_fault.items():
            ops.append((_PAULI_MATS[pl], (spin,)))
    fault_gate, fault_paulis = (gate_fault if gate_fault else (-1, None))
    for gi, op in enumerate(circ.compiled()):
        ops.append(op)
        if gi == fault_gate:
            for spin, pl in fault_paulis.items():
                ops.append((_PAULI_MATS[pl], (spin,)))
    psi = C.run_ops(psi, ops, n)

    dist: dict = {}
    out_pairs = [circ.pair(q) for q in circ.data_out]
    if circ.measured_qubit is None:
        sub = C.pair_distribution(psi, n, out_pairs, hadamard_first=(protocol == "b"))
        for res, p in sub.items():
            dist[(None, res)] = p
        return dist
    ma, mb = circ.pair(circ.measured_qubit)
    outcome_projs = [("S", [C.SINGLET]), ("T0", [C.TRIPLET0]),
                     ("TPM", [C.UP_UP, C.DOWN_DOWN])]
    t = psi.reshape(-1)
    for outcome, comps in outcome_projs:
        for comp in comps:
            # Project the measured pair onto the outcome component.
            proj = np.outer(comp, comp.conj())
            branch = C.apply_unitary(t, proj, (ma, mb), n)
            pb = float(np.vdot(branch, branch).real)
            if pb < 1e-14:
                continue
            branch = branch / np.sqrt(pb)
            sub = C.pair_distribution(branch, n, out_pairs,
                                      hadamard_first=(protocol == "b"))
            for res, p in sub.items():
                key = (outcome, res)
                dist[key] = dist.get(key, 0.0) + pb * p
    return dist


def distributions_match(d1: dict, d2: dict, tol: float = 1e-9) -> bool:
    keys = set(d1) | set(d2)
    return all(abs(d1.get(k, 0.0) - d2.get(k, 0.0)) <= tol for k in keys)


def oracle_input_sets(circ: Circuit) -> list[dict]:
    """Input bases keeping the ideal evolution in product form.

    Each data pair is prepared in an eigenstate of its leg basis, plus an
    all-values variant flipping every computational value, so both frame
    components are observable across the set.
    """
    sets = []
    if circ.name == "st_cz":
        sets = [{0: ("z", 0), 1: ("x", 0)}, {0: ("z", 1), 1: ("x", 1)},
                {0: ("x", 0), 1: ("z", 1)}, {0: ("z", 0), 1: ("z", 1)}]
    elif circ.name == "st_cnot":
        sets = [{0: ("z", 0), 1: ("z", 1)}, {0: ("z", 1), 1: ("z", 0)},
                {0: ("x", 1), 1: ("x", 0)}, {0: ("z", 0), 1: ("x", 1)}]
    elif circ.name == "leakage_gadget":
        # X-basis inputs entangle the two pairs mid-circuit; computational
        # inputs keep the ideal evolution in product form and still expose
        # every frame component somewhere along the circuit.
        sets = [{0: ("z", 0)}, {0: ("z", 1)}]
    else:
        cls = {"X": "x", "Z": "z"}
        for bits in (0, 1):
            spec = {}
            for q, leg in zip(circ.data_in, circ.check):
                spec[q] = (cls[leg], bits)
            sets.append(spec)
    return sets


# ---------------------------------------------------------------------------
# Hook-error enumeration.
# ---------------------------------------------------------------------------

_FAULT_PAULIS_1 = ["X", "Y", "Z"]


def fault_points(circ: Circuit, physical_only: bool = False):
    """(gate_index, {spin: letter}) for 1- and 2-spin Pauli faults.

    With ``physical_only`` the enumeration is restricted to the fault
    classes the gate's noise can actually produce: exchange residuals are
    spin conserving (Z-type or double flips), and the driven CNOT never
    flips its control spin.
    """
    points = []
    for gi, g in enumerate(circ.gates):
        spins = g.spins
        if not physical_only or g.family == "1qld":
            for s in spins:
                for p in _FAULT_PAULIS_1:
                    points.append((gi, {s: p}))
            if len(spins) == 2:
                for pa in _FAULT_PAULIS_1:
                    for pb in _FAULT_PAULIS_1:
                        points.append((gi, {spins[0]: pa, spins[1]: pb}))
            continue
        if g.family in ("h", "cz"):
            for s in spins:
                points.append((gi, {s: "Z"}))
            for pa in ("X", "Y", "Z"):
                for pb in ("X", "Y", "Z"):
                    if (pa in "XY") != (pb in "XY"):
                        continue          # parity-violating: unphysical
                    points.append((gi, {spins[0]: pa, spins[1]: pb}))
        elif g.family == "cnot":
            control, target = spins
            points.append((gi, {control: "Z"}))
            for p in _FAULT_PAULIS_1:
                points.append((gi, {target: p}))
                points.append((gi, {control: "Z", target: p}))
        else:
            raise ValueError(f"unknown family {g.family}")
    return points


_KIND_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_KIND = {v: k for k, v in _KIND_BITS.items()}


def _reduce_pattern(pat: dict, circ: Circuit) -> dict:
    """Minimal representative of a pattern modulo the measured check.

    The readout projects the check operator, so error patterns differing
    by it are indistinguishable; the smaller representative defines the
    harm of a fault.  Leaked legs are untouched (a check leg only moves a
    leaked pair between even states).
    """
    if not circ.check:
        return pat
    alt = dict(pat)
    for q, leg in zip(circ.data_out, circ.check):
        cur = alt.get(q, "I")
        if cur.startswith("L"):
            continue
        x, z = _KIND_BITS[cur]
        lx, lz = _KIND_BITS[leg]
        new = _BITS_KIND[(x ^ lx, z ^ lz)]
        if new == "I":
            alt.pop(q, None)
        else:
            alt[q] = new
    def count(p):
        return sum(1 for v in p.values() if not v.startswith("L"))
    return alt if count(alt) < count(pat) else pat


def propagate_operator(circ: Circuit, start_gate: int, spin_paulis: dict):
    """Heisenberg-propagate a spin Pauli fault through the remaining gates.

    CZ and CNOT legs conjugate exactly; the encoded Hadamard maps each
    pair's restricted Pauli to a canonical spin representative (X <-> Z on
    the computational subspace) and freezes leak-class operators, mirroring
    the identity action on even-parity states.  Returns (x, z) bit masks.
    """
    x = z = 0
    for spin, pl in spin_paulis.items():
        c = P._LABEL_TO_CODE[pl]
        x |= (c & 1) << spin
        z |= ((c >> 1) & 1) << spin
    seen_units = set(circ.gate_unit[:start_gate + 1])
    for gi in range(start_gate + 1, len(circ.gates)):
        ui = circ.gate_unit[gi]
        if ui in seen_units:
            continue
        seen_units.add(ui)
        unit = circ.units[ui]
        if unit[0] == "cz":
            sa, sb = unit[1], unit[2]
            if (x >> sa) & 1:
                z ^= 1 << sb
            if (x >> sb) & 1:
                z ^= 1 << sa
        elif unit[0] == "cnot_leg":
            c_pair, t_pair = unit[1], unit[2]
            for cs, ts in zip(circ.pair(c_pair), circ.pair(t_pair)):
                if (x >> cs) & 1:
                    x ^= 1 << ts
                if (z >> ts) & 1:
                    z ^= 1 << cs
        elif unit[0] == "h_pair":
            a, b = circ.pair(unit[1])
            xa, xb = (x >> a) & 1, (x >> b) & 1
            za, zb = (z >> a) & 1, (z >> b) & 1
            if xa ^ xb:
                continue          # leak class: even states are left alone
            st_x, st_z = xa, za ^ zb
            st_x, st_z = st_z, st_x
            # Canonical representatives: X -> XX, Y -> XY, Z -> ZI.
            x &= ~((1 << a) | (1 << b))
            z &= ~((1 << a) | (1 << b))
            if st_x:
                x |= (1 << a) | (1 << b)
                if st_z:
                    z |= 1 << b
            elif st_z:
                z |= 1 << a
    return x, z


def enumerate_hook_errors(circ: Circuit) -> list[dict]:
    """Propagate every single fault and classify the final data pattern.

    Faults propagate at the operator level, and patterns are reduced
    modulo the measured check operator (indistinguishable after readout).
    A fault is distance reducing when its reduced pattern leaves two or
    more data qubits carrying an undetected computational Pauli; leaked
    qubits are detectable and do not count.  The measured pair's operator
    fixes the outcome deviation, so bias checks can correlate residual X
    errors with triplet-0 detections.
    """
    report = []
    for gi, paulis in fault_points(circ, physical_only=True):
        x, z = propagate_operator(circ, gi, paulis)
        pat = {}
        for q in circ.data_out:
            a, b = circ.pair(q)
            code = ((x >> a) & 1) | (((z >> a) & 1) << 1) \
                | (((x >> b) & 1) << 2) | (((z >> b) & 1) << 3)
            toggle, st_x, st_z = P.pair_code_effect(code)
            if toggle:
                pat[q] = "L"
            elif st_x or st_z:
                pat[q] = _BITS_KIND[(st_x, st_z)]
        outcome = None
        if circ.measured_qubit is not None:
            a, b = circ.pair(circ.measured_qubit)
            xa, xb = (x >> a) & 1, (x >> b) & 1
            za, zb = (z >> a) & 1, (z >> b) & 1
            if xa ^ xb:
                outcome = "TPM"
            elif za ^ zb:
                outcome = "T0"
            else:
                outcome = "S"
        reduced = _reduce_pattern(pat, circ)
        undetected = sum(1 for v in reduced.values() if not v.startswith("L"))
        report.append({
            "gate": gi,
            "label": circ.gates[gi].label,
            "fault": {s: p for s, p in paulis.items()},
            "branches": [{
                "weight": 1.0,
                "pattern": pat,
                "reduced": reduced,
                "outcome": outcome,
                "undetected_paulis": undetected,
                "distance_reducing": undetected >= 2,
            }],
        })
    return report

