"""Memory-mode Monte-Carlo engine: rounds, syndromes, decoding, failures.

One experiment freezes a layout, per-location twirled tables and noise
settings.  Each shot runs d noisy rounds (checks, then leakage gadgets,
then shuttling dephasing), a perfect final round, and is decoded with the
leakage-aware matching graphs.

All per-shot randomness comes from one splitmix64 stream seeded by
(campaign seed, point id, shot index), so results are bit-identical
regardless of worker scheduling and of which kernel implementation runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import circuits as CC
from . import decoder as D
from . import tables as T
from .gates import NoiseConfig
from .lattice import CodeLayout, build_layout

MASK64 = (1 << 64) - 1


class SplitMix:
    """splitmix64 stream; mirrored exactly by the compiled kernel."""

    def __init__(self, state: int):
        self.state = state & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def coin(self) -> int:
        return self.next_u64() >> 63

    def bernoulli(self, p: float) -> int:
        if p <= 0.0:
            return 0
        return 1 if self.uniform() < p else 0

    def integers(self, n: int) -> int:
        if n != 2:
            raise ValueError("only coin draws are supported")
        return self.coin()


def shot_seed(campaign_seed: int, point_id: int, shot: int) -> int:
    s = (campaign_seed * 0x9E3779B97F4A7C15
         ^ point_id * 0xC2B2AE3D27D4EB4F
         ^ shot * 0x165667B19E3779F9) & MASK64
    sm = SplitMix(s)
    sm.next_u64()
    return sm.state


def parity_flip_prob(p: float, k: int) -> float:
    """Probability an XOR of k independent p-coins is one."""
    if p <= 0.0 or k == 0:
        return 0.0
    return 0.5 * (1.0 - (1.0 - 2.0 * p) ** k)


@dataclass
class Experiment:
    """Compiled, immutable inputs shared by every shot of one point."""

    family: str
    layout: CodeLayout
    noise: NoiseConfig
    p: float
    d: int = 0
    n_data: int = 0
    n_stabs: int = 0
    encoding: str = "st"
    sparse_gadgets: bool = False
    w_x_divisor: float = 10.0
    # Check structure, slot-ordered and padded with -1.
    stab_qubits: np.ndarray = None
    stab_legx: np.ndarray = None       # leg anticommutes with Z frames
    stab_cnot: np.ndarray = None       # leg is a driven CNOT (XZZX)
    stab_flip_p: np.ndarray = None     # ancilla shuttle flip probability
    data_shuttle_p: np.ndarray = None  # per-round frame dephasing (legs)
    gad_old_flip_p: float = 0.0
    gad_new_extra_p: float = 0.0
    p_meas: float = 0.0
    # Flattened tables.
    stab_cum: list = field(default_factory=list)
    stab_legs: list = field(default_factory=list)
    stab_anc: list = field(default_factory=list)
    gad_cum: list = field(default_factory=list)
    gad_legs: list = field(default_factory=list)
    gad_anc: list = field(default_factory=list)
    # Decoding.
    graphs: dict = field(default_factory=dict)
    qubit_stabs: list = field(default_factory=list)
    logical_x: dict = field(default_factory=dict)
    logical_z: dict = field(default_factory=dict)


def stabiliser_circuit(layout: CodeLayout, stab) -> CC.Circuit:
    slots = tuple(slot for _, slot, _ in stab.support)
    if layout.family == "css_ld":
        return CC.build_ld_stabiliser(stab.stype, slots)
    if layout.family == "css_st":
        return CC.build_css_stabiliser(stab.stype, slots)
    return CC.build_xzzx_stabiliser(slots)


def compile_experiment(family: str, d: int, noise: NoiseConfig, p: float,
                       seed: int, sparse_gadgets: bool = False,
                       w_x_divisor: float = 10.0) -> Experiment:
    """Freeze locations, build all tables and graphs for one point."""
    layout = build_layout(family, d)
    exp = Experiment(family=family, layout=layout, noise=noise, p=p,
                     d=d, n_data=layout.n_data,
                     n_stabs=len(layout.stabilisers),
                     encoding=layout.encoding,
                     sparse_gadgets=sparse_gadgets,
                     w_x_divisor=w_x_divisor)
    rng = np.random.default_rng(np.random.SeedSequence([seed & MASK64, 0x7AB1E5]))
    p_sh = noise.p_sh_ld if exp.encoding == "ld" else noise.p_sh_st
    exp.p_meas = noise.p_meas_ld if exp.encoding == "ld" else noise.p_meas_st

    ns = exp.n_stabs
    exp.stab_qubits = np.full((ns, 4), -1, dtype=np.int32)
    exp.stab_legx = np.zeros((ns, 4), dtype=np.uint8)
    exp.stab_cnot = np.zeros((ns, 4), dtype=np.uint8)
    exp.stab_flip_p = np.zeros(ns, dtype=np.float64)
    for s in layout.stabilisers:
        circ = stabiliser_circuit(layout, s)
        dur = T.draw_durations(circ, rng, noise.sigma_t)
        tab = T.compile_table(circ, dur, header={
            "circuit": circ.name, "stab": s.index, "seed": seed})
        exp.stab_cum.append(tab.cum)
        exp.stab_legs.append(tab.legs)
        exp.stab_anc.append(tab.anc)
        for i, (q, slot, basis) in enumerate(s.support):
            exp.stab_qubits[s.index, i] = q
            exp.stab_legx[s.index, i] = 1 if basis == "X" else 0
            exp.stab_cnot[s.index, i] = 1 if (layout.family == "xzzx_st"
                                              and slot in (0, 3)) else 0
        exp.stab_flip_p[s.index] = parity_flip_prob(p_sh, len(s.support))

    n_legs = np.zeros(exp.n_data, dtype=np.int64)
    exp.qubit_stabs = [[] for _ in range(exp.n_data)]
    for s in layout.stabilisers:
        for q in s.qubits:
            n_legs[q] += 1
            exp.qubit_stabs[q].append(s.index)
    exp.data_shuttle_p = np.array(
        [parity_flip_prob(p_sh, int(k)) for k in n_legs])

    if exp.encoding == "st":
        gadget = CC.build_leakage_gadget()
        for q in range(exp.n_data):
            dur = T.draw_durations(gadget, rng, noise.sigma_t)
            tab = T.compile_table(gadget, dur, header={
                "circuit": gadget.name, "qubit": q, "seed": seed})
            exp.gad_cum.append(tab.cum)
            exp.gad_legs.append(tab.legs)
            exp.gad_anc.append(tab.anc)
        exp.gad_old_flip_p = parity_flip_prob(p_sh, 2)
        exp.gad_new_extra_p = parity_flip_prob(p_sh, 2)

    if family == "xzzx_st":
        exp.graphs["XZZX"] = D.build_graph(layout, "XZZX", p=p,
                                           w_x_divisor=w_x_divisor)
    else:
        exp.graphs["X"] = D.build_graph(layout, "X")
        exp.graphs["Z"] = D.build_graph(layout, "Z")
    exp.logical_x = layout.logical_x
    exp.logical_z = layout.logical_z
    return exp


@dataclass
class ShotRecord:
    anc3: np.ndarray        # (d, n_stabs) outcomes 0=S 1=T0 2=TPM (or 0/1 LD)
    gad3: np.ndarray        # (d, n_data) gadget outcomes, 3 = not run
    final_b: np.ndarray     # (n_stabs,) perfect final syndrome bits
    final_leaked: np.ndarray
    fx: np.ndarray
    fz: np.ndarray
    rng_state: int

    def save(self, fh) -> None:
        """Binary detector-record dump for decoder replay."""
        np.savez_compressed(fh, anc3=self.anc3, gad3=self.gad3,
                            final_b=self.final_b,
                            final_leaked=self.final_leaked,
                            fx=self.fx, fz=self.fz,
                            rng_state=np.uint64(self.rng_state))

    @classmethod
    def load(cls, fh) -> "ShotRecord":
        data = np.load(fh)
        return cls(anc3=data["anc3"], gad3=data["gad3"],
                   final_b=data["final_b"], final_leaked=data["final_leaked"],
                   fx=data["fx"], fz=data["fz"],
                   rng_state=int(data["rng_state"]))


def _apply_pair_code(code: int, q: int, fx, fz, leaked, tag, sm: SplitMix):
    xa, za = code & 1, (code >> 1) & 1
    xb, zb = (code >> 2) & 1, (code >> 3) & 1
    if xa ^ xb:
        if leaked[q]:
            leaked[q] = 0
            fx[q] = sm.coin()
            fz[q] = sm.coin()
        else:
            leaked[q] = 1
            tag[q] = sm.coin()
    elif leaked[q]:
        if xa:
            tag[q] ^= 1
    else:
        fx[q] ^= xa
        fz[q] ^= za ^ zb


def simulate_rounds_py(exp: Experiment, seed: int) -> ShotRecord:
    """Pure-Python reference kernel for one shot's noisy rounds."""
    sm = SplitMix(seed)
    nq, ns, d = exp.n_data, exp.n_stabs, exp.d
    fx = np.zeros(nq, dtype=np.uint8)
    fz = np.zeros(nq, dtype=np.uint8)
    leaked = np.zeros(nq, dtype=np.uint8)
    tag = np.zeros(nq, dtype=np.uint8)
    anc3 = np.zeros((d, ns), dtype=np.uint8)
    gad3 = np.full((d, nq), 3, dtype=np.uint8)
    st = exp.encoding == "st"
    p_meas = exp.p_meas

    for r in range(d):
        sampled = np.zeros(ns, dtype=np.uint32)
        for s in range(ns):
            par = 0
            for i in range(4):
                q = exp.stab_qubits[s, i]
                if q < 0:
                    continue
                if leaked[q]:
                    if exp.stab_cnot[s, i]:
                        par ^= sm.coin()
                        tag[q] = sm.coin()
                    else:
                        par ^= tag[q]          # down-down kicks a Z
                elif exp.stab_legx[s, i]:
                    par ^= fz[q]
                else:
                    par ^= fx[q]
            par ^= sm.bernoulli(exp.stab_flip_p[s])
            u = sm.uniform()
            k = int(np.searchsorted(exp.stab_cum[s], u, side="right"))
            k = min(k, len(exp.stab_cum[s]) - 1)
            sampled[s] = exp.stab_legs[s][k]
            cls = exp.stab_anc[s][k]
            if st:
                if cls == T.ANC_LEAK:
                    out = 2
                else:
                    out = par ^ cls
                if p_meas > 0.0:
                    u = sm.uniform()
                    if u < p_meas / 2:
                        out = (out + 1) % 3
                    elif u < p_meas:
                        out = (out + 2) % 3
            else:
                out = par ^ cls ^ sm.bernoulli(p_meas)
            anc3[r, s] = out

        # Sampled data errors land after the round's measurements.
        for s in range(ns):
            code = int(sampled[s])
            if code == 0:
                continue
            for i in range(4):
                q = exp.stab_qubits[s, i]
                if q < 0:
                    continue
                c = (code >> (4 * i)) & 0xF
                if c == 0:
                    continue
                if st:
                    _apply_pair_code(c, q, fx, fz, leaked, tag, sm)
                else:
                    fx[q] ^= c & 1
                    fz[q] ^= (c >> 1) & 1

        if st:
            if exp.sparse_gadgets:
                run_gadget = np.zeros(nq, dtype=bool)
                for s in range(ns):
                    if anc3[r, s] == 2:
                        for i in range(4):
                            q = exp.stab_qubits[s, i]
                            if q >= 0:
                                run_gadget[q] = True
            for q in range(nq):
                if exp.sparse_gadgets and not run_gadget[q]:
                    continue
                was_leaked = leaked[q]
                u = sm.uniform()
                k = int(np.searchsorted(exp.gad_cum[q], u, side="right"))
                k = min(k, len(exp.gad_cum[q]) - 1)
                new_code = int(exp.gad_legs[q][k]) & 0xF
                cls = exp.gad_anc[q][k]
                leak_out = int(was_leaked) ^ (1 if cls == T.ANC_LEAK else 0)
                if leak_out:
                    out = 2
                elif was_leaked or cls == T.ANC_LEAK:
                    out = sm.coin()
                else:
                    out = (1 if cls == T.ANC_FLIP else 0) \
                        ^ sm.bernoulli(exp.gad_old_flip_p)
                if p_meas > 0.0:
                    u = sm.uniform()
                    if u < p_meas / 2:
                        out = (out + 1) % 3
                    elif u < p_meas:
                        out = (out + 2) % 3
                gad3[r, q] = out
                if was_leaked:
                    leaked[q] = 0
                    fx[q] = sm.coin()
                    fz[q] = sm.coin()
                if new_code:
                    _apply_pair_code(new_code, q, fx, fz, leaked, tag, sm)
                fz[q] ^= sm.bernoulli(exp.gad_new_extra_p)

        for q in range(nq):
            fz[q] ^= sm.bernoulli(exp.data_shuttle_p[q])

    # Perfect final round: project leaks, then read exact syndromes.
    final_leaked = leaked.copy()
    for q in range(nq):
        if leaked[q]:
            leaked[q] = 0
            fx[q] = sm.coin()
            fz[q] = sm.coin()
    final_b = np.zeros(ns, dtype=np.uint8)
    for s in range(ns):
        par = 0
        for i in range(4):
            q = exp.stab_qubits[s, i]
            if q < 0:
                continue
            par ^= fz[q] if exp.stab_legx[s, i] else fx[q]
        final_b[s] = par
    return ShotRecord(anc3=anc3, gad3=gad3, final_b=final_b,
                      final_leaked=final_leaked, fx=fx, fz=fz,
                      rng_state=sm.state)


def _anticommutes(fx, fz, op: dict) -> int:
    par = 0
    for q, letter in op.items():
        if letter == "X":
            par ^= int(fz[q])
        elif letter == "Z":
            par ^= int(fx[q])
        else:
            par ^= int(fx[q] ^ fz[q])
    return par


@dataclass
class ShotResult:
    fail_x: bool
    fail_z: bool
    matched_weight: float = 0.0


def logical_failure(layout: CodeLayout, fx: np.ndarray,
                    fz: np.ndarray) -> tuple[bool, bool]:
    """Logical X / Z failure flags of a corrected residual frame.

    The residual must already commute with every check (corrections
    applied); parities are taken against the fixed logical representatives.
    """
    lay_x = layout.logical_x
    lay_z = layout.logical_z
    return (bool(_anticommutes(fx, fz, lay_z)),
            bool(_anticommutes(fx, fz, lay_x)))


def decode_shot(exp: Experiment, rec: ShotRecord) -> ShotResult:
    """Paste, annotate erasures, match, and test the corrected logicals."""
    sm = SplitMix(rec.rng_state)
    d, ns = exp.d, exp.n_stabs
    # Binary deviation streams: rounds then the perfect final layer.
    bits = np.empty((d + 1, ns), dtype=np.uint8)
    bits[:d] = rec.anc3
    bits[d] = rec.final_b
    if exp.encoding == "st" and (rec.anc3 == 2).any():
        # Paste leaked readouts over, consuming coins in (stab, round)
        # order; decisions read the raw stream.
        for s, t in np.argwhere(rec.anc3.T == 2):
            prev = rec.anc3[t - 1, s] if t > 0 else None
            nxt = rec.anc3[t + 1, s] if t < d - 1 else int(rec.final_b[s]) if t == d - 1 else None
            if prev is not None and prev == nxt and prev != 2:
                bits[t, s] = prev
            else:
                bits[t, s] = sm.coin()

    dets = bits.copy()
    dets[1:, :] ^= bits[:-1, :]

    total_cx = np.zeros(exp.n_data, dtype=np.uint8)
    total_cz = np.zeros(exp.n_data, dtype=np.uint8)
    weight = 0.0
    if dets.any():
        final_set = set(int(q) for q in np.nonzero(rec.final_leaked)[0])
        if exp.family == "css_st":
            ann = D.confirm_leaks_css(exp.layout, rec.gad3, rec.anc3,
                                      final_leaked=final_set)
            for q in final_set:
                ann.confirmed.add((q, d + 1))
        elif exp.family == "xzzx_st":
            ann = D.ErasureAnnotation()
            for r, q in np.argwhere(rec.gad3 == 2):
                ann.raw_tpm.add((int(q), int(r) + 2))
            for r, q in np.argwhere(rec.gad3 == 1):
                ann.raw_t0.add((int(q), int(r) + 2))
            for q in final_set:
                ann.raw_tpm.add((q, d + 1))
        else:
            ann = D.ErasureAnnotation()

        for kind, skel in exp.graphs.items():
            rows = getattr(skel, "_row_lookup", None)
            if rows is None:
                rows = np.full(ns, -1, dtype=np.int64)
                for i, sid in enumerate(skel.stab_ids):
                    rows[sid] = i
                skel._row_lookup = rows
            taus, sids = np.nonzero(dets)
            keep = rows[sids] >= 0
            if not keep.any():
                continue
            defects = (taus[keep] * skel.n_stabs + rows[sids[keep]]).tolist()
            w = D.erased_weights(skel, ann, kind)
            graph = D.MatchingGraph(skel, w)
            cx, cz, wsum, _ = graph.decode(defects)
            total_cx ^= cx.astype(np.uint8)
            total_cz ^= cz.astype(np.uint8)
            weight += wsum

    rx = rec.fx ^ total_cx
    rz = rec.fz ^ total_cz
    fail_x, fail_z = logical_failure(exp.layout, rx, rz)
    return ShotResult(fail_x=fail_x, fail_z=fail_z, matched_weight=weight)


def simulate_rounds(exp: Experiment, seed: int) -> ShotRecord:
    """Dispatch to the compiled kernel when available."""
    from .kernel import simulate_rounds_impl
    return simulate_rounds_impl(exp, seed)


def run_shot(exp: Experiment, campaign_seed: int, point_id: int,
             shot: int) -> ShotResult:
    seed = shot_seed(campaign_seed, point_id, shot)
    rec = simulate_rounds(exp, seed)
    return decode_shot(exp, rec)
