# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled round loop for the Monte-Carlo memory experiment.

Bit-identical twin of stqec.memory.simulate_rounds_py: same splitmix64
stream, same draw order, same records.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport uint8_t, uint32_t, int32_t, int64_t, uint64_t

from .memory import ShotRecord

cdef uint64_t MASK = <uint64_t>0xFFFFFFFFFFFFFFFF


cdef inline uint64_t _mix_next(uint64_t* state) nogil:
    cdef uint64_t z
    state[0] = state[0] + <uint64_t>0x9E3779B97F4A7C15
    z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t* state) nogil:
    return <double>(_mix_next(state) >> 11) * (1.0 / 9007199254740992.0)


cdef inline int _coin(uint64_t* state) nogil:
    return <int>(_mix_next(state) >> 63)


cdef inline int _bernoulli(uint64_t* state, double p) nogil:
    if p <= 0.0:
        return 0
    if _uniform(state) < p:
        return 1
    return 0


cdef inline int64_t _search(double* cum, int64_t lo, int64_t hi, double u) nogil:
    # index of first element > u within [lo, hi), relative to lo
    cdef int64_t left = lo, right = hi, mid
    while left < right:
        mid = (left + right) >> 1
        if cum[mid] <= u:
            left = mid + 1
        else:
            right = mid
    if left >= hi:
        left = hi - 1
    return left - lo


cdef inline void _apply_pair_code(int code, int q, uint8_t* fx, uint8_t* fz,
                                  uint8_t* leaked, uint8_t* tag,
                                  uint64_t* state) nogil:
    cdef int xa = code & 1
    cdef int za = (code >> 1) & 1
    cdef int xb = (code >> 2) & 1
    cdef int zb = (code >> 3) & 1
    if xa ^ xb:
        if leaked[q]:
            leaked[q] = 0
            fx[q] = <uint8_t>_coin(state)
            fz[q] = <uint8_t>_coin(state)
        else:
            leaked[q] = 1
            tag[q] = <uint8_t>_coin(state)
    elif leaked[q]:
        if xa:
            tag[q] ^= 1
    else:
        fx[q] ^= <uint8_t>xa
        fz[q] ^= <uint8_t>(za ^ zb)


def build_pack(exp):
    """Flatten an Experiment's tables into contiguous kernel arrays."""
    stab_off = np.zeros(exp.n_stabs + 1, dtype=np.int64)
    for i, c in enumerate(exp.stab_cum):
        stab_off[i + 1] = stab_off[i] + len(c)
    pack = {
        "stab_off": stab_off,
        "stab_cum": np.concatenate(exp.stab_cum) if exp.stab_cum else np.zeros(0),
        "stab_legs": np.concatenate(exp.stab_legs).astype(np.uint32)
            if exp.stab_legs else np.zeros(0, dtype=np.uint32),
        "stab_anc": np.concatenate(exp.stab_anc).astype(np.int8)
            if exp.stab_anc else np.zeros(0, dtype=np.int8),
    }
    if exp.gad_cum:
        gad_off = np.zeros(exp.n_data + 1, dtype=np.int64)
        for i, c in enumerate(exp.gad_cum):
            gad_off[i + 1] = gad_off[i] + len(c)
        pack["gad_off"] = gad_off
        pack["gad_cum"] = np.concatenate(exp.gad_cum)
        pack["gad_legs"] = np.concatenate(exp.gad_legs).astype(np.uint32)
        pack["gad_anc"] = np.concatenate(exp.gad_anc).astype(np.int8)
    else:
        pack["gad_off"] = np.zeros(1, dtype=np.int64)
        pack["gad_cum"] = np.zeros(0)
        pack["gad_legs"] = np.zeros(0, dtype=np.uint32)
        pack["gad_anc"] = np.zeros(0, dtype=np.int8)
    return pack


def simulate_rounds_cy(exp, seed):
    pack = getattr(exp, "_kernel_pack", None)
    if pack is None:
        pack = build_pack(exp)
        exp._kernel_pack = pack

    cdef uint64_t state = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef int nq = exp.n_data
    cdef int ns = exp.n_stabs
    cdef int d = exp.d
    cdef bint st = exp.encoding == "st"
    cdef bint sparse = exp.sparse_gadgets
    cdef double p_meas = exp.p_meas
    cdef double gad_old_flip = exp.gad_old_flip_p
    cdef double gad_new_extra = exp.gad_new_extra_p

    cdef cnp.ndarray[cnp.int32_t, ndim=2] stab_qubits = exp.stab_qubits
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] stab_legx = exp.stab_legx
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] stab_cnot = exp.stab_cnot
    cdef cnp.ndarray[cnp.float64_t, ndim=1] stab_flip_p = exp.stab_flip_p
    cdef cnp.ndarray[cnp.float64_t, ndim=1] data_shuttle_p = exp.data_shuttle_p

    cdef cnp.ndarray[cnp.int64_t, ndim=1] stab_off = pack["stab_off"]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] stab_cum = pack["stab_cum"]
    cdef cnp.ndarray[cnp.uint32_t, ndim=1] stab_legs = pack["stab_legs"]
    cdef cnp.ndarray[cnp.int8_t, ndim=1] stab_anc = pack["stab_anc"]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] gad_off = pack["gad_off"]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gad_cum = pack["gad_cum"]
    cdef cnp.ndarray[cnp.uint32_t, ndim=1] gad_legs = pack["gad_legs"]
    cdef cnp.ndarray[cnp.int8_t, ndim=1] gad_anc = pack["gad_anc"]

    fx_a = np.zeros(nq, dtype=np.uint8)
    fz_a = np.zeros(nq, dtype=np.uint8)
    leaked_a = np.zeros(nq, dtype=np.uint8)
    tag_a = np.zeros(nq, dtype=np.uint8)
    anc3_a = np.zeros((d, ns), dtype=np.uint8)
    gad3_a = np.full((d, nq), 3, dtype=np.uint8)
    final_b_a = np.zeros(ns, dtype=np.uint8)
    sampled_a = np.zeros(ns, dtype=np.uint32)
    rungad_a = np.zeros(nq, dtype=np.uint8)

    cdef cnp.ndarray[cnp.uint8_t, ndim=1] fx = fx_a
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] fz = fz_a
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] leaked = leaked_a
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] tag = tag_a
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] anc3 = anc3_a
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] gad3 = gad3_a
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] final_b = final_b_a
    cdef cnp.ndarray[cnp.uint32_t, ndim=1] sampled = sampled_a
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] rungad = rungad_a

    cdef int r, s, i, q, par, out, cls, code, c, was_leaked, leak_out
    cdef int64_t k
    cdef double u

    for r in range(d):
        for s in range(ns):
            par = 0
            for i in range(4):
                q = stab_qubits[s, i]
                if q < 0:
                    continue
                if leaked[q]:
                    if stab_cnot[s, i]:
                        par ^= _coin(&state)
                        tag[q] = <uint8_t>_coin(&state)
                    else:
                        par ^= tag[q]
                elif stab_legx[s, i]:
                    par ^= fz[q]
                else:
                    par ^= fx[q]
            par ^= _bernoulli(&state, stab_flip_p[s])
            u = _uniform(&state)
            k = _search(&stab_cum[0], stab_off[s], stab_off[s + 1], u)
            sampled[s] = stab_legs[stab_off[s] + k]
            cls = stab_anc[stab_off[s] + k]
            if st:
                if cls == 2:
                    out = 2
                else:
                    out = par ^ cls
                if p_meas > 0.0:
                    u = _uniform(&state)
                    if u < p_meas / 2:
                        out = (out + 1) % 3
                    elif u < p_meas:
                        out = (out + 2) % 3
            else:
                out = par ^ cls ^ _bernoulli(&state, p_meas)
            anc3[r, s] = <uint8_t>out

        for s in range(ns):
            code = <int>sampled[s]
            if code == 0:
                continue
            for i in range(4):
                q = stab_qubits[s, i]
                if q < 0:
                    continue
                c = (code >> (4 * i)) & 0xF
                if c == 0:
                    continue
                if st:
                    _apply_pair_code(c, q, &fx[0], &fz[0], &leaked[0],
                                     &tag[0], &state)
                else:
                    fx[q] ^= <uint8_t>(c & 1)
                    fz[q] ^= <uint8_t>((c >> 1) & 1)

        if st:
            if sparse:
                for q in range(nq):
                    rungad[q] = 0
                for s in range(ns):
                    if anc3[r, s] == 2:
                        for i in range(4):
                            q = stab_qubits[s, i]
                            if q >= 0:
                                rungad[q] = 1
            for q in range(nq):
                if sparse and not rungad[q]:
                    continue
                was_leaked = leaked[q]
                u = _uniform(&state)
                k = _search(&gad_cum[0], gad_off[q], gad_off[q + 1], u)
                code = <int>(gad_legs[gad_off[q] + k] & 0xF)
                cls = gad_anc[gad_off[q] + k]
                leak_out = was_leaked ^ (1 if cls == 2 else 0)
                if leak_out:
                    out = 2
                elif was_leaked or cls == 2:
                    out = _coin(&state)
                else:
                    out = (1 if cls == 1 else 0) ^ _bernoulli(&state, gad_old_flip)
                if p_meas > 0.0:
                    u = _uniform(&state)
                    if u < p_meas / 2:
                        out = (out + 1) % 3
                    elif u < p_meas:
                        out = (out + 2) % 3
                gad3[r, q] = <uint8_t>out
                if was_leaked:
                    leaked[q] = 0
                    fx[q] = <uint8_t>_coin(&state)
                    fz[q] = <uint8_t>_coin(&state)
                if code:
                    _apply_pair_code(code, q, &fx[0], &fz[0], &leaked[0],
                                     &tag[0], &state)
                fz[q] ^= <uint8_t>_bernoulli(&state, gad_new_extra)

        for q in range(nq):
            fz[q] ^= <uint8_t>_bernoulli(&state, data_shuttle_p[q])

    final_leaked = leaked_a.copy()
    for q in range(nq):
        if leaked[q]:
            leaked[q] = 0
            fx[q] = <uint8_t>_coin(&state)
            fz[q] = <uint8_t>_coin(&state)
    for s in range(ns):
        par = 0
        for i in range(4):
            q = stab_qubits[s, i]
            if q < 0:
                continue
            if stab_legx[s, i]:
                par ^= fz[q]
            else:
                par ^= fx[q]
        final_b[s] = <uint8_t>par

    return ShotRecord(anc3=anc3_a, gad3=gad3_a, final_b=final_b_a,
                      final_leaked=final_leaked, fx=fx_a, fz=fz_a,
                      rng_state=int(state))
