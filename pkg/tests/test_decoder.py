import math

import numpy as np
import pytest

from stqec import decoder as D
from stqec import memory as M
from stqec.lattice import build_layout


class FixedCoins:
    def __init__(self, bits):
        self.bits = list(bits)

    def integers(self, n):
        return self.bits.pop(0)


def test_paste_over_rules():
    rng = np.random.default_rng(0)
    s, t0, tpm = D.OUT_S, D.OUT_T0, D.OUT_TPM
    out = D.paste_over(np.array([s, tpm, s]), rng)
    assert list(out) == [s, s, s]
    out = D.paste_over(np.array([s, s, s]), rng)
    assert list(out) == [s, s, s]
    # Disagreeing neighbours: coin.
    out = D.paste_over(np.array([s, tpm, t0]), FixedCoins([1]))
    assert list(out) == [s, t0, t0]
    out = D.paste_over(np.array([s, tpm, t0]), FixedCoins([0]))
    assert list(out) == [s, s, t0]
    # Missing neighbours at the stream boundary count as disagreement.
    out = D.paste_over(np.array([tpm, s, s]), FixedCoins([1]))
    assert out[0] == t0
    # A leaked neighbour never counts as agreement.
    out = D.paste_over(np.array([s, tpm, tpm, s]), FixedCoins([0, 0]))
    assert set(out) <= {s, t0}


def test_paste_over_coin_is_fair():
    rng = np.random.default_rng(42)
    s, t0, tpm = D.OUT_S, D.OUT_T0, D.OUT_TPM
    n = 10_000
    ones = sum(D.paste_over(np.array([s, tpm, t0]), rng)[1] == t0
               for _ in range(n))
    assert abs(ones - n / 2) < 3 * math.sqrt(n * 0.25)


def test_paste_over_output_binary_same_length():
    rng = np.random.default_rng(1)
    stream = np.array([0, 2, 1, 2, 2, 0, 1])
    out = D.paste_over(stream, rng)
    assert len(out) == len(stream)
    assert set(out) <= {0, 1}


def _gadget_records(d, n_data, events):
    gad = np.zeros((d, n_data), dtype=np.uint8)
    for r, q, v in events:
        gad[r, q] = v
    return gad


def test_confirm_leaks_pairing_rules():
    layout = build_layout("css_st", 3)
    d, nq, ns = 3, 9, 8
    anc = np.zeros((d, ns), dtype=np.uint8)
    # Partner at an adjacent ancilla in the same round confirms.
    gad = _gadget_records(d, nq, [(1, 4, 2)])
    stab = next(s for s in layout.stabilisers if 4 in s.qubits)
    anc[1, stab.index] = 2
    ann = D.confirm_leaks_css(layout, gad, anc)
    assert (4, 3) in ann.confirmed
    # Partner at the same qubit's gadget in the next round: both confirm.
    anc[:] = 0
    gad = _gadget_records(d, nq, [(0, 2, 2), (1, 2, 2)])
    ann = D.confirm_leaks_css(layout, gad, anc)
    assert (2, 2) in ann.confirmed and (2, 3) in ann.confirmed
    # Isolated detection is discarded.
    gad = _gadget_records(d, nq, [(1, 6, 2)])
    ann = D.confirm_leaks_css(layout, gad, np.zeros((d, ns), dtype=np.uint8))
    assert ann.confirmed == set()
    # The perfect final detection can confirm the last noisy round.
    gad = _gadget_records(d, nq, [(2, 6, 2)])
    ann = D.confirm_leaks_css(layout, gad, anc, final_leaked={6})
    assert (6, 4) in ann.confirmed


def test_xzzx_weights_values():
    w_z, w_x = D.xzzx_weights(0.01)
    assert abs(w_z - math.log(99)) < 1e-12
    assert abs(w_x - math.log((1 - 1e-5) / 1e-5)) < 1e-9
    with pytest.raises(ValueError):
        D.xzzx_weights(0.6)
    w_z2, w_x2 = D.xzzx_weights(0.01, w_x_divisor=20.0)
    assert w_x2 > w_x


def test_build_graph_css_unit_weights():
    layout = build_layout("css_st", 3)
    skel = D.build_graph(layout, "X")
    assert np.all(skel.base_weight == 1.0)
    assert skel.n_stabs == 4
    assert skel.n_layers == 4


def test_erased_weights_zero_exactly():
    layout = build_layout("css_st", 3)
    skel = D.build_graph(layout, "X")
    ann = D.ErasureAnnotation(confirmed={(4, 2)})
    w = D.erased_weights(skel, ann, "X")
    ids = skel.erase_index[(4, 2, D.KIND_SPATIAL_Z)]
    assert all(w[i] == 0.0 for i in ids)
    assert w.sum() < skel.base_weight.sum()


def test_mwpm_two_adjacent_defects():
    layout = build_layout("css_st", 5)
    skel = D.build_graph(layout, "Z")
    graph = D.MatchingGraph(skel)
    # Two detectors adjacent through one data qubit at layer 2.
    q = 6
    ends = [s.index for s in layout.stabilisers
            if q in s.qubits and s.stype == "Z"]
    assert len(ends) == 2
    row = {sid: i for i, sid in enumerate(skel.stab_ids)}
    defects = [skel.node(row[ends[0]], 2), skel.node(row[ends[1]], 2)]
    cx, cz, weight, pairs = graph.decode(defects)
    assert weight == 1.0
    assert cx[q] == 1 and cx.sum() == 1


def test_mwpm_routes_through_zero_weight_chain():
    layout = build_layout("css_st", 5)
    skel = D.build_graph(layout, "Z")
    # Erase a chain of qubits along row 2 and check the matched weight drops.
    row_qubits = [layout.qubit_index(2, c) for c in range(5)]
    ann = D.ErasureAnnotation(confirmed={(q, 3) for q in row_qubits})
    w = D.erased_weights(skel, ann, "X")
    graph = D.MatchingGraph(skel, w)
    ends = [s.index for s in layout.stabilisers
            if row_qubits[0] in s.qubits and s.stype == "Z"]
    row = {sid: i for i, sid in enumerate(skel.stab_ids)}
    defects = [skel.node(row[ends[0]], 3), skel.node(row[ends[1]], 3)]
    cx, cz, weight, pairs = graph.decode(defects)
    assert weight == 0.0


def test_erasure_monotonicity():
    # Adding a confirmed erasure never increases the matched weight.
    layout = build_layout("css_st", 5)
    skel = D.build_graph(layout, "Z")
    rng = np.random.default_rng(3)
    for _ in range(25):
        defects = sorted(rng.choice(skel.n_det, size=6, replace=False).tolist())
        base_graph = D.MatchingGraph(skel)
        _, _, w0, _ = base_graph.decode(defects)
        q = int(rng.integers(layout.n_data))
        tau = int(rng.integers(2, skel.n_layers + 1))
        ann = D.ErasureAnnotation(confirmed={(q, tau)})
        w = D.erased_weights(skel, ann, "Z")
        _, _, w1, _ = D.MatchingGraph(skel, w).decode(defects)
        assert w1 <= w0 + 1e-12


@pytest.mark.parametrize("family,check", [("css_st", "X"), ("css_st", "Z"),
                                          ("xzzx_st", "XZZX")])
def test_mwpm_matches_exhaustive_on_random_instances(family, check):
    layout = build_layout(family, 5)
    skel = D.build_graph(layout, check, p=0.01)
    graph = D.MatchingGraph(skel)
    rng = np.random.default_rng(11)
    from scipy.sparse.csgraph import dijkstra
    for _ in range(60):
        m = int(rng.integers(2, 9))
        defects = sorted(rng.choice(skel.n_det, size=m, replace=False).tolist())
        dist, _ = dijkstra(graph._adj, indices=defects,
                           return_predecessors=True)
        dd = dist[:, defects]
        db = dist[:, skel.n_det]
        pairs = D._exhaustive_pairing(dd, db)
        best = sum(db[i] if j == -1 else dd[i, j] for i, j in pairs)
        _, _, got, _ = graph.decode(defects)
        assert abs(got - best) < 1e-9


def test_mwpm_empty_defects():
    layout = build_layout("css_st", 3)
    graph = D.MatchingGraph(D.build_graph(layout, "X"))
    cx, cz, w, pairs = graph.decode([])
    assert w == 0.0 and cx.sum() == 0 and pairs == []


def test_dimacs_dump():
    layout = build_layout("css_st", 3)
    graph = D.MatchingGraph(D.build_graph(layout, "X"))
    text = graph.dump_dimacs([0, 1])
    lines = text.splitlines()
    assert lines[0].startswith("p edge 2")
    assert any(line.startswith("e 0 1") for line in lines)
