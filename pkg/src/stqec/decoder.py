"""Leakage-aware matching decoder on the spacetime detector graph.

Detector layers run from 1 to d+1: layer tau compares round tau's checks
with the previous round, the last layer being the perfect final round.
A data error born in round r first flips detectors at layer r+1, so
spatial edges live on layers 2..d+1 while temporal edges join layers
(tau, tau+1) for tau = 1..d.

Erasures enter as exact zero-weight edges; ties between equal-weight
matchings are broken by deterministic node ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .lattice import CodeLayout

try:
    from ._matching import max_weight_perfect_matching_dense
except ImportError:                      # pure-Python fallback
    import networkx as nx

    def max_weight_perfect_matching_dense(w):
        n = w.shape[0]
        g = nx.Graph()
        for i in range(n):
            for j in range(i + 1, n):
                g.add_edge(i, j, weight=float(w[i, j]))
        mate = np.full(n, -1, dtype=np.int32)
        for a, b in nx.max_weight_matching(g, maxcardinality=True):
            mate[a] = b
            mate[b] = a
        return mate

OUT_S, OUT_T0, OUT_TPM = 0, 1, 2

KIND_TEMPORAL, KIND_SPATIAL_X, KIND_SPATIAL_Z = 0, 1, 2


def paste_over(stream: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Binarise one stabiliser's outcome stream by pasting over leaks.

    Wherever the stream shows an even-parity (leaked) readout, copy the
    common value of the two neighbouring rounds, or coin-flip when they
    disagree; missing neighbours at the stream boundaries count as
    disagreeing.  Decisions read the raw stream, not pasted values.
    """
    stream = np.asarray(stream)
    out = stream.copy()
    n = len(stream)
    for t in range(n):
        if stream[t] != OUT_TPM:
            continue
        prev = stream[t - 1] if t > 0 else None
        nxt = stream[t + 1] if t < n - 1 else None
        if prev is not None and prev == nxt and prev != OUT_TPM:
            out[t] = prev
        else:
            out[t] = OUT_T0 if rng.integers(2) else OUT_S
    return out


@dataclass
class ErasureAnnotation:
    """Per (qubit, round) erasure flags feeding the graph reweighting."""

    confirmed: set = field(default_factory=set)   # CSS: (q, round)
    raw_tpm: set = field(default_factory=set)     # XZZX: (q, round)
    raw_t0: set = field(default_factory=set)      # XZZX: (q, round)


def confirm_leaks_css(layout: CodeLayout, gadget_outcomes: np.ndarray,
                      anc_outcomes: np.ndarray,
                      final_leaked: set | None = None) -> ErasureAnnotation:
    """Pair leak detections in spacetime for the exchange-only code.

    A gadget even-parity readout at (q, r) is confirmed by an adjacent
    ancilla leak in the same round, or by the same qubit's gadget in the
    neighbouring rounds (the perfect final detection counts).  Isolated
    detections are treated as measurement errors and dropped.
    """
    ann = ErasureAnnotation()
    n_rounds, n_data = gadget_outcomes.shape
    adjacency = [[] for _ in range(n_data)]
    for s in layout.stabilisers:
        for q in s.qubits:
            adjacency[q].append(s.index)
    final_leaked = final_leaked or set()
    for r in range(n_rounds):
        for q in range(n_data):
            if gadget_outcomes[r, q] != OUT_TPM:
                continue
            partner = any(anc_outcomes[r, s] == OUT_TPM for s in adjacency[q])
            if not partner and r > 0:
                partner = gadget_outcomes[r - 1, q] == OUT_TPM
            if not partner and r < n_rounds - 1:
                partner = gadget_outcomes[r + 1, q] == OUT_TPM
            if not partner and r == n_rounds - 1:
                partner = q in final_leaked
            if partner:
                # A leak caught in round r was projected there; the random
                # re-entry frame first fires detectors at layer r + 2.
                ann.confirmed.add((q, r + 2))
    return ann


@dataclass
class GraphSkeleton:
    """Static spacetime graph of one matching problem."""

    n_stabs: int
    n_layers: int
    edge_u: np.ndarray
    edge_v: np.ndarray          # boundary encoded as node n_det
    kind: np.ndarray
    qubit: np.ndarray
    layer: np.ndarray
    base_weight: np.ndarray
    erase_index: dict           # (qubit, layer, kind) -> edge id
    stab_ids: list              # layout stabiliser index per graph node row

    @property
    def n_det(self) -> int:
        return self.n_stabs * self.n_layers

    def node(self, stab_row: int, layer: int) -> int:
        return (layer - 1) * self.n_stabs + stab_row


def xzzx_weights(p: float, w_x_divisor: float = 10.0) -> tuple[float, float]:
    """(w_z = w_t, w_x) from the common gate infidelity."""
    if not 0.0 < p < 0.5:
        raise ValueError("weights need p in (0, 1/2)")
    w_z = math.log((1.0 - p) / p)
    px = p * p / w_x_divisor
    w_x = math.log((1.0 - px) / px)
    return w_z, w_x


def build_graph(layout: CodeLayout, check_type: str, p: float | None = None,
                w_x_divisor: float = 10.0) -> GraphSkeleton:
    """Spacetime skeleton for one matching problem.

    ``check_type`` is "X" or "Z" for the per-basis CSS graphs and "XZZX"
    for the unified graph.  CSS edges all carry weight one; XZZX edges use
    the bias-aware weights from the common gate infidelity ``p``.
    """
    d = layout.distance
    n_layers = d + 1
    if check_type == "XZZX":
        stabs = list(layout.stabilisers)
        w_z, w_x = xzzx_weights(p, w_x_divisor)
        w_t = w_z
    else:
        stabs = [s for s in layout.stabilisers if s.stype == check_type]
        w_z = w_x = w_t = 1.0
    row_of = {s.index: i for i, s in enumerate(stabs)}
    n_stabs = len(stabs)
    n_det = n_stabs * n_layers
    edge_u, edge_v, kind, qubit, layer, weight = [], [], [], [], [], []
    erase_index = {}

    def node(stab_index, tau):
        return (tau - 1) * n_stabs + row_of[stab_index]

    # Temporal edges.
    for s in stabs:
        for tau in range(1, n_layers):
            edge_u.append(node(s.index, tau))
            edge_v.append(node(s.index, tau + 1))
            kind.append(KIND_TEMPORAL)
            qubit.append(-1)
            layer.append(tau)
            weight.append(w_t)

    # Spatial and diagonal edges per data qubit, error basis and layer.
    # On the unified graph a late fault in a driven leg flips that check's
    # own readout and leaves the data error for the next layer: a diagonal
    # detector pair carrying the Z error class.  The per-basis CSS graphs
    # have no such first-order same-graph mechanism (their correlated
    # faults straddle the two graphs), so they stay purely spatial and
    # temporal.  Heralded gadget errors land between rounds, so erasures
    # zero only the purely spatial edge.
    error_kinds = [("X", KIND_SPATIAL_X, w_x), ("Z", KIND_SPATIAL_Z, w_z)]
    for q in range(layout.n_data):
        for err, k, w in error_kinds:
            ends = [s.index for s in stabs
                    if q in s.qubits and s.leg(q) != err]
            if not ends:
                continue
            diagonals = check_type == "XZZX" and err == "Z"
            for tau in range(2, n_layers + 1):
                edge_u.append(node(ends[0], tau))
                edge_v.append(node(ends[1], tau) if len(ends) == 2 else n_det)
                kind.append(k)
                qubit.append(q)
                layer.append(tau)
                weight.append(w)
                erase_index[(q, tau, k)] = [len(edge_u) - 1]
                if not diagonals:
                    continue
                if len(ends) == 2:
                    pairs = [(node(ends[0], tau - 1), node(ends[1], tau)),
                             (node(ends[1], tau - 1), node(ends[0], tau))]
                else:
                    pairs = [(node(ends[0], tau - 1), n_det)]
                for u, v in pairs:
                    edge_u.append(u)
                    edge_v.append(v)
                    kind.append(k)
                    qubit.append(q)
                    layer.append(tau)
                    weight.append(w)

    return GraphSkeleton(
        n_stabs=n_stabs, n_layers=n_layers,
        edge_u=np.array(edge_u, dtype=np.int32),
        edge_v=np.array(edge_v, dtype=np.int32),
        kind=np.array(kind, dtype=np.int8),
        qubit=np.array(qubit, dtype=np.int32),
        layer=np.array(layer, dtype=np.int32),
        base_weight=np.array(weight, dtype=np.float64),
        erase_index=erase_index,
        stab_ids=[s.index for s in stabs])


def erased_weights(skel: GraphSkeleton, annotation: ErasureAnnotation,
                   graph_kind: str) -> np.ndarray:
    """Per-shot weight vector with erased edges set to exactly zero."""
    w = skel.base_weight.copy()
    def zero(q, r, kinds):
        for k in kinds:
            for idx in skel.erase_index.get((q, r, k), ()):
                w[idx] = 0.0
    if graph_kind == "XZZX":
        for q, r in annotation.raw_tpm:
            zero(q, r, (KIND_SPATIAL_X, KIND_SPATIAL_Z))
        for q, r in annotation.raw_t0:
            zero(q, r, (KIND_SPATIAL_X,))
    else:
        for q, r in annotation.confirmed:
            zero(q, r, (KIND_SPATIAL_X, KIND_SPATIAL_Z))
    return w


class _Topology:
    """Cached group structure of a skeleton's parallel edges."""

    def __init__(self, skel: GraphSkeleton):
        n = skel.n_det + 1
        u, v = skel.edge_u, skel.edge_v
        lo = np.minimum(u, v).astype(np.int64)
        hi = np.maximum(u, v).astype(np.int64)
        key = lo * n + hi
        order = np.argsort(key, kind="stable")
        sk = key[order]
        starts = np.nonzero(np.concatenate([[True], sk[1:] != sk[:-1]]))[0]
        self.members = order
        self.offsets = np.concatenate([starts, [len(order)]])
        glo = lo[order][starts]
        ghi = hi[order][starts]
        self.group_of_pair = {(int(a), int(b)): g
                              for g, (a, b) in enumerate(zip(glo, ghi))}
        n_groups = len(starts)
        # Fixed-structure symmetric CSR; data positions found by building
        # once with group ids as payload.
        rows = np.concatenate([glo, ghi])
        cols = np.concatenate([ghi, glo])
        gids = np.tile(np.arange(n_groups), 2)
        coo = csr_matrix((gids + 1.0, (rows, cols)), shape=(n, n))
        # Duplicate (a, b) groups cannot occur, so values survive intact.
        self.indptr = coo.indptr
        self.indices = coo.indices
        self.data_group = (coo.data - 1.0).astype(np.int64)
        self.shape = (n, n)

    def adjacency(self, weights: np.ndarray) -> csr_matrix:
        gw = np.minimum.reduceat(weights[self.members], self.offsets[:-1])
        m = csr_matrix(self.shape)
        m.indptr = self.indptr
        m.indices = self.indices
        m.data = gw[self.data_group]
        return m


class MatchingGraph:
    """A skeleton plus per-shot weights, ready to decode defect sets."""

    def __init__(self, skel: GraphSkeleton, weights: np.ndarray | None = None):
        self.skel = skel
        self.weights = skel.base_weight if weights is None else weights
        topo = getattr(skel, "_topology", None)
        if topo is None:
            topo = _Topology(skel)
            skel._topology = topo
        self._topo = topo
        self._adj = topo.adjacency(self.weights)

    def _min_member(self, a: int, b: int) -> int:
        pair = (min(a, b), max(a, b))
        g = self._topo.group_of_pair[pair]
        members = self._topo.members[self._topo.offsets[g]:self._topo.offsets[g + 1]]
        best = min(members, key=lambda m: (self.weights[m], m))
        return int(best)

    def decode(self, defects: list[int]):
        """Minimum-weight perfect matching of the defect set.

        Returns (correction_x, correction_z, total_weight, pairs) where the
        corrections are bit arrays over data qubits (a spatial-X edge on a
        path contributes an X on its qubit) and ``pairs`` records matched
        defect pairs with the boundary encoded as -1.
        """
        skel = self.skel
        boundary = skel.n_det
        m = len(defects)
        nq = max(skel.qubit.max() + 1, 1) if len(skel.qubit) else 1
        cx = np.zeros(int(nq), dtype=np.uint8)
        cz = np.zeros(int(nq), dtype=np.uint8)
        if m == 0:
            return cx, cz, 0.0, []
        dist, pred = dijkstra(self._adj, indices=defects,
                              return_predecessors=True)
        dist_def = dist[:, defects]
        dist_bnd = dist[:, boundary]

        pairs = _min_weight_pairing(dist_def, dist_bnd)
        total = 0.0
        matched = []
        for i, j in pairs:
            if j == -1:
                total += dist_bnd[i]
                self._apply_path(pred[i], boundary, cx, cz)
                matched.append((defects[i], -1))
            else:
                total += dist_def[i, j]
                self._apply_path(pred[i], defects[j], cx, cz)
                matched.append((defects[i], defects[j]))
        return cx, cz, float(total), matched

    def _apply_path(self, pred_row: np.ndarray, target: int,
                    cx: np.ndarray, cz: np.ndarray):
        node = target
        while True:
            prev = pred_row[node]
            if prev < 0:
                break
            edge = self._min_member(int(prev), int(node))
            k = self.skel.kind[edge]
            if k == KIND_SPATIAL_X:
                cx[self.skel.qubit[edge]] ^= 1
            elif k == KIND_SPATIAL_Z:
                cz[self.skel.qubit[edge]] ^= 1
            node = int(prev)

    def dump_dimacs(self, defects: list[int]) -> str:
        """Text dump of the defect-pairing instance for external checks."""
        dist, _ = dijkstra(self._adj, indices=defects,
                           return_predecessors=True)
        lines = [f"p edge {len(defects)} instance"]
        for i in range(len(defects)):
            lines.append(f"b {i} {dist[i, self.skel.n_det]:.12g}")
            for j in range(i + 1, len(defects)):
                lines.append(f"e {i} {j} {dist[i, defects[j]]:.12g}")
        return "\n".join(lines)


def _pair_component(dist_def: np.ndarray, dist_bnd: np.ndarray):
    m = dist_def.shape[0]
    if m <= 8:
        return _exhaustive_pairing(dist_def, dist_bnd)
    # Complete graph on defects plus interchangeable boundary sinks.
    w = np.zeros((2 * m, 2 * m))
    w[:m, :m] = dist_def
    w[:m, m:] = dist_bnd[:, None]
    w[m:, :m] = dist_bnd[None, :]
    big = float(w.max()) + 1.0
    w = big - w
    w[m:, m:] = big
    np.fill_diagonal(w, 0.0)
    mate = max_weight_perfect_matching_dense(w)
    pairs = []
    for i in range(m):
        j = int(mate[i])
        if j >= m:
            pairs.append((i, -1))
        elif i < j:
            pairs.append((i, j))
    return pairs


def _min_weight_pairing(dist_def: np.ndarray, dist_bnd: np.ndarray):
    """Exact minimum-weight pairing allowing boundary matches.

    A defect pair costing at least the two boundary matches can always be
    rewired to the boundary without raising the total, so the problem
    decomposes over components of the strictly-cheaper-than-boundary
    graph.  Components are solved exhaustively when small and by compiled
    blossom matching otherwise; the total weight stays exactly optimal.
    Returns a list of (i, j) index pairs with -1 standing for the boundary.
    """
    m = dist_def.shape[0]
    if m <= 8:
        return _exhaustive_pairing(dist_def, dist_bnd)
    admissible = dist_def < (dist_bnd[:, None] + dist_bnd[None, :]) - 1e-12
    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(m):
        for j in range(i + 1, m):
            if admissible[i, j]:
                ra, rb = find(i), find(j)
                if ra != rb:
                    parent[ra] = rb
    groups = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)

    pairs = []
    for members in groups.values():
        idx = np.array(members)
        sub = _pair_component(dist_def[np.ix_(idx, idx)], dist_bnd[idx])
        for a, b in sub:
            pairs.append((int(idx[a]), -1 if b == -1 else int(idx[b])))
    return pairs


def _exhaustive_pairing(dist_def: np.ndarray, dist_bnd: np.ndarray):
    m = dist_def.shape[0]
    best = [None, math.inf]

    def rec(remaining, acc, weight):
        if weight >= best[1]:
            return
        if not remaining:
            best[0] = list(acc)
            best[1] = weight
            return
        i = remaining[0]
        rest = remaining[1:]
        # Boundary option.
        acc.append((i, -1))
        rec(rest, acc, weight + dist_bnd[i])
        acc.pop()
        for k, j in enumerate(rest):
            acc.append((i, j))
            rec(rest[:k] + rest[k + 1:], acc, weight + dist_def[i, j])
            acc.pop()

    rec(list(range(m)), [], 0.0)
    return best[0]


def mwpm_decode(graph: MatchingGraph, defects: list[int]):
    """Minimum-weight perfect matching correction for a defect set."""
    return graph.decode(defects)
