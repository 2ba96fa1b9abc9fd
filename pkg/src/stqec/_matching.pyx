# cython: language_level=3, boundscheck=False, wraparound=True, cdivision=True
"""Exact maximum-weight perfect matching on dense complete graphs.

Array-based port of the classic Galil/Edmonds primal-dual blossom
algorithm (the van Rantwijk formulation used by networkx), specialised to
complete graphs given as a dense weight matrix.  Vertices are 0..n-1,
blossom slots n..2n-1.  Used by the decoder to pair syndrome defects;
exactness is cross-checked against exhaustive search in the test suite.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int32_t, int64_t, int8_t, uint8_t


cdef class _Matcher:
    cdef int n, nb
    cdef double[:, ::1] w
    cdef int32_t[::1] mate
    cdef int8_t[::1] label
    cdef int32_t[::1] ledge_v
    cdef int32_t[::1] ledge_w
    cdef int32_t[::1] inblossom
    cdef int32_t[::1] blossomparent
    cdef int32_t[::1] blossombase
    cdef int64_t[::1] bestedge
    cdef double[::1] dualvar
    cdef uint8_t[::1] allowedge
    cdef public list blossomchilds
    cdef public list blossomedges
    cdef list mybestedges
    cdef list queue
    cdef list unused

    def __init__(self, double[:, ::1] w):
        cdef int n = w.shape[0]
        self.n = n
        self.nb = 2 * n
        self.w = w
        self.mate = np.full(n, -1, dtype=np.int32)
        self.label = np.zeros(2 * n, dtype=np.int8)
        self.ledge_v = np.full(2 * n, -1, dtype=np.int32)
        self.ledge_w = np.full(2 * n, -1, dtype=np.int32)
        self.inblossom = np.arange(n, dtype=np.int32)
        self.blossomparent = np.full(2 * n, -1, dtype=np.int32)
        self.blossombase = np.concatenate([
            np.arange(n, dtype=np.int32),
            np.full(n, -1, dtype=np.int32)])
        self.bestedge = np.full(2 * n, -1, dtype=np.int64)
        dv = np.empty(2 * n, dtype=np.float64)
        cdef double maxw = 0.0
        cdef int i, j
        for i in range(n):
            for j in range(n):
                if i != j and w[i, j] > maxw:
                    maxw = w[i, j]
        dv[:n] = maxw
        dv[n:] = 0.0
        self.dualvar = dv
        self.allowedge = np.zeros(n * n, dtype=np.uint8)
        self.blossomchilds = [None] * (2 * n)
        self.blossomedges = [None] * (2 * n)
        self.mybestedges = [None] * (2 * n)
        self.queue = []
        self.unused = list(range(n, 2 * n))

    cdef inline double slack(self, int v, int x):
        return self.dualvar[v] + self.dualvar[x] - 2.0 * self.w[v, x]

    cdef list leaves(self, int b):
        if b < self.n:
            return [b]
        out = []
        stack = list(self.blossomchilds[b])
        cdef int t
        while stack:
            t = stack.pop()
            if t < self.n:
                out.append(t)
            else:
                stack.extend(self.blossomchilds[t])
        return out

    cdef void assign_label(self, int x, int t, int v):
        cdef int b = self.inblossom[x]
        self.label[x] = self.label[b] = t
        if v >= 0:
            self.ledge_v[x] = self.ledge_v[b] = v
            self.ledge_w[x] = self.ledge_w[b] = x
        else:
            self.ledge_v[x] = self.ledge_v[b] = -1
            self.ledge_w[x] = self.ledge_w[b] = -1
        self.bestedge[x] = self.bestedge[b] = -1
        cdef int base
        if t == 1:
            self.queue.extend(self.leaves(b))
        elif t == 2:
            base = self.blossombase[b]
            self.assign_label(self.mate[base], 1, base)

    cdef int scan_blossom(self, int v, int x):
        """Trace back from v and x; return new blossom base or -1."""
        path = []
        cdef int base = -1
        cdef int b
        while v >= 0:
            b = self.inblossom[v]
            if self.label[b] & 4:
                base = self.blossombase[b]
                break
            path.append(b)
            self.label[b] = 5
            if self.ledge_v[b] < 0:
                v = -1
            else:
                v = self.ledge_v[b]
                b = self.inblossom[v]
                v = self.ledge_v[b]
            if x >= 0:
                v, x = x, v
        for b in path:
            self.label[b] = 1
        return base

    cdef void add_blossom(self, int base, int v, int x):
        cdef int bb = self.inblossom[base]
        cdef int bv = self.inblossom[v]
        cdef int bw = self.inblossom[x]
        cdef int b = self.unused.pop()
        self.blossombase[b] = base
        self.blossomparent[b] = -1
        self.blossomparent[bb] = b
        path = []
        edgs = [(v, x)]
        while bv != bb:
            self.blossomparent[bv] = b
            path.append(bv)
            edgs.append((self.ledge_v[bv], self.ledge_w[bv]))
            v = self.ledge_v[bv]
            bv = self.inblossom[v]
        path.append(bb)
        path.reverse()
        edgs.reverse()
        while bw != bb:
            self.blossomparent[bw] = b
            path.append(bw)
            edgs.append((self.ledge_w[bw], self.ledge_v[bw]))
            x = self.ledge_v[bw]
            bw = self.inblossom[x]
        self.blossomchilds[b] = path
        self.blossomedges[b] = edgs
        self.label[b] = 1
        self.ledge_v[b] = self.ledge_v[bb]
        self.ledge_w[b] = self.ledge_w[bb]
        self.dualvar[b] = 0.0
        cdef int leaf
        for leaf in self.leaves(b):
            if self.label[self.inblossom[leaf]] == 2:
                self.queue.append(leaf)
            self.inblossom[leaf] = b
        # Least-slack edges to other S-blossoms.
        bestedgeto = {}
        cdef int child, i, j, bj
        cdef list nblist
        for child in path:
            if child >= self.n and self.mybestedges[child] is not None:
                nblist = self.mybestedges[child]
                self.mybestedges[child] = None
            else:
                nblist = []
                for i in self.leaves(child):
                    for j in range(self.n):
                        if j != i:
                            nblist.append((i, j))
            for (i, j) in nblist:
                if self.inblossom[j] == b:
                    i, j = j, i
                bj = self.inblossom[j]
                if bj != b and self.label[bj] == 1:
                    prev = bestedgeto.get(bj)
                    if prev is None or self.slack(i, j) < self.slack(prev[0], prev[1]):
                        bestedgeto[bj] = (i, j)
            self.bestedge[child] = -1
        mbe = list(bestedgeto.values())
        self.mybestedges[b] = mbe
        self.bestedge[b] = -1
        cdef double kslack, mybestslack = 0.0
        cdef int have = 0
        for (i, j) in mbe:
            kslack = self.slack(i, j)
            if not have or kslack < mybestslack:
                mybestslack = kslack
                self.bestedge[b] = i * self.n + j
                have = 1

    def expand_blossom(self, int b, bint endstage):
        cdef int s, v, x, p, q, bw, bv, j, jstep, entrychild
        for s in self.blossomchilds[b]:
            self.blossomparent[s] = -1
            if s < self.n:
                self.inblossom[s] = s
            elif endstage and self.dualvar[s] == 0.0:
                self.expand_blossom(s, endstage)
            else:
                for v in self.leaves(s):
                    self.inblossom[v] = s
        if (not endstage) and self.label[b] == 2:
            entrychild = self.inblossom[self.ledge_w[b]]
            childs = self.blossomchilds[b]
            edges = self.blossomedges[b]
            j = childs.index(entrychild)
            if j & 1:
                j -= len(childs)
                jstep = 1
            else:
                jstep = -1
            v = self.ledge_v[b]
            x = self.ledge_w[b]
            while j != 0:
                if jstep == 1:
                    p, q = edges[j]
                else:
                    q, p = edges[j - 1]
                self.label[x] = 0
                self.label[q] = 0
                self.assign_label(x, 2, v)
                self.allowedge[p * self.n + q] = 1
                self.allowedge[q * self.n + p] = 1
                j += jstep
                if jstep == 1:
                    v, x = edges[j]
                else:
                    x, v = edges[j - 1]
                self.allowedge[v * self.n + x] = 1
                self.allowedge[x * self.n + v] = 1
                j += jstep
            bw = childs[j]
            self.label[x] = self.label[bw] = 2
            self.ledge_v[x] = self.ledge_v[bw] = v
            self.ledge_w[x] = self.ledge_w[bw] = x
            self.bestedge[bw] = -1
            j += jstep
            while childs[j] != entrychild:
                bv = childs[j]
                if self.label[bv] == 1:
                    j += jstep
                    continue
                v = -1
                for leaf in self.leaves(bv):
                    if self.label[leaf] != 0:
                        v = leaf
                        break
                if v >= 0:
                    self.label[v] = 0
                    self.label[self.mate[self.blossombase[bv]]] = 0
                    self.assign_label(v, 2, self.ledge_v[v])
                j += jstep
        self.label[b] = 0
        self.ledge_v[b] = self.ledge_w[b] = -1
        self.bestedge[b] = -1
        self.blossomparent[b] = -1
        self.blossombase[b] = -1
        self.dualvar[b] = 0.0
        self.blossomchilds[b] = None
        self.blossomedges[b] = None
        self.mybestedges[b] = None
        self.unused.append(b)

    def augment_blossom(self, int b, int v):
        cdef int t, i, j, jstep, wv, xv
        # Bubble up from v to an immediate sub-blossom of b.
        t = v
        while self.blossomparent[t] != b:
            t = self.blossomparent[t]
        if t >= self.n:
            self.augment_blossom(t, v)
        childs = self.blossomchilds[b]
        edges = self.blossomedges[b]
        i = j = childs.index(t)
        if i & 1:
            j -= len(childs)
            jstep = 1
        else:
            jstep = -1
        while j != 0:
            j += jstep
            t = childs[j]
            if jstep == 1:
                wv, xv = edges[j]
            else:
                xv, wv = edges[j - 1]
            if t >= self.n:
                self.augment_blossom(t, wv)
            j += jstep
            t = childs[j]
            if t >= self.n:
                self.augment_blossom(t, xv)
            self.mate[wv] = xv
            self.mate[xv] = wv
        self.blossomchilds[b] = childs[i:] + childs[:i]
        self.blossomedges[b] = edges[i:] + edges[:i]
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]]

    cdef void augment_matching(self, int v, int x):
        cdef int s, j, bs, t, bt
        for s, j in ((v, x), (x, v)):
            while True:
                bs = self.inblossom[s]
                if bs >= self.n:
                    self.augment_blossom(bs, s)
                self.mate[s] = j
                if self.ledge_v[bs] < 0:
                    break
                t = self.ledge_v[bs]
                bt = self.inblossom[t]
                s = self.ledge_v[bt]
                j = self.ledge_w[bt]
                if bt >= self.n:
                    self.augment_blossom(bt, j)
                self.mate[j] = s

    def solve(self):
        cdef int n = self.n
        cdef int t, v, x, bv, bw, base, b
        cdef double kslack, delta, d
        cdef int deltatype, delta_v, delta_w, deltablossom
        cdef bint augmented
        cdef int64_t be

        for t in range(n):
            self.label[:] = 0
            self.bestedge[:] = -1
            for b in range(n, 2 * n):
                self.mybestedges[b] = None
            self.allowedge[:] = 0
            self.queue = []
            for v in range(n):
                if self.mate[v] == -1 and self.label[self.inblossom[v]] == 0:
                    self.assign_label(v, 1, -1)
            augmented = False
            while True:
                while self.queue and not augmented:
                    v = self.queue.pop()
                    bv = self.inblossom[v]
                    for x in range(n):
                        if x == v:
                            continue
                        bw = self.inblossom[x]
                        if bv == bw:
                            continue
                        if not self.allowedge[v * n + x]:
                            kslack = self.slack(v, x)
                            if kslack <= 0.0:
                                self.allowedge[v * n + x] = 1
                                self.allowedge[x * n + v] = 1
                        if self.allowedge[v * n + x]:
                            if self.label[bw] == 0:
                                self.assign_label(x, 2, v)
                            elif self.label[bw] == 1:
                                base = self.scan_blossom(v, x)
                                if base >= 0:
                                    self.add_blossom(base, v, x)
                                    bv = self.inblossom[v]
                                else:
                                    self.augment_matching(v, x)
                                    augmented = True
                                    break
                            elif self.label[x] == 0:
                                self.label[x] = 2
                                self.ledge_v[x] = v
                                self.ledge_w[x] = x
                        elif self.label[bw] == 1:
                            be = self.bestedge[bv]
                            if be < 0 or kslack < self.slack(
                                    <int>(be // n), <int>(be % n)):
                                self.bestedge[bv] = v * n + x
                        elif self.label[x] == 0:
                            be = self.bestedge[x]
                            if be < 0 or kslack < self.slack(
                                    <int>(be // n), <int>(be % n)):
                                self.bestedge[x] = v * n + x
                if augmented:
                    break

                deltatype = -1
                delta = 0.0
                delta_v = delta_w = deltablossom = -1
                # delta2: least slack from an S-vertex to a free vertex.
                for v in range(n):
                    if self.label[self.inblossom[v]] == 0 and self.bestedge[v] >= 0:
                        be = self.bestedge[v]
                        d = self.slack(<int>(be // n), <int>(be % n))
                        if deltatype == -1 or d < delta:
                            delta = d
                            deltatype = 2
                            delta_v = <int>(be // n)
                            delta_w = <int>(be % n)
                # delta3: half least slack between S-blossoms.
                for b in range(2 * n):
                    if (self.blossomparent[b] == -1 and self.label[b] == 1
                            and self.bestedge[b] >= 0):
                        be = self.bestedge[b]
                        d = self.slack(<int>(be // n), <int>(be % n)) / 2.0
                        if deltatype == -1 or d < delta:
                            delta = d
                            deltatype = 3
                            delta_v = <int>(be // n)
                            delta_w = <int>(be % n)
                # delta4: least dual of a top-level T-blossom.
                for b in range(n, 2 * n):
                    if (self.blossombase[b] >= 0 and self.blossomparent[b] == -1
                            and self.label[b] == 2):
                        if deltatype == -1 or self.dualvar[b] < delta:
                            delta = self.dualvar[b]
                            deltatype = 4
                            deltablossom = b
                if deltatype == -1:
                    # Max-cardinality optimum reached.
                    deltatype = 1
                    delta = 0.0
                    for v in range(n):
                        if deltatype == 1 and (v == 0 or self.dualvar[v] < delta):
                            delta = self.dualvar[v]
                    if delta < 0.0:
                        delta = 0.0

                for v in range(n):
                    bv = self.inblossom[v]
                    if self.label[bv] == 1:
                        self.dualvar[v] -= delta
                    elif self.label[bv] == 2:
                        self.dualvar[v] += delta
                for b in range(n, 2 * n):
                    if self.blossombase[b] >= 0 and self.blossomparent[b] == -1:
                        if self.label[b] == 1:
                            self.dualvar[b] += delta
                        elif self.label[b] == 2:
                            self.dualvar[b] -= delta

                if deltatype == 1:
                    break
                elif deltatype == 2:
                    self.allowedge[delta_v * n + delta_w] = 1
                    self.allowedge[delta_w * n + delta_v] = 1
                    self.queue.append(delta_v)
                elif deltatype == 3:
                    self.allowedge[delta_v * n + delta_w] = 1
                    self.allowedge[delta_w * n + delta_v] = 1
                    self.queue.append(delta_v)
                elif deltatype == 4:
                    self.expand_blossom(deltablossom, False)

            if not augmented:
                break
            # Expand S-blossoms whose dual fell to zero.
            for b in range(n, 2 * n):
                if (self.blossombase[b] >= 0 and self.blossomparent[b] == -1
                        and self.label[b] == 1 and self.dualvar[b] == 0.0):
                    self.expand_blossom(b, True)

        return np.asarray(self.mate)


def max_weight_perfect_matching_dense(w: np.ndarray) -> np.ndarray:
    """Mate array of a maximum-weight perfect matching of a complete graph.

    The input is a symmetric non-negative dense weight matrix with an even
    number of vertices.  Runs the primal-dual blossom algorithm in
    max-cardinality mode, so a perfect matching is always returned.
    """
    w = np.ascontiguousarray(w, dtype=np.float64)
    if w.shape[0] != w.shape[1]:
        raise ValueError("weight matrix must be square")
    if w.shape[0] % 2:
        raise ValueError("perfect matching needs an even vertex count")
    if w.shape[0] == 0:
        return np.zeros(0, dtype=np.int32)
    return _Matcher(w).solve()
