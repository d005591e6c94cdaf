"""Hot inner loops, jitted with numba when available.

All kernels are pure functions of their array arguments plus caller-supplied
uniforms, so the jitted and pure-Python paths are bit-identical.
"""
from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


SNAP = 1e-12


def build_csr(n_vertices: int, endpoint_a: np.ndarray, endpoint_b: np.ndarray):
    """CSR incidence of an undirected bipartite edge list over one vertex space."""
    m = len(endpoint_a)
    deg = np.zeros(n_vertices, dtype=np.int64)
    for x in (endpoint_a, endpoint_b):
        np.add.at(deg, x, 1)
    indptr = np.zeros(n_vertices + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    incid = np.empty(2 * m, dtype=np.int64)
    cursor = indptr[:-1].copy()
    for x in (endpoint_a, endpoint_b):
        for e in range(m):
            w = x[e]
            incid[cursor[w]] = e
            cursor[w] += 1
    # sort each vertex's incident edges so walks are lexicographic
    for w in range(n_vertices):
        incid[indptr[w]:indptr[w + 1]].sort()
    return indptr, incid


@njit(cache=True)
def _other_end(e, w, eu, ev):
    return ev[e] if eu[e] == w else eu[e]


@njit(cache=True)
def _next_frac_edge(w, prev_e, indptr, incid, frac_flag):
    """Smallest fractional edge at w other than prev_e, or -1."""
    for k in range(indptr[w], indptr[w + 1]):
        e = incid[k]
        if e != prev_e and frac_flag[e]:
            return e
    return -1


@njit(cache=True)
def _frac_degree(w, indptr, incid, frac_flag):
    d = 0
    for k in range(indptr[w], indptr[w + 1]):
        if frac_flag[incid[k]]:
            d += 1
    return d


@njit(cache=True)
def _pipage_shift(path_edges, n_path, frac, frac_flag, u):
    """One expectation-preserving shift along an alternating path/cycle.

    Even positions move together (+alpha / -beta), odd positions oppositely.
    Returns the number of edges that hit an integer bound.
    """
    alpha = 2.0
    beta = 2.0
    for i in range(n_path):
        x = frac[path_edges[i]]
        if i % 2 == 0:
            if 1.0 - x < alpha:
                alpha = 1.0 - x
            if x < beta:
                beta = x
        else:
            if x < alpha:
                alpha = x
            if 1.0 - x < beta:
                beta = 1.0 - x
    move_up = u < beta / (alpha + beta)
    step = alpha if move_up else -beta
    fixed = 0
    for i in range(n_path):
        e = path_edges[i]
        frac[e] += step if i % 2 == 0 else -step
        if frac[e] < SNAP:
            frac[e] = 0.0
            frac_flag[e] = False
            fixed += 1
        elif frac[e] > 1.0 - SNAP:
            frac[e] = 1.0
            frac_flag[e] = False
            fixed += 1
    return fixed


@njit(cache=True)
def _find_cycle(eu, ev, indptr, incid, frac_flag, path_buf):
    """DFS over the whole fractional subgraph; returns cycle length (0 if the
    subgraph is a forest). Writes the cycle's edges into path_buf."""
    nv = len(indptr) - 1
    parent_edge = np.full(nv, -2, dtype=np.int64)  # -2 unvisited, -1 root
    stack_v = np.empty(nv + 1, dtype=np.int64)
    for root in range(nv):
        if parent_edge[root] != -2 or _frac_degree(root, indptr, incid, frac_flag) == 0:
            continue
        parent_edge[root] = -1
        stack_v[0] = root
        top = 0
        while top >= 0:
            w = stack_v[top]
            advanced = False
            for k in range(indptr[w], indptr[w + 1]):
                e = incid[k]
                if not frac_flag[e] or e == parent_edge[w]:
                    continue
                x = _other_end(e, w, eu, ev)
                if parent_edge[x] == -2:
                    parent_edge[x] = e
                    top += 1
                    stack_v[top] = x
                    advanced = True
                    break
                elif parent_edge[x] == e:
                    continue  # tree edge into an already-explored child
                else:
                    # back edge: reconstruct cycle w -> ... -> x plus e
                    n_path = 0
                    y = w
                    while y != x:
                        pe = parent_edge[y]
                        path_buf[n_path] = pe
                        n_path += 1
                        y = _other_end(pe, y, eu, ev)
                    path_buf[n_path] = e
                    n_path += 1
                    return n_path
            if not advanced:
                top -= 1
    return 0


@njit(cache=True)
def dr_round_core(eu, ev, indptr, incid, frac, uniforms):
    """Round fractional residues to {0,1} by bipartite dependent rounding.

    frac is modified in place; returns the number of uniforms consumed.
    Cycles are cancelled first (every vertex interior), then maximal tree
    paths, so per-vertex sums stay within one unit of their start throughout.
    """
    m = len(eu)
    frac_flag = np.empty(m, dtype=np.bool_)
    for e in range(m):
        if frac[e] < SNAP:
            frac[e] = 0.0
            frac_flag[e] = False
        elif frac[e] > 1.0 - SNAP:
            frac[e] = 1.0
            frac_flag[e] = False
        else:
            frac_flag[e] = True
    path_buf = np.empty(m + 1, dtype=np.int64)
    uc = 0
    # cycle phase: cancel cycles anywhere in the fractional subgraph
    while True:
        n_path = _find_cycle(eu, ev, indptr, incid, frac_flag, path_buf)
        if n_path == 0:
            break
        _pipage_shift(path_buf, n_path, frac, frac_flag, uniforms[uc])
        uc += 1
    # tree phase: walk maximal paths from the smallest fractional edge
    e0 = 0
    while True:
        while e0 < m and not frac_flag[e0]:
            e0 += 1
        if e0 >= m:
            break
        n_path = 1
        path_buf[0] = e0
        # extend from the v side
        w = ev[e0]
        prev = e0
        while True:
            nxt = _next_frac_edge(w, prev, indptr, incid, frac_flag)
            if nxt < 0:
                break
            path_buf[n_path] = nxt
            n_path += 1
            w = _other_end(nxt, w, eu, ev)
            prev = nxt
        # extend from the u side: reverse then append
        for i in range(n_path // 2):
            tmp = path_buf[i]
            path_buf[i] = path_buf[n_path - 1 - i]
            path_buf[n_path - 1 - i] = tmp
        w = eu[e0]
        prev = e0
        while True:
            nxt = _next_frac_edge(w, prev, indptr, incid, frac_flag)
            if nxt < 0:
                break
            path_buf[n_path] = nxt
            n_path += 1
            w = _other_end(nxt, w, eu, ev)
            prev = nxt
        _pipage_shift(path_buf, n_path, frac, frac_flag, uniforms[uc])
        uc += 1
    return uc


@njit(cache=True)
def color_core(cu, cv, n_u, n_v, k):
    """Color a bipartite multigraph with max degree <= k using k colors.

    cu/cv list edge copies; offline and online vertices index disjoint tables.
    Free colors always exist while coloring copy i because its endpoints have
    colored degree <= k-1. When u's free color a is busy at v, the (a,b)
    alternating path from v is flipped; in a bipartite graph that path cannot
    reach u, so a becomes free at both ends.
    """
    nc = len(cu)
    busy_u = np.full((n_u, k), -1, dtype=np.int64)
    busy_v = np.full((n_v, k), -1, dtype=np.int64)
    color = np.full(nc, -1, dtype=np.int64)
    path = np.empty(nc + 1, dtype=np.int64)
    for i in range(nc):
        a = -1
        for c in range(k):
            if busy_u[cu[i], c] == -1:
                a = c
                break
        b = -1
        for c in range(k):
            if busy_v[cv[i], c] == -1:
                b = c
                break
        if a == -1 or b == -1:
            raise ValueError("multigraph degree exceeds k")
        if busy_v[cv[i], a] != -1 and busy_u[cu[i], b] == -1:
            a = b  # b is free at both ends; use it directly
        if busy_v[cv[i], a] != -1:
            # collect the (a,b)-alternating path starting at v with an a-edge
            n_path = 0
            w = cv[i]
            on_v = True
            want = a
            while True:
                j = busy_v[w, want] if on_v else busy_u[w, want]
                if j == -1:
                    break
                path[n_path] = j
                n_path += 1
                w = cu[j] if on_v else cv[j]
                on_v = not on_v
                want = b if want == a else a
            # flip colors along the path (two passes keep the tables sound)
            for t in range(n_path):
                j = path[t]
                c_old = color[j]
                busy_u[cu[j], c_old] = -1
                busy_v[cv[j], c_old] = -1
            for t in range(n_path):
                j = path[t]
                c_new = b if color[j] == a else a
                color[j] = c_new
                busy_u[cu[j], c_new] = j
                busy_v[cv[j], c_new] = j
        color[i] = a
        busy_u[cu[i], a] = i
        busy_v[cv[i], a] = i
    return color


@njit(cache=True)
def rla_play_core(arrivals, slot_u, slot_edge, slot_prob, n_slots,
                  uniforms, matched, edge_hits):
    """One RLA trial: per arrival sample a preference list and take the first
    free entry; a drop slot (u == -1) absorbs the arrival."""
    n = len(arrivals)
    for t in range(n):
        v = arrivals[t]
        ns = n_slots[v]
        if ns == 0:
            continue
        if ns == 1:
            o0, o1, o2 = 0, -1, -1
        elif ns == 2:
            if uniforms[t, 0] < slot_prob[v, 0]:
                o0, o1, o2 = 0, 1, -1
            else:
                o0, o1, o2 = 1, 0, -1
        else:
            x = uniforms[t, 0]
            if x < slot_prob[v, 0]:
                o0 = 0
            elif x < slot_prob[v, 0] + slot_prob[v, 1]:
                o0 = 1
            else:
                o0 = 2
            j = (o0 + 1) % 3
            kk = (o0 + 2) % 3
            pj = slot_prob[v, j]
            pk = slot_prob[v, kk]
            tot = pj + pk
            if tot <= 0.0:
                o1, o2 = j, kk
            elif uniforms[t, 1] < pj / tot:
                o1, o2 = j, kk
            else:
                o1, o2 = kk, j
        for s in (o0, o1, o2):
            if s < 0:
                break
            u = slot_u[v, s]
            if u == -1:
                break  # drop entry absorbs the arrival
            if not matched[u]:
                matched[u] = True
                edge_hits[slot_edge[v, s]] += 1
                break
