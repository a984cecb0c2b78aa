"""Compiled inner loops.

Everything here works on plain integer/float arrays with 1-based vertex
ids (index 0 unused) so that the public modules can stay readable.
"""
import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True)
def splitmix64(z):
    z = z + _GOLDEN
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(cache=True)
def edge_weight(key, u, v):
    """Uniform weight in (0, 1) for the pair {u, v}; a pure function of (key, u, v)."""
    if u > v:
        u, v = v, u
    x = (np.uint64(u) << _S32) | np.uint64(v)
    h = splitmix64(np.uint64(key) ^ splitmix64(x))
    return ((h >> _S11) + 0.5) * _INV53


@njit(cache=True)
def all_pair_weights(n, key):
    m = n * (n - 1) // 2
    us = np.empty(m, np.int64)
    vs = np.empty(m, np.int64)
    ws = np.empty(m, np.float64)
    t = 0
    for u in range(1, n + 1):
        for v in range(u + 1, n + 1):
            us[t] = u
            vs[t] = v
            ws[t] = edge_weight(key, u, v)
            t += 1
    return us, vs, ws


@njit(cache=True)
def pairs_below(n, key, p):
    """Pairs of the implicit complete graph whose weight is at most p."""
    cap = 1024
    us = np.empty(cap, np.int64)
    vs = np.empty(cap, np.int64)
    ws = np.empty(cap, np.float64)
    t = 0
    for u in range(1, n + 1):
        for v in range(u + 1, n + 1):
            w = edge_weight(key, u, v)
            if w <= p:
                if t == cap:
                    cap *= 2
                    us2 = np.empty(cap, np.int64)
                    vs2 = np.empty(cap, np.int64)
                    ws2 = np.empty(cap, np.float64)
                    us2[:t] = us[:t]
                    vs2[:t] = vs[:t]
                    ws2[:t] = ws[:t]
                    us, vs, ws = us2, vs2, ws2
                us[t] = u
                vs[t] = v
                ws[t] = w
                t += 1
    return us[:t], vs[:t], ws[:t]


@njit(cache=True)
def stream_prim(n, key, is_source):
    """Multi-source invasion on the implicit complete graph.

    Keeps, for each uninvaded vertex, its cheapest edge into the invaded
    set; weights are generated on demand, so memory is O(n).  Returns the
    invaded vertices in order, their invading neighbours, the edge weights
    and a flag that is set if two candidate weights ever compared equal.
    """
    outside = np.empty(n, np.int64)
    m = 0
    for v in range(1, n + 1):
        if not is_source[v]:
            outside[m] = v
            m += 1
    best = np.full(m, np.inf)
    bestp = np.zeros(m, np.int64)
    tie = False
    for s in range(1, n + 1):
        if not is_source[s]:
            continue
        for i in range(m):
            w = edge_weight(key, s, outside[i])
            if w < best[i]:
                best[i] = w
                bestp[i] = s
            elif w == best[i]:
                tie = True
    steps = m
    child = np.empty(steps, np.int64)
    parent = np.empty(steps, np.int64)
    weight = np.empty(steps, np.float64)
    for step in range(steps):
        bi = 0
        bw = best[0]
        for i in range(1, m):
            if best[i] < bw:
                bw = best[i]
                bi = i
            elif best[i] == bw:
                tie = True
        v = outside[bi]
        child[step] = v
        parent[step] = bestp[bi]
        weight[step] = bw
        m -= 1
        outside[bi] = outside[m]
        best[bi] = best[m]
        bestp[bi] = bestp[m]
        for i in range(m):
            w = edge_weight(key, v, outside[i])
            if w < best[i]:
                best[i] = w
                bestp[i] = v
            elif w == best[i]:
                tie = True
    return child, parent, weight, tie


@njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def kruskal_sorted(n, us, vs, source_label, allow_cycles):
    """Constrained Kruskal (allow_cycles=False) or constrained ER process.

    Edges must already be in increasing weight order.  Verdicts:
    0 accepted, 1 rejected (cycle), 2 rejected (would merge two sources).
    Also returns the final root of every vertex.
    """
    parent = np.arange(n + 1)
    size = np.ones(n + 1, np.int64)
    label = source_label.copy()
    verdict = np.empty(len(us), np.int8)
    for i in range(len(us)):
        ru = _find(parent, us[i])
        rv = _find(parent, vs[i])
        if ru == rv:
            verdict[i] = 0 if allow_cycles else 1
            continue
        if label[ru] != 0 and label[rv] != 0:
            verdict[i] = 2
            continue
        if size[ru] < size[rv]:
            ru, rv = rv, ru
        parent[rv] = ru
        size[ru] += size[rv]
        if label[ru] == 0:
            label[ru] = label[rv]
        verdict[i] = 0
    roots = np.empty(n + 1, np.int64)
    roots[0] = 0
    for v in range(1, n + 1):
        roots[v] = _find(parent, v)
    return verdict, roots


@njit(cache=True)
def prufer_parents(seq, q):
    """Linear-time Prufer decoding; the tree comes out rooted at q.

    Returns parent pointers and the order in which vertices were removed
    (every vertex appears before its parent).
    """
    degree = np.ones(q + 1, np.int64)
    for a in seq:
        degree[a] += 1
    parent = np.zeros(q + 1, np.int64)
    order = np.empty(max(q - 1, 0), np.int64)
    if q < 2:
        return parent, order
    ptr = 1
    while degree[ptr] != 1:
        ptr += 1
    leaf = ptr
    for i in range(len(seq)):
        a = seq[i]
        parent[leaf] = a
        order[i] = leaf
        degree[a] -= 1
        if a < ptr and degree[a] == 1:
            leaf = a
        else:
            ptr += 1
            while degree[ptr] != 1:
                ptr += 1
            leaf = ptr
    parent[leaf] = q
    order[q - 2] = leaf
    return parent, order


@njit(cache=True)
def depths_from_order(parent, order, root):
    depth = np.zeros(len(parent), np.int64)
    depth[root] = 0
    for i in range(len(order) - 1, -1, -1):
        v = order[i]
        depth[v] = depth[parent[v]] + 1
    return depth


@njit(cache=True)
def tree_distance(parent, depth, a, b):
    d = 0
    while depth[a] > depth[b]:
        a = parent[a]
        d += 1
    while depth[b] > depth[a]:
        b = parent[b]
        d += 1
    while a != b:
        a = parent[a]
        b = parent[b]
        d += 2
    return d


@njit(cache=True)
def run_cut_table(cut, inits, perms):
    """Path-breaking on a small tree encoded by edge bitmasks.

    cut[mask, j] says whether edge j is removed when the present edges are
    `mask`.  Runs every ordering in `perms` from every initial mask.
    """
    out = np.empty((len(inits), perms.shape[0]), np.int64)
    for h in range(len(inits)):
        for p in range(perms.shape[0]):
            state = inits[h]
            for t in range(perms.shape[1]):
                j = perms[p, t]
                if cut[state, j]:
                    state = state ^ (1 << j)
            out[h, p] = state
    return out
