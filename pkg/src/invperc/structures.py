"""Random trees, fixed-surplus graphs, kernel decompositions and line-breaking."""
from __future__ import annotations

import csv
import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .errors import DisconnectedGraphError, InvalidArgument, SamplingBudgetExceeded
from .graph import Edge, as_source, canonical

# ---------------------------------------------------------------- trees


def prufer_decode(sequence: Sequence[int], q: int | None = None) -> tuple[Edge, ...]:
    """Tree on [q] with the given Prufer sequence (q defaults to len + 2)."""
    seq = np.asarray(list(sequence), dtype=np.int64)
    q = len(seq) + 2 if q is None else int(q)
    if q < 1 or (q == 1 and len(seq)) or (q >= 2 and len(seq) != q - 2):
        raise InvalidArgument(f"a Prufer sequence for q={q} has length {max(q - 2, 0)}")
    if len(seq) and (seq.min() < 1 or seq.max() > q):
        raise InvalidArgument("Prufer labels must lie in [q]")
    parent, _ = _kernels.prufer_parents(seq, q)
    return tuple(sorted(canonical(v, int(parent[v])) for v in range(1, q)))


def prufer_encode(edges: Sequence[Edge], q: int) -> tuple[int, ...]:
    adj: dict[int, set[int]] = {v: set() for v in range(1, q + 1)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    if len(edges) != q - 1:
        raise InvalidArgument("a tree on [q] has q-1 edges")
    leaves = [v for v in adj if len(adj[v]) == 1]
    heapq.heapify(leaves)
    out = []
    for _ in range(q - 2):
        leaf = heapq.heappop(leaves)
        (nb,) = adj[leaf]
        out.append(nb)
        adj[nb].discard(leaf)
        if len(adj[nb]) == 1:
            heapq.heappush(leaves, nb)
    return tuple(out)


def _random_parents(q: int, rng: np.random.Generator):
    seq = rng.integers(1, q + 1, size=max(q - 2, 0))
    return _kernels.prufer_parents(seq, q)


def uniform_tree(q: int, seed) -> tuple[Edge, ...]:
    """Uniform labelled tree on [q] (decoded from q-2 uniform labels)."""
    if q < 1:
        raise InvalidArgument("q must be positive")
    rng = as_source(seed).generator()
    parent, _ = _random_parents(q, rng)
    return tuple(sorted(canonical(v, int(parent[v])) for v in range(1, q)))


# ---------------------------------------------------------------- surplus graphs


def _is_connected(q: int, edges) -> bool:
    adj = [[] for _ in range(q + 1)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * (q + 1)
    seen[1] = True
    stack = [1]
    count = 1
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if not seen[y]:
                seen[y] = True
                count += 1
                stack.append(y)
    return count == q


@dataclass(frozen=True)
class SurplusGraph:
    """A connected simple graph on [q]; ``attempts`` counts sampler proposals."""

    q: int
    edges: frozenset
    attempts: int = field(default=1, compare=False)

    def __post_init__(self):
        edges = frozenset(canonical(*e) for e in self.edges)
        if any(u == v or not (1 <= u <= self.q and 1 <= v <= self.q) for u, v in edges):
            raise InvalidArgument("edges must join distinct vertices of [q]")
        if len(edges) != len(self.edges):
            raise InvalidArgument("parallel edges are not allowed")
        if not _is_connected(self.q, edges):
            raise DisconnectedGraphError("a surplus graph must be connected")
        object.__setattr__(self, "edges", edges)

    @property
    def s(self) -> int:
        return len(self.edges) - self.q + 1


def _check_feasible(q: int, s: int) -> None:
    if q < 1 or s < 0:
        raise InvalidArgument("need q >= 1 and s >= 0")
    if s > q * (q - 1) // 2 - q + 1:
        raise InvalidArgument(f"no simple graph on {q} vertices has surplus {s}")


def _spanning_tree_count(q: int, edges) -> float:
    adj: dict[int, set[int]] = {}
    for u, v in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    cv = sorted(core_vertices(q, edges))
    index = {v: i for i, v in enumerate(cv)}
    lap = np.zeros((len(cv), len(cv)))
    for v in cv:
        for w in adj[v]:
            if w in index:
                lap[index[v], index[w]] = -1.0
                lap[index[v], index[v]] += 1.0
    sign, logdet = np.linalg.slogdet(lap[1:, 1:])
    return float(np.exp(logdet)) if sign > 0 else 0.0


def uniform_connected_surplus(q: int, s: int, seed, method: str = "spanning", max_attempts: int = 10**7) -> SurplusGraph:
    """Uniform connected simple graph on [q] with q-1+s edges.

    ``method="naive"`` proposes uniform (q-1+s)-edge graphs and keeps the
    first connected one; its acceptance rate vanishes quickly in q.
    ``method="spanning"`` proposes a uniform tree plus s uniform extra
    edges, which hits G with probability proportional to its number of
    spanning trees tau(G), and accepts with probability c/tau(G) where
    c <= tau(G) always (c = 3 for s = 1, c = s+1 otherwise).  Both are
    exact.
    """
    _check_feasible(q, s)
    rng = as_source(seed).generator()
    if s == 0:
        parent, _ = _random_parents(q, rng)
        return SurplusGraph(q, frozenset(canonical(v, int(parent[v])) for v in range(1, q)))
    if q < 3:
        raise InvalidArgument("surplus s >= 1 needs q >= 3")
    m = q - 1 + s
    if method == "naive":
        pairs = [(u, v) for u in range(1, q + 1) for v in range(u + 1, q + 1)]
        for attempt in range(1, max_attempts + 1):
            pick = rng.choice(len(pairs), size=m, replace=False)
            edges = [pairs[i] for i in pick]
            if _is_connected(q, edges):
                return SurplusGraph(q, frozenset(edges), attempts=attempt)
        raise SamplingBudgetExceeded(f"no connected graph after {max_attempts} proposals")
    if method != "spanning":
        raise InvalidArgument(f"unknown method {method!r}")
    c = 3.0 if s == 1 else float(s + 1)
    for attempt in range(1, max_attempts + 1):
        parent, order = _random_parents(q, rng)
        tree = {canonical(v, int(parent[v])) for v in range(1, q)}
        extra: set[Edge] = set()
        while len(extra) < s:
            a, b = (int(x) for x in rng.integers(1, q + 1, size=2))
            e = canonical(a, b)
            if a != b and e not in tree:
                extra.add(e)
        if s == 1:
            depth = _kernels.depths_from_order(parent, order, q)
            (a, b) = next(iter(extra))
            tau = _kernels.tree_distance(parent, depth, a, b) + 1
        else:
            tau = _spanning_tree_count(q, tree | extra)
        if rng.random() * tau < c:
            return SurplusGraph(q, frozenset(tree | extra), attempts=attempt)
    raise SamplingBudgetExceeded(f"no acceptance after {max_attempts} proposals")


# ---------------------------------------------------------------- core and kernel


def core_vertices(q: int, edges) -> frozenset[int]:
    """Repeatedly strip vertices of degree <= 1."""
    adj: dict[int, set[int]] = {v: set() for v in range(1, q + 1)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    degree = {v: len(nb) for v, nb in adj.items()}
    alive = set(adj)
    queue = deque(v for v in adj if degree[v] <= 1)
    while queue:
        v = queue.popleft()
        if v not in alive:
            continue
        alive.discard(v)
        for w in adj[v]:
            if w in alive:
                degree[w] -= 1
                if degree[w] == 1:
                    queue.append(w)
    return frozenset(alive)


def core(g: SurplusGraph) -> tuple[frozenset[int], frozenset[Edge]]:
    cv = core_vertices(g.q, g.edges)
    return cv, frozenset(e for e in g.edges if e[0] in cv and e[1] in cv)


class KernelEdge(NamedTuple):
    x: int
    y: int
    index: int  # multiplicity index among kernel edges joining x and y
    internal: tuple  # internal vertices of the contracted path, oriented from x

    @property
    def is_loop(self) -> bool:
        return self.x == self.y

    @property
    def ends(self) -> tuple:
        """(Z(e, x), Z(e, y)): internal vertices next to x and y, or None when there are none."""
        if not self.internal:
            return None, None
        return self.internal[0], self.internal[-1]

    def label(self) -> str:
        return f"{self.x}-{self.y}:{self.index}"


@dataclass(frozen=True)
class KernelDecomposition:
    q: int
    s: int
    core: frozenset
    vertices: tuple
    edges: tuple  # KernelEdge, sorted by (x, y, index)
    kappa: tuple  # kappa[v] is a kernel vertex (int) or a KernelEdge; index 0 unused
    graph_edges: frozenset = field(repr=False)

    def objects(self) -> list:
        return list(self.vertices) + list(self.edges)

    def parts(self) -> dict:
        out = {a: set() for a in self.objects()}
        for v in range(1, self.q + 1):
            out[self.kappa[v]].add(v)
        return {a: frozenset(vs) for a, vs in out.items()}

    def tree(self, a) -> frozenset[Edge]:
        part = self.parts()[a]
        return frozenset(e for e in self.graph_edges if e[0] in part and e[1] in part)

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["object_type", "id", "mass"])
        parts = self.parts()
        for a in self.objects():
            if isinstance(a, KernelEdge):
                w.writerow(["loop" if a.is_loop else "edge", a.label(), len(parts[a])])
            else:
                w.writerow(["vertex", a, len(parts[a])])


def _closest(q: int, adj, targets) -> list[int]:
    owner = [0] * (q + 1)
    queue = deque()
    for t in targets:
        owner[t] = t
        queue.append(t)
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if not owner[y]:
                owner[y] = owner[x]
                queue.append(y)
    return owner


def _contract(adj, skeleton: set[int], branch: set[int]) -> list[KernelEdge]:
    """Contract the paths of ``skeleton`` whose internal vertices avoid ``branch``."""
    raw: dict[tuple, list[tuple]] = {}
    used: set[tuple[int, int]] = set()
    for x in sorted(branch):
        for y in sorted(adj[x]):
            if y not in skeleton or (x, y) in used:
                continue
            path = [x, y]
            while path[-1] not in branch:
                a, b = path[-2], path[-1]
                (nxt,) = [z for z in adj[b] if z in skeleton and z != a]
                path.append(nxt)
            used.add((x, path[1]))
            used.add((path[-1], path[-2]))
            if path[0] > path[-1] or (path[0] == path[-1] and path[::-1] < path):
                path.reverse()
            raw.setdefault((path[0], path[-1]), []).append(tuple(path[1:-1]))
    out = []
    for (x, y), internals in sorted(raw.items()):
        for i, internal in enumerate(sorted(internals)):
            out.append(KernelEdge(x, y, i, internal))
    return out


def kernel(g: SurplusGraph) -> KernelDecomposition:
    """Kernel multigraph and attachment map kappa.

    For s >= 2 the kernel contracts the degree-2 paths of the core.  For
    s = 1 it contracts core+ (the cycle plus the path from q to the
    cycle) into a loop at c(q) and, if q is off the cycle, an edge from
    c(q) to q; vertices are attached through their closest core+ vertex
    so that the path to q carries its own hanging trees.
    """
    q, s = g.q, g.s
    if s < 1:
        raise InvalidArgument("the kernel needs surplus at least 1")
    adj: list[list[int]] = [[] for _ in range(q + 1)]
    for u, v in g.edges:
        adj[u].append(v)
        adj[v].append(u)
    cv = core_vertices(q, g.edges)
    if s == 1:
        owner = _closest(q, adj, cv)
        cq = owner[q]
        skeleton = set(cv)
        prev = _bfs_prev(adj, q, cv)
        x = cq
        while x != q:
            x = prev[x]
            skeleton.add(x)
        branch = {cq, q}
    else:
        skeleton = set(cv)
        branch = {v for v in cv if sum(1 for w in adj[v] if w in cv) >= 3}
    edges = _contract(adj, skeleton, branch)
    owner = _closest(q, adj, skeleton)
    location: dict[int, object] = {v: v for v in branch}
    for e in edges:
        for v in e.internal:
            location[v] = e
    kappa = (None,) + tuple(location[owner[v]] for v in range(1, q + 1))
    return KernelDecomposition(q, s, cv, tuple(sorted(branch)), tuple(edges), kappa, g.edges)


def _bfs_prev(adj, start: int, targets) -> dict[int, int]:
    """Predecessor map of a BFS from ``start`` stopped at the first target."""
    prev = {start: start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        if x in targets:
            return prev
        for y in adj[x]:
            if y not in prev:
                prev[y] = x
                queue.append(y)
    raise DisconnectedGraphError("no target reachable")


def mass_vector(kd: KernelDecomposition) -> list[float]:
    """|V_q(e)| / q over kernel edges in lexicographic order."""
    parts = kd.parts()
    return [len(parts[e]) / kd.q for e in kd.edges]


def dirichlet_length(s: int) -> int:
    return 2 * s - 1 + (1 if s == 1 else 0)


# ---------------------------------------------------------------- line-breaking


@dataclass(frozen=True)
class ContinuumTree:
    """Segments 0..r of the line-breaking tree.

    Segment 0 runs from U (position 0) to W (position pi_0); segment j >= 1
    starts at position ``offsets[j]`` of segment ``hosts[j]`` and ends at
    leaf j.
    """

    draws: np.ndarray
    pi: np.ndarray
    hosts: np.ndarray
    offsets: np.ndarray

    @property
    def r(self) -> int:
        return len(self.pi) - 1

    def _point(self, leaf) -> tuple[int, float]:
        if leaf == "U":
            return 0, 0.0
        if leaf == "W":
            return 0, float(self.pi[0])
        if not 1 <= leaf <= self.r:
            raise InvalidArgument(f"no leaf {leaf!r}")
        return int(leaf), float(self.pi[leaf])

    def _chain(self, seg: int, pos: float) -> dict[int, tuple[float, float]]:
        # segment -> (position reached on it, distance travelled to get there)
        out = {}
        travelled = 0.0
        while True:
            out[seg] = (pos, travelled)
            if seg == 0:
                return out
            travelled += pos
            seg, pos = int(self.hosts[seg]), float(self.offsets[seg])

    def distance(self, a, b) -> float:
        ca = self._chain(*self._point(a))
        cb = self._chain(*self._point(b))
        meet = max(set(ca) & set(cb))  # hosts precede their children
        (pa, da), (pb, db) = ca[meet], cb[meet]
        return da + db + abs(pa - pb)


def segment_lengths(draws: Sequence[float]) -> np.ndarray:
    e = np.asarray(draws, dtype=float)
    if len(e) == 0 or np.any(e <= 0):
        raise InvalidArgument("exponential draws must be positive")
    atoms = np.sqrt(2.0 * np.cumsum(e))
    return np.diff(np.concatenate([[0.0], atoms]))


def line_breaking(r: int, seed=None, draws: Sequence[float] | None = None) -> ContinuumTree:
    """Line-breaking tree with r+2 leaves.

    Attachment points are length-uniform: segment i is chosen with
    probability proportional to pi_i, then a uniform position on it.
    """
    if r < 0:
        raise InvalidArgument("r must be non-negative")
    rng = as_source(0 if seed is None else seed).generator()
    if draws is None:
        draws = rng.exponential(size=r + 1)
    elif len(draws) != r + 1:
        raise InvalidArgument("line-breaking with r branches needs r+1 draws")
    pi = segment_lengths(draws)
    cum = np.cumsum(pi)
    x = rng.random(r) * cum[:r]
    hosts = np.concatenate([[-1], np.searchsorted(cum, x, side="right")]).astype(np.int64)
    start = np.concatenate([[0.0], cum])
    offsets = np.concatenate([[0.0], x - start[hosts[1:]]])
    return ContinuumTree(np.asarray(draws, dtype=float), pi, hosts, offsets)


def continuum_u_sets(t: ContinuumTree) -> tuple[set[int], set[int]]:
    """Branches hanging directly off the U-third (resp. W-third) of P_0 with length <= 1 and nothing attached."""
    r = t.r
    hosted = set(int(h) for h in t.hosts[1:])
    third = t.pi[0] / 3
    u1, u3 = set(), set()
    for i in range(1, r + 1):
        if t.hosts[i] != 0 or i in hosted or t.pi[i] > 1:
            continue
        if t.offsets[i] <= third:
            u1.add(i)
        if t.pi[0] - t.offsets[i] <= third:
            u3.add(i)
    return u1, u3


# ---------------------------------------------------------------- discrete distances


def rooted_uniform_tree(q: int, rng: np.random.Generator):
    """Parent and depth arrays of a uniform tree on [q] rooted at q."""
    parent, order = _random_parents(q, rng)
    return parent, _kernels.depths_from_order(parent, order, q)


def _pick_uw(q: int, r: int, rng: np.random.Generator) -> tuple[int, int]:
    if q < r + 2:
        raise InvalidArgument("need q >= r + 2")
    u, w = rng.choice(np.arange(r + 1, q + 1), size=2, replace=False)
    return int(u), int(w)


def uw_distances(q: int, samples: int, seed, r: int = 0) -> np.ndarray:
    """dist(U, W) in uniform trees on [q], U != W uniform on {r+1, ..., q}."""
    rng = as_source(seed).generator()
    out = np.empty(samples, dtype=np.int64)
    for k in range(samples):
        parent, depth = rooted_uniform_tree(q, rng)
        u, w = _pick_uw(q, r, rng)
        out[k] = _kernels.tree_distance(parent, depth, u, w)
    return out


def leaf_distances(q: int, r: int, samples: int, seed) -> np.ndarray:
    """Pairwise distances among U, W, 1..r; one row per sample, pairs in ``leaf_pairs(r)`` order."""
    rng = as_source(seed).generator()
    pairs = leaf_pairs(r)
    out = np.empty((samples, len(pairs)), dtype=np.int64)
    for k in range(samples):
        parent, depth = rooted_uniform_tree(q, rng)
        u, w = _pick_uw(q, r, rng)
        where = {"U": u, "W": w}
        for j, (a, b) in enumerate(pairs):
            out[k, j] = _kernels.tree_distance(parent, depth, where.get(a, a), where.get(b, b))
    return out


def leaf_pairs(r: int) -> list[tuple]:
    labels = ["U", "W", *range(1, r + 1)]
    return [(labels[i], labels[j]) for i in range(len(labels)) for j in range(i + 1, len(labels))]


def middle_third_length(d: int) -> int:
    """Number of edges of the middle third of a path of length d."""
    return (2 * d) // 3 - d // 3


def continuum_distance_check(q: int, r: int, samples: int, seed) -> float:
    """KS distance of q^(-1/2) dist(U, W) to the law of pi_0."""
    from .stats import ks_statistic, rayleigh_cdf

    if samples < 1:
        raise InvalidArgument("need at least one sample")
    d = uw_distances(q, samples, seed, r)
    return ks_statistic(d / math.sqrt(q), rayleigh_cdf)
