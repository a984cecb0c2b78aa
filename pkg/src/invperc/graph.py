"""Weighted graphs, forests and seeded randomness shared by every process.

Vertices are the integers 1..n.  Edges are identified by their canonical
pair ``(u, v)`` with ``u < v``.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import _kernels
from .errors import ConsistencyError, DuplicateWeightError, InvalidArgument

Edge = tuple[int, int]


def canonical(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def _stream_word(x) -> int:
    if isinstance(x, float):
        return struct.unpack("<Q", struct.pack("<d", x))[0]
    if isinstance(x, str):
        return int.from_bytes(x.encode(), "little")
    x = int(x)
    if x < 0:
        raise InvalidArgument(f"stream ids must be non-negative, got {x}")
    return x


@dataclass(frozen=True)
class RandomSource:
    """A (master seed, stream id) pair that deterministically names a generator.

    Stream ids are tuples so that sweeps can derive per-replicate streams
    as ``source.child(n, replicate)`` without any shared state.
    """

    seed: int
    stream: tuple = ()

    def child(self, *ids) -> RandomSource:
        return RandomSource(self.seed, self.stream + tuple(_stream_word(i) for i in ids))

    def _sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(entropy=int(self.seed) % 2**64, spawn_key=self.stream)

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(self._sequence())

    def key64(self) -> int:
        return int(self._sequence().generate_state(1, np.uint64)[0])


def as_source(seed) -> RandomSource:
    if isinstance(seed, RandomSource):
        return seed
    if seed is None:
        raise InvalidArgument("a seed is required")
    return RandomSource(int(seed))


class WeightedEdge(NamedTuple):
    u: int
    v: int
    weight: float


class WeightedGraph:
    """Explicit graph on [n] with an edge list and pairwise distinct weights."""

    mode = "explicit"

    def __init__(self, n: int, edges: Iterable[Sequence] = ()):
        if n < 1:
            raise InvalidArgument("a graph needs at least one vertex")
        rows = [(int(a), int(b), float(w)) for a, b, w in edges]
        us = np.array([min(a, b) for a, b, _ in rows], dtype=np.int64)
        vs = np.array([max(a, b) for a, b, _ in rows], dtype=np.int64)
        ws = np.array([w for _, _, w in rows], dtype=np.float64)
        self._init_arrays(n, us, vs, ws)

    @classmethod
    def from_arrays(cls, n: int, us, vs, ws) -> WeightedGraph:
        g = cls.__new__(cls)
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        g._init_arrays(n, np.minimum(us, vs), np.maximum(us, vs), np.asarray(ws, dtype=np.float64))
        return g

    def _init_arrays(self, n, us, vs, ws):
        if n < 1:
            raise InvalidArgument("a graph needs at least one vertex")
        if len(us) and (us.min() < 1 or vs.max() > n):
            raise InvalidArgument("edge endpoint outside [n]")
        if np.any(us == vs):
            raise InvalidArgument("self-loops are not allowed")
        if len(np.unique(us * (n + 1) + vs)) != len(us):
            raise InvalidArgument("parallel edges are not allowed")
        if len(np.unique(ws)) != len(ws):
            raise DuplicateWeightError("edge weights must be pairwise distinct")
        self.n = int(n)
        self.us, self.vs, self.ws = us, vs, ws

    @property
    def num_edges(self) -> int:
        return len(self.us)

    @cached_property
    def _index(self) -> dict[Edge, float]:
        return {(int(a), int(b)): float(w) for a, b, w in zip(self.us, self.vs, self.ws)}

    def weight(self, u: int, v: int) -> float:
        try:
            return self._index[canonical(u, v)]
        except KeyError:
            raise InvalidArgument(f"no edge {u}-{v}") from None

    def has_edge(self, u: int, v: int) -> bool:
        return canonical(u, v) in self._index

    def edges(self) -> list[WeightedEdge]:
        return [WeightedEdge(int(a), int(b), float(w)) for a, b, w in zip(self.us, self.vs, self.ws)]

    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self._index)

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n + 1)]
        for a, b in zip(self.us.tolist(), self.vs.tolist()):
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def is_connected(self) -> bool:
        return len(Forest.spanning(self.n, self._index).labels_set()) == 1

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, m={self.num_edges})"


class CompleteGraph:
    """K_n with Uniform(0,1) weights hashed from (seed, u, v), never stored."""

    mode = "implicit-complete"

    def __init__(self, n: int, seed):
        if n < 1:
            raise InvalidArgument("n must be at least 1")
        self.n = int(n)
        self.source = as_source(seed)
        self.key = np.uint64(self.source.key64())

    @property
    def num_edges(self) -> int:
        return self.n * (self.n - 1) // 2

    def weight(self, u: int, v: int) -> float:
        if u == v or not (1 <= u <= self.n and 1 <= v <= self.n):
            raise InvalidArgument(f"no edge {u}-{v}")
        return float(_kernels.edge_weight(self.key, u, v))

    def has_edge(self, u: int, v: int) -> bool:
        return u != v and 1 <= u <= self.n and 1 <= v <= self.n

    def arrays(self):
        return _kernels.all_pair_weights(self.n, self.key)

    def edges(self) -> list[WeightedEdge]:
        us, vs, ws = self.arrays()
        return [WeightedEdge(a, b, w) for a, b, w in zip(us.tolist(), vs.tolist(), ws.tolist())]

    def materialize(self) -> WeightedGraph:
        return WeightedGraph.from_arrays(self.n, *self.arrays())

    def adjacency(self) -> list[list[int]]:
        return [[]] + [[v for v in range(1, self.n + 1) if v != u] for u in range(1, self.n + 1)]

    def is_connected(self) -> bool:
        return True

    def __repr__(self):
        return f"CompleteGraph(n={self.n}, seed={self.source})"


def complete_graph_uniform(n: int, seed) -> CompleteGraph:
    return CompleteGraph(n, seed)


def _edge_arrays(g):
    if isinstance(g, CompleteGraph):
        return g.arrays()
    return g.us, g.vs, g.ws


def sorted_edges(g) -> list[WeightedEdge]:
    """The increasing-weight permutation of the edge set."""
    us, vs, ws = _edge_arrays(g)
    order = np.argsort(ws, kind="stable")
    sw = ws[order]
    if len(sw) > 1 and np.any(sw[1:] == sw[:-1]):
        raise DuplicateWeightError("tied edge weights")
    return [WeightedEdge(a, b, w) for a, b, w in zip(us[order].tolist(), vs[order].tolist(), sw.tolist())]


def _sample_pairs(n: int, m: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    # Distinct pairs taken in order of first appearance among i.i.d. uniform
    # draws: the result is a uniform m-subset of the pairs.
    us = np.empty(0, np.int64)
    vs = np.empty(0, np.int64)
    while len(us) < m:
        need = m - len(us)
        a = rng.integers(1, n + 1, size=need + need // 8 + 16)
        b = rng.integers(1, n + 1, size=len(a))
        keep = a != b
        a, b = np.minimum(a[keep], b[keep]), np.maximum(a[keep], b[keep])
        us, vs = np.concatenate([us, a]), np.concatenate([vs, b])
        _, first = np.unique(us * (n + 1) + vs, return_index=True)
        first.sort()
        us, vs = us[first], vs[first]
    return us[:m], vs[:m]


def window_arrays(n: int, p_max: float, seed, method: str = "direct"):
    """Edges with weight <= p_max, as arrays sorted by weight."""
    if not 0 < p_max <= 1:
        raise InvalidArgument(f"p_max must lie in (0, 1], got {p_max}")
    source = as_source(seed)
    if method == "implicit":
        us, vs, ws = _kernels.pairs_below(n, np.uint64(source.key64()), p_max)
    elif method == "direct":
        rng = source.generator()
        total = n * (n - 1) // 2
        m = int(rng.binomial(total, p_max)) if total else 0
        if p_max == 1:
            m = total
        if m == total:
            us, vs, _ = _kernels.all_pair_weights(n, np.uint64(0))
        else:
            us, vs = _sample_pairs(n, m, rng)
        ws = p_max * (1.0 - rng.random(len(us)))
    else:
        raise InvalidArgument(f"unknown window method {method!r}")
    order = np.argsort(ws, kind="stable")
    us, vs, ws = us[order], vs[order], ws[order]
    if len(ws) > 1 and np.any(ws[1:] == ws[:-1]):
        raise DuplicateWeightError("tied edge weights in the window sample")
    return us, vs, ws


def sample_critical_window(n: int, p_max: float, seed, method: str = "direct") -> WeightedGraph:
    """The subgraph {e : U_e <= p_max} of a uniformly weighted K_n.

    ``method="implicit"`` filters the hashed weights of
    ``complete_graph_uniform(n, seed)`` and is O(n^2); the default draws
    the edge count, a uniform set of pairs and Uniform(0, p_max] weights
    directly, which has the same law in O(n p_max n) time.
    """
    return WeightedGraph.from_arrays(n, *window_arrays(n, p_max, seed, method))


class ComponentIndex:
    """Union-find over [n] that remembers which source (if any) each root holds."""

    def __init__(self, n: int, sources: Iterable[int] = ()):
        self.parent = list(range(n + 1))
        self.size = [1] * (n + 1)
        self.source = [0] * (n + 1)
        for s in sources:
            if self.source[s]:
                raise InvalidArgument(f"source {s} listed twice")
            self.source[s] = s

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def same(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)

    def source_of(self, x: int) -> int:
        """The source in x's component, or 0."""
        return self.source[self.find(x)]

    def merges_sources(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        return ra != rb and self.source[ra] != 0 and self.source[rb] != 0

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.source[ra] and self.source[rb]:
            raise ConsistencyError(f"union would join sources {self.source[ra]} and {self.source[rb]}")
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.source[ra] = self.source[ra] or self.source[rb]
        return ra


@dataclass(frozen=True)
class Forest:
    """An acyclic edge set on [n], optionally with the source set it was grown from."""

    n: int
    edges: frozenset = field(default_factory=frozenset)
    sources: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(canonical(*e) for e in self.edges))
        object.__setattr__(self, "sources", frozenset(self.sources))
        index = ComponentIndex(self.n)
        for u, v in self.edges:
            if not (1 <= u <= self.n and 1 <= v <= self.n) or u == v:
                raise InvalidArgument(f"bad forest edge {u}-{v}")
            if index.same(u, v):
                raise InvalidArgument(f"edge {u}-{v} closes a cycle")
            index.union(u, v)
        seen = {}
        for s in self.sources:
            root = index.find(s)
            if root in seen:
                raise ConsistencyError(f"sources {seen[root]} and {s} share a component")
            seen[root] = s
        object.__setattr__(self, "_index", index)

    @classmethod
    def spanning(cls, n: int, edges: Iterable[Edge]) -> Forest:
        """Forest whose components are those of an arbitrary edge set (a spanning forest of it)."""
        index = ComponentIndex(n)
        kept = []
        for u, v in edges:
            if not index.same(u, v):
                index.union(u, v)
                kept.append((u, v))
        return cls(n, frozenset(kept))

    def find(self, v: int) -> int:
        return self._index.find(v)

    @cached_property
    def labels(self) -> tuple[int, ...]:
        """Smallest vertex of each vertex's component (index 0 unused)."""
        smallest: dict[int, int] = {}
        roots = [0] + [self._index.find(v) for v in range(1, self.n + 1)]
        for v in range(1, self.n + 1):
            smallest.setdefault(roots[v], v)
        return (0,) + tuple(smallest[roots[v]] for v in range(1, self.n + 1))

    def labels_set(self) -> set[int]:
        return set(self.labels[1:])

    def component_sets(self) -> list[frozenset[int]]:
        groups: dict[int, list[int]] = {}
        for v in range(1, self.n + 1):
            groups.setdefault(self.labels[v], []).append(v)
        return [frozenset(g) for g in groups.values()]

    def component_of(self, v: int) -> frozenset[int]:
        lab = self.labels[v]
        return frozenset(w for w in range(1, self.n + 1) if self.labels[w] == lab)

    def connected(self, a: int, b: int) -> bool:
        return self._index.same(a, b)

    def __len__(self):
        return len(self.edges)


def components(f: Forest) -> list[int]:
    """Component sizes in descending order."""
    return sorted((len(c) for c in f.component_sets()), reverse=True)


def ranked_components(f: Forest, rng: np.random.Generator | None = None) -> list[frozenset[int]]:
    """Components by decreasing size.

    Equal sizes are ordered by smallest vertex label, or uniformly at
    random when a generator is given.
    """
    comps = sorted(f.component_sets(), key=min)
    if rng is None:
        return sorted(comps, key=len, reverse=True)
    tiebreak = rng.permutation(len(comps))
    order = sorted(range(len(comps)), key=lambda i: (-len(comps[i]), tiebreak[i]))
    return [comps[i] for i in order]


def read_graph(path) -> WeightedGraph:
    """Parse the text format: ``n m`` then m lines ``u v weight``."""
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or len(lines[0]) != 2:
        raise InvalidArgument("first line must be 'n m'")
    n, m = int(lines[0][0]), int(lines[0][1])
    rows = lines[1:]
    if len(rows) != m:
        raise InvalidArgument(f"header announces {m} edges, found {len(rows)}")
    edges = []
    for row in rows:
        if len(row) != 3:
            raise InvalidArgument(f"bad edge line: {' '.join(row)}")
        edges.append((int(row[0]), int(row[1]), float(row[2])))
    return WeightedGraph(n, edges)


def write_graph(g, path) -> None:
    out = [f"{g.n} {g.num_edges}"]
    out += [f"{e.u} {e.v} {e.weight!r}" for e in g.edges()]
    Path(path).write_text("\n".join(out) + "\n")
