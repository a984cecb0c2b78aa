"""Growth processes on weighted graphs and the couplings between them.

All processes treat a ``SourceSet`` as any iterable of distinct vertices.
"""
from __future__ import annotations

import csv
import heapq
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import ConsistencyError, DisconnectedGraphError, DuplicateWeightError, InvalidArgument
from .graph import (
    ComponentIndex,
    CompleteGraph,
    Edge,
    Forest,
    WeightedGraph,
    canonical,
    ranked_components,
    sorted_edges,
)

ACCEPTED = "accepted"
REJECTED_CYCLE = "rejected-cycle"
REJECTED_MERGE = "rejected-source-merge"


class Step(NamedTuple):
    step: int
    u: int
    v: int
    weight: float
    verdict: str


@dataclass(frozen=True)
class ProcessTrace:
    kind: str  # "kruskal" or "er"
    n: int
    sources: frozenset
    steps: tuple

    def accepted(self) -> list[Step]:
        return [s for s in self.steps if s.verdict == ACCEPTED]

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "edge_u", "edge_v", "weight", "verdict"])
        for s in self.steps:
            w.writerow([s.step, s.u, s.v, repr(s.weight), s.verdict])

    @classmethod
    def read_csv(cls, fh, kind: str, n: int, sources=()) -> ProcessTrace:
        rows = list(csv.DictReader(fh))
        steps = tuple(
            Step(int(r["step"]), int(r["edge_u"]), int(r["edge_v"]), float(r["weight"]), r["verdict"]) for r in rows
        )
        return cls(kind, n, frozenset(sources), steps)


def _check_sources(n: int, sources) -> frozenset:
    src = list(sources)
    if not src:
        raise InvalidArgument("the source set must be nonempty")
    if len(set(src)) != len(src):
        raise InvalidArgument("sources must be distinct")
    if any(not 1 <= s <= n for s in src):
        raise InvalidArgument("sources must lie in [n]")
    return frozenset(src)


def invasion_percolation(g, sources, strict: bool = True) -> Forest:
    """Repeatedly add the cheapest edge leaving the invaded set.

    On the implicit complete graph this streams weights (O(n) memory).
    With ``strict=False`` a disconnected input yields the forest grown
    until the frontier is empty.
    """
    src = _check_sources(g.n, sources)
    if isinstance(g, CompleteGraph):
        mask = np.zeros(g.n + 1, dtype=np.bool_)
        mask[list(src)] = True
        child, parent, _, tie = _kernels.stream_prim(g.n, g.key, mask)
        if tie:
            raise DuplicateWeightError("tied candidate weights during invasion")
        return Forest(g.n, frozenset(zip(parent.tolist(), child.tolist())), src)

    adj: list[list[tuple[float, int]]] = [[] for _ in range(g.n + 1)]
    for e in g.edges():
        adj[e.u].append((e.weight, e.v))
        adj[e.v].append((e.weight, e.u))
    invaded = [False] * (g.n + 1)
    frontier: list[tuple[float, int, int]] = []
    for s in src:
        invaded[s] = True
    for s in src:
        for w, x in adj[s]:
            if not invaded[x]:
                heapq.heappush(frontier, (w, s, x))
    added = []
    while frontier and len(added) < g.n - len(src):
        w, a, b = heapq.heappop(frontier)
        if invaded[b]:
            continue
        invaded[b] = True
        added.append((a, b))
        for w2, x in adj[b]:
            if not invaded[x]:
                heapq.heappush(frontier, (w2, b, x))
    if strict and len(added) < g.n - len(src):
        raise DisconnectedGraphError("some vertices are unreachable from the sources")
    return Forest(g.n, frozenset(added), src)


def augmented_prim(g, sources, strict: bool = True) -> Forest:
    """Single-source Prim from an extra root joined to every source.

    The root edges get keys ``(-1, s)``, which order below every real
    weight ``(0, w)`` without choosing a numeric epsilon.
    """
    src = _check_sources(g.n, sources)
    if isinstance(g, CompleteGraph):
        g = g.materialize()
    root = 0
    adj: list[list[tuple[tuple, int]]] = [[] for _ in range(g.n + 1)]
    for s in src:
        adj[root].append(((-1, s), s))
    for e in g.edges():
        adj[e.u].append(((0, e.weight), e.v))
        adj[e.v].append(((0, e.weight), e.u))
    in_tree = [False] * (g.n + 1)
    in_tree[root] = True
    heap = [(key, root, x) for key, x in adj[root]]
    heapq.heapify(heap)
    tree = []
    while heap:
        key, a, b = heapq.heappop(heap)
        if in_tree[b]:
            continue
        in_tree[b] = True
        tree.append((a, b))
        for key2, x in adj[b]:
            if not in_tree[x]:
                heapq.heappush(heap, (key2, b, x))
    if strict and len(tree) < g.n:
        raise DisconnectedGraphError("some vertices are unreachable from the sources")
    return Forest(g.n, frozenset(e for e in tree if root not in e), src)


def kruskal_constrained(g, sources) -> tuple[Forest, ProcessTrace]:
    """Kruskal's algorithm that never joins two source-holding components."""
    src = _check_sources(g.n, sources)
    index = ComponentIndex(g.n, src)
    steps = []
    kept = []
    for i, e in enumerate(sorted_edges(g), start=1):
        if index.same(e.u, e.v):
            verdict = REJECTED_CYCLE
        elif index.merges_sources(e.u, e.v):
            verdict = REJECTED_MERGE
        else:
            index.union(e.u, e.v)
            kept.append((e.u, e.v))
            verdict = ACCEPTED
        steps.append(Step(i, e.u, e.v, e.weight, verdict))
    return Forest(g.n, frozenset(kept), src), ProcessTrace("kruskal", g.n, src, tuple(steps))


def er_constrained_process(g, sources) -> ProcessTrace:
    """Add edges in weight order, rejecting only those that would join two sources."""
    src = _check_sources(g.n, sources)
    index = ComponentIndex(g.n, src)
    steps = []
    for i, e in enumerate(sorted_edges(g), start=1):
        if index.merges_sources(e.u, e.v):
            verdict = REJECTED_MERGE
        else:
            index.union(e.u, e.v)
            verdict = ACCEPTED
        steps.append(Step(i, e.u, e.v, e.weight, verdict))
    return ProcessTrace("er", g.n, src, tuple(steps))


def p_critical(n: int, lam: float) -> float:
    """Edge probability 1/n + lam / n^(4/3) inside the critical window."""
    if n < 1:
        raise InvalidArgument("n must be positive")
    root = round(n ** (1 / 3))
    cube_root = float(root) if root**3 == n else n ** (1 / 3)
    p = 1.0 / n + lam / (n * cube_root)
    if not 0 < p < 1:
        raise InvalidArgument(f"p_(n,lambda) = {p} is outside (0, 1) for n={n}, lambda={lam}")
    return p


def snapshot_at_p(trace: ProcessTrace, p: float):
    """Accepted edges of weight <= p: a Forest (Kruskal) or a WeightedGraph (ER)."""
    if not 0 <= p <= 1:
        raise InvalidArgument("p must lie in [0, 1]")
    kept = [s for s in trace.accepted() if s.weight <= p]
    if trace.kind == "kruskal":
        return Forest(trace.n, frozenset((s.u, s.v) for s in kept), trace.sources)
    return WeightedGraph(trace.n, [(s.u, s.v, s.weight) for s in kept])


def _forest_path(forest: Forest, a: int, b: int) -> list[int]:
    adj: dict[int, list[int]] = {}
    for u, v in forest.edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    prev = {a: a}
    stack = [a]
    while stack:
        x = stack.pop()
        if x == b:
            break
        for y in adj.get(x, ()):
            if y not in prev:
                prev[y] = x
                stack.append(y)
    if b not in prev:
        raise ConsistencyError(f"{a} and {b} are not connected")
    path = [b]
    while path[-1] != a:
        path.append(prev[path[-1]])
    return path[::-1]


def add_source_coupling(g, sources, z: int) -> Edge:
    """The edge removed from F(G, S') when z joins the source set S'.

    This is the heaviest edge on the forest path from z to the source
    sharing its component.
    """
    src = _check_sources(g.n, sources)
    if z in src:
        raise InvalidArgument(f"{z} is already a source")
    if not 1 <= z <= g.n:
        raise InvalidArgument("z must lie in [n]")
    forest, _ = kruskal_constrained(g, src)
    owner = next((s for s in src if forest.connected(s, z)), None)
    if owner is None:
        raise DisconnectedGraphError(f"{z} shares a component with no source")
    path = _forest_path(forest, owner, z)
    return max((canonical(a, b) for a, b in zip(path, path[1:])), key=lambda e: g.weight(*e))


def coupling_replay_holds(g, sources, z: int, edge: Edge | None = None) -> bool:
    """Step-by-step check of the single-source coupling.

    F_i for S' + z must equal F_i for S' before the coupling edge's step
    and F_i for S' minus that edge from then on.
    """
    if edge is None:
        edge = add_source_coupling(g, sources, z)
    edge = canonical(*edge)
    _, base = kruskal_constrained(g, sources)
    _, more = kruskal_constrained(g, set(sources) | {z})
    j = next(s.step for s in base.steps if (s.u, s.v) == edge)
    for a, b in zip(base.steps, more.steps):
        if a.step == j:
            if a.verdict != ACCEPTED or b.verdict == ACCEPTED:
                return False
        elif (a.verdict == ACCEPTED) != (b.verdict == ACCEPTED):
            return False
    return True


def _labels(index: ComponentIndex, n: int) -> tuple[int, ...]:
    smallest: dict[int, int] = {}
    out = []
    for v in range(1, n + 1):
        out.append(smallest.setdefault(index.find(v), v))
    return tuple(out)


def partitions_agree(a: ProcessTrace, b: ProcessTrace) -> bool:
    """True iff two traces over the same edge order have equal component partitions after every step.

    Partitions only change at merging steps, so comparing full labelings
    at each step where either trace merges covers every step.
    """
    if a.n != b.n or len(a.steps) != len(b.steps):
        return False
    ia, ib = ComponentIndex(a.n), ComponentIndex(b.n)
    for sa, sb in zip(a.steps, b.steps):
        if (sa.u, sa.v) != (sb.u, sb.v):
            return False
        changed = False
        for idx, s in ((ia, sa), (ib, sb)):
            if s.verdict == ACCEPTED and not idx.same(s.u, s.v):
                idx.union(s.u, s.v)
                changed = True
        if changed and _labels(ia, a.n) != _labels(ib, b.n):
            return False
    return True


def largest_in_component_of(forest_s: Forest, forest_1: Forest, i: int, rng: np.random.Generator | None = None) -> int:
    """Largest component of ``forest_s`` lying inside the i-th largest component of ``forest_1``.

    ``forest_1`` is ranked with a uniform random tie-break when ``rng`` is
    given.  Returns 0 when ``forest_1`` has fewer than i components.
    """
    if i < 1:
        raise InvalidArgument("i is 1-based")
    if forest_s.n != forest_1.n:
        raise InvalidArgument("forests on different vertex sets")
    host_of = forest_1.labels
    for comp in forest_s.component_sets():
        if len({host_of[v] for v in comp}) != 1:
            raise ConsistencyError("constrained components do not refine the unconstrained ones")
    ranked = ranked_components(forest_1, rng)
    if i > len(ranked):
        return 0
    target = ranked[i - 1]
    return max(len(c) for c in forest_s.component_sets() if next(iter(c)) in target)


__all__ = [
    "ACCEPTED",
    "REJECTED_CYCLE",
    "REJECTED_MERGE",
    "ProcessTrace",
    "Step",
    "add_source_coupling",
    "augmented_prim",
    "coupling_replay_holds",
    "er_constrained_process",
    "invasion_percolation",
    "kruskal_constrained",
    "largest_in_component_of",
    "p_critical",
    "partitions_agree",
    "snapshot_at_p",
]
