"""Path-and-cycle-breaking, and the tree bookkeeping used to analyse it.

Trees and graphs are passed as collections of vertex pairs.  Orderings
are sequences of such pairs; times are 1-based positions in the ordering.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import DisconnectedGraphError, InvalidArgument
from .graph import Edge, Forest, canonical


def _adjacency(edges: Iterable[Edge], vertices: Iterable[int] = ()) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {v: set() for v in vertices}
    for u, v in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    return adj


def _bfs_parents(adj: dict[int, set[int]], root: int) -> dict[int, int]:
    parent = {root: root}
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in parent:
                parent[y] = x
                queue.append(y)
    return parent


def path_edges(path: Sequence[int]) -> frozenset[Edge]:
    return frozenset(canonical(a, b) for a, b in zip(path, path[1:]))


def tree_path(edges: Iterable[Edge], a: int, b: int) -> tuple[int, ...]:
    """Vertex sequence of the a-b path in a tree."""
    parent = _bfs_parents(_adjacency(edges, (a, b)), a)
    if b not in parent:
        raise DisconnectedGraphError(f"{a} and {b} are in different components")
    path = [b]
    while path[-1] != a:
        path.append(parent[path[-1]])
    return tuple(reversed(path))


@dataclass(frozen=True)
class Hull:
    vertices: frozenset
    edges: frozenset
    anchors: frozenset


def hull(edges: Iterable[Edge], anchors: Iterable[int], vertices: Iterable[int] = ()) -> Hull:
    """Smallest subtree containing every anchor (union of paths to one anchor)."""
    anchors = frozenset(anchors)
    if not anchors:
        raise InvalidArgument("the anchor set must be nonempty")
    edges = [canonical(*e) for e in edges]
    adj = _adjacency(edges, vertices)
    missing = anchors - adj.keys()
    if missing:
        raise InvalidArgument(f"anchors {sorted(missing)} are not vertices of the tree")
    root = min(anchors)
    parent = _bfs_parents(adj, root)
    keep_v = {root}
    keep_e = set()
    for s in anchors:
        if s not in parent:
            raise DisconnectedGraphError("anchors lie in different components")
        x = s
        while x not in keep_v:
            keep_v.add(x)
            keep_e.add(canonical(x, parent[x]))
            x = parent[x]
    return Hull(frozenset(keep_v), frozenset(keep_e), anchors)


def restrict_ordering(ordering: Sequence[Edge], subset: Iterable[Edge]) -> list[Edge]:
    keep = {canonical(*e) for e in subset}
    return [e for e in ordering if canonical(*e) in keep]


def _side(adj: dict[int, set[int]], start: int, stop: int) -> tuple[bool, set[int]]:
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y == stop:
                return True, seen
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return False, seen


def breaking_steps(
    edges: Iterable[Edge], sources: Iterable[int], ordering: Sequence[Edge], vertices: Iterable[int] = ()
) -> Iterator[tuple[int, Edge, bool]]:
    """Yield ``(t, e_t, removed)`` for path-and-cycle-breaking.

    At time t the edge e_t is deleted when it lies on a cycle of the
    current graph or on a path joining two distinct sources.
    """
    edges = {canonical(*e) for e in edges}
    order = [canonical(*e) for e in ordering]
    if len(order) != len(edges) or set(order) != edges:
        raise InvalidArgument("the ordering must be a permutation of the edge set")
    sources = frozenset(sources)
    adj = _adjacency(edges, set(vertices) | sources)
    if adj:
        start = next(iter(adj))
        if len(_bfs_parents(adj, start)) != len(adj):
            raise DisconnectedGraphError("path-and-cycle-breaking needs a connected graph")
    for t, (a, b) in enumerate(order, start=1):
        adj[a].discard(b)
        adj[b].discard(a)
        on_cycle, side_a = _side(adj, a, b)
        removed = on_cycle
        if not on_cycle and not sources.isdisjoint(side_a):
            _, side_b = _side(adj, b, a)
            removed = not sources.isdisjoint(side_b)
        if not removed:
            adj[a].add(b)
            adj[b].add(a)
        yield t, (a, b), removed


def path_and_cycle_break(
    edges: Iterable[Edge], sources: Iterable[int], ordering: Sequence[Edge], vertices: Iterable[int] = ()
) -> Forest:
    edges = [canonical(*e) for e in edges]
    sources = frozenset(sources)
    labels = set(vertices) | sources | {x for e in edges for x in e}
    kept = set(edges)
    for _, e, removed in breaking_steps(edges, sources, ordering, vertices):
        if removed:
            kept.discard(e)
    return Forest(max(labels), frozenset(kept), sources)


@dataclass(frozen=True)
class RelabeledHull:
    """Hull of {U, W} and [r], relabelled so that U = r+1, W = r+2."""

    edges: frozenset
    r: int
    size: int
    ordering: tuple
    mapping: dict

    @property
    def U(self) -> int:
        return self.r + 1

    @property
    def W(self) -> int:
        return self.r + 2

    def leaves(self) -> set[int]:
        adj = _adjacency(self.edges, range(1, self.size + 1))
        return {v for v, nb in adj.items() if len(nb) <= 1}


def relabel_hull(
    edges: Iterable[Edge], r: int, u: int, w: int, ordering: Sequence[Edge] = (), vertices: Iterable[int] = ()
) -> RelabeledHull:
    if u == w:
        raise InvalidArgument("U and W must differ")
    if 1 <= u <= r or 1 <= w <= r:
        raise InvalidArgument("U and W must lie outside [r]")
    edges = [canonical(*e) for e in edges]
    h = hull(edges, {u, w, *range(1, r + 1)}, vertices)
    others = sorted(h.vertices - {u, w} - set(range(1, r + 1)))
    mapping = {i: i for i in range(1, r + 1)}
    mapping[u] = r + 1
    mapping[w] = r + 2
    mapping.update({x: r + 3 + j for j, x in enumerate(others)})
    new_edges = frozenset(canonical(mapping[a], mapping[b]) for a, b in h.edges)
    new_order = tuple(canonical(mapping[a], mapping[b]) for a, b in restrict_ordering(ordering, h.edges))
    return RelabeledHull(new_edges, r, len(h.edges) + 1, new_order, mapping)


@dataclass(frozen=True)
class BranchDecomposition:
    """P_0 is the U-W path; P_i joins leaf i to the hull of U, W, 1..i-1 at alpha_i."""

    paths: tuple
    attachments: tuple  # attachments[i] = alpha_i, attachments[0] is None

    def edge_sets(self) -> list[frozenset[Edge]]:
        return [path_edges(p) for p in self.paths]


def branch_decomposition(edges: Iterable[Edge], r: int, U: int | None = None, W: int | None = None) -> BranchDecomposition:
    U = r + 1 if U is None else U
    W = r + 2 if W is None else W
    edges = [canonical(*e) for e in edges]
    adj = _adjacency(edges)
    if not edges:
        adj[U] = set()
    missing = {U, W, *range(1, r + 1)} - adj.keys()
    if missing:
        raise InvalidArgument(f"labels {sorted(missing)} are missing from the tree")
    parent = _bfs_parents(adj, U)
    if len(parent) != len(adj):
        raise DisconnectedGraphError("not a tree")
    p0 = [W]
    while p0[-1] != U:
        p0.append(parent[p0[-1]])
    p0.reverse()
    in_hull = set(p0)
    paths = [tuple(p0)]
    attachments = [None]
    for i in range(1, r + 1):
        path = [i]
        while path[-1] not in in_hull:
            path.append(parent[path[-1]])
        in_hull.update(path)
        paths.append(tuple(path))
        attachments.append(path[-1])
    return BranchDecomposition(tuple(paths), tuple(attachments))


def third_windows(d: int) -> list[tuple[int, int]]:
    """Closed distance-from-U windows of the three thirds of a path of length d."""
    return [((d * (j - 1)) // 3, (d * j) // 3) for j in (1, 2, 3)]


def subpath_thirds(p0: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    d = len(p0) - 1
    if d < 1:
        raise InvalidArgument("U and W coincide")
    return tuple(tuple(p0[lo : hi + 1]) for lo, hi in third_windows(d))


def u_sets(
    edges: Iterable[Edge], r: int, q: float, U: int | None = None, W: int | None = None, bd: BranchDecomposition | None = None
) -> tuple[set[int], set[int], set[int]]:
    """Leaves i <= r whose branch is an isolated pendant path of length in [1, sqrt q] hanging off third j of P_0.

    A branch attached at a vertex shared by two thirds belongs to both.
    """
    if bd is None:
        bd = branch_decomposition(edges, r, U, W)
    if r == 0:
        return set(), set(), set()
    p0 = bd.paths[0]
    position = {v: k for k, v in enumerate(p0)}
    windows = third_windows(len(p0) - 1)
    vsets = [set(p) for p in bd.paths]
    owners: dict[int, list[int]] = {}
    for i in range(1, r + 1):
        for v in vsets[i]:
            owners.setdefault(v, []).append(i)
    limit = math.sqrt(q)
    out: tuple[set[int], set[int], set[int]] = (set(), set(), set())
    for i in range(1, r + 1):
        path = bd.paths[i]
        length = len(path) - 1
        if not 1 <= length <= limit:
            continue
        if any(owners[v] != [i] for v in path):
            continue
        meet = vsets[i] & vsets[0]
        if len(meet) != 1:
            continue
        (alpha,) = meet
        dist = position[alpha]
        for j, (lo, hi) in enumerate(windows):
            if lo <= dist <= hi:
                out[j].add(i)
    return out


@dataclass(frozen=True)
class TargetingTrace:
    first_targeted: tuple  # per path: first time it was hit, or None
    broken: tuple  # per path: tuple of times an edge of it was removed


def targeting_trace(
    edges: Iterable[Edge], paths: Sequence[Sequence[int]], ordering: Sequence[Edge], sources: Iterable[int]
) -> TargetingTrace:
    edges = [canonical(*e) for e in edges]
    psets = [path_edges(p) for p in paths]
    first: list[int | None] = [None] * len(paths)
    broken: list[list[int]] = [[] for _ in paths]
    for t, e, removed in breaking_steps(edges, sources, ordering):
        for k, ps in enumerate(psets):
            if e in ps:
                if first[k] is None:
                    first[k] = t
                if removed:
                    broken[k].append(t)
    return TargetingTrace(tuple(first), tuple(tuple(b) for b in broken))


def connection_condition(edges: Iterable[Edge], r: int, q: float, ordering: Sequence[Edge]) -> tuple[bool, bool]:
    """Evaluate the connection condition on a relabelled hull.

    Returns ``(applies, holds)``: the premise (U joined to W after
    breaking, both outer thirds carry an isolated branch) and whether at
    most one branch of each outer third was first hit after the middle
    third.  ``holds`` is True whenever the premise fails.
    """
    edges = [canonical(*e) for e in edges]
    U, W = r + 1, r + 2
    bd = branch_decomposition(edges, r)
    u1, _, u3 = u_sets(edges, r, q, bd=bd)
    if not u1 or not u3:
        return False, True
    forest = path_and_cycle_break(edges, range(1, r + 1), ordering)
    if not forest.connected(U, W):
        return False, True
    middle = subpath_thirds(bd.paths[0])[1]
    tracked = [middle] + [bd.paths[i] for i in sorted(u1)] + [bd.paths[i] for i in sorted(u3)]
    times = targeting_trace(edges, tracked, ordering, range(1, r + 1)).first_targeted
    t_mid = times[0] if times[0] is not None else math.inf
    late1 = sum(1 for t in times[1 : 1 + len(u1)] if t > t_mid)
    late3 = sum(1 for t in times[1 + len(u1) :] if t > t_mid)
    return True, late1 <= 1 and late3 <= 1
