"""Self-check suites for the exact identities between the processes.

Every suite returns a ``SuiteResult`` instead of raising, so that a
broken build is reported rather than crashing the run.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import networkx as nx
import numpy as np

from . import _kernels
from .breaking import (
    branch_decomposition,
    connection_condition,
    hull,
    path_and_cycle_break,
    relabel_hull,
    subpath_thirds,
    u_sets,
)
from .graph import RandomSource, WeightedGraph, canonical
from .processes import (
    add_source_coupling,
    augmented_prim,
    coupling_replay_holds,
    er_constrained_process,
    invasion_percolation,
    kruskal_constrained,
    partitions_agree,
)
from .structures import uniform_tree


@dataclass(frozen=True)
class SuiteResult:
    name: str
    cases: int
    failures: int
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.failures == 0 and not self.detail.startswith("error")

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"{status} {self.name}: {self.cases} cases, {self.failures} failures{extra}"


def random_connected_graph(n: int, extra: int, rng: np.random.Generator) -> WeightedGraph:
    """Uniform tree on [n] plus up to ``extra`` random chords, with i.i.d. uniform weights."""
    edges = set(uniform_tree(n, RandomSource(int(rng.integers(2**62)))))
    limit = n * (n - 1) // 2
    while len(edges) < min(limit, n - 1 + extra):
        a, b = (int(x) for x in rng.integers(1, n + 1, size=2))
        if a != b:
            edges.add(canonical(a, b))
    return WeightedGraph(n, [(u, v, w) for (u, v), w in zip(sorted(edges), rng.random(len(edges)))])


def _instance(rng: np.random.Generator, n_max: int):
    n = int(rng.integers(2, n_max + 1))
    g = random_connected_graph(n, int(rng.integers(0, 2 * n + 1)), rng)
    k = [1, 2, math.ceil(n / 2)][int(rng.integers(3))]
    k = min(k, n)
    sources = set(int(x) for x in rng.choice(np.arange(1, n + 1), size=k, replace=False))
    return g, sources


def _guard(name: str, fn) -> SuiteResult:
    try:
        return fn()
    except Exception as exc:  # a broken build must still produce a report line
        return SuiteResult(name, 0, 1, f"error: {type(exc).__name__}: {exc}")


def suite_triple_identity(cases: int, seed: int) -> SuiteResult:
    rng = RandomSource(seed).child("triple").generator()
    bad = 0
    for _ in range(cases):
        g, src = _instance(rng, 64)
        a = invasion_percolation(g, src).edges
        b = augmented_prim(g, src).edges
        c = kruskal_constrained(g, src)[0].edges
        bad += not (a == b == c)
    return SuiteResult("triple-identity", cases, bad)


def suite_er_components(cases: int, seed: int) -> SuiteResult:
    rng = RandomSource(seed).child("er").generator()
    bad = 0
    for _ in range(cases):
        g, src = _instance(rng, 64)
        bad += not partitions_agree(kruskal_constrained(g, src)[1], er_constrained_process(g, src))
    return SuiteResult("er-components", cases, bad)


def suite_coupling(cases: int, seed: int) -> SuiteResult:
    rng = RandomSource(seed).child("coupling").generator()
    bad = 0
    done = 0
    while done < cases:
        g, src = _instance(rng, 48)
        if len(src) == g.n:
            continue
        z = int(rng.choice(sorted(set(range(1, g.n + 1)) - src)))
        edge = add_source_coupling(g, src, z)
        before = kruskal_constrained(g, src)[0].edges
        after = kruskal_constrained(g, src | {z})[0].edges
        bad += not (before ^ after == {edge} and coupling_replay_holds(g, src, z, edge))
        done += 1
    return SuiteResult("coupling-edge", cases, bad)


def suite_pacb_kruskal(cases: int, seed: int) -> SuiteResult:
    """Breaking in decreasing-weight order reproduces the constrained Kruskal forest."""
    rng = RandomSource(seed).child("pacb").generator()
    bad = 0
    for _ in range(cases):
        g, src = _instance(rng, 40)
        order = [(e.u, e.v) for e in sorted(g.edges(), key=lambda e: -e.weight)]
        broken = path_and_cycle_break(order, src, order, vertices=range(1, g.n + 1))
        bad += broken.edges != kruskal_constrained(g, src)[0].edges
    return SuiteResult("pacb-kruskal", cases, bad)


# ---------------------------------------------------------------- exhaustive small trees


@dataclass(frozen=True)
class _Shape:
    q: int
    edges: tuple  # 0-based endpoints
    labels: np.ndarray  # labels[mask, v]: component id of v using only edges in mask
    perms: np.ndarray
    positions: np.ndarray  # positions[p, j]: time (0-based) of edge j in ordering p


@lru_cache(maxsize=None)
def _all_perms(m: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(m))), dtype=np.int64).reshape(-1, m)


def _shape(tree: nx.Graph) -> _Shape:
    q = tree.number_of_nodes()
    edges = tuple(sorted(canonical(*e) for e in tree.edges()))
    m = len(edges)
    labels = np.empty((1 << m, q), np.int64)
    for mask in range(1 << m):
        parent = list(range(q))

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        for j, (a, b) in enumerate(edges):
            if mask >> j & 1:
                parent[find(a)] = find(b)
        labels[mask] = [find(v) for v in range(q)]
    perms = _all_perms(m)
    return _Shape(q, edges, labels, perms, np.argsort(perms, axis=1))


def _cut_table(shape: _Shape, sources: list[int]) -> np.ndarray:
    m = len(shape.edges)
    src = np.zeros(shape.q, bool)
    src[sources] = True
    lab = shape.labels
    # has_src[mask, v]: v's component in mask holds a source
    has_src = ((lab[:, :, None] == lab[:, None, :]) & src[None, None, :]).any(axis=2)
    cut = np.zeros((1 << m, m), np.bool_)
    masks = np.arange(1 << m)
    for j, (a, b) in enumerate(shape.edges):
        on = (masks >> j & 1).astype(bool)
        without = masks ^ (1 << j)
        cut[:, j] = on & has_src[without, a] & has_src[without, b]
    return cut


def _edge_mask(shape: _Shape, edges) -> int:
    index = {e: j for j, e in enumerate(shape.edges)}
    return sum(1 << index[canonical(*e)] for e in edges)


def exhaustive_lemmas(max_edges: int) -> tuple[SuiteResult, SuiteResult]:
    """Both lemmas over every ordering of every tree shape with at most ``max_edges`` edges.

    Shapes are unlabelled; every choice of source set and of (U, W)
    outside it is enumerated, which covers every labelling.
    """
    restr_cases = restr_bad = conn_cases = conn_bad = weak_bad = 0
    for q in range(2, max_edges + 2):
        for tree in nx.nonisomorphic_trees(q):
            shape = _shape(tree)
            m = q - 1
            full = (1 << m) - 1
            leaves = {v for v in tree if tree.degree(v) == 1}
            for size in range(q - 1):
                for S in itertools.combinations(range(q), size):
                    cut = _cut_table(shape, list(S))
                    finals = _kernels.run_cut_table(cut, np.array([full], np.int64), shape.perms)[0]
                    rest = [v for v in range(q) if v not in S]
                    hull_masks = set()
                    for U, W in itertools.combinations(rest, 2):
                        h = hull(shape.edges, set(S) | {U, W}, range(q))
                        hull_masks.add(_edge_mask(shape, h.edges))
                    for hm in sorted(hull_masks):
                        got = _kernels.run_cut_table(cut, np.array([hm], np.int64), shape.perms)[0]
                        restr_cases += len(got)
                        restr_bad += int(np.count_nonzero(got != (finals & hm)))
                    if not leaves <= set(S) | set(rest):
                        continue
                    for U, W in itertools.permutations(rest, 2):
                        if not leaves <= set(S) | {U, W}:
                            continue
                        c, b, wk = _connection_cases(shape, list(S), U, W, finals)
                        conn_cases += c
                        conn_bad += b
                        weak_bad += wk
    return (
        SuiteResult("restriction-lemma", restr_cases, restr_bad, f"exhaustive, <= {max_edges} edges"),
        SuiteResult(
            "connection-lemma",
            conn_cases,
            conn_bad,
            f"exhaustive, <= {max_edges} edges; late paths on both sides: {weak_bad}",
        ),
    )


def _connection_cases(shape: _Shape, S: list[int], U: int, W: int, finals: np.ndarray) -> tuple[int, int, int]:
    r = len(S)
    # U-sets do not depend on which order the sources are numbered in, so
    # numbering them increasingly loses nothing.
    relabel = {v: i + 1 for i, v in enumerate(sorted(S))}
    relabel[U], relabel[W] = r + 1, r + 2
    others = [v for v in range(shape.q) if v not in relabel]
    relabel.update({v: r + 3 + i for i, v in enumerate(others)})
    back = {new: old for old, new in relabel.items()}
    edges = [canonical(relabel[a], relabel[b]) for a, b in shape.edges]
    bd = branch_decomposition(edges, r)
    u1, _, u3 = u_sets(edges, r, math.inf, bd=bd)
    n_perm = len(finals)
    if not u1 or not u3:
        return n_perm, 0, 0
    lab = shape.labels
    connected = lab[finals, U] == lab[finals, W]

    def first_time(path) -> np.ndarray:
        js = [shape.edges.index(canonical(back[a], back[b])) for a, b in zip(path, path[1:])]
        if not js:
            return np.full(n_perm, np.inf)
        return shape.positions[:, js].min(axis=1).astype(float)

    t_mid = first_time(subpath_thirds(bd.paths[0])[1])
    late1 = sum((first_time(bd.paths[i]) > t_mid).astype(int) for i in u1)
    late3 = sum((first_time(bd.paths[i]) > t_mid).astype(int) for i in u3)
    bad = connected & ((late1 > 1) | (late3 > 1))
    # what the standard argument actually rules out: a late path on both sides
    weak = connected & (late1 > 0) & (late3 > 0)
    return n_perm, int(np.count_nonzero(bad)), int(np.count_nonzero(weak))


def random_lemma_cases(cases: int, seed: int, q_range=(9, 24)) -> tuple[SuiteResult, SuiteResult]:
    """Both lemmas on random labelled trees and random orderings, via the public functions."""
    rng = RandomSource(seed).child("lemmas").generator()
    restr_bad = conn_bad = 0
    for case in range(cases):
        q = int(rng.integers(q_range[0], q_range[1] + 1))
        tree = list(uniform_tree(q, RandomSource(seed).child("lemma-tree", case)))
        r = int(rng.integers(1, q - 1))
        U, W = (int(x) for x in rng.choice(np.arange(r + 1, q + 1), size=2, replace=False))
        order = [tree[j] for j in rng.permutation(len(tree))]
        whole = path_and_cycle_break(tree, range(1, r + 1), order)
        h = relabel_hull(tree, r, U, W, order)
        part = path_and_cycle_break(h.edges, range(1, r + 1), h.ordering, vertices=range(1, h.size + 1))
        restr_bad += whole.connected(U, W) != part.connected(h.U, h.W)
        for qq in (q, math.inf):
            conn_bad += not connection_condition(h.edges, r, qq, h.ordering)[1]
    return (
        SuiteResult("restriction-lemma", cases, restr_bad, "random"),
        SuiteResult("connection-lemma", cases, conn_bad, "random"),
    )


def _merge(a: SuiteResult, b: SuiteResult) -> SuiteResult:
    return SuiteResult(a.name, a.cases + b.cases, a.failures + b.failures, f"{a.detail}; {b.detail}")


LEVELS = {
    "quick": dict(instances=(40, 40, 40, 40), max_edges=5, random_cases=300),
    "full": dict(instances=(200, 300, 200, 200), max_edges=7, random_cases=10_000),
}

SUITE_NAMES = ("triple-identity", "er-components", "coupling-edge", "pacb-kruskal", "restriction-lemma", "connection-lemma")


def run_suites(level: str = "quick", seed: int = 0, suites=None) -> list[SuiteResult]:
    """Run the suites of a level (all of them, or only the names in ``suites``), in a fixed order."""
    cfg = LEVELS[level]
    n1, n2, n3, n4 = cfg["instances"]
    wanted = set(SUITE_NAMES if suites is None else suites)
    simple = {
        "triple-identity": lambda: suite_triple_identity(n1, seed),
        "er-components": lambda: suite_er_components(n2, seed),
        "coupling-edge": lambda: suite_coupling(n3, seed),
        "pacb-kruskal": lambda: suite_pacb_kruskal(n4, seed),
    }
    out = [_guard(name, fn) for name, fn in simple.items() if name in wanted]
    lemmas = [name for name in ("restriction-lemma", "connection-lemma") if name in wanted]
    if lemmas:
        try:
            ex = exhaustive_lemmas(cfg["max_edges"])
            rnd = random_lemma_cases(cfg["random_cases"], seed)
            merged = {r.name: r for r in (_merge(ex[0], rnd[0]), _merge(ex[1], rnd[1]))}
        except Exception as exc:
            msg = f"error: {type(exc).__name__}: {exc}"
            merged = {name: SuiteResult(name, 0, 1, msg) for name in lemmas}
        out += [merged[name] for name in lemmas]
    return out
