"""Estimators for the invasion forest sizes and small statistical utilities.

Replicate r of a sweep at size n (and lambda) always uses the stream
``RandomSource(seed).child(n, [lambda,] r)``, so estimates for different
k or i share their random weights.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats as sps

from . import _kernels
from .errors import InvalidArgument
from .graph import CompleteGraph, as_source, window_arrays
from .processes import p_critical

# ---------------------------------------------------------------- forests as arrays


def _source_labels(n: int, k: int) -> np.ndarray:
    label = np.zeros(n + 1, np.int64)
    label[1 : k + 1] = np.arange(1, k + 1)
    return label


def _roots(n: int, us, vs, k: int) -> np.ndarray:
    """Final union-find roots of constrained Kruskal over edges already in weight order."""
    _, roots = _kernels.kruskal_sorted(n, us, vs, _source_labels(n, k), False)
    return roots


def _largest(roots: np.ndarray) -> int:
    return int(np.bincount(roots[1:]).max())


def mst_arrays(g: CompleteGraph):
    """Minimum spanning tree of the implicit complete graph, edges sorted by weight."""
    mask = np.zeros(g.n + 1, np.bool_)
    mask[1] = True
    child, parent, weight, _ = _kernels.stream_prim(g.n, g.key, mask)
    order = np.argsort(weight, kind="stable")
    return parent[order], child[order], weight[order]


# ---------------------------------------------------------------- attachment masses


@dataclass(frozen=True)
class MassProfile:
    host: int  # smallest label of F^1(n, p)
    vertices: np.ndarray
    masses: np.ndarray

    @property
    def delta(self) -> float:
        return float(self.masses.max())


def _ranked_roots(roots: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Component roots by decreasing size, equal sizes in uniformly random order."""
    sizes = np.bincount(roots[1:], minlength=len(roots))
    present = np.flatnonzero(sizes)
    tiebreak = rng.permutation(len(present))
    return present[np.lexsort((tiebreak, -sizes[present]))]


def attachment_masses(n: int, lam: float, seed) -> MassProfile:
    """Masses |T_v| / n of the MST pieces hanging off the largest critical component."""
    if n < 3:
        raise InvalidArgument("n must be at least 3")
    source = as_source(seed)
    p = p_critical(n, lam)
    us, vs, ws = mst_arrays(CompleteGraph(n, source))
    below = ws <= p
    roots = _roots(n, us[below], vs[below], 0)
    top = _ranked_roots(roots, source.child("tiebreak").generator())[0]
    members = np.flatnonzero(roots == top)
    members = members[members > 0]
    inside = below & (roots[us] == top)
    pieces = _roots(n, us[~inside], vs[~inside], 0)
    sizes = np.bincount(pieces[1:], minlength=n + 1)
    return MassProfile(int(members.min()), members, sizes[pieces[members]] / n)


def max_partial_sum_deviation(masses: Sequence[float], permutation: Sequence[int]) -> float:
    """max_i |sum_{j<=i} (q_{pi(j)} - 1/m)| for a 0-based permutation pi of range(m)."""
    q = np.asarray(masses, dtype=float)
    perm = np.asarray(permutation, dtype=np.int64)
    m = len(q)
    if m == 0:
        raise InvalidArgument("need at least one mass")
    if np.any(q < 0) or abs(q.sum() - 1.0) > 1e-9:
        raise InvalidArgument("masses must be non-negative and sum to 1")
    if len(perm) != m or not np.array_equal(np.sort(perm), np.arange(m)):
        raise InvalidArgument("not a permutation of range(m)")
    return float(np.abs(np.cumsum(q[perm] - 1.0 / m)).max())


# ---------------------------------------------------------------- estimates


@dataclass(frozen=True)
class EstimateRow:
    n: int
    k: int
    lam: float | None
    i: int
    replicates: int
    mean: float
    stderr: float
    q05: float
    q50: float
    q95: float
    seed: int
    values: np.ndarray = field(repr=False, compare=False, default=None)

    HEADER = ("n", "k", "lambda", "i", "replicates", "mean", "stderr", "q05", "q50", "q95", "seed")

    def cells(self) -> list[str]:
        lam = "" if self.lam is None else repr(float(self.lam))
        nums = (self.mean, self.stderr, self.q05, self.q50, self.q95)
        return [str(self.n), str(self.k), lam, str(self.i), str(self.replicates), *(repr(float(x)) for x in nums), str(self.seed)]


def summarize(values, n: int, k: int, lam, i: int, seed: int) -> EstimateRow:
    v = np.asarray(values, dtype=float)
    if len(v) == 0:
        raise InvalidArgument("need at least one replicate")
    stderr = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
    q05, q50, q95 = np.quantile(v, [0.05, 0.5, 0.95])
    return EstimateRow(n, k, lam, i, len(v), float(v.mean()), stderr, float(q05), float(q50), float(q95), seed, v)


def write_rows(rows: Sequence[EstimateRow], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(EstimateRow.HEADER)
    for row in rows:
        w.writerow(row.cells())


def _check_k(n: int, k: int) -> None:
    if not 1 <= k <= n:
        raise InvalidArgument(f"k must lie in [1, n], got k={k}, n={n}")


def replicate_M(n: int, ks: Sequence[int], source, method: str = "mst") -> list[int]:
    """Largest component of the k-source invasion forest on one weighted K_n, for each k.

    ``mst`` builds the MST once and reruns constrained Kruskal on its n-1
    edges for each k (the invasion forest only ever uses MST edges);
    ``direct`` streams multi-source invasion from [k] separately.
    """
    g = CompleteGraph(n, source)
    for k in ks:
        _check_k(n, k)
    if method == "mst":
        us, vs, _ = mst_arrays(g)
        return [_largest(_roots(n, us, vs, k)) for k in ks]
    if method == "direct":
        out = []
        for k in ks:
            mask = np.zeros(n + 1, np.bool_)
            mask[1 : k + 1] = True
            child, parent, _, _ = _kernels.stream_prim(n, g.key, mask)
            out.append(_largest(_roots(n, parent, child, 0)))
        return out
    raise InvalidArgument(f"unknown method {method!r}")


def estimate_M(n: int, k: int, replicates: int, seed, method: str = "mst") -> EstimateRow:
    """M_n / n over independent weightings of K_n, sources [k]."""
    _check_k(n, k)
    if replicates < 1:
        raise InvalidArgument("replicates must be positive")
    source = as_source(seed)
    vals = [replicate_M(n, [k], source.child(n, r), method)[0] / n for r in range(replicates)]
    return summarize(vals, n, k, None, 0, source.seed)


def replicate_M_critical(n: int, lam: float, ks: Sequence[int], is_: Sequence[int], source, method: str = "direct") -> dict:
    """{(k, i): size} on one critical-window sample; i=0 is the overall largest component.

    For i >= 1 the size is that of the largest [k]-component inside the
    i-th largest component of F(n, p); it is 0 when there is no such
    component.
    """
    p = p_critical(n, lam)
    us, vs, _ = window_arrays(n, p, source, method)
    free = _roots(n, us, vs, 0)
    ranked = _ranked_roots(free, source.child("tiebreak").generator())
    out = {}
    for k in ks:
        _check_k(n, k)
        roots = _roots(n, us, vs, k)
        sizes = np.bincount(roots[1:], minlength=n + 1)
        for i in is_:
            if i == 0:
                out[(k, i)] = int(sizes.max())
            elif i <= len(ranked):
                inside = np.flatnonzero(free == ranked[i - 1])
                out[(k, i)] = int(sizes[roots[inside[inside > 0]]].max())
            else:
                out[(k, i)] = 0
    return out


def estimate_M_critical(n: int, k: int, lam: float, i: int, replicates: int, seed, method: str = "direct") -> EstimateRow:
    """M_{n,lambda}(k) / n^(2/3) (i = 0) or M^i_{n,lambda}(k) / n^(2/3) (i >= 1)."""
    _check_k(n, k)
    if i < 0:
        raise InvalidArgument("i must be non-negative")
    if replicates < 1:
        raise InvalidArgument("replicates must be positive")
    source = as_source(seed)
    scale = n ** (2 / 3)
    vals = [
        replicate_M_critical(n, lam, [k], [i], source.child(n, float(lam), r), method)[(k, i)] / scale for r in range(replicates)
    ]
    return summarize(vals, n, k, lam, i, source.seed)


# ---------------------------------------------------------------- tests of fit


def ks_statistic(sample, cdf: Callable) -> float:
    """sup_x |F_n(x) - F(x)| against a continuous CDF."""
    x = np.sort(np.asarray(sample, dtype=float))
    m = len(x)
    if m == 0:
        raise InvalidArgument("empty sample")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, m + 1)
    return float(max((i / m - f).max(), (f - (i - 1) / m).max()))


def ks_two_sample(a, b) -> float:
    return float(sps.ks_2samp(a, b).statistic)


def chi_square_statistic(observed, expected) -> tuple[float, int]:
    obs = np.asarray(observed, dtype=float)
    p = np.asarray(expected, dtype=float)
    if obs.shape != p.shape or len(p) < 2:
        raise InvalidArgument("need matching count and probability vectors with at least two cells")
    if np.any(p <= 0):
        raise InvalidArgument("every expected probability must be positive")
    if abs(p.sum() - 1.0) > 1e-9:
        raise InvalidArgument("expected probabilities must sum to 1")
    total = obs.sum()
    stat = float(((obs - total * p) ** 2 / (total * p)).sum())
    return stat, len(p) - 1


def chi_square_pvalue(stat: float, dof: int) -> float:
    return float(sps.chi2.sf(stat, dof))


def homogeneity_test(counts_a, counts_b) -> tuple[float, int, float]:
    """Chi-square test that two count vectors over the same cells share one law."""
    table = np.array([counts_a, counts_b], dtype=float)
    table = table[:, table.sum(axis=0) > 0]
    res = sps.chi2_contingency(table, correction=False)
    return float(res.statistic), int(res.dof), float(res.pvalue)


def rayleigh_cdf(x):
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, -np.expm1(-0.5 * np.square(x)), 0.0)


def arcsine_cdf(x):
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return 2.0 / np.pi * np.arcsin(np.sqrt(x))


def dirichlet_half(k: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Dirichlet(1/2, ..., 1/2) rows: half-squared normals are Gamma(1/2, 1)."""
    g = 0.5 * np.square(rng.standard_normal((size, k)))
    return g / g.sum(axis=1, keepdims=True)
