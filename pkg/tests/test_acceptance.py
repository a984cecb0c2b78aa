"""Acceptance criteria, one test each.

Every test prints ``PASS``/``FAIL`` with the measured quantities and the
seeds it used; the lines are repeated in the pytest terminal summary.
"""
import collections
import math
import subprocess
import sys
import time

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES

from invperc import RandomSource, WeightedGraph, kruskal_constrained, line_breaking, path_and_cycle_break
from invperc.cli import main
from invperc.stats import (
    arcsine_cdf,
    homogeneity_test,
    ks_statistic,
    max_partial_sum_deviation,
    rayleigh_cdf,
    replicate_M,
    replicate_M_critical,
)
from invperc.structures import (
    continuum_distance_check,
    kernel,
    mass_vector,
    middle_third_length,
    uniform_connected_surplus,
    uw_distances,
)
from invperc.verify import (
    exhaustive_lemmas,
    random_lemma_cases,
    suite_coupling,
    suite_er_components,
    suite_triple_identity,
)

SEED = 20240601


def report(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _mean_se(values):
    v = np.asarray(values, dtype=float)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v)))


# ---------------------------------------------------------------- exact identities


def test_criterion_01_triple_identity():
    start = time.perf_counter()
    res = suite_triple_identity(200, SEED)
    elapsed = time.perf_counter() - start
    report(1, res.passed and res.cases == 200 and elapsed < 10, f"{res.line()}, {elapsed:.1f} s")


def test_criterion_02_er_components():
    res = suite_er_components(300, SEED)
    report(2, res.passed and res.cases == 300, res.line())


def test_criterion_03_coupling_edge():
    res = suite_coupling(200, SEED)
    report(3, res.passed and res.cases == 200, res.line())


# ---------------------------------------------------------------- breaking law

# 4-cycle 1-3-2-4 plus pendant 4-5: five vertices, surplus 1
CYCLE_GRAPH = [(1, 3), (2, 3), (2, 4), (1, 4), (4, 5)]


def _breaking_counts(runs, seed):
    rng = RandomSource(seed).child("pacb-law").generator()
    counts = collections.Counter()
    for _ in range(runs):
        order = [CYCLE_GRAPH[j] for j in rng.permutation(5)]
        counts[path_and_cycle_break(CYCLE_GRAPH, {1, 2}, order).edges] += 1
    return counts


def _kruskal_counts(runs, seed):
    rng = RandomSource(seed).child("kruskal-law").generator()
    counts = collections.Counter()
    for w in rng.random((runs, 5)):
        g = WeightedGraph(5, [(u, v, x) for (u, v), x in zip(CYCLE_GRAPH, w)])
        counts[kruskal_constrained(g, {1, 2})[0].edges] += 1
    return counts


def test_criterion_04_breaking_matches_kruskal():
    start = time.perf_counter()
    tried = []
    for seed in (SEED, SEED + 1):  # one seeded retry
        a, b = _breaking_counts(100_000, seed), _kruskal_counts(100_000, seed)
        cells = sorted(set(a) | set(b), key=sorted)
        _, dof, p = homogeneity_test([a[c] for c in cells], [b[c] for c in cells])
        tried.append(f"seed {seed}: p={p:.3f}, {len(cells)} outcomes")
        if p > 0.01:
            break
    elapsed = time.perf_counter() - start
    report(4, p > 0.01 and elapsed < 30, "; ".join(tried) + f", {elapsed:.1f} s")


# ---------------------------------------------------------------- lemmas


def test_criterion_05_restriction_and_connection_lemmas():
    ex_r, ex_c = exhaustive_lemmas(7)
    rn_r, rn_c = random_lemma_cases(10_000, SEED)
    restriction = ex_r.failures + rn_r.failures
    connection = ex_c.failures + rn_c.failures
    detail = (
        f"restriction violations {restriction} ({ex_r.cases} exhaustive + {rn_r.cases} random cases); "
        f"connection violations {connection} ({ex_c.cases} exhaustive + {rn_c.cases} random cases; {ex_c.detail})"
    )
    report(5, restriction == 0 and connection == 0, detail)


# ---------------------------------------------------------------- Monte Carlo bands


def test_criterion_06_phase_direction():
    n, reps = 8000, 200
    ks = [1, 2, 20, 80, 400, n]
    start = time.perf_counter()
    sizes = np.array([replicate_M(n, ks, RandomSource(SEED).child(n, r)) for r in range(reps)]) / n
    elapsed = time.perf_counter() - start
    stats = [_mean_se(sizes[:, j]) for j in range(len(ks))]
    middle = stats[1:5]
    gaps_ok = all(m0 - m1 > 2 * math.hypot(s0, s1) for (m0, s0), (m1, s1) in zip(middle, middle[1:]))
    ends_ok = np.all(sizes[:, 0] == 1.0) and np.all(sizes[:, -1] == 1 / n)
    means = ", ".join(f"k={k}: {m:.4f}±{s:.4f}" for k, (m, s) in zip(ks[1:5], middle))
    report(6, bool(gaps_ok and ends_ok and elapsed < 600), f"{means}; k=1 and k=n exact: {bool(ends_ok)}; {elapsed:.0f} s")


def test_criterion_07_critical_window_direction():
    n, lam, reps = 10**5, 0.0, 200
    k1, k2 = math.ceil(n ** (1 / 3)), math.ceil(20 * n ** (1 / 3))
    start = time.perf_counter()
    vals = [
        replicate_M_critical(n, lam, [k1, k2], [0], RandomSource(SEED).child(n, float(lam), r)) for r in range(reps)
    ]
    elapsed = time.perf_counter() - start
    scale = n ** (2 / 3)
    m1 = np.mean([v[(k1, 0)] for v in vals]) / scale
    m2 = np.mean([v[(k2, 0)] for v in vals]) / scale
    report(7, bool(m2 < 0.5 * m1 and elapsed < 900), f"k={k1}: {m1:.4f}, k={k2}: {m2:.4f}, ratio {m2 / m1:.3f}; {elapsed:.0f} s")


def test_criterion_08_largest_component_band():
    n, lam, reps = 10**5, 4.0, 200
    vals = [replicate_M_critical(n, lam, [1], [0], RandomSource(SEED).child(n, lam, r))[(1, 0)] for r in range(reps)]
    mean, se = _mean_se(np.array(vals) / (n ** (2 / 3) * lam))
    report(8, 1.0 <= mean <= 3.0, f"mean |F^1|/(n^(2/3) lambda) = {mean:.3f} ± {se:.3f}")


# ---------------------------------------------------------------- structures


def test_criterion_09_dirichlet_limit():
    q, s, accepted = 3000, 1, 2000
    vectors = []
    for k in range(accepted):
        kd = kernel(uniform_connected_surplus(q, s, RandomSource(SEED).child("dirichlet", k)))
        if len(kd.edges) == 2:
            vectors.append(mass_vector(kd))
    x = np.array(vectors)
    means = x.mean(axis=0)
    ks = ks_statistic(x[:, 0], arcsine_cdf)
    ok = bool(np.all(np.abs(means - 0.5) <= 0.05) and ks < 0.05)
    report(9, ok, f"{len(x)} of {accepted} kernels with 2 edges; means {np.round(means, 4).tolist()}; KS {ks:.4f}")


def test_criterion_10_line_breaking_laws():
    pi0 = [line_breaking(0, RandomSource(SEED).child("pi0", k)).pi[0] for k in range(10_000)]
    ks_pi = ks_statistic(pi0, rayleigh_cdf)
    ks_disc = continuum_distance_check(10_000, 0, 2000, RandomSource(SEED).child("discrete"))
    report(10, ks_pi < 0.03 and ks_disc < 0.05, f"pi_0 KS {ks_pi:.4f}; discrete q=10^4 KS {ks_disc:.4f}")


def test_criterion_11_middle_third_bound():
    q, samples, eps = 10_000, 5000, 0.3
    d = uw_distances(q, samples, RandomSource(SEED).child("p02"))
    lengths = np.array([middle_third_length(int(x)) for x in d])
    frac = float(np.mean(lengths < eps * math.sqrt(q)))
    bound = 5 * eps**2 + 0.02
    report(11, frac <= bound, f"P(|e(P02)| < {eps} sqrt q) = {frac:.4f} <= {bound:.2f}")


# ---------------------------------------------------------------- exchangeable sums


def test_criterion_12_exchangeable_sums():
    m, trials = 10_000, 1000
    rng = RandomSource(SEED).child("exc").generator()
    masses = rng.dirichlet(np.ones(m))
    while masses.max() >= 1e-3:
        masses = rng.dirichlet(np.ones(m))
    dev = np.array([max_partial_sum_deviation(masses, rng.permutation(m)) for _ in range(trials)])
    frac = float(np.mean(dev < 0.05))
    report(12, frac >= 0.99, f"max mass {masses.max():.2e}; deviation < 0.05 in {frac:.3f} of {trials} trials")


# ---------------------------------------------------------------- determinism

GRAPH_FILE = "6 6\n1 2 0.1\n2 3 0.2\n3 4 0.3\n4 5 0.4\n1 5 0.5\n1 6 0.6\n"


def _cli_bytes(tmp_path, argv, tag):
    out = tmp_path / f"{tag}.csv"
    assert main([*argv, "--out", str(out)]) == 0
    return out.read_bytes()


def test_criterion_13_cli_determinism(tmp_path):
    graph = tmp_path / "g.txt"
    graph.write_text(GRAPH_FILE)
    sweeps = {
        "phase-scan": ["phase-scan", "--n", "500,1000", "--k-rule", "fixed:3", "--k-rule", "pow:1,1/3", "--replicates", "8", "--seed", "5"],
        "critical-scan": ["critical-scan", "--n", "5000", "--lambda=-1,0,2", "--i", "0,1,2", "--k-rule", "pow:1,1/3", "--replicates", "8", "--seed", "5"],
    }
    single = {
        "linebreak": ["linebreak", "--r", "4", "--samples", "200", "--seed", "5"],
        "decompose": ["decompose", "--graph", str(graph)],
        "trace": ["trace", "--graph", str(graph), "--sources", "1,4"],
    }
    same = {}
    for name, argv in sweeps.items():
        runs = [_cli_bytes(tmp_path, [*argv, "--workers", w], f"{name}-{j}") for j, w in enumerate(("1", "1", "2", "4"))]
        same[name] = len(set(runs)) == 1
    for name, argv in single.items():
        runs = [_cli_bytes(tmp_path, argv, f"{name}-{j}") for j in range(2)]
        same[name] = len(set(runs)) == 1
    # a fresh interpreter gives the same bytes too
    argv = sweeps["phase-scan"] + ["--workers", "2"]
    fresh = subprocess.run([sys.executable, "-m", "invperc.cli", *argv], capture_output=True, check=True).stdout
    same["separate process"] = fresh == _cli_bytes(tmp_path, argv, "again")
    report(13, all(same.values()), ", ".join(f"{k}: {'identical' if v else 'DIFFERENT'}" for k, v in same.items()))
