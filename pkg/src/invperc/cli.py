"""Command-line front end: ``invperc <command> [options]``.

Exit status is 0 on success, 1 when a verification suite fails and 2 on
invalid arguments.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import DisconnectedGraphError, InvalidArgument
from .graph import RandomSource, read_graph
from .processes import er_constrained_process, kruskal_constrained, p_critical
from .stats import replicate_M, replicate_M_critical, summarize, write_rows
from .structures import SurplusGraph, continuum_u_sets, kernel, line_breaking


@dataclass(frozen=True)
class KRule:
    text: str
    kind: str
    c: float = 0.0
    a: float = 0.0
    value: int = 0

    def __call__(self, n: int) -> int:
        if self.kind == "fixed":
            k = self.value
        else:
            x = self.c * n**self.a
            k = round(x) if abs(x - round(x)) < 1e-9 else math.ceil(x)
        if not 1 <= k <= n:
            raise InvalidArgument(f"k rule {self.text} gives k={k}, outside [1, {n}]")
        return k


def _number(text: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise InvalidArgument(f"not a number: {text!r}") from None


def parse_k_rule(text: str) -> KRule:
    kind, _, body = text.strip().partition(":")
    if kind == "fixed":
        try:
            return KRule(text, "fixed", value=int(body))
        except ValueError:
            raise InvalidArgument(f"bad k rule {text!r}") from None
    if kind == "pow":
        parts = body.split(",")
        if len(parts) != 2:
            raise InvalidArgument(f"bad k rule {text!r}, expected pow:<c>,<a>")
        return KRule(text, "pow", c=_number(parts[0]), a=_number(parts[1]))
    raise InvalidArgument(f"bad k rule {text!r}, expected fixed:<v> or pow:<c>,<a>")


def read_config(path) -> dict[str, list[str]]:
    """``key = value`` lines; list keys take commas, k-rule takes ';' between rules."""
    out: dict[str, list[str]] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InvalidArgument(f"config line without '=': {raw!r}")
        key = key.strip().replace("_", "-")
        value = value.strip()
        if key == "k-rule":
            out[key] = [v.strip() for v in value.split(";") if v.strip()]
        else:
            out[key] = [value]
    return out


def _split(values) -> list[str]:
    return [part.strip() for v in values for part in str(v).split(",") if part.strip()]


def _default_workers() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


class Settings:
    """Flags first, then the config file, then defaults."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = read_config(args.config) if getattr(args, "config", None) else {}

    def raw(self, key: str):
        flag = getattr(self.args, key.replace("-", "_"), None)
        if flag not in (None, []):
            return flag if isinstance(flag, list) else [flag]
        return self.config.get(key)

    def ints(self, key: str, default=None) -> list[int]:
        vals = self.raw(key)
        if vals is None:
            if default is None:
                raise InvalidArgument(f"--{key} is required")
            return list(default)
        try:
            return [int(v) for v in _split(vals)]
        except ValueError:
            raise InvalidArgument(f"--{key} expects integers") from None

    def floats(self, key: str) -> list[float]:
        vals = self.raw(key)
        if vals is None:
            raise InvalidArgument(f"--{key} is required")
        return [_number(v) for v in _split(vals)]

    def one_int(self, key: str, default=None) -> int:
        vals = self.ints(key, None if default is None else [default])
        if len(vals) != 1:
            raise InvalidArgument(f"--{key} takes a single value")
        return vals[0]

    def text(self, key: str, default=None):
        vals = self.raw(key)
        return default if vals is None else str(vals[-1])

    def k_rules(self) -> list[KRule]:
        vals = self.raw("k-rule")
        if not vals:
            raise InvalidArgument("--k-rule is required")
        return [parse_k_rule(v) for v in vals]

    def seed(self) -> int:
        vals = self.raw("seed")
        if vals is None:
            env = os.environ.get("PERC_SEED")
            if env is None:
                raise InvalidArgument("a seed is required (--seed or PERC_SEED)")
            vals = [env]
        try:
            seed = int(vals[-1])
        except ValueError:
            raise InvalidArgument("the seed must be an integer") from None
        if seed < 0:
            raise InvalidArgument("the seed must be non-negative")
        return seed

    def workers(self) -> int:
        w = self.one_int("workers", _default_workers())
        if w < 1:
            raise InvalidArgument("--workers must be positive")
        return w

    def replicates(self) -> int:
        r = self.one_int("replicates", 1)
        if r < 1:
            raise InvalidArgument("--replicates must be positive")
        return r


def _positive(values: list[int], key: str) -> list[int]:
    if any(v < 1 for v in values):
        raise InvalidArgument(f"--{key} values must be positive")
    return values


# ---------------------------------------------------------------- work units (module level so they pickle)


def _phase_unit(task):
    n, ks, seed, rep, method = task
    return replicate_M(n, ks, RandomSource(seed).child(n, rep), method)


def _critical_unit(task):
    n, lam, ks, is_, seed, rep, method = task
    return replicate_M_critical(n, lam, ks, is_, RandomSource(seed).child(n, float(lam), rep), method)


def _run(fn, tasks, workers: int) -> list:
    if workers == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


# ---------------------------------------------------------------- commands


def cmd_phase_scan(st: Settings) -> tuple[str, int]:
    ns = _positive(st.ints("n"), "n")
    rules = st.k_rules()
    reps, seed, workers = st.replicates(), st.seed(), st.workers()
    method = st.text("method", "mst")
    plan = {n: sorted({rule(n) for rule in rules}) for n in ns}
    tasks = [(n, plan[n], seed, rep, method) for n in sorted(plan) for rep in range(reps)]
    results = _run(_phase_unit, tasks, workers)
    rows = []
    for n in sorted(plan):
        per_rep = [res for task, res in zip(tasks, results) if task[0] == n]
        for j, k in enumerate(plan[n]):
            rows.append(summarize([r[j] / n for r in per_rep], n, k, None, 0, seed))
    buf = io.StringIO()
    write_rows(rows, buf)
    return buf.getvalue(), 0


def cmd_critical_scan(st: Settings) -> tuple[str, int]:
    ns = _positive(st.ints("n"), "n")
    lams = st.floats("lambda")
    is_ = st.ints("i", [0])
    if any(i < 0 for i in is_):
        raise InvalidArgument("--i values must be non-negative")
    is_ = sorted(set(is_))
    rules = st.k_rules()
    reps, seed, workers = st.replicates(), st.seed(), st.workers()
    method = st.text("method", "direct")
    for n in ns:
        for lam in lams:
            p_critical(n, lam)
    plan = {n: sorted({rule(n) for rule in rules}) for n in ns}
    keys = sorted((n, lam) for n in plan for lam in set(lams))
    tasks = [(n, lam, plan[n], is_, seed, rep, method) for n, lam in keys for rep in range(reps)]
    results = _run(_critical_unit, tasks, workers)
    rows = []
    for n, lam in keys:
        per_rep = [res for task, res in zip(tasks, results) if task[:2] == (n, lam)]
        for k in plan[n]:
            for i in is_:
                rows.append(summarize([r[(k, i)] / n ** (2 / 3) for r in per_rep], n, k, lam, i, seed))
    rows.sort(key=lambda row: (row.n, row.k, row.lam, row.i))
    buf = io.StringIO()
    write_rows(rows, buf)
    return buf.getvalue(), 0


def cmd_verify(st: Settings) -> tuple[str, int]:
    from .verify import LEVELS, SUITE_NAMES, run_suites

    level = st.text("level", "quick")
    if level not in LEVELS:
        raise InvalidArgument(f"--level must be one of {sorted(LEVELS)}")
    wanted = st.raw("suite")
    if wanted:
        unknown = set(wanted) - set(SUITE_NAMES)
        if unknown:
            raise InvalidArgument(f"unknown suites {sorted(unknown)}")
    seed = st.seed() if st.raw("seed") is not None or "PERC_SEED" in os.environ else 0
    results = run_suites(level, seed, suites=wanted or None)
    text = "".join(r.line() + "\n" for r in results)
    return text, 0 if all(r.passed for r in results) else 1


def cmd_decompose(st: Settings) -> tuple[str, int]:
    path = st.text("graph")
    if path is None:
        raise InvalidArgument("--graph is required")
    g = read_graph(path)
    try:
        sg = SurplusGraph(g.n, frozenset(g.edge_set()))
    except DisconnectedGraphError as exc:
        raise InvalidArgument(str(exc)) from None
    if sg.s < 1:
        raise InvalidArgument("the input graph is a tree (surplus 0); its kernel is undefined")
    buf = io.StringIO()
    kernel(sg).write_csv(buf)
    return buf.getvalue(), 0


def cmd_linebreak(st: Settings) -> tuple[str, int]:
    r = st.one_int("r", 0)
    samples = st.one_int("samples", 1)
    if r < 0 or samples < 1:
        raise InvalidArgument("need r >= 0 and samples >= 1")
    seed = st.seed()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sample", "r", "seed", *(f"pi_{j}" for j in range(r + 1)), "u1", "u3"])
    for k in range(samples):
        t = line_breaking(r, RandomSource(seed).child("linebreak", r, k))
        if r:
            u1, u3 = continuum_u_sets(t)
            sizes = [len(u1), len(u3)]
        else:
            sizes = ["", ""]
        w.writerow([k, r, seed, *(repr(float(x)) for x in t.pi), *sizes])
    return buf.getvalue(), 0


def cmd_trace(st: Settings) -> tuple[str, int]:
    path = st.text("graph")
    if path is None:
        raise InvalidArgument("--graph is required")
    g = read_graph(path)
    sources = st.ints("sources")
    process = st.text("process", "kruskal")
    if process == "kruskal":
        trace = kruskal_constrained(g, sources)[1]
    elif process == "er":
        trace = er_constrained_process(g, sources)
    else:
        raise InvalidArgument("--process must be kruskal or er")
    buf = io.StringIO()
    trace.write_csv(buf)
    return buf.getvalue(), 0


COMMANDS = {
    "phase-scan": cmd_phase_scan,
    "critical-scan": cmd_critical_scan,
    "verify": cmd_verify,
    "decompose": cmd_decompose,
    "linebreak": cmd_linebreak,
    "trace": cmd_trace,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="invperc", description="Multi-source invasion percolation experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, sweep=False):
        p.add_argument("--config", help="key=value file; flags override it")
        p.add_argument("--seed", help="master seed (falls back to $PERC_SEED)")
        p.add_argument("--out", help="output file (default: stdout)")
        if sweep:
            p.add_argument("--n", action="append", help="graph sizes; repeat or comma-separate")
            p.add_argument("--k-rule", action="append", help="fixed:<v> or pow:<c>,<a> (k = ceil(c n^a)); repeatable")
            p.add_argument("--replicates", help="replicates per parameter point")
            p.add_argument("--workers", help="worker processes (default: available CPUs)")
            p.add_argument("--method", help="sampling method")
        return p

    common(sub.add_parser("phase-scan", help="M_n/n over k on weighted complete graphs"), sweep=True)
    crit = common(sub.add_parser("critical-scan", help="largest [k]-components in the critical window"), sweep=True)
    crit.add_argument("--lambda", dest="lambda", action="append", help="window parameters (repeatable)")
    crit.add_argument("--i", action="append", help="component ranks (0 = overall largest)")
    ver = common(sub.add_parser("verify", help="run the exact-identity suites"))
    ver.add_argument("--level", choices=["quick", "full"])
    ver.add_argument("--suite", action="append", help="run only this suite (repeatable)")
    dec = common(sub.add_parser("decompose", help="kernel decomposition of a graph file"))
    dec.add_argument("--graph", help="graph file: 'n m' then 'u v weight' lines")
    lb = common(sub.add_parser("linebreak", help="sample line-breaking trees"))
    lb.add_argument("--r", help="number of branches")
    lb.add_argument("--samples", help="number of trees")
    tr = common(sub.add_parser("trace", help="step-by-step trace of constrained Kruskal or ER"))
    tr.add_argument("--graph", help="graph file")
    tr.add_argument("--sources", action="append", help="source vertices; repeat or comma-separate")
    tr.add_argument("--process", choices=["kruskal", "er"])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        st = Settings(args)
        text, status = COMMANDS[args.command](st)
    except (ValueError, OSError) as exc:
        print(f"invperc: error: {exc}", file=sys.stderr)
        return 2
    out = st.text("out")
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
