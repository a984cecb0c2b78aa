"""Shared hypothesis strategies for small weighted graphs."""
import numpy as np
from hypothesis import strategies as st

from invperc.graph import RandomSource
from invperc.verify import random_connected_graph


@st.composite
def graphs_with_sources(draw, n_max=24):
    n = draw(st.integers(2, n_max))
    seed = draw(st.integers(0, 2**32))
    extra = draw(st.integers(0, 2 * n))
    rng = RandomSource(seed).generator()
    g = random_connected_graph(n, extra, rng)
    k = draw(st.integers(1, n))
    sources = set(int(x) for x in rng.choice(np.arange(1, n + 1), size=k, replace=False))
    return g, sources


def path_graph():
    """The path 1-2-3-4 with weights 0.1, 0.5, 0.2."""
    from invperc import WeightedGraph

    return WeightedGraph(4, [(1, 2, 0.1), (2, 3, 0.5), (3, 4, 0.2)])


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
