import numpy as np
import pytest
from hypothesis import settings

from bipartite_hardcore.graph import BipartiteGraph, parse_graph
from bipartite_hardcore.recursion import TreeParams, lambda_of_x, t_delta_roots

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def star2():
    return parse_graph("1 2 2\n0 0\n0 1")


@pytest.fixture
def edge():
    return parse_graph("1 1 1\n0 0")


@pytest.fixture
def path2():
    """u1 - v - u2: two left vertices sharing one right vertex."""
    return parse_graph("2 1 2\n0 0\n1 0")


def random_graph(rng: np.random.Generator, n_left: int, n_right: int,
                 max_deg: int) -> BipartiteGraph:
    edges = []
    for u in range(n_left):
        k = int(rng.integers(0, min(max_deg, n_right) + 1))
        edges += [(u, int(v)) for v in rng.choice(n_right, size=k, replace=False)]
    return BipartiteGraph.from_edges(n_left, n_right, edges)


def nonunique_witness(lam, d, alpha, delta, w_lo, n=4000, span=1e6):
    """A ``w`` at which ``lam`` hits ``lambda_of_x`` somewhere on ``(x_1, x_2)``.

    There ``T_delta < 0``, so the fixpoint at that ``x`` has ``F' > 1 - delta``.
    The image of ``lambda_of_x`` over the interval is spanned by its values at
    the ends and at the turning points (roots of ``T_0``) in between.
    """
    for w in np.geomspace(w_lo, w_lo * span, n):
        p = TreeParams(d, w, 1.0, alpha, delta)
        roots = t_delta_roots(p)
        if len(roots) < 2:
            continue
        cand = roots + [x for x in t_delta_roots(p.with_(delta=0.0)) if roots[0] < x < roots[1]]
        vals = [lambda_of_x(x, p) for x in cand]
        if min(vals) < lam < max(vals):
            return float(w)
    return None


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(REPORT, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
