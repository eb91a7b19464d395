import json
import os

import numpy as np
import pytest

from rispace.funcrep import PiecewiseFunction, Segment

ORACLE_PATH = os.path.join(os.path.dirname(__file__), "oracles", "values.json")

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def oracle():
    with open(ORACLE_PATH) as fh:
        return json.load(fh)


def random_piecewise(rng, max_segments=4, singular=True, max_singular=0.45):
    """A random piecewise function on a random partition of (0, 1].

    Segment forms are drawn from constants, shifted powers (integrable
    singularities allowed at the left endpoint) and shifted log-powers.
    """
    n = int(rng.integers(1, max_segments + 1))
    cuts = np.sort(rng.uniform(0.02, 0.98, n - 1))
    edges = np.concatenate([[0.0], cuts, [1.0]])
    segs = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a < 1e-3:
            continue
        kind = rng.integers(0, 4 if singular else 3)
        c = float(rng.uniform(0.2, 3.0)) * (1 if rng.random() < 0.8 else -1)
        if kind == 0:
            segs.append(Segment.constant(a, b, c))
        elif kind == 1:
            segs.append(Segment.power(a, b, c, float(rng.uniform(0.2, 2.0))))
        elif kind == 2:
            segs.append(Segment.logpower(a, b, c, float(rng.uniform(0.1, 1.0)), float(rng.uniform(-1.0, 1.0))))
        else:
            segs.append(Segment.power(a, b, c, -float(rng.uniform(0.05, max_singular))))
    return PiecewiseFunction(tuple(segs))


def random_power_piecewise(rng, p, max_segments=4):
    """Random constants and shifted powers with an analytic ``int |x|^p``.

    Returns ``(f, lp_norm)``; singular exponents stay above ``-1/p``.
    """
    n = int(rng.integers(1, max_segments + 1))
    cuts = np.sort(rng.uniform(0.05, 0.95, n - 1))
    edges = np.concatenate([[0.0], cuts, [1.0]])
    segs, total = [], 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a < 1e-3:
            continue
        c = float(rng.uniform(0.2, 3.0)) * (1 if rng.random() < 0.7 else -1)
        kind = rng.integers(0, 3)
        L = b - a
        if kind == 0:
            segs.append(Segment.constant(a, b, c))
            total += abs(c) ** p * L
        else:
            alpha = float(rng.uniform(0.1, 2.0)) if kind == 1 else -float(rng.uniform(0.05, 0.9)) / p
            segs.append(Segment.power(a, b, c, alpha))
            total += abs(c) ** p * L ** (alpha * p + 1) / (alpha * p + 1)
    return PiecewiseFunction(tuple(segs)), total ** (1.0 / p)
