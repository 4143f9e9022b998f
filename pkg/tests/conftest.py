"""Shared fixtures and independent reference implementations.

The reference functions here are written as plain loops on purpose: they
must not share code paths with the vectorised implementations under test.
"""

from pathlib import Path

import numpy as np
import pytest

from smaa_promethee.bipolar import BicapacityParams, ParameterLayout
from smaa_promethee.model import Criterion, PerformanceTable, load_problem

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# Equal-weight net flows for the students fixture (q = p = 0), worked out
# by hand from pairwise win/loss counts: the per-criterion net score of an
# alternative is (wins - losses) / 7 and the three criteria average with
# weight 1/3 each.
TABLE1_NET_EQUAL_WEIGHTS = np.array(
    [0.0, -4 / 21, 5 / 21, 0.0, -1 / 21, -2 / 7, 2 / 7, 0.0]
)


@pytest.fixture(scope="session")
def students() -> PerformanceTable:
    return load_problem(FIXTURES / "students.json")


@pytest.fixture(scope="session")
def students_ramp() -> PerformanceTable:
    return load_problem(FIXTURES / "students_ramp.json")


def ramp_degree(d: float, q: float, p: float) -> float:
    """Scalar preference degree; independent of the package implementation."""
    if q == p:
        return 1.0 if d > q else 0.0
    if d <= q:
        return 0.0
    if d >= p:
        return 1.0
    return (d - q) / (p - q)


def classical_flows_reference(table: PerformanceTable, weights):
    """Plain-loop positive/negative/net flows used as an oracle."""
    m = table.n_alternatives
    weights = np.asarray(weights, dtype=float)
    pos = np.zeros(m)
    neg = np.zeros(m)
    for ia, a in enumerate(table.alternatives):
        for ib, b in enumerate(table.alternatives):
            if ia == ib:
                continue
            pi_ab = 0.0
            for j, crit in enumerate(table.criteria):
                d = table.difference(crit.name, a, b)
                pi_ab += weights[j] * ramp_degree(d, crit.q, crit.p)
            pos[ia] += pi_ab
            neg[ib] += pi_ab
    pos /= m - 1
    neg /= m - 1
    return pos, neg, pos - neg


def random_valid_params(
    rng: np.random.Generator, n: int, interaction_scale: float = 0.25
) -> BicapacityParams:
    """Draw random parameters, shrinking interactions until they validate."""
    a = rng.random(n) + 0.05
    pair = rng.normal(0.0, interaction_scale, size=(n, n))
    pair = (pair + pair.T) / 2.0
    np.fill_diagonal(pair, 0.0)
    opp = -np.abs(rng.normal(0.0, interaction_scale, size=(n, n)))
    np.fill_diagonal(opp, 0.0)
    for _ in range(60):
        total = a.sum() + np.triu(pair, 1).sum()
        if total > 1e-6:
            cand = BicapacityParams(a / total, pair / total, opp / total)
            try:
                cand.validate()
                return cand
            except ValueError:
                pass
        pair = pair * 0.7
        opp = opp * 0.7
    raise AssertionError("failed to generate valid parameters")


def random_table(
    rng: np.random.Generator, m: int, n: int, q: float = 0.0, p: float = 0.0
) -> PerformanceTable:
    criteria = tuple(Criterion(name=f"g{j + 1}", q=q, p=p) for j in range(n))
    labels = tuple(f"x{i + 1}" for i in range(m))
    evals = rng.uniform(0.0, 10.0, size=(m, n))
    return PerformanceTable(labels, criteria, evals)


def pack_layout(params: BicapacityParams) -> np.ndarray:
    return ParameterLayout(params.n).pack(params)
