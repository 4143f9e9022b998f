"""Classical PROMETHEE I and II.

Preference degrees use the linear ramp with indifference threshold q and
preference threshold p; q == p degenerates to a step. Flows are averaged
over the m - 1 opponents. PROMETHEE I builds a partial order from the
positive/negative flow pair, PROMETHEE II a complete preorder from the net
flow. All flow comparisons share one absolute tie tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .model import PerformanceTable

__all__ = [
    "FLOW_TIE_TOL",
    "Relation",
    "Flows",
    "preference_degree",
    "preference_tensor",
    "aggregated_preference",
    "flows_from_preference",
    "classical_flows",
    "promethee1_relation",
    "promethee2_ranking",
]

# Absolute tolerance under which two flow values count as equal.
FLOW_TIE_TOL = 1e-9


class Relation(IntEnum):
    """Pairwise outranking verdicts; SELF marks the diagonal.

    OUTRANKED is the converse cell of a PREFERRED pair. Without it the
    indifference and incomparability codes could not both stay symmetric.
    """

    SELF = 0
    PREFERRED = 1
    INDIFFERENT = 2
    INCOMPARABLE = 3
    OUTRANKED = 4


@dataclass(frozen=True)
class Flows:
    """Positive, negative and net flow per alternative."""

    positive: np.ndarray
    negative: np.ndarray
    net: np.ndarray

    def __post_init__(self) -> None:
        if not (self.positive.shape == self.negative.shape == self.net.shape):
            raise ValueError("flow arrays must share one shape")


def preference_degree(d, q: float, p: float):
    """Degree to which a difference ``d`` expresses preference.

    0 up to q, linear between q and p, 1 from p on. With q == p the ramp
    collapses to a step: full preference as soon as d exceeds q.
    Accepts scalars or arrays.
    """
    if not 0.0 <= q <= p:
        raise ValueError(f"thresholds must satisfy 0 <= q <= p, got q={q} p={p}")
    d = np.asarray(d, dtype=float)
    if p == q:
        out = (d > q).astype(float)
    else:
        out = np.clip((d - q) / (p - q), 0.0, 1.0)
        # the ramp is open at q: a difference of exactly q is indifference
        out = np.where(d <= q, 0.0, out)
    return out if out.ndim else float(out)


def preference_tensor(table: PerformanceTable) -> np.ndarray:
    """Per-criterion preference degrees for all ordered pairs, (m, m, n)."""
    diff = table.difference_tensor()
    out = np.empty_like(diff)
    for j, c in enumerate(table.criteria):
        out[:, :, j] = preference_degree(diff[:, :, j], c.q, c.p)
    return out


def _check_weights(weights: np.ndarray, n: int, tol: float = 1e-9) -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (n,):
        raise ValueError(f"expected {n} weights, got shape {weights.shape}")
    if np.any(weights < -tol):
        raise ValueError("weights must be nonnegative")
    if abs(weights.sum() - 1.0) > tol:
        raise ValueError(f"weights must sum to 1, got {weights.sum()!r}")
    return weights


def aggregated_preference(table: PerformanceTable, weights) -> np.ndarray:
    """Weighted aggregated preference matrix pi, shape (m, m)."""
    weights = _check_weights(weights, table.n_criteria)
    return preference_tensor(table) @ weights


def flows_from_preference(pi: np.ndarray) -> Flows:
    """Positive/negative/net flows from an aggregated preference matrix."""
    m = pi.shape[0]
    if pi.shape != (m, m) or m < 2:
        raise ValueError("pi must be square with at least two alternatives")
    # diagonal is zero by construction (no self-difference preference)
    positive = (pi.sum(axis=1) - pi.diagonal()) / (m - 1)
    negative = (pi.sum(axis=0) - pi.diagonal()) / (m - 1)
    return Flows(positive=positive, negative=negative, net=positive - negative)


def classical_flows(table: PerformanceTable, weights) -> Flows:
    """PROMETHEE flows of every alternative under one weight vector."""
    return flows_from_preference(aggregated_preference(table, weights))


def promethee1_relation(flows: Flows, tol: float = FLOW_TIE_TOL) -> np.ndarray:
    """Pairwise PROMETHEE I verdict matrix.

    Entry [i, j] is PREFERRED when i is at least as good as j on both the
    positive and the negative flow and strictly better on at least one,
    INDIFFERENT when both flows tie, INCOMPARABLE when the two flows
    disagree; the mirror cell of a PREFERRED entry is OUTRANKED. Returned
    as an int8 matrix of Relation codes.
    """
    pos, neg = flows.positive, flows.negative
    m = pos.shape[0]
    out = np.full((m, m), int(Relation.INCOMPARABLE), dtype=np.int8)
    dpos = pos[:, None] - pos[None, :]
    dneg = neg[:, None] - neg[None, :]
    indiff = (np.abs(dpos) <= tol) & (np.abs(dneg) <= tol)
    pref = (
        (dpos >= -tol)
        & (dneg <= tol)
        & ((dpos > tol) | (dneg < -tol))
    )
    out[indiff] = int(Relation.INDIFFERENT)
    # pref and pref.T are mutually exclusive under the banded comparisons,
    # so the write order does not matter
    out[pref.T] = int(Relation.OUTRANKED)
    out[pref] = int(Relation.PREFERRED)
    np.fill_diagonal(out, int(Relation.SELF))
    return out


def promethee2_ranking(net: np.ndarray, tol: float = FLOW_TIE_TOL) -> np.ndarray:
    """Complete-preorder ranks from net flows, ties sharing the better rank.

    rank(i) = 1 + number of alternatives with a net flow larger than
    net(i) + tol.
    """
    net = np.asarray(net, dtype=float)
    return 1 + (net[None, :] > net[:, None] + tol).sum(axis=1)
