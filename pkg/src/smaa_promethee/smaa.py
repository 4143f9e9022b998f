"""Monte-Carlo statistics over a batch of sampled parameter vectors.

Every sample yields per-pair bipolar flow values through one matrix
product with precomputed coefficient rows, so the per-sample work is two
GEMMs plus integer relation counting. Classical batches (interaction
columns pinned to zero) run through the same pipeline: with zero
interactions the bipolar aggregation reduces exactly to the weighted
preference sum, which keeps the two modes consistent to the bit.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._kernels import count_relations
from .bipolar import ParameterLayout, pair_coefficient_matrices
from .elicitation import ConstraintSystem
from .lp import exact_ror_pair
from .model import PerformanceTable
from .promethee import FLOW_TIE_TOL
from .sampler import Polytope, SampleBatch

__all__ = [
    "SmaaResults",
    "aggregate",
    "flow_matrices",
    "validate_against_exact_ror",
    "worker_count",
]

_COUNT_CHUNK = 65536
_PARTITION_TOL = 1e-12
_CONVEXITY_TOL = 1e-9
_FLOW_BALANCE_TOL = 1e-9
_CLASSICAL_COLUMN_TOL = 1e-8


@dataclass(frozen=True)
class SmaaResults:
    """Sample-fraction statistics for one aggregation run.

    ``rank_acceptability[i, r]`` is the share of samples putting
    alternative i at rank r+1. ``central_weights`` holds, per alternative
    that reaches rank 1 at least once, the mean of the samples that put it
    first; alternatives that never reach rank 1 are absent. Frequency
    matrices are fractions of the sample count; the approximate outranking
    matrices follow from the rank-2 frequencies alone.
    """

    alternatives: tuple[str, ...]
    columns: tuple[str, ...]
    mode: str
    sample_count: int
    rank_acceptability: np.ndarray
    central_weights: dict[str, np.ndarray]
    barycenter: np.ndarray
    p2_pref: np.ndarray
    p2_indiff: np.ndarray
    p1_pref: np.ndarray
    p1_indiff: np.ndarray
    p1_incomp: np.ndarray
    ror_possible_approx: np.ndarray
    ror_necessary_approx: np.ndarray


def flow_matrices(
    table: PerformanceTable, data: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Positive and negative flow matrices (samples x alternatives)."""
    m = len(table.alternatives)
    layout = ParameterLayout(len(table.criteria))
    cp, cn = pair_coefficient_matrices(table, layout)
    s = data.shape[0]
    pos = (data @ cp.T).reshape(s, m, m).sum(axis=2) / (m - 1)
    neg = (data @ cn.T).reshape(s, m, m).sum(axis=2) / (m - 1)
    return pos, neg


def aggregate(
    table: PerformanceTable,
    batch: SampleBatch,
    mode: str = "bipolar",
    tau: float = FLOW_TIE_TOL,
    polytope: Polytope | None = None,
    chunk: int = _COUNT_CHUNK,
) -> SmaaResults:
    """Accumulate all relation frequencies over the batch.

    When ``polytope`` is given, the barycenter and every central weight
    vector are checked against its rows (they are convex combinations of
    feasible samples, so this guards the pipeline, not the math).
    """
    if batch.sample_count == 0:
        raise ValueError("sample batch is empty")
    m = len(table.alternatives)
    if m < 2:
        raise ValueError("need at least two alternatives")
    layout = ParameterLayout(len(table.criteria))
    if batch.columns != layout.names:
        raise ValueError("batch columns do not match the parameter layout")
    if mode == "classical":
        inter = batch.data[:, layout.n:]
        if inter.size and np.abs(inter).max() > _CLASSICAL_COLUMN_TOL:
            raise ValueError(
                "classical mode requires interaction and opposing-power "
                "columns pinned to zero"
            )
    elif mode != "bipolar":
        raise ValueError(f"unknown mode {mode!r}")

    cp, cn = pair_coefficient_matrices(table, layout)
    rank_counts = np.zeros((m, m), dtype=np.int64)
    p1_pref = np.zeros((m, m), dtype=np.int64)
    p1_ind = np.zeros((m, m), dtype=np.int64)
    p1_inc = np.zeros((m, m), dtype=np.int64)
    p2_pref = np.zeros((m, m), dtype=np.int64)
    p2_ind = np.zeros((m, m), dtype=np.int64)
    cw_sum = np.zeros((m, layout.size))
    data = batch.data
    total = data.shape[0]
    worst_imbalance = 0.0
    for lo in range(0, total, chunk):
        z = data[lo : lo + chunk]
        s = z.shape[0]
        pos = (z @ cp.T).reshape(s, m, m).sum(axis=2) / (m - 1)
        neg = (z @ cn.T).reshape(s, m, m).sum(axis=2) / (m - 1)
        imbalance = np.abs((pos - neg).sum(axis=1)).max()
        worst_imbalance = max(worst_imbalance, float(imbalance))
        first_mask = np.zeros((s, m), dtype=np.uint8)
        count_relations(pos, neg, tau, rank_counts, p1_pref, p1_ind, p1_inc,
                        p2_pref, p2_ind, first_mask)
        cw_sum += first_mask.astype(np.float64).T @ z
    if worst_imbalance > _FLOW_BALANCE_TOL:
        raise AssertionError(
            f"net flows do not sum to zero (worst {worst_imbalance:.3e})"
        )

    frac = 1.0 / total
    b = rank_counts * frac
    p2_pref_f = p2_pref * frac
    p2_ind_f = p2_ind * frac
    central = {
        table.alternatives[i]: cw_sum[i] / rank_counts[i, 0]
        for i in range(m)
        if rank_counts[i, 0] > 0
    }
    possible = p2_pref > 0
    necessary = np.abs(p2_pref_f + p2_ind_f - 1.0) <= _PARTITION_TOL

    results = SmaaResults(
        alternatives=table.alternatives,
        columns=batch.columns,
        mode=mode,
        sample_count=total,
        rank_acceptability=b,
        central_weights=central,
        barycenter=data.mean(axis=0),
        p2_pref=p2_pref_f,
        p2_indiff=p2_ind_f,
        p1_pref=p1_pref * frac,
        p1_indiff=p1_ind * frac,
        p1_incomp=p1_inc * frac,
        ror_possible_approx=possible,
        ror_necessary_approx=necessary,
    )
    _check_invariants(results, polytope)
    return results


def _check_invariants(results: SmaaResults, polytope: Polytope | None) -> None:
    m = len(results.alternatives)
    b = results.rank_acceptability
    if np.abs(b.sum(axis=1) - 1.0).max() > _PARTITION_TOL:
        raise AssertionError("rank acceptability rows do not sum to 1")
    off = ~np.eye(m, dtype=bool)
    p2_total = results.p2_pref + results.p2_pref.T + results.p2_indiff
    if np.abs(p2_total[off] - 1.0).max() > _PARTITION_TOL:
        raise AssertionError("ranking relation frequencies do not partition")
    p1_total = (results.p1_pref + results.p1_pref.T
                + results.p1_indiff + results.p1_incomp)
    if np.abs(p1_total[off] - 1.0).max() > _PARTITION_TOL:
        raise AssertionError("partial-order relation frequencies do not partition")
    if not np.array_equal(results.p1_indiff, results.p1_indiff.T):
        raise AssertionError("indifference frequencies are not symmetric")
    if not np.array_equal(results.p1_incomp, results.p1_incomp.T):
        raise AssertionError("incomparability frequencies are not symmetric")
    for i, name in enumerate(results.alternatives):
        if (b[i, 0] > 0) != (name in results.central_weights):
            raise AssertionError("central weight presence must track rank-1 mass")
    if polytope is not None:
        vectors = [results.barycenter, *results.central_weights.values()]
        for vec in vectors:
            if polytope.full_eq_A.shape[0]:
                err = np.abs(polytope.full_eq_A @ vec - polytope.full_eq_b).max()
                if err > _CONVEXITY_TOL:
                    raise AssertionError("mean parameter vector violates an equality")
            if polytope.full_ub_A.shape[0]:
                err = (polytope.full_ub_A @ vec - polytope.full_ub_b).max()
                if err > _CONVEXITY_TOL:
                    raise AssertionError("mean parameter vector leaves the polytope")


def worker_count() -> int:
    """Worker cap for the exact outranking sweep (SMAA_THREADS wins)."""
    env = os.environ.get("SMAA_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def validate_against_exact_ror(
    results: SmaaResults,
    system: ConstraintSystem,
    table: PerformanceTable,
    strict: bool = True,
) -> dict:
    """Compare the sampled outranking estimates with the exact LP verdicts.

    Checks the two one-way implications (exact-necessary forces frequency
    sum 1; positive preference frequency forces exact-possible) and
    reports, without failing, pairs where the converse directions do not
    hold. The diagonal is trivially consistent and skipped.
    """
    m = len(table.alternatives)
    names = table.alternatives
    necessary = np.eye(m, dtype=bool)
    possible = np.eye(m, dtype=bool)
    pairs = [(i, j) for i in range(m) for j in range(m) if i != j]

    def solve(pair: tuple[int, int]):
        i, j = pair
        return pair, exact_ror_pair(system, table, names[i], names[j])

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        for (i, j), verdict in pool.map(solve, pairs):
            possible[i, j] = verdict.possible
            necessary[i, j] = verdict.necessary

    freq_sum = results.p2_pref + results.p2_indiff
    report = {
        "possible_exact": possible.tolist(),
        "necessary_exact": necessary.tolist(),
        "violations_necessary": [],
        "violations_possible": [],
        "converse_necessary": [],
        "converse_possible": [],
    }
    for i, j in pairs:
        name_pair = [names[i], names[j]]
        approx_necessary = abs(freq_sum[i, j] - 1.0) <= _PARTITION_TOL
        approx_possible = results.p2_pref[i, j] > 0
        if necessary[i, j] and not approx_necessary:
            report["violations_necessary"].append(name_pair)
        if approx_possible and not possible[i, j]:
            report["violations_possible"].append(name_pair)
        if approx_necessary and not necessary[i, j]:
            report["converse_necessary"].append(name_pair)
        if possible[i, j] and not approx_possible:
            report["converse_possible"].append(name_pair)
    if strict and (report["violations_necessary"] or report["violations_possible"]):
        raise AssertionError(
            "sampled outranking estimates contradict the exact verdicts: "
            f"{report['violations_necessary']} / {report['violations_possible']}"
        )
    return report
