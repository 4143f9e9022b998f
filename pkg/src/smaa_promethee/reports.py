"""Deterministic rendering of aggregation results.

Frequencies are rounded once, to percentages with 3 decimals, and that
rounded value is what every format carries: a number printed in the text
or CSV table re-parses to exactly the number stored in the JSON report.
Parameter vectors round to 6 decimals under the same contract. Nothing
here depends on time, locale or dict iteration order.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .smaa import SmaaResults

__all__ = ["results_to_dict", "render_text", "render_csv"]

PCT_DECIMALS = 3
PARAM_DECIMALS = 6


def _pct(fraction: float) -> float:
    return round(float(fraction) * 100.0, PCT_DECIMALS)


def _param(value: float) -> float:
    return round(float(value), PARAM_DECIMALS)


def _pct_matrix(mat: np.ndarray) -> list[list[float]]:
    return [[_pct(v) for v in row] for row in mat]


def results_to_dict(results: SmaaResults) -> dict:
    alts = list(results.alternatives)
    central = {}
    for name in alts:
        if name in results.central_weights:
            central[name] = [_param(v) for v in results.central_weights[name]]
    return {
        "mode": results.mode,
        "sample_count": results.sample_count,
        "alternatives": alts,
        "parameters": list(results.columns),
        "rank_acceptability_pct": _pct_matrix(results.rank_acceptability),
        "p2_preference_pct": _pct_matrix(results.p2_pref),
        "p2_indifference_pct": _pct_matrix(results.p2_indiff),
        "p1_preference_pct": _pct_matrix(results.p1_pref),
        "p1_indifference_pct": _pct_matrix(results.p1_indiff),
        "p1_incomparability_pct": _pct_matrix(results.p1_incomp),
        "central_weights": central,
        "barycenter": [_param(v) for v in results.barycenter],
        "ror_possible_approx": results.ror_possible_approx.tolist(),
        "ror_necessary_approx": results.ror_necessary_approx.tolist(),
    }


def _matrix_block(title: str, row_labels: list[str], col_labels: list[str],
                  rows: list[list[float]], decimals: int) -> list[str]:
    width = max(10, max(len(c) for c in col_labels) + 2)
    label_w = max(len(r) for r in row_labels) + 2
    lines = [title]
    lines.append(" " * label_w + "".join(f"{c:>{width}}" for c in col_labels))
    for label, row in zip(row_labels, rows):
        cells = "".join(f"{v:>{width}.{decimals}f}" for v in row)
        lines.append(f"{label:<{label_w}}" + cells)
    lines.append("")
    return lines


def render_text(report: dict) -> str:
    alts = report["alternatives"]
    params = report["parameters"]
    ranks = [f"r{r}" for r in range(1, len(alts) + 1)]
    lines: list[str] = [
        f"SMAA report  mode={report['mode']}  samples={report['sample_count']}",
        "",
    ]
    lines += _matrix_block(
        "Rank acceptability (%)", alts, ranks,
        report["rank_acceptability_pct"], PCT_DECIMALS,
    )
    lines += _matrix_block(
        "Complete-ranking preference frequency (%)", alts, alts,
        report["p2_preference_pct"], PCT_DECIMALS,
    )
    lines += _matrix_block(
        "Complete-ranking indifference frequency (%)", alts, alts,
        report["p2_indifference_pct"], PCT_DECIMALS,
    )
    lines += _matrix_block(
        "Partial-order preference frequency (%)", alts, alts,
        report["p1_preference_pct"], PCT_DECIMALS,
    )
    lines += _matrix_block(
        "Partial-order indifference frequency (%)", alts, alts,
        report["p1_indifference_pct"], PCT_DECIMALS,
    )
    lines += _matrix_block(
        "Partial-order incomparability frequency (%)", alts, alts,
        report["p1_incomparability_pct"], PCT_DECIMALS,
    )
    central_rows = [report["central_weights"][a] for a in alts
                    if a in report["central_weights"]]
    central_labels = [a for a in alts if a in report["central_weights"]]
    if central_rows:
        lines += _matrix_block(
            "Central parameter vectors (means of rank-1 samples)",
            central_labels, params, central_rows, PARAM_DECIMALS,
        )
    lines += _matrix_block(
        "Barycenter of the sampled polytope", ["all"], params,
        [report["barycenter"]], PARAM_DECIMALS,
    )

    def grid(title: str, matrix: list[list[bool]]) -> list[str]:
        width = max(6, max(len(c) for c in alts) + 2)
        label_w = max(len(r) for r in alts) + 2
        out = [title, " " * label_w + "".join(f"{c:>{width}}" for c in alts)]
        for label, row in zip(alts, matrix):
            cells = "".join(f"{'X' if v else '.':>{width}}" for v in row)
            out.append(f"{label:<{label_w}}" + cells)
        out.append("")
        return out

    lines += grid("Outranking possible (sampled estimate)",
                  report["ror_possible_approx"])
    lines += grid("Outranking necessary (sampled estimate)",
                  report["ror_necessary_approx"])
    return "\n".join(lines)


def render_csv(report: dict) -> str:
    """Long-format CSV: section, row label, column label, value."""
    alts = report["alternatives"]
    params = report["parameters"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["section", "row", "col", "value"])

    def emit(section: str, row_labels, col_labels, rows) -> None:
        for label, row in zip(row_labels, rows):
            for col, v in zip(col_labels, row):
                writer.writerow([section, label, col, v])

    ranks = [f"r{r}" for r in range(1, len(alts) + 1)]
    emit("rank_acceptability_pct", alts, ranks, report["rank_acceptability_pct"])
    for key in ("p2_preference_pct", "p2_indifference_pct", "p1_preference_pct",
                "p1_indifference_pct", "p1_incomparability_pct"):
        emit(key, alts, alts, report[key])
    for name in alts:
        if name in report["central_weights"]:
            emit("central_weights", [name], params, [report["central_weights"][name]])
    emit("barycenter", ["all"], params, [report["barycenter"]])
    for key in ("ror_possible_approx", "ror_necessary_approx"):
        emit(key, alts, alts, report[key])
    return buf.getvalue()
