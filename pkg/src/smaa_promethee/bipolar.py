"""Bipolar preference vectors, bicapacities and the bipolar Choquet integral.

The bipolar extension scores an ordered pair of alternatives through a
signed per-criterion preference vector x, with x_j > 0 when the criterion
supports the first alternative and x_j < 0 when it opposes it. Aggregation
uses a bicapacity split into a positive and a negative part. The engine
works with the two-additive parameterisation: per-criterion powers ``a_j``,
symmetric pair interactions ``a_jk`` and nonpositive opposing powers
``a+_{j|k}`` (the power criterion k has to weaken j when they disagree).
The mirrored negative-part parameters are never stored; they are read
through the symmetry a-_j = a_j, a-_jk = a_jk, a-_{j|k} = a+_{k|j}.

General (not necessarily two-additive) bicapacities are supported only as
lookup tables so the sorted level-set form of the integral can be checked
against the closed form; the sampling pipeline never touches them.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .model import PerformanceTable
from .promethee import Flows, preference_tensor

__all__ = [
    "ENUMERATION_CAP",
    "EnumerationCapError",
    "ChoquetTriple",
    "ParameterLayout",
    "BicapacityParams",
    "GeneralBicapacity",
    "bipolar_preference_vector",
    "bipolar_preference_tensor",
    "bipolar_choquet_general",
    "bipolar_choquet_2additive",
    "choquet_coefficients",
    "pair_coefficient_matrices",
    "bipolar_flows",
]

# Monotonicity validation enumerates all disjoint subset pairs, 3^(n-1) per
# criterion, so the criterion count is capped unless callers raise it.
ENUMERATION_CAP = 8


class EnumerationCapError(ValueError):
    """Raised when a problem exceeds the subset-enumeration cap."""


class ChoquetTriple(NamedTuple):
    """Positive part, negative part and their difference."""

    positive: float
    negative: float
    net: float


def _check_cap(n: int, max_criteria: int) -> None:
    if n > max_criteria:
        raise EnumerationCapError(
            f"{n} criteria exceed the enumeration cap of {max_criteria}; "
            f"raise max_criteria explicitly to proceed"
        )


def _disjoint_pairs(items: tuple[int, ...]):
    """Yield every (C, D) with C, D disjoint subsets of ``items``."""
    for assignment in itertools.product((0, 1, 2), repeat=len(items)):
        c = tuple(i for i, s in zip(items, assignment) if s == 1)
        d = tuple(i for i, s in zip(items, assignment) if s == 2)
        yield c, d


@dataclass(frozen=True)
class ParameterLayout:
    """Column order of the packed two-additive parameter vector.

    Columns are the per-criterion powers, then pair interactions in
    lexicographic (j, k) order with j < k, then opposing powers over all
    ordered pairs j != k in lexicographic order. Indices here are 0-based;
    rendered names use 1-based criteria to match the file formats.
    """

    n: int
    pair_keys: tuple[tuple[int, int], ...] = field(init=False)
    opp_keys: tuple[tuple[int, int], ...] = field(init=False)
    names: tuple[str, ...] = field(init=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("need at least one criterion")
        pairs = tuple(
            (j, k) for j in range(self.n) for k in range(j + 1, self.n)
        )
        opps = tuple(
            (j, k) for j in range(self.n) for k in range(self.n) if j != k
        )
        names = tuple(
            [f"a_{j + 1}" for j in range(self.n)]
            + [f"pair_{j + 1},{k + 1}" for j, k in pairs]
            + [f"opp_{j + 1}|{k + 1}" for j, k in opps]
        )
        object.__setattr__(self, "pair_keys", pairs)
        object.__setattr__(self, "opp_keys", opps)
        object.__setattr__(self, "names", names)

    @property
    def size(self) -> int:
        return (3 * self.n * self.n - self.n) // 2

    def a_col(self, j: int) -> int:
        return j

    def pair_col(self, j: int, k: int) -> int:
        if j > k:
            j, k = k, j
        return self.n + self.pair_keys.index((j, k))

    def opp_col(self, j: int, k: int) -> int:
        return self.n + len(self.pair_keys) + self.opp_keys.index((j, k))

    def pack(self, params: "BicapacityParams") -> np.ndarray:
        if params.n != self.n:
            raise ValueError("layout and parameters disagree on n")
        vec = np.empty(self.size)
        vec[: self.n] = params.a
        vec[self.n : self.n + len(self.pair_keys)] = [
            params.pair[j, k] for j, k in self.pair_keys
        ]
        vec[self.n + len(self.pair_keys) :] = [
            params.opp[j, k] for j, k in self.opp_keys
        ]
        return vec

    def unpack(self, vec: np.ndarray) -> "BicapacityParams":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (self.size,):
            raise ValueError(f"expected vector of length {self.size}, got {vec.shape}")
        n = self.n
        pair = np.zeros((n, n))
        for idx, (j, k) in enumerate(self.pair_keys):
            pair[j, k] = pair[k, j] = vec[n + idx]
        opp = np.zeros((n, n))
        base = n + len(self.pair_keys)
        for idx, (j, k) in enumerate(self.opp_keys):
            opp[j, k] = vec[base + idx]
        return BicapacityParams(a=vec[:n].copy(), pair=pair, opp=opp)


@dataclass(frozen=True)
class BicapacityParams:
    """Two-additive bicapacity parameters.

    ``a`` holds the per-criterion powers, ``pair`` the symmetric
    interaction matrix (zero diagonal) and ``opp`` the opposing powers,
    with ``opp[j, k]`` the nonpositive amount criterion k subtracts from a
    supporting criterion j.
    """

    a: np.ndarray
    pair: np.ndarray
    opp: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=float)
        pair = np.asarray(self.pair, dtype=float)
        opp = np.asarray(self.opp, dtype=float)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "pair", pair)
        object.__setattr__(self, "opp", opp)
        n = a.shape[0]
        if a.shape != (n,) or pair.shape != (n, n) or opp.shape != (n, n):
            raise ValueError("parameter arrays must be (n,), (n, n), (n, n)")

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def validate(self, tol: float = 1e-9, max_criteria: int = ENUMERATION_CAP) -> None:
        """Raise ValueError unless the parameters describe a bicapacity.

        Checks: symmetry and zero diagonals, nonnegative powers,
        nonpositive opposing powers, the boundary normalisation
        sum(a) + sum(pair) = 1, and exhaustive monotonicity over all
        disjoint subset pairs.
        """
        n = self.n
        _check_cap(n, max_criteria)
        if not np.allclose(self.pair, self.pair.T, atol=tol, rtol=0.0):
            raise ValueError("pair interactions must be symmetric")
        if np.any(np.abs(np.diagonal(self.pair)) > tol) or np.any(
            np.abs(np.diagonal(self.opp)) > tol
        ):
            raise ValueError("diagonals must be zero")
        if np.any(self.a < -tol):
            raise ValueError("per-criterion powers must be nonnegative")
        if np.any(self.opp > tol):
            raise ValueError("opposing powers must be nonpositive")
        total = self.a.sum() + np.triu(self.pair, 1).sum()
        if abs(total - 1.0) > tol:
            raise ValueError(f"powers and interactions must sum to 1, got {total!r}")
        others = lambda j: tuple(i for i in range(n) if i != j)
        for j in range(n):
            for c, d in _disjoint_pairs(others(j)):
                lhs = self.a[j] + sum(self.pair[j, k] for k in c) + sum(
                    self.opp[j, k] for k in d
                )
                if lhs < -tol:
                    raise ValueError(
                        f"monotonicity violated at criterion {j + 1}, "
                        f"with={tuple(k + 1 for k in c)} against={tuple(k + 1 for k in d)}"
                    )

    # The negative-part parameters mirror the stored ones, so both halves
    # of the bicapacity are evaluated from the same arrays.
    def mu_plus(self, c: frozenset[int] | tuple[int, ...], d) -> float:
        c, d = tuple(c), tuple(d)
        val = float(self.a[list(c)].sum()) if c else 0.0
        for j, k in itertools.combinations(c, 2):
            val += self.pair[j, k]
        for j in c:
            for k in d:
                val += self.opp[j, k]
        return val

    def mu_minus(self, c, d) -> float:
        c, d = tuple(c), tuple(d)
        val = float(self.a[list(d)].sum()) if d else 0.0
        for j, k in itertools.combinations(d, 2):
            val += self.pair[j, k]
        for j in c:
            for k in d:
                # a-_{j|k} is read through the symmetry as a+_{k|j}
                val += self.opp[k, j]
        return val

    def to_json_dict(self) -> dict:
        n = self.n
        return {
            "a": [float(v) for v in self.a],
            "a_pair": {
                f"{j + 1},{k + 1}": float(self.pair[j, k])
                for j in range(n)
                for k in range(j + 1, n)
            },
            "a_opp_plus": {
                f"{j + 1}|{k + 1}": float(self.opp[j, k])
                for j in range(n)
                for k in range(n)
                if j != k
            },
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "BicapacityParams":
        a = np.asarray(data["a"], dtype=float)
        n = a.shape[0]
        pair = np.zeros((n, n))
        for key, val in data.get("a_pair", {}).items():
            j, k = (int(t) - 1 for t in key.split(","))
            pair[j, k] = pair[k, j] = float(val)
        opp = np.zeros((n, n))
        for key, val in data.get("a_opp_plus", {}).items():
            j, k = (int(t) - 1 for t in key.split("|"))
            opp[j, k] = float(val)
        return cls(a=a, pair=pair, opp=opp)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "BicapacityParams":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class GeneralBicapacity:
    """Positive/negative part pair tabulated over all disjoint subset pairs.

    Used to evaluate the integral straight from its definition; keys are
    (frozenset, frozenset) of 0-based criterion indices.
    """

    n: int
    plus: dict
    minus: dict

    def mu_plus(self, c, d) -> float:
        return self.plus[(frozenset(c), frozenset(d))]

    def mu_minus(self, c, d) -> float:
        return self.minus[(frozenset(c), frozenset(d))]

    @classmethod
    def from_params(
        cls, params: BicapacityParams, max_criteria: int = ENUMERATION_CAP
    ) -> "GeneralBicapacity":
        """Tabulate both parts of a two-additive bicapacity."""
        n = params.n
        _check_cap(n, max_criteria)
        plus: dict = {}
        minus: dict = {}
        for c, d in _disjoint_pairs(tuple(range(n))):
            key = (frozenset(c), frozenset(d))
            plus[key] = params.mu_plus(c, d)
            minus[key] = params.mu_minus(c, d)
        return cls(n=n, plus=plus, minus=minus)

    def validate(self, tol: float = 1e-9) -> None:
        """Check boundary values and both monotonicity directions."""
        full = frozenset(range(self.n))
        empty = frozenset()
        if abs(self.plus[(full, empty)] - 1.0) > tol:
            raise ValueError("positive part must be 1 on (J, {})")
        if abs(self.minus[(empty, full)] - 1.0) > tol:
            raise ValueError("negative part must be 1 on ({}, J)")
        for c, d in _disjoint_pairs(tuple(range(self.n))):
            key = (frozenset(c), frozenset(d))
            if key not in self.plus or key not in self.minus:
                raise ValueError(f"missing table entry for {key}")
            if not c and abs(self.plus[key]) > tol:
                raise ValueError("positive part must vanish on ({}, D)")
            if not d and abs(self.minus[key]) > tol:
                raise ValueError("negative part must vanish on (C, {})")
            rest = [j for j in range(self.n) if j not in c and j not in d]
            for j in rest:
                cj = (frozenset(c) | {j}, frozenset(d))
                dj = (frozenset(c), frozenset(d) | {j})
                if self.plus[cj] < self.plus[key] - tol:
                    raise ValueError("positive part must grow with the support side")
                if self.plus[dj] > self.plus[key] + tol:
                    raise ValueError("positive part must shrink with the opposing side")
                if self.minus[dj] < self.minus[key] - tol:
                    raise ValueError("negative part must grow with the opposing side")
                if self.minus[cj] > self.minus[key] + tol:
                    raise ValueError("negative part must shrink with the support side")


def bipolar_preference_vector(table: PerformanceTable, a: str, b: str) -> np.ndarray:
    """Signed per-criterion preference of ``a`` over ``b``.

    Componentwise: the preference degree of a over b when positive,
    otherwise minus the degree of b over a. At most one of the two degrees
    is nonzero for any criterion.
    """
    tensor = bipolar_preference_tensor(table)
    return tensor[table.alternative_index(a), table.alternative_index(b)]


def bipolar_preference_tensor(table: PerformanceTable) -> np.ndarray:
    """Signed preference vectors for all ordered pairs, (m, m, n)."""
    degrees = preference_tensor(table)
    return np.where(degrees > 0.0, degrees, -degrees.transpose(1, 0, 2))


def bipolar_choquet_general(x, bicap: GeneralBicapacity) -> ChoquetTriple:
    """Integral of a signed vector against a tabulated bicapacity.

    Walks criteria sorted by increasing magnitude; each magnitude is paired
    with the two level sets at that threshold (supporters and opponents at
    least that strong) and weighted by how much the bicapacity drops when
    the threshold moves past it. Past the largest magnitude both level sets
    are empty. Criteria at zero contribute nothing.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if n != bicap.n:
        raise ValueError("vector length and bicapacity size disagree")
    mags = np.abs(x)
    order = np.argsort(mags, kind="stable")

    def level_sets(threshold: float) -> tuple[frozenset, frozenset]:
        sup = frozenset(np.flatnonzero(x >= threshold).tolist())
        opp = frozenset(np.flatnonzero(-x >= threshold).tolist())
        return sup, opp

    pos = 0.0
    neg = 0.0
    for t, idx in enumerate(order):
        v = mags[idx]
        if v <= 0.0:
            continue
        here = level_sets(v)
        if t + 1 < n:
            nxt = level_sets(mags[order[t + 1]])
        else:
            nxt = (frozenset(), frozenset())
        pos += v * (bicap.mu_plus(*here) - bicap.mu_plus(*nxt))
        neg += v * (bicap.mu_minus(*here) - bicap.mu_minus(*nxt))
    return ChoquetTriple(positive=pos, negative=neg, net=pos - neg)


def bipolar_choquet_2additive(x, params: BicapacityParams) -> ChoquetTriple:
    """Closed form of the integral for two-additive bicapacities.

    Supporting criteria contribute their power times their degree, pairs of
    supporters the interaction times the weaker degree, and each
    supporter/opponent pair the opposing power times the weaker magnitude.
    The negative part mirrors this on the opponents.
    """
    x = np.asarray(x, dtype=float)
    n = params.n
    if x.shape != (n,):
        raise ValueError(f"expected vector of length {n}, got {x.shape}")
    pos = 0.0
    neg = 0.0
    for j in range(n):
        if x[j] > 0.0:
            pos += params.a[j] * x[j]
        elif x[j] < 0.0:
            neg -= params.a[j] * x[j]
    for j in range(n):
        for k in range(j + 1, n):
            if x[j] > 0.0 and x[k] > 0.0:
                pos += params.pair[j, k] * min(x[j], x[k])
            elif x[j] < 0.0 and x[k] < 0.0:
                neg -= params.pair[j, k] * max(x[j], x[k])
    for j in range(n):
        for k in range(n):
            if j == k:
                continue
            if x[j] > 0.0 > x[k]:
                pos += params.opp[j, k] * min(x[j], -x[k])
                # the mirrored a-_{j|k} = a+_{k|j} enters the negative part
                neg -= params.opp[k, j] * max(-x[j], x[k])
    return ChoquetTriple(positive=pos, negative=neg, net=pos - neg)


def choquet_coefficients(x, layout: ParameterLayout) -> tuple[np.ndarray, np.ndarray]:
    """Linear coefficients of the integral's two parts in the packed vector.

    For a fixed signed vector both parts are linear in the parameters;
    this returns rows ``cp`` and ``cn`` with positive part = cp . theta and
    negative part = cn . theta for any packed parameter vector theta.
    """
    x = np.asarray(x, dtype=float)
    n = layout.n
    if x.shape != (n,):
        raise ValueError(f"expected vector of length {n}, got {x.shape}")
    cp = np.zeros(layout.size)
    cn = np.zeros(layout.size)
    for j in range(n):
        if x[j] > 0.0:
            cp[j] = x[j]
        elif x[j] < 0.0:
            cn[j] = -x[j]
    for idx, (j, k) in enumerate(layout.pair_keys):
        col = n + idx
        if x[j] > 0.0 and x[k] > 0.0:
            cp[col] = min(x[j], x[k])
        elif x[j] < 0.0 and x[k] < 0.0:
            cn[col] = -max(x[j], x[k])
    base = n + len(layout.pair_keys)
    for idx, (j, k) in enumerate(layout.opp_keys):
        col = base + idx
        if x[j] > 0.0 > x[k]:
            cp[col] = min(x[j], -x[k])
        elif x[k] > 0.0 > x[j]:
            # a+_{j|k} doubles as a-_{k|j} inside the negative part
            cn[col] = min(x[k], -x[j])
    return cp, cn


def pair_coefficient_matrices(
    table: PerformanceTable, layout: ParameterLayout
) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient rows of both parts for every ordered pair.

    Returns (Cp, Cn), each of shape (m*m, layout.size), with the row of
    pair (a, b) at index a*m + b. Diagonal rows are zero.
    """
    tensor = bipolar_preference_tensor(table)
    m = table.n_alternatives
    cp = np.zeros((m * m, layout.size))
    cn = np.zeros((m * m, layout.size))
    for a in range(m):
        for b in range(m):
            if a == b:
                continue
            cp[a * m + b], cn[a * m + b] = choquet_coefficients(tensor[a, b], layout)
    return cp, cn


def bipolar_flows(table: PerformanceTable, params: BicapacityParams) -> Flows:
    """Bipolar flows: per-alternative averages of the integral's parts."""
    tensor = bipolar_preference_tensor(table)
    m = table.n_alternatives
    pos = np.zeros(m)
    neg = np.zeros(m)
    for a in range(m):
        for b in range(m):
            if a == b:
                continue
            val = bipolar_choquet_2additive(tensor[a, b], params)
            pos[a] += val.positive
            neg[a] += val.negative
    pos /= m - 1
    neg /= m - 1
    return Flows(positive=pos, negative=neg, net=pos - neg)
