"""Wasserstein-type distances W_{p,q} between persistence diagrams.

p is the ground metric exponent on the half-plane, q the outer exponent over
the matched pairs.  Points may be matched to the diagonal; the distance of a
point to the diagonal under d_p is (death - birth) * 2^(1/p - 1), attained at
the midpoint projection.  Weighted variants multiply each pair cost by the
average weight of its two endpoints (the diagonal contributes the weight of
the projection point, which vanishes for the standard weighting).

Finite q reduces to a balanced linear assignment on an (n+m) x (n+m) matrix
(solved exactly with scipy); q = infinity is a threshold search over the
candidate costs with a bipartite feasibility test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import DimensionMismatchError, ValidationError
from .persistence import PersistenceDiagram

INF = math.inf
SQRT2 = math.sqrt(2.0)

__all__ = [
    "Weighting",
    "Matching",
    "wasserstein",
    "bottleneck",
    "weighted_wasserstein",
    "evaluate_matching",
    "diagonal_projection",
]


@dataclass(frozen=True)
class Weighting:
    """Nonnegative weight function on the closed half-plane above the diagonal.

    `linear` marks weightings that are affine along straight segments, for
    which trapezoid rules and endpoint-average costs are exact.  Custom
    weightings are accepted as plain callables (continuity is the caller's
    responsibility).
    """

    kind: str
    fn: Callable[[float, float], float]
    linear: bool

    def __call__(self, x: float, y: float) -> float:
        return float(self.fn(x, y))

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        if self.kind == "uniform":
            return np.ones(len(pts))
        if self.kind == "standard":
            return (pts[:, 1] - pts[:, 0]) / SQRT2
        return np.array([self.fn(x, y) for x, y in pts], dtype=float)

    @staticmethod
    def uniform() -> "Weighting":
        return Weighting("uniform", lambda x, y: 1.0, linear=True)

    @staticmethod
    def standard() -> "Weighting":
        """Distance to the diagonal: w(x, y) = (y - x) / sqrt(2)."""
        return Weighting("standard", lambda x, y: (y - x) / SQRT2, linear=True)

    @staticmethod
    def custom(fn: Callable[[float, float], float], linear: bool = False) -> "Weighting":
        return Weighting("custom", fn, linear=linear)

    @staticmethod
    def named(name: str) -> "Weighting":
        if name == "uniform":
            return Weighting.uniform()
        if name == "standard":
            return Weighting.standard()
        raise ValidationError(f"unknown weighting {name!r}")


@dataclass(frozen=True)
class Matching:
    """Partial bijection between two diagrams plus diagonal assignments.

    Indices refer to the canonical point order of the respective diagram.
    `cost` is the distance value re-evaluated from the assignment itself.
    """

    pairs: tuple[tuple[int, int], ...]
    p_to_diagonal: tuple[int, ...]
    q_to_diagonal: tuple[int, ...]
    cost: float

    def as_dict(self) -> dict:
        return {
            "pairs": [list(pq) for pq in self.pairs],
            "p_to_diagonal": list(self.p_to_diagonal),
            "q_to_diagonal": list(self.q_to_diagonal),
            "cost": self.cost,
        }


def _check_exponent(name, v):
    if not (v == INF or v >= 1):
        raise ValidationError(f"{name} must be >= 1 or infinity, got {v}")


def _pair_costs(A: np.ndarray, B: np.ndarray, p) -> np.ndarray:
    dx = np.abs(A[:, None, 0] - B[None, :, 0])
    dy = np.abs(A[:, None, 1] - B[None, :, 1])
    if p == INF:
        return np.maximum(dx, dy)
    if p == 1:
        return dx + dy
    if p == 2:
        return np.hypot(dx, dy)
    return (dx**p + dy**p) ** (1.0 / p)


def _diag_costs(pts: np.ndarray, p) -> np.ndarray:
    gap = pts[:, 1] - pts[:, 0]
    exponent = -1.0 if p == INF else 1.0 / p - 1.0
    return gap * 2.0**exponent


def diagonal_projection(points: np.ndarray) -> np.ndarray:
    """Nearest diagonal point under d_p for every p: the midpoint."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    mid = (pts[:, 0] + pts[:, 1]) / 2.0
    return np.column_stack([mid, mid])


def _active_points(P: PersistenceDiagram, include_essential: bool):
    if include_essential:
        idx = np.arange(P.n_points)
    else:
        idx = np.flatnonzero(~P.essential)
    return P.points[idx] if P.n_points else np.empty((0, 2)), idx


def _extract(rows, cols, n, m):
    pairs, p_diag, q_diag = [], [], []
    for r, c in zip(rows, cols):
        if r < n and c < m:
            pairs.append((int(r), int(c)))
        elif r < n:
            p_diag.append(int(r))
        elif c < m:
            q_diag.append(int(c))
    return pairs, p_diag, q_diag


def _solve_finite_q(costs, dp, dq, q):
    n, m = costs.shape
    big = np.full((n + m, m + n), np.inf)
    big[:n, :m] = costs**q
    if n:
        big[np.arange(n), m + np.arange(n)] = dp**q
    if m:
        big[n + np.arange(m), np.arange(m)] = dq**q
    big[n:, m:] = 0.0
    rows, cols = linear_sum_assignment(big)
    total = float(big[rows, cols].sum())
    return total ** (1.0 / q), *_extract(rows, cols, n, m)


def _solve_sup_q(costs, dp, dq):
    """Minimize the max pair cost: threshold search + bipartite feasibility."""
    n, m = costs.shape

    def match_at(c):
        rows, cols, data = [], [], []
        ii, jj = np.nonzero(costs <= c)
        rows.extend(ii)
        cols.extend(jj)
        for i in np.flatnonzero(dp <= c):
            rows.append(i)
            cols.append(m + i)
        for j in np.flatnonzero(dq <= c):
            rows.append(n + j)
            cols.append(j)
        for j in range(m):  # diagonal-to-diagonal slots are free
            for i in range(n):
                rows.append(n + j)
                cols.append(m + i)
        data = np.ones(len(rows), dtype=np.int8)
        graph = csr_matrix((data, (rows, cols)), shape=(n + m, m + n))
        col_of = maximum_bipartite_matching(graph, perm_type="column")
        return col_of if np.all(col_of >= 0) else None

    candidates = np.unique(np.concatenate([costs.ravel(), dp, dq, [0.0]]))
    lo, hi = 0, len(candidates) - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        got = match_at(candidates[mid])
        if got is not None:
            best = (candidates[mid], got)
            hi = mid - 1
        else:
            lo = mid + 1
    assert best is not None  # matching everything to the diagonal is feasible
    value, col_of = best
    rows = np.arange(n + m)
    return float(value), *_extract(rows, col_of, n, m)


def _solve(costs, dp, dq, q):
    n, m = costs.shape
    if n == 0 and m == 0:
        return 0.0, [], [], []
    if q == INF:
        return _solve_sup_q(costs, dp, dq)
    return _solve_finite_q(costs, dp, dq, q)


def _weight_factors(weighting, A, B):
    wa = weighting.apply(A) if len(A) else np.empty(0)
    wb = weighting.apply(B) if len(B) else np.empty(0)
    wpa = weighting.apply(diagonal_projection(A)) if len(A) else np.empty(0)
    wpb = weighting.apply(diagonal_projection(B)) if len(B) else np.empty(0)
    pair = (wa[:, None] + wb[None, :]) / 2.0
    return pair, (wa + wpa) / 2.0, (wb + wpb) / 2.0


def _distance(P, Q, p, q, weighting=None, include_essential=True):
    if P.dim != Q.dim:
        raise DimensionMismatchError(f"diagram dims differ: {P.dim} vs {Q.dim}")
    _check_exponent("p", p)
    _check_exponent("q", q)
    A, idx_p = _active_points(P, include_essential)
    B, idx_q = _active_points(Q, include_essential)
    costs = _pair_costs(A, B, p)
    dp = _diag_costs(A, p)
    dq = _diag_costs(B, p)
    if weighting is not None:
        pair_w, dp_w, dq_w = _weight_factors(weighting, A, B)
        costs = costs * pair_w
        dp = dp * dp_w
        dq = dq * dq_w
    value, pairs, p_diag, q_diag = _solve(costs, dp, dq, q)
    matching = Matching(
        pairs=tuple((int(idx_p[i]), int(idx_q[j])) for i, j in pairs),
        p_to_diagonal=tuple(int(idx_p[i]) for i in p_diag),
        q_to_diagonal=tuple(int(idx_q[j]) for j in q_diag),
        cost=float(value),
    )
    return float(value), matching


def wasserstein(P, Q, p, q, include_essential: bool = True) -> tuple[float, Matching]:
    """W_{p,q} distance and an optimal matching realizing it."""
    return _distance(P, Q, p, q, None, include_essential)


def bottleneck(P, Q, include_essential: bool = True) -> tuple[float, Matching]:
    """Bottleneck distance W_{inf,inf}."""
    return _distance(P, Q, INF, INF, None, include_essential)


def weighted_wasserstein(
    P, Q, p, q, weighting: Weighting, include_essential: bool = True
) -> tuple[float, Matching]:
    """W_{p,q} with pair costs scaled by the endpoint-average weight."""
    return _distance(P, Q, p, q, weighting, include_essential)


def evaluate_matching(
    P, Q, matching: Matching, p, q, weighting: Weighting | None = None
) -> float:
    """Re-evaluate the objective of a matching (not necessarily optimal)."""
    _check_exponent("p", p)
    _check_exponent("q", q)
    terms = []
    for i, j in matching.pairs:
        a, b = P.points[i], Q.points[j]
        c = float(_pair_costs(a.reshape(1, 2), b.reshape(1, 2), p)[0, 0])
        if weighting is not None:
            c *= (weighting(*a) + weighting(*b)) / 2.0
        terms.append(c)
    for i in matching.p_to_diagonal:
        a = P.points[i]
        c = float(_diag_costs(a.reshape(1, 2), p)[0])
        if weighting is not None:
            proj = diagonal_projection(a.reshape(1, 2))[0]
            c *= (weighting(*a) + weighting(*proj)) / 2.0
        terms.append(c)
    for j in matching.q_to_diagonal:
        b = Q.points[j]
        c = float(_diag_costs(b.reshape(1, 2), p)[0])
        if weighting is not None:
            proj = diagonal_projection(b.reshape(1, 2))[0]
            c *= (weighting(*b) + weighting(*proj)) / 2.0
        terms.append(c)
    if not terms:
        return 0.0
    if q == INF:
        return float(max(terms))
    return float(np.sum(np.asarray(terms) ** q) ** (1.0 / q))
