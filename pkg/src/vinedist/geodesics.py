"""Weighted geodesics in the half-plane and the bounds they certify.

Under the standard weighting w(x, y) = (y - x)/sqrt(2), the cheapest path
between two diagram points (sup-norm arc length, weight integrated along the
way) has a closed form: either travel parallel to the diagonal at the lower
weight level and then away from it, or sink both endpoints through the
diagonal, whichever is cheaper.  A single point reaches the diagonal at cost
w(p)^2 / (2 sqrt(2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .complexes import CellComplex, FilterFunction, straight_line_homotopy
from .errors import ValidationError
from .persistence import diagram_pair
from .vineyard import build_vineyard, vineyard_distance
from .wasserstein import (
    INF,
    Matching,
    Weighting,
    _active_points,
    _solve,
    wasserstein,
)

SQRT2 = math.sqrt(2.0)

__all__ = [
    "segment_integral",
    "standard_path_distance",
    "diagonal_leg_cost",
    "midpoint_transfer",
    "mvc",
    "BoundReport",
    "check_bounds",
]


def _as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float).reshape(2)
    if a[0] > a[1] + 1e-9 * max(1.0, abs(a[0]), abs(a[1])):
        raise ValidationError(f"point {tuple(a)} lies below the diagonal")
    return a


def segment_integral(p0, p1, weighting: Weighting) -> float:
    """Integral of the weight along the straight segment p0 -> p1, with the
    sup-norm arc element.

    Exact (endpoint average) for linear weightings; adaptive quadrature with
    relative tolerance 1e-8 otherwise.
    """
    a, b = _as_point(p0), _as_point(p1)
    length = float(np.max(np.abs(b - a)))
    if length == 0.0:
        return 0.0
    if weighting.linear:
        return length * (weighting(*a) + weighting(*b)) / 2.0
    val, _ = integrate.quad(
        lambda t: weighting(*((1.0 - t) * a + t * b)), 0.0, 1.0, epsrel=1e-8, limit=200
    )
    return length * float(val)


def standard_path_distance(p0, p1) -> float:
    """Closed-form cheapest weighted path between two half-plane points
    under the standard weighting.

    min of: stay-at-lower-level route
        w(p0) * |(x1 + y1) - (x0 + y0)| / 2 + (w(p1)^2 - w(p0)^2) / (2 sqrt 2)
    (after ordering so w(p0) <= w(p1); the absolute value covers both
    horizontal directions) and the through-diagonal route
        (w(p0)^2 + w(p1)^2) / (2 sqrt 2).
    """
    a, b = _as_point(p0), _as_point(p1)
    w = Weighting.standard()
    w0, w1 = w(*a), w(*b)
    if w0 > w1:
        a, b = b, a
        w0, w1 = w1, w0
    along = abs((b[0] + b[1]) - (a[0] + a[1])) / 2.0
    stay_low = w0 * along + (w1 * w1 - w0 * w0) / (2.0 * SQRT2)
    through_diagonal = (w0 * w0 + w1 * w1) / (2.0 * SQRT2)
    return min(stay_low, through_diagonal)


def diagonal_leg_cost(p) -> float:
    """Cheapest standard-weighted path from p to the diagonal: w(p)^2/(2 sqrt 2)."""
    a = _as_point(p)
    wp = Weighting.standard()(*a)
    return wp * wp / (2.0 * SQRT2)


def midpoint_transfer(p0, p1) -> np.ndarray:
    """Corner point of the stay-at-lower-level geodesic from p0 to p1.

    Defined for w(p0) <= w(p1) and x0 + y0 <= x1 + y1; the geodesic through
    it splits the segment cost into the two straight legs.
    """
    a, b = _as_point(p0), _as_point(p1)
    return np.array(
        [
            (a[0] + b[0]) / 2.0 + (b[1] - a[1]) / 2.0,
            (b[0] - a[0]) / 2.0 + (a[1] + b[1]) / 2.0,
        ]
    )


def mvc(P, Q, weighting: Weighting | None = None, include_essential: bool = True):
    """Minimum vine cost: optimal assignment under standard path-distance
    costs, with the diagonal as an always-available option.

    Only defined for the standard weighting (the closed form is specific to
    it); any other weighting is rejected.
    """
    if weighting is None:
        weighting = Weighting.standard()
    if weighting.kind != "standard":
        raise ValidationError("minimum vine cost requires the standard weighting")
    if P.dim != Q.dim:
        raise ValidationError(f"diagram dims differ: {P.dim} vs {Q.dim}")
    A, idx_p = _active_points(P, include_essential)
    B, idx_q = _active_points(Q, include_essential)
    costs = np.empty((len(A), len(B)))
    for i in range(len(A)):
        for j in range(len(B)):
            costs[i, j] = standard_path_distance(A[i], B[j])
    dp = np.array([diagonal_leg_cost(a) for a in A]) if len(A) else np.empty(0)
    dq = np.array([diagonal_leg_cost(b) for b in B]) if len(B) else np.empty(0)
    value, pairs, p_diag, q_diag = _solve(costs, dp, dq, 1)
    matching = Matching(
        pairs=tuple((int(idx_p[i]), int(idx_q[j])) for i, j in pairs),
        p_to_diagonal=tuple(int(idx_p[i]) for i in p_diag),
        q_to_diagonal=tuple(int(idx_q[j]) for j in q_diag),
        cost=float(value),
    )
    return float(value), matching


@dataclass(frozen=True)
class BoundReport:
    """Numerical check of the chain of inequalities tying the distances
    together:

        W_{inf,1}(dgm f, dgm g)  <=  V(f, g)  <=  sum |f - g| over the cells
                                                  of dims {d, d+1}
        MVC(dgm f, dgm g)        <=  V_w(f, g)   (standard weighting)

    where V is the straight-line-homotopy vineyard distance.
    """

    dim: int
    w_inf_1: float
    vineyard: float
    l1_cell_sum: float
    mvc: float
    weighted_vineyard: float
    tolerance: float = 1e-6

    @property
    def lower_ok(self) -> bool:
        return self.w_inf_1 <= self.vineyard + self.tolerance

    @property
    def upper_ok(self) -> bool:
        return self.vineyard <= self.l1_cell_sum + self.tolerance

    @property
    def mvc_ok(self) -> bool:
        return self.mvc <= self.weighted_vineyard + self.tolerance

    @property
    def passed(self) -> bool:
        return self.lower_ok and self.upper_ok and self.mvc_ok

    def as_dict(self) -> dict:
        return {
            "dim": self.dim,
            "w_inf_1": self.w_inf_1,
            "vineyard": self.vineyard,
            "l1_cell_sum": self.l1_cell_sum,
            "mvc": self.mvc,
            "weighted_vineyard": self.weighted_vineyard,
            "tolerance": self.tolerance,
            "lower_ok": self.lower_ok,
            "upper_ok": self.upper_ok,
            "mvc_ok": self.mvc_ok,
            "passed": self.passed,
        }


def check_bounds(
    f: FilterFunction,
    g: FilterFunction,
    K: CellComplex,
    dim: int = 0,
    tolerance: float = 1e-6,
    n0: int = 8,
    delta: float | None = None,
    max_depth: int = 12,
) -> BoundReport:
    """Evaluate every distance in the bound chain for one pair (f, g).

    Both diagrams and the whole vineyard share one ceiling (the max cell
    value of f and g) so essential classes stay comparable.
    """
    ceiling = float(max(f.values.max(), g.values.max()))
    P, Q = diagram_pair(K, f, g, dim, ceiling)
    w_val = wasserstein(P, Q, INF, 1)[0]

    h = straight_line_homotopy(f, g, K)
    uniform = Weighting.uniform()
    standard = Weighting.standard()
    V_plain = vineyard_distance(
        build_vineyard(h, dim, uniform, n0=n0, delta=delta, max_depth=max_depth, ceiling=ceiling),
        uniform,
    )
    V_weighted = vineyard_distance(
        build_vineyard(h, dim, standard, n0=n0, delta=delta, max_depth=max_depth, ceiling=ceiling),
        standard,
    )
    mvc_val = mvc(P, Q)[0]

    mask = (K.dims == dim) | (K.dims == dim + 1)
    l1 = float(np.sum(np.abs(f.values[mask] - g.values[mask])))

    return BoundReport(
        dim=dim,
        w_inf_1=float(w_val),
        vineyard=float(V_plain),
        l1_cell_sum=l1,
        mvc=float(mvc_val),
        weighted_vineyard=float(V_weighted),
        tolerance=tolerance,
    )
