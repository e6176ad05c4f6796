"""Vineyards: continuous families of persistence diagrams and their length.

A vineyard samples a homotopy of filtrations on a time grid, computes the
diagram at each grid time, and links consecutive diagrams by optimal
weighted W_{inf,1} matchings.  The linked point tracks are the vines; the
vineyard distance is the total weighted sup-norm length of all vines,
integrated with the trapezoid rule (exact for the uniform and standard
weightings, which are linear along segments).

Every diagram in one vineyard is capped at a single shared ceiling, so
essential classes keep a fixed death coordinate and only their births move.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .complexes import Homotopy
from .errors import DimensionMismatchError, EmptySequenceError, ValidationError
from .persistence import (
    PersistenceDiagram,
    compute_diagram,
    compute_h0_union_find,
    image_h1_diagram,
)
from .wasserstein import (
    INF,
    Matching,
    Weighting,
    diagonal_projection,
    weighted_wasserstein,
)

__all__ = [
    "Vine",
    "Vineyard",
    "build_vineyard",
    "vineyard_from_diagrams",
    "vineyard_distance",
    "riemann_sum_distance",
]

# vine classes: first char = behaviour at the start (on/off diagonal),
# second char = behaviour at the end
NEVER_DIAGONAL = "**"
ENDS_ON_DIAGONAL = "*o"
STARTS_ON_DIAGONAL = "o*"
BOTH_ON_DIAGONAL = "oo"


@dataclass(frozen=True)
class Vine:
    """Piecewise-linear track of one diagram point through time.

    points has rows (t, x, y), time-ordered.  When the vine starts (ends) on
    the diagonal, the first (last) row is the diagonal crossing.
    """

    points: np.ndarray
    kind: str
    essential: bool = False

    def __post_init__(self):
        a = np.ascontiguousarray(np.asarray(self.points, dtype=float).reshape(-1, 3))
        if len(a) < 2:
            raise ValidationError("a vine needs at least two sample points")
        if np.any(np.diff(a[:, 0]) < 0):
            raise ValidationError("vine samples must be time-ordered")
        a.setflags(write=False)
        object.__setattr__(self, "points", a)

    @property
    def start_time(self) -> float | None:
        """Time the vine leaves the diagonal, when it starts there."""
        return float(self.points[0, 0]) if self.kind[0] == "o" else None

    @property
    def end_time(self) -> float | None:
        """Time the vine reaches the diagonal, when it ends there."""
        return float(self.points[-1, 0]) if self.kind[1] == "o" else None

    def length(self, weighting: Weighting) -> float:
        """Weighted sup-norm arc length (trapezoid rule over the samples)."""
        xy = self.points[:, 1:]
        step = np.max(np.abs(np.diff(xy, axis=0)), axis=1)
        w = weighting.apply(xy)
        return float(np.sum(step * (w[:-1] + w[1:]) / 2.0))

    def at(self, t: float) -> np.ndarray | None:
        """Diagram point at a grid time covered by this vine, else None."""
        ts = self.points[:, 0]
        hits = np.flatnonzero(np.isclose(ts, t, rtol=0, atol=1e-12))
        if len(hits) == 0:
            return None
        return self.points[hits[0], 1:]


@dataclass(frozen=True)
class Vineyard:
    dim: int
    times: np.ndarray
    diagrams: tuple[PersistenceDiagram, ...]
    vines: tuple[Vine, ...]
    ambiguity_times: tuple[float, ...] = ()
    refinement_limit_reached: bool = False

    def __post_init__(self):
        t = np.ascontiguousarray(np.asarray(self.times, dtype=float))
        t.setflags(write=False)
        object.__setattr__(self, "times", t)


def _diagram(K, f, dim, ceiling):
    # union-find routes (identical multisets, much faster than reduction)
    if dim == 0:
        return compute_h0_union_find(K, f, ceiling)
    if dim == 1 and K.grid_shape is not None and f.is_vertex_based:
        return image_h1_diagram(f.vertex_values.reshape(K.grid_shape), ceiling)
    return compute_diagram(K, f, dim, ceiling)


def _match(P, Q, weighting):
    return weighted_wasserstein(P, Q, INF, 1, weighting)[1]


def _sup_displacement(P, Q, matching) -> float:
    """Largest d_inf move of any point under a matching.

    The sup cost of one feasible transport plan, hence an upper bound for
    the bottleneck distance between the two diagrams.
    """
    worst = 0.0
    for i, j in matching.pairs:
        worst = max(
            worst,
            abs(P.births[i] - Q.births[j]),
            abs(P.deaths[i] - Q.deaths[j]),
        )
    for i in matching.p_to_diagonal:
        worst = max(worst, (P.deaths[i] - P.births[i]) / 2.0)
    for j in matching.q_to_diagonal:
        worst = max(worst, (Q.deaths[j] - Q.births[j]) / 2.0)
    return float(worst)


class _Track:
    __slots__ = ("rows", "started_on_diagonal", "essential")

    def __init__(self, rows, started_on_diagonal, essential):
        self.rows = rows
        self.started_on_diagonal = started_on_diagonal
        self.essential = essential


def _assemble_vines(times, diagrams, matchings) -> tuple[Vine, ...]:
    finished: list[Vine] = []

    def close(track: _Track, ended_on_diagonal: bool):
        kind = ("o" if track.started_on_diagonal else "*") + (
            "o" if ended_on_diagonal else "*"
        )
        finished.append(Vine(np.array(track.rows), kind, track.essential))

    active: dict[int, _Track] = {}
    D0 = diagrams[0]
    for i in range(D0.n_points):
        active[i] = _Track(
            [(times[0], D0.births[i], D0.deaths[i])], False, bool(D0.essential[i])
        )
    for k, M in enumerate(matchings):
        t0, t1 = times[k], times[k + 1]
        Dn = diagrams[k + 1]
        nxt: dict[int, _Track] = {}
        for i, j in M.pairs:
            tr = active.pop(i)
            tr.rows.append((t1, Dn.births[j], Dn.deaths[j]))
            tr.essential = tr.essential or bool(Dn.essential[j])
            nxt[j] = tr
        for i in M.p_to_diagonal:
            tr = active.pop(i)
            proj = diagonal_projection(np.array(tr.rows[-1][1:]).reshape(1, 2))[0]
            tr.rows.append((t1, proj[0], proj[1]))
            close(tr, ended_on_diagonal=True)
        for j in M.q_to_diagonal:
            pt = np.array([Dn.births[j], Dn.deaths[j]])
            proj = diagonal_projection(pt.reshape(1, 2))[0]
            nxt[j] = _Track(
                [(t0, proj[0], proj[1]), (t1, pt[0], pt[1])], True, bool(Dn.essential[j])
            )
        assert not active, "matching did not cover every point"
        active = nxt
    for tr in active.values():
        close(tr, ended_on_diagonal=False)
    return tuple(finished)


def _has_duplicate_points(D: PersistenceDiagram) -> bool:
    if D.n_points < 2:
        return False
    pts = D.points
    same = (np.diff(pts[:, 0]) == 0) & (np.diff(pts[:, 1]) == 0)
    return bool(np.any(same))


def _matching_has_ties(P, Q, matching, weighting, tol) -> bool:
    """Detect exact cost ties among simple rearrangements of the matching."""
    from .wasserstein import _diag_costs, _pair_costs, _weight_factors

    A = P.points
    B = Q.points
    if len(A) == 0 or len(B) == 0:
        return False
    costs = _pair_costs(A, B, INF)
    dp = _diag_costs(A, INF)
    dq = _diag_costs(B, INF)
    pair_w, dp_w, dq_w = _weight_factors(weighting, A, B)
    costs = costs * pair_w
    dp = dp * dp_w
    dq = dq * dq_w
    pairs = list(matching.pairs)
    for a in range(len(pairs)):
        i1, j1 = pairs[a]
        if abs(costs[i1, j1] - (dp[i1] + dq[j1])) <= tol:
            return True
        for b in range(a + 1, len(pairs)):
            i2, j2 = pairs[b]
            direct = costs[i1, j1] + costs[i2, j2]
            swapped = costs[i1, j2] + costs[i2, j1]
            if abs(direct - swapped) <= tol:
                return True
        for i in matching.p_to_diagonal:
            if abs(costs[i1, j1] + dp[i] - (costs[i, j1] + dp[i1])) <= tol:
                return True
        for j in matching.q_to_diagonal:
            if abs(costs[i1, j1] + dq[j] - (costs[i1, j] + dq[j1])) <= tol:
                return True
    return False


def vineyard_from_diagrams(
    diagrams: Sequence[PersistenceDiagram],
    weighting: Weighting | None = None,
    times: Sequence[float] | None = None,
) -> Vineyard:
    """Vineyard through a given diagram sequence on a uniform time grid.

    Consecutive diagrams are linked by optimal weighted W_{inf,1} matchings;
    unmatched points enter or leave through their diagonal projections.
    """
    diagrams = tuple(diagrams)
    if len(diagrams) < 2:
        raise EmptySequenceError("need at least two diagrams")
    dim = diagrams[0].dim
    for D in diagrams[1:]:
        if D.dim != dim:
            raise DimensionMismatchError("diagram sequence mixes dimensions")
    if weighting is None:
        weighting = Weighting.uniform()
    if times is None:
        times = np.linspace(0.0, 1.0, len(diagrams))
    else:
        times = np.asarray(times, dtype=float)
        if len(times) != len(diagrams) or np.any(np.diff(times) <= 0):
            raise ValidationError("times must be strictly increasing, one per diagram")

    scale = max((D.deaths.max() - D.births.min()) for D in diagrams if D.n_points) if any(
        D.n_points for D in diagrams
    ) else 1.0
    tol = 1e-12 * max(scale, 1.0)
    matchings = []
    ambiguity = []
    for k in range(len(diagrams) - 1):
        M = _match(diagrams[k], diagrams[k + 1], weighting)
        matchings.append(M)
        if _matching_has_ties(diagrams[k], diagrams[k + 1], M, weighting, tol):
            ambiguity.append(float(times[k]))
    for t, D in zip(times, diagrams):
        if _has_duplicate_points(D) and float(t) not in ambiguity:
            ambiguity.append(float(t))

    vines = _assemble_vines(times, diagrams, matchings)
    return Vineyard(dim, times, diagrams, vines, tuple(sorted(ambiguity)))


def _compose_consistent(Ma: Matching, Mb: Matching, Mab: Matching) -> bool:
    """Does matching a->m->b compose to the direct a->b matching?"""
    to_mid = dict(Ma.pairs)
    mid_to_b = dict(Mb.pairs)
    mid_dies = set(Mb.p_to_diagonal)
    direct = dict(Mab.pairs)
    a_dies = set(Ma.p_to_diagonal)
    a_dies_direct = set(Mab.p_to_diagonal)

    for j in Ma.q_to_diagonal:  # born at the midpoint
        if j in mid_dies:
            return False  # excursion invisible to the direct matching
    for i in to_mid:
        j = to_mid[i]
        target = None if j in mid_dies else mid_to_b.get(j)
        if target != direct.get(i):
            return False
    if a_dies != a_dies_direct:
        return False
    born_via_mid = {mid_to_b[j] for j in Ma.q_to_diagonal if j in mid_to_b}
    born_at_b = set(Mb.q_to_diagonal) | born_via_mid
    if born_at_b != set(Mab.q_to_diagonal):
        return False
    return True


def build_vineyard(
    h: Homotopy,
    dim: int = 0,
    weighting: Weighting | None = None,
    n0: int = 8,
    delta: float | None = None,
    max_depth: int = 12,
    ceiling: float | None = None,
) -> Vineyard:
    """Adaptively sampled vineyard of a homotopy.

    Starts from a uniform grid of n0 intervals and bisects any interval whose
    endpoint diagrams move by more than delta (sup displacement of the optimal
    matching, an upper bound for the bottleneck distance), whose direct
    matching disagrees with the composition through the midpoint, or whose
    motion through the midpoint exceeds the direct displacement by more than
    delta.  The last condition catches points that reverse course between
    samples, e.g. an exchange event straddled by the interval, which the
    endpoint-only bound cannot see.  delta defaults to 1% of the largest
    diagram extent on the initial grid.  When max_depth is exhausted the
    best-effort vineyard is returned with refinement_limit_reached set.
    """
    if weighting is None:
        weighting = Weighting.uniform()
    if n0 < 1:
        raise ValidationError("n0 must be >= 1")
    K = h.complex
    if ceiling is None:
        ceiling = h.value_ceiling()

    diagrams: dict[float, PersistenceDiagram] = {}
    matchings: dict[tuple[float, float], Matching] = {}
    bottlenecks: dict[tuple[float, float], float] = {}

    def D(t: float) -> PersistenceDiagram:
        if t not in diagrams:
            diagrams[t] = _diagram(K, h.at(t), dim, ceiling)
        return diagrams[t]

    def M(a: float, b: float) -> Matching:
        if (a, b) not in matchings:
            matchings[(a, b)] = _match(D(a), D(b), weighting)
        return matchings[(a, b)]

    def bott(a: float, b: float) -> float:
        if (a, b) not in bottlenecks:
            bottlenecks[(a, b)] = _sup_displacement(D(a), D(b), M(a, b))
        return bottlenecks[(a, b)]

    grid0 = np.linspace(0.0, 1.0, n0 + 1)
    for t in grid0:
        D(float(t))
    if delta is None:
        extents = [Dg.deaths.max() - Dg.births.min() for Dg in diagrams.values() if Dg.n_points]
        delta = 0.01 * max(max(extents) if extents else 0.0, 1e-12)

    limit_hit = False
    segments: list[tuple[float, float]] = []

    def needs_split(a: float, b: float) -> bool:
        if bott(a, b) > delta:
            return True
        m = (a + b) / 2.0
        if not _compose_consistent(M(a, m), M(m, b), M(a, b)):
            return True
        # the midpoint matchings above are cached, so this costs two cheap
        # displacement evaluations; it detects motion that cancels out
        # between the endpoints (points bouncing off an exchange)
        return bott(a, m) + bott(m, b) > bott(a, b) + delta

    def refine(a: float, b: float, depth: int):
        nonlocal limit_hit
        if needs_split(a, b):
            if depth >= max_depth:
                limit_hit = True
                segments.append((a, b))
                return
            m = (a + b) / 2.0
            refine(a, m, depth + 1)
            refine(m, b, depth + 1)
        else:
            segments.append((a, b))

    for k in range(n0):
        refine(float(grid0[k]), float(grid0[k + 1]), 0)

    segments.sort()
    times = np.array([segments[0][0]] + [s[1] for s in segments])
    grid_diagrams = tuple(D(float(t)) for t in times)
    grid_matchings = [M(float(a), float(b)) for a, b in segments]

    scale = max(
        (Dg.deaths.max() - Dg.births.min()) for Dg in grid_diagrams if Dg.n_points
    ) if any(Dg.n_points for Dg in grid_diagrams) else 1.0
    tol = 1e-12 * max(scale, 1.0)
    ambiguity = []
    for k, Mk in enumerate(grid_matchings):
        if _matching_has_ties(grid_diagrams[k], grid_diagrams[k + 1], Mk, weighting, tol):
            ambiguity.append(float(times[k]))
    for t, Dg in zip(times, grid_diagrams):
        if _has_duplicate_points(Dg) and float(t) not in ambiguity:
            ambiguity.append(float(t))

    vines = _assemble_vines(times, grid_diagrams, grid_matchings)
    return Vineyard(
        dim, times, grid_diagrams, vines, tuple(sorted(ambiguity)), limit_hit
    )


def vineyard_distance(V: Vineyard, weighting: Weighting | None = None) -> float:
    """Total weighted length of all vines.

    Segment contributions use the endpoint-average (trapezoid) rule, which
    is exact for linear weightings; custom weightings are integrated on the
    same grid.  Time spent resting on the diagonal contributes nothing.
    """
    if weighting is None:
        weighting = Weighting.uniform()
    return float(sum(v.length(weighting) for v in V.vines))


def riemann_sum_distance(
    h: Homotopy,
    dim: int,
    weighting: Weighting | None = None,
    n: int = 256,
    ceiling: float | None = None,
) -> float:
    """Sum of consecutive weighted W_{inf,1} distances on a uniform n-grid.

    Independent of build_vineyard: no matchings are chained, no refinement;
    the vineyard distance is the n -> infinity limit of this sum.
    """
    if weighting is None:
        weighting = Weighting.uniform()
    if n < 1:
        raise ValidationError("n must be >= 1")
    K = h.complex
    if ceiling is None:
        ceiling = h.value_ceiling()
    total = 0.0
    prev = _diagram(K, h.at(0.0), dim, ceiling)
    for k in range(1, n + 1):
        cur = _diagram(K, h.at(k / n), dim, ceiling)
        total += weighted_wasserstein(prev, cur, INF, 1, weighting)[0]
        prev = cur
    return float(total)
