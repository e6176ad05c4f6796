"""Sublevel-set persistence diagrams over GF(2).

compute_diagram runs the standard boundary-matrix column reduction; for
dimension d only the d- and (d+1)-columns are touched (column additions never
leave a dimension).  compute_h0_union_find is an independent fast path for
dimension 0 that must produce the identical multiset.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .complexes import CellComplex, FilterFunction, validate_monotone
from .errors import ValidationError

INF_VALUE = float("inf")

__all__ = [
    "PersistenceDiagram",
    "FiltrationOrder",
    "filtration_order",
    "compute_diagram",
    "compute_h0_union_find",
    "image_h1_diagram",
    "diagram_pair",
]


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of (birth, death) points of one homological dimension.

    Deaths of unpaired (essential) classes are capped at `ceiling` and
    flagged.  Points are kept in canonical order (birth, death, essential)
    so indices are deterministic.
    """

    dim: int
    births: np.ndarray
    deaths: np.ndarray
    essential: np.ndarray
    ceiling: float

    def __post_init__(self):
        b = np.asarray(self.births, dtype=float).ravel()
        d = np.asarray(self.deaths, dtype=float).ravel()
        e = np.asarray(self.essential, dtype=bool).ravel()
        if not (len(b) == len(d) == len(e)):
            raise ValidationError("births, deaths, essential must have equal length")
        if np.any(b > d):
            raise ValidationError("birth exceeds death")
        order = np.lexsort((e, d, b))
        b, d, e = b[order], d[order], e[order]
        finite = d[~e]
        if len(finite) and float(self.ceiling) < finite.max() - 1e-12:
            raise ValidationError("ceiling below a finite death")
        for a in (b, d, e):
            a.setflags(write=False)
        object.__setattr__(self, "births", b)
        object.__setattr__(self, "deaths", d)
        object.__setattr__(self, "essential", e)
        object.__setattr__(self, "ceiling", float(self.ceiling))

    @property
    def n_points(self) -> int:
        return len(self.births)

    @cached_property
    def points(self) -> np.ndarray:
        a = np.column_stack([self.births, self.deaths]) if self.n_points else np.empty((0, 2))
        a.setflags(write=False)
        return a

    def multiset(self) -> list[tuple[float, float]]:
        return sorted(zip(self.births.tolist(), self.deaths.tolist()))

    def without_essential(self) -> "PersistenceDiagram":
        keep = ~self.essential
        return PersistenceDiagram(
            self.dim, self.births[keep], self.deaths[keep], self.essential[keep], self.ceiling
        )


def _empty_diagram(dim: int, ceiling: float) -> PersistenceDiagram:
    return PersistenceDiagram(dim, np.empty(0), np.empty(0), np.empty(0, dtype=bool), ceiling)


@dataclass(frozen=True)
class FiltrationOrder:
    """Cells sorted by (value, dim, id): faces always precede cofaces."""

    order: np.ndarray
    entry: np.ndarray


def filtration_order(K: CellComplex, f: FilterFunction) -> FiltrationOrder:
    validate_monotone(K, f)
    ids = np.arange(K.n_cells)
    order = np.lexsort((ids, K.dims, f.values))
    return FiltrationOrder(order, f.values.copy())


def _sorted_by_entry(ids: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Sort cell ids of one dimension by (value, id)."""
    return ids[np.lexsort((ids, values[ids]))]


def _positive_edges(K: CellComplex, values: np.ndarray) -> set[int]:
    """Edges that close a cycle when inserted in filtration order."""
    parent: dict[int, int] = {int(v): int(v) for v in K.vertex_ids}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    positive = set()
    edges = _sorted_by_entry(K.by_dim.get(1, np.empty(0, dtype=int)), values)
    for eid in edges:
        bnd = K.cells[eid].boundary
        u, v = find(bnd[0]), find(bnd[-1])
        if u == v:
            positive.add(int(eid))
        else:
            parent[u] = v
    return positive


def compute_diagram(
    K: CellComplex, f: FilterFunction, dim: int = 0, ceiling: float | None = None
) -> PersistenceDiagram:
    """Persistence diagram of the sublevel filtration of f in dimension dim.

    Unpaired classes die at `ceiling` (default: max value of f over all
    cells) and carry the essential flag.  Zero-persistence points are
    dropped.  Ties in the filtration are broken by (value, dim, id); the
    resulting multiset does not depend on the tie rule.
    """
    validate_monotone(K, f)
    if dim < 0:
        raise ValidationError("dim must be >= 0")
    values = f.values
    if ceiling is None:
        ceiling = float(values.max())
    d_ids = K.by_dim.get(dim, np.empty(0, dtype=int))
    if len(d_ids) == 0:
        return _empty_diagram(dim, ceiling)

    d_sorted = _sorted_by_entry(d_ids, values)
    row_pos = {int(cid): k for k, cid in enumerate(d_sorted)}

    births: list[float] = []
    deaths: list[float] = []
    essential: list[bool] = []
    paired: set[int] = set()

    d1_ids = K.by_dim.get(dim + 1, np.empty(0, dtype=int))
    if len(d1_ids):
        d1_sorted = _sorted_by_entry(d1_ids, values)
        pivot_owner: dict[int, int] = {}
        stored: dict[int, int] = {}
        for cid in d1_sorted:
            col = 0
            for b in K.cells[cid].boundary:
                col ^= 1 << row_pos[b]
            low = -1
            while col:
                low = col.bit_length() - 1
                owner = pivot_owner.get(low)
                if owner is None:
                    break
                col ^= stored[owner]
            if col:
                pivot_owner[low] = int(cid)
                stored[int(cid)] = col
                birth_cell = int(d_sorted[low])
                paired.add(birth_cell)
                b_val, d_val = float(values[birth_cell]), float(values[cid])
                if b_val != d_val:
                    births.append(b_val)
                    deaths.append(d_val)
                    essential.append(False)

    # positive d-cells that never get paired are essential
    if dim == 0:
        positive = set(int(v) for v in d_ids)
    elif dim == 1:
        positive = _positive_edges(K, values)
    else:
        below = K.by_dim.get(dim - 1, np.empty(0, dtype=int))
        below_sorted = _sorted_by_entry(below, values)
        below_pos = {int(cid): k for k, cid in enumerate(below_sorted)}
        pivot_owner2: dict[int, int] = {}
        stored2: dict[int, int] = {}
        positive = set()
        for cid in d_sorted:
            if int(cid) in paired:
                continue  # clearing: paired columns are known negative-free
            col = 0
            for b in K.cells[cid].boundary:
                col ^= 1 << below_pos[b]
            while col:
                low = col.bit_length() - 1
                owner = pivot_owner2.get(low)
                if owner is None:
                    break
                col ^= stored2[owner]
            if col:
                pivot_owner2[low] = int(cid)
                stored2[int(cid)] = col
            else:
                positive.add(int(cid))

    ceiling = float(ceiling)
    if deaths and ceiling < max(deaths) - 1e-12:
        raise ValidationError(f"ceiling {ceiling} is below the largest finite death {max(deaths)}")
    for cid in sorted(positive - paired):
        b_val = float(values[cid])
        if b_val > ceiling + 1e-12:
            raise ValidationError(f"ceiling {ceiling} is below essential birth {b_val}")
        if b_val != ceiling:
            births.append(b_val)
            deaths.append(ceiling)
            essential.append(True)

    return PersistenceDiagram(
        dim, np.array(births), np.array(deaths), np.array(essential, dtype=bool), ceiling
    )


def compute_h0_union_find(
    K: CellComplex, f: FilterFunction, ceiling: float | None = None
) -> PersistenceDiagram:
    """Dimension-0 diagram via union-find with the elder rule.

    Produces the identical multiset to compute_diagram(K, f, 0, ceiling);
    kept as a separate route so the two can be checked against each other.
    """
    validate_monotone(K, f)
    values = f.values
    if ceiling is None:
        ceiling = float(values.max())
    ceiling = float(ceiling)

    verts = _sorted_by_entry(K.vertex_ids, values)
    edges = _sorted_by_entry(K.by_dim.get(1, np.empty(0, dtype=int)), values)
    rank = {int(v): k for k, v in enumerate(verts)}

    parent: dict[int, int] = {}

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for v in verts:
        parent[int(v)] = int(v)

    births: list[float] = []
    deaths: list[float] = []
    essential: list[bool] = []

    # vertices and edges interleave by (value, dim, id); since every vertex
    # precedes any equal-valued edge, processing all vertices first then
    # edges in order is the same sweep.
    for eid in edges:
        bnd = K.cells[eid].boundary
        ru, rv = find(bnd[0]), find(bnd[-1])
        if ru == rv:
            continue
        # younger component (larger (birth, entry rank)) dies
        ku = (values[ru], rank[ru])
        kv = (values[rv], rank[rv])
        younger, elder = (ru, rv) if ku > kv else (rv, ru)
        b_val, d_val = float(values[younger]), float(values[eid])
        if b_val != d_val:
            births.append(b_val)
            deaths.append(d_val)
            essential.append(False)
        parent[younger] = elder

    if deaths and ceiling < max(deaths) - 1e-12:
        raise ValidationError(f"ceiling {ceiling} is below the largest finite death {max(deaths)}")
    for v in verts:
        v = int(v)
        if find(v) == v:
            b_val = float(values[v])
            if b_val > ceiling + 1e-12:
                raise ValidationError(f"ceiling {ceiling} is below essential birth {b_val}")
            if b_val != ceiling:
                births.append(b_val)
                deaths.append(ceiling)
                essential.append(True)

    return PersistenceDiagram(
        0, np.array(births), np.array(deaths), np.array(essential, dtype=bool), ceiling
    )


def image_h1_diagram(image, ceiling: float | None = None) -> PersistenceDiagram:
    """Dimension-1 diagram of an image's full cubical grid, via duality.

    A 1-cycle in the sublevel filtration encloses a region of the plane; the
    region's pixels vanish from the complement in reverse filtration order.
    So finite H1 pairs (edge birth b, square death d) are exactly the merge
    events of a union-find sweep over the dual graph (one node per square
    plus the outer face), processed in decreasing filtration order.  The full
    grid is contractible, hence no essential classes.  Produces the identical
    multiset to compute_diagram(K, f, 1, ceiling) for the complex built by
    cubical_from_image; kept as a fast second route, checked against the
    reduction.
    """
    J = np.asarray(image, dtype=float)
    if J.ndim != 2 or J.size == 0:
        raise ValidationError(f"image grid must be 2-D and nonempty, got shape {J.shape}")
    m, n = J.shape
    if ceiling is None:
        ceiling = float(J.max())
    ceiling = float(ceiling)
    if m < 2 or n < 2:
        return _empty_diagram(1, ceiling)

    n_sq = (m - 1) * (n - 1)
    sq_val = np.maximum(
        np.maximum(J[:-1, :-1], J[:-1, 1:]), np.maximum(J[1:, :-1], J[1:, 1:])
    ).ravel()
    h_val = np.maximum(J[:, :-1], J[:, 1:]).ravel()
    v_val = np.maximum(J[:-1, :], J[1:, :]).ravel()

    # cell ids as laid out by cubical_from_image (ties break on them)
    mn = m * n
    h_ids = mn + np.arange(m * (n - 1))
    v_ids = mn + m * (n - 1) + np.arange((m - 1) * n)
    sq_ids = mn + m * (n - 1) + (m - 1) * n + np.arange(n_sq)

    # dual endpoints of each edge; index n_sq stands for the outer face
    hi, hj = np.divmod(np.arange(m * (n - 1)), n - 1)
    h_above = np.where(hi > 0, (hi - 1) * (n - 1) + hj, n_sq)
    h_below = np.where(hi < m - 1, hi * (n - 1) + hj, n_sq)
    vi, vj = np.divmod(np.arange((m - 1) * n), n)
    v_left = np.where(vj > 0, vi * (n - 1) + vj - 1, n_sq)
    v_right = np.where(vj < n - 1, vi * (n - 1) + vj, n_sq)

    e_val = np.concatenate([h_val, v_val])
    e_end_a = np.concatenate([h_above, v_left])
    e_end_b = np.concatenate([h_below, v_right])
    n_e = len(e_val)

    all_val = np.concatenate([e_val, sq_val])
    all_dim = np.concatenate([np.ones(n_e, dtype=int), np.full(n_sq, 2)])
    all_id = np.concatenate([h_ids, v_ids, sq_ids])
    asc = np.lexsort((all_id, all_dim, all_val))
    pos = np.empty(len(asc), dtype=int)
    pos[asc] = np.arange(len(asc))

    # an edge enters the shrinking complement strictly after its incident
    # squares, so all squares can be activated up front
    parent = list(range(n_sq + 1))
    birth_pos = pos[n_e:].tolist() + [n_e + n_sq]  # outer face is oldest
    birth_val = sq_val.tolist() + [INF_VALUE]

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    births: list[float] = []
    deaths: list[float] = []
    end_a = e_end_a.tolist()
    end_b = e_end_b.tolist()
    vals = e_val.tolist()
    for k in np.argsort(-pos[:n_e]).tolist():
        ra, rb = find(end_a[k]), find(end_b[k])
        if ra == rb:
            continue
        young, old = (ra, rb) if birth_pos[ra] < birth_pos[rb] else (rb, ra)
        parent[young] = old
        if vals[k] != birth_val[young]:
            births.append(vals[k])
            deaths.append(birth_val[young])

    if deaths and ceiling < max(deaths) - 1e-12:
        raise ValidationError(f"ceiling {ceiling} is below the largest finite death {max(deaths)}")
    return PersistenceDiagram(
        1, np.array(births), np.array(deaths), np.zeros(len(births), dtype=bool), ceiling
    )


def diagram_pair(
    K: CellComplex,
    f: FilterFunction,
    g: FilterFunction,
    dim: int = 0,
    ceiling: float | None = None,
) -> tuple[PersistenceDiagram, PersistenceDiagram]:
    """Diagrams of f and g capped at one shared ceiling (default: the max
    cell value over both).

    A shared cap keeps the two diagrams comparable: essential classes of the
    same complex then differ only in their births, which is what the
    stability and bound statements are about.
    """
    if ceiling is None:
        ceiling = float(max(f.values.max(), g.values.max()))
    return (
        compute_diagram(K, f, dim, ceiling),
        compute_diagram(K, g, dim, ceiling),
    )
