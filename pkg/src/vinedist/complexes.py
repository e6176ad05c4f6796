"""Cell complexes, monotone filter functions, and straight-line homotopies.

A complex is a purely combinatorial object: every cell lists the ids of its
codimension-1 faces.  Simplicial and cubical complexes both fit (a triangle
has 3 edge faces, a square has 4); no geometric realization is kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import (
    AsymmetricMatrixError,
    ComplexMismatchError,
    DanglingFaceError,
    DimensionMismatchError,
    EmptyGridError,
    InvalidComplexError,
    MissingVertexValueError,
    NegativeDistanceError,
    NonMonotoneFunctionError,
    NotVertexBasedError,
    ValidationError,
)

SIMPLEX_LEVEL = "simplex"
VERTEX_LEVEL = "vertex"


@dataclass(frozen=True)
class Cell:
    id: int
    dim: int
    boundary: tuple[int, ...]


@dataclass(frozen=True)
class CellComplex:
    """Finite cell complex with dense ids and explicit face lists.

    grid_shape is set when the complex is the full cubical grid of an image
    (see cubical_from_image); it unlocks a faster dimension-1 persistence
    route and plays no part in equality or validation.
    """

    cells: tuple[Cell, ...]
    grid_shape: tuple[int, int] | None = field(default=None, compare=False, repr=False)

    @cached_property
    def n_cells(self) -> int:
        return len(self.cells)

    @cached_property
    def dims(self) -> np.ndarray:
        a = np.array([c.dim for c in self.cells], dtype=int)
        a.setflags(write=False)
        return a

    @cached_property
    def max_dim(self) -> int:
        return int(self.dims.max()) if self.n_cells else -1

    @cached_property
    def by_dim(self) -> dict[int, np.ndarray]:
        out = {}
        for d in range(self.max_dim + 1):
            ids = np.flatnonzero(self.dims == d)
            ids.setflags(write=False)
            out[d] = ids
        return out

    @cached_property
    def vertex_ids(self) -> np.ndarray:
        return self.by_dim.get(0, np.empty(0, dtype=int))

    @cached_property
    def vertex_count(self) -> int:
        return len(self.vertex_ids)

    @cached_property
    def face_pairs(self) -> np.ndarray:
        """(m, 2) array of (face id, cell id) over every boundary entry."""
        pairs = [(b, c.id) for c in self.cells for b in c.boundary]
        a = np.array(pairs, dtype=int) if pairs else np.empty((0, 2), dtype=int)
        a.setflags(write=False)
        return a

    @cached_property
    def _dim_face_csr(self) -> dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """Per dim d >= 1: (flat face ids, segment offsets, cell ids)."""
        out = {}
        for d in range(1, self.max_dim + 1):
            ids = self.by_dim[d]
            flat, offsets = [], [0]
            for cid in ids:
                flat.extend(self.cells[cid].boundary)
                offsets.append(len(flat))
            out[d] = (np.array(flat, dtype=int), np.array(offsets, dtype=int), ids)
        return out

    def vertices_of(self, cell_id: int) -> frozenset[int]:
        return self._vertex_closure[cell_id]

    @cached_property
    def _vertex_closure(self) -> tuple[frozenset[int], ...]:
        closure: list[frozenset[int]] = [frozenset()] * self.n_cells
        for d in range(self.max_dim + 1):
            for cid in self.by_dim[d]:
                cell = self.cells[cid]
                if d == 0:
                    closure[cid] = frozenset((cid,))
                else:
                    closure[cid] = frozenset().union(*(closure[b] for b in cell.boundary))
        return tuple(closure)


@dataclass(frozen=True)
class FilterFunction:
    """Real value per cell id.  vertex_values is set iff lower-star derived
    (aligned with CellComplex.vertex_ids)."""

    values: np.ndarray
    vertex_values: np.ndarray | None = None

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.vertex_values is not None:
            vv = np.ascontiguousarray(np.asarray(self.vertex_values, dtype=float))
            vv.setflags(write=False)
            object.__setattr__(self, "vertex_values", vv)

    @property
    def is_vertex_based(self) -> bool:
        return self.vertex_values is not None


def build_complex(cells: Iterable) -> CellComplex:
    """Validate a raw cell list and assemble a CellComplex.

    Accepts Cell instances, (id, dim, boundary) triples, or dicts with those
    keys.  Ids must be dense in [0, n); every boundary reference must exist
    and sit exactly one dimension lower.
    """
    parsed = []
    for c in cells:
        if isinstance(c, Cell):
            parsed.append(c)
        elif isinstance(c, Mapping):
            parsed.append(Cell(int(c["id"]), int(c["dim"]), tuple(int(b) for b in c["boundary"])))
        else:
            cid, dim, bnd = c
            parsed.append(Cell(int(cid), int(dim), tuple(int(b) for b in bnd)))
    if not parsed:
        raise InvalidComplexError("complex needs at least one cell")

    n = len(parsed)
    ids = sorted(c.id for c in parsed)
    if ids != list(range(n)):
        raise InvalidComplexError("cell ids must be unique and dense in [0, n)")
    ordered: list[Cell] = [None] * n  # type: ignore[list-item]
    for c in parsed:
        ordered[c.id] = c

    for c in ordered:
        if c.dim < 0:
            raise InvalidComplexError(f"cell {c.id} has negative dimension")
        if c.dim == 0:
            if c.boundary:
                raise DimensionMismatchError(f"vertex {c.id} must have empty boundary")
            continue
        if not c.boundary:
            raise DimensionMismatchError(f"cell {c.id} of dim {c.dim} has empty boundary")
        for b in c.boundary:
            if not (0 <= b < n):
                raise DanglingFaceError(f"cell {c.id} references missing face {b}")
            if ordered[b].dim != c.dim - 1:
                raise DimensionMismatchError(
                    f"cell {c.id} (dim {c.dim}) lists face {b} of dim {ordered[b].dim}"
                )
    return CellComplex(tuple(ordered))


def _vertex_array(vertex_values, K: CellComplex) -> np.ndarray:
    """Align a dict or sequence of vertex values with K.vertex_ids."""
    if isinstance(vertex_values, Mapping):
        out = np.empty(K.vertex_count, dtype=float)
        for k, vid in enumerate(K.vertex_ids):
            if int(vid) not in vertex_values:
                raise MissingVertexValueError(f"no value for vertex {int(vid)}")
            out[k] = float(vertex_values[int(vid)])
        return out
    arr = np.asarray(vertex_values, dtype=float)
    if arr.shape != (K.vertex_count,):
        raise MissingVertexValueError(
            f"expected {K.vertex_count} vertex values, got shape {arr.shape}"
        )
    return arr


def lower_star(vertex_values, K: CellComplex) -> FilterFunction:
    """Extend vertex values to all cells by the max over each cell's vertices.

    The result is monotone by construction.
    """
    vv = _vertex_array(vertex_values, K)
    if not np.all(np.isfinite(vv)):
        raise ValidationError("vertex values must be finite")
    values = np.empty(K.n_cells, dtype=float)
    values[K.vertex_ids] = vv
    # max over vertices == max over faces, propagated up one dim at a time
    for d in range(1, K.max_dim + 1):
        flat, offsets, ids = K._dim_face_csr[d]
        if len(ids):
            values[ids] = np.maximum.reduceat(values[flat], offsets[:-1])
    return FilterFunction(values, vertex_values=vv)


def filter_down(f: FilterFunction, K: CellComplex, offset: float = 0.0) -> FilterFunction:
    """Flip a vertex-based filtration upside down: vertex v -> offset - f(v).

    Cell values are re-derived with lower_star (negating cell values directly
    would break monotonicity).  Applying filter_down twice with offset 0
    returns the original filtration.
    """
    if not f.is_vertex_based:
        raise NotVertexBasedError("filter_down needs a lower-star filtration")
    return lower_star(offset - f.vertex_values, K)


def validate_monotone(K: CellComplex, f: FilterFunction) -> None:
    """Raise NonMonotoneFunctionError unless f(face) <= f(cell) everywhere."""
    if len(f.values) != K.n_cells:
        raise ComplexMismatchError(
            f"filter has {len(f.values)} values for a complex with {K.n_cells} cells"
        )
    pairs = K.face_pairs
    if len(pairs) == 0:
        return
    bad = f.values[pairs[:, 0]] > f.values[pairs[:, 1]]
    if np.any(bad):
        face, cell = pairs[np.argmax(bad)]
        raise NonMonotoneFunctionError(
            f"f({face})={f.values[face]} exceeds f({cell})={f.values[cell]} on a face relation"
        )


def vietoris_rips(distances, max_dim: int, max_scale: float) -> tuple[CellComplex, FilterFunction]:
    """Clique (flag) complex of the <= max_scale graph, filtered by diameter.

    distances: square symmetric matrix with zero diagonal.  Simplices are
    added up to dimension max_dim; each gets its diameter as filter value
    (vertices enter at 0).
    """
    D = np.asarray(distances, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise AsymmetricMatrixError(f"distance matrix must be square, got {D.shape}")
    n = D.shape[0]
    if n == 0:
        raise ValidationError("distance matrix must have at least one point")
    scale = max(1.0, float(np.max(np.abs(D))) if n else 1.0)
    if np.max(np.abs(D - D.T)) > 1e-12 * scale:
        raise AsymmetricMatrixError("distance matrix is not symmetric")
    D = (D + D.T) / 2.0
    if np.any(D < 0):
        raise NegativeDistanceError("distance matrix has negative entries")
    if np.max(np.abs(np.diag(D))) > 0:
        raise ValidationError("distance matrix must have zero diagonal")
    if max_dim < 0:
        raise ValidationError("max_dim must be >= 0")

    cells: list[Cell] = []
    values: list[float] = []
    index: dict[tuple[int, ...], int] = {}

    def add(verts: tuple[int, ...], diam: float):
        cid = len(cells)
        if len(verts) == 1:
            bnd: tuple[int, ...] = ()
        else:
            bnd = tuple(index[verts[:k] + verts[k + 1:]] for k in range(len(verts)))
        cells.append(Cell(cid, len(verts) - 1, bnd))
        values.append(diam)
        index[verts] = cid

    for v in range(n):
        add((v,), 0.0)
    neighbors = [np.flatnonzero((D[v] <= max_scale) & (np.arange(n) > v)) for v in range(n)]
    frontier: list[tuple[tuple[int, ...], float]] = []
    for u in range(n):
        for v in neighbors[u]:
            add((u, int(v)), float(D[u, v]))
            frontier.append(((u, int(v)), float(D[u, v])))
    for d in range(2, max_dim + 1):
        nxt = []
        for verts, diam in frontier:
            last = verts[-1]
            common = set(neighbors[verts[0]])
            for u in verts[1:]:
                common &= set(neighbors[u])
            for u in sorted(common):
                if u <= last:
                    continue
                nd = max(diam, float(np.max(D[list(verts), u])))
                nv = verts + (int(u),)
                add(nv, nd)
                nxt.append((nv, nd))
        frontier = nxt
    K = CellComplex(tuple(cells))
    return K, FilterFunction(np.array(values))


def cubical_from_image(grid) -> tuple[CellComplex, FilterFunction]:
    """V-construction cubical complex of a 2-D image.

    One vertex per pixel (value = intensity), edges between 4-neighbors,
    one square per 2x2 pixel block; non-vertex cells take the max of their
    vertices (lower-star).
    """
    img = np.asarray(grid, dtype=float)
    if img.ndim != 2 or img.size == 0:
        raise EmptyGridError(f"image grid must be 2-D and nonempty, got shape {img.shape}")
    m, n = img.shape

    def vid(i, j):
        return i * n + j

    cells: list[Cell] = [Cell(vid(i, j), 0, ()) for i in range(m) for j in range(n)]
    k = m * n
    h_edge = {}
    for i in range(m):
        for j in range(n - 1):
            cells.append(Cell(k, 1, (vid(i, j), vid(i, j + 1))))
            h_edge[(i, j)] = k
            k += 1
    v_edge = {}
    for i in range(m - 1):
        for j in range(n):
            cells.append(Cell(k, 1, (vid(i, j), vid(i + 1, j))))
            v_edge[(i, j)] = k
            k += 1
    for i in range(m - 1):
        for j in range(n - 1):
            cells.append(
                Cell(k, 2, (h_edge[(i, j)], h_edge[(i + 1, j)], v_edge[(i, j)], v_edge[(i, j + 1)]))
            )
            k += 1
    K = CellComplex(tuple(cells), grid_shape=(m, n))
    return K, lower_star(img.ravel(), K)


@dataclass(frozen=True)
class Homotopy:
    """Path h(t), t in [0, 1], through monotone filtrations on one complex.

    mode "simplex" interpolates cell values directly (monotone for every t
    because convex combinations preserve the face inequalities); "vertex"
    interpolates vertex values and re-derives cells with lower_star.  An
    optional monotone time_map reparameterizes the path.
    """

    complex: CellComplex
    start: FilterFunction
    end: FilterFunction
    mode: str = SIMPLEX_LEVEL
    time_map: Callable[[float], float] | None = None

    def at(self, t: float) -> FilterFunction:
        if not 0.0 <= t <= 1.0:
            raise ValidationError(f"homotopy time {t} outside [0, 1]")
        s = float(self.time_map(t)) if self.time_map is not None else t
        if s == 0.0:
            return self.start
        if s == 1.0:
            return self.end
        if self.mode == VERTEX_LEVEL:
            vv = (1.0 - s) * self.start.vertex_values + s * self.end.vertex_values
            return lower_star(vv, self.complex)
        return FilterFunction((1.0 - s) * self.start.values + s * self.end.values)

    def reparameterized(self, phi: Callable[[float], float]) -> "Homotopy":
        """Precompose with a monotone bijection of [0, 1]."""
        base = self.time_map
        new_map = phi if base is None else (lambda t: base(phi(t)))
        return Homotopy(self.complex, self.start, self.end, self.mode, new_map)

    def value_ceiling(self) -> float:
        """Upper bound for every cell value along the path (both modes)."""
        return float(max(self.start.values.max(), self.end.values.max()))


def straight_line_homotopy(
    f: FilterFunction, g: FilterFunction, K: CellComplex, mode: str = SIMPLEX_LEVEL
) -> Homotopy:
    """Linear interpolation h_t = (1-t) f + t g between two monotone filtrations."""
    if mode not in (SIMPLEX_LEVEL, VERTEX_LEVEL):
        raise ValidationError(f"unknown homotopy mode {mode!r}")
    if len(f.values) != K.n_cells or len(g.values) != K.n_cells:
        raise ComplexMismatchError("filtrations do not live on the given complex")
    validate_monotone(K, f)
    validate_monotone(K, g)
    if mode == VERTEX_LEVEL:
        if not (f.is_vertex_based and g.is_vertex_based):
            raise NotVertexBasedError("vertex-level homotopy needs lower-star endpoints")
        h = Homotopy(K, f, g, mode)
        for t in (0.25, 0.5, 0.75):  # sampled sanity check; lower_star guarantees it
            validate_monotone(K, h.at(t))
        return h
    return Homotopy(K, f, g, mode)
