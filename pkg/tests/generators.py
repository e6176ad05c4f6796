"""Seeded random inputs shared by the test modules."""

import numpy as np

from vinedist.complexes import CellComplex, FilterFunction, build_complex, lower_star
from vinedist.persistence import PersistenceDiagram


def random_complex(rng, max_cells: int = 30) -> CellComplex:
    """Random simplicial complex of dimension <= 2 with at most max_cells cells.

    Edges are drawn independently; triangles only where all three edges made
    it in, so the result is always face-closed.
    """
    n_v = int(rng.integers(3, 9))
    cells = [(v, 0, ()) for v in range(n_v)]
    edge_id = {}
    for u in range(n_v):
        for v in range(u + 1, n_v):
            if rng.random() < 0.45 and len(cells) < max_cells:
                edge_id[(u, v)] = len(cells)
                cells.append((len(cells), 1, (u, v)))
    for u in range(n_v):
        for v in range(u + 1, n_v):
            for w in range(v + 1, n_v):
                have = all(e in edge_id for e in [(u, v), (u, w), (v, w)])
                if have and rng.random() < 0.5 and len(cells) < max_cells:
                    bnd = (edge_id[(u, v)], edge_id[(u, w)], edge_id[(v, w)])
                    cells.append((len(cells), 2, bnd))
    return build_complex(cells)


def random_filtration(rng, K: CellComplex, integer: bool = False) -> FilterFunction:
    """Random monotone cell values (not lower-star; generic unless integer)."""
    vals = np.zeros(K.n_cells)
    for d in range(K.max_dim + 1):
        for cid in K.by_dim[d]:
            base = max((vals[b] for b in K.cells[cid].boundary), default=0.0)
            bump = float(rng.integers(0, 3)) if integer else float(rng.uniform(0.0, 1.0))
            vals[cid] = base + bump
    return FilterFunction(vals)


def random_lower_star(rng, K: CellComplex, integer: bool = False) -> FilterFunction:
    if integer:
        vv = rng.integers(0, 5, K.vertex_count).astype(float)
    else:
        vv = rng.uniform(0.0, 1.0, K.vertex_count)
    return lower_star(vv, K)


def random_diagram(rng, dim: int = 0, max_points: int = 6,
                   with_essential: bool = False) -> PersistenceDiagram:
    """Random diagram; coordinates rounded to 3 decimals so ties do occur."""
    n = int(rng.integers(0, max_points + 1))
    births = np.round(rng.uniform(0.0, 1.0, n), 3)
    deaths = births + np.round(rng.uniform(0.01, 1.0, n), 3)
    ceiling = float(deaths.max() + rng.uniform(0.0, 0.5)) if n else 1.0
    essential = np.zeros(n, dtype=bool)
    if with_essential and n:
        essential = rng.random(n) < 0.3
        deaths = np.where(essential, ceiling, deaths)
    return PersistenceDiagram(dim, births, deaths, essential, ceiling)
