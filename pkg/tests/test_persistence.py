"""Persistence diagrams: reduction, the union-find routes, and validation.

The two fast routes (dimension-0 union-find, dimension-1 image duality) are
checked against the generic reduction on randomized inputs; the reduction
itself is checked against a component-count oracle.
"""

import numpy as np
import pytest

from vinedist.complexes import cubical_from_image, lower_star
from vinedist.errors import ValidationError
from vinedist.persistence import (
    PersistenceDiagram,
    compute_diagram,
    compute_h0_union_find,
    diagram_pair,
    filtration_order,
    image_h1_diagram,
)
from vinedist.experiments import path_complex

from generators import random_complex, random_filtration, random_lower_star
from oracles import sublevel_component_count


def as_flagged_multiset(D):
    return sorted(zip(D.births.tolist(), D.deaths.tolist(), D.essential.tolist()))


class TestDiagramContainer:
    def test_canonical_order(self):
        D = PersistenceDiagram(0, [3.0, 1.0, 1.0], [4.0, 5.0, 2.0],
                               [False, True, False], 5.0)
        assert D.multiset() == [(1.0, 2.0), (1.0, 5.0), (3.0, 4.0)]
        assert D.points.shape == (3, 2)

    def test_rejects_birth_after_death(self):
        with pytest.raises(ValidationError):
            PersistenceDiagram(0, [2.0], [1.0], [False], 3.0)

    def test_rejects_ceiling_below_finite_death(self):
        with pytest.raises(ValidationError):
            PersistenceDiagram(0, [0.0], [2.0], [False], 1.0)

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            PersistenceDiagram(0, [0.0], [1.0, 2.0], [False], 3.0)

    def test_without_essential(self):
        D = PersistenceDiagram(1, [0.0, 1.0], [2.0, 3.0], [False, True], 3.0)
        kept = D.without_essential()
        assert kept.multiset() == [(0.0, 2.0)]
        assert kept.ceiling == 3.0


class TestPathExample:
    """Three vertices valued 0, 2, 1 on a path."""

    def setup_method(self):
        self.K = path_complex(3)
        self.f = lower_star([0.0, 2.0, 1.0], self.K)

    def test_h0(self):
        D = compute_diagram(self.K, self.f, 0)
        assert as_flagged_multiset(D) == [(0.0, 2.0, True), (1.0, 2.0, False)]
        assert D.ceiling == 2.0

    def test_h0_union_find_matches(self):
        D = compute_h0_union_find(self.K, self.f)
        assert as_flagged_multiset(D) == [(0.0, 2.0, True), (1.0, 2.0, False)]

    def test_h1_empty(self):
        assert compute_diagram(self.K, self.f, 1).n_points == 0

    def test_explicit_ceiling(self):
        D = compute_diagram(self.K, self.f, 0, ceiling=5.0)
        assert as_flagged_multiset(D) == [(0.0, 5.0, True), (1.0, 2.0, False)]

    def test_ceiling_below_death_rejected(self):
        with pytest.raises(ValidationError):
            compute_diagram(self.K, self.f, 0, ceiling=1.5)
        with pytest.raises(ValidationError):
            compute_h0_union_find(self.K, self.f, ceiling=1.5)


def test_constant_function_needs_room_below_ceiling():
    K = path_complex(4)
    f = lower_star([2.0, 2.0, 2.0, 2.0], K)
    # at the default ceiling (the max value) the essential class has zero
    # persistence and is dropped; an explicit higher ceiling keeps it
    assert compute_diagram(K, f, 0).n_points == 0
    D = compute_diagram(K, f, 0, ceiling=3.0)
    assert as_flagged_multiset(D) == [(2.0, 3.0, True)]


def test_filtration_order_faces_first():
    rng = np.random.default_rng(21)
    for _ in range(20):
        K = random_complex(rng)
        f = random_lower_star(rng, K, integer=True)
        order = filtration_order(K, f)
        pos = np.empty(K.n_cells, dtype=int)
        pos[order.order] = np.arange(K.n_cells)
        for c in K.cells:
            for b in c.boundary:
                assert pos[b] < pos[c.id]
        keys = [(f.values[c], K.dims[c], c) for c in order.order]
        assert keys == sorted(keys)


class TestUnionFindEquivalence:
    def test_matches_reduction(self):
        rng = np.random.default_rng(22)
        for trial in range(60):
            K = random_complex(rng)
            integer = trial % 2 == 0
            f = (
                random_lower_star(rng, K, integer=integer)
                if trial % 3
                else random_filtration(rng, K, integer=integer)
            )
            A = compute_diagram(K, f, 0)
            B = compute_h0_union_find(K, f)
            assert as_flagged_multiset(A) == as_flagged_multiset(B)

    def test_component_count_oracle(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            K = random_complex(rng)
            f = random_lower_star(rng, K, integer=True)
            # ceiling above the max value, else a component born exactly at
            # the default ceiling is dropped as zero-persistence
            D = compute_h0_union_find(K, f, ceiling=float(f.values.max()) + 1.0)
            edges = [
                (K.cells[e].boundary[0], K.cells[e].boundary[-1], f.values[e])
                for e in K.by_dim.get(1, [])
            ]
            values = {int(v): float(f.values[v]) for v in K.vertex_ids}
            crit = sorted(set(f.values.tolist()))
            probes = [crit[0] - 0.5] + [
                (a + b) / 2 for a, b in zip(crit, crit[1:])
            ] + [crit[-1] + 0.5]
            for t in probes:
                # alive at t: born by t, not yet dead (essential never die;
                # zero-persistence pairs cancel and were dropped on both sides)
                alive = int(
                    np.sum((D.births <= t) & (D.essential | (D.deaths > t)))
                )
                assert alive == sublevel_component_count(edges, values, t)


class TestImageDuality:
    def test_ring(self):
        img = np.zeros((3, 3))
        img[1, 1] = 1.0
        D = image_h1_diagram(img)
        assert D.multiset() == [(0.0, 1.0)]
        assert not D.essential.any()

    def test_matches_reduction_on_random_images(self):
        rng = np.random.default_rng(24)
        for trial in range(60):
            m = int(rng.integers(1, 7))
            n = int(rng.integers(1, 7))
            if trial % 2:
                img = rng.uniform(0.0, 1.0, (m, n))
            else:
                img = rng.integers(0, 3, (m, n)).astype(float)
            K, f = cubical_from_image(img)
            A = compute_diagram(K, f, 1)
            B = image_h1_diagram(img)
            assert as_flagged_multiset(A) == as_flagged_multiset(B), img

    def test_ceiling_validation(self):
        img = np.zeros((3, 3))
        img[1, 1] = 1.0
        with pytest.raises(ValidationError):
            image_h1_diagram(img, ceiling=0.5)
        with pytest.raises(ValidationError):
            image_h1_diagram(np.zeros(4))

    def test_thin_grids_have_no_h1(self):
        assert image_h1_diagram(np.zeros((1, 5))).n_points == 0
        assert image_h1_diagram(np.zeros((5, 1))).n_points == 0


def test_h2_on_filled_shell():
    """Octahedron boundary plus both solid halves: a 2-sphere that fills in."""
    # vertices: 4 equator (0..3), top 4, bottom 5
    cells = [(i, 0, ()) for i in range(6)]
    edge_id = {}

    def add_edge(u, v, val):
        cells.append((len(cells), 1, (u, v)))
        edge_id[frozenset((u, v))] = len(cells) - 1

    tri_id = {}

    def add_tri(u, v, w):
        bnd = tuple(edge_id[frozenset(p)] for p in [(u, v), (u, w), (v, w)])
        cells.append((len(cells), 2, bnd))
        tri_id[frozenset((u, v, w))] = len(cells) - 1

    equator = [(0, 1), (1, 2), (2, 3), (0, 3)]
    for u, v in equator:
        add_edge(u, v, 0.0)
    for apex in (4, 5):
        for u in range(4):
            add_edge(u, apex, 0.0)
    faces = []
    for apex in (4, 5):
        for u, v in equator:
            add_tri(u, v, apex)
            faces.append(frozenset((u, v, apex)))
    # two tetrahedra filling the top and bottom halves would need interior
    # triangles; instead cone each half from its apex through the equator
    # diagonals: add diagonal 0-2, four interior triangles, four 3-cells
    add_edge(0, 2, 1.0)
    interior = [(0, 1, 2), (0, 2, 3), (0, 2, 4), (0, 2, 5)]
    for u, v, w in interior:
        add_tri(u, v, w)
    for apex in (4, 5):
        for half in [(0, 1, 2), (0, 2, 3)]:
            tris = [frozenset(half), frozenset((half[0], half[1], apex)),
                    frozenset((half[0], half[2], apex)), frozenset((half[1], half[2], apex))]
            cells.append((len(cells), 3, tuple(tri_id[t] for t in tris)))

    from vinedist.complexes import build_complex, FilterFunction

    K = build_complex(cells)
    values = np.zeros(K.n_cells)
    for c in K.cells:
        if c.dim >= 1:
            base = max(values[b] for b in c.boundary)
            values[c.id] = base
    # the shell is complete at 0; the diagonal edge and everything above it
    # enter at 1, filling the sphere
    values[edge_id[frozenset((0, 2))]] = 1.0
    for c in K.cells:
        if c.dim >= 2:
            values[c.id] = max(values[b] for b in c.boundary)
    f = FilterFunction(values)
    D = compute_diagram(K, f, 2)
    assert D.multiset() == [(0.0, 1.0)]


def test_diagram_pair_shares_ceiling():
    K = path_complex(3)
    f = lower_star([0.0, 2.0, 1.0], K)
    g = lower_star([0.0, 5.0, 1.0], K)
    P, Q = diagram_pair(K, f, g, 0)
    assert P.ceiling == Q.ceiling == 5.0
    assert (0.0, 5.0) in P.multiset()


def test_zero_persistence_points_dropped():
    K = path_complex(3)
    f = lower_star([1.0, 1.0, 1.0], K)
    # both merges happen at the common birth value
    assert compute_diagram(K, f, 0, ceiling=2.0).multiset() == [(1.0, 2.0)]


def test_dim_validation():
    K = path_complex(3)
    f = lower_star([0.0, 1.0, 2.0], K)
    with pytest.raises(ValidationError):
        compute_diagram(K, f, -1)
    assert compute_diagram(K, f, 3).n_points == 0
