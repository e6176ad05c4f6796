"""Complex construction, filter functions, and homotopies."""

import math

import numpy as np
import pytest

from vinedist.complexes import (
    SIMPLEX_LEVEL,
    VERTEX_LEVEL,
    Cell,
    CellComplex,
    build_complex,
    cubical_from_image,
    filter_down,
    lower_star,
    straight_line_homotopy,
    validate_monotone,
    vietoris_rips,
)
from vinedist.errors import (
    AsymmetricMatrixError,
    ComplexMismatchError,
    DanglingFaceError,
    DimensionMismatchError,
    InvalidComplexError,
    MissingVertexValueError,
    NegativeDistanceError,
    NonMonotoneFunctionError,
    NotVertexBasedError,
    ValidationError,
)
from vinedist.persistence import compute_diagram

from generators import random_complex, random_filtration, random_lower_star

SQRT2 = math.sqrt(2.0)


def triangle_complex():
    """One filled triangle: 3 vertices, 3 edges, 1 two-cell."""
    return build_complex(
        [
            (0, 0, ()),
            (1, 0, ()),
            (2, 0, ()),
            (3, 1, (0, 1)),
            (4, 1, (1, 2)),
            (5, 1, (0, 2)),
            (6, 2, (3, 4, 5)),
        ]
    )


class TestBuildComplex:
    def test_accepts_cells_triples_and_dicts(self):
        as_triples = build_complex([(0, 0, ()), (1, 0, ()), (2, 1, (0, 1))])
        as_dicts = build_complex(
            [
                {"id": 0, "dim": 0, "boundary": []},
                {"id": 1, "dim": 0, "boundary": []},
                {"id": 2, "dim": 1, "boundary": [0, 1]},
            ]
        )
        as_cells = build_complex([Cell(0, 0, ()), Cell(1, 0, ()), Cell(2, 1, (0, 1))])
        assert as_triples == as_dicts == as_cells
        assert as_triples.n_cells == 3
        assert as_triples.max_dim == 1

    def test_rejects_empty(self):
        with pytest.raises(InvalidComplexError):
            build_complex([])

    def test_rejects_sparse_ids(self):
        with pytest.raises(InvalidComplexError):
            build_complex([(0, 0, ()), (2, 0, ())])

    def test_rejects_dangling_face(self):
        with pytest.raises(DanglingFaceError):
            build_complex([(0, 0, ()), (1, 1, (0, 7))])

    def test_rejects_wrong_face_dimension(self):
        # a 2-cell listing a vertex as a face skips a dimension
        with pytest.raises(DimensionMismatchError):
            build_complex([(0, 0, ()), (1, 0, ()), (2, 2, (0, 1))])

    def test_rejects_vertex_with_boundary(self):
        with pytest.raises(DimensionMismatchError):
            build_complex([(0, 0, ()), (1, 0, (0,))])

    def test_vertex_closure(self):
        K = triangle_complex()
        assert K.vertices_of(6) == frozenset({0, 1, 2})
        assert K.vertices_of(3) == frozenset({0, 1})
        assert K.vertices_of(0) == frozenset({0})


class TestLowerStar:
    def test_small_example(self):
        K = triangle_complex()
        f = lower_star([0.0, 1.0, 2.0], K)
        assert f.values.tolist() == [0.0, 1.0, 2.0, 1.0, 2.0, 2.0, 2.0]
        assert f.is_vertex_based

    def test_dict_input_and_missing_value(self):
        K = build_complex([(0, 0, ()), (1, 0, ()), (2, 1, (0, 1))])
        f = lower_star({0: 3.0, 1: 5.0}, K)
        assert f.values.tolist() == [3.0, 5.0, 5.0]
        with pytest.raises(MissingVertexValueError):
            lower_star({0: 3.0}, K)
        with pytest.raises(MissingVertexValueError):
            lower_star([1.0, 2.0, 3.0], K)

    def test_rejects_non_finite(self):
        K = build_complex([(0, 0, ()), (1, 0, ()), (2, 1, (0, 1))])
        with pytest.raises(ValidationError):
            lower_star([0.0, math.nan], K)

    def test_monotone_on_random_complexes(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            K = random_complex(rng)
            validate_monotone(K, random_lower_star(rng, K))
            validate_monotone(K, random_filtration(rng, K))

    def test_validate_monotone_catches_violation(self):
        K = build_complex([(0, 0, ()), (1, 0, ()), (2, 1, (0, 1))])
        from vinedist.complexes import FilterFunction

        with pytest.raises(NonMonotoneFunctionError):
            validate_monotone(K, FilterFunction(np.array([1.0, 2.0, 1.5])))
        with pytest.raises(ComplexMismatchError):
            validate_monotone(K, FilterFunction(np.array([1.0, 2.0])))


class TestFilterDown:
    def test_involution(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            K = random_complex(rng)
            f = random_lower_star(rng, K)
            back = filter_down(filter_down(f, K), K)
            assert np.allclose(back.values, f.values)

    def test_offset(self):
        K = build_complex([(0, 0, ()), (1, 0, ()), (2, 1, (0, 1))])
        g = filter_down(lower_star([1.0, 3.0], K), K, offset=3.0)
        assert g.vertex_values.tolist() == [2.0, 0.0]
        assert g.values.tolist() == [2.0, 0.0, 2.0]

    def test_needs_vertex_based(self):
        rng = np.random.default_rng(6)
        K = random_complex(rng)
        with pytest.raises(NotVertexBasedError):
            filter_down(random_filtration(rng, K), K)


class TestVietorisRips:
    def unit_square_matrix(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        return np.linalg.norm(pts[:, None] - pts[None, :], axis=2)

    def test_unit_square_h1(self):
        D = self.unit_square_matrix()
        # without triangles the loop born at 1 never dies: capped at the
        # largest edge length sqrt(2) and flagged essential
        K1, f1 = vietoris_rips(D, max_dim=1, max_scale=math.inf)
        dgm1 = compute_diagram(K1, f1, 1)
        assert dgm1.multiset() == [(1.0, pytest.approx(SQRT2))]
        assert dgm1.essential.tolist() == [True]
        # with triangles the same loop is killed at sqrt(2)
        K2, f2 = vietoris_rips(D, max_dim=2, max_scale=math.inf)
        dgm2 = compute_diagram(K2, f2, 1)
        assert dgm2.multiset() == [(1.0, pytest.approx(SQRT2))]
        assert dgm2.essential.tolist() == [False]

    def test_cell_counts_and_values(self):
        D = self.unit_square_matrix()
        K, f = vietoris_rips(D, max_dim=2, max_scale=math.inf)
        counts = {d: len(K.by_dim[d]) for d in range(K.max_dim + 1)}
        assert counts == {0: 4, 1: 6, 2: 4}
        assert np.all(f.values[K.by_dim[0]] == 0.0)
        validate_monotone(K, f)

    def test_max_scale_truncates(self):
        D = self.unit_square_matrix()
        K, _ = vietoris_rips(D, max_dim=2, max_scale=1.2)
        assert {d: len(K.by_dim[d]) for d in range(2)} == {0: 4, 1: 4}
        assert K.max_dim == 1

    def test_perturbed_square(self):
        rng = np.random.default_rng(9)
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        pts += rng.normal(0.0, 0.02, pts.shape)
        D = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
        K, f = vietoris_rips(D, max_dim=2, max_scale=math.inf)
        dgm = compute_diagram(K, f, 1)
        assert dgm.n_points == 1
        b, d = dgm.births[0], dgm.deaths[0]
        sides = sorted(D[np.triu_indices(4, 1)])
        assert b == pytest.approx(sides[3])  # largest of the four sides
        assert b < d <= sides[5] + 1e-12

    def test_input_validation(self):
        with pytest.raises(AsymmetricMatrixError):
            vietoris_rips(np.array([[0.0, 1.0, 2.0]]), 1, 10.0)
        bad = np.array([[0.0, 1.0], [2.0, 0.0]])
        with pytest.raises(AsymmetricMatrixError):
            vietoris_rips(bad, 1, 10.0)
        with pytest.raises(NegativeDistanceError):
            vietoris_rips(np.array([[0.0, -1.0], [-1.0, 0.0]]), 1, 10.0)
        with pytest.raises(ValidationError):
            vietoris_rips(np.array([[0.5, 1.0], [1.0, 0.0]]), 1, 10.0)
        with pytest.raises(ValidationError):
            vietoris_rips(np.zeros((2, 2)), -1, 10.0)


class TestCubical:
    def test_cell_counts(self):
        rng = np.random.default_rng(2)
        for m, n in [(1, 1), (1, 4), (3, 3), (4, 6)]:
            K, f = cubical_from_image(rng.uniform(0, 1, (m, n)))
            expect = {
                0: m * n,
                1: m * (n - 1) + (m - 1) * n,
                2: (m - 1) * (n - 1),
            }
            got = {d: len(K.by_dim.get(d, ())) for d in range(3)}
            assert got == expect
            assert K.grid_shape == (m, n)
            validate_monotone(K, f)

    def test_ring_image_h1(self):
        img = np.zeros((3, 3))
        img[1, 1] = 1.0
        K, f = cubical_from_image(img)
        dgm = compute_diagram(K, f, 1)
        assert dgm.multiset() == [(0.0, 1.0)]

    def test_rejects_empty_and_1d(self):
        from vinedist.errors import EmptyGridError

        with pytest.raises(EmptyGridError):
            cubical_from_image(np.zeros((0, 3)))
        with pytest.raises(EmptyGridError):
            cubical_from_image(np.zeros(5))


class TestHomotopy:
    def setup_method(self):
        rng = np.random.default_rng(13)
        self.K = random_complex(rng)
        self.f = random_lower_star(rng, self.K)
        self.g = random_lower_star(rng, self.K)

    def test_endpoints(self):
        h = straight_line_homotopy(self.f, self.g, self.K)
        assert h.at(0.0) is self.f
        assert h.at(1.0) is self.g
        mid = h.at(0.5)
        assert np.allclose(mid.values, (self.f.values + self.g.values) / 2)

    def test_monotone_along_path(self):
        rng = np.random.default_rng(14)
        for _ in range(10):
            K = random_complex(rng)
            h = straight_line_homotopy(
                random_filtration(rng, K), random_filtration(rng, K), K
            )
            for t in rng.uniform(0, 1, 5):
                validate_monotone(K, h.at(float(t)))

    def test_vertex_mode(self):
        h = straight_line_homotopy(self.f, self.g, self.K, mode=VERTEX_LEVEL)
        mid = h.at(0.5)
        assert mid.is_vertex_based
        assert np.allclose(
            mid.vertex_values, (self.f.vertex_values + self.g.vertex_values) / 2
        )
        # vertex mode re-derives cells, so cell values can sit below the
        # simplex-mode interpolation but never above it
        simplex_mid = straight_line_homotopy(self.f, self.g, self.K).at(0.5)
        assert np.all(mid.values <= simplex_mid.values + 1e-12)

    def test_vertex_mode_needs_lower_star(self):
        rng = np.random.default_rng(15)
        generic = random_filtration(rng, self.K)
        with pytest.raises(NotVertexBasedError):
            straight_line_homotopy(generic, generic, self.K, mode=VERTEX_LEVEL)

    def test_complex_mismatch(self):
        rng = np.random.default_rng(16)
        other = random_complex(rng)
        while other.n_cells == self.K.n_cells:
            other = random_complex(rng)
        with pytest.raises(ComplexMismatchError):
            straight_line_homotopy(self.f, random_lower_star(rng, other), self.K)

    def test_bad_mode_and_time(self):
        with pytest.raises(ValidationError):
            straight_line_homotopy(self.f, self.g, self.K, mode="nope")
        h = straight_line_homotopy(self.f, self.g, self.K, mode=SIMPLEX_LEVEL)
        with pytest.raises(ValidationError):
            h.at(1.5)

    def test_reparameterized(self):
        h = straight_line_homotopy(self.f, self.g, self.K)
        r = h.reparameterized(lambda t: t * t)
        assert np.allclose(r.at(0.5).values, h.at(0.25).values)
        assert r.at(0.0) is self.f
        assert r.at(1.0) is self.g

    def test_value_ceiling(self):
        h = straight_line_homotopy(self.f, self.g, self.K)
        top = h.value_ceiling()
        for t in (0.0, 0.3, 0.7, 1.0):
            assert h.at(t).values.max() <= top + 1e-12


def test_rejects_non_monotone_endpoint():
    K = build_complex([(0, 0, ()), (1, 0, ()), (2, 1, (0, 1))])
    from vinedist.complexes import FilterFunction

    bad = FilterFunction(np.array([1.0, 1.0, 0.5]))
    good = FilterFunction(np.array([0.0, 0.0, 0.0]))
    with pytest.raises(NonMonotoneFunctionError):
        straight_line_homotopy(bad, good, K)


def test_grid_shape_ignored_by_equality():
    img = np.zeros((2, 2))
    K, _ = cubical_from_image(img)
    bare = CellComplex(K.cells)
    assert bare == K
    assert bare.grid_shape is None
