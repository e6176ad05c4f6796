"""Desk-scale experiment harnesses and dataset-level comparisons.

Everything here is deterministic given the seed arguments and emits
plot-ready tables; rendering lives in vinedist.plots.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .complexes import (
    VERTEX_LEVEL,
    CellComplex,
    build_complex,
    cubical_from_image,
    lower_star,
    straight_line_homotopy,
)
from .errors import (
    DomainMismatchError,
    EmptySequenceError,
    UnknownColumnError,
    ValidationError,
)
from .persistence import diagram_pair, image_h1_diagram
from .vineyard import build_vineyard, vineyard_distance, vineyard_from_diagrams
from .wasserstein import Weighting, wasserstein

__all__ = [
    "DualGraphDataset",
    "DistanceTriple",
    "path_complex",
    "gaussian_experiment",
    "digits_experiment",
    "digit_image",
    "geo_compare",
    "synthetic_city_dataset",
    "diagram_sequence_summary",
    "distance_matrix",
    "classical_mds",
    "mds_stress",
    "one_nn_accuracy",
]

SQRT_2PI = math.sqrt(2.0 * math.pi)


def path_complex(n: int) -> CellComplex:
    """Path graph: n vertices 0..n-1, edge i -- i+1."""
    if n < 1:
        raise ValidationError("path needs at least one vertex")
    cells = [(i, 0, ()) for i in range(n)]
    cells += [(n + i, 1, (i, i + 1)) for i in range(n - 1)]
    return build_complex(cells)


# ---------------------------------------------------------------------------
# gaussian experiment


def gaussian_experiment(
    grid_size: int = 257,
    shift_range: tuple[float, float] = (0.25, 2.5),
    variance_range: tuple[float, float] = (1.5, 9.0),
    n_values: int = 8,
    half_width: float = 4.0,
) -> list[dict]:
    """Mean-shift vs variance-change sweeps of a negated Gaussian density.

    The reference function is minus the N(0,1) density sampled on a 1-D
    path; every comparison row reports (L1 of the functions, W_{1,1} of the
    H0 diagrams, vineyard distance of the straight-line homotopy).  Shifted
    means are snapped to the sample grid so the global minimum value is
    preserved exactly; variance-changed curves are rescaled to the same
    minimum.  Rows: kind (mean|variance), param, l1, w1, vineyard.
    """
    if grid_size < 16:
        raise ValidationError("grid_size must be >= 16")
    xs = np.linspace(-half_width, half_width, grid_size)
    dx = xs[1] - xs[0]
    K = path_complex(grid_size)

    def density(x):
        return np.exp(-(x**2) / 2.0) / SQRT_2PI

    f_vert = -density(xs)
    f = lower_star(f_vert, K)
    uniform = Weighting.uniform()

    def row(kind, param, g_vert):
        g = lower_star(g_vert, K)
        l1 = float(np.sum(np.abs(f_vert - g_vert)) * dx)
        ceiling = float(max(f.values.max(), g.values.max()))
        P, Q = diagram_pair(K, f, g, 0, ceiling)
        w1 = wasserstein(P, Q, 1, 1)[0]
        h = straight_line_homotopy(f, g, K, mode=VERTEX_LEVEL)
        V = vineyard_distance(build_vineyard(h, 0, uniform, ceiling=ceiling), uniform)
        return {"kind": kind, "param": float(param), "l1": l1, "w1": w1, "vineyard": V}

    rows = []
    raw_shifts = np.linspace(shift_range[0], shift_range[1], n_values)
    snapped = sorted({round(float(s) / dx) * dx for s in raw_shifts})
    for s in snapped:
        rows.append(row("mean", s, -density(xs - s)))
    for v in np.linspace(variance_range[0], variance_range[1], n_values):
        rows.append(row("variance", v, -np.exp(-(xs**2) / (2.0 * v)) / SQRT_2PI))
    return rows


# ---------------------------------------------------------------------------
# synthetic digits experiment


def _stroke_mask(size: int, skeleton_dist: np.ndarray, width: float) -> np.ndarray:
    """Linear anti-aliasing ramp around a skeleton distance field."""
    return np.clip(width / 2.0 + 0.5 - skeleton_dist, 0.0, 1.0)


def _segment_distance(rr, cc, a, b):
    ab = np.array(b) - np.array(a)
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.hypot(rr - a[0], cc - a[1])
    t = np.clip(((rr - a[0]) * ab[0] + (cc - a[1]) * ab[1]) / denom, 0.0, 1.0)
    return np.hypot(rr - (a[0] + t * ab[0]), cc - (a[1] + t * ab[1]))


def digit_image(kind: str, size: int, rng: np.random.Generator) -> np.ndarray:
    """Synthetic stand-ins for handwritten 6 / 9 / 7 (intensities in [0,1]).

    6 and 9 are point mirrors of each other: a ring (the loop) plus a tail
    stroke; 7 is a top bar and a slanted stroke, no loop.  Fixed geometry
    constants below, with small jitter in position, radius, stroke width,
    and overall intensity.
    """
    if kind == "nine":
        # exact point mirror of an independently drawn six, so the two
        # classes are indistinguishable up to a rotation of the grid
        return np.ascontiguousarray(digit_image("six", size, rng)[::-1, ::-1])
    rr, cc = np.mgrid[0:size, 0:size].astype(float)
    jit = lambda a: rng.uniform(-a, a)  # noqa: E731
    width = 1.3 * size / 16.0 + rng.uniform(-0.15, 0.15)
    intensity = rng.uniform(0.85, 1.0)
    fields = []
    if kind == "six":
        center = np.array([0.60 * size + jit(0.04 * size), 0.40 * size + jit(0.04 * size)])
        tail_to = np.array([0.10 * size + jit(0.03 * size), 0.70 * size + jit(0.03 * size)])
        radius = 0.21 * size * (1.0 + rng.uniform(-0.06, 0.06))
        ring = np.abs(np.hypot(rr - center[0], cc - center[1]) - radius)
        fields.append(ring)
        tail_from = center + np.array([-radius, 0.0])
        fields.append(_segment_distance(rr, cc, tail_from, tail_to))
    elif kind == "seven":
        r0 = 0.18 * size + jit(0.03 * size)
        bar_l = np.array([r0, 0.20 * size + jit(0.03 * size)])
        bar_r = np.array([r0, 0.78 * size + jit(0.03 * size)])
        foot = np.array([0.85 * size + jit(0.03 * size), 0.38 * size + jit(0.03 * size)])
        fields.append(_segment_distance(rr, cc, bar_l, bar_r))
        fields.append(_segment_distance(rr, cc, bar_r, foot))
    else:
        raise ValidationError(f"unknown digit kind {kind!r}")
    img = np.zeros((size, size))
    for d in fields:
        img = np.maximum(img, _stroke_mask(size, d, width))
    return img * intensity


@dataclass(frozen=True)
class DigitsResult:
    labels: list[str]
    images: np.ndarray
    matrices: dict[str, np.ndarray]
    embeddings: dict[str, np.ndarray]
    stress: dict[str, float]
    accuracy: dict[str, float]
    w1_six_nine_accuracy: float


_digit_state: dict = {}


def _digit_worker_init(images, size, delta, n0):
    K, _ = cubical_from_image(np.zeros((size, size)))
    _digit_state["K"] = K
    _digit_state["images"] = images
    _digit_state["size"] = size
    _digit_state["delta"] = delta
    _digit_state["n0"] = n0


def _digit_pair_vineyard(pair):
    ia, ib = pair
    K = _digit_state["K"]
    images = _digit_state["images"]
    uniform = Weighting.uniform()
    fa = lower_star(1.0 - images[ia].ravel(), K)
    fb = lower_star(1.0 - images[ib].ravel(), K)
    h = straight_line_homotopy(fa, fb, K, mode=VERTEX_LEVEL)
    V = build_vineyard(
        h, 1, uniform, n0=_digit_state["n0"], delta=_digit_state["delta"], ceiling=1.0
    )
    return ia, ib, vineyard_distance(V, uniform)


def digits_experiment(
    n_per_class: int = 30,
    image_size: int = 16,
    seed: int = 0,
    delta: float = 0.05,
    n0: int = 4,
    workers: int = 1,
) -> DigitsResult:
    """Three-class synthetic digit benchmark (six / nine / seven).

    Images are inverted (strokes low) and compared three ways: plain L1 on
    pixels, W_{1,1} on H1 diagrams, and the straight-line-homotopy vineyard
    distance in dimension 1.  Returns distance matrices, classical 2-D MDS
    embeddings with their stress, and leave-one-out 1-NN accuracies (plus
    the six-vs-nine binary accuracy under W1).
    """
    if n_per_class < 5:
        raise ValidationError("n_per_class must be >= 5")
    rng = np.random.default_rng(seed)
    kinds = ["six", "nine", "seven"]
    labels = [k for k in kinds for _ in range(n_per_class)]
    images = np.stack([digit_image(k, image_size, rng) for k in labels])
    n = len(labels)

    flat = images.reshape(n, -1)
    M_l1 = np.mean(np.abs(flat[:, None, :] - flat[None, :, :]), axis=2)

    diags = [image_h1_diagram(1.0 - im, ceiling=1.0) for im in images]
    M_w1 = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            M_w1[i, j] = M_w1[j, i] = wasserstein(diags[i], diags[j], 1, 1)[0]

    M_v = np.zeros((n, n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if workers > 1:
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_digit_worker_init,
            initargs=(images, image_size, delta, n0),
        ) as pool:
            for ia, ib, val in pool.map(_digit_pair_vineyard, pairs, chunksize=32):
                M_v[ia, ib] = M_v[ib, ia] = val
    else:
        _digit_worker_init(images, image_size, delta, n0)
        for pair in pairs:
            ia, ib, val = _digit_pair_vineyard(pair)
            M_v[ia, ib] = M_v[ib, ia] = val

    matrices = {"l1": M_l1, "w1": M_w1, "vineyard": M_v}
    embeddings = {k: classical_mds(M, 2) for k, M in matrices.items()}
    stress = {k: mds_stress(matrices[k], embeddings[k]) for k in matrices}
    accuracy = {k: one_nn_accuracy(M, labels) for k, M in matrices.items()}

    six_nine = [i for i, lab in enumerate(labels) if lab in ("six", "nine")]
    sub = M_w1[np.ix_(six_nine, six_nine)]
    sub_labels = [labels[i] for i in six_nine]
    w1_69 = one_nn_accuracy(sub, sub_labels)

    return DigitsResult(labels, images, matrices, embeddings, stress, accuracy, w1_69)


# ---------------------------------------------------------------------------
# dual-graph dataset comparisons


@dataclass(frozen=True)
class DualGraphDataset:
    """Graph (dim <= 1 complex) with named per-vertex columns."""

    complex: CellComplex
    columns: dict[str, np.ndarray]

    def __post_init__(self):
        if self.complex.max_dim > 1:
            raise ValidationError("dual-graph dataset must have dimension <= 1")
        cols = {}
        for name, col in self.columns.items():
            a = np.asarray(col, dtype=float)
            if a.shape != (self.complex.vertex_count,):
                raise DomainMismatchError(
                    f"column {name!r} has {a.shape} values for "
                    f"{self.complex.vertex_count} vertices"
                )
            if not np.all(np.isfinite(a)):
                raise ValidationError(f"column {name!r} has non-finite entries")
            a.setflags(write=False)
            cols[name] = a
        object.__setattr__(self, "columns", cols)


@dataclass(frozen=True)
class DistanceTriple:
    l1: float
    w1: float
    vineyard: float

    def as_dict(self) -> dict:
        return {"l1": self.l1, "w1": self.w1, "vineyard": self.vineyard}


def load_dataset_json(path) -> DualGraphDataset:
    import json

    with open(path) as fh:
        data = json.load(fh)
    if "cells" not in data or "columns" not in data:
        raise ValidationError(f"{path}: dataset JSON needs 'cells' and 'columns'")
    K = build_complex(data["cells"])
    return DualGraphDataset(K, {k: np.asarray(v, dtype=float) for k, v in data["columns"].items()})


def geo_compare(
    dataset: DualGraphDataset,
    col_f: str,
    col_g: str,
    one_minus: bool = False,
    weighting: Weighting | None = None,
) -> DistanceTriple:
    """Compare two vertex columns of one graph three ways.

    Reports the normalized L1 difference of the raw columns, W_{1,1} of the
    H0 diagrams, and the weighted vineyard distance of the straight-line
    homotopy (standard weighting by default).  one_minus replaces each
    column x by 1 - x first, turning high shares into early minima.
    """
    for name in (col_f, col_g):
        if name not in dataset.columns:
            raise UnknownColumnError(
                f"column {name!r} not in dataset (have {sorted(dataset.columns)})"
            )
    if weighting is None:
        weighting = Weighting.standard()
    a = dataset.columns[col_f]
    b = dataset.columns[col_g]
    if one_minus:
        a, b = 1.0 - a, 1.0 - b
    K = dataset.complex
    f = lower_star(a, K)
    g = lower_star(b, K)
    l1 = float(np.mean(np.abs(a - b)))
    ceiling = float(max(f.values.max(), g.values.max()))
    P, Q = diagram_pair(K, f, g, 0, ceiling)
    w1 = wasserstein(P, Q, 1, 1)[0]
    h = straight_line_homotopy(f, g, K, mode=VERTEX_LEVEL)
    V = vineyard_distance(build_vineyard(h, 0, weighting, ceiling=ceiling), weighting)
    return DistanceTriple(l1=l1, w1=float(w1), vineyard=float(V))


def synthetic_city_dataset(kind: str, n: int = 80, seed: int = 0) -> DualGraphDataset:
    """Toy precinct-path dataset with two share columns.

    kind 'separated': the two columns peak in different places (same shapes);
    kind 'overlapping': they peak in nearly the same place.  Chosen so the
    H0 diagrams (hence W1) agree across kinds while the vineyards differ.
    """
    if kind not in ("separated", "overlapping"):
        raise ValidationError("kind must be 'separated' or 'overlapping'")
    rng = np.random.default_rng(seed)
    xs = np.arange(n, dtype=float)
    K = path_complex(n)

    def bump(center, depth, sigma):
        return depth * np.exp(-((xs - center) ** 2) / (2.0 * sigma**2))

    base = 0.02 + 0.01 * np.sin(xs / 7.0)  # gentle, peak-free background
    col_a = base + bump(0.30 * n, 0.75, 0.06 * n)
    center_b = 0.70 * n if kind == "separated" else 0.33 * n
    col_b = base + bump(center_b, 0.60, 0.06 * n)
    noise = rng.normal(0.0, 1e-4, size=n)
    return DualGraphDataset(K, {"groupA": col_a + noise, "groupB": col_b + noise})


# ---------------------------------------------------------------------------
# diagram sequences and distance matrices


def diagram_sequence_summary(diagrams, weighting: Weighting | None = None):
    """Vineyard through a stored diagram sequence and its distance."""
    if weighting is None:
        weighting = Weighting.uniform()
    V = vineyard_from_diagrams(diagrams, weighting)
    return vineyard_distance(V, weighting), V


def distance_matrix(
    vertex_values_list,
    K: CellComplex,
    metric: str = "l1",
    dim: int = 0,
    weighting: Weighting | None = None,
) -> np.ndarray:
    """Symmetric pairwise matrix over vertex-value inputs sharing one complex.

    metric: 'l1' (normalized vertex L1), 'w1' (W_{1,1} of dim-`dim`
    diagrams, shared ceiling per pair), or 'vineyard' (straight-line
    homotopy vineyard distance).
    """
    if metric not in ("l1", "w1", "vineyard"):
        raise ValidationError(f"unknown metric {metric!r}")
    if len(vertex_values_list) < 2:
        raise EmptySequenceError("need at least two inputs")
    vals = []
    for v in vertex_values_list:
        a = np.asarray(v, dtype=float)
        if a.shape != (K.vertex_count,):
            raise DomainMismatchError(
                f"input has {a.shape} values for {K.vertex_count} vertices"
            )
        vals.append(a)
    if weighting is None:
        weighting = Weighting.uniform()
    n = len(vals)
    filt = [lower_star(v, K) for v in vals]
    M = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if metric == "l1":
                d = float(np.mean(np.abs(vals[i] - vals[j])))
            else:
                ceiling = float(max(filt[i].values.max(), filt[j].values.max()))
                if metric == "w1":
                    P, Q = diagram_pair(K, filt[i], filt[j], dim, ceiling)
                    d = wasserstein(P, Q, 1, 1)[0]
                else:
                    h = straight_line_homotopy(filt[i], filt[j], K, mode=VERTEX_LEVEL)
                    d = vineyard_distance(
                        build_vineyard(h, dim, weighting, ceiling=ceiling), weighting
                    )
            M[i, j] = M[j, i] = d
    return M


# ---------------------------------------------------------------------------
# embedding helpers


def classical_mds(D, k: int = 2) -> np.ndarray:
    """Classical (Torgerson) MDS: double-center the squared distances and
    embed along the top-k positive eigenvectors."""
    D = np.asarray(D, dtype=float)
    n = len(D)
    J = np.eye(n) - np.ones((n, n)) / n
    B = -J @ (D**2) @ J / 2.0
    evals, evecs = np.linalg.eigh(B)
    order = np.argsort(evals)[::-1]
    coords = np.zeros((n, k))
    for out_col, idx in enumerate(order[:k]):
        lam = evals[idx]
        if lam > 0:
            coords[:, out_col] = evecs[:, idx] * math.sqrt(lam)
    return coords


def mds_stress(D, coords) -> float:
    """Relative embedding error ||D_hat - D||_F / ||D||_F (diagnostic)."""
    D = np.asarray(D, dtype=float)
    diff = coords[:, None, :] - coords[None, :, :]
    D_hat = np.sqrt(np.sum(diff**2, axis=2))
    denom = float(np.sqrt(np.sum(D**2)))
    if denom == 0.0:
        return 0.0
    return float(np.sqrt(np.sum((D_hat - D) ** 2)) / denom)


def one_nn_accuracy(D, labels) -> float:
    """Leave-one-out nearest-neighbor accuracy (ties -> lowest index)."""
    D = np.asarray(D, dtype=float)
    n = len(labels)
    hits = 0
    for i in range(n):
        row = D[i].copy()
        row[i] = np.inf
        j = int(np.argmin(row))
        hits += labels[j] == labels[i]
    return hits / n
