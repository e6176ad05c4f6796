"""vinedist: vineyard distance between filtered datasets.

Persistence diagrams of sublevel filtrations, Wasserstein-type distances,
vineyards of straight-line homotopies, weighted geodesics in the half-plane,
and the minimum vine cost, plus small experiment harnesses and a CLI.
"""

from .complexes import (
    Cell,
    CellComplex,
    FilterFunction,
    Homotopy,
    build_complex,
    cubical_from_image,
    filter_down,
    lower_star,
    straight_line_homotopy,
    validate_monotone,
    vietoris_rips,
)
from .errors import ValidationError
from .geodesics import (
    BoundReport,
    check_bounds,
    diagonal_leg_cost,
    midpoint_transfer,
    mvc,
    segment_integral,
    standard_path_distance,
)
from .persistence import (
    PersistenceDiagram,
    compute_diagram,
    compute_h0_union_find,
    diagram_pair,
    filtration_order,
    image_h1_diagram,
)
from .vineyard import (
    Vine,
    Vineyard,
    build_vineyard,
    riemann_sum_distance,
    vineyard_distance,
    vineyard_from_diagrams,
)
from .wasserstein import (
    Matching,
    Weighting,
    bottleneck,
    evaluate_matching,
    wasserstein,
    weighted_wasserstein,
)

__version__ = "0.1.0"
