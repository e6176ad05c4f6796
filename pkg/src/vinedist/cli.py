"""Command-line interface.

Exit codes: 0 on success, 2 when an input fails validation, 1 on internal
errors.  Report-style commands write matplotlib figures next to their
delimited output (suppress with --no-plot).
"""

from __future__ import annotations

import functools
import json
import math
from pathlib import Path

import click
import numpy as np

from . import io
from .complexes import (
    cubical_from_image,
    filter_down,
    lower_star,
    straight_line_homotopy,
    vietoris_rips,
)
from .errors import ValidationError
from .experiments import (
    digits_experiment,
    distance_matrix,
    gaussian_experiment,
    geo_compare,
    load_dataset_json,
    diagram_sequence_summary,
)
from .geodesics import check_bounds, mvc
from .persistence import compute_diagram
from .vineyard import build_vineyard, vineyard_distance
from .wasserstein import Weighting, bottleneck, wasserstein

INF = math.inf


class _InputError(click.ClickException):
    exit_code = 2


def _wrap_validation(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as exc:
            raise _InputError(str(exc)) from exc

    return wrapper


def _parse_exponent(text: str) -> float:
    if text.lower() in ("inf", "infinity", "oo"):
        return INF
    return float(text)


def _emit(ctx, text: str, default_name: str):
    """Write to the --output path (file, or directory + default name) or stdout."""
    out = ctx.obj.get("output")
    if out is None:
        click.echo(text, nl=not text.endswith("\n"))
        return None
    out = Path(out)
    if out.is_dir() or out.suffix == "":
        out.mkdir(parents=True, exist_ok=True)
        out = out / default_name
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text if text.endswith("\n") else text + "\n")
    click.echo(str(out), err=True)
    return out


def _out_dir(ctx) -> Path:
    out = Path(ctx.obj.get("output") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


weighting_option = click.option(
    "--weighting",
    type=click.Choice(["uniform", "standard"]),
    default="uniform",
    show_default=True,
)


@click.group()
@click.option("--seed", type=int, default=0, show_default=True, help="RNG seed for experiments.")
@click.option("--output", type=click.Path(), default=None,
              help="Output file (or directory for report commands); stdout by default.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None,
              help="Preferred output format where a command supports both.")
@click.pass_context
def main(ctx, seed, output, fmt):
    """Vineyard distances between filtered datasets."""
    ctx.obj = {"seed": seed, "output": output, "fmt": fmt}


@main.command()
@click.option("--complex", "complex_path", type=click.Path(exists=True),
              help="Complex JSON; combine with --values.")
@click.option("--values", "values_path", type=click.Path(exists=True),
              help="Vertex-value CSV (vertex_id,value).")
@click.option("--image", "image_path", type=click.Path(exists=True),
              help="Image grid (CSV or plain PGM).")
@click.option("--distances", "distances_path", type=click.Path(exists=True),
              help="Point-cloud distance matrix CSV (Vietoris-Rips).")
@click.option("--max-dim", type=int, default=1, show_default=True)
@click.option("--max-scale", type=float, default=math.inf)
@click.option("--dim", type=int, default=0, show_default=True)
@click.option("--ceiling", type=float, default=None)
@click.option("--filter-down", "do_filter_down", is_flag=True,
              help="Replace vertex values v by offset - v before filtering.")
@click.option("--offset", type=float, default=0.0, show_default=True)
@click.pass_context
@_wrap_validation
def diagram(ctx, complex_path, values_path, image_path, distances_path,
            max_dim, max_scale, dim, ceiling, do_filter_down, offset):
    """Persistence diagram of a filtered complex, image, or point cloud."""
    modes = sum(x is not None for x in (complex_path, image_path, distances_path))
    if modes != 1:
        raise _InputError("pass exactly one of --complex/--values, --image, --distances")
    if complex_path is not None:
        if values_path is None:
            raise _InputError("--complex requires --values")
        K = io.load_complex_json(complex_path)
        f = lower_star(io.load_vertex_values_csv(values_path), K)
    elif image_path is not None:
        K, f = cubical_from_image(io.load_image(image_path))
    else:
        D = np.loadtxt(distances_path, delimiter=",", ndmin=2)
        K, f = vietoris_rips(D, max_dim=max_dim, max_scale=max_scale)
    if do_filter_down:
        f = filter_down(f, K, offset)
    Dg = compute_diagram(K, f, dim, ceiling)
    if ctx.obj.get("fmt") == "json":
        text = json.dumps(
            {
                "dim": Dg.dim,
                "ceiling": Dg.ceiling,
                "points": [
                    [float(b), float(d), int(e)]
                    for b, d, e in zip(Dg.births, Dg.deaths, Dg.essential)
                ],
            }
        )
        _emit(ctx, text, "diagram.json")
    else:
        _emit(ctx, io.diagram_csv_text(Dg), "diagram.csv")


def _distance_payload(ctx, value, matching, default_name):
    if ctx.obj.get("fmt") == "csv":
        _emit(ctx, f"distance\n{value!r}\n", default_name + ".csv")
    else:
        _emit(ctx, json.dumps({"distance": value, "matching": matching.as_dict()}),
              default_name + ".json")


@main.command("wasserstein")
@click.argument("diagram_a", type=click.Path(exists=True))
@click.argument("diagram_b", type=click.Path(exists=True))
@click.option("--p", default="inf", show_default=True, help="Ground metric exponent (or 'inf').")
@click.option("--q", default="1", show_default=True, help="Outer exponent (or 'inf').")
@weighting_option
@click.option("--skip-essential", is_flag=True, help="Ignore ceiling-capped points.")
@click.pass_context
@_wrap_validation
def wasserstein_cmd(ctx, diagram_a, diagram_b, p, q, weighting, skip_essential):
    """W_{p,q} distance between two diagram CSV files."""
    P = io.load_diagram_csv(diagram_a)
    Q = io.load_diagram_csv(diagram_b)
    p_val, q_val = _parse_exponent(p), _parse_exponent(q)
    include = not skip_essential
    if weighting == "uniform":
        value, matching = wasserstein(P, Q, p_val, q_val, include_essential=include)
    else:
        from .wasserstein import weighted_wasserstein

        value, matching = weighted_wasserstein(
            P, Q, p_val, q_val, Weighting.named(weighting), include_essential=include
        )
    _distance_payload(ctx, value, matching, "wasserstein")


@main.command("bottleneck")
@click.argument("diagram_a", type=click.Path(exists=True))
@click.argument("diagram_b", type=click.Path(exists=True))
@click.option("--skip-essential", is_flag=True)
@click.pass_context
@_wrap_validation
def bottleneck_cmd(ctx, diagram_a, diagram_b, skip_essential):
    """Bottleneck distance between two diagram CSV files."""
    P = io.load_diagram_csv(diagram_a)
    Q = io.load_diagram_csv(diagram_b)
    value, matching = bottleneck(P, Q, include_essential=not skip_essential)
    _distance_payload(ctx, value, matching, "bottleneck")


@main.command("vineyard")
@click.argument("values_f", type=click.Path(exists=True))
@click.argument("values_g", type=click.Path(exists=True))
@click.argument("complex_path", type=click.Path(exists=True))
@click.option("--dim", type=int, default=0, show_default=True)
@weighting_option
@click.option("--steps", type=int, default=8, show_default=True, help="Initial grid intervals.")
@click.option("--delta", type=float, default=None, help="Refinement threshold (bottleneck).")
@click.option("--max-depth", type=int, default=12, show_default=True)
@click.option("--mode", type=click.Choice(["simplex", "vertex"]), default="simplex",
              show_default=True)
@click.option("--no-plot", is_flag=True)
@click.pass_context
@_wrap_validation
def vineyard_cmd(ctx, values_f, values_g, complex_path, dim, weighting, steps, delta,
                 max_depth, mode, no_plot):
    """Vineyard of the straight-line homotopy between two vertex filtrations."""
    K = io.load_complex_json(complex_path)
    f = lower_star(io.load_vertex_values_csv(values_f), K)
    g = lower_star(io.load_vertex_values_csv(values_g), K)
    w = Weighting.named(weighting)
    h = straight_line_homotopy(f, g, K, mode=mode)
    V = build_vineyard(h, dim, w, n0=steps, delta=delta, max_depth=max_depth)
    if V.refinement_limit_reached:
        click.echo("warning: refinement depth limit reached; vineyard is best-effort", err=True)
    path = _emit(ctx, json.dumps(_vineyard_dict(V)), "vineyard.json")
    if path is not None and not no_plot:
        from .plots import save_vineyard_figure

        save_vineyard_figure(V, path.with_suffix(".png"))
    click.echo(f"distance: {vineyard_distance(V, w)!r}", err=True)


def _vineyard_dict(V):
    return {
        "dim": V.dim,
        "times": [float(t) for t in V.times],
        "vines": [
            {
                "class": v.kind,
                "essential": bool(v.essential),
                "points": [[float(a), float(b), float(c)] for a, b, c in v.points],
            }
            for v in V.vines
        ],
        "ambiguity_times": [float(t) for t in V.ambiguity_times],
        "refinement_limit_reached": bool(V.refinement_limit_reached),
    }


@main.command("vineyard-distance")
@click.argument("vineyard_json", type=click.Path(exists=True))
@weighting_option
@click.pass_context
@_wrap_validation
def vineyard_distance_cmd(ctx, vineyard_json, weighting):
    """Weighted length of a stored vineyard."""
    V = io.load_vineyard_json(vineyard_json)
    value = vineyard_distance(V, Weighting.named(weighting))
    if ctx.obj.get("fmt") == "csv":
        _emit(ctx, f"distance\n{value!r}\n", "vineyard-distance.csv")
    else:
        _emit(ctx, json.dumps({"distance": value}), "vineyard-distance.json")


@main.command("mvc")
@click.argument("diagram_a", type=click.Path(exists=True))
@click.argument("diagram_b", type=click.Path(exists=True))
@click.option("--skip-essential", is_flag=True)
@click.pass_context
@_wrap_validation
def mvc_cmd(ctx, diagram_a, diagram_b, skip_essential):
    """Minimum vine cost between two diagram CSV files (standard weighting)."""
    P = io.load_diagram_csv(diagram_a)
    Q = io.load_diagram_csv(diagram_b)
    value, matching = mvc(P, Q, include_essential=not skip_essential)
    _distance_payload(ctx, value, matching, "mvc")


@main.command("check-bounds")
@click.argument("values_f", type=click.Path(exists=True))
@click.argument("values_g", type=click.Path(exists=True))
@click.argument("complex_path", type=click.Path(exists=True))
@click.option("--dim", type=int, default=0, show_default=True)
@click.option("--tolerance", type=float, default=1e-6, show_default=True)
@click.pass_context
@_wrap_validation
def check_bounds_cmd(ctx, values_f, values_g, complex_path, dim, tolerance):
    """Evaluate the bound chain W <= V <= L1 and MVC <= weighted V."""
    K = io.load_complex_json(complex_path)
    f = lower_star(io.load_vertex_values_csv(values_f), K)
    g = lower_star(io.load_vertex_values_csv(values_g), K)
    report = check_bounds(f, g, K, dim, tolerance=tolerance)
    _emit(ctx, json.dumps(report.as_dict()), "bounds.json")


@main.group()
def experiment():
    """Built-in experiment harnesses."""


@experiment.command("gaussian")
@click.option("--grid-size", type=int, default=257, show_default=True)
@click.option("--shift-range", type=float, nargs=2, default=(0.25, 2.5), show_default=True)
@click.option("--variance-range", type=float, nargs=2, default=(1.5, 9.0), show_default=True)
@click.option("--n-values", type=int, default=8, show_default=True)
@click.option("--no-plot", is_flag=True)
@click.pass_context
@_wrap_validation
def experiment_gaussian(ctx, grid_size, shift_range, variance_range, n_values, no_plot):
    """Mean-shift vs variance sweeps of a negated Gaussian (CSV + figure)."""
    rows = gaussian_experiment(grid_size, tuple(shift_range), tuple(variance_range), n_values)
    out = _out_dir(ctx)
    lines = ["kind,param,l1,w1,vineyard"]
    for r in rows:
        lines.append(f"{r['kind']},{r['param']!r},{r['l1']!r},{r['w1']!r},{r['vineyard']!r}")
    (out / "gaussian.csv").write_text("\n".join(lines) + "\n")
    if not no_plot:
        from .plots import save_gaussian_figure

        save_gaussian_figure(rows, out / "gaussian.png")
    click.echo(json.dumps({"rows": len(rows), "output": str(out / 'gaussian.csv')}))


@experiment.command("digits")
@click.option("--n-per-class", type=int, default=30, show_default=True)
@click.option("--image-size", type=int, default=16, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--delta", type=float, default=0.05, show_default=True)
@click.option("--no-plot", is_flag=True)
@click.pass_context
@_wrap_validation
def experiment_digits(ctx, n_per_class, image_size, workers, delta, no_plot):
    """Synthetic 6/9/7 benchmark: distance matrices, MDS CSVs, accuracies."""
    result = digits_experiment(
        n_per_class=n_per_class,
        image_size=image_size,
        seed=ctx.obj.get("seed", 0),
        delta=delta,
        workers=workers,
    )
    out = _out_dir(ctx)
    for name, M in result.matrices.items():
        io.save_matrix_csv(result.labels, M, out / f"dist_{name}.csv")
        coords = result.embeddings[name]
        lines = ["label,x,y"]
        for lab, (x, y) in zip(result.labels, coords):
            lines.append(f"{lab},{x!r},{y!r}")
        (out / f"mds_{name}.csv").write_text("\n".join(lines) + "\n")
    if not no_plot:
        from .plots import save_digits_figure

        save_digits_figure(result, out / "digits.png")
    click.echo(
        json.dumps(
            {
                "accuracy": result.accuracy,
                "w1_six_nine_accuracy": result.w1_six_nine_accuracy,
                "stress": result.stress,
                "output": str(out),
            }
        )
    )


@main.group()
def geo():
    """Dual-graph dataset comparisons."""


@geo.command("compare")
@click.argument("dataset", type=click.Path(exists=True))
@click.option("--col-f", required=True)
@click.option("--col-g", required=True)
@click.option("--one-minus", is_flag=True, help="Compare 1 - column instead of the raw column.")
@click.option("--weighting", type=click.Choice(["uniform", "standard"]), default="standard",
              show_default=True)
@click.pass_context
@_wrap_validation
def geo_compare_cmd(ctx, dataset, col_f, col_g, one_minus, weighting):
    """L1 / W1 / vineyard distance triple between two dataset columns."""
    ds = load_dataset_json(dataset)
    triple = geo_compare(ds, col_f, col_g, one_minus=one_minus,
                         weighting=Weighting.named(weighting))
    if ctx.obj.get("fmt") == "csv":
        _emit(ctx, f"l1,w1,vineyard\n{triple.l1!r},{triple.w1!r},{triple.vineyard!r}\n",
              "geo-compare.csv")
    else:
        _emit(ctx, json.dumps(triple.as_dict()), "geo-compare.json")


@main.group()
def seq():
    """Stored diagram sequences."""


@seq.command("summary")
@click.argument("diagram_files", nargs=-1, required=True, type=click.Path(exists=True))
@weighting_option
@click.option("--no-plot", is_flag=True)
@click.pass_context
@_wrap_validation
def seq_summary(ctx, diagram_files, weighting, no_plot):
    """Vineyard distance through a sequence of diagram CSV files."""
    diagrams = [io.load_diagram_csv(p) for p in diagram_files]
    w = Weighting.named(weighting)
    value, V = diagram_sequence_summary(diagrams, w)
    out = ctx.obj.get("output")
    if out is not None:
        out = _out_dir(ctx)
        (out / "vineyard.json").write_text(json.dumps(_vineyard_dict(V)) + "\n")
        if not no_plot:
            from .plots import save_vineyard_figure

            save_vineyard_figure(V, out / "vineyard.png")
    click.echo(json.dumps({"distance": value, "vines": len(V.vines),
                           "ambiguity_times": list(V.ambiguity_times)}))


@main.command("matrix")
@click.argument("value_files", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--complex", "complex_path", required=True, type=click.Path(exists=True))
@click.option("--distance", "metric", type=click.Choice(["l1", "w1", "vineyard"]),
              default="l1", show_default=True)
@click.option("--dim", type=int, default=0, show_default=True)
@weighting_option
@click.pass_context
@_wrap_validation
def matrix_cmd(ctx, value_files, complex_path, metric, dim, weighting):
    """Pairwise distance matrix over vertex-value CSV files sharing a complex."""
    K = io.load_complex_json(complex_path)
    names = [Path(p).stem for p in value_files]
    vals = []
    for p in value_files:
        mapping = io.load_vertex_values_csv(p)
        vals.append(lower_star(mapping, K).vertex_values)
    M = distance_matrix(vals, K, metric=metric, dim=dim, weighting=Weighting.named(weighting))
    if ctx.obj.get("fmt") == "json":
        _emit(ctx, json.dumps({"names": names, "matrix": M.tolist()}), "matrix.json")
    else:
        _emit(ctx, io.matrix_csv_text(names, M), "matrix.csv")


if __name__ == "__main__":
    main()
