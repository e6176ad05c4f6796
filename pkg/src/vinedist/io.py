"""File formats: complex JSON, vertex/diagram CSV, images (CSV or plain PGM),
vineyard JSON, and distance-matrix CSV."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .complexes import CellComplex, build_complex
from .errors import EmptyGridError, ValidationError
from .persistence import PersistenceDiagram
from .vineyard import Vine, Vineyard

__all__ = [
    "load_complex_json",
    "save_complex_json",
    "load_vertex_values_csv",
    "save_vertex_values_csv",
    "load_image",
    "load_diagram_csv",
    "save_diagram_csv",
    "diagram_csv_text",
    "load_vineyard_json",
    "save_vineyard_json",
    "save_matrix_csv",
    "matrix_csv_text",
]


def load_complex_json(path) -> CellComplex:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "cells" not in data:
        raise ValidationError(f"{path}: expected a JSON object with a 'cells' list")
    return build_complex(data["cells"])


def save_complex_json(K: CellComplex, path) -> None:
    data = {
        "cells": [
            {"id": c.id, "dim": c.dim, "boundary": list(c.boundary)} for c in K.cells
        ]
    }
    with open(path, "w") as fh:
        json.dump(data, fh)
        fh.write("\n")


def load_vertex_values_csv(path) -> dict[int, float]:
    """Rows of vertex_id,value; a header row is skipped if present."""
    out: dict[int, float] = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            try:
                vid = int(row[0])
            except ValueError:
                continue  # header
            if len(row) < 2:
                raise ValidationError(f"{path}: row for vertex {vid} has no value")
            out[vid] = float(row[1])
    if not out:
        raise ValidationError(f"{path}: no vertex values found")
    return out


def save_vertex_values_csv(values, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vertex_id", "value"])
        if isinstance(values, dict):
            for vid in sorted(values):
                writer.writerow([vid, repr(float(values[vid]))])
        else:
            for vid, v in enumerate(np.asarray(values, dtype=float)):
                writer.writerow([vid, repr(float(v))])


def _load_pgm(path) -> np.ndarray:
    """Plain (P2, ASCII) PGM; comments allowed anywhere a token may start."""
    tokens: list[str] = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0]
            tokens.extend(line.split())
    if not tokens or tokens[0] != "P2":
        raise ValidationError(f"{path}: only plain PGM (P2) is supported")
    if len(tokens) < 4:
        raise ValidationError(f"{path}: truncated PGM header")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    pixels = [float(t) for t in tokens[4:]]
    if len(pixels) != width * height:
        raise ValidationError(
            f"{path}: expected {width * height} pixels, found {len(pixels)}"
        )
    if maxval <= 0:
        raise ValidationError(f"{path}: maxval must be positive")
    return np.array(pixels).reshape(height, width)


def load_image(path) -> np.ndarray:
    """2-D grid of intensities, from a CSV grid or a plain PGM (by suffix)."""
    p = Path(path)
    if p.suffix.lower() == ".pgm":
        return _load_pgm(p)
    try:
        grid = np.loadtxt(p, delimiter=",", ndmin=2)
    except Exception as exc:
        raise ValidationError(f"{path}: could not parse image CSV ({exc})") from exc
    if grid.size == 0:
        raise EmptyGridError(f"{path}: image grid is empty")
    return grid


def diagram_csv_text(D: PersistenceDiagram) -> str:
    lines = ["dim,birth,death,essential"]
    for b, d, e in zip(D.births, D.deaths, D.essential):
        lines.append(f"{D.dim},{float(b)!r},{float(d)!r},{int(e)}")
    return "\n".join(lines) + "\n"


def save_diagram_csv(D: PersistenceDiagram, path) -> None:
    """Rows dim,birth,death,essential ordered by (birth, death)."""
    with open(path, "w", newline="") as fh:
        fh.write(diagram_csv_text(D))


def load_diagram_csv(path, dim: int | None = None) -> PersistenceDiagram:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            try:
                d = int(row[0])
            except ValueError:
                continue  # header
            if len(row) < 3:
                raise ValidationError(f"{path}: diagram row too short: {row}")
            essential = bool(int(row[3])) if len(row) > 3 else False
            rows.append((d, float(row[1]), float(row[2]), essential))
    dims = sorted({r[0] for r in rows})
    if dim is None:
        if len(dims) > 1:
            raise ValidationError(
                f"{path}: multiple dimensions {dims} present; pass dim explicitly"
            )
        dim = dims[0] if dims else 0
    rows = [r for r in rows if r[0] == dim]
    births = np.array([r[1] for r in rows])
    deaths = np.array([r[2] for r in rows])
    essential = np.array([r[3] for r in rows], dtype=bool)
    if np.any(essential):
        ceiling = float(deaths[essential].max())
    elif len(deaths):
        ceiling = float(deaths.max())
    else:
        ceiling = 0.0
    return PersistenceDiagram(dim, births, deaths, essential, ceiling)


def save_vineyard_json(V: Vineyard, path) -> None:
    data = {
        "dim": V.dim,
        "times": [float(t) for t in V.times],
        "vines": [
            {
                "class": v.kind,
                "essential": bool(v.essential),
                "points": [[float(t), float(x), float(y)] for t, x, y in v.points],
            }
            for v in V.vines
        ],
        "ambiguity_times": [float(t) for t in V.ambiguity_times],
        "refinement_limit_reached": bool(V.refinement_limit_reached),
    }
    with open(path, "w") as fh:
        json.dump(data, fh)
        fh.write("\n")


def load_vineyard_json(path) -> Vineyard:
    with open(path) as fh:
        data = json.load(fh)
    try:
        vines = tuple(
            Vine(np.array(v["points"], dtype=float), v["class"], bool(v.get("essential", False)))
            for v in data["vines"]
        )
        return Vineyard(
            dim=int(data["dim"]),
            times=np.array(data["times"], dtype=float),
            diagrams=(),
            vines=vines,
            ambiguity_times=tuple(float(t) for t in data.get("ambiguity_times", ())),
            refinement_limit_reached=bool(data.get("refinement_limit_reached", False)),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: malformed vineyard JSON ({exc})") from exc


def matrix_csv_text(names, matrix) -> str:
    M = np.asarray(matrix, dtype=float)
    lines = [",".join(["name"] + [str(n) for n in names])]
    for name, row in zip(names, M):
        lines.append(",".join([str(name)] + [repr(float(v)) for v in row]))
    return "\n".join(lines) + "\n"


def save_matrix_csv(names, matrix, path) -> None:
    """Symmetric distance matrix with a leading name column and header row."""
    with open(path, "w", newline="") as fh:
        fh.write(matrix_csv_text(names, matrix))
