"""Artifact writers and readers: CSV traces and records, PGM snapshots."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..grid import Grid
from ..inversion import IterationRecord

RECORD_FIELDS = ("index", "residual_sq", "bv_value", "penalty", "functional", "component_count")


def _fmt(x: float) -> str:
    return repr(float(x))


def write_records(path: Path, records: list[IterationRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_FIELDS)
        for r in records:
            w.writerow(
                [r.index, _fmt(r.residual_sq), _fmt(r.bv_value), _fmt(r.penalty), _fmt(r.functional), r.component_count]
            )


def read_records(path: Path) -> list[IterationRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        IterationRecord(
            int(r["index"]),
            float(r["residual_sq"]),
            float(r["bv_value"]),
            float(r["penalty"]),
            float(r["functional"]),
            int(r["component_count"]),
        )
        for r in rows
    ]


def write_trace(path: Path, grid: Grid, trace: np.ndarray) -> None:
    """Boundary trace in traversal order with node coordinates."""
    i, j = grid.boundary_nodes
    x = grid.coords
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("index", "x", "y", "value"))
        for k, (a, b) in enumerate(zip(i, j)):
            w.writerow((k, _fmt(x[a]), _fmt(x[b]), _fmt(trace[k])))


def read_trace(path: Path, grid: Grid | None = None) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    values = np.array([float(r["value"]) for r in rows])
    if grid is not None and values.size != grid.num_boundary:
        raise ValueError(f"{path}: {values.size} values, grid has {grid.num_boundary} boundary nodes")
    return values


def to_pixels(z: np.ndarray) -> np.ndarray:
    """8-bit image of a material field; top row is y = 1."""
    img = np.rint(np.clip(z, 0.0, 1.0) * 255.0).astype(np.uint8)
    return np.ascontiguousarray(img.T[::-1, :])


def write_pgm(path: Path, z: np.ndarray) -> None:
    img = to_pixels(z)
    height, width = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_pgm(path: Path) -> np.ndarray:
    """Pixels of a binary PGM written by :func:`write_pgm` (rows top to bottom)."""
    raw = Path(path).read_bytes()
    magic, dims, maxval, data = raw.split(b"\n", 3)
    if magic != b"P5":
        raise ValueError(f"{path} is not a binary PGM")
    width, height = (int(t) for t in dims.split())
    if int(maxval) != 255:
        raise ValueError(f"{path}: unsupported maxval {int(maxval)}")
    pixels = np.frombuffer(data, dtype=np.uint8)
    if pixels.size != width * height:
        raise ValueError(f"{path}: expected {width * height} pixels, found {pixels.size}")
    return pixels.reshape(height, width)
