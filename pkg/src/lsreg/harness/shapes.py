"""Declarative regions: finite unions of axis-aligned rectangles and disks."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from itertools import combinations

import numpy as np

from ..grid import Grid

SUPERSAMPLE = 16


@dataclass(frozen=True)
class Rect:
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self) -> None:
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError(f"degenerate rectangle {self}")

    def contains(self, X, Y):
        return (X >= self.x0) & (X <= self.x1) & (Y >= self.y0) & (Y <= self.y1)

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)


@dataclass(frozen=True)
class Disk:
    cx: float
    cy: float
    r: float

    def __post_init__(self) -> None:
        if not self.r > 0:
            raise ValueError(f"disk radius must be positive, got {self.r}")

    def contains(self, X, Y):
        return (X - self.cx) ** 2 + (Y - self.cy) ** 2 <= self.r**2

    @property
    def area(self) -> float:
        return np.pi * self.r**2


def _rects_disjoint(a: Rect, b: Rect) -> bool:
    return a.x1 <= b.x0 or b.x1 <= a.x0 or a.y1 <= b.y0 or b.y1 <= a.y0


def _overlap_fraction(x: np.ndarray, h: float, lo: float, hi: float) -> np.ndarray:
    """Fraction of each node's dual interval (clipped to [0, 1]) inside [lo, hi]."""
    left = np.maximum(x - 0.5 * h, 0.0)
    right = np.minimum(x + 0.5 * h, 1.0)
    covered = np.clip(np.minimum(right, hi) - np.maximum(left, lo), 0.0, None)
    return covered / (right - left)


@dataclass(frozen=True)
class Region:
    parts: tuple[Rect | Disk, ...] = ()

    def contains(self, X, Y):
        mask = np.zeros(np.broadcast(X, Y).shape, dtype=bool)
        for p in self.parts:
            mask |= p.contains(X, Y)
        return mask

    def __call__(self, X, Y):
        return self.contains(X, Y)

    @property
    def is_empty(self) -> bool:
        return not self.parts

    def coverage(self, grid: Grid) -> np.ndarray:
        """Fraction of each node's dual cell covered by the region.

        This is the cell average of the sharp indicator. Disjoint rectangles
        are handled exactly; anything else is supersampled.
        """
        if self.is_empty:
            return np.zeros(grid.shape)
        rects = [p for p in self.parts if isinstance(p, Rect)]
        exact = len(rects) == len(self.parts) and all(
            _rects_disjoint(a, b) for a, b in combinations(rects, 2)
        )
        x = grid.coords
        h = grid.spacing
        if exact:
            z = np.zeros(grid.shape)
            for r in rects:
                z += np.outer(_overlap_fraction(x, h, r.x0, r.x1), _overlap_fraction(x, h, r.y0, r.y1))
            return np.minimum(z, 1.0)
        return self._supersampled(grid)

    def _supersampled(self, grid: Grid) -> np.ndarray:
        h = grid.spacing
        offsets = (np.arange(SUPERSAMPLE) + 0.5) / SUPERSAMPLE - 0.5
        x = grid.coords
        # sample points of each dual cell, clipped into the domain
        left = np.maximum(x - 0.5 * h, 0.0)
        right = np.minimum(x + 0.5 * h, 1.0)
        s = (offsets + 0.5)[None, :]
        pts = left[:, None] + s * (right - left)[:, None]
        X = pts[:, None, :, None]
        Y = pts[None, :, None, :]
        inside = self.contains(X, Y)
        return inside.mean(axis=(2, 3))

    def to_list(self) -> list[dict]:
        out = []
        for p in self.parts:
            d = {"kind": "rect" if isinstance(p, Rect) else "disk"}
            d.update(asdict(p))
            out.append(d)
        return out

    @classmethod
    def from_list(cls, items) -> "Region":
        parts = []
        for item in items or ():
            item = dict(item)
            kind = item.pop("kind")
            if kind == "rect":
                parts.append(Rect(**{k: float(v) for k, v in item.items()}))
            elif kind == "disk":
                parts.append(Disk(**{k: float(v) for k, v in item.items()}))
            else:
                raise ValueError(f"unknown shape kind {kind!r}")
        return cls(tuple(parts))


def union(*parts: Rect | Disk) -> Region:
    return Region(tuple(parts))
