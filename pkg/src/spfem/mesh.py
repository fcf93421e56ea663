"""Uniform structured quadrilateral meshes on axis-aligned rectangles.

Vertices are numbered row-major with x running fastest, so vertex (i, j)
sits at index j*(ncx+1) + i. Elements follow the same layout. Meshes are
immutable; refinement returns a new mesh whose vertex set contains the
parent's (needed for nested two-level error norms).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class RectDomain:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ConfigurationError(
                f"degenerate domain [{self.xmin},{self.xmax}]x[{self.ymin},{self.ymax}]"
            )

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def area(self) -> float:
        return self.width * self.height

    @classmethod
    def square(cls, half_width: float) -> "RectDomain":
        """Centered square [-a, a]^2."""
        a = float(half_width)
        return cls(-a, a, -a, a)

    @classmethod
    def unit(cls) -> "RectDomain":
        return cls(0.0, 1.0, 0.0, 1.0)


@dataclass(frozen=True)
class StructuredQuadMesh:
    domain: RectDomain
    ncx: int
    ncy: int

    @property
    def hx(self) -> float:
        return self.domain.width / self.ncx

    @property
    def hy(self) -> float:
        return self.domain.height / self.ncy

    @property
    def h(self) -> float:
        return max(self.hx, self.hy)

    @property
    def n_elements(self) -> int:
        return self.ncx * self.ncy

    @property
    def n_vertices(self) -> int:
        return (self.ncx + 1) * (self.ncy + 1)

    @cached_property
    def vertex_coords(self) -> np.ndarray:
        """(n_vertices, 2) array, row-major with x fastest."""
        x = self.domain.xmin + self.hx * np.arange(self.ncx + 1)
        y = self.domain.ymin + self.hy * np.arange(self.ncy + 1)
        # endpoints exactly representable regardless of rounding in hx
        x[-1] = self.domain.xmax
        y[-1] = self.domain.ymax
        X, Y = np.meshgrid(x, y, indexing="xy")
        return np.column_stack([X.ravel(), Y.ravel()])

    @cached_property
    def element_vertices(self) -> np.ndarray:
        """(n_elements, 4) vertex indices per element, counterclockwise from the
        lower-left corner."""
        nvx = self.ncx + 1
        ex = np.arange(self.ncx)
        ey = np.arange(self.ncy)
        EX, EY = np.meshgrid(ex, ey, indexing="xy")
        v00 = (EY * nvx + EX).ravel()
        return np.column_stack([v00, v00 + 1, v00 + 1 + nvx, v00 + nvx])

    def element_origin(self, e: int) -> tuple[float, float]:
        """Physical coordinates of element e's lower-left corner."""
        ex = e % self.ncx
        ey = e // self.ncx
        return (self.domain.xmin + ex * self.hx, self.domain.ymin + ey * self.hy)


def build_mesh(domain: RectDomain, ncx: int, ncy: int) -> StructuredQuadMesh:
    if ncx < 1 or ncy < 1:
        raise ConfigurationError(f"cell counts must be positive, got ncx={ncx}, ncy={ncy}")
    return StructuredQuadMesh(domain, int(ncx), int(ncy))


def boundary_vertices(mesh: StructuredQuadMesh) -> np.ndarray:
    """Sorted indices of vertices on the domain boundary; count is 2(ncx+ncy)."""
    nvx, nvy = mesh.ncx + 1, mesh.ncy + 1
    i = np.arange(nvx * nvy)
    ix = i % nvx
    iy = i // nvx
    on_edge = (ix == 0) | (ix == nvx - 1) | (iy == 0) | (iy == nvy - 1)
    return i[on_edge]


def interior_vertices(mesh: StructuredQuadMesh) -> np.ndarray:
    b = np.zeros(mesh.n_vertices, dtype=bool)
    b[boundary_vertices(mesh)] = True
    return np.flatnonzero(~b)


def refine(mesh: StructuredQuadMesh) -> StructuredQuadMesh:
    """Halve both cell sizes. Parent vertices are a subset of child vertices."""
    return StructuredQuadMesh(mesh.domain, 2 * mesh.ncx, 2 * mesh.ncy)
