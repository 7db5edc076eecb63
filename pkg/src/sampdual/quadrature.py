"""Discretization of L^2(S) and the restriction operator on it.

A function ``F`` on the spectrum is represented by the coefficient vector
``y_i = sqrt(w_i) * F(t_i)`` on composite Gauss-Legendre nodes ``t_i`` with
weights ``w_i``, so that ``||f||_2^2 = ||F||^2 ~ sum |y_i|^2``.  In these
coordinates the sample ``f(lam) = (2 pi)^-1/2 int_S exp(-i lam t) F(t) dt``
is the row ``sqrt(w_i / 2 pi) * exp(-i lam t_i)`` applied to ``y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .spectra import Spectrum

__all__ = ["Grid", "RestrictionMatrix", "GridError", "make_grid", "min_resolution", "restriction_matrix"]

PANEL_ORDER = 20


class GridError(ValueError):
    pass


@lru_cache(maxsize=None)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


@dataclass(frozen=True)
class Grid:
    nodes: np.ndarray
    weights: np.ndarray
    resolution: float

    def __len__(self) -> int:
        return self.nodes.size

    def describe(self) -> dict:
        return {"resolution": self.resolution, "nodes": int(self.nodes.size), "rule": f"gauss-legendre/{PANEL_ORDER}"}


def min_resolution(points: np.ndarray) -> float:
    """Smallest admissible nodes-per-unit-measure for these points."""
    if points.size == 0:
        return 0.0
    return 4.0 * float(np.max(np.abs(points))) / (2 * math.pi)


def make_grid(spectrum: Spectrum, resolution: float, breakpoints: Sequence[float] = ()) -> Grid:
    """Composite Gauss-Legendre rule with about ``resolution`` nodes per unit length.

    Weights are positive, which keeps every discretized frame operator
    Hermitian positive semidefinite.  Panel edges include ``breakpoints``
    inside the spectrum, so piecewise-smooth integrands with kinks there
    keep spectral accuracy.
    """
    if resolution <= 0:
        raise GridError("grid resolution must be positive")
    xg, wg = _legendre(PANEL_ORDER)
    cuts = np.unique(np.asarray(breakpoints, dtype=float))
    nodes, weights = [], []
    for a, b in spectrum.intervals:
        inner = cuts[(cuts > a) & (cuts < b)]
        stops = np.concatenate(([a], inner, [b]))
        for lo, hi in zip(stops[:-1], stops[1:]):
            panels = max(1, math.ceil(resolution * (hi - lo) / PANEL_ORDER))
            edges = np.linspace(lo, hi, panels + 1)
            half = np.diff(edges) / 2
            mid = (edges[:-1] + edges[1:]) / 2
            nodes.append((mid[:, None] + half[:, None] * xg[None, :]).ravel())
            weights.append((half[:, None] * wg[None, :]).ravel())
    if not nodes:
        return Grid(np.zeros(0), np.zeros(0), float(resolution))
    return Grid(np.concatenate(nodes), np.concatenate(weights), float(resolution))


@dataclass(frozen=True)
class RestrictionMatrix:
    """Rows indexed by sample points, columns by grid coefficients."""

    points: np.ndarray
    spectrum: Spectrum
    grid: Grid
    matrix: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def coefficients(self, test_function) -> np.ndarray:
        """Grid coefficient vector ``sqrt(w) * F(t)`` of a test function."""
        return np.sqrt(self.grid.weights) * test_function.spectral_values(self.grid.nodes)

    def apply(self, test_function) -> np.ndarray:
        return self.matrix @ self.coefficients(test_function)

    def norm(self) -> float:
        if self.matrix.size == 0:
            return 0.0
        return float(np.linalg.norm(self.matrix, 2))

    def singular_values(self) -> np.ndarray:
        if self.matrix.size == 0:
            return np.zeros(0)
        return np.linalg.svd(self.matrix, compute_uv=False)


def restriction_rows(points: np.ndarray, grid: Grid) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1)
    scale = np.sqrt(grid.weights / (2 * math.pi))
    return np.exp(-1j * np.outer(pts, grid.nodes)) * scale[None, :]


def restriction_matrix(
    points, spectrum: Spectrum, resolution: float, breakpoints: Sequence[float] = (), check: bool = True
) -> RestrictionMatrix:
    """Matrix of ``f -> (f(lam))_lam`` acting on grid coefficients."""
    pts = np.asarray(points, dtype=float).reshape(-1)
    if check and resolution < min_resolution(pts):
        raise GridError(
            f"grid too coarse: {resolution} nodes per unit < {min_resolution(pts):.6g} "
            f"needed for max|lambda| = {np.max(np.abs(pts)):.6g}"
        )
    grid = make_grid(spectrum, resolution, breakpoints)
    return RestrictionMatrix(pts, spectrum, grid, restriction_rows(pts, grid))
