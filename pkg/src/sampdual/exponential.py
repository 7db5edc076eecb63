"""Exponential systems ``{exp(i lam t)}`` over a spectrum.

Inner products use the normalized measure ``dt / 2 pi``::

    <u_lam, u_mu> = (1/2pi) int_S exp(i (lam - mu) t) dt

so that the integers over ``[-pi, pi]`` give the identity Gram matrix and
frame bounds coincide with the sampling constants of ``PW_S`` under the
plain ``L^2`` norm.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .quadrature import Grid, restriction_matrix, restriction_rows
from .sets import UDSet
from .spectra import Spectrum

__all__ = [
    "GramMatrix",
    "BoundsEstimate",
    "TestFunction",
    "SpectralError",
    "fourier_integral",
    "gram_matrix",
    "cross_gram",
    "riesz_bound_estimates",
    "bessel_bound_estimate",
    "frame_bounds_grid",
    "frame_bounds_exact",
    "frame_lower_probe",
    "zero_threshold",
]

SMALL_OMEGA = 1e-4
EDGE_FRACTION = 0.1


class SpectralError(ValueError):
    pass


def _sinc_series(x: np.ndarray) -> np.ndarray:
    x2 = x * x
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0


def fourier_integral(spectrum: Spectrum, omega):
    """``int_S exp(i omega t) dt``, vectorized over ``omega``.

    For ``|omega| * max|endpoint| >= 1e-4`` each interval contributes
    ``(exp(i omega b) - exp(i omega a)) / (i omega)``, evaluated through the
    cancellation-free product ``2 exp(i omega m) sin(omega h) / omega``
    (``m`` midpoint, ``h`` half-length).  Below the threshold the sine ratio
    is replaced by its Taylor polynomial.
    """
    w = np.asarray(omega, dtype=float)
    out = np.zeros(w.shape, dtype=complex)
    if spectrum.is_empty:
        return out if w.ndim else complex(0.0)
    reach = max(abs(spectrum.intervals[0][0]), abs(spectrum.intervals[-1][1]))
    small = np.abs(w) * reach < SMALL_OMEGA
    safe_w = np.where(small, 1.0, w)
    for a, b in spectrum.intervals:
        m, h = (a + b) / 2, (b - a) / 2
        phase = np.exp(1j * w * m)
        ratio = np.where(small, _sinc_series(w * h), np.sin(safe_w * h) / (safe_w * h))
        out += 2 * h * phase * ratio
    return out if w.ndim else complex(out)


def zero_threshold(eigenvalues: np.ndarray) -> float:
    """Spectral-rank cutoff ``n * eps * lambda_max``."""
    if eigenvalues.size == 0:
        return 0.0
    return eigenvalues.size * np.finfo(float).eps * float(np.max(np.abs(eigenvalues)))


def _points(obj) -> tuple[np.ndarray, tuple[float, float] | None]:
    if isinstance(obj, UDSet):
        return obj.as_array(), obj.window
    pts = np.sort(np.asarray(obj, dtype=float).reshape(-1))
    win = (float(pts[0]), float(pts[-1])) if pts.size else None
    return pts, win


@dataclass(frozen=True)
class GramMatrix:
    points: np.ndarray
    spectrum: Spectrum
    entries: np.ndarray

    def eigenvalues(self) -> np.ndarray:
        return _eigvalsh(self.entries)

    def to_csv(self) -> str:
        """Rows of interleaved ``re, im`` pairs."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        n = self.entries.shape[1]
        writer.writerow([f"{p}_{k}" for k in range(n) for p in ("re", "im")])
        for row in self.entries:
            writer.writerow([f"{v:.17g}" for z in row for v in (z.real, z.imag)])
        return buf.getvalue()


def cross_gram(rows, cols, spectrum: Spectrum) -> np.ndarray:
    """``C[j, k] = <u_{cols[k]}, u_{rows[j]}>``."""
    r = np.asarray(rows, dtype=float).reshape(-1)
    c = np.asarray(cols, dtype=float).reshape(-1)
    return fourier_integral(spectrum, c[None, :] - r[:, None]) / (2 * math.pi)


def gram_matrix(points, spectrum: Spectrum) -> GramMatrix:
    pts, _ = _points(points)
    if pts.size > 1 and np.any(np.diff(pts) <= 0):
        raise SpectralError("duplicate points in the exponential system")
    n = pts.size
    iu = np.triu_indices(n, 1)
    entries = np.zeros((n, n), dtype=complex)
    entries[iu] = fourier_integral(spectrum, pts[iu[1]] - pts[iu[0]]) / (2 * math.pi)
    entries = entries + entries.conj().T
    entries[np.diag_indices(n)] = spectrum.measure / (2 * math.pi)
    return GramMatrix(pts, spectrum, entries)


def _eigvalsh(matrix: np.ndarray) -> np.ndarray:
    if matrix.size == 0:
        return np.zeros(0)
    try:
        return np.linalg.eigvalsh(matrix)
    except np.linalg.LinAlgError as exc:
        finite = np.all(np.isfinite(matrix))
        cond = np.linalg.cond(matrix) if finite else float("nan")
        raise SpectralError(
            f"eigensolver failed on a {matrix.shape[0]}x{matrix.shape[1]} matrix "
            f"(finite={finite}, cond={cond:.3e}): {exc}"
        ) from exc


@dataclass(frozen=True)
class BoundsEstimate:
    lower: float
    upper: float
    kind: str
    window: tuple[float, float] | None = None
    grid: dict | None = None
    edge_mass: float | None = None
    edge_caveat: bool = False
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in ("riesz", "frame", "bessel"):
            raise SpectralError(f"unknown bounds kind {self.kind!r}")
        if not 0 <= self.lower <= self.upper:
            raise SpectralError(f"inconsistent bounds lower={self.lower} upper={self.upper}")

    def to_dict(self) -> dict:
        out = {
            "lower": self.lower,
            "upper": self.upper,
            "kind": self.kind,
            "window": None if self.window is None else list(self.window),
            "grid": self.grid,
        }
        if self.kind == "frame":
            out["edge_mass"] = self.edge_mass
            out["edge_caveat"] = self.edge_caveat
        return out


def _clip_extremes(ev: np.ndarray) -> tuple[float, float]:
    if ev.size == 0:
        return 0.0, 0.0
    lo, hi = float(ev[0]), float(ev[-1])
    if lo < zero_threshold(ev):
        lo = 0.0
    return lo, max(hi, lo)


def riesz_bound_estimates(points, spectrum: Spectrum) -> BoundsEstimate:
    """Extreme Gram eigenvalues: truncation estimates of ``c^2`` and ``C^2``.

    Enlarging the window can only lower the first and raise the second
    (Cauchy interlacing).
    """
    gram = gram_matrix(points, spectrum)
    lo, hi = _clip_extremes(gram.eigenvalues())
    return BoundsEstimate(lo, hi, "riesz", _points(points)[1])


def bessel_bound_estimate(points, spectrum: Spectrum) -> BoundsEstimate:
    """Largest Gram eigenvalue, the windowed estimate of the Bessel constant."""
    ev = gram_matrix(points, spectrum).eigenvalues()
    return BoundsEstimate(0.0, float(ev[-1]) if ev.size else 0.0, "bessel", _points(points)[1])


def probe_centers(window: tuple[float, float], spectrum: Spectrum, oversample: float = 1.0) -> np.ndarray:
    """Kernel centers spanning the interior test space.

    A lattice of spacing ``2 pi / (hull length)`` (Nyquist for the spectral
    hull) over the central ``1 - 2*EDGE_FRACTION`` of the window.
    """
    lo, hi = window
    c, r = (lo + hi) / 2, (hi - lo) / 2 * (1 - 2 * EDGE_FRACTION)
    a, b = spectrum.hull
    step = 2 * math.pi / (b - a) / oversample
    k = np.arange(math.ceil((c - r) / step - 1e-9), math.floor((c + r) / step + 1e-9) + 1)
    return k * step


def _orthonormal_range(cols: np.ndarray) -> np.ndarray:
    if cols.size == 0:
        return cols
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    keep = s > max(cols.shape) * np.finfo(float).eps * s[0] * 1e3
    return u[:, keep]


def _edge_mass(coeffs: np.ndarray, grid: Grid, window: tuple[float, float]) -> float:
    """Share of the time-domain energy within the window that sits in its edge strips."""
    lo, hi = window
    span = hi - lo
    x = np.linspace(lo, hi, 2001)
    f = restriction_rows(x, grid) @ coeffs
    energy = np.abs(f) ** 2
    edge = (x < lo + EDGE_FRACTION * span) | (x > hi - EDGE_FRACTION * span)
    total = float(np.sum(energy))
    return float(np.sum(energy[edge]) / total) if total > 0 else 0.0


def frame_bounds_grid(
    points,
    spectrum: Spectrum,
    resolution: float,
    oversample: float = 1.0,
    window: tuple[float, float] | None = None,
) -> BoundsEstimate:
    """Frame bounds of a finite exponential system from a discretized frame operator.

    ``L^2(S)`` is replaced by grid coefficients (see ``quadrature``); the
    frame operator is ``R^* R`` with ``R`` the restriction matrix.  A finite
    system can never be a frame for the whole grid space, so the extreme
    eigenvalues are taken on the test space spanned by reproducing kernels
    centred in the interior of the window.  The lower value is biased low by
    window-edge leakage; ``edge_mass`` reports how much of the minimizing
    function's energy lies in the outer strips, and ``edge_caveat`` is set
    when that share exceeds ``EDGE_FRACTION``.  ``window`` overrides the
    observation window (useful to compare perturbed copies of one set).
    """
    pts, own_window = _points(points)
    window = own_window if window is None else (float(window[0]), float(window[1]))
    if pts.size == 0:
        return BoundsEstimate(0.0, 0.0, "frame", window, {"resolution": resolution, "nodes": 0})
    rmat = restriction_matrix(pts, spectrum, resolution)
    centers = probe_centers(window, spectrum, oversample)
    basis = _orthonormal_range(restriction_rows(centers, rmat.grid).conj().T)
    if basis.shape[1] == 0:
        raise SpectralError("window too short to hold an interior test space")
    # frame operator R^*R on the test space = squared singular values of R @ basis
    _, sv, vh = np.linalg.svd(rmat.matrix @ basis, full_matrices=True)
    ev = np.zeros(basis.shape[1])
    ev[: sv.size] = sv**2
    ev = np.sort(ev)
    lo, hi = _clip_extremes(ev)
    edge = _edge_mass(basis @ vh[-1].conj(), rmat.grid, window)
    desc = rmat.grid.describe() | {"test_space_dim": int(basis.shape[1])}
    return BoundsEstimate(lo, hi, "frame", window, desc, edge, edge > EDGE_FRACTION)


def frame_bounds_exact(
    points, spectrum: Spectrum, oversample: float = 1.0, window: tuple[float, float] | None = None
) -> BoundsEstimate:
    """Grid-free counterpart of ``frame_bounds_grid`` built from closed-form Gram entries."""
    pts, own_window = _points(points)
    window = own_window if window is None else (float(window[0]), float(window[1]))
    if pts.size == 0:
        return BoundsEstimate(0.0, 0.0, "frame", window)
    centers = probe_centers(window, spectrum, oversample)
    kern = gram_matrix(centers, spectrum).entries
    s, v = np.linalg.eigh(kern)
    keep = s > kern.shape[0] * np.finfo(float).eps * s[-1] * 1e3
    whiten = v[:, keep] / np.sqrt(s[keep])[None, :]
    cross = cross_gram(pts, centers, spectrum) @ whiten
    sv = np.linalg.svd(cross, compute_uv=False)
    ev = np.sort(sv**2)
    if ev.size < whiten.shape[1]:
        ev = np.concatenate((np.zeros(whiten.shape[1] - ev.size), ev))
    lo, hi = _clip_extremes(ev)
    return BoundsEstimate(lo, hi, "frame", window)


# test functions


def _segment_integrals(s: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """``int_0^h exp(s u) du`` and ``int_0^h u exp(s u) du`` for complex ``s``."""
    z = s * h
    small = np.abs(z) < 0.5
    e0 = np.empty(z.shape, dtype=complex)
    e1 = np.empty(z.shape, dtype=complex)
    if np.any(small):
        zs = z[small]
        term = np.ones_like(zs)
        acc0 = np.zeros_like(zs)
        acc1 = np.zeros_like(zs)
        for k in range(25):
            acc0 += term / (k + 1)
            acc1 += term / (k + 2)
            term = term * zs / (k + 1)
        e0[small] = h * acc0
        e1[small] = h * h * acc1
    big = ~small
    if np.any(big):
        zb = z[big]
        ez = np.exp(zb)
        e0[big] = h * (ez - 1) / zb
        e1[big] = h * h * (ez / zb - (ez - 1) / zb**2)
    return e0, e1


@dataclass(frozen=True)
class TestFunction:
    """Piecewise-linear spectral profile ``F`` on each interval of a spectrum.

    ``knots[j]`` are breakpoints covering interval ``j`` (first and last at
    its endpoints) and ``values[j]`` the complex values of ``F`` there.
    """

    spectrum: Spectrum
    knots: tuple[np.ndarray, ...]
    values: tuple[np.ndarray, ...]

    __test__ = False  # not a pytest class

    def __post_init__(self) -> None:
        if len(self.knots) != len(self.spectrum) or len(self.values) != len(self.spectrum):
            raise SpectralError("need one knot/value array per spectral interval")
        for (a, b), t, v in zip(self.spectrum.intervals, self.knots, self.values):
            if t.size < 2 or t.size != v.size:
                raise SpectralError("each interval needs >= 2 knots with matching values")
            if not (math.isclose(t[0], a, abs_tol=1e-14) and math.isclose(t[-1], b, abs_tol=1e-14)):
                raise SpectralError(f"knots must span [{a}, {b}]")
            if np.any(np.diff(t) <= 0):
                raise SpectralError("knots must be strictly increasing")

    @classmethod
    def from_values(cls, spectrum: Spectrum, knots: Sequence[Sequence[float]], values: Sequence[Sequence[complex]]) -> "TestFunction":
        return cls(
            spectrum,
            tuple(np.asarray(t, dtype=float) for t in knots),
            tuple(np.asarray(v, dtype=complex) for v in values),
        )

    @classmethod
    def constant(cls, spectrum: Spectrum, value: complex = 1.0) -> "TestFunction":
        knots = [np.array([a, b]) for a, b in spectrum.intervals]
        return cls.from_values(spectrum, knots, [np.full(2, value) for _ in knots])

    @classmethod
    def random(cls, spectrum: Spectrum, pieces: int, rng: np.random.Generator) -> "TestFunction":
        knots, values = [], []
        for a, b in spectrum.intervals:
            knots.append(np.linspace(a, b, pieces + 1))
            values.append(rng.standard_normal(pieces + 1) + 1j * rng.standard_normal(pieces + 1))
        return cls.from_values(spectrum, knots, values)

    @property
    def breakpoints(self) -> np.ndarray:
        return np.concatenate(self.knots)

    def norm_sq(self) -> float:
        """Exact ``||f||_2^2 = int_S |F|^2 dt``."""
        total = 0.0
        for t, v in zip(self.knots, self.values):
            h = np.diff(t)
            p, q = v[:-1], v[1:]
            total += float(np.sum(h * (np.abs(p) ** 2 + np.real(p * np.conj(q)) + np.abs(q) ** 2) / 3))
        return total

    def spectral_values(self, t) -> np.ndarray:
        """``F(t)``; zero off the spectrum."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for (a, b), kn, v in zip(self.spectrum.intervals, self.knots, self.values):
            inside = (t >= a) & (t <= b)
            out[inside] = np.interp(t[inside], kn, v.real) + 1j * np.interp(t[inside], kn, v.imag)
        return out

    def __call__(self, x):
        """``f(x) = (2 pi)^-1/2 int_S exp(-i x t) F(t) dt`` in closed form."""
        x = np.asarray(x, dtype=float)
        s = -1j * x
        acc = np.zeros(x.shape, dtype=complex)
        for kn, v in zip(self.knots, self.values):
            for t0, t1, p, q in zip(kn[:-1], kn[1:], v[:-1], v[1:]):
                h = t1 - t0
                e0, e1 = _segment_integrals(s, h)
                acc += np.exp(s * t0) * (p * e0 + (q - p) / h * e1)
        return acc / math.sqrt(2 * math.pi)


def frame_lower_probe(points, spectrum: Spectrum, probes: Sequence[TestFunction]) -> float:
    """``min_f sum_lam |f(lam)|^2 / ||f||^2`` over the probes.

    Every probe ratio is an upper bound on the best lower frame constant,
    so a small value certifies that the set fails to sample.
    """
    pts, _ = _points(points)
    if not probes:
        raise SpectralError("need at least one probe")
    best = math.inf
    for probe in probes:
        nsq = probe.norm_sq()
        if nsq <= 0:
            raise SpectralError("probe has zero norm")
        best = min(best, float(np.sum(np.abs(probe(pts)) ** 2)) / nsq)
    return best
