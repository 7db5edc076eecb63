"""Perturbed restriction operators and the stability of sampling.

For a perturbation ``lam -> lam + eps_lam`` with ``|eps| <= delta`` the
difference of restriction operators obeys

    ||R' - R|| <= sigma * delta * sqrt(C1 + C2)

where ``S`` lies in ``[-sigma, sigma]`` and ``C1``, ``C2`` are Bessel
constants of the two separated sequences that carry the mean-value points.
Those points are not computable; the even- and odd-indexed midpoints
``lam + eps/2`` stand in for them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exponential import bessel_bound_estimate, cross_gram, frame_bounds_grid
from .quadrature import RestrictionMatrix, restriction_matrix
from .sets import Perturbation, SetError, UDSet, perturb, separation_constant
from .spectra import Spectrum

__all__ = [
    "RestrictionMatrix",
    "restriction_matrix",
    "PerturbationNormReport",
    "MarginRow",
    "MarginTable",
    "perturbation_norm_check",
    "perturbation_norm_exact",
    "split_bessel_constants",
    "stability_margin_experiment",
]

QUADRATURE_ALLOWANCE = 1e-6


@dataclass(frozen=True)
class PerturbationNormReport:
    measured_norm: float
    bound: float
    sigma: float
    delta: float
    bessel_even: float
    bessel_odd: float
    passes: bool

    def to_dict(self) -> dict:
        return {
            "measured_norm": self.measured_norm,
            "bound": self.bound,
            "sigma": self.sigma,
            "delta": self.delta,
            "bessel_even": self.bessel_even,
            "bessel_odd": self.bessel_odd,
            "passes": self.passes,
        }


def split_bessel_constants(points: np.ndarray, spectrum: Spectrum) -> tuple[float, float]:
    """Bessel estimates for the even- and odd-indexed halves of ``points``."""
    even, odd = points[0::2], points[1::2]
    c1 = bessel_bound_estimate(even, spectrum).upper if even.size else 0.0
    c2 = bessel_bound_estimate(odd, spectrum).upper if odd.size else 0.0
    return c1, c2


def _require_regime(lam: UDSet, delta: float) -> None:
    if len(lam.points) >= 2 and delta >= separation_constant(lam) / 4:
        raise SetError(f"perturbation too large: delta={delta} >= d/4 = {separation_constant(lam) / 4}")


def _perturbed_points(lam: UDSet, pert: Perturbation) -> np.ndarray:
    # row order follows lam, not the sorted perturbed set
    return lam.as_array() + pert.shift_array(lam.points)


def perturbation_norm_check(
    lam: UDSet, pert: Perturbation, spectrum: Spectrum, resolution: float
) -> PerturbationNormReport:
    """Measured ``||R' - R||`` on the grid against the Bessel-constant bound."""
    if lam.is_periodic:
        raise SetError("truncate the set to a window first")
    _require_regime(lam, pert.delta)
    pts = lam.as_array()
    moved = _perturbed_points(lam, pert)
    r0 = restriction_matrix(pts, spectrum, resolution)
    r1 = restriction_matrix(moved, spectrum, resolution)
    measured = RestrictionMatrix(pts, spectrum, r0.grid, r1.matrix - r0.matrix).norm()
    c1, c2 = split_bessel_constants(pts + pert.shift_array(lam.points) / 2, spectrum)
    sigma = spectrum.sigma
    bound = sigma * pert.delta * math.sqrt(c1 + c2)
    return PerturbationNormReport(
        measured, bound, sigma, pert.delta, c1, c2, measured <= bound * (1 + QUADRATURE_ALLOWANCE)
    )


def perturbation_norm_exact(lam: UDSet, pert: Perturbation, spectrum: Spectrum) -> float:
    """``||R' - R||`` from closed-form Gram blocks, without a grid."""
    pts = lam.as_array()
    moved = _perturbed_points(lam, pert)
    block = (
        cross_gram(moved, moved, spectrum)
        - cross_gram(moved, pts, spectrum)
        - cross_gram(pts, moved, spectrum)
        + cross_gram(pts, pts, spectrum)
    )
    block = (block + block.conj().T) / 2
    top = float(np.linalg.eigvalsh(block)[-1]) if block.size else 0.0
    return math.sqrt(max(top, 0.0))


@dataclass(frozen=True)
class MarginRow:
    delta: float
    seed: int
    measured_norm: float
    bound: float
    A_est: float


@dataclass(frozen=True)
class MarginTable:
    rows: tuple[MarginRow, ...]
    baseline_A: float
    sigma: float
    bessel_sum: float
    delta_star: float

    columns = ("delta", "seed", "measured_norm", "bound", "A_est")

    def mean_A(self) -> dict[float, float]:
        out: dict[float, list[float]] = {}
        for r in self.rows:
            out.setdefault(r.delta, []).append(r.A_est)
        return {d: float(np.mean(v)) for d, v in out.items()}

    def summary(self) -> dict:
        return {
            "baseline_A": self.baseline_A,
            "sigma": self.sigma,
            "bessel_sum": self.bessel_sum,
            "delta_star": self.delta_star,
            "mean_A": {repr(k): v for k, v in self.mean_A().items()},
            "all_bounds_hold": all(r.measured_norm <= r.bound * (1 + QUADRATURE_ALLOWANCE) for r in self.rows),
        }


def stability_margin_experiment(
    lam: UDSet,
    spectrum: Spectrum,
    deltas: Sequence[float],
    seeds: int | Sequence[int],
    resolution: float,
) -> MarginTable:
    """Frame lower estimates of randomly perturbed copies of ``lam``.

    ``delta_star = (sqrt(A0) / 2) / (sigma sqrt(C1 + C2))`` is the radius
    inside which ``||R' - R|| <= sqrt(A0) / 2`` and hence ``A' >= A0 / 4``.
    """
    if lam.is_periodic:
        raise SetError("truncate the set to a window first")
    seed_list = list(range(seeds)) if isinstance(seeds, int) else list(seeds)
    for d in deltas:
        _require_regime(lam, d)
    window = lam.window
    pts = lam.as_array()
    base = frame_bounds_grid(pts, spectrum, resolution, window=window).lower
    c1, c2 = split_bessel_constants(pts, spectrum)
    sigma = spectrum.sigma
    denom = sigma * math.sqrt(c1 + c2)
    delta_star = (math.sqrt(base) / 2) / denom if denom > 0 else math.inf
    rows = []
    for d in deltas:
        for seed in seed_list:
            pert = Perturbation.random(lam, d, seed)
            rep = perturbation_norm_check(lam, pert, spectrum, resolution)
            moved = perturb(lam, pert)
            a_est = frame_bounds_grid(moved.as_array(), spectrum, resolution, window=window).lower
            rows.append(MarginRow(float(d), int(seed), rep.measured_norm, rep.bound, a_est))
    return MarginTable(tuple(rows), base, sigma, c1 + c2, delta_star)
