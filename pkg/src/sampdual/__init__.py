"""Numerical lab for the duality between sampling and interpolation.

Point sets and densities live in ``sets``, spectra in ``spectra``,
exponential systems and their bounds in ``exponential``, the finite
duality checks in ``duality``, perturbation stability in ``stability``
and batch experiments in ``experiments``.
"""

__version__ = "0.1.0"

from .duality import (
    DiscreteModel,
    OrthoDecomposition,
    discrete_duality_verify,
    exhaustive_duality_scan,
    prop4_verify,
)
from .exponential import (
    bessel_bound_estimate,
    frame_bounds_exact,
    frame_bounds_grid,
    gram_matrix,
    riesz_bound_estimates,
)
from .sets import (
    Perturbation,
    UDSet,
    check_complementarity,
    complement_in_lattice,
    lower_density,
    perturb,
    round_to_lattice,
    separation_constant,
    upper_density,
)
from .spectra import Spectrum
from .stability import perturbation_norm_check, stability_margin_experiment

__all__ = [
    "DiscreteModel",
    "OrthoDecomposition",
    "Perturbation",
    "Spectrum",
    "UDSet",
    "bessel_bound_estimate",
    "check_complementarity",
    "complement_in_lattice",
    "discrete_duality_verify",
    "exhaustive_duality_scan",
    "frame_bounds_exact",
    "frame_bounds_grid",
    "gram_matrix",
    "lower_density",
    "perturb",
    "perturbation_norm_check",
    "prop4_verify",
    "riesz_bound_estimates",
    "round_to_lattice",
    "separation_constant",
    "stability_margin_experiment",
    "upper_density",
]
