"""Green functions of the Laplacian and of its Schroedinger and divergence-form perturbations.

Submodules: ``geometry``, ``quadrature``, ``green``, ``volume``, ``schrodinger``,
``beltrami``, ``dirichlet``, ``growth``, ``inverse``, ``oracle``, ``potentials``
and the ``cli`` front end.
"""

__version__ = "0.1.0"

from .errors import GreenvarError  # noqa: E402
from .geometry import ConformalImage, MarkerCurve, UnitDisk, boundary_samples, contains  # noqa: E402
from .green import green, harmonic_extension, make_kernel, normal_derivative_via_lemma, poisson  # noqa: E402
from .quadrature import FieldSample, area_rule, integrate_with_log_singularity  # noqa: E402
from .schrodinger import (apply_T, epsilon_sweep, first_variation, normal_derivative_exact,  # noqa: E402
                          second_variation, solve_series)

__all__ = [
    "GreenvarError", "UnitDisk", "ConformalImage", "MarkerCurve", "boundary_samples", "contains",
    "make_kernel", "green", "poisson", "harmonic_extension", "normal_derivative_via_lemma",
    "FieldSample", "area_rule", "integrate_with_log_singularity", "apply_T", "solve_series",
    "normal_derivative_exact", "first_variation", "second_variation", "epsilon_sweep",
]
