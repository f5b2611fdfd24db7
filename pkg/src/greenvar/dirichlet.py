"""Dirichlet problem for ``Laplacian - eps u`` and its linearization in eps.

With ``phi_0`` the harmonic extension of boundary data f,

    phi_eps(z) = int_{dD} f d_n g*_z ds
               = phi_0(z) + eps int_D u phi_0 g_z dA + O(eps^2),

and the linear term obeys ``|delta phi(z)| <= ||u||_2 ||g_z||_2 ||f||_inf``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundViolation
from .geometry import BoundaryRule
from .green import GreenKernel, _sample_boundary, green_on_rule, harmonic_extension, poisson_weights
from .quadrature import area_rule
from .schrodinger import DEFAULT_RESOLUTION, sample_u, solve_series


@dataclass
class DirichletSolution:
    z: complex
    eps: float
    phi0: float
    delta: float
    phi_eps: float
    f: np.ndarray
    boundary: BoundaryRule


def _linear_term(kernel, bnd, f, u, z, rule):
    phi0_nodes = harmonic_extension(kernel, f, rule.nodes)
    uv = sample_u(rule, u)
    g = green_on_rule(kernel, rule, z)
    return float(np.dot(rule.weights, uv * phi0_nodes * g)), uv


def solve_perturbed(kernel: GreenKernel, f, u, eps, z, resolution=DEFAULT_RESOLUTION) -> DirichletSolution:
    """``phi_0(z)``, ``delta phi(z)`` and the exact ``phi_eps(z)``.

    ``f`` is a callable on boundary points or samples on
    ``boundary_samples(domain, len(f))``; ``u`` a callable, number or registry spec.
    """
    z = complex(z)
    bnd, fv = _sample_boundary(kernel, f)
    rule = area_rule(kernel.domain, *resolution, z)
    phi0 = float(harmonic_extension(kernel, fv, z))
    delta, uv = _linear_term(kernel, bnd, fv, u, z, rule)
    eps = float(eps)
    if eps == 0.0:
        return DirichletSolution(z, eps, phi0, delta, phi0, fv, bnd)
    sg = solve_series(kernel.domain, u, eps, z, rule=rule, kernel=kernel)
    # phi_eps(z) = sum_i f_i ds_i d_n g*_z(zeta_i); the P(z, .) part is the harmonic extension
    W = poisson_weights(kernel, rule, bnd)
    phi_eps = phi0 + float((fv * bnd.ds) @ W @ (sg.potential * sg.values))
    return DirichletSolution(z, eps, phi0, delta, phi_eps, fv, bnd)


def green_l2_norm(kernel: GreenKernel, z, rule=None, resolution=DEFAULT_RESOLUTION) -> float:
    """``||g_z||_{L^2(D)}`` (the log singularity is square integrable)."""
    rule = rule or area_rule(kernel.domain, *resolution, z)
    g = green_on_rule(kernel, rule, complex(z))
    return float(np.sqrt(np.dot(rule.weights, g * g)))


@dataclass
class BoundCheck:
    delta: float
    bound: float

    @property
    def holds(self):
        return abs(self.delta) <= self.bound * (1 + 1e-9) + 1e-14


def linearization_bound(kernel: GreenKernel, f, u, z, resolution=DEFAULT_RESOLUTION) -> BoundCheck:
    """``||u||_2 ||g_z||_2 ||f||_inf`` together with ``delta phi(z)``.

    Raises BoundViolation if ``|delta phi(z)|`` exceeds the bound, which can
    only come from a discretization fault.
    """
    z = complex(z)
    bnd, fv = _sample_boundary(kernel, f)
    rule = area_rule(kernel.domain, *resolution, z)
    delta, uv = _linear_term(kernel, bnd, fv, u, z, rule)
    u2 = float(np.sqrt(np.dot(rule.weights, uv * uv)))
    bound = u2 * green_l2_norm(kernel, z, rule) * float(np.max(np.abs(fv)))
    check = BoundCheck(delta, bound)
    if not check.holds:
        raise BoundViolation(f"|delta phi| = {abs(delta):.6g} exceeds bound {bound:.6g}")
    return check
