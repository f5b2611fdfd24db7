"""Green function of the divergence-form operator ``div(lam grad)`` with ``lam = 1 + eps u``.

The substitution ``G = sqrt(lam(z) lam(w)) g*`` turns ``div(lam grad) g* = delta_w``
into ``(Laplacian - V) G = delta_w`` with ``V = Laplacian(sqrt(lam)) / sqrt(lam)``,
so the Schroedinger Neumann series (with potential V, not eps u) gives g*
directly. To first order in eps,

    delta = 1/2 [ int_D Laplacian(u) g_w P_zeta dA - P(w, zeta) (u(zeta) + u(w)) ].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EpsilonRangeError, InputError
from .geometry import BoundaryRule, Domain
from .green import GreenKernel, green_on_rule, make_kernel, poisson_weights
from .potentials import Potential, as_callable, beltrami_potential
from .quadrature import AreaRule, FieldSample, area_rule
from .schrodinger import (DEFAULT_RESOLUTION, _base_flux, _out, _zeta, check_eps_list,
                          epsilon_limit, loglog_slope, neumann_series)
from .volume import volume_solver


@dataclass(eq=False)
class BeltramiSetup:
    """Coefficient data of ``div(lam grad)`` on the nodes of an area rule."""

    domain: Domain
    u: Potential
    eps: float
    rule: AreaRule
    kernel: GreenKernel

    def __post_init__(self):
        z = self.rule.nodes
        self.u_values = self.u(z)
        self.lam = 1.0 + self.eps * self.u_values
        if np.any(self.lam <= 0):
            raise InputError("lam = 1 + eps u must be positive")
        self.lap_u = self.u.laplacian(z)
        self.V = beltrami_potential(self.u, self.eps, z)

    def lam_at(self, z):
        return 1.0 + self.eps * self.u(z)


def beltrami_setup(domain: Domain, u, eps, w=None, rule: AreaRule | None = None,
                   kernel: GreenKernel | None = None, resolution=DEFAULT_RESOLUTION) -> BeltramiSetup:
    """Validate ``eps < 0.5 / max|u|`` and sample lam, V and Laplacian(u) on a rule centred at ``w``."""
    u = as_callable(u)
    if not isinstance(u, Potential):
        raise InputError("Beltrami perturbations need a registry potential with analytic derivatives")
    kernel = kernel or make_kernel(domain)
    if rule is None:
        rule = area_rule(domain, *resolution, w)
    eps = float(eps)
    limit = epsilon_limit(u(rule.nodes))
    if eps < 0 or eps >= limit:
        raise EpsilonRangeError(f"eps={eps} outside [0, {limit:.6g})")
    return BeltramiSetup(domain, u, eps, rule, kernel)


@dataclass(eq=False)
class BeltramiGreen:
    setup: BeltramiSetup
    w: complex
    G: np.ndarray          # Green function of Laplacian - V on the nodes
    order: int
    tail: float

    @property
    def lam_w(self):
        return float(self.setup.lam_at(self.w))

    @property
    def values(self):
        return self.G / np.sqrt(self.setup.lam * self.lam_w)

    def field(self) -> FieldSample:
        return FieldSample(self.setup.rule, self.values)

    def evaluate(self, z):
        """``g*_w(z)`` at arbitrary interior points."""
        s = self.setup
        z = np.asarray(z, dtype=complex)
        G = s.kernel.green(z, self.w) + volume_solver(s.kernel, s.rule).evaluate(s.V * self.G, z)
        out = G / np.sqrt(s.lam_at(z) * self.lam_w)
        return out if np.ndim(out) else float(out)

    def normal_derivative(self, zeta):
        """``d_n g*_w(zeta) = d_n G(zeta) / sqrt(lam(zeta) lam(w))``."""
        s = self.setup
        zeta, scalar = _zeta(s.kernel, zeta)
        zpts = zeta.z if isinstance(zeta, BoundaryRule) else zeta
        flux = _base_flux(s.kernel, self.w, zeta)
        if self.order:
            flux = flux + poisson_weights(s.kernel, s.rule, zeta) @ (s.V * self.G)
        return _out(flux / np.sqrt(s.lam_at(zpts) * self.lam_w), scalar)


def beltrami_solve(setup: BeltramiSetup, w) -> BeltramiGreen:
    w = complex(w)
    G, order, tail = neumann_series(setup.kernel, setup.rule, setup.V, w)
    return BeltramiGreen(setup, w, G, order, tail)


def beltrami_green_star(setup: BeltramiSetup, w, rule: AreaRule | None = None) -> FieldSample:
    """``g*_w`` on the nodes of ``rule`` (default: the setup's rule)."""
    if rule is not None and rule is not setup.rule:
        setup = BeltramiSetup(setup.domain, setup.u, setup.eps, rule, setup.kernel)
    return beltrami_solve(setup, w).field()


def beltrami_first_variation(kernel: GreenKernel, u, lap_u, w, zeta, rule: AreaRule | None = None,
                             resolution=DEFAULT_RESOLUTION):
    """First variation of ``d_n g*_w(zeta)`` for ``lam = 1 + eps u``.

    ``u`` and ``lap_u`` are callables; ``lap_u`` must be the exact Laplacian of u.
    """
    w = complex(w)
    rule = rule or area_rule(kernel.domain, *resolution, w)
    zeta, scalar = _zeta(kernel, zeta)
    zpts = zeta.z if isinstance(zeta, BoundaryRule) else zeta
    W = poisson_weights(kernel, rule, zeta)
    g = green_on_rule(kernel, rule, w)
    lap = rule.sample(lap_u)
    P = _base_flux(kernel, w, zeta)
    u_zeta = np.broadcast_to(np.asarray(u(zpts), dtype=float), np.shape(zpts))
    u_w = float(np.asarray(u(np.array([w])), dtype=float).ravel()[0])
    return _out(0.5 * (W @ (lap * g) - P * (u_zeta + u_w)), scalar)


@dataclass
class MonotonicityCheck:
    lhs: float            # boundary integral of the unhalved bracket
    rhs: float            # -2 int u d_n g_w ds
    delta_integral: float  # boundary integral of the first variation itself (= lhs / 2)

    @property
    def agree(self):
        return abs(self.lhs - self.rhs)


def beltrami_boundary_monotonicity(kernel: GreenKernel, u, lap_u, w, n_boundary=256,
                                   rule: AreaRule | None = None,
                                   resolution=DEFAULT_RESOLUTION) -> MonotonicityCheck:
    """Both sides of the boundary-integrated monotonicity identity.

    The left side integrates the bracket ``int Lap(u) g_w P dA - P (u(zeta)+u(w))``
    (twice the first variation) over the boundary; the right side is
    ``-2 int u d_n g_w ds``. Both are <= 0 for u >= 0.
    """
    bnd = kernel.domain.boundary_samples(n_boundary)
    delta = beltrami_first_variation(kernel, u, lap_u, w, bnd, rule, resolution)
    P = _base_flux(kernel, complex(w), bnd)
    uz = np.asarray(u(bnd.z), dtype=float) * np.ones(len(bnd))
    lhs = float(np.dot(2.0 * delta, bnd.ds))
    rhs = float(-2.0 * np.dot(uz * P, bnd.ds))
    return MonotonicityCheck(lhs, rhs, lhs / 2.0)


@dataclass
class BeltramiSweep:
    eps: np.ndarray
    exact: np.ndarray
    base: float
    first: float
    order_linear: float

    @property
    def remainder_linear(self):
        return self.exact - self.base - self.eps * self.first


def beltrami_sweep(domain: Domain, u, w, zeta, eps_list, resolution=DEFAULT_RESOLUTION) -> BeltramiSweep:
    """Exact Beltrami fluxes over ``eps_list`` and the remainder order after the first variation."""
    u = as_callable(u)
    kernel = make_kernel(domain)
    w = complex(w)
    zeta = complex(zeta)
    rule = area_rule(domain, *resolution, w)
    eps = check_eps_list(eps_list, epsilon_limit(u(rule.nodes)))
    base = float(kernel.poisson(w, zeta))
    first = beltrami_first_variation(kernel, u, u.laplacian, w, zeta, rule)
    exact = np.array([beltrami_solve(BeltramiSetup(domain, u, e, rule, kernel), w).normal_derivative(zeta)
                      for e in eps])
    rep = BeltramiSweep(eps, exact, base, first, np.nan)
    rep.order_linear = loglog_slope(eps, rep.remainder_linear)
    return rep
