"""Green function of the Schroedinger operator ``Laplacian - eps u``.

The perturbed Green function solves ``g* = g_w + eps T(u g*)`` where ``T`` is
the volume potential of the Laplacian, and is computed by the Neumann series
``g* = sum_n (eps T M)^n g_w`` with ``M`` multiplication by ``u``. Its
outward normal derivative is

    d_n g*(zeta) = P(w, zeta) + eps int_D u g* P(., zeta) dA,

and expanding in eps gives the first and second variations

    delta   = int_D u g_w P_zeta dA,
    delta^2 = int_D u T(u g_w) P_zeta dA.

All area integrals against ``P_zeta`` use the same Poisson weight matrix, so
the discrete exact flux, its variations and the operator of ``inverse`` are
mutually consistent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EpsilonRangeError, FitError, InputError, KernelError, ShapeError
from .geometry import BoundaryRule, Domain
from .green import GreenKernel, green_on_rule, make_kernel, poisson_weights
from .potentials import as_callable
from .quadrature import AreaRule, FieldSample, area_rule
from .volume import volume_solver

DEFAULT_RESOLUTION = (48, 96)
SERIES_TOL = 1e-12
SERIES_CAP = 60


def apply_T(kernel: GreenKernel, phi: FieldSample) -> FieldSample:
    """Volume potential ``(T phi)(z) = int_D g(z, xi) phi(xi) dA(xi)`` on the nodes of ``phi.rule``."""
    if not isinstance(phi, FieldSample):
        raise ShapeError("apply_T expects a FieldSample")
    if phi.rule.domain is not kernel.domain and phi.rule.layout != "polar":
        raise ShapeError("field and kernel live on different domains")
    return FieldSample(phi.rule, volume_solver(kernel, phi.rule).apply(phi.values))


def _rule_for(domain, w, rule, resolution):
    if rule is not None:
        return rule
    n_r, n_t = resolution
    return area_rule(domain, n_r, n_t, w)


def sample_u(rule: AreaRule, u) -> np.ndarray:
    if isinstance(u, FieldSample):
        if u.rule is not rule:
            raise ShapeError("u is sampled on a different rule")
        return u.values
    return rule.sample(as_callable(u))


def epsilon_limit(u_values) -> float:
    """``eps_0 = 0.5 / max|u|`` (infinite for u = 0)."""
    top = float(np.max(np.abs(u_values)))
    return np.inf if top == 0.0 else 0.5 / top


def neumann_series(kernel, rule, potential, w, tol=SERIES_TOL, cap=SERIES_CAP):
    """Sum ``g* = sum_n (T V)^n g_w`` for a potential already scaled by eps.

    Returns (values, number of terms, tail estimate).
    """
    solver = volume_solver(kernel, rule)
    term = green_on_rule(kernel, rule, w)
    total = term.copy()
    prev = np.max(np.abs(term))
    n = 0
    if not np.any(potential):
        return total, 0, 0.0
    while True:
        term = solver.apply(potential * term)
        n += 1
        total += term
        size = float(np.max(np.abs(term)))
        if size < tol:
            ratio = size / prev if prev > 0 else 0.0
            tail = size * ratio / (1.0 - ratio) if ratio < 1 else np.inf
            return total, n, tail
        if n >= cap:
            raise KernelError(f"Neumann series did not converge in {cap} terms (last term {size:.3g})")
        prev = size


def _zeta(kernel, zeta):
    """Normalize a boundary-point argument; returns (zeta, scalar?)."""
    if isinstance(zeta, BoundaryRule):
        return zeta, False
    arr = np.asarray(zeta, dtype=complex)
    return np.atleast_1d(arr), arr.ndim == 0


def _base_flux(kernel, w, zeta):
    if isinstance(zeta, BoundaryRule):
        return kernel.poisson_matrix(np.array([w]), zeta)[:, 0]
    return np.atleast_1d(kernel.poisson(w, zeta))


def _out(vals, scalar):
    return float(vals[0]) if scalar else np.asarray(vals)


@dataclass(eq=False)
class SchrodingerGreen:
    """Perturbed Green function ``g*_w`` sampled on an area rule."""

    domain: Domain
    kernel: GreenKernel
    rule: AreaRule
    u: np.ndarray
    eps: float
    w: complex
    values: np.ndarray
    order: int
    tail: float
    potential: np.ndarray = field(repr=False, default=None)

    @property
    def field(self) -> FieldSample:
        return FieldSample(self.rule, self.values)

    def evaluate(self, z):
        """``g*_w(z)`` at arbitrary interior points."""
        z = np.asarray(z, dtype=complex)
        base = self.kernel.green(z, self.w)
        solver = volume_solver(self.kernel, self.rule)
        corr = solver.evaluate(self.potential * self.values, z)
        out = base + corr
        return out if np.ndim(out) else float(out)

    def normal_derivative(self, zeta):
        return normal_derivative_exact(self, zeta)


def solve_series(domain: Domain, u, eps, w, rule: AreaRule | None = None,
                 kernel: GreenKernel | None = None, resolution=DEFAULT_RESOLUTION) -> SchrodingerGreen:
    """Green function of ``Laplacian - eps u`` with pole at ``w``.

    Raises EpsilonRangeError unless ``0 <= eps < 0.5 / max|u|`` and
    InputError if u is negative somewhere on the nodes (u = 0 is allowed only
    together with eps = 0 or as the trivial perturbation).
    """
    w = complex(w)
    kernel = kernel or make_kernel(domain)
    rule = _rule_for(domain, w, rule, resolution)
    uv = sample_u(rule, u)
    if np.any(uv <= 0.0) and not np.all(uv == 0.0):
        raise InputError("u must be positive on the domain")
    eps = float(eps)
    if eps < 0 or eps >= epsilon_limit(uv):
        raise EpsilonRangeError(f"eps={eps} outside [0, {epsilon_limit(uv):.6g})")
    V = eps * uv
    values, order, tail = neumann_series(kernel, rule, V, w)
    return SchrodingerGreen(domain, kernel, rule, uv, eps, w, values, order, tail, V)


def normal_derivative_exact(sg: SchrodingerGreen, zeta):
    """``d_n g*_w(zeta) = P(w, zeta) + int_D V g*_w P_zeta dA`` with ``V = eps u``."""
    zeta, scalar = _zeta(sg.kernel, zeta)
    base = _base_flux(sg.kernel, sg.w, zeta)
    if sg.order == 0:
        return _out(base, scalar)
    W = poisson_weights(sg.kernel, sg.rule, zeta)
    return _out(base + W @ (sg.potential * sg.values), scalar)


def _setup(kernel, u, w, zeta, rule, resolution):
    w = complex(w)
    rule = _rule_for(kernel.domain, w, rule, resolution)
    uv = sample_u(rule, u)
    zeta, scalar = _zeta(kernel, zeta)
    W = poisson_weights(kernel, rule, zeta)
    g = green_on_rule(kernel, rule, w)
    return rule, uv, W, g, scalar


def first_variation(kernel: GreenKernel, u, w, zeta, rule: AreaRule | None = None,
                    resolution=DEFAULT_RESOLUTION):
    """``int_D u(z) g(z, w) P(z, zeta) dA(z)``: coefficient of eps in ``d_n g*_w(zeta)``."""
    rule, uv, W, g, scalar = _setup(kernel, u, w, zeta, rule, resolution)
    return _out(W @ (uv * g), scalar)


def second_variation(kernel: GreenKernel, u, w, zeta, rule: AreaRule | None = None,
                     resolution=DEFAULT_RESOLUTION):
    """``int int u(z) u(xi) g(xi, w) g(xi, z) P(z, zeta)``: coefficient of eps^2."""
    rule, uv, W, g, scalar = _setup(kernel, u, w, zeta, rule, resolution)
    inner = volume_solver(kernel, rule).apply(uv * g)
    return _out(W @ (uv * inner), scalar)


@dataclass
class VariationReport:
    zeta: complex
    base: float
    first: float
    second: float
    eps: np.ndarray
    exact: np.ndarray
    order_linear: float
    order_quadratic: float

    @property
    def pairs(self):
        return list(zip(self.eps.tolist(), self.exact.tolist()))

    @property
    def linear_model(self):
        return self.base + self.eps * self.first

    @property
    def quadratic_model(self):
        return self.linear_model + self.eps ** 2 * self.second

    @property
    def remainder_linear(self):
        return self.exact - self.linear_model

    @property
    def remainder_quadratic(self):
        return self.exact - self.quadratic_model

    def rows(self):
        return np.column_stack([self.eps, self.exact, self.linear_model, self.quadratic_model,
                                self.remainder_linear, self.remainder_quadratic])


def loglog_slope(x, y) -> float:
    """Least-squares slope of log|y| against log x."""
    y = np.abs(np.asarray(y, dtype=float))
    x = np.asarray(x, dtype=float)
    if np.any(y == 0) or np.any(x <= 0):
        raise FitError("cannot fit a log-log slope through zero values")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def fit_second_variation(eps, exact, degree=3) -> float:
    """Coefficient of eps^2 in a least-squares polynomial fit of exact fluxes.

    Uses only the fluxes, so it checks ``second_variation`` independently.
    The default cubic degree absorbs the eps^3 term, which would otherwise
    bias a pure quadratic fit by roughly its coefficient times the largest eps.
    """
    eps = np.asarray(eps, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if degree < 2 or len(eps) <= degree:
        raise FitError(f"a degree-{degree} fit needs more than {degree} epsilon values")
    return float(np.polyfit(eps, exact, degree)[-3])


def check_eps_list(eps_list, limit):
    eps = np.asarray(eps_list, dtype=float)
    if eps.ndim != 1 or len(eps) < 4:
        raise FitError("an epsilon sweep needs at least 4 values")
    if np.any(eps <= 0) or len(np.unique(eps)) < 4:
        raise FitError("epsilon values must be positive and distinct")
    if np.any(eps >= limit):
        raise EpsilonRangeError(f"epsilon values must stay below {limit:.6g}")
    return eps


def epsilon_sweep(domain: Domain, u, w, zeta, eps_list, rule: AreaRule | None = None,
                  resolution=DEFAULT_RESOLUTION, kernel: GreenKernel | None = None) -> VariationReport:
    """Exact fluxes over ``eps_list`` and the empirical remainder orders."""
    kernel = kernel or make_kernel(domain)
    w = complex(w)
    zeta = complex(zeta)
    rule = _rule_for(domain, w, rule, resolution)
    uv = sample_u(rule, u)
    eps = check_eps_list(eps_list, epsilon_limit(uv))
    base = float(kernel.poisson(w, zeta))
    d1 = first_variation(kernel, uv if isinstance(u, FieldSample) else u, w, zeta, rule)
    d2 = second_variation(kernel, uv if isinstance(u, FieldSample) else u, w, zeta, rule)
    exact = np.array([normal_derivative_exact(solve_series(domain, FieldSample(rule, uv), e, w, rule, kernel), zeta)
                      for e in eps])
    rep = VariationReport(zeta, base, d1, d2, eps, exact, np.nan, np.nan)
    rep.order_linear = loglog_slope(eps, rep.remainder_linear)
    rep.order_quadratic = loglog_slope(eps, rep.remainder_quadratic)
    return rep
