"""The operator ``A u(zeta) = int_D u(z) g(z, w) P(z, zeta) dA(z)`` and its regularized inverse.

``A`` maps a perturbation u to the first variation of the boundary velocity.
It is discretized from area-node values of u to boundary-node values, with
L^2 inner products weighted by area weights (domain) and arclength weights
(boundary). Every entry is ``h_zeta(z_j) * weight_j`` with
``h_zeta = g_w P_zeta``, using the same Poisson weights as the first variation,
so ``A @ 1`` reproduces it exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .geometry import BoundaryRule, Domain
from .green import GreenKernel, green_on_rule, make_kernel, poisson_weights
from .quadrature import AreaRule, area_rule

RANK_CUTOFF = 1e-12


@dataclass(eq=False)
class OperatorA:
    domain: Domain
    w: complex
    matrix: np.ndarray        # (n_boundary, n_area)
    rule: AreaRule
    boundary: BoundaryRule
    kernel: GreenKernel

    @property
    def area_weights(self):
        return self.rule.weights

    @property
    def arc_weights(self):
        return self.boundary.ds

    def apply(self, u):
        """``A u`` on boundary nodes; ``u`` is a callable or area-node samples."""
        return self.matrix @ self.rule.sample(u)

    def adjoint(self, v):
        """L^2-adjoint ``A* v = W_a^{-1} A^T W_b v`` on area nodes."""
        v = np.asarray(v, dtype=float)
        return (self.matrix.T @ (self.arc_weights * v)) / self.area_weights

    def weighted(self):
        """``W_b^{1/2} A W_a^{-1/2}``: the matrix whose Euclidean SVD is the L^2 one."""
        return (np.sqrt(self.arc_weights)[:, None] * self.matrix) / np.sqrt(self.area_weights)[None, :]

    def boundary_norm(self, v, p=2):
        v = np.abs(np.asarray(v, dtype=float))
        if p == 1:
            return float(np.dot(self.arc_weights, v))
        return float(np.sqrt(np.dot(self.arc_weights, v ** 2)))

    def area_norm(self, u):
        return float(np.sqrt(np.dot(self.area_weights, np.asarray(u, dtype=float) ** 2)))

    def _svd(self):
        if not hasattr(self, "_svd_cache"):
            self._svd_cache = np.linalg.svd(self.weighted(), full_matrices=False)
        return self._svd_cache


def assemble(domain: Domain, w, n_radial=24, n_angular=64, n_boundary=64,
             rule: AreaRule | None = None, boundary: BoundaryRule | None = None,
             kernel: GreenKernel | None = None) -> OperatorA:
    """Discretize A with an area rule centred at ``w`` and ``n_boundary`` boundary nodes."""
    w = complex(w)
    kernel = kernel or make_kernel(domain)
    rule = rule or area_rule(domain, n_radial, n_angular, w)
    boundary = boundary or domain.boundary_samples(n_boundary)
    W = poisson_weights(kernel, rule, boundary)
    g = green_on_rule(kernel, rule, w)
    return OperatorA(domain, w, W * g[None, :], rule, boundary, kernel)


@dataclass
class SpectrumReport:
    singular_values: np.ndarray
    condition: float
    rank: int
    degenerate: bool

    def to_rows(self):
        return np.column_stack([np.arange(len(self.singular_values)), self.singular_values])


def spectrum(opA: OperatorA, cutoff=RANK_CUTOFF) -> SpectrumReport:
    """Singular values of the L^2-weighted matrix, descending.

    ``degenerate`` flags an all-zero operator (every singular value 0).
    """
    s = opA._svd()[1]
    top = float(s[0]) if len(s) else 0.0
    if top == 0.0:
        return SpectrumReport(s, np.inf, 0, True)
    rank = int(np.sum(s > cutoff * top))
    cond = top / s[-1] if s[-1] > 0 else np.inf
    return SpectrumReport(s, float(cond), rank, False)


@dataclass
class TikhonovResult:
    u: np.ndarray
    alpha: float
    residual: float            # relative L^2(boundary) residual
    residual_l1: float         # relative L^1(boundary) residual
    u_nonneg: np.ndarray
    residual_nonneg: float
    residual_nonneg_l1: float


def solve_tikhonov(opA: OperatorA, v, alpha) -> TikhonovResult:
    """Minimize ``||A u - v||^2_{L^2(dD)} + alpha ||u||^2_{L^2(D)}`` by SVD filtering.

    Also reports residuals in the boundary L^1 norm and for the projection of
    u onto its nonnegative part.
    """
    alpha = float(alpha)
    if not alpha > 0:
        raise InputError("alpha must be positive")
    v = np.asarray(v, dtype=float)
    if v.shape != (len(opA.boundary),):
        raise InputError(f"target has shape {v.shape}, expected ({len(opA.boundary)},)")
    U, s, Vt = opA._svd()
    y = np.sqrt(opA.arc_weights) * v
    x = Vt.T @ (s / (s ** 2 + alpha) * (U.T @ y))
    u = x / np.sqrt(opA.area_weights)
    up = np.maximum(u, 0.0)
    nv2, nv1 = opA.boundary_norm(v), opA.boundary_norm(v, 1)
    nv2 = nv2 if nv2 > 0 else 1.0
    nv1 = nv1 if nv1 > 0 else 1.0
    r, rp = opA.matrix @ u - v, opA.matrix @ up - v
    return TikhonovResult(u, alpha, opA.boundary_norm(r) / nv2, opA.boundary_norm(r, 1) / nv1,
                          up, opA.boundary_norm(rp) / nv2, opA.boundary_norm(rp, 1) / nv1)


def residual_curve(opA: OperatorA, v, alphas):
    """``(alpha, L^2 residual, L^1 residual, ||u||)`` rows for each alpha."""
    rows = []
    for a in alphas:
        res = solve_tikhonov(opA, v, a)
        rows.append((a, res.residual, res.residual_l1, opA.area_norm(res.u)))
    return np.array(rows)


def kernel_profile(kernel: GreenKernel, w, zeta, distances):
    """``h_zeta(z) = g(z, w) P(z, zeta)`` at ``z = zeta - d n(zeta)`` for each distance d.

    On disk/conformal domains the inward ray is taken in the disk preimage.
    """
    w = complex(w)
    zeta = complex(zeta)
    d = np.asarray(distances, dtype=float)
    if kernel.method == "mfs":
        n = kernel._curve_normal(np.array([zeta]))[0]
        z = zeta - d * n
    else:
        om, _ = kernel.boundary_frame(np.array([zeta]))
        z = kernel.domain.map(om[0] * (1.0 - d))
    return kernel.green(z, w) * kernel.poisson(z, zeta)


def kernel_limit(kernel: GreenKernel, w, zeta, d0=1e-3, levels=4):
    """Limit of ``h_zeta`` at the boundary by Richardson extrapolation in the distance.

    The boundary value is ``-P(w, zeta) / pi``; this estimates it from the
    interior samples only.
    """
    d = d0 / 2.0 ** np.arange(levels)
    vals = np.asarray(kernel_profile(kernel, w, zeta, d), dtype=float)
    table = [vals]
    for k in range(1, levels):
        prev = table[-1]
        table.append((2 ** k * prev[1:] - prev[:-1]) / (2 ** k - 1))
    return float(table[-1][-1])


def export_csv(path, array, header):
    np.savetxt(path, np.asarray(array, dtype=float), delimiter=",", header=header, comments="", fmt="%.17g")
