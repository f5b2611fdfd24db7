"""Volume potential ``(T phi)(z) = int_D g(z, xi) phi(xi) dA(xi)`` on area rules.

Two solvers share one interface:

* ``PolarVolumeSolver`` for polar rules on disk/conformal domains. In the
  reference disk the potential solves ``Laplacian s = F`` with
  ``F = phi o Phi * |Phi'|^2`` and ``s = 0`` on the unit circle, so each
  angular Fourier mode reduces to a radial Green function integral. Those are
  evaluated against the Lagrange interpolant of the nodal data in the graded
  variable, which is exact for the nodal polynomial and spectrally accurate.
* ``NystromVolumeSolver`` for any other rule, with singularity subtraction
  ``sum_{j != i} g_ij w_j (phi_j - phi_i) + phi_i * int_D g(z_i, .) dA``.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError
from .green import GreenKernel, mean_green
from .quadrature import AreaRule, estimate_at, mobius_inverse

MAX_SUBNODES = 200


def _barycentric_weights(x):
    d = x[:, None] - x[None, :]
    np.fill_diagonal(d, 1.0)
    # scale each factor to keep the product in range
    d = d * (2.0 / (x.max() - x.min()))
    return 1.0 / np.prod(d, axis=1)


def lagrange_matrix(nodes, x):
    """Values of the Lagrange basis on ``nodes`` at points ``x``: shape (len(x), len(nodes))."""
    nodes = np.asarray(nodes, dtype=float)
    x = np.asarray(x, dtype=float)
    bw = _barycentric_weights(nodes)
    diff = x[:, None] - nodes[None, :]
    hit = diff == 0.0
    diff[hit] = 1.0
    terms = bw[None, :] / diff
    out = terms / terms.sum(axis=1, keepdims=True)
    rows = hit.any(axis=1)
    out[rows] = hit[rows].astype(float)
    return out


def radial_kernel(s_nodes, r_targets, m_max, grading):
    """Tensor ``K[m, i, j] = int_0^1 G_m(r_i, sigma**grading) L_j(sigma) d sigma``.

    ``G_0(r, rho) = log max(r, rho)`` and, for ``m >= 1``,
    ``G_m = -((r_< / r_>)**m - (r_< r_>)**m) / (2m)`` are the Dirichlet Green
    functions of the m-th radial mode (times the ``1/2pi`` of the 2-D kernel,
    which cancels against the angular integral).
    """
    n = len(s_nodes)
    r_targets = np.atleast_1d(np.asarray(r_targets, dtype=float))
    m = np.arange(m_max + 1)
    Q = int(min(MAX_SUBNODES, max(n, (grading * m_max + n) // 2 + 8)))
    x, wx = np.polynomial.legendre.leggauss(Q)
    u = 0.5 * (x + 1.0)
    K = np.zeros((m_max + 1, len(r_targets), n))
    for i, r in enumerate(r_targets):
        sr = r ** (1.0 / grading)
        parts = []
        if sr > 0:
            parts.append((sr * u, 0.5 * wx * sr))
        if sr < 1:
            parts.append((sr + (1.0 - sr) * u, 0.5 * wx * (1.0 - sr)))
        sig = np.concatenate([p[0] for p in parts])
        wq = np.concatenate([p[1] for p in parts])
        rho = sig ** grading
        lo = np.minimum(rho, r)
        hi = np.maximum(rho, r)
        G = np.empty((m_max + 1, len(sig)))
        G[0] = np.log(hi)
        with np.errstate(under="ignore"):
            ratio = lo / hi
            prod = lo * hi
            G[1:] = -(ratio[None, :] ** m[1:, None] - prod[None, :] ** m[1:, None]) / (2.0 * m[1:, None])
        L = lagrange_matrix(s_nodes, sig)
        K[:, i, :] = (G * wq[None, :]) @ L
    return K


class PolarVolumeSolver:
    """Spectral volume potential on a polar rule."""

    def __init__(self, rule: AreaRule):
        if rule.layout != "polar":
            raise ShapeError("PolarVolumeSolver needs a polar area rule")
        self.rule = rule
        n_r, n_t = rule.shape
        self.n_r, self.n_t = n_r, n_t
        self.k = np.fft.fftfreq(n_t, 1.0 / n_t).astype(int)
        self.m = np.abs(self.k)
        self.m[n_t // 2] = n_t // 2
        self.K = radial_kernel(rule.s, rule.radii, n_t // 2, rule.grading)

    def _modes(self, values):
        rule = self.rule
        F = (np.asarray(values, dtype=float) * rule.jac2).reshape(self.n_r, self.n_t)
        Fk = np.fft.fft(F, axis=1) / self.n_t
        g = rule.grading
        return g * rule.s[:, None] ** (2 * g - 1) * Fk

    def apply(self, values):
        q = self._modes(values)
        S = np.einsum("kij,jk->ik", self.K[self.m], q)
        return (np.fft.ifft(S, axis=1) * self.n_t).real.ravel()

    def evaluate_reference(self, values, a):
        """Potential at reference-disk points ``a`` (any |a| <= 1)."""
        a = np.atleast_1d(np.asarray(a, dtype=complex))
        q = self._modes(values)
        Kt = radial_kernel(self.rule.s, np.abs(a), self.n_t // 2, self.rule.grading)
        S = np.einsum("kij,jk->ik", Kt[self.m], q)
        th = np.angle(a)
        phase = np.exp(1j * th[:, None] * self.k[None, :])
        nyq = self.n_t // 2
        phase[:, nyq] = np.cos(nyq * th)
        return np.sum(S * phase, axis=1).real

    def evaluate(self, values, z):
        z = np.asarray(z, dtype=complex)
        rule = self.rule
        a = mobius_inverse(rule.domain.to_disk(z.ravel()), rule.mobius)
        return self.evaluate_reference(values, a).reshape(z.shape)


class NystromVolumeSolver:
    """Singularity-subtracted Nystrom volume potential on an arbitrary rule."""

    def __init__(self, kernel: GreenKernel, rule: AreaRule):
        self.rule = rule
        self.kernel = kernel
        G = kernel.green_matrix(rule.nodes, rule.nodes)
        np.fill_diagonal(G, 0.0)
        self.A = G * rule.weights[None, :]
        self.rowsum = self.A.sum(axis=1)
        self.G1 = mean_green(kernel, rule.nodes)

    def apply(self, values):
        values = np.asarray(values, dtype=float)
        return self.A @ values - self.rowsum * values + self.G1 * values

    def evaluate(self, values, z):
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        values = np.asarray(values, dtype=float)
        G = self.kernel.green_matrix(flat, self.rule.nodes)
        G[~np.isfinite(G)] = 0.0
        W = G * self.rule.weights[None, :]
        local = np.array([estimate_at(self.rule, values, p) for p in flat])
        out = W @ values - W.sum(axis=1) * local + mean_green(self.kernel, flat) * local
        return out.reshape(z.shape)


def volume_solver(kernel: GreenKernel, rule: AreaRule):
    """Solver for ``rule``, cached on the rule."""
    cache = rule.extra.setdefault("_volume", {})
    key = id(kernel) if rule.layout != "polar" else "polar"
    if key not in cache:
        if rule.layout == "polar":
            cache[key] = PolarVolumeSolver(rule)
        else:
            cache[key] = NystromVolumeSolver(kernel, rule)
    return cache[key]
