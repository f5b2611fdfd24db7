"""Independent reference solutions on the unit disk, used to validate the main path.

* Finite-volume polar grid solvers for the Schroedinger and divergence-form
  Green functions. The log singularity is split off analytically: only the
  regular part is discretized.
* Bessel I_0 by its power series, and the boundary flux ``1/(2 pi I_0(sqrt eps))``
  of the radial Schroedinger Green function.
* A radial two-point boundary value solver for ``s'' + s'/r = F``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import quad, solve_bvp
from scipy.sparse.linalg import spsolve

from .errors import OracleError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PolarGrid:
    """Cell-centred polar grid on the unit disk.

    Unknowns sit at radii ``(i + 1/2) h_r`` (i = 0..n_r-1) and angles
    ``j h_theta``; no node lies on the axis, whose face has zero area so the
    first ring closes itself. The Dirichlet condition acts on the face r = 1.
    """

    n_r: int
    n_theta: int

    def __post_init__(self):
        if self.n_r < 32 or self.n_theta < 32:
            raise OracleError("polar grid needs n_r, n_theta >= 32")

    @property
    def h_r(self):
        return 1.0 / self.n_r

    @property
    def h_theta(self):
        return TWO_PI / self.n_theta

    @property
    def r(self):
        return (np.arange(self.n_r) + 0.5) * self.h_r

    @property
    def theta(self):
        return np.arange(self.n_theta) * self.h_theta

    @property
    def nodes(self):
        return (self.r[:, None] * np.exp(1j * self.theta)[None, :]).ravel()

    @property
    def cell_area(self):
        return (self.r * self.h_r * self.h_theta)[:, None] * np.ones(self.n_theta)[None, :]

    def index(self, i, j):
        return i * self.n_theta + (j % self.n_theta)


def _disk_green(z, w):
    return (np.log(np.abs(z - w)) - np.log(np.abs(1 - np.conj(w) * z))) / TWO_PI


def _green_on_grid(grid, w):
    """g_w at the nodes; a node hit by w gets the cell average of the log part."""
    z = grid.nodes
    with np.errstate(divide="ignore"):
        g = _disk_green(z, w)
    hit = ~np.isfinite(g)
    if hit.any():
        rho = np.sqrt(grid.cell_area.ravel()[hit] / np.pi)
        g[hit] = (np.log(rho) - 0.5 - np.log(np.abs(1 - np.conj(w) * z[hit]))) / TWO_PI
    return g


def _operator(grid, lam_face_r=None, lam_face_t=None):
    """Finite-volume ``div(lam grad)`` (area-integrated) with zero Dirichlet data at r = 1."""
    n_r, n_t = grid.n_r, grid.n_theta
    hr, ht = grid.h_r, grid.h_theta
    r = grid.r
    rows, cols, vals = [], [], []
    if lam_face_r is None:
        lam_face_r = np.ones((n_r + 1, n_t))      # faces at r = i h_r, i = 0..n_r
    if lam_face_t is None:
        lam_face_t = np.ones((n_r, n_t))          # faces at theta_j + h_t/2
    for i in range(n_r):
        r_in, r_out = i * hr, (i + 1) * hr
        for j in range(n_t):
            p = grid.index(i, j)
            diag = 0.0
            # radial faces
            if i > 0:
                c = lam_face_r[i, j] * r_in * ht / hr
                rows.append(p); cols.append(grid.index(i - 1, j)); vals.append(c)
                diag -= c
            if i < n_r - 1:
                c = lam_face_r[i + 1, j] * r_out * ht / hr
                rows.append(p); cols.append(grid.index(i + 1, j)); vals.append(c)
                diag -= c
            else:
                # second-order one-sided face derivative (H[-2] - 9 H[-1]) / (3 h_r) with h(1) = 0
                c = lam_face_r[n_r, j] * r_out * ht / hr
                diag -= 3.0 * c
                rows.append(p); cols.append(grid.index(i - 1, j)); vals.append(c / 3.0)
            # angular faces
            for dj, lam in ((1, lam_face_t[i, j]), (-1, lam_face_t[i, (j - 1) % n_t])):
                c = lam * hr / (r[i] * ht)
                rows.append(p); cols.append(grid.index(i, j + dj)); vals.append(c)
                diag -= c
            rows.append(p); cols.append(p); vals.append(diag)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n_r * n_t, n_r * n_t))


def _solve(A, b):
    try:
        x = spsolve(A.tocsc(), b)
    except RuntimeError as exc:
        raise OracleError(f"singular oracle system: {exc}") from None
    if not np.all(np.isfinite(x)):
        raise OracleError("singular oracle system")
    return x


def _boundary_flux(grid, h):
    """One-sided second-order ``d h / dr`` at r = 1 from h(1) = 0 and the two outer rings."""
    H = h.reshape(grid.n_r, grid.n_theta)
    hr = grid.h_r
    # points x = 0, -hr/2, -3hr/2 relative to r = 1
    return (H[-2] - 9.0 * H[-1]) / (3.0 * hr)


@dataclass
class FDSolution:
    grid: PolarGrid
    w: complex
    values: np.ndarray     # g* at nodes
    regular: np.ndarray    # discretized regular part
    flux: np.ndarray       # d_n g* at r = 1, theta_j
    scale: float = 1.0     # g* = scale * g_w + regular

    def interpolate(self, z):
        """g* at interior points: analytic singular part plus bilinear regular part."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        g = self.grid
        R = self.regular.reshape(g.n_r, g.n_theta)
        # pad: axis value = ring-0 mean, boundary value 0
        rr = np.concatenate([[0.0], g.r, [1.0]])
        Rp = np.vstack([np.full(g.n_theta, R[0].mean()), R, np.zeros(g.n_theta)])
        Rp = np.hstack([Rp, Rp[:, :1]])
        tt = np.append(g.theta, TWO_PI)
        rad = np.abs(z)
        th = np.mod(np.angle(z), TWO_PI)
        i = np.clip(np.searchsorted(rr, rad) - 1, 0, len(rr) - 2)
        j = np.clip(np.searchsorted(tt, th) - 1, 0, len(tt) - 2)
        a = (rad - rr[i]) / (rr[i + 1] - rr[i])
        b = (th - tt[j]) / (tt[j + 1] - tt[j])
        reg = ((1 - a) * (1 - b) * Rp[i, j] + a * (1 - b) * Rp[i + 1, j]
               + (1 - a) * b * Rp[i, j + 1] + a * b * Rp[i + 1, j + 1])
        return self.scale * _disk_green(z, self.w) + reg


def _analytic_flux(grid, w):
    zeta = np.exp(1j * grid.theta)
    return (1 - abs(w) ** 2) / (TWO_PI * np.abs(zeta - w) ** 2)


def fd_green(grid: PolarGrid, potential, w) -> FDSolution:
    """Green function of ``Laplacian - V`` with V = eps u given at the nodes (or callable).

    Solves ``Laplacian h - V h = V g_w``, ``h = 0`` at r = 1, and returns
    ``g* = g_w + h``.
    """
    w = complex(w)
    if abs(w) >= 1:
        raise OracleError("w must lie inside the unit disk")
    V = potential(grid.nodes) if callable(potential) else np.asarray(potential, dtype=float)
    V = np.broadcast_to(V, grid.nodes.shape).astype(float)
    g = _green_on_grid(grid, w)
    area = grid.cell_area.ravel()
    A = _operator(grid) - sp.diags(V * area)
    h = _solve(A, V * g * area)
    flux = _analytic_flux(grid, w) + _boundary_flux(grid, h)
    return FDSolution(grid, w, g + h, h, flux)


def fd_beltrami_green(grid: PolarGrid, lam, w) -> FDSolution:
    """Green function of ``div(lam grad)`` for a callable conductivity ``lam``.

    With ``g* = g_w / lam(w) + h``, the regular part solves
    ``div(lam grad h) = -div((lam - lam(w)) grad g_w) / lam(w)``; the right side
    is assembled from analytic face fluxes of g_w (the factor lam - lam(w)
    removes the singularity at w). Coefficients are sampled at face midpoints.
    """
    w = complex(w)
    if abs(w) >= 1:
        raise OracleError("w must lie inside the unit disk")
    n_r = grid.n_r
    hr, ht = grid.h_r, grid.h_theta
    rf = np.arange(n_r + 1) * hr
    tf = grid.theta + ht / 2
    zr = rf[:, None] * np.exp(1j * grid.theta)[None, :]
    zt = grid.r[:, None] * np.exp(1j * tf)[None, :]
    lam_r, lam_t = lam(zr), lam(zt)
    lam_w = float(lam(np.array([w]))[0])
    if np.any(lam_r <= 0) or np.any(lam_t <= 0):
        raise OracleError("conductivity must be positive")

    def grad_g(z):
        # complex gradient g_x + i g_y of the disk Green function
        with np.errstate(divide="ignore", invalid="ignore"):
            return (1 / np.conj(z - w) + w / np.conj(1 - np.conj(w) * z)) / TWO_PI

    with np.errstate(invalid="ignore"):
        er = np.exp(1j * grid.theta)[None, :]
        flux_r = ((lam_r - lam_w) * (np.conj(er) * grad_g(zr)).real) * rf[:, None] * ht
        et = 1j * np.exp(1j * tf)[None, :]
        flux_t = ((lam_t - lam_w) * (np.conj(et) * grad_g(zt)).real) * hr
    flux_r = np.nan_to_num(flux_r)
    flux_t = np.nan_to_num(flux_t)
    div = (flux_r[1:] - flux_r[:-1]) + (flux_t - np.roll(flux_t, 1, axis=1))
    A = _operator(grid, lam_r, lam_t)
    h = _solve(A, -div.ravel() / lam_w)
    g = _green_on_grid(grid, w)
    return FDSolution(grid, w, g / lam_w + h, h, _analytic_flux(grid, w) / lam_w + _boundary_flux(grid, h),
                      scale=1.0 / lam_w)


def bessel_I0(x) -> float:
    """Modified Bessel function I_0 by its power series, for 0 <= x <= 5."""
    x = float(x)
    if not 0.0 <= x <= 5.0:
        raise OracleError(f"bessel_I0 oracle only valid on [0, 5], got {x}")
    q = (x / 2.0) ** 2
    term, total, k = 1.0, 1.0, 0
    while term > 1e-16 * total:
        k += 1
        term *= q / (k * k)
        total += term
    return total


def bessel_flux(eps) -> float:
    """Boundary flux ``1 / (2 pi I_0(sqrt eps))`` of the Green function of Laplacian - eps at 0."""
    return 1.0 / (TWO_PI * bessel_I0(np.sqrt(eps)))


def radial_growth_rate(R, eps) -> float:
    """dR/dt for a disk of radius R growing under Laplacian - eps from its centre."""
    return 1.0 / (TWO_PI * R * bessel_I0(np.sqrt(eps) * R))


def radial_bvp(F, n=200, tol=1e-10):
    """Solve ``s'' + s'/r = F(r)``, ``s'(0) = 0``, ``s(1) = 0``; returns the solution callable."""
    r = np.linspace(0.0, 1.0, n)
    S = np.array([[0.0, 0.0], [0.0, -1.0]])

    def rhs(x, y):
        return np.vstack([y[1], F(x) * np.ones_like(x)])

    def bc(ya, yb):
        return np.array([ya[1], yb[0]])

    sol = solve_bvp(rhs, bc, r, np.zeros((2, n)), S=S, tol=tol, max_nodes=100000)
    if not sol.success:
        raise OracleError(f"radial BVP failed: {sol.message}")
    return lambda x: sol.sol(x)[0]


def radial_poisson_moment(f, g=None):
    """``int_D f(|z|) g_0(z) P(z, zeta) dA`` on the unit disk for radial f.

    Averaging P over angles gives 1, so this is ``int_0^1 f(r) (log r / 2pi) r dr``.
    With ``g`` supplied the Green factor is replaced by ``g(r)``.
    """
    g = g or (lambda r: np.log(r) / TWO_PI)
    val, _ = quad(lambda r: f(r) * g(r) * r, 0.0, 1.0, limit=200, epsabs=1e-14, epsrel=1e-13)
    return val
