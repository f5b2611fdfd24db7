"""Green function and Poisson kernel of the Laplacian.

Sign convention: ``Laplacian g_w = delta_w`` with ``g_w = 0`` on the boundary,
so ``g <= 0`` inside, the Poisson kernel ``P(z, zeta) = d/dn g_z(zeta)`` is
nonnegative and integrates to 1 over the boundary. On the unit disk
``g(z, 0) = log|z| / 2pi``.

Disk and conformal domains use closed forms, transported through the map for
conformal images. Marker curves use the method of fundamental solutions
(MFS): one charge per marker, pushed out along the normal, fitted by
truncated-SVD least squares.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, KernelError, SingularityError
from .geometry import TWO_PI, BoundaryRule, ConformalImage, Domain, MarkerCurve, UnitDisk
from .quadrature import AreaRule, FieldSample, mobius_deriv, mobius_inverse

MFS_OFFSET = 4.0
MFS_FALLBACK_OFFSETS = (2.0, 1.0)   # tried in turn when the default offset fails the residual check
SVD_CUTOFF = 1e-12
MFS_TOL = 1e-5


def disk_green(a, b):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return (np.log(np.abs(a - b)) - np.log(np.abs(1.0 - np.conj(b) * a))) / TWO_PI


def disk_poisson(a, beta):
    a = np.asarray(a, dtype=complex)
    return (1.0 - np.abs(a) ** 2) / (TWO_PI * np.abs(beta - a) ** 2)


class MFSFit:
    """Harmonic fits on a marker curve by fundamental solutions.

    A harmonic function is represented as ``sum_j q_j log|z - y_j| / 2pi + q_0``
    with charges ``y_j`` offset outward from each marker by ``offset`` times
    the local marker spacing.
    """

    def __init__(self, curve: MarkerCurve, offset=MFS_OFFSET, cutoff=SVD_CUTOFF):
        self.curve = curve
        self.boundary = curve.boundary_samples(len(curve))
        b = self.boundary
        self.charges = b.z + offset * b.ds * b.normal
        if np.any(curve.contains(self.charges)):
            raise KernelError("MFS charges fell inside the curve; curvature too high for the marker spacing")
        B = self.basis(b.z)
        U, s, Vt = np.linalg.svd(B, full_matrices=False)
        keep = s > cutoff * s[0]
        self.rank = int(keep.sum())
        self._pinv = (Vt[keep].T / s[keep]) @ U[:, keep].T

    def basis(self, z):
        z = np.asarray(z, dtype=complex).ravel()
        out = np.empty((len(z), len(self.charges) + 1))
        out[:, :-1] = np.log(np.abs(z[:, None] - self.charges[None, :])) / TWO_PI
        out[:, -1] = 1.0
        return out

    def basis_dn(self, zeta, normal):
        d = np.asarray(zeta, dtype=complex).ravel()[:, None] - self.charges[None, :]
        nrm = np.asarray(normal, dtype=complex).ravel()[:, None]
        out = np.zeros((d.shape[0], len(self.charges) + 1))
        out[:, :-1] = (np.conj(nrm) * d).real / (TWO_PI * np.abs(d) ** 2)
        return out

    def fit(self, boundary_values):
        """Coefficients of the harmonic function with the given trace on the markers."""
        return self._pinv @ boundary_values

    def source_coefficients(self, w):
        """Coefficients cancelling the trace of ``log|z - w| / 2pi`` for each source."""
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        rhs = -np.log(np.abs(self.boundary.z[:, None] - w[None, :])) / TWO_PI
        return self.fit(rhs)


class GreenKernel:
    """Green data for one domain.

    ``method`` is ``"exact-disk"``, ``"conformal-transport"`` or ``"mfs"``.
    """

    def __init__(self, domain: Domain, mfs_offset=None):
        self.domain = domain
        if isinstance(domain, UnitDisk):
            self.method = "exact-disk"
            self.mfs = None
        elif isinstance(domain, ConformalImage):
            self.method = "conformal-transport"
            self.mfs = None
        elif isinstance(domain, MarkerCurve):
            self.method = "mfs"
            offsets = (MFS_OFFSET,) + MFS_FALLBACK_OFFSETS if mfs_offset is None else (mfs_offset,)
            for k, off in enumerate(offsets):
                try:
                    self.mfs = MFSFit(domain, off)
                    self._check_mfs()
                    break
                except KernelError:
                    if k == len(offsets) - 1:
                        raise
        else:
            raise TypeError(f"unsupported domain {domain!r}")

    def _check_mfs(self):
        c = self.domain.centroid()
        if not self.domain.contains(c):
            c = self.domain.points[0] - 0.5 * self.mfs.boundary.ds[0] * self.mfs.boundary.normal[0]
        t = TWO_PI * (np.arange(len(self.domain)) + 0.5) / len(self.domain)
        mid = self.domain.curve(t)
        resid = np.max(np.abs(self.green(mid, c, check=False)))
        if not np.isfinite(resid) or resid > MFS_TOL:
            raise KernelError(f"MFS fit leaves boundary residual {resid:.3g}")

    # -- point preimages -------------------------------------------------
    def _to_disk(self, z):
        return self.domain.to_disk(z)

    def _check_closed(self, a, what):
        if np.any(np.abs(a) > 1.0 + 1e-10):
            raise DomainError(f"{what} lies outside the domain")

    def _check_open(self, a, what):
        if np.any(np.abs(a) >= 1.0):
            raise DomainError(f"{what} must lie strictly inside the domain")

    def _curve_check(self, z, what, closed):
        z = np.atleast_1d(z)
        inside = self.domain.contains(z)
        if closed and not inside.all():
            d = np.min(np.abs(z[~inside][:, None] - self.domain.curve(
                TWO_PI * np.arange(4 * len(self.domain)) / (4 * len(self.domain)))[None, :]), axis=1)
            inside_ok = d < 1e-3 * np.mean(self.mfs.boundary.ds)
            if not inside_ok.all():
                raise DomainError(f"{what} lies outside the domain")
        elif not closed and not inside.all():
            raise DomainError(f"{what} must lie strictly inside the domain")

    # -- Green function ----------------------------------------------------
    def green(self, z, w, check=True):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        if check and np.any(np.broadcast_to(z == w, np.broadcast(z, w).shape)):
            raise SingularityError("green(z, w) evaluated at z == w")
        if self.method == "mfs":
            if check:
                self._curve_check(z, "z", closed=True)
                self._curve_check(w, "w", closed=False)
            zb, wb = np.broadcast_arrays(z, w)
            shape = zb.shape
            zf, wf = zb.ravel(), wb.ravel()
            uw, inv = np.unique(wf, return_inverse=True)
            Q = self.mfs.source_coefficients(uw)
            B = self.mfs.basis(zf)
            corr = np.einsum("ij,ji->i", B, Q[:, inv])
            out = np.log(np.abs(zf - wf)) / TWO_PI + corr
            return out.reshape(shape) if shape else float(out[0])
        a, b = self._to_disk(z), self._to_disk(w)
        if check:
            self._check_closed(a, "z")
            self._check_open(b, "w")
        out = disk_green(a, b)
        return out if np.ndim(out) else float(out)

    def green_matrix(self, z, w):
        """``g(z_i, w_j)`` as a (len(z), len(w)) array; no domain checks, diagonal not special-cased."""
        z = np.asarray(z, dtype=complex).ravel()
        w = np.asarray(w, dtype=complex).ravel()
        with np.errstate(divide="ignore"):
            if self.method == "mfs":
                direct = np.log(np.abs(z[:, None] - w[None, :])) / TWO_PI
                return direct + self.mfs.basis(z) @ self.mfs.source_coefficients(w)
            return disk_green(self._to_disk(z)[:, None], self._to_disk(w)[None, :])

    # -- Poisson kernel ------------------------------------------------------
    def boundary_frame(self, zeta):
        """Preimage on the unit circle and |phi'| there, or curve normals for MFS.

        ``zeta`` may be a BoundaryRule, whose stored preimages/normals are reused.
        """
        if isinstance(zeta, BoundaryRule):
            if self.method == "mfs":
                return zeta.z, zeta.normal
            return zeta.preimage, np.abs(self.domain.deriv(zeta.preimage))
        zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
        if self.method == "mfs":
            return zeta, self._curve_normal(zeta)
        om = self._to_disk(zeta)
        if np.any(np.abs(np.abs(om) - 1.0) > 1e-8):
            raise DomainError("zeta must lie on the boundary")
        om = om / np.abs(om)
        return om, np.abs(self.domain.deriv(om))

    def _curve_normal(self, zeta):
        curve = self.domain
        n = len(curve)
        tn = TWO_PI * np.arange(4 * n) / (4 * n)
        pts = curve.curve(tn)
        t = tn[np.argmin(np.abs(zeta[:, None] - pts[None, :]), axis=1)]
        for _ in range(20):
            d = curve.curve(t) - zeta
            d1, d2 = curve.curve(t, 1), curve.curve(t, 2)
            f = (np.conj(d) * d1).real
            fp = (np.conj(d1) * d1).real + (np.conj(d) * d2).real
            t = t - f / fp
        gap = np.abs(curve.curve(t) - zeta)
        if np.any(gap > 1e-6 * np.mean(self.mfs.boundary.ds)):
            raise DomainError("zeta must lie on the boundary")
        d1 = curve.curve(t, 1)
        return -1j * d1 / np.abs(d1)

    def poisson(self, z, zeta):
        """Poisson kernel ``P(z, zeta)``, broadcasting ``z`` against ``zeta``."""
        z = np.asarray(z, dtype=complex)
        if self.method == "mfs":
            self._curve_check(z, "z", closed=False)
            zb, pb = np.broadcast_arrays(z, np.asarray(zeta, dtype=complex))
            shape = zb.shape
            zf, pf = zb.ravel(), pb.ravel()
            nrm = self._curve_normal(pf)
            uz, inv = np.unique(zf, return_inverse=True)
            Q = self.mfs.source_coefficients(uz)
            D = self.mfs.basis_dn(pf, nrm)
            d = pf - zf
            out = (np.conj(nrm) * d).real / (TWO_PI * np.abs(d) ** 2)
            out = out + np.einsum("ij,ji->i", D, Q[:, inv])
            return out.reshape(shape) if shape else float(out[0])
        a = self._to_disk(z)
        self._check_open(a, "z")
        zeta = np.asarray(zeta, dtype=complex)
        om, dphi = self.boundary_frame(zeta.ravel())
        om = om.reshape(zeta.shape)
        dphi = dphi.reshape(zeta.shape)
        out = disk_poisson(a, om) / dphi
        return out if np.ndim(out) else float(out)

    def poisson_matrix(self, z, boundary: BoundaryRule):
        """``P(z_j, zeta_i)`` as an array of shape (len(boundary), len(z))."""
        z = np.asarray(z, dtype=complex).ravel()
        if self.method == "mfs":
            Q = self.mfs.source_coefficients(z)
            D = self.mfs.basis_dn(boundary.z, boundary.normal)
            d = boundary.z[:, None] - z[None, :]
            direct = (np.conj(boundary.normal)[:, None] * d).real / (TWO_PI * np.abs(d) ** 2)
            return direct + D @ Q
        a = self._to_disk(z)
        om, dphi = self.boundary_frame(boundary)
        return disk_poisson(a[None, :], om[:, None]) / dphi[:, None]


def make_kernel(domain: Domain) -> GreenKernel:
    return GreenKernel(domain)


def green(kernel: GreenKernel, z, w):
    return kernel.green(z, w)


def poisson(kernel: GreenKernel, z, zeta):
    return kernel.poisson(z, zeta)


def green_on_rule(kernel: GreenKernel, rule: AreaRule, w):
    """``g(z_j, w)`` on the rule nodes, using exact reference coordinates when possible."""
    w = complex(w)
    if rule.layout == "polar":
        if rule.center is not None and rule.center == w:
            r = rule.radii[:, None] * np.ones(rule.n_angular)[None, :]
            return (np.log(r) / TWO_PI).ravel()
        b = kernel.domain.to_disk(w)
        return disk_green(rule.preimage, b)
    return kernel.green(rule.nodes, w, check=False)


def mean_green(kernel: GreenKernel, w):
    """``int_D g(z, w) dA(z)``, i.e. the solution of Laplacian s = 1, s = 0 on the boundary, at w.

    Closed form on disk/conformal domains; on marker curves ``|z - c|^2 / 4``
    plus an MFS harmonic correction. Accepts scalar or array ``w``.
    """
    wa = np.asarray(w, dtype=complex)
    flat = wa.ravel()
    if kernel.method == "mfs":
        c = kernel.domain.centroid()
        bz = kernel.mfs.boundary.z
        coef = kernel.mfs.fit(-np.abs(bz - c) ** 2 / 4.0)
        out = np.abs(flat - c) ** 2 / 4.0 + kernel.mfs.basis(flat) @ coef
    else:
        b = np.asarray(kernel.domain.to_disk(flat), dtype=complex)
        c = kernel.domain.coeffs
        total = np.zeros(len(flat), dtype=complex)
        rb = np.abs(b) ** 2
        for j in range(1, len(c) + 1):
            for k in range(1, len(c) + 1):
                if j >= k:
                    term = b ** (j - k) * (rb ** k - 1.0)
                else:
                    term = np.conj(b) ** (k - j) * (rb ** j - 1.0)
                total += c[j - 1] * np.conj(c[k - 1]) * term
        out = total.real / 4.0
    return out.reshape(wa.shape) if wa.ndim else float(out[0])


def _bandlimited_poisson(r, alpha, n):
    """Truncated disk Poisson kernel ``P_N(r_j, alpha_i - 2 pi l / n)``, shape (len(alpha), len(r), n).

    Integrating a trigonometric polynomial of degree < n/2 against it on the
    n-point trapezoid grid is exact, so near-boundary rings lose no accuracy.
    """
    k = np.fft.fftfreq(n, 1.0 / n)
    m = np.abs(k)
    with np.errstate(under="ignore"):
        c = r[None, :, None] ** m[None, None, :] * np.exp(1j * k[None, None, :] * alpha[:, None, None])
        nyq = n // 2
        c[:, :, nyq] = r[None, :] ** nyq * np.cos(nyq * alpha)[:, None]
    return np.fft.fft(c, axis=-1).real / TWO_PI


def poisson_weights(kernel: GreenKernel, rule: AreaRule, zeta) -> np.ndarray:
    """Weights ``W`` with ``W @ F ~= int_D F(z) P(z, zeta_i) dA(z)`` for each boundary point.

    ``zeta`` is a BoundaryRule or an array of boundary points. Returns an array
    of shape (n_zeta, len(rule)).
    """
    if rule.layout != "polar":
        bnd = zeta if isinstance(zeta, BoundaryRule) else None
        if bnd is None:
            zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
            P = kernel.poisson(rule.nodes[None, :], zeta[:, None])
        else:
            P = kernel.poisson_matrix(rule.nodes, bnd)
        return P * rule.weights[None, :]
    om, dphi = kernel.boundary_frame(zeta)
    b = rule.mobius
    beta = mobius_inverse(om, b)
    beta = beta / np.abs(beta)
    scale = dphi * np.abs(mobius_deriv(beta, b))
    alpha = np.angle(beta)
    n_r, n_t = rule.shape
    out = np.empty((len(alpha), len(rule)))
    step = max(1, 4_000_000 // (n_r * n_t))
    for s in range(0, len(alpha), step):
        PN = _bandlimited_poisson(rule.radii, alpha[s:s + step], n_t).reshape(-1, n_r * n_t)
        out[s:s + step] = PN * rule.weights[None, :] / scale[s:s + step, None]
    return out


def poisson_integral(kernel: GreenKernel, field: FieldSample, zeta):
    """``int_D F(z) P(z, zeta) dA(z)`` for each boundary point."""
    W = poisson_weights(kernel, field.rule, zeta)
    return W @ field.values


def _sample_boundary(kernel, f, n_default=256):
    if callable(f):
        n = len(kernel.domain) if kernel.method == "mfs" else n_default
        bnd = kernel.domain.boundary_samples(n)
        return bnd, np.asarray(f(bnd.z), dtype=float) * np.ones(n)
    f = np.asarray(f, dtype=float)
    return kernel.domain.boundary_samples(len(f)), f


def harmonic_extension(kernel: GreenKernel, f, z):
    """Poisson integral of boundary data ``f`` evaluated at interior points ``z``.

    ``f`` is a callable on the boundary, or samples at the nodes of
    ``boundary_samples(domain, len(f))``. On disk/conformal domains the
    integral is evaluated exactly for band-limited data (Fourier series in the
    disk preimage); on marker curves the data are fitted with the MFS basis.
    """
    bnd, f = _sample_boundary(kernel, f)
    z = np.asarray(z, dtype=complex)
    if kernel.method == "mfs":
        if len(f) == len(kernel.domain):
            coef = kernel.mfs.fit(f)
            out = kernel.mfs.basis(z.ravel()) @ coef
        else:
            P = kernel.poisson(z.ravel()[None, :], bnd.z[:, None])
            out = (f * bnd.ds) @ P
        return out.reshape(z.shape) if z.ndim else float(out[0])
    om = kernel.domain.to_disk(z)
    kernel._check_open(om, "z")
    out = disk_harmonic(np.fft.fft(f), om)
    return out if np.ndim(out) else float(out)


def disk_harmonic(coef, om):
    """Harmonic extension into the disk of the trigonometric interpolant with FFT ``coef``."""
    n = len(coef)
    om = np.asarray(om, dtype=complex)
    flat = om.ravel()
    k = np.fft.fftfreq(n, 1.0 / n)
    c = coef / n
    r = np.abs(flat)
    th = np.angle(flat)
    m = np.abs(k)
    c = c.copy()
    c[n // 2] = 0.5 * c[n // 2]
    terms = np.exp(1j * np.outer(th, k)) * r[:, None] ** m[None, :]
    vals = terms @ c
    # mirrored Nyquist half
    vals = vals + c[n // 2] * r ** (n // 2) * np.exp(1j * (n // 2) * th)
    return vals.real.reshape(om.shape)


def normal_derivative_via_lemma(kernel: GreenKernel, lap_f: FieldSample, zeta):
    """Outward normal derivative of ``f`` (zero on the boundary) from its Laplacian.

    Evaluates ``d f/dn (zeta) = int_D (Laplacian f)(z) P(z, zeta) dA(z)``.
    """
    out = poisson_integral(kernel, lap_f, zeta)
    return float(out[0]) if np.ndim(zeta) == 0 and not isinstance(zeta, BoundaryRule) else out
