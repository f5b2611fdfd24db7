"""Planar domains with smooth boundary.

Three kinds of domain are supported:

* ``UnitDisk``: the unit disk, where every kernel has a closed form.
* ``ConformalImage``: the image of the unit disk under a polynomial map
  ``phi(w) = c1*w + ... + cm*w**m``. Green functions and Poisson kernels are
  transported from the disk.
* ``MarkerCurve``: a closed curve given by an ordered list of marker points,
  used by the growth simulation. The boundary is the trigonometric
  interpolant of the markers.

Points are complex numbers throughout. Boundary parameters ``t`` run over
``[0, 2*pi)`` counter-clockwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainSpecError, GeometryError

TWO_PI = 2.0 * np.pi


class BoundarySample(NamedTuple):
    t: float
    position: complex
    normal: complex
    ds: float


@dataclass(frozen=True)
class BoundaryRule:
    """Equispaced-in-parameter boundary nodes with trapezoid arclength weights.

    ``preimage`` holds the unit-circle points ``exp(i t)`` mapped to the
    nodes for disk and conformal domains, and is ``None`` for marker curves.
    """

    t: np.ndarray
    z: np.ndarray
    normal: np.ndarray
    ds: np.ndarray
    preimage: np.ndarray | None = None

    def __len__(self):
        return len(self.t)

    def __getitem__(self, i):
        return BoundarySample(float(self.t[i]), complex(self.z[i]),
                              complex(self.normal[i]), float(self.ds[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def length(self):
        return float(np.sum(self.ds))

    def integrate(self, values):
        return float(np.dot(self.ds, np.asarray(values, dtype=float)))


def _parameters(n):
    if n < 4 or n % 2:
        raise ValueError(f"boundary node count must be even and >= 4, got {n}")
    return TWO_PI * np.arange(n) / n


class Domain:
    kind: str = ""

    def boundary_samples(self, n: int) -> BoundaryRule:
        raise NotImplementedError

    def contains(self, z):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    @property
    def area(self) -> float:
        raise NotImplementedError


class UnitDisk(Domain):
    kind = "disk"

    # the disk is its own conformal image under the identity; sharing this
    # interface lets kernels and area rules treat both cases uniformly
    coeffs = np.array([1.0 + 0j])

    def map(self, w):
        return np.asarray(w, dtype=complex)

    def deriv(self, w):
        return np.ones_like(np.asarray(w, dtype=complex))

    def to_disk(self, z):
        return np.asarray(z, dtype=complex)

    def boundary_samples(self, n):
        t = _parameters(n)
        e = np.exp(1j * t)
        return BoundaryRule(t, e.copy(), e.copy(), np.full(n, TWO_PI / n), e)

    def contains(self, z):
        inside = np.abs(np.asarray(z)) < 1.0
        return bool(inside) if inside.ndim == 0 else inside

    @property
    def area(self):
        return np.pi

    def to_dict(self):
        return {"type": "disk"}

    def __repr__(self):
        return "UnitDisk()"


class ConformalImage(Domain):
    """Image of the unit disk under ``phi(w) = sum_k c_k w**k``, k = 1..m.

    ``c_1`` must be real and positive (so ``phi(0) = 0`` and ``phi'(0) > 0``)
    and ``phi'`` must not vanish on the closed disk.
    """

    kind = "conformal"

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        if c.ndim != 1 or len(c) == 0:
            raise GeometryError("conformal map needs at least one coefficient")
        if abs(c[0].imag) > 0 or c[0].real <= 0:
            raise GeometryError("leading coefficient c_1 must be real and positive")
        self.coeffs = c
        self._k = np.arange(1, len(c) + 1)
        # coefficient vectors for numpy.polyval (highest degree first)
        self._poly = np.concatenate([c[::-1], [0.0]])
        self._dpoly = (c * self._k)[::-1]
        self._check_derivative()
        self._guess_grid = None

    def _check_derivative(self, n_boundary=1024):
        """phi' has no zero on the closed disk and the image of the circle is simple.

        Together these make phi univalent on the disk.
        """
        roots = np.roots(self._dpoly) if len(self._dpoly) > 1 else np.array([])
        if roots.size and np.min(np.abs(roots)) <= 1.0 + 1e-8:
            raise GeometryError(f"phi' vanishes at {roots[np.argmin(np.abs(roots))]:.4g}, "
                                "inside the closed disk")
        t = TWO_PI * np.arange(n_boundary) / n_boundary
        check_simple_polygon(self.map(np.exp(1j * t)))

    def map(self, w):
        return np.polyval(self._poly, np.asarray(w, dtype=complex))

    def deriv(self, w):
        return np.polyval(self._dpoly, np.asarray(w, dtype=complex))

    def deriv2(self, w):
        k = self._k
        c2 = (self.coeffs * k * (k - 1))[1:][::-1]
        if len(c2) == 0:
            return np.zeros_like(np.asarray(w, dtype=complex))
        return np.polyval(c2, np.asarray(w, dtype=complex))

    @property
    def area(self):
        return float(np.pi * np.sum(self._k * np.abs(self.coeffs) ** 2))

    def boundary_samples(self, n):
        t = _parameters(n)
        e = np.exp(1j * t)
        dp = self.deriv(e)
        return BoundaryRule(t, self.map(e), e * dp / np.abs(dp),
                            np.abs(dp) * TWO_PI / n, e)

    def _initial_guess(self, z):
        if self._guess_grid is None:
            r = np.linspace(0.0, 1.0, 41)
            t = TWO_PI * np.arange(160) / 160
            w = (r[:, None] * np.exp(1j * t)[None, :]).ravel()
            self._guess_grid = (w, self.map(w))
        w, fw = self._guess_grid
        out = np.empty(z.shape, dtype=complex)
        for s in range(0, len(z), 512):
            chunk = z[s:s + 512]
            out[s:s + 512] = w[np.argmin(np.abs(chunk[:, None] - fw[None, :]), axis=1)]
        return out

    def to_disk(self, z, tol=1e-14, maxiter=60):
        """Invert ``phi`` by damped Newton iteration.

        Raises GeometryError if some point fails to converge.
        """
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        z = z.ravel()
        w = self._initial_guess(z)
        scale = tol * max(1.0, float(np.max(np.abs(z), initial=0.0)))
        done = np.zeros(len(z), dtype=bool)
        for _ in range(maxiter):
            res = self.map(w) - z
            done = np.abs(res) <= scale
            if done.all():
                break
            step = res / self.deriv(w)
            # damp steps that would jump far outside the region where guesses live
            big = np.abs(step) > 0.5
            step[big] *= 0.5 / np.abs(step[big])
            w = np.where(done, w, w - step)
        else:
            res = self.map(w) - z
            done = np.abs(res) <= 1e3 * scale
        if not done.all():
            bad = z[~done][0]
            raise GeometryError(f"Newton inversion of phi did not converge at z={bad}")
        return w.reshape(shape)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        z = np.atleast_1d(z)
        bound = np.max(np.abs(self.map(np.exp(1j * TWO_PI * np.arange(512) / 512))))
        inside = np.zeros(z.shape, dtype=bool)
        near = np.abs(z) <= bound * 1.01
        if near.any():
            inside[near] = np.abs(self.to_disk(z[near])) < 1.0
        return bool(inside[0]) if scalar else inside

    def to_dict(self):
        return {"type": "conformal",
                "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs]}

    def __repr__(self):
        return f"ConformalImage({self.coeffs.tolist()!r})"


def _fourier_eval(coef, t, order=0):
    """Evaluate the trigonometric interpolant with FFT coefficients ``coef``."""
    n = len(coef)
    k = np.fft.fftfreq(n, 1.0 / n)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    c = coef / n
    # split the Nyquist mode symmetrically so the interpolant stays real-consistent
    kk = k.copy()
    cc = c.copy()
    if n % 2 == 0:
        kk = np.append(kk, n // 2)
        cc[n // 2] *= 0.5
        cc = np.append(cc, cc[n // 2])
        kk[n // 2] = -n // 2
    factor = (1j * kk) ** order
    return np.exp(1j * np.outer(t, kk)) @ (cc * factor)


def _segments_cross(p):
    """True if the closed polygon ``p`` has two non-adjacent crossing edges."""
    a = p
    b = np.roll(p, -1)
    n = len(p)

    def orient(u, v, w):
        return np.sign(((v - u).conj() * (w - u)).imag)

    a1, b1 = a[:, None], b[:, None]
    a2, b2 = a[None, :], b[None, :]
    d1 = orient(a1, b1, a2)
    d2 = orient(a1, b1, b2)
    d3 = orient(a2, b2, a1)
    d4 = orient(a2, b2, b1)
    cross = (d1 * d2 < 0) & (d3 * d4 < 0)
    idx = np.arange(n)
    gap = np.abs(idx[:, None] - idx[None, :])
    adjacent = (gap <= 1) | (gap == n - 1)
    return bool(np.any(cross & ~adjacent))


def winding_number(polygon, z):
    """Winding number of a closed polygon around each point of ``z``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    a = polygon[None, :] - z[:, None]
    b = np.roll(polygon, -1)[None, :] - z[:, None]
    return np.rint(np.sum(np.angle(b / a), axis=1) / TWO_PI).astype(int)


def check_simple_polygon(points):
    """Raise GeometryError unless the closed polygon is simple and counter-clockwise."""
    p = np.asarray(points, dtype=complex)
    if 0.5 * float(np.sum((p.conj() * np.roll(p, -1)).imag)) <= 0:
        raise GeometryError("marker curve must be positively oriented")
    if np.any(np.abs(np.roll(p, -1) - p) <= 0):
        raise GeometryError("marker curve has repeated consecutive points")
    if _segments_cross(p):
        raise GeometryError("marker curve self-intersects")


class MarkerCurve(Domain):
    """Closed curve through ordered marker points (counter-clockwise)."""

    kind = "curve"

    def __init__(self, points, check=True):
        p = np.asarray(points, dtype=complex).ravel()
        if len(p) < 8:
            raise GeometryError("marker curve needs at least 8 points")
        self.points = p
        self._coef = np.fft.fft(p)
        if check:
            self.validate()

    def validate(self):
        p = self.points
        check_simple_polygon(p)
        h = np.abs(np.roll(p, -1) - p)
        mean = h.mean()
        if h.max() > 3 * mean or h.min() < mean / 3:
            raise GeometryError("marker spacing varies by more than a factor 3 from the mean")

    def __len__(self):
        return len(self.points)

    def signed_polygon_area(self):
        p = self.points
        return 0.5 * float(np.sum((p.conj() * np.roll(p, -1)).imag))

    def curve(self, t, order=0):
        """Trigonometric interpolant of the markers (or its derivative) at ``t``."""
        n = len(self.points)
        t = np.asarray(t, dtype=float)
        if t.shape == (n,) and np.array_equal(t, TWO_PI * np.arange(n) / n):
            return self._on_nodes(order)
        return _fourier_eval(self._coef, t, order)

    def _on_nodes(self, order):
        cache = self.__dict__.setdefault("_node_cache", {})
        if order not in cache:
            n = len(self.points)
            k = np.fft.fftfreq(n, 1.0 / n)
            c = self._coef * (1j * k) ** order
            if n % 2 == 0:
                # the split Nyquist pair contributes (i n/2)^order at the nodes for even order only
                c[n // 2] = self._coef[n // 2] * (0.0 if order % 2 else (-1.0) ** (order // 2) * (n / 2) ** order)
            cache[order] = np.fft.ifft(c) if order else self.points.copy()
        return cache[order].copy()

    @property
    def area(self):
        n = len(self.points)
        t = TWO_PI * np.arange(n) / n
        z, dz = self.points, self.curve(t, 1)
        return 0.5 * float(np.sum((z.conj() * dz).imag)) * TWO_PI / n

    @property
    def perimeter(self):
        n = len(self.points)
        return float(np.sum(np.abs(self.curve(TWO_PI * np.arange(n) / n, 1)))) * TWO_PI / n

    def boundary_samples(self, n):
        t = _parameters(n)
        if n == len(self.points):
            z = self.points.copy()
        else:
            z = self.curve(t)
        dz = self.curve(t, 1)
        speed = np.abs(dz)
        return BoundaryRule(t, z, -1j * dz / speed, speed * TWO_PI / n)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        inside = winding_number(self.points, np.atleast_1d(z)) != 0
        return bool(inside[0]) if scalar else inside

    def is_star_shaped(self, center, n=None):
        n = n or 4 * len(self.points)
        t = TWO_PI * np.arange(n) / n
        z, dz = self.curve(t), self.curve(t, 1)
        return bool(np.all(((z - center).conj() * dz).imag > 0))

    def centroid(self):
        p = self.points
        q = np.roll(p, -1)
        cr = (p.conj() * q).imag
        return complex(np.sum((p + q) * cr) / (3.0 * np.sum(cr)))

    def to_dict(self):
        return {"type": "curve",
                "points": [[float(p.real), float(p.imag)] for p in self.points]}

    def __repr__(self):
        return f"MarkerCurve(<{len(self.points)} points>)"


def circle_curve(n, radius=1.0, center=0j):
    t = TWO_PI * np.arange(n) / n
    return MarkerCurve(center + radius * np.exp(1j * t))


def boundary_samples(domain: Domain, n: int) -> BoundaryRule:
    return domain.boundary_samples(n)


def contains(domain: Domain, z):
    return domain.contains(z)


def _pairs(value, field):
    """Complex numbers from ``[x, y]`` pairs; a bare real number is read as ``[x, 0]``."""
    if not isinstance(value, list) or not value:
        raise DomainSpecError(field, "expected a non-empty list of [x, y] pairs")
    out = []
    for i, item in enumerate(value):
        if isinstance(item, (int, float)) and not isinstance(item, bool):
            out.append(complex(item))
            continue
        if (not isinstance(item, (list, tuple)) or len(item) != 2
                or not all(isinstance(v, (int, float)) for v in item)):
            raise DomainSpecError(f"{field}[{i}]", "expected a pair of numbers")
        out.append(complex(item[0], item[1]))
    return out


def domain_from_dict(doc) -> Domain:
    if not isinstance(doc, dict):
        raise DomainSpecError("domain", "expected an object")
    kind = doc.get("type")
    if kind == "disk":
        return UnitDisk()
    builders = {"conformal": (ConformalImage, "coeffs"), "curve": (MarkerCurve, "points")}
    if kind not in builders:
        raise DomainSpecError("type", f"unknown domain type {kind!r}")
    cls, field = builders[kind]
    values = _pairs(doc.get(field), field)
    try:
        return cls(values)
    except DomainSpecError:
        raise
    except GeometryError as exc:
        raise DomainSpecError(field, str(exc)) from None


def domain_to_dict(domain: Domain) -> dict:
    return domain.to_dict()


def load_domain(path) -> Domain:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DomainSpecError("document", f"not valid JSON ({exc})") from None
    return domain_from_dict(doc)


def save_domain(domain: Domain, path):
    with open(path, "w") as fh:
        json.dump(domain.to_dict(), fh)
