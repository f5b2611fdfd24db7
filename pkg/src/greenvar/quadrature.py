"""Area quadrature on domains, with the logarithmic singularity of g_w in mind.

Disk and conformal domains get a tensor rule built in *reference
coordinates* ``a`` on the unit disk: Gauss-Legendre in a graded radius
``r = s**grading`` times the trapezoid rule in angle. The reference disk is
carried to the physical domain by ``Phi = phi o M_b`` where ``M_b`` is the
disk automorphism sending 0 to ``b = phi^{-1}(w)``. Because ``g_w(Phi(a))``
is exactly ``log|a| / 2pi``, the singular point sits at the polar origin of
the rule, and the radial grading makes ``r log r`` integrands smooth in
``s``.

Marker curves use the same polar layout on the "star blend"
``z = c + r (Z(t) - c)`` when the curve is star-shaped about the centre
``c``, and fall back to a centroid rule on a triangulation otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay

from .errors import QuadratureError, ShapeError
from .geometry import TWO_PI, ConformalImage, Domain, MarkerCurve, UnitDisk

GRADING = 3


@dataclass(frozen=True, eq=False)
class AreaRule:
    """Area quadrature nodes and positive weights.

    ``layout`` is one of ``"polar"`` (disk/conformal reference-disk rule),
    ``"blend"`` (star blend on a marker curve) or ``"triangles"``. For the
    two polar layouts, nodes are stored ring by ring, shape ``(n_radial,
    n_angular)`` flattened in C order.
    """

    domain: Domain
    nodes: np.ndarray
    weights: np.ndarray
    center: complex | None
    layout: str
    shape: tuple[int, int] | None = None
    s: np.ndarray | None = None          # graded radial variable (GL nodes on [0, 1])
    radii: np.ndarray | None = None      # r = s**grading
    radial_weights: np.ndarray | None = None  # GL weight * dr/ds * r
    ref: np.ndarray | None = None        # reference-disk coordinates a (polar layout)
    jac2: np.ndarray | None = None       # |Phi'(a)|^2 (polar layout)
    preimage: np.ndarray | None = None   # phi^{-1}(node) = M_b(a) (polar layout)
    mobius: complex = 0j                 # b
    grading: int = GRADING
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.nodes)

    @property
    def n_radial(self):
        return self.shape[0]

    @property
    def n_angular(self):
        return self.shape[1]

    def integrate(self, values):
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))

    def sample(self, f):
        """Values of ``f`` on the nodes (``f`` callable on complex arrays, or already sampled)."""
        if callable(f):
            vals = np.asarray(f(self.nodes), dtype=float)
            if vals.ndim == 0:
                vals = np.full(len(self.nodes), float(vals))
            return vals
        vals = np.asarray(f, dtype=float)
        if vals.shape != self.nodes.shape:
            raise ShapeError(f"field has shape {vals.shape}, rule has {self.nodes.shape}")
        return vals


@dataclass(frozen=True, eq=False)
class FieldSample:
    """Scalar field values on the nodes of an area rule."""

    rule: AreaRule
    values: np.ndarray

    @classmethod
    def from_function(cls, rule, f):
        return cls(rule, rule.sample(f))

    def __post_init__(self):
        if np.shape(self.values) != self.rule.nodes.shape:
            raise ShapeError(f"field has shape {np.shape(self.values)}, "
                             f"rule has {self.rule.nodes.shape}")

    def integral(self):
        return self.rule.integrate(self.values)

    def __mul__(self, other):
        if isinstance(other, FieldSample):
            _same_rule(self, other)
            return FieldSample(self.rule, self.values * other.values)
        return FieldSample(self.rule, self.values * other)

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, FieldSample):
            _same_rule(self, other)
            return FieldSample(self.rule, self.values + other.values)
        return FieldSample(self.rule, self.values + other)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __neg__(self):
        return FieldSample(self.rule, -self.values)


def _same_rule(a, b):
    if a.rule is not b.rule:
        raise ShapeError("field samples live on different area rules")


def mobius(a, b):
    """Disk automorphism sending 0 to ``b``."""
    return (a + b) / (1.0 + np.conj(b) * a)


def mobius_inverse(z, b):
    return (z - b) / (1.0 - np.conj(b) * z)


def mobius_deriv(a, b):
    return (1.0 - abs(b) ** 2) / (1.0 + np.conj(b) * a) ** 2


def graded_radial(n_radial, grading=GRADING):
    x, wx = np.polynomial.legendre.leggauss(n_radial)
    s = 0.5 * (x + 1.0)
    ws = 0.5 * wx
    r = s ** grading
    dr = grading * s ** (grading - 1) * ws
    return s, r, dr


def _disk_like(domain):
    return isinstance(domain, (UnitDisk, ConformalImage))


def area_rule(domain: Domain, n_radial: int, n_angular: int, w=None,
              grading: int = GRADING) -> AreaRule:
    """Build an area rule, polar about ``w`` when given.

    Raises QuadratureError if ``w`` is not inside the domain.
    """
    if n_radial < 8 or n_angular < 8:
        raise QuadratureError("n_radial and n_angular must both be >= 8")
    if w is not None:
        w = complex(w)
        if not domain.contains(w):
            raise QuadratureError(f"singularity point {w} lies outside the domain")
    if _disk_like(domain):
        return _polar_rule(domain, n_radial, n_angular, w, grading)
    if isinstance(domain, MarkerCurve):
        c = w if w is not None else domain.centroid()
        if domain.contains(c) and domain.is_star_shaped(c):
            return _blend_rule(domain, n_radial, n_angular, c, w, grading)
        return triangle_rule(domain, n_angular, w)
    raise TypeError(f"unsupported domain {domain!r}")


def _polar_rule(domain, n_radial, n_angular, w, grading):
    b = 0j if w is None else complex(domain.to_disk(w))
    s, r, dr = graded_radial(n_radial, grading)
    theta = TWO_PI * np.arange(n_angular) / n_angular
    a = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    om = mobius(a, b)
    z = domain.map(om)
    jac2 = (np.abs(domain.deriv(om)) * np.abs(mobius_deriv(a, b))) ** 2
    radial = dr * r
    weights = (radial[:, None] * np.full(n_angular, TWO_PI / n_angular)[None, :]).ravel() * jac2
    return AreaRule(domain, z, weights, w, "polar", (n_radial, n_angular), s, r, radial,
                    a, jac2, om, b, grading)


def _blend_rule(domain, n_radial, n_angular, c, w, grading):
    s, r, dr = graded_radial(n_radial, grading)
    t = TWO_PI * np.arange(n_angular) / n_angular
    Z = domain.curve(t)
    dZ = domain.curve(t, 1)
    J0 = ((Z - c).conj() * dZ).imag
    z = (c + r[:, None] * (Z - c)[None, :]).ravel()
    radial = dr * r
    weights = (radial[:, None] * (J0 * TWO_PI / n_angular)[None, :]).ravel()
    return AreaRule(domain, z, weights, w, "blend", (n_radial, n_angular), s, r, radial,
                    grading=grading, extra={"center": c})


def triangle_rule(domain: MarkerCurve, n_boundary: int, w=None) -> AreaRule:
    """Centroid rule on a Delaunay triangulation of the curve's interior."""
    t = TWO_PI * np.arange(n_boundary) / n_boundary
    bnd = domain.curve(t)
    h = float(np.mean(np.abs(np.roll(bnd, -1) - bnd)))
    lo = bnd.real.min(), bnd.imag.min()
    hi = bnd.real.max(), bnd.imag.max()
    xs = np.arange(lo[0] + h / 2, hi[0], h)
    ys = np.arange(lo[1] + h / 2, hi[1], h * np.sqrt(3) / 2)
    X, Y = np.meshgrid(xs, ys)
    X = X + (np.arange(len(ys))[:, None] % 2) * h / 2
    cand = (X + 1j * Y).ravel()
    cand = cand[domain.contains(cand)]
    dist = np.min(np.abs(cand[:, None] - bnd[None, :]), axis=1)
    cand = cand[dist > 0.5 * h]
    pts = np.concatenate([bnd, cand])
    tri = Delaunay(np.column_stack([pts.real, pts.imag]))
    v = pts[tri.simplices]
    cen = v.mean(axis=1)
    keep = domain.contains(cen)
    v, cen = v[keep], cen[keep]
    area = 0.5 * np.abs(((v[:, 1] - v[:, 0]).conj() * (v[:, 2] - v[:, 0])).imag)
    if w is not None and np.any(np.abs(cen - w) < 1e-12):
        raise QuadratureError("a centroid node coincides with the singularity point")
    return AreaRule(domain, cen, area, w, "triangles")


def estimate_at(rule: AreaRule, values, w):
    """Estimate a field at ``w`` from node samples (local linear fit)."""
    values = np.asarray(values, dtype=float)
    if rule.layout in ("polar", "blend") and rule.center is not None and rule.center == w:
        # innermost ring sits at radius s_1**grading, a few 1e-9 from w
        return float(np.mean(values.reshape(rule.shape)[0]))
    d = np.abs(rule.nodes - w)
    idx = np.argsort(d)[:8]
    A = np.column_stack([np.ones(len(idx)), (rule.nodes[idx] - w).real, (rule.nodes[idx] - w).imag])
    coef, *_ = np.linalg.lstsq(A, values[idx], rcond=None)
    return float(coef[0])


def integrate_with_log_singularity(rule: AreaRule, f, w, kernel=None) -> float:
    """``int_D f(z) g(z, w) dA(z)`` by singularity subtraction.

    The smooth part ``(f - f(w)) g_w`` is summed on the rule and the remainder
    ``f(w) * int_D g_w dA`` is added in closed form (see ``green.mean_green``).
    ``f`` may be a callable or node samples.
    """
    from .green import green_on_rule, make_kernel, mean_green

    kernel = kernel or make_kernel(rule.domain)
    vals = rule.sample(f)
    fw = float(np.real(f(np.asarray(w, dtype=complex)))) if callable(f) else estimate_at(rule, vals, w)
    g = green_on_rule(kernel, rule, w)
    return float(np.dot(rule.weights, (vals - fw) * g)) + fw * mean_green(kernel, w)
