"""Elliptic growth of a marker curve.

Each boundary node moves along the outward normal with speed
``V_n = d_n g*_w`` of the current domain (fixed source ``w``), integrated by
explicit Euler steps. After each step the curve is resampled to equal
arclength with a periodic cubic spline, and the node count follows the
perimeter so the marker density stays constant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .beltrami import BeltramiSetup, beltrami_solve
from .errors import GeometryError, GrowthSignError, InputError, TopologyError
from .geometry import MarkerCurve, check_simple_polygon, circle_curve, winding_number
from .green import make_kernel
from .potentials import Potential, as_callable
from .quadrature import area_rule
from .schrodinger import normal_derivative_exact, solve_series

SIGN_TOL = 1e-8
KINDS = ("laplace", "schrodinger", "beltrami")


@dataclass(frozen=True)
class OperatorSpec:
    """Which Green function drives the growth.

    ``n_radial`` is the radial resolution of the area rule used by the
    perturbed operators; the angular resolution equals the marker count.
    """

    kind: str = "laplace"
    u: Potential | None = None
    eps: float = 0.0
    n_radial: int = 16

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"operator kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind != "laplace":
            if self.u is None:
                raise InputError(f"{self.kind} growth needs a potential u")
            object.__setattr__(self, "u", as_callable(self.u))

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc or {})
        return cls(doc.get("kind", "laplace"), doc.get("u"), float(doc.get("eps", 0.0)),
                   int(doc.get("n_radial", 16)))

    def to_dict(self):
        out = {"kind": self.kind, "eps": self.eps, "n_radial": self.n_radial}
        if self.u is not None:
            out["u"] = self.u.spec()
        return out


@dataclass(frozen=True)
class GrowthState:
    t: float
    domain: MarkerCurve
    w: complex
    op: OperatorSpec
    density: float           # markers per unit length
    area: float = field(init=False)
    perimeter: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "area", float(self.domain.area))
        object.__setattr__(self, "perimeter", float(self.domain.perimeter))

    @classmethod
    def initial(cls, domain, w=0j, op=None):
        if not isinstance(domain, MarkerCurve):
            n = 256
            bnd = domain.boundary_samples(n)
            domain = MarkerCurve(resample_equal_arclength(bnd.z, n))
        op = op or OperatorSpec()
        w = complex(w)
        if not domain.contains(w):
            raise InputError("source w must lie inside the initial domain")
        return cls(0.0, domain, w, op, len(domain) / domain.perimeter)

    def to_record(self):
        pts = self.domain.points
        return {"t": self.t, "points": np.column_stack([pts.real, pts.imag]).tolist(),
                "area": self.area, "perimeter": self.perimeter}


def resample_equal_arclength(points, n, oversample=16):
    """Resample a closed polygon to ``n`` nodes equally spaced in spline arclength.

    The first point is kept in place.
    """
    p = np.asarray(points, dtype=complex)
    closed = np.append(p, p[0])
    chord = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(closed)))])
    xy = np.column_stack([closed.real, closed.imag])
    spl = CubicSpline(chord, xy, bc_type="periodic")
    m = oversample * max(n, len(p))
    s = np.linspace(0.0, chord[-1], m + 1)
    d = spl(s, 1)
    speed = np.hypot(d[:, 0], d[:, 1])
    # arclength by composite Simpson on the dense grid (pairs of intervals)
    arc = np.zeros(m + 1)
    h = s[1] - s[0]
    mid = np.hypot(*spl(s[:-1] + h / 2, 1).T)
    arc[1:] = np.cumsum(h / 6.0 * (speed[:-1] + 4 * mid + speed[1:]))
    target = np.linspace(0.0, arc[-1], n + 1)[:-1]
    s_new = np.interp(target, arc, s)
    out = spl(s_new)
    return out[:, 0] + 1j * out[:, 1]


def _even(n):
    n = int(round(n))
    return max(16, n + (n % 2))


def velocity_field(state: GrowthState) -> np.ndarray:
    """``V_n = d_n g*_w`` at each marker of ``state.domain``.

    Raises KernelError if the Green data cannot be fitted and GrowthSignError
    if some velocity is below ``-1e-8``.
    """
    curve, w, op = state.domain, state.w, state.op
    kernel = make_kernel(curve)
    bnd = curve.boundary_samples(len(curve))
    if op.kind == "laplace" or op.eps == 0.0:
        V = kernel.poisson_matrix(np.array([w]), bnd)[:, 0]
    else:
        rule = area_rule(curve, op.n_radial, len(curve), w)
        if op.kind == "schrodinger":
            sg = solve_series(curve, op.u, op.eps, w, rule=rule, kernel=kernel)
            V = normal_derivative_exact(sg, bnd)
        else:
            setup = BeltramiSetup(curve, op.u, op.eps, rule, kernel)
            V = beltrami_solve(setup, w).normal_derivative(bnd)
    if np.any(V < -SIGN_TOL):
        raise GrowthSignError(f"inward normal velocity {V.min():.3g} at t={state.t}")
    return V


def step(state: GrowthState, dt) -> GrowthState:
    """One explicit Euler step followed by arclength resampling."""
    dt = float(dt)
    if dt < 0:
        raise InputError("dt must be nonnegative")
    if dt == 0:
        return state
    V = velocity_field(state)
    bnd = state.domain.boundary_samples(len(state.domain))
    moved = bnd.z + dt * V * bnd.normal
    try:
        check_simple_polygon(moved)
    except GeometryError as exc:
        raise TopologyError(f"curve lost simplicity at t={state.t + dt}: {exc}") from None
    perim = float(np.sum(np.abs(np.roll(moved, -1) - moved)))
    n = _even(state.density * perim)
    try:
        curve = MarkerCurve(resample_equal_arclength(moved, n))
    except GeometryError as exc:
        raise TopologyError(f"resampled curve invalid at t={state.t + dt}: {exc}") from None
    if not curve.contains(state.w):
        raise TopologyError("source point left the domain")
    return replace(state, t=state.t + dt, domain=curve)


def is_nested(inner: MarkerCurve, outer: MarkerCurve) -> bool:
    """Every vertex of ``inner`` lies inside ``outer`` (winding number check)."""
    return bool(np.all(np.abs(winding_number(outer.points, inner.points)) > 0.5))


def run(initial, op: OperatorSpec | None = None, w=0j, dt=1e-3, t_end=1.0, snapshot_every=1,
        path=None):
    """Integrate to ``t_end``; returns the list of snapshot states (first and last included).

    With ``path`` set, snapshots are also appended to that file as JSON lines.
    Nesting of consecutive snapshots is checked and violations raise TopologyError.
    """
    dt = float(dt)
    if dt <= 0 and t_end > 0:
        raise InputError("dt must be positive")
    if t_end < 0:
        raise InputError("t_end must be nonnegative")
    if snapshot_every < 1:
        raise InputError("snapshot stride must be >= 1")
    state = initial if isinstance(initial, GrowthState) else GrowthState.initial(initial, w, op)
    n_steps = int(np.ceil(t_end / dt - 1e-9)) if t_end > 0 else 0
    traj = [state]
    sink = open(path, "w") if path else None
    try:
        if sink:
            sink.write(json.dumps(state.to_record()) + "\n")
        for i in range(1, n_steps + 1):
            h = min(dt, t_end - state.t) if i == n_steps else dt
            state = step(state, h)
            if i % snapshot_every == 0 or i == n_steps:
                if not is_nested(traj[-1].domain, state.domain):
                    raise TopologyError(f"snapshot at t={state.t} does not contain the previous one")
                traj.append(state)
                if sink:
                    sink.write(json.dumps(state.to_record()) + "\n")
    finally:
        if sink:
            sink.close()
    return traj


def circle_start(n=256, radius=1.0, center=0j):
    return circle_curve(n, radius, center)
