import json

import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

import greenvar.growth as growth
from greenvar.errors import GrowthSignError, InputError, TopologyError
from greenvar.geometry import ConformalImage, MarkerCurve, circle_curve
from greenvar.growth import (GrowthState, OperatorSpec, is_nested, resample_equal_arclength, run,
                             step, velocity_field)
from greenvar.oracle import radial_growth_rate


def test_unit_circle_velocity():
    V = velocity_field(GrowthState.initial(circle_curve(64), 0))
    assert np.max(np.abs(V - 1 / (2 * np.pi))) < 1e-10


def test_scaled_circle_velocity():
    V = velocity_field(GrowthState.initial(circle_curve(64, 1.7, 0.2j), 0.2j))
    assert np.max(np.abs(V - 1 / (2 * np.pi * 1.7))) < 1e-10


def test_schrodinger_velocity_tends_to_laplace():
    c = circle_curve(64)
    lap = velocity_field(GrowthState.initial(c, 0.1))
    for eps, tol in [(1e-3, 1e-4), (1e-5, 1e-6)]:
        V = velocity_field(GrowthState.initial(c, 0.1, OperatorSpec("schrodinger", "const(1)", eps)))
        assert np.max(np.abs(V - lap)) < tol


def test_schrodinger_velocity_bessel():
    for R in (1.0, 1.5):
        st = GrowthState.initial(circle_curve(64, R), 0, OperatorSpec("schrodinger", "const(1)", 0.1))
        # limited by the volume quadrature on a coarse marker-curve rule
        assert np.max(np.abs(velocity_field(st) / radial_growth_rate(R, 0.1) - 1)) < 1e-4


def test_dt_zero_identity():
    s = GrowthState.initial(circle_curve(32), 0)
    assert step(s, 0.0) is s


def test_t_end_zero():
    assert len(run(circle_curve(32), dt=0.1, t_end=0.0)) == 1


def test_bad_arguments():
    with pytest.raises(InputError):
        run(circle_curve(32), dt=0.0, t_end=1.0)
    with pytest.raises(InputError):
        GrowthState.initial(circle_curve(32), 2.0)
    with pytest.raises(InputError):
        OperatorSpec("schrodinger")
    with pytest.raises(InputError):
        OperatorSpec("hele-shaw")


def test_area_rate_laplace():
    s0 = GrowthState.initial(circle_curve(128, 1.0, 0.1), 0)
    s1 = step(s0, 1e-3)
    assert abs((s1.area - s0.area) / 1e-3 - 1) < 1e-3


def test_radius_law_coarse():
    traj = run(circle_curve(64), dt=0.01, t_end=1.0, snapshot_every=10)
    R = np.abs(traj[-1].domain.points)
    assert np.max(np.abs(R / np.sqrt(1 + 1 / np.pi) - 1)) < 1e-3
    assert [round(s.t, 10) for s in traj] == [round(0.1 * k, 10) for k in range(11)]


def test_schrodinger_growth_radial_ode():
    traj = run(circle_curve(64), OperatorSpec("schrodinger", "const(1)", 0.1, n_radial=12), 0,
               dt=0.02, t_end=1.0, snapshot_every=25)
    ode = solve_ivp(lambda t, R: radial_growth_rate(R[0], 0.1), (0, 1), [1.0], rtol=1e-10)
    R = np.mean(np.abs(traj[-1].domain.points))
    assert abs(R / ode.y[0, -1] - 1) < 5e-3


def test_beltrami_growth_radial_law():
    # lam = 1 + eps r^2: R (1 + eps R^2) dR/dt = 1/(2 pi)
    eps = 0.1
    traj = run(circle_curve(64), OperatorSpec("beltrami", "abs2", eps, n_radial=12), 0,
               dt=0.02, t_end=1.0, snapshot_every=50)
    R = np.mean(np.abs(traj[-1].domain.points))
    lhs = R ** 2 / 2 + eps * R ** 4 / 4 - (0.5 + eps / 4)
    assert abs(lhs - 1 / (2 * np.pi)) < 5e-3 / (2 * np.pi)


@pytest.mark.parametrize("op,w", [(OperatorSpec(), 0.3), (OperatorSpec("schrodinger", "const(1)", 0.2, 12), 0.3),
                                  (OperatorSpec("beltrami", "abs2", 0.2, 12), 0.0)])
def test_circle_stays_circular(op, w):
    # u is radial about w in every case
    traj = run(circle_curve(64, 1.0, w), op, w, dt=0.05, t_end=1.0)
    for s in traj:
        r = np.abs(s.domain.points - w)
        assert np.ptp(r) < 1e-4


def test_non_circular_area_rate():
    lima = ConformalImage([1, 0.2])
    traj = run(lima, OperatorSpec(), 0, dt=0.01, t_end=0.3, snapshot_every=10)
    a = np.array([s.area for s in traj])
    t = np.array([s.t for s in traj])
    assert np.max(np.abs((a - a[0]) - t)) < 2e-3 * a[0]
    for s0, s1 in zip(traj, traj[1:]):
        assert is_nested(s0.domain, s1.domain)


def test_first_order_in_dt():
    lima = ConformalImage([1, 0.2])
    areas = [run(lima, dt=dt, t_end=0.2)[-1].area for dt in (0.04, 0.02, 0.01)]
    d1, d2 = abs(areas[0] - areas[1]), abs(areas[1] - areas[2])
    assert d2 < 0.75 * d1 or d1 < 1e-9


def test_density_preserved():
    traj = run(circle_curve(64), dt=0.05, t_end=1.0, snapshot_every=20)
    s0, s1 = traj[0], traj[-1]
    assert len(s1.domain) > len(s0.domain)
    assert abs(len(s1.domain) / s1.perimeter / s0.density - 1) < 0.05


def test_snapshot_file(tmp_path):
    path = tmp_path / "traj.jsonl"
    traj = run(circle_curve(32), dt=0.1, t_end=0.3, path=path)
    lines = path.read_text().splitlines()
    assert len(lines) == len(traj) == 4
    rec = json.loads(lines[-1])
    assert set(rec) == {"t", "points", "area", "perimeter"}
    assert abs(rec["area"] - traj[-1].area) < 1e-15


def test_resample_equal_arclength():
    t = 2 * np.pi * np.linspace(0, 1, 200, endpoint=False) ** 1.3
    p = 2 * np.cos(t) + 1j * np.sin(t)
    q = resample_equal_arclength(p, 100)
    # arclength along the exact ellipse up to each resampled point
    tq = np.unwrap(np.angle(q.real / 2 + 1j * q.imag))
    tq = np.append(tq, tq[0] + 2 * np.pi)
    speed = lambda s: np.sqrt(4 * np.sin(s) ** 2 + np.cos(s) ** 2)
    arcs = np.array([quad(speed, a, b)[0] for a, b in zip(tq[:-1], tq[1:])])
    assert np.ptp(arcs) / arcs.mean() < 1e-4


def test_topology_error_on_large_step():
    t = 2 * np.pi * np.arange(256) / 256
    s = GrowthState.initial(MarkerCurve((1 + 0.3 * np.cos(5 * t)) * np.exp(1j * t)), 0)
    with pytest.raises(TopologyError):
        step(s, 0.5)


def test_sign_guard(monkeypatch):
    s = GrowthState.initial(circle_curve(32), 0)
    real = growth.make_kernel

    class Flipped:
        def __init__(self, k):
            self.k = k

        def poisson_matrix(self, z, b):
            return -self.k.poisson_matrix(z, b)

    monkeypatch.setattr(growth, "make_kernel", lambda d: Flipped(real(d)))
    with pytest.raises(GrowthSignError):
        velocity_field(s)
