import numpy as np
import pytest

from greenvar.errors import OracleError
from greenvar.green import disk_green
from greenvar.oracle import (PolarGrid, bessel_flux, bessel_I0, fd_beltrami_green, fd_green,
                             radial_bvp, radial_growth_rate, radial_poisson_moment)


def test_bessel_values():
    assert bessel_I0(0) == 1.0
    assert abs(bessel_I0(1.0) - 1.2660658) < 1e-7
    assert bessel_flux(0) == 1 / (2 * np.pi)


def test_bessel_ode_residual():
    # x^2 y'' + x y' - x^2 y = 0
    h = 1e-4
    for x in (0.5, 1.7, 4.0):
        y0, yp, ym = bessel_I0(x), bessel_I0(x + h), bessel_I0(x - h)
        res = x ** 2 * (yp - 2 * y0 + ym) / h ** 2 + x * (yp - ym) / (2 * h) - x ** 2 * y0
        assert abs(res) < 1e-5 * y0


def test_bessel_range():
    with pytest.raises(OracleError):
        bessel_I0(5.5)
    with pytest.raises(OracleError):
        bessel_I0(-0.1)


def test_radial_growth_rate_scaling():
    assert abs(radial_growth_rate(2.0, 0.0) - 1 / (4 * np.pi)) < 1e-15
    assert abs(radial_growth_rate(1.0, 0.1) - bessel_flux(0.1)) < 1e-15


def test_grid_limits():
    with pytest.raises(OracleError):
        PolarGrid(16, 64)


def test_zero_potential_is_green():
    fd = fd_green(PolarGrid(32, 32), 0.0, 0.3 + 0.2j)
    assert np.max(np.abs(fd.regular)) == 0
    z = np.array([0.5, -0.2j])
    assert np.allclose(fd.interpolate(z), disk_green(z, 0.3 + 0.2j), atol=1e-15)


def test_flux_second_order():
    ref = bessel_flux(0.1)
    err = [abs(fd_green(PolarGrid(n, 32), 0.1, 0.0).flux.mean() - ref) for n in (32, 64, 128)]
    assert err[-1] / ref < 1e-3
    assert 3.0 < err[0] / err[1] < 5.0
    assert 3.0 < err[1] / err[2] < 5.0


def test_flux_at_256():
    fd = fd_green(PolarGrid(256, 64), 0.1, 0.0)
    assert np.max(np.abs(fd.flux / bessel_flux(0.1) - 1)) < 1e-3


def test_off_centre_flux_mass():
    # the boundary integral of the flux is 1 + int V g* dA
    fd = fd_green(PolarGrid(128, 128), 0.2, 0.3)
    mass = fd.flux.sum() * fd.grid.h_theta
    interior = 1 + np.sum(0.2 * fd.values * fd.grid.cell_area.ravel())
    assert abs(mass - interior) < 1e-3


def test_beltrami_constant_conductivity():
    w = 0.2 - 0.3j
    fd = fd_beltrami_green(PolarGrid(64, 64), lambda z: np.full(np.shape(z), 1.15), w)
    z = np.array([0.1, 0.6j, -0.5 + 0.2j])
    assert np.allclose(fd.interpolate(z), disk_green(z, w) / 1.15, rtol=1e-6)


def test_beltrami_eps_zero():
    fd = fd_beltrami_green(PolarGrid(32, 32), lambda z: np.ones(np.shape(z)), 0.4j)
    assert np.max(np.abs(fd.regular)) < 1e-15


def test_beltrami_symmetry():
    lam = lambda z: 1 + 0.1 * np.abs(z) ** 2 + 0.05 * z.real
    a, b = 0.2 + 0.1j, -0.5 + 0.3j
    gab = fd_beltrami_green(PolarGrid(128, 128), lam, a).interpolate(b)[0]
    gba = fd_beltrami_green(PolarGrid(128, 128), lam, b).interpolate(a)[0]
    assert abs(gab / gba - 1) < 1e-3


def test_beltrami_positive_conductivity_required():
    with pytest.raises(OracleError):
        fd_beltrami_green(PolarGrid(32, 32), lambda z: 1 - 2 * np.abs(z), 0)


def test_radial_helpers():
    s = radial_bvp(lambda r: np.ones_like(r))
    # Laplacian s = 1, s(1) = 0 gives (r^2 - 1)/4
    assert abs(s(0.5) - (0.25 - 1) / 4) < 1e-8
    assert abs(radial_poisson_moment(lambda r: 1.0) + 1 / (8 * np.pi)) < 1e-12
