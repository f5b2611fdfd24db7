import numpy as np
import pytest

from greenvar.dirichlet import green_l2_norm, linearization_bound, solve_perturbed
from greenvar.green import harmonic_extension
from greenvar.oracle import bessel_I0


def test_constant_data_centre(disk_kernel):
    sol = solve_perturbed(disk_kernel, lambda z: np.ones(np.shape(z)), 1.0, 0.1, 0)
    assert abs(sol.phi0 - 1) < 1e-13
    assert abs(sol.delta + 0.25) < 1e-12
    assert abs(sol.phi_eps - 1 / bessel_I0(np.sqrt(0.1))) < 1e-12


@pytest.mark.parametrize("eps", [0.05, 0.1])
def test_against_bessel_off_centre(disk_kernel, eps):
    # phi(r) = I0(sqrt(eps) r) / I0(sqrt(eps))
    for z in (0.3, 0.5j, -0.4 - 0.4j):
        sol = solve_perturbed(disk_kernel, lambda q: np.ones(np.shape(q)), 1.0, eps, z)
        ref = bessel_I0(np.sqrt(eps) * abs(z)) / bessel_I0(np.sqrt(eps))
        assert abs(sol.phi_eps / ref - 1) < 1e-8


def test_eps_zero(disk_kernel):
    sol = solve_perturbed(disk_kernel, lambda z: z.real ** 2, "re(1)", 0.0, 0.2j)
    assert sol.phi_eps == sol.phi0


def test_odd_data_vanishes_at_centre(disk_kernel):
    sol = solve_perturbed(disk_kernel, lambda z: z.real, 1.0, 0.1, 0)
    assert abs(sol.phi0) < 1e-14
    assert abs(sol.delta) < 1e-14
    assert abs(sol.phi_eps) < 1e-14


def test_samples_match_callable(disk_kernel):
    t = 2 * np.pi * np.arange(64) / 64
    f = np.cos(2 * t) + 0.5
    a = solve_perturbed(disk_kernel, f, "gaussian(0.5, 0, 0)", 0.2, 0.3 + 0.1j)
    b = solve_perturbed(disk_kernel, lambda z: (z ** 2).real + 0.5, "gaussian(0.5, 0, 0)", 0.2, 0.3 + 0.1j)
    assert abs(a.phi_eps - b.phi_eps) < 1e-12


def test_quadratic_remainder(disk_kernel):
    f = lambda z: 1 + (z ** 3).real
    for z in (0.0, 0.4, -0.3j, 0.5 + 0.2j, -0.6 + 0.1j):
        rem = []
        for eps in (0.2, 0.1, 0.05):
            s = solve_perturbed(disk_kernel, f, "re(1.2)", eps, z, resolution=(32, 64))
            rem.append(abs(s.phi_eps - s.phi0 - eps * s.delta))
        assert 3.5 < rem[0] / rem[1] < 4.5
        assert 3.5 < rem[1] / rem[2] < 4.5


def test_maximum_principle(disk_kernel, lima_kernel, rng):
    for kernel in (disk_kernel, lima_kernel):
        bnd = kernel.domain.boundary_samples(128)
        f = np.cos(3 * np.angle(bnd.z)) + 0.4 * np.sin(np.angle(bnd.z))
        probes = 0.9 * np.sqrt(rng.uniform(size=30)) * np.exp(2j * np.pi * rng.uniform(size=30))
        probes = kernel.domain.map(probes) if hasattr(kernel.domain, "map") else probes
        phi = harmonic_extension(kernel, f, probes)
        assert np.max(np.abs(phi)) <= np.max(np.abs(f)) + 1e-9


def test_discontinuous_data(disk_kernel):
    # step data: phi0(0) is the boundary mean 1/2
    f = lambda z: (z.imag > 0).astype(float)
    sol = solve_perturbed(disk_kernel, f, 1.0, 0.1, 0)
    assert abs(sol.phi0 - 0.5) < 1e-3




def test_bound_centre(disk_kernel):
    chk = linearization_bound(disk_kernel, lambda z: np.ones(np.shape(z)), 1.0, 0)
    assert abs(green_l2_norm(disk_kernel, 0) ** 2 - 1 / (8 * np.pi)) < 1e-12
    assert abs(chk.bound - np.sqrt(1 / 8)) < 1e-10
    assert abs(chk.delta + 0.25) < 1e-12
    assert chk.holds


def test_bound_zero_potential(disk_kernel):
    chk = linearization_bound(disk_kernel, lambda z: z.real, 0.0, 0.2)
    assert chk.bound == 0 and chk.delta == 0


def test_bound_random_trials(disk_kernel, rng):
    potentials = ["const(1)", "abs2", "re(1)", "gaussian(0.4, 0.3, 0)"]
    for k in range(20):
        c = rng.normal(size=4)
        f = lambda z, c=c: c[0] + c[1] * z.real + c[2] * (z ** 2).imag + c[3] * (z ** 3).real
        z = 0.8 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        chk = linearization_bound(disk_kernel, f, potentials[k % 4], z, resolution=(32, 64))
        assert chk.holds
