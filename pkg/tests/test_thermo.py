import warnings

import numpy as np
import pytest

from d2chain import hamiltonians as hm
from d2chain import thermo as th
from d2chain import vertex as vx

ETA = 0.6
HS = hm.hermitian_xxz_params(0.6, 0.3 + 0.4j, -0.9, 0.2, 0.7, ETA)
HT = hm.hermitian_xxz_params(-0.8, 0.4 - 0.5j, -1.1, -0.3, 0.5, ETA)


def periodic_ft(f, k, nodes=8192):
    # int_{-pi}^{pi} f(u) e^{-iku} du by the trapezoid rule
    u = -np.pi + 2 * np.pi * np.arange(nodes) / nodes
    return np.array([np.mean(f(u) * np.exp(-1j * kk * u)) * 2 * np.pi for kk in k])


@pytest.mark.parametrize("n", [1, 2, 3])
def test_kernel_fourier_transforms(n):
    k = np.array([-3, -1, 1, 2, 5])
    assert np.allclose(periodic_ft(lambda u: th.a_n(u, n, ETA), k), th.a_n_fourier(k, n, ETA), atol=1e-10)
    assert np.allclose(periodic_ft(lambda u: th.b_n(u, n, ETA), k), th.b_n_fourier(k, n, ETA), atol=1e-10)


def test_rational_kernel_fourier():
    from scipy.integrate import quad
    for kk in (0.4, 1.7, -2.2):
        # odd kernel: the transform is -2i int_0^inf bbar(u) sin(ku) du
        half, _ = quad(lambda u: th.bbar_n(u, 3), 0, np.inf, weight="sin", wvar=kk)
        assert abs(-2j * half - th.bbar_n_fourier(kk, 3)) < 1e-8


def test_coth_fourier_coefficients():
    c = th.coth_fourier([0, -1, -2, -5, 1, 3], ETA)
    m = np.array([1, 2, 5])
    assert np.isclose(c[0], 1.0)
    assert np.allclose(c[1:4], 2 * np.exp(-2 * m * ETA), atol=1e-12)
    assert np.allclose(c[4:], 0.0, atol=1e-12)


def test_density_real_space_matches_fourier_series():
    m = th.DensityModel("trig", 6, ETA, np.inf, [(1.0, 1.2, 0.0), (1.0, 0.7, np.pi), (-1.0, 0.3, 1.0)])
    x = np.array([0.3, 1.2, -2.5])
    ks = np.arange(-600, 601)
    series = np.array([np.sum(m.fourier(ks) * np.exp(1j * ks * xx)) / (2 * np.pi) for xx in x])
    assert np.allclose(series.real, m.real(x), atol=1e-12)
    grow = th.DensityModel("trig", 6, ETA, np.inf, [(1.0, -0.2, 0.0)])
    with pytest.raises(ValueError):
        grow.real(x)


@pytest.mark.parametrize("z_a", [5.0, 8.0])
def test_trig_energy_quadrature_matches_closed_form(z_a):
    d = vx.derived_boundary(HS)
    a = th.ground_energy_trig(6, ETA, d, HS.sp, z_a)
    b = th.ground_energy_trig_quadrature(6, ETA, d, HS.sp, z_a)
    assert abs(a - b) < 1e-10


def test_xxx_energy_quadrature_matches_closed_form():
    a = th.ground_energy_xxx(8, 1.0, -1.0, 0.3)
    b = th.ground_energy_xxx_quadrature(8, 1.0, -1.0, 0.3)
    assert abs(a - b) < 1e-9


def test_boundary_integral_closed_case():
    # p = q = 1, xi = 0: 2 int_0^1 dx / (1 + x) = 2 ln 2
    assert abs(th.xxx_boundary_integral(1.0, -1.0, 0.0) - 2 * np.log(2)) < 1e-12


def test_breakdowns_sum():
    r = th.surface_energy_d2_trig(ETA, HS, HT)
    assert r.check() < 1e-12
    assert abs(r.value - th.surface_energy_xxz(ETA, HS).value - th.surface_energy_xxz(ETA, HT).value) < 1e-12
    r2 = th.surface_energy_d2_rational((1.0, -1.0, 0.3), (0.8, -1.3, -0.6))
    assert r2.check() < 1e-12


def test_regime_warning():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        r = th.surface_energy_xxx(0.2, -1.0, 0.3)
    assert any(issubclass(x.category, th.RegimeWarning) for x in w)
    assert r.notes


def test_boundary_string_outside_window_rejected():
    with pytest.raises(ValueError):
        th.boundary_string_correction_trig(ETA, 2.5 * ETA)


def test_xxz_surface_energy_against_ed():
    from d2chain import spectra as spc
    ns = np.arange(6, 12)
    e = np.array([spc.ground_state(hm.h_xxz_open(int(n), ETA, HS, sparse=True))[0] for n in ns])
    surf = e + ns / 2 / np.tanh(2 * ETA)
    # finite-size corrections decay exponentially in the gapped regime
    assert abs(surf[-1] - th.surface_energy_xxz(ETA, HS).value) < 1e-3
    assert abs(surf[-1] - surf[-2]) < abs(surf[0] - surf[1]) + 1e-12
