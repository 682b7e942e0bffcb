import numpy as np
import pytest

from d2chain import hamiltonians as hm
from d2chain import scaling as sc
from d2chain import spectra as spc

ETA = 0.7
HS = hm.hermitian_xxz_params(0.6, 0.3 + 0.4j, -0.9, 0.2, 0.7, ETA)


def test_fit_linear_exact():
    ns = np.arange(4, 10)
    f = sc.fit_linear(np.column_stack([ns, 1.3 * ns + 1.758]))
    assert abs(f.coefficients["a"] - 1.3) < 1e-12 and abs(f.coefficients["b"] - 1.758) < 1e-12
    with pytest.raises(KeyError):
        f.limit
    with pytest.raises(ValueError):
        sc.fit_linear([[1, 1.0], [2, 2.0]])


def test_fit_exponential_recovers_parameters():
    ns = np.arange(4, 12)
    y = -0.8 + 0.35 * np.exp(-0.9 * ns)
    f = sc.fit_exponential(np.column_stack([ns, y]))
    assert abs(f.limit + 0.8) < 1e-10
    assert abs(f.coefficients["d"] - 0.9) < 1e-6 and abs(f.coefficients["c"] - 0.35) < 1e-5


def test_fit_inverse_power_recovers_limit():
    ns = np.arange(6, 16, 2).astype(float)
    y = 0.4 - 0.2 / ns + 0.05 / ns**2
    f = sc.fit_inverse_power(np.column_stack([ns, y]), order=2)
    assert abs(f.limit - 0.4) < 1e-10 and f.residual < 1e-12
    with pytest.raises(ValueError):
        sc.fit_inverse_power(np.column_stack([ns[:3], y[:3]]), order=3)


@pytest.mark.parametrize("kw", [
    dict(family="nope", ns=(4, 5), eta=ETA, params=HS),
    dict(family="xxz", ns=(5, 4), eta=ETA, params=HS),
    dict(family="xxz", ns=(4, 30), eta=ETA, params=HS),
    dict(family="xxz", ns=(4, 5), eta=None, params=HS),
    dict(family="xxx", ns=(4, 5), eta=0.3, params=(1, -1, 0)),
    dict(family="xxz", ns=(4, 5), eta=ETA, params=None),
    dict(family="d2", ns=(4, 5), eta=ETA, params=HS),
    dict(family="xxx_periodic", ns=(4, 6), quantity="z_a"),
    dict(family="d2", ns=(4, 5), eta=ETA, params=None, backend="zero_root_solver"),
])
def test_scan_spec_validation(kw):
    with pytest.raises(ValueError):
        sc.ScanSpec(**kw)


def test_run_scan_flags_failed_points(monkeypatch):
    real = sc._point

    def flaky(spec, n):
        if n == 5:
            raise RuntimeError("no convergence")
        return real(spec, n)

    monkeypatch.setattr(sc, "_point", flaky)
    table = sc.run_scan(sc.ScanSpec("xxz", (4, 5, 6), "ground_energy", "ed", ETA, HS))
    assert not table.complete and "N=5" in table.flags[0]
    assert np.isnan(table.values[1]) and np.all(np.isfinite(table.values[[0, 2]]))
    assert len(table.valid().ns) == 2


def test_ground_energy_scan_matches_ed():
    table = sc.run_scan(sc.ScanSpec("xxz", (3, 4), "ground_energy", "ed", ETA, HS))
    for n, v in table.rows():
        assert abs(v - spc.ground_state(hm.h_xxz_open(n, ETA, HS))[0]) < 1e-12


def test_zero_root_backend_agrees_with_ed():
    p = sc.za_params(0.5)
    ed = sc.run_scan(sc.ScanSpec("xxz", (4, 5), "z_a", "ed", 0.5, p))
    zr = sc.run_scan(sc.ScanSpec("xxz", (4, 5), "z_a", "zero_root_solver", 0.5, p))
    assert ed.complete and zr.complete
    assert np.allclose(ed.values, zr.values, atol=1e-6)


def test_bulk_energy_per_site():
    assert np.isclose(sc.bulk_energy_per_site("xxx"), 1 - 2 * np.log(2))
    assert np.isclose(sc.bulk_energy_per_site("d2", ETA), 2 * sc.bulk_energy_per_site("xxz", ETA))
    # large-N periodic XXZ in the gapped regime sits close to the bulk value
    n = 12
    e = spc.ground_state(hm.h_periodic("xxz", n, 1.5, sparse=True))[0] / n
    assert abs(e - sc.bulk_energy_per_site("xxz", 1.5)) < 1e-3


def test_za_params_invert_reference_fields():
    p = sc.za_params(ETA)
    f = hm.boundary_fields(p, ETA)
    assert np.isclose(f.h1_z, 2 * sc.ZA_FIELDS["h1_z"]) and np.isclose(f.hN_plus, 2 * sc.ZA_FIELDS["hN_plus"])
