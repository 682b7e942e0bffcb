import numpy as np
import pytest

from d2chain import hamiltonians as hm
from d2chain.transfer import TransferFamily
from d2chain.vertex import D2Boundary, ModelKind, XXZBoundary

ETA = 0.7


def herm_d2(eta=ETA):
    return D2Boundary(hm.hermitian_xxz_params(0.6, 0.3 + 0.4j, -0.9, 0.2, 0.7, eta),
                      hm.hermitian_xxz_params(-0.8, 0.4 - 0.5j, -1.1, -0.3, 0.5, eta))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_xxz_open_matches_transfer_derivative(n):
    b = herm_d2().splus
    h = hm.h_xxz_open(n, ETA, b).dense()
    ht = hm.from_transfer(TransferFamily(ModelKind.XXZ_TRIG, n, b, ETA)).dense()
    assert np.max(np.abs(h - ht)) < 1e-8


@pytest.mark.parametrize("n", [2, 3])
def test_d2_open_matches_transfer_derivative(n):
    b = herm_d2()
    h = hm.h_d2_open(n, ETA, b.splus, b.sminus).dense()
    ht = hm.from_transfer(TransferFamily(ModelKind.D2_TRIG, n, b, ETA)).dense()
    assert np.max(np.abs(h - ht)) < 1e-8


def test_d2_is_kronecker_sum_of_sectors():
    b = herm_d2()
    n = 3
    h = hm.h_d2_open(n, ETA, b.splus, b.sminus).dense()
    hp, hmn = hm.h_xxz_open(n, ETA, b.splus), hm.h_xxz_open(n, ETA, b.sminus)
    assert np.max(np.abs(h - hm.direct_sum(hp, hmn))) < 1e-10
    ev = np.sort(np.add.outer(np.linalg.eigvalsh(hp.dense()), np.linalg.eigvalsh(hmn.dense())).ravel())
    assert np.allclose(np.linalg.eigvalsh(h), ev, atol=1e-10)


def test_rational_d2_matches_transfer_derivative(rng):
    vals = rng.uniform(0.4, 1.2, 12) + 1j * rng.uniform(-0.5, 0.5, 12)
    b = D2Boundary(XXZBoundary(*vals[:6]), XXZBoundary(*vals[6:]))
    h = hm.h_xxx_family("iso_d2", 2, b).dense()
    ht = hm.from_transfer(TransferFamily(ModelKind.D2_RATIONAL, 2, b)).dense()
    assert np.max(np.abs(h - ht)) < 1e-7
    printed = hm.h_xxx_family("iso_d2", 2, b, left_sign="printed").dense()
    assert np.max(np.abs(printed - ht)) > 1e-3


def test_hermitian_family_gives_hermitian_operators():
    b = herm_d2()
    assert hm.h_d2_open(3, ETA, b.splus, b.sminus).antihermitian_part() < 1e-12
    assert hm.h_xxz_open(4, ETA, b.sminus).antihermitian_part() < 1e-12
    assert hm.boundary_fields(b.splus, ETA).is_hermitian()


def test_fields_round_trip():
    b = herm_d2().splus
    f = hm.boundary_fields(b, ETA)
    back = hm.params_from_fields(f, ETA)
    assert np.allclose(back.as_tuple(), b.as_tuple(), atol=1e-12)
    h1 = hm.h_xxz_open(4, ETA, b).dense()
    h2 = hm.h_xxz_open(4, ETA, fields=f).dense()
    assert np.max(np.abs(h1 - h2)) < 1e-10


def test_fields_from_pauli_doubles():
    f = hm.fields_from_pauli(0.23 + 0.36j, 1.2, 0.82 + 0.93j, 3.23)
    assert f.h1_plus == 2 * (0.23 + 0.36j) and f.h1_minus == 2 * (0.23 - 0.36j)
    assert f.hN_z == 2 * 3.23 and f.is_hermitian()


def test_zero_longitudinal_field_rejected():
    f = hm.BoundaryFields(0.1, 0.1, 0.0, 0.2, 0.2, 1.0)
    with pytest.raises(ValueError):
        hm.params_from_fields(f, ETA)


def test_periodic_xxx_small_ring():
    # H = 2 sum_j S_j.S_{j+1} + N/2 on the ring; the N=4 Heisenberg ring has E0 = -2 for sum S.S
    n = 4
    h = hm.h_periodic("xxx", n).dense()
    ops = (hm.SX, hm.SY, hm.SZ)
    ss = sum(np.kron(np.kron(np.eye(2**j), np.kron(m, m)), np.eye(2 ** (n - 2 - j)))
             for j in range(n - 1) for m in ops)
    ss = (ss + sum(np.kron(np.kron(m, np.eye(2 ** (n - 2))), m) for m in ops)) / 4
    assert np.isclose(np.linalg.eigvalsh(ss)[0], -2.0)
    assert np.max(np.abs(h - (2 * ss + n / 2 * np.eye(2**n)))) < 1e-12


def test_periodic_needs_two_sites():
    with pytest.raises(ValueError):
        hm.h_periodic("xxz", 1, ETA)
    with pytest.raises(ValueError):
        hm.h_periodic("nope", 4, ETA)


def test_reduction_matches_raw_spectrum(rng):
    for _ in range(3):
        s1, s1p = complex(*rng.uniform(-1, 1, 2)), complex(*rng.uniform(-1, 1, 2))
        raw = XXZBoundary(rng.uniform(0.5, 2), s1, np.conj(s1), -rng.uniform(0.5, 2), s1p, np.conj(s1p))
        red = hm.reduce_boundary_xxx(raw)
        for n in (2, 3):
            a = np.linalg.eigvalsh(hm.h_xxx_family("xxx_raw", n, raw).dense())
            b = np.linalg.eigvalsh(hm.h_xxx_family("xxx_reduced", n, red.reduced).dense())
            assert np.max(np.abs(a - b)) < 1e-9
        # the site rotation maps one onto the other at N=1
        c = red.c1 @ red.c2
        h1 = hm.h_xxx_family("xxx_raw", 1, raw).dense()
        h2 = hm.h_xxx_family("xxx_reduced", 1, red.reduced).dense()
        assert np.allclose(np.linalg.solve(c, h1) @ c, h2, atol=1e-9)


def test_kbar_trace_relations():
    res = hm.kbar_trace_relations(herm_d2(), ETA)
    assert res["trace"] < 1e-12 and res["trace_derivative"] < 1e-8


def test_from_transfer_rejects_inhomogeneous():
    fam = TransferFamily(ModelKind.XXZ_TRIG, 2, herm_d2().splus, ETA, (0.1j, 0.2j))
    with pytest.raises(ValueError):
        hm.from_transfer(fam)


def test_sparse_and_dense_agree():
    b = herm_d2().splus
    d = hm.h_xxz_open(5, ETA, b, sparse=False).dense()
    s = hm.h_xxz_open(5, ETA, b, sparse=True)
    assert s.antihermitian_part() < 1e-12
    assert np.max(np.abs(d - s.dense())) < 1e-14
