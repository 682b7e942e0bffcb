import numpy as np
import pytest

from conftest import random_d2_boundary, random_point, random_xxz_boundary
from d2chain import hamiltonians as hm
from d2chain import tensor as tn
from d2chain import transfer as tr
from d2chain import vertex as vx
from d2chain.transfer import ReducedXXX, TransferFamily
from d2chain.vertex import ModelKind as K

ETA = 0.7


def brute_transfer(kind, n, b, eta, thetas, u):
    """``tr_0 Kbar T K That`` from explicit embeddings, auxiliary space first."""
    d = kind.local_dim
    g = tn.ChainGeometry(n + 1, d)

    def r(i, j, x):
        return tn.embed(vx.r_matrix(kind, x, eta), [i, j], g)

    t = np.eye(d ** (n + 1))
    that = np.eye(d ** (n + 1))
    for j in range(1, n + 1):
        t = t @ r(1, j + 1, u - thetas[j - 1])
    for j in range(n, 0, -1):
        that = that @ r(j + 1, 1, u + thetas[j - 1])
    kr = tn.embed(vx.k_matrix(kind, "right", u, b, eta), [1], g)
    kl = tn.embed(vx.k_matrix(kind, "left", u, b, eta), [1], g)
    return tn.partial_trace_aux(kl @ t @ kr @ that, d)


@pytest.mark.parametrize("kind", [K.XXZ_TRIG, K.D2_TRIG, K.XXX_RATIONAL, K.D2_RATIONAL], ids=lambda k: k.value)
def test_evaluate_matches_brute_force(kind, rng):
    n = 2
    b = random_d2_boundary(rng) if kind.d2 else random_xxz_boundary(rng)
    eta = ETA if kind.trig else None
    th = (0.1 + 0.2j, -0.3 + 0.1j)
    u = random_point(rng)
    a = tr.evaluate(TransferFamily(kind, n, b, eta, th), u)
    assert tn.max_abs(a - brute_transfer(kind, n, b, eta, th, u)) <= 1e-12 * tn.max_abs(a)


def test_family_validation():
    with pytest.raises(ValueError):
        TransferFamily(K.XXZ_TRIG, 2, random_xxz_boundary(np.random.default_rng(0)))
    with pytest.raises(ValueError):
        TransferFamily(K.XXZ_TRIG, 2, random_xxz_boundary(np.random.default_rng(0)), ETA, (0.1,))
    with pytest.raises(ValueError):
        TransferFamily(K.XXZ_TRIG, 2, ReducedXXX(1, -1, 0), ETA)
    fam = TransferFamily(K.D2_TRIG, 9, random_d2_boundary(np.random.default_rng(0)), ETA)
    with pytest.raises(ValueError):
        tr.evaluate(fam, 0.1)


@pytest.mark.parametrize("kind", [K.D2_TRIG, K.D2_RATIONAL], ids=lambda k: k.value)
def test_factorization_and_commutativity(kind, rng):
    fam = TransferFamily(kind, 2, random_d2_boundary(rng), ETA if kind.trig else None, (0.2j, -0.1 + 0.3j))
    u, v = random_point(rng), random_point(rng)
    assert tr.check_transfer_factorization(fam, u) < 1e-12
    assert tr.commutator_residual(fam, u, v) < 1e-12
    assert tr.check_crossing_and_hermiticity(fam, u)["crossing"] < 1e-12


def test_hermiticity_needs_hermitian_boundary(rng):
    b = hm.hermitian_xxz_params(0.6, 0.3 + 0.4j, -0.9, 0.2, 0.7, ETA)
    fam = TransferFamily(K.XXZ_TRIG, 2, b, ETA, (0.2j, 0.35j))
    assert tr.check_crossing_and_hermiticity(fam, random_point(rng))["hermiticity"] < 1e-12
    bad = TransferFamily(K.XXZ_TRIG, 2, random_xxz_boundary(rng), ETA, (0.2j, 0.35j))
    assert tr.check_crossing_and_hermiticity(bad, random_point(rng))["hermiticity"] > 1e-6


@pytest.mark.parametrize("n", [1, 2, 3])
def test_fusion_and_special_values(n, rng):
    fam = TransferFamily(K.XXZ_TRIG, n, random_xxz_boundary(rng), ETA, tuple(rng.normal(size=n) * 0.3 + 0.1j))
    for j in range(1, n + 1):
        for sign in (1, -1):
            assert tr.check_fusion_identity(fam, j, sign) < 1e-10
    res = tr.check_special_values_and_asymptotics(fam)
    assert max(v for k, v in res.items() if not k.endswith("_as_written")) < 1e-10
    # the i pi value without the (-1)^N factor is off by exactly a sign for odd N
    if n % 2:
        assert res["t(ipi)_as_written"] == pytest.approx(2.0, rel=1e-9)
    else:
        assert res["t(ipi)_as_written"] < 1e-10


def test_fusion_projector_is_idempotent():
    p = tr.fusion_projector(0.4 + 0.2j)
    assert np.allclose(p @ p, p)
    assert np.linalg.matrix_rank(p) == 1


def test_fused_k_products():
    b = random_xxz_boundary(np.random.default_rng(5))
    res = tr.fused_k_residuals(b, 0.3 - 0.2j, ETA)
    assert max(res.values()) < 1e-10


def test_sector_product_and_kronecker_sum(rng):
    n = 2
    a, b = rng.normal(size=(4, 4)), rng.normal(size=(4, 4))
    prod = tr.sector_product(n, a, b)
    s, pi = tr.calligraphic_s(n), tr.site_interleaver(n)
    assert np.allclose(prod, s @ pi @ np.kron(a, b) @ pi.T @ np.linalg.inv(s))
    # the interleaver puts sigma_j tau_j next to each other
    x = np.kron(np.diag([1.0, 0.0]), np.eye(2))  # sigma_1 projector in the (sigma, sigma) block
    assert np.allclose(tr.sector_product(n, x, np.eye(4)), np.kron(np.diag([1.0, 1.0, 0.0, 0.0]), np.eye(4)))
    assert np.allclose(tr.kronecker_sum(n, a, b), tr.sector_product(n, a, np.eye(4)) + tr.sector_product(n, np.eye(4), b))


def test_reduced_xxx_relations(rng):
    fam = TransferFamily(K.XXX_RATIONAL, 3, ReducedXXX(1.1, -0.8, 0.5), None, (0.1j, 0.25j, 0.4j))
    assert max(tr.xxx_functional_relations(fam).values()) < 1e-10
    with pytest.raises(ValueError):
        tr.xxx_functional_relations(TransferFamily(K.XXX_RATIONAL, 1, random_xxz_boundary(rng)))
