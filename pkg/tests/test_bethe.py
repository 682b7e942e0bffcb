import numpy as np
import pytest

from d2chain import bethe as bt
from d2chain import hamiltonians as hm
from d2chain import spectra as spc
from d2chain import transfer as tr
from d2chain.transfer import ReducedXXX, TransferFamily
from d2chain.vertex import ModelKind

ETA = 0.9
HS = hm.hermitian_xxz_params(0.6, 0.3 + 0.4j, -0.9, 0.2, 0.7, ETA)
RED = ReducedXXX(1.3, -0.9, 0.4)


@pytest.mark.parametrize("kind,b", [("trig", HS), ("rational", RED)])
def test_bae_complete_single_site(kind, b):
    eta = ETA if kind == "trig" else None
    sols = bt.solve_bae(kind, b, 1, seeds="ed", eta=eta)
    mk = ModelKind.XXZ_TRIG if kind == "trig" else ModelKind.XXX_RATIONAL
    m = bt.tq_eigenvalue_match(TransferFamily(mk, 1, b, eta), sols)
    assert m["matched"] == m["total"] == 2
    for ans in sols:
        assert bt.tq_polynomial_residual(ans) < 1e-9


def test_tq_energy_matches_ed():
    n = 2
    sols = bt.solve_bae("trig", HS, n, seeds="ed", eta=ETA)
    ed = np.linalg.eigvalsh(hm.h_xxz_open(n, ETA, HS).dense())
    e = np.sort([bt.tq_energy(a).real for a in sols])
    assert len(e) == 4
    assert np.max(np.abs(e - ed)) < 1e-6


def test_random_roots_are_not_polynomial():
    ans = bt.make_ansatz("trig", HS, [0.3 + 0.2j, -0.4 + 1.0j], ETA)
    assert bt.tq_polynomial_residual(ans) > 1e-6
    assert np.max(np.abs(bt.bae_residuals("trig", ans))) > 1e-6


def test_make_ansatz_needs_one_root_per_site():
    with pytest.raises(ValueError):
        bt.make_ansatz("trig", HS, [0.1, 0.2], ETA, thetas=(0j,))


def test_raw_from_reduced_transfer():
    raw = bt.raw_from_reduced(RED)
    for n in (1, 2):
        a = TransferFamily(ModelKind.XXX_RATIONAL, n, RED)
        b = TransferFamily(ModelKind.XXX_RATIONAL, n, raw)
        u = 0.37 - 0.21j
        spec_a = np.sort_complex(np.linalg.eigvals(tr.evaluate(a, u)))
        spec_b = np.sort_complex(np.linalg.eigvals(-tr.evaluate(b, u)))
        assert np.allclose(spec_a, spec_b, atol=1e-10)


@pytest.mark.parametrize("n", [2, 4])
def test_zero_root_solver_reproduces_ground_state(n):
    e0, psi = spc.ground_state(hm.h_xxz_open(n, ETA, HS))
    fam = TransferFamily(ModelKind.XXZ_TRIG, n, HS, ETA)
    zs = spc.extract_zero_roots(spc.eigenvalue_sampler(fam, psi))
    sys = bt.ZeroRootSystem.from_family(fam)
    # a perturbed start must flow back to the same set
    rng = np.random.default_rng(n)
    start = zs.roots[: sys.half] + 1e-3 * (rng.normal(size=sys.half) + 1j * rng.normal(size=sys.half))
    sol = bt.solve_zero_roots(sys, initial=start, strategy="newton")
    assert np.max(np.abs(bt.zero_root_residuals(sys, sol.roots))) < 1e-8
    assert abs(spc.energy_from_roots(sol, sp=HS.sp) - e0) < 1e-8


def test_zero_root_pattern_guesses_find_ground_state():
    n = 4
    e0, _ = spc.ground_state(hm.h_xxz_open(n, ETA, HS))
    sys = bt.ZeroRootSystem("trig", n, HS, ETA)
    sol = bt.solve_zero_roots(sys)
    assert abs(spc.energy_from_roots(sol, sp=HS.sp) - e0) < 1e-8


def test_zero_root_residuals_flag_wrong_roots():
    sys = bt.ZeroRootSystem("rational", 2, RED)
    bad = np.array([0.3, -0.3, 1.1j, -1.1j, 0.7, -0.7])
    assert np.max(np.abs(bt.zero_root_residuals(sys, bad))) > 1e-3


def test_system_validation():
    with pytest.raises(ValueError):
        bt.ZeroRootSystem("trig", 2, HS)
    with pytest.raises(ValueError):
        bt.ZeroRootSystem("rational", 2, HS)
    with pytest.raises(ValueError):
        bt.solve_zero_roots(bt.ZeroRootSystem("rational", 2, RED), initial=[0.1, 0.2], strategy="newton")
    with pytest.raises(ValueError):
        bt.solve_zero_roots(bt.ZeroRootSystem("rational", 2, RED), strategy="magic")
