"""Thermodynamic-limit densities, ground-state energies and surface energies.

Trig (XXZ sector, D2 anisotropic) quantities follow from the ground-state
zero-root pattern: real roots, boundary strings ``pi +- (2 eta - alpha) i``
and the additional pair ``pi +- z_a i``. Rational quantities follow from bulk
2-strings plus ``+- z_a i`` in the reduced ``(p, q, xi)`` chain.

Fourier convention: ``f~(k) = int_{-pi}^{pi} f(u) e^{-iku} du`` for the trig
densities (``k`` integer) and ``int_R f(u) e^{-iku} du`` for the rational ones.
Energies are evaluated in Fourier space, where boundary-string corrections
with growing exponentials stay well defined.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from . import vertex as vx
from .vertex import DerivedBoundary, XXZBoundary

ZA_INTERCEPT = 1.758
QUAD_ABS_TOL = 1e-10


class RegimeWarning(UserWarning):
    """Parameters outside the regime the density was derived for."""


def _coth(x):
    return 1 / np.tanh(x)


# ---------------------------------------------------------------------------
# kernel functions
# ---------------------------------------------------------------------------


def a_n(u, n, eta):
    """``a_n(u) = (cot((u + n eta i)/2) - cot((u - n eta i)/2)) / 2``."""
    u = np.asarray(u, dtype=complex)
    w = n * eta * 1j
    return 0.5 * (1 / np.tan((u + w) / 2) - 1 / np.tan((u - w) / 2))


def b_n(u, n, eta):
    """``b_n(u) = (cot((u + n eta i)/2) + cot((u - n eta i)/2)) / 2``."""
    u = np.asarray(u, dtype=complex)
    w = n * eta * 1j
    return 0.5 * (1 / np.tan((u + w) / 2) + 1 / np.tan((u - w) / 2))


def a_n_fourier(k, n, eta):
    """``a~_n(k) = -2 pi i sign(n eta) e^{-|n eta k|}``; ``a_n`` is even in ``u``."""
    k = np.asarray(k, dtype=float)
    return -2j * np.pi * np.sign(n * eta) * np.exp(-np.abs(n * eta * k))


def b_n_fourier(k, n, eta):
    """``b~_n(k) = -2 pi i sign(k) e^{-|n eta k|}``; ``b_n`` is odd in ``u``."""
    k = np.asarray(k, dtype=float)
    return -2j * np.pi * np.sign(k) * np.exp(-np.abs(n * eta * k))


def bbar_n(u, n):
    """Rational kernel ``2u / (u^2 + n^2/4)``."""
    u = np.asarray(u, dtype=float)
    return 2 * u / (u**2 + n**2 / 4)


def bbar_n_fourier(k, n):
    k = np.asarray(k, dtype=float)
    return -2j * np.pi * np.sign(k) * np.exp(-np.abs(n) * np.abs(k) / 2)


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------


@dataclass
class DensityModel:
    """Root density as ``bulk(k) + (1/N) sum_j w_j e^{-r_j |k|} e^{-i k x_j}``.

    ``terms`` holds ``(w, r, x)``. ``r = 0`` terms are point masses in real
    space (``w delta(u - x)`` per unit ``1/N``); ``r < 0`` terms only make sense
    in Fourier space. ``z_a = inf`` marks the thermodynamic limit of the
    additional roots, whose terms are then dropped.
    """

    kind: str
    n: int
    eta: float | None
    z_a: float
    terms: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def bulk(self, k):
        k = np.asarray(k, dtype=float)
        if self.kind == "trig":
            return 2 * np.exp(-2 * self.eta * np.abs(k))
        ak = np.abs(k)
        return 2 * np.exp(-ak / 2) / (1 + np.exp(-ak))

    def fourier(self, k):
        k = np.asarray(k, dtype=float)
        out = self.bulk(k).astype(complex)
        for w, r, x in self.terms:
            out = out + w * self._term(k, r) * np.exp(-1j * k * x) / self.n
        return out

    def _term(self, k, r):
        ak = np.abs(k)
        if self.kind == "trig":
            return np.exp(-r * ak)
        # rational boundary terms come divided by b~_1 + b~_3 (sign(k) cancels)
        return np.exp(-(r - 0.5) * ak) / (1 + np.exp(-ak))

    def point_masses(self):
        return [(w / self.n, x) for w, r, x in self.terms if r == 0]

    def real(self, u):
        """Smooth part of the trig density on ``(-pi, pi]``; point masses excluded."""
        if self.kind != "trig":
            raise ValueError("real-space density is implemented for the trig model")
        if any(r < 0 for _, r, _ in self.terms):
            raise ValueError("growing Fourier terms have no real-space density")
        u = np.asarray(u, dtype=float)
        out = (1j / np.pi * a_n(u, 2, self.eta)).real
        for w, r, x in self.terms:
            if r > 0:
                out = out + w / self.n * _poisson(u - x, r)
        return out


def _poisson(x, r):
    """``(1/2pi) sum_k e^{-r|k|} e^{ikx} = sinh r / (2 pi (cosh r - cos x))``."""
    return np.sinh(r) / (2 * np.pi * (np.cosh(r) - np.cos(x)))


def _check_positive_alpha(derived: DerivedBoundary, eta, notes):
    vals = {"alpha1": derived.alpha1, "alpha1p": derived.alpha1p,
            "alpha2_bar": derived.alpha2_bar, "alpha2p_bar": derived.alpha2p_bar}
    for name, v in vals.items():
        if complex(v).real < 2 * eta:
            notes.append(f"{name} < 2 eta: a boundary string is present")


def trig_density_model(eta, derived: DerivedBoundary, n: int, z_a: float = np.inf,
                       strings: bool = False) -> DensityModel:
    """Ground-state zero-root density of the open XXZ sector.

    ``strings=True`` adds the boundary-string deviation for every
    ``0 < Re alpha < 2 eta``, turning its growing term into a decaying one.
    """
    pi = np.pi
    a1, a1p = float(complex(derived.alpha1).real), float(complex(derived.alpha1p).real)
    a2, a2p = derived.alpha2_bar, derived.alpha2p_bar
    terms = [(1.0, 2 * eta, -pi), (1.0, 2 * eta, 0.0), (-1.0, 0.0, 0.0), (-1.0, 0.0, pi),
             (1.0, a1 - 2 * eta, pi), (1.0, a1p - 2 * eta, pi),
             (1.0, a2 - 2 * eta, 0.0), (1.0, a2p - 2 * eta, 0.0)]
    if np.isfinite(z_a):
        terms += [(-1.0, z_a, pi), (-1.0, z_a - 4 * eta, pi)]
    notes = []
    _check_positive_alpha(derived, eta, notes)
    if strings:
        for a, x in ((a1, pi), (a1p, pi), (a2, 0.0), (a2p, 0.0)):
            if 0 < a < 2 * eta:
                c = 2 * eta - a
                terms += [(-1.0, c, x), (-1.0, -c, x)]
    return DensityModel("trig", n, eta, z_a, terms, notes)


def density_trig(k, eta, derived: DerivedBoundary, n: int, z_a: float = np.inf):
    """``rho~(k)`` of the homogeneous open XXZ sector (``sigma~ = 1``)."""
    return trig_density_model(eta, derived, n, z_a).fourier(k)


def boundary_string_delta(k, eta, alpha, n: int, shift: float = np.pi):
    """``delta rho~(k) = -(1/N)(e^{-(2eta-alpha)|k|} + e^{(2eta-alpha)|k|}) e^{-ik shift}``."""
    k = np.asarray(k, dtype=float)
    c = 2 * eta - alpha
    return -(np.exp(-c * np.abs(k)) + np.exp(c * np.abs(k))) * np.exp(-1j * k * shift) / n


def rational_density_model(p, q, xi, n: int, z_a: float = np.inf) -> DensityModel:
    """Ground-state density of the reduced isotropic chain (bulk 2-string centres)."""
    r = math.sqrt(1 + xi * xi)
    qq = abs(q) / r
    terms = [(1.0, 1.0, 0.0), (-1.0, 0.5, 0.0), (1.0, abs(p), 0.0), (1.0, qq, 0.0)]
    if np.isfinite(z_a):
        terms += [(-1.0, z_a + 0.5, 0.0), (-1.0, z_a - 0.5, 0.0)]
    return DensityModel("rational", n, None, z_a, terms, _xxx_regime_notes(p, q, xi))


def density_rational(k, p, q, xi, n: int, z_a: float = np.inf):
    return rational_density_model(p, q, xi, n, z_a).fourier(k)


# ---------------------------------------------------------------------------
# trig energies
# ---------------------------------------------------------------------------


def coth_fourier(m, eta, nodes: int = 4096):
    """Fourier coefficients ``c_m`` of ``coth((2 eta + i z)/2)`` by trapezoid quadrature."""
    z = -np.pi + 2 * np.pi * np.arange(nodes) / nodes
    f = 1 / np.tanh((2 * eta + 1j * z) / 2)
    m = np.atleast_1d(np.asarray(m))
    return np.array([np.mean(f * np.exp(-1j * mm * z)) for mm in m])


def _pairing_sum(eta_eff, x, mmax):
    """``sum_{m >= 0} c_{-m} e^{i m x}`` for the kernel at ``eta_eff``."""
    m = np.arange(0, mmax + 1)
    c = coth_fourier(-m, eta_eff)
    return complex(np.sum(c * np.exp(1j * m * x)))


def energy_pairing(model: DensityModel, mmax: int | None = None) -> complex:
    """``int_{-pi}^{pi} coth((2 eta + i z)/2) rho(z) dz`` computed in Fourier space.

    Only ``m <= 0`` coefficients of the kernel are non-zero and decay as
    ``e^{-2 m eta}``, so a term ``e^{-r|k|}`` pairs with the kernel at
    ``eta + r/2``; growing terms (``r < 0``) stay finite while ``2 eta + r > 0``.
    """
    eta = model.eta

    def one(rate, x):
        e_eff = eta + rate / 2
        if e_eff <= 0:
            raise ValueError("density term grows faster than the kernel decays")
        mm = mmax if mmax is not None else int(np.ceil(40 / e_eff)) + 10
        return _pairing_sum(e_eff, x, mm)

    total = 2 * one(2 * eta, 0.0)
    for w, r, x in model.terms:
        total += w / model.n * one(r, x)
    return total


def _alpha_bracket(eta, derived: DerivedBoundary, sp):
    """Bracketed boundary terms of the XXZ ground energy, as a breakdown dict."""
    a1 = complex(derived.alpha1).real
    a1p = complex(derived.alpha1p).real
    return {
        "coth(2eta)": _coth(2 * eta),
        "-coth(eta)": -_coth(eta),
        "-tanh(eta)": -np.tanh(eta),
        "tanh(alpha1/2)": np.tanh(a1 / 2),
        "tanh(alpha1'/2)": np.tanh(a1p / 2),
        "coth(alpha2_bar/2)": _coth(derived.alpha2_bar / 2),
        "coth(alpha2'_bar/2)": _coth(derived.alpha2p_bar / 2),
        "-tanh(2eta)coth(s')": -np.tanh(2 * eta) * _coth(complex(sp).real),
    }


def ground_energy_trig(n: int, eta, derived: DerivedBoundary, sp, z_a: float = np.inf) -> float:
    """Ground energy of the open XXZ sector; ``z_a = inf`` is the thermodynamic limit."""
    bracket = sum(_alpha_bracket(eta, derived, sp).values())
    za_term = -2.0 if not np.isfinite(z_a) else 2 * np.tanh((2 * eta - z_a) / 2)
    return float(-n / 2 * _coth(2 * eta) - 0.25 * (bracket + za_term))


def ground_energy_trig_quadrature(n: int, eta, derived: DerivedBoundary, sp, z_a: float) -> float:
    """Same energy from the density by Fourier-space quadrature (finite ``z_a``)."""
    model = trig_density_model(eta, derived, n, z_a)
    e = (-n / 4 * energy_pairing(model) + np.tanh(2 * eta) / 4 * (1 + _coth(complex(sp).real))
         - 0.25 * (np.tanh((2 * eta + z_a) / 2) + np.tanh((2 * eta - z_a) / 2)))
    return float(np.real(e))


def z_a_prediction(n: int, eta, intercept: float = ZA_INTERCEPT) -> float:
    """Additional-root height ``2 eta N + C'``; the intercept depends on the boundary."""
    return 2 * eta * n + intercept


def boundary_string_correction_trig(eta, alpha1, n: int = 1, mmax: int | None = None) -> float:
    """Energy shift from one boundary string ``pi +- (2 eta - alpha1) i``; vanishes for ``0 < alpha1 < 2 eta``.

    ``-(N/4) int coth((2 eta + iz)/2) delta rho(z) dz - (tanh(alpha1/2) + tanh((4 eta - alpha1)/2)) / 4``
    with the integral taken in Fourier space.
    """
    if not 0 < alpha1 < 2 * eta:
        raise ValueError("the boundary string needs 0 < alpha1 < 2 eta")
    model = DensityModel("trig", n, eta, np.inf, [(-1.0, 2 * eta - alpha1, np.pi), (-1.0, alpha1 - 2 * eta, np.pi)])
    # the bulk part of the model is not wanted here: remove its pairing
    integral = energy_pairing(model, mmax) - 2 * _pairing_sum(2 * eta, 0.0, int(np.ceil(20 / eta)) + 10)
    return float(np.real(-n / 4 * integral - 0.25 * (np.tanh(alpha1 / 2) + np.tanh((4 * eta - alpha1) / 2))))


# ---------------------------------------------------------------------------
# surface energies
# ---------------------------------------------------------------------------


@dataclass
class SurfaceEnergyResult:
    value: float
    breakdown: dict
    params: object = None
    notes: list = field(default_factory=list)

    def check(self, tol: float = 1e-12) -> float:
        """``|value - sum(breakdown)|``."""
        return abs(self.value - sum(self.breakdown.values()))


def _hermitian_derived(params: XXZBoundary | DerivedBoundary) -> DerivedBoundary:
    if isinstance(params, DerivedBoundary):
        return params
    return vx.derived_boundary(params, mode="hermitian")


def surface_energy_xxz(eta, derived: DerivedBoundary | XXZBoundary, sp=None) -> SurfaceEnergyResult:
    """Surface energy of the open XXZ sector relative to ``-N/2 coth 2 eta``.

    ``derived`` may be an :class:`XXZBoundary` (hermitian selection applied
    here, ``sp`` taken from it).
    """
    if isinstance(derived, XXZBoundary):
        sp = derived.sp if sp is None else sp
    if sp is None:
        raise ValueError("s' is needed for the surface energy")
    d = _hermitian_derived(derived)
    br = {"z_a limit": 0.5}
    br.update({k: -0.25 * v for k, v in _alpha_bracket(eta, d, sp).items()})
    br = {k: float(np.real(v)) for k, v in br.items()}
    notes = []
    _check_positive_alpha(d, eta, notes)
    return SurfaceEnergyResult(sum(br.values()), br, d, notes)


def surface_energy_d2_trig(eta, derived_s, derived_t, sp=None, tp=None) -> SurfaceEnergyResult:
    """Surface energy of the anisotropic D2 chain: the two XXZ sectors added.

    Each sector carries its own selection rule (the t-sector decides its flip
    from ``coth t coth t'``), since the D2 Hamiltonian is the Kronecker sum of
    the two sectors.
    """
    rs = surface_energy_xxz(eta, derived_s, sp)
    rt = surface_energy_xxz(eta, derived_t, tp)
    br = {f"s+ {k}": v for k, v in rs.breakdown.items()}
    br.update({f"s- {k}": v for k, v in rt.breakdown.items()})
    return SurfaceEnergyResult(rs.value + rt.value, br, (rs.params, rt.params), rs.notes + rt.notes)


def _xxx_regime_notes(p, q, xi):
    notes = []
    r = math.sqrt(1 + xi * xi)
    if not p > 0.5:
        notes.append(f"p = {p} is outside p > 1/2")
    if not q / r < -0.5:
        notes.append(f"q / sqrt(1 + xi^2) = {q / r} is outside < -1/2")
    return notes


def xxx_boundary_integral(p, q, xi, tol: float = QUAD_ABS_TOL) -> float:
    """``int_0^inf (e^{-|p| w} + e^{-|q| w / sqrt(1+xi^2)}) / (1 + e^{-w}) dw`` via ``x = e^{-w}``."""
    r = math.sqrt(1 + xi * xi)
    ap, aq = abs(p), abs(q) / r
    # substituting x = e^{-w} maps the half line onto (0, 1)
    val, _ = quad(lambda x: (x ** (ap - 1) + x ** (aq - 1)) / (1 + x), 0, 1, epsabs=tol, epsrel=1e-13, limit=200)
    return val


def surface_energy_xxx(p, q, xi) -> SurfaceEnergyResult:
    """Surface energy of the reduced isotropic chain relative to ``N (1 - 2 ln 2)``."""
    notes = _xxx_regime_notes(p, q, xi)
    for msg in notes:
        warnings.warn(msg, RegimeWarning, stacklevel=2)
    r = math.sqrt(1 + xi * xi)
    br = {
        "(pi-1)/2 - ln 2": (np.pi - 1) / 2 - np.log(2),
        "1/(2|p|)": 1 / (2 * abs(p)),
        "sqrt(1+xi^2)/(2|q|)": r / (2 * abs(q)),
        "-integral": -xxx_boundary_integral(p, q, xi),
    }
    return SurfaceEnergyResult(sum(br.values()), br, (p, q, xi), notes)


def ground_energy_xxx(n: int, p, q, xi) -> float:
    """Ground energy of the reduced isotropic chain (thermodynamic limit form)."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        return n * (1 - 2 * np.log(2)) + surface_energy_xxx(p, q, xi).value


def ground_energy_xxx_quadrature(n: int, p, q, xi, z_a: float = np.inf) -> float:
    """Same energy from ``(N/4) int (e^{-3|k|/2} - e^{-|k|/2}) rho~(k) dk + 2/(1 - 4 z_a^2)``."""
    model = rational_density_model(p, q, xi, n, z_a)

    def integrand(k):
        return float(np.real((np.exp(-1.5 * k) - np.exp(-0.5 * k)) * model.fourier(k)))

    val, _ = quad(integrand, 0, np.inf, epsabs=1e-12, epsrel=1e-12, limit=400)
    extra = 0.0 if not np.isfinite(z_a) else 2 / (1 - 4 * z_a**2)
    return float(n / 4 * 2 * val + extra)


def surface_energy_d2_rational(red_s, red_t) -> SurfaceEnergyResult:
    """Isotropic D2 surface energy: the two reduced sectors added.

    ``red_s`` and ``red_t`` are ``(p, q, xi)`` tuples or objects with those
    attributes.
    """
    def pqx(r):
        return (r.p, r.q, r.xi) if hasattr(r, "p") else tuple(r)

    rs = surface_energy_xxx(*pqx(red_s))
    rt = surface_energy_xxx(*pqx(red_t))
    br = {f"s+ {k}": v for k, v in rs.breakdown.items()}
    br.update({f"s- {k}": v for k, v in rt.breakdown.items()})
    return SurfaceEnergyResult(rs.value + rt.value, br, (rs.params, rt.params), rs.notes + rt.notes)
