"""Finite-size scans and extrapolation fits.

A scan evaluates one quantity (``z_a``, ground energy or surface energy) for
a list of chain lengths with either exact diagonalization or the zero-root
solver, and returns a table that the fits below turn into thermodynamic-limit
numbers.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import bethe as bt
from . import hamiltonians as hm
from . import spectra as spc
from . import thermo as th
from . import transfer as tr
from . import vertex as vx
from .vertex import D2Boundary, ModelKind, XXZBoundary

log = logging.getLogger(__name__)

FAMILIES = ("xxz", "d2", "xxx", "xxz_periodic", "d2_periodic", "xxx_periodic")
QUANTITIES = ("z_a", "ground_energy", "surface_energy")
BACKENDS = ("ed", "zero_root_solver")
# largest N per backend and family
CAPS = {
    ("ed", "xxz"): 14, ("ed", "xxx"): 14, ("ed", "xxz_periodic"): 14, ("ed", "xxx_periodic"): 14,
    # the D2 chain is the Kronecker sum of two XXZ sectors, so its ground
    # energy is the sum of the sector ground energies
    ("ed", "d2"): 14, ("ed", "d2_periodic"): 8,
    ("zero_root_solver", "xxz"): 40,
}
EXP_BRACKET = (0.05, 10.0)


@dataclass(frozen=True)
class ScanSpec:
    """One scan: ``family`` at ``eta`` with ``params``, over ``ns``.

    ``params``: :class:`XXZBoundary` (``xxz``), :class:`D2Boundary` (``d2``),
    ``(p, q, xi)`` (``xxx``), None for periodic chains.
    """

    family: str
    ns: tuple
    quantity: str = "ground_energy"
    backend: str = "ed"
    eta: float | None = None
    params: object = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "ns", tuple(int(n) for n in self.ns))
        self.validate()

    def validate(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.quantity not in QUANTITIES:
            raise ValueError(f"unknown quantity {self.quantity!r}")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if not self.ns or any(b <= a for a, b in zip(self.ns, self.ns[1:])):
            raise ValueError("N list must be non-empty and strictly increasing")
        cap = CAPS.get((self.backend, self.family))
        if cap is None:
            raise ValueError(f"backend {self.backend!r} does not support family {self.family!r}")
        if self.ns[0] < 1 or self.ns[-1] > cap:
            raise ValueError(f"N must lie in [1, {cap}] for {self.backend}/{self.family}")
        if self.family.startswith("xxx"):
            if self.eta is not None:
                raise ValueError("the isotropic chain takes no eta")
        elif self.eta is None or self.eta <= 0:
            raise ValueError("trig families need eta > 0")
        if self.quantity == "z_a" and self.family != "xxz":
            raise ValueError("z_a scans are defined for the open XXZ sector")
        if self.family == "xxz" and not isinstance(self.params, XXZBoundary):
            raise ValueError("xxz scans need an XXZBoundary")
        if self.family == "d2" and not isinstance(self.params, D2Boundary):
            raise ValueError("d2 scans need a D2Boundary")
        if self.family == "xxx" and (self.params is None or len(tuple(self.params)) != 3):
            raise ValueError("xxx scans need (p, q, xi)")


@dataclass
class ScanTable:
    spec: ScanSpec
    ns: np.ndarray
    values: np.ndarray
    flags: list = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.flags

    def rows(self):
        return [(int(n), float(v)) for n, v in zip(self.ns, self.values)]

    def valid(self) -> "ScanTable":
        ok = np.isfinite(self.values)
        return ScanTable(self.spec, self.ns[ok], self.values[ok], self.flags)


def bulk_energy_per_site(family: str, eta=None) -> float:
    """Thermodynamic ground energy per site of the matching periodic chain."""
    if family.startswith("xxz"):
        return -0.5 / np.tanh(2 * eta)
    if family.startswith("d2"):
        return -1 / np.tanh(2 * eta)
    return 1 - 2 * np.log(2)


def _ed_ground(spec: ScanSpec, n: int) -> float:
    f, eta = spec.family, spec.eta
    if f == "xxz":
        return spc.ground_state(hm.h_xxz_open(n, eta, spec.params, sparse=n > 8))[0]
    if f == "d2":
        return (spc.ground_state(hm.h_xxz_open(n, eta, spec.params.splus, sparse=n > 8))[0]
                + spc.ground_state(hm.h_xxz_open(n, eta, spec.params.sminus, sparse=n > 8))[0])
    if f == "xxx":
        return spc.ground_state(hm.h_xxx_family("xxx_reduced", n, tuple(spec.params), sparse=n > 8))[0]
    kind = f.split("_")[0]
    return spc.ground_state(hm.h_periodic(kind, n, eta, sparse=True))[0]


def additional_root_height(zs: spc.ZeroRootSet, derived: vx.DerivedBoundary) -> float:
    """Largest ``|Im z|`` among the roots classified as additional."""
    spc.classify_roots(zs, derived=derived)
    heights = [abs(complex(z).imag) for z, c in zip(zs.roots, zs.classes) if c[0] == "additional"]
    if not heights:
        raise ValueError("no additional roots in this root set")
    return max(heights)


def _z_a(spec: ScanSpec, n: int) -> float:
    hs, eta = spec.params, spec.eta
    derived = vx.derived_boundary(hs, mode="hermitian")
    if spec.backend == "ed":
        _, psi = spc.ground_state(hm.h_xxz_open(n, eta, hs))
        fam = tr.TransferFamily(ModelKind.XXZ_TRIG, n, hs, eta)
        zs = spc.extract_zero_roots(spc.eigenvalue_sampler(fam, psi))
    else:
        zs = bt.solve_zero_roots(bt.ZeroRootSystem("trig", n, hs, eta), derived=derived)
    return additional_root_height(zs, derived)


def _point(spec: ScanSpec, n: int) -> float:
    if spec.quantity == "z_a":
        return _z_a(spec, n)
    if spec.backend != "ed":
        if spec.family != "xxz":
            raise ValueError("the zero-root backend covers the open XXZ sector")
        zs = bt.solve_zero_roots(bt.ZeroRootSystem("trig", n, spec.params, spec.eta),
                                 derived=vx.derived_boundary(spec.params, mode="hermitian"))
        e = float(spc.energy_from_roots(zs, sp=spec.params.sp).real)
    else:
        e = float(_ed_ground(spec, n))
    if spec.quantity == "surface_energy":
        e -= n * bulk_energy_per_site(spec.family, spec.eta)
    return e


def run_scan(spec: ScanSpec) -> ScanTable:
    """Evaluate ``spec.quantity`` for every N; failed points become NaN with a flag."""
    def one(n):
        try:
            return _point(spec, n), None
        except (ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
            log.warning("scan point N=%d failed: %s", n, exc)
            return np.nan, f"N={n}: {exc}"

    if spec.workers > 1:
        with ThreadPoolExecutor(spec.workers) as pool:
            out = list(pool.map(one, spec.ns))
    else:
        out = [one(n) for n in spec.ns]
    values = np.array([v for v, _ in out], dtype=float)
    flags = [f for _, f in out if f is not None]
    return ScanTable(spec, np.array(spec.ns), values, flags)


# ---------------------------------------------------------------------------
# fits
# ---------------------------------------------------------------------------


@dataclass
class FitResult:
    model: str
    coefficients: dict
    residual: float
    covariance: np.ndarray
    table: list

    @property
    def limit(self) -> float:
        """Thermodynamic-limit value for the extrapolation models."""
        for key in ("E_inf", "c0"):
            if key in self.coefficients:
                return self.coefficients[key]
        raise KeyError("this model has no limit coefficient")


def _xy(table):
    if isinstance(table, ScanTable):
        table = table.valid()
        return np.asarray(table.ns, float), np.asarray(table.values, float)
    arr = np.asarray(table, dtype=float)
    return arr[:, 0], arr[:, 1]


def _cov(jac, resid):
    dof = max(len(resid) - jac.shape[1], 1)
    s2 = float(resid @ resid) / dof
    return s2 * np.linalg.pinv(jac.T @ jac)


def _rows(x, y, fit):
    return [(float(a), float(b), float(c), float(b - c)) for a, b, c in zip(x, y, fit)]


def fit_linear(table) -> FitResult:
    """Least squares ``a N + b``."""
    x, y = _xy(table)
    if len(x) < 3:
        raise ValueError("linear fit needs at least 3 points")
    jac = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(jac, y, rcond=None)
    fit = jac @ coef
    r = y - fit
    return FitResult("linear", {"a": float(coef[0]), "b": float(coef[1])}, float(np.linalg.norm(r)),
                     _cov(jac, r), _rows(x, y, fit))


def _exp_project(d, x, y):
    basis = np.column_stack([np.exp(-d * x), np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    return coef, y - basis @ coef


def fit_exponential(table, bracket=EXP_BRACKET, grid: int = 400) -> FitResult:
    """``c e^{-d N} + E_inf`` by variable projection over ``d``.

    ``c`` and ``E_inf`` are linear given ``d``; ``d`` is located on a
    log-spaced grid over ``bracket`` and refined by a bounded scalar search.
    """
    x, y = _xy(table)
    if len(x) < 4:
        raise ValueError("exponential fit needs at least 4 points")

    def cost(d):
        return float(np.sum(_exp_project(d, x, y)[1] ** 2))

    ds = np.geomspace(*bracket, grid)
    costs = np.array([cost(d) for d in ds])
    i = int(np.argmin(costs))
    lo, hi = ds[max(i - 1, 0)], ds[min(i + 1, grid - 1)]
    res = minimize_scalar(cost, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13, "maxiter": 500})
    if not res.success:
        raise RuntimeError(f"exponential fit: d search failed ({res.message})")
    d = float(res.x) if res.fun <= costs[i] else float(ds[i])
    (c, e_inf), r = _exp_project(d, x, y)
    jac = np.column_stack([np.exp(-d * x), -c * x * np.exp(-d * x), np.ones_like(x)])
    return FitResult("exponential", {"c": float(c), "d": d, "E_inf": float(e_inf)},
                     float(np.linalg.norm(r)), _cov(jac, r), _rows(x, y, y - r))


def fit_inverse_power(table, order: int = 3) -> FitResult:
    """``c0 + c1/N + ... + c_order/N^order``, for gapless chains."""
    x, y = _xy(table)
    if len(x) < order + 2:
        raise ValueError(f"inverse-power fit of order {order} needs at least {order + 2} points")
    jac = np.column_stack([x ** -j for j in range(order + 1)])
    coef, *_ = np.linalg.lstsq(jac, y, rcond=None)
    fit = jac @ coef
    r = y - fit
    return FitResult(f"inverse_power{order}", {f"c{j}": float(c) for j, c in enumerate(coef)},
                     float(np.linalg.norm(r)), _cov(jac, r), _rows(x, y, fit))


# ---------------------------------------------------------------------------
# reference protocols
# ---------------------------------------------------------------------------

# reference boundary fields of the z_a scaling study (coefficients of
# sigma^x +- i sigma^y and sigma^z)
ZA_FIELDS = dict(h1_plus=0.23 + 0.36j, h1_z=1.2, hN_plus=0.82 + 0.93j, hN_z=3.23)


def za_params(eta, fields: dict | None = None) -> XXZBoundary:
    return hm.params_from_fields(hm.fields_from_pauli(**(fields or ZA_FIELDS)), eta)


def za_protocol(etas=(0.5, 0.75, 1.0), ns=range(4, 10), backend: str = "ed", fields=None) -> dict:
    """``z_a(N)`` per eta with the linear fit; keys are the eta values."""
    out = {}
    for eta in etas:
        spec = ScanSpec("xxz", tuple(ns), "z_a", backend, eta, za_params(eta, fields))
        table = run_scan(spec)
        out[eta] = (table, fit_linear(table))
    return out


def surface_energy_protocol(eta, params: D2Boundary, ns=range(4, 10)) -> dict:
    """ED surface energies of the D2 chain, exponential extrapolation and the closed form."""
    table = run_scan(ScanSpec("d2", tuple(ns), "surface_energy", "ed", eta, params))
    fit = fit_exponential(table)
    formula = th.surface_energy_d2_trig(eta, params.splus, params.sminus)
    return {"table": table, "fit": fit, "formula": formula, "deviation": abs(fit.limit - formula.value)}


def surface_energy_sweep(eta, params: D2Boundary, xs, ns=range(4, 10)) -> list:
    """Closed form and ED extrapolation as ``Re(s1)`` of the s-sector varies (``s2 = s1*``).

    Returns ``(x, analytic, ed)`` rows.
    """
    rows = []
    for x in xs:
        s = params.splus
        s1 = complex(x, s.s1.imag)
        ps = D2Boundary(XXZBoundary(s.s, s1, np.conj(s1), s.sp, s.s1p, s.s2p), params.sminus)
        res = surface_energy_protocol(eta, ps, ns)
        rows.append((float(x), float(res["formula"].value), float(res["fit"].limit)))
    return rows


def xxx_surface_protocol(p, q, xi, ns=range(6, 15, 2), order: int = 3) -> dict:
    """ED surface energies of the reduced isotropic chain with an inverse-power extrapolation."""
    table = run_scan(ScanSpec("xxx", tuple(ns), "surface_energy", "ed", None, (p, q, xi)))
    fit = fit_inverse_power(table, order)
    formula = th.surface_energy_xxx(p, q, xi)
    return {"table": table, "fit": fit, "formula": formula, "deviation": abs(fit.limit - formula.value)}
