"""Zero-root (t-W) equations, the inhomogeneous T-Q relation, and their solvers.

Zero roots are handled through one representative per ``(z, -z)`` pair, the
same symmetric-variable form used by :mod:`d2chain.spectra`:

    trig:     Lambda(u) = Lambda_0 prod_pairs (cosh(u - 2 eta) - cos z) / 2
    rational: Lambda(u) = 2 prod_pairs ((u + 1/2)^2 + z^2)

which builds crossing symmetry in and removes the ``z -> -z`` null directions
from Newton's Jacobian.
"""
from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import spectra as spc
from . import transfer as tr
from . import vertex as vx
from .tensor import fit_polynomial
from .thermo import z_a_prediction
from .transfer import ReducedXXX, TransferFamily
from .vertex import DerivedBoundary, ModelKind, XXZBoundary

NEWTON_TOL = 1e-10
MAX_NEWTON = 50
HOMOTOPY_STEP = 0.13
HOMOTOPY_EPS = np.r_[np.geomspace(1.0, 1e-3, 10), 0.0]
COINCIDE_TOL = 1e-3
BAE_LOOSE = 1e-6


class ConvergenceError(RuntimeError):
    pass


def _kind_name(kind) -> str:
    if isinstance(kind, ModelKind):
        return "trig" if kind.trig else "rational"
    if kind not in ("trig", "rational"):
        raise ValueError(f"unknown kind {kind!r}")
    return kind


# ---------------------------------------------------------------------------
# zero-root system
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroRootSystem:
    """Bethe-ansatz-like equations for the ``2N+4`` (trig) or ``2N+2`` (rational) zero roots.

    ``boundary`` is an :class:`XXZBoundary` (trig XXZ sector) or a
    :class:`ReducedXXX` (rational chain).
    """

    kind: str
    n: int
    boundary: object
    eta: float | None = None
    thetas: tuple = field(default=())
    derived: DerivedBoundary | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", _kind_name(self.kind))
        th = tuple(complex(t) for t in self.thetas) if self.thetas else (0j,) * self.n
        if len(th) != self.n:
            raise ValueError(f"expected {self.n} inhomogeneities")
        object.__setattr__(self, "thetas", th)
        if self.kind == "trig":
            if self.eta is None or not isinstance(self.boundary, XXZBoundary):
                raise ValueError("trig system needs eta and an XXZBoundary")
            if self.derived is None:
                object.__setattr__(self, "derived", vx.derived_boundary(self.boundary, mode="generic"))
        elif not isinstance(self.boundary, ReducedXXX):
            raise ValueError("rational system needs a ReducedXXX boundary")

    @classmethod
    def from_family(cls, family: TransferFamily, derived: DerivedBoundary | None = None):
        if family.kind is ModelKind.XXZ_TRIG:
            return cls("trig", family.n, family.boundary, family.eta, family.thetas, derived)
        if family.reduced:
            return cls("rational", family.n, family.boundary, None, family.thetas)
        raise ValueError("zero-root systems exist for the XXZ sector and the reduced XXX chain")

    @property
    def family(self) -> TransferFamily:
        kind = ModelKind.XXZ_TRIG if self.kind == "trig" else ModelKind.XXX_RATIONAL
        return TransferFamily(kind, self.n, self.boundary, self.eta, self.thetas)

    @property
    def half(self) -> int:
        return self.n + 2 if self.kind == "trig" else self.n + 1

    @property
    def unknown_count(self) -> int:
        return 2 * self.half

    @property
    def leading(self) -> complex:
        if self.kind == "trig":
            return spc.expected_lambda0(self.boundary, self.eta)
        return 2.0

    def with_thetas(self, thetas) -> "ZeroRootSystem":
        return ZeroRootSystem(self.kind, self.n, self.boundary, self.eta, tuple(thetas), self.derived)


def pair_representatives(z, kind: str) -> np.ndarray:
    """One member of each ``(z, -z)`` pair of a crossing-symmetric root set."""
    if isinstance(z, spc.ZeroRootSet):
        return np.asarray(z.roots[: len(z.roots) // 2], dtype=complex)
    z = np.asarray(z, dtype=complex)
    if len(z) % 2:
        raise ValueError("root set has odd length")
    periodic = kind == "trig"
    cost = spc._pdist(z[:, None], -z[None, :], periodic)
    np.fill_diagonal(cost, np.inf)
    rows, cols = linear_sum_assignment(np.where(np.isfinite(cost), cost, 1e300))
    partner = dict(zip(rows, cols))
    used, reps = set(), []
    for i in range(len(z)):
        if i in used:
            continue
        j = partner[i]
        if j in used:
            j = min((k for k in range(len(z)) if k not in used and k != i), key=lambda k: cost[i, k])
        used.update((i, j))
        reps.append(z[i])
    return np.array(reps)


def _factors(sys: ZeroRootSystem, reps, u):
    """Pair factors ``f_k(u)`` and ``df_k/dz_k`` (shape ``(len(u), half)``)."""
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    reps = np.asarray(reps, dtype=complex)
    if sys.kind == "trig":
        c = np.cosh(u - 2 * sys.eta)[:, None]
        return (c - np.cos(reps)) / 2, np.broadcast_to(np.sin(reps) / 2, (len(u), len(reps)))
    c = ((u + 0.5) ** 2)[:, None]
    return c + reps**2, np.broadcast_to(2 * reps, (len(u), len(reps)))


def _lambda_and_grad(sys: ZeroRootSystem, reps, u):
    """``Lambda(u)`` from pair representatives and its gradient in the representatives."""
    f, df = _factors(sys, reps, u)
    h = f.shape[1]
    # products over all factors but one, without dividing
    ones = np.ones((f.shape[0], 1), dtype=complex)
    pre = np.cumprod(np.hstack([ones, f[:, :-1]]), axis=1)
    suf = np.cumprod(np.hstack([ones, f[:, :0:-1]]), axis=1)[:, ::-1]
    others = pre * suf
    lam = sys.leading * pre[:, -1] * f[:, -1] if h else np.full(f.shape[0], sys.leading)
    return lam, sys.leading * others * df


def lambda_from_roots(sys: ZeroRootSystem, z, u):
    """Eigenvalue function rebuilt from a (full or paired) root set."""
    reps = pair_representatives(z, sys.kind) if len(np.atleast_1d(z)) != sys.half else np.asarray(z)
    return _lambda_and_grad(sys, reps, u)[0]


def _abar_s(sys, u):
    return tr.abar_s(complex(u), sys.family)


def fusion_rhs(sys: ZeroRootSystem, x) -> complex:
    """Right-hand side of ``Lambda(x) Lambda(x + 4 eta)`` (trig) or ``Lambda(x) Lambda(x - 1)`` (rational)."""
    if sys.kind == "trig":
        return tr.fusion_scalar(sys.family, complex(x), sys.derived)
    return _abar_s(sys, x) * _abar_s(sys, -complex(x))


def _fusion_rhs_regular(sys: ZeroRootSystem, x) -> complex:
    """``D(x) * fusion_rhs(x)`` with the pole factor ``D`` cancelled analytically."""
    x = complex(x)
    if sys.kind == "trig":
        eta, d = sys.eta, sys.derived
        sh, ch = cmath.sinh, cmath.cosh
        val = 4 * sh(x - 4 * eta) * sh(x + 4 * eta) / (d.alpha * d.alphap)
        for a in (d.alpha1, d.alpha2, d.alpha1p, d.alpha2p):
            val *= ch((x - a) / 2) * ch((x + a) / 2)
        for th in sys.thetas:
            val *= (sh((x - th - 4 * eta) / 2) * sh((x - th + 4 * eta) / 2)
                    * sh((x + th - 4 * eta) / 2) * sh((x + th + 4 * eta) / 2))
        return val
    b = sys.boundary
    r = np.sqrt(1 + b.xi**2)
    val = (x + 1) * (1 - x) * (x + b.p) * (r * x + b.q) * (-x + b.p) * (-r * x + b.q)
    for th in sys.thetas:
        val *= (x - th + 1) * (x + th + 1) * (-x - th + 1) * (-x + th + 1)
    return val


def _pole_factor(sys: ZeroRootSystem, x):
    if sys.kind == "trig":
        return np.sinh(x - 2 * sys.eta) * np.sinh(x + 2 * sys.eta)
    return (x + 0.5) * (0.5 - x)


def _partner(sys: ZeroRootSystem, x):
    return x + 4 * sys.eta if sys.kind == "trig" else x - 1


def special_conditions(sys: ZeroRootSystem):
    """``(points, values)`` of the special-value conditions."""
    if sys.kind == "trig":
        fam, eta = sys.family, sys.eta
        v0, vpi = tr.special_value_zero(fam), tr.special_value_ipi(fam)
        return np.array([0, 4 * eta, 1j * np.pi, -1j * np.pi + 4 * eta]), np.array([v0, v0, vpi, vpi])
    a0 = _abar_s(sys, 0)
    return np.array([0.0, -1.0], dtype=complex), np.array([a0, a0])


def _rel(lhs, rhs):
    rhs = np.asarray(rhs, dtype=complex)
    return (np.asarray(lhs) - rhs) / np.maximum(np.abs(rhs), 1e-300)


def zero_root_residuals(sys: ZeroRootSystem, z) -> np.ndarray:
    """Relative residuals ``(LHS - RHS)/|RHS|`` of the zero-root equations.

    Order: fusion conditions at ``+theta_j`` and ``-theta_j`` for j = 1..N,
    then the special-value conditions (``u = 0, 4 eta, i pi, -i pi + 4 eta``
    trig; ``u = 0, -1`` rational). Length equals the number of roots.
    """
    zfull = z.roots if isinstance(z, spc.ZeroRootSet) else np.asarray(z, dtype=complex)
    if len(zfull) != sys.unknown_count:
        raise ValueError(f"expected {sys.unknown_count} roots, got {len(zfull)}")
    reps = pair_representatives(z, sys.kind)
    xs = np.array([s * th for th in sys.thetas for s in (1, -1)], dtype=complex)
    lam_x = _lambda_and_grad(sys, reps, xs)[0]
    lam_p = _lambda_and_grad(sys, reps, _partner(sys, xs))[0]
    fus = _rel(lam_x * lam_p, [fusion_rhs(sys, x) for x in xs])
    pts, vals = special_conditions(sys)
    spec = _rel(_lambda_and_grad(sys, reps, pts)[0], vals)
    return np.concatenate([fus, spec])


def _distinct_thetas(sys: ZeroRootSystem, tol: float = COINCIDE_TOL) -> bool:
    y = np.array([t * t for t in sys.thetas] + [0j])
    d = np.abs(y[:, None] - y[None, :]) + np.eye(len(y)) * 1e300
    return bool(d.min() > tol)


def _contour(sys: ZeroRootSystem):
    r = max(0.5, 1.5 * max((abs(t) for t in sys.thetas), default=0.0))
    m = 64 + 8 * sys.n
    return r * np.exp(2j * np.pi * (np.arange(m) + 0.5) / m)


def square_system(sys: ZeroRootSystem, reps):
    """Independent equations in the pair representatives with their Jacobian.

    Distinct ``theta_j^2`` (all nonzero): the fusion conditions at ``+theta_j``.
    Otherwise (e.g. the homogeneous chain) the confluent form: moments
    ``(1/2 pi i) oint D(x) F(x) x^(2m-1) / prod_j (x^2 - theta_j^2) dx``,
    ``m = 0..N-1``, of ``F(x) = Lambda(x) Lambda(x') - rhs(x)`` (even in x),
    which vanish iff ``F`` vanishes at every ``theta_j`` with multiplicity.
    Then one special-value condition per distinct point (``0`` and ``i pi``
    trig, ``0`` rational).
    """
    reps = np.asarray(reps, dtype=complex)
    rows, jac = [], []
    if _distinct_thetas(sys):
        xs = np.array(sys.thetas, dtype=complex)
        lx, gx = _lambda_and_grad(sys, reps, xs)
        lp, gp = _lambda_and_grad(sys, reps, _partner(sys, xs))
        rhs = np.array([fusion_rhs(sys, x) for x in xs])
        scale = np.maximum(np.abs(rhs), 1e-300)
        rows.append((lx * lp - rhs) / scale)
        jac.append((gx * lp[:, None] + lx[:, None] * gp) / scale[:, None])
    else:
        xs = _contour(sys)
        lx, gx = _lambda_and_grad(sys, reps, xs)
        lp, gp = _lambda_and_grad(sys, reps, _partner(sys, xs))
        dpole = _pole_factor(sys, xs)
        rhs = np.array([_fusion_rhs_regular(sys, x) for x in xs])
        f = dpole * lx * lp - rhs
        df = dpole[:, None] * (gx * lp[:, None] + lx[:, None] * gp)
        th2 = np.array([t * t for t in sys.thetas])
        w = 1 / np.prod(xs[:, None] ** 2 - th2[None, :], axis=1)
        for m in range(sys.n):
            wm = w * xs ** (2 * m)
            scale = max(float(np.mean(np.abs(rhs * wm))), 1e-300)
            rows.append(np.array([np.mean(f * wm)]) / scale)
            jac.append((wm @ df)[None, :] / len(xs) / scale)
    pts, vals = special_conditions(sys)
    keep = [0, 2] if sys.kind == "trig" else [0]
    lam, g = _lambda_and_grad(sys, reps, pts[keep])
    scale = np.abs(vals[keep])
    rows.append((lam - vals[keep]) / scale)
    jac.append(g / scale[:, None])
    return np.concatenate(rows), np.vstack(jac)


@dataclass
class NewtonReport:
    converged: bool
    iterations: int
    history: list
    message: str = ""


def newton(fun, x0, tol: float = NEWTON_TOL, maxiter: int = MAX_NEWTON, cond_max: float = 1e13):
    """Damped complex Newton on ``fun(x) -> (residual, jacobian)``.

    Halves the step until the residual norm decreases (up to 30 halvings).
    Raises ``np.linalg.LinAlgError`` on a numerically singular Jacobian.
    """
    x = np.array(x0, dtype=complex)
    r, j = fun(x)
    hist = [float(np.max(np.abs(r)))]
    for it in range(1, maxiter + 1):
        if hist[-1] <= tol:
            return x, NewtonReport(True, it - 1, hist)
        sv = np.linalg.svd(j, compute_uv=False)
        if sv[-1] <= sv[0] / cond_max:
            raise np.linalg.LinAlgError(f"Jacobian singular (condition {sv[0] / max(sv[-1], 1e-300):.2e})")
        step = np.linalg.lstsq(j, -r, rcond=None)[0]
        lam = 1.0
        base = float(np.linalg.norm(r))
        for _ in range(30):
            xn = x + lam * step
            rn, jn = fun(xn)
            if np.all(np.isfinite(rn)) and np.linalg.norm(rn) < base:
                break
            lam /= 2
        else:
            return x, NewtonReport(False, it, hist, "line search failed")
        x, r, j = xn, rn, jn
        hist.append(float(np.max(np.abs(r))))
    ok = hist[-1] <= tol
    return x, NewtonReport(ok, maxiter, hist, "" if ok else "iteration limit")


def _roots_from_reps(sys: ZeroRootSystem, reps, report: NewtonReport) -> spc.ZeroRootSet:
    reps = np.asarray(reps, dtype=complex)
    if sys.kind == "trig":
        reps = spc.fold(reps)
        full = spc.fold(np.concatenate([reps, -reps]))
    else:
        full = np.concatenate([reps, -reps])
    zs = spc.ZeroRootSet(full, complex(sys.leading), sys.kind, sys.eta)
    zs.notes.append(f"newton: {report.iterations} steps, residual {report.history[-1]:.2e}")
    return zs


def solve_square(sys: ZeroRootSystem, reps0, tol: float = NEWTON_TOL, maxiter: int = MAX_NEWTON):
    """Newton on :func:`square_system`; returns ``(reps, report)``."""
    return newton(lambda r: square_system(sys, r), reps0, tol, maxiter)


def pattern_guesses(sys: ZeroRootSystem, z_a: float | None = None, derived: DerivedBoundary | None = None):
    """Ground-state starting points: real roots, boundary strings, one additional pair.

    Boundary strings follow ``pi +- (2 eta - alpha) i`` for every selected
    ``Re alpha < 2 eta`` (the hermitian selection rule when ``derived`` is
    omitted). The additional pair sits at ``Re z = pi`` or ``0`` with
    ``|Im z| = z_a``; both placements are returned, for real roots at bulk-density
    quantiles and at uniform spacing.
    """
    if sys.kind != "trig":
        raise ValueError("pattern guesses are defined for the trig system")
    eta = sys.eta
    if derived is None:
        derived = vx.derived_boundary(sys.boundary, mode="hermitian")
    strings = [complex(spc.fold(np.pi + (2 * eta - complex(a)) * 1j))
               for a in derived.all_alphas().values() if complex(a).real < 2 * eta]
    m = sys.half - len(strings) - 1
    if m < 0:
        raise ValueError("more boundary strings than root pairs")
    za = z_a_prediction(sys.n, eta) if z_a is None else z_a
    k = np.arange(1, m + 1)
    # quantiles of the bulk density sinh(2 eta) / (pi (cosh 2 eta - cos z)), then a uniform fallback
    bulk = 2 * np.arctan(np.tanh(eta) * np.tan(np.pi * k / (2 * (m + 1))))
    uniform = np.pi * (k - 0.5) / (m + 0.5)
    return [np.concatenate([real, strings, [re + 1j * za]]).astype(complex)
            for real in (bulk, uniform) for re in (np.pi, 0.0)]


def _homotopy(sys: ZeroRootSystem, reps0, tol, maxiter):
    """Continuation ``theta_j = target_j + eps * 0.13 j i`` from ``eps = 1`` to 0."""
    target = np.array(sys.thetas)
    shift = HOMOTOPY_STEP * 1j * np.arange(1, sys.n + 1)
    reps, total = np.asarray(reps0, dtype=complex), 0
    report = None
    for eps in HOMOTOPY_EPS:
        reps, report = solve_square(sys.with_thetas(target + eps * shift), reps, tol, maxiter)
        total += report.iterations
        if not report.converged:
            raise ConvergenceError(f"homotopy stalled at eps={eps:.3g}: {report.message}")
    report.iterations = total
    return reps, report


def _solve_from(sys: ZeroRootSystem, starts, strategy, tol, maxiter):
    found, errors = [], []
    for start in starts:
        sol = None
        if strategy in ("newton", "newton+homotopy"):
            try:
                reps, rep = solve_square(sys, start, tol, maxiter)
                if rep.converged:
                    sol = (reps, rep)
                else:
                    errors.append(rep.message)
            except np.linalg.LinAlgError as exc:
                errors.append(str(exc))
        if sol is None and strategy != "newton":
            try:
                sol = _homotopy(sys, start, tol, maxiter)
            except (ConvergenceError, np.linalg.LinAlgError) as exc:
                errors.append(str(exc))
        if sol is not None:
            found.append(_roots_from_reps(sys, *sol))
    return found, errors


def solve_zero_roots(sys: ZeroRootSystem, initial=None, strategy: str = "newton+homotopy",
                     tol: float = NEWTON_TOL, maxiter: int = MAX_NEWTON, derived=None) -> spc.ZeroRootSet:
    """Solve the zero-root equations.

    ``initial`` is a full root set, pair representatives, a
    :class:`~d2chain.spectra.ZeroRootSet`, or None for the ground-state
    pattern guesses (trig only; the lowest-energy converged candidate wins).
    ``strategy`` is ``"newton"``, ``"homotopy"`` or ``"newton+homotopy"``
    (homotopy as fallback).
    """
    if strategy not in ("newton", "homotopy", "newton+homotopy"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if initial is None:
        starts = pattern_guesses(sys, derived=derived)
    elif isinstance(initial, spc.ZeroRootSet) or len(initial) == sys.unknown_count:
        starts = [pair_representatives(initial, sys.kind)]
    elif len(initial) == sys.half:
        starts = [np.asarray(initial, dtype=complex)]
    else:
        raise ValueError(f"initial guess has {len(initial)} entries")
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        # poor starting points may run off to large |Im z| before failing
        found, errors = _solve_from(sys, starts, strategy, tol, maxiter)
    if not found:
        raise ConvergenceError("no starting point converged: " + "; ".join(errors))
    if len(found) == 1:
        return found[0]
    sp = sys.boundary.sp if sys.kind == "trig" else None
    energies = [spc.energy_from_roots(zs, sp=sp).real for zs in found]
    return found[int(np.argmin(energies))]


# ---------------------------------------------------------------------------
# inhomogeneous T-Q relation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TQAnsatz:
    """Bethe roots ``mu_l`` plus the boundary data entering the T-Q relation.

    ``params`` is an :class:`XXZBoundary` (trig XXZ sector or rational XXX
    with six parameters) or a :class:`ReducedXXX`. ``alphas`` are the four
    ``(alpha_1, alpha_2, alpha_1', alpha_2')`` in the branch used by the
    trig relation.
    """

    kind: str
    bethe_roots: np.ndarray
    x_plus: complex
    params: object
    eta: float | None = None
    thetas: tuple = ()
    alphas: tuple = ()
    residual: float = float("nan")

    @property
    def n(self) -> int:
        return len(self.thetas)


def tq_alphas(params: XXZBoundary) -> tuple:
    """``alpha_1, alpha_2, alpha_1', alpha_2'`` on the branch used by the T-Q relation.

    Principal ``arccosh`` values, with ``alpha_1`` negated when needed so that
    ``prod tanh(alpha/2) = coth s coth s'``; the other sign makes
    ``Lambda(i pi)`` disagree with the transfer matrix.
    """
    d = vx.derived_boundary(params, mode="generic", field_product_sign=1.0)
    al = [d.alpha1, d.alpha2, d.alpha1p, d.alpha2p]
    target = 1 / (cmath.tanh(params.s) * cmath.tanh(params.sp))
    prod = np.prod([cmath.tanh(a / 2) for a in al])
    if abs(prod + target) < abs(prod - target):
        al[0] = -al[0]
    return tuple(al)


def sqrt_alpha_alpha(params: XXZBoundary, alphas) -> complex:
    """``sqrt(alpha alpha')`` on the branch fixed by ``Lambda(0) = t(0)``."""
    val = 2 / (cmath.sinh(params.s) * cmath.sinh(params.sp))
    for a in alphas:
        val *= cmath.cosh(a / 2)
    return val


def raw_from_reduced(b: ReducedXXX) -> XXZBoundary:
    """Six-parameter XXX boundary whose transfer matrix is ``-tbar`` of the reduced chain."""
    return XXZBoundary(-b.p, 0.0, 0.0, b.q, -b.xi, -b.xi)


def _rational_raw(params):
    if isinstance(params, ReducedXXX):
        return raw_from_reduced(params), -1.0
    return params, 1.0


def x_plus(kind, params, n: int, eta=None, alphas=None, L: int | None = None) -> complex:
    """Coefficient of the inhomogeneous term.

    Trig: ``-2 sqrt(s1 s2 s1' s2') cosh[2(L+1) eta + sum(alpha)/2] - (e^{-2eta} s1 s2' + e^{2eta} s2 s1')``
    with ``L = N`` and ``2 sqrt(s1 s2 s1' s2') = 1/sqrt(alpha alpha')``.
    Rational: ``2 sqrt((1+s1 s2)(1+s1' s2')) - (2 + s1 s2' + s2 s1')``.
    """
    kind = _kind_name(kind)
    L = n if L is None else L
    if kind == "trig":
        alphas = tq_alphas(params) if alphas is None else alphas
        b = params
        k = cmath.exp(-2 * eta) * b.s1 * b.s2p + cmath.exp(2 * eta) * b.s2 * b.s1p
        return -cmath.cosh(2 * (L + 1) * eta + sum(alphas) / 2) / sqrt_alpha_alpha(b, alphas) - k
    b, _ = _rational_raw(params)
    r1, r2 = cmath.sqrt(1 + b.s1 * b.s2), cmath.sqrt(1 + b.s1p * b.s2p)
    return 2 * r1 * r2 - (2 + b.s1 * b.s2p + b.s2 * b.s1p)


def make_ansatz(kind, params, roots, eta=None, thetas=None, alphas=None) -> TQAnsatz:
    kind = _kind_name(kind)
    roots = np.asarray(roots, dtype=complex)
    n = len(roots)
    th = tuple(complex(t) for t in thetas) if thetas is not None else (0j,) * n
    if len(th) != n:
        raise ValueError("the T-Q relation has one Bethe root per site")
    if kind == "trig":
        alphas = tq_alphas(params) if alphas is None else tuple(alphas)
    else:
        alphas = ()
    return TQAnsatz(kind, roots, x_plus(kind, params, n, eta, alphas or None), params, eta, th, alphas)


def _tq_pieces(ans: TQAnsatz, u):
    """``(A, B, X, Q(u), Q+, Q-, abar dbar)`` with ``Lambda = (A Q+ + B Q- + X) / Q``.

    ``A`` includes ``abar``, ``B`` includes ``dbar`` and ``X`` is the
    inhomogeneous term; ``Q+ = Q(u + 4 eta)``, ``Q- = Q(u - 4 eta)`` (trig) or
    ``Q(u - 1)``, ``Q(u + 1)`` (rational).
    """
    mu, th = ans.bethe_roots, np.array(ans.thetas, dtype=complex)
    u = complex(u)
    if ans.kind == "trig":
        eta, b, al = ans.eta, ans.params, ans.alphas
        sh, ch = cmath.sinh, cmath.cosh
        q = lambda v: np.prod(np.sinh((v - mu) / 2) * np.sinh((v + mu - 4 * eta) / 2))  # noqa: E731
        abar = np.prod(np.sinh((u - th - 4 * eta) / 2) * np.sinh((u + th - 4 * eta) / 2))
        dbar = np.prod(np.sinh((u - th) / 2) * np.sinh((u + th) / 2))
        root = sqrt_alpha_alpha(b, al)
        den = sh(u - 2 * eta) * root
        a = 2 * sh(u - 4 * eta) / den * np.prod([ch((u + x) / 2) for x in al]) * abar
        bb = 2 * sh(u) / den * np.prod([ch((u - 4 * eta - x) / 2) for x in al]) * dbar
        x = ans.x_plus * sh(u) * sh(u - 4 * eta) * abar * dbar
        return a, bb, x, q(u), q(u + 4 * eta), q(u - 4 * eta), abar * dbar
    raw, sign = _rational_raw(ans.params)
    q = lambda v: np.prod((v - mu) * (v + mu + 1))  # noqa: E731
    at = np.prod((u - th + 1) * (u + th + 1))
    dt = np.prod((u - th) * (u + th))
    r1, r2 = cmath.sqrt(1 + raw.s1 * raw.s2), cmath.sqrt(1 + raw.s1p * raw.s2p)
    s, sp = raw.s, raw.sp
    den = u + 0.5
    a = sign * (u + 1) / den * (s + r1 * u) * (sp - r2 * u) * at
    bb = sign * u / den * (s - r1 * (u + 1)) * (sp + r2 * (u + 1)) * dt
    x = sign * ans.x_plus * u * (u + 1) * at * dt
    # Q(u - 1) multiplies the first term, Q(u + 1) the second
    return a, bb, x, q(u), q(u - 1), q(u + 1), at * dt


def _tq_direct(ans: TQAnsatz, u) -> complex:
    a, b, x, q0, qa, qb, _ = _tq_pieces(ans, u)
    return (a * qa + b * qb + x) / q0


def tq_lambda(kind, u, ansatz: TQAnsatz, params=None, pole_radius: float = 1e-2, nodes: int = 16) -> complex:
    """Eigenvalue from the T-Q relation.

    Close to a zero of ``Q`` (or of the ``sinh(u - 2 eta)`` / ``u + 1/2``
    denominators) the value is the mean over a small circle around ``u``,
    i.e. the analytic continuation through the cancelled pole.
    """
    if _kind_name(kind) != ansatz.kind:
        raise ValueError("kind does not match the ansatz")
    if params is not None and params is not ansatz.params:
        ansatz = make_ansatz(ansatz.kind, params, ansatz.bethe_roots, ansatz.eta, ansatz.thetas)
    u = complex(u)
    mu = ansatz.bethe_roots
    if ansatz.kind == "trig":
        sing = np.concatenate([mu, -mu + 4 * ansatz.eta, [2 * ansatz.eta]])
        period = 2j * np.pi
        d = np.abs((u - sing) - period * np.round((u - sing) / period)) if len(sing) else np.array([np.inf])
    else:
        sing = np.concatenate([mu, -mu - 1, [-0.5]])
        d = np.abs(u - sing)
    if d.size and d.min() < pole_radius:
        ring = u + pole_radius * np.exp(2j * np.pi * (np.arange(nodes) + 0.5) / nodes)
        return complex(np.mean([_tq_direct(ansatz, v) for v in ring]))
    return complex(_tq_direct(ansatz, u))


def bae_residuals(kind, ansatz: TQAnsatz, params=None) -> np.ndarray:
    """Relative residuals of the Bethe ansatz equations at each ``mu_l``.

    Trig: ``A Q(mu+4eta)/dbar + B Q(mu-4eta)/abar + x_+ sinh mu sinh(mu-4eta)``
    (``A, B`` without ``abar, dbar``); rational analogously with ``Q(mu-+1)``.
    Each residual is divided by the largest of the three terms.
    """
    if _kind_name(kind) != ansatz.kind:
        raise ValueError("kind does not match the ansatz")
    if params is not None and params is not ansatz.params:
        ansatz = make_ansatz(ansatz.kind, params, ansatz.bethe_roots, ansatz.eta, ansatz.thetas)
    out = []
    for m in ansatz.bethe_roots:
        a, b, x, _, qa, qb, ad = _tq_pieces(ansatz, m)
        terms = np.array([a * qa, b * qb, x]) / ad
        out.append(terms.sum() / max(float(np.max(np.abs(terms))), 1e-300))
    return np.array(out, dtype=complex)


def _bae_system(ans_of, mu, h: float = 1e-7):
    """Pole-free BAE residuals ``A Q+ + B Q- + X`` at each root, deflated, with a
    finite-difference Jacobian.

    On a homogeneous chain every root placed at ``0`` or ``4 eta`` (trig),
    ``0`` or ``-1`` (rational) solves the pole-free form trivially; dividing
    by ``sinh(mu/2) sinh((mu - 4 eta)/2)`` or ``mu (mu + 1)`` removes those.
    """
    def res(m):
        ans = ans_of(m)
        out = []
        for x in m:
            a, b, xx, _, qa, qb, _ = _tq_pieces(ans, x)
            val = a * qa + b * qb + xx
            if any(t == 0 for t in ans.thetas):
                if ans.kind == "trig":
                    val /= cmath.sinh(x / 2) * cmath.sinh((x - 4 * ans.eta) / 2)
                else:
                    val /= x * (x + 1)
            out.append(val)
        return np.array(out)
    r = res(mu)
    scale = max(float(np.max(np.abs(r))), 1e-300)
    jac = np.empty((len(mu), len(mu)), dtype=complex)
    for k in range(len(mu)):
        step = np.zeros(len(mu), dtype=complex)
        step[k] = h * max(1.0, abs(mu[k]))
        jac[:, k] = (res(mu + step) - res(mu - step)) / (2 * step[k])
    return r, jac, scale


def _degenerate(kind, mu, eta, thetas=(), tol: float = 1e-6) -> bool:
    """Coinciding roots, roots on another's crossing image, or on a zero of ``abar dbar``."""
    th = np.array(thetas, dtype=complex)
    if kind == "trig":
        bad = np.concatenate([th, -th, th + 4 * eta, -th + 4 * eta])
        img = -mu + 4 * eta
        period = 2j * np.pi
        dist = lambda a, b: abs((a - b) - period * np.round((a - b) / period))  # noqa: E731
    else:
        bad = np.concatenate([th, -th, th - 1, -th - 1])
        img = -mu - 1
        dist = lambda a, b: abs(a - b)  # noqa: E731
    if any(dist(m, b) < tol for m in mu for b in bad):
        return True
    for i, j in itertools.combinations(range(len(mu)), 2):
        if dist(mu[i], mu[j]) < tol or dist(mu[i], img[j]) < tol:
            return True
    return any(dist(m, i) < tol for m, i in zip(mu, img))


def tq_polynomial_residual(ansatz: TQAnsatz) -> float:
    """Misfit of ``tq_lambda`` sampled at ``4N+16`` points by a polynomial of the expected degree."""
    n = ansatz.n
    if ansatz.kind == "trig":
        pts = 2 * ansatz.eta + 0.7 * np.exp(2j * np.pi * (np.arange(4 * n + 16) + 0.3) / (4 * n + 16))
        vals = np.array([tq_lambda("trig", u, ansatz) for u in pts])
        return fit_polynomial(pts, vals, 2 * n + 4, "trig", offset=-(n + 2)).residual
    pts = -0.5 + 1.5 * np.exp(2j * np.pi * (np.arange(4 * n + 16) + 0.3) / (4 * n + 16))
    vals = np.array([tq_lambda("rational", u, ansatz) for u in pts])
    return fit_polynomial(pts, vals, 2 * n + 2, "rational").residual


def _q_variable(kind, u, eta=None):
    """Symmetric variable of ``Q``: ``cosh(u - 2 eta)`` (trig) or ``(u + 1/2)^2`` (rational)."""
    u = np.asarray(u, dtype=complex)
    return np.cosh(u - 2 * eta) if kind == "trig" else (u + 0.5) ** 2


def q_from_eigenvalue(kind, params, n: int, points, values, eta=None, thetas=None, alphas=None):
    """Bethe roots of the ``Q`` that makes the T-Q relation reproduce given eigenvalue samples.

    ``Q`` is a monic polynomial of degree N in the symmetric variable, so
    ``Lambda Q - A Q+ - B Q- = X`` is linear in its coefficients; it is solved
    by least squares on the samples. Returns ``(roots, misfit)``.
    """
    kind = _kind_name(kind)
    pts = np.asarray(points, dtype=complex)
    vals = np.asarray(values, dtype=complex)
    probe = make_ansatz(kind, params, np.zeros(n), eta, thetas, alphas)
    shift = 4 * eta if kind == "trig" else -1.0
    rows, rhs = [], []
    for u, lam in zip(pts, vals):
        a, b, x, _, _, _, _ = _tq_pieces(probe, u)
        c0, cp, cm = (_q_variable(kind, v, eta) for v in (u, u + shift, u - shift))
        k = np.arange(n + 1)
        coef = lam * c0**k - a * cp**k - b * cm**k
        rows.append(coef[:n])
        rhs.append(x * (2.0**n if kind == "trig" else 1.0) - coef[n])
    a_mat, rhs = np.array(rows), np.array(rhs)
    q, *_ = np.linalg.lstsq(a_mat, rhs, rcond=None)
    misfit = float(np.max(np.abs(a_mat @ q - rhs)) / max(float(np.max(np.abs(rhs))), 1e-300))
    v = np.polynomial.polynomial.polyroots(np.append(q, 1.0)) if n else np.array([])
    if kind == "trig":
        mu = 2 * eta + np.array([cmath.acosh(complex(x)) for x in v])
    else:
        mu = np.sqrt(v.astype(complex)) - 0.5
    return mu, misfit


def _tq_family(kind, params, n, eta, thetas) -> TransferFamily:
    if kind == "trig":
        return TransferFamily(ModelKind.XXZ_TRIG, n, params, eta, thetas)
    return TransferFamily(ModelKind.XXX_RATIONAL, n, params, None, thetas)


def ed_seeds(kind, params, n: int, eta=None, thetas=None, alphas=None, count: int | None = None):
    """One seed per joint eigenstate of the transfer matrix, via :func:`q_from_eigenvalue`."""
    kind = _kind_name(kind)
    th = tuple(thetas) if thetas is not None else (0j,) * n
    fam = _tq_family(kind, params, n, eta, th)
    m = count or (4 * n + 12)
    ring = np.exp(2j * np.pi * (np.arange(m) + 0.37) / m)
    pts = (2 * eta + 0.9 * ring + 0.2) if kind == "trig" else (-0.5 + 1.3 * ring + 0.1)
    states = spc.joint_eigenstates(fam)
    vals, _ = spc.sample_states(fam, states, pts)
    return [q_from_eigenvalue(kind, params, n, pts, row, eta, th, alphas)[0] for row in vals]


def solve_bae(kind, params, n: int, seeds=None, eta=None, thetas=None, n_starts: int = 60,
              rng=None, tol: float = NEWTON_TOL, maxiter: int = 80, alphas=None,
              distinct_tol: float = 1e-6) -> list[TQAnsatz]:
    """Multi-start Newton for the Bethe roots; returns the distinct converged sets.

    Roots are identified up to permutation and ``mu -> -mu + 4 eta`` (trig)
    or ``mu -> -mu - 1`` (rational). Sets with coinciding roots, or whose
    T-Q eigenvalue is not a polynomial of the expected degree, are dropped.
    """
    kind = _kind_name(kind)
    if n == 0:
        return [make_ansatz(kind, params, [], eta, (), alphas)]
    rng = np.random.default_rng(rng)
    th = tuple(complex(t) for t in thetas) if thetas is not None else (0j,) * n
    if isinstance(seeds, str):
        if seeds != "ed":
            raise ValueError(f"unknown seed mode {seeds!r}")
        seeds = ed_seeds(kind, params, n, eta, th, alphas)
    if seeds is None:
        # Q is invariant under each root's crossing image, so seeds only
        # cover Re mu <= 2 eta (trig) or Re mu <= -1/2 (rational)
        if kind == "trig":
            seeds = [2 * eta - rng.exponential(2.0, n) + 1j * rng.uniform(-np.pi, np.pi, n)
                     for _ in range(n_starts)]
        else:
            seeds = [-0.5 - rng.exponential(1.5, n) + 1j * rng.normal(0, 1.5, n) for _ in range(n_starts)]
    ans_of = lambda m: make_ansatz(kind, params, m, eta, th, alphas)  # noqa: E731
    out, keys = [], []
    for seed in seeds:
        mu = np.array(seed, dtype=complex)
        ok = False
        for _ in range(maxiter):
            if not np.all(np.isfinite(mu)) or np.max(np.abs(mu.real)) > 60:
                break
            try:
                if np.max(np.abs(bae_residuals(kind, ans_of(mu)))) <= 1e-3 * tol:
                    ok = True
                    break
                r, jac, _ = _bae_system(ans_of, mu)
                step = np.linalg.solve(jac, -r)
            except (np.linalg.LinAlgError, OverflowError, ZeroDivisionError):
                break
            if not np.all(np.isfinite(step)):
                break
            mu = mu + step
            if kind == "trig":
                mu = mu.real + 1j * (np.mod(mu.imag + np.pi, 2 * np.pi) - np.pi)
            if np.max(np.abs(step)) < 1e-14 * max(1.0, float(np.max(np.abs(mu)))):
                ok = True
                break
        else:
            ok = True
        if not ok or not np.all(np.isfinite(mu)) or _degenerate(kind, mu, eta, th):
            continue
        ans = ans_of(mu)
        res = float(np.max(np.abs(bae_residuals(kind, ans))))
        poly = tq_polynomial_residual(ans)
        # roots sitting next to a zero of A or B leave the BAE residual
        # ill-conditioned; the polynomial identity is the sharper test there
        if poly > 1e-8 or (res > tol and (res > BAE_LOOSE or poly > 1e-10)):
            continue
        key = _canonical(kind, mu, eta)
        if any(np.max(np.abs(key - k)) < distinct_tol for k in keys):
            continue
        keys.append(key)
        out.append(TQAnsatz(kind, mu, ans.x_plus, params, eta, th, ans.alphas, res))
    return out


def _canonical(kind, mu, eta):
    """Sorted representative of each root under its crossing image."""
    reps = []
    for m in mu:
        img = -m + 4 * eta if kind == "trig" else -m - 1
        a, b = complex(m), complex(img)
        if kind == "trig":
            a = complex(a.real, (a.imag + np.pi) % (2 * np.pi) - np.pi)
            b = complex(b.real, (b.imag + np.pi) % (2 * np.pi) - np.pi)
        reps.append(min((a, b), key=lambda c: (round(c.real, 8), round(c.imag, 8))))
    return np.array(sorted(reps, key=lambda c: (round(c.real, 8), round(c.imag, 8))))


def tq_eigenvalue_match(family: TransferFamily, ansatze, points=None, tol: float = 1e-7) -> dict:
    """Compare T-Q eigenvalue functions with the ED spectrum of ``family``.

    Returns ``matched`` (ED eigenvalue functions reproduced by some ansatz),
    ``total`` (number of joint eigenstates) and ``worst`` (largest relative
    deviation over the matched states at ``points``).
    """
    if points is None:
        points = np.array([0.31 + 0.17j, -0.42 + 0.55j, 0.77 - 0.21j, 1.13 + 0.08j, -0.2 - 0.9j])
    states = spc.joint_eigenstates(family)
    ed, _ = spc.sample_states(family, states, points)
    kind = "trig" if family.kind.trig else "rational"
    tq = np.array([[tq_lambda(kind, u, a) for u in points] for a in ansatze]) if ansatze else np.empty((0, len(points)))
    scale = np.maximum(np.abs(ed), 1e-300)
    matched, worst = 0, 0.0
    for row, sc in zip(ed, scale):
        if not len(tq):
            break
        dev = np.max(np.abs(tq - row) / sc, axis=1)
        k = int(np.argmin(dev))
        if dev[k] <= tol:
            matched += 1
            worst = max(worst, float(dev[k]))
    return {"matched": matched, "total": len(ed), "worst": worst}


def tq_energy(ansatz: TQAnsatz, h: float = 1e-5) -> complex:
    """``d ln Lambda / (2 du)`` at 0 plus the sector constant (trig) from the T-Q eigenvalue."""
    lam0 = tq_lambda(ansatz.kind, 0.0, ansatz)
    dl = (tq_lambda(ansatz.kind, 1j * h, ansatz) - tq_lambda(ansatz.kind, -1j * h, ansatz)) / (2j * h)
    e = dl / (2 * lam0)
    if ansatz.kind == "trig":
        eta = ansatz.eta
        e += 0.25 * np.tanh(2 * eta) * (1 + 1 / cmath.tanh(ansatz.params.sp))
    return complex(e)
