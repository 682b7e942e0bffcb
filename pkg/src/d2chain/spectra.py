"""Exact diagonalization, joint transfer eigenstates and zero-root extraction.

Trigonometric eigenvalues of the XXZ factor are written as
``Lambda(u) = Lambda_0 prod_k sinh((u - i z_k - 2 eta)/2)`` over ``2N+4`` roots,
rational (reduced XXX) ones as ``2 prod_k (u - i z_k + 1/2)`` over ``2N+2``.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from . import transfer as tr
from .hamiltonians import HamiltonianBuild
from scipy.optimize import linear_sum_assignment

from .tensor import TrigPolynomial, fit_polynomial, polynomial_roots
from .vertex import DerivedBoundary, ModelKind

FULL_CAP = 4096
DENSE_GROUND_CAP = 1024
SAMPLER_TOL = 1e-8
CLASS_TOL = 1e-3


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    residual: float = 0.0


def _hermitian_defect(m) -> float:
    d = m - m.conj().T
    if sps.issparse(d):
        return float(abs(d).max()) if d.nnz else 0.0
    return float(np.max(np.abs(d))) if d.size else 0.0


def diagonalize(h, mode: str = "full", k: int = 1, vectors: bool = False,
                tol: float = 1e-12, maxiter: int | None = None) -> Spectrum:
    """Full dense spectrum (``mode="full"``) or the ``k`` lowest eigenpairs (``"extremal"``).

    Hermitian inputs give real sorted eigenvalues; non-hermitian full spectra
    are sorted by real then imaginary part.
    """
    m = h.matrix if isinstance(h, HamiltonianBuild) else h
    dim = m.shape[0]
    scale = abs(m).max() if sps.issparse(m) else float(np.max(np.abs(m)))
    herm = _hermitian_defect(m) <= 1e-10 * max(scale, 1.0)
    if mode == "full":
        if dim > FULL_CAP:
            raise ValueError(f"dimension {dim} exceeds the dense cap {FULL_CAP}; use mode='extremal'")
        a = m.toarray() if sps.issparse(m) else np.asarray(m)
        if herm:
            a = 0.5 * (a + a.conj().T)
            if vectors:
                w, v = np.linalg.eigh(a)
                res = float(np.max(np.abs(a @ v - v * w))) / max(scale, 1e-300)
                return Spectrum(w, v, res)
            return Spectrum(np.linalg.eigvalsh(a))
        w, v = np.linalg.eig(a)
        order = np.lexsort((w.imag, w.real))
        w, v = w[order], v[:, order]
        res = float(np.max(np.abs(a @ v - v * w))) / max(scale, 1e-300)
        return Spectrum(w, v if vectors else None, res)
    if mode != "extremal":
        raise ValueError("mode must be 'full' or 'extremal'")
    if not herm:
        raise ValueError("extremal mode needs a hermitian matrix")
    if dim <= max(2 * k + 2, 64):
        spec = diagonalize(m, "full", vectors=True)
        return Spectrum(spec.eigenvalues[:k], spec.eigenvectors[:, :k] if vectors else None, spec.residual)
    op = sps.csr_matrix(m) if not sps.issparse(m) else m
    try:
        w, v = spla.eigsh(op, k=k, which="SA", tol=tol, maxiter=maxiter)
    except spla.ArpackNoConvergence as exc:
        raise RuntimeError(f"Lanczos did not converge: {exc}") from exc
    order = np.argsort(w)
    w, v = w[order], v[:, order]
    res = float(np.max(np.abs(op @ v - v * w))) / max(scale, 1e-300)
    return Spectrum(w, v if vectors else None, res)


def ground_state(h) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of a hermitian Hamiltonian (dense up to the cap, Lanczos above)."""
    m = h.matrix if isinstance(h, HamiltonianBuild) else h
    mode = "full" if m.shape[0] <= DENSE_GROUND_CAP else "extremal"
    spec = diagonalize(m, mode, k=1, vectors=True)
    return float(np.real(spec.eigenvalues[0])), spec.eigenvectors[:, 0]


# ---------------------------------------------------------------------------
# joint eigenstates and eigenvalue functions
# ---------------------------------------------------------------------------


def reference_points(family: tr.TransferFamily):
    scale = family.eta if family.kind.trig else 1.0
    return (0.3 + 0.1j) * scale, (-0.17 + 0.23j) * scale


def joint_eigenstates(family: tr.TransferFamily, u0=None, u1=None, tol: float = 1e-8) -> np.ndarray:
    """Columns form a common eigenbasis of the commuting family ``t(u)``.

    ``t(u0)`` is diagonalized; clusters of eigenvalues closer than ``tol``
    (relative) are split by diagonalizing ``t(u1)`` inside the cluster.
    """
    d0, d1 = reference_points(family)
    u0 = d0 if u0 is None else u0
    u1 = d1 if u1 is None else u1
    a = tr.evaluate(family, u0)
    w, v = np.linalg.eig(a)
    scale = max(float(np.max(np.abs(w))), 1e-300)
    order = np.argsort(w.real)
    w, v = w[order], v[:, order]
    out = v.copy()
    b = None
    i = 0
    while i < len(w):
        j = i + 1
        while j < len(w) and abs(w[j] - w[i]) <= tol * scale:
            j += 1
        if j - i > 1:
            if b is None:
                b = tr.evaluate(family, u1)
            block = v[:, i:j]
            q, _ = np.linalg.qr(block)
            small = q.conj().T @ b @ q
            _, y = np.linalg.eig(small)
            out[:, i:j] = q @ y
        i = j
    return out / np.linalg.norm(out, axis=0)


def sample_states(family: tr.TransferFamily, states: np.ndarray, points) -> tuple[np.ndarray, float]:
    """Rayleigh quotients ``<phi|t(u)|phi>/<phi|phi>`` for each state (columns) at each point.

    Returns ``(values[state, point], max relative eigen-residual)``.
    """
    states = np.asarray(states, dtype=complex)
    if states.ndim == 1:
        states = states[:, None]
    norms = np.einsum("ij,ij->j", states.conj(), states)
    vals = np.empty((states.shape[1], len(points)), dtype=complex)
    worst = 0.0
    for k, u in enumerate(points):
        tv = tr.evaluate(family, u) @ states
        lam = np.einsum("ij,ij->j", states.conj(), tv) / norms
        vals[:, k] = lam
        resid = np.linalg.norm(tv - states * lam, axis=0)
        scale = np.maximum(np.linalg.norm(tv, axis=0), np.abs(lam) * np.sqrt(norms.real))
        worst = max(worst, float(np.max(resid / np.maximum(scale, 1e-300))))
    return vals, worst


class EigenvalueSampler:
    """``u -> Lambda(u)`` for one joint eigenstate, checking the eigen-residual on every call."""

    def __init__(self, family: tr.TransferFamily, state: np.ndarray, tol: float = SAMPLER_TOL):
        self.family = family
        self.state = np.asarray(state, dtype=complex)
        self.tol = tol
        self.max_residual = 0.0

    def values(self, points) -> np.ndarray:
        vals, res = sample_states(self.family, self.state, list(points))
        self.max_residual = max(self.max_residual, res)
        if res > self.tol:
            raise ValueError(f"state is not an eigenstate of t(u): residual {res:.2e}")
        return vals[0]

    def __call__(self, u):
        return self.values([u])[0]


def eigenvalue_sampler(family: tr.TransferFamily, state: np.ndarray, tol: float = SAMPLER_TOL) -> EigenvalueSampler:
    return EigenvalueSampler(family, state, tol)


# ---------------------------------------------------------------------------
# zero roots
# ---------------------------------------------------------------------------


@dataclass
class ZeroRootSet:
    """Zero roots ``z_k`` of one transfer eigenvalue.

    ``leading_coeff`` is ``Lambda_0`` (trig) or the leading coefficient 2
    (rational); ``leading_fit`` is the same number from an unconstrained fit.
    ``classes`` is filled by :func:`classify_roots`.
    """

    roots: np.ndarray
    leading_coeff: complex
    kind: str
    eta: float | None = None
    fit_residual: float = 0.0
    reconstruction_residual: float = 0.0
    leading_fit: complex | None = None
    classes: list | None = None
    notes: list = field(default_factory=list)

    def __call__(self, u):
        """Eigenvalue rebuilt from the roots, one factor per ``(z, -z)`` pair.

        The pair form is independent of how ``Re z`` is folded; the plain
        product of sinh factors changes sign whenever a root is shifted by 2 pi.
        """
        u = np.asarray(u, dtype=complex)
        half = len(self.roots) // 2
        z = self.roots[:half]
        if self.kind == "trig":
            c = np.cosh(u - 2 * self.eta)
            return self.leading_coeff * np.prod((c[..., None] - np.cos(z)) / 2, axis=-1)
        c = (u + 0.5) ** 2
        return self.leading_coeff * np.prod(c[..., None] + z**2, axis=-1)

    def symmetry_residual(self, conjugate: bool = False) -> float:
        """Distance between the root multiset and its image under ``z -> -z`` (and ``z -> z*``)."""
        z = self.roots
        images = [-z] + ([z.conj(), -z.conj()] if conjugate else [])
        worst = 0.0
        for img in images:
            worst = max(worst, _multiset_distance(z, img, periodic=self.kind == "trig"))
        return worst


def fold(z):
    """Real part into ``(-pi, pi]``."""
    z = np.asarray(z, dtype=complex)
    re = np.mod(z.real + np.pi, 2 * np.pi) - np.pi
    re = np.where(re <= -np.pi + 1e-15, np.pi, re)
    return re + 1j * z.imag


def _pdist(a, b, periodic: bool):
    d = a - b
    if periodic:
        d = fold(d)
    return np.abs(d)


def _multiset_distance(a, b, periodic: bool) -> float:
    """Max matched distance between equal-size root sets (optimal matching)."""
    cost = _pdist(a[:, None], b[None, :], periodic)
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max()) if len(r) else 0.0


def root_count(n: int, kind: str) -> int:
    return 2 * n + 4 if kind == "trig" else 2 * n + 2


# Crossing symmetry pairs the roots as (z, -z), so the eigenvalue is a
# polynomial of half the degree in a symmetric variable:
#   trig:     Lambda = Lambda_0 2^-(N+2) prod_pairs (c - cos z),  c = cosh(u - 2 eta)
#   rational: Lambda = 2 prod_pairs (c + z^2),                    c = (u + 1/2)^2
# Sampling on a circle in c keeps the Vandermonde system unitary, and the
# half-degree form avoids the e^{+-2 eta N} dynamic range of e^u.

C_RADIUS = 2.0


def sample_points(n: int, kind: str, count: int | None = None, shift: float = 0.0):
    """Spectral points ``u`` whose symmetric variable ``c`` lies equispaced on ``|c| = C_RADIUS``."""
    m = count or (4 * n + 16)
    c = C_RADIUS * np.exp(2j * np.pi * (np.arange(m) + shift) / m)
    if kind == "trig":
        return np.array([cmath.acosh(x) for x in c]) + 0.0j  # + 2 eta added by the caller
    return np.sqrt(c.astype(complex)) - 0.5


def _points_for(n, kind, eta, count=None, shift=0.0):
    pts = sample_points(n, kind, count, shift)
    return pts + 2 * eta if kind == "trig" else pts


def symmetric_variable(u, kind: str, eta=None):
    u = np.asarray(u, dtype=complex)
    return np.cosh(u - 2 * eta) if kind == "trig" else (u + 0.5) ** 2


def _pair_roots(croots, kind):
    """Both members of each ``(z, -z)`` pair from the roots in the symmetric variable."""
    if kind == "trig":
        z = np.array([cmath.acos(c) for c in croots])
    else:
        z = np.sqrt(-np.asarray(croots, dtype=complex))
    out = np.concatenate([z, -z])
    return fold(out) if kind == "trig" else out


def roots_from_values(values, n: int, kind: str, eta=None, points=None, lead=None, check=None) -> ZeroRootSet:
    """Zero roots from eigenvalue samples at ``points`` (default :func:`sample_points` nodes).

    ``lead`` pins the leading coefficient (``Lambda_0`` or 2) when known; an
    unconstrained fit is always done as well and its leading term reported.
    ``check`` is an optional ``(points, values)`` pair of fresh samples used for
    the reconstruction residual.
    """
    if kind not in ("trig", "rational"):
        raise ValueError(f"unknown kind {kind!r}")
    half = n + 2 if kind == "trig" else n + 1
    pts = _points_for(n, kind, eta) if points is None else np.asarray(points, dtype=complex)
    vals = np.asarray(values, dtype=complex)
    c = symmetric_variable(pts, kind, eta)
    unit = 2.0 ** -half if kind == "trig" else 1.0  # Lambda = lead * unit * prod (c - c_k)
    free = fit_polynomial(c, vals, half, "rational")
    lead_fit = free.leading / unit
    if lead is None:
        poly = free
        lead = lead_fit
    else:
        top = lead * unit
        rest = fit_polynomial(c, vals - top * c**half, half - 1, "rational")
        poly = TrigPolynomial(np.append(rest.coeffs, top), "rational", residual=rest.residual)
    croots = polynomial_roots(poly)
    z = _pair_roots(croots, kind)
    out = ZeroRootSet(z, complex(lead), kind, eta, poly.residual, leading_fit=complex(lead_fit))
    if check is not None:
        cp, cv = check
        cv = np.asarray(cv, dtype=complex)
        out.reconstruction_residual = float(np.max(np.abs(out(np.asarray(cp)) - cv))
                                            / max(float(np.max(np.abs(cv))), 1e-300))
    return out


def expected_lambda0(params, eta) -> complex:
    """``-4 (e^{-2eta} s1 s2' + e^{2eta} s2 s1')``."""
    return -4 * (cmath.exp(-2 * eta) * params.s1 * params.s2p + cmath.exp(2 * eta) * params.s2 * params.s1p)


def family_leading(family: tr.TransferFamily) -> complex | None:
    """State-independent leading coefficient of the eigenvalue functions, if known."""
    if family.kind is ModelKind.XXZ_TRIG:
        return expected_lambda0(family.boundary, family.eta)
    if family.reduced:
        return 2.0
    return None


def lambda0_residual(zs: ZeroRootSet, params) -> float:
    """Relative mismatch between the unconstrained fitted ``Lambda_0`` and its closed form."""
    want = expected_lambda0(params, zs.eta)
    got = zs.leading_fit if zs.leading_fit is not None else zs.leading_coeff
    return abs(got - want) / abs(want)


def _fit_sets(family, vals, npts, fresh, pin, fit_tol):
    kind = "trig" if family.kind.trig else "rational"
    lead = family_leading(family) if pin else None
    pts = _points_for(family.n, kind, family.eta)
    out = []
    for row in vals:
        zs = roots_from_values(row[:npts], family.n, kind, family.eta, pts, lead=lead,
                               check=(fresh, row[npts:]))
        if zs.fit_residual > fit_tol or zs.reconstruction_residual > fit_tol:
            raise ValueError(f"polynomial fit failed: residuals {zs.fit_residual:.2e}, "
                             f"{zs.reconstruction_residual:.2e}")
        if len(zs.roots) != root_count(family.n, kind):
            raise ValueError("root count mismatch")
        out.append(zs)
    return out


def extract_zero_roots(sampler: EigenvalueSampler, n: int | None = None, pin_leading: bool = True,
                       fit_tol: float = 1e-8) -> ZeroRootSet:
    """Zero roots of the eigenvalue function represented by ``sampler``."""
    fam = sampler.family
    if n is not None and n != fam.n:
        raise ValueError("N does not match the sampler's family")
    kind = "trig" if fam.kind.trig else "rational"
    pts = _points_for(fam.n, kind, fam.eta)
    fresh = _points_for(fam.n, kind, fam.eta, count=2 * len(pts), shift=0.25)
    vals = sampler.values(np.concatenate([pts, fresh]))
    return _fit_sets(fam, vals[None, :], len(pts), fresh, pin_leading, fit_tol)[0]


def roots_for_states(family: tr.TransferFamily, states: np.ndarray, pin_leading: bool = True,
                     fit_tol: float = 1e-8) -> list[ZeroRootSet]:
    """Zero roots of every column of ``states``, sharing transfer evaluations."""
    kind = "trig" if family.kind.trig else "rational"
    pts = _points_for(family.n, kind, family.eta)
    fresh = _points_for(family.n, kind, family.eta, count=2 * len(pts), shift=0.25)
    vals, res = sample_states(family, states, np.concatenate([pts, fresh]))
    if res > SAMPLER_TOL:
        raise ValueError(f"states are not joint eigenstates: residual {res:.2e}")
    return _fit_sets(family, vals, len(pts), fresh, pin_leading, fit_tol)


# ---------------------------------------------------------------------------
# classification and energies
# ---------------------------------------------------------------------------


def boundary_templates(eta, derived: DerivedBoundary) -> dict:
    """Positions ``pi +- (2 eta - alpha) i`` for every ``Re alpha < 2 eta``, folded."""
    out = {}
    for name, a in derived.all_alphas().items():
        a = complex(a)
        re_a = a.real
        if re_a >= 2 * eta:
            continue
        for sgn in (1, -1):
            out[(name, sgn)] = complex(fold(np.pi + sgn * (2 * eta - a) * 1j))
    return out


def classify_roots(zs: ZeroRootSet, eta=None, derived: DerivedBoundary | None = None,
                   tol: float = CLASS_TOL, bulk_tol: float | None = None, max_string: int = 8) -> ZeroRootSet:
    """Tag every root as real, bulk string, boundary string or additional.

    Tags: ``("real",)``, ``("bulk", n)``, ``("boundary", alpha_name)``,
    ``("additional",)`` and ``("ambiguous", candidates)`` when more than one
    template lies within ``tol``. Near misses (within ``10 tol``) are noted.
    Trig bulk strings sit at ``|Im z| = 2 n eta``, rational ones at ``n/2``.
    """
    eta = zs.eta if eta is None else eta
    bulk_tol = tol if bulk_tol is None else bulk_tol
    trig = zs.kind == "trig"
    templates = boundary_templates(eta, derived) if (trig and derived is not None) else {}
    classes, notes = [], []
    for z in zs.roots:
        z = complex(z)
        if abs(z.imag) <= tol:
            classes.append(("real",))
            continue
        hits = [name for (name, _), t in templates.items()
                if abs(t.imag) > tol and abs(complex(fold(z - t))) <= tol]
        near = [(name, abs(complex(fold(z - t)))) for (name, _), t in templates.items()
                if tol < abs(complex(fold(z - t))) <= 10 * tol]
        if near:
            notes.append(f"root {z:.6g} near boundary template(s) {near}")
        hits = sorted(set(hits))
        if len(hits) == 1:
            classes.append(("boundary", hits[0]))
            continue
        if len(hits) > 1:
            classes.append(("ambiguous", tuple(hits)))
            notes.append(f"root {z:.6g} matches several templates {hits}")
            continue
        unit = 2 * eta if trig else 0.5
        n = int(round(abs(z.imag) / unit))
        if n >= 2 and n <= max_string and abs(abs(z.imag) - n * unit) <= bulk_tol:
            classes.append(("bulk", n))
            continue
        classes.append(("additional",))
    zs.classes = classes
    zs.notes = list(zs.notes) + notes
    return zs


def inventory(zs: ZeroRootSet) -> dict:
    """Counts per class (``"bulk"`` keyed by string length)."""
    out: dict = {}
    for c in zs.classes or []:
        key = c[0] if c[0] != "bulk" else f"bulk{c[1]}"
        out[key] = out.get(key, 0) + 1
    return out


def energy_from_roots(zs: ZeroRootSet, eta=None, sp=None, pole_tol: float = 1e-10) -> complex:
    """Energy from homogeneous-limit zero roots.

    Trig: ``-1/4 sum coth((2 eta + i z)/2) + 1/4 tanh 2eta (1 + coth s')``.
    Rational: ``sum 1 / (1 - 2 i z)``.
    """
    z = np.asarray(zs.roots, dtype=complex)
    if zs.kind == "trig":
        eta = zs.eta if eta is None else eta
        if sp is None:
            raise ValueError("trig energy needs s'")
        arg = (2 * eta + 1j * z) / 2
        # coth has poles at i pi k
        k = np.round(arg.imag / np.pi)
        if np.any(np.abs(arg - 1j * np.pi * k) < pole_tol):
            raise ValueError("root sits on the energy pole i z = -2 eta")
        return complex(-0.25 * np.sum(1 / np.tanh(arg)) + 0.25 * np.tanh(2 * eta) * (1 + 1 / cmath.tanh(sp)))
    den = 1 - 2j * z
    if np.any(np.abs(den) < pole_tol):
        raise ValueError("root sits on the energy pole i z = 1/2")
    return complex(np.sum(1 / den))


def transfer_spectrum_energies(family: tr.TransferFamily) -> np.ndarray:
    """Energies of all joint eigenstates through their zero roots (sorted by real part)."""
    states = joint_eigenstates(family)
    sets = roots_for_states(family, states)
    sp = family.boundary.sp if family.kind is ModelKind.XXZ_TRIG else None
    e = np.array([energy_from_roots(zs, sp=sp) for zs in sets])
    return e[np.argsort(e.real)]

