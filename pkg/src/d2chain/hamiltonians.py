"""Explicit Hamiltonians and their transfer-matrix counterparts.

Covers the open D2 chain, its two XXZ factors, the periodic chains, the
isotropic (rational) family and the three-parameter reduction of the XXX
boundary. Operators are assembled from local terms, dense for small chains
and as scipy sparse matrices above a size threshold.

D2 sites use the ``sigma (x) tau`` product basis with sigma most significant.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps

from . import transfer as tr
from . import vertex as vx
from .tensor import kron
from .vertex import D2Boundary, ModelKind, XXZBoundary

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
SP = np.array([[0, 1], [0, 0]], dtype=complex)
SM = np.array([[0, 0], [1, 0]], dtype=complex)
I2 = np.eye(2, dtype=complex)

SPARSE_ABOVE = 4096

# The sigma^z coefficient in the field form of the XXZ Hamiltonian is
# h^z / 2 when h^z is computed by ``boundary_fields``; this is the choice that
# agrees with the explicit parameter form and with the transfer matrix.
FIELD_Z_WEIGHT = 0.5


def sig(a: np.ndarray) -> np.ndarray:
    """``sigma^a (x) I`` on one D2 site."""
    return np.kron(a, I2)


def tau(a: np.ndarray) -> np.ndarray:
    """``I (x) tau^a`` on one D2 site."""
    return np.kron(I2, a)


@dataclass(frozen=True)
class BoundaryFields:
    h1_plus: complex
    h1_minus: complex
    h1_z: complex
    hN_plus: complex
    hN_minus: complex
    hN_z: complex

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return (abs(complex(self.h1_z).imag) <= tol and abs(complex(self.hN_z).imag) <= tol
                and abs(self.h1_plus - np.conj(self.h1_minus)) <= tol
                and abs(self.hN_plus - np.conj(self.hN_minus)) <= tol)


@dataclass
class HamiltonianBuild:
    """Operator (dense ndarray or scipy sparse) plus its constant part."""

    matrix: object
    constant_shift: complex
    provenance: str = "explicit"

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        m = self.matrix
        return m.toarray() if sps.issparse(m) else np.asarray(m)

    def antihermitian_part(self) -> float:
        m = self.matrix
        d = m - m.conj().T
        if sps.issparse(d):
            return float(abs(d).max()) if d.nnz else 0.0
        return float(np.max(np.abs(d)))


# ---------------------------------------------------------------------------
# term assembly
# ---------------------------------------------------------------------------


def assemble(terms, n: int, d: int, constant: complex = 0.0, sparse: bool | None = None):
    """Sum of ``coef * prod_j op_j`` over terms ``(coef, {site: op})`` (1-based sites)."""
    dim = d**n
    if sparse is None:
        sparse = dim > SPARSE_ABOVE
    if sparse:
        eye = sps.identity(d, dtype=complex, format="csr")
        out = sps.csr_matrix((dim, dim), dtype=complex)
        for coef, ops in terms:
            if coef == 0:
                continue
            factors = [sps.csr_matrix(ops[j]) if j in ops else eye for j in range(1, n + 1)]
            m = factors[0]
            for f in factors[1:]:
                m = sps.kron(m, f, format="csr")
            out = out + coef * m
        if constant:
            out = out + constant * sps.identity(dim, dtype=complex, format="csr")
        return out
    out = np.zeros((dim, dim), dtype=complex)
    eye = np.eye(d, dtype=complex)
    for coef, ops in terms:
        if coef == 0:
            continue
        out += coef * kron(*[ops.get(j, eye) for j in range(1, n + 1)])
    if constant:
        out += constant * np.eye(dim)
    return out


def _bonds(n: int, periodic: bool):
    pairs = [(j, j + 1) for j in range(1, n)]
    if periodic and n > 2:
        pairs.append((n, 1))
    elif periodic and n == 2:
        pairs.append((2, 1))
    return pairs


def _xxz_bulk(n: int, eta, periodic: bool = False):
    """``-1/(4 sinh 2eta) [xx + yy + cosh 2eta zz]`` on each bond."""
    c = -1 / (4 * np.sinh(2 * eta))
    ch = np.cosh(2 * eta)
    terms = []
    for j, k in _bonds(n, periodic):
        terms += [(c, {j: SX, k: SX}), (c, {j: SY, k: SY}), (c * ch, {j: SZ, k: SZ})]
    return terms


def _xxx_bulk(n: int, periodic: bool = False):
    terms = []
    for j, k in _bonds(n, periodic):
        terms += [(0.5, {j: SX, k: SX}), (0.5, {j: SY, k: SY}), (0.5, {j: SZ, k: SZ})]
    return terms


def _d2_bond(j: int, k: int, zz: complex, flip: complex):
    """``zz (sz sz + tz tz) + flip [sz sz (t+ t- + t- t+) + (s+ s- + s- s+) tz tz]``."""
    return [
        (zz, {j: sig(SZ), k: sig(SZ)}), (zz, {j: tau(SZ), k: tau(SZ)}),
        (flip, {j: sig(SZ) @ tau(SP), k: sig(SZ) @ tau(SM)}),
        (flip, {j: sig(SZ) @ tau(SM), k: sig(SZ) @ tau(SP)}),
        (flip, {j: sig(SP) @ tau(SZ), k: sig(SM) @ tau(SZ)}),
        (flip, {j: sig(SM) @ tau(SZ), k: sig(SP) @ tau(SZ)}),
    ]


def _d2_bulk(n: int, eta, periodic: bool = False):
    c = -1 / (4 * np.sinh(2 * eta))
    terms = []
    for j, k in _bonds(n, periodic):
        terms += _d2_bond(j, k, c * np.cosh(2 * eta), 2 * c)
    return terms


# ---------------------------------------------------------------------------
# boundary fields
# ---------------------------------------------------------------------------


def _nonzero(val, what):
    if abs(val) < 1e-300:
        raise ValueError(f"{what} vanishes")
    return val


def boundary_fields(params: XXZBoundary, eta) -> BoundaryFields:
    """Boundary field strengths ``h_1^{+-z}, h_N^{+-z}`` of one XXZ factor."""
    s, s1, s2, sp, s1p, s2p = params.as_tuple()
    shs = _nonzero(cmath.sinh(s), "sinh s")
    shp = _nonzero(cmath.sinh(sp), "sinh s'")
    e2 = cmath.exp(2 * eta)
    return BoundaryFields(
        h1_plus=-e2 * s1p / (2 * shp),
        h1_minus=-s2p / (e2 * 2 * shp),
        h1_z=cmath.cosh(sp) / shp / 2,
        hN_plus=s1 / (2 * shs),
        hN_minus=s2 / (2 * shs),
        hN_z=-cmath.cosh(s) / shs / 2,
    )


def fields_from_pauli(h1_plus, h1_z, hN_plus, hN_z, h1_minus=None, hN_minus=None) -> BoundaryFields:
    """Fields from Hamiltonian coefficients of ``sigma^x +- i sigma^y`` and ``sigma^z``.

    This is the convention in which field values are usually quoted
    (``h^+ (sigma^x + i sigma^y) + h^- (sigma^x - i sigma^y) + h^z sigma^z``);
    each :class:`BoundaryFields` entry is twice the quoted value.
    """
    h1_minus = np.conj(h1_plus) if h1_minus is None else h1_minus
    hN_minus = np.conj(hN_plus) if hN_minus is None else hN_minus
    return BoundaryFields(2 * h1_plus, 2 * h1_minus, 2 * h1_z, 2 * hN_plus, 2 * hN_minus, 2 * hN_z)


def params_from_fields(fields: BoundaryFields, eta) -> XXZBoundary:
    """Inverse of :func:`boundary_fields` on the principal ``arctanh`` branch."""
    if abs(fields.h1_z) < 1e-300 or abs(fields.hN_z) < 1e-300:
        raise ValueError("zero longitudinal field: s or s' sits at i pi/2, pass parameters directly")
    sp = cmath.atanh(1 / (2 * fields.h1_z))
    s = cmath.atanh(-1 / (2 * fields.hN_z))
    shp, shs = cmath.sinh(sp), cmath.sinh(s)
    e2 = cmath.exp(2 * eta)
    return XXZBoundary(
        s=s, s1=2 * shs * fields.hN_plus, s2=2 * shs * fields.hN_minus,
        sp=sp, s1p=-2 * shp * fields.h1_plus / e2, s2p=-2 * shp * fields.h1_minus * e2,
    )


def hermitian_xxz_params(s: float, s1: complex, sp: float, sr: float, si: float, eta) -> XXZBoundary:
    """A hermitian boundary set: real ``s, s'``, ``s2 = s1*``, ``s1' = e^{(sr + i si) eta}``,
    ``s2' = e^{(sr + 4 - i si) eta}``."""
    return XXZBoundary(s, s1, np.conj(s1), sp,
                       cmath.exp((sr + 1j * si) * eta), cmath.exp((sr + 4 - 1j * si) * eta))


# ---------------------------------------------------------------------------
# open chains
# ---------------------------------------------------------------------------


def _xxz_open_constant(n, eta, sp):
    return -n / 4 / np.tanh(2 * eta) + 0.25 * np.tanh(2 * eta) * cmath.cosh(sp) / cmath.sinh(sp)


def h_xxz_open(n: int, eta, params: XXZBoundary | None = None, fields: BoundaryFields | None = None,
               sparse: bool | None = None) -> HamiltonianBuild:
    """Open XXZ chain with non-diagonal boundary fields.

    From ``params``: the explicit parameter form. From ``fields``: the bulk
    plus ``h^+ s^+ + h^- s^- + FIELD_Z_WEIGHT h^z s^z`` at both ends; the
    constant needs ``s'`` and is taken from ``params`` when both are given,
    otherwise recovered from ``h_1^z``.
    """
    if params is None and fields is None:
        raise ValueError("give params or fields")
    terms = _xxz_bulk(n, eta)
    if fields is None:
        s, s1, s2, sp, s1p, s2p = params.as_tuple()
        shs = _nonzero(cmath.sinh(s), "sinh s")
        shp = _nonzero(cmath.sinh(sp), "sinh s'")
        e2 = cmath.exp(2 * eta)
        terms += [
            ((s1 + s2) / (4 * shs), {n: SX}), (1j * (s1 - s2) / (4 * shs), {n: SY}),
            (-cmath.exp(s) / (4 * shs) + 0.25, {n: SZ}),
            (-(e2 * s1p + s2p / e2) / (4 * shp), {1: SX}),
            (-1j * (e2 * s1p - s2p / e2) / (4 * shp), {1: SY}),
            (cmath.exp(sp) / (4 * shp) - 0.25, {1: SZ}),
        ]
    else:
        f = fields
        terms += [
            (f.h1_plus, {1: SP}), (f.h1_minus, {1: SM}), (FIELD_Z_WEIGHT * f.h1_z, {1: SZ}),
            (f.hN_plus, {n: SP}), (f.hN_minus, {n: SM}), (FIELD_Z_WEIGHT * f.hN_z, {n: SZ}),
        ]
        if params is None:
            sp = cmath.atanh(1 / (2 * f.h1_z))
    const = _xxz_open_constant(n, eta, params.sp if params is not None else sp)
    return HamiltonianBuild(assemble(terms, n, 2, const, sparse), const)


def h_d2_open(n: int, eta, params_s: XXZBoundary, params_t: XXZBoundary,
              sparse: bool | None = None) -> HamiltonianBuild:
    """Open anisotropic D2 chain with both boundary parameter sets."""
    s, s1, s2, sp, s1p, s2p = params_s.as_tuple()
    t, t1, t2, tp, t1p, t2p = params_t.as_tuple()
    sh = cmath.sinh
    for v, name in ((sh(s), "sinh s"), (sh(t), "sinh t"), (sh(sp), "sinh s'"), (sh(tp), "sinh t'")):
        _nonzero(v, name)
    e2 = cmath.exp(2 * eta)
    terms = _d2_bulk(n, eta)
    cr = -1 / (2 * sh(s) * sh(t))
    terms += [
        (cr * 0.5 * cmath.exp(t) * sh(s), {n: tau(SZ)}),
        (cr * 0.5 * cmath.exp(s) * sh(t), {n: sig(SZ)}),
        (cr * t1 * sh(s), {n: sig(SZ) @ tau(SP)}),
        (-cr * s1 * sh(t), {n: sig(SP) @ tau(SZ)}),
        (cr * t2 * sh(s), {n: sig(SZ) @ tau(SM)}),
        (-cr * s2 * sh(t), {n: sig(SM) @ tau(SZ)}),
    ]
    cl = 1 / (2 * sh(sp) * sh(tp))
    terms += [
        (cl * 0.5 * cmath.exp(tp) * sh(sp), {1: tau(SZ)}),
        (cl * 0.5 * cmath.exp(sp) * sh(tp), {1: sig(SZ)}),
        (cl * e2 * t1p * sh(sp), {1: sig(SZ) @ tau(SP)}),
        (-cl * e2 * s1p * sh(tp), {1: sig(SP) @ tau(SZ)}),
        (cl * t2p / e2 * sh(sp), {1: sig(SZ) @ tau(SM)}),
        (-cl * s2p / e2 * sh(tp), {1: sig(SM) @ tau(SZ)}),
    ]
    terms += [(-0.25, {1: sig(SZ)}), (-0.25, {1: tau(SZ)}), (0.25, {n: sig(SZ)}), (0.25, {n: tau(SZ)})]
    const = -n / 2 / np.tanh(2 * eta) + 0.25 * np.tanh(2 * eta) * sh(sp + tp) / (sh(sp) * sh(tp))
    return HamiltonianBuild(assemble(terms, n, 4, const, sparse), const)


def h_periodic(kind: str, n: int, eta=None, sparse: bool | None = None) -> HamiltonianBuild:
    """Periodic chains: ``"xxz"`` and ``"d2"`` (need eta) or ``"xxx"``."""
    if n < 2:
        raise ValueError("periodic chains need N >= 2")
    kind = kind.lower()
    if kind == "xxz":
        const = -n / 4 / np.tanh(2 * eta)
        return HamiltonianBuild(assemble(_xxz_bulk(n, eta, True), n, 2, const, sparse), const)
    if kind == "d2":
        const = -n / 2 / np.tanh(2 * eta)
        return HamiltonianBuild(assemble(_d2_bulk(n, eta, True), n, 4, const, sparse), const)
    if kind == "xxx":
        const = n / 2
        return HamiltonianBuild(assemble(_xxx_bulk(n, True), n, 2, const, sparse), const)
    raise ValueError(f"unknown periodic kind {kind!r}")


# ---------------------------------------------------------------------------
# isotropic family
# ---------------------------------------------------------------------------


def _h_xxx_raw_terms(n, b: XXZBoundary):
    s, s1, s2, sp, s1p, s2p = b.as_tuple()
    _nonzero(s, "s")
    _nonzero(sp, "s'")
    return _xxx_bulk(n) + [
        ((s1 + s2) / (4 * s), {n: SX}), (1j * (s1 - s2) / (4 * s), {n: SY}), (-1 / (2 * s), {n: SZ}),
        (-(s1p + s2p) / (4 * sp), {1: SX}), (-1j * (s1p - s2p) / (4 * sp), {1: SY}),
        (1 / (2 * sp), {1: SZ}),
    ]


def h_xxx_family(which: str, n: int, params=None, sparse: bool | None = None,
                 left_sign: str = "corrected") -> HamiltonianBuild:
    """Isotropic Hamiltonians.

    ``iso_d2``: D2 chain, ``params`` a :class:`D2Boundary`. ``left_sign``
    selects the sign of the ``s2' t' s^- t^z`` term at site 1 (``"corrected"``
    is the one generated by the transfer matrix, ``"printed"`` flips it).
    ``xxx_raw``: spin-1/2 chain, ``params`` an :class:`XXZBoundary`.
    ``xxx_reduced``: spin-1/2 chain, ``params`` a :class:`~transfer.ReducedXXX`
    or a ``(p, q, xi)`` tuple.
    """
    if which == "xxx_raw":
        const = n / 2
        return HamiltonianBuild(assemble(_h_xxx_raw_terms(n, params), n, 2, const, sparse), const)
    if which == "xxx_reduced":
        p, q, xi = (params.p, params.q, params.xi) if isinstance(params, tr.ReducedXXX) else params
        _nonzero(p, "p")
        _nonzero(q, "q")
        terms = [(c, ops) for c, ops in _xxx_bulk(n)]
        terms += [(0.5 / p, {1: SZ}), (0.5 * xi / q, {n: SX}), (0.5 / q, {n: SZ})]
        const = n / 2
        return HamiltonianBuild(assemble(terms, n, 2, const, sparse), const)
    if which == "iso_d2":
        if left_sign not in ("corrected", "printed"):
            raise ValueError("left_sign must be 'corrected' or 'printed'")
        s, s1, s2, sp, s1p, s2p = params.splus.as_tuple()
        t, t1, t2, tp, t1p, t2p = params.sminus.as_tuple()
        for v, name in ((s, "s"), (t, "t"), (sp, "s'"), (tp, "t'")):
            _nonzero(v, name)
        terms = []
        for j in range(1, n):
            terms += _d2_bond(j, j + 1, 0.5, 1.0)
        cr = -1 / (2 * s * t)
        terms += [
            (cr * s, {n: tau(SZ)}), (cr * t, {n: sig(SZ)}),
            (cr * s * t1, {n: sig(SZ) @ tau(SP)}), (-cr * s1 * t, {n: sig(SP) @ tau(SZ)}),
            (cr * s * t2, {n: sig(SZ) @ tau(SM)}), (-cr * s2 * t, {n: sig(SM) @ tau(SZ)}),
        ]
        cl = 1 / (2 * sp * tp)
        last = -1 if left_sign == "corrected" else 1
        terms += [
            (cl * sp, {1: tau(SZ)}), (cl * tp, {1: sig(SZ)}),
            (cl * sp * t1p, {1: sig(SZ) @ tau(SP)}), (-cl * s1p * tp, {1: sig(SP) @ tau(SZ)}),
            (cl * sp * t2p, {1: sig(SZ) @ tau(SM)}), (last * cl * s2p * tp, {1: sig(SM) @ tau(SZ)}),
        ]
        const = n
        return HamiltonianBuild(assemble(terms, n, 4, const, sparse), const)
    raise ValueError(f"unknown isotropic family {which!r}")


@dataclass(frozen=True)
class XXXReduction:
    """Reduced boundary ``(p, q, xi)`` and the two site transformations.

    ``c1`` aligns the left field with z. ``c2_11`` is the (1,1) element of the
    xy rotation as given in closed form; it carries the right phase up to sign
    but not unit modulus, so ``c2 = diag(+-c2_11/|c2_11|, 1)`` with the sign
    fixed such that conjugation by ``c1 c2`` lands exactly on the reduced
    Hamiltonian with this ``xi``.
    """

    p: float
    q: float
    xi: float
    c1: np.ndarray
    c2_11: complex
    c2: np.ndarray

    @property
    def reduced(self) -> tr.ReducedXXX:
        return tr.ReducedXXX(self.p, self.q, self.xi)


def reduce_boundary_xxx(params: XXZBoundary) -> XXXReduction:
    """Three-parameter form of a hermitian isotropic boundary (``s2 = s1*``, ``s2' = s1'*``)."""
    s, s1, s2, sp, s1p, s2p = params.as_tuple()
    a = abs(s1p)
    if a < 1e-300:
        raise ValueError("s1' = 0: the left field is already along z")
    sb = np.sqrt(a**2 + 1)
    c1s, c1ps = np.conj(s1), np.conj(s1p)
    den = s1 * c1ps + s1p * c1s + 2
    if abs(den) < 1e-300:
        raise ValueError("degenerate denominator s1 s1'* + s1' s1* + 2 = 0")
    p = -sp / sb
    q = 2 * s * sb / den
    inner = s1p**2 * s1**2 * (c1s * (s1p**2 * c1s + 4 * s1p - 4 * s1) + s1**2 * c1ps**2
                              - 2 * c1ps * (s1p * s1 * c1s + 2 * s1p - 2 * s1))
    if abs(inner) < 1e-300:
        raise ValueError("degenerate reduction: transverse right field vanishes after rotation")
    xi = cmath.sqrt(-inner) / (s1p * s1 * den)
    c1 = np.array([
        [s1p * (sb - 1) / (a * np.sqrt(2 * sb * (sb - 1))), -s1p * np.sqrt(sb + 1) / (np.sqrt(2 * sb) * a)],
        [a / np.sqrt(2 * sb * (sb - 1)), a / np.sqrt(2 * (a**2 + sb + 1))],
    ], dtype=complex)
    c2_11 = (s1p * s1 * cmath.sqrt(sb - sb**2)
             * (s1 * c1ps**2 + 2 * (sb + 1) * c1ps - c1s * (sb + 1) ** 2)
             / (c1ps * (sb**2 + sb)) * inner**-0.5)
    # right boundary field after the first rotation; its (0,1) element fixes the sign
    right = (s1 + s2) / (4 * s) * SX + 1j * (s1 - s2) / (4 * s) * SY - 1 / (2 * s) * SZ
    off = (np.linalg.solve(c1, right) @ c1)[0, 1]
    phase = c2_11 / abs(c2_11)
    if (off / phase * complex(xi / (2 * q)).conjugate()).real < 0:
        phase = -phase
    c2 = np.diag([phase, 1.0]).astype(complex)
    return XXXReduction(complex(p).real, complex(q).real, complex(xi).real, c1, complex(c2_11), c2)


# ---------------------------------------------------------------------------
# transfer-matrix route
# ---------------------------------------------------------------------------


def kbar_trace_relations(params: D2Boundary, eta, h: float = 1e-5) -> dict:
    """Direct ``tr Kbar(0)`` and ``tr Kbar'(0)`` against their closed forms (trig D2)."""
    kind = ModelKind.D2_TRIG
    sp, tp = params.splus.sp, params.sminus.sp
    kb = lambda u: np.trace(vx.k_matrix(kind, "left", u, params, eta))  # noqa: E731
    tr0 = kb(0.0)
    trd = (kb(1j * h) - kb(-1j * h)) / (2j * h)
    sh = cmath.sinh
    want0 = 4 * cmath.cosh(2 * eta) ** 2 * sh(sp) * sh(tp)
    wantd = -(sh(sp + tp) + 2 * sh(sp) * sh(tp)) * sh(4 * eta)
    return {"trace": abs(tr0 - want0) / abs(want0), "trace_derivative": abs(trd - wantd) / abs(wantd),
            "values": (tr0, trd)}


def transfer_constant(family: tr.TransferFamily) -> complex:
    """Constant ``c`` with ``H = 1/2 t(0)^-1 t'(0) + c``."""
    kind, eta = family.kind, family.eta
    if kind is ModelKind.D2_TRIG:
        b = family.boundary
        sp, tp = b.splus.sp, b.sminus.sp
        sh = cmath.sinh
        return 0.5 * (sh(sp + tp) + 2 * sh(sp) * sh(tp)) * sh(4 * eta) / (
            4 * cmath.cosh(2 * eta) ** 2 * sh(sp) * sh(tp))
    if kind is ModelKind.XXZ_TRIG:
        return 0.25 * np.tanh(2 * eta) * (1 + cmath.cosh(family.boundary.sp) / cmath.sinh(family.boundary.sp))
    return 0.0


def from_transfer(family: tr.TransferFamily, h: float = 1e-5) -> HamiltonianBuild:
    """``1/2 t(0)^-1 t'(0)`` plus the model constant, homogeneous chains only."""
    if any(abs(t) > 0 for t in family.thetas):
        raise ValueError("from_transfer needs the homogeneous limit theta = 0")
    if h <= 1e-12:
        raise ValueError("derivative step too small")
    t0 = tr.evaluate(family, 0.0)
    scale = np.max(np.abs(t0))
    if scale == 0 or np.linalg.cond(t0) > 1e12:
        raise np.linalg.LinAlgError("t(0) is not invertible")
    dt = tr.derivative(family, 0.0, h)
    c = transfer_constant(family)
    m = 0.5 * np.linalg.solve(t0, dt) + c * np.eye(t0.shape[0])
    return HamiltonianBuild(m, c, provenance="from_transfer")


def direct_sum(h_plus, h_minus) -> np.ndarray:
    """``Scal (H+ x I + I x H-) Scal^-1`` on the interleaved D2 chain."""
    a = h_plus.dense() if isinstance(h_plus, HamiltonianBuild) else np.asarray(h_plus)
    b = h_minus.dense() if isinstance(h_minus, HamiltonianBuild) else np.asarray(h_minus)
    n = int(round(np.log2(a.shape[0])))
    return tr.kronecker_sum(n, a, b)
