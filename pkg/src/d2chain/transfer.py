"""Open-chain transfer matrices and the functional identities they obey.

``t(u) = tr_0 { Kbar_0(u) T_0(u) K_0(u) That_0(u) }`` with
``T_0 = R_01(u - theta_1) ... R_0N(u - theta_N)`` and
``That_0 = R_N0(u + theta_N) ... R_10(u + theta_1)``.

Monodromies are contracted one site at a time as blocks over the auxiliary
indices, so memory stays at ``d_aux**2`` physical-space operators.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from . import vertex as vx
from .tensor import kron, max_abs
from .vertex import D2Boundary, ModelKind, XXZBoundary

DENSE_CAP = 4096


@dataclass(frozen=True)
class ReducedXXX:
    """Three-parameter isotropic boundary ``K^-(u) = diag(p+u, p-u)``, ``K^+`` with ``q, xi``."""

    p: float
    q: float
    xi: float


@dataclass(frozen=True)
class TransferFamily:
    """Immutable description of a commuting family ``t(u)``.

    ``boundary`` is an :class:`XXZBoundary` (spin-1/2 kinds), a
    :class:`D2Boundary` (D2 kinds) or a :class:`ReducedXXX` (three-parameter
    XXX chain, whose boundary matrices sit at the opposite chain ends).
    """

    kind: ModelKind
    n: int
    boundary: object
    eta: float | None = None
    thetas: tuple = field(default=())
    cap: int = DENSE_CAP

    def __post_init__(self):
        th = tuple(complex(t) for t in self.thetas) if self.thetas else (0j,) * self.n
        if len(th) != self.n:
            raise ValueError(f"expected {self.n} inhomogeneities")
        object.__setattr__(self, "thetas", th)
        if self.kind.trig and self.eta is None:
            raise ValueError("trigonometric kinds need eta")
        if isinstance(self.boundary, ReducedXXX) and self.kind is not ModelKind.XXX_RATIONAL:
            raise ValueError("reduced boundary only applies to the XXX chain")

    @property
    def local_dim(self) -> int:
        return self.kind.local_dim

    @property
    def dim(self) -> int:
        return self.local_dim**self.n

    @property
    def reduced(self) -> bool:
        return isinstance(self.boundary, ReducedXXX)

    def with_thetas(self, thetas) -> "TransferFamily":
        return TransferFamily(self.kind, self.n, self.boundary, self.eta, tuple(thetas), self.cap)

    def sector(self, which: str) -> "TransferFamily":
        """The spin-1/2 factor family ``t^{s+}`` or ``t^{s-}`` of a D2 family."""
        if not self.kind.d2:
            raise ValueError("only D2 families have sectors")
        b = self.boundary.splus if which == "+" else self.boundary.sminus
        return TransferFamily(self.kind.factor, self.n, b, self.eta, self.thetas, self.cap)

    def __call__(self, u) -> np.ndarray:
        return evaluate(self, u)


def _blocks(r: np.ndarray, d: int) -> np.ndarray:
    """Reshape an (aux x site) operator into ``[a, b]`` blocks of local d x d matrices."""
    return r.reshape(d, d, d, d).transpose(0, 2, 1, 3)


def _monodromies(kind, eta, d, shifts_t, shifts_hat):
    """Blocks ``T[a, b]`` and ``That[a, b]`` over sites 1..N (site 1 most significant)."""
    t_blk = None
    h_blk = None
    for x, y in zip(shifts_t, shifts_hat):
        rb = _blocks(vx.r_matrix(kind, x, eta), d)
        rh = _blocks(vx.r21(kind, y, eta), d)
        if t_blk is None:
            t_blk, h_blk = rb, rh
            continue
        dim = t_blk.shape[-1] * d
        nt = np.zeros((d, d, dim, dim), dtype=complex)
        nh = np.zeros((d, d, dim, dim), dtype=complex)
        for a in range(d):
            for c in range(d):
                for b in range(d):
                    nt[a, c] += np.kron(t_blk[a, b], rb[b, c])
                    nh[a, c] += np.kron(h_blk[b, c], rh[a, b])
        t_blk, h_blk = nt, nh
    return t_blk, h_blk


def _reverse_sites(m: np.ndarray, d: int, n: int) -> np.ndarray:
    t = m.reshape([d] * (2 * n))
    perm = list(range(n - 1, -1, -1))
    return t.transpose(perm + [n + p for p in perm]).reshape(m.shape)


def boundary_matrices(family: TransferFamily, u):
    """``(Kbar(u), K(u))`` in the standard ordering (K at site N)."""
    kind, eta, b = family.kind, family.eta, family.boundary
    if family.reduced:
        # reversed chain: K^- sits at site 1, K^+ plays the dual role
        return vx.k_xxx_reduced("left", u, b.p, b.q, b.xi), vx.k_xxx_reduced("right", u, b.p, b.q, b.xi)
    return vx.k_matrix(kind, "left", u, b, eta), vx.k_matrix(kind, "right", u, b, eta)


def evaluate(family: TransferFamily, u) -> np.ndarray:
    """Dense ``t(u)`` on the physical space."""
    if family.dim > family.cap:
        raise ValueError(f"dimension {family.dim} exceeds dense cap {family.cap}")
    u = complex(u)
    d = family.local_dim
    thetas = family.thetas[::-1] if family.reduced else family.thetas
    t_blk, h_blk = _monodromies(family.kind, family.eta, d,
                                [u - th for th in thetas], [u + th for th in thetas])
    kbar, k = boundary_matrices(family, u)
    dim = t_blk.shape[-1]
    # A[b, e] = sum_c T[b, c] K[c, e]
    a_blk = np.einsum("bcij,ce->beij", t_blk, k)
    out = np.zeros((dim, dim), dtype=complex)
    for a in range(d):
        for b in range(d):
            if kbar[a, b] == 0:
                continue
            for e in range(d):
                out += kbar[a, b] * (a_blk[b, e] @ h_blk[e, a])
    if family.reduced:
        out = _reverse_sites(out, d, family.n)
    return out


def derivative(family: TransferFamily, u, h: float = 1e-5) -> np.ndarray:
    """Second-order central difference of ``t`` along the imaginary axis."""
    step = 1j * h
    return (evaluate(family, u + step) - evaluate(family, u - step)) / (2 * step)


# ---------------------------------------------------------------------------
# identity checks
# ---------------------------------------------------------------------------


def scalar_residual(op: np.ndarray, scalar: complex) -> float:
    """max |op - scalar * I| / |scalar|."""
    return max_abs(op - scalar * np.eye(op.shape[0])) / max(abs(scalar), 1e-300)


def commutator_residual(family: TransferFamily, u, v) -> float:
    """``||[t(u), t(v)]||_max / (||t(u)||_max ||t(v)||_max)``."""
    a, b = evaluate(family, u), evaluate(family, v)
    return max_abs(a @ b - b @ a) / (max_abs(a) * max_abs(b))


def site_interleaver(n: int) -> np.ndarray:
    """Permutation from (sigma_1..sigma_N) x (tau_1..tau_N) to (sigma_1 tau_1)...(sigma_N tau_N)."""
    dim = 4**n
    idx = np.arange(dim).reshape([2] * (2 * n))
    # axes of idx are (sigma_1..sigma_N, tau_1..tau_N); reorder to interleaved
    order = [k for j in range(n) for k in (j, n + j)]
    src = idx.transpose(order).reshape(-1)
    perm = np.zeros((dim, dim))
    perm[np.arange(dim), src] = 1.0
    return perm


def calligraphic_s(n: int) -> np.ndarray:
    """``(x)^N S`` on the interleaved D2 chain."""
    return np.diag(kron(*([vx.S_MATRIX] * n)).diagonal())


def _sites(n_or_family) -> int:
    return n_or_family.n if isinstance(n_or_family, TransferFamily) else int(n_or_family)


def sector_product(n_or_family, op_plus: np.ndarray, op_minus: np.ndarray) -> np.ndarray:
    """``Scal (op+ x op-) Scal^-1`` mapped onto the interleaved D2 chain."""
    n = _sites(n_or_family)
    pi = site_interleaver(n)
    # Scal is a diagonal of +-1, hence its own inverse
    s = calligraphic_s(n).diagonal()
    return (s[:, None] * (pi @ kron(op_plus, op_minus) @ pi.T)) * s[None, :]


def kronecker_sum(n_or_family, op_plus: np.ndarray, op_minus: np.ndarray) -> np.ndarray:
    """``Scal (op+ x I + I x op-) Scal^-1`` on the interleaved D2 chain."""
    eye = np.eye(2 ** _sites(n_or_family))
    return sector_product(n_or_family, op_plus, eye) + sector_product(n_or_family, eye, op_minus)


def check_transfer_factorization(family: TransferFamily, u) -> float:
    """Relative residual of ``t(u) = c^N Scal t^{s+}(u) x t^{s-}(u) Scal^-1`` (c = 4 trig, 1 rational)."""
    if not family.kind.d2:
        raise ValueError("factorization needs a D2 family")
    c = 4.0 if family.kind.trig else 1.0
    lhs = evaluate(family, u)
    rhs = c**family.n * sector_product(family, evaluate(family.sector("+"), u),
                                       evaluate(family.sector("-"), u))
    return vx.rel_residual(lhs, rhs)


# -- XXZ sector scalars ------------------------------------------------------


def _xxz_params(family):
    if family.kind is not ModelKind.XXZ_TRIG or not isinstance(family.boundary, XXZBoundary):
        raise ValueError("needs an XXZ sector family")
    return family.boundary


def rho_s(u, eta):
    return cmath.sinh(-u / 2 + 2 * eta) * cmath.sinh(u / 2 + 2 * eta)


def special_value_zero(family: TransferFamily) -> complex:
    """Scalar of ``t^{s+}(0) = t^{s+}(4 eta)``."""
    b, eta = _xxz_params(family), family.eta
    val = 2 * cmath.cosh(2 * eta) * cmath.sinh(b.s) * cmath.sinh(b.sp)
    for th in family.thetas:
        val *= rho_s(th, eta)
    return val


def special_value_ipi(family: TransferFamily, as_written: bool = False) -> complex:
    """Scalar of ``t^{s+}(i pi) = t^{s+}(-i pi + 4 eta)``.

    The product ``2 cosh 2eta cosh s cosh s' prod rho_s(theta_j + i pi)`` misses
    the factor ``(-1)^N`` picked up by each quasi-periodic R-matrix; it is
    included unless ``as_written``.
    """
    b, eta = _xxz_params(family), family.eta
    val = 2 * cmath.cosh(2 * eta) * cmath.cosh(b.s) * cmath.cosh(b.sp)
    if not as_written:
        val *= (-1) ** family.n
    for th in family.thetas:
        val *= rho_s(th + 1j * np.pi, eta)
    return val


def asymptotic_coefficient(family: TransferFamily, sign: int = 1) -> complex:
    """Coefficient ``c`` in ``t^{s+}(u) ~ c exp(+-(N+2) u)`` as ``Re u -> +-inf``."""
    b, eta, n = _xxz_params(family), family.eta, family.n
    return (-(2.0 ** (-(2 * n + 2))) * cmath.exp(-sign * 2 * (n + 2) * eta)
            * (cmath.exp(-2 * eta) * b.s1 * b.s2p + cmath.exp(2 * eta) * b.s2 * b.s1p))


def fusion_scalar(family: TransferFamily, x, derived: vx.DerivedBoundary) -> complex:
    """Right-hand side of ``t^{s+}(x) t^{s+}(x + 4 eta)`` at ``x = +-theta_j``."""
    eta = family.eta
    sh, ch = cmath.sinh, cmath.cosh
    d = derived
    val = (4 * sh(x - 4 * eta) * sh(x + 4 * eta)
           / (d.alpha * d.alphap * sh(x - 2 * eta) * sh(x + 2 * eta)))
    for a in (d.alpha1, d.alpha2, d.alpha1p, d.alpha2p):
        val *= ch((x - a) / 2) * ch((x + a) / 2)
    for th in family.thetas:
        val *= (sh((x - th - 4 * eta) / 2) * sh((x - th + 4 * eta) / 2)
                * sh((x + th - 4 * eta) / 2) * sh((x + th + 4 * eta) / 2))
    return val


def check_fusion_identity(family: TransferFamily, j: int, sign: int = 1,
                          derived: vx.DerivedBoundary | None = None) -> float:
    """Relative residual of the fusion identity at ``u = sign * theta_j`` (1-based j)."""
    b = _xxz_params(family)
    if derived is None:
        derived = vx.derived_boundary(b, mode="generic")
    x = sign * family.thetas[j - 1]
    prod = evaluate(family, x) @ evaluate(family, x + 4 * family.eta)
    return scalar_residual(prod, fusion_scalar(family, x, derived))


def fusion_state(eta) -> np.ndarray:
    """``(e^{-eta}|12> - e^{eta}|21>) / sqrt(2 cosh 2 eta)``, unit norm under the bilinear pairing."""
    psi = np.zeros(4, dtype=complex)
    psi[1] = cmath.exp(-eta)
    psi[2] = -cmath.exp(eta)
    return psi / cmath.sqrt(2 * cmath.cosh(2 * eta))


def fusion_projector(eta) -> np.ndarray:
    """Rank-one projector ``|psi_0><psi_0|`` onto the fusion state (idempotent for complex eta)."""
    psi = fusion_state(eta)
    return np.outer(psi, psi)


def fused_k_residuals(params: XXZBoundary, u, eta) -> dict:
    """Projected R/K fusion products against their scalar values.

    The fused R products are compared as operators, ``P X P = scalar P``. The
    fused K products are rank one; their matrix element between the swapped
    and unswapped fusion states equals the scalar up to the orientation sign
    of the swapped state, ``<psi_21| X |psi_12> = -scalar``.
    """
    from .tensor import permutation_operator

    kind = ModelKind.XXZ_TRIG
    sh, ch = cmath.sinh, cmath.cosh
    swap = permutation_operator(2)
    psi12 = fusion_state(eta)
    psi21 = swap @ psi12
    p12 = np.outer(psi12, psi12)
    p21 = np.outer(psi21, psi21)
    eye = np.eye(2)
    out = {"projector_idempotency": max_abs(p12 @ p12 - p12)}

    p23 = kron(eye, swap)
    r12 = lambda x: kron(vx.r_matrix(kind, x, eta), eye)  # noqa: E731
    r13 = lambda x: p23 @ r12(x) @ p23  # noqa: E731
    r23 = lambda x: kron(eye, vx.r_matrix(kind, x, eta))  # noqa: E731
    r31 = lambda x: p23 @ kron(vx.r21(kind, x, eta), eye) @ p23  # noqa: E731
    r32 = lambda x: kron(eye, vx.r21(kind, x, eta))  # noqa: E731
    scal = sh(u / 2 + 2 * eta) * sh(u / 2 - 2 * eta)
    big21, big12 = kron(p21, eye), kron(p12, eye)
    out["r_fusion_a"] = max_abs(big21 @ r13(u) @ r23(u + 4 * eta) @ big21 - scal * big21) / abs(scal)
    out["r_fusion_b"] = max_abs(big12 @ r31(u) @ r32(u + 4 * eta) @ big12 - scal * big12) / abs(scal)

    d = vx.derived_boundary(params, mode="generic")
    k1 = kron(vx.k_matrix(kind, "right", u, params, eta), eye)
    k2 = kron(eye, vx.k_matrix(kind, "right", u + 4 * eta, params, eta))
    fused = psi21 @ k1 @ vx.r21(kind, 2 * u + 4 * eta, eta) @ k2 @ psi12
    kscal = -2 * sh(u + 4 * eta) / d.alpha
    for a in (d.alpha1, d.alpha2):
        kscal *= ch((u + a) / 2) * ch((u - a) / 2)
    out["k_fusion"] = abs(fused + kscal) / abs(kscal)

    m1 = kron(vx.mbar_matrix(eta), eye)
    kb2 = kron(eye, vx.k_matrix(kind, "left", u + 4 * eta, params, eta))
    kb1 = kron(vx.k_matrix(kind, "left", u, params, eta), eye)
    fused = psi12 @ kb2 @ m1 @ vx.r_matrix(kind, -2 * u + 4 * eta, eta) @ np.linalg.inv(m1) @ kb1 @ psi21
    bscal = 2 * sh(u - 4 * eta) / d.alphap
    for a in (d.alpha1p, d.alpha2p):
        bscal *= ch((u + a) / 2) * ch((u - a) / 2)
    out["kbar_fusion"] = abs(fused + bscal) / abs(bscal)
    return out


def check_special_values_and_asymptotics(family: TransferFamily, far: float = 40.0) -> dict:
    """Residuals of the special values and of the leading asymptotic coefficients."""
    eta = family.eta
    z = special_value_zero(family)
    pi_val = special_value_ipi(family)
    out = {
        "t(0)": scalar_residual(evaluate(family, 0.0), z),
        "t(4eta)": scalar_residual(evaluate(family, 4 * eta), z),
        "t(ipi)": scalar_residual(evaluate(family, 1j * np.pi), pi_val),
        "t(-ipi+4eta)": scalar_residual(evaluate(family, -1j * np.pi + 4 * eta), pi_val),
        "t(ipi)_as_written": scalar_residual(evaluate(family, 1j * np.pi),
                                             special_value_ipi(family, as_written=True)),
    }
    n = family.n
    for sign, name in ((1, "asym+"), (-1, "asym-")):
        u = sign * far
        coeff = evaluate(family, u) * cmath.exp(-sign * (n + 2) * u)
        out[name] = scalar_residual(coeff, asymptotic_coefficient(family, sign))
    return out


def check_crossing_and_hermiticity(family: TransferFamily, u) -> dict:
    """Crossing residual and, for imaginary inhomogeneities, ``t(u)^dagger - t(u*)``."""
    u = complex(u)
    a = evaluate(family, u)
    if family.kind.trig:
        cross = evaluate(family, -u + 4 * family.eta)
    else:
        cross = evaluate(family, -u - 1)
    out = {"crossing": vx.rel_residual(a, cross)}
    if all(abs(t.real) < 1e-14 for t in family.thetas):
        out["hermiticity"] = vx.rel_residual(a.conj().T, evaluate(family, u.conjugate()))
    return out


# -- reduced XXX chain ------------------------------------------------------


def abar_s(u, family: TransferFamily) -> complex:
    b = family.boundary
    val = (u + 1) / (u + 0.5) * (u + b.p) * (np.sqrt(1 + b.xi**2) * u + b.q)
    for th in family.thetas:
        val *= (u - th + 1) * (u + th + 1)
    return val


def xxx_functional_relations(family: TransferFamily, j: int | None = None) -> dict:
    """Residuals of the reduced-XXX fusion relations and special values on eigenvalues."""
    if not family.reduced:
        raise ValueError("needs a reduced XXX family")
    dbar = lambda u: abar_s(-u - 1, family)  # noqa: E731
    out = {}
    js = range(1, family.n + 1) if j is None else [j]
    for jj in js:
        for sign in (1, -1):
            x = sign * family.thetas[jj - 1]
            prod = evaluate(family, x) @ evaluate(family, x - 1)
            out[f"fusion_{jj}{'+' if sign > 0 else '-'}"] = scalar_residual(prod, dbar(x - 1) * abar_s(x, family))
    a0 = abar_s(0, family)
    out["Lambda(0)"] = scalar_residual(evaluate(family, 0), a0)
    out["Lambda(-1)"] = scalar_residual(evaluate(family, -1), a0)
    return out
