"""Dense complex linear-algebra primitives.

Kronecker products, site embeddings, permutation operators, partial traces
over a leading auxiliary factor, and fitting/rooting of Laurent polynomials
in ``exp(u)`` (trigonometric branch) or ``u`` (rational branch).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

IDENTITY_TOL = 1e-10
ROOT_TOL = 1e-8


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a finite 2-d complex array, raising on NaN/Inf."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def kron(*mats) -> np.ndarray:
    """Kronecker product of one or more matrices, left factor most significant."""
    return reduce(np.kron, (np.asarray(m, dtype=complex) for m in mats))


def permutation_operator(d: int) -> np.ndarray:
    """Swap operator on C^d (x) C^d: ``P |i>|j> = |j>|i>``."""
    if d < 2:
        raise ValueError("local dimension must be >= 2")
    p = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            p[j * d + i, i * d + j] = 1.0
    return p


@dataclass(frozen=True)
class ChainGeometry:
    """Number of sites, local dimension and inhomogeneities theta_j."""

    n: int
    local_dim: int = 2
    thetas: tuple = field(default=())

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("N must be >= 1")
        if self.local_dim not in (2, 4):
            raise ValueError("local_dim must be 2 or 4")
        th = tuple(complex(t) for t in self.thetas) if self.thetas else (0j,) * self.n
        if len(th) != self.n:
            raise ValueError(f"expected {self.n} inhomogeneities, got {len(th)}")
        object.__setattr__(self, "thetas", th)

    @property
    def dim(self) -> int:
        return self.local_dim ** self.n

    @property
    def homogeneous(self) -> bool:
        return all(t == 0 for t in self.thetas)

    @property
    def imaginary_thetas(self) -> bool:
        return all(abs(t.real) < 1e-14 for t in self.thetas)


def embed(op, sites: Sequence[int], geom: ChainGeometry) -> np.ndarray:
    """Embed an operator acting on ``sites`` (1-based) into the full chain.

    Sites need not be contiguous or sorted; the operator's tensor legs follow
    the order given in ``sites``.
    """
    op = np.asarray(op, dtype=complex)
    d, n = geom.local_dim, geom.n
    sites = list(sites)
    k = len(sites)
    if len(set(sites)) != k:
        raise ValueError("sites must be distinct")
    if any(s < 1 or s > n for s in sites):
        raise ValueError(f"site out of range [1, {n}]: {sites}")
    if op.shape != (d**k, d**k):
        raise ValueError(f"operator shape {op.shape} does not match {k} sites of dim {d}")
    if sites == list(range(sites[0], sites[0] + k)):
        left = np.eye(d ** (sites[0] - 1))
        right = np.eye(d ** (n - sites[0] - k + 1))
        return kron(left, op, right)
    # general placement: tensor with identity on the rest, then permute legs
    rest = [s for s in range(1, n + 1) if s not in sites]
    full = kron(op, np.eye(d ** len(rest)))
    order = sites + rest  # leg j of ``full`` sits on chain site order[j]
    perm = [order.index(s) for s in range(1, n + 1)]
    t = full.reshape([d] * (2 * n))
    t = t.transpose(perm + [n + p for p in perm])
    return t.reshape(d**n, d**n)


def partial_trace_aux(m, d_aux: int) -> np.ndarray:
    """Trace out the leading (auxiliary) Kronecker factor of dimension ``d_aux``."""
    m = np.asarray(m, dtype=complex)
    if m.shape[0] != m.shape[1] or m.shape[0] % d_aux:
        raise ValueError(f"shape {m.shape} not divisible by auxiliary dim {d_aux}")
    rest = m.shape[0] // d_aux
    return np.einsum("aiaj->ij", m.reshape(d_aux, rest, d_aux, rest))


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


# ---------------------------------------------------------------------------
# Laurent polynomials in y = exp(u) (trig) or u (rational)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrigPolynomial:
    """``f(u) = exp(offset*u) * sum_k coeffs[k] * y**k``.

    ``y = exp(u)`` for ``convention="trig"`` and ``y = u`` (with offset 0) for
    ``convention="rational"``. ``offset`` may be half-integral, e.g. ``-1/2``
    for ``2 sinh((u - c)/2) = exp(-u/2) (exp(-c/2) y - exp(c/2))``.
    Coefficients are stored lowest power first.
    """

    coeffs: np.ndarray
    convention: str = "trig"
    offset: float = 0.0
    residual: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        object.__setattr__(self, "coeffs", c)
        if self.convention not in ("trig", "rational"):
            raise ValueError(f"unknown convention {self.convention!r}")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> complex:
        return complex(self.coeffs[-1])

    def variable(self, u):
        u = np.asarray(u, dtype=complex)
        return np.exp(u) if self.convention == "trig" else u

    def __call__(self, u):
        u = np.asarray(u, dtype=complex)
        y = self.variable(u)
        val = np.polynomial.polynomial.polyval(y, self.coeffs)
        if self.convention == "trig" and self.offset:
            val = val * np.exp(self.offset * u)
        return val


def fit_polynomial(points, values, degree: int, convention: str = "trig",
                   offset: float = 0.0) -> TrigPolynomial:
    """Least-squares fit of a :class:`TrigPolynomial` to samples.

    Exact interpolation when ``len(points) == degree + 1``. The returned
    ``residual`` is the max-abs misfit on the samples relative to the largest
    sample magnitude.
    """
    u = np.asarray(points, dtype=complex)
    f = np.asarray(values, dtype=complex)
    if u.shape != f.shape or u.ndim != 1:
        raise ValueError("points and values must be 1-d of equal length")
    if len(u) < degree + 1:
        raise ValueError(f"need at least {degree + 1} samples, got {len(u)}")
    if convention == "trig":
        y = np.exp(u)
        rhs = f * np.exp(-offset * u)
    elif convention == "rational":
        if offset:
            raise ValueError("rational convention has no offset")
        y, rhs = u, f
    else:
        raise ValueError(f"unknown convention {convention!r}")
    distinct = np.unique(np.round(y, 12))
    if len(distinct) < degree + 1:
        raise np.linalg.LinAlgError("rank deficient: duplicate sample points")
    # column scaling keeps the Vandermonde system balanced for |y| != 1
    scale = max(float(np.max(np.abs(y))), 1e-300)
    v = np.vander(y / scale, degree + 1, increasing=True)
    sol, *_ = np.linalg.lstsq(v, rhs, rcond=None)
    coeffs = sol / scale ** np.arange(degree + 1)
    fitted = v @ sol
    if convention == "trig":
        fitted = fitted * np.exp(offset * u)
    norm = max(float(np.max(np.abs(f))), 1e-300)
    res = float(np.max(np.abs(fitted - f))) / norm
    return TrigPolynomial(coeffs, convention, offset, res)


def polynomial_roots(p: TrigPolynomial, tol: float = 1e-14) -> np.ndarray:
    """All roots of ``p`` in the u-plane.

    Trig roots ``y_k`` are mapped to ``u_k = log(y_k)`` on the principal branch,
    so ``Im u_k`` lies in ``(-pi, pi]``.
    """
    c = p.coeffs
    if p.degree < 1:
        raise ValueError("degree must be >= 1")
    if abs(c[-1]) <= tol * max(float(np.max(np.abs(c))), 1e-300):
        raise ValueError("leading coefficient below tolerance")
    y = np.polynomial.polynomial.polyroots(c)
    if p.convention == "rational":
        return y
    return np.log(y.astype(complex))
