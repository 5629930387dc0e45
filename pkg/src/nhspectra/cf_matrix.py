"""2x2 matrix continued fractions over block-tridiagonal operators.

Covers the downward recurrence F_k = (A_k - s - B_k F_{k+1} C_{k+1})^{-1},
the secular determinant det(HH - s) used to locate singular values, the
block U F L factorization check, and the two-sided (doubly truncated)
Green's function G(z) = det F_0(z).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cf_scalar import PIVOT_TOL, RESCALE
from .errors import GridTooCoarse, InconsistentDimensions, PivotBreakdown
from .hermitize import BlockTridiagonal, block_tridiagonalize
from .model import TridiagonalOperator

EPS = np.finfo(float).eps
_I2 = np.eye(2, dtype=complex)


def _det2(m):
    return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]


def _adj2(m):
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def _inv2(m, k, pivot_tol):
    d = _det2(m)
    if not abs(d) >= pivot_tol:
        raise PivotBreakdown(k)
    return _adj2(m) / d


@dataclass
class MCFResult:
    """``tail[k-1]`` holds F_k; ``F1`` is the first block.

    ``pivots[k-1]`` is det F_k^{-1}, recorded before the inversion, so it
    is available (and ~0) at the block where a breakdown happened.
    """

    F1: np.ndarray
    tail: np.ndarray
    pivots: np.ndarray
    breakdown_index: Optional[int] = None

    @property
    def valid(self) -> bool:
        return self.breakdown_index is None

    def inverse_determinants(self) -> np.ndarray:
        """det F_k^{-1} for every k (NaN below a breakdown)."""
        return self.pivots.copy()


def mcf_recurrence(BT: BlockTridiagonal, sigma, *, pivot_tol=PIVOT_TOL,
                   raise_on_breakdown=True) -> MCFResult:
    """Downward 2x2 matrix continued fraction with F_{N+1} = 0.

    Raises
    ------
    PivotBreakdown
        A 2x2 denominator has |det| < ``pivot_tol``.  With
        ``raise_on_breakdown=False`` the result is flagged instead; its
        ``pivots`` still hold det F_k^{-1} down to the breakdown block.
    """
    s = complex(sigma)
    n = BT.nblocks
    tail = np.full((n, 2, 2), np.nan + 0j)
    pivots = np.full(n, np.nan + 0j)
    F = None
    for k in range(n - 1, -1, -1):
        den = BT.A[k] - s * _I2
        if F is not None:
            den = den - BT.B[k] @ F @ BT.C[k]
        pivots[k] = _det2(den)
        try:
            F = _inv2(den, k + 1, pivot_tol)
        except PivotBreakdown:
            if raise_on_breakdown:
                raise
            return MCFResult(np.full((2, 2), np.nan + 0j), tail, pivots, breakdown_index=k + 1)
        tail[k] = F
    return MCFResult(tail[0].copy(), tail, pivots)


# -- determinants ------------------------------------------------------------

@dataclass(frozen=True)
class ScaledReal:
    """A real number ``sign * mantissa * 2**exponent`` that cannot overflow."""

    sign: int
    mantissa: float
    exponent: int

    @property
    def value(self) -> float:
        return self.sign * math.ldexp(self.mantissa, self.exponent)

    @property
    def log2_abs(self) -> float:
        if self.sign == 0:
            return -math.inf
        return math.log2(self.mantissa) + self.exponent


def block_determinant_scaled(BT: BlockTridiagonal, sigma):
    """det(HH - sigma) as ``(mantissa, exponent)`` via block minor recurrences.

    With P_k the k-th leading block minor and Q_k = P_k D_k^{-1} (D_k the
    top-down Schur pivot), both obey division-free recurrences::

        P_{k+1} = det(A') P_k - tr(adj(A') C Q_k B) + det(B) det(C) P_{k-1}
        Q_{k+1} = P_k adj(A') - adj(B) adj(Q_k) adj(C)

    where A' = A_{k+1} - sigma and B, C couple blocks k and k+1.  The state
    is rescaled by powers of two, so the recurrence neither breaks down nor
    overflows.
    """
    s = complex(sigma)
    a0 = BT.A[0] - s * _I2
    p_prev, p_cur, q = 1 + 0j, _det2(a0), _adj2(a0)
    exp = 0
    for k in range(BT.nblocks - 1):
        a1 = BT.A[k + 1] - s * _I2
        b, c = BT.B[k], BT.C[k]
        adj_a = _adj2(a1)
        p_next = (_det2(a1) * p_cur - np.trace(adj_a @ c @ q @ b)
                  + _det2(b) * _det2(c) * p_prev)
        q = p_cur * adj_a - _adj2(b) @ _adj2(q) @ _adj2(c)
        p_prev, p_cur = p_cur, p_next
        big = max(abs(p_prev), abs(p_cur), np.abs(q).max())
        if big != 0.0 and not 2.0**-RESCALE < big < 2.0**RESCALE:
            _, e = math.frexp(big)
            scale = 2.0**-e
            p_prev, p_cur, q = p_prev * scale, p_cur * scale, q * scale
            exp += e
    return complex(p_cur), exp


def secular_value(BT: BlockTridiagonal, sigma) -> ScaledReal:
    """det(HH - sigma) for real ``sigma`` and Hermitian ``BT``.

    The determinant of a Hermitian matrix minus a real shift is real; the
    rounding-level imaginary part of the recurrence is discarded.
    """
    mant, exp = block_determinant_scaled(BT, float(sigma))
    re = mant.real
    if re == 0.0:
        return ScaledReal(0, 0.0, 0)
    m, e = math.frexp(abs(re))
    return ScaledReal(1 if re > 0 else -1, m, exp + e)


def eigenvalue_count(BT: BlockTridiagonal, sigma) -> int:
    """Number of eigenvalues of Hermitian ``BT`` strictly below ``sigma``.

    Sylvester inertia of the continued-fraction pivots F_k^{-1}: since
    HH - sigma = U F L with L = U^+, the negative eigenvalues of the 2x2
    pivots add up to those of HH - sigma.  An exactly singular pivot is
    nudged by ``-eps*scale``, i.e. evaluated just above ``sigma``.
    """
    s = float(sigma)
    scale = BT.max_norm() + abs(s) + np.finfo(float).tiny
    eta = 4 * EPS * scale
    count = 0
    F = None
    for k in range(BT.nblocks - 1, -1, -1):
        d = BT.A[k] - s * _I2
        if F is not None:
            d = d - BT.B[k] @ F @ BT.C[k]
        d = 0.5 * (d + d.conj().T)
        det = (d[0, 0] * d[1, 1]).real - abs(d[0, 1]) ** 2
        if abs(det) <= (eta * EPS) ** 2 or not np.isfinite(det):
            d = d - eta * _I2
            det = (d[0, 0] * d[1, 1]).real - abs(d[0, 1]) ** 2
        if det < 0:
            count += 1
        elif (d[0, 0] + d[1, 1]).real < 0:
            count += 2
        F = _adj2(d) / det
    return count


# -- singular values ------------------------------------------------------------

def gershgorin_bound(H: TridiagonalOperator) -> float:
    """Row-sum bound on the spectral radius of the block-tridiagonal dilation."""
    a, b, c = np.abs(H.diag), np.abs(H.upper), np.abs(H.lower)
    odd = a.copy()
    odd[:-1] += b
    odd[1:] += c
    even = a.copy()
    even[:-1] += c
    even[1:] += b
    return float(max(odd.max(), even.max()))


@dataclass
class SingularValueInfo:
    sigma_max: float
    grid: int
    multiple: np.ndarray
    sign_changes: int


def _bisect_sign(BT, lo, hi, s_lo, tol):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        s_mid = secular_value(BT, mid).sign
        if s_mid == 0:
            return mid
        if s_mid == s_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _bisect_count(count_fn, lo, hi, target, tol):
    """Smallest point where count_fn reaches ``target``, to within ``tol``."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if count_fn(mid) >= target:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def singular_values_mcf(H: TridiagonalOperator, sigma_max=None, grid=None, tol=None,
                        multiplicity_fallback=True, return_info=False):
    """Singular values of H as the non-negative roots of det(HH - sigma).

    The interval ``[0, sigma_max]`` is scanned on ``grid`` points; every
    sign change of the secular determinant is refined by bisection to
    ``tol``.  Roots without a sign change (even multiplicity, including
    vanishing singular values) are recovered from the inertia count of the
    continued-fraction pivots when ``multiplicity_fallback`` is set.

    Returns the singular values in descending order, and a
    :class:`SingularValueInfo` if ``return_info``.

    Raises
    ------
    GridTooCoarse
        The number of roots found differs from N.
    """
    n = H.dim
    BT = block_tridiagonalize(H)
    bound = gershgorin_bound(H)
    enclosure = bound * (1 + 1e-6) if bound > 0 else 1.0
    hi = 2 * enclosure if sigma_max is None else max(float(sigma_max), enclosure)
    npts = max(int(grid) if grid is not None else 8 * n + 16, 2 * n)
    if tol is None:
        tol = 4 * EPS * hi
    xs = np.linspace(0.0, hi, npts)
    signs = [secular_value(BT, x).sign for x in xs]

    def count(x):
        return eigenvalue_count(BT, x) - n if x > 0 else 0

    roots = []
    sign_changes = 0
    counts = [count(x) for x in xs] if multiplicity_fallback else None
    for i in range(npts - 1):
        lo, hi_i = xs[i], xs[i + 1]
        flip = signs[i] * signs[i + 1] < 0
        sign_changes += flip
        if not multiplicity_fallback:
            if flip:
                roots.append(_bisect_sign(BT, lo, hi_i, signs[i], tol))
            continue
        m = counts[i + 1] - counts[i]
        if m == 0:
            continue
        # the cell at sigma = 0 holds the +-0 pair of a vanishing singular
        # value, whose rounding-level sign flips are spurious
        if m == 1 and flip and i > 0:
            roots.append(_bisect_sign(BT, lo, hi_i, signs[i], tol))
        else:
            roots.extend(_bisect_count(count, lo, hi_i, counts[i] + j, tol)
                         for j in range(1, m + 1))
    if len(roots) != n:
        raise GridTooCoarse(
            f"located {len(roots)} roots of the secular determinant, expected {n}", roots)
    order = np.argsort(roots)[::-1]
    values = np.asarray(roots)[order]
    values[values <= tol] = 0.0
    if return_info:
        gaps = np.abs(values[:, None] - values[None, :]) <= 10 * tol
        multiple = gaps.sum(axis=1) > 1
        return values, SingularValueInfo(hi, npts, multiple, sign_changes)
    return values


# -- factorization check ---------------------------------------------------------

def block_factor_check(BT: BlockTridiagonal, sigma) -> float:
    """Max-entry residual of the block U F L product against HH - sigma.

    U is unit upper block-bidiagonal with off-diagonal blocks B_k F_{k+1},
    L is unit lower block-bidiagonal with F_{k+1} C_{k+1}, and F is
    block-diagonal with F_k^{-1}.
    """
    res = mcf_recurrence(BT, sigma)
    n = BT.nblocks
    F = res.tail
    U = np.eye(2 * n, dtype=complex)
    L = np.eye(2 * n, dtype=complex)
    D = np.zeros((2 * n, 2 * n), dtype=complex)
    for k in range(n):
        D[2 * k:2 * k + 2, 2 * k:2 * k + 2] = np.linalg.inv(F[k])
    for k in range(n - 1):
        U[2 * k:2 * k + 2, 2 * k + 2:2 * k + 4] = BT.B[k] @ F[k + 1]
        L[2 * k + 2:2 * k + 4, 2 * k:2 * k + 2] = F[k + 1] @ BT.C[k]
    target = BT.to_dense() - complex(sigma) * np.eye(2 * n)
    return float(np.abs(U @ D @ L - target).max())


# -- two-sided chains --------------------------------------------------------------

def _stack(blocks, count, name):
    arr = np.asarray(blocks, dtype=complex).reshape(-1, 2, 2) if np.size(blocks) else \
        np.zeros((0, 2, 2), dtype=complex)
    if arr.shape[0] != count:
        raise InconsistentDimensions(f"{name} has {arr.shape[0]} blocks, expected {count}")
    return arr


@dataclass(eq=False)
class TwoSidedModel:
    """Block chain truncated at depth M to the left and N to the right of A_0.

    ``right_A = [A_1..A_N]``, ``right_B = [B_0..B_{N-1}]`` (above the
    diagonal), ``right_C = [C_1..C_N]`` (below).  On the left, listed
    outward: ``left_A = [A_{-1}..A_{-M}]``, ``left_B = [B_{-1}..B_{-M}]``
    (above the diagonal) and ``left_C = [C_0..C_{-M+1}]`` (below).
    """

    center: np.ndarray
    right_A: np.ndarray
    right_B: np.ndarray
    right_C: np.ndarray
    left_A: np.ndarray
    left_B: np.ndarray
    left_C: np.ndarray

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=complex).reshape(2, 2)
        nr = np.size(self.right_A) // 4
        nl = np.size(self.left_A) // 4
        self.right_A = _stack(self.right_A, nr, "right_A")
        self.right_B = _stack(self.right_B, nr, "right_B")
        self.right_C = _stack(self.right_C, nr, "right_C")
        self.left_A = _stack(self.left_A, nl, "left_A")
        self.left_B = _stack(self.left_B, nl, "left_B")
        self.left_C = _stack(self.left_C, nl, "left_C")

    @property
    def depths(self):
        """(M, N)"""
        return self.left_A.shape[0], self.right_A.shape[0]

    @classmethod
    def from_block_tridiagonal(cls, BT: BlockTridiagonal, center: int) -> "TwoSidedModel":
        """Split a finite chain at block ``center`` (0-based)."""
        c = int(center)
        if not 0 <= c < BT.nblocks:
            raise ValueError(f"center {c} outside 0..{BT.nblocks - 1}")
        return cls(BT.A[c], BT.A[c + 1:], BT.B[c:], BT.C[c:],
                   BT.A[:c][::-1], BT.B[:c][::-1], BT.C[:c][::-1])

    def to_block_tridiagonal(self) -> BlockTridiagonal:
        A = np.concatenate([self.left_A[::-1], self.center[None], self.right_A])
        B = np.concatenate([self.left_B[::-1], self.right_B])
        C = np.concatenate([self.left_C[::-1], self.right_C])
        return BlockTridiagonal(A, B, C)

    def mirrored(self) -> "TwoSidedModel":
        """The same operator with the block order reversed (left <-> right)."""
        return TwoSidedModel(self.center, self.left_A, self.left_C, self.left_B,
                             self.right_A, self.right_C, self.right_B)


def two_sided_green(model: TwoSidedModel, z, *, pivot_tol=PIVOT_TOL) -> complex:
    """G(z) = det F_0(z) with F_0 = [A_0 - z - C_0 F_{-1} B_{-1} - B_0 F_1 C_1]^{-1}.

    Both tails start from zero beyond the truncation depths.
    """
    z = complex(z)
    m, n = model.depths
    # right side: F_k, k = N..1; breakdown indices are reported as +k
    right = None
    for k in range(n, 0, -1):
        den = model.right_A[k - 1] - z * _I2
        if right is not None:
            den = den - model.right_B[k] @ right @ model.right_C[k]
        right = _inv2(den, k, pivot_tol)
    # left side: F_{-j}, j = M..1; breakdown indices reported as -j
    left = None
    for j in range(m, 0, -1):
        den = model.left_A[j - 1] - z * _I2
        if left is not None:
            den = den - model.left_C[j] @ left @ model.left_B[j]
        left = _inv2(den, -j, pivot_tol)
    den = model.center - z * _I2
    if left is not None:
        den = den - model.left_C[0] @ left @ model.left_B[0]
    if right is not None:
        den = den - model.right_B[0] @ right @ model.right_C[0]
    return complex(_det2(_inv2(den, 0, pivot_tol)))
