"""Scalar continued fractions for tridiagonal matrices.

Sign convention: the Green's function is ``G(z) = [(H - z)^{-1}]_{11}``,
the negative of the usual resolvent entry ``[(z - H)^{-1}]_{11}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateMap, PivotBreakdown
from .model import TridiagonalOperator

PIVOT_TOL = 1e-300
MARGINAL_TOL = 1e-12
DOUBLE_ROOT_EPS = 8 * np.finfo(float).eps

# rescale the determinant recurrence once magnitudes leave [2^-RESCALE, 2^RESCALE]
RESCALE = 400


@dataclass
class CFResult:
    """Value of a continued fraction together with its tail.

    ``tail[k-1]`` holds f_k.  If ``breakdown_index`` is set the recurrence
    stopped at that (1-based) position and ``value`` is NaN.
    """

    value: complex
    tail: np.ndarray
    breakdown_index: Optional[int] = None
    converged: bool = True
    iterations: int = 0

    @property
    def valid(self) -> bool:
        return self.breakdown_index is None


def cf_recurrence(H: TridiagonalOperator, z, *, pivot_tol=PIVOT_TOL,
                  raise_on_breakdown=True) -> CFResult:
    """Run f_k = 1/(a_k - z - b_k f_{k+1} c_{k+1}) from k = N down to 1.

    Starts from f_{N+1} = 0.  ``value`` is f_1(z) = G(z).

    Raises
    ------
    PivotBreakdown
        A denominator has modulus below ``pivot_tol`` (z is numerically an
        eigenvalue of the trailing sub-chain).  With
        ``raise_on_breakdown=False`` a result flagged by ``breakdown_index``
        is returned instead.
    """
    z = complex(z)
    a, b, c = H.diag, H.upper, H.lower
    n = H.dim
    f = np.full(n, np.nan + 0j)
    nxt = 0j
    for k in range(n - 1, -1, -1):
        den = a[k] - z
        if k < n - 1:
            den -= b[k] * nxt * c[k]
        if not abs(den) >= pivot_tol:
            if raise_on_breakdown:
                raise PivotBreakdown(k + 1)
            return CFResult(complex(np.nan, np.nan), f, breakdown_index=k + 1,
                            converged=False)
        nxt = 1.0 / den
        f[k] = nxt
    return CFResult(complex(f[0]), f)


@dataclass
class UFLFactors:
    """Factors of H - E = U F L.

    ``u`` and ``v`` hold u_2..u_N and v_2..v_N; ``f`` holds f_1..f_N.  U is
    unit upper bidiagonal with -u_{k+1} above the diagonal, L is unit lower
    bidiagonal with -v_{k+1} below it, and F = diag(1/f_k).
    """

    u: np.ndarray
    v: np.ndarray
    f: np.ndarray

    def upper_factor(self) -> np.ndarray:
        n = self.f.size
        return np.eye(n, dtype=complex) - np.diag(self.u, 1)

    def lower_factor(self) -> np.ndarray:
        n = self.f.size
        return np.eye(n, dtype=complex) - np.diag(self.v, -1)

    def middle_factor(self) -> np.ndarray:
        return np.diag(1.0 / self.f)

    def reconstruct(self) -> np.ndarray:
        return self.upper_factor() @ self.middle_factor() @ self.lower_factor()


def ufl_factorize(H: TridiagonalOperator, E) -> UFLFactors:
    f = cf_recurrence(H, E).tail
    u = -H.upper * f[1:]
    v = -f[1:] * H.lower
    return UFLFactors(u, v, f)


def factorization_residual(H: TridiagonalOperator, E, factors: UFLFactors = None) -> float:
    """Max-entry residual of U F L against H - E."""
    if factors is None:
        factors = ufl_factorize(H, E)
    target = H.to_dense() - complex(E) * np.eye(H.dim)
    return float(np.abs(factors.reconstruct() - target).max())


def _renormalize(values, exponent):
    """Scale a tuple of complex numbers by a common power of two."""
    big = max(abs(x) for x in values)
    if big == 0.0 or 2.0**-RESCALE < big < 2.0**RESCALE:
        return values, exponent
    _, e = math.frexp(big)
    return tuple(x * 2.0**-e for x in values), exponent + e


def det_tridiagonal_scaled(H: TridiagonalOperator, z):
    """det(H - z) as ``(mantissa, exponent)`` with value ``mantissa * 2**exponent``.

    Uses the leading-principal-minor recurrence
    D_k = (a_k - z) D_{k-1} - b_{k-1} c_k D_{k-2}, which never divides.
    """
    z = complex(z)
    a, b, c = H.diag, H.upper, H.lower
    prev, cur, exp = 0j, 1 + 0j, 0
    for k in range(H.dim):
        nxt = (a[k] - z) * cur
        if k > 0:
            nxt -= b[k - 1] * c[k - 1] * prev
        (prev, cur), exp = _renormalize((cur, nxt), exp)
    return complex(cur), exp


def det_tridiagonal(H: TridiagonalOperator, z) -> complex:
    mant, exp = det_tridiagonal_scaled(H, z)
    if mant == 0:
        return 0j
    return complex(math.ldexp(mant.real, exp), math.ldexp(mant.imag, exp))


def log_abs_det_tridiagonal(H: TridiagonalOperator, z) -> float:
    """Natural log of |det(H - z)|; ``-inf`` when the determinant vanishes."""
    mant, exp = det_tridiagonal_scaled(H, z)
    if mant == 0:
        return -math.inf
    return math.log(abs(mant)) + exp * math.log(2.0)


# -- infinite tails ------------------------------------------------------------

@dataclass
class FixedPointReport:
    """Fixed points of the constant-coefficient map f -> 1/(beta - E - alpha^2 f).

    ``deriv_plus``/``deriv_minus`` are |alpha^2 f^2| at each root; ``stable``
    names the attracting root (``"plus"``, ``"minus"``), ``"marginal"`` when
    both derivatives equal one, or ``"none"``.
    """

    f_plus: complex
    f_minus: complex
    deriv_plus: float
    deriv_minus: float
    stable: str = field(default="none")

    @property
    def stable_root(self) -> Optional[complex]:
        return {"plus": self.f_plus, "minus": self.f_minus}.get(self.stable)


def fixed_point_analysis(alpha, beta, E=0.0) -> FixedPointReport:
    """Both roots of alpha^2 f^2 - (beta - E) f + 1 = 0 and their stability."""
    alpha2 = complex(alpha) ** 2
    if alpha2 == 0:
        raise DegenerateMap("alpha = 0: the tail map is constant")
    shift = complex(beta) - complex(E)
    disc2 = shift * shift - 4.0 * alpha2
    # a discriminant at the rounding level of its own terms is a double root;
    # its square root would otherwise split the roots by ~sqrt(eps)
    if abs(disc2) <= DOUBLE_ROOT_EPS * (abs(shift) ** 2 + 4.0 * abs(alpha2)):
        disc2 = 0j
    disc = np.sqrt(complex(disc2))
    # the larger root comes from the formula, the other from f+ f- = 1/alpha^2
    if abs(shift + disc) >= abs(shift - disc):
        f_plus = (shift + disc) / (2 * alpha2)
        f_minus = 1.0 / (alpha2 * f_plus)
    else:
        f_minus = (shift - disc) / (2 * alpha2)
        f_plus = 1.0 / (alpha2 * f_minus)
    d_plus = abs(alpha2 * f_plus**2)
    d_minus = abs(alpha2 * f_minus**2)
    if abs(d_plus - 1.0) <= MARGINAL_TOL and abs(d_minus - 1.0) <= MARGINAL_TOL:
        stable = "marginal"
    elif d_plus < 1.0:
        stable = "plus"
    elif d_minus < 1.0:
        stable = "minus"
    else:
        stable = "none"
    return FixedPointReport(complex(f_plus), complex(f_minus), float(d_plus),
                            float(d_minus), stable)


def cf_tail_limit(alpha, beta, E=0.0, f0=0.0, max_iter=1000, tol=1e-12,
                  pivot_tol=PIVOT_TOL) -> CFResult:
    """Iterate f' = 1/(beta - E - alpha^2 f) from ``f0``.

    Stops once |f' - f| < tol.  ``tail`` records the iterates, starting with f0.
    """
    if max_iter < 1 or tol <= 0:
        raise ValueError("max_iter must be >= 1 and tol > 0")
    alpha2 = complex(alpha) ** 2
    shift = complex(beta) - complex(E)
    f = complex(f0)
    history = [f]
    for it in range(1, max_iter + 1):
        den = shift - alpha2 * f
        if not abs(den) >= pivot_tol:
            raise PivotBreakdown(it, f"tail map hit a zero denominator at iteration {it}")
        nxt = 1.0 / den
        history.append(nxt)
        if abs(nxt - f) < tol:
            return CFResult(nxt, np.array(history), converged=True, iterations=it)
        f = nxt
    return CFResult(f, np.array(history), converged=False, iterations=max_iter)
