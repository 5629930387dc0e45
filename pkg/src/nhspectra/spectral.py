"""Dense eigenvalues, pole verification and exceptional-point scanning."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Union

import numpy as np
from scipy import optimize

from .cf_scalar import log_abs_det_tridiagonal
from .errors import DimensionTooLarge, NonConstantDimension
from .hermitize import DENSE_CAP
from .model import ModelSpec, TridiagonalOperator, dense_mp

REALITY_TOL = 1e-8
EP_CONDITION = 1e6
# golden-section target on gamma, and the distance assumed when bounding
# the Puiseux gap |gamma - gamma_EP|^(1/order) at the refined point
REFINE_TOL = 1e-14
PUISEUX_DISTANCE = 1e-12
REFINE_DPS = 40
PRECISE_MAX_DIM = 32


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    residuals: np.ndarray
    all_real: bool


@dataclass
class EPReport:
    """Exceptional points found on a gamma scan, one entry per location."""

    locations: List[float] = field(default_factory=list)
    orders: List[int] = field(default_factory=list)
    gaps: List[float] = field(default_factory=list)
    conditions: List[float] = field(default_factory=list)
    reality_boundaries: List[bool] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return bool(self.locations)

    @property
    def gap_min(self) -> float:
        return min(self.gaps, default=math.inf)

    @property
    def eigvec_condition(self) -> float:
        return max(self.conditions, default=math.nan)

    @property
    def reality_boundary(self) -> bool:
        return any(self.reality_boundaries)


def _check_dense(H):
    if H.dim > DENSE_CAP:
        raise DimensionTooLarge(f"dense solver limited to N <= {DENSE_CAP}, got {H.dim}")


def sort_eigenvalues(values) -> np.ndarray:
    """Order by real part, then imaginary part; real parts equal to 1e-10 tie."""
    values = np.asarray(values, dtype=complex)
    order = np.lexsort((values.imag, np.round(values.real, 10)))
    return values[order]


def verify_pole(H: TridiagonalOperator, E) -> float:
    """|det(H - E)| / (1 + max|H_ij|)^N; at most 1e-8 certifies an eigenvalue."""
    log_det = log_abs_det_tridiagonal(H, E)
    return math.exp(log_det - H.dim * math.log1p(H.max_norm()))


def _as_operator(model):
    return model if isinstance(model, TridiagonalOperator) else model.build()


def eigenvalues_dense(model: Union[TridiagonalOperator, ModelSpec]) -> SpectrumReport:
    """Eigenvalues from LAPACK's Hessenberg QR with residuals from the CF determinant.

    ``model`` is an operator or a model spec.  For a spec whose eigenvector
    matrix has condition above ``EP_CONDITION`` (a near-defective spectrum)
    and dimension at most ``PRECISE_MAX_DIM``, the eigenvalues are recomputed
    from the matrix built in ``16 + 10 N`` digits.  Near an EP of order K the
    rounding of entries such as sqrt(6) alone moves eigenvalues by
    ~eps**(1/K), enough to turn a real spectrum complex.
    """
    H = _as_operator(model)
    _check_dense(H)
    eig, vecs = np.linalg.eig(H.to_dense())
    if (not isinstance(model, TridiagonalOperator) and 1 < H.dim <= PRECISE_MAX_DIM
            and not np.linalg.cond(vecs) < EP_CONDITION):
        ctx, m = dense_mp(model, 16 + 10 * H.dim)
        eig = np.array([complex(e) for e in ctx.eig(m, left=False, right=False)])
    eig = sort_eigenvalues(eig)
    residuals = np.array([verify_pole(H, e) for e in eig])
    return SpectrumReport(eig, residuals, is_all_real(eig, H.max_norm()))


def is_all_real(eigenvalues, scale) -> bool:
    return bool(np.all(np.abs(np.imag(eigenvalues)) < REALITY_TOL * (1 + scale)))


def diagonalizability_check(H: TridiagonalOperator, tol=1e-6):
    """Return ``(diagonalizable, condition)`` of the unit-column eigenvector matrix.

    ``diagonalizable`` is ``condition < 1/tol``.
    """
    _check_dense(H)
    _, vecs = np.linalg.eig(H.to_dense())
    cond = float(np.linalg.cond(vecs))
    if not np.isfinite(cond):
        cond = math.inf
    return cond < 1.0 / tol, cond


def min_gap(eigenvalues):
    """Smallest pairwise distance and the index pair attaining it."""
    e = np.asarray(eigenvalues)
    if e.size < 2:
        return math.inf, None
    d = np.abs(e[:, None] - e[None, :])
    d[np.diag_indices(e.size)] = np.inf
    i, j = np.unravel_index(np.argmin(d), d.shape)
    return float(d[i, j]), (int(i), int(j))


Family = Union[ModelSpec, Callable[[float], TridiagonalOperator]]


def _builder(family: Family):
    if hasattr(family, "with_gamma"):
        return lambda g: family.with_gamma(g).build()
    if callable(family):
        return family
    raise TypeError("family must be a model spec or a callable gamma -> operator")


def _precise_eigenvalues(family: Family, build):
    """Eigenvalue routine for the refinement stage.

    Model specs are re-evaluated in extended precision; plain callables only
    provide double-precision matrices.
    """
    if hasattr(family, "with_gamma"):
        def eig(g):
            ctx, m = dense_mp(family.with_gamma(g), REFINE_DPS)
            return np.array([complex(e) for e in ctx.eig(m, left=False, right=False)])
        return eig
    return lambda g: np.linalg.eigvals(build(g).to_dense())


def _cluster_order(eig, gap, pair):
    center = 0.5 * (eig[pair[0]] + eig[pair[1]])
    dist = np.abs(eig - center)

    def count(radius):
        return max(2, int(np.sum(dist <= radius)))

    order = count(1e3 * gap)
    for _ in range(5):
        new = count(10.0 * gap ** (1.0 / order))
        if new == order:
            break
        order = max(order, new)
    return order


def ep_scan(family: Family, gamma_lo, gamma_hi, steps, *, cond_threshold=EP_CONDITION,
            refine_tol=REFINE_TOL) -> EPReport:
    """Locate exceptional points of a one-parameter family on [gamma_lo, gamma_hi].

    The minimal pairwise eigenvalue gap is scanned on ``steps`` points and
    each grid minimum is refined by golden-section search, in extended
    precision when ``family`` is a model spec.  A refined point
    counts as an EP when the gap has collapsed and the eigenvector matrix is
    nearly singular (condition above ``cond_threshold``).  Near an EP of
    order m the gap only falls like |gamma - gamma_EP|^(1/m), so "collapsed"
    means below ``max(1e-6, 10 * PUISEUX_DISTANCE**(1/N)) * max|H_ij|``.

    An empty report means no EP was found; that is a valid outcome.
    """
    if steps < 8:
        raise ValueError("steps must be at least 8")
    if not gamma_lo < gamma_hi:
        raise ValueError("need gamma_lo < gamma_hi")
    build = _builder(family)
    grid = np.linspace(gamma_lo, gamma_hi, int(steps))
    mats = [build(g) for g in grid]
    dims = {m.dim for m in mats}
    if len(dims) != 1:
        raise NonConstantDimension(f"family changes dimension over the range: {sorted(dims)}")
    n = dims.pop()
    _check_dense(mats[0])
    report = EPReport()
    if n < 2:
        return report

    precise = _precise_eigenvalues(family, build)

    def gap_at(g):
        return min_gap(precise(g))[0]

    gaps = np.array([min_gap(np.linalg.eigvals(m.to_dense()))[0] for m in mats])
    candidates = [i for i in range(steps)
                  if (i == 0 or gaps[i] <= gaps[i - 1]) and (i == steps - 1 or gaps[i] <= gaps[i + 1])]
    half_step = 0.5 * (grid[1] - grid[0])
    for i in candidates:
        a, c = grid[max(i - 1, 0)], grid[min(i + 1, steps - 1)]
        try:
            g_star = optimize.golden(gap_at, brack=(a, grid[i], c), tol=refine_tol)
        except (ValueError, RuntimeError):
            g_star = optimize.minimize_scalar(gap_at, bounds=(a, c), method="bounded",
                                              options={"xatol": refine_tol}).x
        g_star = float(np.clip(g_star, gamma_lo, gamma_hi))
        if any(abs(g_star - loc) < 1e-6 for loc in report.locations):
            continue
        H = build(g_star)
        eig = precise(g_star)
        gap, pair = min_gap(eig)
        scale = H.max_norm()
        threshold = max(1e-6, 10.0 * PUISEUX_DISTANCE ** (1.0 / n)) * scale
        _, cond = diagonalizability_check(H)
        if not (gap < threshold and cond > cond_threshold):
            continue
        left = build(max(g_star - half_step, gamma_lo))
        right = build(min(g_star + half_step, gamma_hi))
        flips = (is_all_real(np.linalg.eigvals(left.to_dense()), left.max_norm())
                 != is_all_real(np.linalg.eigvals(right.to_dense()), right.max_norm()))
        report.locations.append(g_star)
        report.orders.append(_cluster_order(eig, gap, pair))
        report.gaps.append(gap)
        report.conditions.append(cond)
        report.reality_boundaries.append(bool(flips))
    order = np.argsort(report.locations)
    for name in ("locations", "orders", "gaps", "conditions", "reality_boundaries"):
        values = getattr(report, name)
        setattr(report, name, [values[k] for k in order])
    return report
