"""Tridiagonal matrices of the two-mode Bose-Hubbard family.

The Fock basis is ordered by increasing occupation of the first mode:
basis index ``k = 1..K`` carries ``(n1, n2) = (k - 1, N - k + 1)`` with
``K = N + 1``.  With this ordering the first diagonal entry of the
non-Hermitian model is ``-i*gamma*N``.

Model files are JSON objects with a ``"type"`` key::

    {"type": "bh", "particles": 2, "epsilon": [0, 0.6], "v": 1, "c": 0}
    {"type": "ubh", "particles": 4, "gamma": 0.5}
    {"type": "nonbh5", "gamma": 0.3}
    {"type": "custom", "diag": [[0, -1], [0, 1]], "upper": [1], "lower": [1]}

Complex scalars are written ``[re, im]``; a bare number means ``im = 0``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import (
    DimensionTooLarge,
    InconsistentDimensions,
    MalformedInput,
    UnknownVariant,
)

MAX_PARTICLES = 10_000


def _as_band(values, name):
    arr = np.asarray(values, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True, eq=False)
class TridiagonalOperator:
    """Complex tridiagonal matrix stored by bands.

    ``diag`` holds a_1..a_N, ``upper`` holds b_1..b_{N-1} (entry (k, k+1))
    and ``lower`` holds c_2..c_N (entry (k+1, k)).
    """

    diag: np.ndarray
    upper: np.ndarray
    lower: np.ndarray

    def __post_init__(self):
        d = _as_band(self.diag, "diag")
        u = _as_band(self.upper, "upper")
        l = _as_band(self.lower, "lower")
        if d.size == 0:
            raise InconsistentDimensions("dimension must be positive")
        if u.size != d.size - 1 or l.size != d.size - 1:
            raise InconsistentDimensions(
                f"band lengths {d.size}, {u.size}, {l.size} do not match "
                f"dimension {d.size} (expected N, N-1, N-1)"
            )
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "upper", u)
        object.__setattr__(self, "lower", l)

    @property
    def dim(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        n = self.dim
        m = np.zeros((n, n), dtype=complex)
        idx = np.arange(n)
        m[idx, idx] = self.diag
        m[idx[:-1], idx[1:]] = self.upper
        m[idx[1:], idx[:-1]] = self.lower
        return m

    def max_norm(self) -> float:
        """Largest entry modulus."""
        return float(max(np.abs(self.diag).max(initial=0.0),
                         np.abs(self.upper).max(initial=0.0),
                         np.abs(self.lower).max(initial=0.0)))

    def is_complex_symmetric(self) -> bool:
        return bool(np.array_equal(self.upper, self.lower))

    def is_hermitian(self, tol=0.0) -> bool:
        return bool(np.all(np.abs(self.diag.imag) <= tol)
                    and np.all(np.abs(self.upper - self.lower.conj()) <= tol))

    def __eq__(self, other):
        if not isinstance(other, TridiagonalOperator):
            return NotImplemented
        return (np.array_equal(self.diag, other.diag)
                and np.array_equal(self.upper, other.upper)
                and np.array_equal(self.lower, other.lower))

    def __repr__(self):
        return f"TridiagonalOperator(dim={self.dim})"


def _check_particles(particles):
    if isinstance(particles, bool) or int(particles) != particles or particles < 0:
        raise ValueError(f"particle number must be a non-negative integer, got {particles!r}")
    if particles > MAX_PARTICLES:
        raise DimensionTooLarge(f"particle number {particles} exceeds {MAX_PARTICLES}")
    return int(particles)


def build_bose_hubbard(particles, epsilon, v, c) -> TridiagonalOperator:
    """Fock-basis matrix of the two-mode Bose-Hubbard Hamiltonian.

    ``epsilon``, ``v`` and ``c`` may be complex; ``epsilon = 1j*gamma`` gives
    the non-Hermitian continuation.
    """
    n = _check_particles(particles)
    k = np.arange(1, n + 2)
    imbalance = 2.0 * (k - 1) - n
    diag = complex(epsilon) * imbalance + 0.5 * complex(c) * imbalance**2
    kk = k[:-1]
    hop = complex(v) * np.sqrt(kk * (n - kk + 1.0))
    return TridiagonalOperator(diag, hop, hop.copy())


def build_ubh(particles, gamma) -> TridiagonalOperator:
    """Non-interacting non-Hermitian dimer: ``epsilon = i*gamma``, ``v = 1``, ``c = 0``."""
    return build_bose_hubbard(particles, 1j * float(gamma), 1.0, 0.0)


def build_nonbh5(gamma) -> TridiagonalOperator:
    """The 5x5 complex-symmetric model that is not of Bose-Hubbard type."""
    g = float(gamma)
    diag = 1j * g * np.array([-4.0, -2.0, 0.0, 2.0, 4.0])
    s = 1j * np.sqrt(54.0)
    off = np.array([8.0, s, s, 8.0], dtype=complex)
    return TridiagonalOperator(diag, off, off.copy())


# -- declarative model descriptions -----------------------------------------

@dataclass(frozen=True)
class BoseHubbard:
    particles: int
    epsilon: complex
    v: complex = 1.0
    c: complex = 0.0
    type = "bh"

    def build(self) -> TridiagonalOperator:
        return build_bose_hubbard(self.particles, self.epsilon, self.v, self.c)

    def with_gamma(self, gamma) -> "BoseHubbard":
        return BoseHubbard(self.particles, 1j * float(gamma), self.v, self.c)


@dataclass(frozen=True)
class UnconventionalBH:
    particles: int
    gamma: float
    v: float = 1.0
    c: float = 0.0
    type = "ubh"

    def build(self) -> TridiagonalOperator:
        return build_bose_hubbard(self.particles, 1j * self.gamma, self.v, self.c)

    def with_gamma(self, gamma) -> "UnconventionalBH":
        return UnconventionalBH(self.particles, float(gamma), self.v, self.c)


@dataclass(frozen=True)
class NonBH5:
    gamma: float
    type = "nonbh5"

    def build(self) -> TridiagonalOperator:
        return build_nonbh5(self.gamma)

    def with_gamma(self, gamma) -> "NonBH5":
        return NonBH5(float(gamma))


@dataclass(frozen=True, eq=False)
class Custom:
    diag: tuple
    upper: tuple = field(default=())
    lower: tuple = field(default=())
    type = "custom"

    def __post_init__(self):
        for name in ("diag", "upper", "lower"):
            object.__setattr__(self, name, tuple(complex(x) for x in getattr(self, name)))
        n = len(self.diag)
        if n == 0 or len(self.upper) != n - 1 or len(self.lower) != n - 1:
            raise InconsistentDimensions(
                f"custom bands have lengths {n}, {len(self.upper)}, {len(self.lower)}; "
                "expected N, N-1, N-1 with N >= 1"
            )

    def __eq__(self, other):
        if not isinstance(other, Custom):
            return NotImplemented
        return (self.diag, self.upper, self.lower) == (other.diag, other.upper, other.lower)

    def build(self) -> TridiagonalOperator:
        return TridiagonalOperator(self.diag, self.upper, self.lower)

    def with_gamma(self, gamma):
        raise ValueError("custom models have no free gamma parameter")


ModelSpec = Union[BoseHubbard, UnconventionalBH, NonBH5, Custom]


# -- serialization ------------------------------------------------------------

def _complex(value, key):
    if isinstance(value, bool):
        raise MalformedInput(f"{key}: expected a number or [re, im], got {value!r}")
    if isinstance(value, (int, float)):
        z = complex(value)
    elif (isinstance(value, list) and len(value) == 2
          and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)):
        z = complex(value[0], value[1])
    else:
        raise MalformedInput(f"{key}: expected a number or [re, im], got {value!r}")
    if not np.isfinite(z):
        raise MalformedInput(f"{key}: non-finite value")
    return z


def _real(value, key):
    z = _complex(value, key)
    if z.imag != 0.0:
        raise MalformedInput(f"{key}: expected a real number, got {value!r}")
    return z.real


def _particles(doc):
    if "particles" not in doc:
        raise MalformedInput("missing key 'particles'")
    p = doc["particles"]
    if isinstance(p, bool) or not isinstance(p, int) or p < 0:
        raise MalformedInput(f"particles: expected a non-negative integer, got {p!r}")
    return p


def _band(doc, key):
    if key not in doc:
        raise MalformedInput(f"missing key {key!r}")
    seq = doc[key]
    if not isinstance(seq, list):
        raise MalformedInput(f"{key}: expected a list")
    return tuple(_complex(x, f"{key}[{i}]") for i, x in enumerate(seq))


def spec_from_dict(doc) -> ModelSpec:
    if not isinstance(doc, dict):
        raise MalformedInput("model document must be a JSON object")
    kind = doc.get("type")
    if kind == "bh":
        return BoseHubbard(_particles(doc), _complex(doc.get("epsilon", 0.0), "epsilon"),
                           _complex(doc.get("v", 1.0), "v"), _complex(doc.get("c", 0.0), "c"))
    if kind == "ubh":
        if "gamma" not in doc:
            raise MalformedInput("missing key 'gamma'")
        return UnconventionalBH(_particles(doc), _real(doc["gamma"], "gamma"),
                                _real(doc.get("v", 1.0), "v"), _real(doc.get("c", 0.0), "c"))
    if kind == "nonbh5":
        if "gamma" not in doc:
            raise MalformedInput("missing key 'gamma'")
        return NonBH5(_real(doc["gamma"], "gamma"))
    if kind == "custom":
        return Custom(_band(doc, "diag"), _band(doc, "upper"), _band(doc, "lower"))
    raise UnknownVariant(f"unknown model type {kind!r}")


def parse_model_spec(text) -> ModelSpec:
    """Parse and validate a JSON model document.

    Raises
    ------
    MalformedInput
        Syntax errors, missing keys or wrongly typed values.
    InconsistentDimensions
        Custom bands whose lengths are not N, N-1, N-1.
    UnknownVariant
        ``type`` is not one of ``bh``, ``ubh``, ``nonbh5``, ``custom``.
    """
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise MalformedInput(f"invalid JSON: {exc}") from exc
    return spec_from_dict(doc)


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


def spec_to_dict(spec: ModelSpec) -> dict:
    if isinstance(spec, BoseHubbard):
        return {"type": "bh", "particles": spec.particles, "epsilon": _pair(spec.epsilon),
                "v": _pair(spec.v), "c": _pair(spec.c)}
    if isinstance(spec, UnconventionalBH):
        return {"type": "ubh", "particles": spec.particles, "gamma": spec.gamma,
                "v": spec.v, "c": spec.c}
    if isinstance(spec, NonBH5):
        return {"type": "nonbh5", "gamma": spec.gamma}
    if isinstance(spec, Custom):
        return {"type": "custom", "diag": [_pair(z) for z in spec.diag],
                "upper": [_pair(z) for z in spec.upper],
                "lower": [_pair(z) for z in spec.lower]}
    raise TypeError(f"not a model spec: {spec!r}")


def dense_mp(spec: ModelSpec, dps=40):
    """The model matrix in mpmath precision, with square roots taken in ``dps`` digits.

    Double-precision rounding of entries such as sqrt(6) unfolds a high-order
    exceptional point by ~eps**(1/order); the extended-precision matrix
    keeps it sharp.
    """
    import mpmath

    ctx = mpmath.MPContext()
    ctx.dps = dps
    if isinstance(spec, (BoseHubbard, UnconventionalBH)):
        n = spec.particles
        if isinstance(spec, UnconventionalBH):
            eps_ = ctx.mpc(0, ctx.mpf(spec.gamma))
        else:
            eps_ = ctx.mpc(spec.epsilon.real, spec.epsilon.imag)
        v = ctx.mpc(complex(spec.v).real, complex(spec.v).imag)
        c = ctx.mpc(complex(spec.c).real, complex(spec.c).imag)
        diag = [eps_ * (2 * k - n) + c / 2 * (2 * k - n) ** 2 for k in range(n + 1)]
        off = [v * ctx.sqrt((k + 1) * (n - k)) for k in range(n)]
        upper = lower = off
    elif isinstance(spec, NonBH5):
        g = ctx.mpf(spec.gamma)
        diag = [ctx.mpc(0, m * g) for m in (-4, -2, 0, 2, 4)]
        s = ctx.mpc(0, ctx.sqrt(54))
        upper = lower = [ctx.mpc(8), s, s, ctx.mpc(8)]
    elif isinstance(spec, Custom):
        diag = [ctx.mpc(z.real, z.imag) for z in spec.diag]
        upper = [ctx.mpc(z.real, z.imag) for z in spec.upper]
        lower = [ctx.mpc(z.real, z.imag) for z in spec.lower]
    else:
        raise TypeError(f"not a model spec: {spec!r}")
    size = len(diag)
    m = ctx.zeros(size, size)
    for k in range(size):
        m[k, k] = diag[k]
        if k + 1 < size:
            m[k, k + 1] = upper[k]
            m[k + 1, k] = lower[k]
    return ctx, m
