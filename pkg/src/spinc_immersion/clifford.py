"""Dense complex Clifford algebra Cl_m with e_i^2 = -1.

Blades are indexed by bitmask: bit ``i-1`` set means generator ``e_i`` is a
factor, factors in ascending order. A multivector of dimension ``m`` is a
dense vector of ``2**m`` complex coefficients.

Two layers live here. :class:`Multivector` is an immutable value type for
single elements. The ``*_array`` kernels operate on stacked coefficient
arrays of shape ``(..., 2**m)`` and are what the grid code uses.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

MAX_DIM = 16
_TABLE_DIM = 8  # full sign tables are cached up to this dimension


class DimensionMismatch(ValueError):
    pass


class NotARealVector(ValueError):
    """Raised when a multivector has non-negligible content outside real grade 1."""

    def __init__(self, residue: float, tol: float):
        super().__init__(f"not a real vector: residue {residue:.3e} exceeds tol {tol:.1e}")
        self.residue = residue
        self.tol = tol


def _check_dim(m: int) -> None:
    if not 0 <= m <= MAX_DIM:
        raise ValueError(f"Clifford dimension must be in [0, {MAX_DIM}], got {m}")


def _popcount(x: np.ndarray) -> np.ndarray:
    return np.bitwise_count(x.astype(np.uint32)).astype(np.int64)


def _sign_row(a: int, m: int) -> np.ndarray:
    """Signs of e_a * e_b for all blades b, as +-1."""
    bs = np.arange(1 << m, dtype=np.int64)
    swaps = np.zeros_like(bs)
    shifted = a >> 1
    while shifted:
        swaps += _popcount(shifted & bs)
        shifted >>= 1
    swaps += _popcount(a & bs)  # e_i e_i = -1 for every shared generator
    return np.where(swaps % 2 == 0, 1.0, -1.0)


@lru_cache(maxsize=None)
def sign_table(m: int) -> np.ndarray:
    """(2^m, 2^m) table with e_a e_b = sign_table[a, b] * e_{a^b}."""
    _check_dim(m)
    if m > _TABLE_DIM:
        raise ValueError("full sign tables are only built for m <= 8")
    table = np.array([_sign_row(a, m) for a in range(1 << m)])
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def grades(m: int) -> np.ndarray:
    g = _popcount(np.arange(1 << m))
    g.setflags(write=False)
    return g


@lru_cache(maxsize=None)
def _tau_signs(m: int) -> np.ndarray:
    k = grades(m)
    # (-1)^k from the definition, (-1)^{k(k-1)/2} from reversing the factors
    s = np.where((k + k * (k - 1) // 2) % 2 == 0, 1.0, -1.0)
    s.setflags(write=False)
    return s


def dim_of(a: np.ndarray) -> int:
    size = a.shape[-1]
    m = size.bit_length() - 1
    if size != 1 << m:
        raise ValueError(f"coefficient axis has length {size}, not a power of two")
    return m


def gp_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Geometric product of stacked coefficient arrays (broadcasting leading axes)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-1] != b.shape[-1]:
        raise DimensionMismatch(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]} coefficients")
    m = dim_of(a)
    size = 1 << m
    idx = np.arange(size)
    shape = np.broadcast_shapes(a.shape, b.shape)
    out = np.zeros(shape, dtype=np.result_type(a, b, np.complex128))
    for blade in range(size):
        coeff = a[..., blade]
        if not np.any(coeff):
            continue
        row = sign_table(m)[blade] if m <= _TABLE_DIM else _sign_row(blade, m)
        out[..., blade ^ idx] += (coeff[..., None] * row) * b
    return out


def tau_array(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    return np.conj(a) * _tau_signs(dim_of(a))


def grade_array(a: np.ndarray, k: int) -> np.ndarray:
    a = np.asarray(a)
    m = dim_of(a)
    if not 0 <= k <= m:
        raise ValueError(f"grade {k} out of range for Cl_{m}")
    return np.where(grades(m) == k, a, 0)


def vector_array(x: np.ndarray) -> np.ndarray:
    """Embed real coordinate tuples (..., m) as grade-1 coefficient arrays (..., 2^m)."""
    x = np.asarray(x, dtype=float)
    m = x.shape[-1]
    _check_dim(m)
    out = np.zeros(x.shape[:-1] + (1 << m,), dtype=np.complex128)
    out[..., 1 << np.arange(m)] = x
    return out


def vector_part(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split stacked multivectors into (real grade-1 coordinates, residue max-norm)."""
    a = np.asarray(a)
    m = dim_of(a)
    slots = 1 << np.arange(m)
    vec = a[..., slots]
    rest = a.copy()
    rest[..., slots] = 1j * vec.imag
    residue = np.max(np.abs(rest), axis=-1) if rest.shape[-1] else np.zeros(a.shape[:-1])
    return vec.real.copy(), residue


@dataclass(frozen=True, eq=False)
class Multivector:
    """Element of Cl_m as a dense coefficient vector (read-only)."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.ndim != 1:
            raise ValueError("coefficients must be one-dimensional")
        m = dim_of(c)
        _check_dim(m)
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def dim(self) -> int:
        return dim_of(self.coeffs)

    @classmethod
    def zero(cls, m: int) -> Multivector:
        _check_dim(m)
        return cls(np.zeros(1 << m))

    @classmethod
    def scalar(cls, value: complex, m: int) -> Multivector:
        c = np.zeros(1 << m, dtype=np.complex128)
        c[0] = value
        return cls(c)

    @classmethod
    def blade(cls, indices: Sequence[int], m: int, value: complex = 1.0) -> Multivector:
        """The product e_{i1} e_{i2} ... (1-based, any order) times ``value``."""
        out = cls.scalar(value, m)
        for i in indices:
            if not 1 <= i <= m:
                raise ValueError(f"generator e_{i} does not exist in Cl_{m}")
            out = out * cls.generator(i, m)
        return out

    @classmethod
    def generator(cls, i: int, m: int) -> Multivector:
        c = np.zeros(1 << m, dtype=np.complex128)
        c[1 << (i - 1)] = 1.0
        return cls(c)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return geometric_product(self, other)
        if np.isscalar(other):
            return Multivector(self.coeffs * other)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return Multivector(self.coeffs * other)
        return NotImplemented

    def __truediv__(self, other):
        if np.isscalar(other):
            return Multivector(self.coeffs / other)
        return NotImplemented

    def __add__(self, other: Multivector) -> Multivector:
        _same_dim(self, other)
        return Multivector(self.coeffs + other.coeffs)

    def __sub__(self, other: Multivector) -> Multivector:
        _same_dim(self, other)
        return Multivector(self.coeffs - other.coeffs)

    def __neg__(self) -> Multivector:
        return Multivector(-self.coeffs)

    def tau(self) -> Multivector:
        return tau(self)

    def grade(self, k: int) -> Multivector:
        return grade_project(self, k)

    @property
    def scalar_part(self) -> complex:
        return complex(self.coeffs[0])

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def allclose(self, other: Multivector, atol: float = 1e-12) -> bool:
        _same_dim(self, other)
        return bool(np.max(np.abs(self.coeffs - other.coeffs), initial=0.0) <= atol)

    def __repr__(self) -> str:
        terms = []
        for b in np.flatnonzero(np.abs(self.coeffs) > 1e-14):
            name = "".join(f"e{i + 1}" for i in range(self.dim) if b >> i & 1) or "1"
            terms.append(f"({self.coeffs[b]:.6g}){name}")
        return f"Multivector[{self.dim}](" + (" + ".join(terms) or "0") + ")"


def _same_dim(a: Multivector, b: Multivector) -> None:
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimension mismatch: Cl_{a.dim} vs Cl_{b.dim}")


def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    _same_dim(a, b)
    return Multivector(gp_array(a.coeffs, b.coeffs))


def tau(a: Multivector) -> Multivector:
    """Complex-antilinear anti-automorphism: reversal, grade sign (-1)^k, conjugation."""
    return Multivector(tau_array(a.coeffs))


def cl_inner(a: Multivector, b: Multivector) -> Multivector:
    """The Cl_m-valued pairing <<a, b>> = tau(b) a."""
    _same_dim(a, b)
    return geometric_product(tau(b), a)


def grade_project(a: Multivector, k: int) -> Multivector:
    return Multivector(grade_array(a.coeffs, k))


def embed_vector(x: Sequence[float], m: int | None = None) -> Multivector:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a flat coordinate tuple")
    if m is not None and len(x) != m:
        raise DimensionMismatch(f"vector of length {len(x)} does not fit Cl_{m}")
    return Multivector(vector_array(x))


def extract_real_vector(a: Multivector, tol: float = 1e-10) -> np.ndarray:
    if tol <= 0:
        raise ValueError("tol must be positive")
    vec, residue = vector_part(a.coeffs)
    if residue > tol:
        raise NotARealVector(float(residue), tol)
    return vec


def promote(a: Multivector, m_to: int) -> Multivector:
    """Include Cl_m into Cl_{m_to} on the first m generators."""
    _check_dim(m_to)
    if m_to < a.dim:
        raise ValueError(f"cannot promote Cl_{a.dim} into smaller Cl_{m_to}")
    c = np.zeros(1 << m_to, dtype=np.complex128)
    c[: a.coeffs.size] = a.coeffs
    return Multivector(c)


def shift_generators(a: Multivector, offset: int, m_to: int) -> Multivector:
    """Map e_s to e_{s+offset} and land in Cl_{m_to}."""
    if offset < 0 or a.dim + offset > m_to:
        raise ValueError("shifted generators do not fit the target algebra")
    _check_dim(m_to)
    c = np.zeros(1 << m_to, dtype=np.complex128)
    c[np.arange(a.coeffs.size) << offset] = a.coeffs
    return Multivector(c)
