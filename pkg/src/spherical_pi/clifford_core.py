"""Complexified Clifford algebra Cl_n(C) with e_i^2 = -1.

Blades are indexed by bitmask: bit ``i`` set means ``e_{i+1}`` is a factor.
Coefficients are stored densely as a complex vector of length ``2**n``.

Two layers are provided:

* :class:`Multivector`, a small immutable value type for exact algebra work;
* array kernels (:func:`gp_array`, :func:`conj_array`, ...) acting on stacked
  coefficient arrays of shape ``(..., 2**n)``, used by the quadrature code.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from typing import Iterable

import numpy as np

MAX_DIM = 12

__all__ = [
    "MAX_DIM",
    "Multivector",
    "blade_sign",
    "cayley_tables",
    "geometric_product",
    "vector_parts",
    "conjugate",
    "grade_project",
    "clifford_norm_sq",
    "norm",
    "vector_inverse",
    "basis_vector",
    "bivector_index",
    "grades",
    "gp_array",
    "conj_array",
    "conj_signs",
    "vectors_to_array",
    "scalar_array",
]


def _check_dim(n: int) -> None:
    if not (isinstance(n, (int, np.integer)) and 1 <= n <= MAX_DIM):
        raise ValueError(f"dimension must be an integer in [1, {MAX_DIM}], got {n!r}")


def blade_sign(a: int, b: int) -> int:
    """Sign of ``e_A e_B`` relative to ``e_{A xor B}`` for e_i^2 = -1."""
    swaps = 0
    x = a >> 1
    while x:
        swaps += bin(x & b).count("1")
        x >>= 1
    swaps += bin(a & b).count("1")  # each shared generator squares to -1
    return -1 if swaps & 1 else 1


@lru_cache(maxsize=None)
def cayley_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(index, sign)`` tables of shape ``(2**n, 2**n)``.

    ``e_A e_B = sign[A, B] * e_{index[A, B]}``.
    """
    _check_dim(n)
    m = 1 << n
    a = np.arange(m, dtype=np.int64)[:, None]
    b = np.arange(m, dtype=np.int64)[None, :]
    swaps = np.bitwise_count(a & b).astype(np.int64)
    x = a >> 1
    for _ in range(n):
        swaps = swaps + np.bitwise_count(x & b)
        x = x >> 1
    sign = np.where(swaps & 1, -1, 1).astype(np.int8)
    index = np.broadcast_to(a ^ b, (m, m)).copy()
    for arr in (sign, index):
        arr.setflags(write=False)
    return index, sign


@lru_cache(maxsize=None)
def grades(n: int) -> np.ndarray:
    """Grade (popcount) of every blade index."""
    _check_dim(n)
    g = np.bitwise_count(np.arange(1 << n, dtype=np.int64)).astype(np.int64)
    g.setflags(write=False)
    return g


@lru_cache(maxsize=None)
def conj_signs(n: int) -> np.ndarray:
    """Signs ``(-1)^{k(k+1)/2}`` of the Clifford conjugate per blade."""
    k = grades(n)
    s = np.where(((k * (k + 1)) // 2) % 2 == 1, -1.0, 1.0)
    s.setflags(write=False)
    return s


@lru_cache(maxsize=None)
def _product_terms(n: int) -> tuple[np.ndarray, ...]:
    # Nonzero (i, j, k, sign) lists for the array product; small n only.
    index, sign = cayley_tables(n)
    m = 1 << n
    i, j = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    return i.ravel(), j.ravel(), index.ravel(), sign.ravel().astype(float)


def gp_array(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """Geometric product of stacked multivectors with broadcasting.

    Parameters
    ----------
    a, b : ndarray
        Coefficient arrays of shape ``(..., 2**n)``.
    n : int
        Ambient dimension.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    m = 1 << n
    if a.shape[-1] != m or b.shape[-1] != m:
        raise ValueError("last axis must have length 2**n")
    index, sign = cayley_tables(n)
    shape = np.broadcast_shapes(a.shape, b.shape)
    out = np.zeros(shape, dtype=np.result_type(a, b, complex))
    # Loop over the left blade; each row is a signed permutation of b.
    for i in range(m):
        ai = a[..., i : i + 1]
        if not np.any(ai):
            continue
        out[..., index[i]] += ai * (sign[i] * b)
    return out


def conj_array(a: np.ndarray, n: int) -> np.ndarray:
    """Complexified Clifford conjugate of stacked multivectors."""
    return np.conj(a) * conj_signs(n)


def vectors_to_array(x: np.ndarray) -> np.ndarray:
    """Embed real vectors of shape ``(..., n)`` as grade-1 coefficient arrays."""
    x = np.asarray(x)
    n = x.shape[-1]
    out = np.zeros(x.shape[:-1] + (1 << n,), dtype=complex)
    for i in range(n):
        out[..., 1 << i] = x[..., i]
    return out


def scalar_array(c: np.ndarray, n: int) -> np.ndarray:
    """Embed scalars of any shape as grade-0 coefficient arrays."""
    c = np.asarray(c, dtype=complex)
    out = np.zeros(c.shape + (1 << n,), dtype=complex)
    out[..., 0] = c
    return out


def bivector_index(i: int, j: int) -> int:
    """Bitmask of ``e_{ij}`` for zero-based generator indices ``i < j``."""
    if i == j:
        raise ValueError("bivector needs distinct indices")
    return (1 << i) | (1 << j)


class Multivector:
    """Element of Cl_n(C) with dense complex coefficients.

    Instances are treated as immutable values.
    """

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: Iterable[complex] | dict[int, complex] | None = None):
        _check_dim(n)
        m = 1 << n
        arr = np.zeros(m, dtype=complex)
        if isinstance(coeffs, dict):
            for k, v in coeffs.items():
                if not 0 <= int(k) < m:
                    raise ValueError(f"blade bitmask {k} out of range for n={n}")
                arr[int(k)] = v
        elif coeffs is not None:
            c = np.asarray(coeffs, dtype=complex).ravel()
            if c.shape != (m,):
                raise ValueError(f"expected {m} coefficients, got {c.shape[0]}")
            arr[:] = c
        arr.setflags(write=False)
        self.n = int(n)
        self.coeffs = arr

    # construction helpers
    @classmethod
    def scalar(cls, n: int, c: complex) -> "Multivector":
        return cls(n, {0: c})

    @classmethod
    def vector(cls, x: Iterable[complex]) -> "Multivector":
        x = list(x)
        return cls(len(x), {1 << i: v for i, v in enumerate(x)})

    @classmethod
    def blade(cls, n: int, mask: int, c: complex = 1.0) -> "Multivector":
        return cls(n, {mask: c})

    def _same(self, other: "Multivector") -> None:
        if not isinstance(other, Multivector):
            raise TypeError("expected a Multivector")
        if other.n != self.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def _lift(self, other) -> "Multivector":
        if isinstance(other, Multivector):
            self._same(other)
            return other
        if np.isscalar(other):
            return Multivector.scalar(self.n, other)
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return Multivector(self.n, self.coeffs + o.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return Multivector(self.n, self.coeffs - o.coeffs)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return Multivector(self.n, o.coeffs - self.coeffs)

    def __neg__(self):
        return Multivector(self.n, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return geometric_product(self, other)
        if np.isscalar(other):
            return Multivector(self.n, self.coeffs * other)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return Multivector(self.n, self.coeffs * other)
        return NotImplemented

    def __truediv__(self, other):
        if np.isscalar(other):
            return Multivector(self.n, self.coeffs / other)
        return NotImplemented

    def __getitem__(self, mask: int) -> complex:
        return complex(self.coeffs[mask])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Multivector):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash((self.n, self.coeffs.tobytes()))

    def allclose(self, other: "Multivector", atol: float = 1e-12, rtol: float = 0.0) -> bool:
        self._same(other)
        return bool(np.allclose(self.coeffs, other.coeffs, atol=atol, rtol=rtol))

    def support(self) -> dict[int, complex]:
        """Nonzero coefficients keyed by blade bitmask."""
        return {int(k): complex(self.coeffs[k]) for k in np.flatnonzero(self.coeffs)}

    def __repr__(self) -> str:
        terms = []
        for k, v in self.support().items():
            name = "1" if k == 0 else "e" + "".join(str(i + 1) for i in range(self.n) if k >> i & 1)
            terms.append(f"({v:.6g}){name}")
        return f"Multivector(n={self.n}, " + (" + ".join(terms) or "0") + ")"


def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    """Clifford product ``ab`` with e_i^2 = -1.

    Examples
    --------
    >>> e1, e2 = Multivector.blade(2, 1), Multivector.blade(2, 2)
    >>> geometric_product(e1, e1)[0]
    (-1+0j)
    """
    a._same(b)
    index, sign = cayley_tables(a.n)
    ia = np.flatnonzero(a.coeffs)
    ib = np.flatnonzero(b.coeffs)
    out = np.zeros(1 << a.n, dtype=complex)
    if ia.size and ib.size:
        vals = np.outer(a.coeffs[ia], b.coeffs[ib]) * sign[np.ix_(ia, ib)]
        np.add.at(out, index[np.ix_(ia, ib)].ravel(), vals.ravel())
    return Multivector(a.n, out)


def _require_vector(x: Multivector, name: str = "x") -> None:
    if not isinstance(x, Multivector):
        raise TypeError(f"{name} must be a Multivector")
    if np.any(x.coeffs[grades(x.n) != 1]):
        raise TypeError(f"{name} must be a pure grade-1 multivector")


def vector_parts(x: Multivector, y: Multivector) -> tuple[complex, Multivector]:
    """Split the product of two vectors into scalar and bivector parts.

    Returns ``(-sum x_i y_i, x ^ y)`` so that ``xy = scalar + bivector``.
    """
    _require_vector(x, "x")
    _require_vector(y, "y")
    x._same(y)
    xv = x.coeffs[[1 << i for i in range(x.n)]]
    yv = y.coeffs[[1 << i for i in range(y.n)]]
    s = -complex(np.sum(xv * yv))
    biv = {}
    for i, j in combinations(range(x.n), 2):
        biv[bivector_index(i, j)] = xv[i] * yv[j] - xv[j] * yv[i]
    return s, Multivector(x.n, biv)


def conjugate(a: Multivector) -> Multivector:
    """Complexified Clifford conjugate (reversal, vector negation, complex conjugation)."""
    return Multivector(a.n, conj_array(a.coeffs, a.n))


def grade_project(a: Multivector, k: int) -> Multivector:
    """Part of ``a`` of grade ``k``."""
    if not 0 <= k <= a.n:
        raise ValueError(f"grade {k} out of range for n={a.n}")
    return Multivector(a.n, np.where(grades(a.n) == k, a.coeffs, 0))


def clifford_norm_sq(a: Multivector) -> complex:
    """Scalar part of ``a * conjugate(a)``.

    Computed directly as ``sum |a_A|^2`` paired with the blade signs; this
    equals ``[a conj(a)]_0`` since only ``A = B`` pairs reach grade 0.
    """
    index, sign = cayley_tables(a.n)
    diag = sign[np.arange(1 << a.n), np.arange(1 << a.n)] * conj_signs(a.n)
    return complex(np.sum(a.coeffs * np.conj(a.coeffs) * diag))


def norm(a: Multivector) -> float:
    """Square root of the real part of :func:`clifford_norm_sq`."""
    q = clifford_norm_sq(a)
    if q.real < -1e-12 * max(1.0, abs(q)):
        raise ValueError("Clifford norm square has negative real part")
    return float(np.sqrt(max(q.real, 0.0)))


def vector_inverse(x: Multivector) -> Multivector:
    """Inverse ``-x / |x|^2`` of a nonzero real vector."""
    _require_vector(x)
    if np.any(np.abs(x.coeffs.imag) > 0):
        raise TypeError("vector_inverse needs real coefficients")
    q = clifford_norm_sq(x).real
    if q <= 0:
        raise ZeroDivisionError("zero vector has no inverse")
    return Multivector(x.n, -x.coeffs / q)


def basis_vector(n: int, i: int) -> Multivector:
    """Generator ``e_{i+1}`` (zero-based ``i``)."""
    if not 0 <= i < n:
        raise ValueError("generator index out of range")
    return Multivector.blade(n, 1 << i)
