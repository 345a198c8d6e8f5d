"""Independent reference constructions shared by several test modules."""
import numpy as np
from scipy.linalg import null_space

from spherical_pi.clifford_core import gp_array
from spherical_pi.sphere_geometry import AnalyticField


def linear_monogenic() -> AnalyticField:
    """``w1 e1 - w2 e2`` with exact first and second partials."""
    def val(P):
        o = np.zeros((len(P), 8), complex)
        o[:, 1], o[:, 2] = P[:, 0], -P[:, 1]
        return o

    def grad(P):
        o = np.zeros((len(P), 3, 8), complex)
        o[:, 0, 1], o[:, 1, 2] = 1.0, -1.0
        return o

    return AnalyticField(3, val, grad, lambda P: np.zeros((len(P), 3, 3, 8), complex))


MONOMIALS = [(2, 0, 0), (0, 2, 0), (0, 0, 2), (1, 1, 0), (1, 0, 1), (0, 1, 1)]
LINEAR = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]


def degree2_monogenics() -> np.ndarray:
    """Null space of ``D = sum e_i d_i`` on quadratic Cl_3-valued polynomials.

    Columns are coefficient vectors indexed ``(monomial, blade)``.
    """
    E = np.eye(8)
    gens = [E[1], E[2], E[4]]
    M = np.zeros((3 * 8, 6 * 8))
    for mi, m in enumerate(MONOMIALS):
        for A in range(8):
            for i in range(3):
                if m[i] == 0:
                    continue
                d = list(m)
                d[i] -= 1
                row = LINEAR.index(tuple(d))
                M[row * 8:(row + 1) * 8, mi * 8 + A] += m[i] * gp_array(gens[i], E[A], 3).real
    return null_space(M)


def polynomial_field(c: np.ndarray) -> AnalyticField:
    c = c.reshape(6, 8)

    def val(P):
        return sum(np.prod(P ** np.array(m), axis=1)[:, None] * c[k]
                   for k, m in enumerate(MONOMIALS)).astype(complex)

    def grad(P):
        out = np.zeros((len(P), 3, 8), complex)
        for k, m in enumerate(MONOMIALS):
            for i in range(3):
                if m[i]:
                    d = np.array(m)
                    d[i] -= 1
                    out[:, i] += m[i] * np.prod(P ** d, axis=1)[:, None] * c[k]
        return out

    return AnalyticField(3, val, grad)
