import numpy as np
import pytest

from oracles import degree2_monogenics, linear_monogenic, polynomial_field
from spherical_pi.sphere_geometry import AnalyticField, build_cap, spherical_to_cartesian
from spherical_pi.spherical_operators import (gamma_alpha, gamma_alpha_bar, gamma_alpha_field,
                                              gamma_alpha_values, gamma_omega, gamma_omega_values,
                                              is_monogenic, spherical_laplacian_factored)
from spherical_pi.testfields import smooth_field


def random_points(rng, m):
    P = rng.normal(size=(m, 3))
    return P / np.linalg.norm(P, axis=1)[:, None]


def test_constant_field():
    c = np.zeros(8, complex)
    c[0] = 1.0
    one = AnalyticField.constant(3, c)
    w = spherical_to_cartesian(0.4, 0.3)
    assert gamma_omega(one, w).allclose(0 * gamma_omega(one, w))
    assert gamma_alpha(one, w, 0.3 + 0.1j).coeffs[0] == pytest.approx(0.3 + 0.1j)
    assert gamma_alpha_bar(one, w, 0.3 + 0.1j).coeffs[0] == pytest.approx(0.3 - 0.1j)
    beta = -3 + 1 - 0.4
    assert spherical_laplacian_factored(one, w, 0.4).coeffs[0] == pytest.approx(0.4 * beta)


def test_eigenrelation_degree_one(rng):
    f = linear_monogenic()
    P = random_points(rng, 100)
    assert np.abs(gamma_omega_values(f, P) + f.values(P)).max() <= 1e-12
    assert np.abs(gamma_alpha_values(f, P, 1.0)).max() <= 1e-12


def test_gamma_bar_and_laplacian_on_eigenfunction():
    f = linear_monogenic()
    w = spherical_to_cartesian(0.7, 2.2)
    a = 0.3
    fw = f.value(w)
    assert gamma_alpha_bar(f, w, a).allclose((1 + a) * fw)
    beta = -2 - a
    assert spherical_laplacian_factored(f, w, a).allclose((-1 + a) * (-1 + beta) * fw)


def test_degree_two_monogenics_have_eigenvalue_minus_two(rng):
    N = degree2_monogenics()
    assert N.shape[1] > 0
    P = random_points(rng, 50)
    for c in list(N.T[:4]) + [N @ rng.normal(size=N.shape[1])]:
        f = polynomial_field(c)
        scale = np.abs(f.values(P)).max()
        assert np.abs(gamma_omega_values(f, P) + 2 * f.values(P)).max() <= 1e-10 * scale


def test_linearity(rng):
    f, g = smooth_field(), linear_monogenic()
    P = random_points(rng, 10)
    c = 0.7 - 0.2j
    h = f.scale(c) + g
    assert np.allclose(gamma_omega_values(h, P),
                       c * gamma_omega_values(f, P) + gamma_omega_values(g, P), atol=1e-13)


def test_factors_of_the_laplacian_commute(rng):
    f = smooth_field()
    a, b = 0.5, -2.5
    for w in random_points(rng, 5):
        ab = gamma_alpha(gamma_alpha_field(f, b), w, a)
        ba = gamma_alpha(gamma_alpha_field(f, a), w, b)
        assert ab.allclose(ba, atol=1e-9)


def test_is_monogenic():
    dom = build_cap(np.pi / 3, 8, 16)
    assert is_monogenic(linear_monogenic(), dom, 1.0)[0]
    c = np.zeros(8, complex)
    c[0] = 1.0
    assert not is_monogenic(AnalyticField.constant(3, c), dom, 0.5)[0]
    assert is_monogenic(AnalyticField.zero(3), dom, 0.5) == (True, 0.0)
