import numpy as np
import pytest
from hypothesis import given, strategies as st

from spherical_pi.clifford_core import (Multivector, basis_vector, bivector_index, blade_sign,
                                        clifford_norm_sq, conj_array, conjugate, geometric_product,
                                        gp_array, grade_project, norm, vector_inverse, vector_parts)

E1, E2, E3 = (basis_vector(3, i) for i in range(3))
E12 = Multivector.blade(3, 0b011)
E13 = Multivector.blade(3, 0b101)
E23 = Multivector.blade(3, 0b110)

cplx = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)
mv3 = st.lists(cplx, min_size=8, max_size=8).map(lambda c: Multivector(3, c))


def test_generators_square_to_minus_one():
    for e in (E1, E2, E3):
        assert (e * e).allclose(Multivector.scalar(3, -1))


def test_product_of_distinct_generators():
    assert (E1 * E2).allclose(E12)
    assert (E2 * E1).allclose(-1 * E12)
    assert (E1 * E2 * E3).allclose(Multivector.blade(3, 0b111))


def test_vector_product_example():
    x = Multivector.vector([1, 2, 0])
    y = Multivector.vector([3, 0, 1])
    expected = -3 - 6 * E12 + E13 + 2 * E23
    assert geometric_product(x, y).allclose(expected)


def test_vector_parts_split_dot_and_wedge():
    x = Multivector.vector([1, 2, 0])
    y = Multivector.vector([3, 0, 1])
    dot, wedge = vector_parts(x, y)
    assert dot == pytest.approx(-3)
    assert wedge.allclose(-6 * E12 + E13 + 2 * E23)


def test_conjugation_on_basis():
    assert conjugate(E1).allclose(-1 * E1)
    assert conjugate(E12).allclose(-1 * E12)
    assert conjugate(Multivector.blade(3, 0b111)).allclose(Multivector.blade(3, 0b111))
    assert conjugate(Multivector.scalar(3, 2 + 3j)).allclose(Multivector.scalar(3, 2 - 3j))


def test_norm_of_vector():
    v = Multivector.vector([3, 4, 0])
    assert clifford_norm_sq(v) == pytest.approx(25)
    assert norm(v) == pytest.approx(5)


def test_vector_inverse():
    v = Multivector.vector([3, 4, 0])
    assert (v * vector_inverse(v)).allclose(Multivector.scalar(3, 1))
    assert (vector_inverse(v) * v).allclose(Multivector.scalar(3, 1))
    assert vector_inverse(E1).allclose(-1 * E1)
    with pytest.raises(ZeroDivisionError):
        vector_inverse(Multivector.vector([0, 0, 0]))


def test_vector_inverse_rejects_non_vectors():
    with pytest.raises(TypeError):
        vector_inverse(E12)


def test_bivector_index_is_symmetric():
    assert bivector_index(0, 1) == 3
    assert bivector_index(2, 0) == 5
    assert bivector_index(1, 2) == 6


def test_blade_sign_anticommutes():
    assert blade_sign(0b001, 0b010) == 1
    assert blade_sign(0b010, 0b001) == -1


def test_grade_projection_splits():
    a = Multivector(3, np.arange(8) + 1.0)
    total = sum((grade_project(a, k) for k in range(4)), Multivector(3))
    assert total.allclose(a)
    assert set(grade_project(a, 2).support()) == {3, 5, 6}


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        Multivector(3) + Multivector(2)


def test_gp_array_matches_object_product(rng):
    a = rng.normal(size=(5, 8)) + 1j * rng.normal(size=(5, 8))
    b = rng.normal(size=(5, 8)) + 1j * rng.normal(size=(5, 8))
    ref = np.stack([geometric_product(Multivector(3, x), Multivector(3, y)).coeffs
                    for x, y in zip(a, b)])
    assert np.allclose(gp_array(a, b, 3), ref, atol=1e-13)
    assert np.allclose(conj_array(a, 3)[0], conjugate(Multivector(3, a[0])).coeffs)


@given(mv3, mv3, mv3)
def test_associativity(a, b, c):
    lhs, rhs = (a * b) * c, a * (b * c)
    assert lhs.allclose(rhs, atol=1e-9 * (1 + norm(lhs)))


@given(mv3, mv3)
def test_conjugation_reverses_products(a, b):
    lhs = conjugate(a * b)
    assert lhs.allclose(conjugate(b) * conjugate(a), atol=1e-9 * (1 + norm(lhs)))


@given(mv3)
def test_conjugation_is_an_involution(a):
    assert conjugate(conjugate(a)).allclose(a)


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3),
       st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_vectors_anticommute_up_to_dot(x, y):
    X, Y = Multivector.vector(x), Multivector.vector(y)
    dot = float(np.dot(x, y))
    assert (X * Y + Y * X).allclose(Multivector.scalar(3, -2 * dot), atol=1e-10)
