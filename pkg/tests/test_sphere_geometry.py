import numpy as np
import pytest

from spherical_pi.sphere_geometry import (AnalyticField, SampledField, SpherePoint, build_cap,
                                          build_global, bump_field, geodesic_distance, integrate,
                                          rotational_difference, spherical_to_cartesian, trace)


def _const(c=1.0):
    v = np.zeros(8, complex)
    v[0] = c
    return AnalyticField.constant(3, v)


def test_cap_weights_sum_to_area():
    th = np.pi / 3
    dom = build_cap(th, 16, 32)
    assert dom.weights.sum() == pytest.approx(2 * np.pi * (1 - np.cos(th)), rel=1e-10)
    assert dom.boundary_weights.sum() == pytest.approx(2 * np.pi * np.sin(th), rel=1e-12)
    assert dom.boundary_nodes.shape[0] == 32


def test_conormals_are_tangent_and_outward():
    dom = build_cap(1.0, 8, 16)
    radial = np.einsum("ij,ij->i", dom.conormals, dom.boundary_nodes)
    assert np.allclose(radial, 0, atol=1e-15)
    assert np.allclose(np.linalg.norm(dom.conormals, axis=1), 1)
    # moving along the conormal increases the colatitude
    assert np.all(dom.conormals[:, 2] < 0)


def test_global_rule():
    dom = build_global(16, 32)
    assert dom.weights.sum() == pytest.approx(4 * np.pi, rel=1e-10)
    assert dom.boundary_nodes.shape == (0, 3)
    assert abs(dom.weights @ dom.nodes[:, 0]) <= 1e-12
    assert dom.weights @ dom.nodes[:, 0] ** 2 == pytest.approx(4 * np.pi / 3, rel=1e-12)


def test_integrate_constant_and_linearity():
    dom = build_global(8, 16)
    one = SampledField.from_field(_const(), dom)
    assert integrate(dom, one).coeffs[0] == pytest.approx(4 * np.pi)
    two = one + one.scale(2.0)
    assert integrate(dom, two).coeffs[0] == pytest.approx(12 * np.pi)


def test_invalid_domains():
    with pytest.raises(ValueError):
        build_cap(0.0, 8, 16)
    with pytest.raises(ValueError):
        build_cap(1.0, 1, 16)


def test_sphere_point_normalizes():
    p = SpherePoint.from_angles(0.4, 1.2)
    assert np.linalg.norm(p.coords) == pytest.approx(1)
    with pytest.raises(ValueError):
        SpherePoint(np.array([0.0, 0.0, 2.0]))


def test_geodesic_distance():
    a = spherical_to_cartesian(0.0, 0.0)
    b = spherical_to_cartesian(np.pi / 2, 0.0)
    assert geodesic_distance(a, b) == pytest.approx(np.pi / 2)


def test_trace():
    dom = build_cap(np.pi / 3, 8, 16)
    assert np.allclose(trace(_const(2.0), dom)[:, 0], 2.0)
    b = bump_field(dom, spherical_to_cartesian(0.25, 1.0), 0.75)
    assert np.all(trace(b, dom) == 0)
    assert trace(_const(), build_global(4, 8)).shape == (0, 8)


def test_bump_values_and_support():
    dom = build_cap(np.pi / 3, 8, 16)
    c = spherical_to_cartesian(0.3, 2.0)
    for profile in ("exp", "poly"):
        b = bump_field(dom, c, 0.5, profile=profile, order=4)
        assert b.values(c[None])[0, 0] == pytest.approx(1)
        far = spherical_to_cartesian(0.3 + 0.6, 2.0)[None]
        assert np.all(b.values(far) == 0) and np.all(b.grad(far) == 0)
    with pytest.raises(ValueError):
        bump_field(dom, spherical_to_cartesian(0.9, 0.0), 0.3)


@pytest.mark.parametrize("profile", ["exp", "poly"])
def test_bump_derivatives_match_differences(profile, rng):
    dom = build_cap(np.pi / 3, 8, 16)
    coeff = np.zeros(8, complex)
    coeff[0], coeff[3] = 1.0, 0.5j
    b = bump_field(dom, spherical_to_cartesian(0.3, 2.0), 0.6, coeff, profile, 4)
    P = spherical_to_cartesian(rng.uniform(0.05, 0.8, 6), rng.uniform(1.2, 2.8, 6))
    h = 1e-5
    for i in range(3):
        d = np.zeros(3)
        d[i] = h
        fd = (b.values(P + d) - b.values(P - d)) / (2 * h)
        assert np.abs(fd - b.grad(P)[:, i]).max() <= 1e-6
        fd2 = (b.grad(P + d) - b.grad(P - d)) / (2 * h)
        assert np.abs(fd2 - b.hess(P)[:, i]).max() <= 1e-5


def test_rotational_difference_matches_exact_rot(rng):
    from spherical_pi.testfields import smooth_field
    f = smooth_field()
    P = spherical_to_cartesian(rng.uniform(0.2, 2.5, 5), rng.uniform(0, 6, 5))
    assert np.abs(rotational_difference(f.values, P) - f.rot(P)).max() <= 1e-9


def test_sampled_field_interpolates_smooth_data(rng):
    from spherical_pi.testfields import smooth_field
    dom = build_cap(np.pi / 3, 16, 32)
    f = smooth_field()
    s = SampledField.from_field(f, dom)
    P = spherical_to_cartesian(rng.uniform(0.1, 0.9, 5), rng.uniform(0, 6, 5))
    assert np.abs(s.values(P) - f.values(P)).max() <= 1e-9
    assert np.abs(s.rot(P) - f.rot(P)).max() <= 1e-7
    assert np.allclose(s.boundary_values, f.values(dom.boundary_nodes))
