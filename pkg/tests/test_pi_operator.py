import warnings

import numpy as np
import pytest

from spherical_pi import pi_operator as po
from spherical_pi.clifford_core import conjugate
from spherical_pi.integral_transforms import TransformConfig, gamma_teodorescu, teodorescu_bar
from spherical_pi.pi_operator import (HARD_FLOOR, IdentityReport, NodalPi, bergman_generators,
                                      bergman_project, inner_product, l2_norm, pi_adjoint_apply,
                                      pi_apply, pi_bar_apply, pythagoras_check, sample_points,
                                      verify_pi_identities)
from spherical_pi.sphere_geometry import SampledField, build_cap
from spherical_pi.special_functions import KernelConfig
from spherical_pi.testfields import bump, partner_bump, scalar_field, smooth_field

TH = np.pi / 3
V = sample_points(TH, 6)


@pytest.fixture(scope="module")
def dom():
    return build_cap(TH, 12, 24)


def blade_field(dom, mask, phi):
    out = np.zeros((dom.size, 8), complex)
    out[:, mask] = phi
    return SampledField(dom, out)


def random_field(dom, rng):
    return SampledField(dom, rng.normal(size=(dom.size, 8)) + 1j * rng.normal(size=(dom.size, 8)))


def test_inner_product_properties(dom, rng):
    phi = np.cos(dom.nodes[:, 0])
    f1, f2 = blade_field(dom, 1, phi), blade_field(dom, 2, phi)
    assert abs(inner_product(dom, f1, f2).coeffs[0]) <= 1e-14
    real = SampledField(dom, rng.normal(size=(dom.size, 8)).astype(complex))
    s = inner_product(dom, real, real).coeffs[0]
    assert s.real > 0 and abs(s.imag) <= 1e-12
    f, g = random_field(dom, rng), random_field(dom, rng)
    assert conjugate(inner_product(dom, f, g)).allclose(inner_product(dom, g, f), atol=1e-10)


def test_norm(dom, rng):
    f = random_field(dom, rng)
    assert l2_norm(dom, scalar_field(0.0)) == 0
    assert l2_norm(dom, f.scale(2 - 1j)) == pytest.approx(abs(2 - 1j) * l2_norm(dom, f))
    direct = np.sqrt(np.sum(dom.weights * np.sum(np.abs(f.nodal) ** 2, axis=1)))
    assert l2_norm(dom, f) == pytest.approx(direct, rel=1e-13)


def test_inner_product_checks_domain(dom):
    other = build_cap(TH, 8, 16)
    with pytest.raises(ValueError):
        inner_product(dom, SampledField.from_field(smooth_field(), other), smooth_field())


def test_pi_is_gamma_bar_of_teodorescu(dom):
    cfg = TransformConfig()
    f = smooth_field()
    assert np.allclose(pi_apply(dom, f, 0.5, V, cfg),
                       gamma_teodorescu(dom, f, 0.5, V, cfg, which="alpha_bar"))
    assert not np.any(pi_apply(dom, scalar_field(0.0), 0.5, V, cfg))
    assert not np.any(pi_bar_apply(dom, scalar_field(0.0), 0.5, V, cfg))


def test_adjoint_of_constant(dom):
    cfg = TransformConfig()
    a = 0.3 + 0.2j
    c = scalar_field(1.5)
    assert np.allclose(pi_adjoint_apply(dom, c, a, V, cfg),
                       teodorescu_bar(dom, scalar_field(1.5 * a), a, V, cfg), atol=1e-13)


def test_pi_is_minus_identity_at_imaginary_order():
    # Gamma_alpha T = I in the interior gives pi = -I + 2 Re(alpha) T
    cfg = TransformConfig(kernel=KernelConfig(alpha=0.5j))
    res = []
    for nt in (12, 16, 24):
        d = build_cap(TH, nt, 2 * nt)
        b = bump(d)
        res.append(np.abs(pi_apply(d, b, 0.5j, V, cfg) + b.values(V)).max())
    assert res[-1] < 0.5 * res[0]


def test_nodal_pi_forms_converge_together():
    cfg = TransformConfig()
    gaps = []
    for nt in (12, 16):
        d = build_cap(TH, nt, 2 * nt)
        f = SampledField.from_field(bump(d), d)
        a = NodalPi(d, 0.5, cfg).apply(f).nodal
        b = NodalPi(d, 0.5, cfg, form="right_inverse").apply(f).nodal
        gaps.append(l2_norm(d, a - b) / l2_norm(d, f))
    assert gaps[1] < 0.8 * gaps[0]


@pytest.fixture(scope="module")
def projection(dom):
    f = SampledField.from_field(smooth_field(), dom)
    # nonzero Fourier modes contribute 4 independent generators each
    G = bergman_generators(dom, 0.5, 40, TransformConfig())
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        Pf, Qf = bergman_project(dom, 0.5, f, 40, TransformConfig(), generators=G)
    return f, G, Pf, Qf


def test_projection_decomposes(dom, projection):
    f, G, Pf, Qf = projection
    assert np.abs(Pf.nodal + Qf.nodal - f.nodal).max() <= 1e-15
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        PPf, _ = bergman_project(dom, 0.5, Pf, 40, TransformConfig(), generators=G)
    assert l2_norm(dom, PPf.nodal - Pf.nodal) <= 1e-10 * l2_norm(dom, f)
    assert abs(inner_product(dom, Pf, Qf).coeffs[0]) <= 1e-10
    lhs = inner_product(dom, Pf, f).coeffs[0]
    rhs = inner_product(dom, Pf, Pf).coeffs[0]
    assert abs(lhs - rhs) <= 1e-10


def test_projection_fixes_its_range(dom, projection):
    _, G, _, _ = projection
    g = SampledField(dom, 0.3 * G[0] - 0.7j * G[13])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        Pg, Qg = bergman_project(dom, 0.5, g, 40, TransformConfig(), generators=G)
    assert np.abs(Qg.nodal).max() <= 1e-10
    assert np.allclose(Pg.nodal, g.nodal, atol=1e-10)


def test_projection_rank(dom, projection):
    f, G, _, _ = projection
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        bergman_project(dom, 0.5, f, 8, TransformConfig(), generators=G[:8])
    with pytest.warns(RuntimeWarning, match="using 24 of 40"):
        bergman_project(dom, 0.5, f, 40, TransformConfig(), generators=G)


@pytest.mark.parametrize("n_exp", [1, 2, 5])
def test_pythagoras(dom, projection, n_exp):
    _, _, Pf, Qf = projection
    assert pythagoras_check(dom, Pf, Qf, n_exp).residual <= 1e-9
    zero = SampledField(dom, np.zeros_like(Pf.nodal))
    assert pythagoras_check(dom, Pf, zero, n_exp).residual <= 1e-14


def test_pythagoras_rejects_non_orthogonal(dom, projection):
    f, _, Pf, _ = projection
    with pytest.raises(ValueError):
        pythagoras_check(dom, Pf, f, 2)


def test_identity_report_verdict():
    r = IdentityReport("x", "f", [(0.1, 0.2), (0.4, 1.0), (0.2, 0.6)])
    assert [h for h, _ in r.ladder] == [0.4, 0.2, 0.1]
    assert r.verdict and r.ok and r.residual == 0.2
    assert not IdentityReport("x", "f", [(0.4, 1.0), (0.1, 0.6)]).verdict
    assert IdentityReport("x", "f", [(0.4, 1e-9), (0.1, 5e-9)]).verdict
    assert 5e-9 < HARD_FLOOR
    control = IdentityReport("x", "f", [(0.4, 1.0), (0.1, 0.9)], kind="control")
    assert control.ok and not control.verdict
    assert not IdentityReport("x", "f", [(0.4, 1.0), (0.1, float("nan"))]).verdict
    assert not IdentityReport("x", "f").verdict


def test_suite_needs_three_levels():
    with pytest.raises(ValueError):
        verify_pi_identities(TH, 0.5, {}, [(8, 16), (12, 24)], TransformConfig())


def test_suite_on_zero_field():
    reports = verify_pi_identities(TH, 0.5, {"zero": (lambda d: scalar_field(0.0), False)},
                                   [(6, 12), (8, 16), (10, 20)], TransformConfig(), sample=V[:3],
                                   identities=["gamma_pi_eq_gamma_bar", "right_inverse",
                                               "borel_pompeiu", "pi_gamma_eq_gamma_bar_I_minus_F"])
    assert len(reports) == 4
    for r in reports:
        assert all(res == 0 for _, res in r.ladder)
        assert r.verdict


def test_suite_isolates_failing_identity(monkeypatch):
    def broken(level):
        raise ArithmeticError("boom")

    good = next(i for i in po.IDENTITIES if i.name == "right_inverse")
    bad = po._Identity("broken", broken)
    monkeypatch.setattr(po, "IDENTITIES", (bad, good))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        reports = verify_pi_identities(TH, 0.5, {"bump": (bump, True)},
                                       [(8, 16), (10, 20), (12, 24)], TransformConfig(),
                                       sample=V[:3])
    by = {r.name: r for r in reports}
    assert all(np.isnan(res) for _, res in by["broken"].ladder)
    assert all(np.isfinite(res) for _, res in by["right_inverse"].ladder)


def test_partner_field_available_for_adjoint():
    reports = verify_pi_identities(TH, 0.5, {"bump": (bump, True)}, [(8, 16), (10, 20), (12, 24)],
                                   TransformConfig(), sample=V[:3], partner=partner_bump,
                                   identities=["adjoint"])
    assert [r.name for r in reports] == ["adjoint"]
    assert all(np.isfinite(res) for _, res in reports[0].ladder)
