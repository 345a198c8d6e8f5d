from dataclasses import replace

import numpy as np
import pytest

from spherical_pi.integral_transforms import TransformConfig, point_monogenic
from spherical_pi.pi_operator import NodalPi, l2_norm, sample_points
from spherical_pi.solvers import (BeltramiConfig, BeltramiDivergenceError, SolveTrace,
                                  solve_beltrami, solve_bvp)
from spherical_pi.special_functions import KernelConfig
from spherical_pi.sphere_geometry import build_cap, build_global, spherical_to_cartesian
from spherical_pi.spherical_operators import gamma_alpha_field
from spherical_pi.testfields import bump, scalar_field

TH = np.pi / 3
V = sample_points(TH, 10)


def seed_monogenic(alpha, cfg):
    c = np.zeros(8, complex)
    c[0], c[3] = 1.0, 0.4j
    return point_monogenic(spherical_to_cartesian(0.5 * (TH + np.pi), 0.4), c, alpha, cfg)


def rel(a, b):
    return float(np.max(np.linalg.norm(a - b, axis=1) / (1 + np.linalg.norm(b, axis=1))))


@pytest.fixture(scope="module")
def setup():
    cfg = TransformConfig()
    dom = build_cap(TH, 12, 24)
    pi = NodalPi(dom, 0.5, replace(cfg, taylor_order=0), form="right_inverse")
    return dom, cfg, pi, seed_monogenic(0.5, cfg)


def test_bvp_reproduces_monogenic_from_its_trace():
    cfg = TransformConfig()
    phi = seed_monogenic(0.5, cfg)
    errs = []
    for nt in (12, 16, 24):
        dom = build_cap(TH, nt, 2 * nt)
        f, res = solve_bvp(dom, scalar_field(0.0), phi, 0.5, cfg, samples=V)
        errs.append(rel(f.values(V), phi.values(V)))
        assert res["equation"] <= 1e-10
    assert errs[-1] < errs[0] and errs[-1] < 1e-3


def test_bvp_recovers_bump_from_its_equation():
    cfg = TransformConfig()
    errs = []
    for nt in (12, 16, 24):
        dom = build_cap(TH, nt, 2 * nt)
        b = bump(dom)
        f, res = solve_bvp(dom, gamma_alpha_field(b, 0.5), scalar_field(0.0), 0.5, cfg, samples=V)
        errs.append(rel(f.values(V), b.values(V)))
    assert errs[2] < errs[1] < errs[0]


def test_bvp_zero_data(setup):
    dom, cfg, _, _ = setup
    f, res = solve_bvp(dom, scalar_field(0.0), scalar_field(0.0), 0.5, cfg)
    assert not np.any(f.nodal) and res["equation"] == 0 and res["trace"] == 0


def test_bvp_preconditions(setup):
    dom, cfg, _, _ = setup
    with pytest.raises(ValueError):
        solve_bvp(build_global(6, 12), scalar_field(0.0), scalar_field(0.0), 0.5, cfg)
    with pytest.raises(ValueError):
        solve_bvp(dom, scalar_field(0.0), scalar_field(0.0), 2.0, cfg)
    with pytest.raises(ValueError):
        solve_bvp(dom, scalar_field(0.0), np.zeros((3, 8)), 0.5, cfg)


def test_config_invariants(setup):
    dom, cfg, _, phi = setup
    with pytest.raises(ValueError):
        BeltramiConfig(scalar_field(0.3), phi, 0.5, max_iter=0)
    with pytest.raises(ValueError):
        BeltramiConfig(scalar_field(0.3), phi, 0.5, fp_tol=0.0)
    with pytest.raises(ValueError):
        BeltramiConfig(scalar_field(1.0), phi, 0.5).check_dilatation(dom)
    assert BeltramiConfig(scalar_field(0.3j), phi, 0.5).check_dilatation(dom) == pytest.approx(0.3)


def test_zero_dilatation_returns_seed(setup):
    dom, cfg, pi, phi = setup
    f, tr = solve_beltrami(dom, BeltramiConfig(scalar_field(0.0), phi, 0.5, transform=cfg), pi=pi)
    assert tr.converged and tr.iterations == 1
    assert l2_norm(dom, f.nodal - phi.values(dom.nodes)) <= 1e-12
    assert tr.residual <= 1e-10


def test_fixed_point_is_independent_of_start(setup):
    dom, cfg, pi, phi = setup
    bc = BeltramiConfig(scalar_field(0.3), phi, 0.5, fp_tol=1e-10, transform=cfg)
    f1, t1 = solve_beltrami(dom, bc, pi=pi)
    f2, t2 = solve_beltrami(dom, bc, initial="seed", pi=pi)
    assert t1.converged and t2.converged
    assert l2_norm(dom, f1.nodal - f2.nodal) <= 2 * bc.fp_tol * l2_norm(dom, f1.nodal)
    with pytest.raises(ValueError):
        solve_beltrami(dom, bc, initial="random", pi=pi)


def test_contraction_rate_is_q_when_pi_is_isometric():
    # for purely imaginary alpha pi = -I in the interior, so the rate is |q| exactly
    a = 0.5j
    cfg = TransformConfig(kernel=KernelConfig(alpha=a))
    dom = build_cap(TH, 12, 24)
    pi = NodalPi(dom, a, replace(cfg, taylor_order=0), form="right_inverse")
    for q in (0.1, 0.3, 0.5):
        _, tr = solve_beltrami(dom, BeltramiConfig(scalar_field(q), seed_monogenic(a, cfg), a,
                                                   transform=cfg), pi=pi)
        assert tr.converged
        assert tr.mean_ratio() == pytest.approx(q, abs=1e-6)


def test_contraction_rate_at_real_order(setup):
    # the cap norm of pi exceeds 1 for real alpha; the rate is still below 1 for |q| = 0.3
    dom, cfg, pi, phi = setup
    _, tr = solve_beltrami(dom, BeltramiConfig(scalar_field(0.3), phi, 0.5, transform=cfg), pi=pi)
    assert tr.converged and 0.3 < tr.mean_ratio() < 1


def test_divergence_is_reported(setup):
    dom, cfg, pi, phi = setup
    with pytest.raises(BeltramiDivergenceError) as info:
        solve_beltrami(dom, BeltramiConfig(scalar_field(0.8), phi, 0.5, transform=cfg), pi=pi)
    assert info.value.ratio > 1 and info.value.iteration >= 4


def test_be1_residual_decreases():
    cfg = TransformConfig()
    phi = seed_monogenic(0.5, cfg)
    res = []
    for nt in (12, 16):
        dom = build_cap(TH, nt, 2 * nt)
        _, tr = solve_beltrami(dom, BeltramiConfig(scalar_field(0.1), phi, 0.5, fp_tol=1e-8,
                                                   transform=cfg), samples=V)
        res.append(tr.residual)
    assert res[1] < res[0]


def test_trace_statistics():
    tr = SolveTrace(increments=[1.0, 0.5, 0.25, 0.125, 0.0625])
    assert np.allclose(tr.ratios, 0.5)
    assert tr.mean_ratio() == pytest.approx(0.5)
    assert SolveTrace(increments=[1.0]).mean_ratio() == 0.0
