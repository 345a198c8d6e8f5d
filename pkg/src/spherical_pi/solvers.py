"""Boundary value problem and Beltrami solvers built on the transforms.

``solve_bvp`` evaluates the representation ``f = F h + T g`` of the
solution of ``Gamma_alpha f = g`` with trace ``h``.  ``solve_beltrami``
runs the fixed-point iteration ``h <- q (pi h + Gamma-bar_alpha phi)`` on
the interior nodes and returns ``f = T h + phi``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .clifford_core import gp_array
from .integral_transforms import (TransformConfig, TransformOperator, cauchy_boundary,
                                  gamma_cauchy_boundary, gamma_from_jet, inner_boundary_points)
from .pi_operator import NodalPi, l2_norm, sample_points
from .sphere_geometry import AnalyticField, SampledField, SphericalDomain
from .spherical_operators import gamma_alpha_values, gamma_alpha_bar_values

__all__ = [
    "BeltramiConfig",
    "BeltramiDivergenceError",
    "SolveTrace",
    "solve_bvp",
    "solve_beltrami",
]

log = logging.getLogger(__name__)


class BeltramiDivergenceError(ArithmeticError):
    """The fixed-point increments grew for several consecutive steps."""

    def __init__(self, ratio: float, iteration: int):
        super().__init__(f"fixed-point iteration is not contracting: increment ratio {ratio:.4g} "
                         f"at iteration {iteration}")
        self.ratio = ratio
        self.iteration = iteration


def _pointwise_norm(vals: np.ndarray) -> np.ndarray:
    # conj(e_A) e_A = 1, so the Clifford norm is the coefficient 2-norm
    return np.linalg.norm(vals, axis=-1)


def _rel(diff, ref) -> float:
    return float(np.max(_pointwise_norm(diff) / (1.0 + _pointwise_norm(ref))))


def _boundary_data(dom: SphericalDomain, h) -> np.ndarray:
    P = dom.boundary_nodes
    if hasattr(h, "values"):
        return h.values(P)
    if callable(h):
        return np.asarray(h(P), complex)
    arr = np.asarray(h, complex)
    if arr.shape != (P.shape[0], 1 << dom.n):
        raise ValueError("boundary data has the wrong shape")
    return arr


def solve_bvp(dom: SphericalDomain, g, h, alpha, cfg: TransformConfig,
              samples: Optional[np.ndarray] = None):
    """Solve ``Gamma_alpha f = g`` in the cap with ``f = h`` on its boundary.

    Parameters
    ----------
    g : AnalyticField or SampledField
        Right-hand side.
    h : field, callable or array
        Boundary data (values at ``dom.boundary_nodes`` if an array).
    samples : array ``(m, 3)``, optional
        Interior points for the equation residual (default: 10 random).

    Returns
    -------
    f : SampledField
        ``F h + T g`` on the interior nodes, traces from the interior limit.
    residuals : dict
        ``equation``: max relative ``|Gamma_alpha f - g|`` at the samples;
        ``trace``: max relative ``|f - h|`` at the boundary nodes.
    """
    if dom.is_global:
        raise ValueError("solve_bvp needs a cap domain")
    cfg = cfg.with_alpha(alpha)
    alpha = cfg.kernel.alpha
    if abs(alpha - round(alpha.real)) < 1e-12:
        raise ValueError("alpha must not be an integer")
    hb = _boundary_data(dom, h)
    inner = inner_boundary_points(dom)

    def solution(P):
        return cauchy_boundary(dom, hb, None, P, cfg) + TransformOperator(dom, P, cfg).apply(g)

    f = SampledField(dom, solution(dom.nodes), solution(inner))
    V = sample_points(dom.theta0, 10) if samples is None else np.atleast_2d(samples)
    gv = g.values(V)
    lhs = (gamma_cauchy_boundary(dom, hb, None, V, cfg, which="alpha")
           + TransformOperator(dom, V, cfg).gamma_apply(g, "alpha"))
    residuals = {"equation": _rel(lhs - gv, gv), "trace": _rel(f.boundary_values - hb, hb)}
    return f, residuals


@dataclass
class BeltramiConfig:
    """Inputs of the Beltrami iteration.

    Attributes
    ----------
    q : AnalyticField
        Dilatation; its pointwise Clifford norm must stay below 1.
    phi : AnalyticField
        Seed in ``ker Gamma_alpha``; needs exact first derivatives.
    alpha : complex
    fp_tol : float
        Stop once an increment falls below ``fp_tol`` times the first one.
    max_iter : int
    transform : TransformConfig
    """

    q: AnalyticField
    phi: AnalyticField
    alpha: complex
    fp_tol: float = 1e-10
    max_iter: int = 200
    transform: TransformConfig = field(default_factory=TransformConfig)

    def __post_init__(self):
        self.alpha = complex(self.alpha)
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.fp_tol > 0:
            raise ValueError("fp_tol must be positive")
        self.transform = self.transform.with_alpha(self.alpha)

    def check_dilatation(self, dom: SphericalDomain) -> float:
        """Return ``sup |q|`` over the nodes, raising if it is not below 1."""
        qn = float(_pointwise_norm(self.q.values(dom.nodes)).max())
        if not qn < 1:
            raise ValueError(f"sup |q| = {qn:.4g} must be below 1")
        return qn


@dataclass
class SolveTrace:
    """Increment history and final residual of a Beltrami solve."""

    increments: list = field(default_factory=list)
    residual: float = float("nan")
    converged: bool = False
    iterations: int = 0
    q_norm: float = float("nan")

    @property
    def ratios(self) -> np.ndarray:
        d = np.asarray(self.increments, float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return d[1:] / d[:-1]

    def mean_ratio(self, start: int = 2) -> float:
        """Geometric mean of increment ratios from iteration ``start + 1`` on."""
        r = self.ratios[start:]
        r = r[np.isfinite(r) & (r > 0)]
        return float(np.exp(np.mean(np.log(r)))) if r.size else 0.0


def solve_beltrami(dom: SphericalDomain, config: BeltramiConfig, initial: str = "zero",
                   samples: Optional[np.ndarray] = None, pi: Optional[NodalPi] = None):
    """Fixed-point solve of ``Gamma_alpha f - q Gamma-bar_alpha f = 0``.

    Iterates ``h <- q (pi h + phi~)`` with ``phi~ = Gamma-bar_alpha phi`` on
    the interior nodes, from ``h = 0`` (``initial="zero"``) or from
    ``h = q phi~`` (``initial="seed"``), then returns ``f = T h + phi``.

    Returns ``(f, trace)``; ``trace.residual`` is the residual of the
    equation at interior samples, relative to ``1 + |Gamma-bar_alpha f|``.

    Raises
    ------
    BeltramiDivergenceError
        If increments grow for 3 consecutive steps.
    """
    cfg = config.transform
    alpha = cfg.kernel.alpha
    n = dom.n
    trace = SolveTrace(q_norm=config.check_dilatation(dom))
    q = config.q.values(dom.nodes)
    phit = gamma_alpha_bar_values(config.phi, dom.nodes, alpha)
    forcing = gp_array(q, phit, n)
    pi = pi or NodalPi(dom, alpha, replace(cfg, taylor_order=0), form="right_inverse")

    if initial not in ("zero", "seed"):
        raise ValueError("initial must be 'zero' or 'seed'")
    h = np.zeros_like(forcing) if initial == "zero" else forcing.copy()
    growth = 0
    for it in range(1, config.max_iter + 1):
        if np.any(h):
            new = gp_array(q, pi.apply(SampledField(dom, h)).nodal, n) + forcing
        else:
            new = forcing.copy()
        inc = l2_norm(dom, new - h)
        h = new
        trace.increments.append(inc)
        trace.iterations = it
        first = trace.increments[0]
        if inc <= config.fp_tol * first or first == 0.0:
            trace.converged = True
            break
        if len(trace.increments) > 1:
            ratio = inc / trace.increments[-2]
            growth = growth + 1 if ratio > 1 else 0
            if growth >= 3:
                raise BeltramiDivergenceError(ratio, it)
        log.debug("beltrami iteration %d increment %.3e", it, inc)

    hs = SampledField(dom, h)
    th_f = pi.transform(hs).nodal + config.phi.values(dom.nodes)
    f = SampledField(dom, th_f)

    V = sample_points(dom.theta0, 10) if samples is None else np.atleast_2d(samples)
    jet = TransformOperator(dom, V, cfg).jet(hs, 1)
    g_f = gamma_from_jet(jet, alpha, "alpha") + gamma_alpha_values(config.phi, V, alpha)
    gb_f = gamma_from_jet(jet, alpha, "alpha_bar") + gamma_alpha_bar_values(config.phi, V, alpha)
    res = g_f - gp_array(config.q.values(V), gb_f, n)
    trace.residual = float(np.max(_pointwise_norm(res) / (1.0 + _pointwise_norm(gb_f))))
    return f, trace
