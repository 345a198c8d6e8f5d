"""Quadrature for the Teodorescu and Cauchy transforms on S^2.

Kernel singularity
    Interior nodes near the kernel's singular point are suppressed with a
    smooth radial window ``chi`` of radius ``eps``.  The suppressed part
    ``int (1 - chi) Psi f`` is restored from first-order Taylor data of ``f``
    at the target.  For targets whose disc lies inside the domain the
    moments are closed-form radial integrals; discs clipped by the boundary
    get a polar patch rule on the clipped region.  With ``eps ~ h^{2/3}`` the
    window is resolved increasingly well while truncated moments shrink like
    ``eps^3``.

Derivatives of transforms
    The kernel is rotation covariant, ``(L_ij^v + L_ij^w) Psi = [e_ij, Psi]/2``,
    so rotating the configuration moves the derivative onto ``f``::

        L_ij T f = e_ij (T f)/2 - T(e_ij f)/2 + T(L_ij f) - oint Psi f (X_ij . n)

    with ``X_ij(w) = w_i e_j - w_j e_i``.  Only weakly singular integrals
    remain.  Applying the rule twice gives second derivatives.

Boundary integrals
    Uniform trapezoid sums on the boundary circle, switching to graded
    Gauss-Legendre panels (data interpolated trigonometrically) for targets
    close to the boundary.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .clifford_core import Multivector, gp_array, vectors_to_array
from .special_functions import KernelConfig, SingularityError, kernel_coefficients
from .sphere_geometry import (AnalyticField, SampledField, SphericalDomain, build_cap,
                              geodesic_distance, pairs, rotational_difference,
                              spherical_to_cartesian)
from .spherical_operators import bivector_basis, contract_rot, gamma_alpha_field

__all__ = [
    "TransformConfig",
    "TransformOperator",
    "window",
    "teodorescu",
    "teodorescu_bar",
    "gamma_teodorescu",
    "cauchy_boundary",
    "cauchy_boundary_bar",
    "gamma_cauchy_boundary",
    "singular_cauchy_boundary",
    "borel_pompeiu_residual",
    "cif_residual",
    "point_monogenic",
    "monogenic_generator",
    "boundary_factor",
    "inner_boundary_points",
    "RotField",
    "MulField",
]

Field = Union[AnalyticField, SampledField]


@dataclass(frozen=True)
class TransformConfig:
    """Discretization parameters.

    Attributes
    ----------
    kernel : KernelConfig
    exclusion_eps : float or None
        Window radius around the kernel's singular point.  ``None`` picks
        ``eps_scale * h^{2/3}`` from the domain's mesh parameter ``h``.
    pv_eps : float or None
        Half-width (arc length) of the gap cut by the principal-value
        boundary operator; ``None`` uses one and a half boundary spacings.
    window : str
        ``"smooth"`` (C-infinity window plus moment corrections) or ``"sharp"``
        (plain node dropping, no corrections).
    moment_correction : bool
        Restore the windowed disc from local Taylor data.
    taylor_order : int
        Order of that Taylor data: 0 (values only; no derivatives of the
        density, which keeps repeated application to sampled fields stable),
        1 (adds first rotational derivatives) or 2 (adds second ones).
    boundary_factor : str
        ``"wn"`` multiplies boundary data by ``omega n(omega)``; ``"n"`` by the
        co-normal alone.
    eps_scale : float
    near_boundary : float
        Targets closer to the boundary than this many boundary spacings use
        graded panels instead of the trapezoid sum.
    chunk : int
        Target block size for kernel assembly.
    """

    kernel: KernelConfig = field(default_factory=KernelConfig)
    exclusion_eps: Optional[float] = None
    pv_eps: Optional[float] = None
    window: str = "smooth"
    moment_correction: bool = True
    taylor_order: int = 2
    boundary_factor: str = "wn"
    eps_scale: float = 1.1
    eps_power: float = 2.0 / 3.0
    near_boundary: float = 8.0
    chunk: int = 256

    def __post_init__(self):
        if self.exclusion_eps is not None and not self.exclusion_eps > 0:
            raise ValueError("exclusion_eps must be positive")
        if self.pv_eps is not None and not self.pv_eps > 0:
            raise ValueError("pv_eps must be positive")
        if self.window not in ("smooth", "sharp"):
            raise ValueError("window must be 'smooth' or 'sharp'")
        if self.taylor_order not in (0, 1, 2):
            raise ValueError("taylor_order must be 0, 1 or 2")
        if self.boundary_factor not in ("wn", "n"):
            raise ValueError("boundary_factor must be 'wn' or 'n'")

    def eps_for(self, dom: SphericalDomain) -> float:
        if self.exclusion_eps is not None:
            return float(self.exclusion_eps)
        return float(self.eps_scale * dom.mesh_param ** self.eps_power)

    def pv_for(self, dom: SphericalDomain) -> float:
        if self.pv_eps is not None:
            return float(self.pv_eps)
        m = max(dom.boundary_nodes.shape[0], 1)
        return 1.5 * 2 * np.pi * np.sin(dom.theta0) / m

    def with_alpha(self, alpha: Optional[complex]) -> "TransformConfig":
        if alpha is None or complex(alpha) == self.kernel.alpha:
            return self
        return replace(self, kernel=self.kernel.with_(alpha=complex(alpha)))


def window(theta, eps: float, start: float = 0.5) -> np.ndarray:
    """Smooth step: 0 for ``theta <= start*eps``, 1 for ``theta >= eps``."""
    x = (np.asarray(theta, float) - start * eps) / ((1 - start) * eps)
    x = np.clip(x, 0.0, 1.0)

    def g(y):
        return np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)

    a, b = g(x), g(1 - x)
    return a / (a + b)


# ---------------------------------------------------------------------------
# kernel helpers

def _gaps(V, W):
    Wb = W if W.ndim == 3 else W[None]
    diff = V[:, None, :] - Wb
    summ = V[:, None, :] + Wb
    return 0.5 * np.einsum("mnk,mnk->mn", diff, diff), 0.5 * np.einsum("mnk,mnk->mn", summ, summ)


def _coeffs(kcfg: KernelConfig, omt, opt, conj: bool, derivative: bool = False):
    out = kernel_coefficients(kcfg, omt, opt, derivative=derivative)
    if conj:
        # conj(s + b V) = conj(s) - conj(b) V for a real bivector V
        out = tuple(np.conj(x) if k % 2 == 0 else -np.conj(x) for k, x in enumerate(out))
    return out


def _kernel_matrix(V, W, kcfg: KernelConfig, conj: bool = False, derivative: bool = False):
    omt, opt = _gaps(V, W)
    gap = omt if kcfg.form == "corrected" else opt
    if np.any(gap <= kcfg.antipode_guard):
        raise SingularityError("evaluation point sits on the kernel singularity")
    return _coeffs(kcfg, omt, opt, conj, derivative)


def _apply_kernel(s, b, V, W, F, E):
    """``sum_w (s + b (v ^ w)) F_w`` for weights ``(m, M)`` and data ``(M, K, 2^n)``.

    Per-target sources are allowed: ``W`` of shape ``(m, M, n)`` with data
    ``(m, M, K, 2^n)``.
    """
    n = V.shape[1]
    spec = "mn,mnkc->mkc" if W.ndim == 3 else "mn,nkc->mkc"
    out = np.einsum(spec, s, F)
    Y = [np.einsum(spec, b, W[..., j, None, None] * F) for j in range(n)]
    for p, (i, j) in enumerate(pairs(n)):
        out = out + gp_array(E[p], V[:, i, None, None] * Y[j] - V[:, j, None, None] * Y[i], n)
    return out


def _wedge_array(u, w):
    # bivector coefficients of u ^ w for stacked vectors (..., 3)
    n = u.shape[-1]
    out = np.zeros(np.broadcast_shapes(u.shape, w.shape)[:-1] + (1 << n,), complex)
    for i, j in pairs(n):
        out[..., (1 << i) | (1 << j)] = u[..., i] * w[..., j] - u[..., j] * w[..., i]
    return out


def _tangent_gradient(V, rot):
    """``grad_T f`` at ``V`` from ``L_ij f``; ``rot`` has shape ``(m, K, 3, C)``."""
    # l = (L_23, -L_13, L_12) = v x grad f ; grad_T f = l x v
    l = np.stack([rot[:, :, 2], -rot[:, :, 1], rot[:, :, 0]], axis=2)
    v = V[:, None, :, None]
    g0 = l[:, :, 1] * v[:, :, 2] - l[:, :, 2] * v[:, :, 1]
    g1 = l[:, :, 2] * v[:, :, 0] - l[:, :, 0] * v[:, :, 2]
    g2 = l[:, :, 0] * v[:, :, 1] - l[:, :, 1] * v[:, :, 0]
    return np.stack([g0, g1, g2], axis=2)


# ---------------------------------------------------------------------------
# fields derived from other fields

class MulField:
    """Field ``x -> m f(x)`` for a constant multivector ``m``."""

    def __init__(self, m: np.ndarray, base):
        self.m = np.asarray(getattr(m, "coeffs", m), complex)
        self.base = base
        self.n = base.n

    def _mul(self, x):
        return gp_array(self.m, x, self.n)

    def values(self, P):
        return self._mul(self.base.values(P))

    def rot(self, P):
        return self._mul(self.base.rot(P))

    def rot2(self, P):
        return self._mul(self.base.rot2(P))

    def nodal_values(self, dom):
        return self._mul(self.base.nodal_values(dom))

    def nodal_rot(self, dom):
        return self._mul(self.base.nodal_rot(dom))


class RotField:
    """Field ``L_p f`` built from a field with first and second rotational data."""

    def __init__(self, base, p: int):
        self.base = base
        self.p = p
        self.n = base.n

    def values(self, P):
        return self.base.rot(P)[:, self.p]

    def rot(self, P):
        return self.base.rot2(P)[:, :, self.p]

    def rot2(self, P):
        return rotational_difference(self.rot, P)

    def nodal_values(self, dom):
        return self.base.nodal_rot(dom)[:, self.p]

    def nodal_rot(self, dom):
        return self.rot(dom.nodes)


def _mul_field(m, f):
    if isinstance(f, SampledField):
        return f.left_mul(m)
    return MulField(m, f)


def _rot_field(f, p):
    if isinstance(f, SampledField):
        return f.rot_field(p)
    return RotField(f, p)


def _boundary_values(f, dom: SphericalDomain, phi: np.ndarray) -> np.ndarray:
    """Field values on the boundary circle at longitudes ``phi``."""
    if isinstance(f, SampledField):
        if phi is dom.phi or (phi.shape == dom.phi.shape and np.array_equal(phi, dom.phi)):
            return f.boundary_values
        # trigonometric interpolation of the boundary trace
        return dom.phi_interp(phi) @ f.boundary_values
    P = spherical_to_cartesian(np.full(phi.shape, dom.theta0), phi)
    return f.values(P)


# ---------------------------------------------------------------------------
# boundary quadrature

@lru_cache(maxsize=64)
def _graded_rule(levels: int, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Gauss panels on ``[-pi, pi]`` with ``levels`` dyadic refinements toward 0."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.pi / 2.0 ** np.arange(levels + 1)
    brk = np.concatenate([-edges, edges[::-1]])
    nodes, weights = [], []
    for a, b in zip(brk[:-1], brk[1:]):
        nodes.append((b - a) / 2 * x + (a + b) / 2)
        weights.append((b - a) / 2 * w)
    return np.concatenate(nodes), np.concatenate(weights)


class _BoundaryQuadrature:
    """Per-target boundary rules: trapezoid far away, graded panels nearby.

    Near targets are grouped by grading depth so each group is one batched
    evaluation with per-target nodes.
    """

    def __init__(self, dom: SphericalDomain, V: np.ndarray, cfg: TransformConfig):
        self.dom = dom
        M = dom.boundary_nodes.shape[0]
        self.spacing = 2 * np.pi * np.sin(dom.theta0) / max(M, 1)
        dist = np.abs(dom.distance_to_boundary(V))
        near = dist < cfg.near_boundary * self.spacing
        self.far = np.flatnonzero(~near)
        _, ph = dom.point_angles(V)
        # panel next to the target no wider than a quarter of its distance
        d_ang = np.maximum(dist, 1e-14) / np.sin(dom.theta0)
        levels = np.clip(np.ceil(np.log2(4 * np.pi / d_ang)), 1, 50).astype(int)
        self.groups = []
        for L in np.unique(levels[near]):
            idx = np.flatnonzero(near & (levels == L))
            x, w = _graded_rule(int(L))
            phi = np.mod(ph[idx, None] + x[None, :], 2 * np.pi)
            self.groups.append((idx, phi, np.broadcast_to(w * np.sin(dom.theta0), phi.shape)))

    def blocks(self):
        """Yield ``(target indices, phi, ds weights)``; ``phi`` is 1-D (shared) or 2-D."""
        dom = self.dom
        if self.far.size:
            yield self.far, dom.phi, dom.boundary_weights
        yield from self.groups


def _circle(dom: SphericalDomain, phi: np.ndarray):
    P = spherical_to_cartesian(np.full(phi.shape, dom.theta0), phi)
    nrm = np.stack([np.cos(dom.theta0) * np.cos(phi), np.cos(dom.theta0) * np.sin(phi),
                    np.full(phi.shape, -np.sin(dom.theta0))], axis=-1)
    return P, nrm


def _kernel_action(V, W, D, kcfg: KernelConfig, conj: bool, derivative: bool, E=None):
    """``sum_w Psi(v, w) D_w`` or, with ``derivative``, its ``L_ij`` in ``v``."""
    n = V.shape[1]
    E = bivector_basis(n) if E is None else E
    if not derivative:
        s, b = _kernel_matrix(V, W, kcfg, conj)
        return _apply_kernel(s, b, V, W, D, E)
    s, b, ds, db = _kernel_matrix(V, W, kcfg, conj, derivative=True)
    parts = []
    for i, j in pairs(n):
        Lt = V[:, i, None] * W[..., j] - V[:, j, None] * W[..., i]
        part = _apply_kernel(ds * Lt, db * Lt, V, W, D, E)
        Xv = np.zeros_like(V)
        Xv[:, j], Xv[:, i] = V[:, i], -V[:, j]
        part = part + _apply_kernel(np.zeros_like(b), b, Xv, W, D, E)
        parts.append(part)
    return np.stack(parts, axis=2)


def _boundary_integral(dom, V, cfg: TransformConfig, data_fn: Callable, conj: bool = False,
                       derivative: bool = False, quad: Optional[_BoundaryQuadrature] = None):
    """``oint Psi(v, w) D(w) ds`` for data ``D = data_fn(phi, points, conormals)``.

    ``data_fn`` returns ``(q, K, 2^n)``.  With ``derivative`` the result is
    ``L_ij`` of the integral in ``v``, shape ``(m, K, npairs, 2^n)``.
    """
    n = dom.n
    E = bivector_basis(n)
    quad = quad or _BoundaryQuadrature(dom, V, cfg)
    out = None
    for idx, phi, w in quad.blocks():
        P, nrm = _circle(dom, phi.ravel())
        D = data_fn(phi.ravel(), P, nrm)
        D = D * np.ravel(w)[:, None, None]
        if phi.ndim == 2:
            P = P.reshape(phi.shape + (n,))
            D = D.reshape(phi.shape + D.shape[1:])
        val = _kernel_action(V[idx], P, D, cfg.kernel, conj, derivative, E)
        if out is None:
            out = np.zeros((V.shape[0],) + val.shape[1:], complex)
        out[idx] = val
    return out


# ---------------------------------------------------------------------------
# moment corrections

def _radial_rule(eps: float, nquad: int):
    u, wu = np.polynomial.legendre.leggauss(nquad)
    u = (u + 1) / 2
    wu = wu / 2
    return eps * u * u, 2 * eps * u * wu


def _disc_moments(kcfg: KernelConfig, eps: float, conj: bool, nquad: int = 160):
    """Radial moments of the suppressed disc around an interior target.

    ``l0 = 2 pi int (1-chi) s sin``, ``c1 = pi int (1-chi) b th sin^2`` and
    ``l2 = pi/2 int (1-chi) s th^2 sin``; angular averages of the Taylor terms
    reduce the correction to ``l0 f + c1 sum_p e_p L_p f + l2 sum_p L_p L_p f``.
    """
    th, dth = _radial_rule(eps, nquad)
    s, b = _coeffs(kcfg, 2 * np.sin(th / 2) ** 2, 2 * np.cos(th / 2) ** 2, conj)
    cut = (1 - window(th, eps)) * dth * np.sin(th)
    l0 = 2 * np.pi * np.sum(cut * s)
    c1 = np.pi * np.sum(cut * b * th * np.sin(th))
    l2 = 0.5 * np.pi * np.sum(cut * s * th * th)
    return complex(l0), complex(c1), complex(l2)


def _patch_moments(dom: SphericalDomain, V: np.ndarray, kcfg: KernelConfig, eps: float,
                   conj: bool, nr: int = 40, na: int = 48):
    """Moments over the window disc clipped to the cap, by polar quadrature.

    Along the geodesic from ``v`` in direction ``u`` the field expands as
    ``exp(th L_c) f(v)`` with ``c = v ^ u``.  Returns ``A0 (m, C)``,
    ``A1 (m, P, C)`` and ``A2 (m, P, P, C)`` with the correction
    ``A0 f + sum_p A1_p L_p f + sum_pq A2_pq L_p L_q f``.
    """
    n = dom.n
    C = 1 << n
    prs = pairs(n)
    npr = len(prs)
    th, dth = _radial_rule(eps, nr)
    cut = (1 - window(th, eps)) * dth * np.sin(th)
    s, b = _coeffs(kcfg, 2 * np.sin(th / 2) ** 2, 2 * np.cos(th / 2) ** 2, conj)
    xa, wa = np.polynomial.legendre.leggauss(na)
    A0 = np.zeros((V.shape[0], C), complex)
    A1 = np.zeros((V.shape[0], npr, C), complex)
    A2 = np.zeros((V.shape[0], npr, npr, C), complex)
    c0 = np.cos(dom.theta0)
    for t, v in enumerate(V):
        ct = np.clip(v[2], -1, 1)
        st = np.sqrt(max(1 - ct * ct, 0.0))
        # tangent frame: a points toward the pole, b = v x a
        if st < 1e-14:
            a = np.array([1.0, 0.0, 0.0])
        else:
            a = (np.array([0.0, 0.0, 1.0]) - ct * v) / st
        bvec = np.cross(v, a)
        if dom.is_global:
            half = np.full_like(th, np.pi)
        elif st < 1e-14:
            half = np.where(np.cos(th) > c0, np.pi, 0.0)
        else:
            kappa = (c0 - np.cos(th) * ct) / (np.sin(th) * st)
            half = np.arccos(np.clip(kappa, -1.0, 1.0))
        psi = xa[None, :] * half[:, None]
        wt = cut[:, None] * wa[None, :] * half[:, None]
        u = np.cos(psi)[..., None] * a + np.sin(psi)[..., None] * bvec
        vu = _wedge_array(np.broadcast_to(v, u.shape), u)
        cp = np.stack([vu[..., (1 << i) | (1 << j)].real for i, j in prs], axis=-1)
        K = (b * np.sin(th))[:, None, None] * vu
        K[..., 0] += s[:, None]
        A0[t] = np.einsum("ra,rac->c", wt, K)
        A1[t] = np.einsum("ra,rap,rac->pc", wt * th[:, None], cp, K)
        A2[t] = np.einsum("ra,rap,raq,rac->pqc", 0.5 * wt * th[:, None] ** 2, cp, cp, K)
    return A0, A1, A2


# ---------------------------------------------------------------------------

def _as_points(v) -> tuple[np.ndarray, bool]:
    arr = np.asarray(getattr(v, "coords", v), float)
    if isinstance(v, Multivector):
        arr = np.array([v.coeffs[1 << i].real for i in range(v.n)])
    single = arr.ndim == 1
    return np.atleast_2d(arr), single


class TransformOperator:
    """Discrete Teodorescu-type operator from interior nodes to fixed targets.

    Parameters
    ----------
    dom : SphericalDomain
    targets : array ``(m, 3)`` or a single point
    cfg : TransformConfig
    conj : bool
        Use the Clifford-conjugated kernel (``T-bar``).
    """

    def __init__(self, dom: SphericalDomain, targets, cfg: TransformConfig, conj: bool = False):
        if dom.n != 3:
            raise NotImplementedError("quadrature is implemented for S^2 only")
        self.dom = dom
        self.cfg = cfg
        self.kcfg = cfg.kernel
        self.alpha = cfg.kernel.alpha
        self.conj = conj
        self.targets, self.single = _as_points(targets)
        self.n = dom.n
        self.E = bivector_basis(self.n)
        self.eps = cfg.eps_for(dom)
        corrected = self.kcfg.form == "corrected"
        self.use_moments = cfg.window == "smooth" and cfg.moment_correction and corrected
        self._S, self._B = self._assemble()
        if self.use_moments:
            self._A0, self._A1, self._A2 = self._moments()
        self._bquad = None

    def _assemble(self):
        V, W, wts = self.targets, self.dom.nodes, self.dom.weights
        m, N = V.shape[0], W.shape[0]
        S = np.zeros((m, N), complex)
        B = np.zeros((m, N), complex)
        corrected = self.kcfg.form == "corrected"
        for a in range(0, m, self.cfg.chunk):
            v = V[a:a + self.cfg.chunk]
            omt, opt = _gaps(v, W)
            gap = 2 * np.arcsin(np.clip(np.sqrt((omt if corrected else opt) / 2), 0, 1))
            if self.cfg.window == "smooth":
                chi = window(gap, self.eps)
            else:
                chi = (gap > self.eps).astype(float)
            mask = chi > 0
            s, b = _coeffs(self.kcfg, omt[mask], opt[mask], self.conj)
            ws = (chi * wts[None, :])[mask]
            Sc = np.zeros(omt.shape, complex)
            Bc = np.zeros(omt.shape, complex)
            Sc[mask] = s * ws
            Bc[mask] = b * ws
            S[a:a + len(v)] = Sc
            B[a:a + len(v)] = Bc
        return S, B

    def _moments(self):
        V = self.targets
        m, C, npr = V.shape[0], 1 << self.n, self.E.shape[0]
        l0, c1, l2 = _disc_moments(self.kcfg, self.eps, self.conj)
        A0 = np.zeros((m, C), complex)
        A0[:, 0] = l0
        A1 = np.broadcast_to(c1 * self.E, (m, npr, C)).copy()
        A2 = np.zeros((m, npr, npr, C), complex)
        if self.cfg.taylor_order >= 2:
            A2[:, np.arange(npr), np.arange(npr), 0] = l2
        clipped = np.flatnonzero(self.dom.distance_to_boundary(V) < self.eps)
        if clipped.size:
            A0[clipped], A1[clipped], a2 = _patch_moments(self.dom, V[clipped], self.kcfg,
                                                          self.eps, self.conj)
            if self.cfg.taylor_order >= 2:
                A2[clipped] = a2
        return A0, A1, A2

    @property
    def boundary_quadrature(self) -> _BoundaryQuadrature:
        if self._bquad is None:
            self._bquad = _BoundaryQuadrature(self.dom, self.targets, self.cfg)
        return self._bquad

    # ------------------------------------------------------------------
    def _T(self, fields: Sequence) -> np.ndarray:
        """Transform of several fields at the targets, shape ``(m, K, C)``."""
        dom, V = self.dom, self.targets
        F = np.stack([f.nodal_values(dom) for f in fields], axis=1)
        out = np.einsum("mn,nkc->mkc", self._S, F)
        W = dom.nodes
        Y = [np.einsum("mn,nkc->mkc", self._B, W[:, j, None, None] * F) for j in range(self.n)]
        for p, (i, j) in enumerate(pairs(self.n)):
            out = out + gp_array(self.E[p], V[:, i, None, None] * Y[j] - V[:, j, None, None] * Y[i], self.n)
        if self.use_moments:
            n, npr = self.n, self.E.shape[0]
            fv = np.stack([f.values(V) for f in fields], axis=1)
            out = out + gp_array(self._A0[:, None], fv, n)
            if self.cfg.taylor_order >= 1:
                rv = np.stack([f.rot(V) for f in fields], axis=1)
                for p in range(npr):
                    out = out + gp_array(self._A1[:, None, p], rv[:, :, p], n)
            if self.cfg.taylor_order >= 2:
                r2 = np.stack([f.rot2(V) for f in fields], axis=1)
                for p in range(npr):
                    for q in range(npr):
                        out = out + gp_array(self._A2[:, None, p, q], r2[:, :, p, q], n)
        return out

    def _flux(self, fields: Sequence, derivative: bool = False):
        """``oint Psi f (X_ij . n) ds`` per field and pair; ``(m, K, P, C)``.

        With ``derivative`` an extra leading pair axis for ``L_kl`` is added:
        ``(m, K, P_kl, P_ij, C)``.
        """
        dom = self.dom
        prs = pairs(self.n)

        def data(phi, P, nrm):
            vals = np.stack([_boundary_values(f, dom, phi) for f in fields], axis=1)
            flux = np.stack([P[:, i] * nrm[:, j] - P[:, j] * nrm[:, i] for i, j in prs], axis=1)
            return (vals[:, :, None, :] * flux[:, None, :, None]).reshape(len(phi), -1, vals.shape[-1])

        res = _boundary_integral(dom, self.targets, self.cfg, data, self.conj, derivative,
                                 self.boundary_quadrature)
        m, K, npr = self.targets.shape[0], len(fields), len(prs)
        if not derivative:
            return res.reshape(m, K, npr, -1)
        return res.reshape(m, K, npr, npr, -1).transpose(0, 1, 3, 2, 4)

    def _rot_T(self, fields: Sequence) -> np.ndarray:
        """``L_ij T f`` for several fields, shape ``(m, K, P, C)``."""
        n, E = self.n, self.E
        npr = E.shape[0]
        K = len(fields)
        stack = []
        for f in fields:
            stack.append(f)
            stack.extend(_mul_field(E[p], f) for p in range(npr))
            stack.extend(_rot_field(f, p) for p in range(npr))
        T_all = self._T(stack).reshape(self.targets.shape[0], K, 1 + 2 * npr, -1)
        out = np.empty((self.targets.shape[0], K, npr, 1 << n), complex)
        for p in range(npr):
            out[:, :, p] = (0.5 * gp_array(E[p], T_all[:, :, 0], n) - 0.5 * T_all[:, :, 1 + p]
                            + T_all[:, :, 1 + npr + p])
        if self.dom.boundary_nodes.shape[0]:
            out = out - self._flux(fields)
        return out

    def _rot2_T(self, fields: Sequence) -> np.ndarray:
        """``L_kl L_ij T f``, shape ``(m, K, P_kl, P_ij, C)``."""
        n, E = self.n, self.E
        npr = E.shape[0]
        K = len(fields)
        stack = []
        for f in fields:
            stack.append(f)
            stack.extend(_mul_field(E[p], f) for p in range(npr))
            stack.extend(_rot_field(f, p) for p in range(npr))
        R = self._rot_T(stack).reshape(self.targets.shape[0], K, 1 + 2 * npr, npr, -1)
        out = np.empty((self.targets.shape[0], K, npr, npr, 1 << n), complex)
        for p in range(npr):
            out[:, :, :, p] = (0.5 * gp_array(E[p], R[:, :, 0], n) - 0.5 * R[:, :, 1 + p]
                               + R[:, :, 1 + npr + p])
        if self.dom.boundary_nodes.shape[0]:
            out = out - self._flux(fields, derivative=True)
        return out

    # ------------------------------------------------------------------
    def apply(self, f) -> np.ndarray:
        """``T f`` at the targets, shape ``(m, C)``."""
        return self._T([f])[:, 0]

    def rot_apply(self, f) -> np.ndarray:
        """``L_ij T f`` at the targets, shape ``(m, P, C)``."""
        return self._rot_T([f])[:, 0]

    def rot2_apply(self, f) -> np.ndarray:
        """``L_kl L_ij T f`` at the targets, shape ``(m, P, P, C)``."""
        return self._rot2_T([f])[:, 0]

    def gamma_apply(self, f, which: str = "alpha") -> np.ndarray:
        """``Gamma (T f)`` for ``which`` in {"omega", "alpha", "alpha_bar"}."""
        g_om = -contract_rot(self.rot_apply(f), self.n)
        return _combine(g_om, lambda: self.apply(f), self.alpha, which)

    def jet(self, f, order: int = 2):
        """``(T f, L T f, L L T f)`` truncated at ``order``."""
        out = [self.apply(f)]
        if order >= 1:
            out.append(self.rot_apply(f))
        if order >= 2:
            out.append(self.rot2_apply(f))
        return tuple(out)


def _combine(g_om, value_fn, alpha, which):
    if which == "omega":
        return g_om
    if which == "alpha":
        return g_om + alpha * value_fn()
    if which == "alpha_bar":
        return -g_om + np.conj(alpha) * value_fn()
    raise ValueError(f"unknown operator {which!r}")


def gamma_from_jet(jet, alpha, first: str, second: Optional[str] = None, n: int = 3) -> np.ndarray:
    """Apply one or two Dirac-type operators using rotational jet data.

    ``jet = (u, L u, L L u)``; ``first`` acts first.  Operators are
    ``"omega"``, ``"alpha"`` (``Gamma_omega + alpha``) and ``"alpha_bar"``
    (``-Gamma_omega + conj(alpha)``).
    """
    E = bivector_basis(n)
    u = jet[0]
    G1 = -contract_rot(jet[1], n)  # Gamma_omega u

    def coef(op):
        return {"omega": (1.0, 0.0), "alpha": (1.0, alpha), "alpha_bar": (-1.0, np.conj(alpha))}[op]

    s1, a1 = coef(first)
    v1 = s1 * G1 + a1 * u
    if second is None:
        return v1
    # Gamma_omega Gamma_omega u = sum_q sum_p e_q e_p L_q L_p u
    G2 = 0
    for q in range(E.shape[0]):
        for p in range(E.shape[0]):
            G2 = G2 + gp_array(gp_array(E[q], E[p], n), jet[2][..., q, p, :], n)
    s2, a2 = coef(second)
    # second applied to v1 = s1 G1 + a1 u
    return s2 * (s1 * G2 + a1 * G1) + a2 * v1


def boundary_factor(dom: SphericalDomain, cfg: TransformConfig, P=None, nrm=None) -> np.ndarray:
    """Multivector multiplying the boundary data: ``omega n`` or ``n``."""
    P = dom.boundary_nodes if P is None else P
    nrm = dom.conormals if nrm is None else nrm
    nb = vectors_to_array(nrm)
    if cfg.boundary_factor == "n":
        return nb
    return gp_array(vectors_to_array(P), nb, dom.n)


def _finish(out, single):
    return Multivector(3, out[0]) if single else out


def teodorescu(dom: SphericalDomain, f: Field, alpha, v, cfg: TransformConfig):
    """``T f(v) = int_Omega Psi(omega, v) f(omega) d omega``.

    Returns a Multivector for a single point, else an array ``(m, 2**n)``.
    """
    op = TransformOperator(dom, v, cfg.with_alpha(alpha))
    return _finish(op.apply(f), op.single)


def teodorescu_bar(dom: SphericalDomain, f: Field, alpha, v, cfg: TransformConfig):
    """Teodorescu transform with the Clifford-conjugated kernel."""
    op = TransformOperator(dom, v, cfg.with_alpha(alpha), conj=True)
    return _finish(op.apply(f), op.single)


def gamma_teodorescu(dom: SphericalDomain, f: Field, alpha, v, cfg: TransformConfig,
                     which: str = "alpha", conj: bool = False):
    """``Gamma_alpha T f``, ``Gamma-bar_alpha T f`` or ``Gamma_omega T f`` at ``v``."""
    op = TransformOperator(dom, v, cfg.with_alpha(alpha), conj=conj)
    return _finish(op.gamma_apply(f, which), op.single)


def _data_fn(dom, h, cfg):
    """Boundary data callable ``(phi, P, nrm) -> factor * h`` with shape ``(q, 1, C)``."""
    if callable(getattr(h, "values", None)):
        def raw(phi):
            return _boundary_values(h, dom, phi)
    else:
        hb = np.asarray(h, complex)
        if hb.shape[0] != dom.boundary_nodes.shape[0]:
            raise ValueError("boundary data length does not match the boundary rule")

        def raw(phi):
            if phi.shape == dom.phi.shape and np.array_equal(phi, dom.phi):
                return hb
            return dom.phi_interp(phi) @ hb

    def fn(phi, P, nrm):
        return gp_array(boundary_factor(dom, cfg, P, nrm), raw(phi), dom.n)[:, None]

    return fn


def cauchy_boundary(dom: SphericalDomain, h, alpha, v, cfg: TransformConfig, conj: bool = False):
    """``F h(v) = oint Psi(omega, v) (factor) h(omega) ds``.

    ``h`` is boundary data ``(M, 2**n)`` or a field whose trace is used.
    """
    cfg = cfg.with_alpha(alpha)
    V, single = _as_points(v)
    if dom.boundary_nodes.shape[0] == 0:
        return _finish(np.zeros((V.shape[0], 1 << dom.n), complex), single)
    out = _boundary_integral(dom, V, cfg, _data_fn(dom, h, cfg), conj)[:, 0]
    return _finish(out, single)


def cauchy_boundary_bar(dom, h, alpha, v, cfg):
    """Boundary operator with the Clifford-conjugated kernel."""
    return cauchy_boundary(dom, h, alpha, v, cfg, conj=True)


def gamma_cauchy_boundary(dom: SphericalDomain, h, alpha, v, cfg: TransformConfig,
                          which: str = "alpha", conj: bool = False):
    """Dirac operator applied to ``F h`` using analytic kernel derivatives."""
    cfg = cfg.with_alpha(alpha)
    V, single = _as_points(v)
    if dom.boundary_nodes.shape[0] == 0:
        return _finish(np.zeros((V.shape[0], 1 << dom.n), complex), single)
    fn = _data_fn(dom, h, cfg)
    rot = _boundary_integral(dom, V, cfg, fn, conj, derivative=True)[:, 0]
    g_om = -contract_rot(rot, dom.n)
    out = _combine(g_om, lambda: _boundary_integral(dom, V, cfg, fn, conj)[:, 0], cfg.kernel.alpha, which)
    return _finish(out, single)


def singular_cauchy_boundary(dom: SphericalDomain, h, alpha, v, cfg: TransformConfig):
    """Principal-value boundary operator ``2 p.v. oint Psi(omega, v) (factor) h ds``.

    ``v`` must be a boundary node; nodes within ``pv_eps`` of it (arc
    length along the boundary) are dropped symmetrically.
    """
    cfg = cfg.with_alpha(alpha)
    V, single = _as_points(v)
    Wb = dom.boundary_nodes
    if Wb.shape[0] == 0:
        raise ValueError("domain has no boundary")
    d = geodesic_distance(V[:, None, :], Wb[None, :, :])
    if np.any(d.min(axis=1) > 1e-10):
        raise ValueError("evaluation point is not a boundary node")
    fn = _data_fn(dom, h, cfg)
    data = fn(dom.phi, Wb, dom.conormals)[:, 0] * dom.boundary_weights[:, None]
    _, ph = dom.point_angles(V)
    dphi = np.angle(np.exp(1j * (dom.phi[None, :] - ph[:, None])))
    keep = np.abs(dphi) * np.sin(dom.theta0) > cfg.pv_for(dom)
    omt, opt = _gaps(V, Wb)
    s = np.zeros(omt.shape, complex)
    b = np.zeros(omt.shape, complex)
    s[keep], b[keep] = kernel_coefficients(cfg.kernel, omt[keep], opt[keep])
    out = 2 * _apply_kernel(s, b, V, Wb, data[:, None], bivector_basis(dom.n))[:, 0]
    return _finish(out, single)


def inner_boundary_points(dom: SphericalDomain, delta: float = 1e-5) -> np.ndarray:
    """Boundary nodes moved inward by ``delta``; used to take interior traces."""
    return spherical_to_cartesian(np.full(dom.phi.shape, dom.theta0 - delta), dom.phi)


def _rel_err(diff, ref):
    return float(np.max(np.linalg.norm(diff, axis=-1) / (1 + np.linalg.norm(ref, axis=-1))))


def borel_pompeiu_residual(dom: SphericalDomain, f: AnalyticField, alpha, sample_points,
                           cfg: TransformConfig) -> float:
    """``max |f - F(tr f) - T(Gamma_alpha f)| / (1 + |f|)`` over the samples."""
    cfg = cfg.with_alpha(alpha)
    V, _ = _as_points(sample_points)
    fv = f.values(V)
    tg = TransformOperator(dom, V, cfg).apply(gamma_alpha_field(f, cfg.kernel.alpha))
    fb = cauchy_boundary(dom, f, None, V, cfg)
    return _rel_err(fv - fb - tg, fv)


def monogenic_generator(theta0: float, data: Callable, alpha, cfg: TransformConfig,
                        n_boundary: int = 256, conj: bool = False,
                        delta: float = 1e-5) -> AnalyticField:
    """Analytic field ``v -> F h(v)`` for boundary data on the circle ``theta = theta0``.

    ``data(phi)`` returns coefficient arrays ``(q, 8)``.  The boundary rule
    depends only on ``theta0`` and ``n_boundary`` (graded near the circle),
    so the field can be sampled on every level of a refinement ladder.
    Partials come from analytic kernel derivatives.  Points at or beyond
    the circle are evaluated ``delta`` inside it (values extrapolated from
    depths ``delta`` and ``2 delta``), so boundary values are the interior
    one-sided limits.
    """
    cfg = cfg.with_alpha(alpha)
    ring = build_cap(theta0, 2, n_boundary)

    def fn(phi, P, nrm):
        return gp_array(boundary_factor(ring, cfg, P, nrm), np.asarray(data(phi), complex), 3)[:, None]

    def inside(P, depth=delta):
        P = np.atleast_2d(np.asarray(P, float))
        th, ph = ring.point_angles(P)
        out = th > theta0 - delta
        if np.any(out):
            P = P.copy()
            P[out] = spherical_to_cartesian(np.full(out.sum(), theta0 - depth), ph[out])
        return P, out

    def value(P):
        Q, out = inside(P)
        val = _boundary_integral(ring, Q, cfg, fn, conj)[:, 0]
        if np.any(out):
            # linear extrapolation from two depths: trace error O(delta^2)
            Q2, _ = inside(np.atleast_2d(P)[out], 2 * delta)
            val[out] = 2 * val[out] - _boundary_integral(ring, Q2, cfg, fn, conj)[:, 0]
        return val

    def grad(P):
        # ambient partials from the rotational derivatives (tangential field)
        P, _ = inside(P)
        rot = _boundary_integral(ring, P, cfg, fn, conj, derivative=True)[:, 0]
        # grad_T = l x v with l = (L_23, -L_13, L_12)
        return _tangent_gradient(P, rot[:, None])[:, 0]

    return AnalyticField(3, value, grad)


def point_monogenic(source, coeff, alpha, cfg: TransformConfig, conj: bool = False) -> AnalyticField:
    """Analytic field ``v -> Psi(v, w0) c`` for a pole ``w0`` outside the region of use.

    The Cauchy kernel is left monogenic of order ``alpha`` in ``v`` away
    from its pole, so this is a cheap closed-form element of ``ker Gamma_alpha``.
    First derivatives are analytic; second ones fall back to differences.
    """
    cfg = cfg.with_alpha(alpha)
    W = np.asarray(source, float).reshape(1, -1)
    W = W / np.linalg.norm(W)
    n = W.shape[1]
    D = np.asarray(getattr(coeff, "coeffs", coeff), complex).reshape(1, 1, 1 << n)

    def value(P):
        return _kernel_action(np.atleast_2d(P), W, D, cfg.kernel, conj, False)[:, 0]

    def grad(P):
        P = np.atleast_2d(P)
        rot = _kernel_action(P, W, D, cfg.kernel, conj, True)[:, 0]
        return _tangent_gradient(P, rot[:, None])[:, 0]

    return AnalyticField(n, value, grad)


def cif_residual(dom: SphericalDomain, data: Callable, alpha, sample_points, cfg: TransformConfig,
                 n_boundary: int = 256) -> float:
    """Reproduction error of the Cauchy integral for a generated monogenic.

    ``g = F h`` is built on a fine independent boundary rule; the residual is
    ``max |g(v) - F(tr g)(v)| / (1 + |g(v)|)`` with ``F`` on the domain's own
    boundary rule.
    """
    V, _ = _as_points(sample_points)
    g = monogenic_generator(dom.theta0, data, alpha, cfg, n_boundary)
    gv = g.values(V)
    fg = cauchy_boundary(dom, g.values(dom.boundary_nodes), alpha, V, cfg)
    return _rel_err(gv - fg, gv)
