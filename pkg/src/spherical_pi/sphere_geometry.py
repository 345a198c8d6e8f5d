"""Domains on S^2, quadrature rules and field containers.

Interior rules are Gauss-Legendre in colatitude times the uniform rule in
longitude.  Nodes are stored colatitude-major (``index = i * N_phi + j``) so a
:class:`SampledField` can be reshaped onto the product grid for spectral
interpolation and differentiation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Callable, Optional

import numpy as np

from .clifford_core import Multivector, gp_array

__all__ = [
    "SpherePoint",
    "SphericalDomain",
    "AnalyticField",
    "SampledField",
    "build_cap",
    "build_global",
    "integrate",
    "trace",
    "bump_field",
    "pairs",
    "spherical_to_cartesian",
    "geodesic_distance",
]


def pairs(n: int) -> list[tuple[int, int]]:
    """Index pairs ``i < j`` labelling the rotation generators ``L_ij``."""
    return list(combinations(range(n), 2))


@dataclass(frozen=True)
class SpherePoint:
    """Unit vector in R^n."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if abs(c @ c - 1.0) > 1e-12:
            raise ValueError("SpherePoint must have unit length")
        object.__setattr__(self, "coords", c)

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "SpherePoint":
        return cls(spherical_to_cartesian(theta, phi))

    def as_multivector(self) -> Multivector:
        return Multivector.vector(self.coords)


def spherical_to_cartesian(theta, phi) -> np.ndarray:
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def geodesic_distance(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Great-circle distance computed from the chord, accurate for close points."""
    chord = np.linalg.norm(np.asarray(p) - np.asarray(q), axis=-1)
    return 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))


def _barycentric_weights(x: np.ndarray) -> np.ndarray:
    d = x[:, None] - x[None, :]
    np.fill_diagonal(d, 1.0)
    w = 1.0 / np.prod(d, axis=1)
    return w / np.max(np.abs(w))


def _lagrange_matrix(x: np.ndarray, w: np.ndarray, t: np.ndarray) -> np.ndarray:
    # Rows evaluate the interpolant through nodes x at points t.
    t = np.asarray(t, float)
    diff = t[:, None] - x[None, :]
    exact = diff == 0
    diff[exact] = 1.0
    q = w[None, :] / diff
    mat = q / q.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    mat[hit] = exact[hit].astype(float)
    return mat


def _diff_matrix(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    d = x[:, None] - x[None, :]
    np.fill_diagonal(d, 1.0)
    D = (w[None, :] / w[:, None]) / d
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


@dataclass(frozen=True, eq=False)
class SphericalDomain:
    """Quadrature description of a domain on S^2.

    Attributes
    ----------
    nodes, weights : interior rule
    boundary_nodes, boundary_weights, conormals : boundary rule and outward
        unit co-normals (tangent to the sphere)
    is_global : whether the domain is the whole sphere
    theta0 : colatitude of the cap boundary (``pi`` for the sphere)
    theta, phi : 1-D grid coordinates of the product rule
    """

    n: int
    nodes: np.ndarray
    weights: np.ndarray
    boundary_nodes: np.ndarray
    boundary_weights: np.ndarray
    conormals: np.ndarray
    is_global: bool
    theta0: float
    theta: np.ndarray
    phi: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.theta.size, self.phi.size

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def mesh_param(self) -> float:
        """Characteristic spacing: the larger of the widest colatitude and longitude steps."""
        nt, nphi = self.shape
        return max(self.theta0 * np.pi / (2 * nt), 2 * np.pi / nphi * np.sin(min(self.theta0, np.pi / 2)))

    def contains(self, p) -> np.ndarray:
        p = np.asarray(getattr(p, "coords", p), float)
        return p[..., 2] > np.cos(self.theta0) if not self.is_global else np.ones(p.shape[:-1], bool)

    def distance_to_boundary(self, p) -> np.ndarray:
        p = np.asarray(getattr(p, "coords", p), float)
        if self.is_global:
            return np.full(p.shape[:-1], np.inf)
        return self.theta0 - np.arccos(np.clip(p[..., 2], -1, 1))

    # spectral machinery on the product grid
    @cached_property
    def _theta_bary(self) -> np.ndarray:
        return _barycentric_weights(self.theta)

    @cached_property
    def theta_diff(self) -> np.ndarray:
        return _diff_matrix(self.theta, self._theta_bary)

    def theta_interp(self, t) -> np.ndarray:
        return _lagrange_matrix(self.theta, self._theta_bary, np.atleast_1d(t))

    def phi_interp(self, p) -> np.ndarray:
        """Rows evaluating the trigonometric interpolant at longitudes ``p``."""
        nphi = self.phi.size
        k = np.fft.fftfreq(nphi, 1.0 / nphi)
        p = np.atleast_1d(np.asarray(p, float))
        e = np.exp(1j * (p[:, None] - self.phi[None, :])[:, :, None] * k[None, None, :])
        if nphi % 2 == 0:
            # split the Nyquist mode symmetrically so the interpolant is real
            ny = nphi // 2
            e[:, :, ny] = np.cos(ny * (p[:, None] - self.phi[None, :]))
        return (e.sum(axis=2) / nphi).real

    def phi_derivative(self, vals: np.ndarray) -> np.ndarray:
        """Spectral d/dphi of grid values with longitude on axis 1."""
        nphi = self.phi.size
        k = np.fft.fftfreq(nphi, 1.0 / nphi)
        if nphi % 2 == 0:
            k[nphi // 2] = 0.0
        shape = (1, nphi) + (1,) * (vals.ndim - 2)
        return np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(vals, axis=1), axis=1)

    def point_angles(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pts = np.atleast_2d(pts)
        theta = np.arccos(np.clip(pts[:, 2], -1, 1))
        phi = np.arctan2(pts[:, 1], pts[:, 0])
        return theta, phi


def _build(theta0: float, n_theta: int, n_phi: int, is_global: bool) -> SphericalDomain:
    if n_theta < 2 or n_phi < 4:
        raise ValueError("need N_theta >= 2 and N_phi >= 4")
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = theta0 * (x + 1) / 2
    wt = w * theta0 / 2 * np.sin(theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    T, P = np.meshgrid(theta, phi, indexing="ij")
    nodes = spherical_to_cartesian(T, P).reshape(-1, 3)
    weights = (wt[:, None] * np.full(n_phi, 2 * np.pi / n_phi)[None, :]).ravel()
    if is_global:
        bn = np.zeros((0, 3))
        bw = np.zeros(0)
        cn = np.zeros((0, 3))
    else:
        bn = spherical_to_cartesian(np.full(n_phi, theta0), phi)
        bw = np.full(n_phi, np.sin(theta0) * 2 * np.pi / n_phi)
        cn = np.stack([np.cos(theta0) * np.cos(phi), np.cos(theta0) * np.sin(phi),
                       np.full(n_phi, -np.sin(theta0))], axis=-1)
    for a in (nodes, weights, bn, bw, cn, theta, phi):
        a.setflags(write=False)
    return SphericalDomain(3, nodes, weights, bn, bw, cn, is_global, float(theta0), theta, phi)


def build_cap(theta0: float, n_theta: int, n_phi: int) -> SphericalDomain:
    """Spherical cap ``{theta < theta0}`` on S^2 with a product rule."""
    if not 0 < theta0 < np.pi:
        raise ValueError("theta0 must lie in (0, pi)")
    return _build(theta0, n_theta, n_phi, False)


def build_global(n_theta: int, n_phi: int) -> SphericalDomain:
    """The whole sphere S^2 (empty boundary)."""
    return _build(np.pi, n_theta, n_phi, True)


def rotational_difference(fn: Callable, pts: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """``L_kl`` applied to ``fn`` by fourth-order differences along rotations.

    Returns an array with the new ``kl`` axis inserted at position 1.
    """
    pts = np.atleast_2d(pts)
    m = pts.shape[0]
    steps = ((2 * h, -1.0), (h, 8.0), (-h, -8.0), (-2 * h, 1.0))
    prs = pairs(pts.shape[1])
    shifted = []
    for i, j in prs:
        for step, _ in steps:
            ca, sa = np.cos(step), np.sin(step)
            P = pts.copy()
            P[:, i] = ca * pts[:, i] - sa * pts[:, j]
            P[:, j] = sa * pts[:, i] + ca * pts[:, j]
            shifted.append(P)
    # one batched call keeps nested differences cheap
    vals = fn(np.concatenate(shifted))
    vals = vals.reshape((len(prs), len(steps), m) + vals.shape[1:])
    c = np.array([w for _, w in steps]) / (12 * h)
    out = np.einsum("s,psm...->pm...", c, vals)
    return np.moveaxis(out, 0, 1)


class AnalyticField:
    """Multivector field with exact ambient partial derivatives.

    Parameters
    ----------
    n : int
        Ambient dimension.
    value : callable
        ``value(P)`` maps points ``(m, n)`` to coefficients ``(m, 2**n)``.
    grad : callable
        ``grad(P)`` returns ``(m, n, 2**n)``, the partials ``d/dx_i``.
    hess : callable, optional
        ``hess(P)`` returns ``(m, n, n, 2**n)``.
    """

    def __init__(self, n: int, value: Callable, grad: Callable, hess: Optional[Callable] = None):
        self.n = n
        self._value = value
        self._grad = grad
        self._hess = hess

    @property
    def has_hessian(self) -> bool:
        return self._hess is not None

    def values(self, pts) -> np.ndarray:
        return np.asarray(self._value(np.atleast_2d(pts)), dtype=complex)

    def grad(self, pts) -> np.ndarray:
        return np.asarray(self._grad(np.atleast_2d(pts)), dtype=complex)

    def hess(self, pts) -> np.ndarray:
        if self._hess is None:
            raise ValueError("field has no second partials")
        return np.asarray(self._hess(np.atleast_2d(pts)), dtype=complex)

    def nodal_values(self, dom: "SphericalDomain") -> np.ndarray:
        return self.values(dom.nodes)

    def nodal_rot(self, dom: "SphericalDomain") -> np.ndarray:
        return self.rot(dom.nodes)

    def value(self, w) -> Multivector:
        return Multivector(self.n, self.values(np.asarray(getattr(w, "coords", w)))[0])

    def partial(self, w, i: int) -> Multivector:
        return Multivector(self.n, self.grad(np.asarray(getattr(w, "coords", w)))[0, i])

    def second_partial(self, w, i: int, j: int) -> Multivector:
        return Multivector(self.n, self.hess(np.asarray(getattr(w, "coords", w)))[0, i, j])

    def rot(self, pts) -> np.ndarray:
        """``L_ij f = x_i d_j f - x_j d_i f`` for each pair, shape ``(m, npairs, 2**n)``."""
        pts = np.atleast_2d(pts)
        g = self.grad(pts)
        return np.stack([pts[:, i, None] * g[:, j] - pts[:, j, None] * g[:, i]
                         for i, j in pairs(self.n)], axis=1)

    def rot2(self, pts) -> np.ndarray:
        """``L_kl L_ij f`` with shape ``(m, npairs, npairs, 2**n)`` (outer index ``kl``).

        Uses exact second partials when available, otherwise central
        differences of the exact first derivatives along each rotation.
        """
        pts = np.atleast_2d(pts)
        if not self.has_hessian:
            return rotational_difference(self.rot, pts)
        g, h = self.grad(pts), self.hess(pts)
        x = pts[:, :, None]
        prs = pairs(self.n)
        out = np.empty((pts.shape[0], len(prs), len(prs), g.shape[-1]), dtype=complex)

        def d_of_L(l, i, j):
            # d_l (x_i d_j f - x_j d_i f)
            r = x[:, i] * h[:, l, j] - x[:, j] * h[:, l, i]
            if l == i:
                r = r + g[:, j]
            if l == j:
                r = r - g[:, i]
            return r

        for a, (k, l) in enumerate(prs):
            for b, (i, j) in enumerate(prs):
                out[:, a, b] = x[:, k] * d_of_L(l, i, j) - x[:, l] * d_of_L(k, i, j)
        return out

    # algebra on fields
    def __add__(self, other: "AnalyticField") -> "AnalyticField":
        hess = (lambda P: self.hess(P) + other.hess(P)) if self.has_hessian and other.has_hessian else None
        return AnalyticField(self.n, lambda P: self.values(P) + other.values(P),
                             lambda P: self.grad(P) + other.grad(P), hess)

    def __sub__(self, other: "AnalyticField") -> "AnalyticField":
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> "AnalyticField":
        hess = (lambda P: c * self.hess(P)) if self.has_hessian else None
        return AnalyticField(self.n, lambda P: c * self.values(P), lambda P: c * self.grad(P), hess)

    def left_mul(self, m: np.ndarray) -> "AnalyticField":
        """Field ``x -> m f(x)`` for a constant multivector coefficient array ``m``."""
        m = np.asarray(getattr(m, "coeffs", m))
        n = self.n
        hess = (lambda P: gp_array(m, self.hess(P), n)) if self.has_hessian else None
        return AnalyticField(n, lambda P: gp_array(m, self.values(P), n),
                             lambda P: gp_array(m, self.grad(P), n), hess)

    @classmethod
    def constant(cls, n: int, c) -> "AnalyticField":
        c = np.asarray(getattr(c, "coeffs", c), dtype=complex)
        m = 1 << n
        return cls(n, lambda P: np.broadcast_to(c, (len(P), m)).copy(),
                   lambda P: np.zeros((len(P), n, m), complex),
                   lambda P: np.zeros((len(P), n, n, m), complex))

    @classmethod
    def zero(cls, n: int) -> "AnalyticField":
        return cls.constant(n, np.zeros(1 << n, complex))


class SampledField:
    """Multivector values on the interior nodes of a domain.

    Values off the nodes, boundary traces and rotational derivatives come from
    the spectral interpolant on the product grid (polynomial in colatitude,
    trigonometric in longitude).
    """

    def __init__(self, domain: SphericalDomain, values: np.ndarray,
                 boundary_values: Optional[np.ndarray] = None):
        values = np.asarray(values, dtype=complex)
        m = 1 << domain.n
        if values.shape != (domain.size, m):
            raise ValueError(f"values must have shape {(domain.size, m)}")
        if boundary_values is not None:
            boundary_values = np.asarray(boundary_values, dtype=complex)
            if boundary_values.shape != (domain.boundary_nodes.shape[0], m):
                raise ValueError("boundary_values length does not match the boundary rule")
        self.domain = domain
        self.n = domain.n
        self.nodal = values
        self._boundary = boundary_values

    def nodal_values(self, dom: SphericalDomain) -> np.ndarray:
        self._check_domain(dom)
        return self.nodal

    def nodal_rot(self, dom: SphericalDomain) -> np.ndarray:
        self._check_domain(dom)
        return self.rot_nodal

    def _check_domain(self, dom):
        if dom is not self.domain:
            raise ValueError("field is not sampled on this domain")

    def rot_field(self, p: int) -> "SampledField":
        """``L_p f`` as a sampled field on the same grid."""
        return SampledField(self.domain, self.rot_nodal[:, p])

    @classmethod
    def from_field(cls, f: AnalyticField, domain: SphericalDomain) -> "SampledField":
        bv = f.values(domain.boundary_nodes) if domain.boundary_nodes.shape[0] else None
        return cls(domain, f.values(domain.nodes), bv)

    @property
    def boundary_values(self) -> np.ndarray:
        if self._boundary is not None:
            return self._boundary
        return self.values(self.domain.boundary_nodes)

    def _grid(self, vals: np.ndarray) -> np.ndarray:
        nt, nphi = self.domain.shape
        return vals.reshape(nt, nphi, *vals.shape[1:])

    def values(self, pts) -> np.ndarray:
        pts = np.atleast_2d(pts)
        if pts.shape[0] == 0:
            return np.zeros((0, self.nodal.shape[1]), complex)
        return self._interp(self.nodal, pts)

    def _interp(self, vals: np.ndarray, pts: np.ndarray) -> np.ndarray:
        th, ph = self.domain.point_angles(pts)
        It = self.domain.theta_interp(th)
        Ip = self.domain.phi_interp(ph)
        G = self._grid(vals)
        return np.einsum("mi,mj,ij...->m...", It, Ip, G)

    @cached_property
    def rot_nodal(self) -> np.ndarray:
        """``L_ij f`` at the nodes, shape ``(N, npairs, 2**n)``."""
        return self._rot_of(self.nodal)

    @cached_property
    def rot2_nodal(self) -> np.ndarray:
        """``L_kl L_ij f`` at the nodes, shape ``(N, npairs, npairs, 2**n)``."""
        r = self.rot_nodal
        out = self._rot_of(r.reshape(r.shape[0], -1))
        npr = r.shape[1]
        return out.reshape(r.shape[0], npr, npr, -1)

    def _rot_of(self, vals: np.ndarray) -> np.ndarray:
        dom = self.domain
        G = self._grid(vals)
        dth = np.einsum("ik,k...->i...", dom.theta_diff, G)
        dph = dom.phi_derivative(G)
        T, P = np.meshgrid(dom.theta, dom.phi, indexing="ij")
        e_th = np.stack([np.cos(T) * np.cos(P), np.cos(T) * np.sin(P), -np.sin(T)], -1)
        e_ph = np.stack([-np.sin(P), np.cos(P), np.zeros_like(P)], -1) / np.sin(T)[..., None]
        x = dom.nodes.reshape(T.shape + (3,))
        extra = (None,) * (vals.ndim - 1)
        grad = [e_th[(..., c) + extra] * dth + e_ph[(..., c) + extra] * dph for c in range(3)]
        rot = [x[(..., i) + extra] * grad[j] - x[(..., j) + extra] * grad[i] for i, j in pairs(3)]
        return np.stack(rot, axis=2).reshape(vals.shape[0], len(rot), *vals.shape[1:])

    def rot(self, pts) -> np.ndarray:
        r = self.rot_nodal
        return self._interp(r.reshape(r.shape[0], -1), np.atleast_2d(pts)).reshape(-1, *r.shape[1:])

    def rot2(self, pts) -> np.ndarray:
        r = self.rot2_nodal
        return self._interp(r.reshape(r.shape[0], -1), np.atleast_2d(pts)).reshape(-1, *r.shape[1:])

    has_hessian = True

    def __add__(self, other: "SampledField") -> "SampledField":
        self._check(other)
        return SampledField(self.domain, self.nodal + other.nodal)

    def __sub__(self, other: "SampledField") -> "SampledField":
        self._check(other)
        return SampledField(self.domain, self.nodal - other.nodal)

    def scale(self, c: complex) -> "SampledField":
        return SampledField(self.domain, c * self.nodal)

    def left_mul(self, m) -> "SampledField":
        m = np.asarray(getattr(m, "coeffs", m))
        return SampledField(self.domain, gp_array(m, self.nodal, self.n))

    def _check(self, other: "SampledField") -> None:
        if other.domain is not self.domain:
            raise ValueError("fields live on different domains")


def integrate(dom: SphericalDomain, f: SampledField) -> Multivector:
    """Quadrature sum ``sum_w f(omega_w) weight_w`` in fixed (node) order."""
    if f.domain is not dom:
        raise ValueError("field is not sampled on this domain")
    return Multivector(dom.n, dom.weights @ f.nodal)


def trace(f: AnalyticField, dom: SphericalDomain) -> np.ndarray:
    """Values of ``f`` at the boundary nodes (empty for the global sphere)."""
    if dom.boundary_nodes.shape[0] == 0:
        return np.zeros((0, 1 << f.n), complex)
    return f.values(dom.boundary_nodes)


def bump_field(dom: SphericalDomain, center, radius: float,
               coeff=None, profile: str = "exp", order: int = 6) -> AnalyticField:
    """Compactly supported bump in geodesic distance ``d`` from ``center``.

    With ``q = (d/r)^2`` the profile is ``exp(1 - 1/(1 - q))`` (C-infinity,
    ``profile="exp"``) or ``(1 - q)^order`` (C^(order-1), ``profile="poly"``).
    The polynomial profile has much smaller derivatives near the edge of the
    support, which keeps quadrature errors moderate at coarse resolutions.

    The field is extended to R^3 as a function of ``x . c / |x|`` so ambient
    partials are tangential; ``coeff`` is the multivector it multiplies
    (scalar 1 by default).
    """
    if profile not in ("exp", "poly"):
        raise ValueError("profile must be 'exp' or 'poly'")
    if profile == "poly" and order < 3:
        raise ValueError("polynomial bumps need order >= 3 for second derivatives")
    c = np.asarray(getattr(center, "coords", center), float)
    if not 0 < radius < np.pi:
        raise ValueError("radius must lie in (0, pi)")
    if not dom.is_global:
        theta_c = np.arccos(np.clip(c[2], -1, 1))
        if theta_c + radius > dom.theta0 + 1e-12:
            raise ValueError("bump support leaves the domain")
    m = 1 << dom.n
    coeff = np.zeros(m, complex) if coeff is None else np.asarray(getattr(coeff, "coeffs", coeff), complex)
    if not np.any(coeff):
        coeff = coeff.copy()
        coeff[0] = 1.0

    def shape(qi):
        if profile == "exp":
            g = np.exp(1 - 1 / (1 - qi))
            return g, -g / (1 - qi) ** 2, g / (1 - qi) ** 4 - 2 * g / (1 - qi) ** 3
        k = order
        return (1 - qi) ** k, -k * (1 - qi) ** (k - 1), k * (k - 1) * (1 - qi) ** (k - 2)

    def jet(P):
        # returns u(s), u'(s), u''(s) with s = x.c/|x|, plus s and its derivatives
        P = np.atleast_2d(P)
        r = np.linalg.norm(P, axis=1)
        s = np.clip(P @ c / r, -1.0, 1.0)
        d = geodesic_distance(P / r[:, None], c[None, :])
        q = (d / radius) ** 2
        inside = q < 1
        u = np.zeros_like(s)
        du = np.zeros_like(s)
        ddu = np.zeros_like(s)
        if np.any(inside):
            qi, di, si = q[inside], d[inside], s[inside]
            g, dg_dq, d2g_dq2 = shape(qi)
            # q = d^2/r^2 with d = arccos s; series for small d
            sin_d = np.sin(di)
            small = di < 1e-3
            sd = np.where(small, 1.0, sin_d)
            ratio = np.where(small, 1 + di ** 2 / 6, di / sd)
            curv = np.where(small, 1 / 3 + 2 * di ** 2 / 15,
                            (sin_d - di * np.cos(di)) / sd ** 3)
            dq_ds = -2 / radius ** 2 * ratio
            d2q_ds2 = 2 / radius ** 2 * curv
            u[inside] = g
            du[inside] = dg_dq * dq_ds
            ddu[inside] = d2g_dq2 * dq_ds ** 2 + dg_dq * d2q_ds2
        return P, r, s, u, du, ddu

    def value(P):
        _, _, _, u, _, _ = jet(P)
        return u[:, None] * coeff[None, :]

    def grad(P):
        P, r, s, _, du, _ = jet(P)
        ds = (c[None, :] - s[:, None] * P / r[:, None]) / r[:, None]
        return (du[:, None] * ds)[:, :, None] * coeff[None, None, :]

    def hess(P):
        P, r, s, _, du, ddu = jet(P)
        x = P / r[:, None]
        ds = (c[None, :] - s[:, None] * x) / r[:, None]
        eye = np.eye(3)[None]
        # d2 s / dx_i dx_j for s = x.c/|x|
        d2s = (-(c[None, :, None] * x[:, None, :] + x[:, :, None] * c[None, None, :])
               - s[:, None, None] * (eye - 3 * x[:, :, None] * x[:, None, :])) / r[:, None, None] ** 2
        H = ddu[:, None, None] * ds[:, :, None] * ds[:, None, :] + du[:, None, None] * d2s
        return H[..., None] * coeff[None, None, None, :]

    return AnalyticField(dom.n, value, grad, hess)
