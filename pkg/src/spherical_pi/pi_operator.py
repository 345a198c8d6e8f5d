"""The pi operator ``Gamma-bar_alpha T``, its relatives, and the L^2 structure.

All operators act on fields through :class:`TransformOperator`, so
derivatives of transforms come from the rotation-covariance rule rather than
from differentiating the kernel under the integral sign.  Compositions that
need a transform *as a field* (for example ``pi-bar pi f``) sample it on the
interior nodes and use the spectral interpolant; its boundary trace is taken
as the one-sided interior limit.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .clifford_core import Multivector, conj_array, gp_array
from .integral_transforms import (TransformConfig, TransformOperator, _as_points,
                                  _boundary_integral, _data_fn, cauchy_boundary,
                                  gamma_cauchy_boundary, gamma_from_jet,
                                  inner_boundary_points, boundary_factor)
from .sphere_geometry import (AnalyticField, SampledField, SphericalDomain, build_cap,
                              build_global, spherical_to_cartesian)
from .spherical_operators import bivector_basis, contract_rot, gamma_alpha_field

__all__ = [
    "NumericalConsistencyError",
    "IdentityReport",
    "inner_product",
    "l2_norm",
    "pi_apply",
    "pi_bar_apply",
    "pi_adjoint_apply",
    "NodalPi",
    "gamma_sampled",
    "bergman_generators",
    "bergman_project",
    "pythagoras_check",
    "verify_pi_identities",
    "IDENTITIES",
    "sample_points",
]

HARD_FLOOR = 1e-8


class NumericalConsistencyError(ArithmeticError):
    """A quantity that must be non-negative came out clearly negative."""


@dataclass
class IdentityReport:
    """Residual of one identity along a resolution ladder.

    ``verdict`` is True when the final residual is below half the first one
    or below ``HARD_FLOOR``.  ``kind`` is ``"check"`` for identities gated by
    the verdict, ``"control"`` for negative controls (expected to fail) and
    ``"info"`` for diagnostics reported without a gate.
    """

    name: str
    field: str
    ladder: list = field(default_factory=list)
    kind: str = "check"
    note: str = ""

    def __post_init__(self):
        self.ladder = sorted(self.ladder, key=lambda t: -t[0])

    @property
    def residual(self) -> float:
        return float(self.ladder[-1][1]) if self.ladder else float("nan")

    @property
    def verdict(self) -> bool:
        if not self.ladder:
            return False
        first, last = self.ladder[0][1], self.ladder[-1][1]
        if not np.isfinite(last):
            return False
        return bool(last < 0.5 * first or last < HARD_FLOOR)

    @property
    def ok(self) -> bool:
        """Verdict read against the report kind (controls must fail)."""
        if self.kind == "control":
            return not self.verdict
        return self.verdict


# ---------------------------------------------------------------------------
# Hilbert structure

def _nodal(dom: SphericalDomain, f) -> np.ndarray:
    if isinstance(f, SampledField):
        if f.domain is not dom:
            raise ValueError("field is not sampled on this domain")
        return f.nodal
    if isinstance(f, AnalyticField):
        return f.values(dom.nodes)
    arr = np.asarray(f, complex)
    if arr.shape != (dom.size, 1 << dom.n):
        raise ValueError("nodal array has the wrong shape")
    return arr


def inner_product(dom: SphericalDomain, f, g) -> Multivector:
    """Clifford-valued ``<f, g> = int conj(f) g`` by the interior rule."""
    F, G = _nodal(dom, f), _nodal(dom, g)
    return Multivector(dom.n, dom.weights @ gp_array(conj_array(F, dom.n), G, dom.n))


def _scalar_ip(dom, F, G):
    # scalar part of <F, G>; conj(e_A) e_A = 1 for every blade
    return complex(np.einsum("n,nc,nc->", dom.weights, np.conj(F), G))


def l2_norm(dom: SphericalDomain, f) -> float:
    """``sqrt([<f, f>]_0)``."""
    F = _nodal(dom, f)
    s = _scalar_ip(dom, F, F).real
    if s < -1e-12:
        raise NumericalConsistencyError(f"negative squared norm {s}")
    return float(np.sqrt(max(s, 0.0)))


# ---------------------------------------------------------------------------
# pointwise operators

def _finish(out, single):
    return Multivector(3, out[0]) if single else out


def pi_apply(dom: SphericalDomain, f, alpha, v, cfg: TransformConfig):
    """``pi f(v) = Gamma-bar_alpha (T f)(v)``."""
    op = TransformOperator(dom, v, cfg.with_alpha(alpha))
    return _finish(op.gamma_apply(f, "alpha_bar"), op.single)


def pi_bar_apply(dom: SphericalDomain, f, alpha, v, cfg: TransformConfig):
    """``pi-bar f(v) = Gamma_alpha (T-bar f)(v)``."""
    op = TransformOperator(dom, v, cfg.with_alpha(alpha), conj=True)
    return _finish(op.gamma_apply(f, "alpha"), op.single)


def gamma_sampled(f: SampledField, alpha, bar: bool = False) -> SampledField:
    """``Gamma_alpha f`` (or ``Gamma-bar_alpha f``) of a sampled field, spectrally."""
    n = f.n
    sgn, a = (1.0, np.conj(alpha)) if bar else (-1.0, alpha)
    vals = sgn * contract_rot(f.rot_nodal, n) + a * f.nodal
    bv = None
    if f.domain.boundary_nodes.shape[0]:
        P = f.domain.boundary_nodes
        bv = sgn * contract_rot(f.rot(P), n) + a * f.boundary_values
    return SampledField(f.domain, vals, bv)


def _gamma_field(f, alpha, bar=False):
    if isinstance(f, SampledField):
        return gamma_sampled(f, alpha, bar)
    return gamma_alpha_field(f, alpha, bar)


def pi_adjoint_apply(dom: SphericalDomain, f, alpha, v, cfg: TransformConfig):
    """``pi* f(v) = T-bar (Gamma_alpha f)(v)``."""
    cfg = cfg.with_alpha(alpha)
    op = TransformOperator(dom, v, cfg, conj=True)
    return _finish(op.apply(_gamma_field(f, cfg.kernel.alpha)), op.single)


class NodalPi:
    """``pi`` (or ``pi-bar``) evaluated on the interior nodes of a domain.

    Kernel weights for the nodes and for the inward-shifted boundary points
    are assembled once, so repeated application (fixed-point iterations)
    costs dense matrix products only.  Results are :class:`SampledField`
    objects whose boundary values are the interior one-sided limits.

    ``form="derivative"`` differentiates the transform (by parts, so the
    density's own derivatives enter).  ``form="right_inverse"`` uses
    ``Gamma_alpha T = I`` inside the domain, which turns ``pi`` into
    ``-I + 2 Re(alpha) T`` (likewise for ``pi-bar``); no derivatives of the
    density are needed, which is what repeated application to sampled
    fields requires.  Pair it with ``taylor_order=0``.
    """

    def __init__(self, dom: SphericalDomain, alpha, cfg: TransformConfig, bar: bool = False,
                 delta: float = 1e-5, form: str = "derivative"):
        if form not in ("derivative", "right_inverse"):
            raise ValueError("form must be 'derivative' or 'right_inverse'")
        self.dom = dom
        self.cfg = cfg.with_alpha(alpha)
        self.alpha = self.cfg.kernel.alpha
        self.bar = bar
        self.form = form
        self.which = "alpha" if bar else "alpha_bar"
        self.nodes_op = TransformOperator(dom, dom.nodes, self.cfg, conj=bar)
        self.bdry_op = None
        self._inner = None
        if dom.boundary_nodes.shape[0]:
            self._inner = inner_boundary_points(dom, delta)
            self.bdry_op = TransformOperator(dom, self._inner, self.cfg, conj=bar)

    def _apply(self, op, f, P):
        if self.form == "derivative":
            return op.gamma_apply(f, self.which)
        return 2 * self.alpha.real * op.apply(f) - f.values(P)

    def apply(self, f) -> SampledField:
        vals = self._apply(self.nodes_op, f, self.dom.nodes)
        bv = self._apply(self.bdry_op, f, self._inner) if self.bdry_op is not None else None
        return SampledField(self.dom, vals, bv)

    def transform(self, f) -> SampledField:
        """``T f`` (or ``T-bar f``) on the nodes with its boundary trace."""
        vals = self.nodes_op.apply(f)
        bv = self.bdry_op.apply(f) if self.bdry_op is not None else None
        return SampledField(self.dom, vals, bv)

    def __call__(self, f) -> SampledField:
        return self.apply(f)


# ---------------------------------------------------------------------------
# Bergman projection

def _mode_order(count: int) -> list[int]:
    ks = [0]
    k = 1
    while len(ks) < count:
        ks.extend([k, -k])
        k += 1
    return ks[:count]


def bergman_generators(dom: SphericalDomain, alpha, m: int, cfg: TransformConfig) -> np.ndarray:
    """Nodal values of ``m`` monogenic generators, shape ``(m, N, 2^n)``.

    Generator ``j`` is ``F(exp(i k phi)) e_A`` for Fourier modes
    ``k = 0, 1, -1, 2, ...`` and blades ``A`` in bitmask order, that is the
    right-module span of the Cauchy transforms of boundary Fourier modes.
    """
    if dom.boundary_nodes.shape[0] == 0:
        raise ValueError("Bergman generators need a boundary")
    C = 1 << dom.n
    cfg = cfg.with_alpha(alpha)
    ks = _mode_order(-(-m // C))
    E = np.eye(C, dtype=complex)
    out = []
    for k in ks:
        def data(phi, P, nrm, k=k):
            h = np.zeros((phi.size, C), complex)
            h[:, 0] = np.exp(1j * k * phi)
            return gp_array(boundary_factor(dom, cfg, P, nrm), h, dom.n)[:, None]
        G = _boundary_integral(dom, dom.nodes, cfg, data)[:, 0]
        out.extend(gp_array(G, E[A], dom.n) for A in range(C))
    return np.stack(out[:m])


def bergman_project(dom: SphericalDomain, alpha, f, m: int, cfg: TransformConfig,
                    rank_tol: float = 1e-10, generators: Optional[np.ndarray] = None):
    """Galerkin projection onto ``m`` monogenic generators.

    Orthonormalization is in the scalar part of the discrete inner product
    (a positive definite Hermitian form).  A numerically rank-deficient
    generator set is truncated with a warning.

    Returns
    -------
    (Pf, Qf) : SampledField, SampledField
        ``Pf + Qf = f`` exactly.
    """
    F = _nodal(dom, f)
    G = bergman_generators(dom, alpha, m, cfg) if generators is None else np.asarray(generators)
    sw = np.sqrt(dom.weights)[:, None]
    A = (G * sw[None]).reshape(G.shape[0], -1).T
    U, S, _ = np.linalg.svd(A, full_matrices=False)
    r = int(np.sum(S > rank_tol * S[0])) if S.size else 0
    if r < G.shape[0]:
        warnings.warn(f"generator Gram matrix is rank deficient; using {r} of {G.shape[0]}",
                      RuntimeWarning, stacklevel=2)
    U = U[:, :r]
    x = (F * sw).ravel()
    p = U @ (U.conj().T @ x)
    Pf = p.reshape(F.shape) / sw
    bv = None
    return SampledField(dom, Pf, bv), SampledField(dom, F - Pf, bv)


def pythagoras_check(dom: SphericalDomain, phi, psi, n_exp: float,
                     orth_tol: float = 1e-10) -> IdentityReport:
    """Pythagorean norm identities for a discrete-orthogonal pair.

    Residual is the larger relative mismatch of
    ``|phi + psi|^n = (|phi|^2 + |psi|^2)^(n/2)`` and
    ``|||phi + psi|||^n = (|||phi||| + |||psi|||)^n`` with ``|||.||| = |.|^2``.
    """
    A, B = _nodal(dom, phi), _nodal(dom, psi)
    ip = abs(_scalar_ip(dom, A, B))
    na, nb = l2_norm(dom, A), l2_norm(dom, B)
    if ip > orth_tol * max(1.0, na * nb):
        raise ValueError(f"pair is not orthogonal: |<phi, psi>_0| = {ip:.3e}")
    ns = l2_norm(dom, A + B)
    lhs_a, rhs_a = ns ** n_exp, (na ** 2 + nb ** 2) ** (n_exp / 2)
    lhs_b, rhs_b = (ns ** 2) ** n_exp, (na ** 2 + nb ** 2) ** n_exp
    res = max(abs(lhs_a - rhs_a) / max(rhs_a, 1e-300) if rhs_a else abs(lhs_a),
              abs(lhs_b - rhs_b) / max(rhs_b, 1e-300) if rhs_b else abs(lhs_b))
    return IdentityReport(f"pythagoras_n{n_exp:g}", "pair", [(dom.mesh_param, float(res))])


# ---------------------------------------------------------------------------
# identity suite

def _rel(diff, ref) -> float:
    d = np.linalg.norm(np.atleast_2d(diff), axis=-1)
    r = np.linalg.norm(np.atleast_2d(ref), axis=-1)
    return float(np.max(d / (1.0 + r)))


def _exact_gamma(f, P, alpha, bar=False):
    g = -contract_rot(f.rot(P), f.n)
    return -g + np.conj(alpha) * f.values(P) if bar else g + alpha * f.values(P)


@dataclass
class _Level:
    """Shared quantities for one field on one ladder level."""

    dom: SphericalDomain
    f: AnalyticField
    alpha: complex
    cfg: TransformConfig
    V: np.ndarray
    cache: dict = field(default_factory=dict)

    def get(self, key, fn):
        if key not in self.cache:
            self.cache[key] = fn()
        return self.cache[key]

    @property
    def op(self) -> TransformOperator:
        return self.get("op", lambda: TransformOperator(self.dom, self.V, self.cfg))

    @property
    def op_bar(self) -> TransformOperator:
        return self.get("op_bar", lambda: TransformOperator(self.dom, self.V, self.cfg, conj=True))

    @property
    def nodal_pi(self) -> NodalPi:
        return self.get("npi", lambda: NodalPi(self.dom, self.alpha, self.cfg))

    @property
    def nodal_pi_bar(self) -> NodalPi:
        return self.get("npib", lambda: NodalPi(self.dom, self.alpha, self.cfg, bar=True))

    @property
    def jet_Tf(self):
        return self.get("jetTf", lambda: self.op.jet(self.f, 2))

    @property
    def pi_f_nodes(self) -> SampledField:
        return self.get("pif", lambda: self.nodal_pi.apply(self.f))

    def pi_f(self):
        return gamma_from_jet(self.jet_Tf, self.alpha, "alpha_bar")

    def gamma(self, bar=False):
        return _exact_gamma(self.f, self.V, self.alpha, bar)

    def F(self, h, which=None, conj=False):
        # Cauchy transform of boundary data h (field or array), optionally with a Dirac operator
        if which is None:
            return cauchy_boundary(self.dom, h, None, self.V, self.cfg, conj=conj)
        return gamma_cauchy_boundary(self.dom, h, None, self.V, self.cfg, which=which, conj=conj)


def _id_gamma_pi(L: _Level):
    lhs = gamma_from_jet(L.jet_Tf, L.alpha, "alpha_bar", "alpha")
    return _rel(lhs - L.gamma(bar=True), lhs)


def _pi_gamma(L: _Level):
    return L.get("piGf", lambda: L.op.gamma_apply(gamma_alpha_field(L.f, L.alpha), "alpha_bar"))


def _id_pi_gamma(L: _Level):
    lhs = _pi_gamma(L)
    rhs = L.gamma(bar=True) - L.F(L.f, "alpha_bar")
    return _rel(lhs - rhs, lhs)


def _id_pi_gamma_ablation(L: _Level):
    lhs = _pi_gamma(L)
    return _rel(lhs - L.gamma(bar=True), lhs)


def _id_F_pi(L: _Level):
    lhs = L.F(L.pi_f_nodes.boundary_values)
    rhs = L.pi_f() - L.op.apply(gamma_alpha_field(L.f, L.alpha, bar=True))
    return _rel(lhs - rhs, lhs)


def _id_gamma_pi_minus_pi(L: _Level):
    lhs = gamma_from_jet(L.jet_Tf, L.alpha, "alpha_bar", "alpha") - L.pi_f()
    rhs = L.F(L.f, "alpha_bar")
    return _rel(lhs - rhs, lhs)


def _id_commutator(L: _Level):
    lhs = gamma_from_jet(L.jet_Tf, L.alpha, "alpha_bar", "alpha") - _pi_gamma(L)
    rhs = L.F(L.f, "alpha_bar")
    return _rel(lhs - rhs, lhs)


def _id_compact_pi_gamma(L: _Level):
    lhs = _pi_gamma(L)
    return _rel(lhs - L.gamma(bar=True), lhs)


def _id_compact_gamma_pi_is_pi(L: _Level):
    lhs = gamma_from_jet(L.jet_Tf, L.alpha, "alpha_bar", "alpha")
    return _rel(lhs - L.pi_f(), lhs)


def _id_compact_commute(L: _Level):
    a = _pi_gamma(L)
    b = gamma_from_jet(L.jet_Tf, L.alpha, "alpha_bar", "alpha")
    return _rel(a - b, a)


def _pi_bar_pi(L: _Level):
    return L.get("pbp", lambda: L.op_bar.gamma_apply(L.pi_f_nodes, "alpha"))


def _trace_T(L: _Level, conj=False):
    npi = L.nodal_pi_bar if conj else L.nodal_pi
    key = "trTbar" if conj else "trT"
    return L.get(key, lambda: npi.bdry_op.apply(L.f))


def _id_pi_bar_pi_boundary(L: _Level):
    lhs = _pi_bar_pi(L)
    if L.dom.boundary_nodes.shape[0]:
        lhs = lhs + L.F(_trace_T(L), "alpha", conj=True)
    return _rel(lhs - L.f.values(L.V), lhs)


def _id_pi_pi_bar_boundary(L: _Level):
    pib = L.get("pibf", lambda: L.nodal_pi_bar.apply(L.f))
    lhs = L.op.gamma_apply(pib, "alpha_bar")
    if L.dom.boundary_nodes.shape[0]:
        lhs = lhs + L.F(_trace_T(L, conj=True), "alpha_bar")
    return _rel(lhs - L.f.values(L.V), lhs)


def _id_left_inverse(L: _Level):
    # pi-bar pi (Gamma_alpha g) = Gamma_alpha g for compactly supported g
    g = gamma_alpha_field(L.f, L.alpha)
    pg = L.get("pi_gf", lambda: L.nodal_pi.apply(g))
    lhs = L.op_bar.gamma_apply(pg, "alpha")
    rhs = g.values(L.V)
    return _rel(lhs - rhs, lhs)


def _id_commute_bar(L: _Level):
    a = _pi_bar_pi(L)
    pib = L.get("pibf", lambda: L.nodal_pi_bar.apply(L.f))
    b = L.op.gamma_apply(pib, "alpha_bar")
    return _rel(a - b, a)


def _id_pi_star_pi(L: _Level):
    # T-bar Gamma_alpha (pi f) with Gamma_alpha applied spectrally to the sampled pi f
    lhs = L.op_bar.apply(gamma_sampled(L.pi_f_nodes, L.alpha))
    return _rel(lhs - L.f.values(L.V), lhs)


def _id_isometry(L: _Level):
    nf = l2_norm(L.dom, L.f)
    return abs(l2_norm(L.dom, L.pi_f_nodes) - nf) / nf


def _partner(L: _Level) -> AnalyticField:
    return L.cache["partner"]


def _id_adjoint(L: _Level):
    g = _partner(L)
    pistar = L.get("pistar", lambda: L.nodal_pi_bar.nodes_op.apply(gamma_alpha_field(g, L.alpha)))
    a = inner_product(L.dom, L.pi_f_nodes, g).coeffs[0]
    b = inner_product(L.dom, L.f, pistar).coeffs[0]
    return float(abs(a - b) / (l2_norm(L.dom, L.f) * l2_norm(L.dom, g)))


def _id_right_inverse(L: _Level):
    g = gamma_alpha_field(L.f, L.alpha)
    lhs = L.op.gamma_apply(g, "alpha")
    return _rel(lhs - g.values(L.V), lhs)


def _id_borel_pompeiu(L: _Level):
    fv = L.f.values(L.V)
    tg = L.op.apply(gamma_alpha_field(L.f, L.alpha))
    fb = L.F(L.f) if L.dom.boundary_nodes.shape[0] else 0
    return _rel(fv - fb - tg, fv)


def _id_monogenic_preservation(L: _Level):
    # f-bar in ker Gamma-bar: build it as a conjugate-kernel Cauchy transform
    h = L.cache.get("conj_monogenic")
    if h is None:
        return float("nan")
    jet = L.get("jet_h", lambda: L.op.jet(h, 2))
    lhs = gamma_from_jet(jet, L.alpha, "alpha_bar", "alpha")
    ref = gamma_from_jet(jet, L.alpha, "alpha_bar")
    return _rel(lhs, ref)


def _id_fixed_point(L: _Level):
    # least-squares fixed point of pi in span{blades, x_i blades}; report |pi f - f| / |f|
    def basis():
        out = []
        for A in range(8):
            e = np.zeros(8, complex)
            e[A] = 1.0
            out.append(AnalyticField.constant(3, e))
            for i in range(3):
                def val(P, i=i, e=e):
                    return P[:, i, None] * e[None, :]

                def grad(P, i=i, e=e):
                    g = np.zeros((P.shape[0], 3, 8), complex)
                    g[:, i] = e
                    return g

                def hess(P, e=e):
                    return np.zeros((P.shape[0], 3, 3, 8), complex)
                out.append(AnalyticField(3, val, grad, hess))
        return out

    B = basis()
    cols = []
    for b in B:
        jet = L.op.jet(b, 1)
        cols.append((gamma_from_jet(jet, L.alpha, "alpha_bar") - b.values(L.V)).ravel())
    M = np.stack(cols, axis=1)
    N = np.stack([b.values(L.V).ravel() for b in B], axis=1)
    # min |M c| / |N c| is the smallest singular value of M R^{-1}, N = QR
    R = np.linalg.qr(N, mode="r")
    X = np.linalg.solve(R.T, M.T).T
    return float(np.linalg.svd(X, compute_uv=False).min())


@dataclass(frozen=True)
class _Identity:
    name: str
    fn: Callable
    needs: str = "any"  # "any", "compact", "boundary", "global"
    kind: str = "check"
    description: str = ""


IDENTITIES: tuple = (
    _Identity("gamma_pi_eq_gamma_bar", _id_gamma_pi, "any", "check",
              "Gamma_a pi f = Gamma-bar_a f"),
    _Identity("pi_gamma_eq_gamma_bar_I_minus_F", _id_pi_gamma, "any", "check",
              "pi Gamma_a f = Gamma-bar_a (f - F f)"),
    _Identity("pi_gamma_without_F", _id_pi_gamma_ablation, "noncompact", "control",
              "pi Gamma_a f = Gamma-bar_a f (boundary term dropped)"),
    _Identity("F_pi_eq_pi_minus_T_gamma_bar", _id_F_pi, "boundary", "check",
              "F pi f = pi f - T Gamma-bar_a f"),
    _Identity("gamma_pi_minus_pi_eq_gamma_bar_F", _id_gamma_pi_minus_pi, "any", "check",
              "Gamma_a pi f - pi f = Gamma-bar_a F f"),
    _Identity("commutator_eq_gamma_bar_F", _id_commutator, "any", "info",
              "Gamma_a pi f - pi Gamma_a f = Gamma-bar_a F f"),
    _Identity("compact_pi_gamma_eq_gamma_bar", _id_compact_pi_gamma, "compact", "check",
              "pi Gamma_a g = Gamma-bar_a g"),
    _Identity("compact_gamma_pi_eq_pi", _id_compact_gamma_pi_is_pi, "compact", "check",
              "Gamma_a pi g = pi g"),
    _Identity("compact_pi_gamma_eq_gamma_pi", _id_compact_commute, "compact", "check",
              "pi Gamma_a g = Gamma_a pi g"),
    _Identity("pi_bar_pi_plus_boundary_eq_I", _id_pi_bar_pi_boundary, "any", "check",
              "pi-bar pi f + Gamma_a F-bar T f = f"),
    _Identity("pi_pi_bar_plus_boundary_eq_I", _id_pi_pi_bar_boundary, "any", "info",
              "pi pi-bar f + Gamma-bar_a F T-bar f = f"),
    _Identity("pi_bar_left_inverse", _id_left_inverse, "compact", "info",
              "pi-bar pi (Gamma_a g) = Gamma_a g"),
    _Identity("pi_bar_pi_commute", _id_commute_bar, "global", "info",
              "pi-bar pi f = pi pi-bar f"),
    _Identity("pi_star_pi_eq_I", _id_pi_star_pi, "compact", "info",
              "T-bar Gamma_a pi f = f"),
    _Identity("isometry", _id_isometry, "compact", "info",
              "| |pi f| - |f| | / |f|"),
    _Identity("adjoint", _id_adjoint, "compact", "info",
              "|<pi f, g> - <f, pi* g>|_0 / (|f| |g|)"),
    _Identity("right_inverse", _id_right_inverse, "any", "check",
              "Gamma_a T g = g"),
    _Identity("borel_pompeiu", _id_borel_pompeiu, "any", "check",
              "f = F f + T Gamma_a f"),
    _Identity("monogenic_to_monogenic", _id_monogenic_preservation, "boundary", "info",
              "Gamma-bar_a h = 0 implies Gamma_a pi h = 0"),
    _Identity("fixed_point_least_squares", _id_fixed_point, "any", "info",
              "min |pi f - f| / |f| over a low-degree span"),
)


def _applicable(ident: _Identity, compact: bool, dom: SphericalDomain) -> bool:
    has_bdry = dom.boundary_nodes.shape[0] > 0
    if ident.needs == "compact":
        return compact
    if ident.needs == "noncompact":
        return not compact and has_bdry
    if ident.needs == "boundary":
        return has_bdry
    if ident.needs == "global":
        return not has_bdry
    return True


def sample_points(theta0: Optional[float], count: int, seed: int = 0,
                  margin: float = 0.15) -> np.ndarray:
    """Random interior points, uniform in area, away from the boundary."""
    rng = np.random.default_rng(seed)
    top = np.pi - margin if theta0 is None else theta0 - margin
    z = rng.uniform(np.cos(top), np.cos(margin), count)
    phi = rng.uniform(0, 2 * np.pi, count)
    return spherical_to_cartesian(np.arccos(z), phi)


def verify_pi_identities(theta0: Optional[float], alpha, fields: dict,
                         ladder: Sequence[tuple[int, int]], cfg: TransformConfig,
                         sample: Optional[np.ndarray] = None, partner: Optional[Callable] = None,
                         identities: Optional[Sequence[str]] = None,
                         progress: Optional[Callable] = None) -> list[IdentityReport]:
    """Evaluate the identity suite for each test field along a refinement ladder.

    Parameters
    ----------
    theta0 : float or None
        Cap angle; ``None`` selects the whole sphere.
    fields : dict
        ``name -> (builder, compact)`` where ``builder(dom)`` returns an
        :class:`AnalyticField` (builders receive the domain so bumps can check
        their support) and ``compact`` marks compact support.
    ladder : sequence of ``(N_theta, N_phi)``, at least 3 entries.
    sample : array ``(m, 3)``, interior evaluation points.
    partner : callable ``dom -> AnalyticField``, second field for the
        adjoint check.
    identities : names to run (default all).

    Returns one :class:`IdentityReport` per identity and applicable field.
    Errors inside an identity mark only that report (residual ``nan``).
    """
    if len(ladder) < 3:
        raise ValueError("ladder needs at least 3 resolutions")
    cfg = cfg.with_alpha(alpha)
    alpha = cfg.kernel.alpha
    V = sample_points(theta0, 10) if sample is None else np.atleast_2d(sample)
    chosen = [i for i in IDENTITIES if identities is None or i.name in identities]
    reports: dict = {}
    for nt, nphi in ladder:
        dom = build_global(nt, nphi) if theta0 is None else build_cap(theta0, nt, nphi)
        for fname, (builder, compact) in fields.items():
            f = builder(dom)
            L = _Level(dom, f, alpha, cfg, V)
            if partner is not None:
                L.cache["partner"] = partner(dom)
            if dom.boundary_nodes.shape[0]:
                L.cache["conj_monogenic"] = _conj_monogenic(dom, alpha, cfg)
            for ident in chosen:
                if not _applicable(ident, compact, dom):
                    continue
                if ident.name == "adjoint" and partner is None:
                    continue
                try:
                    res = float(ident.fn(L))
                except (ArithmeticError, ValueError) as exc:  # noqa: PERF203
                    res = float("nan")
                    warnings.warn(f"{ident.name}/{fname}: {exc}", RuntimeWarning, stacklevel=2)
                key = (ident.name, fname)
                rep = reports.setdefault(key, IdentityReport(ident.name, fname, [], ident.kind,
                                                              ident.description))
                rep.ladder.append((dom.mesh_param, res))
                if progress is not None:
                    progress(ident.name, fname, (nt, nphi), dom.mesh_param, res)
    out = list(reports.values())
    for r in out:
        r.ladder.sort(key=lambda t: -t[0])
    return out


def _conj_monogenic(dom: SphericalDomain, alpha, cfg: TransformConfig) -> AnalyticField:
    """A field in the kernel of ``Gamma-bar_alpha = -Gamma_omega + conj(alpha)``.

    That kernel is the kernel of ``Gamma_omega - conj(alpha)``, i.e. left
    monogenics of order ``-conj(alpha)``; the Cauchy kernel of that order
    with its pole outside the cap is one.
    """
    from .integral_transforms import point_monogenic

    theta0 = np.pi if dom.theta0 is None else dom.theta0
    pole = spherical_to_cartesian(0.5 * (theta0 + np.pi), 0.4)
    c = np.zeros(1 << dom.n, complex)
    c[0], c[3] = 1.0, 0.4j
    return point_monogenic(pole, c, -np.conj(alpha), cfg)
