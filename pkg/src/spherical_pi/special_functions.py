"""Pochhammer symbols, Gauss hypergeometric series, Gegenbauer functions and
the two-point Cauchy kernel of the spherical Dirac operator.

The kernel is represented through two scalar coefficient functions of
``t = omega . upsilon``::

    Psi(omega, upsilon) = s(t) + b(t) * (upsilon ^ omega)

which is all the quadrature code needs.  Two forms are available:

``"corrected"`` (default)
    ``c [C_a^{n/2}(-t) - (upsilon omega) C_{a-1}^{n/2}(-t)]``.  This is the
    fundamental solution of ``Gamma_alpha`` acting on ``upsilon``; it is
    singular at ``omega = upsilon`` and regular at the antipode.
``"printed"``
    ``c [C_a^{(n+1)/2}(t) - (omega upsilon) C_{a-1}^{(n+1)/2}(t)]``, kept for
    comparison.  It is singular at the antipode and is not annihilated by
    ``Gamma_alpha`` away from it.

Here ``c = pi / (sigma_{n-1} sin(pi a))``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy import special as sp

from .clifford_core import Multivector, bivector_index, grade_project, conjugate

__all__ = [
    "KernelConfig",
    "KernelValue",
    "SingularityError",
    "pochhammer",
    "hyp2f1_product",
    "hyp2f1_array",
    "gegenbauer",
    "gegenbauer_array",
    "gegenbauer_dz_array",
    "sphere_area",
    "kernel_coefficients",
    "cauchy_kernel",
    "cauchy_kernel_conjugate",
    "cauchy_kernel_dz",
]

KERNEL_FORMS = ("corrected", "printed")


class SingularityError(ValueError):
    """Raised at poles of the kernel prefactor or on the kernel's singular set."""


@dataclass(frozen=True)
class KernelConfig:
    """Parameters of the Cauchy kernel.

    Attributes
    ----------
    alpha : complex
        Degree; must stay away from the integers (poles of ``1/sin(pi a)``).
    n : int
        Ambient dimension of the sphere ``S^{n-1}``.
    max_terms : int
        Series truncation cap.
    series_tol : float
        Relative tail tolerance for stopping.
    antipode_guard : float
        Minimum geodesic-type gap ``1 -+ omega.upsilon`` to the kernel's
        singular point (the antipode for ``"printed"``, coincidence for
        ``"corrected"``) accepted by the pointwise evaluators.
    form : str
        ``"corrected"`` or ``"printed"``.
    """

    alpha: complex = 0.5
    n: int = 3
    max_terms: int = 400
    series_tol: float = 1e-16
    antipode_guard: float = 1e-12
    form: str = "corrected"

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if not self.series_tol > 0:
            raise ValueError("series_tol must be positive")
        if not self.antipode_guard > 0:
            raise ValueError("antipode_guard must be positive")
        if self.n < 2:
            raise ValueError("kernel needs n >= 2")
        if self.form not in KERNEL_FORMS:
            raise ValueError(f"form must be one of {KERNEL_FORMS}")
        if abs(self.alpha - round(self.alpha.real)) < 1e-9:
            raise SingularityError(f"alpha={self.alpha} is at a pole of 1/sin(pi alpha)")

    def with_(self, **kw) -> "KernelConfig":
        return replace(self, **kw)

    @property
    def order(self) -> float:
        """Gegenbauer order lambda used by the chosen form."""
        return self.n / 2 if self.form == "corrected" else (self.n + 1) / 2

    @property
    def prefactor(self) -> complex:
        return np.pi / (sphere_area(self.n) * np.sin(np.pi * self.alpha))


@dataclass(frozen=True)
class KernelValue:
    value: Multivector
    terms_used: int
    converged: bool


def pochhammer(x: complex, k: int) -> complex:
    """Rising factorial ``(x)_k = x (x+1) ... (x+k-1)``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    out = 1.0 + 0j
    for i in range(1, k + 1):
        out *= x + i - 1
    return out if np.iscomplexobj(x) or isinstance(x, complex) else out.real


def _is_nonpos_int(x: complex, tol: float = 1e-12) -> bool:
    x = complex(x)
    return abs(x.imag) < tol and x.real < 0.5 and abs(x.real - round(x.real)) < tol


def hyp2f1_product(a: complex, b: complex, c: complex, d: complex,
                   cfg: KernelConfig | None = None) -> tuple[complex, int, bool]:
    """Gauss series ``F(a, b; c; d)`` summed in product form.

    Term ``k`` is ``prod_{i<=k} (ab + (i-1)(a+b) + (i-1)^2)/(c+i-1) * d^k/k!``;
    the ``k = 0`` term is 1.

    Returns
    -------
    value, terms, converged
        ``terms`` counts the summed terms beyond ``k = 0``.  ``converged`` is
        False when the cap was hit or five consecutive terms grew.
    """
    cfg = cfg or KernelConfig()
    if abs(d) > 1 + 1e-12:
        raise ValueError("|d| must not exceed 1")
    ab, apb = a * b, a + b
    term = 1.0 + 0j
    total = 1.0 + 0j
    growth = 0
    prev = abs(term)
    for k in range(1, cfg.max_terms + 1):
        den = c + k - 1
        if abs(den) == 0:
            raise ValueError(f"c={c} hits a pole at term {k}")
        term = term * (ab + (k - 1) * apb + (k - 1) ** 2) / den * d / k
        total += term
        at = abs(term)
        if at == 0 or at <= cfg.series_tol * abs(total):
            return total, k, True
        growth = growth + 1 if at > prev else 0
        prev = at
        if growth >= 5:
            return total, k, False
    return total, cfg.max_terms, False


@lru_cache(maxsize=256)
def _series_coeffs(a, b, c, max_terms):
    # c_k = (a)_k (b)_k / ((c)_k k!), k = 0..max_terms
    k = np.arange(max_terms)
    ratio = (a + k) * (b + k) / ((c + k) * (k + 1))
    return np.concatenate([[1.0 + 0j], np.cumprod(ratio)])


def _n_terms(coef, wmax, tol):
    # terms needed so that |c_k| wmax^k stays below tol times the largest term
    if wmax == 0:
        return 1
    with np.errstate(under="ignore"):
        mags = np.abs(coef) * np.power(wmax, np.arange(coef.size))
    big = np.flatnonzero(mags > tol * mags.max())
    return int(big[-1]) + 2


def _horner(coef, w):
    out = np.full(w.shape, coef[-1], dtype=complex)
    for c in coef[-2::-1]:
        out = out * w + c
    return out


def _series_array(a, b, c, w, max_terms, tol):
    # Vectorized product-form series; returns (sum, converged mask).
    w = np.asarray(w, dtype=complex)
    coef = _series_coeffs(complex(a), complex(b), complex(c), int(max_terms))
    wmax = float(np.max(np.abs(w))) if w.size else 0.0
    K = min(_n_terms(coef, wmax, tol), coef.size)
    total = _horner(coef[:K], w)
    done = np.full(w.shape, K < coef.size)
    return total, done


@lru_cache(maxsize=256)
def _log_coeffs(a, b, m, max_terms):
    k = np.arange(max_terms + 1)
    ratio = (a + k[:-1]) * (b + k[:-1]) / ((k[:-1] + 1) * (k[:-1] + 1 + m))
    coef = np.concatenate([[1.0 / sp.factorial(m) + 0j], np.cumprod(ratio) / sp.factorial(m)])
    dig = -sp.psi(k + 1.0) - sp.psi(k + m + 1.0) + sp.psi(a + k) + sp.psi(b + k)
    return coef, coef * dig


def _gamma_ratio(num, den):
    """prod Gamma(num) / prod Gamma(den) via log-Gamma; zero at denominator poles."""
    for x in den:
        if _is_nonpos_int(x):
            return 0.0 + 0j
    for x in num:
        if _is_nonpos_int(x):
            raise SingularityError(f"Gamma pole at {x}")
    lg = sum(sp.loggamma(complex(x)) for x in num) - sum(sp.loggamma(complex(x)) for x in den)
    return complex(np.exp(lg))


def _log_case_tail(a, b, m, w, max_terms, tol):
    # sum_k (a)_k (b)_k / (k! (k+m)!) w^k [ln w - psi(k+1) - psi(k+m+1) + psi(a+k) + psi(b+k)]
    w = np.asarray(w, dtype=complex)
    coef, cdig = _log_coeffs(complex(a), complex(b), int(m), int(max_terms))
    wmax = float(np.max(np.abs(w))) if w.size else 0.0
    K = min(max(_n_terms(coef, wmax, tol), _n_terms(cdig, wmax, tol)), coef.size)
    return np.log(w) * _horner(coef[:K], w) + _horner(cdig[:K], w)


def hyp2f1_array(a: complex, b: complex, c: complex, d, one_minus_d=None,
                 max_terms: int = 400, tol: float = 1e-16) -> np.ndarray:
    """Vectorized ``F(a, b; c; d)`` for real ``d`` in ``[0, 1)``.

    The direct series is used for ``d <= 1/2``.  Closer to 1 the argument is
    transformed to ``1 - d``, which may be passed separately to keep it
    accurate when it is tiny.  Terminating series (``a`` or ``b`` a
    non-positive integer) are always summed directly.
    """
    d = np.asarray(d, dtype=float)
    w = 1.0 - d if one_minus_d is None else np.asarray(one_minus_d, dtype=float)
    out = np.empty(d.shape, dtype=complex)
    near = d > 0.5
    if _is_nonpos_int(a) or _is_nonpos_int(b):
        near = np.zeros_like(near)
    if np.any(~near):
        out[~near] = _series_array(a, b, c, d[~near], max_terms, tol)[0]
    if np.any(near):
        out[near] = _hyp_near_one(a, b, c, w[near], max_terms, tol)
    return out


def _hyp_near_one(a, b, c, w, max_terms, tol):
    s = c - a - b
    sr = round(s.real) if isinstance(s, complex) else round(s)
    if abs(s - sr) > 1e-12:
        g1 = _gamma_ratio([c, s], [c - a, c - b])
        g2 = _gamma_ratio([c, -s], [a, b])
        f1 = _series_array(a, b, a + b - c + 1, w, max_terms, tol)[0]
        f2 = _series_array(c - a, c - b, s + 1, w, max_terms, tol)[0]
        return g1 * f1 + g2 * np.power(w.astype(complex), s) * f2
    m = -int(sr)
    if m < 0:
        # Euler: F(a,b;c;d) = (1-d)^{c-a-b} F(c-a, c-b; c; d), which is the log case
        return np.power(w, -m) * _hyp_near_one(c - a, c - b, c, w, max_terms, tol)
    # c = a + b - m, logarithmic case
    fin = np.zeros(w.shape, dtype=complex)
    term = np.ones(w.shape, dtype=complex)
    for k in range(m):
        if k > 0:
            term = term * (a - m + k - 1) * (b - m + k - 1) / (k * (1 - m + k - 1)) * w
        fin = fin + term
    g1 = _gamma_ratio([m, a + b - m], [a, b]) if m > 0 else 0.0
    g2 = _gamma_ratio([a + b - m], [a - m, b - m])
    tail = _log_case_tail(a, b, m, w, max_terms, tol)
    return g1 * np.power(w.astype(complex), -m) * fin - (-1) ** m * g2 * tail


def _gegenbauer_prefactor(alpha, lam):
    return _gamma_ratio([alpha + 2 * lam], [alpha + 1, 2 * lam])


def gegenbauer(alpha: complex, lam: complex, z: complex,
               cfg: KernelConfig | None = None) -> tuple[complex, int, bool]:
    """Gegenbauer function ``C_alpha^lambda(z)`` from the product-form series.

    ``C = Gamma(a+2l)/(Gamma(a+1) Gamma(2l)) F(-a, a+2l; l+1/2; (1-z)/2)``.

    Returns ``(value, terms, converged)``.
    """
    cfg = cfg or KernelConfig()
    if _is_nonpos_int(2 * lam):
        raise SingularityError("2*lambda is a non-positive integer")
    d = (1 - z) / 2
    if abs(d) > 1 + 1e-9:
        raise ValueError("|1 - z|/2 must not exceed 1")
    pref = _gegenbauer_prefactor(alpha, lam)
    f, k, ok = hyp2f1_product(-alpha, alpha + 2 * lam, lam + 0.5, min(abs(d), 1.0) * np.sign(d) if np.isreal(d) else d, cfg)
    return pref * f, k, ok


def gegenbauer_array(alpha: complex, lam: float, one_minus_z, one_plus_z=None,
                     max_terms: int = 400, tol: float = 1e-16) -> np.ndarray:
    """Vectorized ``C_alpha^lambda(z)`` for real ``z`` in ``(-1, 1]``.

    Takes ``1 - z`` (and optionally ``1 + z``) rather than ``z`` so that both
    ends of the interval keep full relative accuracy.
    """
    omz = np.asarray(one_minus_z, dtype=float)
    opz = 2.0 - omz if one_plus_z is None else np.asarray(one_plus_z, dtype=float)
    pref = _gegenbauer_prefactor(alpha, lam)
    if pref == 0:
        return np.zeros(omz.shape, dtype=complex)
    f = hyp2f1_array(-alpha, alpha + 2 * lam, lam + 0.5, omz / 2, opz / 2, max_terms, tol)
    return pref * f


def gegenbauer_dz_array(alpha, lam, one_minus_z, one_plus_z=None, **kw) -> np.ndarray:
    """``d/dz C_alpha^lambda = 2 lambda C_{alpha-1}^{lambda+1}``."""
    return 2 * lam * gegenbauer_array(alpha - 1, lam + 1, one_minus_z, one_plus_z, **kw)


def sphere_area(n: int) -> float:
    """Surface area ``2 pi^{n/2} / Gamma(n/2)`` of the unit sphere in R^n."""
    if n < 2:
        raise ValueError("sphere_area needs n >= 2")
    return float(2 * np.pi ** (n / 2) / sp.gamma(n / 2))


def kernel_coefficients(cfg: KernelConfig, one_minus_t, one_plus_t, derivative: bool = False):
    """Scalar coefficient functions of the kernel.

    Parameters
    ----------
    cfg : KernelConfig
    one_minus_t, one_plus_t : array_like
        ``1 - t`` and ``1 + t`` with ``t = omega . upsilon``; pass values
        computed from ``|upsilon -+ omega|^2 / 2`` for accuracy.
    derivative : bool
        Also return ``ds/dt`` and ``db/dt``.

    Returns
    -------
    s, b[, ds, db] : ndarray
        ``Psi = s + b (upsilon ^ omega)``.
    """
    omt = np.asarray(one_minus_t, dtype=float)
    opt = np.asarray(one_plus_t, dtype=float)
    t = 0.5 * (opt - omt)
    a, lam, c = cfg.alpha, cfg.order, cfg.prefactor
    kw = dict(max_terms=cfg.max_terms, tol=cfg.series_tol)
    if cfg.form == "corrected":
        # argument z = -t: 1 - z = 1 + t
        A = gegenbauer_array(a, lam, opt, omt, **kw)
        B = gegenbauer_array(a - 1, lam, opt, omt, **kw)
        s, b = c * (A + t * B), -c * B
        if not derivative:
            return s, b
        dA = -gegenbauer_dz_array(a, lam, opt, omt, **kw)
        dB = -gegenbauer_dz_array(a - 1, lam, opt, omt, **kw)
        return s, b, c * (dA + B + t * dB), -c * dB
    A = gegenbauer_array(a, lam, omt, opt, **kw)
    B = gegenbauer_array(a - 1, lam, omt, opt, **kw)
    s, b = c * (A + t * B), c * B
    if not derivative:
        return s, b
    dA = gegenbauer_dz_array(a, lam, omt, opt, **kw)
    dB = gegenbauer_dz_array(a - 1, lam, omt, opt, **kw)
    return s, b, c * (dA + B + t * dB), c * dB


def _as_unit(p) -> np.ndarray:
    if isinstance(p, Multivector):
        x = np.array([p.coeffs[1 << i].real for i in range(p.n)])
    else:
        x = np.asarray(getattr(p, "coords", p), dtype=float)
    if abs(np.dot(x, x) - 1) > 1e-10:
        raise ValueError("point is not on the unit sphere")
    return x


def _wedge(u: np.ndarray, w: np.ndarray) -> Multivector:
    n = u.size
    return Multivector(n, {bivector_index(i, j): u[i] * w[j] - u[j] * w[i]
                           for i, j in combinations(range(n), 2)})


def _gaps(w, u):
    return 0.5 * np.dot(u - w, u - w), 0.5 * np.dot(u + w, u + w)


def _guard(cfg, omt, opt):
    gap = omt if cfg.form == "corrected" else opt
    if gap <= cfg.antipode_guard:
        where = "coincidence" if cfg.form == "corrected" else "antipode"
        raise SingularityError(f"point pair too close to the kernel singularity ({where})")


def _series_meta(cfg, omt, opt):
    # Terms/convergence of the defining series evaluated directly.
    lam = cfg.order
    d = (opt if cfg.form == "corrected" else omt) / 2
    used, ok = 0, True
    for deg in (cfg.alpha, cfg.alpha - 1):
        _, k, c = hyp2f1_product(-deg, deg + 2 * lam, lam + 0.5, d, cfg)
        used, ok = max(used, k), ok and c
    return used, ok


def cauchy_kernel(omega, upsilon, cfg: KernelConfig) -> KernelValue:
    """Two-point kernel ``Psi(omega, upsilon)`` as a scalar + bivector multivector.

    ``terms_used``/``converged`` describe the direct product-form series; the
    returned value itself uses the connection formula near the singular
    point, so it stays accurate where the direct series is slow or diverges.
    """
    w, u = _as_unit(omega), _as_unit(upsilon)
    if w.size != cfg.n or u.size != cfg.n:
        raise ValueError("dimension mismatch between points and config")
    omt, opt = _gaps(w, u)
    _guard(cfg, omt, opt)
    s, b = kernel_coefficients(cfg, omt, opt)
    val = Multivector.scalar(cfg.n, complex(s)) + complex(b) * _wedge(u, w)
    used, ok = _series_meta(cfg, omt, opt)
    for k in range(cfg.n + 1):
        if k not in (0, 2):
            assert not np.any(grade_project(val, k).coeffs), "kernel left grades {0, 2}"
    return KernelValue(val, used, ok)


def cauchy_kernel_conjugate(omega, upsilon, cfg: KernelConfig) -> KernelValue:
    """Clifford conjugate of :func:`cauchy_kernel`."""
    kv = cauchy_kernel(omega, upsilon, cfg)
    return KernelValue(conjugate(kv.value), kv.terms_used, kv.converged)


def cauchy_kernel_dz(omega, upsilon, cfg: KernelConfig) -> tuple[Multivector, list[Multivector]]:
    """Derivatives of the kernel.

    Returns
    -------
    dpsi_dt : Multivector
        ``ds/dt + db/dt (upsilon ^ omega)``, derivative in ``t = omega.upsilon``
        with the bivector factor held fixed.
    partials : list of Multivector
        Ambient partials ``d Psi / d upsilon_j`` for ``j = 0..n-1``.
    """
    w, u = _as_unit(omega), _as_unit(upsilon)
    omt, opt = _gaps(w, u)
    _guard(cfg, omt, opt)
    s, b, ds, db = (complex(x) for x in kernel_coefficients(cfg, omt, opt, derivative=True))
    wedge = _wedge(u, w)
    dpsi = Multivector.scalar(cfg.n, ds) + db * wedge
    partials = []
    for j in range(cfg.n):
        ej = np.zeros(cfg.n)
        ej[j] = 1.0
        partials.append(w[j] * dpsi + b * _wedge(ej, w))
    return dpsi, partials
