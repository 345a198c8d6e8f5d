"""Reproducible test fields for the verification suites and the CLI."""
from __future__ import annotations

from typing import Optional

import numpy as np

from .sphere_geometry import AnalyticField, SphericalDomain, bump_field, spherical_to_cartesian

__all__ = ["smooth_field", "bump", "partner_bump", "scalar_field"]


def _weights(seed: Optional[int], k: int) -> np.ndarray:
    if seed is None:
        return np.ones(k)
    return np.random.default_rng(seed).uniform(0.5, 1.5, k)


def smooth_field(seed: Optional[int] = None) -> AnalyticField:
    """Non-compact field ``a exp(z) x + b (y^2 + 0.3 z) e12 + c sin(x + y) e1``.

    ``seed`` draws the weights ``a, b, c`` from ``[0.5, 1.5]`` (all 1 without it).
    Exact first and second partials are provided.
    """
    a, b, c = _weights(seed, 3)

    def val(P):
        o = np.zeros((len(P), 8), complex)
        o[:, 0] = a * np.exp(P[:, 2]) * P[:, 0]
        o[:, 3] = b * (P[:, 1] ** 2 + 0.3 * P[:, 2])
        o[:, 1] = c * np.sin(P[:, 0] + P[:, 1])
        return o

    def grad(P):
        o = np.zeros((len(P), 3, 8), complex)
        e = np.exp(P[:, 2])
        o[:, 0, 0] = a * e
        o[:, 2, 0] = a * e * P[:, 0]
        o[:, 1, 3] = 2 * b * P[:, 1]
        o[:, 2, 3] = 0.3 * b
        cs = c * np.cos(P[:, 0] + P[:, 1])
        o[:, 0, 1] = cs
        o[:, 1, 1] = cs
        return o

    def hess(P):
        o = np.zeros((len(P), 3, 3, 8), complex)
        e = np.exp(P[:, 2])
        o[:, 0, 2, 0] = o[:, 2, 0, 0] = a * e
        o[:, 2, 2, 0] = a * e * P[:, 0]
        o[:, 1, 1, 3] = 2 * b
        sn = -c * np.sin(P[:, 0] + P[:, 1])
        for i in (0, 1):
            for j in (0, 1):
                o[:, i, j, 1] = sn
        return o

    return AnalyticField(3, val, grad, hess)


def bump(dom: SphericalDomain, seed: Optional[int] = None) -> AnalyticField:
    """Polynomial bump ``(1 - q)^4`` of radius 0.75 around ``(theta, phi) = (0.25, 1)``.

    Multivector weight ``1 + 0.5 e12 + 0.3i e1``, blade-wise rescaled by ``seed``.
    """
    w = _weights(seed, 3)
    coef = np.zeros(8, complex)
    coef[0], coef[3], coef[1] = w[0], 0.5 * w[1], 0.3j * w[2]
    return bump_field(dom, spherical_to_cartesian(0.25, 1.0), 0.75, coef, "poly", 4)


def partner_bump(dom: SphericalDomain, seed: Optional[int] = None) -> AnalyticField:
    """Second bump (radius 0.7 around ``(0.3, 3.0)``) for two-field checks."""
    w = _weights(None if seed is None else seed + 1, 2)
    coef = np.zeros(8, complex)
    coef[0], coef[5] = 0.7 * w[0], w[1]
    return bump_field(dom, spherical_to_cartesian(0.3, 3.0), 0.7, coef, "poly", 4)


def scalar_field(value: complex, n: int = 3) -> AnalyticField:
    """Constant scalar field."""
    c = np.zeros(1 << n, complex)
    c[0] = value
    return AnalyticField.constant(n, c)
