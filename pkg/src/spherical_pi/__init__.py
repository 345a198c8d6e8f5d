"""Clifford-valued integral operators on spherical caps.

Cauchy kernels of order ``alpha`` on ``S^{n-1}``, the Teodorescu and Cauchy
transforms they generate, the pi operator ``Gamma-bar_alpha T`` with its
identity suite, and solvers for the inhomogeneous Dirac problem and the
spherical Beltrami equation.
"""
__version__ = "0.1.0"

from .clifford_core import Multivector, geometric_product, conjugate, norm
from .special_functions import KernelConfig, SingularityError, cauchy_kernel, gegenbauer
from .sphere_geometry import (AnalyticField, SampledField, SphericalDomain, build_cap,
                              build_global, bump_field)
from .spherical_operators import gamma_alpha, gamma_alpha_bar, gamma_omega, is_monogenic
from .integral_transforms import (TransformConfig, TransformOperator, cauchy_boundary,
                                  gamma_teodorescu, teodorescu)
from .pi_operator import IdentityReport, NodalPi, pi_apply, verify_pi_identities
from .solvers import BeltramiConfig, SolveTrace, solve_beltrami, solve_bvp

__all__ = [
    "Multivector", "geometric_product", "conjugate", "norm",
    "KernelConfig", "SingularityError", "cauchy_kernel", "gegenbauer",
    "AnalyticField", "SampledField", "SphericalDomain", "build_cap", "build_global", "bump_field",
    "gamma_alpha", "gamma_alpha_bar", "gamma_omega", "is_monogenic",
    "TransformConfig", "TransformOperator", "cauchy_boundary", "gamma_teodorescu", "teodorescu",
    "IdentityReport", "NodalPi", "pi_apply", "verify_pi_identities",
    "BeltramiConfig", "SolveTrace", "solve_beltrami", "solve_bvp",
]
