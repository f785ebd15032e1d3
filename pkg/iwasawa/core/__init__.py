"""Core exact-arithmetic Iwasawa theory functionality."""

from .bockstein import PerfectComplex, bockstein_cohomology, bockstein_euler_char
from .characters import DirichletCharacter
from .lfunctions import BranchSeries, build_kl_series, mu_lambda_invariants
from .models import JobSpec, Report
from .modules import ElementaryModule, euler_characteristic, gamma_cohomology_orders
from .padic import CoeffRing, make_coeff_ring
from .power_series import PowerSeries, weierstrass_prep
from .runner import JobRunner, render

__all__ = [
    "BranchSeries",
    "CoeffRing",
    "DirichletCharacter",
    "ElementaryModule",
    "JobRunner",
    "JobSpec",
    "PerfectComplex",
    "PowerSeries",
    "Report",
    "bockstein_cohomology",
    "bockstein_euler_char",
    "build_kl_series",
    "euler_characteristic",
    "gamma_cohomology_orders",
    "make_coeff_ring",
    "mu_lambda_invariants",
    "render",
    "weierstrass_prep",
]
