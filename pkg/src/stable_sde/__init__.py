"""Simulation of SDEs driven by symmetric alpha-stable processes.

The package covers driver sampling (:mod:`.driver`), coefficients with
condition certificates and mollifier families (:mod:`.coefficients`,
:mod:`.catalog`), generator quadrature (:mod:`.generator`), the
Euler-Maruyama engine (:mod:`.engine`) and Monte Carlo studies
(:mod:`.experiments`).
"""

from .coefficients import (
    CoefficientA,
    CoefficientC,
    CoefficientSequence,
    Modulus,
    MollifierFamily,
    SamplePlan,
    build_mollifier,
    check_certificate,
    solve_a_sequence,
)
from .catalog import build_coefficient, build_sequence
from .driver import (
    IncrementGrid,
    ReplicationSeed,
    StableParams,
    coarsen,
    integrated_density_sup,
    sample_increments,
    sample_standard_stable,
    transition_density,
)
from .engine import CauchyBudget, Partition, PathGrid, cauchy_construction, coupled_run, eta, euler_maruyama
from .errors import (
    AlignmentError,
    CertificateError,
    ConfigError,
    ContractError,
    FeasibilityError,
    GridError,
    NumericalError,
    ParameterError,
    StableSDEError,
)
from .experiments import (
    ErrorTable,
    TailReport,
    convergence_study,
    mc_estimate,
    moment_diagnostic,
    stability_study,
    stability_study_bo,
    sup_error_beta,
    tail_check,
)
from .generator import QuadratureSpec, apply_generator, k_alpha, verify_identity

__version__ = "0.1.0"
