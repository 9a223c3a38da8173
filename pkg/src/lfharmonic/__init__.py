"""Harmonic analysis on the ring of integers of a local field (Q_p and
F_q((X))): characters, fast transforms, Dirichlet and modified kernels,
weighted partial sums, A_p weights, maximal operators and shift-invariant
spaces, each reduced to finite, checkable computations."""

from __future__ import annotations

from .errors import (
    DomainError,
    LocalFieldError,
    NonIntegrableError,
    ParameterError,
    PrecisionError,
    ResolutionError,
    UnsupportedError,
    WindowError,
)
from .field import (
    Ball,
    BallRelation,
    CosetIndex,
    FieldParams,
    FqElem,
    LocalElement,
    ball_relation,
    elem_add,
    elem_mul,
    fq_add,
    fq_mul,
    haar_measure,
    trace,
    u_of,
)
from .characters import CharacterSystem, chi, chi_n
from .functions import (
    FourierCoeffs,
    SampledFunction,
    constancy_dual_check,
    fourier,
    indicator,
    inverse_fourier,
    lp_norm,
)
from .kernels import (
    KernelOperator,
    apply_Sn,
    apply_Tn,
    dirichlet,
    dirichlet_recursion_check,
    kernel_constancy_check,
    kernel_operator,
    modified_kernel,
    opnorm_lower_bound_Lp,
    weighted_opnorm_L2,
)
from .weights import (
    ApReport,
    PowerWeight,
    SampledWeight,
    Weight,
    a_infty_probe,
    ap_characteristic,
    doubling_ratio,
    power_weight_ball_mass,
    reverse_holder_probe,
)
from .maximal import buckley_experiment, m_s, m_to_sharp_probe, maximal, sharp_maximal, tn_sharp_probe
from .shift_invariant import (
    PhiSpec,
    SchauderReport,
    TilingSpec,
    a2_check,
    biorthogonality_check,
    canonical_dual,
    periodize,
    schauder_verdict,
    spectral_gram,
    tiling_check,
)
from .cli import report_schema_version

__version__ = "0.1.0"
