"""Oscillation-theoretic eigenvalue counting for Jacobi matrices and 1-D Schrodinger operators."""

from .applications import BargmannReport, SignChangeProfile, bargmann_bound, sign_change_profile
from .counting import (
    BoundsReport,
    CountResult,
    EigenvalueInterval,
    InfiniteCountPolicy,
    bounds_check,
    count_above,
    count_above_infinite,
    count_below,
    eig_bisect,
)
from .errors import BoundaryError, ConvergenceError, PoleError, SturmError, ValidationError
from .jacobi import (
    ConstantTail,
    JacobiOperator,
    PeriodicTail,
    PolySequenceEval,
    ScaledPolyValue,
    assemble_dense,
    eval_monic_sequence,
    strip_leading,
)
from .mfunction import MFunctionResult, green_corner, m_function, tail_m_function
from .prufer import (
    ComparisonReport,
    HalflinePolicy,
    Potential,
    ShootingState,
    ShootingTrace,
    StepControl,
    comparison_check,
    count_below_halfline,
    count_zeros,
    dirichlet_eigs,
    locate_zeros,
    shoot,
    shoot_trace,
    zero_trajectory_derivative,
)
from .renormalized import (
    RenormPolicy,
    WronskianTrace,
    count_renormalized_box,
    count_renormalized_halfline,
    derivative_residual,
    wronskian_trace,
)

__version__ = "0.1.0"
