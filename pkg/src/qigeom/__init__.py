"""Monotone quantum metrics and the group actions whose fundamental fields are their gradients."""

from ._accel import BACKEND
from .actions import (
    CotangentElement,
    FieldKind,
    GLElement,
    act,
    cotangent_multiply,
    expectation,
    field,
    fundamental_field,
    one_parameter_element,
)
from .errors import (
    ContractError,
    DomainError,
    FaithfulnessError,
    HermiticityError,
    ParseError,
    QIGError,
    ShapeError,
    StepTooLargeError,
    ValidationError,
)
from .metrics import (
    DivergenceName,
    MetricName,
    divergence,
    metric_eval,
    metric_fd,
    metric_gradient,
    metric_kernel,
)
from .operators import (
    FaithfulState,
    HermitianOperator,
    RandomSpec,
    SpectralDecomposition,
    TangentVector,
    anticommutator_solve,
    apply_matrix_function,
    dexp_direction,
    make_state,
    spectral_decompose,
)
from .io import emit_report, load_matrix, save_matrix
from .sampling import sample_random
from .verify import (
    CheckReport,
    SuiteConfig,
    bracket_fd,
    calibrate_commutator_order,
    check_commutation,
    check_degeneracies,
    check_gradient_identity,
    check_isometry,
    check_orbit_flow,
    run_suite,
)

__version__ = "0.1.0"
