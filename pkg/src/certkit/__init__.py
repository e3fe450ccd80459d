"""Certificates for monotone Boolean functions from value queries."""

from .certify import (
    ArbitraryCertResult,
    CertifyConfig,
    CertifyResult,
    certify,
    certify_unknown_k,
    find_arbitrary_certificate,
    find_input_certificate,
    trim_certificate,
)
from .errors import (
    CertificationError,
    CertkitError,
    ConstantFunctionError,
    DimensionError,
    EnumerationBudgetExceeded,
    IterationCapExceeded,
    NotMonotoneError,
    SpecError,
    VerificationFailed,
)
from .exact import (
    ExactProfile,
    certificate_complexity_at,
    exact_certificate_stats,
    exact_critical_probability,
    exact_influences,
    exact_phi,
    exact_sensitivity,
    monotone_tables,
    russo_margulis_residual,
)
from .functions import (
    BooleanOracle,
    Certificate,
    FunctionSpec,
    build_function,
    from_callable,
    restrict,
    test_constant_monotone,
    verify_certificate,
)
from .learners import LabeledSample, certify_from_samples, draw_uniform_samples
from .pbias import (
    EstimationParams,
    InfluenceEstimates,
    estimate_influences,
    estimate_phi,
    find_critical_probability,
    find_half_point,
    sample_pbiased,
)

__version__ = "0.1.0"
