"""k-nearest-neighbor estimation of KL divergence and differential entropy,
with Monte-Carlo diagnostics for the regularity conditions behind the
estimators' asymptotic guarantees."""

from .errors import (
    CapacityError,
    DegenerateSampleError,
    DomainError,
    ModelParseError,
)
from .estimators import (
    EstimateReport,
    OrderSpec,
    entropy_estimate,
    kl_estimate,
    kl_estimate_equal_orders,
)
from .knn import BACKEND, HAVE_COMPILED_KERNEL
from .models import (
    Gaussian,
    UniformBox,
    entropy_closed_form,
    kl_closed_form,
    kl_numeric_oracle,
    parse_model,
)
from .streams import SeededStream

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "HAVE_COMPILED_KERNEL",
    "CapacityError",
    "DegenerateSampleError",
    "DomainError",
    "ModelParseError",
    "EstimateReport",
    "OrderSpec",
    "entropy_estimate",
    "kl_estimate",
    "kl_estimate_equal_orders",
    "Gaussian",
    "UniformBox",
    "entropy_closed_form",
    "kl_closed_form",
    "kl_numeric_oracle",
    "parse_model",
    "SeededStream",
    "__version__",
]
