"""dualcert: certified l-infinity robustness for S-curve networks.

Bounds come from per-neuron linear relaxations whose tangency points are
guided by witnessed under-estimates of each neuron's reachable
pre-activation interval, propagated backward to the input box.
"""

__version__ = "0.1.0"

from .activations import (
    KINDS,
    NoSignChangeError,
    TangentLine,
    chord_slope,
    crossing_tangent,
    derivative,
    tangent_at,
    value,
)
from .model import (
    AffineLayer,
    InputRegion,
    Network,
    NetworkFormatError,
    forward,
    load_network,
    predict,
    preactivation,
    preactivation_gradient,
    save_network,
)
from .propagation import (
    LayerBounds,
    SymbolicBound,
    concretize,
    margin_lower_bounds,
    output_margin_lower_bound,
    propagate,
)
from .relaxation import DualDomain, LinearRelaxation, relax_arrays, relax_dual, relax_single
from .synth import random_inputs, random_network
from .underapprox import UnderBounds, UnderConfig, combine, compute_under, gradient_under, sample_under
from .verifier import (
    CertifyResult,
    DatasetSummary,
    VerifierConfig,
    VerifyOutcome,
    certify,
    certify_dataset,
    verify_at,
)

__all__ = [
    "__version__",
    "KINDS",
    "NoSignChangeError",
    "TangentLine",
    "chord_slope",
    "crossing_tangent",
    "derivative",
    "tangent_at",
    "value",
    "AffineLayer",
    "InputRegion",
    "Network",
    "NetworkFormatError",
    "forward",
    "load_network",
    "predict",
    "preactivation",
    "preactivation_gradient",
    "save_network",
    "LayerBounds",
    "SymbolicBound",
    "concretize",
    "margin_lower_bounds",
    "output_margin_lower_bound",
    "propagate",
    "DualDomain",
    "LinearRelaxation",
    "relax_arrays",
    "relax_dual",
    "relax_single",
    "random_inputs",
    "random_network",
    "UnderBounds",
    "UnderConfig",
    "combine",
    "compute_under",
    "gradient_under",
    "sample_under",
    "CertifyResult",
    "DatasetSummary",
    "VerifierConfig",
    "VerifyOutcome",
    "certify",
    "certify_dataset",
    "verify_at",
]
