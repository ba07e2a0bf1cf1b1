"""Secure distributed matrix multiplication over the reals and complexes.

Shares of both factors are evaluations of noise-padded polynomials on the
roots of unity; any recovery-threshold-sized set of worker products decodes
the true product, while any X workers together see only noise (to a
calibrated leakage level).  The package bundles the eight schemes, the noise
calibrator and leakage auditor, the Vandermonde conditioning bounds behind
the numerics, a local straggler simulator, and a TCP coordinator/worker mode.
"""

from .cluster import coordinate, ping, serve_worker
from .numerics import (
    cond_2,
    eval_laurent,
    interpolate_laurent,
    laurent_from_terms,
    matmul,
    relative_error,
    roots_of_unity,
)
from .schemes import (
    SCHEME_IDS,
    DecodingResidueError,
    EncodedShares,
    InsufficientResponsesError,
    SchemeParams,
    WorkerResponse,
    cost_model,
    decode,
    encode,
    exponent_layout,
    generator_matrices,
    multiply,
    recovery_threshold,
    worker_compute,
)
from .sharing import (
    LeakageReport,
    NestedCosetScheme,
    audit_scheme,
    calibrate_sigma2,
    leakage_bound_frobenius,
    leakage_bound_logdet,
    nested_coset_scheme,
    shamir_scheme,
    share,
)
from .simulator import RunConfig, RunResult, run_local, sample_inputs, sweep
from .vandermonde import (
    BoundReport,
    Pi,
    decompose_inverse,
    measure_subset,
    verify_bounds_exhaustive,
)

__version__ = "0.1.0"

__all__ = [
    "SCHEME_IDS",
    "BoundReport",
    "DecodingResidueError",
    "EncodedShares",
    "InsufficientResponsesError",
    "LeakageReport",
    "NestedCosetScheme",
    "Pi",
    "RunConfig",
    "RunResult",
    "SchemeParams",
    "WorkerResponse",
    "audit_scheme",
    "calibrate_sigma2",
    "cond_2",
    "coordinate",
    "cost_model",
    "decode",
    "decompose_inverse",
    "encode",
    "eval_laurent",
    "exponent_layout",
    "generator_matrices",
    "interpolate_laurent",
    "laurent_from_terms",
    "leakage_bound_frobenius",
    "leakage_bound_logdet",
    "matmul",
    "measure_subset",
    "multiply",
    "nested_coset_scheme",
    "ping",
    "recovery_threshold",
    "relative_error",
    "roots_of_unity",
    "run_local",
    "sample_inputs",
    "serve_worker",
    "shamir_scheme",
    "share",
    "sweep",
    "verify_bounds_exhaustive",
    "worker_compute",
]
