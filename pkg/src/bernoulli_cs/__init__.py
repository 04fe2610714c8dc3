"""Optimized Bernoulli variable-density sampling for subsampled unitary compressed sensing."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    InfeasibleError,
    InsufficientMeasurementsError,
    InvalidInputError,
    ResourceExhaustedError,
    SamplingError,
)
from .rng import RngStream, stream_id  # noqa: E402
from .transforms import UnitaryOperator, dft1d, dft2d, haar1d, haar2d, haar_atoms, identity  # noqa: E402
from .coherence import (  # noqa: E402
    CoherenceVector,
    UnionOfSubspaces,
    coherence_dictionary,
    coherence_exact,
    coherence_samples,
)
from .weights import (  # noqa: E402
    WeightVector,
    eta_complexity,
    gamma_complexity,
    heuristic_marginal_weights,
    L_squared_curve,
    L_value,
    optimized_bernoulli_weights,
    sample_complexity_bound,
    with_replacement_weights,
)
from .sampling import (  # noqa: E402
    SamplingPlan,
    build_preconditioner,
    regularized_bernoulli_preconditioner,
    sample_bernoulli,
    sample_bernoulli_conditioned,
    sample_with_replacement,
    sample_wor_rejection,
    sample_wor_sequential,
)
from .operators import MeasurementOperator, add_noise, noise_factor, unit_truncate  # noqa: E402
from .analysis import rip_deviation, rip_success_probability, ToyExampleSpec  # noqa: E402
from .recovery import (  # noqa: E402
    RecoveryReport,
    SparsePriorConfig,
    geometric_mean_error,
    project_subspace_ls,
    recover_sparse,
)
from .experiments import ExperimentConfig, run_experiment  # noqa: E402
