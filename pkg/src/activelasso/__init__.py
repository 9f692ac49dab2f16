"""Active-set accelerated solvers for L1-penalized regression.

The library minimizes F(x) = f(x) + eta ||x||_1 for least-squares and
logistic losses.  Plain solves call one of three inner solvers directly;
hybrid solves wrap them in ``run_active_solver``, which keeps most
coordinates pinned at zero and releases only the most promising few
hundred per round, making each inner call cheap on sparse problems.
"""

from .angles import (
    VectorFamily,
    angle_boost,
    cap_probability_estimate,
    cap_probability_lower_bound,
    orthonormal_family_with_cosine,
    pair_combine,
    volume_condition,
)
from .bench import (
    BenchRecord,
    EtaSelection,
    bench_run,
    grad0_sup_norm,
    kfold_cv,
    select_eta,
    support_f1,
    validation_mse,
    write_records_csv,
    write_records_jsonl,
)
from .datagen import (
    Dataset,
    StandardizationParams,
    binary_ensemble,
    correlated_dataset,
    gaussian_ensemble,
    noisy_regression_dataset,
    observe,
    signal_recovery_dataset,
    spike_signal,
    split_rows,
    standardize,
    synthetic_logistic_dataset,
)
from .driver import (
    DriverConfig,
    DriverTrace,
    TraceRow,
    initial_active_set,
    run_active_solver,
    support,
    tau_default,
    update_active_set,
)
from .kkt import (
    EligibilityReport,
    SubgradientBox,
    eligibility,
    is_optimal,
    kkt_residual,
    subgradient_box,
)
from .libsvm_io import (
    LibsvmFormatError,
    read_libsvm,
    read_sidecar,
    save_dataset,
    write_libsvm,
    write_sidecar,
)
from .problem import (
    KIND_LOGISTIC,
    KIND_LS,
    ProblemInstance,
    embed,
    full_objective,
    restrict,
    smooth_gradient,
    smooth_value,
    soft_threshold,
    value_and_gradient,
)
from .solvers import (
    ADMM,
    COORDINATE_DESCENT,
    GPSR_BB,
    STATUS_CONVERGED,
    STATUS_MAX_ITER,
    TOLERANCE_TIERS,
    SolveReport,
    SolverConfig,
    SolverDivergenceError,
    admm_lasso_solve,
    cd_lasso_solve,
    cd_logistic_solve,
    gpsr_bb_solve,
    solve,
    tier_config,
)

__version__ = "0.1.0"
