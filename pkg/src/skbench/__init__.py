"""Steps-to-quality benchmarking of classical and quantum-simulated
heuristics for the Sherrington-Kirkpatrick spin glass."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    EnumerationCapError,
    IneligibleInstanceError,
    SkInstance,
    SpinConfig,
    Spectrum,
    energy,
    energy_table,
    exact_spectrum,
    generate_instance,
    instance_from_json,
    instance_to_json,
    load_instance,
    ratio_gap,
    save_instance,
)
from .classical import (  # noqa: F401
    AnnealSchedule,
    GibbsDist,
    MarkovMatrix,
    bit_flip_neighbor,
    brute_force_steps,
    gibbs_distribution,
    mh_anneal,
    mh_batch_run,
    random_sampling_trajectory,
    spectral_gap,
    transition_matrix,
)
from .quantum import (  # noqa: F401
    WalkOperators,
    build_walk,
    energy_expectation,
    gas_core,
    gas_run,
    grover_success_prob,
    initial_walk_state,
    lhpst_anneal,
    phase_gap,
    system_marginal,
)
from .bench import (  # noqa: F401
    BenchConfig,
    BenchRecord,
    BoxStats,
    CapExceededError,
    ConfigError,
    box_stats,
    derive_instance,
    mean_steps_by_size,
    run_suite,
    steps_to_aear,
    steps_to_success_gas,
)
from .analysis import (  # noqa: F401
    ResourceModel,
    ScalingFit,
    TimeEstimate,
    calibrate_toffoli_time,
    classical_time_estimate,
    fit_power_law,
    flops_per_step,
    quantum_time_estimate,
)
from .kernels import BACKEND as KERNEL_BACKEND  # noqa: F401
