"""Quantum-reservoir pipeline for speckle ground-state energy regression.

A six-spin transverse-field Ising reservoir turns a disorder potential,
injected point by point through one qubit, into time-averaged Pauli
expectations; linear least-squares readouts on polynomial combinations of
those averages predict the exact ground-state energy of the potential.
"""

from .quantum import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    UnitaryPropagator,
    assert_density_matrix,
    expectation,
    hermitian_eig,
    kron,
    partial_trace_first_qubit,
    pauli_string,
    propagator,
    purity,
)
from .reservoir import (
    ObservableCache,
    RawObservables,
    ReservoirConfig,
    build_hamiltonian,
    build_observable_cache,
    build_propagator,
    coupling_pairs,
    encode_input,
    observable_counts,
    observable_labels,
    reset_state,
    run_batch,
    run_instance,
    sample_couplings,
    step,
)
from .speckle import (
    Dataset,
    SpeckleInstance,
    SpeckleParams,
    build_dataset,
    generate_speckle,
    ground_state_energy,
    load_dataset,
    load_external_dataset,
    save_dataset,
)
from .readout import (
    EvalReport,
    FEATURE_VERSION,
    LinearModel,
    evaluate,
    feature_length,
    feature_matrix,
    features_single,
    features_two,
    fit,
    load_model,
    predict,
    save_model,
    split,
)
from .pipeline import (
    RunConfig,
    cmd_evaluate,
    cmd_features,
    cmd_generate,
    cmd_run_all,
    cmd_train,
    compute_raw_observables,
    config_from_dict,
    config_to_dict,
    load_config,
    save_config,
)

__version__ = "0.1.0"
