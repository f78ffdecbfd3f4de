"""Approximate quantum state loading.

Entanglement-reduction loader with closed-form product-state seeding and
gradient fine-tuning, plus matrix-product / hardware-efficient / circuit-
encoding baselines, fidelity bounds driven by the Renyi-2 entanglement
measure, dataset generators, a noisy density-matrix evaluator, and a
diagonal-ensemble loader with shot-based angle recovery.
"""

from .statevector import (
    Circuit,
    GateOp,
    StateVector,
    apply_circuit,
    apply_gate,
    fidelity,
    pauli_expectation,
    rdm1,
    rdm2,
    shot_estimate,
)
from .entanglement import (
    EntanglementReport,
    bound_f1,
    bound_f2,
    depol_entropy_bounds,
    entanglement_measure,
    max_product_fidelity,
    noisy_bounds,
    product_params,
    product_state_1q,
    renyi2,
)
from .aqer import AqerConfig, AqerResult, Block, run_aqer
from .baselines import aqce_run, gate_count_table, hec_build, hec_train, mps_loader
from .checks import CheckResult, run_checks
from .datasets import (
    IqpSpec,
    SpinHamiltonianSpec,
    ghz,
    ground_state,
    iqp_state,
    magnetization,
    random_circuit_state,
    random_circuit_state_2d,
)
from .io import read_circuit, read_state, write_circuit, write_state
from .iqp import IqpGrid, iqp_approx_load, iqp_exact_load, iqp_shot_recover, iqp_x_formula
from .noisy import (
    DensityMatrix,
    depol_diamond_bound,
    depolarize,
    evolve_unitary,
    noisy_load_eval,
    verify_depol_bounds,
)

__version__ = "0.1.0"

__all__ = [
    "AqerConfig",
    "AqerResult",
    "Block",
    "CheckResult",
    "Circuit",
    "DensityMatrix",
    "EntanglementReport",
    "GateOp",
    "IqpGrid",
    "IqpSpec",
    "SpinHamiltonianSpec",
    "StateVector",
    "apply_circuit",
    "apply_gate",
    "aqce_run",
    "bound_f1",
    "bound_f2",
    "depol_diamond_bound",
    "depol_entropy_bounds",
    "depolarize",
    "entanglement_measure",
    "evolve_unitary",
    "fidelity",
    "gate_count_table",
    "ghz",
    "ground_state",
    "hec_build",
    "hec_train",
    "iqp_approx_load",
    "iqp_exact_load",
    "iqp_shot_recover",
    "iqp_state",
    "iqp_x_formula",
    "magnetization",
    "max_product_fidelity",
    "mps_loader",
    "noisy_bounds",
    "noisy_load_eval",
    "pauli_expectation",
    "product_params",
    "product_state_1q",
    "random_circuit_state",
    "random_circuit_state_2d",
    "rdm1",
    "rdm2",
    "read_circuit",
    "read_state",
    "renyi2",
    "run_aqer",
    "run_checks",
    "shot_estimate",
    "verify_depol_bounds",
    "write_circuit",
    "write_state",
    "__version__",
]
