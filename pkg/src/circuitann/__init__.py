"""Neural-network surrogates for the steady-state response of circuits.

An exact mesh-analysis solver generates training data for small sigmoid
networks, one per circuit class, which then predict the current (and
phase) in a probe branch without solving the circuit.
"""

__version__ = "0.1.0"

from .circuits import (  # noqa: E402
    ArchitectureSpec,
    BranchElement,
    CircuitClass,
    CircuitInstance,
    MechanicalParams,
    ann_architecture,
    circuit_class,
    grid_topology,
    impedance,
    mechanical_to_electrical,
    reactance_from_components,
)
from .data import Dataset, NormalizationContext, SamplerConfig, default_sampler, generate_dataset  # noqa: E402
from .experiments import (  # noqa: E402
    run_amplifier_experiment,
    run_class_experiment,
    run_ohm_experiment,
    sweep,
)
from .mlp import NetworkWeights, TrainConfig, init_network, train  # noqa: E402
from .solver import probe_response, solve_by_superposition, solve_mesh  # noqa: E402

__all__ = [
    "ArchitectureSpec",
    "BranchElement",
    "CircuitClass",
    "CircuitInstance",
    "Dataset",
    "MechanicalParams",
    "NetworkWeights",
    "NormalizationContext",
    "SamplerConfig",
    "TrainConfig",
    "ann_architecture",
    "circuit_class",
    "default_sampler",
    "generate_dataset",
    "grid_topology",
    "impedance",
    "init_network",
    "mechanical_to_electrical",
    "probe_response",
    "reactance_from_components",
    "run_amplifier_experiment",
    "run_class_experiment",
    "run_ohm_experiment",
    "solve_by_superposition",
    "solve_mesh",
    "sweep",
    "train",
]
