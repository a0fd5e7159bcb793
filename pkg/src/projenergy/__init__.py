"""Energy maximization for powers of the projective angle on S^d / RP^d."""

from .energy import (
    Convention,
    EnergyReport,
    bilinear_form,
    conjectured_value,
    energy,
    energy_gradient,
    euler_lagrange_residual,
    kernel_sup_diff,
    potential,
    uniform_energy,
)
from .equivalence import EquivalenceWitness, essentially_equivalent, is_in_PDelta
from .geometry import (
    KernelFamily,
    KernelSpec,
    SpherePoint,
    TangentVector,
    exp_map,
    geodesic_distance,
    grad_kernel,
    kernel_value,
    log_map,
    projective_kernel,
    projective_rho,
)
from .measures import (
    DiscreteMeasure,
    MeasureClass,
    classify,
    equidistributed_basis,
    fejes_toth_config,
    load_measure,
    project_to_rp,
    random_configuration,
    save_measure,
)
from .optimize import (
    AscentOptions,
    AscentResult,
    ThresholdEstimate,
    aggregation_constant,
    estimate_threshold,
    maximize_particles,
    maximize_weights,
    stability_experiment,
)
from .transport import TransportPlan, assignment_bruteforce, dinf_distance, dp_distance
from .verify import chain_check, frame_bound_check, majorization_check, moment_matrix

__all__ = [
    "aggregation_constant",
    "AscentOptions",
    "AscentResult",
    "assignment_bruteforce",
    "bilinear_form",
    "chain_check",
    "classify",
    "conjectured_value",
    "Convention",
    "dinf_distance",
    "DiscreteMeasure",
    "dp_distance",
    "energy",
    "energy_gradient",
    "EnergyReport",
    "equidistributed_basis",
    "EquivalenceWitness",
    "essentially_equivalent",
    "estimate_threshold",
    "euler_lagrange_residual",
    "exp_map",
    "fejes_toth_config",
    "frame_bound_check",
    "geodesic_distance",
    "grad_kernel",
    "is_in_PDelta",
    "kernel_sup_diff",
    "kernel_value",
    "KernelFamily",
    "KernelSpec",
    "load_measure",
    "log_map",
    "majorization_check",
    "maximize_particles",
    "maximize_weights",
    "MeasureClass",
    "moment_matrix",
    "potential",
    "project_to_rp",
    "projective_kernel",
    "projective_rho",
    "random_configuration",
    "save_measure",
    "SpherePoint",
    "stability_experiment",
    "TangentVector",
    "ThresholdEstimate",
    "TransportPlan",
    "uniform_energy",
]
