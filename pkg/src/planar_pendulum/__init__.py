"""Planar pendular rotor: spectra, switch dynamics, and validation tools.

A planar rigid rotor in combined orienting and aligning interactions,
in reduced units (rotational constant = 1, period = 2 pi). The package
covers the stationary problem (parity-adapted spectra, level crossings,
algebraic eigenstates), sudden switch-on/switch-off wavepacket dynamics
with closed-form observable evolution, and an independent grid
propagator used for cross-checks.
"""

from .core import (
    AngularGrid,
    InteractionParams,
    PotentialShape,
    RotorState,
    SymmetryLabel,
    TopologicalIndexReport,
    Wavefunction,
    free_rotor_wavefunction,
    make_grid,
    potential_shape,
    topological_index,
)
from .spectrum import (
    CrossingRecord,
    PendularSpectrum,
    build_hamiltonian,
    classify_symmetry,
    crossing_scan,
    solve_spectrum,
)
from .elements import (
    BesselTable,
    TransitionElement,
    analytic_cos2_element,
    analytic_cos_element,
    ansatz_norm_integral,
    exp_cos_integral,
    hellmann_feynman_residual,
    kinetic_identity_residual,
    modified_bessel_i,
    sector_element_matrix,
    transition_element,
)
from .cqes import (
    AnsatzCoefficients,
    ConditioningError,
    SwitchCoefficients,
    algebraic_sector_size,
    aligned_grid_state,
    analytic_switch_off_coefficients,
    analytic_switch_on_coefficient,
    ansatz_basis,
    project_ansatz,
    quadrature_switch_off_coefficients,
    quadrature_switch_on_coefficients,
    reconstruct_ansatz,
    reconstruct_from_free_rotor,
)
from .dynamics import (
    CoherenceDecomposition,
    ExpectationSeries,
    PopulationRecord,
    TopologyMap,
    dominant_coherence_period,
    make_tau_grid,
    required_state_count,
    switch_off_evolution,
    switch_off_populations,
    switch_on_evolution,
    switch_on_populations,
    time_averaged_orientation,
    topology_map,
    total_population,
)
from .propagate import (
    AccuracyReport,
    Profile,
    PulseSchedule,
    Segment,
    Trajectory,
    propagate,
    second_order_accuracy_check,
)
from .validation import ALL_CHECKS, CheckResult, run_all

__version__ = "0.1.0"

__all__ = [
    "AngularGrid",
    "InteractionParams",
    "PotentialShape",
    "RotorState",
    "SymmetryLabel",
    "TopologicalIndexReport",
    "Wavefunction",
    "free_rotor_wavefunction",
    "make_grid",
    "potential_shape",
    "topological_index",
    "CrossingRecord",
    "PendularSpectrum",
    "build_hamiltonian",
    "classify_symmetry",
    "crossing_scan",
    "solve_spectrum",
    "BesselTable",
    "TransitionElement",
    "analytic_cos2_element",
    "analytic_cos_element",
    "ansatz_norm_integral",
    "exp_cos_integral",
    "hellmann_feynman_residual",
    "kinetic_identity_residual",
    "modified_bessel_i",
    "sector_element_matrix",
    "transition_element",
    "AnsatzCoefficients",
    "ConditioningError",
    "SwitchCoefficients",
    "algebraic_sector_size",
    "aligned_grid_state",
    "analytic_switch_off_coefficients",
    "analytic_switch_on_coefficient",
    "ansatz_basis",
    "project_ansatz",
    "quadrature_switch_off_coefficients",
    "quadrature_switch_on_coefficients",
    "reconstruct_ansatz",
    "reconstruct_from_free_rotor",
    "CoherenceDecomposition",
    "ExpectationSeries",
    "PopulationRecord",
    "TopologyMap",
    "dominant_coherence_period",
    "make_tau_grid",
    "required_state_count",
    "switch_off_evolution",
    "switch_off_populations",
    "switch_on_evolution",
    "switch_on_populations",
    "time_averaged_orientation",
    "topology_map",
    "total_population",
    "AccuracyReport",
    "Profile",
    "PulseSchedule",
    "Segment",
    "Trajectory",
    "propagate",
    "second_order_accuracy_check",
    "ALL_CHECKS",
    "CheckResult",
    "run_all",
    "__version__",
]
