"""Phonon-pair creation in the radial modes of trapped-ion chains.

Submodules: ``trap`` (equilibrium and normal modes), ``scale`` (collective axial
motion), ``bogoliubov`` and ``closed_forms`` (pair creation), ``wkb``
(suppression exponents), ``entanglement`` (two-ion Gaussian states) and
``scenario`` (configuration, runs, sweeps, figure tables).
"""

from .bogoliubov import (
    BogoliubovCoefficients,
    IntegrationAccuracyError,
    ModeInstabilityError,
    ModeSolution,
    SqueezingParameter,
    extract_bogoliubov,
    integrate_mode,
    mean_phonons,
    mode_profile,
    model_mode_solution,
    squeezed_state_amplitudes,
    squeezing_from_bogoliubov,
)
from .closed_forms import (
    RegimeError,
    analytic_collision_beta,
    analytic_expansion_beta,
    higher_mode_exponent,
    higher_mode_exponents,
    p1p2_beta,
    sudden_quench_beta,
)
from .entanglement import (
    CovarianceMatrix,
    ThermalOccupation,
    entanglement_of_formation,
    is_entangled,
    pt_symplectic_eigenvalues,
)
from .scale import (
    ChainCollapseError,
    CollisionModel,
    ExpansionModel,
    RampPulse,
    ScaleTrajectory,
    axial_frequency_from_scale,
    solve_scale_ode,
)
from .scenario import ConfigError, Scenario, SweepSpec, parse_scenario, run_scenario, run_sweep
from .trap import MG25, IonSpecies, TrapConfig, coupling_matrix, mode_spectrum, solve_equilibrium
from .wkb import WKBError, taylor_wkb_exponent, wkb_beta_exponent

__version__ = "0.1.0"
