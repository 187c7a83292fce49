"""Kepler dynamics on the singular SO(4,2) coadjoint orbit.

Modules
-------
orbit_core    orbit coordinates, Lie-Poisson brackets, the global Darboux chart
brackets      numerical canonical brackets with error estimates
dynamics      Hamiltonians, flows, symplectic integration, invariant audits
symmetry      nonlinear SO(4) action on the Goldstone coordinates
action_angle  action-angle variables on both charts and the map between them
estimators    scikit-learn transformers over batches of phase points
audits        randomized property suites
cli           the ``kok`` command
"""

from .action_angle import (
    ActionSet,
    AngleSet,
    SphericalPoint,
    actions_by_quadrature,
    actions_closed_form,
    angles_from_phase,
    canonicity_check,
    compose_transformation,
    frequency_check,
    inverse_transformation,
    phase_from_angles,
    solve_kepler_equation,
    standard_action_angle,
)
from .brackets import BracketEstimate, canonical_bracket
from .dynamics import (
    KeplerParams,
    Trajectory,
    hamiltonian_H,
    hamiltonian_regularized_kepler,
    hamiltonian_standard_kepler,
    integrate,
    invariant_report,
    time_rescaling_factor,
)
from .estimators import ActionAngleTransformer, DarbouxChartTransformer, KeplerChartTransformer
from .exceptions import KeplerOrbitError
from .orbit_core import OrbitPoint, PhasePoint, ZetaMatrix, darboux_from_orbit, lie_poisson_bracket, orbit_from_phase, zeta_from_phase
from .symmetry import CosetPoint, GroupElement, finite_action, infinitesimal_action

__version__ = "0.1.0"

__all__ = [
    "ActionAngleTransformer",
    "ActionSet",
    "AngleSet",
    "BracketEstimate",
    "CosetPoint",
    "DarbouxChartTransformer",
    "GroupElement",
    "KeplerChartTransformer",
    "KeplerOrbitError",
    "KeplerParams",
    "OrbitPoint",
    "PhasePoint",
    "SphericalPoint",
    "Trajectory",
    "ZetaMatrix",
    "actions_by_quadrature",
    "actions_closed_form",
    "angles_from_phase",
    "canonical_bracket",
    "canonicity_check",
    "compose_transformation",
    "darboux_from_orbit",
    "finite_action",
    "frequency_check",
    "hamiltonian_H",
    "hamiltonian_regularized_kepler",
    "hamiltonian_standard_kepler",
    "infinitesimal_action",
    "integrate",
    "inverse_transformation",
    "invariant_report",
    "lie_poisson_bracket",
    "orbit_from_phase",
    "phase_from_angles",
    "solve_kepler_equation",
    "standard_action_angle",
    "time_rescaling_factor",
    "zeta_from_phase",
]
