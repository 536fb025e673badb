"""Design of quantum-antenna initial states for shaped photon correlations."""
from .design import (
    DesignProblem,
    OptimizeOptions,
    PairBasisForm,
    Target,
    co_directional_problem,
    contra_directional_problem,
    dark_optimize,
    directivity_optimize,
    feasibility_boundary,
    optimize,
    pi_vector,
    probability_range,
    visibility_matrix,
)
from .estimators import SemiclassicalG2, StateDesigner
from .exceptions import IntegrationError, QantennaError, SizeLimitError
from .factory import (
    DarkSpec,
    SubdiagonalSpec,
    antidiagonal_state,
    dark_state,
    dicke_state,
    envelope_antidiagonal,
    envelope_subdiagonal,
    envelope_triples,
    nn_triples_state,
    subdiagonal_state,
)
from .geometry import AngularGrid, AntennaGeometry, CrossedArrayGeometry, compound, equispaced, steering_vector
from .mbloch import (
    BlochTrajectory,
    Component,
    ComponentSpec,
    MBParams,
    coupling_kernel,
    integrate,
    post_semiclassical_g2,
    poynting_pattern,
    pulse_peak_time,
)
from .patterns import (
    PatternGrid,
    amplitude2,
    amplitude3,
    brute_force_pattern,
    crossed_array_phase,
    pattern,
    pattern_integral,
)
from .states import ExcitationState, load_state, save_state, tuple_basis

__version__ = "0.1.0"
