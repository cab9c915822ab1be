"""Gaussian multi-bubble clusters: model profile, pull-back clusters, optimizer and homology checks."""

from .errors import (AccuracyError, ClosureError, ConvergenceError, DegenerateClusterError, DomainError,
                     InconsistencyError, InvalidDimensionError, MultibubbleError, UnderdeterminedError)
from .gauss import (Estimate, McSpec, Phi, Phi_inv, QuadratureSpec, mc_model_cell_measure, mc_model_interface_area,
                    model_area_table, model_cell_measure, model_interface_area, orthant_probability, phi)
from .homology import (EdgeNormalAssignment, IncidenceComplex, build_complex, homology_ranks, recover_B)
from .optimizer import OptProblem, OptResult, compare_to_model, minimize_perimeter
from .profile import (ProfileReport, dpsi, face_limit_check, invert_psi, model_profile, model_profile_value, psi)
from .pullback import (PullbackCluster, VariationReport, cell_measures, interface_areas, pb_cell_measure,
                       pb_interface_area, pb_perimeter, q_inward, q_translation, simplicial_cluster,
                       stationarity_residual, variation_report)
from .simplex import (build_LA, cone_frame, equidistant_points, model_cell_membership, pinv_on_E, project_to_E)

__version__ = "0.1.0"
