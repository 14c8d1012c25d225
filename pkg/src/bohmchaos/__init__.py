"""Order and chaos in Bohmian trajectories of a three-state superposition in
a 2D anisotropic harmonic well: exact field, nodal bounds, perturbation
series, co-moving frame analysis and chaos indicators."""

__version__ = "0.1.0"

from .errors import (BohmChaosError, ConfigError, DegenerateFit, DegenerateSaddle,
                     DomainExceeded, EmptyInterval, NearNode, NoConvergence,
                     NodalAtInfinity, NumericalError, StepUnderflow, UnknownRecipe)
from .field import (ModelParams, NodalFrame, PhaseState, Velocity2, eval_G, eval_psi,
                    jacobian, nodal_point, rest_frame_critical_points, rest_frame_stream,
                    velocity)
from .integrate import (Trajectory, chi_series, finite_time_lcn, integrate_orbit,
                        integrate_with_deviation, pair_separation)
from .nodal import (bounds_case, innermost_minimum, nodal_lines_sample, permissible,
                    scale_to_X0Y0)
from .series import TrigSeries, TrigTerm, series_eval, series_residual, series_solve
from .moving import (FlowChart, XPoint, f3_mean, flow_chart, hopf_scan, limit_cycle_find,
                     moving_frame_field, xpoint_locate)
from .diagnostics import (bin_by_distance, classify_orbit, power_law_fit,
                          stretching_series)
