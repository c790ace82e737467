"""Two-phase Darcy flow of water over a non-Newtonian mud layer.

The package evolves the periodic interface ``y = f(t, x)`` between a
water layer on top and a mud layer with a shear-dependent effective
viscosity below, using Fourier x Chebyshev collocation on flattened strips.
"""

from .config import RunConfig, load_config
from .discretization import Field2D, Grid, make_grid, modal, trace
from .elliptic_mud import MudSolver, apply_Am, boundary_Bm, max_principle_check, solve_R
from .elliptic_water import WaterSolver, apply_Aw, boundary_Bw, solve_T
from .errors import AdmissibilityError, ConvergenceError, DomainError
from .evolution import (InterfaceProblem, ModelParams, SimState, Trajectory, darcy_postprocess,
                        dispersion_fit, evaluate_cF, linearized_symbols, simulate, solve_Phi, step)
from .geometry import PeriodicProfile, curvature, transform_point, validate_profile
from .rheology import (EffectiveViscosity, Hectorite, Newtonian, Thickening, check_conditions,
                       effective_viscosity)

__version__ = "0.1.0"
