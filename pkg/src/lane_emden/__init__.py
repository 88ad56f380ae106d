"""Sign-changing bubble towers of the planar Lane-Emden problem.

A numerical laboratory for the Dirichlet problem -Δu = |u|^(p-1) u on
planar domains at large exponent p: a radial shooting solver on the unit
disk, a boundary-fitted Newton continuation solver on rotationally
symmetric perturbed disks, closed-form Liouville limit profiles, and the
blow-up diagnostics (concentration scales, rescaled profiles, energy and
flux identities) that tie the computed solutions to their limit shapes.
"""

from .errors import (BracketError, ContinuationError, IntegrationError,
                     InvariantViolation, IterationError, LaneEmdenError,
                     RangeError, StructureError)
from .liouville import (RegularBubble, SingularBubble, eval_general,
                        eval_regular, eval_singular, dirac_strength,
                        make_singular, mass_quadrature, match_parameters)
from .radial import (RadialSolution, ShootingConfig, Trajectory, energy,
                     integrate_from_origin, shoot_one_node, shoot_positive)

__version__ = "0.1.0"
