"""Bounds on posterior probabilities in credal networks."""

from .errors import (CredalError, FormatError, GroundingError, InconsistentConstraintsError,
                     InfeasibleSpecError, LeakViolationError, ModelError, PreconditionError,
                     TooLargeError, TopologyError, UnsupportedConversionError,
                     ZeroProbabilityEvidenceError)
from .generate import random_network
from .methods import METHODS, run_method
from .mlp import (MultilinearProgram, build_multilinear_program, flattened_terms, linearize,
                  rl_interval, rl_solve, solve_fractional)
from .model import (ConstraintForm, CredalNetwork, ExtensiveVertexForm, IntervalResult,
                    MultilinearConstraint, ParamId, Query, SeparateVertexForm, Variable,
                    hrep_to_vrep, qualitative_influence_constraints, validate_network)
from .oracle import exact_bounds_enumeration, local_search_bound, ve_marginal
from .propagation import (PropagationSchedule, ar_plus, ar_plus_plus, ipe, l2u, local_bounds,
                          select_cutset, two_u)
from .relational import ground, holmes

__version__ = "0.1.0"
