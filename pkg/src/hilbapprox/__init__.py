"""Constructive approximation of continuous functionals and maps on compact
subsets of H^n by sums ``sum_j zeta_j(sum_i phi_ji(x_i))``.

Submodules, bottom-up: ``space`` (grid L2 spaces), ``cover`` (samples, nets,
modulus of continuity), ``project`` (orthogonal projectors), ``pou``
(partitions of unity), ``ridge`` (trigonometric ridge fits), ``assemble``
(scalar pipeline), ``operator`` (finite-rank maps into a grid space) and
``demos`` (sample families and reference functionals).
"""
from .assemble import (Coverage, FunctionalApproximant, MeasurementSet, build_approximant,
                       evaluate, lift_measurements, load_model, save_model, sup_error,
                       write_report)
from .config import FitConfig
from .cover import (ModulusEstimate, Net, SampleSet, choose_delta, covering_number_bruteforce,
                    estimate_modulus, greedy_net)
from .errors import (ApproxError, CapacityError, DegenerateSubspaceError,
                     EpsilonUnattainableError, EvaluationError, IllConditionedError,
                     UncoveredPointError, UsageError)
from .operator import (FiniteRankOperator, RangeBasis, RangeNet, apply, build_operator,
                       build_range_basis, build_range_net, range_pou_project)
from .pou import PartitionOfUnity
from .project import Projector, build_projector, coords, residual
from .ridge import RidgeModel, ZetaSpec, fit, fit_auto
from .space import Grid, GridFunction, ProductPoint, inner, norm, prod_inner, prod_norm

__version__ = "0.1.0"
