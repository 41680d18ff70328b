"""Spectral enclosures for A + iB and the projection perturbation method for gap eigenvalues."""

from .errors import AssemblyError, DegenerateError, ParameterError, ReportError, SolverError
from .fem import PROBLEMS, ProblemSpec, exact_block_eigs, get_problem
from .geometry import (GapContext, RegionParams, SpectrumModel, curve_point, gamma_distance,
                       nonreal_eig_interval, refined_eig_interval, region_contains, tau_map,
                       x_set_contains, y_set_contains)
from .linalg import general_gen_eig, herm_gen_eig, smallest_singular_value, subspace_gap
from .method import (NestedPair, PerturbedPencil, Thresholds, classify, convergence_study,
                     measure_subspace_gaps, perturbed_spectrum, projection_gram, run_method)

__version__ = "0.1.0"
