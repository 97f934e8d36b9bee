"""Subarray synthesis of non-uniform linear arrays by compressive sensing.

OMP-SS recovers the subarray layout and excitations greedily on a fixed
half-wavelength grid; OGOMP-SS additionally refines the element positions.
"""

from .errors import (InfeasibleError, InvalidArgumentError, PatternFileError,
                     PatternGenerationError, RankDeficiencyError, RefinementError,
                     ResultFormatError, SubarrayError)
from .metrics import (MetricsReport, SubarrayLayout, chi_metric, extract_layout, measure_sll,
                      metric_grid, xi_metric)
from .model import (AngleGrid, ArrayGeometry, basis_expand, dictionary, evaluate_pattern,
                    steering_matrix, uniform_geometry)
from .ogomp import RefinementConfig, ogomp_mode1, ogomp_mode2
from .omp import SparseSolution, omp_mode1, omp_mode2
from .patterns import (DesiredPattern, PatternSpec, chebyshev_excitations, make_desired,
                       taylor_excitations)
from .synthesis import SolverConfig, SynthesisResult, build_problem, synthesize

__version__ = "0.1.0"
