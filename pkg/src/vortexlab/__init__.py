"""vortexlab: spinning vortex solitons of the 2D focusing NLS.

Ring profiles of arbitrary spin, their large-spin soliton asymptotics, and
the spectrum of the linearized operator in azimuthal sectors.
"""

from . import errors
from .asymptotics import ErrorNorms, RateFit, error_norms, errors_table, rate_fit
from .evolution import GrowthFit, Trajectory, evolve_linearized, fit_growth
from .operators import (BandedOperator, LineGrid, RadialGrid, SectorOperator,
                        build_Lc, build_Lplus_Lminus, build_radial_schroedinger,
                        build_sector_operator, default_line_grid,
                        default_radial_grid)
from .profile_solver import (Profile, ansatz, bvp_residual, profile_from_json,
                             profile_to_json, residual_decomposition, solve)
from .soliton1d import (QNorms, SolitonParams, balance_constants,
                        balance_residual, eval_dcq, eval_dq, eval_q,
                        gamma_growth, q_norms)
from .spectral import (KernelReport, ReducedModel, ScanResult, SpectrumReport,
                       canonical_index, kernel_check, predicted_growth,
                       reduced_eigenvalues, reduced_matrix, sector_spectrum,
                       unstable_scan)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "SolitonParams", "QNorms", "balance_constants", "balance_residual",
    "eval_q", "eval_dq", "eval_dcq", "q_norms", "gamma_growth",
    "RadialGrid", "LineGrid", "BandedOperator", "SectorOperator",
    "build_radial_schroedinger", "build_Lc", "build_Lplus_Lminus",
    "build_sector_operator", "default_radial_grid", "default_line_grid",
    "Profile", "ansatz", "bvp_residual", "solve", "residual_decomposition",
    "profile_to_json", "profile_from_json",
    "ErrorNorms", "RateFit", "error_norms", "errors_table", "rate_fit",
    "ReducedModel", "SpectrumReport", "KernelReport", "ScanResult",
    "reduced_matrix", "reduced_eigenvalues", "predicted_growth",
    "kernel_check", "sector_spectrum", "unstable_scan", "canonical_index",
    "Trajectory", "GrowthFit", "evolve_linearized", "fit_growth",
    "__version__",
]
