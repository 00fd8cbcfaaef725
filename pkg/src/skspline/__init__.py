"""Cardinal sk-spline interpolation on lattices ``A Z^n`` with Gaussian kernels."""
from ._accel import BACKEND
from .errors import (
    DegenerateSymbol,
    DimensionMismatch,
    IllConditioned,
    NumericalFailure,
    ReconstructionFailure,
    SingularMatrix,
    SizeOverflow,
    SkSplineError,
)
from .fundamental import (
    CardinalCoefficients,
    FundamentalSpline,
    cardinal_coefficients,
    cardinality_residual,
    eval_fundamental_corollary,
    eval_fundamental_integral,
    eval_fundamental_spatial,
)
from .interpolation import (
    GramSolution,
    Interpolant,
    LatticeSamples,
    eval_interpolant,
    gram_solve,
    interpolate,
    oracle_discrepancy,
    refinement_study,
)
from .kernels import (
    GaussianKernel,
    Kernel,
    gaussian_eval,
    gaussian_fourier,
    plancherel_residual,
    quadrature_fourier,
    scaling_identity_residual,
)
from .lattice import (
    IndexSet,
    Lattice,
    dual_point,
    enumerate_box,
    fundamental_domain_grid,
    lattice_point,
    new_lattice,
)
from .symbol import SymbolFunction

__version__ = "0.1.0"
