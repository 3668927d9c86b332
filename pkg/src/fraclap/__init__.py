"""Dirichlet fractional Laplacian on finite subgraphs of the integer lattice.

The package assembles the dense nonlocal operator for a fractional order in
(0, 2) on a finite vertex set of Z^d, computes its full spectrum, and checks
two-sided Kroger / Berezin-Li-Yau type bounds for the eigenvalue averages,
with every kernel quantity computable by two independent quadrature routes.
"""

from .bounds import (
    BoundReport,
    BoundRow,
    EligibleRanges,
    ProjectionCheck,
    ball_symbol_integral,
    eligibility,
    lower_avg_bound,
    projection_inequality_check,
    symbol_minorant,
    unit_ball_volume,
    upper_avg_bound,
    upper_next_bound,
    verify_bounds,
)
from .domains import (
    Domain,
    make_box,
    make_l_shape,
    make_random_connected,
    read_domain,
    write_domain,
)
from .exceptions import (
    ConvergenceError,
    DomainFormatError,
    EligibilityError,
    FracLapError,
    NumericError,
)
from .fourier import (
    FourierProbe,
    multiplier_form_check,
    pairing,
    plancherel_check,
    plane_wave_bound_check,
)
from .kernel import (
    AlphaParam,
    KernelTable,
    QuadratureSpec,
    heat_kernel,
    heat_kernel_1d,
    heat_mass_radius,
    kernel_fourier,
    kernel_time_integral,
    laplacian_symbol,
    total_mass,
)
from .operator import (
    BoundaryMeasure,
    OperatorMatrix,
    apply,
    assemble,
    boundary_term,
    quadratic_form,
    solve_poisson,
    write_matrix_csv,
)
from .reporting import CheckReport, CheckResult
from .spectrum import (
    SpectrumResult,
    eigen_decompose,
    validate_spectrum,
    write_spectrum_csv,
)
from .verify import run_verification

__version__ = "0.1.0"
