"""Trace-formula experiments for level-1 modular forms and their lifts.

The package is organized bottom-up: exact q-expansion arithmetic and Hecke
eigenbases (`qseries`), special functions tuned for trace-formula sums
(`specfun`), L-value evaluators (`lseries`), the Petersson-formula checks
and truncation planning (`trace`), lift-restriction mass computations
(`mass`), amplifier bookkeeping and exponent optimization (`amplifier`),
and a CLI with a coefficient cache (`cli`).
"""

from .qseries import (
    QExpansion,
    bernoulli,
    eisenstein_series,
    delta_series,
    cusp_dim,
    modular_dim,
    victor_miller_basis,
    hecke_image,
    hecke_operator_matrix,
    charpoly,
    hecke_eigenbasis,
    HeckeEigenform,
    EigenBasis,
)
from .specfun import (
    WeightFnParams,
    WeightValue,
    bessel_j,
    bessel_j_many,
    bessel_decay_bound,
    bessel_landau_bound,
    kloosterman,
    kloosterman_table,
    kloosterman_weil_bound,
    riemann_zeta,
    lambda_k,
    weight_w,
    weight_w_many,
)
from .lseries import (
    LValueResult,
    SymSquareCoeffs,
    sym_square_coeff,
    l_g_special,
    l_sym2_accurate,
    l_sym2_at_1,
    dirichlet_poly_approx,
    l_central,
    l_central_cached,
)
from .trace import (
    TraceCheckReport,
    TruncationPlan,
    petersson_lhs,
    petersson_rhs,
    trace_check,
    trace_check_grid,
    offdiag_tail_bound,
    offdiag_envelope,
    m_f,
    m_f_diagonal,
    m_f_offdiag,
    truncation_planner,
)
from .mass import (
    MassReport,
    AverageMassReport,
    mass,
    mass_cached,
    mass_basis,
    average_mass,
)
from .amplifier import (
    AmplifierCoeffs,
    BnPoint,
    ExponentSolution,
    GrowthRow,
    GrowthScan,
    LowerBound,
    amplifier_coeffs,
    amplified_sum,
    b_n_sum,
    b_n_growth_scan,
    exponent_optimizer,
    lower_bound_check,
    support_primes,
)

__version__ = "0.1.0"
