"""renewlab: numerics for heavy-tailed renewal sequences, one-sided stable
limit laws, and infinite-measure interval maps.

The package is organized around five subject areas plus a CLI:

  stable   the one-sided stable law, its Mittag-Leffler transform image,
           and the size-biased (tied-down) variant
  regvar   regularly varying normalizing sequences, rates, grids, and the
           weighted grid sums they control
  renewal  lattice/continuous heavy-tailed renewal laws: exact convolution
           tables, renewal-mass recursions, local limit profiles,
           eigenvalue checks, Monte Carlo
  maps     intermittent interval maps, first-return structure, Ulam
           discretizations, occupation-time statistics
  walk     the lazy simple walk, exact bridge local-time laws, Monte Carlo

Backend selection (numba vs pure numpy) is described in
:mod:`renewlab.backend`.
"""

__version__ = "0.1.0"

from .backend import BACKEND, USING_NUMBA
from .errors import NonReturnError, NumericalError, ResourceError
from .stable import (
    StableFamily,
    ml_cdf,
    ml_density,
    ml_moment,
    sample_stable,
    sample_tied_down,
    stable_char,
    stable_density,
    stable_laplace,
    stable_sf,
    tied_down_expect,
)
from .regvar import (
    RegVarying,
    equidist_average,
    lemma22_limit,
    lemma22_sum,
    rv_eval,
    rv_inverse,
    u_rate,
)
from .weights import WEIGHTS, Weight, resolve_weight
from .renewal import (
    ContinuousLaw,
    ConvolutionTable,
    LatticeLaw,
    build_continuous_law,
    cesaro_deviation,
    lattice_char,
    mc_tied_down_continuous,
    nagaev_check,
    occupation_mass_series,
    periodic_llt_profile,
    renewal_mass_series,
    srt_profile,
    tail_constant,
    tied_down_functional,
)
from .maps import (
    DarlingKacResult,
    DensityProfile,
    InducedOrbit,
    MapSpec,
    TiedDownReport,
    UlamMatrix,
    darling_kac_empirical,
    first_return,
    fit_power_exponent,
    infinite_density_profile,
    map_step,
    map_tied_down_estimate,
    occupation_sample,
    return_time_sample,
    return_time_tail,
    ulam_matrix,
)
from .walk import (
    BridgeLocalTime,
    BridgeMcResult,
    BridgeTable,
    WalkLaw,
    bridge_local_time_exact,
    bridge_local_time_mc,
    bridge_local_time_moments,
    expected_local_time,
    first_passage_pmf,
    local_time_sample,
    return_probabilities,
)
