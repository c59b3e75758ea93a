"""Level-1 modular forms: q-expansions, eigenforms, zeros and their statistics."""

from .qseries import (
    ExactSeries,
    HeckeMatrix,
    bernoulli,
    delta_qexp,
    dim_cusp,
    eisenstein_qexp,
    hecke_matrix,
    miller_basis,
    series_add,
    series_mul,
    series_scale,
    sigma_power,
)
from .eigen import (
    FormNumeric,
    NearDegenerateSpectrumError,
    check_multiplicativity,
    eigen_decompose,
    eigenform,
    eisenstein_form,
)
from .evaluate import (
    GroupElement,
    LogValue,
    UpperHalfPoint,
    eval_log,
    log_mass,
    reduce_to_fundamental,
    tail_terms_needed,
)
from .zerofind import (
    ValenceMismatchError,
    ZeroRecord,
    ZeroSet,
    argument_principle_count,
    ord_infinity,
    roots_in_qdisk,
    zeros_in_F,
)
from .measure import (
    BoxRegion,
    MeasureReport,
    arc_star_discrepancy,
    discrepancy,
    empirical_measure,
    hyper_volume,
    mass_measure,
    petersson_norm,
    siegel_norm_coefficient_sum,
)
from .potential import BumpFunction, F_phi, bump_eval, check_zero_identity, enumerate_translates
from .incgamma import (
    bound_series,
    gamma_inc,
    poisson_cdf_half,
    ramanujan_theta,
    ratio_half,
    sup_mass_experiment,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
