"""Matrix beta type II distribution machinery and numeric verification.

Special functions, seeded samplers, closed-form densities for the
symmetric, latent-root, and nonsymmetric variants, finite-difference
Jacobian checks, and a Monte Carlo goodness-of-fit harness.
"""

__version__ = "0.1.0"

from .core import (
    GeneralMatrix,
    PDMatrix,
    Spectrum,
    SymmetricMatrix,
    cholesky,
    general_eig_real,
    pd_sqrt,
    sym_eig,
    unvech,
    vech,
)
from .distributions import (
    BetaParams,
    F1Sample,
    LogDensity,
    WishartSample,
    build_beta2,
    density_beta2,
    density_f1_unnormalized,
    density_latent_roots,
    j1_closed,
    j2_closed,
    sample_f1,
    sample_matrix_normal,
    sample_wishart,
    substitute_params,
)
from .jacobians import (
    ChartMap,
    JacobianReport,
    JordanFactors,
    numeric_jacobian_det,
    verify_congruence,
    verify_jordan,
    verify_polar_m2,
    verify_scalar_reductions,
    verify_square_map,
)
from .mcverify import (
    McReport,
    VolEstimate,
    chi2_hist_test,
    estimate_vol_jordan,
    f1_shape_experiment,
    kde_at,
    ks_test,
    spectral_equality_suite,
    verify_root_density,
)
from .special import mv_beta, mv_gamma, vol_orthogonal
