//! Nonparametric system comparison and correlation analyses.

mod chi2;
mod correlation;
mod friedman;

pub use chi2::{chi2_sf, regularized_upper_gamma};
pub use correlation::{da_fa_matrix, pearson, phi_correlation, CorrelationCell, DA_FA_STATISTIC};
pub use friedman::{
    average_ranks, exact_p_value, friedman, kendalls_w, significance_marker, BlockMatrix, EffectSize,
    FriedmanResult, Significance, DEFAULT_ALPHA_LEVELS, EXACT_LIMIT,
};
