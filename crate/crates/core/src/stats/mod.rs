//! Resampling intervals, effect sizes and significance tests.

mod bootstrap;
mod effect;
mod hypothesis;

pub use bootstrap::{
    bootstrap_ci, bootstrap_ci_with, BootstrapCI, BootstrapParams, Statistic, DEFAULT_ITERATIONS, DEFAULT_LEVEL,
    DEFAULT_SEED,
};
pub use effect::{
    classify_effect_size, cliffs_delta, cohens_d, effect_sizes, glass_delta, hedges_correction, hedges_g,
    EffectCategory, EffectMeasure, EffectSizeReport,
};
pub use hypothesis::{
    anova, anova_f, anova_permutation_p, bh_fdr, pearson_permutation_p, pearson_r, permutation_p, Anova, FdrResult,
    DEFAULT_ALPHA, DEFAULT_PERMUTATIONS,
};
