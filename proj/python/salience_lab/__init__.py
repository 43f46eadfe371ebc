"""Graded entity salience analytics: corpus parsing, Centering Theory,
discourse-depth and dispersion metrics, beta-binomial regression,
extra-trees classification and t-SNE profiling, backed by the C++ core."""

from ._core import (  # noqa: F401
    BetaBinomialModel,
    DataError,
    Document,
    ExtraTreesModel,
    FeatureTable,
    FitConfig,
    ModelError,
    ParseError,
    __version__,
    anova_single_term_deletions,
    assign_salience,
    build_feature_table,
    centering_states,
    cohen_kappa,
    edu_depths,
    encode_table,
    evaluate_beta_binomial,
    fit_beta_binomial,
    fit_forest,
    gini_importance,
    kl_dispersion,
    parse_document,
    parse_document_file,
    pearson,
    permutation_mda,
    predict_proba,
    spearman,
    tsne,
    validate_document,
    welch_t_hedges,
)
