//! Statistics and figure data derived from run logs.

mod curves;
mod silhouette;
mod stats;
mod tsne;

pub use curves::{
    moving_average, score_curves, spectrogram, top_bands, top_share, ScoreCurves, Spectrogram,
};
pub use silhouette::{silhouette_score, LabeledPointSet};
pub use stats::{
    ln_gamma, mean, regularized_incomplete_beta, sample_std, sample_variance, student_t_cdf,
    student_t_two_sided, welch_t_test, WelchResult,
};
pub use tsne::{joint_affinities, kl_divergence, tsne_embed, Embedding, TsneConfig};
