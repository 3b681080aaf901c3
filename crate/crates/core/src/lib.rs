//! Group calibration errors, agglomeration functions and calibration scores.
//!
//! A score is assembled from three choices: a [`Grouping`] of the datapoints,
//! a [`Signedness`] for the group errors, and an [`Agglomerator`] that turns
//! the resulting [`ErrorProfile`] into one number. The familiar binned,
//! adaptive and local calibration errors are presets in [`scores`].
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common choices.

pub mod agglomerate;
pub mod axioms;
pub mod data;
pub mod error;
pub mod grouping;
pub mod scalar;
pub mod scores;
pub mod synthetic;

pub use agglomerate::{cvar, quantile, Agglomeration, Agglomerator};
pub use axioms::{check_axioms, check_refinement_monotonicity, Axiom, AxiomReport};
pub use data::{
    empirical_bayes, error_profile, generalized_error, group_error, member_errors, Dataset, ErrorProfile, Group,
    GroupDistribution, Grouping, GroupingKind, Measure, Member, Provenance, Signedness,
};
pub use error::{Error, Result};
pub use grouping::{
    bins, feature_grid, is_refinement, kernel_distributions, knn_groups, level_sets, membership_counts, mlce_groups,
    prediction_bins, BinningScheme, KernelShape, KernelSpec, LevelKey, MetricSpec, Norm, Scaling, Space,
};
pub use scalar::Scalar;
pub use scores::{ace, brier, brier_decomposition, ece, global_score, local_errors, mce, mlce, ScoreReport};

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type Grouping64 = Grouping<f64>;
pub type Grouping32 = Grouping<f32>;
pub type ErrorProfile64 = ErrorProfile<f64>;
pub type ErrorProfile32 = ErrorProfile<f32>;
pub type Agglomerator64 = Agglomerator<f64>;
pub type Agglomerator32 = Agglomerator<f32>;
pub type ScoreReport64 = ScoreReport<f64>;
pub type ScoreReport32 = ScoreReport<f32>;
