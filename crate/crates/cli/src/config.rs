//! Run configuration, read from a TOML file.

use std::path::{Path, PathBuf};

use calagg::axioms::{Axiom, DEFAULT_TOLERANCE};
use calagg::grouping::{BinMode, BinSpace, BinningScheme, KernelShape, KernelSpec, LevelKey, MetricSpec, Norm, Space};
use calagg::synthetic::{BayesFamily, FeatureLaw, Predictor, Schedule};
use calagg::{Agglomerator, Measure, Signedness};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed for every randomized component.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Not echoed into reports, so the report bytes do not depend on where they are written.
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetConfig>,
    #[serde(default)]
    pub scores: Vec<ScoreRequest>,
    #[serde(default)]
    pub experiments: Vec<ExperimentRequest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    #[serde(flatten)]
    pub roles: ColumnRoles,
}

/// Which header columns hold features, the label and the prediction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnRoles {
    #[serde(default)]
    pub features: Vec<String>,
    pub label: String,
    pub prediction: String,
}

impl ColumnRoles {
    pub fn validate(&self) -> Result<(), CliError> {
        let mut seen = std::collections::BTreeSet::new();
        for name in self.features.iter().chain([&self.label, &self.prediction]) {
            if !seen.insert(name) {
                return Err(CliError::Validation(format!("column '{name}' is assigned more than one role")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinConfig {
    pub count: usize,
    #[serde(default = "default_mode")]
    pub mode: BinMode,
    /// Feature column position; predictions when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature: Option<usize>,
}

fn default_mode() -> BinMode {
    BinMode::EqualWidth
}

impl BinConfig {
    pub fn scheme(&self) -> BinningScheme {
        BinningScheme {
            count: self.count,
            mode: self.mode,
            space: self.feature.map_or(BinSpace::Predictions, BinSpace::Feature),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "score", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScoreRequest {
    Ece { bins: BinConfig },
    Ace { bins: BinConfig },
    Mce { bins: BinConfig },
    Mlce {
        kernel: KernelSpec<f64>,
        bins: BinConfig,
        #[serde(default)]
        absolute: bool,
    },
    Brier,
    BrierDecomposition { by: LevelKey },
    LocalErrors { grouping: GroupingConfig },
    Global {
        grouping: GroupingConfig,
        signedness: Signedness,
        agglomerator: Agglomerator<f64>,
        /// Replaces the grouping's default measure.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        measure: Option<Measure<f64>>,
    },
}

impl ScoreRequest {
    pub fn kind(&self) -> &'static str {
        match self {
            ScoreRequest::Ece { .. } => "ece",
            ScoreRequest::Ace { .. } => "ace",
            ScoreRequest::Mce { .. } => "mce",
            ScoreRequest::Mlce { .. } => "mlce",
            ScoreRequest::Brier => "brier",
            ScoreRequest::BrierDecomposition { .. } => "brier_decomposition",
            ScoreRequest::LocalErrors { .. } => "local_errors",
            ScoreRequest::Global { .. } => "global",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupingConfig {
    Bins { bins: BinConfig },
    FeatureGrid {
        bins_per_dim: Vec<usize>,
        #[serde(default)]
        metric: MetricSpec,
    },
    LevelSets { by: LevelKey },
    Knn {
        k: usize,
        #[serde(default)]
        metric: MetricSpec,
        #[serde(default = "default_space")]
        space: Space,
    },
    Kernel { kernel: KernelSpec<f64> },
    Mlce { kernel: KernelSpec<f64>, bins: BinConfig },
}

fn default_space() -> Space {
    Space::Features
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionConfig {
    pub dim: usize,
    pub feature_law: FeatureLaw,
    pub bayes: BayesFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentRequest {
    Axioms {
        agglomerator: Agglomerator<f64>,
        axioms: Vec<Axiom>,
        #[serde(default = "default_trials")]
        trials: usize,
        #[serde(default = "default_tolerance")]
        tolerance: f64,
    },
    Variance {
        distribution: DistributionConfig,
        predictor: Predictor,
        group_size: usize,
        resamples: usize,
    },
    Resolution { labels1: Vec<bool>, labels2: Vec<bool>, epsilon: f64 },
    Overlap {
        d: usize,
        k: usize,
        n: usize,
        #[serde(default = "default_overlap_norm")]
        norm: Norm,
    },
    KnnConsistency {
        distribution: DistributionConfig,
        predictor: Predictor,
        sizes: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        schedule: Option<Schedule>,
        #[serde(default = "default_anchors")]
        anchors: usize,
    },
    KernelConsistency {
        distribution: DistributionConfig,
        predictor: Predictor,
        sizes: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        schedule: Option<Schedule>,
        #[serde(default = "default_anchors")]
        anchors: usize,
        #[serde(default = "default_shape")]
        shape: KernelShape,
    },
}

fn default_trials() -> usize {
    1000
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

fn default_overlap_norm() -> Norm {
    Norm::L2
}

fn default_anchors() -> usize {
    1000
}

fn default_shape() -> KernelShape {
    KernelShape::Gaussian
}

impl ExperimentRequest {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentRequest::Axioms { .. } => "axioms",
            ExperimentRequest::Variance { .. } => "variance",
            ExperimentRequest::Resolution { .. } => "resolution",
            ExperimentRequest::Overlap { .. } => "overlap",
            ExperimentRequest::KnnConsistency { .. } => "knn_consistency",
            ExperimentRequest::KernelConsistency { .. } => "kernel_consistency",
        }
    }

    pub fn is_randomized(&self) -> bool {
        matches!(
            self,
            ExperimentRequest::Axioms { .. }
                | ExperimentRequest::Variance { .. }
                | ExperimentRequest::KnnConsistency { .. }
                | ExperimentRequest::KernelConsistency { .. }
        )
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    /// Reads a config file. A relative dataset path is resolved against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        if let Some(ds) = &mut config.dataset {
            if ds.path.is_relative() {
                if let Some(dir) = path.parent() {
                    ds.path = dir.join(&ds.path);
                }
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(ds) = &self.dataset {
            ds.roles.validate()?;
        }
        if !self.scores.is_empty() && self.dataset.is_none() {
            return Err(CliError::Validation("score requests need a dataset".into()));
        }
        if self.seed.is_none() {
            if let Some((i, e)) = self.experiments.iter().enumerate().find(|(_, e)| e.is_randomized()) {
                return Err(CliError::Validation(format!(
                    "experiment #{} ({}) is randomized and needs a seed",
                    i + 1,
                    e.kind()
                )));
            }
        }
        for (i, s) in self.scores.iter().enumerate() {
            let agg = match s {
                ScoreRequest::Global { agglomerator, .. } => Some(agglomerator),
                _ => None,
            };
            if let Some(agg) = agg {
                agg.validate()
                    .map_err(|e| CliError::Validation(format!("score request #{} ({}): {e}", i + 1, s.kind())))?;
            }
        }
        for (i, e) in self.experiments.iter().enumerate() {
            if let ExperimentRequest::Axioms { agglomerator, .. } = e {
                agglomerator
                    .validate()
                    .map_err(|err| CliError::Validation(format!("experiment #{} (axioms): {err}", i + 1)))?;
            }
        }
        Ok(())
    }
}

/// Names accepted in configuration files, for `--list-scores`.
pub fn catalog() -> String {
    let lines = [
        "scores (score = ...):",
        "  ece, ace, mce          bins = { count, mode = equal_width|equal_frequency, feature? }",
        "  mlce                   kernel = { shape, bandwidth, space, metric? }, bins, absolute = false",
        "  brier",
        "  brier_decomposition    by = predictions|inputs",
        "  local_errors           grouping",
        "  global                 grouping, signedness = signed|absolute, agglomerator, measure?",
        "groupings (kind = ...):",
        "  bins                   bins",
        "  feature_grid           bins_per_dim, metric?",
        "  level_sets             by",
        "  knn                    k, metric?, space = features|predictions",
        "  kernel                 kernel",
        "  mlce                   kernel, bins",
        "measures (kind = ...): uniform, empirical, explicit (weights = [...])",
        "agglomerators (kind = ...):",
        "  mean, max, cvar { alpha }, cvar_mixture { components = [[alpha, weight], ...] }",
        "  std_dev, range_dev, superquantile_dev { alpha }",
        "  quadrangle_risk { inner }, quadrangle_dev { inner }",
        "kernel shapes: gaussian, epanechnikov, boxcar",
        "metrics: norm = l1|l2|l_inf, scaling = none|range|std_dev",
        "experiments (kind = ...):",
        "  axioms                 agglomerator, axioms = [A1..A7, Aversity, DeviationBound], trials, tolerance",
        "  variance               distribution, predictor, group_size, resamples",
        "  resolution             labels1, labels2, epsilon",
        "  overlap                d, k, n, norm?",
        "  knn_consistency        distribution, predictor, sizes, schedule?, anchors",
        "  kernel_consistency     distribution, predictor, sizes, schedule?, anchors, shape",
    ];
    let mut out = lines.join("\n");
    out.push('\n');
    out
}
