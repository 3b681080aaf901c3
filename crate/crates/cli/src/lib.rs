//! Batch front end: load a CSV dataset, execute the scores and experiments
//! named in a TOML config, and emit a deterministic report.

pub mod config;
pub mod load;
pub mod report;

use calagg::axioms::check_axioms;
use calagg::grouping::{bins, feature_grid, kernel_distributions, knn_groups, level_sets, membership_counts, mlce_groups};
use calagg::scores::{ace, brier, brier_decomposition, ece, global_score, local_errors, mce, mlce, Fingerprint};
use calagg::synthetic::{
    derive_seed, kernel_consistency, knn_consistency, overlap_fixture, resolution_fixture, variance_experiment,
    LadderConfig, Schedule, SyntheticSpec,
};
use calagg::{group_error, Dataset64, Group, Grouping64, MetricSpec, Space};

pub use config::RunConfig;
use config::{DistributionConfig, ExperimentRequest, GroupingConfig, ScoreRequest};
pub use load::load_dataset;
pub use report::Report;
use report::{DatasetSummary, ExperimentEntry, ExperimentResult, LadderSummary, LocalError, OverlapSummary, ResolutionSummary, ScoreEntry, ScoreResult};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("execution failed: {0}")]
    Execution(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Execution(_) => 2,
        }
    }
}

/// Stream index reserved for per-experiment seeds.
const EXPERIMENT_STREAM: u64 = 100;

/// Validates the config, loads its dataset, and runs every request in order.
pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    let dataset = match &config.dataset {
        Some(d) => Some(load_dataset(&d.path, &d.roles)?),
        None => None,
    };
    let summary = dataset.as_ref().zip(config.dataset.as_ref()).map(|(ds, cfg)| summarize(ds, &cfg.path.display().to_string()));

    let mut scores = Vec::with_capacity(config.scores.len());
    for (i, request) in config.scores.iter().enumerate() {
        let ds = dataset.as_ref().expect("validated: scores imply a dataset");
        let result = run_score(ds, request)
            .map_err(|e| CliError::Execution(format!("score request #{} ({}): {e}", i + 1, request.kind())))?;
        scores.push(ScoreEntry { index: i + 1, request: request.clone(), result });
    }

    let mut experiments = Vec::with_capacity(config.experiments.len());
    for (i, request) in config.experiments.iter().enumerate() {
        let seed = config.seed.filter(|_| request.is_randomized()).map(|s| derive_seed(s, EXPERIMENT_STREAM, i as u64));
        let result = run_experiment(request, seed.unwrap_or(0))
            .map_err(|e| CliError::Execution(format!("experiment #{} ({}): {e}", i + 1, request.kind())))?;
        experiments.push(ExperimentEntry { index: i + 1, seed, request: request.clone(), result });
    }

    Ok(Report { config: config.clone(), seed: config.seed, dataset: summary, scores, experiments })
}

fn summarize(ds: &Dataset64, path: &str) -> DatasetSummary {
    let n = ds.len() as f64;
    DatasetSummary {
        path: path.to_string(),
        fingerprint: Fingerprint::of(ds),
        features: ds.feature_names().map(<[String]>::to_vec).unwrap_or_default(),
        label_mean: ds.labels().iter().filter(|&&y| y).count() as f64 / n,
        prediction_mean: ds.predictions().iter().sum::<f64>() / n,
    }
}

fn build_grouping(ds: &Dataset64, g: &GroupingConfig) -> calagg::Result<Grouping64> {
    match g {
        GroupingConfig::Bins { bins: b } => bins(ds, &b.scheme()),
        GroupingConfig::FeatureGrid { bins_per_dim, metric } => feature_grid(ds, bins_per_dim, *metric),
        GroupingConfig::LevelSets { by } => level_sets(ds, *by),
        GroupingConfig::Knn { k, metric, space } => knn_groups(ds, *k, *metric, *space),
        GroupingConfig::Kernel { kernel } => kernel_distributions(ds, kernel),
        GroupingConfig::Mlce { kernel, bins: b } => mlce_groups(ds, kernel, &b.scheme()),
    }
}

fn run_score(ds: &Dataset64, request: &ScoreRequest) -> calagg::Result<ScoreResult> {
    Ok(match request {
        ScoreRequest::Ece { bins: b } => ScoreResult::Report(ece(ds, &b.scheme())?),
        ScoreRequest::Ace { bins: b } => ScoreResult::Report(ace(ds, &b.scheme())?),
        ScoreRequest::Mce { bins: b } => ScoreResult::Report(mce(ds, &b.scheme())?),
        ScoreRequest::Mlce { kernel, bins: b, absolute } => ScoreResult::Report(mlce(ds, kernel, &b.scheme(), *absolute)?),
        ScoreRequest::Brier => ScoreResult::Value { value: brier(ds) },
        ScoreRequest::BrierDecomposition { by } => ScoreResult::Decomposition(brier_decomposition(ds, *by)?),
        ScoreRequest::LocalErrors { grouping } => {
            let g = build_grouping(ds, grouping)?;
            ScoreResult::Local {
                local_errors: local_errors(ds, &g)?
                    .into_iter()
                    .map(|(anchor, signed)| LocalError { anchor, signed })
                    .collect(),
            }
        }
        ScoreRequest::Global { grouping, signedness, agglomerator, measure } => {
            let mut g = build_grouping(ds, grouping)?;
            if let Some(m) = measure {
                g = g.with_measure(m.clone())?;
            }
            ScoreResult::Report(global_score(ds, &g, *signedness, agglomerator)?)
        }
    })
}

fn synthetic_spec(d: &DistributionConfig, n: usize, seed: u64) -> SyntheticSpec {
    SyntheticSpec { dim: d.dim, feature_law: d.feature_law, bayes: d.bayes.clone(), n, seed }
}

fn run_experiment(request: &ExperimentRequest, seed: u64) -> calagg::Result<ExperimentResult> {
    Ok(match request {
        ExperimentRequest::Axioms { agglomerator, axioms, trials, tolerance } => {
            ExperimentResult::Axioms(check_axioms(agglomerator, axioms, *trials, seed, *tolerance)?)
        }
        ExperimentRequest::Variance { distribution, predictor, group_size, resamples } => ExperimentResult::Variance(
            variance_experiment(&synthetic_spec(distribution, 1, seed), predictor, *group_size, *resamples, seed)?,
        ),
        ExperimentRequest::Resolution { labels1, labels2, epsilon } => {
            let f = resolution_fixture(labels1, labels2, *epsilon)?;
            ExperimentResult::Resolution(ResolutionSummary {
                equal_means: f.equal_means,
                predictions: f.dataset.predictions().to_vec(),
                union_error: group_error(&f.dataset, &Group::all(f.dataset.len()))?,
                first_error: group_error(&f.dataset, &f.first)?,
                second_error: group_error(&f.dataset, &f.second)?,
            })
        }
        ExperimentRequest::Overlap { d, k, n, norm } => {
            let features = overlap_fixture(*d, *k, *n)?;
            let ds = Dataset64::new(features.clone(), vec![false; *n], vec![0.5; *n])?;
            let counts = membership_counts(&knn_groups(&ds, (*k).min(*n), MetricSpec::unscaled(*norm), Space::Features)?)?;
            ExperimentResult::Overlap(OverlapSummary {
                features,
                max: counts.iter().copied().max().unwrap_or(0),
                min: counts.iter().copied().min().unwrap_or(0),
                membership_counts: counts,
            })
        }
        ExperimentRequest::KnnConsistency { distribution, predictor, sizes, schedule, anchors } => {
            let mut config = LadderConfig::new(sizes.clone(), schedule.unwrap_or_else(Schedule::default_knn));
            config.anchors = *anchors;
            let spec = synthetic_spec(distribution, sizes.first().copied().unwrap_or(1), seed);
            ladder(knn_consistency(&spec, predictor, &config)?)
        }
        ExperimentRequest::KernelConsistency { distribution, predictor, sizes, schedule, anchors, shape } => {
            let mut config = LadderConfig::new(
                sizes.clone(),
                schedule.unwrap_or_else(|| Schedule::default_bandwidth(distribution.dim)),
            );
            config.anchors = *anchors;
            config.kernel = *shape;
            let spec = synthetic_spec(distribution, sizes.first().copied().unwrap_or(1), seed);
            ladder(kernel_consistency(&spec, predictor, &config)?)
        }
    })
}

fn ladder(ladder: calagg::synthetic::ConsistencyLadder) -> ExperimentResult {
    ExperimentResult::Ladder(LadderSummary {
        decreasing: ladder.is_decreasing(0.2),
        final_below_half_of_first: ladder.final_below_half_of_first(),
        ladder,
    })
}
