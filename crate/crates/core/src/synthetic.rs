//! Synthetic distributions with known Bayes predictors, and fixtures that
//! turn resolution, variance, overlap and consistency arguments into
//! runnable experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{group_error, Dataset, Group};
use crate::error::{Error, Result};
use crate::grouping::{KernelShape, MetricSpec, NeighborIndex, Norm, Space};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureLaw {
    /// Uniform on the unit cube.
    Uniform,
    StandardNormal,
}

/// Family of conditional label probabilities `p(x) = P(Y = 1 | X = x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BayesFamily {
    /// `clamp(intercept + w·x, 0, 1)`.
    LinearClipped { intercept: f64, weights: Vec<f64> },
    /// `1 / (1 + exp(-(intercept + w·x)))`.
    Logistic { intercept: f64, weights: Vec<f64> },
    /// `high` where `x[dim] > threshold`, else `low`.
    Step { dim: usize, threshold: f64, low: f64, high: f64 },
    Constant { p: f64 },
}

impl BayesFamily {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let affine = |b: f64, w: &[f64]| b + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        match self {
            BayesFamily::LinearClipped { intercept, weights } => affine(*intercept, weights).clamp(0.0, 1.0),
            BayesFamily::Logistic { intercept, weights } => 1.0 / (1.0 + (-affine(*intercept, weights)).exp()),
            BayesFamily::Step { dim, threshold, low, high } => {
                if x[*dim] > *threshold {
                    *high
                } else {
                    *low
                }
            }
            BayesFamily::Constant { p } => *p,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            BayesFamily::LinearClipped { intercept, weights } | BayesFamily::Logistic { intercept, weights } => {
                if weights.len() != dim {
                    return bad(format!("{} weights for dimension {dim}", weights.len()));
                }
                if !intercept.is_finite() || weights.iter().any(|w| !w.is_finite()) {
                    return bad("non-finite coefficient".into());
                }
            }
            BayesFamily::Step { dim: s, threshold, low, high } => {
                if *s >= dim {
                    return bad(format!("step dimension {s} out of range for dimension {dim}"));
                }
                if !threshold.is_finite() || !(0.0..=1.0).contains(low) || !(0.0..=1.0).contains(high) {
                    return bad("step levels must lie in [0, 1]".into());
                }
            }
            BayesFamily::Constant { p } => {
                if !(0.0..=1.0).contains(p) {
                    return bad(format!("constant probability {p} outside [0, 1]"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub dim: usize,
    pub feature_law: FeatureLaw,
    pub bayes: BayesFamily,
    pub n: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("sample size must be positive".into()));
        }
        self.bayes.validate(self.dim)
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    fn draw_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.dim)
            .map(|_| match self.feature_law {
                FeatureLaw::Uniform => rng.random::<f64>(),
                FeatureLaw::StandardNormal => rng.sample(StandardNormal),
            })
            .collect()
    }
}

/// The predictor column attached to a synthetic sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predictor {
    /// The Bayes predictor itself.
    Oracle,
    /// `clamp(p(x) + shift, 0, 1)`.
    OracleShift { shift: f64 },
    Constant { p: f64 },
    Family { family: BayesFamily },
}

impl Predictor {
    pub fn eval(&self, bayes: &BayesFamily, x: &[f64]) -> f64 {
        match self {
            Predictor::Oracle => bayes.eval(x),
            Predictor::OracleShift { shift } => (bayes.eval(x) + shift).clamp(0.0, 1.0),
            Predictor::Constant { p } => *p,
            Predictor::Family { family } => family.eval(x),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Predictor::Constant { p } if !(0.0..=1.0).contains(p) => {
                Err(Error::InvalidParameter(format!("constant prediction {p} outside [0, 1]")))
            }
            Predictor::OracleShift { shift } if !shift.is_finite() => {
                Err(Error::InvalidParameter("shift must be finite".into()))
            }
            Predictor::Family { family } => family.validate(dim),
            _ => Ok(()),
        }
    }
}

/// Features and labels drawn from a synthetic spec, before a predictor is attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub spec: SyntheticSpec,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
}

impl Sample {
    /// The Bayes predictor `p(x)` of the generating distribution.
    pub fn oracle(&self, x: &[f64]) -> f64 {
        self.spec.bayes.eval(x)
    }

    pub fn with_predictor(&self, predictor: &Predictor) -> Result<Dataset<f64>> {
        predictor.validate(self.spec.dim)?;
        let predictions = self.features.iter().map(|x| predictor.eval(&self.spec.bayes, x)).collect();
        Dataset::new(self.features.clone(), self.labels.clone(), predictions)
    }
}

/// Draws `spec.n` i.i.d. points: features from the feature law, then a
/// Bernoulli label with probability `p(x)`.
pub fn generate(spec: &SyntheticSpec) -> Result<Sample> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut features = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let x = spec.draw_point(&mut rng);
        labels.push(rng.random::<f64>() < spec.bayes.eval(&x));
        features.push(x);
    }
    Ok(Sample { spec: spec.clone(), features, labels })
}

/// Independent seed for sub-stream `index` of `seed`.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Monte-Carlo sample size for the expected Bernoulli variance.
const VARIANCE_MC_DRAWS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceResult {
    pub group_size: usize,
    pub resamples: usize,
    /// Sample variance of the group error across resampled groups.
    pub empirical: f64,
    /// `E[p(X)(1 - p(X))] / K`.
    pub theoretical: f64,
}

/// Variance of the error of i.i.d. groups of size `k` against its
/// theoretical value. The Monte-Carlo estimate of `E[p(1-p)]` uses the same
/// draws for every `k`, so the theoretical value scales exactly as `1/k`.
pub fn variance_experiment(
    spec: &SyntheticSpec,
    predictor: &Predictor,
    k: usize,
    resamples: usize,
    seed: u64,
) -> Result<VarianceResult> {
    spec.validate()?;
    predictor.validate(spec.dim)?;
    if resamples < 100 {
        return Err(Error::InvalidParameter(format!("at least 100 resamples are required, got {resamples}")));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("group size must be positive".into()));
    }
    let errors: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1, r as u64));
            let total: f64 = (0..k)
                .map(|_| {
                    let x = spec.draw_point(&mut rng);
                    let y = rng.random::<f64>() < spec.bayes.eval(&x);
                    predictor.eval(&spec.bayes, &x) - f64::from(u8::from(y))
                })
                .sum();
            total / k as f64
        })
        .collect();
    let mean = errors.iter().sum::<f64>() / resamples as f64;
    let empirical = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (resamples - 1) as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2, 0));
    let bernoulli_var = (0..VARIANCE_MC_DRAWS)
        .map(|_| {
            let p = spec.bayes.eval(&spec.draw_point(&mut rng));
            p * (1.0 - p)
        })
        .sum::<f64>()
        / VARIANCE_MC_DRAWS as f64;
    Ok(VarianceResult { group_size: k, resamples, empirical, theoretical: bernoulli_var / k as f64 })
}

#[derive(Debug, Clone)]
pub struct ResolutionFixture {
    pub dataset: Dataset<f64>,
    pub first: Group,
    pub second: Group,
    /// Whether the two groups share the same label mean (two-level predictor).
    pub equal_means: bool,
}

/// Two groups on distinct inputs with a predictor that is calibrated on
/// their union but on neither group. `epsilon` is only used when the label
/// means coincide.
pub fn resolution_fixture(labels1: &[bool], labels2: &[bool], epsilon: f64) -> Result<ResolutionFixture> {
    if labels1.is_empty() || labels2.is_empty() {
        return Err(Error::InvalidParameter("both label lists must be nonempty".into()));
    }
    let all: Vec<bool> = labels1.iter().chain(labels2).copied().collect();
    if all.iter().all(|&y| y == all[0]) {
        return Err(Error::InvalidParameter("all labels are equal; no such predictor exists".into()));
    }
    let (n1, n2) = (labels1.len(), labels2.len());
    let (s1, s2) = (labels1.iter().filter(|&&y| y).count(), labels2.iter().filter(|&&y| y).count());
    let n = (n1 + n2) as f64;
    let equal_means = s1 * n2 == s2 * n1;
    let (p1, p2) = if equal_means {
        let z = s1 as f64 / n1 as f64;
        let upper = (z * n / n1 as f64).min((1.0 - z) * n / n2 as f64);
        if !(epsilon > 0.0 && epsilon < upper) {
            return Err(Error::InfeasibleEpsilon { epsilon, upper });
        }
        (z + epsilon * n2 as f64 / n, z - epsilon * n1 as f64 / n)
    } else {
        let z = (s1 + s2) as f64 / n;
        (z, z)
    };
    let features = (0..n1 + n2).map(|i| vec![i as f64]).collect();
    let predictions = (0..n1 + n2).map(|i| if i < n1 { p1 } else { p2 }).collect();
    Ok(ResolutionFixture {
        dataset: Dataset::new(features, all, predictions)?,
        first: Group::new((0..n1).collect())?,
        second: Group::new((n1..n1 + n2).collect())?,
        equal_means,
    })
}

/// Point configuration on which k-NN group membership is maximally uneven:
/// an outlier at `3·e_1`, axis points at distinct radii in `(0.5, 0.9]` along
/// `±e_s`, optional surplus points at `-2·e_1`, and the origin last.
pub fn overlap_fixture(d: usize, k: usize, n: usize) -> Result<Vec<Vec<f64>>> {
    if d == 0 || k < 2 || n < 2 {
        return Err(Error::InvalidParameter("need d >= 1, k >= 2 and N >= 2".into()));
    }
    let radius = |j: usize| 0.5 + 0.4 * j as f64 / (k - 1) as f64;
    let axis_point = |s: usize, sign: f64, r: f64| {
        let mut x = vec![0.0; d];
        x[s] = sign * r;
        x
    };
    // round-robin over rays so truncation keeps rays balanced
    let mut axis = Vec::new();
    for j in 1..k {
        for s in 0..d {
            if !(s == 0 && j == k - 1) {
                axis.push(axis_point(s, 1.0, radius(j)));
            }
            axis.push(axis_point(s, -1.0, radius(j)));
        }
    }
    let mut points = vec![axis_point(0, 1.0, 3.0)];
    points.extend(axis.into_iter().take(n - 2));
    while points.len() < n - 1 {
        points.push(axis_point(0, -1.0, 2.0));
    }
    points.push(vec![0.0; d]);
    Ok(points)
}

/// How the neighbourhood parameter scales with sample size: `scale · N^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub scale: f64,
    pub exponent: f64,
}

impl Schedule {
    /// `k = ⌈√N⌉`.
    pub fn default_knn() -> Self {
        Self { scale: 1.0, exponent: 0.5 }
    }

    /// `γ = N^(-1/(d+2))`.
    pub fn default_bandwidth(dim: usize) -> Self {
        Self { scale: 1.0, exponent: -1.0 / (dim as f64 + 2.0) }
    }

    pub fn at(&self, n: usize) -> f64 {
        self.scale * (n as f64).powf(self.exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Knn,
    Kernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub n: usize,
    /// `k` for k-NN, the bandwidth for kernels.
    pub parameter: f64,
    /// Mean absolute deviation between estimated and true individual error.
    pub deviation: f64,
    pub anchors: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyLadder {
    pub estimator: Estimator,
    pub schedule: String,
    pub rungs: Vec<Rung>,
}

impl ConsistencyLadder {
    /// Each rung is at most `1 + allowance` times the previous one.
    pub fn is_decreasing(&self, allowance: f64) -> bool {
        self.rungs.windows(2).all(|w| w[1].deviation <= w[0].deviation * (1.0 + allowance))
    }

    pub fn final_below_half_of_first(&self) -> bool {
        match (self.rungs.first(), self.rungs.last()) {
            (Some(a), Some(b)) => self.rungs.len() > 1 && b.deviation < 0.5 * a.deviation,
            _ => false,
        }
    }
}

/// Shared settings of a consistency ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    pub sizes: Vec<usize>,
    pub schedule: Schedule,
    pub anchors: usize,
    pub metric: MetricSpec,
    pub kernel: KernelShape,
}

impl LadderConfig {
    pub fn new(sizes: Vec<usize>, schedule: Schedule) -> Self {
        Self { sizes, schedule, anchors: 1000, metric: MetricSpec::unscaled(Norm::L2), kernel: KernelShape::Gaussian }
    }

    fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes.windows(2).any(|w| w[1] <= w[0]) || self.sizes[0] == 0 {
            return Err(Error::InvalidParameter("ladder sizes must be positive and strictly increasing".into()));
        }
        if self.anchors < 500 {
            return Err(Error::InvalidParameter(format!("at least 500 anchors are required, got {}", self.anchors)));
        }
        if !(self.schedule.scale > 0.0 && self.schedule.exponent.is_finite()) {
            return Err(Error::InvalidParameter("schedule scale must be positive".into()));
        }
        Ok(())
    }
}

/// Local k-NN errors at fresh anchors against the true individual error
/// `p̂(x) - p(x)`, along a ladder of sample sizes.
pub fn knn_consistency(spec: &SyntheticSpec, predictor: &Predictor, config: &LadderConfig) -> Result<ConsistencyLadder> {
    ladder(spec, predictor, config, Estimator::Knn)
}

/// Kernel-weighted means of `p̂(x_i) - y_i` at fresh anchors against the
/// true individual error, along a ladder of sample sizes.
pub fn kernel_consistency(spec: &SyntheticSpec, predictor: &Predictor, config: &LadderConfig) -> Result<ConsistencyLadder> {
    ladder(spec, predictor, config, Estimator::Kernel)
}

fn ladder(spec: &SyntheticSpec, predictor: &Predictor, config: &LadderConfig, estimator: Estimator) -> Result<ConsistencyLadder> {
    spec.validate()?;
    predictor.validate(spec.dim)?;
    config.validate()?;
    let mut rungs = Vec::with_capacity(config.sizes.len());
    for (r, &n) in config.sizes.iter().enumerate() {
        let seed = derive_seed(spec.seed, 3, r as u64);
        let sample = generate(&spec.with_n(n).with_seed(seed))?;
        let dataset = sample.with_predictor(predictor)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 4, 0));
        let anchors: Vec<Vec<f64>> = (0..config.anchors).map(|_| spec.draw_point(&mut rng)).collect();
        let index = NeighborIndex::new(&dataset, config.metric, Space::Features);
        let raw = config.schedule.at(n);
        let parameter = match estimator {
            Estimator::Knn => raw.ceil().clamp(1.0, n as f64),
            Estimator::Kernel => raw,
        };
        let deviations: Vec<f64> = anchors
            .par_iter()
            .map(|a| {
                let distances = index.distances_to_point(a);
                let estimate = match estimator {
                    Estimator::Knn => group_error(&dataset, &index.nearest(&distances, parameter as usize))?,
                    Estimator::Kernel => {
                        let w = index.kernel_weights(&distances, config.kernel, parameter);
                        let total: f64 = w.iter().map(|(_, w)| w).sum();
                        if total <= 0.0 {
                            return Err(Error::InvalidParameter(format!(
                                "kernel weights vanish at an anchor for N = {n}, bandwidth {parameter}"
                            )));
                        }
                        w.iter().map(|&(i, w)| w * dataset.residual(i)).sum::<f64>() / total
                    }
                };
                let truth = predictor.eval(&spec.bayes, a) - spec.bayes.eval(a);
                Ok((estimate - truth).abs())
            })
            .collect::<Result<_>>()?;
        let deviation = deviations.iter().sum::<f64>() / deviations.len() as f64;
        rungs.push(Rung { n, parameter, deviation, anchors: config.anchors, seed });
    }
    let schedule = match estimator {
        Estimator::Knn => format!("k = ceil({} * N^{})", config.schedule.scale, config.schedule.exponent),
        Estimator::Kernel => format!(
            "bandwidth = {} * N^{} ({:?} kernel, {})",
            config.schedule.scale, config.schedule.exponent, config.kernel, config.metric
        ),
    };
    Ok(ConsistencyLadder { estimator, schedule, rungs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grouping::{knn_groups, membership_counts};

    fn constant(p: f64, n: usize) -> SyntheticSpec {
        SyntheticSpec { dim: 1, feature_law: FeatureLaw::Uniform, bayes: BayesFamily::Constant { p }, n, seed: 7 }
    }

    #[test]
    fn degenerate_probabilities() {
        assert!(generate(&constant(0.0, 200)).unwrap().labels.iter().all(|&y| !y));
        assert!(generate(&constant(1.0, 200)).unwrap().labels.iter().all(|&y| y));
        let s = generate(&constant(0.5, 100_000)).unwrap();
        let mean = s.labels.iter().filter(|&&y| y).count() as f64 / 1e5;
        assert!((0.49..=0.51).contains(&mean));
    }

    #[test]
    fn generation_is_reproducible() {
        let spec = SyntheticSpec {
            dim: 3,
            feature_law: FeatureLaw::StandardNormal,
            bayes: BayesFamily::Logistic { intercept: 0.1, weights: vec![1.0, -1.0, 0.5] },
            n: 50,
            seed: 3,
        };
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        assert_ne!(generate(&spec).unwrap(), generate(&spec.with_seed(4)).unwrap());
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = constant(1.5, 10);
        assert!(generate(&spec).is_err());
        spec.bayes = BayesFamily::LinearClipped { intercept: 0.0, weights: vec![1.0, 1.0] };
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn variance_theory() {
        let r = variance_experiment(&constant(0.5, 1), &Predictor::Oracle, 25, 100, 1).unwrap();
        assert_eq!(r.theoretical, 0.01);
        let r2 = variance_experiment(&constant(0.5, 1), &Predictor::Oracle, 50, 100, 1).unwrap();
        assert_eq!(r2.theoretical * 2.0, r.theoretical);
        for p in [0.0, 1.0] {
            assert_eq!(variance_experiment(&constant(p, 1), &Predictor::Oracle, 7, 100, 1).unwrap().theoretical, 0.0);
        }
        assert!(variance_experiment(&constant(0.5, 1), &Predictor::Oracle, 7, 99, 1).is_err());
    }

    #[test]
    fn resolution_examples() {
        let f = resolution_fixture(&[false, true], &[false, true], 0.2).unwrap();
        let c = |g: &Group| group_error(&f.dataset, g).unwrap();
        assert!(f.equal_means);
        assert!((c(&f.first) - 0.1).abs() < 1e-12 && (c(&f.second) + 0.1).abs() < 1e-12);
        assert!(c(&Group::all(4)).abs() < 1e-12);

        let f = resolution_fixture(&[true, true], &[false, false], 0.2).unwrap();
        let c = |g: &Group| group_error(&f.dataset, g).unwrap();
        assert!(!f.equal_means);
        assert!((c(&f.first) + 0.5).abs() < 1e-12 && (c(&f.second) - 0.5).abs() < 1e-12);

        assert!(resolution_fixture(&[true], &[true, true], 0.1).is_err());
        match resolution_fixture(&[false, true], &[false, true], 2.0) {
            Err(Error::InfeasibleEpsilon { upper, .. }) => assert!((upper - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    fn overlap_counts(d: usize, k: usize, n: usize) -> (usize, usize) {
        let features = overlap_fixture(d, k, n).unwrap();
        let ds = Dataset::new(features, vec![false; n], vec![0.5; n]).unwrap();
        let g = knn_groups(&ds, k, MetricSpec::unscaled(Norm::L2), Space::Features).unwrap();
        let counts = membership_counts(&g).unwrap();
        (*counts.iter().max().unwrap(), *counts.iter().min().unwrap())
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(overlap_counts(2, 3, 9), (9, 1));
        assert_eq!(overlap_counts(1, 2, 3), (3, 1));
        let (_, min) = overlap_counts(2, 3, 3);
        assert!(min > 1);
    }

    #[test]
    fn knn_ladder_constant_model() {
        let spec = constant(0.3, 1);
        let config = LadderConfig::new(vec![100, 10_000], Schedule::default_knn());
        let ladder = knn_consistency(&spec, &Predictor::Constant { p: 0.3 }, &config).unwrap();
        assert_eq!(ladder.rungs[0].parameter, 10.0);
        assert!(ladder.final_below_half_of_first(), "{ladder:?}");
    }

    #[test]
    fn boxcar_wide_bandwidth_is_global_mean() {
        let spec = constant(0.3, 1);
        let mut config = LadderConfig::new(vec![300], Schedule { scale: 10.0, exponent: 0.0 });
        config.kernel = KernelShape::Boxcar;
        let ladder = kernel_consistency(&spec, &Predictor::Oracle, &config).unwrap();
        let sample = generate(&spec.with_n(300).with_seed(ladder.rungs[0].seed)).unwrap();
        let mean = sample.labels.iter().filter(|&&y| y).count() as f64 / 300.0;
        assert!((ladder.rungs[0].deviation - (mean - 0.3).abs()).abs() < 1e-12);
    }

    #[test]
    fn ladder_config_checks() {
        let spec = constant(0.3, 1);
        let bad = LadderConfig::new(vec![200, 100], Schedule::default_knn());
        assert!(knn_consistency(&spec, &Predictor::Oracle, &bad).is_err());
        let mut few = LadderConfig::new(vec![100], Schedule::default_knn());
        few.anchors = 10;
        assert!(knn_consistency(&spec, &Predictor::Oracle, &few).is_err());
    }
}
