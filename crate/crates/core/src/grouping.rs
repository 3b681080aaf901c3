//! Grouping constructors: prediction bins, feature grids, exact level sets,
//! k-nearest-neighbour families, kernel distributions, kernel-within-bin
//! distributions, and the refinement relation between partitions.
//!
//! Every constructor here yields an input-complete grouping: datapoints with
//! identical feature vectors always land in the same members, with the same
//! weight.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Group, GroupDistribution, Grouping, GroupingKind, Measure, Member, Provenance};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinMode {
    EqualWidth,
    EqualFrequency,
}

/// What a binning scheme partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinSpace {
    Predictions,
    /// A single feature column, by position.
    Feature(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinningScheme {
    pub count: usize,
    pub mode: BinMode,
    pub space: BinSpace,
}

impl BinningScheme {
    pub fn equal_width(count: usize) -> Self {
        Self { count, mode: BinMode::EqualWidth, space: BinSpace::Predictions }
    }

    pub fn equal_frequency(count: usize) -> Self {
        Self { count, mode: BinMode::EqualFrequency, space: BinSpace::Predictions }
    }

    pub fn on_feature(mut self, dim: usize) -> Self {
        self.space = BinSpace::Feature(dim);
        self
    }
}

impl fmt::Display for BinningScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            BinMode::EqualWidth => "equal-width",
            BinMode::EqualFrequency => "equal-frequency",
        };
        match self.space {
            BinSpace::Predictions => write!(f, "{} {mode} bins over predictions", self.count),
            BinSpace::Feature(d) => write!(f, "{} {mode} bins over feature {d}", self.count),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    L1,
    L2,
    LInf,
}

/// Per-dimension divisor applied before taking the norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    None,
    Range,
    StdDev,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub norm: Norm,
    pub scaling: Scaling,
}

impl Default for MetricSpec {
    /// L2 over range-scaled dimensions, so every feature spans a unit interval.
    fn default() -> Self {
        Self { norm: Norm::L2, scaling: Scaling::Range }
    }
}

impl MetricSpec {
    pub fn unscaled(norm: Norm) -> Self {
        Self { norm, scaling: Scaling::None }
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}/{:?}", self.norm, self.scaling)
    }
}

/// A metric with per-dimension divisors fitted to a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedMetric<T> {
    norm: Norm,
    divisors: Vec<T>,
}

impl<T: Scalar> FittedMetric<T> {
    pub fn fit(dataset: &Dataset<T>, spec: MetricSpec) -> Self {
        let d = dataset.dim();
        let n = T::from_usize_lossy(dataset.len());
        let divisors = (0..d)
            .map(|dim| {
                let column = (0..dataset.len()).map(|i| dataset.feature(i, dim));
                let raw = match spec.scaling {
                    Scaling::None => T::one(),
                    Scaling::Range => {
                        let (lo, hi) = column.fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| {
                            (lo.min(v), hi.max(v))
                        });
                        hi - lo
                    }
                    Scaling::StdDev => {
                        let values: Vec<T> = column.collect();
                        let mean = values.iter().copied().sum::<T>() / n;
                        let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
                        var.sqrt()
                    }
                };
                if raw > T::zero() && raw.is_finite() {
                    raw
                } else {
                    T::one()
                }
            })
            .collect();
        Self { norm: spec.norm, divisors }
    }

    pub fn divisors(&self) -> &[T] {
        &self.divisors
    }

    pub fn distance(&self, a: &[T], b: &[T]) -> T {
        let scaled = a.iter().zip(b).zip(&self.divisors).map(|((&x, &y), &s)| ((x - y) / s).abs());
        match self.norm {
            Norm::L1 => scaled.sum(),
            Norm::L2 => scaled.map(|v| v * v).sum::<T>().sqrt(),
            Norm::LInf => scaled.fold(T::zero(), T::max),
        }
    }
}

/// Space in which neighbourhoods are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Features,
    Predictions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelShape {
    /// `exp(-t²/2)`
    Gaussian,
    /// `max(0, 1 - t²)`
    Epanechnikov,
    /// `1` on `t ≤ 1`, else `0`
    Boxcar,
}

/// Constants certifying that a kernel profile `H` yields consistent local
/// estimates: `c1·H(|x|) ≤ k(x) ≤ c2·H(|x|)`, `k(x) ≥ c3` on `|x| ≤ r`, `H`
/// bounded and decreasing with `t^d·H(t) → 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelWitness {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub r: f64,
    pub compact_support: bool,
}

impl KernelShape {
    pub fn eval<T: Scalar>(self, t: T) -> T {
        match self {
            KernelShape::Gaussian => (-(t * t) / T::lit(2.0)).exp(),
            KernelShape::Epanechnikov => (T::one() - t * t).max(T::zero()),
            KernelShape::Boxcar => {
                if t <= T::one() {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }

    /// Every shape is its own profile `H` (so `c1 = c2 = 1`).
    pub fn witness(self) -> KernelWitness {
        match self {
            KernelShape::Gaussian => KernelWitness { c1: 1.0, c2: 1.0, c3: (-0.5f64).exp(), r: 1.0, compact_support: false },
            KernelShape::Epanechnikov => KernelWitness { c1: 1.0, c2: 1.0, c3: 0.75, r: 0.5, compact_support: true },
            KernelShape::Boxcar => KernelWitness { c1: 1.0, c2: 1.0, c3: 1.0, r: 1.0, compact_support: true },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec<T> {
    pub shape: KernelShape,
    pub bandwidth: T,
    pub space: Space,
    #[serde(default)]
    pub metric: MetricSpec,
}

impl<T: Scalar> KernelSpec<T> {
    pub fn gaussian(bandwidth: T) -> Self {
        Self { shape: KernelShape::Gaussian, bandwidth, space: Space::Features, metric: MetricSpec::default() }
    }

    pub fn boxcar(bandwidth: T) -> Self {
        Self { shape: KernelShape::Boxcar, ..Self::gaussian(bandwidth) }
    }

    pub fn with_metric(mut self, metric: MetricSpec) -> Self {
        self.metric = metric;
        self
    }

    pub fn with_space(mut self, space: Space) -> Self {
        self.space = space;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.bandwidth > T::zero() && self.bandwidth.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bandwidth must be positive, got {}", self.bandwidth)))
        }
    }
}

/// Bin index of every datapoint under the scheme.
pub fn bin_assignment<T: Scalar>(dataset: &Dataset<T>, scheme: &BinningScheme) -> Result<Vec<usize>> {
    let k = scheme.count;
    if k == 0 {
        return Err(Error::InvalidParameter("bin count must be at least 1".into()));
    }
    let values: Vec<T> = match scheme.space {
        BinSpace::Predictions => dataset.predictions().to_vec(),
        BinSpace::Feature(dim) => {
            if dim >= dataset.dim() {
                return Err(Error::InvalidParameter(format!(
                    "feature {dim} does not exist (dimension {})",
                    dataset.dim()
                )));
            }
            (0..dataset.len()).map(|i| dataset.feature(i, dim)).collect()
        }
    };
    match scheme.mode {
        BinMode::EqualWidth => {
            let (lo, hi) = match scheme.space {
                BinSpace::Predictions => (T::zero(), T::one()),
                BinSpace::Feature(_) => observed_range(&values),
            };
            Ok(values.iter().map(|&v| equal_width_bin(v, lo, hi, k)).collect())
        }
        BinMode::EqualFrequency => {
            if dataset.len() < k {
                return Err(Error::InvalidParameter(format!(
                    "equal-frequency binning needs at least {k} datapoints, got {}",
                    dataset.len()
                )));
            }
            let cuts = quantile_cuts(&values, k);
            Ok(values.iter().map(|v| cuts.partition_point(|c| c <= v)).collect())
        }
    }
}

fn observed_range<T: Scalar>(values: &[T]) -> (T, T) {
    values
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Interior cut points `c_1..c_{K-1}` from the sorted values.
fn quantile_cuts<T: Scalar>(values: &[T], k: usize) -> Vec<T> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let n = sorted.len();
    (1..k).map(|j| sorted[j * n / k]).collect()
}

/// Half-open `[l, u)` bins of `[lo, hi]`, the top bin closed.
fn equal_width_bin<T: Scalar>(v: T, lo: T, hi: T, k: usize) -> usize {
    if k == 1 || hi <= lo {
        return 0;
    }
    let kk = T::from_usize_lossy(k);
    let edge = |j: usize| lo + (hi - lo) * T::from_usize_lossy(j) / kk;
    let guess = ((v - lo) / (hi - lo) * kk).floor().to_usize().unwrap_or(0);
    let mut b = guess.min(k - 1);
    // exact edge comparison decides membership, not the rounded guess
    while b + 1 < k && v >= edge(b + 1) {
        b += 1;
    }
    while b > 0 && v < edge(b) {
        b -= 1;
    }
    b
}

fn partition_from_keys<T: Scalar, K: Ord>(
    dataset: &Dataset<T>,
    keys: impl Iterator<Item = K>,
    provenance: Provenance,
) -> Result<Grouping<T>> {
    let mut cells: BTreeMap<K, Vec<usize>> = BTreeMap::new();
    for (i, key) in keys.enumerate() {
        cells.entry(key).or_default().push(i);
    }
    let groups = cells.into_values().map(Group::from_sorted).collect();
    Ok(Grouping::partition(dataset.len(), groups, Measure::Empirical, provenance)?.assume_input_complete())
}

/// Partition by bins of the chosen space (predictions or one feature).
/// Empty bins are omitted; the measure is empirical.
pub fn bins<T: Scalar>(dataset: &Dataset<T>, scheme: &BinningScheme) -> Result<Grouping<T>> {
    let assignment = bin_assignment(dataset, scheme)?;
    let provenance = Provenance::new("bins")
        .param("count", scheme.count)
        .param("mode", format!("{:?}", scheme.mode))
        .param("space", format!("{:?}", scheme.space));
    partition_from_keys(dataset, assignment.into_iter(), provenance)
}

/// Partition by prediction bins, the grouping behind ECE, ACE and MCE.
pub fn prediction_bins<T: Scalar>(dataset: &Dataset<T>, scheme: &BinningScheme) -> Result<Grouping<T>> {
    if scheme.space != BinSpace::Predictions {
        return Err(Error::InvalidParameter("prediction_bins requires a scheme over predictions".into()));
    }
    let assignment = bin_assignment(dataset, scheme)?;
    let provenance = Provenance::new("prediction_bins")
        .param("count", scheme.count)
        .param("mode", format!("{:?}", scheme.mode));
    partition_from_keys(dataset, assignment.into_iter(), provenance)
}

/// Product grid of per-dimension equal-width bins over each feature's
/// observed range. Only nonempty cells become groups.
pub fn feature_grid<T: Scalar>(dataset: &Dataset<T>, bins_per_dim: &[usize], metric: MetricSpec) -> Result<Grouping<T>> {
    if bins_per_dim.len() != dataset.dim() {
        return Err(Error::InvalidParameter(format!(
            "{} bin counts for {} feature dimensions",
            bins_per_dim.len(),
            dataset.dim()
        )));
    }
    if bins_per_dim.contains(&0) {
        return Err(Error::InvalidParameter("every dimension needs at least one bin".into()));
    }
    let mut provenance = Provenance::new("feature_grid")
        .param("bins_per_dim", format!("{bins_per_dim:?}"))
        .param("metric", metric);
    let mut counts = bins_per_dim.to_vec();
    let mut ranges = Vec::with_capacity(dataset.dim());
    for (dim, count) in counts.iter_mut().enumerate() {
        let column: Vec<T> = (0..dataset.len()).map(|i| dataset.feature(i, dim)).collect();
        let (lo, hi) = observed_range(&column);
        if hi <= lo && *count > 1 {
            provenance = provenance.note(format!(
                "warning: feature {dim} is constant; collapsed {count} bins to 1"
            ));
            *count = 1;
        }
        ranges.push((lo, hi));
    }
    let keys = (0..dataset.len()).map(|i| {
        (0..dataset.dim())
            .map(|dim| equal_width_bin(dataset.feature(i, dim), ranges[dim].0, ranges[dim].1, counts[dim]))
            .collect::<Vec<_>>()
    });
    partition_from_keys(dataset, keys, provenance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelKey {
    Predictions,
    Inputs,
}

/// Partition into groups of exactly equal predictions or exactly equal inputs,
/// ordered by first occurrence.
pub fn level_sets<T: Scalar>(dataset: &Dataset<T>, by: LevelKey) -> Result<Grouping<T>> {
    let provenance = Provenance::new("level_sets").param("by", format!("{by:?}"));
    let keys: Vec<usize> = match by {
        LevelKey::Inputs => (0..dataset.len()).map(|i| dataset.input_class(i)).collect(),
        LevelKey::Predictions => {
            let mut ids = std::collections::HashMap::new();
            dataset
                .predictions()
                .iter()
                .map(|p| {
                    let next = ids.len();
                    *ids.entry(p.identity_key()).or_insert(next)
                })
                .collect()
        }
    };
    partition_from_keys(dataset, keys.into_iter(), provenance)
}

/// Nearest-neighbour queries against a dataset, in feature or prediction space.
pub struct NeighborIndex<'a, T> {
    dataset: &'a Dataset<T>,
    metric: FittedMetric<T>,
    space: Space,
    class_members: Vec<Vec<usize>>,
}

impl<'a, T: Scalar> NeighborIndex<'a, T> {
    pub fn new(dataset: &'a Dataset<T>, metric: MetricSpec, space: Space) -> Self {
        let mut class_members = vec![Vec::new(); dataset.input_class_count()];
        for i in 0..dataset.len() {
            class_members[dataset.input_class(i)].push(i);
        }
        Self { dataset, metric: FittedMetric::fit(dataset, metric), space, class_members }
    }

    pub fn metric(&self) -> &FittedMetric<T> {
        &self.metric
    }

    /// Distance from an external feature vector to every datapoint.
    pub fn distances_to_point(&self, x: &[T]) -> Vec<T> {
        (0..self.dataset.len()).map(|i| self.metric.distance(x, self.dataset.features(i))).collect()
    }

    /// Distance from an external prediction value to every datapoint's prediction.
    pub fn distances_to_prediction(&self, p: T) -> Vec<T> {
        self.dataset.predictions().iter().map(|&q| (p - q).abs()).collect()
    }

    fn distances_to_anchor(&self, anchor: usize) -> Vec<T> {
        match self.space {
            Space::Features => self.distances_to_point(self.dataset.features(anchor)),
            Space::Predictions => self.distances_to_prediction(self.dataset.prediction(anchor)),
        }
    }

    /// The `k` nearest datapoints under the given distances, ties broken by
    /// smaller index, then widened to every duplicate of an included input.
    pub fn nearest(&self, distances: &[T], k: usize) -> Group {
        let n = distances.len();
        let k = k.min(n);
        let cmp = |a: &usize, b: &usize| {
            distances[*a]
                .partial_cmp(&distances[*b])
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(b))
        };
        let mut order: Vec<usize> = (0..n).collect();
        if k < n {
            order.select_nth_unstable_by(k, cmp);
        }
        order.truncate(k);
        let mut included = vec![false; n];
        for &i in &order {
            if !included[i] {
                for &j in &self.class_members[self.dataset.input_class(i)] {
                    included[j] = true;
                }
            }
        }
        Group::from_sorted((0..n).filter(|&i| included[i]).collect())
    }

    /// Unnormalized kernel weights around the given distances.
    pub fn kernel_weights(&self, distances: &[T], shape: KernelShape, bandwidth: T) -> Vec<(usize, T)> {
        distances
            .iter()
            .enumerate()
            .map(|(i, &dist)| (i, shape.eval(dist / bandwidth)))
            .filter(|(_, w)| *w > T::zero())
            .collect()
    }
}

/// One group per datapoint: its `k` nearest neighbours, itself included.
/// Measure is uniform over anchors.
pub fn knn_groups<T: Scalar>(dataset: &Dataset<T>, k: usize, metric: MetricSpec, space: Space) -> Result<Grouping<T>> {
    if k == 0 || k > dataset.len() {
        return Err(Error::InvalidParameter(format!(
            "k must lie in [1, {}], got {k}",
            dataset.len()
        )));
    }
    let index = NeighborIndex::new(dataset, metric, space);
    let groups: Vec<Group> = (0..dataset.len())
        .into_par_iter()
        .map(|anchor| index.nearest(&index.distances_to_anchor(anchor), k))
        .collect();
    let provenance = Provenance::new("knn_groups")
        .param("k", k)
        .param("metric", metric)
        .param("space", format!("{space:?}"));
    Ok(Grouping::overlapping(dataset.len(), groups, Measure::Uniform, provenance)?.assume_input_complete())
}

/// One normalized kernel distribution per datapoint anchor.
pub fn kernel_distributions<T: Scalar>(dataset: &Dataset<T>, spec: &KernelSpec<T>) -> Result<Grouping<T>> {
    spec.validate()?;
    let index = NeighborIndex::new(dataset, spec.metric, spec.space);
    let dists: Vec<GroupDistribution<T>> = (0..dataset.len())
        .into_par_iter()
        .map(|anchor| {
            let weights = index.kernel_weights(&index.distances_to_anchor(anchor), spec.shape, spec.bandwidth);
            GroupDistribution::normalized(weights).map_err(|_| Error::VanishingKernel { anchor })
        })
        .collect::<Result<_>>()?;
    let provenance = kernel_provenance("kernel_distributions", spec);
    Ok(Grouping::weighted(dataset.len(), dists, Measure::Uniform, provenance)?.assume_input_complete())
}

fn kernel_provenance<T: Scalar>(name: &str, spec: &KernelSpec<T>) -> Provenance {
    Provenance::new(name)
        .param("shape", format!("{:?}", spec.shape))
        .param("bandwidth", spec.bandwidth)
        .param("space", format!("{:?}", spec.space))
        .param("metric", spec.metric)
}

/// Kernel distributions restricted to the anchor's own prediction bin.
/// Kernel distances use the raw feature space, not a learned representation.
pub fn mlce_groups<T: Scalar>(dataset: &Dataset<T>, spec: &KernelSpec<T>, scheme: &BinningScheme) -> Result<Grouping<T>> {
    spec.validate()?;
    if scheme.space != BinSpace::Predictions {
        return Err(Error::InvalidParameter("mlce_groups requires a scheme over predictions".into()));
    }
    let bin = bin_assignment(dataset, scheme)?;
    let index = NeighborIndex::new(dataset, spec.metric, spec.space);
    let per_anchor: Vec<Option<GroupDistribution<T>>> = (0..dataset.len())
        .into_par_iter()
        .map(|anchor| {
            let weights: Vec<(usize, T)> = index
                .kernel_weights(&index.distances_to_anchor(anchor), spec.shape, spec.bandwidth)
                .into_iter()
                .filter(|(i, _)| bin[*i] == bin[anchor])
                .collect();
            GroupDistribution::normalized(weights).ok()
        })
        .collect();
    let mut provenance = kernel_provenance("mlce_groups", spec).param("bins", scheme);
    let mut dists = Vec::with_capacity(per_anchor.len());
    for (anchor, q) in per_anchor.into_iter().enumerate() {
        match q {
            Some(q) => dists.push(q),
            None => provenance = provenance.note(format!("anchor {anchor} dropped: masked kernel weights vanish")),
        }
    }
    Ok(Grouping::weighted(dataset.len(), dists, Measure::Uniform, provenance)?.assume_input_complete())
}

/// Whether every cell of `finer` lies inside some cell of `coarser`.
pub fn is_refinement<T: Scalar>(finer: &Grouping<T>, coarser: &Grouping<T>) -> Result<bool> {
    if finer.kind() != GroupingKind::Partition || coarser.kind() != GroupingKind::Partition {
        return Err(Error::InvalidGrouping("refinement is defined between partitions only".into()));
    }
    if finer.universe() != coarser.universe() {
        return Err(Error::InvalidGrouping("partitions are over different index sets".into()));
    }
    let mut cell = vec![usize::MAX; coarser.universe()];
    for (c, member) in coarser.members().iter().enumerate() {
        if let Member::Set(g) = member {
            for &i in g.indices() {
                cell[i] = c;
            }
        }
    }
    Ok(finer.members().iter().all(|m| match m {
        Member::Set(g) => g.indices().windows(2).all(|w| cell[w[0]] == cell[w[1]]),
        Member::Distribution(_) => false,
    }))
}

/// Number of member groups containing each datapoint.
pub fn membership_counts<T: Scalar>(grouping: &Grouping<T>) -> Result<Vec<usize>> {
    let sets = grouping
        .sets()
        .ok_or_else(|| Error::InvalidGrouping("membership is undefined for weighted groupings".into()))?;
    let mut counts = vec![0; grouping.universe()];
    for g in sets {
        for &i in g.indices() {
            counts[i] += 1;
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{error_profile, generalized_error, Signedness};

    fn fixture() -> Dataset<f64> {
        Dataset::new(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            vec![false, true, true, true],
            vec![0.2, 0.4, 0.6, 0.8],
        )
        .unwrap()
    }

    fn cells(g: &Grouping<f64>) -> Vec<Vec<usize>> {
        g.sets().unwrap().into_iter().map(|s| s.indices().to_vec()).collect()
    }

    fn preds(p: &[f64]) -> Dataset<f64> {
        let x = (0..p.len()).map(|i| vec![i as f64]).collect();
        Dataset::new(x, vec![false; p.len()], p.to_vec()).unwrap()
    }

    #[test]
    fn prediction_bins_examples() {
        let ds = fixture();
        let g = prediction_bins(&ds, &BinningScheme::equal_width(2)).unwrap();
        assert_eq!(cells(&g), vec![vec![0, 1], vec![2, 3]]);
        let g = prediction_bins(&ds, &BinningScheme::equal_width(1)).unwrap();
        assert_eq!(cells(&g), vec![vec![0, 1, 2, 3]]);

        let g = prediction_bins(&preds(&[0.5, 0.49, 1.0, 0.0]), &BinningScheme::equal_width(2)).unwrap();
        assert_eq!(cells(&g), vec![vec![1, 3], vec![0, 2]]);
    }

    #[test]
    fn equal_width_edges_are_exact() {
        // every representable edge j/10 opens its own bin
        for j in 0..10 {
            let v = j as f64 / 10.0;
            assert_eq!(equal_width_bin(v, 0.0, 1.0, 10), j, "edge {v}");
        }
        assert_eq!(equal_width_bin(1.0, 0.0, 1.0, 10), 9);
        assert_eq!(equal_width_bin(0.0999999, 0.0, 1.0, 10), 0);
    }

    #[test]
    fn equal_frequency_bins() {
        let ds = preds(&[0.9, 0.1, 0.3, 0.7, 0.5, 0.2]);
        let g = prediction_bins(&ds, &BinningScheme::equal_frequency(3)).unwrap();
        assert_eq!(cells(&g), vec![vec![1, 5], vec![2, 4], vec![0, 3]]);
        assert!(prediction_bins(&preds(&[0.1, 0.2]), &BinningScheme::equal_frequency(3)).is_err());
        let ds = fixture();
        assert!(prediction_bins(&ds, &BinningScheme::equal_width(2).on_feature(0)).is_err());
    }

    #[test]
    fn feature_bins_use_observed_range() {
        let ds = fixture();
        let g = bins(&ds, &BinningScheme::equal_width(2).on_feature(0)).unwrap();
        assert_eq!(cells(&g), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn feature_grid_examples() {
        let ds = fixture();
        let g = feature_grid(&ds, &[2], MetricSpec::default()).unwrap();
        assert_eq!(cells(&g), vec![vec![0, 1], vec![2, 3]]);
        let g = feature_grid(&ds, &[1], MetricSpec::default()).unwrap();
        assert_eq!(cells(&g), vec![vec![0, 1, 2, 3]]);

        let square = Dataset::new(
            vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]],
            vec![false; 4],
            vec![0.5; 4],
        )
        .unwrap();
        let g = feature_grid(&square, &[2, 2], MetricSpec::default()).unwrap();
        assert_eq!(g.len(), 4);
        assert!(cells(&g).iter().all(|c| c.len() == 1));
    }

    #[test]
    fn feature_grid_collapses_constant_dimension() {
        let ds = Dataset::new(vec![vec![1.0, 0.0], vec![1.0, 1.0]], vec![false, true], vec![0.2, 0.4]).unwrap();
        let g = feature_grid(&ds, &[3, 2], MetricSpec::default()).unwrap();
        assert_eq!(cells(&g), vec![vec![0], vec![1]]);
        assert!(g.provenance().notes[0].contains("feature 0 is constant"));
    }

    #[test]
    fn level_set_examples() {
        let g = level_sets(&preds(&[0.3, 0.3, 0.7]), LevelKey::Predictions).unwrap();
        assert_eq!(cells(&g), vec![vec![0, 1], vec![2]]);
        let g = level_sets(&preds(&[0.1, 0.2, 0.3]), LevelKey::Predictions).unwrap();
        assert_eq!(g.len(), 3);
        let dup = Dataset::new(vec![vec![0.0], vec![1.0], vec![0.0]], vec![true, false, false], vec![0.4, 0.5, 0.4])
            .unwrap();
        let g = level_sets(&dup, LevelKey::Inputs).unwrap();
        assert_eq!(cells(&g), vec![vec![0, 2], vec![1]]);
    }

    #[test]
    fn knn_examples() {
        let ds = fixture();
        let g = knn_groups(&ds, 4, MetricSpec::default(), Space::Features).unwrap();
        assert!(cells(&g).iter().all(|c| c == &vec![0, 1, 2, 3]));
        assert_eq!(membership_counts(&g).unwrap(), vec![4; 4]);

        let g = knn_groups(&ds, 1, MetricSpec::default(), Space::Features).unwrap();
        assert_eq!(cells(&g), vec![vec![0], vec![1], vec![2], vec![3]]);

        // anchor 1 at x=1 is equidistant from 0 and 2: smaller index wins
        let g = knn_groups(&ds, 2, MetricSpec::default(), Space::Features).unwrap();
        assert_eq!(cells(&g)[1], vec![0, 1]);
        assert!(knn_groups(&ds, 5, MetricSpec::default(), Space::Features).is_err());
    }

    #[test]
    fn knn_includes_every_duplicate_input() {
        let ds = Dataset::new(
            vec![vec![0.0], vec![1.0], vec![1.0], vec![1.0], vec![5.0]],
            vec![false, true, false, true, false],
            vec![0.1, 0.6, 0.6, 0.6, 0.9],
        )
        .unwrap();
        let g = knn_groups(&ds, 2, MetricSpec::default(), Space::Features).unwrap();
        assert_eq!(cells(&g)[0], vec![0, 1, 2, 3]);
        assert!(g.is_input_complete(&ds));
    }

    #[test]
    fn kernel_examples() {
        let ds = fixture();
        let g = kernel_distributions(&ds, &KernelSpec::boxcar(10.0)).unwrap();
        let p = error_profile(&ds, &g, Signedness::Signed).unwrap();
        assert!(p.values().iter().all(|v| (v + 0.25).abs() < 1e-12));

        let three = Dataset::new(vec![vec![0.0], vec![1.0], vec![10.0]], vec![false; 3], vec![0.5; 3]).unwrap();
        let spec = KernelSpec::gaussian(1.0).with_metric(MetricSpec::unscaled(Norm::L2));
        let g = kernel_distributions(&three, &spec).unwrap();
        let Member::Distribution(q) = &g.members()[0] else { panic!() };
        let w = q.weights();
        assert_eq!(w.len(), 3);
        let ratio = w[2].1 / w[0].1;
        assert!((ratio / (-50.0f64).exp() - 1.0).abs() < 1e-12);
        assert!((w[0].1 + w[1].1 - 1.0).abs() < 1e-15);

        let tiny = KernelSpec::boxcar(1e-3).with_metric(MetricSpec::unscaled(Norm::L2));
        let g = kernel_distributions(&three, &tiny).unwrap();
        assert!(g.members().iter().all(|m| m.mass() == 1.0));
        assert!(kernel_distributions(&three, &KernelSpec::gaussian(0.0)).is_err());
    }

    #[test]
    fn kernel_weights_equal_on_duplicates() {
        let ds = Dataset::new(
            vec![vec![0.0], vec![0.3], vec![0.3], vec![1.0]],
            vec![false, true, false, true],
            vec![0.1, 0.5, 0.5, 0.9],
        )
        .unwrap();
        let g = kernel_distributions(&ds, &KernelSpec::gaussian(0.5)).unwrap();
        for m in g.members() {
            let Member::Distribution(q) = m else { panic!() };
            let w = q.weights();
            assert_eq!(w[1].1, w[2].1);
            assert!(generalized_error(&ds, q).is_ok());
        }
    }

    #[test]
    fn mlce_group_examples() {
        let ds = fixture();
        let spec = KernelSpec::gaussian(0.7);
        let plain = kernel_distributions(&ds, &spec).unwrap();
        let single = mlce_groups(&ds, &spec, &BinningScheme::equal_width(1)).unwrap();
        assert_eq!(plain.members(), single.members());

        let wide = mlce_groups(&ds, &KernelSpec::boxcar(100.0), &BinningScheme::equal_width(2)).unwrap();
        let p = error_profile(&ds, &wide, Signedness::Signed).unwrap();
        let expect = [-0.2, -0.2, -0.3, -0.3];
        for (v, e) in p.values().iter().zip(expect) {
            assert!((v - e).abs() < 1e-12);
        }

        let lonely = mlce_groups(&preds(&[0.1, 0.6, 0.7]), &KernelSpec::gaussian(0.5), &BinningScheme::equal_width(2))
            .unwrap();
        let Member::Distribution(q) = &lonely.members()[0] else { panic!() };
        assert_eq!(q.weights(), &[(0, 1.0)]);
    }

    fn partition(n: usize, cells: &[&[usize]]) -> Grouping<f64> {
        let groups = cells.iter().map(|c| Group::new(c.to_vec()).unwrap()).collect();
        Grouping::partition(n, groups, Measure::Empirical, Provenance::new("manual")).unwrap()
    }

    #[test]
    fn refinement_examples() {
        let fine = partition(4, &[&[0, 1], &[2, 3]]);
        let coarse = partition(4, &[&[0, 1, 2, 3]]);
        assert!(is_refinement(&fine, &coarse).unwrap());
        assert!(!is_refinement(&coarse, &fine).unwrap());
        assert!(is_refinement(&fine, &fine).unwrap());
        let crossing = partition(4, &[&[0, 2], &[1, 3]]);
        assert!(!is_refinement(&crossing, &fine).unwrap());

        let knn = knn_groups(&fixture(), 2, MetricSpec::default(), Space::Features).unwrap();
        assert!(is_refinement(&knn, &coarse).is_err());
    }

    #[test]
    fn membership_counts_partition_and_weighted() {
        let fine = partition(4, &[&[0, 1], &[2, 3]]);
        assert_eq!(membership_counts(&fine).unwrap(), vec![1; 4]);
        let w = kernel_distributions(&fixture(), &KernelSpec::gaussian(1.0)).unwrap();
        assert!(membership_counts(&w).is_err());
    }

    #[test]
    fn kernel_witnesses_hold_pointwise() {
        for shape in [KernelShape::Gaussian, KernelShape::Epanechnikov, KernelShape::Boxcar] {
            let w = shape.witness();
            for step in 0..=100 {
                let t = step as f64 * w.r / 100.0;
                assert!(shape.eval(t) >= w.c3 - 1e-15, "{shape:?} at {t}");
            }
            let mut prev = shape.eval(0.0f64);
            for step in 1..200 {
                let t = step as f64 * 0.05;
                let v = shape.eval(t);
                assert!(v <= prev);
                prev = v;
            }
            assert!(20f64.powi(3) * shape.eval(20.0f64) < 1e-12);
        }
    }
}
