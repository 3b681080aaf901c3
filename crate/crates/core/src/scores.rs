//! Named calibration scores built from a grouping, a signedness choice and an
//! agglomerator, plus Brier decompositions and local errors.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agglomerate::{Agglomeration, Agglomerator};
use crate::data::{member_errors, profile_from_rows, Dataset, Grouping, MemberError, Member, Measure, Provenance, Signedness};
use crate::error::{Error, Result};
use crate::grouping::{level_sets, mlce_groups, prediction_bins, BinningScheme, KernelSpec, LevelKey};
use crate::scalar::{compensated_sum, Scalar};

/// Size and content hash identifying the dataset a score was computed on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub n: usize,
    pub d: usize,
    pub sha256: String,
}

impl Fingerprint {
    /// Hash of the dataset contents: dimensions, then per row the features
    /// and prediction as little-endian `f64` bits and the label as one byte.
    pub fn of<T: Scalar>(dataset: &Dataset<T>) -> Self {
        let mut h = Sha256::new();
        h.update((dataset.len() as u64).to_le_bytes());
        h.update((dataset.dim() as u64).to_le_bytes());
        for i in 0..dataset.len() {
            for &x in dataset.features(i) {
                h.update(x.to_f64_lossy().to_bits().to_le_bytes());
            }
            h.update([dataset.labels()[i] as u8]);
            h.update(dataset.prediction(i).to_f64_lossy().to_bits().to_le_bytes());
        }
        Self { n: dataset.len(), d: dataset.dim(), sha256: hex::encode(h.finalize()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRow<T> {
    /// Position of the member in its grouping.
    pub member: usize,
    /// Group size, or total weight mass for a distribution member.
    pub mass: T,
    /// Normalized measure weight.
    pub weight: T,
    pub signed: T,
    pub absolute: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport<T> {
    pub name: String,
    pub value: T,
    pub signedness: Signedness,
    pub agglomerator: Agglomerator<T>,
    pub groups: Vec<GroupRow<T>>,
    pub provenance: Provenance,
    pub measure: Measure<T>,
    pub fingerprint: Fingerprint,
}

impl<T: Scalar> ScoreReport<T> {
    /// Re-evaluates the global value from the per-group table.
    pub fn recompute(&self) -> Result<T> {
        let rows: Vec<MemberError<T>> = self
            .groups
            .iter()
            .map(|r| MemberError { member: r.member, mass: r.mass, weight: r.weight, signed: r.signed })
            .collect();
        self.agglomerator.apply(&profile_from_rows(&rows, self.signedness)?)
    }
}

/// Fully general score: error profile of `grouping`, then `agg`.
pub fn global_score<T: Scalar>(
    dataset: &Dataset<T>,
    grouping: &Grouping<T>,
    signedness: Signedness,
    agg: &Agglomerator<T>,
) -> Result<ScoreReport<T>> {
    named_score("global_score", dataset, grouping, signedness, agg)
}

fn named_score<T: Scalar>(
    name: &str,
    dataset: &Dataset<T>,
    grouping: &Grouping<T>,
    signedness: Signedness,
    agg: &Agglomerator<T>,
) -> Result<ScoreReport<T>> {
    let rows = member_errors(dataset, grouping)?;
    let value = agg.apply(&profile_from_rows(&rows, signedness)?)?;
    Ok(ScoreReport {
        name: name.to_string(),
        value,
        signedness,
        agglomerator: agg.clone(),
        groups: rows
            .iter()
            .map(|r| GroupRow { member: r.member, mass: r.mass, weight: r.weight, signed: r.signed, absolute: r.signed.abs() })
            .collect(),
        provenance: grouping.provenance().clone(),
        measure: grouping.measure().clone(),
        fingerprint: Fingerprint::of(dataset),
    })
}

/// Expected calibration error: size-weighted mean of absolute bin errors.
pub fn ece<T: Scalar>(dataset: &Dataset<T>, scheme: &BinningScheme) -> Result<ScoreReport<T>> {
    let g = prediction_bins(dataset, scheme)?;
    named_score("ece", dataset, &g, Signedness::Absolute, &Agglomerator::Mean)
}

/// Average calibration error: every nonempty bin weighs the same.
pub fn ace<T: Scalar>(dataset: &Dataset<T>, scheme: &BinningScheme) -> Result<ScoreReport<T>> {
    let g = prediction_bins(dataset, scheme)?.with_measure(Measure::Uniform)?;
    named_score("ace", dataset, &g, Signedness::Absolute, &Agglomerator::Mean)
}

/// Maximum calibration error over nonempty bins.
pub fn mce<T: Scalar>(dataset: &Dataset<T>, scheme: &BinningScheme) -> Result<ScoreReport<T>> {
    let g = prediction_bins(dataset, scheme)?;
    named_score("mce", dataset, &g, Signedness::Absolute, &Agglomerator::Max)
}

/// Maximum local error over bin-restricted kernel neighbourhoods. Signed by
/// default; `absolute` takes the maximum of absolute local errors instead.
pub fn mlce<T: Scalar>(
    dataset: &Dataset<T>,
    spec: &KernelSpec<T>,
    scheme: &BinningScheme,
    absolute: bool,
) -> Result<ScoreReport<T>> {
    let signedness = if absolute { Signedness::Absolute } else { Signedness::Signed };
    let g = mlce_groups(dataset, spec, scheme)?;
    let g = if absolute { g.with_provenance_note("absolute local errors (option)") } else { g };
    named_score("mlce", dataset, &g, signedness, &Agglomerator::Max)
}

/// Mean squared difference between predictions and labels.
pub fn brier<T: Scalar>(dataset: &Dataset<T>) -> T {
    let n = T::from_usize_lossy(dataset.len());
    compensated_sum(dataset.predictions().iter().enumerate().map(|(i, &p)| {
        let r = p - dataset.label(i);
        r * r
    })) / n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrierDecomposition<T> {
    pub calibration: T,
    pub refinement: T,
}

/// Splits the Brier score over level sets of predictions or inputs into a
/// calibration term and a refinement term that sum to the score.
pub fn brier_decomposition<T: Scalar>(dataset: &Dataset<T>, by: LevelKey) -> Result<BrierDecomposition<T>> {
    let grouping = level_sets(dataset, by)?;
    let n = T::from_usize_lossy(dataset.len());
    let mut cal = Vec::with_capacity(grouping.len());
    let mut refi = Vec::with_capacity(grouping.len());
    for member in grouping.members() {
        let Member::Set(g) = member else { unreachable!("level sets are partitions") };
        let size = T::from_usize_lossy(g.len());
        let weight = size / n;
        let label_mean = compensated_sum(g.indices().iter().map(|&i| dataset.label(i))) / size;
        // predictions are constant on level sets of either key
        let c = dataset.prediction(g.indices()[0]) - label_mean;
        cal.push(weight * c * c);
        refi.push(weight * label_mean * (T::one() - label_mean));
    }
    Ok(BrierDecomposition { calibration: compensated_sum(cal), refinement: compensated_sum(refi) })
}

/// Signed local error at each anchor of a grouping with one member per datapoint.
pub fn local_errors<T: Scalar>(dataset: &Dataset<T>, grouping: &Grouping<T>) -> Result<Vec<(usize, T)>> {
    if grouping.len() != dataset.len() {
        return Err(Error::InvalidGrouping(format!(
            "local errors need one member per datapoint: {} members for {} datapoints",
            grouping.len(),
            dataset.len()
        )));
    }
    let rows = member_errors(dataset, grouping)?;
    if rows.len() != dataset.len() {
        return Err(Error::InvalidGrouping("a local neighbourhood is empty".into()));
    }
    Ok(rows.into_iter().map(|r| (r.member, r.signed)).collect())
}
