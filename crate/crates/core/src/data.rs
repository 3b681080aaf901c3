//! Datasets, groups, generalized group distributions, groupings, and the two
//! fundamental error functionals: the group calibration error `c(I)` and the
//! generalized calibration error `C(q)`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, Scalar};

/// Feature vectors, binary labels, and predictor outputs for `N` datapoints.
///
/// Indices are zero-based. Datapoints with bitwise-identical feature vectors
/// form one input class; the predictor must agree on every member of a class.
#[derive(Debug, Clone)]
pub struct Dataset<T> {
    n: usize,
    d: usize,
    features: Vec<T>,
    labels: Vec<bool>,
    predictions: Vec<T>,
    feature_names: Option<Vec<String>>,
    input_class: Vec<usize>,
    class_size: Vec<usize>,
    class_first: Vec<usize>,
    class_label_mean: Vec<T>,
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset from per-row feature vectors.
    pub fn new(features: Vec<Vec<T>>, labels: Vec<bool>, predictions: Vec<T>) -> Result<Self> {
        let d = features.first().map_or(0, Vec::len);
        if let Some((row, f)) = features.iter().enumerate().find(|(_, f)| f.len() != d) {
            return Err(Error::InvalidDataset(format!(
                "row {row} has {} features, expected {d}",
                f.len()
            )));
        }
        let flat = features.into_iter().flatten().collect();
        Self::from_flat(d, flat, labels, predictions)
    }

    /// Builds a dataset from a row-major `N x d` feature buffer.
    pub fn from_flat(
        d: usize,
        features: Vec<T>,
        labels: Vec<bool>,
        predictions: Vec<T>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidDataset("dataset must contain at least one datapoint".into()));
        }
        if predictions.len() != n {
            return Err(Error::InvalidDataset(format!(
                "{n} labels but {} predictions",
                predictions.len()
            )));
        }
        if features.len() != n * d {
            return Err(Error::InvalidDataset(format!(
                "feature buffer has {} entries, expected {n} x {d}",
                features.len()
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite feature at row {}",
                pos.checked_div(d).unwrap_or(0)
            )));
        }
        if let Some(row) = predictions
            .iter()
            .position(|p| !p.is_finite() || *p < T::zero() || *p > T::one())
        {
            return Err(Error::InvalidDataset(format!(
                "prediction at row {row} is outside [0, 1]: {}",
                predictions[row]
            )));
        }

        let mut lookup: HashMap<Vec<u64>, usize> = HashMap::with_capacity(n);
        let mut input_class = Vec::with_capacity(n);
        let mut class_size = Vec::new();
        let mut class_first = Vec::new();
        let mut class_positives = Vec::new();
        for i in 0..n {
            let key: Vec<u64> = features[i * d..(i + 1) * d].iter().map(|v| v.identity_key()).collect();
            let class = *lookup.entry(key).or_insert_with(|| {
                class_size.push(0usize);
                class_first.push(i);
                class_positives.push(0usize);
                class_size.len() - 1
            });
            let first = class_first[class];
            if predictions[first] != predictions[i] {
                return Err(Error::InconsistentPredictions { first, second: i });
            }
            class_size[class] += 1;
            if labels[i] {
                class_positives[class] += 1;
            }
            input_class.push(class);
        }
        let class_label_mean = class_positives
            .iter()
            .zip(&class_size)
            .map(|(&pos, &size)| T::from_usize_lossy(pos) / T::from_usize_lossy(size))
            .collect();

        Ok(Self {
            n,
            d,
            features,
            labels,
            predictions,
            feature_names: None,
            input_class,
            class_size,
            class_first,
            class_label_mean,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.d {
            return Err(Error::InvalidDataset(format!(
                "{} feature names for {} feature columns",
                names.len(),
                self.d
            )));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false; a dataset holds at least one datapoint.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn features(&self, i: usize) -> &[T] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn feature(&self, i: usize, dim: usize) -> T {
        self.features[i * self.d + dim]
    }

    pub fn feature_buffer(&self) -> &[T] {
        &self.features
    }

    pub fn label(&self, i: usize) -> T {
        if self.labels[i] {
            T::one()
        } else {
            T::zero()
        }
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn prediction(&self, i: usize) -> T {
        self.predictions[i]
    }

    pub fn predictions(&self) -> &[T] {
        &self.predictions
    }

    /// Individual error `p̂(x_i) - y_i`.
    pub fn residual(&self, i: usize) -> T {
        self.predictions[i] - self.label(i)
    }

    /// Input class of datapoint `i` (classes are numbered by first occurrence).
    pub fn input_class(&self, i: usize) -> usize {
        self.input_class[i]
    }

    pub fn input_class_count(&self) -> usize {
        self.class_size.len()
    }

    pub fn input_class_size(&self, class: usize) -> usize {
        self.class_size[class]
    }

    /// Empirical conditional label mean over the exact-input level set of `i`.
    pub fn empirical_bayes_at(&self, i: usize) -> T {
        self.class_label_mean[self.input_class[i]]
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, n: self.n })
        }
    }
}

/// Empirical conditional label mean per distinct feature vector.
#[derive(Debug, Clone)]
pub struct EmpiricalBayes<T> {
    entries: Vec<(Vec<T>, T)>,
    lookup: HashMap<Vec<u64>, usize>,
}

impl<T: Scalar> EmpiricalBayes<T> {
    pub fn get(&self, x: &[T]) -> Option<T> {
        let key: Vec<u64> = x.iter().map(|v| v.identity_key()).collect();
        self.lookup.get(&key).map(|&c| self.entries[c].1)
    }

    /// Distinct inputs in order of first occurrence, paired with `p̄(x)`.
    pub fn iter(&self) -> impl Iterator<Item = (&[T], T)> {
        self.entries.iter().map(|(x, p)| (x.as_slice(), *p))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Mean label over every exact-input level set of the dataset.
pub fn empirical_bayes<T: Scalar>(dataset: &Dataset<T>) -> EmpiricalBayes<T> {
    let mut entries = Vec::with_capacity(dataset.input_class_count());
    let mut lookup = HashMap::with_capacity(dataset.input_class_count());
    for (class, &first) in dataset.class_first.iter().enumerate() {
        let x = dataset.features(first).to_vec();
        lookup.insert(x.iter().map(|v| v.identity_key()).collect(), class);
        entries.push((x, dataset.class_label_mean[class]));
    }
    EmpiricalBayes { entries, lookup }
}

/// A set of datapoint indices. Stored sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Group {
    indices: Vec<usize>,
}

impl Group {
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateIndex(w[0]));
        }
        Ok(Self { indices })
    }

    /// Caller guarantees sorted, distinct indices.
    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices }
    }

    pub fn all(n: usize) -> Self {
        Self { indices: (0..n).collect() }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn is_subset_of(&self, other: &Group) -> bool {
        self.indices.iter().all(|&i| other.contains(i))
    }

    /// True when the group holds all or none of each input class.
    pub fn is_input_complete<T: Scalar>(&self, dataset: &Dataset<T>) -> bool {
        let mut seen: HashMap<usize, usize> = HashMap::new();
        for &i in &self.indices {
            if i >= dataset.len() {
                return false;
            }
            *seen.entry(dataset.input_class(i)).or_default() += 1;
        }
        seen.iter().all(|(&c, &count)| dataset.input_class_size(c) == count)
    }
}

/// A normalized distribution over datapoint indices; a group generalized to
/// arbitrary nonnegative weights. Zero weights are not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDistribution<T> {
    weights: Vec<(usize, T)>,
}

impl<T: Scalar> GroupDistribution<T> {
    /// Accepts raw `(index, weight)` pairs without normalizing them.
    pub fn new(mut weights: Vec<(usize, T)>) -> Result<Self> {
        for (pos, &(_, w)) in weights.iter().enumerate() {
            if !w.is_finite() || w < T::zero() {
                return Err(Error::InvalidWeight { position: pos, value: w.to_f64_lossy() });
            }
        }
        weights.retain(|(_, w)| *w > T::zero());
        weights.sort_unstable_by_key(|(i, _)| *i);
        if let Some(w) = weights.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateIndex(w[0].0));
        }
        Ok(Self { weights })
    }

    /// Accepts raw weights and rescales them to total mass one.
    pub fn normalized(weights: Vec<(usize, T)>) -> Result<Self> {
        let mut dist = Self::new(weights)?;
        let total = dist.total();
        if total <= T::zero() {
            return Err(Error::NotNormalized(0.0));
        }
        for (_, w) in &mut dist.weights {
            *w = *w / total;
        }
        Ok(dist)
    }

    /// Uniform weight `1/|I|` on each member of the group.
    pub fn uniform_over(group: &Group) -> Result<Self> {
        if group.is_empty() {
            return Err(Error::DegenerateGroup);
        }
        let w = T::one() / T::from_usize_lossy(group.len());
        Ok(Self { weights: group.indices().iter().map(|&i| (i, w)).collect() })
    }

    pub fn point_mass(index: usize) -> Self {
        Self { weights: vec![(index, T::one())] }
    }

    pub fn weights(&self) -> &[(usize, T)] {
        &self.weights
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> T {
        compensated_sum(self.weights.iter().map(|(_, w)| *w))
    }

    pub fn is_normalized(&self) -> bool {
        (self.total() - T::one()).abs() <= T::weight_tolerance()
    }

    /// Checks that the weight is a function of the feature vector: every
    /// input class is either absent or present in full with equal weights.
    pub fn check_function_of_input(&self, dataset: &Dataset<T>) -> Result<()> {
        let mut classes: HashMap<usize, (usize, T, usize)> = HashMap::new();
        for &(i, w) in &self.weights {
            dataset.check_index(i)?;
            let entry = classes.entry(dataset.input_class(i)).or_insert((i, w, 0));
            let (first, w0, _) = *entry;
            let scale = w0.max(w);
            if (w0 - w).abs() > T::epsilon() * T::lit(16.0) * scale {
                return Err(Error::WeightNotFunctionOfInput { first, second: i });
            }
            entry.2 += 1;
        }
        for (&class, &(first, _, count)) in &classes {
            if count != dataset.input_class_size(class) {
                let missing = (0..dataset.len())
                    .find(|&j| dataset.input_class(j) == class && self.weight_of(j).is_none())
                    .unwrap_or(first);
                return Err(Error::WeightNotFunctionOfInput { first, second: missing });
            }
        }
        Ok(())
    }

    fn weight_of(&self, i: usize) -> Option<T> {
        self.weights
            .binary_search_by_key(&i, |(j, _)| *j)
            .ok()
            .map(|pos| self.weights[pos].1)
    }
}

/// Signed errors keep the direction of miscalibration; absolute errors drop it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signedness {
    Signed,
    Absolute,
}

impl fmt::Display for Signedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Signedness::Signed => "signed",
            Signedness::Absolute => "absolute",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupingKind {
    Partition,
    Overlapping,
    Weighted,
}

/// Measure over the members of a grouping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "weights")]
pub enum Measure<T> {
    Uniform,
    /// Proportional to group size. Distribution members count as size one.
    Empirical,
    Explicit(Vec<T>),
}

/// Structured record of how a grouping was built.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub constructor: String,
    pub parameters: Vec<(String, String)>,
    pub notes: Vec<String>,
}

impl Provenance {
    pub fn new(constructor: impl Into<String>) -> Self {
        Self { constructor: constructor.into(), ..Self::default() }
    }

    pub fn param(mut self, key: impl Into<String>, value: impl fmt::Display) -> Self {
        self.parameters.push((key.into(), value.to_string()));
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Member<T> {
    Set(Group),
    Distribution(GroupDistribution<T>),
}

impl<T: Scalar> Member<T> {
    pub fn is_empty(&self) -> bool {
        match self {
            Member::Set(g) => g.is_empty(),
            Member::Distribution(q) => q.is_empty(),
        }
    }

    /// Group size, or total weight mass for a distribution.
    pub fn mass(&self) -> T {
        match self {
            Member::Set(g) => T::from_usize_lossy(g.len()),
            Member::Distribution(q) => q.total(),
        }
    }

    pub fn as_set(&self) -> Option<&Group> {
        match self {
            Member::Set(g) => Some(g),
            Member::Distribution(_) => None,
        }
    }
}

/// A family of groups (or group distributions) over a dataset's index set,
/// equipped with a measure over its members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grouping<T> {
    kind: GroupingKind,
    universe: usize,
    members: Vec<Member<T>>,
    measure: Measure<T>,
    provenance: Provenance,
    input_complete: bool,
}

impl<T: Scalar> Grouping<T> {
    /// Pairwise disjoint groups covering `0..universe` exactly once.
    pub fn partition(
        universe: usize,
        groups: Vec<Group>,
        measure: Measure<T>,
        provenance: Provenance,
    ) -> Result<Self> {
        let mut owner = vec![false; universe];
        for g in &groups {
            for &i in g.indices() {
                if i >= universe {
                    return Err(Error::IndexOutOfRange { index: i, n: universe });
                }
                if owner[i] {
                    return Err(Error::InvalidGrouping(format!(
                        "index {i} belongs to more than one cell of a partition"
                    )));
                }
                owner[i] = true;
            }
        }
        if let Some(i) = owner.iter().position(|o| !o) {
            return Err(Error::InvalidGrouping(format!("index {i} is not covered by the partition")));
        }
        Self::build(GroupingKind::Partition, universe, groups.into_iter().map(Member::Set).collect(), measure, provenance)
    }

    pub fn overlapping(
        universe: usize,
        groups: Vec<Group>,
        measure: Measure<T>,
        provenance: Provenance,
    ) -> Result<Self> {
        for g in &groups {
            if let Some(&i) = g.indices().iter().find(|&&i| i >= universe) {
                return Err(Error::IndexOutOfRange { index: i, n: universe });
            }
        }
        Self::build(GroupingKind::Overlapping, universe, groups.into_iter().map(Member::Set).collect(), measure, provenance)
    }

    pub fn weighted(
        universe: usize,
        dists: Vec<GroupDistribution<T>>,
        measure: Measure<T>,
        provenance: Provenance,
    ) -> Result<Self> {
        for q in &dists {
            if let Some(&(i, _)) = q.weights().iter().find(|(i, _)| *i >= universe) {
                return Err(Error::IndexOutOfRange { index: i, n: universe });
            }
        }
        Self::build(
            GroupingKind::Weighted,
            universe,
            dists.into_iter().map(Member::Distribution).collect(),
            measure,
            provenance,
        )
    }

    fn build(
        kind: GroupingKind,
        universe: usize,
        members: Vec<Member<T>>,
        measure: Measure<T>,
        provenance: Provenance,
    ) -> Result<Self> {
        if let Measure::Explicit(w) = &measure {
            if w.len() != members.len() {
                return Err(Error::InvalidGrouping(format!(
                    "explicit measure has {} weights for {} members",
                    w.len(),
                    members.len()
                )));
            }
            if let Some(pos) = w.iter().position(|v| !v.is_finite() || *v < T::zero()) {
                return Err(Error::InvalidWeight { position: pos, value: w[pos].to_f64_lossy() });
            }
            let total = compensated_sum(w.iter().copied());
            if (total - T::one()).abs() > T::weight_tolerance() {
                return Err(Error::NotNormalized(total.to_f64_lossy()));
            }
        }
        Ok(Self { kind, universe, members, measure, provenance, input_complete: false })
    }

    /// Declares the grouping input-complete after verifying it against the dataset.
    pub fn declare_input_complete(mut self, dataset: &Dataset<T>) -> Result<Self> {
        if !self.is_input_complete(dataset) {
            return Err(Error::InvalidGrouping(
                "a member splits the datapoints of an identical input".into(),
            ));
        }
        self.input_complete = true;
        Ok(self)
    }

    pub(crate) fn assume_input_complete(mut self) -> Self {
        self.input_complete = true;
        self
    }

    /// Whether every member holds all or none of each input class (for
    /// distributions: weight is a function of the feature vector).
    pub fn is_input_complete(&self, dataset: &Dataset<T>) -> bool {
        self.members.iter().all(|m| match m {
            Member::Set(g) => g.is_input_complete(dataset),
            Member::Distribution(q) => q.check_function_of_input(dataset).is_ok(),
        })
    }

    pub fn declared_input_complete(&self) -> bool {
        self.input_complete
    }

    pub fn kind(&self) -> GroupingKind {
        self.kind
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn members(&self) -> &[Member<T>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn measure(&self) -> &Measure<T> {
        &self.measure
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_measure(mut self, measure: Measure<T>) -> Result<Self> {
        let members = std::mem::take(&mut self.members);
        let input_complete = self.input_complete;
        let mut g = Self::build(self.kind, self.universe, members, measure, self.provenance)?;
        g.input_complete = input_complete;
        Ok(g)
    }

    pub fn with_provenance_note(mut self, note: impl Into<String>) -> Self {
        self.provenance.notes.push(note.into());
        self
    }

    /// The member sets, for partition and overlapping groupings.
    pub fn sets(&self) -> Option<Vec<&Group>> {
        self.members.iter().map(Member::as_set).collect()
    }

    fn raw_measure(&self, j: usize) -> T {
        match &self.measure {
            Measure::Uniform => T::one(),
            Measure::Empirical => match &self.members[j] {
                Member::Set(g) => T::from_usize_lossy(g.len()),
                Member::Distribution(_) => T::one(),
            },
            Measure::Explicit(w) => w[j],
        }
    }
}

/// Errors of a finite weighted family of groups: the random variable that
/// agglomeration functions consume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorProfile<T> {
    values: Vec<T>,
    weights: Vec<T>,
    signedness: Signedness,
}

impl<T: Scalar> ErrorProfile<T> {
    pub fn new(values: Vec<T>, weights: Vec<T>, signedness: Signedness) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::VacuousGrouping);
        }
        if values.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "{} values but {} weights",
                values.len(),
                weights.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite value at position {pos}")));
        }
        if let Some(pos) = weights.iter().position(|w| !w.is_finite() || *w < T::zero()) {
            return Err(Error::InvalidWeight { position: pos, value: weights[pos].to_f64_lossy() });
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - T::one()).abs() > T::weight_tolerance() {
            return Err(Error::NotNormalized(total.to_f64_lossy()));
        }
        Ok(Self { values, weights, signedness })
    }

    /// Equal weight on every value.
    pub fn uniform(values: Vec<T>, signedness: Signedness) -> Result<Self> {
        let w = T::one() / T::from_usize_lossy(values.len().max(1));
        let weights = vec![w; values.len()];
        Self::new(values, weights, signedness)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn signedness(&self) -> Signedness {
        self.signedness
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same weights, values transformed pointwise.
    pub fn map_values(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            weights: self.weights.clone(),
            signedness: self.signedness,
        }
    }

    /// Pointwise combination with a profile over the same weights.
    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.weights != other.weights {
            return Err(Error::InvalidParameter("profiles do not share a weight vector".into()));
        }
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            weights: self.weights.clone(),
            signedness: self.signedness,
        })
    }

    pub(crate) fn atoms(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.values.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Signed calibration error `c(I) = (1/|I|) Σ_{i∈I} (p̂(x_i) - y_i)`.
pub fn group_error<T: Scalar>(dataset: &Dataset<T>, group: &Group) -> Result<T> {
    if group.is_empty() {
        return Err(Error::DegenerateGroup);
    }
    for &i in group.indices() {
        dataset.check_index(i)?;
    }
    let sum = compensated_sum(group.indices().iter().map(|&i| dataset.residual(i)));
    Ok(sum / T::from_usize_lossy(group.len()))
}

/// Generalized calibration error `C(q) = Σ_i q(i) (p̂(x_i) - p̄(x_i))`, with
/// `p̄` the empirical conditional label mean over exact-input level sets.
pub fn generalized_error<T: Scalar>(dataset: &Dataset<T>, dist: &GroupDistribution<T>) -> Result<T> {
    if dist.is_empty() {
        return Err(Error::DegenerateGroup);
    }
    if !dist.is_normalized() {
        return Err(Error::NotNormalized(dist.total().to_f64_lossy()));
    }
    dist.check_function_of_input(dataset)?;
    Ok(compensated_sum(
        dist.weights()
            .iter()
            .map(|&(i, w)| w * (dataset.prediction(i) - dataset.empirical_bayes_at(i))),
    ))
}

/// Error of one nonempty grouping member, with its renormalized measure weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberError<T> {
    /// Position of the member in the grouping.
    pub member: usize,
    /// Group size, or total weight mass for a distribution member.
    pub mass: T,
    pub weight: T,
    pub signed: T,
}

/// Per-member signed errors. Empty members are dropped and the measure is
/// renormalized over what remains.
pub fn member_errors<T: Scalar>(dataset: &Dataset<T>, grouping: &Grouping<T>) -> Result<Vec<MemberError<T>>> {
    if grouping.universe() != dataset.len() {
        return Err(Error::InvalidGrouping(format!(
            "grouping is over {} indices but the dataset has {}",
            grouping.universe(),
            dataset.len()
        )));
    }
    let mut rows = Vec::with_capacity(grouping.len());
    for (j, member) in grouping.members().iter().enumerate() {
        if member.is_empty() {
            continue;
        }
        let signed = match member {
            Member::Set(g) => group_error(dataset, g)?,
            Member::Distribution(q) => generalized_error(dataset, q)?,
        };
        rows.push(MemberError { member: j, mass: member.mass(), weight: grouping.raw_measure(j), signed });
    }
    if rows.is_empty() {
        return Err(Error::VacuousGrouping);
    }
    let total = compensated_sum(rows.iter().map(|r| r.weight));
    if total <= T::zero() {
        return Err(Error::InvalidGrouping("measure assigns zero mass to every nonempty member".into()));
    }
    for r in &mut rows {
        r.weight = r.weight / total;
    }
    Ok(rows)
}

/// One error per nonempty member, weighted by the grouping's measure.
pub fn error_profile<T: Scalar>(
    dataset: &Dataset<T>,
    grouping: &Grouping<T>,
    signedness: Signedness,
) -> Result<ErrorProfile<T>> {
    let rows = member_errors(dataset, grouping)?;
    profile_from_rows(&rows, signedness)
}

pub(crate) fn profile_from_rows<T: Scalar>(rows: &[MemberError<T>], signedness: Signedness) -> Result<ErrorProfile<T>> {
    let values = rows
        .iter()
        .map(|r| match signedness {
            Signedness::Signed => r.signed,
            Signedness::Absolute => r.signed.abs(),
        })
        .collect();
    ErrorProfile::new(values, rows.iter().map(|r| r.weight).collect(), signedness)
}
