//! Agglomeration functions: coherent risk measures for quality scores and
//! fairness deviation measures for disparity scores.
//!
//! Every agglomerator here is law invariant: it only sees the weighted value
//! distribution of a profile. Atoms with zero weight are ignored by the
//! order-based functionals (max, quantiles, CVaR, range).

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::ErrorProfile;
use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, Scalar};

/// A functional from error profiles to a single score.
pub trait Agglomeration<T: Scalar>: Sync {
    fn apply(&self, profile: &ErrorProfile<T>) -> Result<T>;

    fn describe(&self) -> String;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Agglomerator<T> {
    Mean,
    Max,
    /// Conditional value at risk at level `alpha ∈ [0, 1]`.
    Cvar { alpha: T },
    /// Finite mixture `Σ w_m CVaR_{α_m}` given as `(alpha, weight)` pairs.
    CvarMixture { components: Vec<(T, T)> },
    StdDev,
    RangeDev,
    /// `CVaR_α(C - E[C])`, requires `alpha > 0`.
    SuperquantileDev { alpha: T },
    /// `E[C] + D(C)` for an inner deviation measure `D`.
    QuadrangleRisk { inner: Box<Agglomerator<T>> },
    /// `R(C) - E[C]` for an inner risk measure `R`.
    QuadrangleDev { inner: Box<Agglomerator<T>> },
}

impl<T: Scalar> Agglomerator<T> {
    pub fn cvar(alpha: T) -> Self {
        Agglomerator::Cvar { alpha }
    }

    pub fn superquantile_dev(alpha: T) -> Self {
        Agglomerator::SuperquantileDev { alpha }
    }

    pub fn quadrangle_risk(inner: Agglomerator<T>) -> Self {
        Agglomerator::QuadrangleRisk { inner: Box::new(inner) }
    }

    pub fn quadrangle_dev(inner: Agglomerator<T>) -> Self {
        Agglomerator::QuadrangleDev { inner: Box::new(inner) }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |a: T| a >= T::zero() && a <= T::one();
        match self {
            Agglomerator::Cvar { alpha } if !unit(*alpha) => {
                Err(Error::InvalidParameter(format!("cvar level must lie in [0, 1], got {alpha}")))
            }
            Agglomerator::CvarMixture { components } => {
                if components.is_empty() {
                    return Err(Error::InvalidParameter("cvar mixture needs at least one component".into()));
                }
                for (pos, &(alpha, w)) in components.iter().enumerate() {
                    if !unit(alpha) {
                        return Err(Error::InvalidParameter(format!(
                            "mixture component {pos} has level {alpha} outside [0, 1]"
                        )));
                    }
                    if !w.is_finite() || w < T::zero() {
                        return Err(Error::InvalidWeight { position: pos, value: w.to_f64_lossy() });
                    }
                }
                let total = compensated_sum(components.iter().map(|c| c.1));
                if (total - T::one()).abs() > T::weight_tolerance() {
                    return Err(Error::NotNormalized(total.to_f64_lossy()));
                }
                Ok(())
            }
            Agglomerator::SuperquantileDev { alpha } if !(*alpha > T::zero() && *alpha <= T::one()) => {
                Err(Error::InvalidParameter(format!(
                    "superquantile deviation needs a level in (0, 1], got {alpha}"
                )))
            }
            Agglomerator::QuadrangleRisk { inner } | Agglomerator::QuadrangleDev { inner } => inner.validate(),
            _ => Ok(()),
        }
    }

    /// Convex and law invariant: finer partitions never score lower on signed errors.
    pub fn is_convex(&self) -> bool {
        match self {
            Agglomerator::QuadrangleRisk { inner } | Agglomerator::QuadrangleDev { inner } => inner.is_convex(),
            _ => true,
        }
    }

    /// Pointwise-larger profiles never score lower.
    pub fn is_monotone(&self) -> bool {
        match self {
            Agglomerator::Mean | Agglomerator::Max | Agglomerator::Cvar { .. } | Agglomerator::CvarMixture { .. } => true,
            Agglomerator::QuadrangleRisk { inner } => matches!(**inner, Agglomerator::SuperquantileDev { .. }),
            _ => false,
        }
    }

    /// Whether this is a deviation measure (scores disparity of signed errors).
    pub fn is_deviation(&self) -> bool {
        matches!(
            self,
            Agglomerator::StdDev
                | Agglomerator::RangeDev
                | Agglomerator::SuperquantileDev { .. }
                | Agglomerator::QuadrangleDev { .. }
        )
    }

    fn evaluate(&self, profile: &ErrorProfile<T>) -> T {
        match self {
            Agglomerator::Mean => mean(profile),
            Agglomerator::Max => sorted_atoms(profile).last().map(|a| a.0).unwrap_or_else(T::zero),
            Agglomerator::Cvar { alpha } => cvar(profile, *alpha),
            Agglomerator::CvarMixture { components } => {
                let sorted = sorted_atoms(profile);
                compensated_sum(components.iter().map(|&(alpha, w)| w * cvar_sorted(&sorted, alpha)))
            }
            Agglomerator::StdDev => {
                let m = mean(profile);
                let total = total_weight(profile);
                compensated_sum(profile.atoms().map(|(v, w)| w * (v - m) * (v - m)))
                    .max(T::zero())
                    .sqrt()
                    / total.sqrt()
            }
            Agglomerator::RangeDev => {
                let sorted = sorted_atoms(profile);
                match (sorted.first(), sorted.last()) {
                    (Some(lo), Some(hi)) => hi.0 - lo.0,
                    _ => T::zero(),
                }
            }
            Agglomerator::SuperquantileDev { alpha } => {
                let m = mean(profile);
                cvar(&profile.map_values(|v| v - m), *alpha)
            }
            Agglomerator::QuadrangleRisk { inner } => mean(profile) + inner.evaluate(profile),
            Agglomerator::QuadrangleDev { inner } => inner.evaluate(profile) - mean(profile),
        }
    }
}

impl<T: Scalar> Agglomeration<T> for Agglomerator<T> {
    fn apply(&self, profile: &ErrorProfile<T>) -> Result<T> {
        self.validate()?;
        Ok(self.evaluate(profile))
    }

    fn describe(&self) -> String {
        self.to_string()
    }
}

impl<T: Scalar> fmt::Display for Agglomerator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Agglomerator::Mean => write!(f, "mean"),
            Agglomerator::Max => write!(f, "max"),
            Agglomerator::Cvar { alpha } => write!(f, "cvar({alpha})"),
            Agglomerator::CvarMixture { components } => {
                write!(f, "cvar_mixture(")?;
                for (i, (a, w)) in components.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{w}*cvar({a})")?;
                }
                write!(f, ")")
            }
            Agglomerator::StdDev => write!(f, "std_dev"),
            Agglomerator::RangeDev => write!(f, "range_dev"),
            Agglomerator::SuperquantileDev { alpha } => write!(f, "superquantile_dev({alpha})"),
            Agglomerator::QuadrangleRisk { inner } => write!(f, "quadrangle_risk({inner})"),
            Agglomerator::QuadrangleDev { inner } => write!(f, "quadrangle_dev({inner})"),
        }
    }
}

fn total_weight<T: Scalar>(profile: &ErrorProfile<T>) -> T {
    compensated_sum(profile.weights().iter().copied())
}

fn mean<T: Scalar>(profile: &ErrorProfile<T>) -> T {
    compensated_sum(profile.atoms().map(|(v, w)| v * w)) / total_weight(profile)
}

/// Positive-weight atoms, ascending by value, weights rescaled to total one.
fn sorted_atoms<T: Scalar>(profile: &ErrorProfile<T>) -> Vec<(T, T)> {
    let total = total_weight(profile);
    let mut atoms: Vec<(T, T)> = profile
        .atoms()
        .filter(|(_, w)| *w > T::zero())
        .map(|(v, w)| (v, w / total))
        .collect();
    atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    atoms
}

/// Left-continuous inverse of the weighted CDF, `Q(t) = inf{v : F(v) ≥ t}`,
/// with `Q(0)` the smallest value.
pub fn quantile<T: Scalar>(profile: &ErrorProfile<T>, t: T) -> Result<T> {
    if !(t >= T::zero() && t <= T::one()) {
        return Err(Error::InvalidParameter(format!("quantile level must lie in [0, 1], got {t}")));
    }
    let atoms = sorted_atoms(profile);
    let Some(&(last, _)) = atoms.last() else {
        return Err(Error::VacuousGrouping);
    };
    if t == T::zero() {
        return Ok(atoms[0].0);
    }
    let mut cdf = T::zero();
    for &(v, w) in &atoms {
        cdf = cdf + w;
        if cdf >= t {
            return Ok(v);
        }
    }
    Ok(last)
}

/// `CVaR_α(C) = 1/(1-α) ∫_α^1 Q_C(t) dt`, computed exactly from the sorted
/// atoms; `CVaR_1` is the maximum.
pub fn cvar<T: Scalar>(profile: &ErrorProfile<T>, alpha: T) -> T {
    cvar_sorted(&sorted_atoms(profile), alpha)
}

fn cvar_sorted<T: Scalar>(atoms: &[(T, T)], alpha: T) -> T {
    let Some(&(max, _)) = atoms.last() else {
        return T::zero();
    };
    if alpha >= T::one() {
        return max;
    }
    let tail = T::one() - alpha.max(T::zero());
    let mut remaining = tail;
    let mut parts = Vec::with_capacity(atoms.len());
    for &(v, w) in atoms.iter().rev() {
        let take = w.min(remaining);
        parts.push(v * take);
        remaining = remaining - take;
        if remaining <= T::zero() {
            break;
        }
    }
    if remaining > T::zero() {
        // rounding left the tail short of its mass; the smallest atom absorbs it
        parts.push(atoms[0].0 * remaining);
    }
    compensated_sum(parts) / tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Signedness;

    fn uniform(values: &[f64]) -> ErrorProfile<f64> {
        ErrorProfile::uniform(values.to_vec(), Signedness::Signed).unwrap()
    }

    fn apply(agg: Agglomerator<f64>, values: &[f64]) -> f64 {
        agg.apply(&uniform(values)).unwrap()
    }

    const ONE_TO_FOUR: [f64; 4] = [1.0, 2.0, 3.0, 4.0];

    #[test]
    fn quantile_examples() {
        let p = uniform(&ONE_TO_FOUR);
        assert_eq!(quantile(&p, 0.5).unwrap(), 2.0);
        assert_eq!(quantile(&p, 0.0).unwrap(), 1.0);
        assert_eq!(quantile(&p, 0.25).unwrap(), 1.0);
        assert_eq!(quantile(&p, 0.26).unwrap(), 2.0);
        assert_eq!(quantile(&p, 1.0).unwrap(), 4.0);
        assert!(quantile(&p, 1.1).is_err());
        assert!(quantile(&p, -0.1).is_err());
        let c = uniform(&[0.3; 5]);
        for t in [0.0, 0.2, 0.7, 1.0] {
            assert_eq!(quantile(&c, t).unwrap(), 0.3);
        }
    }

    #[test]
    fn cvar_examples() {
        assert_eq!(apply(Agglomerator::cvar(0.0), &ONE_TO_FOUR), 2.5);
        assert_eq!(apply(Agglomerator::cvar(1.0), &ONE_TO_FOUR), 4.0);
        assert_eq!(apply(Agglomerator::cvar(0.5), &ONE_TO_FOUR), 3.5);
        // fractional atom: top quarter-plus-tenth mass
        let v = apply(Agglomerator::cvar(0.65), &ONE_TO_FOUR);
        assert!((v - (4.0 * 0.25 + 3.0 * 0.1) / 0.35).abs() < 1e-12);
    }

    #[test]
    fn deviation_examples() {
        assert_eq!(apply(Agglomerator::RangeDev, &ONE_TO_FOUR), 3.0);
        assert_eq!(apply(Agglomerator::StdDev, &[0.7; 6]), 0.0);
        assert!((apply(Agglomerator::StdDev, &ONE_TO_FOUR) - 1.25f64.sqrt()).abs() < 1e-12);
        assert_eq!(apply(Agglomerator::superquantile_dev(0.5), &ONE_TO_FOUR), 1.0);
        assert_eq!(apply(Agglomerator::Mean, &ONE_TO_FOUR), 2.5);
        assert_eq!(apply(Agglomerator::Max, &ONE_TO_FOUR), 4.0);
    }

    #[test]
    fn mixture_and_quadrangle() {
        let mix = Agglomerator::CvarMixture { components: vec![(0.0, 0.5), (1.0, 0.5)] };
        assert_eq!(apply(mix, &ONE_TO_FOUR), 3.25);
        let risk = Agglomerator::quadrangle_risk(Agglomerator::superquantile_dev(0.5));
        assert_eq!(apply(risk.clone(), &ONE_TO_FOUR), 3.5);
        assert_eq!(apply(Agglomerator::quadrangle_dev(risk), &ONE_TO_FOUR), 1.0);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let p = uniform(&ONE_TO_FOUR);
        assert!(Agglomerator::cvar(1.5).apply(&p).is_err());
        assert!(Agglomerator::superquantile_dev(0.0).apply(&p).is_err());
        let bad = Agglomerator::CvarMixture { components: vec![(0.2, 0.5), (0.4, 0.4)] };
        assert!(matches!(bad.apply(&p), Err(Error::NotNormalized(_))));
        let neg = Agglomerator::CvarMixture { components: vec![(0.2, 1.5), (0.4, -0.5)] };
        assert!(neg.apply(&p).is_err());
        assert!(Agglomerator::quadrangle_dev(Agglomerator::cvar(-0.1)).apply(&p).is_err());
    }

    #[test]
    fn zero_weight_atoms_are_invisible() {
        let p = ErrorProfile::new(vec![9.0, 1.0, 2.0], vec![0.0, 0.5, 0.5], Signedness::Signed).unwrap();
        assert_eq!(Agglomerator::Max.apply(&p).unwrap(), 2.0);
        assert_eq!(Agglomerator::RangeDev.apply(&p).unwrap(), 1.0);
        assert_eq!(quantile(&p, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn weighted_cvar_uses_weights() {
        let p = ErrorProfile::new(vec![0.0, 1.0], vec![0.9, 0.1], Signedness::Absolute).unwrap();
        assert!((cvar(&p, 0.8_f64) - 0.5).abs() < 1e-12);
        assert!((cvar(&p, 0.0_f64) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn describe_is_readable() {
        let agg = Agglomerator::quadrangle_risk(Agglomerator::superquantile_dev(0.5f64));
        assert_eq!(agg.describe(), "quadrangle_risk(superquantile_dev(0.5))");
    }

    #[test]
    fn single_precision_cvar() {
        let p = ErrorProfile::<f32>::uniform(vec![1.0, 2.0, 3.0, 4.0], Signedness::Signed).unwrap();
        assert!((cvar(&p, 0.5f32) - 3.5).abs() < 1e-6);
    }
}
