//! Randomized, seed-reproducible verification of agglomeration axioms, plus
//! the refinement-monotonicity check for partitions.
//!
//! Each trial draws its own generator from `(seed, axiom, trial)`, so a
//! failing witness can be regenerated from the recorded trial seed alone.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agglomerate::{Agglomeration, Agglomerator};
use crate::data::{error_profile, Dataset, ErrorProfile, Grouping, Measure, Signedness};
use crate::error::{Error, Result};
use crate::grouping::is_refinement;
use crate::scalar::{compensated_sum, Scalar};

/// Default comparison tolerance for axiom and refinement checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axiom {
    /// Monotonicity: `C ≤ C'` pointwise implies `R(C) ≤ R(C')`.
    A1,
    /// Translation equivariance.
    A2,
    /// Positive homogeneity, including `R(0) = 0`.
    A3,
    /// Subadditivity.
    A4,
    /// Law invariance: permutations and atom splitting.
    A5,
    /// Normalisation: `D ≥ 0`, zero exactly on constants.
    A6,
    /// Agreement on constants.
    A7,
    /// `R(C) > E[C]` whenever `C` is not constant.
    Aversity,
    /// `D(C) ≤ sup C - E[C]`: a deviation measure that satisfies this induces a
    /// monotone risk measure through `R = E + D`.
    DeviationBound,
}

impl Axiom {
    pub const RISK: [Axiom; 5] = [Axiom::A1, Axiom::A2, Axiom::A3, Axiom::A4, Axiom::A5];
    pub const DEVIATION: [Axiom; 4] = [Axiom::A3, Axiom::A4, Axiom::A5, Axiom::A6];

    fn salt(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Concrete inputs on which an axiom was observed to fail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness<T> {
    /// Trial number, or `None` for a fixed adversarial fixture.
    pub trial: Option<usize>,
    /// Seed that regenerates this trial via [`reproduce_trial`].
    pub trial_seed: u64,
    pub profiles: Vec<ErrorProfile<T>>,
    pub observed: T,
    pub bound: T,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomVerdict<T> {
    pub axiom: Axiom,
    pub passed: bool,
    pub checks: usize,
    pub witness: Option<Witness<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport<T> {
    pub agglomerator: String,
    pub seed: u64,
    pub trials: usize,
    pub fixtures: usize,
    pub tolerance: T,
    pub verdicts: Vec<AxiomVerdict<T>>,
}

impl<T: Scalar> AxiomReport<T> {
    pub fn verdict(&self, axiom: Axiom) -> Option<&AxiomVerdict<T>> {
        self.verdicts.iter().find(|v| v.axiom == axiom)
    }

    pub fn passed(&self, axiom: Axiom) -> bool {
        self.verdict(axiom).is_some_and(|v| v.passed)
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }
}

fn trial_seed(seed: u64, axiom: Axiom, trial: u64) -> u64 {
    // splitmix64 finalizer over the combined coordinates
    let mut z = seed ^ axiom.salt().wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ trial.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Draw<'a> {
    rng: &'a mut ChaCha8Rng,
}

impl Draw<'_> {
    fn size(&mut self, min: usize) -> usize {
        self.rng.random_range(min.max(1)..=12)
    }

    fn weights<T: Scalar>(&mut self, n: usize) -> Vec<T> {
        if self.rng.random_bool(1.0 / 3.0) {
            return vec![T::one() / T::from_usize_lossy(n); n];
        }
        let raw: Vec<f64> = (0..n).map(|_| self.rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| T::lit(w / total)).collect()
    }

    fn values<T: Scalar>(&mut self, n: usize) -> Vec<T> {
        (0..n).map(|_| T::lit(self.rng.random_range(-1.0..1.0))).collect()
    }

    fn non_constant_values<T: Scalar>(&mut self, n: usize) -> Vec<T> {
        let mut v: Vec<T> = self.values(n);
        let (lo, hi) = v.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if hi - lo < T::lit(0.05) {
            let j = self.rng.random_range(0..n);
            v[j] = v[j] + T::lit(0.5);
        }
        v
    }

    fn profile<T: Scalar>(&mut self, min: usize) -> ErrorProfile<T> {
        let n = self.size(min);
        let weights = self.weights(n);
        profile(self.values(n), weights)
    }

    fn non_constant_profile<T: Scalar>(&mut self) -> ErrorProfile<T> {
        let n = self.size(2);
        let weights = self.weights(n);
        profile(self.non_constant_values(n), weights)
    }

    fn scalar<T: Scalar>(&mut self, lo: f64, hi: f64) -> T {
        T::lit(self.rng.random_range(lo..hi))
    }
}

fn profile<T: Scalar>(values: Vec<T>, weights: Vec<T>) -> ErrorProfile<T> {
    // weights come from normalized draws; the tolerance check cannot fail
    ErrorProfile::new(values, weights, Signedness::Signed).expect("generated profile is valid")
}

fn fixtures<T: Scalar>() -> Vec<ErrorProfile<T>> {
    let p = |v: &[f64], w: &[f64]| profile(v.iter().map(|&x| T::lit(x)).collect(), w.iter().map(|&x| T::lit(x)).collect());
    vec![
        p(&[0.0, 1.0], &[0.99, 0.01]),
        p(&[0.0, 1.0], &[0.01, 0.99]),
        p(&[-1.0, 1.0], &[0.5, 0.5]),
        p(&[0.25], &[1.0]),
        p(&[1.0, 2.0, 3.0, 4.0], &[0.25; 4]),
        p(&[-0.3, -0.3, 0.9], &[0.4, 0.4, 0.2]),
    ]
}

struct Outcome<T> {
    profiles: Vec<ErrorProfile<T>>,
    observed: T,
    bound: T,
    detail: String,
}

fn within<T: Scalar>(a: T, b: T, tol: T) -> bool {
    (a - b).abs() <= tol * T::one().max(a.abs()).max(b.abs())
}

fn leq<T: Scalar>(a: T, b: T, tol: T) -> bool {
    a <= b + tol * T::one().max(a.abs()).max(b.abs())
}

fn mean<T: Scalar>(p: &ErrorProfile<T>) -> T {
    compensated_sum(p.values().iter().zip(p.weights()).map(|(&v, &w)| v * w))
}

/// Runs one check; `Ok(None)` on pass, `Ok(Some(..))` on failure.
fn check_once<T: Scalar>(
    agg: &dyn Agglomeration<T>,
    axiom: Axiom,
    rng: &mut ChaCha8Rng,
    fixture: Option<&ErrorProfile<T>>,
    tol: T,
) -> Result<Option<Outcome<T>>> {
    let mut draw = Draw { rng };
    let base = |draw: &mut Draw<'_>, min: usize| fixture.cloned().unwrap_or_else(|| draw.profile(min));
    let fail = |profiles: Vec<ErrorProfile<T>>, observed: T, bound: T, detail: String| {
        Ok(Some(Outcome { profiles, observed, bound, detail }))
    };
    match axiom {
        Axiom::A1 => {
            let c = base(&mut draw, 1);
            let bumps: Vec<T> = (0..c.len())
                .map(|_| if draw.rng.random_bool(0.3) { T::zero() } else { draw.scalar(0.0, 1.0) })
                .collect();
            let bigger = profile(c.values().iter().zip(&bumps).map(|(&v, &b)| v + b).collect(), c.weights().to_vec());
            let (r, r2) = (agg.apply(&c)?, agg.apply(&bigger)?);
            if !leq(r, r2, tol) {
                return fail(vec![c, bigger], r, r2, "R(C) > R(C') although C <= C'".into());
            }
        }
        Axiom::A2 => {
            let c = base(&mut draw, 1);
            let shift: T = draw.scalar(-2.0, 2.0);
            let shifted = c.map_values(|v| v + shift);
            let (r, rs) = (agg.apply(&c)?, agg.apply(&shifted)?);
            if !within(rs, r + shift, tol) {
                return fail(vec![c, shifted], rs, r + shift, format!("R(C + {shift}) != R(C) + {shift}"));
            }
        }
        Axiom::A3 => {
            let c = base(&mut draw, 1);
            let zero = c.map_values(|_| T::zero());
            let r0 = agg.apply(&zero)?;
            if !within(r0, T::zero(), tol) {
                return fail(vec![zero], r0, T::zero(), "R(0) != 0".into());
            }
            let scale: T = draw.scalar(0.01, 10.0);
            let scaled = c.map_values(|v| v * scale);
            let (r, rs) = (agg.apply(&c)?, agg.apply(&scaled)?);
            if !within(rs, r * scale, tol) {
                return fail(vec![c, scaled], rs, r * scale, format!("R({scale} C) != {scale} R(C)"));
            }
        }
        Axiom::A4 => {
            let c = base(&mut draw, 1);
            let other = profile(draw.values(c.len()), c.weights().to_vec());
            let sum = c.zip_with(&other, |a, b| a + b)?;
            let (r, ro, rs) = (agg.apply(&c)?, agg.apply(&other)?, agg.apply(&sum)?);
            if !leq(rs, r + ro, tol) {
                return fail(vec![c, other, sum], rs, r + ro, "R(C + C') > R(C) + R(C')".into());
            }
        }
        Axiom::A5 => {
            let c = match fixture {
                Some(f) => f.clone(),
                None => {
                    let n = draw.size(1);
                    profile(draw.values(n), vec![T::one() / T::from_usize_lossy(n); n])
                }
            };
            // permutation of the values, weights permuted along with them
            let mut order: Vec<usize> = (0..c.len()).collect();
            order.shuffle(draw.rng);
            let permuted = profile(
                order.iter().map(|&j| c.values()[j]).collect(),
                order.iter().map(|&j| c.weights()[j]).collect(),
            );
            let (r, rp) = (agg.apply(&c)?, agg.apply(&permuted)?);
            if !within(r, rp, tol) {
                return fail(vec![c, permuted], rp, r, "permuting atoms changed the score".into());
            }
            let j = draw.rng.random_range(0..c.len());
            let mut values = c.values().to_vec();
            let mut weights = c.weights().to_vec();
            let half = weights[j] / T::lit(2.0);
            weights[j] = half;
            values.insert(j + 1, values[j]);
            weights.insert(j + 1, half);
            let split = profile(values, weights);
            let rsplit = agg.apply(&split)?;
            if !within(r, rsplit, tol) {
                return fail(vec![c, split], rsplit, r, format!("splitting atom {j} changed the score"));
            }
        }
        Axiom::A6 => {
            let c = match fixture {
                Some(f) => f.clone(),
                None => draw.non_constant_profile(),
            };
            let r = agg.apply(&c)?;
            let constant = c.map_values(|_| c.values()[0]);
            let rc = agg.apply(&constant)?;
            if !within(rc, T::zero(), tol) {
                return fail(vec![constant], rc, T::zero(), "D(constant) != 0".into());
            }
            let is_constant = c.values().iter().all(|&v| v == c.values()[0]);
            if r < -tol {
                return fail(vec![c], r, T::zero(), "D(C) < 0".into());
            }
            if !is_constant && r <= tol {
                return fail(vec![c], r, tol, "D(C) = 0 on a non-constant profile".into());
            }
        }
        Axiom::A7 => {
            let c = base(&mut draw, 1);
            let level: T = draw.scalar(-2.0, 2.0);
            let constant = c.map_values(|_| level);
            let r = agg.apply(&constant)?;
            if !within(r, level, tol) {
                return fail(vec![constant], r, level, format!("R(constant {level}) != {level}"));
            }
        }
        Axiom::Aversity => {
            let c = match fixture {
                Some(f) if f.values().iter().any(|&v| v != f.values()[0]) => f.clone(),
                _ => draw.non_constant_profile(),
            };
            let (r, m) = (agg.apply(&c)?, mean(&c));
            if r - m <= tol {
                return fail(vec![c], r, m, "R(C) <= E[C] on a non-constant profile".into());
            }
        }
        Axiom::DeviationBound => {
            let c = base(&mut draw, 1);
            let sup = c.values().iter().copied().fold(T::neg_infinity(), T::max);
            let bound = sup - mean(&c);
            let r = agg.apply(&c)?;
            if !leq(r, bound, tol) {
                return fail(vec![c], r, bound, "D(C) > sup C - E[C]".into());
            }
        }
    }
    Ok(None)
}

/// Regenerates the profiles of a randomized trial from its recorded seed.
pub fn reproduce_trial<T: Scalar>(
    agg: &dyn Agglomeration<T>,
    axiom: Axiom,
    trial_seed: u64,
    tolerance: T,
) -> Result<Option<Witness<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    Ok(check_once(agg, axiom, &mut rng, None, tolerance)?.map(|o| Witness {
        trial: None,
        trial_seed,
        profiles: o.profiles,
        observed: o.observed,
        bound: o.bound,
        detail: o.detail,
    }))
}

/// Checks each requested axiom on fixed adversarial fixtures, then on
/// `trials` randomized profile pairs. An axiom passes only if every check does.
pub fn check_axioms<T: Scalar>(
    agg: &dyn Agglomeration<T>,
    axioms: &[Axiom],
    trials: usize,
    seed: u64,
    tolerance: T,
) -> Result<AxiomReport<T>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    let fixed = fixtures::<T>();
    let mut verdicts = Vec::with_capacity(axioms.len());
    for &axiom in axioms {
        let mut witness = None;
        for (pos, f) in fixed.iter().enumerate() {
            let s = trial_seed(seed, axiom, u64::MAX - pos as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            if let Some(o) = check_once(agg, axiom, &mut rng, Some(f), tolerance)? {
                witness = Some(Witness { trial: None, trial_seed: s, profiles: o.profiles, observed: o.observed, bound: o.bound, detail: o.detail });
                break;
            }
        }
        if witness.is_none() {
            let outcomes: Vec<Result<Option<Witness<T>>>> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let s = trial_seed(seed, axiom, t as u64);
                    let mut rng = ChaCha8Rng::seed_from_u64(s);
                    Ok(check_once(agg, axiom, &mut rng, None, tolerance)?.map(|o| Witness {
                        trial: Some(t),
                        trial_seed: s,
                        profiles: o.profiles,
                        observed: o.observed,
                        bound: o.bound,
                        detail: o.detail,
                    }))
                })
                .collect();
            for o in outcomes {
                if let Some(w) = o? {
                    witness = Some(w);
                    break;
                }
            }
        }
        verdicts.push(AxiomVerdict { axiom, passed: witness.is_none(), checks: fixed.len() + trials, witness });
    }
    Ok(AxiomReport {
        agglomerator: agg.describe(),
        seed,
        trials,
        fixtures: fixed.len(),
        tolerance,
        verdicts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementVerdict<T> {
    pub finer_score: T,
    pub coarser_score: T,
    pub holds: bool,
    /// Whether the agglomerator's properties guarantee the inequality
    /// (convex; additionally monotone for absolute errors).
    pub guaranteed: bool,
    pub tolerance: T,
}

/// Compares scores of a partition and its refinement under the empirical
/// measure: finer partitions should never score lower.
pub fn check_refinement_monotonicity<T: Scalar>(
    agg: &Agglomerator<T>,
    dataset: &Dataset<T>,
    finer: &Grouping<T>,
    coarser: &Grouping<T>,
    signedness: Signedness,
) -> Result<RefinementVerdict<T>> {
    if !is_refinement(finer, coarser)? {
        return Err(Error::InvalidGrouping("the finer grouping does not refine the coarser one".into()));
    }
    if finer.measure() != &Measure::Empirical || coarser.measure() != &Measure::Empirical {
        return Err(Error::InvalidGrouping("refinement comparison requires empirical measures".into()));
    }
    let tolerance = T::lit(DEFAULT_TOLERANCE);
    let finer_score = agg.apply(&error_profile(dataset, finer, signedness)?)?;
    let coarser_score = agg.apply(&error_profile(dataset, coarser, signedness)?)?;
    let guaranteed = agg.is_convex() && (signedness == Signedness::Signed || agg.is_monotone());
    Ok(RefinementVerdict {
        finer_score,
        coarser_score,
        holds: finer_score >= coarser_score - tolerance,
        guaranteed,
        tolerance,
    })
}
