//! Exact finite-sample checks by exhaustive enumeration of multinomial outcomes.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::coefficients::{self, Family};
use crate::error::Result;
use crate::model::{self, MultinomialModel, SampleStream};
use crate::numeric::{self, CompensatedSum};

/// `E[Î_eU] − I_e` for the Cohen and Scott expected indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedIndexBias {
    pub cohen: f64,
    pub scott: f64,
}

/// Exact bias of the unbiased expected indices at sample size `n` (≥ 2).
pub fn expected_index_bias(model: &MultinomialModel, n: u64) -> Result<ExpectedIndexBias> {
    let mut cohen = CompensatedSum::new();
    let mut scott = CompensatedSum::new();
    for (table, prob) in model::enumerate_tables(model, n)? {
        cohen.add(prob * coefficients::unbiased_expected_index(Family::Cohen, &table)?);
        scott.add(prob * coefficients::unbiased_expected_index(Family::Scott, &table)?);
    }
    let (_, cohen_target) = coefficients::cohen_indices(model.k(), model.probabilities());
    let (_, scott_target) = coefficients::scott_indices(model.k(), model.probabilities());
    Ok(ExpectedIndexBias {
        cohen: cohen.value() - cohen_target,
        scott: scott.value() - scott_target,
    })
}

/// A model drawn uniformly from the simplex over the K×K cells.
pub fn random_model<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<MultinomialModel> {
    let weights: Vec<f64> = (0..k * k).map(|_| Exp1.sample(rng)).collect();
    let total = numeric::sum(weights.iter().copied());
    MultinomialModel::new(k, weights.into_iter().map(|w| w / total).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnbiasednessReport {
    pub cases: usize,
    pub max_abs_bias_cohen: f64,
    pub max_abs_bias_scott: f64,
}

impl UnbiasednessReport {
    pub fn max_abs_bias(&self) -> f64 {
        self.max_abs_bias_cohen.max(self.max_abs_bias_scott)
    }
}

/// Runs [`expected_index_bias`] over `models_per_cell` random models for every
/// `(K, n)` pair. Models for pair `(K, n)` come from stream
/// `(seed, 1000·K + n)`.
pub fn unbiasedness_suite(ks: &[usize], ns: &[u64], models_per_cell: usize, seed: u64) -> Result<UnbiasednessReport> {
    let mut report = UnbiasednessReport { cases: 0, max_abs_bias_cohen: 0.0, max_abs_bias_scott: 0.0 };
    for &k in ks {
        for &n in ns {
            let mut rng = SampleStream::new(seed, 1000 * k as u64 + n).rng();
            for _ in 0..models_per_cell {
                let model = random_model(k, &mut rng)?;
                let bias = expected_index_bias(&model, n)?;
                report.cases += 1;
                report.max_abs_bias_cohen = report.max_abs_bias_cohen.max(bias.cohen.abs());
                report.max_abs_bias_scott = report.max_abs_bias_scott.max(bias.scott.abs());
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_model_is_unbiased_at_three_subjects() {
        let m = MultinomialModel::from_rows(&[[0.35, 0.15], [0.15, 0.35]]).unwrap();
        let mut expectation = CompensatedSum::new();
        for (t, p) in model::enumerate_tables(&m, 3).unwrap() {
            expectation.add(p * coefficients::unbiased_expected_index(Family::Cohen, &t).unwrap());
        }
        assert!((expectation.value() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn plug_in_index_is_biased() {
        // Sanity check that the oracle can tell the difference.
        let m = MultinomialModel::from_rows(&[[0.35, 0.15], [0.15, 0.35]]).unwrap();
        let mut expectation = CompensatedSum::new();
        for (t, p) in model::enumerate_tables(&m, 3).unwrap() {
            let (_, ie) = coefficients::cohen_indices(2, &t.proportions());
            expectation.add(p * ie);
        }
        assert!((expectation.value() - 0.5).abs() > 1e-3);
    }

    #[test]
    fn small_suite() {
        let r = unbiasedness_suite(&[2], &[3], 5, 1).unwrap();
        assert_eq!(r.cases, 5);
        assert!(r.max_abs_bias() <= 1e-10);
    }

    #[test]
    fn suite_needs_two_subjects() {
        assert!(unbiasedness_suite(&[2], &[1], 1, 1).is_err());
    }
}
