//! Classic agreement coefficients and their unbiased-expected-index variants.
//!
//! Every coefficient here has the form `(I_o − I_e) / (1 − I_e)`. The
//! unbiased variant replaces the plug-in expected index `Î_e` by an estimator
//! `Î_eU` whose expectation is exactly `I_e`. For a fixed sample size the
//! unbiased variant is a linear-fractional function of the classic estimate,
//! so it can also be reached through [`to_unbiased`] without the raw data.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model;
use crate::numeric::{self, CompensatedSum};
use crate::table::{ContingencyTable, MultiRaterTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Cohen,
    Scott,
    Krippendorff,
    Hubert,
    Fleiss,
    Fleiss2,
    Krippendorff2,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Cohen,
        Family::Scott,
        Family::Krippendorff,
        Family::Hubert,
        Family::Fleiss,
        Family::Fleiss2,
        Family::Krippendorff2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Cohen => "cohen",
            Family::Scott => "scott",
            Family::Krippendorff => "krippendorff",
            Family::Hubert => "hubert",
            Family::Fleiss => "fleiss",
            Family::Fleiss2 => "fleiss2",
            Family::Krippendorff2 => "krippendorff2",
        }
    }

    /// Whether the family's base estimate is computed from data by this crate.
    /// The others accept a caller-supplied base value.
    pub fn has_data_estimator(self) -> bool {
        matches!(self, Family::Cohen | Family::Scott | Family::Krippendorff | Family::Fleiss)
    }

    /// Cohen-shaped families use the product of the two raters' marginals as
    /// their chance model; the rest pool the ratings.
    fn is_cohen_like(self) -> bool {
        matches!(self, Family::Cohen | Family::Hubert)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown family `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEstimate {
    pub family: Family,
    /// Classic estimate `κ̂_X`.
    pub value: f64,
    /// `Î_o`
    pub observed: f64,
    /// Plug-in `Î_e`
    pub expected: f64,
    /// `Î_eU`, absent when `n < 2`.
    pub expected_unbiased: Option<f64>,
    /// `κ̂_XU`, absent when `n < 2` or the transformation is undefined.
    pub value_unbiased: Option<f64>,
}

fn kappa_from_indices(observed: f64, expected: f64) -> Option<f64> {
    (1.0 - expected > 0.0).then(|| (observed - expected) / (1.0 - expected))
}

/// `(Σ p_ii, Σ p_i•·p_•i)` for a row-major K×K probability vector.
pub(crate) fn cohen_indices(k: usize, p: &[f64]) -> (f64, f64) {
    let rows = model::row_marginals(k, p);
    let cols = model::col_marginals(k, p);
    let observed = numeric::sum((0..k).map(|i| p[i * k + i]));
    let expected = numeric::sum(rows.iter().zip(&cols).map(|(r, c)| r * c));
    (observed, expected)
}

/// Averaged marginals `π_i = (p_i• + p_•i) / 2`.
pub(crate) fn pooled_marginals(k: usize, p: &[f64]) -> Vec<f64> {
    let rows = model::row_marginals(k, p);
    let cols = model::col_marginals(k, p);
    rows.iter().zip(&cols).map(|(r, c)| 0.5 * (r + c)).collect()
}

pub(crate) fn scott_indices(k: usize, p: &[f64]) -> (f64, f64) {
    let observed = numeric::sum((0..k).map(|i| p[i * k + i]));
    let expected = numeric::sum(pooled_marginals(k, p).iter().map(|pi| pi * pi));
    (observed, expected)
}

/// Cohen's kappa with product-of-marginals chance agreement.
pub fn cohen_kappa(table: &ContingencyTable) -> Result<CoefficientEstimate> {
    let (observed, expected) = cohen_indices(table.k(), &table.proportions());
    let value = kappa_from_indices(observed, expected)
        .ok_or_else(|| Error::UndefinedCoefficient { family: Family::Cohen, table: Some(table.clone()) })?;
    let expected_unbiased = unbiased_expected_index(Family::Cohen, table).ok();
    Ok(CoefficientEstimate {
        family: Family::Cohen,
        value,
        observed,
        expected,
        expected_unbiased,
        value_unbiased: expected_unbiased.and_then(|e| kappa_from_indices(observed, e)),
    })
}

/// Scott's pi: chance agreement from the squared averaged marginals.
pub fn scott_pi(table: &ContingencyTable) -> Result<CoefficientEstimate> {
    let (observed, expected) = scott_indices(table.k(), &table.proportions());
    let value = kappa_from_indices(observed, expected)
        .ok_or_else(|| Error::UndefinedCoefficient { family: Family::Scott, table: Some(table.clone()) })?;
    let expected_unbiased = unbiased_expected_index(Family::Scott, table).ok();
    Ok(CoefficientEstimate {
        family: Family::Scott,
        value,
        observed,
        expected,
        expected_unbiased,
        value_unbiased: expected_unbiased.and_then(|e| kappa_from_indices(observed, e)),
    })
}

/// Nominal Krippendorff's alpha for two raters and no missing values, via its
/// affine relation to Scott's pi: `α = π + (1 − π)/(2n)`.
///
/// The reported expected index is the one that makes `α = (I_o − I_e)/(1 − I_e)`,
/// namely `(2n·I_e,S − 1)/(2n − 1)`.
pub fn krippendorff_alpha(table: &ContingencyTable) -> Result<CoefficientEstimate> {
    let scott = scott_pi(table).map_err(|e| match e {
        Error::UndefinedCoefficient { table, .. } => Error::UndefinedCoefficient { family: Family::Krippendorff, table },
        other => other,
    })?;
    let two_n = 2.0 * table.n() as f64;
    let rescale = |e: f64| (two_n * e - 1.0) / (two_n - 1.0);
    let value_unbiased = if table.n() >= 2 {
        to_unbiased(Family::Krippendorff, scott.value, table.n(), 2).ok()
    } else {
        None
    };
    Ok(CoefficientEstimate {
        family: Family::Krippendorff,
        value: scott.value + (1.0 - scott.value) / two_n,
        observed: scott.observed,
        expected: rescale(scott.expected),
        expected_unbiased: scott.expected_unbiased.map(rescale),
        value_unbiased,
    })
}

/// Fleiss' kappa for `R` raters per subject.
pub fn fleiss_kappa(mr: &MultiRaterTable) -> Result<CoefficientEstimate> {
    let (observed, expected) = fleiss_indices(mr);
    let value = kappa_from_indices(observed, expected)
        .ok_or(Error::UndefinedCoefficient { family: Family::Fleiss, table: None })?;
    let expected_unbiased = fleiss_unbiased_expected_index(mr).ok();
    Ok(CoefficientEstimate {
        family: Family::Fleiss,
        value,
        observed,
        expected,
        expected_unbiased,
        value_unbiased: expected_unbiased.and_then(|e| kappa_from_indices(observed, e)),
    })
}

fn fleiss_indices(mr: &MultiRaterTable) -> (f64, f64) {
    let n = mr.subjects() as f64;
    let r = mr.raters() as f64;
    let pairs: u64 = mr
        .rows()
        .flat_map(|row| row.iter().map(|&c| c as u64 * (c as u64).saturating_sub(1)))
        .sum();
    let observed = pairs as f64 / (n * r * (r - 1.0));
    let expected = numeric::sum(pooled_proportions(mr).iter().map(|p| p * p));
    (observed, expected)
}

fn pooled_proportions(mr: &MultiRaterTable) -> Vec<f64> {
    let total = mr.subjects() as f64 * mr.raters() as f64;
    let mut sums = vec![0u64; mr.k()];
    for row in mr.rows() {
        for (s, &c) in sums.iter_mut().zip(row) {
            *s += c as u64;
        }
    }
    sums.into_iter().map(|s| s as f64 / total).collect()
}

/// The unbiased estimator `Î_eU` of the expected index, assembled category by
/// category as `Σ_i (n·m̂_i² − ŝ_i)/(n − 1)`, where `m̂_i` is the sample mean of a
/// per-subject score and `ŝ_i` the sample mean of its square.
///
/// Cohen: the score pair is (row indicator, column indicator), giving
/// `(n·Î_e − Î_o)/(n − 1)`. Scott: the score is the averaged indicator
/// `(1[row=i] + 1[col=i])/2`.
pub fn unbiased_expected_index(family: Family, table: &ContingencyTable) -> Result<f64> {
    let n = table.n();
    if n < 2 {
        return Err(Error::InsufficientSubjects { n, required: 2 });
    }
    let k = table.k();
    let p = table.proportions();
    let nf = n as f64;
    let mut acc = CompensatedSum::new();
    match family {
        Family::Cohen => {
            let rows = model::row_marginals(k, &p);
            let cols = model::col_marginals(k, &p);
            for i in 0..k {
                // E[p̂_i•·p̂_•i] = p_i•·p_•i + (p_ii − p_i•·p_•i)/n
                acc.add((nf * rows[i] * cols[i] - p[i * k + i]) / (nf - 1.0));
            }
        }
        Family::Scott => {
            let rows = model::row_marginals(k, &p);
            let cols = model::col_marginals(k, &p);
            for i in 0..k {
                let mean = 0.5 * (rows[i] + cols[i]);
                let mean_square = 0.25 * (rows[i] + cols[i] + 2.0 * p[i * k + i]);
                acc.add((nf * mean * mean - mean_square) / (nf - 1.0));
            }
        }
        other => {
            return Err(Error::UnsupportedFamily {
                family: other,
                operation: "unbiased_expected_index",
                hint: "use to_unbiased with the classic estimate",
            })
        }
    }
    Ok(acc.value())
}

/// Unbiased expected index for Fleiss' kappa: the per-subject score for
/// category `k` is `c_sk / R`.
pub fn fleiss_unbiased_expected_index(mr: &MultiRaterTable) -> Result<f64> {
    let n = mr.subjects() as u64;
    if n < 2 {
        return Err(Error::InsufficientSubjects { n, required: 2 });
    }
    let nf = n as f64;
    let r = mr.raters() as f64;
    let means = pooled_proportions(mr);
    let mut acc = CompensatedSum::new();
    for (cat, mean) in means.iter().enumerate() {
        let mean_square = numeric::sum(mr.rows().map(|row| {
            let share = row[cat] as f64 / r;
            share * share
        })) / nf;
        acc.add((nf * mean * mean - mean_square) / (nf - 1.0));
    }
    Ok(acc.value())
}

fn check_transform_args(family: Family, n: u64, raters: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::InsufficientSubjects { n, required: 2 });
    }
    if family == Family::Fleiss && raters < 2 {
        return Err(Error::InvalidArgument(format!("Fleiss needs at least 2 raters, got {raters}")));
    }
    Ok(())
}

/// Denominator of the linear-fractional map; it must be positive.
fn transform_denominator(family: Family, kappa: f64, n: u64, raters: u32) -> f64 {
    let n = n as f64;
    if family.is_cohen_like() {
        n - 1.0 + kappa
    } else if family == Family::Fleiss {
        let r = raters as f64;
        r * n - (r - 1.0) * (1.0 - kappa)
    } else {
        2.0 * n - 1.0 + kappa
    }
}

fn checked_denominator(family: Family, kappa: f64, n: u64, raters: u32) -> Result<f64> {
    check_transform_args(family, n, raters)?;
    let denominator = transform_denominator(family, kappa, n, raters);
    if denominator > 0.0 {
        Ok(denominator)
    } else {
        Err(Error::TransformationUndefined { family, kappa, n, raters, denominator })
    }
}

/// Maps a classic estimate to its unbiased-expected-index counterpart.
///
/// * Cohen, Hubert: `nκ/(n − 1 + κ)`
/// * Scott, Fleiss2: `((2n − 1)κ + 1)/(2n − 1 + κ)`
/// * Fleiss: `((Rn − 1)κ + 1)/(Rn − (R − 1)(1 − κ))`
/// * Krippendorff, Krippendorff2: `((2n − 1)κ_U + 1)/(2n)`, where `κ_U` is the
///   Scott (resp. Fleiss2) map of the base value. The `kappa` argument is the
///   Scott or pairwise-Fleiss base estimate, not alpha itself.
pub fn to_unbiased(family: Family, kappa: f64, n: u64, raters: u32) -> Result<f64> {
    let denominator = checked_denominator(family, kappa, n, raters)?;
    let nf = n as f64;
    Ok(match family {
        Family::Cohen | Family::Hubert => nf * kappa / denominator,
        Family::Scott | Family::Fleiss2 => ((2.0 * nf - 1.0) * kappa + 1.0) / denominator,
        Family::Fleiss => {
            let rn = raters as f64 * nf;
            ((rn - 1.0) * kappa + 1.0) / denominator
        }
        Family::Krippendorff | Family::Krippendorff2 => {
            let scottlike = ((2.0 * nf - 1.0) * kappa + 1.0) / denominator;
            ((2.0 * nf - 1.0) * scottlike + 1.0) / (2.0 * nf)
        }
    })
}

/// `dκ_U/dκ` for the map in [`to_unbiased`].
pub fn transform_derivative(family: Family, kappa: f64, n: u64, raters: u32) -> Result<f64> {
    let denominator = checked_denominator(family, kappa, n, raters)?;
    let nf = n as f64;
    let squared = denominator * denominator;
    Ok(match family {
        Family::Cohen | Family::Hubert => nf * (nf - 1.0) / squared,
        Family::Scott | Family::Fleiss2 => 4.0 * nf * (nf - 1.0) / squared,
        Family::Fleiss => {
            let r = raters as f64;
            r * r * nf * (nf - 1.0) / squared
        }
        Family::Krippendorff | Family::Krippendorff2 => 2.0 * (2.0 * nf - 1.0) * (nf - 1.0) / squared,
    })
}

/// The base value at which `dκ_U/dκ = 1`; `κ_U − κ` is extreme there.
pub fn crossover_kappa(family: Family, n: u64, raters: u32) -> Result<f64> {
    check_transform_args(family, n, raters)?;
    let nf = n as f64;
    let root = (nf * (nf - 1.0)).sqrt();
    Ok(match family {
        Family::Cohen | Family::Hubert => root - (nf - 1.0),
        Family::Scott | Family::Fleiss2 => 2.0 * root - (2.0 * nf - 1.0),
        Family::Fleiss => {
            let r = raters as f64;
            (r * root - (r * nf - r + 1.0)) / (r - 1.0)
        }
        Family::Krippendorff | Family::Krippendorff2 => {
            (2.0 * (2.0 * nf - 1.0) * (nf - 1.0)).sqrt() - (2.0 * nf - 1.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[[u64; 2]]) -> ContingencyTable {
        ContingencyTable::from_rows(rows).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn cohen_examples() {
        assert_eq!(cohen_kappa(&table(&[[5, 0], [0, 5]])).unwrap().value, 1.0);
        let e = cohen_kappa(&table(&[[3, 3], [2, 2]])).unwrap();
        assert!(close(e.observed, 0.5, 1e-15) && close(e.expected, 0.5, 1e-15));
        assert!(close(e.value, 0.0, 1e-15));
        let e = cohen_kappa(&table(&[[4, 1], [2, 3]])).unwrap();
        assert!(close(e.observed, 0.7, 1e-15));
        assert!(close(e.expected, 0.5, 1e-15));
        assert!(close(e.value, 0.4, 1e-14));
        assert!(close(e.expected_unbiased.unwrap(), 0.477_777_777_777_777_8, 1e-12));
        assert!(close(e.value_unbiased.unwrap(), 4.0 / 9.4, 1e-12));
    }

    #[test]
    fn cohen_undefined_carries_table() {
        let t = table(&[[6, 0], [0, 0]]);
        match cohen_kappa(&t) {
            Err(Error::UndefinedCoefficient { family: Family::Cohen, table: Some(carried) }) => assert_eq!(carried, t),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scott_examples() {
        assert_eq!(scott_pi(&table(&[[1, 0], [0, 1]])).unwrap().value, 1.0);
        let e = scott_pi(&table(&[[1, 1], [0, 0]])).unwrap();
        assert!(close(e.expected, 0.625, 1e-15) && close(e.observed, 0.5, 1e-15));
        assert!(close(e.value, -1.0 / 3.0, 1e-15));
        assert!(close(e.expected_unbiased.unwrap(), 0.5, 1e-15));
        assert!(close(e.value_unbiased.unwrap(), 0.0, 1e-15));
        let e = scott_pi(&table(&[[0, 2], [0, 0]])).unwrap();
        assert!(close(e.observed, 0.0, 0.0) && close(e.expected, 0.5, 1e-15));
        assert!(close(e.value, -1.0, 1e-15));
    }

    #[test]
    fn krippendorff_examples() {
        assert!(close(krippendorff_alpha(&table(&[[1, 0], [0, 1]])).unwrap().value, 1.0, 1e-15));
        assert!(close(krippendorff_alpha(&table(&[[0, 2], [0, 0]])).unwrap().value, -0.5, 1e-15));
        assert!(close(krippendorff_alpha(&table(&[[1, 1], [0, 0]])).unwrap().value, 0.0, 1e-15));
    }

    #[test]
    fn krippendorff_indices_reproduce_value() {
        let e = krippendorff_alpha(&table(&[[7, 2], [4, 5]])).unwrap();
        assert!(close(e.value, (e.observed - e.expected) / (1.0 - e.expected), 1e-14));
        let eu = e.expected_unbiased.unwrap();
        assert!(close(e.value_unbiased.unwrap(), (e.observed - eu) / (1.0 - eu), 1e-14));
    }

    #[test]
    fn fleiss_examples() {
        let e = fleiss_kappa(&MultiRaterTable::new(&[[3u32, 0], [0, 3]]).unwrap()).unwrap();
        assert_eq!((e.observed, e.expected, e.value), (1.0, 0.5, 1.0));
        let e = fleiss_kappa(&MultiRaterTable::new(&[[1u32, 1], [2, 0]]).unwrap()).unwrap();
        assert!(close(e.observed, 0.5, 1e-15) && close(e.expected, 0.625, 1e-15));
        assert!(close(e.value, -1.0 / 3.0, 1e-15));
        let s = scott_pi(&table(&[[1, 1], [0, 0]])).unwrap();
        assert!(close(e.value, s.value, 1e-15));
        let e = fleiss_kappa(&MultiRaterTable::new(&[[2u32, 0], [0, 2], [2, 0]]).unwrap()).unwrap();
        assert!(close(e.observed, 1.0, 0.0));
        assert!(close(e.expected, 5.0 / 9.0, 1e-15));
        assert!(close(e.value, 1.0, 1e-15));
    }

    #[test]
    fn fleiss_unbiased_routes_agree() {
        let mr = MultiRaterTable::new(&[[3u32, 0, 0], [1, 2, 0], [0, 1, 2], [1, 1, 1], [0, 0, 3]]).unwrap();
        let e = fleiss_kappa(&mr).unwrap();
        let via_map = to_unbiased(Family::Fleiss, e.value, 5, 3).unwrap();
        assert!(close(e.value_unbiased.unwrap(), via_map, 1e-13));
    }

    #[test]
    fn fleiss_unbiased_index_exact_expectation() {
        // Subjects draw one of these rows iid; any row law works.
        let rows: [([u32; 3], f64); 4] = [([3, 0, 0], 0.4), ([1, 2, 0], 0.3), ([0, 1, 2], 0.2), ([1, 1, 1], 0.1)];
        let share = |k: usize| rows.iter().map(|(r, w)| w * r[k] as f64 / 3.0).sum::<f64>();
        let target: f64 = (0..3).map(|k| share(k).powi(2)).sum();
        let mut expectation = 0.0;
        // Three subjects.
        for (ra, wa) in &rows {
            for (rb, wb) in &rows {
                for (rc, wc) in &rows {
                    let mr = MultiRaterTable::new(&[*ra, *rb, *rc]).unwrap();
                    let w = wa * wb * wc;
                    expectation += w * fleiss_unbiased_expected_index(&mr).unwrap();
                }
            }
        }
        assert!(close(expectation, target, 1e-15), "{expectation} vs {target}");
    }

    #[test]
    fn fleiss_undefined() {
        let mr = MultiRaterTable::new(&[[3u32, 0], [3, 0]]).unwrap();
        assert!(matches!(fleiss_kappa(&mr), Err(Error::UndefinedCoefficient { family: Family::Fleiss, .. })));
    }

    #[test]
    fn unbiased_index_examples() {
        let e = unbiased_expected_index(Family::Cohen, &table(&[[4, 1], [2, 3]])).unwrap();
        assert!(close(e, (10.0 * 0.5 - 0.7) / 9.0, 1e-15));
        assert!(close(unbiased_expected_index(Family::Cohen, &table(&[[1, 0], [0, 1]])).unwrap(), 0.0, 1e-15));
        assert!(close(unbiased_expected_index(Family::Scott, &table(&[[1, 1], [0, 0]])).unwrap(), 0.5, 1e-15));
        assert!(matches!(
            unbiased_expected_index(Family::Cohen, &table(&[[1, 0], [0, 0]])),
            Err(Error::InsufficientSubjects { .. })
        ));
        assert!(matches!(
            unbiased_expected_index(Family::Fleiss, &table(&[[1, 1], [0, 0]])),
            Err(Error::UnsupportedFamily { .. })
        ));
    }

    #[test]
    fn transform_examples() {
        for n in [2, 10, 1000] {
            for f in Family::ALL {
                assert!(close(to_unbiased(f, 1.0, n, 3).unwrap(), 1.0, 1e-15), "{f} n={n}");
            }
        }
        assert!(close(to_unbiased(Family::Cohen, 0.4, 10, 2).unwrap(), 0.425_531_914_893_617, 1e-12));
        assert!(close(to_unbiased(Family::Scott, -1.0 / 3.0, 2, 2).unwrap(), 0.0, 1e-15));
        assert!(close(to_unbiased(Family::Fleiss, 0.5, 10, 3).unwrap(), 15.5 / 29.0, 1e-15));
        assert_eq!(to_unbiased(Family::Cohen, 0.0, 10, 2).unwrap(), 0.0);
        assert_eq!(to_unbiased(Family::Hubert, 0.0, 10, 2).unwrap(), 0.0);
    }

    #[test]
    fn transform_domain() {
        assert!(matches!(
            to_unbiased(Family::Cohen, -9.0, 10, 2),
            Err(Error::TransformationUndefined { .. })
        ));
        assert!(to_unbiased(Family::Cohen, -8.5, 10, 2).is_ok());
        assert!(to_unbiased(Family::Scott, -19.0, 10, 2).is_err());
        assert!(to_unbiased(Family::Fleiss, -14.0, 10, 3).is_err());
        assert!(to_unbiased(Family::Fleiss, -13.9, 10, 3).is_ok());
        assert!(to_unbiased(Family::Fleiss, 0.3, 10, 1).is_err());
        assert!(transform_derivative(Family::Scott, -19.5, 10, 2).is_err());
        assert!(to_unbiased(Family::Cohen, 0.3, 1, 2).is_err());
    }

    #[test]
    fn derivative_examples() {
        assert!(close(transform_derivative(Family::Cohen, 1.0, 10, 2).unwrap(), 0.9, 1e-15));
        assert!(close(transform_derivative(Family::Scott, 1.0, 10, 2).unwrap(), 0.9, 1e-15));
        for n in [2, 7, 50] {
            for kappa in [-0.5, 0.0, 0.3, 0.9] {
                let s = transform_derivative(Family::Scott, kappa, n, 2).unwrap();
                let f = transform_derivative(Family::Fleiss, kappa, n, 2).unwrap();
                assert!(close(s, f, 1e-15 * s.abs().max(1.0)));
            }
        }
    }

    #[test]
    fn crossover_examples() {
        assert!(close(crossover_kappa(Family::Cohen, 10, 2).unwrap(), 90f64.sqrt() - 9.0, 1e-15));
        assert!(close(crossover_kappa(Family::Cohen, 10, 2).unwrap(), 0.486_833, 1e-6));
        assert!(close(crossover_kappa(Family::Scott, 10, 2).unwrap(), -0.026_334, 1e-6));
        assert!(close(
            crossover_kappa(Family::Fleiss, 10, 2).unwrap(),
            crossover_kappa(Family::Scott, 10, 2).unwrap(),
            1e-14
        ));
        for f in Family::ALL {
            let c = crossover_kappa(f, 20, 4).unwrap();
            assert!(close(transform_derivative(f, c, 20, 4).unwrap(), 1.0, 1e-12), "{f}");
        }
        assert!(crossover_kappa(Family::Cohen, 1, 2).is_err());
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("gwet".parse::<Family>().is_err());
    }
}
