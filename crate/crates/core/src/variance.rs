//! Asymptotic variances of agreement coefficients.
//!
//! Three routes are provided:
//!
//! * the closed-form Fleiss–Cohen–Everitt variance of Cohen's kappa,
//! * a generic multivariate delta-method engine, `V(f̂) = Var_p(∂f/∂p_c)/n`,
//!   for any smooth functional of multinomial cell probabilities,
//! * the `V_A` transformation, `(dκ_U/dκ)² · V(κ̂)`, which carries the variance
//!   of a classic estimate over to its unbiased-expected-index variant.
//!
//! Plug-in evaluation at a sample and a nonparametric bootstrap round it out.

use rand::seq::IndexedRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{self, cohen_kappa, Family};
use crate::error::{Error, Result};
use crate::model::{self, MultinomialModel, SampleStream};
use crate::numeric::{self, CompensatedSum};
use crate::table::{ContingencyTable, MultiRaterTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMethod {
    ClosedForm,
    DeltaNumeric,
    VaTransform,
    Plugin,
    Bootstrap,
}

/// Inputs a variance was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VarianceInputs {
    pub n: u64,
    pub kappa: Option<f64>,
    pub expected: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub value: f64,
    pub method: VarianceMethod,
    pub family: Option<Family>,
    pub at: VarianceInputs,
}

impl VarianceEstimate {
    fn new(value: f64, method: VarianceMethod, family: Option<Family>, at: VarianceInputs) -> Self {
        debug_assert!(value >= 0.0 || value.is_nan());
        Self { value, method, family, at }
    }

    pub fn with_family(mut self, family: Family) -> Self {
        self.family = Some(family);
        self
    }

    pub fn standard_error(&self) -> f64 {
        self.value.sqrt()
    }
}

/// A real function of a probability vector over `M` outcomes.
pub trait SmoothFunctional {
    fn evaluate(&self, p: &[f64]) -> Result<f64>;

    /// Analytic partials `∂f/∂p_c`, when known.
    fn gradient(&self, _p: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }

    fn family(&self) -> Option<Family> {
        None
    }
}

/// Adapts a closure into a [`SmoothFunctional`] without an analytic gradient.
pub struct FnFunctional<F>(pub F);

impl<F> SmoothFunctional for FnFunctional<F>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    fn evaluate(&self, p: &[f64]) -> Result<f64> {
        (self.0)(p)
    }
}

/// Cohen's kappa as a function of the K×K cell probabilities.
#[derive(Debug, Clone, Copy)]
pub struct CohenKappaFunctional {
    pub k: usize,
}

impl SmoothFunctional for CohenKappaFunctional {
    fn evaluate(&self, p: &[f64]) -> Result<f64> {
        let (observed, expected) = coefficients::cohen_indices(self.k, p);
        if 1.0 - expected <= 0.0 {
            return Err(Error::UndefinedCoefficient { family: Family::Cohen, table: None });
        }
        Ok((observed - expected) / (1.0 - expected))
    }

    /// `∂κ/∂p_ij = [δ_ij − (p_•i + p_j•)(1 − κ)] / (1 − I_e)`
    fn gradient(&self, p: &[f64]) -> Option<Result<Vec<f64>>> {
        let k = self.k;
        Some(self.evaluate(p).map(|kappa| {
            let rows = model::row_marginals(k, p);
            let cols = model::col_marginals(k, p);
            let expected = numeric::sum(rows.iter().zip(&cols).map(|(r, c)| r * c));
            let mut grad = Vec::with_capacity(k * k);
            for (i, col_i) in cols.iter().enumerate() {
                for (j, row_j) in rows.iter().enumerate() {
                    let diag = if i == j { 1.0 } else { 0.0 };
                    grad.push((diag - (col_i + row_j) * (1.0 - kappa)) / (1.0 - expected));
                }
            }
            grad
        }))
    }

    fn family(&self) -> Option<Family> {
        Some(Family::Cohen)
    }
}

/// Scott's pi as a function of the K×K cell probabilities.
#[derive(Debug, Clone, Copy)]
pub struct ScottPiFunctional {
    pub k: usize,
}

impl SmoothFunctional for ScottPiFunctional {
    fn evaluate(&self, p: &[f64]) -> Result<f64> {
        let (observed, expected) = coefficients::scott_indices(self.k, p);
        if 1.0 - expected <= 0.0 {
            return Err(Error::UndefinedCoefficient { family: Family::Scott, table: None });
        }
        Ok((observed - expected) / (1.0 - expected))
    }

    fn family(&self) -> Option<Family> {
        Some(Family::Scott)
    }
}

/// `κ_XU(p) = to_unbiased(X, κ_X(p), n)` for a fixed sample size `n`.
///
/// Supported for Cohen, Scott and Krippendorff; the latter is driven by
/// Scott's pi as its base.
#[derive(Debug, Clone, Copy)]
pub struct UnbiasedKappaFunctional {
    pub family: Family,
    pub k: usize,
    pub n: u64,
}

impl UnbiasedKappaFunctional {
    pub fn new(family: Family, k: usize, n: u64) -> Result<Self> {
        match family {
            Family::Cohen | Family::Scott | Family::Krippendorff => Ok(Self { family, k, n }),
            other => Err(Error::UnsupportedFamily {
                family: other,
                operation: "UnbiasedKappaFunctional",
                hint: "supply the base variance to va_transform instead",
            }),
        }
    }
}

impl SmoothFunctional for UnbiasedKappaFunctional {
    fn evaluate(&self, p: &[f64]) -> Result<f64> {
        let base = match self.family {
            Family::Cohen => CohenKappaFunctional { k: self.k }.evaluate(p)?,
            _ => ScottPiFunctional { k: self.k }.evaluate(p)?,
        };
        coefficients::to_unbiased(self.family, base, self.n, 2)
    }

    fn family(&self) -> Option<Family> {
        Some(self.family)
    }
}

/// `[Σ g_c² p_c − (Σ g_c p_c)²]/n`, computed in the centered form
/// `Σ p_c (g_c − ḡ)²/n` so the result cannot go negative.
fn delta_from_gradient(grad: &[f64], p: &[f64], n: u64) -> f64 {
    let mean = numeric::sum(grad.iter().zip(p).map(|(g, pc)| g * pc));
    let spread = numeric::sum(grad.iter().zip(p).map(|(g, pc)| pc * (g - mean) * (g - mean)));
    spread.max(0.0) / n as f64
}

/// Central differences along `e_c − e_r`, where `r` is the most probable cell.
///
/// Each step keeps the perturbed vector on the simplex. The result equals the
/// unconstrained gradient up to an additive constant (the reference cell's
/// partial), which the delta formula ignores. Cells with zero probability get
/// a zero entry since they carry no weight.
pub fn finite_difference_gradient<F: SmoothFunctional + ?Sized>(f: &F, p: &[f64]) -> Result<Vec<f64>> {
    let reference = p
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(c, _)| c)
        .ok_or_else(|| Error::InvalidArgument("empty probability vector".into()))?;
    let mut grad = vec![0.0; p.len()];
    let mut shifted = p.to_vec();
    for c in 0..p.len() {
        if c == reference || p[c] <= 0.0 {
            continue;
        }
        let step = 1e-6f64.max(1e-4 * p[c]).min(0.5 * p[c]).min(0.5 * p[reference]);
        let at = |shifted: &mut Vec<f64>, h: f64| -> Result<f64> {
            shifted[c] = p[c] + h;
            shifted[reference] = p[reference] - h;
            let value = f.evaluate(shifted);
            shifted[c] = p[c];
            shifted[reference] = p[reference];
            value.map_err(|e| Error::Gradient { cell: c, reason: e.to_string() })
        };
        let forward = at(&mut shifted, step)?;
        let backward = at(&mut shifted, -step)?;
        grad[c] = (forward - backward) / (2.0 * step);
    }
    Ok(grad)
}

fn check_probability_vector(p: &[f64]) -> Result<()> {
    if p.is_empty() || p.iter().any(|v| v.is_nan() || *v < 0.0) {
        return Err(Error::InvalidArgument("probability vector must be nonempty and nonnegative".into()));
    }
    let total = numeric::sum(p.iter().copied());
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

/// Multivariate delta-method variance of `f(p̂)`; uses the functional's
/// analytic gradient when it has one.
pub fn delta_variance<F: SmoothFunctional + ?Sized>(f: &F, p: &[f64], n: u64) -> Result<VarianceEstimate> {
    match f.gradient(p) {
        Some(grad) => {
            check_probability_vector(p)?;
            delta_with_gradient(f, &grad?, p, n, VarianceMethod::ClosedForm)
        }
        None => delta_variance_numeric(f, p, n),
    }
}

/// Delta-method variance with a finite-difference gradient, whether or not
/// the functional supplies an analytic one.
pub fn delta_variance_numeric<F: SmoothFunctional + ?Sized>(f: &F, p: &[f64], n: u64) -> Result<VarianceEstimate> {
    check_probability_vector(p)?;
    let grad = finite_difference_gradient(f, p)?;
    delta_with_gradient(f, &grad, p, n, VarianceMethod::DeltaNumeric)
}

fn delta_with_gradient<F: SmoothFunctional + ?Sized>(
    f: &F,
    grad: &[f64],
    p: &[f64],
    n: u64,
    method: VarianceMethod,
) -> Result<VarianceEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    if grad.len() != p.len() {
        return Err(Error::InvalidArgument(format!(
            "gradient has {} entries for {} cells",
            grad.len(),
            p.len()
        )));
    }
    let at = VarianceInputs { n, kappa: f.evaluate(p).ok(), expected: None };
    Ok(VarianceEstimate::new(delta_from_gradient(grad, p, n), method, f.family(), at))
}

/// The three terms of the Fleiss–Cohen–Everitt numerator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FceTerms {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// `A`, `B`, `C` at cell probabilities `p` with the expected index and kappa
/// supplied separately, so sample evaluation can substitute other values.
pub fn fce_terms(k: usize, p: &[f64], expected: f64, kappa: f64) -> FceTerms {
    let rows = model::row_marginals(k, p);
    let cols = model::col_marginals(k, p);
    let mut a = CompensatedSum::new();
    let mut b = CompensatedSum::new();
    for i in 0..k {
        for j in 0..k {
            let pij = p[i * k + j];
            if i == j {
                let t = 1.0 - (rows[i] + cols[i]) * (1.0 - kappa);
                a.add(pij * t * t);
            } else {
                let w = cols[i] + rows[j];
                b.add(pij * w * w);
            }
        }
    }
    let c = 1.0 - (1.0 - kappa) * (1.0 + expected);
    FceTerms {
        a: a.value(),
        b: (1.0 - kappa) * (1.0 - kappa) * b.value(),
        c: c * c,
    }
}

fn fce_value(k: usize, p: &[f64], expected: f64, kappa: f64, n: u64) -> f64 {
    let FceTerms { a, b, c } = fce_terms(k, p, expected, kappa);
    let scale = n as f64 * (1.0 - expected) * (1.0 - expected);
    ((a + b - c) / scale).max(0.0)
}

/// `V(κ̂_C) = (A + B − C) / (n (1 − I_e)²)` at the population `model`.
pub fn fleiss_cohen_everitt_variance(model: &MultinomialModel, n: u64) -> Result<VarianceEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    let summary = model::population_summaries(model)?;
    let value = fce_value(model.k(), model.probabilities(), summary.expected, summary.kappa, n);
    let at = VarianceInputs { n, kappa: Some(summary.kappa), expected: Some(summary.expected) };
    Ok(VarianceEstimate::new(value, VarianceMethod::ClosedForm, Some(Family::Cohen), at))
}

/// `(dκ_U/dκ)²` written as each family's printed factor.
pub fn va_factor(family: Family, kappa: f64, n: u64, raters: u32) -> Result<f64> {
    // Shares the domain checks of the transformation itself.
    coefficients::transform_derivative(family, kappa, n, raters)?;
    let nf = n as f64;
    let (numerator, denominator) = match family {
        Family::Cohen | Family::Hubert => (nf * (nf - 1.0), nf - 1.0 + kappa),
        Family::Scott | Family::Fleiss2 => (4.0 * nf * (nf - 1.0), 2.0 * nf - 1.0 + kappa),
        Family::Krippendorff | Family::Krippendorff2 => {
            (2.0 * (2.0 * nf - 1.0) * (nf - 1.0), 2.0 * nf - 1.0 + kappa)
        }
        Family::Fleiss => {
            let r = raters as f64;
            (r * r * nf * (nf - 1.0), nf * r - (r - 1.0) * (1.0 - kappa))
        }
    };
    Ok(numerator * numerator / denominator.powi(4))
}

/// `V_A(κ̂_XU) = factor · V(κ̂_X)`.
///
/// For Krippendorff and Krippendorff2 the base is Scott's pi (resp. the
/// pairwise Fleiss kappa) and its variance, matching [`coefficients::to_unbiased`].
pub fn va_transform(family: Family, base_variance: f64, kappa_base: f64, n: u64, raters: u32) -> Result<VarianceEstimate> {
    if base_variance.is_nan() || base_variance < 0.0 {
        return Err(Error::InvalidArgument(format!("base variance {base_variance} is negative")));
    }
    let factor = va_factor(family, kappa_base, n, raters)?;
    let at = VarianceInputs { n, kappa: Some(kappa_base), expected: None };
    Ok(VarianceEstimate::new(factor * base_variance, VarianceMethod::VaTransform, Some(family), at))
}

/// Which population formula [`plugin_variance`] evaluates at the sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PluginFormula {
    /// `V(κ̂_C)` with `I_e ← Î_eU`, `κ_C ← κ̂_CU`.
    FleissCohenEveritt,
    /// `V_A(κ̂_CU)` with the same substitution in both the base variance and the factor.
    VaTransform,
    /// Delta engine on the `κ_CU` functional at `p̂`.
    DeltaNumeric,
}

/// A Cohen-family population variance evaluated at an observed table.
///
/// The closed-form formulas take `p̂_ij` and its marginals for the cell
/// probabilities, and the unbiased `Î_eU` and `κ̂_CU` for `I_e` and `κ_C`.
pub fn plugin_variance(formula: PluginFormula, table: &ContingencyTable) -> Result<VarianceEstimate> {
    let n = table.n();
    let estimate = cohen_kappa(table).map_err(|e| Error::DegenerateSample(e.to_string()))?;
    let (expected_u, kappa_u) = match (estimate.expected_unbiased, estimate.value_unbiased) {
        (Some(e), Some(v)) if 1.0 - e > 0.0 => (e, v),
        _ => {
            return Err(Error::DegenerateSample(format!(
                "unbiased kappa undefined on table {table}"
            )))
        }
    };
    let p = table.proportions();
    let value = match formula {
        PluginFormula::FleissCohenEveritt => fce_value(table.k(), &p, expected_u, kappa_u, n),
        PluginFormula::VaTransform => {
            let base = fce_value(table.k(), &p, expected_u, kappa_u, n);
            va_transform(Family::Cohen, base, kappa_u, n, 2)
                .map_err(|e| Error::DegenerateSample(e.to_string()))?
                .value
        }
        PluginFormula::DeltaNumeric => {
            let f = UnbiasedKappaFunctional { family: Family::Cohen, k: table.k(), n };
            delta_variance_numeric(&f, &p, n)
                .map_err(|e| Error::DegenerateSample(e.to_string()))?
                .value
        }
    };
    let at = VarianceInputs { n, kappa: Some(kappa_u), expected: Some(expected_u) };
    Ok(VarianceEstimate::new(value, VarianceMethod::Plugin, Some(Family::Cohen), at))
}

/// Data that can be resampled subject-wise with replacement.
pub trait Resample: Sized {
    fn resample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Self>;
    fn subjects(&self) -> u64;
}

impl Resample for ContingencyTable {
    /// Drawing `n` subjects with replacement is a multinomial draw with `p̂`.
    fn resample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Self> {
        model::sample_table_with(&MultinomialModel::from_table(self), self.n(), rng)
    }

    fn subjects(&self) -> u64 {
        self.n()
    }
}

impl Resample for MultiRaterTable {
    fn resample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Self> {
        let all: Vec<usize> = (0..self.subjects()).collect();
        let picks: Vec<usize> = (0..all.len()).map(|_| *all.choose(rng).expect("nonempty")).collect();
        Ok(self.select(&picks))
    }

    fn subjects(&self) -> u64 {
        MultiRaterTable::subjects(self) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapVariance {
    pub estimate: VarianceEstimate,
    pub resamples: usize,
    /// Resamples on which the estimator was undefined; excluded from the variance.
    pub degenerate: usize,
}

/// Variance (denominator `B − 1`) of `estimator` over `resamples` bootstrap
/// resamples. Resample `b` draws from `stream.child(b)`, so the result does
/// not depend on the thread count.
pub fn bootstrap_variance<T, F>(estimator: F, data: &T, resamples: usize, stream: SampleStream) -> Result<BootstrapVariance>
where
    T: Resample + Sync,
    F: Fn(&T) -> Result<f64> + Sync,
{
    if resamples < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 resamples, got {resamples}")));
    }
    let values: Vec<Option<f64>> = (0..resamples as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream.child(b).rng();
            data.resample(&mut rng).ok().and_then(|d| estimator(&d).ok()).filter(|v| v.is_finite())
        })
        .collect();
    let kept: Vec<f64> = values.iter().flatten().copied().collect();
    let degenerate = resamples - kept.len();
    if 2 * degenerate > resamples {
        return Err(Error::TooManyDegenerate { degenerate, total: resamples });
    }
    let value = numeric::sample_variance(&kept)
        .ok_or_else(|| Error::InvalidArgument("fewer than 2 usable resamples".into()))?;
    let at = VarianceInputs { n: data.subjects(), kappa: None, expected: None };
    Ok(BootstrapVariance {
        estimate: VarianceEstimate::new(value, VarianceMethod::Bootstrap, None, at),
        resamples,
        degenerate,
    })
}
