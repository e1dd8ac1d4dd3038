//! Population multinomial models over K×K rating tables, scenario construction,
//! reproducible sampling and exhaustive enumeration of small-sample outcomes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::coefficients::{self, Family};
use crate::error::{Error, Result};
use crate::numeric::{self, CompensatedSum};
use crate::table::ContingencyTable;

const MASS_TOLERANCE: f64 = 1e-12;

/// Default ceiling on the number of tables [`enumerate_tables`] will visit.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// Cell probabilities `p_ij` of a K×K rating table, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultinomialModel {
    k: usize,
    p: Vec<f64>,
}

impl MultinomialModel {
    pub fn new(k: usize, p: Vec<f64>) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidModel(format!("need at least 2 categories, got {k}")));
        }
        if p.len() != k * k {
            return Err(Error::InvalidModel(format!(
                "expected {} cell probabilities for K={k}, got {}",
                k * k,
                p.len()
            )));
        }
        if let Some((c, v)) = p.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && **v <= 1.0)) {
            return Err(Error::InvalidModel(format!("cell {c} has probability {v} outside [0, 1]")));
        }
        let total = numeric::sum(p.iter().copied());
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidModel(format!("cell probabilities sum to {total}, not 1")));
        }
        Ok(Self { k, p })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let k = rows.len();
        let mut p = Vec::with_capacity(k * k);
        for row in rows {
            if row.as_ref().len() != k {
                return Err(Error::InvalidModel("probability matrix is not square".into()));
            }
            p.extend_from_slice(row.as_ref());
        }
        Self::new(k, p)
    }

    /// The empirical model `x_ij / n` of an observed table.
    pub fn from_table(table: &ContingencyTable) -> Self {
        Self { k: table.k(), p: table.proportions() }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.k + j]
    }

    /// Row sums `p_i•`.
    pub fn row_marginals(&self) -> Vec<f64> {
        row_marginals(self.k, &self.p)
    }

    /// Column sums `p_•j`.
    pub fn col_marginals(&self) -> Vec<f64> {
        col_marginals(self.k, &self.p)
    }
}

pub(crate) fn row_marginals(k: usize, p: &[f64]) -> Vec<f64> {
    p.chunks(k).map(|row| numeric::sum(row.iter().copied())).collect()
}

pub(crate) fn col_marginals(k: usize, p: &[f64]) -> Vec<f64> {
    (0..k).map(|j| numeric::sum((0..k).map(|i| p[i * k + j]))).collect()
}

/// One simulation scenario: category count, subjects per sample, target
/// population kappa and (optionally) the common marginal distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub k: usize,
    pub n: u64,
    pub kappa_target: f64,
    pub marginals: Option<Vec<f64>>,
}

impl Scenario {
    pub fn new(k: usize, n: u64, kappa_target: f64) -> Self {
        Self { k, n, kappa_target, marginals: None }
    }

    pub fn with_marginals(mut self, marginals: Vec<f64>) -> Self {
        self.marginals = Some(marginals);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidScenario(format!("n must be at least 2, got {}", self.n)));
        }
        self.model().map(|_| ())
    }

    pub fn model(&self) -> Result<MultinomialModel> {
        build_scenario(self.k, self.kappa_target, self.marginals.as_deref())
    }
}

/// Builds `p_ij = κ·δ_ij·π_i + (1−κ)·π_i·π_j`, whose row and column marginals
/// are both `π` and whose population Cohen kappa is `κ`.
pub fn build_scenario(k: usize, kappa_target: f64, marginals: Option<&[f64]>) -> Result<MultinomialModel> {
    if k < 2 {
        return Err(Error::InvalidScenario(format!("need at least 2 categories, got {k}")));
    }
    if !(kappa_target > -1.0 && kappa_target <= 1.0) {
        return Err(Error::InvalidScenario(format!("kappa {kappa_target} outside (-1, 1]")));
    }
    let pi: Vec<f64> = match marginals {
        None => vec![1.0 / k as f64; k],
        Some(m) => {
            if m.len() != k {
                return Err(Error::InvalidScenario(format!(
                    "{} marginals given for K={k}",
                    m.len()
                )));
            }
            if let Some(v) = m.iter().find(|v| v.is_nan() || **v <= 0.0) {
                return Err(Error::InvalidScenario(format!("marginal {v} is not positive")));
            }
            let total = numeric::sum(m.iter().copied());
            if (total - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::InvalidScenario(format!("marginals sum to {total}, not 1")));
            }
            m.to_vec()
        }
    };
    let mut p = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let chance = (1.0 - kappa_target) * pi[i] * pi[j];
            let cell = if i == j { kappa_target * pi[i] + chance } else { chance };
            if cell < 0.0 {
                return Err(Error::InvalidScenario(format!(
                    "kappa {kappa_target} gives negative probability {cell} in cell ({i}, {j})"
                )));
            }
            p.push(cell);
        }
    }
    MultinomialModel::new(k, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationSummaries {
    pub observed: f64,
    pub expected: f64,
    pub kappa: f64,
}

/// Population `I_o = Σ p_ii`, `I_e = Σ p_i•·p_•i` and `κ_C`.
pub fn population_summaries(model: &MultinomialModel) -> Result<PopulationSummaries> {
    let (observed, expected) = coefficients::cohen_indices(model.k, &model.p);
    if 1.0 - expected <= 0.0 {
        return Err(Error::UndefinedCoefficient { family: Family::Cohen, table: None });
    }
    Ok(PopulationSummaries {
        observed,
        expected,
        kappa: (observed - expected) / (1.0 - expected),
    })
}

/// Identifies an independent random stream: replicate `stream_index` under
/// `base_seed`. Each pair maps to its own ChaCha stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SampleStream {
    pub base_seed: u64,
    pub stream_index: u64,
}

impl SampleStream {
    pub fn new(base_seed: u64, stream_index: u64) -> Self {
        Self { base_seed, stream_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// A family of streams nested under this one, e.g. bootstrap resamples
    /// of the dataset drawn from this stream.
    pub fn child(&self, index: u64) -> SampleStream {
        SampleStream {
            base_seed: splitmix64(self.base_seed ^ splitmix64(self.stream_index.wrapping_add(0x5851_f42d_4c95_7f2d))),
            stream_index: index,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Draws one multinomial table of `n` subjects.
pub fn sample_table(model: &MultinomialModel, n: u64, stream: SampleStream) -> Result<ContingencyTable> {
    sample_table_with(model, n, &mut stream.rng())
}

/// Sequential conditional binomials: cell `c` receives
/// `Binomial(remaining, p_c / Σ_{d≥c} p_d)`, the last cell takes the rest.
pub fn sample_table_with<R: Rng + ?Sized>(model: &MultinomialModel, n: u64, rng: &mut R) -> Result<ContingencyTable> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    let m = model.p.len();
    let mut tail = vec![0.0; m];
    let mut acc = CompensatedSum::new();
    for c in (0..m).rev() {
        acc.add(model.p[c]);
        tail[c] = acc.value();
    }
    let mut counts = vec![0u64; m];
    let mut remaining = n;
    for c in 0..m - 1 {
        if remaining == 0 {
            break;
        }
        if model.p[c] == 0.0 {
            continue;
        }
        let ratio = if tail[c] > 0.0 { (model.p[c] / tail[c]).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(remaining, ratio)
            .map_err(|e| Error::InvalidModel(format!("binomial({remaining}, {ratio}): {e}")))?
            .sample(rng);
        counts[c] = draw;
        remaining -= draw;
    }
    counts[m - 1] += remaining;
    ContingencyTable::new(model.k, counts)
}

fn binomial_u128(n: u128, r: u128) -> Option<u128> {
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Number of K×K tables with total `n`: weak compositions of `n` into K² parts.
pub fn table_count(k: usize, n: u64) -> Option<u128> {
    let cells = (k * k) as u128;
    binomial_u128(n as u128 + cells - 1, cells - 1)
}

/// Weak compositions of `total` into `parts` parts, in reverse lexicographic order.
#[derive(Debug, Clone)]
struct Compositions {
    current: Option<Vec<u64>>,
}

impl Compositions {
    fn new(total: u64, parts: usize) -> Self {
        let mut first = vec![0; parts];
        first[0] = total;
        Self { current: Some(first) }
    }
}

impl Iterator for Compositions {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let out = self.current.take()?;
        let m = out.len();
        if let Some(i) = (0..m - 1).rev().find(|&i| out[i] > 0) {
            let mut next = out.clone();
            let last = next[m - 1];
            next[m - 1] = 0;
            next[i] -= 1;
            next[i + 1] = last + 1;
            self.current = Some(next);
        }
        Some(out)
    }
}

fn check_enumerable(k: usize, n: u64, cap: u128) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 categories, got {k}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    match table_count(k, n) {
        Some(count) if count <= cap => Ok(()),
        Some(count) => Err(Error::EnumerationTooLarge { count, cap }),
        None => Err(Error::EnumerationTooLarge { count: u128::MAX, cap }),
    }
}

/// Every K×K table with `n` subjects, each exactly once.
pub fn tables_with_total(k: usize, n: u64, cap: u128) -> Result<impl Iterator<Item = ContingencyTable>> {
    check_enumerable(k, n, cap)?;
    Ok(Compositions::new(n, k * k).map(move |x| ContingencyTable::new(k, x).expect("composition sums to n")))
}

/// Every outcome of `n` multinomial draws from `model` with its exact probability.
pub fn enumerate_tables(
    model: &MultinomialModel,
    n: u64,
) -> Result<impl Iterator<Item = (ContingencyTable, f64)> + '_> {
    enumerate_tables_capped(model, n, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_tables_capped(
    model: &MultinomialModel,
    n: u64,
    cap: u128,
) -> Result<impl Iterator<Item = (ContingencyTable, f64)> + '_> {
    let tables = tables_with_total(model.k, n, cap)?;
    Ok(tables.map(move |table| {
        let prob = multinomial_probability(&model.p, table.counts());
        (table, prob)
    }))
}

fn multinomial_probability(p: &[f64], x: &[u64]) -> f64 {
    // n!/Πx! built incrementally; every intermediate value is an integer.
    let mut coefficient: u128 = 1;
    let mut seen: u128 = 0;
    let mut power = 1.0;
    for (&pc, &xc) in p.iter().zip(x) {
        for t in 1..=xc as u128 {
            seen += 1;
            coefficient = coefficient * seen / t;
        }
        power *= pc.powi(xc as i32);
    }
    coefficient as f64 * power
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn scenario_examples() {
        let m = build_scenario(2, 0.0, None).unwrap();
        assert_eq!(m.probabilities(), &[0.25, 0.25, 0.25, 0.25]);
        let m = build_scenario(2, 1.0, None).unwrap();
        assert_eq!(m.probabilities(), &[0.5, 0.0, 0.0, 0.5]);
        let m = build_scenario(2, 0.4, None).unwrap();
        for (a, b) in m.probabilities().iter().zip([0.35, 0.15, 0.15, 0.35]) {
            assert!(close(*a, b, 1e-15));
        }
        let s = population_summaries(&m).unwrap();
        assert!(close(s.kappa, 0.4, 1e-12));
    }

    #[test]
    fn scenario_hits_target_with_skewed_marginals() {
        let pi = [0.5, 0.3, 0.2];
        for kappa in [-0.2, 0.0, 0.4, 0.8, 1.0] {
            let m = build_scenario(3, kappa, Some(&pi)).unwrap();
            assert!(close(population_summaries(&m).unwrap().kappa, kappa, 1e-12));
            for (r, c) in m.row_marginals().iter().zip(m.col_marginals()) {
                assert!(close(*r, c, 1e-15));
            }
        }
    }

    #[test]
    fn scenario_rejections() {
        assert!(build_scenario(1, 0.4, None).is_err());
        assert!(build_scenario(2, 1.5, None).is_err());
        assert!(build_scenario(2, -1.0, None).is_err());
        // κ + (1-κ)π_i < 0 for π_i = 0.1, κ = -0.5
        assert!(matches!(
            build_scenario(2, -0.5, Some(&[0.9, 0.1])),
            Err(Error::InvalidScenario(_))
        ));
        assert!(build_scenario(2, 0.4, Some(&[0.5, 0.6])).is_err());
        assert!(build_scenario(2, 0.4, Some(&[1.0, 0.0])).is_err());
        assert!(Scenario::new(2, 1, 0.4).validate().is_err());
    }

    #[test]
    fn summaries_examples() {
        let s = population_summaries(&MultinomialModel::from_rows(&[[0.5, 0.0], [0.0, 0.5]]).unwrap()).unwrap();
        assert_eq!((s.observed, s.expected, s.kappa), (1.0, 0.5, 1.0));
        let s = population_summaries(&MultinomialModel::from_rows(&[[0.25, 0.25], [0.25, 0.25]]).unwrap()).unwrap();
        assert_eq!((s.observed, s.expected, s.kappa), (0.5, 0.5, 0.0));
        let s = population_summaries(&MultinomialModel::from_rows(&[[0.35, 0.15], [0.15, 0.35]]).unwrap()).unwrap();
        assert!(close(s.observed, 0.7, 1e-15));
        assert!(close(s.expected, 0.5, 1e-15));
        assert!(close(s.kappa, 0.4, 1e-14));
    }

    #[test]
    fn degenerate_population_has_no_kappa() {
        let m = MultinomialModel::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        assert!(matches!(population_summaries(&m), Err(Error::UndefinedCoefficient { .. })));
    }

    #[test]
    fn model_validation() {
        assert!(MultinomialModel::new(2, vec![0.5, 0.5, 0.1, -0.1]).is_err());
        assert!(MultinomialModel::new(2, vec![0.5, 0.5, 0.1, 0.0]).is_err());
        assert!(MultinomialModel::new(2, vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn single_subject_sample() {
        let m = build_scenario(3, 0.4, None).unwrap();
        for h in 0..50 {
            let t = sample_table(&m, 1, SampleStream::new(7, h)).unwrap();
            assert_eq!(t.counts().iter().filter(|&&x| x == 1).count(), 1);
            assert_eq!(t.n(), 1);
        }
        assert!(sample_table(&m, 0, SampleStream::new(7, 0)).is_err());
    }

    #[test]
    fn degenerate_model_sample() {
        let m = MultinomialModel::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        let t = sample_table(&m, 7, SampleStream::new(1, 2)).unwrap();
        assert_eq!(t.counts(), &[7, 0, 0, 0]);
        let m = MultinomialModel::from_rows(&[[0.0, 0.0], [0.0, 1.0]]).unwrap();
        let t = sample_table(&m, 7, SampleStream::new(1, 2)).unwrap();
        assert_eq!(t.counts(), &[0, 0, 0, 7]);
    }

    #[test]
    fn large_sample_frequencies() {
        let m = MultinomialModel::from_rows(&[[0.35, 0.15], [0.15, 0.35]]).unwrap();
        let t = sample_table(&m, 1_000_000, SampleStream::new(2024, 0)).unwrap();
        for (f, p) in t.proportions().iter().zip(m.probabilities()) {
            assert!((f - p).abs() < 0.005, "{f} vs {p}");
        }
    }

    #[test]
    fn streams_reproduce_and_differ() {
        let m = build_scenario(3, 0.4, None).unwrap();
        let a = sample_table(&m, 50, SampleStream::new(9, 3)).unwrap();
        let b = sample_table(&m, 50, SampleStream::new(9, 3)).unwrap();
        assert_eq!(a, b);
        let draws: std::collections::HashSet<_> =
            (0..20).map(|h| sample_table(&m, 50, SampleStream::new(9, h)).unwrap()).collect();
        assert!(draws.len() > 15);
        assert_ne!(SampleStream::new(9, 3).child(0), SampleStream::new(9, 4).child(0));
    }

    #[test]
    fn enumeration_examples() {
        let m = MultinomialModel::from_rows(&[[0.35, 0.15], [0.15, 0.35]]).unwrap();
        let one: Vec<_> = enumerate_tables(&m, 1).unwrap().collect();
        assert_eq!(one.len(), 4);
        for (t, prob) in &one {
            let c = t.counts().iter().position(|&x| x == 1).unwrap();
            assert!(close(*prob, m.probabilities()[c], 1e-15));
        }
        let two: Vec<_> = enumerate_tables(&m, 2).unwrap().collect();
        assert_eq!(two.len(), 10);
        assert!(close(numeric::sum(two.iter().map(|(_, p)| *p)), 1.0, 1e-12));
        let distinct: std::collections::HashSet<_> = two.iter().map(|(t, _)| t.clone()).collect();
        assert_eq!(distinct.len(), 10);
    }

    #[test]
    fn enumeration_mass_is_one() {
        for k in 2..=3 {
            let m = build_scenario(k, 0.3, None).unwrap();
            for n in 1..=4 {
                let tables: Vec<_> = enumerate_tables(&m, n).unwrap().collect();
                assert_eq!(tables.len() as u128, table_count(k, n).unwrap());
                let mass = numeric::sum(tables.iter().map(|(_, p)| *p));
                assert!(close(mass, 1.0, 1e-10), "K={k} n={n} mass={mass}");
            }
        }
    }

    #[test]
    fn enumeration_cap() {
        let m = build_scenario(5, 0.3, None).unwrap();
        assert!(matches!(
            enumerate_tables(&m, 30).map(|_| ()),
            Err(Error::EnumerationTooLarge { .. })
        ));
        assert!(enumerate_tables_capped(&m, 2, 10).is_err());
        assert!(enumerate_tables(&m, 0).is_err());
    }
}
