//! Monte Carlo assessment of the variance estimators of the unbiased Cohen kappa.
//!
//! For each scenario the exact asymptotic variances are computed from the
//! population, `N` tables are drawn, and the empirical variance of the `N`
//! estimates is compared against the exact values and against the averages of
//! the per-sample plug-in variances.

mod report;

pub use report::{read_csv, to_csv, to_json, to_table, NOT_APPLICABLE};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{cohen_kappa, Family};
use crate::error::{Error, Result};
use crate::model::{self, SampleStream, Scenario};
use crate::numeric;
use crate::table::ContingencyTable;
use crate::variance::{self, PluginFormula, UnbiasedKappaFunctional};

/// Draws allowed per replicate under [`DegeneratePolicy::Redraw`].
const MAX_REDRAWS: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegeneratePolicy {
    /// Draw again from the replicate's stream until the sample is usable.
    #[default]
    Redraw,
    /// Skip the replicate.
    Drop,
}

impl std::str::FromStr for DegeneratePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "redraw" => Ok(Self::Redraw),
            "drop" => Ok(Self::Drop),
            other => Err(Error::InvalidArgument(format!("unknown degenerate policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub replicates: usize,
    pub seed: u64,
    pub policy: DegeneratePolicy,
}

impl SimConfig {
    pub const DEFAULT_REPLICATES: usize = 10_000;

    pub fn new(scenario: Scenario, seed: u64) -> Self {
        Self {
            scenario,
            replicates: Self::DEFAULT_REPLICATES,
            seed,
            policy: DegeneratePolicy::default(),
        }
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn with_policy(mut self, policy: DegeneratePolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 replicates, got {}",
                self.replicates
            )));
        }
        self.scenario.validate()
    }
}

/// One row of the variance table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationCell {
    #[serde(rename = "K")]
    pub k: usize,
    pub n: u64,
    pub kappa_target: f64,
    /// Empirical variance (denominator `N − 1`) of the `κ̂_CU` values.
    #[serde(rename = "V_E_hat")]
    pub v_e_hat: f64,
    /// Delta-engine variance of the `κ_CU` functional at the population; a
    /// stand-in for the univariate-delta `V(κ̂_CU)`.
    #[serde(rename = "V_exact")]
    pub v_exact: f64,
    /// `V_A(κ̂_CU)` at the population.
    #[serde(rename = "VA_exact")]
    pub va_exact: f64,
    /// Mean of the per-sample stand-in plug-in variances.
    #[serde(rename = "V_bar")]
    pub v_bar: f64,
    /// Mean of the per-sample plug-in `V̂_A`.
    #[serde(rename = "VA_bar")]
    pub va_bar: f64,
    pub replicates: usize,
    /// Replicates that entered the averages.
    pub used: usize,
    /// Redrawn samples under `redraw`, dropped replicates under `drop`.
    pub degenerate_count: usize,
    #[serde(rename = "rel_V")]
    pub rel_v: Option<f64>,
    #[serde(rename = "rel_VA")]
    pub rel_va: Option<f64>,
    #[serde(rename = "rel_Vbar")]
    pub rel_vbar: Option<f64>,
    #[serde(rename = "rel_VAbar")]
    pub rel_vabar: Option<f64>,
}

/// Across-grid means of the relative differences, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeBiasSummary {
    #[serde(rename = "rel_V")]
    pub rel_v: f64,
    #[serde(rename = "rel_VA")]
    pub rel_va: f64,
    #[serde(rename = "rel_Vbar")]
    pub rel_vbar: f64,
    #[serde(rename = "rel_VAbar")]
    pub rel_vabar: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub cells: Vec<SimulationCell>,
    /// `None` when no cell has a positive empirical variance.
    pub summary: Option<RelativeBiasSummary>,
    /// Provenance of the `V_exact` and `V_bar` columns.
    pub v_exact_method: String,
}

pub const V_EXACT_LABEL: &str = "delta_stand_in";

/// Sample variance with denominator `N − 1`.
pub fn empirical_variance(values: &[f64]) -> Result<f64> {
    numeric::sample_variance(values).ok_or_else(|| {
        Error::InvalidArgument(format!("empirical variance needs at least 2 values, got {}", values.len()))
    })
}

#[derive(Debug, Clone, Copy)]
struct Replicate {
    kappa_u: f64,
    v_plugin: f64,
    va_plugin: f64,
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    replicate: Option<Replicate>,
    degenerate: u32,
}

fn evaluate_sample(table: &ContingencyTable) -> Result<Replicate> {
    let kappa_u = cohen_kappa(table)
        .ok()
        .and_then(|e| e.value_unbiased)
        .ok_or_else(|| Error::DegenerateSample(format!("kappa_CU undefined on {table}")))?;
    Ok(Replicate {
        kappa_u,
        v_plugin: variance::plugin_variance(PluginFormula::DeltaNumeric, table)?.value,
        va_plugin: variance::plugin_variance(PluginFormula::VaTransform, table)?.value,
    })
}

fn run_replicate(model: &model::MultinomialModel, config: &SimConfig, h: u64) -> Result<Outcome> {
    let mut rng = SampleStream::new(config.seed, h).rng();
    let mut degenerate = 0;
    loop {
        let table = model::sample_table_with(model, config.scenario.n, &mut rng)?;
        match evaluate_sample(&table) {
            Ok(r) => return Ok(Outcome { replicate: Some(r), degenerate }),
            Err(Error::DegenerateSample(_)) => {
                degenerate += 1;
                match config.policy {
                    DegeneratePolicy::Drop => return Ok(Outcome { replicate: None, degenerate }),
                    DegeneratePolicy::Redraw if degenerate >= MAX_REDRAWS => {
                        return Err(Error::DegenerateSample(format!(
                            "replicate {h} stayed degenerate after {degenerate} draws"
                        )))
                    }
                    DegeneratePolicy::Redraw => {}
                }
            }
            Err(e) => return Err(e),
        }
    }
}

fn relative(column: f64, reference: f64) -> Option<f64> {
    (reference > 0.0).then(|| column / reference - 1.0)
}

/// Runs one scenario. Replicate `h` draws from stream `(seed, h)` and the
/// reduction is sequential in `h`, so the cell is bit-identical for any
/// thread count.
pub fn run_cell(config: &SimConfig) -> Result<SimulationCell> {
    config.validate()?;
    let scenario = &config.scenario;
    let n = scenario.n;
    let model = scenario.model()?;
    let population = model::population_summaries(&model)?;

    let base = variance::fleiss_cohen_everitt_variance(&model, n)?;
    let va_exact = variance::va_transform(Family::Cohen, base.value, population.kappa, n, 2)?.value;
    let functional = UnbiasedKappaFunctional::new(Family::Cohen, model.k(), n)?;
    let v_exact = variance::delta_variance_numeric(&functional, model.probabilities(), n)?.value;

    let outcomes: Vec<Outcome> = (0..config.replicates as u64)
        .into_par_iter()
        .map(|h| run_replicate(&model, config, h))
        .collect::<Result<_>>()?;

    let degenerate_count: usize = outcomes.iter().map(|o| o.degenerate as usize).sum();
    let kept: Vec<Replicate> = outcomes.iter().filter_map(|o| o.replicate).collect();
    if kept.len() < 2 {
        return Err(Error::DegenerateSample(format!(
            "only {} of {} replicates were usable",
            kept.len(),
            config.replicates
        )));
    }
    let used = kept.len();
    let kappas: Vec<f64> = kept.iter().map(|r| r.kappa_u).collect();
    let v_e_hat = empirical_variance(&kappas)?;
    let v_bar = numeric::sum(kept.iter().map(|r| r.v_plugin)) / used as f64;
    let va_bar = numeric::sum(kept.iter().map(|r| r.va_plugin)) / used as f64;

    Ok(SimulationCell {
        k: scenario.k,
        n,
        kappa_target: scenario.kappa_target,
        v_e_hat,
        v_exact,
        va_exact,
        v_bar,
        va_bar,
        replicates: config.replicates,
        used,
        degenerate_count,
        rel_v: relative(v_exact, v_e_hat),
        rel_va: relative(va_exact, v_e_hat),
        rel_vbar: relative(v_bar, v_e_hat),
        rel_vabar: relative(va_bar, v_e_hat),
    })
}

/// Runs every configuration in order and summarises the cells whose
/// empirical variance is positive.
pub fn run_grid(configs: &[SimConfig]) -> Result<SimulationReport> {
    if configs.is_empty() {
        return Err(Error::InvalidArgument("no simulation cells to run".into()));
    }
    let cells = configs
        .iter()
        .map(|c| {
            run_cell(c).map_err(|e| Error::Cell {
                k: c.scenario.k,
                n: c.scenario.n,
                kappa: c.scenario.kappa_target,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let informative: Vec<SimulationCell> = cells.iter().filter(|c| c.v_e_hat > 0.0).cloned().collect();
    let summary = if informative.is_empty() { None } else { Some(relative_bias_summary(&informative)?) };
    Ok(SimulationReport { cells, summary, v_exact_method: V_EXACT_LABEL.to_string() })
}

/// Arithmetic means of the four relative differences, in percent.
pub fn relative_bias_summary(cells: &[SimulationCell]) -> Result<RelativeBiasSummary> {
    if cells.is_empty() {
        return Err(Error::InvalidArgument("no cells to summarise".into()));
    }
    let mut columns = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for cell in cells {
        let values = [cell.rel_v, cell.rel_va, cell.rel_vbar, cell.rel_vabar];
        if cell.v_e_hat <= 0.0 || values.iter().any(Option::is_none) {
            return Err(Error::InvalidArgument(format!(
                "cell K={}, n={}, kappa={} has zero empirical variance",
                cell.k, cell.n, cell.kappa_target
            )));
        }
        for (column, value) in columns.iter_mut().zip(values) {
            column.push(value.unwrap_or_default());
        }
    }
    let mean_percent = |v: &[f64]| 100.0 * numeric::sum(v.iter().copied()) / v.len() as f64;
    Ok(RelativeBiasSummary {
        rel_v: mean_percent(&columns[0]),
        rel_va: mean_percent(&columns[1]),
        rel_vbar: mean_percent(&columns[2]),
        rel_vabar: mean_percent(&columns[3]),
        cells: cells.len(),
    })
}

/// The 24-scenario grid: K ∈ {2, 3, 5}, n ∈ {10, 20, 50, 100}, κ ∈ {0.4, 0.8},
/// K outermost and κ innermost.
pub fn reference_grid(seed: u64, replicates: usize) -> Vec<SimConfig> {
    let mut configs = Vec::with_capacity(24);
    for k in [2, 3, 5] {
        for n in [10, 20, 50, 100] {
            for kappa in [0.4, 0.8] {
                configs.push(SimConfig::new(Scenario::new(k, n, kappa), seed).with_replicates(replicates));
            }
        }
    }
    configs
}
