use std::path::Path;

use kappa_core::coefficients::{self, CoefficientEstimate, Family};
use kappa_core::model::SampleStream;
use kappa_core::simulation::{self, DegeneratePolicy};
use kappa_core::variance::{self, PluginFormula, ScottPiFunctional, UnbiasedKappaFunctional};
use kappa_core::{oracle, ContingencyTable, MultiRaterTable};
use serde_json::{Map, Value};

use crate::config;
use crate::error::CliError;
use crate::ingest::{self, Ingested, InputFormat, Ratings};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959964;

/// Largest bias the `oracle` command tolerates before failing.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
    Json,
}

/// Ordered key/value output of the single-record commands.
#[derive(Debug, Clone, Default)]
pub struct Record(Map<String, Value>);

impl Record {
    fn put(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.0.insert(key.to_string(), value.into());
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => serde_json::to_string_pretty(&Value::Object(self.0.clone())).unwrap_or_default() + "\n",
            OutputFormat::Csv => {
                let plain = |v: &Value| match v {
                    Value::String(s) => s.clone(),
                    Value::Null => "NA".to_string(),
                    other => other.to_string(),
                };
                let mut writer = csv::Writer::from_writer(Vec::new());
                let _ = writer.write_record(self.0.keys());
                let _ = writer.write_record(self.0.values().map(plain));
                String::from_utf8(writer.into_inner().unwrap_or_default()).unwrap_or_default()
            }
            OutputFormat::Table => {
                let width = self.0.keys().map(String::len).max().unwrap_or(0);
                let mut out = String::new();
                for (key, value) in &self.0 {
                    let shown = match value {
                        Value::Number(x) if x.is_f64() => fixed6(x.as_f64().unwrap_or(f64::NAN)),
                        Value::String(s) => s.clone(),
                        Value::Null => "NA".to_string(),
                        other => other.to_string(),
                    };
                    out.push_str(&format!("{key:<width$}  {shown}\n"));
                }
                out
            }
        }
    }
}

/// Six decimals, switching to scientific notation for small nonzero values.
fn fixed6(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:.6e}")
    } else {
        format!("{x:.6}")
    }
}

fn real(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn optional(x: Option<f64>) -> Value {
    x.map_or(Value::Null, real)
}

fn labels(ingested: &Ingested) -> Option<String> {
    ingested.categories.as_ref().map(|c| {
        c.iter().enumerate().map(|(i, label)| format!("{i}={label}")).collect::<Vec<_>>().join(";")
    })
}

fn pairwise(ingested: &Ingested, family: Family) -> Result<&ContingencyTable, CliError> {
    match &ingested.ratings {
        Ratings::Pairwise(t) => Ok(t),
        Ratings::MultiRater(mr) => Err(CliError::Usage(format!(
            "{family} needs two-rater data; the input has {} raters per subject (use --family fleiss)",
            mr.raters()
        ))),
    }
}

fn multi_rater(ingested: &Ingested) -> MultiRaterTable {
    match &ingested.ratings {
        Ratings::Pairwise(t) => MultiRaterTable::from_contingency(t),
        Ratings::MultiRater(mr) => mr.clone(),
    }
}

fn estimate_for(ingested: &Ingested, family: Family) -> Result<CoefficientEstimate, CliError> {
    Ok(match family {
        Family::Cohen => coefficients::cohen_kappa(pairwise(ingested, family)?)?,
        Family::Scott => coefficients::scott_pi(pairwise(ingested, family)?)?,
        Family::Krippendorff => coefficients::krippendorff_alpha(pairwise(ingested, family)?)?,
        Family::Fleiss => coefficients::fleiss_kappa(&multi_rater(ingested))?,
        other => {
            return Err(CliError::Usage(format!(
                "{other} has no estimator from raw data; choose cohen, scott, krippendorff or fleiss"
            )))
        }
    })
}

fn shape(ingested: &Ingested) -> (u64, u32, usize) {
    match &ingested.ratings {
        Ratings::Pairwise(t) => (t.n(), 2, t.k()),
        Ratings::MultiRater(mr) => (mr.subjects() as u64, mr.raters(), mr.k()),
    }
}

fn estimate_record(ingested: &Ingested, family: Family) -> Result<(Record, CoefficientEstimate), CliError> {
    let est = estimate_for(ingested, family)?;
    let (n, raters, k) = shape(ingested);
    let mut record = Record::default();
    record
        .put("family", family.name())
        .put("n", n)
        .put("raters", raters)
        .put("K", k)
        .put("kappa", real(est.value))
        .put("kappa_unbiased", optional(est.value_unbiased))
        .put("observed_index", real(est.observed))
        .put("expected_index", real(est.expected))
        .put("expected_index_unbiased", optional(est.expected_unbiased));
    if let Some(l) = labels(ingested) {
        record.put("categories", l);
    }
    Ok((record, est))
}

pub fn estimate(ingested: &Ingested, family: Family) -> Result<Record, CliError> {
    estimate_record(ingested, family).map(|(r, _)| r)
}

/// Plug-in variances of `κ̂_XU`: the delta-engine stand-in `V̂` and `V̂_A`,
/// plus a Wald interval from `V̂_A`.
///
/// Cohen uses the closed form with `Î_eU` and `κ̂_CU` substituted. Scott and
/// Krippendorff take the base variance from the delta engine at `p̂` and the
/// factor at `κ̂_SU`. Fleiss takes both variances from a subject bootstrap.
pub fn variance(ingested: &Ingested, family: Family, seed: u64, resamples: usize) -> Result<Record, CliError> {
    let (mut record, est) = estimate_record(ingested, family)?;
    let (n, raters, k) = shape(ingested);
    let kappa_u = est
        .value_unbiased
        .ok_or_else(|| CliError::Usage("the unbiased coefficient is undefined for this data".into()))?;

    let (v_hat, va_hat, method) = match family {
        Family::Cohen => {
            let t = pairwise(ingested, family)?;
            let v = variance::plugin_variance(PluginFormula::DeltaNumeric, t)?.value;
            let va = variance::plugin_variance(PluginFormula::VaTransform, t)?.value;
            (v, va, "plugin")
        }
        Family::Scott | Family::Krippendorff => {
            let t = pairwise(ingested, family)?;
            let p = t.proportions();
            let stand_in = UnbiasedKappaFunctional::new(family, k, n)?;
            let v = variance::delta_variance_numeric(&stand_in, &p, n)?.value;
            let base = variance::delta_variance_numeric(&ScottPiFunctional { k }, &p, n)?.value;
            let scott_u = coefficients::scott_pi(t)?
                .value_unbiased
                .ok_or_else(|| CliError::Usage("unbiased Scott's pi is undefined for this data".into()))?;
            let va = variance::va_transform(family, base, scott_u, n, 2)?.value;
            (v, va, "plugin")
        }
        Family::Fleiss => {
            let mr = multi_rater(ingested);
            let stream = SampleStream::new(seed, 0);
            let base = variance::bootstrap_variance(
                |d: &MultiRaterTable| Ok(coefficients::fleiss_kappa(d)?.value),
                &mr,
                resamples,
                stream,
            )?;
            let direct = variance::bootstrap_variance(
                |d: &MultiRaterTable| {
                    coefficients::fleiss_kappa(d)?
                        .value_unbiased
                        .ok_or(kappa_core::Error::DegenerateSample("unbiased kappa undefined".into()))
                },
                &mr,
                resamples,
                stream,
            )?;
            let va = variance::va_transform(Family::Fleiss, base.estimate.value, kappa_u, n, raters)?.value;
            record.put("bootstrap_resamples", resamples).put("bootstrap_degenerate", base.degenerate);
            (direct.estimate.value, va, "bootstrap")
        }
        _ => unreachable!("estimate_for rejects families without a data estimator"),
    };

    let half_width = Z_95 * va_hat.sqrt();
    let (lower, upper) = (kappa_u - half_width, kappa_u + half_width);
    let clamped = lower < -1.0 || upper > 1.0;
    record
        .put("variance_method", method)
        .put("v_hat_stand_in", real(v_hat))
        .put("va_hat", real(va_hat))
        .put("se_va", real(va_hat.sqrt()))
        .put("wald95_lower", real(lower.max(-1.0)))
        .put("wald95_upper", real(upper.min(1.0)))
        .put("wald95_clamped", clamped);
    Ok(record)
}

pub fn crossover(family: Family, n: u64, raters: u32) -> Result<Record, CliError> {
    let value = coefficients::crossover_kappa(family, n, raters)?;
    let mut record = Record::default();
    record.put("family", family.name()).put("n", n);
    if family == Family::Fleiss {
        record.put("raters", raters);
    }
    record.put("crossover_kappa", real(value));
    Ok(record)
}

pub fn oracle(ks: &[usize], ns: &[u64], models: usize, seed: u64) -> Result<Record, CliError> {
    let report = oracle::unbiasedness_suite(ks, ns, models, seed)?;
    let mut record = Record::default();
    record
        .put("models", report.cases)
        .put("max_abs_bias_cohen", real(report.max_abs_bias_cohen))
        .put("max_abs_bias_scott", real(report.max_abs_bias_scott))
        .put("max_abs_bias", real(report.max_abs_bias()))
        .put("tolerance", real(ORACLE_TOLERANCE));
    if report.max_abs_bias() > ORACLE_TOLERANCE {
        return Err(CliError::Check(format!(
            "max |E[I_eU] - I_e| = {:e} exceeds {ORACLE_TOLERANCE:e}",
            report.max_abs_bias()
        )));
    }
    Ok(record)
}

#[derive(Debug, Clone, Default)]
pub struct SimulateOverrides {
    pub seed: Option<u64>,
    pub policy: Option<DegeneratePolicy>,
    pub replicates: Option<usize>,
}

pub fn simulate(config_path: &Path, overrides: &SimulateOverrides, format: OutputFormat) -> Result<String, CliError> {
    let mut configs = config::parse_config(config_path)?;
    for c in &mut configs {
        if let Some(seed) = overrides.seed {
            c.seed = seed;
        }
        if let Some(policy) = overrides.policy {
            c.policy = policy;
        }
        if let Some(replicates) = overrides.replicates {
            c.replicates = replicates;
        }
    }
    let report = simulation::run_grid(&configs)?;
    Ok(match format {
        OutputFormat::Table => simulation::to_table(&report),
        OutputFormat::Csv => simulation::to_csv(&report)?,
        OutputFormat::Json => simulation::to_json(&report)? + "\n",
    })
}

pub fn load(path: &Path, format: InputFormat) -> Result<Ingested, CliError> {
    ingest::ingest_ratings(path, format)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_matrix;
    use serde_json::json;

    fn number(record: &Record, key: &str) -> f64 {
        record.get(key).and_then(Value::as_f64).unwrap()
    }

    #[test]
    fn estimate_example() {
        let r = estimate(&parse_matrix("4,1\n2,3").unwrap(), Family::Cohen).unwrap();
        assert!((number(&r, "kappa") - 0.4).abs() < 1e-12);
        assert!((number(&r, "kappa_unbiased") - 0.425_532).abs() < 1e-6);
        let table = r.render(OutputFormat::Table);
        assert!(table.contains("0.425532"), "{table}");
        let csv = r.render(OutputFormat::Csv);
        assert!(csv.starts_with("family,n,raters,K,kappa,"));
    }

    #[test]
    fn variance_cohen_and_interval() {
        let data = parse_matrix("40,10\n12,38").unwrap();
        let r = variance(&data, Family::Cohen, 1, 2000).unwrap();
        let va = number(&r, "va_hat");
        let ku = number(&r, "kappa_unbiased");
        assert!((number(&r, "wald95_upper") - (ku + Z_95 * va.sqrt())).abs() < 1e-12);
        assert_eq!(r.get("wald95_clamped"), Some(&json!(false)));
    }

    #[test]
    fn interval_clamps() {
        let data = parse_matrix("5,0\n1,4").unwrap();
        let r = variance(&data, Family::Cohen, 1, 2000).unwrap();
        assert_eq!(r.get("wald95_clamped"), Some(&json!(true)));
        assert_eq!(number(&r, "wald95_upper"), 1.0);
    }

    #[test]
    fn variance_other_families() {
        let data = parse_matrix("20,5,2\n4,15,3\n1,2,18").unwrap();
        for family in [Family::Scott, Family::Krippendorff, Family::Fleiss] {
            let r = variance(&data, family, 3, 500).unwrap();
            assert!(number(&r, "va_hat") > 0.0, "{family}");
            assert!(number(&r, "v_hat_stand_in") > 0.0, "{family}");
        }
        assert!(variance(&data, Family::Hubert, 3, 500).is_err());
    }

    #[test]
    fn crossover_example() {
        let r = crossover(Family::Cohen, 10, 2).unwrap();
        assert!(r.render(OutputFormat::Table).contains("0.486833"));
    }

    #[test]
    fn oracle_small_grid() {
        let r = oracle(&[2], &[3], 20, 1).unwrap();
        assert!(number(&r, "max_abs_bias") <= ORACLE_TOLERANCE);
    }
}
