//! Simulation config files (TOML).
//!
//! ```toml
//! replicates = 10000
//! seed = 20240517
//! degenerate_policy = "redraw"   # or "drop"
//!
//! [grid]
//! K = [2, 3, 5]
//! n = [10, 20, 50, 100]
//! kappa = [0.4, 0.8]
//! ```
//!
//! A single scenario may instead give scalar top-level `K`, `n` and `kappa`.
//! `marginals` (a list of K probabilities) is allowed when only one K is used.

use std::fs;
use std::path::Path;

use kappa_core::simulation::{DegeneratePolicy, SimConfig};
use kappa_core::Scenario;
use toml::{Table, Value};

use crate::error::CliError;

const TOP_LEVEL_KEYS: [&str; 8] = ["grid", "K", "n", "kappa", "marginals", "replicates", "seed", "degenerate_policy"];
const GRID_KEYS: [&str; 3] = ["K", "n", "kappa"];

pub const DEFAULT_SEED: u64 = 20_240_517;

fn config_error(key: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Config { key: key.into(), message: message.into() }
}

pub fn parse_config(path: &Path) -> Result<Vec<SimConfig>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

fn integer(key: &str, value: &Value, min: i64) -> Result<i64, CliError> {
    match value {
        Value::Integer(i) if *i >= min => Ok(*i),
        Value::Integer(i) => Err(config_error(key, format!("{i} is below the minimum {min}"))),
        other => Err(config_error(key, format!("expected an integer, got {}", other.type_str()))),
    }
}

fn real(key: &str, value: &Value) -> Result<f64, CliError> {
    match value {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(config_error(key, format!("expected a number, got {}", other.type_str()))),
    }
}

fn list<'a>(key: &str, value: &'a Value) -> Result<&'a [Value], CliError> {
    match value {
        Value::Array(items) if !items.is_empty() => Ok(items),
        Value::Array(_) => Err(config_error(key, "list is empty")),
        other => Err(config_error(key, format!("expected a list, got {}", other.type_str()))),
    }
}

fn check_keys(table: &Table, allowed: &[&str], prefix: &str) -> Result<(), CliError> {
    match table.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(unknown) => Err(config_error(format!("{prefix}{unknown}"), "unknown key")),
        None => Ok(()),
    }
}

fn kappa_value(key: &str, value: &Value) -> Result<f64, CliError> {
    let kappa = real(key, value)?;
    if kappa > -1.0 && kappa <= 1.0 {
        Ok(kappa)
    } else {
        Err(config_error(key, format!("{kappa} is outside (-1, 1]")))
    }
}

/// One [`SimConfig`] per grid cell, K outermost, then n, then kappa.
pub fn parse_config_str(text: &str) -> Result<Vec<SimConfig>, CliError> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| config_error("<file>", e.message().to_string()))?;
    check_keys(&table, &TOP_LEVEL_KEYS, "")?;

    let (ks, ns, kappas) = match table.get("grid") {
        Some(Value::Table(grid)) => {
            if let Some(key) = GRID_KEYS.iter().find(|k| table.contains_key(**k)) {
                return Err(config_error(*key, "give scenario keys either at top level or under [grid], not both"));
            }
            check_keys(grid, &GRID_KEYS, "grid.")?;
            let get = |k: &str| grid.get(k).ok_or_else(|| config_error(format!("grid.{k}"), "missing"));
            let ks = list("grid.K", get("K")?)?
                .iter()
                .enumerate()
                .map(|(i, v)| integer(&format!("grid.K[{i}]"), v, 2).map(|k| k as usize))
                .collect::<Result<Vec<_>, _>>()?;
            let ns = list("grid.n", get("n")?)?
                .iter()
                .enumerate()
                .map(|(i, v)| integer(&format!("grid.n[{i}]"), v, 2).map(|n| n as u64))
                .collect::<Result<Vec<_>, _>>()?;
            let kappas = list("grid.kappa", get("kappa")?)?
                .iter()
                .enumerate()
                .map(|(i, v)| kappa_value(&format!("grid.kappa[{i}]"), v))
                .collect::<Result<Vec<_>, _>>()?;
            (ks, ns, kappas)
        }
        Some(other) => return Err(config_error("grid", format!("expected a table, got {}", other.type_str()))),
        None => {
            let get = |k: &str| table.get(k).ok_or_else(|| config_error(k, "missing (or give a [grid] table)"));
            (
                vec![integer("K", get("K")?, 2)? as usize],
                vec![integer("n", get("n")?, 2)? as u64],
                vec![kappa_value("kappa", get("kappa")?)?],
            )
        }
    };

    let replicates = match table.get("replicates") {
        Some(v) => integer("replicates", v, 2)? as usize,
        None => SimConfig::DEFAULT_REPLICATES,
    };
    let seed = match table.get("seed") {
        Some(v) => integer("seed", v, 0)? as u64,
        None => DEFAULT_SEED,
    };
    let policy = match table.get("degenerate_policy") {
        Some(Value::String(s)) => s.parse::<DegeneratePolicy>().map_err(|e| config_error("degenerate_policy", e.to_string()))?,
        Some(other) => return Err(config_error("degenerate_policy", format!("expected a string, got {}", other.type_str()))),
        None => DegeneratePolicy::default(),
    };
    let marginals = match table.get("marginals") {
        Some(v) => {
            if ks.len() != 1 {
                return Err(config_error("marginals", "only allowed when a single K is configured"));
            }
            let values = list("marginals", v)?
                .iter()
                .enumerate()
                .map(|(i, v)| real(&format!("marginals[{i}]"), v))
                .collect::<Result<Vec<_>, _>>()?;
            if values.len() != ks[0] {
                return Err(config_error("marginals", format!("{} values given for K={}", values.len(), ks[0])));
            }
            Some(values)
        }
        None => None,
    };

    let mut configs = Vec::with_capacity(ks.len() * ns.len() * kappas.len());
    for &k in &ks {
        for &n in &ns {
            for &kappa in &kappas {
                let mut scenario = Scenario::new(k, n, kappa);
                if let Some(m) = &marginals {
                    scenario = scenario.with_marginals(m.clone());
                }
                let config = SimConfig::new(scenario, seed).with_replicates(replicates).with_policy(policy);
                config
                    .validate()
                    .map_err(|e| config_error(format!("scenario K={k}, n={n}, kappa={kappa}"), e.to_string()))?;
                configs.push(config);
            }
        }
    }
    Ok(configs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(err: CliError) -> String {
        match err {
            CliError::Config { key, .. } => key,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_cell_grid() {
        let configs = parse_config_str("[grid]\nK = [2]\nn = [10]\nkappa = [0.4]\n").unwrap();
        assert_eq!(configs.len(), 1);
        assert_eq!(configs[0].scenario, Scenario::new(2, 10, 0.4));
        assert_eq!(configs[0].replicates, 10_000);
        assert_eq!(configs[0].seed, DEFAULT_SEED);
    }

    #[test]
    fn reference_grid_order() {
        let text = "replicates = 500\nseed = 7\n[grid]\nK = [2, 3, 5]\nn = [10, 20, 50, 100]\nkappa = [0.4, 0.8]\n";
        let configs = parse_config_str(text).unwrap();
        assert_eq!(configs.len(), 24);
        let expected = kappa_core::simulation::reference_grid(7, 500);
        assert_eq!(configs, expected);
    }

    #[test]
    fn scalar_scenario_with_marginals() {
        let text = "K = 3\nn = 20\nkappa = 0.5\nmarginals = [0.5, 0.3, 0.2]\ndegenerate_policy = \"drop\"\n";
        let configs = parse_config_str(text).unwrap();
        assert_eq!(configs.len(), 1);
        assert_eq!(configs[0].scenario.marginals.as_deref(), Some(&[0.5, 0.3, 0.2][..]));
        assert_eq!(configs[0].policy, DegeneratePolicy::Drop);
    }

    #[test]
    fn validation_errors_name_the_key() {
        assert_eq!(key_of(parse_config_str("[grid]\nK = [2]\nn = [10]\nkappa = [1.5]\n").unwrap_err()), "grid.kappa[0]");
        assert_eq!(key_of(parse_config_str("[grid]\nK = [2]\nn = [10]\nkappa = [0.4]\nfoo = 1\n").unwrap_err()), "grid.foo");
        assert_eq!(key_of(parse_config_str("bar = 1\n[grid]\nK = [2]\nn = [10]\nkappa = [0.4]\n").unwrap_err()), "bar");
        assert_eq!(key_of(parse_config_str("[grid]\nK = [1]\nn = [10]\nkappa = [0.4]\n").unwrap_err()), "grid.K[0]");
        assert_eq!(key_of(parse_config_str("[grid]\nK = [2]\nkappa = [0.4]\n").unwrap_err()), "grid.n");
        assert_eq!(key_of(parse_config_str("[grid]\nK = [2]\nn = []\nkappa = [0.4]\n").unwrap_err()), "grid.n");
        assert_eq!(
            key_of(parse_config_str("replicates = 1\n[grid]\nK = [2]\nn = [10]\nkappa = [0.4]\n").unwrap_err()),
            "replicates"
        );
        assert_eq!(
            key_of(parse_config_str("marginals = [0.5, 0.5]\n[grid]\nK = [2, 3]\nn = [10]\nkappa = [0.4]\n").unwrap_err()),
            "marginals"
        );
        assert_eq!(
            key_of(parse_config_str("degenerate_policy = \"skip\"\nK = 2\nn = 10\nkappa = 0.4\n").unwrap_err()),
            "degenerate_policy"
        );
        // Negative cell for skewed marginals.
        let err = parse_config_str("K = 2\nn = 10\nkappa = -0.5\nmarginals = [0.9, 0.1]\n").unwrap_err();
        assert!(key_of(err).starts_with("scenario"));
        assert_eq!(key_of(parse_config_str("K = [2\n").unwrap_err()), "<file>");
    }
}
