use std::fmt::Write as _;

use super::{SimulationCell, SimulationReport};
use crate::error::{Error, Result};

/// Marker written in place of an undefined relative difference.
pub const NOT_APPLICABLE: &str = "NA";

const HEADER: [&str; 15] = [
    "K",
    "n",
    "kappa_target",
    "V_E_hat",
    "V_exact",
    "VA_exact",
    "V_bar",
    "VA_bar",
    "replicates",
    "used",
    "degenerate_count",
    "rel_V",
    "rel_VA",
    "rel_Vbar",
    "rel_VAbar",
];

fn optional(value: Option<f64>) -> String {
    value.map_or_else(|| NOT_APPLICABLE.to_string(), |v| v.to_string())
}

/// Cells as CSV. Floats use the shortest representation that parses back to
/// the same value.
pub fn to_csv(report: &SimulationReport) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Report(e.to_string());
    writer.write_record(HEADER).map_err(io)?;
    for c in &report.cells {
        writer
            .write_record([
                c.k.to_string(),
                c.n.to_string(),
                c.kappa_target.to_string(),
                c.v_e_hat.to_string(),
                c.v_exact.to_string(),
                c.va_exact.to_string(),
                c.v_bar.to_string(),
                c.va_bar.to_string(),
                c.replicates.to_string(),
                c.used.to_string(),
                c.degenerate_count.to_string(),
                optional(c.rel_v),
                optional(c.rel_va),
                optional(c.rel_vbar),
                optional(c.rel_vabar),
            ])
            .map_err(io)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Report(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Report(e.to_string()))
}

/// Parses the output of [`to_csv`].
pub fn read_csv(text: &str) -> Result<Vec<SimulationCell>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Report(e.to_string()))?;
    if headers.iter().ne(HEADER) {
        return Err(Error::Report(format!("unexpected header {headers:?}")));
    }
    let mut cells = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Report(e.to_string()))?;
        let line = row + 2;
        let field = |i: usize| record.get(i).unwrap_or_default();
        let float = |i: usize| -> Result<f64> {
            field(i)
                .parse()
                .map_err(|_| Error::Report(format!("line {line}: {} = `{}` is not a number", HEADER[i], field(i))))
        };
        let int = |i: usize| -> Result<u64> {
            field(i)
                .parse()
                .map_err(|_| Error::Report(format!("line {line}: {} = `{}` is not an integer", HEADER[i], field(i))))
        };
        let maybe = |i: usize| -> Result<Option<f64>> {
            if field(i) == NOT_APPLICABLE {
                Ok(None)
            } else {
                float(i).map(Some)
            }
        };
        cells.push(SimulationCell {
            k: int(0)? as usize,
            n: int(1)?,
            kappa_target: float(2)?,
            v_e_hat: float(3)?,
            v_exact: float(4)?,
            va_exact: float(5)?,
            v_bar: float(6)?,
            va_bar: float(7)?,
            replicates: int(8)? as usize,
            used: int(9)? as usize,
            degenerate_count: int(10)? as usize,
            rel_v: maybe(11)?,
            rel_va: maybe(12)?,
            rel_vbar: maybe(13)?,
            rel_vabar: maybe(14)?,
        });
    }
    Ok(cells)
}

pub fn to_json(report: &SimulationReport) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(|e| Error::Report(e.to_string()))
}

fn percent(value: Option<f64>) -> String {
    value.map_or_else(|| NOT_APPLICABLE.to_string(), |v| format!("{:+.1}%", 100.0 * v))
}

/// Aligned text in the column order K, n, κ, V̂_E, V, V_A, mean V̂, mean V̂_A,
/// rounded to four decimals.
pub fn to_table(report: &SimulationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>3} {:>5} {:>6} {:>9} {:>11} {:>9} {:>9} {:>9} {:>6} {:>8} {:>8} {:>8} {:>8}",
        "K", "n", "kappa", "V_E_hat", "V(stand-in)", "V_A", "mean V", "mean V_A", "degen", "rel V", "rel V_A",
        "rel mV", "rel mV_A"
    );
    for c in &report.cells {
        let _ = writeln!(
            out,
            "{:>3} {:>5} {:>6} {:>9.4} {:>11.4} {:>9.4} {:>9.4} {:>9.4} {:>6} {:>8} {:>8} {:>8} {:>8}",
            c.k,
            c.n,
            c.kappa_target,
            c.v_e_hat,
            c.v_exact,
            c.va_exact,
            c.v_bar,
            c.va_bar,
            c.degenerate_count,
            percent(c.rel_v),
            percent(c.rel_va),
            percent(c.rel_vbar),
            percent(c.rel_vabar),
        );
    }
    let _ = writeln!(out, "V(stand-in) and mean V: {}", report.v_exact_method);
    match &report.summary {
        Some(s) => {
            let _ = writeln!(
                out,
                "mean relative difference vs V_E_hat over {} cells: V {:+.2}%  V_A {:+.2}%  mean V {:+.2}%  mean V_A {:+.2}%",
                s.cells, s.rel_v, s.rel_va, s.rel_vbar, s.rel_vabar
            );
        }
        None => {
            let _ = writeln!(out, "mean relative difference vs V_E_hat: {NOT_APPLICABLE}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{SimulationCell, SimulationReport, V_EXACT_LABEL};
    use super::*;
    use proptest::prelude::*;

    fn report(cells: Vec<SimulationCell>) -> SimulationReport {
        SimulationReport { cells, summary: None, v_exact_method: V_EXACT_LABEL.into() }
    }

    fn arb_cell() -> impl Strategy<Value = SimulationCell> {
        (
            (2usize..8, 2u64..10_000, -1.0f64..1.0),
            (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1e-3, any::<f64>().prop_filter("finite", |v| v.is_finite())),
            (2usize..20_000, 0usize..100),
            proptest::option::of(-1.0f64..10.0),
        )
            .prop_map(|((k, n, kappa), (a, b, c, d), (replicates, degenerate), rel)| SimulationCell {
                k,
                n,
                kappa_target: kappa,
                v_e_hat: a,
                v_exact: b,
                va_exact: c,
                v_bar: d.abs(),
                va_bar: a * b,
                replicates,
                used: replicates,
                degenerate_count: degenerate,
                rel_v: rel,
                rel_va: rel.map(|r| r / 3.0),
                rel_vbar: None,
                rel_vabar: rel.map(|r| -r),
            })
    }

    proptest! {
        #[test]
        fn csv_round_trips_exactly(cells in proptest::collection::vec(arb_cell(), 0..6)) {
            let text = to_csv(&report(cells.clone())).unwrap();
            prop_assert_eq!(read_csv(&text).unwrap(), cells);
        }
    }

    #[test]
    fn not_applicable_marker() {
        let mut c = SimulationCell {
            k: 2,
            n: 10,
            kappa_target: 1.0,
            v_e_hat: 0.0,
            v_exact: 0.0,
            va_exact: 0.0,
            v_bar: 0.0,
            va_bar: 0.0,
            replicates: 10,
            used: 10,
            degenerate_count: 0,
            rel_v: None,
            rel_va: None,
            rel_vbar: None,
            rel_vabar: None,
        };
        let text = to_csv(&report(vec![c.clone()])).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with("NA,NA,NA,NA"));
        assert!(to_table(&report(vec![c.clone()])).contains("NA"));
        c.rel_v = Some(0.1);
        let json = to_json(&report(vec![c])).unwrap();
        assert!(json.contains("\"rel_VA\": null"));
        assert!(json.contains("\"V_E_hat\""));
    }

    #[test]
    fn rejects_foreign_csv() {
        assert!(read_csv("a,b\n1,2\n").is_err());
        let mut bad = to_csv(&report(vec![])).unwrap();
        bad.push_str("2,10,0.4,x,0,0,0,0,1,1,0,NA,NA,NA,NA\n");
        assert!(read_csv(&bad).is_err());
    }
}
