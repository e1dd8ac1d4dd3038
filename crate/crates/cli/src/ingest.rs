//! Rating-data readers: count matrices and long `subject,rater,category` files.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use kappa_core::{ContingencyTable, MultiRaterTable};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum InputFormat {
    /// CSV of K×K integer counts, no header.
    #[default]
    Matrix,
    /// CSV with header `subject,rater,category`, one rating per line.
    Long,
}

impl FromStr for InputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "matrix" => Ok(Self::Matrix),
            "long" => Ok(Self::Long),
            other => Err(CliError::Usage(format!("unknown input format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ratings {
    Pairwise(ContingencyTable),
    MultiRater(MultiRaterTable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub ratings: Ratings,
    /// Category labels in index order (first appearance); long format only.
    pub categories: Option<Vec<String>>,
    /// Rater labels in first-appearance order; long format only.
    pub raters: Option<Vec<String>>,
}

pub fn ingest_ratings(path: &Path, format: InputFormat) -> Result<Ingested, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    match format {
        InputFormat::Matrix => parse_matrix(&text),
        InputFormat::Long => parse_long(&text),
    }
}

fn input(line: u64, message: impl Into<String>) -> CliError {
    CliError::Input { line, message: message.into() }
}

fn records(text: &str, headers: bool) -> csv::StringRecordsIntoIter<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
        .into_records()
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

pub fn parse_matrix(text: &str) -> Result<Ingested, CliError> {
    let mut rows: Vec<Vec<u64>> = Vec::new();
    let mut last_line = 0;
    for record in records(text, false) {
        let record = record.map_err(|e| input(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = line_of(&record);
        last_line = line;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field
                    .parse::<u64>()
                    .map_err(|_| input(line, format!("column {}: `{field}` is not a nonnegative integer count", col + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(input(line, format!("ragged matrix: {} entries, expected {}", row.len(), first.len())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(input(last_line.max(1), "empty file"));
    }
    if rows.len() != rows[0].len() {
        return Err(input(
            last_line,
            format!("matrix has {} rows and {} columns; it must be square", rows.len(), rows[0].len()),
        ));
    }
    let table = ContingencyTable::from_rows(&rows).map_err(|e| input(last_line, e.to_string()))?;
    Ok(Ingested { ratings: Ratings::Pairwise(table), categories: None, raters: None })
}

/// Index of `label` in `labels`, appending it when new.
fn intern(labels: &mut Vec<String>, index: &mut HashMap<String, usize>, label: &str) -> usize {
    *index.entry(label.to_string()).or_insert_with(|| {
        labels.push(label.to_string());
        labels.len() - 1
    })
}

pub fn parse_long(text: &str) -> Result<Ingested, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| input(1, e.to_string()))?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(input(1, "empty file"));
    }
    if header.iter().ne(["subject", "rater", "category"]) {
        return Err(input(1, format!("header must be `subject,rater,category`, got `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }

    let (mut subjects, mut subject_index) = (Vec::new(), HashMap::new());
    let (mut raters, mut rater_index) = (Vec::new(), HashMap::new());
    let (mut categories, mut category_index) = (Vec::new(), HashMap::new());
    // Per subject: (first line, [(rater, category)])
    let mut ratings: Vec<(u64, Vec<(usize, usize)>)> = Vec::new();

    for record in reader.records() {
        let record = record.map_err(|e| input(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = line_of(&record);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 3 {
            return Err(input(line, format!("expected 3 fields, got {}", record.len())));
        }
        if record.iter().any(str::is_empty) {
            return Err(input(line, "empty field"));
        }
        let s = intern(&mut subjects, &mut subject_index, &record[0]);
        let r = intern(&mut raters, &mut rater_index, &record[1]);
        let c = intern(&mut categories, &mut category_index, &record[2]);
        if s == ratings.len() {
            ratings.push((line, Vec::new()));
        }
        let entry = &mut ratings[s].1;
        if entry.iter().any(|&(rr, _)| rr == r) {
            return Err(input(line, format!("rater `{}` rates subject `{}` twice", &record[1], &record[0])));
        }
        entry.push((r, c));
    }
    if ratings.is_empty() {
        return Err(input(1, "empty file: no ratings after the header"));
    }
    let per_subject = ratings[0].1.len();
    if let Some((s, (line, r))) = ratings.iter().enumerate().find(|(_, (_, r))| r.len() != per_subject) {
        return Err(input(
            *line,
            format!(
                "varying raters per subject: subject `{}` has {} ratings, subject `{}` has {per_subject}",
                subjects[s],
                r.len(),
                subjects[0]
            ),
        ));
    }
    if per_subject < 2 {
        return Err(input(ratings[0].0, "each subject needs at least 2 ratings"));
    }
    let k = categories.len();
    if k < 2 {
        return Err(input(ratings[0].0, "need at least 2 distinct categories"));
    }

    let data = if per_subject == 2 && raters.len() == 2 {
        let mut counts = vec![0u64; k * k];
        for (_, pair) in &ratings {
            let first = pair.iter().find(|(r, _)| *r == 0).map(|&(_, c)| c).unwrap_or_default();
            let second = pair.iter().find(|(r, _)| *r == 1).map(|&(_, c)| c).unwrap_or_default();
            counts[first * k + second] += 1;
        }
        Ratings::Pairwise(ContingencyTable::new(k, counts).map_err(|e| input(0, e.to_string()))?)
    } else {
        let rows: Vec<Vec<u32>> = ratings
            .iter()
            .map(|(_, pairs)| {
                let mut row = vec![0u32; k];
                for &(_, c) in pairs {
                    row[c] += 1;
                }
                row
            })
            .collect();
        Ratings::MultiRater(MultiRaterTable::new(&rows).map_err(|e| input(0, e.to_string()))?)
    };
    Ok(Ingested { ratings: data, categories: Some(categories), raters: Some(raters) })
}
