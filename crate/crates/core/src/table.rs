//! Observed rating data: two-rater contingency tables and multi-rater count tables.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// K×K counts `x_ij` of subjects placed in category `i` by the first rater and
/// `j` by the second. Stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContingencyTable {
    k: usize,
    counts: Vec<u64>,
    n: u64,
}

impl ContingencyTable {
    pub fn new(k: usize, counts: Vec<u64>) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidTable(format!("need at least 2 categories, got {k}")));
        }
        if counts.len() != k * k {
            return Err(Error::InvalidTable(format!(
                "expected {} cells for K={k}, got {}",
                k * k,
                counts.len()
            )));
        }
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::InvalidTable("table has no subjects".into()));
        }
        Ok(Self { k, counts, n })
    }

    /// Builds a table from nested rows, e.g. `[[4, 1], [2, 3]]`.
    pub fn from_rows<R: AsRef<[u64]>>(rows: &[R]) -> Result<Self> {
        let k = rows.len();
        let mut counts = Vec::with_capacity(k * k);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != k {
                return Err(Error::InvalidTable(format!(
                    "row {i} has {} entries, expected {k}",
                    row.len()
                )));
            }
            counts.extend_from_slice(row);
        }
        Self::new(k, counts)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.k + j]
    }

    /// Cell proportions `x_ij / n`, row-major.
    pub fn proportions(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.counts.iter().map(|&x| x as f64 / n).collect()
    }
}

impl fmt::Display for ContingencyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.counts.chunks(self.k).enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Per-subject category counts for `R` raters: row `s` holds how many raters
/// placed subject `s` in each of the K categories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiRaterTable {
    k: usize,
    raters: u32,
    counts: Vec<u32>,
}

impl MultiRaterTable {
    pub fn new<R: AsRef<[u32]>>(rows: &[R]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidTable("no subjects".into()));
        };
        let k = first.as_ref().len();
        if k < 2 {
            return Err(Error::InvalidTable(format!("need at least 2 categories, got {k}")));
        }
        let raters: u32 = first.as_ref().iter().sum();
        if raters < 2 {
            return Err(Error::InvalidTable(format!("need at least 2 raters per subject, got {raters}")));
        }
        let mut counts = Vec::with_capacity(rows.len() * k);
        for (s, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != k {
                return Err(Error::InvalidTable(format!(
                    "subject {s} has {} categories, expected {k}",
                    row.len()
                )));
            }
            let total: u32 = row.iter().sum();
            if total != raters {
                return Err(Error::InvalidTable(format!(
                    "subject {s} has {total} ratings, expected {raters}"
                )));
            }
            counts.extend_from_slice(row);
        }
        Ok(Self { k, raters, counts })
    }

    /// Two-rater data viewed as multi-rater counts: a subject in cell `(i, j)`
    /// contributes one rating to category `i` and one to `j`.
    pub fn from_contingency(table: &ContingencyTable) -> Self {
        let k = table.k();
        let mut counts = Vec::with_capacity(table.n() as usize * k);
        for i in 0..k {
            for j in 0..k {
                for _ in 0..table.get(i, j) {
                    let mut row = vec![0u32; k];
                    row[i] += 1;
                    row[j] += 1;
                    counts.extend(row);
                }
            }
        }
        Self { k, raters: 2, counts }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn raters(&self) -> u32 {
        self.raters
    }

    pub fn subjects(&self) -> usize {
        self.counts.len() / self.k
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.counts.chunks(self.k)
    }

    /// Builds a table from a subset (with repetition) of this table's subjects.
    pub fn select(&self, subjects: &[usize]) -> Self {
        let mut counts = Vec::with_capacity(subjects.len() * self.k);
        for &s in subjects {
            counts.extend_from_slice(&self.counts[s * self.k..(s + 1) * self.k]);
        }
        Self { k: self.k, raters: self.raters, counts }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_and_totals() {
        let t = ContingencyTable::from_rows(&[[4, 1], [2, 3]]).unwrap();
        assert_eq!(t.n(), 10);
        assert_eq!(t.get(1, 0), 2);
        assert_eq!(t.to_string(), "[[4,1],[2,3]]");
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(ContingencyTable::from_rows(&[[0u64, 0], [0, 0]]).is_err());
        assert!(ContingencyTable::new(1, vec![3]).is_err());
        assert!(ContingencyTable::new(2, vec![1, 2, 3]).is_err());
        assert!(ContingencyTable::from_rows(&[vec![1u64, 2], vec![3]]).is_err());
    }

    #[test]
    fn multi_rater_rows_must_share_rater_count() {
        assert!(MultiRaterTable::new(&[[3u32, 0], [0, 2]]).is_err());
        assert!(MultiRaterTable::new(&[[1u32, 0]]).is_err());
        let mr = MultiRaterTable::new(&[[3u32, 0], [1, 2]]).unwrap();
        assert_eq!(mr.raters(), 3);
        assert_eq!(mr.subjects(), 2);
    }

    #[test]
    fn contingency_to_multi_rater() {
        let t = ContingencyTable::from_rows(&[[1, 1], [0, 0]]).unwrap();
        let mr = MultiRaterTable::from_contingency(&t);
        let rows: Vec<_> = mr.rows().map(|r| r.to_vec()).collect();
        assert_eq!(rows, vec![vec![2, 0], vec![1, 1]]);
    }
}
