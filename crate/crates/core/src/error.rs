use thiserror::Error;

use crate::coefficients::Family;
use crate::table::ContingencyTable;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The expected index equals one, so `(I_o - I_e) / (1 - I_e)` has no value.
    #[error("kappa undefined for {family}: expected index equals 1{}", table.as_ref().map(|t| format!(" on table {t}")).unwrap_or_default())]
    UndefinedCoefficient {
        family: Family,
        table: Option<ContingencyTable>,
    },

    #[error(
        "transformation undefined for {family}: denominator {denominator} <= 0 at kappa={kappa}, n={n}, R={raters}"
    )]
    TransformationUndefined {
        family: Family,
        kappa: f64,
        n: u64,
        raters: u32,
        denominator: f64,
    },

    #[error("at least {required} subjects are needed, got {n}")]
    InsufficientSubjects { n: u64, required: u64 },

    #[error("{operation} does not support the {family} family; {hint}")]
    UnsupportedFamily {
        family: Family,
        operation: &'static str,
        hint: &'static str,
    },

    #[error("enumeration would visit {count} tables (cap {cap}); reduce n or K")]
    EnumerationTooLarge { count: u128, cap: u128 },

    #[error("gradient evaluation failed at cell {cell}: {reason}")]
    Gradient { cell: usize, reason: String },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("{degenerate} of {total} resamples were degenerate")]
    TooManyDegenerate { degenerate: usize, total: usize },

    #[error("cell K={k}, n={n}, kappa={kappa}: {source}")]
    Cell {
        k: usize,
        n: u64,
        kappa: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("report I/O: {0}")]
    Report(String),
}
