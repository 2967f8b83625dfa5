//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Dimension or shape mismatch between values that must agree.
    #[error("shape error: {0}")]
    Shape(String),

    /// A dataset-level precondition failed (empty data, bad fraction, ...).
    #[error("data error: {0}")]
    Data(String),

    /// A label is outside the valid class range.
    #[error("label error: sample {index} has label {label}, expected 0..{classes}")]
    Label {
        index: usize,
        label: usize,
        classes: usize,
    },

    /// CSV ingestion failures, each naming the offending location.
    #[error("load error: cannot open {path}: {source}")]
    LoadIo {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("load error: {path} has a header but no data rows")]
    LoadEmptyBody { path: String },
    #[error("load error: {path} row {row} has {got} fields, header has {expected}")]
    LoadRaggedRow {
        path: String,
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("load error: {path} row {row} column '{column}': cannot parse '{value}' as a number")]
    LoadBadCell {
        path: String,
        row: usize,
        column: String,
        value: String,
    },
    #[error("load error: {path} row {row} column '{column}': non-finite value")]
    LoadNonFinite {
        path: String,
        row: usize,
        column: String,
    },
    #[error("load error: {path} has no label column named '{name}'")]
    LoadNoLabelColumn { path: String, name: String },

    /// A numeric quantity that must be finite was not.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An input exceeds a documented size limit.
    #[error("size error: {what} is {got}, limit is {limit}")]
    Size {
        what: String,
        got: usize,
        limit: usize,
    },

    /// The model architecture does not satisfy an operation's requirements.
    #[error("architecture error: {0}")]
    Architecture(String),

    /// A degenerate input makes the requested quantity undefined.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Every probed configuration was discarded; the search has no survivors.
    #[error("all {sampled} sampled configurations were discarded (non-positive proxy)")]
    AllDiscarded { sampled: usize },

    /// A theory check requires strict convexity but the problem has mu = 0.
    #[error("problem is not strongly convex (mu = 0)")]
    NotStronglyConvex,
}
