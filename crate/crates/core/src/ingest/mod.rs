//! Loading and saving corpora.
//!
//! Two interchange forms are supported: a pair of CSV tables (`nodes.csv`
//! with `label,code,category_code` and `triads.csv` with `ru_id,p,a,d`) and a
//! single canonical JSON document.

mod assemble;
mod json;
mod table;

use thiserror::Error;

use crate::label::{Label, LabelError};
use crate::model::{Kind, RuId};
use crate::validate::ValidationReport;

pub use assemble::{
    assemble_corpus, export_csv, nodes_to_csv, triads_to_csv, SUBCATEGORY_SEPARATOR,
};
pub use json::{load_corpus_json, save_corpus_json, to_json_string, to_json_value};
pub use table::{load_nodes_csv, load_triads_csv, NodesTableRow, TriadsTableRow};

pub const NODES_HEADER: [&str; 3] = ["label", "code", "category_code"];
pub const TRIADS_HEADER: [&str; 4] = ["ru_id", "p", "a", "d"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{table}: missing header row `{expected}`")]
    MissingHeader {
        table: &'static str,
        expected: String,
    },
    #[error("{table}: row {row}: expected {expected} columns, found {found}")]
    ColumnCount {
        table: &'static str,
        row: u64,
        expected: usize,
        found: usize,
    },
    #[error("{table}: row {row}: column `{column}`: {source}")]
    Label {
        table: &'static str,
        row: u64,
        column: &'static str,
        source: LabelError,
    },
    #[error("{table}: row {row}: column `{column}` expects a {expected} label, found {found}")]
    KindMismatch {
        table: &'static str,
        row: u64,
        column: &'static str,
        expected: Kind,
        found: Label,
    },
    #[error("{table}: row {row}: column `{column}` is empty")]
    EmptyField {
        table: &'static str,
        row: u64,
        column: &'static str,
    },
    #[error("{table}: {source}")]
    Csv {
        table: &'static str,
        source: csv::Error,
    },
    #[error("nodes.csv: row {row}: label {label} already used on row {first_row}")]
    DuplicateLabel {
        label: Label,
        row: u64,
        first_row: u64,
    },
    #[error("nodes.csv: row {row}: ungrouped node {label} must have an empty category_code")]
    UngroupedWithCategoryCode { label: Label, row: u64 },
    #[error("nodes.csv: row {row}: sub-cluster member {label} needs category_code `<category>{sep}<sub-cluster>`", sep = SUBCATEGORY_SEPARATOR)]
    MissingParentCode { label: Label, row: u64 },
    #[error("nodes.csv: row {row}: category {category} is named `{found}` here but `{expected}` on row {first_row}")]
    InconsistentCategoryCode {
        category: Label,
        row: u64,
        first_row: u64,
        expected: String,
        found: String,
    },
    #[error("nodes.csv: category {category} has member items {items:?}; expected 1..{}", items.len())]
    MemberGap { category: Label, items: Vec<u32> },
    #[error("triads.csv: row {row}: unknown label {label}")]
    UnknownLabel { row: u64, label: Label },
    #[error("triads.csv: row {row}: duplicate triad in research unit {ru}")]
    DuplicateTriad { row: u64, ru: RuId },
    #[error("assembled corpus is invalid:\n{0}")]
    Invalid(ValidationReport),
    #[error("{pointer}: {message}")]
    Json { pointer: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl IngestError {
    /// Table row the error refers to, when it has one.
    pub fn row(&self) -> Option<u64> {
        match self {
            IngestError::ColumnCount { row, .. }
            | IngestError::Label { row, .. }
            | IngestError::KindMismatch { row, .. }
            | IngestError::EmptyField { row, .. }
            | IngestError::DuplicateLabel { row, .. }
            | IngestError::UngroupedWithCategoryCode { row, .. }
            | IngestError::MissingParentCode { row, .. }
            | IngestError::InconsistentCategoryCode { row, .. }
            | IngestError::UnknownLabel { row, .. }
            | IngestError::DuplicateTriad { row, .. } => Some(*row),
            IngestError::Csv { source, .. } => source.position().map(|p| p.line()),
            _ => None,
        }
    }
}
