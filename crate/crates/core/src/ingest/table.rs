use std::io::Read;

use csv::{ReaderBuilder, StringRecord, Trim};

use super::{IngestError, NODES_HEADER, TRIADS_HEADER};
use crate::label::Label;
use crate::model::{Kind, RuId};

/// One record of `nodes.csv`. `row` is the 1-based line number (the header
/// is row 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodesTableRow {
    pub row: u64,
    pub label: Label,
    pub code: String,
    pub category_code: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriadsTableRow {
    pub row: u64,
    pub ru_id: RuId,
    pub p: Label,
    pub a: Label,
    pub d: Label,
}

fn records<R: Read>(
    table: &'static str,
    header: &[&str],
    input: R,
) -> Result<Vec<(u64, StringRecord)>, IngestError> {
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(Trim::All)
        .from_reader(input);
    let mut out = Vec::new();
    let mut iter = reader.records();
    let missing = || IngestError::MissingHeader {
        table,
        expected: header.join(","),
    };
    match iter.next() {
        None => return Err(missing()),
        Some(first) => {
            let first = first.map_err(|source| IngestError::Csv { table, source })?;
            if first.iter().ne(header.iter().copied()) {
                return Err(missing());
            }
        }
    }
    for record in iter {
        let record = record.map_err(|source| IngestError::Csv { table, source })?;
        let row = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(IngestError::ColumnCount {
                table,
                row,
                expected: header.len(),
                found: record.len(),
            });
        }
        out.push((row, record));
    }
    Ok(out)
}

pub fn load_nodes_csv<R: Read>(input: R) -> Result<Vec<NodesTableRow>, IngestError> {
    const TABLE: &str = "nodes.csv";
    records(TABLE, &NODES_HEADER, input)?
        .into_iter()
        .map(|(row, rec)| {
            let label = Label::parse(&rec[0]).map_err(|source| IngestError::Label {
                table: TABLE,
                row,
                column: "label",
                source,
            })?;
            if rec[1].is_empty() {
                return Err(IngestError::EmptyField {
                    table: TABLE,
                    row,
                    column: "code",
                });
            }
            Ok(NodesTableRow {
                row,
                label,
                code: rec[1].to_owned(),
                category_code: rec[2].to_owned(),
            })
        })
        .collect()
}

pub fn load_triads_csv<R: Read>(input: R) -> Result<Vec<TriadsTableRow>, IngestError> {
    const TABLE: &str = "triads.csv";
    records(TABLE, &TRIADS_HEADER, input)?
        .into_iter()
        .map(|(row, rec)| {
            if rec[0].is_empty() {
                return Err(IngestError::EmptyField {
                    table: TABLE,
                    row,
                    column: "ru_id",
                });
            }
            let slot = |index: usize, column: &'static str, kind: Kind| {
                let label = Label::parse(&rec[index]).map_err(|source| IngestError::Label {
                    table: TABLE,
                    row,
                    column,
                    source,
                })?;
                if label.kind != kind {
                    return Err(IngestError::KindMismatch {
                        table: TABLE,
                        row,
                        column,
                        expected: kind,
                        found: label,
                    });
                }
                Ok(label)
            };
            Ok(TriadsTableRow {
                row,
                ru_id: RuId::new(&rec[0]),
                p: slot(1, "p", Kind::Problem)?,
                a: slot(2, "a", Kind::Approach)?,
                d: slot(3, "d", Kind::Development)?,
            })
        })
        .collect()
}
