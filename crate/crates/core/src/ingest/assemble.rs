use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{IngestError, NodesTableRow, TriadsTableRow, NODES_HEADER, TRIADS_HEADER};
use crate::label::Label;
use crate::model::{CategoryId, CategoryNode, Corpus, Node, NodeId, ResearchUnit, Triad};
use crate::validate::validate_corpus;

/// Separates the category code from the sub-cluster code in the
/// `category_code` column of sub-cluster members.
pub const SUBCATEGORY_SEPARATOR: &str = " > ";

struct NamedCategory {
    code: String,
    row: u64,
}

fn name_category(
    names: &mut BTreeMap<Label, NamedCategory>,
    category: Label,
    code: &str,
    row: u64,
) -> Result<(), IngestError> {
    match names.get(&category) {
        Some(existing) if existing.code != code => Err(IngestError::InconsistentCategoryCode {
            category,
            row,
            first_row: existing.row,
            expected: existing.code.clone(),
            found: code.to_owned(),
        }),
        Some(_) => Ok(()),
        None => {
            names.insert(
                category,
                NamedCategory {
                    code: code.to_owned(),
                    row,
                },
            );
            Ok(())
        }
    }
}

/// Builds a corpus from the two tables. Categories are inferred from member
/// labels and their `category_code`; node ids follow row order and category
/// ids follow label order. The result is validated before it is returned.
pub fn assemble_corpus(
    nodes: &[NodesTableRow],
    triads: &[TriadsTableRow],
) -> Result<Corpus, IngestError> {
    let mut corpus = Corpus::new();
    let mut by_label: BTreeMap<Label, (NodeId, u64)> = BTreeMap::new();
    let mut names: BTreeMap<Label, NamedCategory> = BTreeMap::new();
    let mut members: BTreeMap<Label, Vec<(u32, NodeId)>> = BTreeMap::new();

    for (index, row) in nodes.iter().enumerate() {
        let id = NodeId(index as u32 + 1);
        if let Some(&(_, first_row)) = by_label.get(&row.label) {
            return Err(IngestError::DuplicateLabel {
                label: row.label,
                row: row.row,
                first_row,
            });
        }
        by_label.insert(row.label, (id, row.row));

        if let Some(item) = row.label.item {
            if row.category_code.is_empty() {
                return Err(IngestError::EmptyField {
                    table: "nodes.csv",
                    row: row.row,
                    column: "category_code",
                });
            }
            let own = row.label.parent_category();
            if row.label.subcategory.is_some() {
                let (top_code, sub_code) = row
                    .category_code
                    .split_once(SUBCATEGORY_SEPARATOR)
                    .map(|(a, b)| (a.trim(), b.trim()))
                    .filter(|(a, b)| !a.is_empty() && !b.is_empty())
                    .ok_or(IngestError::MissingParentCode {
                        label: row.label,
                        row: row.row,
                    })?;
                name_category(&mut names, row.label.top_category(), top_code, row.row)?;
                name_category(&mut names, own, sub_code, row.row)?;
            } else {
                name_category(&mut names, own, &row.category_code, row.row)?;
            }
            members.entry(own).or_default().push((item, id));
        } else if !row.category_code.is_empty() {
            return Err(IngestError::UngroupedWithCategoryCode {
                label: row.label,
                row: row.row,
            });
        }

        corpus.nodes.insert(
            id,
            Node {
                id,
                kind: row.label.kind,
                code: row.code.clone(),
                label: row.label,
                sources: BTreeSet::new(),
            },
        );
    }

    // `names` is keyed by label, so top-level categories precede their sub-clusters
    let mut category_ids: BTreeMap<Label, CategoryId> = BTreeMap::new();
    for (index, (label, named)) in names.iter().enumerate() {
        let id = CategoryId(index as u32 + 1);
        category_ids.insert(*label, id);
        let mut list = members.remove(label).unwrap_or_default();
        list.sort_unstable();
        let items: Vec<u32> = list.iter().map(|&(item, _)| item).collect();
        if items
            .iter()
            .enumerate()
            .any(|(k, &item)| item != k as u32 + 1)
        {
            return Err(IngestError::MemberGap {
                category: *label,
                items,
            });
        }
        let parent = label
            .subcategory
            .map(|_| category_ids[&label.top_category()]);
        corpus.categories.insert(
            id,
            CategoryNode {
                id,
                kind: label.kind,
                category_code: named.code.clone(),
                label: *label,
                members: list.into_iter().map(|(_, node)| node).collect(),
                parent,
            },
        );
    }

    let mut chains: HashSet<(usize, NodeId, NodeId, NodeId)> = HashSet::new();
    let mut ru_index: BTreeMap<String, usize> = BTreeMap::new();
    for row in triads {
        let resolve = |label: &Label| {
            by_label
                .get(label)
                .map(|&(id, _)| id)
                .ok_or(IngestError::UnknownLabel {
                    row: row.row,
                    label: *label,
                })
        };
        let (p, a, d) = (resolve(&row.p)?, resolve(&row.a)?, resolve(&row.d)?);
        let unit = *ru_index.entry(row.ru_id.0.clone()).or_insert_with(|| {
            corpus.research_units.push(ResearchUnit {
                id: row.ru_id.clone(),
                citation: String::new(),
                triads: Vec::new(),
            });
            corpus.research_units.len() - 1
        });
        if !chains.insert((unit, p, a, d)) {
            return Err(IngestError::DuplicateTriad {
                row: row.row,
                ru: row.ru_id.clone(),
            });
        }
        for id in [p, a, d] {
            if let Some(node) = corpus.nodes.get_mut(&id) {
                node.sources.insert(row.ru_id.clone());
            }
        }
        corpus.research_units[unit].triads.push(Triad {
            ru: row.ru_id.clone(),
            p,
            a,
            d,
        });
    }

    corpus.sync_counters();
    let report = validate_corpus(&corpus);
    if !report.is_clean() {
        return Err(IngestError::Invalid(report));
    }
    Ok(corpus)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(writer: csv::Writer<Vec<u8>>) -> String {
    let bytes = writer.into_inner().expect("in-memory writer cannot fail");
    String::from_utf8(bytes).expect("csv output of UTF-8 fields is UTF-8")
}

/// Writes `nodes.csv` in node registry order.
pub fn nodes_to_csv(corpus: &Corpus) -> String {
    let mut writer = csv_writer();
    writer.write_record(NODES_HEADER).expect("in-memory write");
    let membership = corpus.membership();
    for node in corpus.nodes.values() {
        let category_code = match membership.get(&node.id).and_then(|c| corpus.category(*c)) {
            None => String::new(),
            Some(category) if category.label.subcategory.is_some() => {
                let top = category
                    .parent
                    .and_then(|p| corpus.category(p))
                    .map_or("", |p| p.category_code.as_str());
                format!("{top}{SUBCATEGORY_SEPARATOR}{}", category.category_code)
            }
            Some(category) => category.category_code.clone(),
        };
        writer
            .write_record([node.label.render(), node.code.clone(), category_code])
            .expect("in-memory write");
    }
    finish(writer)
}

/// Writes `triads.csv` in research-unit order.
pub fn triads_to_csv(corpus: &Corpus) -> String {
    let mut writer = csv_writer();
    writer.write_record(TRIADS_HEADER).expect("in-memory write");
    let label = |id: NodeId| {
        corpus
            .node(id)
            .map_or_else(|| id.to_string(), |n| n.label.render())
    };
    for triad in corpus.triads() {
        writer
            .write_record([
                triad.ru.0.clone(),
                label(triad.p),
                label(triad.a),
                label(triad.d),
            ])
            .expect("in-memory write");
    }
    finish(writer)
}

/// Both tables, `(nodes.csv, triads.csv)`.
pub fn export_csv(corpus: &Corpus) -> (String, String) {
    (nodes_to_csv(corpus), triads_to_csv(corpus))
}
