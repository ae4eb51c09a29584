//! Corpus-wide invariant checks.
//!
//! Violations are reported as data. The report is sorted: research units by
//! id then triad index, followed by nodes, categories and corpus-level issues.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use crate::label::Label;
use crate::model::{CategoryId, Corpus, Kind, NodeId, RuId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "scope", rename_all = "snake_case")]
pub enum Location {
    ResearchUnit {
        ru: RuId,
        triad: Option<usize>,
        slot: Option<Kind>,
    },
    Node {
        node: NodeId,
    },
    Category {
        category: CategoryId,
    },
    Corpus,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::ResearchUnit { ru, triad, slot } => {
                write!(f, "research unit {ru}")?;
                if let Some(t) = triad {
                    write!(f, ", triad {}", t + 1)?;
                }
                if let Some(k) = slot {
                    write!(f, ", slot {}", k.symbol())?;
                }
                Ok(())
            }
            Location::Node { node } => write!(f, "node {node}"),
            Location::Category { category } => write!(f, "category {category}"),
            Location::Corpus => f.write_str("corpus"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Issue {
    pub location: Location,
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}: {}", self.location, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }

    /// True when no issue has error severity. Warnings (e.g. a research unit
    /// still awaiting its triads) do not block analysis.
    pub fn is_clean(&self) -> bool {
        self.errors.iter().all(|i| i.severity != Severity::Error)
    }

    pub fn error_count(&self) -> usize {
        self.errors
            .iter()
            .filter(|i| i.severity == Severity::Error)
            .count()
    }

    fn push(&mut self, severity: Severity, location: Location, message: impl Into<String>) {
        self.errors.push(Issue {
            location,
            severity,
            message: message.into(),
        });
    }

    fn error(&mut self, location: Location, message: impl Into<String>) {
        self.push(Severity::Error, location, message);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.errors {
            writeln!(f, "{issue}")?;
        }
        Ok(())
    }
}

pub fn validate_corpus(corpus: &Corpus) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_research_units(corpus, &mut report);
    let membership = check_categories(corpus, &mut report);
    check_nodes(corpus, &membership, &mut report);
    check_counters(corpus, &membership, &mut report);
    report.errors.sort();
    report
}

fn check_research_units(corpus: &Corpus, report: &mut ValidationReport) {
    let mut seen = HashSet::new();
    for ru in &corpus.research_units {
        let here = |triad: Option<usize>, slot: Option<Kind>| Location::ResearchUnit {
            ru: ru.id.clone(),
            triad,
            slot,
        };
        if ru.id.as_str().trim().is_empty() {
            report.error(here(None, None), "research unit id is empty");
        }
        if !seen.insert(&ru.id) {
            report.error(here(None, None), "duplicate research unit id");
        }
        if ru.triads.is_empty() {
            report.push(
                Severity::Warning,
                here(None, None),
                "research unit has no triads",
            );
        }
        let mut chains = HashSet::new();
        for (index, triad) in ru.triads.iter().enumerate() {
            if triad.ru != ru.id {
                report.error(
                    here(Some(index), None),
                    format!("triad is attributed to research unit {}", triad.ru),
                );
            }
            for (kind, id) in triad.slots() {
                match corpus.node(id) {
                    None => report.error(
                        here(Some(index), Some(kind)),
                        format!("triad references missing node {id}"),
                    ),
                    Some(node) if node.kind != kind => report.error(
                        here(Some(index), Some(kind)),
                        format!(
                            "slot expects a {} node but {id} ({}) is a {}",
                            kind.name(),
                            node.label,
                            node.kind.name()
                        ),
                    ),
                    Some(_) => {}
                }
            }
            if !chains.insert((triad.p, triad.a, triad.d)) {
                report.error(
                    here(Some(index), None),
                    "duplicate triad within research unit",
                );
            }
        }
    }
}

fn check_categories(
    corpus: &Corpus,
    report: &mut ValidationReport,
) -> BTreeMap<NodeId, CategoryId> {
    let mut membership: BTreeMap<NodeId, CategoryId> = BTreeMap::new();
    let mut labels: BTreeMap<Label, CategoryId> = BTreeMap::new();

    for category in corpus.categories.values() {
        let here = Location::Category {
            category: category.id,
        };
        if category.category_code.trim().is_empty() {
            report.error(here.clone(), "category code is empty");
        }
        if category.label.kind != category.kind {
            report.error(
                here.clone(),
                format!(
                    "label {} does not match kind {}",
                    category.label, category.kind
                ),
            );
        }
        if category.label.item.is_some() {
            report.error(
                here.clone(),
                format!("category label {} carries an item number", category.label),
            );
        }
        if let Some(other) = labels.insert(category.label, category.id) {
            report.error(
                here.clone(),
                format!("label {} is also used by category {other}", category.label),
            );
        }

        let mut seen = HashSet::new();
        for (position, &member) in category.members.iter().enumerate() {
            if !seen.insert(member) {
                report.error(here.clone(), format!("member {member} listed twice"));
                continue;
            }
            if let Some(other) = membership.insert(member, category.id) {
                report.error(
                    here.clone(),
                    format!("member {member} also belongs to category {other}"),
                );
            }
            let Some(node) = corpus.node(member) else {
                report.error(here.clone(), format!("member {member} does not exist"));
                continue;
            };
            if node.kind != category.kind {
                report.error(
                    here.clone(),
                    format!("member {member} is a {} node", node.kind.name()),
                );
            }
            let expected = category.label.with_item(position as u32 + 1);
            if node.label != expected {
                report.error(
                    here.clone(),
                    format!(
                        "member {member} is labelled {} but its position requires {expected}",
                        node.label
                    ),
                );
            }
        }

        match category.parent {
            Some(parent_id) => match corpus.category(parent_id) {
                None => report.error(here.clone(), format!("parent {parent_id} does not exist")),
                Some(parent) => {
                    if parent.kind != category.kind {
                        report.error(here.clone(), format!("parent {parent_id} has another kind"));
                    }
                    if parent.label.subcategory.is_some() {
                        report.error(
                            here.clone(),
                            format!("parent {} is a sub-cluster", parent.label),
                        );
                    }
                    if category.label.subcategory.is_some()
                        && parent.label != category.label.top_category()
                    {
                        report.error(
                            here.clone(),
                            format!(
                                "sub-cluster {} must sit under {}, not {}",
                                category.label,
                                category.label.top_category(),
                                parent.label
                            ),
                        );
                    }
                }
            },
            None if category.label.subcategory.is_some() => {
                report.error(
                    here.clone(),
                    format!("sub-cluster {} has no parent category", category.label),
                );
            }
            None => {}
        }
    }

    for id in parent_cycles(corpus) {
        report.error(
            Location::Category { category: id },
            "parent links form a cycle",
        );
    }
    membership
}

/// Categories lying on a parent-link cycle.
pub(crate) fn parent_cycles(corpus: &Corpus) -> BTreeSet<CategoryId> {
    let mut cyclic = BTreeSet::new();
    for &start in corpus.categories.keys() {
        let mut seen = BTreeSet::new();
        let mut cursor = Some(start);
        while let Some(id) = cursor {
            if !seen.insert(id) {
                if id == start {
                    cyclic.insert(start);
                }
                break;
            }
            cursor = corpus.category(id).and_then(|c| c.parent);
        }
    }
    cyclic
}

fn check_nodes(
    corpus: &Corpus,
    membership: &BTreeMap<NodeId, CategoryId>,
    report: &mut ValidationReport,
) {
    let mut labels: BTreeMap<Label, NodeId> = BTreeMap::new();
    for node in corpus.nodes.values() {
        let here = Location::Node { node: node.id };
        if node.code.trim().is_empty() {
            report.error(here.clone(), "code text is empty");
        }
        if node.label.kind != node.kind {
            report.error(
                here.clone(),
                format!("label {} does not match kind {}", node.label, node.kind),
            );
        }
        if let Some(other) = labels.insert(node.label, node.id) {
            report.error(
                here.clone(),
                format!("label {} is also used by node {other}", node.label),
            );
        }
        let grouped = membership.contains_key(&node.id);
        if !grouped && (node.label.is_member() || node.label.subcategory.is_some()) {
            report.error(
                here.clone(),
                format!("ungrouped node carries member label {}", node.label),
            );
        }
        if grouped && node.label.subcategory.is_some() {
            let top = node.label.top_category();
            if corpus.category_by_label(&top).is_none() {
                report.error(here, format!("no category {top} above sub-cluster member"));
            }
        }
    }
}

fn check_counters(
    corpus: &Corpus,
    membership: &BTreeMap<NodeId, CategoryId>,
    report: &mut ValidationReport,
) {
    for node in corpus.nodes.values() {
        if !membership.contains_key(&node.id)
            && !node.label.is_member()
            && node.label.category > corpus.counters.ungrouped[node.kind]
        {
            report.error(
                Location::Node { node: node.id },
                format!(
                    "provisional number {} exceeds the {} pool counter {}",
                    node.label.category, node.kind, corpus.counters.ungrouped[node.kind]
                ),
            );
        }
    }
    for category in corpus.categories.values() {
        if category.label.category > corpus.counters.category[category.kind] {
            report.error(
                Location::Category {
                    category: category.id,
                },
                format!(
                    "category number {} exceeds the {} category counter {}",
                    category.label.category, category.kind, corpus.counters.category[category.kind]
                ),
            );
        }
    }
}
