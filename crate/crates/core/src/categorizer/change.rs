//! Low-level state changes. Every committed session operation is recorded as
//! a list of these; folding them over the initial corpus yields the current
//! corpus.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::label::Label;
use crate::model::{
    CategoryId, CategoryNode, Corpus, Kind, Node, NodeId, ResearchUnit, RuId, Triad,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RelabelReason {
    /// Pre-existing neighbour of a new category, takes item 1.
    GroupedAsNeighbor,
    /// Code being categorized, takes item 2 of a new category.
    GroupedAsSubject,
    /// Joined an existing category at the next free item.
    Joined,
    /// Moved out of its category into a newly spawned one.
    Spawned,
    /// Renumbered after another member left.
    Compacted,
    /// Moved into a sub-cluster.
    Subcategorized,
}

impl RelabelReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RelabelReason::GroupedAsNeighbor => "grouped_as_neighbor",
            RelabelReason::GroupedAsSubject => "grouped_as_subject",
            RelabelReason::Joined => "joined",
            RelabelReason::Spawned => "spawned",
            RelabelReason::Compacted => "compacted",
            RelabelReason::Subcategorized => "subcategorized",
        }
    }
}

impl fmt::Display for RelabelReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelabelEntry {
    pub node: NodeId,
    pub old: Label,
    pub new: Label,
    pub reason: RelabelReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Change {
    NodeAdded(Node),
    SourceAdded {
        node: NodeId,
        ru: RuId,
    },
    ResearchUnitAdded {
        ru: RuId,
    },
    TriadAdded(Triad),
    CategoryCreated {
        id: CategoryId,
        kind: Kind,
        label: Label,
        text: String,
        parent: Option<CategoryId>,
    },
    MembersSet {
        category: CategoryId,
        members: Vec<NodeId>,
    },
    Relabeled(RelabelEntry),
    TextRevised {
        category: CategoryId,
        old: String,
        new: String,
    },
    ParentSet {
        category: CategoryId,
        parent: Option<CategoryId>,
    },
    CategoryRetired {
        category: CategoryId,
    },
    /// Pool bookkeeping only; leaves the corpus untouched.
    MarkedReviewed {
        node: NodeId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("category {0} does not exist")]
    UnknownCategory(CategoryId),
    #[error("research unit {0} does not exist")]
    UnknownResearchUnit(RuId),
    #[error("{0} already exists")]
    AlreadyExists(String),
    #[error("node {node} is labelled {actual}, log expects {expected}")]
    Diverged {
        node: NodeId,
        expected: Label,
        actual: Label,
    },
}

pub fn apply(corpus: &mut Corpus, change: &Change) -> Result<(), ReplayError> {
    match change {
        Change::NodeAdded(node) => {
            if corpus.nodes.contains_key(&node.id) {
                return Err(ReplayError::AlreadyExists(node.id.to_string()));
            }
            if !node.label.is_member() {
                let counter = &mut corpus.counters.ungrouped[node.kind];
                *counter = (*counter).max(node.label.category);
            }
            corpus.nodes.insert(node.id, node.clone());
        }
        Change::SourceAdded { node, ru } => {
            corpus
                .nodes
                .get_mut(node)
                .ok_or(ReplayError::UnknownNode(*node))?
                .sources
                .insert(ru.clone());
        }
        Change::ResearchUnitAdded { ru } => {
            if corpus.research_unit(ru).is_some() {
                return Err(ReplayError::AlreadyExists(ru.to_string()));
            }
            corpus.research_units.push(ResearchUnit {
                id: ru.clone(),
                citation: String::new(),
                triads: Vec::new(),
            });
        }
        Change::TriadAdded(triad) => {
            corpus
                .research_units
                .iter_mut()
                .find(|ru| ru.id == triad.ru)
                .ok_or_else(|| ReplayError::UnknownResearchUnit(triad.ru.clone()))?
                .triads
                .push(triad.clone());
        }
        Change::CategoryCreated {
            id,
            kind,
            label,
            text,
            parent,
        } => {
            if corpus.categories.contains_key(id) {
                return Err(ReplayError::AlreadyExists(id.to_string()));
            }
            let counter = &mut corpus.counters.category[*kind];
            *counter = (*counter).max(label.category);
            corpus.categories.insert(
                *id,
                CategoryNode {
                    id: *id,
                    kind: *kind,
                    category_code: text.clone(),
                    label: *label,
                    members: Vec::new(),
                    parent: *parent,
                },
            );
        }
        Change::MembersSet { category, members } => {
            category_mut(corpus, *category)?.members = members.clone();
        }
        Change::Relabeled(entry) => {
            let node = corpus
                .nodes
                .get_mut(&entry.node)
                .ok_or(ReplayError::UnknownNode(entry.node))?;
            if node.label != entry.old {
                return Err(ReplayError::Diverged {
                    node: entry.node,
                    expected: entry.old,
                    actual: node.label,
                });
            }
            node.label = entry.new;
        }
        Change::TextRevised { category, new, .. } => {
            category_mut(corpus, *category)?.category_code = new.clone();
        }
        Change::ParentSet { category, parent } => {
            category_mut(corpus, *category)?.parent = *parent;
        }
        Change::CategoryRetired { category } => {
            corpus
                .categories
                .remove(category)
                .ok_or(ReplayError::UnknownCategory(*category))?;
        }
        Change::MarkedReviewed { node } => {
            if !corpus.nodes.contains_key(node) {
                return Err(ReplayError::UnknownNode(*node));
            }
        }
    }
    Ok(())
}

fn category_mut(corpus: &mut Corpus, id: CategoryId) -> Result<&mut CategoryNode, ReplayError> {
    corpus
        .categories
        .get_mut(&id)
        .ok_or(ReplayError::UnknownCategory(id))
}

/// Folds `changes` over a copy of `initial`.
pub fn replay<'a>(
    initial: &Corpus,
    changes: impl IntoIterator<Item = &'a Change>,
) -> Result<Corpus, ReplayError> {
    let mut corpus = initial.clone();
    for change in changes {
        apply(&mut corpus, change)?;
    }
    Ok(corpus)
}
