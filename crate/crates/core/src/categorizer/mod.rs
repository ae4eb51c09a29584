//! Iterative categorization as a transactional session.
//!
//! The researcher decides which codes are close in meaning and whether a
//! category's text can stretch to cover a new code; the session does the
//! bookkeeping. Each operation plans a list of [`Change`]s, applies them to a
//! copy of the corpus, validates the copy and only then commits. A failed
//! operation leaves the session untouched.
//!
//! Numbering rules:
//! - new codes draw provisional numbers from a per-kind pool counter,
//! - a new category takes the next unused category number of its kind;
//!   numbers of deleted categories are retired, never reissued,
//! - the neighbour of a new category becomes item 1, the subject item 2,
//!   later joiners take the next free item,
//! - when a member leaves, the survivors are renumbered to close the gap.

mod change;

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

pub use change::{apply, replay, Change, RelabelEntry, RelabelReason, ReplayError};

use crate::label::Label;
use crate::model::{CategoryId, CategoryNode, Corpus, Kind, Node, NodeId, RuId, Triad};
use crate::validate::{validate_corpus, ValidationReport};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("category {0} does not exist")]
    UnknownCategory(CategoryId),
    #[error("node {0} is already grouped")]
    AlreadyGrouped(NodeId),
    #[error("node {0} is not grouped")]
    NotGrouped(NodeId),
    #[error("expected a {expected} code but {node} is a {found} code")]
    KindMismatch {
        node: NodeId,
        expected: Kind,
        found: Kind,
    },
    #[error("{0} must be a single line")]
    MultilineText(&'static str),
    #[error("a code cannot be grouped with itself")]
    SameNode,
    #[error("{0} must not be empty")]
    EmptyText(&'static str),
    #[error("a category text is required to group two ungrouped codes")]
    MissingCategoryText,
    #[error("member list is empty")]
    EmptyMembers,
    #[error("node {0} is listed twice")]
    DuplicateMember(NodeId),
    #[error("node {node} is not a member of category {category}")]
    NotAMember { node: NodeId, category: CategoryId },
    #[error("category {0} is a sub-cluster; sub-clusters cannot be split further")]
    NestedSubcategory(CategoryId),
    #[error("category {0} is listed twice")]
    DuplicateCategory(CategoryId),
    #[error("categories of different kinds cannot share a super-category")]
    MixedKinds,
    #[error("category {0} already has a parent")]
    AlreadyParented(CategoryId),
    #[error("research unit {0} already records this triad")]
    DuplicateTriad(RuId),
    #[error("operation would leave the corpus invalid:\n{0}")]
    Invalid(ValidationReport),
    #[error("replay failed: {0}")]
    Replay(#[from] ReplayError),
}

/// What a committed operation was asked to do.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Operation {
    AddCode {
        kind: Kind,
        text: String,
        ru: RuId,
    },
    AddTriad {
        ru: RuId,
        p: NodeId,
        a: NodeId,
        d: NodeId,
    },
    GroupPair {
        subject: NodeId,
        neighbor: NodeId,
        category_text: Option<String>,
    },
    SpawnCategory {
        subject: NodeId,
        neighbor: NodeId,
        text: String,
    },
    KeepOrphan {
        node: NodeId,
    },
    CreateSubcategory {
        category: CategoryId,
        members: Vec<NodeId>,
        text: String,
    },
    CreateSupercategory {
        children: Vec<CategoryId>,
        text: String,
    },
    ReviseCategoryText {
        category: CategoryId,
        text: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commit {
    /// Revision reached by this commit (1-based).
    pub revision: u64,
    pub operation: Operation,
    pub changes: Vec<Change>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolStatus {
    New,
    Reviewed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PoolEntry {
    pub node: Node,
    pub status: PoolStatus,
}

#[derive(Debug, Clone)]
pub struct Session {
    initial: Corpus,
    corpus: Corpus,
    reviewed: BTreeSet<NodeId>,
    journal: Vec<Commit>,
}

impl Default for Session {
    fn default() -> Self {
        Session {
            initial: Corpus::new(),
            corpus: Corpus::new(),
            reviewed: BTreeSet::new(),
            journal: Vec::new(),
        }
    }
}

fn nonempty(text: &str, what: &'static str) -> Result<String, SessionError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(SessionError::EmptyText(what));
    }
    if trimmed.contains(['\n', '\r']) {
        return Err(SessionError::MultilineText(what));
    }
    Ok(trimmed.to_owned())
}

impl Session {
    /// Opens a session over `corpus`, which must validate without errors.
    pub fn new(corpus: Corpus) -> Result<Self, SessionError> {
        let report = validate_corpus(&corpus);
        if !report.is_clean() {
            return Err(SessionError::Invalid(report));
        }
        Ok(Session {
            initial: corpus.clone(),
            corpus,
            reviewed: BTreeSet::new(),
            journal: Vec::new(),
        })
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn initial(&self) -> &Corpus {
        &self.initial
    }

    pub fn revision(&self) -> u64 {
        self.journal.len() as u64
    }

    pub fn journal(&self) -> &[Commit] {
        &self.journal
    }

    pub fn reviewed(&self) -> &BTreeSet<NodeId> {
        &self.reviewed
    }

    pub fn changes(&self) -> impl Iterator<Item = &Change> {
        self.journal.iter().flat_map(|c| c.changes.iter())
    }

    pub fn relabel_log(&self) -> impl Iterator<Item = &RelabelEntry> {
        self.changes().filter_map(|c| match c {
            Change::Relabeled(entry) => Some(entry),
            _ => None,
        })
    }

    /// Relabel log as CSV `node_id,old_label,new_label,reason`.
    pub fn relabel_log_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer
            .write_record(["node_id", "old_label", "new_label", "reason"])
            .expect("in-memory write");
        for entry in self.relabel_log() {
            writer
                .write_record([
                    entry.node.0.to_string(),
                    entry.old.render(),
                    entry.new.render(),
                    entry.reason.as_str().to_owned(),
                ])
                .expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory writer")).expect("ascii output")
    }

    /// Ungrouped codes, newest first.
    pub fn pool(&self, kind: Option<Kind>) -> Vec<PoolEntry> {
        let membership = self.corpus.membership();
        self.corpus
            .nodes
            .values()
            .rev()
            .filter(|n| kind.is_none_or(|k| n.kind == k) && !membership.contains_key(&n.id))
            .map(|n| PoolEntry {
                node: n.clone(),
                status: if self.reviewed.contains(&n.id) {
                    PoolStatus::Reviewed
                } else {
                    PoolStatus::New
                },
            })
            .collect()
    }

    /// Replays the journal from the initial corpus.
    pub fn replay(&self) -> Result<Corpus, ReplayError> {
        replay(&self.initial, self.changes())
    }

    fn commit(&mut self, operation: Operation, changes: Vec<Change>) -> Result<(), SessionError> {
        if changes.is_empty() {
            return Ok(());
        }
        let mut next = self.corpus.clone();
        for change in &changes {
            apply(&mut next, change)?;
        }
        let report = validate_corpus(&next);
        if !report.is_clean() {
            return Err(SessionError::Invalid(report));
        }
        for change in &changes {
            if let Change::MarkedReviewed { node } = change {
                self.reviewed.insert(*node);
            }
        }
        self.corpus = next;
        self.journal.push(Commit {
            revision: self.journal.len() as u64 + 1,
            operation,
            changes,
        });
        Ok(())
    }

    fn node(&self, id: NodeId) -> Result<&Node, SessionError> {
        self.corpus.node(id).ok_or(SessionError::UnknownNode(id))
    }

    fn category(&self, id: CategoryId) -> Result<&CategoryNode, SessionError> {
        self.corpus
            .category(id)
            .ok_or(SessionError::UnknownCategory(id))
    }

    fn ungrouped(&self, id: NodeId) -> Result<&Node, SessionError> {
        let node = self.node(id)?;
        if self.corpus.is_grouped(id) {
            return Err(SessionError::AlreadyGrouped(id));
        }
        Ok(node)
    }

    fn same_kind(&self, expected: Kind, id: NodeId) -> Result<&Node, SessionError> {
        let node = self.node(id)?;
        if node.kind != expected {
            return Err(SessionError::KindMismatch {
                node: id,
                expected,
                found: node.kind,
            });
        }
        Ok(node)
    }

    /// Puts a code into the pool of ungrouped codes. Re-adding an existing
    /// `(kind, text)` pair only records the extra source.
    pub fn add_code(&mut self, kind: Kind, text: &str, ru: &RuId) -> Result<Node, SessionError> {
        let text = nonempty(text, "code text")?;
        nonempty(ru.as_str(), "research unit id")?;
        let operation = Operation::AddCode {
            kind,
            text: text.clone(),
            ru: ru.clone(),
        };
        let existing = self
            .corpus
            .nodes_of(kind)
            .find(|n| n.code == text)
            .map(|n| (n.id, n.sources.contains(ru)));
        if let Some((id, known)) = existing {
            if !known {
                self.commit(
                    operation,
                    vec![Change::SourceAdded {
                        node: id,
                        ru: ru.clone(),
                    }],
                )?;
            }
            return Ok(self.corpus.nodes[&id].clone());
        }
        let node = Node {
            id: self.corpus.next_node_id(),
            kind,
            code: text,
            label: Label::category(kind, self.corpus.counters.ungrouped[kind] + 1),
            sources: BTreeSet::from([ru.clone()]),
        };
        self.commit(operation, vec![Change::NodeAdded(node.clone())])?;
        Ok(node)
    }

    /// Records a causal chain for a research unit, creating the unit if needed.
    pub fn add_triad(
        &mut self,
        ru: &RuId,
        p: NodeId,
        a: NodeId,
        d: NodeId,
    ) -> Result<Triad, SessionError> {
        nonempty(ru.as_str(), "research unit id")?;
        self.same_kind(Kind::Problem, p)?;
        self.same_kind(Kind::Approach, a)?;
        self.same_kind(Kind::Development, d)?;
        let triad = Triad {
            ru: ru.clone(),
            p,
            a,
            d,
        };
        let mut changes = Vec::new();
        match self.corpus.research_unit(ru) {
            Some(unit) if unit.triads.iter().any(|t| (t.p, t.a, t.d) == (p, a, d)) => {
                return Err(SessionError::DuplicateTriad(ru.clone()));
            }
            Some(_) => {}
            None => changes.push(Change::ResearchUnitAdded { ru: ru.clone() }),
        }
        changes.push(Change::TriadAdded(triad.clone()));
        for id in [p, a, d] {
            if !self.corpus.nodes[&id].sources.contains(ru) {
                changes.push(Change::SourceAdded {
                    node: id,
                    ru: ru.clone(),
                });
            }
        }
        self.commit(
            Operation::AddTriad {
                ru: ru.clone(),
                p,
                a,
                d,
            },
            changes,
        )?;
        Ok(triad)
    }

    /// Groups the ungrouped `subject` with its nearest `neighbor`.
    ///
    /// An ungrouped neighbour founds a new category named `category_text`
    /// (neighbour item 1, subject item 2). A grouped neighbour is joined at the
    /// next free item; `category_text`, when given, replaces that category's
    /// text.
    pub fn group_pair(
        &mut self,
        subject: NodeId,
        neighbor: NodeId,
        category_text: Option<&str>,
    ) -> Result<CategoryNode, SessionError> {
        let alpha = self.ungrouped(subject)?.clone();
        if subject == neighbor {
            return Err(SessionError::SameNode);
        }
        let beta = self.same_kind(alpha.kind, neighbor)?.clone();
        let operation = Operation::GroupPair {
            subject,
            neighbor,
            category_text: category_text.map(str::to_owned),
        };

        let (category_id, changes) = match self.corpus.category_of(neighbor) {
            None => {
                let text = match category_text {
                    None => return Err(SessionError::MissingCategoryText),
                    Some(t) => nonempty(t, "category text")?,
                };
                let id = self.corpus.next_category_id();
                let label =
                    Label::category(alpha.kind, self.corpus.counters.category[alpha.kind] + 1);
                let changes = vec![
                    Change::CategoryCreated {
                        id,
                        kind: alpha.kind,
                        label,
                        text,
                        parent: None,
                    },
                    Change::MembersSet {
                        category: id,
                        members: vec![neighbor, subject],
                    },
                    relabel(&beta, label.with_item(1), RelabelReason::GroupedAsNeighbor),
                    relabel(&alpha, label.with_item(2), RelabelReason::GroupedAsSubject),
                ];
                (id, changes)
            }
            Some(category) => {
                let mut members = category.members.clone();
                members.push(subject);
                let mut changes = vec![
                    Change::MembersSet {
                        category: category.id,
                        members: members.clone(),
                    },
                    relabel(
                        &alpha,
                        category.label.with_item(members.len() as u32),
                        RelabelReason::Joined,
                    ),
                ];
                if let Some(text) = category_text {
                    changes.push(Change::TextRevised {
                        category: category.id,
                        old: category.category_code.clone(),
                        new: nonempty(text, "category text")?,
                    });
                }
                (category.id, changes)
            }
        };
        self.commit(operation, changes)?;
        Ok(self.corpus.categories[&category_id].clone())
    }

    /// Moves the grouped `neighbor` out of its category into a new category
    /// shared with the ungrouped `subject`. The old category is renumbered, or
    /// deleted if it is left with neither members nor sub-clusters.
    pub fn spawn_category(
        &mut self,
        subject: NodeId,
        neighbor: NodeId,
        text: &str,
    ) -> Result<CategoryNode, SessionError> {
        let alpha = self.ungrouped(subject)?.clone();
        if subject == neighbor {
            return Err(SessionError::SameNode);
        }
        let beta = self.same_kind(alpha.kind, neighbor)?.clone();
        let old = self
            .corpus
            .category_of(neighbor)
            .ok_or(SessionError::NotGrouped(neighbor))?
            .clone();
        let text = nonempty(text, "category text")?;

        let survivors: Vec<NodeId> = old
            .members
            .iter()
            .copied()
            .filter(|&m| m != neighbor)
            .collect();
        let mut changes = self.regroup(&old, survivors.clone(), RelabelReason::Compacted);
        if survivors.is_empty() && self.corpus.children(old.id).next().is_none() {
            changes.push(Change::CategoryRetired { category: old.id });
        }

        let id = self.corpus.next_category_id();
        let label = Label::category(alpha.kind, self.corpus.counters.category[alpha.kind] + 1);
        changes.extend([
            Change::CategoryCreated {
                id,
                kind: alpha.kind,
                label,
                text: text.clone(),
                parent: None,
            },
            Change::MembersSet {
                category: id,
                members: vec![neighbor, subject],
            },
            relabel(&beta, label.with_item(1), RelabelReason::Spawned),
            relabel(&alpha, label.with_item(2), RelabelReason::GroupedAsSubject),
        ]);
        self.commit(
            Operation::SpawnCategory {
                subject,
                neighbor,
                text,
            },
            changes,
        )?;
        Ok(self.corpus.categories[&id].clone())
    }

    /// Leaves an ungrouped code in the pool, marked as reviewed.
    pub fn keep_orphan(&mut self, node: NodeId) -> Result<NodeId, SessionError> {
        self.ungrouped(node)?;
        self.commit(
            Operation::KeepOrphan { node },
            vec![Change::MarkedReviewed { node }],
        )?;
        Ok(node)
    }

    /// Splits `members` of a top-level category into a new sub-cluster
    /// `x.y`, relabelling them `x.y1, x.y2, ...` in the given order.
    pub fn create_subcategory(
        &mut self,
        category: CategoryId,
        members: &[NodeId],
        text: &str,
    ) -> Result<CategoryNode, SessionError> {
        let parent = self.category(category)?.clone();
        if parent.label.subcategory.is_some() {
            return Err(SessionError::NestedSubcategory(category));
        }
        if members.is_empty() {
            return Err(SessionError::EmptyMembers);
        }
        let mut seen = BTreeSet::new();
        for &m in members {
            self.node(m)?;
            if !seen.insert(m) {
                return Err(SessionError::DuplicateMember(m));
            }
            if !parent.members.contains(&m) {
                return Err(SessionError::NotAMember { node: m, category });
            }
        }
        let text = nonempty(text, "sub-cluster text")?;

        let next_sub = self
            .corpus
            .categories_of(parent.kind)
            .filter(|c| c.label.category == parent.label.category)
            .filter_map(|c| c.label.subcategory)
            .max()
            .unwrap_or(0)
            + 1;
        let label = Label::subcategory(parent.kind, parent.label.category, next_sub);
        let id = self.corpus.next_category_id();

        let survivors: Vec<NodeId> = parent
            .members
            .iter()
            .copied()
            .filter(|m| !seen.contains(m))
            .collect();
        let mut changes = self.regroup(&parent, survivors, RelabelReason::Compacted);
        changes.push(Change::CategoryCreated {
            id,
            kind: parent.kind,
            label,
            text: text.clone(),
            parent: Some(category),
        });
        changes.push(Change::MembersSet {
            category: id,
            members: members.to_vec(),
        });
        for (k, &m) in members.iter().enumerate() {
            changes.push(relabel(
                &self.corpus.nodes[&m],
                label.with_item(k as u32 + 1),
                RelabelReason::Subcategorized,
            ));
        }
        self.commit(
            Operation::CreateSubcategory {
                category,
                members: members.to_vec(),
                text,
            },
            changes,
        )?;
        Ok(self.corpus.categories[&id].clone())
    }

    /// Creates a member-less super-category over top-level categories of one
    /// kind, for taxonomies.
    pub fn create_supercategory(
        &mut self,
        children: &[CategoryId],
        text: &str,
    ) -> Result<CategoryNode, SessionError> {
        let first = self.category(*children.first().ok_or(SessionError::EmptyMembers)?)?;
        let kind = first.kind;
        let mut seen = BTreeSet::new();
        for &child in children {
            let c = self.category(child)?;
            if !seen.insert(child) {
                return Err(SessionError::DuplicateCategory(child));
            }
            if c.label.subcategory.is_some() {
                return Err(SessionError::NestedSubcategory(child));
            }
            if c.parent.is_some() {
                return Err(SessionError::AlreadyParented(child));
            }
            if c.kind != kind {
                return Err(SessionError::MixedKinds);
            }
        }
        let text = nonempty(text, "category text")?;
        let id = self.corpus.next_category_id();
        let label = Label::category(kind, self.corpus.counters.category[kind] + 1);
        let mut changes = vec![Change::CategoryCreated {
            id,
            kind,
            label,
            text: text.clone(),
            parent: None,
        }];
        changes.extend(children.iter().map(|&child| Change::ParentSet {
            category: child,
            parent: Some(id),
        }));
        self.commit(
            Operation::CreateSupercategory {
                children: children.to_vec(),
                text,
            },
            changes,
        )?;
        Ok(self.corpus.categories[&id].clone())
    }

    /// Replaces a category's text. An identical text is still logged.
    pub fn revise_category_text(
        &mut self,
        category: CategoryId,
        text: &str,
    ) -> Result<CategoryNode, SessionError> {
        let current = self.category(category)?;
        let new = nonempty(text, "category text")?;
        let change = Change::TextRevised {
            category,
            old: current.category_code.clone(),
            new: new.clone(),
        };
        self.commit(
            Operation::ReviseCategoryText {
                category,
                text: new,
            },
            vec![change],
        )?;
        Ok(self.corpus.categories[&category].clone())
    }

    /// Sets a category's member list and relabels members whose position changed.
    fn regroup(
        &self,
        category: &CategoryNode,
        members: Vec<NodeId>,
        reason: RelabelReason,
    ) -> Vec<Change> {
        let mut changes = Vec::new();
        for (k, &m) in members.iter().enumerate() {
            let node = &self.corpus.nodes[&m];
            let label = category.label.with_item(k as u32 + 1);
            if node.label != label {
                changes.push(relabel(node, label, reason));
            }
        }
        changes.insert(
            0,
            Change::MembersSet {
                category: category.id,
                members,
            },
        );
        changes
    }
}

fn relabel(node: &Node, new: Label, reason: RelabelReason) -> Change {
    Change::Relabeled(RelabelEntry {
        node: node.id,
        old: node.label,
        new,
        reason,
    })
}

#[cfg(test)]
mod tests;
