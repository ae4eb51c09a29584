//! Domain types: kinds, nodes, category-nodes, triads, research units and
//! the corpus that owns them.
//!
//! Nodes and categories are addressed by stable numeric ids. Labels are
//! display attributes and may change while codes are being categorized;
//! triads always refer to ids, so they survive relabeling.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::label::Label;

/// Structural code of a node. The declaration order is the causal order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "P")]
    Problem,
    #[serde(rename = "A")]
    Approach,
    #[serde(rename = "D")]
    Development,
}

impl Kind {
    pub const ALL: [Kind; 3] = [Kind::Problem, Kind::Approach, Kind::Development];

    pub fn symbol(self) -> char {
        match self {
            Kind::Problem => 'P',
            Kind::Approach => 'A',
            Kind::Development => 'D',
        }
    }

    pub fn from_symbol(c: char) -> Option<Kind> {
        match c {
            'P' => Some(Kind::Problem),
            'A' => Some(Kind::Approach),
            'D' => Some(Kind::Development),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Problem => "problem",
            Kind::Approach => "approach",
            Kind::Development => "development",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl std::str::FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.trim().chars();
        match (
            chars
                .next()
                .and_then(|c| Kind::from_symbol(c.to_ascii_uppercase())),
            chars.next(),
        ) {
            (Some(kind), None) => Ok(kind),
            _ => match s.trim().to_ascii_lowercase().as_str() {
                "problem" => Ok(Kind::Problem),
                "approach" => Ok(Kind::Approach),
                "development" => Ok(Kind::Development),
                _ => Err(format!("unknown kind `{s}` (expected P, A or D)")),
            },
        }
    }
}

/// One value per kind. Fields are declared in serialized-key order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerKind<T> {
    #[serde(rename = "A")]
    pub approach: T,
    #[serde(rename = "D")]
    pub development: T,
    #[serde(rename = "P")]
    pub problem: T,
}

impl<T> Index<Kind> for PerKind<T> {
    type Output = T;

    fn index(&self, kind: Kind) -> &T {
        match kind {
            Kind::Problem => &self.problem,
            Kind::Approach => &self.approach,
            Kind::Development => &self.development,
        }
    }
}

impl<T> IndexMut<Kind> for PerKind<T> {
    fn index_mut(&mut self, kind: Kind) -> &mut T {
        match kind {
            Kind::Problem => &mut self.problem,
            Kind::Approach => &mut self.approach,
            Kind::Development => &mut self.development,
        }
    }
}

macro_rules! id_type {
    ($name:ident, $prefix:literal) => {
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(NodeId, "n");
id_type!(CategoryId, "c");

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuId(pub String);

impl RuId {
    pub fn new(id: impl Into<String>) -> Self {
        RuId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RuId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One mined code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Node {
    pub id: NodeId,
    pub kind: Kind,
    pub code: String,
    pub label: Label,
    pub sources: BTreeSet<RuId>,
}

/// A category ("proximating meaning") grouping codes of one kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CategoryNode {
    pub id: CategoryId,
    pub kind: Kind,
    pub category_code: String,
    /// Never carries an item number.
    pub label: Label,
    /// Position `k` (0-based) holds the member labelled with item `k + 1`.
    pub members: Vec<NodeId>,
    pub parent: Option<CategoryId>,
}

/// A causal chain P -> A -> D recorded in one research unit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Triad {
    pub ru: RuId,
    pub p: NodeId,
    pub a: NodeId,
    pub d: NodeId,
}

impl Triad {
    pub fn slots(&self) -> [(Kind, NodeId); 3] {
        [
            (Kind::Problem, self.p),
            (Kind::Approach, self.a),
            (Kind::Development, self.d),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResearchUnit {
    pub id: RuId,
    pub citation: String,
    pub triads: Vec<Triad>,
}

/// Monotone numbering state. Provisional numbers of ungrouped codes and
/// category numbers are separate sequences; neither is ever reused.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub category: PerKind<u32>,
    pub ungrouped: PerKind<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub research_units: Vec<ResearchUnit>,
    pub nodes: BTreeMap<NodeId, Node>,
    pub categories: BTreeMap<CategoryId, CategoryNode>,
    pub counters: Counters,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.research_units.is_empty() && self.nodes.is_empty() && self.categories.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(&id)
    }

    pub fn category(&self, id: CategoryId) -> Option<&CategoryNode> {
        self.categories.get(&id)
    }

    pub fn research_unit(&self, id: &RuId) -> Option<&ResearchUnit> {
        self.research_units.iter().find(|ru| &ru.id == id)
    }

    pub fn triads(&self) -> impl Iterator<Item = &Triad> {
        self.research_units.iter().flat_map(|ru| ru.triads.iter())
    }

    pub fn triad_count(&self) -> usize {
        self.research_units.iter().map(|ru| ru.triads.len()).sum()
    }

    pub fn nodes_of(&self, kind: Kind) -> impl Iterator<Item = &Node> {
        self.nodes.values().filter(move |n| n.kind == kind)
    }

    pub fn categories_of(&self, kind: Kind) -> impl Iterator<Item = &CategoryNode> {
        self.categories.values().filter(move |c| c.kind == kind)
    }

    /// Category that lists `node` among its members, if any.
    pub fn category_of(&self, node: NodeId) -> Option<&CategoryNode> {
        self.categories.values().find(|c| c.members.contains(&node))
    }

    /// Direct membership map (node -> category).
    pub fn membership(&self) -> BTreeMap<NodeId, CategoryId> {
        let mut map = BTreeMap::new();
        for category in self.categories.values() {
            for &member in &category.members {
                map.entry(member).or_insert(category.id);
            }
        }
        map
    }

    pub fn is_grouped(&self, node: NodeId) -> bool {
        self.category_of(node).is_some()
    }

    pub fn node_by_label(&self, label: &Label) -> Option<&Node> {
        self.nodes.values().find(|n| &n.label == label)
    }

    pub fn category_by_label(&self, label: &Label) -> Option<&CategoryNode> {
        self.categories.values().find(|c| &c.label == label)
    }

    pub fn children(&self, id: CategoryId) -> impl Iterator<Item = &CategoryNode> {
        self.categories
            .values()
            .filter(move |c| c.parent == Some(id))
    }

    /// A category with no members of its own whose children carry other
    /// category numbers: a taxonomy super-category, not a metric row.
    pub fn is_super_category(&self, category: &CategoryNode) -> bool {
        category.members.is_empty()
            && self
                .children(category.id)
                .any(|child| child.label.category != category.label.category)
    }

    /// Categories that receive a row in the frequency tables: top-level
    /// labels, excluding member-less super-categories. Ordered by label.
    pub fn metric_categories(&self, kind: Kind) -> Vec<&CategoryNode> {
        let mut out: Vec<&CategoryNode> = self
            .categories_of(kind)
            .filter(|c| c.label.subcategory.is_none() && !self.is_super_category(c))
            .collect();
        out.sort_by_key(|c| c.label);
        out
    }

    /// Maps every grouped node to the metric category carrying its category
    /// number. Ungrouped nodes are absent.
    pub fn metric_category_map(&self) -> BTreeMap<NodeId, CategoryId> {
        let mut by_label: BTreeMap<Label, CategoryId> = BTreeMap::new();
        for c in self.categories.values() {
            if c.label.subcategory.is_none() {
                by_label.insert(c.label, c.id);
            }
        }
        let mut map = BTreeMap::new();
        for (node, _) in self.membership() {
            if let Some(n) = self.nodes.get(&node) {
                if let Some(&cat) = by_label.get(&n.label.top_category()) {
                    map.insert(node, cat);
                }
            }
        }
        map
    }

    pub fn next_node_id(&self) -> NodeId {
        NodeId(self.nodes.keys().next_back().map_or(1, |id| id.0 + 1))
    }

    pub fn next_category_id(&self) -> CategoryId {
        CategoryId(self.categories.keys().next_back().map_or(1, |id| id.0 + 1))
    }

    /// Raises the counters to cover every number currently in use.
    pub fn sync_counters(&mut self) {
        let membership = self.membership();
        for node in self.nodes.values() {
            if !membership.contains_key(&node.id) && !node.label.is_member() {
                let c = &mut self.counters.ungrouped[node.kind];
                *c = (*c).max(node.label.category);
            }
        }
        for category in self.categories.values() {
            let c = &mut self.counters.category[category.kind];
            *c = (*c).max(category.label.category);
        }
    }
}
