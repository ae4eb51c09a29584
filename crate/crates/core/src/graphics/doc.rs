//! Layout-free graph documents and their DOT rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use petgraph::algo::is_cyclic_directed;
use petgraph::graph::DiGraph;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RankDir {
    /// Columns run left to right.
    LR,
    /// Levels run top to bottom.
    TB,
}

impl RankDir {
    fn as_str(self) -> &'static str {
        match self {
            RankDir::LR => "LR",
            RankDir::TB => "TB",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphNode {
    pub id: String,
    pub label: String,
    /// Layer index: the P/A/D column, or the depth in a taxonomy.
    pub rank: usize,
}

/// A directed polyline through two or more nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphEdge {
    pub path: Vec<String>,
    pub count: u64,
    pub penwidth: f64,
    pub label: Option<String>,
}

impl GraphEdge {
    pub fn from(&self) -> &str {
        &self.path[0]
    }

    pub fn to(&self) -> &str {
        &self.path[self.path.len() - 1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphDoc {
    pub name: String,
    pub rankdir: RankDir,
    /// Number of layers, including empty ones.
    pub ranks: usize,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

pub(crate) fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl GraphDoc {
    pub fn new(name: &str, rankdir: RankDir, ranks: usize) -> Self {
        GraphDoc {
            name: name.to_owned(),
            rankdir,
            ranks,
            nodes: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn node(&self, id: &str) -> Option<&GraphNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn rank(&self, rank: usize) -> impl Iterator<Item = &GraphNode> {
        self.nodes.iter().filter(move |n| n.rank == rank)
    }

    /// Every consecutive pair on every edge path.
    pub fn segments(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges
            .iter()
            .flat_map(|e| e.path.windows(2).map(|w| (w[0].as_str(), w[1].as_str())))
    }

    pub fn is_acyclic(&self) -> bool {
        let mut graph = DiGraph::<(), ()>::new();
        let index: BTreeMap<&str, _> = self
            .nodes
            .iter()
            .map(|n| (n.id.as_str(), graph.add_node(())))
            .collect();
        for (a, b) in self.segments() {
            match (index.get(a), index.get(b)) {
                (Some(&a), Some(&b)) => {
                    graph.add_edge(a, b, ());
                }
                _ => return false,
            }
        }
        !is_cyclic_directed(&graph)
    }

    /// Whether every segment steps from one layer to the next.
    pub fn is_layered(&self) -> bool {
        self.segments()
            .all(|(a, b)| match (self.node(a), self.node(b)) {
                (Some(a), Some(b)) => b.rank == a.rank + 1,
                _ => false,
            })
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph {} {{", quote(&self.name));
        let _ = writeln!(out, "  rankdir={};", self.rankdir.as_str());
        let _ = writeln!(out, "  node [shape=box];");
        for rank in 0..self.ranks {
            let ids: Vec<String> = self.rank(rank).map(|n| quote(&n.id)).collect();
            if ids.is_empty() {
                let _ = writeln!(out, "  {{ rank=same; }}");
            } else {
                let _ = writeln!(out, "  {{ rank=same; {}; }}", ids.join("; "));
            }
        }
        for node in &self.nodes {
            let _ = writeln!(out, "  {} [label={}];", quote(&node.id), quote(&node.label));
        }
        for edge in &self.edges {
            let path: Vec<String> = edge.path.iter().map(|id| quote(id)).collect();
            let _ = write!(out, "  {} [", path.join(" -> "));
            if let Some(label) = &edge.label {
                let _ = write!(out, "label={}, ", quote(label));
            }
            let _ = writeln!(out, "penwidth={:.2}];", edge.penwidth);
        }
        out.push_str("}\n");
        out
    }
}
