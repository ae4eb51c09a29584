//! Graph documents over a corpus: the causality DAG, the triads graphic, the
//! per-problem P-A dyad graphics and the category taxonomies.
//!
//! Emitters return a [`GraphDoc`], rendered with [`GraphDoc::to_dot`] or
//! [`render_svg`]. Output depends only on the corpus and options, so two
//! emissions of the same input are byte-identical.

mod doc;
mod svg;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

pub use doc::{GraphDoc, GraphEdge, GraphNode, RankDir};
pub use svg::{builtin_svg, external_svg, render_svg, LayoutError, SvgLayout, LAYOUT_ENV};

use crate::label::Label;
use crate::metrics::{self, Metric, Ratio};
use crate::model::{CategoryId, Corpus, Kind, NodeId, RuId};
use crate::validate::parent_cycles;

pub const DEFAULT_MIN_WIDTH: f64 = 1.0;
pub const DEFAULT_MAX_WIDTH: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphicsError {
    #[error("no counts to scale")]
    EmptyCounts,
    #[error("line widths must satisfy 0 < min < max, got {min}..{max}")]
    InvalidWidths { min: f64, max: f64 },
    #[error("no category labelled {0}")]
    UnknownCategory(String),
    #[error("{label} is not a {expected} category")]
    KindMismatch { label: Label, expected: Kind },
    #[error("{0} is a sub-cluster or super-category, not a frequency category")]
    NotMetricCategory(Label),
    #[error("parent links form a cycle through {}", .0.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", "))]
    Cycle(Vec<CategoryId>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Widths {
    pub min: f64,
    pub max: f64,
}

impl Default for Widths {
    fn default() -> Self {
        Widths {
            min: DEFAULT_MIN_WIDTH,
            max: DEFAULT_MAX_WIDTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregatedLink {
    pub from: Label,
    pub to: Label,
    pub count: u64,
    pub thickness: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CategoryTriad {
    pub p: Label,
    pub a: Label,
    pub d: Label,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct DagOptions {
    /// Draw individual nodes instead of categories.
    pub node_level: bool,
    pub widths: Widths,
}

/// How a dyad graphic counts a (problem, approach) pairing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DyadCount {
    /// Every triad counts.
    #[default]
    Occurrence,
    /// Each research unit counts a pairing at most once.
    RuBinary,
}

/// Affine map from `[min count, max count]` onto `[min_w, max_w]`. When all
/// counts are equal every count maps to `min_w`.
pub fn thickness_scale(
    counts: &[u64],
    min_w: f64,
    max_w: f64,
) -> Result<BTreeMap<u64, f64>, GraphicsError> {
    if !(min_w.is_finite() && max_w.is_finite() && 0.0 < min_w && min_w < max_w) {
        return Err(GraphicsError::InvalidWidths {
            min: min_w,
            max: max_w,
        });
    }
    let lo = *counts.iter().min().ok_or(GraphicsError::EmptyCounts)?;
    let hi = *counts.iter().max().ok_or(GraphicsError::EmptyCounts)?;
    Ok(counts
        .iter()
        .map(|&c| {
            let w = if hi == lo {
                min_w
            } else {
                min_w + (max_w - min_w) * (c - lo) as f64 / (hi - lo) as f64
            };
            (c, w)
        })
        .collect())
}

fn scale(
    counts: impl Iterator<Item = u64>,
    widths: Widths,
) -> Result<BTreeMap<u64, f64>, GraphicsError> {
    let counts: Vec<u64> = counts.collect();
    if counts.is_empty() {
        return Ok(BTreeMap::new());
    }
    thickness_scale(&counts, widths.min, widths.max)
}

/// Label of the frequency category holding each grouped node.
fn category_labels(corpus: &Corpus) -> BTreeMap<NodeId, Label> {
    let rows: BTreeSet<CategoryId> = Kind::ALL
        .iter()
        .flat_map(|&k| corpus.metric_categories(k))
        .map(|c| c.id)
        .collect();
    corpus
        .metric_category_map()
        .into_iter()
        .filter(|(_, c)| rows.contains(c))
        .map(|(n, c)| (n, corpus.categories[&c].label))
        .collect()
}

/// Each triad as `(ru, [p, a, d])` at the chosen granularity; triads with an
/// unresolved slot yield `None` in that slot.
fn resolved_triads(corpus: &Corpus, node_level: bool) -> Vec<(&RuId, [Option<Label>; 3])> {
    let cats = category_labels(corpus);
    let resolve = |id: NodeId| {
        if node_level {
            corpus.node(id).map(|n| n.label)
        } else {
            cats.get(&id).copied()
        }
    };
    corpus
        .triads()
        .map(|t| (&t.ru, [resolve(t.p), resolve(t.a), resolve(t.d)]))
        .collect()
}

fn link_counts(corpus: &Corpus, node_level: bool) -> BTreeMap<(Label, Label), u64> {
    let mut counts = BTreeMap::new();
    for (_, [p, a, d]) in resolved_triads(corpus, node_level) {
        for pair in [(p, a), (a, d)] {
            if let (Some(x), Some(y)) = pair {
                *counts.entry((x, y)).or_insert(0) += 1;
            }
        }
    }
    counts
}

fn links(
    corpus: &Corpus,
    node_level: bool,
    widths: Widths,
) -> Result<Vec<AggregatedLink>, GraphicsError> {
    let counts = link_counts(corpus, node_level);
    let widths = scale(counts.values().copied(), widths)?;
    Ok(counts
        .into_iter()
        .map(|((from, to), count)| AggregatedLink {
            from,
            to,
            count,
            thickness: widths[&count],
        })
        .collect())
}

/// Category-to-category links, P -> A then A -> D, ordered by labels. Each
/// link counts the triads passing through both of its ends.
pub fn aggregate_links(corpus: &Corpus) -> Vec<AggregatedLink> {
    links(corpus, false, Widths::default()).expect("default widths are valid")
}

/// Distinct category-level triads with the number of node triads behind each.
pub fn category_triads(corpus: &Corpus) -> Vec<CategoryTriad> {
    let mut counts: BTreeMap<[Label; 3], u64> = BTreeMap::new();
    for (_, slots) in resolved_triads(corpus, false) {
        if let [Some(p), Some(a), Some(d)] = slots {
            *counts.entry([p, a, d]).or_insert(0) += 1;
        }
    }
    counts
        .into_iter()
        .map(|([p, a, d], count)| CategoryTriad { p, a, d, count })
        .collect()
}

fn rank_of(kind: Kind) -> usize {
    match kind {
        Kind::Problem => 0,
        Kind::Approach => 1,
        Kind::Development => 2,
    }
}

fn category_nodes(corpus: &Corpus) -> Vec<GraphNode> {
    Kind::ALL
        .iter()
        .flat_map(|&k| corpus.metric_categories(k))
        .map(|c| GraphNode {
            id: c.label.to_string(),
            label: format!("{}: {}", c.label, c.category_code),
            rank: rank_of(c.kind),
        })
        .collect()
}

fn individual_nodes(corpus: &Corpus) -> Vec<GraphNode> {
    let mut nodes: Vec<GraphNode> = corpus
        .nodes
        .values()
        .map(|n| GraphNode {
            id: n.label.to_string(),
            label: format!("{}: {}", n.label, n.code),
            rank: rank_of(n.kind),
        })
        .collect();
    nodes.sort_by(|a, b| (a.rank, &a.id).cmp(&(b.rank, &b.id)));
    nodes
}

/// Three columns of categories (or nodes) joined by aggregated links whose
/// line width grows with the link count.
pub fn emit_causality_dag(
    corpus: &Corpus,
    options: &DagOptions,
) -> Result<GraphDoc, GraphicsError> {
    let mut doc = GraphDoc::new("causality_dag", RankDir::LR, 3);
    doc.nodes = if options.node_level {
        individual_nodes(corpus)
    } else {
        category_nodes(corpus)
    };
    doc.edges = links(corpus, options.node_level, options.widths)?
        .into_iter()
        .map(|l| GraphEdge {
            path: vec![l.from.to_string(), l.to.to_string()],
            count: l.count,
            penwidth: l.thickness,
            label: Some(l.count.to_string()),
        })
        .collect();
    Ok(doc)
}

/// One P -> A -> D polyline per distinct category triad, bending at the
/// approach, with width by triad count.
pub fn emit_triads_graphic(corpus: &Corpus, widths: Widths) -> Result<GraphDoc, GraphicsError> {
    let triads = category_triads(corpus);
    let scale = scale(triads.iter().map(|t| t.count), widths)?;
    let mut doc = GraphDoc::new("triads", RankDir::LR, 3);
    doc.nodes = category_nodes(corpus);
    doc.edges = triads
        .into_iter()
        .map(|t| GraphEdge {
            path: vec![t.p.to_string(), t.a.to_string(), t.d.to_string()],
            count: t.count,
            penwidth: scale[&t.count],
            label: Some(t.count.to_string()),
        })
        .collect();
    Ok(doc)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadShare {
    pub approach: Label,
    pub count: u64,
    pub share: Ratio,
}

fn problem_category(corpus: &Corpus, problem: &str) -> Result<Label, GraphicsError> {
    let label = Label::parse_category(problem)
        .map_err(|_| GraphicsError::UnknownCategory(problem.to_owned()))?;
    let category = corpus
        .category_by_label(&label)
        .ok_or_else(|| GraphicsError::UnknownCategory(problem.to_owned()))?;
    if category.kind != Kind::Problem {
        return Err(GraphicsError::KindMismatch {
            label,
            expected: Kind::Problem,
        });
    }
    if !corpus
        .metric_categories(Kind::Problem)
        .iter()
        .any(|c| c.id == category.id)
    {
        return Err(GraphicsError::NotMetricCategory(label));
    }
    Ok(label)
}

/// Approach categories paired with `problem` and their share of its triads
/// (or of its research-unit pairings under [`DyadCount::RuBinary`]).
pub fn dyad_shares(
    corpus: &Corpus,
    problem: &str,
    count: DyadCount,
) -> Result<Vec<DyadShare>, GraphicsError> {
    let problem = problem_category(corpus, problem)?;
    let mut occurrences: BTreeMap<Label, u64> = BTreeMap::new();
    let mut seen: BTreeSet<(&RuId, Label)> = BTreeSet::new();
    for (ru, [p, a, _]) in resolved_triads(corpus, false) {
        let (Some(p), Some(a)) = (p, a) else { continue };
        if p != problem {
            continue;
        }
        if count == DyadCount::RuBinary && !seen.insert((ru, a)) {
            continue;
        }
        *occurrences.entry(a).or_insert(0) += 1;
    }
    let total: u64 = occurrences.values().sum();
    Ok(occurrences
        .into_iter()
        .map(|(approach, count)| DyadShare {
            approach,
            count,
            share: Ratio::new(count, total),
        })
        .collect())
}

/// Star graph from one problem category to each approach category it pairs
/// with, edges labelled with their percentage.
pub fn emit_pa_dyads(
    corpus: &Corpus,
    problem: &str,
    count: DyadCount,
    widths: Widths,
) -> Result<GraphDoc, GraphicsError> {
    let shares = dyad_shares(corpus, problem, count)?;
    let label = problem_category(corpus, problem)?;
    let scale = scale(shares.iter().map(|s| s.count), widths)?;
    let text = |l: &Label| {
        let c = corpus
            .category_by_label(l)
            .expect("label comes from the corpus");
        format!("{}: {}", c.label, c.category_code)
    };
    let mut doc = GraphDoc::new(&format!("dyads_{label}"), RankDir::LR, 2);
    doc.nodes.push(GraphNode {
        id: label.to_string(),
        label: text(&label),
        rank: 0,
    });
    for s in &shares {
        doc.nodes.push(GraphNode {
            id: s.approach.to_string(),
            label: text(&s.approach),
            rank: 1,
        });
        doc.edges.push(GraphEdge {
            path: vec![label.to_string(), s.approach.to_string()],
            count: s.count,
            penwidth: scale[&s.count],
            label: Some(format!("{}%", metrics::percent(s.share))),
        });
    }
    Ok(doc)
}

fn interest_metric(kind: Kind) -> Metric {
    match kind {
        Kind::Problem => Metric::InterestP,
        Kind::Approach => Metric::InterestA,
        Kind::Development => Metric::InterestD,
    }
}

/// Annotation for every category of `kind`: the interest value for frequency
/// categories, the share of its own members for a sub-cluster, and the sum
/// over children for a super-category. `None` when the corpus has no triads.
pub fn taxonomy_annotations(
    corpus: &Corpus,
    kind: Kind,
) -> Result<BTreeMap<CategoryId, Option<Ratio>>, GraphicsError> {
    check_acyclic(corpus, kind)?;
    let table = metrics::table(corpus, interest_metric(kind)).ok();
    let mut out: BTreeMap<CategoryId, Option<Ratio>> = BTreeMap::new();
    let mut order: Vec<&crate::model::CategoryNode> = corpus.categories_of(kind).collect();
    // children before parents so super-categories can sum their children
    order.sort_by_key(|c| std::cmp::Reverse(depth(corpus, c.id)));
    for c in order {
        let value = match &table {
            None => None,
            Some(t) => {
                if let Some(row) = t.rows.iter().find(|r| r.category == c.id) {
                    row.value
                } else if corpus.is_super_category(c) {
                    corpus
                        .children(c.id)
                        .filter_map(|child| out.get(&child.id).copied().flatten())
                        .reduce(|a, b| a + b)
                } else {
                    let members: BTreeSet<NodeId> = c.members.iter().copied().collect();
                    metrics::subset_share(corpus, kind, &members).ok().flatten()
                }
            }
        };
        out.insert(c.id, value);
    }
    Ok(out)
}

fn check_acyclic(corpus: &Corpus, kind: Kind) -> Result<(), GraphicsError> {
    let cycles: Vec<CategoryId> = parent_cycles(corpus)
        .into_iter()
        .filter(|id| corpus.categories[id].kind == kind)
        .collect();
    if cycles.is_empty() {
        Ok(())
    } else {
        Err(GraphicsError::Cycle(cycles))
    }
}

/// Number of parent links above `id`. Callers rule out cycles first.
fn depth(corpus: &Corpus, id: CategoryId) -> usize {
    let mut d = 0;
    let mut cursor = corpus.category(id).and_then(|c| c.parent);
    while let Some(p) = cursor {
        d += 1;
        cursor = corpus.category(p).and_then(|c| c.parent);
    }
    d
}

/// Forest over the categories of one kind along their parent links.
pub fn emit_taxonomy(corpus: &Corpus, kind: Kind) -> Result<GraphDoc, GraphicsError> {
    let annotations = taxonomy_annotations(corpus, kind)?;
    let mut categories: Vec<_> = corpus.categories_of(kind).collect();
    categories.sort_by_key(|c| (depth(corpus, c.id), c.label));
    let ranks = categories
        .iter()
        .map(|c| depth(corpus, c.id) + 1)
        .max()
        .unwrap_or(1);
    let mut doc = GraphDoc::new(&format!("taxonomy_{}", kind.symbol()), RankDir::TB, ranks);
    for c in &categories {
        let mut label = format!("{}: {}", c.label, c.category_code);
        if let Some(Some(v)) = annotations.get(&c.id) {
            label.push_str(&format!(" ({}%)", metrics::percent(*v)));
        }
        doc.nodes.push(GraphNode {
            id: c.label.to_string(),
            label,
            rank: depth(corpus, c.id),
        });
    }
    for c in &categories {
        if let Some(parent) = c.parent.and_then(|p| corpus.category(p)) {
            doc.edges.push(GraphEdge {
                path: vec![parent.label.to_string(), c.label.to_string()],
                count: 1,
                penwidth: DEFAULT_MIN_WIDTH,
                label: None,
            });
        }
    }
    Ok(doc)
}
