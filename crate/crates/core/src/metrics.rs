//! Frequency statistics over a corpus at category granularity.
//!
//! Every table has one row per metric category of the relevant kind, zero
//! rows included. Values are exact rationals; percentages are rendered to one
//! decimal place only at the edge. Nodes that are not grouped into any
//! category are left out of every count.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;
use thiserror::Error;

use crate::label::Label;
use crate::model::{CategoryId, Corpus, Kind, NodeId, RuId};

pub type Ratio = num_rational::Ratio<u64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("corpus has no research units")]
    EmptyCorpus,
    #[error("corpus has no triads")]
    NoTriads,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Metric {
    #[serde(rename = "F_P")]
    FrequencyP,
    #[serde(rename = "R_P")]
    InterestP,
    #[serde(rename = "W_P")]
    DiversityP,
    #[serde(rename = "R_A")]
    InterestA,
    #[serde(rename = "U_A")]
    UtilityA,
    #[serde(rename = "R_D")]
    InterestD,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::FrequencyP,
        Metric::InterestP,
        Metric::DiversityP,
        Metric::InterestA,
        Metric::UtilityA,
        Metric::InterestD,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Metric::FrequencyP => "F_P",
            Metric::InterestP => "R_P",
            Metric::DiversityP => "W_P",
            Metric::InterestA => "R_A",
            Metric::UtilityA => "U_A",
            Metric::InterestD => "R_D",
        }
    }

    /// File stem used by exporters, e.g. `r_a`.
    pub fn stem(self) -> String {
        self.symbol().to_ascii_lowercase()
    }

    pub fn kind(self) -> Kind {
        match self {
            Metric::FrequencyP | Metric::InterestP | Metric::DiversityP => Kind::Problem,
            Metric::InterestA | Metric::UtilityA => Kind::Approach,
            Metric::InterestD => Kind::Development,
        }
    }

    pub fn from_symbol(s: &str) -> Option<Metric> {
        Metric::ALL
            .into_iter()
            .find(|m| m.symbol().eq_ignore_ascii_case(s))
    }

    /// Whether the rows of this metric sum to one.
    pub fn is_share(self) -> bool {
        self != Metric::FrequencyP
    }

    fn compute(self, corpus: &Corpus) -> Result<MetricTable, MetricsError> {
        match self {
            Metric::FrequencyP => f_p(corpus),
            Metric::InterestP => r_p(corpus),
            Metric::DiversityP => w_p(corpus),
            Metric::InterestA => r_a(corpus),
            Metric::UtilityA => u_a(corpus),
            Metric::InterestD => r_d(corpus),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableStatus {
    Ok,
    /// The denominator is zero: no categories of this kind, or none of them
    /// is reached by a triad. Rows carry no value.
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricRow {
    pub category: CategoryId,
    pub label: Label,
    pub category_code: String,
    pub count: u64,
    pub value: Option<Ratio>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricTable {
    pub metric: Metric,
    pub status: TableStatus,
    /// Denominator of every row value.
    pub denominator: u64,
    /// Named counts behind the table, including the one in `denominator`.
    pub denominators: BTreeMap<&'static str, u64>,
    pub rows: Vec<MetricRow>,
}

impl MetricTable {
    pub fn row(&self, label: &Label) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.label == *label)
    }

    pub fn value(&self, label: &Label) -> Option<Ratio> {
        self.row(label).and_then(|r| r.value)
    }

    pub fn by_category(&self) -> BTreeMap<CategoryId, Option<Ratio>> {
        self.rows.iter().map(|r| (r.category, r.value)).collect()
    }

    pub fn sum(&self) -> Ratio {
        self.rows.iter().filter_map(|r| r.value).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record([
            "label",
            "category_code",
            "value_numerator",
            "value_denominator",
            "percent",
        ])
        .expect("write to memory");
        for row in &self.rows {
            let (n, d, pct) = match row.value {
                Some(v) => (v.numer().to_string(), v.denom().to_string(), percent(v)),
                None => (String::new(), String::new(), String::new()),
            };
            w.write_record([row.label.to_string(), row.category_code.clone(), n, d, pct])
                .expect("write to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 input")
    }

    fn build(
        corpus: &Corpus,
        metric: Metric,
        counts: &BTreeMap<CategoryId, u64>,
        denominator: u64,
        denominators: BTreeMap<&'static str, u64>,
    ) -> Self {
        let rows: Vec<MetricRow> = corpus
            .metric_categories(metric.kind())
            .into_iter()
            .map(|c| {
                let count = counts.get(&c.id).copied().unwrap_or(0);
                MetricRow {
                    category: c.id,
                    label: c.label,
                    category_code: c.category_code.clone(),
                    count,
                    value: (denominator > 0).then(|| Ratio::new(count, denominator)),
                }
            })
            .collect();
        let status = if denominator == 0 || rows.is_empty() {
            TableStatus::Empty
        } else {
            TableStatus::Ok
        };
        MetricTable {
            metric,
            status,
            denominator,
            denominators,
            rows,
        }
    }
}

impl Serialize for MetricRow {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("MetricRow", 7)?;
        s.serialize_field("category", &self.category)?;
        s.serialize_field("category_code", &self.category_code)?;
        s.serialize_field("count", &self.count)?;
        s.serialize_field("label", &self.label)?;
        s.serialize_field("percent", &self.value.map(percent))?;
        s.serialize_field("value_denominator", &self.value.map(|v| *v.denom()))?;
        s.serialize_field("value_numerator", &self.value.map(|v| *v.numer()))?;
        s.end()
    }
}

impl Serialize for MetricTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("MetricTable", 5)?;
        s.serialize_field("denominator", &self.denominator)?;
        s.serialize_field("denominators", &self.denominators)?;
        s.serialize_field("metric", &self.metric)?;
        s.serialize_field("rows", &self.rows)?;
        s.serialize_field("status", &self.status)?;
        s.end()
    }
}

/// `value` as a percentage with one decimal, rounded half up.
pub fn percent(value: Ratio) -> String {
    let tenths = (2 * 1000 * value.numer() + value.denom()) / (2 * value.denom());
    format!("{}.{}", tenths / 10, tenths % 10)
}

/// Whether W_P dyads are deduplicated per category pair or per node pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DyadGranularity {
    #[default]
    Category,
    Node,
}

/// A triad with each slot resolved to its metric category, or `None` when
/// the node is ungrouped.
struct Resolved<'a> {
    ru: &'a RuId,
    nodes: [NodeId; 3],
    cats: [Option<CategoryId>; 3],
}

struct Census<'a> {
    n_ru: u64,
    triads: Vec<Resolved<'a>>,
}

fn slot(kind: Kind) -> usize {
    match kind {
        Kind::Problem => 0,
        Kind::Approach => 1,
        Kind::Development => 2,
    }
}

impl<'a> Census<'a> {
    fn new(corpus: &'a Corpus) -> Result<Self, MetricsError> {
        if corpus.research_units.is_empty() {
            return Err(MetricsError::EmptyCorpus);
        }
        if corpus.triad_count() == 0 {
            return Err(MetricsError::NoTriads);
        }
        let rows: BTreeSet<CategoryId> = Kind::ALL
            .iter()
            .flat_map(|&k| corpus.metric_categories(k))
            .map(|c| c.id)
            .collect();
        let map: BTreeMap<NodeId, CategoryId> = corpus
            .metric_category_map()
            .into_iter()
            .filter(|(_, c)| rows.contains(c))
            .collect();
        let triads = corpus
            .triads()
            .map(|t| {
                let nodes = [t.p, t.a, t.d];
                Resolved {
                    ru: &t.ru,
                    nodes,
                    cats: nodes.map(|n| map.get(&n).copied()),
                }
            })
            .collect();
        Ok(Census {
            n_ru: corpus.research_units.len() as u64,
            triads,
        })
    }

    /// Per category, the number of research units with at least one triad
    /// whose problem falls in it.
    fn problem_presence(&self) -> BTreeMap<CategoryId, u64> {
        let pairs: BTreeSet<(CategoryId, &RuId)> = self
            .triads
            .iter()
            .filter_map(|t| t.cats[0].map(|c| (c, t.ru)))
            .collect();
        tally(pairs.into_iter().map(|(c, _)| c))
    }

    /// Per category, the number of distinct (research unit, member) pairs.
    fn member_presence(&self, kind: Kind) -> BTreeMap<CategoryId, u64> {
        let s = slot(kind);
        let pairs: BTreeSet<(CategoryId, &RuId, NodeId)> = self
            .triads
            .iter()
            .filter_map(|t| t.cats[s].map(|c| (c, t.ru, t.nodes[s])))
            .collect();
        tally(pairs.into_iter().map(|(c, _, _)| c))
    }

    fn dyads(&self, granularity: DyadGranularity) -> BTreeMap<CategoryId, u64> {
        let resolved = self
            .triads
            .iter()
            .filter_map(|t| Some((t.cats[0]?, t.cats[1]?, t)));
        match granularity {
            DyadGranularity::Category => {
                let set: BTreeSet<(CategoryId, CategoryId)> =
                    resolved.map(|(p, a, _)| (p, a)).collect();
                tally(set.into_iter().map(|(p, _)| p))
            }
            DyadGranularity::Node => {
                let set: BTreeSet<(CategoryId, NodeId, NodeId)> = resolved
                    .map(|(p, _, t)| (p, t.nodes[0], t.nodes[1]))
                    .collect();
                tally(set.into_iter().map(|(p, _, _)| p))
            }
        }
    }

    fn triad_slots(&self, kind: Kind) -> BTreeMap<CategoryId, u64> {
        let s = slot(kind);
        tally(self.triads.iter().filter_map(|t| t.cats[s]))
    }
}

fn tally(items: impl Iterator<Item = CategoryId>) -> BTreeMap<CategoryId, u64> {
    let mut out = BTreeMap::new();
    for c in items {
        *out.entry(c).or_insert(0) += 1;
    }
    out
}

fn total(counts: &BTreeMap<CategoryId, u64>) -> u64 {
    counts.values().sum()
}

fn share(
    corpus: &Corpus,
    metric: Metric,
    counts: BTreeMap<CategoryId, u64>,
    name: &'static str,
    extra: &[(&'static str, u64)],
) -> MetricTable {
    let denominator = total(&counts);
    let mut denominators: BTreeMap<&'static str, u64> = extra.iter().copied().collect();
    denominators.insert(name, denominator);
    MetricTable::build(corpus, metric, &counts, denominator, denominators)
}

/// Share of research units that tackle each problem category.
pub fn f_p(corpus: &Corpus) -> Result<MetricTable, MetricsError> {
    let census = Census::new(corpus)?;
    let counts = census.problem_presence();
    let denominators = BTreeMap::from([("N_RU", census.n_ru)]);
    Ok(MetricTable::build(
        corpus,
        Metric::FrequencyP,
        &counts,
        census.n_ru,
        denominators,
    ))
}

/// Research interest: each problem category's share of all problem presences.
pub fn r_p(corpus: &Corpus) -> Result<MetricTable, MetricsError> {
    let census = Census::new(corpus)?;
    Ok(share(
        corpus,
        Metric::InterestP,
        census.problem_presence(),
        "N_P_presences",
        &[("N_RU", census.n_ru)],
    ))
}

/// Total problem presences per research unit. Equals `F_P / R_P` for every
/// problem category with nonzero interest.
pub fn avg_challenges_per_ru(corpus: &Corpus) -> Result<Ratio, MetricsError> {
    let census = Census::new(corpus)?;
    Ok(Ratio::new(total(&census.problem_presence()), census.n_ru))
}

/// Diversity of approaches per problem category, over unique category dyads.
pub fn w_p(corpus: &Corpus) -> Result<MetricTable, MetricsError> {
    w_p_with(corpus, DyadGranularity::Category)
}

pub fn w_p_with(
    corpus: &Corpus,
    granularity: DyadGranularity,
) -> Result<MetricTable, MetricsError> {
    let census = Census::new(corpus)?;
    Ok(share(
        corpus,
        Metric::DiversityP,
        census.dyads(granularity),
        "N_PA",
        &[],
    ))
}

/// Approach interest: distinct members present per research unit.
pub fn r_a(corpus: &Corpus) -> Result<MetricTable, MetricsError> {
    let census = Census::new(corpus)?;
    Ok(share(
        corpus,
        Metric::InterestA,
        census.member_presence(Kind::Approach),
        "N_A_presences",
        &[],
    ))
}

/// Approach utility: share of triads routed through each approach category.
pub fn u_a(corpus: &Corpus) -> Result<MetricTable, MetricsError> {
    let census = Census::new(corpus)?;
    let n_triads = census.triads.len() as u64;
    Ok(share(
        corpus,
        Metric::UtilityA,
        census.triad_slots(Kind::Approach),
        "N_A_triads",
        &[("N_triads", n_triads)],
    ))
}

/// Development interest, counted like [`r_a`].
pub fn r_d(corpus: &Corpus) -> Result<MetricTable, MetricsError> {
    let census = Census::new(corpus)?;
    Ok(share(
        corpus,
        Metric::InterestD,
        census.member_presence(Kind::Development),
        "N_D_presences",
        &[],
    ))
}

pub fn table(corpus: &Corpus, metric: Metric) -> Result<MetricTable, MetricsError> {
    metric.compute(corpus)
}

/// Presence share of a subset of nodes, counted by the rule of the interest
/// metric of `kind` and divided by that metric's denominator. `None` when the
/// denominator is zero.
pub fn subset_share(
    corpus: &Corpus,
    kind: Kind,
    subset: &BTreeSet<NodeId>,
) -> Result<Option<Ratio>, MetricsError> {
    let census = Census::new(corpus)?;
    let s = slot(kind);
    let grouped = census.triads.iter().filter(|t| t.cats[s].is_some());
    let (numerator, denominator) = match kind {
        Kind::Problem => {
            let inside: BTreeSet<&RuId> = grouped
                .clone()
                .filter(|t| subset.contains(&t.nodes[0]))
                .map(|t| t.ru)
                .collect();
            (inside.len() as u64, total(&census.problem_presence()))
        }
        _ => {
            let inside: BTreeSet<(&RuId, NodeId)> = grouped
                .filter(|t| subset.contains(&t.nodes[s]))
                .map(|t| (t.ru, t.nodes[s]))
                .collect();
            (inside.len() as u64, total(&census.member_presence(kind)))
        }
    };
    Ok((denominator > 0).then(|| Ratio::new(numerator, denominator)))
}

/// All six tables plus the average number of challenges per research unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricSet {
    pub tables: Vec<MetricTable>,
    pub avg_challenges_per_ru: Ratio,
    pub n_ru: u64,
    pub n_triads: u64,
}

impl MetricSet {
    pub fn get(&self, metric: Metric) -> &MetricTable {
        self.tables
            .iter()
            .find(|t| t.metric == metric)
            .expect("set holds every metric")
    }
}

impl Serialize for MetricSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let avg = self.avg_challenges_per_ru;
        let mut s = serializer.serialize_struct("MetricSet", 4)?;
        s.serialize_field(
            "avg_challenges_per_ru",
            &serde_json::json!({
                "numerator": avg.numer(),
                "denominator": avg.denom(),
                "decimal": format_decimal(avg, 4),
            }),
        )?;
        s.serialize_field("n_ru", &self.n_ru)?;
        s.serialize_field("n_triads", &self.n_triads)?;
        s.serialize_field("tables", &self.tables)?;
        s.end()
    }
}

pub fn all_metrics(corpus: &Corpus) -> Result<MetricSet, MetricsError> {
    let tables = Metric::ALL
        .into_iter()
        .map(|m| m.compute(corpus))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MetricSet {
        tables,
        avg_challenges_per_ru: avg_challenges_per_ru(corpus)?,
        n_ru: corpus.research_units.len() as u64,
        n_triads: corpus.triad_count() as u64,
    })
}

/// `value` with `places` decimals, rounded half up.
pub fn format_decimal(value: Ratio, places: u32) -> String {
    let scale = 10u64.pow(places);
    let scaled = (2 * scale * value.numer() + value.denom()) / (2 * value.denom());
    if places == 0 {
        return scaled.to_string();
    }
    format!(
        "{}.{:0width$}",
        scaled / scale,
        scaled % scale,
        width = places as usize
    )
}

/// The average challenge count as a one-row CSV table.
pub fn avg_challenges_csv(avg: Ratio) -> String {
    format!(
        "value_numerator,value_denominator,decimal\n{},{},{}\n",
        avg.numer(),
        avg.denom(),
        format_decimal(avg, 4)
    )
}
