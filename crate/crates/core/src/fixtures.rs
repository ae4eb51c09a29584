//! The MINI3 corpus: three research units, six triads, two problem, two
//! approach and three development categories. Small enough to enumerate by
//! hand, yet it separates member-presence counting from triad counting.

use crate::ingest::{assemble_corpus, load_nodes_csv, load_triads_csv};
use crate::label::Label;
use crate::model::{Corpus, Kind};

pub const MINI3_NODES_CSV: &str = "\
label,code,category_code
P1.1,high variance across hypervisors,measurement accuracy
P1.2,no per-VM power metering,measurement accuracy
P2.1,unknown energy cost of network functions,energy attribution
A1.1,instrumented testbed,empirical measurement
A1.2,external power meters,empirical measurement
A2.1,analytical power model,modelling
D1.1,per-VM power model,power models
D1.2,calibrated meter readings,power models
D2.1,energy-aware placement policy,resource management
D3.1,measurement methodology,methodology
";

pub const MINI3_TRIADS_CSV: &str = "\
ru_id,p,a,d
RU1,P1.1,A1.1,D1.1
RU1,P1.1,A2.1,D2.1
RU2,P2.1,A1.1,D1.1
RU2,P2.1,A1.1,D2.1
RU3,P1.2,A1.1,D3.1
RU3,P2.1,A1.2,D1.2
";

pub fn mini3() -> Corpus {
    let nodes = load_nodes_csv(MINI3_NODES_CSV.as_bytes()).expect("fixture nodes parse");
    let triads = load_triads_csv(MINI3_TRIADS_CSV.as_bytes()).expect("fixture triads parse");
    assemble_corpus(&nodes, &triads).expect("fixture assembles")
}

/// Builds small valid corpora from raw `(category, item)` coordinates, for
/// generated tests. Item numbers are compacted per category and duplicate
/// triads within a unit are dropped.
#[derive(Debug, Clone, Default)]
pub struct CorpusBuilder {
    triads: Vec<(String, [(u32, u32); 3])>,
    extra: Vec<(Kind, u32, u32)>,
}

impl CorpusBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a triad; each slot is `(category, item)` for P, A and D in turn.
    pub fn triad(mut self, ru: &str, p: (u32, u32), a: (u32, u32), d: (u32, u32)) -> Self {
        self.triads.push((ru.to_owned(), [p, a, d]));
        self
    }

    /// Adds a grouped node that no triad references.
    pub fn unused_node(mut self, kind: Kind, category: u32, item: u32) -> Self {
        self.extra.push((kind, category, item));
        self
    }

    pub fn build(&self) -> Corpus {
        use std::collections::{BTreeMap, BTreeSet};

        let mut raw: BTreeSet<(Kind, u32, u32)> = self.extra.iter().copied().collect();
        for (_, slots) in &self.triads {
            for (kind, &(c, i)) in Kind::ALL.iter().zip(slots) {
                raw.insert((*kind, c, i));
            }
        }
        let mut compact: BTreeMap<(Kind, u32, u32), Label> = BTreeMap::new();
        let mut next_item: BTreeMap<(Kind, u32), u32> = BTreeMap::new();
        for &(kind, c, i) in &raw {
            let n = next_item.entry((kind, c)).or_insert(0);
            *n += 1;
            compact.insert((kind, c, i), Label::member(kind, c, None, *n));
        }

        let mut nodes = String::from("label,code,category_code\n");
        for label in compact.values() {
            nodes.push_str(&format!(
                "{label},code {label},category {}{}\n",
                label.kind, label.category
            ));
        }
        let mut triads = String::from("ru_id,p,a,d\n");
        let mut seen = BTreeSet::new();
        for (ru, [p, a, d]) in &self.triads {
            let labels = [
                compact[&(Kind::Problem, p.0, p.1)],
                compact[&(Kind::Approach, a.0, a.1)],
                compact[&(Kind::Development, d.0, d.1)],
            ];
            if seen.insert((ru.clone(), labels)) {
                triads.push_str(&format!("{ru},{},{},{}\n", labels[0], labels[1], labels[2]));
            }
        }
        let nodes = load_nodes_csv(nodes.as_bytes()).expect("builder emits valid rows");
        let triads = load_triads_csv(triads.as_bytes()).expect("builder emits valid rows");
        assemble_corpus(&nodes, &triads).expect("builder emits a valid corpus")
    }
}
