use std::collections::BTreeSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::label::{category_label, Label};
use crate::model::{
    CategoryId, CategoryNode, Corpus, Counters, Kind, Node, NodeId, ResearchUnit, RuId, Triad,
};

// Field order is alphabetical so the serialized keys come out sorted.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusDocument {
    categories: Vec<CategoryDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counters: Option<Counters>,
    nodes: Vec<NodeDoc>,
    research_units: Vec<ResearchUnitDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CategoryDoc {
    category_code: String,
    id: CategoryId,
    kind: Kind,
    #[serde(with = "category_label")]
    label: Label,
    members: Vec<NodeId>,
    parent: Option<CategoryId>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    code: String,
    id: NodeId,
    kind: Kind,
    label: Label,
    sources: BTreeSet<RuId>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResearchUnitDoc {
    #[serde(default)]
    citation: String,
    id: RuId,
    triads: Vec<TriadDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TriadDoc {
    a: NodeId,
    d: NodeId,
    p: NodeId,
}

impl From<&Corpus> for CorpusDocument {
    fn from(corpus: &Corpus) -> Self {
        CorpusDocument {
            categories: corpus
                .categories
                .values()
                .map(|c| CategoryDoc {
                    category_code: c.category_code.clone(),
                    id: c.id,
                    kind: c.kind,
                    label: c.label,
                    members: c.members.clone(),
                    parent: c.parent,
                })
                .collect(),
            counters: Some(corpus.counters),
            nodes: corpus
                .nodes
                .values()
                .map(|n| NodeDoc {
                    code: n.code.clone(),
                    id: n.id,
                    kind: n.kind,
                    label: n.label,
                    sources: n.sources.clone(),
                })
                .collect(),
            research_units: corpus
                .research_units
                .iter()
                .map(|ru| ResearchUnitDoc {
                    citation: ru.citation.clone(),
                    id: ru.id.clone(),
                    triads: ru
                        .triads
                        .iter()
                        .map(|t| TriadDoc {
                            a: t.a,
                            d: t.d,
                            p: t.p,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

fn into_corpus(doc: CorpusDocument) -> Result<Corpus, IngestError> {
    let mut corpus = Corpus::new();
    for (index, n) in doc.nodes.into_iter().enumerate() {
        if corpus.nodes.contains_key(&n.id) {
            return Err(IngestError::Json {
                pointer: format!("/nodes/{index}/id"),
                message: format!("duplicate node id {}", n.id.0),
            });
        }
        corpus.nodes.insert(
            n.id,
            Node {
                id: n.id,
                kind: n.kind,
                code: n.code,
                label: n.label,
                sources: n.sources,
            },
        );
    }
    for (index, c) in doc.categories.into_iter().enumerate() {
        if corpus.categories.contains_key(&c.id) {
            return Err(IngestError::Json {
                pointer: format!("/categories/{index}/id"),
                message: format!("duplicate category id {}", c.id.0),
            });
        }
        corpus.categories.insert(
            c.id,
            CategoryNode {
                id: c.id,
                kind: c.kind,
                category_code: c.category_code,
                label: c.label,
                members: c.members,
                parent: c.parent,
            },
        );
    }
    corpus.research_units = doc
        .research_units
        .into_iter()
        .map(|ru| ResearchUnit {
            triads: ru
                .triads
                .into_iter()
                .map(|t| Triad {
                    ru: ru.id.clone(),
                    p: t.p,
                    a: t.a,
                    d: t.d,
                })
                .collect(),
            id: ru.id,
            citation: ru.citation,
        })
        .collect();
    match doc.counters {
        Some(counters) => corpus.counters = counters,
        None => corpus.sync_counters(),
    }
    Ok(corpus)
}

pub fn to_json_value(corpus: &Corpus) -> serde_json::Value {
    serde_json::to_value(CorpusDocument::from(corpus)).expect("corpus document is plain data")
}

/// Canonical pretty-printed document with a trailing newline.
pub fn to_json_string(corpus: &Corpus) -> String {
    let mut text = serde_json::to_string_pretty(&CorpusDocument::from(corpus))
        .expect("corpus document is plain data");
    text.push('\n');
    text
}

pub fn save_corpus_json<W: Write>(corpus: &Corpus, mut out: W) -> Result<(), IngestError> {
    out.write_all(to_json_string(corpus).as_bytes())?;
    Ok(())
}

/// Parses a corpus document. Structural problems are reported with a
/// JSON-pointer location; semantic checks are left to
/// [`validate_corpus`](crate::validate::validate_corpus).
pub fn load_corpus_json<R: Read>(input: R) -> Result<Corpus, IngestError> {
    let mut de = serde_json::Deserializer::from_reader(input);
    let doc: CorpusDocument =
        serde_path_to_error::deserialize(&mut de).map_err(|err| IngestError::Json {
            pointer: pointer(err.path()),
            message: err.inner().to_string(),
        })?;
    de.end().map_err(|err| IngestError::Json {
        pointer: String::new(),
        message: err.to_string(),
    })?;
    into_corpus(doc)
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for segment in path.iter() {
        out.push('/');
        match segment {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } | Segment::Enum { variant: key } => {
                out.push_str(&key.replace('~', "~0").replace('/', "~1"))
            }
            Segment::Unknown => out.push('?'),
        }
    }
    out
}
