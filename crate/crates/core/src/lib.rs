//! Tooling for structurally coded literature corpora.
//!
//! Codes mined from research units are typed as problems (P), approaches (A)
//! or developments (D), bound into causal triads P -> A -> D, and grouped
//! into category-nodes. On top of that model this crate provides:
//!
//! - [`ingest`]: CSV tables and a canonical JSON document,
//! - [`categorizer`]: a transactional session for the iterative grouping
//!   workflow, with a replayable change log,
//! - [`metrics`]: the frequency statistics, in exact rational arithmetic,
//! - [`graphics`]: the causality DAG, triads graphic, P-A dyad graphics and
//!   taxonomies as DOT and SVG documents.

pub mod categorizer;
pub mod fixtures;
pub mod graphics;
pub mod ingest;
pub mod label;
pub mod metrics;
pub mod model;
pub mod validate;

pub use label::{Label, LabelError};
pub use model::{
    CategoryId, CategoryNode, Corpus, Counters, Kind, Node, NodeId, PerKind, ResearchUnit, RuId,
    Triad,
};
pub use validate::{validate_corpus, Issue, Location, Severity, ValidationReport};
