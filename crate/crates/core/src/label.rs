//! Structured `P/A/Dx.yz` identifiers.
//!
//! A label carries a kind, a category number and, for member nodes, an item
//! number and an optional sub-cluster number. When every component is a
//! single digit the compact form is used (`A1.23` is category 1,
//! sub-cluster 2, item 3). A multi-digit component switches to explicit dots
//! (`D12.3.14`). An item without a sub-cluster renders as `A1.4`, or as
//! `A1.0.14` when the item needs more than one digit: `0` is never a valid
//! sub-cluster, so it marks the slot as empty.
//!
//! Node labels and category labels live in separate namespaces. `A1.2`
//! parsed as a node label is item 2 of category 1; parsed as a category
//! label it is sub-cluster 2 of category 1. Use [`Label::parse`] and
//! [`Label::parse_category`] accordingly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Kind;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("label is empty")]
    Empty,
    #[error("label `{0}` does not start with P, A or D")]
    BadPrefix(String),
    #[error("label `{0}` has no category number")]
    MissingCategory(String),
    #[error("label `{text}` has a non-numeric component `{component}`")]
    NonNumeric { text: String, component: String },
    #[error("label `{0}` has a zero component")]
    Zero(String),
    #[error("label `{0}` has too many components")]
    TooManyComponents(String),
    #[error("label `{0}` is ambiguous: use explicit dots for multi-digit components")]
    Ambiguous(String),
    #[error("label `{0}` is not a category label")]
    NotCategory(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub kind: Kind,
    pub category: u32,
    pub subcategory: Option<u32>,
    pub item: Option<u32>,
}

impl Label {
    pub fn category(kind: Kind, category: u32) -> Self {
        Label {
            kind,
            category,
            subcategory: None,
            item: None,
        }
    }

    pub fn subcategory(kind: Kind, category: u32, subcategory: u32) -> Self {
        Label {
            kind,
            category,
            subcategory: Some(subcategory),
            item: None,
        }
    }

    pub fn member(kind: Kind, category: u32, subcategory: Option<u32>, item: u32) -> Self {
        Label {
            kind,
            category,
            subcategory,
            item: Some(item),
        }
    }

    /// Label of the `item`-th member of the category labelled `self`.
    pub fn with_item(self, item: u32) -> Self {
        Label {
            item: Some(item),
            ..self
        }
    }

    /// Category-level prefix of this label (`A1.23` -> `A1`).
    pub fn top_category(self) -> Self {
        Label::category(self.kind, self.category)
    }

    /// Category or sub-cluster this member label belongs to (`A1.23` -> `A1.2`).
    pub fn parent_category(self) -> Self {
        Label { item: None, ..self }
    }

    pub fn is_member(&self) -> bool {
        self.item.is_some()
    }

    /// Parses a node label. `P7` is an ungrouped node (provisional number 7),
    /// `P7.2` is item 2 of category 7 and `P7.12` is item 2 of sub-cluster 1.
    pub fn parse(text: &str) -> Result<Self, LabelError> {
        let (kind, parts) = split(text)?;
        let category = number(text, parts[0])?;
        let (subcategory, item) = match parts.len() {
            1 => (None, None),
            2 => {
                let tail = parts[1];
                match tail.len() {
                    1 => (None, Some(number(text, tail)?)),
                    2 => {
                        let sub = number(text, &tail[..1])?;
                        let item = number(text, &tail[1..])?;
                        (Some(sub), Some(item))
                    }
                    0 => {
                        return Err(LabelError::NonNumeric {
                            text: text.to_owned(),
                            component: String::new(),
                        })
                    }
                    _ => {
                        // validate digits before reporting ambiguity
                        number(text, tail)?;
                        return Err(LabelError::Ambiguous(text.to_owned()));
                    }
                }
            }
            3 => {
                let sub = digits(text, parts[1])?;
                let item = number(text, parts[2])?;
                (if sub == 0 { None } else { Some(sub) }, Some(item))
            }
            _ => return Err(LabelError::TooManyComponents(text.to_owned())),
        };
        Ok(Label {
            kind,
            category,
            subcategory,
            item,
        })
    }

    /// Parses a category-node label: `A1` or the sub-cluster form `A1.2`.
    pub fn parse_category(text: &str) -> Result<Self, LabelError> {
        let (kind, parts) = split(text)?;
        let category = number(text, parts[0])?;
        match parts.len() {
            1 => Ok(Label::category(kind, category)),
            2 => Ok(Label::subcategory(kind, category, number(text, parts[1])?)),
            _ => Err(LabelError::NotCategory(text.to_owned())),
        }
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

fn split(text: &str) -> Result<(Kind, Vec<&str>), LabelError> {
    let text_trimmed = text.trim();
    let mut chars = text_trimmed.chars();
    let prefix = chars.next().ok_or(LabelError::Empty)?;
    let kind = Kind::from_symbol(prefix).ok_or_else(|| LabelError::BadPrefix(text.to_owned()))?;
    let rest = chars.as_str();
    if rest.is_empty() {
        return Err(LabelError::MissingCategory(text.to_owned()));
    }
    let parts: Vec<&str> = rest.split('.').collect();
    if parts[0].is_empty() {
        return Err(LabelError::MissingCategory(text.to_owned()));
    }
    Ok((kind, parts))
}

fn digits(text: &str, component: &str) -> Result<u32, LabelError> {
    if component.is_empty() || !component.bytes().all(|b| b.is_ascii_digit()) {
        return Err(LabelError::NonNumeric {
            text: text.to_owned(),
            component: component.to_owned(),
        });
    }
    component.parse().map_err(|_| LabelError::NonNumeric {
        text: text.to_owned(),
        component: component.to_owned(),
    })
}

fn number(text: &str, component: &str) -> Result<u32, LabelError> {
    match digits(text, component)? {
        0 => Err(LabelError::Zero(text.to_owned())),
        n => Ok(n),
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.symbol(), self.category)?;
        match (self.subcategory, self.item) {
            (None, None) => Ok(()),
            (Some(y), None) => write!(f, ".{y}"),
            (None, Some(z)) if z < 10 => write!(f, ".{z}"),
            (None, Some(z)) => write!(f, ".0.{z}"),
            (Some(y), Some(z)) if self.category < 10 && y < 10 && z < 10 => {
                write!(f, ".{y}{z}")
            }
            (Some(y), Some(z)) => write!(f, ".{y}.{z}"),
        }
    }
}

impl FromStr for Label {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::parse(s)
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Deserializes in node context; category labels are parsed by their owner.
impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Label::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for category-context labels.
pub(crate) mod category_label {
    use super::Label;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(label: &Label, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(label)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Label, D::Error> {
        let text = String::deserialize(deserializer)?;
        Label::parse_category(&text).map_err(serde::de::Error::custom)
    }
}
