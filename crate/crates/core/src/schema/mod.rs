//! Schema configuration: what to validate and how.
//!
//! A schema names the input `format` and lists `fields`, each with a `name`,
//! a `path` in the format's addressing language and a list of `rules`. A
//! rule bundles one or more constraints with reporting properties:
//!
//! ```yaml
//! format: MARC
//! fields:
//! - name: 040$a
//!   path: 040$a
//!   rules:
//!   - id: 040$a.minCount
//!     minCount: 1
//!   - id: 040$a.pattern
//!     pattern: ^BE-KBR00
//! ```
//!
//! The logical operators `and`, `or` and `not` take a list of inline
//! sub-rules, each with its own `id`, evaluated against the enclosing
//! field. An optional top-level `categories` mapping overrides the
//! category thresholds (`blockedFloor`, `improveFloor`, `goodFloor`,
//! `blockingScore`).
//!
//! Both the YAML-like syntax and JSON map onto the same [`SchemaConfig`];
//! any key outside the vocabulary is an error.

mod compile;
mod document;
mod node;
mod render;
mod yaml;

use std::fmt;
use std::path::Path;

use thiserror::Error;

pub use compile::{
    compile, compile_with, Check, CompileError, CompileOptions, CompiledField, CompiledRule, CompiledSchema, Violation,
};
pub use render::render_json;

use crate::value::SourceFormat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
}

impl ConfigError {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        ConfigError::Syntax {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn schema(path: &str, message: impl Into<String>) -> Self {
        ConfigError::Schema {
            path: if path.is_empty() {
                "<root>".into()
            } else {
                path.to_owned()
            },
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemaSyntax {
    YamlLike,
    Json,
}

impl SchemaSyntax {
    /// `.json` files are JSON, everything else is the YAML-like syntax.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => SchemaSyntax::Json,
            _ => SchemaSyntax::YamlLike,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaConfig {
    pub format: SourceFormat,
    pub fields: Vec<FieldConfig>,
    pub categories: Option<CategorySettings>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfig {
    pub name: String,
    pub path: String,
    pub index_field: Option<String>,
    pub rules: Vec<Rule>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Rule {
    pub id: String,
    pub description: Option<String>,
    pub constraints: Constraints,
    pub failure_score: Option<f64>,
    pub success_score: Option<f64>,
    pub na_score: Option<f64>,
    pub hidden: bool,
    pub skip: bool,
    pub debug: bool,
}

impl Rule {
    pub fn new(id: impl Into<String>) -> Self {
        Rule {
            id: id.into(),
            ..Rule::default()
        }
    }
}

/// Every constraint a rule may carry. Unset constraints are `None`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Constraints {
    pub min_count: Option<u64>,
    pub max_count: Option<u64>,
    pub min_exclusive: Option<f64>,
    pub min_inclusive: Option<f64>,
    pub max_exclusive: Option<f64>,
    pub max_inclusive: Option<f64>,
    pub min_length: Option<u64>,
    pub max_length: Option<u64>,
    pub min_words: Option<u64>,
    pub max_words: Option<u64>,
    pub has_value: Option<String>,
    pub allowed: Option<Vec<String>>,
    pub pattern: Option<String>,
    pub equals: Option<String>,
    pub disjoint: Option<String>,
    pub less_than: Option<String>,
    pub less_than_or_equals: Option<String>,
    pub and: Option<Vec<Rule>>,
    pub or: Option<Vec<Rule>>,
    pub not: Option<Vec<Rule>>,
    pub unique: Option<bool>,
    pub dependencies: Option<Vec<String>>,
    pub content_type: Option<Vec<String>>,
    pub dimension: Option<DimensionBounds>,
}

impl Constraints {
    /// True when no constraint is stated; `unique: false` states none.
    pub fn is_empty(&self) -> bool {
        *self
            == Constraints {
                unique: self.unique.filter(|u| !u),
                ..Constraints::default()
            }
    }
}

/// Pixel bounds for the `dimension` constraint; all inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DimensionBounds {
    pub min_width: Option<u32>,
    pub max_width: Option<u32>,
    pub min_height: Option<u32>,
    pub max_height: Option<u32>,
    pub min_shortside: Option<u32>,
    pub max_shortside: Option<u32>,
    pub min_longside: Option<u32>,
    pub max_longside: Option<u32>,
}

impl DimensionBounds {
    /// `(name, min, max)` for each side measure.
    pub fn pairs(&self) -> [(&'static str, Option<u32>, Option<u32>); 4] {
        [
            ("Width", self.min_width, self.max_width),
            ("Height", self.min_height, self.max_height),
            ("Shortside", self.min_shortside, self.max_shortside),
            ("Longside", self.min_longside, self.max_longside),
        ]
    }

    pub fn is_empty(&self) -> bool {
        self.pairs().iter().all(|(_, lo, hi)| lo.is_none() && hi.is_none())
    }
}

/// Category threshold overrides from the schema file.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CategorySettings {
    pub blocked_floor: Option<f64>,
    pub improve_floor: Option<f64>,
    pub good_floor: Option<f64>,
    pub blocking_score: Option<f64>,
}

impl fmt::Display for SchemaSyntax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemaSyntax::YamlLike => "YAML",
            SchemaSyntax::Json => "JSON",
        })
    }
}

/// Parses a schema document.
pub fn parse_schema(text: &str, syntax: SchemaSyntax) -> Result<SchemaConfig, ConfigError> {
    let root = match syntax {
        SchemaSyntax::YamlLike => yaml::parse(text)?,
        SchemaSyntax::Json => {
            let value: serde_json::Value =
                serde_json::from_str(text).map_err(|err| ConfigError::syntax(err.line(), err.to_string()))?;
            node::Node::from_json(&value)
        }
    };
    document::schema_from_node(&root)
}

#[cfg(test)]
mod tests;
