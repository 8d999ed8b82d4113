//! Syntax-neutral document tree shared by the YAML-like and JSON front ends.

use serde_json::Value as JsonValue;

use super::ConfigError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Scalar {
    /// Unquoted YAML scalar; its type is decided by the key it belongs to.
    Plain(String),
    /// Quoted YAML scalar or JSON string.
    Str(String),
    /// JSON number, in its source text form.
    Number(String),
    Bool(bool),
    Null,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Map(Vec<(String, Node)>),
    Seq(Vec<Node>),
    Scalar(Scalar),
}

impl Node {
    pub(crate) fn from_json(value: &JsonValue) -> Node {
        match value {
            JsonValue::Null => Node::Scalar(Scalar::Null),
            JsonValue::Bool(b) => Node::Scalar(Scalar::Bool(*b)),
            JsonValue::Number(n) => Node::Scalar(Scalar::Number(n.to_string())),
            JsonValue::String(s) => Node::Scalar(Scalar::Str(s.clone())),
            JsonValue::Array(items) => Node::Seq(items.iter().map(Node::from_json).collect()),
            JsonValue::Object(map) => Node::Map(map.iter().map(|(k, v)| (k.clone(), Node::from_json(v))).collect()),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Node::Map(_) => "a mapping",
            Node::Seq(_) => "a list",
            Node::Scalar(Scalar::Null) => "null",
            Node::Scalar(Scalar::Bool(_)) => "a boolean",
            Node::Scalar(Scalar::Number(_)) => "a number",
            Node::Scalar(_) => "a string",
        }
    }

    fn type_error(&self, path: &str, expected: &str) -> ConfigError {
        ConfigError::schema(path, format!("expected {expected}, found {}", self.kind()))
    }

    pub(crate) fn as_map(&self, path: &str) -> Result<&[(String, Node)], ConfigError> {
        match self {
            Node::Map(entries) => Ok(entries),
            other => Err(other.type_error(path, "a mapping")),
        }
    }

    pub(crate) fn as_seq(&self, path: &str) -> Result<&[Node], ConfigError> {
        match self {
            Node::Seq(items) => Ok(items),
            other => Err(other.type_error(path, "a list")),
        }
    }

    /// Any non-null scalar, as text.
    pub(crate) fn as_string(&self, path: &str) -> Result<String, ConfigError> {
        match self {
            Node::Scalar(Scalar::Plain(s) | Scalar::Str(s) | Scalar::Number(s)) => Ok(s.clone()),
            Node::Scalar(Scalar::Bool(b)) => Ok(b.to_string()),
            other => Err(other.type_error(path, "a string")),
        }
    }

    pub(crate) fn as_u64(&self, path: &str) -> Result<u64, ConfigError> {
        match self {
            Node::Scalar(Scalar::Plain(s) | Scalar::Number(s)) => {
                if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(ConfigError::schema(
                        path,
                        format!("expected a non-negative integer, found {s:?}"),
                    ));
                }
                s.parse()
                    .map_err(|_| ConfigError::schema(path, format!("integer {s} is too large")))
            }
            other => Err(other.type_error(path, "a non-negative integer")),
        }
    }

    pub(crate) fn as_f64(&self, path: &str) -> Result<f64, ConfigError> {
        match self {
            Node::Scalar(Scalar::Plain(s) | Scalar::Number(s)) => crate::constraint::parse_decimal(s)
                .ok_or_else(|| ConfigError::schema(path, format!("expected a number, found {s:?}"))),
            other => Err(other.type_error(path, "a number")),
        }
    }

    pub(crate) fn as_bool(&self, path: &str) -> Result<bool, ConfigError> {
        match self {
            Node::Scalar(Scalar::Bool(b)) => Ok(*b),
            Node::Scalar(Scalar::Plain(s)) if s == "true" => Ok(true),
            Node::Scalar(Scalar::Plain(s)) if s == "false" => Ok(false),
            other => Err(other.type_error(path, "true or false")),
        }
    }

    pub(crate) fn as_string_list(&self, path: &str) -> Result<Vec<String>, ConfigError> {
        self.as_seq(path)?
            .iter()
            .enumerate()
            .map(|(i, item)| item.as_string(&format!("{path}[{i}]")))
            .collect()
    }
}
