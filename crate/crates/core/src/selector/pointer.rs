//! JSON pointer (RFC 6901) with a `*` segment that fans out over arrays.

use serde_json::Value as JsonValue;

use super::SyntaxError;
use crate::value::AtomicValue;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointerSegment {
    /// Object key, or array index when it is a canonical decimal integer.
    Key(String),
    Wildcard,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JsonPointer {
    pub segments: Vec<PointerSegment>,
}

impl JsonPointer {
    pub fn parse(text: &str) -> Result<Self, SyntaxError> {
        if !text.starts_with('/') {
            return Err(SyntaxError::new(0, "pointer must start with '/'"));
        }
        let mut segments = Vec::new();
        let mut offset = 1;
        for raw in text[1..].split('/') {
            if raw == "*" {
                segments.push(PointerSegment::Wildcard);
            } else {
                segments.push(PointerSegment::Key(unescape(raw, offset)?));
            }
            offset += raw.len() + 1;
        }
        Ok(JsonPointer { segments })
    }

    /// Matched leaves in document order. `null` is absence, arrays at the
    /// end of the pointer contribute their elements.
    pub fn evaluate(&self, document: &JsonValue) -> Vec<AtomicValue> {
        let mut matched = Vec::new();
        resolve(document, &self.segments, &mut matched);
        let mut out = Vec::new();
        for value in matched {
            push_leaf(value, &mut out);
        }
        out
    }

    /// First matched leaf, used for record-id lookup.
    pub fn first_scalar(&self, document: &JsonValue) -> Option<String> {
        self.evaluate(document).into_iter().next().map(|v| v.raw)
    }
}

fn unescape(segment: &str, offset: usize) -> Result<String, SyntaxError> {
    let mut out = String::with_capacity(segment.len());
    let mut chars = segment.char_indices();
    while let Some((i, c)) = chars.next() {
        if c != '~' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some((_, '0')) => out.push('~'),
            Some((_, '1')) => out.push('/'),
            _ => return Err(SyntaxError::new(offset + i, "'~' must be followed by '0' or '1'")),
        }
    }
    Ok(out)
}

fn array_index(key: &str) -> Option<usize> {
    let canonical = key == "0" || (!key.starts_with('0') && !key.is_empty() && key.bytes().all(|b| b.is_ascii_digit()));
    if canonical {
        key.parse().ok()
    } else {
        None
    }
}

fn resolve<'a>(value: &'a JsonValue, segments: &[PointerSegment], out: &mut Vec<&'a JsonValue>) {
    let Some((head, rest)) = segments.split_first() else {
        out.push(value);
        return;
    };
    match (head, value) {
        (PointerSegment::Wildcard, JsonValue::Array(items)) => {
            for item in items {
                resolve(item, rest, out);
            }
        }
        (PointerSegment::Key(key), JsonValue::Object(map)) => {
            if let Some(next) = map.get(key) {
                resolve(next, rest, out);
            }
        }
        (PointerSegment::Key(key), JsonValue::Array(items)) => {
            if let Some(next) = array_index(key).and_then(|i| items.get(i)) {
                resolve(next, rest, out);
            }
        }
        _ => {}
    }
}

fn push_leaf(value: &JsonValue, out: &mut Vec<AtomicValue>) {
    match value {
        JsonValue::Array(items) => {
            for item in items {
                push_leaf(item, out);
            }
        }
        other => out.extend(to_atomic(other)),
    }
}

/// Objects and arrays keep their compact JSON text as `raw` and their
/// members as children.
pub(crate) fn to_atomic(value: &JsonValue) -> Option<AtomicValue> {
    match value {
        JsonValue::Null => None,
        JsonValue::Bool(b) => Some(AtomicValue::from(b.to_string())),
        JsonValue::Number(n) => Some(AtomicValue::from(n.to_string())),
        JsonValue::String(s) => Some(AtomicValue::from(s.as_str())),
        JsonValue::Array(items) => Some(AtomicValue::with_children(
            value.to_string(),
            items.iter().filter_map(to_atomic).collect(),
        )),
        JsonValue::Object(map) => Some(AtomicValue::with_children(
            value.to_string(),
            map.values().filter_map(to_atomic).collect(),
        )),
    }
}
