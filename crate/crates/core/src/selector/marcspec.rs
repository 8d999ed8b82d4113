//! MARCspec subset.
//!
//! ```text
//! spec      := tag (charrange | subfield | indicator)?
//! tag       := [0-9]{3} | "LDR"
//! charrange := "/" INT ("-" INT)?
//! subfield  := "$" [a-z0-9]
//! indicator := "^" ("1" | "2")
//! ```
//!
//! Character positions are zero-based and inclusive on both ends.

use super::SyntaxError;
use crate::value::{AtomicValue, Field, FieldContent};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarcAccessor {
    Chars { start: usize, end: usize },
    Subfield(char),
    Indicator(u8),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarcSpec {
    pub tag: String,
    pub accessor: Option<MarcAccessor>,
}

impl MarcSpec {
    pub fn parse(text: &str) -> Result<Self, SyntaxError> {
        let bytes = text.as_bytes();
        let tag = if text.starts_with("LDR") {
            "LDR"
        } else if bytes.len() >= 3 && bytes[..3].iter().all(u8::is_ascii_digit) {
            &text[..3]
        } else {
            let bad = bytes
                .iter()
                .take(3)
                .position(|b| !b.is_ascii_digit())
                .unwrap_or(bytes.len());
            return Err(SyntaxError::new(bad, "tag must be three digits or LDR"));
        };
        let rest = &text[3..];
        let accessor = match rest.as_bytes().first() {
            None => None,
            Some(b'/') => Some(parse_char_range(rest, 3)?),
            Some(b'$') => {
                let mut chars = rest[1..].chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) if c.is_ascii_lowercase() || c.is_ascii_digit() => Some(MarcAccessor::Subfield(c)),
                    (None, _) => return Err(SyntaxError::new(4, "missing subfield code")),
                    (Some(c), None) => return Err(SyntaxError::new(4, format!("invalid subfield code {c:?}"))),
                    (Some(_), Some(_)) => return Err(SyntaxError::new(5, "only a single subfield code is supported")),
                }
            }
            Some(b'^') => match &rest[1..] {
                "1" => Some(MarcAccessor::Indicator(1)),
                "2" => Some(MarcAccessor::Indicator(2)),
                _ => return Err(SyntaxError::new(4, "indicator must be ^1 or ^2")),
            },
            Some(_) => return Err(SyntaxError::new(3, format!("unexpected {rest:?} after tag"))),
        };
        Ok(MarcSpec {
            tag: tag.to_owned(),
            accessor,
        })
    }

    pub fn evaluate(&self, fields: &[Field]) -> Vec<AtomicValue> {
        let mut out = Vec::new();
        for field in fields.iter().filter(|f| f.tag == self.tag) {
            match (self.accessor, &field.content) {
                (None, FieldContent::Control(value)) => out.push(AtomicValue::from(value.as_str())),
                (None, FieldContent::Subfields(sfs)) => {
                    let joined = sfs.iter().map(|s| s.value.as_str()).collect::<Vec<_>>().join(" ");
                    let children = sfs.iter().map(|s| AtomicValue::from(s.value.as_str())).collect();
                    out.push(AtomicValue::with_children(joined, children));
                }
                (Some(MarcAccessor::Chars { start, end }), FieldContent::Control(value)) => {
                    if let Some(slice) = slice_chars(value, start, end) {
                        out.push(AtomicValue::from(slice));
                    }
                }
                (Some(MarcAccessor::Subfield(code)), FieldContent::Subfields(sfs)) => out.extend(
                    sfs.iter()
                        .filter(|s| s.code == code)
                        .map(|s| AtomicValue::from(s.value.as_str())),
                ),
                (Some(MarcAccessor::Indicator(n)), _) => {
                    if let Some(ind) = field.indicators {
                        out.push(AtomicValue::from(ind[usize::from(n - 1)].to_string()));
                    }
                }
                _ => {}
            }
        }
        out
    }
}

fn parse_char_range(rest: &str, offset: usize) -> Result<MarcAccessor, SyntaxError> {
    let body = &rest[1..];
    let (first, second) = match body.split_once('-') {
        Some((a, b)) => (a, Some(b)),
        None => (body, None),
    };
    let parse_int = |s: &str, pos: usize| -> Result<usize, SyntaxError> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(SyntaxError::new(
                pos,
                format!("expected character position, found {s:?}"),
            ));
        }
        s.parse()
            .map_err(|_| SyntaxError::new(pos, "character position out of range"))
    };
    let start = parse_int(first, offset + 1)?;
    let end = match second {
        Some(s) => parse_int(s, offset + 2 + first.len())?,
        None => start,
    };
    if end < start {
        return Err(SyntaxError::new(
            offset + 2 + first.len(),
            format!("range end {end} precedes start {start}"),
        ));
    }
    Ok(MarcAccessor::Chars { start, end })
}

/// Inclusive slice by Unicode scalar position, truncated at the end of the
/// value. `None` when `start` is past the end.
fn slice_chars(value: &str, start: usize, end: usize) -> Option<String> {
    let slice: String = value
        .chars()
        .skip(start)
        .take((end - start).saturating_add(1))
        .collect();
    if slice.is_empty() {
        None
    } else {
        Some(slice)
    }
}
