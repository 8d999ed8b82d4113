//! PICA Path subset.
//!
//! ```text
//! path := tag ("/" [0-9]{2,3})? (("$" | ".") [A-Za-z0-9])?
//! tag  := [0-9]{3} [A-Z@]
//! ```

use super::SyntaxError;
use crate::value::{AtomicValue, Field};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PicaPath {
    pub tag: String,
    pub occurrence: Option<String>,
    pub subfield: Option<char>,
}

pub(crate) fn is_pica_tag(tag: &[u8]) -> bool {
    tag.len() == 4 && tag[..3].iter().all(u8::is_ascii_digit) && (tag[3].is_ascii_uppercase() || tag[3] == b'@')
}

pub(crate) fn is_pica_occurrence(occ: &[u8]) -> bool {
    (2..=3).contains(&occ.len()) && occ.iter().all(u8::is_ascii_digit)
}

impl PicaPath {
    pub fn parse(text: &str) -> Result<Self, SyntaxError> {
        let bytes = text.as_bytes();
        if bytes.len() < 4 || !is_pica_tag(&bytes[..4]) {
            return Err(SyntaxError::new(0, "tag must be three digits followed by A-Z or @"));
        }
        let mut pos = 4;
        let mut occurrence = None;
        if bytes.get(pos) == Some(&b'/') {
            let digits = bytes[pos + 1..].iter().take_while(|b| b.is_ascii_digit()).count();
            if !(2..=3).contains(&digits) {
                return Err(SyntaxError::new(pos + 1, "occurrence must have two or three digits"));
            }
            occurrence = Some(text[pos + 1..pos + 1 + digits].to_owned());
            pos += 1 + digits;
        }
        let mut subfield = None;
        if let Some(&b) = bytes.get(pos) {
            if b != b'$' && b != b'.' {
                return Err(SyntaxError::new(pos, format!("unexpected {:?}", &text[pos..])));
            }
            match bytes.get(pos + 1) {
                Some(c) if c.is_ascii_alphanumeric() => subfield = Some(char::from(*c)),
                Some(_) => return Err(SyntaxError::new(pos + 1, "subfield code must be alphanumeric")),
                None => return Err(SyntaxError::new(pos + 1, "missing subfield code")),
            }
            if pos + 2 != bytes.len() {
                return Err(SyntaxError::new(pos + 2, "trailing input after subfield code"));
            }
        }
        Ok(PicaPath {
            tag: text[..4].to_owned(),
            occurrence,
            subfield,
        })
    }

    /// `/00` also matches fields that carry no occurrence at all.
    fn occurrence_matches(&self, field: &Field) -> bool {
        match (&self.occurrence, &field.occurrence) {
            (None, _) => true,
            (Some(want), Some(have)) => want == have,
            (Some(want), None) => want == "00",
        }
    }

    pub fn evaluate(&self, fields: &[Field]) -> Vec<AtomicValue> {
        let mut out = Vec::new();
        for field in fields
            .iter()
            .filter(|f| f.tag == self.tag && self.occurrence_matches(f))
        {
            let sfs = field.subfields();
            match self.subfield {
                Some(code) => out.extend(
                    sfs.iter()
                        .filter(|s| s.code == code)
                        .map(|s| AtomicValue::from(s.value.as_str())),
                ),
                None => {
                    let joined = sfs.iter().map(|s| s.value.as_str()).collect::<Vec<_>>().join(" ");
                    let children = sfs.iter().map(|s| AtomicValue::from(s.value.as_str())).collect();
                    out.push(AtomicValue::with_children(joined, children));
                }
            }
        }
        out
    }
}
