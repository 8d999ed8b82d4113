//! Addressing languages: a MARCspec subset, a PICA Path subset, CSV column
//! names and a JSON pointer dialect.
//!
//! Each language compiles into a [`CompiledSelector`] that evaluates against
//! a [`DataRecord`] of the matching [`SourceFormat`]. Absence is never an
//! error; it is an empty result list.

mod marcspec;
pub(crate) mod picapath;
mod pointer;

use std::fmt;

use thiserror::Error;

pub use marcspec::{MarcAccessor, MarcSpec};
pub use picapath::PicaPath;
pub use pointer::{JsonPointer, PointerSegment};

use crate::value::{AtomicValue, DataRecord, RecordBody, SourceFormat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at position {position}: {reason}")]
pub struct SyntaxError {
    pub position: usize,
    pub reason: String,
}

impl SyntaxError {
    pub(crate) fn new(position: usize, reason: impl Into<String>) -> Self {
        SyntaxError {
            position,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectorLanguage {
    MarcSpec,
    PicaPath,
    Column,
    JsonPointer,
}

impl SelectorLanguage {
    pub fn for_format(format: SourceFormat) -> Self {
        match format {
            SourceFormat::Marc => SelectorLanguage::MarcSpec,
            SourceFormat::Pica => SelectorLanguage::PicaPath,
            SourceFormat::Csv => SelectorLanguage::Column,
            SourceFormat::Json => SelectorLanguage::JsonPointer,
        }
    }
}

impl fmt::Display for SelectorLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectorLanguage::MarcSpec => "MARCspec",
            SelectorLanguage::PicaPath => "PICA Path",
            SelectorLanguage::Column => "column",
            SelectorLanguage::JsonPointer => "JSON pointer",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SelectorParts {
    MarcSpec(MarcSpec),
    PicaPath(PicaPath),
    Column(String),
    JsonPointer(JsonPointer),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledSelector {
    source_text: String,
    parts: SelectorParts,
}

impl CompiledSelector {
    pub fn parse(language: SelectorLanguage, text: &str) -> Result<Self, SyntaxError> {
        match language {
            SelectorLanguage::MarcSpec => parse_marcspec(text),
            SelectorLanguage::PicaPath => parse_picapath(text),
            SelectorLanguage::Column => parse_column(text),
            SelectorLanguage::JsonPointer => parse_jsonpointer(text),
        }
    }

    pub fn language(&self) -> SelectorLanguage {
        match self.parts {
            SelectorParts::MarcSpec(_) => SelectorLanguage::MarcSpec,
            SelectorParts::PicaPath(_) => SelectorLanguage::PicaPath,
            SelectorParts::Column(_) => SelectorLanguage::Column,
            SelectorParts::JsonPointer(_) => SelectorLanguage::JsonPointer,
        }
    }

    pub fn parts(&self) -> &SelectorParts {
        &self.parts
    }

    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    /// Values addressed in `record`, in document order.
    ///
    /// A record of a format the selector was not compiled for yields an
    /// empty list.
    pub fn evaluate(&self, record: &DataRecord) -> Vec<AtomicValue> {
        if SelectorLanguage::for_format(record.format()) != self.language() {
            return Vec::new();
        }
        match (&self.parts, record.body()) {
            (SelectorParts::MarcSpec(spec), RecordBody::Fields(fields)) => spec.evaluate(fields),
            (SelectorParts::PicaPath(path), RecordBody::Fields(fields)) => path.evaluate(fields),
            (SelectorParts::Column(name), RecordBody::Columns { .. }) => record
                .column(name)
                .map(|cell| vec![AtomicValue::from(cell)])
                .unwrap_or_default(),
            (SelectorParts::JsonPointer(ptr), RecordBody::Document(doc)) => ptr.evaluate(doc),
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for CompiledSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source_text)
    }
}

pub fn parse_marcspec(text: &str) -> Result<CompiledSelector, SyntaxError> {
    Ok(CompiledSelector {
        source_text: text.to_owned(),
        parts: SelectorParts::MarcSpec(MarcSpec::parse(text)?),
    })
}

pub fn parse_picapath(text: &str) -> Result<CompiledSelector, SyntaxError> {
    Ok(CompiledSelector {
        source_text: text.to_owned(),
        parts: SelectorParts::PicaPath(PicaPath::parse(text)?),
    })
}

/// Any non-empty string names a column; it is matched exactly.
pub fn parse_column(text: &str) -> Result<CompiledSelector, SyntaxError> {
    if text.is_empty() {
        return Err(SyntaxError::new(0, "column name must not be empty"));
    }
    Ok(CompiledSelector {
        source_text: text.to_owned(),
        parts: SelectorParts::Column(text.to_owned()),
    })
}

pub fn parse_jsonpointer(text: &str) -> Result<CompiledSelector, SyntaxError> {
    Ok(CompiledSelector {
        source_text: text.to_owned(),
        parts: SelectorParts::JsonPointer(JsonPointer::parse(text)?),
    })
}

/// Evaluates `selector` against `record`.
pub fn evaluate(selector: &CompiledSelector, record: &DataRecord) -> Vec<AtomicValue> {
    selector.evaluate(record)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use proptest::prelude::*;

    use super::*;
    use crate::value::{Field, Subfield};

    fn raws(values: &[AtomicValue]) -> Vec<&str> {
        values.iter().map(|v| v.raw.as_str()).collect()
    }

    #[test]
    fn column_selector_is_verbatim() {
        let sel = parse_column("  title  ").unwrap();
        assert_eq!(sel.parts(), &SelectorParts::Column("  title  ".into()));
        assert!(parse_column("").is_err());

        let header: Arc<[String]> = vec!["id".to_string(), "title".to_string(), "  title  ".to_string()].into();
        let rec = DataRecord::csv("1", header, vec![Some("1".into()), Some("Faust".into()), None]);
        assert_eq!(raws(&parse_column("title").unwrap().evaluate(&rec)), ["Faust"]);
        assert!(sel.evaluate(&rec).is_empty());
        assert!(parse_column("Title").unwrap().evaluate(&rec).is_empty());
    }

    #[test]
    fn format_mismatch_yields_nothing() {
        let rec = DataRecord::marc(
            "1",
            vec![Field::marc_data("040", [' ', ' '], vec![Subfield::new('a', "x")])],
        );
        assert!(parse_picapath("040A$a").unwrap().evaluate(&rec).is_empty());
        assert_eq!(raws(&parse_marcspec("040$a").unwrap().evaluate(&rec)), ["x"]);
    }

    fn marc_spec_text() -> impl Strategy<Value = String> {
        let tag = prop_oneof![Just("LDR".to_string()), "[0-9]{3}"];
        let acc = prop_oneof![
            Just(String::new()),
            "\\$[a-z0-9]",
            "\\^[12]",
            (0usize..40).prop_map(|p| format!("/{p}")),
            (0usize..40, 0usize..40).prop_map(|(a, b)| format!("/{}-{}", a.min(b), a.max(b))),
        ];
        (tag, acc).prop_map(|(t, a)| format!("{t}{a}"))
    }

    proptest! {
        #[test]
        fn marcspec_round_trips(text in marc_spec_text()) {
            let sel = parse_marcspec(&text).unwrap();
            prop_assert_eq!(sel.source_text(), text.as_str());
            prop_assert_eq!(parse_marcspec(sel.source_text()).unwrap(), sel);
        }

        #[test]
        fn picapath_round_trips(text in "[0-9]{3}[A-Z@](/[0-9]{2,3})?([$.][A-Za-z0-9])?") {
            let sel = parse_picapath(&text).unwrap();
            prop_assert_eq!(parse_picapath(sel.source_text()).unwrap(), sel);
        }

        #[test]
        fn pointer_round_trips(segs in proptest::collection::vec("[a-z~/*0-9]{0,4}", 1..4)) {
            let text: String = segs
                .iter()
                .map(|s| format!("/{}", s.replace('~', "~0").replace('/', "~1")))
                .collect();
            let sel = parse_jsonpointer(&text).unwrap();
            prop_assert_eq!(sel.source_text(), text.as_str());
            prop_assert_eq!(parse_jsonpointer(&text).unwrap(), sel);
        }
    }
}
