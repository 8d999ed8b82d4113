//! Atomic values and the format-independent record model.
//!
//! Every reader produces [`DataRecord`]s and every selector turns a record
//! into a list of [`AtomicValue`]s, which is the only shape the constraint
//! engine ever looks at.

use std::fmt;
use std::sync::Arc;

use serde_json::Value as JsonValue;

use crate::selector::CompiledSelector;

/// One extracted datum: a raw string with optional language tag, URI and
/// child values.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AtomicValue {
    pub raw: String,
    pub lang: Option<String>,
    pub uri: Option<String>,
    pub children: Vec<AtomicValue>,
}

impl AtomicValue {
    /// Stores every argument verbatim; no trimming or normalization.
    pub fn new(raw: impl Into<String>, lang: Option<String>, uri: Option<String>) -> Self {
        AtomicValue {
            raw: raw.into(),
            lang,
            uri,
            children: Vec::new(),
        }
    }

    pub fn with_children(raw: impl Into<String>, children: Vec<AtomicValue>) -> Self {
        AtomicValue {
            raw: raw.into(),
            lang: None,
            uri: None,
            children,
        }
    }
}

impl From<&str> for AtomicValue {
    fn from(raw: &str) -> Self {
        AtomicValue::new(raw, None, None)
    }
}

impl From<String> for AtomicValue {
    fn from(raw: String) -> Self {
        AtomicValue::new(raw, None, None)
    }
}

/// Builds an [`AtomicValue`] with no children.
pub fn make_value(raw: &str, lang: Option<&str>, uri: Option<&str>) -> AtomicValue {
    AtomicValue::new(raw, lang.map(str::to_owned), uri.map(str::to_owned))
}

/// Serialization family a record was read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceFormat {
    Marc,
    Pica,
    Csv,
    Json,
}

impl SourceFormat {
    pub fn name(self) -> &'static str {
        match self {
            SourceFormat::Marc => "MARC",
            SourceFormat::Pica => "PICA",
            SourceFormat::Csv => "CSV",
            SourceFormat::Json => "JSON",
        }
    }
}

impl fmt::Display for SourceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subfield {
    pub code: char,
    pub value: String,
}

impl Subfield {
    pub fn new(code: char, value: impl Into<String>) -> Self {
        Subfield {
            code,
            value: value.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldContent {
    /// Control field (MARC 00X, the leader, Aleph administrative fields).
    Control(String),
    Subfields(Vec<Subfield>),
}

/// A MARC or PICA field occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    pub tag: String,
    /// PICA occurrence digits, verbatim (`"00"`, `"01"`, `"123"`).
    pub occurrence: Option<String>,
    /// MARC indicators; absent for control fields and PICA.
    pub indicators: Option<[char; 2]>,
    pub content: FieldContent,
}

impl Field {
    pub fn control(tag: impl Into<String>, value: impl Into<String>) -> Self {
        Field {
            tag: tag.into(),
            occurrence: None,
            indicators: None,
            content: FieldContent::Control(value.into()),
        }
    }

    pub fn marc_data(tag: impl Into<String>, indicators: [char; 2], subfields: Vec<Subfield>) -> Self {
        Field {
            tag: tag.into(),
            occurrence: None,
            indicators: Some(indicators),
            content: FieldContent::Subfields(subfields),
        }
    }

    pub fn pica(tag: impl Into<String>, occurrence: Option<String>, subfields: Vec<Subfield>) -> Self {
        Field {
            tag: tag.into(),
            occurrence,
            indicators: None,
            content: FieldContent::Subfields(subfields),
        }
    }

    pub fn subfields(&self) -> &[Subfield] {
        match &self.content {
            FieldContent::Subfields(sf) => sf,
            FieldContent::Control(_) => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RecordBody {
    Fields(Vec<Field>),
    Columns {
        header: Arc<[String]>,
        /// Empty cells are stored as `None`.
        cells: Vec<Option<String>>,
    },
    Document(JsonValue),
}

/// A record read from any supported source. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct DataRecord {
    record_id: String,
    format: SourceFormat,
    body: RecordBody,
}

impl DataRecord {
    pub fn new(record_id: impl Into<String>, format: SourceFormat, body: RecordBody) -> Self {
        DataRecord {
            record_id: record_id.into(),
            format,
            body,
        }
    }

    pub fn marc(record_id: impl Into<String>, fields: Vec<Field>) -> Self {
        Self::new(record_id, SourceFormat::Marc, RecordBody::Fields(fields))
    }

    pub fn pica(record_id: impl Into<String>, fields: Vec<Field>) -> Self {
        Self::new(record_id, SourceFormat::Pica, RecordBody::Fields(fields))
    }

    pub fn csv(record_id: impl Into<String>, header: Arc<[String]>, cells: Vec<Option<String>>) -> Self {
        Self::new(record_id, SourceFormat::Csv, RecordBody::Columns { header, cells })
    }

    pub fn json(record_id: impl Into<String>, document: JsonValue) -> Self {
        Self::new(record_id, SourceFormat::Json, RecordBody::Document(document))
    }

    pub fn record_id(&self) -> &str {
        &self.record_id
    }

    pub fn format(&self) -> SourceFormat {
        self.format
    }

    pub fn body(&self) -> &RecordBody {
        &self.body
    }

    /// MARC/PICA fields in source order; empty for CSV and JSON records.
    pub fn fields(&self) -> &[Field] {
        match &self.body {
            RecordBody::Fields(fields) => fields,
            _ => &[],
        }
    }

    /// Non-empty cell of the named column.
    pub fn column(&self, name: &str) -> Option<&str> {
        match &self.body {
            RecordBody::Columns { header, cells } => header
                .iter()
                .position(|h| h == name)
                .and_then(|i| cells.get(i))
                .and_then(|c| c.as_deref()),
            _ => None,
        }
    }

    pub fn document(&self) -> Option<&JsonValue> {
        match &self.body {
            RecordBody::Document(doc) => Some(doc),
            _ => None,
        }
    }

    /// All occurrences addressed by `selector`, in document order.
    pub fn extract(&self, selector: &CompiledSelector) -> Vec<AtomicValue> {
        selector.evaluate(self)
    }

    /// Flat `(tag, subfield, value)` listing of the record content.
    ///
    /// Control fields and CSV cells use an empty subfield code, PICA tags
    /// carry their occurrence (`045E/00`), and JSON leaves are keyed by
    /// their pointer.
    pub fn triples(&self) -> Vec<(String, String, String)> {
        let mut out = Vec::new();
        match &self.body {
            RecordBody::Fields(fields) => {
                for field in fields {
                    let tag = match &field.occurrence {
                        Some(occ) => format!("{}/{}", field.tag, occ),
                        None => field.tag.clone(),
                    };
                    match &field.content {
                        FieldContent::Control(v) => out.push((tag, String::new(), v.clone())),
                        FieldContent::Subfields(sfs) => {
                            for sf in sfs {
                                out.push((tag.clone(), sf.code.to_string(), sf.value.clone()));
                            }
                        }
                    }
                }
            }
            RecordBody::Columns { header, cells } => {
                for (name, cell) in header.iter().zip(cells) {
                    if let Some(v) = cell {
                        out.push((name.clone(), String::new(), v.clone()));
                    }
                }
            }
            RecordBody::Document(doc) => json_leaves(doc, &mut String::new(), &mut out),
        }
        out
    }
}

fn json_leaves(value: &JsonValue, pointer: &mut String, out: &mut Vec<(String, String, String)>) {
    let len = pointer.len();
    match value {
        JsonValue::Null => {}
        JsonValue::Bool(b) => out.push((pointer.clone(), String::new(), b.to_string())),
        JsonValue::Number(n) => out.push((pointer.clone(), String::new(), n.to_string())),
        JsonValue::String(s) => out.push((pointer.clone(), String::new(), s.clone())),
        JsonValue::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                pointer.push('/');
                pointer.push_str(&i.to_string());
                json_leaves(item, pointer, out);
                pointer.truncate(len);
            }
        }
        JsonValue::Object(map) => {
            for (key, item) in map {
                pointer.push('/');
                pointer.push_str(&key.replace('~', "~0").replace('/', "~1"));
                json_leaves(item, pointer, out);
                pointer.truncate(len);
            }
        }
    }
}
