use std::io::BufRead;

use super::{read_line_bytes, ReaderDiagnostics, RecordReader};
use crate::selector::picapath::{is_pica_occurrence, is_pica_tag};
use crate::value::{DataRecord, Field, SourceFormat, Subfield};

/// Splits `TAG[/OCC]` into its parts.
fn parse_tag(head: &str) -> Result<(String, Option<String>), String> {
    let (tag, occ) = match head.split_once('/') {
        Some((t, o)) => (t, Some(o)),
        None => (head, None),
    };
    if !is_pica_tag(tag.as_bytes()) {
        return Err(format!("invalid tag {tag:?}"));
    }
    if let Some(o) = occ {
        if !is_pica_occurrence(o.as_bytes()) {
            return Err(format!("invalid occurrence {o:?}"));
        }
    }
    Ok((tag.to_owned(), occ.map(str::to_owned)))
}

fn record_id(fields: &[Field], ordinal: u64, diag: &mut ReaderDiagnostics) -> String {
    let id = fields
        .iter()
        .filter(|f| f.tag == "003@")
        .flat_map(|f| f.subfields())
        .find(|s| s.code == '0' && !s.value.is_empty())
        .map(|s| s.value.clone());
    id.unwrap_or_else(|| {
        diag.warn(ordinal, "no 003@ $0 record id; synthesized record id");
        format!("rec-{ordinal}")
    })
}

/// PICA plain: one field per line, `$` introduces a subfield, `$$` is a
/// literal dollar sign, and a blank line ends the record.
pub struct PicaPlainReader<R> {
    input: R,
    line: Vec<u8>,
    line_no: u64,
    ordinal: u64,
    diagnostics: ReaderDiagnostics,
    done: bool,
}

impl<R: BufRead> PicaPlainReader<R> {
    pub fn new(input: R) -> Self {
        PicaPlainReader {
            input,
            line: Vec::new(),
            line_no: 0,
            ordinal: 0,
            diagnostics: ReaderDiagnostics::default(),
            done: false,
        }
    }
}

pub(crate) fn parse_plain_line(line: &str) -> Result<Field, String> {
    let (head, content) = line
        .split_once(' ')
        .ok_or_else(|| "missing space between tag and subfields".to_string())?;
    let (tag, occurrence) = parse_tag(head)?;
    let mut chars = content.chars().peekable();
    if chars.next() != Some('$') {
        return Err("field content must start with '$'".into());
    }
    let mut subfields = Vec::new();
    loop {
        let code = match chars.next() {
            Some(c) if c.is_ascii_alphanumeric() => c,
            Some(c) => return Err(format!("invalid subfield code {c:?}")),
            None => return Err("missing subfield code".into()),
        };
        let mut value = String::new();
        let mut more = false;
        while let Some(c) = chars.next() {
            if c != '$' {
                value.push(c);
            } else if chars.peek() == Some(&'$') {
                chars.next();
                value.push('$');
            } else {
                more = true;
                break;
            }
        }
        subfields.push(Subfield::new(code, value));
        if !more {
            break;
        }
    }
    Ok(Field::pica(tag, occurrence, subfields))
}

impl<R: BufRead> PicaPlainReader<R> {
    fn finish(&mut self, fields: Vec<Field>) -> Option<DataRecord> {
        self.ordinal += 1;
        if fields.is_empty() {
            self.diagnostics.records_skipped += 1;
            self.diagnostics
                .warn(self.ordinal, "record has no valid fields; skipped");
            return None;
        }
        self.diagnostics.records_read += 1;
        let id = record_id(&fields, self.ordinal, &mut self.diagnostics);
        Some(DataRecord::pica(id, fields))
    }
}

impl<R: BufRead> Iterator for PicaPlainReader<R> {
    type Item = DataRecord;

    fn next(&mut self) -> Option<DataRecord> {
        let mut fields = Vec::new();
        let mut saw_lines = false;
        while !self.done {
            let more = match read_line_bytes(&mut self.input, &mut self.line) {
                Ok(more) => more,
                Err(err) => {
                    self.diagnostics.io_error = Some(err.to_string());
                    false
                }
            };
            if !more {
                self.done = true;
                break;
            }
            self.line_no += 1;
            if self.line.is_empty() {
                if !saw_lines {
                    continue;
                }
                if let Some(record) = self.finish(std::mem::take(&mut fields)) {
                    return Some(record);
                }
                saw_lines = false;
                continue;
            }
            saw_lines = true;
            let text = self.diagnostics.decode(&self.line).into_owned();
            match parse_plain_line(&text) {
                Ok(field) => fields.push(field),
                Err(reason) => self
                    .diagnostics
                    .warn(self.ordinal + 1, format!("line {}: {reason}; skipped", self.line_no)),
            }
        }
        if saw_lines {
            self.finish(fields)
        } else {
            None
        }
    }
}

impl<R: BufRead> RecordReader for PicaPlainReader<R> {
    fn diagnostics(&self) -> &ReaderDiagnostics {
        &self.diagnostics
    }

    fn source_format(&self) -> SourceFormat {
        SourceFormat::Pica
    }
}

const FIELD_SEPARATOR: u8 = 0x1E;
const SUBFIELD_MARKER: u8 = 0x1F;

/// Normalized PICA: one record per line, fields end with 0x1E, subfields
/// start with 0x1F followed by the code.
pub struct PicaNormalizedReader<R> {
    input: R,
    line: Vec<u8>,
    ordinal: u64,
    diagnostics: ReaderDiagnostics,
    done: bool,
}

impl<R: BufRead> PicaNormalizedReader<R> {
    pub fn new(input: R) -> Self {
        PicaNormalizedReader {
            input,
            line: Vec::new(),
            ordinal: 0,
            diagnostics: ReaderDiagnostics::default(),
            done: false,
        }
    }

    fn parse_field(&mut self, token: &[u8]) -> Result<Field, String> {
        let Some(marker) = token.iter().position(|b| *b == SUBFIELD_MARKER) else {
            return Err("field without subfields".into());
        };
        let head = self.diagnostics.decode(&token[..marker]).into_owned();
        let head = head.strip_suffix(' ').unwrap_or(&head);
        let (tag, occurrence) = parse_tag(head)?;
        let mut subfields = Vec::new();
        for piece in token[marker + 1..].split(|b| *b == SUBFIELD_MARKER) {
            let text = self.diagnostics.decode(piece);
            let mut chars = text.chars();
            match chars.next() {
                Some(code) => subfields.push(Subfield::new(code, chars.as_str())),
                None => return Err("empty subfield".into()),
            }
        }
        Ok(Field::pica(tag, occurrence, subfields))
    }
}

impl<R: BufRead> Iterator for PicaNormalizedReader<R> {
    type Item = DataRecord;

    fn next(&mut self) -> Option<DataRecord> {
        while !self.done {
            match read_line_bytes(&mut self.input, &mut self.line) {
                Ok(true) => {}
                Ok(false) => {
                    self.done = true;
                    return None;
                }
                Err(err) => {
                    self.diagnostics.io_error = Some(err.to_string());
                    self.done = true;
                    return None;
                }
            }
            if self.line.is_empty() {
                continue;
            }
            self.ordinal += 1;
            let ordinal = self.ordinal;
            let line = std::mem::take(&mut self.line);
            let mut fields = Vec::new();
            for token in line.split(|b| *b == FIELD_SEPARATOR).filter(|t| !t.is_empty()) {
                match self.parse_field(token) {
                    Ok(field) => fields.push(field),
                    Err(reason) => {
                        let shown = String::from_utf8_lossy(&token[..token.len().min(8)]).into_owned();
                        self.diagnostics
                            .warn(ordinal, format!("field {shown:?}: {reason}; skipped"))
                    }
                }
            }
            self.line = line;
            if fields.is_empty() {
                self.diagnostics.records_skipped += 1;
                self.diagnostics.warn(ordinal, "record has no valid fields; skipped");
                continue;
            }
            self.diagnostics.records_read += 1;
            let id = record_id(&fields, ordinal, &mut self.diagnostics);
            return Some(DataRecord::pica(id, fields));
        }
        None
    }
}

impl<R: BufRead> RecordReader for PicaNormalizedReader<R> {
    fn diagnostics(&self) -> &ReaderDiagnostics {
        &self.diagnostics
    }

    fn source_format(&self) -> SourceFormat {
        SourceFormat::Pica
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_line_parsing() {
        let f = parse_plain_line("021A $aDie Blechtrommel").unwrap();
        assert_eq!((f.tag.as_str(), f.occurrence.as_deref()), ("021A", None));
        assert_eq!(f.subfields(), [Subfield::new('a', "Die Blechtrommel")]);

        let f = parse_plain_line("045E/00 $a810").unwrap();
        assert_eq!(f.occurrence.as_deref(), Some("00"));

        let f = parse_plain_line("009P $a5$$0$bx").unwrap();
        assert_eq!(f.subfields(), [Subfield::new('a', "5$0"), Subfield::new('b', "x")]);

        let f = parse_plain_line("009P $a$$").unwrap();
        assert_eq!(f.subfields(), [Subfield::new('a', "$")]);

        for bad in ["21A $ax", "021A", "021A ax", "021A/1 $ax", "021A $", "021A $-x"] {
            assert!(parse_plain_line(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn plain_records_split_on_blank_lines() {
        let input = "003@ $0111\n021A $aA\n\n\n003@ $0222\nbad line\n021A $aB\n\n";
        let mut reader = PicaPlainReader::new(input.as_bytes());
        let ids: Vec<_> = reader
            .by_ref()
            .map(|r| (r.record_id().to_string(), r.fields().len()))
            .collect();
        assert_eq!(ids, [("111".to_string(), 2), ("222".to_string(), 2)]);
        let d = reader.diagnostics();
        assert_eq!((d.records_read, d.records_skipped), (2, 0));
        assert_eq!(d.warnings.len(), 1);
        assert_eq!(d.warnings[0].ordinal, 2);
        assert!(d.warnings[0].message.starts_with("line 6:"));
    }

    #[test]
    fn plain_record_without_terminating_blank_line() {
        let mut reader = PicaPlainReader::new(&b"021A $aX"[..]);
        assert_eq!(reader.next().unwrap().record_id(), "rec-1");
        assert!(reader.next().is_none());
    }

    #[test]
    fn normalized_records() {
        let input = b"003@ \x1f0123\x1e021A \x1faT\n\n045E/01 \x1fa1\x1e003@\x1e";
        let mut reader = PicaNormalizedReader::new(&input[..]);
        let rec = reader.next().unwrap();
        assert_eq!(rec.record_id(), "123");
        assert_eq!(rec.fields().len(), 2);
        let rec = reader.next().unwrap();
        assert_eq!(rec.record_id(), "rec-2");
        assert_eq!(rec.fields()[0].occurrence.as_deref(), Some("01"));
        assert!(reader.next().is_none());
        let d = reader.diagnostics();
        assert_eq!(d.records_read, 2);
        // field without 0x1F, then the missing id
        assert_eq!(d.warnings.len(), 2);
    }
}
