use std::io::BufRead;

use super::{read_line_bytes, ReaderDiagnostics, RecordReader};
use crate::value::{DataRecord, Field, FieldContent, SourceFormat, Subfield};

/// `000000001 040   L ` is 18 bytes: id, space, tag, two indicators, space, `L`, space.
const PREFIX_LEN: usize = 18;

/// Aleph sequential MARC reader.
///
/// Consecutive lines sharing the 9-character system number form one record.
/// The record id is the 001 value when present, otherwise the system number.
pub struct AlephseqReader<R> {
    input: R,
    line: Vec<u8>,
    line_no: u64,
    current: Option<(String, Vec<Field>)>,
    ordinal: u64,
    diagnostics: ReaderDiagnostics,
    done: bool,
}

impl<R: BufRead> AlephseqReader<R> {
    pub fn new(input: R) -> Self {
        AlephseqReader {
            input,
            line: Vec::new(),
            line_no: 0,
            current: None,
            ordinal: 0,
            diagnostics: ReaderDiagnostics::default(),
            done: false,
        }
    }

    fn finish(&mut self, sysno: String, fields: Vec<Field>) -> DataRecord {
        self.ordinal += 1;
        self.diagnostics.records_read += 1;
        let id = fields.iter().find(|f| f.tag == "001").and_then(|f| match &f.content {
            FieldContent::Control(v) if !v.is_empty() => Some(v.clone()),
            _ => None,
        });
        DataRecord::marc(id.unwrap_or(sysno), fields)
    }

    fn parse_line(&mut self) -> Option<(String, Field)> {
        let line = &self.line;
        let ordinal = self.ordinal + 1;
        let line_no = self.line_no;
        if line.len() < PREFIX_LEN {
            self.diagnostics.warn(
                ordinal,
                format!("line {line_no}: shorter than the fixed prefix; skipped"),
            );
            return None;
        }
        if line[9] != b' ' || line[15] != b' ' || line[16] != b'L' || line[17] != b' ' {
            self.diagnostics
                .warn(ordinal, format!("line {line_no}: malformed fixed prefix; skipped"));
            return None;
        }
        if !line[..15].is_ascii() {
            self.diagnostics
                .warn(ordinal, format!("line {line_no}: non-ASCII identifier or tag; skipped"));
            return None;
        }
        let sysno = String::from_utf8_lossy(&line[..9]).into_owned();
        let tag = String::from_utf8_lossy(&line[10..13]).into_owned();
        let indicators = [char::from(line[13]), char::from(line[14])];
        let content = self.diagnostics.decode(&self.line[PREFIX_LEN..]).into_owned();

        let is_control = tag == "LDR" || tag.starts_with("00") || !tag.bytes().all(|b| b.is_ascii_digit());
        if is_control {
            return Some((sysno, Field::control(tag, content)));
        }
        let Some(body) = content.strip_prefix("$$") else {
            self.diagnostics.warn(
                ordinal,
                format!("line {line_no}: data field {tag} has no $$ subfield; skipped"),
            );
            return None;
        };
        let mut subfields = Vec::new();
        for piece in body.split("$$") {
            let mut chars = piece.chars();
            match chars.next() {
                Some(code) => subfields.push(Subfield::new(code, chars.as_str())),
                None => self
                    .diagnostics
                    .warn(ordinal, format!("line {line_no}: empty subfield in {tag} ignored")),
            }
        }
        Some((sysno, Field::marc_data(tag, indicators, subfields)))
    }
}

impl<R: BufRead> Iterator for AlephseqReader<R> {
    type Item = DataRecord;

    fn next(&mut self) -> Option<DataRecord> {
        while !self.done {
            match read_line_bytes(&mut self.input, &mut self.line) {
                Ok(true) => {}
                Ok(false) => self.done = true,
                Err(err) => {
                    self.diagnostics.io_error = Some(err.to_string());
                    self.done = true;
                }
            }
            if self.done {
                break;
            }
            self.line_no += 1;
            if self.line.is_empty() {
                continue;
            }
            let Some((sysno, field)) = self.parse_line() else {
                continue;
            };
            match &mut self.current {
                Some((cur, fields)) if *cur == sysno => fields.push(field),
                _ => {
                    let finished = self.current.replace((sysno, vec![field]));
                    if let Some((sysno, fields)) = finished {
                        return Some(self.finish(sysno, fields));
                    }
                }
            }
        }
        let (sysno, fields) = self.current.take()?;
        Some(self.finish(sysno, fields))
    }
}

impl<R: BufRead> RecordReader for AlephseqReader<R> {
    fn diagnostics(&self) -> &ReaderDiagnostics {
        &self.diagnostics
    }

    fn source_format(&self) -> SourceFormat {
        SourceFormat::Marc
    }
}
