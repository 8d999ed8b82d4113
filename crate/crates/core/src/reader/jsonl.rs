use std::io::BufRead;

use serde_json::Value as JsonValue;

use super::{read_line_bytes, ReaderDiagnostics, ReaderError, RecordReader};
use crate::selector::JsonPointer;
use crate::value::{DataRecord, SourceFormat};

/// JSON lines reader: each non-blank line holds one JSON object.
pub struct JsonLinesReader<R> {
    input: R,
    line: Vec<u8>,
    line_no: u64,
    id_pointer: Option<JsonPointer>,
    diagnostics: ReaderDiagnostics,
    done: bool,
}

impl<R: BufRead> JsonLinesReader<R> {
    pub fn new(input: R, id_pointer: Option<&str>) -> Result<Self, ReaderError> {
        Ok(JsonLinesReader {
            input,
            line: Vec::new(),
            line_no: 0,
            id_pointer: id_pointer.map(JsonPointer::parse).transpose()?,
            diagnostics: ReaderDiagnostics::default(),
            done: false,
        })
    }
}

impl<R: BufRead> Iterator for JsonLinesReader<R> {
    type Item = DataRecord;

    fn next(&mut self) -> Option<DataRecord> {
        while !self.done {
            match read_line_bytes(&mut self.input, &mut self.line) {
                Ok(true) => {}
                Ok(false) => {
                    self.done = true;
                    break;
                }
                Err(err) => {
                    self.diagnostics.io_error = Some(err.to_string());
                    self.done = true;
                    break;
                }
            }
            self.line_no += 1;
            let line_no = self.line_no;
            if self.line.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            let text = self.diagnostics.decode(&self.line).into_owned();
            let document = match serde_json::from_str::<JsonValue>(&text) {
                Ok(doc @ JsonValue::Object(_)) => doc,
                Ok(_) => {
                    self.diagnostics.records_skipped += 1;
                    self.diagnostics.warn(line_no, "line is not a JSON object; skipped");
                    continue;
                }
                Err(err) => {
                    self.diagnostics.records_skipped += 1;
                    self.diagnostics.warn(line_no, format!("invalid JSON: {err}; skipped"));
                    continue;
                }
            };
            let id = self
                .id_pointer
                .as_ref()
                .and_then(|p| p.first_scalar(&document))
                .filter(|id| !id.is_empty());
            let id = match id {
                Some(id) => id,
                None => {
                    if self.id_pointer.is_some() {
                        self.diagnostics
                            .warn(line_no, "id pointer matched nothing; synthesized record id");
                    }
                    format!("line-{line_no}")
                }
            };
            self.diagnostics.records_read += 1;
            return Some(DataRecord::json(id, document));
        }
        None
    }
}

impl<R: BufRead> RecordReader for JsonLinesReader<R> {
    fn diagnostics(&self) -> &ReaderDiagnostics {
        &self.diagnostics
    }

    fn source_format(&self) -> SourceFormat {
        SourceFormat::Json
    }
}
