use std::io::BufRead;

use super::{ReaderDiagnostics, RecordReader};
use crate::value::{DataRecord, Field, SourceFormat, Subfield};

const LEADER_LEN: usize = 24;
const DIRECTORY_ENTRY_LEN: usize = 12;
const FIELD_TERMINATOR: u8 = 0x1E;
const SUBFIELD_DELIMITER: u8 = 0x1F;
const RECORD_TERMINATOR: u8 = 0x1D;

/// ISO 2709 (binary MARC) reader.
///
/// Records are framed by the record terminator rather than by the leader
/// length, so a record with broken framing is dropped and reading resumes
/// right after its terminator.
pub struct Iso2709Reader<R> {
    input: R,
    buf: Vec<u8>,
    ordinal: u64,
    diagnostics: ReaderDiagnostics,
    done: bool,
}

impl<R: BufRead> Iso2709Reader<R> {
    pub fn new(input: R) -> Self {
        Iso2709Reader {
            input,
            buf: Vec::new(),
            ordinal: 0,
            diagnostics: ReaderDiagnostics::default(),
            done: false,
        }
    }

    pub fn into_diagnostics(self) -> ReaderDiagnostics {
        self.diagnostics
    }
}

impl<R: BufRead> Iterator for Iso2709Reader<R> {
    type Item = DataRecord;

    fn next(&mut self) -> Option<DataRecord> {
        while !self.done {
            self.buf.clear();
            match self.input.read_until(RECORD_TERMINATOR, &mut self.buf) {
                Ok(0) => {
                    self.done = true;
                    return None;
                }
                Ok(_) => {}
                Err(err) => {
                    self.diagnostics.io_error = Some(err.to_string());
                    self.done = true;
                    return None;
                }
            }
            // Line breaks between records are common in exported files.
            let skip = self.buf.iter().take_while(|b| matches!(b, b'\n' | b'\r')).count();
            let chunk = &self.buf[skip..];
            if chunk.is_empty() {
                continue;
            }
            self.ordinal += 1;
            let ordinal = self.ordinal;
            if chunk.last() != Some(&RECORD_TERMINATOR) {
                self.diagnostics.records_skipped += 1;
                self.diagnostics
                    .warn(ordinal, "missing record terminator at end of input; record skipped");
                self.done = true;
                return None;
            }
            match parse_record(chunk, ordinal, &mut self.diagnostics) {
                Ok(record) => {
                    self.diagnostics.records_read += 1;
                    return Some(record);
                }
                Err(reason) => {
                    self.diagnostics.records_skipped += 1;
                    self.diagnostics.warn(ordinal, format!("{reason}; record skipped"));
                }
            }
        }
        None
    }
}

impl<R: BufRead> RecordReader for Iso2709Reader<R> {
    fn diagnostics(&self) -> &ReaderDiagnostics {
        &self.diagnostics
    }

    fn source_format(&self) -> SourceFormat {
        SourceFormat::Marc
    }
}

fn ascii_number(bytes: &[u8], what: &str) -> Result<usize, String> {
    if bytes.is_empty() || !bytes.iter().all(u8::is_ascii_digit) {
        return Err(format!("{what} is not numeric: {:?}", String::from_utf8_lossy(bytes)));
    }
    // at most 5 ASCII digits, cannot overflow
    Ok(bytes.iter().fold(0, |n, b| n * 10 + usize::from(b - b'0')))
}

fn parse_record(chunk: &[u8], ordinal: u64, diag: &mut ReaderDiagnostics) -> Result<DataRecord, String> {
    if chunk.len() < LEADER_LEN + 2 {
        return Err(format!("record of {} bytes is shorter than a leader", chunk.len()));
    }
    let leader = &chunk[..LEADER_LEN];
    let record_len = ascii_number(&leader[0..5], "record length")?;
    if record_len != chunk.len() {
        return Err(format!(
            "leader record length {record_len} does not match actual length {}",
            chunk.len()
        ));
    }
    let base = ascii_number(&leader[12..17], "base address of data")?;
    if base <= LEADER_LEN || base > chunk.len() - 1 {
        return Err(format!("base address {base} outside the record"));
    }
    if chunk[base - 1] != FIELD_TERMINATOR {
        return Err("directory is not terminated by a field terminator".into());
    }
    let directory = &chunk[LEADER_LEN..base - 1];
    if !directory.len().is_multiple_of(DIRECTORY_ENTRY_LEN) {
        return Err(format!("directory length {} is not a multiple of 12", directory.len()));
    }
    if leader[9] != b'a' {
        diag.warn(
            ordinal,
            format!(
                "leader/09 is {:?}, not 'a'; content decoded as UTF-8",
                char::from(leader[9])
            ),
        );
    }

    let data_end = chunk.len() - 1;
    let mut fields = Vec::with_capacity(directory.len() / DIRECTORY_ENTRY_LEN + 1);
    fields.push(Field::control("LDR", diag.decode(leader).into_owned()));
    for entry in directory.chunks_exact(DIRECTORY_ENTRY_LEN) {
        let tag = diag.decode(&entry[0..3]).into_owned();
        let length = ascii_number(&entry[3..7], "field length")?;
        let start = ascii_number(&entry[7..12], "field start")?;
        let from = base + start;
        let to = from + length;
        if length == 0 || to > data_end {
            return Err(format!(
                "field {tag} (start {start}, length {length}) exceeds the data area"
            ));
        }
        let bytes = &chunk[from..to];
        if bytes[length - 1] != FIELD_TERMINATOR {
            return Err(format!("field {tag} is not terminated by a field terminator"));
        }
        let bytes = &bytes[..length - 1];
        if tag.starts_with("00") {
            fields.push(Field::control(tag, diag.decode(bytes).into_owned()));
            continue;
        }
        if bytes.len() < 2 {
            return Err(format!("data field {tag} is missing its indicators"));
        }
        let indicators = [char::from(bytes[0]), char::from(bytes[1])];
        let mut pieces = bytes[2..].split(|b| *b == SUBFIELD_DELIMITER);
        let lead = pieces.next().unwrap_or_default();
        if !lead.is_empty() {
            diag.warn(
                ordinal,
                format!("field {tag}: data before first subfield delimiter ignored"),
            );
        }
        let mut subfields = Vec::new();
        for piece in pieces {
            let text = diag.decode(piece);
            let mut chars = text.chars();
            match chars.next() {
                Some(code) => subfields.push(Subfield::new(code, chars.as_str())),
                None => diag.warn(ordinal, format!("field {tag}: empty subfield ignored")),
            }
        }
        fields.push(Field::marc_data(tag, indicators, subfields));
    }

    let id = fields.iter().find(|f| f.tag == "001").and_then(|f| match &f.content {
        crate::value::FieldContent::Control(v) if !v.is_empty() => Some(v.clone()),
        _ => None,
    });
    let record_id = match id {
        Some(id) => id,
        None => {
            diag.warn(ordinal, "no 001 control number; synthesized record id");
            format!("rec-{ordinal}")
        }
    };
    Ok(DataRecord::marc(record_id, fields))
}
