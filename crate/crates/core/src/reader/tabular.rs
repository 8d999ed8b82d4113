use std::io::BufRead;
use std::sync::Arc;

use super::{ReaderDiagnostics, ReaderError, RecordReader};
use crate::value::{DataRecord, SourceFormat};

/// RFC 4180 CSV reader. The first row is the header; every further row is a
/// record whose empty cells are absent values.
pub struct CsvReader<R> {
    rows: csv::Reader<R>,
    header: Option<Arc<[String]>>,
    id_column: Option<String>,
    id_index: Option<usize>,
    row: csv::ByteRecord,
    ordinal: u64,
    diagnostics: ReaderDiagnostics,
    done: bool,
}

impl<R: BufRead> CsvReader<R> {
    /// Reads the header row eagerly so that a missing id column is reported
    /// before any record is produced.
    pub fn new(input: R, id_column: Option<&str>) -> Result<Self, ReaderError> {
        let rows = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(input);
        let mut reader = CsvReader {
            rows,
            header: None,
            id_column: id_column.map(str::to_owned),
            id_index: None,
            row: csv::ByteRecord::new(),
            ordinal: 0,
            diagnostics: ReaderDiagnostics::default(),
            done: false,
        };
        let mut first = csv::ByteRecord::new();
        match reader.rows.read_byte_record(&mut first) {
            Ok(true) => {
                let header: Vec<String> = first
                    .iter()
                    .map(|cell| reader.diagnostics.decode(cell).into_owned())
                    .collect();
                if let Some(name) = &reader.id_column {
                    reader.id_index = Some(
                        header
                            .iter()
                            .position(|h| h == name)
                            .ok_or_else(|| ReaderError::MissingIdColumn(name.clone()))?,
                    );
                }
                reader.header = Some(header.into());
            }
            Ok(false) => reader.done = true,
            Err(err) => return Err(csv_io_error(err)),
        }
        Ok(reader)
    }

    pub fn header(&self) -> Option<&[String]> {
        self.header.as_deref()
    }
}

fn csv_io_error(err: csv::Error) -> ReaderError {
    match err.into_kind() {
        csv::ErrorKind::Io(io) => ReaderError::Io(io),
        other => ReaderError::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("{other:?}"),
        )),
    }
}

impl<R: BufRead> Iterator for CsvReader<R> {
    type Item = DataRecord;

    fn next(&mut self) -> Option<DataRecord> {
        let header = self.header.clone()?;
        while !self.done {
            match self.rows.read_byte_record(&mut self.row) {
                Ok(true) => {}
                Ok(false) => {
                    self.done = true;
                    break;
                }
                Err(err) => {
                    if err.is_io_error() {
                        self.diagnostics.io_error = Some(err.to_string());
                        self.done = true;
                        break;
                    }
                    self.ordinal += 1;
                    self.diagnostics.records_skipped += 1;
                    self.diagnostics
                        .warn(self.ordinal, format!("unparseable row: {err}; skipped"));
                    continue;
                }
            }
            self.ordinal += 1;
            let ordinal = self.ordinal;
            if self.row.len() != header.len() {
                self.diagnostics.records_skipped += 1;
                self.diagnostics.warn(
                    ordinal,
                    format!(
                        "row has {} columns, header has {}; skipped",
                        self.row.len(),
                        header.len()
                    ),
                );
                continue;
            }
            let cells: Vec<Option<String>> = self
                .row
                .iter()
                .map(|cell| (!cell.is_empty()).then(|| self.diagnostics.decode(cell).into_owned()))
                .collect();
            let id = match self.id_index.and_then(|i| cells[i].clone()) {
                Some(id) => id,
                None => {
                    if self.id_index.is_some() {
                        self.diagnostics.warn(ordinal, "empty id cell; synthesized record id");
                    }
                    format!("row-{ordinal}")
                }
            };
            self.diagnostics.records_read += 1;
            return Some(DataRecord::csv(id, header, cells));
        }
        None
    }
}

impl<R: BufRead> RecordReader for CsvReader<R> {
    fn diagnostics(&self) -> &ReaderDiagnostics {
        &self.diagnostics
    }

    fn source_format(&self) -> SourceFormat {
        SourceFormat::Csv
    }
}
