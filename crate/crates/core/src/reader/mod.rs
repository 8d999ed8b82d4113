//! Streaming readers for ISO 2709, Alephseq, PICA plain, normalized PICA,
//! CSV and JSON lines.
//!
//! Readers are iterators over [`DataRecord`]s holding at most one record in
//! memory. Defective records are skipped with a warning and the stream
//! continues; only I/O failures end a stream early, and they are reported
//! through [`ReaderDiagnostics::io_error`].

mod alephseq;
mod iso2709;
mod jsonl;
mod pica;
mod tabular;

use std::borrow::Cow;
use std::fmt;
use std::io::{self, BufRead};
use std::str::FromStr;

use thiserror::Error;

pub use alephseq::AlephseqReader;
pub use iso2709::Iso2709Reader;
pub use jsonl::JsonLinesReader;
pub use pica::{PicaNormalizedReader, PicaPlainReader};
pub use tabular::CsvReader;

use crate::value::{DataRecord, SourceFormat};

/// Warnings beyond this many are counted but not stored.
pub const MAX_STORED_WARNINGS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReaderWarning {
    /// 1-based ordinal of the record (or line) the warning refers to.
    pub ordinal: u64,
    pub message: String,
}

impl fmt::Display for ReaderWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}: {}", self.ordinal, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReaderDiagnostics {
    pub records_read: u64,
    pub records_skipped: u64,
    pub warnings: Vec<ReaderWarning>,
    pub suppressed_warnings: u64,
    /// Number of decoded chunks that contained invalid UTF-8.
    pub invalid_utf8: u64,
    pub io_error: Option<String>,
}

impl ReaderDiagnostics {
    pub fn warn(&mut self, ordinal: u64, message: impl Into<String>) {
        if self.warnings.len() < MAX_STORED_WARNINGS {
            self.warnings.push(ReaderWarning {
                ordinal,
                message: message.into(),
            });
        } else {
            self.suppressed_warnings += 1;
        }
    }

    pub fn warning_count(&self) -> u64 {
        self.warnings.len() as u64 + self.suppressed_warnings
    }

    pub fn records_encountered(&self) -> u64 {
        self.records_read + self.records_skipped
    }

    /// Lossy UTF-8 decode; invalid sequences become U+FFFD and are counted.
    pub(crate) fn decode<'a>(&mut self, bytes: &'a [u8]) -> Cow<'a, str> {
        let text = String::from_utf8_lossy(bytes);
        if let Cow::Owned(_) = text {
            self.invalid_utf8 += 1;
        }
        text
    }
}

/// Common interface of every reader.
pub trait RecordReader: Iterator<Item = DataRecord> {
    fn diagnostics(&self) -> &ReaderDiagnostics;
    fn source_format(&self) -> SourceFormat;
}

#[derive(Debug, Error)]
pub enum ReaderError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("id column {0:?} not found in CSV header")]
    MissingIdColumn(String),
    #[error("invalid id pointer: {0}")]
    InvalidIdPointer(#[from] crate::selector::SyntaxError),
}

/// Input serializations selectable on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputFormat {
    Iso2709,
    Alephseq,
    PicaPlain,
    PicaNormalized,
    Csv,
    JsonLines,
}

impl InputFormat {
    pub const ALL: [InputFormat; 6] = [
        InputFormat::Iso2709,
        InputFormat::Alephseq,
        InputFormat::PicaPlain,
        InputFormat::PicaNormalized,
        InputFormat::Csv,
        InputFormat::JsonLines,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InputFormat::Iso2709 => "iso2709",
            InputFormat::Alephseq => "alephseq",
            InputFormat::PicaPlain => "picaplain",
            InputFormat::PicaNormalized => "picanorm",
            InputFormat::Csv => "csv",
            InputFormat::JsonLines => "jsonl",
        }
    }

    pub fn source_format(self) -> SourceFormat {
        match self {
            InputFormat::Iso2709 | InputFormat::Alephseq => SourceFormat::Marc,
            InputFormat::PicaPlain | InputFormat::PicaNormalized => SourceFormat::Pica,
            InputFormat::Csv => SourceFormat::Csv,
            InputFormat::JsonLines => SourceFormat::Json,
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        InputFormat::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| {
            let names: Vec<_> = InputFormat::ALL.iter().map(|f| f.name()).collect();
            format!("unknown input format {s:?} (expected one of {})", names.join(", "))
        })
    }
}

/// Options that only some formats use.
#[derive(Debug, Clone, Default)]
pub struct ReaderOptions {
    pub id_column: Option<String>,
    pub id_pointer: Option<String>,
}

/// Opens a reader of the given format over `input`.
pub fn open_reader<R: BufRead + Send + 'static>(
    format: InputFormat,
    input: R,
    options: &ReaderOptions,
) -> Result<Box<dyn RecordReader + Send>, ReaderError> {
    Ok(match format {
        InputFormat::Iso2709 => Box::new(Iso2709Reader::new(input)),
        InputFormat::Alephseq => Box::new(AlephseqReader::new(input)),
        InputFormat::PicaPlain => Box::new(PicaPlainReader::new(input)),
        InputFormat::PicaNormalized => Box::new(PicaNormalizedReader::new(input)),
        InputFormat::Csv => Box::new(CsvReader::new(input, options.id_column.as_deref())?),
        InputFormat::JsonLines => Box::new(JsonLinesReader::new(input, options.id_pointer.as_deref())?),
    })
}

/// Reads one `\n`-terminated line into `buf`, without the terminator or a
/// trailing `\r`. Returns `false` at end of input.
pub(crate) fn read_line_bytes<R: BufRead>(input: &mut R, buf: &mut Vec<u8>) -> io::Result<bool> {
    buf.clear();
    if input.read_until(b'\n', buf)? == 0 {
        return Ok(false);
    }
    if buf.last() == Some(&b'\n') {
        buf.pop();
    }
    if buf.last() == Some(&b'\r') {
        buf.pop();
    }
    Ok(true)
}
