use std::io::Write;

use super::{RecordReport, ReportError};
use crate::schema::CompiledSchema;

/// `recordId`, the visible rule ids, `score`, `category`.
pub fn report_header(schema: &CompiledSchema) -> Vec<String> {
    let mut header = vec!["recordId".to_owned()];
    header.extend(schema.visible_rule_ids().into_iter().map(str::to_owned));
    header.push("score".into());
    header.push("category".into());
    header
}

/// Shortest text that parses back to the same number; never `-0`.
pub fn format_score(score: f64) -> String {
    (score + 0.0).to_string()
}

/// Streams report rows; the header is written on construction.
pub struct CsvReportWriter<W: Write> {
    inner: csv::Writer<W>,
    columns: usize,
    rows: u64,
}

impl<W: Write> CsvReportWriter<W> {
    pub fn new(output: W, schema: &CompiledSchema) -> Result<Self, ReportError> {
        let mut inner = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(output);
        let header = report_header(schema);
        inner.write_record(&header)?;
        Ok(CsvReportWriter {
            inner,
            columns: header.len(),
            rows: 0,
        })
    }

    pub fn write(&mut self, report: &RecordReport) -> Result<(), ReportError> {
        debug_assert_eq!(report.results.len() + 3, self.columns);
        let score = format_score(report.total_score);
        let row = std::iter::once(report.record_id.as_str())
            .chain(report.results.iter().map(|r| r.status.cell()))
            .chain([score.as_str(), report.category.name()]);
        self.inner.write_record(row)?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn finish(self) -> Result<W, ReportError> {
        self.inner
            .into_inner()
            .map_err(|e| ReportError::Io(std::io::Error::new(e.error().kind(), e.error().to_string())))
    }
}

/// Writes a complete report and returns the number of rows.
pub fn write_csv_report<'r, W: Write>(
    reports: impl IntoIterator<Item = &'r RecordReport>,
    schema: &CompiledSchema,
    output: W,
) -> Result<u64, ReportError> {
    let mut writer = CsvReportWriter::new(output, schema)?;
    for report in reports {
        writer.write(report)?;
    }
    let rows = writer.rows();
    writer.finish()?;
    Ok(rows)
}
