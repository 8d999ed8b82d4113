use std::io::Read;

use indexmap::IndexMap;
use serde::Serialize;

use super::{report_header, Category, RecordReport, ReportError};
use crate::constraint::Status;
use crate::schema::CompiledSchema;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct StatusCounts {
    #[serde(rename = "PASS")]
    pub pass: u64,
    #[serde(rename = "FAIL")]
    pub fail: u64,
    #[serde(rename = "NA")]
    pub na: u64,
}

impl StatusCounts {
    fn add(&mut self, status: Status) {
        match status {
            Status::Pass => self.pass += 1,
            Status::Fail => self.fail += 1,
            Status::Na => self.na += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.pass + self.fail + self.na
    }
}

/// Score distribution; every field is `null` when there are no records.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ScoreSummary {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    pub median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateStats {
    pub records: u64,
    pub rules: IndexMap<String, StatusCounts>,
    pub categories: IndexMap<String, u64>,
    pub score: ScoreSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub groups: Option<IndexMap<String, AggregateStats>>,
}

impl AggregateStats {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("stats always serialize");
        text.push('\n');
        text
    }
}

/// Single-pass accumulator over report rows. Scores are kept in full so
/// the median is exact.
#[derive(Debug, Clone)]
pub struct Aggregator {
    rule_ids: Vec<String>,
    counts: Vec<StatusCounts>,
    categories: [u64; 4],
    scores: Vec<f64>,
    sum: f64,
    groups: Option<IndexMap<String, Aggregator>>,
}

impl Aggregator {
    pub fn new(schema: &CompiledSchema) -> Self {
        Aggregator::with_rule_ids(schema.visible_rule_ids().into_iter().map(str::to_owned).collect())
    }

    pub fn with_rule_ids(rule_ids: Vec<String>) -> Self {
        Aggregator {
            counts: vec![StatusCounts::default(); rule_ids.len()],
            rule_ids,
            categories: [0; 4],
            scores: Vec::new(),
            sum: 0.0,
            groups: None,
        }
    }

    /// Also keep per-group statistics, keyed by [`RecordReport::group`].
    pub fn grouped(mut self) -> Self {
        self.groups = Some(IndexMap::new());
        self
    }

    fn add_row(&mut self, statuses: &[Status], score: f64, category: Category) {
        for (c, &s) in self.counts.iter_mut().zip(statuses) {
            c.add(s);
        }
        self.categories[category as usize] += 1;
        self.scores.push(score);
        self.sum += score;
    }

    pub fn add(&mut self, report: &RecordReport) {
        let statuses: Vec<Status> = report.results.iter().map(|r| r.status).collect();
        self.add_row(&statuses, report.total_score, report.category);
        if let Some(groups) = &mut self.groups {
            let key = report.group.clone().unwrap_or_default();
            let ids = &self.rule_ids;
            groups
                .entry(key)
                .or_insert_with(|| Aggregator::with_rule_ids(ids.clone()))
                .add_row(&statuses, report.total_score, report.category);
        }
    }

    pub fn finish(self) -> AggregateStats {
        let n = self.scores.len();
        let mut sorted = self.scores;
        sorted.sort_by(f64::total_cmp);
        let score = if n == 0 {
            ScoreSummary::default()
        } else {
            let median = if n % 2 == 1 {
                sorted[n / 2]
            } else {
                (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
            };
            ScoreSummary {
                min: Some(sorted[0]),
                max: Some(sorted[n - 1]),
                mean: Some(self.sum / n as f64),
                median: Some(median),
            }
        };
        let groups = self.groups.map(|g| {
            let mut g: Vec<(String, Aggregator)> = g.into_iter().collect();
            g.sort_by(|a, b| a.0.cmp(&b.0));
            g.into_iter().map(|(k, a)| (k, a.finish())).collect()
        });
        AggregateStats {
            records: n as u64,
            rules: self.rule_ids.into_iter().zip(self.counts).collect(),
            categories: Category::ALL
                .iter()
                .map(|c| (c.name().to_owned(), self.categories[*c as usize]))
                .collect(),
            score,
            groups,
        }
    }
}

/// Aggregates in-process reports.
pub fn aggregate<'r>(reports: impl IntoIterator<Item = &'r RecordReport>, schema: &CompiledSchema) -> AggregateStats {
    let mut agg = Aggregator::new(schema);
    for r in reports {
        agg.add(r);
    }
    agg.finish()
}

/// Recomputes statistics from a CSV report written for `schema`.
pub fn aggregate_csv(input: impl Read, schema: &CompiledSchema) -> Result<AggregateStats, ReportError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let expected = report_header(schema);
    let mut rows = reader.records();
    let found: Vec<String> = match rows.next() {
        Some(h) => h?.iter().map(str::to_owned).collect(),
        None => Vec::new(),
    };
    if found != expected {
        return Err(ReportError::HeaderMismatch { expected, found });
    }
    let width = expected.len();
    let mut agg = Aggregator::new(schema);
    for (i, row) in rows.enumerate() {
        let row = row?;
        let line = i as u64 + 2;
        let bad = |message: String| ReportError::BadRow { row: line, message };
        if row.len() != width {
            return Err(bad(format!("{} cells, expected {width}", row.len())));
        }
        let statuses = (1..width - 2)
            .map(|c| Status::from_cell(&row[c]).ok_or_else(|| bad(format!("bad status cell {:?}", &row[c]))))
            .collect::<Result<Vec<_>, _>>()?;
        let score: f64 = row[width - 2]
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| bad(format!("bad score {:?}", &row[width - 2])))?;
        let category: Category = row[width - 1].parse().map_err(bad)?;
        agg.add_row(&statuses, score, category);
    }
    Ok(agg.finish())
}
