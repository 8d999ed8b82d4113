//! Validation runs: scoring, categories, the CSV report and aggregation.

mod aggregate;
mod csv_out;
mod index;
mod validate;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use aggregate::{aggregate, aggregate_csv, AggregateStats, Aggregator, ScoreSummary, StatusCounts};
pub use csv_out::{format_score, report_header, write_csv_report, CsvReportWriter};
pub use index::{build_uniqueness_index, UniquenessIndex};
pub use validate::{validate_record, validate_stream, Validator};

use crate::constraint::Status;
use crate::schema::CategorySettings;

#[derive(Debug, Clone, PartialEq)]
pub struct RuleResult {
    pub rule_id: String,
    pub status: Status,
    pub score: f64,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Blocked,
    ToBeImproved,
    Acceptable,
    Good,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Blocked,
        Category::ToBeImproved,
        Category::Acceptable,
        Category::Good,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Blocked => "BLOCKED",
            Category::ToBeImproved => "TO_BE_IMPROVED",
            Category::Acceptable => "ACCEPTABLE",
            Category::Good => "GOOD",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown category {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordReport {
    pub record_id: String,
    /// Visible rules only, in column order.
    pub results: Vec<RuleResult>,
    pub total_score: f64,
    pub category: Category,
    /// Value of the grouping field, when grouping is enabled.
    pub group: Option<String>,
    /// TSV lines for rules flagged `debug`.
    pub debug: Vec<String>,
}

/// Score thresholds for [`categorize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CategoryPolicy {
    pub blocked_floor: f64,
    pub improve_floor: f64,
    pub good_floor: f64,
    /// A failed rule whose failure score is at or below this blocks the
    /// record regardless of its total.
    pub blocking_score: f64,
}

impl Default for CategoryPolicy {
    fn default() -> Self {
        CategoryPolicy {
            blocked_floor: -10.0,
            improve_floor: 0.0,
            good_floor: 10.0,
            blocking_score: -10.0,
        }
    }
}

impl CategoryPolicy {
    /// Applies the overrides a schema file states.
    pub fn with_settings(mut self, settings: Option<&CategorySettings>) -> Result<Self, String> {
        if let Some(s) = settings {
            self.blocked_floor = s.blocked_floor.unwrap_or(self.blocked_floor);
            self.improve_floor = s.improve_floor.unwrap_or(self.improve_floor);
            self.good_floor = s.good_floor.unwrap_or(self.good_floor);
            self.blocking_score = s.blocking_score.unwrap_or(self.blocking_score);
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), String> {
        let all = [
            self.blocked_floor,
            self.improve_floor,
            self.good_floor,
            self.blocking_score,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err("category thresholds must be finite numbers".into());
        }
        if !(self.blocked_floor <= self.improve_floor && self.improve_floor <= self.good_floor) {
            return Err(format!(
                "category floors must satisfy blocked {} <= improve {} <= good {}",
                self.blocked_floor, self.improve_floor, self.good_floor
            ));
        }
        Ok(())
    }
}

/// Places a record in a category from its total score and visible results.
pub fn categorize(total_score: f64, results: &[RuleResult], policy: &CategoryPolicy) -> Category {
    let blocking = results
        .iter()
        .any(|r| r.status == Status::Fail && r.score <= policy.blocking_score);
    if blocking || total_score < policy.blocked_floor {
        Category::Blocked
    } else if total_score < policy.improve_floor {
        Category::ToBeImproved
    } else if total_score < policy.good_floor {
        Category::Acceptable
    } else {
        Category::Good
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("report header does not match the schema: expected {expected:?}, found {found:?}")]
    HeaderMismatch { expected: Vec<String>, found: Vec<String> },
    #[error("row {row}: {message}")]
    BadRow { row: u64, message: String },
}
