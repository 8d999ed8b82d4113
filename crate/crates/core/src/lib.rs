//! Rule-based quality checks for bibliographic records.
//!
//! Records in MARC, PICA, CSV or JSON lines are read into a common model,
//! addressed with a per-format path language and checked against a
//! declarative schema of SHACL-style constraints. Each record gets a
//! PASS/FAIL/NA status per rule, a score and a category; results go to a
//! CSV report and aggregate statistics.

pub mod constraint;
pub mod net;
pub mod reader;
pub mod report;
pub mod schema;
pub mod selector;
pub mod value;
