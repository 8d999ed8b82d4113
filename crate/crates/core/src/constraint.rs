//! Constraint evaluation and the PASS/FAIL/NA status algebra.
//!
//! Value-level predicates return NA on an empty value list; otherwise they
//! pass iff every instance satisfies the predicate. `hasValue` is the
//! exception and passes when at least one instance matches. Cardinality is
//! never NA because absence is countable.

use std::fmt;

use regex::Regex;
use thiserror::Error;

use crate::net::NetChecker;
use crate::report::UniquenessIndex;
use crate::schema::{Check, CompiledRule};
use crate::value::AtomicValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Pass,
    Fail,
    Na,
}

impl Status {
    pub const ALL: [Status; 3] = [Status::Pass, Status::Fail, Status::Na];

    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Na => "NA",
        }
    }

    /// CSV cell encoding: `1`, `0` or `NA`.
    pub fn cell(self) -> &'static str {
        match self {
            Status::Pass => "1",
            Status::Fail => "0",
            Status::Na => "NA",
        }
    }

    pub fn from_cell(cell: &str) -> Option<Status> {
        match cell {
            "1" => Some(Status::Pass),
            "0" => Some(Status::Fail),
            "NA" => Some(Status::Na),
            _ => None,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A status with an optional human-readable reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub detail: Option<String>,
}

impl Verdict {
    pub fn pass() -> Self {
        Verdict {
            status: Status::Pass,
            detail: None,
        }
    }

    pub fn na() -> Self {
        Verdict {
            status: Status::Na,
            detail: None,
        }
    }

    pub fn fail(detail: impl Into<String>) -> Self {
        Verdict {
            status: Status::Fail,
            detail: Some(detail.into()),
        }
    }

    pub fn of(status: Status) -> Self {
        Verdict { status, detail: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareKind {
    Equals,
    Disjoint,
    LessThan,
    LessThanOrEquals,
}

impl CompareKind {
    pub fn key(self) -> &'static str {
        match self {
            CompareKind::Equals => "equals",
            CompareKind::Disjoint => "disjoint",
            CompareKind::LessThan => "lessThan",
            CompareKind::LessThanOrEquals => "lessThanOrEquals",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogicalKind {
    And,
    Or,
    Not,
}

impl LogicalKind {
    pub fn key(self) -> &'static str {
        match self {
            LogicalKind::And => "and",
            LogicalKind::Or => "or",
            LogicalKind::Not => "not",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NumericBounds {
    pub min_exclusive: Option<f64>,
    pub min_inclusive: Option<f64>,
    pub max_exclusive: Option<f64>,
    pub max_inclusive: Option<f64>,
}

impl NumericBounds {
    pub fn is_empty(&self) -> bool {
        self.min_exclusive.is_none()
            && self.min_inclusive.is_none()
            && self.max_exclusive.is_none()
            && self.max_inclusive.is_none()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.min_exclusive.is_none_or(|b| x > b)
            && self.min_inclusive.is_none_or(|b| x >= b)
            && self.max_exclusive.is_none_or(|b| x < b)
            && self.max_inclusive.is_none_or(|b| x <= b)
    }
}

/// Parses `[+-]?(digits[.digits]|.digits)([eE][+-]?digits)?`. No
/// surrounding whitespace, no `inf` or `NaN`, no hex.
pub fn parse_decimal(text: &str) -> Option<f64> {
    let b = text.as_bytes();
    let mut i = 0;
    if matches!(b.first(), Some(b'+' | b'-')) {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let int_digits = i - int_start;
    let mut frac_digits = 0;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        frac_digits = i - frac_start;
    }
    if int_digits == 0 && frac_digits == 0 {
        return None;
    }
    if i < b.len() && matches!(b[i], b'e' | b'E') {
        i += 1;
        if i < b.len() && matches!(b[i], b'+' | b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return None;
        }
    }
    if i != b.len() {
        return None;
    }
    text.parse().ok()
}

fn all_instances(values: &[AtomicValue], mut check: impl FnMut(&str) -> Result<(), String>) -> Verdict {
    if values.is_empty() {
        return Verdict::na();
    }
    for v in values {
        if let Err(reason) = check(&v.raw) {
            return Verdict::fail(reason);
        }
    }
    Verdict::pass()
}

pub fn eval_cardinality(values: &[AtomicValue], min_count: Option<u64>, max_count: Option<u64>) -> Verdict {
    let n = values.len() as u64;
    if min_count.is_some_and(|m| n < m) {
        return Verdict::fail(format!(
            "{n} occurrence(s), at least {} required",
            min_count.unwrap_or(0)
        ));
    }
    if let Some(m) = max_count.filter(|&m| n > m) {
        return Verdict::fail(format!("{n} occurrence(s), at most {m} allowed"));
    }
    Verdict::pass()
}

pub fn eval_numeric_range(values: &[AtomicValue], bounds: &NumericBounds) -> Verdict {
    all_instances(values, |raw| match parse_decimal(raw) {
        None => Err(format!("{raw:?} is not a number")),
        Some(x) if !bounds.contains(x) => Err(format!("{raw} is out of range")),
        Some(_) => Ok(()),
    })
}

fn check_bounds(n: u64, min: Option<u64>, max: Option<u64>, unit: &str, raw: &str) -> Result<(), String> {
    if min.is_some_and(|m| n < m) || max.is_some_and(|m| n > m) {
        Err(format!("{raw:?} has {n} {unit}"))
    } else {
        Ok(())
    }
}

/// Length in Unicode scalar values.
pub fn eval_string_length(values: &[AtomicValue], min_length: Option<u64>, max_length: Option<u64>) -> Verdict {
    all_instances(values, |raw| {
        check_bounds(raw.chars().count() as u64, min_length, max_length, "characters", raw)
    })
}

/// Words are maximal runs of non-whitespace.
pub fn eval_word_count(values: &[AtomicValue], min_words: Option<u64>, max_words: Option<u64>) -> Verdict {
    all_instances(values, |raw| {
        check_bounds(
            raw.split_whitespace().count() as u64,
            min_words,
            max_words,
            "words",
            raw,
        )
    })
}

pub fn eval_has_value(values: &[AtomicValue], expected: &str) -> Verdict {
    if values.is_empty() {
        Verdict::na()
    } else if values.iter().any(|v| v.raw == expected) {
        Verdict::pass()
    } else {
        Verdict::fail(format!("no instance equals {expected:?}"))
    }
}

pub fn eval_in(values: &[AtomicValue], allowed: &[String]) -> Verdict {
    all_instances(values, |raw| {
        if allowed.iter().any(|a| a == raw) {
            Ok(())
        } else {
            Err(format!("{raw:?} is not an allowed value"))
        }
    })
}

/// Every instance must contain a match; anchors are up to the pattern.
pub fn eval_pattern(values: &[AtomicValue], expr: &Regex) -> Verdict {
    all_instances(values, |raw| {
        if expr.is_match(raw) {
            Ok(())
        } else {
            Err(format!("{raw:?} does not match"))
        }
    })
}

/// Numeric order when both sides parse as numbers, else code-point order.
fn less(a: &str, b: &str, or_equal: bool) -> bool {
    match (parse_decimal(a), parse_decimal(b)) {
        (Some(x), Some(y)) => {
            if or_equal {
                x <= y
            } else {
                x < y
            }
        }
        _ => {
            if or_equal {
                a <= b
            } else {
                a < b
            }
        }
    }
}

pub fn eval_field_comparison(values: &[AtomicValue], other: &[AtomicValue], kind: CompareKind) -> Verdict {
    if values.is_empty() {
        return Verdict::na();
    }
    let in_other = |raw: &str| other.iter().any(|o| o.raw == raw);
    match kind {
        CompareKind::Equals => {
            let a_in_b = values.iter().find(|v| !in_other(&v.raw));
            let b_in_a = other.iter().find(|o| !values.iter().any(|v| v.raw == o.raw));
            match (a_in_b, b_in_a) {
                (None, None) => Verdict::pass(),
                (Some(v), _) => Verdict::fail(format!("{:?} has no counterpart", v.raw)),
                (None, Some(o)) => Verdict::fail(format!("{:?} has no counterpart", o.raw)),
            }
        }
        CompareKind::Disjoint => match values.iter().find(|v| in_other(&v.raw)) {
            Some(v) => Verdict::fail(format!("{:?} occurs in both", v.raw)),
            None => Verdict::pass(),
        },
        CompareKind::LessThan | CompareKind::LessThanOrEquals => {
            if other.is_empty() {
                return Verdict::na();
            }
            let or_equal = kind == CompareKind::LessThanOrEquals;
            for a in values {
                if let Some(b) = other.iter().find(|b| !less(&a.raw, &b.raw, or_equal)) {
                    let op = if or_equal { "<=" } else { "<" };
                    return Verdict::fail(format!("not {:?} {op} {:?}", a.raw, b.raw));
                }
            }
            Verdict::pass()
        }
    }
}

/// AND: FAIL if any FAIL, else NA if any NA, else PASS. OR: PASS if any
/// PASS, else NA if all NA, else FAIL. NOT: PASS if nothing passed and
/// something failed, NA if all NA, else FAIL.
pub fn eval_logical(kind: LogicalKind, sub: &[Status]) -> Status {
    let any = |s: Status| sub.contains(&s);
    let all_na = sub.iter().all(|&s| s == Status::Na);
    match kind {
        LogicalKind::And if any(Status::Fail) => Status::Fail,
        LogicalKind::And if any(Status::Na) => Status::Na,
        LogicalKind::And => Status::Pass,
        LogicalKind::Or if any(Status::Pass) => Status::Pass,
        LogicalKind::Or if all_na => Status::Na,
        LogicalKind::Or => Status::Fail,
        LogicalKind::Not if !any(Status::Pass) && any(Status::Fail) => Status::Pass,
        LogicalKind::Not if all_na => Status::Na,
        LogicalKind::Not => Status::Fail,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no uniqueness index for {0:?}")]
pub struct MissingIndex(pub String);

/// Every instance must occur exactly once in the whole dataset.
pub fn eval_unique(
    values: &[AtomicValue],
    index: Option<&UniquenessIndex>,
    key: &str,
) -> Result<Verdict, MissingIndex> {
    let counts = index
        .and_then(|idx| idx.counts(key))
        .ok_or_else(|| MissingIndex(key.to_owned()))?;
    Ok(all_instances(values, |raw| {
        match counts.get(raw).copied().unwrap_or(0) {
            1 => Ok(()),
            n => Err(format!("{raw:?} occurs {n} times")),
        }
    }))
}

/// PASS iff no dependency failed.
pub fn eval_dependencies(dep_statuses: &[Status]) -> Status {
    if dep_statuses.contains(&Status::Fail) {
        Status::Fail
    } else {
        Status::Pass
    }
}

/// Folds a rule's constraint statuses, excluding its dependency gate,
/// into the rule status.
pub fn combine_rule(
    constraint_statuses: &[Status],
    has_dependencies_gate: bool,
    dependencies_status: Option<Status>,
) -> Status {
    if has_dependencies_gate {
        let gate = dependencies_status.unwrap_or(Status::Pass);
        if constraint_statuses.is_empty() {
            return gate;
        }
        if gate == Status::Fail {
            return Status::Na;
        }
    }
    if constraint_statuses.contains(&Status::Fail) {
        Status::Fail
    } else if constraint_statuses.iter().all(|&s| s == Status::Na) {
        Status::Na
    } else {
        Status::Pass
    }
}

/// Everything a check may look at while one record is validated.
pub struct EvalContext<'a> {
    /// Values of the rule's own field.
    pub values: &'a [AtomicValue],
    /// Values of every schema field, by field slot.
    pub fields: &'a [Vec<AtomicValue>],
    /// Statuses of rules evaluated so far, by rule slot.
    pub statuses: &'a [Option<Status>],
    pub index: Option<&'a UniquenessIndex>,
    pub net: Option<&'a NetChecker>,
}

impl EvalContext<'_> {
    /// Status of an earlier rule; rules that never ran count as NA.
    pub fn status(&self, slot: usize) -> Status {
        self.statuses.get(slot).copied().flatten().unwrap_or(Status::Na)
    }
}

pub fn evaluate_check(check: &Check, ctx: &EvalContext<'_>) -> Verdict {
    let values = ctx.values;
    match check {
        Check::Cardinality { min, max } => eval_cardinality(values, *min, *max),
        Check::NumericRange(bounds) => eval_numeric_range(values, bounds),
        Check::Length { min, max } => eval_string_length(values, *min, *max),
        Check::Words { min, max } => eval_word_count(values, *min, *max),
        Check::HasValue(expected) => eval_has_value(values, expected),
        Check::In(allowed) => eval_in(values, allowed),
        Check::Pattern(expr) => eval_pattern(values, expr),
        Check::Compare { kind, field } => eval_field_comparison(values, &ctx.fields[*field], *kind),
        Check::Logical { kind, operands } => {
            let sub: Vec<Status> = operands.iter().map(|&slot| ctx.status(slot)).collect();
            if sub.is_empty() {
                return Verdict::na();
            }
            Verdict::of(eval_logical(*kind, &sub))
        }
        Check::Unique { key } => {
            eval_unique(values, ctx.index, key).unwrap_or_else(|err| Verdict::fail(err.to_string()))
        }
        Check::ContentType(allowed) => match ctx.net {
            Some(net) => net.eval_content_type(values, allowed),
            None if values.is_empty() => Verdict::na(),
            None => Verdict::fail("network checks are disabled"),
        },
        Check::Dimension(bounds) => match ctx.net {
            Some(net) => net.eval_dimension(values, bounds),
            None if values.is_empty() => Verdict::na(),
            None => Verdict::fail("network checks are disabled"),
        },
    }
}

/// Evaluates one rule. A failed dependency gate short-circuits the other
/// constraints, which are then reported as NA.
pub fn evaluate_rule(rule: &CompiledRule, ctx: &EvalContext<'_>) -> Verdict {
    let gate = if rule.dependencies.is_empty() {
        None
    } else {
        let deps: Vec<Status> = rule.dependencies.iter().map(|&slot| ctx.status(slot)).collect();
        Some(eval_dependencies(&deps))
    };
    if gate == Some(Status::Fail) {
        let detail = Some("a dependency failed".to_owned());
        let status = combine_rule(if rule.checks.is_empty() { &[] } else { &[Status::Na] }, true, gate);
        return Verdict { status, detail };
    }
    let verdicts: Vec<Verdict> = rule.checks.iter().map(|c| evaluate_check(c, ctx)).collect();
    let statuses: Vec<Status> = verdicts.iter().map(|v| v.status).collect();
    let status = combine_rule(&statuses, gate.is_some(), gate);
    let detail = match status {
        Status::Fail => verdicts
            .into_iter()
            .find(|v| v.status == Status::Fail)
            .and_then(|v| v.detail),
        _ => None,
    };
    Verdict { status, detail }
}
