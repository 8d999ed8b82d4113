use rayon::prelude::*;

use super::{categorize, CategoryPolicy, RecordReport, RuleResult, UniquenessIndex};
use crate::constraint::{evaluate_rule, EvalContext, Status};
use crate::net::NetChecker;
use crate::schema::CompiledSchema;
use crate::value::{AtomicValue, DataRecord};

const BATCH: usize = 1024;

/// Validates records against one compiled schema. Shared read-only by
/// all workers.
pub struct Validator<'a> {
    schema: &'a CompiledSchema,
    index: Option<&'a UniquenessIndex>,
    net: Option<&'a NetChecker>,
    policy: CategoryPolicy,
    group_field: Option<usize>,
}

impl<'a> Validator<'a> {
    pub fn new(schema: &'a CompiledSchema) -> Self {
        Validator {
            schema,
            index: None,
            net: None,
            policy: schema.policy(),
            group_field: None,
        }
    }

    pub fn with_index(mut self, index: &'a UniquenessIndex) -> Self {
        self.index = Some(index);
        self
    }

    pub fn with_net(mut self, net: &'a NetChecker) -> Self {
        self.net = Some(net);
        self
    }

    pub fn with_policy(mut self, policy: CategoryPolicy) -> Self {
        self.policy = policy;
        self
    }

    /// Groups reports by the first value of the named schema field.
    pub fn with_group_field(mut self, name: &str) -> Result<Self, String> {
        let slot = self
            .schema
            .field_slot(name)
            .ok_or_else(|| format!("no field named {name:?} in the schema"))?;
        self.group_field = Some(slot);
        Ok(self)
    }

    pub fn schema(&self) -> &'a CompiledSchema {
        self.schema
    }

    pub fn validate_record(&self, record: &DataRecord) -> RecordReport {
        let schema = self.schema;
        let rules = schema.rules();
        let fields: Vec<Vec<AtomicValue>> = schema.fields().iter().map(|f| f.selector.evaluate(record)).collect();
        let mut statuses: Vec<Option<Status>> = vec![None; rules.len()];
        let mut details: Vec<Option<String>> = vec![None; rules.len()];
        let mut debug = Vec::new();
        for &slot in schema.evaluation_order() {
            let rule = &rules[slot];
            let verdict = {
                let ctx = EvalContext {
                    values: &fields[rule.field],
                    fields: &fields,
                    statuses: &statuses,
                    index: self.index,
                    net: self.net,
                };
                evaluate_rule(rule, &ctx)
            };
            if rule.debug {
                debug.push(debug_line(
                    &rule.id,
                    record.record_id(),
                    &fields[rule.field],
                    verdict.status,
                ));
            }
            statuses[slot] = Some(verdict.status);
            details[slot] = verdict.detail;
        }
        let results: Vec<RuleResult> = schema
            .visible_rules()
            .iter()
            .map(|&slot| {
                let rule = &rules[slot];
                let status = statuses[slot].unwrap_or(Status::Na);
                RuleResult {
                    rule_id: rule.id.clone(),
                    status,
                    score: rule.score_for(status),
                    detail: details[slot].take(),
                }
            })
            .collect();
        let total_score = results.iter().fold(0.0, |acc, r| acc + r.score);
        let category = categorize(total_score, &results, &self.policy);
        let group = self
            .group_field
            .map(|slot| fields[slot].first().map(|v| v.raw.clone()).unwrap_or_default());
        RecordReport {
            record_id: record.record_id().to_owned(),
            results,
            total_score,
            category,
            group,
            debug,
        }
    }
}

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\")
        .replace('\t', "\\t")
        .replace('\n', "\\n")
        .replace('\r', "\\r")
}

/// `rule id TAB record id TAB values joined by | TAB status`.
fn debug_line(rule_id: &str, record_id: &str, values: &[AtomicValue], status: Status) -> String {
    let joined: Vec<String> = values.iter().map(|v| escape(&v.raw)).collect();
    format!(
        "{}\t{}\t{}\t{}",
        escape(rule_id),
        escape(record_id),
        joined.join("|"),
        status
    )
}

/// Validates one record with the schema's own category policy.
pub fn validate_record(
    record: &DataRecord,
    schema: &CompiledSchema,
    index: Option<&UniquenessIndex>,
    net: Option<&NetChecker>,
) -> RecordReport {
    let mut v = Validator::new(schema);
    v.index = index;
    v.net = net;
    v.validate_record(record)
}

/// Validates a record stream on `workers` threads and hands reports to
/// `sink` in input order. Returns the number of records validated.
pub fn validate_stream<E>(
    records: impl IntoIterator<Item = DataRecord>,
    validator: &Validator<'_>,
    workers: usize,
    mut sink: impl FnMut(RecordReport) -> Result<(), E>,
) -> Result<u64, E> {
    let mut count = 0u64;
    let mut records = records.into_iter();
    if workers <= 1 {
        for record in records {
            sink(validator.validate_record(&record))?;
            count += 1;
        }
        return Ok(count);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("failed to start worker threads");
    let batch_size = BATCH * workers;
    loop {
        let batch: Vec<DataRecord> = records.by_ref().take(batch_size).collect();
        if batch.is_empty() {
            return Ok(count);
        }
        let reports: Vec<RecordReport> =
            pool.install(|| batch.par_iter().map(|r| validator.validate_record(r)).collect());
        for report in reports {
            sink(report)?;
            count += 1;
        }
    }
}
