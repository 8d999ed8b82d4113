use std::collections::HashMap;

use crate::schema::CompiledSchema;
use crate::value::DataRecord;

/// Dataset-wide occurrence counts of every value of the fields that carry
/// a `unique` rule, keyed by the field's index name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UniquenessIndex {
    counts: HashMap<String, HashMap<String, u64>>,
}

impl UniquenessIndex {
    /// An index with an empty table for every unique-flagged field.
    pub fn for_schema(schema: &CompiledSchema) -> Self {
        let mut counts = HashMap::new();
        for slot in schema.unique_fields() {
            counts
                .entry(schema.fields()[slot].index_key.clone())
                .or_insert_with(HashMap::new);
        }
        UniquenessIndex { counts }
    }

    pub fn add(&mut self, record: &DataRecord, schema: &CompiledSchema) {
        for slot in schema.unique_fields() {
            let field = &schema.fields()[slot];
            let table = self.counts.entry(field.index_key.clone()).or_default();
            for value in field.selector.evaluate(record) {
                *table.entry(value.raw).or_insert(0) += 1;
            }
        }
    }

    /// Adds the counts of another index built for the same schema.
    pub fn merge(&mut self, other: UniquenessIndex) {
        for (key, table) in other.counts {
            let mine = self.counts.entry(key).or_default();
            for (value, n) in table {
                *mine.entry(value).or_insert(0) += n;
            }
        }
    }

    pub fn counts(&self, key: &str) -> Option<&HashMap<String, u64>> {
        self.counts.get(key)
    }

    pub fn count(&self, key: &str, value: &str) -> u64 {
        self.counts(key).and_then(|t| t.get(value)).copied().unwrap_or(0)
    }
}

/// One streaming pass over `records`.
pub fn build_uniqueness_index(
    records: impl IntoIterator<Item = DataRecord>,
    schema: &CompiledSchema,
) -> UniquenessIndex {
    let mut index = UniquenessIndex::for_schema(schema);
    for record in records {
        index.add(&record, schema);
    }
    index
}
