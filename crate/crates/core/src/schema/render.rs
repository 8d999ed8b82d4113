use serde_json::{Map, Value};

use super::{CategorySettings, DimensionBounds, FieldConfig, Rule, SchemaConfig};

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn strings(list: &[String]) -> Value {
    Value::Array(list.iter().cloned().map(Value::String).collect())
}

fn rule(r: &Rule) -> Value {
    let mut m = Map::new();
    let c = &r.constraints;
    m.insert("id".into(), r.id.clone().into());
    if let Some(d) = &r.description {
        m.insert("description".into(), d.clone().into());
    }
    for (key, v) in [("minCount", c.min_count), ("maxCount", c.max_count)] {
        if let Some(v) = v {
            m.insert(key.into(), v.into());
        }
    }
    for (key, v) in [
        ("minExclusive", c.min_exclusive),
        ("minInclusive", c.min_inclusive),
        ("maxExclusive", c.max_exclusive),
        ("maxInclusive", c.max_inclusive),
    ] {
        if let Some(v) = v {
            m.insert(key.into(), number(v));
        }
    }
    for (key, v) in [
        ("minLength", c.min_length),
        ("maxLength", c.max_length),
        ("minWords", c.min_words),
        ("maxWords", c.max_words),
    ] {
        if let Some(v) = v {
            m.insert(key.into(), v.into());
        }
    }
    if let Some(v) = &c.has_value {
        m.insert("hasValue".into(), v.clone().into());
    }
    if let Some(v) = &c.allowed {
        m.insert("in".into(), strings(v));
    }
    for (key, v) in [
        ("pattern", &c.pattern),
        ("equals", &c.equals),
        ("disjoint", &c.disjoint),
        ("lessThan", &c.less_than),
        ("lessThanOrEquals", &c.less_than_or_equals),
    ] {
        if let Some(v) = v {
            m.insert(key.into(), v.clone().into());
        }
    }
    for (key, v) in [("and", &c.and), ("or", &c.or), ("not", &c.not)] {
        if let Some(list) = v {
            m.insert(key.into(), Value::Array(list.iter().map(rule).collect()));
        }
    }
    if let Some(u) = c.unique {
        m.insert("unique".into(), u.into());
    }
    if let Some(v) = &c.dependencies {
        m.insert("dependencies".into(), strings(v));
    }
    if let Some(v) = &c.content_type {
        m.insert("contentType".into(), strings(v));
    }
    if let Some(d) = &c.dimension {
        m.insert("dimension".into(), dimension(d));
    }
    for (key, v) in [
        ("failureScore", r.failure_score),
        ("successScore", r.success_score),
        ("naScore", r.na_score),
    ] {
        if let Some(v) = v {
            m.insert(key.into(), number(v));
        }
    }
    for (key, v) in [("hidden", r.hidden), ("skip", r.skip), ("debug", r.debug)] {
        if v {
            m.insert(key.into(), true.into());
        }
    }
    Value::Object(m)
}

fn dimension(d: &DimensionBounds) -> Value {
    let mut m = Map::new();
    for (side, lo, hi) in d.pairs() {
        if let Some(lo) = lo {
            m.insert(format!("min{side}"), lo.into());
        }
        if let Some(hi) = hi {
            m.insert(format!("max{side}"), hi.into());
        }
    }
    Value::Object(m)
}

fn field(f: &FieldConfig) -> Value {
    let mut m = Map::new();
    m.insert("name".into(), f.name.clone().into());
    m.insert("path".into(), f.path.clone().into());
    if let Some(i) = &f.index_field {
        m.insert("indexField".into(), i.clone().into());
    }
    m.insert("rules".into(), Value::Array(f.rules.iter().map(rule).collect()));
    Value::Object(m)
}

fn categories(c: &CategorySettings) -> Value {
    let mut m = Map::new();
    for (key, v) in [
        ("blockedFloor", c.blocked_floor),
        ("improveFloor", c.improve_floor),
        ("goodFloor", c.good_floor),
        ("blockingScore", c.blocking_score),
    ] {
        if let Some(v) = v {
            m.insert(key.into(), number(v));
        }
    }
    Value::Object(m)
}

/// Canonical JSON rendering; parsing it back yields an equal config as
/// long as every number is finite.
pub fn render_json(config: &SchemaConfig) -> String {
    let mut m = Map::new();
    m.insert("format".into(), config.format.name().into());
    m.insert("fields".into(), Value::Array(config.fields.iter().map(field).collect()));
    if let Some(c) = &config.categories {
        m.insert("categories".into(), categories(c));
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(m)).expect("JSON values always serialize");
    text.push('\n');
    text
}
