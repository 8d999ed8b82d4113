use super::node::Node;
use super::{CategorySettings, ConfigError, DimensionBounds, FieldConfig, Rule, SchemaConfig};
use crate::value::SourceFormat;

const SCHEMA_KEYS: &[&str] = &["format", "fields", "categories"];
const FIELD_KEYS: &[&str] = &["name", "path", "indexField", "rules"];
const CATEGORY_KEYS: &[&str] = &["blockedFloor", "improveFloor", "goodFloor", "blockingScore"];
const DIMENSION_KEYS: &[&str] = &[
    "minWidth",
    "maxWidth",
    "minHeight",
    "maxHeight",
    "minShortside",
    "maxShortside",
    "minLongside",
    "maxLongside",
];
const RULE_KEYS: &[&str] = &[
    "id",
    "description",
    "failureScore",
    "successScore",
    "naScore",
    "hidden",
    "skip",
    "debug",
    "minCount",
    "maxCount",
    "minExclusive",
    "minInclusive",
    "maxExclusive",
    "maxInclusive",
    "minLength",
    "maxLength",
    "minWords",
    "maxWords",
    "hasValue",
    "in",
    "pattern",
    "equals",
    "disjoint",
    "lessThan",
    "lessThanOrEquals",
    "and",
    "or",
    "not",
    "unique",
    "dependencies",
    "contentType",
    "dimension",
];

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_owned()
    } else {
        format!("{path}.{key}")
    }
}

fn unknown_key(path: &str, key: &str, vocabulary: &[&str]) -> ConfigError {
    let hint = vocabulary
        .iter()
        .find(|k| k.eq_ignore_ascii_case(key))
        .map(|k| format!(" (did you mean '{k}'?)"))
        .unwrap_or_default();
    ConfigError::schema(&join(path, key), format!("unknown key '{key}'{hint}"))
}

fn required<'a>(entries: &'a [(String, Node)], key: &str, path: &str) -> Result<&'a Node, ConfigError> {
    entries
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v)
        .ok_or_else(|| ConfigError::schema(path, format!("missing required key '{key}'")))
}

pub(crate) fn parse_format(text: &str) -> Option<SourceFormat> {
    [
        SourceFormat::Marc,
        SourceFormat::Pica,
        SourceFormat::Csv,
        SourceFormat::Json,
    ]
    .into_iter()
    .find(|f| f.name().eq_ignore_ascii_case(text))
}

pub(crate) fn schema_from_node(root: &Node) -> Result<SchemaConfig, ConfigError> {
    let entries = root.as_map("")?;
    for (key, _) in entries {
        if !SCHEMA_KEYS.contains(&key.as_str()) {
            return Err(unknown_key("", key, SCHEMA_KEYS));
        }
    }
    let format_text = required(entries, "format", "")?.as_string("format")?;
    let format = parse_format(&format_text).ok_or_else(|| {
        ConfigError::schema(
            "format",
            format!("unsupported format {format_text:?} (expected MARC, PICA, CSV or JSON)"),
        )
    })?;
    let field_nodes = required(entries, "fields", "")?.as_seq("fields")?;
    if field_nodes.is_empty() {
        return Err(ConfigError::schema("fields", "at least one field is required"));
    }
    let fields = field_nodes
        .iter()
        .enumerate()
        .map(|(i, node)| field_from_node(node, &format!("fields[{i}]")))
        .collect::<Result<_, _>>()?;
    let categories = match entries.iter().find(|(k, _)| k == "categories") {
        Some((_, node)) => Some(categories_from_node(node)?),
        None => None,
    };
    Ok(SchemaConfig {
        format,
        fields,
        categories,
    })
}

fn categories_from_node(node: &Node) -> Result<CategorySettings, ConfigError> {
    let mut out = CategorySettings::default();
    for (key, value) in node.as_map("categories")? {
        let path = join("categories", key);
        let slot = match key.as_str() {
            "blockedFloor" => &mut out.blocked_floor,
            "improveFloor" => &mut out.improve_floor,
            "goodFloor" => &mut out.good_floor,
            "blockingScore" => &mut out.blocking_score,
            _ => return Err(unknown_key("categories", key, CATEGORY_KEYS)),
        };
        *slot = Some(value.as_f64(&path)?);
    }
    Ok(out)
}

fn field_from_node(node: &Node, path: &str) -> Result<FieldConfig, ConfigError> {
    let entries = node.as_map(path)?;
    let mut field = FieldConfig {
        name: String::new(),
        path: String::new(),
        index_field: None,
        rules: Vec::new(),
    };
    for (key, value) in entries {
        let key_path = join(path, key);
        match key.as_str() {
            "name" => field.name = value.as_string(&key_path)?,
            "path" => field.path = value.as_string(&key_path)?,
            "indexField" => field.index_field = Some(value.as_string(&key_path)?),
            "rules" => {
                field.rules = value
                    .as_seq(&key_path)?
                    .iter()
                    .enumerate()
                    .map(|(i, r)| rule_from_node(r, &format!("{key_path}[{i}]")))
                    .collect::<Result<_, _>>()?
            }
            _ => return Err(unknown_key(path, key, FIELD_KEYS)),
        }
    }
    required(entries, "name", path)?;
    required(entries, "path", path)?;
    Ok(field)
}

fn rule_list(node: &Node, path: &str) -> Result<Vec<Rule>, ConfigError> {
    node.as_seq(path)?
        .iter()
        .enumerate()
        .map(|(i, r)| rule_from_node(r, &format!("{path}[{i}]")))
        .collect()
}

fn rule_from_node(node: &Node, path: &str) -> Result<Rule, ConfigError> {
    let entries = node.as_map(path)?;
    let mut rule = Rule::default();
    let c = &mut rule.constraints;
    for (key, value) in entries {
        let p = join(path, key);
        let p = p.as_str();
        match key.as_str() {
            "id" => rule.id = value.as_string(p)?,
            "description" => rule.description = Some(value.as_string(p)?),
            "failureScore" => rule.failure_score = Some(value.as_f64(p)?),
            "successScore" => rule.success_score = Some(value.as_f64(p)?),
            "naScore" => rule.na_score = Some(value.as_f64(p)?),
            "hidden" => rule.hidden = value.as_bool(p)?,
            "skip" => rule.skip = value.as_bool(p)?,
            "debug" => rule.debug = value.as_bool(p)?,
            "minCount" => c.min_count = Some(value.as_u64(p)?),
            "maxCount" => c.max_count = Some(value.as_u64(p)?),
            "minExclusive" => c.min_exclusive = Some(value.as_f64(p)?),
            "minInclusive" => c.min_inclusive = Some(value.as_f64(p)?),
            "maxExclusive" => c.max_exclusive = Some(value.as_f64(p)?),
            "maxInclusive" => c.max_inclusive = Some(value.as_f64(p)?),
            "minLength" => c.min_length = Some(value.as_u64(p)?),
            "maxLength" => c.max_length = Some(value.as_u64(p)?),
            "minWords" => c.min_words = Some(value.as_u64(p)?),
            "maxWords" => c.max_words = Some(value.as_u64(p)?),
            "hasValue" => c.has_value = Some(value.as_string(p)?),
            "in" => c.allowed = Some(value.as_string_list(p)?),
            "pattern" => c.pattern = Some(value.as_string(p)?),
            "equals" => c.equals = Some(value.as_string(p)?),
            "disjoint" => c.disjoint = Some(value.as_string(p)?),
            "lessThan" => c.less_than = Some(value.as_string(p)?),
            "lessThanOrEquals" => c.less_than_or_equals = Some(value.as_string(p)?),
            "and" => c.and = Some(rule_list(value, p)?),
            "or" => c.or = Some(rule_list(value, p)?),
            "not" => c.not = Some(rule_list(value, p)?),
            "unique" => c.unique = Some(value.as_bool(p)?),
            "dependencies" => c.dependencies = Some(value.as_string_list(p)?),
            "contentType" => c.content_type = Some(value.as_string_list(p)?),
            "dimension" => c.dimension = Some(dimension_from_node(value, p)?),
            _ => return Err(unknown_key(path, key, RULE_KEYS)),
        }
    }
    required(entries, "id", path)?;
    Ok(rule)
}

fn dimension_from_node(node: &Node, path: &str) -> Result<DimensionBounds, ConfigError> {
    let mut d = DimensionBounds::default();
    for (key, value) in node.as_map(path)? {
        let p = join(path, key);
        let slot = match key.as_str() {
            "minWidth" => &mut d.min_width,
            "maxWidth" => &mut d.max_width,
            "minHeight" => &mut d.min_height,
            "maxHeight" => &mut d.max_height,
            "minShortside" => &mut d.min_shortside,
            "maxShortside" => &mut d.max_shortside,
            "minLongside" => &mut d.min_longside,
            "maxLongside" => &mut d.max_longside,
            _ => return Err(unknown_key(path, key, DIMENSION_KEYS)),
        };
        let n = value.as_u64(&p)?;
        let n = u32::try_from(n).map_err(|_| ConfigError::schema(&p, format!("{n} pixels is out of range")))?;
        *slot = Some(n);
    }
    Ok(d)
}
