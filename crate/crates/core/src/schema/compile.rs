use std::collections::HashMap;
use std::fmt;

use regex::Regex;

use super::{DimensionBounds, Rule, SchemaConfig};
use crate::constraint::{CompareKind, LogicalKind, NumericBounds};
use crate::report::CategoryPolicy;
use crate::selector::{CompiledSelector, SelectorLanguage};
use crate::value::SourceFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    /// Whether `unique` may be used on fields without an `indexField`.
    pub builtin_index: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { builtin_index: true }
    }
}

/// One problem found while compiling, located by rule id or field name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for CompileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for CompileError {}

#[derive(Debug, Clone)]
pub struct CompiledField {
    pub name: String,
    pub selector: CompiledSelector,
    /// Name of the uniqueness index the field's values are counted in.
    pub index_key: String,
}

/// An executable constraint. Field and rule references are slots into
/// [`CompiledSchema::fields`] and [`CompiledSchema::rules`].
#[derive(Debug, Clone)]
pub enum Check {
    Cardinality { min: Option<u64>, max: Option<u64> },
    NumericRange(NumericBounds),
    Length { min: Option<u64>, max: Option<u64> },
    Words { min: Option<u64>, max: Option<u64> },
    HasValue(String),
    In(Vec<String>),
    Pattern(Regex),
    Compare { kind: CompareKind, field: usize },
    Logical { kind: LogicalKind, operands: Vec<usize> },
    Unique { key: String },
    ContentType(Vec<String>),
    Dimension(DimensionBounds),
}

impl Check {
    pub fn is_network(&self) -> bool {
        matches!(self, Check::ContentType(_) | Check::Dimension(_))
    }
}

#[derive(Debug, Clone)]
pub struct CompiledRule {
    pub id: String,
    pub description: Option<String>,
    pub field: usize,
    /// Enclosing logical rule, for sub-rules.
    pub parent: Option<usize>,
    pub checks: Vec<Check>,
    pub dependencies: Vec<usize>,
    pub failure_score: f64,
    pub success_score: f64,
    pub na_score: f64,
    pub hidden: bool,
    /// True when the rule or one of its enclosing rules is skipped.
    pub skip: bool,
    pub debug: bool,
}

impl CompiledRule {
    pub fn score_for(&self, status: crate::constraint::Status) -> f64 {
        use crate::constraint::Status;
        match status {
            Status::Pass => self.success_score,
            Status::Fail => self.failure_score,
            Status::Na => self.na_score,
        }
    }
}

/// Immutable, validated form of a [`SchemaConfig`].
#[derive(Debug, Clone)]
pub struct CompiledSchema {
    config: SchemaConfig,
    fields: Vec<CompiledField>,
    rules: Vec<CompiledRule>,
    order: Vec<usize>,
    visible: Vec<usize>,
    field_by_name: HashMap<String, usize>,
    rule_by_id: HashMap<String, usize>,
    policy: CategoryPolicy,
}

impl CompiledSchema {
    pub fn config(&self) -> &SchemaConfig {
        &self.config
    }

    pub fn format(&self) -> SourceFormat {
        self.config.format
    }

    pub fn fields(&self) -> &[CompiledField] {
        &self.fields
    }

    /// Every rule, sub-rules included, in document order.
    pub fn rules(&self) -> &[CompiledRule] {
        &self.rules
    }

    /// Slots of non-skipped rules, each after its sub-rules and
    /// dependencies.
    pub fn evaluation_order(&self) -> &[usize] {
        &self.order
    }

    /// Slots of the rules that get a report column.
    pub fn visible_rules(&self) -> &[usize] {
        &self.visible
    }

    pub fn visible_rule_ids(&self) -> Vec<&str> {
        self.visible.iter().map(|&i| self.rules[i].id.as_str()).collect()
    }

    pub fn field_slot(&self, name: &str) -> Option<usize> {
        self.field_by_name.get(name).copied()
    }

    pub fn rule_slot(&self, id: &str) -> Option<usize> {
        self.rule_by_id.get(id).copied()
    }

    /// Category policy from the schema's `categories` section.
    pub fn policy(&self) -> CategoryPolicy {
        self.policy
    }

    fn active_checks(&self) -> impl Iterator<Item = (&CompiledRule, &Check)> {
        self.order
            .iter()
            .map(|&i| &self.rules[i])
            .flat_map(|r| r.checks.iter().map(move |c| (r, c)))
    }

    pub fn uses_unique(&self) -> bool {
        self.active_checks().any(|(_, c)| matches!(c, Check::Unique { .. }))
    }

    /// Field slots whose values feed a uniqueness index.
    pub fn unique_fields(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .active_checks()
            .filter(|(_, c)| matches!(c, Check::Unique { .. }))
            .map(|(r, _)| r.field)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Ids of active rules that need network access.
    pub fn network_rule_ids(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for (rule, check) in self.active_checks() {
            if check.is_network() && !out.contains(&rule.id.as_str()) {
                out.push(&rule.id);
            }
        }
        out
    }
}

pub fn compile(config: SchemaConfig) -> Result<CompiledSchema, CompileError> {
    compile_with(config, CompileOptions::default())
}

struct Flat<'a> {
    rule: &'a Rule,
    field: usize,
    parent: Option<usize>,
    skip: bool,
    operands: Vec<(LogicalKind, Vec<usize>)>,
}

fn flatten<'a>(
    rule: &'a Rule,
    field: usize,
    parent: Option<usize>,
    parent_skip: bool,
    out: &mut Vec<Flat<'a>>,
) -> usize {
    let slot = out.len();
    let skip = parent_skip || rule.skip;
    out.push(Flat {
        rule,
        field,
        parent,
        skip,
        operands: Vec::new(),
    });
    let c = &rule.constraints;
    for (kind, list) in [
        (LogicalKind::And, &c.and),
        (LogicalKind::Or, &c.or),
        (LogicalKind::Not, &c.not),
    ] {
        if let Some(list) = list {
            let children: Vec<usize> = list.iter().map(|r| flatten(r, field, Some(slot), skip, out)).collect();
            out[slot].operands.push((kind, children));
        }
    }
    slot
}

fn is_mime(text: &str) -> bool {
    let mut parts = text.split('/');
    let ok = |s: Option<&str>| {
        s.is_some_and(|s| {
            !s.is_empty()
                && s.bytes()
                    .all(|b| b.is_ascii_graphic() && !matches!(b, b'/' | b';' | b','))
        })
    };
    ok(parts.next()) && ok(parts.next()) && parts.next().is_none()
}

pub fn compile_with(config: SchemaConfig, options: CompileOptions) -> Result<CompiledSchema, CompileError> {
    let mut violations = Vec::new();
    let mut bad = |location: &str, message: String| {
        violations.push(Violation {
            location: location.to_owned(),
            message,
        })
    };

    if config.fields.is_empty() {
        bad("<schema>", "at least one field is required".into());
    }

    let language = SelectorLanguage::for_format(config.format);
    let mut fields = Vec::new();
    let mut field_by_name = HashMap::new();
    for (i, f) in config.fields.iter().enumerate() {
        let location = if f.name.is_empty() {
            format!("fields[{i}]")
        } else {
            f.name.clone()
        };
        if f.name.is_empty() {
            bad(&location, "field name must not be empty".into());
        } else if field_by_name.insert(f.name.clone(), i).is_some() {
            bad(&location, "duplicate field name".into());
        }
        let selector = match CompiledSelector::parse(language, &f.path) {
            Ok(sel) => Some(sel),
            Err(err) => {
                bad(&location, format!("invalid {language} path {:?}: {err}", f.path));
                None
            }
        };
        if let Some(selector) = selector {
            fields.push(CompiledField {
                name: f.name.clone(),
                selector,
                index_key: f.index_field.clone().unwrap_or_else(|| f.name.clone()),
            });
        }
    }

    let mut flat = Vec::new();
    let mut top = Vec::new();
    for (i, f) in config.fields.iter().enumerate() {
        for rule in &f.rules {
            top.push(flatten(rule, i, None, false, &mut flat));
        }
    }

    let mut rule_by_id = HashMap::new();
    for (slot, item) in flat.iter().enumerate() {
        let id = &item.rule.id;
        if id.is_empty() {
            bad(
                &format!("{}/rule #{}", config.fields[item.field].name, slot + 1),
                "rule id must not be empty".into(),
            );
        } else if rule_by_id.contains_key(id) {
            bad(id, "duplicate rule id".into());
        } else {
            rule_by_id.insert(id.clone(), slot);
        }
    }

    let is_ancestor = |candidate: usize, mut slot: usize| {
        while let Some(p) = flat[slot].parent {
            if p == candidate {
                return true;
            }
            slot = p;
        }
        false
    };

    let mut rules = Vec::with_capacity(flat.len());
    for (slot, item) in flat.iter().enumerate() {
        let rule = item.rule;
        let c = &rule.constraints;
        let id = rule.id.as_str();
        let field_cfg = &config.fields[item.field];
        let mut checks = Vec::new();

        let mut ordered = |lo: Option<u64>, hi: Option<u64>, what: &str| {
            if let (Some(lo), Some(hi)) = (lo, hi) {
                if lo > hi {
                    bad(id, format!("min{what} {lo} exceeds max{what} {hi}"));
                }
            }
        };
        ordered(c.min_count, c.max_count, "Count");
        ordered(c.min_length, c.max_length, "Length");
        ordered(c.min_words, c.max_words, "Words");

        if c.min_count.is_some() || c.max_count.is_some() {
            checks.push(Check::Cardinality {
                min: c.min_count,
                max: c.max_count,
            });
        }
        let bounds = NumericBounds {
            min_exclusive: c.min_exclusive,
            min_inclusive: c.min_inclusive,
            max_exclusive: c.max_exclusive,
            max_inclusive: c.max_inclusive,
        };
        if !bounds.is_empty() {
            for (name, b) in [
                ("minExclusive", c.min_exclusive),
                ("minInclusive", c.min_inclusive),
                ("maxExclusive", c.max_exclusive),
                ("maxInclusive", c.max_inclusive),
            ] {
                if b.is_some_and(|b| !b.is_finite()) {
                    bad(id, format!("{name} must be a finite number"));
                }
            }
            checks.push(Check::NumericRange(bounds));
        }
        if c.min_length.is_some() || c.max_length.is_some() {
            checks.push(Check::Length {
                min: c.min_length,
                max: c.max_length,
            });
        }
        if c.min_words.is_some() || c.max_words.is_some() {
            checks.push(Check::Words {
                min: c.min_words,
                max: c.max_words,
            });
        }
        if let Some(v) = &c.has_value {
            checks.push(Check::HasValue(v.clone()));
        }
        if let Some(list) = &c.allowed {
            if list.is_empty() {
                bad(id, "'in' needs at least one value".into());
            }
            checks.push(Check::In(list.clone()));
        }
        if let Some(p) = &c.pattern {
            match Regex::new(p) {
                Ok(re) => checks.push(Check::Pattern(re)),
                Err(err) => bad(id, format!("invalid pattern {p:?}: {err}")),
            }
        }
        for (kind, target) in [
            (CompareKind::Equals, &c.equals),
            (CompareKind::Disjoint, &c.disjoint),
            (CompareKind::LessThan, &c.less_than),
            (CompareKind::LessThanOrEquals, &c.less_than_or_equals),
        ] {
            if let Some(name) = target {
                match field_by_name.get(name) {
                    Some(&field) => checks.push(Check::Compare { kind, field }),
                    None => bad(id, format!("{} refers to unknown field {name:?}", kind.key())),
                }
            }
        }
        for (kind, operands) in &item.operands {
            if operands.is_empty() {
                bad(id, format!("'{}' needs at least one sub-rule", kind.key()));
            }
            let active = operands.iter().copied().filter(|&o| !flat[o].skip).collect();
            checks.push(Check::Logical {
                kind: *kind,
                operands: active,
            });
        }
        if c.unique == Some(true) {
            if field_cfg.index_field.is_none() && !options.builtin_index {
                bad(id, format!("unique needs an indexField on field {:?}", field_cfg.name));
            }
            checks.push(Check::Unique {
                key: field_cfg.index_field.clone().unwrap_or_else(|| field_cfg.name.clone()),
            });
        }
        if let Some(types) = &c.content_type {
            if types.is_empty() {
                bad(id, "contentType needs at least one MIME type".into());
            }
            for t in types {
                if !is_mime(t) {
                    bad(id, format!("{t:?} is not a type/subtype MIME string"));
                }
            }
            checks.push(Check::ContentType(
                types.iter().map(|t| t.to_ascii_lowercase()).collect(),
            ));
        }
        if let Some(d) = &c.dimension {
            if d.is_empty() {
                bad(id, "dimension needs at least one bound".into());
            }
            for (side, lo, hi) in d.pairs() {
                for (which, v) in [("min", lo), ("max", hi)] {
                    if v == Some(0) {
                        bad(id, format!("{which}{side} must be positive"));
                    }
                }
                if let (Some(lo), Some(hi)) = (lo, hi) {
                    if lo > hi {
                        bad(id, format!("min{side} {lo} exceeds max{side} {hi}"));
                    }
                }
            }
            checks.push(Check::Dimension(*d));
        }

        let mut dependencies = Vec::new();
        for dep in c.dependencies.iter().flatten() {
            match rule_by_id.get(dep) {
                None => bad(id, format!("depends on unknown rule {dep:?}")),
                Some(&d) if d >= slot => bad(
                    id,
                    format!("the rule should take place after {dep:?}, on which it depends; declare {dep:?} first"),
                ),
                Some(&d) if is_ancestor(d, slot) => bad(id, format!("cannot depend on its enclosing rule {dep:?}")),
                Some(&d) => dependencies.push(d),
            }
        }

        if c.is_empty() {
            bad(id, "rule has no constraint".into());
        }
        for (name, s) in [
            ("failureScore", rule.failure_score),
            ("successScore", rule.success_score),
            ("naScore", rule.na_score),
        ] {
            if s.is_some_and(|s| !s.is_finite()) {
                bad(id, format!("{name} must be a finite number"));
            }
        }

        rules.push(CompiledRule {
            id: rule.id.clone(),
            description: rule.description.clone(),
            field: item.field,
            parent: item.parent,
            checks,
            dependencies,
            failure_score: rule.failure_score.unwrap_or(0.0),
            success_score: rule.success_score.unwrap_or(0.0),
            na_score: rule.na_score.unwrap_or(0.0),
            hidden: rule.hidden,
            skip: item.skip,
            debug: rule.debug,
        });
    }

    let policy = match CategoryPolicy::default().with_settings(config.categories.as_ref()) {
        Ok(p) => p,
        Err(message) => {
            bad("categories", message);
            CategoryPolicy::default()
        }
    };

    if !violations.is_empty() {
        return Err(CompileError { violations });
    }

    fn post_order(slot: usize, flat: &[Flat<'_>], out: &mut Vec<usize>) {
        for (_, children) in &flat[slot].operands {
            for &c in children {
                post_order(c, flat, out);
            }
        }
        if !flat[slot].skip {
            out.push(slot);
        }
    }
    let mut order = Vec::new();
    for &t in &top {
        post_order(t, &flat, &mut order);
    }
    let visible = top
        .iter()
        .copied()
        .filter(|&t| !rules[t].skip && !rules[t].hidden)
        .collect();

    Ok(CompiledSchema {
        config,
        fields,
        rules,
        order,
        visible,
        field_by_name,
        rule_by_id,
        policy,
    })
}
