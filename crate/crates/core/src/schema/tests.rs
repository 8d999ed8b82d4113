use proptest::prelude::*;

use super::*;

const EXAMPLE: &str = "format: MARC
fields:
- name: 040$a
  path: 040$a
  rules:
  - id: 040$a.minCount
    minCount: 1
  - id: 040$a.pattern
    pattern: ^BE-KBR00
";

const EXAMPLE_JSON: &str = r#"{
  "format": "MARC",
  "fields": [
    {"name": "040$a", "path": "040$a", "rules": [
      {"id": "040$a.minCount", "minCount": 1},
      {"id": "040$a.pattern", "pattern": "^BE-KBR00"}
    ]}
  ]
}"#;

fn example_config() -> SchemaConfig {
    let mut min = Rule::new("040$a.minCount");
    min.constraints.min_count = Some(1);
    let mut pat = Rule::new("040$a.pattern");
    pat.constraints.pattern = Some("^BE-KBR00".into());
    SchemaConfig {
        format: SourceFormat::Marc,
        fields: vec![FieldConfig {
            name: "040$a".into(),
            path: "040$a".into(),
            index_field: None,
            rules: vec![min, pat],
        }],
        categories: None,
    }
}

fn yaml(text: &str) -> Result<SchemaConfig, ConfigError> {
    parse_schema(text, SchemaSyntax::YamlLike)
}

fn violations(text: &str) -> Vec<Violation> {
    compile(yaml(text).unwrap()).unwrap_err().violations
}

#[test]
fn example_maps_structurally() {
    assert_eq!(yaml(EXAMPLE).unwrap(), example_config());
    assert_eq!(
        parse_schema(EXAMPLE_JSON, SchemaSyntax::Json).unwrap(),
        example_config()
    );
}

#[test]
fn example_compiles_in_document_order() {
    let schema = compile(yaml(EXAMPLE).unwrap()).unwrap();
    assert_eq!(schema.visible_rule_ids(), ["040$a.minCount", "040$a.pattern"]);
    let order: Vec<&str> = schema
        .evaluation_order()
        .iter()
        .map(|&i| schema.rules()[i].id.as_str())
        .collect();
    assert_eq!(order, ["040$a.minCount", "040$a.pattern"]);
    assert!(!schema.uses_unique());
    assert!(schema.network_rule_ids().is_empty());
}

#[test]
fn misspelled_key_is_named() {
    let err = yaml(&EXAMPLE.replace("minCount: 1", "mincount: 1")).unwrap_err();
    let text = err.to_string();
    assert!(text.contains("fields[0].rules[0].mincount"), "{text}");
    assert!(text.contains("minCount"), "{text}");
}

#[test]
fn wrong_types_are_rejected() {
    let err = yaml(&EXAMPLE.replace("minCount: 1", "minCount: one")).unwrap_err();
    assert!(matches!(err, ConfigError::Schema { ref path, .. } if path == "fields[0].rules[0].minCount"));
    assert!(yaml("format: XML\nfields:\n- name: a\n  path: a\n  rules: []\n").is_err());
    assert!(yaml("format: MARC\nfields: []\n").is_err());
    assert!(parse_schema("{\"format\": ", SchemaSyntax::Json).is_err());
    let err = parse_schema(
        &EXAMPLE_JSON.replace("\"minCount\": 1", "\"minCount\": \"1\""),
        SchemaSyntax::Json,
    );
    assert!(err.is_err());
}

#[test]
fn forward_dependency_is_rejected() {
    let text = "format: MARC
fields:
- name: t
  path: 245$a
  rules:
  - id: early
    minCount: 1
    dependencies: [later.rule]
  - id: later.rule
    maxCount: 1
";
    let v = violations(text);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].location, "early");
    assert!(v[0].message.contains("should take place after"));
}

#[test]
fn invalid_regex_is_reported() {
    let v = violations(&EXAMPLE.replace("^BE-KBR00", "\"(\""));
    assert_eq!(v[0].location, "040$a.pattern");
    assert!(v[0].message.contains("invalid pattern"));
}

#[test]
fn all_violations_are_collected() {
    let text = "format: MARC
fields:
- name: t
  path: 2450
  rules:
  - id: a
    minCount: 3
    maxCount: 1
  - id: a
    equals: nowhere
  - id: b
    dimension:
      minWidth: 20
      maxWidth: 10
  - id: c
    description: nothing to check
  - id: d
    dependencies: [ghost]
";
    let v = violations(text);
    let locations: Vec<&str> = v.iter().map(|v| v.location.as_str()).collect();
    assert_eq!(locations, ["t", "a", "a", "a", "b", "c", "d"], "{v:#?}");
}

#[test]
fn logical_sub_rules_are_nested() {
    let text = "format: PICA
fields:
- name: lang
  path: 010@$a
  rules:
  - id: lang.known
    or:
    - id: lang.ger
      hasValue: ger
    - id: lang.eng
      hasValue: eng
  - id: lang.notEmpty
    not:
    - id: lang.empty
      maxLength: 0
    dependencies: [lang.ger]
";
    let schema = compile(yaml(text).unwrap()).unwrap();
    assert_eq!(schema.visible_rule_ids(), ["lang.known", "lang.notEmpty"]);
    let order: Vec<&str> = schema
        .evaluation_order()
        .iter()
        .map(|&i| schema.rules()[i].id.as_str())
        .collect();
    assert_eq!(
        order,
        ["lang.ger", "lang.eng", "lang.known", "lang.empty", "lang.notEmpty"]
    );

    let ancestor = text
        .replace("dependencies: [lang.ger]", "dependencies: [lang.known]")
        .replace(
            "    - id: lang.eng\n      hasValue: eng\n",
            "    - id: lang.eng\n      hasValue: eng\n      dependencies: [lang.known]\n",
        );
    let v = violations(&ancestor);
    assert!(v
        .iter()
        .any(|v| v.location == "lang.eng" && v.message.contains("enclosing")));
}

#[test]
fn hidden_and_skipped_rules() {
    let text = "format: CSV
fields:
- name: title
  path: title
  rules:
  - id: pre
    minCount: 1
    hidden: true
  - id: gone
    minCount: 1
    skip: true
  - id: main
    minLength: 3
    dependencies: [pre]
";
    let schema = compile(yaml(text).unwrap()).unwrap();
    assert_eq!(schema.visible_rule_ids(), ["main"]);
    assert_eq!(schema.evaluation_order().len(), 2);
}

#[test]
fn unique_needs_an_index() {
    let text = "format: JSON
fields:
- name: id
  path: /id
  rules:
  - id: id.unique
    unique: true
";
    let config = yaml(text).unwrap();
    let schema = compile(config.clone()).unwrap();
    assert!(schema.uses_unique());
    assert_eq!(schema.fields()[0].index_key, "id");
    let err = compile_with(config.clone(), CompileOptions { builtin_index: false }).unwrap_err();
    assert!(err.violations[0].message.contains("indexField"));
    let mut with_index = config;
    with_index.fields[0].index_field = Some("id_ss".into());
    let schema = compile_with(with_index, CompileOptions { builtin_index: false }).unwrap();
    assert_eq!(schema.fields()[0].index_key, "id_ss");
}

#[test]
fn categories_section() {
    let text = format!("{EXAMPLE}categories:\n  goodFloor: 2\n  blockingScore: -5\n");
    let schema = compile(yaml(&text).unwrap()).unwrap();
    assert_eq!(schema.policy().good_floor, 2.0);
    assert_eq!(schema.policy().blocking_score, -5.0);
    let bad = format!("{EXAMPLE}categories:\n  goodFloor: -20\n");
    assert_eq!(
        compile(yaml(&bad).unwrap()).unwrap_err().violations[0].location,
        "categories"
    );
}

#[test]
fn network_rules_are_listed() {
    let text = "format: JSON
fields:
- name: img
  path: /image
  rules:
  - id: img.type
    contentType: [image/jpeg, image/png]
  - id: img.size
    dimension:
      minShortside: 100
";
    let schema = compile(yaml(text).unwrap()).unwrap();
    assert_eq!(schema.network_rule_ids(), ["img.type", "img.size"]);
    let v = violations(&text.replace("image/png", "png"));
    assert!(v[0].message.contains("MIME"));
}

fn id() -> impl Strategy<Value = String> {
    "[a-z]{1,6}"
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![(-1000i32..1000).prop_map(f64::from), -1.0e6f64..1.0e6]
}

fn opt<T: std::fmt::Debug + Clone>(s: impl Strategy<Value = T>) -> impl Strategy<Value = Option<T>> {
    proptest::option::weighted(0.3, s)
}

fn leaf_rule() -> impl Strategy<Value = Rule> {
    (
        id(),
        opt("\\PC{0,10}"),
        (opt(0u64..5), opt(0u64..5), opt(finite()), opt(finite()), opt(0u64..9)),
        (
            opt("\\PC{0,6}"),
            opt(proptest::collection::vec("[a-z ]{0,4}", 0..3)),
            opt("[a-z^$.]{1,5}"),
        ),
        (
            opt(any::<bool>()),
            opt(proptest::collection::vec(id(), 0..3)),
            opt(1u32..500),
        ),
        (
            opt(finite()),
            opt(finite()),
            any::<bool>(),
            any::<bool>(),
            any::<bool>(),
        ),
    )
        .prop_map(|(id, description, nums, strs, misc, flags)| {
            let mut r = Rule::new(id);
            r.description = description;
            let c = &mut r.constraints;
            (c.min_count, c.max_count, c.min_inclusive, c.max_exclusive, c.max_words) = nums;
            (c.has_value, c.allowed, c.pattern) = strs;
            c.unique = misc.0;
            c.dependencies = misc.1;
            c.dimension = misc.2.map(|w| DimensionBounds {
                min_width: Some(w),
                ..Default::default()
            });
            (r.failure_score, r.success_score, r.hidden, r.skip, r.debug) = flags;
            r
        })
}

fn rule() -> impl Strategy<Value = Rule> {
    leaf_rule().prop_recursive(2, 8, 3, |inner| {
        (leaf_rule(), proptest::collection::vec(inner, 1..3)).prop_map(|(mut r, subs)| {
            r.constraints.or = Some(subs);
            r
        })
    })
}

fn config() -> impl Strategy<Value = SchemaConfig> {
    let field = (
        id(),
        "[0-9]{3}\\$[a-z]",
        opt(id()),
        proptest::collection::vec(rule(), 0..3),
    )
        .prop_map(|(name, path, index_field, rules)| FieldConfig {
            name,
            path,
            index_field,
            rules,
        });
    let categories = opt((opt(finite()), opt(finite())).prop_map(|(a, b)| CategorySettings {
        good_floor: a,
        blocking_score: b,
        ..Default::default()
    }));
    (proptest::collection::vec(field, 1..3), categories).prop_map(|(fields, categories)| SchemaConfig {
        format: SourceFormat::Marc,
        fields,
        categories,
    })
}

proptest! {
    #[test]
    fn json_rendering_round_trips(cfg in config()) {
        let text = render_json(&cfg);
        prop_assert_eq!(parse_schema(&text, SchemaSyntax::Json).unwrap(), cfg);
    }

    #[test]
    fn compiled_configs_recompile(cfg in config()) {
        match compile(cfg.clone()) {
            Ok(schema) => prop_assert!(compile(schema.config().clone()).is_ok()),
            Err(err) => prop_assert!(!err.violations.is_empty()),
        }
    }
}
