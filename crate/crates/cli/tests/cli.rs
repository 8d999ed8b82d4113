use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

use bibcheck::reader::{open_reader, InputFormat, ReaderOptions};
use bibcheck::report::{aggregate, Validator};
use bibcheck::schema::{compile, parse_schema, SchemaSyntax};

const AGENCY: &str = "format: MARC
fields:
- name: 040$a
  path: 040$a
  rules:
  - id: 040$a.minCount
    minCount: 1
  - id: 040$a.pattern
    pattern: ^BE-KBR00
";

const COVERS: &str = "format: MARC
fields:
- name: cover
  path: 856$u
  rules:
  - id: cover.type
    contentType: [image/png]
  - id: cover.size
    dimension:
      minShortside: 100
";

const TITLES: &str = "format: CSV
fields:
- name: title
  path: title
  rules:
  - id: title.words
    minWords: 2
    successScore: 3
  - id: title.lang
    in: [ger, eng]
- name: lang
  path: lang
  rules:
  - id: lang.known
    in: [ger, eng]
    failureScore: -11
";

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn bibcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bibcheck"))
        .args(args)
        .output()
        .unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

struct Scratch(TempDir);

impl Scratch {
    fn new() -> Self {
        Scratch(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, contents: &str) -> String {
        let path = self.0.path().join(name);
        fs::write(&path, contents).unwrap();
        path.to_string_lossy().into_owned()
    }

    fn path(&self, name: &str) -> String {
        self.0.path().join(name).to_string_lossy().into_owned()
    }
}

fn fixture(name: &str) -> String {
    fixtures().join(name).to_string_lossy().into_owned()
}

#[test]
fn check_config_prints_a_summary() {
    let dir = Scratch::new();
    let out = bibcheck(&["check-config", &dir.file("agency.yaml", AGENCY)]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert_eq!(
        text(&out.stdout),
        "1 field, 2 rules\nevaluation order: 040$a.minCount, 040$a.pattern\n"
    );
}

#[test]
fn check_config_rejects_forward_dependencies() {
    let dir = Scratch::new();
    let schema = AGENCY.replace(
        "    minCount: 1\n",
        "    minCount: 1\n    dependencies: [040$a.pattern]\n",
    );
    let out = bibcheck(&["check-config", &dir.file("bad.yaml", &schema)]);
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(
        err.contains("040$a.minCount") && err.contains("should take place after"),
        "{err}"
    );
}

#[test]
fn check_config_reports_missing_files() {
    let out = bibcheck(&["check-config", "/nonexistent/schema.yaml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).starts_with("error: cannot read schema"));
}

#[test]
fn validate_writes_the_report() {
    let dir = Scratch::new();
    let report = dir.path("report.csv");
    let out = bibcheck(&[
        "validate",
        "--input",
        &fixture("marc/records.mrc"),
        "--format",
        "iso2709",
        "--schema",
        &dir.file("agency.yaml", AGENCY),
        "--output",
        &report,
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert_eq!(
        fs::read_to_string(&report).unwrap(),
        "recordId,040$a.minCount,040$a.pattern,score,category\n\
         m1,1,1,0,ACCEPTABLE\n\
         m2,1,0,0,ACCEPTABLE\n\
         m3,0,NA,0,ACCEPTABLE\n"
    );
    assert!(
        text(&out.stdout).starts_with("3 records, 60.0% of decided checks passed (3/5)"),
        "{}",
        text(&out.stdout)
    );
}

#[test]
fn validate_reads_several_inputs_in_order() {
    let dir = Scratch::new();
    let report = dir.path("report.csv");
    let out = bibcheck(&[
        "validate",
        "--input",
        &fixture("alephseq/records.seq"),
        &fixture("alephseq/corrupt.seq"),
        "--format",
        "alephseq",
        "--schema",
        &dir.file("agency.yaml", AGENCY),
        "--output",
        &report,
    ]);
    assert!(out.status.success());
    let ids: Vec<String> = fs::read_to_string(&report)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().to_owned())
        .collect();
    assert_eq!(ids, ["m1", "m2", "m3", "m1", "m3"]);
    assert!(text(&out.stderr).contains("skipped"), "{}", text(&out.stderr));
}

#[test]
fn network_rules_need_the_flag() {
    let dir = Scratch::new();
    let report = dir.path("report.csv");
    let schema = dir.file("covers.yaml", COVERS);
    let input = fixture("marc/records.mrc");
    let base = [
        "validate", "--input", &input, "--format", "iso2709", "--schema", &schema, "--output", &report,
    ];
    let out = bibcheck(&base);
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(
        err.contains("cover.type, cover.size") && err.contains("--enable-network"),
        "{err}"
    );
    assert!(!Path::new(&report).exists());

    let images = fixture("images");
    let mut args = base.to_vec();
    args.extend(["--enable-network", "--net-fixtures", &images]);
    let out = bibcheck(&args);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let csv = fs::read_to_string(&report).unwrap();
    // m3 links a missing file called cover.png; the others have no 856.
    assert_eq!(
        csv.lines().collect::<Vec<_>>()[1..],
        ["m1,NA,NA,0,ACCEPTABLE", "m2,NA,NA,0,ACCEPTABLE", "m3,0,0,0,ACCEPTABLE"]
    );
}

#[test]
fn unreadable_input_fails_cleanly() {
    let dir = Scratch::new();
    let report = dir.path("report.csv");
    let out = bibcheck(&[
        "validate",
        "--input",
        "/nonexistent/records.mrc",
        "--format",
        "iso2709",
        "--schema",
        &dir.file("agency.yaml", AGENCY),
        "--output",
        &report,
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("cannot open /nonexistent/records.mrc"));
    assert!(!Path::new(&report).exists());
}

#[test]
fn format_must_match_the_schema() {
    let dir = Scratch::new();
    let out = bibcheck(&[
        "validate",
        "--input",
        &fixture("csv/records.csv"),
        "--format",
        "csv",
        "--schema",
        &dir.file("agency.yaml", AGENCY),
        "--output",
        &dir.path("r.csv"),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("does not match"));
}

fn validate_titles(dir: &Scratch, workers: &str) -> (String, String) {
    let report = dir.path(&format!("report-{workers}.csv"));
    let stats = dir.path(&format!("stats-{workers}.json"));
    let out = bibcheck(&[
        "validate",
        "--input",
        &fixture("csv/records.csv"),
        "--schema",
        &dir.file("titles.yaml", TITLES),
        "--id-column",
        "id",
        "--output",
        &report,
        "--aggregate-out",
        &stats,
        "--workers",
        workers,
        "--blocking-score",
        "-20",
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    (fs::read_to_string(report).unwrap(), fs::read_to_string(stats).unwrap())
}

#[test]
fn csv_input_with_threshold_overrides() {
    let dir = Scratch::new();
    let (csv, _) = validate_titles(&dir, "1");
    assert_eq!(
        csv,
        "recordId,title.words,title.lang,lang.known,score,category\n\
         c1,1,0,1,3,ACCEPTABLE\n\
         c2,1,0,1,3,ACCEPTABLE\n\
         c3,0,0,0,-11,BLOCKED\n"
    );
    assert_eq!(validate_titles(&dir, "4"), validate_titles(&dir, "1"));
}

#[test]
fn aggregate_matches_the_in_process_statistics() {
    let dir = Scratch::new();
    let (csv, json) = validate_titles(&dir, "2");
    let schema = dir.path("titles.yaml");
    let out = bibcheck(&["aggregate", "--input", &dir.file("in.csv", &csv), "--schema", &schema]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert_eq!(text(&out.stdout), json);

    let compiled = compile(parse_schema(TITLES, SchemaSyntax::YamlLike).unwrap()).unwrap();
    let mut policy = compiled.policy();
    policy.blocking_score = -20.0;
    let validator = Validator::new(&compiled).with_policy(policy);
    let options = ReaderOptions {
        id_column: Some("id".into()),
        ..Default::default()
    };
    let file = fs::File::open(fixture("csv/records.csv")).unwrap();
    let reader = open_reader(InputFormat::Csv, std::io::BufReader::new(file), &options).unwrap();
    let reports: Vec<_> = reader.map(|r| validator.validate_record(&r)).collect();
    assert_eq!(aggregate(&reports, &compiled).to_json(), json);
}

#[test]
fn aggregate_rejects_a_foreign_header() {
    let dir = Scratch::new();
    let input = dir.file("in.csv", "recordId,other.rule,score,category\nx,1,0,GOOD\n");
    let out = bibcheck(&[
        "aggregate",
        "--input",
        &input,
        "--schema",
        &dir.file("agency.yaml", AGENCY),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("header"), "{}", text(&out.stderr));
}

#[test]
fn aggregate_of_an_empty_report() {
    let dir = Scratch::new();
    let input = dir.file("in.csv", "recordId,040$a.minCount,040$a.pattern,score,category\n");
    let output = dir.path("stats.json");
    let out = bibcheck(&[
        "aggregate",
        "--input",
        &input,
        "--schema",
        &dir.file("a.yaml", AGENCY),
        "--output",
        &output,
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let stats: serde_json::Value = serde_json::from_str(&fs::read_to_string(output).unwrap()).unwrap();
    assert_eq!(
        stats,
        serde_json::json!({
            "records": 0,
            "rules": {
                "040$a.minCount": {"PASS": 0, "FAIL": 0, "NA": 0},
                "040$a.pattern": {"PASS": 0, "FAIL": 0, "NA": 0}
            },
            "categories": {"BLOCKED": 0, "TO_BE_IMPROVED": 0, "ACCEPTABLE": 0, "GOOD": 0},
            "score": {"min": null, "max": null, "mean": null, "median": null}
        })
    );
}
