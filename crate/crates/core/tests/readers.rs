use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use bibcheck::reader::{open_reader, InputFormat, ReaderDiagnostics, ReaderOptions};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn options() -> ReaderOptions {
    ReaderOptions {
        id_column: Some("id".into()),
        id_pointer: Some("/id".into()),
    }
}

/// Reads a data file and renders its records in the listing layout.
fn render(format: InputFormat, name: &str) -> (String, ReaderDiagnostics) {
    let file = File::open(fixture(name)).unwrap();
    let mut reader = open_reader(format, BufReader::new(file), &options()).unwrap();
    let mut out = String::new();
    for record in &mut reader {
        assert_eq!(record.format(), format.source_format());
        out.push_str(&format!("# {}\n", record.record_id()));
        for (tag, code, value) in record.triples() {
            out.push_str(&format!("{tag}\t{code}\t{value}\n"));
        }
    }
    (out, reader.diagnostics().clone())
}

fn expected(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

const CASES: [(InputFormat, &str, &str); 6] = [
    (InputFormat::Iso2709, "marc", "mrc"),
    (InputFormat::Alephseq, "alephseq", "seq"),
    (InputFormat::PicaPlain, "pica", "pp"),
    (InputFormat::PicaNormalized, "picanorm", "pn"),
    (InputFormat::Csv, "csv", "csv"),
    (InputFormat::JsonLines, "jsonl", "jsonl"),
];

#[test]
fn clean_fixtures_match_listings() {
    for (format, dir, ext) in CASES {
        let (got, diag) = render(format, &format!("{dir}/records.{ext}"));
        assert_eq!(got, expected(&format!("{dir}/records.triples")), "{format}");
        assert_eq!(diag.records_read, 3, "{format}");
        assert_eq!(diag.records_skipped, 0, "{format}");
        assert!(diag.warnings.is_empty(), "{format}: {:?}", diag.warnings);
    }
}

#[test]
fn corrupt_records_are_dropped_and_reading_resumes() {
    for (format, dir, ext) in CASES {
        let (got, diag) = render(format, &format!("{dir}/corrupt.{ext}"));
        assert_eq!(got, expected(&format!("{dir}/corrupt.triples")), "{format}");
        assert_eq!(diag.records_read, 2, "{format}");
        assert!(diag.warning_count() > 0, "{format}");
        assert!(diag.io_error.is_none(), "{format}");
    }
}

#[test]
fn iso2709_marc_selectors_see_fixture_values() {
    use bibcheck::selector::{CompiledSelector, SelectorLanguage};

    let file = File::open(fixture("marc/records.mrc")).unwrap();
    let records: Vec<_> = open_reader(InputFormat::Iso2709, BufReader::new(file), &options())
        .unwrap()
        .collect();
    let sel = |path: &str| CompiledSelector::parse(SelectorLanguage::MarcSpec, path).unwrap();
    let raw =
        |path: &str, i: usize| -> Vec<String> { records[i].extract(&sel(path)).into_iter().map(|v| v.raw).collect() };
    assert_eq!(raw("040$a", 0), ["BE-KBR00p"]);
    assert_eq!(raw("650$a", 0), ["Literatur", "Roman"]);
    assert_eq!(raw("008/7-10", 0), ["2020"]);
    assert!(raw("040$a", 2).is_empty());
}
