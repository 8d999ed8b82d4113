//! Synthetic MARC dataset shared by the integration suites.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub enum Content {
    Control(String),
    Data([char; 2], Vec<(char, String)>),
}

pub struct MarcField {
    pub tag: &'static str,
    pub content: Content,
}

fn data(tag: &'static str, ind: [char; 2], subs: &[(char, &str)]) -> MarcField {
    MarcField {
        tag,
        content: Content::Data(ind, subs.iter().map(|&(c, v)| (c, v.to_owned())).collect()),
    }
}

/// Encodes one record in ISO 2709 framing. Kept apart from the library
/// reader so the two can check each other.
pub fn iso2709(fields: &[MarcField]) -> Vec<u8> {
    let mut directory = Vec::new();
    let mut body = Vec::new();
    for f in fields {
        let mut bytes = Vec::new();
        match &f.content {
            Content::Control(v) => bytes.extend_from_slice(v.as_bytes()),
            Content::Data(ind, subs) => {
                bytes.extend(ind.iter().map(|&c| c as u8));
                for (code, value) in subs {
                    bytes.push(0x1F);
                    bytes.push(*code as u8);
                    bytes.extend_from_slice(value.as_bytes());
                }
            }
        }
        bytes.push(0x1E);
        directory.extend_from_slice(format!("{}{:04}{:05}", f.tag, bytes.len(), body.len()).as_bytes());
        body.extend(bytes);
    }
    let base = 24 + directory.len() + 1;
    let total = base + body.len() + 1;
    let mut out = format!("{total:05}nam a22{base:05} a 4500").into_bytes();
    out.extend(directory);
    out.push(0x1E);
    out.extend(body);
    out.push(0x1D);
    out
}

pub struct Dataset {
    pub bytes: Vec<u8>,
    pub ids: Vec<String>,
    /// Record ids whose 035$a value is shared with another record.
    pub duplicated: BTreeSet<String>,
}

const WORDS: [&str; 12] = [
    "history",
    "of",
    "the",
    "northern",
    "lights",
    "Ärger",
    "im",
    "Paradies",
    "catalogue",
    "raisonné",
    "vol.",
    "études",
];
const AGENCIES: [&str; 4] = ["BE-KBR00", "BE-KBR00", "DE-101", "xBE-KBR00"];
const LANGS: [&str; 5] = ["ger", "eng", "fra", "dut", "zzz"];

/// `n` records with 035$a system numbers; `dup_pairs` pairs of records
/// share a number, so `2 * dup_pairs` records are duplicates.
pub fn marc_dataset(n: usize, dup_pairs: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sysnos: Vec<String> = (0..n).map(|i| format!("(OCoLC){:08}", 10_000_000 + i * 7)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut duplicated = BTreeSet::new();
    for pair in order[..2 * dup_pairs].chunks(2) {
        sysnos[pair[1]] = sysnos[pair[0]].clone();
        duplicated.insert(format!("rec{:05}", pair[0]));
        duplicated.insert(format!("rec{:05}", pair[1]));
    }

    let mut bytes = Vec::new();
    let mut ids = Vec::with_capacity(n);
    for (i, sysno) in sysnos.iter().enumerate() {
        let id = format!("rec{i:05}");
        let year = rng.gen_range(1400..2030);
        let mut fields = vec![
            MarcField {
                tag: "001",
                content: Content::Control(id.clone()),
            },
            MarcField {
                tag: "008",
                content: Content::Control(format!("190101s{year}    gw            000 0 ger d")),
            },
            data("035", [' ', ' '], &[('a', sysno)]),
        ];
        if rng.gen_bool(0.9) {
            fields.push(data("040", [' ', ' '], &[('a', AGENCIES.choose(&mut rng).unwrap())]));
        }
        for _ in 0..rng.gen_range(0..3) {
            fields.push(data("041", ['0', ' '], &[('a', LANGS.choose(&mut rng).unwrap())]));
        }
        let mut author = None;
        if rng.gen_bool(0.8) {
            let name = format!(
                "{}, {}",
                WORDS.choose(&mut rng).unwrap(),
                WORDS.choose(&mut rng).unwrap()
            );
            fields.push(data("100", ['1', ' '], &[('a', &name)]));
            author = Some(name);
        }
        let words: Vec<&str> = (0..rng.gen_range(0..8))
            .map(|_| *WORDS.choose(&mut rng).unwrap())
            .collect();
        let title = match author {
            // Occasionally the author was keyed into the title too.
            Some(name) if rng.gen_bool(0.05) => name,
            _ => words.join(" "),
        };
        fields.push(data("245", ['1', '0'], &[('a', &title), ('c', "by someone")]));
        let imprint_year = match rng.gen_range(0..20) {
            0 => format!("c{year}"),
            1 => (year - 1).to_string(),
            _ => year.to_string(),
        };
        fields.push(data("260", [' ', ' '], &[('a', "Brussel"), ('c', &imprint_year)]));
        let unit = if rng.gen_bool(0.9) { "p." } else { "leaves" };
        fields.push(data(
            "300",
            [' ', ' '],
            &[('a', &format!("{} {unit}", rng.gen_range(1..900)))],
        ));
        for _ in 0..rng.gen_range(0..7) {
            fields.push(data("650", [' ', '7'], &[('a', WORDS.choose(&mut rng).unwrap())]));
        }
        bytes.extend(iso2709(&fields));
        ids.push(id);
    }
    Dataset { bytes, ids, duplicated }
}

/// Twenty network-free rules over the generated dataset.
pub const DATASET_SCHEMA: &str = "format: MARC
fields:
- name: id
  path: '001'
  rules:
  - id: id.mandatory
    minCount: 1
    maxCount: 1
- name: sysno
  path: 035$a
  rules:
  - id: sysno.unique
    unique: true
    failureScore: -20
- name: agency
  path: 040$a
  rules:
  - id: agency.mandatory
    minCount: 1
  - id: agency.pattern
    pattern: ^BE-KBR00
    dependencies: [agency.mandatory]
- name: lang
  path: 041$a
  rules:
  - id: lang.codes
    in: [ger, eng, fra, dut]
  - id: lang.single
    maxCount: 1
- name: author
  path: 100$a
  rules:
  - id: author.words
    minWords: 2
    successScore: 1
  - id: author.shape
    pattern: ', '
- name: title
  path: 245$a
  rules:
  - id: title.length
    minLength: 3
    maxLength: 120
  - id: title.words
    minWords: 1
    maxWords: 6
  - id: title.differs
    disjoint: author
- name: year
  path: 260$c
  rules:
  - id: year.range
    minInclusive: 1450
    maxExclusive: 2026
    failureScore: -2
  - id: year.digits
    pattern: ^[0-9]{4}$
- name: year008
  path: 008/7-10
  rules:
  - id: year008.matches
    equals: year
  - id: year008.notLater
    lessThanOrEquals: year
- name: pages
  path: 300$a
  rules:
  - id: pages.suffix
    pattern: p\\.$
- name: subject
  path: 650$a
  rules:
  - id: subject.count
    minCount: 1
    maxCount: 5
    successScore: 2
  - id: subject.any
    or:
    - id: subject.history
      hasValue: history
    - id: subject.catalogue
      hasValue: catalogue
";
