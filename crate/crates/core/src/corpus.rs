//! Labeled comment datasets: label mapping, TSV/CSV ingestion, statistics
//! and a synthetic corpus generator for desk-scale experiments.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("row {row}: invalid UTF-8")]
    Encoding { row: usize },
    #[error("header is missing required column `{0}`")]
    MissingColumn(&'static str),
    #[error("row {row}: duplicate id {id:?}")]
    DuplicateId { row: usize, id: String },
    #[error("{split} split requires a label on every example (id {id:?} has none)")]
    MissingLabel { split: SplitName, id: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Binary class of a comment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "Non-Abusive")]
    NonAbusive = 0,
    #[serde(rename = "Abusive")]
    Abusive = 1,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::NonAbusive, Label::Abusive];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::NonAbusive => "Non-Abusive",
            Label::Abusive => "Abusive",
        }
    }

    /// Binary value: 1 for Abusive, 0 for Non-Abusive.
    pub fn value(self) -> u8 {
        self as u8
    }

    pub fn from_value(v: u8) -> Option<Label> {
        match v {
            0 => Some(Label::NonAbusive),
            1 => Some(Label::Abusive),
            _ => None,
        }
    }

    /// The other class.
    pub fn flip(self) -> Label {
        match self {
            Label::NonAbusive => Label::Abusive,
            Label::Abusive => Label::NonAbusive,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        map_label(s)
    }
}

/// Maps a textual class name to a [`Label`].
///
/// Matching is case-insensitive, ignores surrounding whitespace and treats
/// hyphens and inner whitespace interchangeably ("Non-abusive",
/// "non abusive", "NON-ABUSIVE" all map to Non-Abusive).
pub fn map_label(raw: &str) -> Result<Label, CorpusError> {
    let folded: String = raw
        .trim()
        .chars()
        .filter(|c| *c != '-' && !c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect();
    match folded.as_str() {
        "abusive" => Ok(Label::Abusive),
        "nonabusive" => Ok(Label::NonAbusive),
        _ => Err(CorpusError::UnknownLabel(raw.to_owned())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Dev,
    Test,
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitName::Train => "train",
            SplitName::Dev => "dev",
            SplitName::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub id: String,
    pub text: String,
    pub label: Option<Label>,
}

/// An ordered, id-unique collection of examples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    name: SplitName,
    language_tag: String,
    examples: Vec<LabeledExample>,
}

impl DatasetSplit {
    /// Validates id uniqueness, and that train/dev examples are all labeled.
    pub fn new(
        name: SplitName,
        language_tag: impl Into<String>,
        examples: Vec<LabeledExample>,
    ) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(examples.len());
        for (row, ex) in examples.iter().enumerate() {
            if ex.id.is_empty() {
                return Err(CorpusError::MalformedRow {
                    row: row + 1,
                    reason: "empty id".into(),
                });
            }
            if !seen.insert(ex.id.as_str()) {
                return Err(CorpusError::DuplicateId {
                    row: row + 1,
                    id: ex.id.clone(),
                });
            }
            if name != SplitName::Test && ex.label.is_none() {
                return Err(CorpusError::MissingLabel {
                    split: name,
                    id: ex.id.clone(),
                });
            }
        }
        Ok(Self {
            name,
            language_tag: language_tag.into(),
            examples,
        })
    }

    pub fn name(&self) -> SplitName {
        self.name
    }

    pub fn language_tag(&self) -> &str {
        &self.language_tag
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.examples.iter().map(|e| e.text.as_str())
    }

    /// Renames the split, re-checking the labeling requirement.
    pub fn with_name(self, name: SplitName) -> Result<Self, CorpusError> {
        DatasetSplit::new(name, self.language_tag, self.examples)
    }

    /// Writes the split as TSV with an `id\ttext\tlabel` header.
    ///
    /// Texts must not contain tabs or newlines.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "id\ttext\tlabel")?;
        for ex in &self.examples {
            let label = ex.label.map(Label::as_str).unwrap_or("");
            writeln!(out, "{}\t{}\t{}", ex.id, ex.text, label)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    #[default]
    Tsv,
    Csv,
}

impl TableFormat {
    fn reader<R: Read>(self, source: R) -> csv::Reader<R> {
        let mut builder = csv::ReaderBuilder::new();
        builder.has_headers(true).flexible(false);
        match self {
            TableFormat::Tsv => builder.delimiter(b'\t').quoting(false),
            TableFormat::Csv => builder.delimiter(b','),
        };
        builder.from_reader(source)
    }
}

impl FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tsv" => Ok(TableFormat::Tsv),
            "csv" => Ok(TableFormat::Csv),
            other => Err(format!("unknown table format {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub format: TableFormat,
    pub has_labels: bool,
    pub split: SplitName,
    pub language_tag: String,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            format: TableFormat::Tsv,
            has_labels: true,
            split: SplitName::Train,
            language_tag: String::new(),
        }
    }
}

struct Columns {
    id: Option<usize>,
    text: Option<usize>,
    label: Option<usize>,
}

struct Table<R: Read> {
    reader: csv::Reader<R>,
    columns: Columns,
}

impl<R: Read> Table<R> {
    fn open(source: R, format: TableFormat) -> Result<Self, CorpusError> {
        let mut reader = format.reader(source);
        let headers = reader.byte_headers().map_err(|e| csv_error(e, 0))?.clone();
        let mut columns = Columns {
            id: None,
            text: None,
            label: None,
        };
        for (i, raw) in headers.iter().enumerate() {
            let name = std::str::from_utf8(raw).map_err(|_| CorpusError::Encoding { row: 0 })?;
            match name.trim().trim_start_matches('\u{feff}').to_ascii_lowercase().as_str() {
                "id" if columns.id.is_none() => columns.id = Some(i),
                "text" if columns.text.is_none() => columns.text = Some(i),
                "label" if columns.label.is_none() => columns.label = Some(i),
                _ => {}
            }
        }
        Ok(Self { reader, columns })
    }

    /// Yields (1-based data row number, id, fields) in file order.
    fn rows(&mut self) -> impl Iterator<Item = Result<(usize, Vec<String>), CorpusError>> + '_ {
        self.reader.byte_records().enumerate().map(|(k, rec)| {
            let row = k + 1;
            let rec = rec.map_err(|e| csv_error(e, row))?;
            rec.iter()
                .map(|f| {
                    std::str::from_utf8(f)
                        .map(str::to_owned)
                        .map_err(|_| CorpusError::Encoding { row })
                })
                .collect::<Result<Vec<_>, _>>()
                .map(|fields| (row, fields))
        })
    }
}

fn csv_error(err: csv::Error, row: usize) -> CorpusError {
    match err.into_kind() {
        csv::ErrorKind::Io(e) => CorpusError::Io(e),
        csv::ErrorKind::Utf8 { .. } => CorpusError::Encoding { row },
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => CorpusError::MalformedRow {
            row,
            reason: format!("expected {expected_len} columns, found {len}"),
        },
        other => CorpusError::MalformedRow {
            row,
            reason: format!("{other:?}"),
        },
    }
}

fn row_id(columns: &Columns, fields: &[String], row: usize) -> String {
    match columns.id {
        Some(i) => fields[i].trim().to_owned(),
        None => format!("row-{}", row - 1),
    }
}

/// Parses a headered TSV/CSV table into a split.
///
/// Requires a `text` column, plus `label` when `has_labels` is set. With
/// `has_labels` unset a label column is still read if present, and empty
/// label cells become unlabeled examples. Without an `id` column, ids are
/// `row-<k>` for the 0-based data row index.
pub fn parse_dataset<R: Read>(source: R, opts: &ParseOptions) -> Result<DatasetSplit, CorpusError> {
    let mut table = Table::open(source, opts.format)?;
    let text_col = table.columns.text.ok_or(CorpusError::MissingColumn("text"))?;
    if opts.has_labels && table.columns.label.is_none() {
        return Err(CorpusError::MissingColumn("label"));
    }
    let label_col = table.columns.label;
    let mut examples = Vec::new();
    let mut seen = HashSet::new();
    let rows: Vec<_> = table.rows().collect();
    for item in rows {
        let (row, fields) = item?;
        let id = row_id(&table.columns, &fields, row);
        if id.is_empty() {
            return Err(CorpusError::MalformedRow {
                row,
                reason: "empty id".into(),
            });
        }
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId { row, id });
        }
        let text = fields[text_col].clone();
        if text.trim().is_empty() {
            return Err(CorpusError::MalformedRow {
                row,
                reason: "empty text".into(),
            });
        }
        let label = match label_col.map(|i| fields[i].trim()) {
            Some("") | None if opts.has_labels => {
                return Err(CorpusError::MalformedRow {
                    row,
                    reason: "missing label".into(),
                })
            }
            Some("") | None => None,
            Some(raw) => Some(map_label(raw).map_err(|e| CorpusError::MalformedRow {
                row,
                reason: e.to_string(),
            })?),
        };
        examples.push(LabeledExample { id, text, label });
    }
    DatasetSplit::new(opts.split, opts.language_tag.clone(), examples)
}

/// Reads `(id, label)` pairs from any headered table with a `label`
/// column, such as a gold file or a predictions file.
pub fn read_label_table<R: Read>(source: R, format: TableFormat) -> Result<Vec<(String, Label)>, CorpusError> {
    let mut table = Table::open(source, format)?;
    let label_col = table.columns.label.ok_or(CorpusError::MissingColumn("label"))?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let rows: Vec<_> = table.rows().collect();
    for item in rows {
        let (row, fields) = item?;
        let id = row_id(&table.columns, &fields, row);
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId { row, id });
        }
        let label = map_label(&fields[label_col]).map_err(|e| CorpusError::MalformedRow {
            row,
            reason: e.to_string(),
        })?;
        out.push((id, label));
    }
    Ok(out)
}

/// Label distribution of a split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub total: usize,
    pub per_label: BTreeMap<Label, usize>,
    pub unlabeled: usize,
}

impl DatasetStats {
    pub fn count(&self, label: Label) -> usize {
        self.per_label.get(&label).copied().unwrap_or(0)
    }
}

pub fn compute_stats(split: &DatasetSplit) -> DatasetStats {
    let mut per_label: BTreeMap<Label, usize> = Label::ALL.iter().map(|l| (*l, 0)).collect();
    let mut unlabeled = 0;
    for ex in split.examples() {
        match ex.label {
            Some(l) => *per_label.entry(l).or_default() += 1,
            None => unlabeled += 1,
        }
    }
    DatasetStats {
        total: split.len(),
        per_label,
        unlabeled,
    }
}

/// Knobs for [`synth_corpus`].
///
/// The lexicon (class keyword pools and shared filler) depends only on
/// `lexicon_seed`, so splits drawn with different sampling seeds share a
/// vocabulary and a model trained on one transfers to the other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthProfile {
    pub lexicon_seed: u64,
    pub keywords_per_class: usize,
    pub filler_words: usize,
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Probability that a non-anchor token is a class keyword.
    pub keyword_rate: f64,
    /// Fraction of lexicon words spelled in Tamil or Malayalam script.
    pub dravidian_rate: f64,
    pub url_rate: f64,
    pub punct_rate: f64,
    pub uppercase_rate: f64,
    pub language_tag: String,
}

impl Default for SynthProfile {
    fn default() -> Self {
        Self {
            lexicon_seed: 0,
            keywords_per_class: 24,
            filler_words: 60,
            min_tokens: 5,
            max_tokens: 12,
            keyword_rate: 0.25,
            dravidian_rate: 0.3,
            url_rate: 0.15,
            punct_rate: 0.2,
            uppercase_rate: 0.1,
            language_tag: "synthetic".into(),
        }
    }
}

const LATIN_ONSETS: &[&str] = &[
    "b", "ch", "d", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "y", "z",
];
const LATIN_VOWELS: &[&str] = &["a", "e", "i", "o", "u", "aa", "ai"];
const TAMIL_CONSONANTS: &[char] = &['க', 'ச', 'ட', 'த', 'ப', 'ம', 'ய', 'ர', 'ல', 'வ', 'ந', 'ன'];
const TAMIL_SIGNS: &[&str] = &["", "ா", "ி", "ு", "ெ", "ை", "்"];
const MALAYALAM_CONSONANTS: &[char] = &['ക', 'ച', 'ട', 'ത', 'പ', 'മ', 'യ', 'ര', 'ല', 'വ', 'ന'];
const MALAYALAM_SIGNS: &[&str] = &["", "ാ", "ി", "ു", "െ", "ം"];
const PUNCT: &[&str] = &["!", "!!", "?", "...", ",", "!?"];

fn pseudo_word(rng: &mut ChaCha8Rng, dravidian_rate: f64) -> String {
    let syllables = rng.gen_range(2..=3);
    let mut w = String::new();
    if rng.gen_bool(dravidian_rate.clamp(0.0, 1.0)) {
        let (cons, signs) = if rng.gen_bool(0.5) {
            (TAMIL_CONSONANTS, TAMIL_SIGNS)
        } else {
            (MALAYALAM_CONSONANTS, MALAYALAM_SIGNS)
        };
        for _ in 0..syllables {
            w.push(*cons.choose(rng).expect("non-empty"));
            w.push_str(signs.choose(rng).expect("non-empty"));
        }
    } else {
        for _ in 0..syllables {
            w.push_str(LATIN_ONSETS.choose(rng).expect("non-empty"));
            w.push_str(LATIN_VOWELS.choose(rng).expect("non-empty"));
        }
    }
    w
}

struct Lexicon {
    keywords: [Vec<String>; 2],
    filler: Vec<String>,
}

impl Lexicon {
    fn build(profile: &SynthProfile) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(profile.lexicon_seed);
        let mut used = HashSet::new();
        let mut draw = |n: usize, rng: &mut ChaCha8Rng| {
            let mut words = Vec::with_capacity(n);
            while words.len() < n {
                let w = pseudo_word(rng, profile.dravidian_rate);
                if used.insert(w.clone()) {
                    words.push(w);
                }
            }
            words
        };
        let non_abusive = draw(profile.keywords_per_class.max(1), &mut rng);
        let abusive = draw(profile.keywords_per_class.max(1), &mut rng);
        let filler = draw(profile.filler_words.max(1), &mut rng);
        Self {
            keywords: [non_abusive, abusive],
            filler,
        }
    }
}

fn synth_text(rng: &mut ChaCha8Rng, lexicon: &Lexicon, label: Label, p: &SynthProfile) -> String {
    let keywords = &lexicon.keywords[label.value() as usize];
    let len = rng.gen_range(p.min_tokens.max(1)..=p.max_tokens.max(p.min_tokens.max(1)));
    let anchor = rng.gen_range(0..len);
    let mut tokens = Vec::with_capacity(len + 1);
    for i in 0..len {
        let pool = if i == anchor || rng.gen_bool(p.keyword_rate.clamp(0.0, 1.0)) {
            keywords
        } else {
            &lexicon.filler
        };
        let mut tok = pool.choose(rng).expect("non-empty").clone();
        if rng.gen_bool(p.uppercase_rate.clamp(0.0, 1.0)) {
            tok = tok.to_uppercase();
        }
        if rng.gen_bool(p.punct_rate.clamp(0.0, 1.0)) {
            tok.push_str(PUNCT.choose(rng).expect("non-empty"));
        }
        tokens.push(tok);
    }
    if rng.gen_bool(p.url_rate.clamp(0.0, 1.0)) {
        let slug: String = (0..6)
            .map(|_| char::from(b"abcdefghijklmnopqrstuvwxyz0123456789"[rng.gen_range(0..36)]))
            .collect();
        let at = rng.gen_range(0..=tokens.len());
        tokens.insert(at, format!("https://t.co/{slug}"));
    }
    tokens.join(" ")
}

/// Generates a balanced, lexically separable training split.
///
/// Every text carries at least one keyword from its own class pool and
/// none from the other pool. The output is a pure function of the
/// arguments.
pub fn synth_corpus(seed: u64, n_per_class: usize, profile: &SynthProfile) -> DatasetSplit {
    let lexicon = Lexicon::build(profile);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<Label> = std::iter::repeat_n(Label::NonAbusive, n_per_class)
        .chain(std::iter::repeat_n(Label::Abusive, n_per_class))
        .collect();
    labels.shuffle(&mut rng);
    let examples = labels
        .into_iter()
        .enumerate()
        .map(|(k, label)| LabeledExample {
            id: format!("syn{seed}-{k}"),
            text: synth_text(&mut rng, &lexicon, label, profile),
            label: Some(label),
        })
        .collect();
    DatasetSplit::new(SplitName::Train, profile.language_tag.clone(), examples)
        .expect("synthetic ids are unique and labeled")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled(text: &str) -> DatasetSplit {
        parse_dataset(text.as_bytes(), &ParseOptions::default()).unwrap()
    }

    #[test]
    fn label_mapping() {
        assert_eq!(map_label("Abusive").unwrap(), Label::Abusive);
        assert_eq!(map_label("Non-Abusive").unwrap(), Label::NonAbusive);
        assert_eq!(map_label("  abusive ").unwrap(), Label::Abusive);
        assert_eq!(map_label("Non-abusive").unwrap(), Label::NonAbusive);
        assert_eq!(map_label("non abusive").unwrap(), Label::NonAbusive);
        assert_eq!(map_label("NON - ABUSIVE").unwrap(), Label::NonAbusive);
        match map_label("maybe") {
            Err(CorpusError::UnknownLabel(v)) => assert_eq!(v, "maybe"),
            other => panic!("unexpected {other:?}"),
        }
        for l in Label::ALL {
            assert_eq!(map_label(l.as_str()).unwrap(), l);
            assert_eq!(Label::from_value(l.value()), Some(l));
        }
        assert_eq!(Label::Abusive.value(), 1);
        assert_eq!(Label::NonAbusive.value(), 0);
    }

    #[test]
    fn parses_rows_in_order() {
        let s = labeled("id\ttext\tlabel\na\tfirst\tAbusive\nb\tsecond\tNon-Abusive\nc\tthird\tabusive\n");
        let ids: Vec<_> = s.examples().iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert_eq!(s.examples()[1].label, Some(Label::NonAbusive));
    }

    #[test]
    fn synthesizes_ids_without_id_column() {
        let s = labeled("text\tlabel\nx\tAbusive\ny\tAbusive\n");
        assert_eq!(s.examples()[0].id, "row-0");
        assert_eq!(s.examples()[1].id, "row-1");
    }

    #[test]
    fn csv_quoting_and_embedded_newlines() {
        let src = "id,text,label\n1,\"hello, world\",Abusive\n2,\"two\nlines\",Non-Abusive\n";
        let opts = ParseOptions {
            format: TableFormat::Csv,
            ..ParseOptions::default()
        };
        let s = parse_dataset(src.as_bytes(), &opts).unwrap();
        assert_eq!(s.examples()[0].text, "hello, world");
        assert_eq!(s.examples()[1].text, "two\nlines");
    }

    #[test]
    fn tsv_keeps_quotes_literal() {
        let s = labeled("id\ttext\tlabel\n1\tsay \"hi\", ok\tAbusive\n");
        assert_eq!(s.examples()[0].text, "say \"hi\", ok");
    }

    #[test]
    fn unknown_label_is_malformed_row() {
        let err = parse_dataset(
            "id\ttext\tlabel\na\tok\tAbusive\nb\tbad\tabusivee\n".as_bytes(),
            &ParseOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::MalformedRow { row: 2, .. }), "{err}");
    }

    #[test]
    fn wrong_column_count() {
        let err = parse_dataset("id\ttext\tlabel\na\tok\n".as_bytes(), &ParseOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::MalformedRow { row: 1, .. }), "{err}");
    }

    #[test]
    fn invalid_utf8() {
        let mut bytes = b"id\ttext\tlabel\na\t".to_vec();
        bytes.extend_from_slice(&[0xff, 0xfe]);
        bytes.extend_from_slice(b"\tAbusive\n");
        let err = parse_dataset(bytes.as_slice(), &ParseOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::Encoding { row: 1 }), "{err}");
    }

    #[test]
    fn duplicate_ids_rejected_duplicate_texts_allowed() {
        let ok = labeled("id\ttext\tlabel\na\tsame\tAbusive\nb\tsame\tAbusive\n");
        assert_eq!(ok.len(), 2);
        let err = parse_dataset(
            "id\ttext\tlabel\na\tx\tAbusive\na\ty\tAbusive\n".as_bytes(),
            &ParseOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId { row: 2, .. }));
    }

    #[test]
    fn missing_columns_and_labels() {
        let err = parse_dataset("id\tlabel\na\tAbusive\n".as_bytes(), &ParseOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::MissingColumn("text")));
        let err = parse_dataset("id\ttext\na\tx\n".as_bytes(), &ParseOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::MissingColumn("label")));
        let err = parse_dataset("id\ttext\tlabel\na\tx\t\n".as_bytes(), &ParseOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::MalformedRow { .. }));
        let err = parse_dataset("id\ttext\tlabel\na\t \tAbusive\n".as_bytes(), &ParseOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::MalformedRow { .. }));
    }

    #[test]
    fn unlabeled_test_split() {
        let opts = ParseOptions {
            has_labels: false,
            split: SplitName::Test,
            ..ParseOptions::default()
        };
        let s = parse_dataset("id\ttext\nq\thello\n".as_bytes(), &opts).unwrap();
        let stats = compute_stats(&s);
        assert_eq!((stats.total, stats.unlabeled), (1, 1));
        assert!(DatasetSplit::new(SplitName::Dev, "", s.examples().to_vec()).is_err());
    }

    #[test]
    fn empty_split_stats() {
        let s = DatasetSplit::new(SplitName::Train, "tamil", vec![]).unwrap();
        let stats = compute_stats(&s);
        assert_eq!(stats.total, 0);
        assert_eq!(stats.unlabeled, 0);
        assert_eq!(stats.count(Label::Abusive), 0);
        assert_eq!(stats.count(Label::NonAbusive), 0);
    }

    #[test]
    fn synth_is_deterministic_and_balanced() {
        let p = SynthProfile::default();
        let a = synth_corpus(7, 50, &p);
        let b = synth_corpus(7, 50, &p);
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        let stats = compute_stats(&a);
        assert_eq!(stats.count(Label::Abusive), 50);
        assert_eq!(stats.count(Label::NonAbusive), 50);
        let c = synth_corpus(8, 50, &p);
        assert_ne!(a.texts().collect::<Vec<_>>(), c.texts().collect::<Vec<_>>());
    }

    #[test]
    fn synth_round_trips_through_tsv() {
        let a = synth_corpus(3, 10, &SynthProfile::default());
        let mut buf = Vec::new();
        a.write_tsv(&mut buf).unwrap();
        let opts = ParseOptions {
            language_tag: "synthetic".into(),
            ..ParseOptions::default()
        };
        let b = parse_dataset(buf.as_slice(), &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn label_table_reads_predictions_layout() {
        let rows = read_label_table(
            "id\tprobability\tlabel\nx\t0.900000\tAbusive\ny\t0.100000\tNon-Abusive\n".as_bytes(),
            TableFormat::Tsv,
        )
        .unwrap();
        assert_eq!(
            rows,
            vec![("x".into(), Label::Abusive), ("y".into(), Label::NonAbusive)]
        );
    }
}
