//! Document ingestion and the time-binned binary-occurrence index.
//!
//! Every document contributes at most once to any term count: title and
//! abstract are tokenized, deduplicated, and counted per
//! (discipline, time bin) cell.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MIN_YEAR: i32 = 1000;
pub const MAX_YEAR: i32 = 3000;

/// Separates title tokens from abstract tokens in a stored sequence so
/// phrases never match across the boundary.
const FIELD_BREAK: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("duplicate document id '{0}'")]
    DuplicateId(String),
    #[error("unknown discipline '{0}'")]
    UnknownDiscipline(String),
    #[error("no time bin starts at {0}")]
    UnknownBin(i32),
    #[error("bin width must be at least 1 year, got {0}")]
    InvalidBinWidth(u32),
    #[error("query has no usable tokens: '{0}'")]
    EmptyQuery(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CorpusError {
    pub fn code(&self) -> &'static str {
        match self {
            CorpusError::MalformedRecord { .. } => "malformed_record",
            CorpusError::DuplicateId(_) => "duplicate_id",
            CorpusError::UnknownDiscipline(_) => "unknown_discipline",
            CorpusError::UnknownBin(_) => "unknown_bin",
            CorpusError::InvalidBinWidth(_) => "invalid_bin_width",
            CorpusError::EmptyQuery(_) => "empty_query",
            CorpusError::Io(_) => "io",
        }
    }
}

/// Split text into lowercase alphanumeric tokens.
///
/// Any character that is not a letter or digit separates tokens. Tokens of
/// a single character are dropped unless they are a digit. No stemming.
pub fn tokenize(text: &str) -> Vec<String> {
    // lowercase first: some case mappings emit combining marks
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|token| token.chars().count() >= 2 || token.chars().any(|c| c.is_numeric()))
        .map(str::to_string)
        .collect()
}

/// One bibliographic item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub id: String,
    pub discipline: String,
    pub year: i32,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
}

impl DocumentRecord {
    fn validate(&self, line: usize) -> Result<(), CorpusError> {
        let malformed = |reason: String| CorpusError::MalformedRecord { line, reason };
        if self.id.is_empty() {
            return Err(malformed("empty id".into()));
        }
        if self.discipline.trim().is_empty() {
            return Err(malformed("empty discipline".into()));
        }
        if !(MIN_YEAR..=MAX_YEAR).contains(&self.year) {
            return Err(malformed(format!(
                "year {} outside [{MIN_YEAR}, {MAX_YEAR}]",
                self.year
            )));
        }
        Ok(())
    }
}

const RECORD_FIELDS: [&str; 5] = ["id", "discipline", "year", "title", "abstract"];

fn parse_year(raw: &str, line: usize) -> Result<i32, CorpusError> {
    raw.trim()
        .parse::<i32>()
        .map_err(|_| CorpusError::MalformedRecord {
            line,
            reason: format!("unparsable year '{raw}'"),
        })
}

/// Parse one JSON-lines object. `line` is 1-based and only used in errors.
pub fn parse_json_record(text: &str, line: usize) -> Result<DocumentRecord, CorpusError> {
    let malformed = |reason: String| CorpusError::MalformedRecord { line, reason };
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| malformed(format!("invalid json: {e}")))?;
    let object = value
        .as_object()
        .ok_or_else(|| malformed("expected a json object".into()))?;
    if let Some(extra) = object.keys().find(|k| !RECORD_FIELDS.contains(&k.as_str())) {
        return Err(malformed(format!("unexpected field '{extra}'")));
    }
    let text_field = |name: &str| -> Result<String, CorpusError> {
        match object.get(name) {
            Some(serde_json::Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(malformed(format!("field '{name}' must be a string"))),
            None => Err(malformed(format!("missing field '{name}'"))),
        }
    };
    let year = match object.get("year") {
        Some(serde_json::Value::Number(n)) => n
            .as_i64()
            .and_then(|y| i32::try_from(y).ok())
            .ok_or_else(|| malformed(format!("unparsable year '{n}'")))?,
        Some(serde_json::Value::String(s)) => parse_year(s, line)?,
        Some(other) => return Err(malformed(format!("unparsable year '{other}'"))),
        None => return Err(malformed("missing field 'year'".into())),
    };
    let record = DocumentRecord {
        id: text_field("id")?,
        discipline: text_field("discipline")?,
        year,
        title: text_field("title")?,
        abstract_text: text_field("abstract")?,
    };
    record.validate(line)?;
    Ok(record)
}

/// Iterate JSON-lines records; blank lines are skipped.
pub fn read_jsonl<R: BufRead>(
    reader: R,
) -> impl Iterator<Item = Result<DocumentRecord, CorpusError>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Ok(text) if text.trim().is_empty() => None,
            Ok(text) => Some(parse_json_record(&text, i + 1)),
            Err(e) => Some(Err(CorpusError::Io(e))),
        })
}

/// Read RFC-4180 CSV with the header `id,discipline,year,title,abstract`
/// (any column order).
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<DocumentRecord>, CorpusError> {
    let mut csv_reader = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| CorpusError::MalformedRecord {
            line: 1,
            reason: format!("bad header: {e}"),
        })?
        .clone();
    let mut columns = [usize::MAX; 5];
    for (pos, name) in headers.iter().enumerate() {
        match RECORD_FIELDS.iter().position(|f| *f == name.trim()) {
            Some(slot) => columns[slot] = pos,
            None => {
                return Err(CorpusError::MalformedRecord {
                    line: 1,
                    reason: format!("unexpected column '{name}'"),
                })
            }
        }
    }
    if let Some(slot) = columns.iter().position(|&c| c == usize::MAX) {
        return Err(CorpusError::MalformedRecord {
            line: 1,
            reason: format!("missing column '{}'", RECORD_FIELDS[slot]),
        });
    }
    let mut records = Vec::new();
    for (i, row) in csv_reader.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| CorpusError::MalformedRecord {
            line,
            reason: e.to_string(),
        })?;
        let field = |slot: usize| row.get(columns[slot]).unwrap_or("").to_string();
        let record = DocumentRecord {
            id: field(0),
            discipline: field(1),
            year: parse_year(&field(2), line)?,
            title: field(3),
            abstract_text: field(4),
        };
        record.validate(line)?;
        records.push(record);
    }
    Ok(records)
}

/// Write records as JSON lines in canonical field order.
pub fn write_jsonl<'a, W: Write>(
    records: impl IntoIterator<Item = &'a DocumentRecord>,
    mut writer: W,
) -> std::io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut writer, record)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputFormat {
    Jsonl,
    Csv,
}

impl InputFormat {
    /// `.csv` selects CSV, anything else JSON-lines.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => InputFormat::Jsonl,
        }
    }
}

/// A half-open span of calendar years `[start_year, start_year + width_years)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TimeBin {
    pub start_year: i32,
    pub width_years: u32,
}

impl TimeBin {
    pub fn end_year(&self) -> i32 {
        self.start_year + self.width_years as i32
    }

    pub fn contains(&self, year: i32) -> bool {
        year >= self.start_year && year < self.end_year()
    }
}

impl fmt::Display for TimeBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start_year, self.end_year() - 1)
    }
}

/// How years are grouped into bins.
///
/// Without an explicit anchor the grid is aligned on multiples of the width
/// (even years for two-year bins), so a corpus starting in 1974 gets bins
/// 1974-1975, 1976-1977, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinScheme {
    pub width_years: u32,
    pub anchor: Option<i32>,
}

impl Default for BinScheme {
    fn default() -> Self {
        BinScheme {
            width_years: 2,
            anchor: None,
        }
    }
}

impl BinScheme {
    pub fn new(width_years: u32) -> Result<Self, CorpusError> {
        if width_years == 0 {
            return Err(CorpusError::InvalidBinWidth(width_years));
        }
        Ok(BinScheme {
            width_years,
            anchor: None,
        })
    }

    pub fn with_anchor(mut self, anchor: i32) -> Self {
        self.anchor = Some(anchor);
        self
    }

    fn origin(&self) -> i32 {
        self.anchor.unwrap_or(0)
    }

    /// Start year of the bin holding `year`.
    pub fn bin_start(&self, year: i32) -> i32 {
        let width = self.width_years as i32;
        let origin = self.origin();
        origin + (year - origin).div_euclid(width) * width
    }
}

/// A target term (single token or adjacent phrase) plus tokens that must
/// also appear somewhere in the same document.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TermQuery {
    pub term: Vec<String>,
    pub required_coterms: BTreeSet<String>,
}

impl TermQuery {
    /// Build a query by running `term` and each co-term through [`tokenize`].
    pub fn new<S: AsRef<str>>(term: &str, coterms: &[S]) -> Result<Self, CorpusError> {
        let tokens = tokenize(term);
        if tokens.is_empty() {
            return Err(CorpusError::EmptyQuery(term.to_string()));
        }
        let mut required = BTreeSet::new();
        for coterm in coterms {
            let pieces = tokenize(coterm.as_ref());
            if pieces.is_empty() {
                return Err(CorpusError::EmptyQuery(coterm.as_ref().to_string()));
            }
            required.extend(pieces);
        }
        Ok(TermQuery {
            term: tokens,
            required_coterms: required,
        })
    }

    pub fn single(term: &str) -> Result<Self, CorpusError> {
        Self::new::<&str>(term, &[])
    }
}

impl fmt::Display for TermQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.term.join(" "))?;
        for coterm in &self.required_coterms {
            write!(f, " +{coterm}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct PendingDoc {
    id: String,
    discipline: String,
    year: i32,
    // local vocabulary ids, FIELD_BREAK between title and abstract
    tokens: Vec<u32>,
}

/// Accumulates documents before binning. Builders for disjoint partitions
/// of a stream can be filled independently and merged.
#[derive(Debug, Default, Clone)]
pub struct IndexBuilder {
    vocab: Vec<String>,
    lookup: HashMap<String, u32>,
    docs: Vec<PendingDoc>,
    ids: HashSet<String>,
}

impl IndexBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    fn intern(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.lookup.get(token) {
            return id;
        }
        let id = self.vocab.len() as u32;
        self.vocab.push(token.to_string());
        self.lookup.insert(token.to_string(), id);
        id
    }

    pub fn add(&mut self, record: DocumentRecord) -> Result<(), CorpusError> {
        record.validate(0)?;
        if !self.ids.insert(record.id.clone()) {
            return Err(CorpusError::DuplicateId(record.id));
        }
        let mut tokens = Vec::new();
        for token in tokenize(&record.title) {
            tokens.push(self.intern(&token));
        }
        tokens.push(FIELD_BREAK);
        for token in tokenize(&record.abstract_text) {
            tokens.push(self.intern(&token));
        }
        self.docs.push(PendingDoc {
            id: record.id,
            discipline: record.discipline,
            year: record.year,
            tokens,
        });
        Ok(())
    }

    /// Absorb another partition. Ids must be disjoint across partitions.
    pub fn merge(mut self, other: IndexBuilder) -> Result<Self, CorpusError> {
        let remap: Vec<u32> = other.vocab.iter().map(|t| self.intern(t)).collect();
        for mut doc in other.docs {
            if !self.ids.insert(doc.id.clone()) {
                return Err(CorpusError::DuplicateId(doc.id));
            }
            for token in doc.tokens.iter_mut() {
                if *token != FIELD_BREAK {
                    *token = remap[*token as usize];
                }
            }
            self.docs.push(doc);
        }
        Ok(self)
    }

    pub fn build(self, scheme: BinScheme) -> Result<CorpusIndex, CorpusError> {
        if scheme.width_years == 0 {
            return Err(CorpusError::InvalidBinWidth(0));
        }
        let IndexBuilder {
            vocab: local_vocab,
            mut docs,
            ..
        } = self;

        // canonical vocabulary: lexicographic
        let mut order: Vec<u32> = (0..local_vocab.len() as u32).collect();
        order.sort_by(|&a, &b| local_vocab[a as usize].cmp(&local_vocab[b as usize]));
        let mut remap = vec![0u32; local_vocab.len()];
        for (new_id, &old_id) in order.iter().enumerate() {
            remap[old_id as usize] = new_id as u32;
        }
        let vocabulary: Vec<String> = order
            .iter()
            .map(|&old| local_vocab[old as usize].clone())
            .collect();
        let lookup: HashMap<String, u32> = vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();

        // canonical document order: discipline, year, id
        docs.sort_by(|a, b| {
            (&a.discipline, a.year, &a.id).cmp(&(&b.discipline, b.year, &b.id))
        });

        let mut disciplines: Vec<String> = docs.iter().map(|d| d.discipline.clone()).collect();
        disciplines.dedup();

        let scheme = match scheme.anchor {
            Some(_) => scheme,
            None => scheme.with_anchor(0),
        };
        let bins: Vec<TimeBin> = match (docs.iter().map(|d| d.year).min(), docs.iter().map(|d| d.year).max()) {
            (Some(lo), Some(hi)) => {
                let first = scheme.bin_start(lo);
                let last = scheme.bin_start(hi);
                (first..=last)
                    .step_by(scheme.width_years as usize)
                    .map(|start_year| TimeBin {
                        start_year,
                        width_years: scheme.width_years,
                    })
                    .collect()
            }
            _ => Vec::new(),
        };
        let width = scheme.width_years as i32;
        let first_start = bins.first().map(|b| b.start_year).unwrap_or(0);
        let n_bins = bins.len();

        let mut doc_counts = vec![0u32; disciplines.len() * n_bins];
        let mut discipline_ranges = Vec::with_capacity(disciplines.len());
        let mut term_docs: Vec<Vec<u32>> = vec![Vec::new(); vocabulary.len()];
        let mut stored = Vec::with_capacity(docs.len());
        let mut discipline = 0usize;
        let mut range_start = 0usize;
        for (doc_index, doc) in docs.into_iter().enumerate() {
            while disciplines[discipline] != doc.discipline {
                discipline_ranges.push(range_start..doc_index);
                range_start = doc_index;
                discipline += 1;
            }
            let bin = ((scheme.bin_start(doc.year) - first_start) / width) as usize;
            doc_counts[discipline * n_bins + bin] += 1;
            let sequence: Vec<u32> = doc
                .tokens
                .iter()
                .map(|&t| if t == FIELD_BREAK { t } else { remap[t as usize] })
                .collect();
            let mut set: Vec<u32> = sequence.iter().copied().filter(|&t| t != FIELD_BREAK).collect();
            set.sort_unstable();
            set.dedup();
            for &term in &set {
                term_docs[term as usize].push(doc_index as u32);
            }
            stored.push(IndexedDoc {
                id: doc.id,
                discipline: discipline as u32,
                year: doc.year,
                bin: bin as u32,
                sequence,
                set,
            });
        }
        if !stored.is_empty() {
            discipline_ranges.push(range_start..stored.len());
        }

        let postings = term_docs
            .iter()
            .map(|list| {
                let mut cells: Vec<(u32, u32)> = Vec::new();
                for &doc in list {
                    let d = &stored[doc as usize];
                    let cell = d.discipline * n_bins as u32 + d.bin;
                    match cells.last_mut() {
                        Some((c, count)) if *c == cell => *count += 1,
                        _ => cells.push((cell, 1)),
                    }
                }
                cells
            })
            .collect();

        Ok(CorpusIndex {
            scheme,
            disciplines,
            bins,
            doc_counts,
            vocabulary,
            lookup,
            postings,
            term_docs,
            docs: stored,
            discipline_ranges,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct IndexedDoc {
    id: String,
    discipline: u32,
    year: i32,
    bin: u32,
    sequence: Vec<u32>,
    set: Vec<u32>,
}

impl IndexedDoc {
    fn contains(&self, term: u32) -> bool {
        self.set.binary_search(&term).is_ok()
    }

    fn contains_phrase(&self, phrase: &[u32]) -> bool {
        phrase.len() <= 1 || self.sequence.windows(phrase.len()).any(|w| w == phrase)
    }
}

/// Immutable per-discipline, per-bin occurrence index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusIndex {
    scheme: BinScheme,
    disciplines: Vec<String>,
    bins: Vec<TimeBin>,
    // disciplines x bins, row-major
    doc_counts: Vec<u32>,
    vocabulary: Vec<String>,
    lookup: HashMap<String, u32>,
    // term -> (cell, distinct documents) sorted by cell
    postings: Vec<Vec<(u32, u32)>>,
    // term -> sorted document indices
    term_docs: Vec<Vec<u32>>,
    docs: Vec<IndexedDoc>,
    discipline_ranges: Vec<std::ops::Range<usize>>,
}

/// Ingest a record stream in one pass.
pub fn ingest<I>(records: I, scheme: BinScheme) -> Result<CorpusIndex, CorpusError>
where
    I: IntoIterator<Item = Result<DocumentRecord, CorpusError>>,
{
    let mut builder = IndexBuilder::new();
    for record in records {
        builder.add(record?)?;
    }
    builder.build(scheme)
}

/// Load a corpus file, choosing the parser from `format` or the extension.
/// `-` reads JSON-lines (or CSV) from standard input.
pub fn load_corpus(
    path: &Path,
    format: Option<InputFormat>,
    scheme: BinScheme,
) -> Result<CorpusIndex, CorpusError> {
    let format = format.unwrap_or_else(|| InputFormat::from_path(path));
    let reader: Box<dyn BufRead> = if path.as_os_str() == "-" {
        Box::new(std::io::BufReader::new(std::io::stdin()))
    } else {
        Box::new(std::io::BufReader::new(std::fs::File::open(path)?))
    };
    match format {
        InputFormat::Jsonl => ingest(read_jsonl(reader), scheme),
        InputFormat::Csv => ingest(read_csv(reader)?.into_iter().map(Ok), scheme),
    }
}

impl CorpusIndex {
    pub fn scheme(&self) -> BinScheme {
        self.scheme
    }

    pub fn disciplines(&self) -> &[String] {
        &self.disciplines
    }

    pub fn bins(&self) -> &[TimeBin] {
        &self.bins
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn total_documents(&self) -> usize {
        self.docs.len()
    }

    pub fn discipline_index(&self, discipline: &str) -> Result<usize, CorpusError> {
        self.disciplines
            .binary_search_by(|d| d.as_str().cmp(discipline))
            .map_err(|_| CorpusError::UnknownDiscipline(discipline.to_string()))
    }

    pub fn bin_index(&self, start_year: i32) -> Result<usize, CorpusError> {
        self.bins
            .binary_search_by(|b| b.start_year.cmp(&start_year))
            .map_err(|_| CorpusError::UnknownBin(start_year))
    }

    pub fn term_id(&self, token: &str) -> Option<u32> {
        self.lookup.get(token).copied()
    }

    /// Documents in one (discipline, bin) cell.
    pub fn doc_count(&self, discipline: &str, bin_start: i32) -> Result<u32, CorpusError> {
        let d = self.discipline_index(discipline)?;
        let b = self.bin_index(bin_start)?;
        Ok(self.doc_counts[d * self.bins.len() + b])
    }

    /// Documents per bin for one discipline.
    pub fn doc_counts_for(&self, discipline: &str) -> Result<Vec<u32>, CorpusError> {
        let d = self.discipline_index(discipline)?;
        Ok(self.row(d).to_vec())
    }

    fn row(&self, discipline: usize) -> &[u32] {
        let n = self.bins.len();
        &self.doc_counts[discipline * n..(discipline + 1) * n]
    }

    /// Documents in a whole discipline.
    pub fn discipline_size(&self, discipline: usize) -> u64 {
        self.row(discipline).iter().map(|&c| c as u64).sum()
    }

    /// Distinct documents containing `term_id`, summed per discipline.
    pub fn term_discipline_counts(&self, term_id: u32) -> Vec<u64> {
        let n_bins = self.bins.len().max(1) as u32;
        let mut counts = vec![0u64; self.disciplines.len()];
        for &(cell, count) in &self.postings[term_id as usize] {
            counts[(cell / n_bins) as usize] += count as u64;
        }
        counts
    }

    /// Distinct documents containing a single token in one cell.
    pub fn term_cell_count(&self, token: &str, discipline: &str, bin_start: i32) -> Result<u32, CorpusError> {
        let d = self.discipline_index(discipline)?;
        let b = self.bin_index(bin_start)?;
        let cell = (d * self.bins.len() + b) as u32;
        Ok(self
            .term_id(token)
            .and_then(|id| {
                let cells = &self.postings[id as usize];
                cells
                    .binary_search_by(|(c, _)| c.cmp(&cell))
                    .ok()
                    .map(|i| cells[i].1)
            })
            .unwrap_or(0))
    }

    /// Number of distinct documents in the cell matching `query`.
    pub fn count_matches(
        &self,
        query: &TermQuery,
        discipline: &str,
        bin_start: i32,
    ) -> Result<u32, CorpusError> {
        let b = self.bin_index(bin_start)?;
        Ok(self.match_counts(query, discipline)?[b])
    }

    /// Matching-document counts for every bin of one discipline.
    pub fn match_counts(&self, query: &TermQuery, discipline: &str) -> Result<Vec<u32>, CorpusError> {
        let d = self.discipline_index(discipline)?;
        let mut counts = vec![0u32; self.bins.len()];
        for doc in self.matching_docs(query, d) {
            counts[self.docs[doc].bin as usize] += 1;
        }
        Ok(counts)
    }

    fn matching_docs(&self, query: &TermQuery, discipline: usize) -> Vec<usize> {
        let resolve = |tokens: &mut dyn Iterator<Item = &String>| -> Option<Vec<u32>> {
            tokens.map(|t| self.term_id(t)).collect()
        };
        let Some(phrase) = resolve(&mut query.term.iter()) else {
            return Vec::new();
        };
        let Some(coterms) = resolve(&mut query.required_coterms.iter()) else {
            return Vec::new();
        };
        let Some(range) = self.discipline_ranges.get(discipline) else {
            return Vec::new();
        };
        let required: Vec<u32> = phrase.iter().chain(coterms.iter()).copied().collect();
        let rarest = *required
            .iter()
            .min_by_key(|&&t| self.term_docs[t as usize].len())
            .expect("query has at least one token");
        let candidates = &self.term_docs[rarest as usize];
        let lo = candidates.partition_point(|&doc| (doc as usize) < range.start);
        let hi = candidates.partition_point(|&doc| (doc as usize) < range.end);
        candidates[lo..hi]
            .iter()
            .map(|&doc| doc as usize)
            .filter(|&doc| {
                let d = &self.docs[doc];
                required.iter().all(|&t| d.contains(t)) && d.contains_phrase(&phrase)
            })
            .collect()
    }

    /// Document ids in one cell, in canonical order.
    pub fn cell_document_ids(&self, discipline: &str, bin_start: i32) -> Result<Vec<&str>, CorpusError> {
        let d = self.discipline_index(discipline)?;
        let b = self.bin_index(bin_start)? as u32;
        Ok(self.docs[self.discipline_ranges[d].clone()]
            .iter()
            .filter(|doc| doc.bin == b)
            .map(|doc| doc.id.as_str())
            .collect())
    }
}
