//! Seeded synthetic corpora with known concept-injection ground truth.
//!
//! Each discipline emits `docs_per_bin` documents per time bin. Background
//! text is drawn from a power-law vocabulary of pseudo-words, so a few
//! "the"-like words appear in nearly every document. Injected terms appear
//! with a per-bin probability that follows the normalized logistic
//! adoption curve from their onset year, optionally decaying after a
//! decline year.

use std::collections::{BTreeSet, HashSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{tokenize, BinScheme, DocumentRecord, MAX_YEAR, MIN_YEAR};
use crate::diffusion::DiffusionParams;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
}

impl SynthError {
    pub fn code(&self) -> &'static str {
        match self {
            SynthError::InvalidSpec(_) => "invalid_spec",
        }
    }
}

fn default_bin_width() -> u32 {
    2
}

fn default_doc_length() -> usize {
    30
}

fn default_title_length() -> usize {
    6
}

fn default_saturation() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackgroundVocabulary {
    pub size: usize,
    /// weight of rank r is (r + 1)^-exponent
    pub exponent: f64,
}

impl Default for BackgroundVocabulary {
    fn default() -> Self {
        BackgroundVocabulary {
            size: 2000,
            exponent: 1.0,
        }
    }
}

/// Exponential fall-off of an injected term's probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decline {
    pub start_year: i32,
    /// per year
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Injection {
    /// free text inserted verbatim into the abstract
    pub term: String,
    pub onset_year: i32,
    /// logistic adoption from onset; constant probability when absent
    #[serde(default)]
    pub diffusion: Option<DiffusionParams>,
    /// probability ceiling reached when adoption saturates
    #[serde(default = "default_saturation")]
    pub saturation: f64,
    #[serde(default)]
    pub decline: Option<Decline>,
}

impl Injection {
    /// Probability that a document in a bin starting at `year` carries the term.
    pub fn probability_at(&self, year: i32) -> f64 {
        if year < self.onset_year {
            return 0.0;
        }
        let t = (year - self.onset_year) as f64;
        let adoption = self.diffusion.map_or(1.0, |d| d.at(t) / d.p_m);
        let decay = match self.decline {
            Some(decline) if year > decline.start_year => {
                (-decline.rate * (year - decline.start_year) as f64).exp()
            }
            _ => 1.0,
        };
        self.saturation * adoption * decay
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisciplineSpec {
    pub label: String,
    pub docs_per_bin: usize,
    /// onset of the scenario's injected query in this discipline
    #[serde(default)]
    pub onset_year: Option<i32>,
    #[serde(default)]
    pub diffusion: Option<DiffusionParams>,
    #[serde(default = "default_saturation")]
    pub saturation: f64,
    /// further terms, e.g. predecessors and successors
    #[serde(default)]
    pub injections: Vec<Injection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    /// inclusive [first, last] publication years
    pub year_range: (i32, i32),
    #[serde(default = "default_bin_width")]
    pub bin_width: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub injected_query: Option<String>,
    #[serde(default = "default_doc_length")]
    pub doc_length: usize,
    #[serde(default = "default_title_length")]
    pub title_length: usize,
    #[serde(default)]
    pub background: BackgroundVocabulary,
    pub disciplines: Vec<DisciplineSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionTruth {
    pub discipline: String,
    pub term: String,
    pub onset_year: i32,
    /// first bin whose probability is non-zero
    pub onset_bin_start: i32,
    /// absolute year where adoption reaches half of its ceiling
    pub inflection_time: Option<f64>,
    pub inflection_bin_start: Option<i32>,
    pub growth_constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossoverTruth {
    pub discipline: String,
    pub old_term: String,
    pub new_term: String,
    /// first transition where the successor's rate is defined
    pub bin_start: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub bin_starts: Vec<i32>,
    pub injected_query: Option<String>,
    pub injections: Vec<InjectionTruth>,
    /// earliest onset of the injected query
    pub donor: Option<String>,
    pub crossovers: Vec<CrossoverTruth>,
}

impl GroundTruth {
    pub fn injection(&self, discipline: &str, term: &str) -> Option<&InjectionTruth> {
        self.injections
            .iter()
            .find(|i| i.discipline == discipline && i.term == term)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub documents: Vec<DocumentRecord>,
    pub truth: GroundTruth,
}

fn invalid(reason: impl Into<String>) -> SynthError {
    SynthError::InvalidSpec(reason.into())
}

impl ScenarioSpec {
    pub fn scheme(&self) -> BinScheme {
        BinScheme {
            width_years: self.bin_width,
            anchor: None,
        }
    }

    /// Bin start years covering the year range.
    pub fn bin_starts(&self) -> Vec<i32> {
        let scheme = self.scheme().with_anchor(0);
        let first = scheme.bin_start(self.year_range.0);
        let last = scheme.bin_start(self.year_range.1);
        (first..=last).step_by(self.bin_width.max(1) as usize).collect()
    }

    /// All injections per discipline, the injected query first.
    pub fn injections(&self, discipline: &DisciplineSpec) -> Vec<Injection> {
        let mut all = Vec::new();
        if let (Some(query), Some(onset)) = (&self.injected_query, discipline.onset_year) {
            all.push(Injection {
                term: query.clone(),
                onset_year: onset,
                diffusion: discipline.diffusion,
                saturation: discipline.saturation,
                decline: None,
            });
        }
        all.extend(discipline.injections.iter().cloned());
        all
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let (first, last) = self.year_range;
        if !(MIN_YEAR..=MAX_YEAR).contains(&first) || !(MIN_YEAR..=MAX_YEAR).contains(&last) || first > last {
            return Err(invalid(format!("year_range {first}..{last}")));
        }
        if self.bin_width == 0 {
            return Err(invalid("bin_width must be at least 1"));
        }
        if self.doc_length == 0 || self.title_length > self.doc_length {
            return Err(invalid("doc_length must be positive and at least title_length"));
        }
        if self.background.size == 0 || !self.background.exponent.is_finite() || self.background.exponent < 0.0 {
            return Err(invalid("background vocabulary needs a positive size and finite exponent"));
        }
        if self.disciplines.is_empty() {
            return Err(invalid("no disciplines"));
        }
        if let Some(query) = &self.injected_query {
            if tokenize(query).is_empty() {
                return Err(invalid("injected_query has no tokens"));
            }
        }
        let mut labels = HashSet::new();
        for d in &self.disciplines {
            if d.label.trim().is_empty() || !labels.insert(d.label.as_str()) {
                return Err(invalid(format!("discipline label '{}' empty or repeated", d.label)));
            }
            if d.docs_per_bin == 0 {
                return Err(invalid(format!("{}: docs_per_bin must be positive", d.label)));
            }
            if d.onset_year.is_some() && self.injected_query.is_none() {
                return Err(invalid(format!("{}: onset_year without injected_query", d.label)));
            }
            for injection in self.injections(d) {
                if !(first..=last).contains(&injection.onset_year) {
                    return Err(invalid(format!(
                        "{}: onset {} outside year_range",
                        d.label, injection.onset_year
                    )));
                }
                if !(injection.saturation > 0.0 && injection.saturation <= 1.0) {
                    return Err(invalid(format!("{}: saturation must be in (0, 1]", d.label)));
                }
                if let Some(params) = injection.diffusion {
                    params.validate().map_err(|e| invalid(format!("{}: {e}", d.label)))?;
                }
                if let Some(decline) = injection.decline {
                    if !(decline.rate.is_finite() && decline.rate >= 0.0) {
                        return Err(invalid(format!("{}: decline rate must be non-negative", d.label)));
                    }
                }
                if tokenize(&injection.term).is_empty() {
                    return Err(invalid(format!("{}: injected term has no tokens", d.label)));
                }
            }
        }
        Ok(())
    }

    fn truth(&self) -> GroundTruth {
        let starts = self.bin_starts();
        let scheme = self.scheme().with_anchor(0);
        let first_bin_from = |year: i32| starts.iter().copied().find(|&s| s >= year);
        let mut injections = Vec::new();
        let mut crossovers = Vec::new();
        for d in &self.disciplines {
            let all = self.injections(d);
            for injection in &all {
                let inflection = injection
                    .diffusion
                    .map(|p| injection.onset_year as f64 + p.inflection_time());
                injections.push(InjectionTruth {
                    discipline: d.label.clone(),
                    term: injection.term.clone(),
                    onset_year: injection.onset_year,
                    onset_bin_start: first_bin_from(injection.onset_year).unwrap_or(injection.onset_year),
                    inflection_time: inflection,
                    inflection_bin_start: inflection.map(|t| scheme.bin_start(t.floor() as i32)),
                    growth_constant: injection.diffusion.map(|p| p.c),
                });
            }
            for old in &all {
                let Some(decline) = old.decline else { continue };
                for new in &all {
                    if new.term != old.term && new.onset_year == decline.start_year {
                        if let Some(onset_bin) = first_bin_from(new.onset_year) {
                            crossovers.push(CrossoverTruth {
                                discipline: d.label.clone(),
                                old_term: old.term.clone(),
                                new_term: new.term.clone(),
                                bin_start: onset_bin + self.bin_width as i32,
                            });
                        }
                    }
                }
            }
        }
        let donor = self
            .injected_query
            .as_ref()
            .and_then(|_| {
                self.disciplines
                    .iter()
                    .filter_map(|d| d.onset_year.map(|onset| (onset, d)))
                    .min_by(|(oa, a), (ob, b)| {
                        let ca = a.diffusion.map_or(0.0, |p| p.c);
                        let cb = b.diffusion.map_or(0.0, |p| p.c);
                        oa.cmp(ob).then(cb.total_cmp(&ca)).then_with(|| a.label.cmp(&b.label))
                    })
            })
            .map(|(_, d)| d.label.clone());
        GroundTruth {
            seed: self.seed,
            bin_starts: starts,
            injected_query: self.injected_query.clone(),
            injections,
            donor,
            crossovers,
        }
    }
}

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

fn syllable(i: usize) -> [u8; 2] {
    [CONSONANTS[i % CONSONANTS.len()], VOWELS[(i / CONSONANTS.len()) % VOWELS.len()]]
}

/// Pronounceable pseudo-word for a vocabulary rank.
fn pseudo_word(rank: usize) -> String {
    let base = CONSONANTS.len() * VOWELS.len();
    let mut word = Vec::new();
    let mut rest = rank;
    loop {
        word.extend_from_slice(&syllable(rest % base));
        rest /= base;
        if rest == 0 {
            break;
        }
    }
    if word.len() < 4 {
        // at least two syllables
        word.extend_from_slice(&syllable(0));
    }
    String::from_utf8(word).expect("ascii")
}

/// Background vocabulary avoiding every injected token.
fn background_words(size: usize, reserved: &BTreeSet<String>) -> Vec<String> {
    let mut words = Vec::with_capacity(size);
    let mut seen = HashSet::new();
    let mut rank = 0;
    while words.len() < size {
        let word = pseudo_word(rank);
        rank += 1;
        if !reserved.contains(&word) && seen.insert(word.clone()) {
            words.push(word);
        }
    }
    words
}

/// SplitMix64 finalizer, for per-discipline sub-seeds.
fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generate documents and ground truth. Output depends only on `spec`.
pub fn generate(spec: &ScenarioSpec) -> Result<Scenario, SynthError> {
    spec.validate()?;
    let reserved: BTreeSet<String> = spec
        .disciplines
        .iter()
        .flat_map(|d| spec.injections(d))
        .flat_map(|i| tokenize(&i.term))
        .collect();
    let words = background_words(spec.background.size, &reserved);
    let weights: Vec<f64> = (0..words.len())
        .map(|r| (r as f64 + 1.0).powf(-spec.background.exponent))
        .collect();
    let sampler = WeightedIndex::new(&weights).map_err(|e| invalid(e.to_string()))?;
    let starts = spec.bin_starts();
    let (first_year, last_year) = spec.year_range;

    let mut documents = Vec::new();
    for (d_index, discipline) in spec.disciplines.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, d_index as u64));
        let injections = spec.injections(discipline);
        for &start in &starts {
            let years: Vec<i32> = (start..start + spec.bin_width as i32)
                .filter(|y| (first_year..=last_year).contains(y))
                .collect();
            let probabilities: Vec<f64> = injections.iter().map(|i| i.probability_at(start)).collect();
            for i in 0..discipline.docs_per_bin {
                let year = years[i % years.len()];
                let mut tokens: Vec<&str> = (0..spec.doc_length)
                    .map(|_| words[sampler.sample(&mut rng)].as_str())
                    .collect();
                let abstract_tokens = tokens.split_off(spec.title_length);
                let mut abstract_parts: Vec<&str> = abstract_tokens;
                for (injection, &p) in injections.iter().zip(&probabilities) {
                    if p > 0.0 && rng.random::<f64>() < p {
                        let at = rng.random_range(0..=abstract_parts.len());
                        abstract_parts.insert(at, injection.term.as_str());
                    }
                }
                documents.push(DocumentRecord {
                    id: format!("{}-{}-{:06}", discipline.label, start, i),
                    discipline: discipline.label.clone(),
                    year,
                    title: tokens.join(" "),
                    abstract_text: abstract_parts.join(" "),
                });
            }
        }
    }
    Ok(Scenario {
        documents,
        truth: spec.truth(),
    })
}

/// Ready-made scenarios mirroring the migration and succession patterns
/// the toolkit is meant to detect.
pub mod presets {
    use super::*;

    /// Donor/borrower pair for one term. The borrower adopts later and
    /// picks the term up part-way established, so its log growth starts
    /// lower than the donor's.
    pub fn migration(term: &str, donor_onset: i32, borrower_onset: i32, seed: u64) -> ScenarioSpec {
        ScenarioSpec {
            year_range: (1974, 1995),
            bin_width: 2,
            seed,
            injected_query: Some(term.to_string()),
            doc_length: 30,
            title_length: 6,
            background: BackgroundVocabulary::default(),
            disciplines: vec![
                DisciplineSpec {
                    label: "mathematics".into(),
                    docs_per_bin: 500,
                    onset_year: Some(donor_onset),
                    diffusion: Some(DiffusionParams { c: 0.6, p_m: 1000.0, p_0: 100.0 }),
                    saturation: 0.5,
                    injections: Vec::new(),
                },
                DisciplineSpec {
                    label: "education".into(),
                    docs_per_bin: 500,
                    onset_year: Some(borrower_onset),
                    diffusion: Some(DiffusionParams { c: 0.5, p_m: 1000.0, p_0: 300.0 }),
                    saturation: 0.5,
                    injections: Vec::new(),
                },
            ],
        }
    }

    /// "chaos": mathematics 1978, education 1988.
    pub fn chaos(seed: u64) -> ScenarioSpec {
        migration("chaos", 1978, 1988, seed)
    }

    /// "nonlinear": mathematics 1978, economics 1982.
    pub fn nonlinear(seed: u64) -> ScenarioSpec {
        let mut spec = migration("nonlinear", 1978, 1982, seed);
        spec.disciplines[1].label = "economics".into();
        spec
    }

    /// MBD → ADD → ADHD in one discipline; each successor adopts faster
    /// than its predecessor.
    pub fn succession(seed: u64) -> ScenarioSpec {
        let logistic = |c: f64| Some(DiffusionParams { c, p_m: 1000.0, p_0: 100.0 });
        ScenarioSpec {
            year_range: (1974, 1995),
            bin_width: 2,
            seed,
            injected_query: None,
            doc_length: 30,
            title_length: 6,
            background: BackgroundVocabulary::default(),
            disciplines: vec![DisciplineSpec {
                label: "psychology".into(),
                docs_per_bin: 500,
                onset_year: None,
                diffusion: None,
                saturation: 0.5,
                injections: vec![
                    Injection {
                        term: "minimal brain dysfunction MBD".into(),
                        onset_year: 1974,
                        diffusion: None,
                        saturation: 0.3,
                        decline: Some(Decline { start_year: 1980, rate: 0.35 }),
                    },
                    Injection {
                        term: "attention deficit disorder ADD".into(),
                        onset_year: 1980,
                        diffusion: logistic(0.4),
                        saturation: 0.4,
                        decline: Some(Decline { start_year: 1988, rate: 0.35 }),
                    },
                    Injection {
                        term: "attention deficit hyperactivity disorder ADHD".into(),
                        onset_year: 1988,
                        diffusion: logistic(1.2),
                        saturation: 0.5,
                        decline: None,
                    },
                ],
            }],
        }
    }

    /// Four disciplines; `unique_terms[i]` occurs only in the target
    /// discipline (the first one).
    pub fn unique_terms(unique_terms: &[&str], seed: u64) -> ScenarioSpec {
        let discipline = |label: &str| DisciplineSpec {
            label: label.into(),
            docs_per_bin: 100,
            onset_year: None,
            diffusion: None,
            saturation: 0.5,
            injections: Vec::new(),
        };
        let mut target = discipline("physics");
        target.injections = unique_terms
            .iter()
            .map(|t| Injection {
                term: t.to_string(),
                onset_year: 1980,
                diffusion: None,
                saturation: 0.1,
                decline: None,
            })
            .collect();
        ScenarioSpec {
            year_range: (1980, 1989),
            bin_width: 2,
            seed,
            injected_query: None,
            doc_length: 30,
            title_length: 6,
            background: BackgroundVocabulary { size: 500, exponent: 1.0 },
            disciplines: vec![target, discipline("biology"), discipline("sociology"), discipline("history")],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> ScenarioSpec {
        let mut spec = presets::chaos(seed);
        for d in spec.disciplines.iter_mut() {
            d.docs_per_bin = 20;
        }
        spec
    }

    #[test]
    fn same_seed_same_corpus() {
        let a = generate(&small(7)).unwrap();
        let b = generate(&small(7)).unwrap();
        assert_eq!(a, b);
        let c = generate(&small(8)).unwrap();
        assert_ne!(a.documents, c.documents);
    }

    #[test]
    fn no_injection_means_no_term() {
        let mut spec = small(1);
        spec.injected_query = None;
        for d in spec.disciplines.iter_mut() {
            d.onset_year = None;
        }
        let scenario = generate(&spec).unwrap();
        assert!(scenario
            .documents
            .iter()
            .all(|d| !tokenize(&format!("{} {}", d.title, d.abstract_text)).contains(&"chaos".to_string())));
        assert_eq!(scenario.truth.donor, None);
    }

    #[test]
    fn documents_fill_range_and_bins() {
        let scenario = generate(&small(3)).unwrap();
        assert_eq!(scenario.truth.bin_starts.len(), 11);
        assert_eq!(scenario.documents.len(), 2 * 11 * 20);
        assert!(scenario.documents.iter().all(|d| (1974..=1995).contains(&d.year)));
        assert_eq!(scenario.truth.donor.as_deref(), Some("mathematics"));
    }

    #[test]
    fn pseudo_words_are_distinct_tokens() {
        let words = background_words(3000, &BTreeSet::new());
        let unique: HashSet<&String> = words.iter().collect();
        assert_eq!(unique.len(), 3000);
        for w in words.iter().take(50) {
            assert_eq!(tokenize(w), vec![w.clone()]);
        }
        let reserved: BTreeSet<String> = [pseudo_word(0)].into_iter().collect();
        assert!(!background_words(10, &reserved).contains(&pseudo_word(0)));
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = small(1);
        spec.disciplines[0].onset_year = Some(1960);
        assert!(generate(&spec).is_err());
        let mut spec = small(1);
        spec.disciplines[1].label = "mathematics".into();
        assert!(generate(&spec).is_err());
        let mut spec = small(1);
        spec.disciplines[0].diffusion = Some(DiffusionParams { c: 0.6, p_m: 10.0, p_0: 20.0 });
        assert!(generate(&spec).is_err());
        let mut spec = small(1);
        spec.bin_width = 0;
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn succession_truth_lists_crossovers() {
        let truth = presets::succession(1).truth();
        let pairs: Vec<(i32, &str)> = truth
            .crossovers
            .iter()
            .map(|c| (c.bin_start, c.new_term.as_str()))
            .collect();
        assert_eq!(
            pairs,
            vec![
                (1982, "attention deficit disorder ADD"),
                (1990, "attention deficit hyperactivity disorder ADHD")
            ]
        );
    }

    #[test]
    fn spec_json_round_trip_with_defaults() {
        let text = r#"{
            "year_range": [1974, 1995],
            "seed": 5,
            "injected_query": "chaos",
            "disciplines": [
                {"label": "math", "docs_per_bin": 10, "onset_year": 1978,
                 "diffusion": {"c": 0.6, "p_m": 1000, "p_0": 10}}
            ]
        }"#;
        let spec: ScenarioSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.bin_width, 2);
        assert_eq!(spec.doc_length, 30);
        assert_eq!(spec.background, BackgroundVocabulary::default());
        assert_eq!(spec.disciplines[0].saturation, 0.5);
        generate(&spec).unwrap();
    }
}
