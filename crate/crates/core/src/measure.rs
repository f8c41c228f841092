//! The technical-sense fraction M and the hardness statistic M-delta.
//!
//! Whether a term is used in its discipline-specific sense is an expert
//! judgement, so M is computed from an annotation file, never from text.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("term list is empty")]
    EmptyTermList,
    #[error("missing annotations for {}", format_pairs(.0))]
    MissingAnnotation(Vec<(String, String)>),
    #[error("M is zero for the {0} list of '{1}'; ln is undefined (enable smoothing to proceed)")]
    ZeroMValue(&'static str, String),
    #[error("annotation file line {line}: {reason}")]
    BadAnnotation { line: usize, reason: String },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

fn format_pairs(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(t, d)| format!("({t}, {d})"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl MeasureError {
    pub fn code(&self) -> &'static str {
        match self {
            MeasureError::EmptyTermList => "empty_term_list",
            MeasureError::MissingAnnotation(_) => "missing_annotation",
            MeasureError::ZeroMValue(..) => "zero_m_value",
            MeasureError::BadAnnotation { .. } => "bad_annotation",
            MeasureError::Io(_) => "io",
        }
    }
}

/// (term, discipline) → used in the technical sense.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotationSet {
    flags: HashMap<(String, String), bool>,
}

impl AnnotationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, term: &str, discipline: &str, technical: bool) {
        self.flags
            .insert((term.to_string(), discipline.to_string()), technical);
    }

    /// `None` when the pair was never annotated.
    pub fn get(&self, term: &str, discipline: &str) -> Option<bool> {
        self.flags
            .get(&(term.to_string(), discipline.to_string()))
            .copied()
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    /// CSV with header `term,discipline,technical`, technical in {0,1}.
    /// Conflicting duplicate rows are rejected.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, MeasureError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let bad = |line: usize, reason: String| MeasureError::BadAnnotation { line, reason };
        let headers = rdr.headers().map_err(|e| bad(1, e.to_string()))?.clone();
        let column = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| bad(1, format!("missing column '{name}'")))
        };
        let (term_col, disc_col, tech_col) = (column("term")?, column("discipline")?, column("technical")?);
        let mut set = AnnotationSet::new();
        for (i, row) in rdr.records().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| bad(line, e.to_string()))?;
            let term = row.get(term_col).unwrap_or("").to_lowercase();
            let discipline = row.get(disc_col).unwrap_or("").to_string();
            if term.is_empty() || discipline.is_empty() {
                return Err(bad(line, "empty term or discipline".into()));
            }
            let technical = match row.get(tech_col).unwrap_or("") {
                "1" => true,
                "0" => false,
                other => return Err(bad(line, format!("technical must be 0 or 1, got '{other}'"))),
            };
            if let Some(previous) = set.get(&term, &discipline) {
                if previous != technical {
                    return Err(bad(line, format!("conflicting annotation for ({term}, {discipline})")));
                }
            }
            set.insert(&term, &discipline, technical);
        }
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self, MeasureError> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

fn technical_count<S: AsRef<str>>(
    terms: &[S],
    discipline: &str,
    annotations: &AnnotationSet,
) -> Result<usize, MeasureError> {
    if terms.is_empty() {
        return Err(MeasureError::EmptyTermList);
    }
    let mut missing = Vec::new();
    let mut technical = 0;
    for term in terms {
        match annotations.get(term.as_ref(), discipline) {
            Some(true) => technical += 1,
            Some(false) => {}
            None => missing.push((term.as_ref().to_string(), discipline.to_string())),
        }
    }
    if !missing.is_empty() {
        return Err(MeasureError::MissingAnnotation(missing));
    }
    Ok(technical)
}

/// Fraction of `terms` annotated as technical in `discipline`.
pub fn m_value<S: AsRef<str>>(
    terms: &[S],
    discipline: &str,
    annotations: &AnnotationSet,
) -> Result<f64, MeasureError> {
    let technical = technical_count(terms, discipline, annotations)?;
    Ok(technical as f64 / terms.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HardnessLabel {
    DonorLeaning,
    BorrowerLeaning,
    Neutral,
}

impl HardnessLabel {
    pub fn from_delta(m_delta: f64) -> Self {
        if m_delta > 0.0 {
            HardnessLabel::DonorLeaning
        } else if m_delta < 0.0 {
            HardnessLabel::BorrowerLeaning
        } else {
            HardnessLabel::Neutral
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            HardnessLabel::DonorLeaning => "donor-leaning",
            HardnessLabel::BorrowerLeaning => "borrower-leaning",
            HardnessLabel::Neutral => "neutral",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MDeltaReport {
    pub discipline: String,
    pub m_top: f64,
    pub m_bottom: f64,
    pub m_delta: f64,
    pub label: HardnessLabel,
    pub smoothed: bool,
}

/// ln(a/b), evaluated on the side where the ratio is ≥ 1 so that swapping
/// the arguments negates the result exactly.
fn log_ratio(a: f64, b: f64) -> f64 {
    if a >= b {
        (a / b).ln()
    } else {
        -(b / a).ln()
    }
}

/// M-delta for one discipline from its most- and least-unique term lists.
///
/// With `smoothing`, a zero M on either side switches both lists to
/// (technical + 1) / (len + 2) and the report is flagged.
pub fn m_delta<S: AsRef<str>>(
    top_terms: &[S],
    bottom_terms: &[S],
    discipline: &str,
    annotations: &AnnotationSet,
    smoothing: bool,
) -> Result<MDeltaReport, MeasureError> {
    let top_count = technical_count(top_terms, discipline, annotations)?;
    let bottom_count = technical_count(bottom_terms, discipline, annotations)?;
    let raw = |count: usize, len: usize| count as f64 / len as f64;
    let (mut m_top, mut m_bottom) = (raw(top_count, top_terms.len()), raw(bottom_count, bottom_terms.len()));
    let mut smoothed = false;
    if m_top == 0.0 || m_bottom == 0.0 {
        if !smoothing {
            let side = if m_top == 0.0 { "top" } else { "bottom" };
            return Err(MeasureError::ZeroMValue(side, discipline.to_string()));
        }
        let laplace = |count: usize, len: usize| (count as f64 + 1.0) / (len as f64 + 2.0);
        m_top = laplace(top_count, top_terms.len());
        m_bottom = laplace(bottom_count, bottom_terms.len());
        smoothed = true;
    }
    let delta = log_ratio(m_top, m_bottom);
    Ok(MDeltaReport {
        discipline: discipline.to_string(),
        m_top,
        m_bottom,
        m_delta: delta,
        label: HardnessLabel::from_delta(delta),
        smoothed,
    })
}

/// Disciplines by descending M-top; ties by name.
pub fn hardness_ranking(reports: &[MDeltaReport]) -> Vec<MDeltaReport> {
    let mut sorted = reports.to_vec();
    sorted.sort_by(|a, b| {
        b.m_top
            .partial_cmp(&a.m_top)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.discipline.cmp(&b.discipline))
    });
    sorted
}

pub fn write_reports_csv<W: Write>(reports: &[MDeltaReport], writer: W) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["discipline", "m_top", "m_bottom", "m_delta", "label", "smoothed"])?;
    for r in reports {
        out.write_record([
            r.discipline.clone(),
            r.m_top.to_string(),
            r.m_bottom.to_string(),
            r.m_delta.to_string(),
            r.label.as_str().to_string(),
            if r.smoothed { "1" } else { "0" }.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn annotated(discipline: &str, flags: &[(&str, bool)]) -> AnnotationSet {
        let mut set = AnnotationSet::new();
        for (term, tech) in flags {
            set.insert(term, discipline, *tech);
        }
        set
    }

    #[test]
    fn m_value_definition() {
        let terms: Vec<String> = (0..10).map(|i| format!("t{i}")).collect();
        let flags: Vec<(&str, bool)> = terms.iter().enumerate().map(|(i, t)| (t.as_str(), i < 8)).collect();
        let set = annotated("phys", &flags);
        assert_eq!(m_value(&terms, "phys", &set).unwrap(), 0.8);

        let all = annotated("phys", &[("a1", true), ("a2", true)]);
        assert_eq!(m_value(&["a1", "a2"], "phys", &all).unwrap(), 1.0);
        let none = annotated("phys", &[("a1", false), ("a2", false)]);
        assert_eq!(m_value(&["a1", "a2"], "phys", &none).unwrap(), 0.0);
    }

    #[test]
    fn m_value_errors() {
        let set = annotated("phys", &[("a1", true)]);
        let empty: [&str; 0] = [];
        assert!(matches!(m_value(&empty, "phys", &set), Err(MeasureError::EmptyTermList)));
        match m_value(&["a1", "zz"], "phys", &set) {
            Err(MeasureError::MissingAnnotation(pairs)) => {
                assert_eq!(pairs, vec![("zz".to_string(), "phys".to_string())])
            }
            other => panic!("{other:?}"),
        }
        // same term, other discipline is not annotated
        assert!(m_value(&["a1"], "hist", &set).is_err());
        assert_eq!(set.get("a1", "hist"), None);
    }

    fn lists(top_tech: usize, bottom_tech: usize) -> (Vec<String>, Vec<String>, AnnotationSet) {
        let mut set = AnnotationSet::new();
        let top: Vec<String> = (0..10).map(|i| format!("top{i}")).collect();
        let bottom: Vec<String> = (0..10).map(|i| format!("bot{i}")).collect();
        for (i, t) in top.iter().enumerate() {
            set.insert(t, "d", i < top_tech);
        }
        for (i, t) in bottom.iter().enumerate() {
            set.insert(t, "d", i < bottom_tech);
        }
        (top, bottom, set)
    }

    #[test]
    fn m_delta_examples() {
        let (top, bottom, set) = lists(8, 4);
        let r = m_delta(&top, &bottom, "d", &set, false).unwrap();
        assert!((r.m_delta - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(r.label, HardnessLabel::DonorLeaning);

        let (top, bottom, set) = lists(5, 5);
        let r = m_delta(&top, &bottom, "d", &set, false).unwrap();
        assert_eq!(r.m_delta, 0.0);
        assert_eq!(r.label, HardnessLabel::Neutral);

        let (top, bottom, set) = lists(4, 8);
        let r = m_delta(&top, &bottom, "d", &set, false).unwrap();
        assert!((r.m_delta + std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(r.label, HardnessLabel::BorrowerLeaning);
    }

    #[test]
    fn zero_m_requires_opt_in_smoothing() {
        let (top, bottom, set) = lists(6, 0);
        assert!(matches!(
            m_delta(&top, &bottom, "d", &set, false),
            Err(MeasureError::ZeroMValue("bottom", _))
        ));
        let r = m_delta(&top, &bottom, "d", &set, true).unwrap();
        assert!(r.smoothed);
        assert_eq!(r.m_top, 7.0 / 12.0);
        assert_eq!(r.m_bottom, 1.0 / 12.0);
        assert!((r.m_delta - 7.0f64.ln()).abs() < 1e-12);

        let (top, bottom, set) = lists(6, 3);
        assert!(!m_delta(&top, &bottom, "d", &set, true).unwrap().smoothed);
    }

    #[test]
    fn hardness_ranking_sorts_and_breaks_ties() {
        let report = |d: &str, m_top: f64| MDeltaReport {
            discipline: d.into(),
            m_top,
            m_bottom: 0.5,
            m_delta: (m_top / 0.5).ln(),
            label: HardnessLabel::from_delta((m_top / 0.5).ln()),
            smoothed: false,
        };
        let ordered = hardness_ranking(&[report("hist", 0.2), report("phys", 0.9)]);
        assert_eq!(ordered[0].discipline, "phys");
        let ordered = hardness_ranking(&[report("b", 0.5), report("a", 0.5)]);
        assert_eq!(ordered[0].discipline, "a");
    }

    #[test]
    fn annotation_csv() {
        let text = "term,discipline,technical\nChaos,math,1\nchaos,educ,0\n";
        let set = AnnotationSet::read_csv(text.as_bytes()).unwrap();
        assert_eq!(set.get("chaos", "math"), Some(true));
        assert_eq!(set.get("chaos", "educ"), Some(false));
        assert!(AnnotationSet::read_csv("term,discipline,technical\nx,y,2\n".as_bytes()).is_err());
        assert!(AnnotationSet::read_csv("term,discipline,technical\nx,y,1\nx,y,0\n".as_bytes()).is_err());
        assert!(AnnotationSet::read_csv("term,discipline\nx,y\n".as_bytes()).is_err());
    }
}
