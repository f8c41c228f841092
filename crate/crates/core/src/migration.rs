//! Growth peaks, cross-discipline lags and temporal donor/borrower roles.
//!
//! Roles are assigned from timing alone: the discipline with the earliest
//! strong growth peak is the donor and later peaks are borrowers. Nothing
//! here establishes that the concept actually travelled between them.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::TimeBin;
use crate::trend::GrowthSeries;

pub const ROLE_BASIS: &str = "donor/borrower (temporal)";

#[derive(Debug, Error)]
pub enum MigrationError {
    #[error("no positive growth in '{0}'")]
    NoPositiveGrowth(String),
    #[error("every growth point in '{0}' is masked")]
    AllMasked(String),
    #[error("no discipline shows a growth peak")]
    NoPeaks,
    #[error("no succession found")]
    NoSuccession,
    #[error("series cover different bins")]
    BinMismatch,
    #[error("invalid strong threshold: {0}")]
    InvalidThreshold(f64),
}

impl MigrationError {
    pub fn code(&self) -> &'static str {
        match self {
            MigrationError::NoPositiveGrowth(_) => "no_positive_growth",
            MigrationError::AllMasked(_) => "all_masked",
            MigrationError::NoPeaks => "no_peaks",
            MigrationError::NoSuccession => "no_succession",
            MigrationError::BinMismatch => "bin_mismatch",
            MigrationError::InvalidThreshold(_) => "invalid_threshold",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthPeak {
    pub discipline: String,
    pub bin: TimeBin,
    pub peak_rate: f64,
    pub support: u32,
}

/// Maximum unmasked smoothed rate above zero; the earliest bin wins ties.
pub fn detect_peak(growth: &GrowthSeries) -> Result<GrowthPeak, MigrationError> {
    let discipline = growth.discipline().to_string();
    let mut any_usable = false;
    let mut best: Option<(&crate::trend::GrowthPoint, f64)> = None;
    for point in &growth.points {
        let Some(rate) = point.usable_rate() else { continue };
        any_usable = true;
        if rate > 0.0 && best.is_none_or(|(_, top)| rate > top) {
            best = Some((point, rate));
        }
    }
    match best {
        Some((point, rate)) => Ok(GrowthPeak {
            discipline,
            bin: point.bin,
            peak_rate: rate,
            support: point.support,
        }),
        None if any_usable => Err(MigrationError::NoPositiveGrowth(discipline)),
        None => Err(MigrationError::AllMasked(discipline)),
    }
}

/// Years from peak `a` to peak `b`, measured between bin start years.
pub fn lag(a: &GrowthPeak, b: &GrowthPeak) -> i32 {
    b.bin.start_year - a.bin.start_year
}

/// Peak rate as a measure of the concept's importance to the discipline.
pub fn importance(growth: &GrowthSeries) -> Result<f64, MigrationError> {
    detect_peak(growth).map(|p| p.peak_rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum StrongThreshold {
    /// fraction of the largest peak rate across disciplines
    Relative(f64),
    Absolute(f64),
}

impl Default for StrongThreshold {
    fn default() -> Self {
        StrongThreshold::Relative(0.5)
    }
}

impl StrongThreshold {
    fn resolve(&self, max_peak: f64) -> Result<f64, MigrationError> {
        match *self {
            StrongThreshold::Relative(fraction) if fraction.is_finite() && fraction >= 0.0 => {
                Ok(fraction * max_peak)
            }
            StrongThreshold::Absolute(value) if value.is_finite() => Ok(value),
            StrongThreshold::Relative(v) | StrongThreshold::Absolute(v) => Err(MigrationError::InvalidThreshold(v)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakEntry {
    pub discipline: String,
    pub bin_start: i32,
    pub peak_rate: f64,
    pub support: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LagEntry {
    pub discipline: String,
    pub lag_years: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairLag {
    pub from: String,
    pub to: String,
    pub lag_years: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MigrationReport {
    pub query: String,
    pub roles: String,
    pub strong_threshold: f64,
    pub donor: String,
    pub peaks: Vec<PeakEntry>,
    pub borrowers: Vec<LagEntry>,
    /// weak peaks earlier than the donor's (negative lag)
    pub precursors: Vec<LagEntry>,
    pub non_adopters: Vec<String>,
    /// every ordered pair of peaked disciplines
    pub lag_table: Vec<PairLag>,
    /// lags are between bin starts, so each carries ± one bin
    pub lag_uncertainty_years: u32,
}

impl MigrationReport {
    pub fn borrower_lag(&self, discipline: &str) -> Option<i32> {
        self.borrowers
            .iter()
            .find(|b| b.discipline == discipline)
            .map(|b| b.lag_years)
    }

    pub fn peak(&self, discipline: &str) -> Option<&PeakEntry> {
        self.peaks.iter().find(|p| p.discipline == discipline)
    }

    pub fn write_json<W: Write>(&self, writer: W) -> serde_json::Result<()> {
        serde_json::to_writer_pretty(writer, self)
    }
}

/// Assign donor and borrower roles for one query across disciplines.
pub fn classify_roles(
    series: &[GrowthSeries],
    strong: StrongThreshold,
) -> Result<MigrationReport, MigrationError> {
    let query = series
        .first()
        .map(|s| s.query().to_string())
        .unwrap_or_default();
    let mut peaks = Vec::new();
    let mut non_adopters = Vec::new();
    for s in series {
        match detect_peak(s) {
            Ok(peak) => peaks.push(peak),
            Err(MigrationError::NoPositiveGrowth(d)) | Err(MigrationError::AllMasked(d)) => non_adopters.push(d),
            Err(other) => return Err(other),
        }
    }
    if peaks.is_empty() {
        return Err(MigrationError::NoPeaks);
    }
    let max_peak = peaks.iter().map(|p| p.peak_rate).fold(f64::NEG_INFINITY, f64::max);
    let threshold = strong.resolve(max_peak)?;

    let donor = peaks
        .iter()
        .filter(|p| p.peak_rate >= threshold)
        .min_by(|a, b| {
            a.bin
                .start_year
                .cmp(&b.bin.start_year)
                .then(b.peak_rate.total_cmp(&a.peak_rate))
                .then_with(|| a.discipline.cmp(&b.discipline))
        })
        // an absolute threshold above every peak leaves no strong peak
        .ok_or(MigrationError::NoPeaks)?
        .clone();

    let mut others: Vec<&GrowthPeak> = peaks.iter().filter(|p| p.discipline != donor.discipline).collect();
    others.sort_by(|a, b| {
        a.bin
            .start_year
            .cmp(&b.bin.start_year)
            .then_with(|| a.discipline.cmp(&b.discipline))
    });
    let mut borrowers = Vec::new();
    let mut precursors = Vec::new();
    for peak in others {
        let entry = LagEntry {
            discipline: peak.discipline.clone(),
            lag_years: lag(&donor, peak),
        };
        if entry.lag_years >= 0 {
            borrowers.push(entry);
        } else {
            precursors.push(entry);
        }
    }

    let mut lag_table = Vec::new();
    for a in &peaks {
        for b in &peaks {
            if a.discipline != b.discipline {
                lag_table.push(PairLag {
                    from: a.discipline.clone(),
                    to: b.discipline.clone(),
                    lag_years: lag(a, b),
                });
            }
        }
    }

    Ok(MigrationReport {
        query,
        roles: ROLE_BASIS.to_string(),
        strong_threshold: threshold,
        donor: donor.discipline.clone(),
        lag_uncertainty_years: donor.bin.width_years,
        peaks: peaks
            .iter()
            .map(|p| PeakEntry {
                discipline: p.discipline.clone(),
                bin_start: p.bin.start_year,
                peak_rate: p.peak_rate,
                support: p.support,
            })
            .collect(),
        borrowers,
        precursors,
        non_adopters,
        lag_table,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessionEvent {
    pub old_query: String,
    pub new_query: String,
    pub crossover_bin: TimeBin,
    pub old_rate_at_crossover: f64,
    pub new_rate_at_crossover: f64,
    /// the successor grows faster than its predecessor declines
    pub new_outpaces_old: bool,
}

/// Earliest bin where the new term grows while the old one declines
/// within `window_bins` of it.
pub fn detect_succession(
    old: &GrowthSeries,
    new: &GrowthSeries,
    window_bins: usize,
) -> Result<SuccessionEvent, MigrationError> {
    if old.bins() != new.bins() || old.points.len() != new.points.len() {
        return Err(MigrationError::BinMismatch);
    }
    let len = new.points.len();
    for (t, point) in new.points.iter().enumerate() {
        let Some(new_rate) = point.usable_rate().filter(|&r| r > 0.0) else {
            continue;
        };
        // nearest declining point of the old term, preferring the same bin
        let nearest = (0..=window_bins).find_map(|offset| {
            [t.checked_sub(offset), Some(t + offset).filter(|&i| i < len)]
                .into_iter()
                .flatten()
                .find_map(|i| old.points[i].usable_rate().filter(|&r| r < 0.0))
        });
        if let Some(old_rate) = nearest {
            return Ok(SuccessionEvent {
                old_query: old.query().to_string(),
                new_query: new.query().to_string(),
                crossover_bin: point.bin,
                old_rate_at_crossover: old_rate,
                new_rate_at_crossover: new_rate,
                new_outpaces_old: new_rate > old_rate.abs(),
            });
        }
    }
    Err(MigrationError::NoSuccession)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TermQuery;
    use crate::trend::{apply_support_filter, growth_series, FrequencySeries};

    fn bins(n: usize, start: i32) -> Vec<TimeBin> {
        (0..n)
            .map(|i| TimeBin {
                start_year: start + 2 * i as i32,
                width_years: 2,
            })
            .collect()
    }

    /// Growth series from per-bin frequencies (per mille), 1000 docs each.
    fn growth(discipline: &str, term: &str, per_mille: &[u32], window: usize) -> GrowthSeries {
        let freq = FrequencySeries::from_counts(
            discipline,
            TermQuery::single(term).unwrap(),
            bins(per_mille.len(), 1974),
            per_mille.to_vec(),
            vec![1000; per_mille.len()],
        )
        .unwrap();
        apply_support_filter(growth_series(&freq, window).unwrap(), 8)
    }

    #[test]
    fn strictly_decreasing_has_no_positive_growth() {
        let g = growth("math", "x1", &[400, 300, 200, 100, 50], 1);
        assert!(matches!(detect_peak(&g), Err(MigrationError::NoPositiveGrowth(_))));
        assert!(importance(&g).is_err());
    }

    #[test]
    fn all_masked_is_reported() {
        let g = growth("math", "x1", &[0, 1, 2, 3], 1);
        assert!(matches!(detect_peak(&g), Err(MigrationError::AllMasked(_))));
    }

    #[test]
    fn equal_maxima_pick_earlier_bin() {
        let g = growth("math", "x1", &[100, 200, 200, 400], 1);
        let peak = detect_peak(&g).unwrap();
        assert_eq!(peak.bin.start_year, 1976);
        assert_eq!(peak.support, 300);
    }

    #[test]
    fn lag_examples() {
        let peak = |d: &str, year: i32| GrowthPeak {
            discipline: d.into(),
            bin: TimeBin {
                start_year: year,
                width_years: 2,
            },
            peak_rate: 1.0,
            support: 100,
        };
        assert_eq!(lag(&peak("math", 1980), &peak("educ", 1990)), 10);
        assert_eq!(lag(&peak("educ", 1990), &peak("math", 1980)), -10);
        assert_eq!(lag(&peak("a", 1984), &peak("b", 1984)), 0);
    }

    #[test]
    fn single_discipline_is_donor() {
        let g = growth("math", "chaos", &[10, 20, 60, 100, 120], 1);
        let report = classify_roles(&[g], StrongThreshold::default()).unwrap();
        assert_eq!(report.donor, "math");
        assert!(report.borrowers.is_empty());
        assert_eq!(report.roles, ROLE_BASIS);
    }

    #[test]
    fn chaos_like_fixture() {
        // mathematics: early steep rise; education: weak late rise
        let math = growth("mathematics", "chaos", &[10, 30, 90, 200, 260, 280, 290, 300, 300, 300], 3);
        let educ = growth("education", "chaos", &[10, 10, 10, 10, 10, 12, 15, 19, 24, 30], 3);
        let flat = growth("history", "chaos", &[20, 20, 20, 20, 20, 20, 20, 20, 20, 20], 3);
        let report = classify_roles(&[educ, flat, math], StrongThreshold::default()).unwrap();
        assert_eq!(report.donor, "mathematics");
        assert_eq!(report.borrowers.len(), 1);
        assert_eq!(report.borrowers[0].discipline, "education");
        assert!(report.borrowers[0].lag_years > 0);
        assert_eq!(report.non_adopters, vec!["history".to_string()]);
        assert!(report.peak("mathematics").unwrap().peak_rate > report.peak("education").unwrap().peak_rate);
    }

    #[test]
    fn weak_early_peak_is_a_precursor_not_donor() {
        let weak = growth("a", "x1", &[100, 110, 110, 110, 110, 110], 1);
        let strong = growth("b", "x1", &[100, 100, 100, 400, 400, 400], 1);
        let report = classify_roles(&[weak, strong], StrongThreshold::default()).unwrap();
        assert_eq!(report.donor, "b");
        assert_eq!(report.precursors, vec![LagEntry { discipline: "a".into(), lag_years: -4 }]);
        assert!(report.borrowers.is_empty());
    }

    #[test]
    fn no_peaks_anywhere() {
        let g = growth("a", "x1", &[300, 200, 100], 1);
        assert!(matches!(
            classify_roles(&[g], StrongThreshold::default()),
            Err(MigrationError::NoPeaks)
        ));
    }

    #[test]
    fn succession_found_and_absent() {
        let old = growth("psy", "mbd", &[300, 300, 300, 150, 75, 40, 20, 10], 1);
        let new = growth("psy", "add", &[0, 0, 0, 20, 60, 150, 250, 300], 1);
        let event = detect_succession(&old, &new, 1).unwrap();
        assert_eq!(event.crossover_bin.start_year, 1982);
        assert!(event.old_rate_at_crossover < 0.0);
        assert!(event.new_rate_at_crossover > 0.0);
        assert!(event.new_outpaces_old);

        let a = growth("psy", "x1", &[10, 20, 40, 80], 1);
        let b = growth("psy", "x2", &[10, 20, 40, 80], 1);
        assert!(matches!(detect_succession(&a, &b, 1), Err(MigrationError::NoSuccession)));

        let short = growth("psy", "x2", &[10, 20, 40], 1);
        assert!(matches!(detect_succession(&a, &short, 1), Err(MigrationError::BinMismatch)));
    }
}
