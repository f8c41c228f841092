//! Normalized frequency series and smoothed log growth rates.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusError, CorpusIndex, TermQuery, TimeBin};

#[derive(Debug, Error)]
pub enum TrendError {
    #[error("growth needs at least two bins, got {0}")]
    TooFewBins(usize),
    #[error("smoothing window must be odd and positive, got {0}")]
    InvalidWindow(usize),
    #[error("series length mismatch: {0}")]
    LengthMismatch(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

impl TrendError {
    pub fn code(&self) -> &'static str {
        match self {
            TrendError::TooFewBins(_) => "too_few_bins",
            TrendError::InvalidWindow(_) => "invalid_window",
            TrendError::LengthMismatch(_) => "length_mismatch",
            TrendError::Corpus(e) => e.code(),
        }
    }
}

/// Matching documents over total documents, bin by bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySeries {
    pub discipline: String,
    pub query: TermQuery,
    pub bins: Vec<TimeBin>,
    /// matching documents per bin
    pub n: Vec<u32>,
    /// all documents per bin
    pub totals: Vec<u32>,
    /// n / N, `None` where N = 0
    pub f: Vec<Option<f64>>,
}

impl FrequencySeries {
    pub fn from_counts(
        discipline: &str,
        query: TermQuery,
        bins: Vec<TimeBin>,
        n: Vec<u32>,
        totals: Vec<u32>,
    ) -> Result<Self, TrendError> {
        if n.len() != bins.len() || totals.len() != bins.len() {
            return Err(TrendError::LengthMismatch(format!(
                "{} bins, {} counts, {} totals",
                bins.len(),
                n.len(),
                totals.len()
            )));
        }
        if let Some(i) = (0..n.len()).find(|&i| n[i] > totals[i]) {
            return Err(TrendError::LengthMismatch(format!(
                "bin {} has {} matches out of {} documents",
                bins[i], n[i], totals[i]
            )));
        }
        let f = n
            .iter()
            .zip(&totals)
            .map(|(&n, &total)| (total > 0).then(|| n as f64 / total as f64))
            .collect();
        Ok(FrequencySeries {
            discipline: discipline.to_string(),
            query,
            bins,
            n,
            totals,
            f,
        })
    }
}

pub fn frequency_series(
    index: &CorpusIndex,
    query: &TermQuery,
    discipline: &str,
) -> Result<FrequencySeries, TrendError> {
    let totals = index.doc_counts_for(discipline)?;
    let n = index.match_counts(query, discipline)?;
    FrequencySeries::from_counts(discipline, query.clone(), index.bins().to_vec(), n, totals)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskReason {
    LowSupport,
    ZeroFrequency,
    MissingBin,
}

impl MaskReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            MaskReason::LowSupport => "low_support",
            MaskReason::ZeroFrequency => "zero_frequency",
            MaskReason::MissingBin => "missing_bin",
        }
    }
}

/// Whether rates are smoothed after differencing (default) or the
/// frequencies are smoothed before it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothingOrder {
    #[default]
    DifferenceThenSmooth,
    SmoothThenDifference,
}

/// One transition from the previous bin into `bin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub bin: TimeBin,
    pub r: Option<f64>,
    pub smoothed_r: Option<f64>,
    pub mask: Option<MaskReason>,
    /// matching documents in the two bins of the transition
    pub support: u32,
}

impl GrowthPoint {
    /// Smoothed rate if the point survived masking.
    pub fn usable_rate(&self) -> Option<f64> {
        if self.mask.is_some() {
            None
        } else {
            self.smoothed_r
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSeries {
    pub frequency: FrequencySeries,
    pub smoothing_window: usize,
    pub order: SmoothingOrder,
    /// one point per bin after the first
    pub points: Vec<GrowthPoint>,
}

/// Centered moving average over each gap-free run of defined points.
///
/// Windows are folded back into the run at its ends (half-sample mirror),
/// so an edge point of a window-3 run averages (2·r_0 + r_1) / 3. The
/// resulting weights are symmetric with unit row sums: every output is a
/// true weighted mean and the run total is conserved exactly.
pub fn smooth(values: &[Option<f64>], window: usize) -> Vec<Option<f64>> {
    let half = (window / 2) as i64;
    let mut out = vec![None; values.len()];
    let mut t = 0;
    while t < values.len() {
        if values[t].is_none() {
            t += 1;
            continue;
        }
        let start = t;
        while t < values.len() && values[t].is_some() {
            t += 1;
        }
        let run: Vec<f64> = values[start..t].iter().flatten().copied().collect();
        let len = run.len() as i64;
        let fold = |m: i64| {
            let m = m.rem_euclid(2 * len);
            if m < len { m } else { 2 * len - 1 - m }
        };
        for i in 0..len {
            let sum: f64 = (-half..=half).map(|j| run[fold(i + j) as usize]).sum();
            out[start + i as usize] = Some(sum / (2 * half + 1) as f64);
        }
    }
    out
}

fn validate_window(window: usize) -> Result<(), TrendError> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(TrendError::InvalidWindow(window));
    }
    Ok(())
}

/// Plain shrinking-window mean, used on frequencies in
/// [`SmoothingOrder::SmoothThenDifference`] mode.
fn rolling_mean(values: &[Option<f64>], window: usize) -> Vec<Option<f64>> {
    let half = window / 2;
    (0..values.len())
        .map(|t| {
            values[t]?;
            let lo = t.saturating_sub(half);
            let hi = (t + half).min(values.len() - 1);
            let defined: Vec<f64> = values[lo..=hi].iter().flatten().copied().collect();
            Some(defined.iter().sum::<f64>() / defined.len() as f64)
        })
        .collect()
}

/// Log growth rate per transition, r_t = ln(f_t / f_{t-1}), then smoothing.
pub fn growth_series(freq: &FrequencySeries, smoothing_window: usize) -> Result<GrowthSeries, TrendError> {
    growth_series_with(freq, smoothing_window, SmoothingOrder::default())
}

pub fn growth_series_with(
    freq: &FrequencySeries,
    smoothing_window: usize,
    order: SmoothingOrder,
) -> Result<GrowthSeries, TrendError> {
    if freq.bins.len() < 2 {
        return Err(TrendError::TooFewBins(freq.bins.len()));
    }
    validate_window(smoothing_window)?;
    let source = match order {
        SmoothingOrder::DifferenceThenSmooth => freq.f.clone(),
        SmoothingOrder::SmoothThenDifference => rolling_mean(&freq.f, smoothing_window),
    };
    let points = (1..freq.bins.len())
        .map(|t| {
            let (r, mask) = match (source[t - 1], source[t]) {
                (None, _) | (_, None) => (None, Some(MaskReason::MissingBin)),
                (Some(prev), Some(cur)) if prev > 0.0 && cur > 0.0 => (Some((cur / prev).ln()), None),
                _ => (None, Some(MaskReason::ZeroFrequency)),
            };
            GrowthPoint {
                bin: freq.bins[t],
                r,
                smoothed_r: None,
                mask,
                support: freq.n[t - 1] + freq.n[t],
            }
        })
        .collect();
    let mut series = GrowthSeries {
        frequency: freq.clone(),
        smoothing_window,
        order,
        points,
    };
    series.resmooth();
    Ok(series)
}

impl GrowthSeries {
    fn resmooth(&mut self) {
        let unmasked: Vec<Option<f64>> = self
            .points
            .iter()
            .map(|p| if p.mask.is_some() { None } else { p.r })
            .collect();
        let smoothed = match self.order {
            SmoothingOrder::DifferenceThenSmooth => smooth(&unmasked, self.smoothing_window),
            SmoothingOrder::SmoothThenDifference => unmasked,
        };
        for (point, value) in self.points.iter_mut().zip(smoothed) {
            point.smoothed_r = value;
        }
    }

    pub fn discipline(&self) -> &str {
        &self.frequency.discipline
    }

    pub fn query(&self) -> &TermQuery {
        &self.frequency.query
    }

    pub fn bins(&self) -> &[TimeBin] {
        &self.frequency.bins
    }

    /// Points that carry a usable smoothed rate.
    pub fn usable(&self) -> impl Iterator<Item = &GrowthPoint> {
        self.points.iter().filter(|p| p.usable_rate().is_some())
    }

    /// Write `bin_start,n,N,f,r,smoothed_r,mask_reason`, one row per bin.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["bin_start", "n", "N", "f", "r", "smoothed_r", "mask_reason"])?;
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let freq = &self.frequency;
        for t in 0..freq.bins.len() {
            let point = t.checked_sub(1).map(|i| &self.points[i]);
            out.write_record([
                freq.bins[t].start_year.to_string(),
                freq.n[t].to_string(),
                freq.totals[t].to_string(),
                fmt(freq.f[t]),
                fmt(point.and_then(|p| p.r)),
                fmt(point.and_then(|p| p.smoothed_r)),
                point
                    .and_then(|p| p.mask)
                    .map(|m| m.as_str().to_string())
                    .unwrap_or_default(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Mask transitions whose two bins hold fewer than `threshold` matching
/// documents together. Points already masked keep their first reason.
pub fn apply_support_filter(mut growth: GrowthSeries, threshold: u32) -> GrowthSeries {
    for point in growth.points.iter_mut() {
        if point.mask.is_none() && point.support < threshold {
            point.mask = Some(MaskReason::LowSupport);
        }
    }
    growth.resmooth();
    growth
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendConfig {
    pub smoothing_window: usize,
    pub support_threshold: u32,
    pub order: SmoothingOrder,
}

impl Default for TrendConfig {
    fn default() -> Self {
        TrendConfig {
            smoothing_window: 3,
            support_threshold: 8,
            order: SmoothingOrder::DifferenceThenSmooth,
        }
    }
}

/// frequency → growth → support filter.
pub fn analyze(
    index: &CorpusIndex,
    query: &TermQuery,
    discipline: &str,
    config: &TrendConfig,
) -> Result<GrowthSeries, TrendError> {
    let freq = frequency_series(index, query, discipline)?;
    analyze_frequency(&freq, config)
}

pub fn analyze_frequency(freq: &FrequencySeries, config: &TrendConfig) -> Result<GrowthSeries, TrendError> {
    let growth = growth_series_with(freq, config.smoothing_window, config.order)?;
    Ok(apply_support_filter(growth, config.support_threshold))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bins(n: usize) -> Vec<TimeBin> {
        (0..n)
            .map(|i| TimeBin {
                start_year: 1974 + 2 * i as i32,
                width_years: 2,
            })
            .collect()
    }

    fn series(n: &[u32], totals: &[u32]) -> FrequencySeries {
        FrequencySeries::from_counts(
            "math",
            TermQuery::single("chaos").unwrap(),
            bins(n.len()),
            n.to_vec(),
            totals.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn frequency_examples() {
        let s = series(&[5, 0, 0], &[50, 0, 10]);
        assert_eq!(s.f, vec![Some(0.1), None, Some(0.0)]);
    }

    #[test]
    fn constant_frequency_has_zero_rate() {
        let g = growth_series(&series(&[10, 20, 30, 40], &[100, 200, 300, 400]), 3).unwrap();
        for p in &g.points {
            assert_eq!(p.r, Some(0.0));
            assert_eq!(p.smoothed_r, Some(0.0));
        }
    }

    #[test]
    fn doubling_gives_ln2() {
        let g = growth_series(&series(&[10, 20], &[100, 100]), 1).unwrap();
        assert!((g.points[0].r.unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn zero_and_missing_masks() {
        let g = growth_series(&series(&[0, 10, 0, 10], &[100, 100, 0, 100]), 3).unwrap();
        assert_eq!(g.points[0].mask, Some(MaskReason::ZeroFrequency));
        assert_eq!(g.points[0].r, None);
        assert_eq!(g.points[1].mask, Some(MaskReason::MissingBin));
        assert_eq!(g.points[2].mask, Some(MaskReason::MissingBin));
    }

    #[test]
    fn too_few_bins_and_bad_window() {
        assert!(matches!(growth_series(&series(&[1], &[10]), 3), Err(TrendError::TooFewBins(1))));
        assert!(matches!(
            growth_series(&series(&[1, 2], &[10, 10]), 2),
            Err(TrendError::InvalidWindow(2))
        ));
    }

    #[test]
    fn support_filter_boundary() {
        let g = growth_series(&series(&[3, 4, 4], &[100, 100, 100]), 1).unwrap();
        let g = apply_support_filter(g, 8);
        assert_eq!(g.points[0].mask, Some(MaskReason::LowSupport));
        assert_eq!(g.points[0].smoothed_r, None);
        assert_eq!(g.points[1].mask, None);

        let g = growth_series(&series(&[8, 9, 10], &[100, 100, 100]), 3).unwrap();
        let g = apply_support_filter(g, 8);
        assert!(g.points.iter().all(|p| p.mask.is_none()));
    }

    #[test]
    fn support_filter_keeps_first_reason() {
        let g = growth_series(&series(&[0, 2, 2], &[100, 100, 100]), 1).unwrap();
        let g = apply_support_filter(g, 8);
        assert_eq!(g.points[0].mask, Some(MaskReason::ZeroFrequency));
        assert_eq!(g.points[1].mask, Some(MaskReason::LowSupport));
    }

    #[test]
    fn smoothing_interior_is_centered_mean() {
        let values = [Some(1.0), Some(2.0), Some(6.0), Some(4.0), Some(5.0)];
        let s = smooth(&values, 3);
        assert!((s[2].unwrap() - 4.0).abs() < 1e-15);
        assert!((s[1].unwrap() - 3.0).abs() < 1e-15);
        assert!((s[0].unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let total: f64 = s.iter().flatten().sum();
        assert!((total - 18.0).abs() < 1e-12);
    }

    #[test]
    fn smoothing_skips_gaps() {
        let values = [Some(1.0), None, Some(3.0)];
        let s = smooth(&values, 3);
        assert_eq!(s, vec![Some(1.0), None, Some(3.0)]);
    }

    #[test]
    fn smooth_then_difference_mode() {
        let f = series(&[10, 20, 40, 80], &[100, 100, 100, 100]);
        let g = growth_series_with(&f, 3, SmoothingOrder::SmoothThenDifference).unwrap();
        // smoothed f: 0.15, 0.2333.., 0.4666.., 0.6
        assert!((g.points[1].r.unwrap() - (0.7 / 0.35f64).ln()).abs() < 1e-12);
        assert_eq!(g.points[1].smoothed_r, g.points[1].r);
    }

    #[test]
    fn csv_layout() {
        let g = growth_series(&series(&[5, 10], &[50, 50]), 3).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "bin_start,n,N,f,r,smoothed_r,mask_reason");
        assert_eq!(lines[1], "1974,5,50,0.1,,,");
        assert!(lines[2].starts_with("1976,10,50,0.2,0.693147"));
    }
}
