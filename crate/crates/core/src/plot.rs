//! Growth-rate line charts as standalone SVG 1.1.

use std::fmt::Write as _;

use thiserror::Error;

use crate::trend::GrowthSeries;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("no series has an unmasked point to draw")]
    EmptySeriesSet,
}

impl PlotError {
    pub fn code(&self) -> &'static str {
        match self {
            PlotError::EmptySeriesSet => "empty_series_set",
        }
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 180.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 48.0;
const PALETTE: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Default)]
pub struct PlotOptions {
    pub title: Option<String>,
    /// text placed verbatim (escaped) inside `<metadata>`
    pub metadata: Option<String>,
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Runs of consecutive unmasked points as (year, smoothed rate).
fn segments(series: &GrowthSeries) -> Vec<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    for point in &series.points {
        match point.usable_rate() {
            Some(r) => current.push((point.bin.start_year as f64, r)),
            None if !current.is_empty() => out.push(std::mem::take(&mut current)),
            None => {}
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let magnitude = 10f64.powf(raw.log10().floor());
    let scaled = raw / magnitude;
    let nice = if scaled <= 1.0 {
        1.0
    } else if scaled <= 2.0 {
        2.0
    } else if scaled <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * magnitude
}

fn fmt_num(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

type Drawn<'a> = (&'a GrowthSeries, Vec<Vec<(f64, f64)>>);

/// Smoothed log growth rate against bin start year, one line per
/// (term, discipline). Masked points break the line.
pub fn plot_growth(series: &[GrowthSeries], options: &PlotOptions) -> Result<String, PlotError> {
    let drawn: Vec<Drawn> = series
        .iter()
        .map(|s| (s, segments(s)))
        .filter(|(_, segs)| !segs.is_empty())
        .collect();
    if drawn.is_empty() {
        return Err(PlotError::EmptySeriesSet);
    }

    let points = drawn.iter().flat_map(|(_, segs)| segs.iter().flatten());
    let (mut x_min, mut x_max, mut y_min, mut y_max) = (f64::MAX, f64::MIN, 0.0f64, 0.0f64);
    for &(x, y) in points {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    for (s, _) in &drawn {
        for bin in s.bins() {
            x_min = x_min.min(bin.start_year as f64);
            x_max = x_max.max(bin.start_year as f64);
        }
    }
    if x_max - x_min < 1.0 {
        x_min -= 1.0;
        x_max += 1.0;
    }
    if y_max - y_min < 1e-9 {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    if let Some(meta) = &options.metadata {
        let _ = writeln!(svg, "<metadata>{}</metadata>", escape(meta));
    }
    if let Some(title) = &options.title {
        let _ = writeln!(svg, "<title>{}</title>", escape(title));
    }
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    // axes
    let (left, right, top, bottom) = (MARGIN_LEFT, MARGIN_LEFT + plot_w, MARGIN_TOP, MARGIN_TOP + plot_h);
    let _ = writeln!(
        svg,
        r#"<g stroke="black" stroke-width="1"><line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}"/><line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}"/></g>"#
    );
    let _ = writeln!(svg, r#"<g font-family="sans-serif" font-size="11" fill="black">"#);
    let x_step = tick_step(x_max - x_min, 8.0).max(1.0);
    let mut x = (x_min / x_step).ceil() * x_step;
    while x <= x_max + 1e-9 {
        let px = sx(x);
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{bottom}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            bottom + 4.0,
            bottom + 16.0,
            fmt_num(x)
        );
        x += x_step;
    }
    let y_step = tick_step(y_max - y_min, 6.0);
    let mut y = (y_min / y_step).ceil() * y_step;
    while y <= y_max + 1e-12 {
        let py = sy(y);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{left}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            left - 4.0,
            left - 6.0,
            py + 4.0,
            fmt_num(y)
        );
        y += y_step;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">bin start year</text>"#,
        left + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">smoothed log growth rate</text>"#,
        top + plot_h / 2.0,
        top + plot_h / 2.0
    );
    let _ = writeln!(svg, "</g>");

    let zero = sy(0.0);
    let _ = writeln!(
        svg,
        r#"<line class="zero" x1="{left}" y1="{zero:.2}" x2="{right}" y2="{zero:.2}" stroke="gray" stroke-width="1" stroke-dasharray="2,3"/>"#
    );

    for (i, (s, segs)) in drawn.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let label = format!("{} ({})", s.query(), s.discipline());
        let _ = writeln!(svg, r#"<g class="series" stroke="{color}" fill="none" stroke-width="2">"#);
        let _ = writeln!(svg, "<title>{}</title>", escape(&label));
        for seg in segs {
            let coords: Vec<String> = seg.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            if coords.len() == 1 {
                let (x, y) = seg[0];
                let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(x), sy(y));
            } else {
                let _ = writeln!(svg, r#"<polyline points="{}"/>"#, coords.join(" "));
            }
        }
        let _ = writeln!(svg, "</g>");
        let ly = MARGIN_TOP + 12.0 + 18.0 * i as f64;
        let lx = right + 12.0;
        let _ = writeln!(
            svg,
            r#"<g class="legend"><line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11">{}</text></g>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{TermQuery, TimeBin};
    use crate::trend::{analyze_frequency, FrequencySeries, TrendConfig};

    fn series(term: &str, n: Vec<u32>) -> GrowthSeries {
        let bins = (0..n.len())
            .map(|i| TimeBin { start_year: 1974 + 2 * i as i32, width_years: 2 })
            .collect();
        let totals = vec![1000; n.len()];
        let freq = FrequencySeries::from_counts("psychology", TermQuery::single(term).unwrap(), bins, n, totals).unwrap();
        analyze_frequency(&freq, &TrendConfig::default()).unwrap()
    }

    #[test]
    fn all_masked_is_empty_set() {
        let s = series("mbd", vec![0, 0, 1, 2, 1]);
        assert!(matches!(plot_growth(&[s], &PlotOptions::default()), Err(PlotError::EmptySeriesSet)));
        assert!(plot_growth(&[], &PlotOptions::default()).is_err());
    }

    #[test]
    fn constant_series_sits_on_zero_rule() {
        let s = series("chaos", vec![50; 6]);
        let svg = plot_growth(&[s], &PlotOptions::default()).unwrap();
        let zero_y = svg
            .lines()
            .find(|l| l.contains(r#"class="zero""#))
            .and_then(|l| l.split("y1=\"").nth(1))
            .and_then(|rest| rest.split('"').next())
            .unwrap()
            .to_string();
        let polyline = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let ys: Vec<&str> = polyline
            .trim_start_matches(r#"<polyline points=""#)
            .trim_end_matches(r#""/>"#)
            .split(' ')
            .map(|p| p.split(',').nth(1).unwrap())
            .collect();
        assert!(ys.iter().all(|y| *y == zero_y));
        assert!(svg.contains("stroke-dasharray"));
    }

    #[test]
    fn masked_points_split_lines_and_escape_labels() {
        let a = series("mbd", vec![100, 120, 150, 0, 0, 200, 240, 300]);
        let options = PlotOptions { title: Some("a&b".into()), metadata: Some("<cfg>".into()) };
        let svg = plot_growth(&[a], &options).unwrap();
        assert!(svg.contains("<title>a&amp;b</title>"));
        assert!(svg.contains("mbd (psychology)"));
        assert!(svg.contains("<metadata>&lt;cfg&gt;</metadata>"));
        assert!(svg.matches("<polyline").count() + svg.matches("<circle").count() >= 2);
        assert!(svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
