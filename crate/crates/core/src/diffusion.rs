//! Logistic concept diffusion.
//!
//! With `p_m` potential users and `p` current users, adoption grows at
//! `R = (c / p_m) · p · (p_m − p)`, which integrates to
//! `p(t) = p_m / (1 + ((p_m − p_0) / p_0) · e^{−ct})`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiffusionError {
    #[error("adopter count {p} outside [0, {p_m}]")]
    OutOfRangeP { p: f64, p_m: f64 },
    #[error("invalid diffusion parameters: {0}")]
    InvalidParams(String),
    #[error("step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("times must be finite and sorted ascending")]
    UnsortedTimes,
    #[error("series has no growth to fit")]
    NoGrowthSignal,
    #[error("fit needs at least 5 points, got {0}")]
    DegenerateSeries(usize),
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
}

impl DiffusionError {
    pub fn code(&self) -> &'static str {
        match self {
            DiffusionError::OutOfRangeP { .. } => "out_of_range_p",
            DiffusionError::InvalidParams(_) => "invalid_params",
            DiffusionError::InvalidStep(_) => "invalid_step",
            DiffusionError::UnsortedTimes => "unsorted_times",
            DiffusionError::NoGrowthSignal => "no_growth_signal",
            DiffusionError::DegenerateSeries(_) => "degenerate_series",
            DiffusionError::InvalidTrajectory(_) => "invalid_trajectory",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionParams {
    /// growth constant, per unit time
    pub c: f64,
    /// potential adopters
    pub p_m: f64,
    /// adopters at t = 0
    pub p_0: f64,
}

impl DiffusionParams {
    pub fn new(c: f64, p_m: f64, p_0: f64) -> Result<Self, DiffusionError> {
        let params = DiffusionParams { c, p_m, p_0 };
        params.validate()?;
        Ok(params)
    }

    /// c > 0, p_m > 0, 0 < p_0 < p_m.
    pub fn validate(&self) -> Result<(), DiffusionError> {
        let DiffusionParams { c, p_m, p_0 } = *self;
        if !(c.is_finite() && c > 0.0) {
            return Err(DiffusionError::InvalidParams(format!("c must be positive, got {c}")));
        }
        if !(p_m.is_finite() && p_m > 0.0) {
            return Err(DiffusionError::InvalidParams(format!("p_m must be positive, got {p_m}")));
        }
        if !(p_0.is_finite() && p_0 > 0.0 && p_0 < p_m) {
            return Err(DiffusionError::InvalidParams(format!(
                "p_0 must lie strictly between 0 and p_m={p_m}, got {p_0}"
            )));
        }
        Ok(())
    }

    /// Closed-form adopters at time `t`.
    pub fn at(&self, t: f64) -> f64 {
        let odds = (self.p_m - self.p_0) / self.p_0;
        self.p_m / (1.0 + odds * (-self.c * t).exp())
    }

    /// Time at which p = p_m / 2 and the rate peaks.
    pub fn inflection_time(&self) -> f64 {
        ((self.p_m - self.p_0) / self.p_0).ln() / self.c
    }

    /// c · p_m / 4.
    pub fn max_rate(&self) -> f64 {
        self.c * self.p_m / 4.0
    }
}

fn rate_unchecked(p: f64, params: &DiffusionParams) -> f64 {
    // p · (p_m − p) first so that R(p) and R(p_m − p) multiply the same pair
    params.c * (p * (params.p_m - p)) / params.p_m
}

/// R = (c / p_m) · p · (p_m − p).
pub fn adoption_rate(p: f64, params: &DiffusionParams) -> Result<f64, DiffusionError> {
    if !(0.0..=params.p_m).contains(&p) {
        return Err(DiffusionError::OutOfRangeP { p, p_m: params.p_m });
    }
    Ok(rate_unchecked(p, params))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdoptionTrajectory {
    pub times: Vec<f64>,
    pub p: Vec<f64>,
}

impl AdoptionTrajectory {
    pub fn new(times: Vec<f64>, p: Vec<f64>) -> Result<Self, DiffusionError> {
        if times.len() != p.len() {
            return Err(DiffusionError::InvalidTrajectory(format!(
                "{} times but {} values",
                times.len(),
                p.len()
            )));
        }
        check_sorted(&times)?;
        if p.iter().any(|v| !v.is_finite()) {
            return Err(DiffusionError::InvalidTrajectory("non-finite adopter count".into()));
        }
        Ok(AdoptionTrajectory { times, p })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn check_sorted(times: &[f64]) -> Result<(), DiffusionError> {
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(DiffusionError::UnsortedTimes);
    }
    Ok(())
}

pub fn trajectory_closed_form(
    params: &DiffusionParams,
    times: &[f64],
) -> Result<AdoptionTrajectory, DiffusionError> {
    params.validate()?;
    check_sorted(times)?;
    Ok(AdoptionTrajectory {
        times: times.to_vec(),
        p: times.iter().map(|&t| params.at(t)).collect(),
    })
}

/// Forward Euler from t = 0 to `t_end`, clamped to [0, p_m].
///
/// `p_0 = 0` is accepted here and stays at the fixed point.
pub fn trajectory_euler(
    params: &DiffusionParams,
    t_end: f64,
    dt: f64,
) -> Result<AdoptionTrajectory, DiffusionError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(DiffusionError::InvalidStep(dt));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(DiffusionError::InvalidParams(format!("t_end must be non-negative, got {t_end}")));
    }
    let DiffusionParams { c, p_m, p_0 } = *params;
    if !(c.is_finite() && c > 0.0 && p_m.is_finite() && p_m > 0.0 && (0.0..=p_m).contains(&p_0)) {
        return Err(DiffusionError::InvalidParams(format!("{params:?}")));
    }
    let steps = (t_end / dt).round() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut p = Vec::with_capacity(steps + 1);
    let mut current = p_0;
    times.push(0.0);
    p.push(current);
    for i in 1..=steps {
        current = (current + dt * rate_unchecked(current, params)).clamp(0.0, p_m);
        times.push(i as f64 * dt);
        p.push(current);
    }
    Ok(AdoptionTrajectory { times, p })
}

/// Fitted parameters. `p_0` is the adopter count at `t0`, the first
/// timestamp of the fitted trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub c: f64,
    pub p_m: f64,
    pub p_0: f64,
    pub rmse: f64,
    pub n_points: usize,
    pub t0: f64,
}

impl FitReport {
    pub fn params(&self) -> DiffusionParams {
        DiffusionParams {
            c: self.c,
            p_m: self.p_m,
            p_0: self.p_0,
        }
    }
}

const C_GRID: usize = 60;
const PM_GRID: usize = 40;
const PM_MAX_MULTIPLE: f64 = 10.0;
const REFINE_TOLERANCE: f64 = 1e-8;
const REFINE_MAX_ITERATIONS: usize = 200_000;

struct Objective<'a> {
    tau: &'a [f64],
    y: &'a [f64],
}

impl Objective<'_> {
    /// Sum of squared residuals at x = (ln c, ln p_m, ln p_0).
    fn sse(&self, x: &[f64; 3]) -> f64 {
        let params = DiffusionParams {
            c: x[0].exp(),
            p_m: x[1].exp(),
            p_0: x[2].exp(),
        };
        if params.p_0 >= params.p_m || !params.c.is_finite() || !params.p_m.is_finite() {
            return f64::INFINITY;
        }
        self.tau
            .iter()
            .zip(self.y)
            .map(|(&t, &y)| {
                let r = params.at(t) - y;
                r * r
            })
            .sum()
    }
}

fn log_space(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
}

/// Hooke-Jeeves pattern search in log-parameter space.
fn refine(objective: &Objective, start: [f64; 3]) -> [f64; 3] {
    let mut base = start;
    let mut base_value = objective.sse(&base);
    let mut step = 0.1;

    let explore = |from: [f64; 3], from_value: f64, step: f64| -> ([f64; 3], f64) {
        let mut x = from;
        let mut value = from_value;
        for axis in 0..3 {
            for delta in [step, -step] {
                let mut trial = x;
                trial[axis] += delta;
                let trial_value = objective.sse(&trial);
                if trial_value < value {
                    x = trial;
                    value = trial_value;
                    break;
                }
            }
        }
        (x, value)
    };

    for _ in 0..REFINE_MAX_ITERATIONS {
        if step < REFINE_TOLERANCE {
            break;
        }
        let (mut next, mut next_value) = explore(base, base_value, step);
        if next_value < base_value {
            // pattern moves while they keep paying off
            loop {
                let pattern = [
                    2.0 * next[0] - base[0],
                    2.0 * next[1] - base[1],
                    2.0 * next[2] - base[2],
                ];
                base = next;
                base_value = next_value;
                let pattern_value = objective.sse(&pattern);
                let (candidate, candidate_value) = explore(pattern, pattern_value, step);
                if candidate_value < base_value {
                    next = candidate;
                    next_value = candidate_value;
                } else {
                    break;
                }
            }
        } else {
            step *= 0.5;
        }
    }
    base
}

/// Least-squares logistic fit: grid scan over (c, p_m) with p_0 pinned to
/// the first observation, then pattern-search refinement of all three.
pub fn fit(trajectory: &AdoptionTrajectory) -> Result<FitReport, DiffusionError> {
    let n = trajectory.len();
    if n < 5 {
        return Err(DiffusionError::DegenerateSeries(n));
    }
    check_sorted(&trajectory.times)?;
    let y = &trajectory.p;
    let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = y.iter().copied().fold(f64::INFINITY, f64::min);
    if !max.is_finite() || !min.is_finite() {
        return Err(DiffusionError::InvalidTrajectory("non-finite adopter count".into()));
    }
    if max == min || max <= 0.0 {
        return Err(DiffusionError::NoGrowthSignal);
    }
    let t0 = trajectory.times[0];
    let tau: Vec<f64> = trajectory.times.iter().map(|t| t - t0).collect();
    let span = tau[n - 1];
    if span <= 0.0 {
        return Err(DiffusionError::InvalidTrajectory("all points share one timestamp".into()));
    }
    let objective = Objective { tau: &tau, y };

    let smallest_positive = y.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    let first = if y[0] > 0.0 { y[0] } else { smallest_positive * 0.1 };

    let mut best = [0.0; 3];
    let mut best_value = f64::INFINITY;
    for c in log_space(0.1 / span, 100.0 / span, C_GRID) {
        for multiple in log_space(1.001, PM_MAX_MULTIPLE, PM_GRID) {
            let p_m = max * multiple;
            let p_0 = first.min(p_m * 0.999);
            let x = [c.ln(), p_m.ln(), p_0.ln()];
            let value = objective.sse(&x);
            if value < best_value {
                best = x;
                best_value = value;
            }
        }
    }
    let x = refine(&objective, best);
    let rmse = (objective.sse(&x) / n as f64).sqrt();
    Ok(FitReport {
        c: x[0].exp(),
        p_m: x[1].exp(),
        p_0: x[2].exp(),
        rmse,
        n_points: n,
        t0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_params() -> DiffusionParams {
        DiffusionParams::new(0.6, 1000.0, 10.0).unwrap()
    }

    #[test]
    fn rate_examples() {
        let params = DiffusionParams::new(0.6, 100.0, 1.0).unwrap();
        assert_eq!(adoption_rate(0.0, &params).unwrap(), 0.0);
        assert_eq!(adoption_rate(100.0, &params).unwrap(), 0.0);
        assert!((adoption_rate(50.0, &params).unwrap() - 15.0).abs() < 1e-12);
        assert!(matches!(
            adoption_rate(100.5, &params),
            Err(DiffusionError::OutOfRangeP { .. })
        ));
        assert!(adoption_rate(-1.0, &params).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(DiffusionParams::new(0.0, 10.0, 1.0).is_err());
        assert!(DiffusionParams::new(1.0, 10.0, 10.0).is_err());
        assert!(DiffusionParams::new(1.0, 10.0, 0.0).is_err());
        assert!(DiffusionParams::new(1.0, -1.0, 0.5).is_err());
    }

    #[test]
    fn closed_form_asymptote_and_inflection() {
        let params = sample_params();
        let far = trajectory_closed_form(&params, &[1e4]).unwrap();
        assert!((far.p[0] - 1000.0).abs() < 1e-9);

        let half = DiffusionParams::new(0.6, 1000.0, 500.0).unwrap();
        let t = trajectory_closed_form(&half, &[0.0]).unwrap();
        assert_eq!(t.p[0], 500.0);
        assert_eq!(adoption_rate(500.0, &half).unwrap(), half.max_rate());
        assert_eq!(half.inflection_time(), 0.0);
    }

    #[test]
    fn closed_form_rejects_unsorted() {
        assert!(matches!(
            trajectory_closed_form(&sample_params(), &[1.0, 0.0]),
            Err(DiffusionError::UnsortedTimes)
        ));
    }

    #[test]
    fn euler_matches_closed_form_at_ten() {
        let params = sample_params();
        let euler = trajectory_euler(&params, 10.0, 1e-3).unwrap();
        let exact = params.at(10.0);
        let last = *euler.p.last().unwrap();
        assert_eq!(*euler.times.last().unwrap(), 10.0);
        assert!(((last - exact) / exact).abs() < 1e-3);
    }

    #[test]
    fn euler_edge_cases() {
        let zero = DiffusionParams {
            c: 0.6,
            p_m: 1000.0,
            p_0: 0.0,
        };
        let t = trajectory_euler(&zero, 5.0, 0.5).unwrap();
        assert!(t.p.iter().all(|&p| p == 0.0));

        let half = DiffusionParams::new(0.6, 1000.0, 500.0).unwrap();
        let t = trajectory_euler(&half, 1.0, 1.0).unwrap();
        assert_eq!(t.p[1] - t.p[0], 0.6 * 1000.0 / 4.0);

        assert!(matches!(
            trajectory_euler(&half, 1.0, 0.0),
            Err(DiffusionError::InvalidStep(_))
        ));
        assert!(trajectory_euler(&half, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn euler_clamps_to_capacity() {
        let params = DiffusionParams::new(5.0, 10.0, 9.0).unwrap();
        let t = trajectory_euler(&params, 10.0, 1.0).unwrap();
        assert!(t.p.iter().all(|&p| (0.0..=10.0).contains(&p)));
    }

    #[test]
    fn fit_recovers_noise_free() {
        let params = sample_params();
        let times: Vec<f64> = (0..=20).map(f64::from).collect();
        let traj = trajectory_closed_form(&params, &times).unwrap();
        let report = fit(&traj).unwrap();
        assert!((report.c - 0.6).abs() / 0.6 < 0.01, "{report:?}");
        assert!((report.p_m - 1000.0).abs() / 1000.0 < 0.01, "{report:?}");
        assert!((report.p_0 - 10.0).abs() / 10.0 < 0.01, "{report:?}");
        assert!(report.rmse < 1e-3);
        assert_eq!(report.n_points, 21);
    }

    #[test]
    fn fit_uses_first_timestamp_as_origin() {
        let params = sample_params();
        let times: Vec<f64> = (0..=10).map(|i| 1974.0 + 2.0 * i as f64).collect();
        let shifted: Vec<f64> = times.iter().map(|t| t - 1974.0).collect();
        let traj = AdoptionTrajectory::new(
            times,
            trajectory_closed_form(&params, &shifted).unwrap().p,
        )
        .unwrap();
        let report = fit(&traj).unwrap();
        assert_eq!(report.t0, 1974.0);
        assert!((report.c - 0.6).abs() / 0.6 < 0.01, "{report:?}");
    }

    #[test]
    fn fit_errors() {
        let flat = AdoptionTrajectory::new((0..6).map(f64::from).collect(), vec![3.0; 6]).unwrap();
        assert!(matches!(fit(&flat), Err(DiffusionError::NoGrowthSignal)));
        let short = AdoptionTrajectory::new(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        assert!(matches!(fit(&short), Err(DiffusionError::DegenerateSeries(2))));
        assert!(AdoptionTrajectory::new(vec![1.0, 0.0], vec![1.0, 2.0]).is_err());
    }
}
