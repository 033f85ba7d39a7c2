//! Maximum-likelihood shape estimation for the Chi distribution.
//!
//! A Chi(k, sigma) variable x has x^2 ~ Gamma(k/2, 2 sigma^2), so with the
//! scale profiled out the shape solves
//!
//! ```text
//! ln(a) - digamma(a) = ln(mean(x^2)) - mean(ln(x^2)),   k = 2a
//! ```
//!
//! The left side is strictly decreasing in `a`, which lets a bracketed Newton
//! iteration converge from any starting point.

use statrs::function::gamma::{digamma, ln_gamma};

use crate::config::DspConfig;
use crate::error::DspError;

pub const MIN_SAMPLES: usize = 8;

/// Grid the sufficient statistic is snapped to. Rescaling the input changes
/// the statistic only by rounding noise far below this step, so the estimate
/// is exactly invariant to the input's scale.
const STAT_QUANTUM: f64 = 1.0 / (1u64 << 32) as f64;
const START_QUANTUM: f64 = 1.0 / (1u64 << 20) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeAxis {
    PerTimeFrame,
    PerFrequencyBin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSeries {
    pub values: Vec<f64>,
    pub axis: ShapeAxis,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiFitter {
    /// Samples below `floor * max(samples)` are raised to it before taking logs.
    pub floor: f64,
    pub min_shape: f64,
    pub max_shape: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ChiFitter {
    fn default() -> Self {
        Self::from_config(&DspConfig::default())
    }
}

impl ChiFitter {
    pub fn from_config(cfg: &DspConfig) -> Self {
        Self {
            floor: cfg.chi_floor,
            min_shape: cfg.chi_min_shape,
            max_shape: cfg.chi_max_shape,
            tolerance: cfg.chi_tolerance,
            max_iterations: cfg.chi_max_iterations,
        }
    }

    /// `ln(mean(y)) - mean(ln(y))` for `y = (x / max x)^2`, snapped to the grid.
    fn log_ratio(&self, samples: &[f64]) -> Result<f64, DspError> {
        if samples.len() < MIN_SAMPLES {
            return Err(DspError::TooFewSamples {
                needed: MIN_SAMPLES,
                got: samples.len(),
            });
        }
        let peak = samples.iter().fold(0.0_f64, |m, &x| m.max(x));
        if !(peak > 0.0) || !peak.is_finite() {
            return Err(DspError::AllZero);
        }
        let n = samples.len() as f64;
        let floor = self.floor;
        let mut sum_y = 0.0;
        let mut sum_ln_y = 0.0;
        for &x in samples {
            let r = (x / peak).max(floor);
            let y = r * r;
            sum_y += y;
            sum_ln_y += y.ln();
        }
        let s = (sum_y / n).ln() - sum_ln_y / n;
        Ok(((s.max(0.0)) / STAT_QUANTUM).round() * STAT_QUANTUM)
    }

    pub fn fit(&self, samples: &[f64]) -> Result<f64, DspError> {
        let s = self.log_ratio(samples)?;
        let lo = self.min_shape / 2.0;
        let hi = self.max_shape / 2.0;
        let g = |a: f64| a.ln() - digamma(a) - s;
        if g(hi) >= 0.0 {
            return Ok(self.max_shape);
        }
        if g(lo) <= 0.0 {
            return Ok(self.min_shape);
        }
        let (mut lo, mut hi) = (lo, hi);
        // Moment start: a = mean(y)^2 / var(y) for the normalized squares.
        let mut a = self.moment_start(samples).clamp(lo, hi);
        for _ in 0..self.max_iterations {
            let ga = g(a);
            if ga > 0.0 {
                lo = a;
            } else {
                hi = a;
            }
            let slope = 1.0 / a - trigamma(a);
            let mut next = a - ga / slope;
            if !(next > lo && next < hi) {
                next = (lo * hi).sqrt();
            }
            let done = (next - a).abs() <= self.tolerance * a;
            a = next;
            if done {
                break;
            }
        }
        Ok((2.0 * a).clamp(self.min_shape, self.max_shape))
    }

    fn moment_start(&self, samples: &[f64]) -> f64 {
        let peak = samples.iter().fold(0.0_f64, |m, &x| m.max(x));
        let n = samples.len() as f64;
        let ys: Vec<f64> = samples.iter().map(|x| (x / peak).powi(2)).collect();
        let mean = ys.iter().sum::<f64>() / n;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
        if var > 0.0 {
            // Snapped like the statistic so the Newton path, and therefore the
            // last bit of the estimate, does not depend on the input scale.
            ((mean * mean / var) / START_QUANTUM).round().max(1.0) * START_QUANTUM
        } else {
            f64::INFINITY
        }
    }
}

/// Maximum-likelihood Chi shape with the default fitter settings.
pub fn fit_chi_shape(samples: &[f64]) -> Result<f64, DspError> {
    ChiFitter::default().fit(samples)
}

/// Chi log-likelihood at shape `k` with the scale set to its maximizer,
/// `sigma^2 = mean(x^2) / k`.
pub fn chi_profile_log_likelihood(samples: &[f64], k: f64) -> f64 {
    let n = samples.len() as f64;
    let floor = 1e-300;
    let m2 = samples.iter().map(|x| x * x).sum::<f64>() / n;
    let mean_ln = samples.iter().map(|x| x.max(floor).ln()).sum::<f64>() / n;
    let sigma2 = m2 / k;
    n * ((1.0 - k / 2.0) * std::f64::consts::LN_2 + (k - 1.0) * mean_ln
        - m2 / (2.0 * sigma2)
        - ln_gamma(k / 2.0)
        - (k / 2.0) * sigma2.ln())
}

/// Trigamma via upward recurrence and the asymptotic series.
pub(crate) fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 12.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + inv
        + inv2 / 2.0
        + inv * inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0))))
}
