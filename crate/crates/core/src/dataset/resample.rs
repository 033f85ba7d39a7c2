use std::f64::consts::PI;

use crate::config::DspConfig;
use crate::error::DatasetError;

/// Rational-ratio polyphase resampler with a Kaiser-windowed sinc kernel.
#[derive(Debug, Clone)]
pub struct Resampler {
    up: usize,
    down: usize,
    /// Taps on each side of the output instant, in input samples.
    half: usize,
    /// `up` phases of `2 * half` taps, or empty when the phase count is too
    /// large to tabulate.
    table: Vec<f64>,
    cutoff: f64,
    span: f64,
    beta: f64,
}

const MAX_TABULATED_PHASES: usize = 4096;

impl Resampler {
    pub fn new(from: u32, to: u32, cfg: &DspConfig) -> Result<Self, DatasetError> {
        if from == 0 || to == 0 {
            return Err(DatasetError::Resample { from, to });
        }
        let g = gcd(from as usize, to as usize);
        let up = to as usize / g;
        let down = from as usize / g;
        // Cycles per input sample.
        let cutoff = cfg.resampler_rolloff * 0.5 * (up as f64 / down as f64).min(1.0);
        let span = cfg.resampler_zero_crossings as f64 / (2.0 * cutoff);
        let half = span.ceil() as usize;
        let beta = kaiser_beta(cfg.resampler_stopband_db);
        let mut r = Self {
            up,
            down,
            half,
            table: Vec::new(),
            cutoff,
            span,
            beta,
        };
        if up <= MAX_TABULATED_PHASES {
            let mut table = Vec::with_capacity(up * 2 * half);
            for phase in 0..up {
                table.extend(r.phase_weights(phase));
            }
            r.table = table;
        }
        Ok(r)
    }

    fn kernel(&self, tau: f64) -> f64 {
        if tau.abs() >= self.span {
            return 0.0;
        }
        let x = 2.0 * self.cutoff * tau;
        let sinc = if x == 0.0 {
            1.0
        } else {
            (PI * x).sin() / (PI * x)
        };
        let r = tau / self.span;
        let window = bessel_i0(self.beta * (1.0 - r * r).sqrt()) / bessel_i0(self.beta);
        2.0 * self.cutoff * sinc * window
    }

    /// Weights for input samples `n0 - half + 1 ..= n0 + half`, normalized to unit DC gain.
    fn phase_weights(&self, phase: usize) -> Vec<f64> {
        let frac = phase as f64 / self.up as f64;
        let mut w: Vec<f64> = (0..2 * self.half)
            .map(|j| self.kernel(frac + (self.half as f64 - 1.0 - j as f64)))
            .collect();
        let sum: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= sum);
        w
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        (input_len * self.up).div_ceil(self.down)
    }

    pub fn process(&self, input: &[f64]) -> Vec<f64> {
        let n_out = self.output_len(input.len());
        let taps = 2 * self.half;
        let mut out = Vec::with_capacity(n_out);
        let mut scratch;
        for m in 0..n_out {
            let pos = m * self.down;
            let n0 = pos / self.up;
            let phase = pos % self.up;
            let weights: &[f64] = if self.table.is_empty() {
                scratch = self.phase_weights(phase);
                &scratch
            } else {
                &self.table[phase * taps..(phase + 1) * taps]
            };
            let first = n0 as isize - self.half as isize + 1;
            let mut acc = 0.0;
            for (j, w) in weights.iter().enumerate() {
                let n = first + j as isize;
                if n >= 0 && (n as usize) < input.len() {
                    acc += w * input[n as usize];
                }
            }
            out.push(acc);
        }
        out
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn kaiser_beta(attenuation_db: f64) -> f64 {
    if attenuation_db > 50.0 {
        0.1102 * (attenuation_db - 8.7)
    } else if attenuation_db >= 21.0 {
        0.5842 * (attenuation_db - 21.0).powf(0.4) + 0.07886 * (attenuation_db - 21.0)
    } else {
        0.0
    }
}

/// Modified Bessel function of the first kind, order zero (power series).
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= (half / k as f64).powi(2);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}
