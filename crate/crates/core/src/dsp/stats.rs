use serde::{Deserialize, Serialize};

use crate::error::DspError;

/// Population moments: `std = sqrt(m2)`, `skewness = m3 / m2^1.5`,
/// `kurtosis = m4 / m2^2 - 3` (excess). A sequence without spread reports
/// zero for the three shape moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsQuad {
    pub mean: f64,
    pub std: f64,
    pub kurtosis: f64,
    pub skewness: f64,
}

impl StatsQuad {
    /// Ordered as (mean, std, kurtosis, skewness).
    pub fn to_array(self) -> [f64; 4] {
        [self.mean, self.std, self.kurtosis, self.skewness]
    }
}

pub fn descriptive_stats(x: &[f64]) -> Result<StatsQuad, DspError> {
    if x.is_empty() {
        return Err(DspError::Empty);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    // Rounding in the mean leaves a residue of a few ulps for constant input.
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let negligible = (4.0 * f64::EPSILON * scale).powi(2);
    if m2 <= negligible {
        return Ok(StatsQuad {
            mean,
            std: 0.0,
            kurtosis: 0.0,
            skewness: 0.0,
        });
    }
    Ok(StatsQuad {
        mean,
        std: m2.sqrt(),
        kurtosis: m4 / (m2 * m2) - 3.0,
        skewness: m3 / m2.powf(1.5),
    })
}
