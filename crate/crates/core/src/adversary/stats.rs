use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes in `n` trials at quantile `z`.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((centre - half).clamp(0.0, 1.0).min(p), (centre + half).clamp(0.0, 1.0).max(p))
}

/// Trials in which each kind of check fired. A trial may count under
/// several headings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Breakdown {
    pub validation_1: u64,
    pub validation_2: u64,
    pub decode_mismatch: u64,
    pub ordering: u64,
}

impl Breakdown {
    fn merge(self, o: Breakdown) -> Breakdown {
        Breakdown {
            validation_1: self.validation_1 + o.validation_1,
            validation_2: self.validation_2 + o.validation_2,
            decode_mismatch: self.decode_mismatch + o.decode_mismatch,
            ordering: self.ordering + o.ordering,
        }
    }
}

/// Detection counts of a batch of trials.
///
/// Only the integer counts are stored state; rate and interval are derived,
/// so merging in any order gives identical values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionStats {
    pub trials: u64,
    pub detected: u64,
    pub breakdown: Breakdown,
    pub detection_rate: f64,
    pub wilson_interval: (f64, f64),
}

impl Default for DetectionStats {
    fn default() -> Self {
        Self::from_counts(0, 0, Breakdown::default())
    }
}

impl DetectionStats {
    pub fn from_counts(trials: u64, detected: u64, breakdown: Breakdown) -> Self {
        assert!(detected <= trials, "detected {detected} > trials {trials}");
        let detection_rate = if trials == 0 { 0.0 } else { detected as f64 / trials as f64 };
        DetectionStats { trials, detected, breakdown, detection_rate, wilson_interval: wilson(detected, trials, Z95) }
    }

    /// One trial.
    pub fn single(detected: bool, breakdown: Breakdown) -> Self {
        Self::from_counts(1, detected as u64, breakdown)
    }

    pub fn merge(&self, other: &DetectionStats) -> DetectionStats {
        Self::from_counts(self.trials + other.trials, self.detected + other.detected, self.breakdown.merge(other.breakdown))
    }

    /// Fraction of trials in which the attack went unnoticed.
    pub fn acceptance_rate(&self) -> f64 {
        1.0 - self.detection_rate
    }

    /// Whether `p` lies inside the Wilson interval at quantile `z`.
    pub fn consistent_with(&self, p: f64, z: f64) -> bool {
        let (lo, hi) = wilson(self.detected, self.trials, z);
        // exact endpoints at 0 and 1 are reachable only by exact rates
        lo - 1e-12 <= p && p <= hi + 1e-12
    }
}

/// Pearson chi-square test of `counts` against the uniform distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub critical: f64,
    pub uniform: bool,
}

/// Tests `counts` for uniformity at significance `alpha`.
pub fn chi_square_uniform(counts: &[u64], alpha: f64) -> ChiSquareTest {
    let total: u64 = counts.iter().sum();
    let k = counts.len();
    assert!(k >= 2 && total > 0, "need at least two cells and one sample");
    let expected = total as f64 / k as f64;
    let statistic = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((k - 1) as f64).expect("positive degrees of freedom");
    let critical = dist.inverse_cdf(1.0 - alpha);
    ChiSquareTest { statistic, critical, uniform: statistic <= critical }
}
