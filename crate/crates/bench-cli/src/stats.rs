use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Confidence level of every interval the validators report.
pub const CONFIDENCE: f64 = 0.99;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Two-sided Wilson score interval for `successes` out of `trials`.
pub fn wilson(successes: u64, trials: u64, confidence: f64) -> Interval {
    if trials == 0 {
        return Interval { lo: 0.0, hi: 1.0 };
    }
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Interval { lo: (center - half).max(0.0), hi: (center + half).min(1.0) }
}

/// An observed proportion with its 99% Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub interval: Interval,
}

impl Rate {
    pub fn new(successes: u64, trials: u64) -> Rate {
        let estimate = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
        Rate { successes, trials, estimate, interval: wilson(successes, trials, CONFIDENCE) }
    }

    pub fn count(outcomes: impl IntoIterator<Item = bool>) -> Rate {
        let (mut s, mut t) = (0, 0);
        for ok in outcomes {
            s += u64::from(ok);
            t += 1;
        }
        Rate::new(s, t)
    }

    /// The data do not show the true rate to be below `target`.
    pub fn consistent_with_at_least(&self, target: f64) -> bool {
        self.trials > 0 && self.interval.hi >= target
    }

    /// The data do not show the true rate to be above `bound`.
    pub fn consistent_with_at_most(&self, bound: f64) -> bool {
        self.trials > 0 && self.interval.lo <= bound
    }
}

/// Nearest-rank quantile of unsorted data (`q` in [0, 1]).
pub fn quantile(data: &[f64], q: f64) -> f64 {
    assert!(!data.is_empty(), "quantile of no data");
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

/// The usual summary: 1%, 50%, 99% and the maximum.
pub fn quantile_summary(data: &[f64]) -> Vec<(f64, f64)> {
    [0.01, 0.5, 0.99, 1.0].iter().map(|&q| (q, quantile(data, q))).collect()
}
