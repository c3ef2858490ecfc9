//! Core value types shared by every model: calendar arithmetic relative to the
//! epidemic start date, the exponential prevalence curve, and deterministic
//! random-stream derivation.

use std::fmt;

use chrono::{Duration, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Days elapsed since the origin's epidemic start date (day 0 = start date).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DayIndex(pub i64);

impl DayIndex {
    pub fn from_date(start: NaiveDate, date: NaiveDate) -> Self {
        DayIndex((date - start).num_days())
    }

    pub fn to_date(self, start: NaiveDate) -> NaiveDate {
        start + Duration::days(self.0)
    }

    pub fn value(self) -> i64 {
        self.0
    }
}

impl fmt::Display for DayIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "day {}", self.0)
    }
}

/// Parameters of the log-linear prevalence curve and traveler sampling bias.
///
/// `beta0` is fixed from the announced initial case count; it is never sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthParams {
    pub beta0: f64,
    pub beta1: f64,
    pub alpha: f64,
}

impl GrowthParams {
    pub fn new(initial_cases: u64, population: u64, beta1: f64, alpha: f64) -> Self {
        GrowthParams {
            beta0: log_initial_prevalence(initial_cases, population),
            beta1,
            alpha,
        }
    }
}

/// `log(initial_cases / population)`.
pub fn log_initial_prevalence(initial_cases: u64, population: u64) -> f64 {
    (initial_cases as f64).ln() - (population as f64).ln()
}

/// Prevalence at day `t`, capped at one.
pub fn prevalence(p: &GrowthParams, t: DayIndex) -> f64 {
    prevalence_at(p.beta0, p.beta1, t.0 as f64)
}

#[inline]
pub(crate) fn prevalence_at(beta0: f64, beta1: f64, t: f64) -> f64 {
    (beta0 + beta1 * t).exp().min(1.0)
}

/// Doubling time in days for a per-day growth rate.
pub fn doubling_time(beta1: f64) -> Result<f64> {
    if !(beta1 > 0.0) || !beta1.is_finite() {
        return Err(Error::Domain(format!(
            "doubling time undefined for non-growing epidemic (beta1 = {beta1})"
        )));
    }
    Ok(std::f64::consts::LN_2 / beta1)
}

/// A root seed plus a hierarchical label identifying one random stream.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub label: String,
}

impl RngSeed {
    pub fn root(seed: u64) -> Self {
        RngSeed {
            seed,
            label: String::new(),
        }
    }

    /// Extends the label path, e.g. `root.child("chain-0")`.
    pub fn child(&self, label: impl fmt::Display) -> Self {
        let label = if self.label.is_empty() {
            label.to_string()
        } else {
            format!("{}/{}", self.label, label)
        };
        RngSeed {
            seed: self.seed,
            label,
        }
    }

    pub fn stream(&self) -> ChaCha8Rng {
        derive_stream(self.seed, &self.label)
    }
}

/// Deterministic stream for `(seed, label)`: SHA-256 of the little-endian seed
/// followed by the label bytes seeds a ChaCha8 generator.
pub fn derive_stream(seed: u64, label: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update([0u8]);
    hasher.update(label.as_bytes());
    let digest: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn draws(seed: u64, label: &str) -> Vec<u64> {
        let mut rng = derive_stream(seed, label);
        (0..100).map(|_| rng.random::<u64>()).collect()
    }

    #[test]
    fn prevalence_examples() {
        let flat = GrowthParams {
            beta0: 1e-6f64.ln(),
            beta1: 0.0,
            alpha: 0.0,
        };
        assert!((prevalence(&flat, DayIndex(50)) - 1e-6).abs() < 1e-18);

        let p = GrowthParams {
            beta0: 1e-4f64.ln(),
            beta1: 0.1,
            alpha: 0.0,
        };
        assert!((prevalence(&p, DayIndex(0)) - 1e-4).abs() < 1e-16);
        assert!((prevalence(&p, DayIndex(10)) - 2.718_281_828e-4).abs() < 1e-12);
    }

    #[test]
    fn prevalence_caps_at_one() {
        let p = GrowthParams {
            beta0: -1.0,
            beta1: 0.5,
            alpha: 0.0,
        };
        assert_eq!(prevalence(&p, DayIndex(100)), 1.0);
    }

    #[test]
    fn doubling_time_examples() {
        assert!((doubling_time(0.1).unwrap() - 6.931_471_805_6).abs() < 1e-9);
        assert!((doubling_time(std::f64::consts::LN_2).unwrap() - 1.0).abs() < 1e-15);
        assert!((doubling_time(0.175).unwrap() - 3.960_841_0).abs() < 1e-6);
        assert!(doubling_time(0.0).is_err());
        assert!(doubling_time(-0.2).is_err());
        assert!(doubling_time(f64::NAN).is_err());
    }

    #[test]
    fn stream_derivation() {
        assert_eq!(draws(42, "chain-0"), draws(42, "chain-0"));
        assert_ne!(draws(42, "chain-0"), draws(42, "chain-1"));
        assert_ne!(draws(42, "x"), draws(43, "x"));
    }

    #[test]
    fn child_labels_compose() {
        let s = RngSeed::root(7).child("seq").child("chain-2");
        assert_eq!(s.label, "seq/chain-2");
        assert_eq!(s.stream().random::<u64>(), derive_stream(7, "seq/chain-2").random::<u64>());
    }

    #[test]
    fn day_index_round_trip() {
        let start = NaiveDate::from_ymd_opt(2019, 12, 1).unwrap();
        let mut d = NaiveDate::from_ymd_opt(2019, 1, 1).unwrap();
        let end = NaiveDate::from_ymd_opt(2021, 12, 31).unwrap();
        while d <= end {
            assert_eq!(DayIndex::from_date(start, d).to_date(start), d);
            d = d.succ_opt().unwrap();
        }
        assert_eq!(
            DayIndex::from_date(start, NaiveDate::from_ymd_opt(2020, 1, 13).unwrap()),
            DayIndex(43)
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn doubling_identity(beta1 in 1e-6f64..10.0) {
                let td = doubling_time(beta1).unwrap();
                prop_assert!((td * beta1 - std::f64::consts::LN_2).abs() <= 4.0 * f64::EPSILON);
            }

            #[test]
            fn prevalence_increasing(b1 in 0.001f64..0.5, t in 0i64..60) {
                let p = GrowthParams { beta0: -20.0, beta1: b1, alpha: 0.0 };
                let a = prevalence(&p, DayIndex(t));
                let b = prevalence(&p, DayIndex(t + 1));
                prop_assert!(b > a || a == 1.0);
            }
        }
    }
}
