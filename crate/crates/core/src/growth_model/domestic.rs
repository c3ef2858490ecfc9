use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::DailyCount;

const MAX_ITERATIONS: usize = 100;
const Z_975: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomesticFit {
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub intercept: f64,
    pub iterations: usize,
}

fn poisson_loglik(a: f64, b: f64, t: &[f64], y: &[f64]) -> f64 {
    t.iter()
        .zip(y)
        .map(|(&t, &y)| {
            let eta = a + b * t;
            y * eta - eta.exp()
        })
        .sum()
}

/// Poisson log-linear regression of daily counts on the day offset from the
/// first date, fitted by Newton's method with step halving. Returns the slope
/// with a Wald 95% interval.
pub fn domestic_fit(series: &[DailyCount]) -> Result<DomesticFit> {
    let nonzero = series.iter().filter(|c| c.new_cases > 0).count();
    if nonzero == 0 {
        return Err(Error::Domain("domestic series has no nonzero counts".into()));
    }
    if nonzero < 3 {
        return Err(Error::Domain(format!(
            "domestic fit needs at least 3 nonzero counts, got {nonzero}"
        )));
    }
    let first = series[0].date;
    let t: Vec<f64> = series.iter().map(|c| (c.date - first).num_days() as f64).collect();
    let y: Vec<f64> = series.iter().map(|c| c.new_cases as f64).collect();
    let mut a = (y.iter().sum::<f64>() / y.len() as f64).ln();
    let mut b = 0.0;
    let mut ll = poisson_loglik(a, b, &t, &y);
    for it in 1..=MAX_ITERATIONS {
        let (mut g0, mut g1, mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&t, &y) in t.iter().zip(&y) {
            let mu = (a + b * t).exp();
            g0 += y - mu;
            g1 += (y - mu) * t;
            h00 += mu;
            h01 += mu * t;
            h11 += mu * t * t;
        }
        let det = h00 * h11 - h01 * h01;
        if !(det > 0.0) {
            return Err(Error::Fit("domestic fit: singular information matrix".into()));
        }
        let da = (h11 * g0 - h01 * g1) / det;
        let db = (h00 * g1 - h01 * g0) / det;
        let mut step = 1.0;
        let (mut na, mut nb, mut nll);
        loop {
            na = a + step * da;
            nb = b + step * db;
            nll = poisson_loglik(na, nb, &t, &y);
            if nll >= ll - 1e-12 || step < 1e-10 {
                break;
            }
            step *= 0.5;
        }
        let converged = (na - a).abs() < 1e-10 && (nb - b).abs() < 1e-10;
        a = na;
        b = nb;
        ll = nll;
        if converged {
            let info = wald_info(a, b, &t);
            let se = (info.0 / (info.0 * info.2 - info.1 * info.1)).sqrt();
            return Ok(DomesticFit {
                rate: b,
                ci_lo: b - Z_975 * se,
                ci_hi: b + Z_975 * se,
                intercept: a,
                iterations: it,
            });
        }
    }
    Err(Error::Fit(format!(
        "domestic fit did not converge in {MAX_ITERATIONS} iterations"
    )))
}

fn wald_info(a: f64, b: f64, t: &[f64]) -> (f64, f64, f64) {
    t.iter().fold((0.0, 0.0, 0.0), |(h00, h01, h11), &t| {
        let mu = (a + b * t).exp();
        (h00 + mu, h01 + mu * t, h11 + mu * t * t)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn series(counts: &[u64]) -> Vec<DailyCount> {
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        counts
            .iter()
            .enumerate()
            .map(|(i, &n)| DailyCount {
                date: start + chrono::Days::new(i as u64),
                new_cases: n,
            })
            .collect()
    }

    #[test]
    fn recovers_exponential_slope() {
        let counts: Vec<u64> = (0..=20).map(|t| (10.0 * (0.15 * t as f64).exp()).round() as u64).collect();
        let fit = domestic_fit(&series(&counts)).unwrap();
        assert!((fit.rate - 0.15).abs() < 0.005, "{fit:?}");
        assert!(fit.ci_lo < 0.15 && 0.15 < fit.ci_hi);
    }

    #[test]
    fn constant_series_ci_contains_zero() {
        let fit = domestic_fit(&series(&[7; 15])).unwrap();
        assert!(fit.ci_lo < 0.0 && fit.ci_hi > 0.0, "{fit:?}");
        assert!(fit.rate.abs() < 1e-8);
    }

    #[test]
    fn doubling_points_give_ln2() {
        let fit = domestic_fit(&series(&[10, 20, 40])).unwrap();
        assert!((fit.rate - std::f64::consts::LN_2).abs() < 1e-8, "{fit:?}");
    }

    #[test]
    fn score_is_zero_at_solution() {
        // Independent check of the normal equations at the returned estimate.
        let counts = [3u64, 0, 5, 9, 4, 12, 20, 18, 31];
        let s = series(&counts);
        let fit = domestic_fit(&s).unwrap();
        let (mut g0, mut g1) = (0.0, 0.0);
        for (t, &y) in counts.iter().enumerate() {
            let mu = (fit.intercept + fit.rate * t as f64).exp();
            g0 += y as f64 - mu;
            g1 += (y as f64 - mu) * t as f64;
        }
        assert!(g0.abs() < 1e-6 && g1.abs() < 1e-6);
    }

    #[test]
    fn rejects_degenerate_series() {
        assert!(domestic_fit(&series(&[0, 0, 0, 0])).is_err());
        assert!(domestic_fit(&series(&[0, 4, 0, 2])).is_err());
    }

    #[test]
    fn gaps_use_calendar_offsets() {
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let s: Vec<DailyCount> = [(0u64, 10u64), (2, 40), (3, 80), (6, 640)]
            .iter()
            .map(|&(d, n)| DailyCount {
                date: start + chrono::Days::new(d),
                new_cases: n,
            })
            .collect();
        let fit = domestic_fit(&s).unwrap();
        assert!((fit.rate - std::f64::consts::LN_2).abs() < 1e-8);
    }
}
