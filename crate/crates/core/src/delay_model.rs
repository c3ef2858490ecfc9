//! Hierarchical negative-binomial model for the delay between arrival and
//! confirmation, plus imputation of missing arrival dates.
//!
//! `T_ij | mu_i, phi ~ NB(mean mu_i, dispersion phi)`, `mu_i ~ Gamma(lambda, 1)`,
//! `lambda ~ Gamma(0.6, rate 0.1)`, `sqrt(1/phi) ~ half-Cauchy(0, 0.16)`.

use std::collections::BTreeMap;
use std::io::Write;

use chrono::NaiveDate;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dist::{gamma_ln_pdf, half_cauchy_ln_pdf, quantile_sorted, sorted, NegBinomial};
use crate::domain::{DayIndex, RngSeed};
use crate::error::{Error, Result};
use crate::ingest::CaseReport;
use crate::mcmc::{self, ChainSet, Diagnostics, LogDensity, McmcConfig, Scheme};

pub const LAMBDA_SHAPE: f64 = 0.6;
pub const LAMBDA_RATE: f64 = 0.1;
pub const INV_SQRT_PHI_SCALE: f64 = 0.16;
pub const DEFAULT_IMPUTATIONS: usize = 20;
const MAX_REDRAWS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelayObservation {
    pub destination: String,
    pub interval_days: u64,
}

/// One observation per case with a known arrival date (multi-case rows
/// contribute one observation per case).
pub fn observations_from_cases(cases: &[CaseReport]) -> Vec<DelayObservation> {
    cases
        .iter()
        .filter(|c| c.include)
        .filter_map(|c| {
            c.delay_days().map(|d| {
                std::iter::repeat_n(
                    DelayObservation {
                        destination: c.destination.clone(),
                        interval_days: d,
                    },
                    c.n_cases as usize,
                )
            })
        })
        .flatten()
        .collect()
}

/// Parameters on the natural scale.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayParams {
    pub mu: BTreeMap<String, f64>,
    pub phi: f64,
    pub lambda: f64,
}

/// NB log likelihood of the observations. Destinations missing from
/// `params.mu` make the value `-inf`.
pub fn delay_log_likelihood(params: &DelayParams, observations: &[DelayObservation]) -> f64 {
    observations
        .iter()
        .map(|o| match params.mu.get(&o.destination) {
            Some(&mu) => NegBinomial::new(mu, params.phi).ln_pmf(o.interval_days),
            None => f64::NEG_INFINITY,
        })
        .sum()
}

/// Log prior density of `(mu, lambda, phi)` with respect to Lebesgue measure
/// on those parameters; the half-Cauchy on `sqrt(1/phi)` carries its Jacobian.
pub fn delay_log_prior(params: &DelayParams) -> f64 {
    let (phi, lambda) = (params.phi, params.lambda);
    if !(phi > 0.0) || !(lambda > 0.0) {
        return f64::NEG_INFINITY;
    }
    let mu: f64 = params.mu.values().map(|&m| gamma_ln_pdf(m, lambda, 1.0)).sum();
    let s = phi.powf(-0.5);
    mu + gamma_ln_pdf(lambda, LAMBDA_SHAPE, LAMBDA_RATE)
        + half_cauchy_ln_pdf(s, INV_SQRT_PHI_SCALE)
        + (0.5f64).ln()
        - 1.5 * phi.ln()
}

pub fn delay_log_posterior(params: &DelayParams, observations: &[DelayObservation]) -> f64 {
    let prior = delay_log_prior(params);
    if prior == f64::NEG_INFINITY || params.mu.values().any(|m| !(*m > 0.0)) {
        return f64::NEG_INFINITY;
    }
    prior + delay_log_likelihood(params, observations)
}

/// Sufficient statistics: per destination, counts of each observed delay.
struct DelayTarget {
    destinations: Vec<String>,
    histograms: Vec<Vec<(u64, f64)>>,
}

impl DelayTarget {
    fn new(observations: &[DelayObservation]) -> Self {
        let mut by_dest: BTreeMap<&str, BTreeMap<u64, f64>> = BTreeMap::new();
        for o in observations {
            *by_dest
                .entry(&o.destination)
                .or_default()
                .entry(o.interval_days)
                .or_default() += 1.0;
        }
        DelayTarget {
            destinations: by_dest.keys().map(|s| s.to_string()).collect(),
            histograms: by_dest
                .values()
                .map(|h| h.iter().map(|(k, c)| (*k, *c)).collect())
                .collect(),
        }
    }

    fn dim(&self) -> usize {
        self.destinations.len() + 2
    }
}

impl LogDensity for DelayTarget {
    fn names(&self) -> Vec<String> {
        self.destinations
            .iter()
            .map(|d| format!("mu.{d}"))
            .chain(["phi".to_string(), "lambda".to_string()])
            .collect()
    }

    fn dim(&self) -> usize {
        DelayTarget::dim(self)
    }

    /// `x = (log mu_1.., log phi, log lambda)`; includes the log-Jacobians.
    fn log_density(&self, x: &[f64]) -> f64 {
        let m = self.destinations.len();
        let (log_phi, log_lambda) = (x[m], x[m + 1]);
        let (phi, lambda) = (log_phi.exp(), log_lambda.exp());
        if !phi.is_finite() || !lambda.is_finite() || phi <= 0.0 || lambda <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let s = phi.powf(-0.5);
        let mut lp = gamma_ln_pdf(lambda, LAMBDA_SHAPE, LAMBDA_RATE)
            + log_lambda
            + half_cauchy_ln_pdf(s, INV_SQRT_PHI_SCALE)
            + (0.5f64).ln()
            - 1.5 * log_phi
            + log_phi;
        for (i, hist) in self.histograms.iter().enumerate() {
            let mu = x[i].exp();
            if !(mu > 0.0) || !mu.is_finite() {
                return f64::NEG_INFINITY;
            }
            lp += gamma_ln_pdf(mu, lambda, 1.0) + x[i];
            let nb = NegBinomial::new(mu, phi);
            for &(k, c) in hist {
                lp += c * nb.ln_pmf(k);
            }
        }
        lp
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelaySample {
    /// Indexed like [`DelayPosterior::destinations`].
    pub mu: Vec<f64>,
    pub phi: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct DelayPosterior {
    /// Destinations with at least one observed delay.
    pub destinations: Vec<String>,
    pub samples: Vec<DelaySample>,
    pub diagnostics: Diagnostics,
}

impl DelayPosterior {
    fn from_chains(destinations: Vec<String>, set: ChainSet) -> Self {
        let m = destinations.len();
        let samples = set
            .draws()
            .map(|x| DelaySample {
                mu: x[..m].iter().map(|v| v.exp()).collect(),
                phi: x[m].exp(),
                lambda: x[m + 1].exp(),
            })
            .collect();
        DelayPosterior {
            destinations,
            samples,
            diagnostics: set.diagnostics,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn destination_index(&self, destination: &str) -> Option<usize> {
        self.destinations.iter().position(|d| d == destination)
    }

    /// Mean delay used for q: the destination's `mu` or, for destinations
    /// without data, the population mean `lambda`.
    pub fn mean_for(&self, sample: usize, destination: &str) -> f64 {
        let s = &self.samples[sample];
        match self.destination_index(destination) {
            Some(i) => s.mu[i],
            None => s.lambda,
        }
    }

    /// JSON lines, one sample per line: `mu.<destination>`, `phi`, `lambda`.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for s in &self.samples {
            let mut obj = serde_json::Map::new();
            for (d, mu) in self.destinations.iter().zip(&s.mu) {
                obj.insert(format!("mu.{d}"), (*mu).into());
            }
            obj.insert("phi".into(), s.phi.into());
            obj.insert("lambda".into(), s.lambda.into());
            serde_json::to_writer(&mut w, &obj)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Componentwise adaptive Metropolis on the log scale.
pub fn fit_delay(
    observations: &[DelayObservation],
    cfg: &McmcConfig,
    seed: &RngSeed,
) -> Result<DelayPosterior> {
    if observations.is_empty() {
        return Err(Error::Domain(
            "the delay model needs at least one case with a known arrival date".into(),
        ));
    }
    let target = DelayTarget::new(observations);
    let means: Vec<f64> = target
        .histograms
        .iter()
        .map(|h| {
            let n: f64 = h.iter().map(|(_, c)| c).sum();
            h.iter().map(|(k, c)| *k as f64 * c).sum::<f64>() / n
        })
        .collect();
    let overall = observations.iter().map(|o| o.interval_days as f64).sum::<f64>()
        / observations.len() as f64;
    let init = |_: usize, rng: &mut ChaCha8Rng| -> Vec<f64> {
        let mut jitter = || 0.3 * rng.sample::<f64, _>(StandardNormal);
        let mut x: Vec<f64> = means.iter().map(|m| (m + 0.5).ln() + jitter()).collect();
        x.push(jitter());
        x.push((overall + 0.5).ln() + jitter());
        x
    };
    let set = mcmc::sample(&target, init, cfg, Scheme::Componentwise, &seed.child("delay"))?;
    Ok(DelayPosterior::from_chains(target.destinations, set))
}

/// Posterior predictive delay using posterior sample `sample`.
pub fn predict_delay_from<R: Rng + ?Sized>(
    posterior: &DelayPosterior,
    sample: usize,
    destination: &str,
    bounds: Option<(u64, u64)>,
    rng: &mut R,
) -> u64 {
    let s = &posterior.samples[sample];
    let mu = match posterior.destination_index(destination) {
        Some(i) => s.mu[i],
        None => Gamma::new(s.lambda, 1.0)
            .expect("positive lambda")
            .sample(rng)
            .max(f64::MIN_POSITIVE),
    };
    let nb = NegBinomial::new(mu, s.phi);
    match bounds {
        None => nb.sample(rng),
        Some((lo, hi)) => {
            if lo >= hi {
                return lo;
            }
            for _ in 0..MAX_REDRAWS {
                let t = nb.sample(rng);
                if (lo..=hi).contains(&t) {
                    return t;
                }
            }
            nb.sample(rng).clamp(lo, hi)
        }
    }
}

/// Posterior predictive delay with a uniformly drawn sample index. `bounds`
/// restricts the delay to `lo..=hi` by redrawing, then clamping.
pub fn predict_delay<R: Rng + ?Sized>(
    posterior: &DelayPosterior,
    destination: &str,
    bounds: Option<(u64, u64)>,
    rng: &mut R,
) -> Result<u64> {
    if posterior.is_empty() {
        return Err(Error::EmptyPosterior);
    }
    let s = rng.random_range(0..posterior.len());
    Ok(predict_delay_from(posterior, s, destination, bounds, rng))
}

/// `P(T <= days_remaining)` under posterior sample `sample`.
pub fn q_factor(posterior: &DelayPosterior, sample: usize, destination: &str, days_remaining: i64) -> f64 {
    let phi = posterior.samples[sample].phi;
    NegBinomial::new(posterior.mean_for(sample, destination), phi).cdf(days_remaining)
}

/// One completed dataset: every case has an arrival date, and `q[dest][t]`
/// holds the down-scaling factor for day `t` in `0..=t_end`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImputedDataset {
    pub cases: Vec<CaseReport>,
    pub q: BTreeMap<String, Vec<f64>>,
    pub source_sample_index: usize,
    pub t_end: DayIndex,
}

impl ImputedDataset {
    pub fn q_at(&self, destination: &str, t: DayIndex) -> Option<f64> {
        self.q.get(destination)?.get(usize::try_from(t.0).ok()?).copied()
    }
}

/// Arrival-day bounds for imputation expressed as a delay range.
fn delay_bounds(case: &CaseReport, t0: NaiveDate) -> (u64, u64) {
    let earliest = case.arrival_earliest.map_or(t0, |d| d.max(t0));
    let latest = case
        .arrival_latest
        .map_or(case.confirm_date, |d| d.min(case.confirm_date));
    let (earliest, latest) = if earliest > latest {
        (latest, latest)
    } else {
        (earliest, latest)
    };
    let lo = (case.confirm_date - latest).num_days().max(0) as u64;
    let hi = (case.confirm_date - earliest).num_days().max(0) as u64;
    (lo, hi)
}

/// Posterior sample indices used by `k` imputations: evenly spaced and
/// distinct whenever `k <= posterior.len()`.
pub fn imputation_sample_indices(n_samples: usize, k: usize) -> Vec<usize> {
    (0..k)
        .map(|j| ((2 * j + 1) * n_samples / (2 * k)).min(n_samples - 1))
        .collect()
}

/// Builds `k` completed datasets. Rows with several cases and a missing
/// arrival are split so that each case gets its own imputed date. The q
/// factors cover `destinations` over `t0..=t_end`.
pub fn impute_arrivals(
    cases: &[CaseReport],
    posterior: &DelayPosterior,
    destinations: &[String],
    k: usize,
    t0: NaiveDate,
    t_end: NaiveDate,
    seed: &RngSeed,
) -> Result<Vec<ImputedDataset>> {
    if k == 0 {
        return Err(Error::Config("number of imputations must be at least 1".into()));
    }
    if posterior.is_empty() {
        return Err(Error::EmptyPosterior);
    }
    let end = DayIndex::from_date(t0, t_end);
    if end.0 < 0 {
        return Err(Error::Domain(format!("decision date {t_end} precedes epidemic start {t0}")));
    }
    let indices = imputation_sample_indices(posterior.len(), k);
    Ok(indices
        .into_iter()
        .enumerate()
        .map(|(j, s)| {
            let mut rng = seed.child(format!("imputation-{j}")).stream();
            let mut filled = Vec::with_capacity(cases.len());
            for c in cases.iter().filter(|c| c.include) {
                if c.has_known_arrival() {
                    filled.push(c.clone());
                    continue;
                }
                let bounds = delay_bounds(c, t0);
                for _ in 0..c.n_cases {
                    let d = predict_delay_from(posterior, s, &c.destination, Some(bounds), &mut rng);
                    let mut unit = c.clone();
                    unit.n_cases = 1;
                    unit.arrival_date = Some(c.confirm_date - chrono::Days::new(d));
                    filled.push(unit);
                }
            }
            let q = destinations
                .iter()
                .map(|dest| {
                    let curve = (0..=end.0)
                        .map(|t| q_factor(posterior, s, dest, end.0 - t))
                        .collect();
                    (dest.clone(), curve)
                })
                .collect();
            ImputedDataset {
                cases: filled,
                q,
                source_sample_index: s,
                t_end: end,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelaySummaryRow {
    pub destination: String,
    pub median: f64,
    pub lo50: f64,
    pub hi50: f64,
    pub lo95: f64,
    pub hi95: f64,
}

pub const POOLED_LABEL: &str = "pooled";

fn summary_row(destination: &str, values: impl IntoIterator<Item = f64>) -> DelaySummaryRow {
    let s = sorted(values);
    DelaySummaryRow {
        destination: destination.to_string(),
        median: quantile_sorted(&s, 0.5),
        lo50: quantile_sorted(&s, 0.25),
        hi50: quantile_sorted(&s, 0.75),
        lo95: quantile_sorted(&s, 0.025),
        hi95: quantile_sorted(&s, 0.975),
    }
}

/// Posterior summaries of the mean delay. Observed destinations use their
/// `mu_i` draws. Destinations listed in `extra` without data, and the final
/// pooled row, use `mu* ~ Gamma(lambda, 1)` drawn per posterior sample.
pub fn summarize_delay(
    posterior: &DelayPosterior,
    extra: &[String],
    seed: &RngSeed,
) -> Result<Vec<DelaySummaryRow>> {
    if posterior.is_empty() {
        return Err(Error::EmptyPosterior);
    }
    let hierarchical = |label: &str| -> Vec<f64> {
        let mut rng = seed.child(format!("summary/{label}")).stream();
        posterior
            .samples
            .iter()
            .map(|s| Gamma::new(s.lambda, 1.0).expect("positive lambda").sample(&mut rng))
            .collect()
    };
    let mut rows: Vec<DelaySummaryRow> = posterior
        .destinations
        .iter()
        .enumerate()
        .map(|(i, d)| summary_row(d, posterior.samples.iter().map(|s| s.mu[i])))
        .collect();
    let mut unseen: Vec<&String> = extra
        .iter()
        .filter(|d| posterior.destination_index(d).is_none())
        .collect();
    unseen.sort();
    unseen.dedup();
    for d in unseen {
        rows.push(summary_row(d, hierarchical(d)));
    }
    rows.push(summary_row(POOLED_LABEL, hierarchical(POOLED_LABEL)));
    Ok(rows)
}

pub fn write_summary_csv<W: Write>(rows: &[DelaySummaryRow], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::mean;
    use crate::ingest::fixtures::{self, FixtureOrigin};
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn obs(dest: &str, days: &[u64]) -> Vec<DelayObservation> {
        days.iter()
            .map(|&d| DelayObservation {
                destination: dest.into(),
                interval_days: d,
            })
            .collect()
    }

    fn params(mu: &[(&str, f64)], phi: f64, lambda: f64) -> DelayParams {
        DelayParams {
            mu: mu.iter().map(|(d, m)| (d.to_string(), *m)).collect(),
            phi,
            lambda,
        }
    }

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    // Independent NB pmf: explicit product form, no log-gamma.
    fn product_pmf(k: u64, mu: f64, phi: f64) -> f64 {
        let p = phi / (phi + mu);
        let mut coef = 1.0;
        for j in 0..k {
            coef *= (phi + j as f64) / (j as f64 + 1.0);
        }
        coef * p.powf(phi) * (1.0 - p).powi(k as i32)
    }

    #[test]
    fn poisson_limit_of_likelihood() {
        let p = params(&[("A", 1.0)], 1e9, 3.0);
        let ll = delay_log_likelihood(&p, &obs("A", &[0]));
        assert!((ll + 1.0).abs() < 1e-6, "{ll}");
    }

    #[test]
    fn zero_mean_is_rejected() {
        let p = params(&[("A", 0.0)], 1.0, 3.0);
        assert_eq!(delay_log_posterior(&p, &obs("A", &[1])), f64::NEG_INFINITY);
    }

    #[test]
    fn wuhan_likelihood_matches_product_formula() {
        let o = observations_from_cases(&fixtures::wuhan().cases);
        assert_eq!(o.len(), 10);
        let mut by: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for x in &o {
            by.entry(x.destination.clone()).or_default().push(x.interval_days as f64);
        }
        let p = DelayParams {
            mu: by.iter().map(|(d, v)| (d.clone(), mean(v).max(0.5))).collect(),
            phi: 1.0,
            lambda: 6.0,
        };
        let oracle: f64 = o
            .iter()
            .map(|x| product_pmf(x.interval_days, p.mu[&x.destination], 1.0).ln())
            .sum();
        assert!((delay_log_likelihood(&p, &o) - oracle).abs() < 1e-9);
        assert!(delay_log_posterior(&p, &o).is_finite());
    }

    #[test]
    fn sampler_density_matches_natural_scale_posterior() {
        let o = obs("A", &[1, 4, 2]);
        let t = DelayTarget::new(&o);
        let (mu, phi, lambda): (f64, f64, f64) = (2.5, 1.7, 3.2);
        let x = [mu.ln(), phi.ln(), lambda.ln()];
        let natural = delay_log_posterior(&params(&[("A", mu)], phi, lambda), &o);
        // log-scale density adds log mu + log phi + log lambda.
        let expect = natural + mu.ln() + phi.ln() + lambda.ln();
        assert!((t.log_density(&x) - expect).abs() < 1e-10);
    }

    fn quick_cfg() -> McmcConfig {
        McmcConfig {
            warmup: 1000,
            draws: 1000,
            ..McmcConfig::default()
        }
    }

    #[test]
    fn recovers_synthetic_mean() {
        let truth = NegBinomial::new(5.0, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let days: Vec<u64> = (0..200).map(|_| truth.sample(&mut rng)).collect();
        let post = fit_delay(&obs("X", &days), &quick_cfg(), &RngSeed::root(3)).unwrap();
        let m = mean(&post.samples.iter().map(|s| s.mu[0]).collect::<Vec<_>>());
        let sample_mean = mean(&days.iter().map(|d| *d as f64).collect::<Vec<_>>());
        assert!((m - 5.0).abs() < 0.5, "{m} (data mean {sample_mean})");
        assert!(post.diagnostics.max_rhat() <= 1.05);
        assert_eq!(post.len(), 4000);
    }

    #[test]
    fn constant_delays_shrink_towards_two() {
        let post = fit_delay(&obs("X", &[2, 2, 2, 2]), &quick_cfg(), &RngSeed::root(4)).unwrap();
        let rows = summarize_delay(&post, &[], &RngSeed::root(4)).unwrap();
        assert!((1.0..=3.0).contains(&rows[0].median), "{:?}", rows[0]);
    }

    #[test]
    fn predictive_concentrates_for_short_delays() {
        let days: Vec<u64> = [0, 1, 1, 2, 1, 0, 1, 2, 1, 1].repeat(5);
        let post = fit_delay(&obs("X", &days), &quick_cfg(), &RngSeed::root(5)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 20_000;
        let hits = (0..n)
            .filter(|_| predict_delay(&post, "X", None, &mut rng).unwrap() <= 3)
            .count();
        // Direct pmf mass on {0..3}, averaged over the posterior.
        let oracle = mean(
            &post
                .samples
                .iter()
                .map(|s| (0..=3).map(|k| product_pmf(k, s.mu[0], s.phi)).sum())
                .collect::<Vec<f64>>(),
        );
        let freq = hits as f64 / n as f64;
        assert!(freq >= 0.8, "{freq}");
        assert!((freq - oracle).abs() < 0.015, "{freq} vs {oracle}");
    }

    #[test]
    fn unseen_destination_mean_tracks_lambda() {
        let post = fit_delay(&obs("X", &[3, 5, 4, 6, 2, 4]), &quick_cfg(), &RngSeed::root(6)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 200_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| predict_delay(&post, "Nowhere", None, &mut rng).unwrap() as f64)
            .collect();
        let lambda = mean(&post.samples.iter().map(|s| s.lambda).collect::<Vec<_>>());
        let m = mean(&draws);
        assert!((m / lambda - 1.0).abs() < 0.05, "{m} vs {lambda}");
    }

    #[test]
    fn degenerate_bounds() {
        let post = fit_delay(&obs("X", &[3, 5]), &quick_cfg(), &RngSeed::root(7)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(predict_delay(&post, "X", Some((5, 5)), &mut rng).unwrap(), 5);
        }
    }

    fn single_sample(mu: f64, phi: f64) -> DelayPosterior {
        DelayPosterior {
            destinations: vec!["A".into()],
            samples: vec![DelaySample {
                mu: vec![mu],
                phi,
                lambda: 2.0,
            }],
            diagnostics: Diagnostics::default(),
        }
    }

    #[test]
    fn q_factor_examples() {
        let p = single_sample(4.0, 1.0);
        assert!((q_factor(&p, 0, "A", 10_000) - 1.0).abs() < 1e-9);
        assert!(q_factor(&p, 0, "A", 0) > 0.0);
        let brute: f64 = (0..=4).map(|k| product_pmf(k, 4.0, 1.0)).sum();
        assert!((q_factor(&p, 0, "A", 4) - brute).abs() < 1e-12);
        // Unseen destinations use lambda as the mean.
        let brute: f64 = (0..=3).map(|k| product_pmf(k, 2.0, 1.0)).sum();
        assert!((q_factor(&p, 0, "B", 3) - brute).abs() < 1e-12);
    }

    #[test]
    fn imputation_respects_wuhan_bounds() {
        let f = fixtures::wuhan();
        let o = observations_from_cases(&f.cases);
        let post = fit_delay(&o, &quick_cfg(), &RngSeed::root(8)).unwrap();
        let dests: Vec<String> = f.volumes.destinations().map(String::from).collect();
        let sets = impute_arrivals(
            &f.cases,
            &post,
            &dests,
            20,
            f.origin.epidemic_start,
            f.origin.study_end,
            &RngSeed::root(8),
        )
        .unwrap();
        assert_eq!(sets.len(), 20);
        let idx: std::collections::BTreeSet<_> = sets.iter().map(|s| s.source_sample_index).collect();
        assert_eq!(idx.len(), 20);
        for s in &sets {
            assert_eq!(s.cases.len(), 11);
            for c in &s.cases {
                let a = c.arrival_date.unwrap();
                assert!(a >= date("2019-12-01") && a <= c.confirm_date);
            }
            for curve in s.q.values() {
                assert_eq!(curve.len() as i64, s.t_end.0 + 1);
                assert!(curve.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn no_missing_arrivals_gives_identical_cases() {
        let f = fixtures::wuhan();
        let known: Vec<CaseReport> = f.cases.iter().filter(|c| c.has_known_arrival()).cloned().collect();
        let post = single_sample(4.0, 1.0);
        let sets = impute_arrivals(
            &known,
            &post,
            &["Japan".into()],
            3,
            f.origin.epidemic_start,
            f.origin.study_end,
            &RngSeed::root(1),
        )
        .unwrap();
        assert!(sets.windows(2).all(|w| w[0].cases == w[1].cases));
    }

    #[test]
    fn italy_mostly_imputed() {
        let f = fixtures::load(FixtureOrigin::Italy);
        let included = f.included();
        let post = fit_delay(&observations_from_cases(&included), &quick_cfg(), &RngSeed::root(9)).unwrap();
        let sets = impute_arrivals(
            &included,
            &post,
            &[],
            5,
            f.origin.epidemic_start,
            f.origin.study_end,
            &RngSeed::root(9),
        )
        .unwrap();
        for s in sets {
            let imputed = s.cases.iter().filter(|c| {
                !included
                    .iter()
                    .any(|o| o.has_known_arrival() && o.destination == c.destination && o.confirm_date == c.confirm_date && o.arrival_date == c.arrival_date)
            });
            let frac = imputed.count() as f64 / s.cases.len() as f64;
            assert!(frac >= 0.89, "{frac}");
        }
    }

    fn pooled(which: FixtureOrigin) -> DelaySummaryRow {
        let f = fixtures::load(which);
        let o = observations_from_cases(&f.included());
        let post = fit_delay(&o, &McmcConfig::default(), &RngSeed::root(20)).unwrap();
        summarize_delay(&post, &[], &RngSeed::root(20)).unwrap().pop().unwrap()
    }

    #[test]
    fn pooled_medians_by_origin() {
        let w = pooled(FixtureOrigin::Wuhan);
        assert!((3.1..=5.1).contains(&w.median), "{w:?}");
        assert!(w.lo95 < 1.5 && w.hi95 > 9.5, "{w:?}");
        let i = pooled(FixtureOrigin::Iran);
        assert!((1.6..=3.7).contains(&i.median), "{i:?}");
        let e = pooled(FixtureOrigin::Egypt);
        assert!((7.0..=11.5).contains(&e.median), "{e:?}");
    }

    #[test]
    fn posterior_jsonl_fields() {
        let p = single_sample(4.0, 1.5);
        let mut buf = Vec::new();
        p.write_jsonl(&mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["mu.A"], 4.0);
        assert_eq!(v["phi"], 1.5);
        assert_eq!(v["lambda"], 2.0);
    }

    proptest! {
        #[test]
        fn q_nondecreasing_and_matches_pmf_sum(mu in 0.1f64..30.0, phi in 0.1f64..50.0, k in 0i64..60) {
            let p = single_sample(mu, phi);
            let a = q_factor(&p, 0, "A", k);
            let b = q_factor(&p, 0, "A", k + 1);
            prop_assert!(b >= a);
            let brute: f64 = (0..=k as u64).map(|j| product_pmf(j, mu, phi)).sum();
            prop_assert!((a - brute).abs() < 1e-10);
            prop_assert!(NegBinomial::new(mu, phi).variance() >= mu);
        }

        #[test]
        fn imputation_within_bounds(
            confirm_off in 0i64..60,
            lo_back in 0i64..40,
            width in 0i64..30,
            seed in 0u64..1000,
        ) {
            let t0 = date("2020-01-01");
            let confirm = t0 + chrono::Days::new(confirm_off as u64);
            let latest = confirm - chrono::Days::new(lo_back.min(confirm_off) as u64);
            let earliest = latest - chrono::Days::new(width as u64);
            let case = CaseReport {
                origin: "O".into(),
                destination: "A".into(),
                confirm_date: confirm,
                arrival_date: None,
                arrival_earliest: Some(earliest),
                arrival_latest: Some(latest),
                n_cases: 3,
                transport: crate::ingest::Transport::Unknown,
                group_id: None,
                include: true,
            };
            let post = single_sample(4.0, 1.0);
            let sets = impute_arrivals(&[case], &post, &[], 2, t0, confirm, &RngSeed::root(seed)).unwrap();
            for s in sets {
                prop_assert_eq!(s.cases.len(), 3);
                for c in s.cases {
                    let a = c.arrival_date.unwrap();
                    prop_assert!(a >= earliest.max(t0) && a <= latest.min(confirm));
                }
            }
        }
    }
}
