use std::io::Write;

use chrono::NaiveDate;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::likelihood::GrowthData;
use crate::delay_model::ImputedDataset;
use crate::dist::{mean, normal_ln_pdf, quantile_sorted, sorted};
use crate::domain::RngSeed;
use crate::error::{Error, Result};
use crate::ingest::{OriginConfig, VolumeTable};
use crate::mcmc::{self, Diagnostics, LogDensity, McmcConfig, Scheme};

pub const BETA1_MIN: f64 = -2.0;
pub const BETA1_MAX: f64 = 5.0;

/// Prior sd of alpha: 95% of exp(alpha) falls in (0.1, 10).
pub fn alpha_prior_sd() -> f64 {
    std::f64::consts::LN_10 / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthOptions {
    /// Destination random effects `b_i`.
    pub destination_effects: bool,
    pub imputations: usize,
    pub delay_mcmc: McmcConfig,
    pub growth_mcmc: McmcConfig,
}

impl Default for GrowthOptions {
    fn default() -> Self {
        GrowthOptions {
            destination_effects: false,
            imputations: crate::delay_model::DEFAULT_IMPUTATIONS,
            delay_mcmc: McmcConfig::default(),
            growth_mcmc: McmcConfig::growth_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSample {
    pub beta1: f64,
    pub alpha: f64,
    /// Indexed like [`GrowthPosterior::destinations`] when effects are on.
    pub b: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthMeta {
    pub origin: String,
    pub decision_date: NaiveDate,
    pub n_imputations: usize,
    pub initial_cases: u64,
}

#[derive(Debug, Clone)]
pub struct GrowthPosterior {
    pub samples: Vec<GrowthSample>,
    pub destinations: Vec<String>,
    pub beta0: f64,
    pub meta: GrowthMeta,
    pub diagnostics: Diagnostics,
}

/// Mean and central 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

impl GrowthPosterior {
    pub fn beta1_draws(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.beta1).collect()
    }

    pub fn beta1(&self) -> Interval {
        let draws = self.beta1_draws();
        let s = sorted(draws.iter().copied());
        Interval {
            mean: mean(&draws),
            lo: quantile_sorted(&s, 0.025),
            hi: quantile_sorted(&s, 0.975),
        }
    }

    /// Doubling time: mean over growing draws; the interval maps the beta1
    /// interval through `ln 2 / beta1` (upper end infinite if it includes 0).
    pub fn doubling_time(&self) -> Interval {
        let b = self.beta1();
        let growing: Vec<f64> = self
            .samples
            .iter()
            .filter(|s| s.beta1 > 0.0)
            .map(|s| std::f64::consts::LN_2 / s.beta1)
            .collect();
        let td = |beta: f64| {
            if beta > 0.0 {
                std::f64::consts::LN_2 / beta
            } else {
                f64::INFINITY
            }
        };
        Interval {
            mean: if growing.is_empty() { f64::INFINITY } else { mean(&growing) },
            lo: td(b.hi),
            hi: td(b.lo),
        }
    }

    /// JSON lines: `beta1`, `alpha` and `b.<destination>` when present.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for s in &self.samples {
            let mut obj = serde_json::Map::new();
            obj.insert("beta1".into(), s.beta1.into());
            obj.insert("alpha".into(), s.alpha.into());
            if let Some(b) = &s.b {
                for (d, v) in self.destinations.iter().zip(b) {
                    obj.insert(format!("b.{d}"), (*v).into());
                }
            }
            serde_json::to_writer(&mut w, &obj)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

struct GrowthTarget {
    data: GrowthData,
    effects: bool,
}

impl LogDensity for GrowthTarget {
    fn names(&self) -> Vec<String> {
        let mut n = vec!["beta1".to_string(), "alpha".to_string()];
        if self.effects {
            n.push("log_sigma_b".into());
            n.extend(self.data.destinations.iter().map(|d| format!("b.{d}")));
        }
        n
    }

    /// `x = (beta1, alpha[, log sigma_b, b_1..])`.
    fn log_density(&self, x: &[f64]) -> f64 {
        let (beta1, alpha) = (x[0], x[1]);
        if !(BETA1_MIN..=BETA1_MAX).contains(&beta1) || !alpha.is_finite() {
            return f64::NEG_INFINITY;
        }
        let mut lp = normal_ln_pdf(alpha, 0.0, alpha_prior_sd());
        let b = if self.effects {
            let log_sigma = x[2];
            let sigma = log_sigma.exp();
            if !(sigma > 0.0) || !sigma.is_finite() {
                return f64::NEG_INFINITY;
            }
            // half-Normal(1) on sigma_b, sampled on the log scale.
            lp += normal_ln_pdf(sigma, 0.0, 1.0) + std::f64::consts::LN_2 + log_sigma;
            let b = &x[3..];
            lp += b.iter().map(|&v| normal_ln_pdf(v, 0.0, sigma)).sum::<f64>();
            Some(b)
        } else {
            None
        };
        let ll = self.data.log_kernel(beta1, alpha, b);
        if ll.is_nan() {
            return f64::NEG_INFINITY;
        }
        lp + ll
    }
}

/// Profile over a beta1 grid at alpha = 0, to start chains near the mode.
fn grid_start(data: &GrowthData) -> f64 {
    let ll = |b: f64| data.log_kernel(b, 0.0, None);
    (-100..=150)
        .map(|i| i as f64 * 0.01)
        .max_by(|a, b| ll(*a).total_cmp(&ll(*b)))
        .unwrap_or(0.1)
}

/// One run per completed dataset (in parallel, on `seed/imputation-k`), with
/// the kept draws pooled in dataset order.
#[allow(clippy::too_many_arguments)]
pub fn fit_growth(
    imputed: &[ImputedDataset],
    volumes: &VolumeTable,
    config: &OriginConfig,
    decision_date: NaiveDate,
    mcmc_cfg: &McmcConfig,
    destination_effects: bool,
    seed: &RngSeed,
) -> Result<GrowthPosterior> {
    if imputed.is_empty() {
        return Err(Error::Config("fit_growth needs at least one completed dataset".into()));
    }
    let runs: Vec<Result<(Vec<GrowthSample>, Diagnostics)>> = imputed
        .par_iter()
        .enumerate()
        .map(|(k, ds)| {
            let data = GrowthData::build(ds, volumes, config, decision_date)?;
            let start = grid_start(&data);
            let m = data.destinations.len();
            let target = GrowthTarget {
                data,
                effects: destination_effects,
            };
            let init = |_: usize, rng: &mut ChaCha8Rng| -> Vec<f64> {
                let mut z = || rng.sample::<f64, _>(StandardNormal);
                let mut x = vec![start + 0.02 * z(), 0.3 * z()];
                if destination_effects {
                    x.push((0.5f64).ln() + 0.3 * z());
                    x.extend((0..m).map(|_| 0.1 * z()));
                }
                x
            };
            let set = mcmc::sample(
                &target,
                init,
                mcmc_cfg,
                Scheme::Block,
                &seed.child(format!("imputation-{k}")),
            )?;
            let samples = set
                .draws()
                .map(|x| GrowthSample {
                    beta1: x[0],
                    alpha: x[1],
                    b: destination_effects.then(|| x[3..].to_vec()),
                })
                .collect();
            Ok((samples, set.diagnostics))
        })
        .collect();
    let mut samples = Vec::new();
    let mut diags = Vec::new();
    for r in runs {
        let (s, d) = r?;
        samples.extend(s);
        diags.push(d);
    }
    if samples.is_empty() {
        return Err(Error::EmptyPosterior);
    }
    Ok(GrowthPosterior {
        samples,
        destinations: volumes.destinations().map(String::from).collect(),
        beta0: config.beta0(),
        meta: GrowthMeta {
            origin: config.name.clone(),
            decision_date,
            n_imputations: imputed.len(),
            initial_cases: config.initial_cases,
        },
        diagnostics: Diagnostics::merge(&diags),
    })
}
