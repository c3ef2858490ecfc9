//! Adaptive random-walk Metropolis samplers.
//!
//! Two proposal schemes share one driver:
//!
//! * [`Scheme::Componentwise`]: Metropolis-within-Gibbs, one coordinate at a
//!   time, each with its own Robbins-Monro adapted step size.
//! * [`Scheme::Block`]: a short componentwise warm start, then joint Gaussian
//!   proposals shaped by the empirical warmup covariance (Haario-style), with
//!   a single adapted global scale.
//!
//! Adaptation happens during warmup only; kept draws come from a fixed kernel.
//! Chains run in parallel on streams derived from `seed/attempt-a/chain-c`, so
//! results do not depend on the worker count.

mod diagnostics;

pub use diagnostics::{effective_sample_size, split_rhat, Diagnostics};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::RngSeed;
use crate::error::{Error, Result};

/// Unnormalized log target on the sampler's (unconstrained) scale.
pub trait LogDensity: Sync {
    fn names(&self) -> Vec<String>;

    fn log_density(&self, x: &[f64]) -> f64;

    fn dim(&self) -> usize {
        self.names().len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Componentwise,
    Block,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcConfig {
    pub chains: usize,
    pub warmup: usize,
    pub draws: usize,
    pub target_acceptance: f64,
    pub max_rhat: f64,
    /// Overrides the command-level seed when set.
    pub seed: Option<u64>,
    /// Reruns with doubled length (thinned back) before reporting failure.
    pub max_retries: usize,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            chains: 4,
            warmup: 2000,
            draws: 2000,
            target_acceptance: 0.44,
            max_rhat: 1.05,
            seed: None,
            max_retries: 2,
        }
    }
}

impl McmcConfig {
    /// Per-imputation settings for the growth-rate model.
    pub fn growth_default() -> Self {
        McmcConfig {
            chains: 2,
            warmup: 1000,
            draws: 1000,
            target_acceptance: 0.3,
            ..McmcConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 || self.draws < 2 || self.warmup < 8 {
            return Err(Error::Config(
                "mcmc needs chains >= 1, draws >= 2 and warmup >= 8".into(),
            ));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::Config("target_acceptance must be in (0, 1)".into()));
        }
        if !(self.max_rhat >= 1.0) {
            return Err(Error::Config("max_rhat must be >= 1".into()));
        }
        Ok(())
    }

    pub fn root_seed(&self, fallback: u64) -> RngSeed {
        RngSeed::root(self.seed.unwrap_or(fallback))
    }
}

/// Kept draws, `chains[c][i][p]`.
#[derive(Debug, Clone)]
pub struct ChainSet {
    pub names: Vec<String>,
    pub chains: Vec<Vec<Vec<f64>>>,
    pub acceptance: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl ChainSet {
    /// All draws, chain by chain.
    pub fn draws(&self) -> impl Iterator<Item = &[f64]> {
        self.chains.iter().flatten().map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

const BLOCK_WARM_START_TARGET: f64 = 0.44;
const MAX_INIT_TRIES: usize = 200;

/// Runs `cfg.chains` chains, retrying with longer runs while any split-R-hat
/// exceeds `cfg.max_rhat`.
pub fn sample<D, I>(
    target: &D,
    init: I,
    cfg: &McmcConfig,
    scheme: Scheme,
    seed: &RngSeed,
) -> Result<ChainSet>
where
    D: LogDensity,
    I: Fn(usize, &mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    cfg.validate()?;
    let names = target.names();
    let mut last = None;
    for attempt in 0..=cfg.max_retries {
        let thin = 1usize << attempt;
        let attempt_seed = seed.child(format!("attempt-{attempt}"));
        let runs: Vec<Result<(Vec<Vec<f64>>, f64)>> = (0..cfg.chains)
            .into_par_iter()
            .map(|c| {
                let mut rng = attempt_seed.child(format!("chain-{c}")).stream();
                run_chain(target, &init, c, cfg, scheme, thin, &mut rng)
            })
            .collect();
        let mut chains = Vec::with_capacity(cfg.chains);
        let mut acceptance = Vec::with_capacity(cfg.chains);
        for r in runs {
            let (draws, acc) = r?;
            chains.push(draws);
            acceptance.push(acc);
        }
        let diagnostics = Diagnostics::from_chains(names.clone(), &chains);
        let converged = diagnostics.rhat.iter().all(|r| !r.is_nan() && *r <= cfg.max_rhat);
        let set = ChainSet {
            names: names.clone(),
            chains,
            acceptance,
            diagnostics,
        };
        if converged {
            return Ok(set);
        }
        last = Some(set);
    }
    let diag = last.map(|s| s.diagnostics).unwrap_or_default();
    Err(Error::Convergence(Box::new(diag)))
}

fn robbins_monro(n: usize) -> f64 {
    (n as f64 + 1.0).powf(-0.6)
}

struct State<'a, D: LogDensity> {
    target: &'a D,
    x: Vec<f64>,
    lp: f64,
}

impl<D: LogDensity> State<'_, D> {
    fn try_move(&mut self, prop: Vec<f64>, rng: &mut ChaCha8Rng) -> bool {
        let lp = self.target.log_density(&prop);
        let u: f64 = rng.random();
        if lp.is_finite() && u.ln() < lp - self.lp {
            self.x = prop;
            self.lp = lp;
            true
        } else {
            false
        }
    }

    fn componentwise_sweep(
        &mut self,
        log_scales: &mut [f64],
        rng: &mut ChaCha8Rng,
        adapt: Option<(f64, f64)>,
    ) -> usize {
        let mut accepted = 0;
        for j in 0..self.x.len() {
            let mut prop = self.x.clone();
            let z: f64 = rng.sample(StandardNormal);
            prop[j] += log_scales[j].exp() * z;
            let acc = self.try_move(prop, rng);
            accepted += acc as usize;
            if let Some((gamma, target)) = adapt {
                log_scales[j] += gamma * (acc as u8 as f64 - target);
            }
        }
        accepted
    }

    fn block_step(&mut self, chol: &[Vec<f64>], log_scale: f64, rng: &mut ChaCha8Rng) -> bool {
        let d = self.x.len();
        let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let s = log_scale.exp();
        let prop: Vec<f64> = (0..d)
            .map(|i| self.x[i] + s * (0..=i).map(|k| chol[i][k] * z[k]).sum::<f64>())
            .collect();
        self.try_move(prop, rng)
    }
}

fn run_chain<D, I>(
    target: &D,
    init: &I,
    chain: usize,
    cfg: &McmcConfig,
    scheme: Scheme,
    thin: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Vec<f64>>, f64)>
where
    D: LogDensity,
    I: Fn(usize, &mut ChaCha8Rng) -> Vec<f64>,
{
    let d = target.dim();
    let (x, lp) = (0..MAX_INIT_TRIES)
        .map(|_| {
            let x = init(chain, rng);
            let lp = target.log_density(&x);
            (x, lp)
        })
        .find(|(_, lp)| lp.is_finite())
        .ok_or_else(|| Error::Fit("no starting point with finite log density".into()))?;
    let mut st = State { target, x, lp };
    let warmup = cfg.warmup * thin;
    let iters = cfg.draws * thin;
    let mut log_scales = vec![(0.2f64).ln(); d];

    let mut kept = Vec::with_capacity(cfg.draws);
    let mut accepted = 0usize;
    let mut proposed = 0usize;

    match scheme {
        Scheme::Componentwise => {
            for it in 0..warmup {
                st.componentwise_sweep(
                    &mut log_scales,
                    rng,
                    Some((robbins_monro(it), cfg.target_acceptance)),
                );
            }
            for it in 0..iters {
                accepted += st.componentwise_sweep(&mut log_scales, rng, None);
                proposed += d;
                if (it + 1) % thin == 0 {
                    kept.push(st.x.clone());
                }
            }
        }
        Scheme::Block => {
            let warm_start = (warmup / 4).max(1);
            let cov_from = warmup / 8;
            let mut acc_cov = Welford::new(d);
            for it in 0..warm_start {
                st.componentwise_sweep(
                    &mut log_scales,
                    rng,
                    Some((robbins_monro(it), BLOCK_WARM_START_TARGET)),
                );
                if it >= cov_from {
                    acc_cov.push(&st.x);
                }
            }
            let fallback = |ls: &[f64]| -> Vec<Vec<f64>> {
                let mut m = vec![vec![0.0; d]; d];
                for i in 0..d {
                    m[i][i] = ls[i].exp();
                }
                m
            };
            let shape = |w: &Welford, ls: &[f64]| -> Vec<Vec<f64>> {
                let scale2 = 2.38 * 2.38 / d as f64;
                w.covariance()
                    .and_then(|mut c| {
                        for (i, row) in c.iter_mut().enumerate() {
                            for v in row.iter_mut() {
                                *v *= scale2;
                            }
                            row[i] += 1e-10;
                        }
                        cholesky(&c)
                    })
                    .unwrap_or_else(|| fallback(ls))
            };
            let mut chol = shape(&acc_cov, &log_scales);
            acc_cov = Welford::new(d);
            let mut log_scale = 0.0;
            let recompute = [warmup / 2, 3 * warmup / 4];
            for it in warm_start..warmup {
                let acc = st.block_step(&chol, log_scale, rng);
                log_scale +=
                    robbins_monro(it - warm_start) * (acc as u8 as f64 - cfg.target_acceptance);
                acc_cov.push(&st.x);
                if recompute.contains(&it) && acc_cov.n > 2 * d {
                    chol = shape(&acc_cov, &log_scales);
                    log_scale = 0.0;
                }
            }
            for it in 0..iters {
                accepted += st.block_step(&chol, log_scale, rng) as usize;
                proposed += 1;
                if (it + 1) % thin == 0 {
                    kept.push(st.x.clone());
                }
            }
        }
    }
    Ok((kept, accepted as f64 / proposed.max(1) as f64))
}

struct Welford {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<Vec<f64>>,
}

impl Welford {
    fn new(d: usize) -> Self {
        Welford {
            n: 0,
            mean: vec![0.0; d],
            m2: vec![vec![0.0; d]; d],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        let delta: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        for (m, dl) in self.mean.iter_mut().zip(&delta) {
            *m += dl / n;
        }
        for i in 0..x.len() {
            for j in 0..x.len() {
                self.m2[i][j] += delta[i] * (x[j] - self.mean[j]);
            }
        }
    }

    fn covariance(&self) -> Option<Vec<Vec<f64>>> {
        if self.n < 3 {
            return None;
        }
        let denom = (self.n - 1) as f64;
        Some(
            self.m2
                .iter()
                .map(|row| row.iter().map(|v| v / denom).collect())
                .collect(),
        )
    }
}

/// Lower-triangular Cholesky factor, or `None` if not positive definite.
fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let v = a[i][i] - s;
                if !(v > 0.0) {
                    return None;
                }
                l[i][j] = v.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}
