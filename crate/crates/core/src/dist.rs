//! Log densities, the mean/dispersion negative binomial, and small sample
//! summaries used across the models.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

/// Negative binomial with mean `mean` and variance `mean + mean^2 / dispersion`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegBinomial {
    pub mean: f64,
    pub dispersion: f64,
}

impl NegBinomial {
    pub fn new(mean: f64, dispersion: f64) -> Self {
        NegBinomial { mean, dispersion }
    }

    pub fn variance(&self) -> f64 {
        self.mean + self.mean * self.mean / self.dispersion
    }

    pub fn ln_pmf(&self, k: u64) -> f64 {
        let (mu, phi) = (self.mean, self.dispersion);
        if !(mu > 0.0) || !(phi > 0.0) {
            return f64::NEG_INFINITY;
        }
        let k = k as f64;
        ln_gamma(k + phi) - ln_gamma(phi) - ln_gamma(k + 1.0) - phi * (mu / phi).ln_1p()
            + k * (mu.ln() - (phi + mu).ln())
    }

    pub fn pmf(&self, k: u64) -> f64 {
        self.ln_pmf(k).exp()
    }

    /// `P(T <= k)`, via the regularized incomplete beta function.
    pub fn cdf(&self, k: i64) -> f64 {
        if k < 0 {
            return 0.0;
        }
        let p = self.dispersion / (self.dispersion + self.mean);
        beta_reg(self.dispersion, k as f64 + 1.0, p).clamp(0.0, 1.0)
    }

    /// Gamma-Poisson mixture draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let rate = Gamma::new(self.dispersion, self.mean / self.dispersion)
            .expect("positive negative-binomial parameters")
            .sample(rng);
        poisson(rate, rng)
    }
}

pub(crate) fn poisson<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> u64 {
    if !(rate > 0.0) {
        return 0;
    }
    Poisson::new(rate).map(|p| p.sample(rng) as u64).unwrap_or(0)
}

/// Gamma log density with shape/rate parameterization.
pub fn gamma_ln_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    if !(x > 0.0) || !(shape > 0.0) || !(rate > 0.0) {
        return f64::NEG_INFINITY;
    }
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

pub fn half_cauchy_ln_pdf(x: f64, scale: f64) -> f64 {
    if x < 0.0 {
        return f64::NEG_INFINITY;
    }
    (2.0 / (std::f64::consts::PI * scale)).ln() - (x / scale).powi(2).ln_1p()
}

pub fn normal_ln_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

/// `ln C(n, k)`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Binomial log pmf, including the combinatorial constant.
pub fn binomial_ln_pmf(k: u64, trials: u64, p: f64) -> f64 {
    if k > trials {
        return f64::NEG_INFINITY;
    }
    ln_choose(trials, k) + binomial_kernel(k, trials, p)
}

/// `k ln p + (n - k) ln(1 - p)` with the 0·ln 0 = 0 convention.
#[inline]
pub fn binomial_kernel(k: u64, trials: u64, p: f64) -> f64 {
    let failures = trials - k;
    let mut v = 0.0;
    if k > 0 {
        v += k as f64 * p.ln();
    }
    if failures > 0 {
        v += failures as f64 * (-p).ln_1p();
    }
    v
}

/// Linear-interpolated quantile of an already sorted slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn sorted(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
