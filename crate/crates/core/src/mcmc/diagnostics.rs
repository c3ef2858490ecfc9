use serde::{Deserialize, Serialize};

/// Per-parameter convergence summary.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub names: Vec<String>,
    pub rhat: Vec<f64>,
    pub ess: Vec<f64>,
}

impl Diagnostics {
    /// `chains[c][i][p]`: chain, draw, parameter.
    pub fn from_chains(names: Vec<String>, chains: &[Vec<Vec<f64>>]) -> Self {
        let dim = names.len();
        let mut rhat = Vec::with_capacity(dim);
        let mut ess = Vec::with_capacity(dim);
        for p in 0..dim {
            let series: Vec<Vec<f64>> = chains
                .iter()
                .map(|c| c.iter().map(|d| d[p]).collect())
                .collect();
            rhat.push(split_rhat(&series));
            ess.push(effective_sample_size(&series));
        }
        Diagnostics { names, rhat, ess }
    }

    pub fn max_rhat(&self) -> f64 {
        self.rhat.iter().copied().fold(1.0, f64::max)
    }

    pub fn min_ess(&self) -> f64 {
        self.ess.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Combines diagnostics of independent runs of the same model: worst
    /// R-hat, summed ESS.
    pub fn merge(parts: &[Diagnostics]) -> Diagnostics {
        let Some(first) = parts.first() else {
            return Diagnostics::default();
        };
        let mut out = first.clone();
        for d in &parts[1..] {
            for (i, name) in d.names.iter().enumerate() {
                match out.names.iter().position(|n| n == name) {
                    Some(j) => {
                        out.rhat[j] = out.rhat[j].max(d.rhat[i]);
                        out.ess[j] += d.ess[i];
                    }
                    None => {
                        out.names.push(name.clone());
                        out.rhat.push(d.rhat[i]);
                        out.ess.push(d.ess[i]);
                    }
                }
            }
        }
        out
    }
}

fn split(chains: &[Vec<f64>]) -> Vec<&[f64]> {
    chains
        .iter()
        .flat_map(|c| {
            let half = c.len() / 2;
            [&c[..half], &c[c.len() - half..]]
        })
        .filter(|c| !c.is_empty())
        .collect()
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = if x.len() > 1 {
        x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, v)
}

/// Split-R-hat (chains halved, between/within variance ratio).
pub fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    let parts = split(chains);
    let m = parts.len();
    if m < 2 {
        return f64::NAN;
    }
    let n = parts.iter().map(|p| p.len()).min().unwrap_or(0) as f64;
    let stats: Vec<(f64, f64)> = parts.iter().map(|p| mean_var(p)).collect();
    let grand = stats.iter().map(|s| s.0).sum::<f64>() / m as f64;
    let b = n / (m as f64 - 1.0) * stats.iter().map(|s| (s.0 - grand).powi(2)).sum::<f64>();
    let w = stats.iter().map(|s| s.1).sum::<f64>() / m as f64;
    if w <= 0.0 {
        return if b <= 0.0 { 1.0 } else { f64::INFINITY };
    }
    let var_plus = (n - 1.0) / n * w + b / n;
    (var_plus / w).sqrt()
}

fn centered(x: &[f64]) -> Vec<f64> {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - m).collect()
}

fn autocovariance_at(c: &[f64], lag: usize) -> f64 {
    let n = c.len();
    c[..n - lag].iter().zip(&c[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64
}

/// Multi-chain effective sample size using Geyer's initial monotone sequence.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> f64 {
    let parts = split(chains);
    let m = parts.len();
    if m == 0 {
        return 0.0;
    }
    let n = parts.iter().map(|p| p.len()).min().unwrap_or(0);
    if n < 4 {
        return (m * n) as f64;
    }
    let parts: Vec<&[f64]> = parts.iter().map(|p| &p[..n]).collect();
    let centered: Vec<Vec<f64>> = parts.iter().map(|p| centered(p)).collect();
    let stats: Vec<(f64, f64)> = parts.iter().map(|p| mean_var(p)).collect();
    let nf = n as f64;
    let grand = stats.iter().map(|s| s.0).sum::<f64>() / m as f64;
    let w = stats.iter().map(|s| s.1).sum::<f64>() / m as f64;
    let b = if m > 1 {
        nf / (m as f64 - 1.0) * stats.iter().map(|s| (s.0 - grand).powi(2)).sum::<f64>()
    } else {
        0.0
    };
    let var_plus = (nf - 1.0) / nf * w + b / nf;
    if var_plus <= 0.0 {
        return (m * n) as f64;
    }
    let rho = |t: usize| -> f64 {
        let mean_acov = centered.iter().map(|c| autocovariance_at(c, t)).sum::<f64>() / m as f64;
        1.0 - (w - mean_acov) / var_plus
    };
    let mut pairs = Vec::new();
    let mut t = 0;
    while t + 1 < n {
        let p = rho(t) + rho(t + 1);
        if p < 0.0 {
            break;
        }
        pairs.push(p);
        t += 2;
    }
    for i in 1..pairs.len() {
        if pairs[i] > pairs[i - 1] {
            pairs[i] = pairs[i - 1];
        }
    }
    let total = (m * n) as f64;
    let tau = (-1.0 + 2.0 * pairs.iter().sum::<f64>()).max(1.0 / total.log10());
    total / tau
}
