use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::delay_model::ImputedDataset;
use crate::dist::{binomial_kernel, ln_choose};
use crate::domain::{DayIndex, GrowthParams};
use crate::error::{Error, Result};
use crate::ingest::{OriginConfig, VolumeTable};

/// Exported-case counts and effective traveler numbers for one completed
/// dataset, over every destination in the volume table and days `0..=t_end`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthData {
    pub destinations: Vec<String>,
    pub beta0: f64,
    /// `cells[i][t] = (n_it, trials_it)`.
    pub cells: Vec<Vec<(u64, u64)>>,
    /// Per-day sums over destinations, used when there are no destination effects.
    pub totals: Vec<(u64, u64)>,
    /// Sum of the binomial coefficients; constant in the parameters.
    pub log_binom_const: f64,
}

impl GrowthData {
    pub fn build(
        dataset: &ImputedDataset,
        volumes: &VolumeTable,
        config: &OriginConfig,
        decision_date: NaiveDate,
    ) -> Result<Self> {
        let t0 = config.epidemic_start;
        let t_end = DayIndex::from_date(t0, decision_date).0;
        if t_end < 0 {
            return Err(Error::Domain(format!(
                "decision date {decision_date} precedes epidemic start {t0}"
            )));
        }
        let days = t_end as usize + 1;
        let destinations: Vec<String> = volumes.destinations().map(String::from).collect();
        let mut counts: BTreeMap<&str, Vec<u64>> =
            destinations.iter().map(|d| (d.as_str(), vec![0; days])).collect();
        for c in &dataset.cases {
            if c.confirm_date > decision_date {
                continue;
            }
            let arrival = c.arrival_date.ok_or_else(|| {
                Error::Domain(format!("case confirmed {} has no arrival date", c.confirm_date))
            })?;
            let row = counts.get_mut(c.destination.as_str()).ok_or_else(|| {
                Error::Domain(format!("destination {} has no travel volume", c.destination))
            })?;
            let t = DayIndex::from_date(t0, arrival).0.clamp(0, t_end) as usize;
            row[t] += c.n_cases as u64;
        }
        let mut cells = Vec::with_capacity(destinations.len());
        let mut totals = vec![(0u64, 0u64); days];
        let mut log_binom_const = 0.0;
        for d in &destinations {
            let q = dataset
                .q
                .get(d)
                .ok_or_else(|| Error::Domain(format!("no q factors for destination {d}")))?;
            if q.len() < days {
                return Err(Error::Domain(format!(
                    "q factors for {d} cover {} days, need {days}",
                    q.len()
                )));
            }
            let n_i = volumes.get(d).expect("destination from the volume table");
            let row: Vec<(u64, u64)> = counts[d.as_str()]
                .iter()
                .zip(q)
                .map(|(&n, &q)| {
                    let trials = ((n_i * q).round() as u64).max(n);
                    (n, trials)
                })
                .collect();
            for (t, &(n, trials)) in row.iter().enumerate() {
                totals[t].0 += n;
                totals[t].1 += trials;
                log_binom_const += ln_choose(trials, n);
            }
            cells.push(row);
        }
        Ok(GrowthData {
            destinations,
            beta0: config.beta0(),
            cells,
            totals,
            log_binom_const,
        })
    }

    pub fn t_end(&self) -> usize {
        self.totals.len() - 1
    }

    pub fn total_cases(&self) -> u64 {
        self.totals.iter().map(|t| t.0).sum()
    }

    /// Log likelihood without the binomial coefficients.
    pub fn log_kernel(&self, beta1: f64, alpha: f64, effects: Option<&[f64]>) -> f64 {
        let p = |t: usize, b: f64| -> f64 {
            (self.beta0 + beta1 * t as f64 + alpha + b).min(0.0).exp()
        };
        match effects {
            None => self
                .totals
                .iter()
                .enumerate()
                .map(|(t, &(n, trials))| binomial_kernel(n, trials, p(t, 0.0)))
                .sum(),
            Some(b) => self
                .cells
                .iter()
                .zip(b)
                .map(|(row, &b)| {
                    row.iter()
                        .enumerate()
                        .map(|(t, &(n, trials))| binomial_kernel(n, trials, p(t, b)))
                        .sum::<f64>()
                })
                .sum(),
        }
    }

    pub fn log_likelihood(&self, beta1: f64, alpha: f64, effects: Option<&[f64]>) -> f64 {
        self.log_binom_const + self.log_kernel(beta1, alpha, effects)
    }
}

/// Binomial log likelihood of one completed dataset up to `decision_date`.
/// `effects` holds destination random effects keyed by destination; missing
/// entries count as 0.
pub fn growth_log_likelihood(
    params: &GrowthParams,
    effects: Option<&BTreeMap<String, f64>>,
    dataset: &ImputedDataset,
    volumes: &VolumeTable,
    config: &OriginConfig,
    decision_date: NaiveDate,
) -> Result<f64> {
    let mut data = GrowthData::build(dataset, volumes, config, decision_date)?;
    data.beta0 = params.beta0;
    let b: Option<Vec<f64>> = effects.map(|m| {
        data.destinations
            .iter()
            .map(|d| m.get(d).copied().unwrap_or(0.0))
            .collect()
    });
    Ok(data.log_likelihood(params.beta1, params.alpha, b.as_deref()))
}
