use std::io::Write;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_growth, GrowthOptions, GrowthPosterior, Interval};
use super::severe_exceedance;
use crate::delay_model::{fit_delay, impute_arrivals, observations_from_cases};
use crate::domain::{DayIndex, RngSeed};
use crate::error::{Error, Result};
use crate::ingest::{filter_window, CaseReport, OriginConfig, VolumeTable};

pub const DEFAULT_THRESHOLD: f64 = 0.1;

pub const SEQUENTIAL_COLUMNS: [&str; 9] = [
    "decision_date",
    "beta1_mean",
    "beta1_lo",
    "beta1_hi",
    "td_mean",
    "td_lo",
    "td_hi",
    "p_exceed",
    "detected",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SequentialOptions {
    /// Alert when the lower 95% bound of beta1 exceeds this.
    pub threshold: f64,
    pub growth: GrowthOptions,
    /// Skip the capacity probability.
    pub skip_exceedance: bool,
}

impl Default for SequentialOptions {
    fn default() -> Self {
        SequentialOptions {
            threshold: DEFAULT_THRESHOLD,
            growth: GrowthOptions::default(),
            skip_exceedance: false,
        }
    }
}

/// Refits the delay model on pairs confirmed by `decision_date`, imputes,
/// and fits the growth model with q computed against `decision_date`.
/// All randomness comes from `seed/date-<decision_date>`.
pub fn fit_at_date(
    cases: &[CaseReport],
    volumes: &VolumeTable,
    config: &OriginConfig,
    decision_date: NaiveDate,
    growth: &GrowthOptions,
    seed: &RngSeed,
) -> Result<GrowthPosterior> {
    let run = || -> Result<GrowthPosterior> {
        let window = filter_window(cases, decision_date);
        volumes.check_covers(&window)?;
        let seed = seed.child(format!("date-{decision_date}"));
        let delay = fit_delay(&observations_from_cases(&window), &growth.delay_mcmc, &seed)?;
        let destinations: Vec<String> = volumes.destinations().map(String::from).collect();
        let imputed = impute_arrivals(
            &window,
            &delay,
            &destinations,
            growth.imputations,
            config.epidemic_start,
            decision_date,
            &seed,
        )?;
        fit_growth(
            &imputed,
            volumes,
            config,
            decision_date,
            &growth.growth_mcmc,
            growth.destination_effects,
            &seed.child("growth"),
        )
    };
    run().map_err(|e| e.at_date(decision_date))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequentialRow {
    pub decision_date: NaiveDate,
    pub n_cases: u64,
    pub beta1: Interval,
    pub td: Interval,
    pub p_exceed: Option<f64>,
    pub max_rhat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequentialSummary {
    pub origin: String,
    pub initial_cases: u64,
    pub threshold: f64,
    pub rows: Vec<SequentialRow>,
    pub detection_date: Option<NaiveDate>,
}

impl SequentialSummary {
    /// First decision date whose lower 95% bound of beta1 exceeds `threshold`.
    pub fn detection_date(&self, threshold: f64) -> Option<NaiveDate> {
        self.rows
            .iter()
            .find(|r| r.beta1.lo > threshold)
            .map(|r| r.decision_date)
    }

    pub fn row_at(&self, date: NaiveDate) -> Option<&SequentialRow> {
        self.rows.iter().find(|r| r.decision_date == date)
    }

    pub fn last(&self) -> Option<&SequentialRow> {
        self.rows.last()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(SEQUENTIAL_COLUMNS)?;
        for r in &self.rows {
            out.write_record([
                r.decision_date.to_string(),
                r.beta1.mean.to_string(),
                r.beta1.lo.to_string(),
                r.beta1.hi.to_string(),
                r.td.mean.to_string(),
                r.td.lo.to_string(),
                r.td.hi.to_string(),
                r.p_exceed.map(|p| p.to_string()).unwrap_or_default(),
                (r.beta1.lo > self.threshold).to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Daily refits from the first confirmation through the study end.
pub fn sequential_estimates(
    cases: &[CaseReport],
    volumes: &VolumeTable,
    config: &OriginConfig,
    opts: &SequentialOptions,
    seed: &RngSeed,
) -> Result<SequentialSummary> {
    config.validate()?;
    let included: Vec<CaseReport> = filter_window(cases, config.study_end);
    let first = included
        .iter()
        .map(|c| c.confirm_date)
        .min()
        .ok_or_else(|| Error::Domain("no confirmed cases in the study window".into()))?;
    let dates: Vec<NaiveDate> = first.iter_days().take_while(|d| *d <= config.study_end).collect();
    let rows: Vec<Result<SequentialRow>> = dates
        .par_iter()
        .map(|&date| {
            let post = fit_at_date(&included, volumes, config, date, &opts.growth, seed)?;
            let t = DayIndex::from_date(config.epidemic_start, date);
            Ok(SequentialRow {
                decision_date: date,
                n_cases: filter_window(&included, date).iter().map(|c| c.n_cases as u64).sum(),
                beta1: post.beta1(),
                td: post.doubling_time(),
                p_exceed: (!opts.skip_exceedance).then(|| severe_exceedance(&post, config, t)),
                max_rhat: post.diagnostics.max_rhat(),
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mut summary = SequentialSummary {
        origin: config.name.clone(),
        initial_cases: config.initial_cases,
        threshold: opts.threshold,
        rows,
        detection_date: None,
    };
    summary.detection_date = summary.detection_date(opts.threshold);
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub initial_cases: u64,
    pub summary: SequentialSummary,
}

pub const COMPARISON_COLUMNS: [&str; 7] = [
    "initial_cases",
    "decision_date",
    "beta1_mean",
    "beta1_lo",
    "beta1_hi",
    "p_exceed",
    "detection_date",
];

/// Sequential runs with `beta0 = log(I0 / population)` for each listed I0.
/// Every scenario uses the same seed.
pub fn sensitivity_run(
    cases: &[CaseReport],
    volumes: &VolumeTable,
    config: &OriginConfig,
    initial_cases: &[u64],
    opts: &SequentialOptions,
    seed: &RngSeed,
) -> Result<Vec<Scenario>> {
    if initial_cases.is_empty() || initial_cases.iter().any(|&k| k == 0) {
        return Err(Error::Config("initial case counts must be at least 1".into()));
    }
    initial_cases
        .iter()
        .map(|&k| {
            let cfg = config.with_initial_cases(k);
            Ok(Scenario {
                initial_cases: k,
                summary: sequential_estimates(cases, volumes, &cfg, opts, seed)?,
            })
        })
        .collect()
}

/// Final-date comparison across scenarios.
pub fn write_comparison_csv<W: Write>(scenarios: &[Scenario], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(COMPARISON_COLUMNS)?;
    for s in scenarios {
        let Some(r) = s.summary.last() else { continue };
        out.write_record([
            s.initial_cases.to_string(),
            r.decision_date.to_string(),
            r.beta1.mean.to_string(),
            r.beta1.lo.to_string(),
            r.beta1.hi.to_string(),
            r.p_exceed.map(|p| p.to_string()).unwrap_or_default(),
            s.summary.detection_date.map(|d| d.to_string()).unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
