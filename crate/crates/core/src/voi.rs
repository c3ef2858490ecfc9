//! Integrated quadratic distance between sample sets, and the value of
//! information of each day's case reports and arrival dates.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;

use chrono::NaiveDate;
use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::RngSeed;
use crate::error::{Error, Result};
use crate::growth_model::{fit_at_date, GrowthOptions};
use crate::ingest::{filter_window, CaseReport, OriginConfig, VolumeTable};

/// Per-side cap applied before the pairwise computation.
pub const IQD_SUBSAMPLE: usize = 2000;

/// `sum_i sum_j |x_i - x_j|` over ordered pairs, for sorted `x`.
fn within_sum(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    2.0 * sorted
        .iter()
        .enumerate()
        .map(|(j, &v)| v * (2.0 * j as f64 - n + 1.0))
        .sum::<f64>()
}

/// `sum_a sum_b |x_a - y_b|` for sorted `x` and `y`, by a merge sweep.
fn cross_sum(x: &[f64], y: &[f64]) -> f64 {
    let total_y: f64 = y.iter().sum();
    let mut k = 0usize;
    let mut below = 0.0;
    let mut acc = 0.0;
    let b = y.len() as f64;
    for &v in x {
        while k < y.len() && y[k] <= v {
            below += y[k];
            k += 1;
        }
        let kf = k as f64;
        acc += v * kf - below + (total_y - below) - v * (b - kf);
    }
    acc
}

/// IQD of the empirical distributions of `f` and `g`, using every sample.
/// Symmetric in its arguments bit for bit.
pub fn iqd_exact(f: &[f64], g: &[f64]) -> Result<f64> {
    if f.is_empty() || g.is_empty() {
        return Err(Error::Domain("iqd needs two nonempty sample sets".into()));
    }
    if f.iter().chain(g).any(|v| !v.is_finite()) {
        return Err(Error::Domain("iqd samples must be finite".into()));
    }
    let sf = crate::dist::sorted(f.iter().copied());
    let sg = crate::dist::sorted(g.iter().copied());
    let (a, b) = (sf.len() as f64, sg.len() as f64);
    let cross = 0.5 * (cross_sum(&sf, &sg) + cross_sum(&sg, &sf)) / (a * b);
    let within = within_sum(&sf) / (a * a) + within_sum(&sg) / (b * b);
    Ok(cross - 0.5 * within)
}

fn subsample(values: &[f64], cap: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
    if values.len() <= cap {
        return values.to_vec();
    }
    let mut idx = sample_indices(rng, values.len(), cap).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| values[i]).collect()
}

/// IQD after subsampling each side without replacement to at most
/// [`IQD_SUBSAMPLE`] draws, using streams derived from `seed`.
pub fn iqd(f: &[f64], g: &[f64], seed: &RngSeed) -> Result<f64> {
    let fs = subsample(f, IQD_SUBSAMPLE, &mut seed.child("f").stream());
    let gs = subsample(g, IQD_SUBSAMPLE, &mut seed.child("g").stream());
    iqd_exact(&fs, &gs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoiKind {
    Case,
    Arrival,
}

impl fmt::Display for VoiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VoiKind::Case => "case",
            VoiKind::Arrival => "arrival",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoiRow {
    pub source_date: NaiveDate,
    pub kind: VoiKind,
    pub voi_raw: f64,
}

impl VoiRow {
    pub fn voi_clamped(&self) -> f64 {
        self.voi_raw.max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoiResult {
    pub decision_date: NaiveDate,
    pub rows: Vec<VoiRow>,
}

pub const VOI_COLUMNS: [&str; 5] = ["decision_date", "source_date", "kind", "voi_raw", "voi_clamped"];

impl VoiResult {
    pub fn get(&self, source_date: NaiveDate, kind: VoiKind) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.source_date == source_date && r.kind == kind)
            .map(|r| r.voi_raw)
    }

    pub fn source_dates(&self) -> BTreeSet<NaiveDate> {
        self.rows.iter().map(|r| r.source_date).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(VOI_COLUMNS)?;
        for r in &self.rows {
            out.write_record([
                self.decision_date.to_string(),
                r.source_date.to_string(),
                r.kind.to_string(),
                r.voi_raw.to_string(),
                r.voi_clamped().to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Reports with day `day`'s confirmations removed.
fn without_reports(cases: &[CaseReport], day: NaiveDate) -> Vec<CaseReport> {
    cases.iter().filter(|c| c.confirm_date != day).cloned().collect()
}

/// Reports with the known arrival dates of day `day`'s confirmations blanked.
fn without_arrivals(cases: &[CaseReport], day: NaiveDate) -> Vec<CaseReport> {
    cases
        .iter()
        .map(|c| {
            let mut c = c.clone();
            if c.confirm_date == day {
                c.arrival_date = None;
            }
            c
        })
        .collect()
}

/// Runs the requested VOI analyses at `decision_date`. Every fit, full or
/// reduced, uses the same derived streams, so differences reflect the data.
pub fn voi_analysis(
    cases: &[CaseReport],
    volumes: &VolumeTable,
    config: &OriginConfig,
    decision_date: NaiveDate,
    kinds: &[VoiKind],
    growth: &GrowthOptions,
    seed: &RngSeed,
) -> Result<VoiResult> {
    let window = filter_window(cases, decision_date);
    let dates: BTreeSet<NaiveDate> = window.iter().map(|c| c.confirm_date).collect();
    if dates.len() < 2 {
        return Err(Error::Domain(format!(
            "value of information needs reports on at least 2 dates up to {decision_date}, found {}",
            dates.len()
        )));
    }
    let full = fit_at_date(&window, volumes, config, decision_date, growth, seed)?.beta1_draws();
    let mut jobs: Vec<(NaiveDate, VoiKind)> = Vec::new();
    for &kind in kinds.iter().collect::<BTreeSet<_>>() {
        for &d in &dates {
            let has_arrival = window.iter().any(|c| c.confirm_date == d && c.has_known_arrival());
            if kind == VoiKind::Case || has_arrival {
                jobs.push((d, kind));
            }
        }
    }
    let rows: Vec<Result<VoiRow>> = jobs
        .par_iter()
        .map(|&(day, kind)| {
            let reduced = match kind {
                VoiKind::Case => without_reports(&window, day),
                VoiKind::Arrival => without_arrivals(&window, day),
            };
            let g = fit_at_date(&reduced, volumes, config, decision_date, growth, seed)?.beta1_draws();
            let stream = seed.child(format!("iqd/{decision_date}/{day}/{kind}"));
            Ok(VoiRow {
                source_date: day,
                kind,
                voi_raw: iqd(&full, &g, &stream)?,
            })
        })
        .collect();
    Ok(VoiResult {
        decision_date,
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}

pub fn voi_case_reports(
    cases: &[CaseReport],
    volumes: &VolumeTable,
    config: &OriginConfig,
    decision_date: NaiveDate,
    growth: &GrowthOptions,
    seed: &RngSeed,
) -> Result<VoiResult> {
    voi_analysis(cases, volumes, config, decision_date, &[VoiKind::Case], growth, seed)
}

pub fn voi_arrival_dates(
    cases: &[CaseReport],
    volumes: &VolumeTable,
    config: &OriginConfig,
    decision_date: NaiveDate,
    growth: &GrowthOptions,
    seed: &RngSeed,
) -> Result<VoiResult> {
    voi_analysis(cases, volumes, config, decision_date, &[VoiKind::Arrival], growth, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::fixtures;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn normals(seed: u64, n: usize, shift: f64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| shift + rng.sample::<f64, _>(StandardNormal)).collect()
    }

    // Direct double loops over all pairs.
    fn iqd_pairs(f: &[f64], g: &[f64]) -> f64 {
        let mean_abs = |a: &[f64], b: &[f64]| {
            a.iter().map(|x| b.iter().map(|y| (x - y).abs()).sum::<f64>()).sum::<f64>()
                / (a.len() * b.len()) as f64
        };
        mean_abs(f, g) - 0.5 * (mean_abs(f, f) + mean_abs(g, g))
    }

    #[test]
    fn point_masses() {
        assert_eq!(iqd_exact(&[3.0; 5], &[3.0; 7]).unwrap(), 0.0);
        assert_eq!(iqd_exact(&[1.5], &[4.0]).unwrap(), 2.5);
        assert!(iqd_exact(&[], &[1.0]).is_err());
    }

    #[test]
    fn sorted_formula_matches_pairwise_loop() {
        let f = normals(1, 300, 0.0);
        let g = normals(2, 170, 0.7);
        let a = iqd_exact(&f, &g).unwrap();
        let b = iqd_pairs(&f, &g);
        assert!((a - b).abs() < 1e-10, "{a} {b}");
    }

    #[test]
    fn shifted_normals_match_fresh_pair_oracle() {
        let f = normals(3, 2000, 0.0);
        let g = normals(4, 2000, 1.0);
        let est = iqd(&f, &g, &RngSeed::root(1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut z = || rng.sample::<f64, _>(StandardNormal);
        let n = 1_000_000;
        let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            xy += (z() - (1.0 + z())).abs();
            xx += (z() - z()).abs();
            yy += ((1.0 + z()) - (1.0 + z())).abs();
        }
        let oracle = (xy - 0.5 * (xx + yy)) / n as f64;
        assert!((est - oracle).abs() < 0.03, "{est} vs {oracle}");
    }

    #[test]
    fn equal_distributions_near_zero() {
        let all = normals(5, 4000, 0.0);
        let v = iqd_exact(&all[..2000], &all[2000..]).unwrap();
        assert!(v.abs() < 0.02, "{v}");
        let mean: f64 = (0..50)
            .map(|s| iqd(&normals(100 + s, 2000, 0.0), &normals(200 + s, 2000, 0.0), &RngSeed::root(s)).unwrap())
            .sum::<f64>()
            / 50.0;
        assert!(mean.abs() < 0.005, "{mean}");
    }

    #[test]
    fn symmetry() {
        let f = normals(6, 2500, 0.0);
        let g = normals(7, 3100, 0.4);
        assert_eq!(iqd_exact(&f, &g).unwrap(), iqd_exact(&g, &f).unwrap());
        let a = iqd(&f, &g, &RngSeed::root(1)).unwrap();
        let b = iqd(&g, &f, &RngSeed::root(2)).unwrap();
        assert!((a - b).abs() < 0.02, "{a} {b}");
    }

    #[test]
    fn subsample_caps_and_keeps_small_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v: Vec<f64> = (0..5000).map(|i| i as f64).collect();
        let s = subsample(&v, 2000, &mut rng);
        assert_eq!(s.len(), 2000);
        assert_eq!(s.iter().map(|v| *v as u64).collect::<BTreeSet<_>>().len(), 2000);
        assert_eq!(subsample(&v[..10], 2000, &mut rng), v[..10].to_vec());
    }

    proptest! {
        #[test]
        fn point_mass_triangle(a in -50.0f64..50.0, b in -50.0f64..50.0, c in -50.0f64..50.0) {
            let d = |x: f64, y: f64| iqd_exact(&[x], &[y]).unwrap();
            // Exact up to the rounding of the differences themselves.
            let ulps = 4.0 * f64::EPSILON * (a.abs() + b.abs() + c.abs());
            prop_assert!(d(a, c) <= d(a, b) + d(b, c) + ulps);
            prop_assert_eq!(d(a, b), (a - b).abs());
        }
    }

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn needs_two_report_dates() {
        let f = fixtures::wuhan();
        let err = voi_case_reports(&f.cases, &f.volumes, &f.origin, date("2020-01-14"), &GrowthOptions::default(), &RngSeed::root(1));
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn removing_an_empty_day_changes_nothing() {
        let f = fixtures::wuhan();
        let window = filter_window(&f.cases, date("2020-01-17"));
        let reduced = without_reports(&window, date("2020-01-16"));
        assert_eq!(reduced, window);
        let opts = GrowthOptions::default();
        let seed = RngSeed::root(3);
        let a = fit_at_date(&window, &f.volumes, &f.origin, date("2020-01-17"), &opts, &seed).unwrap();
        let b = fit_at_date(&reduced, &f.volumes, &f.origin, date("2020-01-17"), &opts, &seed).unwrap();
        let v = iqd(&a.beta1_draws(), &b.beta1_draws(), &seed).unwrap();
        assert!(v.abs() < 0.01, "{v}");
    }

    #[test]
    fn blanking_only_touches_known_dates_of_that_day() {
        let f = fixtures::wuhan();
        let blanked = without_arrivals(&f.included(), date("2020-01-22"));
        let day: Vec<_> = blanked.iter().filter(|c| c.confirm_date == date("2020-01-22")).collect();
        assert_eq!(day.len(), 2);
        assert!(day.iter().all(|c| c.arrival_date.is_none()));
        let others = blanked.iter().filter(|c| c.confirm_date != date("2020-01-22") && c.arrival_date.is_some()).count();
        assert_eq!(others, 9);
    }
}
