//! Simulation test of whether exported cases exceed what a slowly growing
//! epidemic at the origin would produce.
//!
//! Under the null, the number of infected travelers on day `d` is
//! `Binomial(N, min(rho0 e^(beta d), 1))`. Simulated cumulative counts give,
//! for each day and significance level, the smallest cumulative count whose
//! tail probability under the null is at most alpha.

use std::fmt;
use std::io::Write;

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::RngSeed;
use crate::error::{Error, Result};

/// Fewest simulations accepted for a threshold table.
pub const MIN_SIMS: usize = 1000;
/// Simulations per derived stream. Fixed so results do not depend on the
/// number of worker threads.
const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Days counted from the first local infection.
    KnownStart,
    /// Days counted from the first exported case.
    UnknownStart,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::KnownStart => "known_start",
            Mode::UnknownStart => "unknown_start",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "known" | "known_start" => Ok(Mode::KnownStart),
            "unknown" | "unknown_start" => Ok(Mode::UnknownStart),
            other => Err(Error::Config(format!("unknown mode {other:?}, expected known or unknown"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub rho0: f64,
    pub beta1_null: f64,
    pub n_travelers: u64,
    pub horizon_days: usize,
    pub n_sims: usize,
    pub alphas: Vec<f64>,
    pub seed: u64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            rho0: 1e-4,
            beta1_null: 0.1,
            n_travelers: 1000,
            horizon_days: 100,
            n_sims: 100_000,
            alphas: vec![0.05, 0.01, 0.001],
            seed: 1,
        }
    }
}

/// A rejected configuration field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: &str, message: impl Into<String>) -> Self {
        FieldError {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl DetectorConfig {
    pub fn problems(&self) -> Vec<FieldError> {
        let mut out = Vec::new();
        if !(self.rho0 > 0.0 && self.rho0 < 1.0) {
            out.push(FieldError::new("rho0", "must be in (0, 1)"));
        }
        if !self.beta1_null.is_finite() {
            out.push(FieldError::new("beta1_null", "must be finite"));
        }
        if self.n_travelers == 0 {
            out.push(FieldError::new("n_travelers", "must be positive"));
        }
        if self.horizon_days == 0 {
            out.push(FieldError::new("horizon_days", "must be positive"));
        }
        if self.n_sims < MIN_SIMS {
            out.push(FieldError::new("n_sims", format!("must be at least {MIN_SIMS}")));
        }
        if self.alphas.is_empty() {
            out.push(FieldError::new("alphas", "must list at least one level"));
        }
        if self.alphas.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
            out.push(FieldError::new("alphas", "each level must be in (0, 1)"));
        }
        let mut seen = self.alphas.clone();
        seen.sort_by(f64::total_cmp);
        seen.dedup();
        if seen.len() != self.alphas.len() {
            out.push(FieldError::new("alphas", "levels must be distinct"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            return Ok(());
        }
        let text: Vec<String> = problems.iter().map(ToString::to_string).collect();
        Err(Error::Config(text.join("; ")))
    }

    /// Daily export probability on day `d >= 1`, capped at 1.
    pub fn daily_probability(&self, d: usize) -> f64 {
        (self.rho0 * (self.beta1_null * d as f64).exp()).min(1.0)
    }
}

/// Cumulative exported cases, one row of `horizon` days per simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectories {
    pub horizon: usize,
    cumulative: Vec<u64>,
}

impl Trajectories {
    pub fn from_rows(horizon: usize, rows: &[Vec<u64>]) -> Self {
        assert!(rows.iter().all(|r| r.len() == horizon), "rows must have {horizon} days");
        Trajectories {
            horizon,
            cumulative: rows.concat(),
        }
    }

    pub fn n_sims(&self) -> usize {
        if self.horizon == 0 {
            0
        } else {
            self.cumulative.len() / self.horizon
        }
    }

    /// Cumulative counts of simulation `i`; index 0 is day 1.
    pub fn row(&self, i: usize) -> &[u64] {
        &self.cumulative[i * self.horizon..(i + 1) * self.horizon]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.cumulative.chunks_exact(self.horizon.max(1))
    }
}

/// Simulates `cfg.n_sims` cumulative trajectories of the configured process.
/// Ignores `cfg.alphas` and the simulation floor, so it also serves power
/// checks under alternatives.
pub fn simulate_trajectories(cfg: &DetectorConfig) -> Result<Trajectories> {
    simulate_with(cfg, &RngSeed::root(cfg.seed).child("sims"))
}

fn simulate_with(cfg: &DetectorConfig, seed: &RngSeed) -> Result<Trajectories> {
    if !(cfg.rho0 >= 0.0 && cfg.rho0 <= 1.0) || !cfg.beta1_null.is_finite() {
        return Err(Error::Config("rho0 must be in [0, 1] and beta1_null finite".into()));
    }
    let horizon = cfg.horizon_days;
    let daily: Vec<Binomial> = (1..=horizon)
        .map(|d| Binomial::new(cfg.n_travelers, cfg.daily_probability(d)))
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Config(format!("binomial parameters: {e}")))?;
    let n_chunks = cfg.n_sims.div_ceil(CHUNK);
    let chunks: Vec<Vec<u64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(cfg.n_sims - c * CHUNK);
            let mut rng = seed.child(c).stream();
            let mut out = Vec::with_capacity(count * horizon);
            for _ in 0..count {
                let mut total = 0u64;
                for dist in &daily {
                    total += dist.sample(&mut rng);
                    out.push(total);
                }
            }
            out
        })
        .collect();
    Ok(Trajectories {
        horizon,
        cumulative: chunks.concat(),
    })
}

/// Smallest threshold per day and level. `None` means no count can reject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub mode: Mode,
    pub alphas: Vec<f64>,
    /// `min_cases[d - 1][j]` for day `d` and `alphas[j]`.
    pub min_cases: Vec<Vec<Option<u64>>>,
    /// Simulations contributing to each day.
    pub support: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub day: usize,
    pub alpha: f64,
    #[serde(with = "never")]
    pub min_cases: Option<u64>,
}

/// `None` is written as the string "never".
mod never {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(n) => s.serialize_u64(*n),
            None => s.serialize_str("never"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(Some(n)),
            Raw::S(s) if s == "never" => Ok(None),
            Raw::S(s) => Err(serde::de::Error::custom(format!("expected integer or \"never\", got {s:?}"))),
        }
    }
}

pub const THRESHOLD_COLUMNS: [&str; 4] = ["mode", "day", "alpha", "min_cases"];

impl ThresholdTable {
    pub fn horizon(&self) -> usize {
        self.min_cases.len()
    }

    pub fn get(&self, day: usize, alpha: f64) -> Option<Option<u64>> {
        let j = self.alphas.iter().position(|&a| a == alpha)?;
        self.min_cases.get(day.checked_sub(1)?).map(|r| r[j])
    }

    /// Rows ordered by day, then by the order of `alphas`.
    pub fn rows(&self) -> Vec<ThresholdRow> {
        self.min_cases
            .iter()
            .enumerate()
            .flat_map(|(i, per)| {
                self.alphas.iter().zip(per).map(move |(&alpha, &min_cases)| ThresholdRow {
                    day: i + 1,
                    alpha,
                    min_cases,
                })
            })
            .collect()
    }

    /// CSV with the configuration as a leading `#` JSON comment line.
    pub fn write_csv<W: Write>(&self, cfg: &DetectorConfig, mut w: W) -> Result<()> {
        let header = serde_json::to_string(&TableHeader { mode: self.mode, config: cfg })
            .map_err(|e| Error::Fit(e.to_string()))?;
        let io = |e: std::io::Error| Error::Fit(format!("writing threshold table: {e}"));
        writeln!(w, "# {header}").map_err(io)?;
        writeln!(w, "{}", THRESHOLD_COLUMNS.join(",")).map_err(io)?;
        for r in self.rows() {
            let cases = r.min_cases.map_or_else(|| "never".to_string(), |n| n.to_string());
            writeln!(w, "{},{},{},{}", self.mode, r.day, r.alpha, cases).map_err(io)?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct TableHeader<'a> {
    mode: Mode,
    config: &'a DetectorConfig,
}

/// Smallest `c >= 1` with `#{v >= c} <= alpha * n`, for a column sorted in
/// descending order.
fn empirical_threshold(desc: &[u64], alpha: f64) -> Option<u64> {
    if desc.is_empty() {
        return None;
    }
    let allowed = (alpha * desc.len() as f64).floor() as usize;
    if allowed >= desc.len() {
        return Some(1);
    }
    Some(desc[allowed] + 1)
}

fn table_from_columns(mode: Mode, columns: Vec<Vec<u64>>, alphas: &[f64]) -> ThresholdTable {
    let per_day: Vec<(usize, Vec<Option<u64>>)> = columns
        .into_par_iter()
        .map(|mut col| {
            col.sort_unstable_by(|a, b| b.cmp(a));
            (col.len(), alphas.iter().map(|&a| empirical_threshold(&col, a)).collect())
        })
        .collect();
    let (support, min_cases) = per_day.into_iter().unzip();
    ThresholdTable {
        mode,
        alphas: alphas.to_vec(),
        min_cases,
        support,
    }
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() || alphas.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
        return Err(Error::Config("alphas must be a nonempty list of levels in (0, 1)".into()));
    }
    Ok(())
}

/// Thresholds indexed by days since the first local infection.
pub fn threshold_known_start(matrix: &Trajectories, alphas: &[f64]) -> Result<ThresholdTable> {
    check_alphas(alphas)?;
    if matrix.n_sims() == 0 {
        return Err(Error::Domain("no simulated trajectories".into()));
    }
    let columns = (0..matrix.horizon)
        .map(|d| matrix.rows().map(|r| r[d]).collect())
        .collect();
    Ok(table_from_columns(Mode::KnownStart, columns, alphas))
}

/// Thresholds indexed by days since the first exported case. Simulations
/// with no exports are dropped; day `d` uses the simulations whose first
/// export leaves at least `d` days of horizon.
pub fn threshold_unknown_start(matrix: &Trajectories, alphas: &[f64]) -> Result<ThresholdTable> {
    check_alphas(alphas)?;
    if matrix.n_sims() == 0 {
        return Err(Error::Domain("no simulated trajectories".into()));
    }
    let mut columns: Vec<Vec<u64>> = vec![Vec::new(); matrix.horizon];
    let mut any = false;
    for row in matrix.rows() {
        let Some(first) = row.iter().position(|&c| c > 0) else {
            continue;
        };
        any = true;
        for (r, &c) in row[first..].iter().enumerate() {
            columns[r].push(c);
        }
    }
    if !any {
        return Err(Error::AllSimulationsEmpty);
    }
    Ok(table_from_columns(Mode::UnknownStart, columns, alphas))
}

/// Simulates under `cfg` and tabulates thresholds for `mode`.
pub fn threshold_table(cfg: &DetectorConfig, mode: Mode) -> Result<ThresholdTable> {
    cfg.validate()?;
    let matrix = simulate_trajectories(cfg)?;
    match mode {
        Mode::KnownStart => threshold_known_start(&matrix, &cfg.alphas),
        Mode::UnknownStart => threshold_unknown_start(&matrix, &cfg.alphas),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub reject: bool,
    /// Smallest listed level at which the null is rejected.
    pub alpha_attained: Option<f64>,
    /// Levels at which the null is rejected, in table order.
    pub reject_at: Vec<f64>,
    pub thresholds_used: Vec<ThresholdRow>,
}

/// Compares an observed cumulative count on `day` with the table.
pub fn verdict(table: &ThresholdTable, day: usize, observed_cumulative: u64) -> Result<Verdict> {
    if day == 0 || day > table.horizon() {
        return Err(Error::Domain(format!(
            "day {day} is outside the table range 1..={}",
            table.horizon()
        )));
    }
    let per = &table.min_cases[day - 1];
    let thresholds_used: Vec<ThresholdRow> = table
        .alphas
        .iter()
        .zip(per)
        .map(|(&alpha, &min_cases)| ThresholdRow { day, alpha, min_cases })
        .collect();
    let reject_at: Vec<f64> = thresholds_used
        .iter()
        .filter(|r| r.min_cases.is_some_and(|c| observed_cumulative >= c))
        .map(|r| r.alpha)
        .collect();
    Ok(Verdict {
        reject: !reject_at.is_empty(),
        alpha_attained: reject_at.iter().copied().min_by(f64::total_cmp),
        reject_at,
        thresholds_used,
    })
}

/// Rough wall-clock estimate for building a table, in seconds.
pub fn estimated_seconds(cfg: &DetectorConfig) -> f64 {
    // About 100 ns per cell on one core, padded for slower machines.
    const NS_PER_CELL: f64 = 250.0;
    cfg.n_sims as f64 * cfg.horizon_days as f64 * NS_PER_CELL * 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small(n_sims: usize) -> DetectorConfig {
        DetectorConfig {
            n_sims,
            horizon_days: 40,
            ..Default::default()
        }
    }

    #[test]
    fn zero_prevalence_gives_zero_counts() {
        let cfg = DetectorConfig {
            rho0: 0.0,
            beta1_null: 0.0,
            ..small(1000)
        };
        let m = simulate_trajectories(&cfg).unwrap();
        assert!(m.rows().all(|r| r.iter().all(|&c| c == 0)));
        let t = threshold_known_start(&m, &[0.05, 0.5, 0.999]).unwrap();
        assert!(t.min_cases.iter().flatten().all(|&c| c == Some(1)));
        assert!(matches!(threshold_unknown_start(&m, &[0.05]), Err(Error::AllSimulationsEmpty)));
    }

    #[test]
    fn first_day_mean() {
        let cfg = DetectorConfig::default();
        let expected = 1000.0 * 1e-4 * 0.1f64.exp();
        assert!((expected - 0.11052).abs() < 1e-5);
        assert!((cfg.n_travelers as f64 * cfg.daily_probability(1) - expected).abs() < 1e-12);
    }

    #[test]
    fn day_ten_mean_matches_closed_form() {
        let cfg = DetectorConfig {
            horizon_days: 10,
            ..Default::default()
        };
        let m = simulate_trajectories(&cfg).unwrap();
        let vals: Vec<f64> = m.rows().map(|r| r[9] as f64).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let expected: f64 = (1..=10).map(|d| 1000.0 * 1e-4 * (0.1 * d as f64).exp()).sum();
        assert!((mean - expected).abs() < 3.0 * (var / n).sqrt(), "{mean} vs {expected}");
    }

    #[test]
    fn probability_is_capped() {
        let cfg = DetectorConfig {
            rho0: 0.5,
            beta1_null: 1.0,
            n_travelers: 10,
            ..small(1000)
        };
        assert_eq!(cfg.daily_probability(5), 1.0);
        let m = simulate_trajectories(&cfg).unwrap();
        assert!(m.rows().all(|r| r[39] - r[38] == 10));
    }

    #[test]
    fn median_oracle_at_one_half() {
        // Counts 0..=100 once each: the upper half is 51..=100.
        let rows: Vec<Vec<u64>> = (0..=100).map(|v| vec![v]).collect();
        let m = Trajectories::from_rows(1, &rows);
        let t = threshold_known_start(&m, &[0.5]).unwrap();
        let c = t.min_cases[0][0].unwrap();
        let tail = |c: u64| rows.iter().filter(|r| r[0] >= c).count() as f64 / rows.len() as f64;
        assert!(tail(c) <= 0.5 && tail(c - 1) > 0.5);
        assert_eq!(c, 51);
    }

    #[test]
    fn brute_force_threshold_oracle() {
        let cfg = small(3000);
        let m = simulate_trajectories(&cfg).unwrap();
        let t = threshold_known_start(&m, &cfg.alphas).unwrap();
        for d in [1usize, 10, 25, 40] {
            let col: Vec<u64> = m.rows().map(|r| r[d - 1]).collect();
            for (j, &a) in cfg.alphas.iter().enumerate() {
                let n = col.len() as f64;
                let c = (1..).find(|&c| col.iter().filter(|&&v| v >= c).count() as f64 / n <= a).unwrap();
                assert_eq!(t.min_cases[d - 1][j], Some(c), "day {d} alpha {a}");
            }
        }
    }

    #[test]
    fn huge_prevalence_makes_modes_agree() {
        let cfg = DetectorConfig {
            rho0: 0.5,
            ..small(1000)
        };
        let m = simulate_trajectories(&cfg).unwrap();
        assert!(m.rows().all(|r| r[0] > 0));
        let known = threshold_known_start(&m, &cfg.alphas).unwrap();
        let unknown = threshold_unknown_start(&m, &cfg.alphas).unwrap();
        assert_eq!(known.min_cases, unknown.min_cases);
    }

    #[test]
    fn unknown_start_day_one_needs_two() {
        let cfg = small(2000);
        let t = threshold_unknown_start(&simulate_trajectories(&cfg).unwrap(), &cfg.alphas).unwrap();
        assert!(t.min_cases[0].iter().all(|c| c.unwrap() >= 2));
    }

    #[test]
    fn unknown_start_drops_empty_and_marks_unsupported_days() {
        let rows = vec![vec![0, 0, 1], vec![0, 0, 0], vec![1, 2, 2]];
        let t = threshold_unknown_start(&Trajectories::from_rows(3, &rows), &[0.5]).unwrap();
        assert_eq!(t.support, vec![2, 1, 1]);
        assert_eq!(t.min_cases[1][0], Some(3));
        let sparse = threshold_unknown_start(&Trajectories::from_rows(3, &[vec![0, 0, 4]]), &[0.5]).unwrap();
        assert_eq!(sparse.min_cases[1][0], None);
        assert_eq!(sparse.rows()[1].min_cases, None);
    }

    #[test]
    fn verdict_boundaries() {
        let cfg = small(2000);
        let t = threshold_table(&cfg, Mode::KnownStart).unwrap();
        let v0 = verdict(&t, 20, 0).unwrap();
        assert!(!v0.reject && v0.reject_at.is_empty() && v0.alpha_attained.is_none());
        let c = t.get(20, 0.05).unwrap().unwrap();
        assert!(!verdict(&t, 20, c - 1).unwrap().reject_at.contains(&0.05));
        assert!(verdict(&t, 20, c).unwrap().reject_at.contains(&0.05));
        let all = verdict(&t, 20, 1_000_000).unwrap();
        assert_eq!(all.reject_at, cfg.alphas);
        assert_eq!(all.alpha_attained, Some(0.001));
        assert!(verdict(&t, 0, 1).is_err());
        assert!(verdict(&t, 41, 1).is_err());
    }

    #[test]
    fn deterministic_and_chunk_order_stable() {
        let cfg = small(5000);
        let a = simulate_trajectories(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| simulate_trajectories(&cfg).unwrap());
        assert_eq!(a, b);
        let other = simulate_trajectories(&DetectorConfig { seed: 2, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn validation_lists_fields() {
        let cfg = DetectorConfig {
            rho0: 0.0,
            n_sims: 10,
            alphas: vec![0.05, 0.05, 1.5],
            ..Default::default()
        };
        let fields: Vec<String> = cfg.problems().into_iter().map(|p| p.field).collect();
        assert!(fields.contains(&"rho0".to_string()));
        assert!(fields.contains(&"n_sims".to_string()));
        assert!(fields.iter().filter(|f| *f == "alphas").count() == 2);
        assert!(matches!(threshold_table(&cfg, Mode::KnownStart), Err(Error::Config(_))));
    }

    #[test]
    fn csv_layout() {
        let cfg = DetectorConfig {
            horizon_days: 3,
            ..small(1000)
        };
        let t = threshold_table(&cfg, Mode::KnownStart).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&cfg, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# {"));
        let header: serde_json::Value = serde_json::from_str(&lines[0][2..]).unwrap();
        assert_eq!(header["config"]["n_sims"], 1000);
        assert_eq!(lines[1], "mode,day,alpha,min_cases");
        assert_eq!(lines.len(), 2 + 3 * 3);
        assert!(lines[2].starts_with("known_start,1,0.05,"));
    }

    #[test]
    fn row_json_uses_never() {
        let r = ThresholdRow { day: 3, alpha: 0.01, min_cases: None };
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"day":3,"alpha":0.01,"min_cases":"never"}"#);
        assert_eq!(serde_json::from_str::<ThresholdRow>(&s).unwrap(), r);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn thresholds_monotone_in_alpha(
            rows in proptest::collection::vec(proptest::collection::vec(0u64..50, 4), 1..200),
        ) {
            let rows: Vec<Vec<u64>> = rows
                .into_iter()
                .map(|r| r.iter().scan(0, |s, v| { *s += v; Some(*s) }).collect())
                .collect();
            let m = Trajectories::from_rows(4, &rows);
            for t in [threshold_known_start(&m, &[0.5, 0.1, 0.01]), threshold_unknown_start(&m, &[0.5, 0.1, 0.01])] {
                let Ok(t) = t else { continue };
                for per in &t.min_cases {
                    let v: Vec<u64> = per.iter().map(|c| c.unwrap_or(u64::MAX)).collect();
                    prop_assert!(v[0] <= v[1] && v[1] <= v[2]);
                    prop_assert!(v.iter().all(|&c| c >= 1));
                }
            }
        }
    }
}
