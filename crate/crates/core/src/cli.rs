//! Command-line interface. Every command writes its outputs plus a
//! `<out>.manifest.json` describing the run.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::delay_model::{fit_delay, observations_from_cases, summarize_delay, write_summary_csv};
use crate::detector::{self, DetectorConfig, Mode};
use crate::domain::RngSeed;
use crate::error::{Error, InputError, Result};
use crate::growth_model::{
    domestic_fit, sensitivity_run, sequential_estimates, write_comparison_csv, GrowthOptions,
    SequentialOptions, DEFAULT_THRESHOLD,
};
use crate::ingest::{self, CaseReport, OriginConfig, VolumeTable};
use crate::mcmc::McmcConfig;
use crate::service::{self, ServiceConfig};
use crate::voi::{voi_analysis, VoiKind};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "outbreak", version, about = "Outbreak detection from exported traveler case reports")]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the arrival-to-confirmation delay model.
    FitDelay(FitDelayArgs),
    /// Daily growth-rate estimates and the detection date.
    Sequential(SequentialArgs),
    /// Value of information of each day's reports and arrival dates.
    Voi(VoiArgs),
    /// Minimum cumulative exported cases needed to reject slow growth.
    Thresholds(ThresholdArgs),
    /// Poisson log-linear growth rate from domestic daily counts.
    DomesticFit(DomesticArgs),
    /// Sequential runs over several initial case counts.
    Sensitivity(SensitivityArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct FitDelayArgs {
    #[arg(long)]
    pub cases: PathBuf,
    /// Summary CSV; the posterior goes next to it as `.posterior.jsonl`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON file with sampler settings.
    #[arg(long)]
    pub mcmc: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Inputs {
    #[arg(long)]
    pub cases: PathBuf,
    #[arg(long)]
    pub volumes: PathBuf,
    #[arg(long)]
    pub origin_config: PathBuf,
    /// JSON file with growth-model settings.
    #[arg(long)]
    pub growth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SequentialArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VoiArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long)]
    pub decision_date: NaiveDate,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, default_value_t = 1e-4)]
    pub rho0: f64,
    #[arg(long, default_value_t = 0.1)]
    pub beta1_null: f64,
    #[arg(long, default_value_t = 1000)]
    pub n_travelers: u64,
    #[arg(long, default_value_t = 100_000)]
    pub sims: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.01,0.001")]
    pub alphas: Vec<f64>,
    /// known or unknown
    #[arg(long, default_value = "known")]
    pub mode: String,
    #[arg(long, default_value_t = 100)]
    pub horizon: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DomesticArgs {
    /// CSV with columns date,new_cases.
    #[arg(long)]
    pub counts: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000")]
    pub initial_cases: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Comparison CSV; scenario tables go next to it as `.i0-<n>.csv`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    /// Input path to `sha256:<hex>` of its bytes.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub version: String,
    pub duration_ms: u128,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| {
        InputError::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    }
}

fn digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(format!("sha256:{}", hex::encode(Sha256::digest(&bytes))))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| {
        InputError::File {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
        .into()
    })
}

/// `out` with its extension replaced by `suffix`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    out.with_extension(suffix)
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Tracks inputs and outputs of one command.
struct Run {
    command: &'static str,
    force: bool,
    main_out: PathBuf,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    start: Instant,
}

impl Run {
    fn new(command: &'static str, force: bool, main_out: &Path) -> Self {
        Run {
            command,
            force,
            main_out: main_out.to_path_buf(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            start: Instant::now(),
        }
    }

    fn input(&mut self, path: &Path) -> PathBuf {
        self.inputs.push(path.to_path_buf());
        path.to_path_buf()
    }

    /// Registers outputs and refuses to clobber existing files.
    fn claim(&mut self, paths: &[PathBuf]) -> Result<()> {
        let mut all = paths.to_vec();
        all.push(manifest_path(&self.main_out));
        if !self.force {
            if let Some(p) = all.iter().find(|p| p.exists()) {
                return Err(Error::Config(format!(
                    "{} already exists; pass --force to overwrite",
                    p.display()
                )));
            }
        }
        self.outputs.extend(paths.iter().cloned());
        Ok(())
    }

    fn write(&self, path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>) -> Result<()> {
        let file = fs::File::create(path).map_err(io_err(path))?;
        let mut w = BufWriter::new(file);
        f(&mut w)?;
        w.flush().map_err(io_err(path))
    }

    fn finish(self, config: impl Serialize, seed: Option<u64>) -> Result<()> {
        let inputs = self
            .inputs
            .iter()
            .map(|p| Ok((p.display().to_string(), digest(p)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let manifest = RunManifest {
            command: self.command.into(),
            config: serde_json::to_value(config).map_err(|e| Error::Fit(e.to_string()))?,
            seed,
            inputs,
            outputs: self.outputs.iter().map(|p| p.display().to_string()).collect(),
            version: env!("CARGO_PKG_VERSION").into(),
            duration_ms: self.start.elapsed().as_millis(),
        };
        let path = manifest_path(&self.main_out);
        self.write(&path, |w| {
            serde_json::to_writer_pretty(&mut *w, &manifest).map_err(|e| Error::Fit(e.to_string()))?;
            writeln!(w).map_err(io_err(&path))
        })
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Fit(format!("writing {}: {e}", path.display()))
}

struct Loaded {
    cases: Vec<CaseReport>,
    volumes: VolumeTable,
    origin: OriginConfig,
    growth: GrowthOptions,
}

fn load_inputs(run: &mut Run, inputs: &Inputs) -> Result<Loaded> {
    let origin = ingest::parse_origin_config(run.input(&inputs.origin_config))?;
    let all = ingest::parse_case_reports(run.input(&inputs.cases))?;
    let cases = ingest::for_origin(&all, &origin.name);
    if cases.is_empty() {
        return Err(Error::Domain(format!("no case reports for origin {}", origin.name)));
    }
    let volumes = ingest::parse_volumes(run.input(&inputs.volumes))?;
    let growth = match &inputs.growth {
        Some(p) => read_json(&run.input(p))?,
        None => GrowthOptions::default(),
    };
    Ok(Loaded {
        cases,
        volumes,
        origin,
        growth,
    })
}

fn fit_delay_cmd(a: &FitDelayArgs, force: bool) -> Result<()> {
    let mut run = Run::new("fit-delay", force, &a.out);
    let posterior_path = sibling(&a.out, "posterior.jsonl");
    run.claim(&[a.out.clone(), posterior_path.clone()])?;
    let cases: Vec<CaseReport> = ingest::parse_case_reports(run.input(&a.cases))?
        .into_iter()
        .filter(|c| c.include)
        .collect();
    let mcmc: McmcConfig = match &a.mcmc {
        Some(p) => read_json(&run.input(p))?,
        None => McmcConfig::default(),
    };
    mcmc.validate()?;
    let seed = a.seed.or(mcmc.seed).unwrap_or(DEFAULT_SEED);
    let root = RngSeed::root(seed);
    let posterior = fit_delay(&observations_from_cases(&cases), &mcmc, &root)?;
    let destinations: Vec<String> = cases.iter().map(|c| c.destination.clone()).collect();
    let rows = summarize_delay(&posterior, &destinations, &root)?;
    run.write(&a.out, |w| write_summary_csv(&rows, w).map_err(csv_err(&a.out)))?;
    run.write(&posterior_path, |w| posterior.write_jsonl(w).map_err(io_err(&posterior_path)))?;
    println!(
        "{} destinations, {} posterior draws, max R-hat {:.3}",
        rows.len() - 1,
        posterior.len(),
        posterior.diagnostics.max_rhat()
    );
    run.finish(&mcmc, Some(seed))
}

fn sequential_cmd(a: &SequentialArgs, force: bool) -> Result<()> {
    let mut run = Run::new("sequential", force, &a.out);
    run.claim(&[a.out.clone()])?;
    let l = load_inputs(&mut run, &a.inputs)?;
    let opts = SequentialOptions {
        threshold: a.threshold,
        growth: l.growth,
        skip_exceedance: false,
    };
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let summary = sequential_estimates(&l.cases, &l.volumes, &l.origin, &opts, &RngSeed::root(seed))?;
    run.write(&a.out, |w| summary.write_csv(w).map_err(csv_err(&a.out)))?;
    match summary.detection_date {
        Some(d) => println!("detection date: {d}"),
        None => println!("no detection"),
    }
    run.finish(serde_json::json!({ "origin": l.origin, "options": opts }), Some(seed))
}

fn voi_cmd(a: &VoiArgs, force: bool) -> Result<()> {
    let mut run = Run::new("voi", force, &a.out);
    run.claim(&[a.out.clone()])?;
    let l = load_inputs(&mut run, &a.inputs)?;
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let result = voi_analysis(
        &l.cases,
        &l.volumes,
        &l.origin,
        a.decision_date,
        &[VoiKind::Case, VoiKind::Arrival],
        &l.growth,
        &RngSeed::root(seed),
    )?;
    run.write(&a.out, |w| result.write_csv(w).map_err(csv_err(&a.out)))?;
    println!("{} source dates evaluated", result.source_dates().len());
    run.finish(
        serde_json::json!({ "origin": l.origin, "decision_date": a.decision_date, "growth": l.growth }),
        Some(seed),
    )
}

fn thresholds_cmd(a: &ThresholdArgs, force: bool) -> Result<()> {
    let mut run = Run::new("thresholds", force, &a.out);
    run.claim(&[a.out.clone()])?;
    let mode: Mode = a.mode.parse()?;
    let cfg = DetectorConfig {
        rho0: a.rho0,
        beta1_null: a.beta1_null,
        n_travelers: a.n_travelers,
        horizon_days: a.horizon,
        n_sims: a.sims,
        alphas: a.alphas.clone(),
        seed: a.seed.unwrap_or(DEFAULT_SEED),
    };
    let table = detector::threshold_table(&cfg, mode)?;
    run.write(&a.out, |w| table.write_csv(&cfg, w))?;
    println!("{} days x {} levels ({mode})", table.horizon(), table.alphas.len());
    run.finish(serde_json::json!({ "mode": mode, "detector": cfg }), Some(cfg.seed))
}

fn domestic_cmd(a: &DomesticArgs, force: bool) -> Result<()> {
    let mut run = Run::new("domestic-fit", force, &a.out);
    run.claim(&[a.out.clone()])?;
    let counts = ingest::parse_daily_counts(run.input(&a.counts))?;
    let fit = domestic_fit(&counts)?;
    run.write(&a.out, |w| {
        let mut out = csv::Writer::from_writer(w);
        out.serialize(fit).map_err(csv_err(&a.out))?;
        out.flush().map_err(io_err(&a.out))
    })?;
    println!("rate {:.5} (95% CI {:.5}, {:.5})", fit.rate, fit.ci_lo, fit.ci_hi);
    run.finish(serde_json::json!({ "days": counts.len() }), None)
}

fn sensitivity_cmd(a: &SensitivityArgs, force: bool) -> Result<()> {
    let mut run = Run::new("sensitivity", force, &a.out);
    let scenario_paths: Vec<PathBuf> = a
        .initial_cases
        .iter()
        .map(|k| sibling(&a.out, &format!("i0-{k}.csv")))
        .collect();
    let mut claimed = vec![a.out.clone()];
    claimed.extend(scenario_paths.iter().cloned());
    run.claim(&claimed)?;
    let l = load_inputs(&mut run, &a.inputs)?;
    let opts = SequentialOptions {
        threshold: a.threshold,
        growth: l.growth,
        skip_exceedance: false,
    };
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let scenarios = sensitivity_run(
        &l.cases,
        &l.volumes,
        &l.origin,
        &a.initial_cases,
        &opts,
        &RngSeed::root(seed),
    )?;
    for (s, path) in scenarios.iter().zip(&scenario_paths) {
        run.write(path, |w| s.summary.write_csv(w).map_err(csv_err(path)))?;
    }
    run.write(&a.out, |w| write_comparison_csv(&scenarios, w).map_err(csv_err(&a.out)))?;
    for s in &scenarios {
        let last = s.summary.last().expect("nonempty run");
        println!("I0 = {}: final beta1 mean {:.4}", s.initial_cases, last.beta1.mean);
    }
    run.finish(
        serde_json::json!({ "origin": l.origin, "initial_cases": a.initial_cases, "options": opts }),
        Some(seed),
    )
}

fn serve_cmd(a: &ServeArgs) -> Result<()> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Error::Fit(format!("starting runtime: {e}")))?;
    rt.block_on(service::serve(SocketAddr::new(a.host, a.port), ServiceConfig::default()))
        .map_err(|e| Error::Config(format!("cannot serve on {}:{}: {e}", a.host, a.port)))
}

pub fn execute(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::FitDelay(a) => fit_delay_cmd(a, cli.force),
        Command::Sequential(a) => sequential_cmd(a, cli.force),
        Command::Voi(a) => voi_cmd(a, cli.force),
        Command::Thresholds(a) => thresholds_cmd(a, cli.force),
        Command::DomesticFit(a) => domestic_cmd(a, cli.force),
        Command::Sensitivity(a) => sensitivity_cmd(a, cli.force),
        Command::Serve(a) => serve_cmd(a),
    }
}

/// Exit status for a finished command: 0 success, 1 model failure, 2 bad input.
pub fn exit_code(result: &Result<()>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) if e.is_input() => 2,
        Err(_) => 1,
    }
}
