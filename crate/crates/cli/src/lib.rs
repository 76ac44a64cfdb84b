//! Command-line front end: dataset generation, single fits, full
//! experiments, plots and rank reports.

pub mod bundle;
pub mod config;
pub mod experiment;
pub mod plot;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;
use tropfact_core::datagen::{apply_mask, gen_mixture, SynthSpec};
use tropfact_core::engine::{run_fit, FitConfig, StopReason};
use tropfact_core::io::{export_factors, read_matrix_csv, write_dense_csv, write_matrix_csv, write_trajectory_jsonl};
use tropfact_core::{MaskedMatrix, Method};

use crate::config::{DatasetItem, ExperimentConfig, Overrides};

#[derive(Debug, Parser)]
#[command(
    name = "tropfact",
    version,
    about = "Tropical matrix factorization for matrix completion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic mixture dataset with a held-out mask.
    Gen(GenArgs),
    /// Fit one method on one dataset.
    Fit(FitArgs),
    /// Run every method on every dataset and write a results bundle.
    Experiment(ExperimentArgs),
    /// Render SVG plots from a results bundle.
    Plot(BundleArgs),
    /// Recompute and print the rank tables of a results bundle.
    Rank(BundleArgs),
}

/// Flags shared by the commands that fit.
#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, conflicts_with = "budget_sweeps")]
    pub budget_seconds: Option<f64>,
    #[arg(long)]
    pub budget_sweeps: Option<u64>,
    #[arg(long)]
    pub rank: Option<usize>,
    /// Method name, e.g. STMF or STMF_ByRow_RandPermR_TD_A_W (repeatable).
    #[arg(long = "method")]
    pub methods: Vec<String>,
    #[arg(long)]
    pub mask_fraction: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run one fit at a time.
    #[arg(long)]
    pub serial: bool,
}

impl CommonArgs {
    fn overrides(&self) -> anyhow::Result<Overrides> {
        let methods = self
            .methods
            .iter()
            .map(|m| m.parse::<Method>().with_context(|| format!("unknown method {m}")))
            .collect::<anyhow::Result<_>>()?;
        Ok(Overrides {
            seed: self.seed,
            budget_seconds: self.budget_seconds,
            budget_sweeps: self.budget_sweeps,
            rank: self.rank,
            methods,
            mask_fraction: self.mask_fraction,
            out: self.out.clone(),
            serial: self.serial,
        })
    }

    /// The configuration file, if any, with the flags applied.
    pub fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::empty(),
        };
        cfg.apply(&self.overrides()?);
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    #[arg(long, default_value_t = 3)]
    pub true_rank: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.2)]
    pub mask_fraction: f64,
    #[arg(long, default_value = "data")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Training matrix; empty or NaN fields are missing.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// The CSV starts with a header line.
    #[arg(long)]
    pub header: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct BundleArgs {
    /// Results directory written by `experiment`.
    #[arg(default_value = "results")]
    pub results: PathBuf,
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Experiment(a) => cmd_experiment(&a.common),
        Command::Plot(a) => cmd_plot(&a.results),
        Command::Rank(a) => cmd_rank(&a.results),
    }
}

#[derive(Serialize)]
struct DatasetSidecar<'a> {
    spec: &'a SynthSpec,
    rows: usize,
    cols: usize,
    /// Held-out `(row, column)` pairs.
    test: Vec<(usize, usize)>,
}

/// Writes `train.csv`, `truth.csv`, the factors `A.csv`/`B.csv` and
/// `dataset.json` listing the held-out coordinates.
pub fn cmd_gen(a: &GenArgs) -> anyhow::Result<()> {
    let mut spec = SynthSpec::new(a.m, a.n, a.lambda, a.seed).with_mask(a.mask_fraction);
    spec.true_rank = a.true_rank;
    let mix = gen_mixture(&spec)?;
    let truth = MaskedMatrix::full(mix.r.clone())?;
    let (train, test) = apply_mask(&truth, a.mask_fraction, a.seed)?;
    fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    write_matrix_csv(&a.out.join("train.csv"), &train)?;
    write_matrix_csv(&a.out.join("truth.csv"), &truth)?;
    write_dense_csv(&a.out.join("A.csv"), &mix.a)?;
    write_dense_csv(&a.out.join("B.csv"), &mix.b)?;
    let sidecar = DatasetSidecar {
        spec: &spec,
        rows: a.m,
        cols: a.n,
        test: (0..a.m * a.n)
            .filter(|&p| test[p])
            .map(|p| (p / a.n, p % a.n))
            .collect(),
    };
    fs::write(
        a.out.join("dataset.json"),
        serde_json::to_string_pretty(&sidecar)? + "\n",
    )?;
    info!("wrote {}x{} dataset to {}", a.m, a.n, a.out.display());
    Ok(())
}

#[derive(Serialize)]
struct FitSidecar<'a> {
    data: &'a Path,
    method: String,
    rank: usize,
    #[serde(flatten)]
    fit: &'a FitConfig,
}

#[derive(Serialize)]
struct FitSummary {
    method: String,
    initial_error: f64,
    final_error: f64,
    sweeps: u64,
    stop: StopReason,
    trials: u64,
    accepted: u64,
}

/// Fits one method to one CSV and writes `U.csv`, `V.csv`, `factors.json`,
/// `trajectory.jsonl` and `summary.json`.
pub fn cmd_fit(a: &FitArgs) -> anyhow::Result<()> {
    let mut cfg = a.common.resolve()?;
    if a.common.budget_seconds.is_none() && a.common.budget_sweeps.is_none() && a.common.config.is_none() {
        cfg.budget = tropfact_core::Budget::sweeps(1000);
    }
    let (path, header) = match (&a.data, cfg.expand_datasets()?.into_iter().next()) {
        (Some(p), _) => (p.clone(), a.header),
        (None, Some(DatasetItem::Csv { path, header, .. })) => (path, header),
        _ => bail!("fit needs --data or a configuration with a CSV dataset"),
    };
    if cfg.methods.len() > 1 {
        bail!("fit runs a single method; got {}", cfg.methods.len());
    }
    let method = cfg
        .methods
        .first()
        .copied()
        .unwrap_or(Method::Strategy(tropfact_core::StrategySpec::fast_stmf()));
    let data = read_matrix_csv(&path, header).with_context(|| format!("cannot read {}", path.display()))?;
    let fit = cfg.fit_config(cfg.seed);
    let outcome = run_fit(&data, cfg.rank, &method, &fit)?;
    let out = &cfg.out;
    let sidecar = FitSidecar {
        data: &path,
        method: method.to_string(),
        rank: cfg.rank,
        fit: &fit,
    };
    export_factors(out, &outcome.fitted, &sidecar)?;
    let traj = match fit.budget.seconds {
        Some(_) => outcome.trajectory.clone(),
        None => outcome.trajectory.without_wall_clock(),
    };
    write_trajectory_jsonl(&out.join("trajectory.jsonl"), &traj)?;
    let summary = FitSummary {
        method: method.to_string(),
        initial_error: outcome.trajectory.initial_error().unwrap_or(f64::NAN),
        final_error: outcome.final_error(),
        sweeps: outcome.sweeps,
        stop: outcome.stop,
        trials: outcome.trials,
        accepted: outcome.accepted,
    };
    fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    println!(
        "{method}: error {} -> {} after {} sweeps ({:?})",
        summary.initial_error, summary.final_error, outcome.sweeps, outcome.stop
    );
    Ok(())
}

pub fn cmd_experiment(a: &CommonArgs) -> anyhow::Result<()> {
    let cfg = a.resolve()?;
    let res = experiment::run_experiment(&cfg)?;
    bundle::write_bundle(&res, &cfg.out)?;
    print!("{}", bundle::rank_text(&res.rankings));
    info!("results written to {}", cfg.out.display());
    Ok(())
}

/// Writes `plots/ne_<dataset>.svg` and `plots/cd_<criterion>.svg`. A
/// directory without `results.json` produces nothing.
pub fn cmd_plot(dir: &Path) -> anyhow::Result<()> {
    if !dir.join("results.json").exists() {
        info!("no results bundle in {}", dir.display());
        return Ok(());
    }
    let res = experiment::read_results(dir)?;
    if res.ne.is_empty() && res.rankings.is_empty() {
        return Ok(());
    }
    let plots = dir.join("plots");
    fs::create_dir_all(&plots)?;
    let label = match res.clock {
        tropfact_core::Clock::Seconds => "time (s)",
        tropfact_core::Clock::Sweeps => "sweeps",
    };
    for ne in &res.ne {
        let path = plots.join(format!("ne_{}.svg", bundle::slug(&ne.dataset)));
        fs::write(&path, plot::ne_svg(ne, &res.grid, label))?;
    }
    for report in &res.rankings {
        let path = plots.join(format!("cd_{}.svg", bundle::slug(&report.criterion)));
        fs::write(&path, plot::cd_svg(report))?;
    }
    Ok(())
}

pub fn cmd_rank(dir: &Path) -> anyhow::Result<()> {
    let mut res = experiment::read_results(dir)?;
    let names: Vec<String> = res.datasets.iter().map(|d| d.name.clone()).collect();
    res.rankings = experiment::rank_reports(&res.summary, &res.methods, &names)?;
    bundle::write_rank_report(&res, dir)?;
    print!("{}", bundle::rank_text(&res.rankings));
    Ok(())
}
