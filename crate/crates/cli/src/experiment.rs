//! The experiment pipeline: prepare datasets, run every method and repeat,
//! and reduce the runs to the statistics written in a results bundle.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tropfact_core::datagen::{apply_mask, gen_mixture};
use tropfact_core::engine::{run_fit, Clock, StopReason, Trajectory};
use tropfact_core::io::read_matrix_csv;
use tropfact_core::metrics::{
    bootstrap_ci, curve_quantile, dc_sample, distance_correlation, grid_values, median, nemenyi_cd, normalized_values,
    rank_methods, regular_grid, rmse, time_to_reach_curve, Reach,
};
use tropfact_core::{MaskedMatrix, Method};

use crate::config::{DatasetItem, DcMask, ExperimentConfig, BASELINE};

/// Training data with its held-out entries.
#[derive(Clone, Debug)]
pub struct PreparedDataset {
    pub name: String,
    /// Every known value; for synthetic data the full matrix.
    pub truth: MaskedMatrix,
    pub train: MaskedMatrix,
    pub test_mask: Vec<bool>,
}

pub fn prepare_dataset(item: &DatasetItem, mask_fraction: f64, mask_seed: u64) -> anyhow::Result<PreparedDataset> {
    let truth = match item {
        DatasetItem::Synthetic { spec, .. } => MaskedMatrix::full(gen_mixture(spec)?.r)?,
        DatasetItem::Csv { path, header, .. } => {
            read_matrix_csv(path, *header).with_context(|| format!("cannot read {}", path.display()))?
        }
    };
    let (train, test_mask) =
        apply_mask(&truth, mask_fraction, mask_seed).with_context(|| format!("cannot mask dataset {}", item.name()))?;
    Ok(PreparedDataset {
        name: item.name().to_string(),
        truth,
        train,
        test_mask,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub train_entries: usize,
    pub test_entries: usize,
}

/// One fitting run (or one externally supplied trajectory).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub method: String,
    pub repeat: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<StopReason>,
    pub final_error: f64,
    #[serde(default)]
    pub rmse_a: Option<f64>,
    #[serde(default)]
    pub rmse_p: Option<f64>,
    #[serde(default)]
    pub dc: Option<f64>,
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub dataset: String,
    pub method: String,
    pub median_final_error: f64,
    /// Bootstrap interval of the mean final error over repeats.
    pub final_error_ci: (f64, f64),
    pub final_ne: f64,
    /// Time for the median curve to reach the baseline's final error.
    pub time_to_reach: Reach,
    pub median_dc: Option<f64>,
    pub median_rmse_p: Option<f64>,
    pub median_rmse_a: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeCurve {
    pub method: String,
    pub median: Vec<f64>,
    pub q1: Vec<f64>,
    pub q3: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetNe {
    pub dataset: String,
    /// Baseline errors defining the scale.
    pub gamma_init: f64,
    pub gamma_max: f64,
    pub curves: Vec<NeCurve>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub criterion: String,
    pub methods: Vec<String>,
    pub datasets: Vec<String>,
    /// `ranks[method][dataset]`.
    pub ranks: Vec<Vec<f64>>,
    pub average: Vec<f64>,
    /// Nemenyi critical difference at α = 0.05, when tabulated.
    pub cd: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOverTime {
    pub grid: Vec<f64>,
    pub methods: Vec<String>,
    /// `mean[method][t]`, with bootstrap bounds over datasets.
    pub mean: Vec<Vec<f64>>,
    pub low: Vec<Vec<f64>>,
    pub high: Vec<Vec<f64>>,
}

/// Everything an experiment produces; serialized as `results.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Results {
    pub config: ExperimentConfig,
    pub clock: Clock,
    pub grid: Vec<f64>,
    pub methods: Vec<String>,
    pub datasets: Vec<DatasetInfo>,
    pub runs: Vec<RunRecord>,
    pub summary: Vec<MethodSummary>,
    pub ne: Vec<DatasetNe>,
    pub rankings: Vec<RankReport>,
    pub rank_over_time: Option<RankOverTime>,
}

impl Results {
    pub fn summary_for(&self, dataset: &str, method: &str) -> Option<&MethodSummary> {
        self.summary.iter().find(|s| s.dataset == dataset && s.method == method)
    }

    pub fn ranking(&self, criterion: &str) -> Option<&RankReport> {
        self.rankings.iter().find(|r| r.criterion == criterion)
    }
}

fn run_one(
    cfg: &ExperimentConfig,
    data: &PreparedDataset,
    d: usize,
    method: &Method,
    repeat: usize,
) -> anyhow::Result<RunRecord> {
    let seed = cfg.run_seed(d, repeat);
    let out = run_fit(&data.train, cfg.rank, method, &cfg.fit_config(seed))
        .with_context(|| format!("{method} on {}", data.name))?;
    debug!(
        "{} {method} #{repeat}: error {} after {} sweeps",
        data.name,
        out.final_error(),
        out.sweeps
    );
    let pred = out.factors.product();
    let truth = data.truth.values();
    let rmse_a = finite(rmse(&pred, truth, data.train.mask())?);
    let rmse_p = finite(rmse(&pred, truth, &data.test_mask)?);
    let dc_mask: Vec<bool> = match cfg.dc.mask {
        DcMask::Train => data.train.mask().to_vec(),
        DcMask::Test => data.test_mask.clone(),
        DcMask::All => data.truth.mask().to_vec(),
    };
    let (x, y) = dc_sample(truth, &pred, &dc_mask, cfg.dc.cap, seed)?;
    let dc = if x.len() >= 2 {
        Some(distance_correlation(&x, &y)?)
    } else {
        None
    };
    let trajectory = if cfg.clock() == Clock::Sweeps {
        out.trajectory.without_wall_clock()
    } else {
        out.trajectory.clone()
    };
    Ok(RunRecord {
        dataset: data.name.clone(),
        method: method.to_string(),
        repeat,
        seed: Some(seed),
        sweeps: Some(out.sweeps),
        stop: Some(out.stop),
        final_error: out.final_error(),
        rmse_a,
        rmse_p,
        dc,
        trajectory: Some(trajectory),
    })
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn median_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| median(&v))
}

/// Runs all jobs, in parallel unless `serial`, keeping job order.
fn run_jobs(cfg: &ExperimentConfig, data: &[PreparedDataset]) -> anyhow::Result<Vec<RunRecord>> {
    let jobs: Vec<(usize, &Method, usize)> = (0..data.len())
        .flat_map(|d| {
            cfg.methods
                .iter()
                .flat_map(move |m| (0..cfg.repeats).map(move |r| (d, m, r)))
        })
        .collect();
    info!("{} runs over {} datasets", jobs.len(), data.len());
    let exec = |&(d, m, r): &(usize, &Method, usize)| run_one(cfg, &data[d], d, m, r);
    if cfg.serial {
        return jobs.iter().map(exec).collect();
    }
    let workers = cfg.workers.unwrap_or_else(default_workers);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    pool.install(|| jobs.par_iter().map(exec).collect())
}

/// One fewer than the available cores, at least one.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get().saturating_sub(1).max(1))
}

fn load_external(cfg: &ExperimentConfig, names: &[String]) -> anyhow::Result<Vec<RunRecord>> {
    let mut runs = Vec::new();
    for ext in &cfg.external_trajectories {
        if !names.contains(&ext.dataset) {
            bail!("external trajectories refer to unknown dataset {}", ext.dataset);
        }
        if cfg.methods.iter().any(|m| m.to_string() == ext.method) {
            bail!("method {} is both run and supplied externally", ext.method);
        }
        for (repeat, path) in ext.paths.iter().enumerate() {
            let traj = tropfact_core::io::read_trajectory_jsonl(path, cfg.clock(), cfg.budget.t_max())
                .with_context(|| format!("cannot read trajectory {}", path.display()))?;
            let final_error = traj
                .final_error()
                .ok_or_else(|| anyhow!("empty trajectory {}", path.display()))?;
            runs.push(RunRecord {
                dataset: ext.dataset.clone(),
                method: ext.method.clone(),
                repeat,
                seed: None,
                sweeps: None,
                stop: None,
                final_error,
                rmse_a: None,
                rmse_p: None,
                dc: None,
                trajectory: Some(traj),
            });
        }
    }
    Ok(runs)
}

fn ne_grid(cfg: &ExperimentConfig) -> anyhow::Result<Vec<f64>> {
    Ok(regular_grid(cfg.budget.t_max(), cfg.grid_step.unwrap_or(1.0))?)
}

/// Per-dataset NE curves and summaries, given all runs.
fn summarize(
    cfg: &ExperimentConfig,
    grid: &[f64],
    datasets: &[String],
    methods: &[String],
    runs: &[RunRecord],
) -> anyhow::Result<(Vec<MethodSummary>, Vec<DatasetNe>)> {
    let mut summary = Vec::new();
    let mut ne = Vec::new();
    for (d, ds) in datasets.iter().enumerate() {
        let mut medians = Vec::new();
        for m in methods {
            let mine: Vec<&RunRecord> = runs.iter().filter(|r| &r.dataset == ds && &r.method == m).collect();
            if mine.is_empty() {
                bail!("no runs of {m} on {ds}");
            }
            let curves = mine
                .iter()
                .map(|r| grid_values(r.trajectory.as_ref().expect("loaded trajectory"), grid))
                .collect::<Result<Vec<_>, _>>()?;
            medians.push((
                mine,
                curve_quantile(&curves, 0.5),
                curve_quantile(&curves, 0.25),
                curve_quantile(&curves, 0.75),
            ));
        }
        let b = methods
            .iter()
            .position(|m| m == BASELINE)
            .ok_or_else(|| anyhow!("baseline missing"))?;
        let base = &medians[b].1;
        let (gamma_init, gamma_max) = (base[0], *base.last().expect("nonempty grid"));
        let mut curves = Vec::new();
        for (m, (mine, med, q1, q3)) in methods.iter().zip(&medians) {
            let to_ne =
                |v: &[f64]| normalized_values(v, gamma_init, gamma_max).with_context(|| format!("dataset {ds}"));
            let med_ne = to_ne(med)?;
            let finals: Vec<f64> = mine.iter().map(|r| r.final_error).collect();
            let seed = cfg.seed.wrapping_add(d as u64);
            summary.push(MethodSummary {
                dataset: ds.clone(),
                method: m.clone(),
                median_final_error: median(&finals),
                final_error_ci: bootstrap_ci(&finals, cfg.bootstrap.resamples, cfg.bootstrap.level, seed)?,
                final_ne: *med_ne.last().expect("nonempty grid"),
                time_to_reach: time_to_reach_curve(grid, med, gamma_max),
                median_dc: median_of(mine.iter().map(|r| r.dc)),
                median_rmse_p: median_of(mine.iter().map(|r| r.rmse_p)),
                median_rmse_a: median_of(mine.iter().map(|r| r.rmse_a)),
            });
            curves.push(NeCurve {
                method: m.clone(),
                median: med_ne,
                q1: to_ne(q1)?,
                q3: to_ne(q3)?,
            });
        }
        ne.push(DatasetNe {
            dataset: ds.clone(),
            gamma_init,
            gamma_max,
            curves,
        });
    }
    Ok((summary, ne))
}

/// Rankings by time to reach the baseline's final NE, by final NE, and by
/// the mean of those two ranks.
pub fn rank_reports(
    summary: &[MethodSummary],
    methods: &[String],
    datasets: &[String],
) -> anyhow::Result<Vec<RankReport>> {
    let table = |f: &dyn Fn(&MethodSummary) -> f64| -> anyhow::Result<Vec<Vec<f64>>> {
        methods
            .iter()
            .map(|m| {
                datasets
                    .iter()
                    .map(|d| {
                        summary
                            .iter()
                            .find(|s| &s.method == m && &s.dataset == d)
                            .map(f)
                            .ok_or_else(|| anyhow!("no summary for {m} on {d}"))
                    })
                    .collect()
            })
            .collect()
    };
    let time = rank_methods(&table(&|s| s.time_to_reach.score())?, true)?;
    let fin = rank_methods(&table(&|s| s.final_ne)?, true)?;
    let combined: Vec<Vec<f64>> = time
        .ranks
        .iter()
        .zip(&fin.ranks)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x + y) / 2.0).collect())
        .collect();
    let cd = nemenyi_cd(methods.len(), datasets.len(), 0.05).ok();
    let report = |criterion: &str, ranks: Vec<Vec<f64>>| RankReport {
        criterion: criterion.into(),
        methods: methods.to_vec(),
        datasets: datasets.to_vec(),
        average: ranks.iter().map(|r| r.iter().sum::<f64>() / r.len() as f64).collect(),
        ranks,
        cd,
    };
    Ok(vec![
        report("time_to_reach", time.ranks),
        report("final_ne", fin.ranks),
        report("combined", combined),
    ])
}

const RANK_TIME_POINTS: usize = 101;

fn rank_over_time(
    cfg: &ExperimentConfig,
    grid: &[f64],
    methods: &[String],
    ne: &[DatasetNe],
) -> anyhow::Result<RankOverTime> {
    let stride = grid.len().div_ceil(RANK_TIME_POINTS).max(1);
    let mut idx: Vec<usize> = (0..grid.len()).step_by(stride).collect();
    if idx.last() != Some(&(grid.len() - 1)) {
        idx.push(grid.len() - 1);
    }
    let k = methods.len();
    let (mut mean, mut low, mut high) = (vec![Vec::new(); k], vec![Vec::new(); k], vec![Vec::new(); k]);
    for &t in &idx {
        let scores: Vec<Vec<f64>> = (0..k)
            .map(|m| ne.iter().map(|d| d.curves[m].median[t]).collect())
            .collect();
        let ranks = rank_methods(&scores, true)?;
        for m in 0..k {
            let r = &ranks.ranks[m];
            let (lo, hi) = bootstrap_ci(
                r,
                cfg.bootstrap.resamples,
                cfg.bootstrap.level,
                cfg.seed.wrapping_add(t as u64),
            )?;
            mean[m].push(r.iter().sum::<f64>() / r.len() as f64);
            low[m].push(lo);
            high[m].push(hi);
        }
    }
    Ok(RankOverTime {
        grid: idx.iter().map(|&t| grid[t]).collect(),
        methods: methods.to_vec(),
        mean,
        low,
        high,
    })
}

/// Runs the experiment described by `cfg` and reduces it to [`Results`].
/// Nothing is written to disk.
pub fn run_experiment(cfg: &ExperimentConfig) -> anyhow::Result<Results> {
    cfg.validate()?;
    let items = cfg.expand_datasets()?;
    let data = items
        .iter()
        .enumerate()
        .map(|(d, item)| prepare_dataset(item, cfg.mask_fraction, cfg.mask_seed(d)))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let names: Vec<String> = data.iter().map(|d| d.name.clone()).collect();

    let mut runs = run_jobs(cfg, &data)?;
    runs.extend(load_external(cfg, &names)?);

    let mut methods: Vec<String> = cfg.methods.iter().map(ToString::to_string).collect();
    for ext in &cfg.external_trajectories {
        if !methods.contains(&ext.method) {
            methods.push(ext.method.clone());
        }
    }
    let grid = ne_grid(cfg)?;
    let (summary, ne) = summarize(cfg, &grid, &names, &methods, &runs)?;
    let rankings = rank_reports(&summary, &methods, &names)?;
    let rank_over_time = Some(rank_over_time(cfg, &grid, &methods, &ne)?);
    let datasets = data
        .iter()
        .map(|d| DatasetInfo {
            name: d.name.clone(),
            rows: d.train.rows(),
            cols: d.train.cols(),
            train_entries: d.train.given_count(),
            test_entries: d.test_mask.iter().filter(|&&t| t).count(),
        })
        .collect();
    Ok(Results {
        config: cfg.clone(),
        clock: cfg.clock(),
        grid,
        methods,
        datasets,
        runs,
        summary,
        ne,
        rankings,
        rank_over_time,
    })
}

pub fn read_results(dir: &Path) -> anyhow::Result<Results> {
    let path = dir.join("results.json");
    let file = fs::File::open(&path).with_context(|| format!("cannot open {}", path.display()))?;
    serde_json::from_reader(std::io::BufReader::new(file)).with_context(|| format!("invalid {}", path.display()))
}
