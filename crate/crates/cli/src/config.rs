//! Experiment configuration: one JSON document, with command-line flags
//! overriding individual keys.

use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use tropfact_core::datagen::SynthSpec;
use tropfact_core::engine::DEFAULT_ACOL_COLUMNS;
use tropfact_core::engine::{Budget, Clock, Epsilon, FitConfig};
use tropfact_core::metrics::DEFAULT_DC_CAP;
use tropfact_core::Method;

/// Where a dataset comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum DatasetSource {
    /// `count` seeded mixtures with seeds `seed, seed + 1, …`.
    Synthetic {
        m: usize,
        n: usize,
        #[serde(default = "default_true_rank")]
        true_rank: usize,
        lambda: f64,
        #[serde(default)]
        seed: u64,
        #[serde(default = "one")]
        count: usize,
    },
    Csv {
        path: PathBuf,
        #[serde(default)]
        header: bool,
    },
}

fn default_true_rank() -> usize {
    3
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub source: DatasetSource,
}

/// A concrete dataset after expanding `count`.
#[derive(Clone, Debug, PartialEq)]
pub enum DatasetItem {
    Synthetic { name: String, spec: SynthSpec },
    Csv { name: String, path: PathBuf, header: bool },
}

impl DatasetItem {
    pub fn name(&self) -> &str {
        match self {
            DatasetItem::Synthetic { name, .. } | DatasetItem::Csv { name, .. } => name,
        }
    }
}

/// Which entries distance correlation is computed over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DcMask {
    Train,
    Test,
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DcConfig {
    #[serde(default = "default_dc_mask")]
    pub mask: DcMask,
    #[serde(default = "default_dc_cap")]
    pub cap: usize,
}

fn default_dc_mask() -> DcMask {
    DcMask::Test
}

fn default_dc_cap() -> usize {
    DEFAULT_DC_CAP
}

impl Default for DcConfig {
    fn default() -> Self {
        Self {
            mask: default_dc_mask(),
            cap: default_dc_cap(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    #[serde(default = "default_resamples")]
    pub resamples: usize,
    #[serde(default = "default_level")]
    pub level: f64,
}

fn default_resamples() -> usize {
    1000
}

fn default_level() -> f64 {
    0.95
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            resamples: default_resamples(),
            level: default_level(),
        }
    }
}

/// Trajectories produced outside this tool (e.g. by another factorization
/// method), one JSON-lines file per repeat.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalTrajectories {
    pub method: String,
    pub dataset: String,
    pub paths: Vec<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetConfig>,
    pub methods: Vec<Method>,
    #[serde(default = "default_rank")]
    pub rank: usize,
    #[serde(default = "default_budget")]
    pub budget: Budget,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_mask_fraction")]
    pub mask_fraction: f64,
    /// Output directory; not recorded in bundles so reruns elsewhere match.
    #[serde(default = "default_out", skip_serializing)]
    pub out: PathBuf,
    #[serde(default)]
    pub epsilon: Epsilon,
    #[serde(default = "default_acol")]
    pub acol_columns: usize,
    /// NE grid spacing; defaults to one unit of the budget clock.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    #[serde(default)]
    pub dc: DcConfig,
    #[serde(default)]
    pub bootstrap: BootstrapConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub external_trajectories: Vec<ExternalTrajectories>,
    #[serde(default)]
    pub serial: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn default_rank() -> usize {
    3
}

fn default_budget() -> Budget {
    Budget::seconds(100.0)
}

fn default_repeats() -> usize {
    10
}

fn default_mask_fraction() -> f64 {
    0.2
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

fn default_acol() -> usize {
    DEFAULT_ACOL_COLUMNS
}

pub const BASELINE: &str = "STMF";

/// Flag values that override configuration keys.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub budget_seconds: Option<f64>,
    pub budget_sweeps: Option<u64>,
    pub rank: Option<usize>,
    pub methods: Vec<Method>,
    pub mask_fraction: Option<f64>,
    pub out: Option<PathBuf>,
    pub serial: bool,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let file = File::open(path).with_context(|| format!("cannot open config {}", path.display()))?;
        let cfg: Self = serde_json::from_reader(file).with_context(|| format!("invalid config {}", path.display()))?;
        Ok(cfg)
    }

    /// Empty configuration for flag-only invocations.
    pub fn empty() -> Self {
        Self {
            datasets: Vec::new(),
            methods: Vec::new(),
            rank: default_rank(),
            budget: default_budget(),
            repeats: default_repeats(),
            seed: 0,
            mask_fraction: default_mask_fraction(),
            out: default_out(),
            epsilon: Epsilon::default(),
            acol_columns: default_acol(),
            grid_step: None,
            dc: DcConfig::default(),
            bootstrap: BootstrapConfig::default(),
            external_trajectories: Vec::new(),
            serial: false,
            workers: None,
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if o.budget_seconds.is_some() || o.budget_sweeps.is_some() {
            self.budget = Budget {
                seconds: o.budget_seconds,
                sweeps: o.budget_sweeps,
            };
        }
        if let Some(r) = o.rank {
            self.rank = r;
        }
        if !o.methods.is_empty() {
            self.methods = o.methods.clone();
        }
        if let Some(f) = o.mask_fraction {
            self.mask_fraction = f;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        self.serial |= o.serial;
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.methods.is_empty() {
            bail!("no methods configured");
        }
        if self.datasets.is_empty() {
            bail!("no datasets configured");
        }
        if self.repeats == 0 {
            bail!("repeats must be at least 1");
        }
        if !(0.0..1.0).contains(&self.mask_fraction) {
            bail!("mask fraction {} not in [0, 1)", self.mask_fraction);
        }
        if self.grid_step.is_some_and(|s| s <= 0.0 || s.is_nan()) {
            bail!("grid step must be positive");
        }
        if self.workers == Some(0) {
            bail!("workers must be at least 1");
        }
        self.fit_config(0).validate()?;
        let names: Vec<String> = self.methods.iter().map(ToString::to_string).collect();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                bail!("method {n} listed twice");
            }
        }
        let has_baseline =
            names.iter().any(|n| n == BASELINE) || self.external_trajectories.iter().any(|e| e.method == BASELINE);
        if !has_baseline {
            bail!("normalized error needs the {BASELINE} baseline among methods or as external trajectories");
        }
        Ok(())
    }

    pub fn clock(&self) -> Clock {
        self.budget.clock()
    }

    pub fn fit_config(&self, seed: u64) -> FitConfig {
        FitConfig {
            budget: self.budget,
            seed,
            epsilon: self.epsilon,
            acol_columns: self.acol_columns,
        }
    }

    /// Seed of one fitting run; shared by all methods so they start from the
    /// same permutation-independent RNG stream.
    pub fn run_seed(&self, dataset: usize, repeat: usize) -> u64 {
        self.seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add((dataset as u64) << 20)
            .wrapping_add(repeat as u64)
    }

    pub fn mask_seed(&self, dataset: usize) -> u64 {
        self.seed.wrapping_add(dataset as u64)
    }

    pub fn expand_datasets(&self) -> anyhow::Result<Vec<DatasetItem>> {
        let mut items = Vec::new();
        for (d, cfg) in self.datasets.iter().enumerate() {
            match &cfg.source {
                DatasetSource::Synthetic {
                    m,
                    n,
                    true_rank,
                    lambda,
                    seed,
                    count,
                } => {
                    let base = cfg.name.clone().unwrap_or_else(|| format!("synthetic{d}"));
                    for c in 0..*count {
                        let name = if *count == 1 {
                            base.clone()
                        } else {
                            format!("{base}-{c}")
                        };
                        let mut spec = SynthSpec::new(*m, *n, *lambda, seed + c as u64);
                        spec.true_rank = *true_rank;
                        spec.validate()?;
                        items.push(DatasetItem::Synthetic { name, spec });
                    }
                }
                DatasetSource::Csv { path, header } => {
                    let name = cfg.name.clone().unwrap_or_else(|| {
                        path.file_stem()
                            .map_or_else(|| format!("csv{d}"), |s| s.to_string_lossy().into_owned())
                    });
                    items.push(DatasetItem::Csv {
                        name,
                        path: path.clone(),
                        header: *header,
                    });
                }
            }
        }
        for (i, a) in items.iter().enumerate() {
            if items[..i].iter().any(|b| b.name() == a.name()) {
                bail!("dataset name {} is used twice", a.name());
            }
        }
        Ok(items)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
        "datasets": [
            {"name": "mix", "source": "synthetic", "m": 12, "n": 10, "lambda": 0.5, "seed": 4, "count": 2},
            {"source": "csv", "path": "data/ov.csv", "header": true}
        ],
        "methods": ["STMF", "FastSTMF", "STMF_ByElement_PermC_TD_W"],
        "budget": {"sweeps": 5},
        "repeats": 2
    }"#;

    #[test]
    fn parses_and_expands() {
        let cfg: ExperimentConfig = serde_json::from_str(DOC).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.rank, 3);
        assert_eq!(cfg.mask_fraction, 0.2);
        assert_eq!(cfg.dc.mask, DcMask::Test);
        let items = cfg.expand_datasets().unwrap();
        let names: Vec<&str> = items.iter().map(DatasetItem::name).collect();
        assert_eq!(names, ["mix-0", "mix-1", "ov"]);
        match &items[1] {
            DatasetItem::Synthetic { spec, .. } => assert_eq!(spec.seed, 5),
            _ => panic!(),
        }
    }

    #[test]
    fn overrides_replace_keys() {
        let mut cfg: ExperimentConfig = serde_json::from_str(DOC).unwrap();
        cfg.apply(&Overrides {
            seed: Some(9),
            budget_seconds: Some(2.0),
            methods: vec!["STMF".parse().unwrap()],
            serial: true,
            ..Default::default()
        });
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.budget, Budget::seconds(2.0));
        assert_eq!(cfg.methods.len(), 1);
        assert!(cfg.serial);
    }

    #[test]
    fn validation_failures() {
        let mut cfg: ExperimentConfig = serde_json::from_str(DOC).unwrap();
        cfg.methods = vec!["FastSTMF".parse().unwrap()];
        assert!(cfg.validate().is_err());
        let mut cfg: ExperimentConfig = serde_json::from_str(DOC).unwrap();
        cfg.repeats = 0;
        assert!(cfg.validate().is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"datasets": [], "methods": ["Bogus"]}"#).is_err());
    }
}
