use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Solve,
    Figure1,
    Figure2,
    Infsup,
    Props,
    Parabolic,
    BoundaryLayer,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Solve => "solve",
            Experiment::Figure1 => "figure1",
            Experiment::Figure2 => "figure2",
            Experiment::Infsup => "infsup",
            Experiment::Props => "props",
            Experiment::Parabolic => "parabolic",
            Experiment::BoundaryLayer => "boundary-layer",
        }
    }
}

/// Flags shared by every experiment; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Cells along the flow direction.
    #[arg(long)]
    pub nx: Option<usize>,
    /// Cells along the transverse direction; 0 selects a 1D problem.
    #[arg(long)]
    pub ny: Option<usize>,
    /// Extent of the flow direction.
    #[arg(long = "T")]
    pub t: Option<f64>,
    /// galerkin, pg-exact or pg-approx[:level].
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<Experiment>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub f: Option<f64>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub v: Option<f64>,
    pub method: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub alphas: Option<Vec<f64>>,
    pub cells: Option<Vec<usize>>,
    pub level: Option<usize>,
    pub samples: Option<usize>,
    pub ids: Option<Vec<String>>,
    pub lambda: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("malformed config {}", path.display()))
    }
}

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub f: f64,
    pub nx: usize,
    pub ny: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub v: f64,
    pub method: String,
    #[serde(skip)]
    pub out_dir: PathBuf,
    pub seed: u64,
    pub alphas: Vec<f64>,
    pub cells: Vec<usize>,
    pub level: usize,
    pub samples: usize,
    pub ids: Vec<String>,
    pub lambda: Option<f64>,
}

fn powers(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 10f64.powi(-k)).collect()
}

impl ExperimentConfig {
    /// Experiment defaults, then the config file, then flags.
    pub fn resolve(experiment: Experiment, flags: &Overrides) -> Result<Self> {
        let file = match &flags.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        if let Some(e) = file.experiment {
            if e != experiment {
                bail!("config is for `{}` but `{}` was requested", e.name(), experiment.name());
            }
        }
        let mut c = Self::defaults(experiment);
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = file.$field.clone() { c.$field = v; }
            )*};
        }
        take!(alpha, beta, gamma, f, nx, ny, t, v, method, out_dir, seed, alphas, cells, level, samples, ids);
        if file.lambda.is_some() {
            c.lambda = file.lambda;
        }
        macro_rules! flag {
            ($($field:ident),*) => {$(
                if let Some(v) = flags.$field.clone() { c.$field = v; }
            )*};
        }
        flag!(alpha, beta, gamma, nx, ny, t, method, out_dir, seed);
        c.validate()?;
        Ok(c)
    }

    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = Self {
            experiment,
            alpha: 1e-3,
            beta: 1.0,
            gamma: 0.0,
            f: 1.0,
            nx: 16,
            ny: 0,
            t: 1.0,
            v: 1.0,
            method: "pg-exact".into(),
            out_dir: PathBuf::from("out"),
            seed: 2016,
            alphas: Vec::new(),
            cells: Vec::new(),
            level: 0,
            samples: 24,
            ids: Vec::new(),
            lambda: None,
        };
        match experiment {
            Experiment::Solve => {}
            Experiment::Figure1 => {
                c.alpha = 3e-4;
                c.nx = 80;
                c.ny = 80;
            }
            Experiment::Figure2 => {
                c.alpha = 3e-4;
                c.nx = 80;
                c.ny = 80;
                c.alphas = cdlab_core::experiments::log_grid(1e-5, 1e-2, 13);
                c.cells = vec![10, 20, 40, 80, 160];
            }
            Experiment::Infsup => {
                c.gamma = 1.0;
                c.nx = 64;
                c.alphas = powers(2, 6);
            }
            Experiment::Props => {
                c.ids = cdlab_core::theory::PROPOSITION_IDS.iter().map(|s| s.to_string()).collect();
            }
            Experiment::Parabolic => {
                c.alphas = powers(1, 4);
                c.cells = vec![16, 32, 64, 128];
            }
            Experiment::BoundaryLayer => {
                c.alphas = powers(1, 6);
            }
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| -> Result<()> {
            if !(v > 0.0 && v.is_finite()) {
                bail!("`{name}` must be positive and finite, got {v}");
            }
            Ok(())
        };
        positive("alpha", self.alpha)?;
        positive("T", self.t)?;
        positive("v", self.v)?;
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            bail!("`beta` must be nonnegative, got {}", self.beta);
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            bail!("`gamma` must be nonnegative, got {}", self.gamma);
        }
        if !self.f.is_finite() {
            bail!("`f` must be finite");
        }
        if self.nx < 2 {
            bail!("`nx` must be at least 2");
        }
        if self.ny == 1 {
            bail!("`ny` must be 0 (1D) or at least 2");
        }
        self.method
            .parse::<cdlab_core::assembly::Method>()
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        for &a in &self.alphas {
            positive("alphas[]", a)?;
        }
        if self.cells.iter().any(|&n| n < 2) {
            bail!("every entry of `cells` must be at least 2");
        }
        if let Some(l) = self.lambda {
            if !(l >= 0.0) {
                bail!("`lambda` must be nonnegative");
            }
        }
        let needs = |what: &str, empty: bool| -> Result<()> {
            if empty {
                bail!("`{what}` must not be empty for {}", self.experiment.name());
            }
            Ok(())
        };
        match self.experiment {
            Experiment::Figure2 => {
                needs("alphas", self.alphas.is_empty())?;
                needs("cells", self.cells.is_empty())?;
            }
            Experiment::Parabolic => {
                needs("alphas", self.alphas.is_empty())?;
                needs("cells", self.cells.is_empty())?;
            }
            Experiment::Infsup | Experiment::BoundaryLayer => needs("alphas", self.alphas.is_empty())?,
            Experiment::Props => needs("ids", self.ids.is_empty())?,
            Experiment::Figure1 => {
                if self.ny < 2 {
                    bail!("figure1 is a 2D experiment; `ny` must be at least 2");
                }
            }
            Experiment::Solve => {}
        }
        if self.experiment == Experiment::BoundaryLayer && !(self.beta > 0.0) {
            bail!("boundary-layer needs beta > 0");
        }
        Ok(())
    }

    /// One-line `key=value` record of every parameter, for CSV comments.
    pub fn comment(&self) -> String {
        let json = serde_json::to_value(self).expect("config serializes");
        let obj = json.as_object().expect("config is an object");
        obj.iter()
            .map(|(k, v)| format!("{k}={}", v.to_string().trim_matches('"')))
            .collect::<Vec<_>>()
            .join(" ")
    }
}
