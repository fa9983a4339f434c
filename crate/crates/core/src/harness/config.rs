//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::data::{LabelColumn, LoadOptions};
use crate::error::{Error, Result};
use crate::optim::{Algorithm, HyperParams, StepRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Problem {
    Lr,
    Blr,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Lr => "lr",
            Problem::Blr => "blr",
        })
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lr" => Ok(Problem::Lr),
            "blr" => Ok(Problem::Blr),
            other => Err(Error::Config(format!("unknown problem '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    Synthetic { n: usize, d: usize, seed: u64 },
    File { path: PathBuf, options: LoadOptions },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    RoverK,
    RoverSqrtK,
    Theorem1,
    Constant,
}

impl FromStr for StepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "r_over_k" => Ok(StepKind::RoverK),
            "r_over_sqrt_k" => Ok(StepKind::RoverSqrtK),
            "theorem1" => Ok(StepKind::Theorem1),
            "constant" => Ok(StepKind::Constant),
            other => Err(Error::Config(format!("unknown step rule '{other}'"))),
        }
    }
}

/// One point of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub batch_size: usize,
    pub memory: usize,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub algorithms: Vec<Algorithm>,
    pub dataset: DatasetSpec,
    pub bias: bool,
    pub standardize: bool,
    pub gamma: f64,
    /// `None` means `1.25 gamma + 0.01` at every sweep point.
    pub delta: Option<f64>,
    pub beta: f64,
    pub memory: usize,
    pub interval: usize,
    pub batch_size: usize,
    pub step_kind: StepKind,
    pub step_r: f64,
    pub step_alpha: f64,
    pub eta0: f64,
    pub upsilon: f64,
    pub rho: f64,
    /// Check every rebuilt approximation against the spectral bounds for `rho`.
    pub check_bounds: bool,
    pub adam_alpha: f64,
    pub sweep_batch_sizes: Vec<usize>,
    pub sweep_memory: Vec<usize>,
    pub sweep_gamma: Vec<f64>,
    pub monte_carlo_runs: usize,
    pub folds: usize,
    /// Fixed iteration count; otherwise `ceil(epochs * N_train / m)`.
    pub iterations: Option<usize>,
    pub epochs: f64,
    pub master_seed: u64,
    pub trace: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let hp = HyperParams::default();
        Self {
            problem: Problem::Lr,
            algorithms: vec![Algorithm::SdRegLbfgs, Algorithm::Sgd],
            dataset: DatasetSpec::Synthetic {
                n: 5000,
                d: 50,
                seed: 1,
            },
            bias: false,
            standardize: false,
            gamma: hp.gamma,
            delta: None,
            beta: hp.beta,
            memory: hp.memory,
            interval: hp.interval,
            batch_size: hp.batch_size,
            step_kind: StepKind::RoverK,
            step_r: 7.0,
            step_alpha: 1e-3,
            eta0: 1.0,
            upsilon: 0.75,
            rho: 1.0,
            check_bounds: false,
            adam_alpha: 1e-3,
            sweep_batch_sizes: Vec::new(),
            sweep_memory: Vec::new(),
            sweep_gamma: Vec::new(),
            monte_carlo_runs: 1,
            folds: 5,
            iterations: None,
            epochs: 20.0,
            master_seed: 0,
            trace: false,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for '{key}'")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean '{value}' for '{key}'"))),
    }
}

fn parse_delimiter(value: &str) -> Result<u8> {
    match value.trim() {
        "tab" | "\\t" => Ok(b'\t'),
        "comma" => Ok(b','),
        "space" => Ok(b' '),
        "semicolon" => Ok(b';'),
        s if s.len() == 1 => Ok(s.as_bytes()[0]),
        s => Err(Error::Config(format!("invalid delimiter '{s}'"))),
    }
}

impl ExperimentConfig {
    /// Parses `key = value` lines; `#` starts a comment. Unknown or repeated
    /// keys are errors. Relative dataset paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let key = key.trim().to_string();
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
        }

        let mut cfg = Self::default();
        let mut synth = (5000usize, 50usize, 1u64);
        let mut dataset_path: Option<PathBuf> = None;
        let mut load = LoadOptions::default();
        for (key, value) in &entries {
            let (k, v) = (key.as_str(), value.as_str());
            match k {
                "problem" => cfg.problem = v.parse()?,
                "algorithm" => {
                    cfg.algorithms = v
                        .split(',')
                        .filter(|s| !s.trim().is_empty())
                        .map(str::parse)
                        .collect::<Result<_>>()?
                }
                "dataset" => {
                    dataset_path = match v {
                        "synthetic" => None,
                        path => Some(base_dir.join(path)),
                    }
                }
                "synth_n" => synth.0 = parse_value(k, v)?,
                "synth_d" => synth.1 = parse_value(k, v)?,
                "synth_seed" => synth.2 = parse_value(k, v)?,
                "label_column" => {
                    load.label_column = match v {
                        "last" => LabelColumn::Last,
                        s => match s.parse::<usize>() {
                            Ok(i) => LabelColumn::Index(i),
                            Err(_) => LabelColumn::Name(s.to_string()),
                        },
                    }
                }
                "positive_label" => load.positive_label = v.to_string(),
                "delimiter" => load.delimiter = parse_delimiter(v)?,
                "header" => load.header = parse_bool(k, v)?,
                "bias" => cfg.bias = parse_bool(k, v)?,
                "standardize" => cfg.standardize = parse_bool(k, v)?,
                "gamma" => cfg.gamma = parse_value(k, v)?,
                "delta" => cfg.delta = Some(parse_value(k, v)?),
                "beta" => cfg.beta = parse_value(k, v)?,
                "memory" => cfg.memory = parse_value(k, v)?,
                "interval" => cfg.interval = parse_value(k, v)?,
                "batch_size" => cfg.batch_size = parse_value(k, v)?,
                "step_rule" => cfg.step_kind = v.parse()?,
                "step_r" => cfg.step_r = parse_value(k, v)?,
                "step_alpha" => cfg.step_alpha = parse_value(k, v)?,
                "eta0" => cfg.eta0 = parse_value(k, v)?,
                "upsilon" => cfg.upsilon = parse_value(k, v)?,
                "rho" => cfg.rho = parse_value(k, v)?,
                "check_bounds" => cfg.check_bounds = parse_bool(k, v)?,
                "adam_alpha" => cfg.adam_alpha = parse_value(k, v)?,
                "sweep_batch_sizes" => cfg.sweep_batch_sizes = parse_list(k, v)?,
                "sweep_memory" => cfg.sweep_memory = parse_list(k, v)?,
                "sweep_gamma" => cfg.sweep_gamma = parse_list(k, v)?,
                "monte_carlo_runs" => cfg.monte_carlo_runs = parse_value(k, v)?,
                "folds" => cfg.folds = parse_value(k, v)?,
                "iterations" => cfg.iterations = Some(parse_value(k, v)?),
                "epochs" => cfg.epochs = parse_value(k, v)?,
                "master_seed" => cfg.master_seed = parse_value(k, v)?,
                "trace" => cfg.trace = parse_bool(k, v)?,
                other => return Err(Error::Config(format!("unknown key '{other}'"))),
            }
        }
        cfg.dataset = match dataset_path {
            None => DatasetSpec::Synthetic {
                n: synth.0,
                d: synth.1,
                seed: synth.2,
            },
            Some(path) => DatasetSpec::File { path, options: load },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.algorithms.is_empty() {
            return bad("no algorithms selected");
        }
        if self.monte_carlo_runs == 0 {
            return bad("monte_carlo_runs must be positive");
        }
        if self.folds == 0 {
            return bad("folds must be positive");
        }
        if self.iterations == Some(0) || !(self.epochs > 0.0) {
            return bad("iteration budget must be positive");
        }
        for p in self.sweep_points() {
            self.hyper_params(&p).validate()?;
        }
        Ok(())
    }

    /// Cartesian product of the sweep axes; an unset axis contributes the
    /// scalar setting.
    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        let or_one = |v: &Vec<usize>, d: usize| if v.is_empty() { vec![d] } else { v.clone() };
        let batches = or_one(&self.sweep_batch_sizes, self.batch_size);
        let memories = or_one(&self.sweep_memory, self.memory);
        let gammas = if self.sweep_gamma.is_empty() {
            vec![self.gamma]
        } else {
            self.sweep_gamma.clone()
        };
        let mut out = Vec::new();
        for &batch_size in &batches {
            for &memory in &memories {
                for &gamma in &gammas {
                    out.push(SweepPoint {
                        index: out.len(),
                        batch_size,
                        memory,
                        gamma,
                    });
                }
            }
        }
        out
    }

    /// Which sweep axis varies, for plot-ready series.
    pub fn varying_axis(&self) -> &'static str {
        if self.sweep_batch_sizes.len() > 1 {
            "batch_size"
        } else if self.sweep_memory.len() > 1 {
            "memory"
        } else if self.sweep_gamma.len() > 1 {
            "gamma"
        } else {
            "sweep"
        }
    }

    pub fn hyper_params(&self, p: &SweepPoint) -> HyperParams {
        let mut hp = HyperParams {
            gamma: p.gamma,
            delta: self.delta.unwrap_or(1.25 * p.gamma + 0.01),
            beta: self.beta,
            memory: p.memory,
            interval: self.interval,
            batch_size: p.batch_size,
            step_rule: StepRule::RoverK { r: self.step_r },
            curvature_bound: self.check_bounds.then_some(self.rho),
        };
        hp.step_rule = match self.step_kind {
            StepKind::RoverK => StepRule::RoverK { r: self.step_r },
            StepKind::RoverSqrtK => StepRule::RoverSqrtK { r: self.step_r },
            StepKind::Constant => StepRule::Constant {
                alpha: self.step_alpha,
            },
            StepKind::Theorem1 => StepRule::theorem1(self.eta0, self.upsilon, self.rho, &hp),
        };
        hp
    }
}
