//! Flat TOML experiment descriptions.
//!
//! ```toml
//! id = "facility-sweep"
//! objective = "facility-location"
//! synthetic_users = 500
//! synthetic_items = 200
//! constraint = "cardinality"
//! k_sweep = [5, 10, 20]
//! solver = "sg"
//! iterations = 2000
//! batch = 20
//! c = 0.05
//! seed = 1
//! output = "sg.csv"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::data::{RatingsFormat, SyntheticRatings};
use crate::solvers::OutputRule;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    FacilityLocation,
    ConcaveOverModular,
    CoverageFile,
    /// Coverage instance with a local maximum at `(1/2 + 1/(2k)) OPT`; size is `instance_size = k`.
    TightStationary,
    /// Linear family on which one-sample Frank-Wolfe stalls; size is `instance_size = n`.
    FrankWolfeTrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    /// `{x ∈ [0,1]^n : Σx <= k}`
    Cardinality,
    /// `{x ∈ [0,1]^n : Σx = k}`
    Simplex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Sg,
    Sm,
    Fw,
    Greedy,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Sg => "sg",
            SolverKind::Sm => "sm",
            SolverKind::Fw => "fw",
            SolverKind::Greedy => "greedy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// `c / √t`
    InverseSqrt,
    /// `c` at every step
    Constant,
    /// `1 / (L + (σ/R)√t)`; unset `l`, `sigma`, `r` are estimated.
    Theoretical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MirrorKind {
    Euclidean,
    Entropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputRuleKind {
    Uniform,
    Endpoint,
    Last,
}

impl From<OutputRuleKind> for OutputRule {
    fn from(k: OutputRuleKind) -> Self {
        match k {
            OutputRuleKind::Uniform => OutputRule::UniformOverT,
            OutputRuleKind::Endpoint => OutputRule::EndpointHalfWeighted,
            OutputRuleKind::Last => OutputRule::Last,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartKind {
    Origin,
    /// `k/n` in every coordinate.
    Uniform,
    /// Minimizer of the mirror potential over the body.
    Argmin,
    /// The tight instance's local maximum.
    XLoc,
}

fn default_batch() -> usize {
    1
}
fn default_repeats() -> usize {
    1
}
fn default_true() -> bool {
    true
}
fn default_value_samples() -> usize {
    2000
}

/// One experiment. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Defaults to the config file stem.
    #[serde(default)]
    pub id: Option<String>,
    pub objective: ObjectiveKind,
    /// Exponent for concave-over-modular, in `(0, 1]`.
    #[serde(default)]
    pub power: Option<f64>,
    #[serde(default)]
    pub ratings: Option<PathBuf>,
    #[serde(default)]
    pub ratings_format: Option<RatingsFormat>,
    #[serde(default)]
    pub synthetic_users: Option<usize>,
    #[serde(default)]
    pub synthetic_items: Option<usize>,
    #[serde(default)]
    pub synthetic_density: Option<f64>,
    #[serde(default)]
    pub synthetic_max_rating: Option<u32>,
    #[serde(default)]
    pub synthetic_seed: Option<u64>,
    #[serde(default)]
    pub coverage: Option<PathBuf>,
    #[serde(default)]
    pub instance_size: Option<usize>,
    #[serde(default)]
    pub constraint: Option<ConstraintKind>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub k_sweep: Option<Vec<usize>>,
    pub solver: SolverKind,
    #[serde(default)]
    pub iterations: Option<usize>,
    #[serde(default)]
    pub t_sweep: Option<Vec<usize>>,
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default)]
    pub schedule: Option<ScheduleKind>,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub l: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub mirror: Option<MirrorKind>,
    #[serde(default)]
    pub seed: u64,
    /// Independent runs per sweep point, each with its own derived seed.
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub output_rule: Option<OutputRuleKind>,
    #[serde(default)]
    pub start: Option<StartKind>,
    #[serde(default)]
    pub exact_gradients: bool,
    /// Write wall-clock milliseconds; `false` writes 0 so output is byte-reproducible.
    #[serde(default = "default_true")]
    pub timing: bool,
    /// Also emit a row every `record_every` steps (0 = final row only).
    #[serde(default)]
    pub record_every: usize,
    /// Samples for the continuous value when no exact oracle applies.
    #[serde(default = "default_value_samples")]
    pub value_samples: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    /// Parses a file and resolves relative paths against its directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = toml::from_str::<Self>(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.ratings, &mut cfg.coverage, &mut cfg.output].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if cfg.id.is_none() {
            cfg.id = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        Ok(cfg)
    }

    pub fn id(&self) -> &str {
        self.id.as_deref().unwrap_or("experiment")
    }

    pub fn is_continuous(&self) -> bool {
        self.solver != SolverKind::Greedy
    }

    pub fn constraint_kind(&self) -> ConstraintKind {
        self.constraint.unwrap_or(match self.objective {
            ObjectiveKind::TightStationary => ConstraintKind::Simplex,
            _ => ConstraintKind::Cardinality,
        })
    }

    pub fn mirror_kind(&self) -> MirrorKind {
        self.mirror.unwrap_or(match (self.solver, self.constraint_kind()) {
            (SolverKind::Sm, ConstraintKind::Simplex) => MirrorKind::Entropy,
            _ => MirrorKind::Euclidean,
        })
    }

    pub fn schedule_kind(&self) -> ScheduleKind {
        self.schedule.unwrap_or(ScheduleKind::InverseSqrt)
    }

    pub fn output_rule(&self) -> OutputRule {
        self.output_rule.map(Into::into).unwrap_or(if self.solver == SolverKind::Fw {
            OutputRule::Last
        } else {
            OutputRule::UniformOverT
        })
    }

    /// Budgets to run, in order.
    pub fn budgets(&self) -> Vec<usize> {
        match (&self.k_sweep, self.k, self.objective, self.instance_size) {
            (Some(ks), _, _, _) => ks.clone(),
            (None, Some(k), _, _) => vec![k],
            (None, None, ObjectiveKind::TightStationary, Some(k)) => vec![k],
            (None, None, ObjectiveKind::FrankWolfeTrap, _) => vec![1],
            _ => Vec::new(),
        }
    }

    /// Horizons to run, in order; `[0]` for greedy.
    pub fn horizons(&self) -> Vec<usize> {
        if !self.is_continuous() {
            return vec![0];
        }
        match (&self.t_sweep, self.iterations) {
            (Some(ts), _) => ts.clone(),
            (None, Some(t)) => vec![t],
            (None, None) => Vec::new(),
        }
    }

    pub fn synthetic(&self) -> Option<(SyntheticRatings, u64)> {
        let any = self.synthetic_users.is_some()
            || self.synthetic_items.is_some()
            || self.synthetic_density.is_some()
            || self.synthetic_max_rating.is_some()
            || self.synthetic_seed.is_some();
        if !any {
            return None;
        }
        let d = SyntheticRatings::default();
        let params = SyntheticRatings {
            users: self.synthetic_users.unwrap_or(d.users),
            items: self.synthetic_items.unwrap_or(d.items),
            density: self.synthetic_density.unwrap_or(d.density),
            max_rating: self.synthetic_max_rating.unwrap_or(d.max_rating),
            latent_dim: d.latent_dim,
        };
        Some((params, self.synthetic_seed.unwrap_or(self.seed)))
    }

    /// Checks everything that can be checked without building the objective.
    pub fn validate(&self) -> Result<()> {
        let needs_ratings =
            matches!(self.objective, ObjectiveKind::FacilityLocation | ObjectiveKind::ConcaveOverModular);
        if needs_ratings {
            match (&self.ratings, self.synthetic()) {
                (Some(_), Some(_)) => return Err(config_err("give either `ratings` or `synthetic_*` keys, not both")),
                (None, None) => return Err(config_err("ratings objectives need `ratings` or `synthetic_*` keys")),
                (Some(p), None) if !p.is_file() => {
                    return Err(config_err(format!("ratings file {} does not exist", p.display())))
                }
                (None, Some((s, _))) => s.validate().map_err(|e| config_err(e.to_string()))?,
                _ => {}
            }
        } else if self.ratings.is_some() || self.synthetic().is_some() {
            return Err(config_err("ratings keys only apply to ratings objectives"));
        }
        if self.ratings.is_none() && self.ratings_format.is_some() {
            return Err(config_err("`ratings_format` needs `ratings`"));
        }
        match self.objective {
            ObjectiveKind::ConcaveOverModular => match self.power {
                Some(p) if p > 0.0 && p <= 1.0 => {}
                Some(p) => return Err(config_err(format!("power = {p} must lie in (0, 1]"))),
                None => return Err(config_err("concave-over-modular needs `power`")),
            },
            _ if self.power.is_some() => return Err(config_err("`power` only applies to concave-over-modular")),
            _ => {}
        }
        match (self.objective, &self.coverage) {
            (ObjectiveKind::CoverageFile, None) => return Err(config_err("coverage-file needs `coverage`")),
            (ObjectiveKind::CoverageFile, Some(p)) if !p.is_file() => {
                return Err(config_err(format!("coverage file {} does not exist", p.display())))
            }
            (ObjectiveKind::CoverageFile, _) => {}
            (_, Some(_)) => return Err(config_err("`coverage` only applies to coverage-file")),
            _ => {}
        }
        match (self.objective, self.instance_size) {
            (ObjectiveKind::TightStationary, Some(k)) if k >= 1 => {}
            (ObjectiveKind::FrankWolfeTrap, Some(n)) if n >= 3 => {}
            (ObjectiveKind::TightStationary | ObjectiveKind::FrankWolfeTrap, size) => {
                return Err(config_err(format!("instance_size = {size:?} is missing or too small")))
            }
            (_, Some(_)) => return Err(config_err("`instance_size` only applies to built-in instances")),
            _ => {}
        }
        if self.k.is_some() && self.k_sweep.is_some() {
            return Err(config_err("give either `k` or `k_sweep`"));
        }
        let budgets = self.budgets();
        if budgets.is_empty() {
            return Err(config_err("missing budget `k` or `k_sweep`"));
        }
        if budgets.iter().any(|&k| k == 0 && self.is_continuous()) {
            return Err(config_err("continuous solvers need k >= 1"));
        }
        if self.is_continuous() {
            if self.iterations.is_some() && self.t_sweep.is_some() {
                return Err(config_err("give either `iterations` or `t_sweep`"));
            }
            let horizons = self.horizons();
            if horizons.is_empty() || horizons.contains(&0) {
                return Err(config_err("continuous solvers need `iterations` (or `t_sweep`) >= 1"));
            }
        } else if self.iterations.is_some() || self.t_sweep.is_some() {
            return Err(config_err("greedy takes no `iterations`"));
        }
        if self.batch == 0 || self.repeats == 0 {
            return Err(config_err("`batch` and `repeats` must be at least 1"));
        }
        if self.value_samples == 0 {
            return Err(config_err("`value_samples` must be at least 1"));
        }
        if self.solver == SolverKind::Greedy && self.exact_gradients {
            return Err(config_err("`exact_gradients` does not apply to greedy"));
        }
        if self.is_continuous() {
            match self.schedule_kind() {
                ScheduleKind::InverseSqrt | ScheduleKind::Constant if self.solver != SolverKind::Fw => match self.c {
                    Some(c) if c > 0.0 && c.is_finite() => {}
                    _ => return Err(config_err("step schedule needs a positive `c`")),
                },
                _ => {}
            }
        }
        if self.mirror_kind() == MirrorKind::Entropy {
            if self.solver != SolverKind::Sm {
                return Err(config_err("the entropy mirror map only applies to sm"));
            }
            if self.constraint_kind() != ConstraintKind::Simplex {
                return Err(config_err("the entropy mirror map needs constraint = \"simplex\""));
            }
        }
        if self.start == Some(StartKind::XLoc) && self.objective != ObjectiveKind::TightStationary {
            return Err(config_err("start = \"x-loc\" needs the tight-stationary objective"));
        }
        if self.output_rule == Some(OutputRuleKind::Endpoint) && self.horizons().iter().any(|&t| t < 3) {
            return Err(config_err("the endpoint output rule needs at least 3 iterations"));
        }
        Ok(())
    }
}
