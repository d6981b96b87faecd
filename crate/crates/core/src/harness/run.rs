use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ConstraintKind, ExperimentConfig, MirrorKind, ObjectiveKind, ScheduleKind, SolverKind, StartKind};
use super::data::{load_coverage, load_ratings, RatingsFormat};
use crate::adversarial::{frank_wolfe_trap, tight_stationary_instance};
use crate::discrete::{greedy, lift_and_round, EmpiricalSetObjective};
use crate::geometry::{ConstraintSet, MirrorMap};
use crate::objectives::{
    concave_over_modular, facility_location, stochastic_objective, ContinuousObjective, RatingsMatrix, SetFunction,
    StochasticObjective, Subset,
};
use crate::rng;
use crate::solvers::{
    default_theoretical_schedule, frank_wolfe, sample_output, sga, sma, AscentOptions, GradientMode, StepSchedule,
    Trajectory,
};
use crate::{Error, Result};

/// CSV header written by [`emit_csv`].
pub const CSV_HEADER: &str = "config_id,solver,k,t,B,seed,value_continuous,value_rounded,evals,ms";

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_id: String,
    pub solver: String,
    pub k: usize,
    /// Steps taken; 0 for greedy.
    pub t: usize,
    #[serde(rename = "B")]
    pub batch: usize,
    pub seed: u64,
    /// `F` at the reported point (exact when available, otherwise a sample mean).
    pub value_continuous: f64,
    /// `f` of the rounded set.
    pub value_rounded: f64,
    /// Cumulative single-function evaluations.
    pub evals: u64,
    /// Wall-clock time of the whole run.
    pub ms: u64,
}

type DynSetFunction = Arc<dyn SetFunction>;

/// A family `f_1..f_m` with uniform weights, seen both as a continuous objective
/// and as the set function `f = mean f_i`.
pub struct Problem {
    pub family: Vec<DynSetFunction>,
    pub objective: StochasticObjective<DynSetFunction>,
    pub x_loc: Option<Vec<f64>>,
}

impl Problem {
    pub fn new(family: Vec<DynSetFunction>) -> Result<Self> {
        let objective = stochastic_objective(family.clone(), None)?;
        Ok(Problem { family, objective, x_loc: None })
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    /// `f(S) = (1/m) Σ_i f_i(S)`.
    pub fn set_value(&self, set: &Subset) -> f64 {
        self.family.iter().map(|f| f.eval(set)).sum::<f64>() / self.family.len() as f64
    }
}

fn dyn_family<F: SetFunction + 'static>(parts: Vec<F>) -> Vec<DynSetFunction> {
    parts.into_iter().map(|f| Arc::new(f) as DynSetFunction).collect()
}

fn ratings_for(cfg: &ExperimentConfig) -> Result<RatingsMatrix> {
    match (&cfg.ratings, cfg.synthetic()) {
        (Some(path), _) => Ok(load_ratings(path, cfg.ratings_format.unwrap_or(RatingsFormat::Tsv))?.0),
        (None, Some((params, seed))) => params.generate(seed),
        (None, None) => Err(Error::Config("no ratings source".into())),
    }
}

/// Builds the objective a config describes.
pub fn build_problem(cfg: &ExperimentConfig) -> Result<Problem> {
    match cfg.objective {
        ObjectiveKind::FacilityLocation => Problem::new(dyn_family(facility_location(&ratings_for(cfg)?).into_parts())),
        ObjectiveKind::ConcaveOverModular => {
            let power = cfg.power.ok_or_else(|| Error::Config("missing `power`".into()))?;
            Problem::new(dyn_family(concave_over_modular(&ratings_for(cfg)?, power)?.into_parts()))
        }
        ObjectiveKind::CoverageFile => {
            let path = cfg.coverage.as_ref().ok_or_else(|| Error::Config("missing `coverage`".into()))?;
            Problem::new(vec![Arc::new(load_coverage(path)?) as DynSetFunction])
        }
        ObjectiveKind::TightStationary => {
            let inst = tight_stationary_instance(cfg.instance_size.unwrap_or(1))?;
            let mut p = Problem::new(vec![Arc::new(inst.f) as DynSetFunction])?;
            p.x_loc = Some(inst.x_loc);
            Ok(p)
        }
        ObjectiveKind::FrankWolfeTrap => {
            let trap = frank_wolfe_trap(cfg.instance_size.unwrap_or(3))?;
            Problem::new(dyn_family(trap.objective.parts().to_vec()))
        }
    }
}

/// Validates, builds the objective and runs every sweep point.
///
/// Points are `(k, T, repeat)` in config order; point `p` runs with seed
/// `derive_seed(seed, p)`. Points run in parallel, rows come back in point order
/// and then by `t`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let problem = build_problem(cfg)?;
    run_on_problem(cfg, &problem)
}

pub fn run_on_problem(cfg: &ExperimentConfig, problem: &Problem) -> Result<Vec<RunRecord>> {
    let mut points = Vec::new();
    for k in cfg.budgets() {
        for t in cfg.horizons() {
            for _ in 0..cfg.repeats {
                let seed = rng::derive_seed(cfg.seed, points.len() as u64);
                points.push((k, t, seed));
            }
        }
    }
    let rows: Vec<Vec<RunRecord>> =
        points.par_iter().map(|&(k, t, seed)| run_point(cfg, problem, k, t, seed)).collect::<Result<_>>().map_err(
            |e| match e {
                Error::Capability(m) => Error::Capability(format!("config `{}`: {m}", cfg.id())),
                other => other,
            },
        )?;
    Ok(rows.into_iter().flatten().collect())
}

fn body_for(cfg: &ExperimentConfig, n: usize, k: usize) -> Result<ConstraintSet> {
    if k > n {
        return Err(Error::Config(format!("budget k = {k} exceeds ground set size {n}")));
    }
    match cfg.constraint_kind() {
        ConstraintKind::Cardinality => ConstraintSet::cardinality(n, k as f64),
        ConstraintKind::Simplex => ConstraintSet::scaled_simplex(n, k as f64),
    }
}

fn run_point(cfg: &ExperimentConfig, problem: &Problem, k: usize, t: usize, seed: u64) -> Result<Vec<RunRecord>> {
    let started = Instant::now();
    let n = problem.dim();
    let record = |t: usize, batch: usize, cont: f64, rounded: f64, evals: u64| RunRecord {
        config_id: cfg.id().to_string(),
        solver: cfg.solver.name().to_string(),
        k,
        t,
        batch,
        seed,
        value_continuous: cont,
        value_rounded: rounded,
        evals,
        ms: 0,
    };
    let mut rows = if cfg.solver == SolverKind::Greedy {
        if k > n {
            return Err(Error::Config(format!("budget k = {k} exceeds ground set size {n}")));
        }
        let emp = if problem.family.len() == 1 {
            EmpiricalSetObjective::new(problem.family.clone())?
        } else {
            let mut rng = rng::named_stream(seed, "greedy-batch");
            EmpiricalSetObjective::sample(&problem.family, None, cfg.batch, &mut rng)?
        };
        let set = greedy(&emp, k)?;
        let v = problem.set_value(&set);
        vec![record(0, emp.batch(), v, v, emp.evals())]
    } else {
        let body = body_for(cfg, n, k)?;
        let traj = run_continuous(cfg, problem, &body, k, t, seed)?;
        let mut rows = Vec::new();
        let mut report = |step: usize, x: &[f64], evals: u64, tag: u64| -> Result<()> {
            let mut value_rng = rng::named_stream(rng::derive_seed(seed, tag), "value");
            let cont = problem.objective.value_or_estimate(x, cfg.value_samples, &mut value_rng);
            let mut round_rng = rng::named_stream(rng::derive_seed(seed, tag), "round");
            let set = lift_and_round(x, k, &mut round_rng)?;
            let batch = if cfg.exact_gradients { 0 } else { cfg.batch };
            rows.push(record(step, batch, cont, problem.set_value(&set), evals));
            Ok(())
        };
        if cfg.record_every > 0 {
            for step in (cfg.record_every..t).step_by(cfg.record_every) {
                report(step, &traj.iterates[step], traj.steps[step - 1].evals, step as u64)?;
            }
        }
        let mut out_rng = rng::named_stream(seed, "output");
        let x = sample_output(&traj, cfg.output_rule(), &mut out_rng)?;
        report(t, &x, traj.total_evals(), t as u64)?;
        rows
    };
    if cfg.timing {
        let ms = started.elapsed().as_millis() as u64;
        rows.iter_mut().for_each(|r| r.ms = ms);
    }
    Ok(rows)
}

fn mirror_for(cfg: &ExperimentConfig, k: usize) -> MirrorMap {
    match cfg.mirror_kind() {
        MirrorKind::Euclidean => MirrorMap::HalfSquaredEuclidean,
        MirrorKind::Entropy => MirrorMap::ScaledEntropy { k: k as f64 },
    }
}

fn start_for(cfg: &ExperimentConfig, problem: &Problem, body: &ConstraintSet, map: MirrorMap) -> Result<Vec<f64>> {
    let n = body.dim();
    let kind = cfg.start.unwrap_or(match cfg.solver {
        SolverKind::Sm => StartKind::Argmin,
        _ if body.contains_origin() => StartKind::Origin,
        _ => StartKind::Uniform,
    });
    match kind {
        StartKind::Origin => Ok(vec![0.0; n]),
        StartKind::Uniform => Ok(vec![body.budget() / n as f64; n]),
        StartKind::Argmin => map.start_point(body),
        StartKind::XLoc => problem.x_loc.clone().ok_or_else(|| Error::Config("instance has no x_loc".into())),
    }
}

fn run_continuous(
    cfg: &ExperimentConfig,
    problem: &Problem,
    body: &ConstraintSet,
    k: usize,
    t: usize,
    seed: u64,
) -> Result<Trajectory> {
    let f = &problem.objective;
    let gradient = if cfg.exact_gradients { GradientMode::Exact } else { GradientMode::Sampled { batch: cfg.batch } };
    if cfg.solver == SolverKind::Fw {
        if cfg.start.is_some_and(|s| s != StartKind::Origin) {
            return Err(Error::Config("Frank-Wolfe always starts from the origin".into()));
        }
        return frank_wolfe(f, body, t, gradient, seed);
    }
    let map = mirror_for(cfg, k);
    let x1 = start_for(cfg, problem, body, map)?;
    let schedule = match cfg.schedule_kind() {
        ScheduleKind::InverseSqrt => StepSchedule::inverse_sqrt(cfg.c.unwrap_or(0.0))?,
        ScheduleKind::Constant => StepSchedule::constant(cfg.c.unwrap_or(0.0))?,
        ScheduleKind::Theoretical => match (cfg.l, cfg.sigma, cfg.r) {
            (Some(l), Some(sigma), Some(r)) => StepSchedule::theoretical(l, sigma, r)?,
            (l, sigma, r) => match default_theoretical_schedule(f, body, map, gradient, &x1, seed)? {
                StepSchedule::Theoretical { l: dl, sigma: ds, r: dr } => {
                    StepSchedule::theoretical(l.unwrap_or(dl), sigma.unwrap_or(ds), r.unwrap_or(dr))?
                }
                other => other,
            },
        },
    };
    let opts = AscentOptions::new(t, schedule, gradient, seed);
    match cfg.solver {
        SolverKind::Sg => sga(f, body, &opts, &x1),
        _ => sma(f, body, &opts, map, Some(&x1)),
    }
}

/// Writes records as CSV with the fixed [`CSV_HEADER`].
pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| Error::Data(e.to_string()))?;
    }
    if records.is_empty() {
        w.write_record(CSV_HEADER.split(',')).map_err(|e| Error::Data(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::input("no records to write"));
    }
    let file = std::fs::File::create(path)?;
    write_csv(records, std::io::BufWriter::new(file))
}

pub fn read_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Data(e.to_string()))?;
    r.deserialize().map(|row| row.map_err(|e| Error::Data(e.to_string()))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(text).unwrap()
    }

    #[test]
    fn frank_wolfe_trap_run() {
        let c = cfg("objective = \"frank-wolfe-trap\"\ninstance_size = 11\nsolver = \"fw\"\niterations = 2000\ntiming = false\n");
        let rows = run_experiment(&c).unwrap();
        assert_eq!(rows.len(), 1);
        // every one-sample direction is some e_i with i < n, so F stays at 1/(n-1)
        assert!((rows[0].value_continuous / 0.5 - 0.2).abs() < 1e-9);
        assert_eq!(rows[0].evals, 2000 * 11);
    }

    #[test]
    fn tight_instance_from_local_max_is_flat() {
        let c = cfg("objective = \"tight-stationary\"\ninstance_size = 5\nsolver = \"sg\"\niterations = 20\nexact_gradients = true\nschedule = \"constant\"\nc = 0.1\nstart = \"x-loc\"\nrecord_every = 5\noutput_rule = \"last\"\n");
        let rows = run_experiment(&c).unwrap();
        assert_eq!(rows.iter().map(|r| r.t).collect::<Vec<_>>(), vec![5, 10, 15, 20]);
        for r in &rows {
            assert!((r.value_continuous - 6.0).abs() < 1e-9);
            assert_eq!(r.value_rounded, 6.0);
        }
    }

    #[test]
    fn greedy_with_zero_budget() {
        let c = cfg("objective = \"frank-wolfe-trap\"\ninstance_size = 4\nsolver = \"greedy\"\nk = 0\nbatch = 3\n");
        let rows = run_experiment(&c).unwrap();
        assert_eq!((rows[0].value_rounded, rows[0].evals), (0.0, 0));
    }

    #[test]
    fn fw_on_simplex_names_the_config() {
        let c =
            cfg("id = \"bad\"\nobjective = \"tight-stationary\"\ninstance_size = 2\nsolver = \"fw\"\niterations = 3\n");
        let err = run_experiment(&c).unwrap_err();
        assert!(matches!(err, Error::Capability(m) if m.contains("`bad`")));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let rec = RunRecord {
            config_id: "a".into(),
            solver: "sg".into(),
            k: 3,
            t: 10,
            batch: 2,
            seed: u64::MAX,
            value_continuous: 0.1 + 0.2,
            value_rounded: 1.0 / 3.0,
            evals: 60,
            ms: 7,
        };
        emit_csv(std::slice::from_ref(&rec), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(read_csv(&path).unwrap(), vec![rec]);
        assert!(emit_csv(&[], &path).is_err());
    }
}
