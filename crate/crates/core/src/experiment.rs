//! Batches of independent solves: the nutrition sweep, the VLa table and the
//! runner-level table.
//!
//! Rows run through [`run_all`], which fans out over rayon when the
//! `parallel` feature is on and falls back to a plain loop otherwise. Results
//! come back in input order either way, and the solver is deterministic, so
//! the tables do not depend on the execution mode.

use crate::bioenergetics::{distance, Mesh, Trajectory};
use crate::error::Result;
use crate::glyc::Vla;
use crate::nutrition::{builtin_strategy, NutritionStrategy};
use crate::params::{Runner, RunnerParams};
use crate::pmp::{classify_arcs, AdjointTrajectory, ArcSegmentation, ArcTolerances};
use crate::solver::{constant_pace_start, solve, SolveStatus, SolverConfig, SolverReport};
use crate::transcription::{assemble, NlpProblem};

/// Horizon of the sweep and VLa tables, min.
pub const TABLE_HORIZON: f64 = 135.0;
/// TV weight used throughout the tables.
pub const DEFAULT_TV_WEIGHT: f64 = 0.5;
/// Number of catalogued strategies.
pub const N_STRATEGIES: usize = 16;

/// One optimization to run.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub label: String,
    pub params: RunnerParams,
    pub strategy: NutritionStrategy,
    pub mesh: Mesh,
    pub tv_weight: f64,
    pub min_velocity: Option<f64>,
}

impl RunSpec {
    pub fn new(label: impl Into<String>, params: RunnerParams, strategy: NutritionStrategy, t_final: f64) -> Result<Self> {
        Ok(Self {
            label: label.into(),
            params,
            strategy,
            mesh: Mesh::minutes(t_final)?,
            tv_weight: DEFAULT_TV_WEIGHT,
            min_velocity: None,
        })
    }

    pub fn problem(&self) -> Result<NlpProblem> {
        let runner = Runner::new(self.params.clone())?;
        let prob = assemble(&runner, &self.strategy, &self.mesh, self.tv_weight)?;
        match self.min_velocity {
            Some(v) => prob.with_min_velocity(v),
            None => Ok(prob),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub label: String,
    pub kcal: f64,
    pub problem: NlpProblem,
    pub report: SolverReport,
    pub trajectory: Trajectory,
    /// Recomputed from the unpacked trajectory.
    pub distance_km: f64,
}

impl RunOutcome {
    pub fn status(&self) -> SolveStatus {
        self.report.status
    }

    /// Adjoints from the solver multipliers and the resulting arc labels.
    pub fn pmp(&self) -> Result<(AdjointTrajectory, ArcSegmentation)> {
        let adj = AdjointTrajectory::from_multipliers(&self.problem, &self.report)?;
        let arcs = classify_arcs(
            &adj.phi,
            &self.trajectory.f,
            &self.trajectory.eg,
            self.problem.runner.params.f_max,
            adj.lambda1_scale(),
            &ArcTolerances::default(),
        )?;
        Ok((adj, arcs))
    }
}

/// Assemble, warm-start at the best constant pace, and solve.
///
/// Falls back to the all-`f_max` start when no constant pace is feasible.
pub fn optimize(spec: &RunSpec, cfg: &SolverConfig) -> Result<RunOutcome> {
    let problem = spec.problem()?;
    let start = if spec.min_velocity.is_some() {
        problem.paper_x0()
    } else {
        constant_pace_start(&problem).unwrap_or_else(|_| problem.paper_x0())
    };
    let report = solve(&problem, &start, cfg)?;
    let trajectory = report.trajectory(&problem)?;
    Ok(RunOutcome {
        label: spec.label.clone(),
        kcal: spec.strategy.total_kcal(),
        distance_km: distance(&trajectory),
        problem,
        report,
        trajectory,
    })
}

/// How a batch is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    /// rayon when built with the `parallel` feature, sequential otherwise.
    Parallel,
    Sequential,
}

/// Map `f` over `items`, preserving order.
pub fn map_rows<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

pub fn run_all(specs: &[RunSpec], cfg: &SolverConfig, exec: Execution) -> Vec<Result<RunOutcome>> {
    map_rows(specs, exec, |s| optimize(s, cfg))
}

/// Strategies `indices` over `horizon` minutes. The published sweep uses an
/// average-VLa runner at [`TABLE_HORIZON`].
pub fn sweep_specs(params: &RunnerParams, indices: &[usize], horizon: f64) -> Result<Vec<RunSpec>> {
    indices
        .iter()
        .map(|&i| RunSpec::new(format!("s{i}"), params.clone(), builtin_strategy(i, horizon)?, horizon))
        .collect()
}

/// Good, average and bad runners, each without gels and with four 100 kcal
/// gels, over `horizon` minutes.
pub fn vla_specs(base: &RunnerParams, horizon: f64) -> Result<Vec<RunSpec>> {
    let mut out = Vec::with_capacity(6);
    for vla in [Vla::Good, Vla::Average, Vla::Bad] {
        for gels in [0, 4] {
            let params = RunnerParams { vla, ..base.clone() };
            out.push(RunSpec::new(
                format!("{}_{gels}gels", vla.as_str()),
                params,
                builtin_strategy(gels, horizon)?,
                horizon,
            )?);
        }
    }
    Ok(out)
}

/// One configured runner level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelRow {
    pub t_final: f64,
    pub vvo2max: f64,
    pub mass: f64,
    pub vla: Vla,
    /// Evenly spread 100 kcal gels.
    pub gels: usize,
    pub eg0: f64,
    /// Published distance, km.
    pub reference_km: f64,
}

pub const LEVEL_ROWS: [LevelRow; 8] = [
    LevelRow { t_final: 155.0, vvo2max: 320.0, mass: 73.0, vla: Vla::Average, gels: 4, eg0: 150.0, reference_km: 42.9 },
    LevelRow { t_final: 155.0, vvo2max: 320.0, mass: 73.0, vla: Vla::Average, gels: 0, eg0: 150.0, reference_km: 40.1 },
    LevelRow { t_final: 155.0, vvo2max: 320.0, mass: 73.0, vla: Vla::Good, gels: 4, eg0: 150.0, reference_km: 44.4 },
    LevelRow { t_final: 155.0, vvo2max: 320.0, mass: 73.0, vla: Vla::Bad, gels: 4, eg0: 150.0, reference_km: 41.6 },
    LevelRow { t_final: 180.0, vvo2max: 250.0, mass: 80.0, vla: Vla::Average, gels: 0, eg0: 140.0, reference_km: 41.0 },
    LevelRow { t_final: 180.0, vvo2max: 250.0, mass: 80.0, vla: Vla::Average, gels: 4, eg0: 140.0, reference_km: 42.7 },
    LevelRow { t_final: 215.0, vvo2max: 200.0, mass: 80.0, vla: Vla::Bad, gels: 0, eg0: 140.0, reference_km: 41.6 },
    LevelRow { t_final: 210.0, vvo2max: 200.0, mass: 80.0, vla: Vla::Average, gels: 4, eg0: 144.0, reference_km: 44.3 },
];

pub fn level_specs(base: &RunnerParams) -> Result<Vec<RunSpec>> {
    LEVEL_ROWS
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let params = RunnerParams {
                vvo2max: r.vvo2max,
                mass: r.mass,
                vla: r.vla,
                eg0: r.eg0,
                ..base.clone()
            };
            RunSpec::new(format!("row{}", i + 1), params, builtin_strategy(r.gels, r.t_final)?, r.t_final)
        })
        .collect()
}
