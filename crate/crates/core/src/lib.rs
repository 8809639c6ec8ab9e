//! Bioenergetic running model with nutrition intake and a direct-transcription
//! optimizer for the distance-maximizing force profile.

pub mod bioenergetics;
pub mod error;
pub mod experiment;
pub mod glyc;
pub mod nutrition;
pub mod params;
pub mod pmp;
pub mod solver;
pub mod transcription;

pub use bioenergetics::{
    distance, energy_audit, euler_step, simulate, simulate_with_source, trajectory_from_velocity,
    Mesh, SimMode, State, Trajectory,
};
pub use error::{ModelError, Result};
pub use experiment::{
    level_specs, map_rows, optimize, run_all, sweep_specs, vla_specs, Execution, LevelRow, RunOutcome,
    RunSpec, DEFAULT_TV_WEIGHT, LEVEL_ROWS, N_STRATEGIES, TABLE_HORIZON,
};
pub use glyc::{build_glyc_curve, glyc_eval, CurveSpec, GlycCurve, GlycPoint, KnotTables, Vla};
pub use nutrition::{
    builtin_strategy, pulse_profile, world_record_strategy, GelEvent, NutritionStrategy,
};
pub use params::{Runner, RunnerParams, KJ_PER_KCAL};
pub use pmp::{
    adjoint_backward, adjoint_with_eta, boundary_force, boundary_force_at, classify_arcs, glc_check,
    pmp_csv, switching_function, AdjointTrajectory, ArcLabel, ArcSegment, ArcSegmentation,
    ArcTolerances, GlcWindow, GLC_MIN_WINDOW,
};
pub use transcription::{
    assemble, total_variation, tv_split, Block, DecisionLayout, NlpProblem, RowKind,
};
pub use solver::shooting::{
    shooting_gradient, shooting_optimize, ShootingConfig, ShootingResult, ShootingStatus,
};
pub use solver::{constant_pace_start, solve, SolveStatus, SolverConfig, SolverReport};
