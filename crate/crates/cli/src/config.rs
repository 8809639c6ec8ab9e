//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # world-record run with a lighter TV weight
//! params = world_record
//! t_final = 120
//! tv_weight = 0.25
//! strategy = builtin:4
//! solver.max_outer = 80
//! ```
//!
//! `params` picks a preset (`world_record` or `level:N` for runner level
//! row N, 1-based) and is applied before any other key, so individual
//! fields override it wherever they appear in the file.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use pacing_core::{
    builtin_strategy, world_record_strategy, Execution, Mesh, NutritionStrategy, RunnerParams, SimMode,
    SolverConfig, Vla, LEVEL_ROWS,
};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum StrategySel {
    Builtin(usize),
    WorldRecord,
    None,
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub params: RunnerParams,
    pub t_final: f64,
    /// Mesh nodes; one per minute plus one when unset.
    pub nodes: Option<usize>,
    pub tv_weight: f64,
    pub strategy: StrategySel,
    pub solver: SolverConfig,
    pub min_velocity: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub mode: SimMode,
    pub execution: Execution,
    /// Keys given explicitly, after preset expansion.
    explicit: BTreeSet<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: RunnerParams::world_record(),
            t_final: 120.0,
            nodes: None,
            tv_weight: pacing_core::DEFAULT_TV_WEIGHT,
            strategy: StrategySel::WorldRecord,
            solver: SolverConfig::default(),
            min_velocity: None,
            output_dir: None,
            mode: SimMode::Transcription,
            execution: Execution::Parallel,
            explicit: BTreeSet::new(),
        }
    }
}

fn bad(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Input(format!("config line {line}: {}", msg.into()))
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| bad(line, format!("`{key}`: {e}")))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parse `text`; relative `file:` paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(line_no, format!("expected `key = value`, got `{line}`")))?;
            let key = k.trim().to_ascii_lowercase();
            if entries.insert(key.clone(), (line_no, v.trim().to_string())).is_some() {
                return Err(bad(line_no, format!("duplicate key `{key}`")));
            }
        }

        let mut cfg = Self::default();
        if let Some((line, preset)) = entries.remove("params") {
            cfg.apply_preset(line, &preset)?;
        }
        for (key, (line, value)) in &entries {
            cfg.apply(*line, key, value, base)?;
            cfg.explicit.insert(key.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_preset(&mut self, line: usize, preset: &str) -> Result<(), CliError> {
        if preset == "world_record" {
            return Ok(());
        }
        let Some(n) = preset.strip_prefix("level:") else {
            return Err(bad(line, format!("unknown params preset `{preset}`")));
        };
        let idx: usize = num(line, "params", n)?;
        let row = idx
            .checked_sub(1)
            .and_then(|i| LEVEL_ROWS.get(i))
            .ok_or_else(|| bad(line, format!("level {idx} outside 1..={}", LEVEL_ROWS.len())))?;
        self.params.vvo2max = row.vvo2max;
        self.params.mass = row.mass;
        self.params.vla = row.vla;
        self.params.eg0 = row.eg0;
        self.t_final = row.t_final;
        self.strategy = StrategySel::Builtin(row.gels);
        for k in ["vvo2max", "mass", "vla", "eg0", "t_final", "strategy"] {
            self.explicit.insert(k.into());
        }
        Ok(())
    }

    fn apply(&mut self, line: usize, key: &str, v: &str, base: &Path) -> Result<(), CliError> {
        let p = &mut self.params;
        match key {
            "mass" => p.mass = num(line, key, v)?,
            "tau" => p.tau = num(line, key, v)?,
            "vvo2max" => p.vvo2max = num(line, key, v)?,
            "d" => p.d = num(line, key, v)?,
            "c4" => p.c4 = num(line, key, v)?,
            "a" => p.a = num(line, key, v)?,
            "sm" => p.sm = num(line, key, v)?,
            "f_max" => p.f_max = num(line, key, v)?,
            "eg0" => p.eg0 = num(line, key, v)?,
            "ef0" => p.ef0 = num(line, key, v)?,
            "vla" => p.vla = v.parse::<Vla>().map_err(|e| bad(line, e.to_string()))?,
            "t_final" => self.t_final = num(line, key, v)?,
            "nodes" => self.nodes = Some(num(line, key, v)?),
            "tv_weight" => self.tv_weight = num(line, key, v)?,
            "min_velocity" => self.min_velocity = Some(num(line, key, v)?),
            "output_dir" => self.output_dir = Some(PathBuf::from(v)),
            "strategy" => self.strategy = parse_strategy(line, v, base)?,
            "mode" => self.mode = parse_mode(v).ok_or_else(|| bad(line, format!("unknown mode `{v}`")))?,
            "execution" => {
                self.execution = match v {
                    "parallel" => Execution::Parallel,
                    "sequential" => Execution::Sequential,
                    _ => return Err(bad(line, format!("unknown execution `{v}`"))),
                }
            }
            "solver.max_outer" => self.solver.max_outer = num(line, key, v)?,
            "solver.max_inner" => self.solver.max_inner = num(line, key, v)?,
            "solver.tol_c" => self.solver.tol_c = num(line, key, v)?,
            "solver.tol_o" => self.solver.tol_o = num(line, key, v)?,
            "solver.rho_init" => self.solver.rho_init = num(line, key, v)?,
            "solver.rho_max" => self.solver.rho_max = num(line, key, v)?,
            "solver.rho_growth" => self.solver.rho_growth = num(line, key, v)?,
            "solver.stall_limit" => self.solver.stall_limit = num(line, key, v)?,
            _ => return Err(bad(line, format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Everything that can be checked without solving.
    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate().map_err(input)?;
        self.solver.validate().map_err(input)?;
        if !(self.tv_weight.is_finite() && self.tv_weight >= 0.0) {
            return Err(CliError::Input(format!("tv_weight must be >= 0, got {}", self.tv_weight)));
        }
        let mesh = self.mesh()?;
        self.strategy()?.check_horizon(mesh.t_final()).map_err(input)?;
        Ok(())
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    pub fn mesh(&self) -> Result<Mesh, CliError> {
        match self.nodes {
            Some(n) => Mesh::new(self.t_final, n),
            None => Mesh::minutes(self.t_final),
        }
        .map_err(input)
    }

    pub fn strategy(&self) -> Result<NutritionStrategy, CliError> {
        match &self.strategy {
            StrategySel::Builtin(i) => builtin_strategy(*i, self.t_final).map_err(input),
            StrategySel::WorldRecord => Ok(world_record_strategy()),
            StrategySel::None => Ok(NutritionStrategy::none()),
            StrategySel::File(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("cannot read strategy {}: {e}", path.display())))?;
                NutritionStrategy::from_csv(&text).map_err(input)
            }
        }
    }
}

fn input(e: pacing_core::ModelError) -> CliError {
    CliError::Input(e.to_string())
}

fn parse_strategy(line: usize, v: &str, base: &Path) -> Result<StrategySel, CliError> {
    if let Some(i) = v.strip_prefix("builtin:") {
        return Ok(StrategySel::Builtin(num(line, "strategy", i)?));
    }
    if let Some(p) = v.strip_prefix("file:") {
        let path = PathBuf::from(p.trim());
        return Ok(StrategySel::File(if path.is_absolute() { path } else { base.join(path) }));
    }
    match v {
        "world_record" => Ok(StrategySel::WorldRecord),
        "none" => Ok(StrategySel::None),
        _ => Err(bad(line, format!("unknown strategy `{v}`"))),
    }
}

pub fn parse_mode(v: &str) -> Option<SimMode> {
    match v {
        "transcription" => Some(SimMode::Transcription),
        "refined" => Some(SimMode::Refined),
        _ => None,
    }
}
