use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use pacing_core::{
    distance, level_specs, map_rows, optimize, pmp_csv, simulate, sweep_specs, vla_specs,
    LevelRow, RunOutcome, RunSpec, Runner, RunnerParams, SimMode, SolveStatus, Vla, LEVEL_ROWS,
    N_STRATEGIES, TABLE_HORIZON,
};

use crate::config::ExperimentConfig;
use crate::output::write_atomic;
use crate::CliError;

/// Exit code of a finished solve.
pub fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Converged => 0,
        SolveStatus::MaxIter => 3,
        SolveStatus::Infeasible => 4,
    }
}

/// Forces, one per interval. Accepts a bare column of numbers or a CSV with
/// an `f` column (such as `trajectory.csv`, whose last row has no force).
pub fn read_profile(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read profile {}: {e}", path.display())))?;
    let mut column: Option<usize> = None;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if out.is_empty() && column.is_none() && fields[0].parse::<f64>().is_err() {
            column = Some(fields.iter().position(|h| *h == "f").ok_or_else(|| {
                CliError::Input(format!("profile line {}: header has no `f` column", i + 1))
            })?);
            continue;
        }
        let field = match column {
            Some(c) => fields.get(c).copied().unwrap_or(""),
            None if fields.len() == 1 => fields[0],
            None => {
                return Err(CliError::Input(format!(
                    "profile line {}: expected one value, got {}",
                    i + 1,
                    fields.len()
                )))
            }
        };
        if field.is_empty() && column.is_some() {
            continue;
        }
        let v = field
            .parse::<f64>()
            .map_err(|e| CliError::Input(format!("profile line {}: {e}", i + 1)))?;
        out.push(v);
    }
    Ok(out)
}

pub fn simulate_cmd(cfg: &ExperimentConfig, profile: &Path, mode: Option<SimMode>, dir: &Path) -> Result<u8, CliError> {
    let f = read_profile(profile)?;
    let runner = Runner::new(cfg.params.clone()).map_err(input)?;
    let mesh = cfg.mesh()?;
    let strategy = cfg.strategy()?;
    let traj = simulate(&runner, &strategy, &mesh, &f, mode.unwrap_or(cfg.mode)).map_err(input)?;
    let m = mesh.n_nodes() - 1;
    let v_max = cfg.params.v_max();
    if traj.v.iter().any(|v| !(v.abs() <= v_max)) {
        eprintln!(
            "pacing: warning: velocity left [0, {v_max}]; forward Euler is unstable at h/tau = {:.1}, consider --mode refined",
            mesh.h() / cfg.params.tau
        );
    }
    let mut summary = String::new();
    let _ = writeln!(summary, "distance: {:.3} km", distance(&traj));
    let _ = writeln!(summary, "E_F(T): {:.4} kJ/kg", traj.ef[m]);
    let _ = writeln!(summary, "E_G(T): {:.4} kJ/kg", traj.eg[m]);
    let _ = writeln!(summary, "N(T): {:.4} kJ", traj.n[m]);
    let _ = writeln!(summary, "min E_G: {:.4} kJ/kg", traj.eg.iter().copied().fold(f64::INFINITY, f64::min));
    write_atomic(&dir.join("trajectory.csv"), &traj.to_csv())?;
    write_atomic(&dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(0)
}

pub fn optimize_cmd(cfg: &ExperimentConfig, dir: &Path) -> Result<u8, CliError> {
    let spec = RunSpec {
        label: "optimize".into(),
        params: cfg.params.clone(),
        strategy: cfg.strategy()?,
        mesh: cfg.mesh()?,
        tv_weight: cfg.tv_weight,
        min_velocity: cfg.min_velocity,
    };
    let out = optimize(&spec, &cfg.solver).map_err(input)?;
    let mut summary = String::new();
    let _ = writeln!(summary, "{}", out.report.summary_line());
    let _ = writeln!(summary, "distance: {:.3} km", out.distance_km);
    let m = spec.mesh.n_nodes() - 1;
    let _ = writeln!(summary, "E_G(T): {:.4} kJ/kg", out.trajectory.eg[m]);
    write_atomic(&dir.join("trajectory.csv"), &out.trajectory.to_csv())?;
    match out.pmp() {
        Ok((adj, arcs)) => {
            let labels: Vec<&str> = arcs.label_sequence().iter().map(|l| l.as_str()).collect();
            let _ = writeln!(summary, "arcs: {}", labels.join(" > "));
            let _ = writeln!(summary, "indeterminate nodes: {}", arcs.indeterminate_nodes().len());
            let _ = writeln!(summary, "eta violation: {:.3e}", adj.eta_violation());
            write_atomic(&dir.join("pmp.csv"), &pmp_csv(&out.trajectory, &adj, &arcs))?;
        }
        Err(e) => {
            let _ = writeln!(summary, "pmp: {e}");
        }
    }
    write_atomic(&dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(status_code(out.status()))
}

struct Row {
    cells: String,
    result: Result<SolveStatus, String>,
}

/// Solve every spec, writing each row's trajectory as it finishes, then the
/// table in input order.
fn run_table(
    cfg: &ExperimentConfig,
    specs: Vec<RunSpec>,
    dir: &Path,
    name: &str,
    header: &str,
    cells: impl Fn(usize, &RunSpec, Option<&RunOutcome>) -> String + Sync,
) -> Result<u8, CliError> {
    let rows_dir = dir.join(name);
    let indexed: Vec<(usize, RunSpec)> = specs.into_iter().enumerate().collect();
    let rows: Vec<Row> = map_rows(&indexed, cfg.execution, |(i, spec)| match optimize(spec, &cfg.solver) {
        Ok(out) => {
            let written = write_atomic(&rows_dir.join(format!("{}.csv", spec.label)), &out.trajectory.to_csv());
            Row {
                cells: cells(*i, spec, Some(&out)),
                result: written.map(|_| out.status()).map_err(|e| e.to_string()),
            }
        }
        Err(e) => Row {
            cells: cells(*i, spec, None),
            result: Err(e.to_string()),
        },
    });
    let mut table = format!("{header}\n");
    let mut code = 0;
    for row in &rows {
        let status = match &row.result {
            Ok(s) => s.as_str().to_string(),
            Err(e) => format!("error: {}", e.replace(',', ";")),
        };
        let _ = writeln!(table, "{},{status}", row.cells);
        let c = match &row.result {
            Ok(s) => status_code(*s),
            Err(_) => 2,
        };
        code = severity(code, c);
    }
    write_atomic(&dir.join(format!("{name}.csv")), &table)?;
    print!("{table}");
    Ok(code)
}

/// Input errors outrank infeasibility, which outranks non-convergence.
fn severity(a: u8, b: u8) -> u8 {
    let rank = |c: u8| match c {
        2 => 3,
        4 => 2,
        3 => 1,
        _ => 0,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

fn km(out: Option<&RunOutcome>) -> String {
    out.map(|o| format!("{:.4}", o.distance_km)).unwrap_or_default()
}

/// Table horizon and VLa unless the config sets them.
fn table_setup(cfg: &ExperimentConfig) -> (RunnerParams, f64) {
    let mut params = cfg.params.clone();
    if !cfg.is_explicit("vla") {
        params.vla = Vla::Average;
    }
    let horizon = if cfg.is_explicit("t_final") { cfg.t_final } else { TABLE_HORIZON };
    (params, horizon)
}

fn with_tv(cfg: &ExperimentConfig, mut specs: Vec<RunSpec>) -> Vec<RunSpec> {
    for s in &mut specs {
        s.tv_weight = cfg.tv_weight;
    }
    specs
}

pub fn sweep_cmd(cfg: &ExperimentConfig, indices: Option<&[usize]>, dir: &Path) -> Result<u8, CliError> {
    let all: Vec<usize> = (0..N_STRATEGIES).collect();
    let (params, horizon) = table_setup(cfg);
    let specs = with_tv(cfg, sweep_specs(&params, indices.unwrap_or(&all), horizon).map_err(input)?);
    run_table(cfg, specs, dir, "sweep", "# units: kcal, km\nstrategy,kcal,km,status", |_, spec, out| {
        format!("{},{:.0},{}", spec.strategy.id, spec.strategy.total_kcal(), km(out))
    })
}

pub fn vla_cmd(cfg: &ExperimentConfig, dir: &Path) -> Result<u8, CliError> {
    let params = cfg.params.clone();
    let horizon = if cfg.is_explicit("t_final") { cfg.t_final } else { TABLE_HORIZON };
    let specs = with_tv(cfg, vla_specs(&params, horizon).map_err(input)?);
    run_table(cfg, specs, dir, "vla", "# units: kcal, km\nvla,gels,kcal,km,status", |_, spec, out| {
        format!(
            "{},{},{:.0},{}",
            spec.params.vla,
            spec.strategy.events().len(),
            spec.strategy.total_kcal(),
            km(out)
        )
    })
}

pub fn levels_cmd(cfg: &ExperimentConfig, dir: &Path) -> Result<u8, CliError> {
    let specs = with_tv(cfg, level_specs(&cfg.params).map_err(input)?);
    run_table(
        cfg,
        specs,
        dir,
        "levels",
        "# units: t_final min, vvo2max m/min, mass kg, eg0 kJ/kg, km km\nrow,t_final,vvo2max,mass,vla,gels,eg0,km,reference_km,status",
        |i, _, out| {
            let r: &LevelRow = &LEVEL_ROWS[i];
            format!(
                "{},{},{},{},{},{},{},{},{}",
                i + 1,
                r.t_final,
                r.vvo2max,
                r.mass,
                r.vla,
                r.gels,
                r.eg0,
                km(out),
                r.reference_km
            )
        },
    )
}

fn input(e: pacing_core::ModelError) -> CliError {
    CliError::Input(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_formats() {
        let dir = tempfile::tempdir().unwrap();
        let bare = dir.path().join("bare.txt");
        fs::write(&bare, "# forces\n1\n2.5\n\n3\n").unwrap();
        assert_eq!(read_profile(&bare).unwrap(), vec![1.0, 2.5, 3.0]);

        let csv = dir.path().join("traj.csv");
        fs::write(&csv, "# units\nt,f,V\n0,10,0\n1,20,5\n2,,7\n").unwrap();
        assert_eq!(read_profile(&csv).unwrap(), vec![10.0, 20.0]);

        let bad = dir.path().join("bad.csv");
        fs::write(&bad, "1\nx\n").unwrap();
        assert!(matches!(read_profile(&bad), Err(CliError::Input(_))));
        fs::write(&bad, "t,V\n0,1\n").unwrap();
        assert!(read_profile(&bad).is_err());
    }

    #[test]
    fn severity_order() {
        assert_eq!(severity(0, 3), 3);
        assert_eq!(severity(3, 4), 4);
        assert_eq!(severity(4, 3), 4);
        assert_eq!(severity(4, 2), 2);
        assert_eq!(severity(2, 0), 2);
    }
}
