//! State dynamics of the runner: velocity, fat and glycogen stores, and the
//! nutrition compartment, with their forward Euler recurrences.
//!
//! With the world-record constants `h/τ = 60`, so the velocity recurrence has
//! an amplification factor of `|1 − h/τ| = 59` per step. Transcription-mode
//! simulation reproduces the optimizer's constraints exactly, including that
//! amplification; use [`SimMode::Refined`] for a physically stable integration.

use std::fmt::Write as _;

use crate::error::{ModelError, Result};
use crate::nutrition::{pulse_profile, NutritionStrategy};
use crate::params::Runner;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    /// m/min
    pub v: f64,
    /// kJ/kg
    pub ef: f64,
    /// kJ/kg
    pub eg: f64,
    /// kJ
    pub n: f64,
}

impl State {
    pub fn initial(runner: &Runner) -> Self {
        Self {
            v: 0.0,
            ef: runner.params.ef0,
            eg: runner.params.eg0,
            n: 0.0,
        }
    }
}

/// Uniform time grid with nodes `t_0 = 0, …, t_{M−1} = T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    t_final: f64,
    n_nodes: usize,
    h: f64,
}

impl Mesh {
    pub fn new(t_final: f64, n_nodes: usize) -> Result<Self> {
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(ModelError::InvalidMesh(format!("t_final must be > 0, got {t_final}")));
        }
        if n_nodes < 2 {
            return Err(ModelError::InvalidMesh(format!("need at least 2 nodes, got {n_nodes}")));
        }
        Ok(Self {
            t_final,
            n_nodes,
            h: t_final / (n_nodes - 1) as f64,
        })
    }

    /// One node per minute: `M = T + 1`, `h = 1`.
    pub fn minutes(t_final: f64) -> Result<Self> {
        if !(t_final.is_finite() && t_final >= 1.0) {
            return Err(ModelError::InvalidMesh(format!(
                "minute mesh needs T >= 1, got {t_final}"
            )));
        }
        Self::new(t_final, t_final.round() as usize + 1)
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.h
    }

    /// Same horizon with twice as many intervals.
    pub fn refined(&self) -> Self {
        Self::new(self.t_final, 2 * (self.n_nodes - 1) + 1).expect("refining a valid mesh")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mesh: Mesh,
    /// Force on each interval, length M−1.
    pub f: Vec<f64>,
    pub v: Vec<f64>,
    pub ef: Vec<f64>,
    pub eg: Vec<f64>,
    pub n: Vec<f64>,
}

impl Trajectory {
    pub fn state(&self, k: usize) -> State {
        State {
            v: self.v[k],
            ef: self.ef[k],
            eg: self.eg[k],
            n: self.n[k],
        }
    }

    pub fn check_shape(&self) -> Result<()> {
        let m = self.mesh.n_nodes();
        check_len("force", m - 1, self.f.len())?;
        check_len("velocity", m, self.v.len())?;
        check_len("fat energy", m, self.ef.len())?;
        check_len("glycogen energy", m, self.eg.len())?;
        check_len("nutrition", m, self.n.len())
    }

    /// CSV with header `t,f,V,E_F,E_G,N`; the final row has an empty force.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("# units: t [min], f [m/min^2], V [m/min], E_F [kJ/kg], E_G [kJ/kg], N [kJ]\n");
        out.push_str("t,f,V,E_F,E_G,N\n");
        for k in 0..self.mesh.n_nodes() {
            let f = self.f.get(k).map(|f| f.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                self.mesh.t(k),
                f,
                self.v[k],
                self.ef[k],
                self.eg[k],
                self.n[k]
            );
        }
        out
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(ModelError::Shape { what, expected, got })
    }
}

/// Instantaneous rates of change `(V', E_F', E_G', N')` for force `f` and
/// nutrition source `s`.
pub fn rates(state: &State, f: f64, s: f64, runner: &Runner) -> State {
    let p = &runner.params;
    let (g, _, _) = runner.glyc_v(state.v);
    let work = p.work_scale() * f * state.v;
    State {
        v: f - state.v * p.inv_tau(),
        ef: -work * (1.0 - g),
        eg: p.c3() * p.c4 * state.n - work * g,
        n: s - p.d * state.n - p.c4 * state.n,
    }
}

/// One forward Euler step of length `h`.
pub fn euler_step(state: &State, f: f64, s: f64, runner: &Runner, h: f64) -> State {
    let r = rates(state, f, s, runner);
    State {
        v: state.v + h * r.v,
        ef: state.ef + h * r.ef,
        eg: state.eg + h * r.eg,
        n: state.n + h * r.n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    /// Repeated [`euler_step`] at mesh resolution; identical to the NLP recurrences.
    Transcription,
    /// Velocity integrated exactly on each interval, energies and nutrition
    /// sub-stepped at no more than `τ/2`. Diagnostic only.
    Refined,
}

/// Simulate from the race-start state under a piecewise-constant force.
pub fn simulate(
    runner: &Runner,
    strategy: &NutritionStrategy,
    mesh: &Mesh,
    f: &[f64],
    mode: SimMode,
) -> Result<Trajectory> {
    let s = pulse_profile(strategy, mesh)?;
    simulate_with_source(runner, mesh, f, &s, mode)
}

/// As [`simulate`], with the nutrition source already rasterized.
pub fn simulate_with_source(
    runner: &Runner,
    mesh: &Mesh,
    f: &[f64],
    s: &[f64],
    mode: SimMode,
) -> Result<Trajectory> {
    let m = mesh.n_nodes();
    check_len("force", m - 1, f.len())?;
    check_len("nutrition source", m - 1, s.len())?;
    let f_max = runner.params.f_max;
    if let Some((k, &bad)) = f
        .iter()
        .enumerate()
        .find(|(_, &x)| !(x.is_finite() && (0.0..=f_max).contains(&x)))
    {
        return Err(ModelError::InvalidParam {
            name: "force",
            reason: format!("f[{k}] = {bad} outside [0, {f_max}]"),
        });
    }

    let mut states = Vec::with_capacity(m);
    let mut x = State::initial(runner);
    states.push(x);
    let h = mesh.h();
    for k in 0..m - 1 {
        x = match mode {
            SimMode::Transcription => euler_step(&x, f[k], s[k], runner, h),
            SimMode::Refined => refined_interval(&x, f[k], s[k], runner, h),
        };
        states.push(x);
    }
    Ok(Trajectory {
        mesh: *mesh,
        f: f.to_vec(),
        v: states.iter().map(|x| x.v).collect(),
        ef: states.iter().map(|x| x.ef).collect(),
        eg: states.iter().map(|x| x.eg).collect(),
        n: states.iter().map(|x| x.n).collect(),
    })
}

fn refined_interval(start: &State, f: f64, s: f64, runner: &Runner, h: f64) -> State {
    let tau = runner.params.tau;
    let subs = (h / (0.5 * tau)).ceil().max(1.0) as usize;
    let dt = h / subs as f64;
    let v_inf = f * tau;
    let decay = (-dt / tau).exp();
    let mut x = *start;
    for _ in 0..subs {
        let r = rates(&x, f, s, runner);
        let v_next = v_inf + (x.v - v_inf) * decay;
        x = State {
            v: v_next,
            ef: x.ef + dt * r.ef,
            eg: x.eg + dt * r.eg,
            n: x.n + dt * r.n,
        };
    }
    x
}

/// States consistent with the recurrences when the velocity sequence is
/// prescribed; the force on each interval is recovered from the velocity step.
///
/// `v_next[k]` is the velocity at node `k+1`. Unlike re-simulating a force
/// array, this stays accurate when `h > 2τ`.
pub fn trajectory_from_velocity(
    runner: &Runner,
    mesh: &Mesh,
    s: &[f64],
    v_next: &[f64],
) -> Result<Trajectory> {
    let m = mesh.n_nodes();
    check_len("velocity", m - 1, v_next.len())?;
    check_len("nutrition source", m - 1, s.len())?;
    let h = mesh.h();
    let inv_tau = runner.params.inv_tau();
    let mut v = Vec::with_capacity(m);
    v.push(0.0);
    v.extend_from_slice(v_next);
    let f: Vec<f64> = (0..m - 1)
        .map(|k| (v[k + 1] - v[k]) / h + v[k] * inv_tau)
        .collect();
    let mut x = State::initial(runner);
    let mut ef = vec![x.ef];
    let mut eg = vec![x.eg];
    let mut n = vec![x.n];
    for k in 0..m - 1 {
        let step = euler_step(&x, f[k], s[k], runner, h);
        x = State { v: v[k + 1], ..step };
        ef.push(x.ef);
        eg.push(x.eg);
        n.push(x.n);
    }
    Ok(Trajectory {
        mesh: *mesh,
        f,
        v,
        ef,
        eg,
        n,
    })
}

/// Per-step residual of `Δ(E_F + E_G)/h = c₃c₄N_k − a·sm·f_k·V_k`.
pub fn energy_audit(traj: &Trajectory, runner: &Runner) -> Vec<f64> {
    let p = &runner.params;
    let h = traj.mesh.h();
    (0..traj.mesh.n_nodes() - 1)
        .map(|k| {
            let delta = (traj.ef[k + 1] + traj.eg[k + 1]) - (traj.ef[k] + traj.eg[k]);
            let rate = p.c3() * p.c4 * traj.n[k] - p.work_scale() * traj.f[k] * traj.v[k];
            delta / h - rate
        })
        .collect()
}

/// Left-rectangle distance `h·Σ_{k<M−1} V_k`, in km.
pub fn distance(traj: &Trajectory) -> f64 {
    let m = traj.mesh.n_nodes();
    traj.mesh.h() * traj.v[..m - 1].iter().sum::<f64>() / 1000.0
}
