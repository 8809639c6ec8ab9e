//! Reduced single-shooting formulation: states are eliminated through the
//! recurrences and only the control remains.
//!
//! [`shooting_gradient`] works in force space with a backward discrete adjoint.
//! [`shooting_optimize`] optimizes over the velocity sequence instead, because
//! with `h/τ = 60` the force-to-velocity map amplifies perturbations by a
//! factor of 59 per step and plain force-space descent cannot make progress.
//! Both use the same penalized objective
//! `−h·Σ V_k + μ·Σ max(−E_G,k, 0)²`.

use crate::bioenergetics::{distance, simulate, trajectory_from_velocity, Mesh, SimMode, Trajectory};
use crate::error::{ModelError, Result};
use crate::nutrition::{pulse_profile, NutritionStrategy};
use crate::params::Runner;

/// Penalized reduced objective and its gradient with respect to the forces.
pub fn shooting_gradient(
    f: &[f64],
    strategy: &NutritionStrategy,
    runner: &Runner,
    mesh: &Mesh,
    mu: f64,
) -> Result<(f64, Vec<f64>)> {
    let traj = simulate(runner, strategy, mesh, f, SimMode::Transcription)?;
    Ok(penalized_gradient(&traj, runner, mu))
}

fn penalized_gradient(traj: &Trajectory, runner: &Runner, mu: f64) -> (f64, Vec<f64>) {
    let p = &runner.params;
    let mesh = &traj.mesh;
    let m = mesh.n_nodes();
    let h = mesh.h();
    let w = p.work_scale();
    let short = |e: f64| (-e).max(0.0);

    let value = -h * traj.v[..m - 1].iter().sum::<f64>()
        + mu * traj.eg.iter().map(|&e| short(e).powi(2)).sum::<f64>();

    let mut grad = vec![0.0; m - 1];
    let mut a_v = 0.0;
    let mut a_g = -2.0 * mu * short(traj.eg[m - 1]);
    for k in (0..m - 1).rev() {
        let v = traj.v[k];
        let f = traj.f[k];
        let (g, dg, _) = runner.glyc_v(v);
        grad[k] = h * a_v - h * w * v * g * a_g;
        let dr = g + v * dg;
        a_v = -h + a_v * (1.0 - h * p.inv_tau()) - a_g * h * w * f * dr;
        a_g += -2.0 * mu * short(traj.eg[k]);
    }
    (value, grad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingConfig {
    /// Penalty weights applied in turn, each stage warm-started from the last.
    pub mu_schedule: Vec<f64>,
    pub max_iter_per_stage: usize,
    /// Stop a stage once the scaled projected gradient falls below this.
    pub tol: f64,
    /// Constant starting velocity, m/min.
    pub start_velocity: Option<f64>,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            mu_schedule: vec![1e0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6],
            max_iter_per_stage: 20_000,
            tol: 1e-7,
            start_velocity: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShootingStatus {
    Converged,
    MaxIter,
    Diverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingResult {
    /// Forces recovered from the optimized velocities.
    pub f: Vec<f64>,
    /// States consistent with the recurrences for the optimized velocities.
    pub trajectory: Trajectory,
    pub distance_km: f64,
    pub iterations: usize,
    pub status: ShootingStatus,
    /// Most negative glycogen value on the final trajectory.
    pub min_glycogen: f64,
}

struct Reduced<'a> {
    runner: &'a Runner,
    mesh: &'a Mesh,
    /// Cumulative glycogen inflow up to each node, kJ/kg.
    inflow: Vec<f64>,
    mu: f64,
}

impl<'a> Reduced<'a> {
    fn new(runner: &'a Runner, mesh: &'a Mesh, s: &'a [f64]) -> Self {
        let p = &runner.params;
        let h = mesh.h();
        let m = mesh.n_nodes();
        let mut n = 0.0;
        let mut acc = 0.0;
        let mut inflow = Vec::with_capacity(m);
        inflow.push(0.0);
        for &sk in s.iter().take(m - 1) {
            acc += h * p.c3() * p.c4 * n;
            n += h * (sk - (p.d + p.c4) * n);
            inflow.push(acc);
        }
        Self {
            runner,
            mesh,
            inflow,
            mu: 1.0,
        }
    }

    /// Objective and gradient with respect to `u = (V_1, …, V_{M−1})`.
    fn eval(&self, u: &[f64], want_grad: bool) -> (f64, Vec<f64>) {
        let p = &self.runner.params;
        let h = self.mesh.h();
        let m = self.mesh.n_nodes();
        let w = p.work_scale();
        let inv_tau = p.inv_tau();
        let vel = |k: usize| if k == 0 { 0.0 } else { u[k - 1] };

        let mut value = -h * u[..m - 2].iter().sum::<f64>();
        let mut burned = 0.0;
        let mut deficit = vec![0.0; m];
        let mut fpen = vec![0.0; m - 1];
        let mut gval = vec![(0.0, 0.0); m - 1];
        for k in 0..m - 1 {
            let v = vel(k);
            let f = (vel(k + 1) - v) / h + v * inv_tau;
            let (g, dg, _) = self.runner.glyc_v(v);
            gval[k] = (g, dg);
            burned += h * w * f * v * g;
            let eg = p.eg0 + self.inflow[k + 1] - burned;
            deficit[k + 1] = (-eg).max(0.0);
            value += self.mu * deficit[k + 1].powi(2);
            let over = (f - p.f_max).max(0.0) - (-f).max(0.0);
            fpen[k] = over;
            value += self.mu * (over * p.tau).powi(2);
        }
        if !want_grad {
            return (value, Vec::new());
        }
        // sensitivity of the penalty to the work done on step j
        let mut tail = vec![0.0; m];
        for k in (0..m - 1).rev() {
            tail[k] = tail[k + 1] + deficit[k + 1];
        }
        let mut grad = vec![0.0; m - 1];
        for j in 1..m {
            let mut gj = if j <= m - 2 { -h } else { 0.0 };
            let v = vel(j);
            // step j - 1: f_{j-1} depends on V_j through the difference quotient
            {
                let vp = vel(j - 1);
                let (g, _) = gval[j - 1];
                let dwork = w * vp * g;
                gj += 2.0 * self.mu * tail[j - 1] * dwork;
                gj += 2.0 * self.mu * p.tau * p.tau * fpen[j - 1] / h;
            }
            if j < m - 1 {
                let f = (vel(j + 1) - v) / h + v * inv_tau;
                let (g, dg) = gval[j];
                let dfdv = -1.0 / h + inv_tau;
                let dwork = h * w * (f * (g + v * dg) + dfdv * v * g);
                gj += 2.0 * self.mu * tail[j] * dwork;
                gj += 2.0 * self.mu * p.tau * p.tau * fpen[j] * dfdv;
            }
            grad[j - 1] = gj;
        }
        (value, grad)
    }
}

/// Independent optimizer for the same instance as the NLP: spectral projected
/// gradient over the velocity sequence with an increasing glycogen penalty.
/// There is no TV term.
pub fn shooting_optimize(
    strategy: &NutritionStrategy,
    runner: &Runner,
    mesh: &Mesh,
    cfg: &ShootingConfig,
) -> Result<ShootingResult> {
    if cfg.mu_schedule.is_empty() || cfg.mu_schedule.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
        return Err(ModelError::InvalidParam {
            name: "mu_schedule",
            reason: "needs at least one positive finite weight".into(),
        });
    }
    let m = mesh.n_nodes();
    if m < 3 {
        return Err(ModelError::InvalidMesh("shooting needs at least 3 nodes".into()));
    }
    let s = pulse_profile(strategy, mesh)?;
    let p = &runner.params;
    let scale = p.v_max();
    let start = cfg.start_velocity.unwrap_or(0.75 * p.vvo2max).clamp(0.0, scale);
    let mut x = vec![start / scale; m - 1];
    let mut red = Reduced::new(runner, mesh, &s);
    let mut iterations = 0;
    let mut status = ShootingStatus::Converged;

    let eval = |red: &Reduced, x: &[f64]| -> (f64, Vec<f64>) {
        let u: Vec<f64> = x.iter().map(|v| v * scale).collect();
        let (val, g) = red.eval(&u, true);
        (val, g.into_iter().map(|gi| gi * scale).collect())
    };
    let value_only = |red: &Reduced, x: &[f64]| -> f64 {
        let u: Vec<f64> = x.iter().map(|v| v * scale).collect();
        red.eval(&u, false).0
    };
    let proj = |v: f64| v.clamp(0.0, 1.0);
    let gscale = mesh.h() * scale;

    for &mu in &cfg.mu_schedule {
        red.mu = mu;
        let (mut fx, mut g) = eval(&red, &x);
        let mut hist = vec![fx; 1];
        let mut alpha = 1.0 / gscale;
        let mut stage_converged = false;
        for _ in 0..cfg.max_iter_per_stage {
            let pg = x
                .iter()
                .zip(&g)
                .map(|(xi, gi)| (proj(xi - gi) - xi).abs())
                .fold(0.0, f64::max);
            if !pg.is_finite() || !fx.is_finite() {
                status = ShootingStatus::Diverged;
                break;
            }
            if pg <= cfg.tol {
                stage_converged = true;
                break;
            }
            iterations += 1;
            let d: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| proj(xi - alpha * gi) - xi).collect();
            let gd: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            let fmax = hist.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + lambda * di).collect();
                let ft = value_only(&red, &trial);
                if ft <= fmax + 1e-4 * lambda * gd {
                    accepted = Some(trial);
                    break;
                }
                lambda *= 0.5;
            }
            let Some(trial) = accepted else {
                stage_converged = true;
                break;
            };
            let (ft, gt) = eval(&red, &trial);
            let sv: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
            let yv: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy: f64 = sv.iter().zip(&yv).map(|(a, b)| a * b).sum();
            let ss: f64 = sv.iter().map(|a| a * a).sum();
            alpha = if sy > 0.0 { (ss / sy).clamp(1e-12, 1e12) } else { 1e12f64.min(10.0 * alpha) };
            x = trial;
            fx = ft;
            g = gt;
            hist.push(fx);
            if hist.len() > 10 {
                hist.remove(0);
            }
        }
        if status == ShootingStatus::Diverged {
            break;
        }
        if !stage_converged {
            status = ShootingStatus::MaxIter;
        }
    }

    let u: Vec<f64> = x.iter().map(|v| v * scale).collect();
    let trajectory = trajectory_from_velocity(runner, mesh, &s, &u)?;
    let f = trajectory.f.iter().map(|f| f.clamp(0.0, p.f_max)).collect();
    Ok(ShootingResult {
        f,
        distance_km: distance(&trajectory),
        min_glycogen: trajectory.eg.iter().cloned().fold(f64::INFINITY, f64::min),
        trajectory,
        iterations,
        status,
    })
}
