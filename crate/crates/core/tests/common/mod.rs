#![allow(dead_code)]

use pacing_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Toy instances on a 4-node mesh. `h/τ = 0.5` and small force bounds keep
/// the grid meaningful; the glycogen store ranges from binding to slack.
pub fn toy_problems() -> Vec<NlpProblem> {
    let mut out = Vec::new();
    for (eg0, gel) in [(0.02, 0.0), (0.05, 0.0), (0.05, 20.0), (0.2, 0.0), (5.0, 0.0)] {
        for tv in [0.0, 0.5, 2.0] {
            let params = RunnerParams {
                tau: 2.0,
                f_max: 600.0,
                eg0,
                ..RunnerParams::world_record()
            };
            let runner = Runner::new(params).unwrap();
            let strat = if gel > 0.0 {
                NutritionStrategy::new("gel", vec![GelEvent { time: 1.0, energy: gel }]).unwrap()
            } else {
                NutritionStrategy::none()
            };
            let mesh = Mesh::new(3.0, 4).unwrap();
            out.push(assemble(&runner, &strat, &mesh, tv).unwrap());
        }
    }
    out
}

/// Best objective over forces drawn from `levels` per interval, among
/// simulated trajectories that respect every bound. `None` if no grid point
/// is feasible.
pub fn brute_force(prob: &NlpProblem, levels: &[f64]) -> Option<(f64, Vec<f64>)> {
    let m = prob.mesh.n_nodes();
    let n = m - 1;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx = vec![0usize; n];
    loop {
        let f: Vec<f64> = idx.iter().map(|&i| levels[i]).collect();
        let traj = simulate(&prob.runner, &prob.strategy, &prob.mesh, &f, SimMode::Transcription).unwrap();
        let x = prob.pack_canonical(&traj).unwrap();
        if prob.bound_violation(&x) == 0.0 {
            let j = prob.objective(&x);
            if best.as_ref().map_or(true, |b| j < b.0) {
                best = Some((j, f));
            }
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return best;
            }
            idx[pos] += 1;
            if idx[pos] < levels.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

pub fn three_levels(prob: &NlpProblem) -> [f64; 3] {
    let f_max = prob.runner.params.f_max;
    [0.0, 0.5 * f_max, f_max]
}

/// Natural cubic spline from a dense Gaussian elimination over all knot
/// second derivatives, including the two end conditions.
pub struct DenseSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl DenseSpline {
    pub fn new(knots: &[(f64, f64)]) -> Self {
        let n = knots.len();
        let x: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let y: Vec<f64> = knots.iter().map(|k| k.1).collect();
        let mut a = vec![vec![0.0; n + 1]; n];
        a[0][0] = 1.0;
        a[n - 1][n - 1] = 1.0;
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            a[i][i - 1] = h0;
            a[i][i] = 2.0 * (h0 + h1);
            a[i][i + 1] = h1;
            a[i][n] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        }
        for col in 0..n {
            let piv = (col..n).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs())).unwrap();
            a.swap(col, piv);
            for r in 0..n {
                if r != col {
                    let w = a[r][col] / a[col][col];
                    for c in col..=n {
                        a[r][c] -= w * a[col][c];
                    }
                }
            }
        }
        let m = (0..n).map(|i| a[i][n] / a[i][i]).collect();
        Self { x, y, m }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.x.windows(2).position(|w| t <= w[1]).unwrap_or(self.x.len() - 2);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let h = x1 - x0;
        let (a, b) = ((x1 - t) / h, (t - x0) / h);
        a * self.y[i] + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}


pub fn world_record_strategy_within(t: f64) -> NutritionStrategy {
    let ev = world_record_strategy().events().iter().copied().filter(|e| e.time <= t).collect();
    NutritionStrategy::new("wr_short", ev).unwrap()
}

/// Worst relative gap between the analytic constraint Jacobian and central
/// differences at a random point, per horizon.
pub fn jacobian_fd_worst(seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let runner = Runner::world_record();
    let p = &runner.params;
    let mut out = Vec::new();
    for (t, strat) in [(12.0, world_record_strategy_within(12.0)), (120.0, world_record_strategy())] {
        let mesh = Mesh::minutes(t).unwrap();
        let prob = assemble(&runner, &strat, &mesh, 0.5).unwrap();
        let l = &prob.layout;
        let m = l.n_nodes();
        let mut x = vec![0.0; prob.dim()];
        for k in 0..m {
            // stay clear of the clamp kinks at V = 0 and V = VVO2max
            x[l.v(k)] = rng.gen_range(5.0..0.95 * p.vvo2max);
            x[l.ef(k)] = rng.gen_range(0.0..p.ef0);
            x[l.eg(k)] = rng.gen_range(-5.0..p.eg0);
            x[l.n(k)] = rng.gen_range(0.0..900.0);
        }
        for k in 0..m - 1 {
            x[l.f(k)] = rng.gen_range(0.0..p.f_max);
        }
        let jac = prob.jacobian_dense(&x).unwrap();
        let mut worst: f64 = 0.0;
        for j in 0..prob.dim() {
            let step = 1e-5 * x[j].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += step;
            xm[j] -= step;
            let cp = prob.residuals(&xp).unwrap();
            let cm = prob.residuals(&xm).unwrap();
            for r in 0..prob.n_rows() {
                let fd = (cp[r] - cm[r]) / (2.0 * step);
                worst = worst.max((fd - jac[r][j]).abs() / jac[r][j].abs().max(1.0));
            }
        }
        out.push((t, worst));
    }
    out
}

/// Worst relative gap between `shooting_gradient` directional derivatives
/// and central differences over `points` random force profiles, half of
/// them with an active glycogen penalty.
pub fn shooting_fd_worst(seed: u64, points: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = RunnerParams { eg0: 0.02, ..RunnerParams::world_record() };
    let runner = Runner::new(params.clone()).unwrap();
    // h < τ keeps the force-to-velocity map well conditioned
    let mesh = Mesh::new(2.0, 241).unwrap();
    let strat = NutritionStrategy::new("one", vec![GelEvent { time: 1.0, energy: 5.0 }]).unwrap();
    let mut worst: f64 = 0.0;
    for point in 0..points {
        let mu = if point % 2 == 0 { 0.0 } else { 50.0 };
        let f: Vec<f64> = (0..240).map(|_| rng.gen_range(0.1..0.6) * params.f_max).collect();
        let dir: Vec<f64> = (0..240).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (_, g) = shooting_gradient(&f, &strat, &runner, &mesh, mu).unwrap();
        let analytic: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
        let at = |s: f64| {
            let x: Vec<f64> = f.iter().zip(&dir).map(|(a, b)| a + s * b).collect();
            shooting_gradient(&x, &strat, &runner, &mesh, mu).unwrap().0
        };
        let fd = (at(1.0) - at(-1.0)) / 2.0;
        worst = worst.max((fd - analytic).abs() / analytic.abs());
    }
    worst
}

/// Largest audit residual relative to the magnitude of the terms it balances.
pub fn audit_relative(traj: &Trajectory, runner: &Runner) -> f64 {
    let p = &runner.params;
    let h = traj.mesh.h();
    energy_audit(traj, runner)
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let level = (traj.ef[k].abs() + traj.eg[k].abs()) / h
                + p.c3() * p.c4 * traj.n[k]
                + p.work_scale() * traj.f[k] * traj.v[k].abs();
            r.abs() / level.max(1.0)
        })
        .fold(0.0, f64::max)
}
