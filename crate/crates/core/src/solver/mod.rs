//! Augmented-Lagrangian solver for the transcribed problem, plus a reduced
//! single-shooting optimizer used as an independent check.
//!
//! The outer loop updates equality multipliers and the penalty weight with the
//! usual feasibility/optimality targets. Each subproblem is a box-constrained
//! minimization solved by projected Newton: the exact augmented-Lagrangian
//! Hessian is banded once variables are ordered node by node, so each step is
//! a damped banded Cholesky solve on the free variables followed by a
//! projected Armijo backtrack. Everything runs in scaled variables.

mod band;
pub mod shooting;

use std::fmt;

use band::BandMatrix;

use crate::bioenergetics::{distance, trajectory_from_velocity, Trajectory};
use crate::error::{ModelError, Result};
use crate::transcription::{tv_split, Block, NlpProblem, RowKind};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_outer: usize,
    pub max_inner: usize,
    /// Scaled ∞-norm of the equality residuals.
    pub tol_c: f64,
    /// Scaled ∞-norm of the projected Lagrangian gradient.
    pub tol_o: f64,
    pub rho_init: f64,
    pub rho_max: f64,
    pub rho_growth: f64,
    /// Consecutive outer iterations without a 10% drop in violation before
    /// the problem is declared infeasible.
    pub stall_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_outer: 60,
            max_inner: 300,
            tol_c: 1e-6,
            tol_o: 1e-4,
            rho_init: 10.0,
            rho_max: 1e8,
            rho_growth: 10.0,
            stall_limit: 5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tol_c", self.tol_c),
            ("tol_o", self.tol_o),
            ("rho_init", self.rho_init),
            ("rho_max", self.rho_max),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::InvalidParam {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        if !(self.rho_growth > 1.0) {
            return Err(ModelError::InvalidParam {
                name: "rho_growth",
                reason: format!("must exceed 1, got {}", self.rho_growth),
            });
        }
        if self.max_outer == 0 || self.max_inner == 0 || self.stall_limit == 0 {
            return Err(ModelError::InvalidParam {
                name: "iterations",
                reason: "iteration limits must be positive".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub x: Vec<f64>,
    pub objective: f64,
    pub distance_km: f64,
    /// Scaled ∞-norm of the equality residuals.
    pub violation: f64,
    /// Scaled ∞-norm of the projected Lagrangian gradient.
    pub pg_norm: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub status: SolveStatus,
    /// Equality multipliers in original units, one per row, for the
    /// Lagrangian `J + Σ y_r c_r`.
    pub multipliers: Vec<f64>,
    /// Violation after each outer iteration.
    pub violation_history: Vec<f64>,
}

impl SolverReport {
    pub fn summary_line(&self) -> String {
        format!(
            "status={} distance_km={:.4} violation={:.3e} pg={:.3e} outer={} inner={}",
            self.status,
            self.distance_km,
            self.violation,
            self.pg_norm,
            self.outer_iterations,
            self.inner_iterations
        )
    }

    pub fn trajectory(&self, prob: &NlpProblem) -> Result<Trajectory> {
        Ok(prob.unpack(&self.x)?.0)
    }
}

struct Scaling {
    var: Vec<f64>,
    row: Vec<f64>,
    obj: f64,
}

impl Scaling {
    fn new(prob: &NlpProblem) -> Self {
        let p = &prob.runner.params;
        let l = &prob.layout;
        let h = prob.mesh.h();
        let ef = p.ef0.max(1.0);
        let eg = prob.upper[l.eg(1)].max(1.0);
        let nut = prob.s.iter().fold(0.0f64, |a, &s| a.max(s * h)).max(1.0);
        let var = (0..prob.dim())
            .map(|i| match l.locate(i).0 {
                Block::Force | Block::Zeta | Block::Iota => p.f_max,
                Block::Velocity => p.v_max(),
                Block::Fat => ef,
                Block::Glycogen => eg,
                Block::Nutrition => nut,
            })
            .collect();
        let row = (0..prob.n_rows())
            .map(|r| match prob.row_kind(r) {
                RowKind::Velocity => p.v_max(),
                RowKind::Fat => ef,
                RowKind::Glycogen => eg,
                RowKind::Nutrition => nut,
                RowKind::TotalVariation => p.f_max,
            })
            .collect();
        Self {
            var,
            row,
            obj: h * p.v_max(),
        }
    }

    fn unscale(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().zip(&self.var).map(|(a, b)| a * b).collect()
    }
}

/// Node-interleaved ordering that makes the Hessian banded.
fn banded_order(prob: &NlpProblem) -> (Vec<usize>, usize) {
    let l = &prob.layout;
    let m = l.n_nodes();
    let mut order = Vec::with_capacity(prob.dim());
    for k in 0..m {
        if k + 1 < m {
            order.push(l.f(k));
        }
        if k + 2 < m {
            order.push(l.zeta(k));
            order.push(l.iota(k));
        }
        order.extend([l.v(k), l.ef(k), l.eg(k), l.n(k)]);
    }
    let mut perm = vec![0; prob.dim()];
    for (pos, &i) in order.iter().enumerate() {
        perm[i] = pos;
    }
    let x = vec![0.0; prob.dim()];
    let mut bw = 0;
    let mut row_lo = vec![usize::MAX; prob.n_rows()];
    let mut row_hi = vec![0; prob.n_rows()];
    prob.jacobian_visit(&x, |r, c, _| {
        row_lo[r] = row_lo[r].min(perm[c]);
        row_hi[r] = row_hi[r].max(perm[c]);
    });
    for (lo, hi) in row_lo.iter().zip(&row_hi) {
        bw = bw.max(hi - lo);
    }
    (perm, bw)
}

struct AugLag<'a> {
    prob: &'a NlpProblem,
    sc: Scaling,
    perm: Vec<usize>,
    bw: usize,
    /// Scaled multipliers.
    y: Vec<f64>,
    rho: f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
    jac: Vec<(usize, usize, f64)>,
}

impl<'a> AugLag<'a> {
    fn new(prob: &'a NlpProblem, rho: f64) -> Self {
        let sc = Scaling::new(prob);
        let (perm, bw) = banded_order(prob);
        let lo = prob.lower.iter().zip(&sc.var).map(|(a, b)| a / b).collect();
        let hi = prob.upper.iter().zip(&sc.var).map(|(a, b)| a / b).collect();
        Self {
            prob,
            y: vec![0.0; prob.n_rows()],
            sc,
            perm,
            bw,
            rho,
            lo,
            hi,
            jac: Vec::new(),
        }
    }

    fn scaled_residuals(&self, x: &[f64]) -> Vec<f64> {
        let mut c = vec![0.0; self.prob.n_rows()];
        self.prob.residuals_into(x, &mut c);
        for (ci, s) in c.iter_mut().zip(&self.sc.row) {
            *ci /= s;
        }
        c
    }

    fn value(&self, xs: &[f64]) -> f64 {
        let x = self.sc.unscale(xs);
        let c = self.scaled_residuals(&x);
        let pen: f64 = c
            .iter()
            .zip(&self.y)
            .map(|(ci, yi)| yi * ci + 0.5 * self.rho * ci * ci)
            .sum();
        self.prob.objective(&x) / self.sc.obj + pen
    }

    /// Value, gradient and scaled residuals; caches the Jacobian for the Hessian.
    fn value_grad(&mut self, xs: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let x = self.sc.unscale(xs);
        let c = self.scaled_residuals(&x);
        let (obj, grad_obj) = self.prob.objective_eval(&x).expect("dimension checked");
        let mut grad: Vec<f64> = grad_obj
            .iter()
            .zip(&self.sc.var)
            .map(|(g, d)| g * d / self.sc.obj)
            .collect();
        self.jac.clear();
        let jac = &mut self.jac;
        self.prob.jacobian_visit(&x, |r, col, v| jac.push((r, col, v)));
        for &(r, col, v) in &self.jac {
            let js = v * self.sc.var[col] / self.sc.row[r];
            grad[col] += js * (self.y[r] + self.rho * c[r]);
        }
        let pen: f64 = c
            .iter()
            .zip(&self.y)
            .map(|(ci, yi)| yi * ci + 0.5 * self.rho * ci * ci)
            .sum();
        (obj / self.sc.obj + pen, grad, c)
    }

    /// Exact Hessian in the banded ordering; uses the Jacobian cached by the
    /// last `value_grad` call at the same point.
    ///
    /// With `reduced` set, TV rows whose split is nonzero are left out: once
    /// the split is eliminated those rows are flat in the forces.
    fn hessian(&self, xs: &[f64], c: &[f64], out: &mut BandMatrix, reduced: bool) {
        out.clear();
        let l = &self.prob.layout;
        let tv0 = 4 * (l.n_nodes() - 1);
        let mut start = 0;
        while start < self.jac.len() {
            let r = self.jac[start].0;
            let mut end = start;
            while end < self.jac.len() && self.jac[end].0 == r {
                end += 1;
            }
            if reduced && r >= tv0 {
                let k = r - tv0;
                if xs[l.zeta(k)] > 0.0 || xs[l.iota(k)] > 0.0 {
                    start = end;
                    continue;
                }
            }
            let row = &self.jac[start..end];
            for a in row {
                let ja = a.2 * self.sc.var[a.1] / self.sc.row[r];
                let pa = self.perm[a.1];
                for b in row {
                    let pb = self.perm[b.1];
                    if pb <= pa {
                        let jb = b.2 * self.sc.var[b.1] / self.sc.row[r];
                        out.add(pa, pb, self.rho * ja * jb);
                    }
                }
            }
            start = end;
        }
        let x = self.sc.unscale(xs);
        let weights: Vec<f64> = (0..c.len())
            .map(|r| (self.y[r] + self.rho * c[r]) / self.sc.row[r])
            .collect();
        self.prob.constraint_hessian_visit(&x, &weights, |i, j, v| {
            out.add(self.perm[i], self.perm[j], v * self.sc.var[i] * self.sc.var[j]);
        });
    }

    /// Set every `(ζ_k, ι_k)` to the minimizer of the subproblem with the
    /// forces held fixed. Each pair is a one-dimensional convex problem in
    /// `u = ζ − ι` with cost `p·|u|` plus the row's penalty terms.
    fn fit_split(&self, xs: &mut [f64]) {
        let l = &self.prob.layout;
        let m = l.n_nodes();
        let tv0 = 4 * (m - 1);
        let fs = self.sc.var[l.f(0)];
        for k in 0..m - 2 {
            let r = tv0 + k;
            let s = self.sc.row[r];
            let delta = (xs[l.f(k)] - xs[l.f(k + 1)]) * fs;
            let a = self.prob.tv_weight * s / self.sc.obj;
            let y = self.y[r];
            let up = s * (-y - a) / self.rho - delta;
            let down = s * (a - y) / self.rho - delta;
            let u = if up > 0.0 {
                up
            } else if down < 0.0 {
                down
            } else {
                0.0
            };
            xs[l.zeta(k)] = u.max(0.0) / self.sc.var[l.zeta(k)];
            xs[l.iota(k)] = (-u).max(0.0) / self.sc.var[l.iota(k)];
        }
    }

    fn is_split(&self, i: usize) -> bool {
        matches!(self.prob.layout.locate(i).0, Block::Zeta | Block::Iota)
    }

    fn project(&self, xs: &mut [f64]) {
        for ((v, &lo), &hi) in xs.iter_mut().zip(&self.lo).zip(&self.hi) {
            *v = v.clamp(lo, hi);
        }
    }

    fn projected_gradient_norm(&self, xs: &[f64], g: &[f64]) -> f64 {
        (0..xs.len())
            .map(|i| (xs[i] - (xs[i] - g[i]).clamp(self.lo[i], self.hi[i])).abs())
            .fold(0.0, f64::max)
    }

    /// Projected-gradient point `P(x − t·g)` with an Armijo backtrack on `t`.
    /// Split variables are refitted rather than moved.
    fn cauchy_point(&self, xs: &[f64], g: &[f64], phi: f64, split: &[bool], t: &mut f64) -> Option<(Vec<f64>, f64)> {
        let n = xs.len();
        for _ in 0..60 {
            let mut trial: Vec<f64> = (0..n)
                .map(|i| if split[i] { xs[i] } else { xs[i] - *t * g[i] })
                .collect();
            self.project(&mut trial);
            self.fit_split(&mut trial);
            let decrease: f64 = (0..n)
                .filter(|&i| !split[i])
                .map(|i| g[i] * (trial[i] - xs[i]))
                .sum();
            if decrease < 0.0 {
                let value = self.value(&trial);
                if value <= phi + 1e-4 * decrease {
                    return Some((trial, value));
                }
            }
            *t *= 0.5;
        }
        None
    }

    /// Projected Newton on the current subproblem. Returns the iteration count
    /// and the final projected-gradient norm.
    ///
    /// Each iteration first takes a projected-gradient (Cauchy) step, then a
    /// damped Newton step in the variables left off their bounds by it. Reading
    /// the active set off the Cauchy point keeps states that sit a hair inside
    /// a bound from flipping in and out of the active set.
    fn minimize(&mut self, xs: &mut Vec<f64>, omega: f64, max_iter: usize, damping: &mut f64) -> (usize, f64) {
        let n = xs.len();
        let mut band = BandMatrix::zeros(n, self.bw);
        let split: Vec<bool> = (0..n).map(|i| self.is_split(i)).collect();
        let mut iters = 0;
        let mut t: f64 = 1.0;
        self.fit_split(xs);
        let (mut phi, mut g, _) = self.value_grad(xs);
        let mut pg = self.projected_gradient_norm(xs, &g);
        while iters < max_iter && pg > omega {
            iters += 1;
            t = (t * 4.0).min(1e6);
            let Some((xc, phi_c)) = self.cauchy_point(xs, &g, phi, &split, &mut t) else {
                break;
            };
            let (_, gc, cc) = self.value_grad(&xc);
            let active: Vec<bool> = (0..n)
                .map(|i| split[i] || xc[i] <= self.lo[i] || xc[i] >= self.hi[i])
                .collect();
            self.hessian(&xc, &cc, &mut band, true);
            for i in 0..n {
                if active[i] {
                    band.isolate(self.perm[i]);
                }
            }
            let mut next = None;
            for _attempt in 0..12 {
                let mut h = band.clone();
                for i in 0..n {
                    if !active[i] {
                        h.add_diag(self.perm[i], *damping);
                    }
                }
                let Some(chol) = h.cholesky() else {
                    *damping = (*damping * 10.0).max(1e-12);
                    continue;
                };
                let mut rhs = vec![0.0; n];
                for i in 0..n {
                    if !active[i] {
                        rhs[self.perm[i]] = -gc[i];
                    }
                }
                let sol = chol.solve(&rhs);
                let d: Vec<f64> = (0..n).map(|i| if active[i] { 0.0 } else { sol[self.perm[i]] }).collect();

                let mut alpha = 1.0;
                for _ in 0..30 {
                    let mut trial: Vec<f64> = xc.iter().zip(&d).map(|(x, d)| x + alpha * d).collect();
                    self.project(&mut trial);
                    self.fit_split(&mut trial);
                    let decrease: f64 = (0..n)
                        .filter(|&i| !split[i])
                        .map(|i| gc[i] * (trial[i] - xc[i]))
                        .sum();
                    if decrease < 0.0 {
                        let value = self.value(&trial);
                        if value <= phi_c + 1e-4 * decrease {
                            next = Some(trial);
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
                if next.is_some() {
                    *damping = if alpha == 1.0 {
                        (*damping * 0.25).max(1e-14)
                    } else {
                        (*damping * 2.0).min(1.0)
                    };
                    break;
                }
                *damping = (*damping * 10.0).clamp(1e-10, 1e6);
            }
            *xs = next.unwrap_or(xc);
            let (value, grad, _) = self.value_grad(xs);
            phi = value;
            g = grad;
            pg = self.projected_gradient_norm(xs, &g);
        }
        (iters, pg)
    }
}

/// Solve the NLP from `x0` (clipped into the bounds).
pub fn solve(prob: &NlpProblem, x0: &[f64], cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    crate::bioenergetics::check_len("initial point", prob.dim(), x0.len())?;
    let mut al = AugLag::new(prob, cfg.rho_init);
    let mut xs: Vec<f64> = x0.iter().zip(&al.sc.var).map(|(a, b)| a / b).collect();
    al.project(&mut xs);

    let mut omega = 1e-2;
    let mut damping = 1e-8;
    let mut history = Vec::new();
    let mut best = f64::INFINITY;
    let mut previous = f64::INFINITY;
    let mut stalled = 0;
    let mut inner_total = 0;
    let mut status = SolveStatus::MaxIter;
    let mut violation = f64::INFINITY;
    let mut pg = f64::INFINITY;
    let mut outer = 0;

    while outer < cfg.max_outer {
        outer += 1;
        let (iters, ipg) = al.minimize(&mut xs, omega, cfg.max_inner, &mut damping);
        inner_total += iters;
        let x = al.sc.unscale(&xs);
        let c = al.scaled_residuals(&x);
        violation = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        history.push(violation);
        // gradient of the Lagrangian at the updated multipliers equals the
        // subproblem gradient at the old ones
        pg = ipg;
        for (y, ci) in al.y.iter_mut().zip(&c) {
            *y += al.rho * ci;
        }
        if violation <= cfg.tol_c && pg <= cfg.tol_o {
            status = SolveStatus::Converged;
            break;
        }
        if violation > 0.25 * previous && violation > cfg.tol_c {
            al.rho = (al.rho * cfg.rho_growth).min(cfg.rho_max);
        }
        previous = violation;
        omega = (omega * 0.1).max(0.1 * cfg.tol_o);

        if violation > cfg.tol_c && violation > 0.9 * best {
            stalled += 1;
        } else {
            stalled = 0;
        }
        best = best.min(violation);
        if stalled >= cfg.stall_limit {
            status = SolveStatus::Infeasible;
            break;
        }
    }

    let x = al.sc.unscale(&xs);
    let traj = prob.unpack(&x)?.0;
    let multipliers = al
        .y
        .iter()
        .zip(&al.sc.row)
        .map(|(y, s)| y * al.sc.obj / s)
        .collect();
    Ok(SolverReport {
        objective: prob.objective(&x),
        distance_km: distance(&traj),
        x,
        violation,
        pg_norm: pg,
        outer_iterations: outer,
        inner_iterations: inner_total,
        status,
        multipliers,
        violation_history: history,
    })
}

/// Even-pace starting point: the runner jumps to a constant velocity in the
/// first step and holds it, at the fastest pace for which glycogen stays
/// non-negative throughout.
pub fn constant_pace_start(prob: &NlpProblem) -> Result<Vec<f64>> {
    let p = &prob.runner.params;
    let m = prob.mesh.n_nodes();
    let h = prob.mesh.h();
    let build = |pace: f64| trajectory_from_velocity(&prob.runner, &prob.mesh, &prob.s, &vec![pace; m - 1]);
    let feasible = |t: &Trajectory| t.eg.iter().all(|&e| e >= 0.0) && t.ef.iter().all(|&e| e >= 0.0);
    let mut lo = 0.0;
    let mut hi = p.v_max().min(h * p.f_max);
    if feasible(&build(hi)?) {
        lo = hi;
    } else {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if feasible(&build(mid)?) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-12 * hi.max(1.0) {
                break;
            }
        }
    }
    let traj = build(lo)?;
    let mut x = prob.pack_canonical(&traj)?;
    prob.project(&mut x);
    Ok(x)
}

/// Canonical ζ, ι for the forces in `x`, written back in place.
pub fn resplit(prob: &NlpProblem, x: &mut [f64]) {
    let l = &prob.layout;
    let f = &x[l.range(Block::Force)].to_vec();
    let (z, i) = tv_split(f);
    x[l.range(Block::Zeta)].copy_from_slice(&z);
    x[l.range(Block::Iota)].copy_from_slice(&i);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bioenergetics::Mesh;
    use crate::nutrition::NutritionStrategy;
    use crate::params::{Runner, RunnerParams};
    use crate::transcription::assemble;

    fn toy() -> NlpProblem {
        let params = RunnerParams {
            tau: 2.0,
            f_max: 600.0,
            eg0: 0.05,
            ..RunnerParams::world_record()
        };
        let runner = Runner::new(params).unwrap();
        let mesh = Mesh::new(3.0, 4).unwrap();
        assemble(&runner, &NutritionStrategy::none(), &mesh, 0.5).unwrap()
    }

    #[test]
    fn banded_order_is_a_permutation_with_small_band() {
        let prob = toy();
        let (perm, bw) = banded_order(&prob);
        let mut seen = perm.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..prob.dim()).collect::<Vec<_>>());
        assert!(bw <= 13, "{bw}");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let prob = toy();
        let mut al = AugLag::new(&prob, 7.0);
        al.y = (0..prob.n_rows()).map(|r| 0.1 * r as f64 - 0.3).collect();
        let xs: Vec<f64> = (0..prob.dim()).map(|i| 0.2 + 0.05 * ((i * 31) % 11) as f64).collect();
        let (_, g, _) = al.value_grad(&xs);
        for i in 0..xs.len() {
            let e = 1e-6;
            let mut a = xs.clone();
            let mut b = xs.clone();
            a[i] += e;
            b[i] -= e;
            let fd = (al.value(&a) - al.value(&b)) / (2.0 * e);
            assert!((fd - g[i]).abs() <= 1e-5 * (1.0 + fd.abs()), "{i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let prob = toy();
        let mut al = AugLag::new(&prob, 3.0);
        al.y = (0..prob.n_rows()).map(|r| 0.2 * r as f64 - 1.0).collect();
        let xs: Vec<f64> = (0..prob.dim()).map(|i| 0.3 + 0.04 * ((i * 17) % 13) as f64).collect();
        let (_, _, c) = al.value_grad(&xs);
        let mut band = BandMatrix::zeros(xs.len(), al.bw);
        al.hessian(&xs, &c, &mut band, false);
        for j in 0..xs.len() {
            let e = 1e-6;
            let mut a = xs.clone();
            let mut b = xs.clone();
            a[j] += e;
            b[j] -= e;
            let ga = al.value_grad(&a).1;
            let gb = al.value_grad(&b).1;
            for i in 0..xs.len() {
                let fd = (ga[i] - gb[i]) / (2.0 * e);
                let an = band.get(al.perm[i], al.perm[j]);
                assert!((fd - an).abs() <= 1e-4 * (1.0 + fd.abs()), "({i},{j}): {fd} vs {an}");
            }
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = SolverConfig {
            tol_c: 0.0,
            ..SolverConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(solve(&toy(), &[0.0; 3], &SolverConfig::default()).is_err());
    }

    #[test]
    fn toy_solve_converges_and_is_feasible() {
        let prob = toy();
        let rep = solve(&prob, &prob.paper_x0(), &SolverConfig::default()).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged, "{}", rep.summary_line());
        assert!(rep.violation <= 1e-6);
        assert_eq!(prob.bound_violation(&rep.x), 0.0);
    }
}
