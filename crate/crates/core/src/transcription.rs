//! The discretized optimal control problem as a finite-dimensional NLP.
//!
//! Decision vector, in block order:
//! `[f (M−1), E_F (M), E_G (M), V (M), N (M), ζ (M−2), ι (M−2)]`, dimension `7M − 5`.
//! Initial conditions are encoded as pinned bounds at node 0.
//!
//! Equality rows, in order: V recurrence (M−1), E_F recurrence (M−1),
//! E_G recurrence (M−1), N recurrence (M−1), TV split (M−2).

use std::fmt::Write as _;
use std::ops::Range;

use crate::bioenergetics::{check_len, Mesh, Trajectory};
use crate::error::{ModelError, Result};
use crate::nutrition::{pulse_profile, NutritionStrategy};
use crate::params::Runner;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Force,
    Fat,
    Glycogen,
    Velocity,
    Nutrition,
    Zeta,
    Iota,
}

impl Block {
    pub const ALL: [Block; 7] = [
        Block::Force,
        Block::Fat,
        Block::Glycogen,
        Block::Velocity,
        Block::Nutrition,
        Block::Zeta,
        Block::Iota,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecisionLayout {
    n_nodes: usize,
}

impl DecisionLayout {
    /// Needs at least 3 nodes so the TV blocks are non-empty.
    pub fn new(n_nodes: usize) -> Result<Self> {
        if n_nodes < 3 {
            return Err(ModelError::InvalidMesh(format!(
                "transcription needs at least 3 nodes, got {n_nodes}"
            )));
        }
        Ok(Self { n_nodes })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn len(&self, block: Block) -> usize {
        let m = self.n_nodes;
        match block {
            Block::Force => m - 1,
            Block::Zeta | Block::Iota => m - 2,
            _ => m,
        }
    }

    pub fn offset(&self, block: Block) -> usize {
        Block::ALL
            .iter()
            .take_while(|&&b| b != block)
            .map(|&b| self.len(b))
            .sum()
    }

    pub fn range(&self, block: Block) -> Range<usize> {
        let o = self.offset(block);
        o..o + self.len(block)
    }

    pub fn dim(&self) -> usize {
        7 * self.n_nodes - 5
    }

    pub fn f(&self, k: usize) -> usize {
        k
    }
    pub fn ef(&self, k: usize) -> usize {
        (self.n_nodes - 1) + k
    }
    pub fn eg(&self, k: usize) -> usize {
        (2 * self.n_nodes - 1) + k
    }
    pub fn v(&self, k: usize) -> usize {
        (3 * self.n_nodes - 1) + k
    }
    pub fn n(&self, k: usize) -> usize {
        (4 * self.n_nodes - 1) + k
    }
    pub fn zeta(&self, k: usize) -> usize {
        (5 * self.n_nodes - 1) + k
    }
    pub fn iota(&self, k: usize) -> usize {
        (6 * self.n_nodes - 3) + k
    }

    /// Block and in-block index of a flat position.
    pub fn locate(&self, i: usize) -> (Block, usize) {
        let mut start = 0;
        for b in Block::ALL {
            let len = self.len(b);
            if i < start + len {
                return (b, i - start);
            }
            start += len;
        }
        panic!("index {i} outside layout of dimension {}", self.dim());
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Velocity,
    Fat,
    Glycogen,
    Nutrition,
    TotalVariation,
}

#[derive(Debug, Clone)]
pub struct NlpProblem {
    pub layout: DecisionLayout,
    pub mesh: Mesh,
    pub runner: Runner,
    pub strategy: NutritionStrategy,
    /// Nutrition source per interval, kJ/min.
    pub s: Vec<f64>,
    pub tv_weight: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Build the NLP for one runner, strategy and mesh.
pub fn assemble(
    runner: &Runner,
    strategy: &NutritionStrategy,
    mesh: &Mesh,
    tv_weight: f64,
) -> Result<NlpProblem> {
    if !(tv_weight.is_finite() && tv_weight >= 0.0) {
        return Err(ModelError::InvalidParam {
            name: "tv_weight",
            reason: format!("must be finite and >= 0, got {tv_weight}"),
        });
    }
    runner.params.validate()?;
    let layout = DecisionLayout::new(mesh.n_nodes())?;
    let s = pulse_profile(strategy, mesh)?;
    let p = &runner.params;
    let m = mesh.n_nodes();
    let n = layout.dim();
    let mut lower = vec![0.0; n];
    let mut upper = vec![f64::INFINITY; n];
    let eg_cap = p.eg0 + p.c3() * strategy.total_energy();
    for k in 0..m {
        if k + 1 < m {
            upper[layout.f(k)] = p.f_max;
        }
        upper[layout.ef(k)] = p.ef0;
        upper[layout.eg(k)] = eg_cap;
        upper[layout.v(k)] = p.v_max();
    }
    for (i, val) in [
        (layout.v(0), 0.0),
        (layout.ef(0), p.ef0),
        (layout.eg(0), p.eg0),
        (layout.n(0), 0.0),
    ] {
        lower[i] = val;
        upper[i] = val;
    }
    Ok(NlpProblem {
        layout,
        mesh: *mesh,
        runner: runner.clone(),
        strategy: strategy.clone(),
        s,
        tv_weight,
        lower,
        upper,
    })
}

/// Canonical split of consecutive force differences into rises and drops.
pub fn tv_split(f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    f.windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            (d.max(0.0), (-d).max(0.0))
        })
        .unzip()
}

/// Σ|f_{k+1} − f_k|.
pub fn total_variation(f: &[f64]) -> f64 {
    f.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

impl NlpProblem {
    /// Raise the lower bound on `V_k` to `v_min` at every node after the
    /// first, a floor on pace and so on distance.
    pub fn with_min_velocity(mut self, v_min: f64) -> Result<Self> {
        let cap = self.runner.params.v_max();
        if !(v_min.is_finite() && (0.0..=cap).contains(&v_min)) {
            return Err(ModelError::InvalidParam {
                name: "min_velocity",
                reason: format!("must lie in [0, {cap}], got {v_min}"),
            });
        }
        for k in 1..self.layout.n_nodes() {
            self.lower[self.layout.v(k)] = v_min;
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn n_rows(&self) -> usize {
        let m = self.layout.n_nodes();
        4 * (m - 1) + (m - 2)
    }

    pub fn row_kind(&self, r: usize) -> RowKind {
        let steps = self.layout.n_nodes() - 1;
        match r / steps {
            0 => RowKind::Velocity,
            1 => RowKind::Fat,
            2 => RowKind::Glycogen,
            3 => RowKind::Nutrition,
            _ => RowKind::TotalVariation,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        check_len("decision vector", self.dim(), x.len())
    }

    /// `J(x) = −h·Σ_{k≤M−2} V_k + p·Σ(ζ_k + ι_k)` and its gradient.
    pub fn objective_eval(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_dim(x)?;
        let l = &self.layout;
        let h = self.mesh.h();
        let m = l.n_nodes();
        let mut grad = vec![0.0; x.len()];
        let mut value = 0.0;
        for k in 0..m - 1 {
            value -= h * x[l.v(k)];
            grad[l.v(k)] = -h;
        }
        for k in 0..m - 2 {
            value += self.tv_weight * (x[l.zeta(k)] + x[l.iota(k)]);
            grad[l.zeta(k)] = self.tv_weight;
            grad[l.iota(k)] = self.tv_weight;
        }
        Ok((value, grad))
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let l = &self.layout;
        let h = self.mesh.h();
        let m = l.n_nodes();
        let run: f64 = (0..m - 1).map(|k| x[l.v(k)]).sum();
        let tv: f64 = (0..m - 2).map(|k| x[l.zeta(k)] + x[l.iota(k)]).sum();
        -h * run + self.tv_weight * tv
    }

    /// All equality residuals in row order.
    pub fn residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut out = vec![0.0; self.n_rows()];
        self.residuals_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn residuals_into(&self, x: &[f64], out: &mut [f64]) {
        let l = &self.layout;
        let p = &self.runner.params;
        let h = self.mesh.h();
        let m = l.n_nodes();
        let steps = m - 1;
        let w = p.work_scale();
        let inflow = p.c3() * p.c4;
        for k in 0..steps {
            let f = x[l.f(k)];
            let v = x[l.v(k)];
            let nk = x[l.n(k)];
            let (g, _, _) = self.runner.glyc_v(v);
            out[k] = x[l.v(k + 1)] - v - h * (f - v * p.inv_tau());
            out[steps + k] = x[l.ef(k + 1)] - x[l.ef(k)] + h * w * f * v * (1.0 - g);
            out[2 * steps + k] = x[l.eg(k + 1)] - x[l.eg(k)] - h * (inflow * nk - w * f * v * g);
            out[3 * steps + k] = x[l.n(k + 1)] - nk - h * (self.s[k] - (p.d + p.c4) * nk);
        }
        for k in 0..m - 2 {
            out[4 * steps + k] =
                -x[l.f(k + 1)] + x[l.f(k)] + x[l.zeta(k)] - x[l.iota(k)];
        }
    }

    /// Residuals of the linear rows only (V, N, TV), in row order with the
    /// nonlinear rows left out.
    pub fn linear_residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = self.residuals(x)?;
        Ok((0..r.len())
            .filter(|&i| !matches!(self.row_kind(i), RowKind::Fat | RowKind::Glycogen))
            .map(|i| r[i])
            .collect())
    }

    /// Residuals of the E_F and E_G recurrences.
    pub fn nonlinear_residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = self.residuals(x)?;
        let steps = self.layout.n_nodes() - 1;
        Ok(r[steps..3 * steps].to_vec())
    }

    /// Constraint Jacobian as `(row, col, value)` triplets.
    pub fn jacobian(&self, x: &[f64]) -> Result<Vec<(usize, usize, f64)>> {
        self.check_dim(x)?;
        let mut out = Vec::with_capacity(16 * self.n_rows());
        self.jacobian_visit(x, |r, c, v| out.push((r, c, v)));
        Ok(out)
    }

    pub(crate) fn jacobian_visit(&self, x: &[f64], mut emit: impl FnMut(usize, usize, f64)) {
        let l = &self.layout;
        let p = &self.runner.params;
        let h = self.mesh.h();
        let m = l.n_nodes();
        let steps = m - 1;
        let w = p.work_scale();
        for k in 0..steps {
            let f = x[l.f(k)];
            let v = x[l.v(k)];
            let (g, dg, _) = self.runner.glyc_v(v);
            let q = v * (1.0 - g);
            let dq = 1.0 - g - v * dg;
            let r = v * g;
            let dr = g + v * dg;

            emit(k, l.v(k + 1), 1.0);
            emit(k, l.v(k), -1.0 + h * p.inv_tau());
            emit(k, l.f(k), -h);

            let row = steps + k;
            emit(row, l.ef(k + 1), 1.0);
            emit(row, l.ef(k), -1.0);
            emit(row, l.f(k), h * w * q);
            emit(row, l.v(k), h * w * f * dq);

            let row = 2 * steps + k;
            emit(row, l.eg(k + 1), 1.0);
            emit(row, l.eg(k), -1.0);
            emit(row, l.n(k), -h * p.c3() * p.c4);
            emit(row, l.f(k), h * w * r);
            emit(row, l.v(k), h * w * f * dr);

            let row = 3 * steps + k;
            emit(row, l.n(k + 1), 1.0);
            emit(row, l.n(k), -1.0 + h * (p.d + p.c4));
        }
        for k in 0..m - 2 {
            let row = 4 * steps + k;
            emit(row, l.f(k + 1), -1.0);
            emit(row, l.f(k), 1.0);
            emit(row, l.zeta(k), 1.0);
            emit(row, l.iota(k), -1.0);
        }
    }

    /// Lower triangle of `Σ_r y_r ∇²c_r(x)` as `(i, j, value)` with `i ≥ j`.
    /// Only the E_F and E_G rows are curved; each couples `f_k` and `V_k`.
    pub(crate) fn constraint_hessian_visit(
        &self,
        x: &[f64],
        y: &[f64],
        mut emit: impl FnMut(usize, usize, f64),
    ) {
        let l = &self.layout;
        let p = &self.runner.params;
        let h = self.mesh.h();
        let steps = l.n_nodes() - 1;
        let w = p.work_scale();
        for k in 0..steps {
            let f = x[l.f(k)];
            let v = x[l.v(k)];
            let (g, dg, d2g) = self.runner.glyc_v(v);
            let dq = 1.0 - g - v * dg;
            let d2q = -2.0 * dg - v * d2g;
            let dr = g + v * dg;
            let d2r = 2.0 * dg + v * d2g;
            let yf = y[steps + k];
            let yg = y[2 * steps + k];
            let cross = h * w * (yf * dq + yg * dr);
            let vv = h * w * f * (yf * d2q + yg * d2r);
            // layout puts f before V, so (V, f) is in the lower triangle
            emit(l.v(k), l.f(k), cross);
            emit(l.v(k), l.v(k), vv);
        }
    }

    /// Dense copy of the Jacobian; for tests and small instances.
    pub fn jacobian_dense(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let mut out = vec![vec![0.0; self.dim()]; self.n_rows()];
        for (r, c, v) in self.jacobian(x)? {
            out[r][c] += v;
        }
        Ok(out)
    }

    /// Flatten a trajectory and split variables into a decision vector.
    pub fn pack(&self, traj: &Trajectory, zeta: &[f64], iota: &[f64]) -> Result<Vec<f64>> {
        traj.check_shape()?;
        let m = self.layout.n_nodes();
        check_len("trajectory nodes", m, traj.mesh.n_nodes())?;
        check_len("zeta", m - 2, zeta.len())?;
        check_len("iota", m - 2, iota.len())?;
        let mut x = Vec::with_capacity(self.dim());
        x.extend_from_slice(&traj.f);
        x.extend_from_slice(&traj.ef);
        x.extend_from_slice(&traj.eg);
        x.extend_from_slice(&traj.v);
        x.extend_from_slice(&traj.n);
        x.extend_from_slice(zeta);
        x.extend_from_slice(iota);
        Ok(x)
    }

    /// Pack a trajectory with the canonical split of its forces.
    pub fn pack_canonical(&self, traj: &Trajectory) -> Result<Vec<f64>> {
        let (zeta, iota) = tv_split(&traj.f);
        self.pack(traj, &zeta, &iota)
    }

    pub fn unpack(&self, x: &[f64]) -> Result<(Trajectory, Vec<f64>, Vec<f64>)> {
        self.check_dim(x)?;
        let l = &self.layout;
        let take = |b: Block| x[l.range(b)].to_vec();
        Ok((
            Trajectory {
                mesh: self.mesh,
                f: take(Block::Force),
                v: take(Block::Velocity),
                ef: take(Block::Fat),
                eg: take(Block::Glycogen),
                n: take(Block::Nutrition),
            },
            take(Block::Zeta),
            take(Block::Iota),
        ))
    }

    /// Starting guess with every force at `f_max` and everything else zero.
    pub fn paper_x0(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        for i in self.layout.range(Block::Force) {
            x[i] = self.runner.params.f_max;
        }
        x
    }

    pub fn project(&self, x: &mut [f64]) {
        for ((xi, &lo), &hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *xi = xi.clamp(lo, hi);
        }
    }

    /// Largest bound violation of `x`.
    pub fn bound_violation(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&xi, (&lo, &hi))| (lo - xi).max(xi - hi).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Plain-text summary of dimensions, bounds and sparsity for snapshots.
    pub fn debug_dump(&self) -> String {
        let l = &self.layout;
        let mut out = String::new();
        let _ = writeln!(out, "nodes {} h {} T {}", l.n_nodes(), self.mesh.h(), self.mesh.t_final());
        let _ = writeln!(out, "dim {} rows {}", self.dim(), self.n_rows());
        let _ = writeln!(out, "tv_weight {}", self.tv_weight);
        for b in Block::ALL {
            let r = l.range(b);
            let pinned = r.clone().filter(|&i| self.lower[i] == self.upper[i]).count();
            let lo = r.clone().map(|i| self.lower[i]).fold(f64::INFINITY, f64::min);
            let hi = r.clone().map(|i| self.upper[i]).fold(f64::NEG_INFINITY, f64::max);
            let _ = writeln!(
                out,
                "block {:?} offset {} len {} lower_min {} upper_max {} pinned {}",
                b,
                r.start,
                r.len(),
                lo,
                hi,
                pinned
            );
        }
        let x = vec![0.0; self.dim()];
        let nnz = self.jacobian(&x).map(|j| j.len()).unwrap_or(0);
        let _ = writeln!(out, "jacobian_nnz {nnz}");
        let nonzero_s = self.s.iter().filter(|&&v| v != 0.0).count();
        let _ = writeln!(out, "source_nonzero {nonzero_s} total_energy_kJ {}", self.strategy.total_energy());
        out
    }
}
