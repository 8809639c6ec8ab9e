//! Symmetric banded matrices stored by lower diagonals, with an in-place
//! Cholesky factorization.

#[derive(Debug, Clone)]
pub(crate) struct BandMatrix {
    n: usize,
    bw: usize,
    /// `data[i * (bw + 1) + d]` holds entry `(i, i − d)`.
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn clear(&mut self) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        debug_assert!(d <= self.bw, "entry ({i},{j}) outside band {}", self.bw);
        i * (self.bw + 1) + d
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    #[cfg(test)]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i >= j { (i, j) } else { (j, i) };
        if a - b > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    #[cfg(test)]
    pub fn diag(&self, i: usize) -> f64 {
        self.data[i * (self.bw + 1)]
    }

    /// Replace row and column `i` by the unit vector.
    pub fn isolate(&mut self, i: usize) {
        let lo = i.saturating_sub(self.bw);
        let hi = (i + self.bw).min(self.n - 1);
        for j in lo..=hi {
            if j != i {
                let k = self.idx(i, j);
                self.data[k] = 0.0;
            }
        }
        let k = self.idx(i, i);
        self.data[k] = 1.0;
    }

    pub fn add_diag(&mut self, i: usize, v: f64) {
        let k = i * (self.bw + 1);
        self.data[k] += v;
    }

    #[cfg(test)]
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            y[i] += self.diag(i) * x[i];
            for d in 1..=self.bw.min(i) {
                let a = self.data[i * (self.bw + 1) + d];
                y[i] += a * x[i - d];
                y[i - d] += a * x[i];
            }
        }
        y
    }

    /// Lower Cholesky factor `L` with `A = L·Lᵀ`, or `None` if a pivot is not
    /// positive.
    pub fn cholesky(&self) -> Option<BandCholesky> {
        let bw = self.bw;
        let w = bw + 1;
        let mut l = self.data.clone();
        for i in 0..self.n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let mut sum = l[i * w + (i - j)];
                let k0 = j0.max(j.saturating_sub(bw));
                for k in k0..j {
                    sum -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                if i == j {
                    if !(sum > 0.0) || !sum.is_finite() {
                        return None;
                    }
                    l[i * w] = sum.sqrt();
                } else {
                    l[i * w + (i - j)] = sum / l[j * w];
                }
            }
        }
        Some(BandCholesky { n: self.n, bw, l })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let w = self.bw + 1;
        let mut y = b.to_vec();
        for i in 0..self.n {
            let mut sum = y[i];
            for k in i.saturating_sub(self.bw)..i {
                sum -= self.l[i * w + (i - k)] * y[k];
            }
            y[i] = sum / self.l[i * w];
        }
        for i in (0..self.n).rev() {
            let mut sum = y[i];
            for k in i + 1..=(i + self.bw).min(self.n - 1) {
                sum -= self.l[k * w + (k - i)] * y[k];
            }
            y[i] = sum / self.l[i * w];
        }
        y
    }
}
