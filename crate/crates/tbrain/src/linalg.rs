//! Minimal dense linear algebra on `f64`.
//!
//! Every reduction runs in plain index order, so results are bit-identical
//! across platforms and optimization levels. The matrices involved are tiny
//! (tens of rows), which makes hand-rolled loops both simple and fast enough.

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row data length mismatch");
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    /// `y = M x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            y[r] = acc;
        }
        y
    }

    /// `y = M^T x`.
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let xr = x[r];
            for (yc, a) in y.iter_mut().zip(row) {
                *yc += xr * a;
            }
        }
        y
    }

    /// `y[j] = sum_i M[i][j] x[i]` for `j` in `cols_from..cols_to`.
    pub fn matvec_t_range(&self, x: &[f64], cols_from: usize, cols_to: usize) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert!(cols_from <= cols_to && cols_to <= self.cols);
        let mut y = vec![0.0; cols_to - cols_from];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols + cols_from..r * self.cols + cols_to];
            let xr = x[r];
            for (yc, a) in y.iter_mut().zip(row) {
                *yc += xr * a;
            }
        }
        y
    }

    /// `y = M[:, from..to] x` where `x.len() == to - from`.
    pub fn matvec_cols(&self, x: &[f64], cols_from: usize, cols_to: usize) -> Vec<f64> {
        debug_assert_eq!(x.len(), cols_to - cols_from);
        let mut y = vec![0.0; self.rows];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols + cols_from..r * self.cols + cols_to];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            y[r] = acc;
        }
        y
    }

    /// Copy of column `c`.
    pub fn col(&self, c: usize) -> Vec<f64> {
        debug_assert!(c < self.cols);
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// `M += scale * x y^T`.
    pub fn add_outer(&mut self, x: &[f64], y: &[f64], scale: f64) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        for r in 0..self.rows {
            let sx = scale * x[r];
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (m, b) in row.iter_mut().zip(y) {
                *m += sx * b;
            }
        }
    }

    /// `M[:, c] += scale * x`.
    pub fn add_col(&mut self, c: usize, x: &[f64], scale: f64) {
        debug_assert_eq!(x.len(), self.rows);
        for r in 0..self.rows {
            self.data[r * self.cols + c] += scale * x[r];
        }
    }

    /// `M += a * other`, elementwise.
    pub fn axpy(&mut self, a: f64, other: &Mat) {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        for (m, o) in self.data.iter_mut().zip(&other.data) {
            *m += a * o;
        }
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// `y += a * x`.
pub fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn sigmoid_vec(x: &[f64]) -> Vec<f64> {
    x.iter().copied().map(sigmoid).collect()
}

/// `log(sum_i exp(x_i))`, shifted by the maximum for stability.
pub fn log_sum_exp(x: &[f64]) -> f64 {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let mut sum = 0.0;
    for v in x {
        sum += (v - max).exp();
    }
    max + sum.ln()
}

/// Stabilized softmax; the output sums to one up to rounding.
pub fn softmax(x: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(x);
    x.iter().map(|v| (v - lse).exp()).collect()
}

/// Index of the largest entry; the first one wins on exact ties.
pub fn argmax(x: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in x.iter().enumerate().skip(1) {
        if *v > x[best] {
            best = i;
        }
    }
    best
}
