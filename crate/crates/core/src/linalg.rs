//! Banded symmetric factorisation and the spectral norm.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Iteration cap for [`spectral_norm`].
pub const SPECTRAL_NORM_MAX_ITER: usize = 10_000;
/// Relative change in the extreme Ritz value treated as converged.
pub const SPECTRAL_NORM_TOL: f64 = 1e-12;

/// Symmetric matrix stored as its lower band: entry `(i, i - k)` for
/// `0 <= k <= bandwidth` lives at `data[i * (bandwidth + 1) + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand {
    n: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self {
            n,
            bandwidth,
            data: vec![0.0; n * (bandwidth + 1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut b = Self::zeros(n, 0);
        b.data.fill(1.0);
        b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        if k > self.bandwidth {
            0.0
        } else {
            self.data[i * (self.bandwidth + 1) + k]
        }
    }

    /// Set entry `(i, j)` and, implicitly, `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        assert!(k <= self.bandwidth, "entry ({i}, {j}) outside band");
        self.data[i * (self.bandwidth + 1) + k] = value;
    }

    /// Gram matrix `D'D` of a banded rectangular operator given densely.
    /// `bandwidth` must bound the band of the product.
    pub fn gram(d: &DMatrix<f64>, bandwidth: usize) -> Self {
        let n = d.ncols();
        let mut out = Self::zeros(n, bandwidth);
        for i in 0..n {
            for j in i.saturating_sub(bandwidth)..=i {
                let v = d.column(i).dot(&d.column(j));
                out.set(i, j, v);
            }
        }
        out
    }

    /// `self + alpha * other`, widening the band if needed.
    pub fn add_scaled(&self, alpha: f64, other: &SymBand) -> Result<SymBand> {
        if self.n != other.n {
            return Err(Error::dims("SymBand::add_scaled", self.n, other.n));
        }
        let bw = self.bandwidth.max(other.bandwidth);
        let mut out = SymBand::zeros(self.n, bw);
        for i in 0..self.n {
            for j in i.saturating_sub(bw)..=i {
                out.set(i, j, self.get(i, j) + alpha * other.get(i, j));
            }
        }
        Ok(out)
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|x| *x *= alpha);
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        let bw = self.bandwidth;
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let lo = i.saturating_sub(bw);
            let hi = (i + bw).min(self.n - 1);
            *yi = (lo..=hi).map(|j| self.get(i, j) * x[j]).sum();
        }
    }

    /// Gershgorin interval containing every eigenvalue.
    pub fn gershgorin(&self) -> (f64, f64) {
        let bw = self.bandwidth;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let r: f64 = (i.saturating_sub(bw)..=(i + bw).min(self.n - 1))
                .filter(|&j| j != i)
                .map(|j| self.get(i, j).abs())
                .sum();
            lo = lo.min(self.get(i, i) - r);
            hi = hi.max(self.get(i, i) + r);
        }
        (lo, hi)
    }

    /// Spectral norm by shift-invert Lanczos at each end of the Gershgorin
    /// interval. Agrees with [`spectral_norm`] on `to_dense()`, but needs far
    /// fewer iterations when the extreme eigenvalues cluster.
    pub fn spectral_norm(&self) -> Result<f64> {
        if self.n == 0 {
            return Ok(0.0);
        }
        let (lo, hi) = self.gershgorin();
        let width = hi.abs().max(lo.abs());
        if width == 0.0 {
            return Ok(0.0);
        }
        let delta = 1e-8 * width;
        let top = || -> Result<f64> {
            let sigma = hi + delta;
            let shifted = SymBand::identity(self.n).scaled(sigma).add_scaled(-1.0, self)?;
            Ok((sigma - 1.0 / inverse_top(&shifted)?).abs())
        };
        let bottom = || -> Result<f64> {
            let sigma = lo - delta;
            let shifted = self.add_scaled(-sigma, &SymBand::identity(self.n))?;
            Ok((sigma + 1.0 / inverse_top(&shifted)?).abs())
        };
        // resolve the end with the larger bound; the other end only matters
        // if its bound exceeds what was found
        if hi >= -lo {
            let best = if hi > 0.0 { top()? } else { 0.0 };
            Ok(if -lo > best { best.max(bottom()?) } else { best })
        } else {
            let best = bottom()?;
            Ok(if hi > best { best.max(top()?) } else { best })
        }
    }

    fn scaled(mut self, alpha: f64) -> Self {
        self.scale(alpha);
        self
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// LDL' factorisation. Fails on a non-positive pivot.
    pub fn ldlt(&self) -> Result<BandLdlt> {
        let n = self.n;
        let bw = self.bandwidth;
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        let mut d = vec![0.0; n];
        for j in 0..n {
            let lo = j.saturating_sub(bw);
            let mut dj = self.get(j, j);
            for k in lo..j {
                let ljk = l[j * w + (j - k)];
                dj -= ljk * ljk * d[k];
            }
            if !(dj > 0.0) || !dj.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: dj });
            }
            d[j] = dj;
            for i in (j + 1)..=(j + bw).min(n.saturating_sub(1)) {
                let lo_i = i.saturating_sub(bw);
                let mut s = self.get(i, j);
                for k in lo_i.max(lo)..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)] * d[k];
                }
                l[i * w + (i - j)] = s / dj;
            }
        }
        Ok(BandLdlt { n, bandwidth: bw, l, d })
    }
}

/// Unit lower-triangular banded `L` and diagonal `D` with `A = L D L'`.
#[derive(Debug, Clone)]
pub struct BandLdlt {
    n: usize,
    bandwidth: usize,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl BandLdlt {
    fn lij(&self, i: usize, j: usize) -> f64 {
        self.l[i * (self.bandwidth + 1) + (i - j)]
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let bw = self.bandwidth;
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.lij(i, k) * b[k];
            }
            b[i] = s;
        }
        for (bi, di) in b.iter_mut().zip(&self.d) {
            *bi /= di;
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..=(i + bw).min(n - 1) {
                s -= self.lij(k, i) * b[k];
            }
            b[i] = s;
        }
    }

    /// Solve `A X = B` column by column.
    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = b.clone();
        for mut col in x.column_iter_mut() {
            self.solve_in_place(col.as_mut_slice());
        }
        x
    }

    /// Explicit inverse; only for callers that genuinely need every entry.
    pub fn inverse(&self) -> DMatrix<f64> {
        self.solve(&DMatrix::identity(self.n, self.n))
    }

    /// Diagonal of `A^{-1}` by the Takahashi recurrence, `O(n · bandwidth²)`.
    pub fn inverse_diagonal(&self) -> Vec<f64> {
        let n = self.n;
        let bw = self.bandwidth;
        let w = bw + 1;
        // z[i * w + (j - i)] holds (A^{-1})_{ij} for i <= j <= i + bw
        let mut z = vec![0.0; n * w];
        let zget = |z: &[f64], a: usize, b: usize| {
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            z[a * w + (b - a)]
        };
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            for j in ((i + 1)..=hi).rev() {
                let mut s = 0.0;
                for k in (i + 1)..=hi {
                    s -= self.lij(k, i) * zget(&z, k, j);
                }
                z[i * w + (j - i)] = s;
            }
            let mut s = 1.0 / self.d[i];
            for k in (i + 1)..=hi {
                s -= self.lij(k, i) * zget(&z, k, i);
            }
            z[i * w] = s;
        }
        (0..n).map(|i| z[i * w]).collect()
    }
}

/// Largest eigenvalue of `B^{-1}` for positive definite `B`.
fn inverse_top(b: &SymBand) -> Result<f64> {
    let f = b.ldlt()?;
    spectral_norm_op(b.n, |x, y| {
        y.copy_from(x);
        f.solve_in_place(y.as_mut_slice());
    })
}

/// Deterministic Krylov start vector: `1 + (-1)^i / 2`, normalised.
fn start_vector(n: usize) -> DVector<f64> {
    let v = DVector::from_fn(n, |i, _| if i % 2 == 0 { 1.5 } else { 0.5 });
    let norm = v.norm();
    v / norm
}

/// Spectral norm of a symmetric matrix, `max |eigenvalue|`.
///
/// Lanczos iteration with full reorthogonalisation from a fixed start vector;
/// it is power iteration accelerated over the whole Krylov space, which
/// matters for difference operators whose top eigenvalues cluster within
/// `O(1/p²)`.
pub fn spectral_norm(s: &DMatrix<f64>) -> Result<f64> {
    if !s.is_square() {
        return Err(Error::dims(
            "spectral_norm",
            "square matrix",
            format!("{}x{}", s.nrows(), s.ncols()),
        ));
    }
    let n = s.nrows();
    spectral_norm_op(n, |x, y| y.copy_from(&(s * x)))
}

/// [`spectral_norm`] for an implicit symmetric operator `y <- S x`.
pub fn spectral_norm_op<F>(n: usize, mut apply: F) -> Result<f64>
where
    F: FnMut(&DVector<f64>, &mut DVector<f64>),
{
    if n == 0 {
        return Ok(0.0);
    }
    let mut basis: Vec<DVector<f64>> = vec![start_vector(n)];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = DVector::zeros(n);
    let mut next_fresh = 0usize;

    for _ in 0..SPECTRAL_NORM_MAX_ITER {
        let v = &basis[basis.len() - 1];
        apply(v, &mut w);
        alpha.push(v.dot(&w));
        // full reorthogonalisation, applied twice
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&w);
                w.axpy(-c, b, 1.0);
            }
        }
        let bnorm = w.norm();
        let m = alpha.len();
        let scale = alpha.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1.0);
        if m < n && bnorm <= 1e-13 * scale {
            // Krylov space is invariant: continue with a fresh direction
            // orthogonal to everything seen so far.
            if let Some(f) = fresh_direction(&basis, &mut next_fresh) {
                beta.push(0.0);
                basis.push(f);
                continue;
            }
        }
        let ritz = extreme_ritz(&alpha, &beta);
        // |S x - theta x| = bnorm |s_m| for the Ritz pair; the eigenvalue error
        // is at most that residual, and at most residual² / gap
        let resid = bnorm * ritz.vector[m - 1].abs();
        let tol = SPECTRAL_NORM_TOL * ritz.value.abs().max(f64::MIN_POSITIVE);
        if m == n || bnorm <= 1e-13 * scale || resid <= tol || resid * resid <= tol * ritz.gap {
            return Ok(rayleigh(&basis, &ritz.vector, &mut apply).abs());
        }
        w /= bnorm;
        beta.push(bnorm);
        basis.push(w.clone());
    }
    Err(Error::NonConvergence {
        iterations: SPECTRAL_NORM_MAX_ITER,
    })
}

struct Ritz {
    value: f64,
    gap: f64,
    vector: Vec<f64>,
}

fn fresh_direction(basis: &[DVector<f64>], next: &mut usize) -> Option<DVector<f64>> {
    let n = basis[0].len();
    while *next < n {
        let mut e = DVector::zeros(n);
        e[*next] = 1.0;
        *next += 1;
        for _ in 0..2 {
            for b in basis {
                let c = b.dot(&e);
                e.axpy(-c, b, 1.0);
            }
        }
        let en = e.norm();
        if en > 1e-8 {
            return Some(e / en);
        }
    }
    None
}

/// Rayleigh quotient of `S` at the Ritz vector `V s`.
fn rayleigh<F>(basis: &[DVector<f64>], s: &[f64], apply: &mut F) -> f64
where
    F: FnMut(&DVector<f64>, &mut DVector<f64>),
{
    let mut x = DVector::zeros(basis[0].len());
    for (b, c) in basis.iter().zip(s) {
        x.axpy(*c, b, 1.0);
    }
    let xx = x.dot(&x);
    if !(xx > 0.0) {
        return 0.0;
    }
    let mut y = DVector::zeros(x.len());
    apply(&x, &mut y);
    x.dot(&y) / xx
}

/// Number of eigenvalues of the tridiagonal `(alpha, beta)` below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..alpha.len() {
        let off = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        d = alpha[i] - x - if off == 0.0 { 0.0 } else { off / d };
        if d == 0.0 {
            d = -f64::EPSILON * (x.abs() + f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// `k`-th smallest eigenvalue of the tridiagonal by bisection.
fn tridiagonal_eigenvalue(alpha: &[f64], beta: &[f64], k: usize, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest-magnitude Ritz value, its distance to the next Ritz value on the
/// same side, and the last component of its unit Ritz vector.
fn extreme_ritz(alpha: &[f64], beta: &[f64]) -> Ritz {
    let m = alpha.len();
    let b = |i: usize| if i < beta.len() { beta[i].abs() } else { 0.0 };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let r = if i > 0 { b(i - 1) } else { 0.0 } + if i + 1 < m { b(i) } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    let pad = 1e-12 * (hi.abs().max(lo.abs()) + 1.0);
    let (lo, hi) = (lo - pad, hi + pad);
    let top = tridiagonal_eigenvalue(alpha, beta, m - 1, lo, hi);
    let bottom = tridiagonal_eigenvalue(alpha, beta, 0, lo, hi);
    let (value, gap) = if top.abs() >= bottom.abs() {
        let next = if m > 1 {
            tridiagonal_eigenvalue(alpha, beta, m - 2, lo, hi)
        } else {
            lo
        };
        (top, top - next)
    } else {
        let next = if m > 1 {
            tridiagonal_eigenvalue(alpha, beta, 1, lo, hi)
        } else {
            hi
        };
        (bottom, next - bottom)
    };
    Ritz {
        value,
        gap,
        vector: ritz_vector(alpha, beta, value),
    }
}

/// Unit eigenvector of the tridiagonal for the eigenvalue `theta`, by two
/// steps of inverse iteration.
fn ritz_vector(alpha: &[f64], beta: &[f64], theta: f64) -> Vec<f64> {
    let m = alpha.len();
    if m == 1 {
        return vec![1.0];
    }
    let shift = theta + 1e-13 * (theta.abs() + 1.0);
    let mut x = vec![1.0; m];
    for _ in 0..2 {
        // Thomas algorithm on (T - shift I) y = x
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        let guard = |v: f64| if v.abs() < 1e-300 { 1e-300 } else { v };
        let mut piv = guard(alpha[0] - shift);
        c[0] = beta[0] / piv;
        d[0] = x[0] / piv;
        for i in 1..m {
            piv = guard(alpha[i] - shift - beta[i - 1] * c[i - 1]);
            if i + 1 < m {
                c[i] = beta[i] / piv;
            }
            d[i] = (x[i] - beta[i - 1] * d[i - 1]) / piv;
        }
        x[m - 1] = d[m - 1];
        for i in (0..m - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            let mut e = vec![0.0; m];
            e[m - 1] = 1.0;
            return e;
        }
        x.iter_mut().for_each(|v| *v /= norm);
    }
    x
}

/// Largest absolute asymmetry `max |A_ij - A_ji|`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    (a - a.transpose()).amax()
}
