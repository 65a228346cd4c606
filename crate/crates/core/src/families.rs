//! Candidate smoothers: running averages with reflected boundaries and
//! penalised least squares with difference penalties.
//!
//! A family maps a parameter `t` in the box `[0, 1]^k` to a symmetric `p × p`
//! matrix `A(t)`. Families also know how to apply `A(t)` to data without
//! forming it, which is what the selector uses.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::normalize_rows;
use crate::linalg::SymBand;
use crate::model::DirectionData;

pub use crate::linalg::spectral_norm;

/// Penalty scale used when none is given.
pub const DEFAULT_PENALTY_SCALE: f64 = 1000.0;

/// Whether increasing a coordinate of `t` smooths more or less.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothingDirection {
    Increasing,
    Decreasing,
}

/// `A(t) Y` together with `tr A(t)`.
#[derive(Debug, Clone)]
pub struct SmootherEval {
    pub fitted: DMatrix<f64>,
    pub trace: f64,
}

/// Provenance recorded in reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyInfo {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalties: Option<usize>,
}

pub trait SmootherFamily: Send + Sync {
    fn label(&self) -> &str;

    fn info(&self) -> FamilyInfo;

    /// Number of observations `p`.
    fn p(&self) -> usize;

    /// Parameter dimension `k`; zero for a fixed smoother.
    fn dim(&self) -> usize;

    fn smoothing_direction(&self) -> Vec<SmoothingDirection> {
        vec![SmoothingDirection::Increasing; self.dim()]
    }

    /// The explicit matrix `A(t)`.
    fn matrix(&self, t: &[f64]) -> Result<DMatrix<f64>>;

    /// `A(t) Y` and `tr A(t)`. The default forms `A(t)`.
    fn apply(&self, t: &[f64], y: &DMatrix<f64>) -> Result<SmootherEval> {
        let a = self.matrix(t)?;
        if y.nrows() != a.nrows() {
            return Err(Error::dims("apply", a.nrows(), y.nrows()));
        }
        Ok(SmootherEval {
            fitted: &a * y,
            trace: a.trace(),
        })
    }

    /// Constant `C` with `|A(t) - A(t')|_sp <= C |t - t'|` on the box.
    fn lipschitz_bound(&self) -> f64;
}

fn check_param(t: &[f64], k: usize) -> Result<()> {
    if t.len() != k {
        return Err(Error::dims("family parameter", k, t.len()));
    }
    if let Some(x) = t.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::InvalidArgument(format!("parameter {x} outside [0, 1]")));
    }
    Ok(())
}

/// The span-3 running average with boundary rows `(2/3, 1/3)`.
pub fn span3_running_average(p: usize) -> Result<DMatrix<f64>> {
    if p < 3 {
        return Err(Error::InvalidArgument(format!(
            "span-3 running average needs p >= 3, got {p}"
        )));
    }
    odd_span_weighted_average(p, &[1.0 / 3.0, 1.0 / 3.0])
}

/// Banded running average with centre-out weights `w_0..w_h`; indices falling
/// off either end are reflected back into range and their weight accumulated.
pub fn odd_span_weighted_average(p: usize, weights: &[f64]) -> Result<DMatrix<f64>> {
    let Some((&w0, tail)) = weights.split_first() else {
        return Err(Error::InvalidArgument("no weights".into()));
    };
    let h = tail.len();
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidArgument("weights must be non-negative".into()));
    }
    let total = w0 + 2.0 * tail.iter().sum::<f64>();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
    }
    if 2 * h + 1 > p {
        return Err(Error::InvalidArgument(format!("span {} exceeds p = {p}", 2 * h + 1)));
    }
    let n = p as isize;
    let reflect = |k: isize| -> usize {
        if k < 0 {
            (-k - 1) as usize
        } else if k >= n {
            (2 * n - 1 - k) as usize
        } else {
            k as usize
        }
    };
    let mut a = DMatrix::zeros(p, p);
    for i in 0..p {
        for (j, &w) in weights.iter().enumerate() {
            let j = j as isize;
            let i = i as isize;
            a[(i as usize, reflect(i + j))] += w;
            if j > 0 {
                a[(i as usize, reflect(i - j))] += w;
            }
        }
    }
    Ok(a)
}

/// The `(p - d) × p` matrix of `d`-th differences, built by composing
/// first-difference matrices.
pub fn difference_matrix(p: usize, d: usize) -> Result<DMatrix<f64>> {
    if d == 0 || d >= p {
        return Err(Error::InvalidArgument(format!(
            "difference order {d} outside [1, {}]",
            p.saturating_sub(1)
        )));
    }
    let first = |g: usize| {
        DMatrix::from_fn(g - 1, g, |u, v| {
            if v == u {
                1.0
            } else if v == u + 1 {
                -1.0
            } else {
                0.0
            }
        })
    };
    let mut delta = first(p);
    for k in 2..=d {
        delta = first(p - k + 1) * delta;
    }
    Ok(delta)
}

/// `Δ_d' Δ_d` in banded form, from the binomial stencil of `Δ_d`.
pub fn difference_gram(p: usize, d: usize) -> Result<SymBand> {
    if d == 0 || d >= p {
        return Err(Error::InvalidArgument(format!(
            "difference order {d} outside [1, {}]",
            p.saturating_sub(1)
        )));
    }
    let mut stencil = vec![1.0f64];
    for _ in 0..d {
        let mut next = vec![0.0; stencil.len() + 1];
        for (k, s) in stencil.iter().enumerate() {
            next[k] += s;
            next[k + 1] -= s;
        }
        stencil = next;
    }
    let mut gram = SymBand::zeros(p, d);
    for u in 0..(p - d) {
        for a in 0..=d {
            for b in 0..=a {
                let (i, j) = (u + a, u + b);
                gram.set(i, j, gram.get(i, j) + stencil[a] * stencil[b]);
            }
        }
    }
    Ok(gram)
}

/// `(I_p + Q) A = Y` solved with a banded factorisation.
fn banded_smooth(system: &SymBand, y: &DMatrix<f64>) -> Result<SmootherEval> {
    let f = system.ldlt()?;
    Ok(SmootherEval {
        fitted: f.solve(y),
        trace: f.inverse_diagonal().iter().sum(),
    })
}

/// A parameterless smoother, such as the span-3 running average or the
/// identity.
#[derive(Debug, Clone)]
pub struct FixedSmoother {
    label: String,
    kind: &'static str,
    a: DMatrix<f64>,
}

impl FixedSmoother {
    pub fn new(label: impl Into<String>, a: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dims("FixedSmoother", "square", format!("{:?}", a.shape())));
        }
        if crate::linalg::asymmetry(&a) > 1e-10 {
            return Err(Error::InvalidArgument("smoother is not symmetric".into()));
        }
        Ok(Self {
            label: label.into(),
            kind: "fixed",
            a,
        })
    }

    pub fn span3(p: usize) -> Result<Self> {
        Ok(Self {
            label: "run3".into(),
            kind: "run3",
            a: span3_running_average(p)?,
        })
    }

    pub fn identity(p: usize) -> Self {
        Self {
            label: "naive".into(),
            kind: "naive",
            a: DMatrix::identity(p, p),
        }
    }
}

impl SmootherFamily for FixedSmoother {
    fn label(&self) -> &str {
        &self.label
    }

    fn info(&self) -> FamilyInfo {
        FamilyInfo {
            kind: self.kind,
            d: None,
            c: None,
            penalties: None,
        }
    }

    fn p(&self) -> usize {
        self.a.nrows()
    }

    fn dim(&self) -> usize {
        0
    }

    fn matrix(&self, t: &[f64]) -> Result<DMatrix<f64>> {
        check_param(t, 0)?;
        Ok(self.a.clone())
    }

    fn lipschitz_bound(&self) -> f64 {
        0.0
    }
}

/// Span-3 weighted running averages `t1 = 1 - s`, `t2 = s/2`, `s ∈ [0, 1]`;
/// `s = 0` is the identity and `s = 2/3` the plain span-3 average.
#[derive(Debug, Clone)]
pub struct WeightedRunningAverage {
    p: usize,
}

impl WeightedRunningAverage {
    pub fn new(p: usize) -> Result<Self> {
        if p < 3 {
            return Err(Error::InvalidArgument(format!(
                "weighted running average needs p >= 3, got {p}"
            )));
        }
        Ok(Self { p })
    }

    fn weights(s: f64) -> (f64, f64) {
        (1.0 - s, s / 2.0)
    }
}

impl SmootherFamily for WeightedRunningAverage {
    fn label(&self) -> &str {
        "runw"
    }

    fn info(&self) -> FamilyInfo {
        FamilyInfo {
            kind: "runw",
            d: None,
            c: None,
            penalties: None,
        }
    }

    fn p(&self) -> usize {
        self.p
    }

    fn dim(&self) -> usize {
        1
    }

    fn matrix(&self, t: &[f64]) -> Result<DMatrix<f64>> {
        check_param(t, 1)?;
        let (t1, t2) = Self::weights(t[0]);
        let p = self.p;
        let mut a = DMatrix::zeros(p, p);
        for i in 0..p {
            a[(i, i)] = t1;
            if i + 1 < p {
                a[(i, i + 1)] = t2;
                a[(i + 1, i)] = t2;
            }
        }
        a[(0, 0)] += t2;
        a[(p - 1, p - 1)] += t2;
        Ok(a)
    }

    fn apply(&self, t: &[f64], y: &DMatrix<f64>) -> Result<SmootherEval> {
        check_param(t, 1)?;
        let p = self.p;
        if y.nrows() != p {
            return Err(Error::dims("apply", p, y.nrows()));
        }
        let (t1, t2) = Self::weights(t[0]);
        let mut fitted = y * t1;
        for i in 0..p {
            let left = if i == 0 { 0 } else { i - 1 };
            let right = if i + 1 == p { p - 1 } else { i + 1 };
            for j in 0..y.ncols() {
                fitted[(i, j)] += t2 * (y[(left, j)] + y[(right, j)]);
            }
        }
        Ok(SmootherEval {
            fitted,
            trace: p as f64 * t1 + 2.0 * t2,
        })
    }

    fn lipschitz_bound(&self) -> f64 {
        // dA/ds = (N - 2I)/2 with N the reflected adjacency, |N|_sp = 2
        2.0
    }
}

/// Penalised least squares with a normalised `d`-th difference penalty:
/// `A(t) = (I + c t Δ'Δ / |Δ'Δ|_sp)^{-1}`.
#[derive(Debug, Clone)]
pub struct PlsFamily {
    p: usize,
    d: usize,
    c: f64,
    label: String,
    penalty: SymBand,
}

impl PlsFamily {
    pub fn new(p: usize, d: usize, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("penalty scale {c} must be positive")));
        }
        let mut penalty = difference_gram(p, d)?;
        let norm = penalty.spectral_norm()?;
        penalty.scale(1.0 / norm);
        Ok(Self {
            p,
            d,
            c,
            label: FamilySpec::Pls { d, c }.to_string(),
            penalty,
        })
    }

    pub fn order(&self) -> usize {
        self.d
    }

    pub fn scale(&self) -> f64 {
        self.c
    }

    /// The normalised penalty `Δ'Δ / |Δ'Δ|_sp`.
    pub fn penalty(&self) -> &SymBand {
        &self.penalty
    }

    fn system(&self, t: f64) -> Result<SymBand> {
        SymBand::identity(self.p).add_scaled(self.c * t, &self.penalty)
    }
}

impl SmootherFamily for PlsFamily {
    fn label(&self) -> &str {
        &self.label
    }

    fn info(&self) -> FamilyInfo {
        FamilyInfo {
            kind: "pls",
            d: Some(self.d),
            c: Some(self.c),
            penalties: None,
        }
    }

    fn p(&self) -> usize {
        self.p
    }

    fn dim(&self) -> usize {
        1
    }

    fn matrix(&self, t: &[f64]) -> Result<DMatrix<f64>> {
        check_param(t, 1)?;
        let a = self.system(t[0])?.ldlt()?.inverse();
        // symmetrise away solve round-off
        Ok((&a + a.transpose()) * 0.5)
    }

    fn apply(&self, t: &[f64], y: &DMatrix<f64>) -> Result<SmootherEval> {
        check_param(t, 1)?;
        if y.nrows() != self.p {
            return Err(Error::dims("apply", self.p, y.nrows()));
        }
        banded_smooth(&self.system(t[0])?, y)
    }

    fn lipschitz_bound(&self) -> f64 {
        // |dA/dt| = c |A Q A| <= c since |A|_sp, |Q|_sp <= 1
        self.c
    }
}

/// Penalised least squares with several normalised penalties:
/// `A(t) = (I + c Σ t_i Q_i)^{-1}`.
#[derive(Debug, Clone)]
pub struct MultiPenaltyPls {
    p: usize,
    c: f64,
    penalties: Vec<DMatrix<f64>>,
    label: String,
}

impl MultiPenaltyPls {
    /// Each penalty must be symmetric positive semi-definite; it is rescaled
    /// to unit spectral norm.
    pub fn new(p: usize, penalties: Vec<DMatrix<f64>>, c: f64) -> Result<Self> {
        if penalties.is_empty() {
            return Err(Error::InvalidArgument("no penalties".into()));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("penalty scale {c} must be positive")));
        }
        let mut normalized = Vec::with_capacity(penalties.len());
        for (index, q) in penalties.into_iter().enumerate() {
            if q.nrows() != p || q.ncols() != p {
                return Err(Error::dims("penalty", format!("{p}x{p}"), format!("{:?}", q.shape())));
            }
            if crate::linalg::asymmetry(&q) > 1e-10 * q.amax().max(1.0) {
                return Err(Error::InvalidArgument(format!("penalty {index} is not symmetric")));
            }
            let norm = spectral_norm(&q)?;
            if norm == 0.0 {
                return Err(Error::InvalidArgument(format!("penalty {index} is zero")));
            }
            // Rayleigh quotient at the lowest eigenvector
            let eig = SymmetricEigen::new(q.clone());
            let quotient = eig.eigenvalues.min() / norm;
            if quotient < -1e-10 {
                return Err(Error::NotPsd { index, quotient });
            }
            normalized.push(q / norm);
        }
        Ok(Self {
            p,
            c,
            label: format!("mpls:k={},c={}", normalized.len(), c),
            penalties: normalized,
        })
    }

    fn system(&self, t: &[f64]) -> DMatrix<f64> {
        let mut b = DMatrix::identity(self.p, self.p);
        for (q, &ti) in self.penalties.iter().zip(t) {
            b += q * (self.c * ti);
        }
        b
    }

    fn factor(&self, t: &[f64]) -> Result<Cholesky<f64, nalgebra::Dyn>> {
        Cholesky::new(self.system(t)).ok_or(Error::NotPositiveDefinite {
            pivot: 0,
            value: f64::NAN,
        })
    }

    pub fn penalties(&self) -> &[DMatrix<f64>] {
        &self.penalties
    }
}

impl SmootherFamily for MultiPenaltyPls {
    fn label(&self) -> &str {
        &self.label
    }

    fn info(&self) -> FamilyInfo {
        FamilyInfo {
            kind: "mpls",
            d: None,
            c: Some(self.c),
            penalties: Some(self.penalties.len()),
        }
    }

    fn p(&self) -> usize {
        self.p
    }

    fn dim(&self) -> usize {
        self.penalties.len()
    }

    fn matrix(&self, t: &[f64]) -> Result<DMatrix<f64>> {
        check_param(t, self.dim())?;
        let a = self.factor(t)?.solve(&DMatrix::identity(self.p, self.p));
        Ok((&a + a.transpose()) * 0.5)
    }

    fn apply(&self, t: &[f64], y: &DMatrix<f64>) -> Result<SmootherEval> {
        check_param(t, self.dim())?;
        if y.nrows() != self.p {
            return Err(Error::dims("apply", self.p, y.nrows()));
        }
        let f = self.factor(t)?;
        let trace = f.inverse().trace();
        Ok(SmootherEval {
            fitted: f.solve(y),
            trace,
        })
    }

    fn lipschitz_bound(&self) -> f64 {
        self.c * (self.penalties.len() as f64).sqrt()
    }
}

/// Fitted means `AY`, their directions, and where they came from.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub m_hat: DMatrix<f64>,
    pub d_hat: DMatrix<f64>,
    pub t_selected: Option<Vec<f64>>,
    pub estimated_risk: Option<f64>,
}

/// `M̂ = AY` and its row-normalised directions.
pub fn apply_smoother(a: &DMatrix<f64>, y: &DirectionData) -> Result<FitResult> {
    if a.nrows() != y.p() || a.ncols() != y.p() {
        return Err(Error::dims(
            "apply_smoother",
            format!("{0}x{0}", y.p()),
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    fit_from_means(a * y.y())
}

pub(crate) fn fit_from_means(m_hat: DMatrix<f64>) -> Result<FitResult> {
    let d_hat = normalize_rows(&m_hat)?;
    Ok(FitResult {
        m_hat,
        d_hat,
        t_selected: None,
        estimated_risk: None,
    })
}

/// Command-line family descriptor: `pls:d=2,c=1000`, `run3`, or `runw`.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    Pls { d: usize, c: f64 },
    Run3,
    Runw,
}

impl FamilySpec {
    pub fn build(&self, p: usize) -> Result<Box<dyn SmootherFamily>> {
        Ok(match *self {
            FamilySpec::Pls { d, c } => Box::new(PlsFamily::new(p, d, c)?),
            FamilySpec::Run3 => Box::new(FixedSmoother::span3(p)?),
            FamilySpec::Runw => Box::new(WeightedRunningAverage::new(p)?),
        })
    }

    /// The three estimators compared on the artificial trends.
    pub fn defaults() -> Vec<FamilySpec> {
        vec![
            FamilySpec::Pls {
                d: 2,
                c: DEFAULT_PENALTY_SCALE,
            },
            FamilySpec::Pls {
                d: 1,
                c: DEFAULT_PENALTY_SCALE,
            },
            FamilySpec::Run3,
        ]
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Pls { d, c } => write!(f, "pls:d={d},c={c}"),
            FamilySpec::Run3 => f.write_str("run3"),
            FamilySpec::Runw => f.write_str("runw"),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "run3" => return Ok(FamilySpec::Run3),
            "runw" => return Ok(FamilySpec::Runw),
            _ => {}
        }
        let bad = |msg: &str| Error::InvalidArgument(format!("family '{s}': {msg}"));
        let Some(rest) = s.strip_prefix("pls") else {
            return Err(bad("expected pls:d=N[,c=X], run3 or runw"));
        };
        let mut d = None;
        let mut c = DEFAULT_PENALTY_SCALE;
        let rest = rest.strip_prefix(':').unwrap_or(rest);
        for part in rest.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            match key.trim() {
                "d" => d = Some(value.trim().parse().map_err(|_| bad("d must be a positive integer"))?),
                "c" => c = value.trim().parse().map_err(|_| bad("c must be a number"))?,
                other => return Err(bad(&format!("unknown key '{other}'"))),
            }
        }
        let d = d.ok_or_else(|| bad("missing d"))?;
        if d == 0 {
            return Err(bad("d must be at least 1"));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(bad("c must be positive"));
        }
        Ok(FamilySpec::Pls { d, c })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn span3_p4() {
        let a = span3_running_average(4).unwrap();
        let t = 1.0 / 3.0;
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[2.0 * t, t, 0.0, 0.0, t, t, t, 0.0, 0.0, t, t, t, 0.0, 0.0, t, 2.0 * t],
        );
        assert!((a - expected).amax() < 1e-15);
        assert!(span3_running_average(2).is_err());
    }

    #[test]
    fn odd_span_cases() {
        assert_eq!(odd_span_weighted_average(5, &[1.0]).unwrap(), DMatrix::identity(5, 5));
        let w = [0.4, 0.2, 0.1];
        let a = odd_span_weighted_average(7, &w).unwrap();
        assert!(crate::linalg::asymmetry(&a) < 1e-15);
        for r in a.row_iter() {
            assert!((r.sum() - 1.0).abs() < 1e-14);
        }
        // first row: 0.4 + 0.2 (reflected -1 -> 0) at 0, 0.2 + 0.1 (reflected -2 -> 1) at 1
        assert!((a[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((a[(0, 1)] - 0.3).abs() < 1e-15);
        assert!((a[(0, 2)] - 0.1).abs() < 1e-15);
        assert!(odd_span_weighted_average(4, &[0.5, 0.1]).is_err());
        assert!(odd_span_weighted_average(4, &[0.2, 0.2, 0.2]).is_err());
    }

    #[test]
    fn difference_matrices() {
        let d1 = difference_matrix(3, 1).unwrap();
        assert_eq!(d1, DMatrix::from_row_slice(2, 3, &[1.0, -1.0, 0.0, 0.0, 1.0, -1.0]));
        let d2 = difference_matrix(3, 2).unwrap();
        assert_eq!(d2, DMatrix::from_row_slice(1, 3, &[1.0, -2.0, 1.0]));
        assert!(difference_matrix(3, 3).is_err());
        assert!(difference_matrix(3, 0).is_err());
        for d in 1..5 {
            let delta = difference_matrix(9, d).unwrap();
            assert_eq!(delta.nrows(), 9 - d);
            assert!((delta * DVector::from_element(9, 1.0)).amax() == 0.0);
        }
    }

    #[test]
    fn banded_gram_matches_dense_product() {
        for d in 1..=4 {
            let delta = difference_matrix(12, d).unwrap();
            let dense = delta.transpose() * &delta;
            let band = difference_gram(12, d).unwrap();
            assert!((band.to_dense() - dense).amax() < 1e-12);
        }
    }

    #[test]
    fn spectral_norm_of_second_difference_operator() {
        let delta = difference_matrix(100, 1).unwrap();
        let s = delta.transpose() * &delta;
        let expected = 2.0 - 2.0 * (99.0 * std::f64::consts::PI / 100.0).cos();
        let got = spectral_norm(&s).unwrap();
        assert!(((got - expected) / expected).abs() < 1e-10, "{got} vs {expected}");
    }

    #[test]
    fn penalty_norm_matches_dense_eigen() {
        for d in 1..=3 {
            for p in [d + 1, 7, 30, 120, 200] {
                let gram = difference_gram(p, d).unwrap();
                let dense = gram.to_dense();
                let exact = SymmetricEigen::new(dense.clone()).eigenvalues.max();
                for got in [spectral_norm(&dense).unwrap(), gram.spectral_norm().unwrap()] {
                    assert!(((got - exact) / exact).abs() < 1e-8, "d={d} p={p}: {got} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn pls_identity_at_zero() {
        let f = PlsFamily::new(10, 2, 1000.0).unwrap();
        let a = f.matrix(&[0.0]).unwrap();
        assert!((a - DMatrix::identity(10, 10)).amax() < 1e-15);
        assert!(PlsFamily::new(10, 0, 1.0).is_err());
        assert!(PlsFamily::new(10, 2, 0.0).is_err());
        assert!(f.matrix(&[1.5]).is_err());
    }

    #[test]
    fn pls_apply_matches_matrix() {
        let f = PlsFamily::new(25, 2, 1000.0).unwrap();
        let y = DMatrix::from_fn(25, 3, |i, j| ((i * 7 + j * 3) as f64).sin());
        for t in [0.0, 0.01, 0.3, 1.0] {
            let a = f.matrix(&[t]).unwrap();
            let eval = f.apply(&[t], &y).unwrap();
            assert!((eval.fitted - &a * &y).amax() < 1e-11);
            assert!((eval.trace - a.trace()).abs() < 1e-10);
        }
    }

    #[test]
    fn runw_apply_matches_matrix_and_span3() {
        let f = WeightedRunningAverage::new(8).unwrap();
        let y = DMatrix::from_fn(8, 3, |i, j| (i as f64 * 0.3 + j as f64).cos());
        for s in [0.0, 0.25, 2.0 / 3.0, 1.0] {
            let a = f.matrix(&[s]).unwrap();
            let eval = f.apply(&[s], &y).unwrap();
            assert!((eval.fitted - &a * &y).amax() < 1e-14);
            assert!((eval.trace - a.trace()).abs() < 1e-14);
        }
        assert_eq!(f.matrix(&[0.0]).unwrap(), DMatrix::identity(8, 8));
        let s3 = span3_running_average(8).unwrap();
        assert!((f.matrix(&[2.0 / 3.0]).unwrap() - s3).amax() < 1e-15);
    }

    #[test]
    fn multi_penalty_single_matches_pls() {
        let p = 15;
        let delta = difference_matrix(p, 2).unwrap();
        let q = delta.transpose() * &delta;
        let multi = MultiPenaltyPls::new(p, vec![q], 500.0).unwrap();
        let single = PlsFamily::new(p, 2, 500.0).unwrap();
        for t in [0.0, 0.2, 1.0] {
            let a = multi.matrix(&[t]).unwrap();
            let b = single.matrix(&[t]).unwrap();
            assert!((a - b).amax() < 1e-10);
        }
        assert_eq!(multi.matrix(&[0.0]).unwrap(), DMatrix::identity(p, p));
    }

    #[test]
    fn multi_penalty_rejects_indefinite() {
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -0.5, 0.2]));
        assert!(matches!(
            MultiPenaltyPls::new(3, vec![q], 10.0),
            Err(Error::NotPsd { index: 0, .. })
        ));
    }

    #[test]
    fn apply_smoother_examples() {
        let rows = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let y = DirectionData::new(DMatrix::from_row_slice(3, 3, &rows), None).unwrap();
        let fit = apply_smoother(&DMatrix::identity(3, 3), &y).unwrap();
        assert_eq!(&fit.d_hat, y.y());
        let fit = apply_smoother(&span3_running_average(3).unwrap(), &y).unwrap();
        let third = 1.0 / 3.0;
        for j in 0..3 {
            assert!((fit.m_hat[(1, j)] - third).abs() < 1e-15);
            assert!((fit.d_hat[(1, j)] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        }
        let same = DirectionData::new(
            DMatrix::from_row_slice(3, 3, &[0.0, 0.6, 0.8, 0.0, 0.6, 0.8, 0.0, 0.6, 0.8]),
            None,
        )
        .unwrap();
        let fit = apply_smoother(&span3_running_average(3).unwrap(), &same).unwrap();
        assert!((&fit.d_hat - same.y()).amax() < 1e-15);
    }

    #[test]
    fn apply_smoother_degenerate_row() {
        // antipodal neighbours average to zero in the middle row
        let rows = [1.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0];
        let y = DirectionData::new(DMatrix::from_row_slice(3, 3, &rows), None).unwrap();
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.5, 0.0, 0.5, 0.0, 0.0, 1.0]);
        assert!(matches!(
            apply_smoother(&a, &y),
            Err(Error::DegenerateRow { row: 1, .. })
        ));
    }

    #[test]
    fn family_spec_parsing() {
        assert_eq!(
            "pls:d=2,c=1000".parse::<FamilySpec>().unwrap(),
            FamilySpec::Pls { d: 2, c: 1000.0 }
        );
        assert_eq!(
            "pls:d=1".parse::<FamilySpec>().unwrap(),
            FamilySpec::Pls { d: 1, c: 1000.0 }
        );
        assert_eq!("run3".parse::<FamilySpec>().unwrap(), FamilySpec::Run3);
        assert_eq!("runw".parse::<FamilySpec>().unwrap(), FamilySpec::Runw);
        assert!("pls:c=3".parse::<FamilySpec>().is_err());
        assert!("pls:d=2,c=-1".parse::<FamilySpec>().is_err());
        assert!("spline".parse::<FamilySpec>().is_err());
        assert_eq!(FamilySpec::Pls { d: 2, c: 1000.0 }.to_string(), "pls:d=2,c=1000");
    }
}
