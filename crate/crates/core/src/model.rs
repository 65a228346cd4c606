//! Observed directions, the mean field they scatter around, and the loss,
//! risk and estimated risk of a linear smoother `A` applied to them.
//!
//! Everything here depends on the error law only through the dispersion
//! `gamma2 = 1 - lambda²`, the trace of the per-observation covariance.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geometry::UNIT_TOLERANCE;

/// Eigenvalues closer than this are treated as one eigenspace.
pub const EIGEN_CLUSTER_TOL: f64 = 1e-9;

/// Tolerance for projector identities in [`SpectralSmoother::new`].
pub const PROJECTION_TOL: f64 = 1e-8;

const SYMMETRY_TOL: f64 = 1e-8;

/// `p` observed unit vectors in `R^q`, one per row, ordered by `times`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionData {
    y: DMatrix<f64>,
    times: Option<Vec<f64>>,
}

impl DirectionData {
    /// Rows must be unit length within 1e-8; they are renormalised exactly.
    /// Times, when given, must be finite and non-decreasing.
    pub fn new(y: DMatrix<f64>, times: Option<Vec<f64>>) -> Result<Self> {
        let p = y.nrows();
        if p < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 observations, got {p}")));
        }
        if y.ncols() == 0 {
            return Err(Error::InvalidArgument("observations have no coordinates".into()));
        }
        let mut y = y;
        for (row, mut r) in y.row_iter_mut().enumerate() {
            let norm = r.norm();
            if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
                return Err(Error::NotUnitVector { row, norm });
            }
            r /= norm;
        }
        if let Some(t) = &times {
            if t.len() != p {
                return Err(Error::dims("DirectionData times", p, t.len()));
            }
            if t.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument("non-finite time stamp".into()));
            }
            if let Some(i) = t.windows(2).position(|w| w[1] < w[0]) {
                return Err(Error::InvalidArgument(format!(
                    "times decrease between rows {i} and {}",
                    i + 1
                )));
            }
        }
        Ok(Self { y, times })
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn times(&self) -> Option<&[f64]> {
        self.times.as_deref()
    }

    pub fn p(&self) -> usize {
        self.y.nrows()
    }

    pub fn q(&self) -> usize {
        self.y.ncols()
    }
}

/// Ground truth for synthetic data: mean vectors `m_i = lambda * mu_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanField {
    m: DMatrix<f64>,
    mu: DMatrix<f64>,
    lambda: f64,
    gamma2: f64,
}

impl MeanField {
    pub fn new(mu: DMatrix<f64>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "resultant length {lambda} outside (0, 1]"
            )));
        }
        for (row, r) in mu.row_iter().enumerate() {
            let norm = r.norm();
            if (norm - 1.0).abs() > UNIT_TOLERANCE {
                return Err(Error::NotUnitVector { row, norm });
            }
        }
        Ok(Self {
            m: &mu * lambda,
            mu,
            lambda,
            gamma2: 1.0 - lambda * lambda,
        })
    }

    pub fn m(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn mu(&self) -> &DMatrix<f64> {
        &self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    pub fn p(&self) -> usize {
        self.m.nrows()
    }
}

fn check_square(a: &DMatrix<f64>, p: usize, context: &'static str) -> Result<()> {
    if a.nrows() != p || a.ncols() != p {
        return Err(Error::dims(
            context,
            format!("{p}x{p}"),
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    Ok(())
}

fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    let scale = a.amax().max(1.0);
    let asym = crate::linalg::asymmetry(a);
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::InvalidArgument(format!(
            "smoother is not symmetric (max asymmetry {asym:e})"
        )));
    }
    Ok(())
}

/// `p^{-1} |AY - M|²`.
pub fn extrinsic_loss(a: &DMatrix<f64>, y: &DirectionData, truth: &MeanField) -> Result<f64> {
    check_square(a, y.p(), "extrinsic_loss")?;
    extrinsic_loss_fitted(&(a * y.y()), truth)
}

/// Extrinsic loss of an already fitted mean matrix `AY`.
pub fn extrinsic_loss_fitted(fitted: &DMatrix<f64>, truth: &MeanField) -> Result<f64> {
    if fitted.shape() != truth.m().shape() {
        return Err(Error::dims(
            "extrinsic_loss",
            format!("{:?}", truth.m().shape()),
            format!("{:?}", fitted.shape()),
        ));
    }
    Ok((fitted - truth.m()).norm_squared() / fitted.nrows() as f64)
}

/// Exact risk `p^{-1}[gamma2 tr(A²) + tr((I - A)² MM')]` of a symmetric smoother.
pub fn true_risk(a: &DMatrix<f64>, truth: &MeanField) -> Result<f64> {
    let p = truth.p();
    check_square(a, p, "true_risk")?;
    check_symmetric(a)?;
    // tr(A²) = |A|² and tr((I-A)²MM') = |(I-A)M|² for symmetric A
    let resid = truth.m() - a * truth.m();
    Ok((truth.gamma2() * a.norm_squared() + resid.norm_squared()) / p as f64)
}

/// First-difference dispersion estimate `[2(p-1)]^{-1} Σ |y_i - y_{i-1}|²`.
pub fn gamma2_hat(y: &DirectionData) -> f64 {
    let m = y.y();
    let p = m.nrows();
    let sum: f64 = (1..p).map(|i| (m.row(i) - m.row(i - 1)).norm_squared()).sum();
    sum / (2.0 * (p - 1) as f64)
}

/// Estimated risk `p^{-1}[|Y - AY|² + (2 tr(A) - p) gamma2hat]`. May be negative.
pub fn estimated_risk(a: &DMatrix<f64>, y: &DirectionData, gamma2hat: f64) -> Result<f64> {
    check_square(a, y.p(), "estimated_risk")?;
    let fitted = a * y.y();
    estimated_risk_from_parts(y, &fitted, a.trace(), gamma2hat)
}

/// [`estimated_risk`] from the fitted matrix `AY` and `tr(A)`.
///
/// Evaluated as `|Y - AY|²/p + (2 tr(A)/p - 1) gamma2hat`, so the identity
/// smoother yields `gamma2hat` bit for bit.
pub fn estimated_risk_from_parts(y: &DirectionData, fitted: &DMatrix<f64>, trace: f64, gamma2hat: f64) -> Result<f64> {
    if fitted.shape() != y.y().shape() {
        return Err(Error::dims(
            "estimated_risk",
            format!("{:?}", y.y().shape()),
            format!("{:?}", fitted.shape()),
        ));
    }
    if !(gamma2hat >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dispersion estimate {gamma2hat} is negative"
        )));
    }
    let p = y.p() as f64;
    let resid = (y.y() - fitted).norm_squared();
    Ok(resid / p + (2.0 * trace / p - 1.0) * gamma2hat)
}

/// Estimated risk in its bias-corrected form
/// `p^{-1}[gamma2hat tr(A²) + tr((I - A)²(YY' - gamma2hat I))]`.
///
/// Computed with explicit matrix products; it is a cross-check on
/// [`estimated_risk`], not a fast path.
pub fn estimated_risk_bias_form(a: &DMatrix<f64>, y: &DirectionData, gamma2hat: f64) -> Result<f64> {
    let p = y.p();
    check_square(a, p, "estimated_risk_bias_form")?;
    let eye = DMatrix::<f64>::identity(p, p);
    let b = &eye - a;
    let b2 = &b * &b;
    let g = y.y() * y.y().transpose() - &eye * gamma2hat;
    let tr_a2 = (a * a).trace();
    let tr_b2g = (&b2 * &g).trace();
    Ok((gamma2hat * tr_a2 + tr_b2g) / p as f64)
}

/// A symmetric matrix as `Σ a_k P_k` over its distinct eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralSmoother {
    eigenvalues: Vec<f64>,
    projections: Vec<DMatrix<f64>>,
    counts: Vec<f64>,
}

impl SpectralSmoother {
    /// Validates that the `P_k` are symmetric, idempotent and mutually
    /// orthogonal.
    pub fn new(eigenvalues: Vec<f64>, projections: Vec<DMatrix<f64>>) -> Result<Self> {
        if eigenvalues.len() != projections.len() {
            return Err(Error::dims("SpectralSmoother", eigenvalues.len(), projections.len()));
        }
        let Some(first) = projections.first() else {
            return Err(Error::InvalidProjection("no eigenspaces".into()));
        };
        let p = first.nrows();
        for (k, pk) in projections.iter().enumerate() {
            if pk.nrows() != p || pk.ncols() != p {
                return Err(Error::InvalidProjection(format!("P_{k} is not {p}x{p}")));
            }
            if crate::linalg::asymmetry(pk) > PROJECTION_TOL {
                return Err(Error::InvalidProjection(format!("P_{k} is not symmetric")));
            }
            if (pk * pk - pk).amax() > PROJECTION_TOL {
                return Err(Error::InvalidProjection(format!("P_{k} is not idempotent")));
            }
            for (j, pj) in projections.iter().enumerate().take(k) {
                if (pj * pk).amax() > PROJECTION_TOL {
                    return Err(Error::InvalidProjection(format!("P_{j} and P_{k} are not orthogonal")));
                }
            }
        }
        let counts = projections.iter().map(|pk| pk.trace()).collect();
        Ok(Self {
            eigenvalues,
            projections,
            counts,
        })
    }

    /// Eigendecomposition of a symmetric matrix, grouping eigenvalues within
    /// [`EIGEN_CLUSTER_TOL`].
    pub fn from_matrix(a: &DMatrix<f64>) -> Result<Self> {
        check_square(a, a.nrows(), "SpectralSmoother::from_matrix")?;
        check_symmetric(a)?;
        let eig = SymmetricEigen::new(a.clone());
        let mut order: Vec<usize> = (0..a.nrows()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

        let mut eigenvalues = Vec::new();
        let mut projections: Vec<DMatrix<f64>> = Vec::new();
        let mut group: Vec<usize> = Vec::new();
        let flush = |group: &mut Vec<usize>, eigenvalues: &mut Vec<f64>, projections: &mut Vec<DMatrix<f64>>| {
            if group.is_empty() {
                return;
            }
            let value = group.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / group.len() as f64;
            let mut pk = DMatrix::zeros(a.nrows(), a.nrows());
            for &i in group.iter() {
                let v = eig.eigenvectors.column(i);
                pk += v * v.transpose();
            }
            eigenvalues.push(value);
            projections.push(pk);
            group.clear();
        };
        for &i in &order {
            if let Some(&prev) = group.last() {
                let gap = eig.eigenvalues[i] - eig.eigenvalues[prev];
                if gap > EIGEN_CLUSTER_TOL * eig.eigenvalues[i].abs().max(1.0) {
                    flush(&mut group, &mut eigenvalues, &mut projections);
                }
            }
            group.push(i);
        }
        flush(&mut group, &mut eigenvalues, &mut projections);
        Self::new(eigenvalues, projections)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projections(&self) -> &[DMatrix<f64>] {
        &self.projections
    }

    /// `tr(P_k)`, the multiplicity of each eigenvalue.
    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn p(&self) -> usize {
        self.projections[0].nrows()
    }

    /// True when the projections sum to the identity.
    pub fn is_complete(&self) -> bool {
        let p = self.p();
        let sum = self.projections.iter().fold(DMatrix::zeros(p, p), |acc, pk| acc + pk);
        (sum - DMatrix::<f64>::identity(p, p)).amax() <= PROJECTION_TOL
    }

    /// `Σ a_k P_k`.
    pub fn assemble(&self) -> DMatrix<f64> {
        self.assemble_with(&self.eigenvalues)
    }

    /// `Σ c_k P_k` for replacement coefficients `c`.
    pub fn assemble_with(&self, coeffs: &[f64]) -> DMatrix<f64> {
        let p = self.p();
        self.projections
            .iter()
            .zip(coeffs)
            .fold(DMatrix::zeros(p, p), |acc, (pk, &c)| acc + pk * c)
    }
}

/// Per-eigenspace variance `tau`, signal `w`, the shrinkage coefficient that
/// minimises each term, and the risk at the smoother's own eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskBreakdown {
    pub tau: Vec<f64>,
    pub w: Vec<f64>,
    pub a_opt: Vec<f64>,
    pub total: f64,
}

impl RiskBreakdown {
    /// `Σ a_k² tau_k + (1 - a_k)² w_k` at arbitrary coefficients.
    pub fn total_at(&self, coeffs: &[f64]) -> f64 {
        self.tau
            .iter()
            .zip(&self.w)
            .zip(coeffs)
            .map(|((t, w), a)| a * a * t + (1.0 - a) * (1.0 - a) * w)
            .sum()
    }

    /// The same total written around the optimal coefficients:
    /// `(a_k - a*_k)²(tau_k + w_k) + tau_k a*_k` where `w_k >= 0`, and the
    /// raw term otherwise.
    pub fn total_shrinkage_form(&self, coeffs: &[f64]) -> f64 {
        self.tau
            .iter()
            .zip(&self.w)
            .zip(&self.a_opt)
            .zip(coeffs)
            .map(|(((&t, &w), &opt), &a)| {
                if w >= 0.0 {
                    (a - opt) * (a - opt) * (t + w) + t * opt
                } else {
                    a * a * t + (1.0 - a) * (1.0 - a) * w
                }
            })
            .sum()
    }
}

fn shrinkage(tau: f64, w: f64) -> f64 {
    if w < 0.0 || tau + w <= 0.0 {
        0.0
    } else {
        w / (tau + w)
    }
}

/// Spectral form of [`true_risk`] with oracle shrinkage coefficients.
pub fn spectral_risk(spec: &SpectralSmoother, truth: &MeanField) -> Result<RiskBreakdown> {
    let p = spec.p();
    if truth.p() != p {
        return Err(Error::dims("spectral_risk", p, truth.p()));
    }
    let pf = p as f64;
    let tau: Vec<f64> = spec.counts.iter().map(|c| truth.gamma2() * c / pf).collect();
    let w: Vec<f64> = spec
        .projections
        .iter()
        .map(|pk| (pk * truth.m()).norm_squared() / pf)
        .collect();
    Ok(breakdown(spec, tau, w))
}

/// Spectral form of [`estimated_risk`]; coefficients are clipped to zero
/// where the estimated signal is negative.
pub fn spectral_estimated_risk(spec: &SpectralSmoother, y: &DirectionData, gamma2hat: f64) -> Result<RiskBreakdown> {
    let p = spec.p();
    if y.p() != p {
        return Err(Error::dims("spectral_estimated_risk", p, y.p()));
    }
    let pf = p as f64;
    let tau: Vec<f64> = spec.counts.iter().map(|c| gamma2hat * c / pf).collect();
    // E p^{-1}|P_k Y|² = w_k + tau_k, so tau (not tau²) is subtracted
    let w: Vec<f64> = spec
        .projections
        .iter()
        .zip(&tau)
        .map(|(pk, t)| (pk * y.y()).norm_squared() / pf - t)
        .collect();
    Ok(breakdown(spec, tau, w))
}

fn breakdown(spec: &SpectralSmoother, tau: Vec<f64>, w: Vec<f64>) -> RiskBreakdown {
    let a_opt = tau.iter().zip(&w).map(|(&t, &w)| shrinkage(t, w)).collect();
    let mut out = RiskBreakdown {
        tau,
        w,
        a_opt,
        total: 0.0,
    };
    out.total = out.total_at(&spec.eigenvalues);
    out
}
