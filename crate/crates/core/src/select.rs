//! Adaptive choice of the smoothing parameter by minimising estimated risk,
//! and comparative risk tables across families.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{fit_from_means, FamilyInfo, FitResult, FixedSmoother, SmootherFamily, SmoothingDirection};
use crate::model::{estimated_risk_from_parts, gamma2_hat, true_risk, DirectionData, MeanField};

/// Largest parameter dimension searched on a full grid.
pub const MAX_GRID_DIM: usize = 3;

/// Risks within this distance of the grid minimum count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionConfig {
    pub grid_points_per_axis: usize,
    pub refine: bool,
    pub refine_tolerance: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            grid_points_per_axis: 201,
            refine: true,
            refine_tolerance: 1e-6,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points_per_axis < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 points per axis, got {}",
                self.grid_points_per_axis
            )));
        }
        if !(self.refine_tolerance > 0.0) {
            return Err(Error::InvalidArgument("refine tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Distance between adjacent grid values along one axis.
    pub fn spacing(&self) -> f64 {
        1.0 / (self.grid_points_per_axis - 1) as f64
    }
}

/// Outcome of a search over the parameter box.
#[derive(Debug, Clone)]
pub struct Selection {
    pub t_hat: Vec<f64>,
    /// Estimated risk at `t_hat`.
    pub estimated_risk: f64,
    /// Smallest estimated risk among grid points; never below `estimated_risk`.
    pub grid_risk: f64,
    pub fit: FitResult,
}

/// Oracle parameter minimising the true risk.
#[derive(Debug, Clone)]
pub struct OracleSelection {
    pub t_tilde: Vec<f64>,
    pub risk: f64,
}

struct SearchResult {
    t: Vec<f64>,
    value: f64,
    grid_value: f64,
}

fn grid_point(index: usize, k: usize, n: usize) -> Vec<f64> {
    let step = 1.0 / (n - 1) as f64;
    let mut rest = index;
    let mut t = vec![0.0; k];
    for tj in t.iter_mut().rev() {
        let i = rest % n;
        rest /= n;
        // exact endpoints
        *tj = if i == n - 1 { 1.0 } else { i as f64 * step };
    }
    t
}

fn smoothing_score(t: &[f64], dirs: &[SmoothingDirection]) -> f64 {
    t.iter()
        .zip(dirs)
        .map(|(x, d)| match d {
            SmoothingDirection::Increasing => *x,
            SmoothingDirection::Decreasing => -*x,
        })
        .sum()
}

/// Exhaustive grid search with optional golden-section refinement.
///
/// Grid points are evaluated in parallel; the reduction walks them in index
/// order so the result does not depend on scheduling.
fn search<F>(k: usize, dirs: &[SmoothingDirection], cfg: &SelectionConfig, objective: F) -> Result<SearchResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    cfg.validate()?;
    if k > MAX_GRID_DIM {
        return Err(Error::InvalidArgument(format!(
            "grid search supports at most {MAX_GRID_DIM} parameters, family has {k}"
        )));
    }
    if k == 0 {
        let value = objective(&[])?;
        return Ok(SearchResult {
            t: Vec::new(),
            value,
            grid_value: value,
        });
    }
    let n = cfg.grid_points_per_axis;
    let total = n.pow(k as u32);
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|i| objective(&grid_point(i, k, n)))
        .collect::<Result<_>>()?;

    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::NonConvergence { iterations: total });
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if v - min > TIE_TOLERANCE * min.abs().max(1.0) {
            continue;
        }
        let score = smoothing_score(&grid_point(i, k, n), dirs);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((i, score));
        }
    }
    let (index, _) = best.expect("minimum is attained");
    let mut t = grid_point(index, k, n);
    let grid_value = values[index];
    let mut value = grid_value;

    if cfg.refine {
        let h = cfg.spacing();
        for axis in 0..k {
            let lo = (t[axis] - h).max(0.0);
            let hi = (t[axis] + h).min(1.0);
            let mut probe = t.clone();
            let mut at = |x: f64| -> Result<f64> {
                probe[axis] = x;
                objective(&probe)
            };
            let (x, v) = golden_section(lo, hi, cfg.refine_tolerance, &mut at)?;
            // improvements inside the tie tolerance are rounding noise
            if v < value - TIE_TOLERANCE * value.abs().max(1.0) {
                t[axis] = x;
                value = v;
            }
        }
    }
    Ok(SearchResult { t, value, grid_value })
}

/// Golden-section search for a minimum of `f` on `[a, b]`; returns the best
/// point evaluated.
fn golden_section<F>(mut a: f64, mut b: f64, tol: f64, f: &mut F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut best = if fd < fc { (d, fd) } else { (c, fc) };
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
            if fd < best.1 {
                best = (d, fd);
            }
        }
    }
    Ok(best)
}

fn check_rows(family: &dyn SmootherFamily, p: usize) -> Result<()> {
    if family.p() != p {
        return Err(Error::dims("family size", p, family.p()));
    }
    Ok(())
}

/// Parameter minimising the estimated risk over the family, and the fit there.
pub fn minimize_estimated_risk(
    family: &dyn SmootherFamily,
    y: &DirectionData,
    gamma2hat: f64,
    cfg: &SelectionConfig,
) -> Result<Selection> {
    check_rows(family, y.p())?;
    let objective = |t: &[f64]| -> Result<f64> {
        let eval = family.apply(t, y.y())?;
        estimated_risk_from_parts(y, &eval.fitted, eval.trace, gamma2hat)
    };
    let found = search(family.dim(), &family.smoothing_direction(), cfg, objective)?;
    let eval = family.apply(&found.t, y.y())?;
    let mut fit = fit_from_means(eval.fitted)?;
    fit.t_selected = Some(found.t.clone());
    fit.estimated_risk = Some(found.value);
    Ok(Selection {
        t_hat: found.t,
        estimated_risk: found.value,
        grid_risk: found.grid_value,
        fit,
    })
}

/// Parameter minimising the true risk, available only when the mean field is
/// known.
pub fn oracle_parameter(
    family: &dyn SmootherFamily,
    truth: &MeanField,
    cfg: &SelectionConfig,
) -> Result<OracleSelection> {
    check_rows(family, truth.p())?;
    let objective = |t: &[f64]| -> Result<f64> { true_risk(&family.matrix(t)?, truth) };
    let found = search(family.dim(), &family.smoothing_direction(), cfg, objective)?;
    Ok(OracleSelection {
        t_tilde: found.t,
        risk: found.value,
    })
}

/// One row of a risk table.
#[derive(Debug, Clone, Serialize)]
pub struct RiskEntry {
    pub label: String,
    #[serde(flatten)]
    pub info: FamilyInfo,
    pub t_hat: Vec<f64>,
    /// Grid resolution behind `t_hat`; absent for parameterless candidates.
    pub grid_spacing: Option<f64>,
    pub grid_risk: f64,
    pub estimated_risk: f64,
    #[serde(skip)]
    pub fit: FitResult,
}

/// Estimated risks of competing estimators, the naive one included.
#[derive(Debug, Clone, Serialize)]
pub struct RiskReport {
    pub gamma2_hat: f64,
    pub naive_risk: f64,
    pub entries: Vec<RiskEntry>,
    /// Labels ordered by increasing estimated risk, `"naive"` included.
    pub ranking: Vec<String>,
}

pub const NAIVE_LABEL: &str = "naive";

impl RiskReport {
    /// Estimated risk of a label in the ranking.
    pub fn risk_of(&self, label: &str) -> Option<f64> {
        if label == NAIVE_LABEL {
            return Some(self.naive_risk);
        }
        self.entries.iter().find(|e| e.label == label).map(|e| e.estimated_risk)
    }

    /// The best smoother, or `None` when the raw data rank first.
    pub fn winner(&self) -> Option<&RiskEntry> {
        let first = self.ranking.first()?;
        self.entries.iter().find(|e| &e.label == first)
    }
}

/// Selects within each family, adds the span-3 running average when absent,
/// and ranks everything against the naive estimator.
pub fn risk_table(families: &[&dyn SmootherFamily], y: &DirectionData, cfg: &SelectionConfig) -> Result<RiskReport> {
    if families.is_empty() {
        return Err(Error::InvalidArgument("no candidate families".into()));
    }
    cfg.validate()?;
    let g = gamma2_hat(y);
    let p = y.p();
    let mut entries = Vec::with_capacity(families.len() + 1);
    for family in families {
        entries.push(entry(*family, y, g, cfg)?);
    }
    if p >= 3 && !entries.iter().any(|e| e.info.kind == "run3") {
        let run3 = FixedSmoother::span3(p)?;
        entries.push(entry(&run3, y, g, cfg)?);
    }
    for (i, e) in entries.iter().enumerate() {
        if e.label == NAIVE_LABEL || entries[..i].iter().any(|f| f.label == e.label) {
            return Err(Error::InvalidArgument(format!(
                "duplicate candidate label '{}'",
                e.label
            )));
        }
    }

    let naive_risk = estimated_risk_from_parts(y, y.y(), p as f64, g)?;
    debug_assert_eq!(naive_risk.to_bits(), g.to_bits());

    let mut ranked: Vec<(&str, f64)> = entries
        .iter()
        .map(|e| (e.label.as_str(), e.estimated_risk))
        .chain(std::iter::once((NAIVE_LABEL, naive_risk)))
        .collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
    let ranking = ranked.into_iter().map(|(l, _)| l.to_string()).collect();
    Ok(RiskReport {
        gamma2_hat: g,
        naive_risk,
        entries,
        ranking,
    })
}

fn entry(family: &dyn SmootherFamily, y: &DirectionData, g: f64, cfg: &SelectionConfig) -> Result<RiskEntry> {
    let sel = minimize_estimated_risk(family, y, g, cfg)?;
    Ok(RiskEntry {
        label: family.label().to_string(),
        info: family.info(),
        t_hat: sel.t_hat,
        grid_spacing: (family.dim() > 0).then(|| cfg.spacing()),
        grid_risk: sel.grid_risk,
        estimated_risk: sel.estimated_risk,
        fit: sel.fit,
    })
}

/// Fit of the naive estimator `A = I`.
pub fn naive_fit(y: &DirectionData) -> FitResult {
    FitResult {
        m_hat: y.y().clone(),
        d_hat: y.y().clone(),
        t_selected: None,
        estimated_risk: Some(gamma2_hat(y)),
    }
}

/// Estimated risk at every grid point of a one-parameter family, in grid order.
pub fn risk_profile(
    family: &dyn SmootherFamily,
    y: &DirectionData,
    gamma2hat: f64,
    points: usize,
) -> Result<Vec<(f64, f64)>> {
    if family.dim() != 1 {
        return Err(Error::InvalidArgument(
            "risk profile needs a one-parameter family".into(),
        ));
    }
    check_rows(family, y.p())?;
    if points < 2 {
        return Err(Error::InvalidArgument("profile needs at least 2 points".into()));
    }
    (0..points)
        .into_par_iter()
        .map(|i| {
            let t = grid_point(i, 1, points);
            let eval = family.apply(&t, y.y())?;
            Ok((t[0], estimated_risk_from_parts(y, &eval.fitted, eval.trace, gamma2hat)?))
        })
        .collect()
}

/// Identity candidate for tests and bindings that want it in the table.
pub fn identity_family(p: usize) -> FixedSmoother {
    FixedSmoother::identity(p)
}
