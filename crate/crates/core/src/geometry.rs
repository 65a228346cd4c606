//! Coordinates on the unit sphere in R³.
//!
//! Colatitude `theta` is measured from the north pole `(0, 0, 1)` and lies in
//! `[0, π]`; longitude `phi` is the counter-clockwise angle from the `x1` axis
//! in `[0, 2π)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows with Euclidean norm below this are rejected by [`normalize_rows`].
pub const DEFAULT_ROW_EPS: f64 = 1e-10;

/// Accepted deviation of an input vector's norm from one.
pub const UNIT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalPoint {
    pub theta: f64,
    pub phi: f64,
}

impl SphericalPoint {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite polar coordinates ({theta}, {phi})"
            )));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidArgument(format!("colatitude {theta} outside [0, π]")));
        }
        if !(0.0..TAU).contains(&phi) {
            return Err(Error::InvalidArgument(format!("longitude {phi} outside [0, 2π)")));
        }
        Ok(Self { theta, phi })
    }

    /// Latitude and longitude in degrees; the longitude is wrapped into `[0, 2π)`.
    pub fn from_lat_lon_degrees(lat: f64, lon: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&lat) {
            return Err(Error::InvalidArgument(format!("latitude {lat} outside [-90, 90]")));
        }
        let theta = ((90.0 - lat).to_radians()).clamp(0.0, PI);
        Self::new(theta, wrap_angle(lon.to_radians()))
    }

    pub fn to_lat_lon_degrees(self) -> (f64, f64) {
        (90.0 - self.theta.to_degrees(), self.phi.to_degrees())
    }

    pub fn to_cartesian(self) -> UnitVector3 {
        polar_to_cartesian(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitVector3 {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl UnitVector3 {
    /// Accepts vectors within [`UNIT_TOLERANCE`] of unit length and renormalises them.
    pub fn new(x1: f64, x2: f64, x3: f64) -> Result<Self> {
        let norm = (x1 * x1 + x2 * x2 + x3 * x3).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NotUnitVector { row: 0, norm });
        }
        Ok(Self {
            x1: x1 / norm,
            x2: x2 / norm,
            x3: x3 / norm,
        })
    }

    pub fn as_array(self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn to_polar(self) -> SphericalPoint {
        cartesian_to_polar(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hemisphere {
    North,
    South,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambertPoint {
    pub u: f64,
    pub v: f64,
    pub hemisphere: Hemisphere,
}

/// Four-quadrant arctangent with range `(-π, π]`, written out case by case.
pub fn atan2_branch(v: f64, u: f64) -> Result<f64> {
    if u > 0.0 {
        Ok((v / u).atan())
    } else if u < 0.0 {
        if v >= 0.0 {
            Ok((v / u).atan() + PI)
        } else {
            Ok((v / u).atan() - PI)
        }
    } else if v > 0.0 {
        Ok(FRAC_PI_2)
    } else if v < 0.0 {
        Ok(-FRAC_PI_2)
    } else {
        Err(Error::Atan2Origin)
    }
}

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

pub fn polar_to_cartesian(p: SphericalPoint) -> UnitVector3 {
    let (st, ct) = p.theta.sin_cos();
    let (sp, cp) = p.phi.sin_cos();
    UnitVector3 {
        x1: st * cp,
        x2: st * sp,
        x3: ct,
    }
}

/// Inverse of [`polar_to_cartesian`]. At the poles, where the longitude is
/// undefined, `phi = 0`.
pub fn cartesian_to_polar(x: UnitVector3) -> SphericalPoint {
    let norm = (x.x1 * x.x1 + x.x2 * x.x2 + x.x3 * x.x3).sqrt();
    let (x1, x2, x3) = (x.x1 / norm, x.x2 / norm, x.x3 / norm);
    let theta = x3.clamp(-1.0, 1.0).acos();
    let phi = match atan2_branch(x2, x1) {
        Ok(a) if a >= 0.0 => a,
        Ok(a) => wrap_angle(a + TAU),
        Err(_) => 0.0,
    };
    SphericalPoint { theta, phi }
}

/// Lambert azimuthal equal-area projection of the hemisphere containing `p`.
/// Each hemisphere maps onto the disk of radius √2 centred on its pole;
/// `theta = π/2` counts as northern.
pub fn lambert_project(p: SphericalPoint) -> LambertPoint {
    let (rho, hemisphere) = if p.theta <= FRAC_PI_2 {
        (2.0 * (p.theta / 2.0).sin(), Hemisphere::North)
    } else {
        (2.0 * ((PI - p.theta) / 2.0).sin(), Hemisphere::South)
    };
    let (s, c) = p.phi.sin_cos();
    LambertPoint {
        u: rho * c,
        v: rho * s,
        hemisphere,
    }
}

/// Rescale every row of `b` to unit length, rejecting rows with norm below
/// [`DEFAULT_ROW_EPS`].
pub fn normalize_rows(b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    normalize_rows_with(b, DEFAULT_ROW_EPS)
}

pub fn normalize_rows_with(b: &DMatrix<f64>, eps: f64) -> Result<DMatrix<f64>> {
    let mut out = b.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        let norm = row.norm();
        if !(norm >= eps) {
            return Err(Error::DegenerateRow { row: i, norm });
        }
        row /= norm;
    }
    Ok(out)
}

/// Rows of a `p × 3` matrix as polar coordinates.
pub fn rows_to_polar(y: &DMatrix<f64>) -> Result<Vec<SphericalPoint>> {
    if y.ncols() != 3 {
        return Err(Error::dims("rows_to_polar", "3 columns", y.ncols()));
    }
    Ok(y.row_iter()
        .map(|r| {
            cartesian_to_polar(UnitVector3 {
                x1: r[0],
                x2: r[1],
                x3: r[2],
            })
        })
        .collect())
}

/// Stack polar points into a `p × 3` matrix of unit rows.
pub fn polar_to_rows(points: &[SphericalPoint]) -> DMatrix<f64> {
    DMatrix::from_fn(points.len(), 3, |i, j| polar_to_cartesian(points[i]).as_array()[j])
}
