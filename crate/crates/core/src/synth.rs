//! Artificial directional trend data: Fisher-Langevin errors rotated onto a
//! known trend of mean directions.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{polar_to_cartesian, wrap_angle, SphericalPoint, UnitVector3};
use crate::model::{DirectionData, MeanField};

/// The north pole `(0, 0, 1)`, mean direction of the unrotated errors.
pub const NU0: [f64; 3] = [0.0, 0.0, 1.0];

/// Below this value of `1 + μ₃` the rotation falls back to `diag(1, -1, -1)`.
pub const POLE_EPS: f64 = 1e-12;

/// Above this precision the sampler switches to its overflow-free form.
pub const LARGE_KAPPA: f64 = 300.0;

/// Draws behind the resultant-length oracle.
pub const ORACLE_DRAWS: usize = 1_000_000;

const ORACLE_SEED: u64 = 0x0d1e_c7a1_5eed_0001;

/// Points on which trend ranges are checked.
pub const RANGE_PROBE_POINTS: usize = 10_000;

/// Generator for `seed`, positioned on substream `stream`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `δ/κ - 1`, the cosine of the angle to the mean direction, for uniform `u1`.
pub fn fisher_langevin_cos(kappa: f64, u1: f64) -> f64 {
    let u1 = u1.clamp(0.0, 1.0);
    let delta = if kappa <= LARGE_KAPPA {
        (u1 * (2.0 * kappa).exp_m1()).ln_1p()
    } else {
        2.0 * kappa + (u1 + (1.0 - u1) * (-2.0 * kappa).exp()).ln()
    };
    (delta / kappa - 1.0).clamp(-1.0, 1.0)
}

/// A Fisher-Langevin variate with mean direction [`NU0`] and precision
/// `kappa > 0`, from two uniforms on `[0, 1]`.
pub fn sample_fisher_langevin(kappa: f64, u1: f64, u2: f64) -> UnitVector3 {
    assert!(kappa > 0.0, "precision must be positive, got {kappa}");
    let c = fisher_langevin_cos(kappa, u1);
    let s = (1.0 - c * c).max(0.0).sqrt();
    let phi = 2.0 * PI * u2.clamp(0.0, 1.0);
    UnitVector3 {
        x1: s * phi.cos(),
        x2: s * phi.sin(),
        x3: c,
    }
}

/// Rotation `Ω(μ) = (ν₀ + μ)(ν₀ + μ)' / (1 + ν₀'μ) - I` carrying [`NU0`] to `mu`.
pub fn rotation_to(mu: UnitVector3) -> Matrix3<f64> {
    let c = 1.0 + mu.x3;
    if c <= POLE_EPS {
        return Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0));
    }
    let v = Vector3::new(mu.x1, mu.x2, c);
    // |v|² = 2(1 + μ₃) for unit μ; dividing by it keeps Ω orthogonal near the pole
    v * v.transpose() * (2.0 / v.norm_squared()) - Matrix3::identity()
}

type Curve = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A trend of mean directions `(f(t), g(t))` in polar coordinates, `t ∈ [0, 1]`.
#[derive(Clone)]
pub struct TrendSpec {
    label: String,
    f: Curve,
    g: Curve,
    wrap_longitude: bool,
    reflect_colatitude: bool,
}

impl fmt::Debug for TrendSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TrendSpec")
            .field("label", &self.label)
            .field("wrap_longitude", &self.wrap_longitude)
            .field("reflect_colatitude", &self.reflect_colatitude)
            .finish_non_exhaustive()
    }
}

impl TrendSpec {
    /// A trend whose `f` must stay in `[0, π]` and `g` in `[0, 2π)`.
    pub fn new<F, G>(label: impl Into<String>, f: F, g: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            f: Arc::new(f),
            g: Arc::new(g),
            wrap_longitude: false,
            reflect_colatitude: false,
        }
    }

    /// Reduce longitudes modulo 2π.
    pub fn with_longitude_wrapping(mut self) -> Self {
        self.wrap_longitude = true;
        self
    }

    /// Read a colatitude outside `[0, π]` as the same point reached over the
    /// pole: `(-θ, φ)` becomes `(θ, φ + π)`, and `θ > π` becomes
    /// `(2π - θ, φ + π)`. Implies longitude wrapping.
    pub fn with_colatitude_reflection(mut self) -> Self {
        self.reflect_colatitude = true;
        self.wrap_longitude = true;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Unadjusted `(f(t), g(t))`.
    pub fn raw(&self, t: f64) -> (f64, f64) {
        ((self.f)(t), (self.g)(t))
    }

    /// Mean direction at `t` after the range adjustments in force.
    pub fn evaluate(&self, t: f64) -> Result<SphericalPoint> {
        let (mut theta, mut phi) = self.raw(t);
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "trend '{}' is not finite at t = {t}",
                self.label
            )));
        }
        if self.reflect_colatitude {
            theta = theta.rem_euclid(2.0 * PI);
            if theta > PI {
                theta = 2.0 * PI - theta;
                phi += PI;
            }
        }
        if self.wrap_longitude {
            phi = wrap_angle(phi);
        }
        SphericalPoint::new(theta, phi).map_err(|_| {
            Error::InvalidArgument(format!(
                "trend '{}' leaves the coordinate range at t = {t}: theta = {theta}, phi = {phi}",
                self.label
            ))
        })
    }

    /// Checks the range on an even grid over `[0, 1]`.
    pub fn validate(&self) -> Result<()> {
        let n = RANGE_PROBE_POINTS;
        for i in 0..n {
            self.evaluate(i as f64 / (n - 1) as f64)?;
        }
        Ok(())
    }

    /// Adjustments that change at least one probed value, described for
    /// output metadata.
    pub fn range_notes(&self) -> Vec<String> {
        let n = RANGE_PROBE_POINTS;
        let probe = || (0..n).map(|i| self.raw(i as f64 / (n - 1) as f64));
        let mut notes = Vec::new();
        if self.reflect_colatitude && probe().any(|(th, _)| !(0.0..=PI).contains(&th)) {
            notes.push(
                "colatitude outside [0, pi] reflected over the pole: (-theta, phi) -> (theta, phi + pi)".to_string(),
            );
        }
        if self.wrap_longitude
            && probe().any(|(th, ph)| {
                !(0.0..2.0 * PI).contains(&ph) || (self.reflect_colatitude && !(0.0..=PI).contains(&th))
            })
        {
            notes.push("longitude reduced modulo 2 pi into [0, 2 pi)".to_string());
        }
        notes
    }
}

/// `f(t) = .3π(t + .2 + .15 sin 36πt)`, `g(t) = 4πt`.
pub fn wobble() -> TrendSpec {
    TrendSpec::new(
        "wobble",
        |t| 0.3 * PI * (t + 0.2 + 0.15 * (36.0 * PI * t).sin()),
        |t| 4.0 * PI * t,
    )
    .with_longitude_wrapping()
}

/// `f(t) = .8π(t - .5)`, `g(t) = 4π sin 6πt`.
pub fn bat() -> TrendSpec {
    TrendSpec::new("bat", |t| 0.8 * PI * (t - 0.5), |t| 4.0 * PI * (6.0 * PI * t).sin()).with_colatitude_reflection()
}

/// Piecewise-constant colatitude with five jumps, `g(t) = 2πt`.
pub fn jumps() -> TrendSpec {
    TrendSpec::new(
        "jumps",
        |t| {
            let level = match t {
                t if t <= 0.15 => 0.2,
                t if t <= 0.3 => 0.1,
                t if t <= 0.45 => 0.4,
                t if t <= 0.65 => 0.2,
                t if t <= 0.8 => 0.3,
                _ => 0.4,
            };
            level * PI
        },
        |t| 2.0 * PI * t,
    )
    .with_longitude_wrapping()
}

pub fn builtin_trends() -> Vec<TrendSpec> {
    vec![wobble(), bat(), jumps()]
}

pub fn builtin_trend(name: &str) -> Option<TrendSpec> {
    builtin_trends()
        .into_iter()
        .find(|t| t.label().eq_ignore_ascii_case(name))
}

/// Trend through knots `(t, θ, φ)`, linear in between and constant beyond
/// the end knots. Knots are sorted by `t`.
pub fn piecewise_linear_trend(label: impl Into<String>, mut knots: Vec<[f64; 3]>) -> Result<TrendSpec> {
    if knots.is_empty() {
        return Err(Error::InvalidArgument("trend needs at least one knot".into()));
    }
    if knots.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("trend knots must be finite".into()));
    }
    knots.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let knots = Arc::new(knots);
    let interp = |col: usize, knots: Arc<Vec<[f64; 3]>>| {
        move |t: f64| {
            let k = knots.partition_point(|r| r[0] <= t);
            if k == 0 {
                return knots[0][col];
            }
            if k == knots.len() {
                return knots[k - 1][col];
            }
            let (a, b) = (knots[k - 1], knots[k]);
            let w = (t - a[0]) / (b[0] - a[0]);
            a[col] + w * (b[col] - a[col])
        }
    };
    Ok(TrendSpec::new(label, interp(1, knots.clone()), interp(2, knots)).with_colatitude_reflection())
}

/// Reads a trend file: CSV with header `t,theta,phi` (radians).
pub fn load_trend_file(path: &Path) -> Result<TrendSpec> {
    let name = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(&name, e))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(&name, e))?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    if headers != ["t", "theta", "phi"] {
        return Err(Error::Parse {
            path: name,
            line: 1,
            message: format!("expected header t,theta,phi, found {}", headers.join(",")),
        });
    }
    let mut knots = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&name, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let mut row = [0.0; 3];
        for (j, field) in record.iter().enumerate().take(3) {
            row[j] = field
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Parse {
                    path: name.clone(),
                    line,
                    message: format!("'{field}' is not a finite number"),
                })?;
        }
        if record.len() != 3 {
            return Err(Error::Parse {
                path: name,
                line,
                message: format!("expected 3 fields, found {}", record.len()),
            });
        }
        knots.push(row);
    }
    let label = path
        .file_stem()
        .map_or("custom".to_string(), |s| s.to_string_lossy().into_owned());
    let spec = piecewise_linear_trend(label, knots).map_err(|e| Error::Parse {
        path: name,
        line: 1,
        message: e.to_string(),
    })?;
    spec.validate()?;
    Ok(spec)
}

pub(crate) fn csv_error(path: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            path: path.to_string(),
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Trend mean directions at `t_i = i/(p + 1)`, `i = 1..p`, as unit rows.
pub fn trend_directions(spec: &TrendSpec, p: usize) -> Result<DMatrix<f64>> {
    if p == 0 {
        return Err(Error::InvalidArgument("trend needs p >= 1".into()));
    }
    let mut mu = DMatrix::zeros(p, 3);
    for i in 0..p {
        let x = polar_to_cartesian(spec.evaluate(trend_time(i, p))?);
        mu.row_mut(i).copy_from_slice(&x.as_array());
    }
    Ok(mu)
}

/// `(i + 1)/(p + 1)` for zero-based `i`.
pub fn trend_time(i: usize, p: usize) -> f64 {
    (i + 1) as f64 / (p + 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub p: usize,
    pub kappa: f64,
    pub seed: u64,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::InvalidArgument(format!("p must be at least 2, got {}", self.p)));
        }
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        Ok(())
    }
}

/// Observations `y_i = Ω(μ_i) z_i` around the unit rows of `mu`, drawing
/// `(u1, u2)` for each row in order.
pub fn observe<R: Rng>(mu: &DMatrix<f64>, kappa: f64, rng: &mut R) -> Result<DMatrix<f64>> {
    if mu.ncols() != 3 {
        return Err(Error::dims("observe", 3, mu.ncols()));
    }
    if !(kappa > 0.0) {
        return Err(Error::InvalidArgument(format!("kappa must be positive, got {kappa}")));
    }
    let mut y = DMatrix::zeros(mu.nrows(), 3);
    for i in 0..mu.nrows() {
        let m = UnitVector3::new(mu[(i, 0)], mu[(i, 1)], mu[(i, 2)]).map_err(|e| match e {
            Error::NotUnitVector { norm, .. } => Error::NotUnitVector { row: i, norm },
            other => other,
        })?;
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let z = sample_fisher_langevin(kappa, u1, u2);
        let r = rotation_to(m) * Vector3::new(z.x1, z.x2, z.x3);
        let r = r / r.norm();
        y.row_mut(i).copy_from_slice(r.as_slice());
    }
    Ok(y)
}

/// One synthetic data set and its truth. Replication `r` of a study uses
/// [`generate_replication`] with the same seed.
pub fn generate_dataset(spec: &TrendSpec, cfg: &SimulationConfig) -> Result<(DirectionData, MeanField)> {
    generate_replication(spec, cfg, 0)
}

pub fn generate_replication(
    spec: &TrendSpec,
    cfg: &SimulationConfig,
    replication: u64,
) -> Result<(DirectionData, MeanField)> {
    cfg.validate()?;
    let mu = trend_directions(spec, cfg.p)?;
    let truth = MeanField::new(mu, resultant_length(cfg.kappa))?;
    let data = replicate(&truth, cfg.kappa, cfg.seed, replication)?;
    Ok((data, truth))
}

/// Fresh observations around a fixed truth on substream `replication`.
pub fn replicate(truth: &MeanField, kappa: f64, seed: u64, replication: u64) -> Result<DirectionData> {
    let mut rng = rng_for(seed, replication);
    let y = observe(truth.mu(), kappa, &mut rng)?;
    let p = y.nrows();
    DirectionData::new(y, Some((0..p).map(|i| trend_time(i, p)).collect()))
}

/// Monte Carlo estimate of the resultant length `λ = E cos θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultantEstimate {
    pub lambda: f64,
    /// Sample standard deviation of `cos θ`.
    pub std_dev: f64,
    pub draws: usize,
}

impl ResultantEstimate {
    pub fn std_error(&self) -> f64 {
        self.std_dev / (self.draws as f64).sqrt()
    }

    pub fn gamma2(&self) -> f64 {
        1.0 - self.lambda * self.lambda
    }
}

/// Mean of `cos θ` over `draws` sampler variates on a given generator.
pub fn estimate_resultant<R: Rng>(kappa: f64, draws: usize, rng: &mut R) -> ResultantEstimate {
    // Welford
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for n in 1..=draws {
        let c = fisher_langevin_cos(kappa, rng.random());
        let d = c - mean;
        mean += d / n as f64;
        m2 += d * (c - mean);
    }
    ResultantEstimate {
        lambda: mean,
        std_dev: if draws > 1 {
            (m2 / (draws - 1) as f64).sqrt()
        } else {
            0.0
        },
        draws,
    }
}

/// The resultant-length oracle: [`ORACLE_DRAWS`] draws on a fixed generator,
/// cached per `kappa`.
pub fn resultant_oracle(kappa: f64) -> ResultantEstimate {
    static CACHE: OnceLock<Mutex<HashMap<u64, ResultantEstimate>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&kappa.to_bits()) {
        return *hit;
    }
    let est = estimate_resultant(kappa, ORACLE_DRAWS, &mut rng_for(ORACLE_SEED, 0));
    cache
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(kappa.to_bits(), est);
    est
}

/// `λ` for precision `kappa`, from [`resultant_oracle`].
pub fn resultant_length(kappa: f64) -> f64 {
    resultant_oracle(kappa).lambda
}
