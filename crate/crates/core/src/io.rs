//! CSV ingest and export of directional time series, and JSON reports.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{polar_to_rows, rows_to_polar, wrap_angle, SphericalPoint};
use crate::model::DirectionData;
use crate::select::{RiskEntry, RiskReport, SelectionConfig};
use crate::synth::csv_error;

/// Significant digits written for angles.
pub const ANGLE_DIGITS: usize = 12;

/// Angle columns of a CSV file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleFormat {
    /// `time,theta,phi`, colatitude and longitude in radians.
    #[default]
    Radians,
    /// `time,lat,lon`, latitude and longitude in degrees.
    Degrees,
}

impl AngleFormat {
    pub fn header(self) -> [&'static str; 3] {
        match self {
            AngleFormat::Radians => ["time", "theta", "phi"],
            AngleFormat::Degrees => ["time", "lat", "lon"],
        }
    }

    fn to_point(self, a: f64, b: f64) -> Result<SphericalPoint> {
        match self {
            AngleFormat::Radians => SphericalPoint::new(a, wrap_angle(b)),
            AngleFormat::Degrees => SphericalPoint::from_lat_lon_degrees(a, b),
        }
    }

    fn split(self, p: SphericalPoint) -> (f64, f64) {
        match self {
            AngleFormat::Radians => (p.theta, p.phi),
            AngleFormat::Degrees => p.to_lat_lon_degrees(),
        }
    }
}

/// Reads a directional time series; rows are returned sorted by time.
pub fn ingest_csv(path: &Path, format: AngleFormat) -> Result<DirectionData> {
    let file = File::open(path)?;
    ingest_reader(file, &path.display().to_string(), format)
}

/// [`ingest_csv`] from any reader; `name` labels parse errors.
pub fn ingest_reader<R: Read>(reader: R, name: &str, format: AngleFormat) -> Result<DirectionData> {
    let (times, points) = read_series(reader, name, format)?;
    if points.len() < 2 {
        return Err(Error::Parse {
            path: name.to_string(),
            line: 1,
            message: format!("need at least 2 observations, found {}", points.len()),
        });
    }
    DirectionData::new(polar_to_rows(&points), Some(times))
}

/// Times and positions as read, sorted stably by time.
pub fn read_series<R: Read>(reader: R, name: &str, format: AngleFormat) -> Result<(Vec<f64>, Vec<SphericalPoint>)> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: name.to_string(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(name, e))?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    let expected = format.header();
    if headers != expected {
        return Err(parse_err(
            1,
            format!("expected header {}, found {}", expected.join(","), headers.join(",")),
        ));
    }
    let mut rows: Vec<(f64, SphericalPoint)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(name, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            return Err(parse_err(line, format!("expected 3 fields, found {}", record.len())));
        }
        let mut v = [0.0; 3];
        for (j, field) in record.iter().enumerate() {
            v[j] = match field.parse::<f64>() {
                Ok(x) if x.is_finite() => x,
                Ok(_) => return Err(parse_err(line, format!("{} is not finite", expected[j]))),
                Err(_) => return Err(parse_err(line, format!("{} '{field}' is not a number", expected[j]))),
            };
        }
        let point = format
            .to_point(v[1], v[2])
            .map_err(|e| parse_err(line, e.to_string()))?;
        rows.push((v[0], point));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let duplicates = rows.windows(2).filter(|w| w[0].0 == w[1].0).count();
    if duplicates > 0 {
        log::warn!("{name}: {duplicates} duplicate time stamp(s); keeping file order among them");
    }
    Ok(rows.into_iter().unzip())
}

/// `x` rounded to [`ANGLE_DIGITS`] significant digits, printed without
/// trailing noise.
pub fn format_angle(x: f64) -> String {
    let rounded: f64 = format!("{:.*e}", ANGLE_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses");
    format!("{rounded}")
}

/// Writes unit rows with their times in the ingest schema.
pub fn write_directions_csv(path: &Path, times: &[f64], directions: &DMatrix<f64>, format: AngleFormat) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    write_directions(file, times, directions, format)
}

pub fn write_directions<W: Write>(out: W, times: &[f64], directions: &DMatrix<f64>, format: AngleFormat) -> Result<()> {
    if times.len() != directions.nrows() {
        return Err(Error::dims("write_directions", directions.nrows(), times.len()));
    }
    let points = rows_to_polar(directions)?;
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(format.header()).map_err(io)?;
    for (t, p) in times.iter().zip(points) {
        let (a, b) = format.split(p);
        w.write_record([format!("{t}"), format_angle(a), format_angle(b)])
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Times of a data set, or `1..=p` when it has none.
pub fn times_or_index(data: &DirectionData) -> Vec<f64> {
    match data.times() {
        Some(t) => t.to_vec(),
        None => (1..=data.p()).map(|i| i as f64).collect(),
    }
}

pub const SOFTWARE: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Contents of `report.json`.
#[derive(Debug, Serialize)]
pub struct ReportDocument<'a> {
    pub software: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub p: usize,
    pub q: usize,
    pub gamma2_hat: f64,
    pub naive_risk: f64,
    pub grid: SelectionConfig,
    pub entries: &'a [RiskEntry],
    pub ranking: &'a [String],
    pub winner: &'a str,
}

impl<'a> ReportDocument<'a> {
    pub fn new(command: &'a str, data: &DirectionData, report: &'a RiskReport, grid: SelectionConfig) -> Self {
        Self {
            software: SOFTWARE,
            version: VERSION,
            command,
            p: data.p(),
            q: data.q(),
            gamma2_hat: report.gamma2_hat,
            naive_risk: report.naive_risk,
            grid,
            entries: &report.entries,
            ranking: &report.ranking,
            winner: report.ranking.first().map_or("", String::as_str),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}
