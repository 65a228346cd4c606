//! Lambert azimuthal equal-area plots as SVG.
//!
//! Each hemisphere is projected onto the same disk of radius √2, whose
//! boundary is the equator; markers tell the hemispheres apart.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{lambert_project, Hemisphere, SphericalPoint};

/// Fraction of the half-size used by the disk.
pub const DISK_FILL: f64 = 0.95;

const PALETTE: [&str; 6] = ["#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"];
const MARKER_SIZE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marker {
    FilledCircle,
    OpenCircle,
    OpenCross,
    FilledSquare,
}

#[derive(Debug, Clone)]
pub struct PlotSeries {
    pub label: String,
    pub points: Vec<SphericalPoint>,
}

#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub width_px: u32,
    pub height_px: u32,
    pub north_symbol: Marker,
    pub south_symbol: Marker,
    /// Join time-adjacent points of each series with line segments.
    pub connect: bool,
    pub series: Vec<PlotSeries>,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self {
            width_px: 480,
            height_px: 480,
            north_symbol: Marker::FilledCircle,
            south_symbol: Marker::OpenCross,
            connect: true,
            series: Vec::new(),
        }
    }
}

impl PlotSpec {
    /// Pixel position of a point.
    pub fn to_pixels(&self, p: SphericalPoint) -> (f64, f64) {
        let (cx, cy, r) = self.disk();
        let q = lambert_project(p);
        let s = r / std::f64::consts::SQRT_2;
        (cx + q.u * s, cy - q.v * s)
    }

    /// Centre and radius of the disk in pixels.
    pub fn disk(&self) -> (f64, f64, f64) {
        let w = self.width_px as f64;
        let h = self.height_px as f64;
        (w / 2.0, h / 2.0, w.min(h) / 2.0 * DISK_FILL)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn marker(out: &mut String, m: Marker, x: f64, y: f64, color: &str) {
    let r = MARKER_SIZE;
    let _ = match m {
        Marker::FilledCircle => writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{r}" fill="{color}"/>"#),
        Marker::OpenCircle => writeln!(
            out,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="{r}" fill="none" stroke="{color}"/>"#
        ),
        Marker::OpenCross => writeln!(
            out,
            r#"<path d="M{:.3} {:.3}L{:.3} {:.3}M{:.3} {:.3}L{:.3} {:.3}" fill="none" stroke="{color}"/>"#,
            x - r,
            y - r,
            x + r,
            y + r,
            x - r,
            y + r,
            x + r,
            y - r
        ),
        Marker::FilledSquare => writeln!(
            out,
            r#"<rect x="{:.3}" y="{:.3}" width="{}" height="{}" fill="{color}"/>"#,
            x - r,
            y - r,
            2.0 * r,
            2.0 * r
        ),
    };
}

/// Renders every series on one disk. Output depends only on the spec.
pub fn render_lambert_svg(spec: &PlotSpec) -> Result<String> {
    if spec.series.is_empty() {
        return Err(Error::InvalidArgument("plot needs at least one series".into()));
    }
    if let Some(s) = spec.series.iter().find(|s| s.points.is_empty()) {
        return Err(Error::InvalidArgument(format!("series '{}' is empty", s.label)));
    }
    if spec.width_px == 0 || spec.height_px == 0 {
        return Err(Error::InvalidArgument("plot size must be positive".into()));
    }
    let (cx, cy, r) = spec.disk();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = spec.width_px,
        h = spec.height_px
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<circle class="equator" cx="{cx:.3}" cy="{cy:.3}" r="{r:.3}" fill="none" stroke="gray"/>"#
    );
    for (k, series) in spec.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(out, r#"<g class="series" data-label="{}">"#, escape(&series.label));
        let px: Vec<(f64, f64)> = series.points.iter().map(|p| spec.to_pixels(*p)).collect();
        if spec.connect {
            for w in px.windows(2) {
                let _ = writeln!(
                    out,
                    r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{color}" stroke-width="0.5"/>"#,
                    w[0].0, w[0].1, w[1].0, w[1].1
                );
            }
        }
        for (p, (x, y)) in series.points.iter().zip(&px) {
            let m = match lambert_project(*p).hemisphere {
                Hemisphere::North => spec.north_symbol,
                Hemisphere::South => spec.south_symbol,
            };
            marker(&mut out, m, *x, *y, color);
        }
        let _ = writeln!(out, "</g>");
        let _ = writeln!(
            out,
            r#"<text x="6" y="{:.0}" font-size="11" fill="{color}">{}</text>"#,
            14.0 * (k + 1) as f64,
            escape(&series.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
