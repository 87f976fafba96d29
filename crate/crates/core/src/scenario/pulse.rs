//! Boundary pulses: synthesized modulated Gaussians or sampled files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::DrudeParams;
use crate::spectral::{Signal, TimeGrid};
use crate::waves::BoundaryRegime;

/// Relative level below which DC content and window-edge values must stay.
pub const PULSE_TOL: f64 = 1e-8;

/// Samples at each end of the window inspected by the edge check.
const EDGE_SAMPLES: usize = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseShape {
    #[default]
    GaussianModulated,
    UserFile,
}

impl PulseShape {
    pub fn name(self) -> &'static str {
        match self {
            PulseShape::GaussianModulated => "gaussian-modulated",
            PulseShape::UserFile => "user-file",
        }
    }
}

/// How the pulse becomes a boundary regime `(j, k)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `k = â j`: only the right-going wave is excited.
    #[default]
    RightGoing,
    /// `k = −â j`.
    LeftGoing,
    /// `k = 0`: both waves with equal weight.
    ElectricOnly,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::RightGoing => "right-going",
            Regime::LeftGoing => "left-going",
            Regime::ElectricOnly => "electric-only",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub shape: PulseShape,
    pub regime: Regime,
    /// Carrier angular frequency `ω₀`.
    pub carrier: f64,
    /// Standard deviation of the Gaussian envelope in time.
    pub width: f64,
    pub amplitude: f64,
    /// Envelope center; the middle of the window when absent.
    pub center: Option<f64>,
    /// Optional spectral cut applied after synthesis.
    pub band_limit: Option<f64>,
    pub file: Option<PathBuf>,
}

impl Default for PulseSpec {
    fn default() -> Self {
        Self {
            shape: PulseShape::GaussianModulated,
            regime: Regime::RightGoing,
            carrier: 0.0,
            width: 0.0,
            amplitude: 1.0,
            center: None,
            band_limit: None,
            file: None,
        }
    }
}

impl PulseSpec {
    pub fn gaussian(carrier: f64, width: f64, amplitude: f64) -> Self {
        Self {
            carrier,
            width,
            amplitude,
            ..Self::default()
        }
    }

    /// Boundary regime carrying `j` as the electric trace.
    pub fn boundary(&self, j: Signal, params: &DrudeParams, tol_a: f64) -> Result<BoundaryRegime> {
        match self.regime {
            Regime::RightGoing => BoundaryRegime::right_going(j, params, tol_a),
            Regime::LeftGoing => BoundaryRegime::left_going(j, params, tol_a),
            Regime::ElectricOnly => {
                let k = Signal::zeros(j.grid());
                BoundaryRegime::new(j, k)
            }
        }
    }
}

/// `A·exp(−τ²/2w²)·cos(ω₀τ)` with `τ = t − center`, or the file samples
/// resampled to `grid`; relative file paths resolve against the working
/// directory.
pub fn synthesize_pulse(spec: &PulseSpec, grid: &TimeGrid) -> Result<Signal> {
    synthesize_pulse_in(spec, grid, Path::new("."))
}

/// As [`synthesize_pulse`], resolving a relative `file` against `base`.
pub fn synthesize_pulse_in(spec: &PulseSpec, grid: &TimeGrid, base: &Path) -> Result<Signal> {
    let raw = match spec.shape {
        PulseShape::GaussianModulated => {
            if !(spec.width > 0.0 && spec.carrier > 0.0) {
                return Err(Error::Pulse(format!(
                    "width {} and carrier {} must be positive",
                    spec.width, spec.carrier
                )));
            }
            let t0 = spec.center.unwrap_or(0.5 * grid.window());
            let (w, w0, amp) = (spec.width, spec.carrier, spec.amplitude);
            Signal::from_fn(grid, |t| {
                let tau = t - t0;
                amp * (-0.5 * (tau / w).powi(2)).exp() * (w0 * tau).cos()
            })?
        }
        PulseShape::UserFile => {
            let path = spec
                .file
                .as_ref()
                .ok_or_else(|| Error::Pulse("user-file pulse without a file".into()))?;
            let path = if path.is_relative() { base.join(path) } else { path.clone() };
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let samples = parse_sample_file(&text)?;
            resample(&samples, grid)?.scaled(spec.amplitude)
        }
    };
    let raw = match spec.band_limit {
        Some(w) => raw.band_limited(w),
        None => raw,
    };
    check_pulse(&raw)?;
    Ok(raw.without_mean())
}

/// Reject pulses with DC content or window-edge values above `PULSE_TOL` of peak.
pub fn check_pulse(s: &Signal) -> Result<()> {
    let peak = s.peak();
    if peak == 0.0 {
        return Err(Error::Pulse("pulse is identically zero".into()));
    }
    let dc = s.mean().abs() / peak;
    if dc > PULSE_TOL {
        return Err(Error::Pulse(format!(
            "DC content {dc:.3e} of peak exceeds {PULSE_TOL:e}; raise the carrier or the width"
        )));
    }
    let x = s.samples();
    let m = EDGE_SAMPLES.min(x.len() / 2);
    let edge = x[..m].iter().chain(&x[x.len() - m..]).fold(0.0f64, |a, v| a.max(v.abs())) / peak;
    if edge > PULSE_TOL {
        return Err(Error::Pulse(format!(
            "window-edge value {edge:.3e} of peak exceeds {PULSE_TOL:e}; widen the grid or narrow the pulse"
        )));
    }
    Ok(())
}

/// Two numeric columns `t, value` separated by a comma or whitespace.
/// Blank lines and `#` comments are skipped; times must increase strictly.
pub fn parse_sample_file(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let fail = |message: String| Error::SampleFile { line: line_no, message };
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(fail(format!("expected 2 columns, found {}", fields.len())));
        }
        let num = |f: &str| -> Result<f64> {
            let v: f64 = f.parse().map_err(|_| fail(format!("{f:?} is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(fail(format!("{f:?} is not finite")))
            }
        };
        let (t, v) = (num(fields[0])?, num(fields[1])?);
        if let Some(&(prev, _)) = out.last() {
            if t <= prev {
                return Err(fail(format!("time {t} does not exceed the previous time {prev}")));
            }
        }
        out.push((t, v));
    }
    if out.len() < 2 {
        return Err(Error::SampleFile {
            line: text.lines().count(),
            message: "need at least two samples".into(),
        });
    }
    Ok(out)
}

/// Text that [`parse_sample_file`] reads back exactly.
pub fn write_sample_file(signal: &Signal) -> String {
    let mut out = String::from("# t, value\n");
    for (t, v) in signal.grid().times().iter().zip(signal.samples()) {
        writeln!(out, "{t},{v}").expect("writing to a String cannot fail");
    }
    out
}

/// Linear interpolation onto the grid times; zero outside the sampled span.
pub fn resample(samples: &[(f64, f64)], grid: &TimeGrid) -> Result<Signal> {
    let (first, last) = match (samples.first(), samples.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => return Err(Error::Pulse("no samples".into())),
    };
    Signal::from_fn(grid, |t| {
        if t < first || t > last {
            return 0.0;
        }
        let i = samples.partition_point(|&(s, _)| s <= t);
        let (t0, v0) = samples[i - 1];
        if t == t0 || i == samples.len() {
            return v0;
        }
        let (t1, v1) = samples[i];
        let w = (t - t0) / (t1 - t0);
        v0 + w * (v1 - v0)
    })
}
