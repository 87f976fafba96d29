//! Marching directed waves along x.
//!
//! Linear propagation is exact per frequency bin. The Kerr-coupled system is
//! marched in its `∂ₜ⁻¹`-applied, first-order-in-x form by an
//! integrating-factor Runge–Kutta scheme (see [`kerr`]).

pub mod kerr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::{a_symbol, taylor_truncation_error, DrudeParams};
use crate::spectral::{make_multiplier, time_derivative, GridSpec, Multiplier, MultiplierKind, Signal, TimeGrid};
use crate::waves::DirectedPair;

pub use kerr::{
    build_nonlinearity, build_nonlinearity_with, propagate_dimensionless, propagate_nonlinear,
    propagate_system, propagate_unidirectional, KerrSystem, MuModel,
};

/// Fraction of spectral energy above `0.5·min(p, q)` that triggers a warning
/// in [`propagate_kg`].
const KG_BAND_WARN: f64 = 1e-6;

/// Which equations produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    LinearExact,
    KleinGordon,
    Nonlinear,
    Unidirectional,
    Dimensionless,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub model: Model,
    pub params: DrudeParams,
    pub grid: GridSpec,
    pub steps: usize,
    pub dealias: bool,
    pub mu_model: MuModel,
}

/// Directed-wave states at increasing x-stations, starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationRecord {
    stations: Vec<f64>,
    states: Vec<DirectedPair>,
    pub meta: RecordMeta,
}

impl PropagationRecord {
    pub fn new(stations: Vec<f64>, states: Vec<DirectedPair>, meta: RecordMeta) -> Result<Self> {
        if stations.len() != states.len() || stations.is_empty() {
            return Err(Error::LengthMismatch {
                expected: stations.len(),
                got: states.len(),
            });
        }
        if stations[0] != 0.0 || stations.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::InvalidArgument(
                "stations must start at 0 and increase strictly".into(),
            ));
        }
        let grid = states[0].grid();
        if states.iter().any(|s| !s.grid().same_as(grid)) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { stations, states, meta })
    }

    pub fn stations(&self) -> &[f64] {
        &self.stations
    }

    pub fn states(&self) -> &[DirectedPair] {
        &self.states
    }

    pub fn grid(&self) -> &TimeGrid {
        self.states[0].grid()
    }

    pub fn last(&self) -> &DirectedPair {
        self.states.last().expect("records are never empty")
    }

    pub fn x_end(&self) -> f64 {
        *self.stations.last().expect("records are never empty")
    }

    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }

    /// Index of the station closest to `x`.
    pub fn nearest_station(&self, x: f64) -> usize {
        let mut best = 0;
        for (i, s) in self.stations.iter().enumerate() {
            if (s - x).abs() < (self.stations[best] - x).abs() {
                best = i;
            }
        }
        best
    }
}

/// Coefficients of the Kerr-coupled system and its natural scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrCoupling {
    /// `K = μ₀χ⁽³⁾c³/(2p³q)`.
    pub big_k: f64,
    /// Amplitude scale `√(2p⁴q²/(μ₀χ⁽³⁾c³))`.
    pub alpha: f64,
    /// Length scale `c/(pq)`. With ω in rad/s its unit is m·s.
    pub beta: f64,
}

impl KerrCoupling {
    pub fn new(params: &DrudeParams) -> Result<Self> {
        params.validate()?;
        if params.chi3 <= 0.0 {
            return Err(Error::InvalidParams(
                "chi3 must be positive for the dimensionless scales".into(),
            ));
        }
        let (p, q, c) = (params.omega_pe, params.omega_pm, params.c);
        Ok(Self {
            big_k: kerr_constant(params),
            alpha: (2.0 * p.powi(4) * q * q / (params.mu0 * params.chi3 * c.powi(3))).sqrt(),
            beta: c / (p * q),
        })
    }
}

/// `K = μ₀χ⁽³⁾c³/(2p³q)`; zero for a linear medium.
pub fn kerr_constant(params: &DrudeParams) -> f64 {
    let (p, q, c) = (params.omega_pe, params.omega_pm, params.c);
    params.mu0 * params.chi3 * c.powi(3) / (2.0 * p.powi(3) * q)
}

/// Step count giving `Δx ≤ c/(50·√(pq))`, and at least 4.
pub fn default_steps(x_end: f64, params: &DrudeParams) -> usize {
    let dx_max = params.c / (50.0 * params.pq().sqrt());
    ((x_end / dx_max).ceil() as usize).max(4)
}

fn check_x(x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("x = {x} must be finite and non-negative")))
    }
}

fn propagate_pair(dp: &DirectedPair, right: &Multiplier, left: &Multiplier) -> Result<DirectedPair> {
    DirectedPair::new(right.apply(&dp.pi)?, left.apply(&dp.lambda)?)
}

/// Exact solution of `∂ₓΠ = −â∂ₜΠ`, `∂ₓΛ = +â∂ₜΛ`:
/// `Π̂(x) = Π̂(0)·exp(−iωa x)`, `Λ̂(x) = Λ̂(0)·exp(+iωa x)`.
pub fn propagate_linear_exact(dp0: &DirectedPair, x: f64, params: &DrudeParams) -> Result<DirectedPair> {
    check_x(x)?;
    let grid = dp0.grid();
    // Rejects grids with evanescent bins before the symbol is evaluated.
    make_multiplier(MultiplierKind::A, params, grid, 0.0)?;
    let a = |w: f64| a_symbol(params, w).ok().and_then(|s| s.real()).expect("admissible grid");
    let right = Multiplier::propagator(grid, x, |w| Complex64::new(0.0, -w * a(w)));
    let left = Multiplier::propagator(grid, x, |w| Complex64::new(0.0, w * a(w)));
    propagate_pair(dp0, &right, &left)
}

/// Exact solution of `∂ₓΠ = −(pq/c)∂ₜ⁻¹Π`, `∂ₓΛ = +(pq/c)∂ₜ⁻¹Λ`:
/// `Π̂(x) = Π̂(0)·exp(+i·pq·x/(cω))` and the conjugate phase for `Λ`.
pub fn propagate_kg(dp0: &DirectedPair, x: f64, params: &DrudeParams) -> Result<DirectedPair> {
    check_x(x)?;
    params.validate()?;
    let grid = dp0.grid();
    let limit = 0.5 * params.lower_edge();
    let out_of_band = energy_above(&dp0.pi, limit) + energy_above(&dp0.lambda, limit);
    let total = dp0.pi.norm().powi(2) + dp0.lambda.norm().powi(2);
    if total > 0.0 && out_of_band > KG_BAND_WARN * total {
        log::warn!(
            "{:.2e} of the pulse energy lies above 0.5·min(p, q); the Klein-Gordon reduction is inaccurate there",
            out_of_band / total
        );
    }
    let d = params.pq() / params.c;
    let right = Multiplier::propagator(grid, x, |w| Complex64::new(0.0, d / w));
    let left = Multiplier::propagator(grid, x, |w| Complex64::new(0.0, -d / w));
    propagate_pair(dp0, &right, &left)
}

fn energy_above(s: &Signal, omega: f64) -> f64 {
    let spec = s.to_spectrum();
    let grid = s.grid();
    spec.values()
        .iter()
        .enumerate()
        .filter(|(k, _)| grid.omega(*k).abs() > omega)
        .map(|(_, z)| z.norm_sqr())
        .sum()
}

/// Highest `|ω|` carrying more than `rel` of the peak bin magnitude.
pub fn occupied_band(dp: &DirectedPair, rel: f64) -> f64 {
    let grid = dp.grid();
    let sp = dp.pi.to_spectrum();
    let sl = dp.lambda.to_spectrum();
    let mags: Vec<f64> = sp
        .values()
        .iter()
        .zip(sl.values())
        .map(|(a, b)| a.norm().max(b.norm()))
        .collect();
    let peak = mags.iter().copied().fold(0.0, f64::max);
    mags.iter()
        .enumerate()
        .filter(|(k, m)| *k != 0 && **m > rel * peak)
        .map(|(k, _)| grid.omega(k).abs())
        .fold(0.0, f64::max)
}

/// Error budget of the Klein–Gordon reduction against exact propagation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KgBudget {
    /// Highest occupied frequency.
    pub band_edge: f64,
    /// Relative error of the leading `â` term at the band edge.
    pub truncation_error: f64,
    /// Exact phase `ω|a|x` accumulated at the band edge.
    pub phase: f64,
    /// `truncation_error · phase`, a bound on the relative L2 discrepancy
    /// when the phase error grows with frequency over the band.
    pub bound: f64,
    /// Largest per-bin phase difference over the occupied band.
    pub max_phase_error: f64,
}

/// Budget for [`propagate_kg`] vs [`propagate_linear_exact`] at distance `x`.
/// Bins below `1e-12` of the peak magnitude are treated as empty.
pub fn kg_budget(dp0: &DirectedPair, x: f64, params: &DrudeParams) -> Result<KgBudget> {
    check_x(x)?;
    let edge = occupied_band(dp0, 1e-12);
    if edge == 0.0 {
        return Err(Error::InvalidArgument("pulse has no spectral content".into()));
    }
    let exact_phase = |w: f64| -> Result<f64> {
        let a = a_symbol(params, w)?
            .real()
            .ok_or(Error::OutsideLowerBand { omega: w, edge: params.lower_edge() })?;
        Ok(w * a.abs() * x)
    };
    let err = taylor_truncation_error(params, edge)?;
    let phase = exact_phase(edge)?;
    let d = params.pq() / params.c;
    let grid = dp0.grid();
    let mut max_phase_error: f64 = 0.0;
    for k in 1..grid.n() {
        let w = grid.omega(k).abs();
        if w <= edge && k != grid.nyquist_bin() {
            max_phase_error = max_phase_error.max((exact_phase(w)? - d * x / w).abs());
        }
    }
    Ok(KgBudget {
        band_edge: edge,
        truncation_error: err,
        phase,
        bound: err * phase,
        max_phase_error,
    })
}

/// Residual of `∂ₓₜΠ + (pq/c)Π = 0` on a Klein–Gordon record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KgResidual {
    /// `‖∂ₜ δₓΠ + (pq/c)Π‖ / ‖(pq/c)Π‖` over interior stations, with `δₓ` the
    /// central difference.
    pub residual: f64,
    /// Central-difference truncation bound `max κ²Δx²/6`, `κ = pq/(cω)`, over
    /// the occupied band.
    pub bound: f64,
}

/// Second-order-form residual of the `Π` component of a uniformly spaced record.
pub fn kg_residual(record: &PropagationRecord, params: &DrudeParams) -> Result<KgResidual> {
    let xs = record.stations();
    if xs.len() < 3 {
        return Err(Error::InvalidArgument("need at least three stations".into()));
    }
    let h = xs[1] - xs[0];
    if xs.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(Error::InvalidArgument("stations must be uniformly spaced".into()));
    }
    let grid = record.grid();
    let dt = time_derivative(MultiplierKind::DDt, grid)?;
    let d = params.pq() / params.c;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 1..xs.len() - 1 {
        let s = &record.states();
        let dx = s[i + 1].pi.combine(0.5 / h, &s[i - 1].pi, -0.5 / h)?;
        let r = dt.apply(&dx)?.combine(1.0, &s[i].pi, d)?;
        num += r.norm().powi(2);
        den += (d * s[i].pi.norm()).powi(2);
    }
    let low = lowest_occupied(&record.states()[0].pi, 1e-12);
    let kappa = d / low;
    Ok(KgResidual {
        residual: (num / den).sqrt(),
        bound: (kappa * h).powi(2) / 6.0,
    })
}

fn lowest_occupied(s: &Signal, rel: f64) -> f64 {
    let spec = s.to_spectrum();
    let peak = spec.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let grid = s.grid();
    spec.values()
        .iter()
        .enumerate()
        .filter(|(k, z)| *k != 0 && z.norm() > rel * peak)
        .map(|(k, _)| grid.omega(k).abs())
        .fold(f64::INFINITY, f64::min)
}

/// `(π, λ) = (Π_tt, Λ_tt)/α`.
pub fn pair_to_dimensionless(dp: &DirectedPair, coupling: &KerrCoupling) -> Result<DirectedPair> {
    let d2 = time_derivative(MultiplierKind::D2Dt2, dp.grid())?.scaled(1.0 / coupling.alpha);
    DirectedPair::new(d2.apply(&dp.pi)?, d2.apply(&dp.lambda)?)
}

/// `(Π, Λ) = α·∂ₜ⁻²(π, λ)`; the DC bin is lost.
pub fn pair_from_dimensionless(dp: &DirectedPair, coupling: &KerrCoupling) -> Result<DirectedPair> {
    let d2inv = time_derivative(MultiplierKind::D2Dt2Inv, dp.grid())?.scaled(coupling.alpha);
    DirectedPair::new(d2inv.apply(&dp.pi)?, d2inv.apply(&dp.lambda)?)
}

/// Rescale a physical record to `(π, λ)` at `ζ = x/β`.
pub fn to_dimensionless(record: &PropagationRecord, coupling: &KerrCoupling) -> Result<PropagationRecord> {
    let states = record
        .states()
        .iter()
        .map(|s| pair_to_dimensionless(s, coupling))
        .collect::<Result<Vec<_>>>()?;
    let stations = record.stations().iter().map(|x| x / coupling.beta).collect();
    PropagationRecord::new(
        stations,
        states,
        RecordMeta {
            model: Model::Dimensionless,
            ..record.meta.clone()
        },
    )
}

/// Inverse of [`to_dimensionless`]; `model` tags the physical record.
pub fn from_dimensionless(
    record: &PropagationRecord,
    coupling: &KerrCoupling,
    model: Model,
) -> Result<PropagationRecord> {
    let states = record
        .states()
        .iter()
        .map(|s| pair_from_dimensionless(s, coupling))
        .collect::<Result<Vec<_>>>()?;
    let stations = record.stations().iter().map(|z| z * coupling.beta).collect();
    PropagationRecord::new(stations, states, RecordMeta { model, ..record.meta.clone() })
}
