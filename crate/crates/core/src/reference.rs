//! Staggered-grid time-domain Maxwell solver with Drude auxiliary currents.
//!
//! This is the independent linear oracle for the spectral propagators. It
//! integrates `∂ₜB = −∂ₓE`, `∂ₜD = −∂ₓH` with
//!
//! ```text
//! D = ε₀E + P,  ∂ₜP = Jₑ,  ∂ₜJₑ = ε₀ω_pe²E
//! B = μ₀H + M,  ∂ₜM = Jₘ,  ∂ₜJₘ = μ₀ω_pm²H
//! ```
//!
//! so that `ε(ω) = 1 − ω_pe²/ω²` and `μ(ω) = 1 − ω_pm²/ω²`. `E`, `D`, `P`
//! live on integer nodes and integer steps, `Jₑ` on integer nodes and half
//! steps; `H`, `B`, `M` on half nodes and half steps, `Jₘ` on half nodes and
//! integer steps. The discrete dispersion relation is the continuous one with
//! `ω → (2/Δt)·sin(ωΔt/2)` and `k → (2/Δx)·sin(kΔx/2)`.
//!
//! Both ends are perfect conductors. The domain is padded so that no
//! reflection reaches a probe while it records.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::propagate_linear_exact;
use crate::medium::DrudeParams;
use crate::spectral::{Signal, TimeGrid, DEFAULT_TOL_A};
use crate::waves::{reconstruct, split, BoundaryRegime};

/// Largest admissible `c·Δt/Δx`.
pub const MAX_COURANT: f64 = 0.99;

/// Growth factor over the source peak that counts as instability.
pub const INSTABILITY_FACTOR: f64 = 1e6;

const MIN_CELLS: usize = 64;

/// Relative source level below which the source is considered silent.
const SILENCE: f64 = 1e-8;

/// Material constants of the oracle. Unlike [`DrudeParams`], zero plasma
/// frequencies (vacuum) are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YeeMedium {
    pub omega_pe: f64,
    pub omega_pm: f64,
    pub c: f64,
    pub eps0: f64,
    pub mu0: f64,
}

impl YeeMedium {
    pub fn vacuum(c: f64, eps0: f64, mu0: f64) -> Self {
        Self {
            omega_pe: 0.0,
            omega_pm: 0.0,
            c,
            eps0,
            mu0,
        }
    }

    /// `Δt` bound `2/√(ω_pe² + ω_pm² + 4c²/Δx²)` from the discrete dispersion relation.
    pub fn max_dt(&self, dx: f64) -> f64 {
        let s = self.omega_pe.powi(2) + self.omega_pm.powi(2) + 4.0 * (self.c / dx).powi(2);
        2.0 / s.sqrt()
    }

    /// `|dω/dk|` at frequency `ω`, or `c` where the formula does not apply.
    pub fn group_velocity(&self, omega: f64) -> f64 {
        let w2 = omega * omega;
        let (p2, q2) = (self.omega_pe.powi(2), self.omega_pm.powi(2));
        let f = (w2 - p2) * (w2 - q2);
        if omega == 0.0 || f <= 0.0 {
            return self.c;
        }
        let dk = (w2 * w2 - p2 * q2).abs() / (self.c * w2 * f.sqrt());
        if dk == 0.0 {
            self.c
        } else {
            (1.0 / dk).min(self.c)
        }
    }
}

impl From<&DrudeParams> for YeeMedium {
    fn from(p: &DrudeParams) -> Self {
        Self {
            omega_pe: p.omega_pe,
            omega_pm: p.omega_pm,
            c: p.c,
            eps0: p.eps0,
            mu0: p.mu0,
        }
    }
}

/// Grid of `nx` cells of width `dx` with `nx + 1` field nodes. Position 0 of
/// the physical problem sits at `source_node`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YeeGrid1D {
    pub nx: usize,
    pub dx: f64,
    pub dt_fdtd: f64,
    pub courant: f64,
    pub source_node: usize,
    /// FDTD steps per source sample.
    pub substeps: usize,
}

impl YeeGrid1D {
    /// Grid stepping `substeps` times per sample of `source_grid`.
    pub fn new(nx: usize, dx: f64, source_grid: &TimeGrid, substeps: usize, source_node: usize, c: f64) -> Result<Self> {
        if nx < MIN_CELLS {
            return Err(Error::InvalidGrid(format!("nx = {nx} must be at least {MIN_CELLS}")));
        }
        if !(dx > 0.0 && dx.is_finite()) || substeps == 0 {
            return Err(Error::InvalidGrid("dx must be positive and substeps at least 1".into()));
        }
        if source_node == 0 || source_node >= nx {
            return Err(Error::InvalidGrid(format!("source node {source_node} must be interior")));
        }
        let dt = source_grid.dt() / substeps as f64;
        let courant = c * dt / dx;
        if courant > MAX_COURANT {
            return Err(Error::InvalidGrid(format!(
                "Courant number {courant:.4} exceeds {MAX_COURANT}"
            )));
        }
        Ok(Self {
            nx,
            dx,
            dt_fdtd: dt,
            courant,
            source_node,
            substeps,
        })
    }

    /// Grid padded on both sides so that reflections from the walls cannot reach
    /// any point of `[0, x_max]` before `source_grid` ends, for waves no
    /// faster than `v_max` leaving the source after `t_start`.
    pub fn padded(
        dx: f64,
        source_grid: &TimeGrid,
        substeps: usize,
        x_max: f64,
        v_max: f64,
        t_start: f64,
        c: f64,
    ) -> Result<Self> {
        let travel = v_max * (source_grid.window() - t_start).max(0.0);
        let pad = (0.5 * travel / dx).ceil() as usize + 8;
        let span = (x_max / dx).ceil() as usize;
        Self::new(2 * pad + span, dx, source_grid, substeps, pad, c)
    }

    /// Position of `node` relative to the source.
    pub fn x_of(&self, node: usize) -> f64 {
        (node as f64 - self.source_node as f64) * self.dx
    }

    /// Node at position `x`, which must be a multiple of `dx` within rounding.
    pub fn node_of(&self, x: f64) -> Result<usize> {
        let rel = x / self.dx;
        let node = self.source_node as f64 + rel.round();
        let length = self.nx as f64 * self.dx;
        if node < 1.0 || node > (self.nx - 1) as f64 || (rel - rel.round()).abs() > 1e-6 {
            return Err(Error::ProbeOutsideGrid { x, length });
        }
        Ok(node as usize)
    }

    /// Distance from the source to the left and right walls.
    fn wall_distances(&self) -> (f64, f64) {
        let left = self.source_node as f64 * self.dx;
        let right = (self.nx - self.source_node) as f64 * self.dx;
        (left, right)
    }
}

/// Field and auxiliary state. Node arrays have `nx + 1` entries, half-node
/// arrays `nx`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxwellState {
    pub e: Vec<f64>,
    pub d: Vec<f64>,
    pub p: Vec<f64>,
    pub j_e: Vec<f64>,
    pub h: Vec<f64>,
    pub b: Vec<f64>,
    pub m: Vec<f64>,
    pub j_m: Vec<f64>,
}

impl MaxwellState {
    pub fn zeros(nx: usize) -> Self {
        Self {
            e: vec![0.0; nx + 1],
            d: vec![0.0; nx + 1],
            p: vec![0.0; nx + 1],
            j_e: vec![0.0; nx + 1],
            h: vec![0.0; nx],
            b: vec![0.0; nx],
            m: vec![0.0; nx],
            j_m: vec![0.0; nx],
        }
    }

    pub fn is_finite(&self) -> bool {
        [&self.e, &self.h, &self.j_e, &self.j_m]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }

    /// Set `E` and `D` consistently (no polarization yet).
    pub fn set_e(&mut self, node: usize, value: f64, medium: &YeeMedium) {
        self.e[node] = value;
        self.d[node] = medium.eps0 * value + self.p[node];
    }

    /// Set `B` and `H` consistently (no magnetization yet).
    pub fn set_b(&mut self, half_node: usize, value: f64, medium: &YeeMedium) {
        self.b[half_node] = value;
        self.h[half_node] = (value - self.m[half_node]) / medium.mu0;
    }
}

/// `∂ₜJ = k·drive` over one step, `k` already scaled by `Δt`.
#[inline]
fn advance_current(current: &mut f64, drive: f64, k: f64) {
    *current += k * drive;
}

/// `∂ₜP = J` over one step.
#[inline]
fn advance_polarization(pol: &mut f64, current: f64, dt: f64) {
    *pol += dt * current;
}

/// Magnetic half of a step: `B`, `M`, `H`, `Jₘ` from time `n − ½` to `n + ½`.
fn step_magnetic(s: &mut MaxwellState, grid: &YeeGrid1D, medium: &YeeMedium) {
    let (dt, dx) = (grid.dt_fdtd, grid.dx);
    let kq = dt * medium.mu0 * medium.omega_pm.powi(2);
    for i in 0..grid.nx {
        s.b[i] -= dt * (s.e[i + 1] - s.e[i]) / dx;
        advance_polarization(&mut s.m[i], s.j_m[i], dt);
        s.h[i] = (s.b[i] - s.m[i]) / medium.mu0;
        advance_current(&mut s.j_m[i], s.h[i], kq);
    }
}

/// Electric half of a step: `D`, `Jₑ`, `P`, `E` from time `n` to `n + 1`.
/// `source` adds `Δt·value` to `D` at one node.
fn step_electric(s: &mut MaxwellState, grid: &YeeGrid1D, medium: &YeeMedium, source: Option<(usize, f64)>) {
    let (dt, dx) = (grid.dt_fdtd, grid.dx);
    let kp = dt * medium.eps0 * medium.omega_pe.powi(2);
    for i in 1..grid.nx {
        s.d[i] -= dt * (s.h[i] - s.h[i - 1]) / dx;
    }
    if let Some((node, value)) = source {
        s.d[node] += dt * value;
    }
    for i in 1..grid.nx {
        advance_current(&mut s.j_e[i], s.e[i], kp);
        advance_polarization(&mut s.p[i], s.j_e[i], dt);
        s.e[i] = (s.d[i] - s.p[i]) / medium.eps0;
    }
}

/// One leapfrog update. `source` is the injected `∂ₜD` contribution at
/// time `n + ½`.
pub fn step(state: &mut MaxwellState, grid: &YeeGrid1D, medium: &YeeMedium, source: Option<(usize, f64)>) -> Result<()> {
    if state.e.len() != grid.nx + 1 || state.h.len() != grid.nx {
        return Err(Error::LengthMismatch {
            expected: grid.nx + 1,
            got: state.e.len(),
        });
    }
    if grid.dt_fdtd > medium.max_dt(grid.dx) {
        return Err(Error::InvalidGrid(format!(
            "dt = {:e} exceeds the stability bound {:e}",
            grid.dt_fdtd,
            medium.max_dt(grid.dx)
        )));
    }
    step_magnetic(state, grid, medium);
    step_electric(state, grid, medium, source);
    Ok(())
}

/// Recorded `E` and `B` at one probe, sampled on the source grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRecord {
    pub x: f64,
    pub e: Signal,
    pub b: Signal,
}

/// Band-limited interpolation of a periodic signal onto `factor` times as
/// many points.
pub fn upsample(signal: &Signal, factor: usize) -> Vec<f64> {
    let n = signal.grid().n();
    let big = n * factor;
    let mut planner = FftPlanner::<f64>::new();
    let mut spec: Vec<Complex64> = signal.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut spec);
    let mut padded = vec![Complex64::new(0.0, 0.0); big];
    let half = n / 2;
    padded[..half].copy_from_slice(&spec[..half]);
    for k in half + 1..n {
        padded[big - (n - k)] = spec[k];
    }
    if factor > 1 {
        padded[half] = spec[half] * 0.5;
        padded[big - half] = spec[half] * 0.5;
    } else {
        padded[half] = spec[half];
    }
    planner.plan_fft_inverse(big).process(&mut padded);
    padded.iter().map(|z| z.re / n as f64).collect()
}

/// Drive a soft source at the source node with the current sheet
/// `−2ε₀c·j(t)/Δx`, which radiates `E ≈ j(t)` each way in vacuum, and record
/// `E` and `B` at `probes` (positions relative to the source) on the source
/// grid. `B` at a node is the mean of the two neighbouring half nodes at the
/// two neighbouring half steps.
pub fn run_boundary_source(
    source: &Signal,
    grid: &YeeGrid1D,
    medium: &YeeMedium,
    probes: &[f64],
    v_max: f64,
) -> Result<Vec<ProbeRecord>> {
    let tgrid = source.grid();
    let nodes = probes.iter().map(|&x| grid.node_of(x)).collect::<Result<Vec<_>>>()?;
    let duration = tgrid.window();
    let t_start = source_onset(source);
    let (left, right) = grid.wall_distances();
    for &x in probes {
        let path = (2.0 * left + x).min(2.0 * right - x);
        let arrival = t_start + path / v_max;
        if arrival < duration {
            return Err(Error::Contamination { x, arrival, duration });
        }
    }
    let m = grid.substeps;
    let fine = upsample(source, 2 * m);
    let gain = 2.0 * medium.eps0 * medium.c / grid.dx;
    let peak = source.peak();
    let limit = INSTABILITY_FACTOR * peak.max(f64::MIN_POSITIVE);

    let mut state = MaxwellState::zeros(grid.nx);
    let n_out = tgrid.n();
    let mut e_rec = vec![vec![0.0; n_out]; probes.len()];
    let mut b_rec = vec![vec![0.0; n_out]; probes.len()];
    let b_node = |s: &MaxwellState, node: usize| 0.5 * (s.b[node - 1] + s.b[node]);
    for n in 0..n_out * m {
        let sample = n % m == 0;
        let mut b_prev = Vec::new();
        if sample {
            let k = n / m;
            for (p, &node) in nodes.iter().enumerate() {
                e_rec[p][k] = state.e[node];
                b_prev.push(b_node(&state, node));
            }
        }
        step_magnetic(&mut state, grid, medium);
        if sample {
            let k = n / m;
            for (p, &node) in nodes.iter().enumerate() {
                b_rec[p][k] = 0.5 * (b_prev[p] + b_node(&state, node));
            }
            let magnitude = state
                .e
                .iter()
                .map(|v| v.abs())
                .chain(state.b.iter().map(|v| (v * medium.c).abs()))
                .fold(0.0, f64::max);
            if !magnitude.is_finite() || magnitude > limit {
                return Err(Error::Unstable { step: n, magnitude, limit });
            }
        }
        let j = fine[(2 * n + 1) % fine.len()];
        step_electric(&mut state, grid, medium, Some((grid.source_node, gain * j)));
    }
    probes
        .iter()
        .zip(e_rec.into_iter().zip(b_rec))
        .map(|(&x, (e, b))| {
            Ok(ProbeRecord {
                x,
                e: Signal::new(tgrid, e)?,
                b: Signal::new(tgrid, b)?,
            })
        })
        .collect()
}

/// First time at which `|source|` exceeds `1e-8` of its peak.
fn source_onset(source: &Signal) -> f64 {
    let peak = source.peak();
    let dt = source.grid().dt();
    source
        .samples()
        .iter()
        .position(|v| v.abs() > SILENCE * peak)
        .map_or(0.0, |i| i as f64 * dt)
}

/// Largest group velocity over the bins carrying more than `1e-8` of the
/// peak spectral magnitude of `source`.
pub fn max_group_velocity(source: &Signal, medium: &YeeMedium) -> f64 {
    let spec = source.to_spectrum();
    let peak = spec.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let grid = source.grid();
    spec.values()
        .iter()
        .enumerate()
        .filter(|(k, z)| *k != 0 && z.norm() > SILENCE * peak)
        .map(|(k, _)| medium.group_velocity(grid.omega(k).abs()))
        .fold(0.0, f64::max)
}

/// Settings of one oracle cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckSettings {
    pub dx: f64,
    pub substeps: usize,
    /// Reference plane where the FDTD `(E, B)` pair is split.
    pub x_ref: f64,
}

/// Relative L2 discrepancy at one probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeDiscrepancy {
    pub x: f64,
    pub e_l2: f64,
    pub b_l2: f64,
}

/// Oracle outputs next to the spectral prediction.
#[derive(Debug, Clone)]
pub struct CrossCheck {
    pub grid: YeeGrid1D,
    pub discrepancies: Vec<ProbeDiscrepancy>,
    pub fdtd: Vec<ProbeRecord>,
    pub spectral: Vec<ProbeRecord>,
}

/// Run the oracle with `source` and compare each probe in `probes` with
/// `reconstruct(propagate_linear_exact(split(E, B at x_ref), x − x_ref))`.
pub fn cross_check(
    source: &Signal,
    params: &DrudeParams,
    settings: &CrossCheckSettings,
    probes: &[f64],
) -> Result<CrossCheck> {
    if probes.iter().any(|&x| x < settings.x_ref) {
        return Err(Error::InvalidArgument("probes must lie at or beyond the reference plane".into()));
    }
    let medium = YeeMedium::from(params);
    let v_max = max_group_velocity(source, &medium);
    let x_max = probes.iter().copied().fold(settings.x_ref, f64::max);
    let grid = YeeGrid1D::padded(
        settings.dx,
        source.grid(),
        settings.substeps,
        x_max,
        v_max,
        source_onset(source),
        params.c,
    )?;
    let mut positions = vec![settings.x_ref];
    positions.extend_from_slice(probes);
    let records = run_boundary_source(source, &grid, &medium, &positions, v_max)?;
    let reference = &records[0];
    let regime = BoundaryRegime::new(reference.e.without_mean(), reference.b.without_mean())?;
    let waves = split(&regime, params, DEFAULT_TOL_A)?;
    let mut discrepancies = Vec::new();
    let mut spectral = Vec::new();
    for rec in &records[1..] {
        let moved = propagate_linear_exact(&waves, rec.x - settings.x_ref, params)?;
        let fields = reconstruct(&moved, params, DEFAULT_TOL_A)?;
        discrepancies.push(ProbeDiscrepancy {
            x: rec.x,
            e_l2: fields.e.relative_l2(&rec.e)?,
            b_l2: fields.b.relative_l2(&rec.b)?,
        });
        spectral.push(ProbeRecord {
            x: rec.x,
            e: fields.e,
            b: fields.b,
        });
    }
    Ok(CrossCheck {
        grid,
        discrepancies,
        fdtd: records[1..].to_vec(),
        spectral,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pulse(grid: &TimeGrid, w0: f64, t0: f64, width: f64) -> Signal {
        Signal::from_fn(grid, |t| {
            let s = (t - t0) / width;
            (-s * s).exp() * (w0 * (t - t0)).cos()
        })
        .unwrap()
        .without_mean()
    }

    #[test]
    fn zero_fields_stay_zero() {
        let tg = TimeGrid::new(64, 0.5).unwrap();
        let grid = YeeGrid1D::new(100, 0.1, &tg, 6, 50, 1.0).unwrap();
        let medium = YeeMedium::from(&DrudeParams::normalized(1.0, 1.0, 0.0).unwrap());
        let mut s = MaxwellState::zeros(grid.nx);
        for _ in 0..100 {
            step(&mut s, &grid, &medium, None).unwrap();
        }
        assert_eq!(s, MaxwellState::zeros(grid.nx));
    }

    #[test]
    fn grid_validation() {
        let tg = TimeGrid::new(64, 0.5).unwrap();
        assert!(YeeGrid1D::new(32, 0.1, &tg, 6, 10, 1.0).is_err());
        assert!(YeeGrid1D::new(100, 0.1, &tg, 5, 10, 1.0).is_err());
        assert!(YeeGrid1D::new(100, 0.1, &tg, 6, 0, 1.0).is_err());
        let g = YeeGrid1D::new(100, 0.1, &tg, 6, 10, 1.0).unwrap();
        assert!(matches!(g.node_of(-5.0), Err(Error::ProbeOutsideGrid { .. })));
        assert_eq!(g.node_of(0.3).unwrap(), 13);
        assert!((g.x_of(13) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn vacuum_pulse_travels_at_light_speed() {
        let medium = YeeMedium::vacuum(1.0, 1.0, 1.0);
        let tg = TimeGrid::new(64, 0.5).unwrap();
        let grid = YeeGrid1D::new(2000, 0.05, &tg, 12, 1000, 1.0).unwrap();
        let dt = grid.dt_fdtd;
        let mut s = MaxwellState::zeros(grid.nx);
        let (x0, w) = (20.0, 1.0);
        let f = |x: f64| (-((x - x0) / w).powi(2)).exp();
        for i in 0..=grid.nx {
            s.set_e(i, f(i as f64 * grid.dx), &medium);
        }
        // Right-going wave: B = E/c, staggered by half a cell and half a step.
        for i in 0..grid.nx {
            let x = (i as f64 + 0.5) * grid.dx;
            s.set_b(i, f(x + 0.5 * dt * medium.c) / medium.c, &medium);
        }
        for _ in 0..1000 {
            step(&mut s, &grid, &medium, None).unwrap();
        }
        let peak = (0..=grid.nx)
            .max_by(|&a, &b| s.e[a].partial_cmp(&s.e[b]).unwrap())
            .unwrap();
        let expected = x0 + medium.c * 1000.0 * dt;
        assert!((peak as f64 * grid.dx - expected).abs() <= grid.dx);
    }

    #[test]
    fn vacuum_discrete_energy_is_conserved() {
        let medium = YeeMedium::vacuum(1.0, 1.0, 1.0);
        let tg = TimeGrid::new(64, 0.5).unwrap();
        let grid = YeeGrid1D::new(400, 0.05, &tg, 12, 200, 1.0).unwrap();
        let mut s = MaxwellState::zeros(grid.nx);
        for i in 1..grid.nx {
            s.set_e(i, (-((i as f64 * grid.dx - 10.0) / 0.7).powi(2)).exp(), &medium);
        }
        // W = ½Σε₀E² + ½Σ B⁻B⁺/μ₀ is invariant under the lossless leapfrog;
        // it pairs E at step n with B at n − ½ and n + ½.
        let mut first = None;
        let mut prev = 0.0;
        for _ in 0..3000 {
            let b_old = s.b.clone();
            step_magnetic(&mut s, &grid, &medium);
            let w = 0.5 * s.e.iter().map(|e| medium.eps0 * e * e).sum::<f64>()
                + 0.5 * s.b.iter().zip(&b_old).map(|(a, b)| a * b / medium.mu0).sum::<f64>();
            let w0 = *first.get_or_insert(w);
            assert!((w - w0).abs() <= 1e-10 * w0, "{w} vs {w0}");
            prev = w;
            step_electric(&mut s, &grid, &medium, None);
        }
        let first = first.unwrap();
        assert!((prev - first).abs() <= 1e-10 * first);
    }

    #[test]
    fn auxiliary_currents_reproduce_drude_response() {
        // Drive each current with a unit cosine starting on the discrete
        // particular solution; the polarization amplitude must track the
        // continuous susceptibility −p²/ω².
        let medium = YeeMedium::from(&DrudeParams::normalized(1.0, 1.3, 0.0).unwrap());
        let dt = 0.02;
        for w in [0.2f64, 0.5, 0.8] {
            let wd = 2.0 / dt * (0.5 * w * dt).sin();
            let continuous = -1.0 / (w * w);

            // Electric: P, E at integer steps, Jₑ at half steps.
            let kp = dt * medium.eps0 * medium.omega_pe.powi(2);
            let amp = -medium.eps0 * medium.omega_pe.powi(2) / (wd * wd);
            let mut p = amp;
            let mut j = amp * ((w * dt).cos() - 1.0) / dt - kp;
            for n in 0..5000 {
                advance_current(&mut j, (w * n as f64 * dt).cos(), kp);
                advance_polarization(&mut p, j, dt);
                let want = amp * (w * (n + 1) as f64 * dt).cos();
                assert!((p - want).abs() <= 1e-9 * amp.abs());
            }
            let chi_e = amp / (medium.eps0 * medium.omega_pe.powi(2));
            assert!((chi_e - continuous).abs() <= 5e-3 * continuous.abs());

            // Magnetic: M, H at half steps, Jₘ at integer steps.
            let kq = dt * medium.mu0 * medium.omega_pm.powi(2);
            let amp = -medium.mu0 * medium.omega_pm.powi(2) / (wd * wd);
            let mut m = amp * (0.5 * w * dt).cos();
            let mut jm = 0.0;
            for n in 0..5000 {
                let t = (n as f64 + 0.5) * dt;
                advance_polarization(&mut m, jm, dt);
                assert!((m - amp * (w * t).cos()).abs() <= 1e-9 * amp.abs());
                advance_current(&mut jm, (w * t).cos(), kq);
            }
            let chi_m = amp / (medium.mu0 * medium.omega_pm.powi(2));
            assert!((chi_m - continuous).abs() <= 5e-3 * continuous.abs());
        }
    }

    #[test]
    fn upsampling_interpolates_band_limited_signals() {
        let tg = TimeGrid::new(64, 0.5).unwrap();
        let w = tg.omega(5);
        let s = Signal::from_fn(&tg, |t| (w * t).sin()).unwrap();
        let fine = upsample(&s, 6);
        for (i, v) in fine.iter().enumerate() {
            let t = i as f64 * tg.dt() / 6.0;
            assert!((v - (w * t).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn transmission_phase_matches_the_slowness() {
        let params = DrudeParams::normalized(1.0, 1.0, 0.0).unwrap();
        let medium = YeeMedium::from(&params);
        let w = 0.3;
        let tg = TimeGrid::new(64, 0.25).unwrap();
        let grid = YeeGrid1D::new(14000, 0.05, &tg, 6, 7000, 1.0).unwrap();
        let (x1, x2) = (2.0, 6.0);
        let n1 = grid.node_of(x1).unwrap();
        let n2 = grid.node_of(x2).unwrap();
        let mut s = MaxwellState::zeros(grid.nx);
        let dt = grid.dt_fdtd;
        let ramp = 150.0;
        let period = 2.0 * PI / w;
        let t_end = ramp + 12.0 * period + 150.0;
        let steps = (t_end / dt) as usize;
        let window_start = steps - (6.0 * period / dt).round() as usize;
        let (mut z1, mut z2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for n in 0..steps {
            if n >= window_start {
                let t = n as f64 * dt;
                let ph = Complex64::from_polar(1.0, -w * t);
                z1 += ph * s.e[n1];
                z2 += ph * s.e[n2];
            }
            let t = (n as f64 + 0.5) * dt;
            let env = if t < ramp { (0.5 * PI * t / ramp).sin().powi(2) } else { 1.0 };
            step(&mut s, &grid, &medium, Some((grid.source_node, env * (w * t).sin()))).unwrap();
        }
        let dphi = (z2 / z1).arg();
        let a = crate::medium::a_symbol(&params, w).unwrap().real().unwrap();
        let k_exact = -w * a;
        let k_measured = dphi / (x2 - x1);
        // Phase differences are known modulo 2π.
        let k_wrapped = k_measured + 2.0 * PI / (x2 - x1) * ((k_exact - k_measured) * (x2 - x1) / (2.0 * PI)).round();
        assert!((k_wrapped - k_exact).abs() <= 0.01 * k_exact, "{k_wrapped} vs {k_exact}");
    }

    #[test]
    fn superposition_and_causality() {
        let params = DrudeParams::normalized(1.0, 1.0, 0.0).unwrap();
        let medium = YeeMedium::from(&params);
        let tg = TimeGrid::new(256, 0.5).unwrap();
        let grid = YeeGrid1D::new(3000, 0.1, &tg, 6, 1500, 1.0).unwrap();
        let a = pulse(&tg, 0.6, 40.0, 8.0);
        let b = pulse(&tg, 0.4, 50.0, 10.0);
        let probes = [0.0, 8.0];
        let v = 1.0;
        let ra = run_boundary_source(&a, &grid, &medium, &probes, v).unwrap();
        let rb = run_boundary_source(&b, &grid, &medium, &probes, v).unwrap();
        let sum = a.combine(2.0, &b, -1.0).unwrap();
        let rs = run_boundary_source(&sum, &grid, &medium, &probes, v).unwrap();
        for i in 0..probes.len() {
            let want = ra[i].e.combine(2.0, &rb[i].e, -1.0).unwrap();
            assert!(rs[i].e.max_abs_diff(&want).unwrap() <= 1e-12 * want.peak());
        }
        // Nothing reaches x = 8 faster than light; the source is silent before t = 0.
        let onset = source_onset(&a);
        for (k, v) in ra[1].e.samples().iter().enumerate() {
            if (k as f64) * tg.dt() < onset + 8.0 / medium.c {
                assert!(v.abs() <= 1e-6 * a.peak());
            }
        }
    }

    #[test]
    fn contamination_is_detected() {
        let params = DrudeParams::normalized(1.0, 1.0, 0.0).unwrap();
        let medium = YeeMedium::from(&params);
        let tg = TimeGrid::new(256, 0.5).unwrap();
        let grid = YeeGrid1D::new(200, 0.1, &tg, 6, 100, 1.0).unwrap();
        let a = pulse(&tg, 0.6, 40.0, 8.0);
        assert!(matches!(
            run_boundary_source(&a, &grid, &medium, &[1.0], 1.0),
            Err(Error::Contamination { .. })
        ));
    }
}
