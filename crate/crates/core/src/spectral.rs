//! Periodic time grid, unitary DFT pair and diagonal frequency multipliers.
//!
//! Every convolution operator of the model (ε̂, μ̂, μ̂⁻¹, â, â⁻¹, â², ∂ₜ, ∂ₜ⁻¹)
//! is realized as a bin-wise multiplier on a uniform periodic grid. The DFT
//! follows the `exp(+iωt)` synthesis convention, so `∂ₜ ↔ iω`.
//!
//! Bins are stored in FFT order: bin `k < n/2` carries `ω = 2πk/T`, bin
//! `k ≥ n/2` carries `ω = 2π(k − n)/T`. The unpaired Nyquist bin `n/2` has
//! `ω = −π/dt`; at that bin every symbol is replaced by its real part so that
//! all operators stay real-to-real.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::{a_squared, a_symbol, drude_response, DrudeParams, ResponseKind, Slowness};

/// Default lower bound on `c·|a(ω)|` for operators that divide by `a`.
pub const DEFAULT_TOL_A: f64 = 1e-6;

/// Relative imaginary residue tolerated when a real-to-real multiplier is applied.
pub const REAL_RESIDUE_TOL: f64 = 1e-10;

const MIN_POINTS: usize = 8;

struct GridInner {
    n: usize,
    dt: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic sampling `t_j = j·dt`, `j ∈ [0, n)`.
///
/// Cheap to clone; FFT plans are shared.
#[derive(Clone)]
pub struct TimeGrid {
    inner: Arc<GridInner>,
}

/// Plain-data description of a [`TimeGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub dt: f64,
}

impl TimeGrid {
    pub fn new(n: usize, dt: f64) -> Result<Self> {
        if n < MIN_POINTS || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least {MIN_POINTS}"
            )));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidGrid(format!("dt = {dt} must be positive and finite")));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Self {
            inner: Arc::new(GridInner {
                n,
                dt,
                forward,
                inverse,
            }),
        })
    }

    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        Self::new(spec.n, spec.dt)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            n: self.n(),
            dt: self.dt(),
        }
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn dt(&self) -> f64 {
        self.inner.dt
    }

    /// Window length `T = n·dt`.
    pub fn window(&self) -> f64 {
        self.inner.n as f64 * self.inner.dt
    }

    /// Spacing of the frequency grid, `2π/T`.
    pub fn d_omega(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.window()
    }

    /// Signed bin index in `[−n/2, n/2)`.
    pub fn signed_index(&self, bin: usize) -> i64 {
        let n = self.n();
        if bin < n / 2 {
            bin as i64
        } else {
            bin as i64 - n as i64
        }
    }

    pub fn omega(&self, bin: usize) -> f64 {
        self.signed_index(bin) as f64 * self.d_omega()
    }

    /// Angular frequency of every bin, in FFT order.
    pub fn omegas(&self) -> Vec<f64> {
        (0..self.n()).map(|k| self.omega(k)).collect()
    }

    pub fn nyquist_bin(&self) -> usize {
        self.n() / 2
    }

    /// Magnitude of the Nyquist frequency, `π/dt`.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n()).map(|j| j as f64 * self.dt()).collect()
    }

    /// Bin whose frequency is closest to `omega`.
    pub fn nearest_bin(&self, omega: f64) -> usize {
        let n = self.n() as i64;
        let k = (omega / self.d_omega()).round() as i64;
        k.rem_euclid(n) as usize
    }

    pub fn same_as(&self, other: &TimeGrid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.spec() == other.spec()
    }

    fn check(&self, other: &TimeGrid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

impl PartialEq for TimeGrid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Debug for TimeGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeGrid")
            .field("n", &self.n())
            .field("dt", &self.dt())
            .finish()
    }
}

/// Real samples on a [`TimeGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    grid: TimeGrid,
    samples: Vec<f64>,
}

impl Signal {
    pub fn new(grid: &TimeGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: samples.len(),
            });
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("signal construction"));
        }
        Ok(Self {
            grid: grid.clone(),
            samples,
        })
    }

    pub fn zeros(grid: &TimeGrid) -> Self {
        Self {
            grid: grid.clone(),
            samples: vec![0.0; grid.n()],
        }
    }

    /// Samples `f(t_j)`.
    pub fn from_fn(grid: &TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = grid.times().into_iter().map(f).collect();
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn scaled(&self, factor: f64) -> Signal {
        self.map(|v| v * factor)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Signal {
        Signal {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Signal, f: impl Fn(f64, f64) -> f64) -> Result<Signal> {
        self.grid.check(&other.grid)?;
        Ok(Signal {
            grid: self.grid.clone(),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `alpha·self + beta·other`.
    pub fn combine(&self, alpha: f64, other: &Signal, beta: f64) -> Result<Signal> {
        self.zip_with(other, |a, b| alpha * a + beta * b)
    }

    pub fn add(&self, other: &Signal) -> Result<Signal> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Signal) -> Result<Signal> {
        self.combine(1.0, other, -1.0)
    }

    /// Largest absolute sample difference.
    pub fn max_abs_diff(&self, other: &Signal) -> Result<f64> {
        self.grid.check(&other.grid)?;
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// `‖self − other‖₂ / ‖other‖₂`.
    pub fn relative_l2(&self, reference: &Signal) -> Result<f64> {
        let diff = self.sub(reference)?.norm();
        let norm = reference.norm();
        Ok(if norm == 0.0 { diff } else { diff / norm })
    }

    pub fn to_spectrum(&self) -> Spectrum {
        let mut buf: Vec<Complex64> = self.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.grid.inner.forward.process(&mut buf);
        let scale = 1.0 / (self.grid.n() as f64).sqrt();
        buf.iter_mut().for_each(|z| *z *= scale);
        Spectrum {
            grid: self.grid.clone(),
            values: buf,
        }
    }

    /// Zero the DC bin.
    pub fn without_mean(&self) -> Signal {
        let mut s = self.to_spectrum();
        s.values[0] = Complex64::new(0.0, 0.0);
        s.to_signal()
    }

    /// Zero the bins with `|ω| > omega_max` and the DC bin.
    pub fn band_limited(&self, omega_max: f64) -> Signal {
        let mut s = self.to_spectrum();
        s.band_limit(omega_max);
        s.values[0] = Complex64::new(0.0, 0.0);
        s.to_signal()
    }
}

/// Complex spectrum of a [`Signal`] under the unitary DFT.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: TimeGrid,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: &TimeGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn zeros(grid: &TimeGrid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Sum of `|X_k|²`; equals the sample energy of the signal.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn band_limit(&mut self, omega_max: f64) {
        for (k, z) in self.values.iter_mut().enumerate() {
            if self.grid.omega(k).abs() > omega_max {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Inverse transform keeping both real and imaginary parts.
    pub fn to_complex_samples(&self) -> Vec<Complex64> {
        let mut buf = self.values.clone();
        self.grid.inner.inverse.process(&mut buf);
        let scale = 1.0 / (self.grid.n() as f64).sqrt();
        buf.iter_mut().for_each(|z| *z *= scale);
        buf
    }

    /// Inverse transform, keeping the real part.
    pub fn to_signal(&self) -> Signal {
        Signal {
            grid: self.grid.clone(),
            samples: self.to_complex_samples().into_iter().map(|z| z.re).collect(),
        }
    }

    /// Inverse transform that rejects a relative imaginary residue above `tol`
    /// and non-finite samples.
    pub fn to_signal_checked(&self, tol: f64) -> Result<Signal> {
        let complex = self.to_complex_samples();
        if complex.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("inverse transform"));
        }
        let peak = complex.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let residue = complex.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
        if peak > 0.0 && residue > tol * peak {
            return Err(Error::ImaginaryResidue {
                residue: residue / peak,
            });
        }
        Ok(Signal {
            grid: self.grid.clone(),
            samples: complex.into_iter().map(|z| z.re).collect(),
        })
    }
}

/// Free-function form of [`Signal::to_spectrum`].
pub fn to_spectrum(signal: &Signal) -> Spectrum {
    signal.to_spectrum()
}

/// Free-function form of [`Spectrum::to_signal`].
pub fn from_spectrum(spectrum: &Spectrum) -> Signal {
    spectrum.to_signal()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierKind {
    /// `ε₀ε(ω)`
    Eps,
    /// `μ₀μ(ω)`
    Mu,
    /// `1/(μ₀μ(ω))`
    MuInv,
    /// `a(ω)`
    A,
    /// `1/a(ω)`
    AInv,
    /// `a²(ω)`
    ASq,
    /// `iω`
    DDt,
    /// `1/(iω)`
    DDtInv,
    /// `−ω²`
    D2Dt2,
    /// `−1/ω²`
    D2Dt2Inv,
    /// Anything built from an explicit symbol.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroModeRule {
    /// The DC bin is mapped to zero.
    Annihilate,
    /// The DC bin carries the symbol's value at `ω = 0`.
    Keep,
}

/// Diagonal-in-frequency operator.
#[derive(Clone, Debug)]
pub struct Multiplier {
    grid: TimeGrid,
    kind: MultiplierKind,
    values: Vec<Complex64>,
    zero_mode_rule: ZeroModeRule,
}

impl Multiplier {
    /// Operator with the symbol `f(ω)`. The DC bin follows `zero_mode_rule`
    /// (`f` is not evaluated there when annihilating); the Nyquist bin takes
    /// `Re f(ω_N)`.
    pub fn from_symbol(
        grid: &TimeGrid,
        zero_mode_rule: ZeroModeRule,
        f: impl Fn(f64) -> Complex64,
    ) -> Self {
        let nyq = grid.nyquist_bin();
        let values = (0..grid.n())
            .map(|k| {
                if k == 0 && zero_mode_rule == ZeroModeRule::Annihilate {
                    Complex64::new(0.0, 0.0)
                } else if k == nyq {
                    Complex64::new(f(grid.omega(k)).re, 0.0)
                } else {
                    f(grid.omega(k))
                }
            })
            .collect();
        Self {
            grid: grid.clone(),
            kind: MultiplierKind::Custom,
            values,
            zero_mode_rule,
        }
    }

    /// `exp(g(ω)·x)` for a purely imaginary, odd generator `g`. The DC bin is
    /// annihilated and the generator vanishes at the Nyquist bin.
    pub fn propagator(grid: &TimeGrid, x: f64, g: impl Fn(f64) -> Complex64) -> Self {
        Self::from_symbol(grid, ZeroModeRule::Annihilate, |w| (g(w) * x).exp())
            .with_nyquist(Complex64::new(1.0, 0.0))
    }

    fn with_nyquist(mut self, value: Complex64) -> Self {
        let nyq = self.grid.nyquist_bin();
        self.values[nyq] = value;
        self
    }

    pub fn identity(grid: &TimeGrid) -> Self {
        Self::from_symbol(grid, ZeroModeRule::Keep, |_| Complex64::new(1.0, 0.0))
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn kind(&self) -> MultiplierKind {
        self.kind
    }

    pub fn zero_mode_rule(&self) -> ZeroModeRule {
        self.zero_mode_rule
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `values(−ω) = conj(values(ω))` on every paired bin, real values on the
    /// DC and Nyquist bins.
    pub fn is_hermitian(&self) -> bool {
        let n = self.grid.n();
        let nyq = self.grid.nyquist_bin();
        (0..n).all(|k| {
            if k == 0 || k == nyq {
                self.values[k].im == 0.0
            } else {
                let mirror = self.values[n - k].conj();
                (self.values[k] - mirror).norm() <= 1e-15 * self.values[k].norm()
            }
        })
    }

    /// Bin-wise product, i.e. composition of the two operators.
    pub fn compose(&self, other: &Multiplier) -> Result<Multiplier> {
        self.grid.check(&other.grid)?;
        Ok(Multiplier {
            grid: self.grid.clone(),
            kind: MultiplierKind::Custom,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
            zero_mode_rule: if self.zero_mode_rule == ZeroModeRule::Keep
                && other.zero_mode_rule == ZeroModeRule::Keep
            {
                ZeroModeRule::Keep
            } else {
                ZeroModeRule::Annihilate
            },
        })
    }

    pub fn scaled(&self, factor: f64) -> Multiplier {
        Multiplier {
            values: self.values.iter().map(|v| v * factor).collect(),
            kind: MultiplierKind::Custom,
            ..self.clone()
        }
    }

    /// Multiply a spectrum in place.
    pub fn apply_spectrum(&self, spectrum: &mut Spectrum) -> Result<()> {
        self.grid.check(&spectrum.grid)?;
        for (z, m) in spectrum.values.iter_mut().zip(&self.values) {
            *z *= m;
        }
        Ok(())
    }

    /// `from_spectrum(values ⊙ to_spectrum(s))`, checked to be real and finite.
    pub fn apply(&self, signal: &Signal) -> Result<Signal> {
        let mut s = signal.to_spectrum();
        self.apply_spectrum(&mut s)?;
        s.to_signal_checked(REAL_RESIDUE_TOL)
    }
}

/// Free-function form of [`Multiplier::apply`].
pub fn apply(m: &Multiplier, s: &Signal) -> Result<Signal> {
    m.apply(s)
}

/// Build the multiplier of one model operator on `grid`.
///
/// Every kind annihilates the DC bin. `A` and `AInv` reject grids with bins in
/// the evanescent band; `AInv` also rejects bins with `c·|a| < tol_a`, and
/// `MuInv` bins with `|μ| < tol_a`.
pub fn make_multiplier(
    kind: MultiplierKind,
    params: &DrudeParams,
    grid: &TimeGrid,
    tol_a: f64,
) -> Result<Multiplier> {
    let omegas = grid.omegas();
    let nonzero = || omegas.iter().copied().filter(|&w| w != 0.0);
    let real = |v: f64| Complex64::new(v, 0.0);

    let slowness = |w: f64| -> Result<f64> {
        match a_symbol(params, w)? {
            Slowness::Real(a) => Ok(a),
            Slowness::Evanescent { .. } => Err(Error::InadmissibleGrid {
                operator: "a",
                omega: w,
                reason: "bin inside the evanescent band",
            }),
        }
    };

    match kind {
        MultiplierKind::A => {
            for w in nonzero() {
                slowness(w)?;
            }
        }
        MultiplierKind::AInv => {
            for w in nonzero() {
                let a = slowness(w)?;
                if (a * params.c).abs() < tol_a {
                    return Err(Error::InadmissibleGrid {
                        operator: "a_inv",
                        omega: w,
                        reason: "|a|·c below tolerance",
                    });
                }
            }
        }
        MultiplierKind::MuInv => {
            for w in nonzero() {
                let mu = drude_response(ResponseKind::Magnetic, params, w)?;
                if mu.abs() < tol_a {
                    return Err(Error::InadmissibleGrid {
                        operator: "mu_inv",
                        omega: w,
                        reason: "|mu| below tolerance",
                    });
                }
            }
        }
        MultiplierKind::Custom => {
            return Err(Error::InvalidArgument(
                "custom multipliers are built with Multiplier::from_symbol".into(),
            ))
        }
        _ => {}
    }

    // All fallible evaluations were checked above, so the unwraps below hold.
    let eps = |w| drude_response(ResponseKind::Electric, params, w).unwrap();
    let mu = |w| drude_response(ResponseKind::Magnetic, params, w).unwrap();
    let symbol = |w: f64| -> Complex64 {
        match kind {
            MultiplierKind::Eps => real(params.eps0 * eps(w)),
            MultiplierKind::Mu => real(params.mu0 * mu(w)),
            MultiplierKind::MuInv => real(1.0 / (params.mu0 * mu(w))),
            MultiplierKind::A => real(slowness(w).unwrap()),
            MultiplierKind::AInv => real(1.0 / slowness(w).unwrap()),
            MultiplierKind::ASq => real(a_squared(params, w).unwrap()),
            MultiplierKind::DDt => Complex64::new(0.0, w),
            MultiplierKind::DDtInv => Complex64::new(0.0, -1.0 / w),
            MultiplierKind::D2Dt2 => real(-w * w),
            MultiplierKind::D2Dt2Inv => real(-1.0 / (w * w)),
            MultiplierKind::Custom => unreachable!(),
        }
    };
    let mut m = Multiplier::from_symbol(grid, ZeroModeRule::Annihilate, symbol);
    m.kind = kind;
    Ok(m)
}

/// Multiplier for a kind that does not depend on the medium (`∂ₜ`, `∂ₜ⁻¹`, `∂ₜ²`, `∂ₜ⁻²`).
pub fn time_derivative(kind: MultiplierKind, grid: &TimeGrid) -> Result<Multiplier> {
    match kind {
        MultiplierKind::DDt | MultiplierKind::DDtInv | MultiplierKind::D2Dt2 | MultiplierKind::D2Dt2Inv => {
            // Any valid params work: these symbols never read them.
            let params = DrudeParams::normalized(1.0, 1.0, 0.0)?;
            make_multiplier(kind, &params, grid, DEFAULT_TOL_A)
        }
        other => Err(Error::InvalidArgument(format!("{other:?} depends on the medium"))),
    }
}

/// Mask keeping bins with `|k| ≤ n/3` (2/3-rule dealiasing).
pub fn two_thirds_mask(grid: &TimeGrid) -> Vec<bool> {
    let cutoff = grid.n() as i64 / 3;
    (0..grid.n())
        .map(|k| grid.signed_index(k).abs() <= cutoff)
        .collect()
}

/// Random signal with zero DC and Nyquist content and unit-order peak.
pub fn random_zero_mean<R: Rng + ?Sized>(grid: &TimeGrid, rng: &mut R) -> Signal {
    let samples: Vec<f64> = (0..grid.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut s = Signal::new(grid, samples).expect("finite samples").to_spectrum();
    let nyq = grid.nyquist_bin();
    s.values[0] = Complex64::new(0.0, 0.0);
    s.values[nyq] = Complex64::new(0.0, 0.0);
    s.to_signal()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid() -> TimeGrid {
        TimeGrid::new(256, 0.1).unwrap()
    }

    fn equal() -> DrudeParams {
        DrudeParams::normalized(1.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(4, 0.1).is_err());
        assert!(TimeGrid::new(100, 0.1).is_err());
        assert!(TimeGrid::new(64, 0.0).is_err());
        let g = TimeGrid::new(8, 0.5).unwrap();
        assert_eq!(g.window(), 4.0);
        let w = g.omegas();
        assert_eq!(g.signed_index(4), -4);
        assert!((w[4] + PI / 0.5).abs() < 1e-14);
        for k in 1..4 {
            assert_eq!(w[k], -w[8 - k]);
        }
        assert_eq!(g.nearest_bin(-g.d_omega()), 7);
    }

    #[test]
    fn constant_signal_lands_in_dc_bin() {
        let g = grid();
        let s = Signal::new(&g, vec![2.5; g.n()]).unwrap().to_spectrum();
        assert!((s.values()[0].re - 2.5 * (g.n() as f64).sqrt()).abs() < 1e-12);
        assert!(s.values()[1..].iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn on_grid_cosine_lands_in_conjugate_bins() {
        let g = grid();
        let k = 7;
        let w = g.omega(k);
        let s = Signal::from_fn(&g, |t| (w * t).cos()).unwrap().to_spectrum();
        let v = s.values();
        for (j, z) in v.iter().enumerate() {
            if j == k || j == g.n() - k {
                assert!((z.re - 0.5 * (g.n() as f64).sqrt()).abs() < 1e-10);
            } else {
                assert!(z.norm() < 1e-10);
            }
        }
        assert!((v[k] - v[g.n() - k].conj()).norm() < 1e-12);
    }

    #[test]
    fn round_trip_and_parseval() {
        let g = TimeGrid::new(1024, 0.03).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let samples: Vec<f64> = (0..g.n()).map(|_| rng.random_range(-3.0..3.0)).collect();
            let s = Signal::new(&g, samples).unwrap();
            let spec = to_spectrum(&s);
            let back = from_spectrum(&spec);
            assert!(back.max_abs_diff(&s).unwrap() <= 1e-12 * s.peak());
            let e = s.norm().powi(2);
            assert!((spec.energy() - e).abs() <= 1e-10 * e);
        }
    }

    #[test]
    fn length_and_grid_mismatch() {
        let g = grid();
        assert!(matches!(
            Signal::new(&g, vec![0.0; 3]),
            Err(Error::LengthMismatch { expected: 256, got: 3 })
        ));
        assert!(matches!(Signal::new(&g, vec![f64::NAN; 256]), Err(Error::NonFinite(_))));
        let other = TimeGrid::new(256, 0.2).unwrap();
        let m = time_derivative(MultiplierKind::DDt, &other).unwrap();
        assert!(matches!(m.apply(&Signal::zeros(&g)), Err(Error::GridMismatch)));
    }

    #[test]
    fn derivative_of_sine() {
        let g = grid();
        let w = g.omega(5);
        let s = Signal::from_fn(&g, |t| (w * t).sin()).unwrap();
        let d = time_derivative(MultiplierKind::DDt, &g).unwrap().apply(&s).unwrap();
        let want = Signal::from_fn(&g, |t| w * (w * t).cos()).unwrap();
        assert!(d.max_abs_diff(&want).unwrap() < 1e-12);
    }

    #[test]
    fn antiderivative_inverts_derivative_off_dc() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = time_derivative(MultiplierKind::DDt, &g).unwrap();
        let di = time_derivative(MultiplierKind::DDtInv, &g).unwrap();
        for _ in 0..10 {
            let s = random_zero_mean(&g, &mut rng);
            let left = di.apply(&d.apply(&s).unwrap()).unwrap();
            let right = d.apply(&di.apply(&s).unwrap()).unwrap();
            assert!(left.max_abs_diff(&s).unwrap() < 1e-10 * s.peak());
            assert!(right.max_abs_diff(&s).unwrap() < 1e-10 * s.peak());
        }
    }

    #[test]
    fn every_kind_annihilates_dc_and_is_hermitian() {
        let g = grid();
        let params = DrudeParams::normalized(1.0, 1.3, 0.0).unwrap();
        let coarse = TimeGrid::new(256, 4.0).unwrap(); // Nyquist below both plasma frequencies
        for kind in [
            MultiplierKind::Eps,
            MultiplierKind::Mu,
            MultiplierKind::MuInv,
            MultiplierKind::ASq,
            MultiplierKind::DDt,
            MultiplierKind::DDtInv,
            MultiplierKind::D2Dt2,
            MultiplierKind::D2Dt2Inv,
            MultiplierKind::A,
            MultiplierKind::AInv,
        ] {
            let target = if matches!(kind, MultiplierKind::A | MultiplierKind::AInv | MultiplierKind::MuInv) {
                &coarse
            } else {
                &g
            };
            let m = make_multiplier(kind, &params, target, DEFAULT_TOL_A).unwrap();
            assert_eq!(m.values()[0], Complex64::new(0.0, 0.0), "{kind:?}");
            assert!(m.is_hermitian(), "{kind:?}");
            assert_eq!(m.kind(), kind);
            assert_eq!(m.zero_mode_rule(), ZeroModeRule::Annihilate);
        }
    }

    #[test]
    fn evanescent_grid_is_rejected() {
        let params = DrudeParams::normalized(1.0, 1.3, 0.0).unwrap();
        let g = grid();
        assert!(matches!(
            make_multiplier(MultiplierKind::A, &params, &g, DEFAULT_TOL_A),
            Err(Error::InadmissibleGrid { operator: "a", .. })
        ));
        assert!(make_multiplier(MultiplierKind::Eps, &params, &g, DEFAULT_TOL_A).is_ok());
    }

    #[test]
    fn a_inv_rejects_zero_of_a() {
        // Choose dt so that a bin sits exactly on omega_pe = 1.
        let g = TimeGrid::new(64, 2.0 * PI / 64.0 * 8.0).unwrap();
        assert!((g.omega(8) - 1.0).abs() < 1e-15);
        let params = equal();
        assert!(make_multiplier(MultiplierKind::A, &params, &g, DEFAULT_TOL_A).is_ok());
        assert!(make_multiplier(MultiplierKind::Eps, &params, &g, DEFAULT_TOL_A).is_ok());
        assert!(matches!(
            make_multiplier(MultiplierKind::AInv, &params, &g, DEFAULT_TOL_A),
            Err(Error::InadmissibleGrid { operator: "a_inv", .. })
        ));
    }

    #[test]
    fn a_multiplier_value_at_half_plasma_frequency() {
        let g = TimeGrid::new(64, 2.0 * PI / 64.0 * 16.0).unwrap();
        let k = 8;
        assert!((g.omega(k) - 0.5).abs() < 1e-15);
        let m = make_multiplier(MultiplierKind::A, &equal(), &g, DEFAULT_TOL_A).unwrap();
        assert!((m.values()[k].re + 3.0).abs() < 1e-12);
    }

    #[test]
    fn identity_multiplier_is_identity() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples: Vec<f64> = (0..g.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = Signal::new(&g, samples).unwrap();
        let out = Multiplier::identity(&g).apply(&s).unwrap();
        assert!(out.max_abs_diff(&s).unwrap() < 1e-14);
    }

    #[test]
    fn eps_and_mu_commute_exactly() {
        let g = grid();
        let params = DrudeParams::normalized(1.0, 1.3, 0.0).unwrap();
        let eps = make_multiplier(MultiplierKind::Eps, &params, &g, DEFAULT_TOL_A).unwrap();
        let mu = make_multiplier(MultiplierKind::Mu, &params, &g, DEFAULT_TOL_A).unwrap();
        let s = random_zero_mean(&g, &mut ChaCha8Rng::seed_from_u64(4));
        let em = mu.apply(&eps.apply(&s).unwrap()).unwrap();
        let me = eps.apply(&mu.apply(&s).unwrap()).unwrap();
        assert!(em.max_abs_diff(&me).unwrap() <= 1e-13 * em.peak());
    }

    #[test]
    fn two_thirds_mask_counts() {
        let g = TimeGrid::new(128, 0.1).unwrap();
        let kept = two_thirds_mask(&g).iter().filter(|&&k| k).count();
        // |k| ≤ 128/3 = 42.
        assert_eq!(kept, 2 * 42 + 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn a_twice_equals_a_squared(seed in any::<u64>(), ratio in 0.6f64..1.6) {
            let params = DrudeParams::normalized(1.0, ratio, 0.0).unwrap();
            let g = if (ratio - 1.0).abs() < 1e-12 {
                TimeGrid::new(512, 0.1).unwrap()
            } else {
                // Keep every bin below the lower plasma frequency.
                TimeGrid::new(512, PI / (0.9 * params.lower_edge())).unwrap()
            };
            let a = make_multiplier(MultiplierKind::A, &params, &g, DEFAULT_TOL_A).unwrap();
            let a2 = make_multiplier(MultiplierKind::ASq, &params, &g, DEFAULT_TOL_A).unwrap();
            let s = random_zero_mean(&g, &mut ChaCha8Rng::seed_from_u64(seed));
            let twice = a.apply(&a.apply(&s).unwrap()).unwrap();
            let once = a2.apply(&s).unwrap();
            prop_assert!(twice.max_abs_diff(&once).unwrap() <= 1e-10 * once.peak());
        }
    }
}
