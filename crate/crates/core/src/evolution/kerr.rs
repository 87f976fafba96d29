//! Kerr-coupled directed waves.
//!
//! The marched system is
//!
//! ```text
//! ∂ₓΠ = ∂ₜ⁻¹[−d·Π − g·N(Π − Λ)]
//! ∂ₓΛ = ∂ₜ⁻¹[+d·Λ + g·N(Π − Λ)]
//! ```
//!
//! with `N(u) = post((pre u)³)`. In physical variables `d = pq/c`,
//! `g = K/c`, `pre = ∂ₜ²`; in the rescaled variables `d = g = 1`,
//! `pre = 1`, `post = ∂ₜ²`.
//!
//! The linear part is diagonal per bin and is integrated exactly; the
//! nonlinear part by classical RK4 in the interaction picture (Lawson's
//! integrating-factor RK4). With `g = 0` the scheme reproduces the
//! Klein–Gordon propagator to rounding.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{kerr_constant, Model, PropagationRecord, RecordMeta};
use crate::error::{Error, Result};
use crate::medium::DrudeParams;
use crate::spectral::{time_derivative, two_thirds_mask, Multiplier, MultiplierKind, Signal, Spectrum, TimeGrid, ZeroModeRule};
use crate::waves::DirectedPair;

/// How `μ̂` enters the Kerr source.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuModel {
    /// Only the `q²∂ₜ⁻²` term of `μ̂/μ₀ = 1 − q²∂ₜ⁻²`, which dominates at low frequency.
    #[default]
    Dominant,
    /// Both terms.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Variables {
    Physical,
    Rescaled,
}

/// Coefficients and operators of one Kerr-coupled system on one grid.
#[derive(Debug, Clone)]
pub struct KerrSystem {
    params: DrudeParams,
    grid: TimeGrid,
    dispersion: f64,
    kerr: f64,
    variables: Variables,
    mu_model: MuModel,
    pre: Vec<Complex64>,
    /// `post` composed with `∂ₜ⁻¹`.
    post: Vec<Complex64>,
}

impl KerrSystem {
    /// `d = pq/c`, `g = K/c`, cube of `(Π − Λ)_tt`.
    pub fn physical(params: &DrudeParams, grid: &TimeGrid, mu_model: MuModel) -> Result<Self> {
        params.validate()?;
        let q2 = params.omega_pm * params.omega_pm;
        let post = move |w: f64| match mu_model {
            MuModel::Dominant => 1.0,
            // μ̂ = μ₀(1 − q²∂ₜ⁻²): relative to the dominant term the extra piece is −∂ₜ²/q².
            MuModel::Full => 1.0 + w * w / q2,
        };
        Ok(Self::build(
            params,
            grid,
            params.pq() / params.c,
            kerr_constant(params) / params.c,
            Variables::Physical,
            mu_model,
            |w| -w * w,
            post,
        ))
    }

    /// Unit-coefficient system in `(π, λ, ζ)`: `π_ζ = −∂ₜ⁻¹π − ∂ₜ[(π − λ)³]`.
    pub fn rescaled(params: &DrudeParams, grid: &TimeGrid) -> Result<Self> {
        params.validate()?;
        Ok(Self::build(params, grid, 1.0, 1.0, Variables::Rescaled, MuModel::Dominant, |_| 1.0, |w| -w * w))
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        params: &DrudeParams,
        grid: &TimeGrid,
        dispersion: f64,
        kerr: f64,
        variables: Variables,
        mu_model: MuModel,
        pre: impl Fn(f64) -> f64,
        post: impl Fn(f64) -> f64,
    ) -> Self {
        let pre = Multiplier::from_symbol(grid, ZeroModeRule::Annihilate, |w| Complex64::new(pre(w), 0.0));
        let post = Multiplier::from_symbol(grid, ZeroModeRule::Annihilate, |w| Complex64::new(0.0, -post(w) / w));
        Self {
            params: *params,
            grid: grid.clone(),
            dispersion,
            kerr,
            variables,
            mu_model,
            pre: pre.values().to_vec(),
            post: post.values().to_vec(),
        }
    }

    /// Same system with the linear coefficient `d` replaced.
    pub fn with_dispersion(mut self, d: f64) -> Self {
        self.dispersion = d;
        self
    }

    /// Same system with the Kerr coefficient `g` replaced.
    pub fn with_kerr(mut self, g: f64) -> Self {
        self.kerr = g;
        self
    }

    pub fn dispersion(&self) -> f64 {
        self.dispersion
    }

    pub fn kerr(&self) -> f64 {
        self.kerr
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// `∂ₜ⁻¹N(u)` in the spectral domain, sign not yet applied.
    fn source(&self, u: &[Complex64], mask: Option<&[bool]>) -> Result<Vec<Complex64>> {
        let mut v: Vec<Complex64> = u.iter().zip(&self.pre).map(|(a, b)| a * b).collect();
        if let Some(m) = mask {
            zero_masked(&mut v, m);
        }
        let field = Spectrum::new(&self.grid, v)?.to_signal();
        let cube = Signal::new(&self.grid, field.samples().iter().map(|x| x * x * x).collect())?;
        let mut out = cube.to_spectrum().into_values();
        if let Some(m) = mask {
            zero_masked(&mut out, m);
        }
        for (z, p) in out.iter_mut().zip(&self.post) {
            *z *= p * self.kerr;
        }
        Ok(out)
    }

    /// Nonlinear part of the right-hand side, `(∂ₜ⁻¹[−gN], ∂ₜ⁻¹[+gN])`.
    pub fn nonlinear_rhs(&self, dp: &DirectedPair, dealias: bool) -> Result<DirectedPair> {
        self.check_grid(dp.grid())?;
        let u = dp.pi.sub(&dp.lambda)?.to_spectrum();
        let mask = dealias.then(|| two_thirds_mask(&self.grid));
        let s = Spectrum::new(&self.grid, self.source(u.values(), mask.as_deref())?)?.to_signal();
        Ok(DirectedPair {
            pi: s.scaled(-1.0),
            lambda: s,
        })
    }

    /// Full right-hand side `(∂ₓΠ, ∂ₓΛ)`.
    pub fn rhs(&self, dp: &DirectedPair, dealias: bool) -> Result<DirectedPair> {
        let nl = self.nonlinear_rhs(dp, dealias)?;
        let dtinv = time_derivative(MultiplierKind::DDtInv, &self.grid)?.scaled(self.dispersion);
        DirectedPair::new(
            nl.pi.sub(&dtinv.apply(&dp.pi)?)?,
            nl.lambda.add(&dtinv.apply(&dp.lambda)?)?,
        )
    }

    fn check_grid(&self, grid: &TimeGrid) -> Result<()> {
        if grid.same_as(&self.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

fn zero_masked(v: &mut [Complex64], mask: &[bool]) {
    for (z, keep) in v.iter_mut().zip(mask) {
        if !keep {
            *z = Complex64::new(0.0, 0.0);
        }
    }
}

/// Spectral state `(Π̂, Λ̂)`.
#[derive(Clone)]
struct State {
    pi: Vec<Complex64>,
    la: Vec<Complex64>,
}

impl State {
    fn from_pair(dp: &DirectedPair) -> Self {
        Self {
            pi: dp.pi.to_spectrum().into_values(),
            la: dp.lambda.to_spectrum().into_values(),
        }
    }

    fn to_pair(&self, grid: &TimeGrid) -> Result<DirectedPair> {
        DirectedPair::new(
            Spectrum::new(grid, self.pi.clone())?.to_signal_checked(1e-8)?,
            Spectrum::new(grid, self.la.clone())?.to_signal_checked(1e-8)?,
        )
    }

    /// `self + h·other`.
    fn axpy(&self, h: f64, other: &State) -> State {
        let f = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| x + y * h).collect();
        State {
            pi: f(&self.pi, &other.pi),
            la: f(&self.la, &other.la),
        }
    }

    fn propagated(&self, prop: &Propagator) -> State {
        let f = |a: &[Complex64], m: &[Complex64]| a.iter().zip(m).map(|(x, y)| x * y).collect();
        State {
            pi: f(&self.pi, &prop.pi),
            la: f(&self.la, &prop.la),
        }
    }

    fn is_finite(&self) -> bool {
        self.pi.iter().chain(&self.la).all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Exact linear flow over one distance for each component.
struct Propagator {
    pi: Vec<Complex64>,
    la: Vec<Complex64>,
}

impl Propagator {
    fn new(grid: &TimeGrid, d: f64, x: f64) -> Self {
        Self {
            pi: Multiplier::propagator(grid, x, |w| Complex64::new(0.0, d / w)).values().to_vec(),
            la: Multiplier::propagator(grid, x, |w| Complex64::new(0.0, -d / w)).values().to_vec(),
        }
    }
}

struct Stepper<'a> {
    system: &'a KerrSystem,
    mask: Option<Vec<bool>>,
    unidirectional: bool,
    half: Propagator,
    full: Propagator,
    h: f64,
}

impl Stepper<'_> {
    fn n(&self, s: &State) -> Result<State> {
        let src = if self.unidirectional {
            self.system.source(&s.pi, self.mask.as_deref())?
        } else {
            let u: Vec<Complex64> = s.pi.iter().zip(&s.la).map(|(a, b)| a - b).collect();
            self.system.source(&u, self.mask.as_deref())?
        };
        let la = if self.unidirectional {
            vec![Complex64::new(0.0, 0.0); src.len()]
        } else {
            src.clone()
        };
        Ok(State {
            pi: src.into_iter().map(|z| -z).collect(),
            la,
        })
    }

    fn step(&self, u: &State) -> Result<State> {
        let h = self.h;
        let k1 = self.n(u)?;
        let a = u.axpy(0.5 * h, &k1).propagated(&self.half);
        let k2 = self.n(&a)?;
        let eu_half = u.propagated(&self.half);
        let b = eu_half.axpy(0.5 * h, &k2);
        let k3 = self.n(&b)?;
        let c = u.propagated(&self.full).axpy(h, &k3.propagated(&self.half));
        let k4 = self.n(&c)?;
        let mid = k2.axpy(1.0, &k3).propagated(&self.half);
        Ok(u
            .axpy(h / 6.0, &k1)
            .propagated(&self.full)
            .axpy(h / 3.0, &mid)
            .axpy(h / 6.0, &k4))
    }
}

/// March `system` from `dp0` at `x = 0` to `x_end` in `n_steps` uniform steps,
/// recording every station. With `unidirectional` the left wave is held at 0.
pub fn propagate_system(
    system: &KerrSystem,
    dp0: &DirectedPair,
    x_end: f64,
    n_steps: usize,
    dealias: bool,
    unidirectional: bool,
) -> Result<PropagationRecord> {
    system.check_grid(dp0.grid())?;
    if n_steps < 4 {
        return Err(Error::InvalidArgument(format!("n_steps = {n_steps} must be at least 4")));
    }
    if !(x_end > 0.0 && x_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("x_end = {x_end} must be finite and positive")));
    }
    if !dp0.is_finite() {
        return Err(Error::NonFinite("initial state"));
    }
    let grid = system.grid();
    let h = x_end / n_steps as f64;
    let stepper = Stepper {
        system,
        mask: dealias.then(|| two_thirds_mask(grid)),
        unidirectional,
        half: Propagator::new(grid, system.dispersion, 0.5 * h),
        full: Propagator::new(grid, system.dispersion, h),
        h,
    };
    let model = match (system.variables, unidirectional) {
        (Variables::Rescaled, _) => Model::Dimensionless,
        (Variables::Physical, true) => Model::Unidirectional,
        (Variables::Physical, false) => Model::Nonlinear,
    };
    let meta = RecordMeta {
        model,
        params: system.params,
        grid: grid.spec(),
        steps: n_steps,
        dealias,
        mu_model: system.mu_model,
    };

    let mut state = State::from_pair(dp0);
    if unidirectional {
        state.la.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
    }
    let mut stations = vec![0.0];
    let mut states = vec![state.to_pair(grid)?];
    for i in 1..=n_steps {
        let x = h * i as f64;
        let next = match stepper.step(&state) {
            Ok(s) if s.is_finite() => s,
            Ok(_) | Err(Error::NonFinite(_)) => {
                return Err(Error::BlowUp {
                    x,
                    record: Box::new(PropagationRecord::new(stations, states, meta)?),
                })
            }
            Err(e) => return Err(e),
        };
        state = next;
        stations.push(x);
        states.push(state.to_pair(grid)?);
    }
    PropagationRecord::new(stations, states, meta)
}

/// The Kerr-coupled system in physical variables with the dominant `μ̂` term.
pub fn propagate_nonlinear(
    dp0: &DirectedPair,
    x_end: f64,
    n_steps: usize,
    params: &DrudeParams,
    dealias: bool,
) -> Result<PropagationRecord> {
    let system = KerrSystem::physical(params, dp0.grid(), MuModel::Dominant)?;
    propagate_system(&system, dp0, x_end, n_steps, dealias, false)
}

/// Right wave only: `∂ₓΠ = ∂ₜ⁻¹[−(pq/c)Π − (K/c)(Π_tt)³]`.
pub fn propagate_unidirectional(
    pi0: &Signal,
    x_end: f64,
    n_steps: usize,
    params: &DrudeParams,
    dealias: bool,
) -> Result<PropagationRecord> {
    let system = KerrSystem::physical(params, pi0.grid(), MuModel::Dominant)?;
    let dp0 = DirectedPair::new(pi0.clone(), Signal::zeros(pi0.grid()))?;
    propagate_system(&system, &dp0, x_end, n_steps, dealias, true)
}

/// The unit-coefficient system from `(π, λ)` at `ζ = 0` to `zeta_end`.
pub fn propagate_dimensionless(
    dp0: &DirectedPair,
    zeta_end: f64,
    n_steps: usize,
    params: &DrudeParams,
    dealias: bool,
) -> Result<PropagationRecord> {
    let system = KerrSystem::rescaled(params, dp0.grid())?;
    propagate_system(&system, dp0, zeta_end, n_steps, dealias, false)
}

/// Kerr source `(χ⁽³⁾/2)·μ₀q²·∂ₜ⁻¹(e³)`.
pub fn build_nonlinearity(e: &Signal, params: &DrudeParams) -> Result<Signal> {
    build_nonlinearity_with(e, params, MuModel::Dominant)
}

/// Kerr source with the chosen `μ̂` model; [`MuModel::Full`] gives
/// `(χ⁽³⁾/2)·μ₀·(q²∂ₜ⁻¹ − ∂ₜ)(e³)`.
pub fn build_nonlinearity_with(e: &Signal, params: &DrudeParams, mu_model: MuModel) -> Result<Signal> {
    let grid = e.grid();
    let q2 = params.omega_pm * params.omega_pm;
    let scale = 0.5 * params.chi3 * params.mu0;
    let op = Multiplier::from_symbol(grid, ZeroModeRule::Annihilate, |w| {
        let full = match mu_model {
            MuModel::Dominant => 0.0,
            MuModel::Full => w,
        };
        Complex64::new(0.0, scale * (-q2 / w - full))
    });
    op.apply(&e.map(|v| v * v * v))
}
