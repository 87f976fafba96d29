//! Directed-wave amplitudes at a boundary plane.
//!
//! `Π = ½(B + âE)` is the right wave, `Λ = ½(B − âE)` the left wave. Both
//! carry the units of `B`: `â` has units s/m, so `âE` is flux-density-like.

use crate::error::{Error, Result};
use crate::medium::DrudeParams;
use crate::projectors::FieldPair;
use crate::spectral::{make_multiplier, MultiplierKind, Signal, TimeGrid};

/// Relative DC content above which boundary data is reported as contaminated.
pub const DC_TOL: f64 = 1e-8;

/// Right-wave `Π` and left-wave `Λ` amplitudes at one x-station.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectedPair {
    pub pi: Signal,
    pub lambda: Signal,
}

impl DirectedPair {
    pub fn new(pi: Signal, lambda: Signal) -> Result<Self> {
        if !pi.grid().same_as(lambda.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { pi, lambda })
    }

    pub fn zeros(grid: &TimeGrid) -> Self {
        Self {
            pi: Signal::zeros(grid),
            lambda: Signal::zeros(grid),
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        self.pi.grid()
    }

    pub fn peak(&self) -> f64 {
        self.pi.peak().max(self.lambda.peak())
    }

    pub fn max_abs_diff(&self, other: &DirectedPair) -> Result<f64> {
        Ok(self
            .pi
            .max_abs_diff(&other.pi)?
            .max(self.lambda.max_abs_diff(&other.lambda)?))
    }

    pub fn scaled(&self, factor: f64) -> DirectedPair {
        DirectedPair {
            pi: self.pi.scaled(factor),
            lambda: self.lambda.scaled(factor),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.pi.samples().iter().chain(self.lambda.samples()).all(|v| v.is_finite())
    }
}

/// Boundary regime `E(0, t) = j(t)`, `B(0, t) = k(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryRegime {
    pub j: Signal,
    pub k: Signal,
}

impl BoundaryRegime {
    pub fn new(j: Signal, k: Signal) -> Result<Self> {
        if !j.grid().same_as(k.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { j, k })
    }

    pub fn grid(&self) -> &TimeGrid {
        self.j.grid()
    }

    /// Regime whose left wave vanishes: `k = âj`.
    pub fn right_going(j: Signal, params: &DrudeParams, tol_a: f64) -> Result<Self> {
        let a = make_multiplier(MultiplierKind::A, params, j.grid(), tol_a)?;
        let k = a.apply(&j)?;
        Self::new(j, k)
    }

    /// Regime whose right wave vanishes: `k = −âj`.
    pub fn left_going(j: Signal, params: &DrudeParams, tol_a: f64) -> Result<Self> {
        let a = make_multiplier(MultiplierKind::A, params, j.grid(), tol_a)?;
        let k = a.apply(&j)?.scaled(-1.0);
        Self::new(j, k)
    }

    /// Largest relative DC content of the two signals.
    pub fn dc_content(&self) -> f64 {
        [&self.j, &self.k]
            .iter()
            .map(|s| {
                let peak = s.peak();
                if peak == 0.0 {
                    0.0
                } else {
                    s.mean().abs() / peak
                }
            })
            .fold(0.0, f64::max)
    }
}

impl From<FieldPair> for BoundaryRegime {
    fn from(f: FieldPair) -> Self {
        Self { j: f.e, k: f.b }
    }
}

/// `Λ = ½(k − âj)`, `Π = ½(k + âj)`.
///
/// DC content above [`DC_TOL`] is logged and then annihilated by `â`.
pub fn split(regime: &BoundaryRegime, params: &DrudeParams, tol_a: f64) -> Result<DirectedPair> {
    let dc = regime.dc_content();
    if dc > DC_TOL {
        log::warn!("boundary regime carries DC content {dc:.3e} of peak; it is discarded");
    }
    let a = make_multiplier(MultiplierKind::A, params, regime.grid(), tol_a)?;
    let aj = a.apply(&regime.j)?;
    DirectedPair::new(regime.k.combine(0.5, &aj, 0.5)?, regime.k.combine(0.5, &aj, -0.5)?)
}

/// `B = Π + Λ`, `E = â⁻¹(Π − Λ)`.
pub fn reconstruct(dp: &DirectedPair, params: &DrudeParams, tol_a: f64) -> Result<FieldPair> {
    let a_inv = make_multiplier(MultiplierKind::AInv, params, dp.grid(), tol_a)?;
    let b = dp.pi.add(&dp.lambda)?;
    let e = a_inv.apply(&dp.pi.sub(&dp.lambda)?)?;
    FieldPair::new(b, e)
}
