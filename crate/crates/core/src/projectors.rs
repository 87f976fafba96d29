//! Projector pair splitting `(B, E)` into the two eigen-subspaces of the
//! x-evolution operator `L̂ = [[0, −∂ₜâ²], [−∂ₜ, 0]]`.
//!
//! ```text
//! P⁽¹⁾ = ½ [[1, −â], [−â⁻¹, 1]]      P⁽²⁾ = ½ [[1, +â], [+â⁻¹, 1]]
//! ```
//!
//! Per frequency bin `P⁽¹⁾` projects onto the eigenvector `B = −aE` of the
//! symbol of `L̂` (eigenvalue `+iωa`), `P⁽²⁾` onto `B = aE` (eigenvalue `−iωa`).
//! The algebra holds on the zero-mean subspace: `â` and `â⁻¹` annihilate DC.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::medium::DrudeParams;
use crate::spectral::{make_multiplier, random_zero_mean, Multiplier, MultiplierKind, Signal, TimeGrid};

/// Magnetic flux density `B` and electric field `E` at one x-station.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldPair {
    pub b: Signal,
    pub e: Signal,
}

impl FieldPair {
    pub fn new(b: Signal, e: Signal) -> Result<Self> {
        if !b.grid().same_as(e.grid()) {
            return Err(crate::Error::GridMismatch);
        }
        Ok(Self { b, e })
    }

    pub fn grid(&self) -> &TimeGrid {
        self.b.grid()
    }

    pub fn peak(&self) -> f64 {
        self.b.peak().max(self.e.peak())
    }

    pub fn combine(&self, alpha: f64, other: &FieldPair, beta: f64) -> Result<FieldPair> {
        Ok(FieldPair {
            b: self.b.combine(alpha, &other.b, beta)?,
            e: self.e.combine(alpha, &other.e, beta)?,
        })
    }

    pub fn max_abs_diff(&self, other: &FieldPair) -> Result<f64> {
        Ok(self.b.max_abs_diff(&other.b)?.max(self.e.max_abs_diff(&other.e)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    First,
    Second,
}

impl Which {
    fn sign(self) -> f64 {
        match self {
            Which::First => -1.0,
            Which::Second => 1.0,
        }
    }
}

/// The two projectors on one grid, sharing the `â` and `â⁻¹` multipliers.
#[derive(Clone, Debug)]
pub struct ProjectorPair {
    a: Multiplier,
    a_inv: Multiplier,
    grid: TimeGrid,
}

pub fn build_projectors(params: &DrudeParams, grid: &TimeGrid, tol_a: f64) -> Result<ProjectorPair> {
    Ok(ProjectorPair {
        a: make_multiplier(MultiplierKind::A, params, grid, tol_a)?,
        a_inv: make_multiplier(MultiplierKind::AInv, params, grid, tol_a)?,
        grid: grid.clone(),
    })
}

impl ProjectorPair {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn a(&self) -> &Multiplier {
        &self.a
    }

    pub fn a_inv(&self) -> &Multiplier {
        &self.a_inv
    }

    /// `(½B ∓ ½âE, ∓½â⁻¹B + ½E)`, upper sign for [`Which::First`].
    pub fn apply(&self, which: Which, psi: &FieldPair) -> Result<FieldPair> {
        let s = which.sign();
        let ae = self.a.apply(&psi.e)?;
        let ainv_b = self.a_inv.apply(&psi.b)?;
        Ok(FieldPair {
            b: psi.b.combine(0.5, &ae, 0.5 * s)?,
            e: psi.e.combine(0.5, &ainv_b, 0.5 * s)?,
        })
    }

    /// 2×2 symbol of the chosen projector at one bin.
    pub fn symbol(&self, which: Which, bin: usize) -> [[Complex64; 2]; 2] {
        let s = which.sign();
        let half = Complex64::new(0.5, 0.0);
        [
            [half, self.a.values()[bin] * (0.5 * s)],
            [self.a_inv.values()[bin] * (0.5 * s), half],
        ]
    }
}

/// Free-function form of [`ProjectorPair::apply`].
pub fn apply_projector(pair: &ProjectorPair, which: Which, psi: &FieldPair) -> Result<FieldPair> {
    pair.apply(which, psi)
}

/// Multipliers of the evolution operator `L̂`: `(−∂ₜâ², −∂ₜ)` for the
/// off-diagonal entries.
fn evolution_operator(params: &DrudeParams, grid: &TimeGrid, tol_a: f64) -> Result<(Multiplier, Multiplier)> {
    let ddt = make_multiplier(MultiplierKind::DDt, params, grid, tol_a)?;
    let a = make_multiplier(MultiplierKind::A, params, grid, tol_a)?;
    let upper = ddt.compose(&a)?.compose(&a)?.scaled(-1.0);
    let lower = ddt.scaled(-1.0);
    Ok((upper, lower))
}

fn apply_evolution(l: &(Multiplier, Multiplier), psi: &FieldPair) -> Result<FieldPair> {
    Ok(FieldPair {
        b: l.0.apply(&psi.e)?,
        e: l.1.apply(&psi.b)?,
    })
}

/// Largest `‖(P L̂ − L̂ P)ψ‖_∞ / ‖ψ‖_∞` over `samples` random zero-mean fields
/// and both projectors.
pub fn commutation_check(
    pair: &ProjectorPair,
    params: &DrudeParams,
    grid: &TimeGrid,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let l = evolution_operator(params, grid, 0.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let psi = FieldPair::new(random_zero_mean(grid, &mut rng), random_zero_mean(grid, &mut rng))?;
        for which in [Which::First, Which::Second] {
            let pl = pair.apply(which, &apply_evolution(&l, &psi)?)?;
            let lp = apply_evolution(&l, &pair.apply(which, &psi)?)?;
            worst = worst.max(pl.max_abs_diff(&lp)? / psi.peak());
        }
    }
    Ok(worst)
}

/// Largest entry of `P(ω)L(ω) − L(ω)P(ω)` over all bins, relative to the
/// largest entry of `P(ω)L(ω)`.
pub fn bin_commutator_residual(pair: &ProjectorPair, params: &DrudeParams) -> Result<f64> {
    let grid = pair.grid();
    let l = evolution_operator(params, grid, 0.0)?;
    let zero = Complex64::new(0.0, 0.0);
    let mut worst = 0.0f64;
    for bin in 0..grid.n() {
        let lm = [[zero, l.0.values()[bin]], [l.1.values()[bin], zero]];
        for which in [Which::First, Which::Second] {
            let p = pair.symbol(which, bin);
            let pl = matmul(&p, &lm);
            let lp = matmul(&lm, &p);
            let scale = pl.iter().flatten().fold(0.0f64, |m, z| m.max(z.norm()));
            if scale == 0.0 {
                continue;
            }
            let diff = (0..2)
                .flat_map(|i| (0..2).map(move |j| (i, j)))
                .fold(0.0f64, |m, (i, j)| m.max((pl[i][j] - lp[i][j]).norm()));
            worst = worst.max(diff / scale);
        }
    }
    Ok(worst)
}

pub(crate) fn matmul(x: &[[Complex64; 2]; 2], y: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}
