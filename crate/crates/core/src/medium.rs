//! Lossless Drude medium: frequency responses, the slowness symbol `a(ω)`,
//! its low-frequency expansion and the dispersive energy density.
//!
//! Frequencies are angular (rad/s). Every function here is a pure function of
//! its arguments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vacuum light speed (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permeability (H/m).
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;

const UNIT_RELATION_TOL: f64 = 1e-12;

/// Physical constants and plasma frequencies of a lossless Drude medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrudeParams {
    /// Electric plasma frequency (rad/s).
    pub omega_pe: f64,
    /// Magnetic plasma frequency (rad/s).
    pub omega_pm: f64,
    /// Vacuum light speed (m/s).
    pub c: f64,
    /// Vacuum permittivity (F/m).
    pub eps0: f64,
    /// Vacuum permeability (H/m).
    pub mu0: f64,
    /// Kerr coefficient (m²/V²).
    pub chi3: f64,
}

impl DrudeParams {
    pub fn new(omega_pe: f64, omega_pm: f64, c: f64, eps0: f64, mu0: f64, chi3: f64) -> Result<Self> {
        let params = Self {
            omega_pe,
            omega_pm,
            c,
            eps0,
            mu0,
            chi3,
        };
        params.validate()?;
        Ok(params)
    }

    /// SI vacuum constants with `eps0` derived from `mu0` so that `c²ε₀μ₀ = 1`.
    pub fn si(omega_pe: f64, omega_pm: f64, chi3: f64) -> Result<Self> {
        let mu0 = VACUUM_PERMEABILITY;
        let eps0 = 1.0 / (mu0 * SPEED_OF_LIGHT * SPEED_OF_LIGHT);
        Self::new(omega_pe, omega_pm, SPEED_OF_LIGHT, eps0, mu0, chi3)
    }

    /// Normalized units: `c = ε₀ = μ₀ = 1`.
    pub fn normalized(omega_pe: f64, omega_pm: f64, chi3: f64) -> Result<Self> {
        Self::new(omega_pe, omega_pm, 1.0, 1.0, 1.0, chi3)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.omega_pe, self.omega_pm, self.c, self.eps0, self.mu0, self.chi3];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if self.omega_pe <= 0.0 || self.omega_pm <= 0.0 {
            return Err(Error::InvalidParams("plasma frequencies must be positive".into()));
        }
        if self.c <= 0.0 || self.eps0 <= 0.0 || self.mu0 <= 0.0 {
            return Err(Error::InvalidParams("c, eps0 and mu0 must be positive".into()));
        }
        let unity = self.c * self.c * self.eps0 * self.mu0;
        if (unity - 1.0).abs() > UNIT_RELATION_TOL {
            return Err(Error::InvalidParams(format!(
                "c^2 * eps0 * mu0 = {unity} differs from 1 by more than {UNIT_RELATION_TOL:e}"
            )));
        }
        if self.chi3 < 0.0 {
            return Err(Error::InvalidParams("chi3 must be non-negative".into()));
        }
        Ok(())
    }

    /// Product `p·q` of the plasma frequencies.
    pub fn pq(&self) -> f64 {
        self.omega_pe * self.omega_pm
    }

    /// Lower edge of the evanescent band, `min(p, q)`.
    pub fn lower_edge(&self) -> f64 {
        self.omega_pe.min(self.omega_pm)
    }

    /// Upper edge of the evanescent band, `max(p, q)`.
    pub fn upper_edge(&self) -> f64 {
        self.omega_pe.max(self.omega_pm)
    }

    pub fn with_chi3(mut self, chi3: f64) -> Self {
        self.chi3 = chi3;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseKind {
    Electric,
    Magnetic,
}

/// Relative permittivity or permeability `1 − ω_p²/ω²`.
pub fn drude_response(kind: ResponseKind, params: &DrudeParams, omega: f64) -> Result<f64> {
    check_nonzero(omega)?;
    let wp = match kind {
        ResponseKind::Electric => params.omega_pe,
        ResponseKind::Magnetic => params.omega_pm,
    };
    Ok(1.0 - (wp / omega).powi(2))
}

/// `a²(ω) = ε(ω)μ(ω)/c²` (s²/m²).
pub fn a_squared(params: &DrudeParams, omega: f64) -> Result<f64> {
    let eps = drude_response(ResponseKind::Electric, params, omega)?;
    let mu = drude_response(ResponseKind::Magnetic, params, omega)?;
    Ok(eps * mu / (params.c * params.c))
}

/// Value of the slowness symbol at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slowness {
    /// Real `a(ω)` in s/m.
    Real(f64),
    /// `a²(ω) < 0`: no propagating branch.
    Evanescent { a_squared: f64 },
}

impl Slowness {
    pub fn real(self) -> Option<f64> {
        match self {
            Slowness::Real(a) => Some(a),
            Slowness::Evanescent { .. } => None,
        }
    }
}

/// Slowness symbol `a(ω)` with the physical branch.
///
/// Below both plasma frequencies (double-negative band) the root is taken
/// negative, which is the branch whose leading low-frequency term is
/// `ω_pe ω_pm ∂ₜ⁻²/c` (the symbol of `∂ₜ⁻²` being `−1/ω²`). Above both plasma
/// frequencies it is positive. Between them `a²< 0` and the evanescent marker
/// is returned. The symbol is even in `ω`.
pub fn a_symbol(params: &DrudeParams, omega: f64) -> Result<Slowness> {
    let a2 = a_squared(params, omega)?;
    let w = omega.abs();
    let (lo, hi) = (params.lower_edge(), params.upper_edge());
    if w > lo && w < hi {
        return Ok(Slowness::Evanescent { a_squared: a2 });
    }
    let magnitude = a2.max(0.0).sqrt();
    Ok(Slowness::Real(if w <= lo { -magnitude } else { magnitude }))
}

/// Coefficients of a three-term operator expansion
/// `â ≈ k_m2·∂ₜ⁻² + k_0 + k_p2·∂ₜ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorCoefficients {
    /// Coefficient of `∂ₜ⁻²`.
    pub k_m2: f64,
    /// Constant coefficient.
    pub k_0: f64,
    /// Coefficient of `∂ₜ²`.
    pub k_p2: f64,
}

impl TaylorCoefficients {
    /// Frequency symbol of the expansion, using `∂ₜ⁻² → −1/ω²` and `∂ₜ² → −ω²`.
    pub fn symbol(&self, omega: f64) -> f64 {
        let w2 = omega * omega;
        -self.k_m2 / w2 + self.k_0 - self.k_p2 * w2
    }

    /// Symbol of the leading term only.
    pub fn leading_symbol(&self, omega: f64) -> f64 {
        -self.k_m2 / (omega * omega)
    }
}

/// Closed-form expansion coefficients of `â` about `ω = 0`:
///
/// `k_m2 = pq/c`, `k_0 = −(p² + q²)/(2cpq)`,
/// `k_p2 = [1/(2pq) + (p² + q²)²/(8p³q³)]/c`.
///
/// Only the leading coefficient agrees with the Laurent series of
/// [`a_symbol`]; the subleading ones carry the opposite sign to it. Use
/// [`series_coefficients`] where the expansion must converge to the symbol.
pub fn taylor_coefficients(params: &DrudeParams) -> TaylorCoefficients {
    let (p, q, c) = (params.omega_pe, params.omega_pm, params.c);
    let s = p * p + q * q;
    TaylorCoefficients {
        k_m2: p * q / c,
        k_0: -0.5 * s / (p * q) / c,
        k_p2: (0.5 / (p * q) + s * s / (8.0 * (p * q).powi(3))) / c,
    }
}

/// Laurent coefficients of [`a_symbol`] in the lower band, written as operator
/// coefficients. Their symbol matches `a(ω)` with a relative residual of
/// order `ω⁶`.
pub fn series_coefficients(params: &DrudeParams) -> TaylorCoefficients {
    let (p, q, c) = (params.omega_pe, params.omega_pm, params.c);
    let s = p * p + q * q;
    TaylorCoefficients {
        k_m2: p * q / c,
        k_0: 0.5 * s / (p * q) / c,
        k_p2: (0.5 / (p * q) - s * s / (8.0 * (p * q).powi(3))) / c,
    }
}

/// Relative error of the leading term `−pq/(cω²)` against the exact symbol.
pub fn taylor_truncation_error(params: &DrudeParams, omega: f64) -> Result<f64> {
    check_nonzero(omega)?;
    let w = omega.abs();
    let edge = params.lower_edge();
    if w >= edge {
        return Err(Error::OutsideLowerBand { omega, edge });
    }
    let exact = a_symbol(params, w)?
        .real()
        .ok_or(Error::OutsideLowerBand { omega, edge })?;
    let leading = taylor_coefficients(params).leading_symbol(w);
    Ok((leading - exact).abs() / exact.abs())
}

/// Relative truncation error sampled on `count` evenly spaced points of
/// `(0, upper]`. Points outside the lower band are skipped.
pub fn taylor_error_curve(params: &DrudeParams, upper: f64, count: usize) -> Vec<(f64, f64)> {
    (1..=count)
        .map(|i| upper * i as f64 / count as f64)
        .filter_map(|w| taylor_truncation_error(params, w).ok().map(|e| (w, e)))
        .collect()
}

/// Dispersive energy density `d(ωε)/dω·E² + d(ωμ)/dω·H²`
/// `= (1 + ω_pe²/ω²)E² + (1 + ω_pm²/ω²)H²`.
pub fn energy_density(params: &DrudeParams, omega: f64, e: f64, h: f64) -> Result<f64> {
    check_nonzero(omega)?;
    let w2 = omega * omega;
    let de = 1.0 + params.omega_pe * params.omega_pe / w2;
    let dm = 1.0 + params.omega_pm * params.omega_pm / w2;
    Ok(de * e * e + dm * h * h)
}

fn check_nonzero(omega: f64) -> Result<()> {
    if omega == 0.0 || !omega.is_finite() {
        Err(Error::Singularity { omega })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn equal(p: f64) -> DrudeParams {
        DrudeParams::normalized(p, p, 0.0).unwrap()
    }

    #[test]
    fn response_examples() {
        let params = DrudeParams::normalized(2.0, 3.0, 0.0).unwrap();
        let e = |w| drude_response(ResponseKind::Electric, &params, w).unwrap();
        assert_eq!(e(2.0), 0.0);
        assert_eq!(e(1.0), -3.0);
        let m = drude_response(ResponseKind::Magnetic, &params, 3.0e6).unwrap();
        assert!((m - 1.0).abs() < 1e-11);
        assert!(matches!(
            drude_response(ResponseKind::Electric, &params, 0.0),
            Err(Error::Singularity { .. })
        ));
    }

    #[test]
    fn response_matches_closed_form_on_log_sweep() {
        let params = DrudeParams::normalized(1.3, 0.7, 0.0).unwrap();
        let count = 1_000_000;
        for i in 0..count {
            let w = 10f64.powf(-3.0 + 6.0 * i as f64 / (count - 1) as f64);
            let got = drude_response(ResponseKind::Electric, &params, w).unwrap();
            let want = 1.0 - 1.3 * 1.3 / (w * w);
            assert!((got - want).abs() <= 4.0 * f64::EPSILON * want.abs().max(1.0));
        }
    }

    #[test]
    fn si_constants_satisfy_unit_relation() {
        let params = DrudeParams::si(1e10, 2e10, 0.0).unwrap();
        assert!((params.c.powi(2) * params.eps0 * params.mu0 - 1.0).abs() < 1e-12);
        assert!(DrudeParams::new(1.0, 1.0, 1.0, 1.0, 1.0 + 1e-9, 0.0).is_err());
        assert!(DrudeParams::normalized(0.0, 1.0, 0.0).is_err());
        assert!(DrudeParams::normalized(1.0, 1.0, -1e-3).is_err());
    }

    #[test]
    fn a_squared_examples() {
        let p = equal(1.0);
        assert_eq!(a_squared(&p, 0.5).unwrap(), 9.0);
        assert_eq!(a_squared(&p, 1.0).unwrap(), 0.0);
        let split = DrudeParams::normalized(1.0, 2.0, 0.0).unwrap();
        assert!(a_squared(&split, 1.5).unwrap() < 0.0);
    }

    #[test]
    fn a_symbol_branches() {
        let p = equal(1.0);
        for &w in &[0.05, 0.3, 0.5, 0.99, 1.01, 2.0, 40.0] {
            let a = a_symbol(&p, w).unwrap().real().unwrap();
            let want = 1.0 - 1.0 / (w * w);
            assert!((a - want).abs() < 1e-12 * want.abs().max(1.0), "w = {w}");
        }
        assert!((a_symbol(&p, 0.1).unwrap().real().unwrap() + 99.0).abs() < 1e-12);

        let split = DrudeParams::normalized(1.0, 2.0, 0.0).unwrap();
        assert!(matches!(a_symbol(&split, 1.5).unwrap(), Slowness::Evanescent { .. }));
        assert!(a_symbol(&split, 0.5).unwrap().real().unwrap() < 0.0);
        assert!(a_symbol(&split, 2.5).unwrap().real().unwrap() > 0.0);
        assert_eq!(a_symbol(&split, -0.5).unwrap(), a_symbol(&split, 0.5).unwrap());
    }

    #[test]
    fn taylor_coefficients_equal_frequencies() {
        let p = 1.7;
        let t = taylor_coefficients(&equal(p));
        assert!((t.k_m2 - p * p).abs() < 1e-14);
        assert!((t.k_0 + 1.0).abs() < 1e-14);
        assert!((t.k_p2 - 1.0 / (p * p)).abs() < 1e-14);

        let s = series_coefficients(&equal(p));
        assert!((s.k_0 - 1.0).abs() < 1e-14);
        assert!(s.k_p2.abs() < 1e-14);
    }

    #[test]
    fn taylor_leading_term_is_bilinear() {
        let base = taylor_coefficients(&DrudeParams::normalized(1.0, 2.0, 0.0).unwrap()).k_m2;
        let doubled = taylor_coefficients(&DrudeParams::normalized(2.0, 2.0, 0.0).unwrap()).k_m2;
        let both = taylor_coefficients(&DrudeParams::normalized(2.0, 4.0, 0.0).unwrap()).k_m2;
        assert!((doubled - 2.0 * base).abs() < 1e-14);
        assert!((both - 4.0 * base).abs() < 1e-14);
    }

    #[test]
    fn published_expansion_tracks_symbol_relatively() {
        // Relative residual of the closed-form coefficients decays like ω².
        let params = DrudeParams::normalized(1.0, 1.4, 0.0).unwrap();
        let t = taylor_coefficients(&params);
        let rel = |w: f64| {
            let a = a_symbol(&params, w).unwrap().real().unwrap();
            ((t.symbol(w) - a) / a).abs()
        };
        let mut prev = rel(0.2);
        for k in 1..6 {
            let w = 0.2 / 2f64.powi(k);
            let r = rel(w);
            let ratio = prev / r;
            assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio} at w = {w}");
            prev = r;
        }
    }

    #[test]
    fn series_expansion_converges_at_sixth_order() {
        let params = DrudeParams::normalized(1.0, 1.4, 0.0).unwrap();
        let s = series_coefficients(&params);
        let rel = |w: f64| {
            let a = a_symbol(&params, w).unwrap().real().unwrap();
            ((s.symbol(w) - a) / a).abs()
        };
        let mut prev = rel(0.2);
        for k in 1..4 {
            let w = 0.2 / 2f64.powi(k);
            let r = rel(w);
            let ratio = prev / r;
            assert!((ratio - 64.0).abs() < 6.0, "ratio {ratio} at w = {w}");
            prev = r;
        }
    }

    #[test]
    fn truncation_error_examples() {
        let p = equal(1.0);
        let at_half = taylor_truncation_error(&p, 0.5).unwrap();
        assert!((at_half - 1.0 / 3.0).abs() < 1e-14);
        assert!(taylor_truncation_error(&p, 1e-6).unwrap() < 1e-11);
        assert!(matches!(
            taylor_truncation_error(&p, 1.2),
            Err(Error::OutsideLowerBand { .. })
        ));
        let split = DrudeParams::normalized(1.0, 2.0, 0.0).unwrap();
        assert!(taylor_truncation_error(&split, 1.5).is_err());
    }

    #[test]
    fn truncation_error_is_monotone_on_lower_half_band() {
        for params in [equal(1.0), DrudeParams::normalized(1.0, 1.8, 0.0).unwrap()] {
            let curve = taylor_error_curve(&params, 0.5 * params.lower_edge(), 2000);
            assert_eq!(curve.len(), 2000);
            assert!(curve.windows(2).all(|w| w[1].1 > w[0].1));
        }
    }

    #[test]
    fn energy_density_examples() {
        let p = equal(1.0);
        assert_eq!(energy_density(&p, 0.3, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(energy_density(&p, 1.0, 1.0, 1.0).unwrap(), 4.0);
        let split = DrudeParams::normalized(1.0, 3.0, 0.0).unwrap();
        // The magnetic term uses omega_pm, the electric term omega_pe.
        assert_eq!(energy_density(&split, 1.0, 1.0, 0.0).unwrap(), 2.0);
        assert_eq!(energy_density(&split, 1.0, 0.0, 1.0).unwrap(), 10.0);
    }

    proptest! {
        #[test]
        fn energy_density_is_positive(
            w in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3],
            e in -10.0f64..10.0,
            h in -10.0f64..10.0,
            p in 0.1f64..10.0,
            q in 0.1f64..10.0,
        ) {
            prop_assume!(e != 0.0 || h != 0.0);
            let params = DrudeParams::normalized(p, q, 0.0).unwrap();
            prop_assert!(energy_density(&params, w, e, h).unwrap() > 0.0);
        }

        #[test]
        fn symbol_squares_to_a_squared(
            w in 1e-3f64..1e3,
            p in 0.1f64..10.0,
            q in 0.1f64..10.0,
        ) {
            let params = DrudeParams::normalized(p, q, 0.0).unwrap();
            if let Slowness::Real(a) = a_symbol(&params, w).unwrap() {
                let a2 = a_squared(&params, w).unwrap();
                prop_assert!((a * a - a2).abs() <= 1e-12 * a2.abs().max(f64::MIN_POSITIVE));
            }
        }
    }
}
