//! Traveling profiles `Π(ξ)`, `ξ = x − vt`.
//!
//! Linear profiles solve the Klein–Gordon pair in closed form. The nonlinear
//! profile obeys `Π_ξξ = F(Π)` where `y = F(Π)` is the real root of
//! `K_v·y³ + c·y + pq·Π = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::kerr_constant;
use crate::medium::DrudeParams;

/// Newton polish steps applied after the closed-form root.
const NEWTON_STEPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryParams {
    /// Profile speed.
    pub v: f64,
    /// `k = √(pq/(c·v))`.
    pub k: f64,
    /// `ω = v·k`.
    pub omega: f64,
    /// `K_v = μ₀χ⁽³⁾c³v⁶/(2p³q)`.
    pub big_k_v: f64,
}

pub fn stationary_params(v: f64, params: &DrudeParams) -> Result<StationaryParams> {
    params.validate()?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidArgument(format!("profile speed v = {v} must be positive")));
    }
    let k = (params.pq() / (params.c * v)).sqrt();
    Ok(StationaryParams {
        v,
        k,
        omega: v * k,
        big_k_v: kerr_constant(params) * v.powi(6),
    })
}

/// One sampled profile: `value[i] = Π(xi[i])`, `slope[i] = Π'(xi[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub xi: Vec<f64>,
    pub value: Vec<f64>,
    pub slope: Vec<f64>,
}

/// `R(ξ) = A·exp(kξ)`. At fixed x it decays in t for `v > 0`; at fixed t it
/// grows in x.
pub fn linear_r_profile(amplitude: f64, sp: &StationaryParams, xi: &[f64]) -> Profile {
    let value: Vec<f64> = xi.iter().map(|&s| amplitude * (sp.k * s).exp()).collect();
    let slope = value.iter().map(|r| sp.k * r).collect();
    Profile {
        xi: xi.to_vec(),
        value,
        slope,
    }
}

/// `L(ξ) = B·sin(kξ)`.
pub fn linear_l_profile(amplitude: f64, sp: &StationaryParams, xi: &[f64]) -> Profile {
    Profile {
        xi: xi.to_vec(),
        value: xi.iter().map(|&s| amplitude * (sp.k * s).sin()).collect(),
        slope: xi.iter().map(|&s| amplitude * sp.k * (sp.k * s).cos()).collect(),
    }
}

/// Real root `y` of `K_v·y³ + c·y + pq·Π = 0`.
///
/// With `K_v > 0` the cubic is strictly increasing in `y`, so the root is
/// unique. It is taken from the hyperbolic form of Cardano's formula and
/// polished by Newton steps.
pub fn cardano_f(pi_value: f64, sp: &StationaryParams, params: &DrudeParams) -> f64 {
    let (c, pq, kv) = (params.c, params.pq(), sp.big_k_v);
    let linear = -pq * pi_value / c;
    if kv == 0.0 || pi_value == 0.0 {
        return linear;
    }
    // Depressed cubic y³ + P·y + Q = 0 with P > 0.
    let p = c / kv;
    let q = pq * pi_value / kv;
    let m = (p / 3.0).sqrt();
    let mut y = -2.0 * m * ((1.5 * q / p / m).asinh() / 3.0).sinh();
    for _ in 0..NEWTON_STEPS {
        let f = kv * y * y * y + c * y + pq * pi_value;
        let df = 3.0 * kv * y * y + c;
        let next = y - f / df;
        if next == y {
            break;
        }
        y = next;
    }
    y
}

/// `|Π|` below which the order-3 series converges:
/// `(2c/(3pq))·√(c/(3K_v))`, infinite for a linear medium.
pub fn series_radius(sp: &StationaryParams, params: &DrudeParams) -> f64 {
    if sp.big_k_v == 0.0 {
        return f64::INFINITY;
    }
    let c = params.c;
    2.0 * c / (3.0 * params.pq()) * (c / (3.0 * sp.big_k_v)).sqrt()
}

/// Series inversion of the cubic: order 1 gives `−(pq/c)Π`, order 3 adds
/// `K_v(pq)³Π³/c⁴`.
pub fn series_f(pi_value: f64, sp: &StationaryParams, params: &DrudeParams, order: u32) -> Result<f64> {
    let (c, pq) = (params.c, params.pq());
    let y1 = -pq * pi_value / c;
    let radius = series_radius(sp, params);
    if pi_value.abs() > radius {
        log::warn!("|Pi| = {:e} exceeds the series radius {radius:e}", pi_value.abs());
    }
    match order {
        1 => Ok(y1),
        3 => Ok(y1 + sp.big_k_v * pq.powi(3) * pi_value.powi(3) / c.powi(4)),
        _ => Err(Error::InvalidArgument(format!("series order {order} is not 1 or 3"))),
    }
}

/// RK4 integration of `Π' = S`, `S' = F(Π)` on `n_steps + 1` points of `[0, xi_end]`.
pub fn integrate_oscillator(
    pi0: f64,
    dpi0: f64,
    xi_end: f64,
    n_steps: usize,
    sp: &StationaryParams,
    params: &DrudeParams,
) -> Result<Profile> {
    if n_steps < 4 {
        return Err(Error::InvalidArgument(format!("n_steps = {n_steps} must be at least 4")));
    }
    if !(xi_end.is_finite() && pi0.is_finite() && dpi0.is_finite()) {
        return Err(Error::InvalidArgument("oscillator inputs must be finite".into()));
    }
    let h = xi_end / n_steps as f64;
    let f = |y: f64| cardano_f(y, sp, params);
    let mut profile = Profile {
        xi: vec![0.0],
        value: vec![pi0],
        slope: vec![dpi0],
    };
    let (mut y, mut s) = (pi0, dpi0);
    for i in 1..=n_steps {
        let (k1y, k1s) = (s, f(y));
        let (k2y, k2s) = (s + 0.5 * h * k1s, f(y + 0.5 * h * k1y));
        let (k3y, k3s) = (s + 0.5 * h * k2s, f(y + 0.5 * h * k2y));
        let (k4y, k4s) = (s + h * k3s, f(y + h * k3y));
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        s += h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
        let xi = h * i as f64;
        if !(y.is_finite() && s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "oscillator state became non-finite at xi = {xi} after {i} steps"
            )));
        }
        profile.xi.push(xi);
        profile.value.push(y);
        profile.slope.push(s);
    }
    Ok(profile)
}

/// `½Π'² + (pq/2c)Π²`, conserved by the linear oscillator.
pub fn linear_first_integral(value: f64, slope: f64, params: &DrudeParams) -> f64 {
    0.5 * slope * slope + 0.5 * params.pq() / params.c * value * value
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(chi3: f64) -> DrudeParams {
        DrudeParams::normalized(1.0, 1.7, chi3).unwrap()
    }

    #[test]
    fn light_speed_profile() {
        let p = DrudeParams::normalized(2.0, 2.0, 0.0).unwrap();
        let sp = stationary_params(p.c, &p).unwrap();
        assert!((sp.k - 2.0 / p.c).abs() < 1e-15);
        assert!((sp.omega - 2.0).abs() < 1e-15);
        assert!(stationary_params(0.0, &p).is_err());
        assert!(stationary_params(-1.0, &p).is_err());
    }

    #[test]
    fn doubling_speed_scales_wavenumber() {
        let p = params(0.0);
        let a = stationary_params(0.4, &p).unwrap();
        let b = stationary_params(0.8, &p).unwrap();
        assert!((a.k / b.k - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn profile_endpoints() {
        let p = params(0.0);
        let sp = stationary_params(0.7, &p).unwrap();
        let r = linear_r_profile(2.5, &sp, &[0.0]);
        assert_eq!(r.value[0], 2.5);
        let l = linear_l_profile(1.5, &sp, &[0.0]);
        assert_eq!(l.value[0], 0.0);
        assert!((l.slope[0] - 1.5 * sp.k).abs() < 1e-15);
    }

    #[test]
    fn linear_cardano_and_series_agree() {
        let p = params(0.0);
        let sp = stationary_params(0.5, &p).unwrap();
        for pi in [-2.0, 0.3, 7.0] {
            let want = -p.pq() * pi / p.c;
            assert_eq!(cardano_f(pi, &sp, &p), want);
            assert_eq!(series_f(pi, &sp, &p, 1).unwrap(), want);
            assert_eq!(series_f(pi, &sp, &p, 3).unwrap(), want);
        }
        assert!(series_f(1.0, &sp, &p, 2).is_err());
    }

    #[test]
    fn cubic_correction_weakens_the_restoring_force() {
        let p = params(0.5);
        let sp = stationary_params(0.9, &p).unwrap();
        let pi = 0.05;
        let s1 = series_f(pi, &sp, &p, 1).unwrap();
        let s3 = series_f(pi, &sp, &p, 3).unwrap();
        let exact = cardano_f(pi, &sp, &p);
        assert!(s3 > s1);
        assert!(exact > s1);
        assert!((s3 - exact).abs() < (s1 - exact).abs());
    }

    #[test]
    fn series_error_is_fifth_order() {
        let p = params(0.5);
        let sp = stationary_params(0.9, &p).unwrap();
        let amps: Vec<f64> = (0..6).map(|i| 0.05 * 0.5f64.powi(i)).collect();
        let errs: Vec<f64> = amps
            .iter()
            .map(|&a| (series_f(a, &sp, &p, 3).unwrap() - cardano_f(a, &sp, &p)).abs())
            .collect();
        let slope = (errs[0] / errs[3]).ln() / (amps[0] / amps[3]).ln();
        assert!(slope >= 4.8, "slope {slope}, errors {errs:?}");
    }

    #[test]
    fn linear_oscillator_matches_sine_and_conserves_energy() {
        let p = params(0.0);
        let sp = stationary_params(0.5, &p).unwrap();
        let kappa = (p.pq() / p.c).sqrt();
        let prof = integrate_oscillator(0.0, 1.0, 20.0, 4000, &sp, &p).unwrap();
        let e0 = linear_first_integral(prof.value[0], prof.slope[0], &p);
        for ((xi, v), s) in prof.xi.iter().zip(&prof.value).zip(&prof.slope) {
            assert!((v - (kappa * xi).sin() / kappa).abs() < 1e-8);
            assert!((linear_first_integral(*v, *s, &p) - e0).abs() <= 1e-8 * e0);
        }
    }

    #[test]
    fn zero_initial_data_stays_zero() {
        let p = params(0.3);
        let sp = stationary_params(0.5, &p).unwrap();
        let prof = integrate_oscillator(0.0, 0.0, 5.0, 10, &sp, &p).unwrap();
        assert!(prof.value.iter().chain(&prof.slope).all(|v| *v == 0.0));
        assert!(integrate_oscillator(0.0, 0.0, 5.0, 3, &sp, &p).is_err());
    }

    proptest! {
        #[test]
        fn wavenumber_identities(v in 1e-3f64..1e3, pe in 0.1f64..10.0, pm in 0.1f64..10.0) {
            let p = DrudeParams::normalized(pe, pm, 0.0).unwrap();
            let sp = stationary_params(v, &p).unwrap();
            prop_assert!((sp.k * sp.k * p.c * v / p.pq() - 1.0).abs() < 1e-12);
            prop_assert!((sp.k * sp.omega * p.c / p.pq() - 1.0).abs() < 1e-12);
            prop_assert!((sp.omega / sp.k - v).abs() <= 1e-12 * v);
        }

        #[test]
        fn cardano_root_is_exact_odd_and_decreasing(
            pi in -1e3f64..1e3,
            chi3 in 0.0f64..10.0,
            v in 0.1f64..3.0,
        ) {
            let p = params(chi3);
            let sp = stationary_params(v, &p).unwrap();
            let y = cardano_f(pi, &sp, &p);
            let residual = (p.c * y + p.pq() * pi + sp.big_k_v * y.powi(3)).abs();
            let scale = (p.c * y).abs().max((p.pq() * pi).abs());
            prop_assert!(residual <= 1e-12 * scale.max(f64::MIN_POSITIVE));
            prop_assert_eq!(cardano_f(-pi, &sp, &p), -y);
            prop_assert!(cardano_f(pi + 1e-3, &sp, &p) < y);
        }
    }
}
