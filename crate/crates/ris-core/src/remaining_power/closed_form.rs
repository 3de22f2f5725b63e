//! Closed-form approximations Γ*(φ) and their stated error orders.
//!
//! Every expression describes the a = 1 amplitude
//! β̄(φ) = (1+b)/2 + (1−b)/2·sin(φ−c), which upper-bounds β for any a ≥ 1,
//! so the steepness parameter never enters.

use super::{Method, PropId, ReflectionCase, RpResult};
use crate::circular_noise::NoiseSpec;
use crate::error::{usage, Result};
use crate::pda::PdaParams;
use crate::special_functions::{rho, rho_bar, BesselRatioMode, MODE_THRESHOLD};

// (sin τ/τ)² to τ⁸.
fn uniform_power(t: f64) -> f64 {
    let t2 = t * t;
    1.0 - t2 / 3.0 + 2.0 * t2 * t2 / 45.0 - t2 * t2 * t2 / 360.0 + t2 * t2 * t2 * t2 / 14400.0
}

// E[cos²δ] to τ⁶.
fn cos2_mean(t: f64) -> f64 {
    let t2 = t * t;
    1.0 - t2 / 3.0 + t2 * t2 / 15.0 - 2.0 * t2 * t2 * t2 / 315.0
}

// E[sin²δ] to τ⁶.
fn sin2_mean(t: f64) -> f64 {
    1.0 - cos2_mean(t)
}

// sin τ/τ to τ⁴.
fn sinc4(t: f64) -> f64 {
    let t2 = t * t;
    1.0 - t2 / 6.0 + t2 * t2 / 120.0
}

// sin τ/τ to τ⁶.
fn sinc6(t: f64) -> f64 {
    let t2 = t * t;
    sinc4(t) - t2 * t2 * t2 / 5040.0
}

// ζ = β̄(φ)², written in s = sin(φ − c).
fn zeta(b: f64, s: f64) -> f64 {
    (1.0 - b).powi(2) / 4.0 * s * s + (1.0 - b * b) / 2.0 * s + (1.0 + b).powi(2) / 4.0
}

fn rho_auto(kappa: f64) -> Result<f64> {
    rho(kappa, BesselRatioMode::auto(kappa))
}

fn rho_bar_auto(kappa: f64) -> Result<f64> {
    rho_bar(kappa, BesselRatioMode::auto(kappa))
}

/// Γ*(φ) for the given closed form.
///
/// Case I expressions take their constant amplitude from `case`; the others
/// use `pda.b` and `pda.c`.
pub fn gamma_closed_form(
    prop: PropId,
    case: &ReflectionCase,
    pda: &PdaParams,
    noise: &NoiseSpec,
    phi: f64,
) -> Result<RpResult> {
    prop.check(case, noise)?;
    pda.validate()?;
    let b = pda.b;
    let (s, co) = (phi - pda.c).sin_cos();
    let tau = noise.family.tau().unwrap_or(0.0);
    let kappa = noise.family.kappa().unwrap_or(0.0);
    let const_beta = match case {
        ReflectionCase::CaseI { beta } => *beta,
        _ => 1.0,
    };
    let lo = (1.0 - b) / 2.0;
    let hi = (1.0 + b) / 2.0;
    use PropId::*;
    let gamma = match prop {
        P3_1 => const_beta * const_beta * uniform_power(tau),
        P3_2 => const_beta * const_beta * rho_auto(kappa)?.powi(2),
        P3_3 => zeta(b, s) * uniform_power(tau),
        P3_4 => zeta(b, s) * rho_auto(kappa)?.powi(2),
        P3_5 => {
            let e1 = lo * s * cos2_mean(tau);
            let e2 = hi * sinc6(tau);
            let e3 = lo * lo * sin2_mean(tau).powi(2) * co * co;
            (e1 + e2).powi(2) + e3
        }
        P3_6 => {
            let r = rho_auto(kappa)?;
            let rb = rho_bar_auto(kappa)?;
            let e1 = hi * r;
            let e2 = (1.0 - b) / 4.0 * s * (1.0 + rb);
            let e3 = (1.0 - b).powi(2) / 16.0 * co * co * (1.0 - rb).powi(2);
            (e1 + e2).powi(2) + e3
        }
        P3_7 => {
            let e2 = sinc4(tau);
            let e1 = lo * s * e2 + hi;
            e1 * e1 * e2 * e2
        }
        P3_8 => {
            let r = rho_auto(kappa)?;
            let e = lo * s * r + hi;
            e * e * r * r
        }
        P3_9 => {
            let u = 1.0 / kappa;
            let k = 1.0 - u / 8.0 - u * u / 64.0 - u * u * u / 128.0;
            let kc = u / 8.0 + u * u / 64.0 + u * u * u / 128.0;
            let (c2, s2) = (cos2_mean(tau), sin2_mean(tau));
            let (e1, e2, e3, e4) = (c2 * k, s2 * k, c2 * kc, s2 * kc);
            let e5 = sinc4(tau) * (1.0 - u / 2.0 - u * u / 8.0 - u * u * u / 8.0);
            (lo * s * (e1 - e4) + hi * e5).powi(2) + lo * lo * co * co * (e2 + e3).powi(2)
        }
        P3_10 => {
            let e = sinc4(tau) * rho_auto(kappa)?;
            (lo * s * e + hi).powi(2) * e * e
        }
    };
    let error_estimate = error_order(prop, noise)?;
    Ok(RpResult {
        gamma,
        method: Method::ClosedForm { prop },
        error_estimate,
    })
}

/// Γ*(φ_U), the phase-independent upper bound of each closed form.
pub fn closed_form_phi_upper(
    prop: PropId,
    case: &ReflectionCase,
    pda: &PdaParams,
    noise: &NoiseSpec,
) -> Result<f64> {
    Ok(gamma_closed_form(prop, case, pda, noise, pda.phi_upper())?.gamma)
}

/// The stated truncation order of each closed form evaluated at the noise
/// level: τ¹⁰, τ⁸, τ⁶ for the uniform expressions, κ⁻⁴ (or the small-κ
/// power below the mode threshold) for the von Mises ones, and τ⁶ + κ⁻⁴
/// for the composite uniform/von Mises expression.
///
/// The composite fully-coupled expression carries no order; its error is of
/// order 1e-2 and this returns 1e-2.
pub fn error_order(prop: PropId, noise: &NoiseSpec) -> Result<f64> {
    let tau = noise.family.tau().unwrap_or(0.0);
    let kappa = noise.family.kappa().unwrap_or(0.0);
    let vm = |small_power: i32| {
        if kappa < MODE_THRESHOLD {
            kappa.powi(small_power)
        } else {
            kappa.powi(-4)
        }
    };
    use PropId::*;
    Ok(match prop {
        P3_1 | P3_3 => tau.powi(10),
        P3_5 => tau.powi(8),
        P3_7 => tau.powi(6),
        P3_2 => vm(9),
        P3_4 => vm(10),
        P3_6 | P3_8 => vm(6),
        P3_10 => {
            if kappa < MODE_THRESHOLD {
                return Err(usage(
                    "composite expression has no stated small-kappa order",
                ));
            }
            tau.powi(6) + kappa.powi(-4)
        }
        P3_9 => 1e-2,
    })
}
