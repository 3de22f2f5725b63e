//! Modified Bessel functions of the first kind and the ratios
//! ρ(κ) = I₁(κ)/I₀(κ) and ρ̄(κ) = I₂(κ)/I₀(κ) that appear in von Mises moments.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, RisError};

/// Largest κ accepted by [`bessel_i`]; `I₀(700) ≈ 1.5e302`.
pub const KAPPA_OVERFLOW_GUARD: f64 = 700.0;

/// κ at which the automatic mode switches from the small-κ series to the
/// large-κ asymptotic expansion.
pub const MODE_THRESHOLD: f64 = 1.6;

/// How a Bessel ratio is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BesselRatioMode {
    Exact,
    SmallKappaSeries,
    LargeKappaAsymptotic,
}

impl BesselRatioMode {
    /// Series below [`MODE_THRESHOLD`], asymptotic at and above it.
    pub fn auto(kappa: f64) -> Self {
        if kappa < MODE_THRESHOLD {
            Self::SmallKappaSeries
        } else {
            Self::LargeKappaAsymptotic
        }
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa >= 0.0) {
        return Err(domain(format!("kappa must be >= 0, got {kappa}")));
    }
    if kappa > KAPPA_OVERFLOW_GUARD {
        return Err(RisError::Range(format!(
            "kappa {kappa} exceeds overflow guard {KAPPA_OVERFLOW_GUARD}"
        )));
    }
    Ok(())
}

/// `I_n(κ)` by its power series Σ (κ/2)^{n+2r} / (r! (n+r)!).
///
/// Terms are all positive, so the partial sums converge without
/// cancellation; summation stops once a term falls below 1e-16 of the sum.
pub fn bessel_i(n: u32, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    let half = 0.5 * kappa;
    // (κ/2)^n / n!, built incrementally to avoid overflow in either factor.
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    if term == 0.0 {
        return Ok(0.0);
    }
    let q = half * half;
    let mut sum = term;
    let mut r = 0u64;
    loop {
        r += 1;
        term *= q / (r as f64 * (n as u64 + r) as f64);
        sum += term;
        if term < 1e-16 * sum {
            break;
        }
    }
    Ok(sum)
}

/// ρ(κ) = I₁(κ)/I₀(κ) = E[cos γ] for γ ~ VM(0, κ).
pub fn rho(kappa: f64, mode: BesselRatioMode) -> Result<f64> {
    check_kappa(kappa)?;
    Ok(match mode {
        BesselRatioMode::Exact => bessel_i(1, kappa)? / bessel_i(0, kappa)?,
        BesselRatioMode::SmallKappaSeries => {
            let k2 = kappa * kappa;
            0.5 * kappa * (1.0 - k2 / 8.0 + k2 * k2 / 48.0 - 11.0 * k2 * k2 * k2 / 3072.0)
        }
        BesselRatioMode::LargeKappaAsymptotic => {
            if kappa == 0.0 {
                return Err(domain("large-kappa expansion is undefined at kappa = 0"));
            }
            let u = 1.0 / kappa;
            1.0 - u / 2.0 - u * u / 8.0 - u * u * u / 8.0
        }
    })
}

/// ρ̄(κ) = I₂(κ)/I₀(κ) = E[cos 2γ] for γ ~ VM(0, κ).
pub fn rho_bar(kappa: f64, mode: BesselRatioMode) -> Result<f64> {
    check_kappa(kappa)?;
    Ok(match mode {
        BesselRatioMode::Exact => bessel_i(2, kappa)? / bessel_i(0, kappa)?,
        BesselRatioMode::SmallKappaSeries => {
            let k2 = kappa * kappa;
            k2 / 8.0 * (1.0 - k2 / 6.0 + 11.0 * k2 * k2 / 384.0)
        }
        BesselRatioMode::LargeKappaAsymptotic => {
            if kappa == 0.0 {
                return Err(domain("large-kappa expansion is undefined at kappa = 0"));
            }
            let u = 1.0 / kappa;
            1.0 - 2.0 * u + u * u - u * u * u / 4.0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadOptions};
    use std::f64::consts::PI;

    // Integral representation I_n(κ) = (1/π) ∫_0^π exp(κ cos t) cos(n t) dt.
    fn bessel_by_quadrature(n: u32, kappa: f64) -> f64 {
        integrate(
            |t| (kappa * t.cos()).exp() * (n as f64 * t).cos(),
            0.0,
            PI,
            QuadOptions::tight(),
        )
        .unwrap()
        .value
            / PI
    }

    #[test]
    fn leading_terms_at_zero() {
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
        assert_eq!(rho(0.0, BesselRatioMode::Exact).unwrap(), 0.0);
        assert_eq!(rho_bar(0.0, BesselRatioMode::Exact).unwrap(), 0.0);
    }

    #[test]
    fn series_matches_integral_representation() {
        for &k in &[0.1, 0.5, 1.0, 2.0, 5.0, 8.0, 20.0, 50.0] {
            for n in 0..4 {
                let s = bessel_i(n, k).unwrap();
                let q = bessel_by_quadrature(n, k);
                // The oscillating integrand loses digits relative to I₀, not to I_n.
                let scale = bessel_i(0, k).unwrap();
                assert!((s - q).abs() < 1e-12 * scale, "n={n} k={k}: {s} vs {q}");
            }
        }
    }

    #[test]
    fn reference_values() {
        assert!((bessel_i(0, 2.0).unwrap() - 2.2796).abs() < 5e-5);
        assert!((bessel_i(1, 2.0).unwrap() - 1.5906).abs() < 5e-5);
        assert!((rho(2.0, BesselRatioMode::Exact).unwrap() - 0.6978).abs() < 5e-5);
        assert!((rho_bar(5.0, BesselRatioMode::Exact).unwrap() - 0.642_64).abs() < 5e-5);
        let asym = rho_bar(5.0, BesselRatioMode::LargeKappaAsymptotic).unwrap();
        assert!((asym - 0.638).abs() < 5e-4);
    }

    #[test]
    fn guards() {
        assert!(matches!(bessel_i(0, -1.0), Err(RisError::Domain(_))));
        assert!(matches!(bessel_i(0, 701.0), Err(RisError::Range(_))));
        assert!(bessel_i(0, 700.0).unwrap().is_finite());
        assert!(rho(f64::NAN, BesselRatioMode::Exact).is_err());
    }

    #[test]
    fn series_vs_asymptotic_crossover() {
        let err = |k: f64, m| (rho(k, m).unwrap() - rho(k, BesselRatioMode::Exact).unwrap()).abs();
        use BesselRatioMode::*;
        assert!(err(1.2, SmallKappaSeries) < err(1.2, LargeKappaAsymptotic));
        assert!(err(3.0, SmallKappaSeries) > err(3.0, LargeKappaAsymptotic));
    }

    #[test]
    fn rho_bar_below_rho() {
        for &k in &[0.5, 1.0, 2.0, 5.0, 10.0] {
            assert!(
                rho_bar(k, BesselRatioMode::Exact).unwrap()
                    < rho(k, BesselRatioMode::Exact).unwrap()
            );
        }
    }

    #[test]
    fn ratios_strictly_increasing() {
        let mut prev = (0.0, 0.0);
        for i in 1..=500 {
            let k = i as f64 * 0.1;
            let r = rho(k, BesselRatioMode::Exact).unwrap();
            let rb = rho_bar(k, BesselRatioMode::Exact).unwrap();
            assert!(r > prev.0 && rb > prev.1, "not increasing at {k}");
            assert!(r < 1.0 && rb < 1.0);
            prev = (r, rb);
        }
    }

    #[test]
    fn small_kappa_error_order() {
        let err = |k: f64| {
            (rho(k, BesselRatioMode::SmallKappaSeries).unwrap()
                - rho(k, BesselRatioMode::Exact).unwrap())
            .abs()
        };
        let ratio = err(0.4) / err(0.2);
        let predicted = 2f64.powi(9);
        assert!(
            ratio > predicted / 2.0 && ratio < predicted * 2.0,
            "ratio {ratio}"
        );
    }

    #[test]
    fn large_kappa_error_order() {
        let err = |k: f64| {
            (rho(k, BesselRatioMode::LargeKappaAsymptotic).unwrap()
                - rho(k, BesselRatioMode::Exact).unwrap())
            .abs()
        };
        let ratio = err(16.0) / err(8.0);
        let predicted = 2f64.powi(-4);
        assert!(
            ratio > predicted / 2.0 && ratio < predicted * 2.0,
            "ratio {ratio}"
        );
    }

    #[test]
    fn auto_mode_threshold() {
        assert_eq!(
            BesselRatioMode::auto(1.59),
            BesselRatioMode::SmallKappaSeries
        );
        assert_eq!(
            BesselRatioMode::auto(1.6),
            BesselRatioMode::LargeKappaAsymptotic
        );
    }
}
