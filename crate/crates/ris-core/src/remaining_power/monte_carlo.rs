//! Monte Carlo estimation of Γ and the convergence of Γ_M with pixel count.

use num_complex::Complex64;
use rand::distr::Distribution;
use rayon::prelude::*;

use super::oracle::phase_average_coefficient;
use super::{Method, ReflectionCase, RpResult};
use crate::circular_noise::{correlate, NoiseSpec, SeedSpec};
use crate::error::{domain, usage, Result};
use crate::pda::PdaParams;

/// Realizations drawn from one random stream.
const BLOCK: usize = 256;

/// Designed phases of the pixels.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseSet {
    /// Every pixel uses the same phase.
    Shared(f64),
    /// One phase per pixel.
    PerPixel(Vec<f64>),
}

impl PhaseSet {
    fn get(&self, m: usize) -> f64 {
        match self {
            PhaseSet::Shared(p) => *p,
            PhaseSet::PerPixel(v) => v[m],
        }
    }
}

/// Two estimates from the same draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McReport {
    /// |mean of all M·R coefficients|², with a delta-method standard error.
    /// This estimates Γ without the 1/M bias of the per-realization form.
    pub pooled: RpResult,
    pub mean_coefficient: Complex64,
    /// Realization average of Γ_M = |1/M Σ_m β(φ_m+Δ̄_m)e^{−jΔ_m}|².
    pub gamma_m: f64,
    pub gamma_m_se: f64,
}

#[derive(Default, Clone, Copy)]
struct Acc {
    sum: Complex64,
    re2: f64,
    im2: f64,
    reim: f64,
    g: f64,
    g2: f64,
}

impl Acc {
    fn merge(mut self, o: &Acc) -> Acc {
        self.sum += o.sum;
        self.re2 += o.re2;
        self.im2 += o.im2;
        self.reim += o.reim;
        self.g += o.g;
        self.g2 += o.g2;
        self
    }
}

/// Monte Carlo Γ over `realizations` independent surfaces of `pixels` pixels.
///
/// Realizations are grouped into fixed blocks, each with its own substream,
/// so results do not depend on the number of worker threads.
pub fn gamma_mc(
    case: &ReflectionCase,
    pda: &PdaParams,
    noise: &NoiseSpec,
    phases: &PhaseSet,
    pixels: usize,
    realizations: usize,
    seed: SeedSpec,
) -> Result<McReport> {
    case.check(noise)?;
    pda.validate()?;
    if pixels == 0 || realizations == 0 {
        return Err(domain("pixels and realizations must be >= 1"));
    }
    if let PhaseSet::PerPixel(v) = phases {
        if v.len() != pixels {
            return Err(usage(format!("{} phases for {pixels} pixels", v.len())));
        }
    }
    let dist = noise.family.sampler()?;
    let iota = noise.iota;
    let w = (1.0 - iota * iota).sqrt();
    let amp_noisy = matches!(case, ReflectionCase::CaseIII | ReflectionCase::CaseIV);
    let needs_second = amp_noisy && iota < 1.0;
    let blocks = realizations.div_ceil(BLOCK);
    let parts: Vec<Acc> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = seed
                .substream(seed.stream_id.wrapping_add(blk as u64))
                .rng();
            let mut acc = Acc::default();
            let n_here = BLOCK.min(realizations - blk * BLOCK);
            for _ in 0..n_here {
                let mut s = Complex64::new(0.0, 0.0);
                for m in 0..pixels {
                    let phi = phases.get(m);
                    let d = dist.sample(&mut rng);
                    let amp_err = if !amp_noisy {
                        0.0
                    } else if needs_second {
                        correlate(d, dist.sample(&mut rng), iota, w)
                    } else {
                        d
                    };
                    let c = Complex64::from_polar(case.amplitude(pda, phi, amp_err), -d);
                    s += c;
                    acc.re2 += c.re * c.re;
                    acc.im2 += c.im * c.im;
                    acc.reim += c.re * c.im;
                }
                acc.sum += s;
                let g = (s / pixels as f64).norm_sqr();
                acc.g += g;
                acc.g2 += g * g;
            }
            acc
        })
        .collect();
    let acc = parts.iter().fold(Acc::default(), |a, p| a.merge(p));
    let n = (pixels * realizations) as f64;
    let mean = acc.sum / n;
    let (vr, vi, cv) = if n > 1.0 {
        (
            (acc.re2 - n * mean.re * mean.re) / (n - 1.0),
            (acc.im2 - n * mean.im * mean.im) / (n - 1.0),
            (acc.reim - n * mean.re * mean.im) / (n - 1.0),
        )
    } else {
        (0.0, 0.0, 0.0)
    };
    let var_g =
        4.0 * (mean.re * mean.re * vr + mean.im * mean.im * vi + 2.0 * mean.re * mean.im * cv) / n;
    let r = realizations as f64;
    let gamma_m = acc.g / r;
    let gamma_m_se = if realizations > 1 {
        ((acc.g2 - r * gamma_m * gamma_m).max(0.0) / (r - 1.0) / r).sqrt()
    } else {
        0.0
    };
    Ok(McReport {
        pooled: RpResult {
            gamma: mean.norm_sqr(),
            method: Method::MonteCarlo {
                pixels,
                realizations,
            },
            error_estimate: var_g.max(0.0).sqrt(),
        },
        mean_coefficient: mean,
        gamma_m,
        gamma_m_se,
    })
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub pixels: usize,
    pub gamma_m: f64,
    pub gamma_m_se: f64,
    pub gamma_inf: f64,
    pub gap: f64,
}

/// Γ_M for each pixel count against the limit Γ_∞ = |E_φ μ(φ)|², with phases
/// spread evenly over [−π/2 − c, π/2 + c].
pub fn gamma_convergence_study(
    pda: &PdaParams,
    noise: &NoiseSpec,
    m_grid: &[usize],
    realizations: usize,
    seed: SeedSpec,
) -> Result<Vec<ConvergenceRow>> {
    let case = ReflectionCase::from_noise(noise);
    let lo = pda.range_start();
    let hi = pda.phi_upper();
    let (mu_inf, _) = phase_average_coefficient(&case, pda, noise, lo, hi)?;
    let gamma_inf = mu_inf.norm_sqr();
    m_grid
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let phases: Vec<f64> = (0..m)
                .map(|k| lo + (hi - lo) * (k as f64 + 0.5) / m as f64)
                .collect();
            let stream = seed.stream_id.wrapping_add((i as u64 + 1) << 32);
            let rep = gamma_mc(
                &case,
                pda,
                noise,
                &PhaseSet::PerPixel(phases),
                m,
                realizations,
                seed.substream(stream),
            )?;
            Ok(ConvergenceRow {
                pixels: m,
                gamma_m: rep.gamma_m,
                gamma_m_se: rep.gamma_m_se,
                gamma_inf,
                gap: (rep.gamma_m - gamma_inf).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circular_noise::NoiseFamily;
    use crate::remaining_power::gamma_oracle;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn noiseless_unit_amplitude() {
        let p = PdaParams::new(1.0, 1.0, 1.0).unwrap();
        let n = NoiseSpec::new(NoiseFamily::Uniform { tau: 0.0 }, 1.0, true).unwrap();
        let r = gamma_mc(
            &ReflectionCase::CaseIII,
            &p,
            &n,
            &PhaseSet::Shared(0.7),
            10,
            10,
            SeedSpec::new(1, 0),
        )
        .unwrap();
        assert!((r.pooled.gamma - 1.0).abs() < 1e-14);
        assert!((r.gamma_m - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_amplitude_sinc() {
        let n = NoiseSpec::phase_only(NoiseFamily::Uniform { tau: FRAC_PI_2 }).unwrap();
        let r = gamma_mc(
            &ReflectionCase::CaseI { beta: 1.0 },
            &PdaParams::default(),
            &n,
            &PhaseSet::Shared(0.0),
            100_000,
            1,
            SeedSpec::new(4, 0),
        )
        .unwrap();
        let exact = 4.0 / (PI * PI);
        assert!(
            (r.pooled.gamma - exact).abs() < 3.0 * r.pooled.error_estimate,
            "{r:?}"
        );
    }

    #[test]
    fn agrees_with_oracle() {
        let p = PdaParams::default();
        for (fam, iota) in [
            (NoiseFamily::Uniform { tau: PI / 3.0 }, 0.5),
            (NoiseFamily::VonMises { kappa: 2.0 }, 1.0),
            (
                NoiseFamily::Composite {
                    tau: PI / 8.0,
                    kappa: 5.0,
                },
                0.0,
            ),
        ] {
            let n = NoiseSpec::new(fam, iota, true).unwrap();
            let case = ReflectionCase::from_noise(&n);
            for (i, phi) in [0.0, 1.0, p.phi_upper()].into_iter().enumerate() {
                let mc = gamma_mc(
                    &case,
                    &p,
                    &n,
                    &PhaseSet::Shared(phi),
                    1,
                    200_000,
                    SeedSpec::new(17, i as u64 * 1000),
                )
                .unwrap();
                let o = gamma_oracle(&case, &p, &n, phi).unwrap().gamma;
                let z = (mc.pooled.gamma - o).abs() / mc.pooled.error_estimate;
                assert!(
                    z < 4.0,
                    "{fam:?} phi={phi}: mc {} oracle {o} z={z}",
                    mc.pooled.gamma
                );
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let p = PdaParams::default();
        let n = NoiseSpec::new(NoiseFamily::VonMises { kappa: 3.0 }, 0.3, true).unwrap();
        let run = || {
            gamma_mc(
                &ReflectionCase::CaseIII,
                &p,
                &n,
                &PhaseSet::Shared(0.2),
                7,
                1000,
                SeedSpec::new(5, 0),
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = PdaParams::default();
        let n = NoiseSpec::phase_only(NoiseFamily::Uniform { tau: 0.1 }).unwrap();
        let s = SeedSpec::new(0, 0);
        assert!(gamma_mc(
            &ReflectionCase::CaseII,
            &p,
            &n,
            &PhaseSet::Shared(0.0),
            0,
            1,
            s
        )
        .is_err());
        assert!(gamma_mc(
            &ReflectionCase::CaseII,
            &p,
            &n,
            &PhaseSet::PerPixel(vec![0.0; 3]),
            4,
            1,
            s
        )
        .is_err());
        assert!(gamma_mc(
            &ReflectionCase::CaseIII,
            &p,
            &n,
            &PhaseSet::Shared(0.0),
            1,
            1,
            s
        )
        .is_err());
    }

    #[test]
    fn noiseless_convergence_is_exact() {
        let p = PdaParams::default();
        let n = NoiseSpec::new(NoiseFamily::Uniform { tau: 0.0 }, 0.0, true).unwrap();
        let rows =
            gamma_convergence_study(&p, &n, &[50, 200, 1000], 3, SeedSpec::new(2, 0)).unwrap();
        for r in rows {
            // Midpoint phases integrate the amplitude to O(1/M²).
            assert!(r.gap < 1e-4, "{r:?}");
            assert!(r.gamma_m_se < 1e-6);
        }
    }

    #[test]
    fn covariance_sign_at_zero_phase() {
        // Cov(β(Δ), cos Δ) < 0 at φ = 0 for both families.
        let p = PdaParams::default();
        for fam in [
            NoiseFamily::Uniform { tau: FRAC_PI_2 },
            NoiseFamily::VonMises { kappa: 2.0 },
        ] {
            let d = fam.sampler().unwrap();
            let xs: Vec<f64> = d
                .sample_iter(SeedSpec::new(31, 0).rng())
                .take(1_000_000)
                .collect();
            let n = xs.len() as f64;
            let b: Vec<f64> = xs.iter().map(|&x| p.beta(x)).collect();
            let c: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
            let mb = b.iter().sum::<f64>() / n;
            let mc = c.iter().sum::<f64>() / n;
            let cov = b
                .iter()
                .zip(&c)
                .map(|(x, y)| (x - mb) * (y - mc))
                .sum::<f64>()
                / (n - 1.0);
            assert!(cov < 0.0, "{fam:?}: {cov}");
        }
    }
}
