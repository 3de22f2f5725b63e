//! Uniform and von Mises phase errors, the correlated pair Δ̄ = ιΔ + √(1−ι²)Δ̆,
//! and reproducible random streams.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Result};

/// Distribution family of a phase error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseFamily {
    /// δ ~ UF[−τ, τ].
    Uniform { tau: f64 },
    /// γ ~ VM(0, κ).
    VonMises { kappa: f64 },
    /// δ + γ with independent uniform and von Mises parts.
    Composite { tau: f64, kappa: f64 },
}

impl NoiseFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseFamily::Uniform { tau } => check_tau(tau),
            NoiseFamily::VonMises { kappa } => check_kappa(kappa),
            NoiseFamily::Composite { tau, kappa } => {
                check_tau(tau)?;
                check_kappa(kappa)
            }
        }
    }

    pub fn tau(&self) -> Option<f64> {
        match *self {
            NoiseFamily::Uniform { tau } | NoiseFamily::Composite { tau, .. } => Some(tau),
            NoiseFamily::VonMises { .. } => None,
        }
    }

    pub fn kappa(&self) -> Option<f64> {
        match *self {
            NoiseFamily::VonMises { kappa } | NoiseFamily::Composite { kappa, .. } => Some(kappa),
            NoiseFamily::Uniform { .. } => None,
        }
    }

    /// A sampler for this family.
    pub fn sampler(&self) -> Result<PhaseError> {
        self.validate()?;
        Ok(match *self {
            NoiseFamily::Uniform { tau } => PhaseError::Uniform(tau),
            NoiseFamily::VonMises { kappa } => PhaseError::VonMises(VonMises::new(kappa)?),
            NoiseFamily::Composite { tau, kappa } => {
                PhaseError::Composite(tau, VonMises::new(kappa)?)
            }
        })
    }
}

/// Full error model of one pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    /// Correlation between the amplitude-side and phase-side errors.
    pub iota: f64,
    /// Whether the amplitude β sees an error at all.
    pub pda_has_error: bool,
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily, iota: f64, pda_has_error: bool) -> Result<Self> {
        let s = Self {
            family,
            iota,
            pda_has_error,
        };
        s.validate()?;
        Ok(s)
    }

    /// Errors only in the phase term; the amplitude is evaluated at the designed phase.
    pub fn phase_only(family: NoiseFamily) -> Result<Self> {
        Self::new(family, 1.0, false)
    }

    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        if !(0.0..=1.0).contains(&self.iota) {
            return Err(domain(format!(
                "iota must lie in [0, 1], got {}",
                self.iota
            )));
        }
        Ok(())
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&tau) {
        return Err(domain(format!("tau must lie in [0, pi/2], got {tau}")));
    }
    Ok(())
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(domain(format!(
            "kappa must be finite and >= 0, got {kappa}"
        )));
    }
    Ok(())
}

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Same master seed, different stream.
    pub fn substream(&self, stream_id: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_id,
        }
    }

    /// ChaCha8 keyed by the master seed, with the stream id selecting one of
    /// its 2^64 independent streams.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Best–Fisher wrapped-Cauchy rejection sampler for VM(0, κ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VonMises {
    kappa: f64,
    r: f64,
}

// Below this the density is uniform to double precision.
const VM_UNIFORM_KAPPA: f64 = 1e-8;

impl VonMises {
    pub fn new(kappa: f64) -> Result<Self> {
        check_kappa(kappa)?;
        let r = if kappa < VM_UNIFORM_KAPPA {
            f64::INFINITY
        } else {
            let t = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
            let rho = (t - (2.0 * t).sqrt()) / (2.0 * kappa);
            (1.0 + rho * rho) / (2.0 * rho)
        };
        Ok(Self { kappa, r })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

impl Distribution<f64> for VonMises {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.kappa < VM_UNIFORM_KAPPA {
            return PI * (2.0 * rng.random::<f64>() - 1.0);
        }
        let (k, r) = (self.kappa, self.r);
        loop {
            let u1: f64 = rng.random();
            let u2: f64 = rng.random();
            let z = (PI * u1).cos();
            let f = (1.0 + r * z) / (r + z);
            let c = k * (r - f);
            if c * (2.0 - c) > u2 || (c / u2).ln() + 1.0 - c >= 0.0 {
                let theta = f.clamp(-1.0, 1.0).acos();
                return if rng.random::<f64>() < 0.5 {
                    -theta
                } else {
                    theta
                };
            }
        }
    }
}

/// One draw of a phase error of a given family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseError {
    Uniform(f64),
    VonMises(VonMises),
    Composite(f64, VonMises),
}

impl Distribution<f64> for PhaseError {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            PhaseError::Uniform(tau) => tau * (2.0 * rng.random::<f64>() - 1.0),
            PhaseError::VonMises(vm) => vm.sample(rng),
            PhaseError::Composite(tau, vm) => {
                tau * (2.0 * rng.random::<f64>() - 1.0) + vm.sample(rng)
            }
        }
    }
}

/// `n` i.i.d. draws from UF[−τ, τ].
pub fn sample_uniform(tau: f64, n: usize, seed: SeedSpec) -> Result<Vec<f64>> {
    check_tau(tau)?;
    let d = PhaseError::Uniform(tau);
    Ok(d.sample_iter(seed.rng()).take(n).collect())
}

/// `n` i.i.d. draws from VM(0, κ) on [−π, π].
pub fn sample_von_mises(kappa: f64, n: usize, seed: SeedSpec) -> Result<Vec<f64>> {
    let d = VonMises::new(kappa)?;
    Ok(d.sample_iter(seed.rng()).take(n).collect())
}

/// Δ̄ᵢ = ι·Δᵢ + √(1−ι²)·Δ̆ᵢ.
pub fn correlated_pair(base: &[f64], iota: f64, independent: &[f64]) -> Result<Vec<f64>> {
    if base.len() != independent.len() {
        return Err(usage(format!(
            "sequence lengths differ: {} vs {}",
            base.len(),
            independent.len()
        )));
    }
    if !(0.0..=1.0).contains(&iota) {
        return Err(domain(format!("iota must lie in [0, 1], got {iota}")));
    }
    let w = (1.0 - iota * iota).sqrt();
    Ok(base
        .iter()
        .zip(independent)
        .map(|(&d, &e)| correlate(d, e, iota, w))
        .collect())
}

/// Scalar form of [`correlated_pair`] with `w = √(1−ι²)` precomputed.
/// The endpoints return one input exactly.
#[inline]
pub fn correlate(base: f64, independent: f64, iota: f64, w: f64) -> f64 {
    if iota == 1.0 {
        base
    } else if iota == 0.0 {
        independent
    } else {
        iota * base + w * independent
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_functions::{rho, rho_bar, BesselRatioMode};

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    // One-sample Kolmogorov–Smirnov statistic against a continuous CDF.
    fn ks_stat(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
        let mut s = xs.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len() as f64;
        s.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    // Asymptotic KS critical value at significance 0.01.
    fn ks_critical(n: usize) -> f64 {
        1.628 / (n as f64).sqrt()
    }

    #[test]
    fn degenerate_uniform() {
        let xs = sample_uniform(0.0, 5, SeedSpec::new(1, 0)).unwrap();
        assert_eq!(xs, vec![0.0; 5]);
    }

    #[test]
    fn uniform_moments() {
        let tau = FRAC_PI_2;
        let n = 1_000_000;
        let xs = sample_uniform(tau, n, SeedSpec::new(7, 0)).unwrap();
        let (m, v) = mean_var(&xs);
        let sd = tau / 3f64.sqrt();
        assert!(m.abs() < 3.0 * sd / (n as f64).sqrt());
        assert!((v / (tau * tau / 3.0) - 1.0).abs() < 0.01);
        assert!(xs.iter().all(|x| x.abs() <= tau));
    }

    #[test]
    fn uniform_median() {
        let xs = sample_uniform(PI / 4.0, 1_000_000, SeedSpec::new(8, 3)).unwrap();
        let below = xs.iter().filter(|&&x| x < 0.0).count() as f64 / xs.len() as f64;
        assert!((below - 0.5).abs() < 0.005);
    }

    #[test]
    fn uniform_ks() {
        for (i, &tau) in [PI / 8.0, PI / 4.0, PI / 2.0].iter().enumerate() {
            let n = 100_000;
            let xs = sample_uniform(tau, n, SeedSpec::new(11, i as u64)).unwrap();
            let d = ks_stat(&xs, |x| (x + tau) / (2.0 * tau));
            assert!(d < ks_critical(n), "tau={tau} D={d}");
        }
    }

    #[test]
    fn von_mises_zero_kappa_is_uniform() {
        let xs = sample_von_mises(0.0, 1_000_000, SeedSpec::new(3, 0)).unwrap();
        let d = ks_stat(&xs, |x| (x + PI) / (2.0 * PI));
        assert!(d < 0.005, "D={d}");
    }

    #[test]
    fn von_mises_circular_moments() {
        let n = 1_000_000;
        for (i, &k) in [1.0, 2.0, 5.0, 8.0].iter().enumerate() {
            let xs = sample_von_mises(k, n, SeedSpec::new(21, i as u64)).unwrap();
            assert!(xs.iter().all(|x| x.abs() <= PI));
            let c1: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
            let c2: Vec<f64> = xs.iter().map(|x| (2.0 * x).cos()).collect();
            let (m1, v1) = mean_var(&c1);
            let (m2, v2) = mean_var(&c2);
            let r1 = rho(k, BesselRatioMode::Exact).unwrap();
            let r2 = rho_bar(k, BesselRatioMode::Exact).unwrap();
            assert!(
                (m1 - r1).abs() < 3.0 * (v1 / n as f64).sqrt(),
                "k={k}: {m1} vs {r1}"
            );
            assert!(
                (m2 - r2).abs() < 3.0 * (v2 / n as f64).sqrt(),
                "k={k}: {m2} vs {r2}"
            );
        }
    }

    #[test]
    fn von_mises_reference_means() {
        for (k, want) in [(2.0, 0.6978), (5.0, 0.8934)] {
            let xs = sample_von_mises(k, 1_000_000, SeedSpec::new(5, 1)).unwrap();
            let m = xs.iter().map(|x| x.cos()).sum::<f64>() / xs.len() as f64;
            assert!((m - want).abs() < 0.003, "k={k}: {m}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(sample_uniform(2.0, 1, SeedSpec::new(0, 0)).is_err());
        assert!(sample_uniform(-0.1, 1, SeedSpec::new(0, 0)).is_err());
        assert!(sample_von_mises(-1.0, 1, SeedSpec::new(0, 0)).is_err());
        assert!(NoiseSpec::new(NoiseFamily::Uniform { tau: 0.1 }, 1.5, true).is_err());
        assert!(correlated_pair(&[0.0], 0.5, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn pair_endpoints() {
        let base = sample_uniform(1.0, 100, SeedSpec::new(1, 1)).unwrap();
        let ind = sample_uniform(1.0, 100, SeedSpec::new(1, 2)).unwrap();
        assert_eq!(correlated_pair(&base, 1.0, &ind).unwrap(), base);
        assert_eq!(correlated_pair(&base, 0.0, &ind).unwrap(), ind);
    }

    fn check_pair_statistics(family: NoiseFamily, iota: f64, stream: u64) {
        let n = 1_000_000;
        let d = family.sampler().unwrap();
        let base: Vec<f64> = d
            .sample_iter(SeedSpec::new(99, stream).rng())
            .take(n)
            .collect();
        let ind: Vec<f64> = d
            .sample_iter(SeedSpec::new(99, stream + 1000).rng())
            .take(n)
            .collect();
        let bar = correlated_pair(&base, iota, &ind).unwrap();
        let (mb, vb) = mean_var(&base);
        let (m, v) = mean_var(&bar);
        let cov = base
            .iter()
            .zip(&bar)
            .map(|(x, y)| (x - mb) * (y - m))
            .sum::<f64>()
            / (n as f64 - 1.0);
        let corr = cov / (vb * v).sqrt();
        assert!(m.abs() < 3.0 * (v / n as f64).sqrt(), "mean {m}");
        assert!((v / vb - 1.0).abs() < 0.01, "variance ratio {}", v / vb);
        // Standard error of a Pearson correlation is (1 − ι²)/√n.
        assert!(
            (corr - iota).abs() < 0.01f64.max(3.0 * (1.0 - iota * iota) / (n as f64).sqrt()),
            "corr {corr}"
        );
    }

    #[test]
    fn correlated_pair_statistics() {
        check_pair_statistics(NoiseFamily::Uniform { tau: FRAC_PI_2 }, 0.75, 1);
        check_pair_statistics(NoiseFamily::Uniform { tau: PI / 8.0 }, 0.25, 2);
        check_pair_statistics(NoiseFamily::VonMises { kappa: 2.0 }, 0.5, 3);
        check_pair_statistics(
            NoiseFamily::Composite {
                tau: PI / 4.0,
                kappa: 5.0,
            },
            0.9,
            4,
        );
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = sample_von_mises(3.0, 1000, SeedSpec::new(42, 7)).unwrap();
        let b = sample_von_mises(3.0, 1000, SeedSpec::new(42, 7)).unwrap();
        let c = sample_von_mises(3.0, 1000, SeedSpec::new(42, 8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let n = a.len() as f64;
        let corr = a.iter().zip(&c).map(|(x, y)| x * y).sum::<f64>() / n;
        assert!(corr.abs() < 0.1);
    }
}
