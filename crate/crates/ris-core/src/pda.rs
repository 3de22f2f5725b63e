//! Pixel reflection model: the varactor equivalent circuit, the approximated
//! phase-dependent amplitude β(φ), its ordering bounds, and complex-plane
//! feasible sets.

use std::f64::consts::{FRAC_PI_2, PI};

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use num_complex::Complex64;
use rand::distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circular_noise::{correlate, NoiseSpec, SeedSpec};
use crate::error::{domain, Result, RisError};

/// Parameters of β(φ) = (1−b)·((sin(φ−c)+1)/2)^a + b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdaParams {
    /// Steepness, a ≥ 1.
    pub a: f64,
    /// Minimum amplitude, b ∈ [0, 1].
    pub b: f64,
    /// Horizontal offset, c ∈ (0, π/2].
    pub c: f64,
}

impl Default for PdaParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 0.2,
            c: 0.43 * PI,
        }
    }
}

impl PdaParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let p = Self { a, b, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 1.0) || !self.a.is_finite() {
            return Err(domain(format!("a must be >= 1, got {}", self.a)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(domain(format!("b must lie in [0, 1], got {}", self.b)));
        }
        if !(self.c > 0.0 && self.c <= FRAC_PI_2) {
            return Err(domain(format!("c must lie in (0, pi/2], got {}", self.c)));
        }
        Ok(())
    }

    /// Phase of minimum amplitude, φ_L = −π/2 + c.
    pub fn phi_lower(&self) -> f64 {
        -FRAC_PI_2 + self.c
    }

    /// Phase of unit amplitude, φ_U = π/2 + c.
    pub fn phi_upper(&self) -> f64 {
        FRAC_PI_2 + self.c
    }

    /// Start of the conventional phase range [−π/2 − c, π/2 + c].
    pub fn range_start(&self) -> f64 {
        -FRAC_PI_2 - self.c
    }

    /// Amplitude at phase `phi`. β is 2π-periodic, so any real phase is accepted.
    pub fn beta(&self, phi: f64) -> f64 {
        self.beta_from_sin((phi - self.c).sin())
    }

    /// β given s = sin(φ − c).
    #[inline]
    pub fn beta_from_sin(&self, s: f64) -> f64 {
        let x = (0.5 * (s + 1.0)).max(0.0);
        let shaped = if self.a == 1.0 { x } else { x.powf(self.a) };
        (1.0 - self.b) * shaped + self.b
    }
}

/// Convenience wrapper for [`PdaParams::beta`].
pub fn beta(phi: f64, params: &PdaParams) -> f64 {
    params.beta(phi)
}

/// Maximum violations of b ≤ β|ₐ ≤ β|ₐ₌₁ ≤ 1 on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub points: usize,
    /// max(b − β|ₐ), clipped at zero.
    pub floor_violation: f64,
    /// max(β|ₐ − β|ₐ₌₁), clipped at zero.
    pub steepness_violation: f64,
    /// max(β|ₐ₌₁ − 1), clipped at zero.
    pub ceiling_violation: f64,
    /// max |β|ₐ₌₁ − β|ₐ|, zero when the curves coincide.
    pub max_gap: f64,
}

impl BoundsReport {
    pub fn max_violation(&self) -> f64 {
        self.floor_violation
            .max(self.steepness_violation)
            .max(self.ceiling_violation)
    }
}

/// Checks the amplitude ordering for `params` against its a = 1 counterpart.
pub fn beta_bounds_check(params: &PdaParams, grid: &[f64]) -> BoundsReport {
    let linear = PdaParams { a: 1.0, ..*params };
    let mut rep = BoundsReport {
        points: grid.len(),
        floor_violation: 0.0,
        steepness_violation: 0.0,
        ceiling_violation: 0.0,
        max_gap: 0.0,
    };
    for &phi in grid {
        let ba = params.beta(phi);
        let b1 = linear.beta(phi);
        rep.floor_violation = rep.floor_violation.max(params.b - ba);
        rep.steepness_violation = rep.steepness_violation.max(ba - b1);
        rep.ceiling_violation = rep.ceiling_violation.max(b1 - 1.0);
        rep.max_gap = rep.max_gap.max((b1 - ba).abs());
    }
    rep
}

/// Equivalent-circuit element values of one pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// Bottom-layer inductance, H.
    pub l1: f64,
    /// Top-layer inductance, H.
    pub l2: f64,
    /// Effective (tunable) capacitance, F.
    pub c: f64,
    /// Effective resistance, Ω.
    pub r: f64,
    /// Carrier frequency, Hz.
    pub f_c: f64,
    /// Free-space impedance, Ω.
    pub z0: f64,
}

impl Default for CircuitParams {
    fn default() -> Self {
        Self {
            l1: 2.5e-9,
            l2: 0.7e-9,
            c: 1.0e-12,
            r: 2.5,
            f_c: 2.4e9,
            z0: 377.0,
        }
    }
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("l1", self.l1),
            ("l2", self.l2),
            ("c", self.c),
            ("r", self.r),
            ("f_c", self.f_c),
            ("z0", self.z0),
        ];
        for (name, v) in fields {
            if !(v > 0.0) {
                return Err(domain(format!(
                    "circuit parameter {name} must be > 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Parallel combination of jωL₁ with the series branch jωL₂ + 1/(jωC) + R.
    pub fn impedance(&self) -> Complex64 {
        let w = 2.0 * PI * self.f_c;
        let j = Complex64::i();
        let series = j * w * self.l2 + 1.0 / (j * w * self.c) + self.r;
        let shunt = j * w * self.l1;
        shunt * series / (shunt + series)
    }
}

/// Complex reflection coefficient ς = (Z − Z₀)/(Z + Z₀).
pub fn circuit_reflection(params: &CircuitParams) -> Result<Complex64> {
    params.validate()?;
    let z = params.impedance();
    let den = z + params.z0;
    if !den.is_finite() || den.norm() < 1e-12 * params.z0 {
        return Err(RisError::Singular(format!(
            "Z + Z0 vanishes for {params:?}"
        )));
    }
    Ok((z - params.z0) / den)
}

/// (phase, amplitude) pairs from sweeping the capacitance, with the phase
/// taken as the four-quadrant argument of ς.
pub fn circuit_sweep(base: &CircuitParams, capacitances: &[f64]) -> Result<Vec<(f64, f64)>> {
    capacitances
        .iter()
        .map(|&c| {
            let s = circuit_reflection(&CircuitParams { c, ..*base })?;
            Ok((s.arg(), s.norm()))
        })
        .collect()
}

/// Result of fitting β(φ) to circuit samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdaFit {
    pub params: PdaParams,
    pub max_deviation: f64,
    pub rms_deviation: f64,
}

struct FitCost<'a> {
    samples: &'a [(f64, f64)],
}

impl FitCost<'_> {
    fn residuals(&self, p: &PdaParams) -> impl Iterator<Item = f64> + '_ {
        let p = *p;
        self.samples
            .iter()
            .map(move |&(phi, amp)| p.beta(phi) - amp)
    }
}

impl CostFunction for FitCost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        // Outside the admissible box the cost is infinite, which Nelder–Mead rejects.
        match PdaParams::new(x[0], x[1], x[2]) {
            Ok(p) => Ok(self.residuals(&p).map(|r| r * r).sum()),
            Err(_) => Ok(f64::INFINITY),
        }
    }
}

/// Least-squares fit of (a, b, c) to sampled (phase, amplitude) pairs,
/// starting from `init`.
pub fn fit_pda(samples: &[(f64, f64)], init: &PdaParams) -> Result<PdaFit> {
    init.validate()?;
    if samples.len() < 3 {
        return Err(domain(
            "need at least three samples to fit three parameters",
        ));
    }
    let x0 = vec![init.a, init.b, init.c];
    let mut simplex = vec![x0.clone()];
    for (i, step) in [0.2, 0.05, 0.05].into_iter().enumerate() {
        let mut v = x0.clone();
        v[i] += step;
        // Keep the initial vertices admissible.
        if PdaParams::new(v[0], v[1], v[2]).is_err() {
            v[i] -= 2.0 * step;
        }
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-14)
        .map_err(|e| RisError::Usage(e.to_string()))?;
    let cost = FitCost { samples };
    let res = Executor::new(cost, solver)
        .configure(|s| s.max_iters(5000))
        .run()
        .map_err(|e| RisError::Usage(format!("fit failed: {e}")))?;
    let best = res
        .state()
        .best_param
        .clone()
        .ok_or_else(|| RisError::Usage("fit produced no parameters".into()))?;
    let params = PdaParams::new(best[0], best[1], best[2])?;
    let cost = FitCost { samples };
    let (mut max, mut ss) = (0.0_f64, 0.0);
    for r in cost.residuals(&params) {
        max = max.max(r.abs());
        ss += r * r;
    }
    Ok(PdaFit {
        params,
        max_deviation: max,
        rms_deviation: (ss / samples.len() as f64).sqrt(),
    })
}

/// Monte Carlo settings for a noisy feasible set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleNoise {
    pub noise: NoiseSpec,
    pub draws: usize,
    pub seed: SeedSpec,
}

/// Sampled locus and its enclosed area.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    pub phases: Vec<f64>,
    pub points: Vec<Complex64>,
    /// Shoelace area; negative for a clockwise traversal.
    pub signed_area: f64,
    pub area: f64,
}

/// Locus of β(φ)e^{−jφ} over one full period, or of its expectation
/// E[β(φ+Δ̄)e^{−j(φ+Δ)}] under noise.
///
/// Under noise the same error draws are reused at every phase, so loci for
/// different correlation levels built from one seed share their randomness.
pub fn feasible_set(
    params: &PdaParams,
    noise: Option<&FeasibleNoise>,
    resolution: usize,
) -> Result<FeasibleSet> {
    params.validate()?;
    if resolution < 64 {
        return Err(domain(format!(
            "resolution must be >= 64, got {resolution}"
        )));
    }
    let start = params.range_start();
    let phases: Vec<f64> = (0..resolution)
        .map(|k| start + 2.0 * PI * k as f64 / resolution as f64)
        .collect();
    let points: Vec<Complex64> = match noise {
        None => phases
            .iter()
            .map(|&phi| params.beta(phi) * Complex64::from_polar(1.0, -phi))
            .collect(),
        Some(fnz) => noisy_locus(params, fnz, &phases)?,
    };
    let signed_area = shoelace(&points);
    Ok(FeasibleSet {
        phases,
        points,
        signed_area,
        area: signed_area.abs(),
    })
}

fn noisy_locus(params: &PdaParams, fnz: &FeasibleNoise, phases: &[f64]) -> Result<Vec<Complex64>> {
    let spec = &fnz.noise;
    spec.validate()?;
    if fnz.draws == 0 {
        return Err(domain("draws must be >= 1"));
    }
    let d = spec.family.sampler()?;
    let base: Vec<f64> = d
        .sample_iter(fnz.seed.substream(0).rng())
        .take(fnz.draws)
        .collect();
    let ind: Vec<f64> = d
        .sample_iter(fnz.seed.substream(1).rng())
        .take(fnz.draws)
        .collect();
    let w = (1.0 - spec.iota * spec.iota).sqrt();
    // Per-draw trig factors: e^{−jΔ}, and cos/sin of the amplitude-side error.
    let rot: Vec<Complex64> = base
        .iter()
        .map(|&x| Complex64::from_polar(1.0, -x))
        .collect();
    let amp_err: Vec<(f64, f64)> = base
        .iter()
        .zip(&ind)
        .map(|(&x, &y)| {
            let e = if spec.pda_has_error {
                correlate(x, y, spec.iota, w)
            } else {
                0.0
            };
            (e.cos(), e.sin())
        })
        .collect();
    let n = fnz.draws as f64;
    Ok(phases
        .par_iter()
        .map(|&phi| {
            let (sp, cp) = (phi - params.c).sin_cos();
            let mut acc = Complex64::new(0.0, 0.0);
            for (r, &(ce, se)) in rot.iter().zip(&amp_err) {
                acc += r * params.beta_from_sin(sp * ce + cp * se);
            }
            acc / n * Complex64::from_polar(1.0, -phi)
        })
        .collect())
}

/// Signed area of a closed polygon.
pub fn shoelace(points: &[Complex64]) -> f64 {
    let n = points.len();
    let mut s = 0.0;
    for i in 0..n {
        let p = points[i];
        let q = points[(i + 1) % n];
        s += p.re * q.im - q.re * p.im;
    }
    0.5 * s
}
