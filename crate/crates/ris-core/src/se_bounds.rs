//! Spectral efficiency of the cascaded link and its bound chain.
//!
//! With A₁, A₂ the per-pixel link amplitudes and Γ the remaining power,
//!
//! * L = Γ(φ_L)(ΣA₁A₂)², H = (ΣA₁√Γ(φ_m)A₂)², U = Γ(φ_U)(ΣA₁A₂)²;
//! * the upper variants replace the amplitude sums by the Cauchy–Schwarz
//!   bound with exact panel integrals, (z_AP z_User/π²)·ΣS_m·ΣT_m.
//!
//! SE = log₂(1 + P_AP·X/σ²) for each X.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circular_noise::{NoiseFamily, NoiseSpec, SeedSpec};
use crate::error::{domain, usage, Result};
use crate::nf_channel::{
    ChannelGeometry, GainPattern, NoiseDraw, PhaseChoice, PixelGeometry, Scenario, Side,
};
use crate::pda::PdaParams;
use crate::remaining_power::{gamma_closed_form, gamma_oracle, PropId, ReflectionCase};

const BLOCK: usize = 256;
/// Phase bins used when Γ comes from the numerical oracle.
pub const ORACLE_BINS: usize = 256;
/// Slack for the non-strict links of the chain and margin for the strict ones.
pub const CHAIN_TOL: f64 = 1e-12;

/// ∫₀^{s₁}∫₀^{s₂} (x² + y² + z²)^{−3/2} dy dx = (1/z)·atan(s₁s₂ / (z√(s₁²+s₂²+z²))).
pub fn q_kernel(s1: f64, s2: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(domain(format!("q_kernel needs z > 0, got {z}")));
    }
    Ok(q(s1, s2, z))
}

#[inline]
fn q(s1: f64, s2: f64, z: f64) -> f64 {
    (s1 * s2 / (z * (s1 * s1 + s2 * s2 + z * z).sqrt())).atan() / z
}

/// ∫∫ over the pixel rectangle of ((x−x_T)² + (y−y_T)² + z²)^{−3/2}, with z the
/// terminal height above the surface.
pub fn panel_integral(pixel: &PixelGeometry, scenario: &Scenario, side: Side) -> Result<f64> {
    let t = scenario.terminal(side);
    let z = scenario.height(side);
    if !(z > 0.0) {
        return Err(domain(format!("{side:?} height must be > 0, got {z}")));
    }
    let t1 = pixel.pos[0] - scenario.dx / 2.0 - t[0];
    let t2 = pixel.pos[0] + scenario.dx / 2.0 - t[0];
    let t3 = pixel.pos[1] - scenario.dy / 2.0 - t[1];
    let t4 = pixel.pos[1] + scenario.dy / 2.0 - t[1];
    Ok(q(t2, t4, z) - q(t1, t4, z) - q(t2, t3, z) + q(t1, t3, z))
}

/// Where per-pixel Γ values come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum GammaSource {
    ClosedForm {
        prop: PropId,
    },
    /// Numerical expectation, tabulated on `ORACLE_BINS` phase bins.
    Oracle,
}

/// Evaluation options for [`se_chain`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeOptions {
    /// Noise realizations for the Monte Carlo SE; 0 skips it.
    pub realizations: usize,
    pub seed: SeedSpec,
}

impl Default for SeOptions {
    fn default() -> Self {
        Self {
            realizations: 5000,
            seed: SeedSpec::new(0, 0),
        }
    }
}

/// All SE quantities at one operating point, in bits/s/Hz.
///
/// The `_upper` fields need the projected-aperture pattern and are `None`
/// otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeReport {
    pub se_mc: Option<f64>,
    pub se_mc_se: Option<f64>,
    pub se_l: f64,
    pub se_l_upper: Option<f64>,
    pub se: f64,
    /// Symmetric Cauchy–Schwarz split, (z_AP z_User/π²)·Σ√Γ S·Σ√Γ T.
    pub se_upper: Option<f64>,
    /// √Γ weighting on the AP-side sum only, (z_AP z_User/π²)·Σ√Γ S·ΣT.
    pub se_upper_verbatim: Option<f64>,
    pub se_u: f64,
    pub se_u_upper: Option<f64>,
    pub gamma_l: f64,
    pub gamma_u: f64,
    /// (ΣA₁A₂)² divided by its panel-integral bound.
    pub cbs_ratio: Option<f64>,
}

/// |upper − base| for each bound pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TightnessGap {
    pub l: f64,
    pub h: f64,
    pub u: f64,
}

impl SeReport {
    pub fn tightness_gap(&self) -> Option<TightnessGap> {
        Some(TightnessGap {
            l: (self.se_l_upper? - self.se_l).abs(),
            h: (self.se_upper? - self.se).abs(),
            u: (self.se_u_upper? - self.se_u).abs(),
        })
    }

    /// Names of the chain links that fail.
    pub fn chain_violations(&self) -> Vec<&'static str> {
        let mut bad = Vec::new();
        let le = |a: f64, b: f64| a <= b + CHAIN_TOL;
        let lt = |a: f64, b: f64| b - a > CHAIN_TOL;
        match (self.se_l_upper, self.se_upper, self.se_u_upper) {
            (Some(lu), Some(hu), Some(uu)) => {
                let links = [
                    ("se_l <= se_l_upper", le(self.se_l, lu)),
                    ("se_l_upper < se", lt(lu, self.se)),
                    ("se <= se_upper", le(self.se, hu)),
                    ("se_upper < se_u", lt(hu, self.se_u)),
                    ("se_u <= se_u_upper", le(self.se_u, uu)),
                ];
                bad.extend(links.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n));
            }
            _ => {
                if !le(self.se_l, self.se) {
                    bad.push("se_l <= se");
                }
                if !le(self.se, self.se_u) {
                    bad.push("se <= se_u");
                }
            }
        }
        bad
    }

    pub fn chain_holds(&self) -> bool {
        self.chain_violations().is_empty()
    }
}

fn se_of(scenario: &Scenario, power: f64) -> f64 {
    (1.0 + scenario.p_ap * power / scenario.sigma2).log2()
}

/// Per-pixel Γ plus Γ(φ_L) and Γ(φ_U).
pub fn gamma_per_pixel(
    source: GammaSource,
    pda: &PdaParams,
    noise: &NoiseSpec,
    phases: &[f64],
) -> Result<(Vec<f64>, f64, f64)> {
    match source {
        GammaSource::ClosedForm { prop } => {
            let case = match prop.case() {
                c @ ReflectionCase::CaseI { .. } => c,
                _ => ReflectionCase::from_noise(noise),
            };
            let g = |phi: f64| gamma_closed_form(prop, &case, pda, noise, phi).map(|r| r.gamma);
            let per_pixel = phases
                .par_iter()
                .map(|&p| g(p))
                .collect::<Result<Vec<_>>>()?;
            Ok((per_pixel, g(pda.phi_lower())?, g(pda.phi_upper())?))
        }
        GammaSource::Oracle => {
            let case = ReflectionCase::from_noise(noise);
            let g = |phi: f64| gamma_oracle(&case, pda, noise, phi).map(|r| r.gamma);
            let width = 2.0 * PI / ORACLE_BINS as f64;
            let table = (0..ORACLE_BINS)
                .into_par_iter()
                .map(|k| g(-PI + (k as f64 + 0.5) * width))
                .collect::<Result<Vec<_>>>()?;
            let per_pixel = phases
                .iter()
                .map(|&p| table[(((p + PI) / width) as usize).min(ORACLE_BINS - 1)])
                .collect();
            Ok((per_pixel, g(pda.phi_lower())?, g(pda.phi_upper())?))
        }
    }
}

/// Mean and standard error of log₂(1 + P|h|²/σ²) over noise realizations.
pub fn se_monte_carlo(
    scenario: &Scenario,
    geo: &ChannelGeometry,
    pda: &PdaParams,
    noise: &NoiseSpec,
    realizations: usize,
    seed: SeedSpec,
) -> Result<(f64, f64)> {
    if realizations < 2 {
        return Err(usage("Monte Carlo SE needs at least 2 realizations"));
    }
    let nd = NoiseDraw::new(noise)?;
    let blocks = realizations.div_ceil(BLOCK);
    let sums: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = seed
                .substream(seed.stream_id.wrapping_add(blk as u64))
                .rng();
            let n = BLOCK.min(realizations - blk * BLOCK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let v = se_of(scenario, geo.draw(pda, Some(&nd), &mut rng).norm_sqr());
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums
        .iter()
        .fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    let n = realizations as f64;
    let mean = s / n;
    let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

/// Every SE quantity for one deployment.
pub fn se_chain(
    scenario: &Scenario,
    pda: &PdaParams,
    noise: &NoiseSpec,
    source: GammaSource,
    opts: &SeOptions,
) -> Result<SeReport> {
    pda.validate()?;
    noise.validate()?;
    let geo = ChannelGeometry::new(scenario, &PhaseChoice::Designed)?;
    let (gamma, gamma_l, gamma_u) = gamma_per_pixel(source, pda, noise, &geo.phases)?;

    let a12: Vec<f64> = geo
        .amp_ap
        .iter()
        .zip(&geo.amp_user)
        .map(|(a, b)| a * b)
        .collect();
    let sum_a: f64 = a12.iter().sum();
    let sum_h: f64 = a12.iter().zip(&gamma).map(|(a, g)| a * g.sqrt()).sum();
    let (l, h, u) = (
        gamma_l * sum_a * sum_a,
        sum_h * sum_h,
        gamma_u * sum_a * sum_a,
    );

    let mut report = SeReport {
        se_mc: None,
        se_mc_se: None,
        se_l: se_of(scenario, l),
        se_l_upper: None,
        se: se_of(scenario, h),
        se_upper: None,
        se_upper_verbatim: None,
        se_u: se_of(scenario, u),
        se_u_upper: None,
        gamma_l,
        gamma_u,
        cbs_ratio: None,
    };

    if scenario.pattern == GainPattern::Cosine {
        let panels = geo
            .pixels
            .par_iter()
            .map(|p| {
                Ok((
                    panel_integral(p, scenario, Side::Ap)?,
                    panel_integral(p, scenario, Side::User)?,
                ))
            })
            .collect::<Result<Vec<(f64, f64)>>>()?;
        let k = scenario.height(Side::Ap) * scenario.height(Side::User) / (PI * PI);
        let (mut ss, mut tt, mut ss_g, mut tt_g) = (0.0, 0.0, 0.0, 0.0);
        for ((s, t), g) in panels.iter().zip(&gamma) {
            let r = g.sqrt();
            ss += s;
            tt += t;
            ss_g += r * s;
            tt_g += r * t;
        }
        let cbs = k * ss * tt;
        report.se_l_upper = Some(se_of(scenario, gamma_l * cbs));
        report.se_upper = Some(se_of(scenario, k * ss_g * tt_g));
        report.se_upper_verbatim = Some(se_of(scenario, k * ss_g * tt));
        report.se_u_upper = Some(se_of(scenario, gamma_u * cbs));
        report.cbs_ratio = Some(sum_a * sum_a / cbs);
    }

    if opts.realizations > 0 {
        let mc_pda = match source {
            GammaSource::ClosedForm { prop }
                if matches!(prop.case(), ReflectionCase::CaseI { .. }) =>
            {
                PdaParams::new(pda.a, 1.0, pda.c)?
            }
            _ => *pda,
        };
        let (m, se) = se_monte_carlo(scenario, &geo, &mc_pda, noise, opts.realizations, opts.seed)?;
        report.se_mc = Some(m);
        report.se_mc_se = Some(se);
    }
    Ok(report)
}

/// Parameter varied by [`se_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    XRis,
    ZRis,
    PixelPitch,
    Iota,
    A,
    B,
    C,
    Tau,
    Kappa,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 9] = [
        SweepAxis::XRis,
        SweepAxis::ZRis,
        SweepAxis::PixelPitch,
        SweepAxis::Iota,
        SweepAxis::A,
        SweepAxis::B,
        SweepAxis::C,
        SweepAxis::Tau,
        SweepAxis::Kappa,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::XRis => "x_ris",
            SweepAxis::ZRis => "z_ris",
            SweepAxis::PixelPitch => "pixel_pitch",
            SweepAxis::Iota => "iota",
            SweepAxis::A => "a",
            SweepAxis::B => "b",
            SweepAxis::C => "c",
            SweepAxis::Tau => "tau",
            SweepAxis::Kappa => "kappa",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = crate::error::RisError;

    fn from_str(s: &str) -> Result<Self> {
        SweepAxis::ALL
            .iter()
            .copied()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| usage(format!("unknown sweep axis {s:?}")))
    }
}

/// Inputs held fixed across a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTemplate {
    pub scenario: Scenario,
    pub pda: PdaParams,
    pub noise: NoiseSpec,
    pub source: GammaSource,
    pub opts: SeOptions,
}

/// One grid point; exactly one of `report` and `skipped` is set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub report: Option<SeReport>,
    pub skipped: Option<String>,
}

impl SweepRow {
    pub fn chain_ok(&self) -> Option<bool> {
        self.report.as_ref().map(SeReport::chain_holds)
    }
}

fn apply(t: &SweepTemplate, axis: SweepAxis, v: f64) -> Result<(Scenario, PdaParams, NoiseSpec)> {
    let (mut s, mut p, mut n) = (t.scenario.clone(), t.pda, t.noise);
    match axis {
        SweepAxis::XRis => s.ris_center[0] = v,
        SweepAxis::ZRis => s.ris_center[2] = v,
        SweepAxis::PixelPitch => {
            s.dx = v;
            s.dy = v;
        }
        SweepAxis::Iota => n.iota = v,
        SweepAxis::A => p.a = v,
        SweepAxis::B => p.b = v,
        SweepAxis::C => p.c = v,
        SweepAxis::Tau => {
            n.family = match n.family {
                NoiseFamily::Uniform { .. } => NoiseFamily::Uniform { tau: v },
                NoiseFamily::Composite { kappa, .. } => NoiseFamily::Composite { tau: v, kappa },
                NoiseFamily::VonMises { .. } => return Err(usage("von Mises noise has no tau")),
            }
        }
        SweepAxis::Kappa => {
            n.family = match n.family {
                NoiseFamily::VonMises { .. } => NoiseFamily::VonMises { kappa: v },
                NoiseFamily::Composite { tau, .. } => NoiseFamily::Composite { tau, kappa: v },
                NoiseFamily::Uniform { .. } => return Err(usage("uniform noise has no kappa")),
            }
        }
    }
    s.validate()?;
    p.validate()?;
    n.validate()?;
    Ok((s, p, n))
}

/// Evaluates [`se_chain`] at every grid value. All points share the template
/// seed, so Monte Carlo columns use common random numbers along the sweep.
pub fn se_sweep(template: &SweepTemplate, axis: SweepAxis, grid: &[f64]) -> Vec<SweepRow> {
    grid.iter()
        .map(|&v| {
            let out = apply(template, axis, v)
                .and_then(|(s, p, n)| se_chain(&s, &p, &n, template.source, &template.opts));
            match out {
                Ok(r) => SweepRow {
                    value: v,
                    report: Some(r),
                    skipped: None,
                },
                Err(e) => SweepRow {
                    value: v,
                    report: None,
                    skipped: Some(e.to_string()),
                },
            }
        })
        .collect()
}
