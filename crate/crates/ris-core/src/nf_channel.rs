//! Near-field line-of-sight geometry: pixel grid, distances and incidence
//! angles, Friis link amplitudes with a projected-aperture pixel pattern,
//! location-based phase design and the cascaded AP → RIS → user channel.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circular_noise::{correlate, NoiseSpec, PhaseError, SeedSpec};
use crate::error::{domain, usage, Result};
use crate::pda::PdaParams;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Radiation pattern of one pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainPattern {
    /// ϑ(θ) = 4 cos θ, the projected aperture.
    Cosine,
    /// ϑ = 2 over the front hemisphere, independent of angle.
    Isotropic,
}

/// Which terminal a link connects to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Ap,
    User,
}

/// Geometry, carrier and link budget of one deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub ap_pos: [f64; 3],
    pub user_pos: [f64; 3],
    /// (x_RIS, h_y, z_RIS); the surface lies in the plane z = z_RIS.
    pub ris_center: [f64; 3],
    pub dx: f64,
    pub dy: f64,
    /// Pixel count, a perfect square.
    pub pixels: usize,
    pub f_c: f64,
    /// AP transmit power, W.
    pub p_ap: f64,
    /// Receiver noise power, W.
    pub sigma2: f64,
    pub speed_of_light: f64,
    pub pattern: GainPattern,
}

/// Converts dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

impl Scenario {
    /// The reference deployment: AP at (−20, 15, 8) m, user at (20, 1.5, 8) m,
    /// a 200 × 200 surface of half-wavelength pixels centred at (0, 10, 0) m,
    /// 2.4 GHz, 20 dBm transmit power and −80 dBm noise.
    pub fn reference() -> Self {
        let f_c = 2.4e9;
        let lambda = SPEED_OF_LIGHT / f_c;
        Self {
            ap_pos: [-20.0, 15.0, 8.0],
            user_pos: [20.0, 1.5, 8.0],
            ris_center: [0.0, 10.0, 0.0],
            dx: lambda / 2.0,
            dy: lambda / 2.0,
            pixels: 200 * 200,
            f_c,
            p_ap: dbm_to_watts(20.0),
            sigma2: dbm_to_watts(-80.0),
            speed_of_light: SPEED_OF_LIGHT,
            pattern: GainPattern::Cosine,
        }
    }

    pub fn wavelength(&self) -> f64 {
        self.speed_of_light / self.f_c
    }

    /// √M, or an error when M is not a perfect square.
    pub fn side(&self) -> Result<usize> {
        let s = (self.pixels as f64).sqrt().round() as usize;
        if s * s != self.pixels || s == 0 {
            return Err(usage(format!(
                "pixel count {} is not a positive perfect square",
                self.pixels
            )));
        }
        Ok(s)
    }

    /// Height of a terminal above the surface plane.
    pub fn height(&self, side: Side) -> f64 {
        self.terminal(side)[2] - self.ris_center[2]
    }

    pub fn terminal(&self, side: Side) -> [f64; 3] {
        match side {
            Side::Ap => self.ap_pos,
            Side::User => self.user_pos,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.side()?;
        let positive = [
            ("dx", self.dx),
            ("dy", self.dy),
            ("f_c", self.f_c),
            ("p_ap", self.p_ap),
            ("sigma2", self.sigma2),
            ("speed_of_light", self.speed_of_light),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        for side in [Side::Ap, Side::User] {
            if !(self.height(side) > 0.0) {
                return Err(domain(format!(
                    "{side:?} must lie in front of the surface (height {} m)",
                    self.height(side)
                )));
            }
        }
        Ok(())
    }
}

/// Geometry of one pixel relative to both terminals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PixelGeometry {
    /// Row-major index.
    pub index: usize,
    pub pos: [f64; 3],
    pub d_ap: f64,
    pub d_user: f64,
    /// Angles from the surface normal.
    pub theta_ap: f64,
    pub theta_user: f64,
    pub delay_ap: f64,
    pub delay_user: f64,
    /// Designed phase, wrapped into (−π, π].
    pub phi: f64,
}

impl PixelGeometry {
    pub fn distance(&self, side: Side) -> f64 {
        match side {
            Side::Ap => self.d_ap,
            Side::User => self.d_user,
        }
    }

    pub fn theta(&self, side: Side) -> f64 {
        match side {
            Side::Ap => self.theta_ap,
            Side::User => self.theta_user,
        }
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// Pixel offsets along one axis: d(m − ½((n+1) mod 2)) for
/// m ∈ {((n+1) mod 2) − ⌊n/2⌋, …, ⌊n/2⌋}.
pub fn axis_offsets(n: usize, pitch: f64) -> Vec<f64> {
    let even = ((n + 1) % 2) as i64;
    let first = even - (n / 2) as i64;
    (0..n as i64)
        .map(|k| pitch * ((first + k) as f64 - 0.5 * even as f64))
        .collect()
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// All pixels in row-major order (first axis x, second axis y).
pub fn build_grid(scenario: &Scenario) -> Result<Vec<PixelGeometry>> {
    let n = scenario.side()?;
    let xs = axis_offsets(n, scenario.dx);
    let ys = axis_offsets(n, scenario.dy);
    let [cx, cy, cz] = scenario.ris_center;
    let lambda = scenario.wavelength();
    let mut out = Vec::with_capacity(n * n);
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let pos = [cx + x, cy + y, cz];
            let rel = |t: [f64; 3]| [t[0] - pos[0], t[1] - pos[1], t[2] - pos[2]];
            let (va, vu) = (rel(scenario.ap_pos), rel(scenario.user_pos));
            let (d_ap, d_user) = (norm3(va), norm3(vu));
            // Whole wavelengths are dropped before scaling to keep the phase exact.
            let cycles = ((d_ap + d_user) / lambda).rem_euclid(1.0);
            out.push(PixelGeometry {
                index: i * n + j,
                pos,
                d_ap,
                d_user,
                theta_ap: (va[2] / d_ap).clamp(-1.0, 1.0).acos(),
                theta_user: (vu[2] / d_user).clamp(-1.0, 1.0).acos(),
                delay_ap: d_ap / scenario.speed_of_light,
                delay_user: d_user / scenario.speed_of_light,
                phi: wrap_phase(-2.0 * PI * cycles),
            });
        }
    }
    Ok(out)
}

/// Free-space amplitude of one pixel link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkAmplitude {
    pub amplitude: f64,
    pub visible: bool,
}

/// A = λ/(4πd)·√G with pixel gain G = (4π/λ²)·d_x d_y·ϑ(θ).
///
/// For the cosine pattern this is √(d_x d_y cos θ / π)/d. Pixels seen at or
/// beyond grazing incidence get A = 0.
pub fn link_amplitude(pixel: &PixelGeometry, scenario: &Scenario, side: Side) -> LinkAmplitude {
    let theta = pixel.theta(side);
    let d = pixel.distance(side);
    if theta >= PI / 2.0 {
        return LinkAmplitude {
            amplitude: 0.0,
            visible: false,
        };
    }
    let pattern = match scenario.pattern {
        GainPattern::Cosine => 4.0 * theta.cos(),
        GainPattern::Isotropic => 2.0,
    };
    LinkAmplitude {
        amplitude: (scenario.dx * scenario.dy * pattern / (4.0 * PI)).sqrt() / d,
        visible: true,
    }
}

/// Precomputed per-pixel quantities for repeated channel draws.
#[derive(Debug, Clone)]
pub struct ChannelGeometry {
    pub pixels: Vec<PixelGeometry>,
    pub amp_ap: Vec<f64>,
    pub amp_user: Vec<f64>,
    /// Configured phase of each pixel.
    pub phases: Vec<f64>,
    /// g_m h_m e^{−jφ_m}: the noiseless end-to-end term without the amplitude.
    pub aligned: Vec<Complex64>,
}

/// Designed or externally supplied pixel phases.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseChoice {
    Designed,
    Override(Vec<f64>),
}

impl ChannelGeometry {
    pub fn new(scenario: &Scenario, phases: &PhaseChoice) -> Result<Self> {
        scenario.validate()?;
        let pixels = build_grid(scenario)?;
        let phases: Vec<f64> = match phases {
            PhaseChoice::Designed => pixels.iter().map(|p| p.phi).collect(),
            PhaseChoice::Override(v) => {
                if v.len() != pixels.len() {
                    return Err(usage(format!(
                        "{} phases for {} pixels",
                        v.len(),
                        pixels.len()
                    )));
                }
                v.clone()
            }
        };
        let lambda = scenario.wavelength();
        let amp_ap: Vec<f64> = pixels
            .iter()
            .map(|p| link_amplitude(p, scenario, Side::Ap).amplitude)
            .collect();
        let amp_user: Vec<f64> = pixels
            .iter()
            .map(|p| link_amplitude(p, scenario, Side::User).amplitude)
            .collect();
        let aligned = pixels
            .iter()
            .zip(&phases)
            .enumerate()
            .map(|(m, (p, &phi))| {
                let propagation = 2.0 * PI * ((p.d_ap + p.d_user) / lambda).rem_euclid(1.0);
                Complex64::from_polar(amp_ap[m] * amp_user[m], -(propagation + phi))
            })
            .collect();
        Ok(Self {
            pixels,
            amp_ap,
            amp_user,
            phases,
            aligned,
        })
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// One channel draw h = Σ g_m β(φ_m+Δ̄_m) e^{−j(φ_m+Δ_m)} h_m.
    pub fn draw<R: Rng + ?Sized>(
        &self,
        pda: &PdaParams,
        noise: Option<&NoiseDraw>,
        rng: &mut R,
    ) -> Complex64 {
        let mut h = Complex64::new(0.0, 0.0);
        match noise {
            None => {
                for (a, &phi) in self.aligned.iter().zip(&self.phases) {
                    h += a * pda.beta(phi);
                }
            }
            Some(nd) => {
                for (a, &phi) in self.aligned.iter().zip(&self.phases) {
                    let (d, amp_err) = nd.sample(rng);
                    h += a * Complex64::from_polar(pda.beta(phi + amp_err), -d);
                }
            }
        }
        h
    }

    /// Σ A_AP→m A_m→User.
    pub fn amplitude_sum(&self) -> f64 {
        self.amp_ap
            .iter()
            .zip(&self.amp_user)
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Sampler of the (phase error, amplitude error) pair of one pixel.
#[derive(Debug, Clone, Copy)]
pub struct NoiseDraw {
    dist: PhaseError,
    iota: f64,
    w: f64,
    pda_has_error: bool,
}

impl NoiseDraw {
    pub fn new(noise: &NoiseSpec) -> Result<Self> {
        noise.validate()?;
        Ok(Self {
            dist: noise.family.sampler()?,
            iota: noise.iota,
            w: (1.0 - noise.iota * noise.iota).sqrt(),
            pda_has_error: noise.pda_has_error,
        })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let d = self.dist.sample(rng);
        let e = if !self.pda_has_error {
            0.0
        } else if self.iota == 1.0 {
            d
        } else {
            correlate(d, self.dist.sample(rng), self.iota, self.w)
        };
        (d, e)
    }
}

/// One channel realization with per-pixel diagnostics.
#[derive(Debug, Clone)]
pub struct ChannelReport {
    pub h: Complex64,
    pub pixels: Vec<PixelGeometry>,
    pub amp_ap: Vec<f64>,
    pub amp_user: Vec<f64>,
    /// |g_m h_m| = A_AP→m A_m→User.
    pub link_gain: Vec<f64>,
    pub phases: Vec<f64>,
    /// β(φ_m)², the noiseless per-pixel remaining power.
    pub gamma_proxy: Vec<f64>,
}

/// The cascaded channel for one noise draw (or noiselessly when `noise` is `None`).
pub fn cascaded_channel(
    scenario: &Scenario,
    pda: &PdaParams,
    noise: Option<&NoiseSpec>,
    phases: &PhaseChoice,
    seed: SeedSpec,
) -> Result<ChannelReport> {
    pda.validate()?;
    let geo = ChannelGeometry::new(scenario, phases)?;
    let nd = noise.map(NoiseDraw::new).transpose()?;
    let h = geo.draw(pda, nd.as_ref(), &mut seed.rng());
    let link_gain = geo
        .amp_ap
        .iter()
        .zip(&geo.amp_user)
        .map(|(a, b)| a * b)
        .collect();
    let gamma_proxy = geo.phases.iter().map(|&p| pda.beta(p).powi(2)).collect();
    Ok(ChannelReport {
        h,
        link_gain,
        gamma_proxy,
        pixels: geo.pixels,
        amp_ap: geo.amp_ap,
        amp_user: geo.amp_user,
        phases: geo.phases,
    })
}

/// Mean |h|² over `realizations` draws, each block of draws on its own substream.
pub fn mean_channel_power(
    geo: &ChannelGeometry,
    pda: &PdaParams,
    noise: &NoiseSpec,
    realizations: usize,
    seed: SeedSpec,
) -> Result<Vec<f64>> {
    let nd = NoiseDraw::new(noise)?;
    Ok((0..realizations)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed.substream(seed.stream_id.wrapping_add(r as u64)).rng();
            geo.draw(pda, Some(&nd), &mut rng).norm_sqr()
        })
        .collect())
}

/// Counts of `values` in `bins` equal-width bins over `[lo, hi]`; the upper
/// edge is included in the last bin and values outside are ignored.
pub fn histogram(values: &[f64], bins: usize, lo: f64, hi: f64) -> Vec<usize> {
    let mut counts = vec![0; bins];
    let width = (hi - lo) / bins as f64;
    for &v in values {
        if v < lo || v > hi {
            continue;
        }
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
}

/// Pearson χ² statistic of counts against a uniform expectation.
pub fn chi_square_uniform(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum()
}
