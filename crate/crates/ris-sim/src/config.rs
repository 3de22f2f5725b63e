//! Experiment configuration.
//!
//! Files are TOML or JSON. Every setting has a qualified name such as
//! `scenario.pixels`; it may be written as a nested table (`[scenario]`
//! then `pixels = 2500`), as a quoted flat key (`"scenario.pixels" = 2500`),
//! or, when unambiguous, as a bare key (`pixels = 2500`). See [`KEYS`] for
//! the full list. Powers are given in dBm (or watts with the `_w` keys) and
//! stored in watts.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use ris_core::circular_noise::{NoiseFamily, NoiseSpec, SeedSpec};
use ris_core::nf_channel::{dbm_to_watts, GainPattern, Scenario};
use ris_core::pda::PdaParams;
use ris_core::remaining_power::{PropId, ReflectionCase};
use ris_core::se_bounds::{GammaSource, SweepAxis};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::SimError;

/// What [`crate::run`] computes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    PdaCurve,
    FeasibleSet,
    /// Closed form, oracle and Monte Carlo Γ side by side.
    RpValidate {
        prop: Option<PropId>,
        case: Option<ReflectionCase>,
        /// Single phase; `None` evaluates φ_L, c, φ_U, 0 and π/4.
        phi: Option<f64>,
        pixels: usize,
    },
    Convergence {
        m_grid: Vec<usize>,
        realizations: usize,
    },
    Channel,
    Se,
    FixedRis,
    MoveX {
        grid: Vec<f64>,
    },
    MoveZ {
        grid: Vec<f64>,
    },
    ParamSweep {
        axis: SweepAxis,
        grid: Vec<f64>,
    },
    PaperFigs,
}

impl Experiment {
    /// Whether the run evaluates SE with the configured Γ source.
    pub fn uses_gamma_source(&self) -> bool {
        !matches!(
            self,
            Experiment::PdaCurve
                | Experiment::FeasibleSet
                | Experiment::RpValidate { .. }
                | Experiment::Convergence { .. }
                | Experiment::Channel
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::PdaCurve => "pda_curve",
            Experiment::FeasibleSet => "feasible_set",
            Experiment::RpValidate { .. } => "rp_validate",
            Experiment::Convergence { .. } => "convergence",
            Experiment::Channel => "channel",
            Experiment::Se => "se",
            Experiment::FixedRis => "fixed_ris",
            Experiment::MoveX { .. } => "move_x",
            Experiment::MoveZ { .. } => "move_z",
            Experiment::ParamSweep { .. } => "param_sweep",
            Experiment::PaperFigs => "paper_figs",
        }
    }
}

/// Everything one run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub pda: PdaParams,
    pub noise: NoiseSpec,
    pub experiment: Experiment,
    pub seed: SeedSpec,
    pub output_dir: PathBuf,
    /// Monte Carlo noise realizations.
    pub realizations: usize,
    /// Source of per-pixel Γ in SE computations.
    pub gamma_source: GammaSource,
}

/// Pixel counts of the convergence study.
pub const CONVERGENCE_GRID: [usize; 10] = [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000];

/// x_RIS positions of the horizontal move, m.
pub fn default_move_x_grid() -> Vec<f64> {
    (-8..=8).map(f64::from).collect()
}

/// z_RIS positions of the vertical move, m.
pub fn default_move_z_grid() -> Vec<f64> {
    (-10..=5).map(|k| 2.0 * f64::from(k)).collect()
}

/// The reference setup: 200 × 200 half-wavelength pixels, β with a = 1,
/// b = 0.2, c = 0.43π, composite noise with τ = π/8, κ = 5 and independent
/// amplitude error, 5000 realizations.
pub fn default_config() -> ExperimentConfig {
    ExperimentConfig {
        scenario: Scenario::reference(),
        pda: PdaParams::default(),
        noise: NoiseSpec {
            family: NoiseFamily::Composite {
                tau: PI / 8.0,
                kappa: 5.0,
            },
            iota: 0.0,
            pda_has_error: true,
        },
        experiment: Experiment::FixedRis,
        seed: SeedSpec::new(2024, 0),
        output_dir: PathBuf::from("out"),
        realizations: 5000,
        gamma_source: GammaSource::ClosedForm {
            prop: PropId::P3_10,
        },
    }
}

/// Recognised keys: qualified name, bare alias and meaning. Keys are applied
/// in this order.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("scenario.f_c", "f_c", "carrier frequency, Hz"),
    ("scenario.ap_pos", "ap_pos", "AP position [x, y, z], m"),
    (
        "scenario.user_pos",
        "user_pos",
        "user position [x, y, z], m",
    ),
    (
        "scenario.ris_center",
        "ris_center",
        "surface centre [x, y, z], m",
    ),
    ("scenario.pixels", "pixels", "pixel count (perfect square)"),
    ("scenario.pitch", "pitch", "pixel side for both axes, m"),
    (
        "scenario.pitch_wavelengths",
        "pitch_wavelengths",
        "pixel side in wavelengths",
    ),
    ("scenario.dx", "dx", "pixel width, m"),
    ("scenario.dy", "dy", "pixel height, m"),
    ("scenario.p_ap_dbm", "p_ap_dbm", "transmit power, dBm"),
    ("scenario.p_ap_w", "p_ap_w", "transmit power, W"),
    ("scenario.sigma2_dbm", "sigma2_dbm", "noise power, dBm"),
    ("scenario.sigma2_w", "sigma2_w", "noise power, W"),
    (
        "scenario.pattern",
        "pattern",
        "pixel pattern: cosine | isotropic",
    ),
    ("pda.a", "a", "steepness"),
    ("pda.b", "b", "minimum amplitude"),
    ("pda.c", "c", "offset, rad"),
    ("pda.c_over_pi", "c_over_pi", "offset as a multiple of π"),
    ("noise.family", "family", "uniform | von_mises | composite"),
    ("noise.tau", "tau", "uniform half-width, rad"),
    ("noise.kappa", "kappa", "von Mises concentration"),
    ("noise.iota", "iota", "amplitude/phase error correlation"),
    (
        "noise.pda_has_error",
        "pda_has_error",
        "whether the amplitude sees the error",
    ),
    ("seed.master", "seed", "master seed"),
    ("seed.stream", "stream", "stream id"),
    (
        "run.realizations",
        "realizations",
        "Monte Carlo realizations",
    ),
    (
        "run.gamma_source",
        "gamma_source",
        "closed-form id such as \"3.10\", or \"oracle\"",
    ),
    ("output.dir", "output_dir", "output directory"),
    ("experiment.kind", "experiment", "experiment name"),
    ("experiment.prop", "prop", "closed-form id for rp_validate"),
    (
        "experiment.case",
        "case",
        "I | II | III | IV for rp_validate",
    ),
    ("experiment.beta", "beta", "constant amplitude for case I"),
    ("experiment.phi", "phi", "single phase for rp_validate, rad"),
    (
        "experiment.pixels_mc",
        "pixels_mc",
        "pixels per Monte Carlo surface in rp_validate",
    ),
    (
        "experiment.m_grid",
        "m_grid",
        "pixel counts for convergence",
    ),
    (
        "experiment.convergence_realizations",
        "convergence_realizations",
        "realizations per pixel count",
    ),
    ("experiment.axis", "axis", "sweep axis"),
    ("experiment.grid", "grid", "explicit sweep values"),
    ("experiment.range", "range", "sweep [start, end]"),
    ("experiment.step", "step", "sweep step"),
];

fn qualify(key: &str) -> Option<&'static str> {
    KEYS.iter()
        .find(|(q, bare, _)| *q == key || *bare == key)
        .map(|(q, _, _)| *q)
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        other => out.push((prefix.to_string(), other.clone())),
    }
}

/// Input file syntax.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Toml,
        }
    }
}

/// Reads a configuration file on top of [`default_config`].
pub fn load_config(path: &Path) -> Result<ExperimentConfig, SimError> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_config(&text, Format::from_path(path))
}

/// Parses configuration text on top of [`default_config`].
pub fn parse_config(text: &str, format: Format) -> Result<ExperimentConfig, SimError> {
    let value: Value = match format {
        Format::Toml => toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?,
        Format::Json => serde_json::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?,
    };
    let mut pairs = Vec::new();
    flatten("", &value, &mut pairs);
    let mut cfg = default_config();
    apply_settings(&mut cfg, pairs)?;
    Ok(cfg)
}

/// Parses `key=value` overrides; values are read as TOML scalars or arrays,
/// falling back to plain strings.
pub fn parse_overrides(items: &[String]) -> Result<Vec<(String, Value)>, SimError> {
    items
        .iter()
        .map(|item| {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| SimError::Parse(format!("override {item:?} is not key=value")))?;
            let parsed: Value = toml::from_str::<BTreeMap<String, Value>>(&format!("v = {v}"))
                .ok()
                .and_then(|mut m| m.remove("v"))
                .unwrap_or_else(|| Value::String(v.trim().to_string()));
            Ok((k.trim().to_string(), parsed))
        })
        .collect()
}

#[derive(Default)]
struct Pending {
    family: Option<String>,
    tau: Option<f64>,
    kappa: Option<f64>,
    experiment: BTreeMap<&'static str, Value>,
}

fn typed<T: serde::de::DeserializeOwned>(key: &str, v: &Value) -> Result<T, String> {
    serde_json::from_value(v.clone()).map_err(|e| format!("{key}: {e}"))
}

fn text(key: &str, v: &Value) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(format!("{key}: expected a string")),
    }
}

/// Applies settings to `cfg`; every unknown key and malformed value is
/// reported together.
pub fn apply_settings(
    cfg: &mut ExperimentConfig,
    pairs: Vec<(String, Value)>,
) -> Result<(), SimError> {
    let mut errors = Vec::new();
    let mut by_key: BTreeMap<&'static str, Value> = BTreeMap::new();
    for (k, v) in pairs {
        match qualify(&k) {
            Some(q) => {
                by_key.insert(q, v);
            }
            None => errors.push(format!("unknown key {k:?}")),
        }
    }
    let mut pending = Pending::default();
    for (q, _, _) in KEYS {
        if let Some(v) = by_key.get(q) {
            if let Err(e) = apply_one(cfg, &mut pending, q, v) {
                errors.push(e);
            }
        }
    }
    if let Err(e) = finish_noise(cfg, &pending) {
        errors.push(e);
    }
    if !pending.experiment.is_empty() {
        match build_experiment(cfg, &pending.experiment) {
            Ok(exp) => cfg.experiment = exp,
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(SimError::Config(errors))
    }
}

fn apply_one(
    cfg: &mut ExperimentConfig,
    p: &mut Pending,
    key: &'static str,
    v: &Value,
) -> Result<(), String> {
    let s = &mut cfg.scenario;
    match key {
        "scenario.f_c" => s.f_c = typed(key, v)?,
        "scenario.ap_pos" => s.ap_pos = typed(key, v)?,
        "scenario.user_pos" => s.user_pos = typed(key, v)?,
        "scenario.ris_center" => s.ris_center = typed(key, v)?,
        "scenario.pixels" => s.pixels = typed(key, v)?,
        "scenario.pitch" => {
            s.dx = typed(key, v)?;
            s.dy = s.dx;
        }
        "scenario.pitch_wavelengths" => {
            s.dx = typed::<f64>(key, v)? * s.wavelength();
            s.dy = s.dx;
        }
        "scenario.dx" => s.dx = typed(key, v)?,
        "scenario.dy" => s.dy = typed(key, v)?,
        "scenario.p_ap_dbm" => s.p_ap = dbm_to_watts(typed(key, v)?),
        "scenario.p_ap_w" => s.p_ap = typed(key, v)?,
        "scenario.sigma2_dbm" => s.sigma2 = dbm_to_watts(typed(key, v)?),
        "scenario.sigma2_w" => s.sigma2 = typed(key, v)?,
        "scenario.pattern" => s.pattern = typed::<GainPattern>(key, v)?,
        "pda.a" => cfg.pda.a = typed(key, v)?,
        "pda.b" => cfg.pda.b = typed(key, v)?,
        "pda.c" => cfg.pda.c = typed(key, v)?,
        "pda.c_over_pi" => cfg.pda.c = typed::<f64>(key, v)? * PI,
        "noise.family" => p.family = Some(text(key, v)?),
        "noise.tau" => p.tau = Some(typed(key, v)?),
        "noise.kappa" => p.kappa = Some(typed(key, v)?),
        "noise.iota" => cfg.noise.iota = typed(key, v)?,
        "noise.pda_has_error" => cfg.noise.pda_has_error = typed(key, v)?,
        "seed.master" => cfg.seed.master_seed = typed(key, v)?,
        "seed.stream" => cfg.seed.stream_id = typed(key, v)?,
        "run.realizations" => cfg.realizations = typed(key, v)?,
        "run.gamma_source" => cfg.gamma_source = parse_source(&text(key, v)?)?,
        "output.dir" => cfg.output_dir = typed(key, v)?,
        k => {
            p.experiment.insert(k, v.clone());
        }
    }
    Ok(())
}

/// `"oracle"` or a closed-form id such as `"3.10"`.
pub fn parse_source(s: &str) -> Result<GammaSource, String> {
    if s.trim().eq_ignore_ascii_case("oracle") {
        return Ok(GammaSource::Oracle);
    }
    s.parse::<PropId>()
        .map(|prop| GammaSource::ClosedForm { prop })
        .map_err(|e| e.to_string())
}

/// `I`..`IV`; case I takes its constant amplitude from `beta`.
pub fn parse_case(s: &str, beta: f64) -> Result<ReflectionCase, String> {
    match s.trim().to_ascii_uppercase().as_str() {
        "I" | "1" => Ok(ReflectionCase::CaseI { beta }),
        "II" | "2" => Ok(ReflectionCase::CaseII),
        "III" | "3" => Ok(ReflectionCase::CaseIII),
        "IV" | "4" => Ok(ReflectionCase::CaseIV),
        other => Err(format!("unknown case {other:?}")),
    }
}

fn finish_noise(cfg: &mut ExperimentConfig, p: &Pending) -> Result<(), String> {
    let (tau0, kappa0) = (cfg.noise.family.tau(), cfg.noise.family.kappa());
    let family = p.family.clone().unwrap_or_else(|| {
        match cfg.noise.family {
            NoiseFamily::Uniform { .. } => "uniform",
            NoiseFamily::VonMises { .. } => "von_mises",
            NoiseFamily::Composite { .. } => "composite",
        }
        .to_string()
    });
    let tau = p.tau.or(tau0).unwrap_or(PI / 8.0);
    let kappa = p.kappa.or(kappa0).unwrap_or(5.0);
    cfg.noise.family = match family.as_str() {
        "uniform" => NoiseFamily::Uniform { tau },
        "von_mises" | "vonmises" | "vm" => NoiseFamily::VonMises { kappa },
        "composite" => NoiseFamily::Composite { tau, kappa },
        other => return Err(format!("noise.family: unknown family {other:?}")),
    };
    Ok(())
}

fn grid_from(keys: &BTreeMap<&'static str, Value>, default: Vec<f64>) -> Result<Vec<f64>, String> {
    if let Some(g) = keys.get("experiment.grid") {
        return typed("experiment.grid", g);
    }
    match (keys.get("experiment.range"), keys.get("experiment.step")) {
        (Some(r), Some(s)) => {
            let [lo, hi]: [f64; 2] = typed("experiment.range", r)?;
            let step: f64 = typed("experiment.step", s)?;
            if !(step > 0.0) || hi < lo {
                return Err("experiment.range/step: need start <= end and step > 0".into());
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|k| lo + step * k as f64).collect())
        }
        (None, None) => Ok(default),
        _ => Err("experiment.range and experiment.step must be given together".into()),
    }
}

fn build_experiment(
    cfg: &ExperimentConfig,
    keys: &BTreeMap<&'static str, Value>,
) -> Result<Experiment, String> {
    let kind = match keys.get("experiment.kind") {
        Some(v) => text("experiment.kind", v)?,
        None => cfg.experiment.name().to_string(),
    };
    let get_f = |k: &str| keys.get(k).map(|v| typed::<f64>(k, v)).transpose();
    Ok(match kind.replace('-', "_").as_str() {
        "pda_curve" => Experiment::PdaCurve,
        "feasible_set" => Experiment::FeasibleSet,
        "rp_validate" | "rp" => {
            let prop = keys
                .get("experiment.prop")
                .map(|v| {
                    text("experiment.prop", v)?
                        .parse::<PropId>()
                        .map_err(|e| e.to_string())
                })
                .transpose()?;
            let beta = get_f("experiment.beta")?.unwrap_or(1.0);
            let case = keys
                .get("experiment.case")
                .map(|v| parse_case(&text("experiment.case", v)?, beta))
                .transpose()?;
            let pixels = keys
                .get("experiment.pixels_mc")
                .map(|v| typed("experiment.pixels_mc", v))
                .transpose()?
                .unwrap_or(1);
            Experiment::RpValidate {
                prop,
                case,
                phi: get_f("experiment.phi")?,
                pixels,
            }
        }
        "convergence" | "converge" => Experiment::Convergence {
            m_grid: keys
                .get("experiment.m_grid")
                .map(|v| typed("experiment.m_grid", v))
                .transpose()?
                .unwrap_or_else(|| CONVERGENCE_GRID.to_vec()),
            realizations: keys
                .get("experiment.convergence_realizations")
                .map(|v| typed("experiment.convergence_realizations", v))
                .transpose()?
                .unwrap_or(100),
        },
        "channel" => Experiment::Channel,
        "se" => Experiment::Se,
        "fixed_ris" => Experiment::FixedRis,
        "move_x" => Experiment::MoveX {
            grid: grid_from(keys, default_move_x_grid())?,
        },
        "move_z" => Experiment::MoveZ {
            grid: grid_from(keys, default_move_z_grid())?,
        },
        "param_sweep" | "sweep" => {
            let axis = keys
                .get("experiment.axis")
                .ok_or("experiment.axis is required for a parameter sweep")?;
            let axis: SweepAxis = text("experiment.axis", axis)?
                .parse()
                .map_err(|e: ris_core::RisError| e.to_string())?;
            let grid = grid_from(keys, Vec::new())?;
            if grid.is_empty() {
                return Err(
                    "experiment.grid or experiment.range/step is required for a parameter sweep"
                        .into(),
                );
            }
            Experiment::ParamSweep { axis, grid }
        }
        "paper_figs" => Experiment::PaperFigs,
        other => return Err(format!("experiment.kind: unknown experiment {other:?}")),
    })
}

impl ExperimentConfig {
    /// Checks every component; all failures are returned together.
    pub fn validate(&self) -> Result<(), SimError> {
        let mut errors = Vec::new();
        let mut push = |field: &str, r: ris_core::Result<()>| {
            if let Err(e) = r {
                errors.push(format!("{field}: {e}"));
            }
        };
        push("scenario", self.scenario.validate());
        push("pda", self.pda.validate());
        push("noise", self.noise.validate());
        if let (true, GammaSource::ClosedForm { prop }) =
            (self.experiment.uses_gamma_source(), self.gamma_source)
        {
            let check = match prop.case() {
                c @ ReflectionCase::CaseI { .. } => prop.check(&c, &self.noise),
                _ => prop.check(&ReflectionCase::from_noise(&self.noise), &self.noise),
            };
            push("gamma_source", check);
        }
        if self.realizations == 0 {
            errors.push("realizations: must be >= 1".into());
        }
        match &self.experiment {
            Experiment::RpValidate { pixels, .. } if *pixels == 0 => {
                errors.push("experiment.pixels_mc: must be >= 1".into())
            }
            Experiment::Convergence {
                m_grid,
                realizations,
            } => {
                if m_grid.is_empty() || m_grid.contains(&0) {
                    errors.push("experiment.m_grid: needs positive pixel counts".into());
                }
                if *realizations < 2 {
                    errors.push("experiment.convergence_realizations: must be >= 2".into());
                }
            }
            Experiment::MoveX { grid }
            | Experiment::MoveZ { grid }
            | Experiment::ParamSweep { grid, .. }
                if grid.is_empty() =>
            {
                errors.push("experiment.grid: must not be empty".into())
            }
            _ => {}
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(SimError::Config(errors))
        }
    }

    /// The configuration without fields that do not affect results.
    pub fn semantic(&self) -> ExperimentConfig {
        ExperimentConfig {
            output_dir: PathBuf::new(),
            ..self.clone()
        }
    }
}
