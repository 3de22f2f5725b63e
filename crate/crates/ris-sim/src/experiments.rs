//! Table producers, one per experiment.

use std::f64::consts::PI;

use ris_core::circular_noise::{NoiseFamily, NoiseSpec, SeedSpec};
use ris_core::nf_channel::{
    build_grid, cascaded_channel, chi_square_uniform, histogram, GainPattern, PhaseChoice, Scenario,
};
use ris_core::pda::{
    circuit_sweep, feasible_set, fit_pda, CircuitParams, FeasibleNoise, PdaParams,
};
use ris_core::remaining_power::{
    error_order, gamma_closed_form, gamma_convergence_study, gamma_mc, gamma_oracle, PhaseSet,
    PropId, ReflectionCase,
};
use ris_core::se_bounds::{
    gamma_per_pixel, se_chain, se_sweep, GammaSource, SeOptions, SeReport, SweepAxis, SweepRow,
    SweepTemplate,
};

use crate::config::{default_move_x_grid, default_move_z_grid, ExperimentConfig, CONVERGENCE_GRID};
use crate::error::SimError;
use crate::output::{Cell, Table};

type Out = Result<Vec<Table>, SimError>;

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

fn se_options(cfg: &ExperimentConfig) -> SeOptions {
    SeOptions {
        realizations: cfg.realizations,
        seed: cfg.seed,
    }
}

// Disjoint stream ranges per experiment so tables never share draws.
const STREAM_FEASIBLE: u64 = 1 << 40;
const STREAM_RP: u64 = 2 << 40;
const STREAM_CONVERGENCE: u64 = 3 << 40;
const STREAM_CHANNEL: u64 = 4 << 40;

fn stream(cfg: &ExperimentConfig, base: u64) -> SeedSpec {
    cfg.seed.substream(cfg.seed.stream_id.wrapping_add(base))
}

/// β over one period, the a/b/c families and the circuit fit.
pub fn pda_curve(cfg: &ExperimentConfig) -> Out {
    let p = cfg.pda;
    let lo = p.range_start();
    let hi = p.phi_upper();
    let mut curve = Table::new("pda_curve", &["phi", "beta", "beta_bar"]);
    let bar = PdaParams { a: 1.0, ..p };
    for phi in linspace(lo, hi, 721) {
        curve.push(vec![phi.into(), p.beta(phi).into(), bar.beta(phi).into()]);
    }

    let mut family = Table::new("pda_family", &["param", "value", "phi", "beta"]);
    let variants: Vec<(&str, f64, PdaParams)> = [1.0, 2.0, 3.0]
        .iter()
        .map(|&a| ("a", a, PdaParams { a, ..p }))
        .chain(
            [0.0, 0.2, 0.5, 1.0]
                .iter()
                .map(|&b| ("b", b, PdaParams { b, ..p })),
        )
        .chain(
            [0.3 * PI, 0.43 * PI, 0.5 * PI]
                .iter()
                .map(|&c| ("c", c, PdaParams { c, ..p })),
        )
        .collect();
    for (name, v, q) in variants {
        for phi in linspace(-PI, PI, 361) {
            family.push(vec![name.into(), v.into(), phi.into(), q.beta(phi).into()]);
        }
    }

    let base = CircuitParams::default();
    let caps = linspace(0.2e-12, 3e-12, 141);
    let samples = circuit_sweep(&base, &caps)?;
    let fit = fit_pda(&samples, &p)?;
    let mut circuit = Table::new(
        "pda_circuit",
        &["capacitance_pf", "phase", "amplitude", "model_beta"],
    );
    for (c, (ph, amp)) in caps.iter().zip(&samples) {
        circuit.push(vec![
            (c * 1e12).into(),
            (*ph).into(),
            (*amp).into(),
            fit.params.beta(*ph).into(),
        ]);
    }
    let mut fit_t = Table::new(
        "pda_circuit_fit",
        &["a", "b", "c", "max_deviation", "rms_deviation"],
    );
    fit_t.push(vec![
        fit.params.a.into(),
        fit.params.b.into(),
        fit.params.c.into(),
        fit.max_deviation.into(),
        fit.rms_deviation.into(),
    ]);
    Ok(vec![curve, family, circuit, fit_t])
}

/// Correlation levels of the feasible-set study.
pub const FEASIBLE_IOTAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Area of the noisy feasible set for each ι, sharing one set of draws.
pub fn feasible_areas(
    pda: &PdaParams,
    family: NoiseFamily,
    iotas: &[f64],
    draws: usize,
    seed: SeedSpec,
) -> Result<Vec<f64>, SimError> {
    iotas
        .iter()
        .map(|&iota| {
            let noise = NoiseSpec::new(family, iota, true)?;
            let fnz = FeasibleNoise { noise, draws, seed };
            Ok(feasible_set(pda, Some(&fnz), 256)?.area)
        })
        .collect()
}

/// Feasible-set loci and areas.
pub fn feasible(cfg: &ExperimentConfig) -> Out {
    let p = cfg.pda;
    let seed = stream(cfg, STREAM_FEASIBLE);
    let mut loci = Table::new("feasible_loci", &["series", "iota", "phase", "re", "im"]);
    let mut areas = Table::new("feasible_area", &["series", "value", "area"]);
    let clean = feasible_set(&p, None, 256)?;
    for (ph, z) in clean.phases.iter().zip(&clean.points) {
        loci.push(vec![
            "noiseless".into(),
            Cell::Empty,
            (*ph).into(),
            z.re.into(),
            z.im.into(),
        ]);
    }
    areas.push(vec!["noiseless".into(), Cell::Empty, clean.area.into()]);
    for &iota in &FEASIBLE_IOTAS {
        let noise = NoiseSpec::new(cfg.noise.family, iota, true)?;
        let fs = feasible_set(
            &p,
            Some(&FeasibleNoise {
                noise,
                draws: cfg.realizations,
                seed,
            }),
            256,
        )?;
        for (ph, z) in fs.phases.iter().zip(&fs.points) {
            loci.push(vec![
                "noisy".into(),
                iota.into(),
                (*ph).into(),
                z.re.into(),
                z.im.into(),
            ]);
        }
        areas.push(vec!["iota".into(), iota.into(), fs.area.into()]);
    }
    for a in [1.0, 1.5, 2.0, 3.0, 5.0] {
        areas.push(vec![
            "a".into(),
            a.into(),
            feasible_set(&PdaParams { a, ..p }, None, 256)?.area.into(),
        ]);
    }
    for b in [0.0, 0.2, 0.5, 0.8, 1.0] {
        areas.push(vec![
            "b".into(),
            b.into(),
            feasible_set(&PdaParams { b, ..p }, None, 256)?.area.into(),
        ]);
    }
    for c in [0.1 * PI, 0.25 * PI, 0.43 * PI, 0.5 * PI] {
        areas.push(vec![
            "c".into(),
            c.into(),
            feasible_set(&PdaParams { c, ..p }, None, 256)?.area.into(),
        ]);
    }
    Ok(vec![loci, areas])
}

const RP_HEADER: [&str; 15] = [
    "prop",
    "case",
    "phi",
    "tau",
    "kappa",
    "iota",
    "gamma_closed",
    "error_order",
    "gamma_oracle",
    "oracle_error",
    "gamma_mc",
    "gamma_mc_se",
    "gamma_m",
    "pixels",
    "closed_minus_oracle",
];

/// Γ by every available method at each phase; `prop` adds the closed form.
#[allow(clippy::too_many_arguments)]
pub fn rp_rows(
    table: &mut Table,
    prop: Option<PropId>,
    case: Option<ReflectionCase>,
    pda: &PdaParams,
    noise: &NoiseSpec,
    phis: &[f64],
    pixels: usize,
    realizations: usize,
    seed: SeedSpec,
) -> Result<(), SimError> {
    let case = match (case, prop) {
        (Some(c), _) => c,
        (None, Some(p)) if matches!(p.case(), ReflectionCase::CaseI { .. }) => p.case(),
        _ => ReflectionCase::from_noise(noise),
    };
    let order = prop.map(|p| error_order(p, noise)).transpose()?;
    for (k, &phi) in phis.iter().enumerate() {
        let closed = prop
            .map(|p| gamma_closed_form(p, &case, pda, noise, phi))
            .transpose()?;
        let oracle = gamma_oracle(&case, pda, noise, phi)?;
        let mc = gamma_mc(
            &case,
            pda,
            noise,
            &PhaseSet::Shared(phi),
            pixels,
            realizations,
            seed.substream(seed.stream_id.wrapping_add((k as u64) << 24)),
        )?;
        let case_name = match case {
            ReflectionCase::CaseI { .. } => "I",
            ReflectionCase::CaseII => "II",
            ReflectionCase::CaseIII => "III",
            ReflectionCase::CaseIV => "IV",
        };
        table.push(vec![
            prop.map(|p| p.to_string()).into(),
            case_name.into(),
            phi.into(),
            noise.family.tau().into(),
            noise.family.kappa().into(),
            noise.iota.into(),
            closed.map(|c| c.gamma).into(),
            order.into(),
            oracle.gamma.into(),
            oracle.error_estimate.into(),
            mc.pooled.gamma.into(),
            mc.pooled.error_estimate.into(),
            mc.gamma_m.into(),
            pixels.into(),
            closed.map(|c| c.gamma - oracle.gamma).into(),
        ]);
    }
    Ok(())
}

/// φ_L, c, φ_U, 0 and π/4.
pub fn reference_phases(p: &PdaParams) -> Vec<f64> {
    vec![p.phi_lower(), p.c, p.phi_upper(), 0.0, PI / 4.0]
}

pub fn rp_validate(
    cfg: &ExperimentConfig,
    prop: Option<PropId>,
    case: Option<ReflectionCase>,
    phi: Option<f64>,
    pixels: usize,
) -> Out {
    let phis = phi.map_or_else(|| reference_phases(&cfg.pda), |p| vec![p]);
    // A closed form fixes the error family and ι it was derived for.
    let noise = match prop {
        Some(p) => {
            let f = cfg.noise.family;
            p.noise_for(f.tau().unwrap_or(PI / 8.0), f.kappa().unwrap_or(5.0))?
        }
        None => cfg.noise,
    };
    let mut t = Table::new("rp", &RP_HEADER);
    rp_rows(
        &mut t,
        prop,
        case,
        &cfg.pda,
        &noise,
        &phis,
        pixels,
        cfg.realizations,
        stream(cfg, STREAM_RP),
    )?;
    Ok(vec![t])
}

/// Every closed form on its noise grid.
pub fn rp_suite(cfg: &ExperimentConfig) -> Out {
    let mut t = Table::new("rp_suite", &RP_HEADER);
    let phis = reference_phases(&cfg.pda);
    for (i, prop) in PropId::ALL.iter().enumerate() {
        let grid: Vec<(f64, f64)> = match prop {
            PropId::P3_1 | PropId::P3_3 | PropId::P3_5 | PropId::P3_7 => {
                [PI / 16.0, PI / 8.0, PI / 4.0]
                    .iter()
                    .map(|&t| (t, 0.0))
                    .collect()
            }
            PropId::P3_9 | PropId::P3_10 => [
                (PI / 8.0, 2.0),
                (PI / 8.0, 5.0),
                (PI / 4.0, 2.0),
                (PI / 4.0, 5.0),
            ]
            .to_vec(),
            _ => [2.0, 5.0, 8.0].iter().map(|&k| (0.0, k)).collect(),
        };
        for (j, (tau, kappa)) in grid.into_iter().enumerate() {
            let noise = prop.noise_for(tau, kappa)?;
            let seed = stream(cfg, STREAM_RP + ((i as u64) << 32) + ((j as u64) << 28));
            rp_rows(
                &mut t,
                Some(*prop),
                None,
                &cfg.pda,
                &noise,
                &phis,
                1,
                cfg.realizations,
                seed,
            )?;
        }
    }
    Ok(vec![t])
}

pub fn convergence(cfg: &ExperimentConfig, m_grid: &[usize], realizations: usize) -> Out {
    let mut t = Table::new(
        "convergence",
        &[
            "family",
            "tau",
            "kappa",
            "iota",
            "pixels",
            "gamma_m",
            "gamma_m_se",
            "gamma_inf",
            "gap",
        ],
    );
    convergence_rows(
        &mut t,
        &cfg.pda,
        &cfg.noise,
        m_grid,
        realizations,
        stream(cfg, STREAM_CONVERGENCE),
    )?;
    Ok(vec![t])
}

fn family_name(f: &NoiseFamily) -> &'static str {
    match f {
        NoiseFamily::Uniform { .. } => "uniform",
        NoiseFamily::VonMises { .. } => "von_mises",
        NoiseFamily::Composite { .. } => "composite",
    }
}

fn convergence_rows(
    t: &mut Table,
    pda: &PdaParams,
    noise: &NoiseSpec,
    m_grid: &[usize],
    realizations: usize,
    seed: SeedSpec,
) -> Result<(), SimError> {
    for r in gamma_convergence_study(pda, noise, m_grid, realizations, seed)? {
        t.push(vec![
            family_name(&noise.family).into(),
            noise.family.tau().into(),
            noise.family.kappa().into(),
            noise.iota.into(),
            r.pixels.into(),
            r.gamma_m.into(),
            r.gamma_m_se.into(),
            r.gamma_inf.into(),
            r.gap.into(),
        ]);
    }
    Ok(())
}

/// Uniform τ ∈ {π/4, π/2} and von Mises κ ∈ {1, 5}, each at ι = 0 and 1.
pub fn convergence_suite(cfg: &ExperimentConfig) -> Out {
    let mut t = Table::new(
        "convergence",
        &[
            "family",
            "tau",
            "kappa",
            "iota",
            "pixels",
            "gamma_m",
            "gamma_m_se",
            "gamma_inf",
            "gap",
        ],
    );
    let families = [
        NoiseFamily::Uniform { tau: PI / 4.0 },
        NoiseFamily::Uniform { tau: PI / 2.0 },
        NoiseFamily::VonMises { kappa: 1.0 },
        NoiseFamily::VonMises { kappa: 5.0 },
    ];
    let mut k = 0u64;
    for f in families {
        for iota in [0.0, 1.0] {
            let noise = NoiseSpec::new(f, iota, true)?;
            let seed = stream(cfg, STREAM_CONVERGENCE + (k << 36));
            convergence_rows(&mut t, &cfg.pda, &noise, &CONVERGENCE_GRID, 100, seed)?;
            k += 1;
        }
    }
    Ok(vec![t])
}

/// Row-major √M × √M matrix.
fn heatmap(values: &[f64]) -> Vec<Vec<f64>> {
    let n = (values.len() as f64).sqrt().round() as usize;
    values.chunks(n).map(|r| r.to_vec()).collect()
}

/// Per-pixel geometry, heatmaps and one channel draw.
pub fn channel(cfg: &ExperimentConfig, prefix: &str) -> Out {
    let s = &cfg.scenario;
    let pixels = build_grid(s)?;
    let seed = stream(cfg, STREAM_CHANNEL);
    let clean = cascaded_channel(s, &cfg.pda, None, &PhaseChoice::Designed, seed)?;
    let noisy = cascaded_channel(s, &cfg.pda, Some(&cfg.noise), &PhaseChoice::Designed, seed)?;
    let mut t = Table::new(
        format!("{prefix}_pixels"),
        &[
            "m",
            "x",
            "y",
            "d_ap",
            "d_user",
            "phi",
            "a_ap",
            "a_user",
            "theta_ap",
            "theta_user",
        ],
    );
    for (i, p) in pixels.iter().enumerate() {
        t.push(vec![
            p.index.into(),
            p.pos[0].into(),
            p.pos[1].into(),
            p.d_ap.into(),
            p.d_user.into(),
            p.phi.into(),
            clean.amp_ap[i].into(),
            clean.amp_user[i].into(),
            p.theta_ap.into(),
            p.theta_user.into(),
        ]);
    }
    let (gamma, _, _) = gamma_per_pixel(cfg.gamma_source, &cfg.pda, &cfg.noise, &clean.phases)?;
    let mut summary = Table::new(
        format!("{prefix}_summary"),
        &["draw", "h_re", "h_im", "abs_h2", "snr_db"],
    );
    for (name, h) in [("noiseless", clean.h), ("noisy", noisy.h)] {
        let snr = s.p_ap * h.norm_sqr() / s.sigma2;
        summary.push(vec![
            name.into(),
            h.re.into(),
            h.im.into(),
            h.norm_sqr().into(),
            (10.0 * snr.log10()).into(),
        ]);
    }
    Ok(vec![
        t,
        Table::matrix(format!("{prefix}_phi_heatmap"), heatmap(&clean.phases)),
        Table::matrix(
            format!("{prefix}_beta2_heatmap"),
            heatmap(&clean.gamma_proxy),
        ),
        Table::matrix(format!("{prefix}_gamma_heatmap"), heatmap(&gamma)),
        summary,
    ])
}

const SE_HEADER: [&str; 19] = [
    "value",
    "status",
    "reason",
    "se_mc",
    "se_mc_se",
    "se_l",
    "se_l_upper",
    "se",
    "se_upper",
    "se_upper_verbatim",
    "se_u",
    "se_u_upper",
    "gap_l",
    "gap_h",
    "gap_u",
    "gamma_l",
    "gamma_u",
    "cbs_ratio",
    "chain_ok",
];

fn se_cells(value: f64, r: &SeReport) -> Vec<Cell> {
    let gap = r.tightness_gap();
    let violations = r.chain_violations();
    vec![
        value.into(),
        "ok".into(),
        if violations.is_empty() {
            Cell::Empty
        } else {
            violations.join(";").into()
        },
        r.se_mc.into(),
        r.se_mc_se.into(),
        r.se_l.into(),
        r.se_l_upper.into(),
        r.se.into(),
        r.se_upper.into(),
        r.se_upper_verbatim.into(),
        r.se_u.into(),
        r.se_u_upper.into(),
        gap.map(|g| g.l).into(),
        gap.map(|g| g.h).into(),
        gap.map(|g| g.u).into(),
        r.gamma_l.into(),
        r.gamma_u.into(),
        r.cbs_ratio.into(),
        violations.is_empty().into(),
    ]
}

/// One table row per sweep point; skipped points carry their reason.
pub fn sweep_table(name: impl Into<String>, rows: &[SweepRow]) -> Table {
    let mut t = Table::new(name, &SE_HEADER);
    for row in rows {
        match (&row.report, &row.skipped) {
            (Some(r), _) => t.push(se_cells(row.value, r)),
            (None, reason) => {
                let mut cells = vec![Cell::Empty; SE_HEADER.len()];
                cells[0] = row.value.into();
                cells[1] = "skipped".into();
                cells[2] = reason.clone().into();
                t.push(cells);
            }
        }
    }
    t
}

pub fn template(cfg: &ExperimentConfig) -> SweepTemplate {
    SweepTemplate {
        scenario: cfg.scenario.clone(),
        pda: cfg.pda,
        noise: cfg.noise,
        source: cfg.gamma_source,
        opts: se_options(cfg),
    }
}

pub fn se(cfg: &ExperimentConfig) -> Out {
    let r = se_chain(
        &cfg.scenario,
        &cfg.pda,
        &cfg.noise,
        cfg.gamma_source,
        &se_options(cfg),
    )?;
    let mut t = Table::new("se", &SE_HEADER);
    t.push(se_cells(cfg.scenario.dx, &r));
    Ok(vec![t])
}

pub fn sweep(cfg: &ExperimentConfig, axis: SweepAxis, grid: &[f64], name: &str) -> Out {
    Ok(vec![sweep_table(
        name,
        &se_sweep(&template(cfg), axis, grid),
    )])
}

/// Bins of the φ histogram.
pub const PHI_BINS: usize = 32;
/// Bins of the Γ histograms.
pub const GAMMA_BINS: usize = 20;

fn hist_table(
    name: String,
    key: &str,
    values: &[(f64, Vec<f64>)],
    bins: usize,
    lo: f64,
    hi: f64,
) -> Table {
    let mut t = Table::new(name, &[key, "bin_lo", "bin_hi", "count", "density"]);
    let w = (hi - lo) / bins as f64;
    for (k, vals) in values {
        let counts = histogram(vals, bins, lo, hi);
        let n = vals.len() as f64;
        for (i, c) in counts.iter().enumerate() {
            let a = lo + w * i as f64;
            t.push(vec![
                (*k).into(),
                a.into(),
                (a + w).into(),
                (*c).into(),
                (*c as f64 / (n * w)).into(),
            ]);
        }
    }
    t
}

/// Pearson χ² of the designed phases against a uniform law on 32 bins.
pub fn phase_chi_square(s: &Scenario) -> Result<f64, SimError> {
    let phases: Vec<f64> = build_grid(s)?.iter().map(|p| p.phi).collect();
    Ok(chi_square_uniform(&histogram(&phases, PHI_BINS, -PI, PI)))
}

/// Pitches of the pixel-size study: the configured one, then λ/2, λ/4, λ/8.
pub fn pitch_grid(s: &Scenario) -> Vec<f64> {
    let l = s.wavelength();
    let mut g = vec![s.dx];
    for p in [l / 2.0, l / 4.0, l / 8.0] {
        if g.iter().all(|q| (q - p).abs() > 1e-12) {
            g.push(p);
        }
    }
    g
}

/// Fixed deployment: φ and Γ distributions, SE against pitch, heatmaps.
pub fn fixed_ris(cfg: &ExperimentConfig) -> Out {
    let s = &cfg.scenario;
    let phases: Vec<f64> = build_grid(s)?.iter().map(|p| p.phi).collect();
    let mut out = Vec::new();
    out.push(hist_table(
        "fixed_phi_hist".into(),
        "x_ris",
        &[(s.ris_center[0], phases.clone())],
        PHI_BINS,
        -PI,
        PI,
    ));
    let mut chi = Table::new("fixed_phi_chi2", &["pixels", "bins", "chi2"]);
    chi.push(vec![
        phases.len().into(),
        PHI_BINS.into(),
        phase_chi_square(s)?.into(),
    ]);
    out.push(chi);

    out.push(sweep_table(
        "fixed_se_pitch",
        &se_sweep(&template(cfg), SweepAxis::PixelPitch, &pitch_grid(s)),
    ));

    let (gamma, _, _) = gamma_per_pixel(cfg.gamma_source, &cfg.pda, &cfg.noise, &phases)?;
    out.push(hist_table(
        "fixed_gamma_hist".into(),
        "kappa",
        &[(cfg.noise.family.kappa().unwrap_or(0.0), gamma)],
        GAMMA_BINS,
        0.0,
        1.0,
    ));

    let mut by_tau = Vec::new();
    for tau in [0.0, PI / 16.0, PI / 8.0, PI / 4.0, PI / 2.0] {
        let family = match cfg.noise.family {
            NoiseFamily::Composite { kappa, .. } => NoiseFamily::Composite { tau, kappa },
            _ => NoiseFamily::Uniform { tau },
        };
        let noise = NoiseSpec {
            family,
            ..cfg.noise
        };
        by_tau.push((
            tau,
            gamma_per_pixel(GammaSource::Oracle, &cfg.pda, &noise, &phases)?.0,
        ));
    }
    out.push(hist_table(
        "fixed_gamma_pdf_tau".into(),
        "tau",
        &by_tau,
        GAMMA_BINS,
        0.0,
        1.0,
    ));

    out.push(Table::matrix("fixed_phi_heatmap", heatmap(&phases)));
    for kappa in [2.0, 5.0, 8.0] {
        let family = match cfg.noise.family {
            NoiseFamily::Composite { tau, .. } => NoiseFamily::Composite { tau, kappa },
            _ => NoiseFamily::VonMises { kappa },
        };
        let noise = NoiseSpec {
            family,
            ..cfg.noise
        };
        let source = match cfg.gamma_source {
            GammaSource::ClosedForm { prop }
                if prop.family() != ris_core::remaining_power::FamilyKind::of(&family) =>
            {
                GammaSource::Oracle
            }
            s => s,
        };
        let g = gamma_per_pixel(source, &cfg.pda, &noise, &phases)?.0;
        out.push(Table::matrix(
            format!("fixed_gamma_heatmap_kappa{kappa}"),
            heatmap(&g),
        ));
    }
    Ok(out)
}

/// Horizontal move: SE rows plus φ and Γ distributions at the ends and centre.
pub fn move_x(cfg: &ExperimentConfig, grid: &[f64]) -> Out {
    let mut out = vec![sweep_table(
        "move_x_se",
        &se_sweep(&template(cfg), SweepAxis::XRis, grid),
    )];
    let (lo, hi) = grid
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    let mut xs = vec![lo];
    if lo < 0.0 && hi > 0.0 {
        xs.push(0.0);
    }
    xs.push(hi);
    let mut phis = Vec::new();
    let mut gammas = Vec::new();
    for &x in &xs {
        let mut s = cfg.scenario.clone();
        s.ris_center[0] = x;
        let p: Vec<f64> = build_grid(&s)?.iter().map(|g| g.phi).collect();
        gammas.push((
            x,
            gamma_per_pixel(cfg.gamma_source, &cfg.pda, &cfg.noise, &p)?.0,
        ));
        if x == hi {
            out.push(Table::matrix("move_x_phi_heatmap_end", heatmap(&p)));
        }
        phis.push((x, p));
    }
    out.push(hist_table(
        "move_x_phi_pdf".into(),
        "x_ris",
        &phis,
        PHI_BINS,
        -PI,
        PI,
    ));
    out.push(hist_table(
        "move_x_gamma_pdf".into(),
        "x_ris",
        &gammas,
        GAMMA_BINS,
        0.0,
        1.0,
    ));
    Ok(out)
}

pub fn move_z(cfg: &ExperimentConfig, grid: &[f64], name: &str) -> Out {
    sweep(cfg, SweepAxis::ZRis, grid, name)
}

/// Everything, at the configured scale.
pub fn paper_figs(cfg: &ExperimentConfig) -> Out {
    let mut out = Vec::new();
    out.extend(pda_curve(cfg)?);
    out.extend(feasible(cfg)?);
    out.extend(rp_suite(cfg)?);
    out.extend(convergence_suite(cfg)?);
    out.extend(channel(cfg, "channel")?);
    out.extend(fixed_ris(cfg)?);
    out.extend(move_x(cfg, &default_move_x_grid())?);
    for pattern in [GainPattern::Cosine, GainPattern::Isotropic] {
        let mut c = cfg.clone();
        c.scenario.pattern = pattern;
        let name = match pattern {
            GainPattern::Cosine => "move_z_se_cosine",
            GainPattern::Isotropic => "move_z_se_isotropic",
        };
        out.extend(move_z(&c, &default_move_z_grid(), name)?);
    }
    let mut oracle = cfg.clone();
    oracle.gamma_source = GammaSource::Oracle;
    out.extend(sweep(
        &oracle,
        SweepAxis::Iota,
        &[0.0, 0.25, 0.5, 0.75, 1.0],
        "sweep_iota",
    )?);
    // Closed forms do not depend on `a`.
    out.extend(sweep(
        &oracle,
        SweepAxis::A,
        &[1.0, 1.5, 2.0, 3.0],
        "sweep_a",
    )?);
    out.extend(sweep(cfg, SweepAxis::B, &linspace(0.0, 1.0, 6), "sweep_b")?);
    out.extend(sweep(
        cfg,
        SweepAxis::C,
        &[0.1 * PI, 0.25 * PI, 0.43 * PI, 0.5 * PI],
        "sweep_c",
    )?);
    Ok(out)
}
