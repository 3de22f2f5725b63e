//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints its verdict; the process exits non-zero if any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ris_core::circular_noise::{NoiseFamily, NoiseSpec, SeedSpec};
use ris_core::nf_channel::{build_grid, histogram, GainPattern, Scenario, Side};
use ris_core::pda::PdaParams;
use ris_core::quadrature::{integrate_2d, QuadOptions};
use ris_core::remaining_power::{
    error_order, gamma_closed_form, gamma_convergence_study, gamma_mc, gamma_oracle, PhaseSet,
    PropId, ReflectionCase,
};
use ris_core::se_bounds::{
    gamma_per_pixel, panel_integral, se_chain, se_sweep, GammaSource, SeOptions, SweepAxis,
};
use ris_sim::default_config;
use ris_sim::experiments::{feasible_areas, phase_chi_square, template, FEASIBLE_IOTAS, PHI_BINS};
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Verdict = Result<String, String>;

struct Criterion {
    id: u32,
    title: &'static str,
    limit: Option<Duration>,
    run: fn() -> Verdict,
}

fn case_for(prop: PropId, noise: &NoiseSpec) -> ReflectionCase {
    match prop.case() {
        c @ ReflectionCase::CaseI { .. } => c,
        _ => ReflectionCase::from_noise(noise),
    }
}

fn phases(p: &PdaParams) -> [f64; 5] {
    [p.phi_lower(), p.c, p.phi_upper(), 0.0, PI / 4.0]
}

/// Absolute difference between closed form and oracle.
fn closed_vs_oracle(prop: PropId, noise: &NoiseSpec, pda: &PdaParams, phi: f64) -> (f64, f64) {
    let case = case_for(prop, noise);
    let c = gamma_closed_form(prop, &case, pda, noise, phi).unwrap();
    let o = gamma_oracle(&case, pda, noise, phi).unwrap();
    ((c.gamma - o.gamma).abs(), o.error_estimate)
}

/// Rounding slack for points where the stated order is zero.
const ROUNDOFF: f64 = 1e-14;

fn criterion_1() -> Verdict {
    let pda = PdaParams::default();
    let taus = [0.0, PI / 8.0, PI / 4.0];
    let kappas = [2.0, 5.0, 8.0];
    let props = [
        PropId::P3_1,
        PropId::P3_2,
        PropId::P3_3,
        PropId::P3_4,
        PropId::P3_5,
        PropId::P3_6,
        PropId::P3_7,
        PropId::P3_8,
        PropId::P3_10,
    ];
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for prop in props {
        let grid: Vec<(f64, f64)> = match prop {
            PropId::P3_1 | PropId::P3_3 | PropId::P3_5 | PropId::P3_7 => {
                taus.iter().map(|&t| (t, 0.0)).collect()
            }
            PropId::P3_10 => taus
                .iter()
                .flat_map(|&t| kappas.iter().map(move |&k| (t, k)))
                .collect(),
            _ => kappas.iter().map(|&k| (0.0, k)).collect(),
        };
        for (tau, kappa) in grid {
            let noise = prop.noise_for(tau, kappa).unwrap();
            let bound = 5.0 * error_order(prop, &noise).unwrap();
            for phi in phases(&pda) {
                let (diff, oracle_err) = closed_vs_oracle(prop, &noise, &pda, phi);
                checked += 1;
                let allowed = bound + oracle_err + ROUNDOFF;
                worst = worst.max(diff / allowed);
                if diff > allowed {
                    failures.push(format!("{prop} tau={tau:.4} kappa={kappa} phi={phi:.4}: {diff:.3e} > {allowed:.3e}"));
                }
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("{checked} points, worst |diff|/bound = {worst:.3}"))
    } else {
        Err(format!(
            "{} of {checked} points out of bound: {}",
            failures.len(),
            failures.join("; ")
        ))
    }
}

fn criterion_2() -> Verdict {
    let pda = PdaParams::default();
    let taus = [PI / 4.0, PI / 8.0, PI / 16.0];
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    for (prop, power) in [(PropId::P3_1, 10), (PropId::P3_5, 8), (PropId::P3_7, 6)] {
        let target = 2f64.powi(power);
        let phis: Vec<f64> = phases(&pda)
            .into_iter()
            .filter(|&phi| !(prop == PropId::P3_5 && phi == pda.c))
            .collect();
        let mut ratios = Vec::new();
        for &phi in &phis {
            let err: Vec<f64> = taus
                .iter()
                .map(|&t| closed_vs_oracle(prop, &prop.noise_for(t, 0.0).unwrap(), &pda, phi).0)
                .collect();
            for w in err.windows(2) {
                let r = w[0] / w[1];
                ratios.push(r);
                if !(r >= target / 2.0 && r <= target * 2.0) {
                    failures.push(format!("{prop} phi={phi:.4}: ratio {r:.1} vs 2^{power}"));
                }
            }
        }
        let (lo, hi) = ratios
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        lines.push(format!("{prop}: ratios {lo:.1}..{hi:.1} (target {target})"));
    }
    if failures.is_empty() {
        Ok(lines.join("; "))
    } else {
        Err(format!(
            "{}; failing: {}",
            lines.join("; "),
            failures.join("; ")
        ))
    }
}

fn criterion_3() -> Verdict {
    let pda = PdaParams::default();
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut k = 0;
    for tau in [PI / 8.0, PI / 4.0] {
        for kappa in [2.0, 5.0] {
            let noise = PropId::P3_9.noise_for(tau, kappa).unwrap();
            for phi in phases(&pda) {
                let exact = gamma_oracle(&ReflectionCase::CaseIV, &pda, &noise, phi).unwrap();
                let mc = gamma_mc(
                    &ReflectionCase::CaseIV,
                    &pda,
                    &noise,
                    &PhaseSet::Shared(phi),
                    1,
                    1_000_000,
                    SeedSpec::new(39, k << 32),
                )
                .unwrap();
                k += 1;
                let z = (exact.gamma - mc.pooled.gamma).abs() / mc.pooled.error_estimate;
                worst = worst.max(z);
                if z > 3.0 {
                    failures.push(format!(
                        "tau={tau:.4} kappa={kappa} phi={phi:.4}: {z:.2} SE"
                    ));
                }
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("20 points, max deviation {worst:.2} SE"))
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_4() -> Verdict {
    let pda = PdaParams::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for (iota, grid) in [(0.0, vec![200, 500, 1000]), (1.0, vec![500, 1000])] {
        let noise = NoiseSpec::new(NoiseFamily::Uniform { tau: PI / 2.0 }, iota, true).unwrap();
        let rows = gamma_convergence_study(&pda, &noise, &grid, 100, SeedSpec::new(4, iota as u64))
            .unwrap();
        for r in rows {
            ok &= r.gap < 0.02;
            lines.push(format!("iota={iota} M={} gap={:.4}", r.pixels, r.gap));
        }
    }
    let msg = lines.join(", ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn mc_gamma(noise: &NoiseSpec, pda: &PdaParams, phi: f64, stream: u64) -> (f64, f64) {
    let r = gamma_mc(
        &ReflectionCase::CaseIII,
        pda,
        noise,
        &PhaseSet::Shared(phi),
        1,
        1_000_000,
        SeedSpec::new(5, stream << 32),
    )
    .unwrap();
    (r.pooled.gamma, r.pooled.error_estimate)
}

fn criterion_5() -> Verdict {
    let pda = PdaParams::default();
    let mut lines = Vec::new();
    let mut ok = true;
    let mut stream = 0;
    for family in [
        NoiseFamily::Uniform { tau: PI / 2.0 },
        NoiseFamily::VonMises { kappa: 2.0 },
    ] {
        let n0 = NoiseSpec::new(family, 0.0, true).unwrap();
        let n1 = NoiseSpec::new(family, 1.0, true).unwrap();
        // Mid-range: independent errors keep more power.
        let (g0, s0) = mc_gamma(&n0, &pda, 0.0, stream);
        let (g1, s1) = mc_gamma(&n1, &pda, 0.0, stream + 1);
        stream += 2;
        let z = (g0 - g1) / s0.hypot(s1);
        ok &= z > 3.0;
        lines.push(format!(
            "{family:?} phi=0: G0-G1={:.4} ({z:.1} SE)",
            g0 - g1
        ));
        // Range ends: the ordering reverses.
        for phi in [pda.phi_upper(), pda.range_start()] {
            let (g0, s0) = mc_gamma(&n0, &pda, phi, stream);
            let (g1, s1) = mc_gamma(&n1, &pda, phi, stream + 1);
            stream += 2;
            let z = (g1 - g0) / s0.hypot(s1);
            ok &= z > 3.0;
            lines.push(format!("phi={phi:.3}: G1-G0={:.4} ({z:.1} SE)", g1 - g0));
        }
    }
    let msg = lines.join(", ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_6() -> Verdict {
    let mut rng = SeedSpec::new(6, 0).rng();
    use rand::Rng;
    let opts = QuadOptions::tight();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut s = Scenario::reference();
        s.pixels = 1;
        let l = s.wavelength();
        s.dx = rng.random_range(l / 8.0..2.0 * l);
        s.dy = rng.random_range(l / 8.0..2.0 * l);
        s.ris_center = [
            rng.random_range(-7.0..7.0),
            rng.random_range(3.0..17.0),
            0.0,
        ];
        s.ap_pos = [
            rng.random_range(-25.0..25.0),
            rng.random_range(-5.0..25.0),
            rng.random_range(0.5..12.0),
        ];
        let p = build_grid(&s).unwrap()[0];
        let [xt, yt, zt] = s.ap_pos;
        let f = |x: f64, y: f64| ((x - xt).powi(2) + (y - yt).powi(2) + zt * zt).powf(-1.5);
        let brute = integrate_2d(
            f,
            (p.pos[0] - s.dx / 2.0, p.pos[0] + s.dx / 2.0),
            (p.pos[1] - s.dy / 2.0, p.pos[1] + s.dy / 2.0),
            opts,
        )
        .unwrap()
        .value;
        worst = worst.max((panel_integral(&p, &s, Side::Ap).unwrap() - brute).abs());
    }
    if worst <= 1e-10 {
        Ok(format!("100 geometries, max abs error {worst:.2e}"))
    } else {
        Err(format!("max abs error {worst:.2e} > 1e-10"))
    }
}

fn desk_scenario(pitch_wavelengths: f64) -> Scenario {
    let mut s = Scenario::reference();
    s.pixels = 50 * 50;
    s.dx = pitch_wavelengths * s.wavelength();
    s.dy = s.dx;
    s
}

fn criterion_7() -> Verdict {
    let pda = PdaParams::default();
    let no_mc = SeOptions {
        realizations: 0,
        seed: SeedSpec::new(7, 0),
    };
    let mut failures = Vec::new();
    let mut verbatim = Vec::new();
    for prop in [
        PropId::P3_3,
        PropId::P3_4,
        PropId::P3_7,
        PropId::P3_8,
        PropId::P3_10,
    ] {
        let noise = prop.noise_for(PI / 8.0, 5.0).unwrap();
        let mut gaps = Vec::new();
        for frac in [0.5, 0.25, 0.125] {
            let s = desk_scenario(frac);
            let r = se_chain(&s, &pda, &noise, GammaSource::ClosedForm { prop }, &no_mc).unwrap();
            if !r.chain_holds() {
                failures.push(format!("{prop} pitch={frac}λ: {:?}", r.chain_violations()));
            }
            gaps.push(r.tightness_gap().unwrap());
            verbatim.push(r.se_upper_verbatim.unwrap() - r.se);
        }
        let (first, last) = (gaps[0], gaps[2]);
        if !(last.l < first.l && last.h < first.h && last.u < first.u) {
            failures.push(format!(
                "{prop}: gaps at λ/8 {last:?} not below λ/2 {first:?}"
            ));
        }
    }
    // One-sided √Γ weighting, reported only: its gap does not close with pitch.
    let (vlo, vhi) = verbatim
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &g| (a.min(g), b.max(g)));
    if failures.is_empty() {
        Ok(format!(
            "chain holds for 3.3, 3.4, 3.7, 3.8, 3.10 at λ/2, λ/4, λ/8; gaps shrink \
             (one-sided H bound gap {vlo:.3}..{vhi:.3})"
        ))
    } else {
        Err(failures.join("; "))
    }
}

fn unimodal(v: &[f64]) -> bool {
    let k = v
        .iter()
        .enumerate()
        .fold(0, |b, (i, x)| if *x > v[b] { i } else { b });
    v[..=k].windows(2).all(|w| w[1] > w[0]) && v[k..].windows(2).all(|w| w[1] < w[0])
}

fn monotone(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0]) || v.windows(2).all(|w| w[1] <= w[0])
}

fn criterion_8() -> Verdict {
    let mut cfg = default_config();
    cfg.scenario = desk_scenario(2.0);
    cfg.realizations = 500;
    let s = &cfg.scenario;
    let mut parts = Vec::new();
    let mut ok = true;

    let chi2 = phase_chi_square(s).unwrap();
    let critical = ChiSquared::new((PHI_BINS - 1) as f64)
        .unwrap()
        .inverse_cdf(0.99);
    let a = chi2 <= critical;
    ok &= a;
    parts.push(format!(
        "(a) phi chi2={chi2:.1} vs {critical:.1} {}",
        if a { "ok" } else { "FAIL" }
    ));

    let phis: Vec<f64> = build_grid(s).unwrap().iter().map(|p| p.phi).collect();
    let gamma = gamma_per_pixel(cfg.gamma_source, &cfg.pda, &cfg.noise, &phis)
        .unwrap()
        .0;
    let (lo, hi) = gamma
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &g| (a.min(g), b.max(g)));
    let deciles = histogram(&gamma, 10, lo, hi);
    let (outer, middle) = (deciles[0] + deciles[9], deciles[4] + deciles[5]);
    let b = outer > middle;
    ok &= b;
    parts.push(format!(
        "(b) gamma outer={outer} middle={middle} {}",
        if b { "ok" } else { "FAIL" }
    ));

    let xs: Vec<f64> = (-8..=8).map(f64::from).collect();
    let rows = se_sweep(&template(&cfg), SweepAxis::XRis, &xs);
    let se_mc: Vec<f64> = rows
        .iter()
        .map(|r| r.report.unwrap().se_mc.unwrap())
        .collect();
    let argmin = se_mc
        .iter()
        .enumerate()
        .fold(0, |b, (i, x)| if *x < se_mc[b] { i } else { b });
    let x_min = xs[argmin];
    let c = x_min.abs() <= 16.0 / 6.0;
    ok &= c;
    parts.push(format!(
        "(c) x-sweep minimum at x={x_min} {}",
        if c { "ok" } else { "FAIL" }
    ));

    let zs: Vec<f64> = (-10..=5).map(|k| 2.0 * f64::from(k)).collect();
    let mut shapes = Vec::new();
    for pattern in [GainPattern::Cosine, GainPattern::Isotropic] {
        let mut c2 = cfg.clone();
        c2.scenario.pattern = pattern;
        let rows = se_sweep(&template(&c2), SweepAxis::ZRis, &zs);
        let valid: Vec<f64> = rows
            .iter()
            .filter_map(|r| r.report.map(|x| x.se_mc.unwrap()))
            .collect();
        shapes.push((pattern, valid));
    }
    let d = unimodal(&shapes[0].1) && monotone(&shapes[1].1);
    ok &= d;
    parts.push(format!(
        "(d) z-sweep cosine unimodal={} isotropic monotone={} over {} valid points {}",
        unimodal(&shapes[0].1),
        monotone(&shapes[1].1),
        shapes[0].1.len(),
        if d { "ok" } else { "FAIL" }
    ));
    let msg = parts.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_9() -> Verdict {
    let pda = PdaParams::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for family in [
        NoiseFamily::Uniform { tau: PI / 4.0 },
        NoiseFamily::VonMises { kappa: 5.0 },
    ] {
        let areas =
            feasible_areas(&pda, family, &FEASIBLE_IOTAS, 5000, SeedSpec::new(9, 0)).unwrap();
        ok &= areas.windows(2).all(|w| w[1] <= w[0]);
        lines.push(format!(
            "{family:?}: {}",
            areas
                .iter()
                .map(|a| format!("{a:.4}"))
                .collect::<Vec<_>>()
                .join(" ")
        ));
    }
    let msg = lines.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_10() -> Verdict {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let status = Command::new(env!("CARGO_BIN_EXE_ris-sim"))
            .args(["paper-figs", "--seed", "77", "--realizations", "100"])
            .args(["--set", "pixels=400", "--set", "pitch_wavelengths=2"])
            .arg("--out")
            .arg(d.path())
            .output()
            .unwrap();
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
    }
    let list = |d: &tempfile::TempDir| {
        let mut v: Vec<_> = std::fs::read_dir(d.path())
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .collect();
        v.sort();
        v
    };
    let (a, b) = (list(&dirs[0]), list(&dirs[1]));
    if a.len() != b.len() || a.is_empty() {
        return Err(format!("file counts differ: {} vs {}", a.len(), b.len()));
    }
    for (x, y) in a.iter().zip(&b) {
        if x.file_name() != y.file_name() || std::fs::read(x).unwrap() != std::fs::read(y).unwrap()
        {
            return Err(format!("{} differs", x.display()));
        }
    }
    Ok(format!("{} CSV files byte-identical", a.len()))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            title: "closed forms vs oracle",
            limit: Some(Duration::from_secs(60)),
            run: criterion_1,
        },
        Criterion {
            id: 2,
            title: "error-order scaling",
            limit: Some(Duration::from_secs(60)),
            run: criterion_2,
        },
        Criterion {
            id: 3,
            title: "fully coupled composite vs Monte Carlo",
            limit: None,
            run: criterion_3,
        },
        Criterion {
            id: 4,
            title: "convergence in pixel count",
            limit: Some(Duration::from_secs(120)),
            run: criterion_4,
        },
        Criterion {
            id: 5,
            title: "coupling sign and crossover",
            limit: None,
            run: criterion_5,
        },
        Criterion {
            id: 6,
            title: "panel integral vs quadrature",
            limit: Some(Duration::from_secs(30)),
            run: criterion_6,
        },
        Criterion {
            id: 7,
            title: "SE bound chain",
            limit: Some(Duration::from_secs(120)),
            run: criterion_7,
        },
        Criterion {
            id: 8,
            title: "figure shapes at desk scale",
            limit: Some(Duration::from_secs(300)),
            run: criterion_8,
        },
        Criterion {
            id: 9,
            title: "feasible-set area vs correlation",
            limit: None,
            run: criterion_9,
        },
        Criterion {
            id: 10,
            title: "paper-figs determinism",
            limit: None,
            run: criterion_10,
        },
    ];
    let only: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for c in criteria
        .iter()
        .filter(|c| only.is_empty() || only.contains(&c.id))
    {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(m), Some(limit)) if elapsed > limit => {
                Err(format!("{m}; took {elapsed:?}, limit {limit:?}"))
            }
            (o, _) => o,
        };
        let (tag, msg) = match outcome {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!(
            "criterion {:>2} {tag} [{:.1}s] {}: {msg}",
            c.id,
            elapsed.as_secs_f64(),
            c.title
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
