use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ris_core::se_bounds::SweepAxis;
use ris_sim::config::{
    apply_settings, default_move_x_grid, default_move_z_grid, parse_case, parse_overrides,
    CONVERGENCE_GRID,
};
use ris_sim::{default_config, load_config, run, Experiment, ExperimentConfig, SimError};
use serde_json::Value;

#[derive(Parser)]
#[command(
    name = "ris-sim",
    version,
    about = "Remaining-power and spectral-efficiency experiments for RIS pixels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML or JSON configuration applied on top of the reference setup.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Pixel radiation pattern.
    #[arg(long, global = true, value_parser = ["cosine", "isotropic"])]
    pattern: Option<String>,
    /// Monte Carlo realizations.
    #[arg(long, global = true)]
    realizations: Option<usize>,
    /// Γ source for SE computations: a closed-form id such as 3.10, or "oracle".
    #[arg(long, global = true)]
    source: Option<String>,
    /// Uniform half-width τ.
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// von Mises concentration κ.
    #[arg(long, global = true)]
    kappa: Option<f64>,
    /// Correlation ι between amplitude and phase errors.
    #[arg(long, global = true)]
    iota: Option<f64>,
    /// Any configuration key, as key=value; repeatable.
    #[arg(long = "set", global = true)]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// β(φ) curves and the circuit fit.
    PdaCurve,
    /// Feasible-set loci and areas.
    FeasibleSet,
    /// Γ from the closed form, the quadrature oracle and Monte Carlo.
    Rp {
        /// I, II, III or IV.
        #[arg(long)]
        case: Option<String>,
        /// Constant amplitude for case I.
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Closed-form id, e.g. 3.5; selects the error family and ι it assumes.
        #[arg(long)]
        prop: Option<String>,
        /// Single phase; omitted evaluates the reference phases.
        #[arg(long, allow_hyphen_values = true)]
        phi: Option<f64>,
        /// Pixels per Monte Carlo surface.
        #[arg(long, default_value_t = 1)]
        pixels: usize,
    },
    /// Γ_M against pixel count.
    Converge {
        #[arg(long, value_delimiter = ',')]
        m_grid: Option<Vec<usize>>,
        #[arg(long, default_value_t = 100)]
        surfaces: usize,
    },
    /// Per-pixel geometry and heatmaps.
    Channel,
    /// The SE bound chain at one deployment.
    Se,
    /// SE along one parameter axis.
    Sweep {
        /// x_ris, z_ris, pixel_pitch, iota, a, b, c, tau or kappa.
        #[arg(long)]
        axis: String,
        /// Comma-separated values; defaults exist for x_ris and z_ris.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Option<Vec<f64>>,
    },
    /// Every figure table.
    PaperFigs,
    /// Fixed deployment tables only.
    FixedRis,
    /// Whatever experiment the configuration names.
    Run,
}

fn build(cli: &Cli) -> Result<ExperimentConfig, SimError> {
    let c = &cli.common;
    let mut cfg = match &c.config {
        Some(p) => load_config(p)?,
        None => default_config(),
    };
    let mut pairs: Vec<(String, Value)> = Vec::new();
    let mut put = |k: &str, v: Value| pairs.push((k.to_string(), v));
    if let Some(s) = c.seed {
        put("seed.master", s.into());
    }
    if let Some(o) = &c.out {
        put("output.dir", o.to_string_lossy().into_owned().into());
    }
    if let Some(p) = &c.pattern {
        put("scenario.pattern", p.clone().into());
    }
    if let Some(r) = c.realizations {
        put("run.realizations", r.into());
    }
    if let Some(s) = &c.source {
        put("run.gamma_source", s.clone().into());
    }
    if let Some(t) = c.tau {
        put("noise.tau", t.into());
    }
    if let Some(k) = c.kappa {
        put("noise.kappa", k.into());
    }
    if let Some(i) = c.iota {
        put("noise.iota", i.into());
    }
    pairs.extend(parse_overrides(&c.set)?);
    apply_settings(&mut cfg, pairs)?;

    let bad = |e: String| SimError::Config(vec![e]);
    cfg.experiment = match &cli.command {
        Command::Run => cfg.experiment.clone(),
        Command::PdaCurve => Experiment::PdaCurve,
        Command::FeasibleSet => Experiment::FeasibleSet,
        Command::Rp {
            case,
            beta,
            prop,
            phi,
            pixels,
        } => Experiment::RpValidate {
            prop: prop.as_deref().map(str::parse).transpose()?,
            case: case
                .as_deref()
                .map(|s| parse_case(s, *beta))
                .transpose()
                .map_err(bad)?,
            phi: *phi,
            pixels: *pixels,
        },
        Command::Converge { m_grid, surfaces } => Experiment::Convergence {
            m_grid: m_grid.clone().unwrap_or_else(|| CONVERGENCE_GRID.to_vec()),
            realizations: *surfaces,
        },
        Command::Channel => Experiment::Channel,
        Command::Se => Experiment::Se,
        Command::Sweep { axis, grid } => {
            let axis: SweepAxis = axis.parse()?;
            match (axis, grid.clone()) {
                (SweepAxis::XRis, None) => Experiment::MoveX {
                    grid: default_move_x_grid(),
                },
                (SweepAxis::ZRis, None) => Experiment::MoveZ {
                    grid: default_move_z_grid(),
                },
                (_, None) => return Err(bad(format!("--grid is required for axis {axis}"))),
                (axis, Some(grid)) => Experiment::ParamSweep { axis, grid },
            }
        }
        Command::PaperFigs => Experiment::PaperFigs,
        Command::FixedRis => Experiment::FixedRis,
    };
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build(&cli).and_then(|cfg| run(&cfg));
    match result {
        Ok(m) => {
            for f in &m.files {
                println!("{}", m.output_dir.join(&f.name).display());
            }
            println!("{}", m.output_dir.join("manifest.json").display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
