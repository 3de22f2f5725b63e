//! Experiment driver for the `ris-core` models: configuration, figure-data
//! tables and reproducible CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::time::Instant;

pub use config::{default_config, load_config, Experiment, ExperimentConfig};
pub use error::SimError;
pub use output::{Manifest, Table};

/// Computes the tables of `cfg.experiment` without writing anything.
pub fn tables(cfg: &ExperimentConfig) -> Result<Vec<Table>, SimError> {
    cfg.validate()?;
    use experiments as ex;
    match &cfg.experiment {
        Experiment::PdaCurve => ex::pda_curve(cfg),
        Experiment::FeasibleSet => ex::feasible(cfg),
        Experiment::RpValidate {
            prop,
            case,
            phi,
            pixels,
        } => ex::rp_validate(cfg, *prop, *case, *phi, *pixels),
        Experiment::Convergence {
            m_grid,
            realizations,
        } => ex::convergence(cfg, m_grid, *realizations),
        Experiment::Channel => ex::channel(cfg, "channel"),
        Experiment::Se => ex::se(cfg),
        Experiment::FixedRis => ex::fixed_ris(cfg),
        Experiment::MoveX { grid } => ex::move_x(cfg, grid),
        Experiment::MoveZ { grid } => ex::move_z(cfg, grid, "move_z_se"),
        Experiment::ParamSweep { axis, grid } => {
            ex::sweep(cfg, *axis, grid, &format!("sweep_{axis}"))
        }
        Experiment::PaperFigs => ex::paper_figs(cfg),
    }
}

/// Runs the experiment and writes its CSV tables plus `manifest.json` into
/// `cfg.output_dir`.
pub fn run(cfg: &ExperimentConfig) -> Result<Manifest, SimError> {
    let start = Instant::now();
    let tables = tables(cfg)?;
    let files = output::write_tables(&cfg.output_dir, &tables)?;
    let manifest = Manifest {
        schema: output::SCHEMA,
        experiment: cfg.experiment.name().to_string(),
        config_hash: output::config_hash(cfg),
        seed: cfg.seed,
        git_describe: output::git_describe(),
        wall_time_s: start.elapsed().as_secs_f64(),
        output_dir: cfg.output_dir.clone(),
        files,
    };
    output::write_manifest(&cfg.output_dir, &manifest)?;
    Ok(manifest)
}
