use std::process::ExitCode;

use clap::Parser;
use scd_contact::{
    run_experiment, CliArgs, ExperimentConfig, EXIT_CONFIG_ERROR, EXIT_SOLVER_FAILURE,
};

fn main() -> ExitCode {
    let args = CliArgs::parse();
    let cfg = match ExperimentConfig::resolve(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG_ERROR as u8);
        }
    };
    let out = match run_experiment(&cfg) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG_ERROR as u8);
        }
    };
    if let Err(e) = out.write(&cfg.out_dir) {
        eprintln!("error: writing {}: {e}", cfg.out_dir.display());
        return ExitCode::from(EXIT_CONFIG_ERROR as u8);
    }
    let tr = out.trace();
    println!(
        "{}: n={} p={} it={} gmres={} reduction={:.2e} ({:.2}s)",
        cfg.label(),
        out.model.dim(),
        out.model.contact_count,
        tr.iterations(),
        tr.total_inner_iters(),
        tr.reduction(),
        out.timings.assemble_s + out.timings.solve_s
    );
    match &out.result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("solver failed: {e}");
            ExitCode::from(EXIT_SOLVER_FAILURE as u8)
        }
    }
}
