//! Command-line driver: load a config, apply flag overrides, run a pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use polariton_probe::cli::{
    experiments, parse_config, ExperimentConfig, ExperimentKind, Normalization,
};

#[derive(Parser, Debug)]
#[command(
    name = "polariton-probe",
    about = "Free-electron probing of a strongly coupled nanocavity + emitter target: \
             EELS, CL and PINEM observables, modulated-beam control, validation suite",
    version
)]
struct Args {
    /// Config file (line-oriented key = value with [section] headers).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Experiment: fig2 | fig3 | fig4 | fig5 | fig6 | custom | validate.
    #[arg(long)]
    experiment: Option<String>,

    /// Output directory (overrides the config's [output] dir).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    threads: Option<usize>,

    /// Truncation caps, e.g. "nz=2,N=4".
    #[arg(long)]
    caps: Option<String>,

    /// Spectrum normalization: raw | i0.
    #[arg(long)]
    normalization: Option<String>,
}

fn apply_overrides(cfg: &mut ExperimentConfig, args: &Args) -> Result<(), String> {
    if let Some(kind) = &args.experiment {
        cfg.kind =
            ExperimentKind::parse(kind).ok_or_else(|| format!("unknown experiment '{kind}'"))?;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    if let Some(norm) = &args.normalization {
        cfg.normalization = match norm.as_str() {
            "raw" => Normalization::Raw,
            "i0" => Normalization::I0,
            other => return Err(format!("normalization must be raw or i0, got '{other}'")),
        };
    }
    if let Some(caps) = &args.caps {
        for part in caps.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| format!("caps: expected nz=..,N=.., got '{caps}'"))?;
            let v: u32 = v
                .trim()
                .parse()
                .map_err(|_| format!("caps: bad value '{v}'"))?;
            match k.trim() {
                "nz" => cfg.n_z_max = v,
                "N" => cfg.manifold_max = v,
                other => return Err(format!("caps: unknown field '{other}'")),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();

    let mut cfg = match &args.config {
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            };
            match parse_config(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
        }
        None => ExperimentConfig::default(),
    };
    if let Err(msg) = apply_overrides(&mut cfg, &args) {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }

    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: thread pool: {e}");
        }
    }

    match experiments::run(&cfg) {
        Ok(report) => {
            for check in &report.checks {
                println!(
                    "[{}] {}: {}",
                    if check.passed { "pass" } else { "FAIL" },
                    check.name,
                    check.detail
                );
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                eprintln!(
                    "error: {} check(s) failed",
                    report.checks.iter().filter(|c| !c.passed).count()
                );
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
