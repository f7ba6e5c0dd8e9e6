//! `els`: runs one experiment scenario from a JSON config.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 failed acceptance check (with `--check`).

mod config;
mod output;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use els_core::continuum::GridPreset;
use serde_json::json;

use config::ExperimentConfig;
use output::{json_text, write_file, DirLock, SCHEMA};
use scenarios::{Context, Failure};

#[derive(Debug, Parser)]
#[command(name = "els", version, about = "Edge-like dark state experiments on optical ribbons")]
struct Args {
    /// Experiment config (JSON).
    config: PathBuf,
    /// Evaluate the scenario's acceptance assertions.
    #[arg(long)]
    check: bool,
    /// Directory for outputs and the manifest.
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
    /// Grid resolution for continuum work.
    #[arg(long, default_value = "fast")]
    grid_preset: GridPreset,
    /// Worker threads for sweeps.
    #[arg(long)]
    threads: Option<usize>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_CHECK: u8 = 4;

fn fail(code: u8, err: anyhow::Error) -> ExitCode {
    eprintln!("error: {err:#}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = match ExperimentConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    if let Some(n) = args.threads {
        if n == 0 {
            return fail(EXIT_CONFIG, anyhow::anyhow!("--threads must be positive"));
        }
        if let Err(e) = els_core::exec::set_threads(n) {
            return fail(EXIT_CONFIG, anyhow::anyhow!(e));
        }
    }
    let _lock = match DirLock::acquire(&args.output_dir) {
        Ok(l) => l,
        Err(e) => return fail(EXIT_CONFIG, e),
    };

    let ctx = Context { preset: args.grid_preset, check: args.check };
    let run = match scenarios::run(&cfg, &ctx) {
        Ok(r) => r,
        Err(Failure::Config(e)) => return fail(EXIT_CONFIG, e),
        Err(Failure::Numerical(e)) => return fail(EXIT_NUMERICAL, e),
    };

    let mut files: Vec<String> = run.files.iter().map(|(name, _)| name.clone()).collect();
    let mut write_all = || -> anyhow::Result<()> {
        for (name, contents) in &run.files {
            write_file(&args.output_dir, name, contents)?;
        }
        if args.check {
            write_file(&args.output_dir, "check.json", &json_text(&serde_json::to_value(&run.checks)?))?;
            files.push("check.json".into());
        }
        let manifest = json!({
            "schema": SCHEMA,
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "scenario": cfg.scenario,
            "parameters": run.resolved,
            "seed": cfg.seed,
            "grid_preset": if cfg.scenario.uses_grid() { Some(args.grid_preset) } else { None },
            "check": args.check,
            "outputs": files,
        });
        write_file(&args.output_dir, "manifest.json", &json_text(&manifest))
    };
    if let Err(e) = write_all() {
        return fail(EXIT_NUMERICAL, e);
    }

    if !args.check {
        return ExitCode::SUCCESS;
    }
    let mut failed = 0;
    for a in &run.checks {
        println!(
            "{} {}: measured {:.6e} {} {:.6e}",
            if a.pass { "PASS" } else { "FAIL" },
            a.name,
            a.measured,
            a.relation,
            a.threshold
        );
        failed += usize::from(!a.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        eprintln!("{failed} of {} checks failed", run.checks.len());
        ExitCode::from(EXIT_CHECK)
    }
}
