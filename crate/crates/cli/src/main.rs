use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use fraclab_cli::output::{write_manifest, write_outcome, RunManifest, Stage};
use fraclab_cli::{execute, Command, ConfigInvalid, ExperimentConfig, RunContext, RunError};

/// Exit status: 0 all ledgers pass, 1 some ledger fails, 2 invalid config,
/// 3 numerical or I/O failure.
#[derive(Parser, Debug)]
#[command(name = "fraclab", version, about = "Numerical laboratory for the fractional Laplacian")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment config; `suite` runs with defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory (default: the config's `out_dir`, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(path: &Option<PathBuf>) -> Result<ExperimentConfig, ConfigInvalid> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigInvalid(format!("cannot read {}: {e}", p.display())))?;
            ExperimentConfig::from_json(&text)
        }
        None => Ok(ExperimentConfig::default()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let ctx = RunContext::resolve(&cfg, cli.seed, cli.workers);
    let out = cli.out.clone().or(cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let mut manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cli.command,
        config: cfg.clone(),
        seed: ctx.seed,
        workers: ctx.workers,
        stages: Vec::new(),
        outputs: Vec::new(),
        pass: None,
        error: None,
    };

    let t = Instant::now();
    let result = execute(cli.command, &cfg, ctx);
    manifest.stages.push(Stage { name: "run".into(), seconds: t.elapsed().as_secs_f64() });
    let code = match result {
        Ok(outcome) => {
            manifest.stages.extend(outcome.stages.iter().cloned());
            let t = Instant::now();
            let written = write_outcome(&out, &outcome);
            manifest.stages.push(Stage { name: "write".into(), seconds: t.elapsed().as_secs_f64() });
            match written {
                Ok(files) => {
                    manifest.outputs = files;
                    manifest.pass = Some(outcome.pass);
                    println!("{}: {}", cli.command, if outcome.pass { "pass" } else { "FAIL" });
                    u8::from(!outcome.pass)
                }
                Err(e) => {
                    manifest.error = Some(format!("writing outputs: {e}"));
                    eprintln!("cannot write outputs to {}: {e}", out.display());
                    3
                }
            }
        }
        Err(e) => {
            eprintln!("{e}");
            manifest.error = Some(e.to_string());
            match e {
                RunError::Config(_) => 2,
                RunError::Numerical(_) => 3,
            }
        }
    };
    match write_manifest(&out, &manifest) {
        Ok(p) => eprintln!("manifest: {}", p.display()),
        Err(e) => eprintln!("cannot write manifest: {e}"),
    }
    ExitCode::from(code)
}
