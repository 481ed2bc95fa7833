use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use metisforge::pipeline::{
    cmd_augment, cmd_baseline, cmd_crossval, cmd_mutants, cmd_report, load_mutants, RunConfig, Workspace,
};
use metisforge::Error;

#[derive(Parser)]
#[command(name = "metisforge", version, about = "Evolve test inputs that kill mutated models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Replace existing outputs.
    #[arg(long)]
    force: bool,
    /// Use the full-size search budget instead of the desk-scale one.
    #[arg(long)]
    paper_scale: bool,
    /// Override the search and training base seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the original instances and derive the weak test set.
    Baseline(Common),
    /// Search every operator's configurations and persist generation targets.
    Mutants(Common),
    /// Generate inputs against one or all generation targets.
    Augment {
        #[command(flatten)]
        common: Common,
        /// Operator key, e.g. `TRD` or `TCL3`; all targets when omitted.
        #[arg(long)]
        target: Option<String>,
        /// Guiding mutant instances (1vsM); defaults to the configured m.
        #[arg(long)]
        mutant_instances: Option<usize>,
    },
    /// Leave-one-out fault detection across operators.
    Crossval(Common),
    /// Consolidate augmentation results.
    Report(Common),
}

fn workspace(c: &Common) -> metisforge::Result<Workspace> {
    let mut cfg = RunConfig::load(&c.config)?;
    if c.paper_scale {
        cfg.apply_paper_scale();
    }
    if let Some(seed) = c.seed {
        cfg.override_seed(seed);
    }
    Workspace::open(cfg, c.force)
}

fn run(cli: Cli) -> metisforge::Result<()> {
    match cli.command {
        Command::Baseline(c) => {
            let m = cmd_baseline(&workspace(&c)?)?;
            let mean = m.instances.iter().map(|i| i.test_quality).sum::<f64>() / m.n as f64;
            println!("trained {} originals, mean test quality {mean:.3}, weak set {}/{}", m.n, m.weak_size, m.test_size);
        }
        Command::Mutants(c) => {
            let ws = workspace(&c)?;
            let res = cmd_mutants(&ws);
            if let Ok(s) = load_mutants(&ws) {
                for a in &s.assessments {
                    let target = a.target.as_ref().map_or("-".to_string(), |t| t.to_string());
                    println!("{:<6} weak {:<12} train {:<12} target {target}", a.key, a.weak.summary(), a.train.summary());
                }
            }
            res?;
        }
        Command::Augment { common, target, mutant_instances } => {
            let ws = workspace(&common)?;
            let keys = match target {
                Some(t) => vec![t],
                None => load_mutants(&ws)?.targets().map(|a| a.key.clone()).collect(),
            };
            for key in keys {
                let s = cmd_augment(&ws, &key, mutant_instances)?;
                println!(
                    "{key} {}: K weak {:.3} -> augmented {:.3}, mean archive {:.1} over {} runs",
                    s.config, s.k_weak, s.k_augmented, s.mean_archive_size, s.run_count
                );
            }
        }
        Command::Crossval(c) => {
            for r in cmd_crossval(&workspace(&c)?)? {
                match r.killed {
                    Some(k) => println!("{:<6} inputs {:>7.1} killed {k}/{}", r.mutant, r.inputs.unwrap_or(0.0), r.runs),
                    None => println!("{:<6} skipped (no donor archives)", r.mutant),
                }
            }
        }
        Command::Report(c) => {
            for r in cmd_report(&workspace(&c)?)? {
                println!("{:<6} {:<5} K weak {:.3} -> {:.3}, inputs {:.1}", r.operator, r.config, r.k_weak, r.k, r.mean_inputs);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::NoTargets => 2,
                Error::MissingArtifacts(_) => 3,
                _ => 1,
            })
        }
    }
}
