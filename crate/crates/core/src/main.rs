use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sdreg::data::{synth_generate, write_delimited};
use sdreg::harness::{emit_results, read_records, run_experiment, sign_test, wilcoxon_test, ExperimentConfig, RecordRow};
use sdreg::{Error, Result};

#[derive(Parser)]
#[command(name = "sdreg", version, about = "Stochastic damped regularized L-BFGS experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Run a config with sweep axes overridden from the command line.
    Sweep {
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        batch_sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        memory: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        gamma: Vec<f64>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Paired sign and Wilcoxon tests between two records files.
    TestStats {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        algorithm_a: Option<String>,
        #[arg(long)]
        algorithm_b: Option<String>,
        /// `acc` (higher is better) or `nog` (lower is better).
        #[arg(long, default_value = "acc")]
        metric: String,
    },
    /// Write a synthetic dataset as comma-separated text, label last.
    GenSynth {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run_and_emit(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let records = run_experiment(cfg)?;
    for path in emit_results(&records, cfg, out)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn paired_values(
    a: &[RecordRow],
    b: &[RecordRow],
    alg_a: Option<&str>,
    alg_b: Option<&str>,
    metric: &str,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let pick = |rows: &[RecordRow], alg: Option<&str>| -> Result<Vec<((usize, usize, usize), f64)>> {
        let mut v: Vec<_> = rows
            .iter()
            .filter(|r| r.ok && alg.is_none_or(|a| r.algorithm == a))
            .map(|r| {
                let value = match metric {
                    "acc" => Ok(r.acc),
                    "nog" => Ok(-r.nog),
                    other => Err(Error::InvalidArgument(format!("unknown metric '{other}'"))),
                }?;
                Ok(((r.sweep, r.fold, r.run), value))
            })
            .collect::<Result<_>>()?;
        v.sort_by_key(|(k, _)| *k);
        Ok(v)
    };
    let (va, vb) = (pick(a, alg_a)?, pick(b, alg_b)?);
    if va.len() != vb.len() || va.iter().zip(&vb).any(|(x, y)| x.0 != y.0) {
        return Err(Error::InvalidArgument(
            "records do not pair up by (sweep, fold, run); select one algorithm per side".into(),
        ));
    }
    Ok((va.into_iter().map(|x| x.1).collect(), vb.into_iter().map(|x| x.1).collect()))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out } => run_and_emit(&ExperimentConfig::from_file(&config)?, &out),
        Command::Sweep {
            config,
            batch_sizes,
            memory,
            gamma,
            out,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if !batch_sizes.is_empty() {
                cfg.sweep_batch_sizes = batch_sizes;
            }
            if !memory.is_empty() {
                cfg.sweep_memory = memory;
            }
            if !gamma.is_empty() {
                cfg.sweep_gamma = gamma;
            }
            cfg.validate()?;
            run_and_emit(&cfg, &out)
        }
        Command::TestStats {
            a,
            b,
            algorithm_a,
            algorithm_b,
            metric,
        } => {
            let (ra, rb) = (read_records(&a)?, read_records(&b)?);
            let (va, vb) = paired_values(&ra, &rb, algorithm_a.as_deref(), algorithm_b.as_deref(), &metric)?;
            let wilcoxon = match wilcoxon_test(&va, &vb) {
                Ok(v) => v.to_string(),
                Err(Error::AllTies) => "all_ties".to_string(),
                Err(e) => return Err(e),
            };
            println!("n\tsign_log10_p\twilcoxon_log10_p");
            println!("{}\t{}\t{}", va.len(), sign_test(&va, &vb)?, wilcoxon);
            Ok(())
        }
        Command::GenSynth { n, d, seed, out } => {
            let (ds, theta) = synth_generate(n, d, seed)?;
            write_delimited(&ds, &out, b',')?;
            let line: Vec<String> = theta.iter().map(f64::to_string).collect();
            println!("{}", line.join("\t"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string().replace(['\n', '\t'], " ");
            eprintln!("error\t{}\t{message}", e.kind());
            ExitCode::FAILURE
        }
    }
}
