use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use finsum_bench::{
    certify_experiment, load_config, run_experiment, summarize_report, BenchError, ExperimentReport, OUT_DIR_ENV,
};
use finsum_bounds::analysis::{lower_bound_curve, RateReport};

/// Finite-sum lower-bound certification and solver benchmarks.
#[derive(Parser)]
#[command(name = "finsum-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config and the environment.
        #[arg(long, env = OUT_DIR_ENV)]
        out: Option<PathBuf>,
    },
    /// Run the experiment and replay every run against its finalized instance.
    Certify {
        config: PathBuf,
        #[arg(long, env = OUT_DIR_ENV)]
        out: Option<PathBuf>,
    },
    /// Print the lower-bound rate and the calls needed for accuracy eps.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Summarize a directory written by `run` or `certify`.
    Report { dir: PathBuf },
}

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { EXIT_USAGE } else { EXIT_FAIL })
        }
    }
}

fn dispatch(command: Command) -> Result<bool, BenchError> {
    match command {
        Command::Run { config, out } => {
            let config = load_config(&config, out)?;
            let report = run_experiment(&config)?;
            print_report(&report);
            Ok(report.rollup.passed)
        }
        Command::Certify { config, out } => {
            let config = load_config(&config, out)?;
            let report = certify_experiment(&config)?;
            print_report(&report);
            Ok(report.rollup.passed)
        }
        Command::Bounds {
            n,
            kappa,
            eps,
            gamma,
            json,
        } => {
            let rate = RateReport::new(kappa, n, gamma, eps)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&rate).expect("rate serializes"));
            } else {
                let at = lower_bound_curve(gamma, kappa, n, rate.k_min_exact)?;
                println!("n = {n}, kappa = {kappa}, kappa_c = {}", rate.kappa_c);
                println!("q = {} (ln q = {})", rate.q, rate.log_q);
                println!("calls for relative error {eps}: {} (closed form {})", rate.k_min_exact, rate.k_min_asymptotic);
                println!("bound at {} calls: {:e} (ln {})", rate.k_min_exact, at.value, at.log_value);
            }
            Ok(true)
        }
        Command::Report { dir } => {
            let (text, passed) = summarize_report(&dir)?;
            print!("{text}");
            Ok(passed)
        }
    }
}

fn print_report(report: &ExperimentReport) {
    let out = &report.config.output_dir;
    for r in &report.runs {
        let err = r.final_rel_error.map(|e| format!("{e:.6e}")).unwrap_or_else(|| "-".into());
        let status = r
            .certificate
            .as_ref()
            .map(|c| serde_json::to_value(c.status).expect("status serializes"))
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_else(|| "-".into());
        let replay = match r.certificate.as_ref().and_then(|c| c.replay_verified) {
            Some(true) => " replay=ok",
            Some(false) => " replay=DIVERGED",
            None => "",
        };
        println!("{:<14} calls={:<8} rel_error={err:<14} certificate={status}{replay}", r.label, r.calls);
    }
    if let Some(c) = &report.complexity {
        print!("{}", c.to_table());
    }
    let r = &report.rollup;
    println!(
        "rollup: {} ({} certificates, {} asserted, {} failed, {} not asserted); output in {}",
        if r.passed { "pass" } else { "FAIL" },
        r.certificates,
        r.asserted,
        r.failed.len(),
        r.not_asserted.len(),
        out.display()
    );
}
