//! Builds the instance named by a config, runs every solver on its own
//! oracle in parallel and writes traces, certificates and the report.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use finsum_bounds::analysis::{
    concentration_check, empirical_spectrum, rate_q, regime_table, ComplexityReport, ConcentrationCheck,
    ProblemStats, RateReport, Spectrum,
};
use finsum_bounds::oracle::{transcript_replay_check, CertificateStatus, CertificateSummary, Ifo, ResistingIfo};
use finsum_bounds::problems::{build_hard_instance, guarded_dim, sample_sphere_dataset, FiniteSumProblem};
use finsum_bounds::solvers::{run, RunTrace, SolverKind};
use finsum_bounds::Error as CoreError;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind, SolverSpec};
use crate::BenchError;

/// Summary of one solver run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub label: String,
    pub algo: SolverKind,
    pub seed: Option<u64>,
    pub deterministic: bool,
    pub budget: usize,
    pub calls: usize,
    pub final_rel_error: Option<f64>,
    pub final_log_lower_bound: Option<f64>,
    /// First sampled call count with relative error at most `eps`.
    pub calls_to_eps: Option<usize>,
    pub passes_to_eps: Option<f64>,
    pub loglog_slope: Option<f64>,
    pub log_linear_slope: Option<f64>,
    pub trace_file: PathBuf,
    pub certificate_file: Option<PathBuf>,
    pub certificate: Option<CertificateSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rollup {
    pub passed: bool,
    pub certificates: usize,
    pub asserted: usize,
    pub failed: Vec<String>,
    pub not_asserted: Vec<String>,
    /// Runs whose replay did not reproduce the adversarial transcript.
    pub replay_failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rate: RateReport,
    pub spectrum: Option<Spectrum>,
    pub complexity: Option<ComplexityReport>,
    pub concentration: Option<ConcentrationCheck>,
    pub runs: Vec<RunSummary>,
    pub rollup: Rollup,
}

/// The objective a run is measured on.
enum Instance {
    Static(FiniteSumProblem<f64>),
    Resisting { mu: f64, l: f64, gamma: f64, dim: usize, n: usize },
    None,
}

struct RunJob<'a> {
    spec: &'a SolverSpec,
    seed: Option<u64>,
    label: String,
}

struct RunResult {
    trace: RunTrace<f64>,
    certificate: Option<(CertificateSummary, String)>,
}

/// Runs the experiment and writes its artifacts under `config.output_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, BenchError> {
    execute(config, false)
}

/// Like [`run_experiment`], additionally replaying every run against its
/// finalized adversarial instance and recording whether the transcript is
/// reproduced bit for bit.
pub fn certify_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, BenchError> {
    execute(config, true)
}

fn execute(config: &ExperimentConfig, replay: bool) -> Result<ExperimentReport, BenchError> {
    let inst = &config.instance;
    let n = inst.n;
    let mut spectrum = None;
    let mut complexity = None;
    let mut concentration = None;
    let (instance, mu, l) = match config.kind {
        ExperimentKind::HardStatic => {
            let (mu, l) = (inst.mu, inst.l.expect("validated"));
            let p = build_hard_instance(n, mu, l, inst.gamma, inst.dim).map_err(sizing)?;
            (Instance::Static(p), mu, l)
        }
        ExperimentKind::ResistSingle | ExperimentKind::ResistIfo => {
            let (mu, l) = (inst.mu, inst.l.expect("validated"));
            let r = Instance::Resisting {
                mu,
                l,
                gamma: inst.gamma,
                dim: inst.dim,
                n,
            };
            (r, mu, l)
        }
        ExperimentKind::Rls | ExperimentKind::BoundsTable => {
            let ds = sample_sphere_dataset(n, inst.d, inst.radius, inst.mu, inst.noise, inst.data_seed)?;
            let spec = empirical_spectrum(&ds)?;
            let l = ds.smoothness();
            complexity = Some(regime_table(ProblemStats {
                n,
                mu: inst.mu,
                l,
                mu_f: spec.mu_f,
                l_f: spec.l_f,
            })?);
            concentration = Some(concentration_check(inst.d, n, inst.delta, 1.0, 1.0, spec.kappa_f));
            spectrum = Some(spec);
            let p = if config.solvers.is_empty() {
                Instance::None
            } else {
                Instance::Static(ds.to_problem()?)
            };
            (p, inst.mu, l)
        }
    };
    let kappa = l / mu;
    let rate = RateReport::new(kappa, n, inst.gamma, inst.eps)?;

    let jobs: Vec<RunJob> = config
        .solvers
        .iter()
        .flat_map(|spec| {
            spec.run_seeds().into_iter().map(move |seed| RunJob {
                spec,
                seed,
                label: match seed {
                    Some(s) => format!("{}-seed{s}", spec.kind),
                    None => spec.kind.to_string(),
                },
            })
        })
        .collect();

    let results: Vec<Result<RunResult, BenchError>> = jobs
        .par_iter()
        .map(|job| run_one(job, &instance, kappa, n, replay, config))
        .collect();

    let out = &config.output_dir;
    let traces_dir = out.join("traces");
    fs::create_dir_all(&traces_dir).map_err(|e| BenchError::io(&traces_dir, e))?;
    let mut runs = Vec::with_capacity(jobs.len());
    for (job, result) in jobs.iter().zip(results) {
        let result = result?;
        let trace_file = PathBuf::from("traces").join(format!("{}.csv", job.label));
        write_file(&out.join(&trace_file), |w| result.trace.write_csv(w))?;
        let mut certificate_file = None;
        let mut certificate = None;
        if let Some((summary, json)) = result.certificate {
            let dir = out.join("certificates");
            fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;
            let rel = PathBuf::from("certificates").join(format!("{}.json", job.label));
            let path = out.join(&rel);
            fs::write(&path, json + "\n").map_err(|e| BenchError::io(&path, e))?;
            certificate_file = Some(rel);
            certificate = Some(summary);
        }
        let t = &result.trace;
        let calls_to_eps = t.calls_to_reach(inst.eps);
        runs.push(RunSummary {
            label: job.label.clone(),
            algo: job.spec.kind,
            seed: job.seed,
            deterministic: job.spec.kind.is_deterministic(),
            budget: job.spec.budget,
            calls: t.calls,
            final_rel_error: t.final_rel_error(),
            final_log_lower_bound: t.samples.last().and_then(|s| s.log_lower_bound),
            calls_to_eps,
            passes_to_eps: calls_to_eps.map(|k| k as f64 / n as f64),
            loglog_slope: t.loglog_slope(n),
            log_linear_slope: t.log_linear_slope(),
            trace_file,
            certificate_file,
            certificate,
        });
    }

    if let Some(c) = &complexity {
        let path = out.join("complexity.txt");
        fs::write(&path, c.to_table()).map_err(|e| BenchError::io(&path, e))?;
    }
    let rollup = rollup(&runs);
    let report = ExperimentReport {
        config: config.clone(),
        rate,
        spectrum,
        complexity,
        concentration,
        runs,
        rollup,
    };
    let path = out.join("report.json");
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    fs::write(&path, json + "\n").map_err(|e| BenchError::io(&path, e))?;
    Ok(report)
}

fn run_one(
    job: &RunJob,
    instance: &Instance,
    kappa: f64,
    n: usize,
    replay: bool,
    config: &ExperimentConfig,
) -> Result<RunResult, BenchError> {
    let cfg = job.spec.solver_config(job.seed);
    match instance {
        Instance::Static(p) => {
            let mut ifo = Ifo::new(p);
            let mut trace = run(&cfg, &mut ifo)?;
            trace.fill_errors(p)?;
            trace.fill_lower_bound(kappa, n)?;
            Ok(RunResult {
                trace,
                certificate: None,
            })
        }
        Instance::Resisting { mu, l, gamma, dim, n } => {
            let adversary = ResistingIfo::new(*n, *mu, *l, *gamma, *dim, cfg.budget).map_err(sizing)?;
            let mut ifo = Ifo::new(adversary);
            let mut trace = run(&cfg, &mut ifo).map_err(|e| match e {
                CoreError::Capacity { .. } => capacity(e, job, config),
                e => e.into(),
            })?;
            let (adversary, transcript) = ifo.into_parts();
            let mut cert = adversary.finalize(&trace.output)?;
            cert.assess(cfg.is_deterministic());
            if replay {
                let outcome = transcript_replay_check(|ifo| run(&cfg, ifo).map(|t| t.output), &cert, &transcript)?;
                cert.record_replay(&outcome);
            }
            trace.fill_errors(&cert.problem)?;
            trace.fill_lower_bound(kappa, *n)?;
            Ok(RunResult {
                trace,
                certificate: Some((cert.summary.clone(), cert.to_json())),
            })
        }
        Instance::None => unreachable!("no runs without an instance"),
    }
}

/// Dimension per component that covers any allocation of `budget` calls.
fn safe_dim(config: &ExperimentConfig, budget: usize) -> Option<usize> {
    let l = config.instance.l?;
    let q = rate_q(l / config.instance.mu, config.instance.n).ok()?;
    Some(guarded_dim(q) + 2 * budget + 2)
}

fn capacity(e: CoreError, job: &RunJob, config: &ExperimentConfig) -> BenchError {
    let advice = match safe_dim(config, job.spec.budget) {
        Some(d) => format!(
            "solver {} needs more room; set instance.dim >= {d} (enough for any allocation of {} calls)",
            job.label, job.spec.budget
        ),
        None => format!("solver {} needs a larger instance.dim", job.label),
    };
    BenchError::Capacity { source: e, advice }
}

fn sizing(e: CoreError) -> BenchError {
    match e {
        CoreError::DimensionTooSmall { required, .. } | CoreError::Capacity { required, .. } => {
            BenchError::Capacity {
                advice: format!("set instance.dim >= {required}"),
                source: e,
            }
        }
        e => e.into(),
    }
}

fn rollup(runs: &[RunSummary]) -> Rollup {
    let mut r = Rollup {
        passed: true,
        certificates: 0,
        asserted: 0,
        failed: Vec::new(),
        not_asserted: Vec::new(),
        replay_failures: Vec::new(),
    };
    for run in runs {
        let Some(c) = &run.certificate else { continue };
        r.certificates += 1;
        match c.status {
            CertificateStatus::Pass => r.asserted += 1,
            CertificateStatus::Fail => {
                r.asserted += 1;
                r.failed.push(run.label.clone());
            }
            CertificateStatus::NotAsserted => r.not_asserted.push(run.label.clone()),
        }
        if c.replay_verified == Some(false) {
            r.replay_failures.push(run.label.clone());
            if run.deterministic && c.status == CertificateStatus::Pass {
                r.failed.push(run.label.clone());
            }
        }
    }
    r.passed = r.failed.is_empty();
    r
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>) -> Result<(), BenchError> {
    let file = fs::File::create(path).map_err(|e| BenchError::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).map_err(|e| BenchError::io(path, e))?;
    std::io::Write::flush(&mut w).map_err(|e| BenchError::io(path, e))
}
