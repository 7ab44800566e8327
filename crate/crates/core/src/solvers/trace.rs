use std::io::{self, Write};
use std::time::Instant;

use serde::Serialize;

use crate::analysis::lower_bound_curve;
use crate::error::Result;
use crate::numkernel::Point;
use crate::problems::FiniteSumProblem;
use crate::scalar::Scalar;

/// One measurement point of a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceSample {
    pub k_calls: usize,
    /// `||x - x*|| / ||x*||`, filled once `x*` is known.
    pub rel_error: Option<f64>,
    pub obj: Option<f64>,
    /// Relative lower bound `q^{2t}`, filled for hard instances.
    pub lower_bound: Option<f64>,
    pub log_lower_bound: Option<f64>,
    pub wall_ns: u64,
}

/// Samples of a run plus the iterates they were taken at.
#[derive(Clone, Debug)]
pub struct RunTrace<T> {
    pub algo: String,
    pub seed: Option<u64>,
    pub samples: Vec<TraceSample>,
    /// Iterate at each sample, aligned with `samples`.
    pub iterates: Vec<Point<T>>,
    pub output: Point<T>,
    pub calls: usize,
}

impl<T: Scalar> RunTrace<T> {
    /// Fills errors and objective values from a problem with known minimizer.
    pub fn fill_errors(&mut self, problem: &FiniteSumProblem<T>) -> Result<()> {
        let x_star = problem.minimizer().cloned();
        let star_norm = x_star.as_ref().map(|s| s.norm().to_f64_lossy());
        for (s, x) in self.samples.iter_mut().zip(&self.iterates) {
            if let (Some(xs), Some(nrm)) = (&x_star, star_norm) {
                s.rel_error = Some(x.distance(xs).to_f64_lossy() / nrm);
            }
            s.obj = Some(problem.value(x)?.to_f64_lossy());
        }
        Ok(())
    }

    /// Fills the relative lower-bound curve `q^{2K/n}` for condition number `kappa`.
    pub fn fill_lower_bound(&mut self, kappa: f64, n: usize) -> Result<()> {
        for s in &mut self.samples {
            let b = lower_bound_curve(1.0, kappa, n, s.k_calls)?;
            s.lower_bound = Some(b.value);
            s.log_lower_bound = Some(b.log_value);
        }
        Ok(())
    }

    pub fn final_rel_error(&self) -> Option<f64> {
        self.samples.last().and_then(|s| s.rel_error)
    }

    /// First sampled call count with relative error at most `eps`.
    pub fn calls_to_reach(&self, eps: f64) -> Option<usize> {
        self.samples
            .iter()
            .find(|s| s.rel_error.is_some_and(|e| e <= eps))
            .map(|s| s.k_calls)
    }

    /// Least-squares slope of `ln(rel_error)` against `ln(K)` over samples
    /// with `K >= from_calls` and a positive error.
    pub fn loglog_slope(&self, from_calls: usize) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .samples
            .iter()
            .filter(|s| s.k_calls >= from_calls.max(1))
            .filter_map(|s| s.rel_error.filter(|&e| e > 0.0).map(|e| ((s.k_calls as f64).ln(), e.ln())))
            .collect();
        least_squares_slope(&pts)
    }

    /// Least-squares slope of `ln(rel_error)` against `K`.
    pub fn log_linear_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .samples
            .iter()
            .filter_map(|s| s.rel_error.filter(|&e| e > 0.0).map(|e| (s.k_calls as f64, e.ln())))
            .collect();
        least_squares_slope(&pts)
    }

    pub const CSV_HEADER: &'static str = "algo,seed,k_calls,rel_error,obj,lower_bound,log_lower_bound,wall_ns";

    /// Rows in the `CSV_HEADER` layout; missing values are empty fields.
    pub fn write_csv_rows<W: Write>(&self, mut out: W) -> io::Result<()> {
        let opt = |v: Option<f64>| v.map(|v| format!("{v:e}")).unwrap_or_default();
        let seed = self.seed.map(|s| s.to_string()).unwrap_or_default();
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.algo,
                seed,
                s.k_calls,
                opt(s.rel_error),
                opt(s.obj),
                opt(s.lower_bound),
                opt(s.log_lower_bound),
                s.wall_ns
            )?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        self.write_csv_rows(out)
    }
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Snapshots iterates every `interval` calls.
pub(crate) struct Recorder<T> {
    interval: usize,
    next: usize,
    start: Instant,
    samples: Vec<TraceSample>,
    iterates: Vec<Point<T>>,
}

impl<T: Scalar> Recorder<T> {
    pub(crate) fn new(interval: usize) -> Self {
        Self {
            interval: interval.max(1),
            next: 0,
            start: Instant::now(),
            samples: Vec::new(),
            iterates: Vec::new(),
        }
    }

    fn push(&mut self, calls: usize, x: &Point<T>) {
        if self.samples.last().is_some_and(|s| s.k_calls >= calls) {
            return;
        }
        self.samples.push(TraceSample {
            k_calls: calls,
            rel_error: None,
            obj: None,
            lower_bound: None,
            log_lower_bound: None,
            wall_ns: self.start.elapsed().as_nanos() as u64,
        });
        self.iterates.push(x.clone());
    }

    pub(crate) fn observe(&mut self, calls: usize, x: &Point<T>) {
        if calls >= self.next {
            self.push(calls, x);
            self.next = calls + self.interval;
        }
    }

    pub(crate) fn finish(mut self, algo: &str, seed: Option<u64>, calls: usize, x: Point<T>) -> RunTrace<T> {
        self.push(calls, &x);
        RunTrace {
            algo: algo.to_string(),
            seed,
            samples: self.samples,
            iterates: self.iterates,
            output: x,
            calls,
        }
    }
}
