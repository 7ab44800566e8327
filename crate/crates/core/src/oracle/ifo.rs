use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::numkernel::Point;
use crate::problems::FiniteSumProblem;
use crate::scalar::Scalar;

/// Source of component answers behind an IFO: a fixed problem or an adversary.
///
/// Only `(n, mu, L)` are public; everything else about `f` must go through
/// [`evaluate`](Self::evaluate).
pub trait ComponentOracle<T: Scalar> {
    fn n(&self) -> usize;
    fn dim(&self) -> usize;
    fn mu(&self) -> T;
    /// Component smoothness bound `L`.
    fn smoothness(&self) -> T;
    /// `(g_i(x), g_i'(x))` for the 0-based component `i`.
    fn evaluate(&mut self, i: usize, x: &Point<T>) -> Result<(T, Point<T>)>;
}

impl<T: Scalar> ComponentOracle<T> for FiniteSumProblem<T> {
    fn n(&self) -> usize {
        FiniteSumProblem::n(self)
    }
    fn dim(&self) -> usize {
        FiniteSumProblem::dim(self)
    }
    fn mu(&self) -> T {
        FiniteSumProblem::mu(self)
    }
    fn smoothness(&self) -> T {
        self.l()
    }
    fn evaluate(&mut self, i: usize, x: &Point<T>) -> Result<(T, Point<T>)> {
        self.component(i, x)
    }
}

impl<T: Scalar> ComponentOracle<T> for &FiniteSumProblem<T> {
    fn n(&self) -> usize {
        FiniteSumProblem::n(self)
    }
    fn dim(&self) -> usize {
        FiniteSumProblem::dim(self)
    }
    fn mu(&self) -> T {
        FiniteSumProblem::mu(self)
    }
    fn smoothness(&self) -> T {
        self.l()
    }
    fn evaluate(&mut self, i: usize, x: &Point<T>) -> Result<(T, Point<T>)> {
        self.component(i, x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranscriptEntry<T> {
    pub call_index: usize,
    pub component: usize,
    pub query: Point<T>,
    pub value: T,
    pub gradient: Point<T>,
}

impl<T: Scalar> TranscriptEntry<T> {
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.call_index == other.call_index
            && self.component == other.component
            && self.value.bit_eq(other.value)
            && self.query.bit_eq(&other.query)
            && self.gradient.bit_eq(&other.gradient)
    }
}

/// Append-only record of every IFO call.
#[derive(Clone, Debug, PartialEq)]
pub struct Transcript<T> {
    entries: Vec<TranscriptEntry<T>>,
    per_component: Vec<usize>,
}

impl<T: Scalar> Transcript<T> {
    pub fn new(n: usize) -> Self {
        Self {
            entries: Vec::new(),
            per_component: vec![0; n],
        }
    }

    fn push(&mut self, component: usize, query: Point<T>, value: T, gradient: Point<T>) {
        self.per_component[component] += 1;
        self.entries.push(TranscriptEntry {
            call_index: self.entries.len(),
            component,
            query,
            value,
            gradient,
        });
    }

    /// `K`.
    pub fn total_calls(&self) -> usize {
        self.entries.len()
    }

    /// `K_1, ..., K_n`.
    pub fn per_component_calls(&self) -> &[usize] {
        &self.per_component
    }

    pub fn entries(&self) -> &[TranscriptEntry<T>] {
        &self.entries
    }

    /// Index of the first entry that differs bitwise, or the shorter length
    /// when one transcript is a strict prefix of the other.
    pub fn first_divergence(&self, other: &Self) -> Option<usize> {
        let common = self.entries.len().min(other.entries.len());
        (0..common)
            .find(|&k| !self.entries[k].bit_eq(&other.entries[k]))
            .or((self.entries.len() != other.entries.len()).then_some(common))
    }

    /// CSV with columns `call_index,i,x_norm,value,g_norm`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "call_index,i,x_norm,value,g_norm")?;
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{:e},{:e},{:e}",
                e.call_index,
                e.component,
                e.query.norm().to_f64_lossy(),
                e.value.to_f64_lossy(),
                e.gradient.norm().to_f64_lossy()
            )?;
        }
        Ok(())
    }

    /// Binary sidecar with the full vectors: for every entry, little-endian
    /// `u64 call_index, u64 i, u64 dim, f64 value, f64[dim] query, f64[dim] gradient`.
    pub fn write_sidecar<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.entries {
            out.write_all(&(e.call_index as u64).to_le_bytes())?;
            out.write_all(&(e.component as u64).to_le_bytes())?;
            out.write_all(&(e.query.dim() as u64).to_le_bytes())?;
            out.write_all(&e.value.to_f64_lossy().to_le_bytes())?;
            for v in e.query.as_slice().iter().chain(e.gradient.as_slice()) {
                out.write_all(&v.to_f64_lossy().to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Incremental first-order oracle: answers `(g_i(x), g_i'(x))` for one
/// component per call and records every call.
#[derive(Debug)]
pub struct Ifo<T: Scalar, O> {
    oracle: O,
    transcript: Transcript<T>,
}

impl<T: Scalar, O: ComponentOracle<T>> Ifo<T, O> {
    pub fn new(oracle: O) -> Self {
        let n = oracle.n();
        Self {
            oracle,
            transcript: Transcript::new(n),
        }
    }

    pub fn n(&self) -> usize {
        self.oracle.n()
    }
    pub fn dim(&self) -> usize {
        self.oracle.dim()
    }
    pub fn mu(&self) -> T {
        self.oracle.mu()
    }
    pub fn smoothness(&self) -> T {
        self.oracle.smoothness()
    }
    pub fn calls(&self) -> usize {
        self.transcript.total_calls()
    }

    pub fn query(&mut self, i: usize, x: &Point<T>) -> Result<(T, Point<T>)> {
        let n = self.n();
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, count: n });
        }
        x.check_dim(self.dim())?;
        let (value, gradient) = self.oracle.evaluate(i, x)?;
        self.transcript.push(i, x.clone(), value, gradient.clone());
        Ok((value, gradient))
    }

    pub fn transcript(&self) -> &Transcript<T> {
        &self.transcript
    }

    pub fn oracle(&self) -> &O {
        &self.oracle
    }

    pub fn oracle_mut(&mut self) -> &mut O {
        &mut self.oracle
    }

    pub fn into_parts(self) -> (O, Transcript<T>) {
        (self.oracle, self.transcript)
    }
}

/// One IFO call.
pub fn ifo_query<T: Scalar, O: ComponentOracle<T>>(
    ifo: &mut Ifo<T, O>,
    i: usize,
    x: &Point<T>,
) -> Result<(T, Point<T>)> {
    ifo.query(i, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::build_hard_instance;

    #[test]
    fn counts_calls_per_component() {
        let p = build_hard_instance::<f64>(3, 1.0, 10.0, 1.0, 100).unwrap();
        let mut ifo = Ifo::new(&p);
        let x = Point::zeros(300);
        for k in 0..7 {
            ifo.query(k % 3, &x).unwrap();
            assert_eq!(ifo.calls(), k + 1);
        }
        assert_eq!(ifo.transcript().per_component_calls(), &[3, 2, 2]);
        let total: usize = ifo.transcript().per_component_calls().iter().sum();
        assert_eq!(total, ifo.calls());
        assert!(matches!(ifo.query(3, &x), Err(Error::IndexOutOfRange { index: 3, count: 3 })));
        assert!(ifo.query(0, &Point::zeros(5)).is_err());
        assert_eq!(ifo.calls(), 7);
    }

    #[test]
    fn origin_gradient_lives_on_two_coordinates_of_the_component() {
        let n = 4;
        let p = build_hard_instance::<f64>(n, 1.0, 20.0, 1.0, 100).unwrap();
        let mut ifo = Ifo::new(&p);
        for i in 0..n {
            let (_, g) = ifo.query(i, &Point::zeros(n * 100)).unwrap();
            for (pos, v) in g.as_slice().iter().enumerate() {
                if *v != 0.0 {
                    assert!(pos == i || pos == n + i, "component {i} touched {pos}");
                }
            }
        }
    }

    #[test]
    fn divergence_detection() {
        let p = build_hard_instance::<f64>(2, 1.0, 10.0, 1.0, 100).unwrap();
        let mut a = Ifo::new(&p);
        let mut b = Ifo::new(&p);
        let x = Point::zeros(200);
        a.query(0, &x).unwrap();
        b.query(0, &x).unwrap();
        assert_eq!(a.transcript().first_divergence(b.transcript()), None);
        a.query(1, &x).unwrap();
        b.query(0, &x).unwrap();
        assert_eq!(a.transcript().first_divergence(b.transcript()), Some(1));
        a.query(1, &x).unwrap();
        assert_eq!(a.transcript().first_divergence(b.transcript()), Some(1));
    }

    #[test]
    fn csv_has_one_row_per_call() {
        let p = build_hard_instance::<f64>(2, 1.0, 10.0, 1.0, 100).unwrap();
        let mut ifo = Ifo::new(&p);
        ifo.query(1, &Point::zeros(200)).unwrap();
        let mut buf = Vec::new();
        ifo.transcript().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("call_index,i,x_norm,value,g_norm\n0,1,"));
        let mut side = Vec::new();
        ifo.transcript().write_sidecar(&mut side).unwrap();
        assert_eq!(side.len(), 8 * (4 + 2 * 200));
    }
}
