use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numkernel::{dot, Point, SymMatrix};
use crate::problems::finite_sum::{Component, FiniteSumProblem};
use crate::scalar::Scalar;

/// Scaling of the squared residual in each least-squares component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LossConvention {
    /// `g_i = 1/2 (<a_i,x> - b_i)^2`: `g_i'' = a_i a_i^T`, so `L = mu + R^2`.
    #[default]
    Half,
    /// `g_i = (<a_i,x> - b_i)^2`: `g_i'' = 2 a_i a_i^T`, so `L = mu + 2 R^2`.
    Full,
}

impl LossConvention {
    pub fn weight<T: Scalar>(self) -> T {
        match self {
            Self::Half => T::lit(0.5),
            Self::Full => T::one(),
        }
    }
}

/// Header describing a sphere dataset; the rows themselves go to CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RlsHeader {
    pub n: usize,
    pub d: usize,
    pub radius: f64,
    pub mu: f64,
    pub seed: u64,
    pub noise: f64,
    #[serde(default)]
    pub convention: LossConvention,
}

/// Regularized least squares on rows drawn uniformly from the radius-`R` sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct RlsDataset<T> {
    pub rows: Vec<Point<T>>,
    pub targets: Vec<T>,
    pub radius: T,
    pub mu: T,
    pub noise: T,
    pub seed: u64,
    pub convention: LossConvention,
}

/// Rows `a_i` i.i.d. uniform on the sphere `||a|| = R` (normalized Gaussians),
/// targets `b_i = <a_i, xbar> + noise * xi_i` for a planted unit-norm `xbar`.
pub fn sample_sphere_dataset<T: Scalar>(
    n: usize,
    d: usize,
    radius: T,
    mu: T,
    noise: T,
    seed: u64,
) -> Result<RlsDataset<T>> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter {
            name: "n/d",
            reason: format!("need n, d >= 1, got n = {n}, d = {d}"),
        });
    }
    if !(radius > T::zero()) || !(mu > T::zero()) || !(noise >= T::zero()) {
        return Err(Error::InvalidParameter {
            name: "R/mu/noise",
            reason: "need R > 0, mu > 0, noise >= 0".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gaussian = |len: usize| -> Vec<f64> {
        (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
    };
    let to_sphere = |v: Vec<f64>, r: f64| -> Vec<f64> {
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        v.into_iter().map(|c| c / norm * r).collect()
    };
    let planted = to_sphere(gaussian(d), 1.0);
    let r = radius.to_f64_lossy();
    let mut rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let a = to_sphere(gaussian(d), r);
        let xi = gaussian(1)[0];
        let b = a.iter().zip(&planted).map(|(x, y)| x * y).sum::<f64>() + noise.to_f64_lossy() * xi;
        rows.push(Point::from(a.into_iter().map(T::lit).collect::<Vec<_>>()));
        targets.push(T::lit(b));
    }
    Ok(RlsDataset {
        rows,
        targets,
        radius,
        mu,
        noise,
        seed,
        convention: LossConvention::Half,
    })
}

impl<T: Scalar> RlsDataset<T> {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn d(&self) -> usize {
        self.rows[0].dim()
    }

    pub fn with_convention(mut self, convention: LossConvention) -> Self {
        self.convention = convention;
        self
    }

    /// Component smoothness bound `L` of the finite sum (`mu + R^2` under the
    /// half convention).
    pub fn smoothness(&self) -> T {
        self.mu + T::lit(2.0) * self.convention.weight::<T>() * self.radius * self.radius
    }

    /// Value and gradient of component `i`.
    pub fn component(&self, i: usize, x: &Point<T>) -> Result<(T, Point<T>)> {
        let a = self.rows.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            count: self.n(),
        })?;
        check_dim(a.dim(), x.dim())?;
        Ok(rls_eval(a, self.targets[i], self.convention.weight(), x))
    }

    /// Hessian of the full objective, `mu I + (2w/n) sum_i a_i a_i^T`.
    pub fn hessian(&self) -> SymMatrix<T> {
        let mut h = SymMatrix::identity_scaled(self.d(), self.mu);
        let scale = T::lit(2.0) * self.convention.weight::<T>() / T::from_usize_lossy(self.n());
        for a in &self.rows {
            h.rank_one_update(scale, a.as_slice());
        }
        h
    }

    /// Exact minimizer from the normal equations.
    pub fn minimizer(&self) -> Result<Point<T>> {
        let scale = T::lit(2.0) * self.convention.weight::<T>() / T::from_usize_lossy(self.n());
        let mut rhs = Point::zeros(self.d());
        for (a, &b) in self.rows.iter().zip(&self.targets) {
            rhs.axpy(scale * b, a);
        }
        self.hessian().cholesky_solve(&rhs)
    }

    pub fn to_problem(&self) -> Result<FiniteSumProblem<T>> {
        let w = self.convention.weight();
        let components: Vec<Box<dyn Component<T>>> = self
            .rows
            .iter()
            .zip(&self.targets)
            .map(|(a, &b)| {
                Box::new(RlsComponent {
                    row: a.clone(),
                    target: b,
                    weight: w,
                }) as Box<dyn Component<T>>
            })
            .collect();
        FiniteSumProblem::new(self.mu, self.smoothness(), components)?.with_minimizer(self.minimizer()?)
    }

    pub fn header(&self) -> RlsHeader {
        RlsHeader {
            n: self.n(),
            d: self.d(),
            radius: self.radius.to_f64_lossy(),
            mu: self.mu.to_f64_lossy(),
            seed: self.seed,
            noise: self.noise.to_f64_lossy(),
            convention: self.convention,
        }
    }

    /// One CSV line per row: `a_1, ..., a_d, b`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (a, b) in self.rows.iter().zip(&self.targets) {
            let mut line: Vec<String> = a.as_slice().iter().map(|v| v.to_string()).collect();
            line.push(b.to_string());
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(header: &RlsHeader, input: R) -> std::io::Result<Self> {
        let bad = |msg: String| std::io::Error::new(std::io::ErrorKind::InvalidData, msg);
        let mut rows = Vec::with_capacity(header.n);
        let mut targets = Vec::with_capacity(header.n);
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals = line
                .split(',')
                .map(|s| T::from_str_radix(s.trim(), 10).map_err(|_| bad(format!("line {}: bad number `{s}`", lineno + 1))))
                .collect::<std::io::Result<Vec<T>>>()?;
            if vals.len() != header.d + 1 {
                return Err(bad(format!(
                    "line {}: expected {} fields, got {}",
                    lineno + 1,
                    header.d + 1,
                    vals.len()
                )));
            }
            targets.push(vals[header.d]);
            rows.push(Point::from(vals[..header.d].to_vec()));
        }
        if rows.len() != header.n {
            return Err(bad(format!("expected {} rows, got {}", header.n, rows.len())));
        }
        Ok(Self {
            rows,
            targets,
            radius: T::lit(header.radius),
            mu: T::lit(header.mu),
            noise: T::lit(header.noise),
            seed: header.seed,
            convention: header.convention,
        })
    }
}

fn rls_eval<T: Scalar>(a: &Point<T>, b: T, w: T, x: &Point<T>) -> (T, Point<T>) {
    let r = dot(a.as_slice(), x.as_slice()) - b;
    (w * r * r, a.scaled(T::lit(2.0) * w * r))
}

/// `g_i(x) = w (<a_i, x> - b_i)^2`.
#[derive(Clone, Debug)]
pub struct RlsComponent<T> {
    row: Point<T>,
    target: T,
    weight: T,
}

impl<T: Scalar> Component<T> for RlsComponent<T> {
    fn dim(&self) -> usize {
        self.row.dim()
    }
    fn value_grad(&self, x: &Point<T>) -> (T, Point<T>) {
        rls_eval(&self.row, self.target, self.weight, x)
    }
}

/// Component `i` of a dataset at `x`.
pub fn rls_component<T: Scalar>(dataset: &RlsDataset<T>, i: usize, x: &Point<T>) -> Result<(T, Point<T>)> {
    dataset.component(i, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rows_lie_on_the_sphere() {
        let ds = sample_sphere_dataset::<f64>(200, 7, 2.5, 0.1, 0.3, 5).unwrap();
        for a in &ds.rows {
            assert!((a.norm() - 2.5).abs() <= 1e-12);
        }
        assert_relative_eq!(ds.smoothness(), 0.1 + 2.5 * 2.5);
        let full = ds.clone().with_convention(LossConvention::Full);
        assert_relative_eq!(full.smoothness(), 0.1 + 2.0 * 2.5 * 2.5);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let a = sample_sphere_dataset::<f64>(50, 5, 1.0, 0.01, 0.1, 42).unwrap();
        let b = sample_sphere_dataset::<f64>(50, 5, 1.0, 0.01, 0.1, 42).unwrap();
        assert!(a.rows.iter().zip(&b.rows).all(|(x, y)| x.bit_eq(y)));
        assert!(a.targets.iter().zip(&b.targets).all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = sample_sphere_dataset::<f64>(50, 5, 1.0, 0.01, 0.1, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn component_examples() {
        let r = 1.7;
        let ds = RlsDataset {
            rows: vec![Point::from(vec![r, 0.0])],
            targets: vec![0.0],
            radius: r,
            mu: 0.1,
            noise: 0.0,
            seed: 0,
            convention: LossConvention::Full,
        };
        let (v, g) = rls_component(&ds, 0, &Point::from(vec![1.0, 0.0])).unwrap();
        assert_relative_eq!(v, r * r);
        assert_relative_eq!(g[0], 2.0 * r * r);
        assert_eq!(g[1], 0.0);
        // interpolation point
        let (v, g) = rls_component(&ds, 0, &Point::zeros(2)).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(g.norm(), 0.0);
        assert!(matches!(
            rls_component(&ds, 1, &Point::zeros(2)),
            Err(Error::IndexOutOfRange { index: 1, count: 1 })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let ds = sample_sphere_dataset::<f64>(20, 4, 1.0, 0.05, 0.2, 9).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = RlsDataset::read_csv(&ds.header(), buf.as_slice()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn minimizer_zeroes_the_gradient() {
        let ds = sample_sphere_dataset::<f64>(300, 10, 1.0, 0.01, 0.5, 1).unwrap();
        let p = ds.to_problem().unwrap();
        let (_, g) = p.value_grad(p.minimizer().unwrap()).unwrap();
        assert!(g.norm() < 1e-12);
    }
}
