use crate::numkernel::{q_embed_add, Point};
use crate::problems::finite_sum::Component;
use crate::problems::nesterov::NesterovFunction;
use crate::scalar::Scalar;

/// Coordinates `S^T y` of a local point in the (possibly partial) basis `members`,
/// padded with zeros to `dim` and with every coefficient of magnitude at most
/// `flush_tol * ||y||` set to exactly zero.
pub(crate) fn rotated_coords<T: Scalar>(
    members: &[Point<T>],
    y: &[T],
    dim: usize,
    flush_tol: T,
) -> Vec<T> {
    let y_norm = y.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt();
    let cutoff = flush_tol * y_norm;
    let mut c = vec![T::zero(); dim];
    for (slot, m) in c.iter_mut().zip(members) {
        let v = crate::numkernel::dot(m.as_slice(), y);
        if v.abs() > cutoff {
            *slot = v;
        }
    }
    c
}

/// `h(y) = N(S^T y) - (shift/2) ||y||^2` and its gradient
/// `S N'(S^T y) - shift y`, evaluated in local coordinates.
///
/// `members = None` means the identity basis. The resisting oracle and the
/// finalized rotated components both go through this function so their
/// answers agree bit for bit on points in the span of the oracle's family.
pub(crate) fn chain_eval<T: Scalar>(
    f: &NesterovFunction<T>,
    members: Option<&[Point<T>]>,
    y: &[T],
    shift: T,
    flush_tol: T,
) -> (T, Vec<T>) {
    let dim = f.dim();
    let (value, mut g) = match members {
        None => (f.value_slice(y), f.grad_slice(y)),
        Some(members) => {
            let c = rotated_coords(members, y, dim, flush_tol);
            let value = f.value_slice(&c);
            let dn = f.grad_slice(&c);
            let mut g = vec![T::zero(); dim];
            for (j, &coef) in dn.iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                let m = members
                    .get(j)
                    .expect("chain gradient left the span of the basis");
                crate::numkernel::axpy(coef, m.as_slice(), &mut g);
            }
            (value, g)
        }
    };
    let sq = y.iter().fold(T::zero(), |acc, &v| acc + v * v);
    for (gi, &yi) in g.iter_mut().zip(y) {
        *gi = *gi - shift * yi;
    }
    (value - shift / T::lit(2.0) * sq, g)
}

/// Component `g_i(x) = h_i(Q_i^T x)` of the separable hard instance, where
/// `h_i(y) = N_i(S_i^T y) - (n mu / 2) ||y||^2`.
#[derive(Clone, Debug)]
pub struct ChainComponent<T: Scalar> {
    index: usize,
    n: usize,
    chain: NesterovFunction<T>,
    shift: T,
    basis: Option<Vec<Point<T>>>,
    flush_tol: T,
}

impl<T: Scalar> ChainComponent<T> {
    /// Unrotated component: `h_i(y) = N_i(y) - (shift/2)||y||^2`.
    pub fn new(index: usize, n: usize, chain: NesterovFunction<T>, shift: T) -> Self {
        Self {
            index,
            n,
            chain,
            shift,
            basis: None,
            flush_tol: T::zero(),
        }
    }

    /// Rotated component using an orthonormal basis of the local space.
    pub fn rotated(
        index: usize,
        n: usize,
        chain: NesterovFunction<T>,
        shift: T,
        basis: Vec<Point<T>>,
        flush_tol: T,
    ) -> Self {
        Self {
            index,
            n,
            chain,
            shift,
            basis: Some(basis),
            flush_tol,
        }
    }

    pub fn chain(&self) -> &NesterovFunction<T> {
        &self.chain
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// `h_i` on local coordinates.
    pub fn local_value_grad(&self, y: &[T]) -> (T, Vec<T>) {
        chain_eval(&self.chain, self.basis.as_deref(), y, self.shift, self.flush_tol)
    }
}

impl<T: Scalar> Component<T> for ChainComponent<T> {
    fn dim(&self) -> usize {
        self.n * self.chain.dim()
    }

    fn value_grad(&self, x: &Point<T>) -> (T, Point<T>) {
        let y: Vec<T> = x
            .as_slice()
            .iter()
            .skip(self.index)
            .step_by(self.n)
            .copied()
            .collect();
        let (v, g_local) = self.local_value_grad(&y);
        let mut g = Point::zeros(x.dim());
        q_embed_add(self.index, self.n, &g_local, g.as_mut_slice());
        (v, g)
    }
}
