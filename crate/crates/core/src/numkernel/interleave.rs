//! The interleaved embeddings `Q_i = [e_i, e_{n+i}, e_{2n+i}, ...]`.
//!
//! Component indices are 0-based: `Q_i` owns ambient coordinates
//! `i, n + i, 2n + i, ...`.

use crate::error::{Error, Result};
use crate::numkernel::point::Point;
use crate::scalar::Scalar;

fn check_index(i: usize, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "component count must be positive".into(),
        });
    }
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, count: n });
    }
    Ok(())
}

/// `Q_i x`: scatters coordinate `j` of `x` to ambient position `j n + i`.
pub fn q_embed<T: Scalar>(i: usize, n: usize, x: &Point<T>) -> Result<Point<T>> {
    check_index(i, n)?;
    let mut out = Point::zeros(n * x.dim());
    q_embed_add(i, n, x.as_slice(), out.as_mut_slice());
    Ok(out)
}

/// `Q_i^T y`: gathers ambient positions `j n + i`.
pub fn q_restrict<T: Scalar>(i: usize, n: usize, y: &Point<T>) -> Result<Point<T>> {
    check_index(i, n)?;
    if !y.dim().is_multiple_of(n) {
        return Err(Error::DimensionMismatch {
            expected: n * (y.dim() / n + 1),
            got: y.dim(),
        });
    }
    Ok(Point::from(
        y.as_slice().iter().skip(i).step_by(n).copied().collect::<Vec<_>>(),
    ))
}

/// `out += Q_i x`, with `out` already of ambient length.
pub(crate) fn q_embed_add<T: Scalar>(i: usize, n: usize, x: &[T], out: &mut [T]) {
    for (slot, &v) in out.iter_mut().skip(i).step_by(n).zip(x) {
        *slot = *slot + v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embed_maps_basis_vectors() {
        // n = 2, first component, second local coordinate -> third ambient coordinate
        let y = q_embed(0, 2, &Point::<f64>::basis(2, 1)).unwrap();
        assert_eq!(y, Point::basis(4, 2));
    }

    #[test]
    fn single_component_is_identity() {
        let x = Point::from(vec![1.0, -2.0, 3.5]);
        assert_eq!(q_embed(0, 1, &x).unwrap(), x);
        assert_eq!(q_restrict(0, 1, &x).unwrap(), x);
    }

    #[test]
    fn index_errors() {
        let x = Point::from(vec![1.0_f64; 4]);
        assert_eq!(
            q_embed(2, 2, &x).unwrap_err(),
            Error::IndexOutOfRange { index: 2, count: 2 }
        );
        assert!(q_restrict(0, 3, &x).is_err());
        assert!(q_embed(0, 0, &x).is_err());
    }
}
