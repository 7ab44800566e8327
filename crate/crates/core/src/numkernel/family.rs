use crate::error::{check_dim, Error, Result};
use crate::numkernel::point::{axpy, dot, Point};
use crate::scalar::Scalar;

/// Ordered orthonormal family `S = [s_1, s_2, ...]` in a fixed ambient dimension.
///
/// `S x = sum_i x(i) s_i` and `S^T x = (<s_i, x>)_i`. Members are only ever
/// appended, so a family's prefix is stable as it grows.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalFamily<T> {
    dim: usize,
    members: Vec<Point<T>>,
}

impl<T: Scalar> OrthonormalFamily<T> {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            members: Vec::new(),
        }
    }

    /// The first `count` canonical basis vectors.
    pub fn canonical(dim: usize, count: usize) -> Self {
        Self {
            dim,
            members: (0..count.min(dim)).map(|i| Point::basis(dim, i)).collect(),
        }
    }

    /// Builds a family from explicit members, verifying dimensions and
    /// orthonormality to `1e-10`.
    pub fn from_members(dim: usize, members: Vec<Point<T>>) -> Result<Self> {
        for m in &members {
            check_dim(dim, m.dim())?;
        }
        if members.len() > dim {
            return Err(Error::InvalidParameter {
                name: "members",
                reason: format!("{} members exceed ambient dimension {dim}", members.len()),
            });
        }
        let family = Self { dim, members };
        family.check_orthonormal(T::lit(1e-10))?;
        Ok(family)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Point<T>] {
        &self.members
    }

    pub fn member(&self, i: usize) -> &Point<T> {
        &self.members[i]
    }

    /// Largest `|<s_i, s_j> - delta_ij|` over all pairs.
    pub fn orthonormality_defect(&self) -> T {
        let mut worst = T::zero();
        for (i, a) in self.members.iter().enumerate() {
            for (j, b) in self.members.iter().enumerate().skip(i) {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((a.dot(b) - target).abs());
            }
        }
        worst
    }

    pub fn check_orthonormal(&self, tol: T) -> Result<()> {
        let deviation = self.orthonormality_defect();
        if deviation <= tol {
            Ok(())
        } else {
            Err(Error::NotOrthonormal {
                deviation: deviation.to_f64_lossy(),
            })
        }
    }

    /// `S x`: combines the first `len()` coefficients of `x`; later
    /// coefficients multiply zero members and are ignored. Exact-zero
    /// coefficients are skipped.
    pub fn apply(&self, coeffs: &Point<T>) -> Result<Point<T>> {
        if coeffs.dim() < self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: coeffs.dim(),
            });
        }
        Ok(self.apply_slice(coeffs.as_slice()))
    }

    pub(crate) fn apply_slice(&self, coeffs: &[T]) -> Point<T> {
        let mut out = Point::zeros(self.dim);
        for (member, &c) in self.members.iter().zip(coeffs) {
            if !c.is_zero() {
                out.axpy(c, member);
            }
        }
        out
    }

    /// `S^T x`, of length `len()`.
    pub fn transpose_apply(&self, x: &Point<T>) -> Result<Point<T>> {
        check_dim(self.dim, x.dim())?;
        Ok(Point::from_fn(self.len(), |i| self.members[i].dot(x)))
    }

    /// `S^T x` zero-padded (or truncated) to `len` coordinates.
    pub fn transpose_apply_padded(&self, x: &Point<T>, len: usize) -> Result<Point<T>> {
        check_dim(self.dim, x.dim())?;
        Ok(Point::from_fn(len, |i| {
            self.members.get(i).map_or(T::zero(), |m| m.dot(x))
        }))
    }

    /// Orthogonal projection `S S^T x` onto `Span(S)`.
    pub fn project(&self, x: &Point<T>) -> Result<Point<T>> {
        let coeffs = self.transpose_apply(x)?;
        Ok(self.apply_slice(coeffs.as_slice()))
    }

    pub fn dist_to_span(&self, x: &Point<T>) -> Result<T> {
        Ok(x.distance(&self.project(x)?))
    }

    /// Reflection `2 P x - x` about `Span(S)`.
    pub fn mirror(&self, x: &Point<T>) -> Result<Point<T>> {
        let p = self.project(x)?;
        Ok(Point::from_fn(self.dim, |i| p[i] + p[i] - x[i]))
    }

    /// Residual of `v` after two classical Gram–Schmidt passes against `S`.
    fn residual(&self, v: &[T]) -> Vec<T> {
        let mut r = v.to_vec();
        for _ in 0..2 {
            let coeffs: Vec<T> = self.members.iter().map(|m| dot(m.as_slice(), &r)).collect();
            for (m, c) in self.members.iter().zip(coeffs) {
                axpy(-c, m.as_slice(), &mut r);
            }
        }
        r
    }

    /// Appends the normalized residual of `v` unless `v` lies in `Span(S)`
    /// up to `tol * ||v||`. Returns whether a member was added.
    pub fn extend(&mut self, v: &Point<T>, tol: T) -> Result<bool> {
        check_dim(self.dim, v.dim())?;
        let v_norm = v.norm();
        if v_norm.is_zero() || self.len() == self.dim {
            return Ok(false);
        }
        let r = self.residual(v.as_slice());
        let r_norm = dot(&r, &r).sqrt();
        if r_norm <= tol * v_norm {
            return Ok(false);
        }
        let inv = r_norm.recip();
        self.members
            .push(Point::from(r.into_iter().map(|c| c * inv).collect::<Vec<_>>()));
        Ok(true)
    }

    /// Non-mutating form of [`extend`](Self::extend).
    pub fn gram_schmidt_extend(&self, v: &Point<T>, tol: T) -> Result<Self> {
        let mut out = self.clone();
        out.extend(v, tol)?;
        Ok(out)
    }

    /// Appends the first canonical vector at or after `*cursor` that is not in
    /// the span, advancing the cursor past it. Returns `false` once the
    /// canonical basis is exhausted.
    pub fn extend_canonical(&mut self, cursor: &mut usize, tol: T) -> bool {
        while *cursor < self.dim {
            let e = Point::basis(self.dim, *cursor);
            *cursor += 1;
            if self.extend(&e, tol).unwrap_or(false) {
                return true;
            }
        }
        false
    }

    /// Completes the family to an orthonormal basis of the ambient space by
    /// orthogonalizing the canonical vectors in index order.
    pub fn complete(&self) -> Result<Self> {
        let mut out = self.clone();
        let mut cursor = 0;
        let tol = T::span_tol();
        while out.len() < out.dim {
            if !out.extend_canonical(&mut cursor, tol) {
                return Err(Error::NotOrthonormal {
                    deviation: f64::NAN,
                });
            }
        }
        Ok(out)
    }

    /// Family with every member negated; `-S` spans the same space.
    pub fn negated(&self) -> Self {
        Self {
            dim: self.dim,
            members: self.members.iter().map(|m| m.scaled(-T::one())).collect(),
        }
    }

    /// Leading `count` members.
    pub fn prefix(&self, count: usize) -> Self {
        Self {
            dim: self.dim,
            members: self.members[..count.min(self.len())].to_vec(),
        }
    }
}

/// Extends `S` by `v` with tolerance `tol`.
pub fn gram_schmidt_extend<T: Scalar>(
    s: &OrthonormalFamily<T>,
    v: &Point<T>,
    tol: T,
) -> Result<OrthonormalFamily<T>> {
    s.gram_schmidt_extend(v, tol)
}
