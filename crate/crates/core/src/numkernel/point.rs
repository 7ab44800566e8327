use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};
use crate::scalar::Scalar;

/// Finite-dimensional truncation of an element of `l2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    coords: Vec<T>,
}

impl<T: Scalar> Point<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            coords: vec![T::zero(); dim],
        }
    }

    /// Canonical basis vector `e_{index}` (0-based).
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut p = Self::zeros(dim);
        p.coords[index] = T::one();
        p
    }

    /// Wraps coordinates, rejecting NaN or infinite entries.
    pub fn try_new(coords: Vec<T>) -> Option<Self> {
        coords.iter().all(|c| c.is_finite()).then_some(Self { coords })
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize) -> T) -> Self {
        Self {
            coords: (0..dim).map(f).collect(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.coords
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.coords
    }

    pub fn into_vec(self) -> Vec<T> {
        self.coords
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    pub fn dot(&self, other: &Self) -> T {
        dot(&self.coords, &other.coords)
    }

    pub fn norm_sq(&self) -> T {
        dot(&self.coords, &self.coords)
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: T, other: &Self) {
        axpy(alpha, &other.coords, &mut self.coords);
    }

    pub fn scale(&mut self, alpha: T) {
        for c in &mut self.coords {
            *c = *c * alpha;
        }
    }

    pub fn scaled(&self, alpha: T) -> Self {
        let mut out = self.clone();
        out.scale(alpha);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.dim(), |i| self.coords[i] - other.coords[i])
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_fn(self.dim(), |i| self.coords[i] + other.coords[i])
    }

    pub fn distance(&self, other: &Self) -> T {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt()
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        check_dim(expected, self.dim())
    }

    /// Largest index with a nonzero coordinate, plus one (0 for the zero vector).
    pub fn support_len(&self) -> usize {
        self.coords
            .iter()
            .rposition(|c| !c.is_zero())
            .map_or(0, |i| i + 1)
    }

    /// Bitwise equality of every coordinate.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self
                .coords
                .iter()
                .zip(&other.coords)
                .all(|(a, b)| a.bit_eq(*b))
    }
}

impl<T> From<Vec<T>> for Point<T> {
    fn from(coords: Vec<T>) -> Self {
        Self { coords }
    }
}

impl<T> Index<usize> for Point<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.coords[i]
    }
}

impl<T> IndexMut<usize> for Point<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.coords[i]
    }
}

#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub(crate) fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}
