//! Sparse polynomials in n variables with multi-index keyed coefficients.

use crate::multiindex::MultiIndex;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Polynomial Σ c_α x^α. The coefficient map is ordered (graded lex), so
/// iteration, serialization and equality are deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct Polynomial<T> {
    dim: usize,
    coeffs: BTreeMap<MultiIndex, T>,
}

impl<T: Real> Polynomial<T> {
    pub fn zero(dim: usize) -> Self {
        Polynomial { dim, coeffs: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: T) -> Self {
        let mut p = Self::zero(dim);
        p.set(MultiIndex::zero(dim), c);
        p
    }

    pub fn monomial(alpha: MultiIndex, c: T) -> Self {
        let dim = alpha.dim();
        let mut p = Self::zero(dim);
        p.set(alpha, c);
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn set(&mut self, alpha: MultiIndex, c: T) {
        assert_eq!(alpha.dim(), self.dim, "multi-index dimension mismatch");
        if c == T::zero() {
            self.coeffs.remove(&alpha);
        } else {
            self.coeffs.insert(alpha, c);
        }
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: T) {
        let cur = self.coeffs.get(&alpha).copied().unwrap_or_else(T::zero);
        self.set(alpha, cur + c);
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> T {
        self.coeffs.get(alpha).copied().unwrap_or_else(T::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &T)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Total degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.keys().map(|a| a.order()).max()
    }

    pub fn eval(&self, x: &[T]) -> T {
        debug_assert_eq!(x.len(), self.dim);
        let mut acc = T::zero();
        for (alpha, &c) in &self.coeffs {
            acc = acc + c * alpha.monomial(x);
        }
        acc
    }

    pub fn scaled(&self, t: T) -> Self {
        let mut out = Self::zero(self.dim);
        for (alpha, &c) in &self.coeffs {
            out.set(alpha.clone(), c * t);
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (alpha, &c) in &other.coeffs {
            out.add_term(alpha.clone(), c);
        }
        out
    }

    /// Largest coefficient magnitude, 0 for the zero polynomial.
    pub fn max_coeff(&self) -> T {
        self.coeffs
            .values()
            .fold(T::zero(), |m, c| m.max(c.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_degree() {
        // p(x, y) = 3xy + x^2
        let mut p = Polynomial::<f64>::zero(2);
        p.set(MultiIndex::new(vec![1, 1]), 3.0);
        p.set(MultiIndex::new(vec![2, 0]), 1.0);
        assert_eq!(p.eval(&[1.0, 0.0]), 1.0);
        assert_eq!(p.eval(&[1.0, 1.0]), 4.0);
        assert_eq!(p.eval(&[2.0, 3.0]), 22.0);
        assert_eq!(p.degree(), Some(2));
    }

    #[test]
    fn zero_coefficients_are_pruned() {
        let mut p = Polynomial::<f64>::constant(1, 2.0);
        p.add_term(MultiIndex::zero(1), -2.0);
        assert!(p.is_zero());
        assert_eq!(p.degree(), None);
    }

    #[test]
    fn linear_combination() {
        let p = Polynomial::<f64>::monomial(MultiIndex::new(vec![1]), 2.0);
        let q = Polynomial::<f64>::constant(1, 1.0);
        let r = p.plus(&q.scaled(-3.0));
        assert_eq!(r.eval(&[2.0]), 1.0);
    }
}
