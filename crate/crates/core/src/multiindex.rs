//! Multi-indices α ∈ ℕ^n with graded lexicographic enumeration.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(components: Vec<u32>) -> Self {
        MultiIndex(components)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// Unit index e_i.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut c = vec![0; n];
        c[i] += 1;
        MultiIndex(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// |α| = α_1 + … + α_n.
    pub fn order(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    /// α! as a float (orders stay small, so this is exact).
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| (1..=a as u64).product::<u64>() as f64)
            .product()
    }

    /// x^α.
    pub fn monomial<T: crate::scalar::Real>(&self, x: &[T]) -> T {
        debug_assert_eq!(x.len(), self.dim());
        let mut acc = T::one();
        for (xi, &ai) in x.iter().zip(&self.0) {
            acc = acc * xi.powi(ai as i32);
        }
        acc
    }

    pub fn checked_dim(&self, n: usize) -> Result<()> {
        if self.dim() == n {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "multi-index has {} components, expected {}",
                self.dim(),
                n
            )))
        }
    }
}

/// Graded lexicographic order: lower total order first, then lexicographic.
impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// Exact binomial coefficient (small arguments).
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// All multi-indices with |α| = order, in lexicographic order.
pub fn of_order(n: usize, order: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    fill(&mut out, &mut current, 0, order);
    out.sort();
    out
}

fn fill(out: &mut Vec<MultiIndex>, current: &mut Vec<u32>, pos: usize, remaining: usize) {
    if pos + 1 == current.len() {
        current[pos] = remaining as u32;
        out.push(MultiIndex(current.clone()));
        current[pos] = 0;
        return;
    }
    for a in 0..=remaining {
        current[pos] = a as u32;
        fill(out, current, pos + 1, remaining - a);
    }
    current[pos] = 0;
}

/// All multi-indices with |α| ≤ max_order, graded lexicographic.
pub fn up_to_order(n: usize, max_order: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for j in 0..=max_order {
        out.extend(of_order(n, j));
    }
    out
}

/// All tensor index tuples (i_1, …, i_j) ∈ {0,…,n−1}^j in lexicographic
/// order, each converted to the multi-index counting its entries. Mixed
/// derivatives therefore appear once per tensor slot (full tensor
/// convention), n^j entries in total.
pub fn tensor_tuples(n: usize, j: usize) -> Vec<MultiIndex> {
    let count = n.pow(j as u32);
    let mut out = Vec::with_capacity(count);
    for idx in 0..count {
        let mut alpha = vec![0u32; n];
        let mut rem = idx;
        for _ in 0..j {
            alpha[rem % n] += 1;
            rem /= n;
        }
        out.push(MultiIndex(alpha));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_stars_and_bars() {
        for n in 1..=3usize {
            for j in 0..=6usize {
                assert_eq!(of_order(n, j).len() as u64, binomial(j + n - 1, n - 1));
            }
        }
    }

    #[test]
    fn graded_lex_is_sorted() {
        let all = up_to_order(2, 3);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        assert_eq!(all[0], MultiIndex::zero(2));
        // order-1 block is e1 then e2... lexicographic on components:
        // (0,1) < (1,0)
        assert_eq!(all[1], MultiIndex::new(vec![0, 1]));
        assert_eq!(all[2], MultiIndex::new(vec![1, 0]));
    }

    #[test]
    fn factorial_and_monomial() {
        let a = MultiIndex::new(vec![2, 1]);
        assert_eq!(a.factorial(), 2.0);
        assert_eq!(a.order(), 3);
        assert!((a.monomial(&[2.0f64, 3.0]) - 12.0).abs() < 1e-15);
    }

    #[test]
    fn tensor_tuples_count_with_duplicates() {
        // n=2, j=2 has 4 tuples: (0,0), (1,0), (0,1), (1,1) -> multi-indices
        // (2,0), (1,1), (1,1), (0,2)
        let t = tensor_tuples(2, 2);
        assert_eq!(t.len(), 4);
        assert_eq!(t.iter().filter(|a| **a == MultiIndex::new(vec![1, 1])).count(), 2);
    }
}
