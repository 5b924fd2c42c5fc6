//! Barycentric interpolation through Chebyshev nodes. Used to memoize
//! expensive evaluators (quadrature closures) as smooth functions that are
//! cheap to sample and safe to difference.

use crate::error::Result;
use crate::scalar::Real;

/// Interpolant through first-kind Chebyshev nodes on [a, b], evaluated in the
/// second barycentric form. Exact at the nodes; for functions analytic in a
/// neighborhood of [a, b] the error decays geometrically in the node count.
#[derive(Debug, Clone)]
pub struct Chebyshev1<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> Chebyshev1<T> {
    /// Samples f at m nodes. The evaluator may fail (quadrature-backed
    /// closures do); the first failure aborts the fit.
    pub fn fit(a: T, b: T, m: usize, f: impl Fn(T) -> Result<T>) -> Result<Self> {
        assert!(m >= 2, "need at least two nodes");
        assert!(b > a, "empty interval");
        let half = (b - a) / T::lit(2.0);
        let mid = (b + a) / T::lit(2.0);
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        let mut values = Vec::with_capacity(m);
        for i in 0..m {
            let theta = T::PI() * T::of(2 * i + 1) / T::of(2 * m);
            // minus so the nodes come out increasing
            let x = mid - half * theta.cos();
            let sign = if i % 2 == 0 { T::one() } else { -T::one() };
            nodes.push(x);
            weights.push(sign * theta.sin());
            values.push(f(x)?);
        }
        Ok(Chebyshev1 { nodes, weights, values })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn eval(&self, x: T) -> T {
        let mut num = T::zero();
        let mut den = T::zero();
        for i in 0..self.nodes.len() {
            let d = x - self.nodes[i];
            if d == T::zero() {
                return self.values[i];
            }
            let q = self.weights[i] / d;
            num += q * self.values[i];
            den += q;
        }
        num / den
    }

    /// Largest deviation from f over a dyadic probe of the interval, for
    /// validating a fit against the evaluator it replaced.
    pub fn max_deviation(&self, f: impl Fn(T) -> Result<T>, probes: usize) -> Result<T> {
        let a = self.nodes[0];
        let b = *self.nodes.last().unwrap();
        let mut worst = T::zero();
        for j in 0..=probes {
            let t = a + (b - a) * T::of(j) / T::of(probes);
            let d = (self.eval(t) - f(t)?).abs();
            if d > worst {
                worst = d;
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_an_analytic_function_to_machine_accuracy() {
        let f = |x: f64| Ok(x.sin() + 0.3 * (2.0 * x).cos());
        let c = Chebyshev1::fit(-1.5, 2.0, 24, f).unwrap();
        assert!(c.max_deviation(f, 640).unwrap() < 1e-13);
        // exact at a node
        let xn = c.nodes[5];
        assert_eq!(c.eval(xn), c.values[5]);
    }

    #[test]
    fn fit_failure_propagates() {
        let f = |x: f64| {
            if x > 0.9 {
                Err(crate::error::Error::InvalidParams("probe".into()))
            } else {
                Ok(x)
            }
        };
        assert!(Chebyshev1::fit(0.0, 1.0, 8, f).is_err());
    }
}
