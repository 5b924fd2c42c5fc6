//! Evaluation grids: Chebyshev-type tensor point sets on the cube inscribed
//! in a ball, used for operator sampling, polynomial fitting, and sup-norm
//! estimates. All enumeration orders are lexicographic in the tuple index,
//! so grids are deterministic and reports are byte-stable.

use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Points per axis for each supported dimension. The defaults give 33, 13²,
/// and 9³ total points; the counts resolve polynomial fits up to the degrees
/// exercised by the acceptance suite with comfortable margin.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub points_1d: usize,
    pub points_2d: usize,
    pub points_3d: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { points_1d: 33, points_2d: 13, points_3d: 9 }
    }
}

impl GridConfig {
    pub fn per_axis(&self, n: usize) -> usize {
        match n {
            1 => self.points_1d,
            2 => self.points_2d,
            _ => self.points_3d,
        }
    }
}

/// Chebyshev–Gauss nodes scaled to (−half_width, half_width), increasing.
/// All nodes are strictly interior.
pub fn chebyshev_nodes<T: Real>(m: usize, half_width: T) -> Vec<T> {
    assert!(m >= 1);
    let mut out: Vec<T> = (0..m)
        .map(|i| {
            let angle = T::PI() * (T::lit(2.0) * T::of(i) + T::one()) / (T::lit(2.0) * T::of(m));
            half_width * angle.cos()
        })
        .collect();
    out.reverse();
    out
}

/// Tensor grid over the cube inscribed in the ball of the given radius
/// (half-width radius/√n per axis), lexicographic in the index tuple.
pub fn inscribed_cube_grid<T: Real>(n: usize, per_axis: usize, radius: T) -> Vec<Vec<T>> {
    let half = radius / T::of(n).sqrt();
    let axis = chebyshev_nodes(per_axis, half);
    let total = per_axis.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let mut idx = flat;
        let mut p = vec![T::zero(); n];
        for d in (0..n).rev() {
            p[d] = axis[idx % per_axis];
            idx /= per_axis;
        }
        out.push(p);
    }
    out
}

/// The default evaluation grid for a ball of the given radius.
pub fn default_grid<T: Real>(n: usize, radius: T, cfg: &GridConfig) -> Vec<Vec<T>> {
    inscribed_cube_grid(n, cfg.per_axis(n), radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom;

    #[test]
    fn nodes_are_interior_symmetric_and_increasing() {
        let nodes = chebyshev_nodes::<f64>(33, 1.0);
        assert_eq!(nodes.len(), 33);
        assert!(nodes.windows(2).all(|p| p[0] < p[1]));
        assert!(nodes.iter().all(|x| x.abs() < 1.0));
        // odd count has the center node
        assert!(nodes[16].abs() < 1e-15);
        assert!((nodes[0] + nodes[32]).abs() < 1e-15);
    }

    #[test]
    fn tensor_grid_sits_inside_the_ball() {
        for n in 1..=3usize {
            let g = default_grid::<f64>(n, 1.0, &GridConfig::default());
            let expect = GridConfig::default().per_axis(n).pow(n as u32);
            assert_eq!(g.len(), expect);
            assert!(g.iter().all(|p| geom::norm(p) < 1.0));
        }
    }

    #[test]
    fn lexicographic_enumeration() {
        let g = inscribed_cube_grid::<f64>(2, 3, 1.0);
        assert_eq!(g.len(), 9);
        // first coordinate varies slowest
        assert_eq!(g[0][0], g[1][0]);
        assert_eq!(g[0][0], g[2][0]);
        assert!(g[3][0] > g[2][0]);
        assert_eq!(g[0][1], g[3][1]);
    }
}
