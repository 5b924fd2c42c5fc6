//! Dense least squares and small symmetric eigenproblems.
//!
//! The fits in this crate are small (at most a few hundred rows, ≤ 64
//! columns), so a pivoted Householder QR and a cyclic Jacobi sweep cover all
//! needs without pulling in a linear algebra dependency, and both stay
//! generic over the scalar.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense matrix.
#[derive(Debug, Clone)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Mat { rows: r, cols: c, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for j in 0..self.cols {
                    acc = acc + self.get(i, j) * x[j];
                }
                acc
            })
            .collect()
    }
}

/// Result of a pivoted QR least-squares solve.
pub struct Lsq<T> {
    pub solution: Vec<T>,
    /// Numerical rank detected at `rtol` relative to the largest pivot.
    pub rank: usize,
}

/// Minimizes ‖A x − b‖₂ by Householder QR with column pivoting. For
/// rank-deficient systems the basic solution (free variables zero) is
/// returned together with the detected rank.
pub fn lstsq<T: Real>(a: &Mat<T>, b: &[T], rtol: T) -> Result<Lsq<T>> {
    let m = a.rows;
    let n = a.cols;
    if b.len() != m {
        return Err(Error::InvalidParams("rhs length mismatch".into()));
    }
    let mut r = a.clone();
    let mut qtb = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();

    // running squared column norms for pivot selection
    let mut colnorm: Vec<T> = (0..n)
        .map(|j| (0..m).fold(T::zero(), |acc, i| acc + r.get(i, j) * r.get(i, j)))
        .collect();

    let kmax = m.min(n);
    let mut rank = kmax;
    let mut first_pivot = T::zero();

    for k in 0..kmax {
        // pivot: column with largest remaining norm
        let (jbest, _) = colnorm
            .iter()
            .enumerate()
            .skip(k)
            .fold((k, T::neg_infinity()), |(jb, nb), (j, &nj)| {
                if nj > nb {
                    (j, nj)
                } else {
                    (jb, nb)
                }
            });
        if jbest != k {
            for i in 0..m {
                let t = r.get(i, k);
                r.set(i, k, r.get(i, jbest));
                r.set(i, jbest, t);
            }
            colnorm.swap(k, jbest);
            perm.swap(k, jbest);
        }

        // Householder vector for column k (rows k..m)
        let mut alpha = T::zero();
        for i in k..m {
            alpha = alpha + r.get(i, k) * r.get(i, k);
        }
        let alpha = alpha.sqrt();
        if k == 0 {
            first_pivot = alpha;
        }
        let tol_floor = rtol * first_pivot;
        if alpha <= tol_floor || alpha == T::zero() {
            rank = k;
            break;
        }
        let akk = r.get(k, k);
        let alpha = if akk > T::zero() { -alpha } else { alpha };
        let mut v = vec![T::zero(); m - k];
        v[0] = akk - alpha;
        for i in k + 1..m {
            v[i - k] = r.get(i, k);
        }
        let vtv = v.iter().fold(T::zero(), |acc, &x| acc + x * x);
        r.set(k, k, alpha);
        for i in k + 1..m {
            r.set(i, k, T::zero());
        }
        if vtv > T::zero() {
            let two = T::lit(2.0);
            for j in k + 1..n {
                let mut dot = T::zero();
                for i in k..m {
                    let rij = if i == k { v[0] } else { r.get(i, j) };
                    let _ = rij;
                    dot = dot + v[i - k] * r.get(i, j);
                }
                let f = two * dot / vtv;
                for i in k..m {
                    r.set(i, j, r.get(i, j) - f * v[i - k]);
                }
            }
            let mut dot = T::zero();
            for i in k..m {
                dot = dot + v[i - k] * qtb[i];
            }
            let f = two * dot / vtv;
            for i in k..m {
                qtb[i] = qtb[i] - f * v[i - k];
            }
        }
        // update remaining column norms
        for (j, nrm) in colnorm.iter_mut().enumerate().skip(k + 1) {
            let rkj = r.get(k, j);
            *nrm = (*nrm - rkj * rkj).max(T::zero());
        }
    }

    // back substitution on the leading rank x rank triangle
    let mut y = vec![T::zero(); n];
    for k in (0..rank).rev() {
        let mut acc = qtb[k];
        for j in k + 1..rank {
            acc = acc - r.get(k, j) * y[j];
        }
        y[k] = acc / r.get(k, k);
    }
    let mut x = vec![T::zero(); n];
    for (k, &p) in perm.iter().enumerate() {
        x[p] = y[k];
    }
    Ok(Lsq { solution: x, rank })
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations,
/// returned in decreasing order.
pub fn symmetric_eigenvalues<T: Real>(a: &Mat<T>) -> Vec<T> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut m = a.clone();
    let eps = T::epsilon() * T::lit(16.0);
    for _sweep in 0..64 {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off = off + m.get(i, j).abs();
            }
        }
        let scale = (0..n).fold(T::zero(), |acc, i| acc + m.get(i, i).abs());
        if off <= eps * (scale + T::one()) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq.abs() <= eps * (scale + T::one()) {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = {
                    let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = m.get(i, p);
                    let aiq = m.get(i, q);
                    m.set(i, p, c * aip - s * aiq);
                    m.set(i, q, s * aip + c * aiq);
                }
                for i in 0..n {
                    let api = m.get(p, i);
                    let aqi = m.get(q, i);
                    m.set(p, i, c * api - s * aqi);
                    m.set(q, i, s * api + c * aqi);
                }
            }
        }
    }
    let mut eig: Vec<T> = (0..n).map(|i| m.get(i, i)).collect();
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
    eig
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_solve_square() {
        let a = Mat::from_rows(vec![vec![2.0f64, 1.0], vec![1.0, 3.0]]);
        let sol = lstsq(&a, &[5.0, 10.0], 1e-12).unwrap();
        assert_eq!(sol.rank, 2);
        assert!((sol.solution[0] - 1.0).abs() < 1e-12);
        assert!((sol.solution[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn tall_least_squares_matches_normal_equations() {
        // fit y = a + b t over t = 0..5 with data from a=1, b=2 plus a bump
        let ts: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let rows: Vec<Vec<f64>> = ts.iter().map(|&t| vec![1.0, t]).collect();
        let mut b: Vec<f64> = ts.iter().map(|&t| 1.0 + 2.0 * t).collect();
        b[3] += 0.6;
        let a = Mat::from_rows(rows);
        let sol = lstsq(&a, &b, 1e-12).unwrap();
        // normal equations solved by hand: X'X = [[6,15],[15,55]], X'y adds bump
        let sxx = 6.0 * 55.0 - 15.0 * 15.0;
        let sy: f64 = b.iter().sum();
        let sty: f64 = ts.iter().zip(&b).map(|(t, y)| t * y).sum();
        let a0 = (55.0 * sy - 15.0 * sty) / sxx;
        let b0 = (6.0 * sty - 15.0 * sy) / sxx;
        assert!((sol.solution[0] - a0).abs() < 1e-10);
        assert!((sol.solution[1] - b0).abs() < 1e-10);
    }

    #[test]
    fn wide_rank_deficient_reports_rank() {
        // two identical columns
        let a = Mat::from_rows(vec![vec![1.0f64, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]);
        let sol = lstsq(&a, &[1.0, 2.0, 3.0], 1e-10).unwrap();
        assert_eq!(sol.rank, 1);
        let fit = a.mul_vec(&sol.solution);
        assert!((fit[0] - 1.0).abs() < 1e-10);
        assert!((fit[2] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn jacobi_eigenvalues() {
        let a = Mat::from_rows(vec![
            vec![2.0f64, 1.0, 0.0],
            vec![1.0, 2.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ]);
        let eig = symmetric_eigenvalues(&a);
        let sqrt2 = core::f64::consts::SQRT_2;
        assert!((eig[0] - (2.0 + sqrt2)).abs() < 1e-12);
        assert!((eig[1] - 2.0).abs() < 1e-12);
        assert!((eig[2] - (2.0 - sqrt2)).abs() < 1e-12);
    }
}
