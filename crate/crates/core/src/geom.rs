//! Tiny vector helpers on `&[T]` points in dimension 1..=3.

use crate::scalar::Real;

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc + *x * *y;
    }
    acc
}

pub fn norm_sq<T: Real>(a: &[T]) -> T {
    dot(a, a)
}

pub fn norm<T: Real>(a: &[T]) -> T {
    norm_sq(a).sqrt()
}

pub fn dist_sq<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        let d = *x - *y;
        acc = acc + d * d;
    }
    acc
}

pub fn dist<T: Real>(a: &[T], b: &[T]) -> T {
    dist_sq(a, b).sqrt()
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

pub fn axpy<T: Real>(a: &[T], t: T, d: &[T]) -> Vec<T> {
    a.iter().zip(d).map(|(x, w)| *x + t * *w).collect()
}

pub fn scale<T: Real>(a: &[T], t: T) -> Vec<T> {
    a.iter().map(|x| *x * t).collect()
}

/// Intersections of the ray `base + t·dir` (t > 0, `dir` unit) with the
/// origin-centred sphere of radius `r`, in increasing order.
pub fn sphere_crossings<T: Real>(base: &[T], dir: &[T], r: T) -> Vec<T> {
    let b = dot(base, dir);
    let c = norm_sq(base) - r * r;
    let disc = b * b - c;
    if disc < T::zero() {
        return Vec::new();
    }
    let sq = disc.sqrt();
    let mut out = Vec::new();
    for t in [-b - sq, -b + sq] {
        if t > T::zero() {
            out.push(t);
        }
    }
    out
}

/// Distance along the ray `base + t·dir` to its (unique) exit through the
/// sphere of radius `r`, assuming `|base| < r`.
pub fn exit_distance<T: Real>(base: &[T], dir: &[T], r: T) -> T {
    let b = dot(base, dir);
    let c = norm_sq(base) - r * r;
    debug_assert!(c < T::zero(), "ray base must be strictly inside the sphere");
    -b + (b * b - c).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_from_center_is_radius() {
        let x = [0.0f64, 0.0];
        let d = [1.0, 0.0];
        assert!((exit_distance(&x, &d, 2.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn crossings_off_center() {
        let x = [0.5f64];
        let d = [1.0];
        let c = sphere_crossings(&x, &d, 2.0);
        assert_eq!(c.len(), 1);
        assert!((c[0] - 1.5).abs() < 1e-15);
        let d = [-1.0];
        let c = sphere_crossings(&x, &d, 2.0);
        assert!((c[0] - 2.5).abs() < 1e-15);
        // ray starting outside pointing away misses
        let x = [3.0f64];
        let d = [1.0];
        assert!(sphere_crossings(&x, &d, 2.0).is_empty());
        // pointing back through: two crossings
        let d = [-1.0];
        let c = sphere_crossings(&x, &d, 2.0);
        assert_eq!(c.len(), 2);
        assert!((c[0] - 1.0).abs() < 1e-15 && (c[1] - 5.0).abs() < 1e-15);
    }
}
