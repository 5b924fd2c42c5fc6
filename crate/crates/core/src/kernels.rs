//! Kernels for the fractional Laplacian on ℝⁿ and on balls: the Riesz
//! kernel |x−y|^{−n−2s}, its x-derivatives at the origin, the order-k Taylor
//! remainder that powers the growth-compensated operator, and the Poisson
//! and Green kernels of a ball.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geom;
use crate::multiindex::MultiIndex;
use crate::quadrature::{self, QuadratureConfig, RadialEnd};
use crate::scalar::Real;
use crate::special;

/// Highest kernel derivative order handled symbolically.
pub const DERIVATIVE_ORDER_CAP: usize = 4;

/// Above this ratio |x|/|y| the Taylor remainder is computed by plain
/// subtraction; below it, by the integral form (the subtraction loses about
/// k·log₁₀(|y|/|x|) digits, the integral form needs the segment from −y to
/// x−y to stay away from 0).
const REMAINDER_ROUTE_SWITCH: f64 = 0.9;

/// Dimension, order s ∈ (0,1), compensation order k, and whether kernels
/// carry the normalization constant c(n,s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracParams<T> {
    pub n: usize,
    pub s: T,
    pub k: usize,
    pub normalized: bool,
}

impl<T: Real> FracParams<T> {
    pub fn new(n: usize, s: T, k: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidParams(format!(
                "dimension {} not supported (want 1, 2, or 3)",
                n
            )));
        }
        if !(s > T::zero() && s < T::one()) || !s.is_finite() {
            return Err(Error::InvalidParams(format!(
                "order s = {} outside (0, 1)",
                s.as_f64()
            )));
        }
        Ok(FracParams { n, s, k, normalized: true })
    }

    pub fn unnormalized(mut self) -> Self {
        self.normalized = false;
        self
    }

    /// c(n,s) when normalized, 1 otherwise.
    pub fn normalization(&self) -> T {
        if self.normalized {
            special::riesz_normalization(self.n, self.s)
        } else {
            T::one()
        }
    }

    /// Kernel exponent n + 2s.
    pub fn kernel_power(&self) -> T {
        T::of(self.n) + T::lit(2.0) * self.s
    }

    /// Remainder weight exponent n + 2s + k.
    pub fn tail_power(&self) -> T {
        self.kernel_power() + T::of(self.k)
    }

    /// Strict upper bound 2s + k on admissible growth exponents.
    pub fn growth_bound(&self) -> T {
        T::lit(2.0) * self.s + T::of(self.k)
    }

    pub fn admits_growth(&self, g: T) -> bool {
        g < self.growth_bound()
    }

    /// Degree of the polynomial ambiguity the compensated operator leaves
    /// undetermined: k for s ≤ 1/2, k + 1 for s > 1/2.
    pub fn mod_poly_degree(&self) -> usize {
        if self.s <= T::lit(0.5) {
            self.k
        } else {
            self.k + 1
        }
    }
}

/// |x−y|^{−n−2s}, times c(n,s) when the parameters are normalized.
pub fn riesz_kernel<T: Real>(params: &FracParams<T>, x: &[T], y: &[T]) -> Result<T> {
    check_point(params, x)?;
    check_point(params, y)?;
    let d2 = geom::dist_sq(x, y);
    if d2 == T::zero() {
        return Err(Error::CoincidentPoints);
    }
    let p = params.kernel_power();
    Ok(params.normalization() * d2.powf(-p / T::lit(2.0)))
}

/// ∂^α_x |x−y|^{−n−2s} at x = 0 (times c(n,s) when normalized), computed
/// symbolically. Orders above [`DERIVATIVE_ORDER_CAP`] are refused.
pub fn kernel_x_derivative<T: Real>(
    params: &FracParams<T>,
    alpha: &MultiIndex,
    y: &[T],
) -> Result<T> {
    alpha.checked_dim(params.n)?;
    check_point(params, y)?;
    if alpha.order() > DERIVATIVE_ORDER_CAP {
        return Err(Error::UnsupportedOrder { order: alpha.order(), cap: DERIVATIVE_ORDER_CAP });
    }
    let y2 = geom::norm_sq(y);
    if y2 == T::zero() {
        return Err(Error::CoincidentPoints);
    }
    let p = params.kernel_power();

    // Terms c · Π z_i^{m_i} · |z|^{−(p+2j)} in z = x − y, closed under ∂_{x_l}:
    //   ∂_l z_i^{m_i}    = m_i z_i^{m_i−1} δ_{il}
    //   ∂_l |z|^{−q}     = −q z_l |z|^{−q−2}
    let mut terms: BTreeMap<(MultiIndex, u32), T> = BTreeMap::new();
    terms.insert((MultiIndex::zero(params.n), 0), T::one());
    for l in 0..params.n {
        for _ in 0..alpha.0[l] {
            let mut next: BTreeMap<(MultiIndex, u32), T> = BTreeMap::new();
            for ((m, j), c) in &terms {
                if m.0[l] > 0 {
                    let e = next.entry((reduce(m, l), *j)).or_insert_with(T::zero);
                    *e = *e + *c * T::of(m.0[l] as usize);
                }
                let mut raised = m.clone();
                raised.0[l] += 1;
                let q = p + T::lit(2.0) * T::of(*j as usize);
                let entry = next.entry((raised, *j + 1)).or_insert_with(T::zero);
                *entry = *entry - *c * q;
            }
            terms = next;
        }
    }

    // Evaluate at x = 0, where z = −y.
    let mut acc = T::zero();
    for ((m, j), c) in &terms {
        let mut mono = T::one();
        for (yi, &mi) in y.iter().zip(&m.0) {
            mono = mono * (-*yi).powi(mi as i32);
        }
        let q = p + T::lit(2.0) * T::of(*j as usize);
        acc = acc + *c * mono * y2.powf(-q / T::lit(2.0));
    }
    Ok(params.normalization() * acc)
}

fn reduce(m: &MultiIndex, l: usize) -> MultiIndex {
    let mut out = m.clone();
    out.0[l] -= 1;
    out
}

/// Order-k Taylor remainder of the kernel in its first slot about 0:
/// Rem_k(x,y) = K(x,y) − Σ_{|α|≤k−1} x^α/α! · ∂^α_x K(0,y). Two routes:
/// plain subtraction when |x| is comparable to |y|, and the integral form
/// of the remainder when |x| < |y| with margin, where subtraction would
/// cancel catastrophically.
pub fn taylor_remainder<T: Real>(params: &FracParams<T>, x: &[T], y: &[T]) -> Result<T> {
    check_point(params, x)?;
    check_point(params, y)?;
    if params.k == 0 {
        return riesz_kernel(params, x, y);
    }
    let rx = geom::norm(x);
    let ry = geom::norm(y);
    if ry == T::zero() {
        return Err(Error::CoincidentPoints);
    }
    if rx == T::zero() {
        return Ok(T::zero());
    }
    if rx < T::lit(REMAINDER_ROUTE_SWITCH) * ry {
        remainder_integral_form(params, x, y)
    } else {
        remainder_by_subtraction(params, x, y)
    }
}

fn remainder_by_subtraction<T: Real>(params: &FracParams<T>, x: &[T], y: &[T]) -> Result<T> {
    let unnorm = FracParams { normalized: false, ..*params };
    let mut acc = riesz_kernel(&unnorm, x, y)?;
    for alpha in crate::multiindex::up_to_order(params.n, params.k - 1) {
        let d = kernel_x_derivative(&unnorm, &alpha, y)?;
        acc = acc - alpha.monomial(x) / T::lit(alpha.factorial()) * d;
    }
    Ok(params.normalization() * acc)
}

/// Remainder as (1/(k−1)!) ∫₀¹ (1−t)^{k−1} φ^(k)(t) dt with φ(t) = |tx−y|^{−p}.
/// The t-derivatives of φ close under the algebra of terms
/// c · |x|^{2b} (z·x)^a |z|^{−(p+2j)}, z = tx − y.
fn remainder_integral_form<T: Real>(params: &FracParams<T>, x: &[T], y: &[T]) -> Result<T> {
    let p = params.kernel_power();
    let k = params.k;

    // (coef, b, a, j), differentiated k times starting from the bare kernel.
    let mut terms: BTreeMap<(u32, u32, u32), T> = BTreeMap::new();
    terms.insert((0, 0, 0), T::one());
    for _ in 0..k {
        let mut next: BTreeMap<(u32, u32, u32), T> = BTreeMap::new();
        for ((b, a, j), c) in &terms {
            if *a > 0 {
                let e = next.entry((*b + 1, *a - 1, *j)).or_insert_with(T::zero);
                *e = *e + *c * T::of(*a as usize);
            }
            let q = p + T::lit(2.0) * T::of(*j as usize);
            let e = next.entry((*b, *a + 1, *j + 1)).or_insert_with(T::zero);
            *e = *e - *c * q;
        }
        terms = next;
    }

    let x2 = geom::norm_sq(x);
    let terms: Vec<((u32, u32, u32), T)> = terms.into_iter().collect();
    let phi_k = |t: T| {
        let z: Vec<T> = x.iter().zip(y).map(|(xi, yi)| t * *xi - *yi).collect();
        let zx = geom::dot(&z, x);
        let z2 = geom::norm_sq(&z);
        let mut acc = T::zero();
        for ((b, a, j), c) in &terms {
            let q = p + T::lit(2.0) * T::of(*j as usize);
            acc = acc + *c * x2.powi(*b as i32) * zx.powi(*a as i32) * z2.powf(-q / T::lit(2.0));
        }
        acc
    };

    let mut inv_fact = T::one();
    for i in 1..k {
        inv_fact = inv_fact / T::of(i);
    }
    let cfg = QuadratureConfig {
        rel_tol: T::lit(1e-13),
        abs_tol: T::lit(1e-290),
        ..QuadratureConfig::default()
    };
    let km1 = k as i32 - 1;
    let r = quadrature::integrate_interval(
        |t: T| (T::one() - t).powi(km1) * phi_k(t),
        T::zero(),
        T::one(),
        &[],
        &cfg,
    )?;
    Ok(params.normalization() * inv_fact * r.value)
}

/// The bounded factor in the far-field remainder: ψ(x,y) = −|y|^{n+2s+k} ·
/// Rem_k(x,y), defined for |x| < 1 ≤ 2 ≤ |y|.
pub fn psi<T: Real>(params: &FracParams<T>, x: &[T], y: &[T]) -> Result<T> {
    let rx = geom::norm(x);
    let ry = geom::norm(y);
    if rx >= T::one() {
        return Err(Error::OutOfDomain(format!(
            "psi wants |x| < 1, got |x| = {}",
            rx.as_f64()
        )));
    }
    if ry < T::lit(2.0) {
        return Err(Error::OutOfDomain(format!(
            "psi wants |y| >= 2, got |y| = {}",
            ry.as_f64()
        )));
    }
    let rem = taylor_remainder(params, x, y)?;
    Ok(-ry.powf(params.tail_power()) * rem)
}

/// Poisson kernel of the ball B_r: the exterior-to-interior reproducing
/// density C(n,s) ((r²−|x|²)/(|y|²−r²))^s |x−y|^{−n} for |x| < r < |y|.
pub fn poisson_kernel_ball<T: Real>(
    params: &FracParams<T>,
    r: T,
    x: &[T],
    y: &[T],
) -> Result<T> {
    check_ball_pair(params, r, x, y)?;
    let rx2 = geom::norm_sq(x);
    let ry2 = geom::norm_sq(y);
    let c = special::poisson_constant(params.n, params.s);
    let ratio = (r * r - rx2) / (ry2 - r * r);
    Ok(c * ratio.powf(params.s) * geom::dist(x, y).powi(-(params.n as i32)))
}

/// Gradient in x of the ball Poisson kernel, same domain restrictions.
pub fn poisson_kernel_gradient<T: Real>(
    params: &FracParams<T>,
    r: T,
    x: &[T],
    y: &[T],
) -> Result<Vec<T>> {
    check_ball_pair(params, r, x, y)?;
    let s = params.s;
    let nf = T::of(params.n);
    let rx2 = geom::norm_sq(x);
    let ry2 = geom::norm_sq(y);
    let c = special::poisson_constant(params.n, params.s);
    let inner = r * r - rx2;
    let outer = ry2 - r * r;
    let d2 = geom::dist_sq(x, y);
    let base = c * (inner / outer).powf(s) * d2.powf(-nf / T::lit(2.0));
    let grad = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            base * (-T::lit(2.0) * s * *xi / inner - nf * (*xi - *yi) / d2)
        })
        .collect();
    Ok(grad)
}

fn check_ball_pair<T: Real>(params: &FracParams<T>, r: T, x: &[T], y: &[T]) -> Result<()> {
    check_point(params, x)?;
    check_point(params, y)?;
    if !(r > T::zero()) {
        return Err(Error::InvalidParams(format!("radius {} not positive", r.as_f64())));
    }
    let rx = geom::norm(x);
    let ry = geom::norm(y);
    if rx >= r {
        return Err(Error::OutOfDomain(format!(
            "evaluation point |x| = {} not inside the ball of radius {}",
            rx.as_f64(),
            r.as_f64()
        )));
    }
    if ry <= r {
        return Err(Error::OutOfDomain(format!(
            "datum point |y| = {} not strictly outside the ball of radius {}",
            ry.as_f64(),
            r.as_f64()
        )));
    }
    Ok(())
}

/// Green function of B_r for the normalized operator:
/// κ(n,s) |x−y|^{2s−n} ∫₀^{r₀} t^{s−1} (1+t)^{−n/2} dt with
/// r₀ = (r²−|x|²)(r²−|y|²)/(r²|x−y|²). At s = 1/2 the inner integral has
/// elementary closed forms, used both as a fast path and as a cross-check
/// of the quadrature path.
pub fn green_ball<T: Real>(params: &FracParams<T>, r: T, x: &[T], y: &[T]) -> Result<T> {
    check_point(params, x)?;
    check_point(params, y)?;
    if !(r > T::zero()) {
        return Err(Error::InvalidParams(format!("radius {} not positive", r.as_f64())));
    }
    let rx = geom::norm(x);
    let ry = geom::norm(y);
    if rx >= r || ry >= r {
        return Err(Error::OutOfDomain(format!(
            "green_ball wants both points inside the ball: |x| = {}, |y| = {}, r = {}",
            rx.as_f64(),
            ry.as_f64(),
            r.as_f64()
        )));
    }
    let d2 = geom::dist_sq(x, y);
    if d2 == T::zero() {
        return Err(Error::CoincidentPoints);
    }
    let r0 = (r * r - rx * rx) * (r * r - ry * ry) / (r * r * d2);
    let inner = if params.s == T::lit(0.5) {
        green_profile_half(params.n, r0)
    } else {
        green_profile_quad(params.n, params.s, r0)?
    };
    let s = params.s;
    let nf = T::of(params.n);
    Ok(special::green_constant(params.n, s) * d2.powf((T::lit(2.0) * s - nf) / T::lit(2.0)) * inner)
}

fn green_profile_half<T: Real>(n: usize, r0: T) -> T {
    let root = r0.sqrt();
    match n {
        1 => T::lit(2.0) * (root + (T::one() + r0).sqrt()).ln(),
        2 => T::lit(2.0) * root.atan(),
        _ => T::lit(2.0) * (r0 / (T::one() + r0)).sqrt(),
    }
}

pub(crate) fn green_profile_quad<T: Real>(n: usize, s: T, r0: T) -> Result<T> {
    let cfg = QuadratureConfig {
        rel_tol: T::lit(1e-12),
        abs_tol: T::lit(1e-290),
        ..QuadratureConfig::default()
    };
    let half_n = T::of(n) / T::lit(2.0);
    let r = quadrature::integrate_radial(
        |t: T| t.powf(s - T::one()) * (T::one() + t).powf(-half_n),
        T::zero(),
        RadialEnd::At(r0),
        &[T::one()],
        Some(s - T::one()),
        &cfg,
    )?;
    Ok(r.value)
}

fn check_point<T: Real>(params: &FracParams<T>, x: &[T]) -> Result<()> {
    if x.len() != params.n {
        return Err(Error::InvalidParams(format!(
            "point has {} coordinates, expected {}",
            x.len(),
            params.n
        )));
    }
    Ok(())
}
