//! Adaptive quadrature: a Gauss–Kronrod 15(7) interval engine with
//! breakpoint-aware bisection, endpoint power transforms for algebraic
//! singularities, sphere rules for n ∈ {1, 2, 3}, and compositions over
//! balls, exteriors of balls, and the symmetrized principal value.
//!
//! All rules sample strictly interior nodes, so integrands may be undefined
//! at segment endpoints (0/0 limits, infinite tails after the 1/ρ map).
//! Every routine is deterministic: segment selection breaks ties by position
//! and no parallelism is used inside a single integral.

use crate::error::{Error, Result};
use crate::function::FunctionHandle;
use crate::geom;
use crate::multiindex::MultiIndex;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Tolerances and budgets. `split_radius` is the default principal-value
/// split; `tail_cut` is where exterior integrals switch from the direct
/// radial variable to the reciprocal one.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(
    serialize = "T: Serialize",
    deserialize = "T: serde::de::DeserializeOwned + Real"
))]
pub struct QuadratureConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_subdivisions: usize,
    pub split_radius: T,
    pub tail_cut: T,
}

impl<T: Real> Default for QuadratureConfig<T> {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: T::lit(1e-8),
            abs_tol: T::lit(1e-10),
            max_subdivisions: 2000,
            split_radius: T::lit(0.1),
            tail_cut: T::lit(1e3),
        }
    }
}

impl<T: Real> QuadratureConfig<T> {
    fn bound(&self, value: T) -> T {
        self.abs_tol.max(self.rel_tol * value.abs())
    }

    /// Same budgets with tolerances scaled by `c` (nested integrals run
    /// tighter than their parent).
    pub fn scaled_tol(&self, c: T) -> Self {
        QuadratureConfig {
            rel_tol: self.rel_tol * c,
            abs_tol: self.abs_tol * c,
            ..self.clone()
        }
    }
}

/// Estimate, error bound, work, and whether the tolerance was met. When
/// `converged` is false the value is still the best available estimate.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
    pub evals: usize,
    pub converged: bool,
}

impl<T: Real> QuadResult<T> {
    pub fn exact(value: T) -> Self {
        QuadResult { value, error: T::zero(), evals: 0, converged: true }
    }

    pub fn scaled(self, c: T) -> Self {
        QuadResult { value: c * self.value, error: c.abs() * self.error, ..self }
    }

    pub fn plus(self, other: QuadResult<T>) -> Self {
        QuadResult {
            value: self.value + other.value,
            error: self.error + other.error,
            evals: self.evals + other.evals,
            converged: self.converged && other.converged,
        }
    }
}

// --------------------------------------------------------- Gauss–Kronrod 15

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn check_finite<T: Real>(v: T, x: T) -> Result<T> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteSample { point: vec![x.as_f64()] })
    }
}

/// One 15-point Kronrod panel on [a, b] with the QUADPACK error estimate.
fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Result<(T, T)> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let hlgth = half * (b - a);
    let fc = check_finite(f(center), center)?;

    let mut resg = T::lit(WG[3]) * fc;
    let mut resk = T::lit(WGK[7]) * fc;
    let mut resabs = resk.abs();
    let mut fv = [T::zero(); 14];
    for j in 0..7 {
        let dx = hlgth * T::lit(XGK[j]);
        let x1 = center - dx;
        let x2 = center + dx;
        let f1 = check_finite(f(x1), x1)?;
        let f2 = check_finite(f(x2), x2)?;
        fv[j] = f1;
        fv[7 + j] = f2;
        let fsum = f1 + f2;
        if j % 2 == 1 {
            resg += T::lit(WG[j / 2]) * fsum;
        }
        resk += T::lit(WGK[j]) * fsum;
        resabs += T::lit(WGK[j]) * (f1.abs() + f2.abs());
    }
    let reskh = resk * half;
    let mut resasc = T::lit(WGK[7]) * (fc - reskh).abs();
    for j in 0..7 {
        resasc += T::lit(WGK[j]) * ((fv[j] - reskh).abs() + (fv[7 + j] - reskh).abs());
    }
    let value = resk * hlgth;
    resabs *= hlgth.abs();
    resasc *= hlgth.abs();
    let mut err = ((resk - resg) * hlgth).abs();
    if resasc != T::zero() && err != T::zero() {
        err = resasc * T::one().min((T::lit(200.0) * err / resasc).powf(T::lit(1.5)));
    }
    let tiny = T::min_positive_value() / T::epsilon();
    if resabs > tiny {
        err = err.max(T::epsilon() * T::lit(50.0) * resabs);
    }
    Ok((value, err))
}

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    err: T,
}

/// Adaptive integral of `f` over [a, b]. Interior `breakpoints` become
/// initial segment boundaries so discontinuities never sit inside a panel.
pub fn integrate_interval<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    breakpoints: &[T],
    cfg: &QuadratureConfig<T>,
) -> Result<QuadResult<T>> {
    if a == b {
        return Ok(QuadResult::exact(T::zero()));
    }
    assert!(a < b, "integrate_interval wants an oriented interval");

    let mut cuts: Vec<T> = breakpoints
        .iter()
        .copied()
        .filter(|c| *c > a && *c < b)
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| *x == *y);

    let mut segs: Vec<Segment<T>> = Vec::with_capacity(cuts.len() + 1);
    let mut evals = 0usize;
    let mut lo = a;
    for hi in cuts.into_iter().chain(core::iter::once(b)) {
        let (value, err) = gk15(&f, lo, hi)?;
        evals += 15;
        segs.push(Segment { a: lo, b: hi, value, err });
        lo = hi;
    }

    loop {
        let total: T = segs.iter().fold(T::zero(), |acc, s| acc + s.value);
        let total_err: T = segs.iter().fold(T::zero(), |acc, s| acc + s.err);
        if total_err <= cfg.bound(total) {
            return Ok(QuadResult { value: total, error: total_err, evals, converged: true });
        }
        if segs.len() >= cfg.max_subdivisions {
            return Ok(QuadResult { value: total, error: total_err, evals, converged: false });
        }
        let mut worst = 0usize;
        for (i, s) in segs.iter().enumerate() {
            if s.err > segs[worst].err {
                worst = i;
            }
        }
        let Segment { a: sa, b: sb, .. } = segs[worst];
        let mid = T::lit(0.5) * (sa + sb);
        if mid <= sa || mid >= sb {
            // interval at floating point resolution; accept what we have
            let total_err: T = segs.iter().fold(T::zero(), |acc, s| acc + s.err);
            return Ok(QuadResult { value: total, error: total_err, evals, converged: false });
        }
        let (v1, e1) = gk15(&f, sa, mid)?;
        let (v2, e2) = gk15(&f, mid, sb)?;
        evals += 30;
        segs[worst] = Segment { a: sa, b: mid, value: v1, err: e1 };
        segs.push(Segment { a: mid, b: sb, value: v2, err: e2 });
    }
}

/// ∫_a^b f when f ~ C (ρ − a)^γ near a with γ ∈ (−1, 0). The substitution
/// ρ = a + (b−a) τ^{1/(1+γ)} turns the integrand bounded; outside that γ
/// range the plain engine is used directly.
pub fn integrate_left_power<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    gamma: T,
    cfg: &QuadratureConfig<T>,
) -> Result<QuadResult<T>> {
    if gamma <= T::lit(-1.0) {
        return Err(Error::QuadratureFailure(format!(
            "endpoint exponent {} is not integrable",
            gamma.as_f64()
        )));
    }
    if gamma >= T::zero() || a == b {
        return integrate_interval(f, a, b, &[], cfg);
    }
    let len = b - a;
    let c = T::one() / (T::one() + gamma);
    let g = |tau: T| {
        let rho = a + len * tau.powf(c);
        f(rho) * len * c * tau.powf(c - T::one())
    };
    let r = integrate_interval(g, T::zero(), T::one(), &[], cfg)?;
    Ok(r)
}

/// Where a radial integral ends: a finite radius, or infinity with a declared
/// decay margin η (the radial integrand, measure included, is O(ρ^{−1−η})).
#[derive(Debug, Clone, Copy)]
pub enum RadialEnd<T> {
    At(T),
    Infinity { decay: T },
}

/// Radial workhorse: ∫_a^· f(ρ) dρ with optional left endpoint exponent
/// (`f ~ (ρ−a)^γ`), interior breakpoints, and an optional infinite tail
/// handled by the reciprocal substitution t = 1/ρ.
pub fn integrate_radial<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    end: RadialEnd<T>,
    breakpoints: &[T],
    left_gamma: Option<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<QuadResult<T>> {
    let mut cuts: Vec<T> = breakpoints.iter().copied().filter(|c| *c > a).collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| *x == *y);

    let finite_end = match end {
        RadialEnd::At(b) => b,
        RadialEnd::Infinity { decay } => {
            if decay <= T::zero() {
                return Err(Error::NonIntegrableTail { eta: decay.as_f64() });
            }
            // direct integration out to the tail cut, reciprocal beyond
            let mut far = cfg.tail_cut.max(a * T::lit(2.0)).max(T::one());
            if let Some(&last) = cuts.last() {
                far = far.max(last * T::lit(2.0));
            }
            far
        }
    };
    cuts.retain(|c| *c < finite_end);

    // dyadic pre-cuts: wide ranges otherwise put hundreds of length scales
    // inside one panel, where a narrow feature can sit between the nodes and
    // an error estimate never sees it
    if a > T::zero() {
        let mut c = a + a;
        while c < finite_end && cuts.len() < 200 {
            cuts.push(c);
            c = c + c;
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cuts.dedup_by(|x, y| *x == *y);
    }

    let mut total = QuadResult::exact(T::zero());

    // near zone, possibly with a singular left endpoint
    let first_end = cuts.first().copied().unwrap_or(finite_end);
    let near = match left_gamma {
        Some(g) if g < T::zero() => integrate_left_power(&f, a, first_end, g, cfg)?,
        _ => integrate_interval(&f, a, first_end, &[], cfg)?,
    };
    total = total.plus(near);

    // mid zone across remaining breakpoints
    if first_end < finite_end {
        let mid = integrate_interval(&f, first_end, finite_end, &cuts, cfg)?;
        total = total.plus(mid);
    }

    // far zone via t = 1/ρ; the integrand becomes ~ t^{η−1} at t = 0
    if let RadialEnd::Infinity { decay } = end {
        let g = |t: T| f(T::one() / t) / (t * t);
        let tmax = T::one() / finite_end;
        let far = integrate_left_power(g, T::zero(), tmax, decay - T::one(), cfg)?;
        total = total.plus(far);
    }
    Ok(total)
}

// ------------------------------------------------------------- sphere rules

/// Integral over the unit sphere S^{n−1} of a per-direction evaluator which
/// itself reports a value and an error (typically an inner radial integral).
/// n = 1 sums the two directions; n = 2 runs the adaptive engine in the
/// angle, honouring `kinks` (angles where the integrand loses smoothness,
/// e.g. tangency directions of interior discontinuity spheres); n = 3 uses a
/// Gauss–Legendre × trapezoid product rule with one refinement step for the
/// error estimate.
pub fn integrate_sphere<T, G>(
    n: usize,
    g: G,
    kinks: &[T],
    cfg: &QuadratureConfig<T>,
) -> Result<QuadResult<T>>
where
    T: Real,
    G: Fn(&[T]) -> Result<QuadResult<T>>,
{
    match n {
        1 => {
            let plus = g(&[T::one()])?;
            let minus = g(&[-T::one()])?;
            Ok(plus.plus(minus))
        }
        2 => sphere_2d(&g, kinks, cfg),
        3 => sphere_3d(&g, cfg),
        _ => Err(Error::InvalidParams(format!("sphere rule for n = {n} not available"))),
    }
}

/// Angles (mod 2π) at which rays from `base` become tangent to the
/// origin-centred sphere of radius `b`; the number of ray crossings, and
/// with it the smoothness of direction-wise integrals, changes there.
pub fn tangency_angles<T: Real>(base: &[T], b: T) -> Vec<T> {
    debug_assert_eq!(base.len(), 2);
    let d = geom::norm(base);
    if d <= b || b <= T::zero() {
        return Vec::new();
    }
    let phi = base[1].atan2(base[0]);
    let alpha = (b / d).asin();
    let two_pi = T::PI() * T::lit(2.0);
    [phi + T::PI() - alpha, phi + T::PI() + alpha]
        .into_iter()
        .map(|t| {
            let mut t = t % two_pi;
            if t < T::zero() {
                t += two_pi;
            }
            t
        })
        .collect()
}

fn sphere_2d<T, G>(g: &G, kinks: &[T], cfg: &QuadratureConfig<T>) -> Result<QuadResult<T>>
where
    T: Real,
    G: Fn(&[T]) -> Result<QuadResult<T>>,
{
    use core::cell::RefCell;
    let two_pi = T::PI() * T::lit(2.0);
    // the engine sees a scalar integrand; inner accounting rides alongside
    let state: RefCell<(usize, T, bool, Option<Error>)> =
        RefCell::new((0, T::zero(), true, None));
    let f = |theta: T| -> T {
        match g(&[theta.cos(), theta.sin()]) {
            Ok(r) => {
                let mut st = state.borrow_mut();
                st.0 += r.evals;
                st.1 = st.1.max(r.error);
                st.2 &= r.converged;
                r.value
            }
            Err(e) => {
                state.borrow_mut().3 = Some(e);
                T::nan()
            }
        }
    };
    let angular = integrate_interval(f, T::zero(), two_pi, kinks, cfg);
    let (inner_evals, max_inner_err, inner_ok, failure) = state.into_inner();
    if let Some(e) = failure {
        return Err(e);
    }
    let r = angular?;
    let inner_err = two_pi * max_inner_err;
    Ok(QuadResult {
        value: r.value,
        error: r.error + inner_err,
        evals: inner_evals.max(r.evals),
        converged: r.converged && inner_ok,
    })
}

/// Product rule points (direction, weight) with `mp` polar Gauss–Legendre
/// nodes in cos θ and `ma` azimuthal trapezoid nodes.
fn sphere_3d_rule<T: Real>(mp: usize, ma: usize) -> Vec<(Vec<T>, T)> {
    let (nodes, weights) = gauss_legendre::<T>(mp);
    let two_pi = T::PI() * T::lit(2.0);
    let wphi = two_pi / T::of(ma);
    let mut out = Vec::with_capacity(mp * ma);
    for (c, wc) in nodes.iter().zip(&weights) {
        let sin_theta = (T::one() - *c * *c).max(T::zero()).sqrt();
        for j in 0..ma {
            let phi = two_pi * T::of(j) / T::of(ma);
            out.push((
                vec![sin_theta * phi.cos(), sin_theta * phi.sin(), *c],
                *wc * wphi,
            ));
        }
    }
    out
}

fn sphere_3d<T, G>(g: &G, _cfg: &QuadratureConfig<T>) -> Result<QuadResult<T>>
where
    T: Real,
    G: Fn(&[T]) -> Result<QuadResult<T>>,
{
    // base rule exact through spherical-harmonic degree 17, refinement
    // through degree 25; their difference is the angular error estimate
    let apply = |mp: usize, ma: usize| -> Result<QuadResult<T>> {
        let mut acc = QuadResult::exact(T::zero());
        for (omega, w) in sphere_3d_rule::<T>(mp, ma) {
            acc = acc.plus(g(&omega)?.scaled(w));
        }
        Ok(acc)
    };
    let base = apply(9, 18)?;
    let fine = apply(13, 26)?;
    let angular_err = (fine.value - base.value).abs();
    Ok(QuadResult {
        value: fine.value,
        error: fine.error + angular_err,
        evals: base.evals + fine.evals,
        converged: fine.converged,
    })
}

// ------------------------------------------------------------ compositions

/// ∫_{B_radius(center)} f(y) dy in polar coordinates about the center.
/// `origin_breaks` are radii of origin-centred discontinuity spheres of f;
/// `center_gamma` declares f ~ |y − center|^γ at the center when singular.
pub fn integrate_ball<T, F>(
    f: F,
    center: &[T],
    radius: T,
    origin_breaks: &[T],
    center_gamma: Option<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<QuadResult<T>>
where
    T: Real,
    F: Fn(&[T]) -> T + Sync,
{
    let n = center.len();
    let nm1 = T::of(n - 1);
    let gamma_eff = center_gamma.map(|gam| gam + nm1);
    let mut kinks: Vec<T> = Vec::new();
    if n == 2 {
        for &b in origin_breaks {
            kinks.extend(tangency_angles(center, b));
        }
    }
    let res = integrate_sphere(
        n,
        |omega: &[T]| {
            let radial = |rho: T| {
                let y = geom::axpy(center, rho, omega);
                f(&y) * rho.powf(nm1)
            };
            let mut cuts: Vec<T> = Vec::new();
            for &b in origin_breaks {
                cuts.extend(geom::sphere_crossings(center, omega, b));
            }
            integrate_radial(radial, T::zero(), RadialEnd::At(radius), &cuts, gamma_eff, cfg)
        },
        &kinks,
        cfg,
    )?;
    Ok(res)
}

/// ∫_{|y| ≥ radius} f(y) dy over the exterior of the origin-centred ball.
/// `decay` is the margin η with |f(y)| ≲ |y|^{−n−η} for large |y|; the tail
/// is mapped to a finite interval exactly, so slow decay costs nothing extra.
pub fn integrate_exterior<T, F>(
    f: F,
    n: usize,
    radius: T,
    decay: T,
    origin_breaks: &[T],
    cfg: &QuadratureConfig<T>,
) -> Result<QuadResult<T>>
where
    T: Real,
    F: Fn(&[T]) -> T + Sync,
{
    let center = vec![T::zero(); n];
    integrate_exterior_at(f, &center, radius, decay, origin_breaks, None, cfg)
}

/// ∫_{|y − center| ≥ radius} f(y) dy in polar coordinates about the center.
/// `origin_breaks` are radii of origin-centred discontinuity spheres of f,
/// `inner_gamma` declares f ~ (|y − center| − radius)^γ at the inner sphere
/// when f blows up there, and `decay` is the tail margin as in
/// [`integrate_exterior`].
pub fn integrate_exterior_at<T, F>(
    f: F,
    center: &[T],
    radius: T,
    decay: T,
    origin_breaks: &[T],
    inner_gamma: Option<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<QuadResult<T>>
where
    T: Real,
    F: Fn(&[T]) -> T + Sync,
{
    assert!(radius > T::zero(), "exterior integrals start at a positive radius");
    let n = center.len();
    let nm1 = T::of(n - 1);
    let mut kinks: Vec<T> = Vec::new();
    if n == 2 {
        for &b in origin_breaks {
            kinks.extend(tangency_angles(center, b));
        }
    }
    integrate_sphere(
        n,
        |omega: &[T]| {
            let radial = |rho: T| {
                let y = geom::axpy(center, rho, omega);
                f(&y) * rho.powf(nm1)
            };
            let mut cuts: Vec<T> = Vec::new();
            for &b in origin_breaks {
                cuts.extend(geom::sphere_crossings(center, omega, b));
            }
            integrate_radial(
                radial,
                radius,
                RadialEnd::Infinity { decay },
                &cuts,
                inner_gamma,
                cfg,
            )
        },
        &kinks,
        cfg,
    )
}

/// Symmetrized principal value
/// −½ ∫_{B_δ} (u(x+z) + u(x−z) − 2u(x)) |z|^{−n−2s} dz with δ from the
/// configuration. Needs two declared derivatives so the second difference
/// is O(|z|²) and the singularity cancels.
pub fn pv_second_difference<T: Real>(
    u: &FunctionHandle<T>,
    x: &[T],
    s: T,
    cfg: &QuadratureConfig<T>,
) -> Result<QuadResult<T>> {
    pv_second_difference_radius(u, x, s, cfg.split_radius, cfg)
}

pub fn pv_second_difference_radius<T: Real>(
    u: &FunctionHandle<T>,
    x: &[T],
    s: T,
    delta: T,
    cfg: &QuadratureConfig<T>,
) -> Result<QuadResult<T>> {
    if u.smoothness() < 2 {
        return Err(Error::InsufficientSmoothness { required: 2, declared: u.smoothness() });
    }
    let n = x.len();
    let ux = u.eval(x);
    let ux2 = T::lit(2.0) * ux;
    let half = T::lit(0.5);
    let two = T::lit(2.0);

    // subtract the local quadratic model and integrate it in closed form; the
    // split is exact for any model matrix, its quality only controls how much
    // of the second difference is left to the numeric part
    let hess = local_hessian(u, x, delta);
    let two_m_two_s = two - two * s;
    let quad_mass = delta.powf(two_m_two_s) / two_m_two_s;

    // below v_a the computed second difference is dominated by rounding noise
    // (independent of ρ), and v^{−1−s} amplifies that into a divergent tail;
    // the model-subtracted mass there is negligible, so start at v_a and
    // carry a bound for both omissions in the error
    let v_a = delta * delta * T::epsilon().sqrt();
    let noise_bound = T::epsilon() * (T::one() + two * ux.abs()) * v_a.powf(-s) / s;

    let mut kinks: Vec<T> = Vec::new();
    if n == 2 {
        for &b in u.breakpoints() {
            for a in tangency_angles(x, b) {
                kinks.push(a);
                // the reflected ray kinks at the opposite angle
                kinks.push((a + T::PI()) % (T::PI() * T::lit(2.0)));
            }
        }
    }
    let res = integrate_sphere(
        n,
        |omega: &[T]| {
            let mut q = T::zero();
            for i in 0..n {
                for j in 0..n {
                    q += hess[i][j] * omega[i] * omega[j];
                }
            }
            // v = ρ² turns ∫ D ρ^{−1−2s} dρ into ½ ∫ (D/v) v^{−s} dv, and
            // with the quadratic removed the integrand is O(v^{1−s})
            let h = |v: T| {
                let rho = v.sqrt();
                let d = u.eval(&geom::axpy(x, rho, omega)) + u.eval(&geom::axpy(x, -rho, omega))
                    - ux2
                    - v * q;
                (d / v) * v.powf(-s)
            };
            let neg_dir: Vec<T> = omega.iter().map(|c| -*c).collect();
            let mut cuts: Vec<T> = Vec::new();
            for &b in u.breakpoints() {
                for dir in [omega, neg_dir.as_slice()] {
                    for t in geom::sphere_crossings(x, dir, b) {
                        if t < delta && t * t > v_a {
                            cuts.push(t * t);
                        }
                    }
                }
            }
            let mut cfg_dir = cfg.clone();
            cfg_dir.abs_tol = cfg.abs_tol.max(noise_bound);
            let r = integrate_radial(
                h,
                v_a,
                RadialEnd::At(delta * delta),
                &cuts,
                None,
                &cfg_dir,
            )?;
            let mut out = r.scaled(half);
            out.value += q * quad_mass;
            out.error += noise_bound;
            Ok(out)
        },
        &kinks,
        cfg,
    )?;
    Ok(res.scaled(-half))
}

/// Second-derivative matrix at x, from declared derivatives when available
/// and from central differences at a rounding-balanced step otherwise. The
/// samples stay inside B_{δ/√2}(x), which the caller already treats as a
/// smooth neighborhood.
fn local_hessian<T: Real>(u: &FunctionHandle<T>, x: &[T], delta: T) -> Vec<Vec<T>> {
    let n = x.len();
    let mut hess = vec![vec![T::zero(); n]; n];
    if u.has_deriv() {
        let mut ok = true;
        'exact: for i in 0..n {
            for j in i..n {
                let mut comps = vec![0u32; n];
                comps[i] += 1;
                comps[j] += 1;
                match u.deriv(&MultiIndex::new(comps), x) {
                    Ok(v) => {
                        hess[i][j] = v;
                        hess[j][i] = v;
                    }
                    Err(_) => {
                        ok = false;
                        break 'exact;
                    }
                }
            }
        }
        if ok {
            return hess;
        }
    }
    let step = (T::epsilon().powf(T::lit(0.25)) * (T::one() + geom::norm(x)))
        .min(delta * T::lit(0.5));
    let ux2 = T::lit(2.0) * u.eval(x);
    let quarter = T::lit(0.25);
    for i in 0..n {
        let mut p = x.to_vec();
        p[i] += step;
        let mut m = x.to_vec();
        m[i] -= step;
        hess[i][i] = (u.eval(&p) + u.eval(&m) - ux2) / (step * step);
        for j in i + 1..n {
            let mut pp = x.to_vec();
            pp[i] += step;
            pp[j] += step;
            let mut mm = x.to_vec();
            mm[i] -= step;
            mm[j] -= step;
            let mut pm = x.to_vec();
            pm[i] += step;
            pm[j] -= step;
            let mut mp = x.to_vec();
            mp[i] -= step;
            mp[j] += step;
            let mixed =
                (u.eval(&pp) + u.eval(&mm) - u.eval(&pm) - u.eval(&mp)) * quarter / (step * step);
            hess[i][j] = mixed;
            hess[j][i] = mixed;
        }
    }
    hess
}

/// Gauss–Legendre nodes and weights on [−1, 1], by Newton iteration on the
/// three-term recurrence. Deterministic and accurate to machine precision
/// for the orders used here.
pub fn gauss_legendre<T: Real>(m: usize) -> (Vec<T>, Vec<T>) {
    assert!(m >= 1);
    let mut nodes = vec![T::zero(); m];
    let mut weights = vec![T::zero(); m];
    let mf = T::of(m);
    for i in 0..m {
        // Chebyshev-flavoured initial guess
        let mut x = (T::PI() * (T::of(i) + T::lit(0.75)) / (mf + T::lit(0.5))).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= T::epsilon() * (T::one() + x.abs()) {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(m, x);
        nodes[m - 1 - i] = x;
        weights[m - 1 - i] = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_and_derivative<T: Real>(m: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if m == 0 {
        return (p0, T::zero());
    }
    for j in 2..=m {
        let jf = T::of(j);
        let p2 = ((T::lit(2.0) * jf - T::one()) * x * p1 - (jf - T::one()) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = T::of(m) * (x * p1 - p0) / (x * x - T::one());
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::monomial;
    use crate::multiindex::MultiIndex;

    fn cfg() -> QuadratureConfig<f64> {
        QuadratureConfig::default()
    }

    #[test]
    fn kronrod_panel_is_exact_for_high_degree_polynomials() {
        let r = integrate_interval(|x: f64| x.powi(13), 0.0, 1.0, &[], &cfg()).unwrap();
        assert!((r.value - 1.0 / 14.0).abs() < 1e-15);
        assert_eq!(r.evals, 15);
        assert!(r.converged);
    }

    #[test]
    fn left_power_transform_handles_inverse_square_root() {
        let r = integrate_left_power(|x: f64| x.powf(-0.5), 0.0, 1.0, -0.5, &cfg()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12, "value {}", r.value);
        assert!(r.evals <= 200);
    }

    #[test]
    fn transform_agrees_with_plain_adaptive_on_mild_singularity() {
        let f = |x: f64| x.powf(-0.3) * (1.0 + x);
        let exact = 1.0 / 0.7 + 1.0 / 1.7;
        let tight = QuadratureConfig { rel_tol: 1e-13, abs_tol: 1e-13, ..cfg() };
        let a = integrate_left_power(f, 0.0, 1.0, -0.3, &tight).unwrap();
        let b = integrate_interval(f, 0.0, 1.0, &[], &cfg()).unwrap();
        assert!((a.value - exact).abs() < 1e-12, "transform err {:.2e}", (a.value - exact).abs());
        assert!((b.value - exact).abs() < 1e-7);
        assert!(a.evals < b.evals);
    }

    #[test]
    fn breakpoints_keep_kinks_on_panel_boundaries() {
        let r = integrate_interval(|x: f64| (x - 1.0).abs(), 0.0, 2.0, &[1.0], &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        assert_eq!(r.evals, 30);
    }

    #[test]
    fn ball_volumes() {
        let one = |_: &[f64]| 1.0;
        let v1 = integrate_ball(one, &[0.0], 1.0, &[], None, &cfg()).unwrap();
        let v2 = integrate_ball(one, &[0.0, 0.0], 1.0, &[], None, &cfg()).unwrap();
        let v3 = integrate_ball(one, &[0.0, 0.0, 0.0], 1.0, &[], None, &cfg()).unwrap();
        assert!((v1.value - 2.0).abs() < 1e-12);
        assert!((v2.value - core::f64::consts::PI).abs() < 1e-10);
        assert!((v3.value - 4.0 * core::f64::consts::PI / 3.0).abs() < 1e-9);
    }

    #[test]
    fn singular_center_in_a_ball() {
        let f = |y: &[f64]| crate::geom::norm(y).powf(-0.5);
        let v1 = integrate_ball(f, &[0.0], 1.0, &[], Some(-0.5), &cfg()).unwrap();
        assert!((v1.value - 4.0).abs() < 1e-11, "n=1 got {}", v1.value);
        let v2 = integrate_ball(f, &[0.0, 0.0], 1.0, &[], Some(-0.5), &cfg()).unwrap();
        assert!(
            (v2.value - 4.0 * core::f64::consts::PI / 3.0).abs() < 1e-9,
            "n=2 got {}",
            v2.value
        );
    }

    #[test]
    fn off_center_ball_with_origin_breakpoint() {
        // indicator of B_1 integrated over a ball around (1.5, 0): lens area
        // A = 2 r^2 cos^{-1}(d/2r) - (d/2) sqrt(4r^2 - d^2) with r=1, d=1.5
        let f = |y: &[f64]| if crate::geom::norm(y) < 1.0 { 1.0 } else { 0.0 };
        let d: f64 = 1.5;
        let lens = 2.0 * (d / 2.0_f64).acos() - (d / 2.0) * (4.0 - d * d).sqrt();
        let r = integrate_ball(f, &[1.5, 0.0], 1.0, &[1.0], None, &cfg()).unwrap();
        assert!((r.value - lens).abs() < 1e-8, "got {} want {}", r.value, lens);
    }

    #[test]
    fn exterior_integrals_match_closed_forms() {
        let c = cfg();
        let f2 = |y: &[f64]| crate::geom::norm(y).powi(-2);
        let r = integrate_exterior(f2, 1, 1.0, 1.0, &[], &c).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10);

        // slow decay goes through the endpoint transform (eta = 1/2)
        let f15 = |y: &[f64]| crate::geom::norm(y).powf(-1.5);
        let r = integrate_exterior(f15, 1, 1.0, 0.5, &[], &c).unwrap();
        assert!((r.value - 4.0).abs() < 1e-9, "got {}", r.value);

        let f3 = |y: &[f64]| crate::geom::norm(y).powi(-3);
        let r = integrate_exterior(f3, 2, 1.0, 1.0, &[], &c).unwrap();
        assert!((r.value - 2.0 * core::f64::consts::PI).abs() < 1e-9);

        let f4 = |y: &[f64]| crate::geom::norm(y).powi(-4);
        let r = integrate_exterior(f4, 1, 2.0, 3.0, &[], &c).unwrap();
        assert!((r.value - 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn narrow_feature_far_from_the_inner_radius() {
        // a bump of width 1/4 at |y| = 3 must not slip between the nodes of a
        // panel that spans many octaves; closed form √π/4 · (1 + erf(4))
        let f = |y: &[f64]| {
            let t = crate::geom::norm(y) - 3.0;
            (-16.0 * t * t).exp()
        };
        let r = integrate_exterior(f, 1, 2.0, 2.0, &[], &cfg()).unwrap();
        assert!(
            (r.value - 0.886226918621333).abs() < 1e-9,
            "got {}",
            r.value
        );
    }

    #[test]
    fn nonintegrable_tail_is_rejected() {
        let f = |y: &[f64]| crate::geom::norm(y).powi(-1);
        let err = integrate_exterior(f, 1, 1.0, 0.0, &[], &cfg()).unwrap_err();
        assert!(matches!(err, Error::NonIntegrableTail { .. }));
    }

    #[test]
    fn principal_value_of_x_squared_at_origin() {
        let u = monomial(MultiIndex::new(vec![2]), 1.0f64);
        let r = pv_second_difference_radius(&u, &[0.0], 0.5, 1.0, &cfg()).unwrap();
        assert!((r.value - (-2.0)).abs() < 1e-10, "got {}", r.value);
    }

    #[test]
    fn principal_value_needs_declared_smoothness() {
        let u = crate::function::annulus_indicator(1, 1.0f64, 2.0);
        let err = pv_second_difference(&u, &[0.0], 0.5, &cfg()).unwrap_err();
        assert!(matches!(err, Error::InsufficientSmoothness { required: 2, .. }));
    }

    #[test]
    fn sphere_moments() {
        let c = cfg();
        let g2 = |w: &[f64]| Ok(QuadResult::exact(w[0] * w[0]));
        let r = integrate_sphere(2, g2, &[], &c).unwrap();
        assert!((r.value - core::f64::consts::PI).abs() < 1e-12);

        let g3 = |w: &[f64]| Ok(QuadResult::exact(w[2] * w[2]));
        let r = integrate_sphere(3, g3, &[], &c).unwrap();
        assert!((r.value - 4.0 * core::f64::consts::PI / 3.0).abs() < 1e-12);

        let g1 = |w: &[f64]| Ok(QuadResult::exact(w[0]));
        let r = integrate_sphere(1, g1, &[], &c).unwrap();
        assert!(r.value.abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_rule_integrates_degree_2m_minus_1() {
        let (x, w) = gauss_legendre::<f64>(5);
        let int8: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(8)).sum();
        let int9: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(9)).sum();
        assert!((int8 - 2.0 / 9.0).abs() < 1e-14);
        assert!(int9.abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // nodes increasing
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn non_finite_integrand_reports_a_point() {
        let f = |x: f64| if x > 0.4 && x < 0.6 { f64::NAN } else { 1.0 };
        let err = integrate_interval(f, 0.0, 1.0, &[], &cfg()).unwrap_err();
        match err {
            Error::NonFiniteSample { point } => {
                assert!(point[0] > 0.4 && point[0] < 0.6);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn budget_exhaustion_reports_not_converged() {
        let mut c = cfg();
        c.max_subdivisions = 4;
        c.rel_tol = 1e-14;
        c.abs_tol = 1e-14;
        let r = integrate_interval(|x: f64| x.abs().powf(-0.5), 1e-30, 1.0, &[], &c).unwrap();
        assert!(!r.converged);
        assert!(r.value.is_finite());
    }

    #[test]
    fn radial_tail_crosses_the_tail_cut() {
        let r = integrate_radial(
            |rho: f64| rho.powi(-2),
            1.0,
            RadialEnd::Infinity { decay: 1.0 },
            &[],
            None,
            &cfg(),
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn config_serde_roundtrip_with_defaults() {
        let parsed: QuadratureConfig<f64> = serde_json::from_str("{\"rel_tol\": 1e-6}").unwrap();
        assert_eq!(parsed.rel_tol, 1e-6);
        assert_eq!(parsed.max_subdivisions, 2000);
        let bad = serde_json::from_str::<QuadratureConfig<f64>>("{\"rel_tool\": 1e-6}");
        assert!(bad.is_err());
    }
}
