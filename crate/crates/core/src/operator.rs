//! Pointwise evaluation of (−Δ)^s: the classical operator for data with
//! integrable tails, the growth-compensated operator for data that may grow
//! polynomially, the finite-window truncation family that connects the two,
//! and the supporting quantities (tail weights, the far-field bound, and
//! distances modulo the polynomial ambiguity class).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::FunctionHandle;
use crate::geom;
use crate::grid;
use crate::kernels::{self, FracParams};
use crate::linalg::{self, Mat};
use crate::multiindex;
use crate::polynomial::Polynomial;
use crate::quadrature::{self, QuadResult, QuadratureConfig, RadialEnd};
use crate::scalar::Real;

/// Radius of the ball whose interior is handled by direct kernel integration
/// in the compensated operator; data beyond it only enters through Taylor
/// remainders of the kernel.
pub const NEAR_BALL_RADIUS: f64 = 2.0;

fn sigma<T: Real>(n: usize) -> T {
    match n {
        1 => T::lit(2.0),
        2 => T::lit(2.0) * T::PI(),
        _ => T::lit(4.0) * T::PI(),
    }
}

/// Largest radius around x on which u is guaranteed smooth: stays clear of
/// declared discontinuity spheres and of atom positions.
fn smooth_radius_at<T: Real>(u: &FunctionHandle<T>, x: &[T]) -> Result<T> {
    let rx = geom::norm(x);
    let mut gap = T::infinity();
    for &b in u.breakpoints() {
        gap = gap.min((b - rx).abs());
    }
    for (pos, _) in u.atoms() {
        gap = gap.min(geom::dist(pos, x));
    }
    if gap <= T::zero() {
        return Err(Error::OutOfDomain(
            "evaluation point lies on a declared discontinuity sphere or atom".into(),
        ));
    }
    Ok(gap / T::lit(2.0))
}

fn check_dims<T: Real>(params: &FracParams<T>, u: &FunctionHandle<T>, x: &[T]) -> Result<()> {
    if u.dim() != params.n || x.len() != params.n {
        return Err(Error::InvalidParams(format!(
            "dimension mismatch: params n = {}, data n = {}, point n = {}",
            params.n,
            u.dim(),
            x.len()
        )));
    }
    Ok(())
}

/// (−Δ)^s u(x) for data with an integrable tail (|u(y)| ≲ |y|^g, g < 2s, or
/// compact support). Near field by the symmetrized principal value, far
/// field split into the exact kernel mass times u(x) and a direct integral.
pub fn classical_flap<T: Real>(
    params: &FracParams<T>,
    u: &FunctionHandle<T>,
    x: &[T],
    cfg: &QuadratureConfig<T>,
) -> Result<QuadResult<T>> {
    check_dims(params, u, x)?;
    let s = params.s;
    let two_s = T::lit(2.0) * s;
    let g = u.tail_exponent();
    if u.support_radius().is_none() && !(g < two_s) {
        return Err(Error::TailDivergence { g: g.as_f64(), bound: two_s.as_f64() });
    }

    let delta = smooth_radius_at(u, x)?.min(cfg.split_radius);
    let near = quadrature::pv_second_difference_radius(u, x, s, delta, cfg)?;

    let ux = u.eval(x);
    let far_mass = sigma::<T>(params.n) * delta.powf(-two_s) / two_s;

    let p = params.kernel_power();
    let decay = if u.support_radius().is_some() { T::one() } else { two_s - g };
    let far = quadrature::integrate_exterior_at(
        |y: &[T]| u.eval(y) * geom::dist_sq(x, y).powf(-p / T::lit(2.0)),
        x,
        delta,
        decay,
        u.breakpoints(),
        None,
        cfg,
    )?;

    let unnorm = params.clone().unnormalized();
    let mut atom_sum = T::zero();
    for (pos, w) in u.atoms() {
        atom_sum = atom_sum - *w * kernels::riesz_kernel(&unnorm, x, pos)?;
    }

    let c = params.normalization();
    Ok(QuadResult {
        value: c * (near.value + ux * far_mass - far.value + atom_sum),
        error: c.abs() * (near.error + far.error),
        evals: near.evals + far.evals,
        converged: near.converged && far.converged,
    })
}

/// The growth-compensated operator at x ∈ B_2: data inside B_2 is integrated
/// against the kernel directly, data outside only against the order-k Taylor
/// remainder of the kernel, which is what makes growth up to |y|^g, g < 2s+k,
/// admissible. The result is canonical; other representatives differ by a
/// polynomial of degree [`FracParams::mod_poly_degree`].
pub fn divergent_flap<T: Real>(
    params: &FracParams<T>,
    u: &FunctionHandle<T>,
    x: &[T],
    cfg: &QuadratureConfig<T>,
) -> Result<QuadResult<T>> {
    check_dims(params, u, x)?;
    let rho = T::lit(NEAR_BALL_RADIUS);
    let rx = geom::norm(x);
    if rx >= rho {
        return Err(Error::OutOfDomain(format!(
            "the compensated operator is evaluated inside the near ball |x| < {}, got |x| = {}",
            NEAR_BALL_RADIUS,
            rx.as_f64()
        )));
    }
    let s = params.s;
    let g = u.tail_exponent();
    if u.support_radius().is_none() && !params.admits_growth(g) {
        return Err(Error::NotInGrowthClass {
            g: g.as_f64(),
            bound: params.growth_bound().as_f64(),
        });
    }

    let delta = smooth_radius_at(u, x)?
        .min(cfg.split_radius)
        .min((rho - rx) / T::lit(2.0));
    let near = quadrature::pv_second_difference_radius(u, x, s, delta, cfg)?;

    let ux = u.eval(x);
    let nm1 = T::of(params.n - 1);
    let two_s = T::lit(2.0) * s;

    // ∫_{B_2 ∖ B_δ(x)} (u(x) − u(y)) |x−y|^{−n−2s} dy in polar about x
    let mut kinks: Vec<T> = Vec::new();
    if params.n == 2 {
        for &b in u.breakpoints() {
            kinks.extend(quadrature::tangency_angles(x, b));
        }
    }
    let ring = quadrature::integrate_sphere(
        params.n,
        |omega: &[T]| {
            let exit = geom::exit_distance(x, omega, rho);
            let mut cuts: Vec<T> = Vec::new();
            for &b in u.breakpoints() {
                cuts.extend(geom::sphere_crossings(x, omega, b));
            }
            quadrature::integrate_radial(
                |r: T| (ux - u.eval(&geom::axpy(x, r, omega))) * r.powf(nm1 - T::of(params.n) - two_s),
                delta,
                RadialEnd::At(exit),
                &cuts,
                None,
                cfg,
            )
        },
        &kinks,
        cfg,
    )?;

    // u(x) · ∫_{B_2^c} |x−y|^{−n−2s} dy
    let p = params.kernel_power();
    let outer_mass = if ux == T::zero() {
        QuadResult::exact(T::zero())
    } else {
        quadrature::integrate_exterior(
            |y: &[T]| geom::dist_sq(x, y).powf(-p / T::lit(2.0)),
            params.n,
            rho,
            two_s,
            &[],
            cfg,
        )?
        .scaled(ux)
    };

    // −∫_{B_2^c} u(y) · Rem_k(x,y) dy
    let unnorm = params.clone().unnormalized();
    let decay = if u.support_radius().is_some() {
        T::one()
    } else {
        params.growth_bound() - g
    };
    let far_breaks: Vec<T> = u.breakpoints().iter().copied().filter(|b| *b > rho).collect();
    let xv = x.to_vec();
    let far = quadrature::integrate_exterior(
        move |y: &[T]| {
            u.eval(y) * kernels::taylor_remainder(&unnorm, &xv, y).unwrap_or_else(|_| T::nan())
        },
        params.n,
        rho,
        decay,
        &far_breaks,
        cfg,
    )?;

    let mut atom_sum = T::zero();
    for (pos, w) in u.atoms() {
        if geom::norm(pos) < rho {
            atom_sum = atom_sum - *w * kernels::riesz_kernel(&unnorm, x, pos)?;
        } else {
            atom_sum = atom_sum - *w * kernels::taylor_remainder(&unnorm, x, pos)?;
        }
    }

    let c = params.normalization();
    Ok(QuadResult {
        value: c * (near.value + ring.value + outer_mass.value - far.value + atom_sum),
        error: c.abs() * (near.error + ring.error + outer_mass.error + far.error),
        evals: near.evals + ring.evals + outer_mass.evals + far.evals,
        converged: near.converged && ring.converged && outer_mass.converged && far.converged,
    })
}

/// One member of the truncation family: the classical operator applied to
/// u·χ_{B_R}, recentred by the polynomial that absorbs the window's moments.
#[derive(Debug, Clone)]
pub struct TruncationReport<T> {
    pub radius: T,
    pub grid: Vec<Vec<T>>,
    /// f_R on the grid: classical of the windowed data minus the compensator.
    pub values: Vec<T>,
    /// P_R, degree ≤ k−1.
    pub compensator: Polynomial<T>,
    /// sup over the grid of |f_R − f_u| against the compensated limit.
    pub residual_to_limit: T,
}

/// Evaluates the truncation family member at window radius R > 3 on the
/// given grid and measures its distance to the compensated operator.
pub fn truncated_flap<T: Real>(
    params: &FracParams<T>,
    u: &FunctionHandle<T>,
    radius: T,
    pts: &[Vec<T>],
    cfg: &QuadratureConfig<T>,
) -> Result<TruncationReport<T>> {
    if !(radius > T::lit(3.0)) {
        return Err(Error::InvalidParams(format!(
            "window radius {} too small, the family starts beyond 3",
            radius.as_f64()
        )));
    }
    let compensator = window_compensator(params, u, radius, cfg)?;
    let windowed = u.truncated(radius);

    let pointwise: Result<Vec<(T, T)>> = pts
        .par_iter()
        .map(|x| {
            let f_r = classical_flap(params, &windowed, x, cfg)?.value - compensator.eval(x);
            let f_lim = divergent_flap(params, u, x, cfg)?.value;
            Ok((f_r, (f_r - f_lim).abs()))
        })
        .collect();
    let pointwise = pointwise?;

    let values: Vec<T> = pointwise.iter().map(|(v, _)| *v).collect();
    let residual = pointwise
        .iter()
        .fold(T::zero(), |acc, (_, r)| acc.max(*r));
    Ok(TruncationReport {
        radius,
        grid: pts.to_vec(),
        values,
        compensator,
        residual_to_limit: residual,
    })
}

/// P_R(x) = −Σ_{|α| ≤ k−1} x^α/α! ∫_{2<|y|<R} u(y) ∂^α K(0,y) dy; subtracting
/// it from the windowed classical operator keeps the family bounded as R→∞.
fn window_compensator<T: Real>(
    params: &FracParams<T>,
    u: &FunctionHandle<T>,
    radius: T,
    cfg: &QuadratureConfig<T>,
) -> Result<Polynomial<T>> {
    let mut p = Polynomial::zero(params.n);
    if params.k == 0 {
        return Ok(p);
    }
    let rho = T::lit(NEAR_BALL_RADIUS);
    let annulus_breaks: Vec<T> = u
        .breakpoints()
        .iter()
        .copied()
        .filter(|b| *b > rho && *b < radius)
        .collect();
    for alpha in multiindex::up_to_order(params.n, params.k - 1) {
        let a = alpha.clone();
        let moment = quadrature::integrate_sphere(
            params.n,
            |omega: &[T]| {
                let radial = |r: T| {
                    let y = geom::scale(omega, r);
                    u.eval(&y)
                        * kernels::kernel_x_derivative(params, &a, &y).unwrap_or_else(|_| T::nan())
                        * r.powf(T::of(params.n - 1))
                };
                quadrature::integrate_radial(
                    radial,
                    rho,
                    RadialEnd::At(radius),
                    &annulus_breaks,
                    None,
                    cfg,
                )
            },
            &[],
            cfg,
        )?;
        let mut total = moment.value;
        for (pos, w) in u.atoms() {
            let r = geom::norm(pos);
            if r > rho && r < radius {
                total = total + *w * kernels::kernel_x_derivative(params, &alpha, pos)?;
            }
        }
        let fact = T::lit(alpha.factorial());
        p.add_term(alpha, -total / fact);
    }
    Ok(p)
}

/// Best polynomial of the ambiguity degree fitted to samples on a grid, and
/// the sup-norm of what is left. Two operator results agree as compensated
/// operators exactly when this residual vanishes.
#[derive(Debug, Clone)]
pub struct ModPolyFit<T> {
    pub polynomial: Polynomial<T>,
    pub sup_residual: T,
}

pub fn mod_poly_distance<T: Real>(
    params: &FracParams<T>,
    pts: &[Vec<T>],
    values: &[T],
) -> Result<ModPolyFit<T>> {
    if pts.len() != values.len() {
        return Err(Error::InvalidParams("grid and sample counts differ".into()));
    }
    let basis = multiindex::up_to_order(params.n, params.mod_poly_degree());
    if pts.len() < basis.len() {
        return Err(Error::GridTooCoarse { points: pts.len(), unknowns: basis.len() });
    }
    let rows: Vec<Vec<T>> = pts
        .iter()
        .map(|x| basis.iter().map(|a| a.monomial(x)).collect())
        .collect();
    let design = Mat::from_rows(rows);
    let fit = linalg::lstsq(&design, values, T::lit(1e-10))?;
    if fit.rank < basis.len() {
        return Err(Error::IllConditionedFit);
    }
    let mut polynomial = Polynomial::zero(params.n);
    for (alpha, c) in basis.iter().zip(&fit.solution) {
        polynomial.add_term(alpha.clone(), *c);
    }
    let sup_residual = pts
        .iter()
        .zip(values)
        .fold(T::zero(), |acc, (x, v)| acc.max((*v - polynomial.eval(x)).abs()));
    Ok(ModPolyFit { polynomial, sup_residual })
}

/// ∫_{|y|>R} |u(y)| |y|^{−(n+2s+k)} dy plus the same weight on atom masses.
/// This is the quantity the far-field bound multiplies; it carries no
/// normalization constant.
pub fn tail_integral<T: Real>(
    params: &FracParams<T>,
    u: &FunctionHandle<T>,
    radius: T,
    cfg: &QuadratureConfig<T>,
) -> Result<T> {
    if !(radius >= T::lit(3.0)) {
        return Err(Error::InvalidParams(format!(
            "tail radius {} too small, want at least 3",
            radius.as_f64()
        )));
    }
    check_dims(params, u, &vec![T::zero(); params.n])?;
    let g = u.tail_exponent();
    if u.support_radius().is_none() && !params.admits_growth(g) {
        return Err(Error::NotInGrowthClass {
            g: g.as_f64(),
            bound: params.growth_bound().as_f64(),
        });
    }
    let w = params.tail_power();
    let decay = if u.support_radius().is_some() {
        T::one()
    } else {
        params.growth_bound() - g
    };
    let far_breaks: Vec<T> = u.breakpoints().iter().copied().filter(|b| *b > radius).collect();
    let res = quadrature::integrate_exterior(
        |y: &[T]| u.eval(y).abs() * geom::norm_sq(y).powf(-w / T::lit(2.0)),
        params.n,
        radius,
        decay,
        &far_breaks,
        cfg,
    )?;
    let mut total = res.value;
    for (pos, wt) in u.atoms() {
        let r = geom::norm(pos);
        if r >= radius {
            total = total + wt.abs() * r.powf(-w);
        }
    }
    Ok(total)
}

/// Sup of |ψ| over a deterministic lattice of x ∈ B_1 and y ∈ B_2^c; the
/// constant in the far-field bound |f(x)| ≤ bound · tail weight. The lattice
/// caps |x| at 0.99 and |y| at 10³, where ψ has long leveled off.
pub fn psi_grid_bound<T: Real>(params: &FracParams<T>) -> Result<T> {
    let per_axis = match params.n {
        1 => 21,
        2 => 7,
        _ => 5,
    };
    let xs = grid::inscribed_cube_grid::<T>(params.n, per_axis, T::lit(0.99));

    let mut dirs: Vec<Vec<T>> = Vec::new();
    for i in 0..params.n {
        for sgn in [T::one(), -T::one()] {
            let mut d = vec![T::zero(); params.n];
            d[i] = sgn;
            dirs.push(d);
        }
    }
    if params.n > 1 {
        let inv = T::one() / T::of(params.n).sqrt();
        dirs.push(vec![inv; params.n]);
        dirs.push(vec![-inv; params.n]);
    }

    let radii: Vec<T> = (0..24)
        .map(|i| T::lit(2.0) * T::lit(500f64.powf(i as f64 / 23.0)))
        .collect();

    let sup = xs
        .par_iter()
        .map(|x| {
            let mut best = T::zero();
            for d in &dirs {
                for &r in &radii {
                    let y = geom::scale(d, r);
                    let v = kernels::psi(params, x, &y)?.abs();
                    best = best.max(v);
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<T>>>()?
        .into_iter()
        .fold(T::zero(), |a, b| a.max(b));
    Ok(sup)
}
