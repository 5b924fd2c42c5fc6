//! Monte Carlo cross-checks that owe nothing to the deterministic solver's
//! boundary quadrature: the exit law of the 2s-stable process from a ball is
//! exactly the Poisson kernel, so a standard solution can be estimated by
//! averaging the exterior datum over sampled exit points. One jump suffices
//! on a ball, there is no walk to truncate. The source contribution is kept
//! deterministic on purpose; all Monte Carlo variance lives in the boundary
//! term, which is the part worth checking independently.
//!
//! Also home to a second, deliberately pedestrian polynomial fitter used as
//! the oracle for the mod-polynomial distance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dirichlet::{self, DirichletSpec};
use crate::error::{Error, Result};
use crate::geom;
use crate::kernels::{self, FracParams};
use crate::multiindex;
use crate::polynomial::Polynomial;
use crate::quadrature::{self, QuadratureConfig};
use crate::scalar::Real;

/// Sampling budget and stream coordinates. Identical values reproduce
/// estimates bit for bit on any thread count.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    /// Substream label; distinct labels give independent streams under the
    /// same seed.
    pub stream_id: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { samples: 10_000, seed: 0, stream_id: 0 }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1_000 {
            return Err(Error::InvalidParams(format!(
                "{} samples is below the floor of 1000; estimates this noisy mislead",
                self.samples
            )));
        }
        Ok(())
    }
}

/// Samples drawn in chunks of this size, one RNG stream per chunk, so the
/// reduction order never depends on the worker count.
const CHUNK: usize = 4096;

fn chunk_rng(mc: &McConfig, chunk_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
    rng.set_stream((mc.stream_id << 20) | chunk_index);
    rng
}

/// Expected acceptance of the rejection sampler started at x, in closed
/// form. Decays like (r − |x|)^{n−s}, which is why starts hugging the
/// boundary are refused rather than ground through.
pub fn exit_acceptance_rate<T: Real>(params: &FracParams<T>, x: &[T], r: T) -> T {
    let rho = geom::norm(x);
    let frac = (r * r - rho * rho) / (r * r);
    frac.powf(-params.s) * ((r - rho) / r).powf(T::of(params.n))
}

fn unit_direction<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    if n == 1 {
        return vec![if rng.gen::<bool>() { 1.0 } else { -1.0 }];
    }
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let len = geom::norm(&v);
        if len > 1e-6 {
            return v.into_iter().map(|c| c / len).collect();
        }
    }
}

fn sample_exit_counted<R: Rng>(
    params: &FracParams<f64>,
    x: &[f64],
    r: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, usize)> {
    let n = params.n;
    let rho_x = geom::norm(x);
    if !(rho_x < r) {
        return Err(Error::OutOfDomain(format!(
            "exit sampling starts inside the ball, got |x| = {} on radius {}",
            rho_x, r
        )));
    }
    let rate = exit_acceptance_rate(params, x, r);
    if !(rate >= 1e-3) {
        return Err(Error::SamplerDegenerate { rate });
    }

    // Proposal: the exact exit law from the center. Its radius satisfies
    // 1 − r²/ρ² ~ Beta(1−s, s); the direction is uniform. Accepting with
    // probability (|y|(r−|x|)/(|x−y|r))^n ≤ 1 tilts the density onto the
    // exit law at x; at x = 0 every proposal is accepted.
    let beta = Beta::new(1.0 - params.s, params.s)
        .map_err(|e| Error::InvalidParams(format!("beta sampler rejected s: {}", e)))?;
    let cap = (200.0 / rate).max(2_000.0) as usize;
    let mut attempts = 0usize;
    while attempts < cap {
        attempts += 1;
        let v: f64 = beta.sample(rng);
        if v >= 1.0 - 1e-15 {
            continue;
        }
        let radius = r / (1.0 - v).sqrt();
        let dir = unit_direction(n, rng);
        let y = geom::scale(&dir, radius);
        let d = geom::dist(x, &y);
        let accept = ((radius * (r - rho_x)) / (d * r)).powi(n as i32);
        if rng.gen::<f64>() < accept {
            return Ok((y, attempts));
        }
    }
    Err(Error::SamplerDegenerate { rate: 1.0 / cap as f64 })
}

/// One exit point of the 2s-stable process from B_r started at x, i.e. one
/// draw from the density `poisson_kernel_ball(r, x, ·)`.
pub fn sample_poisson_exit<R: Rng>(
    params: &FracParams<f64>,
    x: &[f64],
    r: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    sample_exit_counted(params, x, r, rng).map(|(y, _)| y)
}

/// A Monte Carlo estimate with its uncertainty split the way it is
/// produced: the boundary average carries all the randomness, the source
/// term is quadrature.
#[derive(Debug, Clone)]
pub struct WosEstimate {
    pub estimate: f64,
    /// Standard error of the boundary average alone.
    pub stderr: f64,
    pub boundary_mean: f64,
    pub source_term: f64,
    /// Deterministic quadrature error carried by the source term.
    pub source_error: f64,
    /// Observed sampler acceptance over the whole run.
    pub acceptance_rate: f64,
    pub samples: usize,
}

/// Estimates the standard solution at x by one-jump walk-on-spheres:
/// the mean of the exterior datum over exit samples, plus the Green-kernel
/// source integral computed deterministically.
pub fn wos_estimate(
    spec: &DirichletSpec<f64>,
    x: &[f64],
    params: &FracParams<f64>,
    mc: &McConfig,
    cfg: &QuadratureConfig<f64>,
) -> Result<WosEstimate> {
    spec.validate(params)?;
    mc.validate()?;
    if params.k != 0 {
        return Err(Error::InvalidParams(format!(
            "the exit-law representation is for the classical problem; k = {} has none here",
            params.k
        )));
    }
    if !spec.exterior.atoms().is_empty() {
        return Err(Error::InvalidParams(
            "atom data has no pointwise boundary trace to sample".into(),
        ));
    }
    let r = spec.radius;
    let rho_x = geom::norm(x);
    if !(rho_x < r) {
        return Err(Error::OutOfDomain(format!(
            "estimate requested at |x| = {} outside the ball of radius {}",
            rho_x, r
        )));
    }

    let chunks = mc.samples.div_ceil(CHUNK);
    let per_chunk: Result<Vec<(f64, f64, usize)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(mc, c as u64);
            let count = CHUNK.min(mc.samples - c * CHUNK);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            let mut attempts = 0usize;
            for _ in 0..count {
                let (y, tries) = sample_exit_counted(params, x, r, &mut rng)?;
                attempts += tries;
                let g = spec.exterior.eval(&y);
                sum += g;
                sumsq += g * g;
            }
            Ok((sum, sumsq, attempts))
        })
        .collect();
    let per_chunk = per_chunk?;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    let mut attempts = 0usize;
    for (s, q, a) in per_chunk {
        sum += s;
        sumsq += q;
        attempts += a;
    }
    let nf = mc.samples as f64;
    let boundary_mean = sum / nf;
    let var = ((sumsq - nf * boundary_mean * boundary_mean) / (nf - 1.0)).max(0.0);
    let stderr = (var / nf).sqrt();

    let (source_term, source_error) = green_source(spec, x, params, cfg)?;

    Ok(WosEstimate {
        estimate: boundary_mean + source_term,
        stderr,
        boundary_mean,
        source_term,
        source_error,
        acceptance_rate: nf / attempts as f64,
        samples: mc.samples,
    })
}

/// ∫ G_r(x, y) f(y) dy with the convention scale, the half of the solve the
/// Monte Carlo does not replace.
fn green_source(
    spec: &DirichletSpec<f64>,
    x: &[f64],
    params: &FracParams<f64>,
    cfg: &QuadratureConfig<f64>,
) -> Result<(f64, f64)> {
    let r = spec.radius;
    let f = &spec.source;
    let mut f_breaks: Vec<f64> =
        f.breakpoints().iter().copied().filter(|b| *b < r).collect();
    f_breaks.push(r);
    let scale = dirichlet::source_scale(params);
    let rx = geom::norm(x);
    let green = quadrature::integrate_ball(
        |y: &[f64]| {
            if geom::norm(y) < r && geom::dist_sq(x, y) > 0.0 {
                let gv = kernels::green_ball(params, r, x, y).unwrap_or(f64::NAN);
                f.eval(y) * gv
            } else {
                0.0
            }
        },
        x,
        rx + r,
        &f_breaks,
        Some(2.0 * params.s - params.n as f64),
        cfg,
    )?;
    let mut atom_sum = 0.0;
    for (p, w) in f.atoms() {
        if geom::norm(p) < r {
            atom_sum += *w * kernels::green_ball(params, r, x, p)?;
        }
    }
    Ok((scale * (green.value + atom_sum), scale.abs() * green.error))
}

/// Fit of a polynomial of the requested degree together with what it cannot
/// explain. Degree −1 means the empty basis: nothing is subtracted.
#[derive(Debug, Clone)]
pub struct BrutePolyFit<T> {
    pub polynomial: Polynomial<T>,
    pub sup_residual: T,
}

/// Least-squares polynomial fit by explicit normal equations and pivoted
/// Gaussian elimination. Numerically cruder than the QR route used
/// elsewhere, which is the point: the two share no factorization code, so
/// agreement means something.
pub fn brute_poly_fit<T: Real>(
    n: usize,
    pts: &[Vec<T>],
    values: &[T],
    degree: isize,
) -> Result<BrutePolyFit<T>> {
    if pts.len() != values.len() {
        return Err(Error::InvalidParams("grid and sample counts differ".into()));
    }
    if degree < 0 {
        let sup = values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        return Ok(BrutePolyFit { polynomial: Polynomial::zero(n), sup_residual: sup });
    }
    let basis = multiindex::up_to_order(n, degree as usize);
    let m = basis.len();
    if pts.len() < m {
        return Err(Error::GridTooCoarse { points: pts.len(), unknowns: m });
    }

    let mut gram = vec![vec![T::zero(); m]; m];
    let mut rhs = vec![T::zero(); m];
    for (x, v) in pts.iter().zip(values) {
        let row: Vec<T> = basis.iter().map(|a| a.monomial(x)).collect();
        for i in 0..m {
            rhs[i] += row[i] * *v;
            for j in 0..m {
                gram[i][j] += row[i] * row[j];
            }
        }
    }

    let floor = (0..m).fold(T::zero(), |acc, i| acc.max(gram[i][i])) * T::lit(1e-13);
    let mut order: Vec<usize> = (0..m).collect();
    for col in 0..m {
        let pivot_row = (col..m)
            .max_by(|&a, &b| {
                gram[order[a]][col].abs().partial_cmp(&gram[order[b]][col].abs()).unwrap()
            })
            .unwrap();
        order.swap(col, pivot_row);
        let p = gram[order[col]][col];
        if p.abs() <= floor {
            return Err(Error::IllConditionedFit);
        }
        for row in col + 1..m {
            let factor = gram[order[row]][col] / p;
            if factor == T::zero() {
                continue;
            }
            for j in col..m {
                let v = gram[order[col]][j];
                gram[order[row]][j] -= factor * v;
            }
            let v = rhs[order[col]];
            rhs[order[row]] -= factor * v;
        }
    }
    let mut coeffs = vec![T::zero(); m];
    for col in (0..m).rev() {
        let mut acc = rhs[order[col]];
        for j in col + 1..m {
            acc -= gram[order[col]][j] * coeffs[j];
        }
        coeffs[col] = acc / gram[order[col]][col];
    }

    let mut polynomial = Polynomial::zero(n);
    for (alpha, c) in basis.iter().zip(&coeffs) {
        polynomial.add_term(alpha.clone(), *c);
    }
    let sup_residual = pts
        .iter()
        .zip(values)
        .fold(T::zero(), |acc, (x, v)| acc.max((*v - polynomial.eval(x)).abs()));
    Ok(BrutePolyFit { polynomial, sup_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function;
    use crate::operator;
    use approx::assert_relative_eq;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn p64(n: usize, s: f64) -> FracParams<f64> {
        FracParams::new(n, s, 0).unwrap()
    }

    fn cfg() -> QuadratureConfig<f64> {
        QuadratureConfig::default()
    }

    fn annulus_spec() -> DirichletSpec<f64> {
        DirichletSpec {
            radius: 1.0,
            source: function::constant(1, 0.0).with_support_radius(1.0),
            exterior: function::annulus_indicator(1, 1.0, 2.0),
            order: 0,
        }
    }

    #[test]
    fn center_exits_average_the_annulus_mass() {
        // closed form: the exit law at 0 puts mass (2/π)·arcsec 2 = 2/3 in
        // 1 < |y| < 2
        let params = p64(1, 0.5);
        let mc = McConfig { samples: 100_000, seed: 7, stream_id: 0 };
        let mut hits = 0usize;
        let chunks = mc.samples.div_ceil(CHUNK);
        let mut drawn = 0usize;
        'outer: for c in 0..chunks {
            let mut rng = chunk_rng(&mc, c as u64);
            for _ in 0..CHUNK {
                if drawn == mc.samples {
                    break 'outer;
                }
                let y = sample_poisson_exit(&params, &[0.0], 1.0, &mut rng).unwrap();
                drawn += 1;
                if y[0].abs() < 2.0 {
                    hits += 1;
                }
            }
        }
        let p = hits as f64 / mc.samples as f64;
        let exact = 2.0 / 3.0;
        let stderr = (exact * (1.0 - exact) / mc.samples as f64).sqrt();
        assert!(
            (p - exact).abs() <= 3.0 * stderr,
            "annulus mass {} vs {} (3σ = {})",
            p,
            exact,
            3.0 * stderr
        );
    }

    #[test]
    fn center_exits_are_sign_symmetric() {
        let params = p64(1, 0.5);
        let mc = McConfig { samples: 40_000, seed: 3, stream_id: 2 };
        let mut rng = chunk_rng(&mc, 0);
        let mut pos = 0usize;
        for _ in 0..mc.samples {
            let y = sample_poisson_exit(&params, &[0.0], 1.0, &mut rng).unwrap();
            if y[0] > 0.0 {
                pos += 1;
            }
        }
        let p = pos as f64 / mc.samples as f64;
        let stderr = (0.25 / mc.samples as f64).sqrt();
        assert!((p - 0.5).abs() <= 3.0 * stderr, "sign split {}", p);
    }

    #[test]
    fn offcenter_histogram_matches_the_kernel_density() {
        // 2 signs × 10 radial cells; expected masses from the kernel itself
        let params = p64(1, 0.5);
        let x = [0.4];
        let edges = [1.0, 1.02, 1.05, 1.1, 1.2, 1.4, 1.8, 2.6, 5.0, 12.0];
        let quad = cfg();
        let mut expected = Vec::with_capacity(20);
        for sign in [1.0f64, -1.0] {
            let dens = |y: f64| {
                kernels::poisson_kernel_ball(&params, 1.0, &x, &[sign * y]).unwrap()
            };
            for w in edges.windows(2) {
                let cell = if w[0] == 1.0 {
                    quadrature::integrate_left_power(dens, w[0], w[1], -0.5, &quad).unwrap()
                } else {
                    quadrature::integrate_interval(dens, w[0], w[1], &[], &quad).unwrap()
                };
                expected.push(cell.value);
            }
            // the unbounded cell, cut far beyond where samples can land
            let tail = quadrature::integrate_interval(
                dens,
                12.0,
                1e6,
                &[100.0, 1e4],
                &quad,
            )
            .unwrap();
            expected.push(tail.value);
        }
        let total: f64 = expected.iter().sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-4);

        let mc = McConfig { samples: 50_000, seed: 11, stream_id: 0 };
        let mut counts = vec![0usize; 20];
        let chunks = mc.samples.div_ceil(CHUNK);
        let mut drawn = 0usize;
        'outer: for c in 0..chunks {
            let mut rng = chunk_rng(&mc, c as u64);
            for _ in 0..CHUNK {
                if drawn == mc.samples {
                    break 'outer;
                }
                let y = sample_poisson_exit(&params, &x, 1.0, &mut rng).unwrap()[0];
                drawn += 1;
                let side = if y > 0.0 { 0 } else { 10 };
                let r = y.abs();
                let cell = edges.iter().rposition(|e| r >= *e).unwrap();
                counts[side + cell] += 1;
            }
        }
        let nf = mc.samples as f64;
        let mut stat = 0.0;
        for (obs, exp) in counts.iter().zip(&expected) {
            let e = exp * nf;
            stat += (*obs as f64 - e) * (*obs as f64 - e) / e;
        }
        let chi = ChiSquared::new(19.0).unwrap();
        let p_value = 1.0 - chi.cdf(stat);
        assert!(p_value > 0.001, "χ² = {}, p = {}", stat, p_value);
    }

    #[test]
    fn boundary_start_is_refused() {
        let params = p64(1, 0.5);
        let mc = McConfig::default();
        let mut rng = chunk_rng(&mc, 0);
        let err = sample_poisson_exit(&params, &[1.0 - 1e-7], 1.0, &mut rng).unwrap_err();
        assert!(matches!(err, Error::SamplerDegenerate { rate } if rate < 1e-3));
    }

    #[test]
    fn constant_boundary_data_is_estimated_exactly() {
        let spec = DirichletSpec {
            radius: 1.0,
            source: function::constant(1, 0.0).with_support_radius(1.0),
            exterior: function::constant(1, 1.0),
            order: 0,
        };
        let mc = McConfig { samples: 2_000, seed: 1, stream_id: 0 };
        let est = wos_estimate(&spec, &[0.3], &p64(1, 0.5), &mc, &cfg()).unwrap();
        assert_eq!(est.boundary_mean, 1.0);
        assert_eq!(est.stderr, 0.0);
        assert_relative_eq!(est.estimate, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn getoor_source_reproduces_the_flat_profile() {
        let spec = DirichletSpec {
            radius: 1.0,
            source: function::constant(1, 1.0).with_support_radius(1.0),
            exterior: function::constant(1, 0.0).with_support_radius(1.0),
            order: 0,
        };
        let mc = McConfig { samples: 1_000, seed: 5, stream_id: 0 };
        let est = wos_estimate(&spec, &[0.0], &p64(1, 0.5), &mc, &cfg()).unwrap();
        assert_eq!(est.stderr, 0.0);
        assert!(
            (est.estimate - 1.0).abs() <= 1e-3,
            "u(0) = {} should be the Getoor value 1",
            est.estimate
        );
    }

    #[test]
    fn estimates_reproduce_bit_for_bit() {
        let spec = annulus_spec();
        let params = p64(1, 0.5);
        let mc = McConfig { samples: 20_000, seed: 42, stream_id: 3 };
        let a = wos_estimate(&spec, &[0.2], &params, &mc, &cfg()).unwrap();
        let b = wos_estimate(&spec, &[0.2], &params, &mc, &cfg()).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
        let other = McConfig { stream_id: 4, ..mc };
        let c = wos_estimate(&spec, &[0.2], &params, &other, &cfg()).unwrap();
        assert_ne!(a.estimate.to_bits(), c.estimate.to_bits());
    }

    #[test]
    fn stderr_scales_like_the_square_root() {
        let spec = annulus_spec();
        let params = p64(1, 0.5);
        let small = McConfig { samples: 10_000, seed: 9, stream_id: 0 };
        let large = McConfig { samples: 40_000, seed: 9, stream_id: 0 };
        let a = wos_estimate(&spec, &[0.3], &params, &small, &cfg()).unwrap();
        let b = wos_estimate(&spec, &[0.3], &params, &large, &cfg()).unwrap();
        let ratio = b.stderr / a.stderr;
        assert!(
            (0.4..=0.6).contains(&ratio),
            "quadrupling samples gave stderr ratio {}",
            ratio
        );
    }

    #[test]
    fn wos_agrees_with_the_deterministic_solve() {
        let spec = annulus_spec();
        let params = p64(1, 0.5);
        let field = dirichlet::solve_standard(
            1.0,
            &spec.source,
            &spec.exterior,
            &params,
            &cfg(),
        )
        .unwrap();
        let mc = McConfig { samples: 30_000, seed: 17, stream_id: 1 };
        for x in [[0.0], [0.45], [-0.7]] {
            let est = wos_estimate(&spec, &x, &params, &mc, &cfg()).unwrap();
            let exact = field.eval(&x).unwrap();
            assert!(
                (est.estimate - exact).abs() <= 3.0 * est.stderr + 1e-2,
                "at {:?}: wos {} vs solve {} (stderr {})",
                x,
                est.estimate,
                exact,
                est.stderr
            );
        }
    }

    #[test]
    fn exact_polynomials_leave_no_residual() {
        let pts: Vec<Vec<f64>> = (0..25)
            .map(|i| vec![-1.0 + 2.0 * i as f64 / 24.0])
            .collect();
        let values: Vec<f64> =
            pts.iter().map(|x| 2.0 - x[0] + 3.0 * x[0] * x[0]).collect();
        let fit = brute_poly_fit(1, &pts, &values, 2).unwrap();
        assert!(fit.sup_residual <= 1e-10, "residual {}", fit.sup_residual);
    }

    #[test]
    fn empty_basis_returns_the_sup() {
        let pts = vec![vec![0.0], vec![0.5]];
        let fit = brute_poly_fit(1, &pts, &[1.5, -2.5], -1).unwrap();
        assert_eq!(fit.sup_residual, 2.5);
    }

    #[test]
    fn both_fitters_agree_on_smooth_data() {
        let params = FracParams::new(2, 0.4, 3).unwrap();
        let pts: Vec<Vec<f64>> = crate::grid::inscribed_cube_grid(2, 7, 0.9);
        let values: Vec<f64> = pts
            .iter()
            .map(|x| (x[0] * 1.3).sin() * (0.7 * x[1]).cos() + 0.2 * x[0] * x[1])
            .collect();
        let brute =
            brute_poly_fit(2, &pts, &values, params.mod_poly_degree() as isize).unwrap();
        let qr = operator::mod_poly_distance(&params, &pts, &values).unwrap();
        assert!(
            (brute.sup_residual - qr.sup_residual).abs() <= 1e-9,
            "residuals {} vs {}",
            brute.sup_residual,
            qr.sup_residual
        );
    }

    #[test]
    fn degenerate_grid_is_reported() {
        let pts = vec![vec![0.5, 0.5]; 12];
        let values = vec![1.0; 12];
        let err = brute_poly_fit(2, &pts, &values, 1).unwrap_err();
        assert!(matches!(err, Error::IllConditionedFit));
    }
}
