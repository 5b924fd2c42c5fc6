//! The acceptance suite as a library. Each criterion pins its own
//! configuration, runs end to end, and returns a verdict with a
//! human-readable account, so the integration test and the command line
//! share one implementation and cannot drift apart.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::approx::{self, ShadowConfig};
use crate::dirichlet::{self, DirichletSpec};
use crate::error::Result;
use crate::function::{self, FunctionHandle};
use crate::geom;
use crate::grid;
use crate::kernels::{self, FracParams};
use crate::multiindex::{self, MultiIndex};
use crate::operator;
use crate::oracle::{self, McConfig};
use crate::polynomial::Polynomial;
use crate::linalg::{self, Mat};
use crate::quadrature::{self, QuadratureConfig};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub index: usize,
    pub name: &'static str,
    /// Non-gating criteria report numbers without asserting them.
    pub gating: bool,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    /// One status line, stable enough to grep in CI logs.
    pub fn line(&self) -> String {
        let verdict = if self.passed {
            "PASS"
        } else if self.gating {
            "FAIL"
        } else {
            "INFO"
        };
        format!(
            "criterion {:>2} [{}] {:<38} {:>7.1}s  {}",
            self.index, verdict, self.name, self.seconds, self.detail
        )
    }
}

fn run(
    index: usize,
    name: &'static str,
    gating: bool,
    body: impl FnOnce() -> Result<(bool, String)>,
) -> CriterionResult {
    let start = Instant::now();
    let (passed, detail) = match body() {
        Ok((passed, detail)) => (passed, detail),
        Err(e) => (false, format!("did not run to completion: {}", e)),
    };
    CriterionResult {
        index,
        name,
        gating,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn qcfg() -> QuadratureConfig<f64> {
    QuadratureConfig::default()
}

fn axis_points(ts: &[f64]) -> Vec<Vec<f64>> {
    ts.iter().map(|t| vec![*t]).collect()
}

/// Constant image of the flat profile under the normalized operator.
pub fn criterion_1() -> CriterionResult {
    run(1, "flat profile has image one", true, || {
        let params = FracParams::new(1, 0.5, 0)?;
        let u = function::flat_profile(1, 1.0, 0.5);
        let cfg = qcfg();
        let mut worst = 0.0f64;
        for x in axis_points(&[0.0, 0.3, -0.3, 0.6, -0.6]) {
            let r = operator::classical_flap(&params, &u, &x, &cfg)?;
            worst = worst.max((r.value - 1.0).abs());
        }
        Ok((worst <= 1e-4, format!("max |value - 1| = {:.2e} (gate 1e-4)", worst)))
    })
}

/// The exit law integrates to one from every interior start.
pub fn criterion_2() -> CriterionResult {
    run(2, "poisson kernel has unit mass", true, || {
        let cfg = qcfg();
        let mut ladder = Vec::new();
        let mut rung = 3.0f64;
        for _ in 0..32 {
            ladder.push(1.0 + rung);
            rung *= 0.5;
        }
        let mut worst = 0.0f64;
        for n in [1usize, 2] {
            let params = FracParams::new(n, 0.5, 0)?;
            for rx in [0.0, 0.5, 0.9] {
                let mut x = vec![0.0; n];
                x[0] = rx;
                let origin = vec![0.0; n];
                let mass = quadrature::integrate_exterior_at(
                    |y: &[f64]| {
                        if geom::norm(y) <= 1.0 {
                            return 0.0;
                        }
                        kernels::poisson_kernel_ball(&params, 1.0, &x, y)
                            .unwrap_or(f64::NAN)
                    },
                    &origin,
                    1.0,
                    2.0 * params.s,
                    &ladder,
                    Some(-params.s),
                    &cfg,
                )?;
                worst = worst.max((mass.value - 1.0).abs());
            }
        }
        Ok((worst <= 1e-6, format!("max |mass - 1| = {:.2e} (gate 1e-6)", worst)))
    })
}

/// With no compensation order the two operator routes must coincide.
pub fn criterion_3() -> CriterionResult {
    run(3, "compensated route reduces at k = 0", true, || {
        let cfg = qcfg();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let orders = [0.3, 0.5, 0.7];
        let mut worst_excess = f64::NEG_INFINITY;
        let mut worst_gap = 0.0f64;
        for i in 0..20 {
            let params = FracParams::new(1, orders[i % 3], 0)?;
            let center = rng.gen_range(-1.0..1.0);
            let width = rng.gen_range(0.3..0.8);
            let amp = rng.gen_range(0.5..2.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let u = function::smooth_bump(vec![center], width, amp);
            for _ in 0..5 {
                let x = vec![rng.gen_range(-0.45..0.45)];
                let d = operator::divergent_flap(&params, &u, &x, &cfg)?;
                let c = operator::classical_flap(&params, &u, &x, &cfg)?;
                let gap = (d.value - c.value).abs();
                let budget = 3.0 * (d.error + c.error);
                worst_gap = worst_gap.max(gap);
                worst_excess = worst_excess.max(gap - budget);
            }
        }
        Ok((
            worst_excess <= 0.0,
            format!(
                "max |divergent - classical| = {:.2e}, worst gap minus 3x budget = {:.2e}",
                worst_gap, worst_excess
            ),
        ))
    })
}

/// Truncated operators close in on the compensated limit at tail speed.
pub fn criterion_4() -> CriterionResult {
    run(4, "truncation family converges", true, || {
        let params = FracParams::new(1, 0.5, 2)?;
        let cfg = qcfg();
        let u = function::power_tail(1, 2.5, 0.5, 1.0);
        let pts = axis_points(&grid::chebyshev_nodes(9, 0.5));
        let mut sups = Vec::new();
        let mut tails = Vec::new();
        for radius in [8.0, 16.0, 32.0, 64.0] {
            let rep = operator::truncated_flap(&params, &u, radius, &pts, &cfg)?;
            sups.push(rep.residual_to_limit);
            tails.push(operator::tail_integral(&params, &u, radius, &cfg)?);
        }
        let monotone = sups.windows(2).all(|w| w[1] <= w[0]);
        let c_fit = sups[0] / tails[0];
        let bounded = sups
            .iter()
            .zip(&tails)
            .all(|(s, t)| *s <= c_fit * t * (1.0 + 1e-9));
        let detail = format!(
            "sup gaps {:.3e} {:.3e} {:.3e} {:.3e}, fitted C = {:.3}, bound held: {}",
            sups[0], sups[1], sups[2], sups[3], c_fit, bounded
        );
        Ok((monotone && bounded, detail))
    })
}

/// Far-only data is bounded by the kernel constant times its tail weight.
pub fn criterion_5() -> CriterionResult {
    run(5, "far-field bound and decay", true, || {
        let params = FracParams::new(1, 0.5, 1)?;
        let cfg = qcfg();
        let bound = operator::psi_grid_bound(&params)?;
        let pts = grid::inscribed_cube_grid(1, 9, 0.95);
        let mut sups = Vec::new();
        let mut ok = true;
        for radius in [4.0, 8.0, 16.0] {
            let u = function::power_tail(1, 1.2, radius, radius + 2.0);
            let mut sup = 0.0f64;
            for x in &pts {
                sup = sup.max(operator::divergent_flap(&params, &u, x, &cfg)?.value.abs());
            }
            let tail = operator::tail_integral(&params, &u, radius, &cfg)?;
            ok &= sup <= bound * tail;
            sups.push(sup);
        }
        let decreasing = sups.windows(2).all(|w| w[1] < w[0]);
        Ok((
            ok && decreasing,
            format!(
                "sups {:.3e} {:.3e} {:.3e} under grid bound {:.2}, decreasing: {}",
                sups[0], sups[1], sups[2], bound, decreasing
            ),
        ))
    })
}

/// Weighted profile-times-polynomial reconstruction of a solved field, with
/// the measured deviation from the field it replaces. The closed algebraic
/// form makes operator evaluations on it cheap and noise-free.
fn profile_reconstruction(
    field: &dirichlet::SolutionField<f64>,
    params: &FracParams<f64>,
    degree: usize,
) -> Result<(FunctionHandle<f64>, f64)> {
    let n = params.n;
    let s = params.s;
    let fit_pts: Vec<Vec<f64>> =
        grid::inscribed_cube_grid(n, if n == 1 { 41 } else { 11 }, 0.97);
    let basis = multiindex::up_to_order(n, degree);
    let mut rows = Vec::with_capacity(fit_pts.len());
    let mut rhs = Vec::with_capacity(fit_pts.len());
    for x in &fit_pts {
        let w = (1.0 - geom::norm_sq(x)).powf(s);
        rows.push(basis.iter().map(|a| a.monomial(x) * w).collect::<Vec<f64>>());
        rhs.push(field.eval(x)?);
    }
    let fit = linalg::lstsq(&Mat::from_rows(rows), &rhs, 1e-12)?;
    let mut q = Polynomial::zero(n);
    for (alpha, c) in basis.iter().zip(&fit.solution) {
        q.add_term(alpha.clone(), *c);
    }
    let qe = q.clone();
    let handle = FunctionHandle::new(n, move |x: &[f64]| {
        let d = 1.0 - geom::norm_sq(x);
        if d > 0.0 {
            d.powf(s) * qe.eval(x)
        } else {
            0.0
        }
    })
    .with_smoothness(1)
    .with_support_radius(1.0)
    .with_breakpoints(vec![1.0]);

    let check_pts = grid::inscribed_cube_grid(n, if n == 1 { 23 } else { 7 }, 0.9);
    let mut dev = 0.0f64;
    for x in &check_pts {
        dev = dev.max((handle.eval(x) - field.eval(x)?).abs());
    }
    Ok((handle, dev))
}

/// The kernel space of the compensated problem has the counted dimension,
/// and its basis fields map back to their polynomial sources.
pub fn criterion_6() -> CriterionResult {
    run(6, "multiplicity space checks out", true, || {
        let cfg = qcfg();
        let mut detail = String::new();
        let mut ok = true;
        for (n, k) in [(1usize, 1usize), (1, 2), (1, 3), (2, 1), (2, 2)] {
            let params = FracParams::new(n, 0.5, k)?;
            let report = dirichlet::multiplicity_basis(&params, &cfg)?;
            let expected = dirichlet::count_nk(n, k) as usize;
            let rank_ok = report.rank == expected;

            let pts: Vec<Vec<f64>> = if n == 1 {
                axis_points(&[0.0, 0.2, -0.2, 0.4, -0.4])
            } else {
                vec![
                    vec![0.0, 0.0],
                    vec![0.2, 0.1],
                    vec![-0.3, 0.2],
                    vec![0.1, -0.35],
                    vec![-0.25, -0.25],
                ]
            };
            let mut worst_flap = 0.0f64;
            let mut worst_dev = 0.0f64;
            let flap_params = FracParams::new(n, 0.5, 0)?;
            for field in &report.fields {
                let p = field.offset().expect("basis fields carry their source");
                let (handle, dev) = profile_reconstruction(field, &params, k - 1)?;
                worst_dev = worst_dev.max(dev);
                for x in &pts {
                    let r = operator::classical_flap(&flap_params, &handle, x, &cfg)?;
                    let gap = (r.value - p.eval(x)).abs();
                    let tol = (3.0 * r.error).max(5e-3);
                    if gap > tol {
                        ok = false;
                    }
                    worst_flap = worst_flap.max(gap);
                }
            }
            ok &= rank_ok && worst_dev <= 1e-4;
            detail.push_str(&format!(
                "n={} k={}: rank {}/{}, surrogate dev {:.1e}, flap gap {:.1e}; ",
                n, k, report.rank, expected, worst_dev, worst_flap
            ));
        }
        Ok((ok, detail))
    })
}

/// Deterministic solve against the Monte Carlo exit-law estimate.
pub fn criterion_7() -> CriterionResult {
    run(7, "solve agrees with walk-on-spheres", true, || {
        let params = FracParams::new(1, 0.5, 0)?;
        let cfg = qcfg();
        let spec = DirichletSpec {
            radius: 1.0,
            source: function::constant(1, 0.0).with_support_radius(1.0),
            exterior: function::annulus_indicator(1, 1.0, 2.0),
            order: 0,
        };
        let field = dirichlet::solve_standard(1.0, &spec.source, &spec.exterior, &params, &cfg)?;
        let mc = McConfig { samples: 100_000, seed: 20_260_814, stream_id: 0 };
        let mut worst = f64::NEG_INFINITY;
        let mut ok = true;
        for x in axis_points(&[0.0, 0.45, -0.45, 0.8, -0.8]) {
            let est = oracle::wos_estimate(&spec, &x, &params, &mc, &cfg)?;
            let exact = field.eval(&x)?;
            let gap = (est.estimate - exact).abs();
            let budget = 3.0 * est.stderr + 1e-2;
            ok &= gap <= budget;
            worst = worst.max(gap - budget);
        }
        Ok((ok, format!("worst gap minus budget = {:.2e}", worst)))
    })
}

/// Whole shadowing pipeline on a cubic: untouched far field, near
/// s-harmonicity, improvement under dictionary growth.
pub fn criterion_8() -> CriterionResult {
    run(8, "shadowing pipeline end to end", true, || {
        let params = FracParams::new(1, 0.5, 3)?;
        let cfg = qcfg();
        let u = function::monomial(MultiIndex::new(vec![3]), 1.0);
        let shadow_cfg = ShadowConfig::<f64>::default();
        let rep = approx::shadow_harmonic(&u, 0, 0.1, &params, &shadow_cfg, &cfg)?;

        let mut pinned = true;
        for j in 1..=10 {
            let r = rep.r_eps * (1.0 + 0.1 * j as f64);
            let x = [if j % 2 == 0 { r } else { -r }];
            if rep.u_eps.eval(&x) != u.eval(&x) {
                pinned = false;
            }
        }
        let harmonic = rep.harmonicity_residual <= 5e-3;

        let mut errors = Vec::new();
        for count in [16usize, 32, 64] {
            let cfg_c = ShadowConfig { pole_count: count, rbar_override: Some(rep.rbar), ..shadow_cfg.clone() };
            let r = approx::shadow_harmonic(&u, 0, 0.1, &params, &cfg_c, &cfg)?;
            errors.push(r.achieved_cm_error);
        }
        let improving = errors[1] < errors[0] && errors[2] < errors[1];

        let detail = format!(
            "rbar = {}, r_eps = {}, exterior pinned: {}, residual {:.2e}, cm errors {:.3e} > {:.3e} > {:.3e}",
            rep.rbar, rep.r_eps, pinned, rep.harmonicity_residual, errors[0], errors[1], errors[2]
        );
        Ok((pinned && harmonic && improving, detail))
    })
}

/// Nonlinear pipeline: the defect introduced by shadowing through sin stays
/// under the unit Lipschitz budget.
pub fn criterion_9() -> CriterionResult {
    run(9, "nonlinear shadowing defect bounded", true, || {
        let params = FracParams::new(1, 0.5, 2)?;
        let cfg = qcfg();
        let u = function::monomial(MultiIndex::new(vec![2]), 1.0);
        let shadow_cfg = ShadowConfig::<f64>::default();
        let rep = approx::nonlinear_shadow(
            &u,
            |z: &[f64]| z[1].sin(),
            0,
            0.1,
            &params,
            &shadow_cfg,
            &cfg,
        )?;
        // sin is 1-Lipschitz globally, so the chain closes with L = 1 and a
        // single derivative order; rounding in sin gets an absolute hair
        let budget = rep.shadow.achieved_cm_error * (1.0 + 1e-12) + 1e-15;
        let ok = rep.eta_sup <= budget;
        Ok((
            ok,
            format!(
                "sup |eta| = {:.3e} vs unit-Lipschitz budget {:.3e} (cm error {:.3e}, swept L = {:.3})",
                rep.eta_sup, budget, rep.shadow.achieved_cm_error, rep.lipschitz
            ),
        ))
    })
}

fn brute_monomial_count(n: usize, k: usize) -> u64 {
    fn tuples_with_budget(vars: usize, budget: usize) -> u64 {
        if vars == 0 {
            return 1;
        }
        (0..=budget).map(|d| tuples_with_budget(vars - 1, budget - d)).sum()
    }
    if k == 0 {
        0
    } else {
        tuples_with_budget(n, k - 1)
    }
}

/// The closed-form dimension count against plain enumeration.
pub fn criterion_10() -> CriterionResult {
    run(10, "kernel dimension table", true, || {
        let mut ok = true;
        for n in 1..=3usize {
            for k in 0..=6usize {
                ok &= dirichlet::count_nk(n, k) == brute_monomial_count(n, k);
            }
        }
        ok &= dirichlet::count_nk(2, 2) == 3 && dirichlet::count_nk(3, 2) == 4;
        Ok((ok, "all n <= 3, k <= 6 agree with enumeration".into()))
    })
}

/// Reported only: a single constant should control the corrector solve by
/// the truncation source across the window sweep.
pub fn criterion_11() -> CriterionResult {
    run(11, "corrector-to-source ratio (diagnostic)", false, || {
        let params = FracParams::new(1, 0.5, 3)?;
        let cfg = qcfg();
        let u = function::monomial(MultiIndex::new(vec![3]), 1.0);
        let inner = grid::inscribed_cube_grid(1, 21, 0.95);
        let outer = grid::inscribed_cube_grid(1, 21, 1.9);
        let mut ratios = Vec::new();
        for rbar in [8.0, 16.0, 32.0, 64.0] {
            let shadow_cfg =
                ShadowConfig { rbar_override: Some(rbar), ..ShadowConfig::<f64>::default() };
            let rep = approx::shadow_harmonic(&u, 0, 0.1, &params, &shadow_cfg, &cfg)?;
            let mut w_sup = 0.0f64;
            for x in &inner {
                w_sup = w_sup.max(rep.w_field.eval(x)?.abs());
            }
            let mut f_sup = 0.0f64;
            for x in &outer {
                f_sup = f_sup.max(rep.f_eps.eval(x).abs());
            }
            ratios.push(w_sup / f_sup);
        }
        let c = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let spread = c / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok((
            true,
            format!(
                "corrector/source sup ratios {:.3} {:.3} {:.3} {:.3}; fitted C = {:.3}, spread x{:.2}",
                ratios[0], ratios[1], ratios[2], ratios[3], c, spread
            ),
        ))
    })
}

/// Every criterion in order.
pub fn run_all() -> Vec<CriterionResult> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
        criterion_11(),
    ]
}
