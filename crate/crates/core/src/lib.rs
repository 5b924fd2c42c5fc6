//! Numerical toolkit for the fractional Laplacian (−Δ)^s on balls, in the
//! classical setting and in the growth-compensated setting where the data may
//! grow polynomially at infinity.
//!
//! The crate is organised around a small set of building blocks:
//!
//! * [`kernels`]: the Riesz kernel |x−y|^{−(n+2s)}, its x-derivatives at the
//!   origin, Taylor remainders and the compensated kernel, plus the ball
//!   Poisson and Green kernels with their exact constants.
//! * [`quadrature`]: deterministic adaptive Gauss–Kronrod integration with
//!   radial/angular composition for balls, exteriors and principal values.
//! * [`operator`]: pointwise evaluation of the classical, compensated and
//!   truncated operators, distances modulo low-degree polynomials, and tail
//!   integrals.
//! * [`dirichlet`]: interior solves on balls from the explicit Poisson and
//!   Green kernels, polynomial-source solutions and the multiplicity space of
//!   the compensated problem.
//! * [`approx`]: dictionary fits by Poisson-kernel atoms and the shadow
//!   pipeline that produces near-solutions that agree with the data outside a
//!   large ball, including the nonlinear variant.
//! * [`oracle`]: walk-on-spheres style Monte Carlo checks and an independent
//!   polynomial-fit oracle, with reproducible seeded streams.
//!
//! Scalar-generic code is written against [`scalar::Real`]; everyday use goes
//! through the `f64` aliases at the crate root.

pub mod approx;
pub mod dirichlet;
pub mod error;
pub mod function;
pub mod geom;
pub mod grid;
pub mod interp;
pub mod kernels;
pub mod linalg;
pub mod multiindex;
pub mod operator;
pub mod oracle;
pub mod polynomial;
pub mod quadrature;
pub mod scalar;
pub mod selftest;
pub mod special;

pub use error::{Error, Result};
pub use scalar::Real;

/// Crate version string embedded in report headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Installs a global thread pool with `threads` workers for grid-level
/// parallelism. Call at most once, before any parallel work; returns quietly
/// if a pool is already installed.
pub fn init_threads(threads: usize) {
    if threads == 0 {
        return;
    }
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
}

// Double-precision aliases; the generic types live in their modules.
pub type QuadConfig64 = quadrature::QuadratureConfig<f64>;
pub type Handle64 = function::FunctionHandle<f64>;
pub type Polynomial64 = polynomial::Polynomial<f64>;
pub type FracParams64 = kernels::FracParams<f64>;
pub type DirichletSpec64 = dirichlet::DirichletSpec<f64>;
pub type SolutionField64 = dirichlet::SolutionField<f64>;
pub type Dictionary64 = approx::Dictionary<f64>;
pub type ShadowConfig64 = approx::ShadowConfig<f64>;
pub type ApproxReport64 = approx::ApproxReport<f64>;
pub type NonlinearReport64 = approx::NonlinearReport<f64>;
