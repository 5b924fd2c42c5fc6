use nonlocal_kit::dirichlet::*;
use nonlocal_kit::function;
use nonlocal_kit::kernels::FracParams;
use nonlocal_kit::multiindex::MultiIndex;
use nonlocal_kit::operator;
use nonlocal_kit::quadrature::QuadratureConfig;

fn main() {
    let params = FracParams::new(1, 0.5, 2).unwrap().unnormalized();
    let cfg = QuadratureConfig::<f64>::default();
    let u0 = function::monomial(MultiIndex::new(vec![2]), 1.0);
    let spec = DirichletSpec {
        radius: 1.0,
        source: function::constant(1, 0.0),
        exterior: u0,
        order: 2,
    };
    let u = solve_divergent(&spec, &params, &cfg).unwrap();
    let (handle, fit_err) = u.interpolated_handle(0.85, 48).unwrap();
    println!("fit_err = {:.3e}", fit_err);
    let mut bad = 0;
    for j in 0..=20000 {
        let t = -2.2 + 4.4 * (j as f64) / 20000.0;
        let v = handle.eval(&[t]);
        if !v.is_finite() {
            bad += 1;
            if bad < 8 {
                println!("handle NaN at t = {:.12}", t);
            }
        }
    }
    println!("bad samples: {}", bad);
    for x in [0.0, 0.25, 0.492] {
        match operator::divergent_flap(&params, &handle, &[x], &cfg) {
            Ok(r) => println!("flap({:.3}) = {:.8} err={:.1e} evals={}", x, r.value, r.error, r.evals),
            Err(e) => println!("flap({:.3}) ERROR: {}", x, e),
        }
    }
}
