//! Function handles: evaluators plus the declarations the quadrature and
//! operator layers need (tail growth, support, radial breakpoints, declared
//! smoothness, optional exact derivatives, and point masses).
//!
//! A handle evaluates everywhere on ℝ^n. The tail exponent g declares a bound
//! |u(y)| ≤ C (1 + |y|)^g used to pick exterior transforms; a support radius
//! declares that the function is identically zero outside that ball, which
//! exact tail formulas exploit. Point masses ("atoms") carry the conceptual
//! exterior data of dictionary entries through the operators exactly.

use crate::error::{Error, Result};
use crate::geom;
use crate::multiindex::MultiIndex;
use crate::polynomial::Polynomial;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

type EvalFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
type DerivFn<T> = Arc<dyn Fn(&MultiIndex, &[T]) -> T + Send + Sync>;

#[derive(Clone)]
pub struct FunctionHandle<T> {
    n: usize,
    eval: EvalFn<T>,
    deriv: Option<DerivFn<T>>,
    /// Declared smoothness order (the function is C^m near points where it
    /// is evaluated by symmetric differences). Derivative closures, when
    /// present, are valid up to this order.
    m_avail: usize,
    /// Growth declaration: |u(y)| ≤ C (1 + |y|)^g.
    tail_exponent: T,
    /// Identically zero outside this radius, when declared.
    support_radius: Option<T>,
    /// Radii of origin-centred spheres where the function or its derivatives
    /// jump; quadrature splits segments there.
    breakpoints: Vec<T>,
    /// Point masses (location, weight) carried alongside the density part.
    atoms: Vec<(Vec<T>, T)>,
}

impl<T: Real> FunctionHandle<T> {
    pub fn new(n: usize, eval: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        FunctionHandle {
            n,
            eval: Arc::new(eval),
            deriv: None,
            m_avail: 0,
            tail_exponent: T::zero(),
            support_radius: None,
            breakpoints: Vec::new(),
            atoms: Vec::new(),
        }
    }

    pub fn with_deriv(
        mut self,
        max_order: usize,
        deriv: impl Fn(&MultiIndex, &[T]) -> T + Send + Sync + 'static,
    ) -> Self {
        self.deriv = Some(Arc::new(deriv));
        self.m_avail = self.m_avail.max(max_order);
        self
    }

    pub fn with_smoothness(mut self, m: usize) -> Self {
        self.m_avail = self.m_avail.max(m);
        self
    }

    pub fn with_tail_exponent(mut self, g: T) -> Self {
        self.tail_exponent = g;
        self
    }

    pub fn with_support_radius(mut self, r: T) -> Self {
        self.support_radius = Some(r);
        self
    }

    pub fn with_breakpoints(mut self, mut radii: Vec<T>) -> Self {
        self.breakpoints.append(&mut radii);
        self.breakpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
        self.breakpoints.dedup_by(|a, b| *a == *b);
        self
    }

    pub fn with_atoms(mut self, atoms: Vec<(Vec<T>, T)>) -> Self {
        self.atoms.extend(atoms);
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eval(&self, x: &[T]) -> T {
        debug_assert_eq!(x.len(), self.n);
        (self.eval)(x)
    }

    /// D^α u(x) from the exact derivative closure.
    pub fn deriv(&self, alpha: &MultiIndex, x: &[T]) -> Result<T> {
        alpha.checked_dim(self.n)?;
        if alpha.order() == 0 {
            return Ok(self.eval(x));
        }
        match &self.deriv {
            None => Err(Error::DerivativeUnavailable { required: alpha.order(), available: 0 }),
            Some(d) => {
                if alpha.order() > self.m_avail {
                    Err(Error::DerivativeUnavailable {
                        required: alpha.order(),
                        available: self.m_avail,
                    })
                } else {
                    Ok(d(alpha, x))
                }
            }
        }
    }

    pub fn smoothness(&self) -> usize {
        self.m_avail
    }

    pub fn has_deriv(&self) -> bool {
        self.deriv.is_some()
    }

    pub fn tail_exponent(&self) -> T {
        self.tail_exponent
    }

    pub fn support_radius(&self) -> Option<T> {
        self.support_radius
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn atoms(&self) -> &[(Vec<T>, T)] {
        &self.atoms
    }

    /// u · χ_{B_R}: the function restricted to the closed ball of radius R.
    pub fn truncated(&self, radius: T) -> Self {
        let inner = self.clone();
        let mut breaks: Vec<T> = self
            .breakpoints
            .iter()
            .copied()
            .filter(|b| *b < radius)
            .collect();
        breaks.push(radius);
        let atoms = self
            .atoms
            .iter()
            .filter(|(p, _)| geom::norm(p) <= radius)
            .cloned()
            .collect();
        FunctionHandle {
            n: self.n,
            eval: Arc::new(move |x| {
                if geom::norm(x) <= radius {
                    inner.eval(x)
                } else {
                    T::zero()
                }
            }),
            deriv: None,
            m_avail: self.m_avail,
            tail_exponent: T::zero(),
            support_radius: Some(radius.min(self.support_radius.unwrap_or(radius))),
            breakpoints: breaks,
            atoms,
        }
    }

    /// u · χ_{B_R^c}: the function cut off to the exterior of the ball.
    pub fn exterior_part(&self, radius: T) -> Self {
        let inner = self.clone();
        let mut breaks: Vec<T> = self
            .breakpoints
            .iter()
            .copied()
            .filter(|b| *b > radius)
            .collect();
        breaks.push(radius);
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let atoms = self
            .atoms
            .iter()
            .filter(|(p, _)| geom::norm(p) > radius)
            .cloned()
            .collect();
        FunctionHandle {
            n: self.n,
            eval: Arc::new(move |x| {
                if geom::norm(x) >= radius {
                    inner.eval(x)
                } else {
                    T::zero()
                }
            }),
            deriv: None,
            m_avail: self.m_avail,
            tail_exponent: self.tail_exponent,
            support_radius: self.support_radius,
            breakpoints: breaks,
            atoms,
        }
    }

    /// x ↦ u(λx). Breakpoints, supports and atom positions move to their
    /// preimages; atom weights carry the λ^{−n} of a measure pushforward so
    /// integrals against kernels transform consistently with the density
    /// part. Derivatives pick up the chain-rule factor λ^{|α|}.
    pub fn rescaled(&self, lambda: T) -> Self {
        assert!(lambda > T::zero() && lambda.is_finite());
        let inner = self.clone();
        let jac = lambda.powf(-T::of(self.n));
        let atoms = self
            .atoms
            .iter()
            .map(|(p, w)| (p.iter().map(|c| *c / lambda).collect(), *w * jac))
            .collect();
        let deriv = self.deriv.clone().map(|d| -> DerivFn<T> {
            Arc::new(move |alpha: &MultiIndex, x: &[T]| {
                let y: Vec<T> = x.iter().map(|c| *c * lambda).collect();
                lambda.powf(T::of(alpha.order())) * d(alpha, &y)
            })
        });
        FunctionHandle {
            n: self.n,
            eval: Arc::new(move |x: &[T]| {
                let y: Vec<T> = x.iter().map(|c| *c * lambda).collect();
                inner.eval(&y)
            }),
            deriv,
            m_avail: self.m_avail,
            tail_exponent: self.tail_exponent,
            support_radius: self.support_radius.map(|r| r / lambda),
            breakpoints: self.breakpoints.iter().map(|b| *b / lambda).collect(),
            atoms,
        }
    }

    /// Σ c_i u_i. Derivatives survive when every part has them; declarations
    /// combine conservatively.
    pub fn linear_combination(parts: Vec<(T, FunctionHandle<T>)>) -> Self {
        assert!(!parts.is_empty());
        let n = parts[0].1.n;
        assert!(parts.iter().all(|(_, u)| u.n == n));
        let m_avail = parts.iter().map(|(_, u)| u.m_avail).min().unwrap();
        let tail = parts
            .iter()
            .map(|(_, u)| u.tail_exponent)
            .fold(T::neg_infinity(), T::max);
        let support = parts.iter().try_fold(T::zero(), |acc, (_, u)| {
            u.support_radius.map(|r| acc.max(r))
        });
        let mut breaks: Vec<T> = parts
            .iter()
            .flat_map(|(_, u)| u.breakpoints.iter().copied())
            .collect();
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup_by(|a, b| *a == *b);
        let atoms: Vec<(Vec<T>, T)> = parts
            .iter()
            .flat_map(|(c, u)| u.atoms.iter().map(move |(p, w)| (p.clone(), *c * *w)))
            .collect();
        let all_have_deriv = parts.iter().all(|(_, u)| u.deriv.is_some());
        let eval_parts: Vec<(T, FunctionHandle<T>)> = parts.clone();
        let mut out = FunctionHandle::new(n, move |x: &[T]| {
            eval_parts
                .iter()
                .fold(T::zero(), |acc, (c, u)| acc + *c * u.eval(x))
        });
        if all_have_deriv {
            let dparts = parts;
            out = out.with_deriv(m_avail, move |alpha: &MultiIndex, x: &[T]| {
                dparts.iter().fold(T::zero(), |acc, (c, u)| {
                    acc + *c * u.deriv(alpha, x).unwrap_or_else(|_| T::nan())
                })
            });
        }
        out.m_avail = m_avail;
        out.tail_exponent = tail;
        out.support_radius = support;
        out.breakpoints = breaks;
        out.atoms = atoms;
        out
    }

    /// Largest deviation between the derivative closure and a central
    /// difference of `eval` over the given points, for consistency checks.
    pub fn deriv_spot_check(&self, alpha: &MultiIndex, points: &[Vec<T>], h: T) -> Result<T> {
        if alpha.order() != 1 {
            return Err(Error::InvalidParams(
                "spot check compares first-order derivatives".into(),
            ));
        }
        let i = alpha.0.iter().position(|&a| a == 1).unwrap();
        let mut worst = T::zero();
        for p in points {
            let d = self.deriv(alpha, p)?;
            let mut hi = p.clone();
            let mut lo = p.clone();
            hi[i] += h;
            lo[i] -= h;
            let fd = (self.eval(&hi) - self.eval(&lo)) / (T::lit(2.0) * h);
            worst = worst.max((d - fd).abs());
        }
        Ok(worst)
    }
}

impl<T> core::fmt::Debug for FunctionHandle<T>
where
    T: core::fmt::Debug,
{
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FunctionHandle")
            .field("n", &self.n)
            .field("m_avail", &self.m_avail)
            .field("tail_exponent", &self.tail_exponent)
            .field("support_radius", &self.support_radius)
            .field("breakpoints", &self.breakpoints)
            .field("atoms", &self.atoms.len())
            .finish()
    }
}

// ---------------------------------------------------------------- built-ins

/// c (with derivative zero everywhere).
pub fn constant<T: Real>(n: usize, c: T) -> FunctionHandle<T> {
    FunctionHandle::new(n, move |_: &[T]| c)
        .with_deriv(8, |_alpha, _x| T::zero())
        .with_smoothness(8)
        .with_tail_exponent(T::zero())
}

/// scale · x^α with exact derivatives.
pub fn monomial<T: Real>(alpha: MultiIndex, scale: T) -> FunctionHandle<T> {
    let n = alpha.dim();
    let a = alpha.clone();
    let g = T::of(alpha.order());
    let da = alpha;
    FunctionHandle::new(n, move |x: &[T]| scale * a.monomial(x))
        .with_deriv(8, move |beta: &MultiIndex, x: &[T]| {
            let mut coeff = T::one();
            let mut rem = Vec::with_capacity(x.len());
            for (ai, bi) in da.0.iter().zip(&beta.0) {
                if bi > ai {
                    return T::zero();
                }
                // falling factorial a (a-1) ... (a-b+1)
                for v in (ai - bi + 1)..=*ai {
                    coeff = coeff * T::of(v as usize);
                }
                rem.push(ai - bi);
            }
            scale * coeff * MultiIndex::new(rem).monomial(x)
        })
        .with_smoothness(8)
        .with_tail_exponent(g)
}

/// a · exp(−|y − c|² / w²) with exact derivatives built by polynomial
/// recursion on the exponent.
pub fn gaussian_bump<T: Real>(center: Vec<T>, width: T, amplitude: T) -> FunctionHandle<T> {
    let n = center.len();
    let c_eval = center.clone();
    let w2 = width * width;
    let eval = move |x: &[T]| {
        let d2 = geom::norm_sq(&geom::sub(x, &c_eval));
        amplitude * (-d2 / w2).exp()
    };
    let c_deriv = center;
    let deriv = move |alpha: &MultiIndex, x: &[T]| {
        // D^α e^g = e^g P_α with P_{α+e_i} = ∂_i P_α + P_α ∂_i g
        let mut p = Polynomial::<T>::constant(n, T::one());
        for (i, &ai) in alpha.0.iter().enumerate() {
            for _ in 0..ai {
                let mut next = Polynomial::<T>::zero(n);
                for (beta, &coef) in p.terms() {
                    // ∂_i of the monomial
                    if beta.0[i] > 0 {
                        let mut b = beta.clone();
                        b.0[i] -= 1;
                        next.add_term(b, coef * T::of(beta.0[i] as usize));
                    }
                    // times ∂_i g = −2 (y_i − c_i)/w² = −2/w² y_i + 2 c_i/w²
                    let mut b = beta.clone();
                    b.0[i] += 1;
                    next.add_term(b, coef * T::lit(-2.0) / w2);
                    next.add_term(beta.clone(), coef * T::lit(2.0) * c_deriv[i] / w2);
                }
                p = next;
            }
        }
        let d2 = geom::norm_sq(&geom::sub(x, &c_deriv));
        amplitude * (-d2 / w2).exp() * p.eval(x)
    };
    FunctionHandle::new(n, eval)
        .with_deriv(6, deriv)
        .with_smoothness(6)
        .with_tail_exponent(T::lit(-6.0))
}

/// Smooth compactly supported bump a · exp(1 − 1/(1 − t²)), t = |y−c|/w < 1.
pub fn smooth_bump<T: Real>(center: Vec<T>, width: T, amplitude: T) -> FunctionHandle<T> {
    let n = center.len();
    let reach = geom::norm(&center) + width;
    FunctionHandle::new(n, move |x: &[T]| {
        let t2 = geom::norm_sq(&geom::sub(x, &center)) / (width * width);
        if t2 >= T::one() {
            T::zero()
        } else {
            amplitude * (T::one() - T::one() / (T::one() - t2)).exp()
        }
    })
    .with_smoothness(6)
    .with_tail_exponent(T::zero())
    .with_support_radius(reach)
}

/// Indicator of the annulus a < |y| < b.
pub fn annulus_indicator<T: Real>(n: usize, inner: T, outer: T) -> FunctionHandle<T> {
    FunctionHandle::new(n, move |x: &[T]| {
        let r = geom::norm(x);
        if r > inner && r < outer {
            T::one()
        } else {
            T::zero()
        }
    })
    .with_tail_exponent(T::zero())
    .with_support_radius(outer)
    .with_breakpoints(vec![inner, outer])
}

/// C^∞ step that is 0 for t ≤ 0 and 1 for t ≥ 1.
fn smoothstep<T: Real>(t: T) -> T {
    if t <= T::zero() {
        T::zero()
    } else if t >= T::one() {
        T::one()
    } else {
        let e = |u: T| (-T::one() / u).exp();
        e(t) / (e(t) + e(T::one() - t))
    }
}

/// |y|^p ramped on smoothly across inner < |y| < outer; identically zero on
/// B_inner and exactly |y|^p beyond outer. Tail exponent p.
pub fn power_tail<T: Real>(n: usize, exponent: T, inner: T, outer: T) -> FunctionHandle<T> {
    FunctionHandle::new(n, move |x: &[T]| {
        let r = geom::norm(x);
        if r <= inner {
            T::zero()
        } else {
            r.powf(exponent) * smoothstep((r - inner) / (outer - inner))
        }
    })
    .with_smoothness(4)
    .with_tail_exponent(exponent)
    .with_breakpoints(vec![inner, outer])
}

/// (r² − |y|²)_+^s, the profile with constant normalized operator value
/// inside the ball of radius r.
pub fn flat_profile<T: Real>(n: usize, radius: T, s: T) -> FunctionHandle<T> {
    FunctionHandle::new(n, move |x: &[T]| {
        let d = radius * radius - geom::norm_sq(x);
        if d > T::zero() {
            d.powf(s)
        } else {
            T::zero()
        }
    })
    .with_smoothness(2)
    .with_tail_exponent(T::zero())
    .with_support_radius(radius)
    .with_breakpoints(vec![radius])
}

/// a · sin(f · d·y) for a unit direction d, with exact derivatives.
pub fn sin_composite<T: Real>(amplitude: T, frequency: T, direction: Vec<T>) -> FunctionHandle<T> {
    let n = direction.len();
    let nrm = geom::norm(&direction);
    let d: Vec<T> = direction.iter().map(|c| *c / nrm).collect();
    let d_eval = d.clone();
    FunctionHandle::new(n, move |x: &[T]| {
        amplitude * (frequency * geom::dot(x, &d_eval)).sin()
    })
    .with_deriv(8, move |alpha: &MultiIndex, x: &[T]| {
        let phase = geom::dot(x, &d) * frequency
            + T::FRAC_PI_2() * T::of(alpha.order());
        let mut coeff = amplitude * frequency.powi(alpha.order() as i32);
        for (di, &ai) in d.iter().zip(&alpha.0) {
            coeff = coeff * di.powi(ai as i32);
        }
        coeff * phase.sin()
    })
    .with_smoothness(8)
    .with_tail_exponent(T::zero())
}

// ------------------------------------------------------------ CLI spec form

/// Serializable description of the built-in functions the CLI exposes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "kebab-case",
    deny_unknown_fields,
    bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned")
)]
pub enum FunctionSpec<T> {
    Monomial {
        alpha: Vec<u32>,
        scale: T,
    },
    GaussianBump {
        center: Vec<T>,
        width: T,
        amplitude: T,
    },
    AnnulusIndicator {
        inner: T,
        outer: T,
    },
    PowerTail {
        exponent: T,
        inner: T,
        outer: T,
    },
    /// Profile (r² − |y|²)_+^s; the exponent follows the operator parameter s.
    GetoorProfile {
        radius: T,
    },
    SinComposite {
        amplitude: T,
        frequency: T,
        direction: Vec<T>,
    },
}

impl<T: Real> FunctionSpec<T> {
    /// Builds the handle in dimension `n`; `s` feeds profile exponents.
    pub fn to_handle(&self, n: usize, s: T) -> Result<FunctionHandle<T>> {
        let check_dim = |len: usize| -> Result<()> {
            if len == n {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "function spec has dimension {len}, parameters say n = {n}"
                )))
            }
        };
        match self {
            FunctionSpec::Monomial { alpha, scale } => {
                check_dim(alpha.len())?;
                Ok(monomial(MultiIndex::new(alpha.clone()), *scale))
            }
            FunctionSpec::GaussianBump { center, width, amplitude } => {
                check_dim(center.len())?;
                if *width <= T::zero() {
                    return Err(Error::Config("gaussian-bump width must be positive".into()));
                }
                Ok(gaussian_bump(center.clone(), *width, *amplitude))
            }
            FunctionSpec::AnnulusIndicator { inner, outer } => {
                if !(*inner >= T::zero() && *outer > *inner) {
                    return Err(Error::Config("annulus-indicator needs 0 <= inner < outer".into()));
                }
                Ok(annulus_indicator(n, *inner, *outer))
            }
            FunctionSpec::PowerTail { exponent, inner, outer } => {
                if !(*inner > T::zero() && *outer > *inner) {
                    return Err(Error::Config("power-tail needs 0 < inner < outer".into()));
                }
                Ok(power_tail(n, *exponent, *inner, *outer))
            }
            FunctionSpec::GetoorProfile { radius } => {
                if *radius <= T::zero() {
                    return Err(Error::Config("getoor-profile radius must be positive".into()));
                }
                Ok(flat_profile(n, *radius, s))
            }
            FunctionSpec::SinComposite { amplitude, frequency, direction } => {
                check_dim(direction.len())?;
                if geom::norm(direction) == T::zero() {
                    return Err(Error::Config("sin-composite direction must be nonzero".into()));
                }
                Ok(sin_composite(*amplitude, *frequency, direction.clone()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_derivatives() {
        // u = 2 x^3, u' = 6x^2, u'' = 12x, u''' = 12, u'''' = 0
        let u = monomial(MultiIndex::new(vec![3]), 2.0f64);
        assert_eq!(u.eval(&[2.0]), 16.0);
        assert_eq!(u.deriv(&MultiIndex::new(vec![1]), &[2.0]).unwrap(), 24.0);
        assert_eq!(u.deriv(&MultiIndex::new(vec![2]), &[2.0]).unwrap(), 24.0);
        assert_eq!(u.deriv(&MultiIndex::new(vec![3]), &[2.0]).unwrap(), 12.0);
        assert_eq!(u.deriv(&MultiIndex::new(vec![4]), &[2.0]).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_derivative_matches_finite_difference() {
        let u = gaussian_bump(vec![0.3f64, -0.1], 0.8, 1.7);
        let alpha = MultiIndex::new(vec![1, 0]);
        let pts = vec![vec![0.0, 0.0], vec![0.5, 0.4], vec![-0.6, 0.2]];
        let worst = u.deriv_spot_check(&alpha, &pts, 1e-5).unwrap();
        assert!(worst < 1e-8, "worst deviation {worst}");
        // second mixed derivative against a hand value at the center:
        // D^(1,1) at y=c is 0
        let mixed = u.deriv(&MultiIndex::new(vec![1, 1]), &[0.3, -0.1]).unwrap();
        assert!(mixed.abs() < 1e-14);
    }

    #[test]
    fn bump_has_declared_support() {
        let u = smooth_bump(vec![1.0f64], 0.5, 2.0);
        assert_eq!(u.support_radius(), Some(1.5));
        assert_eq!(u.eval(&[1.0]), 2.0);
        assert_eq!(u.eval(&[1.6]), 0.0);
        assert!(u.eval(&[1.3]) > 0.0);
    }

    #[test]
    fn power_tail_is_exact_beyond_outer() {
        let u = power_tail(1, 2.5f64, 3.0, 6.0);
        assert_eq!(u.eval(&[2.0]), 0.0);
        assert_eq!(u.eval(&[-7.0]), 7.0f64.powf(2.5));
        let mid = u.eval(&[4.5]);
        assert!(mid > 0.0 && mid < 4.5f64.powf(2.5));
    }

    #[test]
    fn truncation_and_exterior_split_reassemble() {
        let u = monomial(MultiIndex::new(vec![2]), 1.0f64);
        let lo = u.truncated(5.0);
        let hi = u.exterior_part(5.0);
        for x in [-7.0, -3.0, 0.0, 2.0, 6.0] {
            let a = lo.eval(&[x]) + hi.eval(&[x]);
            assert!((a - u.eval(&[x])).abs() < 1e-15);
        }
        assert_eq!(lo.support_radius(), Some(5.0));
    }

    #[test]
    fn sin_composite_derivs() {
        let u = sin_composite(2.0f64, 3.0, vec![1.0]);
        let pts = vec![vec![0.1], vec![-0.7]];
        let worst = u
            .deriv_spot_check(&MultiIndex::new(vec![1]), &pts, 1e-6)
            .unwrap();
        assert!(worst < 1e-7);
    }

    #[test]
    fn combination_carries_atoms_and_breaks() {
        let a = annulus_indicator(1, 1.0f64, 2.0).with_atoms(vec![(vec![3.0], 2.0)]);
        let b = constant(1, 1.0);
        let c = FunctionHandle::linear_combination(vec![(2.0, a), (1.0, b)]);
        assert_eq!(c.atoms().len(), 1);
        assert_eq!(c.atoms()[0].1, 4.0);
        assert_eq!(c.breakpoints(), &[1.0, 2.0]);
        assert_eq!(c.eval(&[1.5]), 3.0);
    }
}
