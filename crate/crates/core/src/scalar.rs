//! Scalar abstraction for the numerical core.
//!
//! Everything numeric is generic over [`Real`], a floating point scalar with
//! the few conversions the kernels and quadrature rules need. `f32` works for
//! smoke tests; the tolerances shipped with the crate assume `f64`.

use core::fmt::{Debug, Display};
use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps, ToPrimitive};

pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssignOps + Debug + Display + Send + Sync + 'static
{
    /// Shorthand for embedding an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal out of range for scalar type")
    }

    /// Embeds a small unsigned integer.
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("integer out of range for scalar type")
    }

    /// Lossy view as `f64`, used for reports and error payloads.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssignOps
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half<T: Real>() -> T {
        T::lit(0.5)
    }

    #[test]
    fn works_for_both_widths() {
        assert_eq!(half::<f64>(), 0.5);
        assert_eq!(half::<f32>(), 0.5f32);
        assert_eq!(<f64 as Real>::of(7), 7.0);
    }
}
