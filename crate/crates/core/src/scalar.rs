use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point type used by every numerical routine in the workspace.
///
/// Implemented for `f32` and `f64`. The dynamics, spectrum estimator and
/// reward functions are written once against this trait; the crate root
/// re-exports `f64` aliases for the common case.
pub trait Scalar:
    'static
    + Send
    + Sync
    + Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Default
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + std::iter::Sum
{
    /// Converts an `f64` literal, panicking only if the type cannot hold it.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal not representable")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize not representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `log2(e)`, the factor converting nats to bits.
    #[inline]
    fn log2_e() -> Self {
        <Self as FloatConst>::LOG2_E()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an exponent expressed in nats per second to bits per second.
pub fn nats_to_bits<F: Scalar>(nats: F) -> F {
    nats * F::log2_e()
}

/// Converts an exponent expressed in bits per second to nats per second.
pub fn bits_to_nats<F: Scalar>(bits: F) -> F {
    bits * F::LN_2()
}

/// Wraps an angle difference into `(-pi, pi]`.
pub fn wrap_angle<F: Scalar>(x: F) -> F {
    let two_pi = F::TAU();
    let mut r = x % two_pi;
    if r > F::PI() {
        r -= two_pi;
    } else if r <= -F::PI() {
        r += two_pi;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_is_half_open() {
        let pi = std::f64::consts::PI;
        assert_eq!(wrap_angle(pi), pi);
        assert_eq!(wrap_angle(-pi), pi);
        assert!((wrap_angle(3.0 * pi + 0.1) - (-pi + 0.1)).abs() < 1e-12);
        assert!((wrap_angle(-2.0 * pi + 0.1) - 0.1).abs() < 1e-12);
        assert_eq!(wrap_angle(0.0f32), 0.0);
    }

    #[test]
    fn unit_conversions_invert() {
        let b = nats_to_bits(0.906f64);
        assert!((b - 1.30708).abs() < 1e-4);
        assert!((bits_to_nats(b) - 0.906).abs() < 1e-12);
    }
}
