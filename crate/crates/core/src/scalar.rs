//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point type the simulator and the analytic model run on.
///
/// Implemented for `f32` and `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; used for constants and thresholds.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 constant representable in scalar type")
    }

    /// Lossy conversion from an integer count.
    fn of_u64(value: u64) -> Self {
        Self::from_u64(value).expect("integer representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `cos` and `sin` of `steps * pi / (2 * divisions)`.
///
/// Whole quarter turns come back as exact `0`/`±1`, so a beam splitter with
/// `theta = pi/2` moves the full amplitude and `cos(pi/2)` does not leak
/// a `6e-17` residue into probabilities that must be zero.
pub fn quarter_turn_cos_sin<T: Scalar>(steps: u64, divisions: u64) -> (T, T) {
    assert!(divisions > 0, "quarter-turn divisions must be positive");
    if steps.is_multiple_of(divisions) {
        return match (steps / divisions) % 4 {
            0 => (T::one(), T::zero()),
            1 => (T::zero(), T::one()),
            2 => (-T::one(), T::zero()),
            _ => (T::zero(), -T::one()),
        };
    }
    let angle = T::FRAC_PI_2() * T::of_u64(steps) / T::of_u64(divisions);
    (angle.cos(), angle.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_turns_are_exact() {
        assert_eq!(quarter_turn_cos_sin::<f64>(1, 1), (0.0, 1.0));
        assert_eq!(quarter_turn_cos_sin::<f64>(4, 2), (-1.0, 0.0));
        assert_eq!(quarter_turn_cos_sin::<f32>(0, 7), (1.0, 0.0));
        assert_eq!(quarter_turn_cos_sin::<f64>(9, 3), (0.0, -1.0));
    }

    #[test]
    fn fractional_turns_match_libm() {
        let (c, s) = quarter_turn_cos_sin::<f64>(1, 2);
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }
}
