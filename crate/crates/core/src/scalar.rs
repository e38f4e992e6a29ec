//! The real-valued scalar abstraction used by the maximal-function layer.
//!
//! Everything in [`crate::maximal`] is written against [`Scalar`], so the same
//! code runs in `f64` for quick experiments and in exact big rationals when
//! level-set boundaries must be decided exactly.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

pub trait Scalar: Num + Signed + PartialOrd + Clone + FromPrimitive + ToPrimitive + Debug + Send + Sync {
    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer fits every scalar type")
    }

    /// `base^{-exp}` computed in the scalar type.
    fn inv_pow(base: u64, exp: u32) -> Self {
        let denom = Self::from_u64(base).expect("small base").pow_u32(exp);
        Self::one() / denom
    }

    fn pow_u32(&self, exp: u32) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl<T> Scalar for T where T: Num + Signed + PartialOrd + Clone + FromPrimitive + ToPrimitive + Debug + Send + Sync {}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    #[test]
    fn exact_inverse_powers() {
        let x: BigRational = Scalar::inv_pow(2, 3);
        assert_eq!(x, BigRational::new(BigInt::from(1), BigInt::from(8)));
        let y: f64 = Scalar::inv_pow(3, 2);
        assert!((y - 1.0 / 9.0).abs() < 1e-15);
    }
}
