//! Probability weights in two arithmetic modes: `f64` (fast, with an error
//! budget tracked by the callers) and exact `BigRational` (slow, zero error;
//! used where bound-domination checks must not fail from roundoff).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::ops::{Add, AddAssign, Mul, Sub};

pub trait Weight:
    Clone
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + AddAssign
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    /// `2^{k-i} / (2^k - 1)` — the mass of atom `2^i` in the law of `X`
    /// conditioned on `X <= 2^k`.
    fn truncated_atom(k: u32, i: u32) -> Self;
    /// `2^{-e}`.
    fn pow2_inv(e: u32) -> Self;
    fn to_f64(&self) -> f64;
    /// Relative rounding error contributed by one multiply-add, for the
    /// caller-maintained error budget. Zero in exact mode.
    fn unit_roundoff() -> f64;
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn truncated_atom(k: u32, i: u32) -> Self {
        debug_assert!(i >= 1 && i <= k);
        // 2^{k-i}/(2^k - 1); exact numerator/denominator below 2^53 for k <= 52
        if k <= 52 {
            ((1u64 << (k - i)) as f64) / (((1u64 << k) - 1) as f64)
        } else {
            (2f64).powi(-(i as i32)) / (1.0 - (2f64).powi(-(k as i32)))
        }
    }
    fn pow2_inv(e: u32) -> Self {
        (2f64).powi(-(e as i32))
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn unit_roundoff() -> f64 {
        f64::EPSILON / 2.0
    }
}

impl Weight for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn truncated_atom(k: u32, i: u32) -> Self {
        debug_assert!(i >= 1 && i <= k);
        let num = BigInt::one() << (k - i) as usize;
        let den = (BigInt::one() << k as usize) - BigInt::one();
        BigRational::new(num, den)
    }
    fn pow2_inv(e: u32) -> Self {
        BigRational::new(BigInt::one(), BigInt::one() << e as usize)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Beyond-f64 magnitudes do not occur for probabilities.
            if self.is_positive() {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        })
    }
    fn unit_roundoff() -> f64 {
        0.0
    }
}

/// Neumaier compensated summation for `f64` reductions where the term count
/// is large enough for naive accumulation to matter.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
