//! Closed-form primitives of the St. Petersburg distribution
//! `P{X = 2^k} = 2^{-k}` (k ≥ 1): its CDF, the truncated law, moments, the
//! law of the maximum of `n` games, and the two-fold convolution tail.
//!
//! All dyadic boundary logic (`⌊log₂x⌋`, fractional parts) uses integer bit
//! operations on the IEEE-754 representation — the CDFs are discontinuous
//! exactly at powers of two and floating logarithms misclassify there.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

/// Parameter bundle used across the crate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StpParams {
    /// Number of games.
    pub n: u64,
    /// Positional parameter `γ_n = n / 2^{⌈log₂n⌉} ∈ (1/2, 1]`.
    pub gamma: f64,
    /// Offset of the maximum: `X_n* = 2^{⌈log₂n⌉ + j}`.
    pub j: i32,
    /// Truncation exponent (support cap `2^k`).
    pub k: u32,
}

impl StpParams {
    pub fn from_n(n: u64) -> Self {
        StpParams {
            n,
            gamma: gamma_of(n),
            j: 0,
            k: 1,
        }
    }
}

/// A probability with an attached worst-case absolute error bound
/// (0 in exact-rational derivations).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbValue {
    pub value: f64,
    pub err: f64,
}

impl ProbValue {
    pub fn exact(value: f64) -> Self {
        ProbValue { value, err: 0.0 }
    }
    pub fn with_err(value: f64, err: f64) -> Self {
        ProbValue { value, err }
    }
}

/// `⌊log₂ x⌋` for finite `x > 0`, exact at powers of two.
pub fn floor_log2(x: f64) -> i32 {
    debug_assert!(x > 0.0 && x.is_finite());
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    if exp != 0 {
        exp - 1023
    } else {
        // subnormal: normalize the mantissa
        let mant = bits & ((1u64 << 52) - 1);
        -1023 - 52 + 63 - mant.leading_zeros() as i32 + 1
    }
}

/// `⌈log₂ n⌉` for integer `n ≥ 1`.
pub fn ceil_log2_u64(n: u64) -> u32 {
    debug_assert!(n >= 1);
    64 - (n - 1).leading_zeros()
}

/// Fractional part `{log₂ x} = log₂x − ⌊log₂x⌋`, boundary-exact.
pub fn frac_log2(x: f64) -> f64 {
    x.log2() - floor_log2(x) as f64
}

/// CDF of the single-game payout: `F(x) = 1 − 2^{−⌊log₂x⌋}` for `x ≥ 2`.
pub fn stp_cdf(x: f64) -> ProbValue {
    if !(x >= 2.0) {
        return ProbValue::exact(0.0);
    }
    ProbValue::exact(1.0 - (2f64).powi(-floor_log2(x)))
}

/// Positional parameter `γ_n = n / 2^{⌈log₂n⌉}` (exact power-of-two division).
pub fn gamma_of(n: u64) -> f64 {
    n as f64 / (2f64).powi(ceil_log2_u64(n) as i32)
}

/// CDF of `X` conditioned on `X ≤ 2^k`.
pub fn truncated_cdf(k: u32, x: f64) -> ProbValue {
    debug_assert!(k >= 1);
    if x < 2.0 {
        return ProbValue::exact(0.0);
    }
    if x > (2f64).powi(k as i32) || floor_log2(x) as u32 >= k {
        return ProbValue::exact(1.0);
    }
    let num = 1.0 - (2f64).powi(-floor_log2(x));
    let den = 1.0 - (2f64).powi(-(k as i32));
    ProbValue::with_err(num / den, 2.0 * f64::EPSILON)
}

/// `ℓ`-th moment of the truncated payout `X^{(k)}`.
///
/// Returns `None` when the value exceeds the `f64` range (explicit overflow
/// marker; silent saturation would corrupt bound-series checks).
pub fn truncated_moment(k: u32, ell: u32) -> Option<f64> {
    debug_assert!(k >= 1 && ell >= 1);
    let den = 1.0 - (2f64).powi(-(k as i32));
    if ell == 1 {
        return Some(k as f64 / den);
    }
    let e = (ell as u64 - 1) * k as u64;
    if e >= 1023 {
        return None;
    }
    let lead = (2f64).powi((ell - 1) as i32);
    Some(((2f64).powi(e as i32) - 1.0) * lead / ((lead - 1.0) * den))
}

/// Limit weight `p_{j,γ} = e^{−γ2^{−j}}(1 − e^{−γ2^{−j}})` of the event
/// `X_n* = 2^{⌈log₂n⌉+j}`.
pub fn p_max(j: i32, gamma: f64) -> f64 {
    let lam = gamma * (2f64).powi(-j);
    let e = (-lam).exp();
    e * (1.0 - e)
}

/// `P{X_n* ≤ 2^k} = (1 − 2^{−k})^n`.
pub fn max_cdf_exact(n: u64, k: u32) -> ProbValue {
    debug_assert!(n >= 1 && k >= 1);
    let v = (1.0 - (2f64).powi(-(k as i32))).powi(n.min(i32::MAX as u64) as i32);
    ProbValue::with_err(v, n as f64 * f64::EPSILON)
}

/// `q_{n,j} = P{X_n* = 2^{⌈log₂n⌉+j}}`, `K = ⌈log₂n⌉ + j ≥ 1`.
pub fn q_max_exact(n: u64, j: i32) -> Option<ProbValue> {
    let kk = ceil_log2_u64(n) as i64 + j as i64;
    if kk < 1 {
        return None;
    }
    let k = kk as u32;
    let hi = max_cdf_exact(n, k).value;
    let lo = if k == 1 {
        0.0
    } else {
        max_cdf_exact(n, k - 1).value
    };
    Some(ProbValue::with_err(hi - lo, 2.0 * n as f64 * f64::EPSILON))
}

/// Exact-rational `q_{n,j}` for invariant tests.
pub fn q_max_rational(n: u64, j: i32) -> Option<BigRational> {
    let kk = ceil_log2_u64(n) as i64 + j as i64;
    if kk < 1 {
        return None;
    }
    let k = kk as usize;
    let pow = |k: usize| -> BigRational {
        let den = BigInt::one() << k;
        let num = (BigInt::one() << k) - BigInt::one();
        BigRational::new(num, den).pow(n as i32)
    };
    let hi = pow(k);
    let lo = if k == 1 {
        BigRational::new(BigInt::from(0), BigInt::one())
    } else {
        pow(k - 1)
    };
    Some(hi - lo)
}

/// Limit CDF of the normed maximum: `H_γ(x) = exp(−γ2^{−⌊log₂(γx)⌋})`.
pub fn h_gamma_cdf(gamma: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (-gamma * (2f64).powi(-floor_log2(gamma * x))).exp()
}

/// `P{X₁ + X₂ > 2^k + 2^ℓ}` for `1 ≤ k ≤ ℓ` (closed form).
///
/// Errors if `k > ell`; [`two_fold_tail_sorted`] normalizes the argument
/// order for callers that do not care.
pub fn two_fold_tail(k: u32, ell: u32) -> Result<ProbValue, ArgumentOrder> {
    if k > ell {
        return Err(ArgumentOrder);
    }
    debug_assert!(k >= 1);
    let p2 = |e: i32| (2f64).powi(-e);
    let v = if ell > k {
        2.0 * p2(ell as i32) + 2.0 * p2((ell + k) as i32) - 4.0 * p2(2 * ell as i32)
    } else {
        2.0 * p2(ell as i32) - p2(2 * ell as i32)
    };
    Ok(ProbValue::exact(v))
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("two_fold_tail requires k <= ell")]
pub struct ArgumentOrder;

/// Order-normalizing wrapper around [`two_fold_tail`].
pub fn two_fold_tail_sorted(a: u32, b: u32) -> ProbValue {
    let (k, ell) = if a <= b { (a, b) } else { (b, a) };
    two_fold_tail(k, ell).expect("sorted")
}

/// Exact-rational two-fold tail, for the brute-force equivalence invariant.
pub fn two_fold_tail_rational(k: u32, ell: u32) -> Option<BigRational> {
    if k > ell {
        return None;
    }
    let p2 = |e: usize| BigRational::new(BigInt::one(), BigInt::one() << e);
    let two = BigRational::from(BigInt::from(2));
    let four = BigRational::from(BigInt::from(4));
    Some(if ell > k {
        two.clone() * p2(ell as usize) + two * p2((ell + k) as usize)
            - four * p2(2 * ell as usize)
    } else {
        two * p2(ell as usize) - p2(2 * ell as usize)
    })
}

/// `E[S_n | X_n* = 2^k] = 2^k + (n−1)·k/(1−2^{−k})` under the conditional
/// representation `S_n ≗ 2^k + S_{n−1}^{(k)}`.
pub fn cond_sum_mean(n: u64, k: u32) -> f64 {
    (2f64).powi(k as i32) + (n as f64 - 1.0) * k as f64 / (1.0 - (2f64).powi(-(k as i32)))
}

/// Variance of the truncated payout `X^{(k)}`.
pub fn truncated_var(k: u32) -> f64 {
    let m1 = truncated_moment(k, 1).expect("finite");
    let m2 = truncated_moment(k, 2).expect("k <= 511");
    m2 - m1 * m1
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn cdf_closed_form() {
        assert_eq!(stp_cdf(1.9).value, 0.0);
        assert_eq!(stp_cdf(2.0).value, 0.5);
        assert_eq!(stp_cdf(5.0).value, 0.75);
        // right-continuous step at powers of two
        assert_eq!(stp_cdf(4.0).value, 0.75);
        assert_eq!(stp_cdf(4.0 - 1e-12).value, 0.5);
    }

    #[test]
    fn gamma_positional() {
        assert_eq!(gamma_of(8), 1.0);
        assert_eq!(gamma_of(6), 0.75);
        assert_eq!(gamma_of(5), 0.625);
        assert_eq!(gamma_of(1), 1.0);
    }

    #[test]
    fn truncated_cdf_values() {
        assert_eq!(truncated_cdf(1, 2.0).value, 1.0);
        assert!((truncated_cdf(2, 2.0).value - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(truncated_cdf(3, 8.0).value, 1.0);
    }

    #[test]
    fn truncated_moments() {
        assert!((truncated_moment(2, 1).unwrap() - 8.0 / 3.0).abs() < 1e-14);
        assert!((truncated_moment(3, 2).unwrap() - 16.0).abs() < 1e-12);
        assert_eq!(truncated_moment(1, 5).unwrap(), 32.0);
        assert!(truncated_moment(40, 40).is_none(), "overflow is explicit");
    }

    #[test]
    fn p_max_table1() {
        // j = −2..5 at γ = 1
        let expect = [0.018, 0.117, 0.233, 0.239, 0.172, 0.104, 0.057, 0.030];
        for (idx, e) in expect.iter().enumerate() {
            let j = idx as i32 - 2;
            assert!(
                (p_max(j, 1.0) - e).abs() < 1e-3,
                "p_max({j},1) = {}",
                p_max(j, 1.0)
            );
        }
        // the weights telescope: Σ_{j≤J} p_{j,1} = e^{−2^{−J}}
        let sum: f64 = (-2..=5).map(|j| p_max(j, 1.0)).sum();
        assert!((sum - ((-1.0 / 32f64).exp() - (-8f64).exp())).abs() < 1e-14);
        assert!((sum - 0.968898).abs() < 1e-6);
    }

    #[test]
    fn p_max_halving_identity() {
        for j in -5..10 {
            assert!((p_max(j, 0.5) - p_max(j + 1, 1.0)).abs() < 1e-16);
        }
    }

    #[test]
    fn max_law() {
        assert_eq!(max_cdf_exact(1, 3).value, 0.875);
        assert_eq!(max_cdf_exact(2, 1).value, 0.25);
        assert!((max_cdf_exact(4, 30).value - (1.0 - 4.0 * (2f64).powi(-30))).abs() < 1e-15);

        assert_eq!(q_max_exact(1, 3).unwrap().value, 0.125);
        assert_eq!(q_max_exact(2, 0).unwrap().value, 0.25);
        assert!((q_max_exact(2, 1).unwrap().value - 5.0 / 16.0).abs() < 1e-15);
        assert!(q_max_exact(2, -1).is_none(), "K = 0 rejected");
    }

    #[test]
    fn q_max_sums_to_one() {
        for &n in &[1u64, 2, 3, 6, 100, 1 << 14] {
            let lo = 1 - ceil_log2_u64(n) as i32;
            let sum: f64 = (lo..80)
                .filter_map(|j| q_max_exact(n, j))
                .map(|p| p.value)
                .sum();
            assert!((sum - 1.0).abs() < 1e-12, "n={n} sum={sum}");
        }
    }

    #[test]
    fn q_max_rational_matches_f64() {
        for &n in &[2u64, 5, 12] {
            for j in 0..6 {
                let r = q_max_rational(n, j).unwrap().to_f64().unwrap();
                let f = q_max_exact(n, j).unwrap().value;
                assert!((r - f).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn h_gamma_values() {
        assert!((h_gamma_cdf(1.0, 1.0) - (-1f64).exp()).abs() < 1e-15);
        assert!((h_gamma_cdf(0.5, 2.0) - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(h_gamma_cdf(1.0, 0.0), 0.0);
        assert!(h_gamma_cdf(1.0, 1e12) > 1.0 - 1e-9);
        // right-continuous step at x = 2^k/γ
        let below = h_gamma_cdf(1.0, 2.0 - 1e-12);
        let at = h_gamma_cdf(1.0, 2.0);
        assert!(at > below);
    }

    #[test]
    fn two_fold_values() {
        assert_eq!(two_fold_tail(1, 1).unwrap().value, 0.75);
        assert_eq!(two_fold_tail(1, 2).unwrap().value, 0.5);
        assert_eq!(two_fold_tail(2, 3).unwrap().value, 0.25);
        assert_eq!(two_fold_tail(3, 2), Err(ArgumentOrder));
        assert_eq!(two_fold_tail_sorted(3, 2).value, 0.25);
    }

    #[test]
    fn two_fold_rational_brute_force() {
        // brute-force double sum over atoms ≤ 2^{ℓ+2} plus analytic remainder
        for k in 1u32..=4 {
            for ell in k..=5 {
                let thr = (1u64 << k) + (1u64 << ell);
                let lim = ell + 2;
                let mut tail = BigRational::from(BigInt::from(0));
                for a in 1..=lim {
                    for b in 1..=lim {
                        if (1u64 << a) + (1u64 << b) > thr {
                            tail += BigRational::new(
                                BigInt::one(),
                                BigInt::one() << (a + b) as usize,
                            );
                        }
                    }
                }
                // any outcome with one payout > 2^{lim} exceeds thr; inclusion–exclusion
                let p_big = BigRational::new(BigInt::one(), BigInt::one() << lim as usize);
                let two = BigRational::from(BigInt::from(2));
                tail += two * p_big.clone() - p_big.clone() * p_big;
                let closed = two_fold_tail_rational(k, ell).unwrap();
                assert_eq!(tail, closed, "k={k} ell={ell}");
            }
        }
    }

    #[test]
    fn cond_mean() {
        assert_eq!(cond_sum_mean(1, 5), 32.0);
        assert_eq!(cond_sum_mean(2, 1), 4.0);
        assert!((cond_sum_mean(2, 2) - (4.0 + 8.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn subexp_ratio_limits_small() {
        // ratio of the two-fold tail to the single tail approaches 4 at 2^ℓ
        // and 2 at 2^ℓ − 1 (checked here at moderate ℓ; the full scan lives
        // in the asym module)
        let ell = 14u32;
        let tail2 = |y: f64| {
            // P{S₂ > y} from the sorted closed form at dyadic thresholds
            crate::lattice::sum_tail_exact(2, y).value
        };
        let single = |y: f64| 1.0 - stp_cdf(y).value;
        let x = (2f64).powi(ell as i32);
        let r_at = tail2(x) / single(x);
        let r_before = tail2(x - 1.0) / single(x - 1.0);
        assert!((r_at - 4.0).abs() < 1e-3, "{r_at}");
        assert!((r_before - 2.0).abs() < 1e-3, "{r_before}");
    }
}
