//! Finite-scale checks of the limit and bound claims: merging distances,
//! the conditional CLT dichotomy, the large-maximum regime,
//! Chernoff/Cantelli tail domination, and the tail-ratio scans.

use crate::dist::{ceil_log2_u64, cond_sum_mean, gamma_of, stp_cdf, truncated_var};
use crate::lattice::{
    cond_sum_law, ks_distance, merge_cap, power_convolve, sum_law, sum_tail_exact, BaseAtoms,
    LatticeLaw,
};
use crate::normal::phi;
use crate::semistable::{mu1, p_weight, MixtureCdf};
use crate::weight::Weight;

/// Scan of a statistic over an x-grid, with located extremes.
#[derive(Clone, Debug)]
pub struct ScanReport {
    pub points: Vec<(f64, f64)>,
    pub sup_val: f64,
    pub inf_val: f64,
    pub sup_at: f64,
    pub inf_at: f64,
    pub meta: Vec<(String, String)>,
}

impl ScanReport {
    fn from_points(points: Vec<(f64, f64)>, meta: Vec<(String, String)>) -> Self {
        assert!(!points.is_empty());
        let (mut sup_val, mut sup_at) = (f64::NEG_INFINITY, 0.0);
        let (mut inf_val, mut inf_at) = (f64::INFINITY, 0.0);
        for &(x, s) in &points {
            if s > sup_val {
                sup_val = s;
                sup_at = x;
            }
            if s < inf_val {
                inf_val = s;
                inf_at = x;
            }
        }
        ScanReport {
            points,
            sup_val,
            inf_val,
            sup_at,
            inf_at,
            meta,
        }
    }
}

/// `h(x) = (4+x)·ln(1+x/4) − x`; satisfies `x²/(8+x) ≤ h(x) ≤ x²/4`.
pub fn h_fn(x: f64) -> f64 {
    assert!(x >= 0.0, "h is defined on x ≥ 0");
    (4.0 + x) * (x / 4.0).ln_1p() - x
}

/// `η_{j,γ} = 2^j/γ`.
pub fn eta(j: i64, gamma: f64) -> f64 {
    assert!(gamma > 0.0 && gamma <= 1.0);
    (2f64).powi(j as i32) / gamma
}

/// Chernoff-type bound `exp(−h(x⁺)/η_{j,γ_n})` for either tail of the
/// centered, n-normed truncated sum at level `k = ⌈log₂n⌉ + j`.
pub fn chernoff_bound(n: u64, j: i64, x: f64) -> f64 {
    assert!(ceil_log2_u64(n) as i64 + j >= 1);
    (-h_fn(x.max(0.0)) / eta(j, gamma_of(n))).exp()
}

/// Chebyshev–Cantelli bound `2η/(2η + x²)` for the same tails.
pub fn cantelli_bound(n: u64, j: i64, x: f64) -> f64 {
    assert!(x > 0.0);
    let e = eta(j, gamma_of(n));
    2.0 * e / (2.0 * e + x * x)
}

/// `a_{n,j} = 2^j/γ_n + ((n−1)/n)·K'/(1−2^{−K'})` with `K' = ⌈log₂n⌉+j` —
/// the exact center of the conditional block in the merging proof.
pub fn a_nj(n: u64, j: i64) -> f64 {
    let kp = ceil_log2_u64(n) as i64 + j;
    assert!(kp >= 1);
    let first = (2f64).powi(j as i32) / gamma_of(n);
    if n == 1 {
        return first;
    }
    first + (n as f64 - 1.0) / n as f64 * kp as f64 / (1.0 - (2f64).powi(-(kp as i32)))
}

/// KS distance of the standardized conditional law `(S_n − E)/s` given
/// `X_n* = 2^k` against the standard normal.
pub fn clt_distance(n: u64, k: u32) -> f64 {
    assert!(n >= 2 && k >= 1);
    let mean = cond_sum_mean(n, k);
    let var = (n as f64 - 1.0) * truncated_var(k);
    let sd = var.sqrt();
    let cap = (mean + 12.0 * sd).ceil() as u64 + (1 << k);
    let law = cond_sum_law(n, k, cap);
    let rep = ks_distance(
        &law,
        sd,
        mean,
        phi,
        12.0,
        1.0 - phi(12.0),
        1e-4,
    );
    rep.distance()
}

/// Exact two-sided deviation probability of `S_n/2^k` from `1 + nk/2^k`
/// given `X_n* = 2^k`, against the Chebyshev bound `8n/(ε²2^k)`.
pub fn largemax_check(n: u64, k: u32, eps: f64) -> (f64, f64) {
    assert!(eps > 0.0);
    assert!((1u64 << k) >= 4 * n, "regime requires 2^k ≥ 4n");
    let bound = 8.0 * n as f64 / (eps * eps * (1u64 << k) as f64);
    if n == 1 {
        return (0.0, bound);
    }
    let center = (1u64 << k) as f64 + (n * k as u64) as f64;
    let dev = eps * (1u64 << k) as f64;
    let cap = (center + dev).ceil() as u64 + 4;
    let law = cond_sum_law(n, k, cap);
    let mut inside = 0.0;
    for (v, w) in law.atoms() {
        if (v as f64 - center).abs() <= dev {
            inside += w;
        }
    }
    (1.0 - inside, bound)
}

/// Sparse exact law of `S_n` truncated at `2^{K'}`, with a tail evaluator
/// valid for thresholds `y` with `⌊log₂y⌋ = K'` (strict tails).
struct WindowTail {
    atoms: Vec<(u64, f64)>,
    suffix: Vec<f64>,
    scale: f64, // (1−2^{−K'})^n
}

impl WindowTail {
    fn build(n: u64, kp: u32) -> Self {
        let law = power_convolve::<f64>(&BaseAtoms::truncated(kp), n, None);
        let atoms: Vec<(u64, f64)> = law.atoms().collect();
        let mut suffix = vec![0.0; atoms.len() + 1];
        for i in (0..atoms.len()).rev() {
            suffix[i] = suffix[i + 1] + atoms[i].1;
        }
        let scale = (1.0 - (2f64).powi(-(kp as i32))).powi(n as i32);
        WindowTail {
            atoms,
            suffix,
            scale,
        }
    }

    /// `P{S_n > y}`, strict.
    fn tail_gt(&self, y: f64) -> f64 {
        let idx = self.atoms.partition_point(|&(v, _)| (v as f64) <= y);
        self.scale * self.suffix[idx] + (1.0 - self.scale)
    }
}

/// Shared scan core: the statistic `r(x) = P{S_n/n > x}·x·2^{−{log₂(γ_n x)}}`
/// over one dyadic period `x ∈ [2^{m+delta}/γ_n, 2^{m+1}/γ_n)`.
fn ratio_scan(n: u64, m: u32, delta: f64, points: usize) -> ScanReport {
    assert!(n <= 8 && m <= 24 && points >= 1);
    assert!((0.0..1.0).contains(&delta));
    let gamma = gamma_of(n);
    let kcap = ceil_log2_u64(n);
    let kp = m + kcap; // ⌊log₂(n·x)⌋ is constant over the period
    let wt = WindowTail::build(n, kp);
    let period_lo = (2f64).powi(m as i32) / gamma;
    let r_at = |x: f64| -> f64 {
        let frac = (gamma * x).log2() - m as f64;
        wt.tail_gt(n as f64 * x) * x * (2f64).powf(-frac)
    };
    // log-spaced fractional parts in [delta, 1)
    let mut xs: Vec<f64> = (0..points)
        .map(|i| {
            let f = delta + (1.0 - delta) * i as f64 / points as f64;
            period_lo * (2f64).powf(f)
        })
        .collect();
    // atom locations of S_n/n in the window (±1 ulp) — the sup lives at
    // interval left endpoints, which are exactly these
    let lo = period_lo * (2f64).powf(delta);
    let hi = 2.0 * period_lo;
    for &(v, _) in &wt.atoms {
        let x = v as f64 / n as f64;
        if x >= lo && x < hi {
            xs.push(x);
            let below = x * (1.0 - 1e-13);
            if below >= lo {
                xs.push(below);
            }
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x, r_at(x))).collect();
    ScanReport::from_points(
        pts,
        vec![
            ("n".into(), n.to_string()),
            ("m".into(), m.to_string()),
            ("delta".into(), delta.to_string()),
            ("gamma".into(), gamma.to_string()),
        ],
    )
}

/// Restricted scan (`{log₂(γ_n x)} ≥ delta`, `delta > 0`).
pub fn tail_ratio_scan(n: u64, m: u32, delta: f64, points: usize) -> ScanReport {
    assert!(delta > 0.0, "delta must be positive; use period_scan for the full period");
    ratio_scan(n, m, delta, points)
}

/// Unrestricted scan over one full period (the liminf/limsup display).
pub fn period_scan(n: u64, m: u32) -> ScanReport {
    ratio_scan(n, m, 0.0, 64)
}

/// Sup of `r` over `[2^m/γ_n + c, 2^{m+1}/γ_n)` against its limit
/// `1 + P{S_{n−1} > n·c}`.
pub fn finer_sup(n: u64, m: u32, c: f64) -> (f64, f64) {
    assert!(n >= 2 && n <= 8 && c > 1.0);
    let gamma = gamma_of(n);
    let kp = m + ceil_log2_u64(n);
    let wt = WindowTail::build(n, kp);
    let period_lo = (2f64).powi(m as i32) / gamma;
    let left = period_lo + c;
    let hi = 2.0 * period_lo;
    // dense near the left endpoint (where the sup is attained) + atoms
    let mut xs: Vec<f64> = (0..64)
        .map(|i| left + (hi - left) * (i as f64 / 64.0).powi(3))
        .collect();
    for &(v, _) in &wt.atoms {
        let x = v as f64 / n as f64;
        if x >= left && x < hi {
            xs.push(x);
        }
    }
    let mut sup = f64::NEG_INFINITY;
    for x in xs {
        let frac = (gamma * x).log2() - m as f64;
        let r = wt.tail_gt(n as f64 * x) * x * (2f64).powf(-frac);
        sup = sup.max(r);
    }
    let limit = 1.0 + sum_tail_exact(n - 1, n as f64 * c).value;
    (sup, limit)
}

/// O-subexponentiality ratio `P{S_n > x}/P{X > x}`.
pub fn subexp_ratio(n: u64, x: f64) -> f64 {
    assert!(x >= 2.0 && n <= 8);
    sum_tail_exact(n, x).value / (1.0 - stp_cdf(x).value)
}

/// `sup_k |P{X_n* = 2^k} − p_{k−⌈log₂n⌉, γ_n}|` — the maximum-merging
/// distance of Lemma 1, expected `O(1/n)`.
pub fn merge_distance_max(n: u64) -> f64 {
    let kcap = ceil_log2_u64(n) as i64;
    let gamma = gamma_of(n);
    let mut sup = 0.0f64;
    // admissible j: k = ⌈log₂n⌉ + j ≥ 1; beyond j = 80 both sequences are
    // below 1e−15 (q ≤ n·2^{−k}, p ≤ γ2^{−j}) and cannot move the sup
    for j in (1 - kcap)..=80 {
        let q = crate::dist::q_max_exact(n, j as i32)
            .map(|p| p.value)
            .unwrap_or(0.0);
        let p = p_weight(j, gamma);
        sup = sup.max((q - p).abs());
    }
    sup
}

/// Result of a merging-distance computation with its error decomposition.
#[derive(Clone, Copy, Debug)]
pub struct MergeReport {
    /// certified KS distance over the whole line
    pub distance: f64,
    /// certified sup over the gridded bulk `x ≤ x_hi`
    pub bulk_sup: f64,
    /// allowance above `x_hi` (max of both tails)
    pub tail_allowance: f64,
    pub x_hi: f64,
}

/// Conditional merging: KS between the exact law of `S_n/n − log₂n` given
/// `X_n* = 2^{⌈log₂n⌉+j}` and `G_{j,γ_n}`, with a Chernoff-certified cap.
pub fn merge_distance_cond(n: u64, j: i64, tol: f64) -> MergeReport {
    let kcap = ceil_log2_u64(n);
    let k = (kcap as i64 + j) as u32;
    let gamma = gamma_of(n);
    let log2n = (n as f64).log2();
    // x_hi = μ₁ + 50 puts both tails far below any observed distance
    let x_hi = mu1(j, gamma) + 50.0;
    let cap = ((log2n + x_hi) * n as f64).ceil() as u64;
    let law = cond_sum_law(n, k, cap);
    // the cap is certified: overflow ≤ Chernoff at the mapped deviation
    let dev = x_hi - a_nj(n, j);
    debug_assert!(law.overflow() <= chernoff_bound(n, j, dev) + 1e-12);
    let grid = crate::semistable::wj_grid(j, gamma, x_hi + 1.0, tol);
    let g_tail = 1.0 - grid.cdf_at(x_hi).value + tol;
    let rep = ks_distance(&law, n as f64, n as f64 * log2n, |x| grid.cdf_at(x).value, x_hi, g_tail, tol.min(5e-4));
    MergeReport {
        distance: rep.distance(),
        bulk_sup: rep.sup,
        tail_allowance: rep.tail_allowance,
        x_hi,
    }
}

/// Unconditional merging: KS between the exact law of `S_n/n − log₂n` and
/// `G_{γ_n}` through the mixture CDF. The cap allowance uses the law's own
/// exact overflow mass; the G-side allowance is the smaller of the mixture's
/// certified tail at `x_hi` and the `32/x` tail bound.
pub fn merge_distance_sum(n: u64, tol: f64) -> MergeReport {
    assert!(n <= 1 << 10, "dense engine feasibility bound");
    let gamma = gamma_of(n);
    let log2n = (n as f64).log2();
    let cap = merge_cap(n, 400);
    let law = sum_law(n, cap);
    let x_hi = cap as f64 / n as f64 - log2n;
    let mix = MixtureCdf::build(gamma, x_hi + 1.0, tol.max(1e-6));
    let g_tail = mix.tail_bound_at(x_hi).min(32.0 / x_hi);
    let rep = ks_distance(
        &law,
        n as f64,
        n as f64 * log2n,
        |x| mix.cdf_at(x).value,
        x_hi,
        g_tail,
        tol.min(5e-4),
    );
    MergeReport {
        distance: rep.distance(),
        bulk_sup: rep.sup,
        tail_allowance: rep.tail_allowance,
        x_hi,
    }
}

/// The mixture-of-Chernoff upper envelope for the tail of `S_n/n − log₂n`:
/// `Σ_{j_lo ≤ j ≤ j_hi} exp(−h((x − μ₁(j,γ_n))⁺)/η_{j,γ_n})·p_{j,γ_n}`.
pub fn fig8_bound_curve(n: u64, x: f64, j_lo: i64, j_hi: i64) -> f64 {
    assert!(j_lo <= j_hi);
    let gamma = gamma_of(n);
    (j_lo..=j_hi)
        .map(|j| {
            let dev = (x - mu1(j, gamma)).max(0.0);
            (-h_fn(dev) / eta(j, gamma)).exp() * p_weight(j, gamma)
        })
        .sum()
}

/// Exact strict tail of `S_n/n − log₂ n` from the dense engine (used to
/// check `fig8_bound_curve` domination).
pub fn exact_shifted_tail(law: &LatticeLaw<f64>, n: u64, x: f64) -> f64 {
    let y = (x + (n as f64).log2()) * n as f64;
    law.tail_gt(y)
}

/// Domination scan for criterion-level checking: exact two-sided tails of
/// `(S^{(k)}_{n−1} − (n−1)·m_k)/n` at `k = ⌈log₂n⌉+j` versus the Chernoff
/// and Cantelli bounds on a `points`-long x-grid. Returns
/// `(violations, worst_margin)` where positive margin means domination held
/// with room. Uses exact rational arithmetic when `n ≤ 8`.
pub fn bound_domination_scan(n: u64, j: i64, points: usize) -> (usize, f64) {
    let k = (ceil_log2_u64(n) as i64 + j) as u32;
    let e = eta(j, gamma_of(n));
    let x_max = 10.0 + 6.0 * (2.0 * e).sqrt();
    let mut violations = 0usize;
    let mut worst = f64::INFINITY;
    // exact tails of S^{(k)}_{n−1}, via one pass of cumulative sums
    struct CumTails {
        values: Vec<f64>,
        /// prefix[i] = P{S ≤ values[i]}, suffix[i] = P{S ≥ values[i]}
        prefix: Vec<f64>,
        suffix: Vec<f64>,
        mean: f64,
    }
    impl CumTails {
        fn at(&self, n: u64, x: f64) -> (f64, f64) {
            let up = self.mean + n as f64 * x;
            let dn = self.mean - n as f64 * x;
            let iu = self.values.partition_point(|&v| v < up);
            let upper = if iu < self.values.len() {
                self.suffix[iu]
            } else {
                self.suffix[self.values.len()] // overflow only
            };
            let id = self.values.partition_point(|&v| v <= dn);
            let lower = if id == 0 { 0.0 } else { self.prefix[id - 1] };
            (upper, lower)
        }
    }
    let tails = if n <= 8 {
        use num_rational::BigRational;
        let law = power_convolve::<BigRational>(&BaseAtoms::truncated(k), n - 1, None);
        let atoms: Vec<(u64, BigRational)> = law.atoms().collect();
        let m = atoms.len();
        let mut prefix = Vec::with_capacity(m);
        let mut acc: BigRational = Weight::zero();
        for (_, w) in &atoms {
            acc += w.clone();
            prefix.push(Weight::to_f64(&acc));
        }
        let mut suffix = vec![0.0; m + 1];
        let mut acc: BigRational = Weight::zero();
        for i in (0..m).rev() {
            acc += atoms[i].1.clone();
            suffix[i] = Weight::to_f64(&acc);
        }
        CumTails {
            values: atoms.iter().map(|(v, _)| *v as f64).collect(),
            prefix,
            suffix,
            // exact mean (n−1)·k·2^k/(2^k − 1) in f64 (well within range)
            mean: (n as f64 - 1.0) * k as f64 / (1.0 - (2f64).powi(-(k as i32))),
        }
    } else {
        let mean = (n as f64 - 1.0) * k as f64 / (1.0 - (2f64).powi(-(k as i32)));
        let cap = (mean + n as f64 * x_max).ceil() as u64 + 8;
        let law = power_convolve::<f64>(&BaseAtoms::truncated(k), n - 1, Some(cap));
        let atoms: Vec<(u64, f64)> = law.atoms().collect();
        let m = atoms.len();
        let mut prefix = Vec::with_capacity(m);
        let mut acc = crate::weight::Kahan::new();
        for &(_, w) in &atoms {
            acc.add(w);
            prefix.push(acc.value());
        }
        let mut suffix = vec![0.0; m + 1];
        suffix[m] = law.overflow();
        let mut acc = crate::weight::Kahan::new();
        acc.add(law.overflow());
        for i in (0..m).rev() {
            acc.add(atoms[i].1);
            suffix[i] = acc.value();
        }
        CumTails {
            values: atoms.iter().map(|(v, _)| *v as f64).collect(),
            prefix,
            suffix,
            mean,
        }
    };
    for i in 1..=points {
        let x = x_max * i as f64 / points as f64;
        let (up, dn) = tails.at(n, x);
        let ch = chernoff_bound(n, j, x);
        let ca = cantelli_bound(n, j, x);
        for t in [up, dn] {
            for b in [ch, ca] {
                let margin = b - t;
                worst = worst.min(margin);
                if margin < 0.0 {
                    violations += 1;
                }
            }
        }
    }
    (violations, worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_fn_examples_and_sandwich() {
        assert_eq!(h_fn(0.0), 0.0);
        assert!((h_fn(4.0) - (8.0 * (2f64).ln() - 4.0)).abs() < 1e-14);
        let mut last = -1.0;
        for i in 0..=100 {
            let x = i as f64;
            let h = h_fn(x);
            assert!(h > last, "not increasing at {x}");
            last = h;
            assert!(x * x / (8.0 + x) <= h + 1e-12 && h <= x * x / 4.0 + 1e-12, "x={x}");
        }
    }

    #[test]
    fn eta_and_bounds_examples() {
        assert_eq!(eta(0, 1.0), 1.0);
        assert_eq!(eta(3, 1.0), 8.0);
        assert_eq!(eta(0, 0.5), 2.0);
        assert_eq!(chernoff_bound(8, 0, -1.0), 1.0);
        assert!((chernoff_bound(8, 0, 4.0) - (-h_fn(4.0)).exp()).abs() < 1e-15);
        assert!((cantelli_bound(8, 0, 1.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((cantelli_bound(8, 0, (2f64).sqrt()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn a_nj_examples() {
        assert_eq!(a_nj(1, 3), 8.0);
        assert!((a_nj(2, 0) - 2.0).abs() < 1e-15);
        // |a_{n,j} − log₂n − μ₁(j,γ_n)| ≤ 2(log₂n)²/n in the central range
        for &n in &[64u64, 256, 1024] {
            let l2 = (n as f64).log2();
            let j_lo = -(l2.log2().floor() as i64);
            for j in j_lo + 1..l2 as i64 {
                let lhs = (a_nj(n, j) - l2 - mu1(j, gamma_of(n))).abs();
                assert!(lhs <= 2.0 * l2 * l2 / n as f64 + 1e-12, "n={n} j={j}: {lhs}");
            }
        }
    }

    #[test]
    fn subexp_examples() {
        assert!((subexp_ratio(1, 100.0) - 1.0).abs() < 1e-12);
        let r = subexp_ratio(2, (2f64).powi(14));
        assert!(r >= 3.99 && r <= 4.0, "{r}");
        let r = subexp_ratio(2, (2f64).powi(14) - 1.0);
        assert!(r >= 2.0 && r <= 2.01, "{r}");
    }

    #[test]
    fn ratio_scan_n1_is_one() {
        let rep = tail_ratio_scan(1, 10, 0.05, 32);
        for &(x, r) in &rep.points {
            assert!((r - 1.0).abs() < 1e-12, "x={x}: {r}");
        }
    }

    #[test]
    fn finer_sup_examples() {
        let (_, limit) = finer_sup(2, 10, 2.0);
        assert!((limit - 1.25).abs() < 1e-12);
        let (_, limit3) = finer_sup(2, 10, 3.0);
        assert!((limit3 - 1.25).abs() < 1e-12);
        // non-increasing in c
        let mut last = f64::INFINITY;
        for &c in &[1.5, 2.0, 2.5, 3.0, 4.0, 5.0] {
            let (_, l) = finer_sup(3, 10, c);
            assert!(l <= last + 1e-12);
            last = l;
        }
    }

    #[test]
    fn merge_max_basics() {
        let d1 = merge_distance_max(1);
        assert!((0.0..=1.0).contains(&d1));
        let d6 = merge_distance_max(1 << 6);
        let d12 = merge_distance_max(1 << 12);
        assert!(d12 < d6, "{d12} vs {d6}");
    }

    #[test]
    fn fig8_curve_limits() {
        let full: f64 = (-2..=11).map(|j| p_weight(j, 1.0)).sum();
        let at_low = fig8_bound_curve(128, -100.0, -2, 11);
        assert!((at_low - full).abs() < 1e-12);
        let at0 = fig8_bound_curve(128, 0.0, -2, 11);
        assert!(at0 > 0.0 && at0 < 1.0);
    }

    #[test]
    fn largemax_n1_zero() {
        let (exact, bound) = largemax_check(1, 10, 0.5);
        assert_eq!(exact, 0.0);
        assert!(bound > 0.0);
    }

    #[test]
    fn domination_small_case() {
        let (v, worst) = bound_domination_scan(8, 0, 25);
        assert_eq!(v, 0, "worst margin {worst}");
    }

    #[test]
    fn clt_small_case_sane() {
        let d = clt_distance(1 << 8, 4);
        assert!(d > 0.0 && d < 0.2, "{d}");
    }
}
