//! Acceptance-check suite: fifteen numbered checks covering the exact
//! distributions, the limit laws, the merging distances, the tail bounds,
//! and the Monte Carlo / figure plumbing. Each check reports a headline
//! `value` against a `tolerance` plus a human-readable detail string; the
//! JSON serialization carries exactly `{check_id, status, value, tolerance}`.
//!
//! The suite reports honestly: a check that a finite-scale computation
//! refutes is reported as `fail` with the measured value, not adjusted to
//! pass.

use crate::asym::{
    bound_domination_scan, clt_distance, finer_sup, largemax_check, merge_distance_cond,
    merge_distance_max, merge_distance_sum, period_scan, subexp_ratio, tail_ratio_scan,
};
use crate::dist::p_max;
use crate::lattice::{merge_cap, sum_law};
use crate::mc::{sidewave_frequency, simulate, SimConfig};
use crate::semistable::{
    moments_wj, moments_wj_quadrature, semistable_tail_functionals, wj_grid, wj_lower_cutoff,
    MixtureCdf,
};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub check_id: String,
    /// `"pass"` or `"fail"`
    pub status: String,
    /// headline measured quantity of the check
    pub value: f64,
    /// threshold the value is compared against
    pub tolerance: f64,
    /// explanation of what was measured (not part of the JSON schema)
    #[serde(skip)]
    pub detail: String,
}

impl CheckResult {
    fn new(id: u32, pass: bool, value: f64, tolerance: f64, detail: String) -> Self {
        CheckResult {
            check_id: format!("c{id:02}"),
            status: if pass { "pass" } else { "fail" }.into(),
            value,
            tolerance,
            detail,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

pub const CHECK_COUNT: u32 = 15;

/// Run one numbered check (1..=15). Panics on an out-of-range id.
pub fn run_check(id: u32) -> CheckResult {
    match id {
        1 => check_table1(),
        2 => check_subexp(),
        3 => check_max_merge_rate(),
        4 => check_mixture_theorem(),
        5 => check_cond_merge(),
        6 => check_sum_merge(),
        7 => check_clt_dichotomy(),
        8 => check_largemax(),
        9 => check_bound_domination(),
        10 => check_tail_ratio(),
        11 => check_finer_sup(),
        12 => check_semistable_tail(),
        13 => check_wj_moments_density(),
        14 => check_monte_carlo(),
        15 => check_figures(),
        _ => panic!("unknown check id {id}"),
    }
}

/// Run the full suite in order.
pub fn run_all() -> Vec<CheckResult> {
    (1..=CHECK_COUNT).map(run_check).collect()
}

/// 1. Weight table of the maximum's limit law at γ = 1: the individual
/// `p_{j,1}` for j = −2..5 against the published roundings (±0.001), and
/// their sum against the published total 0.943 ± 0.001. The sum clause
/// fails: the true sum telescopes to e^{−1/32} − e^{−8} = 0.96890, and even
/// the rounded table entries add to 0.970; 0.943 cannot be reproduced.
fn check_table1() -> CheckResult {
    let published = [0.018, 0.117, 0.233, 0.239, 0.172, 0.104, 0.057, 0.03];
    let mut worst = 0.0f64;
    let mut sum = 0.0;
    for (i, j) in (-2..=5).enumerate() {
        let p = p_max(j, 1.0);
        sum += p;
        worst = worst.max((p - published[i]).abs());
    }
    let values_ok = worst <= 1e-3;
    let sum_dev = (sum - 0.943).abs();
    let pass = values_ok && sum_dev <= 1e-3;
    CheckResult::new(
        1,
        pass,
        sum_dev,
        1e-3,
        format!(
            "p_(j,1) j=-2..5: max |p - published| = {worst:.2e} (values clause {}); \
             sum = {sum:.6} vs published 0.943 (|dev| = {sum_dev:.4}); \
             the exact sum telescopes to e^(-1/32) - e^(-8) = {:.6}",
            if values_ok { "ok" } else { "violated" },
            (-1.0f64 / 32.0).exp() - (-8.0f64).exp(),
        ),
    )
}

/// 2. O-subexponentiality of the two-fold convolution: the ratio
/// `P{S₂ > x}/P{X > x}` sits in [3.99, 4] at x = 2^14 and in [2, 2.01]
/// at x = 2^14 − 1; a scan over x ≤ 2^16 keeps the running sup ≤ 4 and
/// dips to ≤ 2.01 near x = 2^ℓ − 1.
fn check_subexp() -> CheckResult {
    let at_pow = subexp_ratio(2, 16384.0);
    let at_pre = subexp_ratio(2, 16383.0);
    let mut sup = f64::MIN;
    let mut inf_near = f64::MAX;
    // dyadic landmarks plus a geometric sweep
    let mut xs: Vec<f64> = Vec::new();
    for l in 2..=16u32 {
        xs.push((1u64 << l) as f64);
        xs.push((1u64 << l) as f64 - 1.0);
    }
    for i in 0..256 {
        xs.push(4.0 * (2f64).powf(14.0 * i as f64 / 255.0));
    }
    for &x in &xs {
        let r = subexp_ratio(2, x);
        sup = sup.max(r);
        // values near x = 2^ℓ − 1: within 1 of a predecessor point
        if ((x + 1.0).log2() - (x + 1.0).log2().round()).abs() < 1e-9 {
            inf_near = inf_near.min(r);
        }
    }
    let pass = (3.99..=4.0 + 1e-12).contains(&at_pow)
        && (2.0 - 1e-12..=2.01).contains(&at_pre)
        && sup <= 4.0 + 1e-12
        && inf_near <= 2.01;
    CheckResult::new(
        2,
        pass,
        sup,
        4.0,
        format!(
            "ratio(2^14) = {at_pow:.6}, ratio(2^14 - 1) = {at_pre:.6}; \
             scan x <= 2^16: sup = {sup:.6}, min near 2^l - 1 = {inf_near:.6}"
        ),
    )
}

/// 3. Max-merging rate: `n · merge_distance_max(n)` stays within a factor-5
/// band over n ∈ {2^4, 2^6, …, 2^14}, i.e. the distance decays like 1/n.
fn check_max_merge_rate() -> CheckResult {
    let scaled: Vec<f64> = (2..=7)
        .map(|e| {
            let n = 1u64 << (2 * e);
            n as f64 * merge_distance_max(n)
        })
        .collect();
    let hi = scaled.iter().cloned().fold(f64::MIN, f64::max);
    let lo = scaled.iter().cloned().fold(f64::MAX, f64::min);
    let ratio = hi / lo;
    CheckResult::new(
        3,
        ratio <= 5.0 && lo > 0.0,
        ratio,
        5.0,
        format!("n*distance over n = 2^4..2^14: {scaled:.4?}; band ratio = {ratio:.4}"),
    )
}

/// 4. Mixture representation of `G_γ`: the direct inversion of `φ_γ` against
/// the weighted mixture of the conditional `G_{j,γ}` at 20 points of
/// [−2, 40] for γ ∈ {0.5, 0.75, 1}. This fails: the mixture of the
/// idealized conditional laws differs from `G_γ` by ~0.02–0.03 because the
/// conditional components double the top Lévy atom deterministically
/// instead of carrying the tie-corrected (conditioned-Poisson) top factor;
/// with the tie-corrected components the identity is exact (see the
/// `semistable` unit tests).
fn check_mixture_theorem() -> CheckResult {
    let mut worst = 0.0f64;
    let mut worst_at = (0.0, 0.0);
    for &gamma in &[0.5, 0.75, 1.0] {
        let direct = crate::semistable::w_direct_grid(gamma, 41.0, 1e-3);
        let mix = MixtureCdf::build(gamma, 41.0, 1e-6);
        for i in 0..20 {
            let x = -2.0 + 42.0 * i as f64 / 19.0;
            let d = (direct.cdf_at(x).value - mix.cdf_at(x).value).abs();
            if d > worst {
                worst = d;
                worst_at = (gamma, x);
            }
        }
    }
    CheckResult::new(
        4,
        worst <= 1e-3,
        worst,
        1e-3,
        format!(
            "max |direct - mixture| = {worst:.4} at gamma = {}, x = {:.2}; \
             the doubled-top conditional laws do not mix back to G_gamma",
            worst_at.0, worst_at.1
        ),
    )
}

/// 5. Conditional merging: `merge_distance_cond(n, 0)` decreases along
/// n = 2^7..2^10 and is ≤ 0.06 at n = 2^10. The monotone decrease holds,
/// but the distance at n = 2^10 is ≈ 0.067: the idealized `G_{0,γ}`
/// (doubled top atom) misstates the exact conditional law by a
/// tie-probability gap that shrinks much more slowly than the 0.06 budget
/// assumes.
fn check_cond_merge() -> CheckResult {
    let ds: Vec<f64> = (7..=10)
        .map(|e| merge_distance_cond(1u64 << e, 0, 1e-3).distance)
        .collect();
    let monotone = ds.windows(2).all(|w| w[1] < w[0]);
    let last = ds[3];
    CheckResult::new(
        5,
        monotone && last <= 0.06,
        last,
        0.06,
        format!(
            "distances n = 2^7..2^10: {ds:.4?} (decreasing: {monotone}); \
             final = {last:.4} vs 0.06"
        ),
    )
}

/// 6. Unconditional merging: `merge_distance_sum(n) ≤ 0.08` at n = 2^7 and
/// decreasing along n = 2^6, 2^8, 2^10.
fn check_sum_merge() -> CheckResult {
    let d6 = merge_distance_sum(64, 1e-3).distance;
    let d7 = merge_distance_sum(128, 1e-3).distance;
    let d8 = merge_distance_sum(256, 1e-3).distance;
    let d10 = merge_distance_sum(1024, 1e-3).distance;
    let pass = d7 <= 0.08 && d6 > d8 && d8 > d10;
    CheckResult::new(
        6,
        pass,
        d7,
        0.08,
        format!("distances: n=2^6 {d6:.4}, 2^7 {d7:.4}, 2^8 {d8:.4}, 2^10 {d10:.4}"),
    )
}

/// 7. Conditional CLT dichotomy: Gaussian merging when `2^k ≪ n`
/// (`clt_distance(2^12, 6) ≤ 0.02`, decreasing in n at k = 6), failure of
/// normality when `2^k ≫ n` (`clt_distance(2^6, 12) ≥ 0.1`).
fn check_clt_dichotomy() -> CheckResult {
    let small = clt_distance(1 << 12, 6);
    let large = clt_distance(1 << 6, 12);
    let seq: Vec<f64> = [8u32, 10, 12].iter().map(|&e| clt_distance(1 << e, 6)).collect();
    let monotone = seq.windows(2).all(|w| w[1] < w[0]);
    let pass = small <= 0.02 && large >= 0.1 && monotone;
    CheckResult::new(
        7,
        pass,
        small,
        0.02,
        format!(
            "clt_distance(2^12, 6) = {small:.4}; clt_distance(2^6, 12) = {large:.4} (>= 0.1); \
             k = 6 sequence n = 2^8, 2^10, 2^12: {seq:.4?} (decreasing: {monotone})"
        ),
    )
}

/// 8. Large-maximum regime: the exact probability that `S_n/X*` strays from
/// 1 by more than ε is positive but below `8n/(ε²2^k)`.
fn check_largemax() -> CheckResult {
    let (exact, bound) = largemax_check(128, 20, 0.5);
    let pass = exact > 0.0 && exact <= bound;
    CheckResult::new(
        8,
        pass,
        exact,
        bound,
        format!("P{{|S/X* - 1| > 0.5}} = {exact:.3e} vs bound 8n/(eps^2 2^k) = {bound:.3e}"),
    )
}

/// 9. Chernoff/Cantelli domination of the exact shifted conditional tails:
/// zero violations over n ∈ {8, 2^7}, j ∈ −2..10, 50-point grids; the n = 8
/// laws are evaluated in exact rational arithmetic.
fn check_bound_domination() -> CheckResult {
    let mut violations = 0usize;
    let mut worst = f64::MAX;
    for &n in &[8u64, 128] {
        for j in -2..=10i64 {
            let (v, margin) = bound_domination_scan(n, j, 50);
            violations += v;
            worst = worst.min(margin);
        }
    }
    CheckResult::new(
        9,
        violations == 0,
        violations as f64,
        0.0,
        format!(
            "violations over n in {{8, 128}}, j in -2..=10, 50-point grids: {violations}; \
             smallest bound - exact margin = {worst:.3e}"
        ),
    )
}

/// 10. Restricted tail limit: along `x = c·2^m` the normalized ratio is 1
/// within 0.02; over a full period the running extremes should fall in
/// [1.9, 2.0] and [1.0, 1.05]. The sup clause fails by one ulp-scale hair:
/// the exact sup over the period is 2 + 9e−10 > 2, because the finite-n
/// ratio overshoots its limit at the left period endpoint before the
/// two-fold tail correction decays.
fn check_tail_ratio() -> CheckResult {
    let restricted = tail_ratio_scan(4, 16, 0.1, 64);
    let dev = (restricted.sup_val - 1.0)
        .abs()
        .max((restricted.inf_val - 1.0).abs());
    let period = period_scan(4, 16);
    let pass = dev <= 0.02
        && (1.9..=2.0).contains(&period.sup_val)
        && (1.0..=1.05).contains(&period.inf_val);
    CheckResult::new(
        10,
        pass,
        period.sup_val,
        2.0,
        format!(
            "restricted scan: sup|r - 1| = {dev:.4} (<= 0.02); \
             period scan: sup = {:.12} (target [1.9, 2]), inf = {:.6} (target [1, 1.05])",
            period.sup_val, period.inf_val
        ),
    )
}

/// 11. Sharpness of the tail constant: `finer_sup(2, 16, 2)` within ±0.02 of
/// the limit 1 + P{X > 4} = 1.25.
fn check_finer_sup() -> CheckResult {
    let (sup, _allow) = finer_sup(2, 16, 2.0);
    let dev = (sup - 1.25).abs();
    CheckResult::new(
        11,
        dev <= 0.02,
        sup,
        0.02,
        format!("finer_sup(2, 16, 2) = {sup:.6}; |sup - 1.25| = {dev:.4}"),
    )
}

/// 12. Semistable tail: the period extremes of `x·(−R_γ(x))` are exactly
/// (1, 2) for each γ, and the mixture CDF certifies `1 − G₁(x) ≤ 32/x` at
/// x = 4, 8, …, 1024.
fn check_semistable_tail() -> CheckResult {
    let mut functionals_ok = true;
    for i in 0..=5 {
        let gamma = 0.5 + 0.1 * i as f64;
        let (inf_v, sup_v) = semistable_tail_functionals(gamma.min(1.0));
        if inf_v != 1.0 || sup_v != 2.0 {
            functionals_ok = false;
        }
    }
    let mix = MixtureCdf::build(1.0, 1025.0, 1e-6);
    let mut worst_xt = 0.0f64;
    let mut worst_x = 0.0;
    let mut x = 4.0f64;
    while x <= 1024.0 {
        let xt = mix.tail_bound_at(x) * x;
        if xt > worst_xt {
            worst_xt = xt;
            worst_x = x;
        }
        x *= 2.0;
    }
    let pass = functionals_ok && worst_xt <= 32.0;
    CheckResult::new(
        12,
        pass,
        worst_xt,
        32.0,
        format!(
            "tail functionals (1, 2) exact for gamma in 0.5..1.0: {functionals_ok}; \
             max x*(1 - G_1(x)) over x = 4..1024 is {worst_xt:.4} at x = {worst_x} (<= 32)"
        ),
    )
}

/// 13. Moments and density bound of `W_{j,γ}`: density-quadrature mean and
/// variance match the closed forms within 1e−3 relative, and the density
/// stays below `(√π/4)·2^{−j/2} + 1/2` on a sweep of the bulk.
fn check_wj_moments_density() -> CheckResult {
    let mut worst_rel = 0.0f64;
    let mut density_ok = true;
    let mut detail = String::new();
    for &(j, gamma) in &[(0i64, 1.0f64), (2, 1.0), (0, 0.5)] {
        let (m_q, v_q) = moments_wj_quadrature(j, gamma);
        let (m_c, v_c) = moments_wj(j, gamma);
        let rel = ((m_q - m_c) / m_c).abs().max(((v_q - v_c) / v_c).abs());
        worst_rel = worst_rel.max(rel);
        // density sweep over the bulk window
        let sd = v_c.sqrt();
        let lo = wj_lower_cutoff(j, gamma, 1e-9) - 2.0;
        let hi = m_c + 8.0 * sd;
        let grid = wj_grid(j, gamma, lo.abs().max(hi), 1e-9);
        let steps = ((hi - lo) / 0.05).ceil() as usize;
        let mut sup_pdf = 0.0f64;
        for i in 0..=steps {
            let x = lo + (hi - lo) * i as f64 / steps as f64;
            sup_pdf = sup_pdf.max(grid.pdf_at(x).value);
        }
        let bound = (std::f64::consts::PI.sqrt() / 4.0) * (2f64).powf(-(j as f64) / 2.0) + 0.5;
        if sup_pdf > bound {
            density_ok = false;
        }
        detail.push_str(&format!(
            "(j={j}, gamma={gamma}): rel err {rel:.2e}, sup pdf {sup_pdf:.4} vs bound {bound:.4}; "
        ));
    }
    CheckResult::new(
        13,
        worst_rel <= 1e-3 && density_ok,
        worst_rel,
        1e-3,
        detail.trim_end_matches("; ").to_string(),
    )
}

/// 14. Monte Carlo cross-validation at n = 2^7, 10^5 reps, fixed seed:
/// KS distance between the empirical sum distribution and the exact lattice
/// law ≤ 0.01, and the conditional side-wave support property
/// `X* < S < 2X*` holds with frequency ≥ 0.99 for
/// `k ≥ log₂n + log₂log₂n + 1` (= 10.81, so k ≥ 11 at n = 2^7).
///
/// The KS clause passes easily (≈0.0025), but the side-wave clause fails:
/// the property is asymptotic in k and has not reached 0.99 at this n —
/// the pooled frequency is ≈0.94 over k ≥ 11 and ≈0.989 even over k ≥ 12,
/// first clearing 0.99 from k ≥ 13.
fn check_monte_carlo() -> CheckResult {
    let cfg = SimConfig {
        n: 128,
        reps: 100_000,
        seed: crate::figures::DEFAULT_SEED,
        bins: 64,
    };
    let out = simulate(&cfg);
    let law = sum_law(cfg.n, merge_cap(cfg.n, 2000));
    let ks = empirical_ks(&out.rows, &law);
    // k_min = ⌈log₂n + log₂log₂n + 1⌉
    let log2n = (cfg.n as f64).log2();
    let k_min = (log2n + log2n.log2() + 1.0).ceil() as u32;
    let (inside, qualifying) = sidewave_frequency(&out, k_min);
    let freq = inside as f64 / qualifying as f64;
    let (in12, q12) = sidewave_frequency(&out, k_min + 1);
    let pass = ks <= 0.01 && qualifying > 0 && freq >= 0.99;
    CheckResult::new(
        14,
        pass,
        ks,
        0.01,
        format!(
            "KS(empirical, exact) = {ks:.5} over {} reps; side-wave frequency \
             k >= {k_min}: {inside}/{qualifying} = {freq:.4} (>= 0.99; \
             k >= {} gives {:.4})",
            cfg.reps,
            k_min + 1,
            in12 as f64 / q12 as f64
        ),
    )
}

/// KS distance between the empirical distribution of simulated sums and an
/// exact lattice law, walking the merged jump set of both step functions;
/// sample mass beyond the law's cap is compared against the law's overflow.
fn empirical_ks(rows: &[crate::mc::SimRow], law: &crate::lattice::LatticeLaw<f64>) -> f64 {
    use std::collections::BTreeMap;
    let n_samp = rows.len() as f64;
    let cap = law.cap().expect("dense law required");
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut above_cap = 0u64;
    for r in rows {
        if r.sum >= cap as u128 {
            above_cap += 1;
        } else {
            *counts.entry(r.sum as u64).or_insert(0) += 1;
        }
    }
    let mut sup = 0.0f64;
    let mut f_emp = 0.0;
    let mut f_law = crate::weight::Kahan::new();
    let mut emp_iter = counts.iter().peekable();
    for (v, w) in law.atoms() {
        // empirical jumps strictly below the next law atom
        while let Some((&ev, &ec)) = emp_iter.peek() {
            if ev < v {
                f_emp += ec as f64 / n_samp;
                sup = sup.max((f_emp - f_law.value()).abs());
                emp_iter.next();
            } else {
                break;
            }
        }
        // left limit at v, then both jumps applied
        sup = sup.max((f_emp - f_law.value()).abs());
        if let Some((&ev, &ec)) = emp_iter.peek() {
            if ev == v {
                f_emp += ec as f64 / n_samp;
                emp_iter.next();
            }
        }
        f_law.add(w);
        sup = sup.max((f_emp - f_law.value()).abs());
    }
    for (_, &ec) in emp_iter {
        f_emp += ec as f64 / n_samp;
        sup = sup.max((f_emp - f_law.value()).abs());
    }
    // beyond the cap both tails are small; bound the discrepancy there
    sup.max((above_cap as f64 / n_samp - law.overflow()).abs())
}

/// 15. Figure data regeneration: every figure file is byte-identical across
/// two runs with the same seed, carries a provenance header and the
/// documented schema, and the fig8 bound dominates the exact tail up to the
/// truncated-j mass.
fn check_figures() -> CheckResult {
    let reps = 100_000;
    let a = crate::figures::all(crate::figures::DEFAULT_SEED, reps);
    let b = crate::figures::all(crate::figures::DEFAULT_SEED, reps);
    let mut problems: Vec<String> = Vec::new();
    if a != b {
        problems.push("outputs differ between runs".into());
    }
    let expected_cols = [
        ("fig1.csv", 5usize),
        ("fig2.csv", 6),
        ("fig3.csv", 7),
        ("figx2.csv", 5),
        ("fig8.csv", 3),
        ("table1.csv", 2),
    ];
    for (i, (name, body)) in a.iter().enumerate() {
        let (want_name, want_cols) = expected_cols[i];
        if name != want_name {
            problems.push(format!("unexpected file name {name}"));
            continue;
        }
        let mut lines = body.lines();
        match lines.next() {
            Some(h) if h.starts_with("# provenance: stp ") => {}
            _ => problems.push(format!("{name}: missing provenance header")),
        }
        let header_cols = lines.next().map(|h| h.split(',').count()).unwrap_or(0);
        if header_cols != want_cols {
            problems.push(format!(
                "{name}: header has {header_cols} columns, expected {want_cols}"
            ));
        }
        let mut rows = 0usize;
        for line in lines {
            rows += 1;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != want_cols
                || fields.iter().any(|f| f.parse::<f64>().is_err())
            {
                problems.push(format!("{name}: malformed row {line:?}"));
                break;
            }
        }
        if rows == 0 {
            problems.push(format!("{name}: no data rows"));
        }
    }
    // fig8 domination up to truncated mass
    let fig8 = &a[4].1;
    let trunc: f64 = fig8
        .lines()
        .next()
        .and_then(|h| h.split("truncated_mass=").nth(1))
        .and_then(|v| v.parse().ok())
        .unwrap_or(f64::NAN);
    for line in fig8.lines().skip(2) {
        let f: Vec<f64> = line.split(',').filter_map(|v| v.parse().ok()).collect();
        if f.len() == 3 && f[1] > f[2] + trunc + 1e-12 {
            problems.push(format!("fig8: exact tail exceeds bound at x = {}", f[0]));
        }
    }
    let pass = problems.is_empty();
    CheckResult::new(
        15,
        pass,
        problems.len() as f64,
        0.0,
        if pass {
            "6 files, deterministic bytes, schemas valid, fig8 bound dominates".into()
        } else {
            problems.join("; ")
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_schema_is_four_fields() {
        let r = CheckResult::new(1, true, 0.5, 1.0, "detail".into());
        let j = serde_json::to_value(&r).unwrap();
        let obj = j.as_object().unwrap();
        assert_eq!(obj.len(), 4);
        assert_eq!(obj["check_id"], "c01");
        assert_eq!(obj["status"], "pass");
        assert!(obj.get("detail").is_none());
    }

    #[test]
    fn check_ids_are_stable() {
        assert_eq!(CheckResult::new(15, false, 0.0, 0.0, String::new()).check_id, "c15");
    }
}
