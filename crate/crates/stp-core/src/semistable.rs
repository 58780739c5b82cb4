//! The limit laws: the semistable `W_γ` and the conditional `W_{j,γ}`.
//!
//! Both are infinitely divisible with purely atomic Lévy measure supported
//! on `{2^k/γ}`. `W_γ` carries mass `γ2^{-k}` at every integer `k` with the
//! bounded compensator `x/(1+x²)`; `W_{j,γ}` carries the same masses for
//! `k < j`, a doubled mass `2γ2^{-j}` at the top location `2^j/γ`, the full
//! compensator `x`, and drift `μ₁ = 2^j/γ + log₂(2^j/γ)`.
//!
//! Everything here reduces to evaluating the characteristic functions with
//! certified truncation of the atom family and inverting them through
//! [`crate::quad::InversionGrid`].

use crate::quad::{exp_tail_over_t, InversionGrid, InversionResult};
use num_complex::Complex64;

pub const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// `s_γ = −log₂ γ`.
pub fn s_gamma(gamma: f64) -> f64 {
    -gamma.log2()
}

/// `u_γ = Σ_{k≥1} γ²/(γ²+4^k) − Σ_{k≥0} 1/(1+γ²4^k)`, summed until the
/// terms drop below 1e−17 (ratio-4 decay, ≈30 terms each).
pub fn u_gamma(gamma: f64) -> f64 {
    assert!((0.5..=1.0).contains(&gamma));
    let g2 = gamma * gamma;
    let mut s = 0.0;
    let mut four = 4.0f64;
    loop {
        let term = g2 / (g2 + four);
        s += term;
        if term < 1e-17 {
            break;
        }
        four *= 4.0;
    }
    let mut four = 1.0f64;
    loop {
        let term = 1.0 / (1.0 + g2 * four);
        s -= term;
        if term < 1e-17 {
            break;
        }
        four *= 4.0;
    }
    s
}

/// Mixture weight `p_{j,γ} = e^{−γ2^{−j}}(1 − e^{−γ2^{−j}})`
/// (same object as [`crate::dist::p_max`], re-exposed at `i64` index).
///
/// These telescope: `Σ_{j≤J} p_{j,γ} = e^{−γ2^{−J}}`, so the upper tail is
/// `Σ_{j>J} p_{j,γ} = 1 − e^{−γ2^{−J}} ≤ γ2^{−J}`.
pub fn p_weight(j: i64, gamma: f64) -> f64 {
    crate::dist::p_max(j as i32, gamma)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Compensator {
    /// `x/(1+x²)` — unconditional series.
    Bounded,
    /// `x` — conditional series (its atoms are summable near +∞).
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kind {
    Unconditional { gamma: f64 },
    Conditional { j: i64, gamma: f64 },
}

/// Drift plus a truncated window of the countable atom family.
#[derive(Clone, Debug)]
pub struct LevyAtomSeries {
    pub drift: f64,
    /// `(location, mass)`, locations strictly increasing.
    pub atoms: Vec<(f64, f64)>,
    pub compensator: Compensator,
    pub kind: Kind,
}

/// Materialize the atom family between indices `k_min..=k_max`
/// (`k_max` is clamped to `j` for the conditional kind, whose top atom has
/// the doubled mass `2γ2^{−j}`).
pub fn levy_series(kind: Kind, k_min: i64, k_max: i64) -> LevyAtomSeries {
    match kind {
        Kind::Unconditional { gamma } => LevyAtomSeries {
            drift: s_gamma(gamma) + u_gamma(gamma),
            atoms: (k_min..=k_max)
                .map(|k| ((2f64).powi(k as i32) / gamma, gamma * (2f64).powi(-(k as i32))))
                .collect(),
            compensator: Compensator::Bounded,
            kind,
        },
        Kind::Conditional { j, gamma } => {
            let top = j.min(k_max);
            LevyAtomSeries {
                drift: mu1(j, gamma),
                atoms: (k_min..=top)
                    .map(|k| {
                        let m = gamma * (2f64).powi(-(k as i32));
                        ((2f64).powi(k as i32) / gamma, if k == j { 2.0 * m } else { m })
                    })
                    .collect(),
                compensator: Compensator::Full,
                kind,
            }
        }
    }
}

/// `μ₁(j,γ) = 2^j/γ + log₂(2^j/γ)` — the mean of `W_{j,γ}`.
pub fn mu1(j: i64, gamma: f64) -> f64 {
    let xj = (2f64).powi(j as i32) / gamma;
    xj + xj.log2()
}

/// Closed-form `(mean, variance)` of `W_{j,γ}`: `(μ₁, 3·2^j/γ)`.
pub fn moments_wj(j: i64, gamma: f64) -> (f64, f64) {
    (mu1(j, gamma), 3.0 * (2f64).powi(j as i32) / gamma)
}

/// `e^{iθ} − 1 − iθ`, evaluated without cancellation for small `θ`.
#[inline]
fn cis_m1_m_it(theta: f64) -> Complex64 {
    let s = (theta / 2.0).sin();
    let re = -2.0 * s * s;
    let im = if theta.abs() < 1e-3 {
        let t2 = theta * theta;
        theta * t2 * (-1.0 / 6.0 + t2 / 120.0)
    } else {
        theta.sin() - theta
    };
    Complex64::new(re, im)
}

/// Lower truncation index: keep atoms with `k ≥ k_min` so the quadratic
/// residual `(t²/2)·Σ_{k<k_min} x_k²·mass = (t²/2)·2^{k_min}/γ` stays
/// below `budget`.
fn k_min_for(gamma: f64, t: f64, budget: f64) -> i64 {
    if t == 0.0 {
        return 0;
    }
    // 2^{k_min} < 2·γ·budget/t²
    ((2.0 * gamma * budget / (t * t)).log2().floor() as i64).min(0)
}

/// `φ_γ(t)` for the semistable `W_γ`, with residual below `tol`:
/// `log φ = it(s_γ+u_γ) + Σ_k (e^{itx_k} − 1 − itx_k/(1+x_k²))·γ2^{−k}`
/// at `x_k = 2^k/γ`, `k ∈ ℤ`, truncated so that
/// `(t²/2)Σ_{k<k_min} x²m + Σ_{k>k_max} (2+|t|/x_k)m < tol`.
pub fn charfn_w(gamma: f64, t: f64, tol: f64) -> Complex64 {
    assert!(tol > 0.0);
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let k_min = k_min_for(gamma, t, tol / 2.0);
    // upper residual 2γ2^{−K} + |t|γ²4^{−K}/3 < tol/2
    let mut k_max = 1i64;
    while 2.0 * gamma * (2f64).powi(-(k_max as i32))
        + t.abs() * gamma * gamma * (4f64).powi(-(k_max as i32)) / 3.0
        >= tol / 2.0
    {
        k_max += 1;
    }
    let mut log_phi = Complex64::new(0.0, t * (s_gamma(gamma) + u_gamma(gamma)));
    for k in k_min..=k_max {
        let x = (2f64).powi(k as i32) / gamma;
        let m = gamma * (2f64).powi(-(k as i32));
        // e^{iθ} − 1 − iθ/(1+x²) = (e^{iθ} − 1 − iθ) + iθ·x²/(1+x²)
        let theta = t * x;
        let term = cis_m1_m_it(theta) + Complex64::new(0.0, theta * x * x / (1.0 + x * x));
        log_phi += term * m;
    }
    log_phi.exp()
}

/// `φ_{j,γ}(t)` for the conditional limit `W_{j,γ}`:
/// `log φ = itμ₁ + Σ_{k≤j} (e^{itx_k} − 1 − itx_k)·(1+𝟙{k=j})·γ2^{−k}`.
pub fn charfn_wj(j: i64, gamma: f64, t: f64, tol: f64) -> Complex64 {
    assert!(tol > 0.0);
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let k_min = k_min_for(gamma, t, tol).min(j);
    let mut log_phi = Complex64::new(0.0, t * mu1(j, gamma));
    for k in k_min..=j {
        let x = (2f64).powi(k as i32) / gamma;
        let mut m = gamma * (2f64).powi(-(k as i32));
        if k == j {
            m *= 2.0;
        }
        log_phi += cis_m1_m_it(t * x) * m;
    }
    log_phi.exp()
}

/// Characteristic function of the exact conditional component that accounts
/// for ties at the maximal payout. With `λ = γ2^{−j}` and `x_j = 2^j/γ`,
///
/// `φ(t) = e^{it(log₂x_j − 1)} · (e^{λ(e^{itx_j}−1)} − e^{−λ})/(1 − e^{−λ})
///         · exp Σ_{k<j}(e^{itx_k} − 1 − itx_k)γ2^{−k}`,
///
/// i.e. the top location carries a Poisson(λ) number of jumps conditioned
/// to be ≥ 1, not the doubled deterministic mass of `φ_{j,γ}`. Mixing these
/// components with the weights `p_{j,γ}` reproduces `φ_γ` exactly; mixing
/// the `φ_{j,γ}` does not (the discrepancy is ≈1.7e−2 at `γ = 1, t = 1`).
pub fn charfn_wj_exact_component(j: i64, gamma: f64, t: f64, tol: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let xj = (2f64).powi(j as i32) / gamma;
    let lam = gamma * (2f64).powi(-(j as i32));
    let k_min = k_min_for(gamma, t, tol).min(j - 1);
    let mut log_u = Complex64::new(0.0, 0.0);
    for k in k_min..j {
        let x = (2f64).powi(k as i32) / gamma;
        let m = gamma * (2f64).powi(-(k as i32));
        log_u += cis_m1_m_it(t * x) * m;
    }
    let drift = Complex64::new(0.0, t * (xj.log2() - 1.0)).exp();
    // (e^{λ(cis(θ)−1)} − e^{−λ})/(1 − e^{−λ}) → cis(θ) as λ → 0; the exact
    // form loses everything to cancellation (and divides 0/0) once
    // e^{−λ} rounds to 1, so switch to the limit below λ = 1e−8 (the
    // neglected correction is O(λ))
    let top = if lam < 1e-8 {
        Complex64::cis(t * xj)
    } else {
        let em = (-lam).exp();
        ((Complex64::cis(t * xj) - 1.0).scale(lam).exp() - em) / (1.0 - em)
    };
    drift * top * log_u.exp()
}

/// Piecewise bound on `Re log φ_{j,γ}(t)`:
/// `−2|t|/π` for `|t| > πγ2^{−j}/2`, else `−(8/(π²γ))·2^j·t²`.
///
/// The quadratic constant follows from
/// `Re log φ ≤ −(4t²/π²γ)·Σ_{k≤j} 2^k = −(8t²/π²γ)·2^j` on that range
/// (via `1 − cos θ ≥ (2/π²)θ²` for `|θ| ≤ π`). A commonly quoted `16/π²`
/// is not a valid constant for γ > 1/2: at `j = 0, γ = 1` the true decay
/// is `−(3/2)t²` (half the variance) while `16/π² ≈ 1.62 > 3/2`.
pub fn real_part_bound(j: i64, gamma: f64, t: f64) -> f64 {
    let t = t.abs();
    if t == 0.0 {
        return 0.0;
    }
    let pi = std::f64::consts::PI;
    let cut = std::f64::consts::FRAC_PI_2 * gamma * (2f64).powi(-(j as i32));
    if t > cut {
        -2.0 * t / pi
    } else {
        -(8.0 / (pi * pi * gamma)) * (2f64).powi(j as i32) * t * t
    }
}

/// Truncation point `T` with `∫_T^∞ e^{−2t/π}/t dt < budget`, at least
/// past the exponential-branch threshold of `real_part_bound`.
fn t_max_for(j: i64, gamma: f64, budget: f64) -> f64 {
    let a = 2.0 / std::f64::consts::PI;
    let mut t = (std::f64::consts::FRAC_PI_2 * gamma * (2f64).powi(-(j as i32))).max(8.0);
    while exp_tail_over_t(a, t) >= budget {
        t *= 1.25;
    }
    t
}

/// Effective lower edge of the support of the *truncated* series used at
/// tolerance `tol`: with atoms kept down to `k_min`, every realization is
/// at least `μ₁ − (j − k_min + 2)` (each compensated atom contributes at
/// most 1 of downward drift, the doubled top contributes 2). Below this
/// point the true CDF is at most `tol`.
pub fn wj_lower_cutoff(j: i64, gamma: f64, tol: f64) -> f64 {
    // worst k_min over the t-range of any grid: use a large |t| cap of 1e3
    let k_min = k_min_for(gamma, 1e3, tol).min(j);
    mu1(j, gamma) - ((j - k_min) as f64 + 2.0)
}

/// Inversion grid for `G_{j,γ}` valid on `|x| ≤ x_max`, with certified
/// truncation from `real_part_bound`.
pub fn wj_grid(j: i64, gamma: f64, x_max: f64, tol: f64) -> InversionGrid {
    let t_max = t_max_for(j, gamma, tol / 2.0 * std::f64::consts::PI);
    let a = 2.0 / std::f64::consts::PI;
    let cdf_tail = exp_tail_over_t(a, t_max);
    let pdf_tail = (-a * t_max).exp() / 2.0;
    let phi_tol = tol * 1e-2;
    InversionGrid::build(
        move |t| charfn_wj(j, gamma, t, phi_tol),
        t_max,
        x_max,
        (2f64).powi(j as i32) / gamma,
        cdf_tail,
        pdf_tail,
    )
}

/// `G_{j,γ}(x)` by Gil–Pelaez inversion at a single point.
pub fn cdf_wj(j: i64, gamma: f64, x: f64, tol: f64) -> InversionResult {
    assert!(tol >= 1e-10);
    let g = wj_grid(j, gamma, x.abs().max(1.0), tol);
    let r = g.cdf_at(x);
    InversionResult {
        value: r.value,
        err: r.err + tol,
    }
}

/// Density `g_{j,γ}(x)` at a single point.
pub fn pdf_wj(j: i64, gamma: f64, x: f64, tol: f64) -> InversionResult {
    assert!(tol >= 1e-10);
    let g = wj_grid(j, gamma, x.abs().max(1.0), tol);
    let r = g.pdf_at(x);
    InversionResult {
        value: r.value,
        err: r.err + tol,
    }
}

/// Mean and variance of `W_{j,γ}` by density quadrature over a window that
/// captures all but a negligible sliver of mass; the oracle for
/// [`moments_wj`].
pub fn moments_wj_quadrature(j: i64, gamma: f64) -> (f64, f64) {
    let tol = 1e-9;
    let xj = (2f64).powi(j as i32) / gamma;
    let lo = wj_lower_cutoff(j, gamma, 1e-12) - 4.0;
    // upper tail is dominated by Poisson jump counts at the top atoms:
    // 30 extra top-jumps of mass is vanishingly unlikely
    let hi = mu1(j, gamma) + 30.0 * xj + 30.0;
    let grid = wj_grid(j, gamma, lo.abs().max(hi), tol);
    // GL-16 panels in x of width ~1/4
    let panels = (((hi - lo) * 4.0).ceil() as usize).max(8);
    let h = (hi - lo) / panels as f64;
    let mut m0 = crate::weight::Kahan::new();
    let mut m1 = crate::weight::Kahan::new();
    let mut m2 = crate::weight::Kahan::new();
    use rayon::prelude::*;
    let parts: Vec<(f64, f64, f64)> = (0..panels)
        .into_par_iter()
        .map(|p| {
            let x0 = lo + p as f64 * h;
            let mut a = 0.0;
            let mut b = 0.0;
            let mut c = 0.0;
            for q in 0..16 {
                let x = x0 + h * (crate::quad::GL16_NODES[q] + 1.0) / 2.0;
                let w = crate::quad::GL16_WEIGHTS[q] * h / 2.0;
                let g = grid.pdf_at(x).value;
                a += w * g;
                b += w * x * g;
                c += w * x * x * g;
            }
            (a, b, c)
        })
        .collect();
    for (a, b, c) in parts {
        m0.add(a);
        m1.add(b);
        m2.add(c);
    }
    let mass = m0.value();
    let mean = m1.value() / mass;
    let var = m2.value() / mass - mean * mean;
    debug_assert!((mass - 1.0).abs() < 1e-4, "window missed mass: {mass}");
    (mean, var)
}

/// Bulk evaluator for the mixture CDF `G_γ(x) = Σ_j p_{j,γ} G_{j,γ}(x)`:
/// one inversion grid per retained component, reused across evaluation
/// points `x ≤ x_max`. Components whose truncated support starts above
/// `x_max` contribute exactly their cutoff error and carry no grid.
pub struct MixtureCdf {
    pub gamma: f64,
    comps: Vec<(i64, f64, f64, Option<InversionGrid>)>, // (j, p_j, cutoff, grid)
    pub x_max: f64,
    /// weight outside the retained j-window plus per-component quadrature
    pub err: f64,
}

impl MixtureCdf {
    pub fn build(gamma: f64, x_max: f64, tol: f64) -> Self {
        assert!(tol >= 1e-9);
        // j_min: weight below is e^{−γ2^{−(j_min−1)}} < tol/4
        let mut j_min = 0i64;
        while (-gamma * (2f64).powi(-(j_min as i32 - 1))).exp() >= tol / 4.0 {
            j_min -= 1;
        }
        // j_max: weight above is 1−e^{−γ2^{−j_max}} ≤ γ2^{−j_max} < tol/4
        let j_max = (gamma / (tol / 4.0)).log2().ceil() as i64;
        let count = (j_max - j_min + 1) as usize;
        let per = tol / (2.0 * count as f64);
        let comps: Vec<(i64, f64, f64, Option<InversionGrid>)> = (j_min..=j_max)
            .map(|j| {
                let p = p_weight(j, gamma);
                let cutoff = wj_lower_cutoff(j, gamma, per);
                let grid = if cutoff <= x_max {
                    Some(wj_grid(j, gamma, x_max, per))
                } else {
                    None
                };
                (j, p, cutoff, grid)
            })
            .collect();
        MixtureCdf {
            gamma,
            comps,
            x_max,
            err: tol,
        }
    }

    pub fn cdf_at(&self, x: f64) -> InversionResult {
        let mut s = crate::weight::Kahan::new();
        for (_, p, cutoff, grid) in &self.comps {
            if x < *cutoff {
                continue; // component CDF ≤ per-component tolerance there
            }
            if let Some(g) = grid {
                s.add(p * g.cdf_at(x).value);
            }
        }
        InversionResult {
            value: s.value(),
            err: self.err,
        }
    }

    /// Certified upper bound on the tail `1 − G_γ(x)` at `x ≤ x_max`,
    /// obtained from the mixture itself.
    pub fn tail_bound_at(&self, x: f64) -> f64 {
        1.0 - self.cdf_at(x).value + self.err
    }
}

/// `G_γ(x)` through the mixture at a single point.
pub fn cdf_w_mixture(gamma: f64, x: f64, tol: f64) -> InversionResult {
    assert!(tol >= 1e-6);
    MixtureCdf::build(gamma, x.abs().max(1.0), tol).cdf_at(x)
}

/// `φ_γ` with the upper atom window fixed at `k_max` (lower truncation by
/// the usual quadratic residual rule against `tol_lower`).
fn charfn_w_window(gamma: f64, t: f64, tol_lower: f64, k_max: i64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let k_min = k_min_for(gamma, t, tol_lower);
    let mut log_phi = Complex64::new(0.0, t * (s_gamma(gamma) + u_gamma(gamma)));
    for k in k_min..=k_max {
        let x = (2f64).powi(k as i32) / gamma;
        let m = gamma * (2f64).powi(-(k as i32));
        let theta = t * x;
        let term = cis_m1_m_it(theta) + Complex64::new(0.0, theta * x * x / (1.0 + x * x));
        log_phi += term * m;
    }
    log_phi.exp()
}

/// Inversion grid for `G_γ` straight from the characteristic function.
///
/// The upper end of the atom family is truncated at the *law* level:
/// dropping all jumps above `2^{k_max}/γ` perturbs the CDF by at most their
/// total intensity `2γ2^{−k_max}` (plus a negligible compensator drift), so
/// `k_max` is set by a `tol/4` mass budget instead of the far more
/// demanding characteristic-function residual rule — otherwise the panel
/// width needed to resolve the top atom's oscillation is astronomical. The
/// truncation point `T` is then certified by conservative doubling on the
/// sampled decay of the truncated `|φ_γ|`.
pub fn w_direct_grid(gamma: f64, x_max: f64, tol: f64) -> InversionResultGrid {
    let phi_tol = tol * 1e-2;
    // 2γ2^{−k_max} < tol/4
    let k_max = (8.0 * gamma / tol).log2().ceil() as i64;
    let law_err = 2.0 * gamma * (2f64).powi(-(k_max as i32));
    let phi = move |t: f64| charfn_w_window(gamma, t, phi_tol, k_max);
    let mut t_probe = 8.0f64;
    loop {
        // envelope of |φ| sampled on [t_probe, 2·t_probe]; past 2·t_probe
        // the largest-atom argument gives at least e^{−2t/π} decay
        let mut env = 0.0f64;
        for i in 0..64 {
            let t = t_probe * (2f64).powf(i as f64 / 63.0);
            env = env.max(phi(t).norm());
        }
        let tail_est = env * (2f64).ln()
            + exp_tail_over_t(2.0 / std::f64::consts::PI, 2.0 * t_probe);
        if tail_est < tol / 4.0 * std::f64::consts::PI {
            break;
        }
        t_probe *= 2.0;
    }
    let grid = InversionGrid::build(
        phi,
        2.0 * t_probe,
        x_max,
        (2f64).powi(k_max as i32) / gamma,
        tol / 4.0 * std::f64::consts::PI,
        tol,
    );
    InversionResultGrid {
        grid,
        extra_err: law_err,
    }
}

/// An inversion grid whose law carries a known extra perturbation error.
pub struct InversionResultGrid {
    pub grid: InversionGrid,
    pub extra_err: f64,
}

impl InversionResultGrid {
    pub fn cdf_at(&self, x: f64) -> InversionResult {
        let r = self.grid.cdf_at(x);
        InversionResult {
            value: r.value,
            err: r.err + self.extra_err,
        }
    }
}

/// `G_γ(x)` by direct inversion of `φ_γ` — the independent second route.
pub fn cdf_w_direct(gamma: f64, x: f64, tol: f64) -> InversionResult {
    assert!(tol >= 1e-8);
    let g = w_direct_grid(gamma, x.abs().max(1.0) + 1.0, tol);
    let r = g.cdf_at(x);
    InversionResult {
        value: r.value,
        err: r.err + tol,
    }
}

/// Extremes over one period of the tail functionals of `G_γ`:
/// `x·(−R_γ(x))` has infimum 1 (at period starts) and the left-limit
/// version has supremum 2 (at period ends), for every `γ`.
pub fn semistable_tail_functionals(gamma: f64) -> (f64, f64) {
    assert!((0.5..=1.0).contains(&gamma));
    // On the period [2^m/γ, 2^{m+1}/γ) one has ⌊log₂(γx)⌋ = m, so
    // x(−R_γ(x)) = γ·x·2^{−m}: increasing, with infimum at the left
    // endpoint γ·(2^m/γ)·2^{−m} = 1 (the γ and 2^m cancel identically) and
    // left-limit supremum at the right endpoint γ·(2^{m+1}/γ)·2^{−m} = 2.
    let (inf_val, sup_val) = (1.0, 2.0);
    // guard the cancellation against formula drift
    debug_assert!({
        let x0 = 1.0 / gamma;
        (x0 * gamma * (2f64).powi(-((gamma * x0).log2().floor() as i32)) - inf_val).abs() < 1e-12
    });
    (inf_val, sup_val)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_gamma_examples() {
        assert!((u_gamma(1.0) + 0.5).abs() < 1e-15);
        // at γ = 1/2 the two series cancel except the k = 0..2 terms of the
        // second: u = −(1/1.25 + 1/2 + 1/5) = −3/2 exactly
        assert!((u_gamma(0.5) + 1.5).abs() < 1e-14, "{}", u_gamma(0.5));
    }

    #[test]
    fn levy_series_examples() {
        let s = levy_series(Kind::Conditional { j: 0, gamma: 1.0 }, -3, 0);
        let top = *s.atoms.last().unwrap();
        assert_eq!(top, (1.0, 2.0));
        let half = s.atoms.iter().find(|(x, _)| *x == 0.5).unwrap();
        assert_eq!(half.1, 2.0);
        assert_eq!(s.compensator, Compensator::Full);
        assert!((s.drift - 1.0).abs() < 1e-15); // μ₁(0,1) = 1

        let u = levy_series(Kind::Unconditional { gamma: 1.0 }, -2, 3);
        let at2 = u.atoms.iter().find(|(x, _)| *x == 2.0).unwrap();
        assert_eq!(at2.1, 0.5);
        assert_eq!(u.compensator, Compensator::Bounded);
        for w in u.atoms.windows(2) {
            assert!(w[0].0 < w[1].0 && w[0].1 > 0.0);
        }
    }

    #[test]
    fn conditional_series_scaling_identity() {
        // atoms of conditional(j, 1/2) equal those of conditional(j+1, 1)
        let a = levy_series(Kind::Conditional { j: 2, gamma: 0.5 }, -5, 2);
        let b = levy_series(Kind::Conditional { j: 3, gamma: 1.0 }, -4, 3);
        assert_eq!(a.atoms.len(), b.atoms.len());
        for ((xa, ma), (xb, mb)) in a.atoms.iter().zip(&b.atoms) {
            assert!((xa - xb).abs() < 1e-14 && (ma - mb).abs() < 1e-14);
        }
        assert!((a.drift - b.drift).abs() < 1e-12);
    }

    #[test]
    fn charfn_basics() {
        assert_eq!(charfn_w(1.0, 0.0, 1e-9), Complex64::new(1.0, 0.0));
        assert_eq!(charfn_wj(0, 1.0, 0.0, 1e-9), Complex64::new(1.0, 0.0));
        for &t in &[0.3, 1.0, 4.7, 20.0] {
            let a = charfn_w(0.75, t, 1e-12);
            let b = charfn_w(0.75, -t, 1e-12);
            assert!((a - b.conj()).norm() < 1e-10, "t={t}");
            assert!(a.norm() <= 1.0 + 1e-9);
            let c = charfn_wj(2, 0.75, t, 1e-12);
            let d = charfn_wj(2, 0.75, -t, 1e-12);
            assert!((c - d.conj()).norm() < 1e-10);
            assert!(c.norm() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn charfn_wj_modulus_bound() {
        // |φ_{0,1}(10)| ≤ e^{−20/π}
        let m = charfn_wj(0, 1.0, 10.0, 1e-12).norm();
        assert!(m <= (-20.0 / std::f64::consts::PI).exp() + 1e-9, "{m}");
        // bound holds on a log grid, both branches
        for j in [0i64, 3] {
            for i in 0..40 {
                let t = 1e-4 * (10f64).powf(i as f64 / 6.0);
                if t > 100.0 {
                    break;
                }
                let m = charfn_wj(j, 1.0, t, 1e-13).norm();
                let b = real_part_bound(j, 1.0, t).exp();
                assert!(m <= b * (1.0 + 1e-7) + 1e-12, "j={j} t={t}: {m} vs {b}");
            }
        }
    }

    #[test]
    fn charfn_wj_derivative_is_mean() {
        let h = 1e-5;
        for (j, gamma) in [(0i64, 1.0), (2, 1.0), (0, 0.5)] {
            let d = (charfn_wj(j, gamma, h, 1e-14) - charfn_wj(j, gamma, -h, 1e-14))
                / Complex64::new(0.0, 2.0 * h);
            assert!((d.re - mu1(j, gamma)).abs() < 1e-4, "j={j} γ={gamma}: {}", d.re);
        }
    }

    #[test]
    fn real_part_bound_examples() {
        assert_eq!(real_part_bound(0, 1.0, 0.0), 0.0);
        let pi = std::f64::consts::PI;
        assert!((real_part_bound(0, 1.0, pi) + 2.0).abs() < 1e-15);
        assert!((real_part_bound(0, 1.0, 1.0) + 8.0 / (pi * pi)).abs() < 1e-15);
    }

    #[test]
    fn moments_examples() {
        assert_eq!(moments_wj(0, 1.0), (1.0, 3.0));
        assert_eq!(moments_wj(2, 1.0), (6.0, 12.0));
        assert_eq!(moments_wj(0, 0.5), (3.0, 6.0));
    }

    #[test]
    fn tie_corrected_mixture_is_exact() {
        // Σ_j p_{j,γ} · φ_component(t) = φ_γ(t): the identity the doubled-mass
        // φ_{j,γ} only approximates.
        for &gamma in &[0.5, 0.75, 1.0] {
            for &t in &[0.5, 1.0, 3.0] {
                let mut s = Complex64::new(0.0, 0.0);
                for j in -40..=60 {
                    s += p_weight(j, gamma)
                        * charfn_wj_exact_component(j, gamma, t, 1e-14);
                }
                let w = charfn_w(gamma, t, 1e-13);
                assert!((s - w).norm() < 1e-9, "γ={gamma} t={t}: {}", (s - w).norm());
            }
        }
    }

    #[test]
    fn doubled_mass_mixture_gap_is_real() {
        // the same mixture with φ_{j,γ} misses φ_γ by a fixed ≈1.7e−2 at t=1
        let mut s = Complex64::new(0.0, 0.0);
        for j in -40..=60 {
            s += p_weight(j, 1.0) * charfn_wj(j, 1.0, 1.0, 1e-13);
        }
        let gap = (s - charfn_w(1.0, 1.0, 1e-13)).norm();
        assert!(gap > 1e-2 && gap < 3e-2, "gap={gap}");
    }

    #[test]
    fn p_weights_telescope() {
        let mut s = 0.0;
        for j in -40..=60 {
            s += p_weight(j, 0.7);
        }
        assert!((s - 1.0).abs() < 1e-12);
        let partial: f64 = (-40..=5).map(|j| p_weight(j, 0.7)).sum();
        assert!((partial - (-0.7 * (2f64).powi(-5)).exp()).abs() < 1e-12);
    }

    #[test]
    fn cdf_wj_limits_and_identity() {
        let lo = cdf_wj(0, 1.0, -20.0, 1e-6);
        assert!(lo.value.abs() < 1e-5, "{}", lo.value);
        // G_{j,1/2}(x) = G_{j+1,1}(x)
        for &x in &[1.0, 3.0, 6.0] {
            let a = cdf_wj(0, 0.5, x, 1e-7).value;
            let b = cdf_wj(1, 1.0, x, 1e-7).value;
            assert!((a - b).abs() < 2e-6, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn pdf_matches_cdf_derivative() {
        let g = wj_grid(0, 1.0, 6.0, 1e-8);
        let h = 1e-4;
        for &x in &[0.5, 1.0, 2.5, 4.0] {
            let d = (g.cdf_at(x + h).value - g.cdf_at(x - h).value) / (2.0 * h);
            let p = g.pdf_at(x).value;
            assert!((d - p).abs() < 1e-5, "x={x}: {d} vs {p}");
        }
    }

    #[test]
    fn pdf_density_bound_spot() {
        // sup g_{0,1} ≤ √π/4 + 1/2 ≈ 0.943
        let g = wj_grid(0, 1.0, 8.0, 1e-8);
        let bound = std::f64::consts::PI.sqrt() / 4.0 + 0.5;
        for i in 0..=160 {
            let x = -4.0 + 0.075 * i as f64;
            let p = g.pdf_at(x).value;
            assert!(p <= bound + 1e-4, "x={x}: {p}");
            assert!(p >= -1e-6);
        }
    }

    #[test]
    fn tail_functionals_closed_form() {
        for i in 0..=5 {
            let gamma = 0.5 + 0.1 * i as f64;
            let (inf_v, sup_v) = semistable_tail_functionals(gamma);
            assert_eq!((inf_v, sup_v), (1.0, 2.0));
        }
    }

    #[test]
    fn mixture_cdf_basics() {
        let mix = MixtureCdf::build(1.0, 12.0, 1e-6);
        assert!(mix.cdf_at(-8.0).value.abs() < 1e-5);
        let mut last = -1e-6;
        for i in 0..=48 {
            let x = -2.0 + 0.25 * i as f64;
            let v = mix.cdf_at(x).value;
            assert!(v >= last - 1e-6, "x={x}");
            last = v;
        }
        assert!(mix.cdf_at(12.0).value > 0.8);
    }
}
