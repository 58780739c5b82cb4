//! Exact laws on the non-negative integer lattice, built by convolution.
//!
//! Two representations: a capped dense array with an overflow bucket (full
//! CDF queries, merging distances) and a sparse map (few-summand tails at
//! huge thresholds, where distinct sums of a handful of powers of two number
//! only in the thousands). Because all summands are positive, mass that once
//! lands in the overflow bucket never re-enters the array, so the bucket is
//! exactly `P{S > cap}`.

use crate::dist::{ceil_log2_u64, floor_log2, max_cdf_exact};
use crate::weight::{Kahan, Weight};
use rayon::prelude::*;
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
enum Repr<W> {
    /// `v[i]` is the mass at value `i`; values above `cap = v.len()-1` are
    /// aggregated in `overflow`.
    Dense(Vec<W>),
    Sparse(BTreeMap<u64, W>),
}

/// An exact probability law on the non-negative integers.
#[derive(Clone, Debug)]
pub struct LatticeLaw<W = f64> {
    repr: Repr<W>,
    overflow: W,
    /// Worst-case absolute error accumulated by floating arithmetic
    /// (0 in exact-rational mode).
    pub err: f64,
}

/// Atom list of a single summand, with the mass lying above any cap.
#[derive(Clone, Debug)]
pub struct BaseAtoms<W> {
    pub atoms: Vec<(u64, W)>,
    pub overflow: W,
}

impl<W: Weight> BaseAtoms<W> {
    /// The law of `X` conditioned on `X ≤ 2^k`: atoms `2^i` with mass
    /// `2^{-i}/(1-2^{-k})`, `i = 1..k`.
    pub fn truncated(k: u32) -> Self {
        assert!(k >= 1 && k <= 63);
        BaseAtoms {
            atoms: (1..=k).map(|i| (1u64 << i, W::truncated_atom(k, i))).collect(),
            overflow: W::zero(),
        }
    }

    /// The full single-game law, materialized up to `2^kmax` with the exact
    /// tail `2^{-kmax}` in the overflow slot.
    pub fn full(kmax: u32) -> Self {
        assert!(kmax >= 1 && kmax <= 62);
        BaseAtoms {
            atoms: (1..=kmax).map(|i| (1u64 << i, W::pow2_inv(i))).collect(),
            overflow: W::pow2_inv(kmax),
        }
    }
}

impl<W: Weight> LatticeLaw<W> {
    /// Point mass at `v` (sparse).
    pub fn point(v: u64) -> Self {
        let mut m = BTreeMap::new();
        m.insert(v, W::one());
        LatticeLaw {
            repr: Repr::Sparse(m),
            overflow: W::zero(),
            err: 0.0,
        }
    }

    /// Point mass at 0 in dense storage with the given cap.
    pub fn dense_unit(cap: u64) -> Self {
        let mut v = vec![W::zero(); cap as usize + 1];
        v[0] = W::one();
        LatticeLaw {
            repr: Repr::Dense(v),
            overflow: W::zero(),
            err: 0.0,
        }
    }

    /// One-atom-set law (sparse).
    pub fn from_atoms(base: &BaseAtoms<W>) -> Self {
        let mut m = BTreeMap::new();
        for (v, w) in &base.atoms {
            m.insert(*v, w.clone());
        }
        LatticeLaw {
            repr: Repr::Sparse(m),
            overflow: base.overflow.clone(),
            err: 0.0,
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, Repr::Dense(_))
    }

    pub fn cap(&self) -> Option<u64> {
        match &self.repr {
            Repr::Dense(v) => Some(v.len() as u64 - 1),
            Repr::Sparse(_) => None,
        }
    }

    pub fn overflow(&self) -> W {
        self.overflow.clone()
    }

    /// Iterate (value, mass) over nonzero atoms in ascending value order.
    pub fn atoms(&self) -> Box<dyn Iterator<Item = (u64, W)> + '_> {
        match &self.repr {
            Repr::Dense(v) => Box::new(
                v.iter()
                    .enumerate()
                    .filter(|(_, w)| !w.is_zero())
                    .map(|(i, w)| (i as u64, w.clone())),
            ),
            Repr::Sparse(m) => Box::new(m.iter().map(|(v, w)| (*v, w.clone()))),
        }
    }

    /// Total mass below the cap.
    pub fn mass_below(&self) -> W {
        let mut s = W::zero();
        for (_, w) in self.atoms() {
            s += w;
        }
        s
    }

    /// Strict upper tail `P{S > y}` for real `y` (counts overflow as above
    /// any `y ≥ cap` threshold only when `y < cap`... the bucket is exactly
    /// `P{S > cap}`, so `y` must not exceed the cap for a dense law).
    pub fn tail_gt(&self, y: f64) -> W {
        let mut s = self.overflow.clone();
        for (v, w) in self.atoms() {
            if (v as f64) > y {
                s += w;
            }
        }
        s
    }

    /// Shift the law by a constant `c` (adds `c` to every value; the cap of
    /// a dense law shifts with it, implemented by re-indexing lazily in the
    /// sparse case and by array growth in the dense case).
    pub fn shift(&mut self, c: u64) {
        if c == 0 {
            return;
        }
        match &mut self.repr {
            Repr::Dense(v) => {
                let mut nv = vec![W::zero(); v.len() + c as usize];
                for (i, w) in v.iter().enumerate() {
                    if !w.is_zero() {
                        nv[i + c as usize] = w.clone();
                    }
                }
                *v = nv;
            }
            Repr::Sparse(m) => {
                let old = std::mem::take(m);
                for (v, w) in old {
                    m.insert(v + c, w);
                }
            }
        }
    }

    /// Convolve with one extra independent summand given by `base`,
    /// respecting this law's cap (dense) or staying uncapped (sparse).
    pub fn convolve_base(&mut self, base: &BaseAtoms<W>) {
        let total = {
            let mut t = self.mass_below();
            t += self.overflow.clone();
            t
        };
        match &mut self.repr {
            Repr::Dense(v) => {
                let len = v.len();
                // suffix sums for the mass pushed past the cap by each atom
                let mut suf = vec![W::zero(); len + 1];
                for i in (0..len).rev() {
                    let mut s = suf[i + 1].clone();
                    s += v[i].clone();
                    suf[i] = s;
                }
                let mut spilled = W::zero();
                for (a, m) in &base.atoms {
                    let a = *a as usize;
                    if a >= len {
                        spilled += m.clone() * suf[0].clone();
                    } else {
                        spilled += m.clone() * suf[len - a].clone();
                    }
                }
                let below = suf[0].clone();
                let mut nv = vec![W::zero(); len];
                conv_dense(&mut nv, v, &base.atoms);
                *v = nv;
                let mut ov = self.overflow.clone();
                ov += spilled;
                ov += base.overflow.clone() * below;
                self.overflow = ov;
            }
            Repr::Sparse(m) => {
                let old = std::mem::take(m);
                let mut ov = self.overflow.clone();
                let mut below = W::zero();
                for (v0, w0) in &old {
                    below += w0.clone();
                    for (a, ma) in &base.atoms {
                        let key = v0 + a;
                        let add = w0.clone() * ma.clone();
                        match m.get_mut(&key) {
                            Some(slot) => *slot += add,
                            None => {
                                m.insert(key, add);
                            }
                        }
                    }
                }
                ov += base.overflow.clone() * below;
                self.overflow = ov;
            }
        }
        self.err += 2.0 * (base.atoms.len() as f64 + 2.0) * W::unit_roundoff() * total.to_f64();
    }

    /// Convolution of two laws. Caps: the result inherits `cap` when given
    /// (dense output), otherwise both inputs must be sparse.
    pub fn convolve(a: &Self, b: &Self, cap: Option<u64>) -> Self {
        match cap {
            None => {
                let (ma, mb) = match (&a.repr, &b.repr) {
                    (Repr::Sparse(ma), Repr::Sparse(mb)) => (ma, mb),
                    _ => panic!("uncapped convolution requires sparse operands"),
                };
                let mut out = BTreeMap::new();
                let mut mass_a = W::zero();
                for (_, w) in ma {
                    mass_a += w.clone();
                }
                for (va, wa) in ma {
                    for (vb, wb) in mb {
                        let add = wa.clone() * wb.clone();
                        match out.get_mut(&(va + vb)) {
                            Some(s) => *s += add,
                            None => {
                                out.insert(va + vb, add);
                            }
                        }
                    }
                }
                // overflow composes by: ov = ov_a + ov_b − ov_a·ov_b (total mass 1 laws)
                let mut ov = a.overflow.clone();
                ov += b.overflow.clone() * mass_a;
                LatticeLaw {
                    repr: Repr::Sparse(out),
                    overflow: ov,
                    err: a.err + b.err + (ma.len() * mb.len()) as f64 * W::unit_roundoff(),
                }
            }
            Some(cap) => {
                // fold the smaller-support factor in as atoms
                let (big, small) = if a.support_len() >= b.support_len() {
                    (a, b)
                } else {
                    (b, a)
                };
                let mut acc = big.to_dense(cap);
                acc.err = a.err + b.err;
                let atoms: Vec<(u64, W)> = small.atoms().collect();
                let base = BaseAtoms {
                    atoms,
                    overflow: small.overflow.clone(),
                };
                acc.convolve_base(&base);
                acc
            }
        }
    }

    fn support_len(&self) -> usize {
        match &self.repr {
            Repr::Dense(v) => v.len(),
            Repr::Sparse(m) => m.len(),
        }
    }

    pub fn to_dense(&self, cap: u64) -> Self {
        match &self.repr {
            Repr::Dense(v) if v.len() as u64 - 1 == cap => self.clone(),
            _ => {
                let mut v = vec![W::zero(); cap as usize + 1];
                let mut ov = self.overflow.clone();
                for (val, w) in self.atoms() {
                    if val <= cap {
                        v[val as usize] += w;
                    } else {
                        ov += w;
                    }
                }
                LatticeLaw {
                    repr: Repr::Dense(v),
                    overflow: ov,
                    err: self.err,
                }
            }
        }
    }

    /// CDF values at every atom: returns ascending `(value, P{S < v}, P{S ≤ v})`.
    pub fn cdf_atoms(&self) -> Vec<(u64, f64, f64)> {
        let mut out = Vec::new();
        let mut acc = Kahan::new();
        for (v, w) in self.atoms() {
            let left = acc.value();
            acc.add(w.to_f64());
            out.push((v, left, acc.value()));
        }
        out
    }

    /// Mean and variance from the atoms (ignores overflow; caller must make
    /// the cap large enough for the intended use).
    pub fn mean_var(&self) -> (f64, f64) {
        let mut m = Kahan::new();
        let mut m2 = Kahan::new();
        for (v, w) in self.atoms() {
            let x = v as f64;
            let p = w.to_f64();
            m.add(x * p);
            m2.add(x * x * p);
        }
        let mean = m.value();
        (mean, m2.value() - mean * mean)
    }
}

/// The dense convolution kernel: `nv[i] = Σ_a m_a · v[i-a]`, parallel over
/// output chunks.
fn conv_dense<W: Weight>(nv: &mut [W], v: &[W], atoms: &[(u64, W)]) {
    let chunk = 1 << 14;
    nv.par_chunks_mut(chunk).enumerate().for_each(|(ci, out)| {
        let base_i = ci * chunk;
        for (off, slot) in out.iter_mut().enumerate() {
            let i = base_i + off;
            let mut s = W::zero();
            for (a, m) in atoms {
                let a = *a as usize;
                if a <= i {
                    s += m.clone() * v[i - a].clone();
                }
            }
            *slot = s;
        }
    });
}

/// `m`-fold convolution power of an atom-set law.
///
/// Sparse mode (no cap) uses binary exponentiation; dense mode folds the
/// atom set in `m` times — identical results, and `O(cap·k)` per step is far
/// cheaper than dense squaring for wide supports.
pub fn power_convolve<W: Weight>(base: &BaseAtoms<W>, m: u64, cap: Option<u64>) -> LatticeLaw<W> {
    match cap {
        None => {
            // binary exponentiation on sparse laws
            let mut result: Option<LatticeLaw<W>> = None;
            let mut sq = LatticeLaw::from_atoms(base);
            let mut rem = m;
            loop {
                if rem & 1 == 1 {
                    result = Some(match result {
                        None => sq.clone(),
                        Some(r) => LatticeLaw::convolve(&r, &sq, None),
                    });
                }
                rem >>= 1;
                if rem == 0 {
                    break;
                }
                sq = LatticeLaw::convolve(&sq, &sq, None);
            }
            result.unwrap_or_else(|| LatticeLaw::point(0))
        }
        Some(cap) => {
            let mut law = LatticeLaw::dense_unit(cap);
            for _ in 0..m {
                law.convolve_base(base);
            }
            law
        }
    }
}

/// Exact law of `S_n` given `X_n* = 2^k` under the conditional
/// representation `S_n ≗ 2^k + S_{n-1}^{(k)}` (truncation inclusive at
/// `2^k`). `cap` bounds the stored values of the result.
pub fn cond_sum_law(n: u64, k: u32, cap: u64) -> LatticeLaw<f64> {
    assert!(n >= 1 && k >= 1);
    let top = 1u64 << k;
    assert!(cap >= top, "cap below the conditioning value");
    let mut law = power_convolve::<f64>(&BaseAtoms::truncated(k), n - 1, Some(cap - top));
    law.shift(top);
    law
}

/// Exact law of `S_n` on `[2n, cap]` with overflow above `cap`.
pub fn sum_law(n: u64, cap: u64) -> LatticeLaw<f64> {
    assert!(cap >= 2 * n);
    let kmax = floor_log2(cap as f64) as u32;
    power_convolve::<f64>(&BaseAtoms::full(kmax), n, Some(cap))
}

/// `sum_law` assembled by conditioning on the maximum — used as the
/// route-equivalence oracle for the direct convolution.
///
/// The exact decomposition must account for ties at the maximum: condition
/// on the maximal level `k` *and* the number `m ≥ 1` of games attaining it,
/// with weight `C(n,m)·2^{−km}·P{X < 2^k}^{n−m}`; the remaining `n − m`
/// games are iid from the strictly-truncated law `F_{k−1}`. (Conditioning
/// on the level alone and convolving `n − 1` inclusively-truncated games —
/// the representation behind [`cond_sum_law`] — is *not* exact, for the
/// same tie reason that makes the idealized mixture of conditional limit
/// laws differ from `W_γ`.)
pub fn sum_law_via_max(n: u64, cap: u64) -> LatticeLaw<f64> {
    let mut acc = vec![0.0f64; cap as usize + 1];
    let mut ov = 0.0;
    let kmax = floor_log2(cap as f64) as u32;
    for k in 1..=kmax {
        let pk = (2f64).powi(-(k as i32)); // P{X = 2^k}
        let below = 1.0 - (2f64).powi(1 - k as i32); // P{X < 2^k}
        let mut choose = 1.0f64;
        for m in 1..=n {
            choose = choose * (n - m + 1) as f64 / m as f64;
            let rest = n - m;
            let weight = choose * pk.powi(m as i32) * below.powi(rest as i32);
            if weight == 0.0 {
                continue;
            }
            let shift_v = m * (1u64 << k);
            if shift_v > cap {
                ov += weight;
                continue;
            }
            let law = if rest == 0 {
                LatticeLaw::point(0)
            } else {
                power_convolve::<f64>(&BaseAtoms::truncated(k - 1), rest, Some(cap - shift_v))
            };
            for (v, w) in law.atoms() {
                acc[(v + shift_v) as usize] += weight * w;
            }
            ov += weight * law.overflow();
        }
    }
    // maxima beyond the cap put all mass in overflow
    ov += 1.0 - max_cdf_exact(n, kmax).value;
    LatticeLaw {
        repr: Repr::Dense(acc),
        overflow: ov,
        err: 1e-12,
    }
}

/// Strict tail `P{S_n > y}` by the largest-atom decomposition:
/// any single payout `≥ 2^{K'+1} > y` (with `K' = ⌊log₂y⌋`) alone forces
/// exceedance, so
/// `P{S_n > y} = (1−2^{−K'})^n · P{S_n^{(K')} > y} + [1 − (1−2^{−K'})^n]`.
pub fn sum_tail_exact(n: u64, y: f64) -> crate::dist::ProbValue {
    if y < 2.0 * n as f64 {
        return crate::dist::ProbValue::exact(1.0);
    }
    let kp = floor_log2(y) as u32;
    let trunc_tail = if n <= 8 {
        power_convolve::<f64>(&BaseAtoms::truncated(kp), n, None).tail_gt(y)
    } else {
        let cap = y.floor() as u64;
        assert!(
            cap <= 1 << 28,
            "dense tail evaluation infeasible at this threshold"
        );
        power_convolve::<f64>(&BaseAtoms::truncated(kp), n, Some(cap)).overflow()
    };
    let a = max_cdf_exact(n, kp).value;
    crate::dist::ProbValue::with_err(
        a * trunc_tail + (1.0 - a),
        (n as f64) * 1e-15 + 1e-13,
    )
}

/// Certified Kolmogorov–Smirnov report for a lattice law against a
/// continuous CDF.
#[derive(Clone, Debug)]
pub struct KsReport {
    /// Certified upper bound for `sup_x |F(x) − G(x)|` over `x ≤ x_hi`.
    pub sup: f64,
    /// Lower bound from the evaluated points (gap to `sup` is the
    /// subsampling slack).
    pub sup_lower: f64,
    pub sup_at: f64,
    /// Allowance for the region above `x_hi`:
    /// `max(1 − F(x_hi), g_tail_bound)`.
    pub tail_allowance: f64,
    pub evals: usize,
}

impl KsReport {
    /// The KS distance over the whole line: bulk bound vs tail allowance.
    pub fn distance(&self) -> f64 {
        self.sup.max(self.tail_allowance)
    }
}

/// KS distance of the mapped law `x = (S − shift)/scale` against a
/// continuous non-decreasing `G`, adaptively refined until the bracketing
/// slack is below `slack_tol`. `g_tail_bound` must dominate `1 − G(x_hi)`.
pub fn ks_distance<G>(
    law: &LatticeLaw<f64>,
    scale: f64,
    shift: f64,
    g: G,
    x_hi: f64,
    g_tail_bound: f64,
    slack_tol: f64,
) -> KsReport
where
    G: Fn(f64) -> f64 + Sync,
{
    // mapped atoms with left/right CDF values, clipped to x ≤ x_hi
    let all = law.cdf_atoms();
    let mapped: Vec<(f64, f64, f64)> = all
        .iter()
        .map(|&(v, l, r)| ((v as f64 - shift) / scale, l, r))
        .filter(|&(x, _, _)| x <= x_hi)
        .collect();
    assert!(!mapped.is_empty(), "no atoms at or below x_hi");
    let f_at_hi = mapped.last().unwrap().2;
    let tail_allowance = (1.0 - f_at_hi).max(g_tail_bound);

    // start from a coarse uniform subsample; always include the endpoints
    let m = mapped.len();
    let mut idx: Vec<usize> = if m <= 512 {
        (0..m).collect()
    } else {
        let mut v: Vec<usize> = (0..512).map(|i| i * (m - 1) / 511).collect();
        v.dedup();
        v
    };
    let mut gvals: BTreeMap<usize, f64> = BTreeMap::new();
    let eval_batch = |ids: &[usize], gv: &mut BTreeMap<usize, f64>| {
        let fresh: Vec<usize> = ids.iter().copied().filter(|i| !gv.contains_key(i)).collect();
        let res: Vec<(usize, f64)> = fresh
            .par_iter()
            .map(|&i| (i, g(mapped[i].0)))
            .collect();
        for (i, v) in res {
            gv.insert(i, v);
        }
    };
    eval_batch(&idx, &mut gvals);

    let mut evals = idx.len();
    loop {
        // certified bounds per gap between consecutive sampled atoms
        let mut sup_lower = 0.0f64;
        let mut sup_at = mapped[idx[0]].0;
        for &i in &idx {
            let (x, fl, fr) = mapped[i];
            let gi = gvals[&i];
            let d = (fr - gi).abs().max((fl - gi).abs());
            if d > sup_lower {
                sup_lower = d;
                sup_at = x;
            }
        }
        let mut worst_gap: Option<(usize, usize, f64)> = None;
        let mut sup_upper = sup_lower;
        for w in idx.windows(2) {
            let (i, j) = (w[0], w[1]);
            if j == i + 1 {
                continue; // no atoms strictly inside; endpoint checks cover it
            }
            // for x in (x_i, x_j): F ∈ [F_r(i), F_l(j)], G ∈ [G_i, G_j]
            let hi = (mapped[j].1 - gvals[&i]).max(gvals[&j] - mapped[i].2);
            if hi > sup_upper {
                sup_upper = hi;
            }
            if hi > sup_lower + slack_tol {
                let cur = worst_gap.map(|(_, _, h)| h).unwrap_or(0.0);
                if hi > cur {
                    worst_gap = Some((i, j, hi));
                }
            }
        }
        if sup_upper <= sup_lower + slack_tol || evals > 200_000 {
            return KsReport {
                sup: sup_upper,
                sup_lower,
                sup_at,
                tail_allowance,
                evals,
            };
        }
        // refine every offending gap at its midpoint atom
        let mut to_add = Vec::new();
        for w in idx.windows(2) {
            let (i, j) = (w[0], w[1]);
            if j > i + 1 {
                let hi = (mapped[j].1 - gvals[&i]).max(gvals[&j] - mapped[i].2);
                if hi > sup_lower + slack_tol {
                    to_add.push((i + j) / 2);
                }
            }
        }
        if to_add.is_empty() {
            // numerical corner: return the certified bound as-is
            return KsReport {
                sup: sup_upper,
                sup_lower,
                sup_at,
                tail_allowance,
                evals,
            };
        }
        eval_batch(&to_add, &mut gvals);
        evals += to_add.len();
        idx.extend(to_add);
        idx.sort_unstable();
        idx.dedup();
    }
}

/// Dense-engine cap for merging-distance work: `cap = n(⌈log₂n⌉ + B)`.
pub fn merge_cap(n: u64, b: u64) -> u64 {
    n * (ceil_log2_u64(n) as u64 + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn truncated_atoms() {
        let b = BaseAtoms::<f64>::truncated(3);
        assert_eq!(b.atoms.len(), 3);
        assert!((b.atoms[0].1 - 4.0 / 7.0).abs() < 1e-15);
        assert!((b.atoms[2].1 - 1.0 / 7.0).abs() < 1e-15);
        let b1 = BaseAtoms::<f64>::truncated(1);
        assert_eq!(b1.atoms, vec![(2, 1.0)]);
    }

    #[test]
    fn convolve_examples() {
        // {2↦1} ∗ {2↦1} = {4↦1}
        let p = LatticeLaw::<f64>::point(2);
        let c = LatticeLaw::convolve(&p, &p, None);
        let atoms: Vec<_> = c.atoms().collect();
        assert_eq!(atoms, vec![(4, 1.0)]);

        // P{S₂ = 6} = 1/4 for the full law
        let s2 = sum_law(2, 64);
        let p6 = s2.atoms().find(|&(v, _)| v == 6).unwrap().1;
        assert!((p6 - 0.25).abs() < 1e-14);
        let p4 = s2.atoms().find(|&(v, _)| v == 4).unwrap().1;
        assert!((p4 - 0.25).abs() < 1e-14);

        // cap = 4 keeps {4 ↦ 1/4} and spills 3/4
        let s2c = sum_law(2, 4);
        assert!((s2c.overflow() - 0.75).abs() < 1e-14);

        let s3 = sum_law(3, 64);
        let p6 = s3.atoms().find(|&(v, _)| v == 6).unwrap().1;
        assert!((p6 - 0.125).abs() < 1e-14);
    }

    #[test]
    fn power_examples() {
        let one = power_convolve::<f64>(&BaseAtoms::truncated(2), 1, None);
        let atoms: Vec<_> = one.atoms().collect();
        assert_eq!(atoms.len(), 2);
        let five = power_convolve::<f64>(&BaseAtoms::truncated(1), 5, None);
        assert_eq!(five.atoms().collect::<Vec<_>>(), vec![(10, 1.0)]);
        let sq = power_convolve::<f64>(&BaseAtoms::truncated(2), 2, None);
        let p8 = sq.atoms().find(|&(v, _)| v == 8).unwrap().1;
        assert!((p8 - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn sparse_binary_equals_dense_iterative() {
        for n in 1..=6u64 {
            let sp = power_convolve::<f64>(&BaseAtoms::truncated(4), n, None);
            let de = power_convolve::<f64>(&BaseAtoms::truncated(4), n, Some(1 << 10));
            for (v, w) in sp.atoms() {
                let wd = de.atoms().find(|&(dv, _)| dv == v).map(|(_, w)| w).unwrap_or(0.0);
                assert!((w - wd).abs() < 1e-12, "n={n} v={v}");
            }
        }
    }

    #[test]
    fn rational_mode_exact_mass() {
        let law = power_convolve::<BigRational>(&BaseAtoms::truncated(3), 4, None);
        let mut total = law.mass_below();
        total += law.overflow();
        assert_eq!(total, crate::weight::Weight::one());
        assert_eq!(law.err, 0.0);
    }

    #[test]
    fn cond_law_examples() {
        let l = cond_sum_law(1, 3, 64);
        assert_eq!(
            l.atoms().filter(|(_, w)| *w > 0.0).collect::<Vec<_>>(),
            vec![(8, 1.0)]
        );
        let l = cond_sum_law(2, 1, 64);
        assert_eq!(
            l.atoms().filter(|(_, w)| *w > 0.0).collect::<Vec<_>>(),
            vec![(4, 1.0)]
        );
        let l = cond_sum_law(2, 2, 1 << 10);
        let (mean, _) = l.mean_var();
        assert!((mean - crate::dist::cond_sum_mean(2, 2)).abs() < 1e-12);
    }

    #[test]
    fn cond_mean_matches_closed_form() {
        let n = 64;
        let k = 9;
        let law = cond_sum_law(n, k, 1 << 16);
        assert!(law.overflow() < 1e-9);
        let (mean, _) = law.mean_var();
        assert!((mean - crate::dist::cond_sum_mean(n, k)).abs() < 1e-6);
    }

    #[test]
    fn route_equivalence() {
        for &n in &[2u64, 3, 7, 16] {
            let cap = 1 << 12;
            let direct = sum_law(n, cap);
            let via = sum_law_via_max(n, cap);
            for ((v1, w1), (v2, w2)) in direct.atoms().zip(via.atoms()) {
                assert_eq!(v1, v2);
                assert!((w1 - w2).abs() < 1e-12, "n={n} v={v1}: {w1} vs {w2}");
            }
            assert!((direct.overflow() - via.overflow()).abs() < 1e-12);
        }
    }

    #[test]
    fn mass_conservation() {
        for &n in &[2u64, 5, 37] {
            let law = sum_law(n, 1 << 12);
            let total = law.mass_below() + law.overflow();
            assert!((total - 1.0).abs() < 1e-12, "n={n}: {total}");
        }
    }

    #[test]
    fn tail_exact_examples() {
        assert!((sum_tail_exact(1, 5.0).value - 0.25).abs() < 1e-15);
        assert!((sum_tail_exact(2, 8.0).value - 7.0 / 16.0).abs() < 1e-14);
        assert!((sum_tail_exact(2, 6.0).value - 0.5).abs() < 1e-14);
        assert_eq!(sum_tail_exact(2, 3.0).value, 1.0);
    }

    #[test]
    fn tail_matches_two_fold() {
        for k in 1u32..=12 {
            for ell in k..=12 {
                let y = ((1u64 << k) + (1u64 << ell)) as f64;
                let a = sum_tail_exact(2, y).value;
                let b = crate::dist::two_fold_tail(k, ell).unwrap().value;
                assert!((a - b).abs() < 1e-12, "k={k} ell={ell}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn tail_monotone_in_y() {
        let mut last = 1.0f64;
        for y in (4..200).map(|i| i as f64 * 0.5) {
            let t = sum_tail_exact(3, y).value;
            assert!(t <= last + 1e-13, "y={y}");
            last = t;
        }
    }

    #[test]
    fn ks_point_mass_vs_half() {
        let law = LatticeLaw::<f64>::point(0);
        let rep = ks_distance(&law, 1.0, 0.0, |_x: f64| 0.5, 1.0, 0.5, 1e-9);
        assert!((rep.sup - 0.5).abs() < 1e-12);
    }
}
