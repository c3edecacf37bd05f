use super::{correlation_fourier, LowerBoundFunction, PrimeLocalWeight};
use crate::arith::KahanSum;
use crate::error::{Error, Result};
use num::ToPrimitive;
use serde::{Deserialize, Serialize};

/// Largest `X` accepted by the property verifier.
pub const VERIFY_CAP: u64 = 2_000_000;
const SCAN_WORK_CAP: u64 = 4_000_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop1 {
    pub mean: f64,
    pub alpha: f64,
    pub abs_err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop2 {
    /// `Σ f(x) f(y)` over `x - y = n²`, `n ≥ 1`.
    pub count: f64,
    /// `α² X^{3/2}`.
    pub scale: f64,
    pub ratio: f64,
    /// `ratio ≤ 1/100`.
    pub pass: bool,
    /// `∏_p E ψ_p(x) ψ_p(y) 1_□(x - y)`, the correlation modulo `N`.
    pub product_lhs: f64,
    /// `2^{-M} (E ψ_N)² ∏_p (1 - ε²/(8√p))`.
    pub product_rhs: f64,
    pub product_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop3 {
    /// `⌈X exp(-log(1/α)^{1/3})⌉`.
    pub window: u64,
    pub threshold: f64,
    /// Steps `d` scanned: those admitting a progression of `window` terms in `[X]`.
    pub max_step: u64,
    pub best_window_avg: f64,
    pub best_window: (u64, u64),
    /// Longest progression with step `≤ max_step` and average `≥ 2α`: `(start, step, length)`.
    pub longest: (u64, u64, u64),
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LbReport {
    pub prop1: Prop1,
    pub prop2: Prop2,
    pub prop3: Prop3,
    pub flags: Vec<String>,
}

/// Longest contiguous run of `vals` with average at least `target`: `(start, length)`.
pub fn longest_dense_run(vals: &[f64], target: f64) -> (usize, usize) {
    let n = vals.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = KahanSum::default();
    for v in vals {
        acc.add(v - target);
        prefix.push(acc.value());
    }
    // Candidate left ends: strictly decreasing prefix minima.
    let mut stack: Vec<usize> = Vec::new();
    for (i, &p) in prefix.iter().enumerate() {
        if stack.last().is_none_or(|&j| p < prefix[j]) {
            stack.push(i);
        }
    }
    let mut best = (0usize, 0usize);
    for j in (0..=n).rev() {
        while let Some(&i) = stack.last() {
            if prefix[j] >= prefix[i] - 1e-12 {
                if j > i && (j - i > best.1 || (j - i == best.1 && i < best.0)) {
                    best = (i, j - i);
                }
                stack.pop();
            } else {
                break;
            }
        }
    }
    best
}

fn square_pair_sum(vals: &[f64]) -> f64 {
    let x = vals.len();
    let mut total = KahanSum::default();
    let mut n = 1usize;
    while n * n < x {
        let d = n * n;
        let s: f64 = vals[d..].iter().zip(&vals[..x - d]).map(|(a, b)| a * b).sum();
        total.add(s);
        n += 1;
    }
    total.value()
}

/// Checks the three properties: exact mean, few square differences, no long dense progression.
pub fn verify_lb_properties(f: &LowerBoundFunction) -> Result<LbReport> {
    if f.x > VERIFY_CAP {
        return Err(Error::CapExceeded { x: f.x, cap: VERIFY_CAP });
    }
    let vals = f.values();
    let xf = f.x as f64;

    let mut acc = KahanSum::default();
    vals.iter().for_each(|&v| acc.add(v));
    let mean = acc.value() / xf;
    let abs_err = (mean - f.alpha).abs();
    let prop1 = Prop1 { mean, alpha: f.alpha, abs_err, pass: abs_err <= 1e-12 };

    let count = square_pair_sum(&vals);
    let scale = f.alpha * f.alpha * xf.powf(1.5);
    let ws = f.weights();
    let mut product_lhs = 1.0;
    let mut factor = 1.0;
    for w in &ws {
        product_lhs *= correlation_fourier(w)?;
        factor *= 1.0 - f.epsilon * f.epsilon / (8.0 * (w.p as f64).sqrt());
    }
    let mean_n = (1.0 + f.epsilon).powi(-(f.m as i32));
    let product_rhs = 0.5f64.powi(f.m as i32) * mean_n * mean_n * factor;
    let prop2 = Prop2 {
        count,
        scale,
        ratio: count / scale,
        pass: count <= scale / 100.0,
        product_lhs,
        product_rhs,
        product_pass: product_lhs <= product_rhs * (1.0 + 1e-12),
    };

    let threshold = xf * (-(1.0 / f.alpha).ln().powf(1.0 / 3.0)).exp();
    let window = (threshold.ceil() as u64).clamp(1, f.x);
    let max_step = if window <= 1 { f.x } else { (f.x - 1) / (window - 1) };
    if max_step.saturating_mul(f.x) > SCAN_WORK_CAP {
        return Err(Error::CapExceeded { x: f.x, cap: SCAN_WORK_CAP / max_step.max(1) });
    }
    let target = 2.0 * f.alpha;
    let mut best_window_avg = f64::NEG_INFINITY;
    let mut best_window = (1, 1);
    let mut longest = (1u64, 1u64, 0u64);
    for d in 1..=max_step {
        for r in 1..=d.min(f.x) {
            let seq: Vec<f64> = (r..=f.x).step_by(d as usize).map(|x| vals[(x - 1) as usize]).collect();
            let l = window as usize;
            if seq.len() >= l {
                let mut s: f64 = seq[..l].iter().sum();
                for i in 0..=seq.len() - l {
                    if i > 0 {
                        s += seq[i + l - 1] - seq[i - 1];
                    }
                    if s / l as f64 > best_window_avg + 1e-15 {
                        best_window_avg = s / l as f64;
                        best_window = (r + i as u64 * d, d);
                    }
                }
            }
            let (i, len) = longest_dense_run(&seq, target);
            if len as u64 > longest.2 {
                longest = (r + i as u64 * d, d, len as u64);
            }
        }
    }
    let prop3 = Prop3 {
        window,
        threshold,
        max_step,
        best_window_avg,
        best_window,
        longest,
        pass: (longest.2 as f64) < threshold,
    };
    Ok(LbReport { prop1, prop2, prop3, flags: f.flags.clone() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMeanReport {
    /// Largest `(class average) / (1 + ε)^{m - M}` over all prime subsets and residues.
    pub worst_ratio: f64,
    pub worst_subset: Vec<u64>,
    pub classes_checked: u64,
    pub pass: bool,
}

/// Averages of `ψ_N` over every congruence class modulo every product of a subset of the primes,
/// against `(1 + ε)^{m - M}`.
pub fn class_mean_check(f: &LowerBoundFunction) -> Result<ClassMeanReport> {
    let n =
        f.n_big().to_u64().filter(|&n| n <= 10_000_000).ok_or(Error::CapExceeded { x: u64::MAX, cap: 10_000_000 })?;
    let big_m = f.m as i32;
    if (1u64 << f.m).saturating_mul(n) > 2_000_000_000 {
        return Err(Error::CapExceeded { x: n, cap: 2_000_000_000 >> f.m });
    }
    let psi: Vec<f64> = (0..n).map(|x| f.psi_n(x)).collect();
    let mut worst = (f64::NEG_INFINITY, Vec::new());
    let mut classes = 0u64;
    for mask in 0u32..(1 << f.m) {
        let subset: Vec<u64> = (0..f.m).filter(|k| mask >> k & 1 == 1).map(|k| f.primes[k]).collect();
        let modulus: u64 = subset.iter().product();
        let mut sums = vec![0.0; modulus as usize];
        for (x, v) in psi.iter().enumerate() {
            sums[x % modulus as usize] += v;
        }
        let size = (n / modulus) as f64;
        let bound = (1.0 + f.epsilon).powi(subset.len() as i32 - big_m);
        for s in sums {
            classes += 1;
            let ratio = s / size / bound;
            if ratio > worst.0 {
                worst = (ratio, subset.clone());
            }
        }
    }
    Ok(ClassMeanReport {
        worst_ratio: worst.0,
        worst_subset: worst.1,
        classes_checked: classes,
        pass: worst.0 <= 1.0 + 1e-9,
    })
}

/// `(E_{x,y ∈ Z/N} ψ_N(x) ψ_N(y) 1_□(x - y)` summed directly, product of per-prime correlations`)`.
pub fn crt_square_correlation_direct(primes: &[u64], epsilon: f64) -> Result<(f64, f64)> {
    let ws: Vec<PrimeLocalWeight> = primes.iter().map(|&p| PrimeLocalWeight::new(p, epsilon)).collect::<Result<_>>()?;
    let n: u64 = primes.iter().product();
    if n > 5_000 {
        return Err(Error::CapExceeded { x: n, cap: 5_000 });
    }
    let psi: Vec<f64> = (0..n).map(|x| ws.iter().map(|w| w.value(x)).product()).collect();
    let mut sq = vec![false; n as usize];
    for b in 0..n {
        sq[(b * b % n) as usize] = true;
    }
    let mut acc = KahanSum::default();
    for (d, _) in sq.iter().enumerate().filter(|(_, &v)| v) {
        for y in 0..n as usize {
            acc.add(psi[(y + d) % n as usize] * psi[y]);
        }
    }
    let direct = acc.value() / (n * n) as f64;
    let mut product = 1.0;
    for w in &ws {
        product *= correlation_fourier(w)?;
    }
    Ok((direct, product))
}

#[cfg(test)]
mod tests {
    use super::super::{build_lower_bound, LowerBoundOptions};
    use super::*;

    #[test]
    fn dense_run_oracle() {
        let vals = [0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.2, 0.9, 0.0];
        for target in [0.3, 0.5, 0.7] {
            let mut best = 0;
            for i in 0..vals.len() {
                for j in i + 1..=vals.len() {
                    let avg: f64 = vals[i..j].iter().sum::<f64>() / (j - i) as f64;
                    if avg >= target {
                        best = best.max(j - i);
                    }
                }
            }
            assert_eq!(longest_dense_run(&vals, target).1, best);
        }
    }

    #[test]
    fn crt_factorization() {
        let (direct, product) = crt_square_correlation_direct(&[13, 17], 1.0).unwrap();
        assert!((direct - product).abs() < 1e-12);
    }

    #[test]
    fn two_prime_instance() {
        let opts = LowerBoundOptions { t: Some(200), c_big: 1.5, prime_count: Some(2), strict: false };
        let f = build_lower_bound(200_000, 0.2, &opts).unwrap();
        assert!(f.cutoff > 0);
        let cm = class_mean_check(&f).unwrap();
        assert!(cm.pass, "{cm:?}");
        let rep = verify_lb_properties(&f).unwrap();
        assert!(rep.prop1.pass, "{:?}", rep.prop1);
        assert!(rep.prop2.count > 0.0);
    }
}
