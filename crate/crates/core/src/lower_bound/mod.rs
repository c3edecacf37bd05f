//! A bounded function on `[X]` of density `α` with few square differences and no long
//! progression of doubled density, built from cosine weights modulo primes `p ≡ 1 (mod 4)`.

mod verify;

pub use verify::{
    class_mean_check, crt_square_correlation_direct, longest_dense_run, verify_lb_properties, ClassMeanReport,
    LbReport, Prop1, Prop2, Prop3, VERIFY_CAP,
};

use crate::arith::{is_prime, legendre, primes_in};
use crate::circle::square_indicator_fourier;
use crate::error::{Error, Result};
use num::bigint::BigUint;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Smallest quadratic nonresidue `s ≥ 2` modulo an odd prime.
pub fn qnr_find(p: u64) -> Result<u64> {
    if p == 2 || !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok((2..p).find(|&s| legendre(s, p) == -1).expect("odd primes have nonresidues"))
}

/// `ψ_p(x) = (1 + ε)⁻¹ (1 - ε cos(2πsx/p))` with `s` a nonresidue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimeLocalWeight {
    pub p: u64,
    pub epsilon: f64,
    pub s: u64,
}

impl PrimeLocalWeight {
    pub fn new(p: u64, epsilon: f64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p % 4 != 1 {
            return Err(Error::BadPrimeClass(p));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidInput(format!("epsilon = {epsilon} outside [0, 1]")));
        }
        Ok(PrimeLocalWeight { p, epsilon, s: qnr_find(p)? })
    }

    pub fn value(&self, x: u64) -> f64 {
        let r = (self.s as u128 * (x % self.p) as u128 % self.p as u128) as f64 / self.p as f64;
        (1.0 - self.epsilon * (TAU * r).cos()) / (1.0 + self.epsilon)
    }

    pub fn mean(&self) -> f64 {
        1.0 / (1.0 + self.epsilon)
    }

    /// `ψ̂_p(r) = (1 + ε)⁻¹ (1_{r=0} - (ε/2) 1_{r=s} - (ε/2) 1_{r=-s})`.
    pub fn fourier(&self, r: i64) -> f64 {
        let r = r.rem_euclid(self.p as i64) as u64;
        let half = self.epsilon / 2.0;
        let v = if r == 0 {
            1.0
        } else if r == self.s || r == self.p - self.s {
            -half
        } else {
            0.0
        };
        v / (1.0 + self.epsilon)
    }

    /// `E_x ψ_p(x) e(-rx/p)` by direct summation.
    pub fn fourier_dft(&self, r: i64) -> Complex64 {
        let p = self.p;
        let r = r.rem_euclid(p as i64) as u128;
        let mut acc = Complex64::new(0.0, 0.0);
        for x in 0..p {
            acc += crate::arith::e_frac(-((r * x as u128 % p as u128) as i128), p) * self.value(x);
        }
        acc / p as f64
    }
}

/// `Σ_r |ψ̂_p(r)|² 1̂_□(r)`, using the three-term spectrum and Gauss sums.
pub(crate) fn correlation_fourier(w: &PrimeLocalWeight) -> Result<f64> {
    let mut acc = 0.0;
    for r in [0i64, w.s as i64, -(w.s as i64)] {
        let (_, via_gauss) = square_indicator_fourier(r, w.p)?;
        acc += w.fourier(r).powi(2) * via_gauss.re;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareCorrelation {
    /// `E_{x,y} ψ_p(x) ψ_p(y) 1_□(x - y)` summed directly.
    pub direct: f64,
    /// `Σ_r |ψ̂_p(r)|² 1̂_□(r)`.
    pub fourier: f64,
    /// `(Eψ_p)² (1/2)(1 - ε²/(8√p))`.
    pub bound: f64,
    pub pass: bool,
}

/// `(direct, fourier)` values of `E_{x,y} ψ_p(x) ψ_p(y) 1_□(x - y)` for any `ε ∈ [0, 1]`.
pub fn square_correlation_routes(p: u64, epsilon: f64) -> Result<(f64, f64)> {
    let w = PrimeLocalWeight::new(p, epsilon)?;
    let vals: Vec<f64> = (0..p).map(|x| w.value(x)).collect();
    let mut is_sq = vec![false; p as usize];
    for b in 0..p {
        is_sq[(b * b % p) as usize] = true;
    }
    let mut direct = crate::arith::KahanSum::default();
    for (d, _) in is_sq.iter().enumerate().filter(|(_, &v)| v) {
        for (y, vy) in vals.iter().enumerate() {
            direct.add(vals[(y + d) % p as usize] * vy);
        }
    }
    Ok((direct.value() / (p * p) as f64, correlation_fourier(&w)?))
}

/// Correlation of `ψ_p` with itself along square differences modulo `p` (zero included),
/// against `(Eψ_p)² (1/2)(1 - ε²/(8√p))`; requires `ε ≥ 4 p^{-1/4}`.
pub fn square_correlation(p: u64, epsilon: f64) -> Result<SquareCorrelation> {
    let w = PrimeLocalWeight::new(p, epsilon)?;
    let required = 4.0 * (p as f64).powf(-0.25);
    if epsilon < required {
        return Err(Error::EpsilonTooSmall { epsilon, required });
    }
    let (direct, fourier) = square_correlation_routes(p, epsilon)?;
    let bound = w.mean().powi(2) * 0.5 * (1.0 - epsilon * epsilon / (8.0 * (p as f64).sqrt()));
    Ok(SquareCorrelation { direct, fourier, bound, pass: direct <= bound * (1.0 + 1e-12) })
}

/// Parameters of the construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundOptions {
    /// Prime range `[T, 2T]`; chosen from `α` when absent.
    pub t: Option<u64>,
    /// The constant `C` in `ε = C (log T)^{1/2} T^{-1/4}`.
    pub c_big: f64,
    /// Use only this many primes instead of `M = ⌊T / (4 log T)⌋`.
    pub prime_count: Option<usize>,
    /// Reject parameters outside the asymptotic regime instead of flagging them.
    pub strict: bool,
}

impl Default for LowerBoundOptions {
    fn default() -> Self {
        LowerBoundOptions { t: None, c_big: 1.5, prime_count: None, strict: false }
    }
}

/// `(ε clamped to 1, raw ε, M)` for a given `T`.
pub fn epsilon_and_m(t: u64, c_big: f64) -> (f64, f64, usize) {
    let tf = t as f64;
    let raw = c_big * tf.ln().sqrt() * tf.powf(-0.25);
    (raw.min(1.0), raw, (tf / (4.0 * tf.ln())).floor() as usize)
}

fn mean_in_range(alpha: f64, mean: f64) -> bool {
    alpha <= mean && mean <= 2.0 * alpha
}

/// Smallest `T ≥ 16` with `α ≤ (1 + ε)^{-M} ≤ 2α`.
pub fn choose_t(alpha: f64, c_big: f64) -> Result<u64> {
    (16..=200_000)
        .find(|&t| {
            let (eps, _, m) = epsilon_and_m(t, c_big);
            m >= 1 && mean_in_range(alpha, (1.0 + eps).powi(-(m as i32)))
        })
        .ok_or_else(|| {
            Error::Infeasible(format!("no T in [16, 200000] gives alpha <= (1+eps)^-M <= 2 alpha for alpha = {alpha}"))
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundFunction {
    pub x: u64,
    pub alpha: f64,
    pub t: u64,
    pub c_big: f64,
    pub epsilon: f64,
    pub epsilon_raw: f64,
    /// Number of primes used.
    pub m: usize,
    /// `⌊T / (4 log T)⌋`, the full prime count.
    pub m_full: usize,
    pub primes: Vec<u64>,
    /// `N = ∏ p` in decimal.
    pub n: String,
    /// `N ⌊X/N⌋`; beyond it `f = α`.
    pub cutoff: u64,
    /// `c = α (1 + ε)^M`, an exact binary fraction `c_num / c_den`.
    pub c: f64,
    pub c_num: u64,
    pub c_den: u64,
    /// Departures from the asymptotic regime.
    pub flags: Vec<String>,
}

impl LowerBoundFunction {
    pub fn weights(&self) -> Vec<PrimeLocalWeight> {
        self.primes.iter().map(|&p| PrimeLocalWeight { p, epsilon: self.epsilon, s: qnr_find(p).unwrap() }).collect()
    }

    /// `ψ_N(x) = ∏_p ψ_p(x mod p)`.
    pub fn psi_n(&self, x: u64) -> f64 {
        self.weights().iter().map(|w| w.value(x)).product()
    }

    /// `f(1), …, f(X)`.
    pub fn values(&self) -> Vec<f64> {
        let ws = self.weights();
        (1..=self.x)
            .map(
                |x| if x <= self.cutoff { self.c * ws.iter().map(|w| w.value(x)).product::<f64>() } else { self.alpha },
            )
            .collect()
    }

    pub fn n_big(&self) -> BigUint {
        self.n.parse().expect("decimal N")
    }

    /// Values over one period `x = 1, …, N` (empty when `N > X`) as `(value, run)` pairs.
    pub fn values_rle(&self) -> Vec<(f64, u64)> {
        let Some(n) = self.n_big().to_u64().filter(|&n| n <= self.x) else {
            return Vec::new();
        };
        let ws = self.weights();
        let mut out: Vec<(f64, u64)> = Vec::new();
        for x in 1..=n {
            let v = self.c * ws.iter().map(|w| w.value(x)).product::<f64>();
            match out.last_mut() {
                Some((u, k)) if *u == v => *k += 1,
                _ => out.push((v, 1)),
            }
        }
        out
    }
}

/// Builds `f(x) = c ψ_N(x mod N)` for `x ≤ N⌊X/N⌋`, `f(x) = α` beyond, with `c E ψ_N = α`.
pub fn build_lower_bound(x: u64, alpha: f64, opts: &LowerBoundOptions) -> Result<LowerBoundFunction> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha = {alpha} outside (0, 1)")));
    }
    if x == 0 {
        return Err(Error::InvalidInput("X must be at least 1".into()));
    }
    let t = match opts.t {
        Some(t) => t,
        None => choose_t(alpha, opts.c_big)?,
    };
    if t < 2 {
        return Err(Error::InvalidInput("T must be at least 2".into()));
    }
    let (epsilon, epsilon_raw, m_full) = epsilon_and_m(t, opts.c_big);
    let m = opts.prime_count.unwrap_or(m_full);
    if m == 0 {
        return Err(Error::Infeasible("M = 0 primes".into()));
    }
    let pool: Vec<u64> = primes_in(t, 2 * t).into_iter().filter(|p| p % 4 == 1).collect();
    if pool.len() < m {
        return Err(Error::Infeasible(format!("only {} primes = 1 mod 4 in [{t}, {}], need {m}", pool.len(), 2 * t)));
    }
    let primes = pool[..m].to_vec();
    let mean = (1.0 + epsilon).powi(-(m as i32));
    if alpha > mean {
        return Err(Error::Infeasible(format!("alpha = {alpha} exceeds E psi_N = (1+eps)^-M = {mean}")));
    }

    let mut flags = Vec::new();
    if epsilon_raw > 1.0 {
        flags.push(format!("epsilon clamped to 1 from {epsilon_raw:.4}"));
    }
    if mean > 2.0 * alpha {
        flags.push(format!("E psi_N = {mean:.6e} > 2 alpha, so c < 1/2"));
    }
    if (t as f64) < opts.c_big.powi(4) {
        flags.push(format!("T = {t} < C^4 = {:.1}", opts.c_big.powi(4)));
    }
    if m != m_full {
        flags.push(format!("truncated to {m} of M = {m_full} primes"));
    }
    for &p in &primes {
        if epsilon < 4.0 * (p as f64).powf(-0.25) {
            flags.push(format!("epsilon < 4 p^(-1/4) at p = {p}"));
            break;
        }
    }
    let n: BigUint = primes.iter().map(|&p| BigUint::from(p)).product();
    let bound_4 = BigUint::from(4u32).pow(2 * t as u32);
    if n > bound_4 {
        flags.push("N > 4^(2T)".into());
    }
    let x_tenth = (x as f64).powf(0.1);
    if n.to_f64().unwrap_or(f64::INFINITY) >= x_tenth {
        flags.push(format!("N >= X^(1/10) = {x_tenth:.3}"));
    }
    let cutoff = match n.to_u64() {
        Some(nv) if nv <= x => nv * (x / nv),
        _ => 0,
    };
    if cutoff == 0 {
        flags.push("N > X: f is the constant alpha".into());
    }
    if opts.strict && !flags.is_empty() {
        return Err(Error::Infeasible(flags.join("; ")));
    }

    let c = alpha / mean;
    let exact = BigRational::from_float(c).expect("finite");
    let (c_num, c_den) = (exact.numer().to_u64().unwrap_or(0), exact.denom().to_u64().unwrap_or(0));
    if c_den.is_zero() || c > 1.0 {
        return Err(Error::Infeasible(format!("c = {c} not representable in [0, 1]")));
    }
    Ok(LowerBoundFunction {
        x,
        alpha,
        t,
        c_big: opts.c_big,
        epsilon,
        epsilon_raw,
        m,
        m_full,
        primes,
        n: n.to_string(),
        cutoff,
        c,
        c_num,
        c_den,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nonresidues() {
        assert_eq!(qnr_find(5).unwrap(), 2);
        assert_eq!(qnr_find(13).unwrap(), 2);
        assert_eq!(qnr_find(17).unwrap(), 3);
        assert!(matches!(qnr_find(15), Err(Error::NotPrime(15))));
    }

    #[test]
    fn local_weight_spectrum() {
        let w = PrimeLocalWeight::new(29, 0.6).unwrap();
        let mean: f64 = (0..29).map(|x| w.value(x)).sum::<f64>() / 29.0;
        assert!((mean - 1.0 / 1.6).abs() < 1e-14);
        assert!((0..29).all(|x| (0.0..=1.0).contains(&w.value(x))));
        for r in 0..29 {
            assert!((w.fourier_dft(r) - Complex64::new(w.fourier(r), 0.0)).norm() < 1e-12);
        }
        assert!(matches!(PrimeLocalWeight::new(7, 0.5), Err(Error::BadPrimeClass(7))));
    }

    #[test]
    fn correlation_routes() {
        let r = square_correlation(1009, 0.71).unwrap();
        assert!((r.direct - r.fourier).abs() < 1e-12);
        assert!(r.pass);
        let p = 1009f64;
        let mean = 1.0 / 1.71;
        let closed = mean * mean * ((p + 1.0) / (2.0 * p) + 0.71 * 0.71 / 2.0 * (1.0 - p.sqrt()) / (2.0 * p));
        assert!((r.direct - closed).abs() < 1e-12);
        assert!(matches!(square_correlation(13, 1.0), Err(Error::EpsilonTooSmall { .. })));
    }

    #[test]
    fn construction_t200() {
        let opts = LowerBoundOptions { t: Some(200), c_big: 1.5, ..Default::default() };
        let (eps, _, m) = epsilon_and_m(200, 1.5);
        assert!(eps <= 1.0 && m == 9);
        let alpha = (1.0 + eps).powi(-9) * 0.75;
        let f = build_lower_bound(1_000_000, alpha, &opts).unwrap();
        assert_eq!(f.cutoff, 0);
        assert!((0.5..=1.0).contains(&f.c));
        assert_eq!(f.c_num as f64 / f.c_den as f64, f.c);
        assert!(f.n_big() <= BigUint::from(4u32).pow(400));
        assert!(f.primes.iter().all(|p| p % 4 == 1 && (200..=400).contains(p)));
        let strict = LowerBoundOptions { strict: true, ..opts.clone() };
        assert!(matches!(build_lower_bound(1_000_000, alpha, &strict), Err(Error::Infeasible(_))));
        assert!(matches!(build_lower_bound(1_000_000, 0.5, &opts), Err(Error::Infeasible(_))));
    }

    #[test]
    fn chosen_t_is_feasible() {
        let t = choose_t(0.01, 1.5).unwrap();
        let (eps, _, m) = epsilon_and_m(t, 1.5);
        assert!(mean_in_range(0.01, (1.0 + eps).powi(-(m as i32))));
    }
}
