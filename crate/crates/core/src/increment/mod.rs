//! Density increments for square-difference-free sets.
//!
//! Witnesses carry exact densities; Fourier masses are floating point and preconditions on them
//! use a relative guard band of `GUARD`.

mod driver;

pub use driver::{
    bound_curve, classify, f_shape, frequency_profile, increment_driver, increment_step_check, ClauseConstants,
    DriverConfig, DriverOutcome, FrequencyProbe, SmallDensityCertificate,
};

use crate::arith::{e, KahanSum};
use crate::circle::SquareWeight;
use crate::error::{Error, Result};
use crate::sets::{density_on_progression, IntegerSet, Progression};
use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::{BigRational, Ratio};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Relative slack allowed when checking Fourier-mass preconditions.
pub const GUARD: f64 = 1e-6;

/// `f_A = 1_A - α 1_{[X]}` with `α = |A| / X`.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedFunction {
    set: IntegerSet,
    x: u64,
    alpha: Ratio<u64>,
    member: Vec<bool>,
}

impl BalancedFunction {
    pub fn new(a: &IntegerSet, x: u64) -> Result<Self> {
        if x == 0 {
            return Err(Error::InvalidInput("X must be at least 1".into()));
        }
        let mut member = vec![false; x as usize + 1];
        for &n in a.elements() {
            if n == 0 || n > x {
                return Err(Error::OutOfUniverse(n));
            }
            member[n as usize] = true;
        }
        let set = IntegerSet::new(a.elements().to_vec(), x)?;
        Ok(BalancedFunction { alpha: Ratio::new(a.len() as u64, x), set, x, member })
    }

    pub fn set(&self) -> &IntegerSet {
        &self.set
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn alpha(&self) -> Ratio<u64> {
        self.alpha
    }

    pub fn alpha_f64(&self) -> f64 {
        self.set.len() as f64 / self.x as f64
    }

    pub fn contains(&self, n: u64) -> bool {
        (n as usize) < self.member.len() && self.member[n as usize]
    }

    /// `f_A(n)` exactly, for `n ∈ [1, X]`.
    pub fn value(&self, n: u64) -> Result<Ratio<i64>> {
        if n == 0 || n > self.x {
            return Err(Error::OutOfUniverse(n));
        }
        let a = Ratio::new(*self.alpha.numer() as i64, *self.alpha.denom() as i64);
        Ok(if self.member[n as usize] { Ratio::from_integer(1) - a } else { -a })
    }

    /// `Σ_{n ∈ [X]} f_A(n)`, exactly; always zero.
    pub fn total(&self) -> Ratio<i128> {
        let k = self.set.len() as i128;
        Ratio::from_integer(k) - Ratio::new(k * self.x as i128, self.x as i128)
    }

    pub fn values_f64(&self) -> Vec<f64> {
        let a = self.alpha_f64();
        (1..=self.x).map(|n| if self.member[n as usize] { 1.0 - a } else { -a }).collect()
    }

    /// `f̂_A(θ) = Σ_{n ∈ [X]} f_A(n) e(-θn)` by direct summation.
    pub fn fourier(&self, theta: f64) -> Complex64 {
        let theta = theta.rem_euclid(1.0);
        let a = self.alpha_f64();
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 1..=self.x {
            let v = if self.member[n as usize] { 1.0 - a } else { -a };
            acc += e(-(theta * n as f64).rem_euclid(1.0)) * v;
        }
        acc
    }

    /// `S_b = Σ_{n ≡ b (q)} e(-ξn) f_A(n)` for `b = 0, …, q-1`.
    pub fn class_sums(&self, q: u64, xi: f64) -> Vec<Complex64> {
        let a = self.alpha_f64();
        let mut s = vec![Complex64::new(0.0, 0.0); q as usize];
        for n in 1..=self.x {
            let v = if self.member[n as usize] { 1.0 - a } else { -a };
            s[(n % q) as usize] += e(-(xi * n as f64).rem_euclid(1.0)) * v;
        }
        s
    }
}

/// `f̂_A(a/q + ξ)` for `a = 0, …, q-1`, from the class sums.
pub fn coefficients_from_class_sums(sums: &[Complex64]) -> Vec<Complex64> {
    let q = sums.len();
    let tw: Vec<Complex64> = (0..q).map(|j| Complex64::from_polar(1.0, -TAU * j as f64 / q as f64)).collect();
    (0..q).map(|a| sums.iter().enumerate().map(|(b, s)| s * tw[a * b % q]).sum()).collect()
}

/// `(Σ_a |f̂_A(a/q + ξ)|², q Σ_b |S_b|²)`, the two sides of the orthogonality identity.
pub fn parseval_sides(f: &BalancedFunction, q: u64, xi: f64) -> (f64, f64) {
    let lhs: f64 = (0..q).map(|a| f.fourier(a as f64 / q as f64 + xi).norm_sqr()).sum();
    let rhs: f64 = q as f64 * f.class_sums(q, xi).iter().map(|s| s.norm_sqr()).sum::<f64>();
    (lhs, rhs)
}

/// `Σ_{x, y ∈ A} g_{X,□}(x - y)`, summing only over square offsets.
pub fn weighted_square_count(a: &IntegerSet, x: u64) -> Result<f64> {
    let f = BalancedFunction::new(a, x)?;
    let g = SquareWeight::new(x)?;
    let mut acc = KahanSum::default();
    for &n in a.elements() {
        let mut t = 1u64;
        while t * t < x {
            let w = g.eval((t * t) as i64);
            if f.contains(n + t * t) {
                acc.add(w);
            }
            if n > t * t && f.contains(n - t * t) {
                acc.add(w);
            }
            t += 1;
        }
    }
    Ok(acc.value())
}

/// Which alternative of the increment statement a witness satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClauseTag {
    Star,
    C1,
    C2,
    C3,
    C4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IncrementRoute {
    /// A single point of `A`.
    Trivial,
    /// A residue class modulo `q²` on which the class modulo `q` was already twice as dense.
    ResidueClass,
    /// A cell of the interval partition.
    Partition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementWitness {
    pub progression: Progression,
    pub density_num: u64,
    pub density_den: u64,
    /// Claimed lower bound on the density; compared exactly as a binary fraction.
    pub claimed: f64,
    pub alpha: f64,
    pub route: IncrementRoute,
    pub clauses: Vec<ClauseTag>,
}

impl IncrementWitness {
    pub fn density(&self) -> f64 {
        self.density_num as f64 / self.density_den as f64
    }

    /// `|P| · (density - α)`.
    pub fn score(&self) -> f64 {
        self.progression.length as f64 * (self.density() - self.alpha)
    }
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn at_least(num: u64, den: u64, bar: &BigRational) -> bool {
    BigRational::new(BigInt::from(num), BigInt::from(den)) >= *bar
}

/// Recomputes everything a witness claims: square step, `P ⊆ [1, X]`, exact density `≥ claimed`.
pub fn verify_witness(a: &IntegerSet, x: u64, w: &IncrementWitness) -> bool {
    let p = &w.progression;
    if crate::arith::square_root_exact(p.step).is_none() || p.length == 0 || !p.within(1, x) {
        return false;
    }
    let Ok(full) = IntegerSet::new(a.elements().to_vec(), x) else {
        return false;
    };
    let Ok(d) = density_on_progression(&full, p) else {
        return false;
    };
    (*d.numer(), *d.denom()) == (w.density_num, w.density_den)
        && at_least(w.density_num, w.density_den, &exact(w.claimed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IncrementClause {
    /// One large coefficient `|f̂_A(a/q + ξ)| ≥ ηαX`.
    Single,
    /// Large mass `Σ_a |f̂_A(a/q + ξ)|² ≥ ηα²X²`.
    L2,
}

fn witness(f: &BalancedFunction, p: Progression, hits: u64, claimed: f64, route: IncrementRoute) -> IncrementWitness {
    let d = Ratio::new(hits, p.length);
    let mut w = IncrementWitness {
        progression: p,
        density_num: *d.numer(),
        density_den: *d.denom(),
        claimed,
        alpha: f.alpha_f64(),
        route,
        clauses: Vec::new(),
    };
    w.clauses = classify(&w, f.x(), &ClauseConstants::default());
    w
}

/// Earliest cell `{n ∈ I : n ≡ r (step)}` over near-equal intervals `I` of length at most `diam`
/// whose exact density reaches `bar`.
fn scan_cells(f: &BalancedFunction, step: u64, diam: u64, bar: &BigRational) -> Option<(Progression, u64)> {
    let x = f.x();
    let k = x.div_ceil(diam.max(1));
    let (base, extra) = (x / k, x % k);
    let mut lo = 1u64;
    for i in 0..k {
        let len = base + u64::from(i < extra);
        let hi = lo + len - 1;
        for start in lo..=hi.min(lo + step - 1) {
            let (mut size, mut hits, mut n) = (0u64, 0u64, start);
            while n <= hi {
                size += 1;
                hits += u64::from(f.contains(n));
                n += step;
            }
            if at_least(hits, size, bar) {
                return Some((Progression { start, step, length: size }, hits));
            }
        }
        lo = hi + 1;
    }
    None
}

/// Constructs a progression of common difference `q²` on which `A` has density at least
/// `(1 + η/20)α`, given a large Fourier coefficient (or `ℓ²` mass) of `f_A` at `a/q + ξ`.
pub fn extract_increment(
    f: &BalancedFunction,
    q: u64,
    xi: f64,
    eta: f64,
    clause: IncrementClause,
) -> Result<IncrementWitness> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidInput(format!("eta = {eta} outside (0, 1)")));
    }
    if q == 0 {
        return Err(Error::InvalidInput("q must be at least 1".into()));
    }
    let x = f.x();
    let xf = x as f64;
    let alpha = f.alpha_f64();
    let sums = f.class_sums(q, xi);
    let coeffs = coefficients_from_class_sums(&sums);
    let (measured, required) = match clause {
        IncrementClause::Single => (coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max), eta * alpha * xf),
        IncrementClause::L2 => (coeffs.iter().map(|c| c.norm_sqr()).sum(), eta * alpha * alpha * xf * xf),
    };
    if alpha == 0.0 || measured < required * (1.0 - GUARD) {
        return Err(Error::PreconditionFailed { measured, required });
    }
    let claimed = (1.0 + eta / 20.0) * alpha;
    let bar = exact(claimed);
    let step = q * q;
    let t = (xi.abs() * xf).max(1.0);

    if (step as f64) * t > eta * xf / 1024.0 {
        let first = f.set().elements()[0];
        return Ok(witness(f, Progression { start: first, step, length: 1 }, 1, claimed, IncrementRoute::Trivial));
    }

    let mut eta_cells = eta;
    if clause == IncrementClause::L2 {
        let big = 5.0 * alpha * xf / q as f64;
        if let Some(b) = (0..q).find(|&b| sums[b as usize].norm() >= big) {
            // Some class b mod q carries density ≥ 2α, hence so does a class mod q² inside it.
            let bar2 = exact(2.0 * alpha).max(bar.clone());
            for j in 0..q {
                let r = b + j * q;
                let start = if r == 0 { step } else { r };
                if start > x {
                    continue;
                }
                let length = (x - start) / step + 1;
                let p = Progression { start, step, length };
                let hits = p.iter().filter(|&n| f.contains(n)).count() as u64;
                if at_least(hits, length, &bar2) {
                    return Ok(witness(f, p, hits, claimed.max(2.0 * alpha), IncrementRoute::ResidueClass));
                }
            }
        }
        eta_cells = eta / 5.0;
    }
    let diam = (eta_cells * xf / (32.0 * t)).floor() as u64;
    match scan_cells(f, step, diam.max(1), &bar) {
        Some((p, hits)) => Ok(witness(f, p, hits, claimed, IncrementRoute::Partition)),
        None => Err(Error::SearchExhausted),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::greedy_sequence_from;
    use crate::sets::GreedyStart;

    fn set(v: Vec<u64>, x: u64) -> IntegerSet {
        IntegerSet::new(v, x).unwrap()
    }

    #[test]
    fn balanced_examples() {
        let full = BalancedFunction::new(&set((1..=10).collect(), 10), 10).unwrap();
        assert!(full.values_f64().iter().all(|&v| v == 0.0));
        let empty = BalancedFunction::new(&set(vec![], 10), 10).unwrap();
        assert!(empty.values_f64().iter().all(|&v| v == 0.0));
        let evens = BalancedFunction::new(&set(vec![2, 4, 6, 8, 10], 10), 10).unwrap();
        assert_eq!(evens.value(2).unwrap(), Ratio::new(1, 2));
        assert_eq!(evens.value(3).unwrap(), Ratio::new(-1, 2));
        assert_eq!(evens.total(), Ratio::from_integer(0));
        assert!(matches!(BalancedFunction::new(&set(vec![0, 3], 12), 10), Err(Error::OutOfUniverse(0))));
        assert!(matches!(BalancedFunction::new(&set(vec![3, 12], 12), 10), Err(Error::OutOfUniverse(12))));
    }

    #[test]
    fn square_counts() {
        let x = 500;
        let g = greedy_sequence_from(GreedyStart::One, x);
        assert_eq!(weighted_square_count(&g, x).unwrap(), 0.0);
        let pair = weighted_square_count(&set(vec![1, 2], 10), 10).unwrap();
        assert!((pair - 2.0 * crate::circle::bump_eval(0.1)).abs() < 1e-15);
        assert_eq!(weighted_square_count(&set(vec![], 10), 10).unwrap(), 0.0);
    }

    #[test]
    fn parseval_identity() {
        let a = set(vec![1, 4, 5, 9, 13, 17, 20, 22, 31, 40], 50);
        let f = BalancedFunction::new(&a, 50).unwrap();
        for (q, xi) in [(1, 0.0), (3, 0.01), (7, -0.003)] {
            let (l, r) = parseval_sides(&f, q, xi);
            assert!((l - r).abs() <= 1e-9 * r.max(1.0));
        }
    }

    #[test]
    fn multiples_of_three() {
        let x = 99;
        let a = set((1..=33).map(|k| 3 * k).collect(), x);
        let f = BalancedFunction::new(&a, x).unwrap();
        assert!((f.fourier(1.0 / 3.0).norm() - 33.0).abs() < 1e-9);
        let w = extract_increment(&f, 3, 0.0, 0.99, IncrementClause::Single).unwrap();
        assert_eq!(w.progression.step, 9);
        assert!(w.density() >= 0.35);
        assert!(verify_witness(&a, x, &w));
    }

    #[test]
    fn partition_route_on_dense_block() {
        let x = 40_000;
        let a = set((1..=x).filter(|n| *n <= 8000 || n % 7 == 0).collect(), x);
        let f = BalancedFunction::new(&a, x).unwrap();
        let eta = f.fourier(0.0001).norm() / (f.alpha_f64() * x as f64) * 0.99;
        let w = extract_increment(&f, 1, 0.0001, eta, IncrementClause::Single).unwrap();
        assert_eq!(w.route, IncrementRoute::Partition);
        assert!(verify_witness(&a, x, &w));
        assert!(w.progression.length > 1);
    }

    #[test]
    fn unstructured_set_rejected() {
        let a = set(vec![1, 2, 4, 7, 11, 16, 22, 29, 37, 46], 50);
        let f = BalancedFunction::new(&a, 50).unwrap();
        assert!(matches!(
            extract_increment(&f, 2, 0.0, 0.9, IncrementClause::Single),
            Err(Error::PreconditionFailed { .. })
        ));
    }
}
