use super::global::C0;
use super::lifting::{lift, Mode};
use super::{apply_multiplier, masks_of_size, ModulusSet, MultiplierSpec};
use crate::arith::gcd;
use crate::error::{Error, Result};
use crate::sets::Progression;
use num::complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::TAU;

const RESIDUE_TABLE_CAP: u128 = 1 << 22;

/// `Σ_{|S|=d} Σ_{a mod ∏S, q∤a} |Σ_{x∈[X]} f(x) e(-(a/∏S + ξ₀) x)|²` by direct summation;
/// `f[i]` is `f(i + 1)`.
pub fn level_d_energy(f: &[Complex64], q: &ModulusSet, d: usize, xi0: f64) -> Result<f64> {
    if d > q.len() {
        return Ok(0.0);
    }
    let twisted: Vec<Complex64> = f
        .iter()
        .enumerate()
        .map(|(i, v)| v * Complex64::from_polar(1.0, -TAU * (xi0 * (i as f64 + 1.0)).rem_euclid(1.0)))
        .collect();
    let mut total = 0.0;
    for mask in masks_of_size(q.len(), d) {
        let subset = q.moduli_in(mask);
        let m128: u128 = subset.iter().map(|&m| m as u128).product();
        if m128 > RESIDUE_TABLE_CAP {
            return Err(Error::CapExceeded { x: m128.min(u64::MAX as u128) as u64, cap: RESIDUE_TABLE_CAP as u64 });
        }
        let m = m128 as u64;
        // Residue-class sums; only occupied classes are kept.
        let mut classes: Vec<(u64, Complex64)> = Vec::new();
        if (m as usize) <= 4 * twisted.len().max(1) {
            let mut r = vec![Complex64::new(0.0, 0.0); m as usize];
            for (i, v) in twisted.iter().enumerate() {
                r[((i as u64 + 1) % m) as usize] += v;
            }
            classes.extend(r.into_iter().enumerate().map(|(b, v)| (b as u64, v)));
        } else {
            classes.extend(twisted.iter().enumerate().map(|(i, &v)| ((i as u64 + 1) % m, v)));
        }
        let twiddle: Vec<Complex64> = (0..m).map(|j| Complex64::from_polar(1.0, -TAU * j as f64 / m as f64)).collect();
        for a in 0..m {
            if subset.iter().any(|&p| a % p == 0) {
                continue;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for &(b, v) in &classes {
                acc += v * twiddle[((a as u128 * b as u128) % m as u128) as usize];
            }
            total += acc.norm_sqr();
        }
    }
    Ok(total)
}

/// The same energy as `X² ‖W_d Ψ f‖₂²`, using the lift of `f(x) e(-ξ₀ x)` to `G_Q`.
pub fn level_d_energy_operator(f: &[Complex64], q: &ModulusSet, d: usize, xi0: f64) -> Result<f64> {
    let x = f.len() as u64;
    let twisted: Vec<Complex64> = f
        .iter()
        .enumerate()
        .map(|(i, v)| v * Complex64::from_polar(1.0, -TAU * (xi0 * (i as f64 + 1.0)).rem_euclid(1.0)))
        .collect();
    let g = lift(&Progression::interval(x), x, q, &twisted)?;
    let w = apply_multiplier(&MultiplierSpec::Level(d as i64), &g)?;
    Ok((x as f64).powi(2) * w.norm2().powi(2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalWitness {
    pub subset: Vec<u64>,
    pub modulus: u64,
    pub residue: u64,
    pub class_size: u64,
    /// Average of `|f|` on the class.
    pub density: f64,
    /// `r^{|S|} α`.
    pub threshold: f64,
}

/// Densest subprogression `{x ∈ P : x ≡ a mod ∏S}` relative to `r^{|S|} α`, over
/// `min_size ≤ |S| ≤ max_size`. Returns the largest ratio found, whether or not it exceeds 1.
fn densest_class(
    abs_f: &[f64],
    p: &Progression,
    q: &ModulusSet,
    r: f64,
    alpha: f64,
    min_size: usize,
    max_size: usize,
) -> Result<Option<LocalWitness>> {
    if abs_f.len() as u64 != p.length {
        return Err(Error::InvalidInput("one value per progression term required".into()));
    }
    for &m in q.moduli() {
        if gcd(m, p.step) != 1 {
            return Err(Error::StepNotCoprime { step: p.step, modulus: m });
        }
    }
    let mut best: Option<(f64, LocalWitness)> = None;
    for size in min_size..=max_size.min(q.len()) {
        let threshold = r.powi(size as i32) * alpha;
        for mask in masks_of_size(q.len(), size) {
            let subset = q.moduli_in(mask);
            let m: u128 = subset.iter().map(|&v| v as u128).product();
            let mut sums: HashMap<u64, (f64, u64)> = HashMap::new();
            for (v, n) in abs_f.iter().zip(p.iter()) {
                let e = sums.entry((n as u128 % m) as u64).or_insert((0.0, 0));
                e.0 += v;
                e.1 += 1;
            }
            let mut keys: Vec<u64> = sums.keys().copied().collect();
            keys.sort_unstable();
            for residue in keys {
                let (s, c) = sums[&residue];
                let density = s / c as f64;
                let ratio = density / threshold;
                if best.as_ref().is_none_or(|(b, _)| ratio > *b) {
                    best = Some((
                        ratio,
                        LocalWitness {
                            subset: subset.clone(),
                            modulus: m.min(u64::MAX as u128) as u64,
                            residue,
                            class_size: c,
                            density,
                            threshold,
                        },
                    ));
                }
            }
        }
    }
    Ok(best.map(|(_, w)| w))
}

/// `(r, α, d)`-integer-globalness of `f` on `P`: returns a subprogression cut out modulo `∏S`,
/// `|S| ≤ d`, on which the average of `|f|` exceeds `r^{|S|} α`, or `None` if there is none.
pub fn integer_globalness(
    abs_f: &[f64],
    p: &Progression,
    q: &ModulusSet,
    r: f64,
    alpha: f64,
    d: usize,
) -> Result<Option<LocalWitness>> {
    Ok(densest_class(abs_f, p, q, r, alpha, 0, d)?.filter(|w| w.density > w.threshold))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DichotomyOptions {
    /// Base of the density threshold `λ^{|S|} α`.
    pub lambda: f64,
    pub mode: Mode,
}

impl Default for DichotomyOptions {
    fn default() -> Self {
        DichotomyOptions { lambda: 2.0, mode: Mode::Strict }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Clause1Check {
    pub energy: f64,
    /// `α² X² (C₀ log(1/α) / d)^d`, with the `d = 0` factor read as 1.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DichotomyVerdict {
    Clause1,
    Clause2,
    BothFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    /// `Clause2` whenever a dense class exists, else `Clause1` if the energy bound holds.
    pub verdict: DichotomyVerdict,
    pub clause1: Clause1Check,
    pub clause2: Option<LocalWitness>,
    pub in_theorem_regime: bool,
    pub violations: Vec<String>,
}

/// Decides which alternative of the level-`d` dichotomy holds for `f : [X] → C`, `|f| ≤ 1`.
pub fn level_d_dichotomy(
    f: &[Complex64],
    q: &ModulusSet,
    alpha: f64,
    d: usize,
    opts: DichotomyOptions,
) -> Result<DichotomyReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha = {alpha} outside (0, 1)")));
    }
    if f.iter().any(|z| z.norm() > 1.0 + 1e-12) {
        return Err(Error::InvalidInput("|f| must be at most 1".into()));
    }
    let x = f.len() as f64;
    let l = (1.0 / alpha).ln();
    let mut violations = Vec::new();
    if alpha >= 0.5 {
        violations.push(format!("alpha = {alpha} is not below 1/2"));
    }
    if alpha <= 2.0 * x.powf(-0.5) {
        violations.push(format!("alpha = {alpha} <= 2 X^(-1/2) = {:.4}", 2.0 * x.powf(-0.5)));
    }
    let qmax_cap = x.powf(1.0 / (32.0 * l));
    if q.max_modulus() as f64 > qmax_cap {
        violations.push(format!("(i) max q = {} > X^(1/32 log(1/alpha)) = {qmax_cap:.4}", q.max_modulus()));
    }
    if (q.product() as f64) < x * x {
        violations.push(format!("(ii) prod q = {} < X^2 = {}", q.product(), x * x));
    }
    if d as f64 > l / 128.0 {
        violations.push(format!("d = {d} > 2^-7 log(1/alpha) = {:.4}", l / 128.0));
    }
    if opts.mode == Mode::Strict && !violations.is_empty() {
        return Err(Error::HypothesisViolated(violations));
    }

    let energy = level_d_energy(f, q, d, 0.0)?;
    let factor = if d == 0 { 1.0 } else { (C0 * l / d as f64).powi(d as i32) };
    let bound = alpha * alpha * x * x * factor;
    let clause1 = Clause1Check { energy, bound, holds: energy <= bound };

    let abs_f: Vec<f64> = f.iter().map(|z| z.norm()).collect();
    let max_size = (2.0 * l).floor() as usize;
    let clause2 = densest_class(&abs_f, &Progression::interval(f.len() as u64), q, opts.lambda, alpha, 1, max_size)?
        .filter(|w| w.density > w.threshold);

    let verdict = if clause2.is_some() {
        DichotomyVerdict::Clause2
    } else if clause1.holds {
        DichotomyVerdict::Clause1
    } else {
        DichotomyVerdict::BothFailed
    };
    Ok(DichotomyReport { verdict, clause1, clause2, in_theorem_regime: violations.is_empty(), violations })
}
