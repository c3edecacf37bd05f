//! Fourier analysis on `G_Q = ∏_{q ∈ Q} Z/qZ`.
//!
//! Functions are dense arrays over CRT coordinates in row-major order (the last modulus varies
//! fastest). Transforms act one factor at a time, so a full transform costs `O(|G_Q| · Σ q)`.
//! The forward transform uses the normalized counting measure on physical space:
//! `f̂(ξ) = E_x f(x) e(-ξ·x)` and `f(x) = Σ_ξ f̂(ξ) e(ξ·x)`.

mod global;
mod level;
mod lifting;

pub use global::{
    derivative_norm_profile, fitted_gamma, global_params, globalness_check, hypercontractivity_verify,
    recommended_hyper_params, rho_bound, DerivativeProfile, DerivativeWitness, GlobalnessParams, GlobalnessReport,
    HyperReport, C0, GLOBALNESS_ENUMERATION_CAP,
};
pub use level::{
    integer_globalness, level_d_dichotomy, level_d_energy, level_d_energy_operator, Clause1Check, DichotomyOptions,
    DichotomyReport, DichotomyVerdict, LocalWitness,
};
pub use lifting::{
    lem32_compare, lift, lift_coefficient_direct, lift_values, restriction_residual, Lem32Report, Mode,
    RestrictionReport,
};

use crate::arith::gcd;
use crate::error::{Error, Result};
use num::complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Largest `|G_Q|` accepted for dense arrays.
pub const DENSE_CAP: u64 = 10_000_000;

/// Pairwise coprime moduli `q ≥ 2`, kept in the order given.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct ModulusSet {
    moduli: Vec<u64>,
}

impl TryFrom<Vec<u64>> for ModulusSet {
    type Error = Error;
    fn try_from(v: Vec<u64>) -> Result<Self> {
        ModulusSet::new(v)
    }
}

impl From<ModulusSet> for Vec<u64> {
    fn from(m: ModulusSet) -> Self {
        m.moduli
    }
}

impl ModulusSet {
    pub fn new(moduli: Vec<u64>) -> Result<Self> {
        for (i, &q) in moduli.iter().enumerate() {
            if q < 2 {
                return Err(Error::InvalidInput(format!("modulus {q} is below 2")));
            }
            for &p in &moduli[..i] {
                if gcd(p, q) != 1 {
                    return Err(Error::InvalidInput(format!("moduli {p} and {q} are not coprime")));
                }
            }
        }
        Ok(ModulusSet { moduli })
    }

    pub fn empty() -> Self {
        ModulusSet { moduli: Vec::new() }
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn len(&self) -> usize {
        self.moduli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moduli.is_empty()
    }

    /// `∏ q`, saturating at `u128::MAX`.
    pub fn product(&self) -> u128 {
        self.moduli.iter().fold(1u128, |acc, &q| acc.saturating_mul(q as u128))
    }

    pub fn max_modulus(&self) -> u64 {
        self.moduli.iter().copied().max().unwrap_or(1)
    }

    /// `|G_Q|` as an array length, or `CapExceeded` above [`DENSE_CAP`].
    pub fn dense_size(&self) -> Result<usize> {
        let n = self.product();
        if n > DENSE_CAP as u128 {
            return Err(Error::CapExceeded { x: n.min(u64::MAX as u128) as u64, cap: DENSE_CAP });
        }
        Ok(n as usize)
    }

    pub fn axis_of(&self, q: u64) -> Result<usize> {
        self.moduli.iter().position(|&m| m == q).ok_or(Error::UnknownModulus(q))
    }

    /// Bitmask of axes for the moduli in `subset`.
    pub fn mask_of(&self, subset: &[u64]) -> Result<u32> {
        let mut mask = 0u32;
        for &q in subset {
            mask |= 1 << self.axis_of(q)?;
        }
        Ok(mask)
    }

    pub fn moduli_in(&self, mask: u32) -> Vec<u64> {
        (0..self.len()).filter(|k| mask >> k & 1 == 1).map(|k| self.moduli[k]).collect()
    }

    /// The moduli outside `mask`, order preserved.
    pub fn complement(&self, mask: u32) -> ModulusSet {
        ModulusSet { moduli: (0..self.len()).filter(|k| mask >> k & 1 == 0).map(|k| self.moduli[k]).collect() }
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.len()];
        for k in (0..self.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.moduli[k + 1] as usize;
        }
        s
    }

    /// Array index of the CRT image of the integer `n`.
    pub fn index_of_integer(&self, n: i128) -> usize {
        let mut idx = 0usize;
        for &q in &self.moduli {
            idx = idx * q as usize + n.rem_euclid(q as i128) as usize;
        }
        idx
    }

    pub fn coords_of_index(&self, mut idx: usize) -> Vec<u64> {
        let mut c = vec![0u64; self.len()];
        for k in (0..self.len()).rev() {
            let q = self.moduli[k] as usize;
            c[k] = (idx % q) as u64;
            idx /= q;
        }
        c
    }

    pub fn index_of_coords(&self, coords: &[u64]) -> usize {
        coords.iter().zip(&self.moduli).fold(0usize, |acc, (&c, &q)| acc * q as usize + (c % q) as usize)
    }

    /// `|ξ|` for every frequency index.
    pub fn weights(&self) -> Result<Vec<u8>> {
        let n = self.dense_size()?;
        let mut w = vec![0u8; n];
        let mut stride = 1usize;
        for &q in self.moduli.iter().rev() {
            let q = q as usize;
            for (i, wi) in w.iter_mut().enumerate() {
                if (i / stride) % q != 0 {
                    *wi += 1;
                }
            }
            stride *= q;
        }
        Ok(w)
    }
}

/// A character of `G_Q`: one residue per modulus, aligned with the [`ModulusSet`] order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Frequency {
    pub residues: Vec<u64>,
}

impl Frequency {
    pub fn zero(q: &ModulusSet) -> Self {
        Frequency { residues: vec![0; q.len()] }
    }

    /// Builds from `(q, ξ_q)` pairs; unspecified moduli get 0.
    pub fn from_pairs(q: &ModulusSet, pairs: &[(u64, u64)]) -> Result<Self> {
        let mut f = Frequency::zero(q);
        for &(m, r) in pairs {
            f.residues[q.axis_of(m)?] = r % m;
        }
        Ok(f)
    }

    pub fn support(&self, q: &ModulusSet) -> Vec<u64> {
        self.residues.iter().zip(q.moduli()).filter(|(&r, _)| r != 0).map(|(_, &m)| m).collect()
    }

    pub fn weight(&self) -> usize {
        self.residues.iter().filter(|&&r| r != 0).count()
    }

    /// `Σ ξ_q / q` reduced to `[0, 1)`.
    pub fn angle(&self, q: &ModulusSet) -> f64 {
        let s: f64 = self.residues.iter().zip(q.moduli()).map(|(&r, &m)| r as f64 / m as f64).sum();
        s.rem_euclid(1.0)
    }
}

/// A complex function on `G_Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Snapshot", into = "Snapshot")]
pub struct GroupFunction {
    moduli: ModulusSet,
    values: Vec<Complex64>,
}

/// JSON form: `{moduli: [...], values: [[re, im], ...]}`.
#[derive(Serialize, Deserialize)]
struct Snapshot {
    moduli: Vec<u64>,
    values: Vec<[f64; 2]>,
}

impl TryFrom<Snapshot> for GroupFunction {
    type Error = Error;
    fn try_from(s: Snapshot) -> Result<Self> {
        let q = ModulusSet::new(s.moduli)?;
        GroupFunction::new(q, s.values.iter().map(|v| Complex64::new(v[0], v[1])).collect())
    }
}

impl From<GroupFunction> for Snapshot {
    fn from(f: GroupFunction) -> Self {
        Snapshot { moduli: f.moduli.moduli, values: f.values.iter().map(|z| [z.re, z.im]).collect() }
    }
}

impl GroupFunction {
    pub fn new(moduli: ModulusSet, values: Vec<Complex64>) -> Result<Self> {
        let n = moduli.dense_size()?;
        if values.len() != n {
            return Err(Error::InvalidInput(format!("expected {n} values for G_Q, got {}", values.len())));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("values must be finite".into()));
        }
        Ok(GroupFunction { moduli, values })
    }

    pub fn zeros(moduli: ModulusSet) -> Result<Self> {
        let n = moduli.dense_size()?;
        Ok(GroupFunction { moduli, values: vec![Complex64::new(0.0, 0.0); n] })
    }

    pub fn constant(moduli: ModulusSet, c: Complex64) -> Result<Self> {
        let n = moduli.dense_size()?;
        Ok(GroupFunction { moduli, values: vec![c; n] })
    }

    pub fn from_fn(moduli: ModulusSet, mut f: impl FnMut(&[u64]) -> Complex64) -> Result<Self> {
        let n = moduli.dense_size()?;
        let values = (0..n).map(|i| f(&moduli.coords_of_index(i))).collect();
        Ok(GroupFunction { moduli, values })
    }

    /// The character `x ↦ e(ξ·x)`.
    pub fn character(moduli: ModulusSet, xi: &Frequency) -> Result<Self> {
        let qs = moduli.moduli.clone();
        Self::from_fn(moduli, |c| {
            let phase: f64 =
                c.iter().zip(&qs).zip(&xi.residues).map(|((&x, &q), &r)| ((x * r) % q) as f64 / q as f64).sum();
            Complex64::from_polar(1.0, TAU * phase)
        })
    }

    pub fn moduli(&self) -> &ModulusSet {
        &self.moduli
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, coords: &[u64]) -> Complex64 {
        self.values[self.moduli.index_of_coords(coords)]
    }

    pub fn mean(&self) -> Complex64 {
        let n = self.values.len() as f64;
        self.values.iter().sum::<Complex64>() / n
    }

    /// `(E |f|^p)`.
    pub fn norm_p_pow(&self, p: f64) -> f64 {
        self.values.iter().map(|z| z.norm().powf(p)).sum::<f64>() / self.values.len() as f64
    }

    /// `(E |f|²)^{1/2}`.
    pub fn norm2(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    pub fn max_abs_diff(&self, other: &GroupFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `σ_{S → x}`: fix the coordinates on `mask` (given in increasing axis order).
    pub fn specialize(&self, mask: u32, point: &[u64]) -> GroupFunction {
        let q = &self.moduli;
        let rest = q.complement(mask);
        let strides = q.strides();
        let fixed: usize = (0..q.len())
            .filter(|k| mask >> k & 1 == 1)
            .zip(point)
            .map(|(k, &x)| (x % q.moduli[k]) as usize * strides[k])
            .sum();
        let free: Vec<usize> = (0..q.len()).filter(|k| mask >> k & 1 == 0).collect();
        let m = rest.product() as usize;
        let mut values = Vec::with_capacity(m);
        for j in 0..m {
            let coords = rest.coords_of_index(j);
            let idx = fixed + free.iter().zip(&coords).map(|(&k, &c)| c as usize * strides[k]).sum::<usize>();
            values.push(self.values[idx]);
        }
        GroupFunction { moduli: rest, values }
    }
}

/// Fourier coefficients indexed like the [`GroupFunction`] array.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub moduli: ModulusSet,
    pub coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn at(&self, xi: &Frequency) -> Complex64 {
        self.coeffs[self.moduli.index_of_coords(&xi.residues)]
    }

    /// `Σ_ξ |f̂(ξ)|²`.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// In-place transform along the axes in `mask`.
pub fn transform_axes(moduli: &ModulusSet, values: &mut [Complex64], mask: u32, dir: Direction) {
    let strides = moduli.strides();
    let sign = match dir {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    let mut line = Vec::new();
    for (k, &q) in moduli.moduli().iter().enumerate() {
        if mask >> k & 1 == 0 {
            continue;
        }
        let q = q as usize;
        let stride = strides[k];
        let block = q * stride;
        let twiddle: Vec<Complex64> =
            (0..q).map(|j| Complex64::from_polar(1.0, sign * TAU * j as f64 / q as f64)).collect();
        let scale = match dir {
            Direction::Forward => 1.0 / q as f64,
            Direction::Inverse => 1.0,
        };
        line.resize(q, Complex64::new(0.0, 0.0));
        for base in (0..values.len()).step_by(block) {
            for j in 0..stride {
                let start = base + j;
                for (t, slot) in line.iter_mut().enumerate() {
                    *slot = values[start + t * stride];
                }
                for xi in 0..q {
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut idx = 0usize;
                    for &v in line.iter() {
                        acc += v * twiddle[idx];
                        idx += xi;
                        if idx >= q {
                            idx -= q;
                        }
                    }
                    values[start + xi * stride] = acc * scale;
                }
            }
        }
    }
}

fn full_mask(q: &ModulusSet) -> u32 {
    ((1u64 << q.len()) - 1) as u32
}

pub fn forward(f: &GroupFunction) -> Spectrum {
    let mut coeffs = f.values.clone();
    transform_axes(&f.moduli, &mut coeffs, full_mask(&f.moduli), Direction::Forward);
    Spectrum { moduli: f.moduli.clone(), coeffs }
}

pub fn inverse(s: &Spectrum) -> GroupFunction {
    let mut values = s.coeffs.clone();
    transform_axes(&s.moduli, &mut values, full_mask(&s.moduli), Direction::Inverse);
    GroupFunction { moduli: s.moduli.clone(), values }
}

/// A Fourier multiplier `e(ξ·) ↦ w(ξ) e(ξ·)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MultiplierSpec {
    /// `E_S`: keeps `ξ` with `ξ_q = 0` for all `q ∈ S`.
    Average(Vec<u64>),
    /// `L_S`: keeps `ξ` with `ξ_q ≠ 0` for all `q ∈ S`.
    Laplacian(Vec<u64>),
    /// `W_d`: keeps `|ξ| = d`; negative `d` is the zero operator.
    Level(i64),
    /// `T_ρ`: weight `ρ^{|ξ|}`.
    Noise(f64),
}

pub fn apply_multiplier(spec: &MultiplierSpec, f: &GroupFunction) -> Result<GroupFunction> {
    let q = &f.moduli;
    match spec {
        MultiplierSpec::Average(s) | MultiplierSpec::Laplacian(s) => {
            let mask = q.mask_of(s)?;
            let keep_zero = matches!(spec, MultiplierSpec::Average(_));
            Ok(apply_axis_multiplier(f, mask, keep_zero))
        }
        MultiplierSpec::Level(d) => {
            if *d < 0 {
                return GroupFunction::zeros(q.clone());
            }
            let w = q.weights()?;
            Ok(apply_weights(f, |i| if w[i] as i64 == *d { 1.0 } else { 0.0 }))
        }
        MultiplierSpec::Noise(rho) => {
            if !(0.0..=1.0).contains(rho) {
                return Err(Error::InvalidInput(format!("noise rate {rho} outside [0, 1]")));
            }
            let w = q.weights()?;
            let powers: Vec<f64> = (0..=q.len()).map(|k| rho.powi(k as i32)).collect();
            Ok(apply_weights(f, |i| powers[w[i] as usize]))
        }
    }
}

fn apply_weights(f: &GroupFunction, weight: impl Fn(usize) -> f64) -> GroupFunction {
    let mut s = forward(f);
    for (i, c) in s.coeffs.iter_mut().enumerate() {
        *c *= weight(i);
    }
    inverse(&s)
}

/// `E_S` (`keep_zero`) or `L_S`: transform only along the axes of `S`, since the weight
/// depends on nothing else.
fn apply_axis_multiplier(f: &GroupFunction, mask: u32, keep_zero: bool) -> GroupFunction {
    let q = &f.moduli;
    let mut values = f.values.clone();
    if mask == 0 {
        return f.clone();
    }
    transform_axes(q, &mut values, mask, Direction::Forward);
    let strides = q.strides();
    let axes: Vec<(usize, usize)> =
        (0..q.len()).filter(|k| mask >> k & 1 == 1).map(|k| (strides[k], q.moduli[k] as usize)).collect();
    for (i, v) in values.iter_mut().enumerate() {
        let keep = axes.iter().all(|&(s, m)| ((i / s) % m == 0) == keep_zero);
        if !keep {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    transform_axes(q, &mut values, mask, Direction::Inverse);
    GroupFunction { moduli: q.clone(), values }
}

/// `D_{S,x} f = σ_{S→x} L_S f`, a function on `G_{Q∖S}`. `point[i]` is the coordinate for
/// `subset[i]`.
pub fn derivative(subset: &[u64], point: &[u64], f: &GroupFunction) -> Result<GroupFunction> {
    if subset.len() != point.len() {
        return Err(Error::InvalidInput("subset and point lengths differ".into()));
    }
    let q = f.moduli();
    let mask = q.mask_of(subset)?;
    let l = apply_axis_multiplier(f, mask, false);
    Ok(l.specialize(mask, &ordered_point(q, subset, point)?))
}

/// Reorders `point` (aligned with `subset`) into increasing axis order.
pub(crate) fn ordered_point(q: &ModulusSet, subset: &[u64], point: &[u64]) -> Result<Vec<u64>> {
    let mut pairs: Vec<(usize, u64)> = Vec::with_capacity(subset.len());
    for (&m, &x) in subset.iter().zip(point) {
        pairs.push((q.axis_of(m)?, x % m));
    }
    pairs.sort_unstable();
    Ok(pairs.into_iter().map(|(_, x)| x).collect())
}

/// Every subset mask of `k` axes with exactly `size` members, in increasing numeric order.
pub fn masks_of_size(k: usize, size: usize) -> Vec<u32> {
    (0u32..(1 << k)).filter(|m| m.count_ones() as usize == size).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn z6() -> ModulusSet {
        ModulusSet::new(vec![2, 3]).unwrap()
    }

    #[test]
    fn rejects_bad_moduli() {
        assert!(ModulusSet::new(vec![4, 6]).is_err());
        assert!(ModulusSet::new(vec![1, 3]).is_err());
        assert!(ModulusSet::new(vec![4, 9, 5]).is_ok());
    }

    #[test]
    fn constant_has_single_coefficient() {
        let q = ModulusSet::new(vec![3, 4, 5]).unwrap();
        let s = forward(&GroupFunction::constant(q, c(1.0)).unwrap());
        assert!((s.coeffs[0] - c(1.0)).norm() < 1e-15);
        assert!(s.coeffs[1..].iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn delta_on_z6_is_flat() {
        let mut f = GroupFunction::zeros(z6()).unwrap();
        f.values[0] = c(1.0);
        let s = forward(&f);
        for z in &s.coeffs {
            assert!((z - c(1.0 / 6.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn level_one_of_delta() {
        let mut f = GroupFunction::zeros(z6()).unwrap();
        f.values[0] = c(1.0);
        let w1 = apply_multiplier(&MultiplierSpec::Level(1), &f).unwrap();
        assert!((w1.values[0] - c(0.5)).norm() < 1e-15);
        let w0 = apply_multiplier(&MultiplierSpec::Level(0), &f).unwrap();
        assert!(w0.values.iter().all(|z| (z - c(1.0 / 6.0)).norm() < 1e-15));
        let neg = apply_multiplier(&MultiplierSpec::Level(-1), &f).unwrap();
        assert!(neg.values.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn noise_one_is_identity() {
        let q = ModulusSet::new(vec![3, 5]).unwrap();
        let f = GroupFunction::from_fn(q, |x| Complex64::new(x[0] as f64, (x[1] * x[1]) as f64)).unwrap();
        let g = apply_multiplier(&MultiplierSpec::Noise(1.0), &f).unwrap();
        assert!(f.max_abs_diff(&g) < 1e-12);
    }

    #[test]
    fn unknown_modulus_rejected() {
        let f = GroupFunction::zeros(z6()).unwrap();
        assert_eq!(apply_multiplier(&MultiplierSpec::Average(vec![5]), &f), Err(Error::UnknownModulus(5)));
    }

    #[test]
    fn derivative_of_character_splits() {
        let q = z6();
        let xi = Frequency::from_pairs(&q, &[(2, 1), (3, 2)]).unwrap();
        let chi = GroupFunction::character(q.clone(), &xi).unwrap();
        // S = {3}, x = 1: e(2/3) · e(y/2) on Z/2.
        let d = derivative(&[3], &[1], &chi).unwrap();
        assert_eq!(d.moduli().moduli(), &[2]);
        for y in 0..2u64 {
            let expected = crate::arith::e(2.0 / 3.0) * crate::arith::e(y as f64 / 2.0);
            assert!((d.at(&[y]) - expected).norm() < 1e-14);
        }
        // S outside the support kills the character.
        let xi2 = Frequency::from_pairs(&q, &[(2, 1)]).unwrap();
        let chi2 = GroupFunction::character(q, &xi2).unwrap();
        let d2 = derivative(&[3], &[0], &chi2).unwrap();
        assert!(d2.values().iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let q = ModulusSet::new(vec![3, 4, 5]).unwrap();
        let f = GroupFunction::constant(q, c(2.5)).unwrap();
        let d = derivative(&[4, 3], &[1, 2], &f).unwrap();
        assert_eq!(d.moduli().moduli(), &[5]);
        assert!(d.values().iter().all(|z| z.norm() < 1e-14));
        let same = derivative(&[], &[], &f).unwrap();
        assert_eq!(same, f);
    }

    #[test]
    fn snapshot_round_trip() {
        let q = ModulusSet::new(vec![2, 3]).unwrap();
        let f = GroupFunction::from_fn(q, |x| Complex64::new(x[0] as f64, -(x[1] as f64))).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.starts_with("{\"moduli\":[2,3],\"values\":[[0.0,-0.0]"));
        let back: GroupFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn crt_index_matches_coordinates() {
        let q = ModulusSet::new(vec![4, 9, 5]).unwrap();
        for n in 0..180i128 {
            let idx = q.index_of_integer(n);
            let coords = q.coords_of_index(idx);
            assert_eq!(coords, vec![(n % 4) as u64, (n % 9) as u64, (n % 5) as u64]);
        }
    }
}
