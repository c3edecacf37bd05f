use super::SquareWeight;
use crate::arith::{gcd, KahanSum};
use crate::error::{Error, Result};
use crate::fourier::Mode;
use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

fn dist_to_int(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    r.min(1.0 - r)
}

/// The last continued-fraction convergent `a/q` of `θ mod 1` with `q ≤ qcap`; then
/// `|θ - a/q| ≤ 1/(q·qcap)`. The expansion runs on the exact binary value of `θ`.
pub fn rational_approx(theta: f64, qcap: u64) -> Result<(u64, u64)> {
    if qcap == 0 {
        return Err(Error::InvalidInput("Qcap must be at least 1".into()));
    }
    let reduced = theta.rem_euclid(1.0);
    let mut x = BigRational::from_float(reduced)
        .ok_or_else(|| Error::InvalidInput(format!("theta = {theta} is not finite")))?;
    // θ ∈ [0, 1): the zeroth convergent is 0/1.
    let (mut p0, mut q0, mut p1, mut q1) = (1u128, 0u128, 0u128, 1u128);
    loop {
        if x.is_zero() {
            break;
        }
        x = x.recip();
        let term = x.floor();
        x -= &term;
        let k = term.to_integer().to_u128().unwrap_or(u128::MAX);
        let q2 = k.saturating_mul(q1).saturating_add(q0);
        if q2 > qcap as u128 {
            break;
        }
        let p2 = k * p1 + p0;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    Ok((p1 as u64, q1 as u64))
}

/// Exact check of `|θ - a/q| ≤ 1/(q·qcap)` for `θ` reduced mod 1.
pub fn dirichlet_holds(theta: f64, a: u64, q: u64, qcap: u64) -> bool {
    let Some(t) = BigRational::from_float(theta.rem_euclid(1.0)) else {
        return false;
    };
    let diff = (t - BigRational::new(BigInt::from(a), BigInt::from(q))).abs();
    diff <= BigRational::new(BigInt::one(), BigInt::from(q as u128 * qcap as u128))
}

/// `E_{x ∈ [X]} e(θx²)`.
pub fn weyl_sum(theta: f64, x: u64) -> Complex64 {
    let theta = theta.rem_euclid(1.0);
    let (mut re, mut im) = (KahanSum::default(), KahanSum::default());
    for n in 1..=x {
        let nf = n as f64;
        let phase = TAU * (theta * nf * nf).rem_euclid(1.0);
        re.add(phase.cos());
        im.add(phase.sin());
    }
    Complex64::new(re.value(), im.value()) / x as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylLocation {
    pub a: u64,
    pub q: u64,
    /// `‖qθ‖`.
    pub dist: f64,
    /// `|E_{x ∈ [X]} e(θx²)|`.
    pub measured: f64,
    pub qcap: u64,
    /// `(log X)² δ⁻²`.
    pub q_bound: f64,
    /// `(log X)² δ⁻² X⁻²`.
    pub dist_bound: f64,
    /// Smallest `C` with `q ≤ C·q_bound` and `‖qθ‖ ≤ C·dist_bound`.
    pub c_fit: f64,
    pub pass: bool,
}

/// Locates a small `q` with `qθ` near an integer when the quadratic Weyl sum is at least `δ`.
/// `c` scales the Dirichlet cutoff `Qcap = ⌈c (δ / log X)² X²⌉`.
pub fn weyl_locate(theta: f64, delta: f64, x: u64, c: f64) -> Result<WeylLocation> {
    if x < 2 {
        return Err(Error::InvalidInput("X must be at least 2".into()));
    }
    let xf = x as f64;
    if !(delta >= xf.powf(-1.0 / 3.0) && delta <= 1.0) {
        return Err(Error::InvalidInput(format!("delta = {delta} outside [X^(-1/3), 1]")));
    }
    let measured = weyl_sum(theta, x).norm();
    if measured < delta {
        return Err(Error::PreconditionFailed { measured, required: delta });
    }
    let l = xf.ln();
    let qcap = (c * (delta / l).powi(2) * xf * xf).ceil().max(1.0) as u64;
    let (a, q) = rational_approx(theta, qcap)?;
    let dist = dist_to_int(q as f64 * theta.rem_euclid(1.0));
    let q_bound = l * l / (delta * delta);
    let dist_bound = q_bound / (xf * xf);
    let c_fit = (q as f64 / q_bound).max(dist / dist_bound);
    Ok(WeylLocation { a, q, dist, measured, qcap, q_bound, dist_bound, c_fit, pass: c_fit <= 1.0 })
}

/// Adjacent arc centers closer than `2τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapWarning {
    pub left: (u64, u64),
    pub right: (u64, u64),
    pub gap: f64,
    pub two_tau: f64,
}

/// Arcs `|θ - a/q| ≤ τ` around all reduced `a/q` with `q ≤ C₁α⁻²`, `τ = C₁ log(1/α)² / X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcDecomposition {
    pub alpha: f64,
    pub x: u64,
    pub c1: f64,
    pub tau: f64,
    pub q_max: u64,
    pub overlap: Option<OverlapWarning>,
}

impl ArcDecomposition {
    /// Centers `(a, q)` with `0 ≤ a < q`, `gcd(a, q) = 1`, ordered by `q` then `a`.
    pub fn arcs(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        (1..=self.q_max).flat_map(|q| (0..q).filter(move |&a| gcd(a, q) == 1).map(move |a| (a, q)))
    }

    pub fn arc_count(&self) -> u64 {
        self.arcs().count() as u64
    }

    /// The arc of smallest denominator containing `θ`, if any.
    pub fn containing(&self, theta: f64) -> Option<(u64, u64)> {
        let theta = theta.rem_euclid(1.0);
        for q in 1..=self.q_max {
            let qt = q as f64 * theta;
            let a = qt.round();
            if (qt - a).abs() <= q as f64 * self.tau {
                let a = (a as u64) % q;
                if gcd(a, q) == 1 {
                    return Some((a, q));
                }
            }
        }
        None
    }
}

pub fn arcs_build(alpha: f64, x: u64, c1: f64) -> Result<ArcDecomposition> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha = {alpha} outside (0, 1)")));
    }
    if x < 10 || c1 <= 0.0 {
        return Err(Error::InvalidInput("need X >= 10 and C1 > 0".into()));
    }
    let l = (1.0 / alpha).ln();
    let tau = c1 * l * l / x as f64;
    let q_max = (c1 / (alpha * alpha) * (1.0 + 1e-12)).floor().max(1.0) as u64;
    // The closest neighbouring Farey fractions of order Q are 1/Q and 1/(Q-1).
    let overlap = if q_max >= 2 {
        let gap = 1.0 / (q_max as f64 * (q_max - 1) as f64);
        (gap < 2.0 * tau).then_some(OverlapWarning { left: (1, q_max), right: (1, q_max - 1), gap, two_tau: 2.0 * tau })
    } else {
        None
    };
    Ok(ArcDecomposition { alpha, x, c1, tau, q_max, overlap })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorArcReport {
    pub sup: f64,
    pub argmax: f64,
    /// `2⁻⁹ αX`.
    pub bound: f64,
    /// `sup / (αX)`.
    pub ratio: f64,
    pub pass: bool,
    pub samples: u64,
    pub minor_samples: u64,
    pub step: f64,
}

/// Largest `|ĝ(θ)|` on a grid of step `τ / grid_density` over `[0, 1/2]`, skipping major arcs.
pub fn minor_arc_sup(alpha: f64, x: u64, c1: f64, grid_density: f64) -> Result<MinorArcReport> {
    if grid_density < 4.0 {
        return Err(Error::InvalidInput(format!("grid density {grid_density} below 4 points per arc radius")));
    }
    let arcs = arcs_build(alpha, x, c1)?;
    let g = SquareWeight::new(x)?;
    let step = arcs.tau / grid_density;
    let n = (0.5 / step).floor() as u64 + 1;
    let (best, minor) = (0..n)
        .into_par_iter()
        .filter_map(|k| {
            let theta = k as f64 * step;
            arcs.containing(theta).is_none().then(|| (g.spectrum(theta).abs(), theta))
        })
        .fold(
            || ((f64::NEG_INFINITY, 0.0), 0u64),
            |(b, c), v| (if v.0 > b.0 || (v.0 == b.0 && v.1 < b.1) { v } else { b }, c + 1),
        )
        .reduce(
            || ((f64::NEG_INFINITY, 0.0), 0u64),
            |(b1, c1), (b2, c2)| (if b2.0 > b1.0 || (b2.0 == b1.0 && b2.1 < b1.1) { b2 } else { b1 }, c1 + c2),
        );
    let ax = alpha * x as f64;
    let bound = ax / 512.0;
    let sup = if minor == 0 { 0.0 } else { best.0 };
    Ok(MinorArcReport {
        sup,
        argmax: best.1,
        bound,
        ratio: sup / ax,
        pass: sup <= bound,
        samples: n,
        minor_samples: minor,
        step,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorArcReport {
    pub value: f64,
    /// `X q^{-1/2} e^{-√|θX|} + X^{3/4}`.
    pub envelope: f64,
    pub ratio: f64,
    pub in_regime: bool,
    pub violations: Vec<String>,
}

/// `|ĝ(a/q + θ)|` against the major-arc envelope.
pub fn major_arc_bound_check(a: u64, q: u64, theta: f64, x: u64, mode: Mode) -> Result<MajorArcReport> {
    if q == 0 {
        return Err(Error::InvalidInput("q must be at least 1".into()));
    }
    let xf = x as f64;
    let mut violations = Vec::new();
    if gcd(a, q) != 1 {
        violations.push(format!("gcd({a}, {q}) != 1"));
    }
    if q as f64 > xf.powf(0.125) {
        violations.push(format!("q = {q} > X^(1/8) = {:.4}", xf.powf(0.125)));
    }
    if theta.abs() > xf.powf(-0.875) {
        violations.push(format!("|theta| = {theta:e} > X^(-7/8) = {:e}", xf.powf(-0.875)));
    }
    if mode == Mode::Strict && !violations.is_empty() {
        return Err(Error::HypothesisViolated(violations));
    }
    let value = SquareWeight::new(x)?.spectrum_at(a, q, theta).abs();
    let envelope = xf / (q as f64).sqrt() * (-(theta * xf).abs().sqrt()).exp() + xf.powf(0.75);
    Ok(MajorArcReport { value, envelope, ratio: value / envelope, in_regime: violations.is_empty(), violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convergents() {
        assert_eq!(rational_approx(0.5, 10).unwrap(), (1, 2));
        assert_eq!(rational_approx(0.333334, 100).unwrap(), (1, 3));
        assert_eq!(rational_approx(std::f64::consts::PI - 3.0, 200).unwrap(), (16, 113));
        assert_eq!(rational_approx(0.0, 7).unwrap(), (0, 1));
        assert_eq!(rational_approx(0.999_999, 10).unwrap(), (1, 1));
        for (t, cap) in [(0.1234567, 50), (std::f64::consts::FRAC_1_SQRT_2, 1000), (0.5, 1), (1e-9, 100)] {
            let (a, q) = rational_approx(t, cap).unwrap();
            assert!(q <= cap && gcd(a, q) == 1 && dirichlet_holds(t, a, q, cap));
        }
    }

    #[test]
    fn weyl_examples() {
        let loc = weyl_locate(0.25 + 1e-8, 0.5, 1000, 1.0).unwrap();
        assert!((loc.measured - 0.5f64.sqrt()).abs() < 1e-3);
        assert!([1, 2, 4].contains(&loc.q) && loc.dist < 1e-6 && loc.pass);
        let loc = weyl_locate(0.0, 1.0, 1000, 1.0).unwrap();
        assert_eq!((loc.q, loc.dist), (1, 0.0));
        let loc = weyl_locate(1.0 / 3.0, 0.5, 500, 1.0).unwrap();
        assert_eq!(loc.q, 3);
        assert!(matches!(weyl_locate(0.5, 0.5, 1000, 1.0), Err(Error::PreconditionFailed { .. })));
    }

    #[test]
    fn arcs_formula_and_membership() {
        let arcs = arcs_build(0.1, 10_000, 1.0).unwrap();
        assert!((arcs.tau - 10f64.ln().powi(2) * 1e-4).abs() < 1e-15);
        assert!((arcs.tau - 5.302e-4).abs() < 1e-6);
        assert_eq!(arcs.q_max, 100);
        assert_eq!(arcs.containing(3.0 / 7.0), Some((3, 7)));
        assert_eq!(arcs.containing(0.0), Some((0, 1)));
        assert!(arcs.overlap.is_some());
        let wide = arcs_build(0.3, 1_000_000, 1.0).unwrap();
        assert!(wide.overlap.is_none());
        assert_eq!(wide.arc_count(), 1 + 1 + 2 + 2 + 4 + 2 + 6 + 4 + 6 + 4 + 10);
    }

    #[test]
    fn minor_arcs_small() {
        let rep = minor_arc_sup(0.3, 10_000, 1.0, 4.0).unwrap();
        assert!(rep.minor_samples > 0 && rep.sup > 0.0);
        assert!(rep.argmax >= 0.0 && rep.argmax <= 0.5);
        assert!(minor_arc_sup(0.3, 10_000, 1.0, 2.0).is_err());
    }

    #[test]
    fn major_arc_center() {
        let rep = major_arc_bound_check(0, 1, 0.0, 10_000, Mode::Strict).unwrap();
        assert!(rep.ratio < 1.0 && rep.in_regime);
        assert!(matches!(major_arc_bound_check(1, 5, 0.0, 10_000, Mode::Strict), Err(Error::HypothesisViolated(_))));
        let rep = major_arc_bound_check(1, 5, 0.0, 10_000, Mode::Relaxed).unwrap();
        assert!(!rep.in_regime && rep.value > 0.0);
    }
}
