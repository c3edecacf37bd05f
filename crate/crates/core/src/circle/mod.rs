//! The smooth square weight, its exponential sums, and major/minor arc tools.

mod arcs;
mod quad;

pub use arcs::{
    arcs_build, dirichlet_holds, major_arc_bound_check, minor_arc_sup, rational_approx, weyl_locate, weyl_sum,
    ArcDecomposition, MajorArcReport, MinorArcReport, OverlapWarning, WeylLocation,
};

use crate::arith::{e_frac, is_prime};
use crate::error::{Error, Result};
use num::complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI, TAU};

/// Below this frequency `ŵ` is integrated on the real line; above it, along a steepest-descent contour.
pub const CONTOUR_THRESHOLD: f64 = 2.0;

/// `w(x) = exp(1 - 1/(1 - x²))` on `(-1, 1)`, zero elsewhere.
pub fn bump_eval(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

/// `w` continued analytically: `exp(1 - 1/(1 - z²) - 2πitz)`, the integrand of `ŵ(t)`.
fn bump_wave(z: Complex64, t: f64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    (one - one / (one - z * z) - Complex64::new(0.0, TAU * t) * z).exp()
}

/// `ŵ(t) = ∫ w(x) e(-tx) dx`, by quadrature on the real line.
pub fn bump_fourier_real(t: f64) -> f64 {
    let t = t.abs();
    let v = quad::integrate(&|x| Complex64::new(bump_eval(x) * (TAU * t * x).cos(), 0.0), 0.0, 1.0, 1e-15);
    2.0 * v.re
}

/// `ŵ(t)` for `t > 0` along a contour through the saddle point of the integrand near `x = 1`.
///
/// With `u = 1 - x` the phase is roughly `-1/(2u) + 2πitu`, stationary at
/// `u* = e^{iπ/4} / (2√(πt))` where the integrand has size `e^{-√(2πt)}`. The path runs
/// `0 → -iH → 1 - c - iH → 1 - u* → 1` with `c = Re u*`. The first leg contributes a purely
/// imaginary amount and `ŵ` is twice the real part of the half-line integral, so it is skipped.
pub fn bump_fourier_contour(t: f64) -> f64 {
    let t = t.abs();
    assert!(t > 0.0, "contour route needs t > 0");
    let rho = 1.0 / (2.0 * (PI * t).sqrt());
    let us = Complex64::from_polar(rho, FRAC_PI_4);
    let scale = (-(TAU * t).sqrt()).exp();
    let h = ((TAU * t).sqrt() + 40.0) / (TAU * t);
    let h = h.max(2.0 * rho);
    let f = |z: Complex64| bump_wave(z, t);
    let tol = 1e-15 * scale;
    let one = Complex64::new(1.0, 0.0);
    let p1 = Complex64::new(0.0, -h);
    let p2 = Complex64::new(1.0 - us.re, -h);
    let p3 = one - us;
    let total = quad::segment(&f, p1, p2, tol) + quad::segment(&f, p2, p3, tol) + quad::segment(&f, p3, one, tol);
    2.0 * total.re
}

/// `ŵ(t)`, choosing the quadrature route by the size of `|t|`.
pub fn bump_fourier(t: f64) -> f64 {
    if t.abs() <= CONTOUR_THRESHOLD {
        bump_fourier_real(t)
    } else {
        bump_fourier_contour(t)
    }
}

/// Least-squares slope of `log|ŵ(t)|` against `√t` over `samples` points with `√t` evenly spaced.
pub fn bump_decay_slope(t_lo: f64, t_hi: f64, samples: usize) -> f64 {
    let (a, b) = (t_lo.sqrt(), t_hi.sqrt());
    let mut xs = Vec::with_capacity(samples);
    let mut ys = Vec::with_capacity(samples);
    for i in 0..samples {
        let s = a + (b - a) * i as f64 / (samples - 1).max(1) as f64;
        let v = bump_fourier(s * s).abs();
        if v > 0.0 {
            xs.push(s);
            ys.push(v.ln());
        }
    }
    crate::arith::linear_fit(&xs, &ys).0
}

/// `g(±t²) = t w(t²/X)` for `t ≥ 1`, zero at non-squares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareWeight {
    x: u64,
    /// `t w(t²/X)` for `t = 1, 2, …` while `t² < X`.
    terms: Vec<f64>,
}

impl SquareWeight {
    pub fn new(x: u64) -> Result<Self> {
        if x == 0 {
            return Err(Error::InvalidInput("X must be at least 1".into()));
        }
        let terms =
            (1u64..).take_while(|t| t * t < x).map(|t| t as f64 * bump_eval((t * t) as f64 / x as f64)).collect();
        Ok(SquareWeight { x, terms })
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn eval(&self, n: i64) -> f64 {
        let m = n.unsigned_abs();
        match crate::arith::square_root_exact(m) {
            Some(t) if t >= 1 && (t as usize) <= self.terms.len() => self.terms[t as usize - 1],
            _ => 0.0,
        }
    }

    /// `ĝ(θ) = 2 Σ_t t w(t²/X) cos(2πθt²)`.
    pub fn spectrum(&self, theta: f64) -> f64 {
        let theta = theta.rem_euclid(1.0);
        let mut acc = 0.0;
        for (i, &c) in self.terms.iter().enumerate() {
            let t = (i + 1) as f64;
            acc += c * (TAU * (theta * t * t).rem_euclid(1.0)).cos();
        }
        2.0 * acc
    }

    /// `ĝ(a/q + θ)` with the rational part of the phase reduced exactly.
    pub fn spectrum_at(&self, a: u64, q: u64, theta: f64) -> f64 {
        let mut acc = 0.0;
        for (i, &c) in self.terms.iter().enumerate() {
            let t = (i + 1) as u128;
            let r = ((a as u128 % q as u128) * (t * t % q as u128) % q as u128) as f64 / q as f64;
            let tf = t as f64;
            acc += c * (TAU * (r + (theta * tf * tf).rem_euclid(1.0))).cos();
        }
        2.0 * acc
    }
}

/// `ĝ_{X,□}(θ)` by direct summation.
pub fn square_weight_spectrum(theta: f64, x: u64) -> Result<f64> {
    Ok(SquareWeight::new(x)?.spectrum(theta))
}

/// `Σ_{b mod q} e(-a b² / q)`.
pub fn gauss_sum(a: i64, q: u64) -> Result<Complex64> {
    if q == 0 {
        return Err(Error::InvalidInput("q must be at least 1".into()));
    }
    let a = a.rem_euclid(q as i64) as u128;
    let mut acc = Complex64::new(0.0, 0.0);
    for b in 0..q as u128 {
        acc += e_frac(-((a * (b * b % q as u128) % q as u128) as i128), q);
    }
    Ok(acc)
}

/// `1̂_□(s) = (1/p) Σ_{x ∈ □_p} e(-sx/p)` over the squares mod `p` (zero included),
/// as `(direct, via the Gauss sum (1 + G(s))/(2p))`.
pub fn square_indicator_fourier(s: i64, p: u64) -> Result<(Complex64, Complex64)> {
    if p == 2 || !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let mut seen = vec![false; p as usize];
    for b in 0..p {
        seen[(b * b % p) as usize] = true;
    }
    let s_mod = s.rem_euclid(p as i64) as u128;
    let mut direct = Complex64::new(0.0, 0.0);
    for (x, _) in seen.iter().enumerate().filter(|(_, &v)| v) {
        direct += e_frac(-((s_mod * x as u128 % p as u128) as i128), p);
    }
    direct /= p as f64;
    let via_gauss = if s_mod == 0 {
        Complex64::new((p + 1) as f64 / (2 * p) as f64, 0.0)
    } else {
        (gauss_sum(s, p)? + 1.0) / (2 * p) as f64
    };
    Ok((direct, via_gauss))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        assert_eq!(bump_eval(2.0), 0.0);
        assert_eq!(bump_eval(-1.0), 0.0);
        assert_eq!(bump_eval(0.0), 1.0);
        assert!(bump_eval(0.5) >= 0.5);
        assert!((bump_eval(0.5) - (-1.0f64 / 3.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn bump_mass_matches_plain_quadrature() {
        // Composite Simpson on a fine grid as an independent check of ŵ(0).
        let n = 200_000;
        let h = 2.0 / n as f64;
        let mut s = bump_eval(-1.0) + bump_eval(1.0);
        for i in 1..n {
            s += bump_eval(-1.0 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let simpson = s * h / 3.0;
        assert!((bump_fourier(0.0) - simpson).abs() < 1e-10);
        assert!(bump_fourier(0.0) > 0.0);
    }

    #[test]
    fn contour_and_real_routes_agree() {
        for t in [0.7, 1.0, 2.5, 5.0, 10.0, 20.0, 40.0] {
            let a = bump_fourier_real(t);
            let b = bump_fourier_contour(t);
            assert!((a - b).abs() < 1e-12, "t = {t}: {a} vs {b}");
        }
    }

    #[test]
    fn decay_is_stretched_exponential() {
        let slope = bump_decay_slope(1.0, 1e4, 120);
        assert!(slope < -0.5, "slope {slope}");
        let v = bump_fourier(1e4).abs();
        assert!(v > 0.0 && v < (-200.0f64).exp());
    }

    #[test]
    fn spectrum_matches_definition() {
        let x = 500;
        let g = SquareWeight::new(x).unwrap();
        for theta in [0.0, 0.1234, 0.5, 0.77] {
            let mut direct = Complex64::new(0.0, 0.0);
            for n in -(x as i64)..=(x as i64) {
                direct += crate::arith::e(-theta * n as f64) * g.eval(n);
            }
            let s = g.spectrum(theta);
            assert!(direct.im.abs() < 1e-9 * direct.norm().max(1.0));
            assert!((direct.re - s).abs() < 1e-9 * s.abs().max(1.0));
            assert!((g.spectrum(-theta) - s).abs() < 1e-9 * s.abs().max(1.0));
        }
        let half: f64 = g.terms.iter().enumerate().map(|(i, c)| if i % 2 == 0 { -c } else { *c }).sum();
        assert!((g.spectrum(0.5) - 2.0 * half).abs() < 1e-9);
        assert!((g.spectrum_at(1, 3, 0.01) - g.spectrum(1.0 / 3.0 + 0.01)).abs() < 1e-8);
    }

    #[test]
    fn gauss_sums() {
        assert_eq!(gauss_sum(5, 1).unwrap(), Complex64::new(1.0, 0.0));
        assert!((gauss_sum(1, 7).unwrap().norm() - 7f64.sqrt()).abs() < 1e-9);
        let (d, g) = square_indicator_fourier(2, 5).unwrap();
        let expect = (1.0 - 5f64.sqrt()) / 10.0;
        assert!((d.re - expect).abs() < 1e-12 && (g.re - expect).abs() < 1e-12);
        assert!(matches!(square_indicator_fourier(1, 9), Err(Error::NotPrime(9))));
    }
}
