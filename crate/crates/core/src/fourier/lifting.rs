use super::{apply_multiplier, ordered_point, Frequency, GroupFunction, ModulusSet, MultiplierSpec};
use crate::arith::{gcd, KahanSum};
use crate::error::{Error, Result};
use crate::sets::Progression;
use num::complex::Complex64;
use num::traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

/// Whether size hypotheses are enforced (`Strict`) or only reported (`Relaxed`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Mode {
    #[default]
    Strict,
    Relaxed,
}

fn check_lift(p: &Progression, x: u64, q: &ModulusSet, len: usize) -> Result<()> {
    if p.length == 0 {
        return Err(Error::EmptyProgression);
    }
    if len as u64 != p.length {
        return Err(Error::InvalidInput(format!("{len} values supplied for a progression of length {}", p.length)));
    }
    if !p.within(1, x) {
        return Err(Error::InvalidInput(format!("progression {p:?} leaves [1, {x}]")));
    }
    if q.product() < x as u128 {
        return Err(Error::NotInjective { product: q.product().min(u64::MAX as u128) as u64, x });
    }
    for &m in q.moduli() {
        if gcd(p.step, m) != 1 {
            return Err(Error::StepNotCoprime { step: p.step, modulus: m });
        }
    }
    Ok(())
}

/// `Ψ_{P,Q}` over any numeric type: `|P|⁻¹ |G_Q| f(x)` at `π_Q(x)`, zero elsewhere.
pub fn lift_values<T>(p: &Progression, x: u64, q: &ModulusSet, f: &[T]) -> Result<Vec<T>>
where
    T: Num + Clone + FromPrimitive,
{
    check_lift(p, x, q, f.len())?;
    let n = q.dense_size()?;
    let scale = T::from_u64(n as u64).expect("size fits") / T::from_u64(p.length).expect("length fits");
    let mut out = vec![T::zero(); n];
    for (v, n) in f.iter().zip(p.iter()) {
        out[q.index_of_integer(n as i128)] = scale.clone() * v.clone();
    }
    Ok(out)
}

pub fn lift(p: &Progression, x: u64, q: &ModulusSet, f: &[Complex64]) -> Result<GroupFunction> {
    let values = lift_values(p, x, q, f)?;
    GroupFunction::new(q.clone(), values)
}

/// `E_{x ∈ [X]} f(x) e(-ξ x)` with `f[i] = f(i + 1)`, phases reduced exactly per modulus.
pub fn lift_coefficient_direct(f: &[Complex64], q: &ModulusSet, xi: &Frequency) -> Complex64 {
    let mut re = KahanSum::default();
    let mut im = KahanSum::default();
    for (i, v) in f.iter().enumerate() {
        let n = i as u64 + 1;
        let phase: f64 =
            xi.residues.iter().zip(q.moduli()).map(|(&r, &m)| ((r % m) * (n % m) % m) as f64 / m as f64).sum();
        let z = v * crate::arith::e(-phase);
        re.add(z.re);
        im.add(z.im);
    }
    Complex64::new(re.value(), im.value()) / f.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictionReport {
    /// `η` from `(1 + η) |G_{Q'}| / |P'| = |G_Q| / (|P| |G_T|)`.
    pub eta: f64,
    /// `X^{-1/2}`.
    pub eta_bound: f64,
    pub within_bound: bool,
    /// `max |σ_{S→a} E_T Ψ f − (1 + η) Ψ' ι_* f| / max |σ_{S→a} E_T Ψ f|`.
    pub mismatch: f64,
    pub p_prime: Progression,
    /// Hypotheses that failed (always empty in strict mode).
    pub violations: Vec<String>,
}

/// Both routes around the restriction/lift square.
///
/// The square is checked on one function whose values on `P` are all nonzero. Distinct points
/// of `P'` land on distinct points of `G_{Q'}`, so a pointwise comparison is the same as checking
/// every delta function separately.
pub fn restriction_residual(
    p: &Progression,
    x: u64,
    q: &ModulusSet,
    s: &[u64],
    t: &[u64],
    a: &[u64],
    mode: Mode,
) -> Result<RestrictionReport> {
    let s_mask = q.mask_of(s)?;
    let t_mask = q.mask_of(t)?;
    if t_mask & !s_mask != 0 {
        return Err(Error::InvalidInput("T must be a subset of S".into()));
    }
    if a.len() != s.len() {
        return Err(Error::InvalidInput("a must have one coordinate per modulus of S".into()));
    }
    let xf = x as f64;
    let mut violations = Vec::new();
    if (p.length as f64) < xf.powf(0.75) {
        violations.push(format!("|P| = {} < X^(3/4) = {:.3}", p.length, xf.powf(0.75)));
    }
    if (q.product() as f64) < xf.powf(1.25) {
        violations.push(format!("prod q = {} < X^(5/4) = {:.3}", q.product(), xf.powf(1.25)));
    }
    let lhs = (q.max_modulus() as f64).powi(s.len() as i32);
    if lhs > xf.powf(0.25) {
        violations.push(format!("(max q)^|S| = {lhs} > X^(1/4) = {:.3}", xf.powf(0.25)));
    }
    if mode == Mode::Strict && !violations.is_empty() {
        return Err(Error::HypothesisViolated(violations));
    }
    let f: Vec<Complex64> = (0..p.length)
        .map(|i| Complex64::from_polar(1.0 + (i % 7) as f64 / 7.0, i as f64 * 0.618_033_988_749_895))
        .collect();

    let g = lift(p, x, q, &f)?;
    let avg = apply_multiplier(&MultiplierSpec::Average(t.to_vec()), &g)?;
    let path1 = avg.specialize(s_mask, &ordered_point(q, s, a)?);

    // P' = {y ∈ P : y ≡ a_q mod q for q ∈ S \ T}.
    let cut: Vec<(u64, u64)> = s.iter().zip(a).filter(|(m, _)| !t.contains(m)).map(|(&m, &r)| (m, r % m)).collect();
    let modulus: u64 = cut.iter().map(|&(m, _)| m).product();
    let keep: Vec<usize> = (0..p.length as usize)
        .filter(|&i| {
            let y = p.start + i as u64 * p.step;
            cut.iter().all(|&(m, r)| y % m == r)
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::InvalidInput("P' is empty for this residue".into()));
    }
    let p_prime = Progression::new(p.start + keep[0] as u64 * p.step, p.step * modulus, keep.len() as u64)?;
    let q_prime = q.complement(s_mask);
    let f_prime: Vec<Complex64> = keep.iter().map(|&i| f[i]).collect();
    let path2 = lift(&p_prime, x, &q_prime, &f_prime)?;

    let g_q = q.product() as f64;
    let g_t: f64 = t.iter().map(|&m| m as f64).product();
    let g_qp = q_prime.product() as f64;
    let one_plus_eta = g_q * p_prime.length as f64 / (p.length as f64 * g_t * g_qp);
    let scale = path1.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mismatch =
        path1.values().iter().zip(path2.values()).map(|(u, v)| (u - v * one_plus_eta).norm()).fold(0.0, f64::max)
            / scale;
    let eta = one_plus_eta - 1.0;
    let eta_bound = xf.powf(-0.5);
    Ok(RestrictionReport { eta, eta_bound, within_bound: eta.abs() <= eta_bound, mismatch, p_prime, violations })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lem32Report {
    /// `E_Γ |W_d g|^{2m}`.
    pub lhs: f64,
    /// `E_G |W_d g|^{2m} + α^{2m} X^{-1/4}`.
    pub rhs: f64,
    /// `α^{2m} X^{-1/4}`.
    pub slack: f64,
    pub alpha: f64,
    pub holds: bool,
    pub violations: Vec<String>,
}

/// Compares the level-`d` moment on the image `Γ` of `P` with its average over `G_Q`.
pub fn lem32_compare(
    f: &[Complex64],
    p: &Progression,
    x: u64,
    q: &ModulusSet,
    d: u32,
    m: u32,
    mode: Mode,
) -> Result<Lem32Report> {
    if m == 0 {
        return Err(Error::InvalidInput("m must be at least 1".into()));
    }
    let xf = x as f64;
    let mut violations = Vec::new();
    let lhs_h = (q.max_modulus() as f64).powi((d * m) as i32);
    if lhs_h > xf.powf(1.0 / 16.0) {
        violations.push(format!("(max q)^(dm) = {lhs_h} > X^(1/16) = {:.4}", xf.powf(1.0 / 16.0)));
    }
    if (p.length as f64) < xf.powf(0.75) {
        violations.push(format!("|P| = {} < X^(3/4) = {:.3}", p.length, xf.powf(0.75)));
    }
    if mode == Mode::Strict && !violations.is_empty() {
        return Err(Error::HypothesisViolated(violations));
    }
    let g = lift(p, x, q, f)?;
    let w = apply_multiplier(&MultiplierSpec::Level(d as i64), &g)?;
    let e = 2.0 * m as f64;
    let on_gamma: f64 =
        p.iter().map(|n| w.values()[q.index_of_integer(n as i128)].norm().powf(e)).sum::<f64>() / p.length as f64;
    let on_group = w.norm_p_pow(e);
    let alpha = f.iter().map(|z| z.norm()).sum::<f64>() / f.len() as f64;
    let slack = alpha.powf(e) * xf.powf(-0.25);
    let rhs = on_group + slack;
    Ok(Lem32Report { lhs: on_gamma, rhs, slack, alpha, holds: on_gamma <= rhs * (1.0 + 1e-12), violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::forward;
    use num::rational::Ratio;

    #[test]
    fn lift_of_one_has_mean_one() {
        let q = ModulusSet::new(vec![5, 7]).unwrap();
        let p = Progression::interval(20);
        let g = lift(&p, 20, &q, &vec![Complex64::new(1.0, 0.0); 20]).unwrap();
        assert!((g.mean() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn mean_exact_in_rationals() {
        let q = ModulusSet::new(vec![4, 9, 5]).unwrap();
        let p = Progression::new(3, 7, 25).unwrap();
        let f: Vec<Ratio<i64>> = (0..25).map(|i| Ratio::new(i * i - 7, 3 + i)).collect();
        let g = lift_values(&p, 180, &q, &f).unwrap();
        let lifted_mean = g.iter().cloned().sum::<Ratio<i64>>() / Ratio::from_integer(180);
        let mean = f.iter().cloned().sum::<Ratio<i64>>() / Ratio::from_integer(25);
        assert_eq!(lifted_mean, mean);
    }

    #[test]
    fn delta_lifts_to_scaled_delta() {
        let q = ModulusSet::new(vec![5, 7]).unwrap();
        let p = Progression::interval(20);
        let mut f = vec![Complex64::new(0.0, 0.0); 20];
        f[12] = Complex64::new(1.0, 0.0);
        let g = lift(&p, 20, &q, &f).unwrap();
        let idx = q.index_of_integer(13);
        assert!((g.values()[idx].re - 35.0 / 20.0).abs() < 1e-15);
        assert_eq!(g.values().iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn lift_errors() {
        let q = ModulusSet::new(vec![3, 5]).unwrap();
        let p = Progression::interval(20);
        let f = vec![Complex64::new(1.0, 0.0); 20];
        assert!(matches!(lift(&p, 20, &q, &f), Err(Error::NotInjective { .. })));
        let q = ModulusSet::new(vec![5, 7]).unwrap();
        let p = Progression::new(1, 5, 4).unwrap();
        assert!(matches!(lift(&p, 20, &q, &f[..4]), Err(Error::StepNotCoprime { step: 5, modulus: 5 })));
    }

    #[test]
    fn lift_coefficients_match_interval_sums() {
        let q = ModulusSet::new(vec![5, 7]).unwrap();
        let f: Vec<Complex64> = (1..=20).map(|n| Complex64::new((n * n % 11) as f64, n as f64 / 3.0)).collect();
        let spec = forward(&lift(&Progression::interval(20), 20, &q, &f).unwrap());
        for i in 0..35 {
            let xi = Frequency { residues: q.coords_of_index(i) };
            let direct = lift_coefficient_direct(&f, &q, &xi);
            assert!((spec.coeffs[i] - direct).norm() <= 1e-12 * direct.norm().max(1.0));
        }
    }

    #[test]
    fn trivial_restriction_has_zero_eta() {
        let q = ModulusSet::new(vec![3, 5, 7, 11]).unwrap();
        let rep = restriction_residual(&Progression::interval(100), 100, &q, &[], &[], &[], Mode::Relaxed).unwrap();
        assert_eq!(rep.eta, 0.0);
        assert!(rep.mismatch < 1e-12);
    }

    #[test]
    fn full_average_restriction() {
        let q = ModulusSet::new(vec![3, 5, 7, 11]).unwrap();
        let p = Progression::interval(100);
        // T = S: P' = P and η = 0.
        let rep = restriction_residual(&p, 100, &q, &[3], &[3], &[2], Mode::Relaxed).unwrap();
        assert!(rep.eta.abs() < 1e-15 && rep.mismatch < 1e-12);
        assert_eq!(rep.p_prime, p);
        // T = ∅: η = |G_S| |P'| / |P| − 1 with |P'| = #{n ≤ 100 : n ≡ 2 mod 3} = 33.
        let rep = restriction_residual(&p, 100, &q, &[3], &[], &[2], Mode::Relaxed).unwrap();
        assert!((rep.eta - (3.0 * 33.0 / 100.0 - 1.0)).abs() < 1e-15);
        assert!(rep.mismatch < 1e-12);
        assert!(!rep.violations.is_empty());
        assert!(matches!(
            restriction_residual(&p, 100, &q, &[3], &[], &[2], Mode::Strict),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn lem32_level_zero_matches_mean() {
        let q = ModulusSet::new(vec![3, 5, 7]).unwrap();
        let p = Progression::interval(50);
        let f: Vec<Complex64> = (0..50).map(|i| Complex64::new(if i % 3 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
        let rep = lem32_compare(&f, &p, 50, &q, 0, 2, Mode::Relaxed).unwrap();
        let mean = f.iter().sum::<Complex64>().norm() / 50.0;
        assert!((rep.lhs - mean.powi(4)).abs() < 1e-12);
        assert!((rep.rhs - rep.slack - mean.powi(4)).abs() < 1e-12);
        assert!(rep.holds);
    }
}
