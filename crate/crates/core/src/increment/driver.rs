use super::{
    coefficients_from_class_sums, extract_increment, verify_witness, BalancedFunction, ClauseTag, IncrementClause,
    IncrementWitness,
};
use crate::circle::arcs_build;
use crate::error::{Error, Result};
use crate::sets::{find_square_difference, IntegerSet};
use serde::{Deserialize, Serialize};

/// `F(X) = (log X)^{1/4} (log(3 + log X))^{-1/2}`.
pub fn f_shape(x: f64) -> f64 {
    let l = x.ln();
    l.powf(0.25) / (3.0 + l).ln().sqrt()
}

/// `(F(X), X exp(-c₀ F(X)))`.
pub fn bound_curve(x: f64, c0: f64) -> Result<(f64, f64)> {
    if x.is_nan() || x < 10.0 {
        return Err(Error::InvalidInput(format!("X = {x} below 10")));
    }
    let f = f_shape(x);
    Ok((f, x * (-c0 * f).exp()))
}

/// `(F(X) - F(e^{-h} X), h (log X)^{-3/4} (log(3 + log X))^{-1/2})` for `0 ≤ h ≤ log X`.
pub fn increment_step_check(x: f64, h: f64) -> (f64, f64) {
    let l = x.ln();
    let lhs = f_shape(x) - f_shape((-h).exp() * x);
    let rhs = h * l.powf(-0.75) / (3.0 + l).ln().sqrt();
    (lhs, rhs)
}

/// The constants `c` and `C` of the increment alternatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClauseConstants {
    pub c: f64,
    pub big_c: f64,
}

impl Default for ClauseConstants {
    fn default() -> Self {
        ClauseConstants { c: 0.01, big_c: 16.0 }
    }
}

/// Alternatives satisfied by a witness under the given constants. The alternatives (2)-(4)
/// are only offered when `α ≤ c`.
pub fn classify(w: &IncrementWitness, x: u64, k: &ClauseConstants) -> Vec<ClauseTag> {
    let alpha = w.alpha;
    if alpha <= 0.0 {
        return Vec::new();
    }
    let xf = x as f64;
    let len = w.progression.length as f64;
    let dens = w.density();
    let l = (1.0 / alpha).ln();
    let mut tags = Vec::new();
    if len >= alpha.powf(k.big_c) * xf && dens >= alpha + alpha.powf(k.big_c) {
        tags.push(ClauseTag::Star);
    }
    if alpha <= k.c {
        let doublings = (dens / alpha).log2().floor();
        if doublings >= 1.0 && len >= xf * (-k.big_c * doublings * l.powi(3)).exp() {
            tags.push(ClauseTag::C2);
        }
        if len >= xf * l.powf(-k.big_c) && dens >= alpha * (1.0 + k.c / (l * l)) {
            tags.push(ClauseTag::C3);
        }
        if doublings >= 1.0 && len >= xf * (3.0 * xf.ln()).powf(-2.0 * doublings) {
            tags.push(ClauseTag::C4);
        }
    }
    tags
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriverConfig {
    pub constants: ClauseConstants,
    /// `C₁` of the major arcs.
    pub c1: f64,
    /// Largest denominator scanned.
    pub q_cap: u64,
}

impl Default for DriverConfig {
    fn default() -> Self {
        DriverConfig { constants: ClauseConstants::default(), c1: 1.0, q_cap: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallDensityCertificate {
    pub alpha: f64,
    /// `exp(-c F(X))`.
    pub threshold: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DriverOutcome {
    Witness(IncrementWitness),
    SmallDensity(SmallDensityCertificate),
}

/// Fourier mass of `f_A` around one family `a/q + ξ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyProbe {
    pub q: u64,
    pub xi: f64,
    /// `max_a |f̂_A(a/q + ξ)| / (αX)` over `a` coprime to `q`.
    pub eta_single: f64,
    /// `Σ_a |f̂_A(a/q + ξ)|² / (αX)²`.
    pub eta_l2: f64,
}

fn probes(f: &BalancedFunction, cfg: &DriverConfig) -> Result<Vec<FrequencyProbe>> {
    let alpha = f.alpha_f64();
    let arcs = arcs_build(alpha, f.x(), cfg.c1)?;
    let ax = alpha * f.x() as f64;
    let tau = arcs.tau;
    let mut out = Vec::new();
    for q in 1..=arcs.q_max.min(cfg.q_cap) {
        for xi in [0.0, tau / 2.0, -tau / 2.0, tau, -tau] {
            let coeffs = coefficients_from_class_sums(&f.class_sums(q, xi));
            let single = coeffs
                .iter()
                .enumerate()
                .filter(|(a, _)| crate::arith::gcd(*a as u64, q) == 1)
                .map(|(_, c)| c.norm())
                .fold(0.0, f64::max);
            let l2: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
            out.push(FrequencyProbe { q, xi, eta_single: single / ax, eta_l2: l2 / (ax * ax) });
        }
    }
    Ok(out)
}

/// The Fourier mass of `f_A` at every scanned major-arc family.
pub fn frequency_profile(a: &IntegerSet, x: u64, cfg: &DriverConfig) -> Result<Vec<FrequencyProbe>> {
    let f = BalancedFunction::new(a, x)?;
    if a.is_empty() {
        return Ok(Vec::new());
    }
    probes(&f, cfg)
}

fn usable(eta: f64) -> Option<f64> {
    (eta > 1e-9).then_some(eta.min(1.0 - 1e-9))
}

/// Searches major-arc frequencies for the strongest verified increment, or certifies that the
/// density is already small.
pub fn increment_driver(a: &IntegerSet, x: u64, cfg: &DriverConfig) -> Result<DriverOutcome> {
    if x < 10 {
        return Err(Error::InvalidInput("X must be at least 10".into()));
    }
    if let Some(d) = find_square_difference(a) {
        return Err(Error::NotSquareDifferenceFree { a1: d.a1, a2: d.a2, n: d.n });
    }
    let f = BalancedFunction::new(a, x)?;
    let alpha = f.alpha_f64();
    let threshold = (-cfg.constants.c * f_shape(x as f64)).exp();
    if alpha <= threshold {
        return Ok(DriverOutcome::SmallDensity(SmallDensityCertificate { alpha, threshold, c: cfg.constants.c }));
    }
    let profile = probes(&f, cfg)?;
    let mut best: Option<IncrementWitness> = None;
    for p in &profile {
        let attempts = [
            (IncrementClause::Single, usable(p.eta_single * (1.0 - 2.0 * super::GUARD))),
            (IncrementClause::L2, usable(p.eta_l2 * (1.0 - 2.0 * super::GUARD))),
        ];
        for (clause, eta) in attempts {
            let Some(eta) = eta else { continue };
            let mut w = match extract_increment(&f, p.q, p.xi, eta, clause) {
                Ok(w) => w,
                Err(Error::PreconditionFailed { .. } | Error::SearchExhausted) => continue,
                Err(e) => return Err(e),
            };
            if !verify_witness(f.set(), x, &w) {
                continue;
            }
            w.clauses = classify(&w, x, &cfg.constants);
            if best.as_ref().is_none_or(|b| w.score() > b.score()) {
                best = Some(w);
            }
        }
    }
    best.map(DriverOutcome::Witness).ok_or(Error::NoWitnessFound { frequencies: profile.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{greedy_sequence_from, GreedyStart};

    #[test]
    fn shape_values() {
        let x = 16f64.exp();
        assert!((f_shape(x) - 2.0 / 19f64.ln().sqrt()).abs() < 1e-12);
        assert!((f_shape(x) - 1.165).abs() < 1e-3);
        let mut prev = f_shape(10.0);
        for k in 11..=120 {
            let v = f_shape(10f64.powf(k as f64 / 10.0));
            assert!(v >= prev);
            prev = v;
        }
        let (lhs, rhs) = increment_step_check(1e8, 3.0);
        assert!(lhs <= rhs);
        assert!(bound_curve(5.0, 1.0).is_err());
    }

    #[test]
    fn singleton_and_non_sdf() {
        let one = IntegerSet::new(vec![7], 100).unwrap();
        assert!(matches!(increment_driver(&one, 100, &DriverConfig::default()), Ok(DriverOutcome::SmallDensity(_))));
        let bad = IntegerSet::new(vec![3, 7, 12], 100).unwrap();
        assert!(matches!(
            increment_driver(&bad, 100, &DriverConfig::default()),
            Err(Error::NotSquareDifferenceFree { a1: 7, a2: 3, n: 2 })
        ));
    }

    #[test]
    fn greedy_set_search() {
        let x = 1000;
        let a = greedy_sequence_from(GreedyStart::One, x);
        match increment_driver(&a, x, &DriverConfig::default()).unwrap() {
            DriverOutcome::SmallDensity(c) => assert!(c.alpha <= c.threshold),
            DriverOutcome::Witness(w) => assert!(verify_witness(&a, x, &w)),
        }
        let cfg = DriverConfig { constants: ClauseConstants { c: 10.0, big_c: 16.0 }, q_cap: 30, ..Default::default() };
        match increment_driver(&a, x, &cfg).unwrap() {
            DriverOutcome::Witness(w) => {
                assert!(verify_witness(&a, x, &w));
                assert!(w.density() > a.len() as f64 / x as f64);
            }
            DriverOutcome::SmallDensity(_) => panic!("certificate not expected at c = 10"),
        }
    }
}
