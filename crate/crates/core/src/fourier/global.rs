use super::{apply_axis_multiplier, apply_multiplier, GroupFunction, MultiplierSpec};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// `C₀ = 2¹²`.
pub const C0: f64 = 4096.0;

/// `(max |G_Q|, max |Q|)` for exhaustive `(S, x)` enumeration.
pub const GLOBALNESS_ENUMERATION_CAP: (usize, usize) = (10_000, 6);

/// Relative slack on derivative norms, absorbing rounding in the transforms.
const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalnessParams {
    pub r: f64,
    pub gamma: f64,
}

/// `r_d(α) = (d / log(1/α))^{1/2}`, `γ_d(α) = (C₀ log(1/α) / d)^{d/2} α`, `γ₀ = α`.
pub fn global_params(alpha: f64, d: u32) -> Result<GlobalnessParams> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha = {alpha} outside (0, 1)")));
    }
    let l = (1.0 / alpha).ln();
    if d == 0 {
        return Ok(GlobalnessParams { r: 0.0, gamma: alpha });
    }
    let d = d as f64;
    Ok(GlobalnessParams { r: (d / l).sqrt(), gamma: (C0 * l / d).powf(d / 2.0) * alpha })
}

/// Norms `‖D_{S,x} f‖₂` for one subset `S`, indexed by `x ∈ G_S` in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeProfile {
    pub mask: u32,
    pub subset: Vec<u64>,
    pub norms: Vec<f64>,
}

pub fn derivative_norm_profile(f: &GroupFunction) -> Result<Vec<DerivativeProfile>> {
    let q = f.moduli();
    let (max_size, max_len) = GLOBALNESS_ENUMERATION_CAP;
    if f.len() > max_size {
        return Err(Error::CapExceeded { x: f.len() as u64, cap: max_size as u64 });
    }
    if q.len() > max_len {
        return Err(Error::CapExceeded { x: q.len() as u64, cap: max_len as u64 });
    }
    let strides = q.strides();
    let mut out = Vec::with_capacity(1 << q.len());
    for mask in 0u32..(1 << q.len()) {
        let l = apply_axis_multiplier(f, mask, false);
        let axes: Vec<usize> = (0..q.len()).filter(|k| mask >> k & 1 == 1).collect();
        let g_s: usize = axes.iter().map(|&k| q.moduli()[k] as usize).product();
        let mut sums = vec![0.0f64; g_s];
        for (i, v) in l.values().iter().enumerate() {
            let mut j = 0usize;
            for &k in &axes {
                let m = q.moduli()[k] as usize;
                j = j * m + (i / strides[k]) % m;
            }
            sums[j] += v.norm_sqr();
        }
        let rest = (f.len() / g_s) as f64;
        out.push(DerivativeProfile {
            mask,
            subset: q.moduli_in(mask),
            norms: sums.into_iter().map(|s| (s / rest).sqrt()).collect(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeWitness {
    pub subset: Vec<u64>,
    /// Coordinates of `x ∈ G_S`, aligned with `subset`.
    pub point: Vec<u64>,
    pub norm: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalnessReport {
    pub global: bool,
    /// The `(S, x)` maximizing `‖D_{S,x} f‖₂ − r^{|S|} γ`.
    pub worst: DerivativeWitness,
    pub checked: usize,
}

fn point_coords(subset: &[u64], mut j: usize) -> Vec<u64> {
    let mut c = vec![0u64; subset.len()];
    for k in (0..subset.len()).rev() {
        let m = subset[k] as usize;
        c[k] = (j % m) as u64;
        j /= m;
    }
    c
}

/// Checks `‖D_{S,x} f‖₂ ≤ r^{|S|} γ` for every `S ⊆ Q`, `x ∈ G_S` (`r⁰ = 1`).
pub fn globalness_check(f: &GroupFunction, r: f64, gamma: f64) -> Result<GlobalnessReport> {
    if r < 0.0 || gamma < 0.0 {
        return Err(Error::InvalidInput("r and gamma must be non-negative".into()));
    }
    let profile = derivative_norm_profile(f)?;
    let tol = NORM_TOL * f.norm2();
    let mut worst: Option<DerivativeWitness> = None;
    let mut global = true;
    let mut checked = 0;
    for p in &profile {
        let bound = if p.subset.is_empty() { gamma } else { r.powi(p.subset.len() as i32) * gamma };
        for (j, &norm) in p.norms.iter().enumerate() {
            checked += 1;
            if norm > bound + tol {
                global = false;
            }
            let better = match &worst {
                None => true,
                Some(w) => norm - bound > w.norm - w.bound,
            };
            if better {
                worst = Some(DerivativeWitness {
                    subset: p.subset.clone(),
                    point: point_coords(&p.subset, j),
                    norm,
                    bound,
                });
            }
        }
    }
    Ok(GlobalnessReport { global, worst: worst.expect("S = ∅ always present"), checked })
}

/// Smallest `γ` for which `f` is `(r, γ)`-global (infinite when `r = 0` and some derivative
/// with `|S| ≥ 1` is nonzero).
pub fn fitted_gamma(f: &GroupFunction, r: f64) -> Result<f64> {
    let profile = derivative_norm_profile(f)?;
    let tol = NORM_TOL * f.norm2();
    let mut gamma = 0.0f64;
    for p in &profile {
        let scale = r.powi(p.subset.len() as i32);
        for &norm in &p.norms {
            if p.subset.is_empty() {
                gamma = gamma.max(norm);
            } else if norm > tol {
                gamma = gamma.max(if scale > 0.0 { norm / scale } else { f64::INFINITY });
            }
        }
    }
    Ok(gamma)
}

/// `min(r^{-(p-2)/p} / p, p^{-1/2}) / (3√2)`.
pub fn rho_bound(r: f64, p: f64) -> f64 {
    let first = if r > 0.0 { r.powf(-(p - 2.0) / p) / p } else { f64::INFINITY };
    first.min(p.powf(-0.5)) / (3.0 * 2f64.sqrt())
}

/// `m = ⌈r^{-2}⌉`, `p = 2m`, `ρ = m^{-1/2} / 20`.
pub fn recommended_hyper_params(r: f64) -> (u32, f64, f64) {
    let m = (1.0 / (r * r)).ceil().max(1.0) as u32;
    (m, 2.0 * m as f64, (m as f64).powf(-0.5) / 20.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperReport {
    /// `‖T_ρ f‖_p^p`.
    pub lhs: f64,
    /// `‖f‖₂² γ^{p-2}`.
    pub rhs: f64,
    pub pass: bool,
    pub rho_bound: f64,
}

/// Evaluates both sides of `‖T_ρ f‖_p^p ≤ ‖f‖₂² γ^{p-2}` for an `(r, γ)`-global `f`.
pub fn hypercontractivity_verify(f: &GroupFunction, r: f64, gamma: f64, p: f64, rho: f64) -> Result<HyperReport> {
    if p < 2.0 {
        return Err(Error::InvalidInput(format!("p = {p} is below 2")));
    }
    let bound = rho_bound(r, p);
    if rho > bound * (1.0 + 1e-12) || rho < 0.0 {
        return Err(Error::RhoTooLarge { rho, bound });
    }
    let report = globalness_check(f, r, gamma)?;
    if !report.global {
        return Err(Error::NotGlobal { norm: report.worst.norm, bound: report.worst.bound });
    }
    let t = apply_multiplier(&MultiplierSpec::Noise(rho), f)?;
    let lhs = t.norm_p_pow(p);
    let rhs = f.norm2().powi(2) * gamma.powf(p - 2.0);
    Ok(HyperReport { lhs, rhs, pass: lhs <= rhs * (1.0 + 1e-9), rho_bound: bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::ModulusSet;
    use num::complex::Complex64;

    #[test]
    fn params_at_inverse_e() {
        let p = global_params((-1.0f64).exp(), 1).unwrap();
        assert!((p.r - 1.0).abs() < 1e-15);
        assert!((p.gamma - 64.0 / std::f64::consts::E).abs() < 1e-12);
        assert_eq!(global_params(0.3, 0).unwrap(), GlobalnessParams { r: 0.0, gamma: 0.3 });
    }

    #[test]
    fn gamma_dominates_alpha_in_range() {
        let alpha = (-700.0f64).exp();
        for d in 0..=8 {
            assert!(global_params(alpha, d).unwrap().gamma >= alpha);
        }
    }

    #[test]
    fn constant_is_global_with_equality() {
        let q = ModulusSet::new(vec![3, 5]).unwrap();
        let f = GroupFunction::constant(q, Complex64::new(0.7, 0.0)).unwrap();
        for r in [0.0, 0.3, 5.0] {
            assert!(globalness_check(&f, r, 0.7).unwrap().global);
        }
        let rep = hypercontractivity_verify(&f, 0.3, 0.7, 4.0, rho_bound(0.3, 4.0)).unwrap();
        assert!((rep.lhs - rep.rhs).abs() < 1e-12 && rep.pass);
    }

    #[test]
    fn delta_fails_small_gamma_at_empty_set() {
        let q = ModulusSet::new(vec![2, 3]).unwrap();
        let mut v = vec![Complex64::new(0.0, 0.0); 6];
        v[0] = Complex64::new(1.0, 0.0);
        let f = GroupFunction::new(q, v).unwrap();
        let rep = globalness_check(&f, 1.0, 1e-3).unwrap();
        assert!(!rep.global);
        assert_eq!(rep.worst.subset, vec![3]);
        assert!((rep.worst.norm - 2f64.sqrt() / 3.0).abs() < 1e-12);
        let ok = globalness_check(&f, 1e6, f.norm2()).unwrap();
        assert!(ok.global);
        assert_eq!(ok.checked, 1 + 2 + 3 + 6);
    }

    #[test]
    fn recommended_rho_is_admissible() {
        for m in 4..200u32 {
            // Any r with ⌈r⁻²⌉ = m lies in [m^{-1/2}, (m-1)^{-1/2}).
            for r in [(m as f64 - 0.5).powf(-0.5), ((m - 1) as f64).powf(-0.5) * (1.0 - 1e-12)] {
                let (mm, p, rho) = recommended_hyper_params(r);
                assert_eq!(mm, m);
                assert!(rho <= rho_bound(r, p), "m = {m}, r = {r}");
            }
        }
    }

    #[test]
    fn errors_reported() {
        let q = ModulusSet::new(vec![3]).unwrap();
        let f = GroupFunction::from_fn(q, |x| Complex64::new(x[0] as f64, 0.0)).unwrap();
        assert!(matches!(hypercontractivity_verify(&f, 0.5, 10.0, 4.0, 0.5), Err(Error::RhoTooLarge { .. })));
        assert!(matches!(hypercontractivity_verify(&f, 0.5, 1e-3, 4.0, 0.01), Err(Error::NotGlobal { .. })));
    }
}
