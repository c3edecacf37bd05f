use num::complex::Complex64;
use std::cmp::Ordering;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Kronrod estimate, its error estimate, and the Kronrod rule applied to `|f|`.
fn kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut mass = fc.norm() * WGK[7];
    for j in 0..7 {
        let (lo, hi) = (f(c - h * XGK[j]), f(c + h * XGK[j]));
        let s = lo + hi;
        k += s * WGK[j];
        mass += (lo.norm() + hi.norm()) * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm(), mass * h.abs())
}

/// Adaptive 7/15-point Gauss–Kronrod integration of a complex integrand over `[a, b]`.
/// The piece with the largest error estimate is bisected until the summed estimate drops below
/// `tol` (or the rounding floor), or the interval budget runs out.
pub(crate) fn integrate<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64) -> Complex64 {
    const MAX_PIECES: usize = 4000;
    let mut pieces = vec![(a, b, kronrod(f, a, b))];
    loop {
        let (mut total, mut err, mut mass) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
        let mut worst = 0;
        for (i, p) in pieces.iter().enumerate() {
            total += p.2 .0;
            err += p.2 .1;
            mass += p.2 .2;
            if !matches!(p.2 .1.partial_cmp(&pieces[worst].2 .1), Some(Ordering::Less | Ordering::Equal)) {
                worst = i;
            }
        }
        if err <= tol.max(50.0 * f64::EPSILON * mass) || pieces.len() >= MAX_PIECES {
            return total;
        }
        let (lo, hi, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        pieces.push((lo, mid, kronrod(f, lo, mid)));
        pieces.push((mid, hi, kronrod(f, mid, hi)));
    }
}

/// `∫ F(z) dz` along the segment `z0 → z1`.
pub(crate) fn segment<F: Fn(Complex64) -> Complex64>(f: &F, z0: Complex64, z1: Complex64, tol: f64) -> Complex64 {
    let dz = z1 - z0;
    integrate(&|s| f(z0 + dz * s), 0.0, 1.0, tol / dz.norm().max(1e-300)) * dz
}
