//! One-dimensional quadrature: adaptive Gauss–Kronrod (7/15) and the
//! midpoint rule.

use crate::scalar::Real;

// 15-point Kronrod abscissae on [0, 1) (symmetric), with the embedded 7-point
// Gauss nodes at the odd indices.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_DEPTH: u32 = 48;

/// Kronrod estimate and |Kronrod − Gauss| on `[a, b]`.
fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let two = T::lit(2.0);
    let center = (a + b) / two;
    let half = (b - a) / two;
    let fc = f(center);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kron = kron + T::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * pair;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

fn adapt<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, whole: T, err: T, tol: T, depth: u32) -> T {
    if err <= tol || depth >= MAX_DEPTH || !(b - a).is_normal() {
        return whole;
    }
    let mid = (a + b) / T::lit(2.0);
    let (l, el) = gk15(f, a, mid);
    let (r, er) = gk15(f, mid, b);
    let half_tol = tol / T::lit(2.0);
    adapt(f, a, mid, l, el, half_tol, depth + 1) + adapt(f, mid, b, r, er, half_tol, depth + 1)
}

/// Adaptive Gauss–Kronrod integral of `f` over `[a, b]` to an absolute
/// tolerance `tol` (relative tolerance: machine-epsilon scaled).
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> T {
    if a == b {
        return T::zero();
    }
    let (whole, err) = gk15(&f, a, b);
    let tol = tol.max(whole.abs() * T::epsilon() * T::lit(16.0));
    adapt(&f, a, b, whole, err, tol, 0)
}

/// Integrates across the given breakpoints, which must be increasing and lie
/// within `[a, b]`.
pub fn integrate_with_breaks<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, breaks: &[T], tol: T) -> T {
    let mut acc = T::zero();
    let mut lo = a;
    let pieces = breaks.len() + 1;
    let piece_tol = tol / T::from_usize_lossy(pieces);
    for &x in breaks.iter().chain(std::iter::once(&b)) {
        let hi = x.min(b).max(lo);
        acc = acc + integrate(&f, lo, hi, piece_tol);
        lo = hi;
    }
    acc
}

/// `m` midpoint nodes on `[a, b]`.
pub fn midpoints<T: Real>(a: T, b: T, m: usize) -> impl Iterator<Item = T> {
    let h = (b - a) / T::from_usize_lossy(m);
    (0..m).map(move |i| a + h * (T::from_usize_lossy(i) + T::lit(0.5)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_and_trig() {
        assert!((integrate(|x: f64| x * x, 0.0, 3.0, 1e-13) - 9.0).abs() < 1e-12);
        assert!((integrate(f64::sin, 0.0, PI, 1e-13) - 2.0).abs() < 1e-12);
        assert_eq!(integrate(f64::sin, 1.0, 1.0, 1e-12), 0.0);
    }

    #[test]
    fn square_root_endpoint() {
        // Quarter disc area.
        let v = integrate(|x: f64| (1.0 - x * x).max(0.0).sqrt(), 0.0, 1.0, 1e-13);
        assert!((v - PI / 4.0).abs() < 1e-11, "{v}");
    }

    #[test]
    fn discontinuity_with_breaks() {
        let f = |x: f64| if x < 0.3 { 1.0 } else { 2.0 };
        let v = integrate_with_breaks(f, 0.0, 1.0, &[0.3], 1e-13);
        assert!((v - 1.7).abs() < 1e-13);
    }

    #[test]
    fn midpoint_nodes() {
        let nodes: Vec<f64> = midpoints(-PI, PI, 4).collect();
        let expect = [-0.75 * PI, -0.25 * PI, 0.25 * PI, 0.75 * PI];
        for (a, b) in nodes.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
