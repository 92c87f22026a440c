use std::f64::consts::PI;

use kuramoto_core::mean_field::{generalized_residual, ROOT_TOL};
use kuramoto_core::{
    critical_coupling, self_consistency_residual, self_consistency_roots, Error, FrequencyDistribution,
};
use proptest::prelude::*;

const QUAD_TOL: f64 = 1e-12;

fn uniform_closed_form(gamma: f64, k: f64, r: f64) -> f64 {
    let a = k * r;
    (gamma * (a * a - gamma * gamma).max(0.0).sqrt() + a * a * (gamma / a).min(1.0).asin()) / (2.0 * gamma) - k * r * r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn uniform_roots_satisfy_residual(gamma in 0.05f64..1.0, ratio in 1.0f64..6.0) {
        let k = ratio * gamma;
        let g = FrequencyDistribution::uniform(0.0, gamma).unwrap();
        let res = self_consistency_roots(&g, k, 1024).unwrap();
        for &r in &res.roots {
            prop_assert!(self_consistency_residual(&g, k, r, QUAD_TOL).abs() <= ROOT_TOL);
            prop_assert!(k * r >= gamma * (1.0 - 1e-12));
            prop_assert!(r > 0.0 && r <= 1.0);
        }
        prop_assert_eq!(res.k_supercritical, k >= 4.0 * gamma / PI);
        prop_assert_eq!(res.largest, res.roots.last().copied());
    }

    #[test]
    fn residual_matches_closed_form(gamma in 0.05f64..1.0, ratio in 1.0f64..6.0, t in 0.0f64..1.0) {
        let k = ratio * gamma;
        let r = gamma / k + (1.0 - gamma / k) * t;
        let g = FrequencyDistribution::uniform(0.0, gamma).unwrap();
        let got = self_consistency_residual(&g, k, r, QUAD_TOL);
        prop_assert!((got - uniform_closed_form(gamma, k, r)).abs() < 1e-10);
    }

    #[test]
    fn gaussian_roots_satisfy_residual(sigma in 0.1f64..0.8, k in 0.5f64..5.0) {
        let g = FrequencyDistribution::truncated_gaussian(0.0, sigma, 2.5).unwrap();
        match self_consistency_roots(&g, k, 1024) {
            Ok(res) => {
                for &r in &res.roots {
                    prop_assert!(self_consistency_residual(&g, k, r, QUAD_TOL).abs() <= ROOT_TOL);
                    prop_assert!(k * r >= g.max_abs() * (1.0 - 1e-12));
                }
            }
            Err(Error::SupportTooWide { ratio }) => prop_assert!(ratio > 1.0),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn constant_minus_share_scales_the_integral(gamma in 0.1f64..1.0, s in 0.0f64..1.0) {
        let g = FrequencyDistribution::uniform(0.0, gamma).unwrap();
        let (k, r) = (3.0 * gamma, 0.8);
        let plus = self_consistency_residual(&g, k, r, QUAD_TOL) + k * r * r;
        let mixed = generalized_residual(&g, k, r, |_| s, QUAD_TOL) + k * r * r;
        prop_assert!((mixed - (1.0 - 2.0 * s) * plus).abs() < 1e-11);
    }
}

#[test]
fn critical_coupling_grows_with_width() {
    let widths = [0.1, 0.2, 0.4, 0.8];
    let kcs: Vec<f64> =
        widths.iter().map(|&g| critical_coupling(&FrequencyDistribution::uniform(0.0, g).unwrap()).unwrap()).collect();
    for w in kcs.windows(2) {
        assert!(w[1] >= w[0]);
    }
    // Dense (K, R) sign scan for the narrowest law.
    let gamma = widths[0];
    let nk = 2000;
    let nr = 2000;
    let (lo, hi) = (gamma, 2.0 * gamma);
    let supercritical = |k: f64| {
        let r_lo = gamma / k;
        (0..=nr).any(|j| uniform_closed_form(gamma, k, r_lo + (1.0 - r_lo) * j as f64 / nr as f64) >= 0.0)
    };
    let first = (0..=nk).map(|i| lo + (hi - lo) * i as f64 / nk as f64).find(|&k| supercritical(k)).unwrap();
    assert!((kcs[0] - first).abs() <= (hi - lo) / nk as f64 + 1e-9, "{} vs {first}", kcs[0]);
}

#[test]
fn near_critical_uniform_root_sits_at_pi_over_four() {
    let gamma = 1.0;
    let g = FrequencyDistribution::uniform(0.0, gamma).unwrap();
    let kc = critical_coupling(&g).unwrap();
    let r = self_consistency_roots(&g, kc, 4096).unwrap().largest.unwrap();
    assert!((r - PI / 4.0).abs() < 1e-6, "{r}");
}

#[test]
fn roots_for_single_offset_atom() {
    // A single atom at ω₀ ≠ 0: K R² = √(K²R² − ω₀²) in the co-moving sense,
    // i.e. the two-atom quadratic with equal magnitudes.
    let g = FrequencyDistribution::discrete(vec![(0.25, 1.0)]).unwrap();
    let k = 1.0;
    let res = self_consistency_roots(&g, k, 4096).unwrap();
    let disc = (1.0f64 - 4.0 * 0.0625).sqrt();
    let expect = [((1.0 - disc) / 2.0).sqrt(), ((1.0 + disc) / 2.0).sqrt()];
    assert_eq!(res.roots.len(), 2);
    for (r, e) in res.roots.iter().zip(expect) {
        assert!((r - e).abs() < 1e-10);
    }
}
