use std::f64::consts::PI;

use kuramoto_core::{
    angular_distance, characteristic_targets, discretize, fourier_moment, h_functional, kinetic_step, observable,
    r_phi_dot_nonidentical, simulate_kinetic, summarize_targets, Atom, DensitySpec, FrequencyDistribution, MeasureF32,
    PhaseLaw, PhaseMeasure, SimConfig, Target,
};
use proptest::prelude::*;

fn atoms_strategy() -> impl Strategy<Value = Vec<Atom<f64>>> {
    prop::collection::vec((0.1f64..1.0, -PI..PI, -1.0f64..1.0), 1..30).prop_map(|raw| {
        let total: f64 = raw.iter().map(|r| r.0).sum();
        raw.into_iter().map(|(w, theta, omega)| Atom { weight: w / total, theta, omega }).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_are_frozen(atoms in atoms_strategy(), k in 0.0f64..3.0, steps in 1usize..40) {
        let m = discretize(&DensitySpec::AtomList(atoms), 1, k).unwrap();
        prop_assert!(m.particles().iter().all(|p| p.log_jac == 0.0));
        let mut s = m.clone();
        for _ in 0..steps {
            s = kinetic_step(&s, 0.02).unwrap();
        }
        for (a, b) in m.particles().iter().zip(s.particles()) {
            prop_assert_eq!(a.weight.to_bits(), b.weight.to_bits());
            prop_assert_eq!(a.theta0.to_bits(), b.theta0.to_bits());
            prop_assert_eq!(a.omega.to_bits(), b.omega.to_bits());
        }
        prop_assert!((observable(&s, |_| 1.0) - 1.0).abs() < 1e-12);
        prop_assert!((s.time() - 0.02 * steps as f64).abs() < 1e-12);
    }
}

#[test]
fn mean_phase_constant_for_identical_data() {
    let spec = DensitySpec::TruncatedGaussianArc { center: 0.7f64, sigma: 0.6, halfwidth: 2.5 };
    let m = discretize(&spec, 400, 1.0).unwrap();
    let traj = simulate_kinetic(&m, &SimConfig::new(0.01, 50.0).record_every(50), None).unwrap();
    let m0 = traj.mean_phase_series[0];
    assert!(traj.mean_phase_series.iter().all(|m| (m - m0).abs() < 1e-6));
}

/// `(dR/dt, R dφ/dt)` against central differences of a finely recorded run.
fn rates_match_recorded_series(m: PhaseMeasure<f64>, k: f64) {
    let dt = 1e-3;
    let mut states = Vec::new();
    let mut rec = |s: &PhaseMeasure<f64>| states.push(s.clone());
    simulate_kinetic(&m, &SimConfig::new(dt, 1.0).stationarity_tol(f64::MIN_POSITIVE), Some(&mut rec)).unwrap();
    let op: Vec<_> = states.iter().map(|s| s.order_parameter()).collect();
    for i in (1..states.len() - 1).step_by(25) {
        let (r_dot, r_phi_dot) = r_phi_dot_nonidentical(&states[i], k).unwrap();
        let fd_r = (op[i + 1].r - op[i - 1].r) / (2.0 * dt);
        let dphi = (op[i + 1].phi.unwrap() - op[i - 1].phi.unwrap() + PI).rem_euclid(2.0 * PI) - PI;
        let fd_rphi = op[i].r * dphi / (2.0 * dt);
        assert!((fd_r - r_dot).abs() < 1e-4 * r_dot.abs().max(1.0), "t={}: {fd_r} vs {r_dot}", states[i].time());
        assert!((fd_rphi - r_phi_dot).abs() < 1e-4 * r_phi_dot.abs().max(1.0), "t={}", states[i].time());
    }
}

#[test]
fn order_parameter_rates_identical_smooth_data() {
    let spec = DensitySpec::TruncatedGaussianArc { center: -0.2, sigma: 0.9, halfwidth: PI };
    rates_match_recorded_series(discretize(&spec, 1000, 1.0).unwrap(), 1.0);
}

#[test]
fn order_parameter_rates_nonidentical() {
    let spec = DensitySpec::Product {
        phase: PhaseLaw::TruncatedGaussianArc { center: 0.4, sigma: 0.7, halfwidth: PI },
        freq: FrequencyDistribution::truncated_gaussian(0.3, 0.5, 2.0).unwrap(),
        freq_nodes: 40,
    };
    rates_match_recorded_series(discretize(&spec, 50, 1.7).unwrap(), 1.7);
}

#[test]
fn converged_identical_run_sits_on_the_plus_branch() {
    let m = discretize(&DensitySpec::UniformArc { center: 1.0f64, halfwidth: 2.0 }, 200, 1.0).unwrap();
    let traj = simulate_kinetic(&m, &SimConfig::new(0.01, 400.0).record_every(1000), None).unwrap();
    let fin = &traj.final_measure;
    let op = fin.order_parameter();
    let phi = op.phi.unwrap();
    let tags = characteristic_targets(fin, 1.0, op.r, phi, 1e-3);
    let summary = summarize_targets(fin, &tags);
    assert!(summary.plus_count + 1 >= fin.len(), "{summary:?}");
    assert_eq!(summary.drifting_count, 0);
    // ∫ cos(θ − φ) dρ equals R at the limit.
    assert!((observable(fin, |t| (t - phi).cos()) - op.r).abs() < 1e-12);
    assert!(tags.iter().all(|t| *t != Target::Drifting));
}

#[test]
fn h_non_decreasing_for_smooth_data() {
    for seed in 0..5u64 {
        let center = -1.0 + 0.5 * seed as f64;
        let spec = DensitySpec::Product {
            phase: PhaseLaw::TruncatedGaussianArc { center, sigma: 1.0, halfwidth: PI },
            freq: FrequencyDistribution::uniform(0.1 * seed as f64, 0.8).unwrap(),
            freq_nodes: 24,
        };
        let m = discretize(&spec, 24, 1.0).unwrap();
        let traj = simulate_kinetic(&m, &SimConfig::new(0.01, 30.0), None).unwrap();
        for w in traj.h_series.windows(2) {
            assert!(w[1] >= w[0] - 1e-7);
        }
        assert_eq!(traj.h_series[0], h_functional(&m));
    }
}

#[test]
fn first_moment_of_single_atom() {
    let m = discretize(&DensitySpec::AtomList(vec![Atom { weight: 1.0f64, theta: 0.0, omega: 0.4 }]), 1, 1.0).unwrap();
    let z = fourier_moment(&m, 0);
    assert_eq!((z.re, z.im), (1.0, 0.0));
    assert!((fourier_moment(&m, 2).re - 0.16).abs() < 1e-16);
}

#[test]
fn phase_locked_spec_places_atoms_on_curve() {
    let g = FrequencyDistribution::uniform(0.0f64, 0.3).unwrap();
    let m = discretize(&DensitySpec::PhaseLocked { freq: g, phi_star: 0.0, kr: 1.0 }, 64, 1.0).unwrap();
    for p in m.particles() {
        assert!(angular_distance(p.theta, p.omega.asin()) < 1e-15);
    }
}

#[test]
fn single_precision_kinetic_run() {
    let m: MeasureF32 = discretize(&DensitySpec::UniformArc { center: 0.0f32, halfwidth: 2.0 }, 64, 1.0).unwrap();
    let traj = simulate_kinetic(&m, &SimConfig::new(0.01f32, 30.0).stationarity_tol(1e-4), None).unwrap();
    assert!(*traj.r_series.last().unwrap() > 0.99);
    let total: f32 = traj.final_measure.particles().iter().map(|p| p.weight).sum();
    assert!((total - 1.0).abs() < 1e-5);
}
