//! Classification against the stationary-state taxonomy: incoherent states
//! (`R = 0`) and two-cluster states with the majority at `φ*` and the rest
//! at `φ* + π`.

use crate::dynamics::{order_parameter, OscillatorEnsemble};
use crate::error::{Error, Result};
use crate::integrator::{DEFAULT_DT, DEFAULT_STATIONARITY_TOL};
use crate::kinetic::PhaseMeasure;
use crate::scalar::{angular_distance, Real};

/// `R` at or below this counts as incoherent.
pub const CLASS_R_TOL: f64 = 1e-6;
pub const DEFAULT_ANGLE_TOL: f64 = 1e-3;
pub const DEFAULT_MASS_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterCounts {
    pub n_at_phi: usize,
    /// Oscillators at the antipode `φ* + π`.
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StationaryClass<T> {
    Incoherent,
    /// Mass `c1` at `φ*` and `c2 < c1` at `φ* + π`. Finite ensembles also
    /// carry the integer counts, i.e. type `(N − k, k)`.
    Clustered {
        phi_star: T,
        c1: T,
        c2: T,
        counts: Option<ClusterCounts>,
    },
    NotStationary,
}

impl<T: Real> StationaryClass<T> {
    /// Number at the antipode for finite clustered states.
    pub fn antipodal_count(&self) -> Option<usize> {
        match self {
            StationaryClass::Clustered { counts: Some(c), .. } => Some(c.k),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            StationaryClass::Incoherent => "incoherent",
            StationaryClass::Clustered { .. } => "clustered",
            StationaryClass::NotStationary => "not_stationary",
        }
    }
}

fn check_angle_tol<T: Real>(angle_tol: T) {
    assert!(angle_tol > T::zero() && angle_tol < T::FRAC_PI_4(), "angle_tol must lie in (0, π/4), got {angle_tol}");
}

/// Classifies a finite configuration as incoherent, type `(N − k, k)`, or
/// neither. `φ*` is taken from the order parameter.
pub fn classify_finite<T: Real>(ens: &OscillatorEnsemble<T>, angle_tol: T) -> StationaryClass<T> {
    check_angle_tol(angle_tol);
    let op = order_parameter(ens);
    let phi_star = match op.phi {
        Some(phi) if op.r > T::lit(CLASS_R_TOL) => phi,
        _ => return StationaryClass::Incoherent,
    };
    let antipode = phi_star + T::PI();
    let (mut n_at_phi, mut k) = (0usize, 0usize);
    for &th in ens.phases() {
        if angular_distance(th, phi_star) < angle_tol {
            n_at_phi += 1;
        } else if angular_distance(th, antipode) < angle_tol {
            k += 1;
        } else {
            return StationaryClass::NotStationary;
        }
    }
    if n_at_phi <= k {
        return StationaryClass::NotStationary;
    }
    let n = T::from_usize_lossy(ens.len());
    StationaryClass::Clustered {
        phi_star,
        c1: T::from_usize_lossy(n_at_phi) / n,
        c2: T::from_usize_lossy(k) / n,
        counts: Some(ClusterCounts { n_at_phi, k }),
    }
}

/// Measure analogue of [`classify_finite`]: type `(c₁, c₂)` when
/// `c₁ + c₂ > 1 − mass_tol` and `c₁ > c₂`. Ties are not stationary.
pub fn classify_measure<T: Real>(meas: &PhaseMeasure<T>, angle_tol: T, mass_tol: T) -> StationaryClass<T> {
    check_angle_tol(angle_tol);
    assert!(mass_tol > T::zero(), "mass_tol must be positive");
    let op = meas.order_parameter();
    let phi_star = match op.phi {
        Some(phi) if op.r > T::lit(CLASS_R_TOL) => phi,
        _ => return StationaryClass::Incoherent,
    };
    let antipode = phi_star + T::PI();
    let (mut c1, mut c2) = (T::zero(), T::zero());
    for p in meas.particles() {
        if angular_distance(p.theta, phi_star) < angle_tol {
            c1 = c1 + p.weight;
        } else if angular_distance(p.theta, antipode) < angle_tol {
            c2 = c2 + p.weight;
        }
    }
    if c1 + c2 > T::one() - mass_tol && c1 > c2 {
        StationaryClass::Clustered { phi_star, c1, c2, counts: None }
    } else {
        StationaryClass::NotStationary
    }
}

/// `dδ/dt` for the symmetric three-oscillator family `(δ, −δ, π)`.
pub fn three_oscillator_rate<T: Real>(delta: T) -> T {
    T::lit(2.0 / 3.0) * delta.sin() * (T::lit(0.5) - delta.cos())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeOscillatorLimit<T> {
    /// Value of `δ` where integration stopped.
    pub delta: T,
    pub time: T,
    /// `false` when `t_max` was reached with `|dδ/dt|` still above the
    /// stationarity tolerance (horizon too short).
    pub converged: bool,
}

/// Integrates the reduced equation of the `(δ, −δ, π)` configuration with the
/// default step and stationarity tolerance.
pub fn three_oscillator_limit<T: Real>(delta0: T, t_max: T) -> Result<ThreeOscillatorLimit<T>> {
    three_oscillator_limit_with(delta0, t_max, T::lit(DEFAULT_DT), T::lit(DEFAULT_STATIONARITY_TOL))
}

pub fn three_oscillator_limit_with<T: Real>(delta0: T, t_max: T, dt: T, tol: T) -> Result<ThreeOscillatorLimit<T>> {
    if !(delta0 > T::zero() && delta0 <= T::PI()) {
        return Err(Error::InvalidInput(format!("delta0 must lie in (0, π], got {delta0}")));
    }
    if !(dt > T::zero() && t_max > T::zero() && tol > T::zero()) {
        return Err(Error::InvalidInput("dt, t_max and tol must be positive".into()));
    }
    let n_steps = (t_max / dt).round().to_usize().unwrap_or(0).max(1);
    let half = dt / T::lit(2.0);
    let mut delta = delta0;
    for step in 0..=n_steps {
        let k1 = three_oscillator_rate(delta);
        let time = dt * T::from_usize_lossy(step);
        if k1.abs() < tol {
            return Ok(ThreeOscillatorLimit { delta, time, converged: true });
        }
        if step == n_steps {
            break;
        }
        let k2 = three_oscillator_rate(delta + half * k1);
        let k3 = three_oscillator_rate(delta + half * k2);
        let k4 = three_oscillator_rate(delta + dt * k3);
        delta = delta + dt / T::lit(6.0) * (k1 + T::lit(2.0) * (k2 + k3) + k4);
    }
    Ok(ThreeOscillatorLimit { delta, time: dt * T::from_usize_lossy(n_steps), converged: false })
}

/// The `(δ, −δ, π)` ensemble with `ω = 0`.
pub fn three_oscillator_ensemble<T: Real>(delta: T, coupling: T) -> Result<OscillatorEnsemble<T>> {
    OscillatorEnsemble::identical(vec![delta, -delta, T::PI()], coupling)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize;
    use crate::kinetic::{Atom, DensitySpec};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn ens(phases: &[f64]) -> OscillatorEnsemble<f64> {
        OscillatorEnsemble::identical(phases.to_vec(), 1.0).unwrap()
    }

    #[test]
    fn finite_examples() {
        match classify_finite(&ens(&[1.3; 5]), 1e-3) {
            StationaryClass::Clustered { phi_star, counts: Some(c), .. } => {
                assert_eq!(c.k, 0);
                assert_eq!(c.n_at_phi, 5);
                assert!((phi_star - 1.3).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let e = ens(&[0.0, 0.0, PI]);
        assert!((order_parameter(&e).r - 1.0 / 3.0).abs() < 1e-15);
        match classify_finite(&e, 1e-3) {
            StationaryClass::Clustered { phi_star, c1, c2, counts: Some(c) } => {
                assert_eq!((c.n_at_phi, c.k), (2, 1));
                assert!(phi_star.abs() < 1e-12);
                // R = c1 − c2 = 1 − 2k/N.
                assert!((c1 - c2 - 1.0 / 3.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(classify_finite(&ens(&[0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2]), 1e-3), StationaryClass::Incoherent);
        assert_eq!(classify_finite(&ens(&[0.0, 0.5, 1.0]), 1e-3), StationaryClass::NotStationary);
    }

    #[test]
    #[should_panic]
    fn angle_tol_precondition() {
        classify_finite(&ens(&[0.0]), 1.0);
    }

    fn measure(atoms: &[(f64, f64)]) -> PhaseMeasure<f64> {
        let atoms = atoms.iter().map(|&(weight, theta)| Atom { weight, theta, omega: 0.0 }).collect();
        discretize(&DensitySpec::AtomList(atoms), 1, 1.0).unwrap()
    }

    #[test]
    fn measure_examples() {
        match classify_measure(&measure(&[(1.0, 0.4)]), 1e-3, 1e-3) {
            StationaryClass::Clustered { c1, c2, .. } => assert_eq!((c1, c2), (1.0, 0.0)),
            other => panic!("{other:?}"),
        }
        let m = measure(&[(0.7, 0.0), (0.3, PI)]);
        assert!((m.order_parameter().r - 0.4).abs() < 1e-15);
        match classify_measure(&m, 1e-3, 1e-3) {
            StationaryClass::Clustered { c1, c2, phi_star, .. } => {
                assert_eq!((c1, c2), (0.7, 0.3));
                assert!(phi_star.abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let uniform = discretize(&DensitySpec::UniformArc { center: 0.0, halfwidth: PI }, 256, 1.0).unwrap();
        assert_eq!(classify_measure(&uniform, 1e-3, 1e-3), StationaryClass::Incoherent);
        let spread = discretize(&DensitySpec::UniformArc { center: 0.0, halfwidth: 1.0 }, 256, 1.0).unwrap();
        assert_eq!(classify_measure(&spread, 1e-3, 1e-3), StationaryClass::NotStationary);
    }

    #[test]
    fn equal_clusters_are_not_stationary_type() {
        // R = 0 exactly would be incoherent; nudge one side so R is defined but c1 = c2.
        let m = measure(&[(0.5, 0.0), (0.5, PI - 1e-4)]);
        assert_eq!(classify_measure(&m, 1e-3, 1e-3), StationaryClass::NotStationary);
    }

    #[test]
    fn three_oscillator_limits() {
        let below = three_oscillator_limit(FRAC_PI_3 - 0.01, 200.0).unwrap();
        assert!(below.converged && below.delta.abs() < 1e-3, "{below:?}");
        let at = three_oscillator_limit(FRAC_PI_3, 200.0).unwrap();
        assert_eq!(at.delta, FRAC_PI_3);
        assert_eq!(at.time, 0.0);
        let above = three_oscillator_limit(FRAC_PI_3 + 0.01, 200.0).unwrap();
        assert!(above.converged && (above.delta - PI).abs() < 1e-3, "{above:?}");
        let short = three_oscillator_limit(FRAC_PI_3 + 0.01, 1.0).unwrap();
        assert!(!short.converged);
        assert!(three_oscillator_limit(0.0, 10.0).is_err());
        assert!(three_oscillator_limit(4.0, 10.0).is_err());
    }

    #[test]
    fn reduced_rate_matches_full_field() {
        for &d in &[0.3f64, 1.0, 2.0, 3.0] {
            let v = crate::finite_n_rhs(&three_oscillator_ensemble(d, 1.0).unwrap());
            assert!((v[0] - three_oscillator_rate(d)).abs() < 1e-14);
        }
    }
}
