//! Finite-N Kuramoto vector field, order parameter and conserved quantities.
//!
//! The system is
//!
//! ```text
//! dθ_i/dt = ω_i − (K/N) Σ_j sin(θ_i − θ_j) = ω_i − K·R·sin(θ_i − φ)
//! ```
//!
//! with `R·e^{iφ} = (1/N) Σ_j e^{iθ_j}`. Phases are kept unwrapped on the
//! real line; reduction mod 2π only happens inside trigonometric calls and
//! when reporting `φ`.

use crate::error::{Error, Result};
use crate::scalar::{wrap_angle, Real};

/// Below this modulus the order-parameter phase is reported as undefined and
/// the vector field falls back to the pairwise sum.
pub const R_MIN: f64 = 1e-8;

#[inline]
pub(crate) fn r_min<T: Real>() -> T {
    T::lit(R_MIN)
}

/// State of `N` coupled phase oscillators.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorEnsemble<T> {
    phases: Vec<T>,
    freqs: Vec<T>,
    coupling: T,
}

impl<T: Real> OscillatorEnsemble<T> {
    pub fn new(phases: Vec<T>, freqs: Vec<T>, coupling: T) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidInput("ensemble needs at least one oscillator".into()));
        }
        if phases.len() != freqs.len() {
            return Err(Error::InvalidInput(format!("{} phases but {} frequencies", phases.len(), freqs.len())));
        }
        if !coupling.is_finite() || coupling < T::zero() {
            return Err(Error::InvalidInput(format!("coupling must be finite and >= 0, got {coupling}")));
        }
        if phases.iter().chain(freqs.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("phases and frequencies must be finite".into()));
        }
        Ok(Self { phases, freqs, coupling })
    }

    /// Identical oscillators in the co-rotating frame (all `ω_i = 0`).
    pub fn identical(phases: Vec<T>, coupling: T) -> Result<Self> {
        let freqs = vec![T::zero(); phases.len()];
        Self::new(phases, freqs, coupling)
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn phases(&self) -> &[T] {
        &self.phases
    }

    pub fn freqs(&self) -> &[T] {
        &self.freqs
    }

    pub fn coupling(&self) -> T {
        self.coupling
    }

    pub fn with_coupling(mut self, coupling: T) -> Result<Self> {
        if !coupling.is_finite() || coupling < T::zero() {
            return Err(Error::InvalidInput(format!("coupling must be finite and >= 0, got {coupling}")));
        }
        self.coupling = coupling;
        Ok(self)
    }

    /// Mean natural frequency `⟨ω⟩`.
    pub fn mean_frequency(&self) -> T {
        self.freqs.iter().copied().sum::<T>() / T::from_usize_lossy(self.len())
    }

    /// Same ensemble viewed in the frame rotating at `⟨ω⟩`, i.e. with the
    /// mean frequency subtracted from every `ω_i`. Phases are untouched.
    pub fn to_comoving_frame(&self) -> Self {
        let mean = self.mean_frequency();
        Self {
            phases: self.phases.clone(),
            freqs: self.freqs.iter().map(|&w| w - mean).collect(),
            coupling: self.coupling,
        }
    }

    pub(crate) fn phases_mut(&mut self) -> &mut [T] {
        &mut self.phases
    }
}

/// Modulus and (optional) argument of the complex mean field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderParameter<T> {
    pub r: T,
    /// Reduced to `[-π, π)`; `None` when `r <= R_MIN`.
    pub phi: Option<T>,
}

impl<T: Real> OrderParameter<T> {
    /// Builds the order parameter from the (already normalized) mean field.
    pub fn from_mean_field(re: T, im: T) -> Self {
        let r = re.hypot(im).min(T::one());
        let phi = (r > r_min()).then(|| wrap_angle(im.atan2(re)));
        Self { r, phi }
    }

    pub fn phi_or_err(&self) -> Result<T> {
        self.phi.ok_or(Error::UndefinedPhase { r: self.r.as_f64() })
    }
}

/// `(1/N) Σ e^{iθ_j}` as a `(re, im)` pair, summed in index order.
pub(crate) fn mean_field<T: Real>(phases: &[T]) -> (T, T) {
    let (mut re, mut im) = (T::zero(), T::zero());
    for &th in phases {
        let (s, c) = th.sin_cos();
        re = re + c;
        im = im + s;
    }
    let n = T::from_usize_lossy(phases.len());
    (re / n, im / n)
}

pub fn order_parameter<T: Real>(ens: &OscillatorEnsemble<T>) -> OrderParameter<T> {
    order_parameter_of(ens.phases())
}

pub(crate) fn order_parameter_of<T: Real>(phases: &[T]) -> OrderParameter<T> {
    let (re, im) = mean_field(phases);
    OrderParameter::from_mean_field(re, im)
}

/// Angular velocities `dθ_i/dt`.
///
/// Uses the O(N) mean-field form when `R > R_MIN` and the O(N²) pairwise sum
/// otherwise.
pub fn finite_n_rhs<T: Real>(ens: &OscillatorEnsemble<T>) -> Vec<T> {
    let mut out = vec![T::zero(); ens.len()];
    rhs_into(ens.phases(), ens.freqs(), ens.coupling(), &mut out);
    out
}

pub(crate) fn rhs_into<T: Real>(phases: &[T], freqs: &[T], coupling: T, out: &mut [T]) {
    let (zr, zi) = relative_mean_field(phases);
    if zr.hypot(zi) > r_min() {
        mean_field_rhs_into(phases, freqs, coupling, zr, zi, out);
    } else {
        pairwise_rhs_into(phases, freqs, coupling, out);
    }
}

/// Mean field of the phases measured from `θ_0`. Working relative to a member
/// of the ensemble makes coincident phases produce an exactly zero interaction.
fn relative_mean_field<T: Real>(phases: &[T]) -> (T, T) {
    match phases.first() {
        Some(&th0) => {
            let (mut re, mut im) = (T::zero(), T::zero());
            for &th in phases {
                let (s, c) = (th - th0).sin_cos();
                re = re + c;
                im = im + s;
            }
            let n = T::from_usize_lossy(phases.len());
            (re / n, im / n)
        }
        None => (T::zero(), T::zero()),
    }
}

/// `R sin(θ_i − φ)` from the relative mean field `(zr, zi)`.
fn coupling_term<T: Real>(th: T, th0: T, zr: T, zi: T) -> T {
    let (s, c) = (th - th0).sin_cos();
    s * zr - c * zi
}

fn mean_field_rhs_into<T: Real>(phases: &[T], freqs: &[T], coupling: T, zr: T, zi: T, out: &mut [T]) {
    let th0 = phases[0];
    for ((o, &th), &w) in out.iter_mut().zip(phases).zip(freqs) {
        *o = w - coupling * coupling_term(th, th0, zr, zi);
    }
}

fn pairwise_rhs_into<T: Real>(phases: &[T], freqs: &[T], coupling: T, out: &mut [T]) {
    let n = phases.len();
    out.iter_mut().for_each(|o| *o = T::zero());
    // Each pair is evaluated once, so the interaction sums to zero up to the
    // final accumulation roundoff.
    for i in 0..n {
        for j in (i + 1)..n {
            let s = (phases[i] - phases[j]).sin();
            out[i] = out[i] + s;
            out[j] = out[j] - s;
        }
    }
    let scale = coupling / T::from_usize_lossy(n);
    for (o, &w) in out.iter_mut().zip(freqs) {
        *o = w - scale * *o;
    }
}

/// The vector field evaluated through the pairwise sum regardless of `R`.
pub fn pairwise_rhs<T: Real>(ens: &OscillatorEnsemble<T>) -> Vec<T> {
    let mut out = vec![T::zero(); ens.len()];
    pairwise_rhs_into(ens.phases(), ens.freqs(), ens.coupling(), &mut out);
    out
}

/// The vector field evaluated through the order parameter; errors when `φ`
/// is undefined.
pub fn mean_field_rhs<T: Real>(ens: &OscillatorEnsemble<T>) -> Result<Vec<T>> {
    order_parameter(ens).phi_or_err()?;
    let (zr, zi) = relative_mean_field(ens.phases());
    let mut out = vec![T::zero(); ens.len()];
    mean_field_rhs_into(ens.phases(), ens.freqs(), ens.coupling(), zr, zi, &mut out);
    Ok(out)
}

/// Gradient potential `U = (1/2N) Σ_{h,j} cos(θ_h − θ_j)` of the
/// identical-oscillator system. Frequencies are ignored.
pub fn potential_u<T: Real>(ens: &OscillatorEnsemble<T>) -> T {
    let th = ens.phases();
    let mut acc = T::zero();
    for &a in th {
        for &b in th {
            acc = acc + (a - b).cos();
        }
    }
    acc / (T::lit(2.0) * T::from_usize_lossy(th.len()))
}

/// `(1/N) Σ θ_i` over the unwrapped phases.
pub fn mean_phase<T: Real>(ens: &OscillatorEnsemble<T>) -> T {
    ens.phases().iter().copied().sum::<T>() / T::from_usize_lossy(ens.len())
}

/// `dR/dt = K·R·(1/N) Σ sin²(θ_j − φ)` for identical oscillators.
pub fn r_dot_identical<T: Real>(ens: &OscillatorEnsemble<T>) -> Result<T> {
    let op = order_parameter(ens);
    op.phi_or_err()?;
    let phases = ens.phases();
    let (zr, zi) = relative_mean_field(phases);
    // Σ (R sin(θ_j − φ))², divided by R² below.
    let sum_sq = phases
        .iter()
        .map(|&th| {
            let s = coupling_term(th, phases[0], zr, zi);
            s * s
        })
        .sum::<T>();
    let r2 = zr * zr + zi * zi;
    Ok(ens.coupling() * sum_sq / (T::from_usize_lossy(ens.len()) * r2) * op.r)
}

/// `(1/N) Σ θ_i ω_i + K R²/2`, the finite-N counterpart of the kinetic H
/// functional. Non-decreasing along solutions.
pub fn h_functional_finite<T: Real>(ens: &OscillatorEnsemble<T>) -> T {
    let n = T::from_usize_lossy(ens.len());
    let drift = ens.phases().iter().zip(ens.freqs()).map(|(&th, &w)| th * w).sum::<T>() / n;
    let r = order_parameter(ens).r;
    drift + ens.coupling() * r * r / T::lit(2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn ens(phases: &[f64]) -> OscillatorEnsemble<f64> {
        OscillatorEnsemble::identical(phases.to_vec(), 1.0).unwrap()
    }

    #[test]
    fn rejects_invalid_ensembles() {
        assert!(OscillatorEnsemble::<f64>::new(vec![], vec![], 1.0).is_err());
        assert!(OscillatorEnsemble::new(vec![0.0], vec![0.0, 1.0], 1.0).is_err());
        assert!(OscillatorEnsemble::new(vec![0.0], vec![0.0], -1.0).is_err());
        assert!(OscillatorEnsemble::new(vec![f64::NAN], vec![0.0], 1.0).is_err());
        assert!(OscillatorEnsemble::new(vec![0.0], vec![f64::INFINITY], 1.0).is_err());
    }

    #[test]
    fn order_parameter_examples() {
        let op = order_parameter(&ens(&[0.0, 0.0]));
        assert_abs_diff_eq!(op.r, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(op.phi.unwrap(), 0.0, epsilon = 1e-15);

        let op = order_parameter(&ens(&[0.0, PI]));
        assert!(op.r < 1e-15);
        assert!(op.phi.is_none());

        let op = order_parameter(&ens(&[0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2]));
        assert!(op.r < 1e-15);
    }

    #[test]
    fn order_parameter_matches_high_precision_sum() {
        // 40-digit complex sum of e^{iθ}/3 for θ = (0.3, -0.1, 0.5).
        let op = order_parameter(&ens(&[0.3, -0.1, 0.5]));
        assert_abs_diff_eq!(op.r, 0.969_130_559_574_325_7, epsilon = 1e-14);
        assert_abs_diff_eq!(op.phi.unwrap(), 0.234_344_545_476_966_8, epsilon = 1e-14);

        let z: Complex64 = [0.3, -0.1, 0.5].iter().map(|&t| Complex64::from_polar(1.0, t)).sum::<Complex64>() / 3.0;
        assert_abs_diff_eq!(op.r, z.norm(), epsilon = 1e-15);
    }

    #[test]
    fn rhs_examples() {
        assert!(finite_n_rhs(&ens(&[0.7; 4])).iter().all(|v| *v == 0.0));
        let v = finite_n_rhs(&ens(&[0.0, PI]));
        assert!(v.iter().all(|x| x.abs() < 1e-15));

        for &d in &[0.2, 0.9, 1.5, 2.5] {
            let v = finite_n_rhs(&ens(&[d, -d, PI]));
            let reduced = 2.0 / 3.0 * d.sin() * (0.5 - d.cos());
            assert_abs_diff_eq!(v[0], reduced, epsilon = 1e-14);
            assert_abs_diff_eq!(v[1], -reduced, epsilon = 1e-14);
            assert!(v[2].abs() < 1e-14);
        }
    }

    #[test]
    fn potential_examples() {
        assert_abs_diff_eq!(potential_u(&ens(&[0.4; 5])), 2.5, epsilon = 1e-14);
        assert!(potential_u(&ens(&[0.0, PI])).abs() < 1e-15);
        // 40-digit double sum for θ = (0.2, 1.1, -0.4).
        let e = ens(&[0.2, 1.1, -0.4]);
        let u = potential_u(&e);
        assert_abs_diff_eq!(u, 1.005_894_261_616_015_2, epsilon = 1e-14);
        let r = order_parameter(&e).r;
        assert_abs_diff_eq!(u, 1.5 * r * r, epsilon = 1e-14);
    }

    #[test]
    fn mean_phase_examples() {
        assert_eq!(mean_phase(&ens(&[1.0, -1.0])), 0.0);
        assert_abs_diff_eq!(mean_phase(&ens(&[0.0, FRAC_PI_2, PI])), FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn r_dot_examples() {
        assert_eq!(r_dot_identical(&ens(&[0.3; 6])).unwrap(), 0.0);
        assert!(matches!(r_dot_identical(&ens(&[0.0, PI])), Err(Error::UndefinedPhase { .. })));
        let e = OscillatorEnsemble::identical(vec![0.5, -0.5, PI], 2.0).unwrap();
        let unscaled = r_dot_identical(&ens(&[0.5, -0.5, PI])).unwrap();
        assert_abs_diff_eq!(r_dot_identical(&e).unwrap(), 2.0 * unscaled, epsilon = 1e-15);
        assert!(unscaled > 0.0);
    }

    #[test]
    fn comoving_frame_removes_mean() {
        let e = OscillatorEnsemble::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 6.0], 1.0).unwrap();
        let c = e.to_comoving_frame();
        assert_abs_diff_eq!(c.mean_frequency(), 0.0, epsilon = 1e-15);
        assert_eq!(c.phases(), e.phases());
    }

    #[test]
    fn f32_agrees_with_f64() {
        let p = [0.3f64, -0.1, 0.5, 2.0];
        let e64 = OscillatorEnsemble::new(p.to_vec(), vec![0.1, -0.2, 0.0, 0.1], 1.5).unwrap();
        let e32 = OscillatorEnsemble::new(p.iter().map(|&x| x as f32).collect(), vec![0.1f32, -0.2, 0.0, 0.1], 1.5f32)
            .unwrap();
        let (v64, v32) = (finite_n_rhs(&e64), finite_n_rhs(&e32));
        for (a, b) in v64.iter().zip(&v32) {
            assert!((a - *b as f64).abs() < 1e-5);
        }
        assert!((order_parameter(&e64).r - order_parameter(&e32).r as f64).abs() < 1e-6);
    }

    fn phases_strategy(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, 1..=max_n)
    }

    proptest! {
        #[test]
        fn rotation_invariance(phases in phases_strategy(30), c in -20.0f64..20.0, wraps in prop::collection::vec(-3i32..3, 30)) {
            let base = order_parameter(&ens(&phases));
            let rotated: Vec<f64> = phases.iter().zip(&wraps).map(|(t, k)| t + c + 2.0 * PI * *k as f64).collect();
            let op = order_parameter(&ens(&rotated));
            prop_assert!((op.r - base.r).abs() < 1e-12);
            if base.r > 1e-6 {
                prop_assert!(crate::scalar::angular_distance(op.phi.unwrap(), base.phi.unwrap() + c) < 1e-9);
            }
        }

        #[test]
        fn rhs_forms_agree(phases in phases_strategy(40), freqs in prop::collection::vec(-2.0f64..2.0, 40), k in 0.0f64..4.0) {
            let n = phases.len();
            let e = OscillatorEnsemble::new(phases, freqs[..n].to_vec(), k).unwrap();
            prop_assume!(order_parameter(&e).r > R_MIN);
            let a = pairwise_rhs(&e);
            let b = mean_field_rhs(&e).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12, "{x} vs {y}");
            }
            let total: f64 = a.iter().sum();
            let wsum: f64 = e.freqs().iter().sum();
            prop_assert!((total - wsum).abs() < 1e-12);
        }

        #[test]
        fn rhs_is_gradient_of_potential(phases in prop::collection::vec(-PI..PI, 1..=20)) {
            let e = ens(&phases);
            let v = finite_n_rhs(&e);
            let h = 1e-5;
            for i in 0..phases.len() {
                let mut p = phases.clone();
                p[i] += h;
                let up = potential_u(&ens(&p));
                p[i] -= 2.0 * h;
                let dn = potential_u(&ens(&p));
                prop_assert!(((up - dn) / (2.0 * h) - v[i]).abs() < 1e-6);
            }
        }

        #[test]
        fn potential_equals_half_n_r_squared(phases in phases_strategy(30)) {
            let e = ens(&phases);
            let r = order_parameter(&e).r;
            let n = phases.len() as f64;
            let u = potential_u(&e);
            let expect = 0.5 * n * r * r;
            prop_assert!((u - expect).abs() <= 1e-10 * expect.abs().max(1e-300) || (u - expect).abs() < 1e-13);
        }

        #[test]
        fn mean_field_identities(phases in phases_strategy(30)) {
            let e = ens(&phases);
            let op = order_parameter(&e);
            prop_assume!(op.r > R_MIN);
            let phi = op.phi.unwrap();
            let n = phases.len() as f64;
            let c: f64 = phases.iter().map(|t| (t - phi).cos()).sum::<f64>() / n;
            let s: f64 = phases.iter().map(|t| (t - phi).sin()).sum::<f64>() / n;
            prop_assert!((c - op.r).abs() < 1e-10);
            prop_assert!(s.abs() < 1e-10);
        }
    }
}
