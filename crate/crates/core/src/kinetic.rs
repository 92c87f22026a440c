//! Mean-field kinetic model solved along characteristics.
//!
//! A measure on (phase × frequency) is represented by weighted particles.
//! Weights are frozen at discretization time and each particle follows the
//! characteristic
//!
//! ```text
//! dΘ/dt = ω − K·R(t)·sin(Θ − φ(t)),      d(ln ∂Θ/∂θ)/dt = −K·R(t)·cos(Θ − φ(t))
//! ```
//!
//! where `R e^{iφ} = Σ w_j e^{iΘ_j}` is recomputed at every RK stage. The
//! weak formulation `∫ h dρ(t) = ∫ h∘Θ(t) dρ₀` then becomes a plain weighted
//! sum over particles.

use num_complex::Complex;

use crate::dynamics::{OrderParameter, OscillatorEnsemble};
use crate::error::{Error, Result};
use crate::frequency::FrequencyDistribution;
use crate::integrator::{SimConfig, StopReason};
use crate::quadrature::{integrate, midpoints};
use crate::scalar::{angular_distance, Real};

pub const DEFAULT_PHASE_NODES: usize = 1024;
pub const DEFAULT_FREQ_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle<T> {
    pub weight: T,
    /// Current position `Θ(t, θ₀, ω)`, unwrapped.
    pub theta: T,
    pub theta0: T,
    pub omega: T,
    /// `ln ∂Θ/∂θ`, zero at `t = 0`.
    pub log_jac: T,
}

impl<T: Real> Particle<T> {
    pub fn new(weight: T, theta0: T, omega: T) -> Self {
        Self { weight, theta: theta0, theta0, omega, log_jac: T::zero() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMeasure<T> {
    particles: Vec<Particle<T>>,
    coupling: T,
    time: T,
    has_atoms: bool,
}

impl<T: Real> PhaseMeasure<T> {
    /// Builds a measure at `t = 0`. Weights must be positive and sum to one.
    pub fn new(particles: Vec<Particle<T>>, coupling: T, has_atoms: bool) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::InvalidInput("measure needs at least one particle".into()));
        }
        if !coupling.is_finite() || coupling < T::zero() {
            return Err(Error::InvalidInput(format!("coupling must be finite and >= 0, got {coupling}")));
        }
        for p in &particles {
            if !(p.weight > T::zero() && p.weight.is_finite() && p.theta.is_finite() && p.omega.is_finite()) {
                return Err(Error::InvalidInput(format!("invalid particle {p:?}")));
            }
        }
        let total: T = particles.iter().map(|p| p.weight).sum();
        let tol = T::tol(1e-12);
        if (total - T::one()).abs() > tol {
            return Err(Error::InvalidMass { total: total.as_f64(), tol: tol.as_f64() });
        }
        let particles = particles.into_iter().map(|p| Particle { theta0: p.theta, log_jac: T::zero(), ..p }).collect();
        Ok(Self { particles, coupling, time: T::zero(), has_atoms })
    }

    /// The empirical measure of a finite ensemble: one atom of weight `1/N`
    /// per oscillator.
    pub fn from_ensemble(ens: &OscillatorEnsemble<T>) -> Self {
        let w = T::one() / T::from_usize_lossy(ens.len());
        let particles = ens.phases().iter().zip(ens.freqs()).map(|(&th, &om)| Particle::new(w, th, om)).collect();
        Self { particles, coupling: ens.coupling(), time: T::zero(), has_atoms: true }
    }

    pub fn particles(&self) -> &[Particle<T>] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
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

    pub fn time(&self) -> T {
        self.time
    }

    /// Whether the measure was built from atoms (or has singular parts).
    pub fn has_atoms(&self) -> bool {
        self.has_atoms
    }

    pub fn total_mass(&self) -> T {
        self.particles.iter().map(|p| p.weight).sum()
    }

    pub fn thetas(&self) -> Vec<T> {
        self.particles.iter().map(|p| p.theta).collect()
    }

    /// `Σ w e^{iΘ}` as `(re, im)`.
    pub fn mean_field(&self) -> (T, T) {
        weighted_mean_field(self.particles.iter().map(|p| (p.weight, p.theta)))
    }

    pub fn order_parameter(&self) -> OrderParameter<T> {
        let (re, im) = self.mean_field();
        OrderParameter::from_mean_field(re, im)
    }

    /// `Σ w Θ`, the unwrapped mean phase.
    pub fn mean_phase(&self) -> T {
        self.particles.iter().map(|p| p.weight * p.theta).sum()
    }
}

fn weighted_mean_field<T: Real>(it: impl Iterator<Item = (T, T)>) -> (T, T) {
    let (mut re, mut im) = (T::zero(), T::zero());
    for (w, th) in it {
        let (s, c) = th.sin_cos();
        re = re + w * c;
        im = im + w * s;
    }
    (re, im)
}

/// Phase-only laws on an arc of the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseLaw<T> {
    UniformArc {
        center: T,
        halfwidth: T,
    },
    /// Gaussian profile of width `sigma` restricted to `center ± halfwidth`.
    TruncatedGaussianArc {
        center: T,
        sigma: T,
        halfwidth: T,
    },
}

impl<T: Real> PhaseLaw<T> {
    fn validate(&self) -> Result<()> {
        let (center, halfwidth) = match *self {
            PhaseLaw::UniformArc { center, halfwidth } => (center, halfwidth),
            PhaseLaw::TruncatedGaussianArc { center, sigma, halfwidth } => {
                if !(sigma > T::zero() && sigma.is_finite()) {
                    return Err(Error::InvalidInput(format!("arc sigma must be > 0, got {sigma}")));
                }
                (center, halfwidth)
            }
        };
        if !center.is_finite() || !(halfwidth > T::zero() && halfwidth <= T::PI()) {
            return Err(Error::InvalidInput(format!("arc halfwidth must lie in (0, π], got {halfwidth}")));
        }
        Ok(())
    }

    /// `m` midpoint cells on the arc with their masses.
    fn nodes(&self, m: usize) -> Vec<(T, T)> {
        match *self {
            PhaseLaw::UniformArc { center, halfwidth } => {
                let w = T::one() / T::from_usize_lossy(m);
                midpoints(center - halfwidth, center + halfwidth, m).map(|th| (th, w)).collect()
            }
            PhaseLaw::TruncatedGaussianArc { center, sigma, halfwidth } => {
                let h = T::lit(2.0) * halfwidth / T::from_usize_lossy(m);
                let profile = |x: T| {
                    let z = (x - center) / sigma;
                    (-(z * z) / T::lit(2.0)).exp()
                };
                let mut nodes: Vec<(T, T)> = midpoints(center - halfwidth, center + halfwidth, m)
                    .map(|th| {
                        let half = h / T::lit(2.0);
                        (th, integrate(profile, th - half, th + half, T::tol(1e-16)))
                    })
                    .collect();
                let total: T = nodes.iter().map(|n| n.1).sum();
                nodes.iter_mut().for_each(|n| n.1 = n.1 / total);
                nodes
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom<T> {
    pub weight: T,
    pub theta: T,
    pub omega: T,
}

/// Initial data for the kinetic solver.
#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec<T> {
    /// Explicit atoms, passed through unchanged.
    AtomList(Vec<Atom<T>>),
    /// Identical oscillators (`ω = 0`) uniform on an arc.
    UniformArc { center: T, halfwidth: T },
    /// Identical oscillators (`ω = 0`) with a truncated Gaussian profile.
    TruncatedGaussianArc { center: T, sigma: T, halfwidth: T },
    /// `ρ₀(θ) g(ω)` on a tensor grid of `m × freq_nodes` cells.
    Product { phase: PhaseLaw<T>, freq: FrequencyDistribution<T>, freq_nodes: usize },
    /// The phase-locked state `g(ω) δ(θ − φ* − arcsin(ω/KR))`, one atom per
    /// frequency cell (`m` cells).
    PhaseLocked { freq: FrequencyDistribution<T>, phi_star: T, kr: T },
}

/// Turns a density specification into a weighted-particle measure with `m`
/// phase nodes per frequency.
pub fn discretize<T: Real>(spec: &DensitySpec<T>, m: usize, coupling: T) -> Result<PhaseMeasure<T>> {
    if m == 0 {
        return Err(Error::InvalidInput("node count must be at least 1".into()));
    }
    let (particles, has_atoms) = match spec {
        DensitySpec::AtomList(atoms) => {
            let ps = atoms.iter().map(|a| Particle::new(a.weight, a.theta, a.omega)).collect();
            (ps, true)
        }
        DensitySpec::UniformArc { center, halfwidth } => {
            let law = PhaseLaw::UniformArc { center: *center, halfwidth: *halfwidth };
            law.validate()?;
            (law.nodes(m).into_iter().map(|(th, w)| Particle::new(w, th, T::zero())).collect(), false)
        }
        DensitySpec::TruncatedGaussianArc { center, sigma, halfwidth } => {
            let law = PhaseLaw::TruncatedGaussianArc { center: *center, sigma: *sigma, halfwidth: *halfwidth };
            law.validate()?;
            (law.nodes(m).into_iter().map(|(th, w)| Particle::new(w, th, T::zero())).collect(), false)
        }
        DensitySpec::Product { phase, freq, freq_nodes } => {
            phase.validate()?;
            freq.validate()?;
            let phase_nodes = phase.nodes(m);
            let freq_nodes = freq.nodes(*freq_nodes);
            let mut ps = Vec::with_capacity(phase_nodes.len() * freq_nodes.len());
            for &(om, wf) in &freq_nodes {
                for &(th, wp) in &phase_nodes {
                    ps.push(Particle::new(wf * wp, th, om));
                }
            }
            (ps, false)
        }
        DensitySpec::PhaseLocked { freq, phi_star, kr } => {
            freq.validate()?;
            if !(*kr > T::zero()) || freq.max_abs() > *kr {
                return Err(Error::Domain(format!("locked state needs K·R = {kr} >= max|ω| = {}", freq.max_abs())));
            }
            let ps = freq
                .nodes(m)
                .into_iter()
                .map(|(om, w)| Particle::new(w, *phi_star + (om / *kr).max(-T::one()).min(T::one()).asin(), om))
                .collect();
            (ps, true)
        }
    };
    PhaseMeasure::new(particles, coupling, has_atoms)
}

/// Stage buffers for the kinetic RK4 step.
struct KineticWork<T> {
    base: Vec<T>,
    stage: Vec<T>,
    k: [Vec<T>; 4],
    j: [Vec<T>; 4],
}

impl<T: Real> KineticWork<T> {
    fn new(n: usize) -> Self {
        let z = || vec![T::zero(); n];
        Self { base: z(), stage: z(), k: [z(), z(), z(), z()], j: [z(), z(), z(), z()] }
    }
}

/// Characteristic and log-Jacobian velocities at positions `thetas`, with the
/// mean field taken from the same positions.
fn stage_derivatives<T: Real>(
    particles: &[Particle<T>],
    thetas: &[T],
    coupling: T,
    dtheta: &mut [T],
    dlogjac: &mut [T],
) {
    let (re, im) = weighted_mean_field(particles.iter().zip(thetas).map(|(p, &th)| (p.weight, th)));
    for (i, (p, &th)) in particles.iter().zip(thetas).enumerate() {
        let (s, c) = th.sin_cos();
        // R sin(θ − φ) = Im(e^{iθ} conj Z),  R cos(θ − φ) = Re(e^{iθ} conj Z).
        dtheta[i] = p.omega - coupling * (s * re - c * im);
        dlogjac[i] = -coupling * (c * re + s * im);
    }
}

/// RK4 step assuming `w.k[0]`/`w.j[0]` hold the derivatives at the current state.
fn advance<T: Real>(meas: &mut PhaseMeasure<T>, dt: T, w: &mut KineticWork<T>) {
    let half = dt / T::lit(2.0);
    let two = T::lit(2.0);
    let coupling = meas.coupling;
    for (b, p) in w.base.iter_mut().zip(&meas.particles) {
        *b = p.theta;
    }
    let KineticWork { base, stage, k, j } = w;
    let (k1, rest) = k.split_at_mut(1);
    let (k2, rest) = rest.split_at_mut(1);
    let (k3, k4) = rest.split_at_mut(1);
    let (j1, jrest) = j.split_at_mut(1);
    let (j2, jrest) = jrest.split_at_mut(1);
    let (j3, j4) = jrest.split_at_mut(1);

    for i in 0..stage.len() {
        stage[i] = base[i] + half * k1[0][i];
    }
    stage_derivatives(&meas.particles, stage, coupling, &mut k2[0], &mut j2[0]);
    for i in 0..stage.len() {
        stage[i] = base[i] + half * k2[0][i];
    }
    stage_derivatives(&meas.particles, stage, coupling, &mut k3[0], &mut j3[0]);
    for i in 0..stage.len() {
        stage[i] = base[i] + dt * k3[0][i];
    }
    stage_derivatives(&meas.particles, stage, coupling, &mut k4[0], &mut j4[0]);

    let sixth = dt / T::lit(6.0);
    for (i, p) in meas.particles.iter_mut().enumerate() {
        p.theta = base[i] + sixth * (k1[0][i] + two * (k2[0][i] + k3[0][i]) + k4[0][i]);
        p.log_jac = p.log_jac + sixth * (j1[0][i] + two * (j2[0][i] + j3[0][i]) + j4[0][i]);
    }
}

fn derivatives_at<T: Real>(meas: &PhaseMeasure<T>, w: &mut KineticWork<T>) {
    let thetas: Vec<T> = meas.particles.iter().map(|p| p.theta).collect();
    let KineticWork { k, j, .. } = w;
    stage_derivatives(&meas.particles, &thetas, meas.coupling, &mut k[0], &mut j[0]);
}

fn check_finite<T: Real>(meas: &PhaseMeasure<T>) -> Result<()> {
    if meas.particles.iter().any(|p| !p.theta.is_finite() || !p.log_jac.is_finite()) {
        return Err(Error::NonFinite { time: meas.time.as_f64() });
    }
    Ok(())
}

/// One RK4 step of the characteristics and their log-Jacobians.
pub fn kinetic_step<T: Real>(meas: &PhaseMeasure<T>, dt: T) -> Result<PhaseMeasure<T>> {
    if !(dt > T::zero() && dt.is_finite()) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let mut out = meas.clone();
    let mut w = KineticWork::new(meas.len());
    derivatives_at(&out, &mut w);
    advance(&mut out, dt, &mut w);
    out.time = out.time + dt;
    check_finite(&out)?;
    Ok(out)
}

/// Characteristic velocities `dΘ/dt` at the current state.
pub fn velocities<T: Real>(meas: &PhaseMeasure<T>) -> Vec<T> {
    let mut w = KineticWork::new(meas.len());
    derivatives_at(meas, &mut w);
    w.k[0].clone()
}

/// `∫ h dρ(t) = Σ w h(Θ)` for a 2π-periodic `h`.
pub fn observable<T: Real, F: Fn(T) -> T>(meas: &PhaseMeasure<T>, h: F) -> T {
    meas.particles.iter().map(|p| p.weight * h(p.theta)).sum()
}

/// Joint observable `Σ w h(Θ, ω)`.
pub fn joint_observable<T: Real, F: Fn(T, T) -> T>(meas: &PhaseMeasure<T>, h: F) -> T {
    meas.particles.iter().map(|p| p.weight * h(p.theta, p.omega)).sum()
}

/// `S(t) − S(0)` for the entropy `∫ f ln f`, from `f(t, Θ) ∂Θ/∂θ = f₀(θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyChange<T> {
    pub value: T,
    /// The measure has atoms, so the entropy itself is not defined; `value`
    /// is still `−Σ w ln ∂Θ/∂θ`.
    pub atoms_present: bool,
}

pub fn entropy_change<T: Real>(meas: &PhaseMeasure<T>) -> EntropyChange<T> {
    EntropyChange { value: -log_jacobian_functional(meas), atoms_present: meas.has_atoms }
}

/// `Σ w ln ∂Θ/∂θ`; its time derivative is `−K R²`.
pub fn log_jacobian_functional<T: Real>(meas: &PhaseMeasure<T>) -> T {
    meas.particles.iter().map(|p| p.weight * p.log_jac).sum()
}

/// `H = Σ w Θ ω + K R²/2`, non-decreasing along solutions.
pub fn h_functional<T: Real>(meas: &PhaseMeasure<T>) -> T {
    let drift: T = meas.particles.iter().map(|p| p.weight * p.theta * p.omega).sum();
    let r = meas.order_parameter().r;
    drift + meas.coupling * r * r / T::lit(2.0)
}

/// `Σ w e^{iΘ} ω^k`; `k = 0` is the complex order parameter.
pub fn fourier_moment<T: Real>(meas: &PhaseMeasure<T>, k: u32) -> Complex<T> {
    let (mut re, mut im) = (T::zero(), T::zero());
    for p in &meas.particles {
        let (s, c) = p.theta.sin_cos();
        let wk = p.weight * pow_u(p.omega, k);
        re = re + wk * c;
        im = im + wk * s;
    }
    Complex::new(re, im)
}

fn pow_u<T: Real>(x: T, k: u32) -> T {
    (0..k).fold(T::one(), |acc, _| acc * x)
}

/// `(dR/dt, R dφ/dt)` for the non-identical kinetic model with coupling `k`.
pub fn r_phi_dot_nonidentical<T: Real>(meas: &PhaseMeasure<T>, k: T) -> Result<(T, T)> {
    let op = meas.order_parameter();
    let phi = op.phi_or_err()?;
    let (mut sin2, mut sincos, mut w_sin, mut w_cos) = (T::zero(), T::zero(), T::zero(), T::zero());
    for p in &meas.particles {
        let (s, c) = (p.theta - phi).sin_cos();
        sin2 = sin2 + p.weight * s * s;
        sincos = sincos + p.weight * s * c;
        w_sin = w_sin + p.weight * p.omega * s;
        w_cos = w_cos + p.weight * p.omega * c;
    }
    let r_dot = k * op.r * sin2 - w_sin;
    let r_phi_dot = -k * op.r * sincos + w_cos;
    Ok((r_dot, r_phi_dot))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// Within tolerance of `θ⁺(ω) = φ* + arcsin(ω/KR*)`.
    Plus,
    /// Within tolerance of `θ⁻(ω) = π + φ* − arcsin(ω/KR*)`.
    Minus,
    Unresolved,
    /// `|ω| > K R*`: no locked position exists.
    Drifting,
}

/// Tags each particle by the stationary support branch it sits on.
pub fn characteristic_targets<T: Real>(meas: &PhaseMeasure<T>, k: T, r_star: T, phi_star: T, tol: T) -> Vec<Target> {
    let kr = k * r_star;
    meas.particles
        .iter()
        .map(|p| {
            if p.omega.abs() > kr {
                return Target::Drifting;
            }
            let s = (p.omega / kr).max(-T::one()).min(T::one()).asin();
            if angular_distance(p.theta, phi_star + s) < tol {
                Target::Plus
            } else if angular_distance(p.theta, T::PI() + phi_star - s) < tol {
                Target::Minus
            } else {
                Target::Unresolved
            }
        })
        .collect()
}

/// Mass and count per [`Target`] tag.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TargetSummary<T> {
    pub plus_mass: T,
    pub minus_mass: T,
    pub unresolved_mass: T,
    pub drifting_mass: T,
    pub plus_count: usize,
    pub minus_count: usize,
    pub unresolved_count: usize,
    pub drifting_count: usize,
}

pub fn summarize_targets<T: Real>(meas: &PhaseMeasure<T>, tags: &[Target]) -> TargetSummary<T> {
    let mut s = TargetSummary::default();
    for (p, t) in meas.particles.iter().zip(tags) {
        match t {
            Target::Plus => {
                s.plus_mass = s.plus_mass + p.weight;
                s.plus_count += 1;
            }
            Target::Minus => {
                s.minus_mass = s.minus_mass + p.weight;
                s.minus_count += 1;
            }
            Target::Unresolved => {
                s.unresolved_mass = s.unresolved_mass + p.weight;
                s.unresolved_count += 1;
            }
            Target::Drifting => {
                s.drifting_mass = s.drifting_mass + p.weight;
                s.drifting_count += 1;
            }
        }
    }
    s
}

/// Callback handed each accepted state of a kinetic run.
pub type Observer<'a, T> = &'a mut dyn FnMut(&PhaseMeasure<T>);

/// Recorded kinetic run; all series aligned with `times`.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticTrajectory<T> {
    pub times: Vec<T>,
    pub r_series: Vec<T>,
    pub phi_series: Vec<Option<T>>,
    /// Mass-normalized potential `R²/2`.
    pub u_series: Vec<T>,
    pub mean_phase_series: Vec<T>,
    pub h_series: Vec<T>,
    pub entropy_series: Vec<T>,
    pub final_measure: PhaseMeasure<T>,
    pub stop: StopReason,
}

impl<T: Real> KineticTrajectory<T> {
    fn record(&mut self, meas: &PhaseMeasure<T>) {
        let op = meas.order_parameter();
        self.times.push(meas.time);
        self.r_series.push(op.r);
        self.phi_series.push(op.phi);
        self.u_series.push(op.r * op.r / T::lit(2.0));
        self.mean_phase_series.push(meas.mean_phase());
        self.h_series.push(h_functional(meas));
        self.entropy_series.push(entropy_change(meas).value);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Integrates the characteristics to `t_max` (or stationarity, tested as
/// `max |dΘ/dt| < tol`). `cfg.seed` is unused.
///
/// The optional `observer` sees every accepted state, including the initial one.
pub fn simulate_kinetic<T: Real>(
    meas: &PhaseMeasure<T>,
    cfg: &SimConfig<T>,
    mut observer: Option<Observer<'_, T>>,
) -> Result<KineticTrajectory<T>> {
    cfg.validate()?;
    let n_steps = cfg.n_steps();
    let mut state = meas.clone();
    let start = state.time;
    let mut w = KineticWork::new(state.len());
    let mut traj = KineticTrajectory {
        times: Vec::new(),
        r_series: Vec::new(),
        phi_series: Vec::new(),
        u_series: Vec::new(),
        mean_phase_series: Vec::new(),
        h_series: Vec::new(),
        entropy_series: Vec::new(),
        final_measure: meas.clone(),
        stop: StopReason::Horizon,
    };
    traj.record(&state);
    if let Some(obs) = observer.as_mut() {
        obs(&state);
    }
    derivatives_at(&state, &mut w);
    let max_abs = |v: &[T]| v.iter().fold(T::zero(), |m, x| m.max(x.abs()));

    let mut step = 0usize;
    let mut last_recorded = 0usize;
    loop {
        if max_abs(&w.k[0]) < cfg.stationarity_tol {
            traj.stop = StopReason::Stationary;
            break;
        }
        if step == n_steps {
            break;
        }
        advance(&mut state, cfg.dt, &mut w);
        step += 1;
        state.time = start + cfg.dt * T::from_usize_lossy(step);
        check_finite(&state)?;
        derivatives_at(&state, &mut w);
        if let Some(obs) = observer.as_mut() {
            obs(&state);
        }
        if step.is_multiple_of(cfg.record_every) {
            traj.record(&state);
            last_recorded = step;
        }
    }
    if last_recorded != step {
        traj.record(&state);
    }
    traj.final_measure = state;
    Ok(traj)
}
