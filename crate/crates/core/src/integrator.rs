//! Fixed-step RK4 integration of the finite-N system.

use rand::RngCore;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;

use crate::dynamics::{h_functional_finite, mean_phase, order_parameter_of, rhs_into, OscillatorEnsemble};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_STATIONARITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig<T> {
    pub dt: T,
    pub t_max: T,
    pub record_every: usize,
    pub stationarity_tol: T,
    pub seed: u64,
}

impl<T: Real> Default for SimConfig<T> {
    fn default() -> Self {
        Self {
            dt: T::lit(DEFAULT_DT),
            t_max: T::lit(100.0),
            record_every: 1,
            stationarity_tol: T::lit(DEFAULT_STATIONARITY_TOL),
            seed: 0,
        }
    }
}

impl<T: Real> SimConfig<T> {
    pub fn new(dt: T, t_max: T) -> Self {
        Self { dt, t_max, ..Self::default() }
    }

    pub fn record_every(mut self, stride: usize) -> Self {
        self.record_every = stride;
        self
    }

    pub fn stationarity_tol(mut self, tol: T) -> Self {
        self.stationarity_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |x: T| x.is_finite() && x > T::zero();
        if !pos(self.dt) || !pos(self.t_max) || !pos(self.stationarity_tol) {
            return Err(Error::InvalidInput(format!(
                "dt, t_max and stationarity_tol must be positive and finite (dt={}, t_max={}, tol={})",
                self.dt, self.t_max, self.stationarity_tol
            )));
        }
        if self.dt > self.t_max {
            return Err(Error::InvalidInput(format!("dt = {} exceeds t_max = {}", self.dt, self.t_max)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidInput("record_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of fixed steps covering `[0, t_max]`; the sample times are
    /// `step · dt`.
    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round().to_usize().unwrap_or(0).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// `max_i |dθ_i/dt|` dropped below the stationarity tolerance.
    Stationary,
    /// Ran to `t_max` without meeting the stationarity test.
    Horizon,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::Stationary => "stationary",
            StopReason::Horizon => "horizon",
        }
    }
}

/// Recorded run. All series are aligned with `times`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<OscillatorEnsemble<T>>,
    pub r_series: Vec<T>,
    pub phi_series: Vec<Option<T>>,
    /// Gradient potential, evaluated through `U = N R²/2`.
    pub u_series: Vec<T>,
    pub mean_phase_series: Vec<T>,
    pub h_series: Vec<T>,
    pub stop: StopReason,
}

impl<T: Real> Trajectory<T> {
    fn with_capacity(cap: usize) -> Self {
        Self {
            times: Vec::with_capacity(cap),
            states: Vec::with_capacity(cap),
            r_series: Vec::with_capacity(cap),
            phi_series: Vec::with_capacity(cap),
            u_series: Vec::with_capacity(cap),
            mean_phase_series: Vec::with_capacity(cap),
            h_series: Vec::with_capacity(cap),
            stop: StopReason::Horizon,
        }
    }

    fn record(&mut self, t: T, ens: &OscillatorEnsemble<T>) {
        let op = order_parameter_of(ens.phases());
        let n = T::from_usize_lossy(ens.len());
        self.times.push(t);
        self.r_series.push(op.r);
        self.phi_series.push(op.phi);
        self.u_series.push(n * op.r * op.r / T::lit(2.0));
        self.mean_phase_series.push(mean_phase(ens));
        self.h_series.push(h_functional_finite(ens));
        self.states.push(ens.clone());
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &OscillatorEnsemble<T> {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    pub fn final_time(&self) -> T {
        *self.times.last().expect("non-empty trajectory")
    }
}

/// Scratch buffers for one RK4 step.
pub(crate) struct Rk4Work<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    stage: Vec<T>,
}

impl<T: Real> Rk4Work<T> {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            k1: vec![T::zero(); n],
            k2: vec![T::zero(); n],
            k3: vec![T::zero(); n],
            k4: vec![T::zero(); n],
            stage: vec![T::zero(); n],
        }
    }
}

/// Advances `phases` by one RK4 step, taking `k1` as the already-evaluated
/// derivative at the start of the step.
fn rk4_advance<T: Real>(phases: &mut [T], freqs: &[T], coupling: T, dt: T, w: &mut Rk4Work<T>) {
    let half = dt / T::lit(2.0);
    let two = T::lit(2.0);
    for ((s, &p), &k) in w.stage.iter_mut().zip(phases.iter()).zip(&w.k1) {
        *s = p + half * k;
    }
    rhs_into(&w.stage, freqs, coupling, &mut w.k2);
    for ((s, &p), &k) in w.stage.iter_mut().zip(phases.iter()).zip(&w.k2) {
        *s = p + half * k;
    }
    rhs_into(&w.stage, freqs, coupling, &mut w.k3);
    for ((s, &p), &k) in w.stage.iter_mut().zip(phases.iter()).zip(&w.k3) {
        *s = p + dt * k;
    }
    rhs_into(&w.stage, freqs, coupling, &mut w.k4);
    let sixth = dt / T::lit(6.0);
    for (i, p) in phases.iter_mut().enumerate() {
        *p = *p + sixth * (w.k1[i] + two * (w.k2[i] + w.k3[i]) + w.k4[i]);
    }
}

/// One classical RK4 step of the finite-N vector field.
pub fn step_rk4<T: Real>(ens: &OscillatorEnsemble<T>, dt: T) -> OscillatorEnsemble<T> {
    let mut out = ens.clone();
    let mut w = Rk4Work::new(ens.len());
    rhs_into(ens.phases(), ens.freqs(), ens.coupling(), &mut w.k1);
    rk4_advance(out.phases_mut(), ens.freqs(), ens.coupling(), dt, &mut w);
    out
}

fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// `max_i |dθ_i/dt| < tol`.
pub fn detect_stationarity<T: Real>(ens: &OscillatorEnsemble<T>, tol: T) -> bool {
    max_abs(&crate::dynamics::finite_n_rhs(ens)) < tol
}

/// Integrates until `t_max` or until the stationarity test passes.
///
/// The initial and final states are always recorded; intermediate states
/// every `record_every` steps.
pub fn simulate<T: Real>(ens: &OscillatorEnsemble<T>, cfg: &SimConfig<T>) -> Result<Trajectory<T>> {
    cfg.validate()?;
    let n_steps = cfg.n_steps();
    let mut traj = Trajectory::with_capacity(n_steps / cfg.record_every + 2);
    let mut state = ens.clone();
    let freqs = ens.freqs().to_vec();
    let coupling = ens.coupling();
    let mut w = Rk4Work::new(ens.len());

    traj.record(T::zero(), &state);
    rhs_into(state.phases(), &freqs, coupling, &mut w.k1);

    let mut last_recorded = 0usize;
    let mut step = 0usize;
    let mut stop = StopReason::Horizon;
    loop {
        if max_abs(&w.k1) < cfg.stationarity_tol {
            stop = StopReason::Stationary;
            break;
        }
        if step == n_steps {
            break;
        }
        rk4_advance(state.phases_mut(), &freqs, coupling, cfg.dt, &mut w);
        step += 1;
        let t = cfg.dt * T::from_usize_lossy(step);
        if state.phases().iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { time: t.as_f64() });
        }
        rhs_into(state.phases(), &freqs, coupling, &mut w.k1);
        if step.is_multiple_of(cfg.record_every) {
            traj.record(t, &state);
            last_recorded = step;
        }
    }
    if last_recorded != step {
        traj.record(cfg.dt * T::from_usize_lossy(step), &state);
    }
    traj.stop = stop;
    Ok(traj)
}

/// Deterministic source of initial conditions.
///
/// The stream is SplitMix64 seeded with `seed`; each draw `u` maps to the unit
/// interval as `(u >> 11) · 2⁻⁵³`.
pub fn seeded_rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

pub fn unit_uniform(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `n` phases drawn uniformly from `[-π, π)`.
pub fn random_phases<T: Real>(n: usize, rng: &mut SplitMix64) -> Vec<T> {
    (0..n).map(|_| T::lit(std::f64::consts::PI * (2.0 * unit_uniform(rng) - 1.0))).collect()
}

/// Identical oscillators with seeded uniform phases.
pub fn random_identical_ensemble<T: Real>(n: usize, coupling: T, seed: u64) -> Result<OscillatorEnsemble<T>> {
    let mut rng = seeded_rng(seed);
    OscillatorEnsemble::identical(random_phases(n, &mut rng), coupling)
}
