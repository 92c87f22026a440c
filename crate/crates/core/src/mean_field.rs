//! Partially synchronized stationary states of the kinetic model.
//!
//! A stationary density concentrates on `θ⁺(ω) = φ* + arcsin(ω/KR)` (and
//! possibly the antipodal branch `θ⁻(ω) = π + φ* − arcsin(ω/KR)`), where `R`
//! solves the self-consistency equation
//!
//! ```text
//! K R² = ∫ √((KR)² − ω²) [g⁺(ω) − g⁻(ω)] dω,      g⁺ + g⁻ = g.
//! ```
//!
//! The stable branch is `g⁺ = g`, `g⁻ = 0`, with `R` the largest root.

use crate::error::{Error, Result};
use crate::frequency::FrequencyDistribution;
use crate::kinetic::DensitySpec;
use crate::quadrature::integrate;
use crate::scalar::{wrap_angle, Real};

pub const ROOT_TOL: f64 = 1e-10;
pub const DEFAULT_GRID: usize = 4096;
pub const QUAD_TOL: f64 = 1e-12;
pub const KC_TOL: f64 = 1e-9;
pub const K_MAX: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// Residual bound every reported root must meet.
    pub root_tol: T,
    /// Absolute tolerance of the adaptive ω quadrature.
    pub quad_tol: T,
    /// Scan resolution on `[max|ω|/K, 1]`.
    pub grid: usize,
    /// Bracket width at which the coupling bisection stops.
    pub kc_tol: T,
    /// Largest coupling tried when bracketing `K_c`.
    pub k_max: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            root_tol: T::tol(ROOT_TOL),
            quad_tol: T::tol(QUAD_TOL),
            grid: DEFAULT_GRID,
            kc_tol: T::tol(KC_TOL),
            k_max: T::lit(K_MAX),
        }
    }
}

/// `∫ √(a² − ω²) g(ω) (1 − 2 s(ω)) dω` with `a = KR ≥ sup|ω|`, where `s(ω)` is
/// the share of `g` placed on the antipodal branch (`g⁻ = s g`).
///
/// Densities are integrated after substituting `ω = a sin u`, which removes
/// the square-root endpoint behaviour.
pub fn branch_integral<T: Real, S: Fn(T) -> T>(g: &FrequencyDistribution<T>, a: T, minus_share: S, quad_tol: T) -> T {
    let weight = |w: T| T::one() - T::lit(2.0) * minus_share(w);
    let root = |w: T| (a * a - w * w).max(T::zero()).sqrt();
    match g {
        FrequencyDistribution::Dirac { omega0 } => root(*omega0) * weight(*omega0),
        FrequencyDistribution::Discrete { atoms } => atoms.iter().map(|&(w, p)| p * root(w) * weight(w)).sum(),
        _ => {
            if !(a > T::zero()) {
                return T::zero();
            }
            let (lo, hi) = g.support();
            let clamp = |x: T| x.max(-T::one()).min(T::one());
            let (u_lo, u_hi) = (clamp(lo / a).asin(), clamp(hi / a).asin());
            integrate(
                |u: T| {
                    let (s, c) = u.sin_cos();
                    let w = a * s;
                    a * a * c * c * g.pdf(w) * weight(w)
                },
                u_lo,
                u_hi,
                quad_tol,
            )
        }
    }
}

/// Residual of the generalized equation, `∫ √((KR)² − ω²)(g⁺ − g⁻) − K R²`.
pub fn generalized_residual<T: Real, S: Fn(T) -> T>(
    g: &FrequencyDistribution<T>,
    k: T,
    r: T,
    minus_share: S,
    quad_tol: T,
) -> T {
    branch_integral(g, k * r, minus_share, quad_tol) - k * r * r
}

/// Residual of the stable-branch equation (`g⁻ ≡ 0`).
pub fn self_consistency_residual<T: Real>(g: &FrequencyDistribution<T>, k: T, r: T, quad_tol: T) -> T {
    generalized_residual(g, k, r, |_| T::zero(), quad_tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfConsistencyResult<T> {
    /// Sorted roots in `(0, 1]`.
    pub roots: Vec<T>,
    /// The largest root, selected for the stable stationary state.
    pub largest: Option<T>,
    pub k_supercritical: bool,
}

pub fn self_consistency_roots<T: Real>(
    g: &FrequencyDistribution<T>,
    k: T,
    grid: usize,
) -> Result<SelfConsistencyResult<T>> {
    let opts = SolverOptions { grid, ..SolverOptions::default() };
    self_consistency_roots_with(g, k, &opts)
}

/// Scans the residual on a uniform grid over `[max|ω|/K, 1]` (smaller `R`
/// would leave part of the support unlocked) and bisects every sign change.
pub fn self_consistency_roots_with<T: Real>(
    g: &FrequencyDistribution<T>,
    k: T,
    opts: &SolverOptions<T>,
) -> Result<SelfConsistencyResult<T>> {
    g.validate()?;
    if !(k > T::zero() && k.is_finite()) {
        return Err(Error::InvalidInput(format!("coupling must be positive, got {k}")));
    }
    if opts.grid < 2 {
        return Err(Error::InvalidInput("scan grid needs at least 2 cells".into()));
    }
    let r_lo = g.max_abs() / k;
    if r_lo > T::one() {
        return Err(Error::SupportTooWide { ratio: r_lo.as_f64() });
    }
    let f = |r: T| self_consistency_residual(g, k, r, opts.quad_tol);
    let span = T::one() - r_lo;
    let cells = opts.grid;
    let node = |i: usize| {
        if i == cells {
            T::one()
        } else {
            r_lo + span * T::from_usize_lossy(i) / T::from_usize_lossy(cells)
        }
    };
    let samples: Vec<(T, T)> = (0..=cells).map(|i| (node(i), f(node(i)))).collect();
    let is_zero = |fx: T| fx.abs() <= opts.root_tol;

    let mut roots = Vec::new();
    for (i, &(r, fr)) in samples.iter().enumerate() {
        if is_zero(fr) {
            if r > T::zero() {
                roots.push(r);
            }
            continue;
        }
        let Some(&(r_next, f_next)) = samples.get(i + 1) else { continue };
        if is_zero(f_next) || fr.signum() == f_next.signum() {
            continue;
        }
        let root = bisect(&f, r, fr, r_next);
        if f(root).abs() <= opts.root_tol {
            roots.push(root);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    roots.dedup();
    let largest = roots.last().copied();
    Ok(SelfConsistencyResult { k_supercritical: !roots.is_empty(), largest, roots })
}

fn bisect<T: Real, F: Fn(T) -> T>(f: &F, mut lo: T, f_lo: T, mut hi: T) -> T {
    let sign_lo = f_lo.signum();
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return mid;
        }
        if fm.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / T::lit(2.0)
}

/// Infimum of the couplings for which the self-consistency equation has a
/// root, found by bisection between verified sub- and supercritical values.
pub fn critical_coupling<T: Real>(g: &FrequencyDistribution<T>) -> Result<T> {
    critical_coupling_with(g, &SolverOptions::default())
}

pub fn critical_coupling_with<T: Real>(g: &FrequencyDistribution<T>, opts: &SolverOptions<T>) -> Result<T> {
    g.validate()?;
    let spread = g.max_abs();
    if spread == T::zero() {
        // Every K > 0 admits R = 1.
        return Ok(T::zero());
    }
    let supercritical = |k: T| -> Result<bool> {
        match self_consistency_roots_with(g, k, opts) {
            Ok(res) => Ok(res.k_supercritical),
            Err(Error::SupportTooWide { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };
    // Below K = max|ω| no R ≤ 1 locks the whole support.
    let mut lo = spread;
    if supercritical(lo)? {
        return Ok(lo);
    }
    let mut hi = lo;
    loop {
        hi = (hi * T::lit(2.0)).min(opts.k_max);
        if supercritical(hi)? {
            break;
        }
        if hi >= opts.k_max {
            return Err(Error::BracketNotFound { k_max: opts.k_max.as_f64() });
        }
        lo = hi;
    }
    while hi - lo > opts.kc_tol {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if supercritical(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// The stable stationary state `f* = g(ω) δ(θ − θ⁺(ω))` for given `K`, `R`, `φ*`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDensity<T> {
    g: FrequencyDistribution<T>,
    kr: T,
    phi_star: T,
}

pub fn stationary_density<T: Real>(
    g: &FrequencyDistribution<T>,
    k: T,
    r: T,
    phi_star: T,
) -> Result<StationaryDensity<T>> {
    g.validate()?;
    let kr = k * r;
    let spread = g.max_abs();
    if !(kr > T::zero()) || kr < spread * (T::one() - T::tol(1e-12)) {
        return Err(Error::Domain(format!("K·R = {kr} does not cover the frequency support (max|ω| = {spread})")));
    }
    Ok(StationaryDensity { g: g.clone(), kr: kr.max(spread), phi_star })
}

impl<T: Real> StationaryDensity<T> {
    pub fn kr(&self) -> T {
        self.kr
    }

    pub fn phi_star(&self) -> T {
        self.phi_star
    }

    /// `θ⁺(ω)`; `None` outside `|ω| ≤ KR`.
    pub fn support_curve(&self, omega: T) -> Option<T> {
        (omega.abs() <= self.kr).then(|| self.phi_star + (omega / self.kr).asin())
    }

    /// `θ⁻(ω)`, the antipodal (unstable) branch.
    pub fn antipodal_curve(&self, omega: T) -> Option<T> {
        (omega.abs() <= self.kr).then(|| T::PI() + self.phi_star - (omega / self.kr).asin())
    }

    /// Marginal `ρ*(θ) = KR |cos(θ − φ*)| g(KR sin(θ − φ*))` on
    /// `|θ − φ*| < π/2`, zero elsewhere. `None` for atomic `g`, whose marginal
    /// is a sum of atoms (see [`Self::atoms`]).
    pub fn marginal(&self, theta: T) -> Option<T> {
        if self.g.is_atomic() {
            return None;
        }
        let x = wrap_angle(theta - self.phi_star);
        if x.abs() >= T::FRAC_PI_2() {
            return Some(T::zero());
        }
        Some(self.kr * x.cos().abs() * self.g.pdf(self.kr * x.sin()))
    }

    /// Atoms `(θ, mass)` of the marginal for atomic `g`.
    pub fn atoms(&self) -> Option<Vec<(T, T)>> {
        self.g.is_atomic().then(|| {
            self.g.nodes(1).into_iter().map(|(w, p)| (self.support_curve(w).expect("support covered"), p)).collect()
        })
    }

    /// True when `KR` equals `sup|ω|`: the support curve reaches `φ* ± π/2`
    /// and the formula is evaluated right at that endpoint.
    pub fn touches_support_edge(&self) -> bool {
        let spread = self.g.max_abs();
        (self.kr - spread).abs() <= T::tol(1e-12) * self.kr
    }

    /// Phase angles where `KR sin(θ − φ*)` crosses the support bounds: the
    /// kinks of the marginal, useful as quadrature breakpoints.
    pub fn marginal_breakpoints(&self) -> Vec<T> {
        let (lo, hi) = self.g.support();
        let mut pts = vec![
            self.phi_star + (lo / self.kr).max(-T::one()).asin(),
            self.phi_star + (hi / self.kr).min(T::one()).asin(),
        ];
        pts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        pts
    }

    /// Initial data sampling `f*` with one atom per frequency cell.
    pub fn density_spec(&self) -> DensitySpec<T> {
        DensitySpec::PhaseLocked { freq: self.g.clone(), phi_star: self.phi_star, kr: self.kr }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize;
    use crate::quadrature::integrate_with_breaks;
    use std::f64::consts::{FRAC_PI_2, PI};

    const QT: f64 = 1e-12;

    #[test]
    fn dirac_root_is_one() {
        let g = FrequencyDistribution::dirac(0.0);
        for &k in &[0.3, 1.0, 2.0, 7.5] {
            let res = self_consistency_roots(&g, k, 4096).unwrap();
            assert_eq!(res.roots, vec![1.0]);
            assert_eq!(res.largest, Some(1.0));
            assert!(res.k_supercritical);
        }
    }

    #[test]
    fn uniform_integral_closed_form() {
        // ∫_{−γ}^{γ} √(a² − ω²) dω/(2γ) = (γ√(a²−γ²) + a² arcsin(γ/a)) / (2γ).
        let gamma = 0.7f64;
        let g = FrequencyDistribution::uniform(0.0, gamma).unwrap();
        for &a in &[0.7f64, 0.75, 1.0, 2.3] {
            let closed = (gamma * (a * a - gamma * gamma).sqrt() + a * a * (gamma / a).asin()) / (2.0 * gamma);
            let direct = integrate(|w: f64| (a * a - w * w).max(0.0).sqrt() / (2.0 * gamma), -gamma, gamma, 1e-14);
            let v = branch_integral(&g, a, |_| 0.0, QT);
            assert!((v - closed).abs() < 1e-12, "a={a}: {v} vs {closed}");
            assert!((direct - closed).abs() < 1e-10);
        }
    }

    #[test]
    fn two_atom_roots_are_analytic() {
        // K R² = √(K²R² − ω₀²)  ⇔  R² = (1 ± √(1 − 4ω₀²/K²)) / 2.
        let w0 = 0.4f64;
        let g = FrequencyDistribution::discrete(vec![(-w0, 0.5), (w0, 0.5)]).unwrap();
        let k = 1.5f64;
        let disc = (1.0 - 4.0 * w0 * w0 / (k * k)).sqrt();
        let expect = [((1.0 - disc) / 2.0).sqrt(), ((1.0 + disc) / 2.0).sqrt()];
        let res = self_consistency_roots(&g, k, 4096).unwrap();
        assert_eq!(res.roots.len(), 2);
        for (r, e) in res.roots.iter().zip(expect) {
            assert!((r - e).abs() < 1e-10, "{r} vs {e}");
        }
        // Below K = 2ω₀ the quadratic has no real solution.
        assert!(!self_consistency_roots(&g, 0.79, 4096).unwrap().k_supercritical);
    }

    #[test]
    fn support_too_wide() {
        let g = FrequencyDistribution::uniform(0.0, 2.0).unwrap();
        assert!(matches!(self_consistency_roots(&g, 1.0, 64), Err(Error::SupportTooWide { .. })));
        assert!(self_consistency_roots(&g, -1.0, 64).is_err());
    }

    #[test]
    fn generalized_branch_reduces_to_main() {
        let g = FrequencyDistribution::truncated_gaussian(0.0, 0.3, 3.0).unwrap();
        for &r in &[0.5, 0.8, 1.0] {
            let a = self_consistency_residual(&g, 2.0, r, QT);
            let b = generalized_residual(&g, 2.0, r, |_| 0.0, QT);
            assert_eq!(a.to_bits(), b.to_bits());
            // Moving all mass to the antipodal branch flips the integral's sign.
            let c = generalized_residual(&g, 2.0, r, |_| 1.0, QT);
            assert!((c + 4.0 * r * r + a).abs() < 1e-12);
        }
    }

    #[test]
    fn critical_coupling_dirac_and_uniform() {
        assert_eq!(critical_coupling(&FrequencyDistribution::dirac(0.0)).unwrap(), 0.0);
        let g = FrequencyDistribution::uniform(0.0, 0.5).unwrap();
        let kc = critical_coupling(&g).unwrap();
        assert!((kc - 4.0 * 0.5 / PI).abs() < 1e-7, "{kc}");
    }

    #[test]
    fn bracket_not_found() {
        let g = FrequencyDistribution::uniform(0.0, 0.5).unwrap();
        let opts = SolverOptions { k_max: 0.6, grid: 64, ..SolverOptions::default() };
        assert!(matches!(critical_coupling_with(&g, &opts), Err(Error::BracketNotFound { .. })));
    }

    #[test]
    fn stationary_density_dirac_is_atom() {
        let sd = stationary_density(&FrequencyDistribution::dirac(0.0), 1.0, 1.0, 0.3).unwrap();
        assert_eq!(sd.marginal(0.3), None);
        assert_eq!(sd.atoms().unwrap(), vec![(0.3, 1.0)]);
    }

    #[test]
    fn stationary_marginal_integrates_to_one() {
        let g = FrequencyDistribution::uniform(0.0, 0.5).unwrap();
        let res = self_consistency_roots(&g, 2.0, 4096).unwrap();
        let r = res.largest.unwrap();
        let sd = stationary_density(&g, 2.0, r, 0.4).unwrap();
        let mass = integrate_with_breaks(
            |th| sd.marginal(th).unwrap(),
            0.4 - FRAC_PI_2,
            0.4 + FRAC_PI_2,
            &sd.marginal_breakpoints(),
            1e-13,
        );
        assert!((mass - 1.0).abs() < 1e-8, "{mass}");
        assert!(!sd.touches_support_edge());
        assert!(stationary_density(&g, 2.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn sampled_locked_state_closes_self_consistency() {
        let g = FrequencyDistribution::uniform(0.0, 0.5).unwrap();
        let k = 2.0f64;
        let r = self_consistency_roots(&g, k, 4096).unwrap().largest.unwrap();
        let sd = stationary_density(&g, k, r, 0.0).unwrap();
        let m = discretize(&sd.density_spec(), 2048, k).unwrap();
        let op = m.order_parameter();
        assert!((op.r - r).abs() < 1e-6, "{} vs {r}", op.r);
        assert!(op.phi.unwrap().abs() < 1e-12);
    }

    #[test]
    fn support_edge_flag() {
        let g = FrequencyDistribution::uniform(0.0, 0.5).unwrap();
        let sd = stationary_density(&g, 1.0, 0.5, 0.0).unwrap();
        assert!(sd.touches_support_edge());
        assert!((sd.support_curve(0.5).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((sd.antipodal_curve(0.0).unwrap() - PI).abs() < 1e-15);
    }
}
