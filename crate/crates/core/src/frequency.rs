//! Laws of the natural frequencies `g(ω)`. All supports are bounded.

use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::SplitMix64;

use crate::error::{Error, Result};
use crate::integrator::unit_uniform;
use crate::quadrature::{integrate, midpoints};
use crate::scalar::Real;

/// Gaussian restricted to `mean ± cut·sigma` and renormalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedGaussian<T> {
    mean: T,
    sigma: T,
    cut: T,
    norm: T,
}

impl<T: Real> TruncatedGaussian<T> {
    pub fn new(mean: T, sigma: T, cut: T) -> Result<Self> {
        if !(sigma > T::zero() && sigma.is_finite() && cut > T::zero() && cut.is_finite() && mean.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "truncated gaussian needs finite mean, sigma > 0 and cut > 0 (got {mean}, {sigma}, {cut})"
            )));
        }
        let unnormalized = |z: T| (-(z * z) / T::lit(2.0)).exp();
        let z_mass = integrate(unnormalized, -cut, cut, T::tol(1e-15));
        let norm = sigma * z_mass;
        Ok(Self { mean, sigma, cut, norm })
    }

    pub fn mean(&self) -> T {
        self.mean
    }
    pub fn sigma(&self) -> T {
        self.sigma
    }
    pub fn cut(&self) -> T {
        self.cut
    }

    fn pdf(&self, w: T) -> T {
        let z = (w - self.mean) / self.sigma;
        if z.abs() > self.cut {
            return T::zero();
        }
        (-(z * z) / T::lit(2.0)).exp() / self.norm
    }

    fn support(&self) -> (T, T) {
        (self.mean - self.cut * self.sigma, self.mean + self.cut * self.sigma)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FrequencyDistribution<T> {
    /// Identical oscillators.
    Dirac {
        omega0: T,
    },
    /// Uniform on `[center − halfwidth, center + halfwidth]`.
    Uniform {
        center: T,
        halfwidth: T,
    },
    /// Finitely many frequencies `(ω_j, p_j)`.
    Discrete {
        atoms: Vec<(T, T)>,
    },
    TruncatedGaussian(TruncatedGaussian<T>),
}

impl<T: Real> FrequencyDistribution<T> {
    pub fn dirac(omega0: T) -> Self {
        Self::Dirac { omega0 }
    }

    pub fn uniform(center: T, halfwidth: T) -> Result<Self> {
        let g = Self::Uniform { center, halfwidth };
        g.validate()?;
        Ok(g)
    }

    pub fn discrete(atoms: Vec<(T, T)>) -> Result<Self> {
        let g = Self::Discrete { atoms };
        g.validate()?;
        Ok(g)
    }

    pub fn truncated_gaussian(mean: T, sigma: T, cut: T) -> Result<Self> {
        Ok(Self::TruncatedGaussian(TruncatedGaussian::new(mean, sigma, cut)?))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Dirac { omega0 } if omega0.is_finite() => Ok(()),
            Self::Dirac { .. } => Err(Error::InvalidInput("dirac frequency must be finite".into())),
            Self::Uniform { center, halfwidth } => {
                if center.is_finite() && halfwidth.is_finite() && *halfwidth > T::zero() {
                    Ok(())
                } else {
                    Err(Error::InvalidInput(format!(
                        "uniform frequency law needs finite center and halfwidth > 0 (got {center}, {halfwidth})"
                    )))
                }
            }
            Self::Discrete { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidInput("discrete frequency law has no atoms".into()));
                }
                if atoms.iter().any(|(w, p)| !w.is_finite() || !(p.is_finite() && *p > T::zero())) {
                    return Err(Error::InvalidInput("discrete atoms need finite ω and p > 0".into()));
                }
                let total: T = atoms.iter().map(|a| a.1).sum();
                let tol = T::tol(1e-12);
                if (total - T::one()).abs() > tol {
                    return Err(Error::InvalidMass { total: total.as_f64(), tol: tol.as_f64() });
                }
                Ok(())
            }
            Self::TruncatedGaussian(_) => Ok(()),
        }
    }

    /// True for laws without a density (Dirac, Discrete).
    pub fn is_atomic(&self) -> bool {
        matches!(self, Self::Dirac { .. } | Self::Discrete { .. })
    }

    /// Density value; zero for atomic laws.
    pub fn pdf(&self, w: T) -> T {
        match self {
            Self::Dirac { .. } | Self::Discrete { .. } => T::zero(),
            Self::Uniform { center, halfwidth } => {
                if (w - *center).abs() <= *halfwidth {
                    T::one() / (T::lit(2.0) * *halfwidth)
                } else {
                    T::zero()
                }
            }
            Self::TruncatedGaussian(tg) => tg.pdf(w),
        }
    }

    /// Closed support `[ω_min, ω_max]`.
    pub fn support(&self) -> (T, T) {
        match self {
            Self::Dirac { omega0 } => (*omega0, *omega0),
            Self::Uniform { center, halfwidth } => (*center - *halfwidth, *center + *halfwidth),
            Self::Discrete { atoms } => {
                atoms.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), a| (lo.min(a.0), hi.max(a.0)))
            }
            Self::TruncatedGaussian(tg) => tg.support(),
        }
    }

    /// `sup |ω|` over the support.
    pub fn max_abs(&self) -> T {
        let (lo, hi) = self.support();
        lo.abs().max(hi.abs())
    }

    pub fn mean(&self) -> T {
        match self {
            Self::Dirac { omega0 } => *omega0,
            Self::Uniform { center, .. } => *center,
            Self::Discrete { atoms } => atoms.iter().map(|&(w, p)| w * p).sum(),
            Self::TruncatedGaussian(tg) => tg.mean,
        }
    }

    /// Quadrature nodes `(ω_j, mass_j)` with masses summing to one.
    ///
    /// Atomic laws are returned exactly; densities use `m` midpoint cells whose
    /// weight is the cell mass.
    pub fn nodes(&self, m: usize) -> Vec<(T, T)> {
        match self {
            Self::Dirac { omega0 } => vec![(*omega0, T::one())],
            Self::Discrete { atoms } => atoms.clone(),
            Self::Uniform { .. } | Self::TruncatedGaussian(_) => {
                let m = m.max(1);
                let (lo, hi) = self.support();
                let h = (hi - lo) / T::from_usize_lossy(m);
                let mut nodes: Vec<(T, T)> = midpoints(lo, hi, m)
                    .map(|w| {
                        let mass = match self {
                            Self::Uniform { .. } => T::one() / T::from_usize_lossy(m),
                            _ => integrate(|x| self.pdf(x), w - h / T::lit(2.0), w + h / T::lit(2.0), T::tol(1e-15)),
                        };
                        (w, mass)
                    })
                    .collect();
                let total: T = nodes.iter().map(|n| n.1).sum();
                nodes.iter_mut().for_each(|n| n.1 = n.1 / total);
                nodes
            }
        }
    }

    /// `∫ f(ω) g(ω) dω`, exact for atomic laws, adaptive quadrature otherwise.
    pub fn expectation<F: Fn(T) -> T>(&self, f: F, tol: T) -> T {
        match self {
            Self::Dirac { omega0 } => f(*omega0),
            Self::Discrete { atoms } => atoms.iter().map(|&(w, p)| p * f(w)).sum(),
            _ => {
                let (lo, hi) = self.support();
                integrate(|w| f(w) * self.pdf(w), lo, hi, tol)
            }
        }
    }

    /// One draw from the law using the seeded stream.
    pub fn sample(&self, rng: &mut SplitMix64) -> T {
        match self {
            Self::Dirac { omega0 } => *omega0,
            Self::Uniform { center, halfwidth } => *center + *halfwidth * T::lit(2.0 * unit_uniform(rng) - 1.0),
            Self::Discrete { atoms } => {
                let u = T::lit(unit_uniform(rng));
                let mut acc = T::zero();
                for &(w, p) in atoms {
                    acc = acc + p;
                    if u < acc {
                        return w;
                    }
                }
                atoms.last().expect("validated non-empty").0
            }
            Self::TruncatedGaussian(tg) => loop {
                let z: f64 = StandardNormal.sample(rng);
                let z = T::lit(z);
                if z.abs() <= tg.cut {
                    return tg.mean + tg.sigma * z;
                }
            },
        }
    }
}
