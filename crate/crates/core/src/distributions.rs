//! Arm reward laws.
//!
//! Bernoulli and Beta laws are supported on `[0, 1]`; Gaussian laws are
//! unbounded and only used by the sub-Gaussian engine.
//!
//! Sampling generators: Bernoulli compares one uniform `f64` draw against `p`;
//! Beta uses `rand_distr::Beta` (Cheng's BB/BC rejection samplers); Gaussian
//! uses `rand_distr::Normal` (ziggurat). All of them consume the caller's
//! random stream only, so a fixed seed yields a bit-identical draw sequence.

use rand::Rng;
use rand_distr::{Beta, Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};

/// A reward law with analytic moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    Bernoulli { p: f64 },
    Beta { alpha: f64, beta: f64 },
    Gaussian { mu: f64, sigma: f64 },
}

/// Mean and variance of a reward law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

impl DistributionSpec {
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("Bernoulli p = {p} outside [0, 1]")));
        }
        Ok(DistributionSpec::Bernoulli { p })
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("Beta parameters must be positive and finite, got ({alpha}, {beta})")));
        }
        Ok(DistributionSpec::Beta { alpha, beta })
    }

    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("Gaussian needs finite mu and positive sigma, got ({mu}, {sigma})")));
        }
        Ok(DistributionSpec::Gaussian { mu, sigma })
    }

    /// Beta law with the given mean `a` and variance `b`:
    /// `alpha = (a^2 (1 - a) - a b) / b`, `beta = alpha (1 - a) / a`.
    pub fn beta_from_moments(mean: f64, variance: f64) -> Result<Self> {
        if !(mean > 0.0 && mean < 1.0) {
            return Err(Error::invalid(format!("Beta mean {mean} outside (0, 1)")));
        }
        if variance.is_nan() || variance <= 0.0 {
            return Err(Error::invalid(format!("Beta variance {variance} must be positive")));
        }
        let bound = mean * (1.0 - mean);
        if variance >= bound {
            return Err(Error::MomentInfeasible { mean, variance, bound });
        }
        let alpha = (mean * mean * (1.0 - mean) - mean * variance) / variance;
        let beta = (1.0 - mean) / mean * alpha;
        Self::beta(alpha, beta)
    }

    pub fn moments(&self) -> Moments {
        match *self {
            DistributionSpec::Bernoulli { p } => Moments { mean: p, variance: p * (1.0 - p) },
            DistributionSpec::Beta { alpha, beta } => {
                let s = alpha + beta;
                Moments { mean: alpha / s, variance: alpha * beta / (s * s * (s + 1.0)) }
            }
            DistributionSpec::Gaussian { mu, sigma } => Moments { mean: mu, variance: sigma * sigma },
        }
    }

    pub fn mean(&self) -> f64 {
        self.moments().mean
    }

    pub fn variance(&self) -> f64 {
        self.moments().variance
    }

    /// True for laws supported on `[0, 1]`.
    pub fn is_bounded(&self) -> bool {
        !matches!(self, DistributionSpec::Gaussian { .. })
    }

    /// Prepared sampler; engines build one per arm and reuse it for every pull.
    pub fn sampler(&self) -> ArmSampler {
        match *self {
            DistributionSpec::Bernoulli { p } => ArmSampler::Bernoulli(p),
            DistributionSpec::Beta { alpha, beta } => {
                ArmSampler::Beta(Beta::new(alpha, beta).expect("validated Beta parameters"))
            }
            DistributionSpec::Gaussian { mu, sigma } => {
                ArmSampler::Gaussian(Normal::new(mu, sigma).expect("validated Gaussian parameters"))
            }
        }
    }

    /// One draw from the law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sampler().sample(rng)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ArmSampler {
    Bernoulli(f64),
    Beta(Beta<f64>),
    Gaussian(Normal<f64>),
}

impl ArmSampler {
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ArmSampler::Bernoulli(p) => {
                if rng.random::<f64>() < *p {
                    1.0
                } else {
                    0.0
                }
            }
            ArmSampler::Beta(d) => d.sample(rng),
            ArmSampler::Gaussian(d) => d.sample(rng),
        }
    }
}
