//! Streaming per-arm estimators and confidence radii.

use serde::Serialize;

use crate::error::{Error, Result};

/// Running pull count, mean and sum of squared deviations (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ArmState {
    pulls: u64,
    mean: f64,
    m2: f64,
}

impl ArmState {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn update(&mut self, reward: f64) {
        self.pulls += 1;
        let delta = reward - self.mean;
        self.mean += delta / self.pulls as f64;
        self.m2 += delta * (reward - self.mean);
    }

    /// Functional form of [`ArmState::update`].
    pub fn with(mut self, reward: f64) -> Self {
        self.update(reward);
        self
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; `None` below two pulls.
    pub fn sample_variance(&self) -> Option<f64> {
        (self.pulls >= 2).then(|| self.m2 / (self.pulls - 1) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceBounds {
    pub l_mu: f64,
    pub u_mu: f64,
    pub l_var: f64,
    pub u_var: f64,
}

impl ConfidenceBounds {
    pub fn covers(&self, mean: f64, variance: f64) -> bool {
        self.l_mu <= mean && mean <= self.u_mu && self.l_var <= variance && variance <= self.u_var
    }
}

/// Bounds `μ̂ ± mean_radius`, `σ̂² ± var_radius`, unclamped.
pub fn bounds(state: &ArmState, mean_radius: f64, var_radius: f64) -> Result<ConfidenceBounds> {
    let var = state.sample_variance().ok_or(Error::InsufficientSamples { pulls: state.pulls() })?;
    Ok(ConfidenceBounds {
        l_mu: state.mean() - mean_radius,
        u_mu: state.mean() + mean_radius,
        l_var: var - var_radius,
        u_var: var + var_radius,
    })
}

/// `ln(k N t^4 / δ)`, split so that the `t`-independent part is computed once.
#[inline]
fn log_term(k: f64, n_arms: usize, delta: f64, t: u64) -> f64 {
    (k * n_arms as f64 / delta).ln() + 4.0 * (t as f64).ln()
}

/// Bounded-reward radius `sqrt( ln(2 N t^4 / δ) / (2T) )`, shared by mean and variance.
pub fn radius_bounded(t: u64, pulls: u64, n_arms: usize, delta: f64) -> f64 {
    (log_term(2.0, n_arms, delta, t) / (2.0 * pulls as f64)).sqrt()
}

/// Sub-Gaussian mean radius `sqrt( 2σ² ln(k N t^4 / δ) / T )`.
pub fn radius_subg_mean(t: u64, pulls: u64, n_arms: usize, delta: f64, sigma: f64, k: f64) -> f64 {
    (2.0 * sigma * sigma * log_term(k, n_arms, delta, t) / pulls as f64).sqrt()
}

/// Sub-Gaussian variance radius `sqrt( 2cσ⁴ ln(k N t^4 / δ) / T )`.
pub fn radius_subg_var(t: u64, pulls: u64, n_arms: usize, delta: f64, sigma: f64, k: f64, c: f64) -> f64 {
    let s2 = sigma * sigma;
    (2.0 * c * s2 * s2 * log_term(k, n_arms, delta, t) / pulls as f64).sqrt()
}

/// Default `k` of the sub-Gaussian radii.
pub const SUBG_K: f64 = 2.0;
/// Default `c` of the sub-Gaussian variance radius.
pub const SUBG_C: f64 = 64.0;

/// Radius family used by an engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusRule {
    Bounded,
    SubGaussian { sigma: f64, k: f64, c: f64 },
}

impl RadiusRule {
    pub fn subgaussian(sigma: f64) -> Self {
        RadiusRule::SubGaussian { sigma, k: SUBG_K, c: SUBG_C }
    }

    /// Per-step context; holds the log term so each arm only costs a division and a sqrt.
    #[inline]
    pub fn at_step(&self, t: u64, n_arms: usize, delta: f64) -> StepRadii {
        match *self {
            RadiusRule::Bounded => {
                let l = log_term(2.0, n_arms, delta, t);
                StepRadii { mean_num: l / 2.0, var_num: l / 2.0 }
            }
            RadiusRule::SubGaussian { sigma, k, c } => {
                let l = log_term(k, n_arms, delta, t);
                let s2 = sigma * sigma;
                StepRadii { mean_num: 2.0 * s2 * l, var_num: 2.0 * c * s2 * s2 * l }
            }
        }
    }
}

/// Radii at a fixed time step as functions of the pull count.
#[derive(Debug, Clone, Copy)]
pub struct StepRadii {
    mean_num: f64,
    var_num: f64,
}

impl StepRadii {
    #[inline]
    pub fn mean(&self, pulls: u64) -> f64 {
        (self.mean_num / pulls as f64).sqrt()
    }

    #[inline]
    pub fn var(&self, pulls: u64) -> f64 {
        (self.var_num / pulls as f64).sqrt()
    }

    /// `sqrt` of the mean-radius numerator: the radius at one pull.
    #[inline]
    pub fn mean_at_one(&self) -> f64 {
        self.mean_num.sqrt()
    }

    #[inline]
    pub fn var_at_one(&self) -> f64 {
        self.var_num.sqrt()
    }

    /// Both radii multiplied by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        let f2 = factor * factor;
        StepRadii { mean_num: self.mean_num * f2, var_num: self.var_num * f2 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch_variance(xs: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
    }

    #[test]
    fn update_examples() {
        let s = ArmState::new().with(0.0).with(1.0);
        assert_eq!(s.mean(), 0.5);
        assert_eq!(s.sample_variance(), Some(0.5));

        let s = ArmState::new().with(0.37).with(0.37).with(0.37);
        assert_eq!(s.sample_variance(), Some(0.0));

        let s = ArmState::new().with(0.2).with(0.4).with(0.9);
        assert!((s.mean() - 0.5).abs() < 1e-15);
        // (0.09 + 0.01 + 0.16) / 2
        assert!((s.sample_variance().unwrap() - 0.13).abs() < 1e-15);
        assert_eq!(s.pulls(), 3);
    }

    #[test]
    fn variance_undefined_below_two() {
        assert_eq!(ArmState::new().sample_variance(), None);
        assert_eq!(ArmState::new().with(0.3).sample_variance(), None);
    }

    #[test]
    fn bounded_radius_examples() {
        // sqrt(ln(3240) / 4)
        assert!((radius_bounded(3, 2, 2, 0.1) - 1.4215597603324996).abs() < 1e-12);
        for (t, pulls) in [(3, 2), (100, 7), (12345, 300)] {
            let r = radius_bounded(t, pulls, 5, 0.05);
            let r4 = radius_bounded(t, 4 * pulls, 5, 0.05);
            assert!((r4 - r / 2.0).abs() < 1e-14);
        }
        assert!(radius_bounded(11, 5, 3, 0.1) > radius_bounded(10, 5, 3, 0.1));
    }

    #[test]
    fn subg_radius_examples() {
        // sqrt(2 ln 640)
        let m = radius_subg_mean(2, 1, 2, 0.1, 1.0, 2.0);
        assert!((m - 3.594848585505019).abs() < 1e-12);
        for sigma in [0.1, 0.5, 2.0] {
            let m = radius_subg_mean(50, 9, 4, 0.05, sigma, SUBG_K);
            let v = radius_subg_var(50, 9, 4, 0.05, sigma, SUBG_K, SUBG_C);
            assert!((v / m - 8.0 * sigma).abs() < 1e-12 * sigma.max(1.0));
            let m4 = radius_subg_mean(50, 36, 4, 0.05, sigma, SUBG_K);
            let v4 = radius_subg_var(50, 36, 4, 0.05, sigma, SUBG_K, SUBG_C);
            assert!((m4 - m / 2.0).abs() < 1e-12 && (v4 - v / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn step_radii_match_direct_formulas() {
        let r = RadiusRule::Bounded.at_step(77, 6, 0.05);
        assert!((r.mean(13) - radius_bounded(77, 13, 6, 0.05)).abs() < 1e-14);
        assert!((r.var(13) - radius_bounded(77, 13, 6, 0.05)).abs() < 1e-14);
        let r = RadiusRule::subgaussian(0.5).at_step(77, 6, 0.05);
        assert!((r.mean(13) - radius_subg_mean(77, 13, 6, 0.05, 0.5, 2.0)).abs() < 1e-14);
        assert!((r.var(13) - radius_subg_var(77, 13, 6, 0.05, 0.5, 2.0, 64.0)).abs() < 1e-14);
        let s = RadiusRule::Bounded.at_step(77, 6, 0.05).scaled(0.5);
        assert!((s.mean(13) - 0.5 * radius_bounded(77, 13, 6, 0.05)).abs() < 1e-14);
    }

    #[test]
    fn bounds_arithmetic() {
        // mean 0.5, variance 0.1: rewards 0.5 ± sqrt(0.05)
        let d = 0.05f64.sqrt();
        let s = ArmState::new().with(0.5 - d).with(0.5 + d);
        let b = bounds(&s, 0.2, 0.2).unwrap();
        assert!((b.l_mu - 0.3).abs() < 1e-12 && (b.u_mu - 0.7).abs() < 1e-12);
        assert!((b.l_var + 0.1).abs() < 1e-12 && (b.u_var - 0.3).abs() < 1e-12);

        let b = bounds(&s, 0.0, 0.0).unwrap();
        assert_eq!(b.l_mu, b.u_mu);
        assert_eq!(b.l_var, b.u_var);

        let one = ArmState::new().with(0.4);
        assert_eq!(bounds(&one, 0.1, 0.1), Err(Error::InsufficientSamples { pulls: 1 }));
    }

    #[test]
    fn streaming_matches_batch_on_long_sequence() {
        let xs: Vec<f64> = (0..10_000).map(|i| ((i * 7919) % 1000) as f64 / 999.0).collect();
        let mut s = ArmState::new();
        xs.iter().for_each(|&x| s.update(x));
        let b = batch_variance(&xs);
        assert!((s.sample_variance().unwrap() - b).abs() <= 1e-9 * b);
    }
}
