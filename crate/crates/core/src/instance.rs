//! Bandit instances and their analytic ground truth.

use serde::Serialize;

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};

/// Ordered arms plus the variance threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BanditInstance {
    arms: Vec<DistributionSpec>,
    sigma_bar_sq: f64,
    subg_proxy: Option<f64>,
    eps_v: f64,
}

impl BanditInstance {
    /// Bounded-reward instance. Gaussian arms need [`BanditInstance::with_subg_proxy`].
    pub fn new(arms: Vec<DistributionSpec>, sigma_bar_sq: f64) -> Result<Self> {
        Self::build(arms, sigma_bar_sq, None, 0.0)
    }

    /// Instance whose arms are all `sigma`-sub-Gaussian.
    pub fn with_subg_proxy(arms: Vec<DistributionSpec>, sigma_bar_sq: f64, sigma: f64) -> Result<Self> {
        Self::build(arms, sigma_bar_sq, Some(sigma), 0.0)
    }

    pub fn build(arms: Vec<DistributionSpec>, sigma_bar_sq: f64, subg_proxy: Option<f64>, eps_v: f64) -> Result<Self> {
        if arms.len() < 2 {
            return Err(Error::invalid(format!("need at least 2 arms, got {}", arms.len())));
        }
        if !(sigma_bar_sq > 0.0 && sigma_bar_sq.is_finite()) {
            return Err(Error::invalid(format!("sigma_bar_sq = {sigma_bar_sq} must be positive")));
        }
        if !(eps_v >= 0.0 && eps_v.is_finite()) {
            return Err(Error::invalid(format!("eps_v = {eps_v} must be nonnegative")));
        }
        if let Some(sigma) = subg_proxy {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::invalid(format!("sub-Gaussian proxy {sigma} must be positive")));
            }
        }
        for (i, arm) in arms.iter().enumerate() {
            if let DistributionSpec::Gaussian { sigma: s, .. } = *arm {
                match subg_proxy {
                    None => return Err(Error::MissingSubgProxy),
                    Some(sigma) if s > sigma => {
                        return Err(Error::invalid(format!(
                            "Gaussian arm {i} has std {s} above the sub-Gaussian proxy {sigma}"
                        )))
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(Self { arms, sigma_bar_sq, subg_proxy, eps_v })
    }

    /// Same instance with the feasibility slack `eps_v` enabled.
    pub fn with_eps_v(mut self, eps_v: f64) -> Result<Self> {
        if !(eps_v >= 0.0 && eps_v.is_finite()) {
            return Err(Error::invalid(format!("eps_v = {eps_v} must be nonnegative")));
        }
        self.eps_v = eps_v;
        Ok(self)
    }

    pub fn arms(&self) -> &[DistributionSpec] {
        &self.arms
    }

    pub fn n_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn sigma_bar_sq(&self) -> f64 {
        self.sigma_bar_sq
    }

    pub fn subg_proxy(&self) -> Option<f64> {
        self.subg_proxy
    }

    pub fn eps_v(&self) -> f64 {
        self.eps_v
    }

    pub fn is_bounded(&self) -> bool {
        self.arms.iter().all(DistributionSpec::is_bounded)
    }
}

/// Feasibility, best feasible arm, and gaps of an instance.
///
/// Mean gaps: `Δ_i = μ_{i*} - μ_i` for suboptimal arms, `Δ_{i*} = Δ_{i**}`
/// (or `+∞` when no arm is suboptimal), `0` for the remaining risky arms,
/// and `0` for every arm of an infeasible instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub feasible: bool,
    pub feasible_set: Vec<usize>,
    pub suboptimal_set: Vec<usize>,
    pub risky_set: Vec<usize>,
    pub i_star: Option<usize>,
    pub i_star_star: Option<usize>,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub mean_gaps: Vec<f64>,
    pub var_gaps: Vec<f64>,
    pub separator: f64,
    pub sigma_bar_sq: f64,
}

impl GroundTruth {
    pub fn n_arms(&self) -> usize {
        self.means.len()
    }

    pub fn is_feasible_arm(&self, i: usize) -> bool {
        self.variances[i] <= self.sigma_bar_sq
    }

    pub fn is_suboptimal(&self, i: usize) -> bool {
        self.suboptimal_set.binary_search(&i).is_ok()
    }

    /// `min{Δ_i^v : i ∈ R \ {i*}}`, or `None` when that set is empty or `f = 0`.
    pub fn min_risky_var_gap(&self) -> Option<f64> {
        let i_star = self.i_star?;
        self.risky_set.iter().filter(|&&i| i != i_star).map(|&i| self.var_gaps[i]).min_by(f64::total_cmp)
    }
}

/// Smallest index attaining the maximum of `key` over `items`.
pub(crate) fn argmax_by<I, F>(items: I, key: F) -> Option<usize>
where
    I: IntoIterator<Item = usize>,
    F: Fn(usize) -> f64,
{
    let mut best: Option<(usize, f64)> = None;
    for i in items {
        let v = key(i);
        let better = match best {
            None => true,
            Some((bi, b)) => v > b || (v == b && i < bi),
        };
        if better {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

pub fn derive_ground_truth(instance: &BanditInstance) -> Result<GroundTruth> {
    let n = instance.n_arms();
    let sigma_bar_sq = instance.sigma_bar_sq();
    let (means, variances): (Vec<f64>, Vec<f64>) =
        instance.arms().iter().map(|a| a.moments()).map(|m| (m.mean, m.variance)).unzip();

    let feasible_set: Vec<usize> = (0..n).filter(|&i| variances[i] <= sigma_bar_sq).collect();
    let var_gaps: Vec<f64> = variances.iter().map(|v| (v - sigma_bar_sq).abs()).collect();

    let i_star = argmax_by(feasible_set.iter().copied(), |i| means[i]);
    let feasible = i_star.is_some();

    if let Some(best) = i_star {
        let ties = feasible_set.iter().filter(|&&i| means[i] == means[best]).count();
        if ties > 1 {
            return Err(Error::DegenerateBestArm(format!(
                "{ties} feasible arms share the maximal mean {}",
                means[best]
            )));
        }
        if instance.eps_v() == 0.0 && variances[best] == sigma_bar_sq {
            return Err(Error::DegenerateBestArm(format!(
                "best feasible arm {best} has variance exactly at the threshold"
            )));
        }
    }

    let (suboptimal_set, risky_set): (Vec<usize>, Vec<usize>) = match i_star {
        Some(best) => (0..n).partition(|&i| means[i] < means[best]),
        None => (Vec::new(), (0..n).collect()),
    };
    let i_star_star = argmax_by(suboptimal_set.iter().copied(), |i| means[i]);

    let mut mean_gaps = vec![0.0; n];
    let mut separator = f64::NEG_INFINITY;
    if let Some(best) = i_star {
        for &i in &suboptimal_set {
            mean_gaps[i] = means[best] - means[i];
        }
        mean_gaps[best] = match i_star_star {
            Some(second) => mean_gaps[second],
            None => f64::INFINITY,
        };
        if let Some(second) = i_star_star {
            separator = (means[best] + means[second]) / 2.0;
        }
    }

    Ok(GroundTruth {
        feasible,
        feasible_set,
        suboptimal_set,
        risky_set,
        i_star,
        i_star_star,
        means,
        variances,
        mean_gaps,
        var_gaps,
        separator,
        sigma_bar_sq,
    })
}

/// Both roots of `a (1 - a) = sigma_bar_sq`, returned as `(a_under, a_bar)`.
///
/// A Bernoulli(p) arm is infeasible iff `a_under < p < a_bar`.
pub fn bernoulli_feasibility_roots(sigma_bar_sq: f64) -> Result<(f64, f64)> {
    if !(sigma_bar_sq > 0.0 && sigma_bar_sq < 0.25) {
        return Err(Error::Domain(format!("sigma_bar_sq = {sigma_bar_sq} outside (0, 1/4)")));
    }
    let root = (1.0 - 4.0 * sigma_bar_sq).sqrt();
    Ok(((1.0 - root) / 2.0, (1.0 + root) / 2.0))
}
