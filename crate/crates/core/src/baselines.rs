//! Comparison algorithms: RiskAverse-UCB-BAI and VA-Uniform.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{argmax_by, BanditInstance, GroundTruth};
use crate::stats::ArmState;
use crate::valucb::{check_delta, run_bounded, EngineConfig, NoObserver, Policy, RunResult, StopReason};

/// Variance test applied to the selected arm by the RiskAverse stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskAverseStopRule {
    /// `sample variance - eps_v <= threshold`.
    SampleVariance,
    /// `variance UCB - eps_v <= threshold`.
    #[default]
    VarianceUcb,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskAverseConfig {
    pub eps_mu: f64,
    pub eps_v: f64,
    pub stop_rule: RiskAverseStopRule,
}

impl RiskAverseConfig {
    pub fn new(eps_mu: f64, eps_v: f64) -> Result<Self> {
        for (name, v) in [("eps_mu", eps_mu), ("eps_v", eps_v)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} = {v} must be positive and finite")));
            }
        }
        Ok(RiskAverseConfig { eps_mu, eps_v, stop_rule: RiskAverseStopRule::default() })
    }

    /// Accuracies from the ground truth: the best feasible arm's mean gap and the
    /// smallest variance gap among the risky arms other than the best feasible arm.
    pub fn oracle(gt: &GroundTruth) -> Result<Self> {
        let i_star = gt.i_star.ok_or(Error::NoFeasibleArm)?;
        let eps_mu = gt.mean_gaps[i_star];
        let eps_v = gt
            .min_risky_var_gap()
            .ok_or_else(|| Error::invalid("no risky arm besides the best feasible arm; eps_v is undefined"))?;
        Self::new(eps_mu, eps_v)
    }

    pub fn with_stop_rule(mut self, rule: RiskAverseStopRule) -> Self {
        self.stop_rule = rule;
        self
    }

    /// Budget `H` for `n_arms` arms at confidence `delta`.
    pub fn budget(&self, n_arms: usize, delta: f64) -> f64 {
        riskaverse_budget_h(n_arms, delta, self.eps_mu, self.eps_v)
    }
}

fn inner_sum(eps_mu: f64, eps_v: f64) -> f64 {
    1.0 / (2.0 * eps_mu * eps_mu) + 4.0 / (eps_v * eps_v)
}

/// `H' = 3N (1/(2 eps_mu^2) + 4/eps_v^2)`.
pub fn h_prime(n_arms: usize, eps_mu: f64, eps_v: f64) -> f64 {
    3.0 * n_arms as f64 * inner_sum(eps_mu, eps_v)
}

/// `H = H' ln((6N/delta) N (1/(2 eps_mu^2) + 4/eps_v^2))`.
pub fn riskaverse_budget_h(n_arms: usize, delta: f64, eps_mu: f64, eps_v: f64) -> f64 {
    let n = n_arms as f64;
    let s = inner_sum(eps_mu, eps_v);
    h_prime(n_arms, eps_mu, eps_v) * (6.0 * n / delta * n * s).ln()
}

/// One RiskAverse-UCB-BAI trial.
///
/// Each arm is pulled twice; then the arm with the largest mean UCB among those
/// whose variance LCB is at most the threshold is pulled once per step. The run
/// stops when the selected arm meets the accuracy condition or when the step
/// counter reaches the budget `H`.
pub fn run_riskaverse_ucb_bai<R: Rng + ?Sized>(
    instance: &BanditInstance,
    delta: f64,
    config: &RiskAverseConfig,
    engine: &EngineConfig,
    rng: &mut R,
) -> Result<RunResult> {
    check_delta(delta)?;
    if let Some(arm) = instance.arms().iter().position(|d| !d.is_bounded()) {
        return Err(Error::UnboundedArm { arm });
    }
    let n = instance.n_arms();
    let threshold = instance.sigma_bar_sq();
    let h = config.budget(n, delta);
    let log_term = (6.0 * h * n as f64 / delta).ln();
    let f_mu = |pulls: u64| (log_term / (2.0 * pulls as f64)).sqrt() * engine.radius_scale;
    let f_v = |pulls: u64| 2.0 * f_mu(pulls);

    let samplers: Vec<_> = instance.arms().iter().map(|d| d.sampler()).collect();
    let mut states = vec![ArmState::new(); n];
    for (state, sampler) in states.iter_mut().zip(&samplers) {
        for _ in 0..2 {
            state.update(sampler.sample(rng));
        }
    }
    let mut t = 2 * n as u64;
    let mut steps = 0u64;

    let result = |states: &[ArmState], arm: Option<usize>, steps, reason| {
        let per_arm_pulls: Vec<u64> = states.iter().map(|s| s.pulls()).collect();
        RunResult {
            estimated_flag: arm.is_some(),
            recommended_arm: arm,
            rounds: per_arm_pulls.iter().sum(),
            time_steps: steps,
            per_arm_pulls,
            terminated: reason != StopReason::TimeCap,
            stop_reason: reason,
        }
    };

    let var = |s: &ArmState| s.sample_variance().expect("two warm-up pulls");
    loop {
        let candidates = (0..n).filter(|&i| var(&states[i]) - f_v(states[i].pulls()) <= threshold);
        let Some(sel) = argmax_by(candidates, |i| states[i].mean() + f_mu(states[i].pulls())) else {
            return Ok(result(&states, None, steps, StopReason::EmptyCandidateSet));
        };
        if steps >= engine.max_time_steps {
            return Ok(result(&states, None, steps, StopReason::TimeCap));
        }
        states[sel].update(samplers[sel].sample(rng));
        t += 1;
        steps += 1;

        let s = &states[sel];
        let variance_stat = match config.stop_rule {
            RiskAverseStopRule::SampleVariance => var(s),
            RiskAverseStopRule::VarianceUcb => var(s) + f_v(s.pulls()),
        };
        if f_mu(s.pulls()) <= config.eps_mu / 2.0 && variance_stat - config.eps_v <= threshold {
            return Ok(result(&states, Some(sel), steps, StopReason::AccuracyReached));
        }
        if t as f64 >= h {
            return Ok(result(&states, Some(sel), steps, StopReason::BudgetExhausted));
        }
    }
}

/// One VA-Uniform trial: VA-LUCB with two arms drawn uniformly from the possibly feasible set.
pub fn run_va_uniform<R: Rng + ?Sized>(
    instance: &BanditInstance,
    delta: f64,
    config: &EngineConfig,
    rng: &mut R,
) -> Result<RunResult> {
    run_bounded(instance, delta, Policy::Uniform, config, rng, &mut NoObserver)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;
    use crate::instance::derive_ground_truth;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn budget_examples() {
        let h = riskaverse_budget_h(10, 0.05, 0.1, 0.03);
        let hp = h_prime(10, 0.1, 0.03);
        assert!((hp - 134_833.333_333_333_3).abs() < 1e-6);
        let expected = hp * (6.0f64 * 10.0 / 0.05 * 10.0 * (50.0 + 4.0 / 0.0009)).ln();
        assert!((h - expected).abs() <= 1e-9 * expected);
        assert!((h / 2.40e6 - 1.0).abs() < 0.005);
        assert!(riskaverse_budget_h(10, 0.05, 0.1, 0.04) < h);
    }

    #[test]
    fn radius_relation() {
        // f_v = 2 f_mu by construction; check the closed forms agree.
        let l = 7.3_f64;
        for t in [1u64, 2, 17, 1000] {
            let fm = (l / (2.0 * t as f64)).sqrt();
            let fv = (2.0 / t as f64 * l).sqrt();
            assert!((fv - 2.0 * fm).abs() < 1e-14);
        }
    }

    #[test]
    fn oracle_config_on_comparison_like_instance() {
        let arms = [(0.3, 0.16), (0.2, 0.12), (0.5, 0.22)]
            .iter()
            .map(|&(m, v)| DistributionSpec::beta_from_moments(m, v).unwrap())
            .collect();
        let inst = BanditInstance::new(arms, 0.2).unwrap();
        let gt = derive_ground_truth(&inst).unwrap();
        let cfg = RiskAverseConfig::oracle(&gt).unwrap();
        assert!((cfg.eps_mu - 0.1).abs() < 1e-12);
        assert!((cfg.eps_v - 0.02).abs() < 1e-12);
    }

    #[test]
    fn one_feasible_arm_generous_accuracy() {
        let arms = vec![
            DistributionSpec::bernoulli(0.1).unwrap(),
            DistributionSpec::bernoulli(0.5).unwrap(),
            DistributionSpec::bernoulli(0.5).unwrap(),
        ];
        let inst = BanditInstance::new(arms, 0.15).unwrap();
        let cfg = RiskAverseConfig::new(0.3, 0.09).unwrap();
        let mut wins = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = run_riskaverse_ucb_bai(&inst, 0.1, &cfg, &EngineConfig::default(), &mut rng).unwrap();
            assert_eq!(r.rounds, 6 + r.time_steps);
            if r.recommended_arm == Some(0) {
                wins += 1;
            }
        }
        assert!(wins >= 90, "{wins}");
    }

    #[test]
    fn budget_path_returns_current_selection() {
        // A tiny budget forces the `t >= H` exit right after the first loop pull.
        let arms = vec![DistributionSpec::bernoulli(0.6).unwrap(), DistributionSpec::bernoulli(0.4).unwrap()];
        let inst = BanditInstance::new(arms, 0.3).unwrap();
        let cfg = RiskAverseConfig::new(10.0, 10.0).unwrap();
        assert!(cfg.budget(2, 0.5) < 5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = run_riskaverse_ucb_bai(&inst, 0.5, &cfg, &EngineConfig::default(), &mut rng).unwrap();
        assert!(matches!(r.stop_reason, StopReason::BudgetExhausted | StopReason::AccuracyReached));
        assert_eq!(r.time_steps, 1);
        assert!(r.recommended_arm.is_some());
    }

    #[test]
    fn empty_candidate_set_is_a_failed_trial() {
        let arms = vec![DistributionSpec::bernoulli(0.5).unwrap(), DistributionSpec::bernoulli(0.5).unwrap()];
        let inst = BanditInstance::new(arms, 0.01).unwrap();
        let cfg = RiskAverseConfig::new(0.01, 0.001).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = run_riskaverse_ucb_bai(&inst, 0.1, &cfg, &EngineConfig::default(), &mut rng).unwrap();
        assert_eq!(r.stop_reason, StopReason::EmptyCandidateSet);
        assert!(!r.has_answer());
    }
}
