//! The VA-LUCB engine and its sub-Gaussian variant.
//!
//! The step-wise primitives ([`partition_arms`], [`potential_set`], [`check_stop`],
//! [`select_arms`]) are pure functions over per-arm bounds. The trial runners share
//! one engine that differs only in its radius rule, warm-up length, sampling policy
//! and whether the forced set is pulled.
//!
//! Time indexing: after the bounded warm-up (two pulls per arm) the first time step
//! is `t = N + 1`; after the sub-Gaussian warm-up (`T0` pulls per arm) it is
//! `t = T0 + 1`. Radii at step `t` use the pull counts accumulated before `t`.

use rand::Rng;
use serde::Serialize;

use crate::distributions::ArmSampler;
use crate::error::{Error, Result};
use crate::instance::{argmax_by, BanditInstance};
use crate::stats::{ArmState, ConfidenceBounds, RadiusRule, StepRadii};

/// Disjoint classification of the arms still under exploration.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Partition {
    /// `U^v <= threshold (+ slack)`.
    pub feasible: Vec<usize>,
    /// `L^v <= threshold < U^v` (minus the slack-admitted arms).
    pub almost_feasible: Vec<usize>,
    /// Union of the two sets above, in index order.
    pub possibly_feasible: Vec<usize>,
    /// `L^v > threshold`.
    pub infeasible: Vec<usize>,
}

impl Partition {
    /// Classify `active` (ascending indices) reusing the existing allocations.
    pub fn compute_into(&mut self, bounds: &[ConfidenceBounds], active: &[usize], sigma_bar_sq: f64, eps_v: f64) {
        self.feasible.clear();
        self.almost_feasible.clear();
        self.possibly_feasible.clear();
        self.infeasible.clear();
        for &i in active {
            let b = &bounds[i];
            if b.l_var > sigma_bar_sq {
                self.infeasible.push(i);
                continue;
            }
            self.possibly_feasible.push(i);
            if b.u_var <= sigma_bar_sq + eps_v {
                self.feasible.push(i);
            } else {
                self.almost_feasible.push(i);
            }
        }
    }

    /// Every classified arm.
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        let mut all: Vec<usize> = self.possibly_feasible.iter().chain(&self.infeasible).copied().collect();
        all.sort_unstable();
        all.into_iter()
    }
}

/// Classify the arms in `active` by their variance bounds.
pub fn partition_arms(bounds: &[ConfidenceBounds], active: &[usize], sigma_bar_sq: f64, eps_v: f64) -> Partition {
    let mut p = Partition::default();
    p.compute_into(bounds, active, sigma_bar_sq, eps_v);
    p
}

/// Empirically best feasible arm: largest sample mean over the feasible set.
pub fn empirical_best_feasible(partition: &Partition, means: &[f64]) -> Option<usize> {
    argmax_by(partition.feasible.iter().copied(), |i| means[i])
}

/// Arms that may still beat the empirically best feasible arm.
///
/// Membership is evaluated over the possibly feasible set only. With no
/// empirically feasible arm every active arm is returned.
pub fn potential_set(bounds: &[ConfidenceBounds], partition: &Partition, best_feasible: Option<usize>) -> Vec<usize> {
    match best_feasible {
        None => partition.active().collect(),
        Some(b) => {
            let floor = bounds[b].l_mu;
            partition.possibly_feasible.iter().copied().filter(|&i| i != b && bounds[i].u_mu >= floor).collect()
        }
    }
}

/// Final answer of a stopped run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Recommendation {
    pub feasible: bool,
    pub arm: Option<usize>,
}

/// Stop iff no possibly feasible arm is in `potential`.
pub fn check_stop(partition: &Partition, potential: &[usize], means: &[f64]) -> Option<Recommendation> {
    if partition.possibly_feasible.iter().any(|i| potential.contains(i)) {
        return None;
    }
    Some(if partition.feasible.is_empty() {
        Recommendation { feasible: false, arm: None }
    } else {
        let arm = argmax_by(partition.possibly_feasible.iter().copied(), |i| means[i]);
        Recommendation { feasible: true, arm }
    })
}

/// Arms pulled in one time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SamplingDecision {
    One(usize),
    Two(usize, usize),
}

impl SamplingDecision {
    pub fn arms(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            SamplingDecision::One(a) => (a, None),
            SamplingDecision::Two(a, b) => (a, Some(b)),
        };
        std::iter::once(a).chain(b)
    }

    pub fn contains(&self, arm: usize) -> bool {
        match *self {
            SamplingDecision::One(a) => a == arm,
            SamplingDecision::Two(a, b) => a == arm || b == arm,
        }
    }
}

/// Leader (best sample mean) and best competitor (largest mean UCB among the rest).
///
/// # Panics
/// If the possibly feasible set is empty.
pub fn select_arms(partition: &Partition, bounds: &[ConfidenceBounds], means: &[f64]) -> SamplingDecision {
    let pool = &partition.possibly_feasible;
    let leader =
        argmax_by(pool.iter().copied(), |i| means[i]).expect("select_arms called with an empty possibly feasible set");
    if pool.len() == 1 {
        return SamplingDecision::One(leader);
    }
    let competitor = argmax_by(pool.iter().copied().filter(|&i| i != leader), |i| bounds[i].u_mu)
        .expect("at least two possibly feasible arms");
    if bounds[competitor].u_mu >= bounds[leader].l_mu {
        SamplingDecision::Two(leader, competitor)
    } else {
        SamplingDecision::One(leader)
    }
}

/// Two distinct arms drawn uniformly from the possibly feasible set (one if it is a singleton).
pub fn select_uniform<R: Rng + ?Sized>(partition: &Partition, rng: &mut R) -> SamplingDecision {
    let pool = &partition.possibly_feasible;
    let n = pool.len();
    assert!(n > 0, "select_uniform called with an empty possibly feasible set");
    if n == 1 {
        return SamplingDecision::One(pool[0]);
    }
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    SamplingDecision::Two(pool[a], pool[b])
}

/// Smallest `t >= 1` with `t >= (128/c) ln(k N t^4 / delta)`.
pub fn warmup_length_t0(n_arms: usize, delta: f64, k: f64, c: f64) -> u64 {
    let base = (k * n_arms as f64 / delta).ln();
    (1u64..)
        .find(|&t| t as f64 >= 128.0 / c * (base + 4.0 * (t as f64).ln()))
        .expect("the scan terminates for finite inputs")
}

/// Pull count below which an arm is forced at step `t`: `ceil((128/c) ln(k N (t+1)^4 / delta))`.
pub fn forced_pull_threshold(t: u64, n_arms: usize, delta: f64, k: f64, c: f64) -> u64 {
    let l = (k * n_arms as f64 / delta).ln() + 4.0 * ((t + 1) as f64).ln();
    (128.0 / c * l).ceil().max(0.0) as u64
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Stopping rule fired with an empirically feasible arm.
    Recommended,
    /// Stopping rule fired with no empirically feasible arm.
    DeclaredInfeasible,
    /// Accuracy condition of the RiskAverse baseline.
    AccuracyReached,
    /// Budget `H` of the RiskAverse baseline.
    BudgetExhausted,
    /// No arm passed the RiskAverse variance screen.
    EmptyCandidateSet,
    /// Safety cap on time steps.
    TimeCap,
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunResult {
    pub estimated_flag: bool,
    pub recommended_arm: Option<usize>,
    /// Total pulls, warm-up included.
    pub rounds: u64,
    /// Time steps after the warm-up.
    pub time_steps: u64,
    pub per_arm_pulls: Vec<u64>,
    pub terminated: bool,
    pub stop_reason: StopReason,
}

impl RunResult {
    /// False for capped runs and runs that ended without a defined output.
    pub fn has_answer(&self) -> bool {
        self.terminated && self.stop_reason != StopReason::EmptyCandidateSet
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EngineConfig {
    pub max_time_steps: u64,
    /// Multiplier on every confidence radius; `1.0` is the algorithm as specified.
    pub radius_scale: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { max_time_steps: 1_000_000_000, radius_scale: 1.0 }
    }
}

impl EngineConfig {
    pub fn with_max_time_steps(mut self, cap: u64) -> Self {
        self.max_time_steps = cap;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius_scale > 0.0 && self.radius_scale.is_finite()) {
            return Err(Error::invalid(format!("radius scale {} must be positive", self.radius_scale)));
        }
        Ok(())
    }
}

/// State visible to a [`StepObserver`] after the bounds of a step are computed.
#[derive(Debug)]
pub struct StepView<'a> {
    pub t: u64,
    /// Indexed by arm; only entries of arms in `partition` are current.
    pub bounds: &'a [ConfidenceBounds],
    pub partition: &'a Partition,
    pub pulls: &'a [u64],
}

pub trait StepObserver {
    fn observe(&mut self, view: &StepView<'_>);
}

/// Observer that does nothing.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoObserver;

impl StepObserver for NoObserver {
    #[inline]
    fn observe(&mut self, _: &StepView<'_>) {}
}

impl<F: FnMut(&StepView<'_>)> StepObserver for F {
    fn observe(&mut self, view: &StepView<'_>) {
        self(view)
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta = {delta} outside (0, 1)")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Policy {
    Lucb,
    Uniform,
}

#[derive(Debug, Clone, Copy)]
struct Forcing {
    k: f64,
    c: f64,
}

struct Engine {
    samplers: Vec<ArmSampler>,
    states: Vec<ArmState>,
    means: Vec<f64>,
    bounds: Vec<ConfidenceBounds>,
    active: Vec<usize>,
    partition: Partition,
    pull_counts: Vec<u64>,
    /// `1/sqrt(T_i)` and sample variance, refreshed on each pull.
    inv_sqrt_pulls: Vec<f64>,
    variances: Vec<f64>,
    rounds: u64,
}

impl Engine {
    fn new(instance: &BanditInstance) -> Self {
        let n = instance.n_arms();
        let zero = ConfidenceBounds { l_mu: 0.0, u_mu: 0.0, l_var: 0.0, u_var: 0.0 };
        Engine {
            samplers: instance.arms().iter().map(|d| d.sampler()).collect(),
            states: vec![ArmState::new(); n],
            means: vec![0.0; n],
            bounds: vec![zero; n],
            active: (0..n).collect(),
            partition: Partition::default(),
            pull_counts: vec![0; n],
            inv_sqrt_pulls: vec![0.0; n],
            variances: vec![0.0; n],
            rounds: 0,
        }
    }

    #[inline]
    fn pull<R: Rng + ?Sized>(&mut self, arm: usize, rng: &mut R) {
        let x = self.samplers[arm].sample(rng);
        let s = &mut self.states[arm];
        s.update(x);
        self.pull_counts[arm] += 1;
        self.inv_sqrt_pulls[arm] = 1.0 / (s.pulls() as f64).sqrt();
        self.variances[arm] = s.sample_variance().unwrap_or(f64::NAN);
        self.rounds += 1;
    }

    fn refresh(&mut self, radii: &StepRadii) {
        let (mean_one, var_one) = (radii.mean_at_one(), radii.var_at_one());
        for &i in &self.active {
            let m = self.states[i].mean();
            let v = self.variances[i];
            let (a, b) = (mean_one * self.inv_sqrt_pulls[i], var_one * self.inv_sqrt_pulls[i]);
            self.means[i] = m;
            self.bounds[i] = ConfidenceBounds { l_mu: m - a, u_mu: m + a, l_var: v - b, u_var: v + b };
        }
    }

    fn finish(&self, rec: Option<Recommendation>, time_steps: u64) -> RunResult {
        let (estimated_flag, recommended_arm, terminated, stop_reason) = match rec {
            Some(Recommendation { feasible: true, arm }) => (true, arm, true, StopReason::Recommended),
            Some(Recommendation { feasible: false, .. }) => (false, None, true, StopReason::DeclaredInfeasible),
            None => (false, None, false, StopReason::TimeCap),
        };
        RunResult {
            estimated_flag,
            recommended_arm,
            rounds: self.rounds,
            time_steps,
            per_arm_pulls: self.pull_counts.clone(),
            terminated,
            stop_reason,
        }
    }
}

/// Whether any possibly feasible arm other than the empirical best feasible arm
/// can still beat it. Equivalent to `F̄_t ∩ P_t ≠ ∅`.
#[inline]
fn competitor_remains(partition: &Partition, bounds: &[ConfidenceBounds], best: Option<usize>) -> bool {
    match best {
        None => !partition.possibly_feasible.is_empty(),
        Some(b) => {
            let floor = bounds[b].l_mu;
            partition.possibly_feasible.iter().any(|&i| i != b && bounds[i].u_mu >= floor)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_engine<R: Rng + ?Sized, O: StepObserver>(
    instance: &BanditInstance,
    delta: f64,
    rule: RadiusRule,
    warmup: u64,
    first_t: u64,
    policy: Policy,
    forcing: Option<Forcing>,
    config: &EngineConfig,
    rng: &mut R,
    observer: &mut O,
) -> RunResult {
    let n = instance.n_arms();
    let threshold = instance.sigma_bar_sq();
    let eps_v = instance.eps_v();
    let mut e = Engine::new(instance);
    for arm in 0..n {
        for _ in 0..warmup {
            e.pull(arm, rng);
        }
    }
    let mut steps = 0u64;
    let mut t = first_t;
    loop {
        let radii = rule.at_step(t, n, delta).scaled(config.radius_scale);
        e.refresh(&radii);
        e.partition.compute_into(&e.bounds, &e.active, threshold, eps_v);
        observer.observe(&StepView { t, bounds: &e.bounds, partition: &e.partition, pulls: &e.pull_counts });

        let best = empirical_best_feasible(&e.partition, &e.means);
        if !competitor_remains(&e.partition, &e.bounds, best) {
            let rec = if e.partition.feasible.is_empty() {
                Recommendation { feasible: false, arm: None }
            } else {
                let arm = argmax_by(e.partition.possibly_feasible.iter().copied(), |i| e.means[i]);
                Recommendation { feasible: true, arm }
            };
            return e.finish(Some(rec), steps);
        }
        if steps >= config.max_time_steps {
            return e.finish(None, steps);
        }

        let decision = match policy {
            Policy::Lucb => select_arms(&e.partition, &e.bounds, &e.means),
            Policy::Uniform => select_uniform(&e.partition, rng),
        };
        for arm in decision.arms() {
            e.pull(arm, rng);
        }
        if let Some(Forcing { k, c }) = forcing {
            let need = forced_pull_threshold(t, n, delta, k, c);
            for idx in 0..e.partition.possibly_feasible.len() {
                let i = e.partition.possibly_feasible[idx];
                if !decision.contains(i) && e.states[i].pulls() < need {
                    e.pull(i, rng);
                }
            }
        }
        // Arms declared infeasible are frozen from here on.
        std::mem::swap(&mut e.active, &mut e.partition.possibly_feasible);
        steps += 1;
        t += 1;
    }
}

fn n_plus_one(instance: &BanditInstance) -> u64 {
    instance.n_arms() as u64 + 1
}

fn require_bounded(instance: &BanditInstance) -> Result<()> {
    match instance.arms().iter().position(|d| !d.is_bounded()) {
        Some(arm) => Err(Error::UnboundedArm { arm }),
        None => Ok(()),
    }
}

pub(crate) fn run_bounded<R: Rng + ?Sized, O: StepObserver>(
    instance: &BanditInstance,
    delta: f64,
    policy: Policy,
    config: &EngineConfig,
    rng: &mut R,
    observer: &mut O,
) -> Result<RunResult> {
    check_delta(delta)?;
    config.validate()?;
    require_bounded(instance)?;
    Ok(run_engine(instance, delta, RadiusRule::Bounded, 2, n_plus_one(instance), policy, None, config, rng, observer))
}

/// One VA-LUCB trial on an instance with rewards in `[0, 1]`.
pub fn run_valucb<R: Rng + ?Sized>(
    instance: &BanditInstance,
    delta: f64,
    config: &EngineConfig,
    rng: &mut R,
) -> Result<RunResult> {
    run_bounded(instance, delta, Policy::Lucb, config, rng, &mut NoObserver)
}

/// [`run_valucb`] with a callback after each step's bounds and partition are computed.
pub fn run_valucb_observed<R: Rng + ?Sized, O: StepObserver>(
    instance: &BanditInstance,
    delta: f64,
    config: &EngineConfig,
    rng: &mut R,
    observer: &mut O,
) -> Result<RunResult> {
    run_bounded(instance, delta, Policy::Lucb, config, rng, observer)
}

/// One trial of the sub-Gaussian variant with the instance's proxy `sigma` and `k = 2`, `c = 64`.
pub fn run_valucb_subg<R: Rng + ?Sized>(
    instance: &BanditInstance,
    delta: f64,
    config: &EngineConfig,
    rng: &mut R,
) -> Result<RunResult> {
    run_valucb_subg_observed(instance, delta, config, rng, &mut NoObserver)
}

pub fn run_valucb_subg_observed<R: Rng + ?Sized, O: StepObserver>(
    instance: &BanditInstance,
    delta: f64,
    config: &EngineConfig,
    rng: &mut R,
    observer: &mut O,
) -> Result<RunResult> {
    check_delta(delta)?;
    config.validate()?;
    let sigma = instance.subg_proxy().ok_or(Error::MissingSubgProxy)?;
    let rule = RadiusRule::subgaussian(sigma);
    let RadiusRule::SubGaussian { k, c, .. } = rule else { unreachable!() };
    let t0 = warmup_length_t0(instance.n_arms(), delta, k, c);
    Ok(run_engine(instance, delta, rule, t0, t0 + 1, Policy::Lucb, Some(Forcing { k, c }), config, rng, observer))
}
