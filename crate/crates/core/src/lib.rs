//! Variance-constrained best-arm identification under fixed confidence.
//!
//! The crate provides
//!
//! - reward laws and the Beta-from-moments construction ([`distributions`]),
//! - bandit instances and their analytic ground truth ([`instance`]),
//! - streaming estimators and confidence radii ([`stats`]),
//! - the VA-LUCB engine and its sub-Gaussian variant ([`valucb`]),
//! - the RiskAverse-UCB-BAI and VA-Uniform comparison algorithms ([`baselines`]),
//! - closed-form hardness and lower-bound quantities ([`hardness`]),
//! - the experiment catalog and seeded multi-trial runner ([`experiments`]),
//! - a brute-force reference evaluator ([`oracle`]) and fast self-checks ([`verify`]).
//!
//! Arms are indexed from zero. Every argmax in the crate breaks ties by the
//! smallest index.

pub mod baselines;
pub mod distributions;
mod error;
pub mod experiments;
pub mod hardness;
pub mod instance;
pub mod oracle;
pub mod stats;
pub mod valucb;
pub mod verify;

pub use baselines::{run_riskaverse_ucb_bai, run_va_uniform, RiskAverseConfig, RiskAverseStopRule};
pub use distributions::{ArmSampler, DistributionSpec, Moments};
pub use error::{Error, Result};
pub use experiments::{
    catalog_instance, run_trials, score_success, AggregateResult, Algorithm, CaseId, CatalogEntry, TrialBatch,
    TrialOptions, TrialRecord,
};
pub use hardness::{HardnessReport, HardnessTerms};
pub use instance::{derive_ground_truth, BanditInstance, GroundTruth};
pub use stats::{ArmState, ConfidenceBounds, RadiusRule};
pub use valucb::{run_valucb, run_valucb_subg, EngineConfig, Partition, RunResult, StopReason};
