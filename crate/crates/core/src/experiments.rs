//! Instance catalog, seeded multi-trial runner and aggregation.
//!
//! Trial `k` of an (algorithm, case, j) cell draws from a `ChaCha8Rng` seeded with
//! [`trial_seed`]`(master_seed, case, j, k)`, a splitmix64 chain over the master
//! seed, an FNV-1a hash of the case label, `j` and `k`. The algorithm is not part
//! of the seed, so every algorithm sees the same stream per trial index.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{run_riskaverse_ucb_bai, run_va_uniform, RiskAverseConfig, RiskAverseStopRule};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::hardness::{self, HardnessReport};
use crate::instance::{derive_ground_truth, BanditInstance, GroundTruth};
use crate::valucb::{check_delta, run_valucb, run_valucb_subg, EngineConfig, RunResult};

/// Version of the CSV header and JSON aggregate layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseId {
    C1a,
    C1b,
    C1c,
    C1d,
    C2,
    C3,
    C4a,
    C4b,
    C4c,
    C4d,
    Cmp,
    /// A user-supplied instance with a free-form label.
    Inline(String),
}

impl CaseId {
    pub const CATALOG: [CaseId; 11] = [
        CaseId::C1a,
        CaseId::C1b,
        CaseId::C1c,
        CaseId::C1d,
        CaseId::C2,
        CaseId::C3,
        CaseId::C4a,
        CaseId::C4b,
        CaseId::C4c,
        CaseId::C4d,
        CaseId::Cmp,
    ];

    pub fn label(&self) -> &str {
        match self {
            CaseId::C1a => "1a",
            CaseId::C1b => "1b",
            CaseId::C1c => "1c",
            CaseId::C1d => "1d",
            CaseId::C2 => "2",
            CaseId::C3 => "3",
            CaseId::C4a => "4a",
            CaseId::C4b => "4b",
            CaseId::C4c => "4c",
            CaseId::C4d => "4d",
            CaseId::Cmp => "cmp",
            CaseId::Inline(name) => name,
        }
    }

    /// Valid instance indices; empty for inline instances.
    pub fn j_range(&self) -> std::ops::RangeInclusive<u32> {
        match self {
            CaseId::Cmp => 1..=10,
            CaseId::Inline(_) => std::ops::RangeInclusive::new(1, 0),
            _ => 0..=10,
        }
    }

    pub fn short_description(&self) -> &'static str {
        match self {
            CaseId::C1a => "best arm, mean gap binding; vary the best arm's mean gap",
            CaseId::C1b => "best arm, mean gap binding; vary the best arm's variance gap",
            CaseId::C1c => "best arm, variance gap binding; vary the best arm's variance gap",
            CaseId::C1d => "best arm, variance gap binding; vary the best arm's mean gap",
            CaseId::C2 => "feasible suboptimal arms; vary their mean gaps",
            CaseId::C3 => "infeasible instance; vary the variance gaps",
            CaseId::C4a => "infeasible suboptimal arms, variance gap binding; vary mean gaps",
            CaseId::C4b => "infeasible suboptimal arms, variance gap binding; vary variance gaps",
            CaseId::C4c => "infeasible suboptimal arms, mean gap binding; vary mean gaps",
            CaseId::C4d => "infeasible suboptimal arms, mean gap binding; vary variance gaps",
            CaseId::Cmp => "high-risk high-reward comparison instances",
            CaseId::Inline(_) => "inline instance",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        CaseId::CATALOG
            .iter()
            .find(|c| c.label() == lower)
            .cloned()
            .ok_or_else(|| Error::UnknownCatalogEntry(s.to_string()))
    }
}

impl Serialize for CaseId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

/// An instance together with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub case_id: CaseId,
    pub j: u32,
    pub instance: BanditInstance,
    pub ground_truth: GroundTruth,
}

impl CatalogEntry {
    /// Wrap a user-supplied instance.
    pub fn inline(label: impl Into<String>, instance: BanditInstance) -> Result<Self> {
        let ground_truth = derive_ground_truth(&instance)?;
        Ok(CatalogEntry { case_id: CaseId::Inline(label.into()), j: 0, instance, ground_truth })
    }

    /// Table moments `(mean, variance)` per arm.
    pub fn moments(&self) -> Vec<(f64, f64)> {
        self.instance.arms().iter().map(|a| (a.mean(), a.variance())).collect()
    }
}

/// Table rows for one (case, j): threshold and per-arm `(mean, variance)`.
pub fn catalog_moments(case: &CaseId, j: u32) -> Result<(f64, Vec<(f64, f64)>)> {
    if !case.j_range().contains(&j) {
        return Err(Error::UnknownCatalogEntry(format!("{case} j={j}")));
    }
    let jf = j as i32;
    let g12 = 1.2f64.powi(jf);
    let g11 = 1.1f64.powi(jf);
    let with = |best: (f64, f64), second: (f64, f64), rest: (f64, f64)| {
        let mut arms = vec![best, second];
        arms.extend(std::iter::repeat(rest).take(18));
        arms
    };
    let uniform_rest = |best: (f64, f64), rest: (f64, f64)| {
        let mut arms = vec![best];
        arms.extend(std::iter::repeat(rest).take(19));
        arms
    };
    Ok(match case {
        CaseId::C1a => (0.25, with((0.7, 0.09), (0.7 - 0.01 * g12, 0.09), (0.2, 0.09))),
        CaseId::C1b => (0.25, with((0.55, 0.25 - 0.01 * g12), (0.53, 0.09), (0.15, 0.09))),
        CaseId::C1c => (0.25, with((0.55, 0.25 - 0.01 * g12), (0.15, 0.09), (0.15, 0.09))),
        CaseId::C1d => (0.04, with((0.7, 0.03), (0.7 - 0.02 * g11, 0.03), (0.3, 0.03))),
        CaseId::C2 => (0.25, uniform_rest((0.7, 0.09), (0.7 - 0.02 * g12, 0.09))),
        CaseId::C3 => (0.04, vec![(0.55, 0.04 + 0.01 * g12); 20]),
        CaseId::C4a => (0.04, uniform_rest((0.7, 0.03), (0.7 - 0.02 * g12, 0.2))),
        CaseId::C4b => (0.04, uniform_rest((0.55, 0.03), (0.53, 0.04 + 0.05 * g11))),
        CaseId::C4c => (0.2, uniform_rest((0.7, 0.04), (0.7 - 0.09 * g11, 0.21))),
        CaseId::C4d => (0.04, uniform_rest((0.7, 0.03), (0.3, 0.04 + 0.01 * g12))),
        CaseId::Cmp => {
            let risky = 0.233 - 0.003 * j as f64;
            let mut arms = vec![(0.1, 0.08), (0.15, 0.1), (0.2, 0.12), (0.25, 0.14), (0.3, 0.16)];
            arms.extend([0.4, 0.45, 0.5, 0.55, 0.6].map(|m| (m, risky)));
            (0.2, arms)
        }
        CaseId::Inline(_) => unreachable!("inline cases have an empty j range"),
    })
}

/// Catalog instance with Beta arms built from the table moments.
pub fn catalog_instance(case: &CaseId, j: u32) -> Result<CatalogEntry> {
    let (sigma_bar_sq, moments) = catalog_moments(case, j)?;
    let arms = moments.iter().map(|&(m, v)| DistributionSpec::beta_from_moments(m, v)).collect::<Result<Vec<_>>>()?;
    let instance = BanditInstance::new(arms, sigma_bar_sq)?;
    let ground_truth = derive_ground_truth(&instance)?;
    Ok(CatalogEntry { case_id: case.clone(), j, instance, ground_truth })
}

/// Every `(case, j)` of the catalog in table order.
pub fn catalog_keys() -> Vec<(CaseId, u32)> {
    CaseId::CATALOG.iter().flat_map(|c| c.j_range().map(move |j| (c.clone(), j))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Valucb,
    ValucbSubg,
    Riskaverse,
    VaUniform,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] =
        [Algorithm::Valucb, Algorithm::ValucbSubg, Algorithm::Riskaverse, Algorithm::VaUniform];

    pub fn id(&self) -> &'static str {
        match self {
            Algorithm::Valucb => "valucb",
            Algorithm::ValucbSubg => "valucb_subg",
            Algorithm::Riskaverse => "riskaverse",
            Algorithm::VaUniform => "va_uniform",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Algorithm::ALL
            .iter()
            .find(|a| a.id() == lower)
            .copied()
            .ok_or_else(|| Error::invalid(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOptions {
    pub engine: EngineConfig,
    /// Worker threads; `1` runs trials sequentially.
    pub parallel: usize,
    pub riskaverse_stop_rule: RiskAverseStopRule,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions {
            engine: EngineConfig::default(),
            parallel: 1,
            riskaverse_stop_rule: RiskAverseStopRule::default(),
        }
    }
}

impl TrialOptions {
    pub fn with_parallel(mut self, threads: usize) -> Self {
        self.parallel = threads;
        self
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Stream seed for one trial.
pub fn trial_seed(master_seed: u64, case: &CaseId, j: u32, trial: u32) -> u64 {
    let mut h = splitmix64(master_seed);
    h = splitmix64(h ^ fnv1a(case.label().as_bytes()));
    h = splitmix64(h ^ j as u64);
    splitmix64(h ^ trial as u64)
}

/// True iff the run answered correctly: `(f=1, f̂=1, i_out=i*)` or `(f=0, f̂=0)`.
pub fn score_success(result: &RunResult, gt: &GroundTruth) -> bool {
    if !result.has_answer() {
        return false;
    }
    match gt.i_star {
        Some(b) => result.estimated_flag && result.recommended_arm == Some(b),
        None => !result.estimated_flag,
    }
}

/// One row of the per-trial CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub algorithm: Algorithm,
    pub case: CaseId,
    pub j: u32,
    pub trial: u32,
    pub seed: u64,
    pub tau: u64,
    pub time_steps: u64,
    #[serde(serialize_with = "as_digit")]
    pub success: bool,
    #[serde(skip)]
    pub terminated: bool,
}

fn as_digit<S: serde::Serializer>(b: &bool, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u8(*b as u8)
}

/// Per-cell statistics; the standard deviation uses the `n - 1` denominator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateResult {
    pub schema_version: u32,
    pub algorithm: Algorithm,
    pub case: CaseId,
    pub j: u32,
    pub delta: f64,
    pub n_trials: u32,
    pub mean_tau: f64,
    pub std_tau: f64,
    pub success_rate: f64,
    pub mean_time_steps: f64,
    pub n_capped: u32,
    pub h_va: f64,
    pub scale: Option<f64>,
    pub hardness: HardnessReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialBatch {
    pub aggregate: AggregateResult,
    pub records: Vec<TrialRecord>,
}

fn run_one(
    algorithm: Algorithm,
    entry: &CatalogEntry,
    delta: f64,
    ra: Option<&RiskAverseConfig>,
    engine: &EngineConfig,
    seed: u64,
) -> Result<RunResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = &entry.instance;
    match algorithm {
        Algorithm::Valucb => run_valucb(inst, delta, engine, &mut rng),
        Algorithm::ValucbSubg => run_valucb_subg(inst, delta, engine, &mut rng),
        Algorithm::VaUniform => run_va_uniform(inst, delta, engine, &mut rng),
        Algorithm::Riskaverse => run_riskaverse_ucb_bai(inst, delta, ra.expect("config prepared"), engine, &mut rng),
    }
}

/// Run `n_trials` seeded trials of `algorithm` on `entry`.
pub fn run_trials(
    algorithm: Algorithm,
    entry: &CatalogEntry,
    delta: f64,
    n_trials: u32,
    master_seed: u64,
    options: &TrialOptions,
) -> Result<TrialBatch> {
    check_delta(delta)?;
    if n_trials == 0 {
        return Err(Error::invalid("n_trials must be at least 1"));
    }
    let ra = match algorithm {
        Algorithm::Riskaverse => {
            Some(RiskAverseConfig::oracle(&entry.ground_truth)?.with_stop_rule(options.riskaverse_stop_rule))
        }
        _ => None,
    };
    let job = |trial: u32| -> Result<TrialRecord> {
        let seed = trial_seed(master_seed, &entry.case_id, entry.j, trial);
        let r = run_one(algorithm, entry, delta, ra.as_ref(), &options.engine, seed)?;
        Ok(TrialRecord {
            algorithm,
            case: entry.case_id.clone(),
            j: entry.j,
            trial,
            seed,
            tau: r.rounds,
            time_steps: r.time_steps,
            success: score_success(&r, &entry.ground_truth),
            terminated: r.terminated,
        })
    };
    let records: Vec<TrialRecord> = if options.parallel > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.parallel)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
        pool.install(|| (0..n_trials).into_par_iter().map(job).collect::<Result<Vec<_>>>())?
    } else {
        (0..n_trials).map(job).collect::<Result<Vec<_>>>()?
    };

    let n = records.len() as f64;
    let mean_tau = records.iter().map(|r| r.tau as f64).sum::<f64>() / n;
    let std_tau = if records.len() > 1 {
        let ss: f64 = records.iter().map(|r| (r.tau as f64 - mean_tau).powi(2)).sum();
        (ss / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let hardness = hardness::report(&entry.ground_truth, delta);
    let aggregate = AggregateResult {
        schema_version: SCHEMA_VERSION,
        algorithm,
        case: entry.case_id.clone(),
        j: entry.j,
        delta,
        n_trials,
        mean_tau,
        std_tau,
        success_rate: records.iter().filter(|r| r.success).count() as f64 / n,
        mean_time_steps: records.iter().map(|r| r.time_steps as f64).sum::<f64>() / n,
        n_capped: records.iter().filter(|r| !r.terminated).count() as u32,
        h_va: hardness.h_va,
        scale: hardness.scale,
        hardness,
    };
    Ok(TrialBatch { aggregate, records })
}

/// CSV header of the per-trial output.
pub const CSV_HEADER: &str = "algorithm,case,j,trial,seed,tau,time_steps,success";

/// Write trial rows as CSV with [`CSV_HEADER`].
pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::invalid(format!("csv: {e}"));
    if records.is_empty() {
        w.write_record(CSV_HEADER.split(',')).map_err(io)?;
    }
    for r in records {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| Error::invalid(format!("csv: {e}")))?;
    Ok(())
}

/// Serialize aggregates as a versioned JSON document.
pub fn aggregates_json(aggregates: &[AggregateResult]) -> serde_json::Value {
    serde_json::json!({ "schema_version": SCHEMA_VERSION, "aggregates": aggregates })
}
