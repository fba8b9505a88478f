//! Fast self-checks: catalog validity, hardness cross-check against the
//! brute-force oracle, and empirical confidence coverage.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::experiments::{catalog_instance, catalog_keys, trial_seed, CaseId, CatalogEntry};
use crate::hardness;
use crate::oracle::{rel_diff, RawInstance};
use crate::valucb::{run_valucb_observed, EngineConfig, StepView};

/// Tolerance of every exact-arithmetic comparison.
pub const REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Expected `(mean gap, variance gap)` per arm, read from the catalog's gap columns.
pub fn table_gaps(case: &CaseId, j: u32) -> Option<Vec<(f64, f64)>> {
    if !case.j_range().contains(&j) {
        return None;
    }
    let g12 = 1.2f64.powi(j as i32);
    let g11 = 1.1f64.powi(j as i32);
    let layout = |best: (f64, f64), second: (f64, f64), rest: (f64, f64)| {
        let mut v = vec![best, second];
        v.extend(std::iter::repeat(rest).take(18));
        v
    };
    Some(match case {
        CaseId::C1a => layout((0.01 * g12, 0.16), (0.01 * g12, 0.16), (0.5, 0.16)),
        CaseId::C1b => layout((0.02, 0.01 * g12), (0.02, 0.16), (0.4, 0.16)),
        CaseId::C1c => layout((0.4, 0.01 * g12), (0.4, 0.16), (0.4, 0.16)),
        CaseId::C1d => layout((0.02 * g11, 0.01), (0.02 * g11, 0.01), (0.4, 0.01)),
        CaseId::C2 => layout((0.02 * g12, 0.16), (0.02 * g12, 0.16), (0.02 * g12, 0.16)),
        CaseId::C3 => vec![(0.0, 0.01 * g12); 20],
        CaseId::C4a => layout((0.02 * g12, 0.01), (0.02 * g12, 0.16), (0.02 * g12, 0.16)),
        CaseId::C4b => layout((0.02, 0.01), (0.02, 0.05 * g11), (0.02, 0.05 * g11)),
        CaseId::C4c => layout((0.09 * g11, 0.16), (0.09 * g11, 0.01), (0.09 * g11, 0.01)),
        CaseId::C4d => layout((0.4, 0.01), (0.4, 0.01 * g12), (0.4, 0.01 * g12)),
        CaseId::Cmp => {
            let risky = 0.033 - 0.003 * j as f64;
            let mut v = vec![(0.2, 0.12), (0.15, 0.1), (0.1, 0.08), (0.05, 0.06), (0.05, 0.04)];
            v.extend(std::iter::repeat((0.0, risky)).take(5));
            v
        }
        CaseId::Inline(_) => return None,
    })
}

/// Index of the best feasible arm in the catalog layout.
fn table_best_arm(case: &CaseId) -> Option<usize> {
    match case {
        CaseId::C3 => None,
        CaseId::Cmp => Some(4),
        _ => Some(0),
    }
}

/// Every catalog entry builds and reproduces its table gaps to [`REL_TOL`].
pub fn check_catalog() -> CheckOutcome {
    let mut failures = Vec::new();
    let keys = catalog_keys();
    for (case, j) in &keys {
        let entry = match catalog_instance(case, *j) {
            Ok(e) => e,
            Err(e) => {
                failures.push(format!("{case}/{j}: {e}"));
                continue;
            }
        };
        let gt = &entry.ground_truth;
        if gt.i_star != table_best_arm(case) {
            failures.push(format!("{case}/{j}: best arm {:?}", gt.i_star));
        }
        let expected = table_gaps(case, *j).expect("catalog key");
        for (i, &(dm, dv)) in expected.iter().enumerate() {
            if (gt.mean_gaps[i] - dm).abs() > REL_TOL || (gt.var_gaps[i] - dv).abs() > REL_TOL {
                failures.push(format!(
                    "{case}/{j} arm {i}: gaps ({}, {}) vs table ({dm}, {dv})",
                    gt.mean_gaps[i], gt.var_gaps[i]
                ));
            }
        }
    }
    outcome("catalog_validity", keys.len(), failures)
}

fn outcome(name: &'static str, n: usize, failures: Vec<String>) -> CheckOutcome {
    let passed = failures.is_empty();
    let detail =
        if passed { format!("{n} entries") } else { format!("{} failures; first: {}", failures.len(), failures[0]) };
    CheckOutcome { name, passed, detail }
}

/// Oracle view of a catalog entry; `mismatch` shifts the first arm's mean by `1e-6`.
pub fn oracle_view(entry: &CatalogEntry, mismatch: bool) -> RawInstance {
    let mut pairs = entry.moments();
    if mismatch {
        pairs[0].0 += 1e-6;
    }
    RawInstance::new(&pairs, entry.instance.sigma_bar_sq())
}

/// Compare `h_va`, `H_1` and the RiskAverse per-arm complexities with the oracle
/// on every catalog entry.
pub fn check_hardness_oracle(mismatch: bool) -> CheckOutcome {
    let mut failures = Vec::new();
    let keys = catalog_keys();
    for (case, j) in &keys {
        let entry = match catalog_instance(case, *j) {
            Ok(e) => e,
            Err(e) => {
                failures.push(format!("{case}/{j}: {e}"));
                continue;
            }
        };
        let gt = &entry.ground_truth;
        let raw = oracle_view(&entry, mismatch);
        let mut compare = |what: String, a: f64, b: f64| {
            if rel_diff(a, b) > REL_TOL {
                failures.push(format!("{case}/{j} {what}: {a} vs oracle {b}"));
            }
        };
        compare("h_va".into(), hardness::h_va(gt), raw.h_va());
        if let (Ok(h1), Some(o)) = (hardness::h1(gt), raw.h1()) {
            compare("h1".into(), h1, o);
        }
        if let Some(b) = gt.i_star {
            let eps_mu = gt.mean_gaps[b];
            let eps_v = gt.min_risky_var_gap().unwrap_or(gt.var_gaps[b]);
            for i in 0..gt.n_arms() {
                let ours = hardness::david_ci(gt, eps_mu, eps_v, i).expect("feasible entry");
                let theirs = raw.riskaverse_arm_complexity(eps_mu, eps_v, i).unwrap_or(f64::NAN);
                compare(format!("C_{i}"), ours, theirs);
            }
        }
    }
    outcome("hardness_oracle", keys.len(), failures)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageReport {
    pub trials: u32,
    pub violating_trials: u32,
    pub fraction: f64,
    /// `δ/2` plus three binomial standard deviations.
    pub tolerance: f64,
}

impl CoverageReport {
    pub fn passed(&self) -> bool {
        self.fraction <= self.tolerance
    }
}

/// Run VA-LUCB and record whether any active arm's true mean or variance leaves
/// its confidence interval at any step.
pub fn coverage(
    entry: &CatalogEntry,
    delta: f64,
    trials: u32,
    master_seed: u64,
    engine: &EngineConfig,
) -> Result<CoverageReport> {
    let gt = &entry.ground_truth;
    let mut violating = 0u32;
    for trial in 0..trials {
        let seed = trial_seed(master_seed, &entry.case_id, entry.j, trial);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut violated = false;
        let mut watch = |view: &StepView<'_>| {
            if violated {
                return;
            }
            let p = view.partition;
            violated = p
                .possibly_feasible
                .iter()
                .chain(&p.infeasible)
                .any(|&i| !view.bounds[i].covers(gt.means[i], gt.variances[i]));
        };
        run_valucb_observed(&entry.instance, delta, engine, &mut rng, &mut watch)?;
        violating += violated as u32;
    }
    let p = delta / 2.0;
    let n = trials as f64;
    Ok(CoverageReport {
        trials,
        violating_trials: violating,
        fraction: violating as f64 / n,
        tolerance: p + 3.0 * (p * (1.0 - p) / n).sqrt(),
    })
}

/// Coverage on catalog entry (1a, 10) at `δ = 0.1`.
pub fn check_coverage(trials: u32, master_seed: u64, radius_scale: f64) -> CheckOutcome {
    let run = || -> Result<CoverageReport> {
        let entry = catalog_instance(&CaseId::C1a, 10)?;
        let engine = EngineConfig { radius_scale, ..EngineConfig::default() };
        coverage(&entry, 0.1, trials, master_seed, &engine)
    };
    match run() {
        Ok(r) => CheckOutcome {
            name: "confidence_coverage",
            passed: r.passed(),
            detail: format!(
                "{}/{} trials with a violation ({:.4} vs tolerance {:.4})",
                r.violating_trials, r.trials, r.fraction, r.tolerance
            ),
        },
        Err(e) => CheckOutcome { name: "confidence_coverage", passed: false, detail: e.to_string() },
    }
}
