//! Fixtures shared by the criterion benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use varbai_core::{catalog_instance, BanditInstance, CaseId, CatalogEntry, ConfidenceBounds, DistributionSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Three Bernoulli arms (0.9, 0.5, 0.1) with threshold 0.2.
pub fn bernoulli3() -> BanditInstance {
    let arms = [0.9, 0.5, 0.1].iter().map(|&p| DistributionSpec::bernoulli(p).unwrap()).collect();
    BanditInstance::new(arms, 0.2).unwrap()
}

pub fn catalog(case: CaseId, j: u32) -> CatalogEntry {
    catalog_instance(&case, j).expect("catalog entry")
}

/// Deterministic spread of bounds across the classification regions of `threshold`.
pub fn synthetic_bounds(n: usize, threshold: f64) -> Vec<ConfidenceBounds> {
    (0..n)
        .map(|i| {
            let x = (i as f64 * 0.618_033_988_75).fract();
            let m = 0.2 + 0.6 * x;
            let v = threshold * (0.5 + x);
            ConfidenceBounds { l_mu: m - 0.05, u_mu: m + 0.05, l_var: v - 0.02, u_var: v + 0.02 }
        })
        .collect()
}
