//! Closed-form hardness quantities, the lower bound and the sample-complexity scale.
//!
//! Extended-real convention: `1/0 = +inf` and `1/inf = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{bernoulli_feasibility_roots, GroundTruth};

/// `x^{-2}` under the extended-real convention.
#[inline]
pub(crate) fn inv_sq(x: f64) -> f64 {
    if x == 0.0 {
        f64::INFINITY
    } else if x.is_infinite() {
        0.0
    } else {
        1.0 / (x * x)
    }
}

/// The four summands of `H_VA`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardnessTerms {
    /// Best feasible arm: `min{Δ/2, Δ^v}^{-2}`.
    pub best_arm: f64,
    /// Feasible suboptimal arms: `(Δ/2)^{-2}`.
    pub feasible_suboptimal: f64,
    /// Infeasible risky arms: `(Δ^v)^{-2}`.
    pub infeasible_risky: f64,
    /// Infeasible suboptimal arms: `max{Δ/2, Δ^v}^{-2}`.
    pub infeasible_suboptimal: f64,
}

impl HardnessTerms {
    pub fn total(&self) -> f64 {
        self.best_arm + self.feasible_suboptimal + self.infeasible_risky + self.infeasible_suboptimal
    }
}

pub fn h_va_terms(gt: &GroundTruth) -> HardnessTerms {
    let mut terms =
        HardnessTerms { best_arm: 0.0, feasible_suboptimal: 0.0, infeasible_risky: 0.0, infeasible_suboptimal: 0.0 };
    if let Some(b) = gt.i_star {
        terms.best_arm = inv_sq((gt.mean_gaps[b] / 2.0).min(gt.var_gaps[b]));
    }
    for i in 0..gt.n_arms() {
        let (half_gap, vgap) = (gt.mean_gaps[i] / 2.0, gt.var_gaps[i]);
        match (gt.is_feasible_arm(i), gt.is_suboptimal(i)) {
            (true, true) => terms.feasible_suboptimal += inv_sq(half_gap),
            (false, false) => terms.infeasible_risky += inv_sq(vgap),
            (false, true) => terms.infeasible_suboptimal += inv_sq(half_gap.max(vgap)),
            (true, false) => {}
        }
    }
    terms
}

/// Variance-aware hardness `H_VA`.
pub fn h_va(gt: &GroundTruth) -> f64 {
    h_va_terms(gt).total()
}

/// `H_1 = Σ_{i != i*} Δ_i^{-2}`; `+inf` when a risky arm other than `i*` exists (its gap is 0).
pub fn h1(gt: &GroundTruth) -> Result<f64> {
    let b = gt.i_star.ok_or(Error::NoFeasibleArm)?;
    Ok((0..gt.n_arms()).filter(|&i| i != b).map(|i| inv_sq(gt.mean_gaps[i])).sum())
}

/// Sub-Gaussian hardness and its floored form `max{h, N}`.
pub fn h_va_sigma(gt: &GroundTruth, sigma: f64, c: f64) -> (f64, f64) {
    let s2 = sigma * sigma;
    let mean_term = |half_gap: f64| 2.0 * s2 * inv_sq(half_gap);
    let var_term = |vgap: f64| 2.0 * c * s2 * s2 * inv_sq(vgap);
    let mut h = 0.0;
    if let Some(b) = gt.i_star {
        h += mean_term(gt.mean_gaps[b] / 2.0).max(var_term(gt.var_gaps[b]));
    }
    for i in 0..gt.n_arms() {
        let (m, v) = (mean_term(gt.mean_gaps[i] / 2.0), var_term(gt.var_gaps[i]));
        match (gt.is_feasible_arm(i), gt.is_suboptimal(i)) {
            (true, true) => h += m,
            (false, false) => h += v,
            (false, true) => h += m.min(v),
            (true, false) => {}
        }
    }
    (h, h.max(gt.n_arms() as f64))
}

/// Per-arm complexity of the RiskAverse baseline:
/// `min{ 1/max(0, μ*−μ_i)², 4/max(0, σ_i²−σ̄²)², max{1/ε_μ², 4/max(0, ε_v−(σ_i²−σ̄²))²} }`.
pub fn david_ci(gt: &GroundTruth, eps_mu: f64, eps_v: f64, i: usize) -> Result<f64> {
    let b = gt.i_star.ok_or(Error::NoFeasibleArm)?;
    if !(eps_mu > 0.0 && eps_v > 0.0) {
        return Err(Error::invalid("accuracies must be positive"));
    }
    if i >= gt.n_arms() {
        return Err(Error::invalid(format!("arm {i} out of range")));
    }
    let excess = gt.variances[i] - gt.sigma_bar_sq;
    let mean_entry = inv_sq((gt.means[b] - gt.means[i]).max(0.0));
    let var_entry = 4.0 * inv_sq(excess.max(0.0));
    let acc_entry = inv_sq(eps_mu).max(4.0 * inv_sq((eps_v - excess).max(0.0)));
    Ok(mean_entry.min(var_entry).min(acc_entry))
}

/// Lower-bound constant and value: `c = min{a_(1/4 − σ̄²), a_/8, (1 − μ*)/8}`,
/// `bound = c · H_VA · ln(1/(2.4 δ))`. The last entry of the min is dropped when no arm is feasible.
pub fn lower_bound(gt: &GroundTruth, delta: f64) -> Result<(f64, f64)> {
    let s = gt.sigma_bar_sq;
    let (a_under, _) = bernoulli_feasibility_roots(s)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta = {delta} outside (0, 1)")));
    }
    let mut c = (a_under * (0.25 - s)).min(a_under / 8.0);
    if let Some(b) = gt.i_star {
        c = c.min((1.0 - gt.means[b]) / 8.0);
    }
    Ok((c, c * h_va(gt) * (1.0 / (2.4 * delta)).ln()))
}

/// `h ln(h / δ)`.
pub fn scale(h: f64, delta: f64) -> Result<f64> {
    let ratio = h / delta;
    if !(h > 0.0 && delta > 0.0 && delta < 1.0 && ratio > 1.0) {
        return Err(Error::ScaleUndefined { ratio });
    }
    Ok(h * ratio.ln())
}

/// Every hardness quantity of one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardnessReport {
    pub h_va: f64,
    pub terms: HardnessTerms,
    /// Absent for infeasible instances.
    pub h1: Option<f64>,
    /// Absent when the threshold is outside `(0, 1/4)`.
    pub lower_bound_constant: Option<f64>,
    pub lower_bound_value: Option<f64>,
    pub scale: Option<f64>,
    pub delta: f64,
}

pub fn report(gt: &GroundTruth, delta: f64) -> HardnessReport {
    let terms = h_va_terms(gt);
    let h = terms.total();
    let lb = lower_bound(gt, delta).ok();
    HardnessReport {
        h_va: h,
        terms,
        h1: h1(gt).ok(),
        lower_bound_constant: lb.map(|(c, _)| c),
        lower_bound_value: lb.map(|(_, v)| v),
        scale: scale(h, delta).ok(),
        delta,
    }
}
