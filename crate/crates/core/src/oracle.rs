//! Brute-force reference evaluator for the hardness quantities.
//!
//! Works on raw `(mean, variance)` pairs and re-derives every set membership
//! from its definition for each arm, so it shares no code with
//! [`crate::instance`] or [`crate::hardness`]. Reciprocal squares rely on IEEE
//! arithmetic: `1/(0*0) = +inf` and `1/(inf*inf) = 0`.

/// One arm's first two moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmMoments {
    pub mean: f64,
    pub variance: f64,
}

/// A threshold and the arm moments, as given.
#[derive(Debug, Clone, PartialEq)]
pub struct RawInstance {
    pub arms: Vec<ArmMoments>,
    pub sigma_bar_sq: f64,
}

fn rsq(x: f64) -> f64 {
    1.0 / (x * x)
}

impl RawInstance {
    pub fn new(pairs: &[(f64, f64)], sigma_bar_sq: f64) -> Self {
        RawInstance {
            arms: pairs.iter().map(|&(mean, variance)| ArmMoments { mean, variance }).collect(),
            sigma_bar_sq,
        }
    }

    fn feasible(&self, i: usize) -> bool {
        self.arms[i].variance <= self.sigma_bar_sq
    }

    fn best_mean(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.arms.len() {
            if self.feasible(i) {
                let m = self.arms[i].mean;
                best = Some(match best {
                    Some(b) if b >= m => b,
                    _ => m,
                });
            }
        }
        best
    }

    /// First feasible arm attaining the best feasible mean.
    pub fn best_arm(&self) -> Option<usize> {
        let top = self.best_mean()?;
        (0..self.arms.len()).find(|&i| self.feasible(i) && self.arms[i].mean == top)
    }

    fn suboptimal(&self, i: usize) -> bool {
        match self.best_mean() {
            Some(top) => self.arms[i].mean < top,
            None => false,
        }
    }

    /// Mean gap of arm `i` under the crate's conventions.
    pub fn mean_gap(&self, i: usize) -> f64 {
        let Some(top) = self.best_mean() else { return 0.0 };
        if Some(i) == self.best_arm() {
            let mut closest = f64::INFINITY;
            for k in 0..self.arms.len() {
                if self.suboptimal(k) && top - self.arms[k].mean < closest {
                    closest = top - self.arms[k].mean;
                }
            }
            closest
        } else if self.suboptimal(i) {
            top - self.arms[i].mean
        } else {
            0.0
        }
    }

    pub fn var_gap(&self, i: usize) -> f64 {
        (self.arms[i].variance - self.sigma_bar_sq).abs()
    }

    /// Contribution of arm `i` to the variance-aware hardness.
    pub fn arm_hardness(&self, i: usize) -> f64 {
        let half = self.mean_gap(i) / 2.0;
        let v = self.var_gap(i);
        if Some(i) == self.best_arm() {
            rsq(if half < v { half } else { v })
        } else if self.feasible(i) && self.suboptimal(i) {
            rsq(half)
        } else if !self.feasible(i) && self.suboptimal(i) {
            rsq(if half > v { half } else { v })
        } else if !self.feasible(i) {
            rsq(v)
        } else {
            0.0
        }
    }

    pub fn h_va(&self) -> f64 {
        (0..self.arms.len()).map(|i| self.arm_hardness(i)).sum()
    }

    /// Classical hardness; `None` without a feasible arm.
    pub fn h1(&self) -> Option<f64> {
        let b = self.best_arm()?;
        Some((0..self.arms.len()).filter(|&i| i != b).map(|i| rsq(self.mean_gap(i))).sum())
    }

    /// Per-arm complexity of the RiskAverse baseline.
    pub fn riskaverse_arm_complexity(&self, eps_mu: f64, eps_v: f64, i: usize) -> Option<f64> {
        let top = self.best_mean()?;
        let a = &self.arms[i];
        let excess = a.variance - self.sigma_bar_sq;
        let by_mean = rsq(f64::max(0.0, top - a.mean));
        let by_var = 4.0 * rsq(f64::max(0.0, excess));
        let by_acc = f64::max(rsq(eps_mu), 4.0 * rsq(f64::max(0.0, eps_v - excess)));
        Some(by_mean.min(by_var).min(by_acc))
    }

    /// Lower-bound constant and value; `None` unless `0 < threshold < 1/4`.
    pub fn lower_bound(&self, delta: f64) -> Option<(f64, f64)> {
        let s = self.sigma_bar_sq;
        if !(s > 0.0 && s < 0.25) {
            return None;
        }
        // Smaller root of a(1 - a) = s in its cancellation-free form.
        let a = 2.0 * s / (1.0 + (1.0 - 4.0 * s).sqrt());
        let mut c = f64::min(a * (0.25 - s), a / 8.0);
        if let Some(top) = self.best_mean() {
            c = c.min((1.0 - top) / 8.0);
        }
        Some((c, c * self.h_va() * (1.0 / (2.4 * delta)).ln()))
    }
}

/// Relative difference, with equal infinities counted as zero.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_arm_bernoulli() {
        let raw = RawInstance::new(&[(0.9, 0.09), (0.5, 0.25), (0.1, 0.09)], 0.2);
        assert_eq!(raw.best_arm(), Some(0));
        assert!(rel_diff(raw.h_va(), 1.0 / 0.0121 + 6.25 + 25.0) < 1e-14);
        assert!(rel_diff(raw.h1().unwrap(), 7.8125) < 1e-14);
        let (c, v) = raw.lower_bound(0.1).unwrap();
        assert!((c - 0.0125).abs() < 1e-15);
        assert!((v - 2.03176).abs() < 1e-4);
    }

    #[test]
    fn infeasible_instance() {
        let raw = RawInstance::new(&[(0.5, 0.25), (0.4, 0.24)], 0.2);
        assert_eq!(raw.best_arm(), None);
        assert_eq!(raw.h1(), None);
        assert!(rel_diff(raw.h_va(), 1.0 / 0.0025 + 1.0 / 0.0016) < 1e-14);
    }

    #[test]
    fn lone_arm_has_infinite_gap() {
        let raw = RawInstance::new(&[(0.5, 0.1)], 0.2);
        assert_eq!(raw.mean_gap(0), f64::INFINITY);
        assert!(rel_diff(raw.h_va(), 100.0) < 1e-14);
        assert_eq!(rel_diff(f64::INFINITY, f64::INFINITY), 0.0);
    }
}
