//! Atomic file output and text rendering.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use varbai_core::hardness::HardnessReport;
use varbai_core::{AggregateResult, CatalogEntry};

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.6}")
    }
}

fn opt(x: Option<f64>, absent: &str) -> String {
    x.map(num).unwrap_or_else(|| absent.to_string())
}

pub fn entry_title(entry: &CatalogEntry) -> String {
    let gt = &entry.ground_truth;
    let kind = if gt.feasible { "feasible" } else { "infeasible" };
    let at = if entry.case_id.j_range().is_empty() { String::new() } else { format!(" j={}", entry.j) };
    format!(
        "{}{at}: {} arms, threshold {}, {kind}",
        entry.case_id,
        entry.instance.n_arms(),
        entry.instance.sigma_bar_sq()
    )
}

pub fn hardness_text(entry: &CatalogEntry, r: &HardnessReport) -> String {
    let mut s = entry_title(entry) + "\n";
    let mut line = |label: &str, value: String| writeln!(s, "{label:<24}{value}").unwrap();
    let t = &r.terms;
    line("delta", r.delta.to_string());
    line("h_va", num(r.h_va));
    line("  best arm", num(t.best_arm));
    line("  feasible suboptimal", num(t.feasible_suboptimal));
    line("  infeasible risky", num(t.infeasible_risky));
    line("  infeasible suboptimal", num(t.infeasible_suboptimal));
    if let Some(h1) = r.h1 {
        line("h1", num(h1));
    }
    line("lower bound constant", opt(r.lower_bound_constant, "undefined"));
    line("lower bound", opt(r.lower_bound_value, "undefined"));
    line("scale", opt(r.scale, "undefined"));
    s
}

/// Per-arm description of an entry.
pub fn describe_text(entry: &CatalogEntry) -> String {
    let gt = &entry.ground_truth;
    let mut s = String::new();
    writeln!(s, "{}", entry_title(entry)).unwrap();
    if let Some(b) = gt.i_star {
        writeln!(s, "best feasible arm {b}").unwrap();
    }
    writeln!(
        s,
        "{:>4} {:>9} {:>9} {:>9} {:>9} {:<22} {:>9}",
        "arm", "mean", "variance", "mean_gap", "var_gap", "class", "law"
    )
    .unwrap();
    for i in 0..gt.n_arms() {
        let class = match (gt.i_star == Some(i), gt.is_feasible_arm(i), gt.is_suboptimal(i)) {
            (true, _, _) => "best",
            (false, true, true) => "feasible suboptimal",
            (false, true, false) => "feasible",
            (false, false, true) => "infeasible suboptimal",
            (false, false, false) => "infeasible risky",
        };
        let law = match entry.instance.arms()[i] {
            varbai_core::DistributionSpec::Bernoulli { p } => format!("Bernoulli({p})"),
            varbai_core::DistributionSpec::Beta { alpha, beta } => format!("Beta({alpha:.4}, {beta:.4})"),
            varbai_core::DistributionSpec::Gaussian { mu, sigma } => format!("Normal({mu}, {sigma})"),
        };
        writeln!(
            s,
            "{i:>4} {:>9.5} {:>9.5} {:>9} {:>9.5} {class:<22} {law}",
            gt.means[i],
            gt.variances[i],
            if gt.mean_gaps[i].is_infinite() { "inf".to_string() } else { format!("{:.5}", gt.mean_gaps[i]) },
            gt.var_gaps[i],
        )
        .unwrap();
    }
    s
}

pub fn summary_line(a: &AggregateResult) -> String {
    let at = if a.case.j_range().is_empty() { String::new() } else { format!(" j={}", a.j) };
    format!(
        "{} {}{at}: trials={} mean_tau={:.4e} std_tau={:.4e} success={:.3} capped={} tau/scale={}",
        a.algorithm,
        a.case,
        a.n_trials,
        a.mean_tau,
        a.std_tau,
        a.success_rate,
        a.n_capped,
        a.scale.map(|s| format!("{:.3}", a.mean_tau / s)).unwrap_or_else(|| "undefined".into()),
    )
}
