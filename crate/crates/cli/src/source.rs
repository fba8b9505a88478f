//! Instance sources: catalog references and inline instance documents.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use varbai_core::{catalog_instance, BanditInstance, CaseId, CatalogEntry, DistributionSpec};

/// One arm of an instance document. Which fields are required depends on `kind`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmDoc {
    pub kind: String,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
}

/// A complete instance document (TOML or JSON).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub label: Option<String>,
    pub sigma_bar_sq: f64,
    pub subg_proxy: Option<f64>,
    #[serde(default)]
    pub eps_v: f64,
    pub arms: Vec<ArmDoc>,
}

impl ArmDoc {
    fn to_spec(&self, index: usize) -> Result<DistributionSpec> {
        let need =
            |v: Option<f64>, name: &str| v.with_context(|| format!("arm {index} ({}) is missing `{name}`", self.kind));
        let spec = match self.kind.to_ascii_lowercase().as_str() {
            "bernoulli" => DistributionSpec::bernoulli(need(self.p, "p")?),
            "beta" => match (self.alpha, self.beta, self.mean, self.variance) {
                (Some(a), Some(b), None, None) => DistributionSpec::beta(a, b),
                (None, None, Some(m), Some(v)) => DistributionSpec::beta_from_moments(m, v),
                _ => bail!("arm {index} (beta) needs either `alpha` and `beta` or `mean` and `variance`"),
            },
            "gaussian" => DistributionSpec::gaussian(need(self.mu, "mu")?, need(self.sigma, "sigma")?),
            other => bail!("arm {index} has unknown kind `{other}` (bernoulli, beta, gaussian)"),
        };
        spec.with_context(|| format!("arm {index}"))
    }
}

impl InstanceDoc {
    pub fn parse(text: &str, json: bool) -> Result<Self> {
        if json {
            serde_json::from_str(text).context("parsing JSON instance")
        } else {
            toml::from_str(text).context("parsing TOML instance")
        }
    }

    pub fn into_entry(self, fallback_label: &str) -> Result<CatalogEntry> {
        let arms = self.arms.iter().enumerate().map(|(i, a)| a.to_spec(i)).collect::<Result<Vec<_>>>()?;
        let instance = BanditInstance::build(arms, self.sigma_bar_sq, self.subg_proxy, self.eps_v)?;
        let label = self.label.unwrap_or_else(|| fallback_label.to_string());
        Ok(CatalogEntry::inline(label, instance)?)
    }
}

/// Load an instance document; `.json` files are JSON, everything else TOML.
pub fn load_instance(path: &Path) -> Result<CatalogEntry> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("inline");
    InstanceDoc::parse(&text, json)?.into_entry(stem).with_context(|| format!("instance {}", path.display()))
}

/// Catalog entries for `case` at the given indices, or at every index when `all` is set.
pub fn catalog_entries(case: &str, js: &[u32], all: bool) -> Result<Vec<CatalogEntry>> {
    let case: CaseId = case.parse()?;
    let js: Vec<u32> = match (all, js.is_empty()) {
        (true, _) => case.j_range().collect(),
        (false, false) => js.to_vec(),
        (false, true) => bail!("--catalog needs --j or --all-j"),
    };
    js.iter().map(|&j| Ok(catalog_instance(&case, j)?)).collect()
}
