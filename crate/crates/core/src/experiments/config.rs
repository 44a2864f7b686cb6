use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::copula::GeneratorFamily;
use crate::error::{Error, Result};
use crate::estimation::MetricScheme;
use crate::model::{CovariateLink, SurvivalMarginal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Stability,
    CaseStudy,
    Misspec,
    Figures,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Stability => "stability",
            ExperimentKind::CaseStudy => "case-study",
            ExperimentKind::Misspec => "misspec",
            ExperimentKind::Figures => "figures",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeibullSpec {
    pub shape: f64,
    pub scale: f64,
}

impl WeibullSpec {
    pub fn marginal(&self) -> Result<SurvivalMarginal> {
        SurvivalMarginal::weibull(self.shape, self.scale)
    }
}

fn default_x_margin() -> WeibullSpec {
    WeibullSpec {
        shape: 2.0,
        scale: 12000.0,
    }
}

fn default_y_margin() -> WeibullSpec {
    WeibullSpec {
        shape: 1.5,
        scale: 8000.0,
    }
}

fn default_true() -> bool {
    true
}

/// Parameters of one experiment, read from and written to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub baseline_family: GeneratorFamily,
    pub theta: f64,
    pub alpha_coefs: Vec<f64>,
    pub beta_coefs: Vec<f64>,
    /// One size per stratum; curve experiments use the first entry.
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_strata: Option<Vec<Vec<f64>>>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub scheme: MetricScheme,
    /// Family fitted to the data; defaults to the baseline family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_family: Option<GeneratorFamily>,
    /// Use the true θ instead of the plug-in estimate.
    #[serde(default)]
    pub oracle_theta: bool,
    #[serde(default = "default_true")]
    pub spearman: bool,
    #[serde(default = "default_x_margin")]
    pub x_margin: WeibullSpec,
    #[serde(default = "default_y_margin")]
    pub y_margin: WeibullSpec,
    /// Gumbel parameter of the dependence-function figure; defaults to `theta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evc_theta: Option<f64>,
}

/// 31 equispaced points on [0, 0.3].
pub fn stability_z_grid() -> Vec<f64> {
    (0..=30).map(|i| i as f64 / 100.0).collect()
}

fn case_strata() -> Vec<Vec<f64>> {
    vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]
}

impl ExperimentConfig {
    fn base(experiment: ExperimentKind, family: GeneratorFamily) -> Self {
        Self {
            experiment,
            baseline_family: family,
            theta: 3.0,
            alpha_coefs: vec![1.5],
            beta_coefs: vec![2.0],
            sample_sizes: vec![200],
            replications: 1000,
            z_grid: None,
            z_strata: None,
            seed: 20_240_917,
            output_dir: None,
            scheme: MetricScheme::Grid,
            fitted_family: None,
            oracle_theta: false,
            spearman: true,
            x_margin: default_x_margin(),
            y_margin: default_y_margin(),
            evc_theta: None,
        }
    }

    /// Known-link stability curve: θ = 3, `Φ = e^{1.5z}`, `Ψ = e^{2z}`,
    /// n = 200, 1000 replications over 31 points of [0, 0.3].
    pub fn stability(family: GeneratorFamily) -> Self {
        Self {
            z_grid: Some(stability_z_grid()),
            spearman: false,
            ..Self::base(ExperimentKind::Stability, family)
        }
    }

    /// Stratified case study: strata (0,0), (1,0), (0,1) of sizes 200, 100,
    /// 100 with coefficients (0.1, 0.06) and (0.07, 0.25).
    pub fn case_study(family: GeneratorFamily) -> Self {
        Self {
            alpha_coefs: vec![0.1, 0.06],
            beta_coefs: vec![0.07, 0.25],
            sample_sizes: vec![200, 100, 100],
            z_strata: Some(case_strata()),
            ..Self::base(ExperimentKind::CaseStudy, family)
        }
    }

    /// Clayton data fitted as AMH in the stratified design.
    pub fn misspec() -> Self {
        Self {
            experiment: ExperimentKind::Misspec,
            fitted_family: Some(GeneratorFamily::Amh),
            ..Self::case_study(GeneratorFamily::Clayton)
        }
    }

    /// Clayton data fitted as AMH along the known-link stability grid.
    pub fn misspec_known_links() -> Self {
        Self {
            experiment: ExperimentKind::Misspec,
            fitted_family: Some(GeneratorFamily::Amh),
            ..Self::stability(GeneratorFamily::Clayton)
        }
    }

    /// Clayton densities and Gumbel dependence functions at z ∈ {0, 0.25, 0.5, 1}.
    pub fn figures() -> Self {
        Self {
            z_grid: Some(vec![0.0, 0.25, 0.5, 1.0]),
            replications: 1,
            spearman: false,
            ..Self::base(ExperimentKind::Figures, GeneratorFamily::Clayton)
        }
    }

    pub fn preset(kind: ExperimentKind, family: Option<GeneratorFamily>) -> Self {
        let family = family.unwrap_or(GeneratorFamily::Clayton);
        match kind {
            ExperimentKind::Stability => Self::stability(family),
            ExperimentKind::CaseStudy => Self::case_study(family),
            ExperimentKind::Misspec => Self::misspec(),
            ExperimentKind::Figures => Self::figures(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn link(&self) -> Result<CovariateLink> {
        CovariateLink::new(self.alpha_coefs.clone(), self.beta_coefs.clone())
    }

    pub fn z_grid(&self) -> &[f64] {
        self.z_grid.as_deref().unwrap_or(&[])
    }

    pub fn z_strata(&self) -> &[Vec<f64>] {
        self.z_strata.as_deref().unwrap_or(&[])
    }

    pub fn evc_theta(&self) -> f64 {
        self.evc_theta.unwrap_or(self.theta)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.replications < 1 {
            return fail("replications must be at least 1".into());
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.iter().any(|&n| n < 2) {
            return fail(format!("sample sizes {:?} must be nonempty and ≥ 2", self.sample_sizes));
        }
        self.baseline_family
            .check_theta(self.theta)
            .map_err(|e| Error::Config(e.to_string()))?;
        let link = self.link().map_err(|e| Error::Config(e.to_string()))?;
        if let Some(grid) = &self.z_grid {
            if grid.is_empty() || grid.iter().any(|z| !z.is_finite()) {
                return fail("z_grid must be nonempty and finite".into());
            }
        }
        if let Some(strata) = &self.z_strata {
            if strata.len() != self.sample_sizes.len() {
                return fail(format!(
                    "{} strata but {} sample sizes",
                    strata.len(),
                    self.sample_sizes.len()
                ));
            }
            if strata.iter().any(|z| z.len() != link.dim()) {
                return fail(format!("strata must have the link dimension {}", link.dim()));
            }
            if !strata.iter().any(|z| z.iter().all(|&x| x == 0.0)) {
                return fail("strata must include the reference covariate (all zeros)".into());
            }
        }
        let needs_grid = matches!(self.experiment, ExperimentKind::Stability | ExperimentKind::Figures)
            || (self.experiment == ExperimentKind::Misspec && self.z_strata.is_none());
        if needs_grid {
            if self.z_grid.is_none() {
                return fail(format!("{} needs z_grid", self.experiment.name()));
            }
            if link.dim() != 1 {
                return fail("a z_grid needs scalar link coefficients".into());
            }
        }
        if self.experiment == ExperimentKind::CaseStudy && self.z_strata.is_none() {
            return fail("case-study needs z_strata".into());
        }
        if self.experiment == ExperimentKind::Stability
            && !matches!(self.baseline_family, GeneratorFamily::Clayton | GeneratorFamily::Gumbel)
        {
            return fail("stability runs support clayton and gumbel baselines".into());
        }
        if self.experiment == ExperimentKind::Figures && self.evc_theta() < 1.0 {
            return fail(format!("Gumbel figure parameter {} must be ≥ 1", self.evc_theta()));
        }
        if let MetricScheme::MonteCarlo { draws: 0, .. } = self.scheme {
            return fail("Monte Carlo metric needs draws ≥ 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for kind in [
            ExperimentKind::Stability,
            ExperimentKind::CaseStudy,
            ExperimentKind::Misspec,
            ExperimentKind::Figures,
        ] {
            ExperimentConfig::preset(kind, None).validate().unwrap();
        }
        ExperimentConfig::misspec_known_links().validate().unwrap();
        assert_eq!(stability_z_grid().len(), 31);
    }

    #[test]
    fn json_round_trip_and_rejections() {
        let cfg = ExperimentConfig::case_study(GeneratorFamily::Gumbel);
        let text = cfg.to_json().unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        let mut bad = cfg.clone();
        bad.replications = 0;
        assert!(bad.validate().is_err());
        let mut bad = cfg.clone();
        bad.sample_sizes = vec![200, 1, 100];
        assert!(bad.validate().is_err());
        assert!(ExperimentConfig::from_json(&text.replace("\"seed\"", "\"sed\"")).is_err());
    }

    #[test]
    fn minimal_json() {
        let text = r#"{
            "experiment": "stability",
            "baseline_family": "gumbel",
            "theta": 3,
            "alpha_coefs": [1.5],
            "beta_coefs": [2],
            "sample_sizes": [200],
            "replications": 10,
            "z_grid": [0, 0.1],
            "seed": 7,
            "scheme": {"mc": {"draws": 500, "seed": 1}}
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.scheme, MetricScheme::MonteCarlo { draws: 500, seed: 1 });
        assert!(cfg.spearman);
    }
}
