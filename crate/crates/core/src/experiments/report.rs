use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::numeric::{mean, quantile, std_dev};
use crate::sampling::SeededRng;

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

/// Summary of one metric column across replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub section: String,
    pub label: String,
    pub z: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    /// `mean ± 1.96 sd / √count`
    pub normal_ci: [f64; 2],
    /// Empirical 2.5% and 97.5% quantiles.
    pub percentile_ci: [f64; 2],
    pub count: usize,
}

impl SummaryRow {
    pub(crate) fn from_values(section: &str, label: &str, z: &[f64], values: &[f64]) -> Self {
        let m = mean(values);
        let sd = std_dev(values);
        let half = if values.is_empty() {
            f64::NAN
        } else {
            Z_95 * sd / (values.len() as f64).sqrt()
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            section: section.to_string(),
            label: label.to_string(),
            z: z.to_vec(),
            mean: m,
            sd,
            normal_ci: [m - half, m + half],
            percentile_ci: [quantile(&sorted, 0.025), quantile(&sorted, 0.975)],
            count: values.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SpotChecks {
    pub checked: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub rows: Vec<SummaryRow>,
    pub replications: usize,
    pub excluded: usize,
    pub exclusion_rate: f64,
    pub exclusion_reasons: BTreeMap<String, usize>,
    pub spot_checks: SpotChecks,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub files: Vec<PathBuf>,
    pub config: ExperimentConfig,
    pub provenance: String,
    #[serde(skip)]
    pub runtime: Duration,
}

fn provenance(config: &ExperimentConfig) -> String {
    let json = serde_json::to_string(config).unwrap_or_default();
    let digest = Sha256::digest(json.as_bytes());
    let short: String = digest[..6].iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    });
    format!(
        "bivcox {} {} config:{short} seed:{} rng:{} scheme:{}",
        env!("CARGO_PKG_VERSION"),
        config.experiment.name(),
        config.seed,
        SeededRng::ALGORITHM,
        config.scheme
    )
}

impl ExperimentReport {
    pub(crate) fn new(
        config: ExperimentConfig,
        rows: Vec<SummaryRow>,
        exclusion_reasons: BTreeMap<String, usize>,
        spot_checks: SpotChecks,
        files: Vec<PathBuf>,
        runtime: Duration,
    ) -> Self {
        let excluded: usize = exclusion_reasons.values().sum();
        let replications = config.replications;
        Self {
            experiment: config.experiment.name().to_string(),
            rows,
            replications,
            excluded,
            exclusion_rate: excluded as f64 / replications as f64,
            exclusion_reasons,
            spot_checks,
            files,
            provenance: provenance(&config),
            config,
            runtime,
        }
    }

    /// Rows of one section, in column order.
    pub fn section(&self, name: &str) -> Vec<&SummaryRow> {
        self.rows.iter().filter(|r| r.section == name).collect()
    }

    pub fn means(&self, section: &str) -> Vec<f64> {
        self.section(section).iter().map(|r| r.mean).collect()
    }

    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Rows as CSV: `section,label,mean,sd,normal_lo,normal_hi,pct_lo,pct_hi,count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("section,label,mean,sd,normal_lo,normal_hi,pct_lo,pct_hi,count\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},\"{}\",{},{},{},{},{},{},{}",
                r.section,
                r.label,
                r.mean,
                r.sd,
                r.normal_ci[0],
                r.normal_ci[1],
                r.percentile_ci[0],
                r.percentile_ci[1],
                r.count
            );
        }
        out
    }

    /// Writes `<experiment>.json` and `<experiment>.csv` into `dir`.
    pub fn save(&self, dir: &Path) -> crate::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let json = dir.join(format!("{}.json", self.experiment));
        let csv = dir.join(format!("{}.csv", self.experiment));
        std::fs::write(&json, self.to_json()?)?;
        std::fs::write(&csv, self.to_csv())?;
        Ok(vec![json, csv])
    }

    /// Plain-text table with means and both intervals in percent.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.provenance);
        let _ = writeln!(
            out,
            "replications {} excluded {} ({:.2}%)",
            self.replications,
            self.excluded,
            100.0 * self.exclusion_rate
        );
        let mut current = "";
        for r in &self.rows {
            if r.section != current {
                current = &r.section;
                let _ = writeln!(out, "{current}");
            }
            let _ = writeln!(
                out,
                "  {:<14} {:>8.3}%  normal [{:.3}%, {:.3}%]  percentile [{:.3}%, {:.3}%]",
                r.label,
                100.0 * r.mean,
                100.0 * r.normal_ci[0],
                100.0 * r.normal_ci[1],
                100.0 * r.percentile_ci[0],
                100.0 * r.percentile_ci[1]
            );
        }
        for f in &self.files {
            let _ = writeln!(out, "wrote {}", f.display());
        }
        out
    }
}
