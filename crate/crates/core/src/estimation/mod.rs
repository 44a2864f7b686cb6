//! Rank statistics, plug-in copula parameters, Cox fits and the mean
//! relative error between copulas.

mod cox;

pub use cox::{cox_pl_fit, CoxOptions, FitResult};

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{Copula, GeneratorFamily};
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::sampling::{csv_error, sample_copula, SamplePairSet, SeededRng};

/// Empirical Kendall's tau `(concordant - discordant) / C(n, 2)`. Pairs tied
/// in either coordinate count as neither.
pub fn kendall_tau(pairs: &[(f64, f64)]) -> Result<f64> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::Input(format!("Kendall's tau needs n ≥ 2, got {n}")));
    }
    let net: i64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let (xi, yi) = pairs[i];
            pairs[i + 1..]
                .iter()
                .map(|&(xj, yj)| {
                    let s = (xi - xj) * (yi - yj);
                    if s > 0.0 {
                        1i64
                    } else if s < 0.0 {
                        -1
                    } else {
                        0
                    }
                })
                .sum::<i64>()
        })
        .sum();
    let total = (n as f64) * (n as f64 - 1.0) / 2.0;
    Ok(net as f64 / total)
}

/// Average ranks starting at 1.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Pearson correlation of the average ranks.
pub fn spearman_rho_empirical(pairs: &[(f64, f64)]) -> Result<f64> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::Input(format!("Spearman's rho needs n ≥ 2, got {n}")));
    }
    let rx = ranks(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let ry = ranks(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
    let mean = (n as f64 + 1.0) / 2.0;
    let sxy: Vec<f64> = rx.iter().zip(&ry).map(|(a, b)| (a - mean) * (b - mean)).collect();
    let sxx: Vec<f64> = rx.iter().map(|a| (a - mean) * (a - mean)).collect();
    let syy: Vec<f64> = ry.iter().map(|b| (b - mean) * (b - mean)).collect();
    let denom = (pairwise_sum(&sxx) * pairwise_sum(&syy)).sqrt();
    if denom == 0.0 {
        return Err(Error::Input("Spearman's rho undefined for a constant coordinate".into()));
    }
    Ok(pairwise_sum(&sxy) / denom)
}

/// A plug-in parameter and whether it lies in the family's domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlugIn {
    pub theta: f64,
    pub in_family_domain: bool,
}

/// Plug-in parameter from Kendall's tau: Clayton `2τ/(1-τ)`, Gumbel
/// `1/(1-τ)`, AMH `2/(3-τ)`.
pub fn theta_from_tau(family: GeneratorFamily, tau: f64) -> Result<PlugIn> {
    if !(-1.0..=1.0).contains(&tau) {
        return Err(Error::Input(format!("tau = {tau} outside [-1, 1]")));
    }
    let theta = match family {
        GeneratorFamily::Clayton | GeneratorFamily::Gumbel if tau == 1.0 => {
            return Err(Error::Divergence(tau));
        }
        GeneratorFamily::Clayton => 2.0 * tau / (1.0 - tau),
        GeneratorFamily::Gumbel => 1.0 / (1.0 - tau),
        GeneratorFamily::Amh => 2.0 / (3.0 - tau),
        GeneratorFamily::GumbelBarnett => {
            return Err(Error::Input("no tau plug-in for the Gumbel-Barnett family".into()));
        }
    };
    Ok(PlugIn {
        theta,
        in_family_domain: family.check_theta(theta).is_ok(),
    })
}

/// One record of paired lifetimes with its covariate vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x: f64,
    pub y: f64,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservationSet {
    records: Vec<Observation>,
}

impl ObservationSet {
    pub fn new(records: Vec<Observation>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Input("observation set is empty".into()));
        }
        let d = records[0].z.len();
        for r in &records {
            if !(r.x > 0.0 && r.y > 0.0 && r.x.is_finite() && r.y.is_finite()) {
                return Err(Error::Input(format!("lifetimes ({}, {}) must be positive", r.x, r.y)));
            }
            if r.z.len() != d {
                return Err(Error::Input("covariate dimension must be constant".into()));
            }
        }
        Ok(Self { records })
    }

    pub fn from_sample(sample: &SamplePairSet) -> Result<Self> {
        let zs = sample
            .covariates()
            .ok_or_else(|| Error::Input("sample carries no covariates".into()))?;
        let records = sample
            .pairs()
            .iter()
            .zip(zs)
            .map(|(&(x, y), z)| Observation { x, y, z: z.clone() })
            .collect();
        Self::new(records)
    }

    /// Reads CSV with header `x,y,z1,…,zd`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers().map_err(csv_error)?.clone();
        if header.len() < 2 || &header[0] != "x" || &header[1] != "y" {
            return Err(Error::Input(format!("expected header x,y,z1,…, got {header:?}")));
        }
        for (i, name) in header.iter().enumerate().skip(2) {
            if name != format!("z{}", i - 1) {
                return Err(Error::Input(format!("unexpected column {name:?}")));
            }
        }
        let mut records = Vec::new();
        for row in rdr.records() {
            let row = row.map_err(csv_error)?;
            let vals = row
                .iter()
                .map(|f| f.trim().parse::<f64>().map_err(|e| Error::Input(format!("{f:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            records.push(Observation {
                x: vals[0],
                y: vals[1],
                z: vals[2..].to_vec(),
            });
        }
        Self::new(records)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.records[0].z.len()
    }

    pub fn records(&self) -> &[Observation] {
        &self.records
    }

    pub fn x_times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.x).collect()
    }

    pub fn y_times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.y).collect()
    }

    pub fn covariates(&self) -> Vec<Vec<f64>> {
        self.records.iter().map(|r| r.z.clone()).collect()
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.x, r.y)).collect()
    }

    /// Records whose covariate equals `z`.
    pub fn stratum(&self, z: &[f64]) -> Vec<(f64, f64)> {
        self.records
            .iter()
            .filter(|r| r.z == z)
            .map(|r| (r.x, r.y))
            .collect()
    }
}

/// Discretization of `∬ |C - Ĉ| / C dC`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricScheme {
    /// 10×10 cells of the unit square; each cell weighted by its mass under
    /// the true copula, the integrand taken at its upper corner.
    Grid,
    /// 10×10 cell midpoints weighted by the true density, normalized.
    DensityGrid,
    /// Equal weights on the points `i/11`, `i = 1..10`, per axis.
    UniformGrid,
    /// Average over draws from the true copula.
    #[serde(rename = "mc")]
    MonteCarlo { draws: usize, seed: u64 },
}

impl Default for MetricScheme {
    fn default() -> Self {
        MetricScheme::Grid
    }
}

impl MetricScheme {
    pub const GRID_CELLS: usize = 10;
    pub const DEFAULT_DRAWS: usize = 10_000;

    pub fn monte_carlo(seed: u64) -> Self {
        MetricScheme::MonteCarlo {
            draws: Self::DEFAULT_DRAWS,
            seed,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MetricScheme::Grid => "grid",
            MetricScheme::DensityGrid => "density-grid",
            MetricScheme::UniformGrid => "uniform-grid",
            MetricScheme::MonteCarlo { .. } => "mc",
        }
    }
}

impl fmt::Display for MetricScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(MetricScheme::Grid),
            "density-grid" => Ok(MetricScheme::DensityGrid),
            "uniform-grid" => Ok(MetricScheme::UniformGrid),
            "mc" => Ok(MetricScheme::monte_carlo(0)),
            other => Err(Error::Config(format!("unknown metric scheme {other:?}"))),
        }
    }
}

fn relative_gap(c_true: &Copula, c_est: &Copula, u: f64, v: f64) -> f64 {
    let t = c_true.value(u, v);
    if t <= 0.0 {
        return 0.0;
    }
    (t - c_est.value(u, v)).abs() / t
}

/// Mean relative error of `c_est` against `c_true`, weighted by `c_true`.
pub fn mean_relative_error(c_true: &Copula, c_est: &Copula, scheme: MetricScheme) -> Result<f64> {
    let m = MetricScheme::GRID_CELLS;
    match scheme {
        MetricScheme::Grid => {
            let edges: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
            let cdf: Vec<Vec<f64>> = edges
                .iter()
                .map(|&u| edges.iter().map(|&v| c_true.value(u, v)).collect())
                .collect();
            let mut terms = Vec::with_capacity(m * m);
            for i in 0..m {
                for j in 0..m {
                    let mass = cdf[i + 1][j + 1] - cdf[i][j + 1] - cdf[i + 1][j] + cdf[i][j];
                    terms.push(mass.max(0.0) * relative_gap(c_true, c_est, edges[i + 1], edges[j + 1]));
                }
            }
            Ok(pairwise_sum(&terms))
        }
        MetricScheme::DensityGrid => {
            let mut weights = Vec::with_capacity(m * m);
            let mut terms = Vec::with_capacity(m * m);
            for i in 0..m {
                for j in 0..m {
                    let (u, v) = ((i as f64 + 0.5) / m as f64, (j as f64 + 0.5) / m as f64);
                    let w = c_true.density(u, v)?;
                    weights.push(w);
                    terms.push(w * relative_gap(c_true, c_est, u, v));
                }
            }
            Ok(pairwise_sum(&terms) / pairwise_sum(&weights))
        }
        MetricScheme::UniformGrid => {
            let pts: Vec<f64> = (1..=m).map(|i| i as f64 / (m + 1) as f64).collect();
            let terms: Vec<f64> = pts
                .iter()
                .flat_map(|&u| pts.iter().map(move |&v| (u, v)))
                .map(|(u, v)| relative_gap(c_true, c_est, u, v))
                .collect();
            Ok(pairwise_sum(&terms) / terms.len() as f64)
        }
        MetricScheme::MonteCarlo { draws, seed } => {
            if draws == 0 {
                return Err(Error::Input("Monte Carlo metric needs at least one draw".into()));
            }
            let mut rng = SeededRng::new(seed, 0);
            let sample = sample_copula(c_true, draws, &mut rng)?;
            let terms: Vec<f64> = sample
                .pairs()
                .iter()
                .map(|&(u, v)| relative_gap(c_true, c_est, u, v))
                .collect();
            Ok(pairwise_sum(&terms) / draws as f64)
        }
    }
}

/// `|a - b| / |a|`.
pub fn relative_error(reference: f64, estimate: f64) -> f64 {
    (reference - estimate).abs() / reference.abs()
}
