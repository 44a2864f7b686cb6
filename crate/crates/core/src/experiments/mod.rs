//! Replicated simulation studies and figure-data emission.
//!
//! Every replication draws from its own RNG stream (the replication index),
//! so results do not depend on how replications are scheduled.

mod config;
mod report;

pub use config::{stability_z_grid, ExperimentConfig, ExperimentKind, WeibullSpec};
pub use report::{ExperimentReport, SpotChecks, SummaryRow};

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::copula::{Copula, GeneratorFamily, PickandsFunction};
use crate::error::{Error, Result};
use crate::estimation::{
    cox_pl_fit, kendall_tau, mean_relative_error, relative_error, theta_from_tau, CoxOptions,
};
use crate::model::{propagate_copula, propagate_pickands, CovariateLink, LinkValues, PropagatedModel};
use crate::sampling::{sample_copula, sample_model_m, SeededRng};
use crate::verify::{check_copula_axioms, GridSpec};

/// Density grids are emitted at this many points per axis.
pub const DENSITY_GRID_RESOLUTION: usize = 101;

/// Dependence-function curves are tabulated at this many points.
pub const PICKANDS_CURVE_RESOLUTION: usize = 1001;

/// One replication in every `SPOT_CHECK_EVERY` has its estimated copulas
/// checked against the copula axioms.
const SPOT_CHECK_EVERY: usize = 100;

const SECTION_ERROR: &str = "mean-relative-error";
const SECTION_SPEARMAN: &str = "spearman-relative-error";

/// Outcome of one replication: metric values per column, or the reason it
/// was excluded.
type RepOutcome = std::result::Result<RepValues, String>;

struct RepValues {
    errors: Vec<f64>,
    spearman: Vec<f64>,
    spot_checked: bool,
    spot_failed: bool,
}

struct Column {
    label: String,
    z: Vec<f64>,
    truth: Copula,
    true_rho: Option<f64>,
}

fn spot_check(copulas: &[Copula]) -> bool {
    let grid = GridSpec::new(16, 1e-3).expect("static grid");
    copulas.iter().all(|c| check_copula_axioms(c, &grid).passed)
}

fn fitted_family(config: &ExperimentConfig) -> GeneratorFamily {
    config.fitted_family.unwrap_or(config.baseline_family)
}

fn plug_in(config: &ExperimentConfig, pairs: &[(f64, f64)]) -> std::result::Result<Copula, String> {
    let family = fitted_family(config);
    if config.oracle_theta {
        return Copula::family(family, config.theta).map_err(|e| e.to_string());
    }
    let tau = kendall_tau(pairs).map_err(|e| format!("kendall: {e}"))?;
    let plug = theta_from_tau(family, tau).map_err(|e| format!("plug-in: {e}"))?;
    if !plug.in_family_domain {
        return Err("plug-in outside family domain".into());
    }
    Copula::family(family, plug.theta).map_err(|e| format!("plug-in: {e}"))
}

fn evaluate_columns(
    config: &ExperimentConfig,
    columns: &[Column],
    estimates: &[Copula],
    rep: usize,
) -> std::result::Result<RepValues, String> {
    let mut errors = Vec::with_capacity(columns.len());
    let mut spearman = Vec::new();
    for (col, est) in columns.iter().zip(estimates) {
        errors.push(mean_relative_error(&col.truth, est, config.scheme).map_err(|e| format!("metric: {e}"))?);
        if let Some(rho) = col.true_rho {
            spearman.push(relative_error(rho, est.spearman_rho()));
        }
    }
    let spot_checked = rep % SPOT_CHECK_EVERY == 0;
    let spot_failed = spot_checked && !spot_check(estimates);
    Ok(RepValues {
        errors,
        spearman,
        spot_checked,
        spot_failed,
    })
}

fn aggregate(
    config: &ExperimentConfig,
    columns: &[Column],
    outcomes: Vec<RepOutcome>,
    started: Instant,
) -> ExperimentReport {
    let mut reasons: BTreeMap<String, usize> = BTreeMap::new();
    let mut kept = Vec::new();
    for o in outcomes {
        match o {
            Ok(v) => kept.push(v),
            Err(reason) => *reasons.entry(reason).or_default() += 1,
        }
    }
    let mut rows = Vec::new();
    for (k, col) in columns.iter().enumerate() {
        let vals: Vec<f64> = kept.iter().map(|r| r.errors[k]).collect();
        rows.push(SummaryRow::from_values(SECTION_ERROR, &col.label, &col.z, &vals));
    }
    let with_rho: Vec<&Column> = columns.iter().filter(|c| c.true_rho.is_some()).collect();
    for (k, col) in with_rho.iter().enumerate() {
        let vals: Vec<f64> = kept.iter().map(|r| r.spearman[k]).collect();
        rows.push(SummaryRow::from_values(SECTION_SPEARMAN, &col.label, &col.z, &vals));
    }
    let spot_checks = SpotChecks {
        checked: kept.iter().filter(|r| r.spot_checked).count(),
        failed: kept.iter().filter(|r| r.spot_failed).count(),
    };
    ExperimentReport::new(config.clone(), rows, reasons, spot_checks, Vec::new(), started.elapsed())
}

fn run_replications<F>(config: &ExperimentConfig, columns: &[Column], one: F) -> ExperimentReport
where
    F: Fn(usize, &mut SeededRng) -> RepOutcome + Sync,
{
    let started = Instant::now();
    let outcomes: Vec<RepOutcome> = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = SeededRng::new(config.seed, rep as u64);
            one(rep, &mut rng)
        })
        .collect();
    aggregate(config, columns, outcomes, started)
}

fn grid_columns(config: &ExperimentConfig, link: &CovariateLink, spearman: bool) -> Result<Vec<Column>> {
    let baseline = Copula::family(config.baseline_family, config.theta)?;
    config
        .z_grid()
        .iter()
        .map(|&z| {
            let truth = propagate_copula(&baseline, &link.at(&[z])?)?;
            let true_rho = spearman.then(|| truth.spearman_rho());
            Ok(Column {
                label: format!("z={z}"),
                z: vec![z],
                truth,
                true_rho,
            })
        })
        .collect()
}

fn strata_columns(config: &ExperimentConfig, link: &CovariateLink) -> Result<Vec<Column>> {
    let baseline = Copula::family(config.baseline_family, config.theta)?;
    config
        .z_strata()
        .iter()
        .map(|z| {
            let truth = propagate_copula(&baseline, &link.at(z)?)?;
            let true_rho = config.spearman.then(|| truth.spearman_rho());
            let label = format!(
                "z=({})",
                z.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            );
            Ok(Column {
                label,
                z: z.clone(),
                truth,
                true_rho,
            })
        })
        .collect()
}

/// Copula propagated along a scalar covariate grid with known links: sample
/// at `z = 0`, plug in θ from Kendall's tau, compare the propagated true and
/// estimated copulas at every grid point.
fn known_link_curve(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let link = config.link()?;
    let columns = grid_columns(config, &link, config.spearman && config.experiment != ExperimentKind::Stability)?;
    let baseline = Copula::family(config.baseline_family, config.theta)?;
    let n = config.sample_sizes[0];
    let lvs: Vec<LinkValues> = config.z_grid().iter().map(|&z| link.at(&[z])).collect::<Result<_>>()?;
    Ok(run_replications(config, &columns, |rep, rng| {
        let sample = sample_copula(&baseline, n, rng).map_err(|e| format!("sampling: {e}"))?;
        let est0 = plug_in(config, sample.pairs())?;
        let estimates = lvs
            .iter()
            .map(|lv| propagate_copula(&est0, lv))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| format!("propagation: {e}"))?;
        evaluate_columns(config, &columns, &estimates, rep)
    }))
}

/// Stratified lifetimes under the model, Cox fits of both margins on the
/// pooled sample, θ plugged in from the baseline stratum, comparison per
/// stratum.
fn stratified_study(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let link = config.link()?;
    let columns = strata_columns(config, &link)?;
    let baseline = Copula::family(config.baseline_family, config.theta)?;
    let model = PropagatedModel::new(baseline, link);
    let mx = config.x_margin.marginal()?;
    let my = config.y_margin.marginal()?;
    let strata = config.z_strata();
    let sizes = config.sample_sizes.clone();
    Ok(run_replications(config, &columns, |rep, rng| {
        let mut times_x = Vec::new();
        let mut times_y = Vec::new();
        let mut covs = Vec::new();
        let mut reference = Vec::new();
        for (z, &n) in strata.iter().zip(&sizes) {
            let s = sample_model_m(&model, &mx, &my, z, n, rng).map_err(|e| format!("sampling: {e}"))?;
            if z.iter().all(|&x| x == 0.0) {
                reference.extend_from_slice(s.pairs());
            }
            for &(x, y) in s.pairs() {
                times_x.push(x);
                times_y.push(y);
                covs.push(z.clone());
            }
        }
        let fit_x = cox_pl_fit(&times_x, &covs, CoxOptions::default()).map_err(|e| format!("cox: {e}"))?;
        let fit_y = cox_pl_fit(&times_y, &covs, CoxOptions::default()).map_err(|e| format!("cox: {e}"))?;
        let (Some(a), Some(b)) = (fit_x.usable_coefficients(), fit_y.usable_coefficients()) else {
            return Err("cox: not converged".into());
        };
        let fitted_link = CovariateLink::new(a.to_vec(), b.to_vec()).map_err(|e| format!("cox: {e}"))?;
        let est0 = plug_in(config, &reference)?;
        let estimates = strata
            .iter()
            .map(|z| propagate_copula(&est0, &fitted_link.at(z)?))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| format!("propagation: {e}"))?;
        evaluate_columns(config, &columns, &estimates, rep)
    }))
}

/// Error curve over a scalar covariate grid for a correctly specified
/// family with known links.
pub fn run_stability(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    if config.experiment != ExperimentKind::Stability {
        return Err(Error::Config(format!("expected a stability config, got {:?}", config.experiment)));
    }
    known_link_curve(config)
}

/// Stratified case study with Cox-estimated links; relative copula error
/// and Spearman's rho error per stratum.
pub fn run_case_study(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    if config.experiment != ExperimentKind::CaseStudy {
        return Err(Error::Config(format!("expected a case-study config, got {:?}", config.experiment)));
    }
    stratified_study(config)
}

/// Misspecified fit: stratified with estimated links when `z_strata` is
/// set, otherwise a known-link curve over `z_grid`.
pub fn run_misspecification(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    if config.experiment != ExperimentKind::Misspec {
        return Err(Error::Config(format!("expected a misspec config, got {:?}", config.experiment)));
    }
    if config.z_strata.is_some() {
        stratified_study(config)
    } else {
        known_link_curve(config)
    }
}

/// Density of `c` at the cell midpoints of a `resolution × resolution` grid,
/// row-major in `u`.
pub fn density_grid(c: &Copula, resolution: usize) -> Result<Vec<(f64, f64, f64)>> {
    let pts: Vec<f64> = (0..resolution).map(|i| (i as f64 + 0.5) / resolution as f64).collect();
    let mut out = Vec::with_capacity(resolution * resolution);
    for &u in &pts {
        for &v in &pts {
            out.push((u, v, c.density(u, v)?));
        }
    }
    Ok(out)
}

/// Dependence functions at each `z`, tabulated on `resolution` points.
/// Returns the abscissae and one curve per `z`.
pub fn pickands_curves(
    a: &PickandsFunction,
    link: &CovariateLink,
    zs: &[f64],
    resolution: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let s: Vec<f64> = crate::numeric::linspace(0.0, 1.0, resolution);
    let curves = zs
        .iter()
        .map(|&z| {
            let b = propagate_pickands(a, &link.at(&[z])?)?;
            Ok(s.iter().map(|&t| b.value(t)).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok((s, curves))
}

fn write_lines(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(f, "{header}")?;
    for r in rows {
        writeln!(f, "{r}")?;
    }
    f.flush()?;
    Ok(())
}

/// Writes density grids of the propagated baseline copula per `z` and the
/// propagated Gumbel dependence functions, returning the file paths.
pub fn emit_figures(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    config.validate()?;
    fs::create_dir_all(out_dir)?;
    let link = config.link()?;
    let baseline = Copula::family(config.baseline_family, config.theta)?;
    let mut files = Vec::new();
    for &z in config.z_grid() {
        let cz = propagate_copula(&baseline, &link.at(&[z])?)?;
        let grid = density_grid(&cz, DENSITY_GRID_RESOLUTION)?;
        let path = out_dir.join(format!("density_z{z}.csv"));
        write_lines(&path, "u,v,density", grid.iter().map(|(u, v, d)| format!("{u},{v},{d}")))?;
        files.push(path);
    }
    let a = PickandsFunction::gumbel_logistic(config.evc_theta())?;
    let (s, curves) = pickands_curves(&a, &link, config.z_grid(), PICKANDS_CURVE_RESOLUTION)?;
    let header = std::iter::once("s".to_string())
        .chain(config.z_grid().iter().map(|z| format!("z={z}")))
        .collect::<Vec<_>>()
        .join(",");
    let path = out_dir.join("pickands.csv");
    write_lines(
        &path,
        &header,
        s.iter().enumerate().map(|(i, t)| {
            std::iter::once(t.to_string())
                .chain(curves.iter().map(|c| c[i].to_string()))
                .collect::<Vec<_>>()
                .join(",")
        }),
    )?;
    files.push(path);
    Ok(files)
}

/// Runs the experiment named in the config. Figure data goes to the
/// config's output directory (or `figures/` when unset).
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    match config.experiment {
        ExperimentKind::Stability => run_stability(config),
        ExperimentKind::CaseStudy => run_case_study(config),
        ExperimentKind::Misspec => run_misspecification(config),
        ExperimentKind::Figures => {
            let started = Instant::now();
            let dir = config.output_dir.clone().unwrap_or_else(|| PathBuf::from("figures"));
            let files = emit_figures(config, &dir)?;
            Ok(ExperimentReport::new(
                config.clone(),
                Vec::new(),
                BTreeMap::new(),
                SpotChecks::default(),
                files,
                started.elapsed(),
            ))
        }
    }
}
