use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bivcox::estimation::{cox_pl_fit, kendall_tau, spearman_rho_empirical, theta_from_tau, CoxOptions, MetricScheme};
use bivcox::experiments::{self, ExperimentConfig, ExperimentKind};
use bivcox::model::{propagate_copula, propagate_pickands};
use bivcox::sampling::{sample_copula, sample_model_m, SamplePairSet, SampleScale, SeededRng};
use bivcox::verify::{check_copula_axioms, check_min_id, check_pickands, check_pqd, check_tp2, check_tp2_differential, GridSpec};
use bivcox::{Copula, CovariateLink, Error, GeneratorFamily, LinkValues, PickandsFunction, PropagatedModel, Result, SurvivalMarginal};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "bivcox", version, about = "Covariate-dependent bivariate copulas under proportional hazards")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a propagated copula, or a propagated Gumbel dependence function.
    Propagate(PropagateArgs),
    /// Run the dependence and validity checks on a propagated copula.
    Verify(VerifyArgs),
    /// Draw a sample as CSV.
    Sample(SampleArgs),
    /// Kendall's tau, Spearman's rho, plug-in θ and Cox fits from a CSV sample.
    Estimate(EstimateArgs),
    /// Run a config-driven simulation study.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct CopulaArgs {
    /// Baseline family: clayton, gumbel, amh or gumbel-barnett.
    #[arg(long, default_value = "clayton")]
    family: GeneratorFamily,
    #[arg(long, default_value_t = 3.0)]
    theta: f64,
    /// Coefficients of the X link, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
    alpha: Vec<f64>,
    /// Coefficients of the Y link, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
    beta: Vec<f64>,
    /// Covariate value; zeros when omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    z: Option<Vec<f64>>,
    /// Set Φ(z) directly, bypassing the link.
    #[arg(long, requires = "psi")]
    phi: Option<f64>,
    /// Set Ψ(z) directly, bypassing the link.
    #[arg(long, requires = "phi")]
    psi: Option<f64>,
}

impl CopulaArgs {
    fn link(&self) -> Result<CovariateLink> {
        CovariateLink::new(self.alpha.clone(), self.beta.clone())
    }

    fn z(&self) -> Vec<f64> {
        self.z.clone().unwrap_or_else(|| vec![0.0; self.alpha.len()])
    }

    fn link_values(&self) -> Result<LinkValues> {
        match (self.phi, self.psi) {
            (Some(phi), Some(psi)) => LinkValues::new(phi, psi),
            _ => self.link()?.at(&self.z()),
        }
    }

    fn baseline(&self) -> Result<Copula> {
        Copula::family(self.family, self.theta)
    }

    fn propagated(&self) -> Result<Copula> {
        propagate_copula(&self.baseline()?, &self.link_values()?)
    }
}

fn parse_point(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected u,v but got {s:?}"))?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((p(a)?, p(b)?))
}

fn parse_margin(s: &str) -> std::result::Result<SurvivalMarginal, String> {
    let (shape, scale) = parse_point(s)?;
    SurvivalMarginal::weibull(shape, scale).map_err(|e| e.to_string())
}

#[derive(Args)]
struct PropagateArgs {
    #[command(flatten)]
    copula: CopulaArgs,
    /// Points `u,v` at which to evaluate; repeatable.
    #[arg(long = "at", value_parser = parse_point)]
    points: Vec<(f64, f64)>,
    /// Tabulate the propagated Gumbel dependence function of parameter θ instead.
    #[arg(long)]
    pickands: bool,
    /// Number of abscissae for --pickands.
    #[arg(long, default_value_t = 11)]
    resolution: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    Axioms,
    Tp2,
    Tp2Differential,
    Pqd,
    MinId,
    Pickands,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    copula: CopulaArgs,
    #[arg(long, value_delimiter = ',', default_values = ["axioms", "tp2", "pqd"])]
    checks: Vec<Check>,
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    /// Distance of the outermost grid points from the boundary.
    #[arg(long, default_value_t = 1e-3)]
    margin: f64,
    /// Powers probed by the min-id check; weak TP2 failures need a small one.
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.1,0.5,2")]
    gammas: Vec<f64>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    copula: CopulaArgs,
    #[arg(long, short, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    /// Emit lifetimes under the Weibull margins instead of copula draws.
    #[arg(long)]
    lifetimes: bool,
    /// Weibull `shape,scale` of X.
    #[arg(long, value_parser = parse_margin, default_value = "2,12000")]
    x_margin: SurvivalMarginal,
    /// Weibull `shape,scale` of Y.
    #[arg(long, value_parser = parse_margin, default_value = "1.5,8000")]
    y_margin: SurvivalMarginal,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// CSV with header `u,v` or `x,y[,z1,…]`.
    input: PathBuf,
    /// Family used for the plug-in θ.
    #[arg(long, default_value = "clayton")]
    family: GeneratorFamily,
    /// Restrict rank statistics to this covariate stratum.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    stratum: Option<Vec<f64>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Stability,
    CaseStudy,
    Misspec,
    Figures,
}

impl From<KindArg> for ExperimentKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Stability => ExperimentKind::Stability,
            KindArg::CaseStudy => ExperimentKind::CaseStudy,
            KindArg::Misspec => ExperimentKind::Misspec,
            KindArg::Figures => ExperimentKind::Figures,
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    kind: KindArg,
    /// JSON config; the built-in preset for the experiment when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Baseline family of the preset.
    #[arg(long)]
    family: Option<GeneratorFamily>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the report (and figure data).
    #[arg(long)]
    out: Option<PathBuf>,
    /// grid, density-grid, uniform-grid or mc.
    #[arg(long)]
    scheme: Option<MetricScheme>,
    #[arg(long)]
    reps: Option<usize>,
    /// Print the resolved config and exit.
    #[arg(long)]
    dry_run: bool,
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn propagate(args: &PropagateArgs) -> Result<()> {
    let lv = args.copula.link_values()?;
    if args.pickands {
        let a = PickandsFunction::gumbel_logistic(args.copula.theta)?;
        let b = propagate_pickands(&a, &lv)?;
        let mut out = std::io::stdout().lock();
        writeln!(out, "s,baseline,propagated")?;
        for (s, v) in b.tabulate(args.resolution) {
            writeln!(out, "{s},{},{v}", a.value(s))?;
        }
        return Ok(());
    }
    if args.points.is_empty() {
        return Err(Error::Input("give at least one --at u,v or use --pickands".into()));
    }
    let c0 = args.copula.baseline()?;
    let cz = propagate_copula(&c0, &lv)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "u,v,baseline,propagated")?;
    for &(u, v) in &args.points {
        writeln!(out, "{u},{v},{},{}", c0.cdf(u, v)?, cz.cdf(u, v)?)?;
    }
    Ok(())
}

fn verify(args: &VerifyArgs) -> Result<()> {
    let grid = GridSpec::new(args.resolution, args.margin)?;
    let lv = args.copula.link_values()?;
    let c = propagate_copula(&args.copula.baseline()?, &lv).or_else(|e| match e {
        // Still worth reporting which checks fail.
        Error::PropagationValidity(_) => Ok(bivcox::model::propagate_copula_direct(&args.copula.baseline()?, &lv)),
        other => Err(other),
    })?;
    let mut reports = Vec::new();
    for check in &args.checks {
        let report = match check {
            Check::Axioms => check_copula_axioms(&c, &grid),
            Check::Tp2 => check_tp2(&c, &grid),
            Check::Tp2Differential => check_tp2_differential(&c, &grid),
            Check::Pqd => check_pqd(&c, &grid),
            Check::MinId => check_min_id(&c, &args.gammas, &grid)?,
            Check::Pickands => {
                let a = PickandsFunction::gumbel_logistic(args.copula.theta)?;
                check_pickands(&propagate_pickands(&a, &lv)?, args.resolution)?
            }
        };
        eprintln!("{}", report.summary());
        reports.push(report);
    }
    print_json(&json!({ "copula": c.describe(), "reports": reports }))
}

fn sample(args: &SampleArgs) -> Result<()> {
    let mut rng = SeededRng::new(args.seed, args.stream);
    let set = if args.lifetimes {
        let model = PropagatedModel::new(args.copula.baseline()?, args.copula.link()?);
        sample_model_m(&model, &args.x_margin, &args.y_margin, &args.copula.z(), args.n, &mut rng)?
    } else {
        sample_copula(&args.copula.propagated()?, args.n, &mut rng)?
    };
    match &args.out {
        Some(path) => set.save_csv(path),
        None => set.write_csv(std::io::stdout().lock()),
    }
}

fn estimate(args: &EstimateArgs) -> Result<()> {
    let set = SamplePairSet::read_csv(&args.input)?;
    let pairs: Vec<(f64, f64)> = match (&args.stratum, set.covariates()) {
        (Some(z), Some(zs)) => set
            .pairs()
            .iter()
            .zip(zs)
            .filter(|(_, zi)| *zi == z)
            .map(|(p, _)| *p)
            .collect(),
        (Some(_), None) => return Err(Error::Input("--stratum needs a sample with covariates".into())),
        (None, _) => set.pairs().to_vec(),
    };
    let tau = kendall_tau(&pairs)?;
    let rho = spearman_rho_empirical(&pairs)?;
    let plug = theta_from_tau(args.family, tau);
    let mut out = json!({
        "n": pairs.len(),
        "kendall_tau": tau,
        "spearman_rho": rho,
        "family": args.family.name(),
        "plug_in": match &plug {
            Ok(p) => json!(p),
            Err(e) => json!({ "error": e.to_string() }),
        },
    });
    if let (SampleScale::Lifetime, Some(zs)) = (set.scale(), set.covariates()) {
        let zs = zs.to_vec();
        let fit = |times: Vec<f64>| match cox_pl_fit(&times, &zs, CoxOptions::default()) {
            Ok(f) => json!(f),
            Err(e) => json!({ "error": e.to_string() }),
        };
        out["cox_x"] = fit(set.first());
        out["cox_y"] = fit(set.second());
    }
    print_json(&out)
}

fn experiment(args: &ExperimentArgs) -> Result<()> {
    let kind = ExperimentKind::from(args.kind);
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::preset(kind, args.family),
    };
    if config.experiment != kind {
        return Err(Error::Config(format!(
            "config describes {} but {} was requested",
            config.experiment.name(),
            kind.name()
        )));
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(scheme) = args.scheme {
        config.scheme = scheme;
    }
    if let Some(reps) = args.reps {
        config.replications = reps;
    }
    if let Some(out) = &args.out {
        config.output_dir = Some(out.clone());
    }
    config.validate()?;
    if args.dry_run {
        writeln!(std::io::stdout().lock(), "{}", config.to_json()?)?;
        return Ok(());
    }
    let mut report = experiments::run(&config)?;
    if kind != ExperimentKind::Figures {
        if let Some(dir) = &config.output_dir {
            report.files = report.save(dir)?;
        }
    }
    let mut stdout = std::io::stdout().lock();
    write!(stdout, "{}", report.render())?;
    writeln!(stdout, "runtime {:.1}s", report.runtime.as_secs_f64())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Propagate(a) => propagate(a),
        Command::Verify(a) => verify(a),
        Command::Sample(a) => sample(a),
        Command::Estimate(a) => estimate(a),
        Command::Experiment(a) => experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // A closed pipe (`bivcox sample | head`) is not a failure.
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
