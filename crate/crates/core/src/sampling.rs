//! Random generation from copulas and from joint lifetimes under a covariate.

use std::io::{Read, Write};
use std::path::Path;

use rand::distr::Open01;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::copula::{ArchimedeanGenerator, Copula, CopulaKind, GeneratorFamily};
use crate::error::{Error, Result};
use crate::model::{PropagatedModel, SurvivalMarginal};

/// Absolute tolerance of the conditional-inverse bisection.
pub const BISECTION_TOLERANCE: f64 = 1e-12;
pub const BISECTION_MAX_ITER: usize = 200;

/// Seedable ChaCha8 stream. Identical `(seed, stream)` pairs yield identical
/// sequences on every platform.
#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl SeededRng {
    pub const ALGORITHM: &'static str = "chacha8";

    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner, seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleScale {
    /// Copula scale, pairs in [0, 1]².
    Uniform,
    /// Lifetimes, pairs in [0, ∞)².
    Lifetime,
}

/// Paired draws with an optional covariate vector per pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplePairSet {
    scale: SampleScale,
    pairs: Vec<(f64, f64)>,
    covariates: Option<Vec<Vec<f64>>>,
}

impl SamplePairSet {
    pub fn uniform(pairs: Vec<(f64, f64)>) -> Result<Self> {
        Self::build(SampleScale::Uniform, pairs, None)
    }

    pub fn lifetimes(pairs: Vec<(f64, f64)>, covariates: Option<Vec<Vec<f64>>>) -> Result<Self> {
        Self::build(SampleScale::Lifetime, pairs, covariates)
    }

    fn build(scale: SampleScale, pairs: Vec<(f64, f64)>, covariates: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Input("sample needs at least one pair".into()));
        }
        let ok = |x: f64| match scale {
            SampleScale::Uniform => (0.0..=1.0).contains(&x),
            SampleScale::Lifetime => x >= 0.0 && x.is_finite(),
        };
        if let Some(&(x, y)) = pairs.iter().find(|(x, y)| !(ok(*x) && ok(*y))) {
            return Err(Error::Input(format!("pair ({x}, {y}) outside the {scale:?} domain")));
        }
        if let Some(zs) = &covariates {
            if zs.len() != pairs.len() {
                return Err(Error::Input("one covariate vector per pair required".into()));
            }
            let d = zs[0].len();
            if zs.iter().any(|z| z.len() != d) {
                return Err(Error::Input("covariate dimension must be constant".into()));
            }
        }
        Ok(Self {
            scale,
            pairs,
            covariates,
        })
    }

    pub fn scale(&self) -> SampleScale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn covariates(&self) -> Option<&[Vec<f64>]> {
        self.covariates.as_deref()
    }

    pub fn first(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn second(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    /// Writes CSV with header `u,v[,z1,…]` or `x,y[,z1,…]`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let (a, b) = match self.scale {
            SampleScale::Uniform => ("u", "v"),
            SampleScale::Lifetime => ("x", "y"),
        };
        let d = self.covariates.as_ref().map_or(0, |zs| zs[0].len());
        let mut header = vec![a.to_string(), b.to_string()];
        header.extend((1..=d).map(|i| format!("z{i}")));
        w.write_record(&header).map_err(csv_error)?;
        for (i, (x, y)) in self.pairs.iter().enumerate() {
            let mut rec = vec![x.to_string(), y.to_string()];
            if let Some(zs) = &self.covariates {
                rec.extend(zs[i].iter().map(|z| z.to_string()));
            }
            w.write_record(&rec).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Reads the format written by [`SamplePairSet::write_csv`].
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers().map_err(csv_error)?.clone();
        let scale = match (header.get(0), header.get(1)) {
            (Some("u"), Some("v")) => SampleScale::Uniform,
            (Some("x"), Some("y")) => SampleScale::Lifetime,
            _ => return Err(Error::Input(format!("expected header u,v or x,y, got {header:?}"))),
        };
        for (i, name) in header.iter().enumerate().skip(2) {
            if name != format!("z{}", i - 1) {
                return Err(Error::Input(format!("unexpected column {name:?}")));
            }
        }
        let d = header.len() - 2;
        let mut pairs = Vec::new();
        let mut covariates = Vec::new();
        for row in rdr.records() {
            let row = row.map_err(csv_error)?;
            let vals = row
                .iter()
                .map(|f| f.trim().parse::<f64>().map_err(|e| Error::Input(format!("{f:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            pairs.push((vals[0], vals[1]));
            covariates.push(vals[2..].to_vec());
        }
        let covariates = (d > 0).then_some(covariates);
        Self::build(scale, pairs, covariates)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?)
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    if e.is_io_error() {
        if let csv::ErrorKind::Io(io) = e.into_kind() {
            return Error::Io(io);
        }
        unreachable!("checked by is_io_error");
    }
    Error::Input(format!("csv: {e}"))
}

fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Open01)
}

/// Solves `cond(v) = target` for `v ∈ (0, 1)` by bisection, where `cond` is
/// a nondecreasing conditional distribution function.
fn invert_conditional(cond: impl Fn(f64) -> f64, target: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let val = cond(mid);
        if val.is_nan() {
            return Err(Error::Numeric(format!(
                "conditional distribution is NaN at v = {mid} (target {target}, bracket [{lo}, {hi}])"
            )));
        }
        if val < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < BISECTION_TOLERANCE {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::Numeric(format!(
        "bisection did not reach {BISECTION_TOLERANCE} in {BISECTION_MAX_ITER} iterations (target {target}, bracket [{lo}, {hi}])"
    )))
}

fn archimedean_pair<R: Rng + ?Sized>(g: &ArchimedeanGenerator, rng: &mut R) -> Result<(f64, f64)> {
    let u = open_uniform(rng);
    let t = open_uniform(rng);
    let du = g.phi_prime(u);
    let v = invert_conditional(
        |v| {
            let c = g.copula(u, v);
            if c <= 0.0 {
                return 0.0;
            }
            du / g.phi_prime(c)
        },
        t,
    )?;
    Ok((u, v))
}

/// Conditional distribution method: `V` solves `∂C/∂u(U, V) = T` with
/// `∂C/∂u = φ'(u) / φ'(C(u, v))`.
pub fn sample_archimedean<R: Rng + ?Sized>(g: &ArchimedeanGenerator, n: usize, rng: &mut R) -> Result<SamplePairSet> {
    let pairs = (0..n).map(|_| archimedean_pair(g, rng)).collect::<Result<Vec<_>>>()?;
    SamplePairSet::uniform(pairs)
}

/// One draw from the positive stable law with Laplace transform
/// `exp(-s^index)`, by the Chambers-Mallows-Stuck transform.
pub fn sample_positive_stable<R: Rng + ?Sized>(index: f64, rng: &mut R) -> Result<f64> {
    if !(index > 0.0 && index <= 1.0) {
        return Err(Error::Domain(format!("stable index {index} outside (0, 1]")));
    }
    if index == 1.0 {
        return Ok(1.0);
    }
    let u = std::f64::consts::PI * open_uniform(rng);
    let e: f64 = rng.sample(Exp1);
    let a = index;
    let w = (a * u).sin() / u.sin().powf(1.0 / a) * (((1.0 - a) * u).sin() / e).powf((1.0 - a) / a);
    Ok(w)
}

fn gumbel_frailty_pair<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> Result<(f64, f64)> {
    let w = sample_positive_stable(1.0 / theta, rng)?;
    let e1: f64 = rng.sample(Exp1);
    let e2: f64 = rng.sample(Exp1);
    Ok(((-(e1 / w).powf(1.0 / theta)).exp(), (-(e2 / w).powf(1.0 / theta)).exp()))
}

/// Gumbel pairs as conditionally independent draws given a positive stable
/// frailty `W` of index `1/θ`: `U = exp(-(E/W)^{1/θ})`.
pub fn sample_gumbel_via_frailty<R: Rng + ?Sized>(theta: f64, n: usize, rng: &mut R) -> Result<SamplePairSet> {
    GeneratorFamily::Gumbel.check_theta(theta)?;
    let pairs = (0..n).map(|_| gumbel_frailty_pair(theta, rng)).collect::<Result<Vec<_>>>()?;
    SamplePairSet::uniform(pairs)
}

/// `max(a^{1/(1-w)}, b^{1/w})`, with the limits at `w ∈ {0, 1}`.
fn khoudraji_coord(first: f64, second: f64, w: f64) -> f64 {
    if w <= 0.0 {
        first
    } else if w >= 1.0 {
        second
    } else {
        first.powf(1.0 / (1.0 - w)).max(second.powf(1.0 / w))
    }
}

fn check_exponents(kappa: f64, eta: f64) -> Result<()> {
    for (name, x) in [("kappa", kappa), ("eta", eta)] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("{name} = {x} outside [0, 1]")));
        }
    }
    Ok(())
}

fn khoudraji_pair<R: Rng + ?Sized>(
    first: &Copula,
    second: &Copula,
    kappa: f64,
    eta: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if kappa <= 0.0 && eta <= 0.0 {
        return copula_pair(first, rng);
    }
    if kappa >= 1.0 && eta >= 1.0 {
        return copula_pair(second, rng);
    }
    let (u1, v1) = copula_pair(first, rng)?;
    let (u2, v2) = copula_pair(second, rng)?;
    Ok((khoudraji_coord(u1, u2, kappa), khoudraji_coord(v1, v2, eta)))
}

/// Pairs from `C₁(u^{1-κ}, v^{1-η}) · C₂(u^κ, v^η)` as componentwise maxima
/// of power-transformed draws.
pub fn sample_khoudraji<R: Rng + ?Sized>(
    first: &Copula,
    second: &Copula,
    kappa: f64,
    eta: f64,
    n: usize,
    rng: &mut R,
) -> Result<SamplePairSet> {
    check_exponents(kappa, eta)?;
    let pairs = (0..n)
        .map(|_| khoudraji_pair(first, second, kappa, eta, rng))
        .collect::<Result<Vec<_>>>()?;
    SamplePairSet::uniform(pairs)
}

/// Conditional method with `∂C/∂u` by central differences; used for
/// copulas without a structural sampler.
fn numeric_conditional_pair<R: Rng + ?Sized>(c: &Copula, rng: &mut R) -> Result<(f64, f64)> {
    let u = open_uniform(rng);
    let t = open_uniform(rng);
    let h = 1e-6f64.min(u / 2.0).min((1.0 - u) / 2.0);
    let v = invert_conditional(|v| (c.value(u + h, v) - c.value(u - h, v)) / (2.0 * h), t)?;
    Ok((u, v))
}

fn copula_pair<R: Rng + ?Sized>(c: &Copula, rng: &mut R) -> Result<(f64, f64)> {
    match c.kind() {
        CopulaKind::Product => Ok((open_uniform(rng), open_uniform(rng))),
        CopulaKind::Comonotone => {
            let u = open_uniform(rng);
            Ok((u, u))
        }
        CopulaKind::Countermonotone => {
            let u = open_uniform(rng);
            Ok((u, 1.0 - u))
        }
        CopulaKind::ExtendedArchimedean => {
            let (g, kappa, eta) = c.extended_parts().expect("extended archimedean parts");
            if kappa >= 1.0 && eta >= 1.0 {
                return archimedean_pair(&g, rng);
            }
            let inner = Copula::archimedean(g);
            khoudraji_pair(&Copula::independence(), &inner, kappa, eta, rng)
        }
        CopulaKind::EvcFromPickands => {
            let a = c.pickands().expect("evc carries its dependence function");
            match a.logistic_params() {
                Some((alpha, beta, theta)) => {
                    let (u2, v2) = gumbel_frailty_pair(theta, rng)?;
                    if alpha >= 1.0 && beta >= 1.0 {
                        return Ok((u2, v2));
                    }
                    let (u1, v1) = (open_uniform(rng), open_uniform(rng));
                    Ok((khoudraji_coord(u1, u2, alpha), khoudraji_coord(v1, v2, beta)))
                }
                None => numeric_conditional_pair(c, rng),
            }
        }
        _ => match c.generator() {
            Some(g) => archimedean_pair(&g, rng),
            None => numeric_conditional_pair(c, rng),
        },
    }
}

/// Draws `n` pairs from any supported copula.
pub fn sample_copula<R: Rng + ?Sized>(c: &Copula, n: usize, rng: &mut R) -> Result<SamplePairSet> {
    let pairs = (0..n).map(|_| copula_pair(c, rng)).collect::<Result<Vec<_>>>()?;
    SamplePairSet::uniform(pairs)
}

/// Lifetimes `(x, y)` with joint survival function of the model at `z`:
/// copula draws from the propagated copula mapped through the inverse
/// marginal survival functions under `z`.
pub fn sample_model_m<R: Rng + ?Sized>(
    model: &PropagatedModel,
    x_margin: &SurvivalMarginal,
    y_margin: &SurvivalMarginal,
    z: &[f64],
    n: usize,
    rng: &mut R,
) -> Result<SamplePairSet> {
    let lv = model.link_values(z)?;
    let copula = model.copula_at(z)?;
    let mx = x_margin.with_power(lv.phi)?;
    let my = y_margin.with_power(lv.psi)?;
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let (u, v) = copula_pair(&copula, rng)?;
        let x = mx
            .inverse_survival(u)
            .map_err(|e| Error::Numeric(format!("inverse survival of X at {u}: {e}")))?;
        let y = my
            .inverse_survival(v)
            .map_err(|e| Error::Numeric(format!("inverse survival of Y at {v}: {e}")))?;
        pairs.push((x, y));
    }
    SamplePairSet::lifetimes(pairs, Some(vec![z.to_vec(); n]))
}
