//! Bivariate copulas: closed-form families, generator-defined archimedean
//! copulas, extreme-value copulas from a Pickands function, the extended
//! archimedean class, and copulas transformed by the covariate model.

mod generator;
mod pickands;

pub use generator::{ArchimedeanGenerator, GeneratorFamily};
pub use pickands::{PickandsFunction, PickandsKind};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_unit, Error, Result};
use crate::numeric::pairwise_sum;

/// Finite-difference step for densities without a closed form.
pub const DENSITY_STEP: f64 = 1e-5;

/// Points per axis of the midpoint rule used for Spearman's rho.
pub const SPEARMAN_GRID: usize = 512;

/// Resolution at which Pickands functions are validated on construction.
pub const PICKANDS_CHECK_RESOLUTION: usize = 1001;

/// Anything that can be evaluated as a bivariate function on [0,1]².
///
/// Implemented for [`Copula`] and for plain closures so the verification
/// routines also accept functions that are not copulas.
pub trait BivariateCdf {
    fn eval(&self, u: f64, v: f64) -> f64;
}

impl<F> BivariateCdf for F
where
    F: Fn(f64, f64) -> f64,
{
    fn eval(&self, u: f64, v: f64) -> f64 {
        self(u, v)
    }
}

/// Kind tag of a [`Copula`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CopulaKind {
    Product,
    Comonotone,
    Countermonotone,
    Clayton,
    Gumbel,
    Amh,
    GumbelBarnett,
    Archimedean,
    EvcFromPickands,
    ExtendedArchimedean,
    Propagated,
}

#[derive(Debug, Clone)]
enum Repr {
    Product,
    Comonotone,
    Countermonotone,
    /// Closed-form family formula.
    Family(GeneratorFamily, f64),
    /// `φ^{[-1]}(φ(u) + φ(v))` through the generator.
    Archimedean(ArchimedeanGenerator),
    ExtremeValue(PickandsFunction),
    /// `Π(u^{1-κ}, v^{1-η}) · C_φ(u^κ, v^η)`.
    ExtendedArchimedean {
        generator: ArchimedeanGenerator,
        kappa: f64,
        eta: f64,
    },
    /// Copula of the joint sdf under the covariate, from the baseline copula
    /// and the hazard factors (Φ, Ψ).
    Propagated {
        baseline: Box<Copula>,
        phi: f64,
        psi: f64,
    },
}

/// An evaluable bivariate copula. Immutable; cheap to clone except for deep
/// propagation chains.
#[derive(Debug, Clone)]
pub struct Copula {
    repr: Repr,
}

impl Copula {
    fn from_repr(repr: Repr) -> Self {
        Self { repr }
    }

    /// `Π(u,v) = uv`.
    pub fn independence() -> Self {
        Self::from_repr(Repr::Product)
    }

    /// Upper Fréchet bound `M(u,v) = min(u,v)`.
    pub fn comonotone() -> Self {
        Self::from_repr(Repr::Comonotone)
    }

    /// Lower Fréchet bound `W(u,v) = max(u+v-1, 0)`.
    pub fn countermonotone() -> Self {
        Self::from_repr(Repr::Countermonotone)
    }

    pub fn family(family: GeneratorFamily, theta: f64) -> Result<Self> {
        family.check_theta(theta)?;
        Ok(Self::from_repr(Repr::Family(family, theta)))
    }

    /// `(u^{-θ} + v^{-θ} - 1)^{-1/θ}`, θ > 0.
    pub fn clayton(theta: f64) -> Result<Self> {
        Self::family(GeneratorFamily::Clayton, theta)
    }

    /// `exp(-((-ln u)^θ + (-ln v)^θ)^{1/θ})`, θ ≥ 1.
    pub fn gumbel(theta: f64) -> Result<Self> {
        Self::family(GeneratorFamily::Gumbel, theta)
    }

    /// Ali-Mikhail-Haq `uv / (1 - θ(1-u)(1-v))`, θ ∈ [0, 1).
    pub fn amh(theta: f64) -> Result<Self> {
        Self::family(GeneratorFamily::Amh, theta)
    }

    /// Gumbel-Barnett `uv exp(-θ ln u ln v)`, θ ∈ (0, 1].
    pub fn gumbel_barnett(theta: f64) -> Result<Self> {
        Self::family(GeneratorFamily::GumbelBarnett, theta)
    }

    pub fn archimedean(generator: ArchimedeanGenerator) -> Self {
        Self::from_repr(Repr::Archimedean(generator))
    }

    /// Extreme-value copula with the given dependence function. The function
    /// is validated on a 1001-point grid.
    pub fn extreme_value(pickands: PickandsFunction) -> Result<Self> {
        crate::verify::require_valid_pickands(&pickands)?;
        Ok(Self::from_repr(Repr::ExtremeValue(pickands)))
    }

    /// Asymmetric logistic copula `Π(u^{1-α}, v^{1-β}) C_θ^{Gumbel}(u^α, v^β)`,
    /// represented through its dependence function.
    pub fn asymmetric_logistic(alpha: f64, beta: f64, theta: f64) -> Result<Self> {
        let a = PickandsFunction::asymmetric_logistic(alpha, beta, theta)?;
        Ok(Self::from_repr(Repr::ExtremeValue(a)))
    }

    /// `Π(u^{1-κ}, v^{1-η}) · C_φ(u^κ, v^η)` with `0 ≤ κ, η ≤ 1`.
    pub fn extended_archimedean(generator: ArchimedeanGenerator, kappa: f64, eta: f64) -> Result<Self> {
        for (name, x) in [("kappa", kappa), ("eta", eta)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Domain(format!("{name} = {x} outside [0, 1]")));
            }
        }
        Ok(Self::from_repr(Repr::ExtendedArchimedean {
            generator,
            kappa,
            eta,
        }))
    }

    pub(crate) fn propagated(baseline: Copula, phi: f64, psi: f64) -> Self {
        Self::from_repr(Repr::Propagated {
            baseline: Box::new(baseline),
            phi,
            psi,
        })
    }

    pub fn kind(&self) -> CopulaKind {
        match &self.repr {
            Repr::Product => CopulaKind::Product,
            Repr::Comonotone => CopulaKind::Comonotone,
            Repr::Countermonotone => CopulaKind::Countermonotone,
            Repr::Family(f, _) => match f {
                GeneratorFamily::Clayton => CopulaKind::Clayton,
                GeneratorFamily::Gumbel => CopulaKind::Gumbel,
                GeneratorFamily::Amh => CopulaKind::Amh,
                GeneratorFamily::GumbelBarnett => CopulaKind::GumbelBarnett,
            },
            Repr::Archimedean(_) => CopulaKind::Archimedean,
            Repr::ExtremeValue(_) => CopulaKind::EvcFromPickands,
            Repr::ExtendedArchimedean { .. } => CopulaKind::ExtendedArchimedean,
            Repr::Propagated { .. } => CopulaKind::Propagated,
        }
    }

    /// Family-specific real parameters.
    pub fn params(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Product | Repr::Comonotone | Repr::Countermonotone => vec![],
            Repr::Family(_, theta) => vec![*theta],
            Repr::Archimedean(g) => vec![g.theta(), g.exponent()],
            Repr::ExtremeValue(a) => match a.logistic_params() {
                Some((al, be, th)) => vec![al, be, th],
                None => vec![],
            },
            Repr::ExtendedArchimedean {
                generator,
                kappa,
                eta,
            } => vec![generator.theta(), generator.exponent(), *kappa, *eta],
            Repr::Propagated { phi, psi, .. } => vec![*phi, *psi],
        }
    }

    /// The archimedean generator for family and generator-defined copulas.
    pub fn generator(&self) -> Option<ArchimedeanGenerator> {
        match &self.repr {
            Repr::Family(f, theta) => ArchimedeanGenerator::new(*f, *theta).ok(),
            Repr::Archimedean(g) => Some(*g),
            Repr::Product => ArchimedeanGenerator::amh(0.0).ok(),
            _ => None,
        }
    }

    /// Dependence function when the copula is an extreme-value copula.
    pub fn pickands(&self) -> Option<&PickandsFunction> {
        match &self.repr {
            Repr::ExtremeValue(a) => Some(a),
            _ => None,
        }
    }

    pub(crate) fn extended_parts(&self) -> Option<(ArchimedeanGenerator, f64, f64)> {
        match &self.repr {
            Repr::ExtendedArchimedean {
                generator,
                kappa,
                eta,
            } => Some((*generator, *kappa, *eta)),
            _ => None,
        }
    }

    /// Whether the copula is TP₂, when that is known analytically.
    pub fn known_tp2(&self) -> Option<bool> {
        match &self.repr {
            Repr::Product | Repr::Comonotone => Some(true),
            Repr::Countermonotone => Some(false),
            Repr::Family(f, theta) => Some(f.is_tp2_family() || *theta == 0.0),
            Repr::Archimedean(g) => Some(g.family().is_tp2_family()),
            Repr::ExtremeValue(_) => Some(true),
            Repr::ExtendedArchimedean { generator, .. } => {
                if generator.family().is_tp2_family() {
                    Some(true)
                } else {
                    None
                }
            }
            Repr::Propagated { baseline, .. } => match baseline.known_tp2() {
                Some(true) => Some(true),
                _ => None,
            },
        }
    }

    /// Short human-readable description, e.g. `clayton(θ=3)`.
    pub fn describe(&self) -> String {
        match &self.repr {
            Repr::Product => "product".into(),
            Repr::Comonotone => "comonotone".into(),
            Repr::Countermonotone => "countermonotone".into(),
            Repr::Family(f, theta) => format!("{}(θ={theta})", f.name()),
            Repr::Archimedean(g) => format!(
                "archimedean[{}(θ={}), m={}]",
                g.family().name(),
                g.theta(),
                g.exponent()
            ),
            Repr::ExtremeValue(a) => format!("evc[{a:?}]"),
            Repr::ExtendedArchimedean {
                generator,
                kappa,
                eta,
            } => format!(
                "extended-archimedean[{}(θ={}), m={}, κ={kappa}, η={eta}]",
                generator.family().name(),
                generator.theta(),
                generator.exponent()
            ),
            Repr::Propagated { baseline, phi, psi } => {
                format!("propagated[{}, Φ={phi}, Ψ={psi}]", baseline.describe())
            }
        }
    }

    /// Copula value with input validation.
    pub fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        check_unit("u", u)?;
        check_unit("v", v)?;
        Ok(self.value(u, v))
    }

    /// Copula value; inputs are assumed to lie in [0, 1] and are clamped.
    pub fn value(&self, u: f64, v: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let v = v.clamp(0.0, 1.0);
        match &self.repr {
            Repr::Comonotone => return u.min(v),
            Repr::Countermonotone => return (u + v - 1.0).max(0.0),
            _ => {}
        }
        if u == 0.0 || v == 0.0 {
            return 0.0;
        }
        if u == 1.0 {
            return v;
        }
        if v == 1.0 {
            return u;
        }
        match &self.repr {
            Repr::Product => u * v,
            Repr::Comonotone | Repr::Countermonotone => unreachable!(),
            Repr::Family(f, theta) => family_cdf(*f, *theta, u, v),
            Repr::Archimedean(g) => g.copula(u, v),
            Repr::ExtremeValue(a) => evc_value(a, u, v),
            Repr::ExtendedArchimedean {
                generator,
                kappa,
                eta,
            } => {
                let (lu, lv) = (u.ln(), v.ln());
                let inner = generator.copula((kappa * lu).exp(), (eta * lv).exp());
                ((1.0 - kappa) * lu + (1.0 - eta) * lv).exp() * inner
            }
            Repr::Propagated { baseline, phi, psi } => {
                let (lu, lv) = (u.ln(), v.ln());
                let inner = baseline.value((lu / phi).exp(), (lv / psi).exp());
                if inner <= 0.0 {
                    return 0.0;
                }
                if phi >= psi {
                    ((phi - psi) / phi * lu + psi * inner.ln()).exp()
                } else {
                    ((psi - phi) / psi * lv + phi * inner.ln()).exp()
                }
            }
        }
    }

    /// Mixed partial `∂²C/∂u∂v` on (0,1)². Closed forms for the named
    /// families, central finite differences otherwise.
    pub fn density(&self, u: f64, v: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) {
            return Err(Error::Domain(format!(
                "density requires (u, v) in (0,1)², got ({u}, {v})"
            )));
        }
        match &self.repr {
            Repr::Product => Ok(1.0),
            Repr::Comonotone | Repr::Countermonotone => Err(Error::Domain(
                "Fréchet bounds are singular and have no density".into(),
            )),
            Repr::Family(f, theta) => Ok(family_density(*f, *theta, u, v)),
            _ => Ok(self.density_fd(u, v)),
        }
    }

    fn density_fd(&self, u: f64, v: f64) -> f64 {
        let h = DENSITY_STEP
            .min(u / 2.0)
            .min((1.0 - u) / 2.0)
            .min(v / 2.0)
            .min((1.0 - v) / 2.0);
        let c = |a: f64, b: f64| self.value(a, b);
        (c(u + h, v + h) - c(u + h, v - h) - c(u - h, v + h) + c(u - h, v - h)) / (4.0 * h * h)
    }

    /// Spearman's rho `12 ∬ C - 3`, midpoint rule on a 512×512 grid.
    pub fn spearman_rho(&self) -> f64 {
        spearman_rho_of(self, SPEARMAN_GRID)
    }
}

impl BivariateCdf for Copula {
    fn eval(&self, u: f64, v: f64) -> f64 {
        self.value(u, v)
    }
}

/// Spearman's rho by the midpoint rule on an `n × n` grid.
pub fn spearman_rho_of<C: BivariateCdf + Sync + ?Sized>(c: &C, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let u = (i as f64 + 0.5) * h;
            let row: Vec<f64> = (0..n).map(|j| c.eval(u, (j as f64 + 0.5) * h)).collect();
            pairwise_sum(&row)
        })
        .collect();
    let integral = pairwise_sum(&rows) * h * h;
    (12.0 * integral - 3.0).clamp(-1.0, 1.0)
}

/// Extreme-value copula from a dependence function, with the limits
/// `0` on the zero edges and the other coordinate on the one edges.
pub fn evc_from_pickands(a: &PickandsFunction, u: f64, v: f64) -> Result<f64> {
    check_unit("u", u)?;
    check_unit("v", v)?;
    crate::verify::require_valid_pickands(a)?;
    Ok(evc_edges(u, v).unwrap_or_else(|| evc_value(a, u, v)))
}

fn evc_edges(u: f64, v: f64) -> Option<f64> {
    if u == 0.0 || v == 0.0 {
        Some(0.0)
    } else if u == 1.0 {
        Some(v)
    } else if v == 1.0 {
        Some(u)
    } else {
        None
    }
}

fn evc_value(a: &PickandsFunction, u: f64, v: f64) -> f64 {
    if let Some(edge) = evc_edges(u, v) {
        return edge;
    }
    let (lu, lv) = (u.ln(), v.ln());
    let luv = lu + lv;
    (luv * a.value(lv / luv)).exp()
}

/// Archimedean copula through its generator, with validation.
pub fn archimedean_cdf(g: &ArchimedeanGenerator, u: f64, v: f64) -> Result<f64> {
    check_unit("u", u)?;
    check_unit("v", v)?;
    Ok(g.copula(u, v))
}

fn family_cdf(f: GeneratorFamily, theta: f64, u: f64, v: f64) -> f64 {
    match f {
        GeneratorFamily::Clayton => {
            let s = (-theta * u.ln()).exp_m1() + (-theta * v.ln()).exp_m1();
            (-s.ln_1p() / theta).exp()
        }
        GeneratorFamily::Gumbel => {
            let s = (-u.ln()).powf(theta) + (-v.ln()).powf(theta);
            (-s.powf(1.0 / theta)).exp()
        }
        GeneratorFamily::Amh => u * v / (1.0 - theta * (1.0 - u) * (1.0 - v)),
        GeneratorFamily::GumbelBarnett => u * v * (-theta * u.ln() * v.ln()).exp(),
    }
}

fn family_density(f: GeneratorFamily, theta: f64, u: f64, v: f64) -> f64 {
    let (lu, lv) = (u.ln(), v.ln());
    match f {
        GeneratorFamily::Clayton => {
            let s = (-theta * lu).exp_m1() + (-theta * lv).exp_m1();
            ((1.0 + theta).ln() - (theta + 1.0) * (lu + lv) - (1.0 / theta + 2.0) * s.ln_1p()).exp()
        }
        GeneratorFamily::Gumbel => {
            let (x, y) = (-lu, -lv);
            let s = x.powf(theta) + y.powf(theta);
            let a = s.powf(1.0 / theta);
            let c = (-a).exp();
            c / (u * v) * (x * y).powf(theta - 1.0) * s.powf(1.0 / theta - 2.0) * (a + theta - 1.0)
        }
        GeneratorFamily::Amh => {
            let d = 1.0 - theta * (1.0 - u) * (1.0 - v);
            (1.0 + theta * ((1.0 + u) * (1.0 + v) - 3.0) + theta * theta * (1.0 - u) * (1.0 - v))
                / (d * d * d)
        }
        GeneratorFamily::GumbelBarnett => {
            let c = (-theta * lu * lv).exp();
            c * ((1.0 - theta * lu) * (1.0 - theta * lv) - theta)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_density(c: &Copula, u: f64, v: f64, h: f64) -> f64 {
        (c.value(u + h, v + h) - c.value(u + h, v - h) - c.value(u - h, v + h)
            + c.value(u - h, v - h))
            / (4.0 * h * h)
    }

    #[test]
    fn product_value() {
        assert!((Copula::independence().cdf(0.3, 0.7).unwrap() - 0.21).abs() < 1e-15);
    }

    #[test]
    fn clayton_half_half() {
        // 15^{-1/3}: (2^3 + 2^3 - 1)^{-1/3}
        let c = Copula::clayton(3.0).unwrap();
        let expected = 0.405_480_133_038_226_7;
        assert!((c.cdf(0.5, 0.5).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 15f64.powf(-1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn uniform_margins_all_kinds() {
        let cs = vec![
            Copula::independence(),
            Copula::clayton(3.0).unwrap(),
            Copula::gumbel(2.0).unwrap(),
            Copula::amh(0.5).unwrap(),
            Copula::gumbel_barnett(0.5).unwrap(),
            Copula::asymmetric_logistic(0.4, 0.9, 3.0).unwrap(),
            Copula::extended_archimedean(ArchimedeanGenerator::clayton(2.0).unwrap(), 0.3, 0.6)
                .unwrap(),
        ];
        for c in &cs {
            for &u in &[0.0, 0.25, 1.0] {
                assert!((c.cdf(u, 1.0).unwrap() - u).abs() < 1e-15, "{}", c.describe());
                assert!((c.cdf(1.0, u).unwrap() - u).abs() < 1e-15, "{}", c.describe());
                assert_eq!(c.cdf(u, 0.0).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn input_and_domain_errors() {
        assert!(matches!(Copula::clayton(-1.0), Err(Error::Domain(_))));
        assert!(matches!(Copula::gumbel(0.5), Err(Error::Domain(_))));
        assert!(matches!(Copula::gumbel_barnett(1.5), Err(Error::Domain(_))));
        assert!(matches!(Copula::amh(1.0), Err(Error::Domain(_))));
        let c = Copula::clayton(1.0).unwrap();
        assert!(matches!(c.cdf(f64::NAN, 0.5), Err(Error::Input(_))));
        assert!(matches!(c.cdf(1.5, 0.5), Err(Error::Input(_))));
        assert!(matches!(c.density(0.0, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn closed_form_densities_match_finite_differences() {
        let cs = vec![
            Copula::clayton(3.0).unwrap(),
            Copula::gumbel(3.0).unwrap(),
            Copula::amh(0.7).unwrap(),
            Copula::gumbel_barnett(0.5).unwrap(),
        ];
        for c in &cs {
            for &(u, v) in &[(0.5, 0.5), (0.2, 0.7), (0.9, 0.3)] {
                let fd = fd_density(c, u, v, 1e-4);
                let d = c.density(u, v).unwrap();
                assert!((fd - d).abs() < 1e-5 * (1.0 + d), "{} ({u},{v}) {d} vs {fd}", c.describe());
            }
        }
    }

    #[test]
    fn clayton_density_near_independence() {
        let c = Copula::clayton(1e-4).unwrap();
        assert!((c.density(0.5, 0.5).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn spearman_references() {
        assert!(Copula::independence().spearman_rho().abs() < 1e-12);
        assert!((Copula::comonotone().spearman_rho() - 1.0).abs() < 1e-5);
        assert!((Copula::countermonotone().spearman_rho() + 1.0).abs() < 1e-5);
    }

    #[test]
    fn evc_half_point_identity() {
        let a = PickandsFunction::gumbel_logistic(2.0).unwrap();
        let got = evc_from_pickands(&a, 0.5, 0.5).unwrap();
        assert!((got - 0.25f64.powf(a.value(0.5))).abs() < 1e-15);
        let bad = PickandsFunction::from_fn("0.4", |_| 0.4);
        assert!(matches!(evc_from_pickands(&bad, 0.5, 0.5), Err(Error::Validity(_))));
    }
}
