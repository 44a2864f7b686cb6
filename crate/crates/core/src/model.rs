//! Covariate links, proportional-hazards margins and the propagation of a
//! baseline dependence structure to covariate level `z`.

use serde::{Deserialize, Serialize};

use crate::copula::{ArchimedeanGenerator, Copula, CopulaKind, PickandsFunction};
use crate::error::{Error, Result};
use crate::verify::{self, GridSpec};

/// Resolution used when validating propagated generators.
const GENERATOR_CHECK_RESOLUTION: usize = 1001;

/// Log-linear hazard factors `Φ(z) = exp(alpha_coefs·z)` and
/// `Ψ(z) = exp(beta_coefs·z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateLink {
    alpha_coefs: Vec<f64>,
    beta_coefs: Vec<f64>,
}

impl CovariateLink {
    pub fn new(alpha_coefs: Vec<f64>, beta_coefs: Vec<f64>) -> Result<Self> {
        if alpha_coefs.is_empty() || alpha_coefs.len() != beta_coefs.len() {
            return Err(Error::Input(format!(
                "link coefficient lengths {} and {} must match and be nonzero",
                alpha_coefs.len(),
                beta_coefs.len()
            )));
        }
        if alpha_coefs.iter().chain(&beta_coefs).any(|c| !c.is_finite()) {
            return Err(Error::Input("link coefficients must be finite".into()));
        }
        Ok(Self {
            alpha_coefs,
            beta_coefs,
        })
    }

    /// One-dimensional covariate.
    pub fn scalar(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(vec![alpha], vec![beta])
    }

    pub fn dim(&self) -> usize {
        self.alpha_coefs.len()
    }

    pub fn alpha_coefs(&self) -> &[f64] {
        &self.alpha_coefs
    }

    pub fn beta_coefs(&self) -> &[f64] {
        &self.beta_coefs
    }

    fn dot(&self, coefs: &[f64], z: &[f64]) -> Result<f64> {
        if z.len() != self.dim() {
            return Err(Error::Input(format!(
                "covariate has length {}, link expects {}",
                z.len(),
                self.dim()
            )));
        }
        if z.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("covariate must be finite".into()));
        }
        Ok(coefs.iter().zip(z).map(|(c, x)| c * x).sum())
    }

    pub fn phi(&self, z: &[f64]) -> Result<f64> {
        Ok(self.dot(&self.alpha_coefs, z)?.exp())
    }

    pub fn psi(&self, z: &[f64]) -> Result<f64> {
        Ok(self.dot(&self.beta_coefs, z)?.exp())
    }

    pub fn at(&self, z: &[f64]) -> Result<LinkValues> {
        LinkValues::new(self.phi(z)?, self.psi(z)?)
    }
}

/// Hazard factors at one covariate value together with the derived ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkValues {
    pub phi: f64,
    pub psi: f64,
    /// `min(Ψ/Φ, 1)`
    pub alpha: f64,
    /// `min(Φ/Ψ, 1)`
    pub beta: f64,
    /// `Ψ/Φ`
    pub k: f64,
    /// `min(1/K, 1)`
    pub w: f64,
}

impl LinkValues {
    pub fn new(phi: f64, psi: f64) -> Result<Self> {
        for (name, x) in [("Φ", phi), ("Ψ", psi)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::Domain(format!("{name}(z) = {x} must be finite and positive")));
            }
        }
        let k = psi / phi;
        let (alpha, beta) = if phi >= psi { (k, 1.0) } else { (1.0, phi / psi) };
        Ok(Self {
            phi,
            psi,
            alpha,
            beta,
            k,
            w: beta,
        })
    }

    /// Both factors equal to one.
    pub fn identity() -> Self {
        Self {
            phi: 1.0,
            psi: 1.0,
            alpha: 1.0,
            beta: 1.0,
            k: 1.0,
            w: 1.0,
        }
    }

    /// `min(Φ, Ψ)`.
    pub fn min_factor(&self) -> f64 {
        self.phi.min(self.psi)
    }

    /// Generator exponent `1 / min(Φ, Ψ)`.
    pub fn generator_exponent(&self) -> f64 {
        1.0 / self.min_factor()
    }
}

/// Weibull baseline survival `exp(-(t/scale)^shape)` raised to `ph_power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalMarginal {
    shape: f64,
    scale: f64,
    ph_power: f64,
}

impl SurvivalMarginal {
    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 0.0 && scale.is_finite() && scale > 0.0) {
            return Err(Error::Domain(format!(
                "Weibull shape {shape} and scale {scale} must be positive"
            )));
        }
        Ok(Self {
            shape,
            scale,
            ph_power: 1.0,
        })
    }

    /// Same baseline with survival raised to `power` (hazard multiplied by it).
    pub fn with_power(&self, power: f64) -> Result<Self> {
        if !(power.is_finite() && power > 0.0) {
            return Err(Error::Domain(format!("PH power {power} must be positive")));
        }
        Ok(Self {
            ph_power: self.ph_power * power,
            ..*self
        })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn ph_power(&self) -> f64 {
        self.ph_power
    }

    fn check_time(t: f64) -> Result<()> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::Input(format!("time {t} must be nonnegative")));
        }
        Ok(())
    }

    pub fn cumulative_hazard(&self, t: f64) -> Result<f64> {
        Self::check_time(t)?;
        Ok(self.ph_power * (t / self.scale).powf(self.shape))
    }

    pub fn survival(&self, t: f64) -> Result<f64> {
        Ok((-self.cumulative_hazard(t)?).exp())
    }

    pub fn hazard(&self, t: f64) -> Result<f64> {
        Self::check_time(t)?;
        Ok(self.ph_power * self.shape / self.scale * (t / self.scale).powf(self.shape - 1.0))
    }

    /// Time `t` with survival `p`, for `p ∈ (0, 1]`.
    pub fn inverse_survival(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Input(format!("survival level {p} outside (0, 1]")));
        }
        Ok(self.scale * (-p.ln() / self.ph_power).powf(1.0 / self.shape))
    }
}

fn require_tp2_or_valid(baseline: &Copula, lv: &LinkValues, result: Copula) -> Result<Copula> {
    if baseline.known_tp2() == Some(true) || lv.min_factor() >= 1.0 {
        return Ok(result);
    }
    let report = verify::check_copula_axioms(&result, &GridSpec::default());
    if report.passed {
        Ok(result)
    } else {
        Err(Error::PropagationValidity(Box::new(report)))
    }
}

/// Copula of the joint survival function at covariate level `z`, returned in
/// structured form where one exists: archimedean baselines give extended
/// archimedean copulas, extreme-value baselines give extreme-value copulas.
///
/// Non-TP₂ baselines with `min(Φ, Ψ) < 1` are checked on the default grid
/// and rejected with [`Error::PropagationValidity`] when the result violates
/// the copula axioms.
pub fn propagate_copula(baseline: &Copula, lv: &LinkValues) -> Result<Copula> {
    let m = lv.generator_exponent();
    let result = match baseline.kind() {
        CopulaKind::Product => Copula::independence(),
        CopulaKind::EvcFromPickands => {
            let a = baseline.pickands().expect("evc copula carries its dependence function");
            Copula::extreme_value(propagate_pickands(a, lv)?)?
        }
        CopulaKind::ExtendedArchimedean => {
            let (g, kappa, eta) = baseline.extended_parts().expect("extended archimedean parts");
            Copula::extended_archimedean(g.with_exponent(m)?, lv.alpha * kappa, lv.beta * eta)?
        }
        _ => match baseline.generator() {
            Some(g) => Copula::extended_archimedean(g.with_exponent(m)?, lv.alpha, lv.beta)?,
            None => Copula::propagated(baseline.clone(), lv.phi, lv.psi),
        },
    };
    require_tp2_or_valid(baseline, lv, result)
}

/// The propagated copula evaluated literally as
/// `u^{(Φ-Ψ)/Φ} C₀(u^{1/Φ}, v^{1/Ψ})^Ψ` (or its mirror when `Φ < Ψ`),
/// without structural simplification or validity checks.
pub fn propagate_copula_direct(baseline: &Copula, lv: &LinkValues) -> Copula {
    Copula::propagated(baseline.clone(), lv.phi, lv.psi)
}

/// Derived generator `φ_z(t) = φ₀(t^{1/min(Φ,Ψ)})`. The baseline must
/// satisfy the TP₂ condition `φ₀' + tφ₀'' ≥ 0`.
pub fn propagate_generator(g0: &ArchimedeanGenerator, lv: &LinkValues) -> Result<ArchimedeanGenerator> {
    g0.check_validity(GENERATOR_CHECK_RESOLUTION, true)?;
    let gz = g0.with_exponent(lv.generator_exponent())?;
    gz.check_validity(GENERATOR_CHECK_RESOLUTION, true)?;
    Ok(gz)
}

/// `u^{1-α} v^{1-β} C_{φ_z}(u^α, v^β)`.
pub fn propagate_archimedean(g0: &ArchimedeanGenerator, lv: &LinkValues, u: f64, v: f64) -> Result<f64> {
    propagate_extended_archimedean(g0, 1.0, 1.0, lv, u, v)
}

/// `Π(u^{1-ακ}, v^{1-βη}) · C_{φ_z}(u^{ακ}, v^{βη})`.
pub fn propagate_extended_archimedean(
    g0: &ArchimedeanGenerator,
    kappa: f64,
    eta: f64,
    lv: &LinkValues,
    u: f64,
    v: f64,
) -> Result<f64> {
    crate::error::check_unit("u", u)?;
    crate::error::check_unit("v", v)?;
    let gz = propagate_generator(g0, lv)?;
    Ok(Copula::extended_archimedean(gz, lv.alpha * kappa, lv.beta * eta)?.value(u, v))
}

/// Dependence function of the propagated extreme-value copula:
/// `B(s) = 1 - WK - sW(1-K) + W((1-s)K + s) A(s / (K(1-s) + s))`.
pub fn propagate_pickands(a: &PickandsFunction, lv: &LinkValues) -> Result<PickandsFunction> {
    verify::require_valid_pickands(a)?;
    if lv.k == 1.0 {
        return Ok(a.clone());
    }
    Ok(PickandsFunction::propagated(a.clone(), lv.k, lv.w))
}

/// Moves a dependence function known at `z` to `z_prime` without the
/// baseline, using the ratios `α(z')/α(z)` and `β(z')/β(z)`.
pub fn transition_pickands(
    b_z: &PickandsFunction,
    link: &CovariateLink,
    z: &[f64],
    z_prime: &[f64],
) -> Result<PickandsFunction> {
    let from = link.at(z)?;
    let to = link.at(z_prime)?;
    transition_between(b_z, &from, &to)
}

/// [`transition_pickands`] with precomputed link values.
pub fn transition_between(b_z: &PickandsFunction, from: &LinkValues, to: &LinkValues) -> Result<PickandsFunction> {
    verify::require_valid_pickands(b_z)?;
    let a = to.alpha / from.alpha;
    let b = to.beta / from.beta;
    if a == 1.0 && b == 1.0 {
        return Ok(b_z.clone());
    }
    let out = PickandsFunction::transition(b_z.clone(), a, b);
    let report = verify::check_pickands(&out, crate::copula::PICKANDS_CHECK_RESOLUTION)?;
    if report.passed {
        Ok(out)
    } else {
        Err(Error::TransitionDomain(format!(
            "ratios ({a}, {b}) give an invalid dependence function: {}",
            report.summary()
        )))
    }
}

/// `B(s) = 1 - α + (α-β)s + (α^θ(1-s)^θ + β^θ s^θ)^{1/θ}`.
pub fn asymmetric_logistic_pickands(alpha: f64, beta: f64, theta: f64) -> Result<PickandsFunction> {
    PickandsFunction::asymmetric_logistic(alpha, beta, theta)
}

/// Dependence function of `C_{A1}(u^{1-κ}, v^{1-η}) · C_{A2}(u^κ, v^η)`.
pub fn khoudraji_asymmetrize(
    a1: &PickandsFunction,
    a2: &PickandsFunction,
    kappa: f64,
    eta: f64,
) -> Result<PickandsFunction> {
    PickandsFunction::khoudraji(a1.clone(), a2.clone(), kappa, eta)
}

/// Joint survival function at `z`:
/// `H̄⁰(x,y)^Ψ F̄⁰(x)^{Φ-Ψ}` when `Φ ≥ Ψ`, `H̄⁰(x,y)^Φ Ḡ⁰(y)^{Ψ-Φ}` otherwise,
/// with `H̄⁰(x,y) = C₀(F̄⁰(x), Ḡ⁰(y))`.
pub fn propagate_sdf(
    baseline: &Copula,
    x_margin: &SurvivalMarginal,
    y_margin: &SurvivalMarginal,
    lv: &LinkValues,
    x: f64,
    y: f64,
) -> Result<f64> {
    let fx = x_margin.survival(x)?;
    let gy = y_margin.survival(y)?;
    let h0 = baseline.value(fx, gy);
    if h0 <= 0.0 {
        return Ok(0.0);
    }
    let out = if lv.phi >= lv.psi {
        (lv.psi * h0.ln() + (lv.phi - lv.psi) * fx.ln()).exp()
    } else {
        (lv.phi * h0.ln() + (lv.psi - lv.phi) * gy.ln()).exp()
    };
    Ok(out)
}

/// Recovers `(Φ, Ψ)` from a joint survival function at `z` through its
/// margins: `log H̄ᶻ(x, 0) = Φ log F̄⁰(x)` and `log H̄ᶻ(0, y) = Ψ log Ḡ⁰(y)`.
pub fn identify_link_values(
    sdf_z: impl Fn(f64, f64) -> Result<f64>,
    x_margin: &SurvivalMarginal,
    y_margin: &SurvivalMarginal,
    x: f64,
    y: f64,
) -> Result<LinkValues> {
    let lx = x_margin.survival(x)?.ln();
    let ly = y_margin.survival(y)?.ln();
    if !(lx < 0.0 && ly < 0.0) {
        return Err(Error::Input("identification points need survival below one".into()));
    }
    let phi = sdf_z(x, 0.0)?.ln() / lx;
    let psi = sdf_z(0.0, y)?.ln() / ly;
    LinkValues::new(phi, psi)
}

/// A baseline copula together with the covariate link.
#[derive(Debug, Clone)]
pub struct PropagatedModel {
    baseline_copula: Copula,
    link: CovariateLink,
}

impl PropagatedModel {
    pub fn new(baseline_copula: Copula, link: CovariateLink) -> Self {
        Self {
            baseline_copula,
            link,
        }
    }

    pub fn baseline_copula(&self) -> &Copula {
        &self.baseline_copula
    }

    pub fn link(&self) -> &CovariateLink {
        &self.link
    }

    pub fn link_values(&self, z: &[f64]) -> Result<LinkValues> {
        self.link.at(z)
    }

    pub fn copula_at(&self, z: &[f64]) -> Result<Copula> {
        propagate_copula(&self.baseline_copula, &self.link.at(z)?)
    }

    pub fn sdf(
        &self,
        x_margin: &SurvivalMarginal,
        y_margin: &SurvivalMarginal,
        z: &[f64],
        x: f64,
        y: f64,
    ) -> Result<f64> {
        propagate_sdf(&self.baseline_copula, x_margin, y_margin, &self.link.at(z)?, x, y)
    }

    /// Dependence function at `z` for extreme-value baselines.
    pub fn pickands_at(&self, z: &[f64]) -> Result<PickandsFunction> {
        let a = self.baseline_copula.pickands().ok_or_else(|| {
            Error::Input(format!("{} is not an extreme-value copula", self.baseline_copula.describe()))
        })?;
        propagate_pickands(a, &self.link.at(z)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn link_values_invariants() {
        let lv = LinkValues::new(2.0, 1.0).unwrap();
        assert_eq!((lv.alpha, lv.beta, lv.k, lv.w), (0.5, 1.0, 0.5, 1.0));
        let lv = LinkValues::new(1.0, 4.0).unwrap();
        assert_eq!((lv.alpha, lv.beta, lv.k, lv.w), (1.0, 0.25, 4.0, 0.25));
        assert!(LinkValues::new(0.0, 1.0).is_err());
        assert!(LinkValues::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn link_dimension_checked() {
        let link = CovariateLink::new(vec![0.1, 0.06], vec![0.07, 0.25]).unwrap();
        assert!(link.phi(&[1.0]).is_err());
        assert!((link.phi(&[1.0, 0.0]).unwrap() - 0.1f64.exp()).abs() < 1e-15);
        assert!((link.psi(&[0.0, 1.0]).unwrap() - 0.25f64.exp()).abs() < 1e-15);
        assert!(CovariateLink::new(vec![1.0], vec![]).is_err());
    }

    #[test]
    fn weibull_margin() {
        let m = SurvivalMarginal::weibull(2.0, 12000.0).unwrap();
        assert_eq!(m.survival(0.0).unwrap(), 1.0);
        assert!((m.survival(12000.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!(m.survival(-1.0).is_err());
        let t = m.inverse_survival(0.3).unwrap();
        assert!((m.survival(t).unwrap() - 0.3).abs() < 1e-14);
        let mz = m.with_power(1.7).unwrap();
        assert!((mz.hazard(5000.0).unwrap() - 1.7 * m.hazard(5000.0).unwrap()).abs() < 1e-18);
    }

    #[test]
    fn clayton_reference_point() {
        let lv = LinkValues::new(2.0, 1.0).unwrap();
        let c0 = Copula::clayton(3.0).unwrap();
        let expected = 0.5 * c0.value(0.5, 0.5);
        let structured = propagate_copula(&c0, &lv).unwrap().value(0.25, 0.5);
        let direct = propagate_copula_direct(&c0, &lv).value(0.25, 0.5);
        assert!((structured - expected).abs() < 1e-14);
        assert!((direct - expected).abs() < 1e-14);
        assert!((expected - 0.202740).abs() < 1e-6);
    }

    #[test]
    fn generator_exponent() {
        let g = ArchimedeanGenerator::clayton(3.0).unwrap();
        let gz = propagate_generator(&g, &LinkValues::new(2.0, 3.0).unwrap()).unwrap();
        let c15 = ArchimedeanGenerator::clayton(1.5).unwrap();
        for i in 1..=100 {
            let t = i as f64 / 100.0;
            assert!((gz.phi(t) - c15.phi(t)).abs() < 1e-12 * c15.phi(t).max(1.0));
        }
        let gb = ArchimedeanGenerator::gumbel_barnett(0.5).unwrap();
        assert!(propagate_generator(&gb, &LinkValues::identity()).is_err());
    }

    #[test]
    fn gumbel_barnett_parameter_shrinks() {
        let c0 = Copula::gumbel_barnett(0.8).unwrap();
        let lv = LinkValues::new(2.0, 1.5).unwrap();
        let cz = propagate_copula(&c0, &lv).unwrap();
        let target = Copula::gumbel_barnett(0.4).unwrap();
        for &(u, v) in &[(0.2, 0.3), (0.7, 0.1), (0.5, 0.95)] {
            assert!((cz.value(u, v) - target.value(u, v)).abs() < 1e-14);
        }
    }

    #[test]
    fn invalid_non_tp2_propagation_reported() {
        let c0 = Copula::gumbel_barnett(1.0).unwrap();
        let lv = LinkValues::new(0.3, 0.3).unwrap();
        match propagate_copula(&c0, &lv) {
            Err(Error::PropagationValidity(report)) => {
                assert!(!report.passed);
                assert!(!report.witness.is_empty());
            }
            other => panic!("expected validity error, got {other:?}"),
        }
    }

    #[test]
    fn pickands_reference_value() {
        let a = PickandsFunction::gumbel_logistic(3.0).unwrap();
        let b = propagate_pickands(&a, &LinkValues::new(2.0, 1.0).unwrap()).unwrap();
        let expected = 0.25 + 0.75 * (1.0f64 / 3.0).powf(1.0 / 3.0);
        assert!((b.value(0.5) - expected).abs() < 1e-14);
        let al = asymmetric_logistic_pickands(0.5, 1.0, 3.0).unwrap();
        assert!((al.value(0.5) - expected).abs() < 1e-14);
    }

    #[test]
    fn transition_identity() {
        let link = CovariateLink::scalar(1.5, 2.0).unwrap();
        let a = PickandsFunction::gumbel_logistic(3.0).unwrap();
        let b = transition_pickands(&a, &link, &[0.1], &[0.1]).unwrap();
        for i in 0..=10 {
            let s = i as f64 / 10.0;
            assert_eq!(a.value(s), b.value(s));
        }
    }

    #[test]
    fn sdf_margins_and_errors() {
        let c0 = Copula::gumbel(3.0).unwrap();
        let mx = SurvivalMarginal::weibull(2.0, 12000.0).unwrap();
        let my = SurvivalMarginal::weibull(1.5, 8000.0).unwrap();
        let lv = LinkValues::new(1.3, 0.9).unwrap();
        let h = propagate_sdf(&c0, &mx, &my, &lv, 7000.0, 0.0).unwrap();
        assert!((h - mx.survival(7000.0).unwrap().powf(1.3)).abs() < 1e-14);
        assert!(propagate_sdf(&c0, &mx, &my, &lv, -1.0, 0.0).is_err());
    }

    #[test]
    fn identifiability_round_trip() {
        let c0 = Copula::clayton(2.0).unwrap();
        let mx = SurvivalMarginal::weibull(2.0, 12000.0).unwrap();
        let my = SurvivalMarginal::weibull(1.5, 8000.0).unwrap();
        let lv = LinkValues::new(1.35, 0.72).unwrap();
        let got = identify_link_values(|x, y| propagate_sdf(&c0, &mx, &my, &lv, x, y), &mx, &my, 9000.0, 5000.0)
            .unwrap();
        assert!((got.phi - 1.35).abs() < 1e-8);
        assert!((got.psi - 0.72).abs() < 1e-8);
    }
}
