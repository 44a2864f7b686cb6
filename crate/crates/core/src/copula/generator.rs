//! Archimedean generators.
//!
//! A generator is stored as a base family with parameter θ and a positive
//! exponent `m`, representing `φ(t) = φ₀(t^m)`. Exponent `1` is the plain
//! family generator; other exponents arise when the model acts on the copula.
//! All evaluations go through `ln t` so that powers of `t` do not lose
//! precision near zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Base families with a closed-form generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorFamily {
    /// `φ(t) = t^{-θ} - 1`, θ > 0.
    Clayton,
    /// `φ(t) = (-ln t)^θ`, θ ≥ 1.
    Gumbel,
    /// Ali-Mikhail-Haq, `φ(t) = ln((1 - θ(1-t)) / t)`, θ ∈ [0, 1).
    Amh,
    /// `φ(t) = ln(1 - θ ln t)`, θ ∈ (0, 1].
    GumbelBarnett,
}

impl GeneratorFamily {
    pub fn name(self) -> &'static str {
        match self {
            GeneratorFamily::Clayton => "clayton",
            GeneratorFamily::Gumbel => "gumbel",
            GeneratorFamily::Amh => "amh",
            GeneratorFamily::GumbelBarnett => "gumbel-barnett",
        }
    }

    /// Checks θ against the family's parameter domain.
    pub fn check_theta(self, theta: f64) -> Result<()> {
        let ok = theta.is_finite()
            && match self {
                GeneratorFamily::Clayton => theta > 0.0,
                GeneratorFamily::Gumbel => theta >= 1.0,
                GeneratorFamily::Amh => (0.0..1.0).contains(&theta),
                GeneratorFamily::GumbelBarnett => theta > 0.0 && theta <= 1.0,
            };
        if ok {
            Ok(())
        } else {
            let domain = match self {
                GeneratorFamily::Clayton => "(0, inf)",
                GeneratorFamily::Gumbel => "[1, inf)",
                GeneratorFamily::Amh => "[0, 1)",
                GeneratorFamily::GumbelBarnett => "(0, 1]",
            };
            Err(Error::Domain(format!(
                "{} parameter {theta} outside {domain}",
                self.name()
            )))
        }
    }

    /// Whether `φ'(t) + t φ''(t) ≥ 0` on (0,1) for every admissible θ, which is
    /// the condition for the induced copula to be TP₂.
    pub fn is_tp2_family(self) -> bool {
        !matches!(self, GeneratorFamily::GumbelBarnett)
    }
}

impl std::str::FromStr for GeneratorFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "clayton" => Ok(GeneratorFamily::Clayton),
            "gumbel" => Ok(GeneratorFamily::Gumbel),
            "amh" | "ali-mikhail-haq" => Ok(GeneratorFamily::Amh),
            "gumbel-barnett" | "gumbel_barnett" => Ok(GeneratorFamily::GumbelBarnett),
            other => Err(Error::Input(format!("unknown generator family '{other}'"))),
        }
    }
}

/// An archimedean generator `φ(t) = φ₀(t^m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchimedeanGenerator {
    family: GeneratorFamily,
    theta: f64,
    exponent: f64,
}

impl ArchimedeanGenerator {
    pub fn new(family: GeneratorFamily, theta: f64) -> Result<Self> {
        family.check_theta(theta)?;
        Ok(Self {
            family,
            theta,
            exponent: 1.0,
        })
    }

    pub fn clayton(theta: f64) -> Result<Self> {
        Self::new(GeneratorFamily::Clayton, theta)
    }

    pub fn gumbel(theta: f64) -> Result<Self> {
        Self::new(GeneratorFamily::Gumbel, theta)
    }

    pub fn amh(theta: f64) -> Result<Self> {
        Self::new(GeneratorFamily::Amh, theta)
    }

    pub fn gumbel_barnett(theta: f64) -> Result<Self> {
        Self::new(GeneratorFamily::GumbelBarnett, theta)
    }

    /// Returns the generator `t ↦ φ(t^m)`; exponents compose multiplicatively.
    pub fn with_exponent(&self, m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::Domain(format!("generator exponent {m} must be positive")));
        }
        Ok(Self {
            exponent: self.exponent * m,
            ..*self
        })
    }

    pub fn family(&self) -> GeneratorFamily {
        self.family
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// `φ₀` evaluated at `exp(lt)`.
    fn base_phi_log(&self, lt: f64) -> f64 {
        let th = self.theta;
        match self.family {
            GeneratorFamily::Clayton => (-th * lt).exp_m1(),
            GeneratorFamily::Gumbel => (-lt).powf(th),
            GeneratorFamily::Amh => (th * lt.exp_m1()).ln_1p() - lt,
            GeneratorFamily::GumbelBarnett => (-th * lt).ln_1p(),
        }
    }

    /// `ln φ₀⁻¹(s)` for s ≥ 0.
    fn base_inverse_log(&self, s: f64) -> f64 {
        let th = self.theta;
        match self.family {
            GeneratorFamily::Clayton => -s.ln_1p() / th,
            GeneratorFamily::Gumbel => -s.powf(1.0 / th),
            GeneratorFamily::Amh => (1.0 - th).ln() - (s + (-th * (-s).exp()).ln_1p()),
            GeneratorFamily::GumbelBarnett => -s.exp_m1() / th,
        }
    }

    fn base_d1(&self, x: f64) -> f64 {
        let th = self.theta;
        match self.family {
            GeneratorFamily::Clayton => -th * x.powf(-th - 1.0),
            GeneratorFamily::Gumbel => -th * (-x.ln()).powf(th - 1.0) / x,
            GeneratorFamily::Amh => th / (1.0 - th + th * x) - 1.0 / x,
            GeneratorFamily::GumbelBarnett => -th / (x * (1.0 - th * x.ln())),
        }
    }

    fn base_d2(&self, x: f64) -> f64 {
        let th = self.theta;
        match self.family {
            GeneratorFamily::Clayton => th * (th + 1.0) * x.powf(-th - 2.0),
            GeneratorFamily::Gumbel => {
                let l = -x.ln();
                let mut out = th * l.powf(th - 1.0);
                if th > 1.0 {
                    out += th * (th - 1.0) * l.powf(th - 2.0);
                }
                out / (x * x)
            }
            GeneratorFamily::Amh => {
                let d = 1.0 - th + th * x;
                1.0 / (x * x) - th * th / (d * d)
            }
            GeneratorFamily::GumbelBarnett => {
                let d = x * (1.0 - th * x.ln());
                th * (1.0 - th * x.ln() - th) / (d * d)
            }
        }
    }

    /// φ(t) for t ∈ [0, 1]; `φ(0) = +∞` for every family here (strict generators).
    pub fn phi(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return f64::INFINITY;
        }
        if t >= 1.0 {
            return 0.0;
        }
        self.base_phi_log(self.exponent * t.ln())
    }

    /// The (pseudo-)inverse φ^{[-1]}(s) for s ∈ [0, ∞].
    pub fn phi_inverse(&self, s: f64) -> f64 {
        self.inverse_log(s).exp()
    }

    /// `ln φ^{[-1]}(s)`.
    pub fn inverse_log(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        self.base_inverse_log(s) / self.exponent
    }

    /// φ'(t) on (0, 1].
    pub fn phi_prime(&self, t: f64) -> f64 {
        let m = self.exponent;
        if m == 1.0 {
            return self.base_d1(t);
        }
        let x = t.powf(m);
        m * t.powf(m - 1.0) * self.base_d1(x)
    }

    /// φ''(t) on (0, 1).
    pub fn phi_second(&self, t: f64) -> f64 {
        let m = self.exponent;
        if m == 1.0 {
            return self.base_d2(t);
        }
        let x = t.powf(m);
        m * (m - 1.0) * t.powf(m - 2.0) * self.base_d1(x)
            + m * m * t.powf(2.0 * m - 2.0) * self.base_d2(x)
    }

    /// `φ'(t) + t φ''(t)`; nonnegative on (0,1) iff the copula is TP₂.
    pub fn tp2_margin(&self, t: f64) -> f64 {
        self.phi_prime(t) + t * self.phi_second(t)
    }

    /// `C(u,v) = φ^{[-1]}(φ(u) + φ(v))`, boundary handled by continuity.
    pub fn copula(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return v.min(1.0);
        }
        if v >= 1.0 {
            return u;
        }
        self.phi_inverse(self.phi(u) + self.phi(v))
    }

    /// Grid check of the generator axioms: φ(1)=0, strictly decreasing and
    /// convex on (0,1]. With `require_tp2` the TP₂ condition is checked too.
    pub fn check_validity(&self, resolution: usize, require_tp2: bool) -> Result<()> {
        let n = resolution.max(3);
        if self.phi(1.0).abs() > 1e-12 {
            return Err(Error::Validity(format!("φ(1) = {} ≠ 0", self.phi(1.0))));
        }
        let ts: Vec<f64> = (1..=n).map(|i| i as f64 / (n as f64 + 1.0)).collect();
        let vals: Vec<f64> = ts.iter().map(|&t| self.phi(t)).collect();
        for w in vals.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::Validity("generator is not strictly decreasing".into()));
            }
        }
        for (i, w) in vals.windows(3).enumerate() {
            let second = w[0] - 2.0 * w[1] + w[2];
            if second < -1e-9 * (1.0 + w[0].abs()) {
                return Err(Error::Validity(format!(
                    "generator not convex near t = {}",
                    ts[i + 1]
                )));
            }
        }
        if require_tp2 {
            for &t in &ts {
                let g = self.tp2_margin(t);
                let scale = self.phi_prime(t).abs() + 1.0;
                if g < -1e-10 * scale {
                    return Err(Error::Validity(format!(
                        "φ'(t) + tφ''(t) = {g:.3e} < 0 at t = {t}: induced copula is not TP2"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn families() -> Vec<ArchimedeanGenerator> {
        vec![
            ArchimedeanGenerator::clayton(3.0).unwrap(),
            ArchimedeanGenerator::gumbel(3.0).unwrap(),
            ArchimedeanGenerator::gumbel(1.0).unwrap(),
            ArchimedeanGenerator::amh(0.7).unwrap(),
            ArchimedeanGenerator::amh(0.0).unwrap(),
            ArchimedeanGenerator::gumbel_barnett(0.5).unwrap(),
            ArchimedeanGenerator::clayton(2.0).unwrap().with_exponent(0.4).unwrap(),
        ]
    }

    #[test]
    fn inverse_round_trips() {
        for g in families() {
            for &t in &[1e-6, 0.01, 0.3, 0.5, 0.9, 0.999] {
                let back = g.phi_inverse(g.phi(t));
                assert!((back - t).abs() < 1e-10 * t.max(1e-3), "{g:?} t={t} back={back}");
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6;
        for g in families() {
            for &t in &[0.1, 0.4, 0.8] {
                let d1 = (g.phi(t + h) - g.phi(t - h)) / (2.0 * h);
                assert!((d1 - g.phi_prime(t)).abs() < 1e-5 * (1.0 + d1.abs()), "{g:?} t={t}");
                let d2 = (g.phi_prime(t + h) - g.phi_prime(t - h)) / (2.0 * h);
                assert!((d2 - g.phi_second(t)).abs() < 1e-4 * (1.0 + d2.abs()), "{g:?} t={t}");
            }
        }
    }

    #[test]
    fn domains_enforced() {
        assert!(ArchimedeanGenerator::clayton(0.0).is_err());
        assert!(ArchimedeanGenerator::gumbel(0.99).is_err());
        assert!(ArchimedeanGenerator::amh(1.0).is_err());
        assert!(ArchimedeanGenerator::gumbel_barnett(1.2).is_err());
        assert!(ArchimedeanGenerator::clayton(f64::NAN).is_err());
        assert!(ArchimedeanGenerator::clayton(1.0).unwrap().with_exponent(0.0).is_err());
    }

    #[test]
    fn tp2_condition_by_family() {
        for g in families() {
            let tp2 = g.check_validity(200, true).is_ok();
            assert_eq!(tp2, g.family().is_tp2_family(), "{g:?}");
            assert!(g.check_validity(200, false).is_ok());
        }
    }

    #[test]
    fn exponent_composes() {
        let g = ArchimedeanGenerator::gumbel(2.0).unwrap();
        let a = g.with_exponent(2.0).unwrap().with_exponent(0.25).unwrap();
        let b = g.with_exponent(0.5).unwrap();
        for &t in &[0.1, 0.5, 0.9] {
            assert!((a.phi(t) - b.phi(t)).abs() < 1e-14);
        }
    }
}
