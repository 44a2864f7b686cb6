//! Pickands dependence functions.
//!
//! Composite functions (covariate propagation, transitions, Khoudraji
//! asymmetrization) are kept as lazy expressions over their inner functions
//! instead of tables, so nested compositions stay exact.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Kind tag of a [`PickandsFunction`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PickandsKind {
    ConstantOne,
    GumbelLogistic,
    AsymmetricLogistic,
    Tabulated,
    Propagated,
    Transition,
    Khoudraji,
    Custom,
}

#[derive(Clone)]
enum Repr {
    One,
    Logistic {
        theta: f64,
    },
    AsymmetricLogistic {
        alpha: f64,
        beta: f64,
        theta: f64,
    },
    Tabulated {
        values: Vec<f64>,
    },
    /// `1 - WK - sW(1-K) + W((1-s)K + s) A(s / (K(1-s) + s))`
    Propagated {
        base: PickandsFunction,
        k: f64,
        w: f64,
    },
    /// `1 - a + (a-b)s + ((1-s)a + sb) B(sb / ((1-s)a + sb))`, with a, b the
    /// ratios α(z')/α(z) and β(z')/β(z).
    Transition {
        base: PickandsFunction,
        a: f64,
        b: f64,
    },
    Khoudraji {
        a1: PickandsFunction,
        a2: PickandsFunction,
        kappa: f64,
        eta: f64,
    },
    Custom {
        label: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

/// A dependence function `A` on [0, 1].
#[derive(Clone)]
pub struct PickandsFunction {
    repr: Arc<Repr>,
}

impl fmt::Debug for PickandsFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.repr {
            Repr::One => write!(f, "A≡1"),
            Repr::Logistic { theta } => write!(f, "Logistic(θ={theta})"),
            Repr::AsymmetricLogistic { alpha, beta, theta } => {
                write!(f, "AsymLogistic(α={alpha}, β={beta}, θ={theta})")
            }
            Repr::Tabulated { values } => write!(f, "Tabulated({} points)", values.len()),
            Repr::Propagated { base, k, w } => write!(f, "Propagated({base:?}, K={k}, W={w})"),
            Repr::Transition { base, a, b } => write!(f, "Transition({base:?}, a={a}, b={b})"),
            Repr::Khoudraji { a1, a2, kappa, eta } => {
                write!(f, "Khoudraji({a1:?}, {a2:?}, κ={kappa}, η={eta})")
            }
            Repr::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

fn check_weight(name: &str, x: f64, open: bool) -> Result<()> {
    let ok = if open {
        x > 0.0 && x < 1.0
    } else {
        x > 0.0 && x <= 1.0
    };
    if ok {
        Ok(())
    } else {
        let interval = if open { "(0, 1)" } else { "(0, 1]" };
        Err(Error::Domain(format!("{name} = {x} outside {interval}")))
    }
}

impl PickandsFunction {
    fn from_repr(repr: Repr) -> Self {
        Self {
            repr: Arc::new(repr),
        }
    }

    /// `A ≡ 1`, the independence copula.
    pub fn independence() -> Self {
        Self::from_repr(Repr::One)
    }

    /// Gumbel (logistic) dependence function `A(t) = (t^θ + (1-t)^θ)^{1/θ}`.
    pub fn gumbel_logistic(theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta >= 1.0) {
            return Err(Error::Domain(format!("logistic θ = {theta} must be ≥ 1")));
        }
        Ok(Self::from_repr(Repr::Logistic { theta }))
    }

    /// Asymmetric logistic dependence function
    /// `B(s) = 1 - α + (α - β)s + (α^θ(1-s)^θ + β^θ s^θ)^{1/θ}`.
    pub fn asymmetric_logistic(alpha: f64, beta: f64, theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta >= 1.0) {
            return Err(Error::Domain(format!("logistic θ = {theta} must be ≥ 1")));
        }
        check_weight("alpha", alpha, false)?;
        check_weight("beta", beta, false)?;
        Ok(Self::from_repr(Repr::AsymmetricLogistic { alpha, beta, theta }))
    }

    /// Piecewise-linear interpolation of values sampled at `i / (n-1)`.
    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Input("tabulated Pickands function needs ≥ 2 values".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("tabulated Pickands values must be finite".into()));
        }
        Ok(Self::from_repr(Repr::Tabulated { values }))
    }

    /// Wraps an arbitrary function. No validity is assumed; run
    /// [`crate::verify::check_pickands`] before relying on it.
    pub fn from_fn(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::from_repr(Repr::Custom {
            label: label.into(),
            f: Arc::new(f),
        })
    }

    pub(crate) fn propagated(base: PickandsFunction, k: f64, w: f64) -> Self {
        Self::from_repr(Repr::Propagated { base, k, w })
    }

    pub(crate) fn transition(base: PickandsFunction, a: f64, b: f64) -> Self {
        Self::from_repr(Repr::Transition { base, a, b })
    }

    /// Khoudraji asymmetrization of two dependence functions: the dependence
    /// function of `C_{A1}(u^{1-κ}, v^{1-η}) · C_{A2}(u^κ, v^η)`.
    pub fn khoudraji(a1: PickandsFunction, a2: PickandsFunction, kappa: f64, eta: f64) -> Result<Self> {
        check_weight("kappa", kappa, true)?;
        check_weight("eta", eta, true)?;
        for a in [&a1, &a2] {
            crate::verify::require_valid_pickands(a)?;
        }
        Ok(Self::from_repr(Repr::Khoudraji { a1, a2, kappa, eta }))
    }

    pub fn kind(&self) -> PickandsKind {
        match &*self.repr {
            Repr::One => PickandsKind::ConstantOne,
            Repr::Logistic { .. } => PickandsKind::GumbelLogistic,
            Repr::AsymmetricLogistic { .. } => PickandsKind::AsymmetricLogistic,
            Repr::Tabulated { .. } => PickandsKind::Tabulated,
            Repr::Propagated { .. } => PickandsKind::Propagated,
            Repr::Transition { .. } => PickandsKind::Transition,
            Repr::Khoudraji { .. } => PickandsKind::Khoudraji,
            Repr::Custom { .. } => PickandsKind::Custom,
        }
    }

    /// Parameters `(α, β, θ)` when the function is a (symmetric or
    /// asymmetric) logistic one.
    pub fn logistic_params(&self) -> Option<(f64, f64, f64)> {
        match &*self.repr {
            Repr::Logistic { theta } => Some((1.0, 1.0, *theta)),
            Repr::AsymmetricLogistic { alpha, beta, theta } => Some((*alpha, *beta, *theta)),
            _ => None,
        }
    }

    /// Evaluates `A(t)`; `t` is clamped to [0, 1].
    pub fn value(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match &*self.repr {
            Repr::One => 1.0,
            Repr::Logistic { theta } => {
                if *theta == 1.0 {
                    return 1.0;
                }
                (t.powf(*theta) + (1.0 - t).powf(*theta)).powf(1.0 / theta)
            }
            Repr::AsymmetricLogistic { alpha, beta, theta } => {
                let s = t;
                1.0 - alpha
                    + (alpha - beta) * s
                    + ((alpha * (1.0 - s)).powf(*theta) + (beta * s).powf(*theta)).powf(1.0 / theta)
            }
            Repr::Tabulated { values } => {
                let n = values.len() - 1;
                let x = t * n as f64;
                let i = (x.floor() as usize).min(n - 1);
                let frac = x - i as f64;
                values[i] + frac * (values[i + 1] - values[i])
            }
            Repr::Propagated { base, k, w } => {
                let s = t;
                let d = k * (1.0 - s) + s;
                1.0 - w * k - s * w * (1.0 - k) + w * d * base.value(s / d)
            }
            Repr::Transition { base, a, b } => {
                let s = t;
                let d = (1.0 - s) * a + s * b;
                1.0 - a + (a - b) * s + d * base.value(s * b / d)
            }
            // Dependence function of C_{A1}(u^{1-κ}, v^{1-η}) · C_{A2}(u^κ, v^η)
            // with s weighting the v coordinate.
            Repr::Khoudraji { a1, a2, kappa, eta } => {
                let s = t;
                let sb = 1.0 - s;
                let d1 = (1.0 - kappa) * sb + (1.0 - eta) * s;
                let d2 = kappa * sb + eta * s;
                let mut out = 0.0;
                if d1 > 0.0 {
                    out += d1 * a1.value((1.0 - eta) * s / d1);
                }
                if d2 > 0.0 {
                    out += d2 * a2.value(eta * s / d2);
                }
                out
            }
            Repr::Custom { f, .. } => f(t),
        }
    }

    /// Values at `resolution` equispaced points of [0, 1], endpoints included.
    pub fn tabulate(&self, resolution: usize) -> Vec<(f64, f64)> {
        let n = resolution.max(2);
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                (t, self.value(t))
            })
            .collect()
    }
}
