//! Closed forms written independently of `bivcox`, used as oracles by the
//! acceptance suite.

pub fn clayton(theta: f64, u: f64, v: f64) -> f64 {
    if u == 0.0 || v == 0.0 {
        return 0.0;
    }
    (u.powf(-theta) + v.powf(-theta) - 1.0).powf(-1.0 / theta)
}

pub fn gumbel(theta: f64, u: f64, v: f64) -> f64 {
    if u == 0.0 || v == 0.0 {
        return 0.0;
    }
    let s = (-u.ln()).powf(theta) + (-v.ln()).powf(theta);
    (-s.powf(1.0 / theta)).exp()
}

pub fn gumbel_barnett(theta: f64, u: f64, v: f64) -> f64 {
    if u == 0.0 || v == 0.0 {
        return 0.0;
    }
    u * v * (-theta * u.ln() * v.ln()).exp()
}

/// Baseline copula carried to link values `(Φ, Ψ)`:
/// `u^{(Φ-Ψ)/Φ} C₀(u^{1/Φ}, v^{1/Ψ})^Ψ` for `Φ ≥ Ψ`, mirrored otherwise.
pub fn propagated(c0: impl Fn(f64, f64) -> f64, phi: f64, psi: f64, u: f64, v: f64) -> f64 {
    let inner = c0(u.powf(1.0 / phi), v.powf(1.0 / psi));
    if phi >= psi {
        u.powf((phi - psi) / phi) * inner.powf(psi)
    } else {
        v.powf((psi - phi) / psi) * inner.powf(phi)
    }
}

/// Gumbel logistic dependence function; `s` weights the second coordinate.
pub fn gumbel_pickands(theta: f64, s: f64) -> f64 {
    ((1.0 - s).powf(theta) + s.powf(theta)).powf(1.0 / theta)
}

/// `1 - α + (α - β)s + ((α(1-s))^θ + (βs)^θ)^{1/θ}`.
pub fn asymmetric_logistic(alpha: f64, beta: f64, theta: f64, s: f64) -> f64 {
    1.0 - alpha + (alpha - beta) * s + ((alpha * (1.0 - s)).powf(theta) + (beta * s).powf(theta)).powf(1.0 / theta)
}

/// Dependence function of an extreme-value copula with dependence `a`
/// after the margins are raised to `(Φ, Ψ)`, with `K = Ψ/Φ` and
/// `W = min(1/K, 1)`.
pub fn propagated_pickands(a: impl Fn(f64) -> f64, phi: f64, psi: f64, s: f64) -> f64 {
    let k = psi / phi;
    let w = (1.0 / k).min(1.0);
    let d = k * (1.0 - s) + s;
    1.0 - w * k - s * w * (1.0 - k) + w * d * a(s / d)
}

/// `exp(log(uv) A(log v / log uv))`.
pub fn extreme_value(a: impl Fn(f64) -> f64, u: f64, v: f64) -> f64 {
    let l = (u * v).ln();
    (l * a(v.ln() / l)).exp()
}

/// Fraction of pairs in `[0,u]×[0,v]`.
pub fn empirical_copula(pairs: &[(f64, f64)], u: f64, v: f64) -> f64 {
    pairs.iter().filter(|&&(a, b)| a <= u && b <= v).count() as f64 / pairs.len() as f64
}
