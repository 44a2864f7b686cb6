//! Closed forms and brute-force estimators written independently of the
//! library, used as oracles.

#![allow(dead_code)]

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

pub fn amh(theta: f64, u: f64, v: f64) -> f64 {
    u * v / (1.0 - theta * (1.0 - u) * (1.0 - v))
}

pub fn gumbel_barnett(theta: f64, u: f64, v: f64) -> f64 {
    if u == 0.0 || v == 0.0 {
        return 0.0;
    }
    u * v * (-theta * u.ln() * v.ln()).exp()
}

/// `u^{(Φ-Ψ)/Φ} C₀(u^{1/Φ}, v^{1/Ψ})^Ψ` for `Φ ≥ Ψ`, mirrored otherwise.
pub fn propagated(c0: impl Fn(f64, f64) -> f64, phi: f64, psi: f64, u: f64, v: f64) -> f64 {
    if phi >= psi {
        u.powf((phi - psi) / phi) * c0(u.powf(1.0 / phi), v.powf(1.0 / psi)).powf(psi)
    } else {
        v.powf((psi - phi) / psi) * c0(u.powf(1.0 / phi), v.powf(1.0 / psi)).powf(phi)
    }
}

/// `1 - α + (α-β)s + (α^θ(1-s)^θ + β^θ s^θ)^{1/θ}`.
pub fn asymmetric_logistic(alpha: f64, beta: f64, theta: f64, s: f64) -> f64 {
    1.0 - alpha + (alpha - beta) * s + ((alpha * (1.0 - s)).powf(theta) + (beta * s).powf(theta)).powf(1.0 / theta)
}

/// `exp(log(uv) A(log v / log uv))`.
pub fn evc(a: impl Fn(f64) -> f64, u: f64, v: f64) -> f64 {
    let l = (u * v).ln();
    (l * a(v.ln() / l)).exp()
}

/// O(n²) Kendall's tau with ties counted as neither.
pub fn kendall_brute(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len();
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let d = (pairs[i].0 - pairs[j].0) * (pairs[i].1 - pairs[j].1);
            if d > 0.0 {
                s += 1;
            } else if d < 0.0 {
                s -= 1;
            }
        }
    }
    s as f64 / (n * (n - 1) / 2) as f64
}

/// Fraction of pairs in `[0,u]×[0,v]`.
pub fn empirical_copula(pairs: &[(f64, f64)], u: f64, v: f64) -> f64 {
    pairs.iter().filter(|&&(a, b)| a <= u && b <= v).count() as f64 / pairs.len() as f64
}

/// Largest gap between the empirical and the reference copula on the
/// points `i/10`, `i = 1..9`, and the mean absolute gap.
pub fn empirical_gap(pairs: &[(f64, f64)], c: impl Fn(f64, f64) -> f64) -> (f64, f64) {
    let mut max = 0.0f64;
    let mut sum = 0.0;
    let mut count = 0;
    for i in 1..10 {
        for j in 1..10 {
            let (u, v) = (i as f64 / 10.0, j as f64 / 10.0);
            let gap = (empirical_copula(pairs, u, v) - c(u, v)).abs();
            max = max.max(gap);
            sum += gap;
            count += 1;
        }
    }
    (max, sum / count as f64)
}

/// Kolmogorov-Smirnov distance of a sample from the uniform law.
pub fn ks_uniform(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max)
}

/// Spearman's rho by the midpoint rule on an `n × n` grid.
pub fn spearman_riemann(c: impl Fn(f64, f64) -> f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        let u = (i as f64 + 0.5) * h;
        let mut row = 0.0;
        for j in 0..n {
            row += c(u, (j as f64 + 0.5) * h);
        }
        total += row;
    }
    12.0 * total * h * h - 3.0
}
