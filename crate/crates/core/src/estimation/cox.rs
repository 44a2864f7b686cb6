//! Cox partial-likelihood fitting with Breslow ties, all times events.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoxOptions {
    pub max_iter: usize,
    /// Convergence threshold on the Euclidean norm of the score.
    pub tol: f64,
}

impl Default for CoxOptions {
    fn default() -> Self {
        Self {
            max_iter: 50,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub coefficients: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub log_partial_likelihood: f64,
    pub gradient_norm: f64,
}

impl FitResult {
    /// Coefficients, only when the fit converged.
    pub fn usable_coefficients(&self) -> Option<&[f64]> {
        self.converged.then_some(self.coefficients.as_slice())
    }
}

struct Evaluation {
    loglik: f64,
    score: DVector<f64>,
    information: DMatrix<f64>,
}

/// Risk sets are scanned from the longest time down; tied times share the
/// full risk set.
struct PartialLikelihood {
    order: Vec<usize>,
    times: Vec<f64>,
    design: Vec<DVector<f64>>,
}

impl PartialLikelihood {
    fn new(times: &[f64], covariates: &[Vec<f64>]) -> Self {
        let d = covariates[0].len();
        let n = times.len() as f64;
        let mut center = vec![0.0; d];
        for z in covariates {
            for (c, x) in center.iter_mut().zip(z) {
                *c += x / n;
            }
        }
        let design = covariates
            .iter()
            .map(|z| DVector::from_iterator(d, z.iter().zip(&center).map(|(x, c)| x - c)))
            .collect();
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[b].total_cmp(&times[a]));
        Self {
            order,
            times: times.to_vec(),
            design,
        }
    }

    fn dim(&self) -> usize {
        self.design[0].len()
    }

    fn evaluate(&self, beta: &DVector<f64>) -> Evaluation {
        let d = self.dim();
        let mut s0 = 0.0;
        let mut s1 = DVector::zeros(d);
        let mut s2 = DMatrix::zeros(d, d);
        let mut loglik = 0.0;
        let mut score = DVector::zeros(d);
        let mut information = DMatrix::zeros(d, d);
        let mut i = 0;
        while i < self.order.len() {
            let t = self.times[self.order[i]];
            let mut j = i;
            while j < self.order.len() && self.times[self.order[j]] == t {
                let z = &self.design[self.order[j]];
                let w = beta.dot(z).exp();
                s0 += w;
                s1.axpy(w, z, 1.0);
                s2.ger(w, z, z, 1.0);
                j += 1;
            }
            let mean = &s1 / s0;
            let cov = &s2 / s0 - &mean * mean.transpose();
            for k in i..j {
                let z = &self.design[self.order[k]];
                loglik += beta.dot(z) - s0.ln();
                score += z - &mean;
                information += &cov;
            }
            i = j;
        }
        Evaluation {
            loglik,
            score,
            information,
        }
    }
}

/// Newton-Raphson maximizer of the partial likelihood with step halving.
///
/// Fails with [`Error::Estimation`] on malformed input or a singular
/// information matrix; running out of iterations returns a result flagged
/// as not converged.
pub fn cox_pl_fit(times: &[f64], covariates: &[Vec<f64>], options: CoxOptions) -> Result<FitResult> {
    if times.len() < 2 || times.len() != covariates.len() {
        return Err(Error::Estimation(format!(
            "need at least two times with one covariate vector each, got {} and {}",
            times.len(),
            covariates.len()
        )));
    }
    let d = covariates[0].len();
    if d == 0 || covariates.iter().any(|z| z.len() != d) {
        return Err(Error::Estimation("covariate dimension must be constant and nonzero".into()));
    }
    if times.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::Estimation("event times must be positive and finite".into()));
    }
    if covariates.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Estimation("covariates must be finite".into()));
    }

    let pl = PartialLikelihood::new(times, covariates);
    let mut beta = DVector::zeros(d);
    let mut eval = pl.evaluate(&beta);
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let chol = eval.information.clone().cholesky().ok_or_else(|| {
            Error::Estimation("information matrix is singular; covariates carry no contrast".into())
        })?;
        if eval.score.norm() < options.tol {
            converged = true;
            break;
        }
        if iterations == options.max_iter {
            break;
        }
        iterations += 1;
        let step = chol.solve(&eval.score);
        let mut scale = 1.0;
        let mut candidate = &beta + &step;
        let mut next = pl.evaluate(&candidate);
        // Near the optimum the log-likelihood change drops below rounding.
        let floor = eval.loglik - 1e-12 * (1.0 + eval.loglik.abs());
        while !(next.loglik >= floor) && scale > 1e-10 {
            scale *= 0.5;
            candidate = &beta + &step * scale;
            next = pl.evaluate(&candidate);
        }
        beta = candidate;
        eval = next;
    }
    Ok(FitResult {
        coefficients: beta.iter().copied().collect(),
        converged,
        iterations,
        log_partial_likelihood: eval.loglik,
        gradient_norm: eval.score.norm(),
    })
}
