//! Grid checks of structural properties: copula axioms, TP₂, PQD,
//! min-infinite divisibility and Pickands validity.
//!
//! Every check is a necessary-condition certificate on a finite grid. A
//! passing report means no violation was found at the given resolution.

use serde::Serialize;

use crate::copula::{BivariateCdf, PickandsFunction, PICKANDS_CHECK_RESOLUTION};
use crate::error::{Error, Result};

/// Slack allowed on nonnegativity checks.
pub const VIOLATION_TOLERANCE: f64 = 1e-10;

/// Slack on Pickands endpoint values.
pub const PICKANDS_ENDPOINT_TOLERANCE: f64 = 1e-12;

/// Slack on second differences `A(t-h) - 2A(t) + A(t+h)` of Pickands
/// functions. Dividing by `h²` would scale rounding noise by `1/h²`.
pub const PICKANDS_CONVEXITY_TOLERANCE: f64 = 1e-9;

/// Step for the differential TP₂ criterion.
pub const TP2_DIFFERENTIAL_STEP: f64 = 1e-4;

/// Interior evaluation grid: `resolution` points per axis spanning
/// `[margin, 1 - margin]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    resolution: usize,
    margin: f64,
}

impl GridSpec {
    pub fn new(resolution: usize, margin: f64) -> Result<Self> {
        if resolution < 3 {
            return Err(Error::Input(format!("grid resolution {resolution} < 3")));
        }
        if !(margin > 0.0 && margin < 0.5) {
            return Err(Error::Input(format!("grid margin {margin} outside (0, 0.5)")));
        }
        Ok(Self { resolution, margin })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn points(&self) -> Vec<f64> {
        crate::numeric::linspace(self.margin, 1.0 - self.margin, self.resolution)
    }
}

impl Default for GridSpec {
    /// 64 points per axis with margin 1e-3.
    fn default() -> Self {
        Self {
            resolution: 64,
            margin: 1e-3,
        }
    }
}

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub property: String,
    pub passed: bool,
    /// Largest violation magnitude found (0 when none).
    pub worst_violation: f64,
    /// Points locating the worst violation; present whenever `passed` is false.
    pub witness: Vec<(f64, f64)>,
    pub resolution: usize,
}

impl VerificationReport {
    fn new(property: impl Into<String>, resolution: usize) -> Self {
        Self {
            property: property.into(),
            passed: true,
            worst_violation: 0.0,
            witness: Vec::new(),
            resolution,
        }
    }

    /// Records a signed slack; negative values beyond tolerance are violations.
    fn observe(&mut self, slack: f64, tolerance: f64, witness: impl FnOnce() -> Vec<(f64, f64)>) {
        if slack.is_nan() {
            if self.worst_violation.is_finite() {
                self.passed = false;
                self.worst_violation = f64::INFINITY;
                self.witness = witness();
            }
            return;
        }
        if slack < -tolerance && -slack > self.worst_violation {
            self.passed = false;
            self.worst_violation = -slack;
            self.witness = witness();
        }
    }

    fn merge(mut self, other: VerificationReport) -> Self {
        if !other.passed && other.worst_violation > self.worst_violation {
            self.worst_violation = other.worst_violation;
            self.witness = other.witness;
        }
        self.passed &= other.passed;
        self
    }

    /// One-line summary; never claims more than the grid shows.
    pub fn summary(&self) -> String {
        if self.passed {
            format!(
                "{}: no violation found at resolution {}",
                self.property, self.resolution
            )
        } else {
            format!(
                "{}: violation {:.3e} at {:?}",
                self.property, self.worst_violation, self.witness
            )
        }
    }
}

fn with_edges(points: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len() + 2);
    out.push(0.0);
    out.extend_from_slice(points);
    out.push(1.0);
    out
}

fn tabulate<C: BivariateCdf + ?Sized>(c: &C, xs: &[f64], f: impl Fn(f64) -> f64) -> Vec<Vec<f64>> {
    xs.iter()
        .map(|&u| xs.iter().map(|&v| f(c.eval(u, v))).collect())
        .collect()
}

fn rectangle_scan(
    report: &mut VerificationReport,
    xs: &[f64],
    table: &[Vec<f64>],
) {
    for i in 0..xs.len() - 1 {
        for j in 0..xs.len() - 1 {
            let vol = table[i + 1][j + 1] - table[i][j + 1] - table[i + 1][j] + table[i][j];
            report.observe(vol, VIOLATION_TOLERANCE, || {
                vec![(xs[i], xs[j]), (xs[i + 1], xs[j + 1])]
            });
        }
    }
}

/// Uniform margins, groundedness, range and the rectangle inequality on every
/// cell of the grid extended by the boundary lines 0 and 1.
pub fn check_copula_axioms<C: BivariateCdf + ?Sized>(c: &C, grid: &GridSpec) -> VerificationReport {
    let xs = with_edges(&grid.points());
    let mut report = VerificationReport::new("copula-axioms", grid.resolution());
    for &t in &xs {
        report.observe(-(c.eval(t, 1.0) - t).abs(), VIOLATION_TOLERANCE, || vec![(t, 1.0)]);
        report.observe(-(c.eval(1.0, t) - t).abs(), VIOLATION_TOLERANCE, || vec![(1.0, t)]);
        report.observe(-c.eval(t, 0.0).abs(), VIOLATION_TOLERANCE, || vec![(t, 0.0)]);
        report.observe(-c.eval(0.0, t).abs(), VIOLATION_TOLERANCE, || vec![(0.0, t)]);
    }
    let table = tabulate(c, &xs, |x| x);
    for (i, row) in table.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            let slack = x.min(1.0 - x);
            report.observe(slack, VIOLATION_TOLERANCE, || vec![(xs[i], xs[j])]);
        }
    }
    rectangle_scan(&mut report, &xs, &table);
    report
}

/// All 2×2 determinants `C(x1,y1)C(x2,y2) - C(x1,y2)C(x2,y1)` over grid
/// points `x1 < x2`, `y1 < y2`.
pub fn check_tp2<C: BivariateCdf + ?Sized>(c: &C, grid: &GridSpec) -> VerificationReport {
    let xs = grid.points();
    let table = tabulate(c, &xs, |x| x);
    let n = xs.len();
    let mut report = VerificationReport::new("tp2", grid.resolution());
    for i1 in 0..n {
        for i2 in i1 + 1..n {
            for j1 in 0..n {
                for j2 in j1 + 1..n {
                    let det = table[i1][j1] * table[i2][j2] - table[i1][j2] * table[i2][j1];
                    report.observe(det, VIOLATION_TOLERANCE, || {
                        vec![(xs[i1], xs[j1]), (xs[i2], xs[j2])]
                    });
                }
            }
        }
    }
    report
}

/// Differential TP₂ criterion `C_u C_v ≤ C_uv C` by central differences at
/// step 1e-4. Secondary to [`check_tp2`]; needs a smooth copula.
pub fn check_tp2_differential<C: BivariateCdf + ?Sized>(c: &C, grid: &GridSpec) -> VerificationReport {
    let h = TP2_DIFFERENTIAL_STEP.min(grid.margin() / 2.0).max(1e-7);
    let mut report = VerificationReport::new("tp2-differential", grid.resolution());
    let xs = grid.points();
    for &u in &xs {
        for &v in &xs {
            let f = |a: f64, b: f64| c.eval(a, b);
            let cu = (f(u + h, v) - f(u - h, v)) / (2.0 * h);
            let cv = (f(u, v + h) - f(u, v - h)) / (2.0 * h);
            let cuv = (f(u + h, v + h) - f(u + h, v - h) - f(u - h, v + h) + f(u - h, v - h))
                / (4.0 * h * h);
            let slack = cuv * f(u, v) - cu * cv;
            // central differences carry O(h²) truncation error
            let tol = 1e-6 * (cu * cv).abs().max(1e-8);
            report.observe(slack, tol, || vec![(u, v)]);
        }
    }
    report
}

/// `C(u,v) ≥ uv` at every grid point.
pub fn check_pqd<C: BivariateCdf + ?Sized>(c: &C, grid: &GridSpec) -> VerificationReport {
    let xs = grid.points();
    let mut report = VerificationReport::new("pqd", grid.resolution());
    for &u in &xs {
        for &v in &xs {
            report.observe(c.eval(u, v) - u * v, VIOLATION_TOLERANCE, || vec![(u, v)]);
        }
    }
    report
}

/// For each γ, the rectangle inequality of `C(u,v)^γ` on the grid extended by
/// the boundary lines.
pub fn check_min_id<C: BivariateCdf + ?Sized>(
    c: &C,
    gammas: &[f64],
    grid: &GridSpec,
) -> Result<VerificationReport> {
    if gammas.is_empty() {
        return Err(Error::Input("min-id check needs at least one γ".into()));
    }
    if let Some(g) = gammas.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(Error::Input(format!("γ = {g} must be positive")));
    }
    let xs = with_edges(&grid.points());
    let mut report = VerificationReport::new("min-id", grid.resolution());
    for &gamma in gammas {
        let mut sub = VerificationReport::new(format!("min-id γ={gamma}"), grid.resolution());
        let table = tabulate(c, &xs, |x| x.max(0.0).powf(gamma));
        rectangle_scan(&mut sub, &xs, &table);
        report = report.merge(sub);
    }
    Ok(report)
}

/// Endpoints `A(0) = A(1) = 1`, bounds `max(t, 1-t) ≤ A(t) ≤ 1` and
/// convexity via second differences on `resolution` points.
pub fn check_pickands(a: &PickandsFunction, resolution: usize) -> Result<VerificationReport> {
    if resolution < 3 {
        return Err(Error::Input(format!("Pickands resolution {resolution} < 3")));
    }
    let mut report = VerificationReport::new("pickands", resolution);
    let table = a.tabulate(resolution);
    for &t in &[0.0, 1.0] {
        let val = a.value(t);
        report.observe(-(val - 1.0).abs(), PICKANDS_ENDPOINT_TOLERANCE, || vec![(t, val)]);
    }
    for &(t, val) in &table {
        report.observe(1.0 - val, VIOLATION_TOLERANCE, || vec![(t, val)]);
        report.observe(val - t.max(1.0 - t), VIOLATION_TOLERANCE, || vec![(t, val)]);
    }
    for w in table.windows(3) {
        let dd = w[0].1 - 2.0 * w[1].1 + w[2].1;
        report.observe(dd, PICKANDS_CONVEXITY_TOLERANCE, || vec![(w[1].0, w[1].1)]);
    }
    Ok(report)
}

pub(crate) fn require_valid_pickands(a: &PickandsFunction) -> Result<()> {
    let report = check_pickands(a, PICKANDS_CHECK_RESOLUTION)?;
    if report.passed {
        Ok(())
    } else {
        Err(Error::Validity(format!(
            "{a:?} is not a dependence function: {}",
            report.summary()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::Copula;

    fn coarse() -> GridSpec {
        GridSpec::new(24, 1e-3).unwrap()
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(2, 0.1).is_err());
        assert!(GridSpec::new(10, 0.0).is_err());
        assert!(GridSpec::new(10, 0.5).is_err());
        let g = GridSpec::default();
        assert_eq!(g.points().len(), 64);
    }

    #[test]
    fn product_passes_everything_with_zero_violation() {
        let c = Copula::independence();
        let g = GridSpec::default();
        for r in [check_copula_axioms(&c, &g), check_tp2(&c, &g), check_pqd(&c, &g)] {
            assert!(r.passed, "{}", r.summary());
            assert_eq!(r.worst_violation, 0.0);
            assert!(r.witness.is_empty());
        }
        assert!(check_min_id(&c, &[0.3, 5.0], &coarse()).unwrap().passed);
    }

    #[test]
    fn non_copula_fails_with_witness() {
        let f = |u: f64, v: f64| u + v - 1.0;
        let r = check_copula_axioms(&f, &coarse());
        assert!(!r.passed);
        assert!(!r.witness.is_empty());
        // clipped to [0,1] it is the lower Fréchet bound, which is a copula
        let w = |u: f64, v: f64| (u + v - 1.0).clamp(0.0, 1.0);
        assert!(check_copula_axioms(&w, &coarse()).passed);
    }

    #[test]
    fn countermonotone_is_not_pqd() {
        let r = check_pqd(&Copula::countermonotone(), &coarse());
        assert!(!r.passed);
        assert_eq!(r.witness.len(), 1);
    }

    #[test]
    fn gumbel_barnett_not_tp2() {
        let c = Copula::gumbel_barnett(0.5).unwrap();
        let r = check_tp2(&c, &GridSpec::default());
        assert!(!r.passed);
        assert_eq!(r.witness.len(), 2);
        let d = check_tp2_differential(&c, &coarse());
        assert!(!d.passed);
        let m = check_min_id(&c, &[0.1], &coarse()).unwrap();
        assert!(!m.passed);
    }

    #[test]
    fn pickands_reference_functions() {
        let one = PickandsFunction::independence();
        assert!(check_pickands(&one, 101).unwrap().passed);
        let upper = PickandsFunction::from_fn("max(t,1-t)", |t| t.max(1.0 - t));
        assert!(check_pickands(&upper, 101).unwrap().passed);
        let low = PickandsFunction::from_fn("0.4", |_| 0.4);
        let r = check_pickands(&low, 101).unwrap();
        assert!(!r.passed);
        assert!(!r.witness.is_empty());
        let dip = PickandsFunction::from_fn("dip", |t| {
            if (0.3..=0.7).contains(&t) {
                0.8
            } else {
                1.0
            }
        });
        assert!(!check_pickands(&dip, 101).unwrap().passed);
        assert!(check_pickands(&one, 2).is_err());
    }

    #[test]
    fn min_id_rejects_bad_gammas() {
        let c = Copula::independence();
        assert!(check_min_id(&c, &[], &coarse()).is_err());
        assert!(check_min_id(&c, &[-1.0], &coarse()).is_err());
    }
}
