//! Parameter sweeps of the fractional PID on a fixed plant.
//!
//! Every grid point is certified first and integrated only when stable.
//! Under `m > α + n + 1` the integral is fixed by the plant's unstable
//! poles, so a sweep mostly demonstrates invariance; values can move only
//! through the outer-arc residual when that condition is relaxed.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodeint::{bode_integral, theoretical_value, IntegralReport};
use crate::contour::gamma_r_residual;
use crate::error::{Error, Result};
use crate::funcmodel::{FractionalPID, LoopModel, RationalPlant};
use crate::rootfind::{certify_stability_default, rhp_open_loop_poles, StabilityCertificate, Verdict};

pub use crate::funcmodel::degree_condition;

/// Axes of a sweep. Points are visited in lexicographic order of
/// `(k1, k0, km1, alpha, beta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub k1: Vec<f64>,
    pub k0: Vec<f64>,
    pub km1: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Default for SweepGrid {
    /// Orders on `{0.25, 0.5, …, 1.75}`, gains log-spaced over `[1e−2, 1e2]`.
    fn default() -> Self {
        let orders: Vec<f64> = (1..=7).map(|k| 0.25 * k as f64).collect();
        let gains: Vec<f64> = (0..5).map(|k| 10f64.powi(k - 2)).collect();
        Self {
            k1: gains.clone(),
            k0: gains.clone(),
            km1: gains,
            alpha: orders.clone(),
            beta: orders,
        }
    }
}

impl SweepGrid {
    pub fn len(&self) -> usize {
        self.k1.len() * self.k0.len() * self.km1.len() * self.alpha.len() * self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(&self) -> Result<()> {
        for (name, axis) in [
            ("k1", &self.k1),
            ("k0", &self.k0),
            ("km1", &self.km1),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
        ] {
            if axis.is_empty() {
                return Err(Error::InvalidParameter(format!("sweep axis {name} is empty")));
            }
            if axis.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!("sweep axis {name} has a non-finite value")));
            }
        }
        Ok(())
    }

    fn points(&self) -> Vec<[f64; 5]> {
        let mut out = Vec::with_capacity(self.len());
        for &k1 in &self.k1 {
            for &k0 in &self.k0 {
                for &km1 in &self.km1 {
                    for &a in &self.alpha {
                        for &b in &self.beta {
                            out.push([k1, k0, km1, a, b]);
                        }
                    }
                }
            }
        }
        out
    }
}

/// One evaluated grid point. `report` is present exactly when the
/// certificate says stable and the integral could be computed; otherwise
/// `error` says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub k1: f64,
    pub k0: f64,
    pub km1: f64,
    pub alpha: f64,
    pub beta: f64,
    pub pid: Option<FractionalPID>,
    pub degree_condition: bool,
    pub certificate: Option<StabilityCertificate>,
    pub report: Option<IntegralReport>,
    pub error: Option<String>,
}

impl SweepPoint {
    pub fn is_stable(&self) -> bool {
        self.certificate.as_ref().is_some_and(|c| c.verdict == Verdict::Stable)
    }
}

/// Relative tolerance used for every integral in a sweep.
pub const SWEEP_REL_TOL: f64 = 1e-6;

/// Arc radii for the residual, as multiples of the integration cutoff.
pub const RESIDUAL_RADII: [f64; 3] = [100.0, 1000.0, 10000.0];

fn evaluate(plant: &RationalPlant, [k1, k0, km1, alpha, beta]: [f64; 5]) -> SweepPoint {
    let mut point = SweepPoint {
        k1,
        k0,
        km1,
        alpha,
        beta,
        pid: None,
        degree_condition: false,
        certificate: None,
        report: None,
        error: None,
    };
    let pid = match FractionalPID::new(k1, k0, km1, alpha, beta) {
        Ok(p) => p,
        Err(e) => {
            point.error = Some(e.to_string());
            return point;
        }
    };
    point.pid = Some(pid);
    point.degree_condition = degree_condition(plant, &pid);
    let model = LoopModel::rational(plant.clone(), pid);
    let cert = match certify_stability_default(&model) {
        Ok(c) => c,
        Err(e) => {
            point.error = Some(e.to_string());
            return point;
        }
    };
    let stable = cert.verdict == Verdict::Stable;
    point.certificate = Some(cert);
    if !stable {
        return point;
    }
    match integrate_point(&model, point.degree_condition) {
        Ok(r) => point.report = Some(r),
        Err(e) => point.error = Some(e.to_string()),
    }
    point
}

/// Integral of a stable loop; outside the degree condition the arc
/// residual is measured and folded into the reconciliation.
fn integrate_point(model: &LoopModel, condition: bool) -> Result<IntegralReport> {
    let report = bode_integral(model, SWEEP_REL_TOL)?;
    if condition {
        return Ok(report.with_residual(Complex64::new(0.0, 0.0)));
    }
    let radii = RESIDUAL_RADII.map(|k| k * report.cutoff_omega);
    let res = gamma_r_residual(model, &radii)?;
    Ok(report.with_residual(res.value))
}

/// Evaluates every grid point in parallel. Failures are recorded on the
/// point; only an empty axis aborts.
pub fn sweep(plant: &RationalPlant, grid: &SweepGrid) -> Result<Vec<SweepPoint>> {
    grid.validate()?;
    Ok(grid.points().into_par_iter().map(|p| evaluate(plant, p)).collect())
}

/// `(max − min)/|theoretical|` of the integral over stable points that
/// satisfy the degree condition; `None` with fewer than one such point.
pub fn invariance_spread(plant: &RationalPlant, points: &[SweepPoint]) -> Result<Option<f64>> {
    let theoretical = theoretical_value(&rhp_open_loop_poles(plant)?.poles);
    let values: Vec<f64> = points
        .iter()
        .filter(|p| p.degree_condition)
        .filter_map(|p| p.report.as_ref())
        .map(|r| r.numeric_value)
        .collect();
    if values.is_empty() {
        return Ok(None);
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = if theoretical != 0.0 { theoretical.abs() } else { 1.0 };
    Ok(Some((hi - lo) / scale))
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

/// `k1,k0,km1,alpha,beta,stable,I_numeric,I_theoretical,residual_re,residual_im,reconciliation`;
/// fields without a value are left empty.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out =
        String::from("k1,k0,km1,alpha,beta,stable,I_numeric,I_theoretical,residual_re,residual_im,reconciliation\n");
    for p in points {
        let r = p.report.as_ref();
        let res = r.and_then(|r| r.residual_gamma_r);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            p.k1,
            p.k0,
            p.km1,
            p.alpha,
            p.beta,
            p.is_stable(),
            opt(r.map(|r| r.numeric_value)),
            opt(r.map(|r| r.theoretical_value)),
            opt(res.map(|c| c.re)),
            opt(res.map(|c| c.im)),
            opt(r.map(|r| r.reconciliation)),
        );
    }
    out
}

/// Gains shared by every row of a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gains {
    pub k1: f64,
    pub k0: f64,
    pub km1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub alpha: f64,
    pub beta: f64,
    pub is_baseline: bool,
    pub point: SweepPoint,
    /// Numeric integral below the baseline's by more than the quadrature
    /// error of the two.
    pub below_baseline: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub header: String,
    pub gains: Gains,
    pub theoretical: f64,
    pub baseline_stable: bool,
    pub rows: Vec<ComparisonRow>,
}

const COMPARISON_HEADER: &str = "Under m > alpha + n + 1 the integral equals 4*pi*sum(d_j Re p_j) for every \
stabilizing controller; rows can only differ through the outer-arc residual once that condition fails.";

/// Evaluates the same gains over a list of `(α, β)`; `(1, 1)` is added as
/// the integer baseline when missing.
pub fn compare_integer_vs_fractional(
    plant: &RationalPlant,
    gains: Gains,
    alpha_beta: &[(f64, f64)],
) -> Result<ComparisonReport> {
    if alpha_beta.is_empty() {
        return Err(Error::InvalidParameter("alpha/beta list is empty".into()));
    }
    let mut list = alpha_beta.to_vec();
    if !list.contains(&(1.0, 1.0)) {
        list.insert(0, (1.0, 1.0));
    }
    let points: Vec<SweepPoint> = list
        .par_iter()
        .map(|&(a, b)| evaluate(plant, [gains.k1, gains.k0, gains.km1, a, b]))
        .collect();
    let baseline = points
        .iter()
        .zip(&list)
        .find(|(_, ab)| **ab == (1.0, 1.0))
        .map(|(p, _)| p)
        .expect("baseline inserted above");
    let baseline_value = baseline.report.as_ref().map(|r| (r.numeric_value, r.estimated_abs_error));
    let baseline_stable = baseline.is_stable();
    let rows = list
        .iter()
        .zip(points.iter().cloned())
        .map(|(&(alpha, beta), point)| {
            // differences inside the combined quadrature error are noise
            let below = matches!(
                (point.report.as_ref(), baseline_value),
                (Some(r), Some((b, eb))) if r.numeric_value < b - (r.estimated_abs_error + eb).max(1e-9 * b.abs())
            );
            ComparisonRow {
                alpha,
                beta,
                is_baseline: (alpha, beta) == (1.0, 1.0),
                point,
                below_baseline: below,
            }
        })
        .collect();
    Ok(ComparisonReport {
        header: COMPARISON_HEADER.into(),
        gains,
        theoretical: theoretical_value(&rhp_open_loop_poles(plant)?.poles),
        baseline_stable,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::Polynomial;
    use crate::rootfind::{count_characteristic_zeros, Rectangle};
    use crate::funcmodel::AXIS_TOLERANCE;
    use std::f64::consts::PI;

    fn three_pole() -> RationalPlant {
        // (s − 1)(s + 2)(s + 10)
        RationalPlant::new(Polynomial::from_real(&[1.0]), Polynomial::from_real(&[-20.0, 8.0, 11.0, 1.0])).unwrap()
    }

    fn plant(num: &[f64], den: &[f64]) -> RationalPlant {
        RationalPlant::new(Polynomial::from_real(num), Polynomial::from_real(den)).unwrap()
    }

    fn pid(alpha: f64) -> FractionalPID {
        FractionalPID::new(1.0, 1.0, 0.0, alpha, 0.5).unwrap()
    }

    #[test]
    fn degree_condition_examples() {
        assert!(degree_condition(&plant(&[1.0], &[1.0, 0.0, 0.0, 1.0]), &pid(0.5)));
        assert!(!degree_condition(&plant(&[1.0], &[1.0, 0.0, 1.0]), &pid(1.0)));
        assert!(degree_condition(&plant(&[1.0, 1.0], &[1.0, 0.0, 0.0, 1.0]), &pid(0.99)));
    }

    fn small_grid() -> SweepGrid {
        SweepGrid {
            k1: vec![0.0, 10.0],
            k0: vec![25.0, 50.0, 200.0],
            km1: vec![0.0, 1.0, 50.0],
            alpha: vec![0.5],
            beta: vec![0.5],
        }
    }

    #[test]
    fn stable_points_share_the_theoretical_value() {
        let pts = sweep(&three_pole(), &small_grid()).unwrap();
        assert_eq!(pts.len(), 18);
        let stable: Vec<_> = pts.iter().filter(|p| p.is_stable()).collect();
        assert!(stable.len() >= 8);
        for p in &pts {
            assert_eq!(p.report.is_some(), p.is_stable(), "{p:?}");
            if let Some(r) = &p.report {
                assert!((r.numeric_value - 4.0 * PI).abs() < 1e-3 * 4.0 * PI, "{p:?}");
            }
        }
        let spread = invariance_spread(&three_pole(), &pts).unwrap().unwrap();
        assert!(spread < 1e-2, "{spread}");
        // a large proportional gain with α = β = 0.5 pushes a closed-loop pole right
        let bad = pts.iter().find(|p| p.k1 == 0.0 && p.k0 == 200.0 && p.km1 == 50.0).unwrap();
        assert_eq!(bad.certificate.as_ref().unwrap().verdict, Verdict::Unstable);
        assert!(bad.report.is_none());
    }

    #[test]
    fn sweep_order_is_lexicographic_and_repeatable() {
        let a = sweep(&three_pole(), &small_grid()).unwrap();
        let b = sweep(&three_pole(), &small_grid()).unwrap();
        assert_eq!(sweep_csv(&a), sweep_csv(&b));
        let keys: Vec<_> = a.iter().map(|p| (p.k1, p.k0, p.km1)).collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(keys, sorted);
    }

    #[test]
    fn empty_axis_is_rejected() {
        let mut g = small_grid();
        g.beta.clear();
        assert!(matches!(sweep(&three_pole(), &g), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn invalid_orders_are_recorded_not_fatal() {
        let mut g = small_grid();
        g.alpha = vec![0.5, 2.5];
        let pts = sweep(&three_pole(), &g).unwrap();
        assert_eq!(pts.len(), 36);
        assert!(pts.iter().filter(|p| p.alpha == 2.5).all(|p| p.error.is_some() && p.report.is_none()));
    }

    #[test]
    fn csv_layout() {
        let pts = sweep(&three_pole(), &small_grid()).unwrap();
        let csv = sweep_csv(&pts);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "k1,k0,km1,alpha,beta,stable,I_numeric,I_theoretical,residual_re,residual_im,reconciliation"
        );
        assert_eq!(csv.lines().count(), 19);
        assert!(csv.lines().skip(1).all(|l| l.split(',').count() == 11));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn certified_points_have_no_zeros_on_refinement() {
        let pts = sweep(&three_pole(), &small_grid()).unwrap();
        for p in pts.iter().filter(|p| p.is_stable()).take(10) {
            let model = LoopModel::rational(three_pole(), p.pid.unwrap());
            let region = p.certificate.as_ref().unwrap().region;
            // split the certified rectangle into a 3 × 3 mesh and count again
            let dx = (region.re_max - AXIS_TOLERANCE) / 3.0;
            let dy = (region.im_max - region.im_min) / 3.0;
            for i in 0..3 {
                for j in 0..3 {
                    let x0 = AXIS_TOLERANCE + dx * i as f64;
                    let y0 = region.im_min + dy * j as f64 + 1e-7;
                    let rect = Rectangle::new(x0, x0 + dx, y0, y0 + dy).unwrap();
                    assert_eq!(count_characteristic_zeros(&model, &rect).unwrap(), 0);
                }
            }
        }
    }

    #[test]
    fn comparison_inserts_baseline() {
        let g = Gains { k1: 10.0, k0: 50.0, km1: 1.0 };
        let r = compare_integer_vs_fractional(&three_pole(), g, &[(0.5, 0.5), (0.75, 0.5)]).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert!(r.rows[0].is_baseline);
        assert!(r.baseline_stable);
        for row in &r.rows {
            let rep = row.point.report.as_ref().unwrap();
            assert!((rep.numeric_value - r.theoretical).abs() < 1e-3 * r.theoretical);
        }
        assert!(compare_integer_vs_fractional(&three_pole(), g, &[]).is_err());
    }

    #[test]
    fn residual_moves_the_integral_only_without_the_degree_condition() {
        // P = 1/(s(s − 1)) with α = 1: L ~ k1/s, so the arc limit is nonzero
        let p = plant(&[1.0], &[0.0, -1.0, 1.0]);
        let g = Gains { k1: 4.0, k0: 8.0, km1: 0.0 };
        let r = compare_integer_vs_fractional(&p, g, &[(1.0, 1.0)]).unwrap();
        let row = &r.rows[0];
        assert!(!row.point.degree_condition);
        let rep = row.point.report.as_ref().expect("stable");
        let res = rep.residual_gamma_r.unwrap();
        assert!(res.norm() > 1.0);
        assert!(rep.reconciliation.abs() < 1e-3 * rep.theoretical_value.abs().max(1.0), "{rep:?}");
        assert!((rep.numeric_value - rep.theoretical_value).abs() > 1.0);
    }
}
