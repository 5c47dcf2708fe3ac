//! The Bode integral `I(S) = ∫ ln|S(iω)|² dω` along the whole imaginary
//! axis, and its theoretical value `4π Σ d_j Re p_j`.
//!
//! The finite part `[−Ω, Ω]` goes through adaptive Gauss–Kronrod panels
//! split at the pole moduli and imaginary parts. The two tails are mapped
//! onto `(0, 1]` with `ω = Ω/u` and integrated by tanh-sinh; when the loop
//! gain has a usable leading term `c·s^(−q)` that term is integrated in
//! closed form and only the remainder is left to the quadrature.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcmodel::{log_abs_sensitivity, principal_power, LoopModel, PoleRecord};
use crate::quad::{integrate, tanh_sinh, QuadOptions};
use crate::rootfind::{polynomial_roots, rhp_open_loop_poles};

/// Below this `|S|` the integrand is reported as `−∞`.
pub const MODULUS_FLOOR: f64 = 1e-300;

/// Cutoff beyond which the finite panels stop.
pub const OMEGA_CAP: f64 = 1e9;

/// Numeric and theoretical values of the Bode integral for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralReport {
    /// Quadrature over `[−Ω, Ω]` plus `tail_correction`.
    pub numeric_value: f64,
    pub theoretical_value: f64,
    /// Contribution of `|ω| > Ω`.
    pub tail_correction: f64,
    pub cutoff_omega: f64,
    pub estimated_abs_error: f64,
    /// Limit of the outer-arc integral, when a contour run supplied it.
    pub residual_gamma_r: Option<Complex64>,
    /// `numeric − (theoretical + Re(2i·residual))`.
    pub reconciliation: f64,
    pub converged: bool,
    pub poles: Vec<PoleRecord>,
    pub notes: Vec<String>,
}

impl IntegralReport {
    /// Inserts the arc residual and recomputes the reconciliation.
    pub fn with_residual(mut self, residual: Complex64) -> Self {
        self.residual_gamma_r = Some(residual);
        self.reconciliation = self.numeric_value - self.predicted_value();
        self
    }

    /// `theoretical + Re(2i·residual)`, the value the contour argument
    /// predicts for the axis integral.
    pub fn predicted_value(&self) -> f64 {
        self.theoretical_value + self.residual_gamma_r.map_or(0.0, residual_term)
    }
}

/// `Re(2i·r) = −2 Im r`.
pub fn residual_term(r: Complex64) -> f64 {
    (Complex64::new(0.0, 2.0) * r).re
}

#[derive(Debug, Clone)]
pub struct BodeOptions {
    pub rel_tol: f64,
    /// Overrides the automatic cutoff.
    pub cutoff: Option<f64>,
    pub max_intervals: usize,
    /// Frequencies to split panels at besides the pole data.
    pub extra_breakpoints: Vec<f64>,
}

impl Default for BodeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            cutoff: None,
            max_intervals: 20_000,
            extra_breakpoints: Vec::new(),
        }
    }
}

/// `ln|S(iω)|²`; `−∞` where `S` vanishes on the axis.
pub fn bode_integrand(model: &LoopModel, omega: f64) -> Result<f64> {
    match log_abs_sensitivity(model, Complex64::new(0.0, omega)) {
        Ok(v) if v < MODULUS_FLOOR.ln() => Ok(f64::NEG_INFINITY),
        Ok(v) => Ok(2.0 * v),
        Err(Error::BranchPoint { .. }) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

/// `4π Σ d_j Re p_j`.
pub fn theoretical_value(poles: &[PoleRecord]) -> f64 {
    4.0 * PI * poles.iter().map(|p| p.order * p.location.re).sum::<f64>()
}

/// Leading far-field term of the loop gain, `L(s) ≈ c·s^(−q)`.
pub fn leading_loop_term(model: &LoopModel) -> Option<(Complex64, f64)> {
    let LoopModel::RationalFractal { plant, pid } = model else { return None };
    if plant.num().is_zero() {
        return None;
    }
    let ratio = plant.num().leading() / plant.den().leading();
    let base = plant.m() as f64 - plant.n() as f64;
    [(pid.k1, base - pid.alpha), (pid.k0, base), (pid.km1, base + pid.beta)]
        .into_iter()
        .find(|(k, _)| *k != 0.0)
        .map(|(k, q)| (ratio * k, q))
}

/// `−2 Re(c·(iω)^(−q))`, the leading behaviour of the integrand.
fn leading_integrand(c: Complex64, q: f64, omega: f64) -> f64 {
    let p = principal_power(Complex64::new(0.0, omega), -q).unwrap_or_default();
    -2.0 * (c * p).re
}

/// Closed-form integral of the leading term over `|ω| ≥ ω0`, and the bound
/// `2|c|·ω0^(1−q)/(q−1)` on what the leading term leaves out.
pub fn tail_estimate(model: &LoopModel, omega0: f64) -> Result<(f64, f64)> {
    if !(omega0 > 0.0) {
        return Err(Error::InvalidParameter(format!("tail start {omega0} must be positive")));
    }
    if let LoopModel::Synthetic(_) = model {
        return Err(Error::InvalidParameter("tail estimate needs a rational loop".into()));
    }
    let Some((c, q)) = leading_loop_term(model) else {
        return Ok((0.0, 0.0));
    };
    if q <= 1.0 {
        return Err(Error::TailDivergence { q });
    }
    let (correction, bound) = tail_terms(c, q, omega0);
    Ok((correction, bound))
}

fn tail_terms(c: Complex64, q: f64, omega0: f64) -> (f64, f64) {
    let scale = omega0.powf(1.0 - q) / (q - 1.0);
    let correction = -4.0 * (PI * q / 2.0).cos() * c.re * scale;
    (correction, 2.0 * c.norm() * scale)
}

/// Known right-half-plane zeros of `S`, with a note for marginal roots.
fn model_poles(model: &LoopModel, notes: &mut Vec<String>) -> Result<Vec<PoleRecord>> {
    match model {
        LoopModel::RationalFractal { plant, .. } => {
            let r = rhp_open_loop_poles(plant)?;
            for m in &r.marginal {
                notes.push(format!("marginal open-loop pole at {m} left out of the theoretical sum"));
            }
            Ok(r.poles)
        }
        LoopModel::Synthetic(syn) => Ok(syn.factors().to_vec()),
    }
}

/// Frequency scale of the model: pole and zero moduli, and the crossover
/// radii of the far-field loop-gain terms.
fn frequency_scale(model: &LoopModel, poles: &[PoleRecord]) -> Result<f64> {
    let mut scale: f64 = 1.0;
    for p in poles {
        scale = scale.max(p.location.norm());
    }
    match model {
        LoopModel::RationalFractal { plant, pid } => {
            for poly in [plant.den(), plant.num()] {
                if poly.degree().unwrap_or(0) >= 1 {
                    for (r, _) in polynomial_roots(poly, 1e-10)? {
                        scale = scale.max(r.norm());
                    }
                }
            }
            if !plant.num().is_zero() {
                let ratio = (plant.num().leading() / plant.den().leading()).norm();
                let base = plant.m() as f64 - plant.n() as f64;
                for (k, q) in [(pid.k1, base - pid.alpha), (pid.k0, base), (pid.km1, base + pid.beta)] {
                    if k != 0.0 && q > 0.0 {
                        scale = scale.max((ratio * k.abs()).powf(1.0 / q));
                    }
                }
            }
        }
        LoopModel::Synthetic(syn) => {
            for z in syn.outer().zeros.iter().chain(&syn.outer().poles) {
                scale = scale.max(z.norm());
            }
        }
    }
    Ok(scale)
}

/// Sorted breakpoints in `[−Ω, Ω]`, always including `0` and `±Ω`.
fn breakpoints(poles: &[PoleRecord], extra: &[f64], cutoff: f64) -> Vec<f64> {
    let mut pts = vec![-cutoff, 0.0, cutoff];
    pts.extend(extra.iter().filter(|x| x.is_finite()));
    for p in poles {
        let r = p.location.norm();
        pts.extend([r, -r, p.location.im]);
    }
    pts.retain(|x| x.abs() <= cutoff);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * cutoff);
    pts
}

/// `bode_integral_with` at the given relative tolerance.
pub fn bode_integral(model: &LoopModel, rel_tol: f64) -> Result<IntegralReport> {
    bode_integral_with(model, BodeOptions { rel_tol, ..Default::default() })
}

pub fn bode_integral_with(model: &LoopModel, opts: BodeOptions) -> Result<IntegralReport> {
    if !(opts.rel_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("rel_tol {} must be positive", opts.rel_tol)));
    }
    let mut notes = Vec::new();
    let poles = model_poles(model, &mut notes)?;
    let theoretical = theoretical_value(&poles);
    let cutoff = match opts.cutoff {
        Some(c) if c > 0.0 => c,
        Some(c) => return Err(Error::InvalidParameter(format!("cutoff {c} must be positive"))),
        None => (10.0 * frequency_scale(model, &poles)?).min(OMEGA_CAP),
    };
    let f = |w: f64| bode_integrand(model, w);

    // rough magnitude of ∫|f| so that a vanishing integral still gets a
    // meaningful absolute tolerance
    let mut magnitude = 0.0;
    let samples = 400;
    for k in 0..samples {
        let t = (k as f64 + 0.5) / samples as f64;
        for w in [cutoff * t, -cutoff * t] {
            let v = f(w)?;
            if v.is_finite() {
                magnitude += v.abs() * cutoff / samples as f64;
            }
        }
    }
    let abs_tol = (1e-2 * opts.rel_tol * magnitude).max(1e-14);

    let bps = breakpoints(&poles, &opts.extra_breakpoints, cutoff);
    let quad_opts = QuadOptions {
        abs_tol,
        rel_tol: 1e-2 * opts.rel_tol,
        max_intervals: opts.max_intervals,
    };

    // integral action makes ln|S| ~ β ln|ω| at the origin; the two panels
    // touching 0 go through tanh-sinh instead
    let mut body = 0.0;
    let mut err = 0.0;
    let mut converged = true;
    let singular_origin = model.vanishes_at_origin();
    let inner = if singular_origin {
        let i = bps.iter().position(|&x| x == 0.0).expect("0 is a breakpoint");
        let left = bps[i - 1];
        let right = bps[i + 1];
        for (a, b) in [(left, 0.0), (0.0, right)] {
            let r = tanh_sinh(|x, _, _| f(x), a, b, abs_tol)?;
            body += r.value;
            err += r.abs_error;
            converged &= r.converged;
        }
        let mut rest = bps.clone();
        rest.retain(|&x| x != 0.0);
        rest
    } else {
        bps.clone()
    };
    // split the remaining breakpoints at the excised origin gap
    let groups: Vec<Vec<f64>> = if singular_origin {
        let neg: Vec<f64> = inner.iter().copied().filter(|&x| x < 0.0).collect();
        let pos: Vec<f64> = inner.iter().copied().filter(|&x| x > 0.0).collect();
        vec![neg, pos]
    } else {
        vec![inner]
    };
    for g in groups.iter().filter(|g| g.len() >= 2) {
        let r = integrate(f, g, quad_opts)?;
        body += r.value;
        err += r.abs_error;
        converged &= r.converged;
    }
    if !converged {
        notes.push("finite-range quadrature hit its interval budget".into());
    }

    let (tail, tail_err, tail_ok) = integrate_tails(model, cutoff, abs_tol, &mut notes)?;
    let numeric = body + tail;
    Ok(IntegralReport {
        numeric_value: numeric,
        theoretical_value: theoretical,
        tail_correction: tail,
        cutoff_omega: cutoff,
        estimated_abs_error: err + tail_err,
        residual_gamma_r: None,
        reconciliation: numeric - theoretical,
        converged: converged && tail_ok,
        poles,
        notes,
    })
}

/// `∫_{|ω| > Ω} ln|S(iω)|² dω` as `(value, error, trustworthy)`.
fn integrate_tails(model: &LoopModel, cutoff: f64, tol: f64, notes: &mut Vec<String>) -> Result<(f64, f64, bool)> {
    let lead = leading_loop_term(model).filter(|&(_, q)| q > 1.0);
    if lead.is_none() && !tail_decays(model, cutoff)? {
        notes.push(format!(
            "integrand does not decay faster than 1/ω beyond Ω = {cutoff:e}; tail left out"
        ));
        return Ok((0.0, f64::INFINITY, false));
    }
    let (closed, _) = match lead {
        Some((c, q)) => tail_terms(c, q, cutoff),
        None => (0.0, 0.0),
    };
    let mut total = closed;
    let mut err = 0.0;
    let mut ok = true;
    // both half-lines together: odd 1/ω parts cancel pointwise.
    // ω = Ω/u, with u taken as the exact distance from the singular end
    let g = |_: f64, u: f64, _: f64| -> Result<f64> {
        let w = cutoff / u;
        if !w.is_finite() || w > 1e250 {
            return Ok(0.0);
        }
        let mut v = bode_integrand(model, w)? + bode_integrand(model, -w)?;
        if let Some((c, q)) = lead {
            v -= leading_integrand(c, q, w) + leading_integrand(c, q, -w);
        }
        Ok(v * cutoff / (u * u))
    };
    let r = tanh_sinh(g, 0.0, 1.0, tol)?;
    total += r.value;
    err += r.abs_error;
    ok &= r.converged;
    if !ok {
        notes.push("tail quadrature did not meet its tolerance".into());
    }
    Ok((total, err, ok))
}

/// `ω·|f(ω) + f(−ω)|` must fall by an order of magnitude between `10⁴Ω`
/// and `10⁸Ω`.
fn tail_decays(model: &LoopModel, cutoff: f64) -> Result<bool> {
    let probe = |w: f64| -> Result<f64> { Ok(w * (bode_integrand(model, w)? + bode_integrand(model, -w)?).abs()) };
    let near = probe(1e4 * cutoff)?;
    let far = probe(1e8 * cutoff)?;
    Ok(far <= 0.1 * near || far < 1e-12)
}

/// Integrand samples for plotting: `omega,ln_abs_S_sq,panel_id`, with
/// `per_panel` points in every breakpoint panel of `[−Ω, Ω]`.
pub fn integrand_csv(model: &LoopModel, report: &IntegralReport, per_panel: usize) -> Result<String> {
    let bps = breakpoints(&report.poles, &[], report.cutoff_omega);
    let mut out = String::from("omega,ln_abs_S_sq,panel_id\n");
    let n = per_panel.max(2);
    for (id, w) in bps.windows(2).enumerate() {
        for k in 0..n {
            let t = (k as f64 + 0.5) / n as f64;
            let omega = w[0] + t * (w[1] - w[0]);
            let v = bode_integrand(model, omega)?;
            writeln!(out, "{omega:e},{v:e},{id}").expect("writing to a String");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::{FractionalPID, Polynomial, RationalPlant};
    use crate::weier::{FactorForm, OuterSpec, SyntheticSensitivity};
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn classical() -> LoopModel {
        // L = 3/(s − 1) through a pure proportional controller
        let plant = RationalPlant::new(Polynomial::from_real(&[3.0]), Polynomial::from_real(&[-1.0, 1.0])).unwrap();
        LoopModel::rational(plant, FractionalPID::new(0.0, 1.0, 0.0, 0.5, 0.5).unwrap())
    }

    fn quotient(zeros: &[Complex64], poles: &[Complex64]) -> LoopModel {
        let outer = OuterSpec::new(
            zeros.iter().map(|z| -z).collect(),
            poles.iter().map(|q| -q).collect(),
            c(1.0, 0.0),
        )
        .unwrap();
        LoopModel::Synthetic(SyntheticSensitivity::new(vec![], FactorForm::Blaschke, outer).unwrap())
    }

    #[test]
    fn integrand_examples() {
        let m = classical();
        assert!((bode_integrand(&m, 0.0).unwrap() - 0.25f64.ln()).abs() < 1e-14);
        let w = 10.0;
        let exact = (101.0f64 / 104.0).ln();
        assert!((bode_integrand(&m, w).unwrap() - exact).abs() < 1e-14);
        let allpass = LoopModel::Synthetic(
            SyntheticSensitivity::new(
                vec![PoleRecord::new(c(1.0, 0.0), 1.0).unwrap()],
                FactorForm::Blaschke,
                OuterSpec::trivial(),
            )
            .unwrap(),
        );
        for w in [-3.0, 0.0, 0.7, 1e6] {
            assert_eq!(bode_integrand(&allpass, w).unwrap(), 0.0);
        }
    }

    #[test]
    fn integrand_sentinel_at_axis_zero() {
        // integral action: S(0) = 0
        let plant = RationalPlant::new(Polynomial::from_real(&[1.0]), Polynomial::from_real(&[2.0, 3.0, 1.0])).unwrap();
        let m = LoopModel::rational(plant, FractionalPID::new(0.0, 1.0, 1.0, 0.5, 0.5).unwrap());
        assert_eq!(bode_integrand(&m, 0.0).unwrap(), f64::NEG_INFINITY);
        assert!(bode_integrand(&m, 1e-3).unwrap().is_finite());
    }

    #[test]
    fn classical_loop() {
        let r = bode_integral(&classical(), 1e-8).unwrap();
        assert!(r.converged, "{:?}", r.notes);
        assert!((r.numeric_value + 2.0 * PI).abs() < 1e-6, "{}", r.numeric_value);
        assert!((r.theoretical_value - 4.0 * PI).abs() < 1e-9);
        let rec = r.with_residual(c(0.0, 3.0 * PI));
        assert!(rec.reconciliation.abs() < 1e-6);
    }

    #[test]
    fn double_pole_loop_integrates_to_zero() {
        let plant = RationalPlant::new(Polynomial::from_real(&[1.0]), Polynomial::from_real(&[1.0, 2.0, 1.0])).unwrap();
        let m = LoopModel::rational(plant, FractionalPID::new(0.0, 1.0, 0.0, 0.5, 0.5).unwrap());
        let r = bode_integral(&m, 1e-8).unwrap();
        assert!(r.numeric_value.abs() < 1e-7, "{}", r.numeric_value);
    }

    #[test]
    fn theoretical_examples() {
        assert_eq!(theoretical_value(&[]), 0.0);
        let p1 = PoleRecord::new(c(1.0, 0.0), 1.0).unwrap();
        assert!((theoretical_value(&[p1]) - 4.0 * PI).abs() < 1e-15);
        let p2 = PoleRecord::new(c(1.0, 0.0), 2.0).unwrap();
        let p3 = PoleRecord::new(c(2.0, 3.0), 1.0).unwrap();
        assert!((theoretical_value(&[p2, p3]) - 16.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn tail_estimate_examples() {
        // q = 1.5 with |c| = 1: m = 2, n = 0, α = 0.5, k1 = 1, other gains 0
        let plant = RationalPlant::new(Polynomial::from_real(&[1.0]), Polynomial::from_real(&[1.0, 1.0, 1.0])).unwrap();
        let m = LoopModel::rational(plant, FractionalPID::new(1.0, 0.0, 0.0, 0.5, 0.5).unwrap());
        let (_, b100) = tail_estimate(&m, 100.0).unwrap();
        assert!((b100 - 0.4).abs() < 1e-12);
        let (_, b200) = tail_estimate(&m, 200.0).unwrap();
        assert!((b200 / b100 - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(matches!(tail_estimate(&classical(), 100.0), Err(Error::TailDivergence { q }) if q == 1.0));
    }

    #[test]
    fn tail_correction_matches_far_field_quadrature() {
        let plant = RationalPlant::new(Polynomial::from_real(&[1.0]), Polynomial::from_real(&[1.0, 1.0, 1.0])).unwrap();
        let m = LoopModel::rational(plant, FractionalPID::new(1.0, 0.0, 0.0, 0.5, 0.5).unwrap());
        let w0 = 1e4;
        let (corr, bound) = tail_estimate(&m, w0).unwrap();
        let direct = integrate(|w: f64| bode_integrand(&m, w), &[w0, 1e6, 1e8, 1e10], QuadOptions::default())
            .unwrap()
            .value
            + integrate(|w: f64| bode_integrand(&m, -w), &[w0, 1e6, 1e8, 1e10], QuadOptions::default())
                .unwrap()
                .value;
        // the integral beyond 1e10 is below 1e−4 of the total
        assert!((direct - corr).abs() <= bound + 1e-3 * corr.abs(), "{direct} vs {corr}");
    }

    #[test]
    fn quotient_oracle_on_random_instances() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let k = rng.gen_range(1..=3);
            let mut zs = Vec::new();
            let mut qs = Vec::new();
            for _ in 0..k {
                zs.push(c(rng.gen_range(0.1..5.0), rng.gen_range(-5.0..5.0)));
                qs.push(c(rng.gen_range(0.1..5.0), rng.gen_range(-5.0..5.0)));
            }
            let exact = 2.0 * PI * (zs.iter().map(|z| z.re).sum::<f64>() - qs.iter().map(|q| q.re).sum::<f64>());
            let r = bode_integral(&quotient(&zs, &qs), 1e-8).unwrap();
            assert!(r.converged, "{:?} {:?} {:?} {}", zs, qs, r.notes, r.estimated_abs_error);
            assert!(
                (r.numeric_value - exact).abs() <= 1e-6 * exact.abs().max(1.0),
                "{} vs {exact}",
                r.numeric_value
            );
        }
    }

    #[test]
    fn frequency_scaling() {
        // S(s/λ) realized by scaling the plant coefficients and gains
        let lam: f64 = 3.0;
        let (alpha, beta) = (0.5, 0.5);
        let den = [20.0, -8.0, 11.0, 1.0];
        let num = [1.0];
        let base = |l: f64| {
            let den: Vec<f64> = den.iter().enumerate().map(|(k, c)| c * l.powi(-(k as i32))).collect();
            let plant = RationalPlant::new(Polynomial::from_real(&num), Polynomial::from_real(&den)).unwrap();
            LoopModel::rational(
                plant,
                FractionalPID::new(5.0 * l.powf(-alpha), 20.0, 4.0 * l.powf(beta), alpha, beta).unwrap(),
            )
        };
        let i1 = bode_integral(&base(1.0), 1e-8).unwrap().numeric_value;
        let il = bode_integral(&base(lam), 1e-8).unwrap().numeric_value;
        assert!((il - lam * i1).abs() < 1e-5 * il.abs().max(1.0), "{il} vs {}", lam * i1);
    }

    #[test]
    fn allpass_integrates_to_zero() {
        let factors = (1..=50)
            .map(|j| PoleRecord::new(c(1.0 / (j * j) as f64, j as f64), 1.0).unwrap())
            .collect();
        let m = LoopModel::Synthetic(SyntheticSensitivity::new(factors, FactorForm::Blaschke, OuterSpec::trivial()).unwrap());
        let r = bode_integral(&m, 1e-6).unwrap();
        assert!(r.numeric_value.abs() < 1e-8);
    }

    #[test]
    fn half_line_doubles() {
        let plant = RationalPlant::new(Polynomial::from_real(&[1.0]), Polynomial::from_real(&[-20.0, 8.0, 11.0, 1.0])).unwrap();
        let m = LoopModel::rational(plant, FractionalPID::new(5.0, 20.0, 4.0, 0.5, 0.5).unwrap());
        let full = bode_integral(&m, 1e-8).unwrap();
        let half = tanh_sinh(|x, _, _| bode_integrand(&m, x), 0.0, 1.0, 1e-12).unwrap().value
            + integrate(|w: f64| bode_integrand(&m, w), &[1.0, 10.0, full.cutoff_omega], QuadOptions::default())
                .unwrap()
                .value;
        let tail_half = 0.5 * full.tail_correction;
        assert!((2.0 * (half + tail_half) - full.numeric_value).abs() < 1e-6 * full.numeric_value.abs());
    }

    #[test]
    fn csv_header_and_rows() {
        let m = classical();
        let r = bode_integral(&m, 1e-6).unwrap();
        let csv = integrand_csv(&m, &r, 4).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("omega,ln_abs_S_sq,panel_id"));
        assert!(lines.count() >= 8);
        assert!(!csv.contains('\r'));
    }
}
