//! Plants, fractional PID controllers and the sensitivity functions they
//! close, evaluated on the principal branch.
//!
//! The controller is `K(s) = k1·s^α + k0 + km1·s^(−β)` and the plant is a
//! ratio of polynomials `N/D`. Every evaluation goes through the cleared
//! characteristic function
//!
//! ```text
//! χ(s) = D(s)·s^β + N(s)·(k1·s^(α+β) + k0·s^β + km1)
//! ```
//!
//! and the sensitivity `S = D·s^β / χ`, which stays finite at the origin and
//! at the roots of `D`.

mod document;
mod polynomial;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use document::ModelDocument;
pub use polynomial::Polynomial;

use crate::error::{Error, Result};
use crate::weier::SyntheticSensitivity;

/// Points with `Re(s)` at or below this are not in the open right half plane.
pub const AXIS_TOLERANCE: f64 = 1e-9;

/// Relative threshold below which `χ` is treated as vanishing.
pub const SINGULARITY_TOLERANCE: f64 = 1e-12;

const TWO_PI: f64 = 2.0 * PI;

/// Rational plant `N(s)/D(s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPlant", into = "RawPlant")]
pub struct RationalPlant {
    num: Polynomial,
    den: Polynomial,
}

#[derive(Serialize, Deserialize)]
struct RawPlant {
    num: Polynomial,
    den: Polynomial,
}

impl TryFrom<RawPlant> for RationalPlant {
    type Error = Error;
    fn try_from(raw: RawPlant) -> Result<Self> {
        RationalPlant::new(raw.num, raw.den)
    }
}

impl From<RationalPlant> for RawPlant {
    fn from(p: RationalPlant) -> Self {
        RawPlant {
            num: p.num,
            den: p.den,
        }
    }
}

impl RationalPlant {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidModel("plant denominator is identically zero".into()));
        }
        if num
            .coeffs()
            .iter()
            .chain(den.coeffs())
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::InvalidModel("plant coefficients must be finite".into()));
        }
        Ok(Self { num, den })
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    /// Degree of the numerator; a zero numerator counts as degree 0.
    pub fn n(&self) -> usize {
        self.num.degree().unwrap_or(0)
    }

    pub fn m(&self) -> usize {
        self.den.degree().unwrap_or(0)
    }

    pub fn is_real(&self) -> bool {
        self.num.is_real() && self.den.is_real()
    }
}

/// Fractional-order PID gains and orders, `K(s) = k1 s^α + k0 + km1 s^(−β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPid", into = "RawPid")]
pub struct FractionalPID {
    pub k1: f64,
    pub k0: f64,
    pub km1: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPid {
    k1: f64,
    k0: f64,
    km1: f64,
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawPid> for FractionalPID {
    type Error = Error;
    fn try_from(r: RawPid) -> Result<Self> {
        FractionalPID::new(r.k1, r.k0, r.km1, r.alpha, r.beta)
    }
}

impl From<FractionalPID> for RawPid {
    fn from(p: FractionalPID) -> Self {
        RawPid {
            k1: p.k1,
            k0: p.k0,
            km1: p.km1,
            alpha: p.alpha,
            beta: p.beta,
        }
    }
}

impl FractionalPID {
    pub fn new(k1: f64, k0: f64, km1: f64, alpha: f64, beta: f64) -> Result<Self> {
        if ![k1, k0, km1].iter().all(|g| g.is_finite()) {
            return Err(Error::InvalidModel("PID gains must be finite".into()));
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::InvalidModel(format!(
                "derivative order alpha = {alpha} violates 0 < alpha < 2"
            )));
        }
        if !(beta > 0.0 && beta < 2.0) {
            return Err(Error::InvalidModel(format!(
                "integral order beta = {beta} violates 0 < beta < 2"
            )));
        }
        Ok(Self {
            k1,
            k0,
            km1,
            alpha,
            beta,
        })
    }

    /// Controller value `K(s)` (undefined at the origin when `km1 ≠ 0`).
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let d = principal_power(s, self.alpha)?;
        let i = principal_power(s, -self.beta)?;
        Ok(self.k1 * d + self.k0 + self.km1 * i)
    }
}

/// An open right-half-plane point with a (possibly fractional) order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleRecord {
    pub location: Complex64,
    pub order: f64,
}

impl PoleRecord {
    pub fn new(location: Complex64, order: f64) -> Result<Self> {
        if !(location.re > AXIS_TOLERANCE) || !location.im.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "pole {location} is not in the open right half plane"
            )));
        }
        if !(order > 0.0) || !order.is_finite() {
            return Err(Error::InvalidParameter(format!("pole order {order} must be positive")));
        }
        Ok(Self { location, order })
    }
}

/// Source of a closed-loop sensitivity.
#[derive(Debug, Clone, PartialEq)]
pub enum LoopModel {
    RationalFractal {
        plant: RationalPlant,
        pid: FractionalPID,
    },
    Synthetic(SyntheticSensitivity),
}

impl LoopModel {
    pub fn rational(plant: RationalPlant, pid: FractionalPID) -> Self {
        LoopModel::RationalFractal { plant, pid }
    }

    /// `m > α + n + 1`; always `false` for synthetic models.
    pub fn degree_condition_holds(&self) -> bool {
        match self {
            LoopModel::RationalFractal { plant, pid } => degree_condition(plant, pid),
            LoopModel::Synthetic(_) => false,
        }
    }

    /// Known right-half-plane zeros of `S`: RHP roots of `D`, or the
    /// synthetic factor list.
    pub fn rhp_zeros(&self) -> Vec<PoleRecord> {
        match self {
            LoopModel::RationalFractal { plant, .. } => {
                crate::rootfind::rhp_open_loop_poles(plant)
                    .map(|r| r.poles)
                    .unwrap_or_default()
            }
            LoopModel::Synthetic(syn) => syn.factors().to_vec(),
        }
    }

    /// Whether `S(conj s) = conj S(s)` holds for this model.
    pub fn is_conjugate_symmetric(&self) -> bool {
        match self {
            LoopModel::RationalFractal { plant, .. } => plant.is_real(),
            LoopModel::Synthetic(syn) => syn.is_conjugate_symmetric(),
        }
    }

    /// `S(0) = 0`, i.e. the cleared form carries a zero at the origin.
    pub fn vanishes_at_origin(&self) -> bool {
        match self {
            LoopModel::RationalFractal { pid, .. } => pid.km1 != 0.0,
            LoopModel::Synthetic(_) => false,
        }
    }
}

/// `m > α + n + 1`.
pub fn degree_condition(plant: &RationalPlant, pid: &FractionalPID) -> bool {
    plant.m() as f64 > pid.alpha + plant.n() as f64 + 1.0
}

/// `s^a = exp(a·(ln|s| + i·Arg s))` with `Arg s ∈ (−π, π]`.
pub fn principal_power(s: Complex64, a: f64) -> Result<Complex64> {
    if s == Complex64::new(0.0, 0.0) {
        return if a > 0.0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Err(Error::Domain(format!("0 raised to non-positive power {a}")))
        };
    }
    let arg = principal_arg(s);
    let log_mod = s.norm().ln();
    Ok(Complex64::from_polar((a * log_mod).exp(), a * arg))
}

/// `atan2` with the cut's lower edge folded onto `+π`.
pub(crate) fn principal_arg(s: Complex64) -> f64 {
    let a = s.im.atan2(s.re);
    if a == -PI {
        PI
    } else {
        a
    }
}

/// Picks the representative of `phase + 2πk` closest to `reference`.
pub fn unwrap_phase(phase: f64, reference: f64) -> f64 {
    phase + TWO_PI * ((reference - phase) / TWO_PI).round()
}

/// Principal `ln(1 + z)`, accurate when `|z|` is small.
pub(crate) fn log1p_complex(z: Complex64) -> Complex64 {
    if z.norm() > 0.5 {
        return (1.0 + z).ln();
    }
    let re = 0.5 * (2.0 * z.re + z.norm_sqr()).ln_1p();
    let im = z.im.atan2(1.0 + z.re);
    Complex64::new(re, im)
}

/// Pieces of the cleared form at `s`: `D·s^β` and `N·(k1 s^(α+β) + k0 s^β + km1)`.
fn cleared_parts(plant: &RationalPlant, pid: &FractionalPID, s: Complex64) -> Result<(Complex64, Complex64)> {
    let sb = principal_power(s, pid.beta)?;
    let sab = principal_power(s, pid.alpha + pid.beta)?;
    let d = plant.den.eval(s) * sb;
    let n = plant.num.eval(s) * (pid.k1 * sab + pid.k0 * sb + pid.km1);
    Ok((d, n))
}

/// Numerator and loop part of `S`; without integral action the common
/// factor `s^β` is dropped so that `S(0) = D(0)/(D(0) + k0·N(0))` stays defined.
fn sensitivity_parts(plant: &RationalPlant, pid: &FractionalPID, s: Complex64) -> Result<(Complex64, Complex64)> {
    if pid.km1 != 0.0 {
        return cleared_parts(plant, pid, s);
    }
    let sa = principal_power(s, pid.alpha)?;
    Ok((plant.den.eval(s), plant.num.eval(s) * (pid.k1 * sa + pid.k0)))
}

/// `χ(s) = D(s)s^β + N(s)(k1 s^(α+β) + k0 s^β + km1)`.
pub fn eval_characteristic(plant: &RationalPlant, pid: &FractionalPID, s: Complex64) -> Result<Complex64> {
    let (d, n) = cleared_parts(plant, pid, s)?;
    Ok(d + n)
}

/// `χ'(s)`, differentiating each principal power term by term.
pub fn eval_characteristic_derivative(
    plant: &RationalPlant,
    pid: &FractionalPID,
    s: Complex64,
) -> Result<Complex64> {
    if s == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("derivative of s^beta at the origin".into()));
    }
    let (dv, dd) = plant.den.eval_with_derivative(s);
    let (nv, nd) = plant.num.eval_with_derivative(s);
    let (a, b) = (pid.alpha, pid.beta);
    let sb = principal_power(s, b)?;
    let sab = principal_power(s, a + b)?;
    let inv = 1.0 / s;
    let ctrl = pid.k1 * sab + pid.k0 * sb + pid.km1;
    let ctrl_d = (pid.k1 * (a + b) * sab + pid.k0 * b * sb) * inv;
    Ok(dd * sb + dv * b * sb * inv + nd * ctrl + nv * ctrl_d)
}

/// Magnitude scale of `χ` at `s`, the sum of its term moduli.
pub(crate) fn characteristic_scale(plant: &RationalPlant, pid: &FractionalPID, s: Complex64) -> f64 {
    let r = s.norm();
    let db = plant.den.magnitude_bound(s) * r.powf(pid.beta);
    let nb = plant.num.magnitude_bound(s)
        * (pid.k1.abs() * r.powf(pid.alpha + pid.beta) + pid.k0.abs() * r.powf(pid.beta) + pid.km1.abs());
    db + nb
}

fn sensitivity_scale(plant: &RationalPlant, pid: &FractionalPID, s: Complex64) -> f64 {
    if pid.km1 != 0.0 {
        return characteristic_scale(plant, pid, s);
    }
    let r = s.norm();
    plant.den.magnitude_bound(s) + plant.num.magnitude_bound(s) * (pid.k1.abs() * r.powf(pid.alpha) + pid.k0.abs())
}

/// `S(s)`: cleared form for rational loops, product form for synthetic ones.
pub fn eval_sensitivity(model: &LoopModel, s: Complex64) -> Result<Complex64> {
    match model {
        LoopModel::RationalFractal { plant, pid } => {
            let (d, n) = sensitivity_parts(plant, pid, s)?;
            let chi = d + n;
            let scale = sensitivity_scale(plant, pid, s);
            if chi.norm() <= SINGULARITY_TOLERANCE * scale || chi.norm() == 0.0 {
                return Err(Error::Singularity {
                    at: s,
                    modulus: chi.norm(),
                });
            }
            Ok(d / chi)
        }
        LoopModel::Synthetic(syn) => syn.eval(s),
    }
}

/// `L(s) = P(s)K(s)` for `|s| > 1`, with both polynomials scaled by their
/// leading power so that the far field never overflows.
fn loop_gain_far(plant: &RationalPlant, pid: &FractionalPID, s: Complex64) -> Result<Option<Complex64>> {
    if plant.num().is_zero() {
        return Ok(Some(Complex64::new(0.0, 0.0)));
    }
    let dhat = plant.den().eval_scaled(s);
    if dhat == Complex64::new(0.0, 0.0) {
        return Ok(None);
    }
    let shift = plant.n() as f64 - plant.m() as f64;
    let ctrl = pid.k1 * principal_power(s, shift + pid.alpha)?
        + pid.k0 * principal_power(s, shift)?
        + pid.km1 * principal_power(s, shift - pid.beta)?;
    Ok(Some(plant.num().eval_scaled(s) / dhat * ctrl))
}

/// Some logarithm of `S(s)` (imaginary part not necessarily principal),
/// computed without forming `S` where cancellation would cost accuracy.
pub(crate) fn log_sensitivity_raw(model: &LoopModel, s: Complex64) -> Result<Complex64> {
    match model {
        LoopModel::RationalFractal { plant, pid } => {
            if s.norm() > 1.0 {
                let Some(l) = loop_gain_far(plant, pid, s)? else {
                    return Err(branch_point(model, s));
                };
                let one_plus = 1.0 + l;
                if one_plus.norm() <= SINGULARITY_TOLERANCE * (1.0 + l.norm()) {
                    return Err(Error::Singularity {
                        at: s,
                        modulus: one_plus.norm(),
                    });
                }
                return Ok(if l.norm() < 0.5 { -log1p_complex(l) } else { -one_plus.ln() });
            }
            let (d, n) = sensitivity_parts(plant, pid, s)?;
            let chi = d + n;
            let scale = sensitivity_scale(plant, pid, s);
            if chi.norm() <= SINGULARITY_TOLERANCE * scale || chi.norm() == 0.0 {
                return Err(Error::Singularity {
                    at: s,
                    modulus: chi.norm(),
                });
            }
            if d == Complex64::new(0.0, 0.0) {
                return Err(branch_point(model, s));
            }
            let loop_gain = n / d;
            if loop_gain.norm() < 0.5 {
                // S = 1/(1+L)
                Ok(-log1p_complex(loop_gain))
            } else {
                let v = d / chi;
                if v.norm() < 1e-300 {
                    return Err(branch_point(model, s));
                }
                Ok(v.ln())
            }
        }
        LoopModel::Synthetic(syn) => syn.log(s),
    }
}

/// `ln|S(s)|`, exact for all-pass factors on the imaginary axis.
pub(crate) fn log_abs_sensitivity(model: &LoopModel, s: Complex64) -> Result<f64> {
    match model {
        LoopModel::Synthetic(syn) => syn.log_modulus(s),
        _ => Ok(log_sensitivity_raw(model, s)?.re),
    }
}

fn branch_point(model: &LoopModel, s: Complex64) -> Error {
    let mut candidates = model.rhp_zeros().into_iter().map(|p| p.location).collect::<Vec<_>>();
    if model.vanishes_at_origin() {
        candidates.push(Complex64::new(0.0, 0.0));
    }
    let nearest = candidates
        .into_iter()
        .min_by(|a, b| (a - s).norm().total_cmp(&(b - s).norm()));
    Error::BranchPoint { at: s, nearest }
}

/// `ln|S(s)| + iφ`: `φ` is the principal argument, or the representative
/// within `π` of `prev_phase` when one is supplied.
pub fn eval_log_sensitivity(model: &LoopModel, s: Complex64, prev_phase: Option<f64>) -> Result<Complex64> {
    let raw = match log_sensitivity_raw(model, s) {
        Ok(v) => v,
        Err(Error::BranchPoint { .. }) => return Err(branch_point(model, s)),
        Err(e) => return Err(e),
    };
    if !raw.re.is_finite() {
        return Err(branch_point(model, s));
    }
    let principal = {
        let p = raw.im.sin().atan2(raw.im.cos());
        if p == -PI {
            PI
        } else {
            p
        }
    };
    let phase = match prev_phase {
        Some(prev) => unwrap_phase(principal, prev),
        None => principal,
    };
    Ok(Complex64::new(raw.re, phase))
}
