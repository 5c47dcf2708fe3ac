use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcmodel::{log1p_complex, principal_power, PoleRecord};

/// How each right-half-plane zero enters the product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorForm {
    /// `((s − p)/(s + p̄))^d`, unit modulus on the imaginary axis.
    Blaschke,
    /// `(s − p)^d`; grows without bound, so only usable on a bounded disc.
    Raw,
}

/// Zero-free (in the right half plane) rational outer factor
/// `gain · Π(s − z_k) / Π(s − q_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterSpec {
    pub zeros: Vec<Complex64>,
    pub poles: Vec<Complex64>,
    pub gain: Complex64,
}

impl OuterSpec {
    pub fn new(zeros: Vec<Complex64>, poles: Vec<Complex64>, gain: Complex64) -> Result<Self> {
        if let Some(z) = zeros.iter().chain(&poles).find(|z| !(z.re < 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "outer factor point {z} is not in the open left half plane"
            )));
        }
        if zeros.len() > poles.len() {
            return Err(Error::InvalidParameter(
                "outer factor must stay finite at infinity (more zeros than poles)".into(),
            ));
        }
        if gain == Complex64::new(0.0, 0.0) || !gain.re.is_finite() || !gain.im.is_finite() {
            return Err(Error::InvalidParameter("outer gain must be finite and nonzero".into()));
        }
        Ok(Self { zeros, poles, gain })
    }

    pub fn trivial() -> Self {
        Self {
            zeros: Vec::new(),
            poles: Vec::new(),
            gain: Complex64::new(1.0, 0.0),
        }
    }

    /// `(s + a)/(s + b)` with `a, b > 0`.
    pub fn first_order(a: f64, b: f64) -> Result<Self> {
        Self::new(
            vec![Complex64::new(-a, 0.0)],
            vec![Complex64::new(-b, 0.0)],
            Complex64::new(1.0, 0.0),
        )
    }

    fn log(&self, s: Complex64) -> Result<Complex64> {
        let mut acc = self.gain.ln();
        for (k, &q) in self.poles.iter().enumerate() {
            let shifted = s - q;
            if shifted == Complex64::new(0.0, 0.0) {
                return Err(Error::Domain(format!("outer pole at {q}")));
            }
            match self.zeros.get(k) {
                // (s − z)/(s − q) = 1 + (q − z)/(s − q)
                Some(&z) => acc += log1p_complex((q - z) / shifted),
                None => acc -= shifted.ln(),
            }
        }
        Ok(acc)
    }

    /// Paired like `log`, so that far from the finite points the small
    /// result is not the difference of two large logarithms.
    fn log_modulus(&self, s: Complex64) -> f64 {
        let mut acc = self.gain.norm().ln();
        for (k, &q) in self.poles.iter().enumerate() {
            let shifted = s - q;
            match self.zeros.get(k) {
                Some(&z) if shifted.norm() > (q - z).norm() => acc += log1p_complex((q - z) / shifted).re,
                Some(&z) => acc += (s - z).norm().ln() - shifted.norm().ln(),
                None => acc -= shifted.norm().ln(),
            }
        }
        acc
    }

    fn eval(&self, s: Complex64) -> Complex64 {
        let num: Complex64 = self.zeros.iter().map(|z| s - z).product();
        let den: Complex64 = self.poles.iter().map(|q| s - q).product();
        self.gain * num / den
    }

    fn is_conjugate_symmetric(&self) -> bool {
        self.gain.im == 0.0 && closed_under_conjugation(&self.zeros) && closed_under_conjugation(&self.poles)
    }
}

fn closed_under_conjugation(points: &[Complex64]) -> bool {
    let mut used = vec![false; points.len()];
    for (i, p) in points.iter().enumerate() {
        if used[i] {
            continue;
        }
        if p.im.abs() <= 1e-12 * (1.0 + p.norm()) {
            used[i] = true;
            continue;
        }
        let partner = (0..points.len())
            .find(|&j| j != i && !used[j] && (points[j] - p.conj()).norm() <= 1e-12 * (1.0 + p.norm()));
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
            }
            None => return false,
        }
    }
    true
}

/// Truncated product sensitivity `S(s) = g(s)·Π factor_j(s)` with
/// prescribed right-half-plane zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSensitivity {
    factors: Vec<PoleRecord>,
    form: FactorForm,
    outer: OuterSpec,
    domain_radius: Option<f64>,
}

impl SyntheticSensitivity {
    /// Unbounded evaluation domain; rejects the raw form.
    pub fn new(factors: Vec<PoleRecord>, form: FactorForm, outer: OuterSpec) -> Result<Self> {
        if form == FactorForm::Raw {
            return Err(Error::Config(
                "raw factor form needs a bounded evaluation domain".into(),
            ));
        }
        Ok(Self {
            factors,
            form,
            outer,
            domain_radius: None,
        })
    }

    /// Evaluation restricted to `|s| ≤ radius`.
    pub fn bounded(factors: Vec<PoleRecord>, form: FactorForm, outer: OuterSpec, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Config(format!("domain radius {radius} must be finite and positive")));
        }
        Ok(Self {
            factors,
            form,
            outer,
            domain_radius: Some(radius),
        })
    }

    pub fn factors(&self) -> &[PoleRecord] {
        &self.factors
    }

    pub fn form(&self) -> FactorForm {
        self.form
    }

    pub fn outer(&self) -> &OuterSpec {
        &self.outer
    }

    pub fn is_conjugate_symmetric(&self) -> bool {
        let locs: Vec<_> = self.factors.iter().map(|f| f.location).collect();
        closed_under_conjugation(&locs) && self.outer.is_conjugate_symmetric()
    }

    fn check_domain(&self, s: Complex64) -> Result<()> {
        match self.domain_radius {
            Some(r) if s.norm() > r => Err(Error::Config(format!(
                "s = {s} lies outside the bounded evaluation domain |s| <= {r}"
            ))),
            _ => Ok(()),
        }
    }

    fn factor_base(&self, p: Complex64, s: Complex64) -> Result<Complex64> {
        match self.form {
            FactorForm::Blaschke => {
                let den = s + p.conj();
                if den == Complex64::new(0.0, 0.0) {
                    return Err(Error::Domain(format!("Blaschke factor pole at {}", -p.conj())));
                }
                Ok((s - p) / den)
            }
            FactorForm::Raw => Ok(s - p),
        }
    }

    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        self.check_domain(s)?;
        let mut acc = self.outer.eval(s);
        for f in &self.factors {
            acc *= principal_power(self.factor_base(f.location, s)?, f.order)?;
        }
        Ok(acc)
    }

    /// `log g(s) + Σ d_j·Log(factor_j(s))`.
    pub fn log(&self, s: Complex64) -> Result<Complex64> {
        self.check_domain(s)?;
        let mut acc = self.outer.log(s)?;
        for f in &self.factors {
            let p = f.location;
            if s == p {
                return Err(Error::BranchPoint { at: s, nearest: Some(p) });
            }
            let term = match self.form {
                FactorForm::Blaschke => {
                    let den = s + p.conj();
                    if den == Complex64::new(0.0, 0.0) {
                        return Err(Error::Domain(format!("Blaschke factor pole at {}", -p.conj())));
                    }
                    let num = s - p;
                    if num.norm() < 0.5 * den.norm() {
                        // near the zero log1p would cancel; the ratio is exact
                        (num / den).ln()
                    } else {
                        log1p_complex(-2.0 * p.re / den)
                    }
                }
                FactorForm::Raw => (s - p).ln(),
            };
            acc += f.order * term;
        }
        Ok(acc)
    }

    /// `ln|S(s)|` from per-factor distances; on the imaginary axis each
    /// Blaschke term is exactly zero.
    pub fn log_modulus(&self, s: Complex64) -> Result<f64> {
        self.check_domain(s)?;
        let mut acc = self.outer.log_modulus(s);
        for f in &self.factors {
            let p = f.location;
            let near = (s - p).norm();
            if near == 0.0 {
                return Err(Error::BranchPoint { at: s, nearest: Some(p) });
            }
            acc += f.order
                * match self.form {
                    FactorForm::Blaschke => near.ln() - (s + p.conj()).norm().ln(),
                    FactorForm::Raw => near.ln(),
                };
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn family_a(n: usize) -> Vec<PoleRecord> {
        (1..=n)
            .map(|j| PoleRecord::new(c(1.0 / (j * j) as f64, j as f64), 1.0).unwrap())
            .collect()
    }

    #[test]
    fn raw_form_requires_bounded_domain() {
        assert!(matches!(
            SyntheticSensitivity::new(family_a(3), FactorForm::Raw, OuterSpec::trivial()),
            Err(Error::Config(_))
        ));
        let raw = SyntheticSensitivity::bounded(family_a(3), FactorForm::Raw, OuterSpec::trivial(), 10.0).unwrap();
        assert!(raw.eval(c(0.0, 1.0)).is_ok());
        assert!(matches!(raw.eval(c(20.0, 0.0)), Err(Error::Config(_))));
    }

    #[test]
    fn zeros_sit_on_factors_in_both_forms() {
        let seq = family_a(5);
        let b = SyntheticSensitivity::new(seq.clone(), FactorForm::Blaschke, OuterSpec::first_order(2.0, 1.0).unwrap()).unwrap();
        let r = SyntheticSensitivity::bounded(seq.clone(), FactorForm::Raw, OuterSpec::first_order(2.0, 1.0).unwrap(), 10.0).unwrap();
        for f in &seq {
            assert_eq!(b.eval(f.location).unwrap(), c(0.0, 0.0));
            assert_eq!(r.eval(f.location).unwrap(), c(0.0, 0.0));
            let near = f.location + c(1e-3, 0.0);
            assert!(b.eval(f.location + c(1e-6, 0.0)).unwrap().norm() < 1e-3);
            let far = f.location + c(0.5, 0.0);
            assert!(r.eval(near).unwrap().norm() < 1e-2 * r.eval(far).unwrap().norm());
        }
    }

    #[test]
    fn blaschke_is_all_pass_on_axis() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let seq: Vec<_> = (0..50)
            .map(|_| {
                let loc = c(rng.gen_range(0.01..5.0), rng.gen_range(-20.0..20.0));
                PoleRecord::new(loc, rng.gen_range(0.3..3.0)).unwrap()
            })
            .collect();
        let syn = SyntheticSensitivity::new(seq, FactorForm::Blaschke, OuterSpec::trivial()).unwrap();
        for _ in 0..1000 {
            let w: f64 = rng.gen_range(-1e3..1e3);
            let m = syn.eval(c(0.0, w)).unwrap().norm();
            assert!((m - 1.0).abs() < 1e-10, "|B(i{w})| = {m}");
            assert_eq!(syn.log_modulus(c(0.0, w)).unwrap(), 0.0);
        }
    }

    #[test]
    fn log_matches_eval() {
        let seq = vec![
            PoleRecord::new(c(1.0, 2.0), 1.5).unwrap(),
            PoleRecord::new(c(0.3, -1.0), 2.0).unwrap(),
        ];
        let outer = OuterSpec::new(vec![c(-1.0, 1.0)], vec![c(-2.0, 0.0), c(-0.5, -3.0)], c(2.0, 0.0)).unwrap();
        let syn = SyntheticSensitivity::new(seq, FactorForm::Blaschke, outer).unwrap();
        for s in [c(0.0, 3.0), c(2.0, -1.0), c(40.0, 7.0)] {
            let lhs = syn.log(s).unwrap().exp();
            let rhs = syn.eval(s).unwrap();
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
            assert!((syn.log_modulus(s).unwrap() - rhs.norm().ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn conjugate_symmetry_detection() {
        let pair = vec![
            PoleRecord::new(c(1.0, 2.0), 1.0).unwrap(),
            PoleRecord::new(c(1.0, -2.0), 1.0).unwrap(),
        ];
        let syn = SyntheticSensitivity::new(pair, FactorForm::Blaschke, OuterSpec::first_order(3.0, 1.0).unwrap()).unwrap();
        assert!(syn.is_conjugate_symmetric());
        let syn = SyntheticSensitivity::new(family_a(2), FactorForm::Blaschke, OuterSpec::trivial()).unwrap();
        assert!(!syn.is_conjugate_symmetric());
    }

    #[test]
    fn outer_validation() {
        assert!(OuterSpec::first_order(-1.0, 1.0).is_err());
        assert!(OuterSpec::new(vec![c(-1.0, 0.0), c(-2.0, 0.0)], vec![c(-1.0, 0.0)], c(1.0, 0.0)).is_err());
    }
}
