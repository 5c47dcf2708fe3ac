use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Complex-coefficient polynomial stored in ascending degree order.
///
/// Trailing zero coefficients are trimmed on construction, so the last
/// stored coefficient is the leading one. The zero polynomial has no
/// coefficients at all.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Monic polynomial with the given roots (repeated entries give multiplicity).
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut p = Self::constant(Complex64::new(1.0, 0.0));
        for &r in roots {
            p = p.mul(&Self::new(vec![-r, Complex64::new(1.0, 0.0)]));
        }
        p
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    /// Horner evaluation.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, s: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &c in self.coeffs.iter().rev() {
            dp = dp * s + p;
            p = p * s + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// `p(s) / s^deg`, evaluated in powers of `1/s` so large `|s|` cannot
    /// overflow.
    pub fn eval_scaled(&self, s: Complex64) -> Complex64 {
        let w = 1.0 / s;
        self.coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * w + c)
    }

    /// Largest coefficient modulus, used as a residual scale.
    pub fn coeff_scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sum of |c_l| |s|^l, the natural magnitude scale of `eval` at `s`.
    pub fn magnitude_bound(&self, s: Complex64) -> f64 {
        let r = s.norm();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + c.norm())
    }
}

impl From<Vec<[f64; 2]>> for Polynomial {
    fn from(v: Vec<[f64; 2]>) -> Self {
        Self::new(v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl From<Polynomial> for Vec<[f64; 2]> {
    fn from(p: Polynomial) -> Self {
        p.coeffs.iter().map(|c| [c.re, c.im]).collect()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({})", c)?;
            }
            match k {
                0 => {}
                1 => write!(f, "·s")?,
                _ => write!(f, "·s^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trims_trailing_zeros() {
        let p = Polynomial::from_real(&[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(p.leading(), c(2.0, 0.0));
        assert!(Polynomial::from_real(&[0.0]).is_zero());
        assert_eq!(Polynomial::zero().degree(), None);
    }

    #[test]
    fn from_roots_expands() {
        let p = Polynomial::from_roots(&[c(1.0, 0.0), c(-1.0, 0.0), c(-2.0, 0.0)]);
        assert_eq!(p, Polynomial::from_real(&[-2.0, -1.0, 2.0, 1.0]));
    }

    #[test]
    fn derivative_matches_horner_pass() {
        let p = Polynomial::new(vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0), c(2.0, 0.0)]);
        let s = c(0.3, -1.7);
        let (v, dv) = p.eval_with_derivative(s);
        assert!((v - p.eval(s)).norm() < 1e-14);
        assert!((dv - p.derivative().eval(s)).norm() < 1e-13);
    }

    #[test]
    fn scaled_evaluation() {
        let p = Polynomial::new(vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0), c(2.0, 0.0)]);
        let s = c(3.0, -4.0);
        assert!((p.eval_scaled(s) * s * s * s - p.eval(s)).norm() < 1e-12 * p.eval(s).norm());
        let big = c(1e120, 1e120);
        assert!(p.eval_scaled(big).re.is_finite());
    }

    #[test]
    fn serde_pairs() {
        let p: Polynomial = serde_json::from_str("[[2.0, 0.0], [1.0, 0.0]]").unwrap();
        assert_eq!(p, Polynomial::from_real(&[2.0, 1.0]));
        let back = serde_json::to_string(&p).unwrap();
        assert_eq!(back, "[[2.0,0.0],[1.0,0.0]]");
    }
}
