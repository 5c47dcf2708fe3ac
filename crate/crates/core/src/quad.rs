//! Adaptive quadrature shared by the axis integral and the contour pieces.
//!
//! Panels use the 7-point Gauss / 15-point Kronrod pair; the panel error is
//! the raw `|K15 − G7|` difference. Panels touching a logarithmic endpoint
//! singularity can instead go through [`tanh_sinh`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values the integrators can accumulate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

// Kronrod abscissae (descending, last is the centre) and weights; Gauss
// weights pair with the odd-indexed Kronrod nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One G7/K15 panel on `[a, b]`: `(kronrod, error)`. A non-finite sample
/// yields an infinite error so the caller subdivides around it.
pub fn gk15<T, F>(f: &mut F, a: f64, b: f64) -> Result<(T, f64)>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = T::zero();
    let mut gauss = T::zero();
    let mut finite = true;
    let mut sample = |x: f64, finite: &mut bool| -> Result<T> {
        let v = f(x)?;
        if v.is_finite_value() {
            Ok(v)
        } else {
            *finite = false;
            Ok(T::zero())
        }
    };
    let fc = sample(centre, &mut finite)?;
    kron = kron + fc * WGK[7];
    gauss = gauss + fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = sample(centre - dx, &mut finite)?;
        let f2 = sample(centre + dx, &mut finite)?;
        let pair = f1 + f2;
        kron = kron + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    let err = if finite { (kron - gauss).magnitude() } else { f64::INFINITY };
    Ok((kron, err))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub abs_error: f64,
    pub intervals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_intervals: 4000,
        }
    }
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Pairwise sum, independent of how the panels were produced.
pub fn pairwise_sum<T: QuadValue>(values: &[T]) -> T {
    match values.len() {
        0 => T::zero(),
        1 => values[0],
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

/// Globally adaptive integration over the sorted `breakpoints` (at least
/// two). The panel with the largest error is bisected until the summed
/// error meets `max(abs_tol, rel_tol·|I|)` or the interval budget runs out.
pub fn integrate<T, F>(mut f: F, breakpoints: &[f64], opts: QuadOptions) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    if breakpoints.len() < 2 {
        return Err(Error::Quadrature("need at least two breakpoints".into()));
    }
    let mut heap = BinaryHeap::new();
    for w in breakpoints.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Quadrature(format!("breakpoints not increasing: {} {}", w[0], w[1])));
        }
        let (value, err) = gk15(&mut f, w[0], w[1])?;
        heap.push(Panel { a: w[0], b: w[1], value, err });
    }
    let span = breakpoints[breakpoints.len() - 1] - breakpoints[0];
    let mut converged = false;
    loop {
        let total: T = pairwise_sum(&heap.iter().map(|p| p.value).collect::<Vec<_>>());
        let err: f64 = heap.iter().map(|p| p.err).sum();
        if err <= opts.abs_tol.max(opts.rel_tol * total.magnitude()) {
            converged = true;
            break;
        }
        if heap.len() >= opts.max_intervals {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if (worst.b - worst.a) <= 1e-15 * span.max(worst.a.abs()).max(worst.b.abs()) || mid <= worst.a || mid >= worst.b {
            if !worst.err.is_finite() {
                return Err(Error::Quadrature(format!(
                    "non-finite integrand persists near {}",
                    worst.a
                )));
            }
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid)?;
        let (v2, e2) = gk15(&mut f, mid, worst.b)?;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
    }
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let abs_error = panels.iter().map(|p| p.err).sum::<f64>();
    if !abs_error.is_finite() {
        return Err(Error::Quadrature("integrand not finite on a panel".into()));
    }
    Ok(QuadResult {
        value: pairwise_sum(&panels.iter().map(|p| p.value).collect::<Vec<_>>()),
        abs_error,
        intervals: panels.len(),
        converged,
    })
}

/// Double-exponential rule on `[a, b]` for integrands with integrable
/// endpoint singularities. The integrand is passed the point and its
/// distances to `a` and `b` so callers can avoid cancellation at the ends.
pub fn tanh_sinh<T, F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: FnMut(f64, f64, f64) -> Result<T>,
{
    use std::f64::consts::FRAC_PI_2;
    let half = 0.5 * (b - a);
    let centre = 0.5 * (a + b);
    // 1 − x(t) = 2 / (1 + e^{π sinh t})
    let node = |t: f64| -> (f64, f64) {
        let u = FRAC_PI_2 * t.sinh();
        let one_minus = 2.0 / (1.0 + (2.0 * u).exp());
        let w = FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        (one_minus, w)
    };
    let centre_val = f(centre, half, half)? * FRAC_PI_2;
    let mut eval_pair = |t: f64| -> Result<T> {
        let (om, w) = node(t);
        if w == 0.0 || om == 0.0 {
            return Ok(T::zero());
        }
        // right point sits om·half from b, left point om·half from a
        let d = om * half;
        let right = f(b - d, (b - a) - d, d)?;
        let left = f(a + d, d, (b - a) - d)?;
        let v = (right + left) * w;
        Ok(if v.is_finite_value() { v } else { T::zero() })
    };
    let t_max = 4.0;
    let mut h = 0.5;
    let mut sum = centre_val;
    let mut k = 1;
    while k as f64 * h <= t_max {
        sum = sum + eval_pair(k as f64 * h)?;
        k += 1;
    }
    let mut estimate = sum * (h * half);
    let mut err = f64::INFINITY;
    for _level in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= t_max {
            sum = sum + eval_pair(k as f64 * h)?;
            k += 2;
        }
        let next = sum * (h * half);
        err = (next - estimate).magnitude();
        estimate = next;
        if err <= tol.max(1e-15 * estimate.magnitude()) {
            return Ok(QuadResult {
                value: estimate,
                abs_error: err,
                intervals: 1,
                converged: true,
            });
        }
    }
    Ok(QuadResult {
        value: estimate,
        abs_error: err,
        intervals: 1,
        converged: false,
    })
}
