//! Zeros of plant polynomials and of the fractional characteristic function.
//!
//! Polynomial roots come from simultaneous Aberth–Ehrlich iteration. Zeros
//! of `χ` are counted with the argument principle on rectangles and polished
//! with Newton's method; a bounded-rectangle count plus a growth check on the
//! outer edges gives a closed-loop stability certificate.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcmodel::{
    characteristic_scale, eval_characteristic, eval_characteristic_derivative, principal_power, unwrap_phase,
    FractionalPID, LoopModel, PoleRecord, Polynomial, RationalPlant, AXIS_TOLERANCE,
};

const MAX_ABERTH_ITERATIONS: usize = 500;

/// Relative modulus below which a boundary sample counts as hitting a zero.
pub const BOUNDARY_THRESHOLD: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Roots of `p` with multiplicities. Residuals are driven below
/// `tol · Σ|c_l||r|^l`; roots within `1e-7·(1 + |r|)` of each other are
/// merged.
pub fn polynomial_roots(p: &Polynomial, tol: f64) -> Result<Vec<(Complex64, usize)>> {
    polynomial_roots_with(p, tol, 1e-7)
}

pub fn polynomial_roots_with(p: &Polynomial, tol: f64, cluster_rel: f64) -> Result<Vec<(Complex64, usize)>> {
    let degree = match p.degree() {
        None => return Err(Error::InvalidParameter("roots of the zero polynomial".into())),
        Some(0) => return Err(Error::InvalidParameter("constant polynomial has no roots".into())),
        Some(d) => d,
    };
    // Zero roots split off exactly.
    let leading_zeros = p.coeffs().iter().take_while(|c| **c == Complex64::new(0.0, 0.0)).count();
    let reduced = Polynomial::new(p.coeffs()[leading_zeros..].to_vec());
    let mut roots = vec![c(0.0, 0.0); leading_zeros];
    if degree > leading_zeros {
        roots.extend(aberth(&reduced, tol)?);
    }
    Ok(cluster(roots, cluster_rel))
}

fn aberth(p: &Polynomial, tol: f64) -> Result<Vec<Complex64>> {
    let n = p.degree().expect("nonzero");
    let coeffs = p.coeffs();
    if n == 1 {
        return Ok(vec![-coeffs[0] / coeffs[1]]);
    }
    let dp = p.derivative();
    // initial guesses on a circle sized by the geometric mean of root moduli
    let radius = (coeffs[0].norm() / coeffs[n].norm()).powf(1.0 / n as f64).max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + 0.4))
        .collect();
    let mut done = vec![false; n];
    let floor = 8.0 * f64::EPSILON;
    for _ in 0..MAX_ABERTH_ITERATIONS {
        let mut all_done = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let zk = z[k];
            let pv = p.eval(zk);
            let scale = p.magnitude_bound(zk);
            if pv.norm() <= floor * scale {
                done[k] = true;
                continue;
            }
            all_done = false;
            let ratio = pv / dp.eval(zk);
            let repulsion: Complex64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (zk - z[j])).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[k] = zk - step;
                if step.norm() <= f64::EPSILON * zk.norm() {
                    done[k] = true;
                }
            } else {
                // perturb off a degenerate configuration
                z[k] = zk + Complex64::from_polar(1e-3 * (1.0 + zk.norm()), k as f64);
            }
        }
        if all_done {
            break;
        }
    }
    let bad: Vec<_> = z
        .iter()
        .filter(|&&r| p.eval(r).norm() > tol.max(floor) * p.magnitude_bound(r))
        .collect();
    if !bad.is_empty() {
        return Err(Error::NonConvergence {
            iterations: MAX_ABERTH_ITERATIONS,
            best: z,
        });
    }
    Ok(z)
}

fn cluster(mut roots: Vec<Complex64>, cluster_rel: f64) -> Vec<(Complex64, usize)> {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let radius = cluster_rel * (1.0 + roots[i].norm().max(roots[j].norm()));
            if (roots[i] - roots[j]).norm() < radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[b] = a;
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(g, _)| *g == r) {
            Some((_, v)) => v.push(roots[i]),
            None => groups.push((r, vec![roots[i]])),
        }
    }
    groups
        .into_iter()
        .map(|(_, v)| {
            let mean = v.iter().sum::<Complex64>() / v.len() as f64;
            (mean, v.len())
        })
        .collect()
}

/// Right-half-plane roots of the plant denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhpPoles {
    /// Sorted by nondecreasing modulus.
    pub poles: Vec<PoleRecord>,
    /// Roots within the axis tolerance of the imaginary axis.
    pub marginal: Vec<Complex64>,
}

pub fn rhp_open_loop_poles(plant: &RationalPlant) -> Result<RhpPoles> {
    if plant.m() == 0 {
        return Ok(RhpPoles {
            poles: Vec::new(),
            marginal: Vec::new(),
        });
    }
    let roots = polynomial_roots(plant.den(), 1e-10)?;
    let mut poles = Vec::new();
    let mut marginal = Vec::new();
    for (r, mult) in roots {
        if r.re.abs() <= AXIS_TOLERANCE {
            marginal.push(r);
        } else if r.re > AXIS_TOLERANCE {
            poles.push(PoleRecord::new(r, mult as f64)?);
        }
    }
    poles.sort_by(|a, b| {
        a.location
            .norm()
            .total_cmp(&b.location.norm())
            .then(a.location.im.total_cmp(&b.location.im))
    });
    Ok(RhpPoles { poles, marginal })
}

/// Axis-aligned search region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rectangle {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if !(re_min < re_max && im_min < im_max) {
            return Err(Error::InvalidParameter(format!(
                "degenerate rectangle [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    pub fn contains(&self, s: Complex64) -> bool {
        s.re > self.re_min && s.re < self.re_max && s.im > self.im_min && s.im < self.im_max
    }

    /// Corners in counterclockwise order starting bottom-left.
    fn corners(&self) -> [Complex64; 4] {
        [
            c(self.re_min, self.im_min),
            c(self.re_max, self.im_min),
            c(self.re_max, self.im_max),
            c(self.re_min, self.im_max),
        ]
    }
}

/// A function whose zeros can be counted: value plus a magnitude scale
/// used to judge when a value is "numerically zero".
pub trait Analytic {
    fn value(&self, s: Complex64) -> Result<Complex64>;
    fn scale(&self, s: Complex64) -> f64;
}

impl Analytic for Polynomial {
    fn value(&self, s: Complex64) -> Result<Complex64> {
        Ok(self.eval(s))
    }
    fn scale(&self, s: Complex64) -> f64 {
        self.magnitude_bound(s)
    }
}

/// `χ` of a rational loop. Without integral action the common factor
/// `s^β` carries no zeros off the origin and is divided out, so the
/// counting contour may pass close to `s = 0`.
#[derive(Debug, Clone)]
pub struct Characteristic<'a> {
    plant: &'a RationalPlant,
    pid: &'a FractionalPID,
    reduced: bool,
}

impl<'a> Characteristic<'a> {
    pub fn new(plant: &'a RationalPlant, pid: &'a FractionalPID) -> Self {
        Self {
            plant,
            pid,
            reduced: pid.km1 == 0.0,
        }
    }

    pub fn of(model: &'a LoopModel) -> Result<Self> {
        match model {
            LoopModel::RationalFractal { plant, pid } => Ok(Self::new(plant, pid)),
            LoopModel::Synthetic(_) => Err(Error::InvalidParameter(
                "characteristic function is defined for rational loops only".into(),
            )),
        }
    }

    /// Exponent/coefficient pairs of the function as a generalized polynomial.
    pub fn terms(&self) -> Vec<(Complex64, f64)> {
        let (a, b) = (self.pid.alpha, self.pid.beta);
        let shift = if self.reduced { b } else { 0.0 };
        let mut terms: Vec<(Complex64, f64)> = Vec::new();
        let mut push = |coef: Complex64, exp: f64| {
            if coef == Complex64::new(0.0, 0.0) {
                return;
            }
            match terms.iter_mut().find(|(_, e)| (*e - exp).abs() < 1e-12) {
                Some(t) => t.0 += coef,
                None => terms.push((coef, exp)),
            }
        };
        for (l, &bl) in self.plant.den().coeffs().iter().enumerate() {
            push(bl, l as f64 + b - shift);
        }
        for (l, &al) in self.plant.num().coeffs().iter().enumerate() {
            push(al * self.pid.k1, l as f64 + a + b - shift);
            push(al * self.pid.k0, l as f64 + b - shift);
            push(al * self.pid.km1, l as f64 - shift);
        }
        terms.retain(|(c, _)| *c != Complex64::new(0.0, 0.0));
        terms.sort_by(|x, y| x.1.total_cmp(&y.1));
        terms
    }

    /// Term with the largest exponent.
    pub fn leading_term(&self) -> Option<(Complex64, f64)> {
        self.terms().last().copied()
    }
}

impl Analytic for Characteristic<'_> {
    fn value(&self, s: Complex64) -> Result<Complex64> {
        let v = eval_characteristic(self.plant, self.pid, s)?;
        if self.reduced {
            Ok(v / principal_power(s, self.pid.beta)?)
        } else {
            Ok(v)
        }
    }
    fn scale(&self, s: Complex64) -> f64 {
        let full = characteristic_scale(self.plant, self.pid, s);
        if self.reduced {
            full / s.norm().powf(self.pid.beta)
        } else {
            full
        }
    }
}

/// Winding data along a closed polygonal boundary.
#[derive(Debug, Clone, Copy)]
pub struct Winding {
    pub count: i64,
    /// Smallest `|f| / scale` seen on the boundary.
    pub min_relative_modulus: f64,
}

/// Accumulated phase change of `f` along the straight segment `a → b`,
/// subdividing until each step is under `π/4` and the image chord stays
/// away from the origin.
fn phase_change<F: Analytic + ?Sized>(f: &F, a: Complex64, b: Complex64, min_rel: &mut f64) -> Result<f64> {
    const INITIAL: usize = 64;
    let length = (b - a).norm();
    let sample = |t: f64, min_rel: &mut f64| -> Result<Complex64> {
        let s = a + (b - a) * t;
        let v = f.value(s)?;
        let scale = f.scale(s).max(f64::MIN_POSITIVE);
        let rel = v.norm() / scale;
        *min_rel = min_rel.min(rel);
        if rel <= BOUNDARY_THRESHOLD || v.norm() == 0.0 {
            return Err(Error::BoundaryZero { min_modulus: rel });
        }
        Ok(v)
    };
    let mut stack: Vec<(f64, Complex64, f64, Complex64)> = Vec::new();
    let mut prev_t = 0.0;
    let mut prev_v = sample(0.0, min_rel)?;
    for k in 1..=INITIAL {
        let t = k as f64 / INITIAL as f64;
        let v = sample(t, min_rel)?;
        stack.push((prev_t, prev_v, t, v));
        prev_t = t;
        prev_v = v;
    }
    stack.reverse();
    let mut total = 0.0;
    while let Some((ta, va, tb, vb)) = stack.pop() {
        let step = (vb / va).arg();
        let chord = (vb - va).norm();
        if step.abs() <= PI / 4.0 && chord <= 0.5 * va.norm().min(vb.norm()) {
            total += step;
            continue;
        }
        if (tb - ta) * length <= 1e-13 * (1.0 + a.norm().max(b.norm())) {
            return Err(Error::BoundaryZero { min_modulus: *min_rel });
        }
        let tm = 0.5 * (ta + tb);
        let vm = sample(tm, min_rel)?;
        // process the left half first
        stack.push((tm, vm, tb, vb));
        stack.push((ta, va, tm, vm));
    }
    Ok(total)
}

/// Argument-principle winding of `f` along the closed polygon `vertices`.
pub fn winding_polygon<F: Analytic + ?Sized>(f: &F, vertices: &[Complex64]) -> Result<Winding> {
    let mut min_rel = f64::INFINITY;
    let mut total = 0.0;
    for k in 0..vertices.len() {
        let a = vertices[k];
        let b = vertices[(k + 1) % vertices.len()];
        total += phase_change(f, a, b, &mut min_rel)?;
    }
    let turns = total / (2.0 * PI);
    let count = turns.round();
    if (turns - count).abs() > 0.05 {
        return Err(Error::Quadrature(format!("winding {turns} not near an integer")));
    }
    Ok(Winding {
        count: count as i64,
        min_relative_modulus: min_rel,
    })
}

/// Number of zeros (with multiplicity) of `f` inside `rect`.
pub fn count_zeros_rect<F: Analytic + ?Sized>(f: &F, rect: &Rectangle) -> Result<i64> {
    Ok(winding_polygon(f, &rect.corners())?.count)
}

/// Number of zeros of the loop's characteristic function inside `rect`.
pub fn count_characteristic_zeros(model: &LoopModel, rect: &Rectangle) -> Result<i64> {
    count_zeros_rect(&Characteristic::of(model)?, rect)
}

/// Winding of `f` around a circle, approximated by a fine polygon.
pub fn winding_circle<F: Analytic + ?Sized>(f: &F, centre: Complex64, radius: f64) -> Result<i64> {
    let n = 32;
    let verts: Vec<_> = (0..n)
        .map(|k| centre + Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64))
        .collect();
    Ok(winding_polygon(f, &verts)?.count)
}

/// Newton refinement of a zero of `χ` in the right half plane; the order
/// is the winding number on a small surrounding circle.
pub fn refine_zero(model: &LoopModel, seed: Complex64, tol: f64) -> Result<(Complex64, usize)> {
    let LoopModel::RationalFractal { plant, pid } = model else {
        return Err(Error::InvalidParameter("refine_zero needs a rational loop".into()));
    };
    let mut s = seed;
    let mut converged = false;
    for _ in 0..200 {
        let v = eval_characteristic(plant, pid, s)?;
        if v.norm() < tol {
            converged = true;
            break;
        }
        let d = eval_characteristic_derivative(plant, pid, s)?;
        if d.norm() == 0.0 {
            return Err(Error::Refinement(format!("vanishing derivative at {s}")));
        }
        let step = v / d;
        s -= step;
        if !(s.re > AXIS_TOLERANCE) || !s.re.is_finite() || !s.im.is_finite() {
            return Err(Error::Refinement(format!("iterate left the right half plane at {s}")));
        }
        if step.norm() <= 4.0 * f64::EPSILON * s.norm() {
            converged = eval_characteristic(plant, pid, s)?.norm() < tol.max(1e3 * f64::EPSILON * characteristic_scale(plant, pid, s));
            break;
        }
    }
    if !converged {
        return Err(Error::Refinement(format!("no convergence from seed {seed}; last iterate {s}")));
    }
    let radius = 0.05 * s.norm().min(1.0);
    let order = winding_circle(&Characteristic::new(plant, pid), s, radius)?;
    if order < 1 {
        return Err(Error::Refinement(format!("winding {order} around {s} is not a zero")));
    }
    Ok((s, order as usize))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
}

/// Closed-loop stability evidence on a bounded right-half-plane rectangle.
///
/// This is a heuristic construction: the rectangle count is exact up to
/// sampling, the region outside it is covered by a leading-term growth
/// check rather than a proof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    pub region: Rectangle,
    pub zero_count: i64,
    pub boundary_min_modulus: f64,
    pub growth_ok: bool,
    pub verdict: Verdict,
}

/// Smallest radius beyond which the top term of `terms` dominates the rest
/// by the factor `ratio`: `Σ_other |c_k| r^(e_k) ≤ ratio · |c_top| r^(e_top)`.
pub fn dominance_radius(terms: &[(Complex64, f64)], ratio: f64) -> f64 {
    let Some(&(top, e_top)) = terms.last() else { return 0.0 };
    let g = |r: f64| -> f64 {
        terms[..terms.len() - 1]
            .iter()
            .map(|(c, e)| c.norm() / top.norm() * r.powf(e - e_top))
            .sum()
    };
    if terms.len() == 1 {
        return 0.0;
    }
    let (mut lo, mut hi) = (1e-12f64, 1.0f64);
    while g(hi) > ratio {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    if g(lo) <= ratio {
        return lo;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if g(mid) > ratio {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-12 {
            break;
        }
    }
    hi
}

/// Default search extent: ten times the plant's natural scale, widened to
/// where the leading term of `χ` dominates the others by a factor of two.
pub fn default_search_extent(model: &LoopModel) -> Result<f64> {
    let LoopModel::RationalFractal { plant, pid } = model else {
        return Err(Error::InvalidParameter("stability search needs a rational loop".into()));
    };
    let mut scale: f64 = 0.0;
    for p in [plant.den(), plant.num()] {
        if p.degree().unwrap_or(0) >= 1 {
            for (r, _) in polynomial_roots(p, 1e-10)? {
                scale = scale.max(r.norm());
            }
        }
    }
    let natural = 10.0 * (1.0 + scale);
    let dominance = dominance_radius(&Characteristic::new(plant, pid).terms(), 0.5);
    Ok(natural.max(1.05 * dominance))
}

/// Counts zeros of `χ` in `[axis_tol, re_max] × [−im_max, im_max]` and
/// checks that the leading term dominates along the three outer edges,
/// `|χ − lead| ≤ ½|lead|` (so in particular `|χ| ≥ ½|lead|`).
pub fn certify_stability(model: &LoopModel, re_max: f64, im_max: f64) -> Result<StabilityCertificate> {
    let chi = Characteristic::of(model)?;
    let region = Rectangle::new(AXIS_TOLERANCE, re_max, -im_max, im_max)?;
    let (zero_count, min_rel) = match winding_polygon(&chi, &region.corners()) {
        Ok(w) => (w.count, w.min_relative_modulus),
        Err(Error::BoundaryZero { min_modulus }) => {
            return Ok(StabilityCertificate {
                region,
                zero_count: 0,
                boundary_min_modulus: min_modulus,
                growth_ok: false,
                verdict: Verdict::Inconclusive,
            })
        }
        Err(e) => return Err(e),
    };
    let growth_ok = growth_check(&chi, &region)?;
    let verdict = if zero_count > 0 {
        Verdict::Unstable
    } else if min_rel > BOUNDARY_THRESHOLD && growth_ok {
        Verdict::Stable
    } else {
        Verdict::Inconclusive
    };
    Ok(StabilityCertificate {
        region,
        zero_count,
        boundary_min_modulus: min_rel,
        growth_ok,
        verdict,
    })
}

/// Certificate over the default search extent.
pub fn certify_stability_default(model: &LoopModel) -> Result<StabilityCertificate> {
    let extent = default_search_extent(model)?;
    certify_stability(model, extent, extent)
}

fn growth_check(chi: &Characteristic<'_>, rect: &Rectangle) -> Result<bool> {
    let Some((lead_c, lead_e)) = chi.leading_term() else { return Ok(false) };
    let [bl, br, tr, tl] = rect.corners();
    let edges = [(bl, br), (br, tr), (tr, tl)];
    let n = 2000;
    for (a, b) in edges {
        for k in 0..=n {
            let s = a + (b - a) * (k as f64 / n as f64);
            let v = chi.value(s)?;
            let lead = lead_c * principal_power(s, lead_e)?;
            if (v - lead).norm() > 0.5 * lead.norm() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Phase-continuous sampling helper: accumulated argument change of `f`
/// along an arbitrary sample path.
pub fn accumulated_phase(values: &[Complex64]) -> f64 {
    let mut phase = values.first().map(|v| v.arg()).unwrap_or(0.0);
    let start = phase;
    for v in values.iter().skip(1) {
        phase = unwrap_phase(v.arg(), phase);
    }
    phase - start
}
