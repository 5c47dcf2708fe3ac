//! The closed branch-cut contour and its pieces.
//!
//! Orientation used throughout: the imaginary axis is run upward from
//! `−iR` to `iR`; each right-half-plane zero `p` of `S` is reached through a
//! corridor, lower lip inward, an ε-circle counterclockwise, upper lip
//! outward; an optional ε-semicircle indents the origin; the outer arc
//! closes the path with `θ: π/2 → −π/2`.
//!
//! With this orientation a corridor pair contributes `−2πi·d·Re p` and the
//! closure identity reads `I = 4π Σ d Re p + Re(2i·A)`, `A` being the limit
//! of the arc integral.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcmodel::{eval_log_sensitivity, unwrap_phase, LoopModel, PoleRecord};
use crate::quad::{integrate, QuadOptions};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LipSide {
    Lower,
    Upper,
}

/// One piece of the contour, parameterized over `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathSegment {
    /// `c + r·e^{iθ}`; the outer arc runs `π/2 → −π/2`.
    Arc {
        center: Complex64,
        radius: f64,
        theta_start: f64,
        theta_end: f64,
    },
    /// `pole + e^{i·tilt}·(−t ∓ i·width)`, `−` on the lower lip. `t` is the
    /// distance from the pole measured along the corridor.
    Lip {
        pole: Complex64,
        t_start: f64,
        t_end: f64,
        side: LipSide,
        width: f64,
        tilt: f64,
    },
    /// Like `Arc`, but around a zero of `S` or the origin; counterclockwise
    /// when `theta_end > theta_start`.
    Circle {
        center: Complex64,
        radius: f64,
        theta_start: f64,
        theta_end: f64,
    },
    /// `i·y` for `y` from `im_start` to `im_end`.
    AxisRun { im_start: f64, im_end: f64 },
}

impl PathSegment {
    pub fn point(&self, t: f64) -> Complex64 {
        match *self {
            PathSegment::Arc { center, radius, theta_start, theta_end }
            | PathSegment::Circle { center, radius, theta_start, theta_end } => {
                center + Complex64::from_polar(radius, theta_start + t * (theta_end - theta_start))
            }
            PathSegment::Lip { pole, t_start, t_end, side, width, tilt } => {
                let along = t_start + t * (t_end - t_start);
                pole + Complex64::from_polar(1.0, tilt) * Complex64::new(-along, -side_sign(side) * width)
            }
            PathSegment::AxisRun { im_start, im_end } => Complex64::new(0.0, im_start + t * (im_end - im_start)),
        }
    }

    /// `ds/dt`.
    pub fn velocity(&self, t: f64) -> Complex64 {
        match *self {
            PathSegment::Arc { radius, theta_start, theta_end, .. }
            | PathSegment::Circle { radius, theta_start, theta_end, .. } => {
                let theta = theta_start + t * (theta_end - theta_start);
                I * Complex64::from_polar(radius, theta) * (theta_end - theta_start)
            }
            PathSegment::Lip { t_start, t_end, tilt, .. } => -Complex64::from_polar(1.0, tilt) * (t_end - t_start),
            PathSegment::AxisRun { im_start, im_end } => I * (im_end - im_start),
        }
    }

    pub fn start(&self) -> Complex64 {
        self.point(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.point(1.0)
    }

    /// Same path traversed backwards.
    pub fn reversed(&self) -> Self {
        match *self {
            PathSegment::Arc { center, radius, theta_start, theta_end } => PathSegment::Arc {
                center,
                radius,
                theta_start: theta_end,
                theta_end: theta_start,
            },
            PathSegment::Circle { center, radius, theta_start, theta_end } => PathSegment::Circle {
                center,
                radius,
                theta_start: theta_end,
                theta_end: theta_start,
            },
            PathSegment::Lip { pole, t_start, t_end, side, width, tilt } => PathSegment::Lip {
                pole,
                t_start: t_end,
                t_end: t_start,
                side,
                width,
                tilt,
            },
            PathSegment::AxisRun { im_start, im_end } => PathSegment::AxisRun {
                im_start: im_end,
                im_end: im_start,
            },
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PathSegment::Arc { .. } => "arc",
            PathSegment::Lip { side: LipSide::Lower, .. } => "lip-lower",
            PathSegment::Lip { side: LipSide::Upper, .. } => "lip-upper",
            PathSegment::Circle { .. } => "circle",
            PathSegment::AxisRun { .. } => "axis",
        }
    }

    /// Parameter values worth splitting at: decades along long axis runs.
    fn natural_breaks(&self) -> Vec<f64> {
        let mut t = vec![0.0, 1.0];
        match *self {
            PathSegment::AxisRun { im_start, im_end } => {
                let len = im_end - im_start;
                let mut mag: f64 = 1e-3;
                while mag < im_start.abs().max(im_end.abs()) {
                    for y in [mag, -mag] {
                        let u = (y - im_start) / len;
                        if u > 1e-9 && u < 1.0 - 1e-9 {
                            t.push(u);
                        }
                    }
                    mag *= 10.0;
                }
                t.push(0.5);
            }
            _ => t.extend([0.25, 0.5, 0.75]),
        }
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }
}

fn side_sign(side: LipSide) -> f64 {
    match side {
        LipSide::Lower => 1.0,
        LipSide::Upper => -1.0,
    }
}

/// Geometry of the full contour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub radius: f64,
    pub eps: f64,
    pub corridor_width: f64,
    pub poles: Vec<PoleRecord>,
    pub origin_indent: bool,
    /// Angle step used to tilt corridors that would otherwise collide; 0
    /// turns collisions into errors.
    pub tilt: f64,
}

impl ContourSpec {
    /// Contour around the model's known zeros, indenting the origin when
    /// `S(0) = 0`.
    pub fn for_model(model: &LoopModel, radius: f64, eps: f64, corridor_width: f64) -> Self {
        Self {
            radius,
            eps,
            corridor_width,
            poles: model.rhp_zeros(),
            origin_indent: model.vanishes_at_origin(),
            tilt: 0.3,
        }
    }
}

struct Corridor {
    pole: Complex64,
    tilt: f64,
    lower: (f64, f64),
    upper: (f64, f64),
}

impl Corridor {
    fn new(pole: Complex64, tilt: f64, w: f64) -> Self {
        let (c, s) = (tilt.cos(), tilt.sin());
        let t_lower = (pole.re + w * s) / c;
        let t_upper = (pole.re - w * s) / c;
        Self {
            pole,
            tilt,
            lower: (t_lower, pole.im - t_lower * s - w * c),
            upper: (t_upper, pole.im - t_upper * s + w * c),
        }
    }

    /// Axis crossing of the centre line.
    fn axis_im(&self) -> f64 {
        self.pole.im - self.pole.re * self.tilt.tan()
    }

    fn axis_point(&self) -> Complex64 {
        Complex64::new(0.0, self.axis_im())
    }

    fn distance_to(&self, z: Complex64) -> f64 {
        segment_distance(self.axis_point(), self.pole, z)
    }
}

fn segment_distance(a: Complex64, b: Complex64, z: Complex64) -> f64 {
    let ab = b - a;
    let u = ((z - a) * ab.conj()).re / ab.norm_sqr();
    (a + ab * u.clamp(0.0, 1.0) - z).norm()
}

fn segments_cross(a1: Complex64, b1: Complex64, a2: Complex64, b2: Complex64) -> bool {
    let cross = |o: Complex64, p: Complex64, q: Complex64| ((p - o).conj() * (q - o)).im;
    let d1 = cross(a1, b1, a2);
    let d2 = cross(a1, b1, b2);
    let d3 = cross(a2, b2, a1);
    let d4 = cross(a2, b2, b1);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn validate_spec(spec: &ContourSpec) -> Result<()> {
    if !(spec.eps > 0.0) || !(spec.corridor_width > 0.0) || spec.corridor_width >= spec.eps {
        return Err(Error::Geometry(format!(
            "need 0 < corridor width ({}) < eps ({})",
            spec.corridor_width, spec.eps
        )));
    }
    for (i, p) in spec.poles.iter().enumerate() {
        if spec.radius <= p.location.norm() + 1.0 {
            return Err(Error::Geometry(format!(
                "zero {} lies outside radius {} minus one",
                p.location, spec.radius
            )));
        }
        for q in &spec.poles[i + 1..] {
            if (p.location - q.location).norm() <= 2.0 * spec.eps {
                return Err(Error::Geometry(format!(
                    "eps {} is not below half the distance between {} and {}",
                    spec.eps, p.location, q.location
                )));
            }
        }
    }
    Ok(())
}

/// Places corridors in order of increasing real part, tilting any that
/// would touch an earlier one.
fn place_corridors(spec: &ContourSpec) -> Result<Vec<Corridor>> {
    let w = spec.corridor_width;
    let clearance = spec.eps + w;
    let mut order: Vec<&PoleRecord> = spec.poles.iter().collect();
    order.sort_by(|a, b| a.location.re.total_cmp(&b.location.re).then(a.location.im.total_cmp(&b.location.im)));
    let mut placed: Vec<Corridor> = Vec::new();
    for p in order {
        let fits = |c: &Corridor| {
            spec.poles
                .iter()
                .filter(|q| q.location != c.pole)
                .all(|q| c.distance_to(q.location) > clearance)
                && placed.iter().all(|o| {
                    (o.axis_im() - c.axis_im()).abs() > 2.0 * w
                        && !segments_cross(o.axis_point(), o.pole, c.axis_point(), c.pole)
                        && o.distance_to(c.pole) > clearance
                })
        };
        let mut candidates = vec![0.0];
        if spec.tilt != 0.0 {
            for k in 1..=4 {
                let a = k as f64 * spec.tilt;
                if a < 1.4 {
                    candidates.extend([-a, a]);
                }
            }
        }
        let chosen = candidates.into_iter().map(|t| Corridor::new(p.location, t, w)).find(|c| fits(c));
        match chosen {
            Some(c) => placed.push(c),
            None => {
                let other = spec
                    .poles
                    .iter()
                    .map(|q| q.location)
                    .filter(|&q| q != p.location)
                    .min_by(|a, b| (a.im - p.location.im).abs().total_cmp(&(b.im - p.location.im).abs()))
                    .unwrap_or(p.location);
                return Err(Error::CorridorCollision { a: other, b: p.location });
            }
        }
    }
    placed.sort_by(|a, b| a.axis_im().total_cmp(&b.axis_im()));
    Ok(placed)
}

/// Ordered segments of the closed contour described by `spec`.
pub fn build_contour(spec: &ContourSpec) -> Result<Vec<PathSegment>> {
    validate_spec(spec)?;
    let corridors = place_corridors(spec)?;
    let (r, eps, w) = (spec.radius, spec.eps, spec.corridor_width);
    let covers_origin = corridors.iter().any(|c| c.lower.1 < 0.0 && c.upper.1 > 0.0);
    let mut segs = Vec::new();
    let mut y = -r;
    let push_run = |segs: &mut Vec<PathSegment>, from: f64, to: f64| -> Result<()> {
        if spec.origin_indent && !covers_origin && from < eps && to > -eps {
            if !(from < -eps && to > eps) {
                return Err(Error::Geometry(format!(
                    "origin indent of radius {eps} overlaps a corridor; reduce eps"
                )));
            }
            segs.push(PathSegment::AxisRun { im_start: from, im_end: -eps });
            segs.push(PathSegment::Circle {
                center: Complex64::new(0.0, 0.0),
                radius: eps,
                theta_start: -FRAC_PI_2,
                theta_end: FRAC_PI_2,
            });
            segs.push(PathSegment::AxisRun { im_start: eps, im_end: to });
        } else {
            segs.push(PathSegment::AxisRun { im_start: from, im_end: to });
        }
        Ok(())
    };
    let t_circle = (eps * eps - w * w).sqrt();
    let gap = (w / eps).asin();
    for c in &corridors {
        push_run(&mut segs, y, c.lower.1)?;
        segs.push(PathSegment::Lip {
            pole: c.pole,
            t_start: c.lower.0,
            t_end: t_circle,
            side: LipSide::Lower,
            width: w,
            tilt: c.tilt,
        });
        segs.push(PathSegment::Circle {
            center: c.pole,
            radius: eps,
            theta_start: c.tilt - PI + gap,
            theta_end: c.tilt + PI - gap,
        });
        segs.push(PathSegment::Lip {
            pole: c.pole,
            t_start: t_circle,
            t_end: c.upper.0,
            side: LipSide::Upper,
            width: w,
            tilt: c.tilt,
        });
        y = c.upper.1;
    }
    push_run(&mut segs, y, r)?;
    segs.push(PathSegment::Arc {
        center: Complex64::new(0.0, 0.0),
        radius: r,
        theta_start: FRAC_PI_2,
        theta_end: -FRAC_PI_2,
    });
    Ok(segs)
}

/// Tolerances for one segment integral.
#[derive(Debug, Clone, Copy)]
pub struct SegmentOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for SegmentOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
        }
    }
}

/// `∫ log S ds` over one segment, with the phase it started and ended on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentIntegral {
    pub value: Complex64,
    pub start_phase: f64,
    pub end_phase: f64,
    pub abs_error: f64,
    pub converged: bool,
}

/// Known points where the phase of `S` can turn quickly, with weights
/// bounding how many half-turns each contributes: zeros and poles of a
/// synthetic product, or the plant poles and the origin of a rational loop.
fn phase_singularities(model: &LoopModel) -> Vec<(Complex64, f64)> {
    match model {
        LoopModel::Synthetic(syn) => {
            let mut pts: Vec<(Complex64, f64)> = syn
                .factors()
                .iter()
                .flat_map(|f| [(f.location, f.order), (-f.location.conj(), f.order)])
                .collect();
            let outer = syn.outer();
            pts.extend(outer.zeros.iter().chain(&outer.poles).map(|&z| (z, 1.0)));
            pts
        }
        LoopModel::RationalFractal { plant, .. } => {
            let mut pts = vec![(Complex64::new(0.0, 0.0), 2.0)];
            if plant.den().degree().unwrap_or(0) >= 1 {
                if let Ok(roots) = crate::rootfind::polynomial_roots(plant.den(), 1e-10) {
                    pts.extend(roots.into_iter().map(|(r, m)| (r, m as f64)));
                }
            }
            pts
        }
    }
}

/// Upper bound on the phase change of `S` between two nearby points, from
/// the angle each singular point subtends.
fn subtended_bound(points: &[(Complex64, f64)], a: Complex64, m: Complex64, b: Complex64) -> f64 {
    let h = (m - a).norm() + (b - m).norm();
    let mut total = 0.0;
    for &(z, w) in points {
        let d = (m - z).norm() - 0.5 * h;
        if d <= 0.0 {
            return f64::INFINITY;
        }
        total += w * h / d;
    }
    total
}

/// Continuous phase of `log S` along a segment, sampled until consecutive
/// samples differ by less than π/4 and the subtended-angle bound rules out
/// a full turn hiding between them.
struct PhaseTrace {
    t: Vec<f64>,
    phase: Vec<f64>,
}

impl PhaseTrace {
    fn new(model: &LoopModel, seg: &PathSegment, anchor: Option<f64>) -> Result<Self> {
        let principal = |t: f64| -> Result<f64> { Ok(eval_log_sensitivity(model, seg.point(t), None)?.im) };
        let singular = phase_singularities(model);
        let n0 = 64;
        let mut t: Vec<f64> = (0..=n0).map(|k| k as f64 / n0 as f64).collect();
        let mut raw: Vec<f64> = t.iter().map(|&x| principal(x)).collect::<Result<_>>()?;
        for _pass in 0..80 {
            let phase = unwrap_sequence(&raw, anchor);
            let mut inserts = Vec::new();
            for k in 0..t.len() - 1 {
                let step = (phase[k + 1] - phase[k]).abs();
                let mid = 0.5 * (t[k] + t[k + 1]);
                let exhausted = mid <= t[k] || mid >= t[k + 1] || t[k + 1] - t[k] < 1e-14;
                if step > PI / 4.0 {
                    if exhausted {
                        if step > FRAC_PI_2 {
                            return Err(Error::BranchTracking { step });
                        }
                        continue;
                    }
                    inserts.push((k + 1, mid));
                } else if !exhausted
                    && subtended_bound(&singular, seg.point(t[k]), seg.point(mid), seg.point(t[k + 1])) > FRAC_PI_2
                {
                    inserts.push((k + 1, mid));
                }
            }
            if inserts.is_empty() {
                return Ok(Self { t, phase });
            }
            if t.len() + inserts.len() > 400_000 {
                return Err(Error::BranchTracking { step: PI });
            }
            for (pos, mid) in inserts.into_iter().rev() {
                raw.insert(pos, principal(mid)?);
                t.insert(pos, mid);
            }
        }
        Err(Error::BranchTracking { step: PI })
    }

    /// Linear interpolation of the traced phase.
    fn reference(&self, x: f64) -> f64 {
        let k = self.t.partition_point(|&v| v <= x).clamp(1, self.t.len() - 1);
        let (t0, t1) = (self.t[k - 1], self.t[k]);
        let u = if t1 > t0 { (x - t0) / (t1 - t0) } else { 0.0 };
        self.phase[k - 1] + u * (self.phase[k] - self.phase[k - 1])
    }
}

fn unwrap_sequence(raw: &[f64], anchor: Option<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    let mut prev = match anchor {
        Some(a) => unwrap_phase(raw[0], a),
        None => raw[0],
    };
    out.push(prev);
    for &r in &raw[1..] {
        prev = unwrap_phase(r, prev);
        out.push(prev);
    }
    out
}

/// `∫_seg log S(s) ds` starting on the principal branch.
pub fn integrate_segment(model: &LoopModel, seg: &PathSegment, tol: f64) -> Result<Complex64> {
    let opts = SegmentOptions { rel_tol: tol, ..Default::default() };
    Ok(integrate_segment_from(model, seg, opts, None)?.value)
}

/// `∫_seg log S(s) ds` with the branch fixed by continuity from `anchor`
/// (the phase at the segment start), or the principal value when `None`.
pub fn integrate_segment_from(
    model: &LoopModel,
    seg: &PathSegment,
    opts: SegmentOptions,
    anchor: Option<f64>,
) -> Result<SegmentIntegral> {
    let trace = PhaseTrace::new(model, seg, anchor)?;
    let f = |t: f64| -> Result<Complex64> {
        let raw = eval_log_sensitivity(model, seg.point(t), None)?;
        let v = Complex64::new(raw.re, unwrap_phase(raw.im, trace.reference(t)));
        Ok(v * seg.velocity(t))
    };
    let r = integrate(
        f,
        &seg.natural_breaks(),
        QuadOptions {
            abs_tol: opts.abs_tol,
            rel_tol: opts.rel_tol,
            max_intervals: 20_000,
        },
    )?;
    Ok(SegmentIntegral {
        value: r.value,
        start_phase: trace.phase[0],
        end_phase: *trace.phase.last().expect("trace is never empty"),
        abs_error: r.abs_error,
        converged: r.converged,
    })
}

/// Integrates consecutive segments, threading the phase from one to the next.
pub fn integrate_path(
    model: &LoopModel,
    segs: &[PathSegment],
    opts: SegmentOptions,
    anchor: Option<f64>,
) -> Result<Vec<SegmentIntegral>> {
    let mut phase = anchor;
    let mut out = Vec::with_capacity(segs.len());
    for seg in segs {
        let r = integrate_segment_from(model, seg, opts, phase)?;
        phase = Some(r.end_phase);
        out.push(r);
    }
    Ok(out)
}

/// Outcome of one lemma check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub name: String,
    /// Radii, circle radii or corridor widths.
    pub parameters: Vec<f64>,
    pub values: Vec<Complex64>,
    pub magnitudes: Vec<f64>,
    /// Fitted exponent, or `|limit|` for corridor pairs.
    pub fitted: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Extrapolated limit, where one is meaningful.
    pub limit: Option<Complex64>,
    pub notes: Vec<String>,
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn check_ladder(name: &str, v: &[f64]) -> Result<()> {
    if v.len() < 3 {
        return Err(Error::InvalidParameter(format!("{name} needs at least three values, got {}", v.len())));
    }
    if v.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("{name} values must be positive and finite")));
    }
    Ok(())
}

fn outer_arc(radius: f64) -> PathSegment {
    PathSegment::Arc {
        center: Complex64::new(0.0, 0.0),
        radius,
        theta_start: FRAC_PI_2,
        theta_end: -FRAC_PI_2,
    }
}

fn arc_options(radius: f64) -> SegmentOptions {
    SegmentOptions {
        rel_tol: 1e-10,
        abs_tol: 1e-300_f64.max(1e-16 * radius),
    }
}

/// Outer-arc integral at radius `R`, starting on the principal branch at `iR`.
pub fn arc_integral(model: &LoopModel, radius: f64) -> Result<Complex64> {
    Ok(integrate_segment_from(model, &outer_arc(radius), arc_options(radius), None)?.value)
}

/// Allowed deviation of a fitted log-log slope.
pub const SLOPE_TOLERANCE: f64 = 0.1;
/// Allowed relative deviation of the `ε·ln(1/ε)` exponent from 1.
pub const EPS_EXPONENT_TOLERANCE: f64 = 0.2;
/// Allowed relative deviation of a corridor-pair limit.
pub const CORRIDOR_TOLERANCE: f64 = 1e-3;

/// Arc integrals over `radii`, fitted against `R^(1−q)` where `L ≈ c·s^(−q)`.
pub fn verify_lemma_arc(model: &LoopModel, radii: &[f64]) -> Result<LemmaReport> {
    check_ladder("radius ladder", radii)?;
    let Some((_, q)) = crate::bodeint::leading_loop_term(model) else {
        return Err(Error::InvalidParameter("arc lemma needs a rational loop with a nonzero loop gain".into()));
    };
    let expected = 1.0 - q;
    let values = radii.iter().map(|&r| arc_integral(model, r)).collect::<Result<Vec<_>>>()?;
    let magnitudes: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = magnitudes.iter().map(|m| m.max(1e-300).ln()).collect();
    let (fitted, _) = least_squares(&lx, &ly);
    let mut notes = Vec::new();
    let condition = model.degree_condition_holds() && q > 1.0;
    let limit = if condition {
        None
    } else {
        notes.push(format!("degree condition fails (q = {q}); arc integral does not vanish"));
        Some(richardson(radii, &values, None).value)
    };
    Ok(LemmaReport {
        name: "arc".into(),
        parameters: radii.to_vec(),
        values,
        magnitudes,
        fitted,
        expected,
        tolerance: SLOPE_TOLERANCE,
        pass: condition && (fitted - expected).abs() <= SLOPE_TOLERANCE,
        limit,
        notes,
    })
}

fn eps_report(name: &str, eps: &[f64], values: Vec<Complex64>, log_curve: bool) -> LemmaReport {
    let magnitudes: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let curve = |e: f64| if log_curve { e * (1.0 / e).ln() } else { e };
    let lx: Vec<f64> = eps.iter().map(|&e| curve(e).ln()).collect();
    let ly: Vec<f64> = magnitudes.iter().map(|m| m.max(1e-300).ln()).collect();
    let (fitted, _) = least_squares(&lx, &ly);
    let decreasing = strictly_decreasing(&magnitudes);
    let mut notes = vec![format!(
        "magnitudes fitted against {}",
        if log_curve { "eps*ln(1/eps)" } else { "eps" }
    )];
    if !decreasing {
        notes.push("magnitudes are not strictly decreasing".into());
    }
    LemmaReport {
        name: name.into(),
        parameters: eps.to_vec(),
        values,
        magnitudes,
        fitted,
        expected: 1.0,
        tolerance: EPS_EXPONENT_TOLERANCE,
        pass: decreasing && (fitted - 1.0).abs() <= EPS_EXPONENT_TOLERANCE,
        limit: None,
        notes,
    }
}

/// Sorted copy, largest first.
fn descending(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Full counterclockwise ε-circles around a zero of `S`, starting on the
/// corridor side.
pub fn verify_lemma_pole_circle(model: &LoopModel, pole: &PoleRecord, eps: &[f64]) -> Result<LemmaReport> {
    check_ladder("eps ladder", eps)?;
    let eps = descending(eps);
    let values = eps
        .iter()
        .map(|&e| {
            let seg = PathSegment::Circle {
                center: pole.location,
                radius: e,
                theta_start: -PI,
                theta_end: PI,
            };
            integrate_segment(model, &seg, 1e-10)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(eps_report("pole-circle", &eps, values, true))
}

/// Right ε-semicircles at the origin. With integral action the expected
/// shape is `ε·ln(1/ε)`, otherwise plain `ε`.
pub fn verify_lemma_origin(model: &LoopModel, eps: &[f64]) -> Result<LemmaReport> {
    check_ladder("eps ladder", eps)?;
    let eps = descending(eps);
    let values = eps
        .iter()
        .map(|&e| {
            let seg = PathSegment::Circle {
                center: Complex64::new(0.0, 0.0),
                radius: e,
                theta_start: -FRAC_PI_2,
                theta_end: FRAC_PI_2,
            };
            integrate_segment(model, &seg, 1e-10)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(eps_report("origin", &eps, values, model.vanishes_at_origin()))
}

/// Lower-lip-in plus upper-lip-out integral for one zero at corridor width
/// `w`, with circle radius `eps`.
pub fn corridor_pair(model: &LoopModel, pole: Complex64, eps: f64, w: f64, tilt: f64) -> Result<Complex64> {
    if !(w > 0.0 && w < eps) {
        return Err(Error::Geometry(format!("need 0 < width ({w}) < eps ({eps})")));
    }
    let c = Corridor::new(pole, tilt, w);
    let t_circle = (eps * eps - w * w).sqrt();
    let gap = (w / eps).asin();
    let path = [
        PathSegment::Lip {
            pole,
            t_start: c.lower.0,
            t_end: t_circle,
            side: LipSide::Lower,
            width: w,
            tilt,
        },
        PathSegment::Circle {
            center: pole,
            radius: eps,
            theta_start: tilt - PI + gap,
            theta_end: tilt + PI - gap,
        },
        PathSegment::Lip {
            pole,
            t_start: t_circle,
            t_end: c.upper.0,
            side: LipSide::Upper,
            width: w,
            tilt,
        },
    ];
    let r = integrate_path(model, &path, SegmentOptions::default(), None)?;
    Ok(r[0].value + r[2].value)
}

/// Lip-pair sums over `widths`, extrapolated linearly to zero width and
/// compared with `−2πi·d·Re p`. The circle radius is twice the largest
/// width.
pub fn verify_corridor_pair(model: &LoopModel, pole: &PoleRecord, widths: &[f64]) -> Result<LemmaReport> {
    verify_corridor_pair_tilted(model, pole, widths, 0.0)
}

pub fn verify_corridor_pair_tilted(model: &LoopModel, pole: &PoleRecord, widths: &[f64], tilt: f64) -> Result<LemmaReport> {
    check_ladder("width ladder", widths)?;
    let eps = 2.0 * widths.iter().copied().fold(0.0, f64::max);
    let values = widths
        .iter()
        .map(|&w| corridor_pair(model, pole.location, eps, w, tilt))
        .collect::<Result<Vec<_>>>()?;
    let (_, re0) = least_squares(widths, &values.iter().map(|v| v.re).collect::<Vec<_>>());
    let (_, im0) = least_squares(widths, &values.iter().map(|v| v.im).collect::<Vec<_>>());
    let limit = Complex64::new(re0, im0);
    let expected = Complex64::new(0.0, -2.0 * PI * pole.order * pole.location.re);
    let pass = (limit - expected).norm() <= CORRIDOR_TOLERANCE * expected.norm();
    Ok(LemmaReport {
        name: "corridor-pair".into(),
        parameters: widths.to_vec(),
        magnitudes: values.iter().map(|v| v.norm()).collect(),
        values,
        fitted: limit.norm(),
        expected: expected.norm(),
        tolerance: CORRIDOR_TOLERANCE,
        pass,
        limit: Some(limit),
        notes: vec![format!("circle radius {eps:e}")],
    })
}

/// Segment-by-segment integrals of the closed contour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub segments: Vec<PathSegment>,
    pub values: Vec<Complex64>,
    pub total: Complex64,
    pub max_segment: f64,
    /// Phase after the full loop minus the starting phase.
    pub phase_mismatch: f64,
}

impl ClosureReport {
    pub fn relative_closure(&self) -> f64 {
        if self.max_segment == 0.0 {
            0.0
        } else {
            self.total.norm() / self.max_segment
        }
    }
}

/// Sum of all segment integrals of the contour; zero up to quadrature error.
pub fn closure_check(model: &LoopModel, spec: &ContourSpec) -> Result<ClosureReport> {
    let segments = build_contour(spec)?;
    closure_of(model, segments)
}

/// Closure over an arbitrary closed path.
pub fn closure_of(model: &LoopModel, segments: Vec<PathSegment>) -> Result<ClosureReport> {
    let parts = integrate_path(model, &segments, SegmentOptions::default(), None)?;
    let values: Vec<Complex64> = parts.iter().map(|p| p.value).collect();
    let total = crate::quad::pairwise_sum(&values);
    let max_segment = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let phase_mismatch = parts.last().map_or(0.0, |l| l.end_phase) - parts.first().map_or(0.0, |f| f.start_phase);
    Ok(ClosureReport {
        segments,
        values,
        total,
        max_segment,
        phase_mismatch,
    })
}

/// Extrapolated arc limit with an error bar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualEstimate {
    pub value: Complex64,
    pub error: f64,
    pub converged: bool,
    pub radii: Vec<f64>,
    pub arcs: Vec<Complex64>,
}

/// Richardson step on the last three arc values. The decay rate is `rate`
/// when known, otherwise estimated from the three values.
fn richardson(radii: &[f64], arcs: &[Complex64], rate: Option<f64>) -> ResidualEstimate {
    let n = arcs.len();
    let (a1, a2, a3) = (arcs[n - 3], arcs[n - 2], arcs[n - 1]);
    let d1 = (a2 - a1).norm();
    let d2 = (a3 - a2).norm();
    let ratio = radii[n - 1] / radii[n - 2];
    let scale = a3.norm().max(1e-300);
    // a(R) ≈ a∞ + c·R^(−k)
    let step = |k: f64| {
        let value = a3 + (a3 - a2) / (ratio.powf(k) - 1.0);
        let previous = a2 + (a2 - a1) / ((radii[n - 2] / radii[n - 3]).powf(k) - 1.0);
        (value, (value - previous).norm().max(1e-16 * scale))
    };
    let (value, error, converged) = if d2 <= 1e-14 * scale.max(1.0) {
        (a3, d2, true)
    } else if let Some(k) = rate.filter(|k| *k > 0.0) {
        let (v, e) = step(k);
        (v, e, true)
    } else if d1 > d2 {
        let k = (d1 / d2).ln() / (radii[n - 2] / radii[n - 3]).ln();
        let (v, _) = step(k);
        (v, (v - a3).norm().max(1e-16 * scale), k > 0.0)
    } else {
        (a3, f64::INFINITY, false)
    };
    ResidualEstimate {
        value,
        error,
        converged,
        radii: radii.to_vec(),
        arcs: arcs.to_vec(),
    }
}

/// Limit of the outer-arc integral as `R → ∞`.
pub fn gamma_r_residual(model: &LoopModel, radii: &[f64]) -> Result<ResidualEstimate> {
    check_ladder("radius ladder", radii)?;
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    let arcs = radii.iter().map(|&r| arc_integral(model, r)).collect::<Result<Vec<_>>>()?;
    // with L ≈ c·s^(−q), q > 1, the arc decays like R^(1−q)
    let rate = crate::bodeint::leading_loop_term(model).map(|(_, q)| q - 1.0);
    Ok(richardson(&radii, &arcs, rate))
}

/// Sample trace of `log S` along each segment, as
/// `segment_id,s_re,s_im,logS_re,logS_im`.
pub fn segment_csv(model: &LoopModel, segments: &[PathSegment], per_segment: usize) -> Result<String> {
    let mut out = String::from("segment_id,s_re,s_im,logS_re,logS_im\n");
    let n = per_segment.max(2);
    let mut phase: Option<f64> = None;
    for (id, seg) in segments.iter().enumerate() {
        let trace = PhaseTrace::new(model, seg, phase)?;
        for k in 0..n {
            let t = k as f64 / (n - 1) as f64;
            let s = seg.point(t);
            let raw = eval_log_sensitivity(model, s, None)?;
            let im = unwrap_phase(raw.im, trace.reference(t));
            writeln!(out, "{id},{:e},{:e},{:e},{:e}", s.re, s.im, raw.re, im).expect("writing to a String");
        }
        phase = trace.phase.last().copied();
    }
    Ok(out)
}
