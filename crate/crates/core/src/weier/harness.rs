//! Built-in zero sequences and the verification runs built on them.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FactorForm, OuterSpec, SyntheticSensitivity};
use crate::bodeint::{bode_integral_with, residual_term, theoretical_value, BodeOptions};
use crate::contour::{corridor_pair, gamma_r_residual, integrate_segment, PathSegment};
use crate::error::{Error, Result};
use crate::funcmodel::{LoopModel, PoleRecord};

/// Where the zeros of a sequence accumulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    NoLimitPoint,
    AxisLimitPoint,
    OffaxisLimitPoint,
}

/// The three built-in sequences.
///
/// * `A`: `p_j = 1/j² + i·j`, escapes to infinity.
/// * `B`: `p_j = 1/j² + i(1 − 1/j)`, accumulates at `i`.
/// * `C`: `p_j = 0.5 + i/j`, accumulates at `0.5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PoleSequenceFamily {
    A,
    B,
    C,
}

impl PoleSequenceFamily {
    pub fn kind(self) -> SequenceKind {
        match self {
            Self::A => SequenceKind::NoLimitPoint,
            Self::B => SequenceKind::AxisLimitPoint,
            Self::C => SequenceKind::OffaxisLimitPoint,
        }
    }

    pub fn limit_point(self) -> Option<Complex64> {
        match self {
            Self::A => None,
            Self::B => Some(Complex64::new(0.0, 1.0)),
            Self::C => Some(Complex64::new(0.5, 0.0)),
        }
    }

    fn point(self, j: usize) -> Complex64 {
        let j = j as f64;
        match self {
            Self::A => Complex64::new(1.0 / (j * j), j),
            Self::B => Complex64::new(1.0 / (j * j), 1.0 - 1.0 / j),
            Self::C => Complex64::new(0.5, 1.0 / j),
        }
    }

    /// `Σ_{j>N} Re p_j`, when it is finite.
    pub fn truncation_residual(self, n: usize) -> Option<f64> {
        match self {
            Self::A | Self::B => Some(PI * PI / 6.0 - basel_partial(n)),
            Self::C => None,
        }
    }
}

/// `Σ_{j≤n} 1/j²`, summed smallest term first.
pub fn basel_partial(n: usize) -> f64 {
    (1..=n).rev().map(|j| 1.0 / (j as f64 * j as f64)).sum()
}

/// First `n` zeros with unit order, by nondecreasing modulus (ties by
/// imaginary part).
pub fn generate_sequence(family: PoleSequenceFamily, n: usize) -> Vec<PoleRecord> {
    let mut seq: Vec<PoleRecord> = (1..=n)
        .map(|j| PoleRecord {
            location: family.point(j),
            order: 1.0,
        })
        .collect();
    seq.sort_by(|a, b| {
        a.location
            .norm()
            .total_cmp(&b.location.norm())
            .then(a.location.im.total_cmp(&b.location.im))
    });
    seq
}

pub fn build_synthetic(seq: Vec<PoleRecord>, outer: OuterSpec, form: FactorForm) -> Result<SyntheticSensitivity> {
    SyntheticSensitivity::new(seq, form, outer)
}

/// `(s + a)/(s + 1)` with `a = 1 + 2 Σ d_j Re p_j`; its axis integral
/// `2π(a − 1)` is exactly the theoretical value of the sequence.
pub fn matched_outer_for_theorem2(seq: &[PoleRecord]) -> Result<OuterSpec> {
    let sum: f64 = seq.iter().map(|p| p.order * p.location.re).sum();
    OuterSpec::first_order(1.0 + 2.0 * sum, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirstOrderOuter {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OuterKeyword {
    Matched,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OuterChoice {
    Keyword(OuterKeyword),
    FirstOrder(FirstOrderOuter),
}

/// `{"family": "A", "N": 50, "outer": "matched"}` or
/// `{"family": "C", "N": 10, "outer": {"a": 3, "b": 1}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDocument {
    pub family: PoleSequenceFamily,
    #[serde(rename = "N")]
    pub n: usize,
    pub outer: OuterChoice,
}

impl FamilyDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("{} (line {}, column {})", e, e.line(), e.column()))
        })?;
        if doc.n == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("family documents always serialize")
    }

    pub fn sequence(&self) -> Vec<PoleRecord> {
        generate_sequence(self.family, self.n)
    }

    pub fn outer_spec(&self) -> Result<OuterSpec> {
        match self.outer {
            OuterChoice::Keyword(OuterKeyword::Matched) => matched_outer_for_theorem2(&self.sequence()),
            OuterChoice::FirstOrder(FirstOrderOuter { a, b }) => OuterSpec::first_order(a, b),
        }
    }

    pub fn build(&self) -> Result<SyntheticSensitivity> {
        build_synthetic(self.sequence(), self.outer_spec()?, FactorForm::Blaschke)
    }
}

/// One truncation level of a theorem run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCase {
    pub n: usize,
    pub numeric: f64,
    pub theoretical: f64,
    pub relative_error: f64,
    pub estimated_abs_error: f64,
    /// `Σ_{j≤N} d_j Re p_j`.
    pub partial_sum: f64,
    pub truncation_residual: Option<f64>,
}

/// `ε`-semicircle integrals around an on-axis limit point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSemicircle {
    pub center: Complex64,
    pub eps: Vec<f64>,
    pub values: Vec<Complex64>,
    pub magnitudes: Vec<f64>,
    pub decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub family: PoleSequenceFamily,
    pub tolerance: f64,
    pub cases: Vec<TheoremCase>,
    pub max_relative_error: f64,
    pub partial_sums_monotone: bool,
    pub partial_sums_bounded: bool,
    pub semicircle: Option<LimitSemicircle>,
    pub pass: bool,
}

fn check_n_list(n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::InvalidParameter("N list must be nonempty with N >= 1".into()));
    }
    Ok(())
}

fn require_kind(family: PoleSequenceFamily, kind: SequenceKind) -> Result<()> {
    if family.kind() != kind {
        return Err(Error::InvalidParameter(format!(
            "family {family:?} is {:?}, this run needs {kind:?}",
            family.kind()
        )));
    }
    Ok(())
}

fn theorem_case(family: PoleSequenceFamily, n: usize, tol: f64, split_at: &[f64]) -> Result<TheoremCase> {
    let seq = generate_sequence(family, n);
    let outer = matched_outer_for_theorem2(&seq)?;
    let model = LoopModel::Synthetic(build_synthetic(seq.clone(), outer, FactorForm::Blaschke)?);
    let opts = BodeOptions {
        rel_tol: (tol * 1e-3).max(1e-10),
        extra_breakpoints: split_at.to_vec(),
        ..BodeOptions::default()
    };
    let report = bode_integral_with(&model, opts)?;
    let theoretical = theoretical_value(&seq);
    Ok(TheoremCase {
        n,
        numeric: report.numeric_value,
        theoretical,
        relative_error: (report.numeric_value - theoretical).abs() / theoretical.abs().max(f64::MIN_POSITIVE),
        estimated_abs_error: report.estimated_abs_error,
        partial_sum: seq.iter().map(|p| p.order * p.location.re).sum(),
        truncation_residual: family.truncation_residual(n),
    })
}

fn theorem_run(family: PoleSequenceFamily, n_list: &[usize], tol: f64, split_at: &[f64]) -> Result<TheoremReport> {
    check_n_list(n_list)?;
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let cases = ns
        .par_iter()
        .map(|&n| theorem_case(family, n, tol, split_at))
        .collect::<Result<Vec<_>>>()?;
    let max_relative_error = cases.iter().map(|c| c.relative_error).fold(0.0, f64::max);
    let partial_sums_monotone = cases.windows(2).all(|w| w[1].partial_sum >= w[0].partial_sum);
    let partial_sums_bounded = cases.iter().all(|c| c.partial_sum <= PI * PI / 6.0);
    let pass = max_relative_error < tol && partial_sums_monotone && partial_sums_bounded;
    Ok(TheoremReport {
        family,
        tolerance: tol,
        cases,
        max_relative_error,
        partial_sums_monotone,
        partial_sums_bounded,
        semicircle: None,
        pass,
    })
}

/// Matched composite for each `N`, axis integral against `4π Σ_{j≤N}`.
pub fn verify_theorem_no_limit(family: PoleSequenceFamily, n_list: &[usize], tol: f64) -> Result<TheoremReport> {
    require_kind(family, SequenceKind::NoLimitPoint)?;
    theorem_run(family, n_list, tol, &[])
}

/// As the no-limit run, with panels split at the limit point and the
/// right-hand `ε`-semicircle around it integrated for each `ε` on the
/// largest `N`.
pub fn verify_theorem_limit(family: PoleSequenceFamily, n_list: &[usize], tol: f64, eps: &[f64]) -> Result<TheoremReport> {
    require_kind(family, SequenceKind::AxisLimitPoint)?;
    let center = family.limit_point().expect("axis families have a limit point");
    let mut report = theorem_run(family, n_list, tol, &[center.im, -center.im])?;
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidParameter("eps ladder must be nonempty and positive".into()));
    }
    let n = *n_list.iter().max().expect("checked nonempty");
    let seq = generate_sequence(family, n);
    let nearest = seq.iter().map(|p| (p.location - center).norm()).fold(f64::INFINITY, f64::min);
    let mut eps = eps.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    if eps[0] >= nearest {
        return Err(Error::Geometry(format!(
            "semicircle radius {} reaches the zero at distance {nearest:e} from the limit point",
            eps[0]
        )));
    }
    let outer = matched_outer_for_theorem2(&seq)?;
    let model = LoopModel::Synthetic(build_synthetic(seq, outer, FactorForm::Blaschke)?);
    let values = eps
        .iter()
        .map(|&e| {
            let seg = PathSegment::Circle {
                center,
                radius: e,
                theta_start: -PI / 2.0,
                theta_end: PI / 2.0,
            };
            integrate_segment(&model, &seg, 1e-10)
        })
        .collect::<Result<Vec<_>>>()?;
    let magnitudes: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let decreasing = magnitudes.windows(2).all(|w| w[1] < w[0]);
    report.pass &= decreasing;
    report.semicircle = Some(LimitSemicircle {
        center,
        eps,
        values,
        magnitudes,
        decreasing,
    });
    Ok(report)
}

/// Corridor sum for one truncation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceCase {
    pub n: usize,
    pub eps: f64,
    pub width: f64,
    /// `|corridor pair|` per zero, in sequence order.
    pub per_term: Vec<f64>,
    pub sum: f64,
    /// `2π(Re p* − ε_b)·N`, or 0 without an off-axis limit point.
    pub lower_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DivergenceVerdict {
    Divergent,
    Convergent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub family: PoleSequenceFamily,
    /// The `ε` in the lower bound `2π(Re p* − ε)` per term.
    pub bound_eps: f64,
    pub cases: Vec<DivergenceCase>,
    /// `sum(N_{k+1}) / sum(N_k)` for consecutive levels.
    pub ratios: Vec<f64>,
    pub verdict: DivergenceVerdict,
    /// The verdict matches the family's kind.
    pub pass: bool,
}

/// Bound slack and growth tolerance of the divergence check.
pub const DIVERGENCE_BOUND_EPS: f64 = 0.1;
pub const GROWTH_TOLERANCE: f64 = 0.1;

fn divergence_case(family: PoleSequenceFamily, n: usize) -> Result<DivergenceCase> {
    let seq = generate_sequence(family, n);
    let locs: Vec<Complex64> = seq.iter().map(|p| p.location).collect();
    let mut spacing = f64::INFINITY;
    for (i, a) in locs.iter().enumerate() {
        for b in &locs[i + 1..] {
            spacing = spacing.min((a - b).norm());
        }
    }
    let min_re = locs.iter().map(|p| p.re).fold(f64::INFINITY, f64::min);
    let eps = 1e-4_f64.min(0.25 * spacing).min(0.5 * min_re);
    let width = eps / 5.0;
    let model = LoopModel::Synthetic(build_synthetic(seq, OuterSpec::trivial(), FactorForm::Blaschke)?);
    let per_term = locs
        .par_iter()
        .map(|&p| corridor_pair(&model, p, eps, width, 0.0).map(|v| v.norm()))
        .collect::<Result<Vec<_>>>()?;
    let sum = crate::quad::pairwise_sum(&per_term);
    let lower_bound = match family.limit_point() {
        Some(p) if p.re > 0.0 => 2.0 * PI * (p.re - DIVERGENCE_BOUND_EPS) * n as f64,
        _ => 0.0,
    };
    Ok(DivergenceCase {
        n,
        eps,
        width,
        per_term,
        sum,
        lower_bound,
    })
}

/// Sums corridor-pair magnitudes over the first `N` zeros. Linear growth
/// in `N` above the per-term bound is reported as divergent; a sum whose
/// increments shrink is convergent.
pub fn demonstrate_divergence(family: PoleSequenceFamily, n_list: &[usize]) -> Result<DivergenceReport> {
    check_n_list(n_list)?;
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 2 {
        return Err(Error::InvalidParameter("divergence needs at least two N values".into()));
    }
    let cases = ns.iter().map(|&n| divergence_case(family, n)).collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = cases.windows(2).map(|w| w[1].sum / w[0].sum).collect();
    let linear = cases.windows(2).zip(&ratios).all(|(w, r)| {
        let expected = w[1].n as f64 / w[0].n as f64;
        (r - expected).abs() <= GROWTH_TOLERANCE * expected
    });
    let above_bound = cases.iter().all(|c| c.lower_bound > 0.0 && c.sum > c.lower_bound);
    let verdict = if linear && above_bound {
        DivergenceVerdict::Divergent
    } else {
        DivergenceVerdict::Convergent
    };
    let pass = match family.kind() {
        SequenceKind::OffaxisLimitPoint => verdict == DivergenceVerdict::Divergent,
        _ => verdict == DivergenceVerdict::Convergent,
    };
    Ok(DivergenceReport {
        family,
        bound_eps: DIVERGENCE_BOUND_EPS,
        cases,
        ratios,
        verdict,
        pass,
    })
}

/// Axis integral and arc residual of a pure Blaschke product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeReconciliation {
    pub n: usize,
    pub numeric: f64,
    pub theoretical: f64,
    pub residual: Complex64,
    pub residual_error: f64,
    /// `theoretical + Re(2i·residual)`.
    pub predicted: f64,
    pub numeric_abs_tol: f64,
    pub predicted_rel_tol: f64,
    pub pass: bool,
}

/// With no outer factor the axis integral vanishes, so the arc residual
/// must cancel `4π Σ d_j Re p_j` on its own.
pub fn reconcile_pure_blaschke(
    family: PoleSequenceFamily,
    n: usize,
    radii: &[f64],
    numeric_abs_tol: f64,
    predicted_rel_tol: f64,
) -> Result<BlaschkeReconciliation> {
    check_n_list(&[n])?;
    let seq = generate_sequence(family, n);
    let theoretical = theoretical_value(&seq);
    let model = LoopModel::Synthetic(build_synthetic(seq, OuterSpec::trivial(), FactorForm::Blaschke)?);
    let numeric = bode_integral_with(&model, BodeOptions::default())?.numeric_value;
    let res = gamma_r_residual(&model, radii)?;
    let predicted = theoretical + residual_term(res.value);
    let pass = numeric.abs() <= numeric_abs_tol && predicted.abs() <= predicted_rel_tol * theoretical.abs();
    Ok(BlaschkeReconciliation {
        n,
        numeric,
        theoretical,
        residual: res.value,
        residual_error: res.error,
        predicted,
        numeric_abs_tol,
        predicted_rel_tol,
        pass,
    })
}
