//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits nonzero if any failed. Tolerances are pinned below.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use bodefrac::bodeint::{bode_integral, residual_term};
use bodefrac::contour::{
    closure_check, gamma_r_residual, verify_corridor_pair, verify_lemma_arc, verify_lemma_origin,
    verify_lemma_pole_circle, ContourSpec,
};
use bodefrac::rootfind::{certify_stability_default, count_zeros_rect, polynomial_roots, Rectangle, Verdict};
use bodefrac::tuner::{invariance_spread, sweep, SweepGrid};
use bodefrac::weier::{
    basel_partial, build_synthetic, demonstrate_divergence, generate_sequence, matched_outer_for_theorem2,
    reconcile_pure_blaschke, verify_theorem_limit, verify_theorem_no_limit, DivergenceVerdict, FactorForm,
    OuterSpec, PoleSequenceFamily, SyntheticSensitivity,
};
use bodefrac::{Complex64, FractionalPID, LoopModel, PoleRecord, Polynomial, RationalPlant};
use rand::{Rng, SeedableRng};

const CLASSICAL_REL: f64 = 1e-3;
const CLASSICAL_RESIDUAL_REL: f64 = 5e-3;
const CLASSICAL_BUDGET: Duration = Duration::from_secs(5);
const THEOREM1_REL: f64 = 5e-3;
const THEOREM1_BUDGET: Duration = Duration::from_secs(30);
const SLOPE_TOL: f64 = 0.1;
const EPS_EXPONENT_TOL: f64 = 0.2;
const CORRIDOR_REL: f64 = 1e-3;
const CLOSURE_REL: f64 = 1e-3;
const THEOREM2_REL: f64 = 5e-3;
const GROWTH_REL: f64 = 0.1;
const BLASCHKE_NUMERIC_ABS: f64 = 1e-2;
const BLASCHKE_PREDICTED_REL: f64 = 1e-2;
const ALL_PASS_TOL: f64 = 1e-10;
const QUOTIENT_REL: f64 = 1e-6;
const SPREAD_REL: f64 = 1e-2;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rational(num: &[f64], den: &[f64], gains: (f64, f64, f64), alpha: f64, beta: f64) -> LoopModel {
    let plant = RationalPlant::new(Polynomial::from_real(num), Polynomial::from_real(den)).unwrap();
    let pid = FractionalPID::new(gains.0, gains.1, gains.2, alpha, beta).unwrap();
    LoopModel::rational(plant, pid)
}

/// L = 3/(s − 1).
fn classical() -> LoopModel {
    rational(&[3.0], &[-1.0, 1.0], (0.0, 1.0, 0.0), 0.5, 0.5)
}

/// D = (s − 1)(s + 2)(s + 10), N = 1, α = β = 0.5.
fn three_pole_plant() -> RationalPlant {
    RationalPlant::new(Polynomial::from_real(&[1.0]), Polynomial::from_real(&[-20.0, 8.0, 11.0, 1.0])).unwrap()
}

fn theorem1() -> LoopModel {
    LoopModel::rational(three_pole_plant(), FractionalPID::new(10.0, 50.0, 1.0, 0.5, 0.5).unwrap())
}

/// D = (s + 1)^4, N = s + 3, α = 0.3.
fn second_arc_model() -> LoopModel {
    rational(&[3.0, 1.0], &[1.0, 4.0, 6.0, 4.0, 1.0], (1.0, 0.5, 0.0), 0.3, 0.5)
}

/// D = (s − 1)^2.
fn double_pole() -> LoopModel {
    rational(&[1.0], &[1.0, -2.0, 1.0], (20.0, 10.0, 1.0), 0.5, 0.5)
}

/// D = (s − 2)^2 + 9, zeros of S at 2 ± 3i.
fn complex_pair() -> LoopModel {
    rational(&[1.0], &[13.0, -4.0, 1.0], (20.0, 10.0, 1.0), 0.5, 0.5)
}

fn matched(family: PoleSequenceFamily, n: usize) -> LoopModel {
    let seq = generate_sequence(family, n);
    let outer = matched_outer_for_theorem2(&seq).unwrap();
    LoopModel::Synthetic(build_synthetic(seq, outer, FactorForm::Blaschke).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let m = classical();
    let r = bode_integral(&m, 1e-8).unwrap();
    let res = gamma_r_residual(&m, &[1e4, 1e5, 1e6]).unwrap();
    let predicted = 4.0 * PI + residual_term(res.value);
    let elapsed = t.elapsed();
    let target = -2.0 * PI;
    check(
        rel(r.numeric_value, target) < CLASSICAL_REL
            && rel(predicted, target) < CLASSICAL_RESIDUAL_REL
            && elapsed < CLASSICAL_BUDGET,
        format!(
            "I = {:.8} (rel {:.1e}), 4pi + Re(2i*{:.6}i) = {:.8} (rel {:.1e}), {:.2?}",
            r.numeric_value,
            rel(r.numeric_value, target),
            res.value.im,
            predicted,
            rel(predicted, target),
            elapsed
        ),
    )
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let m = theorem1();
    let cert = certify_stability_default(&m).unwrap();
    let r = bode_integral(&m, 1e-8).unwrap();
    let elapsed = t.elapsed();
    check(
        cert.verdict == Verdict::Stable && rel(r.numeric_value, 4.0 * PI) < THEOREM1_REL && elapsed < THEOREM1_BUDGET,
        format!(
            "certificate {:?}, I = {:.8} vs 4pi (rel {:.1e}), {:.2?}",
            cert.verdict,
            r.numeric_value,
            rel(r.numeric_value, 4.0 * PI),
            elapsed
        ),
    )
}

fn criterion_3() -> Outcome {
    let radii = [1e2, 1e3, 1e4];
    let mut pass = true;
    let mut parts = Vec::new();
    // expected slopes α + n − m + 1: 0.5 + 0 − 3 + 1 and 0.3 + 1 − 4 + 1
    for (name, m, want) in [("m=3,n=0,a=0.5", theorem1(), -1.5), ("m=4,n=1,a=0.3", second_arc_model(), -1.7)] {
        let r = verify_lemma_arc(&m, &radii).unwrap();
        pass &= r.pass && (r.fitted - want).abs() <= SLOPE_TOL;
        parts.push(format!("{name}: slope {:.4} (want {want})", r.fitted));
    }
    check(pass, parts.join("; "))
}

fn criterion_4() -> Outcome {
    let eps = [1e-2, 1e-3, 1e-4];
    let mut pass = true;
    let mut parts = Vec::new();
    let m = theorem1();
    let pole = PoleRecord::new(c(1.0, 0.0), 1.0).unwrap();
    let circle = verify_lemma_pole_circle(&m, &pole, &eps).unwrap();
    let origin = verify_lemma_origin(&m, &eps).unwrap();
    for r in [&circle, &origin] {
        let decreasing = r.magnitudes.windows(2).all(|w| w[1] < w[0]);
        pass &= decreasing && (r.fitted - 1.0).abs() <= EPS_EXPONENT_TOL;
        parts.push(format!(
            "{}: |values| {:.3e} > {:.3e} > {:.3e}, exponent vs eps*ln(1/eps) {:.3}",
            r.name, r.magnitudes[0], r.magnitudes[1], r.magnitudes[2], r.fitted
        ));
    }
    check(pass, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let widths = [1e-5, 2e-5, 4e-5];
    let cases = [
        ("simple p=1", classical(), PoleRecord::new(c(1.0, 0.0), 1.0).unwrap(), 2.0 * PI),
        ("double p=1", double_pole(), PoleRecord::new(c(1.0, 0.0), 2.0).unwrap(), 4.0 * PI),
        ("p=2+3i", complex_pair(), PoleRecord::new(c(2.0, 3.0), 1.0).unwrap(), 4.0 * PI),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, m, p, want) in cases {
        let r = verify_corridor_pair(&m, &p, &widths).unwrap();
        let limit = r.limit.unwrap();
        let e = rel(limit.norm(), want);
        pass &= e < CORRIDOR_REL && limit.im < 0.0;
        parts.push(format!("{name}: |limit| {:.6} vs {:.6} (rel {:.1e})", limit.norm(), want, e));
    }
    check(pass, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let corpus: Vec<(&str, LoopModel, f64, f64)> = vec![
        ("classical", classical(), 1e-4, 1e-5),
        ("theorem1", theorem1(), 1e-4, 1e-5),
        ("second-arc", second_arc_model(), 1e-4, 1e-5),
        ("double", double_pole(), 1e-4, 1e-5),
        ("complex-pair", complex_pair(), 1e-4, 1e-5),
        ("family-A N=10", matched(PoleSequenceFamily::A, 10), 1e-3, 1e-4),
        ("family-B N=10", matched(PoleSequenceFamily::B, 10), 1e-3, 1e-4),
        ("family-C N=10", matched(PoleSequenceFamily::C, 10), 1e-3, 1e-4),
    ];
    let mut worst: f64 = 0.0;
    let mut worst_name = "";
    let mut pass = true;
    for (name, m, eps, w) in &corpus {
        let r = closure_check(m, &ContourSpec::for_model(m, 1e3, *eps, *w)).unwrap();
        let q = r.relative_closure();
        pass &= q < CLOSURE_REL;
        if q >= worst {
            worst = q;
            worst_name = name;
        }
    }
    check(
        pass,
        format!("{} models, worst |sum|/max segment {:.2e} ({worst_name})", corpus.len(), worst),
    )
}

fn criterion_7() -> Outcome {
    let r = verify_theorem_no_limit(PoleSequenceFamily::A, &[10, 25, 50], THEOREM2_REL).unwrap();
    let gaps: Vec<f64> = r.cases.iter().map(|c| PI * PI / 6.0 - c.partial_sum).collect();
    let approaching = gaps.windows(2).all(|g| g[1] < g[0]) && gaps.iter().all(|g| *g > 0.0);
    let matches_basel = r.cases.iter().all(|c| (c.partial_sum - basel_partial(c.n)).abs() < 1e-12);
    check(
        r.pass && approaching && matches_basel,
        format!(
            "max rel error {:.1e}; pi^2/6 - partial sum: {}",
            r.max_relative_error,
            gaps.iter().map(|g| format!("{g:.4}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn criterion_8() -> Outcome {
    let r = verify_theorem_limit(PoleSequenceFamily::B, &[10, 25, 50], THEOREM2_REL, &[1e-2, 1e-3, 1e-4]).unwrap();
    let semi = r.semicircle.as_ref().unwrap();
    let vanishing = semi.magnitudes[2] < 0.02 * semi.magnitudes[0];
    check(
        r.pass && semi.decreasing && vanishing,
        format!(
            "max rel error {:.1e}; semicircle at i: {}",
            r.max_relative_error,
            semi.magnitudes.iter().map(|m| format!("{m:.3e}")).collect::<Vec<_>>().join(" > ")
        ),
    )
}

fn criterion_9() -> Outcome {
    let r = demonstrate_divergence(PoleSequenceFamily::C, &[10, 20, 40]).unwrap();
    let above = r.cases.iter().all(|c| c.sum > c.lower_bound);
    let doubling = r.ratios.iter().all(|q| (q - 2.0).abs() <= GROWTH_REL * 2.0);
    check(
        r.verdict == DivergenceVerdict::Divergent && above && doubling,
        format!(
            "sums {} vs bounds {}; ratios {}",
            r.cases.iter().map(|c| format!("{:.3}", c.sum)).collect::<Vec<_>>().join(", "),
            r.cases.iter().map(|c| format!("{:.3}", c.lower_bound)).collect::<Vec<_>>().join(", "),
            r.ratios.iter().map(|q| format!("{q:.4}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn criterion_10() -> Outcome {
    let r = reconcile_pure_blaschke(
        PoleSequenceFamily::A,
        50,
        &[1e3, 1e4, 1e5],
        BLASCHKE_NUMERIC_ABS,
        BLASCHKE_PREDICTED_REL,
    )
    .unwrap();
    check(
        r.pass,
        format!(
            "I = {:.2e}; 4pi*sum = {:.6}, residual = {:.6}i, 4pi*sum + Re(2i*residual) = {:.2e}",
            r.numeric, r.theoretical, r.residual.im, r.predicted
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(20_240_601);
    let mut parts = Vec::new();

    // argument principle against explicit roots
    let mut agree = 0;
    for _ in 0..100 {
        let deg = rng.gen_range(1..=8);
        let roots: Vec<Complex64> = (0..deg).map(|_| c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))).collect();
        let p = Polynomial::from_roots(&roots);
        let rect = Rectangle::new(
            rng.gen_range(-2.5..0.0),
            rng.gen_range(0.1..2.5),
            rng.gen_range(-2.5..0.0),
            rng.gen_range(0.1..2.5),
        )
        .unwrap();
        let found: usize = polynomial_roots(&p, 1e-12)
            .unwrap()
            .iter()
            .filter(|(r, _)| rect.contains(*r))
            .map(|(_, m)| m)
            .sum();
        if count_zeros_rect(&p, &rect).ok() == Some(found as i64) {
            agree += 1;
        }
    }
    parts.push(format!("winding = root count {agree}/100"));

    // all-pass modulus
    let factors: Vec<PoleRecord> = (0..40)
        .map(|_| PoleRecord::new(c(rng.gen_range(0.01..5.0), rng.gen_range(-30.0..30.0)), rng.gen_range(0.5..3.0)).unwrap())
        .collect();
    let b = SyntheticSensitivity::new(factors, FactorForm::Blaschke, OuterSpec::trivial()).unwrap();
    let worst_mod = (0..1000)
        .map(|_| (b.eval(c(0.0, rng.gen_range(-1e3..1e3))).unwrap().norm() - 1.0).abs())
        .fold(0.0, f64::max);
    parts.push(format!("all-pass deviation {worst_mod:.1e}"));

    // closed-form quotients: ∫ ln|Π(iω + a)/Π(iω + b)|² dω = 2π Σ(a − b)
    let mut worst_q: f64 = 0.0;
    for _ in 0..20 {
        let k = rng.gen_range(1..=4);
        let a: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..10.0)).collect();
        let bb: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..10.0)).collect();
        let outer = OuterSpec::new(
            a.iter().map(|&x| c(-x, 0.0)).collect(),
            bb.iter().map(|&x| c(-x, 0.0)).collect(),
            c(1.0, 0.0),
        )
        .unwrap();
        let m = LoopModel::Synthetic(SyntheticSensitivity::new(Vec::new(), FactorForm::Blaschke, outer).unwrap());
        let want = 2.0 * PI * (a.iter().sum::<f64>() - bb.iter().sum::<f64>());
        let got = bode_integral(&m, 1e-9).unwrap().numeric_value;
        worst_q = worst_q.max((got - want).abs() / want.abs().max(1.0));
    }
    parts.push(format!("quotient oracle worst rel {worst_q:.1e}"));

    // controller independence over a stable sweep
    let grid = SweepGrid {
        k1: vec![0.0, 1.0, 10.0],
        k0: vec![25.0, 50.0, 100.0],
        km1: vec![0.0, 1.0, 10.0],
        alpha: vec![0.25, 0.5, 0.75],
        beta: vec![0.5],
    };
    let pts = sweep(&three_pole_plant(), &grid).unwrap();
    let stable = pts.iter().filter(|p| p.report.is_some()).count();
    let spread = invariance_spread(&three_pole_plant(), &pts).unwrap().unwrap_or(f64::INFINITY);
    parts.push(format!("sweep spread {spread:.1e} over {stable} stable points"));

    check(
        agree == 100 && worst_mod < ALL_PASS_TOL && worst_q < QUOTIENT_REL && spread < SPREAD_REL && stable >= 10,
        parts.join("; "),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("classical Bode reconciliation", criterion_1),
        ("controller-independent integral, 3-pole plant", criterion_2),
        ("outer-arc decay slope", criterion_3),
        ("eps-circle and origin semicircle", criterion_4),
        ("corridor-pair limits", criterion_5),
        ("contour closure", criterion_6),
        ("zeros without limit point (family A)", criterion_7),
        ("zeros with axis limit point (family B)", criterion_8),
        ("divergence off the axis (family C)", criterion_9),
        ("pure Blaschke residual reconciliation", criterion_10),
        ("property suites", criterion_11),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "[{}] {:>2} {name}: {} ({:.2?})",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail,
            t.elapsed()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
