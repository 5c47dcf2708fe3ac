//! Batch front end: `analyze`, `lemmas`, `synth` and `sweep`.
//!
//! Each command reads one JSON document, prints a plain-text report and,
//! with `--out`, writes `report.json` (plus CSV files with `--csv`). Exit
//! codes are the machine contract: 0 pass, 1 input error, 2 verification
//! mismatch or numerical failure.
//!
//! Numeric settings come from built-in defaults, then an optional
//! `"settings"` object in the document, then command-line flags.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bodeint::{bode_integral, integrand_csv, IntegralReport};
use crate::contour::{
    build_contour, closure_check, gamma_r_residual, segment_csv, verify_corridor_pair, verify_lemma_arc,
    verify_lemma_origin, verify_lemma_pole_circle, ClosureReport, ContourSpec, LemmaReport, ResidualEstimate,
};
use crate::error::{Error, Result};
use crate::funcmodel::{LoopModel, ModelDocument, PoleRecord, RationalPlant};
use crate::rootfind::{certify_stability_default, rhp_open_loop_poles, StabilityCertificate, Verdict};
use crate::tuner::{compare_integer_vs_fractional, RESIDUAL_RADII, invariance_spread, sweep, sweep_csv, ComparisonReport, Gains, SweepGrid, SweepPoint};
use crate::weier::{
    demonstrate_divergence, reconcile_pure_blaschke, verify_theorem_limit, verify_theorem_no_limit,
    BlaschkeReconciliation, DivergenceReport, FamilyDocument, OuterChoice, PoleSequenceFamily, TheoremReport,
};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "BODEFRAC_THREADS";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bodefrac", version, about = "Bode sensitivity integrals for fractional PID loops")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Analyze,
    Lemmas,
    Synth,
    Sweep,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Axis integral, theoretical value and arc residual of one loop.
    Analyze(CommonArgs),
    /// Arc, circle, origin, corridor and closure checks of one loop.
    Lemmas(CommonArgs),
    /// Synthetic zero-sequence harnesses from a family document.
    Synth(CommonArgs),
    /// Controller parameter sweep on a fixed plant.
    Sweep(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON document for the command.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for report.json and CSV files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write CSV plot data (needs --out).
    #[arg(long)]
    pub csv: bool,
    /// Relative tolerance of the axis quadrature.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Relative tolerance of the pass/fail comparisons.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Comma-separated arc radii.
    #[arg(long, value_delimiter = ',')]
    pub radius_ladder: Option<Vec<f64>>,
    /// Comma-separated circle radii.
    #[arg(long, value_delimiter = ',')]
    pub eps_ladder: Option<Vec<f64>>,
    /// Print the resolved document and settings as JSON, then exit.
    #[arg(long)]
    pub dump_config: bool,
}

/// Numeric knobs; every field is optional in a document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_ladder: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_ladder: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corridor_widths: Option<Vec<f64>>,
}

impl Settings {
    /// `other` wins wherever it has a value.
    fn overlay(self, other: Settings) -> Settings {
        Settings {
            rel_tol: other.rel_tol.or(self.rel_tol),
            tolerance: other.tolerance.or(self.tolerance),
            radius_ladder: other.radius_ladder.or(self.radius_ladder),
            eps_ladder: other.eps_ladder.or(self.eps_ladder),
            corridor_widths: other.corridor_widths.or(self.corridor_widths),
        }
    }

    fn rel_tol(&self) -> f64 {
        self.rel_tol.unwrap_or(1e-6)
    }

    fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(5e-3)
    }

    fn eps_ladder(&self) -> Vec<f64> {
        self.eps_ladder.clone().unwrap_or_else(|| vec![1e-2, 1e-3, 1e-4])
    }

    fn corridor_widths(&self) -> Vec<f64> {
        self.corridor_widths.clone().unwrap_or_else(|| vec![1e-5, 2e-5, 4e-5])
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("rel_tol", self.rel_tol), ("tolerance", self.tolerance)] {
            if let Some(x) = v {
                if !(x > 0.0 && x < 1.0) {
                    return Err(Error::Config(format!("{name} = {x} must lie in (0, 1)")));
                }
            }
        }
        for (name, v) in [
            ("radius_ladder", &self.radius_ladder),
            ("eps_ladder", &self.eps_ladder),
            ("corridor_widths", &self.corridor_widths),
        ] {
            if let Some(l) = v {
                if l.len() < 3 || l.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                    return Err(Error::Config(format!("{name} needs at least three positive values")));
                }
            }
        }
        Ok(())
    }
}

/// Grid document for `sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDocument {
    pub plant: RationalPlant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<SweepGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    pub gains: Gains,
    pub alpha_beta: Vec<(f64, f64)>,
}

/// Parsed input of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Document {
    Model(ModelDocument),
    Family(FamilyDocument),
    Sweep(SweepDocument),
}

/// Everything a command needs, with settings already resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub document: Document,
    pub settings: Settings,
    pub out: Option<PathBuf>,
    pub csv: bool,
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Config(format!("{} (line {}, column {})", e, e.line(), e.column()))
}

/// Splits an optional `"settings"` object off the document. Without one,
/// the text is parsed directly so diagnostics keep line and column.
fn parse_with_settings<T: DeserializeOwned>(text: &str) -> Result<(T, Settings)> {
    let mut value: Value = serde_json::from_str(text).map_err(json_error)?;
    let settings = match value.as_object_mut().and_then(|o| o.remove("settings")) {
        Some(s) => serde_json::from_value(s).map_err(|e| Error::Config(format!("settings: {e}")))?,
        None => return Ok((serde_json::from_str(text).map_err(json_error)?, Settings::default())),
    };
    let doc = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
    Ok((doc, settings))
}

pub fn parse_document(command: CommandKind, text: &str) -> Result<(Document, Settings)> {
    Ok(match command {
        CommandKind::Analyze | CommandKind::Lemmas => {
            let (d, s) = parse_with_settings::<ModelDocument>(text)?;
            (Document::Model(d), s)
        }
        CommandKind::Synth => {
            let (d, s) = parse_with_settings::<FamilyDocument>(text)?;
            if d.n == 0 {
                return Err(Error::Config("N must be at least 1".into()));
            }
            (Document::Family(d), s)
        }
        CommandKind::Sweep => {
            let (d, s) = parse_with_settings::<SweepDocument>(text)?;
            (Document::Sweep(d), s)
        }
    })
}

/// Document plus settings in the form `parse_document` accepts.
pub fn dump_config(config: &RunConfig) -> String {
    let mut value = serde_json::to_value(&config.document).expect("documents serialize");
    let settings = serde_json::to_value(&config.settings).expect("settings serialize");
    if let (Some(obj), Some(s)) = (value.as_object_mut(), settings.as_object()) {
        if !s.is_empty() {
            obj.insert("settings".into(), settings);
        }
    }
    serde_json::to_string_pretty(&value).expect("values serialize")
}

pub fn load_config(command: CommandKind, args: &CommonArgs) -> Result<RunConfig> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Io(format!("{}: {e}", args.config.display())))?;
    let (document, from_file) = parse_document(command, &text)?;
    let flags = Settings {
        rel_tol: args.rel_tol,
        tolerance: args.tolerance,
        radius_ladder: args.radius_ladder.clone(),
        eps_ladder: args.eps_ladder.clone(),
        corridor_widths: None,
    };
    let settings = from_file.overlay(flags);
    settings.validate()?;
    if args.csv && args.out.is_none() {
        return Err(Error::Config("--csv needs --out".into()));
    }
    Ok(RunConfig {
        command,
        document,
        settings,
        out: args.out.clone(),
        csv: args.csv,
    })
}

/// Writes `contents` to `dir/name` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    let target = dir.join(name);
    tmp.persist(&target).map_err(|e| io(e.error))?;
    Ok(target)
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV}={raw:?} is not a positive integer")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_) | Error::InvalidModel(_) | Error::InvalidParameter(_) | Error::Io(_)
    )
}

/// Text report, JSON report and CSV files of one command.
struct Output {
    text: String,
    json: Value,
    csv: Vec<(&'static str, String)>,
    pass: bool,
}

/// Parses `args` (including the program name) and runs the command,
/// writing the report to `stdout` and diagnostics to `stderr`.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return EXIT_INPUT;
            }
            let _ = write!(stdout, "{e}");
            return EXIT_PASS;
        }
    };
    let (kind, common) = match &cli.command {
        Command::Analyze(a) => (CommandKind::Analyze, a),
        Command::Lemmas(a) => (CommandKind::Lemmas, a),
        Command::Synth(a) => (CommandKind::Synth, a),
        Command::Sweep(a) => (CommandKind::Sweep, a),
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_INPUT;
    }
    let config = match load_config(kind, common) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_INPUT;
        }
    };
    if common.dump_config {
        let _ = writeln!(stdout, "{}", dump_config(&config));
        return EXIT_PASS;
    }
    match execute(&config).and_then(|o| emit(&config, o, stdout)) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_MISMATCH,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if is_input_error(&e) {
                EXIT_INPUT
            } else {
                EXIT_MISMATCH
            }
        }
    }
}

/// Entry point of the binary.
pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}

fn emit(config: &RunConfig, o: Output, stdout: &mut dyn Write) -> Result<bool> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    stdout.write_all(o.text.as_bytes()).map_err(io)?;
    if let Some(dir) = &config.out {
        let json = serde_json::to_string_pretty(&o.json).expect("reports serialize");
        let p = write_atomic(dir, "report.json", &(json + "\n"))?;
        writeln!(stdout, "wrote {}", p.display()).map_err(io)?;
        if config.csv {
            for (name, body) in &o.csv {
                let p = write_atomic(dir, name, body)?;
                writeln!(stdout, "wrote {}", p.display()).map_err(io)?;
            }
        }
    }
    writeln!(stdout, "{}", if o.pass { "PASS" } else { "FAIL" }).map_err(io)?;
    Ok(o.pass)
}

fn execute(config: &RunConfig) -> Result<Output> {
    match (&config.command, &config.document) {
        (CommandKind::Analyze, Document::Model(d)) => cmd_analyze(d, &config.settings, config.csv),
        (CommandKind::Lemmas, Document::Model(d)) => cmd_lemmas(d, &config.settings, config.csv),
        (CommandKind::Synth, Document::Family(d)) => cmd_synth(d, &config.settings),
        (CommandKind::Sweep, Document::Sweep(d)) => cmd_sweep(d, &config.settings),
        _ => Err(Error::Config("document does not match the command".into())),
    }
}

fn fmt_c(z: Complex64) -> String {
    format!("{:.6} {} {:.6}i", z.re, if z.im < 0.0 { '-' } else { '+' }, z.im.abs())
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn print_poles(text: &mut String, poles: &[PoleRecord], marginal: &[Complex64]) {
    if poles.is_empty() {
        let _ = writeln!(text, "open-loop RHP poles: none");
    }
    for p in poles {
        let _ = writeln!(text, "open-loop RHP pole: {} (order {})", fmt_c(p.location), p.order);
    }
    for z in marginal {
        let _ = writeln!(text, "open-loop pole on the axis: {}", fmt_c(*z));
    }
}

#[derive(Serialize)]
struct AnalyzeJson<'a> {
    certificate: &'a StabilityCertificate,
    integral: Option<&'a IntegralReport>,
    residual: Option<&'a ResidualEstimate>,
    tolerance: f64,
    pass: bool,
}

fn cmd_analyze(doc: &ModelDocument, settings: &Settings, csv: bool) -> Result<Output> {
    let model = doc.clone().into_model();
    let mut text = String::new();
    let rhp = rhp_open_loop_poles(&doc.plant)?;
    print_poles(&mut text, &rhp.poles, &rhp.marginal);
    let cert = certify_stability_default(&model)?;
    let _ = writeln!(
        text,
        "stability: {:?} ({} closed-loop zeros in Re 0..{:.3e}, |Im| <= {:.3e})",
        cert.verdict, cert.zero_count, cert.region.re_max, cert.region.im_max
    );
    if cert.verdict != Verdict::Stable {
        let _ = writeln!(text, "closed loop is not certified stable; integral not evaluated");
        let json = to_json(&AnalyzeJson {
            certificate: &cert,
            integral: None,
            residual: None,
            tolerance: settings.tolerance(),
            pass: false,
        });
        return Ok(Output { text, json, csv: Vec::new(), pass: false });
    }
    let report = bode_integral(&model, settings.rel_tol())?;
    let radii = settings
        .radius_ladder
        .clone()
        .unwrap_or_else(|| RESIDUAL_RADII.map(|k| k * report.cutoff_omega).to_vec());
    let res = gamma_r_residual(&model, &radii)?;
    let report = if res.converged {
        report.with_residual(res.value)
    } else {
        report
    };
    let tol = settings.tolerance();
    let scale = report.theoretical_value.abs().max(report.numeric_value.abs()).max(1.0);
    let pass = report.converged && res.converged && report.reconciliation.abs() <= tol * scale;
    let _ = writeln!(text, "I numeric      = {:.6}", report.numeric_value);
    let _ = writeln!(text, "I theoretical  = {:.6}", report.theoretical_value);
    let _ = writeln!(
        text,
        "arc residual   = {} (error {:.1e}{})",
        fmt_c(res.value),
        res.error,
        if res.converged { "" } else { ", not converged" }
    );
    let _ = writeln!(text, "predicted      = {:.6}", report.predicted_value());
    let _ = writeln!(text, "reconciliation = {:.3e} (tolerance {:.1e})", report.reconciliation, tol * scale);
    for n in &report.notes {
        let _ = writeln!(text, "note: {n}");
    }
    let mut files = Vec::new();
    if csv {
        files.push(("integrand.csv", integrand_csv(&model, &report, 64)?));
    }
    let json = to_json(&AnalyzeJson {
        certificate: &cert,
        integral: Some(&report),
        residual: Some(&res),
        tolerance: tol,
        pass,
    });
    Ok(Output { text, json, csv: files, pass })
}

/// Tolerance of the closure check relative to the largest segment.
pub const CLOSURE_TOLERANCE: f64 = 1e-3;

#[derive(Serialize)]
struct LemmasJson<'a> {
    lemmas: &'a [LemmaReport],
    closure: &'a ClosureReport,
    closure_tolerance: f64,
    skipped: &'a [String],
    pass: bool,
}

fn lemma_line(text: &mut String, r: &LemmaReport) {
    let _ = writeln!(
        text,
        "{:<12} fitted {:>10.4} expected {:>10.4} tol {:.1e}  {}",
        r.name,
        r.fitted,
        r.expected,
        r.tolerance,
        if r.pass { "pass" } else { "FAIL" }
    );
    for (p, m) in r.parameters.iter().zip(&r.magnitudes) {
        let _ = writeln!(text, "    {p:>10.3e}  |value| {m:.6e}");
    }
    if let Some(l) = r.limit {
        let _ = writeln!(text, "    limit estimate {}", fmt_c(l));
    }
    for n in &r.notes {
        let _ = writeln!(text, "    note: {n}");
    }
}

fn cmd_lemmas(doc: &ModelDocument, settings: &Settings, csv: bool) -> Result<Output> {
    let model = doc.clone().into_model();
    let mut text = String::new();
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    let radii = settings.radius_ladder.clone().unwrap_or_else(|| vec![1e2, 1e3, 1e4]);
    let eps = settings.eps_ladder();
    match verify_lemma_arc(&model, &radii) {
        Ok(r) => reports.push(r),
        Err(Error::InvalidParameter(m)) => skipped.push(format!("arc: {m}")),
        Err(e) => return Err(e),
    }
    let poles = model.rhp_zeros();
    if poles.is_empty() {
        skipped.push("pole circles and corridors: no open-loop RHP poles".into());
    }
    for p in &poles {
        reports.push(verify_lemma_pole_circle(&model, p, &eps)?);
        reports.push(verify_corridor_pair(&model, p, &settings.corridor_widths())?);
    }
    reports.push(verify_lemma_origin(&model, &eps)?);
    let reach = poles.iter().map(|p| p.location.norm()).fold(0.0, f64::max);
    let spec = ContourSpec::for_model(&model, 1e3f64.max(10.0 * (1.0 + reach)), 1e-4, 1e-5);
    let closure = closure_check(&model, &spec)?;
    let closure_ok = closure.relative_closure() < CLOSURE_TOLERANCE;
    for r in &reports {
        lemma_line(&mut text, r);
    }
    let _ = writeln!(
        text,
        "{:<12} |sum| / max segment = {:.3e} (tol {:.1e})  {}",
        "closure",
        closure.relative_closure(),
        CLOSURE_TOLERANCE,
        if closure_ok { "pass" } else { "FAIL" }
    );
    for s in &skipped {
        let _ = writeln!(text, "skipped: {s}");
    }
    let pass = closure_ok && reports.iter().all(|r| r.pass);
    let mut files = Vec::new();
    if csv {
        files.push(("contour.csv", segment_csv(&model, &build_contour(&spec)?, 64)?));
    }
    let json = to_json(&LemmasJson {
        lemmas: &reports,
        closure: &closure,
        closure_tolerance: CLOSURE_TOLERANCE,
        skipped: &skipped,
        pass,
    });
    Ok(Output { text, json, csv: files, pass })
}

/// `{N/5, N/2, N}` without duplicates or zeros.
fn truncation_ladder(n: usize) -> Vec<usize> {
    let mut v = vec![(n / 5).max(1), (n / 2).max(1), n];
    v.sort_unstable();
    v.dedup();
    v
}

#[derive(Serialize)]
#[serde(tag = "run", rename_all = "snake_case")]
enum SynthJson {
    Theorem {
        theorem: TheoremReport,
        blaschke: Option<BlaschkeReconciliation>,
        pass: bool,
    },
    Divergence {
        divergence: DivergenceReport,
        pass: bool,
    },
    Additivity {
        numeric: f64,
        outer_alone: f64,
        theoretical: f64,
        pass: bool,
    },
}

fn theorem_text(text: &mut String, r: &TheoremReport) {
    let _ = writeln!(text, "family {:?}: matched composite vs 4*pi*sum Re p_j", r.family);
    for c in &r.cases {
        let _ = writeln!(
            text,
            "  N = {:>4}  numeric {:.6}  theoretical {:.6}  rel.err {:.2e}  sum {:.6}",
            c.n, c.numeric, c.theoretical, c.relative_error, c.partial_sum
        );
    }
    let _ = writeln!(
        text,
        "  max rel.err {:.2e} (tol {:.1e}); partial sums monotone {} and below pi^2/6 {}",
        r.max_relative_error, r.tolerance, r.partial_sums_monotone, r.partial_sums_bounded
    );
    if let Some(s) = &r.semicircle {
        for (e, m) in s.eps.iter().zip(&s.magnitudes) {
            let _ = writeln!(text, "  semicircle at {} eps {e:.1e}: |value| {m:.4e}", fmt_c(s.center));
        }
        let _ = writeln!(text, "  semicircle magnitudes decreasing: {}", s.decreasing);
    }
}

fn cmd_synth(doc: &FamilyDocument, settings: &Settings) -> Result<Output> {
    let mut text = String::new();
    let tol = settings.tolerance();
    let out = match (doc.family, doc.outer) {
        (PoleSequenceFamily::C, _) => {
            let ns = [doc.n, 2 * doc.n, 4 * doc.n];
            let r = demonstrate_divergence(doc.family, &ns)?;
            let _ = writeln!(text, "family C: corridor-pair sums against 2*pi*(Re p* - {})*N", r.bound_eps);
            for c in &r.cases {
                let _ = writeln!(
                    text,
                    "  N = {:>4}  sum {:.6}  bound {:.6}  eps {:.1e}",
                    c.n, c.sum, c.lower_bound, c.eps
                );
            }
            let ratios: Vec<String> = r.ratios.iter().map(|x| format!("{x:.4}")).collect();
            let _ = writeln!(text, "  growth ratios {}; verdict {:?}", ratios.join(", "), r.verdict);
            let pass = r.pass;
            SynthJson::Divergence { divergence: r, pass }
        }
        (family, OuterChoice::Keyword(_)) => {
            let ns = truncation_ladder(doc.n);
            let (theorem, blaschke) = if family == PoleSequenceFamily::B {
                (verify_theorem_limit(family, &ns, tol, &settings.eps_ladder())?, None)
            } else {
                let reach = doc.sequence().iter().map(|p| p.location.norm()).fold(1.0, f64::max);
                let radii = settings
                    .radius_ladder
                    .clone()
                    .unwrap_or_else(|| [20.0, 200.0, 2000.0].map(|k| k * reach).to_vec());
                let b = reconcile_pure_blaschke(family, doc.n, &radii, 1e-2, 1e-2)?;
                (verify_theorem_no_limit(family, &ns, tol)?, Some(b))
            };
            theorem_text(&mut text, &theorem);
            if let Some(b) = &blaschke {
                let _ = writeln!(
                    text,
                    "pure Blaschke N = {}: numeric {:.3e}, 4*pi*sum {:.6}, arc residual {}, predicted {:.3e}",
                    b.n,
                    b.numeric,
                    b.theoretical,
                    fmt_c(b.residual),
                    b.predicted
                );
            }
            let pass = theorem.pass && blaschke.as_ref().map_or(true, |b| b.pass);
            SynthJson::Theorem { theorem, blaschke, pass }
        }
        (_, OuterChoice::FirstOrder(o)) => {
            let model = LoopModel::Synthetic(doc.build()?);
            let r = bode_integral(&model, settings.rel_tol())?;
            let outer_alone = 2.0 * std::f64::consts::PI * (o.a - o.b);
            let scale = outer_alone.abs().max(1.0);
            let pass = r.converged && (r.numeric_value - outer_alone).abs() <= tol * scale;
            let _ = writeln!(
                text,
                "family {:?} N = {} with outer (s+{})/(s+{}): numeric {:.6}, outer alone {:.6}, 4*pi*sum {:.6}",
                doc.family, doc.n, o.a, o.b, r.numeric_value, outer_alone, r.theoretical_value
            );
            SynthJson::Additivity {
                numeric: r.numeric_value,
                outer_alone,
                theoretical: r.theoretical_value,
                pass,
            }
        }
    };
    let (pass, csv) = match &out {
        SynthJson::Theorem { theorem, pass, .. } => {
            let mut s = String::from("N,numeric,theoretical,relative_error,partial_sum\n");
            for c in &theorem.cases {
                let _ = writeln!(s, "{},{},{},{},{}", c.n, c.numeric, c.theoretical, c.relative_error, c.partial_sum);
            }
            (*pass, s)
        }
        SynthJson::Divergence { divergence, pass } => {
            let mut s = String::from("N,sum,lower_bound,eps,width\n");
            for c in &divergence.cases {
                let _ = writeln!(s, "{},{},{},{},{}", c.n, c.sum, c.lower_bound, c.eps, c.width);
            }
            (*pass, s)
        }
        SynthJson::Additivity { numeric, outer_alone, theoretical, pass } => (
            *pass,
            format!("numeric,outer_alone,theoretical\n{numeric},{outer_alone},{theoretical}\n"),
        ),
    };
    Ok(Output {
        text,
        json: to_json(&out),
        csv: vec![("synth.csv", csv)],
        pass,
    })
}

#[derive(Serialize)]
struct SweepJson<'a> {
    points: &'a [SweepPoint],
    stable: usize,
    invariance_spread: Option<f64>,
    comparison: Option<&'a ComparisonReport>,
    tolerance: f64,
    pass: bool,
}

/// Allowed spread of the integral over compliant stable points.
pub const INVARIANCE_TOLERANCE: f64 = 1e-2;

fn cmd_sweep(doc: &SweepDocument, settings: &Settings) -> Result<Output> {
    let grid = doc.grid.clone().unwrap_or_default();
    let points = sweep(&doc.plant, &grid)?;
    let spread = invariance_spread(&doc.plant, &points)?;
    let tol = settings.tolerance();
    let stable = points.iter().filter(|p| p.is_stable()).count();
    let failed = points.iter().filter(|p| p.is_stable() && p.report.is_none()).count();
    let reconciled = points.iter().filter_map(|p| p.report.as_ref()).all(|r| {
        r.reconciliation.abs() <= tol * r.theoretical_value.abs().max(r.numeric_value.abs()).max(1.0)
    });
    let mut text = String::new();
    let _ = writeln!(text, "grid points {}; certified stable {stable}; integral failures {failed}", points.len());
    match spread {
        Some(s) => {
            let _ = writeln!(text, "invariance spread {s:.3e} (tol {INVARIANCE_TOLERANCE:.1e})");
        }
        None => {
            let _ = writeln!(text, "invariance spread: no stable point satisfies m > alpha + n + 1");
        }
    }
    let _ = writeln!(text, "every report reconciles within {tol:.1e}: {reconciled}");
    let comparison = match &doc.compare {
        Some(c) => Some(compare_integer_vs_fractional(&doc.plant, c.gains, &c.alpha_beta)?),
        None => None,
    };
    if let Some(c) = &comparison {
        let _ = writeln!(text, "{}", c.header);
        for row in &c.rows {
            let value = row.point.report.as_ref().map_or("-".to_string(), |r| format!("{:.6}", r.numeric_value));
            let _ = writeln!(
                text,
                "  alpha {:<5} beta {:<5} stable {:<5} I {:>12}{}{}",
                row.alpha,
                row.beta,
                row.point.is_stable(),
                value,
                if row.is_baseline { "  (integer baseline)" } else { "" },
                if row.below_baseline { "  below baseline" } else { "" }
            );
        }
        if !c.baseline_stable {
            let _ = writeln!(text, "  integer baseline is not certified stable");
        }
    }
    let pass = failed == 0 && reconciled && spread.map_or(true, |s| s < INVARIANCE_TOLERANCE);
    let json = to_json(&SweepJson {
        points: &points,
        stable,
        invariance_spread: spread,
        comparison: comparison.as_ref(),
        tolerance: tol,
        pass,
    });
    Ok(Output {
        text,
        json,
        csv: vec![("sweep.csv", sweep_csv(&points))],
        pass,
    })
}
