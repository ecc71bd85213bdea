//! File formats and subcommand bodies for the `torelli` binary.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{ComplexMatrix, C64};
use crate::theta::{RiemannMatrix, ThetaError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("invalid Riemann matrix: {0}")]
    Tau(#[from] ThetaError),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReIm<T> {
    pub re: T,
    pub im: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TauFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub genus: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi_a: Option<ReIm<Vec<Vec<f64>>>>,
    /// b-periods; carried along by the fixture generator, never read here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi_b: Option<ReIm<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_points: Option<Vec<ReIm<Vec<f64>>>>,
}

fn square(m: &[Vec<f64>], g: usize, what: &str) -> Result<(), CliError> {
    if m.len() != g || m.iter().any(|r| r.len() != g) {
        return Err(CliError::Invalid(format!("{what} must be {g}x{g}")));
    }
    if m.iter().flatten().any(|x| !x.is_finite()) {
        return Err(CliError::Invalid(format!("{what} has non-finite entries")));
    }
    Ok(())
}

impl TauFile {
    pub fn parse(text: &str, path: &str) -> Result<Self, CliError> {
        let f: TauFile =
            serde_json::from_str(text).map_err(|source| CliError::Parse { path: path.to_string(), source })?;
        f.check_shapes()?;
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    fn check_shapes(&self) -> Result<(), CliError> {
        let g = self.genus;
        if g == 0 {
            return Err(CliError::Invalid("genus must be positive".into()));
        }
        square(&self.re, g, "re")?;
        square(&self.im, g, "im")?;
        if let Some(p) = &self.pi_a {
            square(&p.re, g, "pi_a.re")?;
            square(&p.im, g, "pi_a.im")?;
        }
        if let Some(pts) = &self.sample_points {
            if pts.iter().any(|p| p.re.len() != g || p.im.len() != g) {
                return Err(CliError::Invalid(format!("sample points must have {g} coordinates")));
            }
        }
        Ok(())
    }

    pub fn riemann(&self) -> Result<RiemannMatrix, CliError> {
        Ok(RiemannMatrix::from_re_im(&self.re, &self.im)?)
    }

    pub fn pi_a(&self) -> Option<ComplexMatrix> {
        self.pi_a.as_ref().map(|p| ComplexMatrix::from_re_im(&p.re, &p.im).expect("shape checked on load"))
    }

    pub fn points(&self) -> Vec<Vec<C64>> {
        self.sample_points
            .iter()
            .flatten()
            .map(|p| p.re.iter().zip(&p.im).map(|(&a, &b)| C64::new(a, b)).collect())
            .collect()
    }
}

pub(crate) fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

// ---------------------------------------------------------------------------
// Reports and commands

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::dubrovin::{
    build_table_orders, cubic_from_singular, membership_residual, quadric_from_singular, recover_quartics,
    DubrovinError, RecoveryOptions, RecoveryResult, DEFAULT_REL_TOL,
};
use crate::poly::{round_to_integers, HomogeneousPoly, PolyJson, RoundingOptions};
use crate::solve::{
    default_random_scale, find_singular_point, random_riemann_matrix, witness_count, SingularOptions, SolveError,
    WitnessOptions,
};
use crate::theta::DEFAULT_ABS_TOL;

/// Seed used by every stochastic command unless `--seed` is given.
pub const DEFAULT_SEED: u64 = 1;

pub mod exit {
    pub const OK: i32 = 0;
    pub const INVALID_INPUT: i32 = 2;
    pub const DIMENSION_MISMATCH: i32 = 3;
    pub const WITNESS_MISMATCH: i32 = 4;
    pub const PATH_BUDGET: i32 = 5;
    pub const SINGULAR_BUDGET: i32 = 6;
    pub const MEMBERSHIP: i32 = 7;
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct Inputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
    pub params: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Inputs,
    pub outputs: BTreeMap<String, Value>,
    pub diagnostics: BTreeMap<String, Value>,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunReport {
    fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            inputs: Inputs::default(),
            outputs: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
            exit_code: exit::OK,
            error: None,
        }
    }

    fn param(&mut self, k: &str, v: impl Serialize) {
        self.inputs.params.insert(k.to_string(), json!(v));
    }

    fn out(&mut self, k: &str, v: impl Serialize) {
        self.outputs.insert(k.to_string(), json!(v));
    }

    fn diag(&mut self, k: &str, v: impl Serialize) {
        self.diagnostics.insert(k.to_string(), json!(v));
    }

    fn fail(mut self, code: i32, msg: impl ToString) -> Self {
        self.exit_code = code;
        self.error = Some(msg.to_string());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Quartics stored under `outputs.quartics`.
    pub fn quartics(&self) -> Option<Vec<PolyJson>> {
        serde_json::from_value(self.outputs.get("quartics")?.clone()).ok()
    }
}

/// A command's report plus the human-readable summary for stderr.
pub struct Outcome {
    pub report: RunReport,
    pub summary: Vec<String>,
}

impl Outcome {
    fn new(report: RunReport) -> Self {
        Outcome { report, summary: Vec::new() }
    }

    fn say(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    fn fail(mut self, code: i32, msg: impl ToString) -> Self {
        let msg = msg.to_string();
        self.say(format!("error: {msg}"));
        self.report = self.report.fail(code, msg);
        self
    }
}

#[derive(Debug, Parser)]
#[command(name = "torelli", version, about = "Recover canonical curves from Riemann matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Include wall-clock timings in the JSON report.
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quartics through the canonical curve from theta constants.
    Recover(RecoverArgs),
    /// Count points of V(quartics) on a random hyperplane.
    Witness(WitnessArgs),
    /// Jacobian test on random Riemann matrices.
    Schottky(SchottkyArgs),
    /// Find a singular point of the theta divisor.
    Singular(SingularArgs),
    /// Theta constants table.
    Constants(ConstantsArgs),
    /// Check that the sample points satisfy the recovered quartics.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    pub tau_file: PathBuf,
    /// Relative singular value cutoff for the nullspace.
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    pub tol: f64,
    /// Also pull the quartics back by Π_a⁻¹.
    #[arg(long)]
    pub basis_change: bool,
    /// Report integer approximations of the (pulled back) quartics.
    #[arg(long)]
    pub round_integers: bool,
    /// Exit 3 when the nullspace dimension differs from 2^g − g(g+1)/2 − 1.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    /// A τ file, a `recover` report, or a JSON list of polynomials.
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Residual gate on every polynomial at accepted points.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct SchottkyArgs {
    #[arg(long, default_value_t = 4)]
    pub genus: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Run the verdict on this τ instead of random matrices.
    #[arg(long)]
    pub tau: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SingularArgs {
    pub tau_file: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Number of random restarts.
    #[arg(long, default_value_t = 50)]
    pub budget: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub emit_quadric: bool,
    #[arg(long)]
    pub emit_cubic: bool,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    pub tau_file: PathBuf,
    /// Derivative orders to compute, from {0, 2, 4}.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0u32, 2, 4])]
    pub orders: Vec<u32>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub tau_file: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

pub fn run(cli: &Cli) -> Outcome {
    let mut o = match &cli.command {
        Command::Recover(a) => cmd_recover(a),
        Command::Witness(a) => cmd_witness(a),
        Command::Schottky(a) => cmd_schottky(a),
        Command::Singular(a) => cmd_singular(a),
        Command::Constants(a) => cmd_constants(a, cli.timings),
        Command::Verify(a) => cmd_verify(a),
    };
    if !cli.timings {
        o.report.diagnostics.remove("seconds");
    }
    o
}

fn c64_json(z: &C64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn polys_json(ps: &[HomogeneousPoly]) -> Vec<PolyJson> {
    ps.iter().map(HomogeneousPoly::to_json).collect()
}

fn load_tau(path: &Path, report: &mut RunReport) -> Result<(TauFile, String), CliError> {
    let text = read(path)?;
    report.inputs.file = Some(path.display().to_string());
    report.inputs.sha256 = Some(hex::encode(Sha256::digest(text.as_bytes())));
    let f = TauFile::parse(&text, &path.display().to_string())?;
    Ok((f, text))
}

fn recover(f: &TauFile, rel_tol: f64) -> Result<RecoveryResult, String> {
    let tau = f.riemann().map_err(|e| e.to_string())?;
    let opts = RecoveryOptions {
        rel_tol,
        ..Default::default()
    };
    recover_quartics(&tau, &opts).map_err(|e| e.to_string())
}

fn recovery_diagnostics(r: &mut RunReport, res: &RecoveryResult) {
    r.diag("nullspace_dim", res.nullspace_dim());
    r.diag("expected_dim", res.expected_dim);
    r.diag("dimension_mismatch", res.dimension_mismatch);
    r.diag("singular_values", &res.singular_values);
}

pub fn cmd_recover(a: &RecoverArgs) -> Outcome {
    let mut o = Outcome::new(RunReport::new("recover"));
    o.report.param("tol", a.tol);
    o.report.param("basis_change", a.basis_change);
    o.report.param("round_integers", a.round_integers);
    o.report.param("strict", a.strict);
    let (f, _) = match load_tau(&a.tau_file, &mut o.report) {
        Ok(v) => v,
        Err(e) => return o.fail(exit::INVALID_INPUT, e),
    };
    let pi_inv = if a.basis_change {
        match f.pi_a().map(|p| p.inverse()) {
            Some(Ok(m)) => Some(m),
            Some(Err(e)) => return o.fail(exit::INVALID_INPUT, format!("pi_a is not invertible: {e}")),
            None => return o.fail(exit::INVALID_INPUT, "--basis-change needs pi_a in the input"),
        }
    } else {
        None
    };
    let start = Instant::now();
    let res = match recover(&f, a.tol) {
        Ok(r) => r,
        Err(e) => return o.fail(exit::INVALID_INPUT, e),
    };
    o.report.diag("seconds", start.elapsed().as_secs_f64());
    recovery_diagnostics(&mut o.report, &res);
    o.report.out("quartics", polys_json(&res.quartics));
    o.say(format!(
        "genus {}: nullspace dimension {} (expected {})",
        f.genus,
        res.nullspace_dim(),
        res.expected_dim
    ));
    let mut for_rounding = res.quartics.clone();
    if let Some(m) = pi_inv {
        let pulled: Result<Vec<_>, _> = res
            .quartics
            .iter()
            .map(|q| q.substitute_linear(&m).and_then(|p| p.normalize()))
            .collect();
        match pulled {
            Ok(p) => {
                o.report.out("basis_changed", polys_json(&p));
                for_rounding = p;
            }
            Err(e) => return o.fail(exit::INVALID_INPUT, e),
        }
    }
    if a.round_integers {
        let mut rounded = Vec::new();
        for q in &for_rounding {
            match round_to_integers(q, &RoundingOptions::default()) {
                Ok((ip, err)) => {
                    o.say(format!("integer form: {ip}  (max deviation {err:.1e})"));
                    rounded.push(json!({ "poly": ip, "text": ip.to_string(), "max_deviation": err }));
                }
                Err(e) => {
                    o.say(format!("integer form: none ({e})"));
                    rounded.push(json!({ "poly": null, "reason": e.to_string() }));
                }
            }
        }
        o.report.out("rounded", rounded);
    }
    if a.strict && res.dimension_mismatch {
        let msg = format!("nullspace dimension {} != {}", res.nullspace_dim(), res.expected_dim);
        return o.fail(exit::DIMENSION_MISMATCH, msg);
    }
    o
}

/// Polynomials from a τ file (recovered), a report with `outputs.quartics`,
/// or a bare list in the polynomial schema.
fn witness_input(path: &Path, report: &mut RunReport) -> Result<Vec<HomogeneousPoly>, String> {
    let text = read(path).map_err(|e| e.to_string())?;
    report.inputs.file = Some(path.display().to_string());
    report.inputs.sha256 = Some(hex::encode(Sha256::digest(text.as_bytes())));
    let v: Value = serde_json::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))?;
    let list: Vec<PolyJson> = if v.get("re").is_some() && v.get("im").is_some() {
        let f = TauFile::parse(&text, &path.display().to_string()).map_err(|e| e.to_string())?;
        let r = recover(&f, DEFAULT_REL_TOL)?;
        recovery_diagnostics(report, &r);
        polys_json(&r.quartics)
    } else if let Ok(rep) = serde_json::from_value::<RunReport>(v.clone()) {
        rep.quartics().ok_or("report has no outputs.quartics")?
    } else {
        serde_json::from_value(v).map_err(|e| format!("expected a τ file, a report or a polynomial list: {e}"))?
    };
    let polys = list
        .iter()
        .map(HomogeneousPoly::from_json)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let first = polys.first().ok_or("no polynomials")?;
    if polys.iter().any(|p| p.nvars() != first.nvars() || p.degree() != first.degree()) {
        return Err("polynomials must share nvars and degree".into());
    }
    Ok(polys)
}

fn witness_exit(e: &SolveError) -> i32 {
    match e {
        SolveError::TooManyPaths { .. } => exit::PATH_BUDGET,
        _ => exit::INVALID_INPUT,
    }
}

pub fn cmd_witness(a: &WitnessArgs) -> Outcome {
    let mut o = Outcome::new(RunReport::new("witness"));
    o.report.param("seed", a.seed);
    o.report.param("tol", a.tol);
    let polys = match witness_input(&a.input, &mut o.report) {
        Ok(p) => p,
        Err(e) => return o.fail(exit::INVALID_INPUT, e),
    };
    let g = polys[0].nvars();
    let opts = WitnessOptions {
        tol: a.tol,
        ..Default::default()
    };
    let start = Instant::now();
    let w = match witness_count(&polys, a.seed, &opts) {
        Ok(w) => w,
        Err(e) => return o.fail(witness_exit(&e), e),
    };
    o.report.diag("seconds", start.elapsed().as_secs_f64());
    let expected = 2 * g - 2;
    o.report.out("count", w.count);
    o.report.out("expected", expected);
    o.report
        .out("points", w.points.iter().map(|p| p.iter().map(c64_json).collect::<Vec<_>>()).collect::<Vec<_>>());
    o.report.diag("paths_tracked", w.paths_tracked);
    o.report.diag("failures", w.failures);
    o.report.diag("residual_max", w.residual_max);
    o.report.diag("min_rejected_residual", w.min_rejected_residual);
    o.say(format!("{} witness points (degree of a canonical curve: {expected})", w.count));
    if w.count != expected {
        o.report.exit_code = exit::WITNESS_MISMATCH;
    }
    o
}

pub fn cmd_schottky(a: &SchottkyArgs) -> Outcome {
    let mut o = Outcome::new(RunReport::new("schottky"));
    o.report.param("genus", a.genus);
    o.report.param("trials", a.trials);
    o.report.param("seed", a.seed);
    o.report.param("tol", a.tol);
    let mut taus: Vec<(Option<u64>, RiemannMatrix)> = Vec::new();
    if let Some(path) = &a.tau {
        match load_tau(path, &mut o.report).and_then(|(f, _)| f.riemann()) {
            Ok(t) => taus.push((None, t)),
            Err(e) => return o.fail(exit::INVALID_INPUT, e),
        }
    } else {
        if a.genus < 3 {
            return o.fail(exit::INVALID_INPUT, format!("genus must be at least 3, got {}", a.genus));
        }
        for i in 0..a.trials {
            let s = a.seed.wrapping_add(i as u64);
            taus.push((Some(s), random_riemann_matrix(a.genus, s, default_random_scale(a.genus))));
        }
    }
    let opts = WitnessOptions {
        tol: a.tol,
        ..Default::default()
    };
    let mut trials = Vec::new();
    let (mut jac, mut not) = (0, 0);
    let start = Instant::now();
    for (k, (s, tau)) in taus.iter().enumerate() {
        let g = tau.genus();
        let res = match recover_quartics(tau, &RecoveryOptions::default()) {
            Ok(r) => r,
            Err(e) => return o.fail(exit::INVALID_INPUT, e),
        };
        let w = match witness_count(&res.quartics, a.seed, &opts) {
            Ok(w) => w,
            Err(e) => return o.fail(witness_exit(&e), e),
        };
        let consistent = w.count == 2 * g - 2;
        let verdict = if consistent { "consistent with Jacobian" } else { "not a Jacobian" };
        if consistent {
            jac += 1;
        } else {
            not += 1;
        }
        o.say(format!("trial {k}: {} witness points, {verdict}", w.count));
        trials.push(json!({
            "trial": k,
            "tau_seed": s,
            "nullspace_dim": res.nullspace_dim(),
            "count": w.count,
            "verdict": verdict,
            "min_rejected_residual": w.min_rejected_residual,
        }));
    }
    o.report.diag("seconds", start.elapsed().as_secs_f64());
    o.report.out("trials", trials);
    o.report.out("consistent_with_jacobian", jac);
    o.report.out("not_a_jacobian", not);
    o.say(format!("{not}/{} not a Jacobian", taus.len()));
    o
}

pub fn cmd_singular(a: &SingularArgs) -> Outcome {
    let mut o = Outcome::new(RunReport::new("singular"));
    o.report.param("seed", a.seed);
    o.report.param("budget", a.budget);
    o.report.param("tol", a.tol);
    o.report.param("emit_quadric", a.emit_quadric);
    o.report.param("emit_cubic", a.emit_cubic);
    let (f, tau) = match load_tau(&a.tau_file, &mut o.report).and_then(|(f, _)| {
        let t = f.riemann()?;
        Ok((f, t))
    }) {
        Ok(v) => v,
        Err(e) => return o.fail(exit::INVALID_INPUT, e),
    };
    let opts = SingularOptions {
        tol: a.tol,
        budget: a.budget,
        ..Default::default()
    };
    let start = Instant::now();
    let p = match find_singular_point(&tau, a.seed, &opts) {
        Ok(p) => p,
        Err(SolveError::BudgetExhausted { best_residual, best_z }) => {
            if best_residual.is_finite() {
                o.report.diag("best_residual", best_residual);
                o.report.out("best_z", best_z.iter().map(c64_json).collect::<Vec<_>>());
            }
            return o.fail(exit::SINGULAR_BUDGET, format!("restart budget exhausted; best residual {best_residual:e}"));
        }
        Err(e) => return o.fail(exit::INVALID_INPUT, e),
    };
    o.report.diag("seconds", start.elapsed().as_secs_f64());
    o.report.out("z0", p.z.iter().map(c64_json).collect::<Vec<_>>());
    o.report.diag("residual", p.residual);
    o.report.diag("restart", p.restart);
    o.report.diag("iterations", p.iters);
    o.say(format!("singular point found at restart {} with residual {:.2e}", p.restart, p.residual));
    let pi_inv = f.pi_a().and_then(|m| m.inverse().ok());
    type Form = fn(&[C64], &RiemannMatrix, f64) -> Result<HomogeneousPoly, DubrovinError>;
    let forms: [(bool, &str, Form); 2] =
        [(a.emit_quadric, "quadric", quadric_from_singular), (a.emit_cubic, "cubic", cubic_from_singular)];
    for (wanted, name, form) in forms {
        if !wanted {
            continue;
        }
        let q = match form(&p.z, &tau, DEFAULT_ABS_TOL).and_then(|q| Ok(q.normalize()?)) {
            Ok(q) => q,
            Err(e) => return o.fail(exit::INVALID_INPUT, e),
        };
        o.report.out(name, q.to_json());
        if let Some(m) = &pi_inv {
            match q.substitute_linear(m).and_then(|p| p.normalize()) {
                Ok(b) => {
                    o.say(format!("{name} after basis change: {}", b.chop(1e-10)));
                    o.report.out(&format!("{name}_basis_changed"), b.to_json());
                }
                Err(e) => return o.fail(exit::INVALID_INPUT, e),
            }
        }
    }
    o
}

pub fn cmd_constants(a: &ConstantsArgs, timings: bool) -> Outcome {
    let mut o = Outcome::new(RunReport::new("constants"));
    o.report.param("orders", &a.orders);
    if a.orders.iter().any(|k| ![0, 2, 4].contains(k)) {
        return o.fail(exit::INVALID_INPUT, "orders must be a subset of {0, 2, 4}");
    }
    let tau = match load_tau(&a.tau_file, &mut o.report).and_then(|(f, _)| f.riemann()) {
        Ok(t) => t,
        Err(e) => return o.fail(exit::INVALID_INPUT, e),
    };
    let (table, times) = match build_table_orders(&tau, DEFAULT_ABS_TOL, &a.orders) {
        Ok(v) => v,
        Err(e) => return o.fail(exit::INVALID_INPUT, e),
    };
    let g = table.genus;
    let entries: Vec<Value> = table
        .entries
        .iter()
        .map(|e| {
            let mut m = serde_json::Map::new();
            m.insert("eps".into(), json!(e.eps));
            m.insert("value".into(), c64_json(&e.value0));
            if let Some(h) = &e.hessian {
                let rows: Vec<Vec<Value>> = (0..g).map(|i| (0..g).map(|j| c64_json(&h[(i, j)])).collect()).collect();
                m.insert("hessian".into(), json!(rows));
            }
            if let Some(f) = &e.fourth {
                let list: Vec<Value> =
                    f.iter().map(|(q, v)| json!({ "index": q, "re": v.re, "im": v.im })).collect();
                m.insert("fourth".into(), json!(list));
            }
            Value::Object(m)
        })
        .collect();
    o.report.out("genus", g);
    o.report.out("entries", entries);
    let n2 = table.count_values_and_hessians();
    let n4 = table.count_fourth();
    o.report.diag("count_values_and_hessians", n2);
    o.report.diag("count_fourth", n4);
    o.say(format!("genus {g}: {n2} constants of order 0 and 2, {n4} of order 4"));
    if timings {
        let per: BTreeMap<String, f64> =
            times.per_order.iter().map(|(k, d)| (k.to_string(), d.as_secs_f64())).collect();
        for (k, s) in &per {
            o.say(format!("order {k}: {s:.3} s"));
        }
        o.report.diag("seconds", per);
    }
    o
}

pub fn cmd_verify(a: &VerifyArgs) -> Outcome {
    let mut o = Outcome::new(RunReport::new("verify"));
    o.report.param("tol", a.tol);
    let (f, _) = match load_tau(&a.tau_file, &mut o.report) {
        Ok(v) => v,
        Err(e) => return o.fail(exit::INVALID_INPUT, e),
    };
    let pts = f.points();
    if pts.is_empty() {
        return o.fail(exit::INVALID_INPUT, "usage: verify needs a τ file with non-empty sample_points");
    }
    let res = match recover(&f, DEFAULT_REL_TOL) {
        Ok(r) => r,
        Err(e) => return o.fail(exit::INVALID_INPUT, e),
    };
    recovery_diagnostics(&mut o.report, &res);
    let r = match membership_residual(&res.quartics, &pts) {
        Ok(r) => r,
        Err(e) => return o.fail(exit::INVALID_INPUT, e),
    };
    o.report.out("max_residual", r);
    o.report.out("points", pts.len());
    o.say(format!("{} sample points, max residual {r:.2e} (tolerance {:.0e})", pts.len(), a.tol));
    if !(r <= a.tol) {
        return o.fail(exit::MEMBERSHIP, format!("membership residual {r:e} exceeds {:e}", a.tol));
    }
    o
}
