//! Command-line front end.
//!
//! Every command writes JSON-lines records to stdout or `--out`. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | usage error |
//! | 2 | unreadable or malformed input, unwritable output |
//! | 3 | an invariant check failed |
//! | 4 | an iterative solver did not converge |

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::error::Error;
use crate::io::{load_measure, InputError};
use crate::lattice::{max_convex, min_convex, sandwich_check};
use crate::measures::DiscreteMeasure;
use crate::projection::{
    equaldist_check, is_convex_order, lipschitz_audit, project_i, project_j, wasserstein,
    LipschitzReport, ORDER_TOL,
};
use crate::random::{random_measure, trial_rng};
use crate::replay::replay_examples;
use crate::weakot::{plan_barycenter_pushforward, solve_weak_ot, WeakOtOptions};

/// Slack allowed on `lhs ≤ rhs` in audits.
pub const AUDIT_SLACK: f64 = 1e-9;
/// Largest accepted gap between `V_2^2(μ, ν)` and `W_2^2(μ, I(μ, ν))`.
pub const WEAK_OT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "wproj",
    version,
    about = "Wasserstein projections in the convex order"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Exponent of the Wasserstein distance.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub p: f64,
    /// Tolerance for convex-order and barycenter checks.
    #[arg(long, global = true, default_value_t = ORDER_TOL)]
    pub tol: f64,
    /// Seed for randomized audits.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of audit trials.
    #[arg(long, global = true, default_value_t = 1000)]
    pub trials: usize,
    /// Atoms used to discretize quantile-piece inputs.
    #[arg(long = "discretize-n", global = true, default_value_t = 4096)]
    pub discretize_n: usize,
    /// Write records here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Compute I(mu, nu) and J(mu, nu).
    Project {
        mu: PathBuf,
        nu: PathBuf,
        /// Cross-check I(mu, nu) against the weak transport solver.
        #[arg(long)]
        check_weak_ot: bool,
    },
    /// Compute W_p(a, b).
    Distance { a: PathBuf, b: PathBuf },
    /// Test a <=_c b and b <=_c a.
    OrderCheck { a: PathBuf, b: PathBuf },
    /// Convex-order minimum and maximum of two measures with a common barycenter.
    Lattice { a: PathBuf, b: PathBuf },
    /// Check the Lipschitz bounds of I and J on random quadruples, or on the
    /// given `mu mu' nu nu'`.
    Audit {
        /// Largest atom count of a random measure.
        #[arg(long, default_value_t = 10)]
        max_atoms: usize,
        #[arg(value_names = ["MU", "MU2", "NU", "NU2"], num_args = 0..=4)]
        quadruple: Vec<PathBuf>,
    },
    /// Recompute the reference examples.
    ReplayExamples {
        /// Also write plot data as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("{path}: {source}")]
    Output { path: String, source: io::Error },
    #[error("{0}")]
    Invariant(String),
    #[error(transparent)]
    Compute(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Input(_) | Self::Output { .. } => 2,
            Self::Invariant(_) => 3,
            Self::Compute(Error::NoConvergence { .. }) => 4,
            Self::Compute(Error::InvalidP(_)) => 1,
            Self::Compute(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Compute(e)
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        if !(self.p.is_finite() && self.p >= 1.0) {
            return Err(CliError::Usage(format!(
                "--p must be a finite number >= 1, got {}",
                self.p
            )));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(CliError::Usage(format!(
                "--tol must be finite and non-negative, got {}",
                self.tol
            )));
        }
        if self.trials == 0 {
            return Err(CliError::Usage("--trials must be positive".into()));
        }
        if self.discretize_n == 0 {
            return Err(CliError::Usage("--discretize-n must be positive".into()));
        }
        if let Command::Audit {
            max_atoms,
            quadruple,
        } = &self.command
        {
            if *max_atoms == 0 {
                return Err(CliError::Usage("--max-atoms must be positive".into()));
            }
            if !matches!(quadruple.len(), 0 | 4) {
                return Err(CliError::Usage(
                    "audit takes no measure files or exactly four".into(),
                ));
            }
        }
        Ok(())
    }

    fn load(&self, path: &Path) -> Result<DiscreteMeasure, CliError> {
        Ok(load_measure(path)?.into_discrete(self.discretize_n))
    }
}

struct Records<'a> {
    sink: Box<dyn Write + 'a>,
    label: String,
}

impl Records<'_> {
    fn emit(&mut self, record: &Value) -> Result<(), CliError> {
        serde_json::to_writer(&mut self.sink, record)
            .map_err(io::Error::from)
            .and_then(|_| self.sink.write_all(b"\n"))
            .map_err(|source| CliError::Output {
                path: self.label.clone(),
                source,
            })
    }

    fn flush(&mut self) -> Result<(), CliError> {
        self.sink.flush().map_err(|source| CliError::Output {
            path: self.label.clone(),
            source,
        })
    }
}

fn tagged<T: Serialize>(tag: &str, body: &T) -> Value {
    let mut v = serde_json::to_value(body).expect("serializable record");
    if let Value::Object(map) = &mut v {
        map.insert("record".into(), Value::from(tag));
    }
    v
}

fn atoms(m: &DiscreteMeasure) -> Value {
    serde_json::to_value(m.atoms()).expect("serializable atoms")
}

fn ratio_value(r: Option<f64>) -> Value {
    match r {
        None => Value::from("degenerate"),
        Some(x) if x.is_infinite() => Value::from("infinite"),
        Some(x) => Value::from(x),
    }
}

fn cmd_project(
    cfg: &RunConfig,
    mu: &Path,
    nu: &Path,
    check_weak_ot: bool,
    out: &mut Records,
) -> Result<(), CliError> {
    let (mu, nu) = (cfg.load(mu)?, cfg.load(nu)?);
    let pi = project_i(&mu, &nu, cfg.p)?;
    let pj = project_j(&mu, &nu, cfg.p)?;
    let eq = equaldist_check(&mu, &nu, cfg.p)?;
    let (r1, r2) = eq.residuals();
    let i_le_nu = is_convex_order(&pi.projected, &nu, cfg.tol)?;
    let mu_le_j = is_convex_order(&mu, &pj.projected, cfg.tol)?;
    out.emit(&json!({
        "record": "projection",
        "p": cfg.p,
        "i": atoms(&pi.projected),
        "j": atoms(&pj.projected),
        "w_i_mu": eq.i_to_mu,
        "w_j_nu": eq.j_to_nu,
        "w_i_nu": eq.i_to_nu,
        "w_j_mu": eq.j_to_mu,
        "equaldist_residuals": [r1, r2],
        "i_le_nu": i_le_nu,
        "mu_le_j": mu_le_j,
        "hull": pi.hull.vertices(),
    }))?;

    let mut failures = Vec::new();
    if !i_le_nu {
        failures.push("I(mu, nu) is not dominated by nu".to_string());
    }
    if !mu_le_j {
        failures.push("J(mu, nu) does not dominate mu".to_string());
    }
    let scale = 1.0 + eq.i_to_mu.max(eq.i_to_nu);
    if r1.max(r2) > cfg.tol * scale {
        failures.push(format!(
            "equal-distance residuals {r1:e}, {r2:e} exceed {}",
            cfg.tol
        ));
    }

    if check_weak_ot {
        let sol = solve_weak_ot(&mu, &nu, &WeakOtOptions::default())?;
        let w2_sq = wasserstein(&mu, &pi.projected, 2.0)?.powi(2);
        let push = plan_barycenter_pushforward(&sol.plan, &mu, &nu)?;
        let push_w2 = wasserstein(&push, &project_i(&mu, &nu, 2.0)?.projected, 2.0)?;
        out.emit(&json!({
            "record": "weak_ot",
            "value": sol.value,
            "w2_sq_mu_i": w2_sq,
            "gap": sol.value - w2_sq,
            "pushforward_w2_to_i": push_w2,
            "iterations": sol.iterations,
        }))?;
        if (sol.value - w2_sq).abs() > WEAK_OT_TOL {
            failures.push(format!(
                "weak transport value {} differs from W_2^2(mu, I) = {w2_sq}",
                sol.value
            ));
        }
    }
    match failures.is_empty() {
        true => Ok(()),
        false => Err(CliError::Invariant(failures.join("; "))),
    }
}

fn cmd_order(cfg: &RunConfig, a: &Path, b: &Path, out: &mut Records) -> Result<(), CliError> {
    let (a, b) = (cfg.load(a)?, cfg.load(b)?);
    let gap = b.barycenter() - a.barycenter();
    let comparable = gap.abs() <= cfg.tol;
    let (a_le_b, b_le_a) = if comparable {
        (
            is_convex_order(&a, &b, cfg.tol)?,
            is_convex_order(&b, &a, cfg.tol)?,
        )
    } else {
        (false, false)
    };
    out.emit(&json!({
        "record": "order",
        "barycenter_gap": gap,
        "comparable": comparable,
        "a_le_b": a_le_b,
        "b_le_a": b_le_a,
    }))
}

fn cmd_lattice(cfg: &RunConfig, a: &Path, b: &Path, out: &mut Records) -> Result<(), CliError> {
    let (a, b) = (cfg.load(a)?, cfg.load(b)?);
    let meet = min_convex(&a, &b, cfg.tol)?;
    let join = max_convex(&a, &b, cfg.tol)?;
    let sandwich = sandwich_check(&a, &b, cfg.tol)?;
    out.emit(&json!({
        "record": "lattice",
        "meet": atoms(&meet),
        "join": atoms(&join),
        "sandwich": sandwich,
    }))?;
    match sandwich {
        true => Ok(()),
        false => Err(CliError::Invariant(
            "meet <=_c a, b <=_c join does not hold".into(),
        )),
    }
}

fn audit_trial(cfg: &RunConfig, trial: usize, max_atoms: usize) -> Result<LipschitzReport, Error> {
    let mut rng = trial_rng(cfg.seed, trial as u64);
    let mu = random_measure(&mut rng, max_atoms);
    let mu2 = random_measure(&mut rng, max_atoms);
    let nu = random_measure(&mut rng, max_atoms);
    let nu2 = random_measure(&mut rng, max_atoms);
    lipschitz_audit(&mu, &mu2, &nu, &nu2, cfg.p)
}

fn cmd_audit(
    cfg: &RunConfig,
    max_atoms: usize,
    quadruple: &[PathBuf],
    out: &mut Records,
) -> Result<(), CliError> {
    let reports: Vec<Result<LipschitzReport, Error>> = if quadruple.is_empty() {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| audit_trial(cfg, t, max_atoms))
            .collect()
    } else {
        let m = quadruple
            .iter()
            .map(|p| cfg.load(p))
            .collect::<Result<Vec<_>, _>>()?;
        vec![lipschitz_audit(&m[0], &m[1], &m[2], &m[3], cfg.p)]
    };
    let trials = reports.len();
    let (mut max_i, mut max_j) = (0.0f64, 0.0f64);
    let (mut violations, mut degenerate) = (0usize, 0usize);
    for (t, report) in reports.into_iter().enumerate() {
        let r = report?;
        let (ri, rj) = (r.ratio_i(), r.ratio_j());
        max_i = ri.map_or(max_i, |x| max_i.max(x));
        max_j = rj.map_or(max_j, |x| max_j.max(x));
        degenerate += usize::from(ri.is_none() || rj.is_none());
        let ok = r.holds(AUDIT_SLACK);
        violations += usize::from(!ok);
        out.emit(&json!({
            "record": "trial",
            "trial": t,
            "lhs_i": r.lhs_i,
            "rhs_i": r.rhs_i,
            "lhs_j": r.lhs_j,
            "rhs_j": r.rhs_j,
            "ratio_i": ratio_value(ri),
            "ratio_j": ratio_value(rj),
            "holds": ok,
        }))?;
    }
    out.emit(&json!({
        "record": "audit_summary",
        "p": cfg.p,
        "seed": cfg.seed,
        "trials": trials,
        "max_atoms": max_atoms,
        "max_ratio_i": max_i,
        "max_ratio_j": max_j,
        "degenerate": degenerate,
        "violations": violations,
    }))?;
    match violations {
        0 => Ok(()),
        v => Err(CliError::Invariant(format!(
            "{v} of {trials} trials violate the Lipschitz bound"
        ))),
    }
}

fn write_plot_csv(path: &Path, report: &crate::replay::ReplayReport) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "series,x,p,value,expected")?;
    for r in &report.lattice {
        writeln!(w, "lattice_join,{},{},{},{}", r.n, r.p, r.join, r.expected)?;
        writeln!(w, "lattice_meet,{},{},{},{}", r.n, r.p, r.meet, r.expected)?;
    }
    for r in &report.alpha_sweep {
        writeln!(
            w,
            "alpha_ratio_i,{},1,{},{}",
            r.alpha, r.ratio_i, r.expected_ratio
        )?;
        writeln!(
            w,
            "alpha_ratio_j,{},1,{},{}",
            r.alpha, r.ratio_j, r.expected_ratio
        )?;
    }
    w.flush()
}

fn cmd_replay(csv: Option<&PathBuf>, out: &mut Records) -> Result<(), CliError> {
    let report = replay_examples()?;
    for r in &report.fixtures {
        out.emit(&tagged("fixture", r))?;
    }
    for r in &report.lattice {
        out.emit(&tagged("lattice_ratio", r))?;
    }
    for r in &report.alpha_sweep {
        out.emit(&tagged("alpha_sweep", r))?;
    }
    let failed = report.fixtures.iter().filter(|r| !r.pass).count()
        + report.lattice.iter().filter(|r| !r.pass).count();
    out.emit(&json!({
        "record": "replay_summary",
        "fixtures": report.fixtures.len() + report.lattice.len(),
        "failed": failed,
    }))?;
    if let Some(path) = csv {
        write_plot_csv(path, &report).map_err(|source| CliError::Output {
            path: path.display().to_string(),
            source,
        })?;
    }
    match failed {
        0 => Ok(()),
        n => Err(CliError::Invariant(format!(
            "{n} reference examples failed"
        ))),
    }
}

/// Runs a parsed configuration.
pub fn execute(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.validate()?;
    let mut out = match &cfg.out {
        Some(path) => Records {
            sink: Box::new(BufWriter::new(File::create(path).map_err(|source| {
                CliError::Output {
                    path: path.display().to_string(),
                    source,
                }
            })?)),
            label: path.display().to_string(),
        },
        None => Records {
            sink: Box::new(io::stdout().lock()),
            label: "stdout".into(),
        },
    };
    let result = match &cfg.command {
        Command::Project {
            mu,
            nu,
            check_weak_ot,
        } => cmd_project(cfg, mu, nu, *check_weak_ot, &mut out),
        Command::Distance { a, b } => {
            let w = wasserstein(&cfg.load(a)?, &cfg.load(b)?, cfg.p)?;
            out.emit(&json!({ "record": "distance", "p": cfg.p, "w": w }))
        }
        Command::OrderCheck { a, b } => cmd_order(cfg, a, b, &mut out),
        Command::Lattice { a, b } => cmd_lattice(cfg, a, b, &mut out),
        Command::Audit {
            max_atoms,
            quadruple,
        } => cmd_audit(cfg, *max_atoms, quadruple, &mut out),
        Command::ReplayExamples { csv } => cmd_replay(csv.as_ref(), &mut out),
    };
    // Records written before a failed check are still useful.
    out.flush()?;
    result
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cfg) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("wproj: {e}");
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_global_flags_after_subcommand() {
        let cfg = RunConfig::try_parse_from([
            "wproj", "audit", "--p", "2", "--trials", "5", "--seed", "9",
        ])
        .unwrap();
        assert_eq!(cfg.p, 2.0);
        assert_eq!(cfg.trials, 5);
        assert_eq!(cfg.seed, 9);
        assert!(
            matches!(cfg.command, Command::Audit { max_atoms: 10, ref quadruple } if quadruple.is_empty())
        );
    }

    #[test]
    fn usage_errors_exit_with_one() {
        assert_eq!(run_with(["wproj"]), 1);
        assert_eq!(run_with(["wproj", "frobnicate"]), 1);
        assert_eq!(run_with(["wproj", "audit", "--p", "0.5"]), 1);
        assert_eq!(run_with(["wproj", "audit", "--trials", "0"]), 1);
        assert_eq!(run_with(["wproj", "audit", "a.json", "b.json"]), 1);
    }

    #[test]
    fn missing_input_exits_with_two() {
        assert_eq!(
            run_with([
                "wproj",
                "distance",
                "/nonexistent/a.json",
                "/nonexistent/b.json"
            ]),
            2
        );
    }

    #[test]
    fn ratio_sentinels() {
        assert_eq!(ratio_value(None), Value::from("degenerate"));
        assert_eq!(ratio_value(Some(f64::INFINITY)), Value::from("infinite"));
        assert_eq!(ratio_value(Some(0.5)), Value::from(0.5));
    }
}
