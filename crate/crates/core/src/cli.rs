//! Command-line front end.
//!
//! Exit codes: 0 success or a converging verdict, 2 usage or parse error,
//! 3 failing verdict, 4 inconclusive verdict, 5 failed check, 6 evaluation
//! error. Data goes to standard output (or `--out`); diagnostics and run
//! times go to standard error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;

use crate::corpus;
use crate::diagnostics::VerdictClass;
use crate::diagnostics::{
    classify_default, default_blocks, liminf_q, sample_profile, Abscissae, DensityProfile, GridSpec,
};
use crate::dsl::{format_scenario, parse_scenario};
use crate::error::Error;
use crate::evaluators::{Caps, Evaluator, Method, MethodParams};
use crate::exact::{format_ratio, parse_rational};
use crate::harness::{check_ids, CheckReport, Harness, Outcome};
use crate::lacunary::LacunarySequence;
use crate::model::Scenario;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILS: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;
pub const EXIT_CHECK_FAILED: i32 = 5;
pub const EXIT_DOMAIN: i32 = 6;

/// Environment variable that overrides every enumeration cap.
pub const CAP_VAR: &str = "SUMMAPROB_CAP";

#[derive(Debug, Parser)]
#[command(
    name = "summaprob",
    version,
    about = "Convergence of order alpha in probability, evaluated at finite n"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a functional and write the profile as CSV.
    Eval(EvalArgs),
    /// Classify the profile's trend.
    Verdict(EvalArgs),
    /// Run a theorem or example check.
    Check(CheckArgs),
    /// Exact minimum of k_r / k_(r-1) over a block window.
    Liminf(LiminfArgs),
    /// Validate a scenario file, or print it in canonical form.
    Parse(ParseArgs),
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Scenario file in the `.sumprob` language.
    #[arg(long, conflicts_with = "corpus", required_unless_present = "corpus")]
    scenario: Option<String>,
    /// Built-in scenario name.
    #[arg(long)]
    corpus: Option<String>,
    /// Corpus parameter override, `key=value` (repeatable).
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// ps, pw, stheta or ntheta.
    #[arg(long)]
    method: String,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    /// pow2, pow:B, fact_even, fact_odd, ratio:JMAX or list:1,2,4,8.
    #[arg(long)]
    theta: Option<String>,
    /// Geometric n grid `n0:ratio:points`.
    #[arg(long, conflicts_with = "blocks")]
    grid: Option<String>,
    /// Block range `r0:r1` for the lacunary methods.
    #[arg(long)]
    blocks: Option<String>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Check identifier, such as thm-2.4.
    #[arg(long, required_unless_present = "all")]
    id: Option<String>,
    /// Run every check.
    #[arg(long)]
    all: bool,
    /// Also write a CSV summary here.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Debug, Args)]
struct LiminfArgs {
    #[arg(long)]
    theta: String,
    /// Block window `r0:r1`.
    #[arg(long)]
    window: String,
}

#[derive(Debug, Args)]
struct ParseArgs {
    #[arg(long)]
    scenario: String,
    /// Print the scenario in canonical form.
    #[arg(long)]
    canonical: bool,
}

/// A failure with its exit code.
#[derive(Debug)]
struct Exit {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Exit {
    Exit {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        Exit {
            code: EXIT_DOMAIN,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Exit {
    fn from(e: io::Error) -> Self {
        Exit {
            code: EXIT_DOMAIN,
            message: format!("i/o error: {e}"),
        }
    }
}

/// Runs the command line `argv` (program name first) against the process's
/// standard streams.
pub fn run_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_cli_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run_cli`] with explicit output streams.
pub fn run_cli_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let caps = match caps_from_env() {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            return e.code;
        }
    };
    let result = match cli.command {
        Command::Eval(a) => eval(&a, caps, out, err),
        Command::Verdict(a) => verdict(&a, caps, out, err),
        Command::Check(a) => check(&a, caps, out, err),
        Command::Liminf(a) => liminf(&a, out),
        Command::Parse(a) => parse(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn caps_from_env() -> Result<Caps, Exit> {
    match std::env::var(CAP_VAR) {
        Ok(v) => {
            let cap: u64 = v.trim().parse().map_err(|_| {
                usage(format!(
                    "{CAP_VAR} must be a non-negative integer, got `{v}`"
                ))
            })?;
            Ok(Caps {
                prefix: cap,
                cesaro: cap,
                block: cap,
            })
        }
        Err(_) => Ok(Caps::default()),
    }
}

fn rational(flag: &str, text: &str) -> Result<BigRational, Exit> {
    parse_rational(text).map_err(|e| usage(format!("--{flag}: {e}")))
}

fn pair(flag: &str, text: &str) -> Result<(u64, u64), Exit> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [a, b] => {
            let a: u64 = a
                .trim()
                .parse()
                .map_err(|_| usage(format!("--{flag}: bad integer `{a}`")))?;
            let b: u64 = b
                .trim()
                .parse()
                .map_err(|_| usage(format!("--{flag}: bad integer `{b}`")))?;
            if a == 0 || a > b {
                return Err(usage(format!("--{flag}: need 1 <= r0 <= r1, got {text}")));
            }
            Ok((a, b))
        }
        _ => Err(usage(format!("--{flag} expects r0:r1, got `{text}`"))),
    }
}

fn grid(text: &str) -> Result<GridSpec, Exit> {
    let parts: Vec<&str> = text.split(':').collect();
    let [n0, ratio, points] = parts.as_slice() else {
        return Err(usage(format!(
            "--grid expects n0:ratio:points, got `{text}`"
        )));
    };
    let n0: u64 = n0
        .trim()
        .parse()
        .map_err(|_| usage(format!("--grid: bad n0 `{n0}`")))?;
    let ratio = rational("grid", ratio)?;
    let points: usize = points
        .trim()
        .parse()
        .map_err(|_| usage(format!("--grid: bad point count `{points}`")))?;
    GridSpec::new(n0, ratio, points).map_err(|e| usage(format!("--grid: {e}")))
}

fn theta(text: &str) -> Result<LacunarySequence, Exit> {
    text.parse()
        .map_err(|e: Error| usage(format!("--theta: {e}")))
}

fn read_scenario(path: &str) -> Result<Scenario, Exit> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}")))?;
    parse_scenario(&text).map_err(|e| usage(format!("{path}: {e}")))
}

struct Job {
    scenario: Scenario,
    method: Method,
    params: MethodParams,
    abscissae: Abscissae,
    theta: Option<LacunarySequence>,
}

fn job(a: &EvalArgs) -> Result<Job, Exit> {
    let method: Method = a
        .method
        .parse()
        .map_err(|e: Error| usage(format!("--method: {e}")))?;
    let mut overrides = Vec::new();
    for kv in &a.params {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| usage(format!("--param expects key=value, got `{kv}`")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    let (scenario, eps_check) = match (&a.scenario, &a.corpus) {
        (Some(path), _) => {
            if !overrides.is_empty() {
                return Err(usage("--param applies to --corpus only"));
            }
            (read_scenario(path)?, None)
        }
        (None, Some(name)) => {
            let entry =
                corpus::entry(name, &overrides).map_err(|e| usage(format!("--corpus: {e}")))?;
            (entry.scenario.clone(), Some(entry))
        }
        (None, None) => return Err(usage("one of --scenario or --corpus is required")),
    };
    let d = &scenario.defaults;
    let pick = |flag: &str,
                given: &Option<String>,
                fallback: &Option<BigRational>|
     -> Result<BigRational, Exit> {
        match (given, fallback) {
            (Some(t), _) => rational(flag, t),
            (None, Some(v)) => Ok(v.clone()),
            (None, None) => Err(usage(format!(
                "--{flag} is required (the scenario has no default)"
            ))),
        }
    };
    let alpha = pick("alpha", &a.alpha, &d.alpha)?;
    let eps = pick("eps", &a.eps, &d.eps)?;
    let delta = pick("delta", &a.delta, &d.delta)?;
    let p = pick(
        "p",
        &a.p,
        &d.p.clone()
            .or_else(|| Some(BigRational::from_integer(1.into()))),
    )?;
    let params = MethodParams::new(alpha, eps, delta, p)?;
    if let Some(entry) = eps_check {
        entry.check_eps(&params.eps)?;
    }
    let abscissae = match (&a.grid, &a.blocks) {
        (Some(g), _) if method.is_lacunary() => {
            return Err(usage(format!(
                "method {method} samples blocks; use --blocks instead of --grid {g}"
            )))
        }
        (_, Some(b)) if !method.is_lacunary() => {
            return Err(usage(format!(
                "method {method} samples an n grid; use --grid instead of --blocks {b}"
            )))
        }
        (Some(g), _) => Abscissae::Grid(grid(g)?),
        (_, Some(b)) => {
            let (r0, r1) = pair("blocks", b)?;
            Abscissae::Blocks((r0..=r1).collect())
        }
        (None, None) if method.is_lacunary() => Abscissae::Blocks(default_blocks()),
        (None, None) => Abscissae::Grid(GridSpec::default()),
    };
    let theta = a.theta.as_deref().map(theta).transpose()?;
    if method.is_lacunary() && theta.is_none() && scenario.theta.is_none() {
        return Err(usage(format!(
            "method {method} needs --theta (the scenario declares none)"
        )));
    }
    Ok(Job {
        scenario,
        method,
        params,
        abscissae,
        theta,
    })
}

fn profile(a: &EvalArgs, caps: Caps, err: &mut dyn Write) -> Result<DensityProfile<f64>, Exit> {
    let job = job(a)?;
    let start = Instant::now();
    let profile = sample_profile::<f64>(
        &job.scenario,
        job.method,
        &job.params,
        &job.abscissae,
        job.theta.as_ref(),
        &Evaluator::new(caps),
    )?;
    for gap in &profile.gaps {
        writeln!(err, "gap at {}: {}", gap.abscissa, gap.reason)?;
    }
    writeln!(err, "runtime {:.3}s", start.elapsed().as_secs_f64())?;
    Ok(profile)
}

/// CSV text of a profile; values carry 17 significant digits.
pub fn profile_csv(profile: &DensityProfile<f64>) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Domain(format!("csv: {e}"));
    w.write_record([
        "abscissa", "value", "method", "alpha", "eps", "delta", "p", "scenario",
    ])
    .map_err(io)?;
    let prm = &profile.params;
    let fixed = [
        profile.method.as_str().to_string(),
        format_ratio(&prm.alpha),
        format_ratio(&prm.eps),
        format_ratio(&prm.delta),
        format_ratio(&prm.p),
        profile.scenario.clone(),
    ];
    for s in &profile.samples {
        let mut row = vec![s.abscissa.to_string(), format!("{:.16e}", s.value)];
        row.extend(fixed.iter().cloned());
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Domain(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn emit(text: &str, path: Option<&str>, out: &mut dyn Write) -> Result<(), Exit> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn eval(a: &EvalArgs, caps: Caps, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Exit> {
    let profile = profile(a, caps, err)?;
    emit(&profile_csv(&profile)?, a.out.as_deref(), out)?;
    Ok(EXIT_OK)
}

fn verdict(
    a: &EvalArgs,
    caps: Caps,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Exit> {
    let profile = profile(a, caps, err)?;
    if let Some(path) = &a.out {
        fs::write(path, profile_csv(&profile)?)?;
    }
    let v = classify_default(&profile)?;
    writeln!(
        out,
        "{} slope={:.16e} last={:.16e} ({})",
        v.class, v.slope, v.last_value, v.evidence
    )?;
    Ok(match v.class {
        VerdictClass::ConvergesToZero => EXIT_OK,
        VerdictClass::FailsToConverge => EXIT_FAILS,
        VerdictClass::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

/// CSV summary of check reports.
pub fn reports_csv(reports: &[CheckReport]) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Domain(format!("csv: {e}"));
    w.write_record([
        "id",
        "outcome",
        "probes",
        "witnesses",
        "unsettled",
        "capped",
        "scenarios",
    ])
    .map_err(io)?;
    for r in reports {
        w.write_record([
            r.id.clone(),
            r.outcome.to_string(),
            r.probes.to_string(),
            r.witnesses.len().to_string(),
            r.unsettled.to_string(),
            r.capped.to_string(),
            r.scenarios.join(";"),
        ])
        .map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Domain(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn check(a: &CheckArgs, caps: Caps, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Exit> {
    let ids: Vec<String> = if a.all {
        check_ids().into_iter().map(String::from).collect()
    } else {
        let id = a.id.clone().expect("clap enforces --id or --all");
        if !check_ids().contains(&id.as_str()) {
            return Err(usage(format!(
                "unknown check id `{id}`; known: {}",
                check_ids().join(", ")
            )));
        }
        vec![id]
    };
    let harness = Harness::new(caps);
    let mut reports = Vec::new();
    for id in &ids {
        let report = harness.run(id)?;
        writeln!(out, "{}", report.render())?;
        writeln!(
            err,
            "{} runtime {:.3}s",
            report.id,
            report.runtime.as_secs_f64()
        )?;
        reports.push(report);
    }
    if let Some(path) = &a.out {
        fs::write(path, reports_csv(&reports)?)?;
    }
    Ok(if reports.iter().any(|r| r.outcome == Outcome::Fail) {
        EXIT_CHECK_FAILED
    } else {
        EXIT_OK
    })
}

fn liminf(a: &LiminfArgs, out: &mut dyn Write) -> Result<i32, Exit> {
    let theta = theta(&a.theta)?;
    let (r0, r1) = pair("window", &a.window)?;
    if let Some(len) = theta.len() {
        if r1 >= len {
            return Err(usage(format!(
                "--window: {} has terms only up to r = {}",
                a.theta,
                len - 1
            )));
        }
    }
    writeln!(out, "{}", format_ratio(&liminf_q(&theta, r0, r1)?))?;
    Ok(EXIT_OK)
}

fn parse(a: &ParseArgs, out: &mut dyn Write) -> Result<i32, Exit> {
    let scenario = read_scenario(&a.scenario)?;
    if a.canonical {
        let text = format_scenario(&scenario).map_err(|e| usage(e.to_string()))?;
        out.write_all(text.as_bytes())?;
    } else {
        writeln!(out, "ok: scenario \"{}\"", scenario.name)?;
    }
    Ok(EXIT_OK)
}
