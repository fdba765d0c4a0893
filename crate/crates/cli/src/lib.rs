//! Command implementations behind the `vhip` binary.

// `!(a > b)` is how NaN gets rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use vhip_core::f64::{ContactSurface, PendulumState, PhysicalConstants, TrajectoryLog, Vector3};
use vhip_core::scenario_file::ScenarioFile;
use vhip_core::simulation::Scenario;
use vhip_core::{assess_zero_step, fixed_cop_capture_segment, run, separation_certificate};

pub mod svg;
pub mod sweep;

/// Exit status: capturable, or a command that completed.
pub const EXIT_OK: u8 = 0;
/// Exit status of `analyze` for a state that cannot be captured.
pub const EXIT_NOT_CAPTURABLE: u8 = 1;
/// Exit status for invalid input or a failed command.
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "vhip",
    version,
    about = "Variable-height inverted pendulum balance toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Zero-step capturability report for the initial state of a scenario.
    Analyze(AnalyzeArgs),
    /// Run a scenario and write its trajectory.
    Simulate(SimulateArgs),
    /// Analyze and simulate every cell of a push or velocity grid.
    Sweep(sweep::SweepArgs),
    /// Print the version.
    Version,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub scenario: PathBuf,
    /// Bound on the stiffness u, 1/s².
    #[arg(long)]
    pub u_max: Option<f64>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub scenario: PathBuf,
    /// Trajectory CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Events and outcome as JSON.
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Line chart of the logged heights and t_g.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

pub fn load_scenario(path: &Path) -> Result<ScenarioFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ScenarioFile::from_json(&text).with_context(|| format!("invalid scenario {}", path.display()))
}

/// Dispatches a parsed command line and returns the process exit status.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<u8> {
    match &cli.command {
        Command::Analyze(a) => analyze(a, stdout),
        Command::Simulate(a) => simulate(a, stdout),
        Command::Sweep(a) => sweep::sweep(a, stdout),
        Command::Version => {
            writeln!(stdout, "vhip {}", env!("CARGO_PKG_VERSION"))?;
            Ok(EXIT_OK)
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CertificateReport {
    pub plane_normal: Vector3,
    pub plane_offset: f64,
    pub initial_h_m: f64,
    pub clearance: f64,
}

#[derive(Debug, Serialize)]
pub struct AnalyzeReport {
    pub name: String,
    pub capturable: bool,
    pub u_max: Option<f64>,
    pub tau1: Option<f64>,
    pub tau2: Option<f64>,
    pub tau_crit: f64,
    pub tau_icp: f64,
    pub feasible_tau_interval: Option<(f64, f64)>,
    pub suggested_fixed_cop: Option<Vector3>,
    pub suggested_t_g0: Option<f64>,
    pub capture_segment: Option<(Vector3, Vector3)>,
    pub failure_reasons: Vec<&'static str>,
    pub certificate: Option<CertificateReport>,
}

pub fn analyze_state(
    name: &str,
    state: &PendulumState,
    surface: &ContactSurface,
    constants: &PhysicalConstants,
    u_max: Option<f64>,
) -> Result<AnalyzeReport> {
    let a = assess_zero_step(state, surface, constants, u_max)?;
    let certificate = if a.capturable {
        None
    } else {
        separation_certificate(state, surface, constants).map(|c| CertificateReport {
            plane_normal: c.plane_normal,
            plane_offset: c.plane_offset,
            initial_h_m: c.initial_h_m,
            clearance: c.clearance,
        })
    };
    Ok(AnalyzeReport {
        name: name.to_string(),
        capturable: a.capturable,
        u_max,
        tau1: a.window.line.map(|l| l.tau1),
        tau2: a.window.line.map(|l| l.tau2),
        tau_crit: a.window.tau_crit,
        tau_icp: a.window.tau_icp,
        feasible_tau_interval: a.feasible_tau_interval,
        suggested_fixed_cop: a.suggested_fixed_cop,
        suggested_t_g0: a.suggested_t_g0,
        capture_segment: fixed_cop_capture_segment(state, surface, constants)?,
        failure_reasons: a.failure_reasons.iter().map(|r| r.tag()).collect(),
        certificate,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.6}"))
}

fn point(p: Vector3) -> String {
    format!("({:.6}, {:.6}, {:.6})", p.x, p.y, p.z)
}

pub fn render_report(r: &AnalyzeReport) -> String {
    let mut s = String::new();
    let verdict = if r.capturable {
        "capturable"
    } else {
        "not capturable"
    };
    s += &format!("scenario: {}\nverdict: {verdict}\n", r.name);
    if let Some(m) = r.u_max {
        s += &format!("u_max: {m}\n");
    }
    s += &format!("tau1: {}\ntau2: {}\n", opt(r.tau1), opt(r.tau2));
    s += &format!("tau_crit: {:.6}\ntau_icp: {:.6}\n", r.tau_crit, r.tau_icp);
    if let Some((lo, hi)) = r.feasible_tau_interval {
        s += &format!("feasible tau: [{lo:.6}, {hi:.6}]\n");
    }
    if let Some(t) = r.suggested_t_g0 {
        s += &format!("suggested t_g0: {t:.6}\n");
    }
    if let Some(p) = r.suggested_fixed_cop {
        s += &format!("suggested fixed CoP: {}\n", point(p));
    }
    if let Some((a, b)) = r.capture_segment {
        s += &format!("capture segment: {} -> {}\n", point(a), point(b));
    }
    if !r.failure_reasons.is_empty() {
        s += &format!("failure: {}\n", r.failure_reasons.join(", "));
    }
    if let Some(c) = &r.certificate {
        s += &format!(
            "certificate: n = {}, c = {:.6}, h_m(0) = {:.6}, clearance = {:.6}\n",
            point(c.plane_normal),
            c.plane_offset,
            c.initial_h_m,
            c.clearance
        );
    }
    s
}

fn analyze(args: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<u8> {
    let file = load_scenario(&args.scenario)?;
    let sc = file.to_scenario()?;
    let report = analyze_state(
        &file.name,
        &sc.initial,
        &sc.support()?,
        &sc.constants,
        args.u_max,
    )?;
    let text = if args.json {
        serde_json::to_string_pretty(&report)? + "\n"
    } else {
        render_report(&report)
    };
    match &args.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(if report.capturable {
        EXIT_OK
    } else {
        EXIT_NOT_CAPTURABLE
    })
}

fn event_name(e: &vhip_core::simulation::Event<f64>) -> String {
    let v = serde_json::to_value(e).unwrap_or_default();
    let kind = v["kind"].as_str().unwrap_or("?").to_string();
    match v.get("t_g").and_then(|t| t.as_f64()) {
        Some(t) => format!("{kind} at {:.3} (t_g = {t:.4})", e.time),
        None => format!("{kind} at {:.3}", e.time),
    }
}

pub fn summary(name: &str, log: &TrajectoryLog) -> String {
    let mut s = format!(
        "scenario: {name}\noutcome: {} at t = {:.3} s\n",
        log.outcome.tag(),
        log.last.t
    );
    for e in &log.events {
        s += &format!("event: {}\n", event_name(e));
    }
    let l = &log.last;
    s += &format!(
        "final r: {}\nfinal |v|: {:.3e}\nfinal t_g: {:.6}\n",
        point(l.r),
        l.v.norm(),
        l.t_g
    );
    s
}

pub fn simulate_scenario(sc: &Scenario<f64>) -> Result<TrajectoryLog> {
    Ok(run(sc)?)
}

fn simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<u8> {
    let file = load_scenario(&args.scenario)?;
    let log = simulate_scenario(&file.to_scenario()?)?;
    if let Some(p) = &args.out {
        let mut f = std::io::BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        );
        log.write_csv(&mut f)?;
        f.flush()?;
    }
    if let Some(p) = &args.events {
        let text = serde_json::to_string_pretty(&log.events_json())? + "\n";
        fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = &args.svg {
        fs::write(p, svg::trajectory_chart(&log))
            .with_context(|| format!("writing {}", p.display()))?;
    }
    stdout.write_all(summary(&file.name, &log).as_bytes())?;
    Ok(EXIT_OK)
}

/// Evenly spaced grid values.
#[derive(Clone, Debug, PartialEq)]
pub struct Range(pub Vec<f64>);

/// Parses `start:end:count` into `count` evenly spaced values.
pub fn parse_range(s: &str) -> std::result::Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(format!("expected start:end:count, got {s:?}"));
    };
    let a: f64 = a.parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: f64 = b.parse().map_err(|e| format!("{b:?}: {e}"))?;
    let n: usize = n.parse().map_err(|e| format!("{n:?}: {e}"))?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(format!("range {s:?} must be finite with count >= 1"));
    }
    if n == 1 {
        return Ok(Range(vec![a]));
    }
    Ok(Range(
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    ))
}

pub(crate) fn ensure(cond: bool, msg: &str) -> Result<()> {
    if !cond {
        bail!("{msg}");
    }
    Ok(())
}
