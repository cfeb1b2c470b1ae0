//! Config-driven experiment runner.
//!
//! Configs are TOML with a top-level `seed` and the sections `[scenario]`,
//! `[integrator]`, `[output]` and `[sweep]`:
//!
//! ```toml
//! seed = 42
//!
//! [scenario]
//! name = "yosida-rotation"
//! gamma = 1.0
//! theta = 0.5
//!
//! [integrator]
//! horizon = 50.0
//! step = 1e-3
//!
//! [output]
//! dir = "out"
//! format = "csv"
//!
//! [sweep]
//! gamma = { from = 0.5, to = 4.0, points = 20 }
//! theta = { values = [0.5, 1.0, 2.0] }
//! ```
//!
//! Exit codes: 0 when the convergence verdict passes, 2 when it fails, 1 on
//! any error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::applications::{run_scenario, scenario_info, Overrides, ScenarioRun, SCENARIOS};
use crate::diagnostics::{attach_diagnostics, convergence_report, AnchorPoint, ConvergenceReport, Tolerances};
use crate::dynamics::io::{self, Format};
use crate::dynamics::{EpsilonSchedule, SystemSpec};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::sharpness::{self, RotationCase, SweepRow};

pub const DEFAULT_SEED: u64 = 42;
pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub name: String,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub theta: Option<f64>,
    pub mu: Option<f64>,
    pub epsilon: Option<EpsilonSchedule>,
    pub u0: Option<Vec<f64>>,
    pub v0: Option<Vec<f64>>,
    pub k: Option<f64>,
    pub alpha: Option<f64>,
    pub nu: Option<f64>,
    pub beta: Option<f64>,
    pub iterations: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub horizon: Option<f64>,
    pub step: Option<f64>,
    pub sample_every: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Either an evenly spaced range or an explicit list.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub points: Option<usize>,
    pub values: Option<Vec<f64>>,
}

impl SweepAxis {
    pub fn range(from: f64, to: f64, points: usize) -> Self {
        SweepAxis { from: Some(from), to: Some(to), points: Some(points), values: None }
    }

    pub fn values(&self, name: &str) -> Result<Vec<f64>> {
        let v = match (self.from, self.to, self.points, &self.values) {
            (None, None, None, Some(v)) => v.clone(),
            (Some(a), Some(b), Some(n), None) => sharpness::linspace(a, b, n),
            _ => {
                return Err(Error::Config(format!(
                    "sweep axis `{name}` needs either `values` or all of `from`, `to`, `points`"
                )))
            }
        };
        if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
            return Err(Error::Config(format!("sweep axis `{name}` has non-finite value {bad}")));
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub gamma: Option<SweepAxis>,
    pub lambda: Option<SweepAxis>,
    pub theta: Option<SweepAxis>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

impl RunConfig {
    pub fn for_scenario(name: &str) -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            scenario: ScenarioSection { name: name.to_string(), ..Default::default() },
            integrator: IntegratorSection::default(),
            output: OutputSection::default(),
            sweep: None,
        }
    }

    pub fn overrides(&self) -> Overrides {
        let s = &self.scenario;
        Overrides {
            gamma: s.gamma,
            lambda: s.lambda,
            theta: s.theta,
            mu: s.mu,
            epsilon: s.epsilon,
            horizon: self.integrator.horizon,
            step: self.integrator.step,
            sample_every: self.integrator.sample_every,
            seed: Some(self.seed),
            u0: s.u0.clone(),
            v0: s.v0.clone(),
            k: s.k,
            alpha: s.alpha,
            nu: s.nu,
            beta: s.beta,
            iterations: s.iterations,
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn format(&self) -> Format {
        self.output.format.unwrap_or(Format::Csv)
    }
}

/// Parses and checks a config; errors carry the line and column or the
/// offending key.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
    scenario_info(&cfg.scenario.name).map_err(|e| Error::Config(e.to_string()))?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn render_report(report: &ConvergenceReport) -> Result<String> {
    to_json(report)
}

/// Paths written by [`cmd_simulate`].
#[derive(Clone, Debug)]
pub struct SimulateOutput {
    pub trajectory: PathBuf,
    pub system: PathBuf,
    pub anchor: PathBuf,
    pub report: PathBuf,
    pub summary: PathBuf,
    pub run: ScenarioRun,
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<SimulateOutput> {
    let run = run_scenario(&cfg.scenario.name, &cfg.overrides())?;
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir)?;
    let trajectory = dir.join(format!("trajectory.{}", cfg.format().extension()));
    io::save(&run.trajectory, &trajectory)?;
    let out = SimulateOutput {
        system: dir.join("system.json"),
        anchor: dir.join("anchor.json"),
        report: dir.join("report.json"),
        summary: dir.join("summary.json"),
        trajectory,
        run,
    };
    std::fs::write(&out.system, to_json(&out.run.system)?)?;
    std::fs::write(&out.anchor, to_json(&out.run.anchor)?)?;
    std::fs::write(&out.report, render_report(&out.run.report)?)?;
    std::fs::write(&out.summary, to_json(&out.run.summary)?)?;
    Ok(out)
}

/// Recomputes diagnostics and the report from a stored trajectory. The
/// anchor defaults to the sibling `anchor.json`.
pub fn cmd_report(trajectory: &Path, system: &Path, anchor: Option<Vector>) -> Result<ConvergenceReport> {
    let sys: SystemSpec = serde_json::from_str(&std::fs::read_to_string(system)?)
        .map_err(|e| Error::Format(format!("{}: {e}", system.display())))?;
    let traj = io::load(trajectory).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", trajectory.display())),
        other => other,
    })?;
    let anchor = match anchor {
        Some(p) => AnchorPoint::at(&sys, p)?,
        None => {
            let path = trajectory.with_file_name("anchor.json");
            serde_json::from_str(&std::fs::read_to_string(&path).map_err(|e| {
                Error::Format(format!("{}: {e} (pass --anchor to choose one)", path.display()))
            })?)?
        }
    };
    let traj = attach_diagnostics(&traj, &sys, &anchor)?;
    convergence_report(&traj, &sys, &anchor, &Tolerances::default())
}

/// One grid point: the overrides it sets, in grid order.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub theta: Option<f64>,
}

/// `γ` outermost, then `λ`, then `θ`.
pub fn grid(sweep: &SweepSection) -> Result<Vec<GridPoint>> {
    let axis = |a: &Option<SweepAxis>, name| -> Result<Vec<Option<f64>>> {
        Ok(match a {
            None => vec![None],
            Some(a) => a.values(name)?.into_iter().map(Some).collect(),
        })
    };
    if sweep.lambda.is_some() && sweep.theta.is_some() {
        return Err(Error::Config("sweep over `lambda` or `theta`, not both".into()));
    }
    if sweep.gamma.is_none() && sweep.lambda.is_none() && sweep.theta.is_none() {
        return Err(Error::Config("sweep section has no axes".into()));
    }
    let mut out = Vec::new();
    for g in axis(&sweep.gamma, "gamma")? {
        for l in axis(&sweep.lambda, "lambda")? {
            for th in axis(&sweep.theta, "theta")? {
                out.push(GridPoint { gamma: g, lambda: l, theta: th });
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    Ok(out)
}

fn csv_opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |x| x.to_string())
}

fn sharpness_row(cfg: &RunConfig, p: &GridPoint) -> Result<SweepRow> {
    let gamma = p.gamma.or(cfg.scenario.gamma).unwrap_or(2.0);
    let case = match (p.lambda.or(cfg.scenario.lambda), p.theta.or(cfg.scenario.theta)) {
        (Some(l), _) if p.lambda.is_some() || p.theta.is_none() => RotationCase::new(gamma, l)?,
        (_, Some(th)) => RotationCase::from_theta(gamma, th)?,
        _ => RotationCase::new(gamma, 1.0)?,
    };
    Ok(SweepRow::from(&sharpness::classify(&case)?))
}

fn scenario_row(cfg: &RunConfig, index: usize, p: &GridPoint) -> Result<String> {
    let mut o = cfg.overrides();
    if p.gamma.is_some() {
        o.gamma = p.gamma;
    }
    if p.lambda.is_some() {
        o.lambda = p.lambda;
        o.theta = None;
    }
    if p.theta.is_some() {
        o.theta = p.theta;
        o.lambda = None;
    }
    let run = run_scenario(&cfg.scenario.name, &o)?;
    let r = &run.report;
    Ok(format!(
        "{index},{},{},{},{},{},{},{},{},{},{}",
        csv_opt(p.gamma),
        csv_opt(p.lambda),
        csv_opt(p.theta),
        csv_opt(run.system.condition_product),
        run.summary.pass,
        r.final_velocity_norm,
        r.l2_velocity_tail,
        r.limit_residual,
        r.anchor_oscillation,
        csv_opt(r.gamma0_monotonicity_defect),
    ))
}

const SHARPNESS_HEADER: &str =
    "index,gamma,lambda,theta,a1,a2,b,verdict,a2_nonnegative,cir1_holds,theta_form_holds,theta_claim_nonconverging,claim_disagrees";
const SCENARIO_HEADER: &str =
    "index,gamma,lambda,theta,condition_product,pass,final_velocity,l2_velocity_tail,equilibrium_residual,anchor_oscillation,gamma0_defect";

/// Sweep rows as CSV text, in grid order. `jobs = Some(1)` runs serially;
/// otherwise rows are computed on a rayon pool and reassembled in order.
pub fn sweep_csv(cfg: &RunConfig, jobs: Option<usize>) -> Result<String> {
    let default_sharpness = SweepSection {
        gamma: Some(SweepAxis::range(0.5, 4.0, 20)),
        lambda: None,
        theta: Some(SweepAxis::range(0.05, 4.0, 20)),
    };
    let sharp = cfg.scenario.name == "sharpness-sweep";
    let section = match (&cfg.sweep, sharp) {
        (Some(s), _) => s.clone(),
        (None, true) => default_sharpness,
        (None, false) => return Err(Error::Config("sweep needs a [sweep] section".into())),
    };
    let points = grid(&section)?;

    let row = |(i, p): (usize, &GridPoint)| -> Result<String> {
        if sharp {
            let r = sharpness_row(cfg, p)?;
            let verdict = match r.verdict {
                sharpness::Stability::Converging => "converging",
                sharpness::Stability::NonConverging => "nonconverging",
            };
            Ok(format!(
                "{i},{},{},{},{},{},{},{verdict},{},{},{},{},{}",
                r.gamma,
                r.lambda,
                r.theta,
                r.a1,
                r.a2,
                r.b,
                r.a2_nonnegative,
                r.cir1_holds,
                r.theta_form_holds,
                r.theta_claim_nonconverging,
                r.claim_disagrees
            ))
        } else {
            scenario_row(cfg, i, p)
        }
    };

    let rows: Vec<Result<String>> = match jobs {
        Some(1) => points.iter().enumerate().map(row).collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?
            .install(|| points.par_iter().enumerate().map(row).collect()),
        None => points.par_iter().enumerate().map(row).collect(),
    };
    let mut out = String::new();
    out.push_str(if sharp { SHARPNESS_HEADER } else { SCENARIO_HEADER });
    out.push('\n');
    for r in rows {
        out.push_str(&r?);
        out.push('\n');
    }
    Ok(out)
}

/// `θ = 1` curve and true stability boundary over the sweep's `γ` values.
pub fn boundary_csv(gammas: &[f64]) -> String {
    let mut out = String::from("gamma,lambda_theta_one,theta_star,lambda_star\n");
    for b in sharpness::boundary_curve(gammas) {
        let _ = writeln!(out, "{},{},{},{}", b.gamma, b.lambda_theta_one, b.theta_star, b.lambda_star);
    }
    out
}

pub fn cmd_sweep(cfg: &RunConfig, jobs: Option<usize>) -> Result<Vec<PathBuf>> {
    if jobs == Some(0) {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    let csv = sweep_csv(cfg, jobs)?;
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir)?;
    let sweep_path = dir.join("sweep.csv");
    std::fs::write(&sweep_path, csv)?;
    let mut written = vec![sweep_path];
    if cfg.scenario.name == "sharpness-sweep" {
        let gammas = match cfg.sweep.as_ref().and_then(|s| s.gamma.as_ref()) {
            Some(a) => a.values("gamma")?,
            None => sharpness::linspace(0.5, 4.0, 20),
        };
        let path = dir.join("boundary.csv");
        std::fs::write(&path, boundary_csv(&gammas))?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Parser, Debug)]
#[command(name = "dampedflow", version, about = "Simulate and diagnose damped second-order monotone dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args, Debug, Clone)]
pub struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scenario to run when no config is given.
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one scenario and write trajectory, system, anchor, report and summary files.
    Simulate(RunArgs),
    /// Run a parameter grid and write one CSV row per point.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Worker threads; 1 runs serially.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Recompute the report from a stored trajectory.
    Report {
        trajectory: PathBuf,
        /// System file; defaults to `system.json` next to the trajectory.
        #[arg(long)]
        system: Option<PathBuf>,
        /// Comma-separated anchor point; defaults to `anchor.json` next to the trajectory.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        anchor: Option<Vec<f64>>,
        /// Directory for `report.json`; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in scenarios.
    ListScenarios,
}

fn resolve(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match (&args.config, &args.scenario) {
        (Some(path), None) => load_config(path)?,
        (None, Some(name)) => {
            scenario_info(name).map_err(|e| Error::Config(e.to_string()))?;
            RunConfig::for_scenario(name)
        }
        (Some(_), Some(_)) => return Err(Error::Config("pass --config or --scenario, not both".into())),
        (None, None) => return Err(Error::Config("pass --config PATH or --scenario NAME".into())),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &args.out {
        cfg.output.dir = Some(dir.clone());
    }
    if let Some(f) = args.format {
        cfg.output.format = Some(f);
    }
    Ok(cfg)
}

fn verdict_code(pass: bool) -> i32 {
    if pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Simulate(args) => {
            let out = cmd_simulate(&resolve(&args)?)?;
            writeln!(stdout, "{}", out.trajectory.display())?;
            writeln!(stdout, "verdict: {}", if out.run.summary.pass { "pass" } else { "fail" })?;
            Ok(verdict_code(out.run.summary.pass))
        }
        Command::Sweep { run, jobs } => {
            for path in cmd_sweep(&resolve(&run)?, jobs)? {
                writeln!(stdout, "{}", path.display())?;
            }
            Ok(EXIT_PASS)
        }
        Command::Report { trajectory, system, anchor, out } => {
            let system = system.unwrap_or_else(|| trajectory.with_file_name("system.json"));
            let report = cmd_report(&trajectory, &system, anchor.map(Vector::new))?;
            let text = render_report(&report)?;
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    std::fs::write(dir.join("report.json"), text)?;
                }
                None => stdout.write_all(text.as_bytes())?,
            }
            Ok(verdict_code(report.verdict.pass))
        }
        Command::ListScenarios => {
            for s in &SCENARIOS {
                writeln!(stdout, "{:<24} {}", s.name, s.description)?;
                writeln!(stdout, "{:<24} overrides: {}", "", s.keys.join(", "))?;
            }
            Ok(EXIT_PASS)
        }
    }
}

/// Parses arguments and runs, returning the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return EXIT_ERROR;
            }
            let _ = write!(stdout, "{e}");
            return EXIT_PASS;
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let cfg = parse_config(
            r#"
seed = 7
[scenario]
name = "tikhonov-min-norm"
gamma = 2.5
epsilon = { kind = "power", c = 1.0, p = 0.5 }
u0 = [1.0, 2.0]
[integrator]
horizon = 10.0
step = 1e-2
[output]
dir = "x"
format = "jsonl"
"#,
        )
        .unwrap();
        let o = cfg.overrides();
        assert_eq!(o.seed, Some(7));
        assert_eq!(o.epsilon, Some(EpsilonSchedule::Power { c: 1.0, p: 0.5 }));
        assert_eq!(o.horizon, Some(10.0));
        assert_eq!(cfg.format(), Format::Jsonl);
        assert_eq!(parse_config("[scenario]\nname = \"heavy-ball\"\n").unwrap().seed, 42);
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = parse_config("[scenario]\nname = \"heavy-ball\"\ngama = 2.0\n").unwrap_err().to_string();
        assert!(e.contains("gama") && e.contains("line 3"), "{e}");
        let e = parse_config("[scenario]\nname = \"heavy-ball\"\n[integrator]\nsteps = 1\n").unwrap_err().to_string();
        assert!(e.contains("steps"), "{e}");
        let e = parse_config("[scenario]\nname = \"nope\"\n").unwrap_err().to_string();
        assert!(e.contains("nope"), "{e}");
    }

    #[test]
    fn syntax_errors_carry_position() {
        let e = parse_config("[scenario]\nname = \"heavy-ball\"\ngamma = = 2\n").unwrap_err().to_string();
        assert!(e.contains("line 3") && e.contains("column"), "{e}");
    }

    #[test]
    fn grid_order_and_errors() {
        let s = SweepSection {
            gamma: Some(SweepAxis { values: Some(vec![1.0, 2.0]), ..Default::default() }),
            lambda: None,
            theta: Some(SweepAxis::range(0.5, 1.5, 3)),
        };
        let g = grid(&s).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!((g[1].gamma, g[1].theta), (Some(1.0), Some(1.0)));
        assert_eq!(g[3].gamma, Some(2.0));

        let empty = SweepSection { gamma: Some(SweepAxis { values: Some(vec![]), ..Default::default() }), ..Default::default() };
        assert!(grid(&empty).is_err());
        assert!(grid(&SweepSection::default()).is_err());
        let half = SweepSection { gamma: Some(SweepAxis { from: Some(1.0), ..Default::default() }), ..Default::default() };
        assert!(grid(&half).is_err());
    }

    #[test]
    fn exit_codes() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["dampedflow", "list-scenarios"], &mut out, &mut err), EXIT_PASS);
        assert!(String::from_utf8(out).unwrap().contains("sharpness-sweep"));
        let mut err = Vec::new();
        assert_eq!(run(["dampedflow", "simulate"], &mut Vec::new(), &mut err), EXIT_ERROR);
        assert_eq!(run(["dampedflow", "bogus"], &mut Vec::new(), &mut Vec::new()), EXIT_ERROR);
    }
}
