// Copyright 2026 The covtrade Developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Command-line front end: configuration merging, sweeps, self-tests and result files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::group::{monte_carlo_twirl_seeded, schur_twirl_irreducible, HalfInt, RepSampler};
use crate::matrix::{ComplexMatrix, HermitianOperator, TensorShape, C64};
use crate::scenarios::{
    build_pure, build_spin, monte_carlo_fidelity_operator, Family, LinearConstraint, Scenario,
};
use crate::sdp::{solve, SdpProblem, SdpStatus, SolverOptions};
use crate::stats::stream_rng;
use crate::tradeoff::{
    curve_constrained, curve_lagrangian, default_lambda_grid, extract_kraus, max_g,
    verify_fidelities, PointStatus, TradeoffPoint, KRAUS_RANK_TOL,
};

/// `println!` that tolerates a closed stdout (e.g. piped into `head`).
macro_rules! emit {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

/// Version of the output file layout.
pub const OUTPUT_SCHEMA: &str = "1";

/// Exact CSV header.
pub const CSV_HEADER: &str = "scenario,param,lambda,G,F,duality_gap,primal_residual,status,seed";

const NEAR_BOUNDARY_HELP: &str =
    "Constrained targets closer than 1e-4 to G(identity) or G_max are \
refused with status `refused`; use lagrangian mode to reach the endpoints. Targets above G_max are \
reported `infeasible`.";

#[derive(Parser, Debug)]
#[command(
    name = "covtrade",
    version,
    about = "Optimal information-disturbance tradeoff for covariant state estimation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Trace the F(G) frontier.
    #[command(after_help = NEAR_BOUNDARY_HELP)]
    Curve(RunArgs),
    /// Identity-seed values, G_max and F(G_max).
    Endpoints(RunArgs),
    /// Trace the frontier and check each optimum by Monte Carlo over the group.
    #[command(after_help = NEAR_BOUNDARY_HELP)]
    Verify(RunArgs),
    /// Built-in oracle checks; nonzero exit on any failure.
    Selftest(RunArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Pure,
    Maxent,
    Spin,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Lagrangian,
    Constrained,
    Endpoints,
    Verify,
    Selftest,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every command. Anything unset falls back to `--config`, then defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioKind>,
    /// Dimension for pure and maxent.
    #[arg(long)]
    pub d: Option<usize>,
    /// Spin for spin, as "3/2" or "1.5".
    #[arg(long)]
    pub j: Option<String>,
    /// Sweep mode for curve and verify.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Finite λ values in the sweep (λ = 0 and λ = ∞ are added).
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// Target G values for constrained mode, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub g_list: Option<Vec<f64>>,
    /// Monte Carlo samples.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub gap_tol: Option<f64>,
    #[arg(long)]
    pub feas_tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to json for a .json output path, csv otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Flat key=value file; `#` starts a comment. Flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for sweeps and sampling (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::InvalidArgument(format!("config key `{key}`: cannot parse `{raw}`")))
}

fn parse_enum<T: ValueEnum>(key: &str, raw: &str) -> Result<T> {
    T::from_str(raw, true)
        .map_err(|_| Error::InvalidArgument(format!("config key `{key}`: unknown value `{raw}`")))
}

/// Parses a flat `key=value` config. Keys may use `-` or `_`.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("config line {}: expected key=value", n + 1))
        })?;
        map.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(map)
}

impl RunArgs {
    /// Fills unset fields from config-file entries.
    pub fn merge_file(&mut self, entries: &BTreeMap<String, String>) -> Result<()> {
        for (k, v) in entries {
            match k.as_str() {
                "scenario" => self.scenario = self.scenario.or(Some(parse_enum(k, v)?)),
                "d" => self.d = self.d.or(Some(parse_value(k, v)?)),
                "j" => self.j = self.j.take().or(Some(v.clone())),
                "mode" => self.mode = self.mode.or(Some(parse_enum(k, v)?)),
                "grid_points" => self.grid_points = self.grid_points.or(Some(parse_value(k, v)?)),
                "lambda_max" => self.lambda_max = self.lambda_max.or(Some(parse_value(k, v)?)),
                "g_list" => {
                    if self.g_list.is_none() {
                        self.g_list = Some(
                            v.split(',')
                                .map(|x| parse_value(k, x.trim()))
                                .collect::<Result<_>>()?,
                        );
                    }
                }
                "samples" => self.samples = self.samples.or(Some(parse_value(k, v)?)),
                "seed" => self.seed = self.seed.or(Some(parse_value(k, v)?)),
                "gap_tol" => self.gap_tol = self.gap_tol.or(Some(parse_value(k, v)?)),
                "feas_tol" => self.feas_tol = self.feas_tol.or(Some(parse_value(k, v)?)),
                "out" | "out_path" => self.out = self.out.take().or(Some(PathBuf::from(v))),
                "format" => self.format = self.format.or(Some(parse_enum(k, v)?)),
                "threads" => self.threads = self.threads.or(Some(parse_value(k, v)?)),
                _ => return Err(Error::InvalidArgument(format!("unknown config key `{k}`"))),
            }
        }
        Ok(())
    }
}

/// Fully resolved run configuration, echoed into result files.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub scenario: Option<ScenarioKind>,
    pub d: Option<usize>,
    pub j: Option<String>,
    pub mode: Mode,
    pub grid_points: usize,
    pub lambda_max: f64,
    pub g_list: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub out_path: Option<String>,
    pub format: Format,
}

impl RunConfig {
    pub fn resolve(command: &str, args: &RunArgs) -> Result<Self> {
        let mode = match command {
            "endpoints" => Mode::Endpoints,
            "selftest" => Mode::Selftest,
            _ => match args.mode.unwrap_or(Mode::Lagrangian) {
                m @ (Mode::Lagrangian | Mode::Constrained) => m,
                Mode::Verify if command == "verify" => Mode::Lagrangian,
                m => {
                    return Err(Error::InvalidArgument(format!(
                        "--mode {m:?} is not a sweep mode; use the `{}` command",
                        format!("{m:?}").to_lowercase()
                    )))
                }
            },
        };
        let j = match &args.j {
            Some(raw) => Some(HalfInt::from_str(raw)?.as_spin()?.to_string()),
            None => None,
        };
        if mode != Mode::Selftest {
            match args.scenario {
                None => return Err(Error::InvalidArgument("--scenario is required".into())),
                Some(ScenarioKind::Spin) => {
                    if j.is_none() || args.d.is_some() {
                        return Err(Error::InvalidArgument("spin takes --j and no --d".into()));
                    }
                }
                Some(_) => {
                    if args.d.is_none() || j.is_some() {
                        return Err(Error::InvalidArgument(
                            "pure and maxent take --d and no --j".into(),
                        ));
                    }
                }
            }
        }
        let grid_points = args.grid_points.unwrap_or(25);
        if grid_points < 2 && matches!(mode, Mode::Lagrangian) {
            return Err(Error::InvalidArgument(
                "--grid-points must be at least 2".into(),
            ));
        }
        let g_list = args.g_list.clone().unwrap_or_default();
        if mode == Mode::Constrained && g_list.is_empty() {
            return Err(Error::InvalidArgument(
                "constrained mode needs --g-list".into(),
            ));
        }
        let out_path = args.out.as_ref().map(|p| p.display().to_string());
        let format = args
            .format
            .unwrap_or(match args.out.as_ref().and_then(|p| p.extension()) {
                Some(ext) if ext == "json" => Format::Json,
                _ => Format::Csv,
            });
        let positive = |name: &str, v: f64| -> Result<f64> {
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(Error::InvalidArgument(format!(
                    "--{name} must be positive, got {v}"
                )))
            }
        };
        Ok(Self {
            command: command.to_string(),
            scenario: if mode == Mode::Selftest {
                None
            } else {
                args.scenario
            },
            d: args.d,
            j,
            mode,
            grid_points,
            lambda_max: positive("lambda-max", args.lambda_max.unwrap_or(1e3))?,
            g_list,
            samples: args.samples.unwrap_or(100_000),
            seed: args.seed.unwrap_or(0),
            gap_tol: positive("gap-tol", args.gap_tol.unwrap_or(1e-8))?,
            feas_tol: positive("feas-tol", args.feas_tol.unwrap_or(1e-9))?,
            out_path,
            format,
        })
    }

    pub fn family(&self) -> Result<Family> {
        match (self.scenario, self.d, &self.j) {
            (Some(ScenarioKind::Pure), Some(d), _) => Ok(Family::Pure { d }),
            (Some(ScenarioKind::Maxent), Some(d), _) => Ok(Family::Maxent { d }),
            (Some(ScenarioKind::Spin), _, Some(j)) => Ok(Family::Spin { j: j.parse()? }),
            _ => Err(Error::InvalidArgument("no scenario configured".into())),
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            gap_tol: self.gap_tol,
            feas_tol: self.feas_tol,
            ..SolverOptions::default()
        }
    }

    /// First 16 hex digits of SHA-256 over the configuration, excluding the output path.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out_path = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

#[derive(Serialize)]
struct PointRecord<'a> {
    scenario: &'static str,
    param: String,
    config_hash: &'a str,
    #[serde(flatten)]
    point: &'a TradeoffPoint,
}

#[derive(Serialize)]
struct Versions {
    spec: &'static str,
    covtrade: &'static str,
}

#[derive(Serialize)]
struct JsonOutput<'a> {
    config: &'a RunConfig,
    config_hash: &'a str,
    points: Vec<PointRecord<'a>>,
    versions: Versions,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn lambda_field(l: Option<f64>) -> String {
    match l {
        Some(l) if l == f64::INFINITY => "inf".into(),
        Some(l) => num(l),
        None => String::new(),
    }
}

/// CSV rendering with 17 significant digits.
pub fn render_csv(cfg: &RunConfig, family: &Family, points: &[TradeoffPoint]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            family.name(),
            family.param(),
            lambda_field(p.lambda),
            num(p.g),
            num(p.f),
            num(p.diagnostics.duality_gap),
            num(p.diagnostics.primal_residual),
            p.diagnostics.status.as_str(),
            cfg.seed
        );
    }
    out
}

pub fn render_json(cfg: &RunConfig, family: &Family, points: &[TradeoffPoint]) -> Result<String> {
    let hash = cfg.hash();
    let doc = JsonOutput {
        config: cfg,
        config_hash: &hash,
        points: points
            .iter()
            .map(|point| PointRecord {
                scenario: family.name(),
                param: family.param(),
                config_hash: &hash,
                point,
            })
            .collect(),
        versions: Versions {
            spec: OUTPUT_SCHEMA,
            covtrade: env!("CARGO_PKG_VERSION"),
        },
    };
    let mut s =
        serde_json::to_string_pretty(&doc).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn summary_line(family: &Family, p: &TradeoffPoint, hash: &str) -> String {
    let mut line = format!(
        "{family} lambda={} G={:.10} F={:.10} gap={:.2e} residual={:.2e} status={}",
        match p.lambda {
            Some(l) if l.is_infinite() => "inf".to_string(),
            Some(l) => format!("{l:.6e}"),
            None => "-".into(),
        },
        p.g,
        p.f,
        p.diagnostics.duality_gap,
        p.diagnostics.primal_residual,
        p.diagnostics.status.as_str()
    );
    if let Some(v) = &p.verification {
        let _ = write!(
            line,
            " F_mc={:.6}±{:.1e} G_mc={:.6}±{:.1e}",
            v.f_estimate, v.f_stderr, v.g_estimate, v.g_stderr
        );
    }
    let _ = write!(line, " config={hash}");
    line
}

fn write_output(cfg: &RunConfig, family: &Family, points: &[TradeoffPoint]) -> Result<()> {
    let Some(path) = &cfg.out_path else {
        return Ok(());
    };
    let body = match cfg.format {
        Format::Csv => render_csv(cfg, family, points),
        Format::Json => render_json(cfg, family, points)?,
    };
    std::fs::write(Path::new(path), body)
        .map_err(|e| Error::InvalidArgument(format!("cannot write {path}: {e}")))
}

fn sweep(cfg: &RunConfig, s: &Scenario) -> Result<Vec<TradeoffPoint>> {
    let opts = cfg.solver_options();
    match cfg.mode {
        Mode::Constrained => curve_constrained(s, &cfg.g_list, &opts),
        _ => curve_lagrangian(
            s,
            &default_lambda_grid(cfg.grid_points, cfg.lambda_max)?,
            &opts,
        ),
    }
}

/// Attaches Monte Carlo estimates to every solved point; returns how many disagree beyond 4σ.
fn verify_points(cfg: &RunConfig, s: &Scenario, points: &mut [TradeoffPoint]) -> Result<usize> {
    let mut disagreements = 0;
    for (k, p) in points.iter_mut().enumerate() {
        let Some(x) = p.seed.as_ref() else { continue };
        if !p.diagnostics.status.is_ok() {
            continue;
        }
        p.diagnostics.discarded_mass = Some(extract_kraus(x, KRAUS_RANK_TOL)?.discarded_mass);
        let v = verify_fidelities(s, x, cfg.samples, cfg.seed.wrapping_add(k as u64))?;
        if !v.agrees_with(p.f, p.g) {
            disagreements += 1;
        }
        p.verification = Some(v);
    }
    Ok(disagreements)
}

fn finish(
    cfg: &RunConfig,
    family: &Family,
    points: &[TradeoffPoint],
    extra_failures: usize,
) -> Result<ExitCode> {
    let hash = cfg.hash();
    for p in points {
        emit!("{}", summary_line(family, p, &hash));
    }
    write_output(cfg, family, points)?;
    let failed = points
        .iter()
        .filter(|p| !p.diagnostics.status.is_ok())
        .count()
        + extra_failures;
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn run_endpoints(cfg: &RunConfig, s: &Scenario) -> Result<ExitCode> {
    let id = s.identity_seed();
    let mp = s.measure_prepare_seed()?;
    emit!(
        "{} G_identity={:.10} F_identity={:.10} G_measure_prepare={:.10} F_measure_prepare={:.10}",
        s.family,
        s.estimation_fidelity(&id)?,
        s.operation_fidelity(&id)?,
        s.estimation_fidelity(&mp)?,
        s.operation_fidelity(&mp)?
    );
    let points = curve_lagrangian(s, &[0.0, f64::INFINITY], &cfg.solver_options())?;
    if let Some(top) = points.last() {
        emit!("{} G_max={:.10} F(G_max)={:.10}", s.family, top.g, top.f);
    }
    finish(cfg, &s.family, &points, 0)
}

/// Executes one command with a resolved configuration.
pub fn run(cfg: &RunConfig) -> Result<ExitCode> {
    if cfg.mode == Mode::Selftest {
        return Ok(if selftest(cfg.seed) {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        });
    }
    let s = cfg.family()?.build()?;
    match cfg.command.as_str() {
        "endpoints" => run_endpoints(cfg, &s),
        "verify" => {
            let mut points = sweep(cfg, &s)?;
            let bad = verify_points(cfg, &s, &mut points)?;
            finish(cfg, &s.family, &points, bad)
        }
        _ => {
            let points = sweep(cfg, &s)?;
            finish(cfg, &s.family, &points, 0)
        }
    }
}

type Check = std::result::Result<String, String>;

fn check_fidelity_twirls(seed: u64) -> Check {
    let families = [
        Family::Pure { d: 2 },
        Family::Pure { d: 3 },
        Family::Maxent { d: 2 },
        Family::Spin {
            j: HalfInt::from_twice(1),
        },
        Family::Spin {
            j: HalfInt::from_twice(2),
        },
        Family::Spin {
            j: HalfInt::from_twice(3),
        },
    ];
    let mut worst: f64 = 0.0;
    for (k, f) in families.iter().enumerate() {
        let s = f.build().map_err(|e| e.to_string())?;
        let (mean, se) = monte_carlo_fidelity_operator(&s, 40_000, seed.wrapping_add(k as u64))
            .map_err(|e| e.to_string())?;
        let diff = mean.max_abs_diff(s.r_f.matrix());
        worst = worst.max(diff);
        if diff > (5.0 * se).max(0.02) {
            return Err(format!("{f}: R_F deviates from Monte Carlo by {diff:.2e}"));
        }
    }
    Ok(format!("R_F vs Monte Carlo, max deviation {worst:.2e}"))
}

fn random_hermitian(n: usize, seed: u64) -> HermitianOperator {
    let mut rng = stream_rng(seed, u64::MAX);
    let a = ComplexMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    HermitianOperator::new((&a + &a.adjoint()).scale_real(0.5), TensorShape::flat(n))
        .expect("hermitian")
}

fn check_schur(seed: u64) -> Check {
    for (sampler, d) in [
        (RepSampler::FundamentalUnitary { d: 3 }, 3),
        (
            RepSampler::Spin {
                j: HalfInt::from_twice(2),
            },
            3,
        ),
    ] {
        let y = random_hermitian(d, seed);
        let exact = schur_twirl_irreducible(&y, d).map_err(|e| e.to_string())?;
        let mc = monte_carlo_twirl_seeded(&sampler, &[false], &y, 20_000, seed)
            .map_err(|e| e.to_string())?;
        let diff = mc.mean.matrix().max_abs_diff(exact.matrix());
        if diff > (5.0 * mc.standard_error).max(0.01) {
            return Err(format!("{sampler:?}: twirl deviates by {diff:.2e}"));
        }
    }
    Ok("irreducible twirls match (Tr Y / d) I".into())
}

fn check_spin_half() -> Check {
    let a = build_spin(HalfInt::from_twice(1)).map_err(|e| e.to_string())?;
    let b = build_pure(2).map_err(|e| e.to_string())?;
    let diff = a
        .r_f
        .matrix()
        .max_abs_diff(b.r_f.matrix())
        .max(a.r_g.matrix().max_abs_diff(b.r_g.matrix()));
    if diff > 1e-12 || a.constraints.len() != b.constraints.len() {
        return Err(format!("spin(1/2) differs from pure(2) by {diff:e}"));
    }
    Ok("spin(1/2) == pure(2)".into())
}

fn check_sdp(seed: u64) -> Check {
    let n = 4;
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let c = random_hermitian(n, seed.wrapping_add(k));
        let top = c.eigh().map_err(|e| e.to_string())?.values[n - 1];
        let id = HermitianOperator::identity(TensorShape::flat(n));
        let p = SdpProblem::new(
            c,
            vec![LinearConstraint::new(id, 1.0).map_err(|e| e.to_string())?],
        )
        .map_err(|e| e.to_string())?;
        let sol = solve(&p).map_err(|e| e.to_string())?;
        if sol.status != SdpStatus::Optimal || (sol.value - top).abs() > 1e-7 {
            return Err(format!(
                "trace problem {k}: {} vs {top} ({})",
                sol.value, sol.status
            ));
        }
        worst = worst.max((sol.value - top).abs());
    }
    // Tr X = -1 has no PSD solution.
    let id = HermitianOperator::identity(TensorShape::flat(2));
    let bad = SdpProblem::new(
        id.clone(),
        vec![LinearConstraint::new(id, -1.0).map_err(|e| e.to_string())?],
    )
    .map_err(|e| e.to_string())?;
    let sol = solve(&bad).map_err(|e| e.to_string())?;
    if sol.status != SdpStatus::Infeasible {
        return Err(format!("infeasible problem reported {}", sol.status));
    }
    let top = max_g(
        &build_pure(2).map_err(|e| e.to_string())?,
        &SolverOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    if top.diagnostics.status != PointStatus::Optimal || (top.g - 2.0 / 3.0).abs() > 1e-5 {
        return Err(format!("pure(2) G_max = {}", top.g));
    }
    Ok(format!(
        "10 trace problems (max error {worst:.1e}), infeasibility, pure(2) G_max"
    ))
}

/// Runs the built-in oracle checks, printing one line each. Returns whether all passed.
pub fn selftest(seed: u64) -> bool {
    let checks: [(&str, Check); 4] = [
        ("fidelity operators", check_fidelity_twirls(seed)),
        ("schur twirls", check_schur(seed)),
        ("spin-1/2 degeneracy", check_spin_half()),
        ("sdp unit problems", check_sdp(seed)),
    ];
    let mut ok = true;
    for (name, result) in &checks {
        match result {
            Ok(note) => emit!("PASS {name}: {note}"),
            Err(why) => {
                ok = false;
                emit!("FAIL {name}: {why}");
            }
        }
    }
    ok
}

fn execute(cli: Cli) -> Result<ExitCode> {
    let (name, mut args) = match cli.command {
        Command::Curve(a) => ("curve", a),
        Command::Endpoints(a) => ("endpoints", a),
        Command::Verify(a) => ("verify", a),
        Command::Selftest(a) => ("selftest", a),
    };
    if let Some(path) = args.config.clone() {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        args.merge_file(&parse_config_file(&text)?)?;
    }
    let cfg = RunConfig::resolve(name, &args)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| run(&cfg))
}

/// Process entry point: 0 on success, 2 when some points failed, 1 on fatal errors.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
