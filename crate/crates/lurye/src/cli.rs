//! Command-line front end.
//!
//! Subcommands: `certify`, `margin`, `table2`, `simulate`, `validate`.
//! Every numeric result comes straight from the library calls; the CLI only
//! parses arguments, merges an optional JSON config (flags win), and formats
//! reports. Exit codes: 0 success / certified, 2 inconclusive or failed
//! checks, 1 usage error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::certify::{
    certify, margin, margin_table, Certificate, CertifyOptions, HorizonConvention, MarginOptions,
    MarginResult, MarginTable, Method, Verdict,
};
use crate::checks::{run_all, ValidateConfig};
use crate::lti::{load_plant, StateSpace};
use crate::multipliers::MultiplierKind;
use crate::sdp::ipm::InteriorPoint;
use crate::sdp::SolveOptions;
use crate::sim::{simulate_loop, Phi};
use crate::{Error, Result};

/// Reference margins for the benchmark plant, shipped as a data file.
pub const REFERENCE_MARGINS_CSV: &str = include_str!("../data/reference_margins.csv");

#[derive(Debug, Parser)]
#[command(
    name = "lurye",
    about = "Stability certificates for discrete-time Lurye loops with ReLU and slope-restricted nonlinearities",
    version
)]
pub struct Cli {
    /// JSON config file with default settings; explicit flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify one (method, horizon, alpha) triple.
    Certify(CertifyArgs),
    /// Bisect for the largest certified loop gain.
    Margin(MarginArgs),
    /// Margin table over all methods and horizons, with reference
    /// comparison.
    Table2(TableArgs),
    /// Simulate the nonlinear closed loop and dump a trace.
    Simulate(SimulateArgs),
    /// Run the oracle and property validation batteries.
    Validate(ValidateArgs),
}

/// Settings file: every field optional, flags override.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub plant: Option<PathBuf>,
    pub methods: Option<Vec<String>>,
    pub horizons: Option<Vec<usize>>,
    pub alpha: Option<f64>,
    pub alpha_max: Option<f64>,
    pub tol: Option<f64>,
    pub horizon_convention: Option<String>,
    pub relax_p: Option<bool>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub out_json: Option<PathBuf>,
    pub out_csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Plant description file (JSON, {"tf": ...} or {"ss": ...}).
    #[arg(long)]
    pub plant: Option<PathBuf>,
    /// Horizon convention: "lift" (N counts stacked samples, matches the
    /// reference tables) or "filter" (N is the FIR filter horizon).
    #[arg(long)]
    pub horizon_convention: Option<String>,
    /// Drop the positive-semidefiniteness constraint on P (comparison mode;
    /// the internal-stability guarantee requires P >= 0).
    #[arg(long)]
    pub relax_p: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Multiplier class: relu-dynamic, relu-static, slope-dynamic,
    /// slope-static.
    #[arg(long)]
    pub method: Option<String>,
    /// Lift/filter size.
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Loop gain to certify.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MarginArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Initial upper bracket for the bisection.
    #[arg(long)]
    pub alpha_max: Option<f64>,
    /// Bisection stop tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Write the probe log here as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated method list (default: all four).
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Comma-separated horizon list (default: 1,2,3,4).
    #[arg(long, value_delimiter = ',')]
    pub horizons: Option<Vec<usize>>,
    #[arg(long)]
    pub alpha_max: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Worker threads for independent cells.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Reference margins CSV (defaults to the shipped benchmark values).
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Write the margin table here as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Nonlinearity: relu, identity, or saturation.
    #[arg(long, default_value = "relu")]
    pub phi: String,
    /// Initial plant state, comma-separated (default: first basis vector).
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
    /// Filter horizon recorded in the trace.
    #[arg(long = "N", default_value_t = 0)]
    pub n: usize,
    /// Write the trace here as CSV (default: stdout).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Seed for the randomized batteries.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub instances: Option<usize>,
    #[arg(long)]
    pub max_horizon: Option<usize>,
    #[arg(long)]
    pub max_t0: Option<usize>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

// ---------------------------------------------------------------- reports

#[derive(Debug, Serialize)]
pub struct CertifyReport {
    pub method: String,
    pub horizon: usize,
    pub alpha: f64,
    pub verdict: String,
    pub well_posed: bool,
    pub strictness: f64,
    pub strictness_floor: f64,
    pub numerical_trouble: bool,
    pub duality_gap: f64,
    pub solver_iterations: usize,
    pub lmi_max_eig: f64,
    pub p_min_eig: f64,
    pub theta: Vec<f64>,
    pub p: Vec<Vec<f64>>,
}

impl CertifyReport {
    pub fn from_certificate(cert: &Certificate) -> Self {
        Self {
            method: cert.method.kind.to_string(),
            horizon: cert.method.horizon,
            alpha: cert.alpha,
            verdict: match cert.verdict {
                Verdict::CertifiedStable => "certified-stable".into(),
                Verdict::Inconclusive => "inconclusive".into(),
            },
            well_posed: cert.well_posed,
            strictness: cert.witness.strictness,
            strictness_floor: cert.witness.t_min,
            numerical_trouble: cert.witness.status == crate::sdp::SolveStatus::NumericalTrouble,
            duality_gap: cert.witness.duality_gap,
            solver_iterations: cert.witness.iterations,
            lmi_max_eig: cert.witness.lmi_max_eig,
            p_min_eig: cert.witness.p_min_eig,
            theta: cert.witness.theta.clone(),
            p: matrix_rows(&cert.witness.p),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MarginReport {
    pub method: String,
    pub horizon: usize,
    pub margin: f64,
    pub alpha_hi: f64,
    pub iterations: usize,
    pub cap_reached: bool,
    pub log: Vec<MarginProbeReport>,
}

#[derive(Debug, Serialize)]
pub struct MarginProbeReport {
    pub alpha: f64,
    pub certified: bool,
    pub strictness: f64,
}

impl MarginReport {
    pub fn from_result(r: &MarginResult) -> Self {
        Self {
            method: r.method.kind.to_string(),
            horizon: r.method.horizon,
            margin: r.margin(),
            alpha_hi: r.alpha_hi,
            iterations: r.iterations,
            cap_reached: r.cap_reached,
            log: r
                .log
                .iter()
                .map(|p| MarginProbeReport {
                    alpha: p.alpha,
                    certified: p.certified,
                    strictness: p.strictness,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TableReport {
    pub cells: Vec<TableCellReport>,
}

#[derive(Debug, Serialize)]
pub struct TableCellReport {
    pub method: String,
    pub horizon: usize,
    pub margin: f64,
    pub iterations: usize,
    pub cap_reached: bool,
    pub reference: Option<f64>,
    /// `|margin - reference| / (1 + reference)`.
    pub deviation: Option<f64>,
    pub error: Option<String>,
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

// ------------------------------------------------------------- reference

/// Parses a reference-margin CSV (`method,N,margin`, `#` comments).
pub fn parse_reference(text: &str) -> Result<Vec<(MultiplierKind, usize, f64)>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("method") {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "bad reference line: {line:?}"
            )));
        }
        let kind: MultiplierKind = parts[0].trim().parse()?;
        let n: usize = parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad horizon in {line:?}")))?;
        let margin: f64 = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad margin in {line:?}")))?;
        out.push((kind, n, margin));
    }
    Ok(out)
}

// ------------------------------------------------------------- dispatch

fn parse_convention(s: &str) -> Result<HorizonConvention> {
    match s {
        "lift" => Ok(HorizonConvention::LiftSize),
        "filter" => Ok(HorizonConvention::FilterHorizon),
        other => Err(Error::InvalidArgument(format!(
            "unknown horizon convention {other:?} (expected lift or filter)"
        ))),
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn resolve_plant(flag: &Option<PathBuf>, cfg: &RunConfig) -> Result<StateSpace> {
    let path = flag
        .clone()
        .or_else(|| cfg.plant.clone())
        .ok_or_else(|| Error::InvalidArgument("no plant file given (--plant)".into()))?;
    load_plant(&path)
}

fn certify_options(common: &CommonArgs, cfg: &RunConfig) -> Result<CertifyOptions> {
    let convention = match (&common.horizon_convention, &cfg.horizon_convention) {
        (Some(s), _) => parse_convention(s)?,
        (None, Some(s)) => parse_convention(s)?,
        (None, None) => HorizonConvention::default(),
    };
    let relax = common.relax_p || cfg.relax_p.unwrap_or(false);
    Ok(CertifyOptions {
        convention,
        solve: SolveOptions {
            require_psd_p: !relax,
            ..SolveOptions::default()
        },
    })
}

fn emit_json<T: Serialize>(value: &T, path: &Option<PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn write_or_print(text: &str, path: &Option<PathBuf>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn cmd_certify(args: &CertifyArgs, cfg: &RunConfig) -> Result<(i32, CertifyReport)> {
    let g = resolve_plant(&args.common.plant, cfg)?;
    let kind: MultiplierKind = args
        .method
        .clone()
        .or_else(|| cfg.methods.as_ref().and_then(|m| m.first().cloned()))
        .ok_or_else(|| Error::InvalidArgument("no method given (--method)".into()))?
        .parse()?;
    let horizon = args
        .n
        .or_else(|| cfg.horizons.as_ref().and_then(|h| h.first().copied()))
        .ok_or_else(|| Error::InvalidArgument("no horizon given (--N)".into()))?;
    let alpha = args
        .alpha
        .or(cfg.alpha)
        .ok_or_else(|| Error::InvalidArgument("no gain given (--alpha)".into()))?;
    let opts = certify_options(&args.common, cfg)?;
    let backend = InteriorPoint::default();
    let cert = certify(&g, Method::new(kind, horizon), alpha, &opts, &backend)?;
    let report = CertifyReport::from_certificate(&cert);
    let code = if cert.is_certified() { 0 } else { 2 };
    Ok((code, report))
}

pub fn cmd_margin(args: &MarginArgs, cfg: &RunConfig) -> Result<(i32, MarginReport)> {
    let g = resolve_plant(&args.common.plant, cfg)?;
    let kind: MultiplierKind = args
        .method
        .clone()
        .or_else(|| cfg.methods.as_ref().and_then(|m| m.first().cloned()))
        .ok_or_else(|| Error::InvalidArgument("no method given (--method)".into()))?
        .parse()?;
    let horizon = args
        .n
        .or_else(|| cfg.horizons.as_ref().and_then(|h| h.first().copied()))
        .ok_or_else(|| Error::InvalidArgument("no horizon given (--N)".into()))?;
    let opts = MarginOptions {
        alpha_hi: args.alpha_max.or(cfg.alpha_max).unwrap_or(400.0),
        tol: args.tol.or(cfg.tol).unwrap_or(1e-3),
        certify: certify_options(&args.common, cfg)?,
    };
    if opts.alpha_hi <= 0.0 || opts.tol <= 0.0 {
        return Err(Error::InvalidArgument(
            "alpha-max and tol must be positive".into(),
        ));
    }
    let backend = InteriorPoint::default();
    let result = margin(&g, Method::new(kind, horizon), &opts, &backend)?;
    if let Some(csv_path) = &args.csv {
        let mut csv = String::from("alpha,certified,strictness\n");
        for p in &result.log {
            csv.push_str(&format!(
                "{},{},{:.6e}\n",
                p.alpha, p.certified, p.strictness
            ));
        }
        std::fs::write(csv_path, csv)?;
    }
    Ok((0, MarginReport::from_result(&result)))
}

pub fn cmd_table2(args: &TableArgs, cfg: &RunConfig) -> Result<(i32, TableReport, MarginTable)> {
    let g = resolve_plant(&args.common.plant, cfg)?;
    let method_names = args
        .methods
        .clone()
        .or_else(|| cfg.methods.clone())
        .unwrap_or_else(|| MultiplierKind::ALL.iter().map(|k| k.to_string()).collect());
    if method_names.is_empty() {
        return Err(Error::InvalidArgument("empty method list".into()));
    }
    let kinds: Vec<MultiplierKind> = method_names
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    let horizons = args
        .horizons
        .clone()
        .or_else(|| cfg.horizons.clone())
        .unwrap_or_else(|| vec![1, 2, 3, 4]);
    if horizons.is_empty() {
        return Err(Error::InvalidArgument("empty horizon list".into()));
    }
    let opts = MarginOptions {
        alpha_hi: args.alpha_max.or(cfg.alpha_max).unwrap_or(400.0),
        tol: args.tol.or(cfg.tol).unwrap_or(1e-3),
        certify: certify_options(&args.common, cfg)?,
    };
    let jobs = args.jobs.or(cfg.jobs).unwrap_or(1);
    let backend = InteriorPoint::default();
    let table = margin_table(&g, &kinds, &horizons, &opts, jobs, &backend);

    let reference_text = match &args.reference {
        Some(p) => std::fs::read_to_string(p)?,
        None => REFERENCE_MARGINS_CSV.to_string(),
    };
    let reference = parse_reference(&reference_text)?;
    let lookup = |kind: MultiplierKind, n: usize| {
        reference
            .iter()
            .find(|(k, h, _)| *k == kind && *h == n)
            .map(|(_, _, m)| *m)
    };
    let cells = table
        .cells
        .iter()
        .map(|c| {
            let reference = lookup(c.method.kind, c.method.horizon);
            let deviation = reference.map(|r| (c.margin - r).abs() / (1.0 + r));
            TableCellReport {
                method: c.method.kind.to_string(),
                horizon: c.method.horizon,
                margin: c.margin,
                iterations: c.iterations,
                cap_reached: c.cap_reached,
                reference,
                deviation,
                error: c.error.clone(),
            }
        })
        .collect();
    if let Some(csv_path) = &args.csv {
        std::fs::write(csv_path, table.to_csv())?;
    }
    Ok((0, TableReport { cells }, table))
}

/// Renders the table grid for the terminal.
pub fn format_table(report: &TableReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<16} {:>3} {:>12} {:>12} {:>10}\n",
        "method", "N", "margin", "reference", "deviation"
    ));
    for c in &report.cells {
        let reference = c.reference.map_or(String::from("-"), |r| format!("{r:.4}"));
        let deviation = c
            .deviation
            .map_or(String::from("-"), |d| format!("{d:.2e}"));
        let margin = if let Some(e) = &c.error {
            format!("error: {e}")
        } else {
            format!("{:.4}", c.margin)
        };
        out.push_str(&format!(
            "{:<16} {:>3} {:>12} {:>12} {:>10}\n",
            c.method, c.horizon, margin, reference, deviation
        ));
    }
    out
}

pub fn cmd_simulate(args: &SimulateArgs, cfg: &RunConfig) -> Result<i32> {
    let g = resolve_plant(&args.common.plant, cfg)?;
    let alpha = args
        .alpha
        .or(cfg.alpha)
        .ok_or_else(|| Error::InvalidArgument("no gain given (--alpha)".into()))?;
    if alpha < 0.0 {
        return Err(Error::InvalidArgument("alpha must be nonnegative".into()));
    }
    let phi = match args.phi.as_str() {
        "relu" => Phi::Relu,
        "identity" => Phi::Identity,
        "saturation" => Phi::Saturation(1.0),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown nonlinearity {other:?} (expected relu, identity or saturation)"
            )))
        }
    };
    let x0 = match &args.x0 {
        Some(text) => {
            let values: std::result::Result<Vec<f64>, _> =
                text.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let values =
                values.map_err(|_| Error::InvalidArgument(format!("bad --x0 value {text:?}")))?;
            DVector::from_vec(values)
        }
        None => {
            let mut x0 = DVector::zeros(g.order());
            if g.order() > 0 {
                x0[0] = 1.0;
            }
            x0
        }
    };
    let trace = simulate_loop(&g, alpha, &phi, &x0, args.steps, args.n)?;
    write_or_print(&trace.to_csv(), &args.csv)?;
    Ok(0)
}

#[derive(Debug, Serialize)]
pub struct ValidateReport {
    pub seed: u64,
    pub checks: Vec<ValidateCheckReport>,
}

#[derive(Debug, Serialize)]
pub struct ValidateCheckReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

pub fn cmd_validate(args: &ValidateArgs, cfg: &RunConfig) -> Result<(i32, ValidateReport)> {
    let defaults = ValidateConfig::default();
    let vcfg = ValidateConfig {
        seed: args.seed.or(cfg.seed).unwrap_or(defaults.seed),
        instances: args.instances.unwrap_or(defaults.instances),
        max_horizon: args.max_horizon.unwrap_or(defaults.max_horizon),
        max_t0: args.max_t0.unwrap_or(defaults.max_t0),
    };
    let outcomes = run_all(&vcfg);
    let all_pass = outcomes.iter().all(|o| o.passed);
    let report = ValidateReport {
        seed: vcfg.seed,
        checks: outcomes
            .into_iter()
            .map(|o| ValidateCheckReport {
                name: o.name,
                passed: o.passed,
                detail: o.detail,
            })
            .collect(),
    };
    Ok((if all_pass { 0 } else { 2 }, report))
}

/// Parses arguments and dispatches; returns the process exit code.
pub fn main_entry<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successful exits
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let cfg = load_config(&cli.config)?;
    match &cli.command {
        Command::Certify(args) => {
            let (code, report) = cmd_certify(args, &cfg)?;
            emit_json(&report, &args.common.json)?;
            Ok(code)
        }
        Command::Margin(args) => {
            let (code, report) = cmd_margin(args, &cfg)?;
            emit_json(&report, &args.common.json)?;
            Ok(code)
        }
        Command::Table2(args) => {
            let (code, report, _) = cmd_table2(args, &cfg)?;
            match &args.common.json {
                Some(path) => emit_json(&report, &Some(path.clone()))?,
                None => print!("{}", format_table(&report)),
            }
            Ok(code)
        }
        Command::Simulate(args) => cmd_simulate(args, &cfg),
        Command::Validate(args) => {
            let (code, report) = cmd_validate(args, &cfg)?;
            for check in &report.checks {
                println!(
                    "[{}] {} — {}",
                    if check.passed { "PASS" } else { "FAIL" },
                    check.name,
                    check.detail
                );
            }
            if let Some(path) = &args.json {
                emit_json(&report, &Some(path.clone()))?;
            }
            Ok(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::benchmark_plant;

    fn write_benchmark_plant() -> tempfile::TempPath {
        let file = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(
            file.path(),
            r#"{"tf": {"num": [2.0, 0.92], "den": [1.0, -0.5, 0.0]}}"#,
        )
        .unwrap();
        file.into_temp_path()
    }

    #[test]
    fn reference_file_parses() {
        let reference = parse_reference(REFERENCE_MARGINS_CSV).unwrap();
        assert_eq!(reference.len(), 16);
        let relu_dyn_2 = reference
            .iter()
            .find(|(k, n, _)| *k == MultiplierKind::ReluDynamic && *n == 2)
            .unwrap();
        assert!((relu_dyn_2.2 - 1.4553).abs() < 1e-9);
    }

    #[test]
    fn certify_report_matches_library_call() {
        let plant_path = write_benchmark_plant();
        let args = CertifyArgs {
            common: CommonArgs {
                plant: Some(plant_path.to_path_buf()),
                horizon_convention: None,
                relax_p: false,
                json: None,
            },
            method: Some("slope-dynamic".into()),
            n: Some(1),
            alpha: Some(0.5),
        };
        let (code, report) = cmd_certify(&args, &RunConfig::default()).unwrap();
        let direct = certify(
            &benchmark_plant(),
            Method::new(MultiplierKind::SlopeDynamic, 1),
            0.5,
            &CertifyOptions::default(),
            &InteriorPoint::default(),
        )
        .unwrap();
        assert_eq!(code, if direct.is_certified() { 0 } else { 2 });
        assert_eq!(report.strictness, direct.witness.strictness);
        assert_eq!(report.theta, direct.witness.theta);
    }

    #[test]
    fn table_rejects_empty_method_list() {
        let plant_path = write_benchmark_plant();
        let args = TableArgs {
            common: CommonArgs {
                plant: Some(plant_path.to_path_buf()),
                horizon_convention: None,
                relax_p: false,
                json: None,
            },
            methods: Some(vec![]),
            horizons: None,
            alpha_max: None,
            tol: None,
            jobs: None,
            reference: None,
            csv: None,
        };
        assert!(cmd_table2(&args, &RunConfig::default()).is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(main_entry(["lurye", "certify", "--alpha", "oops"]), 1);
        // negative alpha is a usage error
        let plant_path = write_benchmark_plant();
        let code = main_entry([
            "lurye",
            "certify",
            "--plant",
            plant_path.to_str().unwrap(),
            "--method",
            "relu-dynamic",
            "--N",
            "1",
            "--alpha",
            "-1",
        ]);
        assert_eq!(code, 1);
    }
}
