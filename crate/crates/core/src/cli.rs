//! Command-line front end.
//!
//! Exit codes: 0 ok, 2 invalid input, 3 infeasible parameters,
//! 4 unsatisfiable design constraints, 5 Monte Carlo disagreement with the
//! closed forms, 64 internal or I/O failure.
//!
//! Every run produces a manifest with the resolved configuration. With
//! `--out DIR` it is written to `DIR/manifest.txt` next to the command's
//! output; otherwise it goes to stderr.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analytics::{link_metrics, EsdDesign, LinkMetrics};
use crate::config::{self, fmt_num};
use crate::designer::{self, DesignQuery, Objective};
use crate::error::EsdError;
use crate::montecarlo::{self, RngSeed, SimulationMode};
use crate::params::{validate, ChannelLaw, ChannelVariant, ParamSet};
use crate::report::{self, csv_table, figures};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;
pub const EXIT_UNSATISFIABLE: u8 = 4;
pub const EXIT_DISAGREE: u8 = 5;
pub const EXIT_INTERNAL: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "esd", version, about = "Empty-signal detection link calculator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Parameter file (flat key = value, TOML syntax)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Direct transmission rate; overrides the fibre model
    #[arg(long)]
    pub t: Option<f64>,
    /// Attenuation in dB/km
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Link length in km
    #[arg(long)]
    pub length: Option<f64>,
    /// direct or twin-field
    #[arg(long)]
    pub variant: Option<String>,
    /// Use t = 10^(-alpha*l/10) instead of e^(-alpha*l/10)
    #[arg(long)]
    pub base10: bool,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every link quantity at one (t, n, k) point
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        k: u32,
    },
    /// CSV over a log-spaced t range, or over the (n, k) grid at fixed t
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Sweep the full grid 0 <= k <= n <= N at fixed t
        #[arg(long)]
        n_max: Option<u32>,
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = 29)]
        t_points: usize,
        /// Comma-separated designs, e.g. 0:0,7:3
        #[arg(long)]
        designs: Option<String>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        k: Option<u32>,
    },
    /// Monte Carlo run compared against the closed forms
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// direct or conditional; chosen from t when omitted
        #[arg(long)]
        mode: Option<String>,
    },
    /// Feasibility verdict and best design for an objective
    Design {
        #[command(flatten)]
        common: Common,
        /// max_nesr, min_qber or max_rate
        #[arg(long, default_value = "max_rate")]
        objective: String,
        #[arg(long, default_value_t = 9)]
        n_max: u32,
        /// QBER ceiling (strict)
        #[arg(long)]
        qber_max: Option<f64>,
        /// NESR floor
        #[arg(long)]
        nesr_min: Option<f64>,
    },
    /// Regenerate reference figure data, charts and claim checks
    Reproduce {
        #[command(flatten)]
        common: Common,
        /// nesr-qber or nk-grid
        #[arg(long)]
        figure: String,
        /// Designs for the t panels, e.g. 0:0,3:2,5:3,7:3
        #[arg(long)]
        designs: Option<String>,
        #[arg(long, default_value_t = 10)]
        points_per_decade: usize,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<EsdError> for CliError {
    fn from(e: EsdError) -> Self {
        let code = match e {
            EsdError::Infeasible(_) => EXIT_UNSATISFIABLE,
            _ => EXIT_INVALID,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(EXIT_INTERNAL, format!("i/o: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version arrive here with exit code 0
            let _ = if e.exit_code() == 0 {
                write!(stdout, "{}", e.render())
            } else {
                write!(stderr, "{}", e.render())
            };
            return u8::try_from(e.exit_code()).unwrap_or(EXIT_INVALID);
        }
    };
    run(cli, stdout, stderr)
}

pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    let result = match cli.command {
        Command::Analyze { common, n, k } => cmd_analyze(&common, n, k, stdout, stderr),
        Command::Sweep {
            common,
            n_max,
            t_min,
            t_max,
            t_points,
            designs,
            n,
            k,
        } => cmd_sweep(
            &common,
            &SweepArgs {
                n_max,
                t_min,
                t_max,
                t_points,
                designs,
                n,
                k,
            },
            stdout,
            stderr,
        ),
        Command::Simulate {
            common,
            n,
            k,
            trials,
            seed,
            stream,
            mode,
        } => cmd_simulate(&common, n, k, trials, RngSeed::with_stream(seed, stream), mode, stdout, stderr),
        Command::Design {
            common,
            objective,
            n_max,
            qber_max,
            nesr_min,
        } => cmd_design(&common, &objective, n_max, qber_max, nesr_min, stdout, stderr),
        Command::Reproduce {
            common,
            figure,
            designs,
            points_per_decade,
        } => cmd_reproduce(&common, &figure, designs.as_deref(), points_per_decade, stdout, stderr),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

/// Loads the parameter file, applies channel flags and validates.
pub fn resolve_params(common: &Common, stderr: &mut dyn Write) -> CliResult<ParamSet> {
    let mut params = match &common.config {
        Some(path) => config::load(path)?,
        None => ParamSet::reference(),
    };
    if let Some(t) = common.t {
        params.channel.t_override = Some(t);
    }
    if let Some(alpha) = common.alpha {
        params.channel.alpha_db_per_km = alpha;
        if common.t.is_none() {
            params.channel.t_override = None;
        }
    }
    if let Some(length) = common.length {
        params.channel.length_km = length;
        if common.t.is_none() {
            params.channel.t_override = None;
        }
    }
    if let Some(v) = &common.variant {
        params.channel.variant = v.parse::<ChannelVariant>()?;
    }
    if common.base10 {
        params.channel.law = ChannelLaw::Base10;
    }
    let report = validate(&params);
    for w in &report.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    if let Some(e) = report.errors.first() {
        return Err(CliError::new(EXIT_INVALID, e.to_string()));
    }
    Ok(params)
}

fn emit(
    common: &Common,
    file_name: &str,
    body: &str,
    manifest: &str,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<()> {
    stdout.write_all(body.as_bytes())?;
    match &common.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(file_name), body)?;
            std::fs::write(dir.join("manifest.txt"), manifest)?;
        }
        None => stderr.write_all(manifest.as_bytes())?,
    }
    Ok(())
}

fn opt_cell(v: Option<f64>) -> String {
    v.map_or_else(|| report::UNDEFINED.to_string(), fmt_num)
}

/// `key=value` report of one link point.
pub fn render_metrics(m: &LinkMetrics) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(out, "{k}={v}");
    };
    line("t", fmt_num(m.t));
    line("n", m.design.n().to_string());
    line("k", m.design.k().to_string());
    line("p_s", fmt_num(m.p_s));
    line("q_s", fmt_num(m.q_s));
    line("p_tail", fmt_num(m.p_tail));
    line("q_tail", fmt_num(m.q_tail));
    line("nesr", opt_cell(m.nesr));
    line("s_esd", fmt_num(m.s_esd));
    line("qber", opt_cell(m.qber));
    line("rate", fmt_num(m.rate));
    out
}

pub fn cmd_analyze(
    common: &Common,
    n: u32,
    k: u32,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<u8> {
    let params = resolve_params(common, stderr)?;
    let design = EsdDesign::new(n, k)?;
    let t = params.channel.transmission_rate()?;
    let metrics = link_metrics(t, design, &params)?;
    let mut body = render_metrics(&metrics);
    body.push_str(&designer::feasibility_report(&params).render());
    let manifest = report::manifest(
        "analyze",
        &[("n", n.to_string()), ("k", k.to_string()), ("t", fmt_num(t))],
        &params,
    );
    emit(common, "analyze.txt", &body, &manifest, stdout, stderr)?;
    Ok(EXIT_OK)
}

pub struct SweepArgs {
    pub n_max: Option<u32>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub t_points: usize,
    pub designs: Option<String>,
    pub n: Option<u32>,
    pub k: Option<u32>,
}

fn parse_designs(list: &str) -> CliResult<Vec<EsdDesign>> {
    let designs = list
        .split([';', ' '])
        .flat_map(split_design_list)
        .map(|s| s.parse::<EsdDesign>().map_err(CliError::from))
        .collect::<CliResult<Vec<_>>>()?;
    if designs.is_empty() {
        return Err(CliError::new(EXIT_INVALID, "design list is empty"));
    }
    Ok(designs)
}

/// Splits `0:0,7:3` on commas; `(0,0),(7,3)` keeps its pairs together.
fn split_design_list(s: &str) -> Vec<String> {
    if s.contains('(') {
        s.split(')')
            .map(|p| p.trim_start_matches(',').trim().to_string())
            .filter(|p| !p.is_empty())
            .map(|p| format!("{p})"))
            .collect()
    } else {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(String::from)
            .collect()
    }
}

pub fn cmd_sweep(
    common: &Common,
    args: &SweepArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<u8> {
    let params = resolve_params(common, stderr)?;
    let mut options: Vec<(&str, String)> = Vec::new();
    let rows: Vec<LinkMetrics> = if let Some(n_max) = args.n_max {
        let t = params.channel.transmission_rate()?;
        options.push(("t", fmt_num(t)));
        options.push(("n_max", n_max.to_string()));
        designer::sweep(t, &params, n_max)?
            .into_iter()
            .map(|p| p.metrics)
            .collect()
    } else {
        let designs = match (&args.designs, args.n, args.k) {
            (Some(list), None, None) => parse_designs(list)?,
            (None, n, k) => vec![EsdDesign::new(n.unwrap_or(0), k.unwrap_or(0))?],
            _ => {
                return Err(CliError::new(
                    EXIT_INVALID,
                    "use either --designs or --n/--k, not both",
                ))
            }
        };
        let ts = match (args.t_min, args.t_max) {
            (Some(lo), Some(hi)) => report::log_grid(lo, hi, args.t_points)?,
            (None, None) => vec![params.channel.transmission_rate()?],
            _ => {
                return Err(CliError::new(EXIT_INVALID, "--t-min and --t-max go together"));
            }
        };
        let mut designs = designs;
        designs.sort();
        designs.dedup();
        options.push((
            "designs",
            designs.iter().map(|d| format!("{}:{}", d.n(), d.k())).collect::<Vec<_>>().join(","),
        ));
        options.push(("t_min", fmt_num(ts[0])));
        options.push(("t_max", fmt_num(ts[ts.len() - 1])));
        options.push(("t_points", ts.len().to_string()));
        let mut rows = Vec::with_capacity(ts.len() * designs.len());
        for &t in &ts {
            for &d in &designs {
                rows.push(link_metrics(t, d, &params)?);
            }
        }
        rows
    };
    let manifest = report::manifest("sweep", &options, &params);
    emit(common, "sweep.csv", &csv_table(&rows), &manifest, stdout, stderr)?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_simulate(
    common: &Common,
    n: u32,
    k: u32,
    trials: u64,
    seed: RngSeed,
    mode: Option<String>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<u8> {
    let params = resolve_params(common, stderr)?;
    let design = EsdDesign::new(n, k)?;
    let t = params.channel.transmission_rate()?;
    let mode = match mode {
        Some(m) => m.parse::<SimulationMode>()?,
        None if t < montecarlo::DIRECT_MODE_MIN_T => SimulationMode::Conditional,
        None => SimulationMode::Direct,
    };
    let sim = montecarlo::simulate_link(t, design, &params, trials, seed, mode)?;
    let analytic = link_metrics(t, design, &params)?;
    let agreement = montecarlo::compare_to_analytic(&sim.empirical(), &analytic);
    let mut body = sim.summary();
    body.push_str(&agreement.render());
    let manifest = report::manifest(
        "simulate",
        &[
            ("n", n.to_string()),
            ("k", k.to_string()),
            ("t", fmt_num(t)),
            ("trials", trials.to_string()),
            ("seed", seed.seed.to_string()),
            ("stream_id", seed.stream_id.to_string()),
            ("mode", mode.to_string()),
        ],
        &params,
    );
    emit(common, "simulate.txt", &body, &manifest, stdout, stderr)?;
    Ok(if agreement.pass() { EXIT_OK } else { EXIT_DISAGREE })
}

pub fn cmd_design(
    common: &Common,
    objective: &str,
    n_max: u32,
    qber_max: Option<f64>,
    nesr_min: Option<f64>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<u8> {
    let params = resolve_params(common, stderr)?;
    let query = DesignQuery {
        objective: objective.parse::<Objective>()?,
        n_max,
        qber_ceiling: qber_max,
        nesr_floor: nesr_min,
    };
    query.validate()?;
    let t = params.channel.transmission_rate()?;
    let feasibility = designer::feasibility_report(&params);
    let mut body = feasibility.render();
    let manifest = report::manifest(
        "design",
        &[
            ("t", fmt_num(t)),
            ("objective", query.objective.to_string()),
            ("n_max", n_max.to_string()),
            ("qber_max", qber_max.map_or("none".into(), fmt_num)),
            ("nesr_min", nesr_min.map_or("none".into(), fmt_num)),
        ],
        &params,
    );
    if !feasibility.feasible {
        body.push_str("design=infeasible\n");
        emit(common, "design.txt", &body, &manifest, stdout, stderr)?;
        return Ok(EXIT_INFEASIBLE);
    }
    match designer::optimize(t, &params, &query) {
        Ok(best) => {
            let _ = writeln!(body, "design={}", best.design);
            body.push_str(&render_metrics(&best.metrics));
            emit(common, "design.txt", &body, &manifest, stdout, stderr)?;
            Ok(EXIT_OK)
        }
        Err(EsdError::Infeasible(msg)) => {
            let _ = writeln!(body, "design=unsatisfiable ({msg})");
            emit(common, "design.txt", &body, &manifest, stdout, stderr)?;
            Ok(EXIT_UNSATISFIABLE)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_reproduce(
    common: &Common,
    figure: &str,
    designs: Option<&str>,
    points_per_decade: usize,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<u8> {
    let figure = figure.parse::<figures::Figure>()?;
    let params = resolve_params(common, stderr)?;
    if points_per_decade == 0 {
        return Err(CliError::new(EXIT_INVALID, "--points-per-decade must be positive"));
    }
    let opts = figures::ReproduceOptions {
        designs: match designs {
            Some(list) => parse_designs(list)?,
            None => figures::default_designs(),
        },
        points_per_decade,
        ..figures::ReproduceOptions::default()
    };
    let output = figures::reproduce(figure, &params, &opts)?;
    let out_dir = common.out.clone().unwrap_or_else(|| PathBuf::from("figures"));
    let dir: &Path = &out_dir;
    std::fs::create_dir_all(dir)?;
    for (name, contents) in &output.files {
        std::fs::write(dir.join(name), contents)?;
    }
    let summary = output.summary();
    std::fs::write(dir.join("summary.txt"), &summary)?;
    let manifest = report::manifest(
        "reproduce",
        &[
            ("figure", figure.to_string()),
            (
                "designs",
                opts.designs.iter().map(|d| format!("{}:{}", d.n(), d.k())).collect::<Vec<_>>().join(","),
            ),
            ("points_per_decade", points_per_decade.to_string()),
        ],
        &params,
    );
    std::fs::write(dir.join("manifest.txt"), &manifest)?;
    stdout.write_all(summary.as_bytes())?;
    let _ = writeln!(stdout, "written={}", dir.display());
    Ok(EXIT_OK)
}
