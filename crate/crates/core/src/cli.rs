//! Command-line front end: `simulate`, `sweep` and `verify`.
//!
//! Exit codes: 0 on success, 1 when verification fails or a run cannot
//! complete (for example an unwritable output path), 2 on usage errors.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{self, SweepRow};
use crate::circuits::{DetectorMap, Protocol, ProtocolSpec};
use crate::detection;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Significant digits in numeric output.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Parser)]
#[command(
    name = "timebin-ecp",
    version,
    about = "Heralded entanglement concentration with linear optics and time-bin tags"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one protocol instance and print the heralded outcomes.
    Simulate(SimulateArgs),
    /// Tabulate success probabilities over a grid of alpha values as CSV.
    Sweep(SweepArgs),
    /// Check every detection signature against its heralded state.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProtocolKind {
    Bell,
    Ghz,
}

#[derive(Debug, Args)]
struct ProtocolArgs {
    /// Protocol to run (same as --protocol).
    #[arg(value_enum, value_name = "PROTOCOL")]
    positional: Option<ProtocolKind>,

    #[arg(long = "protocol", value_enum)]
    protocol: Option<ProtocolKind>,

    /// Number of parties sharing each GHZ state.
    #[arg(long)]
    parties: Option<u8>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,

    /// Real amplitude alpha in [0, 1]; beta = sqrt(1 - alpha^2).
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,

    /// Recycling rounds after the first pass.
    #[arg(long, default_value_t = 0)]
    rounds: u32,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,

    /// Number of alpha values, uniformly spaced inside (0, 1).
    #[arg(long, default_value_t = 99, allow_negative_numbers = true)]
    grid: i64,

    #[arg(long, default_value_t = 1)]
    rounds: u32,

    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write an SVG plot of the success curves.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,

    /// Number of alpha values to check each signature at.
    #[arg(long, default_value_t = 9, allow_negative_numbers = true)]
    grid: i64,

    /// Swap the ports of detectors D2 and D3 (negative control).
    #[arg(long, hide = true)]
    permute_detectors: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Simulate,
    Sweep,
    Verify,
}

/// A fully validated command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Task,
    /// Protocols to run; `verify` without a protocol checks Bell and GHZ(3).
    pub protocols: Vec<Protocol>,
    pub alpha: Option<f64>,
    pub rounds: u32,
    pub grid: usize,
    pub out: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub permute_detectors: bool,
}

#[derive(Debug)]
struct UsageError(String);

fn resolve_protocol(args: &ProtocolArgs) -> Result<Option<Protocol>, UsageError> {
    let kind = match (args.positional, args.protocol) {
        (Some(a), Some(b)) if a != b => return Err(UsageError("protocol given twice with different values".into())),
        (a, b) => a.or(b),
    };
    match (kind, args.parties) {
        (None, None) => Ok(None),
        (Some(ProtocolKind::Bell), None) | (Some(ProtocolKind::Bell), Some(2)) => Ok(Some(Protocol::Bell)),
        (Some(ProtocolKind::Bell), Some(n)) => {
            Err(UsageError(format!("bell protocol has 2 parties, got --parties {n}")))
        }
        (Some(ProtocolKind::Ghz), parties) | (None, parties @ Some(_)) => {
            let n = parties.unwrap_or(3);
            if !(2..=crate::circuits::MAX_PARTIES).contains(&n) {
                return Err(UsageError(format!(
                    "--parties must be between 2 and {}, got {n}",
                    crate::circuits::MAX_PARTIES
                )));
            }
            Ok(Some(Protocol::Ghz(n)))
        }
    }
}

fn check_grid(grid: i64, min: i64) -> Result<usize, UsageError> {
    if grid < min {
        return Err(UsageError(format!("--grid must be at least {min}, got {grid}")));
    }
    Ok(grid as usize)
}

impl RunConfig {
    fn from_cli(cli: Cli) -> Result<Self, UsageError> {
        match cli.command {
            Command::Simulate(a) => {
                let alpha = a.alpha.ok_or_else(|| UsageError("simulate needs --alpha".into()))?;
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(UsageError(format!("--alpha must lie in [0, 1], got {alpha}")));
                }
                Ok(RunConfig {
                    subcommand: Task::Simulate,
                    protocols: vec![resolve_protocol(&a.protocol)?.unwrap_or(Protocol::Bell)],
                    alpha: Some(alpha),
                    rounds: a.rounds,
                    grid: 0,
                    out: None,
                    plot: None,
                    permute_detectors: false,
                })
            }
            Command::Sweep(a) => Ok(RunConfig {
                subcommand: Task::Sweep,
                protocols: vec![resolve_protocol(&a.protocol)?.unwrap_or(Protocol::Bell)],
                alpha: None,
                rounds: a.rounds,
                grid: check_grid(a.grid, 2)?,
                out: a.out,
                plot: a.plot,
                permute_detectors: false,
            }),
            Command::Verify(a) => Ok(RunConfig {
                subcommand: Task::Verify,
                protocols: match resolve_protocol(&a.protocol)? {
                    Some(p) => vec![p],
                    None => vec![Protocol::Bell, Protocol::Ghz(3)],
                },
                alpha: None,
                rounds: 0,
                grid: check_grid(a.grid, 1)?,
                out: None,
                plot: None,
                permute_detectors: a.permute_detectors,
            }),
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let config = match RunConfig::from_cli(cli) {
        Ok(c) => c,
        Err(UsageError(msg)) => {
            let _ = writeln!(err, "error: {msg}\n\nFor more information, try '--help'.");
            return EXIT_USAGE;
        }
    };
    let result = match config.subcommand {
        Task::Simulate => cmd_simulate(&config, out),
        Task::Sweep => cmd_sweep(&config, out),
        Task::Verify => cmd_verify(&config, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_FAILURE
        }
    }
}

/// Formats `x` with [`SIGNIFICANT_DIGITS`] significant digits, in fixed
/// notation for moderate magnitudes and scientific otherwise.
pub fn format_sig(x: f64) -> String {
    let digits = SIGNIFICANT_DIGITS as i32;
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 {
            format!("{:.*}", (digits - 1) as usize, 0.0)
        } else {
            x.to_string()
        };
    }
    // The exponent is taken after rounding so 0.99999999999999 -> 1.00000000000.
    let sci = format!("{:.*e}", (digits - 1) as usize, x);
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-5..digits).contains(&exp) {
        format!("{:.*}", (digits - 1 - exp).max(0) as usize, x)
    } else {
        sci
    }
}

pub fn cmd_simulate(config: &RunConfig, out: &mut dyn Write) -> anyhow::Result<i32> {
    let protocol = config.protocols[0];
    let alpha = config.alpha.expect("validated");
    let spec = ProtocolSpec::from_alpha(protocol, alpha)?.with_rounds(config.rounds);
    let outcomes = detection::herald(&spec)?;

    writeln!(
        out,
        "parties={} alpha={} beta={}",
        spec.parties(),
        format_sig(spec.alpha.re),
        format_sig(spec.beta.re)
    )?;
    writeln!(
        out,
        "{:<12} {:<16} {:<12} fidelity",
        "label", "probability", "feed-forward"
    )?;
    for o in &outcomes {
        let fidelity = if o.residual.is_empty() {
            "-".to_string()
        } else {
            format_sig(o.residual.fidelity(&o.label.target(&spec)))
        };
        writeln!(
            out,
            "{:<12} {:<16} {:<12} {}",
            o.label,
            format_sig(o.probability),
            o.feedforward,
            fidelity
        )?;
    }
    writeln!(out, "Success {:.4}", detection::success_mass(&outcomes).max(0.0))?;
    writeln!(out, "Recyclable {:.4}", detection::recyclable_mass(&outcomes).max(0.0))?;
    if config.rounds > 0 {
        let total = analysis::simulate_total_probability(&spec)?;
        writeln!(out, "Total after {} recycling rounds {:.4}", config.rounds, total)?;
    }
    Ok(EXIT_OK)
}

fn write_csv<W: Write>(rows: &[SweepRow], rounds: u32, sink: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["alpha", "p_success", "p_recyclable", &format!("p_total_r{rounds}")])?;
    for r in rows {
        w.write_record([
            format_sig(r.alpha),
            format_sig(r.p_success),
            format_sig(r.p_recyclable),
            format_sig(r.p_total),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_sweep(config: &RunConfig, out: &mut dyn Write) -> anyhow::Result<i32> {
    let grid = analysis::uniform_grid(config.grid);
    let rows = analysis::sweep(config.protocols[0], &grid, config.rounds)?;
    match &config.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
            write_csv(&rows, config.rounds, io::BufWriter::new(file))?;
        }
        None => write_csv(&rows, config.rounds, &mut *out)?,
    }
    if let Some(path) = &config.plot {
        plot_sweep(&rows, config.rounds, path)?;
    }
    Ok(EXIT_OK)
}

fn plot_sweep(rows: &[SweepRow], rounds: u32, path: &Path) -> anyhow::Result<()> {
    use plotters::prelude::*;

    // Plotters panics rather than erroring on an unwritable target.
    File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    let root = SVGBackend::new(path, (720, 480)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(30)
        .y_label_area_size(40)
        .build_cartesian_2d(0f64..1f64, 0f64..1f64)?;
    chart.configure_mesh().disable_mesh().draw()?;
    chart.draw_series(LineSeries::new(rows.iter().map(|r| (r.alpha, r.p_success)), &BLACK))?;
    if rounds > 0 {
        chart.draw_series(
            rows.iter()
                .step_by(2)
                .map(|r| Circle::new((r.alpha, r.p_total), 2, BLUE.filled())),
        )?;
    }
    root.present()?;
    Ok(())
}

pub fn cmd_verify(config: &RunConfig, out: &mut dyn Write) -> anyhow::Result<i32> {
    let alphas = analysis::uniform_grid(config.grid);
    let mut passed = 0;
    let mut total = 0;
    let mut failures = Vec::new();
    for &protocol in &config.protocols {
        let detectors = config
            .permute_detectors
            .then(|| DetectorMap::canonical(protocol.parties()).with_swapped(2, 3));
        let report = analysis::verify_with_detectors(protocol, &alphas, detectors)?;
        writeln!(out, "{report}")?;
        passed += report.passed();
        total += report.rows.len();
        failures.extend(
            report
                .rows
                .iter()
                .filter(|r| !r.passed)
                .map(|r| format!("{} {}: {}", protocol, r.pattern, r.detail)),
        );
    }
    if failures.is_empty() {
        writeln!(out, "PASS rows={passed}/{total}")?;
        Ok(EXIT_OK)
    } else {
        for f in &failures {
            writeln!(out, "failing signature {f}")?;
        }
        writeln!(out, "FAIL rows={passed}/{total}")?;
        Ok(EXIT_FAILURE)
    }
}
