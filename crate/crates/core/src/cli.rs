// SPDX-License-Identifier: Apache-2.0

//! Command-line front end. Exit codes: 0 success, 1 invalid input, 2 I/O
//! failure, 3 guard or limit violation.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bundled;
use crate::dse::{
    amdahl_analysis, budget_check, compression_sweep, evaluate, placement_sweep, scaling_projection, DseError,
    ScalingTable, SweepOptions, DEFAULT_DIVISORS, DEFAULT_RATIOS, DEFAULT_THRESHOLDS,
};
use crate::power::PowerError;
use crate::report::{self, RunManifest};
use crate::scenario::{parse_scenario, LoadOptions, PlacementPreset, Scenario, ScenarioError};
use crate::sim::{SimError, SimOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wearsim", version, about = "Full-system power simulator for always-on wearable devices")]
pub struct Cli {
    /// Directory for generated files.
    #[arg(long, global = true, env = "WEARSIM_OUT", default_value = "wearsim-out")]
    pub out_dir: PathBuf,
    /// Override the scenario's simulated duration in seconds.
    #[arg(long, global = true)]
    pub duration_s: Option<f64>,
    /// Worker threads for sweeps; 0 uses every logical processor.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Fail when a memory device is over-committed.
    #[arg(long, global = true)]
    pub strict_memory: bool,
    /// Accept unknown keys in scenario files.
    #[arg(long, global = true)]
    pub lenient: bool,
    /// Write a state-interval trace of the simulation to this CSV file.
    #[arg(long, global = true)]
    pub trace: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum PlacementArg {
    FullOffload,
    FullOnDevice,
    /// The placement declared in the scenario file.
    Explicit,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario file.
    Validate { scenario: PathBuf },
    /// Simulate one configuration and write the power report.
    Simulate {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "explicit")]
        placement: PlacementArg,
    },
    /// Run a design-space sweep.
    #[command(subcommand)]
    Sweep(SweepKind),
    /// Project the power report under technology scaling.
    Project {
        scenario: PathBuf,
        /// Scaling table file; the bundled placeholder table when omitted.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        horizon: u32,
    },
    /// Cumulative component power distribution and the improvement bound.
    Amdahl {
        /// A scenario file or a report.csv produced by `simulate`.
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<f64>>,
        /// Components treated as improvable, instead of the default set.
        #[arg(long, value_delimiter = ',')]
        improvable: Option<Vec<String>>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SweepKind {
    /// Every on/off-device combination of the selected primitives.
    Placement {
        scenario: PathBuf,
        /// Free primitives to sweep; all free primitives when omitted.
        #[arg(long, value_delimiter = ',')]
        primitives: Option<Vec<String>>,
    },
    /// Full-offload power over link compression ratios and rate divisors.
    Compression {
        scenario: PathBuf,
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        divisors: Option<Vec<u32>>,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn invalid(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INVALID, message: message.into() }
    }

    fn io(message: impl Into<String>) -> Self {
        CliError { code: EXIT_IO, message: message.into() }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Io { .. } => CliError::io(e.to_string()),
            _ => CliError::invalid(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::invalid(e.to_string())
    }
}

impl From<PowerError> for CliError {
    fn from(e: PowerError) -> Self {
        CliError::invalid(e.to_string())
    }
}

impl From<DseError> for CliError {
    fn from(e: DseError) -> Self {
        let code = if matches!(e, DseError::Guard(_)) { EXIT_GUARD } else { EXIT_INVALID };
        CliError { code, message: e.to_string() }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let recorded: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, recorded, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

struct Input {
    label: String,
    text: String,
}

/// Reads `path`, falling back to a bundled file of the same name.
fn read_input(path: &Path) -> Result<Input, CliError> {
    match std::fs::read_to_string(path) {
        Ok(text) => Ok(Input { label: path.display().to_string(), text }),
        Err(e) => {
            let bundled = (!path.exists())
                .then(|| path.file_name().and_then(|n| n.to_str()).and_then(bundled::lookup))
                .flatten();
            match bundled {
                Some(text) => Ok(Input { label: format!("bundled:{}", path.display()), text: text.to_string() }),
                None => Err(CliError::io(format!("cannot read {}: {e}", path.display()))),
            }
        }
    }
}

fn load(cli: &Cli, path: &Path) -> Result<(Input, Scenario), CliError> {
    let input = read_input(path)?;
    let mut scenario = parse_scenario(&input.text, LoadOptions { lenient: cli.lenient })?;
    if let Some(d) = cli.duration_s {
        if !(d > 0.0 && d.is_finite()) {
            return Err(CliError::invalid(format!("--duration-s must be > 0, got {d}")));
        }
        scenario.duration_s = d;
    }
    Ok((input, scenario))
}

struct Outputs<'a> {
    dir: &'a Path,
    manifest: RunManifest,
}

impl<'a> Outputs<'a> {
    fn new(dir: &'a Path, command: &str, args: Vec<String>) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Outputs { dir, manifest: RunManifest::new(command, args) })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, content).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
        self.manifest.add_output(name, content.as_bytes());
        Ok(())
    }

    fn finish(self, out: &mut dyn Write) -> Result<(), CliError> {
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, self.manifest.to_json())
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
        let _ = writeln!(out, "wrote {} files to {}", self.manifest.outputs.len() + 1, self.dir.display());
        Ok(())
    }
}

fn sim_options(cli: &Cli) -> SimOptions {
    SimOptions { strict_memory: cli.strict_memory, record_intervals: cli.trace.is_some() }
}

fn sweep_options(cli: &Cli) -> SweepOptions {
    SweepOptions { jobs: cli.jobs, sim: SimOptions { strict_memory: cli.strict_memory, record_intervals: false } }
}

fn execute(cli: &Cli, args: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Validate { scenario } => {
            let (input, s) = load(cli, scenario)?;
            let _ = writeln!(
                out,
                "{}: ok ({} devices, {} rails, {} sensors, {} primitives)",
                input.label,
                s.devices.len(),
                s.rails.len(),
                s.sensors.len(),
                s.primitives.len()
            );
            Ok(())
        }
        Command::Simulate { scenario, placement } => {
            let (input, s) = load(cli, scenario)?;
            let s = match placement {
                PlacementArg::FullOffload => s.with_placement(&PlacementPreset::FullOffload),
                PlacementArg::FullOnDevice => s.with_placement(&PlacementPreset::FullOnDevice),
                PlacementArg::Explicit => s,
            };
            let eval = evaluate(&s, sim_options(cli))?;
            for w in &eval.trace.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            let budget = budget_check(&eval.report, &s);
            let label = format!("{} ({})", input.label, placement_name(*placement));
            let md = report::report_md(&label, &eval.report, &budget);
            let mut o = Outputs::new(&cli.out_dir, "simulate", args)?;
            o.manifest.add_input(&input.label, input.text.as_bytes());
            o.write("report.csv", &report::report_csv(&eval.report))?;
            o.write("report.md", &md)?;
            o.write("composition.svg", &report::composition_svg(&[(placement_name(*placement), &eval.report)]))?;
            if let Some(path) = &cli.trace {
                let text = report::trace_csv(&eval.trace);
                std::fs::write(path, &text)
                    .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
                o.manifest.add_output(&path.display().to_string(), text.as_bytes());
            }
            let _ = write!(out, "{md}");
            o.finish(out)
        }
        Command::Sweep(SweepKind::Placement { scenario, primitives }) => {
            let (input, s) = load(cli, scenario)?;
            let subset = match primitives {
                Some(p) => p.clone(),
                None => s.primitives.iter().filter(|p| p.is_free()).map(|p| p.id.clone()).collect(),
            };
            let sweep = placement_sweep(&s, &subset, sweep_options(cli))?;
            let mut o = Outputs::new(&cli.out_dir, "sweep placement", args)?;
            o.manifest.add_input(&input.label, input.text.as_bytes());
            o.write("sweep_placement.csv", &report::placement_csv(&sweep))?;
            o.write("sweep_placement.svg", &report::placement_svg(&sweep))?;
            for row in &sweep.rows {
                let _ = writeln!(out, "{:<32} {:>10.2} mW {:>+8.2}%", row.label, row.total_mw, row.delta_percent);
            }
            o.finish(out)
        }
        Command::Sweep(SweepKind::Compression { scenario, ratios, divisors }) => {
            let (input, s) = load(cli, scenario)?;
            let ratios = ratios.clone().unwrap_or_else(|| DEFAULT_RATIOS.to_vec());
            let divisors = divisors.clone().unwrap_or_else(|| DEFAULT_DIVISORS.to_vec());
            let grid = compression_sweep(&s, &ratios, &divisors, sweep_options(cli))?;
            let mut o = Outputs::new(&cli.out_dir, "sweep compression", args)?;
            o.manifest.add_input(&input.label, input.text.as_bytes());
            o.write("sweep_compression.csv", &report::compression_csv(&grid))?;
            o.write("sweep_compression.svg", &report::compression_svg(&grid))?;
            let _ = writeln!(
                out,
                "{} grid points; link floor {:.2} mW on {}",
                grid.rows.len(),
                grid.floor_mw,
                grid.floor_profile
            );
            o.finish(out)
        }
        Command::Project { scenario, table, horizon } => {
            let (input, s) = load(cli, scenario)?;
            let (table_label, table_text) = match table {
                Some(p) => {
                    let t = read_input(p)?;
                    (t.label, t.text)
                }
                None => ("bundled:default_scaling.toml".to_string(), bundled::DEFAULT_SCALING.to_string()),
            };
            let table = ScalingTable::parse(&table_text)?;
            let eval = evaluate(&s, sim_options(cli))?;
            let years = scaling_projection(&eval.report, &s, &table, *horizon)?;
            let mut o = Outputs::new(&cli.out_dir, "project", args)?;
            o.manifest.add_input(&input.label, input.text.as_bytes());
            o.manifest.add_input(&table_label, table_text.as_bytes());
            o.write("scaling.csv", &report::scaling_csv(&years))?;
            o.write("scaling.svg", &report::scaling_svg(&years))?;
            for y in &years {
                let _ = writeln!(
                    out,
                    "year {:>2} node {:>2}: {:>10.2} mW, analog share {:.2}%",
                    y.year,
                    y.node,
                    y.total_mw,
                    100.0 * y.type_share(crate::dse::PowerType::Analog)
                );
            }
            o.finish(out)
        }
        Command::Amdahl { input, thresholds, improvable } => {
            let src = read_input(input)?;
            let is_csv = input.extension().is_some_and(|e| e == "csv");
            let rep = if is_csv {
                report::parse_report_csv(&src.text).map_err(|e| CliError::invalid(e.to_string()))?
            } else {
                let (_, s) = load(cli, input)?;
                evaluate(&s, sim_options(cli))?.report
            };
            let thresholds = thresholds.clone().unwrap_or_else(|| DEFAULT_THRESHOLDS.to_vec());
            let table = amdahl_analysis(&rep, &thresholds, improvable.as_deref())?;
            let mut o = Outputs::new(&cli.out_dir, "amdahl", args)?;
            o.manifest.add_input(&src.label, src.text.as_bytes());
            let csv = report::amdahl_csv(&table);
            o.write("amdahl.csv", &csv)?;
            let _ = write!(out, "{csv}");
            let bound = if table.bound.is_infinite() { "inf".to_string() } else { format!("{:.2}", table.bound) };
            let _ = writeln!(
                out,
                "bound: {bound}x ({} improvable components, {:.2}% of total)",
                table.improvable.len(),
                100.0 * table.improvable_fraction
            );
            o.finish(out)
        }
    }
}

fn placement_name(p: PlacementArg) -> &'static str {
    match p {
        PlacementArg::FullOffload => "full_offload",
        PlacementArg::FullOnDevice => "full_on_device",
        PlacementArg::Explicit => "explicit",
    }
}
