//! Command-line front end.
//!
//! Failures print a single line `error: kind=<kind> msg=<message>` on stderr
//! and exit with status 1 (2 for usage errors).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::channel::{
    Modulation, ScenarioConfig, DEFAULT_D0D, DEFAULT_ETA, DEFAULT_NOISE_SPLIT, DEFAULT_PATHLOSS_EXP,
};
use crate::error::{Error, Result};
use crate::montecarlo::{write_results, Axis, DetectorKind, RunOptions, SweepSpec};
use crate::presets::{
    fig2_grid, max_rel_err, preset, run_preset, run_sweeps, write_grid_csv, PresetKind, PresetRun,
    GRID_ORACLE_TOL, PRESET_NAMES,
};
use crate::transition::{
    dpsk_transition_approx, dpsk_transition_exact, fsk_transition, TransitionTable,
};

const DEFAULT_TRIALS: u64 = 1_000_000;
const DEFAULT_SEED: u64 = 1;

#[derive(Parser, Debug)]
#[command(name = "ncswipt", version, about = "Noncoherent SWIPT decode-and-forward relaying simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Max relative error of I_2 against the exact integral over the figure grid.
    ValidateSpecfun {
        /// Oracle quadrature tolerance.
        #[arg(long, default_value_t = GRID_ORACLE_TOL)]
        tol: f64,
        /// Also write the grid as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print or save a relay transition table.
    TransitionTable {
        /// dpsk (exact), dpsk-approx or fsk.
        #[arg(long = "mod")]
        modulation: String,
        #[arg(long)]
        gamma: f64,
        #[arg(long = "M")]
        m: usize,
        /// Quadrature tolerance for exact DPSK tables.
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SER versus transmitter SNR.
    SerSweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 40.0)]
        to: f64,
        #[arg(long, default_value_t = 2.0)]
        step: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// SER versus alpha, rho or M.
    ParamSweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// alpha, rho or M.
        #[arg(long)]
        axis: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        step: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a named preset.
    ReproduceFigure {
        name: String,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    /// Scenario file (`key = value` lines).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Take the scenarios of a sweep preset.
    #[arg(long)]
    preset: Option<String>,
    /// Comma-separated modulations to run (default: as configured).
    #[arg(long = "mod")]
    modulations: Option<String>,
    /// Comma-separated detectors: exact, approx, direct, relay, genie.
    #[arg(long, default_value = "exact,approx")]
    detectors: String,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Trials per sweep point.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    /// Worker threads (0: one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Quadrature tolerance of the exact detectors (oracle tolerance for fig2).
    #[arg(long)]
    tol: Option<f64>,
}

impl RunArgs {
    fn options(&self) -> RunOptions {
        let mut opts = RunOptions {
            workers: self.workers,
            ..RunOptions::default()
        };
        if let Some(tol) = self.tol {
            opts.exact_rel_tol = tol;
        }
        opts
    }
}

fn after_help() -> String {
    let mut s = String::from("Presets:\n");
    for name in PRESET_NAMES {
        let p = preset(name).expect("listed preset");
        s.push_str(&format!("  {name:<9} {}\n", p.summary));
    }
    s.push_str(&format!(
        "\nDefaults: eta = {DEFAULT_ETA}, pathloss_exp = {DEFAULT_PATHLOSS_EXP}, D0d = {DEFAULT_D0D} m, \
         noise_split = {DEFAULT_NOISE_SPLIT}, sigma0_sq = 1, seed = {DEFAULT_SEED}, \
         trials = {DEFAULT_TRIALS}, exact detector tol = {:e}\n",
        RunOptions::default().exact_rel_tol
    ));
    s
}

fn parse_list<T: std::str::FromStr<Err = Error>>(text: &str) -> Result<Vec<T>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse())
        .collect()
}

fn scenario_runs(args: &ScenarioArgs, axis: Axis, spec: SweepSpec) -> Result<Vec<PresetRun>> {
    let detectors: Vec<DetectorKind> = parse_list(&args.detectors)?;
    let base: Vec<ScenarioConfig> = match (&args.config, &args.preset) {
        (Some(path), _) => vec![ScenarioConfig::load(path)?],
        (None, Some(name)) => match preset(name)?.kind {
            PresetKind::Sweeps(runs) => {
                let mut seen: Vec<ScenarioConfig> = Vec::new();
                for r in runs {
                    let compatible = match axis {
                        Axis::Alpha => r.config.alpha.is_some(),
                        Axis::Rho => r.config.rho.is_some(),
                        _ => true,
                    };
                    if compatible && !seen.contains(&r.config) {
                        seen.push(r.config);
                    }
                }
                seen
            }
            PresetKind::SpecfunGrid => {
                return Err(Error::Config(format!("preset `{name}` has no scenario")))
            }
        },
        (None, None) => return Err(Error::Config("give --config or --preset".into())),
    };
    if base.is_empty() {
        return Err(Error::Config(format!("no scenario in the preset supports a {axis} sweep")));
    }
    let modulations: Option<Vec<Modulation>> = args.modulations.as_deref().map(parse_list).transpose()?;
    let mut runs = Vec::new();
    for config in base {
        let mods = modulations.clone().unwrap_or_else(|| vec![config.modulation]);
        for modulation in mods {
            let mut c = config.clone();
            c.modulation = modulation;
            let run = PresetRun {
                config: c,
                spec: spec.clone(),
                detectors: detectors.clone(),
            };
            if !runs.contains(&run) {
                runs.push(run);
            }
        }
    }
    Ok(runs)
}

fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let io = |source| Error::Io {
                path: path.clone(),
                source,
            };
            let mut buf = Vec::new();
            write(&mut buf)?;
            std::fs::write(path, buf).map_err(io)?;
            writeln!(stdout, "wrote {}", path.display()).map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })
        }
        None => write(stdout),
    }
}

fn stdout_err(source: std::io::Error) -> Error {
    Error::Io {
        path: "<stdout>".into(),
        source,
    }
}

fn transition(modulation: &str, gamma: f64, m: usize, tol: f64) -> Result<TransitionTable> {
    match modulation.to_ascii_lowercase().as_str() {
        "dpsk" | "dpsk-exact" => dpsk_transition_exact(gamma, m, tol),
        "dpsk-approx" => dpsk_transition_approx(gamma, m),
        "fsk" => fsk_transition(gamma, m),
        other => Err(Error::Config(format!(
            "unknown table kind `{other}` (expected dpsk, dpsk-approx or fsk)"
        ))),
    }
}

fn run_sweep_command(
    scenario: &ScenarioArgs,
    spec: SweepSpec,
    run: &RunArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<()> {
    let axis = spec.axis;
    let runs = scenario_runs(scenario, axis, spec)?;
    let result = run_sweeps(&runs, run.trials, run.seed, &run.options())?;
    for f in &result.failures {
        // Failed cells do not reach the CSV; report them on stderr.
        writeln!(
            stderr,
            "warning: point {}={} detector={} failed: {}",
            axis, f.axis_value, f.detector, f.message
        )
        .map_err(stdout_err)?;
    }
    emit(&run.out, stdout, |w| write_results(&result, w))
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::ValidateSpecfun { tol, out } => {
            let rows = fig2_grid(tol)?;
            let worst = max_rel_err(&rows).expect("non-empty grid");
            if let Some(path) = &out {
                let mut buf = Vec::new();
                write_grid_csv(&rows, &mut buf)?;
                std::fs::write(path, buf).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
            }
            writeln!(
                stdout,
                "points={} max_rel_err={:e} at eps_db={} beta_db={}",
                rows.len(),
                worst.rel_err,
                worst.eps_db,
                worst.beta_db
            )
            .map_err(stdout_err)
        }
        Command::TransitionTable {
            modulation,
            gamma,
            m,
            tol,
            out,
        } => {
            let table = transition(&modulation, gamma, m, tol)?;
            emit(&out, stdout, |w| table.write_csv(w))
        }
        Command::SerSweep {
            scenario,
            from,
            to,
            step,
            run,
        } => {
            let spec = SweepSpec::range(Axis::SnrDb, from, to, step)?;
            run_sweep_command(&scenario, spec, &run, stdout, stderr)
        }
        Command::ParamSweep {
            scenario,
            axis,
            from,
            to,
            step,
            run,
        } => {
            let axis: Axis = axis.parse()?;
            if axis == Axis::SnrDb {
                return Err(Error::Config("use ser-sweep for SNR sweeps".into()));
            }
            let spec = SweepSpec::range(axis, from, to, step)?;
            run_sweep_command(&scenario, spec, &run, stdout, stderr)
        }
        Command::ReproduceFigure { name, run } => {
            let output = run_preset(&name, run.trials, run.seed, &run.options(), run.tol)?;
            if let crate::presets::PresetOutput::Sweep(r) = &output {
                for f in &r.failures {
                    writeln!(
                        stderr,
                        "warning: point {} detector={} failed: {}",
                        f.axis_value, f.detector, f.message
                    )
                    .map_err(stdout_err)?;
                }
            }
            emit(&run.out, stdout, |w| output.write_csv(w))
        }
    }
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Run the CLI with explicit output streams; returns the exit status.
pub fn run_with_io<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let command = Cli::command().after_help(after_help());
    let matches = match command.try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(stderr, "{}", e.render());
                    2
                }
                _ => {
                    let msg = e.render().to_string();
                    let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
                    let _ = writeln!(stderr, "error: kind=usage msg={}", one_line(first));
                    2
                }
            };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: kind=usage msg={}", one_line(&e.to_string()));
            return 2;
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: kind={} msg={}", e.kind(), one_line(&e.to_string()));
            1
        }
    }
}

/// Run the CLI on process stdio.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(args, &mut stdout.lock(), &mut stderr.lock())
}

