//! `virusgame` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use virusgame::equilibrium::{mixed_ne, mixer_nonmixer_ne, pure_ne, EquilibriumResult};
use virusgame::experiments::{self, trajectory_csv, ExperimentSpec};
use virusgame::format::fmt_sig9;
use virusgame::oracle::{empirical_infection_probability, mean_trajectory};
use virusgame::{
    infection_probability, integrate, risk_profile, Error, Integration, RunConfig, SystemParams,
    ThresholdDistribution,
};

#[derive(Debug, Parser)]
#[command(name = "virusgame", version, about = "Virus spread and antivirus update game")]
struct Cli {
    /// Print the default configuration as JSON and exit.
    #[arg(long)]
    dump_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the mean-field dynamics and write `trajectory.csv`.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        /// Number of protected nodes.
        #[arg(long, conflicts_with = "p")]
        k_protected: Option<f64>,
        /// Update probability; protects `p * n_nodes` nodes.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for an equilibrium and print it as one `key=value` line.
    Equilibrium {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, value_enum, default_value_t = Mode::Mixed)]
        mode: Mode,
        /// Committed updaters (mixer mode).
        #[arg(long, default_value_t = 0)]
        n_u: usize,
        /// Committed non-updaters (mixer mode).
        #[arg(long, default_value_t = 0)]
        n_nu: usize,
    },
    /// Run a builtin experiment (or `all`), or one described by a JSON file.
    Sweep {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare stochastic simulation against the mean-field prediction.
    Oracle {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value_t = 2000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated protected-node counts.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        k_protected: Vec<usize>,
        /// Also write the event log of the first replication.
        #[arg(long)]
        events: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, clap::Args)]
struct ConfigArg {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Print the parsed configuration as JSON and exit.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Pure,
    Mixed,
    Mixer,
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let stdout = std::io::stdout();
    let result = run(cli, &mut stdout.lock());
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_code(&result))
}

fn exit_code(result: &CliResult<()>) -> u8 {
    match result {
        Ok(()) => 0,
        Err(Failure::Core(e)) if e.is_numerical() => 2,
        Err(_) => 1,
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(msg) => f.write_str(msg),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    let Some(command) = cli.command else {
        if cli.dump_config {
            let cfg = RunConfig::from_parts(
                SystemParams::small_network(),
                ThresholdDistribution::default(),
                Integration::default(),
            );
            writeln!(out, "{}", cfg.to_json_pretty())?;
            return Ok(());
        }
        return Err(Failure::Usage(
            "no subcommand given; see `virusgame --help`".into(),
        ));
    };

    if let Some(arg) = command.config_arg() {
        if arg.dump_config || cli.dump_config {
            writeln!(out, "{}", RunConfig::load(&arg.config)?.to_json_pretty())?;
            return Ok(());
        }
    }

    match command {
        Command::Simulate {
            config,
            k_protected,
            p,
            out: dir,
        } => simulate(&config.config, k_protected, p, dir, out),
        Command::Equilibrium {
            config,
            mode,
            n_u,
            n_nu,
        } => equilibrium(&config.config, mode, n_u, n_nu, out),
        Command::Sweep { spec, out: dir } => sweep(&spec, &dir, out),
        Command::Oracle {
            config,
            reps,
            seed,
            k_protected,
            events,
            out: dir,
        } => oracle(&config.config, reps, seed, &k_protected, events, dir, out),
    }
}

impl Command {
    fn config_arg(&self) -> Option<&ConfigArg> {
        match self {
            Command::Simulate { config, .. }
            | Command::Equilibrium { config, .. }
            | Command::Oracle { config, .. } => Some(config),
            Command::Sweep { .. } => None,
        }
    }
}

fn output_dir(cfg: &RunConfig, out: Option<PathBuf>) -> CliResult<PathBuf> {
    out.or_else(|| cfg.output_dir.clone()).ok_or_else(|| {
        Failure::Usage("no output directory: pass --out or set output_dir in the config".into())
    })
}

fn write(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), fmt_sig9)
}

fn simulate(
    path: &Path,
    k: Option<f64>,
    p: Option<f64>,
    dir: Option<PathBuf>,
    out: &mut dyn Write,
) -> CliResult<()> {
    let cfg = RunConfig::load(path)?;
    let dir = output_dir(&cfg, dir)?;
    let params = cfg.params();
    let k = match (k, p) {
        (Some(k), _) => k,
        (None, Some(p)) => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Failure::Usage(format!("--p {p} outside [0, 1]")));
            }
            params.protected_from_probability(p)
        }
        (None, None) => 0.0,
    };
    let traj = integrate(&params, k, &cfg.threshold_dist, &cfg.integration())?;
    let risk = infection_probability(&traj, &params)?;
    write(&dir, "trajectory.csv", &trajectory_csv(&traj))?;
    let peak = traj.peak();
    writeln!(
        out,
        "k_protected={} peak_x={} peak_t={} t_f={} p_infect={} truncated={}",
        fmt_sig9(k),
        fmt_sig9(peak.x),
        fmt_sig9(peak.t),
        opt(traj.extinction_time),
        fmt_sig9(risk.p_infect),
        risk.truncated
    )?;
    Ok(())
}

fn equilibrium(
    path: &Path,
    mode: Mode,
    n_u: usize,
    n_nu: usize,
    out: &mut dyn Write,
) -> CliResult<()> {
    let cfg = RunConfig::load(path)?;
    let params = cfg.params();
    let table = risk_profile(&params, &cfg.threshold_dist, &cfg.integration())?;
    let result = match mode {
        Mode::Pure => pure_ne(&table, &params)?,
        Mode::Mixed => mixed_ne(&table, &params)?,
        Mode::Mixer => mixer_nonmixer_ne(n_u, n_nu, &table, &params)?,
    };
    writeln!(out, "{}", result_line(&result))?;
    Ok(())
}

fn result_line(r: &EquilibriumResult) -> String {
    match *r {
        EquilibriumResult::Pure { psi } => format!("psi={psi}"),
        EquilibriumResult::FullyMixed { p_star, residual } => {
            format!("p_star={} residual={}", fmt_sig9(p_star), fmt_sig9(residual))
        }
        EquilibriumResult::MixerProfile {
            n_u,
            n_nu,
            p_star,
            residual,
            stability_violated,
        } => format!(
            "p_star={} residual={} n_u={n_u} n_nu={n_nu} stability_violated={stability_violated}",
            fmt_sig9(p_star),
            fmt_sig9(residual)
        ),
        EquilibriumResult::NoInteriorEquilibrium { boundary } => format!(
            "p_star={} boundary={}",
            fmt_sig9(boundary.probability()),
            match boundary {
                virusgame::Boundary::NobodyUpdates => "nobody_updates",
                virusgame::Boundary::EveryoneUpdates => "everyone_updates",
            }
        ),
        EquilibriumResult::Rejected { reason } => match reason {
            virusgame::MixerRejection::TooManyUpdaters { n_u, psi } => {
                format!("rejected=too_many_updaters n_u={n_u} psi={psi}")
            }
            virusgame::MixerRejection::TooFewMixers { n_u, n_nu, n } => {
                format!("rejected=too_few_mixers n_u={n_u} n_nu={n_nu} n_nodes={n}")
            }
        },
    }
}

fn load_specs(spec: &str) -> CliResult<Vec<ExperimentSpec>> {
    if spec == "all" {
        return Ok(experiments::builtin_suite());
    }
    if let Some(s) = experiments::builtin(spec) {
        return Ok(vec![s]);
    }
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        return Ok(vec![ExperimentSpec::from_json(&text)?]);
    }
    let names: Vec<String> = experiments::builtin_suite()
        .into_iter()
        .map(|s| s.name)
        .collect();
    Err(Failure::Usage(format!(
        "`{spec}` is neither a builtin experiment ({}, all) nor a spec file",
        names.join(", ")
    )))
}

fn sweep(spec: &str, dir: &Path, out: &mut dyn Write) -> CliResult<()> {
    for s in load_specs(spec)? {
        let result = experiments::run(&s)?;
        for path in result.write_to(dir)? {
            writeln!(out, "wrote={}", path.display())?;
        }
    }
    Ok(())
}

fn oracle(
    path: &Path,
    reps: usize,
    seed: u64,
    ks: &[usize],
    events: bool,
    dir: Option<PathBuf>,
    out: &mut dyn Write,
) -> CliResult<()> {
    let cfg = RunConfig::load(path)?;
    let dir = output_dir(&cfg, dir)?;
    let params = cfg.params();
    let dist = &cfg.threshold_dist;
    let integration = cfg.integration();
    if ks.is_empty() {
        return Err(Failure::Usage("--k-protected needs at least one value".into()));
    }

    let mut table =
        String::from("k_protected,p_ode,p_empirical,std_error,replicate_std_error,z_score\n");
    for &k in ks {
        let traj = integrate(&params, k as f64, dist, &integration)?;
        let ode = infection_probability(&traj, &params)?;
        let emp = empirical_infection_probability(&params, dist, k, reps, seed, cfg.horizon)?;
        let z = if emp.std_error > 0.0 {
            (emp.estimate - ode.p_infect) / emp.std_error
        } else {
            0.0
        };
        let _ = writeln!(
            table,
            "{k},{},{},{},{},{}",
            fmt_sig9(ode.p_infect),
            fmt_sig9(emp.estimate),
            fmt_sig9(emp.std_error),
            fmt_sig9(emp.replicate_std_error),
            fmt_sig9(z)
        );
        writeln!(
            out,
            "k_protected={k} p_ode={} p_empirical={} std_error={} z_score={}",
            fmt_sig9(ode.p_infect),
            fmt_sig9(emp.estimate),
            fmt_sig9(emp.std_error),
            fmt_sig9(z)
        )?;
    }
    write(&dir, "oracle.csv", &table)?;

    // Mean trajectories on a grid of at most 2000 intervals.
    let k = ks[0];
    let grid = (cfg.horizon / 2000.0).max(cfg.dt);
    let stride = (grid / cfg.dt).round().max(1.0) as usize;
    let grid = stride as f64 * cfg.dt;
    let traj = integrate(&params, k as f64, dist, &integration)?;
    let mean = mean_trajectory(&params, dist, k, reps, seed, cfg.horizon, grid)?;
    let mut csv = String::from("t,x_ode,x_ctmc,s_ode,s_ctmc\n");
    for ((t, x, s), ode) in mean.iter().zip(traj.samples.iter().step_by(stride)) {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            fmt_sig9(*t),
            fmt_sig9(ode.x),
            fmt_sig9(*x),
            fmt_sig9(ode.s),
            fmt_sig9(*s)
        );
    }
    write(&dir, "oracle_trajectory.csv", &csv)?;

    if events {
        let run = virusgame::simulate_ctmc(&params, dist, k, seed, cfg.horizon)?;
        write(&dir, "events.csv", &run.events_csv())?;
    }
    Ok(())
}
