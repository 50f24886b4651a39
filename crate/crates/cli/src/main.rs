use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use persistgraph_core::scenario::{
    self, load_report, load_scenario, run_checks, save_scenario, RunOptions, RunReport, Scenario,
    ScenarioError,
};
use persistgraph_core::weights::{persistent_graph, TimeMode};

/// Consensus over time-varying networks: classify arcs, check
/// assumptions, simulate and verify certificates.
#[derive(Debug, Parser)]
#[command(name = "persistgraph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Persistent/vanishing split of a scenario's network.
    Classify {
        scenario: PathBuf,
        #[command(flatten)]
        mode: ModeArg,
    },
    /// Assumption checks only.
    Check {
        scenario: PathBuf,
        #[command(flatten)]
        mode: ModeArg,
    },
    /// Full run: checks, simulation, certificates.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        mode: ModeArg,
    },
    /// Built-in scenarios.
    Catalog {
        /// List names and descriptions.
        #[arg(long)]
        list: bool,
        /// Run every built-in scenario.
        #[arg(long, conflicts_with = "run")]
        run_all: bool,
        /// Run one built-in scenario by name.
        #[arg(long, value_name = "NAME")]
        run: Option<String>,
        /// Write each built-in scenario as a TOML file into DIR.
        #[arg(long, value_name = "DIR")]
        write: Option<PathBuf>,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Re-render a saved JSON report as text.
    Report { report: PathBuf },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Directory for trajectory CSVs and reports.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Seed for random initial beliefs.
    #[arg(long)]
    seed: Option<u64>,
    /// Write every N-th sample to the CSV.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    stride: Option<u64>,
}

impl RunArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            out_dir: self.out_dir.clone(),
            stride: self.stride,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
struct ModeArg {
    /// Assert the scenario's time mode; a contradicting value is refused.
    #[arg(long, value_name = "MODE", value_parser = parse_mode)]
    mode_override: Option<TimeMode>,
}

fn parse_mode(s: &str) -> Result<TimeMode, String> {
    match s {
        "discrete" => Ok(TimeMode::Discrete),
        "continuous" => Ok(TimeMode::Continuous),
        other => Err(format!("unknown mode `{other}` (expected discrete or continuous)")),
    }
}

/// Exit status: 0 when everything passes, 1 on any failed verdict or
/// run error, 2 on configuration errors.
enum Failure {
    Verdict,
    Config(String),
    Run(String),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        if e.is_configuration() {
            Failure::Config(e.to_string())
        } else {
            Failure::Run(e.to_string())
        }
    }
}

fn load(path: &Path, mode: &ModeArg) -> Result<Scenario, Failure> {
    let s = load_scenario(path)?;
    if let Some(m) = mode.mode_override {
        if m != s.mode {
            return Err(Failure::Config(format!(
                "--mode-override {m} contradicts the {} scenario {}",
                s.mode, s.name
            )));
        }
    }
    Ok(s)
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))
}

fn classify(s: &Scenario) -> Result<(), Failure> {
    let net = s.network()?;
    let report = persistent_graph(&net).map_err(ScenarioError::from)?;
    println!("scenario: {} ({} mode, {} nodes)", s.name, s.mode, s.nodes);
    for (a, w) in net.graph().arcs().iter().zip(net.weights()) {
        let class = if report.is_persistent(*a) {
            "persistent"
        } else {
            "vanishing"
        };
        println!("  {a} {:<18} {class}", w.family_name());
    }
    let g = &report.persistent_graph;
    let centers: Vec<String> = g.centers().iter().map(|c| c.to_string()).collect();
    println!(
        "persistent graph: {}quasi-strongly connected; centers: {}; diameter {}",
        if g.is_quasi_strongly_connected() { "" } else { "not " },
        if centers.is_empty() { "none".into() } else { centers.join(" ") },
        g.diameter()
    );
    Ok(())
}

fn check(s: &Scenario) -> Result<(), Failure> {
    let (_, outcomes) = run_checks(s)?;
    let mut ok = true;
    for o in &outcomes {
        ok &= o.ok;
        println!(
            "[{}] {} verdict={:?} expected={:?} worst={}",
            if o.ok { "ok" } else { "FAIL" },
            o.name,
            o.verdict,
            o.expected,
            o.worst
        );
        if let Some(w) = &o.witness {
            println!("      witness: {w}");
        }
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn finish(report: &RunReport, out_dir: Option<&Path>) -> Result<bool, Failure> {
    if let Some(dir) = out_dir {
        report.write(dir)?;
    }
    print!("{}", report.render_text());
    Ok(report.passed())
}

fn run(s: &Scenario, args: &RunArgs) -> Result<(), Failure> {
    if let Some(dir) = &args.out_dir {
        ensure_dir(dir)?;
    }
    let report = scenario::run_scenario(s, &args.options())?;
    if finish(&report, args.out_dir.as_deref())? {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn run_all(args: &RunArgs) -> Result<(), Failure> {
    if let Some(dir) = &args.out_dir {
        ensure_dir(dir)?;
    }
    let entries = scenario::catalog();
    let opts = args.options();
    // scenarios run in parallel; each writes only its own files
    let results: Vec<Result<RunReport, ScenarioError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = entries
            .iter()
            .map(|s| scope.spawn(|| scenario::run_scenario(s, &opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    });
    let mut all_ok = true;
    let mut error = None;
    for (s, r) in entries.iter().zip(results) {
        match r {
            Ok(report) => all_ok &= finish(&report, args.out_dir.as_deref())?,
            Err(e) => {
                eprintln!("error: {}: {e}", s.name);
                error.get_or_insert(Failure::from(e));
            }
        }
        println!();
    }
    match error {
        Some(e) => Err(e),
        None if all_ok => Ok(()),
        None => Err(Failure::Verdict),
    }
}

fn catalog(
    list: bool,
    all: bool,
    one: Option<&str>,
    write: Option<&Path>,
    args: &RunArgs,
) -> Result<(), Failure> {
    let entries = scenario::catalog();
    if let Some(dir) = write {
        ensure_dir(dir)?;
        for s in &entries {
            let path = dir.join(format!("{}.toml", s.name));
            save_scenario(s, &path)?;
            println!("wrote {}", path.display());
        }
    }
    if list || (!all && one.is_none() && write.is_none()) {
        for s in &entries {
            println!("{:<4} {:<10} {}", s.name, s.mode.to_string(), s.description);
        }
    }
    if let Some(name) = one {
        let s = scenario::find(name)
            .ok_or_else(|| Failure::Config(format!("no built-in scenario named `{name}`")))?;
        return run(&s, args);
    }
    if all {
        return run_all(args);
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Classify { scenario, mode } => classify(&load(&scenario, &mode)?),
        Command::Check { scenario, mode } => check(&load(&scenario, &mode)?),
        Command::Run {
            scenario,
            run: args,
            mode,
        } => run(&load(&scenario, &mode)?, &args),
        Command::Catalog {
            list,
            run_all,
            run,
            write,
            args,
        } => catalog(list, run_all, run.as_deref(), write.as_deref(), &args),
        Command::Report { report } => {
            print!("{}", load_report(&report)?.render_text());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => ExitCode::from(1),
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
