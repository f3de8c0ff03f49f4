//! `nehari`: solve, bound and verify the radial Kirchhoff problem from the
//! command line.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nehari_core::run::{self, is_config_error};
use nehari_core::suite::{run_suite, Faults, Status};
use nehari_core::{Error, GridScheme, Overrides, RadialFunction, RunConfig};

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "nehari",
    version,
    about = "Nehari-manifold ground states on the unit ball of R^4"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ground state of the full problem; writes report.json and minimizer.csv.
    Solve(Flags),
    /// Ground state of the auxiliary pure-power problem.
    Aux(Flags),
    /// Both ground states and the level inequalities.
    Bounds(Flags),
    /// Runs the verification suite; writes suite.json.
    Verify(Flags),
}

#[derive(Args, Debug, Clone)]
struct Flags {
    /// JSON config file; flags override its values.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// Fixed power coefficient; turns off auto-Cp.
    #[arg(long, conflicts_with = "auto_cp")]
    cp: Option<f64>,
    /// Derive Cp from the auxiliary problem.
    #[arg(long)]
    auto_cp: bool,
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    g0: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    /// Number of grid nodes.
    #[arg(long)]
    n: Option<usize>,
    /// spectral-even or uniform-fd.
    #[arg(long)]
    scheme: Option<GridScheme>,
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Test hook: deliberately break part of the verify suite.
    #[arg(long, value_enum, hide = true)]
    inject_fault: Vec<Fault>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Fault {
    LaplacianSign,
    WeakCp,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            beta: self.beta,
            q: self.q,
            p: self.p,
            cp: self.cp,
            auto_cp: self.auto_cp,
            alpha0: self.alpha0,
            delta: self.delta,
            g0: self.g0,
            a: self.a,
            n: self.n,
            scheme: self.scheme,
            starts: self.starts,
            max_iter: self.max_iter,
            tol: self.tol,
            seed: self.seed,
        }
    }

    fn resolve(&self) -> Result<RunConfig, Failure> {
        let base = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    Failure::config(format!("config: cannot read {}: {e}", path.display()))
                })?;
                RunConfig::from_json(&text)?
            }
            None => RunConfig::default(),
        };
        let cfg = base.with_overrides(&self.overrides())?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn faults(&self) -> Faults {
        Faults {
            flip_laplacian_sign: self.inject_fault.contains(&Fault::LaplacianSign),
            weaken_cp: self.inject_fault.contains(&Fault::WeakCp),
        }
    }
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: String) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message,
        }
    }

    fn numerical(message: String) -> Self {
        Failure {
            code: EXIT_NUMERICAL,
            message,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if is_config_error(&e) {
            Failure::config(format!("invalid configuration: {e}"))
        } else {
            Failure::numerical(format!("numerical failure: {e}"))
        }
    }
}

/// Report payload with the command name and a wall-clock timestamp.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    version: &'a str,
    timestamp: String,
    #[serde(flatten)]
    payload: &'a T,
}

fn write_json<T: Serialize>(
    dir: &Path,
    file: &str,
    command: &str,
    payload: &T,
) -> Result<(), Failure> {
    let env = Envelope {
        command,
        version: env!("CARGO_PKG_VERSION"),
        timestamp: chrono::Utc::now().to_rfc3339(),
        payload,
    };
    let text = serde_json::to_string_pretty(&env)
        .map_err(|e| Failure::numerical(format!("cannot serialize {file}: {e}")))?;
    write_file(dir, file, |w| writeln!(w, "{text}"))
}

fn write_profile(dir: &Path, u: &RadialFunction) -> Result<(), Failure> {
    let path = dir.join("minimizer.csv");
    let f = fs::File::create(&path).map_err(|e| io_failure(&path, e))?;
    u.write_csv(BufWriter::new(f))?;
    Ok(())
}

fn write_file(
    dir: &Path,
    file: &str,
    body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<(), Failure> {
    let path = dir.join(file);
    let f = fs::File::create(&path).map_err(|e| io_failure(&path, e))?;
    let mut w = BufWriter::new(f);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| io_failure(&path, e))
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::numerical(format!("cannot write {}: {e}", path.display()))
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::config(format!("out: cannot create {}: {e}", dir.display())))
}

fn not_converged(what: &str) -> Failure {
    Failure::numerical(format!(
        "{what} did not meet its convergence tests; see report.json"
    ))
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve(flags) => {
            let cfg = flags.resolve()?;
            prepare_out(&flags.out)?;
            let (report, u) = run::solve(&cfg)?;
            write_json(&flags.out, "report.json", "solve", &report)?;
            write_profile(&flags.out, &u)?;
            println!("m = {:e}", report.m);
            println!("|u*| = {:e}", report.ground_state.norm);
            println!("Cp = {:e} ({:?})", report.cp.cp, report.cp.mode);
            if !report.ok() {
                return Err(not_converged("ground state"));
            }
        }
        Command::Aux(flags) => {
            let cfg = flags.resolve()?;
            prepare_out(&flags.out)?;
            let (report, w) = run::aux(&cfg)?;
            write_json(&flags.out, "report.json", "aux", &report)?;
            write_profile(&flags.out, &w)?;
            println!("m_p = {:e}", report.aux.m_p);
            println!(
                "|w_p|_p^p = {:e} <= {:e}: {}",
                report.aux.p_norm_p, report.aux.p_norm_cap, report.aux.p_norm_ok
            );
            if !report.ok() {
                return Err(not_converged("auxiliary ground state"));
            }
        }
        Command::Bounds(flags) => {
            let cfg = flags.resolve()?;
            prepare_out(&flags.out)?;
            let (report, u) = run::bounds(&cfg)?;
            write_json(&flags.out, "report.json", "bounds", &report)?;
            write_profile(&flags.out, &u)?;
            println!("m_p = {:e}", report.aux.m_p);
            println!("m = {:e}", report.ground_state.energy);
            println!("Cp = {:e} ({:?})", report.cp.cp, report.cp.mode);
            println!("all level inequalities hold: {}", report.bounds.all_ok());
            if !report.ok() {
                return Err(Failure::numerical(
                    "a ground state failed to converge or a level inequality failed; see report.json"
                        .into(),
                ));
            }
        }
        Command::Verify(flags) => {
            let cfg = flags.resolve()?;
            prepare_out(&flags.out)?;
            let report = run_suite(&cfg, flags.faults())?;
            write_json(&flags.out, "suite.json", "verify", &report)?;
            for c in &report.checks {
                let tag = match c.status {
                    Status::Pass => "pass",
                    Status::Fail => "FAIL",
                    Status::Skip => "skip",
                };
                println!("{tag:4} {:45} margin {:e}", c.name, c.margin);
            }
            println!("overall: {}", if report.overall { "pass" } else { "FAIL" });
            if !report.overall {
                let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
                return Err(Failure::numerical(format!(
                    "verification failed: {}",
                    names.join(", ")
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
