//! `erw`: simulate elephant random walks with restricted memory, compute
//! their exact laws, evaluate limit theorems and test one against the other.

mod args;
mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use commands::{exact, predict, simulate, sweep, verify, Run};
use error::CliError;
use output::{manifest_id, read_manifest, sha256_hex, Sink};

#[derive(Parser, Debug)]
#[command(name = "erw", version, about = "Elephant random walks with restricted memory", args_conflicts_with_subcommands = true)]
struct Cli {
    /// Rerun the command recorded in a manifest and compare output digests
    #[arg(long, value_name = "MANIFEST")]
    replay: Option<PathBuf>,
    /// Output path for --replay (defaults to the recorded path)
    #[arg(long, value_name = "PATH", requires = "replay")]
    to: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Simulate an ensemble of paths
    Simulate(simulate::SimulateArgs),
    /// Exact law or moments of T_n
    Exact(exact::ExactArgs),
    /// Closed forms and limit laws from the catalog
    Predict(predict::PredictArgs),
    /// Simulate and test against the catalog limit law
    Verify(verify::VerifyArgs),
    /// Descriptive statistics over a parameter grid
    Sweep(sweep::SweepArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Exact(_) => "exact",
            Command::Predict(_) => "predict",
            Command::Verify(_) => "verify",
            Command::Sweep(_) => "sweep",
        }
    }

    fn args(&self) -> Value {
        let v = match self {
            Command::Simulate(a) => serde_json::to_value(a),
            Command::Exact(a) => serde_json::to_value(a),
            Command::Predict(a) => serde_json::to_value(a),
            Command::Verify(a) => serde_json::to_value(a),
            Command::Sweep(a) => serde_json::to_value(a),
        };
        let mut v = v.expect("arguments are plain data");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("out");
        }
        v
    }

    fn from_manifest(command: &str, args: Value) -> Result<Self, CliError> {
        let bad = |e: serde_json::Error| CliError::Usage(format!("--replay: bad `{command}` arguments: {e}"));
        Ok(match command {
            "simulate" => Command::Simulate(serde_json::from_value(args).map_err(bad)?),
            "exact" => Command::Exact(serde_json::from_value(args).map_err(bad)?),
            "predict" => Command::Predict(serde_json::from_value(args).map_err(bad)?),
            "verify" => Command::Verify(serde_json::from_value(args).map_err(bad)?),
            "sweep" => Command::Sweep(serde_json::from_value(args).map_err(bad)?),
            other => return Err(CliError::Usage(format!("--replay: unknown command `{other}`"))),
        })
    }

    fn out(&self) -> Option<PathBuf> {
        match self {
            Command::Simulate(a) => a.out.clone(),
            Command::Exact(a) => a.out.clone(),
            Command::Predict(a) => a.out.clone(),
            Command::Verify(a) => a.out.clone(),
            Command::Sweep(a) => a.out.clone(),
        }
    }

    fn run(&self, id: &str) -> Result<Run, CliError> {
        match self {
            Command::Simulate(a) => simulate::run(a, id),
            Command::Exact(a) => exact::run(a, id),
            Command::Predict(a) => predict::run(a, id),
            Command::Verify(a) => verify::run(a, id),
            Command::Sweep(a) => sweep::run(a, id),
        }
    }
}

fn execute(cmd: &Command, out: Option<PathBuf>) -> Result<(Run, Option<output::Manifest>), CliError> {
    let args = cmd.args();
    let id = manifest_id(cmd.name(), &args);
    let run = cmd.run(&id)?;
    let manifest = Sink { out }.emit(cmd.name(), &args, &run.payload)?;
    Ok((run, manifest))
}

fn replay(path: &PathBuf, to: Option<PathBuf>) -> Result<bool, CliError> {
    let recorded = read_manifest(path)?;
    let cmd = Command::from_manifest(&recorded.command, recorded.args.clone())?;
    let out = to.unwrap_or_else(|| recorded.output.clone());
    let (run, _) = execute(&cmd, Some(out.clone()))?;
    let digest = sha256_hex(&run.payload);
    let matches = recorded.digests.values().any(|d| *d == digest);
    if matches {
        eprintln!("replay of {}: output {} reproduces digest {digest}", path.display(), out.display());
    } else {
        eprintln!("replay of {}: output digest {digest} differs from the recorded {:?}", path.display(), recorded.digests);
    }
    Ok(matches && run.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match (&cli.replay, &cli.command) {
        (Some(path), _) => replay(path, cli.to.clone()),
        (None, Some(cmd)) => execute(cmd, cmd.out()).map(|(run, _)| run.pass),
        (None, None) => Err(CliError::Usage("a subcommand or --replay is required (see --help)".into())),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("erw: {e}");
            if let Some(h) = e.hint() {
                eprintln!("{h}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
