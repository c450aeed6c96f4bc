use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use socialcause::experiment::{rank_influence_file, DoseSpec, ExperimentConfig, FigureName, Overrides, Runner, Task};
use socialcause::Error;

/// Causal influence analysis for social learning networks.
#[derive(Parser)]
#[command(name = "socialcause", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate belief trajectories.
    Simulate(Common),
    /// Compute the all-pairs influence matrix.
    Influence {
        #[command(flatten)]
        common: Common,
        /// `uniform` or a comma-separated belief vector.
        #[arg(long)]
        dose: Option<String>,
    },
    /// Rank agents by CausalRank, AIR and centrality.
    Rank {
        #[command(flatten)]
        common: OptionalConfig,
        /// Rank a stored influence CSV instead of computing one.
        #[arg(long)]
        influence: Option<PathBuf>,
    },
    /// Estimate informativeness and influence from a shared-belief trace.
    Estimate(Common),
    /// Write the data behind one figure.
    Figure {
        /// influence-heatmap, ranking-comparison, delta-hops, gcl-error or corr-vs-cause.
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Load and check a config without running anything.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
        /// Also check requirements of this task (defaults to the config's task).
        #[arg(long)]
        task: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    overrides: OverrideArgs,
}

#[derive(Args)]
struct OptionalConfig {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: OverrideArgs,
}

#[derive(Args)]
struct OverrideArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

impl OverrideArgs {
    fn to_overrides(&self, dose: Option<DoseSpec>) -> Overrides {
        Overrides {
            seed: self.seed,
            replicas: self.replicas,
            out: self.out.clone(),
            threads: self.threads,
            dose,
        }
    }
}

fn run_with(config: &Path, overrides: Overrides, task: Task) -> Result<serde_json::Value, Error> {
    let mut runner = Runner::from_file(config)?;
    runner.apply(&overrides);
    let report = runner.run(task)?;
    Ok(serde_json::to_value(report)?)
}

fn dispatch(cli: Cli) -> Result<serde_json::Value, Error> {
    match cli.command {
        Command::Simulate(c) => run_with(&c.config, c.overrides.to_overrides(None), Task::Simulate),
        Command::Estimate(c) => run_with(&c.config, c.overrides.to_overrides(None), Task::Estimate),
        Command::Influence { common, dose } => {
            let dose = dose.as_deref().map(str::parse::<DoseSpec>).transpose()?;
            run_with(&common.config, common.overrides.to_overrides(dose), Task::Influence)
        }
        Command::Rank { common, influence } => match (influence, common.config) {
            (Some(path), _) => {
                let out = common.overrides.out.unwrap_or_else(|| PathBuf::from("out"));
                Ok(serde_json::to_value(rank_influence_file(&path, &out)?)?)
            }
            (None, Some(config)) => run_with(&config, common.overrides.to_overrides(None), Task::Rank),
            (None, None) => Err(Error::Config("rank needs --config or --influence".into())),
        },
        Command::Figure { name, common } => {
            let name: FigureName = name.parse()?;
            run_with(&common.config, common.overrides.to_overrides(None), Task::Figure(name))
        }
        Command::ValidateConfig { config, task } => {
            let cfg = ExperimentConfig::load(&config)?;
            let task = task.as_deref().map(str::parse::<Task>).transpose()?;
            let scenario = cfg.validate(task)?;
            let task = task.or(cfg.task()?);
            Ok(json!({
                "valid": true,
                "agents": scenario.agents(),
                "hypotheses": scenario.world.hypotheses(),
                "task": task.map(|t| t.to_string()),
            }))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            eprintln!("{}", json!({ "error": "usage", "message": message.trim() }));
            return ExitCode::from(2);
        }
    };
    match dispatch(cli) {
        Ok(value) => {
            let text = serde_json::to_string_pretty(&value).expect("report serializes");
            // A closed downstream pipe is not an error of the run.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(1)
        }
    }
}
