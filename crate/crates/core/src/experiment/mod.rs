//! Config-driven experiment runner behind the command-line tool.
//!
//! Every task writes numeric results as CSV/JSON into an output directory and
//! finishes with `report.json`, which carries provenance and timing. Numeric
//! files depend only on the config and seed.

pub mod config;
pub mod figures;
pub mod montecarlo;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::causal::{dose_independent_matrix, CausalModel, Dose, InfluenceMatrix};
use crate::dynamics::{run, RunSpec};
use crate::error::{Error, Result};
use crate::gcl::{estimate_causal_effects, estimate_with_combination, GclSettings};
use crate::linalg::Matrix;
use crate::network::fmt_sig;
use crate::ranking::RankingResult;
use crate::world::ObservationSource;

pub use config::{DoseSpec, ExperimentConfig, FigureName, Task};
use montecarlo::{run_replicas, summarize, with_threads};

/// Command-line values that take precedence over the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replicas: Option<usize>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub dose: Option<DoseSpec>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub task: String,
    pub config_path: Option<String>,
    pub config_sha256: Option<String>,
    pub seed: Option<u64>,
    pub replicas: usize,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub provenance: Provenance,
    /// Output files, relative to the output directory.
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
    pub summary: serde_json::Value,
    pub elapsed_seconds: f64,
}

/// A loaded config plus its hash and command-line overrides.
pub struct Runner {
    config: ExperimentConfig,
    config_path: Option<PathBuf>,
    config_sha256: Option<String>,
}

impl Runner {
    pub fn from_file(path: &Path) -> Result<Self> {
        let bytes =
            fs::read(path).map_err(|e| Error::Config(format!("{}: cannot read config: {e}", path.display())))?;
        let config = ExperimentConfig::load(path)?;
        Ok(Runner {
            config,
            config_path: Some(path.to_path_buf()),
            config_sha256: Some(sha256_hex(&bytes)),
        })
    }

    pub fn from_config(config: ExperimentConfig) -> Self {
        Runner {
            config,
            config_path: None,
            config_sha256: None,
        }
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.config.seed = Some(s);
        }
        if let Some(r) = o.replicas {
            self.config.replicas = r;
        }
        if let Some(p) = &o.out {
            self.config.out = Some(p.clone());
        }
        if let Some(t) = o.threads {
            self.config.threads = Some(t);
        }
        if let Some(d) = &o.dose {
            self.config.influence.dose = d.clone();
        }
    }

    /// Output directory: the override or config value, else `./out`.
    /// Relative paths are taken from the working directory.
    pub fn out_dir(&self) -> PathBuf {
        self.config.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Validates the config for `task`, runs it and writes `report.json`.
    pub fn run(&self, task: Task) -> Result<ExperimentReport> {
        self.config.validate(Some(task))?;
        let out = self.out_dir();
        fs::create_dir_all(&out)?;
        let started = Instant::now();
        let mut ctx = TaskOutput::new(&out);
        with_threads(self.config.threads, || self.dispatch(task, &mut ctx))??;
        let report = ExperimentReport {
            provenance: Provenance {
                task: task.to_string(),
                config_path: self.config_path.as_ref().map(|p| p.display().to_string()),
                config_sha256: self.config_sha256.clone(),
                seed: self.config.seed,
                replicas: self.config.replicas,
                version: env!("CARGO_PKG_VERSION"),
            },
            outputs: ctx.files,
            notes: ctx.notes,
            summary: ctx.summary,
            elapsed_seconds: started.elapsed().as_secs_f64(),
        };
        write_json(&out.join("report.json"), &report)?;
        Ok(report)
    }

    fn dispatch(&self, task: Task, ctx: &mut TaskOutput) -> Result<()> {
        match task {
            Task::Simulate => self.simulate(ctx),
            Task::Influence => self.influence(ctx),
            Task::Rank => self.rank(ctx),
            Task::Estimate => self.estimate(ctx),
            Task::Figure(name) => self.figure(name, ctx),
        }
    }

    fn simulate(&self, ctx: &mut TaskOutput) -> Result<()> {
        let cfg = &self.config;
        let scenario = cfg.scenario()?;
        let params = cfg.params()?;
        let intervention = cfg.intervention(scenario.world.hypotheses())?;
        let steps = cfg.run.steps;
        let mut replicas = cfg.replicas;
        if cfg.run.noiseless && replicas > 1 {
            ctx.notes
                .push("noiseless runs are deterministic; a single replica was run".into());
            replicas = 1;
        }
        let seed = cfg.seed.unwrap_or(0);
        let save = cfg.run.save_traces;
        let finals = run_replicas(replicas, |r| {
            let spec = RunSpec {
                steps,
                source: if cfg.run.noiseless {
                    ObservationSource::Mean
                } else {
                    ObservationSource::Sampled { seed, replica: r }
                },
                initial: None,
            };
            let trace = run(
                &scenario.world,
                &scenario.combination,
                params,
                &spec,
                intervention.as_ref(),
            )?;
            Ok((trace.lambda[steps].clone(), save.then_some(trace)))
        })?;
        if save {
            for (r, (_, trace)) in finals.iter().enumerate() {
                let name = format!("replica_{r:03}");
                trace.as_ref().expect("saved").write_dir(&ctx.dir.join(&name))?;
                ctx.files.push(format!("{name}/"));
            }
        }
        let (k, h) = finals[0].0.shape();
        ctx.write("final_log_ratios.csv", |w| {
            writeln!(w, "replica,agent,hypothesis,value")?;
            for (r, (lam, _)) in finals.iter().enumerate() {
                for a in 0..k {
                    for j in 0..h {
                        writeln!(w, "{r},{},{},{}", a + 1, j + 1, fmt_sig(lam[(a, j)]))?;
                    }
                }
            }
            Ok(())
        })?;
        ctx.write("summary.csv", |w| {
            writeln!(w, "agent,hypothesis,mean,std,stderr,mean_rate")?;
            for a in 0..k {
                for j in 0..h {
                    let vals: Vec<f64> = finals.iter().map(|(l, _)| l[(a, j)]).collect();
                    let s = summarize(&vals);
                    writeln!(
                        w,
                        "{},{},{},{},{},{}",
                        a + 1,
                        j + 1,
                        fmt_sig(s.mean),
                        fmt_sig(s.std),
                        fmt_sig(s.stderr),
                        fmt_sig(s.mean / steps as f64)
                    )?;
                }
            }
            Ok(())
        })?;
        ctx.summary = json!({ "steps": steps, "replicas": replicas, "params": params });
        Ok(())
    }

    fn influence_matrix(&self) -> Result<InfluenceMatrix> {
        let scenario = self.config.scenario()?;
        let info = scenario.world.informativeness();
        let model = CausalModel::new(&scenario.combination, &info, self.config.params()?)?;
        match self.config.influence.dose.to_dose()? {
            Dose::Uniform => dose_independent_matrix(&model),
            dose => InfluenceMatrix::compute(&model, &dose),
        }
    }

    fn influence(&self, ctx: &mut TaskOutput) -> Result<()> {
        let c = self.influence_matrix()?;
        ctx.write("influence.csv", |w| c.write_csv(w))?;
        ctx.write("influence.json", |w| c.write_json(w))?;
        ctx.summary = json!({ "dose": c.dose, "params": c.params });
        Ok(())
    }

    fn rank(&self, ctx: &mut TaskOutput) -> Result<()> {
        let scenario = self.config.scenario()?;
        let c = self.influence_matrix()?;
        if c.dose != Dose::Uniform {
            ctx.notes.push("ranking a dose-dependent influence matrix".into());
        }
        let r = RankingResult::compute(&c.matrix, Some(&scenario.combination))?;
        write_ranking(ctx, &r)
    }

    fn estimate(&self, ctx: &mut TaskOutput) -> Result<()> {
        let cfg = &self.config;
        let trace = cfg.observed_trace()?;
        let scenario = cfg.scenario()?;
        let est_cfg = cfg.estimate.as_ref().expect("validated");
        let mut settings = GclSettings::new(cfg.params()?);
        settings.burn_in = est_cfg.burn_in;
        settings.dose = cfg.influence.dose.to_dose()?;
        let est = if cfg.network.combination.is_some() {
            estimate_with_combination(&trace, scenario.combination.clone(), &settings)?
        } else {
            settings.rule = cfg.rule()?;
            estimate_causal_effects(&trace, &scenario.adjacency, &settings)?
        };
        ctx.write("influence.csv", |w| est.influence.write_csv(w))?;
        let d = est.informativeness.matrix();
        ctx.write("informativeness.csv", |w| write_agent_hypothesis(w, d))?;
        ctx.write("gcl.json", |w| {
            serde_json::to_writer_pretty(&mut *w, &est.report())?;
            Ok(())
        })?;
        if est.clamped > 0 {
            ctx.notes
                .push(format!("{} belief entries were clamped on ingestion", est.clamped));
        }
        if est.floored > 0 {
            ctx.notes.push(format!(
                "{} negative informativeness estimates were floored at 0",
                est.floored
            ));
        }
        ctx.summary = json!({ "true_state": est.true_state + 1, "samples": est.samples });
        Ok(())
    }

    fn figure(&self, name: FigureName, ctx: &mut TaskOutput) -> Result<()> {
        let cfg = &self.config;
        let scenario = cfg.scenario()?;
        let params = cfg.params()?;
        let fig = &cfg.figure;
        match name {
            FigureName::InfluenceHeatmap => {
                let c = self.influence_matrix()?;
                ctx.write("influence.csv", |w| c.write_csv(w))?;
                ctx.write("combination.csv", |w| scenario.combination.write_csv(w))?;
                ctx.summary = json!({ "dose": c.dose, "params": c.params });
            }
            FigureName::RankingComparison => {
                let r = figures::ranking_comparison(&scenario, params)?;
                write_ranking(ctx, &r)?;
            }
            FigureName::DeltaHops => {
                let rows = figures::delta_hops(&scenario, &fig.delta_grid, params.beta, fig.target - 1, fig.max_hops)?;
                ctx.write("delta_hops.csv", |w| figures::write_delta_hops(&rows, w))?;
                ctx.notes.push(format!(
                    "hop distance is the shortest directed path from a source to agent {}",
                    fig.target
                ));
                ctx.summary = json!({ "target": fig.target, "beta": params.beta });
            }
            FigureName::GclError => {
                let seed = cfg.seed.expect("validated");
                let t = figures::gcl_error(&scenario, params, &fig.horizons, cfg.replicas, seed)?;
                ctx.write("gcl_error.csv", |w| t.write_summary_csv(w))?;
                ctx.write("gcl_error_replicas.csv", |w| t.write_replicas_csv(w))?;
                ctx.summary = json!({ "log_log_slope": t.slope, "params": params });
            }
            FigureName::CorrVsCause => {
                let seed = cfg.seed.expect("validated");
                let pair = [fig.pair[0] - 1, fig.pair[1] - 1];
                let t = figures::corr_vs_cause(
                    &scenario,
                    params,
                    &fig.correlations,
                    pair,
                    cfg.run.steps,
                    fig.burn_in,
                    cfg.replicas,
                    seed,
                )?;
                ctx.write("corr_vs_cause.csv", |w| t.write_summary_csv(w))?;
                ctx.write("corr_vs_cause_replicas.csv", |w| t.write_replicas_csv(w))?;
                ctx.notes
                    .push("observation noise of the pair is coupled through one correlation coefficient".into());
                ctx.summary = json!({ "pair": fig.pair, "steps": cfg.run.steps, "params": params });
            }
        }
        Ok(())
    }
}

/// Ranks a stored influence matrix without a network (no centrality).
pub fn rank_influence_file(path: &Path, out: &Path) -> Result<ExperimentReport> {
    let started = Instant::now();
    let bytes = fs::read(path)?;
    let matrix = InfluenceMatrix::read_csv(bytes.as_slice()).map_err(|e| match e {
        Error::Parse { context, message } => Error::Parse {
            context: format!("{}: {context}", path.display()),
            message,
        },
        other => other,
    })?;
    fs::create_dir_all(out)?;
    let mut ctx = TaskOutput::new(out);
    let r = RankingResult::compute(&matrix, None)?;
    write_ranking(&mut ctx, &r)?;
    let report = ExperimentReport {
        provenance: Provenance {
            task: "rank".into(),
            config_path: Some(path.display().to_string()),
            config_sha256: Some(sha256_hex(&bytes)),
            seed: None,
            replicas: 1,
            version: env!("CARGO_PKG_VERSION"),
        },
        outputs: ctx.files,
        notes: vec!["no network given; centrality omitted".into()],
        summary: ctx.summary,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    };
    write_json(&out.join("report.json"), &report)?;
    Ok(report)
}

fn write_ranking(ctx: &mut TaskOutput, r: &RankingResult) -> Result<()> {
    ctx.write("ranking.csv", |w| r.write_csv(w))?;
    ctx.write("ranking.json", |w| r.write_json(w))?;
    ctx.summary = json!({
        "rho": r.rho,
        "residual": r.residual,
        "second_eigenvalue_ratio": r.second_eigenvalue_ratio,
        "top_causal_rank": r.causal_rank_order[0] + 1,
        "top_air": r.air_order[0] + 1,
    });
    Ok(())
}

fn write_agent_hypothesis(w: &mut dyn Write, m: &Matrix) -> Result<()> {
    writeln!(w, "agent,hypothesis,value")?;
    for k in 0..m.nrows() {
        for h in 0..m.ncols() {
            writeln!(w, "{},{},{}", k + 1, h + 1, fmt_sig(m[(k, h)]))?;
        }
    }
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

struct TaskOutput {
    dir: PathBuf,
    files: Vec<String>,
    notes: Vec<String>,
    summary: serde_json::Value,
}

impl TaskOutput {
    fn new(dir: &Path) -> Self {
        TaskOutput {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            notes: Vec::new(),
            summary: serde_json::Value::Null,
        }
    }

    fn write(&mut self, name: &str, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        f(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }
}
