//! TOML experiment configuration.
//!
//! Relative file paths are resolved against the directory of the config file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::causal::Dose;
use crate::dynamics::{Intervention, LearningParams};
use crate::error::{Error, Result};
use crate::gcl::ObservedTrace;
use crate::linalg::Matrix;
use crate::network::{Adjacency, CombinationMatrix, CombinationRule};
use crate::scenario::{Scenario, BENCHMARK_EDGES, BENCHMARK_MEANS};
use crate::world::WorldModel;

/// Stable names of the figure datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureName {
    InfluenceHeatmap,
    RankingComparison,
    DeltaHops,
    GclError,
    CorrVsCause,
}

impl FigureName {
    pub const ALL: [FigureName; 5] = [
        FigureName::InfluenceHeatmap,
        FigureName::RankingComparison,
        FigureName::DeltaHops,
        FigureName::GclError,
        FigureName::CorrVsCause,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FigureName::InfluenceHeatmap => "influence-heatmap",
            FigureName::RankingComparison => "ranking-comparison",
            FigureName::DeltaHops => "delta-hops",
            FigureName::GclError => "gcl-error",
            FigureName::CorrVsCause => "corr-vs-cause",
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, FigureName::GclError | FigureName::CorrVsCause)
    }
}

impl fmt::Display for FigureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureName::ALL.into_iter().find(|n| n.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = FigureName::ALL.iter().map(|n| n.as_str()).collect();
            Error::Config(format!("unknown figure {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Simulate,
    Influence,
    Rank,
    Estimate,
    Figure(FigureName),
}

impl Task {
    pub fn is_stochastic(&self) -> bool {
        match self {
            Task::Simulate => true,
            Task::Figure(f) => f.is_stochastic(),
            _ => false,
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::Simulate => f.write_str("simulate"),
            Task::Influence => f.write_str("influence"),
            Task::Rank => f.write_str("rank"),
            Task::Estimate => f.write_str("estimate"),
            Task::Figure(n) => write!(f, "figure:{n}"),
        }
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simulate" => Ok(Task::Simulate),
            "influence" => Ok(Task::Influence),
            "rank" => Ok(Task::Rank),
            "estimate" => Ok(Task::Estimate),
            other => match other.strip_prefix("figure:") {
                Some(name) => Ok(Task::Figure(name.parse()?)),
                None => Err(Error::Config(format!(
                    "unknown task {other:?}; expected simulate, influence, rank, estimate or figure:<name>"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Option<String>,
    pub seed: Option<u64>,
    #[serde(default = "one")]
    pub replicas: usize,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub network: NetworkSpec,
    pub world: WorldSpec,
    #[serde(default)]
    pub learning: LearningSpec,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub influence: InfluenceSection,
    pub estimate: Option<EstimateSection>,
    #[serde(default)]
    pub figure: FigureSection,
    #[serde(skip)]
    base_dir: PathBuf,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    /// `"benchmark"` selects the embedded 11-agent network.
    pub builtin: Option<String>,
    /// Edge list, `from,to` per line.
    pub edges: Option<PathBuf>,
    /// 0/1 adjacency CSV.
    pub adjacency: Option<PathBuf>,
    /// Explicit combination matrix CSV; `rule` is then ignored.
    pub combination: Option<PathBuf>,
    #[serde(default)]
    pub rule: RuleSpec,
    /// Self-weight for the `uniform-self-weight` rule.
    pub self_weight: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleSpec {
    #[default]
    Averaging,
    Metropolis,
    UniformSelfWeight,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldSpec {
    pub builtin: Option<String>,
    /// Binary world: mean of each agent under the alternative.
    pub alternative_means: Option<Vec<f64>>,
    /// General world: `K` rows of `H` means.
    pub means: Option<Vec<Vec<f64>>>,
    /// 1-based.
    #[serde(default = "one")]
    pub true_state: usize,
    pub correlation: Option<CorrelationSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationSpec {
    /// 1-based agent labels.
    pub agents: [usize; 2],
    pub coefficient: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearningSpec {
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "unit")]
    pub beta: f64,
}

fn unit() -> f64 {
    1.0
}

impl Default for LearningSpec {
    fn default() -> Self {
        LearningSpec { delta: 0.0, beta: 1.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Replace observations by their means.
    #[serde(default)]
    pub noiseless: bool,
    /// Write every replica's full trace.
    #[serde(default = "yes")]
    pub save_traces: bool,
    pub intervention: Option<InterventionSpec>,
}

fn default_steps() -> usize {
    1000
}

fn yes() -> bool {
    true
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            steps: default_steps(),
            noiseless: false,
            save_traces: true,
            intervention: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterventionSpec {
    /// 1-based.
    pub agent: usize,
    pub belief: DoseSpec,
}

/// `"uniform"` or an explicit belief vector.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum DoseSpec {
    Named(String),
    Belief(Vec<f64>),
}

impl Default for DoseSpec {
    fn default() -> Self {
        DoseSpec::Named("uniform".into())
    }
}

impl DoseSpec {
    pub fn to_dose(&self) -> Result<Dose> {
        match self {
            DoseSpec::Named(n) if n == "uniform" => Ok(Dose::Uniform),
            DoseSpec::Named(n) => Err(Error::Config(format!("unknown dose {n:?}"))),
            DoseSpec::Belief(b) => Ok(Dose::Fixed(b.clone())),
        }
    }
}

impl FromStr for DoseSpec {
    type Err = Error;

    /// `uniform` or a comma-separated belief vector.
    fn from_str(s: &str) -> Result<Self> {
        if s == "uniform" {
            return Ok(DoseSpec::Named(s.into()));
        }
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("dose entry {p:?} is not a number")))
            })
            .collect::<Result<Vec<_>>>()
            .map(DoseSpec::Belief)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfluenceSection {
    #[serde(default)]
    pub dose: DoseSpec,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceFormat {
    #[default]
    Long,
    Wide,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSection {
    pub trace: PathBuf,
    #[serde(default)]
    pub format: TraceFormat,
    #[serde(default)]
    pub burn_in: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureSection {
    #[serde(default = "default_delta_grid")]
    pub delta_grid: Vec<f64>,
    /// 1-based target agent of the hop-distance figure.
    #[serde(default = "default_target")]
    pub target: usize,
    #[serde(default = "default_max_hops")]
    pub max_hops: usize,
    #[serde(default = "default_horizons")]
    pub horizons: Vec<usize>,
    #[serde(default = "default_correlations")]
    pub correlations: Vec<f64>,
    /// 1-based agent pair of the correlation figure.
    #[serde(default = "default_pair")]
    pub pair: [usize; 2],
    /// Time steps dropped before measuring belief correlation.
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
}

fn default_delta_grid() -> Vec<f64> {
    vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5]
}
fn default_target() -> usize {
    4
}
fn default_max_hops() -> usize {
    3
}
fn default_horizons() -> Vec<usize> {
    vec![100, 1000, 10_000]
}
fn default_correlations() -> Vec<f64> {
    vec![0.0, 0.4, 0.8]
}
fn default_pair() -> [usize; 2] {
    [6, 11]
}
fn default_burn_in() -> usize {
    100
}

impl Default for FigureSection {
    fn default() -> Self {
        FigureSection {
            delta_grid: default_delta_grid(),
            target: default_target(),
            max_hops: default_max_hops(),
            horizons: default_horizons(),
            correlations: default_correlations(),
            pair: default_pair(),
            burn_in: default_burn_in(),
        }
    }
}

fn config_error(path: &Path, key: &str, msg: impl fmt::Display) -> Error {
    Error::Config(format!("{}: [{key}] {msg}", path.display()))
}

impl ExperimentConfig {
    /// Parses a TOML file; syntax and type errors carry line and column.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: cannot read config: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses TOML text, resolving relative paths against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn task(&self) -> Result<Option<Task>> {
        self.task.as_deref().map(str::parse).transpose()
    }

    pub fn params(&self) -> Result<LearningParams> {
        LearningParams::new(self.learning.delta, self.learning.beta)
    }

    pub fn rule(&self) -> Result<CombinationRule> {
        match (self.network.rule, self.network.self_weight) {
            (RuleSpec::Averaging, None) => Ok(CombinationRule::Averaging),
            (RuleSpec::Metropolis, None) => Ok(CombinationRule::Metropolis),
            (RuleSpec::UniformSelfWeight, Some(a)) => Ok(CombinationRule::UniformSelfWeight(a)),
            (RuleSpec::UniformSelfWeight, None) => Err(Error::Config(
                "[network] rule uniform-self-weight needs self_weight".into(),
            )),
            (_, Some(_)) => Err(Error::Config(
                "[network] self_weight only applies to rule uniform-self-weight".into(),
            )),
        }
    }

    fn adjacency(&self) -> Result<Adjacency> {
        let n = &self.network;
        let sources = [
            n.builtin.is_some(),
            n.edges.is_some(),
            n.adjacency.is_some(),
            n.combination.is_some(),
        ];
        if sources.iter().filter(|&&s| s).count() != 1 {
            return Err(Error::Config(
                "[network] set exactly one of builtin, edges, adjacency, combination".into(),
            ));
        }
        if let Some(name) = &n.builtin {
            if name != "benchmark" {
                return Err(Error::Config(format!("[network] unknown builtin {name:?}")));
            }
            return Adjacency::read_edge_list(BENCHMARK_EDGES.as_bytes());
        }
        let open = |p: &PathBuf| {
            let path = self.resolve(p);
            fs::File::open(&path).map_err(|e| config_error(&path, "network", format!("cannot open: {e}")))
        };
        let with_file = |p: &PathBuf, e: Error| match e {
            Error::Parse { context, message } => Error::Parse {
                context: format!("{}: {context}", self.resolve(p).display()),
                message,
            },
            other => other,
        };
        if let Some(p) = &n.edges {
            return Adjacency::read_edge_list(open(p)?).map_err(|e| with_file(p, e));
        }
        if let Some(p) = &n.adjacency {
            return Adjacency::read_csv(open(p)?).map_err(|e| with_file(p, e));
        }
        let p = n.combination.as_ref().expect("one source is set");
        Ok(CombinationMatrix::read_csv(open(p)?)
            .map_err(|e| with_file(p, e))?
            .support())
    }

    fn combination(&self, adjacency: &Adjacency) -> Result<CombinationMatrix> {
        match &self.network.combination {
            Some(p) => {
                let path = self.resolve(p);
                let f =
                    fs::File::open(&path).map_err(|e| config_error(&path, "network", format!("cannot open: {e}")))?;
                CombinationMatrix::read_csv(f)
            }
            None => CombinationMatrix::from_rule(adjacency, self.rule()?),
        }
    }

    pub fn world(&self) -> Result<WorldModel> {
        let w = &self.world;
        let set = [w.builtin.is_some(), w.alternative_means.is_some(), w.means.is_some()];
        if set.iter().filter(|&&s| s).count() != 1 {
            return Err(Error::Config(
                "[world] set exactly one of builtin, alternative_means, means".into(),
            ));
        }
        if w.true_state == 0 {
            return Err(Error::Config("[world] true_state is 1-based".into()));
        }
        let world = if let Some(name) = &w.builtin {
            if name != "benchmark" {
                return Err(Error::Config(format!("[world] unknown builtin {name:?}")));
            }
            WorldModel::binary(&BENCHMARK_MEANS)?
        } else if let Some(alt) = &w.alternative_means {
            if w.true_state != 1 {
                return Err(Error::Config(
                    "[world] alternative_means puts the truth at hypothesis 1".into(),
                ));
            }
            WorldModel::binary(alt)?
        } else {
            let rows = w.means.as_ref().expect("one source is set");
            let h = rows.first().map_or(0, Vec::len);
            if rows.iter().any(|r| r.len() != h) {
                return Err(Error::Config("[world] means rows differ in length".into()));
            }
            let m = Matrix::from_fn(rows.len(), h, |k, j| rows[k][j]);
            WorldModel::new(m, w.true_state - 1)?
        };
        match &w.correlation {
            Some(c) => {
                let [a, b] = c.agents;
                if a == 0 || b == 0 || a > world.agents() || b > world.agents() || a == b {
                    return Err(Error::Config(format!(
                        "[world.correlation] agents must be two distinct labels in 1..={}",
                        world.agents()
                    )));
                }
                world.with_pair_correlation(a - 1, b - 1, c.coefficient)
            }
            None => Ok(world),
        }
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let adjacency = self.adjacency()?;
        let combination = self.combination(&adjacency)?;
        let world = self.world()?;
        if world.agents() != combination.agents() {
            return Err(Error::Config(format!(
                "network has {} agents but the world has {}",
                combination.agents(),
                world.agents()
            )));
        }
        Ok(Scenario {
            adjacency,
            combination,
            world,
        })
    }

    pub fn intervention(&self, hypotheses: usize) -> Result<Option<Intervention>> {
        self.run
            .intervention
            .as_ref()
            .map(|iv| {
                if iv.agent == 0 {
                    return Err(Error::Config("[run.intervention] agent is 1-based".into()));
                }
                iv.belief.to_dose()?.for_agent(iv.agent - 1, hypotheses)
            })
            .transpose()
    }

    pub fn observed_trace(&self) -> Result<ObservedTrace> {
        let est = self
            .estimate
            .as_ref()
            .ok_or_else(|| Error::Config("[estimate] section with a trace path is required".into()))?;
        let path = self.resolve(&est.trace);
        let f =
            fs::File::open(&path).map_err(|e| config_error(&path, "estimate", format!("cannot open trace: {e}")))?;
        let parsed = match est.format {
            TraceFormat::Long => ObservedTrace::read_long_csv(f),
            TraceFormat::Wide => ObservedTrace::read_wide_csv(f),
        };
        parsed.map_err(|e| match e {
            Error::Parse { context, message } => Error::Parse {
                context: format!("{}: {context}", path.display()),
                message,
            },
            other => other,
        })
    }

    /// Checks everything a run of `task` would need, loading all referenced
    /// files. `task` defaults to the config's own task.
    pub fn validate(&self, task: Option<Task>) -> Result<Scenario> {
        let task = match task {
            Some(t) => Some(t),
            None => self.task()?,
        };
        if self.replicas == 0 {
            return Err(Error::Config("replicas must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        self.params().map_err(|e| Error::Config(format!("[learning] {e}")))?;
        let scenario = self.scenario()?;
        let k = scenario.agents();
        let h = scenario.world.hypotheses();
        self.influence.dose.to_dose()?.for_agent(0, h)?;
        self.intervention(h)?;
        if self.run.steps == 0 {
            return Err(Error::Config("[run] steps must be at least 1".into()));
        }
        let fig = &self.figure;
        if fig.target == 0 || fig.target > k {
            return Err(Error::Config(format!("[figure] target must be in 1..={k}")));
        }
        if fig.pair.iter().any(|&a| a == 0 || a > k) || fig.pair[0] == fig.pair[1] {
            return Err(Error::Config(format!(
                "[figure] pair must be two distinct labels in 1..={k}"
            )));
        }
        if fig.horizons.contains(&0) {
            return Err(Error::Config("[figure] horizons must be positive".into()));
        }
        for &d in &fig.delta_grid {
            LearningParams::new(d, self.learning.beta)
                .map_err(|e| Error::Config(format!("[figure] delta_grid: {e}")))?;
        }
        if fig.correlations.iter().any(|c| !(-1.0..=1.0).contains(c)) {
            return Err(Error::Config("[figure] correlations must lie in [-1, 1]".into()));
        }
        if let Some(t) = task {
            if t.is_stochastic() && self.seed.is_none() && !(t == Task::Simulate && self.run.noiseless) {
                return Err(Error::Config(format!("task {t} is stochastic and needs a seed")));
            }
            if t == Task::Estimate {
                let trace = self.observed_trace()?;
                if trace.agents() != k {
                    return Err(Error::DimensionMismatch {
                        what: "trace agents",
                        expected: k,
                        found: trace.agents(),
                    });
                }
            }
        }
        Ok(scenario)
    }
}
