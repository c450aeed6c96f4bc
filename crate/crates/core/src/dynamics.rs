//! Belief dynamics: local (adaptive) Bayesian update followed by geometric
//! averaging over the network, with optional atomic persistent interventions.
//!
//! Beliefs are kept in the log domain and renormalized row by row.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::network::{fmt_sig, CombinationMatrix};
use crate::world::{LogLikelihoodRatios, ObservationSource, WorldModel};

/// Smallest belief accepted when ingesting external traces.
pub const BELIEF_FLOOR: f64 = 1e-300;
/// Smallest entry allowed in an intervention dose.
pub const MIN_DOSE: f64 = 1e-12;

/// Discount `delta` on past beliefs and scale `beta` on fresh likelihoods.
/// `delta = 0, beta = 1` is plain non-Bayesian social learning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearningParams {
    pub delta: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearningMode {
    Nbsl,
    Asl,
}

impl LearningParams {
    pub fn new(delta: f64, beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in [0, 1), got {delta}"
            )));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be > 0, got {beta}")));
        }
        Ok(LearningParams { delta, beta })
    }

    pub fn nbsl() -> Self {
        LearningParams { delta: 0.0, beta: 1.0 }
    }

    pub fn asl(delta: f64, beta: f64) -> Result<Self> {
        Self::new(delta, beta)
    }

    pub fn mode(&self) -> LearningMode {
        if self.delta == 0.0 && self.beta == 1.0 {
            LearningMode::Nbsl
        } else {
            LearningMode::Asl
        }
    }

    pub fn is_nbsl(&self) -> bool {
        self.mode() == LearningMode::Nbsl
    }
}

/// Belief vectors of all agents (`K x H`), stored as normalized log-beliefs.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    log: Matrix,
}

impl BeliefState {
    pub fn uniform(agents: usize, hypotheses: usize) -> Self {
        BeliefState {
            log: Matrix::from_element(agents, hypotheses, -(hypotheses as f64).ln()),
        }
    }

    /// Validates strictly positive rows summing to one (within 1e-9), then
    /// renormalizes.
    pub fn from_beliefs(beliefs: Matrix) -> Result<Self> {
        for (k, row) in beliefs.row_iter().enumerate() {
            if row.iter().any(|&x| !x.is_finite() || x <= 0.0) {
                return Err(Error::InvalidBelief(format!(
                    "agent {} has a non-positive belief entry",
                    k + 1
                )));
            }
            let s = row.sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidBelief(format!("beliefs of agent {} sum to {s}", k + 1)));
            }
        }
        Ok(Self::from_unnormalized_log(beliefs.map(f64::ln)))
    }

    /// Normalizes each row of an unnormalized log-belief matrix.
    pub fn from_unnormalized_log(mut log: Matrix) -> Self {
        for mut row in log.row_iter_mut() {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
            row.add_scalar_mut(-lse);
        }
        BeliefState { log }
    }

    pub fn agents(&self) -> usize {
        self.log.nrows()
    }

    pub fn hypotheses(&self) -> usize {
        self.log.ncols()
    }

    pub fn log_beliefs(&self) -> &Matrix {
        &self.log
    }

    pub fn beliefs(&self) -> Matrix {
        self.log.map(f64::exp)
    }

    pub fn belief(&self, agent: usize, hypothesis: usize) -> f64 {
        self.log[(agent, hypothesis)].exp()
    }

    /// `lambda[k][h] = log mu_k(true) - log mu_k(h)`; the true column is zero.
    pub fn log_ratios(&self, true_state: usize) -> Matrix {
        Matrix::from_fn(self.agents(), self.hypotheses(), |k, h| {
            self.log[(k, true_state)] - self.log[(k, h)]
        })
    }

    fn pin(&mut self, intervention: &Intervention) {
        for (h, &v) in intervention.log_belief.iter().enumerate() {
            self.log[(intervention.agent, h)] = v;
        }
    }
}

/// Atomic persistent intervention: agent `agent` holds `belief` forever.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intervention {
    pub agent: usize,
    belief: Vec<f64>,
    #[serde(skip)]
    log_belief: Vec<f64>,
}

impl Intervention {
    /// The dose must be a probability vector with every entry at least
    /// [`MIN_DOSE`]; it is renormalized.
    pub fn new(agent: usize, belief: Vec<f64>) -> Result<Self> {
        if belief.len() < 2 {
            return Err(Error::InvalidBelief(
                "intervention belief needs at least 2 entries".into(),
            ));
        }
        if let Some(x) = belief.iter().find(|&&x| !x.is_finite() || x < MIN_DOSE) {
            return Err(Error::InvalidBelief(format!(
                "intervention belief entry {x} is below {MIN_DOSE}"
            )));
        }
        let s: f64 = belief.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidBelief(format!("intervention belief sums to {s}")));
        }
        let belief: Vec<f64> = belief.iter().map(|x| x / s).collect();
        let log_belief = belief.iter().map(|x| x.ln()).collect();
        Ok(Intervention {
            agent,
            belief,
            log_belief,
        })
    }

    /// Uniform dose `1/H`.
    pub fn uniform(agent: usize, hypotheses: usize) -> Self {
        Self::new(agent, vec![1.0 / hypotheses as f64; hypotheses]).expect("uniform dose is valid")
    }

    pub fn belief(&self) -> &[f64] {
        &self.belief
    }

    pub fn hypotheses(&self) -> usize {
        self.belief.len()
    }

    /// `log(mu(true) / mu(h))` of the fixed belief.
    pub fn log_ratio(&self, true_state: usize, hypothesis: usize) -> f64 {
        self.log_belief[true_state] - self.log_belief[hypothesis]
    }

    fn check(&self, agents: usize, hypotheses: usize) -> Result<()> {
        if self.agent >= agents {
            return Err(Error::DimensionMismatch {
                what: "intervened agent index",
                expected: agents,
                found: self.agent + 1,
            });
        }
        if self.belief.len() != hypotheses {
            return Err(Error::DimensionMismatch {
                what: "intervention belief length",
                expected: hypotheses,
                found: self.belief.len(),
            });
        }
        Ok(())
    }
}

/// Adaptive Bayesian update: `psi_k(h) ∝ L_k(h)^beta * mu_k(h)^(1 - delta)`,
/// written in terms of log-likelihood ratios against the truth.
pub fn local_update(prev: &BeliefState, llr: &LogLikelihoodRatios, params: &LearningParams) -> BeliefState {
    let keep = 1.0 - params.delta;
    let log = prev.log.zip_map(&llr.0, |m, x| keep * m - params.beta * x);
    BeliefState::from_unnormalized_log(log)
}

/// Geometric averaging: `mu_k(h) ∝ prod_l psi_l(h)^a[l][k]`.
pub fn combine(psi: &BeliefState, a: &CombinationMatrix) -> BeliefState {
    BeliefState::from_unnormalized_log(a.matrix().tr_mul(&psi.log))
}

/// Intermediate (shared) and combined beliefs after one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub psi: BeliefState,
    pub mu: BeliefState,
}

/// One full step. Under an intervention the target's shared and combined
/// beliefs are overwritten with the fixed dose.
pub fn step(
    mu_prev: &BeliefState,
    llr: &LogLikelihoodRatios,
    a: &CombinationMatrix,
    params: &LearningParams,
    intervention: Option<&Intervention>,
) -> StepOutput {
    let mut psi = local_update(mu_prev, llr, params);
    if let Some(iv) = intervention {
        psi.pin(iv);
    }
    let mut mu = combine(&psi, a);
    if let Some(iv) = intervention {
        mu.pin(iv);
    }
    StepOutput { psi, mu }
}

/// Incremental simulation; owns its state.
pub struct Simulation<'a> {
    world: &'a WorldModel,
    combination: &'a CombinationMatrix,
    params: LearningParams,
    intervention: Option<&'a Intervention>,
    source: ObservationSource,
    time: u64,
    state: StepOutput,
}

impl<'a> Simulation<'a> {
    pub fn new(
        world: &'a WorldModel,
        combination: &'a CombinationMatrix,
        params: LearningParams,
        intervention: Option<&'a Intervention>,
        source: ObservationSource,
        initial: Option<BeliefState>,
    ) -> Result<Self> {
        let (k, h) = (world.agents(), world.hypotheses());
        if combination.agents() != k {
            return Err(Error::DimensionMismatch {
                what: "combination matrix size",
                expected: k,
                found: combination.agents(),
            });
        }
        if let Some(iv) = intervention {
            iv.check(k, h)?;
        }
        let mut mu = initial.unwrap_or_else(|| BeliefState::uniform(k, h));
        if mu.agents() != k || mu.hypotheses() != h {
            return Err(Error::DimensionMismatch {
                what: "initial belief rows",
                expected: k,
                found: mu.agents(),
            });
        }
        if let Some(iv) = intervention {
            mu.pin(iv);
        }
        Ok(Simulation {
            world,
            combination,
            params,
            intervention,
            source,
            time: 0,
            state: StepOutput { psi: mu.clone(), mu },
        })
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn mu(&self) -> &BeliefState {
        &self.state.mu
    }

    /// Latest shared beliefs; at time 0 these equal the initial beliefs.
    pub fn psi(&self) -> &BeliefState {
        &self.state.psi
    }

    pub fn advance(&mut self) -> &StepOutput {
        self.time += 1;
        let xi = self.world.observation(self.source, self.time);
        let llr = self.world.llr(&xi);
        self.state = step(&self.state.mu, &llr, self.combination, &self.params, self.intervention);
        &self.state
    }

    pub fn advance_by(&mut self, steps: u64) -> &StepOutput {
        for _ in 0..steps {
            self.advance();
        }
        &self.state
    }
}

/// How to run a simulation.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub steps: usize,
    pub source: ObservationSource,
    pub initial: Option<BeliefState>,
}

impl RunSpec {
    pub fn sampled(steps: usize, seed: u64, replica: u64) -> Self {
        RunSpec {
            steps,
            source: ObservationSource::Sampled { seed, replica },
            initial: None,
        }
    }

    pub fn noiseless(steps: usize) -> Self {
        RunSpec {
            steps,
            source: ObservationSource::Mean,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub agents: usize,
    pub hypotheses: usize,
    /// 1-based in the exported JSON.
    pub true_state: usize,
    pub steps: usize,
    pub params: LearningParams,
    pub source: ObservationSource,
    pub intervention: Option<InterventionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterventionRecord {
    /// 1-based agent label.
    pub agent: usize,
    pub belief: Vec<f64>,
}

/// Time series of shared beliefs, combined beliefs and log-belief ratios for
/// `t = 0..=steps`.
#[derive(Debug, Clone)]
pub struct Trace {
    pub psi: Vec<BeliefState>,
    pub mu: Vec<BeliefState>,
    pub lambda: Vec<Matrix>,
    pub metadata: TraceMetadata,
}

/// Runs `spec.steps` steps and records everything.
pub fn run(
    world: &WorldModel,
    combination: &CombinationMatrix,
    params: LearningParams,
    spec: &RunSpec,
    intervention: Option<&Intervention>,
) -> Result<Trace> {
    if spec.steps == 0 {
        return Err(Error::InvalidParameter("a run needs at least one step".into()));
    }
    let mut sim = Simulation::new(
        world,
        combination,
        params,
        intervention,
        spec.source,
        spec.initial.clone(),
    )?;
    let t0 = world.true_state();
    let mut psi = Vec::with_capacity(spec.steps + 1);
    let mut mu = Vec::with_capacity(spec.steps + 1);
    let mut lambda = Vec::with_capacity(spec.steps + 1);
    psi.push(sim.psi().clone());
    mu.push(sim.mu().clone());
    lambda.push(sim.mu().log_ratios(t0));
    for _ in 0..spec.steps {
        let out = sim.advance();
        lambda.push(out.mu.log_ratios(t0));
        psi.push(out.psi.clone());
        mu.push(out.mu.clone());
    }
    Ok(Trace {
        psi,
        mu,
        lambda,
        metadata: TraceMetadata {
            agents: world.agents(),
            hypotheses: world.hypotheses(),
            true_state: t0 + 1,
            steps: spec.steps,
            params,
            source: spec.source,
            intervention: intervention.map(|iv| InterventionRecord {
                agent: iv.agent + 1,
                belief: iv.belief.clone(),
            }),
        },
    })
}

impl Trace {
    pub fn steps(&self) -> usize {
        self.psi.len() - 1
    }

    /// Writes `psi.csv`, `mu.csv`, `lambda.csv` in long format
    /// (`time,agent,hypothesis,value`, 1-based labels) and `metadata.json`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let beliefs = |states: &[BeliefState]| -> Vec<Matrix> { states.iter().map(BeliefState::beliefs).collect() };
        write_long_csv(&dir.join("psi.csv"), &beliefs(&self.psi))?;
        write_long_csv(&dir.join("mu.csv"), &beliefs(&self.mu))?;
        write_long_csv(&dir.join("lambda.csv"), &self.lambda)?;
        let mut f = fs::File::create(dir.join("metadata.json"))?;
        serde_json::to_writer_pretty(&mut f, &self.metadata)?;
        writeln!(f)?;
        Ok(())
    }
}

pub(crate) fn write_long_csv(path: &Path, series: &[Matrix]) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "time,agent,hypothesis,value")?;
    for (t, m) in series.iter().enumerate() {
        for k in 0..m.nrows() {
            for h in 0..m.ncols() {
                writeln!(w, "{t},{},{},{}", k + 1, h + 1, fmt_sig(m[(k, h)]))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
