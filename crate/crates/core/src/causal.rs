//! Expected asymptotic log-belief ratios before and after an intervention,
//! and the causal effects they imply.
//!
//! All computations are per wrong hypothesis: a `K x H` matrix carries one
//! column per hypothesis, with a zero column at the true state.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Intervention, LearningParams};
use crate::error::{Error, Result};
use crate::linalg::{LinearSystem, Matrix, Vector};
use crate::network::{fmt_sig, CombinationMatrix, EffectiveDecomposition};
use crate::world::Informativeness;

/// Expected log-belief ratios `lim E[lambda_i]` without intervention.
#[derive(Debug, Clone, PartialEq)]
pub enum SteadyState {
    /// No discounting: every wrong-hypothesis ratio grows without bound and
    /// beliefs concentrate on the truth.
    Divergent,
    Finite(Matrix),
}

impl SteadyState {
    pub fn is_divergent(&self) -> bool {
        matches!(self, SteadyState::Divergent)
    }
}

/// Belief on the true state implied by one row of log-ratios.
pub fn belief_on_truth(log_ratios: &[f64], true_state: usize) -> f64 {
    1.0 / (1.0 + log_odds_against(log_ratios, true_state).exp())
}

/// `1 - belief_on_truth`, computed without cancellation.
pub fn belief_off_truth(log_ratios: &[f64], true_state: usize) -> f64 {
    1.0 / (1.0 + (-log_odds_against(log_ratios, true_state)).exp())
}

/// `log sum_{h != true} exp(-lambda_h)`.
fn log_odds_against(log_ratios: &[f64], true_state: usize) -> f64 {
    let terms = log_ratios
        .iter()
        .enumerate()
        .filter(|&(h, _)| h != true_state)
        .map(|(_, &l)| -l);
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Causal effect from a pre-intervention row (`None` when divergent) and a
/// post-intervention row: the drop in belief on the true state.
pub fn causal_effect(pre: Option<&[f64]>, post: &[f64], true_state: usize) -> f64 {
    match pre {
        None => belief_off_truth(post, true_state),
        Some(pre) => belief_on_truth(pre, true_state) - belief_on_truth(post, true_state),
    }
}

/// Expected steady-state log-ratios `(beta/(1-delta)) ((I - (1-delta)A^T)^-1 - I) d`.
pub fn expected_log_ratios(
    combination: &CombinationMatrix,
    info: &Informativeness,
    params: &LearningParams,
) -> Result<SteadyState> {
    check_dims(combination, info)?;
    if params.delta == 0.0 {
        return Ok(SteadyState::Divergent);
    }
    let keep = 1.0 - params.delta;
    let k = combination.agents();
    let system = LinearSystem::new(Matrix::identity(k, k) - combination.matrix().transpose() * keep)?;
    let rhs = combination.matrix().tr_mul(info.matrix()) * params.beta;
    Ok(SteadyState::Finite(system.solve_matrix(&rhs)?))
}

/// Post-intervention expected log-ratios for every agent. The intervened
/// agent's row holds the dose's own log-ratios.
///
/// The non-intervened block solves
/// `(I - (1-delta) R^T) lambda = r c^T + beta R^T d`.
pub fn post_intervention_log_ratios(
    combination: &CombinationMatrix,
    info: &Informativeness,
    params: &LearningParams,
    intervention: &Intervention,
) -> Result<Matrix> {
    check_dims(combination, info)?;
    let post = PostIntervention::solve(combination, info, params, intervention)?;
    Ok(post.full())
}

fn check_dims(combination: &CombinationMatrix, info: &Informativeness) -> Result<()> {
    if combination.agents() != info.agents() {
        return Err(Error::DimensionMismatch {
            what: "informativeness rows",
            expected: combination.agents(),
            found: info.agents(),
        });
    }
    Ok(())
}

fn dose_log_ratios(intervention: &Intervention, true_state: usize) -> Vector {
    Vector::from_fn(intervention.hypotheses(), |h, _| intervention.log_ratio(true_state, h))
}

struct PostIntervention {
    decomposition: EffectiveDecomposition,
    system: LinearSystem,
    dose: Vector,
    /// Rows ordered like `decomposition.others`.
    others: Matrix,
}

impl PostIntervention {
    fn solve(
        combination: &CombinationMatrix,
        info: &Informativeness,
        params: &LearningParams,
        intervention: &Intervention,
    ) -> Result<Self> {
        if intervention.hypotheses() != info.hypotheses() {
            return Err(Error::DimensionMismatch {
                what: "intervention belief length",
                expected: info.hypotheses(),
                found: intervention.hypotheses(),
            });
        }
        let decomposition = combination.effective_decomposition(intervention.agent)?;
        let n = decomposition.others.len();
        let keep = 1.0 - params.delta;
        let system = LinearSystem::new(Matrix::identity(n, n) - decomposition.residual.transpose() * keep)?;
        let dose = dose_log_ratios(intervention, info.true_state());
        let d_others = info.matrix().clone().remove_row(intervention.agent);
        let rhs = &decomposition.outgoing * dose.transpose() + decomposition.residual.tr_mul(&d_others) * params.beta;
        let others = system.solve_matrix(&rhs)?;
        Ok(PostIntervention {
            decomposition,
            system,
            dose,
            others,
        })
    }

    fn full(&self) -> Matrix {
        let m = self.decomposition.agent;
        let h = self.dose.len();
        let mut out = Matrix::zeros(self.others.nrows() + 1, h);
        for (j, &k) in self.decomposition.others.iter().enumerate() {
            out.row_mut(k).copy_from(&self.others.row(j));
        }
        out.row_mut(m).copy_from(&self.dose.transpose());
        out
    }
}

/// Pre-computed steady state for one network, world and learning rule.
pub struct CausalModel<'a> {
    combination: &'a CombinationMatrix,
    info: &'a Informativeness,
    params: LearningParams,
    steady: SteadyState,
}

impl<'a> CausalModel<'a> {
    pub fn new(combination: &'a CombinationMatrix, info: &'a Informativeness, params: LearningParams) -> Result<Self> {
        let steady = expected_log_ratios(combination, info, &params)?;
        Ok(CausalModel {
            combination,
            info,
            params,
            steady,
        })
    }

    pub fn agents(&self) -> usize {
        self.combination.agents()
    }

    pub fn hypotheses(&self) -> usize {
        self.info.hypotheses()
    }

    pub fn params(&self) -> &LearningParams {
        &self.params
    }

    pub fn steady_state(&self) -> &SteadyState {
        &self.steady
    }

    pub fn post_intervention(&self, intervention: &Intervention) -> Result<Matrix> {
        post_intervention_log_ratios(self.combination, self.info, &self.params, intervention)
    }

    /// Effect of `intervention` on every agent. The entry of the intervened
    /// agent is `1 - dose(true state)`.
    ///
    /// With a finite steady state the belief difference is formed from the
    /// exact ratio shift `(I - (1-delta)R^T)^-1 r * (E[psi_m] - c)` rather
    /// than by subtracting two nearly equal beliefs.
    pub fn effects(&self, intervention: &Intervention) -> Result<Vector> {
        let t0 = self.info.true_state();
        let post = PostIntervention::solve(self.combination, self.info, &self.params, intervention)?;
        let m = intervention.agent;
        let mut out = Vector::zeros(self.agents());
        out[m] = 1.0 - intervention.belief()[t0];
        match &self.steady {
            SteadyState::Divergent => {
                for (j, &k) in post.decomposition.others.iter().enumerate() {
                    let row: Vec<f64> = post.others.row(j).iter().copied().collect();
                    out[k] = belief_off_truth(&row, t0);
                }
            }
            SteadyState::Finite(pre) => {
                let keep = 1.0 - self.params.delta;
                let gain = post.system.solve(&post.decomposition.outgoing)?;
                let shared_m: Vec<f64> = (0..self.hypotheses())
                    .map(|h| keep * pre[(m, h)] + self.params.beta * self.info.get(m, h) - post.dose[h])
                    .collect();
                for (j, &k) in post.decomposition.others.iter().enumerate() {
                    let mut s = 0.0;
                    let mut ds = 0.0;
                    for h in (0..self.hypotheses()).filter(|&h| h != t0) {
                        let w = (-pre[(k, h)]).exp();
                        s += w;
                        ds += w * (gain[j] * shared_m[h]).exp_m1();
                    }
                    out[k] = ds / ((1.0 + s) * (1.0 + s + ds));
                }
            }
        }
        Ok(out)
    }
}

/// Dose imposed on each intervened agent when building an influence matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dose {
    /// `1/H` on every hypothesis.
    Uniform,
    /// The same belief vector for every intervened agent.
    Fixed(Vec<f64>),
}

impl Dose {
    pub fn for_agent(&self, agent: usize, hypotheses: usize) -> Result<Intervention> {
        match self {
            Dose::Uniform => Ok(Intervention::uniform(agent, hypotheses)),
            Dose::Fixed(b) => Intervention::new(agent, b.clone()),
        }
    }
}

/// All-pairs effects: row `m` holds the effect of intervening on `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceMatrix {
    pub dose: Dose,
    pub params: LearningParams,
    #[serde(with = "matrix_rows")]
    pub matrix: Matrix,
}

impl InfluenceMatrix {
    /// Rows are computed in parallel on the current rayon pool.
    pub fn compute(model: &CausalModel<'_>, dose: &Dose) -> Result<Self> {
        let k = model.agents();
        let h = model.hypotheses();
        let rows: Vec<Vector> = (0..k)
            .into_par_iter()
            .map(|m| model.effects(&dose.for_agent(m, h)?))
            .collect::<Result<_>>()?;
        let matrix = Matrix::from_fn(k, k, |m, j| rows[m][j]);
        Ok(InfluenceMatrix {
            dose: dose.clone(),
            params: *model.params(),
            matrix,
        })
    }

    pub fn agents(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, source: usize, target: usize) -> f64 {
        self.matrix[(source, target)]
    }

    /// Fails with [`Error::NotPositive`] on the first non-positive entry.
    pub fn check_positive(&self) -> Result<()> {
        for m in 0..self.agents() {
            for k in 0..self.agents() {
                let value = self.matrix[(m, k)];
                if value.is_nan() || value <= 0.0 {
                    return Err(Error::NotPositive {
                        row: m + 1,
                        column: k + 1,
                        value,
                    });
                }
            }
        }
        Ok(())
    }

    /// CSV with a header of 1-based agent labels; the first column labels
    /// the intervened agent.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let k = self.agents();
        let header: Vec<String> = (1..=k).map(|i| i.to_string()).collect();
        writeln!(w, "source,{}", header.join(","))?;
        for m in 0..k {
            let row: Vec<String> = self.matrix.row(m).iter().map(|&x| fmt_sig(x)).collect();
            writeln!(w, "{},{}", m + 1, row.join(","))?;
        }
        Ok(())
    }

    /// Reads the layout written by [`InfluenceMatrix::write_csv`]. Dose and
    /// parameters are not stored in the CSV and come back as uniform / NBSL.
    pub fn read_csv(reader: impl Read) -> Result<Matrix> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let k = rdr.headers()?.len().saturating_sub(1);
        let mut data = Vec::with_capacity(k * k);
        let mut rows = 0;
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != k + 1 {
                return Err(Error::parse(
                    format!("influence csv line {}", i + 2),
                    format!("expected {} fields, found {}", k + 1, rec.len()),
                ));
            }
            for (j, f) in rec.iter().enumerate().skip(1) {
                data.push(f.parse::<f64>().map_err(|_| {
                    Error::parse(
                        format!("influence csv line {}, column {}", i + 2, j + 1),
                        format!("not a number: {f:?}"),
                    )
                })?);
            }
            rows += 1;
        }
        if rows != k {
            return Err(Error::DimensionMismatch {
                what: "influence matrix rows",
                expected: k,
                found: rows,
            });
        }
        Ok(Matrix::from_row_slice(k, k, &data))
    }

    pub fn write_json(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

/// Dose-independent summary: uniform dose, every entry checked positive.
pub fn dose_independent_matrix(model: &CausalModel<'_>) -> Result<InfluenceMatrix> {
    let c = InfluenceMatrix::compute(model, &Dose::Uniform)?;
    c.check_positive()?;
    Ok(c)
}

pub(crate) mod matrix_rows {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::linalg::Matrix;

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let n = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != c) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        Ok(Matrix::from_fn(n, c, |i, j| rows[i][j]))
    }
}

/// Closed forms for two structured topologies, for a single wrong
/// hypothesis. Each function returns one log-ratio per agent, with the
/// intervened agent's own entry equal to `dose_log_ratio`.
pub mod special {
    /// Rank-one network where every agent weights agent `l` by `v[l]`.
    pub fn fully_connected_nbsl(v: &[f64], d: &[f64], agent: usize, dose_log_ratio: f64) -> Vec<f64> {
        let others: f64 = (0..v.len()).filter(|&l| l != agent).map(|l| v[l] * d[l]).sum();
        let shared = others / v[agent] + dose_log_ratio;
        fill(v.len(), agent, shared, dose_log_ratio)
    }

    pub fn fully_connected_asl(
        v: &[f64],
        d: &[f64],
        agent: usize,
        dose_log_ratio: f64,
        delta: f64,
        beta: f64,
    ) -> Vec<f64> {
        let others: f64 = (0..v.len()).filter(|&l| l != agent).map(|l| v[l] * d[l]).sum();
        let vm = v[agent];
        let shared = (beta * others + vm * dose_log_ratio) / (1.0 - (1.0 - delta) * (1.0 - vm));
        fill(v.len(), agent, shared, dose_log_ratio)
    }

    /// Directed ring where agent `k` keeps weight `alpha` on itself and puts
    /// `1 - alpha` on agent `k - 1`.
    pub fn ring_nbsl(alpha: f64, d: &[f64], agent: usize, dose_log_ratio: f64) -> Vec<f64> {
        let n = d.len();
        let mut out = vec![dose_log_ratio; n];
        for hop in 1..n {
            let k = (agent + hop) % n;
            let upstream: f64 = (1..hop).map(|j| d[(agent + j) % n]).sum();
            out[k] = upstream / (1.0 - alpha) + alpha / (1.0 - alpha) * d[k] + dose_log_ratio;
        }
        out
    }

    pub fn ring_asl(alpha: f64, d: &[f64], agent: usize, dose_log_ratio: f64, delta: f64, beta: f64) -> Vec<f64> {
        let n = d.len();
        let keep = 1.0 - delta;
        let denom = 1.0 - keep * alpha;
        let decay = keep * (1.0 - alpha) / denom;
        let mut out = vec![dose_log_ratio; n];
        for hop in 1..n {
            let k = (agent + hop) % n;
            let from_dose = dose_log_ratio * (1.0 - alpha) / denom * decay.powi(hop as i32 - 1);
            let own = beta * alpha / denom * d[k];
            let upstream: f64 = (1..hop)
                .map(|j| decay.powi((hop - j) as i32) / denom * d[(agent + j) % n])
                .sum();
            out[k] = from_dose + own + beta / keep * upstream;
        }
        out
    }

    fn fill(n: usize, agent: usize, shared: f64, own: f64) -> Vec<f64> {
        (0..n).map(|k| if k == agent { own } else { shared }).collect()
    }
}
