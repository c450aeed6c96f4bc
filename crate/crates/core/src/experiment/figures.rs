//! Data behind each figure, as plain tables.

use std::io::Write;

use serde::Serialize;

use super::montecarlo::{log_log_slope, pearson, run_replicas, summarize, Summary};
use crate::causal::{dose_independent_matrix, CausalModel, Dose, InfluenceMatrix};
use crate::dynamics::{run, Intervention, LearningParams, RunSpec};
use crate::error::{Error, Result};
use crate::gcl::{estimate_with_combination, GclSettings, ObservedTrace};
use crate::network::fmt_sig;
use crate::ranking::RankingResult;
use crate::scenario::Scenario;

/// Influence matrix of a scenario under `dose`.
pub fn influence_heatmap(scenario: &Scenario, params: LearningParams, dose: &Dose) -> Result<InfluenceMatrix> {
    let info = scenario.world.informativeness();
    let model = CausalModel::new(&scenario.combination, &info, params)?;
    InfluenceMatrix::compute(&model, dose)
}

/// CausalRank, AIR and centrality of the dose-independent matrix.
pub fn ranking_comparison(scenario: &Scenario, params: LearningParams) -> Result<RankingResult> {
    let info = scenario.world.informativeness();
    let model = CausalModel::new(&scenario.combination, &info, params)?;
    let c = dose_independent_matrix(&model)?;
    RankingResult::compute(&c.matrix, Some(&scenario.combination))
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaHopRow {
    pub delta: f64,
    pub hops: usize,
    /// 1-based labels of the agents at this directed distance.
    pub sources: Vec<usize>,
    pub mean_influence: f64,
}

/// Mean dose-independent influence on `target` from the agents at each
/// shortest directed distance `1..=max_hops`, for every discount in `deltas`.
/// Distances without any agent are skipped.
pub fn delta_hops(
    scenario: &Scenario,
    deltas: &[f64],
    beta: f64,
    target: usize,
    max_hops: usize,
) -> Result<Vec<DeltaHopRow>> {
    let dist = scenario.adjacency.hop_distances_to(target);
    let info = scenario.world.informativeness();
    let mut rows = Vec::new();
    for &delta in deltas {
        let params = LearningParams::new(delta, beta)?;
        let model = CausalModel::new(&scenario.combination, &info, params)?;
        let c = dose_independent_matrix(&model)?;
        for hops in 1..=max_hops {
            let sources: Vec<usize> = (0..dist.len()).filter(|&s| dist[s] == Some(hops)).collect();
            if sources.is_empty() {
                continue;
            }
            let mean = sources.iter().map(|&s| c.get(s, target)).sum::<f64>() / sources.len() as f64;
            rows.push(DeltaHopRow {
                delta,
                hops,
                sources: sources.iter().map(|s| s + 1).collect(),
                mean_influence: mean,
            });
        }
    }
    Ok(rows)
}

pub fn write_delta_hops(rows: &[DeltaHopRow], mut w: impl Write) -> Result<()> {
    writeln!(w, "delta,hops,sources,mean_influence")?;
    for r in rows {
        let sources: Vec<String> = r.sources.iter().map(|s| s.to_string()).collect();
        writeln!(
            w,
            "{},{},{},{}",
            r.delta,
            r.hops,
            sources.join(" "),
            fmt_sig(r.mean_influence)
        )?;
    }
    Ok(())
}

/// Mean absolute off-diagonal difference of two influence matrices.
pub fn mean_abs_error(truth: &InfluenceMatrix, estimate: &InfluenceMatrix) -> f64 {
    let k = truth.agents();
    let mut sum = 0.0;
    for m in 0..k {
        for j in (0..k).filter(|&j| j != m) {
            sum += (truth.get(m, j) - estimate.get(m, j)).abs();
        }
    }
    sum / (k * (k - 1)) as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct GclErrorReplica {
    pub horizon: usize,
    pub replica: u64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GclErrorTable {
    pub replicas: Vec<GclErrorReplica>,
    pub summary: Vec<(usize, Summary)>,
    /// Least-squares slope of log mean error against log horizon.
    pub slope: f64,
}

/// Estimation error of the dose-independent influence matrix against the
/// truth, for traces truncated at each horizon. The estimator is given the
/// exact combination matrix. Each replica simulates one trace of length
/// `max(horizons)` and reuses its prefixes.
pub fn gcl_error(
    scenario: &Scenario,
    params: LearningParams,
    horizons: &[usize],
    replicas: usize,
    seed: u64,
) -> Result<GclErrorTable> {
    let info = scenario.world.informativeness();
    let model = CausalModel::new(&scenario.combination, &info, params)?;
    let truth = InfluenceMatrix::compute(&model, &Dose::Uniform)?;
    let horizon = *horizons
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidParameter("no horizons".into()))?;
    let settings = GclSettings::new(params);
    let per_replica = run_replicas(replicas, |r| {
        let trace = run(
            &scenario.world,
            &scenario.combination,
            params,
            &RunSpec::sampled(horizon, seed, r),
            None,
        )?;
        let beliefs: Vec<_> = trace.psi.iter().map(|s| s.beliefs()).collect();
        horizons
            .iter()
            .map(|&m| {
                let observed = ObservedTrace::new(beliefs[..=m].to_vec())?;
                let est = estimate_with_combination(&observed, scenario.combination.clone(), &settings)?;
                Ok(GclErrorReplica {
                    horizon: m,
                    replica: r,
                    error: mean_abs_error(&truth, &est.influence),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let rows: Vec<GclErrorReplica> = per_replica.into_iter().flatten().collect();
    let summary: Vec<(usize, Summary)> = horizons
        .iter()
        .map(|&m| {
            let errs: Vec<f64> = rows.iter().filter(|r| r.horizon == m).map(|r| r.error).collect();
            (m, summarize(&errs))
        })
        .collect();
    let xs: Vec<f64> = summary.iter().map(|(m, _)| *m as f64).collect();
    let ys: Vec<f64> = summary.iter().map(|(_, s)| s.mean).collect();
    Ok(GclErrorTable {
        slope: log_log_slope(&xs, &ys),
        replicas: rows,
        summary,
    })
}

impl GclErrorTable {
    pub fn write_summary_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "horizon,replicas,mean_error,std_error,stderr")?;
        for (m, s) in &self.summary {
            writeln!(
                w,
                "{m},{},{},{},{}",
                s.n,
                fmt_sig(s.mean),
                fmt_sig(s.std),
                fmt_sig(s.stderr)
            )?;
        }
        Ok(())
    }

    pub fn write_replicas_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "horizon,replica,error")?;
        for r in &self.replicas {
            writeln!(w, "{},{},{}", r.horizon, r.replica, fmt_sig(r.error))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrReplica {
    pub correlation: f64,
    pub replica: u64,
    pub belief_correlation: f64,
    pub estimate_ab: f64,
    pub estimate_ba: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrRow {
    pub correlation: f64,
    pub belief_correlation: Summary,
    /// Closed-form effect of the first agent of the pair on the second.
    pub effect_ab: f64,
    pub effect_ba: f64,
    pub estimate_ab: Summary,
    pub estimate_ba: Summary,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrTable {
    /// 1-based labels.
    pub pair: [usize; 2],
    pub rows: Vec<CorrRow>,
    pub replicas: Vec<CorrReplica>,
}

/// Belief correlation versus causal effect between two agents whose
/// observation noise is correlated with each coefficient in `correlations`.
///
/// Belief correlation is the Pearson correlation of the two agents'
/// log-belief ratios (first wrong hypothesis) over `burn_in..=steps`.
#[allow(clippy::too_many_arguments)]
pub fn corr_vs_cause(
    scenario: &Scenario,
    params: LearningParams,
    correlations: &[f64],
    pair: [usize; 2],
    steps: usize,
    burn_in: usize,
    replicas: usize,
    seed: u64,
) -> Result<CorrTable> {
    let [a, b] = pair;
    if burn_in + 2 > steps {
        return Err(Error::InvalidParameter(format!(
            "burn-in {burn_in} leaves fewer than 2 points out of {steps} steps"
        )));
    }
    let t0 = scenario.world.true_state();
    let wrong = if t0 == 0 { 1 } else { 0 };
    let settings = GclSettings::new(params);
    let mut rows = Vec::new();
    let mut all = Vec::new();
    for &rho in correlations {
        let world = scenario.world.clone().with_pair_correlation(a, b, rho)?;
        let info = world.informativeness();
        let h = world.hypotheses();
        let model = CausalModel::new(&scenario.combination, &info, params)?;
        let effect_ab = model.effects(&Intervention::uniform(a, h))?[b];
        let effect_ba = model.effects(&Intervention::uniform(b, h))?[a];
        let reps = run_replicas(replicas, |r| {
            let trace = run(
                &world,
                &scenario.combination,
                params,
                &RunSpec::sampled(steps, seed, r),
                None,
            )?;
            let la: Vec<f64> = trace.lambda[burn_in..].iter().map(|l| l[(a, wrong)]).collect();
            let lb: Vec<f64> = trace.lambda[burn_in..].iter().map(|l| l[(b, wrong)]).collect();
            let observed = ObservedTrace::from_trace(&trace)?;
            let est = estimate_with_combination(&observed, scenario.combination.clone(), &settings)?;
            Ok(CorrReplica {
                correlation: rho,
                replica: r,
                belief_correlation: pearson(&la, &lb),
                estimate_ab: est.influence.get(a, b),
                estimate_ba: est.influence.get(b, a),
            })
        })?;
        let pick = |f: fn(&CorrReplica) -> f64| summarize(&reps.iter().map(f).collect::<Vec<_>>());
        rows.push(CorrRow {
            correlation: rho,
            belief_correlation: pick(|r| r.belief_correlation),
            effect_ab,
            effect_ba,
            estimate_ab: pick(|r| r.estimate_ab),
            estimate_ba: pick(|r| r.estimate_ba),
        });
        all.extend(reps);
    }
    Ok(CorrTable {
        pair: [a + 1, b + 1],
        rows,
        replicas: all,
    })
}

impl CorrTable {
    pub fn write_summary_csv(&self, mut w: impl Write) -> Result<()> {
        let [a, b] = self.pair;
        writeln!(
            w,
            "correlation,belief_correlation,belief_correlation_std,effect_{a}_{b},effect_{b}_{a},estimate_{a}_{b},estimate_{a}_{b}_std,estimate_{b}_{a},estimate_{b}_{a}_std"
        )?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                r.correlation,
                fmt_sig(r.belief_correlation.mean),
                fmt_sig(r.belief_correlation.std),
                fmt_sig(r.effect_ab),
                fmt_sig(r.effect_ba),
                fmt_sig(r.estimate_ab.mean),
                fmt_sig(r.estimate_ab.std),
                fmt_sig(r.estimate_ba.mean),
                fmt_sig(r.estimate_ba.std)
            )?;
        }
        Ok(())
    }

    pub fn write_replicas_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "correlation,replica,belief_correlation,estimate_ab,estimate_ba")?;
        for r in &self.replicas {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.correlation,
                r.replica,
                fmt_sig(r.belief_correlation),
                fmt_sig(r.estimate_ab),
                fmt_sig(r.estimate_ba)
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Adjacency, CombinationRule};
    use crate::world::WorldModel;

    fn silent_pair() -> Scenario {
        let adj = Adjacency::from_edges(2, [(0, 0), (1, 1), (0, 1), (1, 0)]).unwrap();
        Scenario::new(
            adj,
            CombinationRule::Averaging,
            WorldModel::binary(&[0.0, 0.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_informativeness_heatmap_reflects_the_dose() {
        let s = silent_pair();
        let c = influence_heatmap(&s, LearningParams::nbsl(), &Dose::Fixed(vec![0.3, 0.7])).unwrap();
        assert!((c.get(0, 1) - 0.7).abs() < 1e-15);
        assert!((c.get(1, 0) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn delta_hops_skips_empty_distances() {
        let s = silent_pair();
        let s = Scenario {
            world: WorldModel::binary(&[0.5, 0.2]).unwrap(),
            ..s
        };
        let rows = delta_hops(&s, &[0.1, 0.2], 1.0, 0, 3).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.hops == 1 && r.sources == vec![2]));
    }
}
