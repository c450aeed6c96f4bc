//! Estimation of the true state, informativeness and causal effects from a
//! trace of shared beliefs plus the network adjacency.

use std::collections::BTreeMap;
use std::io::Read;

use log::{debug, info};
use serde::Serialize;

use crate::causal::{CausalModel, Dose, InfluenceMatrix};
use crate::dynamics::{LearningParams, Trace};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::network::{Adjacency, CombinationMatrix, CombinationRule};
use crate::world::Informativeness;

/// Ingested beliefs are clamped into `[CLAMP_FLOOR, 1]`.
pub const CLAMP_FLOOR: f64 = 1e-12;
/// Allowed deviation of an ingested belief row sum from one.
pub const INGEST_TOLERANCE: f64 = 1e-9;

/// Shared beliefs `psi_0, ..., psi_M`, each `K x H`.
#[derive(Debug, Clone)]
pub struct ObservedTrace {
    beliefs: Vec<Matrix>,
    clamped: usize,
}

impl ObservedTrace {
    /// Validates, clamps and renormalizes every belief row.
    pub fn new(beliefs: Vec<Matrix>) -> Result<Self> {
        if beliefs.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "a trace needs at least 2 time points, got {}",
                beliefs.len()
            )));
        }
        let (k, h) = beliefs[0].shape();
        if h < 2 {
            return Err(Error::InvalidBelief("beliefs need at least 2 hypotheses".into()));
        }
        let mut clamped = 0;
        let mut out = Vec::with_capacity(beliefs.len());
        for (t, mut m) in beliefs.into_iter().enumerate() {
            if m.shape() != (k, h) {
                return Err(Error::DimensionMismatch {
                    what: "belief matrix rows at some time step",
                    expected: k,
                    found: m.nrows(),
                });
            }
            for (agent, mut row) in m.row_iter_mut().enumerate() {
                if row.iter().any(|x| x.is_nan()) {
                    return Err(Error::DegenerateBelief(format!(
                        "time {t}, agent {}: NaN entry",
                        agent + 1
                    )));
                }
                if row.iter().any(|&x| x < 0.0) {
                    return Err(Error::InvalidBelief(format!(
                        "time {t}, agent {}: negative entry",
                        agent + 1
                    )));
                }
                let s = row.sum();
                if (s - 1.0).abs() > INGEST_TOLERANCE {
                    return Err(Error::InvalidBelief(format!(
                        "time {t}, agent {}: beliefs sum to {s}",
                        agent + 1
                    )));
                }
                for x in row.iter_mut() {
                    if *x < CLAMP_FLOOR || *x > 1.0 {
                        clamped += 1;
                        *x = x.clamp(CLAMP_FLOOR, 1.0);
                    }
                }
                let s = row.sum();
                row /= s;
            }
            out.push(m);
        }
        if clamped > 0 {
            info!("clamped {clamped} belief entries into [{CLAMP_FLOOR:e}, 1]");
        }
        Ok(ObservedTrace { beliefs: out, clamped })
    }

    /// Shared beliefs of a simulated trace.
    pub fn from_trace(trace: &Trace) -> Result<Self> {
        Self::new(trace.psi.iter().map(|s| s.beliefs()).collect())
    }

    /// Long CSV `time,agent,hypothesis,value` with 1-based agent and
    /// hypothesis labels and times `0..=M`, as written for simulated traces.
    pub fn read_long_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut cells: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
        let (mut tmax, mut kmax, mut hmax) = (0, 0, 0);
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            if rec.len() != 4 {
                return Err(Error::parse(
                    format!("trace csv line {line}"),
                    format!("expected 4 fields, found {}", rec.len()),
                ));
            }
            let t = parse_index(&rec[0], line, "time", 0)?;
            let k = parse_index(&rec[1], line, "agent", 1)?;
            let h = parse_index(&rec[2], line, "hypothesis", 1)?;
            let v = parse_value(&rec[3], line, 4)?;
            if cells.insert((t, k - 1, h - 1), v).is_some() {
                return Err(Error::parse(
                    format!("trace csv line {line}"),
                    format!("duplicate entry for time {t}, agent {k}, hypothesis {h}"),
                ));
            }
            tmax = tmax.max(t);
            kmax = kmax.max(k);
            hmax = hmax.max(h);
        }
        if cells.len() != (tmax + 1) * kmax * hmax {
            return Err(Error::parse(
                "trace csv",
                format!(
                    "expected a full grid of {} times x {kmax} agents x {hmax} hypotheses, found {} entries",
                    tmax + 1,
                    cells.len()
                ),
            ));
        }
        let beliefs = (0..=tmax)
            .map(|t| Matrix::from_fn(kmax, hmax, |k, h| cells[&(t, k, h)]))
            .collect();
        Self::new(beliefs)
    }

    /// Wide CSV `time,agent,belief_1,...,belief_H`, one row per agent and time.
    pub fn read_wide_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let h = rdr.headers()?.len().checked_sub(2).filter(|&h| h >= 2).ok_or_else(|| {
            Error::parse(
                "wide trace csv header",
                "expected time,agent and at least 2 belief columns",
            )
        })?;
        let mut rows: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
        let (mut tmax, mut kmax) = (0, 0);
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            if rec.len() != h + 2 {
                return Err(Error::parse(
                    format!("wide trace csv line {line}"),
                    format!("expected {} fields, found {}", h + 2, rec.len()),
                ));
            }
            let t = parse_index(&rec[0], line, "time", 0)?;
            let k = parse_index(&rec[1], line, "agent", 1)?;
            let values = (0..h)
                .map(|j| parse_value(&rec[j + 2], line, j + 3))
                .collect::<Result<Vec<_>>>()?;
            if rows.insert((t, k - 1), values).is_some() {
                return Err(Error::parse(
                    format!("wide trace csv line {line}"),
                    format!("duplicate row for time {t}, agent {k}"),
                ));
            }
            tmax = tmax.max(t);
            kmax = kmax.max(k);
        }
        if rows.len() != (tmax + 1) * kmax {
            return Err(Error::parse(
                "wide trace csv",
                format!("expected {} rows, found {}", (tmax + 1) * kmax, rows.len()),
            ));
        }
        let beliefs = (0..=tmax)
            .map(|t| Matrix::from_fn(kmax, h, |k, j| rows[&(t, k)][j]))
            .collect();
        Self::new(beliefs)
    }

    pub fn agents(&self) -> usize {
        self.beliefs[0].nrows()
    }

    pub fn hypotheses(&self) -> usize {
        self.beliefs[0].ncols()
    }

    /// `M`, the index of the last time step.
    pub fn horizon(&self) -> usize {
        self.beliefs.len() - 1
    }

    pub fn beliefs(&self) -> &[Matrix] {
        &self.beliefs
    }

    /// Number of entries moved by clamping during ingestion.
    pub fn clamped(&self) -> usize {
        self.clamped
    }

    /// `Lambda_i[k][j] = log(psi_k(reference) / psi_k(j))`.
    pub fn log_ratios(&self, time: usize, reference: usize) -> Matrix {
        let b = &self.beliefs[time];
        Matrix::from_fn(b.nrows(), b.ncols(), |k, j| (b[(k, reference)] / b[(k, j)]).ln())
    }
}

fn parse_index(field: &str, line: usize, what: &str, min: usize) -> Result<usize> {
    field
        .parse::<usize>()
        .ok()
        .filter(|&v| v >= min)
        .ok_or_else(|| Error::parse(format!("trace csv line {line}"), format!("invalid {what}: {field:?}")))
}

fn parse_value(field: &str, line: usize, column: usize) -> Result<f64> {
    field.parse::<f64>().map_err(|_| {
        Error::parse(
            format!("trace csv line {line}, column {column}"),
            format!("not a number: {field:?}"),
        )
    })
}

/// Hypothesis with the largest total final belief; ties go to the lowest index.
pub fn estimate_true_state(trace: &ObservedTrace) -> usize {
    let last = &trace.beliefs[trace.horizon()];
    let totals: Vec<f64> = last.column_iter().map(|c| c.sum()).collect();
    let mut best = 0;
    for (h, &t) in totals.iter().enumerate() {
        if t > totals[best] {
            best = h;
        }
    }
    best
}

/// Informativeness estimate and how many negative entries were floored at 0.
#[derive(Debug, Clone)]
pub struct InformativenessEstimate {
    pub informativeness: Informativeness,
    pub floored: usize,
    pub samples: usize,
}

/// `D = (1 / (beta n)) sum_i (Lambda_i - (1-delta) A^T Lambda_{i-1})` over
/// `i = burn_in + 1 ..= M`, with negative entries floored at zero.
pub fn estimate_informativeness(
    trace: &ObservedTrace,
    combination: &CombinationMatrix,
    params: &LearningParams,
    true_state: usize,
    burn_in: usize,
) -> Result<InformativenessEstimate> {
    if combination.agents() != trace.agents() {
        return Err(Error::DimensionMismatch {
            what: "combination matrix size",
            expected: trace.agents(),
            found: combination.agents(),
        });
    }
    let m = trace.horizon();
    if burn_in >= m {
        return Err(Error::InvalidParameter(format!(
            "burn-in {burn_in} leaves no samples out of {m}"
        )));
    }
    let keep = 1.0 - params.delta;
    let mut sum = Matrix::zeros(trace.agents(), trace.hypotheses());
    let mut prev = trace.log_ratios(burn_in, true_state);
    for i in burn_in + 1..=m {
        let cur = trace.log_ratios(i, true_state);
        sum += &cur - combination.matrix().tr_mul(&prev) * keep;
        prev = cur;
    }
    let samples = m - burn_in;
    let mut d = sum / (params.beta * samples as f64);
    let mut floored = 0;
    for x in d.iter_mut() {
        if *x < 0.0 {
            floored += 1;
            *x = 0.0;
        }
    }
    if floored > 0 {
        debug!("floored {floored} negative informativeness estimates at 0");
    }
    Ok(InformativenessEstimate {
        informativeness: Informativeness::new(d, true_state)?,
        floored,
        samples,
    })
}

/// Estimator settings. `delta` and `beta` are taken as known.
#[derive(Debug, Clone)]
pub struct GclSettings {
    pub params: LearningParams,
    pub rule: CombinationRule,
    pub burn_in: usize,
    pub dose: Dose,
}

impl GclSettings {
    pub fn new(params: LearningParams) -> Self {
        GclSettings {
            params,
            rule: CombinationRule::Averaging,
            burn_in: 0,
            dose: Dose::Uniform,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GclReport {
    /// 1-based.
    pub true_state: usize,
    pub samples: usize,
    pub clamped: usize,
    pub floored: usize,
    pub informativeness: Vec<Vec<f64>>,
    pub influence: InfluenceMatrix,
}

#[derive(Debug, Clone)]
pub struct GclEstimate {
    pub true_state: usize,
    pub combination: CombinationMatrix,
    pub informativeness: Informativeness,
    pub influence: InfluenceMatrix,
    pub samples: usize,
    pub clamped: usize,
    pub floored: usize,
}

impl GclEstimate {
    pub fn report(&self) -> GclReport {
        GclReport {
            true_state: self.true_state + 1,
            samples: self.samples,
            clamped: self.clamped,
            floored: self.floored,
            informativeness: self
                .informativeness
                .matrix()
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            influence: self.influence.clone(),
        }
    }
}

/// Full pipeline: true state, combination matrix from the adjacency,
/// informativeness, then the influence matrix under `settings.dose`.
pub fn estimate_causal_effects(
    trace: &ObservedTrace,
    adjacency: &Adjacency,
    settings: &GclSettings,
) -> Result<GclEstimate> {
    let combination = CombinationMatrix::from_rule(adjacency, settings.rule)?;
    estimate_with_combination(trace, combination, settings)
}

/// Pipeline with a given combination matrix estimate.
pub fn estimate_with_combination(
    trace: &ObservedTrace,
    combination: CombinationMatrix,
    settings: &GclSettings,
) -> Result<GclEstimate> {
    let true_state = estimate_true_state(trace);
    let est = estimate_informativeness(trace, &combination, &settings.params, true_state, settings.burn_in)?;
    let model = CausalModel::new(&combination, &est.informativeness, settings.params)?;
    let influence = InfluenceMatrix::compute(&model, &settings.dose)?;
    Ok(GclEstimate {
        true_state,
        informativeness: est.informativeness,
        influence,
        combination,
        samples: est.samples,
        clamped: trace.clamped(),
        floored: est.floored,
    })
}
