//! Overall-influence rankings from an influence matrix.
//!
//! CausalRank includes the diagonal of the influence matrix; AIR ignores it.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::network::{fmt_sig, CombinationMatrix};

pub const RANK_TOLERANCE: f64 = 1e-12;
pub const RANK_MAX_ITERATIONS: usize = 1_000_000;
/// Largest accepted `||C q - rho q||_inf`.
pub const RESIDUAL_BOUND: f64 = 1e-8;
const GAP_ITERATIONS: usize = 4_000;

/// Dominant eigenpair `C q = rho q` of an entrywise positive matrix, with
/// `q` summing to one.
pub fn causal_rank(influence: &Matrix) -> Result<(Vector, f64)> {
    check_positive(influence)?;
    let (q, rho) = linalg::power_iteration(influence, RANK_TOLERANCE, RANK_MAX_ITERATIONS)?;
    let residual = residual(influence, &q, rho);
    if residual.is_nan() || residual >= RESIDUAL_BOUND {
        return Err(Error::NoConvergence {
            iterations: RANK_MAX_ITERATIONS,
        });
    }
    Ok((q, rho))
}

/// `||C q - rho q||_inf`.
pub fn residual(influence: &Matrix, q: &Vector, rho: f64) -> f64 {
    (influence * q - q * rho).amax()
}

fn check_positive(m: &Matrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            what: "influence matrix columns",
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)].is_nan() || m[(i, j)] <= 0.0 {
                return Err(Error::NotPositive {
                    row: i + 1,
                    column: j + 1,
                    value: m[(i, j)],
                });
            }
        }
    }
    Ok(())
}

/// Average off-diagonal row entry.
pub fn air(influence: &Matrix) -> Vector {
    let k = influence.nrows();
    Vector::from_fn(k, |m, _| {
        let off: f64 = (0..k).filter(|&j| j != m).map(|j| influence[(m, j)]).sum();
        off / (k - 1) as f64
    })
}

/// `|lambda_2| / rho`, estimated by power iteration on the Wielandt-deflated
/// matrix `C - rho q p^T / (p^T q)` with `p` the left Perron vector. The
/// growth rate of the iterates is averaged so complex pairs are handled.
pub fn second_eigenvalue_ratio(influence: &Matrix, q: &Vector, rho: f64) -> Result<f64> {
    let (p, _) = linalg::power_iteration(&influence.transpose(), RANK_TOLERANCE, RANK_MAX_ITERATIONS)?;
    let deflated = influence - (q * p.transpose()) * (rho / p.dot(q));
    let k = influence.nrows();
    let mut x = Vector::from_fn(k, |i, _| 1.0 + (i as f64 * 0.7).sin());
    x /= x.norm();
    let burn = GAP_ITERATIONS / 2;
    let mut log_growth = 0.0;
    for it in 0..GAP_ITERATIONS {
        let y = &deflated * &x;
        let n = y.norm();
        if n == 0.0 || !n.is_finite() {
            return Ok(0.0);
        }
        if it >= burn {
            log_growth += n.ln();
        }
        x = y / n;
    }
    Ok((log_growth / (GAP_ITERATIONS - burn) as f64).exp() / rho)
}

/// Agents sorted by descending score; ties go to the smaller index.
pub fn ordering(scores: &Vector) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

/// Position (0 = first) of every agent in an ordering.
pub fn positions(order: &[usize]) -> Vec<usize> {
    let mut pos = vec![0; order.len()];
    for (p, &k) in order.iter().enumerate() {
        pos[k] = p;
    }
    pos
}

fn normalized(v: &Vector) -> Vector {
    v / v.sum()
}

/// Scores, orderings (0-based agent indices) and spectral diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct RankingResult {
    pub causal_rank: Vec<f64>,
    pub rho: f64,
    pub residual: f64,
    pub second_eigenvalue_ratio: f64,
    pub air: Vec<f64>,
    pub air_normalized: Vec<f64>,
    pub centrality: Option<Vec<f64>>,
    pub causal_rank_order: Vec<usize>,
    pub air_order: Vec<usize>,
    pub centrality_order: Option<Vec<usize>>,
}

impl RankingResult {
    /// `combination`, when given, adds network eigenvector centrality for
    /// comparison.
    pub fn compute(influence: &Matrix, combination: Option<&CombinationMatrix>) -> Result<Self> {
        let (q, rho) = causal_rank(influence)?;
        let residual = residual(influence, &q, rho);
        let gap = second_eigenvalue_ratio(influence, &q, rho)?;
        let air = air(influence);
        let centrality = combination.map(|a| a.perron_vector()).transpose()?;
        if let (Some(c), Some(a)) = (&centrality, combination) {
            if a.agents() != influence.nrows() {
                return Err(Error::DimensionMismatch {
                    what: "combination matrix size",
                    expected: influence.nrows(),
                    found: c.len(),
                });
            }
        }
        Ok(RankingResult {
            causal_rank_order: ordering(&q),
            air_order: ordering(&air),
            centrality_order: centrality.as_ref().map(ordering),
            air_normalized: normalized(&air).iter().copied().collect(),
            causal_rank: q.iter().copied().collect(),
            rho,
            residual,
            second_eigenvalue_ratio: gap,
            air: air.iter().copied().collect(),
            centrality: centrality.map(|c| c.iter().copied().collect()),
        })
    }

    pub fn agents(&self) -> usize {
        self.causal_rank.len()
    }

    /// `agent,causal_rank,air,centrality`, each scaled to sum to one, plus
    /// 1-based positions in each ordering. Centrality columns are empty when
    /// absent.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(
            w,
            "agent,causal_rank,air,centrality,causal_rank_position,air_position,centrality_position"
        )?;
        let cr_pos = positions(&self.causal_rank_order);
        let air_pos = positions(&self.air_order);
        let c_pos = self.centrality_order.as_deref().map(positions);
        for k in 0..self.agents() {
            let (c, cp) = match (&self.centrality, &c_pos) {
                (Some(c), Some(p)) => (fmt_sig(c[k]), (p[k] + 1).to_string()),
                _ => (String::new(), String::new()),
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                k + 1,
                fmt_sig(self.causal_rank[k]),
                fmt_sig(self.air_normalized[k]),
                c,
                cr_pos[k] + 1,
                air_pos[k] + 1,
                cp
            )?;
        }
        Ok(())
    }

    pub fn write_json(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}
