//! Hypotheses, unit-variance Gaussian likelihoods and sampled observations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

const SYMMETRY_TOLERANCE: f64 = 1e-12;
const PSD_TOLERANCE: f64 = 1e-10;

/// The inference problem shared by all agents.
///
/// Agent `k` observes `N(means[k][true_state], 1)` marginally; noise across
/// agents is coupled through `correlation`.
#[derive(Debug, Clone)]
pub struct WorldModel {
    means: Matrix,
    true_state: usize,
    correlation: Matrix,
    noise_factor: Matrix,
}

impl WorldModel {
    /// `means` is `K x H`: the observation mean of each agent under each hypothesis.
    pub fn new(means: Matrix, true_state: usize) -> Result<Self> {
        let (k, h) = means.shape();
        if h < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 hypotheses, got {h}")));
        }
        if k == 0 {
            return Err(Error::TooFewAgents(0));
        }
        if true_state >= h {
            return Err(Error::DimensionMismatch {
                what: "true state index",
                expected: h,
                found: true_state + 1,
            });
        }
        if means.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("observation means must be finite".into()));
        }
        Ok(WorldModel {
            means,
            true_state,
            correlation: Matrix::identity(k, k),
            noise_factor: Matrix::identity(k, k),
        })
    }

    /// Binary-hypothesis world where every agent has mean 0 under the truth
    /// (hypothesis 0) and `alternative_means[k]` under the other hypothesis.
    pub fn binary(alternative_means: &[f64]) -> Result<Self> {
        let k = alternative_means.len();
        Self::new(
            Matrix::from_fn(k, 2, |r, c| if c == 0 { 0.0 } else { alternative_means[r] }),
            0,
        )
    }

    /// Replaces the cross-agent noise correlation. Must be symmetric PSD with
    /// unit diagonal; no repair is attempted.
    pub fn with_correlation(mut self, correlation: Matrix) -> Result<Self> {
        let k = self.agents();
        if correlation.shape() != (k, k) {
            return Err(Error::DimensionMismatch {
                what: "correlation matrix size",
                expected: k,
                found: correlation.nrows(),
            });
        }
        for i in 0..k {
            if (correlation[(i, i)] - 1.0).abs() > SYMMETRY_TOLERANCE {
                return Err(Error::NotPositiveSemidefinite(format!(
                    "diagonal entry {} is {} (must be 1)",
                    i + 1,
                    correlation[(i, i)]
                )));
            }
            for j in 0..i {
                if (correlation[(i, j)] - correlation[(j, i)]).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::NotPositiveSemidefinite(format!(
                        "not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        self.noise_factor = psd_cholesky(&correlation)?;
        self.correlation = correlation;
        Ok(self)
    }

    /// Identity correlation except for one symmetric pair.
    pub fn with_pair_correlation(self, a: usize, b: usize, coefficient: f64) -> Result<Self> {
        let mut c = Matrix::identity(self.agents(), self.agents());
        if a >= self.agents() || b >= self.agents() || a == b {
            return Err(Error::InvalidParameter(format!(
                "invalid correlated pair ({}, {})",
                a + 1,
                b + 1
            )));
        }
        c[(a, b)] = coefficient;
        c[(b, a)] = coefficient;
        self.with_correlation(c)
    }

    pub fn agents(&self) -> usize {
        self.means.nrows()
    }

    pub fn hypotheses(&self) -> usize {
        self.means.ncols()
    }

    pub fn true_state(&self) -> usize {
        self.true_state
    }

    pub fn means(&self) -> &Matrix {
        &self.means
    }

    pub fn correlation(&self) -> &Matrix {
        &self.correlation
    }

    /// KL divergences `d_k(theta) = (nu_k(true) - nu_k(theta))^2 / 2`.
    pub fn informativeness(&self) -> Informativeness {
        let t = self.true_state;
        let values = Matrix::from_fn(self.agents(), self.hypotheses(), |k, h| {
            let diff = self.means[(k, t)] - self.means[(k, h)];
            0.5 * diff * diff
        });
        Informativeness { values, true_state: t }
    }

    /// Log-likelihood ratios of one observation vector against the truth.
    pub fn llr(&self, observation: &[f64]) -> LogLikelihoodRatios {
        let t = self.true_state;
        let values = Matrix::from_fn(self.agents(), self.hypotheses(), |k, h| {
            let (m0, m1) = (self.means[(k, t)], self.means[(k, h)]);
            (m0 - m1) * observation[k] - 0.5 * (m0 * m0 - m1 * m1)
        });
        LogLikelihoodRatios(values)
    }

    /// Mean observation under the truth.
    pub fn mean_observation(&self) -> Vec<f64> {
        self.means.column(self.true_state).iter().copied().collect()
    }

    /// Observation at `time` for a given replica; a pure function of
    /// `(seed, replica, time)`.
    pub fn sample(&self, seed: u64, replica: u64, time: u64) -> Vec<f64> {
        let mut rng = counter_rng(seed, replica, time);
        let z: Vec<f64> = (0..self.agents()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let t = self.true_state;
        (0..self.agents())
            .map(|k| {
                let noise: f64 = (0..=k).map(|j| self.noise_factor[(k, j)] * z[j]).sum();
                self.means[(k, t)] + noise
            })
            .collect()
    }

    pub fn observation(&self, source: ObservationSource, time: u64) -> Vec<f64> {
        match source {
            ObservationSource::Sampled { seed, replica } => self.sample(seed, replica, time),
            ObservationSource::Mean => self.mean_observation(),
        }
    }
}

/// Where a run gets its observations from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationSource {
    Sampled {
        seed: u64,
        replica: u64,
    },
    /// Every observation equals its mean under the truth (noiseless runs).
    Mean,
}

fn counter_rng(seed: u64, replica: u64, time: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&replica.to_le_bytes());
    key[16..24].copy_from_slice(&time.to_le_bytes());
    key[24..].copy_from_slice(b"observe\0");
    ChaCha8Rng::from_seed(key)
}

/// Lower-triangular factor `L` with `L L^T = c` for a PSD `c`. Zero pivots
/// are allowed as long as the remaining column is also zero.
fn psd_cholesky(c: &Matrix) -> Result<Matrix> {
    let n = c.nrows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let pivot = c[(j, j)] - (0..j).map(|p| l[(j, p)] * l[(j, p)]).sum::<f64>();
        if pivot < -PSD_TOLERANCE {
            return Err(Error::NotPositiveSemidefinite(format!(
                "negative pivot {pivot:.3e} at row {}",
                j + 1
            )));
        }
        if pivot <= PSD_TOLERANCE {
            for i in j + 1..n {
                let rest = c[(i, j)] - (0..j).map(|p| l[(i, p)] * l[(j, p)]).sum::<f64>();
                if rest.abs() > 1e-8 {
                    return Err(Error::NotPositiveSemidefinite(format!(
                        "zero pivot at row {} with nonzero coupling to row {}",
                        j + 1,
                        i + 1
                    )));
                }
            }
            continue;
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let rest = c[(i, j)] - (0..j).map(|p| l[(i, p)] * l[(j, p)]).sum::<f64>();
            l[(i, j)] = rest / d;
        }
    }
    Ok(l)
}

/// `K x H` matrix of KL divergences; the true-state column is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Informativeness {
    values: Matrix,
    true_state: usize,
}

impl Informativeness {
    /// Wraps an estimated or hand-specified matrix. Entries must be finite and
    /// nonnegative, and the true-state column zero.
    pub fn new(values: Matrix, true_state: usize) -> Result<Self> {
        if true_state >= values.ncols() {
            return Err(Error::DimensionMismatch {
                what: "true state index",
                expected: values.ncols(),
                found: true_state + 1,
            });
        }
        if values.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidParameter(
                "informativeness entries must be finite and nonnegative".into(),
            ));
        }
        if values.column(true_state).iter().any(|&x| x != 0.0) {
            return Err(Error::InvalidParameter(
                "informativeness of the true state must be zero".into(),
            ));
        }
        Ok(Informativeness { values, true_state })
    }

    /// Binary-hypothesis informativeness with the truth at index 0.
    pub fn binary(d: &[f64]) -> Result<Self> {
        Self::new(Matrix::from_fn(d.len(), 2, |k, h| if h == 0 { 0.0 } else { d[k] }), 0)
    }

    pub fn agents(&self) -> usize {
        self.values.nrows()
    }

    pub fn hypotheses(&self) -> usize {
        self.values.ncols()
    }

    pub fn true_state(&self) -> usize {
        self.true_state
    }

    pub fn matrix(&self) -> &Matrix {
        &self.values
    }

    pub fn get(&self, agent: usize, hypothesis: usize) -> f64 {
        self.values[(agent, hypothesis)]
    }

    /// Column for one hypothesis as a vector over agents.
    pub fn column(&self, hypothesis: usize) -> crate::linalg::Vector {
        self.values.column(hypothesis).into_owned()
    }
}

/// `K x H` log-likelihood ratios for a single time step; the true-state
/// column is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLikelihoodRatios(pub Matrix);

impl LogLikelihoodRatios {
    pub fn zeros(agents: usize, hypotheses: usize) -> Self {
        LogLikelihoodRatios(Matrix::zeros(agents, hypotheses))
    }

    pub fn get(&self, agent: usize, hypothesis: usize) -> f64 {
        self.0[(agent, hypothesis)]
    }
}
