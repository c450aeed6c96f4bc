//! Dense linear algebra helpers on top of `nalgebra`.

use log::warn;
use nalgebra::{DMatrix, DVector, Schur, LU};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Condition numbers above this are reported as a warning.
pub const CONDITION_WARNING: f64 = 1e12;

/// LU factorization (partial pivoting) of a square system matrix with a
/// 1-norm condition estimate.
pub struct LinearSystem {
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    condition: f64,
}

impl LinearSystem {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                what: "system matrix columns",
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let norm = one_norm(&matrix);
        let lu = LU::new(matrix);
        let inverse = lu
            .try_inverse()
            .ok_or_else(|| Error::SingularSystem("LU factorization hit a zero pivot".into()))?;
        let condition = norm * one_norm(&inverse);
        if !condition.is_finite() {
            return Err(Error::SingularSystem(format!("condition estimate is {condition}")));
        }
        if condition > CONDITION_WARNING {
            warn!("ill-conditioned linear system (1-norm condition ~ {condition:.3e})");
        }
        Ok(LinearSystem { lu, condition })
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn solve(&self, rhs: &Vector) -> Result<Vector> {
        self.lu
            .solve(rhs)
            .ok_or_else(|| Error::SingularSystem("LU solve failed".into()))
    }

    pub fn solve_matrix(&self, rhs: &Matrix) -> Result<Matrix> {
        self.lu
            .solve(rhs)
            .ok_or_else(|| Error::SingularSystem("LU solve failed".into()))
    }
}

fn one_norm(m: &Matrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest eigenvalue magnitude, from the real Schur form.
pub fn spectral_radius(m: &Matrix) -> f64 {
    assert!(m.is_square(), "spectral radius of a non-square matrix");
    if m.nrows() == 0 {
        return 0.0;
    }
    let schur = Schur::try_new(m.clone(), 1e-15, 100_000).unwrap_or_else(|| Schur::new(m.clone()));
    schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Dominant eigenpair of a nonnegative primitive matrix by power iteration
/// from the uniform vector. The vector is normalized to sum one and the
/// iteration stops when successive iterates differ by less than `tolerance`
/// in the max norm.
pub fn power_iteration(m: &Matrix, tolerance: f64, max_iterations: usize) -> Result<(Vector, f64)> {
    let n = m.nrows();
    let mut v = Vector::from_element(n, 1.0 / n as f64);
    for _ in 0..max_iterations {
        let mut next = m * &v;
        let value = next.sum();
        next /= value;
        let change = max_abs((&next - &v).iter().copied());
        v = next;
        if change < tolerance {
            let value = (m * &v).sum();
            return Ok((v, value));
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iterations,
    })
}

/// Copy of `m` without row `skip_row` and column `skip_col`.
pub fn remove_row_column(m: &Matrix, skip_row: usize, skip_col: usize) -> Matrix {
    m.clone().remove_row(skip_row).remove_column(skip_col)
}

pub(crate) fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().map(f64::abs).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let sys = LinearSystem::new(a).unwrap();
        let x = sys.solve(&Vector::from_vec(vec![3.0, 5.0])).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14);
        assert!((x[1] - 1.4).abs() < 1e-14);
        assert!(sys.condition() > 1.0);
    }

    #[test]
    fn singular_system_is_rejected() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(LinearSystem::new(a), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn power_iteration_on_two_by_two() {
        let a = Matrix::from_row_slice(2, 2, &[0.5, 0.8, 0.2, 0.5]);
        let (q, rho) = power_iteration(&a, 1e-14, 10_000).unwrap();
        assert!((q[0] / q[1] - 2.0).abs() < 1e-12);
        assert!((rho - 0.9).abs() < 1e-12);
    }

    #[test]
    fn radius_of_rotation_is_one() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((spectral_radius(&a) - 1.0).abs() < 1e-12);
        assert_eq!(spectral_radius(&Matrix::zeros(3, 3)), 0.0);
    }
}
