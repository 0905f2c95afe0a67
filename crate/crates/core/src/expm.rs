//! Matrix exponential for small dense matrices.
//!
//! Symmetric input goes through an eigendecomposition, everything else
//! through scaling and squaring of a truncated Taylor series.

use nalgebra::{DMatrix, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

/// Default truncation tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

fn validate(m: &DMatrix<f64>, tol: f64) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::Argument(format!(
            "matrix exponential needs a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("matrix has non-finite entries".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..i).all(|j| m[(i, j)] == m[(j, i)]))
}

/// `e^M`.
pub fn matrix_exponential(m: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    validate(m, tol)?;
    if is_symmetric(m) {
        Ok(symmetric_exp(m))
    } else {
        Ok(scaled_taylor_exp(m, tol))
    }
}

fn finite_eigen(m: &DMatrix<f64>) -> Option<SymmetricEigen<f64, Dyn>> {
    let eig = SymmetricEigen::new(m.clone());
    let ok = eig.eigenvalues.iter().chain(eig.eigenvectors.iter()).all(|v| v.is_finite());
    ok.then_some(eig)
}

// The eigensolver can return NaN on some reducible inputs; those fall back
// to the series.
fn symmetric_exp(m: &DMatrix<f64>) -> DMatrix<f64> {
    let e = match finite_eigen(m) {
        Some(eig) => {
            let v = &eig.eigenvectors;
            let mut scaled = v.clone();
            for (k, lambda) in eig.eigenvalues.iter().enumerate() {
                scaled.column_mut(k).scale_mut(lambda.exp());
            }
            scaled * v.transpose()
        }
        None => scaled_taylor_exp(m, DEFAULT_TOLERANCE),
    };
    (&e + e.transpose()) * 0.5
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled_taylor_exp(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let norm = norm1(m);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let a = m / 2f64.powi(squarings);
    let threshold = tol.min(f64::EPSILON);

    let mut sum = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for j in 1..=64 {
        term = &term * &a / j as f64;
        sum += &term;
        if norm1(&term) <= threshold * norm1(&sum).max(1.0) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Mean of the off-diagonal entries of `e^M`, over all ordered pairs
/// `i != j`. Zero for matrices smaller than 2x2.
pub fn offdiagonal_mean_of_exp(m: &DMatrix<f64>) -> Result<f64> {
    validate(m, DEFAULT_TOLERANCE)?;
    let n = m.nrows();
    if n < 2 {
        return Ok(0.0);
    }
    Ok(offdiagonal_sum_of_exp(m) / (n * (n - 1)) as f64)
}

/// `Σ_{i≠j} (e^M)_ij` for a validated square matrix.
pub(crate) fn offdiagonal_sum_of_exp(m: &DMatrix<f64>) -> f64 {
    if m.nrows() < 2 {
        return 0.0;
    }
    if is_symmetric(m) {
        if let Some(eig) = finite_eigen(m) {
            // Σ_{i≠j} e^M_ij = Σ_k e^{λ_k} ((1·v_k)² - |v_k|²)
            return eig
                .eigenvalues
                .iter()
                .zip(eig.eigenvectors.column_iter())
                .map(|(l, v)| {
                    let s = v.sum();
                    l.exp() * (s * s - v.norm_squared())
                })
                .sum();
        }
    }
    let e = scaled_taylor_exp(m, DEFAULT_TOLERANCE);
    e.sum() - e.trace()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn power_series(m: &DMatrix<f64>, terms: usize) -> DMatrix<f64> {
        let n = m.nrows();
        let mut sum = DMatrix::identity(n, n);
        let mut term = DMatrix::identity(n, n);
        for j in 1..terms {
            term = &term * m / j as f64;
            sum += &term;
        }
        sum
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let e = matrix_exponential(&DMatrix::zeros(4, 4), DEFAULT_TOLERANCE).unwrap();
        assert_eq!(e, DMatrix::identity(4, 4));
    }

    #[test]
    fn two_by_two_hyperbolic() {
        for w in [0.3, 1.0, 2.5] {
            let m = DMatrix::from_row_slice(2, 2, &[0.0, w, w, 0.0]);
            let e = matrix_exponential(&m, DEFAULT_TOLERANCE).unwrap();
            assert_abs_diff_eq!(e[(0, 0)], f64::cosh(w), epsilon = 1e-12);
            assert_abs_diff_eq!(e[(1, 1)], f64::cosh(w), epsilon = 1e-12);
            assert_abs_diff_eq!(e[(0, 1)], f64::sinh(w), epsilon = 1e-12);
            let series = power_series(&m, 60);
            assert!((e - series).abs().max() < 1e-12);
        }
    }

    #[test]
    fn diagonal_matrix() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, -1.5]));
        let e = matrix_exponential(&m, DEFAULT_TOLERANCE).unwrap();
        assert_abs_diff_eq!(e[(0, 0)], 0.5f64.exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(e[(1, 1)], (-1.5f64).exp(), epsilon = 1e-14);
        assert_eq!(e[(0, 1)], 0.0);
    }

    #[test]
    fn asymmetric_matches_power_series() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 1.2, 0.0, 0.3, 0.0, 2.0, 0.7, 0.0, -0.4]);
        let e = matrix_exponential(&m, DEFAULT_TOLERANCE).unwrap();
        let series = power_series(&m, 80);
        assert!((e - series).abs().max() < 1e-11);
    }

    #[test]
    fn symmetric_output_is_symmetric() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 1.0, 0.0, 0.5, 2.0, 0.5, 0.0]);
        let e = matrix_exponential(&m, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(e.clone(), e.transpose());
        assert!((e - power_series(&m, 80)).abs().max() < 1e-11);
    }

    #[test]
    fn rejects_non_finite() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, f64::NAN, 1.0, 0.0]);
        assert!(matches!(matrix_exponential(&m, 1e-12), Err(Error::Argument(_))));
        assert!(matrix_exponential(&DMatrix::zeros(2, 3), 1e-12).is_err());
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn reducible_matrix_stays_finite() {
        // eigensolver returns NaN here
        let mut m = DMatrix::zeros(10, 10);
        for (u, v, w) in [
            (0, 3, 0.55804460533111178),
            (1, 8, 1.26935500641596311),
            (2, 9, 0.45183267130931737),
            (4, 7, 0.04148221914299643),
            (6, 8, 2.48021810413147437),
        ] {
            m[(u, v)] = w;
            m[(v, u)] = w;
        }
        let e = matrix_exponential(&m, DEFAULT_TOLERANCE).unwrap();
        assert!((e.clone() - power_series(&m, 80)).abs().max() < 1e-11);
        let direct = (e.sum() - e.trace()) / 90.0;
        assert_abs_diff_eq!(offdiagonal_mean_of_exp(&m).unwrap(), direct, epsilon = 1e-12);
    }

    #[test]
    fn offdiagonal_mean_routes_agree() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 1.0, 0.0, 0.5, 2.0, 0.5, 0.0]);
        let e = power_series(&m, 80);
        let direct = (e.sum() - e.trace()) / 6.0;
        assert_abs_diff_eq!(offdiagonal_mean_of_exp(&m).unwrap(), direct, epsilon = 1e-11);
    }
}
