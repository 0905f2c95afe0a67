//! Local differential entropy of multivariate Gaussians (in nats) and its
//! backbone over subsets of dimensions.
//!
//! Local differential entropy can be negative and the induced set function
//! need not be monotone, so spectra from this module may carry violations.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::engine::{backbone, BackboneConfig, BackboneSpectrum, SetFunction};
use crate::error::{Error, Result};
use crate::measures::average_spectra;
use crate::subset::{SubsetMask, MAX_GROUND_SIZE};

/// Absolute tolerance on covariance symmetry.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct GaussianModel {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    cholesky: Cholesky<f64, Dyn>,
    log_det: f64,
}

impl GaussianModel {
    pub fn new(mean: Vec<f64>, covariance: Vec<Vec<f64>>) -> Result<Self> {
        let k = mean.len();
        if k == 0 || k > MAX_GROUND_SIZE {
            return Err(Error::Argument(format!(
                "gaussian dimension must lie in 1..={MAX_GROUND_SIZE}, got {k}"
            )));
        }
        if covariance.len() != k || covariance.iter().any(|r| r.len() != k) {
            return Err(Error::Argument(format!("covariance must be {k}x{k}")));
        }
        let cov = DMatrix::from_fn(k, k, |i, j| covariance[i][j]);
        Self::from_matrix(DVector::from_vec(mean), cov)
    }

    pub fn from_matrix(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        if mean.iter().chain(covariance.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Argument("gaussian parameters must be finite".into()));
        }
        let k = mean.len();
        for i in 0..k {
            for j in 0..i {
                if (covariance[(i, j)] - covariance[(j, i)]).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::Domain(format!(
                        "covariance is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let cholesky = Cholesky::new(covariance.clone())
            .ok_or_else(|| Error::Domain("covariance is not positive definite".into()))?;
        let log_det = 2.0 * cholesky.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        Ok(Self {
            mean,
            covariance,
            cholesky,
            log_det,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// `-ln` of the density at `point`.
    pub fn local_entropy(&self, point: &[f64]) -> Result<f64> {
        let k = self.dim();
        if point.len() != k {
            return Err(Error::Argument(format!(
                "point has dimension {}, model has {k}",
                point.len()
            )));
        }
        let diff = DVector::from_column_slice(point) - &self.mean;
        let solved = self.cholesky.solve(&diff);
        let mahalanobis = diff.dot(&solved);
        Ok(0.5 * (k as f64 * (2.0 * PI).ln() + self.log_det + mahalanobis))
    }

    /// Marginal over the dimensions in `keep`.
    pub fn marginal(&self, keep: SubsetMask) -> Result<GaussianModel> {
        if keep.ground_size() != self.dim() || keep.is_empty() {
            return Err(Error::Argument(
                "marginal keep-set must be a non-empty subset of the model's dimensions".into(),
            ));
        }
        let idx = keep.to_vec();
        let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i]));
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.covariance[(idx[a], idx[b])]);
        Self::from_matrix(mean, cov)
    }
}

/// Gaussian local entropy of one point as a function of surviving dimensions.
pub struct GaussianLocalEntropy<'a> {
    model: &'a GaussianModel,
    point: &'a [f64],
    full: f64,
}

impl<'a> GaussianLocalEntropy<'a> {
    pub fn new(model: &'a GaussianModel, point: &'a [f64]) -> Result<Self> {
        let full = model.local_entropy(point)?;
        Ok(Self { model, point, full })
    }
}

impl SetFunction for GaussianLocalEntropy<'_> {
    fn ground_size(&self) -> usize {
        self.model.dim()
    }

    fn label(&self) -> String {
        "gaussian local entropy".into()
    }

    fn value(&self, survivors: SubsetMask) -> Result<f64> {
        if survivors.is_empty() {
            return Ok(0.0);
        }
        if survivors.len() == self.model.dim() {
            return Ok(self.full);
        }
        let sub: Vec<f64> = survivors.indices().map(|i| self.point[i]).collect();
        self.model.marginal(survivors)?.local_entropy(&sub)
    }

    fn loss(&self, failed: SubsetMask) -> Result<f64> {
        Ok(self.full - self.value(failed.complement())?)
    }
}

pub fn gaussian_entropy_backbone_local(
    model: &GaussianModel,
    point: &[f64],
    config: &BackboneConfig,
) -> Result<BackboneSpectrum> {
    backbone(&GaussianLocalEntropy::new(model, point)?, config)
}

/// Local spectra averaged with equal weight over the supplied points.
pub fn gaussian_entropy_backbone_expected(
    model: &GaussianModel,
    points: &[Vec<f64>],
    config: &BackboneConfig,
) -> Result<BackboneSpectrum> {
    if points.is_empty() {
        return Err(Error::Argument("at least one sample point is required".into()));
    }
    let w = 1.0 / points.len() as f64;
    let weighted: Vec<(f64, BackboneSpectrum)> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| Ok((w, gaussian_entropy_backbone_local(model, p, &config.stream(i as u64))?)))
        .collect::<Result<_>>()?;
    Ok(average_spectra(&weighted, config, model.dim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::AggregatorKind;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::E;

    #[test]
    fn standard_normal_at_mean() {
        let m = GaussianModel::new(vec![0.0], vec![vec![1.0]]).unwrap();
        assert_abs_diff_eq!(m.local_entropy(&[0.0]).unwrap(), 0.918938533204672, epsilon = 1e-12);
    }

    #[test]
    fn narrow_normal_is_negative() {
        let var = 1.0 / (2.0 * PI * E);
        let m = GaussianModel::new(vec![3.0], vec![vec![var]]).unwrap();
        assert_abs_diff_eq!(m.local_entropy(&[3.0]).unwrap(), -0.5, epsilon = 1e-12);
    }

    #[test]
    fn bivariate_identity_at_mean() {
        let m = GaussianModel::new(vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_abs_diff_eq!(m.local_entropy(&[0.0, 0.0]).unwrap(), (2.0 * PI).ln(), epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_covariance() {
        let not_pd = GaussianModel::new(vec![0.0, 0.0], vec![vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(not_pd, Err(Error::Domain(_))));
        let asym = GaussianModel::new(vec![0.0, 0.0], vec![vec![1.0, 0.1], vec![0.2, 1.0]]);
        assert!(matches!(asym, Err(Error::Domain(_))));
    }

    #[test]
    fn independent_dims_backbone_sums_to_entropy() {
        let m = GaussianModel::new(
            vec![0.0, 1.0, -1.0],
            vec![vec![2.0, 0.0, 0.0], vec![0.0, 0.5, 0.0], vec![0.0, 0.0, 1.0]],
        )
        .unwrap();
        let point = [0.3, 0.7, -2.0];
        let s = gaussian_entropy_backbone_local(&m, &point, &BackboneConfig::exact(AggregatorKind::Mean))
            .unwrap();
        assert_abs_diff_eq!(s.total(), m.local_entropy(&point).unwrap(), epsilon = 1e-12);
    }
}
