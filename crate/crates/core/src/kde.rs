//! Product-Gaussian kernel density estimation with Scott's rule.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::points::PointSet;

/// Gaussian KDE with a diagonal bandwidth `h_j = sigma_j M^(-1/(d+4))`.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeModel {
    samples: PointSet,
    bandwidths: Vec<f64>,
    // -1 / (2 h_j^2)
    neg_half_inv_var: Vec<f64>,
    // prod_j (2π h_j²)^(-1/2) / M
    norm: f64,
}

/// Unbiased per-dimension sample standard deviations.
fn sample_std(samples: &PointSet) -> Vec<f64> {
    let d = samples.dim();
    let m = samples.len() as f64;
    let mut mean = vec![0.0; d];
    for p in samples.iter() {
        mean.iter_mut().zip(p).for_each(|(s, v)| *s += v);
    }
    mean.iter_mut().for_each(|s| *s /= m);
    let mut ss = vec![0.0; d];
    for p in samples.iter() {
        for ((s, v), mu) in ss.iter_mut().zip(p).zip(&mean) {
            *s += (v - mu) * (v - mu);
        }
    }
    ss.into_iter().map(|s| (s / (m - 1.0)).sqrt()).collect()
}

impl KdeModel {
    /// Scott's-rule fit.
    pub fn fit(samples: &PointSet) -> Result<Self> {
        let m = samples.len();
        if m < 2 {
            return Err(Error::InvalidParameter(format!(
                "KDE needs at least 2 samples, got {m}"
            )));
        }
        if samples.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSample("non-finite coordinate".into()));
        }
        let factor = (m as f64).powf(-1.0 / (samples.dim() as f64 + 4.0));
        let bandwidths: Vec<f64> = sample_std(samples).iter().map(|s| s * factor).collect();
        Self::with_bandwidths(samples.clone(), bandwidths)
    }

    pub fn with_bandwidths(samples: PointSet, bandwidths: Vec<f64>) -> Result<Self> {
        if bandwidths.len() != samples.dim() {
            return Err(Error::DimensionMismatch {
                expected: samples.dim(),
                got: bandwidths.len(),
            });
        }
        if let Some(j) = bandwidths.iter().position(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(Error::DegenerateData(j));
        }
        let norm = bandwidths
            .iter()
            .map(|h| (2.0 * PI * h * h).sqrt().recip())
            .product::<f64>()
            / samples.len() as f64;
        let neg_half_inv_var = bandwidths.iter().map(|h| -0.5 / (h * h)).collect();
        Ok(Self {
            samples,
            bandwidths,
            neg_half_inv_var,
            norm,
        })
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn samples(&self) -> &PointSet {
        &self.samples
    }

    /// Exact `O(dM)` evaluation.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let sum: f64 = self
            .samples
            .iter()
            .map(|y| {
                let e: f64 = x
                    .iter()
                    .zip(y)
                    .zip(&self.neg_half_inv_var)
                    .map(|((xi, yi), c)| c * (xi - yi) * (xi - yi))
                    .sum();
                e.exp()
            })
            .sum();
        self.norm * sum
    }

    pub fn evaluate_many(&self, points: &PointSet) -> Result<Vec<f64>> {
        if points.dim() != self.samples.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.samples.dim(),
                got: points.dim(),
            });
        }
        Ok(points
            .as_slice()
            .par_chunks_exact(points.dim())
            .map(|x| self.evaluate(x))
            .collect())
    }
}
