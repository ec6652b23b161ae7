//! Isotropic Gaussian mixtures used as ground-truth densities.

use std::f64::consts::PI;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::points::PointSet;

/// Names accepted by [`GaussianMixture::example`].
pub const EXAMPLES: [&str; 4] = ["gm2d", "gm4d", "gm5d", "gm6d"];

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    weights: Vec<f64>,
    means: PointSet,
    sigma2: f64,
}

impl GaussianMixture {
    pub fn new(weights: Vec<f64>, means: PointSet, sigma2: f64) -> Result<Self> {
        if weights.len() != means.len() || weights.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: means.len(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidParameter(
                "weights must be nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "weights sum to {total}, not 1"
            )));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "variance must be > 0, got {sigma2}"
            )));
        }
        Ok(Self {
            weights,
            means,
            sigma2,
        })
    }

    /// The benchmark mixtures: `gm2d` has nine peaks on `{-2,0,2}^2` with
    /// variance 1/4; `gm4d`/`gm5d`/`gm6d` have nine components with standard
    /// deviation 0.7 and means `{m_j k / 9} - 4/9`, `k = 0..8`.
    pub fn example(name: &str) -> Result<Self> {
        let weights = vec![1.0 / 9.0; 9];
        match name {
            "gm2d" => {
                let grid = [-2.0, 0.0, 2.0];
                let coords = grid
                    .iter()
                    .flat_map(|&x| grid.iter().flat_map(move |&y| [x, y]))
                    .collect();
                Self::new(weights, PointSet::new(2, coords)?, 0.25)
            }
            "gm4d" | "gm5d" | "gm6d" => {
                let multipliers: &[u64] = match name {
                    "gm4d" => &[1, 2, 4, 8],
                    "gm5d" => &[1, 2, 4, 6, 8],
                    _ => &[1, 2, 4, 6, 7, 8],
                };
                let coords = (0..9u64)
                    .flat_map(|k| {
                        multipliers
                            .iter()
                            .map(move |m| ((m * k % 9) as f64 - 4.0) / 9.0)
                    })
                    .collect();
                Self::new(weights, PointSet::new(multipliers.len(), coords)?, 0.49)
            }
            other => Err(Error::UnknownExample(other.to_string())),
        }
    }

    pub fn dim(&self) -> usize {
        self.means.dim()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &PointSet {
        &self.means
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        let norm = (2.0 * PI * self.sigma2).powf(-(self.dim() as f64) / 2.0);
        let inv = -0.5 / self.sigma2;
        self.weights
            .iter()
            .zip(self.means.iter())
            .map(|(w, mu)| {
                let r2: f64 = x.iter().zip(mu).map(|(a, b)| (a - b) * (a - b)).sum();
                w * (inv * r2).exp()
            })
            .sum::<f64>()
            * norm
    }

    /// Draws a component by weight, then an isotropic Gaussian around its
    /// mean.
    pub fn sample<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> PointSet {
        let pick = WeightedIndex::new(&self.weights).expect("validated weights");
        let sd = self.sigma2.sqrt();
        let d = self.dim();
        let mut coords = Vec::with_capacity(m * d);
        for _ in 0..m {
            let mu = self.means.point(pick.sample(rng));
            coords.extend(mu.iter().map(|c| {
                let z: f64 = rng.sample(StandardNormal);
                c + sd * z
            }));
        }
        PointSet::new(d, coords).expect("d >= 1")
    }

    pub fn sample_seeded(&self, m: usize, seed: u64) -> PointSet {
        self.sample(m, &mut ChaCha8Rng::seed_from_u64(seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gm2d_at_origin() {
        let gm = GaussianMixture::example("gm2d").unwrap();
        let expected =
            (1.0 / 9.0) * (2.0 / PI) * (1.0 + 4.0 * (-8.0f64).exp() + 4.0 * (-16.0f64).exp());
        assert!((gm.pdf(&[0.0, 0.0]) - expected).abs() < 1e-16);
        for x in [[0.3, -1.7], [2.2, 0.9]] {
            let y = [-x[0], -x[1]];
            assert!((gm.pdf(&x) - gm.pdf(&y)).abs() < 1e-16);
        }
    }

    #[test]
    fn gm2d_means() {
        let gm = GaussianMixture::example("gm2d").unwrap();
        assert_eq!(gm.means().len(), 9);
        for mu in gm.means().iter() {
            assert!(mu.iter().all(|v| [-2.0, 0.0, 2.0].contains(v)));
        }
    }

    #[test]
    fn gm4d_means() {
        let gm = GaussianMixture::example("gm4d").unwrap();
        assert_eq!(gm.means().point(0), &[-4.0 / 9.0; 4]);
        assert_eq!(
            gm.means().point(3),
            &[-1.0 / 9.0, 2.0 / 9.0, -1.0 / 9.0, 2.0 / 9.0]
        );
        assert_eq!(gm.sigma2(), 0.49);
        assert_eq!(GaussianMixture::example("gm5d").unwrap().dim(), 5);
        assert_eq!(GaussianMixture::example("gm6d").unwrap().dim(), 6);
        assert!(matches!(
            GaussianMixture::example("gm3d"),
            Err(Error::UnknownExample(_))
        ));
    }

    #[test]
    fn single_component_peak() {
        let gm = GaussianMixture::new(
            vec![1.0],
            PointSet::new(3, vec![1.0, 2.0, 3.0]).unwrap(),
            0.3,
        )
        .unwrap();
        let peak = (2.0 * PI * 0.3f64).powf(-1.5);
        assert!((gm.pdf(&[1.0, 2.0, 3.0]) - peak).abs() < 1e-14 * peak);
    }

    #[test]
    fn invalid_mixtures() {
        let means = PointSet::new(1, vec![0.0, 1.0]).unwrap();
        assert!(GaussianMixture::new(vec![0.5, 0.6], means.clone(), 1.0).is_err());
        assert!(GaussianMixture::new(vec![0.5, 0.5], means.clone(), 0.0).is_err());
        assert!(GaussianMixture::new(vec![1.0], means, 1.0).is_err());
    }

    #[test]
    fn seeded_sampling_repeats() {
        let gm = GaussianMixture::example("gm4d").unwrap();
        assert_eq!(gm.sample_seeded(100, 7), gm.sample_seeded(100, 7));
        assert_ne!(gm.sample_seeded(100, 7), gm.sample_seeded(100, 8));
    }
}
