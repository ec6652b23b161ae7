//! Mean integrated squared error by Sobol' quadrature over replicated
//! sample sets.
//!
//! For an estimator that may be nonzero anywhere (KDE) the integral is
//! truncated to `[-l, l]^d`. For an estimator supported on `[-a, a]^d` (PSKK)
//! the integral splits exactly into the box term and `∫_{outside} f²`, and the
//! latter is estimated by Monte Carlo as `E_f[f(X) 1{X outside}]`.
//!
//! By default each replication integrates over its own randomly shifted
//! Sobol' grid, so the grid error averages out over replications instead of
//! entering every replication with the same sign.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::mixture::GaussianMixture;
use super::sobol::sobol_points;
use crate::error::{Error, Result};
use crate::estimator::{fit_with, FitOptions, PskkModel};
use crate::kde::KdeModel;
use crate::kernel::KernelParams;
use crate::lattice::{cbc_construct, Lattice};
use crate::points::PointSet;

/// Something that can be evaluated on a grid after fitting.
pub trait Density: Send + Sync {
    fn evaluate_many(&self, points: &PointSet) -> Result<Vec<f64>>;

    /// Mean bandwidth, for estimators that have one.
    fn bandwidth(&self) -> Option<f64> {
        None
    }
}

impl Density for PskkModel {
    fn evaluate_many(&self, points: &PointSet) -> Result<Vec<f64>> {
        PskkModel::evaluate_many(self, points)
    }
}

impl Density for KdeModel {
    fn evaluate_many(&self, points: &PointSet) -> Result<Vec<f64>> {
        KdeModel::evaluate_many(self, points)
    }

    fn bandwidth(&self) -> Option<f64> {
        Some(self.bandwidths().iter().sum::<f64>() / self.bandwidths().len() as f64)
    }
}

/// Parameters recorded alongside a MISE estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamsRecord {
    Pskk {
        alpha: usize,
        a: f64,
        n: u64,
        lambda: f64,
    },
    Kde {
        bandwidth: f64,
    },
    None,
}

/// A density estimation method: a fit step producing a [`Density`].
pub trait DensityMethod: Sync {
    fn name(&self) -> &str;

    fn fit(&self, samples: &PointSet) -> Result<Box<dyn Density>>;

    /// `Some(a)` when fitted estimates vanish outside `[-a, a]^d`.
    fn support_half_width(&self) -> Option<f64> {
        None
    }

    fn params(&self) -> ParamsRecord {
        ParamsRecord::None
    }
}

/// PSKK with fixed parameters; the lattice is built once and shared by all
/// replications.
#[derive(Debug, Clone)]
pub struct PskkMethod {
    kp: KernelParams,
    lattice: Lattice,
    lambda: f64,
    options: FitOptions,
}

impl PskkMethod {
    pub fn new(alpha: usize, a: f64, d: usize, n: u64, lambda: f64) -> Result<Self> {
        let kp = KernelParams::new(alpha, a, d)?;
        let lattice = cbc_construct(d, n, alpha)?;
        Self::with_lattice(kp, lattice, lambda)
    }

    pub fn with_lattice(kp: KernelParams, lattice: Lattice, lambda: f64) -> Result<Self> {
        if lattice.dim() != kp.d() {
            return Err(Error::DimensionMismatch {
                expected: kp.d(),
                got: lattice.dim(),
            });
        }
        Ok(Self {
            kp,
            lattice,
            lambda,
            options: FitOptions::default(),
        })
    }

    pub fn with_options(self, options: FitOptions) -> Self {
        Self { options, ..self }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }
}

impl DensityMethod for PskkMethod {
    fn name(&self) -> &str {
        "pskk"
    }

    fn fit(&self, samples: &PointSet) -> Result<Box<dyn Density>> {
        let model = fit_with(
            samples,
            &self.kp,
            self.lattice.n(),
            self.lambda,
            Some(&self.lattice),
            &self.options,
        )?;
        Ok(Box::new(model))
    }

    fn support_half_width(&self) -> Option<f64> {
        Some(self.kp.a())
    }

    fn params(&self) -> ParamsRecord {
        ParamsRecord::Pskk {
            alpha: self.kp.alpha(),
            a: self.kp.a(),
            n: self.lattice.n(),
            lambda: self.lambda,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct KdeMethod;

impl DensityMethod for KdeMethod {
    fn name(&self) -> &str {
        "kde"
    }

    fn fit(&self, samples: &PointSet) -> Result<Box<dyn Density>> {
        Ok(Box::new(KdeModel::fit(samples)?))
    }
}

struct FnDensity<F>(F);

impl<F: Fn(&[f64]) -> f64 + Send + Sync> Density for FnDensity<F> {
    fn evaluate_many(&self, points: &PointSet) -> Result<Vec<f64>> {
        Ok(points.iter().map(&self.0).collect())
    }
}

/// A fixed function that ignores the samples; useful as a reference method.
pub struct FixedFunction<F> {
    name: String,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Clone + Send + Sync + 'static> FixedFunction<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self {
            name: name.into(),
            f,
        }
    }
}

impl<F: Fn(&[f64]) -> f64 + Clone + Send + Sync + 'static> DensityMethod for FixedFunction<F> {
    fn name(&self) -> &str {
        &self.name
    }

    fn fit(&self, _samples: &PointSet) -> Result<Box<dyn Density>> {
        Ok(Box::new(FnDensity(self.f.clone())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiseConfig {
    /// Replications `S`.
    pub replications: usize,
    /// Truncation half-width `l` for estimators without bounded support.
    pub l: f64,
    /// `2^t` Sobol' points.
    pub t: u32,
    pub seed: u64,
    /// Monte Carlo samples for the exterior term.
    pub exterior_samples: usize,
    /// Give every replication its own random digital shift of the grid.
    /// Without it the same unshifted grid is used throughout.
    pub shifted: bool,
}

impl Default for MiseConfig {
    fn default() -> Self {
        Self {
            replications: 20,
            l: 6.0,
            t: 16,
            seed: 0,
            exterior_samples: 1_000_000,
            shifted: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiseReport {
    pub method: String,
    pub m: usize,
    pub d: usize,
    pub params: ParamsRecord,
    pub mise: f64,
    /// Replication standard deviation over `sqrt(S)`, combined with the
    /// Monte Carlo error of the exterior term.
    pub stderr: f64,
    pub box_term: f64,
    pub exterior_term: f64,
    pub runtime_seconds: f64,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Stream bit marking the grid-shift RNG of a replication.
const SHIFT_STREAM: u64 = 1 << 62;

/// RNG for replication `stream` under `seed`.
pub fn replication_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `∫_{R^d \ [-a,a]^d} f²` as `E_f[f(X) 1{X outside}]`, with its standard
/// error.
pub fn exterior_square_integral(
    truth: &GaussianMixture,
    a: f64,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    if samples == 0 {
        return (0.0, 0.0);
    }
    let pts = truth.sample(samples, &mut replication_rng(seed, u64::MAX));
    let vals: Vec<f64> = pts
        .iter()
        .map(|x| {
            if x.iter().all(|v| (-a..=a).contains(v)) {
                0.0
            } else {
                truth.pdf(x)
            }
        })
        .collect();
    mean_and_stderr(&vals)
}

/// Estimates the MISE of `method` against `truth` at sample size `m`.
pub fn estimate_mise(
    method: &dyn DensityMethod,
    truth: &GaussianMixture,
    m: usize,
    cfg: &MiseConfig,
) -> Result<MiseReport> {
    if cfg.replications < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 replications, got {}",
            cfg.replications
        )));
    }
    let start = Instant::now();
    let d = truth.dim();
    let support = method.support_half_width();
    let half = support.unwrap_or(cfg.l);
    let sobol = sobol_points(d, cfg.t)?;
    let fixed_grid = if cfg.shifted {
        None
    } else {
        let grid = sobol.scaled(half);
        let vals: Vec<f64> = grid.iter().map(|x| truth.pdf(x)).collect();
        Some((grid, vals))
    };
    let volume = (2.0 * half).powi(d as i32);

    let per_rep: Vec<(f64, Option<f64>)> = (0..cfg.replications)
        .into_par_iter()
        .map(|s| {
            let mut rng = replication_rng(cfg.seed, s as u64);
            let samples = truth.sample(m, &mut rng);
            let shifted_grid;
            let (grid, truth_vals) = match &fixed_grid {
                Some((g, v)) => (g, v),
                None => {
                    let mut shift_rng = replication_rng(cfg.seed, SHIFT_STREAM | s as u64);
                    let shift: Vec<u32> = (0..d).map(|_| shift_rng.random()).collect();
                    let g = sobol.digitally_shifted(&shift)?.map_points(|w, p| {
                        for (pi, wi) in p.iter_mut().zip(w) {
                            *pi = 2.0 * half * wi - half;
                        }
                    });
                    let v: Vec<f64> = g.iter().map(|x| truth.pdf(x)).collect();
                    shifted_grid = (g, v);
                    (&shifted_grid.0, &shifted_grid.1)
                }
            };
            let est = method.fit(&samples)?;
            let vals = est.evaluate_many(grid)?;
            let mean_sq = vals
                .iter()
                .zip(truth_vals)
                .map(|(e, f)| (e - f) * (e - f))
                .sum::<f64>()
                / vals.len() as f64;
            Ok((volume * mean_sq, est.bandwidth()))
        })
        .collect::<Result<_>>()?;

    let errors: Vec<f64> = per_rep.iter().map(|r| r.0).collect();
    let (box_term, box_se) = mean_and_stderr(&errors);
    let (exterior_term, ext_se) = match support {
        Some(a) => exterior_square_integral(truth, a, cfg.exterior_samples, cfg.seed),
        None => (0.0, 0.0),
    };
    let params = match method.params() {
        ParamsRecord::None => {
            let hs: Vec<f64> = per_rep.iter().filter_map(|r| r.1).collect();
            if hs.is_empty() {
                ParamsRecord::None
            } else {
                ParamsRecord::Kde {
                    bandwidth: hs.iter().sum::<f64>() / hs.len() as f64,
                }
            }
        }
        p => p,
    };
    Ok(MiseReport {
        method: method.name().to_string(),
        m,
        d,
        params,
        mise: box_term + exterior_term,
        stderr: (box_se * box_se + ext_se * ext_se).sqrt(),
        box_term,
        exterior_term,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}
