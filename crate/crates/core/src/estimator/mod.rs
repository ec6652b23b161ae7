//! The periodic scaled Korobov kernel (PSKK) density estimator.
//!
//! Samples on `R^d` are wrapped into the half-open box `[-a, a)^d`, a
//! kernel ridge system is assembled on scaled rank-1 lattice nodes and solved
//! through its circulant structure, and the resulting kernel expansion is
//! clipped to be nonnegative and zero outside the box.

pub mod circulant;
mod persist;
pub mod schedule;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::KernelParams;
use crate::lattice::{cbc_construct, Lattice, ScaledNodeSet};
use crate::points::PointSet;

pub use circulant::{solve_circulant, solve_circulant_with_floor, SYMBOL_FLOOR};
pub use schedule::{Schedule, ScheduleConfig};

/// Tolerance on `max |A c - b| / max |b|` checked after every fit, on top of
/// the rounding floor of forming `A c` (see
/// [`circulant::residual_and_bound`]).
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Samples per partial sum in [`empirical_vector`]. Fixed so the reduction
/// tree, and therefore the result, does not depend on the thread count.
const SAMPLE_CHUNK: usize = 2048;

/// Samples reduced into the half-open box `[-a, a)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct WrappedSamples {
    points: PointSet,
    a: f64,
}

impl WrappedSamples {
    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `((y + a) mod 2a) - a`, with points of `[-a, a)` left untouched.
#[inline]
pub fn wrap_coordinate(y: f64, a: f64) -> f64 {
    if (-a..a).contains(&y) {
        return y;
    }
    let period = 2.0 * a;
    let mut r = (y + a).rem_euclid(period);
    if r >= period {
        r = 0.0;
    }
    let w = r - a;
    if (-a..a).contains(&w) {
        w
    } else {
        -a
    }
}

pub fn wrap_samples(samples: &PointSet, a: f64) -> Result<WrappedSamples> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "half-width a must be finite and > 0, got {a}"
        )));
    }
    if samples.is_empty() {
        return Err(Error::InvalidSample("no samples".into()));
    }
    if let Some(i) = samples.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidSample(format!(
            "sample {} has non-finite coordinate {}",
            i / samples.dim(),
            samples.as_slice()[i]
        )));
    }
    let points = samples.map_points(|y, w| {
        for (wi, yi) in w.iter_mut().zip(y) {
            *wi = wrap_coordinate(*yi, a);
        }
    });
    Ok(WrappedSamples { points, a })
}

fn check_half_width(kp: &KernelParams, a: f64, what: &str) -> Result<()> {
    if kp.a() != a {
        return Err(Error::Configuration(format!(
            "{what} half-width {a} differs from kernel half-width {}",
            kp.a()
        )));
    }
    Ok(())
}

fn check_nodes(kp: &KernelParams, nodes: &ScaledNodeSet) -> Result<()> {
    check_half_width(kp, nodes.a(), "node set")?;
    if nodes.points().dim() != kp.d() {
        return Err(Error::DimensionMismatch {
            expected: kp.d(),
            got: nodes.points().dim(),
        });
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "regularisation lambda must be finite and > 0, got {lambda}"
        )));
    }
    Ok(())
}

/// `A[j][k] = <K(x_j,·), K(x_k,·)>_L² + lambda K(x_j, x_k)`.
#[inline]
fn gram_entry(kp: &KernelParams, x: &[f64], y: &[f64], lambda: f64) -> f64 {
    kp.l2_inner_unchecked(x, y) + lambda * kp.eval_unchecked(x, y)
}

/// First row of the Gram matrix on lattice nodes. The full matrix is the
/// circulant `A[j][k] = row[(k - j) mod N]`.
pub fn gram_first_row(kp: &KernelParams, nodes: &ScaledNodeSet, lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    check_nodes(kp, nodes)?;
    if nodes.source().is_none() {
        return Err(Error::Structure);
    }
    let first = nodes.points().point(0);
    Ok(nodes
        .points()
        .iter()
        .map(|x| gram_entry(kp, first, x, lambda))
        .collect())
}

/// Dense Gram matrix (row-major) for an arbitrary node set.
pub fn gram_dense(kp: &KernelParams, nodes: &ScaledNodeSet, lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    check_nodes(kp, nodes)?;
    let pts = nodes.points();
    let n = pts.len();
    let mut a = vec![0.0; n * n];
    for (j, xj) in pts.iter().enumerate() {
        for (k, xk) in pts.iter().enumerate() {
            a[j * n + k] = gram_entry(kp, xj, xk, lambda);
        }
    }
    Ok(a)
}

/// `b_j = (1/M) sum_m K(x_j, y_m)`.
///
/// Samples are split into fixed-size chunks whose partial vectors are
/// combined by a pairwise tree in chunk order.
pub fn empirical_vector(
    kp: &KernelParams,
    nodes: &ScaledNodeSet,
    ws: &WrappedSamples,
) -> Result<Vec<f64>> {
    check_nodes(kp, nodes)?;
    check_half_width(kp, ws.a(), "wrapped samples")?;
    let d = kp.d();
    if ws.points().dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: ws.points().dim(),
        });
    }
    let node_pts = nodes.points();
    let n = node_pts.len();
    let partials: Vec<Vec<f64>> = ws
        .points()
        .as_slice()
        .par_chunks(SAMPLE_CHUNK * d)
        .map(|chunk| {
            let mut acc = vec![0.0; n];
            for y in chunk.chunks_exact(d) {
                for (slot, x) in acc.iter_mut().zip(node_pts.iter()) {
                    *slot += kp.eval_unchecked(x, y);
                }
            }
            acc
        })
        .collect();
    let mut b = pairwise_sum(partials).unwrap_or_else(|| vec![0.0; n]);
    let inv_m = 1.0 / ws.len() as f64;
    b.iter_mut().for_each(|v| *v *= inv_m);
    Ok(b)
}

fn pairwise_sum(mut parts: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    while parts.len() > 1 {
        parts = parts
            .chunks_mut(2)
            .map(|pair| {
                let mut left = std::mem::take(&mut pair[0]);
                if let Some(right) = pair.get(1) {
                    left.iter_mut().zip(right).for_each(|(l, r)| *l += r);
                }
                left
            })
            .collect();
    }
    parts.pop()
}

/// A fitted estimator `x -> max(sum_k c_k K(x_k, x), 0)` on `[-a, a]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PskkModel {
    kp: KernelParams,
    nodes: ScaledNodeSet,
    coeffs: Vec<f64>,
    lambda: f64,
}

impl PskkModel {
    pub fn from_parts(
        kp: KernelParams,
        nodes: ScaledNodeSet,
        coeffs: Vec<f64>,
        lambda: f64,
    ) -> Result<Self> {
        check_lambda(lambda)?;
        check_nodes(&kp, &nodes)?;
        if coeffs.len() != nodes.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self {
            kp,
            nodes,
            coeffs,
            lambda,
        })
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kp
    }

    pub fn nodes(&self) -> &ScaledNodeSet {
        &self.nodes
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.nodes.source()
    }

    /// Kernel expansion before clipping; `x` must lie in the box.
    pub fn expansion(&self, x: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .zip(self.nodes.points().iter())
            .map(|(c, xk)| c * self.kp.eval_unchecked(xk, x))
            .sum()
    }

    /// Density estimate: zero outside `[-a, a]^d`, clipped at zero inside.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        if x.len() != self.kp.d() || !self.kp.contains(x) {
            return 0.0;
        }
        self.expansion(x).max(0.0)
    }

    pub fn evaluate_many(&self, points: &PointSet) -> Result<Vec<f64>> {
        if points.dim() != self.kp.d() {
            return Err(Error::DimensionMismatch {
                expected: self.kp.d(),
                got: points.dim(),
            });
        }
        Ok(points
            .as_slice()
            .par_chunks_exact(points.dim())
            .map(|x| self.evaluate(x))
            .collect())
    }

    /// Integral of the unclipped expansion over the box. Each kernel
    /// section integrates to `(2a)^-d`, so this is `(2a)^-d sum_k c_k`.
    /// Diagnostic only: the estimator is not normalised.
    pub fn mass(&self) -> f64 {
        (2.0 * self.kp.a()).powi(-(self.kp.d() as i32)) * self.coeffs.iter().sum::<f64>()
    }
}

/// Numerical guards of [`fit_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Smallest admissible `min |symbol| / max |symbol|` of the Gram matrix.
    pub symbol_floor: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            symbol_floor: SYMBOL_FLOOR,
        }
    }
}

/// Runs the full pipeline: wrap, build lattice nodes, assemble the circulant
/// system, solve it by FFT and verify the residual.
///
/// The lattice is constructed by CBC when not supplied.
pub fn fit(
    samples: &PointSet,
    kp: &KernelParams,
    n: u64,
    lambda: f64,
    lattice: Option<&Lattice>,
) -> Result<PskkModel> {
    fit_with(samples, kp, n, lambda, lattice, &FitOptions::default())
}

/// [`fit`] with explicit numerical guards.
pub fn fit_with(
    samples: &PointSet,
    kp: &KernelParams,
    n: u64,
    lambda: f64,
    lattice: Option<&Lattice>,
    options: &FitOptions,
) -> Result<PskkModel> {
    if !(options.symbol_floor >= 0.0 && options.symbol_floor < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "symbol floor must lie in [0, 1), got {}",
            options.symbol_floor
        )));
    }
    check_lambda(lambda)?;
    if samples.dim() != kp.d() {
        return Err(Error::DimensionMismatch {
            expected: kp.d(),
            got: samples.dim(),
        });
    }
    let lattice = match lattice {
        Some(lat) => {
            if lat.n() != n || lat.dim() != kp.d() {
                return Err(Error::Configuration(format!(
                    "lattice (N = {}, d = {}) does not match requested N = {n}, d = {}",
                    lat.n(),
                    lat.dim(),
                    kp.d()
                )));
            }
            lat.clone()
        }
        None => cbc_construct(kp.d(), n, kp.alpha())?,
    };
    let ws = wrap_samples(samples, kp.a())?;
    let nodes = ScaledNodeSet::from_lattice(&lattice, kp.a())?;
    let row = gram_first_row(kp, &nodes, lambda)?;
    let b = empirical_vector(kp, &nodes, &ws)?;
    let mut coeffs = solve_circulant_with_floor(&row, &b, options.symbol_floor)?;
    circulant::refine(&row, &b, &mut coeffs, options.symbol_floor)?;
    let (residual, tolerance) =
        circulant::residual_and_bound(&row, &coeffs, &b, RESIDUAL_TOLERANCE);
    if !(residual <= tolerance) {
        return Err(Error::Residual {
            residual,
            tolerance,
        });
    }
    PskkModel::from_parts(*kp, nodes, coeffs, lambda)
}

/// Dense assemble-and-solve for node sets without lattice structure.
pub fn fit_dense(
    samples: &PointSet,
    kp: &KernelParams,
    nodes: &ScaledNodeSet,
    lambda: f64,
) -> Result<PskkModel> {
    let ws = wrap_samples(samples, kp.a())?;
    let a = gram_dense(kp, nodes, lambda)?;
    let b = empirical_vector(kp, nodes, &ws)?;
    let coeffs = circulant::solve_dense(&a, &b)?;
    PskkModel::from_parts(*kp, nodes.clone(), coeffs, lambda)
}
