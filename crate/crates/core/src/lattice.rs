//! Rank-1 lattices: CBC construction of generating vectors, lattice points in
//! `[0,1)^d`, and the affine scaling onto `[-a, a]^d`.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::bernoulli;
use crate::error::{Error, Result};
use crate::kernel::MAX_ALPHA;
use crate::points::PointSet;

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    primal_check::miller_rabin(n)
}

/// Smallest prime `>= n`.
pub fn next_prime(n: u64) -> u64 {
    (n.max(2)..)
        .find(|&k| is_prime(k))
        .expect("primes are unbounded")
}

/// Largest prime `<= n`, if any.
pub fn prev_prime(n: u64) -> Option<u64> {
    (2..=n).rev().find(|&k| is_prime(k))
}

/// Generating vector `z` and prime point count `n` of a rank-1 lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    z: Vec<u64>,
    n: u64,
}

impl Lattice {
    /// `n` must be prime; `n = 1` is accepted as the single-point lattice at
    /// the origin.
    pub fn new(z: Vec<u64>, n: u64) -> Result<Self> {
        if n != 1 && !is_prime(n) {
            return Err(Error::InvalidLattice(format!(
                "point count N = {n} is not prime"
            )));
        }
        if z.is_empty() {
            return Err(Error::InvalidLattice("empty generating vector".into()));
        }
        if let Some(bad) = z.iter().find(|&&zj| zj == 0 || (n > 1 && zj >= n)) {
            return Err(Error::InvalidLattice(format!(
                "component {bad} not in 1..={}",
                n - 1
            )));
        }
        Ok(Self { z, n })
    }

    pub fn z(&self) -> &[u64] {
        &self.z
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// Fractional part `{k z_j / N}` computed exactly in integers.
    #[inline]
    pub fn coordinate(&self, k: u64, j: usize) -> f64 {
        let r = (k as u128 * self.z[j] as u128 % self.n as u128) as f64;
        r / self.n as f64
    }

    /// `y_k = {k z / N}` for `k = 1, ..., N`; the last point is the origin.
    pub fn points(&self) -> PointSet {
        let d = self.dim();
        let mut coords = Vec::with_capacity(d * self.n as usize);
        for k in 1..=self.n {
            coords.extend((0..d).map(|j| self.coordinate(k, j)));
        }
        PointSet::new(d, coords).expect("d >= 1")
    }

    /// Squared worst-case integration error in the unweighted Korobov space
    /// of smoothness `alpha` on the unit cube.
    pub fn criterion(&self, alpha: usize) -> Result<f64> {
        let omega = omega_table(self.n, alpha)?;
        let n = self.n as usize;
        let mut prod = vec![1.0; n];
        for &zj in &self.z {
            for (k, p) in prod.iter_mut().enumerate() {
                *p *= 1.0 + omega[(k as u128 * zj as u128 % n as u128) as usize];
            }
        }
        Ok(prod.iter().sum::<f64>() / n as f64 - 1.0)
    }

    /// Plain text: `N d alpha` on the first line, the components of `z` on
    /// the second.
    pub fn to_text(&self, alpha: usize) -> String {
        let mut s = format!("{} {} {}\n", self.n, self.dim(), alpha);
        let comps: Vec<String> = self.z.iter().map(u64::to_string).collect();
        let _ = writeln!(s, "{}", comps.join(" "));
        s
    }

    /// Parses [`Lattice::to_text`] output, returning the lattice and `alpha`.
    pub fn from_text(text: &str) -> Result<(Self, usize)> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<u64> = parse_ints(lines.next().unwrap_or_default())?;
        let [n, d, alpha] = header[..] else {
            return Err(Error::Parse(
                "generating vector header must be 'N d alpha'".into(),
            ));
        };
        let z = parse_ints(lines.next().unwrap_or_default())?;
        if z.len() as u64 != d {
            return Err(Error::Parse(format!(
                "header declares d = {d} but {} components follow",
                z.len()
            )));
        }
        Ok((Self::new(z, n)?, alpha as usize))
    }
}

fn parse_ints(line: &str) -> Result<Vec<u64>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<u64>()
                .map_err(|_| Error::Parse(format!("'{t}' is not a nonnegative integer")))
        })
        .collect()
}

/// `ω(r) = (-1)^(α+1) B_2α(r/N) / (2α)!` for `r = 0, ..., N-1`.
fn omega_table(n: u64, alpha: usize) -> Result<Vec<f64>> {
    if alpha == 0 || alpha > MAX_ALPHA {
        return Err(Error::UnsupportedOrder {
            what: "smoothness alpha",
            value: alpha,
            max: MAX_ALPHA,
        });
    }
    let poly = bernoulli::poly(2 * alpha)?;
    let sign = if alpha % 2 == 1 { 1.0 } else { -1.0 };
    let fact: f64 = (2..=2 * alpha).map(|k| k as f64).product();
    Ok((0..n)
        .map(|r| sign * poly.eval(r as f64 / n as f64) / fact)
        .collect())
}

/// Component-by-component construction: `z_1 = 1`, then each further
/// component minimises the squared worst-case error of the lattice built so
/// far, smallest candidate winning ties.
pub fn cbc_construct(d: usize, n: u64, alpha: usize) -> Result<Lattice> {
    if n != 1 && !is_prime(n) {
        return Err(Error::InvalidLattice(format!(
            "point count N = {n} is not prime"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("dimension d must be >= 1".into()));
    }
    let omega = omega_table(n, alpha)?;
    let nu = n as usize;
    if n == 1 {
        return Lattice::new(vec![1; d], 1);
    }
    let mut z = vec![1u64];
    // prod[k] = prod_{i <= j} (1 + ω({k z_i / N}))
    let mut prod: Vec<f64> = (0..nu).map(|k| 1.0 + omega[k]).collect();
    for _ in 1..d {
        let (best, _) = (1..n)
            .into_par_iter()
            .map(|c| {
                let s: f64 = prod
                    .iter()
                    .enumerate()
                    .map(|(k, p)| p * (1.0 + omega[(k as u128 * c as u128 % nu as u128) as usize]))
                    .sum();
                (c, s)
            })
            .reduce(
                || (u64::MAX, f64::INFINITY),
                |x, y| {
                    if y.1 < x.1 || (y.1 == x.1 && y.0 < x.0) {
                        y
                    } else {
                        x
                    }
                },
            );
        for (k, p) in prod.iter_mut().enumerate() {
            *p *= 1.0 + omega[(k as u128 * best as u128 % nu as u128) as usize];
        }
        z.push(best);
    }
    Lattice::new(z, n)
}

/// Points `x = 2a y - a` in `[-a, a]^d`, remembering the lattice they came
/// from when there is one (the circulant solver needs it).
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledNodeSet {
    points: PointSet,
    a: f64,
    source: Option<Lattice>,
}

impl ScaledNodeSet {
    pub fn from_lattice(lattice: &Lattice, a: f64) -> Result<Self> {
        let mut nodes = scale_to_box(&lattice.points(), a)?;
        nodes.source = Some(lattice.clone());
        Ok(nodes)
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn source(&self) -> Option<&Lattice> {
        self.source.as_ref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Inverse map `y = (x + a) / (2a)`.
    pub fn unscale(&self) -> PointSet {
        let a = self.a;
        self.points.map_points(|x, y| {
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi = (xi + a) / (2.0 * a);
            }
        })
    }
}

/// Applies `J_a(y) = 2a y - a` componentwise. The result carries no lattice.
pub fn scale_to_box(points: &PointSet, a: f64) -> Result<ScaledNodeSet> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "half-width a must be finite and > 0, got {a}"
        )));
    }
    let scaled = points.map_points(|y, x| {
        for (xi, yi) in x.iter_mut().zip(y) {
            *xi = 2.0 * a * yi - a;
        }
    });
    Ok(ScaledNodeSet {
        points: scaled,
        a,
        source: None,
    })
}
