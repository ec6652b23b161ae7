//! The scaled Korobov kernel on the box `[-a, a]^d`.
//!
//! Per coordinate, with `t = |x - y| / (2a)`,
//!
//! ```text
//! K_1(x, y)       = (2a)^-2 + (-1)^(α+1) (2a)^(2α-1) / (2α)! · B_2α(t)
//! <K_1(x,·), K_1(y,·)>_L² = (2a)^-3 - (2a)^(4α-1) / (4α)! · B_4α(t)
//! ```
//!
//! and the d-dimensional quantities are products over coordinates. Both
//! closed forms come from the Fourier series with weights
//! `r(0) = sqrt(2a)`, `r(h) = |π h / a|^α`, which [`KernelParams::series_oracle`]
//! sums directly for verification.

use std::f64::consts::PI;

use crate::bernoulli::{self, BernoulliPoly};
use crate::error::{Error, Result};

/// Largest supported smoothness; the L² form needs `B_{4α}` and the
/// coefficient table stops at degree 12.
pub const MAX_ALPHA: usize = bernoulli::MAX_DEGREE / 4;

/// Smoothness `alpha`, half-width `a` and dimension `d` of `K_{α,a,d}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    alpha: usize,
    a: f64,
    d: usize,
    kernel_const: f64,
    kernel_scale: f64,
    l2_const: f64,
    l2_scale: f64,
    kernel_poly: &'static BernoulliPoly,
    l2_poly: &'static BernoulliPoly,
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

impl KernelParams {
    pub fn new(alpha: usize, a: f64, d: usize) -> Result<Self> {
        if alpha == 0 || alpha > MAX_ALPHA {
            return Err(Error::UnsupportedOrder {
                what: "smoothness alpha",
                value: alpha,
                max: MAX_ALPHA,
            });
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "half-width a must be finite and > 0, got {a}"
            )));
        }
        if d == 0 {
            return Err(Error::InvalidParameter("dimension d must be >= 1".into()));
        }
        let width = 2.0 * a;
        let ln_width = width.ln();
        let sign = if alpha % 2 == 1 { 1.0 } else { -1.0 };
        let al = alpha as f64;
        // Scales are formed in log space: (2a)^(4α-1)/(4α)! over- or underflows
        // long before the final product does.
        let kernel_scale = sign * ((2.0 * al - 1.0) * ln_width - ln_factorial(2 * alpha)).exp();
        let l2_scale = -((4.0 * al - 1.0) * ln_width - ln_factorial(4 * alpha)).exp();
        Ok(Self {
            alpha,
            a,
            d,
            kernel_const: width.powi(-2),
            kernel_scale,
            l2_const: width.powi(-3),
            l2_scale,
            kernel_poly: bernoulli::poly(2 * alpha)?,
            l2_poly: bernoulli::poly(4 * alpha)?,
        })
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn with_a(&self, a: f64) -> Result<Self> {
        Self::new(self.alpha, a, self.d)
    }

    /// Errors unless every coordinate of `x` lies in `[-a, a]` and `x` has
    /// `d` coordinates.
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        match x.iter().position(|v| !(-self.a..=self.a).contains(v)) {
            Some(index) => Err(Error::Domain {
                index,
                value: x[index],
                lo: -self.a,
                hi: self.a,
            }),
            None => Ok(()),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|v| (-self.a..=self.a).contains(v))
    }

    /// One-dimensional kernel factor for a coordinate difference `diff`
    /// with `|diff| <= 2a`.
    #[inline]
    pub fn kernel_factor(&self, diff: f64) -> f64 {
        let t = diff.abs() / (2.0 * self.a);
        self.kernel_const + self.kernel_scale * self.kernel_poly.eval(t)
    }

    /// One-dimensional L² inner-product factor for `|diff| <= 2a`.
    #[inline]
    pub fn l2_factor(&self, diff: f64) -> f64 {
        let t = diff.abs() / (2.0 * self.a);
        self.l2_const + self.l2_scale * self.l2_poly.eval(t)
    }

    /// `K(x, y)` without the domain check.
    #[inline]
    pub fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let poly = self.kernel_poly;
        let inv_width = 1.0 / (2.0 * self.a);
        x.iter().zip(y).fold(1.0, |acc, (xi, yi)| {
            let t = (xi - yi).abs() * inv_width;
            acc * (self.kernel_const + self.kernel_scale * poly.eval(t))
        })
    }

    /// `<K(x,·), K(y,·)>_{L²([-a,a]^d)}` without the domain check.
    #[inline]
    pub fn l2_inner_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .fold(1.0, |acc, (xi, yi)| acc * self.l2_factor(xi - yi))
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.eval_unchecked(x, y))
    }

    pub fn l2_inner(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.l2_inner_unchecked(x, y))
    }

    /// Fourier weight `r_{α,a}(h)`.
    pub fn weight(&self, h: i64) -> f64 {
        if h == 0 {
            (2.0 * self.a).sqrt()
        } else {
            (PI * h as f64 / self.a).abs().powi(self.alpha as i32)
        }
    }

    /// Partial Fourier sum of the kernel over frequencies with `|h|_∞ <= h_max`.
    ///
    /// The ℓ∞ ball is a product of intervals, so the sum factorises into one
    /// complex partial sum per coordinate. The imaginary part must cancel.
    pub fn series_oracle(&self, x: &[f64], y: &[f64], h_max: u64) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        let width = 2.0 * self.a;
        let mut re = 1.0;
        let mut im = 0.0;
        for (xi, yi) in x.iter().zip(y) {
            // phi_h(x) conj(phi_h(y)) = exp(2πi h (x - y) / 2a) / 2a
            let phase = 2.0 * PI * (xi - yi) / width;
            let (mut s_re, mut s_im) = (0.0, 0.0);
            // Smallest terms first.
            for h in (1..=h_max as i64).rev() {
                for hh in [h, -h] {
                    let w = self.weight(hh).powi(-2) / width;
                    let theta = phase * hh as f64;
                    s_re += w * theta.cos();
                    s_im += w * theta.sin();
                }
            }
            s_re += self.weight(0).powi(-2) / width;
            let (r, i) = (re * s_re - im * s_im, re * s_im + im * s_re);
            re = r;
            im = i;
        }
        if im.abs() > 1e-12 * re.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "series imaginary part {im:e} did not cancel"
            )));
        }
        Ok(re)
    }
}
