//! Circulant systems `A c = b` with `A[i][j] = row[(j - i) mod N]`, plus the
//! dense assemble-and-solve fallback used for non-lattice node sets.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Symbols smaller than this fraction of the largest are treated as singular.
pub const SYMBOL_FLOOR: f64 = 1e-14;

/// Imaginary residue allowed in the inverse transform, relative to `max |c|`.
pub const IMAG_TOLERANCE: f64 = 1e-10;

/// Solves the circulant system generated by `row` through the DFT.
///
/// With `A[i][j] = row[(j - i) mod N]`, `A c` is the cyclic convolution of
/// `c` with the index-reversed row, so `c = IDFT(DFT(b) / DFT(rev(row)))`.
/// For the symmetric rows produced by lattice Gram matrices the reversal is
/// the identity.
pub fn solve_circulant(row: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    solve_circulant_with_floor(row, b, SYMBOL_FLOOR)
}

/// [`solve_circulant`] with a caller-chosen relative symbol floor. A zero
/// floor still rejects symbols that are exactly zero or not finite.
pub fn solve_circulant_with_floor(row: &[f64], b: &[f64], floor: f64) -> Result<Vec<f64>> {
    let n = row.len();
    if n == 0 || b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut symbol: Vec<Complex64> = (0..n)
        .map(|m| Complex64::new(row[(n - m) % n], 0.0))
        .collect();
    fwd.process(&mut symbol);
    let moduli = symbol.iter().map(|s| s.norm());
    let (min_modulus, max_modulus) = moduli.fold((f64::INFINITY, 0.0f64), |(lo, hi), m| {
        (lo.min(m), hi.max(m))
    });
    if !(min_modulus >= floor * max_modulus && min_modulus > 0.0 && max_modulus.is_finite()) {
        return Err(Error::IllConditioned {
            min_modulus,
            max_modulus,
        });
    }

    let mut rhs: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut rhs);
    for (r, s) in rhs.iter_mut().zip(&symbol) {
        *r /= *s;
    }
    // Real data gives a Hermitian quotient; restore the symmetry that
    // rounding breaks so the inverse transform is real.
    for m in 1..n.div_ceil(2) {
        let avg = 0.5 * (rhs[m] + rhs[n - m].conj());
        rhs[m] = avg;
        rhs[n - m] = avg.conj();
    }
    rhs[0].im = 0.0;
    if n.is_multiple_of(2) {
        rhs[n / 2].im = 0.0;
    }
    inv.process(&mut rhs);
    let scale = 1.0 / n as f64;
    let c: Vec<f64> = rhs.iter().map(|v| v.re * scale).collect();
    let max_re = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_im = rhs.iter().fold(0.0f64, |m, v| m.max((v.im * scale).abs()));
    if max_im > IMAG_TOLERANCE * max_re.max(f64::MIN_POSITIVE) {
        return Err(Error::Residual {
            residual: max_im,
            tolerance: IMAG_TOLERANCE * max_re,
        });
    }
    Ok(c)
}

/// `A c` for the circulant generated by `row`, by direct summation.
pub fn circulant_apply(row: &[f64], c: &[f64]) -> Vec<f64> {
    let n = row.len();
    (0..n)
        .map(|i| (0..n).map(|j| row[(j + n - i) % n] * c[j]).sum())
        .collect()
}

/// Expands the circulant generated by `row` into a dense row-major matrix.
pub fn circulant_dense(row: &[f64]) -> Vec<f64> {
    let n = row.len();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = row[(j + n - i) % n];
        }
    }
    a
}

/// Gaussian elimination with partial pivoting on a dense row-major matrix.
pub fn solve_dense(matrix: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    if matrix.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: matrix.len(),
        });
    }
    let mut a = matrix.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| a[p * n + col].abs().total_cmp(&a[q * n + col].abs()))
            .expect("non-empty range");
        if a[pivot * n + col] == 0.0 {
            return Err(Error::IllConditioned {
                min_modulus: 0.0,
                max_modulus: 0.0,
            });
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            x.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / diag;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let s: f64 = (col + 1..n).map(|k| a[col * n + k] * x[k]).sum();
        x[col] = (x[col] - s) / a[col * n + col];
    }
    Ok(x)
}

/// `max |A c - b|` together with the admissible bound
/// `rel_tol max |b| + 16 eps (sum |row|) max |c|`. The second term is the
/// rounding floor of forming `A c` in double precision; for well-conditioned
/// systems it is negligible next to the first.
pub fn residual_and_bound(row: &[f64], c: &[f64], b: &[f64], rel_tol: f64) -> (f64, f64) {
    let ac = circulant_apply(row, c);
    let res = ac
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let b_max = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let c_max = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let row_sum: f64 = row.iter().map(|v| v.abs()).sum();
    (res, rel_tol * b_max + 16.0 * f64::EPSILON * row_sum * c_max)
}

/// One step of iterative refinement: `c += A^{-1} (b - A c)`.
pub fn refine(row: &[f64], b: &[f64], c: &mut [f64], floor: f64) -> Result<()> {
    let ac = circulant_apply(row, c);
    let r: Vec<f64> = b.iter().zip(&ac).map(|(x, y)| x - y).collect();
    let delta = solve_circulant_with_floor(row, &r, floor)?;
    c.iter_mut().zip(&delta).for_each(|(x, d)| *x += d);
    Ok(())
}

/// `max |A c - b| / max |b|` for the circulant generated by `row`.
pub fn relative_residual(row: &[f64], c: &[f64], b: &[f64]) -> f64 {
    let ac = circulant_apply(row, c);
    let res = ac
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        res
    } else {
        res / scale
    }
}
