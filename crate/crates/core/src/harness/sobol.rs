//! Unscrambled Sobol' points in Gray-code order.
//!
//! Direction numbers are the first 16 dimensions of Joe and Kuo's
//! `new-joe-kuo-6.21201` table (<https://web.maths.unsw.edu.au/~fkuo/sobol/>).
//! The sequence starts at the origin: for `d = 1` it reads
//! `0, 1/2, 3/4, 1/4, ...`, the same ordering as SciPy's unscrambled
//! `qmc.Sobol`. [`SobolGrid::digitally_shifted`] randomizes the grid.

use crate::error::{Error, Result};
use crate::points::PointSet;

pub const MAX_DIM: usize = 16;
pub const MAX_LOG2_POINTS: u32 = 20;

const BITS: usize = 32;

/// `(s, a, m_1..m_s)` for dimensions 2..=16: degree of the primitive
/// polynomial, its interior coefficients, and the initial direction numbers.
const DIRECTIONS: [(u32, u32, &[u32]); MAX_DIM - 1] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
];

/// Direction numbers `v_1..v_32` scaled to 32-bit fixed point, for the
/// zero-based dimension `j`.
fn direction_numbers(j: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if j == 0 {
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = 1 << (BITS - 1 - i);
        }
        return v;
    }
    let (s, a, m) = DIRECTIONS[j - 1];
    let s = s as usize;
    for i in 0..s.min(BITS) {
        v[i] = m[i] << (BITS - 1 - i);
    }
    for i in s..BITS {
        let mut x = v[i - s] ^ (v[i - s] >> s);
        for k in 1..s {
            if (a >> (s - 1 - k)) & 1 == 1 {
                x ^= v[i - k];
            }
        }
        v[i] = x;
    }
    v
}

/// The first `2^t` points of the `d`-dimensional sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SobolGrid {
    t: u32,
    points: PointSet,
}

impl SobolGrid {
    pub fn new(d: usize, t: u32) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::UnsupportedOrder {
                what: "Sobol' dimension",
                value: d,
                max: MAX_DIM,
            });
        }
        if t > MAX_LOG2_POINTS {
            return Err(Error::UnsupportedOrder {
                what: "Sobol' log2 point count",
                value: t as usize,
                max: MAX_LOG2_POINTS as usize,
            });
        }
        let dirs: Vec<[u32; BITS]> = (0..d).map(direction_numbers).collect();
        let n = 1usize << t;
        let scale = 1.0 / (1u64 << BITS) as f64;
        let mut state = vec![0u32; d];
        let mut coords = Vec::with_capacity(n * d);
        for i in 0..n {
            coords.extend(state.iter().map(|&x| x as f64 * scale));
            // Gray code: flip the direction number of the lowest zero bit of i.
            let c = (!i).trailing_zeros() as usize;
            if c < BITS {
                for (x, v) in state.iter_mut().zip(&dirs) {
                    *x ^= v[c];
                }
            }
        }
        Ok(Self {
            t,
            points: PointSet::new(d, coords)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn log2_len(&self) -> u32 {
        self.t
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    /// `p = 2h w - h`, the grid mapped onto `[-h, h]^d`.
    pub fn scaled(&self, half_width: f64) -> PointSet {
        self.points.map_points(|w, p| {
            for (pi, wi) in p.iter_mut().zip(w) {
                *pi = 2.0 * half_width * wi - half_width;
            }
        })
    }

    /// The grid after a digital shift: the 32-bit expansion of coordinate
    /// `j` is XORed with `shift[j]`. A uniformly random shift makes every
    /// point uniform on the cube while keeping the net structure.
    pub fn digitally_shifted(&self, shift: &[u32]) -> Result<PointSet> {
        if shift.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: shift.len(),
            });
        }
        let to_int = (1u64 << BITS) as f64;
        Ok(self.points.map_points(|w, p| {
            for ((pi, wi), s) in p.iter_mut().zip(w).zip(shift) {
                *pi = (((wi * to_int) as u32) ^ s) as f64 / to_int;
            }
        }))
    }
}

pub fn sobol_points(d: usize, t: u32) -> Result<SobolGrid> {
    SobolGrid::new(d, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_dimension_is_van_der_corput_in_gray_order() {
        let g = sobol_points(1, 3).unwrap();
        assert_eq!(
            g.points().as_slice(),
            &[0.0, 0.5, 0.75, 0.25, 0.375, 0.875, 0.625, 0.125]
        );
    }

    #[test]
    fn initial_direction_numbers_are_odd_and_bounded() {
        for (s, a, m) in DIRECTIONS {
            assert_eq!(m.len(), s as usize);
            assert!(a < (1 << (s - 1)).max(1));
            for (i, &mi) in m.iter().enumerate() {
                assert!(mi % 2 == 1 && mi < (1 << (i + 1)));
            }
        }
    }

    #[test]
    fn shift_is_an_involution() {
        let g = sobol_points(3, 6).unwrap();
        let shift = [0x8000_0000, 0x1234_5678, 0xffff_ffff];
        let once = g.digitally_shifted(&shift).unwrap();
        assert_ne!(&once, g.points());
        let back = SobolGrid { t: 6, points: once }
            .digitally_shifted(&shift)
            .unwrap();
        assert_eq!(&back, g.points());
        assert!(g.digitally_shifted(&[1, 2]).is_err());
    }

    #[test]
    fn range_checks() {
        assert!(sobol_points(0, 3).is_err());
        assert!(sobol_points(17, 3).is_err());
        assert!(sobol_points(2, 21).is_err());
        assert_eq!(sobol_points(2, 0).unwrap().points().len(), 1);
    }
}
