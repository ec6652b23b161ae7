//! Density estimation on `R^d` with the periodic scaled Korobov kernel
//! (PSKK): samples are wrapped into a box, a kernel ridge system on rank-1
//! lattice nodes is solved by FFT, and the clipped expansion is the estimate.
//!
//! ```
//! use pskk::{fit, KernelParams, PointSet};
//!
//! let samples = PointSet::new(1, vec![-0.3, 0.1, 0.2, 0.5, -1.2]).unwrap();
//! let kp = KernelParams::new(2, 2.0, 1).unwrap();
//! let model = fit(&samples, &kp, 31, 1e-3, None).unwrap();
//! assert!(model.evaluate(&[0.0]) >= 0.0);
//! assert_eq!(model.evaluate(&[3.0]), 0.0);
//! ```

pub mod bernoulli;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod kde;
pub mod kernel;
pub mod lattice;
pub mod points;

pub use error::{Error, Result};
pub use estimator::{
    fit, fit_dense, fit_with, wrap_samples, FitOptions, PskkModel, Schedule, ScheduleConfig,
};
pub use kde::KdeModel;
pub use kernel::KernelParams;
pub use lattice::{cbc_construct, Lattice, ScaledNodeSet};
pub use points::PointSet;
