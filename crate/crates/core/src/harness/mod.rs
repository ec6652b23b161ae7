//! Benchmark harness: ground-truth mixtures, Sobol' grids, MISE estimation
//! and convergence sweeps.

pub mod mise;
pub mod mixture;
pub mod sobol;
pub mod study;

pub use mise::{
    estimate_mise, Density, DensityMethod, FixedFunction, KdeMethod, MiseConfig, MiseReport,
    ParamsRecord, PskkMethod,
};
pub use mixture::GaussianMixture;
pub use sobol::{sobol_points, SobolGrid};
pub use study::{
    convergence_study, fit_slope, render_plot_svg, slopes_by_method, write_report_csv, MethodSpec,
    ParamSource, PskkStudyParams, StudyConfig,
};
