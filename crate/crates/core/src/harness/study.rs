//! Sweeps over sample sizes: one MISE estimate per (method, M), a CSV
//! report, fitted log-log slopes and an SVG plot.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;

use super::mise::{estimate_mise, KdeMethod, MiseConfig, MiseReport, ParamsRecord, PskkMethod};
use super::mixture::GaussianMixture;
use crate::error::{Error, Result};
use crate::estimator::{FitOptions, ScheduleConfig};
use crate::kernel::KernelParams;
use crate::lattice::{cbc_construct, Lattice};

/// Smallest sample size used by [`fit_slope`].
pub const SLOPE_MIN_M: usize = 100;

/// Where a PSKK parameter comes from at each sample size.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamSource<T> {
    Fixed(T),
    /// One value per entry of the study's M list.
    PerM(Vec<T>),
    /// Resolved from the decay schedule.
    Auto,
}

impl<T: Copy> ParamSource<T> {
    fn resolve(&self, index: usize, auto: impl FnOnce() -> Result<T>) -> Result<T> {
        match self {
            ParamSource::Fixed(v) => Ok(*v),
            ParamSource::PerM(vs) => vs.get(index).copied().ok_or_else(|| {
                Error::Configuration(format!(
                    "per-M parameter list has {} entries, need index {index}",
                    vs.len()
                ))
            }),
            ParamSource::Auto => auto(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PskkStudyParams {
    pub alpha: usize,
    pub a: ParamSource<f64>,
    pub n: ParamSource<u64>,
    pub lambda: ParamSource<f64>,
    /// Used by every `Auto` source; its `alpha` is overridden by `alpha`.
    pub schedule: ScheduleConfig,
    pub fit: FitOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MethodSpec {
    Pskk(PskkStudyParams),
    Kde,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub truth: GaussianMixture,
    pub ms: Vec<usize>,
    pub methods: Vec<MethodSpec>,
    pub mise: MiseConfig,
}

/// Runs every (method, M) pair in order. Lattices are constructed once per
/// `(N, alpha)` and reused.
pub fn convergence_study(cfg: &StudyConfig) -> Result<Vec<MiseReport>> {
    if cfg.ms.is_empty() || cfg.methods.is_empty() {
        return Err(Error::Configuration("empty M list or method list".into()));
    }
    let d = cfg.truth.dim();
    let mut lattices: HashMap<(u64, usize), Lattice> = HashMap::new();
    let mut reports = Vec::with_capacity(cfg.ms.len() * cfg.methods.len());
    for spec in &cfg.methods {
        for (i, &m) in cfg.ms.iter().enumerate() {
            let report = match spec {
                MethodSpec::Kde => estimate_mise(&KdeMethod, &cfg.truth, m, &cfg.mise)?,
                MethodSpec::Pskk(p) => {
                    let sched_cfg = ScheduleConfig {
                        alpha: p.alpha,
                        ..p.schedule
                    };
                    let mut sched = None;
                    let mut auto = || -> Result<_> {
                        if sched.is_none() {
                            sched = Some(sched_cfg.resolve(m)?);
                        }
                        Ok(sched.expect("resolved above"))
                    };
                    let a = p.a.resolve(i, || auto().map(|s| s.a))?;
                    let n = p.n.resolve(i, || auto().map(|s| s.n))?;
                    let lambda = p.lambda.resolve(i, || auto().map(|s| s.lambda))?;
                    let lattice = match lattices.get(&(n, p.alpha)) {
                        Some(l) => l.clone(),
                        None => {
                            let l = cbc_construct(d, n, p.alpha)?;
                            lattices.insert((n, p.alpha), l.clone());
                            l
                        }
                    };
                    let kp = KernelParams::new(p.alpha, a, d)?;
                    let method = PskkMethod::with_lattice(kp, lattice, lambda)?.with_options(p.fit);
                    estimate_mise(&method, &cfg.truth, m, &cfg.mise)?
                }
            };
            reports.push(report);
        }
    }
    Ok(reports)
}

/// Least-squares slope of `log10 mise` against `log10 M`, using only points
/// with `M >= SLOPE_MIN_M` and positive MISE.
pub fn fit_slope(ms: &[usize], mise: &[f64]) -> Result<f64> {
    if ms.len() != mise.len() {
        return Err(Error::DimensionMismatch {
            expected: ms.len(),
            got: mise.len(),
        });
    }
    let pts: Vec<(f64, f64)> = ms
        .iter()
        .zip(mise)
        .filter(|(m, v)| **m >= SLOPE_MIN_M && **v > 0.0)
        .map(|(m, v)| ((*m as f64).log10(), v.log10()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Configuration(
            "slope fit needs at least two points with M >= 100".into(),
        ));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Configuration(
            "slope fit needs distinct M values".into(),
        ));
    }
    Ok(sxy / sxx)
}

/// Method names in order of first appearance.
fn method_names(reports: &[MiseReport]) -> Vec<&str> {
    let mut names: Vec<&str> = Vec::new();
    for r in reports {
        if !names.contains(&r.method.as_str()) {
            names.push(&r.method);
        }
    }
    names
}

/// Fitted slope per method; methods with too few usable points are omitted.
pub fn slopes_by_method(reports: &[MiseReport]) -> Vec<(String, f64)> {
    method_names(reports)
        .into_iter()
        .filter_map(|name| {
            let (ms, vs): (Vec<usize>, Vec<f64>) = reports
                .iter()
                .filter(|r| r.method == name)
                .map(|r| (r.m, r.mise))
                .unzip();
            fit_slope(&ms, &vs).ok().map(|s| (name.to_string(), s))
        })
        .collect()
}

pub const REPORT_HEADER: [&str; 10] = [
    "method",
    "M",
    "d",
    "alpha",
    "a",
    "N",
    "lambda_or_bandwidth",
    "mise",
    "stderr",
    "runtime_seconds",
];

/// Writes the report CSV. With `timing == false` the runtime column is 0 so
/// that repeated runs produce identical bytes.
pub fn write_report_csv<W: Write>(writer: W, reports: &[MiseReport], timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(REPORT_HEADER)?;
    for r in reports {
        let (alpha, a, n, lb) = match r.params {
            ParamsRecord::Pskk {
                alpha,
                a,
                n,
                lambda,
            } => (
                alpha.to_string(),
                a.to_string(),
                n.to_string(),
                lambda.to_string(),
            ),
            ParamsRecord::Kde { bandwidth } => (
                String::new(),
                String::new(),
                String::new(),
                bandwidth.to_string(),
            ),
            ParamsRecord::None => Default::default(),
        };
        let runtime = if timing { r.runtime_seconds } else { 0.0 };
        w.write_record([
            r.method.clone(),
            r.m.to_string(),
            r.d.to_string(),
            alpha,
            a,
            n,
            lb,
            r.mise.to_string(),
            r.stderr.to_string(),
            runtime.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Log-log plot of MISE against M, one series per method, with the fitted
/// slope in the legend.
pub fn render_plot_svg(reports: &[MiseReport], title: &str) -> Result<String> {
    let usable: Vec<&MiseReport> = reports.iter().filter(|r| r.mise > 0.0 && r.m > 0).collect();
    if usable.is_empty() {
        return Err(Error::Configuration("nothing to plot".into()));
    }
    let lx: Vec<f64> = usable.iter().map(|r| (r.m as f64).log10()).collect();
    let ly: Vec<f64> = usable.iter().map(|r| r.mise.log10()).collect();
    let fold = |v: &[f64], f: fn(f64, f64) -> f64, init: f64| v.iter().copied().fold(init, f);
    let (x0, x1) = (
        fold(&lx, f64::min, f64::INFINITY).floor(),
        fold(&lx, f64::max, f64::NEG_INFINITY)
            .ceil()
            .max(fold(&lx, f64::min, f64::INFINITY).floor() + 1.0),
    );
    let (y0, y1) = (
        fold(&ly, f64::min, f64::INFINITY).floor(),
        fold(&ly, f64::max, f64::NEG_INFINITY)
            .ceil()
            .max(fold(&ly, f64::min, f64::INFINITY).floor() + 1.0),
    );

    let (w, h) = (640.0, 480.0);
    let (left, right, top, bottom) = (80.0, 20.0, 40.0, 60.0);
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    for k in (x0 as i64)..=(x1 as i64) {
        let x = px(k as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#ddd"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">1e{k}</text>"##,
            py(y0),
            py(y1),
            py(y0) + 18.0
        );
    }
    for k in (y0 as i64)..=(y1 as i64) {
        let y = py(k as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">1e{k}</text>"##,
            px(x0),
            px(x1),
            px(x0) - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - left - right,
        h - top - bottom
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">M</text><text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">MISE</text>"#,
        (left + w - right) / 2.0,
        h - 12.0,
        (top + h - bottom) / 2.0,
        (top + h - bottom) / 2.0
    );

    let slopes = slopes_by_method(reports);
    for (i, name) in method_names(&usable.iter().map(|r| (*r).clone()).collect::<Vec<_>>())
        .into_iter()
        .enumerate()
    {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<(f64, f64)> = usable
            .iter()
            .filter(|r| r.method == name)
            .map(|r| (px((r.m as f64).log10()), py(r.mise.log10())))
            .collect();
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path.join(" ")
        );
        for (x, y) in &pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{x:.1}" cy="{y:.1}" r="3.5" fill="{color}"/>"#
            );
        }
        let label = match slopes.iter().find(|(n, _)| n == name) {
            Some((_, sl)) => format!("{name} (slope {sl:.3})"),
            None => name.to_string(),
        };
        let ly = top + 18.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            w - right - 190.0,
            w - right - 165.0,
            w - right - 158.0,
            ly + 4.0,
            escape(&label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
