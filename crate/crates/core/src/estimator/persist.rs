//! Line-oriented text form of a fitted [`PskkModel`].
//!
//! ```text
//! pskk-model 1
//! alpha 2
//! a 2.5000000000000000e0
//! d 4
//! lambda 9.9999999999999995e-7
//! n 1009
//! z 1 433 229 98
//! coeffs
//! <N lines, one coefficient each>
//! ```
//!
//! Reals are written with 17 significant digits so that parsing them back is
//! exact; the nodes are regenerated from `z`, `n` and `a`.

use std::fmt::Write as _;

use super::PskkModel;
use crate::error::{Error, Result};
use crate::kernel::KernelParams;
use crate::lattice::{Lattice, ScaledNodeSet};

const MAGIC: &str = "pskk-model 1";

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

impl PskkModel {
    /// Serialises the model. Only lattice-based models can be written.
    pub fn to_text(&self) -> Result<String> {
        let lat = self.lattice().ok_or(Error::Structure)?;
        let kp = self.kernel();
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "alpha {}", kp.alpha());
        let _ = writeln!(s, "a {}", real(kp.a()));
        let _ = writeln!(s, "d {}", kp.d());
        let _ = writeln!(s, "lambda {}", real(self.lambda()));
        let _ = writeln!(s, "n {}", lat.n());
        let z: Vec<String> = lat.z().iter().map(u64::to_string).collect();
        let _ = writeln!(s, "z {}", z.join(" "));
        let _ = writeln!(s, "coeffs");
        for c in self.coeffs() {
            let _ = writeln!(s, "{}", real(*c));
        }
        Ok(s)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some(MAGIC) {
            return Err(Error::Parse(format!("missing '{MAGIC}' header")));
        }
        let mut field = |key: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing field '{key}'")))?;
            match line.split_once(char::is_whitespace) {
                Some((k, v)) if k == key => Ok(v.trim().to_string()),
                _ if line == key => Ok(String::new()),
                _ => Err(Error::Parse(format!("expected '{key}', found '{line}'"))),
            }
        };
        let alpha: usize = parse(&field("alpha")?)?;
        let a: f64 = parse(&field("a")?)?;
        let d: usize = parse(&field("d")?)?;
        let lambda: f64 = parse(&field("lambda")?)?;
        let n: u64 = parse(&field("n")?)?;
        let z: Vec<u64> = field("z")?
            .split_whitespace()
            .map(parse)
            .collect::<Result<_>>()?;
        field("coeffs")?;
        let coeffs: Vec<f64> = lines.map(parse).collect::<Result<_>>()?;

        if z.len() != d {
            return Err(Error::Parse(format!(
                "d = {d} but z has {} components",
                z.len()
            )));
        }
        let kp = KernelParams::new(alpha, a, d)?;
        let lattice = Lattice::new(z, n)?;
        let nodes = ScaledNodeSet::from_lattice(&lattice, a)?;
        PskkModel::from_parts(kp, nodes, coeffs, lambda)
    }
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("cannot parse '{s}'")))
}
