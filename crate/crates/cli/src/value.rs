//! Flag values: `auto`-or-number, per-sample-size lists and counts written
//! in scientific notation.

use std::fmt::Display;
use std::str::FromStr;

use pskk::harness::ParamSource;

use crate::CliError;

/// Parses a nonnegative integer count, accepting forms such as `1e4`.
pub fn parse_count(s: &str) -> Result<usize, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<usize>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a count"))?;
    if v >= 0.0 && v.fract() == 0.0 && v <= usize::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(format!("'{s}' is not a nonnegative integer"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountList(pub Vec<usize>);

impl FromStr for CountList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(parse_count)
            .collect::<Result<_, _>>()
            .map(CountList)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AutoOr<T> {
    Auto,
    Value(T),
}

impl<T> AutoOr<T> {
    pub fn is_auto(&self) -> bool {
        matches!(self, AutoOr::Auto)
    }
}

impl<T: FromStr> FromStr for AutoOr<T>
where
    T::Err: Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(AutoOr::Auto);
        }
        parse_number(s).map(AutoOr::Value)
    }
}

/// Integers may be given as `1009` or `1.009e3`.
fn parse_number<T: FromStr>(s: &str) -> Result<T, String>
where
    T::Err: Display,
{
    match s.parse::<T>() {
        Ok(v) => Ok(v),
        Err(e) => match s.parse::<f64>() {
            Ok(f) if f.fract() == 0.0 && f >= 0.0 => format!("{f:.0}")
                .parse::<T>()
                .map_err(|_| format!("'{s}': {e}")),
            _ => Err(format!("'{s}': {e}")),
        },
    }
}

/// `auto`, one value, or a comma-separated list with one value per M.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamList<T> {
    Auto,
    Values(Vec<T>),
}

impl<T: FromStr> FromStr for ParamList<T>
where
    T::Err: Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("auto") {
            return Ok(ParamList::Auto);
        }
        s.split(',')
            .map(|v| parse_number(v.trim()))
            .collect::<Result<_, _>>()
            .map(ParamList::Values)
    }
}

impl<T: Copy> ParamList<T> {
    pub fn source(&self, m_count: usize, name: &str) -> Result<ParamSource<T>, CliError> {
        match self {
            ParamList::Auto => Ok(ParamSource::Auto),
            ParamList::Values(v) if v.len() == 1 => Ok(ParamSource::Fixed(v[0])),
            ParamList::Values(v) if v.len() == m_count => Ok(ParamSource::PerM(v.clone())),
            ParamList::Values(v) => Err(CliError::Usage(format!(
                "--{name} has {} values but --m has {m_count}",
                v.len()
            ))),
        }
    }

    pub fn for_each_value(
        &self,
        mut check: impl FnMut(T) -> Result<(), CliError>,
    ) -> Result<(), CliError> {
        if let ParamList::Values(v) = self {
            for &x in v {
                check(x)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(parse_count("1e4"), Ok(10_000));
        assert_eq!(parse_count("250"), Ok(250));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert_eq!("1e2,1e3".parse::<CountList>().unwrap().0, vec![100, 1000]);
    }

    #[test]
    fn auto_or_value() {
        assert_eq!("auto".parse::<AutoOr<f64>>().unwrap(), AutoOr::Auto);
        assert_eq!("1e-6".parse::<AutoOr<f64>>().unwrap(), AutoOr::Value(1e-6));
        assert_eq!(
            "1.009e3".parse::<AutoOr<u64>>().unwrap(),
            AutoOr::Value(1009)
        );
        assert!("x".parse::<AutoOr<u64>>().is_err());
    }

    #[test]
    fn param_lists() {
        let p: ParamList<u64> = "11,31,97".parse().unwrap();
        assert!(matches!(p.source(3, "n"), Ok(ParamSource::PerM(_))));
        assert!(p.source(2, "n").is_err());
        let p: ParamList<f64> = "2.5".parse().unwrap();
        assert_eq!(p.source(4, "a").unwrap(), ParamSource::Fixed(2.5));
    }
}
