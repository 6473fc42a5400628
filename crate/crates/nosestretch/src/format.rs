//! Number formatting shared by every emitted artifact: 17 significant
//! digits, and non-finite values rejected.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{CliError, CliResult};

/// Format a finite number with 17 significant digits.
pub fn fmt17(x: f64) -> CliResult<String> {
    if !x.is_finite() {
        return Err(CliError::Validity(format!("non-finite value {x} in output")));
    }
    Ok(format!("{x:.16e}"))
}

/// A number serialized verbatim with 17 significant digits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let text = fmt17(self.0).map_err(serde::ser::Error::custom)?;
        RawValue::from_string(text).map_err(serde::ser::Error::custom)?.serialize(s)
    }
}

pub fn nums<const N: usize>(xs: [f64; N]) -> [Num; N] {
    xs.map(Num)
}

/// Serialize to a single JSON line with a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> CliResult<String> {
    let mut s = serde_json::to_string(v).map_err(|e| CliError::Validity(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Serialize to indented JSON with a trailing newline.
pub fn to_json_pretty<T: Serialize>(v: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Validity(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// CSV text with a header and numeric rows.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> CliResult<String> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells = row.into_iter().map(fmt17).collect::<CliResult<Vec<_>>>()?;
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_file(path: &std::path::Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path.display(), e))
}

pub fn read_file(path: &std::path::Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 123_456_789.123_456_79, 0.0] {
            let s = fmt17(x).unwrap();
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17);
        }
    }

    #[test]
    fn non_finite_rejected() {
        assert!(fmt17(f64::NAN).is_err());
        assert!(to_json(&Num(f64::INFINITY)).is_err());
        assert!(csv(&["a"], [vec![f64::NAN]]).is_err());
    }

    #[test]
    fn raw_numbers_in_json() {
        assert_eq!(to_json(&nums([1.0, 0.5])).unwrap(), "[1.0000000000000000e0,5.0000000000000000e-1]\n");
    }
}
