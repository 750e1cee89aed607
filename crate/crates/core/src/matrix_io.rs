//! Plain-text matrix files.
//!
//! The first non-comment line holds `rows cols`; each following line holds one
//! row of entries written as `a`, `a+bi` or `a-bi`. Lines starting with `#` are
//! ignored.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::operator::{DenseOperator, C64};

pub fn parse_complex(tok: &str) -> Result<C64> {
    let t = tok.trim();
    let bad = || Error::Parse(format!("bad matrix entry `{tok}`"));
    if let Some(body) = t.strip_suffix('i') {
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        return match split {
            Some(k) => {
                let re: f64 = body[..k].parse().map_err(|_| bad())?;
                let im_s = &body[k..];
                let im: f64 = match im_s {
                    "+" => 1.0,
                    "-" => -1.0,
                    s => s.parse().map_err(|_| bad())?,
                };
                Ok(C64::new(re, im))
            }
            None => {
                let im: f64 = match body {
                    "" | "+" => 1.0,
                    "-" => -1.0,
                    s => s.parse().map_err(|_| bad())?,
                };
                Ok(C64::new(0.0, im))
            }
        };
    }
    Ok(C64::new(t.parse().map_err(|_| bad())?, 0.0))
}

pub fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{:e}", z.re)
    } else if z.im.is_sign_negative() {
        format!("{:e}-{:e}i", z.re, -z.im)
    } else {
        format!("{:e}+{:e}i", z.re, z.im)
    }
}

pub fn parse_matrix(text: &str) -> Result<Array2<C64>> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad header `{header}`"))))
        .collect::<Result<_>>()?;
    if dims.len() != 2 {
        return Err(Error::Parse(format!("header must be `rows cols`, got `{header}`")));
    }
    let (r, c) = (dims[0], dims[1]);
    let mut m = Array2::zeros((r, c));
    for i in 0..r {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {r} rows, found {i}")))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != c {
            return Err(Error::Shape {
                expected: format!("{c} entries in row {i}"),
                got: format!("{}", toks.len()),
            });
        }
        for (j, t) in toks.iter().enumerate() {
            m[[i, j]] = parse_complex(t)?;
        }
    }
    if lines.next().is_some() {
        return Err(Error::Parse(format!("more than {r} rows")));
    }
    Ok(m)
}

pub fn format_matrix(m: &Array2<C64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|z| format_complex(*z)).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

pub fn read_operator(path: &Path) -> Result<DenseOperator> {
    let text = std::fs::read_to_string(path)?;
    Ok(DenseOperator::new(parse_matrix(&text)?))
}

pub fn write_operator(path: &Path, op: &DenseOperator) -> Result<()> {
    Ok(std::fs::write(path, format_matrix(op.entries()))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries() {
        assert_eq!(parse_complex("1.5").unwrap(), C64::new(1.5, 0.0));
        assert_eq!(parse_complex("1-2i").unwrap(), C64::new(1.0, -2.0));
        assert_eq!(parse_complex("-1e-3+2.5E+2i").unwrap(), C64::new(-1e-3, 250.0));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert!(parse_complex("1+x").is_err());
    }

    #[test]
    fn round_trip() {
        let m = ndarray::array![[C64::new(1.0, -0.5), C64::new(0.1, 0.0)], [C64::new(-3.0, 2e-12), C64::new(0.0, 1.0)]];
        assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
    }
}
