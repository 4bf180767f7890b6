//! Grid syntax shared by the subcommands: `start:stop:count` (inclusive,
//! evenly spaced), a comma list, or a single number.

use dualres_core::{Error, Result};

pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    let number = |t: &str| -> Result<f64> {
        let v: f64 = t
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad number '{}' in grid '{s}'", t.trim())))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Config(format!("non-finite value in grid '{s}'")))
        }
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "range grid must be start:stop:count, got '{s}'"
            )));
        }
        let (a, b) = (number(parts[0])?, number(parts[1])?);
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad point count in grid '{s}'")))?;
        return match n {
            0 => Err(Error::Config(format!("grid '{s}' has no points"))),
            1 => Ok(vec![a]),
            _ => Ok((0..n)
                .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                .collect()),
        };
    }
    s.split(',').map(number).collect()
}

/// Two numbers, `lo:hi` or `lo,hi`.
pub fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let v: Vec<f64> = s
        .split([':', ','])
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("expected two numbers, got '{s}'")))?;
    match v.as_slice() {
        [a, b] if a.is_finite() && b.is_finite() => Ok((*a, *b)),
        _ => Err(Error::Config(format!("expected two numbers, got '{s}'"))),
    }
}

pub fn parse_dims(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad truncation '{s}', expected e.g. 3,3,3,3")))
        })
        .collect()
}
