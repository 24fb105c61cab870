use std::io::{BufRead, Write};

use super::{Grid, GridDensity};
use crate::error::{Error, Result};

/// Largest tolerated relative deviation of a spacing from the mean spacing.
const SPACING_DEVIATION: f64 = 1e-9;

/// Writes `x,value` rows with 17 significant digits.
pub fn write_csv<W: Write>(d: &GridDensity, mut out: W) -> Result<()> {
    writeln!(out, "x,value")?;
    for (x, v) in d.grid().points().zip(d.values()) {
        writeln!(out, "{x:.16e},{v:.16e}")?;
    }
    Ok(())
}

/// Reads a density snapshot written by [`write_csv`]. Rejects non-uniform
/// spacing.
pub fn read_csv<R: BufRead>(input: R) -> Result<GridDensity> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))??;
    if header.trim() != "x,value" {
        return Err(Error::Parse(format!("expected header `x,value`, got `{}`", header.trim())));
    }
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (x, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("line {}: expected two columns", lineno + 2)))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))
        };
        xs.push(parse(x)?);
        vs.push(parse(v)?);
    }
    if xs.len() < 2 {
        return Err(Error::Parse("need at least two rows".into()));
    }
    let n = xs.len();
    let dx = (xs[n - 1] - xs[0]) / (n as f64 - 1.0);
    for (i, w) in xs.windows(2).enumerate() {
        let dev = ((w[1] - w[0]) - dx).abs() / dx.abs();
        if dev > SPACING_DEVIATION {
            return Err(Error::InvalidGrid(format!(
                "non-uniform spacing at row {}: relative deviation {dev:.3e}",
                i + 2
            )));
        }
    }
    GridDensity::new(Grid::new(xs[0], xs[n - 1], n)?, vs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_samples() {
        let d = GridDensity::gaussian(0.3, 0.8, Grid::new(-10.0, 10.0, 257).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), d.len());
        for (a, b) in back.values().iter().zip(d.values()) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1e-300));
        }
    }

    #[test]
    fn non_uniform_spacing_rejected() {
        let text = "x,value\n0,0\n1,1\n2.5,1\n3,0\n";
        assert!(matches!(read_csv(text.as_bytes()), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn bad_header_rejected() {
        assert!(matches!(read_csv("a,b\n0,0\n".as_bytes()), Err(Error::Parse(_))));
    }
}
