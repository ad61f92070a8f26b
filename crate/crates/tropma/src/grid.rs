//! CSV formats: periodic grid samples (header "n1,...,nd" with the
//! per-axis sizes, row-major data with the first coordinate slowest)
//! and atom tables for plotting.

use std::fmt::Write as _;
use std::path::Path;

use tropma_core::clmeasure::DiscreteMeasure;
use tropma_core::rat;

use crate::AppError;

pub fn read_grid_csv(path: &Path) -> Result<(Vec<usize>, Vec<f64>), AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::input(format!("cannot read {}: {e}", path.display())))?;
    parse_grid_csv(&text).map_err(|e| match e {
        AppError::Input(m) => AppError::input(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_grid_csv(text: &str) -> Result<(Vec<usize>, Vec<f64>), AppError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| AppError::input("empty grid file".into()))?;
    let dims: Vec<usize> = header
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| AppError::input(format!("bad grid header entry '{t}'")))
        })
        .collect::<Result<_, _>>()?;
    if dims.is_empty() || dims.iter().any(|&n| n == 0) {
        return Err(AppError::input("grid header must list positive sizes".into()));
    }
    let expected: usize = dims.iter().product();
    let mut values = Vec::with_capacity(expected);
    for line in lines {
        for tok in line.split(',') {
            let tok = tok.trim();
            if tok.is_empty() {
                continue;
            }
            values.push(
                tok.parse::<f64>()
                    .map_err(|_| AppError::input(format!("bad grid value '{tok}'")))?,
            );
        }
    }
    if values.len() != expected {
        return Err(AppError::input(format!(
            "grid has {} values but the header promises {expected}",
            values.len()
        )));
    }
    Ok((dims, values))
}

pub fn format_grid_csv(dims: &[usize], values: &[f64]) -> String {
    let mut out = String::new();
    let header: Vec<String> = dims.iter().map(|n| n.to_string()).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    // one line per slice of the last axis
    let row = *dims.last().unwrap();
    for chunk in values.chunks(row) {
        let line: Vec<String> = chunk.iter().map(|v| format!("{v}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_grid_csv(path: &Path, dims: &[usize], values: &[f64]) -> Result<(), AppError> {
    std::fs::write(path, format_grid_csv(dims, values))
        .map_err(|e| AppError::input(format!("cannot write {}: {e}", path.display())))
}

/// One atom per row: the point coordinates (as floats, for plotting)
/// followed by the weight.
pub fn format_atoms_csv(m: &DiscreteMeasure, dim: usize) -> String {
    let mut out = String::new();
    for i in 1..=dim {
        let _ = write!(out, "x{i},");
    }
    out.push_str("w\n");
    for (x, w) in &m.atoms {
        for xi in x {
            let _ = write!(out, "{},", rat::to_f64(xi));
        }
        let _ = writeln!(out, "{}", rat::to_f64(w));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_round_trip() {
        let dims = [2usize, 3];
        let vals = [1.0, 2.5, -0.125, 4.0, 5.0, 6.0];
        let text = format_grid_csv(&dims, &vals);
        assert!(text.starts_with("2,3\n"));
        let (d2, v2) = parse_grid_csv(&text).unwrap();
        assert_eq!(d2, dims.to_vec());
        assert_eq!(v2, vals.to_vec());
    }

    #[test]
    fn rejects_wrong_count() {
        assert!(parse_grid_csv("2,2\n1,2,3\n").is_err());
        assert!(parse_grid_csv("").is_err());
        assert!(parse_grid_csv("0\n").is_err());
    }
}
