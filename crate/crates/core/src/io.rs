//! Field file emission and ingestion.
//!
//! Fields are written as CSV with header `r,theta,value` in row-major order
//! (radius outer, angle inner). Values use the shortest round-trip decimal
//! form, so reading a file back reproduces the solved field bit-exactly and
//! identical configs produce bit-identical files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Result, SolverError};
use crate::field::{AnnulusGrid, ScalarField};

pub fn write_field(path: &Path, field: &ScalarField) -> Result<()> {
    let grid = field.grid();
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "r,theta,value")?;
    for i in 0..grid.nr() {
        for j in 0..grid.ntheta() {
            writeln!(w, "{},{},{}", grid.r(i), grid.theta(j), field.get(i, j))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a field CSV, reconstructing the grid from the node pattern.
pub fn read_field(path: &Path) -> Result<ScalarField> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line.trim() != "r,theta,value" {
                return Err(SolverError::Config(format!(
                    "{}: expected header 'r,theta,value', got '{line}'",
                    path.display()
                )));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let mut next = |name: &str| -> Result<f64> {
            parts
                .next()
                .ok_or_else(|| {
                    SolverError::Config(format!(
                        "{}:{}: missing {name}",
                        path.display(),
                        lineno + 1
                    ))
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| {
                    SolverError::Config(format!(
                        "{}:{}: bad {name}: {e}",
                        path.display(),
                        lineno + 1
                    ))
                })
        };
        rows.push((next("r")?, next("theta")?, next("value")?));
    }
    if rows.is_empty() {
        return Err(SolverError::Config(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    let r0 = rows[0].0;
    let ntheta = rows.iter().take_while(|(r, _, _)| *r == r0).count();
    if ntheta == 0 || rows.len() % ntheta != 0 {
        return Err(SolverError::Config(format!(
            "{}: inconsistent angular node count",
            path.display()
        )));
    }
    let nr = rows.len() / ntheta;
    let r1 = rows[rows.len() - 1].0;
    let grid = AnnulusGrid::new(r0, r1, nr, ntheta)?;
    let mut values = Array2::zeros((nr, ntheta));
    for (k, (r, theta, v)) in rows.into_iter().enumerate() {
        let (i, j) = (k / ntheta, k % ntheta);
        if (r - grid.r(i)).abs() > 1e-9 * (1.0 + r.abs())
            || (theta - grid.theta(j)).abs() > 1e-9
        {
            return Err(SolverError::Config(format!(
                "{}: node ({r}, {theta}) does not lie on a uniform grid",
                path.display()
            )));
        }
        values[[i, j]] = v;
    }
    ScalarField::from_values(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_roundtrip_is_bit_exact() {
        let g = AnnulusGrid::new(1.0, 2.0, 9, 8).unwrap();
        let f = ScalarField::from_fn(g, |r, t| (7.3 * r * t).sin() / 3.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        write_field(&path, &f).unwrap();
        let back = read_field(&path).unwrap();
        assert_eq!(back.grid(), g);
        assert_eq!(back.values(), f.values());
    }
}
