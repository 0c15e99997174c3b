//! On-disk layout for problems and solutions.
//!
//! A problem directory holds `problem.json` (grid, parameters and the names of
//! the field files) next to `f.csv` and `g.csv`. A solution directory holds
//! `result.json`, `u.csv`, `grid.json` and `trace.csv` (`iter,energy,grad_norm`).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ProblemSpec, SolveResult, TraceRow};
use crate::error::Result;
use crate::plap_math::PLapParams;
use crate::tensorfield::io::{read_scalar_csv, write_grid_json, write_scalar_csv};
use crate::tensorfield::GridMeta;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub grid: GridMeta,
    pub params: PLapParams,
    pub f: String,
    pub g: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveSummary {
    pub energy: f64,
    pub el_residual: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub tol_res: f64,
    pub tol_grad: f64,
    pub grid: GridMeta,
    pub u: String,
    pub trace: String,
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn write_problem(dir: impl AsRef<Path>, spec: &ProblemSpec) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    write_scalar_csv(dir.join("f.csv"), &spec.f)?;
    write_scalar_csv(dir.join("g.csv"), &spec.g)?;
    let file = ProblemFile {
        grid: spec.grid().meta(),
        params: spec.params,
        f: "f.csv".into(),
        g: "g.csv".into(),
    };
    write_json(&dir.join("problem.json"), &file)
}

/// Reads `problem.json`; field paths are resolved relative to its directory.
pub fn read_problem(path: impl AsRef<Path>) -> Result<ProblemSpec> {
    let path = path.as_ref();
    let file: ProblemFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    let grid = crate::tensorfield::Grid::try_from(file.grid)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let f = read_scalar_csv(base.join(&file.f), &grid)?;
    let g = read_scalar_csv(base.join(&file.g), &grid)?;
    ProblemSpec::new(file.params, f, g)
}

pub fn write_trace_csv(path: impl AsRef<Path>, trace: &[TraceRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["iter", "energy", "grad_norm"])?;
    for row in trace {
        wtr.write_record([
            row.iteration.to_string(),
            format!("{:e}", row.energy),
            format!("{:e}", row.grad_norm),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn summary(result: &SolveResult) -> SolveSummary {
    SolveSummary {
        energy: result.energy,
        el_residual: result.el_residual,
        grad_norm: result.grad_norm,
        iterations: result.iterations,
        converged: result.converged,
        tol_res: result.tol_res,
        tol_grad: result.tol_grad,
        grid: result.u.grid().meta(),
        u: "u.csv".into(),
        trace: "trace.csv".into(),
    }
}

pub fn write_solve_result(dir: impl AsRef<Path>, result: &SolveResult) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    write_scalar_csv(dir.join("u.csv"), &result.u)?;
    write_grid_json(dir.join("grid.json"), result.u.grid())?;
    write_trace_csv(dir.join("trace.csv"), &result.trace)?;
    write_json(&dir.join("result.json"), &summary(result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensorfield::{Grid, ScalarField};

    #[test]
    fn problem_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::line(-1.0, 1.0, 9).unwrap();
        let spec = ProblemSpec::new(
            PLapParams::new(3.0, 1e-2).with_s(1.2),
            ScalarField::constant(&grid, 1.0).unwrap(),
            ScalarField::from_fn(&grid, |x| x[0] * x[0]).unwrap(),
        )
        .unwrap();
        write_problem(dir.path(), &spec).unwrap();
        let back = read_problem(dir.path().join("problem.json")).unwrap();
        assert_eq!(back.params, spec.params);
        assert_eq!(back.g, spec.g);
        assert_eq!(back.f, spec.f);
    }
}
