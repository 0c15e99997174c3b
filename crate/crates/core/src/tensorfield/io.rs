//! Field files: CSV with header `x1[,x2],value` (scalar) or
//! `x1[,x2],value1,...` (vector), one row per node in row-major order, and a
//! JSON sidecar `{dim, lower, upper, nodes}` describing the grid.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use super::field::{ScalarField, VectorField};
use super::grid::{Grid, GridMeta};
use crate::error::{Error, Result};

fn header(dim: usize, components: usize) -> Vec<String> {
    let mut cols: Vec<String> = (1..=dim).map(|k| format!("x{k}")).collect();
    if components == 1 {
        cols.push("value".into());
    } else {
        cols.extend((1..=components).map(|c| format!("value{c}")));
    }
    cols
}

fn write_rows<W: Write>(out: W, grid: &Grid, components: usize, values: &[f64]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(header(grid.dim(), components))?;
    for idx in 0..grid.len() {
        let x = grid.coords(idx);
        let mut row: Vec<String> = x[..grid.dim()].iter().map(|v| format!("{v:e}")).collect();
        row.extend(
            values[idx * components..(idx + 1) * components]
                .iter()
                .map(|v| format!("{v:e}")),
        );
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_scalar_csv(path: impl AsRef<Path>, field: &ScalarField) -> Result<()> {
    let out = BufWriter::new(File::create(path)?);
    write_rows(out, field.grid(), 1, field.values())
}

pub fn write_vector_csv(path: impl AsRef<Path>, field: &VectorField) -> Result<()> {
    let out = BufWriter::new(File::create(path)?);
    write_rows(out, field.grid(), field.dim(), field.values())
}

pub fn write_grid_json(path: impl AsRef<Path>, grid: &Grid) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &grid.meta())?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_grid_json(path: impl AsRef<Path>) -> Result<Grid> {
    let meta: GridMeta = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    Grid::try_from(meta)
}

/// Reads node values, checking the coordinate columns against `grid`.
/// Returns the flat values and the number of components per node.
fn read_rows(path: &Path, grid: &Grid) -> Result<(Vec<f64>, usize)> {
    let mut rdr = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let width = rdr.headers()?.len();
    let dim = grid.dim();
    if width <= dim {
        return Err(Error::Format(format!(
            "{}: expected at least {} columns",
            path.display(),
            dim + 1
        )));
    }
    let components = width - dim;
    let tol = 1e-9 * grid.h_max();
    let mut values = Vec::with_capacity(grid.len() * components);
    let mut idx = 0;
    for record in rdr.records() {
        let record = record?;
        if idx >= grid.len() {
            return Err(Error::Format(format!("{}: more rows than grid nodes", path.display())));
        }
        let nums = record
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::Format(format!("{}: row {}: {e}", path.display(), idx + 1)))?;
        let x = grid.coords(idx);
        if (0..dim).any(|k| (nums[k] - x[k]).abs() > tol) {
            return Err(Error::Format(format!(
                "{}: row {} coordinates do not match the grid",
                path.display(),
                idx + 1
            )));
        }
        values.extend_from_slice(&nums[dim..]);
        idx += 1;
    }
    if idx != grid.len() {
        return Err(Error::ShapeMismatch {
            expected: grid.len(),
            got: idx,
        });
    }
    Ok((values, components))
}

pub fn read_scalar_csv(path: impl AsRef<Path>, grid: &Grid) -> Result<ScalarField> {
    let (values, components) = read_rows(path.as_ref(), grid)?;
    if components != 1 {
        return Err(Error::Format(format!("expected one value column, found {components}")));
    }
    ScalarField::new(grid.clone(), values)
}

pub fn read_vector_csv(path: impl AsRef<Path>, grid: &Grid) -> Result<VectorField> {
    let (values, components) = read_rows(path.as_ref(), grid)?;
    if components != grid.dim() {
        return Err(Error::Format(format!(
            "expected {} value columns, found {components}",
            grid.dim()
        )));
    }
    VectorField::new(grid.clone(), values)
}

/// Scalar or vector field read from CSV, depending on the column count.
#[derive(Debug, Clone)]
pub enum AnyField {
    Scalar(ScalarField),
    Vector(VectorField),
}

pub fn read_field_csv(path: impl AsRef<Path>, grid: &Grid) -> Result<AnyField> {
    let (values, components) = read_rows(path.as_ref(), grid)?;
    if components == 1 {
        Ok(AnyField::Scalar(ScalarField::new(grid.clone(), values)?))
    } else if components == grid.dim() {
        Ok(AnyField::Vector(VectorField::new(grid.clone(), values)?))
    } else {
        Err(Error::Format(format!("unsupported value column count {components}")))
    }
}
