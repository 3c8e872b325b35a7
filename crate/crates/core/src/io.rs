//! Field dumps and convergence logs.
//!
//! CSV layout: a header line (`x,value` or `x1,x2,value`), then one row per
//! node in grid order (`x2` fastest for 2D). Every number is printed with 17
//! significant digits, which round-trips `f64` exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field1D, Field2D, Grid1D, Grid2D};

pub const HEADER_1D: [&str; 2] = ["x", "value"];
pub const HEADER_2D: [&str; 3] = ["x1", "x2", "value"];

/// Relative tolerance for recognising a uniform grid in a CSV file.
const COORD_TOL: f64 = 1e-9;

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse(format!("{other:?}")),
        }
    } else {
        Error::Parse(e.to_string())
    }
}

pub fn write_field1d_csv<W: Write>(out: W, f: &Field1D) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER_1D).map_err(csv_err)?;
    for (i, v) in f.values().iter().enumerate() {
        w.write_record([fmt(f.grid().x(i)), fmt(*v)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_field2d_csv<W: Write>(out: W, f: &Field2D) -> Result<()> {
    let g = f.grid();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER_2D).map_err(csv_err)?;
    for i1 in 0..g.n1() {
        for i2 in 0..g.n2() {
            let (x1, x2) = g.coords(i1, i2);
            w.write_record([fmt(x1), fmt(x2), fmt(f.get(i1, i2))])
                .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_rows<R: Read>(input: R, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let found: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(Error::Parse(format!("expected header {header:?}, found {found:?}")));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != header.len() {
            return Err(Error::Parse(format!("row {} has {} columns", line + 2, rec.len())));
        }
        let row = rec
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: {s:?}: {e}", line + 2)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn axis_from(coords: &[f64]) -> Result<Grid1D> {
    let n = coords.len();
    let g = Grid1D::new(coords[0], coords[n - 1], n)?;
    let scale = (g.b() - g.a()).abs().max(1.0);
    for (i, &c) in coords.iter().enumerate() {
        if (c - g.x(i)).abs() > COORD_TOL * scale {
            return Err(Error::Parse(format!(
                "coordinate {c} at position {i} is off the uniform grid"
            )));
        }
    }
    Ok(g)
}

pub fn read_field1d_csv<R: Read>(input: R) -> Result<Field1D> {
    let rows = read_rows(input, &HEADER_1D)?;
    if rows.len() < 3 {
        return Err(Error::Parse(format!("need at least 3 rows, got {}", rows.len())));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let grid = axis_from(&xs)?;
    Field1D::new(grid, rows.into_iter().map(|r| r[1]).collect())
}

pub fn read_field2d_csv<R: Read>(input: R) -> Result<Field2D> {
    let rows = read_rows(input, &HEADER_2D)?;
    if rows.is_empty() {
        return Err(Error::Parse("no data rows".into()));
    }
    let n2 = rows.iter().take_while(|r| r[0] == rows[0][0]).count();
    if n2 < 3 || rows.len() % n2 != 0 {
        return Err(Error::Parse(format!(
            "{} rows do not form a grid with {n2} columns",
            rows.len()
        )));
    }
    let n1 = rows.len() / n2;
    if n1 < 3 {
        return Err(Error::Parse(format!("need at least 3 x1 values, got {n1}")));
    }
    let x1: Vec<f64> = (0..n1).map(|i| rows[i * n2][0]).collect();
    let x2: Vec<f64> = rows[..n2].iter().map(|r| r[1]).collect();
    let grid = Grid2D::from_axes(axis_from(&x1)?, axis_from(&x2)?);
    for (k, r) in rows.iter().enumerate() {
        if r[0] != x1[k / n2] || r[1] != x2[k % n2] {
            return Err(Error::Parse(format!("row {} breaks the x1-major ordering", k + 2)));
        }
    }
    Field2D::new(grid, rows.into_iter().map(|r| r[2]).collect())
}

pub fn save_field1d(path: &Path, f: &Field1D) -> Result<()> {
    write_field1d_csv(BufWriter::new(File::create(path)?), f)
}

pub fn save_field2d(path: &Path, f: &Field2D) -> Result<()> {
    write_field2d_csv(BufWriter::new(File::create(path)?), f)
}

pub fn load_field1d(path: &Path) -> Result<Field1D> {
    read_field1d_csv(BufReader::new(File::open(path)?))
}

pub fn load_field2d(path: &Path) -> Result<Field2D> {
    read_field2d_csv(BufReader::new(File::open(path)?))
}

/// One JSON object per line.
pub fn write_jsonl<W: Write, T: Serialize>(mut out: W, items: &[T]) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item).map_err(|e| Error::Parse(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    write_jsonl(BufWriter::new(File::create(path)?), items)
}
