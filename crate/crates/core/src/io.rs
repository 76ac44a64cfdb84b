//! File formats: CSV matrices with missing entries, JSON-lines trajectories,
//! and factor exports.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::engine::{Clock, FactorPair, Orientation, Sample, Trajectory};
use crate::error::{Error, Result};
use crate::masked::{MaskedMatrix, Matrix};

fn parse_field(field: &str, row: usize, col: usize) -> Result<Option<f64>> {
    let f = field.trim();
    if f.is_empty() || f.eq_ignore_ascii_case("nan") {
        return Ok(None);
    }
    f.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .map(Some)
        .ok_or_else(|| Error::InvalidInput(format!("row {row}, column {col}: `{f}` is not a finite number")))
}

/// Reads a row-major CSV matrix. Empty fields and `nan` (any case) are
/// missing. With `header`, the first record is skipped.
pub fn read_matrix<R: Read>(reader: R, header: bool) -> Result<MaskedMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(false)
        .from_reader(reader);
    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, f)| parse_field(f, i, j))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::InvalidInput("CSV matrix has no entries".into()));
    }
    MaskedMatrix::from_options(&rows)
}

pub fn read_matrix_csv(path: &Path, header: bool) -> Result<MaskedMatrix> {
    read_matrix(File::open(path)?, header)
}

/// Writes a masked matrix as CSV, missing entries as empty fields. Values
/// use the shortest representation that parses back to the same `f64`.
pub fn write_matrix<W: Write>(writer: W, m: &MaskedMatrix) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for i in 0..m.rows() {
        wtr.write_record((0..m.cols()).map(|j| m.get(i, j).map_or_else(String::new, |x| x.to_string())))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_matrix_csv(path: &Path, m: &MaskedMatrix) -> Result<()> {
    write_matrix(BufWriter::new(File::create(path)?), m)
}

pub fn write_dense_csv(path: &Path, m: &Matrix) -> Result<()> {
    write_matrix_csv(path, &MaskedMatrix::full(m.clone())?)
}

pub fn read_dense_csv(path: &Path) -> Result<Matrix> {
    let m = read_matrix_csv(path, false)?;
    if m.given_count() != m.rows() * m.cols() {
        return Err(Error::InvalidInput(format!("{} has missing entries", path.display())));
    }
    Ok(m.values().clone())
}

/// One JSON object per sample.
pub fn write_trajectory<W: Write>(mut writer: W, traj: &Trajectory) -> Result<()> {
    for s in &traj.samples {
        serde_json::to_writer(&mut writer, s)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_trajectory_jsonl(path: &Path, traj: &Trajectory) -> Result<()> {
    write_trajectory(BufWriter::new(File::create(path)?), traj)
}

/// Reads JSON-lines samples. Blank lines are skipped.
pub fn read_trajectory<R: Read>(reader: R, clock: Clock, t_max: f64) -> Result<Trajectory> {
    let mut traj = Trajectory::new(clock, t_max);
    for line in BufReader::new(reader).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let s: Sample = serde_json::from_str(&line)?;
        if clock == Clock::Seconds && s.seconds.is_none() {
            return Err(Error::InvalidInput(
                "sample without t_seconds on a wall-clock trajectory".into(),
            ));
        }
        traj.push(s);
    }
    Ok(traj)
}

pub fn read_trajectory_jsonl(path: &Path, clock: Clock, t_max: f64) -> Result<Trajectory> {
    read_trajectory(File::open(path)?, clock, t_max)
}

#[derive(Serialize)]
struct FactorSidecar<'a, C: Serialize> {
    rank: usize,
    rows: usize,
    cols: usize,
    fitted_orientation: &'a Orientation,
    config: &'a C,
}

/// Writes `U.csv` and `V.csv` in the caller's orientation plus
/// `factors.json` recording the fitting orientation and `config`.
pub fn export_factors<C: Serialize>(dir: &Path, fitted: &FactorPair, config: &C) -> Result<()> {
    fs::create_dir_all(dir)?;
    let restored = fitted.restore()?;
    write_dense_csv(&dir.join("U.csv"), &restored.u)?;
    write_dense_csv(&dir.join("V.csv"), &restored.v)?;
    let sidecar = FactorSidecar {
        rank: restored.rank(),
        rows: restored.u.rows(),
        cols: restored.v.cols(),
        fitted_orientation: &fitted.orientation,
        config,
    };
    let mut f = BufWriter::new(File::create(dir.join("factors.json"))?);
    serde_json::to_writer_pretty(&mut f, &sidecar)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}
