//! Plain numeric CSV matrices: no header, one matrix row per line.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use lowrank::{DenseMatrix, LowRankError, ObservationMask, Result};

/// Reads a numeric matrix; empty cells (and `nan`) mark missing entries,
/// which come back as zeros together with the mask of present entries.
pub fn read_matrix(path: &Path) -> Result<(DenseMatrix, ObservationMask)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(File::open(path)?));
    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let offset = rec.position().map_or(0, |p| p.byte() as usize);
        let row = rec
            .iter()
            .map(|cell| {
                if cell.is_empty() {
                    return Ok(None);
                }
                let v: f64 = cell.parse().map_err(|_| LowRankError::Parse {
                    offset,
                    message: format!("not a number: `{cell}`"),
                })?;
                Ok(if v.is_nan() { None } else { Some(v) })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(LowRankError::Parse {
                    offset,
                    message: format!("row has {} cells, expected {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    let (m, n) = (rows.len(), rows.first().map_or(0, Vec::len));
    if m == 0 || n == 0 {
        return Err(LowRankError::InvalidArgument(format!(
            "{} holds no matrix",
            path.display()
        )));
    }
    let values = DenseMatrix::from_fn(m, n, |i, j| rows[i][j].unwrap_or(0.0));
    let present = (0..n)
        .flat_map(|j| (0..m).map(move |i| (i, j)))
        .map(|(i, j)| rows[i][j].is_some());
    let mask = ObservationMask::from_bitmap(m, n, present.collect())?;
    Ok((values, mask))
}

/// Writes every entry with 17 significant digits.
pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for i in 0..m.rows() {
        let line: Vec<String> = (0..m.cols())
            .map(|j| format!("{:.16e}", m.get(i, j)))
            .collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}
