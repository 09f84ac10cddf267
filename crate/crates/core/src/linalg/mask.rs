use crate::error::{invalid, Result};

/// The observed index set Ω of an `rows × cols` matrix.
///
/// Stored as a column-major membership bitmap, so duplicates cannot exist
/// and membership tests are O(1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationMask {
    rows: usize,
    cols: usize,
    observed: Vec<bool>,
    count: usize,
}

impl ObservationMask {
    /// Builds a mask from explicit `(row, col)` pairs.
    pub fn from_indices(
        rows: usize,
        cols: usize,
        indices: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return invalid("mask dimensions must be positive");
        }
        let mut observed = vec![false; rows * cols];
        let mut count = 0;
        for (i, j) in indices {
            if i >= rows || j >= cols {
                return invalid(format!("index ({i}, {j}) outside {rows}x{cols} mask"));
            }
            let slot = &mut observed[j * rows + i];
            if *slot {
                return invalid(format!("duplicate index ({i}, {j}) in mask"));
            }
            *slot = true;
            count += 1;
        }
        Ok(Self {
            rows,
            cols,
            observed,
            count,
        })
    }

    /// Builds a mask from a column-major membership vector.
    pub fn from_bitmap(rows: usize, cols: usize, observed: Vec<bool>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return invalid("mask dimensions must be positive");
        }
        if observed.len() != rows * cols {
            return invalid(format!(
                "bitmap has {} entries, expected {}",
                observed.len(),
                rows * cols
            ));
        }
        let count = observed.iter().filter(|&&b| b).count();
        Ok(Self {
            rows,
            cols,
            observed,
            count,
        })
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            observed: vec![true; rows * cols],
            count: rows * cols,
        }
    }

    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            observed: vec![false; rows * cols],
            count: 0,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// |Ω|.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn is_full(&self) -> bool {
        self.count == self.rows * self.cols
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        row < self.rows && col < self.cols && self.observed[col * self.rows + row]
    }

    /// Column-major membership bitmap.
    pub fn bitmap(&self) -> &[bool] {
        &self.observed
    }

    /// Observed `(row, col)` pairs in column-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let rows = self.rows;
        self.observed
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(idx, _)| (idx % rows, idx / rows))
    }

    /// Ω⊥.
    pub fn complement(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            observed: self.observed.iter().map(|b| !b).collect(),
            count: self.rows * self.cols - self.count,
        }
    }

    /// Observed column indices for each row.
    pub fn observed_per_row(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.rows];
        for (i, j) in self.iter() {
            out[i].push(j);
        }
        out
    }

    /// Observed row indices for each column.
    pub fn observed_per_col(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cols];
        for (i, j) in self.iter() {
            out[j].push(i);
        }
        out
    }

    /// |Ω| / ((m + n − r)·r).
    pub fn oversampling_ratio(&self, rank: usize) -> f64 {
        let dof = (self.rows + self.cols - rank) * rank;
        self.count as f64 / dof as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_out_of_bounds() {
        assert!(ObservationMask::from_indices(2, 2, [(0, 0), (0, 0)]).is_err());
        assert!(ObservationMask::from_indices(2, 2, [(2, 0)]).is_err());
        let m = ObservationMask::from_indices(2, 3, [(1, 2), (0, 0)]).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.iter().collect::<Vec<_>>(), vec![(0, 0), (1, 2)]);
        assert!(m.contains(1, 2) && !m.contains(1, 1));
    }

    #[test]
    fn complement_partitions_the_grid() {
        let m = ObservationMask::from_indices(3, 3, [(0, 1), (2, 2)]).unwrap();
        let c = m.complement();
        assert_eq!(m.len() + c.len(), 9);
        for i in 0..3 {
            for j in 0..3 {
                assert_ne!(m.contains(i, j), c.contains(i, j));
            }
        }
    }

    #[test]
    fn oversampling_of_exact_dof_is_one() {
        // (m + n − r)·r = (4 + 4 − 1)·1 = 7 observed entries.
        let idx: Vec<_> = (0..7).map(|k| (k % 4, k / 4)).collect();
        let m = ObservationMask::from_indices(4, 4, idx).unwrap();
        assert_eq!(m.oversampling_ratio(1), 1.0);
    }
}
