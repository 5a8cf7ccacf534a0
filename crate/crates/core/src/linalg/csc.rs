use super::DenseMatrix;

/// Compressed sparse column matrix. Row indices are sorted within each
/// column and never repeated.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CscMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            col_ptr: vec![0; ncols + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Assembles from `(row, col, value)` triplets. Duplicates are summed and
    /// explicit zeros are kept out of the structure.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; ncols + 1];
        for &(i, j, _) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
            counts[j + 1] += 1;
        }
        for j in 0..ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut rows = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            rows[next[j]] = i;
            vals[next[j]] = v;
            next[j] += 1;
        }

        let mut col_ptr = Vec::with_capacity(ncols + 1);
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        col_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for j in 0..ncols {
            scratch.clear();
            scratch.extend((counts[j]..counts[j + 1]).map(|k| (rows[k], vals[k])));
            scratch.sort_by_key(|&(i, _)| i);
            let mut k = 0;
            while k < scratch.len() {
                let i = scratch[k].0;
                let mut v = 0.0;
                while k < scratch.len() && scratch[k].0 == i {
                    v += scratch[k].1;
                    k += 1;
                }
                if v != 0.0 {
                    row_idx.push(i);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    /// Builds directly from sorted per-column entries.
    pub(crate) fn from_columns(nrows: usize, columns: Vec<Vec<(usize, f64)>>) -> Self {
        let ncols = columns.len();
        let nnz = columns.iter().map(Vec::len).sum();
        let mut col_ptr = Vec::with_capacity(ncols + 1);
        let mut row_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        col_ptr.push(0);
        for col in columns {
            debug_assert!(col.windows(2).all(|w| w[0].0 < w[1].0));
            for (i, v) in col {
                debug_assert!(i < nrows);
                row_idx.push(i);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let columns = (0..m.ncols())
            .map(|j| {
                m.column(j)
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(i, &v)| (i, v))
                    .collect()
            })
            .collect();
        Self::from_columns(m.nrows(), columns)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn column_rows(&self, j: usize) -> &[usize] {
        &self.row_idx[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    pub fn column_values(&self, j: usize) -> &[f64] {
        &self.values[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    pub(crate) fn column_values_mut(&mut self, j: usize) -> &mut [f64] {
        let (a, b) = (self.col_ptr[j], self.col_ptr[j + 1]);
        &mut self.values[a..b]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.column_rows(j)
            .iter()
            .copied()
            .zip(self.column_values(j).iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let rows = self.column_rows(j);
        match rows.binary_search(&i) {
            Ok(k) => self.column_values(j)[k],
            Err(_) => 0.0,
        }
    }

    /// Drops stored entries that are exactly zero.
    pub(crate) fn prune_zeros(self) -> Self {
        if self.values.iter().all(|&v| v != 0.0) {
            return self;
        }
        let columns = (0..self.ncols)
            .map(|j| self.column(j).filter(|&(_, v)| v != 0.0).collect())
            .collect();
        Self::from_columns(self.nrows, columns)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.nrows, self.ncols);
        for j in 0..self.ncols {
            for (i, v) in self.column(j) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz());
        for j in 0..self.ncols {
            for (i, v) in self.column(j) {
                triplets.push((j, i, v));
            }
        }
        Self::from_triplets(self.ncols, self.nrows, &triplets)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (i, v) in self.column(j) {
                y[i] += v * xj;
            }
        }
        y
    }

    /// Kronecker product with entry `((i1, i2), (j1, j2)) = self[i1][j1] * rhs[i2][j2]`
    /// and composite index `i1 * rhs.nrows() + i2`.
    pub fn kron(&self, rhs: &CscMatrix) -> CscMatrix {
        let nrows = self.nrows * rhs.nrows;
        let mut columns = Vec::with_capacity(self.ncols * rhs.ncols);
        for j1 in 0..self.ncols {
            for j2 in 0..rhs.ncols {
                let mut col = Vec::with_capacity(
                    self.column_rows(j1).len() * rhs.column_rows(j2).len(),
                );
                for (i1, a) in self.column(j1) {
                    for (i2, b) in rhs.column(j2) {
                        let v = a * b;
                        if v != 0.0 {
                            col.push((i1 * rhs.nrows + i2, v));
                        }
                    }
                }
                columns.push(col);
            }
        }
        CscMatrix::from_columns(nrows, columns)
    }
}
