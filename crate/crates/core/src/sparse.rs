//! Symmetric sparse matrices in compressed-row form.

use std::collections::BTreeMap;

/// Symmetric matrix stored with both triangles in CSR layout.
///
/// Construction goes through [`SymTriplets`], which only accepts symmetric
/// contributions, so the stored matrix is symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Accumulator for symmetric contributions.
#[derive(Debug, Clone, Default)]
pub struct SymTriplets {
    dim: usize,
    rows: Vec<BTreeMap<usize, f64>>,
}

impl SymTriplets {
    pub fn new(dim: usize) -> Self {
        Self { dim, rows: vec![BTreeMap::new(); dim] }
    }

    /// Adds `v` at `(i, j)` and `(j, i)` (once on the diagonal).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        *self.rows[i].entry(j).or_insert(0.0) += v;
        if i != j {
            *self.rows[j].entry(i).or_insert(0.0) += v;
        }
    }

    pub fn build(self) -> SparseSym {
        let mut row_ptr = Vec::with_capacity(self.dim + 1);
        let nnz = self.rows.iter().map(BTreeMap::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for row in self.rows {
            for (j, v) in row {
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        SparseSym { dim: self.dim, row_ptr, cols, vals }
    }
}

impl SparseSym {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => 0.0,
        }
    }

    /// Iterates over the stored entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `self + scale * other` for matrices of the same dimension.
    pub fn add_scaled(&self, other: &SparseSym, scale: f64) -> SparseSym {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut acc = SymTriplets::new(self.dim);
        for (m, s) in [(self, 1.0), (other, scale)] {
            for i in 0..m.dim {
                for (j, v) in m.row(i) {
                    if j >= i {
                        acc.add(i, j, s * v);
                    }
                }
            }
        }
        acc.build()
    }

    /// Principal submatrix on the given (sorted) index set.
    pub fn principal_submatrix(&self, keep: &[usize]) -> SparseSym {
        let mut new_index = vec![usize::MAX; self.dim];
        for (k, &i) in keep.iter().enumerate() {
            new_index[i] = k;
        }
        let mut acc = SymTriplets::new(keep.len());
        for (ki, &i) in keep.iter().enumerate() {
            for (j, v) in self.row(i) {
                let kj = new_index[j];
                if kj != usize::MAX && kj >= ki {
                    acc.add(ki, kj, v);
                }
            }
        }
        acc.build()
    }

    /// All stored entries, both triangles.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
