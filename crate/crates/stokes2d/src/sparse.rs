//! Minimal sparse matrix support: COO assembly, CSR storage, and the
//! products needed for static condensation.

/// Triplet builder; duplicate entries are summed on conversion.
#[derive(Clone, Debug)]
pub struct Coo {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Coo {
    pub fn new(nrows: usize, ncols: usize) -> Coo {
        Coo {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    pub fn to_csr(mut self) -> Csr {
        self.entries
            .sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.entries.len());
        let mut values = Vec::with_capacity(self.entries.len());
        let mut last = None;
        for (row, col, value) in self.entries {
            if last == Some((row, col)) {
                *values.last_mut().unwrap() += value;
            } else {
                indices.push(col);
                values.push(value);
                indptr[row + 1] = indices.len();
                last = Some((row, col));
            }
        }
        // Forward-fill offsets for rows without entries.
        for row in 0..self.nrows {
            indptr[row + 1] = indptr[row + 1].max(indptr[row]);
        }
        Csr {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr,
            indices,
            values,
        }
    }
}

/// Compressed sparse rows with sorted, duplicate-free column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    pub fn zero(nrows: usize, ncols: usize) -> Csr {
        Csr {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            let mut sum = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                sum += v * x[j];
            }
            y[i] = sum;
        }
    }

    /// y += scale * A^T x.
    pub fn matvec_transpose_add(&self, x: &[f64], scale: f64, y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                y[j] += scale * v * x[i];
            }
        }
    }

    /// y += scale * A x.
    pub fn matvec_add(&self, x: &[f64], scale: f64, y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                y[i] += scale * v * x[j];
            }
        }
    }

    pub fn transpose(&self) -> Csr {
        let mut indptr = vec![0usize; self.ncols + 1];
        for &j in &self.indices {
            indptr[j + 1] += 1;
        }
        for j in 0..self.ncols {
            indptr[j + 1] += indptr[j];
        }
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        let mut next = indptr.clone();
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let slot = next[j];
                indices[slot] = i;
                values[slot] = v;
                next[j] += 1;
            }
        }
        // Row-major traversal writes each transposed row in ascending order.
        Csr {
            nrows: self.ncols,
            ncols: self.nrows,
            indptr,
            indices,
            values,
        }
    }

    /// Left-scale rows: returns diag(d) * A.
    pub fn scale_rows(&self, d: &[f64]) -> Csr {
        debug_assert_eq!(d.len(), self.nrows);
        let mut out = self.clone();
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                out.values[k] *= d[i];
            }
        }
        out
    }

    /// Sparse product self * other with sorted output columns.
    pub fn matmul(&self, other: &Csr) -> Csr {
        assert_eq!(self.ncols, other.nrows);
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut accum = vec![0.0; other.ncols];
        let mut marker = vec![usize::MAX; other.ncols];
        let mut pattern: Vec<usize> = Vec::new();
        for i in 0..self.nrows {
            pattern.clear();
            let (cols, vals) = self.row(i);
            for (&k, &v) in cols.iter().zip(vals) {
                let (kcols, kvals) = other.row(k);
                for (&j, &w) in kcols.iter().zip(kvals) {
                    if marker[j] != i {
                        marker[j] = i;
                        accum[j] = 0.0;
                        pattern.push(j);
                    }
                    accum[j] += v * w;
                }
            }
            pattern.sort_unstable();
            for &j in &pattern {
                indices.push(j);
                values.push(accum[j]);
            }
            indptr[i + 1] = indices.len();
        }
        Csr {
            nrows: self.nrows,
            ncols: other.ncols,
            indptr,
            indices,
            values,
        }
    }

    /// self + scale * other over the union pattern.
    pub fn add_scaled(&self, other: &Csr, scale: f64) -> Csr {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.nrows {
            let (ac, av) = self.row(i);
            let (bc, bv) = other.row(i);
            let (mut ka, mut kb) = (0, 0);
            while ka < ac.len() || kb < bc.len() {
                let ja = ac.get(ka).copied().unwrap_or(usize::MAX);
                let jb = bc.get(kb).copied().unwrap_or(usize::MAX);
                if ja < jb {
                    indices.push(ja);
                    values.push(av[ka]);
                    ka += 1;
                } else if jb < ja {
                    indices.push(jb);
                    values.push(scale * bv[kb]);
                    kb += 1;
                } else {
                    indices.push(ja);
                    values.push(av[ka] + scale * bv[kb]);
                    ka += 1;
                    kb += 1;
                }
            }
            indptr[i + 1] = indices.len();
        }
        Csr {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr,
            indices,
            values,
        }
    }

    /// All values multiplied by a scalar.
    pub fn scaled(&self, scale: f64) -> Csr {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= scale;
        }
        out
    }

    /// self - other over the union pattern.
    pub fn sub(&self, other: &Csr) -> Csr {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.nrows {
            let (ac, av) = self.row(i);
            let (bc, bv) = other.row(i);
            let (mut ka, mut kb) = (0, 0);
            while ka < ac.len() || kb < bc.len() {
                let ja = ac.get(ka).copied().unwrap_or(usize::MAX);
                let jb = bc.get(kb).copied().unwrap_or(usize::MAX);
                if ja < jb {
                    indices.push(ja);
                    values.push(av[ka]);
                    ka += 1;
                } else if jb < ja {
                    indices.push(jb);
                    values.push(-bv[kb]);
                    kb += 1;
                } else {
                    indices.push(ja);
                    values.push(av[ka] - bv[kb]);
                    ka += 1;
                    kb += 1;
                }
            }
            indptr[i + 1] = indices.len();
        }
        Csr {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        let t = self.transpose();
        self.sub(&t)
            .values
            .iter()
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Dense copy in row-major order; intended for small test matrices.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                out[i][j] = v;
            }
        }
        out
    }

    /// Coordinate text dump, one `row col value` line per entry, 0-based.
    pub fn write_coordinate_text(&self, path: &std::path::Path) -> std::io::Result<()> {
        use std::fmt::Write as _;
        let mut out = String::new();
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let _ = writeln!(out, "{i} {j} {v:.17e}");
            }
        }
        std::fs::write(path, out)
    }
}
