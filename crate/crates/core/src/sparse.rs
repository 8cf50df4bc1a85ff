//! Compressed sparse row storage with a symbolic pattern built once from
//! element connectivity.

use crate::par::Execution;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero-valued square matrix whose pattern couples every pair of nodes
    /// that share an element.
    pub fn from_connectivity<const K: usize>(n: usize, elements: &[[usize; K]]) -> Self {
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (e, conn) in elements.iter().enumerate() {
            for &node in conn {
                incident[node].push(e);
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        let mut scratch = Vec::new();
        for elems in &incident {
            scratch.clear();
            for &e in elems {
                scratch.extend_from_slice(&elements[e]);
            }
            scratch.sort_unstable();
            scratch.dedup();
            col_idx.extend_from_slice(&scratch);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
        }
    }

    /// Builds from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(r, c, v) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) outside {n}x{n}");
            rows[r].push((c, v));
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                if col_idx.len() > *row_ptr.last().unwrap() && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        let t: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, &t)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_ptr[i];
        self.col_idx[start..self.row_ptr[i + 1]]
            .binary_search(&j)
            .ok()
            .map(|k| start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn fill_zero(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Scatter-adds a local element matrix. Panics if the pattern lacks an entry.
    pub fn add_element<const K: usize>(&mut self, conn: &[usize; K], local: &[[f64; K]; K]) {
        for a in 0..K {
            for b in 0..K {
                let k = self
                    .position(conn[a], conn[b])
                    .expect("element entry missing from sparsity pattern");
                self.values[k] += local[a][b];
            }
        }
    }

    /// Row-parallel accumulation of element matrices. Each row sums its
    /// incident element contributions in ascending element order, so the
    /// result does not depend on the execution policy.
    pub(crate) fn assemble_rows<const K: usize>(
        &mut self,
        elements: &[[usize; K]],
        local: &[[[f64; K]; K]],
        exec: Execution,
    ) {
        let mut incident: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.n];
        for (e, conn) in elements.iter().enumerate() {
            for (a, &node) in conn.iter().enumerate() {
                incident[node].push((e, a));
            }
        }
        let rows: Vec<Vec<f64>> = exec.map(self.n, |i| {
            let (cols, _) = self.row(i);
            let mut vals = vec![0.0; cols.len()];
            for &(e, a) in &incident[i] {
                for (b, &node) in elements[e].iter().enumerate() {
                    let k = cols.binary_search(&node).expect("pattern mismatch");
                    vals[k] += local[e][a][b];
                }
            }
            vals
        });
        for (i, vals) in rows.into_iter().enumerate() {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            self.values[r].copy_from_slice(&vals);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.mul_vec_with(x, Execution::default())
    }

    pub fn mul_vec_with(&self, x: &[f64], exec: Execution) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y, exec);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64], exec: Execution) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        exec.for_each_mut(y, |i, yi| {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        });
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Largest `|A_ij - A_ji|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// `alpha * self + beta * other`.
    pub fn linear_combination(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> CsrMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        if self.row_ptr == other.row_ptr && self.col_idx == other.col_idx {
            return CsrMatrix {
                n: self.n,
                row_ptr: self.row_ptr.clone(),
                col_idx: self.col_idx.clone(),
                values: self
                    .values
                    .iter()
                    .zip(&other.values)
                    .map(|(a, b)| alpha * a + beta * b)
                    .collect(),
            };
        }
        let t: Vec<_> = self
            .triplets()
            .map(|(i, j, v)| (i, j, alpha * v))
            .chain(other.triplets().map(|(i, j, v)| (i, j, beta * v)))
            .collect();
        CsrMatrix::from_triplets(self.n, &t)
    }

    /// Principal submatrix on `keep` (global indices in ascending order).
    pub fn principal_submatrix(&self, keep: &[usize]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut row_ptr = Vec::with_capacity(keep.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &old in keep {
            let (cols, vals) = self.row(old);
            for (&c, &v) in cols.iter().zip(vals) {
                if map[c] != usize::MAX {
                    col_idx.push(map[c]);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n: keep.len(),
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                d[i][c] += v;
            }
        }
        d
    }

    pub(crate) fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&c, &v)| (i, c, v))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, -1.0), (0, 1, 4.0)]);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(0, 1), 4.0);
        assert_eq!(a.get(1, 0), -1.0);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.mul_vec(&[1.0, 2.0]), vec![11.0, -1.0]);
    }

    #[test]
    fn connectivity_pattern() {
        // two line elements sharing node 1
        let a = CsrMatrix::from_connectivity(3, &[[0, 1], [1, 2]]);
        assert_eq!(a.nnz(), 7);
        assert_eq!(a.row(1).0, &[0, 1, 2]);
        assert_eq!(a.row(0).0, &[0, 1]);
    }

    #[test]
    fn submatrix_and_combination() {
        let a = CsrMatrix::from_triplets(
            3,
            &[(0, 0, 2.0), (0, 2, 1.0), (1, 1, 3.0), (2, 0, 1.0), (2, 2, 5.0)],
        );
        let s = a.principal_submatrix(&[0, 2]);
        assert_eq!(s.to_dense(), vec![vec![2.0, 1.0], vec![1.0, 5.0]]);
        let c = a.linear_combination(2.0, &a, -1.0);
        assert_eq!(c, a);
        assert_eq!(a.asymmetry(), 0.0);
        assert_eq!(a.diagonal(), vec![2.0, 3.0, 5.0]);
    }

    #[test]
    fn row_assembly_matches_scatter() {
        let elements = [[0usize, 1, 2], [1, 2, 3], [2, 3, 4]];
        let local: Vec<[[f64; 3]; 3]> = (0..3)
            .map(|e| std::array::from_fn(|a| std::array::from_fn(|b| (e * 9 + a * 3 + b) as f64 * 0.1)))
            .collect();
        let mut s = CsrMatrix::from_connectivity(5, &elements);
        for (e, conn) in elements.iter().enumerate() {
            s.add_element(conn, &local[e]);
        }
        for exec in [Execution::Sequential, Execution::Parallel] {
            let mut r = CsrMatrix::from_connectivity(5, &elements);
            r.assemble_rows(&elements, &local, exec);
            assert_eq!(r, s);
        }
    }
}
