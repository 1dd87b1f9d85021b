use crate::space::{CMatrix, CVector, C64};

use super::Primitive;

/// Column-compressed sparse matrix over the occupation basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp {
    dim: usize,
    cols: Vec<Vec<(usize, C64)>>,
}

/// Sorts by row and merges duplicates, dropping exact zeros.
fn compact(mut entries: Vec<(usize, C64)>) -> Vec<(usize, C64)> {
    entries.sort_unstable_by_key(|e| e.0);
    let mut out: Vec<(usize, C64)> = Vec::with_capacity(entries.len());
    for (r, v) in entries {
        match out.last_mut() {
            Some(last) if last.0 == r => last.1 += v,
            _ => out.push((r, v)),
        }
    }
    out.retain(|e| e.1 != C64::new(0.0, 0.0));
    out
}

impl SparseOp {
    pub fn zero(dim: usize) -> Self {
        SparseOp { dim, cols: vec![Vec::new(); dim] }
    }

    /// Σ coeff · word, each word a product of primitives (leftmost first).
    pub fn from_terms(dim: usize, terms: &[(C64, Vec<Primitive>)]) -> Self {
        let cols = (0..dim)
            .map(|n| {
                let mut entries = Vec::new();
                for (c, word) in terms {
                    if *c == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut state = Some((n, 1.0));
                    for p in word.iter().rev() {
                        state = state.and_then(|(m, s)| p.apply(m).map(|(m2, s2)| (m2, s * s2)));
                    }
                    if let Some((m, s)) = state {
                        entries.push((m, c * s));
                    }
                }
                compact(entries)
            })
            .collect();
        SparseOp { dim, cols }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn column(&self, n: usize) -> &[(usize, C64)] {
        &self.cols[n]
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.cols[c].binary_search_by_key(&r, |e| e.0).map(|k| self.cols[c][k].1).unwrap_or_default()
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        let mut out = CVector::zeros(self.dim);
        for (n, col) in self.cols.iter().enumerate() {
            let x = v[n];
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            for &(r, a) in col {
                out[r] += a * x;
            }
        }
        out
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                m[(r, c)] += v;
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut cols = vec![Vec::new(); self.dim];
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                cols[r].push((c, v.conj()));
            }
        }
        SparseOp { dim: self.dim, cols }
    }

    pub fn scale(&self, s: C64) -> Self {
        SparseOp {
            dim: self.dim,
            cols: self.cols.iter().map(|col| compact(col.iter().map(|&(r, v)| (r, v * s)).collect())).collect(),
        }
    }

    /// a·self + b·other.
    pub fn combine(&self, a: C64, other: &SparseOp, b: C64) -> Self {
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(x, y)| {
                compact(x.iter().map(|&(r, v)| (r, a * v)).chain(y.iter().map(|&(r, v)| (r, b * v))).collect())
            })
            .collect();
        SparseOp { dim: self.dim, cols }
    }

    /// Adds `s` to the diagonal.
    pub fn add_identity(&self, s: C64) -> Self {
        let cols = self
            .cols
            .iter()
            .enumerate()
            .map(|(n, col)| {
                let mut e = col.clone();
                e.push((n, s));
                compact(e)
            })
            .collect();
        SparseOp { dim: self.dim, cols }
    }

    /// self · other.
    pub fn mul(&self, other: &SparseOp) -> Self {
        let mut acc = vec![C64::new(0.0, 0.0); self.dim];
        let mut touched = vec![false; self.dim];
        let mut rows = Vec::new();
        let cols = other
            .cols
            .iter()
            .map(|bcol| {
                for &(k, b) in bcol {
                    for &(r, a) in &self.cols[k] {
                        if !touched[r] {
                            touched[r] = true;
                            rows.push(r);
                        }
                        acc[r] += a * b;
                    }
                }
                rows.sort_unstable();
                let mut col = Vec::with_capacity(rows.len());
                for &r in &rows {
                    if acc[r] != C64::new(0.0, 0.0) {
                        col.push((r, acc[r]));
                    }
                    acc[r] = C64::new(0.0, 0.0);
                    touched[r] = false;
                }
                rows.clear();
                col
            })
            .collect();
        SparseOp { dim: self.dim, cols }
    }

    /// dense · self.
    pub fn left_dense(&self, dense: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (n, col) in self.cols.iter().enumerate() {
            let mut target = out.column_mut(n);
            for &(k, v) in col {
                target.axpy(v, &dense.column(k), C64::new(1.0, 0.0));
            }
        }
        out
    }

    /// self · dense.
    pub fn right_dense(&self, dense: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for c in 0..self.dim {
            let src = dense.column(c);
            let mut target = out.column_mut(c);
            for (k, col) in self.cols.iter().enumerate() {
                let x = src[k];
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                for &(r, a) in col {
                    target[r] += a * x;
                }
            }
        }
        out
    }
}
