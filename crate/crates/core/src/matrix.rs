//! Sparse operator matrices over either scalar field.
//!
//! Rows are kept sorted by column with no explicit zeros, so exact-field
//! equality is structural equality.

use crate::error::{GaudinError, Result};
use crate::scalar::{Gaussian, Scalar, C64};

#[derive(Clone, PartialEq)]
pub struct SparseMat<S: Scalar> {
    pub nrows: usize,
    pub ncols: usize,
    rows: Vec<Vec<(usize, S)>>,
}

impl<S: Scalar> std::fmt::Debug for SparseMat<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SparseMat({}x{}, nnz={})", self.nrows, self.ncols, self.nnz())
    }
}

impl<S: Scalar> SparseMat<S> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMat {
            nrows,
            ncols,
            rows: vec![Vec::new(); nrows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.rows[i].push((i, S::one()));
        }
        m
    }

    pub fn scalar(n: usize, s: S) -> Self {
        let mut m = Self::zeros(n, n);
        if !s.is_zero() {
            for i in 0..n {
                m.rows[i].push((i, s.clone()));
            }
        }
        m
    }

    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, S)]) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for (r, c, v) in triplets {
            m.add_entry(*r, *c, v.clone());
        }
        m
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.is_empty())
    }

    pub fn row(&self, r: usize) -> &[(usize, S)] {
        &self.rows[r]
    }

    pub fn get(&self, r: usize, c: usize) -> S {
        match self.rows[r].binary_search_by_key(&c, |e| e.0) {
            Ok(k) => self.rows[r][k].1.clone(),
            Err(_) => S::zero(),
        }
    }

    /// Accumulate `v` into entry (r, c), dropping it if the sum cancels.
    pub fn add_entry(&mut self, r: usize, c: usize, v: S) {
        if v.is_zero() {
            return;
        }
        let row = &mut self.rows[r];
        match row.binary_search_by_key(&c, |e| e.0) {
            Ok(k) => {
                let s = row[k].1.clone() + v;
                if s.is_zero() {
                    row.remove(k);
                } else {
                    row[k].1 = s;
                }
            }
            Err(k) => row.insert(k, (c, v)),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &S)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |(c, v)| (r, *c, v)))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut out = self.clone();
        for (r, c, v) in other.entries() {
            out.add_entry(r, c, v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut out = self.clone();
        for (r, c, v) in other.entries() {
            out.add_entry(r, c, -v.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for row in &mut out.rows {
            for e in row.iter_mut() {
                e.1 = -e.1.clone();
            }
        }
        out
    }

    pub fn scale(&self, s: &S) -> Self {
        if s.is_zero() {
            return Self::zeros(self.nrows, self.ncols);
        }
        let mut out = self.clone();
        for row in &mut out.rows {
            for e in row.iter_mut() {
                e.1 = e.1.clone() * s.clone();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.nrows, other.ncols);
        for (r, row) in self.rows.iter().enumerate() {
            let mut acc: Vec<(usize, S)> = Vec::new();
            for (k, v) in row {
                for (c, w) in &other.rows[*k] {
                    let p = v.clone() * w.clone();
                    if p.is_zero() {
                        continue;
                    }
                    match acc.binary_search_by_key(c, |e| e.0) {
                        Ok(idx) => {
                            let s = acc[idx].1.clone() + p;
                            if s.is_zero() {
                                acc.remove(idx);
                            } else {
                                acc[idx].1 = s;
                            }
                        }
                        Err(idx) => acc.insert(idx, (*c, p)),
                    }
                }
            }
            out.rows[r] = acc;
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.ncols, self.nrows);
        for (r, c, v) in self.entries() {
            out.add_entry(c, r, v.conjugate());
        }
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.ncols);
        let mut out = vec![S::zero(); self.nrows];
        for (r, row) in self.rows.iter().enumerate() {
            let mut acc = S::zero();
            for (c, w) in row {
                acc = acc + w.clone() * v[*c].clone();
            }
            out[r] = acc;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.entries()
            .map(|(_, _, v)| v.as_c64().norm())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<S>> {
        let mut out = vec![vec![S::zero(); self.ncols]; self.nrows];
        for (r, c, v) in self.entries() {
            out[r][c] = v.clone();
        }
        out
    }
}

impl SparseMat<Gaussian> {
    pub fn to_c64(&self) -> SparseMat<C64> {
        self.convert()
    }

    pub fn convert<S: Scalar>(&self) -> SparseMat<S> {
        let mut out = SparseMat::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.entries() {
            out.add_entry(r, c, S::from_exact(v));
        }
        out
    }
}

/// Exact commutativity check over the exact field; returns the offending
/// pair when a commutator does not vanish.
pub fn check_pairwise_commute(
    ops: &[(String, SparseMat<Gaussian>)],
) -> Result<()> {
    let pairs: Vec<(usize, usize)> = (0..ops.len())
        .flat_map(|i| ((i + 1)..ops.len()).map(move |j| (i, j)))
        .collect();
    let bad = crate::parallel::par_find_map(&pairs, |&(i, j)| {
        let c = ops[i].1.commutator(&ops[j].1);
        if c.is_zero() {
            None
        } else {
            Some((i, j, c.max_abs()))
        }
    });
    match bad {
        None => Ok(()),
        Some((i, j, res)) => Err(GaudinError::NonCommuting {
            context: format!("[{}, {}]", ops[i].0, ops[j].0),
            residual: res,
        }),
    }
}
