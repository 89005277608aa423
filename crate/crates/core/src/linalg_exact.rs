//! Exact Gaussian-rational linear algebra: row reduction, kernels, ranks,
//! and exact restriction of operators to invariant subspaces.

use crate::error::{GaudinError, Result};
use crate::matrix::SparseMat;
use crate::scalar::Gaussian;
use num_traits::{One, Zero};

/// In-place reduced row echelon form; returns pivot column indices.
pub fn rref(rows: &mut Vec<Vec<Gaussian>>) -> Vec<usize> {
    let nrows = rows.len();
    if nrows == 0 {
        return Vec::new();
    }
    let ncols = rows[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        // pick any nonzero pivot in this column
        let mut piv = None;
        for i in r..nrows {
            if !rows[i][c].is_zero() {
                piv = Some(i);
                break;
            }
        }
        let Some(p) = piv else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].inv();
        for j in c..ncols {
            let v = rows[r][j].clone() * inv.clone();
            rows[r][j] = v;
        }
        for i in 0..nrows {
            if i != r && !rows[i][c].is_zero() {
                let factor = rows[i][c].clone();
                for j in c..ncols {
                    let sub = factor.clone() * rows[r][j].clone();
                    rows[i][j] = rows[i][j].clone() - sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: Vec<Vec<Gaussian>>) -> usize {
    let mut rows = rows;
    rref(&mut rows).len()
}

/// Exact null space basis of a sparse matrix (column vectors).
pub fn kernel_basis(m: &SparseMat<Gaussian>) -> Vec<Vec<Gaussian>> {
    let mut dense = m.to_dense();
    let pivots = rref(&mut dense);
    let ncols = m.ncols;
    let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
    let free: Vec<usize> = (0..ncols).filter(|c| !pivot_set.contains(c)).collect();
    let mut basis = Vec::with_capacity(free.len());
    for &fc in &free {
        let mut v = vec![Gaussian::zero(); ncols];
        v[fc] = Gaussian::one();
        for (row_idx, &pc) in pivots.iter().enumerate() {
            // x_pc = -sum over free columns of the reduced row entries
            v[pc] = -dense[row_idx][fc].clone();
        }
        basis.push(v);
    }
    basis
}

/// Solve B * X = Y exactly where B has full column rank (columns are a
/// basis of an invariant subspace). Errors if Y is not in the column span.
pub fn solve_in_span(
    basis: &[Vec<Gaussian>],
    targets: &[Vec<Gaussian>],
) -> Result<Vec<Vec<Gaussian>>> {
    let k = basis.len();
    if k == 0 {
        return Ok(vec![Vec::new(); targets.len()]);
    }
    let n = basis[0].len();
    let t = targets.len();
    // augmented system [B | Y], n rows, k + t columns
    let mut rows = vec![vec![Gaussian::zero(); k + t]; n];
    for (j, b) in basis.iter().enumerate() {
        for i in 0..n {
            rows[i][j] = b[i].clone();
        }
    }
    for (j, y) in targets.iter().enumerate() {
        for i in 0..n {
            rows[i][k + j] = y[i].clone();
        }
    }
    let pivots = rref(&mut rows);
    // full column rank in the B block is required, and no pivot may fall
    // in the Y block (that would mean Y leaves the span)
    let b_pivots: Vec<usize> = pivots.iter().copied().filter(|&c| c < k).collect();
    if b_pivots.len() != k {
        return Err(GaudinError::DimensionMismatch(
            "subspace basis is rank-deficient".into(),
        ));
    }
    if pivots.iter().any(|&c| c >= k) {
        return Err(GaudinError::Invalid(
            "vector leaves the subspace span".into(),
        ));
    }
    let mut solution = vec![vec![Gaussian::zero(); k]; t];
    for (row_idx, &pc) in pivots.iter().enumerate() {
        for j in 0..t {
            solution[j][pc] = rows[row_idx][k + j].clone();
        }
    }
    Ok(solution)
}

/// Restrict an operator exactly to the invariant subspace spanned by
/// `basis` (column vectors). Errors if the subspace is not invariant.
pub fn restrict_exact(
    op: &SparseMat<Gaussian>,
    basis: &[Vec<Gaussian>],
    label: &str,
) -> Result<SparseMat<Gaussian>> {
    let k = basis.len();
    let images: Vec<Vec<Gaussian>> = basis.iter().map(|b| op.mul_vec(b)).collect();
    let coeffs = solve_in_span(basis, &images).map_err(|_| GaudinError::NotInvariant {
        label: label.to_string(),
        residual: f64::NAN,
    })?;
    let mut out = SparseMat::zeros(k, k);
    for (col, cf) in coeffs.iter().enumerate() {
        for (row, v) in cf.iter().enumerate() {
            out.add_entry(row, col, v.clone());
        }
    }
    Ok(out)
}
