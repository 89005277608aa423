//! Numerical spectral analysis of commuting Hermitian families: joint
//! diagonalization by recursive block splitting, simplicity detection
//! with an indeterminate band, and cyclicity via algebra-closure
//! dimension.
//!
//! Operators are Hermitian with respect to a diagonal positive Gram
//! form G. All spectral work happens in symmetrized coordinates
//! (conjugation by G^{1/2}), where the family is Hermitian in the
//! standard sense.

use crate::error::{GaudinError, Result};
use crate::matrix::SparseMat;
use crate::parallel::par_map;
use crate::scalar::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Relative residual bound for eigenpairs and commutators.
    pub residual: f64,
    /// Eigenvalue distances above this count as distinct.
    pub gap: f64,
    /// Distances inside (indeterminate_low, gap) are flagged rather than
    /// trusted either way.
    pub indeterminate_low: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-10,
            gap: 1e-8,
            indeterminate_low: 1e-12,
        }
    }
}

/// Dense column-major-free little matrix type for the eigensolver.
#[derive(Debug, Clone)]
pub struct Dense {
    pub n: usize,
    pub a: Vec<C64>, // row-major
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Dense {
            n,
            a: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.a[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.a[r * self.n + c] = v;
    }

    pub fn from_sparse(m: &SparseMat<C64>) -> Self {
        assert_eq!(m.nrows, m.ncols);
        let mut d = Self::zeros(m.nrows);
        for (r, c, v) in m.entries() {
            d.a[r * d.n + c] = *v;
        }
        d
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.n).map(|r| self.get(r, c)).collect()
    }

    fn off_diag_norm(&self) -> f64 {
        let mut s = 0.0;
        for r in 0..self.n {
            for c in 0..self.n {
                if r != c {
                    s += self.get(r, c).norm_sqr();
                }
            }
        }
        s.sqrt()
    }

    fn fro_norm(&self) -> f64 {
        self.a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi
/// rotations. Returns eigenvalues in ascending order with matching
/// orthonormal eigenvector columns.
pub fn eigh(m: &Dense) -> (Vec<f64>, Dense) {
    let n = m.n;
    let mut a = m.clone();
    let mut v = Dense::identity(n);
    if n <= 1 {
        let vals = if n == 1 { vec![a.get(0, 0).re] } else { vec![] };
        return (vals, v);
    }
    let scale = a.fro_norm().max(1.0);
    for _sweep in 0..100 {
        if a.off_diag_norm() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                let beta = apq.norm();
                if beta <= 1e-300 {
                    continue;
                }
                let u = apq / beta;
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let tau = (aqq - app) / (2.0 * beta);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let su = u * s;
                let su_conj = u.conj() * s;
                // columns: A <- A J with J e_p = c e_p - s conj(u) e_q,
                // J e_q = s u e_p + c e_q
                for i in 0..n {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, aip * c - aiq * su_conj);
                    a.set(i, q, aip * su + aiq * c);
                }
                // rows: A <- J^dagger A
                for j in 0..n {
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    a.set(p, j, apj * c - aqj * su);
                    a.set(q, j, apj * su_conj + aqj * c);
                }
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, vip * c - viq * su_conj);
                    v.set(i, q, vip * su + viq * c);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let vals: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());
    let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let mut sorted_v = Dense::zeros(n);
    for (new_c, &old_c) in order.iter().enumerate() {
        for r in 0..n {
            sorted_v.set(r, new_c, v.get(r, old_c));
        }
    }
    (sorted_vals, sorted_v)
}

/// ||G A - A^dagger G|| / ||G A|| in max-entry norm, for diagonal
/// positive G. Zero certifies self-adjointness w.r.t. the form.
pub fn hermitian_check(op: &SparseMat<C64>, gram: &[f64]) -> Result<f64> {
    if gram.len() != op.nrows || op.nrows != op.ncols {
        return Err(GaudinError::DimensionMismatch(
            "gram and operator dimensions differ".into(),
        ));
    }
    if gram.iter().any(|&g| !(g > 0.0)) {
        return Err(GaudinError::GramNotPositive);
    }
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    // (GA)_{rc} = g_r A_{rc}; (A^dagger G)_{rc} = conj(A_{cr}) g_c
    for r in 0..op.nrows {
        for (_c, v) in op.row(r) {
            let ga = gram[r] * v;
            den = den.max(ga.norm());
        }
    }
    for r in 0..op.nrows {
        for c in 0..op.ncols {
            let ga = gram[r] * op.get(r, c);
            let adg = op.get(c, r).conj() * gram[c];
            num = num.max((ga - adg).norm());
        }
    }
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(num / den)
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Modified Gram-Schmidt; returns an orthonormal basis of the span,
/// dropping vectors whose residual falls below `drop_tol` relative to
/// their original norm.
pub fn orthonormalize(vectors: &[Vec<C64>], drop_tol: f64) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let orig = norm(v).max(1e-300);
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let d = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= d * bi;
                }
            }
        }
        let r = norm(&w);
        if r > drop_tol * orig {
            for wi in w.iter_mut() {
                *wi /= r;
            }
            basis.push(w);
        }
    }
    basis
}

/// One joint eigenspace: eigenvalue tuple (one entry per generator),
/// basis in original (unsymmetrized) coordinates, multiplicity.
#[derive(Debug, Clone)]
pub struct SpectrumItem {
    pub tuple: Vec<f64>,
    pub basis: Vec<Vec<C64>>,
}

impl SpectrumItem {
    pub fn multiplicity(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Debug, Clone)]
pub struct JointSpectrum {
    pub labels: Vec<String>,
    pub items: Vec<SpectrumItem>,
    pub max_residual: f64,
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimpleVerdict {
    Simple,
    NotSimple,
    Indeterminate,
}

impl JointSpectrum {
    /// Simplicity of the joint spectrum with the indeterminate-band
    /// policy: multiplicities above 1 fail outright; tuple gaps inside
    /// (indeterminate_low, gap) are flagged instead of trusted.
    pub fn simple_spectrum(&self, tol: &Tolerances) -> (SimpleVerdict, f64) {
        let mut min_gap = f64::INFINITY;
        for i in 0..self.items.len() {
            for j in i + 1..self.items.len() {
                let g = self.items[i]
                    .tuple
                    .iter()
                    .zip(&self.items[j].tuple)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                min_gap = min_gap.min(g);
            }
        }
        if self.items.iter().any(|it| it.multiplicity() > 1) {
            return (SimpleVerdict::NotSimple, min_gap);
        }
        if self.items.len() >= 2 && min_gap < tol.gap {
            if min_gap > tol.indeterminate_low {
                return (SimpleVerdict::Indeterminate, min_gap);
            }
            return (SimpleVerdict::NotSimple, min_gap);
        }
        (SimpleVerdict::Simple, min_gap)
    }
}

/// Joint diagonalization of a commuting family, Hermitian w.r.t. the
/// diagonal Gram form. Splits recursively: each generator refines the
/// block decomposition produced by its predecessors.
pub fn joint_diagonalize(
    gens: &[(String, SparseMat<C64>)],
    gram: &[f64],
    tol: &Tolerances,
) -> Result<JointSpectrum> {
    if gens.is_empty() {
        return Err(GaudinError::Invalid("empty generator family".into()));
    }
    let n = gens[0].1.nrows;
    for (label, g) in gens {
        let res = hermitian_check(g, gram)?;
        if res > tol.residual.max(1e-9) {
            return Err(GaudinError::NotHermitian(res)).map_err(|e| {
                let _ = label;
                e
            });
        }
    }
    // commutators within tolerance
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            let c = gens[i].1.commutator(&gens[j].1);
            let scale = (gens[i].1.max_abs() * gens[j].1.max_abs()).max(1.0);
            let res = c.max_abs() / scale;
            if res > tol.residual.max(1e-9) {
                return Err(GaudinError::NonCommuting {
                    context: format!("[{}, {}]", gens[i].0, gens[j].0),
                    residual: res,
                });
            }
        }
    }
    let sqrt_g: Vec<f64> = gram.iter().map(|g| g.sqrt()).collect();
    // symmetrized generators as dense matrices
    let sym: Vec<Dense> = par_map(gens, |(_, g)| {
        let mut d = Dense::zeros(n);
        for (r, c, v) in g.entries() {
            d.set(r, c, v * (sqrt_g[r] / sqrt_g[c]));
        }
        d
    });

    // blocks: (orthonormal basis columns in symmetrized coords, tuple so far)
    let mut blocks: Vec<(Vec<Vec<C64>>, Vec<f64>)> = vec![(
        (0..n)
            .map(|i| {
                let mut e = vec![C64::new(0.0, 0.0); n];
                e[i] = C64::new(1.0, 0.0);
                e
            })
            .collect(),
        Vec::new(),
    )];

    for a in &sym {
        let scale = a.fro_norm().max(1.0);
        let split_gap = tol.gap * scale;
        let mut next: Vec<(Vec<Vec<C64>>, Vec<f64>)> = Vec::new();
        let refined: Vec<Vec<(Vec<Vec<C64>>, Vec<f64>)>> = par_map(&blocks, |(q, tuple)| {
            let k = q.len();
            // M = Q^dagger A Q
            let aq: Vec<Vec<C64>> = q
                .iter()
                .map(|col| {
                    let mut out = vec![C64::new(0.0, 0.0); n];
                    for r in 0..n {
                        let mut acc = C64::new(0.0, 0.0);
                        for c in 0..n {
                            let v = a.get(r, c);
                            if v.norm_sqr() > 0.0 {
                                acc += v * col[c];
                            }
                        }
                        out[r] = acc;
                    }
                    out
                })
                .collect();
            let mut m = Dense::zeros(k);
            for i in 0..k {
                for j in 0..k {
                    m.set(i, j, dot(&q[i], &aq[j]));
                }
            }
            let (vals, vecs) = eigh(&m);
            // cluster ascending eigenvalues by the split gap
            let mut out = Vec::new();
            let mut start = 0;
            for idx in 1..=k {
                if idx == k || vals[idx] - vals[idx - 1] > split_gap {
                    let mean: f64 = vals[start..idx].iter().sum::<f64>() / (idx - start) as f64;
                    let cols: Vec<Vec<C64>> = (start..idx)
                        .map(|c| {
                            // lift back: new basis vector = Q * vecs[:, c]
                            let mut v = vec![C64::new(0.0, 0.0); n];
                            for (bi, b) in q.iter().enumerate() {
                                let w = vecs.get(bi, c);
                                for (vi, bv) in v.iter_mut().zip(b) {
                                    *vi += w * bv;
                                }
                            }
                            v
                        })
                        .collect();
                    let mut t = tuple.clone();
                    t.push(mean);
                    out.push((cols, t));
                    start = idx;
                }
            }
            out
        });
        for r in refined {
            next.extend(r);
        }
        blocks = next;
    }

    // assemble: map back to original coordinates, compute residuals
    let mut items = Vec::new();
    let mut max_residual: f64 = 0.0;
    for (q, tuple) in &blocks {
        let basis: Vec<Vec<C64>> = q
            .iter()
            .map(|col| {
                col.iter()
                    .enumerate()
                    .map(|(i, v)| v / sqrt_g[i])
                    .collect()
            })
            .collect();
        for v in &basis {
            let vn = norm(v);
            for ((_, g), chi) in gens.iter().zip(tuple) {
                let gv = g.mul_vec(v);
                let mut rnorm = 0.0f64;
                for (gvi, vi) in gv.iter().zip(v) {
                    rnorm += (gvi - chi * vi).norm_sqr();
                }
                let scale = g.max_abs().max(1.0) * vn;
                max_residual = max_residual.max(rnorm.sqrt() / scale);
            }
        }
        items.push(SpectrumItem {
            tuple: tuple.clone(),
            basis,
        });
    }
    // deterministic order: lexicographic by tuple
    items.sort_by(|a, b| {
        a.tuple
            .iter()
            .zip(&b.tuple)
            .find_map(|(x, y)| x.partial_cmp(y).filter(|o| o.is_ne()))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let total: usize = items.iter().map(|it| it.multiplicity()).sum();
    debug_assert_eq!(total, n);
    Ok(JointSpectrum {
        labels: gens.iter().map(|(l, _)| l.clone()).collect(),
        items,
        max_residual,
        dim: n,
    })
}

/// Smallest subspace containing `seed`, closed under all operators.
/// Returns an orthonormal basis.
pub fn algebra_closure(ops: &[SparseMat<C64>], seed: &[C64], drop_tol: f64) -> Vec<Vec<C64>> {
    let mut basis = orthonormalize(&[seed.to_vec()], drop_tol);
    let mut frontier = basis.clone();
    while !frontier.is_empty() {
        let images: Vec<Vec<C64>> = frontier
            .iter()
            .flat_map(|v| ops.iter().map(move |op| op.mul_vec(v)))
            .collect();
        let mut added = Vec::new();
        for img in images {
            let before = basis.len();
            let mut all = basis.clone();
            all.push(img);
            let ortho = orthonormalize(&all, drop_tol);
            if ortho.len() > before {
                let newv = ortho.last().unwrap().clone();
                basis.push(newv.clone());
                added.push(newv);
            }
        }
        frontier = added;
    }
    basis
}

#[derive(Debug, Clone)]
pub struct CyclicityReport {
    pub target: usize,
    pub achieved: Vec<usize>,
    pub cyclic: bool,
    pub trials: usize,
    pub rng_seed: u64,
}

/// Random-seed cyclicity test on a family already restricted to the
/// module of interest: cyclic iff some trial vector generates the whole
/// space under the operator family (plus the identity).
pub fn is_cyclic(
    ops: &[SparseMat<C64>],
    trials: usize,
    rng_seed: u64,
    drop_tol: f64,
) -> CyclicityReport {
    let n = if ops.is_empty() { 0 } else { ops[0].nrows };
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut achieved = Vec::with_capacity(trials);
    for _ in 0..trials {
        let seed: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let closure = algebra_closure(ops, &seed, drop_tol);
        achieved.push(closure.len());
    }
    let cyclic = achieved.iter().any(|&d| d == n) && n > 0;
    CyclicityReport {
        target: n,
        achieved,
        cyclic,
        trials,
        rng_seed,
    }
}

/// Restriction context: a commuting family on the big space, Hermitian
/// w.r.t. a diagonal Gram form, restricted to an invariant subspace in
/// symmetrized coordinates where the restriction is again Hermitian
/// (standard inner product).
pub struct SpectralContext {
    pub labels: Vec<String>,
    /// Restricted operators on the subspace (k x k), Hermitian.
    pub restricted: Vec<SparseMat<C64>>,
    /// Orthonormal subspace basis columns in symmetrized coordinates.
    pub q: Vec<Vec<C64>>,
    sqrt_g: Vec<f64>,
    pub dim: usize,
}

impl SpectralContext {
    /// `subspace`: invariant-subspace basis in original coordinates; the
    /// whole space when empty.
    pub fn new(
        ops: &[(String, SparseMat<C64>)],
        gram: &[f64],
        subspace: &[Vec<C64>],
        tol: &Tolerances,
    ) -> Result<Self> {
        if ops.is_empty() {
            return Err(GaudinError::Invalid("empty operator family".into()));
        }
        let n = ops[0].1.nrows;
        if gram.iter().any(|&g| !(g > 0.0)) {
            return Err(GaudinError::GramNotPositive);
        }
        let sqrt_g: Vec<f64> = gram.iter().map(|g| g.sqrt()).collect();
        let full: Vec<Vec<C64>>;
        let sub: &[Vec<C64>] = if subspace.is_empty() {
            full = (0..n)
                .map(|i| {
                    let mut e = vec![C64::new(0.0, 0.0); n];
                    e[i] = C64::new(1.0, 0.0);
                    e
                })
                .collect();
            &full
        } else {
            subspace
        };
        let lifted: Vec<Vec<C64>> = sub
            .iter()
            .map(|v| v.iter().enumerate().map(|(i, x)| x * sqrt_g[i]).collect())
            .collect();
        let q = orthonormalize(&lifted, 1e-12);
        if q.len() != sub.len() {
            return Err(GaudinError::DimensionMismatch(
                "subspace basis is numerically rank-deficient".into(),
            ));
        }
        let k = q.len();
        let mut restricted = Vec::with_capacity(ops.len());
        for (label, op) in ops {
            // symmetrized operator applied to each basis column
            let images: Vec<Vec<C64>> = q
                .iter()
                .map(|col| {
                    let mut out = vec![C64::new(0.0, 0.0); n];
                    for (r, c, v) in op.entries() {
                        out[r] += v * (sqrt_g[r] / sqrt_g[c]) * col[c];
                    }
                    out
                })
                .collect();
            // invariance: image must stay in span(q)
            let mut m = SparseMat::zeros(k, k);
            for (j, img) in images.iter().enumerate() {
                let mut resid = img.clone();
                for (i, b) in q.iter().enumerate() {
                    let d = dot(b, img);
                    if d.norm() > 0.0 {
                        m.add_entry(i, j, d);
                    }
                    for (ri, bi) in resid.iter_mut().zip(b) {
                        *ri -= d * bi;
                    }
                }
                let rn = norm(&resid) / norm(img).max(1.0);
                if rn > tol.residual.max(1e-8) {
                    return Err(GaudinError::NotInvariant {
                        label: label.clone(),
                        residual: rn,
                    });
                }
            }
            restricted.push(m);
        }
        Ok(SpectralContext {
            labels: ops.iter().map(|(l, _)| l.clone()).collect(),
            restricted,
            q,
            sqrt_g,
            dim: k,
        })
    }

    /// Joint spectrum of the restricted family (identity Gram).
    pub fn joint_spectrum(&self, tol: &Tolerances) -> Result<JointSpectrum> {
        let gens: Vec<(String, SparseMat<C64>)> = self
            .labels
            .iter()
            .cloned()
            .zip(self.restricted.iter().cloned())
            .collect();
        let gram = vec![1.0; self.dim];
        let mut spec = joint_diagonalize(&gens, &gram, tol)?;
        // push eigenvectors back down to original coordinates
        for item in &mut spec.items {
            for v in &mut item.basis {
                let mut out = vec![C64::new(0.0, 0.0); self.sqrt_g.len()];
                for (bi, b) in self.q.iter().enumerate() {
                    for (oi, bv) in out.iter_mut().zip(b) {
                        *oi += v[bi] * bv;
                    }
                }
                for (i, o) in out.iter_mut().enumerate() {
                    *o /= self.sqrt_g[i];
                }
                *v = out;
            }
        }
        Ok(spec)
    }

    pub fn cyclicity(&self, trials: usize, rng_seed: u64, drop_tol: f64) -> CyclicityReport {
        is_cyclic(&self.restricted, trials, rng_seed, drop_tol)
    }
}
