//! Lie-algebra structure data and tensor-product module machinery.
//!
//! Algebras are realized through their defining representation; structure
//! constants, the invariant form and the dual-basis Casimir tensor are all
//! computed from it in exact rational arithmetic. Irreducible sl2 modules
//! and tensor products with factor-embedded operators live here too.

use crate::error::{GaudinError, Result};
use crate::linalg_exact::{kernel_basis, rref};
use crate::matrix::SparseMat;
use crate::scalar::{rat, rat_int, Gaussian, Rat};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlgebraName {
    Sl2,
    Sln(usize),
}

impl AlgebraName {
    pub fn n(&self) -> usize {
        match self {
            AlgebraName::Sl2 => 2,
            AlgebraName::Sln(n) => *n,
        }
    }

    pub fn rank(&self) -> usize {
        self.n() - 1
    }

    pub fn dim(&self) -> usize {
        let n = self.n();
        n * n - 1
    }
}

/// Choice of invariant bilinear form, expressed relative to the
/// defining-representation trace form.
#[derive(Debug, Clone, PartialEq)]
pub enum FormChoice {
    Trace,
    Killing,
    Scaled(Rat),
}

impl FormChoice {
    /// Multiple of the trace form. The Killing form of sl_n is 2n times
    /// the trace form.
    pub fn scale(&self, n: usize) -> Rat {
        match self {
            FormChoice::Trace => Rat::one(),
            FormChoice::Killing => rat_int(2 * n as i64),
            FormChoice::Scaled(c) => c.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LieAlgebraData {
    pub name: AlgebraName,
    pub labels: Vec<String>,
    /// Basis in the defining representation (n x n traceless matrices).
    pub defining: Vec<SparseMat<Gaussian>>,
    /// structure[a][b] = coefficient vector of [x_a, x_b] over the basis.
    pub structure: Vec<Vec<Vec<Rat>>>,
    /// Invariant bilinear form on the basis.
    pub bform: Vec<Vec<Rat>>,
    pub bform_inv: Vec<Vec<Rat>>,
    /// bform = form_scale * (defining trace form).
    pub form_scale: Rat,
}

pub fn build_algebra(name: &str) -> Result<LieAlgebraData> {
    build_algebra_with_form(name, FormChoice::Trace)
}

pub fn build_algebra_with_form(name: &str, form: FormChoice) -> Result<LieAlgebraData> {
    let algebra_name = parse_algebra_name(name)?;
    let n = algebra_name.n();
    let (labels, defining) = sln_basis(n);
    LieAlgebraData::from_defining(algebra_name, labels, defining, form.scale(n))
}

pub fn parse_algebra_name(name: &str) -> Result<AlgebraName> {
    let trimmed = name.trim().to_lowercase();
    if trimmed == "sl2" {
        return Ok(AlgebraName::Sl2);
    }
    if let Some(rest) = trimmed.strip_prefix("sl") {
        if let Ok(n) = rest.parse::<usize>() {
            if n >= 2 {
                return Ok(if n == 2 {
                    AlgebraName::Sl2
                } else {
                    AlgebraName::Sln(n)
                });
            }
        }
    }
    Err(GaudinError::UnsupportedAlgebra(name.to_string()))
}

/// Basis of sl_n: E_ij for i != j (row-major), then H_k = E_kk - E_{k+1,k+1}.
fn sln_basis(n: usize) -> (Vec<String>, Vec<SparseMat<Gaussian>>) {
    let mut labels = Vec::new();
    let mut mats = Vec::new();
    let one = Gaussian::one();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if n == 2 {
                labels.push(if i < j { "e".into() } else { "f".into() });
            } else {
                labels.push(format!("E{}{}", i + 1, j + 1));
            }
            mats.push(SparseMat::from_triplets(n, n, &[(i, j, one.clone())]));
        }
    }
    for k in 0..n - 1 {
        if n == 2 {
            labels.push("h".into());
        } else {
            labels.push(format!("H{}", k + 1));
        }
        mats.push(SparseMat::from_triplets(
            n,
            n,
            &[(k, k, one.clone()), (k + 1, k + 1, -one.clone())],
        ));
    }
    (labels, mats)
}

fn rat_matrix_inverse(m: &[Vec<Rat>]) -> Result<Vec<Vec<Rat>>> {
    let k = m.len();
    let mut rows: Vec<Vec<Gaussian>> = (0..k)
        .map(|i| {
            let mut row: Vec<Gaussian> = m[i]
                .iter()
                .map(|v| Gaussian::from_rat(v.clone()))
                .collect();
            for j in 0..k {
                row.push(if i == j {
                    Gaussian::one()
                } else {
                    Gaussian::zero()
                });
            }
            row
        })
        .collect();
    let pivots = rref(&mut rows);
    if pivots.len() != k || pivots.iter().any(|&c| c >= k) {
        return Err(GaudinError::GramNotPositive);
    }
    Ok((0..k)
        .map(|i| (0..k).map(|j| rows[i][k + j].re.clone()).collect())
        .collect())
}

impl LieAlgebraData {
    pub fn from_defining(
        name: AlgebraName,
        labels: Vec<String>,
        defining: Vec<SparseMat<Gaussian>>,
        form_scale: Rat,
    ) -> Result<Self> {
        let dim = defining.len();
        let n = defining[0].nrows;

        // expansion of arbitrary traceless matrices over the basis, via a
        // solved linear system on vectorized entries
        let expand = |m: &SparseMat<Gaussian>| -> Result<Vec<Rat>> {
            let mut rows: Vec<Vec<Gaussian>> = Vec::with_capacity(n * n);
            for r in 0..n {
                for c in 0..n {
                    let mut row: Vec<Gaussian> =
                        defining.iter().map(|b| b.get(r, c)).collect();
                    row.push(m.get(r, c));
                    rows.push(row);
                }
            }
            let pivots = rref(&mut rows);
            if pivots.iter().any(|&c| c >= dim) {
                return Err(GaudinError::Invalid(
                    "matrix is not in the span of the basis".into(),
                ));
            }
            let mut coeffs = vec![Rat::zero(); dim];
            for (row_idx, &pc) in pivots.iter().enumerate() {
                let v = &rows[row_idx][dim];
                if !v.im.is_zero() {
                    return Err(GaudinError::Invalid(
                        "non-rational expansion coefficient".into(),
                    ));
                }
                coeffs[pc] = v.re.clone();
            }
            Ok(coeffs)
        };

        let mut structure = vec![vec![Vec::new(); dim]; dim];
        for a in 0..dim {
            for b in 0..dim {
                let comm = defining[a].commutator(&defining[b]);
                structure[a][b] = expand(&comm)?;
            }
        }

        let mut bform = vec![vec![Rat::zero(); dim]; dim];
        for a in 0..dim {
            for b in 0..dim {
                let prod = defining[a].matmul(&defining[b]);
                let mut tr = Gaussian::zero();
                for i in 0..n {
                    tr = tr + prod.get(i, i);
                }
                debug_assert!(tr.im.is_zero());
                bform[a][b] = tr.re * form_scale.clone();
            }
        }
        let bform_inv = rat_matrix_inverse(&bform)?;

        Ok(LieAlgebraData {
            name,
            labels,
            defining,
            structure,
            bform,
            bform_inv,
            form_scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn basis_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// [x, y] on coefficient vectors.
    pub fn bracket(&self, x: &[Rat], y: &[Rat]) -> Vec<Rat> {
        let dim = self.dim();
        let mut out = vec![Rat::zero(); dim];
        for a in 0..dim {
            if x[a].is_zero() {
                continue;
            }
            for b in 0..dim {
                if y[b].is_zero() {
                    continue;
                }
                let w = &x[a] * &y[b];
                for c in 0..dim {
                    let f = &self.structure[a][b][c];
                    if !f.is_zero() {
                        out[c] += &w * f;
                    }
                }
            }
        }
        out
    }

    pub fn bform_apply(&self, x: &[Rat], y: &[Rat]) -> Rat {
        let dim = self.dim();
        let mut out = Rat::zero();
        for a in 0..dim {
            if x[a].is_zero() {
                continue;
            }
            for b in 0..dim {
                if !y[b].is_zero() {
                    out += &x[a] * &self.bform[a][b] * &y[b];
                }
            }
        }
        out
    }

    /// Jacobi identity on all basis triples, exact.
    pub fn jacobi_holds(&self) -> bool {
        let dim = self.dim();
        let basis = |a: usize| -> Vec<Rat> {
            let mut v = vec![Rat::zero(); dim];
            v[a] = Rat::one();
            v
        };
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    let xa = basis(a);
                    let xb = basis(b);
                    let xc = basis(c);
                    let t1 = self.bracket(&xa, &self.bracket(&xb, &xc));
                    let t2 = self.bracket(&xb, &self.bracket(&xc, &xa));
                    let t3 = self.bracket(&xc, &self.bracket(&xa, &xb));
                    for k in 0..dim {
                        if !(&t1[k] + &t2[k] + &t3[k]).is_zero() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// B([x,y],z) + B(y,[x,z]) = 0 on all basis triples, exact.
    pub fn form_invariant(&self) -> bool {
        let dim = self.dim();
        let basis = |a: usize| -> Vec<Rat> {
            let mut v = vec![Rat::zero(); dim];
            v[a] = Rat::one();
            v
        };
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    let lhs = self.bform_apply(&self.bracket(&basis(a), &basis(b)), &basis(c))
                        + self.bform_apply(&basis(b), &self.bracket(&basis(a), &basis(c)));
                    if !lhs.is_zero() {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Killing form K(x,y) = tr(ad x ad y) from the structure constants.
    pub fn killing_form(&self) -> Vec<Vec<Rat>> {
        let dim = self.dim();
        let ad = |a: usize| -> Vec<Vec<Rat>> {
            // matrix [c][b] = structure[a][b][c]
            (0..dim)
                .map(|c| (0..dim).map(|b| self.structure[a][b][c].clone()).collect())
                .collect()
        };
        let mut out = vec![vec![Rat::zero(); dim]; dim];
        for a in 0..dim {
            let ada = ad(a);
            for b in 0..dim {
                let adb = ad(b);
                let mut tr = Rat::zero();
                for i in 0..dim {
                    for k in 0..dim {
                        tr += &ada[i][k] * &adb[k][i];
                    }
                }
                out[a][b] = tr;
            }
        }
        out
    }

    /// Re-express the same algebra over a new basis y_c = sum_a P[a][c] x_a.
    /// Used to verify basis independence of the Casimir tensor.
    pub fn change_basis(&self, p: &[Vec<Rat>]) -> Result<Self> {
        let dim = self.dim();
        let mut new_defining = Vec::with_capacity(dim);
        for c in 0..dim {
            let mut m = SparseMat::zeros(self.defining[0].nrows, self.defining[0].ncols);
            for a in 0..dim {
                if !p[a][c].is_zero() {
                    m = m.add(&self.defining[a].scale(&Gaussian::from_rat(p[a][c].clone())));
                }
            }
            new_defining.push(m);
        }
        let labels = (0..dim).map(|c| format!("y{}", c)).collect();
        LieAlgebraData::from_defining(
            self.name.clone(),
            labels,
            new_defining,
            self.form_scale.clone(),
        )
    }

    /// Coefficients of the principal Cartan element h (for sl2 this is h
    /// itself; for sl_n it has defining-rep diagonal (n-1, n-3, ..., 1-n)).
    pub fn principal_h(&self) -> Vec<Rat> {
        let n = self.name.n();
        let dim = self.dim();
        let mut coeffs = vec![Rat::zero(); dim];
        // Cartan generators sit at the tail of the basis
        let cartan_start = dim - (n - 1);
        for k in 1..n {
            coeffs[cartan_start + k - 1] = rat_int((k * (n - k)) as i64);
        }
        coeffs
    }

    /// Coefficients of the principal nilpotent f = sum of simple lowering
    /// elements E_{k+1,k}.
    pub fn principal_f(&self) -> Vec<Rat> {
        let n = self.name.n();
        let dim = self.dim();
        let mut coeffs = vec![Rat::zero(); dim];
        for k in 0..n - 1 {
            let idx = self
                .defining
                .iter()
                .position(|m| {
                    m.nnz() == 1 && !m.get(k + 1, k).is_zero()
                })
                .expect("simple lowering element in basis");
            coeffs[idx] = Rat::one();
        }
        coeffs
    }

    pub fn principal_e(&self) -> Vec<Rat> {
        let n = self.name.n();
        let mut coeffs = vec![Rat::zero(); self.dim()];
        for k in 0..n - 1 {
            let idx = self
                .defining
                .iter()
                .position(|m| m.nnz() == 1 && !m.get(k, k + 1).is_zero())
                .expect("simple raising element in basis");
            coeffs[idx] = Rat::one();
        }
        coeffs
    }

    /// Indices of the simple raising elements E_{k,k+1}.
    pub fn simple_raising_indices(&self) -> Vec<usize> {
        let n = self.name.n();
        (0..n - 1)
            .map(|k| {
                self.defining
                    .iter()
                    .position(|m| m.nnz() == 1 && !m.get(k, k + 1).is_zero())
                    .expect("simple raising element in basis")
            })
            .collect()
    }
}

/// Irreducible sl2 module with highest weight lambda on the weight basis
/// v_0 .. v_lambda.
#[derive(Debug, Clone)]
pub struct IrrepSl2 {
    pub lambda: u32,
    pub e: SparseMat<Gaussian>,
    pub f: SparseMat<Gaussian>,
    pub h: SparseMat<Gaussian>,
    /// Diagonal of the invariant Hermitian Gram form, normalized g_0 = 1.
    pub gram: Vec<Rat>,
}

pub fn irrep_sl2(lambda: i64) -> Result<IrrepSl2> {
    if lambda < 0 {
        return Err(GaudinError::Invalid(format!(
            "negative highest weight {}",
            lambda
        )));
    }
    let lambda = lambda as u32;
    let d = (lambda + 1) as usize;
    let mut e = SparseMat::zeros(d, d);
    let mut f = SparseMat::zeros(d, d);
    let mut h = SparseMat::zeros(d, d);
    for k in 0..d {
        let kk = k as i64;
        let lam = lambda as i64;
        if k + 1 < d {
            f.add_entry(k + 1, k, Gaussian::one());
        }
        if k > 0 {
            e.add_entry(k - 1, k, Gaussian::from_int(kk * (lam - kk + 1)));
        }
        let hv = lam - 2 * kk;
        if hv != 0 {
            h.add_entry(k, k, Gaussian::from_int(hv));
        }
    }
    // <v_{k+1}, v_{k+1}> = (k+1)(lambda-k) <v_k, v_k>; under this form
    // e and f are mutually adjoint and h is self-adjoint
    let mut gram = vec![Rat::one(); d];
    for k in 0..d - 1 {
        let step = rat_int((k as i64 + 1) * (lambda as i64 - k as i64));
        gram[k + 1] = &gram[k] * step;
    }
    Ok(IrrepSl2 {
        lambda,
        e,
        f,
        h,
        gram,
    })
}

/// Tensor product of modules with flat lexicographic indexing (first
/// factor most significant) and a diagonal Hermitian Gram form.
#[derive(Debug, Clone)]
pub struct TensorSpace {
    pub algebra: LieAlgebraData,
    pub weights: Vec<u32>,
    pub factor_dims: Vec<usize>,
    pub dim: usize,
    strides: Vec<usize>,
    /// factor_actions[i][a]: action of basis element a on factor i.
    pub factor_actions: Vec<Vec<SparseMat<Gaussian>>>,
    pub factor_gram: Vec<Vec<Rat>>,
    /// Principal-h weight of each flat basis vector.
    pub h_diag: Vec<i64>,
}

impl TensorSpace {
    /// sl2 tensor product of irreps with the given highest weights.
    pub fn sl2(algebra: LieAlgebraData, weights: &[u32]) -> Result<Self> {
        if !matches!(algebra.name, AlgebraName::Sl2) {
            return Err(GaudinError::Invalid(
                "TensorSpace::sl2 requires the sl2 algebra".into(),
            ));
        }
        let ie = algebra.basis_index("e").unwrap();
        let iff = algebra.basis_index("f").unwrap();
        let ih = algebra.basis_index("h").unwrap();
        let mut factor_actions = Vec::new();
        let mut factor_gram = Vec::new();
        let mut factor_dims = Vec::new();
        for &lam in weights {
            let rep = irrep_sl2(lam as i64)?;
            let mut acts = vec![SparseMat::zeros(0, 0); 3];
            acts[ie] = rep.e;
            acts[iff] = rep.f;
            acts[ih] = rep.h;
            factor_actions.push(acts);
            factor_gram.push(rep.gram);
            factor_dims.push((lam + 1) as usize);
        }
        Self::assemble(algebra, weights.to_vec(), factor_dims, factor_actions, factor_gram)
    }

    /// sl_n tensor product of defining-representation factors.
    pub fn sln_defining(algebra: LieAlgebraData, n_factors: usize) -> Result<Self> {
        let n = algebra.name.n();
        let acts: Vec<SparseMat<Gaussian>> = algebra.defining.clone();
        let factor_actions = vec![acts; n_factors];
        let factor_gram = vec![vec![Rat::one(); n]; n_factors];
        let factor_dims = vec![n; n_factors];
        Self::assemble(
            algebra,
            vec![1; n_factors],
            factor_dims,
            factor_actions,
            factor_gram,
        )
    }

    fn assemble(
        algebra: LieAlgebraData,
        weights: Vec<u32>,
        factor_dims: Vec<usize>,
        factor_actions: Vec<Vec<SparseMat<Gaussian>>>,
        factor_gram: Vec<Vec<Rat>>,
    ) -> Result<Self> {
        let n_factors = factor_dims.len();
        let mut strides = vec![1usize; n_factors];
        for i in (0..n_factors.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * factor_dims[i + 1];
        }
        let dim: usize = factor_dims.iter().product();

        // principal-h weight of each factor basis vector, read off the
        // diagonal action
        let h_coeffs = algebra.principal_h();
        let mut h_diag = vec![0i64; dim];
        let mut factor_hdiag: Vec<Vec<i64>> = Vec::new();
        for fa in &factor_actions {
            let d = fa
                .iter()
                .enumerate()
                .filter(|(a, _)| !h_coeffs[*a].is_zero())
                .fold(
                    vec![Rat::zero(); fa.iter().find(|m| m.nrows > 0).unwrap().nrows],
                    |mut acc, (a, m)| {
                        for k in 0..acc.len() {
                            let v = m.get(k, k);
                            debug_assert!(v.im.is_zero());
                            acc[k] += &h_coeffs[a] * v.re;
                        }
                        acc
                    },
                );
            factor_hdiag.push(
                d.iter()
                    .map(|r| {
                        debug_assert!(r.is_integer());
                        r.to_integer().try_into().unwrap_or_else(|_| {
                            panic!("weight out of i64 range")
                        })
                    })
                    .collect(),
            );
        }
        for flat in 0..dim {
            let mut rem = flat;
            let mut w = 0i64;
            for i in 0..n_factors {
                let k = rem / strides[i];
                rem %= strides[i];
                w += factor_hdiag[i][k];
            }
            h_diag[flat] = w;
        }

        Ok(TensorSpace {
            algebra,
            weights,
            factor_dims,
            dim,
            strides,
            factor_actions,
            factor_gram,
            h_diag,
        })
    }

    pub fn n_factors(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.strides)
            .map(|(k, s)| k * s)
            .sum()
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut rem = flat;
        self.strides
            .iter()
            .map(|s| {
                let k = rem / s;
                rem %= s;
                k
            })
            .collect()
    }

    /// x_a^{(i)} = 1 x ... x x_a x ... x 1 (basis element a at factor i,
    /// zero-based).
    pub fn embed_basis(&self, a: usize, factor: usize) -> Result<SparseMat<Gaussian>> {
        if factor >= self.n_factors() {
            return Err(GaudinError::FactorIndexOutOfRange {
                index: factor,
                n: self.n_factors(),
            });
        }
        let action = &self.factor_actions[factor][a];
        let mut out = SparseMat::zeros(self.dim, self.dim);
        let stride = self.strides[factor];
        let fdim = self.factor_dims[factor];
        for flat in 0..self.dim {
            let k = (flat / stride) % fdim;
            // column k of the factor action
            for row in 0..fdim {
                let v = action.get(row, k);
                if v.is_zero() {
                    continue;
                }
                let target = if row >= k {
                    flat + (row - k) * stride
                } else {
                    flat - (k - row) * stride
                };
                out.add_entry(target, flat, v);
            }
        }
        Ok(out)
    }

    pub fn embed_element(&self, coeffs: &[Gaussian], factor: usize) -> Result<SparseMat<Gaussian>> {
        let mut out = SparseMat::zeros(self.dim, self.dim);
        for (a, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            out = out.add(&self.embed_basis(a, factor)?.scale(c));
        }
        Ok(out)
    }

    pub fn diag_element(&self, coeffs: &[Gaussian]) -> Result<SparseMat<Gaussian>> {
        let mut out = SparseMat::zeros(self.dim, self.dim);
        for i in 0..self.n_factors() {
            out = out.add(&self.embed_element(coeffs, i)?);
        }
        Ok(out)
    }

    /// Diagonal of the Hermitian Gram form on the flat basis.
    pub fn gram_diag(&self) -> Vec<Rat> {
        (0..self.dim)
            .map(|flat| {
                let multi = self.multi_index(flat);
                multi
                    .iter()
                    .enumerate()
                    .fold(Rat::one(), |acc, (i, &k)| acc * &self.factor_gram[i][k])
            })
            .collect()
    }

    /// Exact basis of the singular subspace: the joint kernel of the
    /// diagonal simple raising operators.
    pub fn singular_subspace(&self) -> Result<Vec<Vec<Gaussian>>> {
        match self.algebra.name {
            AlgebraName::Sl2 => self.singular_sl2(),
            AlgebraName::Sln(_) => self.singular_generic(),
        }
    }

    fn singular_sl2(&self) -> Result<Vec<Vec<Gaussian>>> {
        let ie = self.algebra.basis_index("e").unwrap();
        let mut coeffs = vec![Gaussian::zero(); self.algebra.dim()];
        coeffs[ie] = Gaussian::one();
        let e_diag = self.diag_element(&coeffs)?;

        // group flat indices by principal-h weight; e maps weight w to w+2
        let mut by_weight: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for flat in 0..self.dim {
            by_weight.entry(self.h_diag[flat]).or_default().push(flat);
        }
        let mut basis = Vec::new();
        for (&w, idxs) in &by_weight {
            let target = by_weight.get(&(w + 2)).cloned().unwrap_or_default();
            // block of e_diag from weight-w columns to weight-(w+2) rows
            let col_pos: BTreeMap<usize, usize> =
                idxs.iter().enumerate().map(|(p, &i)| (i, p)).collect();
            let row_pos: BTreeMap<usize, usize> =
                target.iter().enumerate().map(|(p, &i)| (i, p)).collect();
            let mut block = SparseMat::zeros(target.len().max(1), idxs.len());
            for (&col_flat, &cp) in &col_pos {
                for row_flat in 0..self.dim {
                    let v = e_diag.get(row_flat, col_flat);
                    if v.is_zero() {
                        continue;
                    }
                    let rp = *row_pos.get(&row_flat).expect("e raises weight by 2");
                    block.add_entry(rp, cp, v);
                }
            }
            for kv in kernel_basis(&block) {
                let mut v = vec![Gaussian::zero(); self.dim];
                for (p, &flat) in idxs.iter().enumerate() {
                    v[flat] = kv[p].clone();
                }
                basis.push(v);
            }
        }
        // descending weight for a stable sector ordering
        basis.sort_by_key(|v| {
            let flat = v.iter().position(|x| !x.is_zero()).unwrap();
            -self.h_diag[flat]
        });
        Ok(basis)
    }

    fn singular_generic(&self) -> Result<Vec<Vec<Gaussian>>> {
        let raising = self.algebra.simple_raising_indices();
        let mut stacked = SparseMat::zeros(self.dim * raising.len(), self.dim);
        for (blk, &a) in raising.iter().enumerate() {
            let mut coeffs = vec![Gaussian::zero(); self.algebra.dim()];
            coeffs[a] = Gaussian::one();
            let op = self.diag_element(&coeffs)?;
            for (r, c, v) in op.entries() {
                stacked.add_entry(blk * self.dim + r, c, v.clone());
            }
        }
        Ok(kernel_basis(&stacked))
    }

    /// Principal-h weight of a weight-homogeneous vector.
    pub fn vector_weight(&self, v: &[Gaussian]) -> Option<i64> {
        let mut w = None;
        for (flat, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            match w {
                None => w = Some(self.h_diag[flat]),
                Some(prev) if prev != self.h_diag[flat] => return None,
                _ => {}
            }
        }
        w
    }

    /// Diagonal Casimir sum_{a,b} Binv_{ab} diag(x_a) diag(x_b).
    pub fn diag_casimir(&self) -> Result<SparseMat<Gaussian>> {
        let dim_g = self.algebra.dim();
        let diag_ops: Vec<SparseMat<Gaussian>> = (0..dim_g)
            .map(|a| {
                let mut coeffs = vec![Gaussian::zero(); dim_g];
                coeffs[a] = Gaussian::one();
                self.diag_element(&coeffs)
            })
            .collect::<Result<_>>()?;
        let mut out = SparseMat::zeros(self.dim, self.dim);
        for a in 0..dim_g {
            for b in 0..dim_g {
                let c = &self.algebra.bform_inv[a][b];
                if c.is_zero() {
                    continue;
                }
                out = out.add(
                    &diag_ops[a]
                        .matmul(&diag_ops[b])
                        .scale(&Gaussian::from_rat(c.clone())),
                );
            }
        }
        Ok(out)
    }

    /// Isotypic decomposition under the diagonal sl2 action: exact
    /// orthogonal projectors onto the components I_nu, via Lagrange
    /// interpolation in the diagonal Casimir.
    pub fn isotypic_decomposition(&self) -> Result<Vec<(u32, SparseMat<Gaussian>)>> {
        if !matches!(self.algebra.name, AlgebraName::Sl2) {
            return Err(GaudinError::Invalid(
                "isotypic decomposition implemented for sl2 only".into(),
            ));
        }
        let mults = sl2_singular_multiplicities(&self.weights);
        let casimir = self.diag_casimir()?;
        // Casimir eigenvalue on V_nu for B = scale * trace form
        let eig = |nu: u32| -> Rat {
            rat((nu as i64) * (nu as i64 + 2), 2) / self.algebra.form_scale.clone()
        };
        let mut out = Vec::new();
        for &(nu, _) in &mults {
            let mut proj = SparseMat::identity(self.dim);
            for &(other, _) in &mults {
                if other == nu {
                    continue;
                }
                let c_other = eig(other);
                let denom = eig(nu) - c_other.clone();
                let shifted = casimir.sub(&SparseMat::scalar(
                    self.dim,
                    Gaussian::from_rat(c_other),
                ));
                proj = proj
                    .matmul(&shifted)
                    .scale(&Gaussian::from_rat(Rat::one() / denom));
            }
            out.push((nu, proj));
        }
        Ok(out)
    }
}

/// Multiplicity of each irreducible V_nu in the sl2 tensor product with
/// the given highest weights, by brute-force character expansion.
pub fn sl2_singular_multiplicities(weights: &[u32]) -> Vec<(u32, usize)> {
    // weight multiplicities: convolution of the weight strings
    let mut mult: BTreeMap<i64, usize> = BTreeMap::new();
    mult.insert(0, 1);
    for &lam in weights {
        let mut next: BTreeMap<i64, usize> = BTreeMap::new();
        for (&w, &m) in &mult {
            for k in 0..=lam as i64 {
                *next.entry(w + lam as i64 - 2 * k).or_insert(0) += m;
            }
        }
        mult = next;
    }
    let mut out = Vec::new();
    let max_w = mult.keys().max().copied().unwrap_or(0);
    let mut nu = max_w;
    while nu >= 0 {
        let m_nu = mult.get(&nu).copied().unwrap_or(0)
            - mult.get(&(nu + 2)).copied().unwrap_or(0);
        if m_nu > 0 {
            out.push((nu as u32, m_nu));
        }
        nu -= 2;
    }
    out
}
