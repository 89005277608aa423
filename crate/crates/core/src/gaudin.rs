//! The quadratic generating function S(w), its partial-fraction
//! coefficients, homogeneous and twisted Hamiltonians, and the commuting
//! generator families they produce on a tensor product.
//!
//! Everything here is generic over the scalar field: exact Gaussian
//! rationals for identity checks, complex doubles along parameter paths.

use crate::error::{GaudinError, Result};
use crate::lie::{AlgebraName, TensorSpace};
use crate::matrix::SparseMat;
use crate::scalar::{Gaussian, Scalar};
use std::collections::BTreeMap;
use std::fmt;

/// Provenance of a generator: which Laurent coefficient of S(w) it is.
/// Sites are zero-based; `InfK(m)` is the w^m coefficient of S(w)·w² in
/// the expansion at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GenLabel {
    /// Coefficient of (w - z_i)^{-1}; equals 2 H_i^mu.
    SiteFirst(usize),
    /// Coefficient of (w - z_i)^{-2}; the Casimir on factor i.
    SiteSecond(usize),
    /// w^0 coefficient at infinity; diagonal Casimir plus twist terms.
    InfZero,
    /// w^1 coefficient at infinity; 2 diag(mu).
    InfFirst,
    /// w^2 coefficient at infinity; B(mu,mu) times the identity.
    InfSecond,
}

impl fmt::Display for GenLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenLabel::SiteFirst(i) => write!(f, "S[{},1]", i + 1),
            GenLabel::SiteSecond(i) => write!(f, "S[{},2]", i + 1),
            GenLabel::InfZero => write!(f, "S[inf,0]"),
            GenLabel::InfFirst => write!(f, "S[inf,1]"),
            GenLabel::InfSecond => write!(f, "S[inf,2]"),
        }
    }
}

/// Partial-fraction data of the quadratic generating function.
///
/// S(w) = inf_second + sum_i site_second[i]/(w-z_i)^2
///                   + sum_i site_first[i]/(w-z_i),
/// and expanding S(w) w^2 at infinity gives inf_second w^2 + inf_first w
/// + inf_zero + O(1/w). The constant relating site_first[i] to the i-th
/// Hamiltonian is `NORM_CONST`.
#[derive(Debug, Clone)]
pub struct QuadraticGenFn<S: Scalar> {
    pub site_second: Vec<SparseMat<S>>,
    pub site_first: Vec<SparseMat<S>>,
    pub inf_zero: SparseMat<S>,
    pub inf_first: SparseMat<S>,
    pub inf_second: SparseMat<S>,
}

impl<S: Scalar> QuadraticGenFn<S> {
    /// site_first[i] = NORM_CONST * H_i^mu.
    pub const NORM_CONST: i64 = 2;
}

/// Marked points and twist element for a Gaudin family.
#[derive(Debug, Clone)]
pub struct GaudinParams<S: Scalar> {
    pub z: Vec<S>,
    /// Coefficients of mu over the algebra basis; empty means mu = 0.
    pub mu: Vec<S>,
}

impl<S: Scalar> GaudinParams<S> {
    pub fn homogeneous(z: Vec<S>) -> Self {
        GaudinParams { z, mu: Vec::new() }
    }

    pub fn twisted(z: Vec<S>, mu: Vec<S>) -> Self {
        GaudinParams { z, mu }
    }

    pub fn check_distinct(&self) -> Result<()> {
        for i in 0..self.z.len() {
            for j in i + 1..self.z.len() {
                if (self.z[i].clone() - self.z[j].clone()).is_zero() {
                    return Err(GaudinError::CoincidentPoints { i, j });
                }
            }
        }
        Ok(())
    }
}

/// A Gaudin family bound to a tensor space: embedded basis operators,
/// dual-basis pairing, and every quadratic generator derived from them.
pub struct GaudinSystem<'a, S: Scalar> {
    pub space: &'a TensorSpace,
    pub params: GaudinParams<S>,
    /// Tensor factors backing each site. Ordinary families use singleton
    /// blocks; degenerations sum each basis action over a block of
    /// collided factors.
    pub blocks: Vec<Vec<usize>>,
    /// embedded[i][a] = sum_{j in blocks[i]} x_a^{(j)}.
    embedded: Vec<Vec<SparseMat<S>>>,
    binv: Vec<Vec<S>>,
    bform: Vec<Vec<S>>,
}

impl<'a, S: Scalar> GaudinSystem<'a, S> {
    pub fn new(space: &'a TensorSpace, params: GaudinParams<S>) -> Result<Self> {
        if params.z.len() != space.n_factors() {
            return Err(GaudinError::DimensionMismatch(format!(
                "{} marked points for {} tensor factors",
                params.z.len(),
                space.n_factors()
            )));
        }
        let blocks: Vec<Vec<usize>> = (0..space.n_factors()).map(|i| vec![i]).collect();
        Self::with_embedding(space, params, blocks)
    }

    /// Family whose site i acts through the summed embedding over
    /// blocks[i]. Blocks must be disjoint and nonempty but need not
    /// cover all factors.
    pub fn with_embedding(
        space: &'a TensorSpace,
        params: GaudinParams<S>,
        blocks: Vec<Vec<usize>>,
    ) -> Result<Self> {
        params.check_distinct()?;
        if params.z.len() != blocks.len() {
            return Err(GaudinError::DimensionMismatch(format!(
                "{} marked points for {} site blocks",
                params.z.len(),
                blocks.len()
            )));
        }
        let mut seen = vec![false; space.n_factors()];
        for block in &blocks {
            if block.is_empty() {
                return Err(GaudinError::MalformedPartition("empty block".into()));
            }
            for &j in block {
                if j >= space.n_factors() {
                    return Err(GaudinError::FactorIndexOutOfRange {
                        index: j,
                        n: space.n_factors(),
                    });
                }
                if seen[j] {
                    return Err(GaudinError::MalformedPartition(format!(
                        "factor {} appears in two blocks",
                        j + 1
                    )));
                }
                seen[j] = true;
            }
        }
        let dim_g = space.algebra.dim();
        if !params.mu.is_empty() && params.mu.len() != dim_g {
            return Err(GaudinError::DimensionMismatch(format!(
                "twist element has {} coefficients, algebra dimension is {}",
                params.mu.len(),
                dim_g
            )));
        }
        let embedded: Vec<Vec<SparseMat<S>>> = blocks
            .iter()
            .map(|block| {
                (0..dim_g)
                    .map(|a| {
                        let mut m = SparseMat::zeros(space.dim, space.dim);
                        for &j in block {
                            m = m.add(&space.embed_basis(a, j)?.convert::<S>());
                        }
                        Ok(m)
                    })
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        let to_s = |r: &crate::scalar::Rat| S::from_exact(&Gaussian::from_rat(r.clone()));
        let binv = space
            .algebra
            .bform_inv
            .iter()
            .map(|row| row.iter().map(to_s).collect())
            .collect();
        let bform = space
            .algebra
            .bform
            .iter()
            .map(|row| row.iter().map(to_s).collect())
            .collect();
        Ok(GaudinSystem {
            space,
            params,
            blocks,
            embedded,
            binv,
            bform,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.params.z.len()
    }

    fn dim_g(&self) -> usize {
        self.space.algebra.dim()
    }

    pub fn site_op(&self, a: usize, i: usize) -> &SparseMat<S> {
        &self.embedded[i][a]
    }

    /// sum_{a,b} Binv_ab x_a^{(i)} x_b^{(k)}.
    pub fn omega_pair(&self, i: usize, k: usize) -> SparseMat<S> {
        let dim = self.space.dim;
        let mut out = SparseMat::zeros(dim, dim);
        for a in 0..self.dim_g() {
            for b in 0..self.dim_g() {
                let c = &self.binv[a][b];
                if c.is_zero() {
                    continue;
                }
                out = out.add(&self.embedded[i][a].matmul(&self.embedded[k][b]).scale(c));
            }
        }
        out
    }

    /// Casimir acting on factor i.
    pub fn casimir_site(&self, i: usize) -> SparseMat<S> {
        self.omega_pair(i, i)
    }

    /// mu^{(i)} = sum_a B(mu, x_a) x^{a,(i)}, which is just mu embedded
    /// at site i when mu is given over the basis.
    pub fn mu_site(&self, i: usize) -> SparseMat<S> {
        let dim = self.space.dim;
        let mut out = SparseMat::zeros(dim, dim);
        for (a, c) in self.params.mu.iter().enumerate() {
            if !c.is_zero() {
                out = out.add(&self.embedded[i][a].scale(c));
            }
        }
        out
    }

    pub fn diag_mu(&self) -> SparseMat<S> {
        let mut out = SparseMat::zeros(self.space.dim, self.space.dim);
        for i in 0..self.n_sites() {
            out = out.add(&self.mu_site(i));
        }
        out
    }

    /// B(mu, mu).
    pub fn mu_pairing(&self) -> S {
        let mut out = S::zero();
        for (a, ca) in self.params.mu.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (b, cb) in self.params.mu.iter().enumerate() {
                if !cb.is_zero() {
                    out = out + ca.clone() * self.bform[a][b].clone() * cb.clone();
                }
            }
        }
        out
    }

    /// H_i^mu = sum_{k != i} Omega^{(ik)} / (z_i - z_k) + mu^{(i)}.
    /// With mu = 0 this is the homogeneous Hamiltonian.
    pub fn hamiltonian(&self, i: usize) -> Result<SparseMat<S>> {
        if i >= self.n_sites() {
            return Err(GaudinError::FactorIndexOutOfRange {
                index: i,
                n: self.n_sites(),
            });
        }
        let mut out = self.mu_site(i);
        for k in 0..self.n_sites() {
            if k == i {
                continue;
            }
            let denom = self.params.z[i].clone() - self.params.z[k].clone();
            out = out.add(&self.omega_pair(i, k).scale(&denom.invert()));
        }
        Ok(out)
    }

    /// Direct evaluation S(w) = sum_{a,b} Binv_ab Y_a(w) Y_b(w) with
    /// Y_a(w) = B(mu,x_a) Id + sum_i x_a^{(i)}/(w - z_i). Errors if w
    /// collides with a marked point.
    pub fn s_at(&self, w: &S) -> Result<SparseMat<S>> {
        let dim = self.space.dim;
        let mut y = Vec::with_capacity(self.dim_g());
        for a in 0..self.dim_g() {
            let mut mu_a = S::zero();
            for (b, cb) in self.params.mu.iter().enumerate() {
                if !cb.is_zero() {
                    mu_a = mu_a + self.bform[a][b].clone() * cb.clone();
                }
            }
            let mut ya = SparseMat::scalar(dim, mu_a);
            for i in 0..self.n_sites() {
                let denom = w.clone() - self.params.z[i].clone();
                if denom.is_zero() {
                    return Err(GaudinError::Invalid(
                        "generating function evaluated at a marked point".into(),
                    ));
                }
                ya = ya.add(&self.embedded[i][a].scale(&denom.invert()));
            }
            y.push(ya);
        }
        let mut out = SparseMat::zeros(dim, dim);
        for a in 0..self.dim_g() {
            for b in 0..self.dim_g() {
                let c = &self.binv[a][b];
                if c.is_zero() {
                    continue;
                }
                out = out.add(&y[a].matmul(&y[b]).scale(c));
            }
        }
        Ok(out)
    }

    /// Partial-fraction coefficients of S(w), assembled from the
    /// Hamiltonians and Casimirs rather than by evaluation.
    pub fn generating_function(&self) -> Result<QuadraticGenFn<S>> {
        let n = self.n_sites();
        let dim = self.space.dim;
        let two = S::from_i64(QuadraticGenFn::<S>::NORM_CONST);
        let mut site_second = Vec::with_capacity(n);
        let mut site_first = Vec::with_capacity(n);
        for i in 0..n {
            site_second.push(self.casimir_site(i));
            site_first.push(self.hamiltonian(i)?.scale(&two));
        }
        let inf_second = SparseMat::scalar(dim, self.mu_pairing());
        let inf_first = self.diag_mu().scale(&two);
        // w^0 coefficient at infinity: sum_i z_i site_first[i] + sum_i
        // site_second[i]; for mu = 0 this collapses to the diagonal
        // Casimir
        let mut inf_zero = SparseMat::zeros(dim, dim);
        for i in 0..n {
            inf_zero = inf_zero.add(&site_first[i].scale(&self.params.z[i]));
            inf_zero = inf_zero.add(&site_second[i]);
        }
        Ok(QuadraticGenFn {
            site_second,
            site_first,
            inf_zero,
            inf_first,
            inf_second,
        })
    }

    /// Reconstruct S(w) from partial-fraction data; must agree with
    /// `s_at` for every regular w.
    pub fn reconstruct_at(&self, gen_fn: &QuadraticGenFn<S>, w: &S) -> Result<SparseMat<S>> {
        let mut out = gen_fn.inf_second.clone();
        for i in 0..self.n_sites() {
            let denom = w.clone() - self.params.z[i].clone();
            if denom.is_zero() {
                return Err(GaudinError::Invalid(
                    "generating function evaluated at a marked point".into(),
                ));
            }
            let inv = denom.invert();
            let inv2 = inv.clone() * inv.clone();
            out = out.add(&gen_fn.site_second[i].scale(&inv2));
            out = out.add(&gen_fn.site_first[i].scale(&inv));
        }
        Ok(out)
    }

    /// Labeled commuting generator family. For sl2 (`full = true`) this
    /// is the whole algebra image on the space: site coefficients plus
    /// the three infinity coefficients. For other algebras only the
    /// quadratic family {S^{i,1}} is returned and `full = true` errors.
    /// Commutativity is verified: exactly over the exact field, to the
    /// given relative tolerance otherwise.
    pub fn generator_set(&self, full: bool, tol: f64) -> Result<Vec<(GenLabel, SparseMat<S>)>> {
        let is_sl2 = matches!(self.space.algebra.name, AlgebraName::Sl2);
        if full && !is_sl2 {
            return Err(GaudinError::Invalid(
                "full generator family is only available for sl2".into(),
            ));
        }
        let gen_fn = self.generating_function()?;
        let mut out: Vec<(GenLabel, SparseMat<S>)> = Vec::new();
        for (i, m) in gen_fn.site_first.iter().enumerate() {
            out.push((GenLabel::SiteFirst(i), m.clone()));
        }
        if full {
            for (i, m) in gen_fn.site_second.iter().enumerate() {
                out.push((GenLabel::SiteSecond(i), m.clone()));
            }
            out.push((GenLabel::InfZero, gen_fn.inf_zero.clone()));
            out.push((GenLabel::InfFirst, gen_fn.inf_first.clone()));
            out.push((GenLabel::InfSecond, gen_fn.inf_second.clone()));
        }
        verify_commuting(&out, tol)?;
        Ok(out)
    }
}

/// Pairwise-commutativity check: exact when the scalar field is exact,
/// relative residual below `tol` otherwise.
pub fn verify_commuting<S: Scalar>(ops: &[(GenLabel, SparseMat<S>)], tol: f64) -> Result<()> {
    let pairs: Vec<(usize, usize)> = (0..ops.len())
        .flat_map(|i| ((i + 1)..ops.len()).map(move |j| (i, j)))
        .collect();
    let bad = crate::parallel::par_find_map(&pairs, |&(i, j)| {
        let c = ops[i].1.commutator(&ops[j].1);
        if S::EXACT {
            if c.is_zero() {
                return None;
            }
            return Some((i, j, c.max_abs()));
        }
        let scale = (ops[i].1.max_abs() * ops[j].1.max_abs()).max(1.0);
        let res = c.max_abs() / scale;
        if res <= tol {
            None
        } else {
            Some((i, j, res))
        }
    });
    match bad {
        None => Ok(()),
        Some((i, j, residual)) => Err(GaudinError::NonCommuting {
            context: format!("[{}, {}]", ops[i].0, ops[j].0),
            residual,
        }),
    }
}

/// Exact restriction of a labeled generator family to an invariant
/// subspace.
pub fn restrict_generators(
    gens: &[(GenLabel, SparseMat<Gaussian>)],
    basis: &[Vec<Gaussian>],
) -> Result<Vec<(GenLabel, SparseMat<Gaussian>)>> {
    gens.iter()
        .map(|(label, m)| {
            crate::linalg_exact::restrict_exact(m, basis, &label.to_string())
                .map(|r| (*label, r))
        })
        .collect()
}

/// Decomposition of an exact operator into ad(diag h)-eigencomponents.
/// The entry (r, c) sits in degree (wt_r - wt_c)/2. Returns the extremal
/// degrees and the top-degree component.
pub fn filtration_degree(
    op: &SparseMat<Gaussian>,
    space: &TensorSpace,
) -> Result<(i64, i64, SparseMat<Gaussian>)> {
    if op.is_zero() {
        return Err(GaudinError::Invalid(
            "filtration degree of the zero operator".into(),
        ));
    }
    let mut components: BTreeMap<i64, SparseMat<Gaussian>> = BTreeMap::new();
    for (r, c, v) in op.entries() {
        let diff = space.h_diag[r] - space.h_diag[c];
        if diff % 2 != 0 {
            return Err(GaudinError::Invalid(
                "operator entry with odd weight shift".into(),
            ));
        }
        components
            .entry(diff / 2)
            .or_insert_with(|| SparseMat::zeros(op.nrows, op.ncols))
            .add_entry(r, c, v.clone());
    }
    let min_deg = *components.keys().next().unwrap();
    let max_deg = *components.keys().next_back().unwrap();
    let leading = components.remove(&max_deg).unwrap();
    Ok((min_deg, max_deg, leading))
}
