//! Degenerations of Gaudin families at boundary configurations: point
//! collisions encoded as trees, the substitution homomorphisms D and I,
//! the limit generator families they assemble, and checks that the
//! interior family actually converges to the limit along a collision
//! schedule.

use crate::error::{GaudinError, Result};
use crate::gaudin::{verify_commuting, GaudinParams, GaudinSystem, GenLabel};
use crate::lie::{AlgebraName, TensorSpace};
use crate::linalg_exact::rank;
use crate::matrix::SparseMat;
use crate::scalar::{rat_to_f64, Gaussian, Rat, C64};
use crate::spectral::{SpectralContext, Tolerances};
use num_traits::{One, Zero};

/// Ordered partition of the tensor factors (zero-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetPartition {
    pub blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn new(blocks: Vec<Vec<usize>>) -> Self {
        SetPartition { blocks }
    }

    pub fn singletons(n: usize) -> Self {
        SetPartition {
            blocks: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for block in &self.blocks {
            if block.is_empty() {
                return Err(GaudinError::MalformedPartition("empty block".into()));
            }
            for &j in block {
                if j >= n {
                    return Err(GaudinError::MalformedPartition(format!(
                        "index {} out of range 1..{}",
                        j + 1,
                        n
                    )));
                }
                if seen[j] {
                    return Err(GaudinError::MalformedPartition(format!(
                        "index {} repeated",
                        j + 1
                    )));
                }
                seen[j] = true;
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(GaudinError::MalformedPartition(
                "blocks do not cover all factors".into(),
            ));
        }
        Ok(())
    }
}

/// D sends the i-th abstract site to the sum over block i:
/// x^{(i)} -> sum_{j in M_i} x^{(j)}.
pub fn d_homomorphism(
    partition: &SetPartition,
    basis_index: usize,
    site: usize,
    space: &TensorSpace,
) -> Result<SparseMat<Gaussian>> {
    partition.validate(space.n_factors())?;
    if site >= partition.blocks.len() {
        return Err(GaudinError::FactorIndexOutOfRange {
            index: site,
            n: partition.blocks.len(),
        });
    }
    let mut out = SparseMat::zeros(space.dim, space.dim);
    for &j in &partition.blocks[site] {
        out = out.add(&space.embed_basis(basis_index, j)?);
    }
    Ok(out)
}

/// I places an operator living on the tensor factors indexed by `subset`
/// (in increasing order) onto the full space, identity elsewhere.
pub fn i_homomorphism(
    subset: &[usize],
    op: &SparseMat<Gaussian>,
    sub_dims: &[usize],
    space: &TensorSpace,
) -> Result<SparseMat<Gaussian>> {
    if subset.is_empty() || subset.windows(2).any(|w| w[0] >= w[1]) {
        return Err(GaudinError::MalformedPartition(
            "subset must be nonempty and strictly increasing".into(),
        ));
    }
    for (&j, &d) in subset.iter().zip(sub_dims) {
        if j >= space.n_factors() {
            return Err(GaudinError::FactorIndexOutOfRange {
                index: j,
                n: space.n_factors(),
            });
        }
        if space.factor_dims[j] != d {
            return Err(GaudinError::DimensionMismatch(format!(
                "factor {} has dimension {}, operator factor expects {}",
                j + 1,
                space.factor_dims[j],
                d
            )));
        }
    }
    let sub_dim: usize = sub_dims.iter().product();
    if op.nrows != sub_dim || op.ncols != sub_dim {
        return Err(GaudinError::DimensionMismatch(
            "operator does not match the subset dimensions".into(),
        ));
    }
    // strides of the small space
    let k = subset.len();
    let mut sub_strides = vec![1usize; k];
    for i in (0..k.saturating_sub(1)).rev() {
        sub_strides[i] = sub_strides[i + 1] * sub_dims[i + 1];
    }
    let sub_multi = |flat: usize| -> Vec<usize> {
        let mut rem = flat;
        sub_strides
            .iter()
            .map(|s| {
                let q = rem / s;
                rem %= s;
                q
            })
            .collect()
    };
    let mut out = SparseMat::zeros(space.dim, space.dim);
    for (r, c, v) in op.entries() {
        let rm = sub_multi(r);
        let cm = sub_multi(c);
        // all assignments of the untouched factors
        for flat in 0..space.dim {
            let multi = space.multi_index(flat);
            if subset.iter().zip(&cm).any(|(&j, &cj)| multi[j] != cj) {
                continue;
            }
            let mut target = multi.clone();
            for (&j, &rj) in subset.iter().zip(&rm) {
                target[j] = rj;
            }
            out.add_entry(space.flat_index(&target), flat, v.clone());
        }
    }
    Ok(out)
}

/// Rooted collision tree: leaves are tensor factors, each internal
/// vertex carries pairwise-distinct coordinates for its children.
#[derive(Debug, Clone, PartialEq)]
pub enum OperadTree {
    Leaf(usize),
    Internal {
        children: Vec<OperadTree>,
        coords: Vec<Rat>,
    },
}

impl OperadTree {
    /// Interior configuration: a single vertex over all leaves.
    pub fn interior(coords: Vec<Rat>) -> Self {
        OperadTree::Internal {
            children: (0..coords.len()).map(OperadTree::Leaf).collect(),
            coords,
        }
    }

    pub fn leaves(&self) -> Vec<usize> {
        match self {
            OperadTree::Leaf(i) => vec![*i],
            OperadTree::Internal { children, .. } => {
                let mut out: Vec<usize> = children.iter().flat_map(|c| c.leaves()).collect();
                out.sort_unstable();
                out
            }
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let leaves = self.leaves();
        if leaves.len() != n || leaves.iter().enumerate().any(|(i, &l)| i != l) {
            return Err(GaudinError::MalformedTree(format!(
                "leaf labels {:?} are not a bijection with 1..{}",
                leaves.iter().map(|l| l + 1).collect::<Vec<_>>(),
                n
            )));
        }
        self.validate_vertex()
    }

    fn validate_vertex(&self) -> Result<()> {
        if let OperadTree::Internal { children, coords } = self {
            if children.len() < 2 {
                return Err(GaudinError::MalformedTree(
                    "internal vertex with fewer than 2 children".into(),
                ));
            }
            if coords.len() != children.len() {
                return Err(GaudinError::MalformedTree(
                    "coordinate count differs from child count".into(),
                ));
            }
            for i in 0..coords.len() {
                for j in i + 1..coords.len() {
                    if coords[i] == coords[j] {
                        return Err(GaudinError::MalformedTree(
                            "coincident child coordinates".into(),
                        ));
                    }
                }
            }
            for c in children {
                c.validate_vertex()?;
            }
        }
        Ok(())
    }

    /// Canonical representative modulo affine maps: at every internal
    /// vertex the first child sits at 0 and the last at 1.
    pub fn normalize(&self) -> Self {
        match self {
            OperadTree::Leaf(i) => OperadTree::Leaf(*i),
            OperadTree::Internal { children, coords } => {
                let first = coords.first().unwrap().clone();
                let last = coords.last().unwrap().clone();
                let span = last - first.clone();
                let coords = coords
                    .iter()
                    .map(|c| (c.clone() - first.clone()) / span.clone())
                    .collect();
                OperadTree::Internal {
                    children: children.iter().map(|c| c.normalize()).collect(),
                    coords,
                }
            }
        }
    }

    fn internal_vertices<'a>(&'a self, path: String, out: &mut Vec<(String, &'a OperadTree)>) {
        if let OperadTree::Internal { children, .. } = self {
            out.push((path.clone(), self));
            for (i, c) in children.iter().enumerate() {
                c.internal_vertices(format!("{}.{}", path, i + 1), out);
            }
        }
    }
}

/// A labeled commuting family assembled from a collision tree; each
/// generator remembers the vertex it came from.
pub type LimitAlgebra = Vec<(String, GenLabel, SparseMat<Gaussian>)>;

/// Generator family of one vertex: the Gaudin family of its child
/// configuration, acting through block-summed embeddings.
fn vertex_generators(
    space: &TensorSpace,
    coords: &[Rat],
    blocks: Vec<Vec<usize>>,
) -> Result<Vec<(GenLabel, SparseMat<Gaussian>)>> {
    let z: Vec<Gaussian> = coords
        .iter()
        .map(|c| Gaussian::from_rat(c.clone()))
        .collect();
    let sys = GaudinSystem::with_embedding(space, GaudinParams::homogeneous(z), blocks)?;
    let full = matches!(space.algebra.name, AlgebraName::Sl2);
    sys.generator_set(full, 0.0)
}

/// Union of the D-image of an outer family on the quotient configuration
/// with per-block inner families; exact commutativity of the union is
/// verified.
pub fn gamma_substitute(
    space: &TensorSpace,
    partition: &SetPartition,
    outer_coords: &[Rat],
    inner: &[LimitAlgebra],
) -> Result<LimitAlgebra> {
    partition.validate(space.n_factors())?;
    if inner.len() != partition.blocks.len() {
        return Err(GaudinError::MalformedPartition(
            "one inner family required per block".into(),
        ));
    }
    let mut out: LimitAlgebra = vertex_generators(space, outer_coords, partition.blocks.clone())?
        .into_iter()
        .map(|(l, m)| ("outer".to_string(), l, m))
        .collect();
    for (bi, fam) in inner.iter().enumerate() {
        for (path, l, m) in fam {
            out.push((format!("block{}.{}", bi + 1, path), *l, m.clone()));
        }
    }
    let flat: Vec<(GenLabel, SparseMat<Gaussian>)> =
        out.iter().map(|(_, l, m)| (*l, m.clone())).collect();
    verify_commuting(&flat, 0.0)?;
    Ok(out)
}

/// Limit family of a boundary configuration: the union over internal
/// vertices of the vertex families, after canonical normalization.
pub fn limit_algebra(tree: &OperadTree, space: &TensorSpace) -> Result<LimitAlgebra> {
    tree.validate(space.n_factors())?;
    let tree = tree.normalize();
    let mut vertices = Vec::new();
    tree.internal_vertices("v".to_string(), &mut vertices);
    let mut out: LimitAlgebra = Vec::new();
    for (path, vertex) in &vertices {
        let OperadTree::Internal { children, coords } = vertex else {
            unreachable!()
        };
        let blocks: Vec<Vec<usize>> = children.iter().map(|c| c.leaves()).collect();
        for (l, m) in vertex_generators(space, coords, blocks)? {
            out.push((path.clone(), l, m));
        }
    }
    let flat: Vec<(GenLabel, SparseMat<Gaussian>)> =
        out.iter().map(|(_, l, m)| (*l, m.clone())).collect();
    verify_commuting(&flat, 0.0)?;
    Ok(out)
}

/// Position of every leaf along the collision schedule: descending the
/// tree, each level's offsets shrink by a further factor of s.
fn leaf_positions(tree: &OperadTree, s: &Rat) -> Vec<(usize, Rat)> {
    fn walk(node: &OperadTree, base: Rat, scale: Rat, s: &Rat, out: &mut Vec<(usize, Rat)>) {
        match node {
            OperadTree::Leaf(i) => out.push((*i, base)),
            OperadTree::Internal { children, coords } => {
                for (c, coord) in children.iter().zip(coords) {
                    walk(
                        c,
                        base.clone() + scale.clone() * coord.clone(),
                        scale.clone() * s.clone(),
                        s,
                        out,
                    );
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(tree, Rat::zero(), Rat::one(), s, &mut out);
    out.sort_by_key(|(i, _)| *i);
    out
}

#[derive(Debug, Clone)]
pub struct CollisionTarget {
    pub vertex: String,
    pub site: usize,
    /// Power of s rescaling the interior sum for this vertex depth.
    pub rescale_exponent: u32,
    pub deviation_s: f64,
    pub deviation_half: f64,
    pub ratio: f64,
    /// Deviation of 2*A(s/2) - A(s) from the limit element; second
    /// order in s for a first-order family.
    pub richardson: f64,
}

#[derive(Debug, Clone)]
pub struct CollisionReport {
    pub targets: Vec<CollisionTarget>,
    /// Largest Richardson-extrapolated deviation across targets.
    pub max_deviation: f64,
    /// Exact span dimensions of degree <= 2 products at the sampled s
    /// values.
    pub pbw_ranks: Vec<usize>,
    pub flat: bool,
}

/// Interior Hamiltonians at z(s), partially summed and rescaled per
/// vertex, must converge to the corresponding limit-family Hamiltonians
/// as s -> 0 with first-order rate. Flatness of the family is
/// spot-checked by exact degree-2 span ranks along the schedule.
pub fn collision_limit_check(
    tree: &OperadTree,
    space: &TensorSpace,
    s_small: Rat,
) -> Result<CollisionReport> {
    tree.validate(space.n_factors())?;
    let tree = tree.normalize();
    let n = space.n_factors();

    let interior_hams = |s: &Rat| -> Result<Vec<SparseMat<Gaussian>>> {
        let z: Vec<Gaussian> = leaf_positions(&tree, s)
            .into_iter()
            .map(|(_, p)| Gaussian::from_rat(p))
            .collect();
        let sys = GaudinSystem::new(space, GaudinParams::homogeneous(z))?;
        (0..n).map(|i| sys.hamiltonian(i)).collect()
    };

    // per-vertex targets: depth-d vertex with child blocks B_1..B_k and
    // coordinates w: s^d sum_{j in B_i} H_j(z(s)) -> H_i of the block
    // configuration
    struct Target {
        vertex: String,
        site: usize,
        depth: u32,
        block: Vec<usize>,
        limit: SparseMat<Gaussian>,
    }
    let mut targets: Vec<Target> = Vec::new();
    fn collect_targets(
        node: &OperadTree,
        path: String,
        depth: u32,
        space: &TensorSpace,
        targets: &mut Vec<Target>,
    ) -> Result<()> {
        if let OperadTree::Internal { children, coords } = node {
            let blocks: Vec<Vec<usize>> = children.iter().map(|c| c.leaves()).collect();
            let z: Vec<Gaussian> = coords
                .iter()
                .map(|c| Gaussian::from_rat(c.clone()))
                .collect();
            let sys =
                GaudinSystem::with_embedding(space, GaudinParams::homogeneous(z), blocks.clone())?;
            for (site, block) in blocks.iter().enumerate() {
                targets.push(Target {
                    vertex: path.clone(),
                    site,
                    depth,
                    block: block.clone(),
                    limit: sys.hamiltonian(site)?,
                });
            }
            for (i, c) in children.iter().enumerate() {
                collect_targets(c, format!("{}.{}", path, i + 1), depth + 1, space, targets)?;
            }
        }
        Ok(())
    }
    collect_targets(&tree, "v".to_string(), 0, space, &mut targets)?;

    let rescaled = |hams: &[SparseMat<Gaussian>], t: &Target, s: &Rat| -> SparseMat<Gaussian> {
        let mut acc = SparseMat::zeros(space.dim, space.dim);
        for &j in &t.block {
            acc = acc.add(&hams[j]);
        }
        let mut scale = Gaussian::one();
        for _ in 0..t.depth {
            scale = scale * Gaussian::from_rat(s.clone());
        }
        acc.scale(&scale)
    };

    let s_half = s_small.clone() / Rat::from_integer(2.into());
    let hams_s = interior_hams(&s_small)?;
    let hams_half = interior_hams(&s_half)?;
    let mut out_targets = Vec::new();
    let mut max_deviation: f64 = 0.0;
    let two = Gaussian::from_int(2);
    for t in &targets {
        let at_s = rescaled(&hams_s, t, &s_small);
        let at_half = rescaled(&hams_half, t, &s_half);
        let dev_s = at_s.sub(&t.limit).max_abs();
        let dev_half = at_half.sub(&t.limit).max_abs();
        if !dev_s.is_finite() || !dev_half.is_finite() {
            return Err(GaudinError::Divergence);
        }
        let ratio = if dev_s > 1e-14 { dev_half / dev_s } else { 0.0 };
        let richardson = at_half.scale(&two).sub(&at_s).sub(&t.limit).max_abs();
        max_deviation = max_deviation.max(richardson);
        out_targets.push(CollisionTarget {
            vertex: t.vertex.clone(),
            site: t.site,
            rescale_exponent: t.depth,
            deviation_s: dev_s,
            deviation_half: dev_half,
            ratio,
            richardson,
        });
    }

    // flatness: exact dimension of span{Id, H_i, H_i H_j} at three s
    let mut pbw_ranks = Vec::new();
    for k in 0..3u32 {
        let s = s_small.clone() / Rat::from_integer((1 << k).into());
        let hams = interior_hams(&s)?;
        let mut rows: Vec<Vec<Gaussian>> = Vec::new();
        let vectorize = |m: &SparseMat<Gaussian>| -> Vec<Gaussian> {
            let mut v = vec![Gaussian::zero(); space.dim * space.dim];
            for (r, c, val) in m.entries() {
                v[r * space.dim + c] = val.clone();
            }
            v
        };
        rows.push(vectorize(&SparseMat::identity(space.dim)));
        for h in &hams {
            rows.push(vectorize(h));
        }
        for i in 0..n {
            for j in i..n {
                rows.push(vectorize(&hams[i].matmul(&hams[j])));
            }
        }
        pbw_ranks.push(rank(rows));
    }
    let flat = pbw_ranks.windows(2).all(|w| w[0] == w[1]);

    Ok(CollisionReport {
        targets: out_targets,
        max_deviation,
        pbw_ranks,
        flat,
    })
}

#[derive(Debug, Clone)]
pub struct LimitSpectrumReport {
    pub dim: usize,
    pub cyclic: bool,
    pub simple: bool,
    pub min_gap: f64,
    pub max_residual: f64,
}

/// Cyclicity and spectral simplicity of the limit family on the
/// singular subspace. Both must hold for real stratum coordinates.
pub fn limit_spectrum_suite(
    tree: &OperadTree,
    space: &TensorSpace,
    rng_seed: u64,
    tol: &Tolerances,
) -> Result<LimitSpectrumReport> {
    let algebra = limit_algebra(tree, space)?;
    let ops: Vec<(String, SparseMat<C64>)> = algebra
        .iter()
        .map(|(path, l, m)| (format!("{}:{}", path, l), m.to_c64()))
        .collect();
    let gram: Vec<f64> = space.gram_diag().iter().map(rat_to_f64).collect();
    let sing = space.singular_subspace()?;
    let sing_f: Vec<Vec<C64>> = sing
        .iter()
        .map(|v| v.iter().map(|x| x.to_c64()).collect())
        .collect();
    let ctx = SpectralContext::new(&ops, &gram, &sing_f, tol)?;
    let spec = ctx.joint_spectrum(tol)?;
    let (verdict, min_gap) = spec.simple_spectrum(tol);
    let report = ctx.cyclicity(20, rng_seed, 1e-10);
    Ok(LimitSpectrumReport {
        dim: ctx.dim,
        cyclic: report.cyclic,
        simple: verdict == crate::spectral::SimpleVerdict::Simple,
        min_gap,
        max_residual: spec.max_residual,
    })
}
