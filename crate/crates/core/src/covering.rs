//! Continuation of joint eigenlines along real paths of marked-point
//! configurations, including passages through boundary walls where the
//! interior family degenerates and the limit family takes over. The
//! output of a closed loop is a permutation of the eigenlines.

use crate::error::{GaudinError, Result};
use crate::gaudin::{GaudinParams, GaudinSystem};
use crate::lie::{AlgebraName, TensorSpace};
use crate::limits::{limit_algebra, OperadTree};
use crate::matrix::SparseMat;
use crate::parallel::{par_map_with, Strategy};
use crate::scalar::{rat_to_f64, C64};
use crate::spectral::{SpectralContext, Tolerances};
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

#[derive(Debug, Clone)]
pub enum PathStage {
    /// Linear interpolation between two interior configurations;
    /// pairwise distinctness must hold along the whole segment.
    Interior { z_start: Vec<f64>, z_end: Vec<f64> },
    /// Crossing of the boundary stratum labeled by the tree; the
    /// adjacent interior endpoints must lie inside the collar on
    /// either side.
    Wall { tree: OperadTree },
}

/// Piecewise path of real configurations, closed up to a relabeling of
/// the tensor factors: the final configuration satisfies
/// z_end[j] = z_start[closing_relabel[j]].
#[derive(Debug, Clone)]
pub struct ParamPath {
    pub stages: Vec<PathStage>,
    pub closing_relabel: Vec<usize>,
    pub max_step: f64,
    pub min_step: f64,
    pub gap_floor: f64,
    /// Required overlap when handing lines over to/from a wall family.
    pub collar_overlap: f64,
}

impl ParamPath {
    pub fn new(stages: Vec<PathStage>, closing_relabel: Vec<usize>) -> Self {
        ParamPath {
            stages,
            closing_relabel,
            max_step: 0.05,
            min_step: 1e-5,
            gap_floor: 1e-8,
            collar_overlap: 0.99,
        }
    }

    pub fn start_config(&self) -> Option<&[f64]> {
        self.stages.iter().find_map(|s| match s {
            PathStage::Interior { z_start, .. } => Some(z_start.as_slice()),
            _ => None,
        })
    }

    pub fn end_config(&self) -> Option<&[f64]> {
        self.stages.iter().rev().find_map(|s| match s {
            PathStage::Interior { z_end, .. } => Some(z_end.as_slice()),
            _ => None,
        })
    }

    pub fn hash_value(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for stage in &self.stages {
            match stage {
                PathStage::Interior { z_start, z_end } => {
                    for v in z_start.iter().chain(z_end) {
                        v.to_bits().hash(&mut h);
                    }
                }
                PathStage::Wall { tree } => format!("{:?}", tree).hash(&mut h),
            }
        }
        self.closing_relabel.hash(&mut h);
        h.finish()
    }

    /// Path traversed backwards; a closing relabel must be trivial.
    pub fn reversed(&self) -> ParamPath {
        let stages = self
            .stages
            .iter()
            .rev()
            .map(|s| match s {
                PathStage::Interior { z_start, z_end } => PathStage::Interior {
                    z_start: z_end.clone(),
                    z_end: z_start.clone(),
                },
                PathStage::Wall { tree } => PathStage::Wall { tree: tree.clone() },
            })
            .collect();
        ParamPath {
            stages,
            ..self.clone()
        }
    }

    /// Relabel the tensor factors of every stage: new factor j plays
    /// the role old factor sigma[j] played.
    pub fn relabeled(&self, sigma: &[usize]) -> ParamPath {
        let inv = invert_perm(sigma);
        let map_z = |z: &[f64]| -> Vec<f64> { sigma.iter().map(|&k| z[k]).collect() };
        fn map_tree(t: &OperadTree, inv: &[usize]) -> OperadTree {
            match t {
                OperadTree::Leaf(l) => OperadTree::Leaf(inv[*l]),
                OperadTree::Internal { children, coords } => OperadTree::Internal {
                    children: children.iter().map(|c| map_tree(c, inv)).collect(),
                    coords: coords.clone(),
                },
            }
        }
        let stages = self
            .stages
            .iter()
            .map(|s| match s {
                PathStage::Interior { z_start, z_end } => PathStage::Interior {
                    z_start: map_z(z_start),
                    z_end: map_z(z_end),
                },
                PathStage::Wall { tree } => PathStage::Wall {
                    tree: map_tree(tree, &inv),
                },
            })
            .collect();
        ParamPath {
            stages,
            closing_relabel: self.closing_relabel.clone(),
            ..self.clone()
        }
    }
}

pub fn invert_perm(sigma: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; sigma.len()];
    for (i, &s) in sigma.iter().enumerate() {
        inv[s] = i;
    }
    inv
}

pub fn compose_perm(outer: &[usize], inner: &[usize]) -> Vec<usize> {
    inner.iter().map(|&i| outer[i]).collect()
}

/// Concatenation; the geometric end of `a` must coincide with the
/// start of `b`. Closing relabels compose.
pub fn concat(a: &ParamPath, b: &ParamPath) -> Result<ParamPath> {
    let (ea, sb) = match (a.end_config(), b.start_config()) {
        (Some(e), Some(s)) => (e, s),
        _ => return Err(GaudinError::Invalid("empty path".into())),
    };
    if ea.len() != sb.len() || ea.iter().zip(sb).any(|(x, y)| (x - y).abs() > 1e-12) {
        return Err(GaudinError::Invalid(
            "paths do not concatenate: configurations differ".into(),
        ));
    }
    let mut stages = a.stages.clone();
    stages.extend(b.stages.iter().cloned());
    Ok(ParamPath {
        stages,
        closing_relabel: compose_perm(&a.closing_relabel, &b.closing_relabel),
        ..a.clone()
    })
}

#[derive(Debug, Clone)]
pub struct PermutationResult {
    /// perm[i] = start-line index reached by the continuation of start
    /// line i, after the closing relabel.
    pub perm: Vec<usize>,
    pub min_gap: f64,
    pub steps: usize,
    pub path_hash: u64,
}

/// Relabeling operator on the tensor space: P e_m = e_{m'} with
/// m'[j] = m[sigma[j]]. Requires matching factor dimensions.
pub fn factor_relabel_op(space: &TensorSpace, sigma: &[usize]) -> Result<SparseMat<C64>> {
    let n = space.n_factors();
    if sigma.len() != n {
        return Err(GaudinError::DimensionMismatch(
            "relabeling length differs from factor count".into(),
        ));
    }
    let mut seen = vec![false; n];
    for &s in sigma {
        if s >= n || seen[s] {
            return Err(GaudinError::Invalid("relabeling is not a permutation".into()));
        }
        seen[s] = true;
    }
    for j in 0..n {
        if space.factor_dims[j] != space.factor_dims[sigma[j]] {
            return Err(GaudinError::DimensionMismatch(
                "relabeling mixes factors of different dimension".into(),
            ));
        }
    }
    let mut p = SparseMat::zeros(space.dim, space.dim);
    for flat in 0..space.dim {
        let m = space.multi_index(flat);
        let mp: Vec<usize> = sigma.iter().map(|&k| m[k]).collect();
        p.add_entry(space.flat_index(&mp), flat, C64::new(1.0, 0.0));
    }
    Ok(p)
}

struct Tracker<'a> {
    space: &'a TensorSpace,
    gram: Vec<f64>,
    sing: Vec<Vec<C64>>,
    tol: Tolerances,
    gap_floor: f64,
    min_gap_seen: f64,
    steps: usize,
}

impl<'a> Tracker<'a> {
    fn new(space: &'a TensorSpace, gap_floor: f64) -> Result<Self> {
        let gram = space.gram_diag().iter().map(rat_to_f64).collect();
        let sing = space
            .singular_subspace()?
            .iter()
            .map(|v| v.iter().map(|x| x.to_c64()).collect())
            .collect();
        Ok(Tracker {
            space,
            gram,
            sing,
            tol: Tolerances::default(),
            gap_floor,
            min_gap_seen: f64::INFINITY,
            steps: 0,
        })
    }

    fn lines_from_ops(
        &mut self,
        ops: &[(String, SparseMat<C64>)],
        s: f64,
    ) -> Result<Vec<Vec<C64>>> {
        let ctx = SpectralContext::new(ops, &self.gram, &self.sing, &self.tol)?;
        let spec = ctx.joint_spectrum(&self.tol)?;
        let (_, gap) = spec.simple_spectrum(&self.tol);
        if spec.items.iter().any(|it| it.multiplicity() > 1) || gap < self.gap_floor {
            return Err(GaudinError::GapCollapse {
                gap,
                floor: self.gap_floor,
                s,
            });
        }
        self.min_gap_seen = self.min_gap_seen.min(gap);
        self.steps += 1;
        Ok(spec
            .items
            .into_iter()
            .map(|it| it.basis.into_iter().next().unwrap())
            .collect())
    }

    fn interior_lines(&mut self, z: &[f64], s: f64) -> Result<Vec<Vec<C64>>> {
        let zc: Vec<C64> = z.iter().map(|&x| C64::new(x, 0.0)).collect();
        let sys = GaudinSystem::new(self.space, GaudinParams::homogeneous(zc))?;
        let full = matches!(self.space.algebra.name, AlgebraName::Sl2);
        let gens = sys.generator_set(full, 1e-8)?;
        let ops: Vec<(String, SparseMat<C64>)> = gens
            .into_iter()
            .map(|(l, m)| (l.to_string(), m))
            .collect();
        self.lines_from_ops(&ops, s)
    }

    fn wall_lines(&mut self, tree: &OperadTree, s: f64) -> Result<Vec<Vec<C64>>> {
        let fam = limit_algebra(tree, self.space)?;
        let ops: Vec<(String, SparseMat<C64>)> = fam
            .iter()
            .map(|(path, l, m)| (format!("{}:{}", path, l), m.to_c64()))
            .collect();
        self.lines_from_ops(&ops, s)
    }

    fn overlap(&self, u: &[C64], v: &[C64]) -> f64 {
        let mut num = C64::new(0.0, 0.0);
        let mut nu = 0.0;
        let mut nv = 0.0;
        for (i, (a, b)) in u.iter().zip(v).enumerate() {
            num += self.gram[i] * a.conj() * b;
            nu += self.gram[i] * a.norm_sqr();
            nv += self.gram[i] * b.norm_sqr();
        }
        num.norm() / (nu.sqrt() * nv.sqrt())
    }

    /// Greedy maximal-overlap bijection old -> new; returns the
    /// assignment and its minimal overlap.
    fn match_lines(&self, old: &[Vec<C64>], new: &[Vec<C64>]) -> (Vec<usize>, f64) {
        let k = old.len();
        let mut pairs = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                pairs.push((i, j, self.overlap(&old[i], &new[j])));
            }
        }
        pairs.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap());
        let mut assign = vec![usize::MAX; k];
        let mut used = vec![false; k];
        let mut min_ov = f64::INFINITY;
        for (i, j, ov) in pairs {
            if assign[i] == usize::MAX && !used[j] {
                assign[i] = j;
                used[j] = true;
                min_ov = min_ov.min(ov);
            }
        }
        (assign, min_ov)
    }
}

/// Continue the joint eigenlines along the path; simple spectrum is
/// required at the start and the gap floor enforced throughout.
pub fn track_eigenlines(
    path: &ParamPath,
    space: &TensorSpace,
    match_threshold: f64,
) -> Result<PermutationResult> {
    let start_z = path
        .start_config()
        .ok_or_else(|| GaudinError::Invalid("path has no interior stage".into()))?
        .to_vec();
    let mut tracker = Tracker::new(space, path.gap_floor)?;
    let start_lines = match tracker.interior_lines(&start_z, 0.0) {
        Ok(l) => l,
        Err(GaudinError::GapCollapse { .. }) => return Err(GaudinError::NotSimpleAtStart),
        Err(e) => return Err(e),
    };
    // current[i] continues start line i
    let mut current = start_lines.clone();
    let mut after_wall = false;

    let reorder = |lines: Vec<Vec<C64>>, assign: &[usize]| -> Vec<Vec<C64>> {
        assign.iter().map(|&j| lines[j].clone()).collect()
    };

    for stage in &path.stages {
        match stage {
            PathStage::Interior { z_start, z_end } => {
                // hand-over to this stage's start point
                let lines = tracker.interior_lines(z_start, 0.0)?;
                let (assign, ov) = tracker.match_lines(&current, &lines);
                let need = if after_wall {
                    path.collar_overlap
                } else {
                    match_threshold
                };
                if ov < need {
                    return Err(if after_wall {
                        GaudinError::CollarMismatch {
                            overlap: ov,
                            required: need,
                        }
                    } else {
                        GaudinError::AmbiguousMatching { overlap: ov }
                    });
                }
                current = reorder(lines, &assign);
                after_wall = false;
                let mut s = 0.0f64;
                let mut h = path.max_step;
                while s < 1.0 {
                    let s_next = (s + h).min(1.0);
                    let z: Vec<f64> = z_start
                        .iter()
                        .zip(z_end)
                        .map(|(a, b)| a + s_next * (b - a))
                        .collect();
                    let lines = tracker.interior_lines(&z, s_next)?;
                    let (assign, ov) = tracker.match_lines(&current, &lines);
                    if ov >= match_threshold {
                        current = reorder(lines, &assign);
                        s = s_next;
                        h = (h * 1.5).min(path.max_step);
                    } else {
                        h /= 2.0;
                        if h < path.min_step {
                            return Err(GaudinError::AmbiguousMatching { overlap: ov });
                        }
                    }
                }
            }
            PathStage::Wall { tree } => {
                let lines = tracker.wall_lines(tree, f64::NAN)?;
                let (assign, ov) = tracker.match_lines(&current, &lines);
                if ov < path.collar_overlap {
                    return Err(GaudinError::CollarMismatch {
                        overlap: ov,
                        required: path.collar_overlap,
                    });
                }
                current = reorder(lines, &assign);
                after_wall = true;
            }
        }
    }

    // close the loop against the relabeled start lines
    let p = factor_relabel_op(space, &path.closing_relabel)?;
    let reference: Vec<Vec<C64>> = start_lines
        .iter()
        .map(|v| p.mul_vec(v))
        .collect();
    let (perm, ov) = tracker.match_lines(&current, &reference);
    if ov < match_threshold {
        return Err(GaudinError::AmbiguousMatching { overlap: ov });
    }
    Ok(PermutationResult {
        perm,
        min_gap: tracker.min_gap_seen,
        steps: tracker.steps,
        path_hash: path.hash_value(),
    })
}

/// Run a catalog of loops; loops are independent and run concurrently.
pub fn cactus_loop_suite(
    space: &TensorSpace,
    catalog: &[(String, ParamPath)],
    match_threshold: f64,
    strategy: Strategy,
) -> Vec<(String, Result<PermutationResult>)> {
    par_map_with(strategy, catalog, |(name, path)| {
        (name.clone(), track_eigenlines(path, space, match_threshold))
    })
}

/// Catalog of loops for three marked points (plus infinity): the real
/// moduli space is a circle with three walls; the full loop crosses all
/// of them through limit families and returns to base.
pub fn n3_circle_loop(delta: f64) -> ParamPath {
    let pair = |a: usize, b: usize, rest: usize, coords: [f64; 2]| -> OperadTree {
        let c0 = crate::scalar::rat_int(0);
        let c1 = crate::scalar::rat_int(1);
        // positions of the cluster and the spectator, normalized later
        let to_rat = |x: f64| -> crate::scalar::Rat {
            crate::scalar::Rat::new(((x * 1024.0).round() as i64).into(), 1024.into())
        };
        OperadTree::Internal {
            children: vec![
                OperadTree::Internal {
                    children: vec![OperadTree::Leaf(a), OperadTree::Leaf(b)],
                    coords: vec![c0, c1],
                },
                OperadTree::Leaf(rest),
            ],
            coords: vec![to_rat(coords[0]), to_rat(coords[1])],
        }
    };
    let d = delta;
    let stages = vec![
        // wall 1: z2 = z3 at 1
        PathStage::Interior {
            z_start: vec![0.0, 0.5, 1.0],
            z_end: vec![0.0, 1.0 - d, 1.0],
        },
        PathStage::Wall {
            tree: pair(1, 2, 0, [1.0, 0.0]),
        },
        PathStage::Interior {
            z_start: vec![0.0, 1.0 + d, 1.0],
            z_end: vec![0.0, 2.0, 1.0],
        },
        // affine chart switch z -> z/2 (same moduli point, identical lines)
        PathStage::Interior {
            z_start: vec![0.0, 1.0, 0.5],
            z_end: vec![0.0, 1.0, d],
        },
        // wall 2: z1 = z3 at 0
        PathStage::Wall {
            tree: pair(0, 2, 1, [0.0, 1.0]),
        },
        PathStage::Interior {
            z_start: vec![0.0, 1.0, -d],
            z_end: vec![0.0, 1.0, -1.0],
        },
        PathStage::Interior {
            z_start: vec![0.0, 1.0, -1.0],
            z_end: vec![1.0 - d, 1.0, -1.0],
        },
        // wall 3: z1 = z2 at 1
        PathStage::Wall {
            tree: pair(0, 1, 2, [1.0, -1.0]),
        },
        PathStage::Interior {
            z_start: vec![1.0 + d, 1.0, -1.0],
            z_end: vec![1.0 + d, 1.0, -1.0],
        },
        // affine chart switch z -> (z - (1+d))/(-2-d), then home
        PathStage::Interior {
            z_start: vec![0.0, d / (2.0 + d), 1.0],
            z_end: vec![0.0, 0.5, 1.0],
        },
    ];
    ParamPath::new(stages, vec![0, 1, 2])
}

/// Contractible loop: out and back along the same interior segment.
pub fn trivial_loop(base: Vec<f64>, excursion: Vec<f64>) -> ParamPath {
    let stages = vec![
        PathStage::Interior {
            z_start: base.clone(),
            z_end: excursion.clone(),
        },
        PathStage::Interior {
            z_start: excursion,
            z_end: base.clone(),
        },
    ];
    let n = base.len();
    ParamPath::new(stages, (0..n).collect())
}

/// Loop through the wall where factors i and j (adjacent in the base
/// ordering) collide; ends at the base configuration with the two
/// coordinates exchanged, closed by the factor swap.
pub fn swap_loop(base: Vec<f64>, i: usize, j: usize, delta: f64) -> ParamPath {
    let n = base.len();
    let mid = 0.5 * (base[i] + base[j]);
    let mut near = base.clone();
    near[i] = mid - delta;
    near[j] = mid + delta;
    let mut far = base.clone();
    far[i] = mid + delta;
    far[j] = mid - delta;
    let mut swapped = base.clone();
    swapped.swap(i, j);
    let to_rat = |x: f64| -> crate::scalar::Rat {
        crate::scalar::Rat::new(((x * 1024.0).round() as i64).into(), 1024.into())
    };
    let mut children: Vec<OperadTree> = Vec::new();
    let mut coords: Vec<crate::scalar::Rat> = Vec::new();
    for k in 0..n {
        if k == i {
            children.push(OperadTree::Internal {
                children: vec![OperadTree::Leaf(i), OperadTree::Leaf(j)],
                coords: vec![crate::scalar::rat_int(0), crate::scalar::rat_int(1)],
            });
            coords.push(to_rat(mid));
        } else if k != j {
            children.push(OperadTree::Leaf(k));
            coords.push(to_rat(base[k]));
        }
    }
    let tree = OperadTree::Internal { children, coords };
    let stages = vec![
        PathStage::Interior {
            z_start: base.clone(),
            z_end: near,
        },
        PathStage::Wall { tree },
        PathStage::Interior {
            z_start: far,
            z_end: swapped,
        },
    ];
    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.swap(i, j);
    ParamPath::new(stages, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::build_algebra;

    fn sl2_space(weights: &[u32]) -> TensorSpace {
        TensorSpace::sl2(build_algebra("sl2").unwrap(), weights).unwrap()
    }

    fn identity(n: usize) -> Vec<usize> {
        (0..n).collect()
    }

    #[test]
    fn relabel_op_is_equivariant() {
        let space = sl2_space(&[1, 1, 1]);
        let p = factor_relabel_op(&space, &[0, 2, 1]).unwrap();
        // P X^{(sigma[j])} = X^{(j)} P for every basis element
        for a in 0..3 {
            let x1 = space.embed_basis(a, 2).unwrap().to_c64();
            let x2 = space.embed_basis(a, 1).unwrap().to_c64();
            assert!(p.matmul(&x1).sub(&x2.matmul(&p)).max_abs() < 1e-14);
        }
        assert!(factor_relabel_op(&space, &[0, 0, 1]).is_err());
    }

    #[test]
    fn constant_and_contractible_paths_are_identity() {
        let space = sl2_space(&[1, 1, 1]);
        let constant = trivial_loop(vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 1.0]);
        let r = track_eigenlines(&constant, &space, 0.9).unwrap();
        assert_eq!(r.perm, identity(3));
        let out_and_back = trivial_loop(vec![0.0, 0.5, 1.0], vec![-0.3, 0.45, 1.4]);
        let r = track_eigenlines(&out_and_back, &space, 0.9).unwrap();
        assert_eq!(r.perm, identity(3));
        assert!(r.min_gap >= 1e-8);
    }

    #[test]
    fn circle_loop_squares_to_identity() {
        let space = sl2_space(&[1, 1, 1]);
        let gamma = n3_circle_loop(1e-3);
        let r1 = track_eigenlines(&gamma, &space, 0.9).unwrap();
        let doubled = concat(&gamma, &gamma).unwrap();
        let r2 = track_eigenlines(&doubled, &space, 0.9).unwrap();
        assert_eq!(r2.perm, compose_perm(&r1.perm, &r1.perm));
        assert_eq!(r2.perm, identity(3));
    }

    #[test]
    fn step_halving_preserves_permutation() {
        let space = sl2_space(&[1, 1, 1]);
        let gamma = n3_circle_loop(1e-3);
        let r1 = track_eigenlines(&gamma, &space, 0.9).unwrap();
        let mut fine = gamma.clone();
        fine.max_step /= 2.0;
        let r2 = track_eigenlines(&fine, &space, 0.9).unwrap();
        assert_eq!(r1.perm, r2.perm);
        assert_eq!(r1.path_hash, r2.path_hash);
    }

    #[test]
    fn four_point_swap_is_involution() {
        let space = sl2_space(&[1, 1, 1, 1]);
        let base = vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        let gamma = swap_loop(base, 1, 2, 1e-3);
        let r1 = track_eigenlines(&gamma, &space, 0.9).unwrap();
        // doubled loop: second copy runs in the relabeled coordinates
        let doubled = concat(&gamma, &gamma.relabeled(&gamma.closing_relabel)).unwrap();
        let r2 = track_eigenlines(&doubled, &space, 0.9).unwrap();
        assert_eq!(r2.perm, identity(6));
        // hence the single loop is an involution
        let mut sq = vec![0usize; 6];
        for (i, &p) in r1.perm.iter().enumerate() {
            sq[i] = r1.perm[p];
        }
        assert_eq!(sq, identity(6));
    }

    #[test]
    fn suite_runs_catalog_and_composes() {
        let space = sl2_space(&[1, 1, 1]);
        let base = vec![0.0, 0.5, 1.0];
        let catalog = vec![
            ("trivial".to_string(), trivial_loop(base.clone(), vec![0.1, 0.55, 0.9])),
            ("circle".to_string(), n3_circle_loop(1e-3)),
        ];
        let results = cactus_loop_suite(&space, &catalog, 0.9, Strategy::Parallel);
        let by_name: std::collections::BTreeMap<_, _> = results
            .into_iter()
            .map(|(n, r)| (n, r.unwrap()))
            .collect();
        assert_eq!(by_name["trivial"].perm, identity(3));
        // concatenation of trivial and circle equals the circle permutation
        let cat = concat(&catalog[0].1, &catalog[1].1).unwrap();
        let rc = track_eigenlines(&cat, &space, 0.9).unwrap();
        assert_eq!(
            rc.perm,
            compose_perm(&by_name["circle"].perm, &by_name["trivial"].perm)
        );
    }
}
