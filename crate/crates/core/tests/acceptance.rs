//! End-to-end acceptance suite. Each test covers one numbered claim and
//! prints a single pass/fail line; tolerances are stated inline.

use gaudin_core::covering::{
    compose_perm, concat, n3_circle_loop, swap_loop, track_eigenlines, trivial_loop,
};
use gaudin_core::gaudin::{
    filtration_degree, verify_commuting, GaudinParams, GaudinSystem, GenLabel,
};
use gaudin_core::lie::{build_algebra, sl2_singular_multiplicities, TensorSpace};
use gaudin_core::limits::{collision_limit_check, limit_spectrum_suite, OperadTree};
use gaudin_core::oper::{
    count_bijection, frobenius_obstruction, monodromy_report, oper_from_eigenvalue,
    oper_space_dimension, residue_check,
};
use gaudin_core::scalar::{rat, rat_int, rat_to_f64, Gaussian, Rat};
use gaudin_core::spectral::{hermitian_check, SimpleVerdict, SpectralContext, Tolerances};
use gaudin_core::{SparseMat, C64};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(number: u32, name: &str, outcome: Result<(), String>) {
    match outcome {
        Ok(()) => println!("criterion {:02} {}: PASS", number, name),
        Err(msg) => {
            println!("criterion {:02} {}: FAIL ({})", number, name, msg);
            panic!("criterion {:02} {} failed: {}", number, name, msg);
        }
    }
}

fn random_rational_config(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rat> {
    loop {
        let z: Vec<Rat> = (0..n)
            .map(|_| rat(rng.gen_range(-12i64..13), rng.gen_range(1i64..8)))
            .collect();
        if (0..n).all(|i| (i + 1..n).all(|j| z[i] != z[j])) {
            return z;
        }
    }
}

fn gaussian_config(z: &[Rat]) -> Vec<Gaussian> {
    z.iter().map(|r| Gaussian::from_rat(r.clone())).collect()
}

fn mu_element(algebra: &gaudin_core::lie::LieAlgebraData, which: &str) -> Vec<Gaussian> {
    let dim = algebra.labels.len();
    let from = |coeffs: Vec<Rat>| -> Vec<Gaussian> {
        coeffs.into_iter().map(Gaussian::from_rat).collect()
    };
    match which {
        "zero" => vec![Gaussian::zero(); dim],
        "h" => from(algebra.principal_h()),
        "f" => from(algebra.principal_f()),
        "h+e+f" => {
            let h = algebra.principal_h();
            let e = algebra.principal_e();
            let f = algebra.principal_f();
            from(h
                .into_iter()
                .zip(e)
                .zip(f)
                .map(|((a, b), c)| a + b + c)
                .collect())
        }
        _ => unreachable!(),
    }
}

struct SingularSpectrum {
    space: TensorSpace,
    gens: Vec<(GenLabel, SparseMat<Gaussian>)>,
    spec: gaudin_core::spectral::JointSpectrum,
    gram: Vec<f64>,
    ctx: SpectralContext,
}

/// Exact generator set at rational points, restricted to V^sing.
fn singular_spectrum(weights: &[u32], z: &[Rat], tol: &Tolerances) -> SingularSpectrum {
    let algebra = build_algebra("sl2").unwrap();
    let space = TensorSpace::sl2(algebra, weights).unwrap();
    let sys = GaudinSystem::new(&space, GaudinParams::homogeneous(gaussian_config(z))).unwrap();
    let gens = sys.generator_set(true, 0.0).unwrap();
    let ops: Vec<(String, SparseMat<C64>)> = gens
        .iter()
        .map(|(l, m)| (l.to_string(), m.to_c64()))
        .collect();
    let gram: Vec<f64> = space.gram_diag().iter().map(rat_to_f64).collect();
    let sing: Vec<Vec<C64>> = space
        .singular_subspace()
        .unwrap()
        .iter()
        .map(|v| v.iter().map(|x| x.to_c64()).collect())
        .collect();
    let ctx = SpectralContext::new(&ops, &gram, &sing, tol).unwrap();
    let spec = ctx.joint_spectrum(tol).unwrap();
    drop(sys);
    SingularSpectrum {
        space,
        gens,
        spec,
        gram,
        ctx,
    }
}

const CATALOG: [&[u32]; 5] = [&[1, 1], &[1, 1, 1], &[1, 1, 1, 1], &[2, 2], &[2, 1, 1]];

#[test]
fn criterion_01_exact_commutativity() {
    let run = || -> Result<(), String> {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let mus = ["zero", "h", "h+e+f", "f"];
        for weights in [
            vec![3u32, 2],
            vec![1, 2, 3],
            vec![1, 1, 2, 3],
        ] {
            let algebra = build_algebra("sl2").map_err(|e| e.to_string())?;
            let space = TensorSpace::sl2(algebra, &weights).map_err(|e| e.to_string())?;
            for trial in 0..5 {
                let z = random_rational_config(&mut rng, weights.len());
                for which in mus {
                    let mu = mu_element(&space.algebra, which);
                    let sys = GaudinSystem::new(
                        &space,
                        GaudinParams::twisted(gaussian_config(&z), mu),
                    )
                    .map_err(|e| e.to_string())?;
                    let gens = sys.generator_set(true, 0.0).map_err(|e| e.to_string())?;
                    verify_commuting(&gens, 0.0).map_err(|e| {
                        format!("sl2 {:?} trial {} mu={}: {}", weights, trial, which, e)
                    })?;
                }
            }
        }
        for n in 2..=3usize {
            let algebra = build_algebra("sl3").map_err(|e| e.to_string())?;
            let space = TensorSpace::sln_defining(algebra, n).map_err(|e| e.to_string())?;
            for trial in 0..5 {
                let z = random_rational_config(&mut rng, n);
                for which in mus {
                    let mu = mu_element(&space.algebra, which);
                    let sys = GaudinSystem::new(
                        &space,
                        GaudinParams::twisted(gaussian_config(&z), mu),
                    )
                    .map_err(|e| e.to_string())?;
                    let gens = sys.generator_set(false, 0.0).map_err(|e| e.to_string())?;
                    verify_commuting(&gens, 0.0).map_err(|e| {
                        format!("sl3 N={} trial {} mu={}: {}", n, trial, which, e)
                    })?;
                }
            }
        }
        Ok(())
    };
    report(1, "exact commutativity over Gaussian rationals", run());
}

#[test]
fn criterion_02_affine_semiinvariance() {
    let run = || -> Result<(), String> {
        let mut rng = ChaCha8Rng::seed_from_u64(202);
        let algebra = build_algebra("sl2").map_err(|e| e.to_string())?;
        let space = TensorSpace::sl2(algebra, &[1, 1, 2]).map_err(|e| e.to_string())?;
        for trial in 0..3 {
            let a = loop {
                let c = rat(rng.gen_range(-9i64..10), rng.gen_range(1i64..8));
                if !c.is_zero() {
                    break Gaussian::from_rat(c);
                }
            };
            let b = Gaussian::from_rat(rat(rng.gen_range(-9i64..10), rng.gen_range(1i64..8)));
            let z = gaussian_config(&random_rational_config(&mut rng, 3));
            let moved: Vec<Gaussian> = z
                .iter()
                .map(|zi| a.clone() * zi.clone() + b.clone())
                .collect();
            // homogeneous
            let s1 = GaudinSystem::new(&space, GaudinParams::homogeneous(z.clone()))
                .map_err(|e| e.to_string())?;
            let s2 = GaudinSystem::new(&space, GaudinParams::homogeneous(moved.clone()))
                .map_err(|e| e.to_string())?;
            // twisted: mu rescales by 1/a
            let mu = mu_element(&space.algebra, "h+e+f");
            let mu_scaled: Vec<Gaussian> = mu.iter().map(|c| c.clone() * a.inv()).collect();
            let t1 = GaudinSystem::new(&space, GaudinParams::twisted(z, mu))
                .map_err(|e| e.to_string())?;
            let t2 = GaudinSystem::new(&space, GaudinParams::twisted(moved, mu_scaled))
                .map_err(|e| e.to_string())?;
            for i in 0..3 {
                let lhs = s2.hamiltonian(i).map_err(|e| e.to_string())?;
                let rhs = s1.hamiltonian(i).map_err(|e| e.to_string())?.scale(&a.inv());
                if lhs != rhs {
                    return Err(format!("homogeneous trial {} site {}", trial, i));
                }
                let lhs = t2.hamiltonian(i).map_err(|e| e.to_string())?;
                let rhs = t1.hamiltonian(i).map_err(|e| e.to_string())?.scale(&a.inv());
                if lhs != rhs {
                    return Err(format!("twisted trial {} site {}", trial, i));
                }
            }
        }
        Ok(())
    };
    report(2, "affine semiinvariance (exact)", run());
}

#[test]
fn criterion_03_cyclicity_of_singular_subspace() {
    let run = || -> Result<(), String> {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(303);
        for weights in CATALOG {
            for trial in 0..5 {
                let z = random_rational_config(&mut rng, weights.len());
                let data = singular_spectrum(weights, &z, &tol);
                let sing_dim = data.ctx.dim;
                let mults: usize = sl2_singular_multiplicities(weights)
                    .iter()
                    .map(|&(_, m)| m)
                    .sum();
                if sing_dim != mults {
                    return Err(format!("{:?}: singular dim {} != {}", weights, sing_dim, mults));
                }
                let rep = data.ctx.cyclicity(20, 1000 + trial, 1e-10);
                if !rep.cyclic || rep.target != sing_dim {
                    return Err(format!("{:?} trial {}: not cyclic", weights, trial));
                }
                let hits = rep.achieved.iter().filter(|&&d| d == rep.target).count();
                if hits < 18 {
                    return Err(format!(
                        "{:?} trial {}: only {}/20 seeds reach the maximum",
                        weights, trial, hits
                    ));
                }
            }
        }
        Ok(())
    };
    report(3, "cyclicity of the singular subspace", run());
}

#[test]
fn criterion_04_simple_spectrum_real_parameters() {
    let run = || -> Result<(), String> {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        for weights in CATALOG {
            for trial in 0..5 {
                let z = random_rational_config(&mut rng, weights.len());
                let data = singular_spectrum(weights, &z, &tol);
                let (verdict, gap) = data.spec.simple_spectrum(&tol);
                if verdict != SimpleVerdict::Simple || gap < 1e-8 {
                    return Err(format!(
                        "{:?} trial {}: verdict {:?}, gap {:.3e}",
                        weights, trial, verdict, gap
                    ));
                }
                for (l, m) in &data.gens {
                    let resid = hermitian_check(&m.to_c64(), &data.gram)
                        .map_err(|e| e.to_string())?;
                    let scale = m.to_c64().max_abs().max(1.0);
                    if resid / scale > 1e-12 {
                        return Err(format!(
                            "{:?} trial {}: {} non-Hermitian, {:.3e}",
                            weights, trial, l, resid / scale
                        ));
                    }
                }
            }
        }
        Ok(())
    };
    report(4, "simple joint spectrum, Hermitian generators", run());
}

#[test]
fn criterion_05_eigenvalues_give_monodromy_free_opers() {
    let run = || -> Result<(), String> {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(505);
        for weights in CATALOG {
            let z = random_rational_config(&mut rng, weights.len());
            let data = singular_spectrum(weights, &z, &tol);
            let zc: Vec<C64> = z.iter().map(|r| C64::new(rat_to_f64(r), 0.0)).collect();
            let n = weights.len();
            let form_scale = rat_to_f64(&data.space.algebra.form_scale);
            let pos = |label: GenLabel| {
                data.gens
                    .iter()
                    .position(|(l, _)| *l == label)
                    .expect("generator present")
            };
            for item in &data.spec.items {
                let chi: Vec<C64> = item.tuple.iter().map(|&x| C64::new(x, 0.0)).collect();
                let chi_s1: Vec<C64> =
                    (0..n).map(|i| chi[pos(GenLabel::SiteFirst(i))]).collect();
                let chi_s2: Vec<C64> =
                    (0..n).map(|i| chi[pos(GenLabel::SiteSecond(i))]).collect();
                let oper = oper_from_eigenvalue(&chi_s1, &chi_s2, &zc, weights, form_scale, 1e-8)
                    .map_err(|e| format!("{:?}: {}", weights, e))?;
                if !residue_check(&oper, 1e-9) {
                    return Err(format!("{:?}: residue check failed", weights));
                }
                for i in 0..n {
                    let obs = frobenius_obstruction(&oper, i).map_err(|e| e.to_string())?;
                    if obs.norm() > 1e-10 {
                        return Err(format!(
                            "{:?}: obstruction {:.3e} at point {}",
                            weights,
                            obs.norm(),
                            i + 1
                        ));
                    }
                }
                let rep = monodromy_report(&oper, 1e-8).map_err(|e| e.to_string())?;
                if !rep.verdict {
                    return Err(format!("{:?}: monodromy verdict failed", weights));
                }
            }
        }
        Ok(())
    };
    report(5, "joint eigenvalues induce monodromy-free operators", run());
}

#[test]
fn criterion_06_bijection_counts() {
    let run = || -> Result<(), String> {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(606);
        for (weights, total) in [(vec![1u32, 1], 2usize), (vec![1, 1, 1, 1], 6), (vec![2, 2], 3)] {
            for trial in 0..3 {
                let z = random_rational_config(&mut rng, weights.len());
                let rep = count_bijection(&weights, &z, 42 + trial, &tol)
                    .map_err(|e| e.to_string())?;
                if !rep.search_complete {
                    return Err(format!("{:?} trial {}: root search incomplete", weights, trial));
                }
                if !rep.agree || rep.eigen_total != total || rep.bethe_total != total {
                    return Err(format!(
                        "{:?} trial {}: eigen {} bethe {} expected {}",
                        weights, trial, rep.eigen_total, rep.bethe_total, total
                    ));
                }
                if rep.sectors.iter().any(|s| !s.all_matched) {
                    return Err(format!("{:?} trial {}: unmatched operator", weights, trial));
                }
            }
        }
        Ok(())
    };
    report(6, "per-sector solution counts match joint spectra", run());
}

#[test]
fn criterion_07_oper_space_dimensions() {
    let run = || -> Result<(), String> {
        let algebra = build_algebra("sl2").map_err(|e| e.to_string())?;
        for n in 2..=6usize {
            let regular = oper_space_dimension(&algebra, n, false);
            // independent count: 2N coefficients, one vanishing condition
            // at infinity
            if regular != 2 * n - 1 || regular != 2 * (n - 1) + 1 {
                return Err(format!("regular N={}: got {}", n, regular));
            }
            let irregular = oper_space_dimension(&algebra, n, true);
            // independent count: 2N unconstrained coefficients
            if irregular != 2 * n {
                return Err(format!("irregular N={}: got {}", n, irregular));
            }
        }
        Ok(())
    };
    report(7, "operator-space dimension formulas", run());
}

#[test]
fn criterion_08_inhomogeneous_cyclicity_full_space() {
    let run = || -> Result<(), String> {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(808);
        for weights in [vec![1u32, 1], vec![1, 1, 1]] {
            let algebra = build_algebra("sl2").map_err(|e| e.to_string())?;
            let space = TensorSpace::sl2(algebra, &weights).map_err(|e| e.to_string())?;
            let z = random_rational_config(&mut rng, weights.len());
            let mu = mu_element(&space.algebra, "h");
            let sys = GaudinSystem::new(
                &space,
                GaudinParams::twisted(gaussian_config(&z), mu),
            )
            .map_err(|e| e.to_string())?;
            let gens = sys.generator_set(true, 0.0).map_err(|e| e.to_string())?;
            let ops: Vec<(String, SparseMat<C64>)> = gens
                .iter()
                .map(|(l, m)| (l.to_string(), m.to_c64()))
                .collect();
            let gram: Vec<f64> = space.gram_diag().iter().map(rat_to_f64).collect();
            let ctx = SpectralContext::new(&ops, &gram, &[], &tol).map_err(|e| e.to_string())?;
            if ctx.dim != space.dim {
                return Err("context does not cover the full space".into());
            }
            let rep = ctx.cyclicity(20, 7, 1e-10);
            if !rep.cyclic {
                return Err(format!("{:?}: full space not cyclic", weights));
            }
            let spec = ctx.joint_spectrum(&tol).map_err(|e| e.to_string())?;
            let (verdict, gap) = spec.simple_spectrum(&tol);
            if verdict != SimpleVerdict::Simple || gap < 1e-8 {
                return Err(format!("{:?}: verdict {:?} gap {:.3e}", weights, verdict, gap));
            }
        }
        Ok(())
    };
    report(8, "twisted family: full space cyclic with simple spectrum", run());
}

#[test]
fn criterion_09_degeneration_and_filtration() {
    let run = || -> Result<(), String> {
        let algebra = build_algebra("sl2").map_err(|e| e.to_string())?;
        let space = TensorSpace::sl2(algebra, &[1, 1, 2]).map_err(|e| e.to_string())?;
        let z = gaussian_config(&[rat_int(0), rat_int(1), rat(5, 2)]);
        let s = Gaussian::from_rat(rat(1, 7));
        let f = mu_element(&space.algebra, "f");
        let sf: Vec<Gaussian> = f.iter().map(|c| c.clone() * s.clone()).collect();
        let plain = GaudinSystem::new(&space, GaudinParams::homogeneous(z.clone()))
            .map_err(|e| e.to_string())?;
        let twisted = GaudinSystem::new(&space, GaudinParams::twisted(z.clone(), sf))
            .map_err(|e| e.to_string())?;
        let f_twisted = GaudinSystem::new(&space, GaudinParams::twisted(z, f.clone()))
            .map_err(|e| e.to_string())?;
        let if_ = space.algebra.basis_index("f").unwrap();
        for i in 0..3 {
            // s^{-1}(H_i^{sf} - H_i) = f^{(i)} exactly
            let lhs = twisted
                .hamiltonian(i)
                .map_err(|e| e.to_string())?
                .sub(&plain.hamiltonian(i).map_err(|e| e.to_string())?)
                .scale(&s.inv());
            let rhs = space.embed_basis(if_, i).map_err(|e| e.to_string())?;
            if lhs != rhs {
                return Err(format!("site {}: rescaled difference is not f", i + 1));
            }
            // filtration degrees of the f-twisted Hamiltonian
            let hf = f_twisted.hamiltonian(i).map_err(|e| e.to_string())?;
            let (lo, hi, leading) = filtration_degree(&hf, &space).map_err(|e| e.to_string())?;
            if (lo, hi) != (-1, 0) {
                return Err(format!("site {}: degrees ({}, {})", i + 1, lo, hi));
            }
            if leading != plain.hamiltonian(i).map_err(|e| e.to_string())? {
                return Err(format!("site {}: leading term is not the untwisted H", i + 1));
            }
        }
        // collision convergence, three points
        let tree = OperadTree::Internal {
            children: vec![
                OperadTree::Internal {
                    children: vec![OperadTree::Leaf(0), OperadTree::Leaf(1)],
                    coords: vec![rat_int(0), rat_int(1)],
                },
                OperadTree::Leaf(2),
            ],
            coords: vec![rat_int(0), rat_int(1)],
        };
        let space3 = TensorSpace::sl2(build_algebra("sl2").unwrap(), &[1, 1, 1])
            .map_err(|e| e.to_string())?;
        let rep = collision_limit_check(&tree, &space3, rat(1, 10000))
            .map_err(|e| e.to_string())?;
        if rep.max_deviation > 1e-6 {
            return Err(format!("collision deviation {:.3e}", rep.max_deviation));
        }
        for t in &rep.targets {
            if t.deviation_s > 1e-12 && t.ratio > 0.6 {
                return Err(format!("convergence ratio {:.3} at {}", t.ratio, t.vertex));
            }
        }
        if !rep.flat {
            return Err(format!("degree-2 span ranks vary: {:?}", rep.pbw_ranks));
        }
        Ok(())
    };
    report(9, "degeneration identities and collision convergence", run());
}

#[test]
fn criterion_10_limit_algebras() {
    let run = || -> Result<(), String> {
        let tol = Tolerances::default();
        let pair = |a: usize, b: usize| OperadTree::Internal {
            children: vec![OperadTree::Leaf(a), OperadTree::Leaf(b)],
            coords: vec![rat_int(0), rat_int(1)],
        };
        // N=3: all three labeled collision shapes
        let mut catalog: Vec<(usize, OperadTree)> = Vec::new();
        for (a, b) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let rest = 3 - a - b;
            catalog.push((
                3,
                OperadTree::Internal {
                    children: vec![pair(a, b), OperadTree::Leaf(rest)],
                    coords: vec![rat_int(0), rat_int(1)],
                },
            ));
        }
        // N=4: one pair; two pairs; a flat triple; a nested triple
        catalog.push((
            4,
            OperadTree::Internal {
                children: vec![pair(0, 1), OperadTree::Leaf(2), OperadTree::Leaf(3)],
                coords: vec![rat_int(0), rat_int(1), rat_int(3)],
            },
        ));
        catalog.push((
            4,
            OperadTree::Internal {
                children: vec![pair(1, 2), OperadTree::Leaf(0), OperadTree::Leaf(3)],
                coords: vec![rat_int(0), rat_int(1), rat_int(3)],
            },
        ));
        catalog.push((
            4,
            OperadTree::Internal {
                children: vec![pair(0, 1), pair(2, 3)],
                coords: vec![rat_int(0), rat_int(1)],
            },
        ));
        catalog.push((
            4,
            OperadTree::Internal {
                children: vec![pair(0, 3), pair(1, 2)],
                coords: vec![rat_int(0), rat_int(1)],
            },
        ));
        catalog.push((
            4,
            OperadTree::Internal {
                children: vec![
                    OperadTree::Internal {
                        children: vec![
                            OperadTree::Leaf(0),
                            OperadTree::Leaf(1),
                            OperadTree::Leaf(2),
                        ],
                        coords: vec![rat_int(0), rat(1, 3), rat_int(1)],
                    },
                    OperadTree::Leaf(3),
                ],
                coords: vec![rat_int(0), rat_int(1)],
            },
        ));
        catalog.push((
            4,
            OperadTree::Internal {
                children: vec![
                    OperadTree::Internal {
                        children: vec![pair(1, 2), OperadTree::Leaf(0)],
                        coords: vec![rat_int(0), rat_int(1)],
                    },
                    OperadTree::Leaf(3),
                ],
                coords: vec![rat_int(0), rat_int(1)],
            },
        ));
        for (idx, (n, tree)) in catalog.iter().enumerate() {
            let weights = vec![1u32; *n];
            let space = TensorSpace::sl2(build_algebra("sl2").unwrap(), &weights)
                .map_err(|e| e.to_string())?;
            // limit_algebra verifies exact commutativity internally
            let rep = limit_spectrum_suite(tree, &space, 17, &tol)
                .map_err(|e| format!("tree {}: {}", idx, e))?;
            let expected: usize = sl2_singular_multiplicities(&weights)
                .iter()
                .map(|&(_, m)| m)
                .sum();
            if rep.dim != expected {
                return Err(format!("tree {}: dim {} != {}", idx, rep.dim, expected));
            }
            if !rep.cyclic {
                return Err(format!("tree {}: not cyclic", idx));
            }
            if !rep.simple || rep.min_gap < 1e-8 {
                return Err(format!("tree {}: gap {:.3e}", idx, rep.min_gap));
            }
        }
        Ok(())
    };
    report(10, "limit families: commutative, cyclic, simple", run());
}

#[test]
fn criterion_11_covering_monodromy() {
    let run = || -> Result<(), String> {
        let identity = |n: usize| (0..n).collect::<Vec<_>>();
        // N=3 circle
        let space3 = TensorSpace::sl2(build_algebra("sl2").unwrap(), &[1, 1, 1])
            .map_err(|e| e.to_string())?;
        let circle = n3_circle_loop(1e-3);
        let r1 = track_eigenlines(&circle, &space3, 0.9).map_err(|e| e.to_string())?;
        let mut fine = circle.clone();
        fine.max_step /= 2.0;
        let r2 = track_eigenlines(&fine, &space3, 0.9).map_err(|e| e.to_string())?;
        if r1.perm != r2.perm {
            return Err("circle permutation changes under step halving".into());
        }
        let doubled = concat(&circle, &circle).map_err(|e| e.to_string())?;
        let rd = track_eigenlines(&doubled, &space3, 0.9).map_err(|e| e.to_string())?;
        if rd.perm != compose_perm(&r1.perm, &r1.perm) {
            return Err("circle permutations do not compose".into());
        }
        if rd.perm != identity(3) {
            return Err("doubled circle is not the identity".into());
        }
        // composition with a contractible loop
        let trivial = trivial_loop(vec![0.0, 0.5, 1.0], vec![-0.2, 0.45, 1.2]);
        let rt = track_eigenlines(&trivial, &space3, 0.9).map_err(|e| e.to_string())?;
        if rt.perm != identity(3) {
            return Err("contractible loop is not the identity".into());
        }
        let cat = concat(&trivial, &circle).map_err(|e| e.to_string())?;
        let rc = track_eigenlines(&cat, &space3, 0.9).map_err(|e| e.to_string())?;
        if rc.perm != compose_perm(&r1.perm, &rt.perm) {
            return Err("concatenation does not compose".into());
        }
        // N=4 swap loop: involution, identical under step halving
        let space4 = TensorSpace::sl2(build_algebra("sl2").unwrap(), &[1, 1, 1, 1])
            .map_err(|e| e.to_string())?;
        let base = vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        let gamma = swap_loop(base, 1, 2, 1e-3);
        let g1 = track_eigenlines(&gamma, &space4, 0.9).map_err(|e| e.to_string())?;
        let mut gfine = gamma.clone();
        gfine.max_step /= 2.0;
        let g2 = track_eigenlines(&gfine, &space4, 0.9).map_err(|e| e.to_string())?;
        if g1.perm != g2.perm {
            return Err("swap permutation changes under step halving".into());
        }
        let gd = concat(&gamma, &gamma.relabeled(&gamma.closing_relabel))
            .map_err(|e| e.to_string())?;
        let gdr = track_eigenlines(&gd, &space4, 0.9).map_err(|e| e.to_string())?;
        if gdr.perm != identity(6) {
            return Err("doubled swap loop is not the identity".into());
        }
        Ok(())
    };
    report(11, "covering monodromy: stable, composable, involutive", run());
}
