//! Randomized identities: exact covariance of the Hamiltonians under
//! affine changes of the marked points, exact commutativity at random
//! rational data, and symmetry of the Bethe-side constructions under
//! root permutations.

use gaudin_core::gaudin::{verify_commuting, GaudinParams, GaudinSystem};
use gaudin_core::lie::{build_algebra, TensorSpace};
use gaudin_core::oper::{bethe_residual, miura_pole_coefficients, BetheConfig};
use gaudin_core::scalar::{rat, Gaussian, C64};
use num_traits::Zero;
use proptest::prelude::*;

fn small_rat() -> impl Strategy<Value = gaudin_core::Rat> {
    (-9i64..10, 1i64..8).prop_map(|(p, q)| rat(p, q))
}

fn small_gaussian() -> impl Strategy<Value = Gaussian> {
    (small_rat(), small_rat()).prop_map(|(re, im)| Gaussian::new(re, im))
}

fn distinct_z(n: usize) -> impl Strategy<Value = Vec<Gaussian>> {
    proptest::collection::vec(small_gaussian(), n).prop_filter("distinct points", |z| {
        (0..z.len()).all(|i| (i + 1..z.len()).all(|j| z[i] != z[j]))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn affine_covariance((a, b) in (small_gaussian(), small_gaussian()), z in distinct_z(3)) {
        prop_assume!(!a.is_zero());
        let g = build_algebra("sl2").unwrap();
        let t = TensorSpace::sl2(g, &[1, 1, 2]).unwrap();
        let moved: Vec<Gaussian> = z.iter().map(|zi| a.clone() * zi.clone() + b.clone()).collect();
        prop_assume!((0..3).all(|i| (i + 1..3).all(|j| moved[i] != moved[j])));
        let sys1 = GaudinSystem::new(&t, GaudinParams::homogeneous(z)).unwrap();
        let sys2 = GaudinSystem::new(&t, GaudinParams::homogeneous(moved)).unwrap();
        for i in 0..3 {
            // H_i(a z + b) = a^{-1} H_i(z), exactly
            prop_assert_eq!(
                sys2.hamiltonian(i).unwrap(),
                sys1.hamiltonian(i).unwrap().scale(&a.inv())
            );
        }
    }

    #[test]
    fn twisted_affine_covariance(
        (a, b) in (small_gaussian(), small_gaussian()),
        z in distinct_z(2),
        (ch, cf) in (small_rat(), small_rat()),
    ) {
        prop_assume!(!a.is_zero());
        let g = build_algebra("sl2").unwrap();
        let t = TensorSpace::sl2(g, &[1, 2]).unwrap();
        let moved: Vec<Gaussian> = z.iter().map(|zi| a.clone() * zi.clone() + b.clone()).collect();
        prop_assume!(moved[0] != moved[1]);
        let ih = t.algebra.basis_index("h").unwrap();
        let fi = t.algebra.basis_index("f").unwrap();
        let mut mu = vec![Gaussian::zero(); 3];
        mu[ih] = Gaussian::from_rat(ch);
        mu[fi] = Gaussian::from_rat(cf);
        let mu_scaled: Vec<Gaussian> = mu.iter().map(|c| c.clone() * a.inv()).collect();
        let sys1 = GaudinSystem::new(&t, GaudinParams::twisted(z, mu)).unwrap();
        let sys2 = GaudinSystem::new(&t, GaudinParams::twisted(moved, mu_scaled)).unwrap();
        for i in 0..2 {
            // H_i^{mu/a}(a z + b) = a^{-1} H_i^mu(z), exactly
            prop_assert_eq!(
                sys2.hamiltonian(i).unwrap(),
                sys1.hamiltonian(i).unwrap().scale(&a.inv())
            );
        }
    }

    #[test]
    fn random_rational_family_commutes(z in distinct_z(3), ch in small_rat()) {
        let g = build_algebra("sl2").unwrap();
        let t = TensorSpace::sl2(g, &[1, 1, 1]).unwrap();
        let ih = t.algebra.basis_index("h").unwrap();
        let mut mu = vec![Gaussian::zero(); 3];
        mu[ih] = Gaussian::from_rat(ch);
        let sys = GaudinSystem::new(&t, GaudinParams::twisted(z, mu)).unwrap();
        let gens = sys.generator_set(true, 0.0).unwrap();
        prop_assert!(verify_commuting(&gens, 0.0).is_ok());
    }

    #[test]
    fn bethe_data_is_symmetric_in_roots(
        seed in proptest::array::uniform6(-40i32..40),
        swap in (0usize..3, 0usize..3),
    ) {
        let z = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let lambda = vec![2u32, 2];
        let roots: Vec<C64> = (0..3)
            .map(|j| C64::new(seed[j] as f64 / 8.0 + 0.31, seed[j + 3] as f64 / 8.0))
            .collect();
        prop_assume!((0..3).all(|i| (i + 1..3).all(|j| (roots[i] - roots[j]).norm() > 1e-6)));
        prop_assume!(roots.iter().all(|w| z.iter().all(|zi| (w - zi).norm() > 1e-6)));
        let mut permuted = roots.clone();
        permuted.swap(swap.0, swap.1);
        let c1 = BetheConfig { roots: roots.clone() };
        let c2 = BetheConfig { roots: permuted.clone() };
        // canonical ordering makes a permutation invisible
        prop_assert!(c1.distance(&c2) < 1e-14);
        // residuals and pole coefficients follow the roots
        let r1 = bethe_residual(&c1, &z, &lambda).unwrap();
        let r2 = bethe_residual(&c2, &z, &lambda).unwrap();
        let p1 = miura_pole_coefficients(&c1, &z, &lambda).unwrap();
        for j in 0..3 {
            let pos = permuted.iter().position(|w| (w - roots[j]).norm() == 0.0).unwrap();
            prop_assert!((r1[j] - r2[pos]).norm() < 1e-12);
            prop_assert!((p1[j] + r1[j]).norm() == 0.0);
        }
    }
}
