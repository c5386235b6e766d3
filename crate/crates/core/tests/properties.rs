mod common;

use proptest::prelude::*;

use uhlmann::algebra::OperatorAlgebra;
use uhlmann::duality::{build_intertwiner, check_haag_duality, max_overlap};
use uhlmann::numerics::{
    commutation_nullspace, commutator, hs_inner, hs_orthonormalize, identity, polar_decompose, svd, trace_norm,
    unitarity_defect,
};
use uhlmann::random::{
    ginibre, random_abelian_subalgebra, random_algebra, random_algebra_with_shape, random_block_shape, random_density,
    random_density_with_rank, random_unitary, random_unitary_in, random_vector, sample_rng, SampleRng,
};
use uhlmann::states::{fidelity, gns_construct, AlgebraFunctional, DensityMatrix, VectorState};
use uhlmann::toric::anyons::{ground_state, LogicalSector};
use uhlmann::toric::{Lattice, PauliOperator};
use uhlmann::{CMatrix, C64};

use common::tol;

fn rng(seed: u64) -> SampleRng {
    sample_rng(seed, 0)
}

fn low_rank(rows: usize, cols: usize, rank: usize, rng: &mut SampleRng) -> CMatrix {
    ginibre(rows, rank, rng) * ginibre(rank, cols, rng)
}

fn sorted(mut shape: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    shape.sort_unstable();
    shape
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn svd_reconstructs_rank_deficient_input(seed in any::<u64>(), rows in 1usize..9, cols in 1usize..9, rank in 1usize..4) {
        let mut r = rng(seed);
        let k = low_rank(rows, cols, rank.min(rows).min(cols), &mut r);
        let s = svd(&k).unwrap();
        let mut sigma = CMatrix::zeros(rows, cols);
        for (i, &v) in s.singular_values.iter().enumerate() {
            sigma[(i, i)] = C64::new(v, 0.0);
        }
        prop_assert!((&s.u * sigma * s.v.adjoint() - &k).norm() <= 1e-12 * k.norm().max(1.0));
        prop_assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn trace_norm_is_unitarily_invariant(seed in any::<u64>(), n in 1usize..7) {
        let mut r = rng(seed);
        let x = ginibre(n, n, &mut r);
        let (u, v) = (random_unitary(n, &mut r), random_unitary(n, &mut r));
        let before = trace_norm(&x).unwrap();
        let after = trace_norm(&(&u * &x * &v)).unwrap();
        prop_assert!((before - after).abs() <= 1e-10 * before.max(1.0));
    }

    #[test]
    fn polar_factors_reconstruct(seed in any::<u64>(), n in 1usize..7, rank in 1usize..7) {
        let mut r = rng(seed);
        let x = low_rank(n, n, rank.min(n), &mut r);
        let p = polar_decompose(&x).unwrap();
        prop_assert!((&p.unitary * &p.positive - &x).norm() <= 1e-10 * x.norm().max(1.0));
        prop_assert!(unitarity_defect(&p.unitary) <= 1e-10);
        prop_assert!((&p.positive - p.positive.adjoint()).norm() <= 1e-10 * x.norm().max(1.0));
    }

    #[test]
    fn orthonormalized_family_has_identity_gram(seed in any::<u64>(), n in 1usize..5, count in 1usize..12) {
        let mut r = rng(seed);
        let ops: Vec<CMatrix> = (0..count).map(|_| ginibre(n, n, &mut r)).collect();
        let basis = hs_orthonormalize(&ops, tol().rank_tol).unwrap();
        prop_assert_eq!(basis.len(), count.min(n * n));
        for (i, x) in basis.iter().enumerate() {
            for (j, y) in basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((hs_inner(x, y) - C64::new(want, 0.0)).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn nullspace_commutes_with_inputs(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let alg = random_algebra(n, &mut r, &tol()).unwrap();
        let kernel = commutation_nullspace(alg.basis(), n, tol().rank_tol).unwrap();
        for x in &kernel {
            for e in alg.basis() {
                prop_assert!(commutator(x, e).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn commutant_of_join_is_intersection_of_commutants(seed in any::<u64>(), n in 2usize..6) {
        let t = tol();
        let mut r = rng(seed);
        let m = random_algebra(n, &mut r, &t).unwrap();
        let other = random_algebra(n, &mut r, &t).unwrap();
        let lhs = m.join(&other, &t).unwrap().commutant(&t).unwrap();
        let rhs = m.commutant(&t).unwrap().intersection(&other.commutant(&t).unwrap(), &t).unwrap();
        prop_assert!(lhs.equals_algebra(&rhs, &t).unwrap());
    }

    #[test]
    fn block_dimensions_match_shape(seed in any::<u64>(), n in 2usize..8) {
        let t = tol();
        let mut r = rng(seed);
        let shape = random_block_shape(n, &mut r);
        let alg = random_algebra_with_shape(&shape, &mut r, &t).unwrap();
        let blocks = alg.block_decompose(&t).unwrap();
        prop_assert_eq!(sorted(blocks.shape()), sorted(shape.clone()));
        prop_assert_eq!(alg.dim(), shape.iter().map(|(s, _)| s * s).sum::<usize>());
        let comm = alg.commutant(&t).unwrap();
        prop_assert_eq!(comm.dim(), shape.iter().map(|(_, m)| m * m).sum::<usize>());
        prop_assert_eq!(alg.is_factor(&t).unwrap(), blocks.num_blocks() == 1);
    }

    #[test]
    fn conditional_expectation_is_self_adjoint_projection(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let alg = random_algebra(n, &mut r, &tol()).unwrap();
        let (x, y) = (ginibre(n, n, &mut r), ginibre(n, n, &mut r));
        let ex = alg.conditional_expectation(&x).unwrap();
        prop_assert!((alg.conditional_expectation(&ex).unwrap() - &ex).norm() <= 1e-10 * x.norm());
        let ey = alg.conditional_expectation(&y).unwrap();
        prop_assert!((hs_inner(&ex, &y) - hs_inner(&x, &ey)).norm() <= 1e-10 * x.norm() * y.norm());
        let ex_star = alg.conditional_expectation(&x.adjoint()).unwrap();
        prop_assert!((ex_star - ex.adjoint()).norm() <= 1e-10 * x.norm());
        prop_assert!((alg.conditional_expectation(&identity(n)).unwrap() - identity(n)).norm() <= 1e-10);
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(seed in any::<u64>(), n in 1usize..6, rank in 1usize..6) {
        let t = tol();
        let mut r = rng(seed);
        let rho = DensityMatrix::new(random_density(n, &mut r), &t).unwrap();
        let sigma = DensityMatrix::new(random_density_with_rank(n, rank.min(n), &mut r), &t).unwrap();
        let f = fidelity(&rho, &sigma, &t).unwrap();
        prop_assert!((f - fidelity(&sigma, &rho, &t).unwrap()).abs() <= 1e-10);
        prop_assert!((-1e-12..=1.0 + 1e-10).contains(&f));
        prop_assert!((fidelity(&rho, &rho, &t).unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn gns_reproduces_state_and_products(seed in any::<u64>(), n in 2usize..6) {
        let t = tol();
        let mut r = rng(seed);
        let alg = random_algebra(n, &mut r, &t).unwrap();
        let rho = random_density(n, &mut r);
        let omega = AlgebraFunctional::from_density(&alg, &rho).unwrap();
        let gns = gns_construct(&alg, &omega, &t).unwrap();
        let o = gns.cyclic_vector.amplitudes();
        for (i, e) in alg.basis().iter().enumerate() {
            let pe = &gns.rep_matrices[i];
            prop_assert!((o.dotc(&(pe * o)) - omega.evaluate(e)).norm() <= 1e-9);
            for (j, f) in alg.basis().iter().enumerate() {
                let lhs = gns.represent(&alg, &(e * f));
                prop_assert!((lhs - pe * &gns.rep_matrices[j]).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn max_overlap_is_monotone_in_the_algebra(seed in any::<u64>(), n in 2usize..7) {
        let t = tol();
        let mut r = rng(seed);
        let a = random_algebra(n, &mut r, &t).unwrap();
        let big = a.commutant(&t).unwrap();
        let small = random_abelian_subalgebra(&big, &mut r, &t).unwrap();
        let psi = VectorState::normalized(random_vector(n, &mut r)).unwrap();
        let phi = psi.evolve(&random_unitary_in(&big, &mut r)).unwrap();
        let hi = max_overlap(&big, &psi, &phi, &t).unwrap().value;
        let lo = max_overlap(&small, &psi, &phi, &t).unwrap().value;
        prop_assert!(lo <= hi + 1e-10);
        prop_assert!((hi - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn full_algebra_reaches_unit_overlap(seed in any::<u64>(), n in 1usize..7) {
        let t = tol();
        let mut r = rng(seed);
        let psi = VectorState::normalized(random_vector(n, &mut r)).unwrap();
        let phi = VectorState::normalized(random_vector(n, &mut r)).unwrap();
        let value = max_overlap(&OperatorAlgebra::full(n), &psi, &phi, &t).unwrap().value;
        prop_assert!((value - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn intertwiner_is_a_partial_isometry(seed in any::<u64>(), n in 2usize..8) {
        let t = tol();
        let mut r = rng(seed);
        let a = random_algebra(n, &mut r, &t).unwrap();
        let comm = a.commutant(&t).unwrap();
        let psi = VectorState::normalized(random_vector(n, &mut r)).unwrap();
        let phi = psi.evolve(&random_unitary_in(&comm, &mut r)).unwrap();
        let iso = build_intertwiner(&a, &psi, &phi, Some(&comm), &t).unwrap();
        prop_assert!(iso.initial_projection_defect <= 1e-8);
        prop_assert!(iso.final_projection_defect <= 1e-8);
        prop_assert!(iso.state_residual <= 1e-8);
        prop_assert!(iso.in_mb.unwrap().pass);
    }

    #[test]
    fn haag_duality_is_symmetric(seed in any::<u64>(), n in 2usize..7, dual in any::<bool>()) {
        let t = tol();
        let mut r = rng(seed);
        let a = random_algebra(n, &mut r, &t).unwrap();
        let comm = a.commutant(&t).unwrap();
        let b = if dual { comm } else { random_abelian_subalgebra(&comm, &mut r, &t).unwrap() };
        prop_assert_eq!(check_haag_duality(&a, &b, &t).unwrap().pass, check_haag_duality(&b, &a, &t).unwrap().pass);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn stabilizer_generators_commute(l in 2usize..7) {
        let lattice = Lattice::new(l).unwrap();
        let gens: Vec<PauliOperator> = lattice.stars().into_iter().chain(lattice.plaquettes()).collect();
        for p in &gens {
            for q in &gens {
                prop_assert!(p.commutes_with(q));
            }
        }
    }

    #[test]
    fn signature_ignores_paulis_outside_region(
        l in 2usize..6,
        region_bits in proptest::collection::vec(any::<bool>(), 72),
        x_bits in proptest::collection::vec(any::<bool>(), 72),
        z_bits in proptest::collection::vec(any::<bool>(), 72),
    ) {
        let lattice = Lattice::new(l).unwrap();
        let q = lattice.num_qubits();
        let region = &region_bits[..q];
        let outside = |bits: &[bool]| -> Vec<bool> { (0..q).map(|i| bits[i] && !region[i]).collect() };
        let p = PauliOperator::hermitian_from_bits(q, &outside(&x_bits), &outside(&z_bits));
        let ground = ground_state(&lattice, LogicalSector::default()).unwrap();
        prop_assert_eq!(ground.signature(region), ground.apply(&p).signature(region));
    }
}
