//! Quotient-side checks on the second fixture plus the symmetry suite at
//! full strength: action law, locus preservation, and coordinate
//! invariance.

use dgquot_core::dgla::{Elt, StretchAlgebra};
use dgquot_core::graded::{
    build_free_module, build_polynomial_ring, generated_submodule, HilbertData,
};
use dgquot_core::matrix::SparseMat;
use dgquot_core::quot::{
    act, enumerate_chains, find_b, invariant_coordinates, propagation_check,
    quotient_comparison, rank_locus_predicates, GroupElement,
};
use dgquot_core::scalar::{Field, PrimeField, Rationals};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn algebra_i2_f2(t: i64) -> StretchAlgebra<PrimeField> {
    let f = PrimeField::new(2);
    let ring = build_polynomial_ring(f.clone(), 3, t);
    let module = build_free_module(&ring, 1, 1, t);
    let values = (1..=t).map(|s| module.dim(s) - 1).collect();
    let h = HilbertData::new(1, values, &module).unwrap();
    StretchAlgebra::build(ring, module, h, 1, t).unwrap()
}

fn algebra_i1<F: Field>(field: F, t: i64) -> StretchAlgebra<F> {
    let ring = build_polynomial_ring(field, 2, t);
    let module = build_free_module(&ring, 1, 1, t);
    let h = HilbertData::new(1, (1..=t).map(|s| s as usize).collect(), &module).unwrap();
    StretchAlgebra::build(ring, module, h, 1, t).unwrap()
}

/// The point ideal (y, z): the classical point of the second fixture.
fn yz_ideal_point(alg: &StretchAlgebra<PrimeField>) -> Elt<PrimeField> {
    let f = alg.field();
    let n = alg.module().dim(1);
    let mut cols = Vec::new();
    for gen in [1usize, 2] {
        let mut col = vec![f.zero(); n];
        col[gen] = f.one();
        cols.push(col);
    }
    let seed = SparseMat::from_cols(f.clone(), n, &cols);
    let (dims, sub) = generated_submodule(&seed, alg.ring(), alg.module(), 1, alg.window().1);
    assert_eq!(dims, alg.h().values());
    alg.classical_point(&sub).unwrap()
}

fn x_ideal_point<F: Field>(alg: &StretchAlgebra<F>) -> Elt<F> {
    let f = alg.field();
    let n = alg.module().dim(1);
    let mut col = vec![f.zero(); n];
    col[0] = f.one();
    let seed = SparseMat::from_cols(f.clone(), n, &[col]);
    let (dims, sub) = generated_submodule(&seed, alg.ring(), alg.module(), 1, alg.window().1);
    assert_eq!(dims, alg.h().values());
    alg.classical_point(&sub).unwrap()
}

#[test]
fn find_b_returns_one_on_the_second_fixture() {
    let f = PrimeField::new(2);
    let ring = build_polynomial_ring(f.clone(), 3, 3);
    let module = build_free_module(&ring, 1, 1, 3);
    let h = HilbertData::new(1, vec![2, 5, 9], &module).unwrap();
    let search = find_b(&ring, &module, &h, 3);
    assert_eq!(search.b, Some(1));
    assert_eq!(search.witness_seeds.len(), 7);
    assert_eq!(search.trials, vec![(1, 7, 7)]);
}

#[test]
fn quotient_comparison_counts_p2_points() {
    let alg = algebra_i2_f2(3);
    let report = quotient_comparison(&alg, 1);
    assert_eq!(report.chain_points, 7);
    assert_eq!(report.v_count, 7);
    assert_eq!(report.x_count, 7);
    assert_eq!(report.geometric_count, 7);
    assert!(report.v_implies_x);
    assert!(report.x_implies_geometric);
    assert!(report.rank_bounds);
}

#[test]
fn right_action_law_on_twenty_pairs() {
    let f = PrimeField::new(5);
    let alg = algebra_i1(f.clone(), 3);
    let gamma = x_ideal_point(&alg);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let g1 = GroupElement::random(&f, alg.h(), 1, 3, 1, &mut rng);
        let g2 = GroupElement::random(&f, alg.h(), 1, 3, 1, &mut rng);
        let lhs = act(&alg, &g2, &act(&alg, &g1, &gamma));
        let rhs = act(&alg, &g1.compose(&g2), &gamma);
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn action_preserves_mc_and_loci_on_the_second_fixture() {
    let alg = algebra_i2_f2(3);
    let gamma = yz_ideal_point(&alg);
    let f = alg.field().clone();
    let before = rank_locus_predicates(&alg, &gamma, 1);
    assert!(before.in_m && before.in_v && before.in_x);
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..10 {
        let g = GroupElement::random(&f, alg.h(), 1, 3, 1, &mut rng);
        let moved = act(&alg, &g, &gamma);
        assert!(alg.mc_residual(&moved).coeffs.is_empty());
        assert_eq!(rank_locus_predicates(&alg, &moved, 1), before);
    }
}

#[test]
fn coordinates_survive_a_hundred_gauge_twists() {
    let alg = algebra_i1(Rationals, 3);
    let gamma = x_ideal_point(&alg);
    let reference = invariant_coordinates(&alg, &gamma, 1).unwrap();
    let fmt = |m: &SparseMat<Rationals>| -> Vec<(usize, usize, String)> {
        m.entries()
            .map(|(r, c, v)| (r, c, Rationals.format(v)))
            .collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for round in 0..100 {
        let g = GroupElement::random(&Rationals, alg.h(), 1, 3, 2, &mut rng);
        let moved = act(&alg, &g, &gamma);
        let coords = invariant_coordinates(&alg, &moved, 1).unwrap();
        assert_eq!(coords.coords.len(), reference.coords.len());
        for (key, m) in &reference.coords {
            assert_eq!(
                fmt(m),
                fmt(coords.coords.get(key).unwrap()),
                "round {round}, coordinate {key:?}"
            );
        }
    }
}

#[test]
fn propagation_on_the_second_fixture_finds_no_counterexamples() {
    let alg = algebra_i2_f2(2);
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let report = propagation_check(&alg, 1, 100, 500, &mut rng);
    assert_eq!(report.enumerated_points, 7);
    assert_eq!(report.gauge_twists, 100);
    assert_eq!(report.samples, 500);
    assert!(report.counterexamples.is_empty());
}

#[test]
fn chains_respect_forced_extensions() {
    // Each seed line of the first fixture forces the rest of the chain.
    let f = PrimeField::new(2);
    let ring = build_polynomial_ring(f.clone(), 2, 4);
    let module = build_free_module(&ring, 1, 1, 4);
    let h = HilbertData::new(1, vec![1, 2, 3, 4], &module).unwrap();
    let chains = enumerate_chains(&ring, &module, &h, 1, 4);
    assert_eq!(chains.len(), 3);
    for c in &chains {
        assert_eq!(c.dims(), vec![1, 2, 3, 4]);
        assert!(c.check_closed(&ring, &module).is_ok());
    }
}
