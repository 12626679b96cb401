mod common;

use common::naive_rank;
use floer_cube::gf2::{homology_dims, kernel, rank_f2, GradedMatrix, Monomial, PolyF2};
use proptest::prelude::*;

fn matrix(max: usize) -> impl Strategy<Value = Vec<Vec<u8>>> {
    (0..=max, 1..=max).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(0u8..2, c), r))
}

fn poly(nvars: usize) -> impl Strategy<Value = PolyF2> {
    prop::collection::vec(prop::collection::vec(0u16..3, nvars), 0..5)
        .prop_map(move |ms| PolyF2::from_monomials(nvars, ms.into_iter().map(Monomial)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rank_matches_dense_elimination(rows in matrix(64)) {
        let ncols = rows.first().map_or(1, |r| r.len());
        let m = if rows.is_empty() { GradedMatrix::zeros(0, ncols) } else { GradedMatrix::from_dense(&rows) };
        prop_assert_eq!(rank_f2(&m), naive_rank(&rows));
        prop_assert_eq!(kernel(&m).len(), m.nrows() - naive_rank(&rows));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn homology_of_a_square_zero_pair(rows in matrix(24)) {
        // d_in = M, d_out = 0: homology is the cokernel of M
        if !rows.is_empty() {
            let m = GradedMatrix::from_dense(&rows);
            let zero = GradedMatrix::zeros(m.ncols(), 0);
            prop_assert_eq!(homology_dims(&m, &zero).unwrap(), m.ncols() - naive_rank(&rows));
        }
    }

    #[test]
    fn polynomial_ring_axioms(a in poly(3), b in poly(3), c in poly(3)) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.add(&a).is_zero());
        // Frobenius in characteristic two
        prop_assert_eq!(a.add(&b).pow(2), a.pow(2).add(&b.pow(2)));
    }

    #[test]
    fn exact_division_inverts_multiplication(a in poly(3), b in poly(3)) {
        if !b.is_zero() {
            prop_assert_eq!(a.mul(&b).div_exact(&b).unwrap(), a);
        }
    }
}
