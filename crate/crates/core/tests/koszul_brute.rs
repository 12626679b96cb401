mod common;

use common::{koszul_mismatches, SMALL_KNOTS};

#[test]
fn vertex_homology_matches_brute_force_on_fully_singular_resolutions() {
    let (compared, bad) = koszul_mismatches(&SMALL_KNOTS, 5);
    assert!(bad.is_empty(), "{bad:#?}");
    assert!(compared >= SMALL_KNOTS.len());
}
