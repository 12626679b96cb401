mod common;

use common::{hecke_homfly, reduced_dims_from_les, thin_rank};
use floer_cube::braid::{close_braid, parse_braid};
use floer_cube::export::PageExport;
use floer_cube::spectral::{
    compute_e1, compute_e2, euler_characteristic, expected_euler, truncate_q, u_module_structure, Stage, Variant,
};

fn diagram(w: &str, b: usize) -> floer_cube::braid::ClosedDiagram {
    close_braid(&parse_braid(w, b).unwrap())
}

#[test]
fn reduced_cone_agrees_with_long_exact_sequence() {
    for (w, b) in [("", 1), ("1", 2), ("-1", 2), ("1 1 1", 2), ("-1 -1 -1", 2), ("1 -2 1 -2", 3)] {
        let d = diagram(w, b);
        for edge in [0, d.num_edges() - 1] {
            let (ss, _) = compute_e2(&d, Variant::Reduced { edge }, None).unwrap();
            let lo = ss.bottom().unwrap();
            let les = reduced_dims_from_les(&ss, edge);
            let mut direct = std::collections::BTreeMap::new();
            for a in lo..=ss.top() {
                for ((s, n), dim) in ss.e2_dims_at(a) {
                    if dim > 0 {
                        direct.insert((a, s, n), dim);
                    }
                }
            }
            assert_eq!(direct, les, "{w:?} edge {edge}");
        }
    }
}

#[test]
fn unknot_middle_is_one_free_tower() {
    let (ss, page) = compute_e2(&diagram("", 1), Variant::Middle, None).unwrap();
    let r = u_module_structure(&ss).unwrap();
    assert_eq!(r.free_rank, 1);
    assert_eq!(r.torsion_total(), 0);
    assert!(page.collapsed().values().all(|&d| d == 1));
}

#[test]
fn middle_and_unreduced_euler_match_series() {
    for (w, b) in [("", 1), ("1", 2), ("1 1 1", 2), ("-1 -1 -1", 2)] {
        let d = diagram(w, b);
        let p = hecke_homfly(b, &w.split_whitespace().map(|t| t.parse().unwrap()).collect::<Vec<i64>>());
        for variant in [Variant::Middle, Variant::Unreduced] {
            let (_, page) = compute_e2(&d, variant, None).unwrap();
            let lo = page.exact_from_i();
            let chi = truncate_q(&euler_characteristic(&page).unwrap(), lo);
            assert_eq!(chi, expected_euler(&p, variant, lo), "{w:?} {variant}");
        }
    }
}

#[test]
fn reduced_pages_dominate_thin_rank() {
    for (w, b) in [("1 1 1", 2), ("-1 -1 -1", 2), ("1 -2 1 -2", 3)] {
        let signed: Vec<i64> = w.split_whitespace().map(|t| t.parse().unwrap()).collect();
        let (_, page) = compute_e2(&diagram(w, b), Variant::Reduced { edge: 0 }, None).unwrap();
        assert!(page.total_dim() >= thin_rank(&hecke_homfly(b, &signed)), "{w:?}");
    }
}

#[test]
fn e1_page_is_at_least_e2() {
    let d = diagram("1 1 1", 2);
    let (ss, e2) = compute_e2(&d, Variant::Middle, None).unwrap();
    let depth = ss.top() - ss.bottom().unwrap();
    let (_, e1) = compute_e1(&d, Variant::Middle, depth).unwrap();
    assert_eq!(e1.stage, Stage::E1);
    for ((i, j, k), dim) in e2.collapsed() {
        assert!(e1.collapsed().get(&(i, j, k)).copied().unwrap_or(0) >= dim, "({i},{j},{k})");
    }
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let d = diagram("1 -2 1 -2", 3);
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let (_, page) = compute_e2(&d, Variant::Reduced { edge: 0 }, None).unwrap();
            PageExport::new("1 -2 1 -2", 3, &page, None).to_json().unwrap()
        })
    };
    assert_eq!(run(1), run(4));
}
