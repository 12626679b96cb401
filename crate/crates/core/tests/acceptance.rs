//! One pass/fail line per acceptance criterion, with pinned time limits.
//!
//! Criteria listed in `EXPECTED_FAILURES` are computed in full and reported as
//! FAIL; the run only aborts if one of them unexpectedly passes, or if any
//! other criterion fails.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{hecke_homfly, koszul_mismatches, tensor_v, thin_rank, SMALL_KNOTS};
use floer_cube::braid::{close_braid, parse_braid};
use floer_cube::homfly::homfly_reduced;
use floer_cube::spectral::{compute_e2, euler_characteristic, u_module_structure, Variant, STABLE_LEVELS};
use floer_cube::verify::{all_pass, reduced_table, run_suite, Budget, Suite, EULER_WORDS, INVARIANCE_GROUPS};

const SKEIN_LIMIT: Duration = Duration::from_secs(10);
const DSQUARED_LIMIT: Duration = Duration::from_secs(600);
const EULER_CASE_LIMIT: Duration = Duration::from_secs(300);
const INVARIANCE_LIMIT: Duration = Duration::from_secs(900);
const KOSZUL_DEPTH: i64 = 5;
const TREFOIL_FREE_RANK: usize = 3;
const TREFOIL_EDGES: usize = 7;

/// Filtered E2 pages of different diagrams of one knot differ; and the
/// trefoil's unreduced torsion is not two copies of the middle torsion.
const EXPECTED_FAILURES: [&str; 2] = ["invariance", "unreduced doubling"];

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn signed(w: &str) -> Vec<i64> {
    w.split_whitespace().map(|t| t.parse().unwrap()).collect()
}

fn skein() -> Outcome {
    let t = Instant::now();
    let reports = run_suite(Suite::Skein, &Budget::default()).unwrap();
    let elapsed = t.elapsed();
    let trefoil = homfly_reduced(&parse_braid("1 1 1", 2).unwrap()).unwrap();
    let independent = hecke_homfly(2, &[1, 1, 1]);
    Outcome {
        pass: all_pass(&reports) && trefoil == independent && elapsed < SKEIN_LIMIT,
        detail: format!(
            "{} cases, right trefoil {trefoil} (Hecke trace {independent}), {:.2?} < {SKEIN_LIMIT:?}",
            reports.len(),
            elapsed
        ),
    }
}

fn complexes() -> Outcome {
    let t = Instant::now();
    let reports = run_suite(Suite::Dsquared, &Budget::default()).unwrap();
    let elapsed = t.elapsed();
    let bad: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.case.as_str()).collect();
    Outcome {
        pass: bad.is_empty() && elapsed < DSQUARED_LIMIT,
        detail: format!("{} knot words, failures {bad:?}, {:.2?} < {DSQUARED_LIMIT:?}", reports.len(), elapsed),
    }
}

fn euler() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (w, b) in EULER_WORDS {
        let t = Instant::now();
        let word = parse_braid(w, b).unwrap();
        let (_, page) = compute_e2(&close_braid(&word), Variant::Reduced { edge: 0 }, None).unwrap();
        let chi = euler_characteristic(&page).unwrap();
        let elapsed = t.elapsed();
        let ok =
            chi == homfly_reduced(&word).unwrap() && chi == hecke_homfly(b, &signed(w)) && elapsed < EULER_CASE_LIMIT;
        pass &= ok;
        parts.push(format!("{w:?}/{b} {} in {elapsed:.2?}", if ok { "ok" } else { "MISMATCH" }));
    }
    Outcome { pass, detail: format!("{} (each < {EULER_CASE_LIMIT:?})", parts.join(", ")) }
}

fn invariance() -> Outcome {
    let t = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (group, words) in INVARIANCE_GROUPS {
        let tables: Vec<_> = words.iter().map(|&(w, b)| reduced_table(w, b, 0).unwrap()).collect();
        let same = tables.windows(2).all(|x| x[0] == x[1]);
        pass &= same;
        let dims: Vec<String> =
            words.iter().zip(&tables).map(|((w, b), t)| format!("{w:?}/{b}={}", t.values().sum::<usize>())).collect();
        parts.push(format!("{group} {} [{}]", if same { "agree" } else { "differ" }, dims.join(" ")));
    }
    let elapsed = t.elapsed();
    Outcome {
        pass: pass && elapsed < INVARIANCE_LIMIT,
        detail: format!("{}; {elapsed:.2?} < {INVARIANCE_LIMIT:?}", parts.join("; ")),
    }
}

fn koszul() -> Outcome {
    let (compared, bad) = koszul_mismatches(&SMALL_KNOTS, KOSZUL_DEPTH);
    Outcome {
        pass: bad.is_empty() && compared > 0,
        detail: format!("{compared} cycle complexes over {} words, {} mismatches", SMALL_KNOTS.len(), bad.len()),
    }
}

fn module_structure() -> Outcome {
    let word = parse_braid("1 1 1", 2).unwrap();
    let d = close_braid(&word);
    let (ss, _) = compute_e2(&d, Variant::Middle, None).unwrap();
    let r = u_module_structure(&ss).unwrap();
    let thin = thin_rank(&hecke_homfly(2, &[1, 1, 1]));
    let (_, red) = compute_e2(&d, Variant::Reduced { edge: 0 }, None).unwrap();
    let pass = r.free_rank == TREFOIL_FREE_RANK
        && thin == TREFOIL_FREE_RANK
        && r.stable_levels >= STABLE_LEVELS
        && red.total_dim() >= TREFOIL_FREE_RANK;
    Outcome {
        pass,
        detail: format!(
            "free rank {} (thin count {thin}), torsion dim {} killed by U^{}, reduced dim {} >= {TREFOIL_FREE_RANK}",
            r.free_rank,
            r.torsion_total(),
            r.torsion_exponent,
            red.total_dim()
        ),
    }
}

/// Unreduced against middle tensored with a two-dimensional space, on the
/// part of `i` both windows compute exactly.
fn doubling_case(w: &str, b: usize) -> (bool, String) {
    let d = close_braid(&parse_braid(w, b).unwrap());
    let (_, mid) = compute_e2(&d, Variant::Middle, None).unwrap();
    let (_, unred) = compute_e2(&d, Variant::Unreduced, None).unwrap();
    let lo = unred.exact_from_i().max(mid.exact_from_i() - 1);
    let keep =
        |m: BTreeMap<(i64, i64, i64), usize>| -> BTreeMap<_, _> { m.into_iter().filter(|e| e.0 .0 >= lo).collect() };
    let predicted = keep(tensor_v(&mid.collapsed()));
    let got = keep(unred.collapsed());
    let total = |m: &BTreeMap<_, usize>| m.values().sum::<usize>();
    let diff = predicted.iter().filter(|(k, v)| got.get(k) != Some(v)).count()
        + got.keys().filter(|k| !predicted.contains_key(k)).count();
    (
        diff == 0,
        format!(
            "{w:?}/{b}: unreduced {} vs 2 x middle {} from i = {lo}, {diff} pieces differ",
            total(&got),
            total(&predicted)
        ),
    )
}

fn doubling() -> Outcome {
    let cases = [doubling_case("", 1), doubling_case("1 1 1", 2)];
    Outcome { pass: cases.iter().all(|c| c.0), detail: cases.map(|c| c.1).join("; ") }
}

fn reduction_edge() -> Outcome {
    let base = reduced_table("1 1 1", 2, 0).unwrap();
    let dims: Vec<usize> = (0..TREFOIL_EDGES)
        .map(|e| reduced_table("1 1 1", 2, e).unwrap())
        .map(|t| if t == base { t.values().sum() } else { 0 })
        .collect();
    let edges = close_braid(&parse_braid("1 1 1", 2).unwrap()).num_edges();
    Outcome {
        pass: edges == TREFOIL_EDGES && dims.iter().all(|&x| x > 0),
        detail: format!("{edges} edges, dims {dims:?} (0 marks a different table)"),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("skein oracle", skein),
        ("complex well-formedness", complexes),
        ("euler characteristic", euler),
        ("invariance", invariance),
        ("koszul brute force", koszul),
        ("module structure", module_structure),
        ("unreduced doubling", doubling),
        ("reduction edge", reduction_edge),
    ];
    let mut unexpected = Vec::new();
    for (name, run) in criteria {
        let o = run();
        let expected_fail = EXPECTED_FAILURES.contains(&name);
        let note = if expected_fail && !o.pass { " [known failure]" } else { "" };
        println!("{} {name}: {}{note}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if o.pass == expected_fail {
            unexpected.push(name);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for {unexpected:?}");
        ExitCode::FAILURE
    }
}
