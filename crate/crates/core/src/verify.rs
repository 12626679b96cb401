//! Verification suites run by `floer-cube verify`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::braid::{close_braid, parse_braid, resolve, BraidWord, Letter, Resolution};
use crate::cycles::{enumerate_cycles, is_admissible, is_cycle};
use crate::error::{Error, Result};
use crate::homfly::{homfly_reduced, HomflyOracle, LaurentAQ};
use crate::koszul::{build_vertex_complex, crossing_edge_map};
use crate::spectral::{compute_e1, compute_e2, euler_characteristic, u_module_structure, Variant, STABLE_LEVELS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Skein,
    Dsquared,
    Euler,
    Invariance,
    Umodule,
    ReductionEdge,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Skein, Suite::Dsquared, Suite::Euler, Suite::Invariance, Suite::Umodule, Suite::ReductionEdge];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "skein" => Suite::Skein,
            "dsquared" => Suite::Dsquared,
            "euler" => Suite::Euler,
            "invariance" => Suite::Invariance,
            "umodule" => Suite::Umodule,
            "reduction-edge" => Suite::ReductionEdge,
            _ => return Err(Error::Config(format!("unknown suite {s:?}"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Skein => "skein",
            Suite::Dsquared => "dsquared",
            Suite::Euler => "euler",
            Suite::Invariance => "invariance",
            Suite::Umodule => "umodule",
            Suite::ReductionEdge => "reduction-edge",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    pub suite: Suite,
    pub case: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct Budget {
    /// Random words for the skein suite.
    pub samples: usize,
    pub max_letters: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { samples: 100, max_letters: 4, seed: 7 }
    }
}

pub fn run_suite(suite: Suite, budget: &Budget) -> Result<Vec<CaseReport>> {
    let mut out = Vec::new();
    let mut push = |case: String, pass: bool, detail: String| out.push(CaseReport { suite, case, pass, detail });
    match suite {
        Suite::Skein => {
            for (case, pass, detail) in skein_cases(budget)? {
                push(case, pass, detail);
            }
        }
        Suite::Dsquared => {
            for w in knot_words(3, budget.max_letters) {
                let case = format!("{w} ({} strands)", w.strands());
                match complex_checks(&w) {
                    Ok(n) => push(case, true, format!("{n} differentials")),
                    Err(e) => push(case, false, e.to_string()),
                }
            }
        }
        Suite::Euler => {
            for (w, b) in EULER_WORDS {
                let word = parse_braid(w, b)?;
                let (_, page) = compute_e2(&close_braid(&word), Variant::Reduced { edge: 0 }, None)?;
                let chi = euler_characteristic(&page)?;
                let oracle = homfly_reduced(&word)?;
                push(format!("{w:?} ({b} strands)"), chi == oracle, format!("chi {chi}, oracle {oracle}"));
            }
        }
        Suite::Invariance => {
            for (group, words) in INVARIANCE_GROUPS {
                let tables = words.iter().map(|&(w, b)| reduced_table(w, b, 0)).collect::<Result<Vec<_>>>()?;
                let pass = tables.windows(2).all(|t| t[0] == t[1]);
                let dims: Vec<String> = words
                    .iter()
                    .zip(&tables)
                    .map(|((w, _), t)| format!("{w:?}: {}", t.values().sum::<usize>()))
                    .collect();
                push(group.to_string(), pass, dims.join(", "));
            }
        }
        Suite::Umodule => {
            let word = parse_braid("1 1 1", 2)?;
            let d = close_braid(&word);
            let (ss, _) = compute_e2(&d, Variant::Middle, None)?;
            let r = u_module_structure(&ss)?;
            push(
                "trefoil free rank".into(),
                r.free_rank == 3,
                format!("free rank {}, stable on {} levels", r.free_rank, r.stable_levels),
            );
            push(
                "trefoil torsion".into(),
                r.stable_levels >= STABLE_LEVELS,
                format!("torsion dim {}, killed by U^{}", r.torsion_total(), r.torsion_exponent),
            );
            let (_, red) = compute_e2(&d, Variant::Reduced { edge: 0 }, None)?;
            push("rank inequality".into(), red.total_dim() >= 3, format!("reduced dim {}", red.total_dim()));
        }
        Suite::ReductionEdge => {
            let d = close_braid(&parse_braid("1 1 1", 2)?);
            let base = reduced_table("1 1 1", 2, 0)?;
            for e in 0..d.num_edges() {
                let t = reduced_table("1 1 1", 2, e)?;
                push(format!("trefoil edge {e}"), t == base, format!("dim {}", t.values().sum::<usize>()));
            }
        }
    }
    Ok(out)
}

pub const EULER_WORDS: [(&str, usize); 5] = [("", 1), ("1", 2), ("1 1 1", 2), ("-1 -1 -1", 2), ("1 -2 1 -2", 3)];

/// Words whose pages should agree, by the move relating them.
pub const INVARIANCE_GROUPS: [(&str, &[(&str, usize)]); 3] = [
    ("stabilization", &[("1 1 1", 2), ("1 1 1 2", 3)]),
    ("conjugation", &[("1 1 1 2", 3), ("2 1 1 1 2 -2", 3)]),
    ("unknot", &[("", 1), ("1", 2), ("-1", 2)]),
];

/// Collapsed reduced E2 dimensions.
pub fn reduced_table(w: &str, b: usize, edge: usize) -> Result<BTreeMap<(i64, i64, i64), usize>> {
    let d = close_braid(&parse_braid(w, b)?);
    let (_, page) = compute_e2(&d, Variant::Reduced { edge }, None)?;
    Ok(page.collapsed())
}

/// Every word with at most `max_letters` letters on at most `max_strands` strands whose closure is a knot.
pub fn knot_words(max_strands: usize, max_letters: usize) -> Vec<BraidWord> {
    let mut out = Vec::new();
    for b in 1..=max_strands {
        let alphabet: Vec<Letter> = (1..b).flat_map(|g| [Letter::new(g, true), Letter::new(g, false)]).collect();
        let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
        for len in 0..=max_letters {
            for letters in &layer {
                let w = BraidWord::new(b, letters.clone()).expect("generators in range");
                if w.is_knot() {
                    out.push(w);
                }
            }
            if len == max_letters || alphabet.is_empty() {
                break;
            }
            layer = layer
                .iter()
                .flat_map(|p| alphabet.iter().map(move |&l| p.iter().copied().chain([l]).collect()))
                .collect();
        }
    }
    out
}

/// d^2 = 0 for every vertex complex, the chain-map property for every edge
/// map, and (d1)^2 = 0 on the middle and reduced E1 pages (asserted while the
/// pages are assembled). Returns the number of E1 differentials checked.
pub fn complex_checks(w: &BraidWord) -> Result<usize> {
    let d = close_braid(w);
    let c = d.crossing_count();
    for idx in 0..d.cube_size() {
        let r = Resolution::from_index(c, idx);
        let s = resolve(&d, &r)?;
        let cube = r.bits().iter().filter(|&&b| b).count();
        for z in enumerate_cycles(&s).into_iter().filter(|z| is_admissible(z, &d)) {
            let vc = build_vertex_complex(&s, &z, cube)?;
            vc.check_d_squared()?;
            for k in (0..c).filter(|&k| idx >> k & 1 == 0) {
                let r2 = Resolution::from_index(c, idx | 1 << k);
                let s2 = resolve(&d, &r2)?;
                if !is_cycle(&s2, &z) {
                    continue;
                }
                let tgt = build_vertex_complex(&s2, &z, cube + 1)?;
                if let Some(m) = crossing_edge_map(&d, k, &vc, &tgt)? {
                    m.verify_chain_map()?;
                }
            }
        }
    }
    let depth = (c + w.strands()) as i64;
    let (mid, _) = compute_e1(&d, Variant::Middle, depth)?;
    let (red, _) = compute_e1(&d, Variant::Reduced { edge: 0 }, depth)?;
    Ok(mid.d1_family().len() + red.d1_family().len())
}

/// A random word with at most `max_letters` letters on at most three strands.
pub fn random_word(rng: &mut StdRng, max_letters: usize) -> BraidWord {
    let b = rng.gen_range(2..=3);
    let n = rng.gen_range(1..=max_letters);
    let letters = (0..n).map(|_| Letter::new(rng.gen_range(1..b), rng.gen_bool(0.5))).collect();
    BraidWord::new(b, letters).expect("generators in range")
}

/// `a P(D+) - a^-1 P(D-) - (q - q^-1) P(Ds)` at crossing `k`, scaled by `z^strands` to clear denominators.
pub fn skein_defect(oracle: &mut HomflyOracle, w: &BraidWord, k: usize) -> Result<LaurentAQ> {
    let mut plus = w.letters().to_vec();
    plus[k] = Letter::new(plus[k].generator, true);
    let mut minus = plus.clone();
    minus[k] = minus[k].inverse();
    let mut smooth = plus.clone();
    smooth.remove(k);
    let n = w.strands() as u32;
    let b = w.strands();
    let pp = oracle.reduced_times_z(&BraidWord::new(b, plus)?, n)?;
    let pm = oracle.reduced_times_z(&BraidWord::new(b, minus)?, n)?;
    let ps = oracle.reduced_times_z(&BraidWord::new(b, smooth)?, n)?;
    Ok(pp.shift(1, 0).sub(&pm.shift(-1, 0)).sub(&ps.mul(&LaurentAQ::z())))
}

fn skein_cases(budget: &Budget) -> Result<Vec<(String, bool, String)>> {
    let mut rng = StdRng::seed_from_u64(budget.seed);
    let mut oracle = HomflyOracle::new(true);
    let mut out = Vec::new();
    let mut bad = Vec::new();
    for _ in 0..budget.samples {
        let w = random_word(&mut rng, 6);
        let k = rng.gen_range(0..w.letters().len());
        let defect = skein_defect(&mut oracle, &w, k)?;
        if !defect.is_zero() {
            bad.push(format!("{w} at crossing {k}: {defect}"));
        }
    }
    out.push((
        format!("{} random crossings", budget.samples),
        bad.is_empty(),
        if bad.is_empty() { "all defects vanish".into() } else { bad.join("; ") },
    ));
    let unknot = oracle.reduced(&parse_braid("", 1)?)?;
    out.push(("unknot".into(), unknot == LaurentAQ::one(), format!("{unknot}")));
    // the skein relation as normalized here puts the positive trefoil on negative a-exponents
    let trefoil = oracle.reduced(&parse_braid("1 1 1", 2)?)?;
    let expected = LaurentAQ::from_terms(&[(-2, 2, 1), (-2, -2, 1), (-4, 0, -1)]);
    out.push(("right trefoil".into(), trefoil == expected, format!("{trefoil}")));
    Ok(out)
}

/// True when every case passed.
pub fn all_pass(reports: &[CaseReport]) -> bool {
    reports.iter().all(|r| r.pass)
}
