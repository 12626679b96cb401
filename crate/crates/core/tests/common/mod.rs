//! Independent oracles shared by the integration tests. Nothing here calls the
//! code paths it is used to check.

#![allow(dead_code)]

use std::collections::BTreeMap;

use floer_cube::gf2::GradedMatrix;
use floer_cube::homfly::LaurentAQ;
use floer_cube::koszul::VertexComplex;
use floer_cube::spectral::SpectralSequence;

fn poly(terms: &[(i64, i64, i64)]) -> LaurentAQ {
    LaurentAQ::from_terms(terms)
}

/// `q - q^-1`
fn z() -> LaurentAQ {
    poly(&[(0, 1, 1), (0, -1, -1)])
}

fn inversions(p: &[usize]) -> usize {
    (0..p.len()).flat_map(|i| (i + 1..p.len()).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count()
}

fn times_generator(p: &[usize], g: usize) -> Vec<usize> {
    let mut q = p.to_vec();
    q.swap(g - 1, g);
    q
}

type Hecke = BTreeMap<Vec<usize>, LaurentAQ>;

/// Right multiplication by `g_i` (or its inverse `g_i - z`) in the Hecke algebra with `g^2 = z g + 1`.
fn hecke_times(x: &Hecke, g: usize, positive: bool) -> Hecke {
    let mut out: Hecke = BTreeMap::new();
    let mut add = |k: Vec<usize>, c: LaurentAQ| {
        let e = out.entry(k).or_insert_with(LaurentAQ::zero);
        *e = e.add(&c);
    };
    for (w, c) in x {
        let w2 = times_generator(w, g);
        if inversions(&w2) > inversions(w) {
            add(w2, c.clone());
        } else {
            add(w2, c.clone());
            add(w.clone(), c.mul(&z()));
        }
        if !positive {
            add(w.clone(), c.mul(&z()).scale(-1));
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// `z^(n-1)` times the Markov trace of each basis element of `H_n`, for `n <= 3`,
/// with `tr(x g_n) = a tr(x)` and `tr(x) = (a - a^-1) / z * tr(x)` on stabilization.
fn scaled_traces(n: usize) -> Vec<(Vec<usize>, LaurentAQ)> {
    let a = poly(&[(1, 0, 1)]);
    let a2 = poly(&[(2, 0, 1)]);
    let am = poly(&[(1, 0, 1), (-1, 0, -1)]);
    let table: Vec<(Vec<usize>, LaurentAQ)> = match n {
        1 => vec![(vec![], LaurentAQ::one())],
        2 => vec![(vec![], am.clone()), (vec![1], z().mul(&a))],
        3 => vec![
            (vec![], am.mul(&am)),
            (vec![1], z().mul(&a).mul(&am)),
            (vec![2], z().mul(&a).mul(&am)),
            (vec![1, 2], z().mul(&z()).mul(&a2)),
            (vec![2, 1], z().mul(&z()).mul(&a2)),
            (vec![1, 2, 1], z().pow(3).mul(&a2).add(&z().mul(&a).mul(&am))),
        ],
        _ => panic!("traces only tabulated up to three strands"),
    };
    table
        .into_iter()
        .map(|(word, t)| {
            let mut p: Vec<usize> = (0..n).collect();
            for g in word {
                p = times_generator(&p, g);
            }
            (p, t)
        })
        .collect()
}

/// `z^(strands - 1)` times the reduced HOMFLY-PT polynomial, from the Markov
/// trace on the Hecke algebra: `P = a^-w tr(word)`.
pub fn hecke_homfly_scaled(strands: usize, signed: &[i64]) -> LaurentAQ {
    let mut x: Hecke = BTreeMap::new();
    x.insert((0..strands).collect(), LaurentAQ::one());
    for &s in signed {
        x = hecke_times(&x, s.unsigned_abs() as usize, s > 0);
    }
    let traces: BTreeMap<Vec<usize>, LaurentAQ> = scaled_traces(strands).into_iter().collect();
    let mut total = LaurentAQ::zero();
    for (w, c) in &x {
        total = total.add(&c.mul(&traces[w]));
    }
    let writhe: i64 = signed.iter().map(|s| s.signum()).sum();
    total.shift(-writhe, 0)
}

/// Reduced HOMFLY-PT polynomial of a knot or link whose value is a Laurent polynomial.
pub fn hecke_homfly(strands: usize, signed: &[i64]) -> LaurentAQ {
    let mut p = hecke_homfly_scaled(strands, signed);
    for _ in 1..strands {
        p = divide_by_z(&p);
    }
    p
}

/// Exact division by `q - q^-1`, one `a`-row at a time from the top `q`-exponent down.
fn divide_by_z(p: &LaurentAQ) -> LaurentAQ {
    let mut rows: BTreeMap<i64, BTreeMap<i64, i64>> = BTreeMap::new();
    for (a, q, c) in p.terms() {
        rows.entry(a).or_default().insert(q, c);
    }
    let mut out = LaurentAQ::zero();
    for (a, mut row) in rows {
        while let Some((&top, &c)) = row.iter().next_back() {
            // c q^top = c q^(top-1) (q - q^-1) + c q^(top-2)
            out.add_term(a, top - 1, c);
            row.remove(&top);
            *row.entry(top - 2).or_insert(0) += c;
            row.retain(|_, v| *v != 0);
            assert!(top > -10_000, "not divisible by q - q^-1");
        }
    }
    out
}

/// Rank over F2 of a dense 0/1 matrix, by plain row reduction.
pub fn naive_rank(rows: &[Vec<u8>]) -> usize {
    let mut m: Vec<Vec<u8>> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][col] == 1) else { continue };
        m.swap(rank, p);
        let pivot = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row[col] == 1 {
                row.iter_mut().zip(&pivot).for_each(|(x, y)| *x ^= y);
            }
        }
        rank += 1;
    }
    rank
}

pub fn dense(m: &GradedMatrix) -> Vec<Vec<u8>> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m.get(r, c) as u8).collect()).collect()
}

fn exponent_vectors(nvars: usize, degree: usize) -> Vec<Vec<u16>> {
    if nvars == 0 {
        return if degree == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=degree).rev() {
        for mut rest in exponent_vectors(nvars - 1, degree - first) {
            rest.insert(0, first as u16);
            out.push(rest);
        }
    }
    out
}

/// Homology dimensions of a vertex complex over the full polynomial ring, by
/// `(A, M)`, for `A` from the top down `depth` steps. Every piece is written out
/// as a dense matrix of `e_S * monomial` basis elements.
pub fn brute_koszul_dims(vc: &VertexComplex, depth: i64) -> BTreeMap<(i64, i64), usize> {
    let r = vc.factors.len();
    let polys: Vec<Vec<Vec<u16>>> = vc.factors.iter().map(|f| f.poly.terms().map(|m| m.0.clone()).collect()).collect();
    let top = vc.base.1;
    let mut out = BTreeMap::new();
    for a in (top - depth..=top).rev() {
        // basis of C_h(A): (mask, exponents)
        let mut bases: Vec<Vec<(u64, Vec<u16>)>> = vec![Vec::new(); r + 1];
        for mask in 0..(1u64 << r) {
            let (_, am) = vc.grading_of(mask);
            if am < a {
                continue;
            }
            for e in exponent_vectors(vc.nvars, (am - a) as usize) {
                bases[mask.count_ones() as usize].push((mask, e));
            }
        }
        let index: Vec<BTreeMap<(u64, Vec<u16>), usize>> =
            bases.iter().map(|b| b.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect()).collect();
        // d: C_h -> C_{h-1}
        let mut ranks = vec![0usize; r + 2];
        for h in 1..=r {
            let mut rows = Vec::new();
            for (mask, e) in &bases[h] {
                let mut row = vec![0u8; bases[h - 1].len()];
                for i in (0..r).filter(|i| mask >> i & 1 == 1) {
                    for t in &polys[i] {
                        let prod: Vec<u16> = e.iter().zip(t).map(|(x, y)| x + y).collect();
                        row[index[h - 1][&(mask & !(1 << i), prod)]] ^= 1;
                    }
                }
                rows.push(row);
            }
            ranks[h] = if bases[h - 1].is_empty() { 0 } else { naive_rank(&rows) };
        }
        for h in 0..=r {
            let dim = bases[h].len() - ranks[h] - ranks[h + 1];
            if dim > 0 {
                let m = vc.base.0 - 2 * vc.base.1 + h as i64 + 2 * a;
                *out.entry((a, m)).or_insert(0) += dim;
            }
        }
    }
    out
}

/// Reduced E2 dimensions by `(A, diagonal, cube)` from the long exact sequence
/// of the cone of `U_i` on the middle E2 page: coker `U_i` at cube `n` plus
/// ker `U_i` at cube `n + 1`.
pub fn reduced_dims_from_les(ss: &SpectralSequence, edge: usize) -> BTreeMap<(i64, i64, i64), usize> {
    let p = ss.cube.edge_variable(edge).unwrap();
    let c = ss.cube.diagram.crossing_count() as i64;
    let mid_dim = |a: i64, s: i64, n: i64| -> usize {
        ss.level(a).and_then(|l| l.complexes.iter().find(|x| x.diagonal == s)).map_or(0, |x| x.chain.homology_dim(n))
    };
    let rank_u = |a: i64, s: i64, n: i64| -> usize {
        if ss.level(a).is_none() || ss.level(a - 1).is_none() {
            return 0;
        }
        let m = ss.multiplication_on_e2(&p, a, s, n).unwrap();
        naive_rank(&dense(&m))
    };
    let mut out = BTreeMap::new();
    let lo = ss.bottom().unwrap();
    for a in lo..=ss.top() {
        let mut diagonals: Vec<i64> = Vec::new();
        for (aa, shift) in [(a, 0), (a + 1, -2)] {
            if let Some(l) = ss.level(aa) {
                diagonals.extend(l.complexes.iter().map(|x| x.diagonal + shift));
            }
        }
        diagonals.sort();
        diagonals.dedup();
        for s in diagonals {
            for n in -1..=c {
                let coker = mid_dim(a, s, n) - rank_u(a + 1, s + 2, n);
                let ker = mid_dim(a + 1, s + 2, n + 1) - rank_u(a + 1, s + 2, n + 1);
                if coker + ker > 0 {
                    out.insert((a, s, n), coker + ker);
                }
            }
        }
    }
    out
}

/// Rank of the homology of a thin knot: the sum of the absolute coefficients of its polynomial.
pub fn thin_rank(p: &LaurentAQ) -> usize {
    p.terms().iter().map(|t| t.2.unsigned_abs() as usize).sum()
}

/// Tensor a middle table with a two-dimensional space at `(i, j, k)` offsets `(-1, -1, -1)` and `(-1, 1, -1)`.
pub fn tensor_v(middle: &BTreeMap<(i64, i64, i64), usize>) -> BTreeMap<(i64, i64, i64), usize> {
    let mut out = BTreeMap::new();
    for (&(i, j, k), &d) in middle {
        for dj in [-1, 1] {
            *out.entry((i - 1, j + dj, k - 1)).or_insert(0) += d;
        }
    }
    out
}

/// Knot words with at most two crossings.
pub const SMALL_KNOTS: [(&str, usize); 11] = [
    ("", 1),
    ("1", 2),
    ("-1", 2),
    ("1 2", 3),
    ("1 -2", 3),
    ("-1 2", 3),
    ("-1 -2", 3),
    ("2 1", 3),
    ("2 -1", 3),
    ("-2 1", 3),
    ("-2 -1", 3),
];

/// Compare library Koszul homology with [`brute_koszul_dims`] for every
/// admissible cycle of the fully singular resolution of each word. Returns the
/// number of cycles compared and a description of each mismatch.
pub fn koszul_mismatches(words: &[(&str, usize)], depth: i64) -> (usize, Vec<String>) {
    use floer_cube::braid::{close_braid, parse_braid, resolve, Resolution};
    use floer_cube::cycles::{enumerate_cycles, is_admissible};
    use floer_cube::gf2::Homology;
    use floer_cube::koszul::{build_vertex_complex, GradedKoszul};

    let mut compared = 0;
    let mut bad = Vec::new();
    for &(w, b) in words {
        let d = close_braid(&parse_braid(w, b).unwrap());
        let r = Resolution::new(d.word().letters().iter().map(|l| !l.positive).collect());
        let s = resolve(&d, &r).unwrap();
        assert_eq!(s.four_valent_count(), d.crossing_count(), "{w}");
        let cube = r.bits().iter().filter(|&&x| x).count();
        for z in enumerate_cycles(&s).into_iter().filter(|z| is_admissible(z, &d)) {
            let vc = build_vertex_complex(&s, &z, cube).unwrap();
            let expected = brute_koszul_dims(&vc, depth);
            let g = GradedKoszul::from_full(&vc);
            let mut got = BTreeMap::new();
            for a in vc.base.1 - depth..=vc.base.1 {
                let piece = g.piece(a).unwrap();
                for h in 0..=g.rank() {
                    let dim = Homology::compute(&piece.incoming(h), piece.outgoing(h)).unwrap().dim();
                    if dim > 0 {
                        *got.entry((a, g.maslov(h, a))).or_insert(0) += dim;
                    }
                }
            }
            if got != expected {
                bad.push(format!("{w:?} cycle {:?}: {got:?} vs {expected:?}", z.edges()));
            }
            compared += 1;
        }
    }
    (compared, bad)
}
