//! Koszul complexes attached to a cycle in a resolved diagram, the chain maps
//! between them along cube edges, and their graded pieces.
//!
//! Every complex contains, for each crossing `c`, a degree-one element `w_c`
//! with `d(w_c) = U1 + U2 + U3 + U4` at `c`. Quotienting the ground ring by
//! these linear forms and dropping the `w_c` gives a quasi-isomorphic complex
//! over a ring with roughly `c + 1` variables; all maps are compatible with
//! this reduction, which is what makes the cube computable.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::braid::{BivalentKind, ClosedDiagram, Crossing, EdgeId, SingularDiagram, Vertex};
use crate::cycles::{is_cycle, local_type, Cycle, LocalType};
use crate::error::{Error, Result};
use crate::gf2::{graded_basis, BitVec, GradedMatrix, Monomial, PolyF2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FactorKey {
    Edge(EdgeId),
    Bivalent(BivalentKind),
    Quad(usize),
    Lin(usize),
}

impl FactorKey {
    /// Whether the factor only exists locally at crossing `c`.
    fn local_to(&self, c: usize) -> bool {
        match *self {
            FactorKey::Lin(k) | FactorKey::Quad(k) => k == c,
            FactorKey::Bivalent(BivalentKind::SmoothLeft(k)) | FactorKey::Bivalent(BivalentKind::SmoothRight(k)) => {
                k == c
            }
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KoszulFactor {
    pub key: FactorKey,
    #[serde(skip)]
    pub poly: PolyF2,
    /// Polynomial degree `k` of the factor.
    pub degree: usize,
}

impl KoszulFactor {
    /// (M, A) of the exterior generator relative to the unit: `(1 - 2k, -k)`.
    pub fn shift(&self) -> (i64, i64) {
        let k = self.degree as i64;
        (1 - 2 * k, -k)
    }
}

/// Exterior-algebra element: subset mask of factor indices to coefficient.
pub type Ext = BTreeMap<u64, PolyF2>;

fn ext_add(e: &mut Ext, mask: u64, p: PolyF2) {
    if p.is_zero() {
        return;
    }
    let remove = match e.get_mut(&mask) {
        Some(q) => {
            q.add_assign(&p);
            q.is_zero()
        }
        None => {
            e.insert(mask, p);
            false
        }
    };
    if remove {
        e.remove(&mask);
    }
}

fn ext_wedge(a: &Ext, b: &Ext) -> Ext {
    let mut out = Ext::new();
    for (&ma, pa) in a {
        for (&mb, pb) in b {
            if ma & mb == 0 {
                ext_add(&mut out, ma | mb, pa.mul(pb));
            }
        }
    }
    out
}

fn ext_scale(a: &Ext, p: &PolyF2) -> Ext {
    let mut out = Ext::new();
    for (&m, q) in a {
        ext_add(&mut out, m, q.mul(p));
    }
    out
}

/// Koszul differential `d(e_S) = sum_{i in S} f_i e_{S - i}` (no signs in characteristic 2).
pub fn ext_differential(polys: &[PolyF2], a: &Ext) -> Ext {
    let mut out = Ext::new();
    for (&m, p) in a {
        let mut bits = m;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            ext_add(&mut out, m & !(1 << i), p.mul(&polys[i]));
        }
    }
    out
}

/// Sum of the edge variables at a vertex, with multiplicity.
pub fn l_of(v: &Vertex, nvars: usize) -> PolyF2 {
    PolyF2::sum_of_vars(nvars, &v.edges())
}

/// Product of the outgoing edges plus product of the incoming edges.
pub fn q_of(v: &Vertex, nvars: usize) -> Result<PolyF2> {
    match *v {
        Vertex::Singular { out_left, out_right, in_left, in_right, .. } => {
            let u = |e| PolyF2::var(nvars, e);
            Ok(u(out_left).mul(&u(out_right)).add(&u(in_left).mul(&u(in_right))))
        }
        Vertex::Bivalent(_) => Err(Error::WrongValence),
    }
}

/// Koszul complex of one cycle at one cube vertex, over `F2[U_0..U_{n-1}]`.
#[derive(Clone, Debug, Serialize)]
pub struct VertexComplex {
    pub resolution: usize,
    pub cycle: Cycle,
    pub cube: usize,
    pub nvars: usize,
    pub factors: Vec<KoszulFactor>,
    /// (M, A) of the unit generator.
    pub base: (i64, i64),
}

pub fn build_vertex_complex(s: &SingularDiagram, z: &Cycle, cube: usize) -> Result<VertexComplex> {
    if !is_cycle(s, z) {
        return Err(Error::InvalidCycle(z.to_string()));
    }
    let n = s.num_edges();
    let mut factors = Vec::new();
    for e in z.edges() {
        factors.push(KoszulFactor { key: FactorKey::Edge(e), poly: PolyF2::var(n, e), degree: 1 });
    }
    for v in s.vertices() {
        let touches = v.edges().iter().any(|&e| z.contains(e));
        match v {
            Vertex::Bivalent(b) => {
                if !b.is_decorated() && !touches {
                    factors.push(KoszulFactor { key: FactorKey::Bivalent(b.kind), poly: l_of(v, n), degree: 1 });
                }
            }
            Vertex::Singular { crossing, .. } => {
                if !touches {
                    factors.push(KoszulFactor { key: FactorKey::Quad(*crossing), poly: q_of(v, n)?, degree: 2 });
                }
                factors.push(KoszulFactor { key: FactorKey::Lin(*crossing), poly: l_of(v, n), degree: 1 });
            }
        }
    }
    factors.sort_by_key(|f| f.key);
    if factors.len() > 63 {
        return Err(Error::InternalError("too many Koszul factors".into()));
    }
    Ok(VertexComplex {
        resolution: s.resolution().index(),
        cycle: *z,
        cube,
        nvars: n,
        factors,
        base: provisional_base(s, z)?,
    })
}

/// (M, A) of the unit generator before global calibration.
///
/// Relative to the empty cycle, each crossing contributes `(-1, 0)` when a
/// positive crossing is smoothed and `(1, 1)` when a negative crossing is
/// singular; a cycle adds `(1, 0)` per loop and `(-2, -1)` each time it leaves
/// a singular crossing through the right outgoing edge. Edge-map homogeneity
/// and the vertex Poincaré identity leave no other choice.
pub fn provisional_base(s: &SingularDiagram, z: &Cycle) -> Result<(i64, i64)> {
    let (mut m, mut a) = (0i64, 0i64);
    for (k, c) in s.crossings().iter().enumerate() {
        let singular = s.is_singular(k);
        match (c.positive, singular) {
            (true, false) => m -= 1,
            (false, true) => {
                m += 1;
                a += 1;
            }
            _ => {}
        }
        if singular {
            let (dm, da) = singular_turn_shift(local_type(z, c)?);
            m += dm;
            a += da;
        }
    }
    m += cycle_loops(s, z) as i64;
    Ok((m, a))
}

/// Shift contributed by the local type of a cycle at a singular crossing.
pub fn singular_turn_shift(t: LocalType) -> (i64, i64) {
    match t {
        // a closed cycle turns right as often as left, so only the sum of the
        // Z23 and Z14 shifts is pinned down
        LocalType::Z24 | LocalType::Z23 => (-2, -1),
        _ => (0, 0),
    }
}

/// Number of closed loops the cycle's edges form.
pub fn cycle_loops(s: &SingularDiagram, z: &Cycle) -> usize {
    // successor of each edge of z through the vertex at its head
    let mut next: HashMap<EdgeId, EdgeId> = HashMap::new();
    for v in s.vertices() {
        match *v {
            Vertex::Bivalent(b) => {
                if z.contains(b.input) {
                    next.insert(b.input, b.output);
                }
            }
            Vertex::Singular { out_left, out_right, in_left, in_right, .. } => {
                // one incoming and one outgoing edge of z meet here
                let succ = if z.contains(out_left) { out_left } else { out_right };
                for e in [in_left, in_right] {
                    if z.contains(e) {
                        next.insert(e, succ);
                    }
                }
            }
        }
    }
    let mut seen = 0u64;
    let mut loops = 0;
    for e in z.edges() {
        if seen & (1 << e) != 0 {
            continue;
        }
        loops += 1;
        let mut x = e;
        while seen & (1 << x) == 0 {
            seen |= 1 << x;
            x = next[&x];
        }
    }
    loops
}

impl VertexComplex {
    pub fn polys(&self) -> Vec<PolyF2> {
        self.factors.iter().map(|f| f.poly.clone()).collect()
    }

    pub fn index_of(&self, key: FactorKey) -> Option<usize> {
        self.factors.iter().position(|f| f.key == key)
    }

    /// (M, A) of `e_S` for a subset mask of factors.
    pub fn grading_of(&self, mask: u64) -> (i64, i64) {
        let mut g = self.base;
        for (i, f) in self.factors.iter().enumerate() {
            if mask >> i & 1 == 1 {
                let (m, a) = f.shift();
                g.0 += m;
                g.1 += a;
            }
        }
        g
    }

    /// Check `d^2 = 0` on every exterior basis element.
    pub fn check_d_squared(&self) -> Result<()> {
        let polys = self.polys();
        for mask in 0..(1u64 << self.factors.len()) {
            let mut e = Ext::new();
            e.insert(mask, PolyF2::one(self.nvars));
            let dd = ext_differential(&polys, &ext_differential(&polys, &e));
            if !dd.is_empty() {
                return Err(Error::NotAComplex);
            }
        }
        Ok(())
    }

    /// Check every factor polynomial is homogeneous of its recorded degree.
    pub fn check_homogeneous(&self) -> Result<()> {
        for f in &self.factors {
            if !f.poly.is_zero() && f.poly.homogeneous_degree() != Some(f.degree) {
                return Err(Error::InternalInvariantViolation(format!(
                    "factor {:?} is not homogeneous of degree {}",
                    f.key, f.degree
                )));
            }
        }
        Ok(())
    }
}

/// Chain map `phi(e_S) = s^(1-|S|) * wedge_{i in S} (T e_i)` between Koszul complexes.
#[derive(Clone, Debug)]
pub struct KoszulMap {
    pub scalar: PolyF2,
    /// Image of each source generator, as a degree-one element of the target.
    pub images: Vec<Ext>,
    src_polys: Vec<PolyF2>,
    tgt_polys: Vec<PolyF2>,
    nvars: usize,
}

/// Build a Koszul morphism from a transition matrix `t[i][j]` (source generator `i`
/// to target generator `j`) satisfying `scalar * f_i = sum_j t[i][j] g_j`.
pub fn koszul_map_from_transition(
    src: &[PolyF2],
    tgt: &[PolyF2],
    t: &[Vec<PolyF2>],
    scalar: &PolyF2,
) -> Result<KoszulMap> {
    let nvars = scalar.nvars();
    let images: Vec<Ext> = t
        .iter()
        .map(|row| {
            let mut e = Ext::new();
            for (j, p) in row.iter().enumerate() {
                ext_add(&mut e, 1 << j, p.clone());
            }
            e
        })
        .collect();
    let map = KoszulMap { scalar: scalar.clone(), images, src_polys: src.to_vec(), tgt_polys: tgt.to_vec(), nvars };
    map.check_feasible()?;
    Ok(map)
}

impl KoszulMap {
    fn check_feasible(&self) -> Result<()> {
        if self.images.len() != self.src_polys.len() {
            return Err(Error::NotAChainMap("transition matrix has the wrong row count".into()));
        }
        for (i, img) in self.images.iter().enumerate() {
            let d = ext_differential(&self.tgt_polys, img);
            let lhs = self.scalar.mul(&self.src_polys[i]);
            let rhs = d.get(&0).cloned().unwrap_or_else(|| PolyF2::zero(self.nvars));
            if lhs != rhs {
                return Err(Error::NotAChainMap(format!("generator {i}: scalar * f = {lhs} but d(T e) = {rhs}")));
            }
        }
        Ok(())
    }

    /// Image of the basis element `e_S`.
    pub fn apply_basis(&self, mask: u64) -> Result<Ext> {
        let k = mask.count_ones() as usize;
        let mut acc = Ext::new();
        acc.insert(0, PolyF2::one(self.nvars));
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            acc = ext_wedge(&acc, &self.images[i]);
        }
        if k == 0 {
            return Ok(ext_scale(&acc, &self.scalar));
        }
        let div = self.scalar.pow(k - 1);
        let mut out = Ext::new();
        for (m, p) in acc {
            ext_add(&mut out, m, p.div_exact(&div)?);
        }
        Ok(out)
    }

    pub fn apply(&self, a: &Ext) -> Result<Ext> {
        let mut out = Ext::new();
        for (&m, p) in a {
            for (mm, q) in self.apply_basis(m)? {
                ext_add(&mut out, mm, q.mul(p));
            }
        }
        Ok(out)
    }

    /// `d phi = phi d` on every exterior basis element.
    pub fn verify_chain_map(&self) -> Result<()> {
        for mask in 0..(1u64 << self.src_polys.len()) {
            let mut e = Ext::new();
            e.insert(mask, PolyF2::one(self.nvars));
            let lhs = ext_differential(&self.tgt_polys, &self.apply(&e)?);
            let rhs = self.apply(&ext_differential(&self.src_polys, &e))?;
            if lhs != rhs {
                return Err(Error::NotAChainMap(format!("fails on basis element {mask:#b}")));
            }
        }
        Ok(())
    }
}

/// Target-side image of one generator, as (factor key, coefficient) pairs.
type KeyedImage = Vec<(FactorKey, PolyF2)>;

/// The filtered edge map along the cube edge that flips crossing `c` from 0 to 1.
///
/// `src` lives at the 0-resolution and `tgt` at the 1-resolution. Returns
/// `Ok(None)` when the table entry is zero or the cycle is missing on one side.
pub fn crossing_edge_map(
    d: &ClosedDiagram,
    c: usize,
    src: &VertexComplex,
    tgt: &VertexComplex,
) -> Result<Option<KoszulMap>> {
    if src.cycle != tgt.cycle {
        return Ok(None);
    }
    let cr: Crossing = d.crossings()[c];
    let n = src.nvars;
    let u = |e: EdgeId| PolyF2::var(n, e);
    let one = PolyF2::one(n);
    let sl = FactorKey::Bivalent(BivalentKind::SmoothLeft(c));
    let sr = FactorKey::Bivalent(BivalentKind::SmoothRight(c));
    let lin = FactorKey::Lin(c);
    let quad = FactorKey::Quad(c);
    let edge = FactorKey::Edge;
    let [e1, e2, e3, e4] = cr.edges();

    let lt = local_type(&src.cycle, &cr)?;
    let (scalar, local): (PolyF2, Vec<(FactorKey, KeyedImage)>) = match (cr.positive, lt) {
        (_, LocalType::Z23 | LocalType::Z14 | LocalType::Z1234) => return Ok(None),
        (true, LocalType::Empty) => (
            one.clone(),
            vec![(lin, vec![(sl, one.clone()), (sr, one.clone())]), (quad, vec![(sl, u(e2)), (sr, u(e3))])],
        ),
        (true, LocalType::Z13) => {
            (one.clone(), vec![(lin, vec![(edge(e1), one.clone()), (edge(e3), one.clone()), (sr, one.clone())])])
        }
        (true, LocalType::Z24) => (u(e1), vec![(lin, vec![(sl, u(e1)), (edge(e2), u(e1)), (edge(e4), u(e1))])]),
        (false, LocalType::Empty) => (
            u(e2).add(&u(e3)),
            vec![(sl, vec![(lin, u(e3)), (quad, one.clone())]), (sr, vec![(lin, u(e2)), (quad, one.clone())])],
        ),
        (false, LocalType::Z13) => (u(e4), vec![(sr, vec![(lin, u(e4)), (edge(e1), u(e4)), (edge(e3), u(e4))])]),
        (false, LocalType::Z24) => {
            (one.clone(), vec![(sl, vec![(lin, one.clone()), (edge(e2), one.clone()), (edge(e4), one.clone())])])
        }
    };

    let m_tgt = tgt.factors.len();
    let mut t = Vec::with_capacity(src.factors.len());
    for f in &src.factors {
        let mut row = vec![PolyF2::zero(n); m_tgt];
        let image: KeyedImage = if f.key.local_to(c) {
            local
                .iter()
                .find(|(k, _)| *k == f.key)
                .map(|(_, img)| img.clone())
                .ok_or_else(|| Error::NotAChainMap(format!("no local rule for {:?}", f.key)))?
        } else {
            vec![(f.key, scalar.clone())]
        };
        for (key, p) in image {
            let j = tgt.index_of(key).ok_or_else(|| Error::NotAChainMap(format!("target lacks factor {key:?}")))?;
            row[j].add_assign(&p);
        }
        t.push(row);
    }
    koszul_map_from_transition(&src.polys(), &tgt.polys(), &t, &scalar).map(Some)
}

/// `R / (L_c)`: the ground ring modulo the crossing linear forms.
#[derive(Clone, Debug)]
pub struct QuotientRing {
    nvars: usize,
    nfree: usize,
    /// Crossings whose linear forms were used, in elimination order.
    selected: Vec<usize>,
    /// Image of each variable in `F2[V_0..V_{nfree-1}]`.
    images: Vec<PolyF2>,
    /// Original edge of each free variable.
    free_edges: Vec<EdgeId>,
    reduction: Option<EdgeId>,
}

impl QuotientRing {
    pub fn new(d: &ClosedDiagram) -> Self {
        Self::build(d, None).expect("crossing relations alone never eliminate every variable")
    }

    /// Also sets `U_edge = 0`, which turns every complex into its reduced version.
    pub fn reduced(d: &ClosedDiagram, edge: EdgeId) -> Result<Self> {
        if edge >= d.num_edges() {
            return Err(Error::Config(format!("reduction edge {edge} out of range")));
        }
        Self::build(d, Some(edge))
    }

    fn build(d: &ClosedDiagram, extra: Option<EdgeId>) -> Result<Self> {
        let n = d.num_edges();
        // rows: (mask over edges, crossing or None for the reduction edge)
        let mut rows: Vec<(u64, Option<usize>)> = Vec::new();
        let mut pivots: Vec<usize> = Vec::new();
        let forms = d
            .crossings()
            .iter()
            .enumerate()
            .map(|(k, c)| (c.edges().iter().fold(0u64, |m, &e| m ^ (1 << e)), Some(k)))
            .chain(extra.map(|e| (1u64 << e, None)));
        for (mut m, k) in forms {
            for (i, &(r, _)) in rows.iter().enumerate() {
                if m >> pivots[i] & 1 == 1 {
                    m ^= r;
                }
            }
            if m == 0 {
                if k.is_none() {
                    return Err(Error::InternalInvariantViolation(
                        "reduction variable lies in the span of the crossing relations".into(),
                    ));
                }
                continue;
            }
            // eliminate the highest edge so low edges (the leftmost strand) stay free
            let p = 63 - m.leading_zeros() as usize;
            for (i, row) in rows.iter_mut().enumerate() {
                if row.0 >> p & 1 == 1 {
                    row.0 ^= m;
                }
                debug_assert!(row.0 >> pivots[i] & 1 == 1);
            }
            rows.push((m, k));
            pivots.push(p);
        }
        let free_edges: Vec<EdgeId> = (0..n).filter(|e| !pivots.contains(e)).collect();
        let nfree = free_edges.len();
        let free_index: HashMap<EdgeId, usize> = free_edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut images = vec![PolyF2::zero(nfree); n];
        for &e in &free_edges {
            images[e] = PolyF2::var(nfree, free_index[&e]);
        }
        for (i, &(r, _)) in rows.iter().enumerate() {
            let others: Vec<usize> =
                (0..n).filter(|&e| e != pivots[i] && r >> e & 1 == 1).map(|e| free_index[&e]).collect();
            images[pivots[i]] = PolyF2::sum_of_vars(nfree, &others);
        }
        let selected = rows.iter().filter_map(|r| r.1).collect();
        Ok(QuotientRing { nvars: n, nfree, selected, images, free_edges, reduction: extra })
    }

    pub fn reduction_edge(&self) -> Option<EdgeId> {
        self.reduction
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn nfree(&self) -> usize {
        self.nfree
    }

    pub fn free_edges(&self) -> &[EdgeId] {
        &self.free_edges
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn reduce(&self, p: &PolyF2) -> PolyF2 {
        p.substitute(&self.images)
    }

    pub fn edge_image(&self, e: EdgeId) -> &PolyF2 {
        &self.images[e]
    }
}

/// Degree-one element `w_c` with `d(w_c) = L_c`, as a mask over factor indices.
fn crossing_relation_element(vc: &VertexComplex, s_singular: bool, c: usize, cr: &Crossing) -> Result<u64> {
    let idx = |k: FactorKey| {
        vc.index_of(k)
            .map(|i| 1u64 << i)
            .ok_or_else(|| Error::InternalInvariantViolation(format!("missing factor {k:?}")))
    };
    if s_singular {
        return idx(FactorKey::Lin(c));
    }
    let [e1, e2, e3, e4] = cr.edges();
    let sl = FactorKey::Bivalent(BivalentKind::SmoothLeft(c));
    let sr = FactorKey::Bivalent(BivalentKind::SmoothRight(c));
    let e = |x| FactorKey::Edge(x);
    let keys: Vec<FactorKey> = match local_type(&vc.cycle, cr)? {
        LocalType::Empty => vec![sl, sr],
        LocalType::Z13 => vec![e(e1), e(e3), sr],
        LocalType::Z24 => vec![e(e2), e(e4), sl],
        LocalType::Z1234 => vec![e(e1), e(e2), e(e3), e(e4)],
        t => return Err(Error::InternalInvariantViolation(format!("local type {t:?} at a smoothed crossing"))),
    };
    let mut m = 0;
    for k in keys {
        m ^= idx(k)?;
    }
    Ok(m)
}

/// A vertex complex with the crossing relations quotiented out.
#[derive(Clone, Debug)]
pub struct QuotientComplex {
    pub full: VertexComplex,
    /// Indices (into `full.factors`) of the surviving generators.
    pub rest: Vec<usize>,
    /// Surviving factor polynomials, reduced into the quotient ring.
    pub polys: Vec<PolyF2>,
    pub degrees: Vec<usize>,
    /// Projection of each full generator to a mask over surviving generators.
    pub projection: Vec<u64>,
    pub nfree: usize,
}

impl QuotientComplex {
    pub fn new(d: &ClosedDiagram, s: &SingularDiagram, ring: &QuotientRing, full: VertexComplex) -> Result<Self> {
        let mut rows: Vec<u64> = Vec::new();
        let mut pivots: Vec<usize> = Vec::new();
        for &c in ring.selected() {
            let cr = &d.crossings()[c];
            let mut w = crossing_relation_element(&full, s.is_singular(c), c, cr)?;
            let mut lc = PolyF2::zero(full.nvars);
            for i in (0..64).filter(|i| w >> i & 1 == 1) {
                lc.add_assign(&full.factors[i].poly);
            }
            if lc != PolyF2::sum_of_vars(full.nvars, &cr.edges()) {
                return Err(Error::InternalInvariantViolation(format!(
                    "relation element at crossing {c} has differential {lc}"
                )));
            }
            for (i, &r) in rows.iter().enumerate() {
                if w >> pivots[i] & 1 == 1 {
                    w ^= r;
                }
            }
            let p = w.trailing_zeros() as usize;
            if w == 0 {
                return Err(Error::InternalInvariantViolation("dependent relation elements".into()));
            }
            for r in rows.iter_mut() {
                if *r >> p & 1 == 1 {
                    *r ^= w;
                }
            }
            rows.push(w);
            pivots.push(p);
        }
        let m = full.factors.len();
        let rest: Vec<usize> = (0..m).filter(|i| !pivots.contains(i)).collect();
        let pos: HashMap<usize, usize> = rest.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let to_rest = |mask: u64| -> u64 {
            (0..m).filter(|i| mask >> i & 1 == 1 && pos.contains_key(i)).fold(0, |a, i| a | 1 << pos[&i])
        };
        let mut projection = vec![0u64; m];
        for &i in &rest {
            projection[i] = 1 << pos[&i];
        }
        for (k, &p) in pivots.iter().enumerate() {
            projection[p] = to_rest(rows[k] & !(1 << p));
        }
        let polys = rest.iter().map(|&i| ring.reduce(&full.factors[i].poly)).collect();
        let degrees = rest.iter().map(|&i| full.factors[i].degree).collect();
        Ok(QuotientComplex { full, rest, polys, degrees, projection, nfree: ring.nfree() })
    }

    pub fn base(&self) -> (i64, i64) {
        self.full.base
    }

    pub fn rank(&self) -> usize {
        self.rest.len()
    }

    /// Alexander grading of `e_T` for a mask over surviving generators.
    pub fn alexander_of(&self, mask: u64) -> i64 {
        self.base().1 - (0..self.rest.len()).filter(|i| mask >> i & 1 == 1).map(|i| self.degrees[i] as i64).sum::<i64>()
    }

    /// Highest Alexander grading carrying a generator.
    pub fn top_alexander(&self) -> i64 {
        self.base().1
    }

    /// Project a full-complex element onto surviving generators (coefficients unreduced).
    fn project(&self, a: &Ext) -> Ext {
        let mut out = Ext::new();
        for (&mask, p) in a {
            // wedge of projected generators
            let mut acc: Vec<(u64, bool)> = vec![(0, true)];
            let mut bits = mask;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let img = self.projection[i];
                let mut next = Vec::new();
                for &(m, _) in &acc {
                    let mut ib = img;
                    while ib != 0 {
                        let j = ib.trailing_zeros();
                        ib &= ib - 1;
                        if m >> j & 1 == 0 {
                            next.push((m | 1 << j, true));
                        }
                    }
                }
                // cancel duplicates in characteristic 2
                next.sort();
                let mut dedup: Vec<(u64, bool)> = Vec::new();
                for x in next {
                    if dedup.last().map(|y| y.0) == Some(x.0) {
                        dedup.pop();
                    } else {
                        dedup.push(x);
                    }
                }
                acc = dedup;
            }
            for (m, _) in acc {
                ext_add(&mut out, m, p.clone());
            }
        }
        out
    }
}

/// The edge map induced on quotient complexes: images of each `e_T` with
/// coefficients in the quotient ring.
#[derive(Clone, Debug)]
pub struct QuotientMap {
    /// `images[T]` for every mask `T` over source surviving generators.
    pub images: Vec<Ext>,
    pub scalar_degree: usize,
}

pub fn quotient_edge_map(
    map: &KoszulMap,
    src: &QuotientComplex,
    tgt: &QuotientComplex,
    ring: &QuotientRing,
) -> Result<QuotientMap> {
    // images of full source generators, projected to target surviving generators
    let projected: Vec<Ext> = map.images.iter().map(|img| tgt.project(img)).collect();
    // relation elements must map into the span of target relation elements
    for (i, &p) in src.projection.iter().enumerate() {
        if !src.rest.contains(&i) {
            let mut acc = projected[i].clone();
            let mut bits = p;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                for (m, q) in &projected[src.rest[j]] {
                    ext_add(&mut acc, *m, q.clone());
                }
            }
            if !acc.is_empty() {
                return Err(Error::NotAChainMap("edge map does not preserve the crossing relations".into()));
            }
        }
    }
    let r = src.rest.len();
    let nvars = map.scalar.nvars();
    let mut images = Vec::with_capacity(1 << r);
    for mask in 0..(1u64 << r) {
        let k = mask.count_ones() as usize;
        let mut acc = Ext::new();
        acc.insert(0, PolyF2::one(nvars));
        for j in (0..r).filter(|j| mask >> j & 1 == 1) {
            acc = ext_wedge(&acc, &projected[src.rest[j]]);
        }
        let mut out = Ext::new();
        if k == 0 {
            for (m, p) in acc {
                ext_add(&mut out, m, ring.reduce(&p.mul(&map.scalar)));
            }
        } else {
            let div = map.scalar.pow(k - 1);
            for (m, p) in acc {
                ext_add(&mut out, m, ring.reduce(&p.div_exact(&div)?));
            }
        }
        images.push(out);
    }
    let scalar_degree = map.scalar.homogeneous_degree().unwrap_or(0);
    Ok(QuotientMap { images, scalar_degree })
}

/// Basis of one graded piece `C_h(A)`: pairs (generator mask, monomial).
#[derive(Clone, Debug, Default)]
pub struct PieceBasis {
    pub elements: Vec<(u64, Monomial)>,
    index: HashMap<(u64, Monomial), usize>,
}

impl PieceBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, mask: u64, m: &Monomial) -> Option<usize> {
        self.index.get(&(mask, m.clone())).copied()
    }

    /// Coordinates of an element `sum coeff * e_mask`, which must lie in this piece.
    pub fn vector_of(&self, a: &Ext) -> Result<BitVec> {
        let mut v = BitVec::zeros(self.len());
        for (&mask, p) in a {
            for m in p.terms() {
                let i = self
                    .index_of(mask, m)
                    .ok_or_else(|| Error::ConventionError("map is not homogeneous for the chosen gradings".into()))?;
                v.flip(i);
            }
        }
        Ok(v)
    }
}

/// A Koszul complex over a polynomial ring, split into graded pieces.
#[derive(Clone, Debug)]
pub struct GradedKoszul {
    pub nvars: usize,
    pub polys: Vec<PolyF2>,
    pub degrees: Vec<usize>,
    pub base: (i64, i64),
}

/// One Alexander grading of a Koszul complex: bases and differentials by exterior degree.
#[derive(Clone, Debug)]
pub struct KoszulPiece {
    pub alexander: i64,
    /// `bases[h]` spans `C_h(A)`.
    pub bases: Vec<PieceBasis>,
    /// `diffs[h]`: `C_h -> C_{h-1}` for `h >= 1`; `diffs[0]` is the zero map to nothing.
    pub diffs: Vec<GradedMatrix>,
}

impl GradedKoszul {
    pub fn from_quotient(q: &QuotientComplex) -> Self {
        GradedKoszul { nvars: q.nfree, polys: q.polys.clone(), degrees: q.degrees.clone(), base: q.base() }
    }

    pub fn from_full(v: &VertexComplex) -> Self {
        GradedKoszul {
            nvars: v.nvars,
            polys: v.polys(),
            degrees: v.factors.iter().map(|f| f.degree).collect(),
            base: v.base,
        }
    }

    pub fn rank(&self) -> usize {
        self.polys.len()
    }

    fn alexander_of(&self, mask: u64) -> i64 {
        self.base.1 - (0..self.rank()).filter(|i| mask >> i & 1 == 1).map(|i| self.degrees[i] as i64).sum::<i64>()
    }

    /// Maslov grading of homological degree `h` in any Alexander grading `a`.
    pub fn maslov(&self, h: usize, a: i64) -> i64 {
        self.base.0 - 2 * self.base.1 + h as i64 + 2 * a
    }

    pub fn piece_basis(&self, a: i64, h: usize) -> PieceBasis {
        let mut elements = Vec::new();
        for mask in 0..(1u64 << self.rank()) {
            if mask.count_ones() as usize != h {
                continue;
            }
            let deg = self.alexander_of(mask) - a;
            for m in graded_basis(self.nvars, deg) {
                elements.push((mask, m));
            }
        }
        let index = elements.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        PieceBasis { elements, index }
    }

    pub fn piece(&self, a: i64) -> Result<KoszulPiece> {
        let r = self.rank();
        let bases: Vec<PieceBasis> = (0..=r).map(|h| self.piece_basis(a, h)).collect();
        let mut diffs = vec![GradedMatrix::zeros(bases[0].len(), 0)];
        for h in 1..=r {
            let mut rows = Vec::with_capacity(bases[h].len());
            for (mask, m) in &bases[h].elements {
                let mut e = Ext::new();
                e.insert(*mask, PolyF2::monomial(m.clone()));
                rows.push(bases[h - 1].vector_of(&ext_differential(&self.polys, &e))?);
            }
            diffs.push(GradedMatrix::from_rows(bases[h - 1].len(), rows));
        }
        Ok(KoszulPiece { alexander: a, bases, diffs })
    }
}

impl KoszulPiece {
    /// `C_{h+1} -> C_h`, or an empty map at the top.
    pub fn incoming(&self, h: usize) -> GradedMatrix {
        if h + 1 < self.diffs.len() {
            self.diffs[h + 1].clone()
        } else {
            GradedMatrix::zeros(0, self.bases[h].len())
        }
    }

    pub fn outgoing(&self, h: usize) -> &GradedMatrix {
        &self.diffs[h]
    }
}

/// Matrix of a quotient edge map from `src` piece `(a, h)` to `tgt` piece `(a, h)`.
pub fn quotient_map_matrix(map: &QuotientMap, src: &PieceBasis, tgt: &PieceBasis) -> Result<GradedMatrix> {
    let mut rows = Vec::with_capacity(src.len());
    for (mask, m) in &src.elements {
        let img = &map.images[*mask as usize];
        let mut e = Ext::new();
        for (&tm, p) in img {
            ext_add(&mut e, tm, p.mul_monomial(m));
        }
        rows.push(tgt.vector_of(&e)?);
    }
    Ok(GradedMatrix::from_rows(tgt.len(), rows))
}

/// Matrix of multiplication by a ring element from piece `(a, h)` to `(a - deg, h)`.
pub fn multiplication_matrix(p: &PolyF2, src: &PieceBasis, tgt: &PieceBasis) -> Result<GradedMatrix> {
    let mut rows = Vec::with_capacity(src.len());
    for (mask, m) in &src.elements {
        let mut e = Ext::new();
        e.insert(*mask, p.mul_monomial(m));
        rows.push(tgt.vector_of(&e)?);
    }
    Ok(GradedMatrix::from_rows(tgt.len(), rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::{close_braid, parse_braid, resolve, Resolution};
    use crate::cycles::enumerate_cycles;

    fn u(n: usize, i: usize) -> PolyF2 {
        PolyF2::var(n, i - 1)
    }

    #[test]
    fn l_and_q_examples() {
        let v = Vertex::Singular { crossing: 0, out_left: 0, out_right: 1, in_left: 2, in_right: 3 };
        assert_eq!(l_of(&v, 4), u(4, 1).add(&u(4, 2)).add(&u(4, 3)).add(&u(4, 4)));
        assert_eq!(q_of(&v, 4).unwrap(), u(4, 1).mul(&u(4, 2)).add(&u(4, 3).mul(&u(4, 4))));
        let loop_out = Vertex::Singular { crossing: 0, out_left: 0, out_right: 0, in_left: 2, in_right: 3 };
        assert_eq!(q_of(&loop_out, 4).unwrap(), u(4, 1).pow(2).add(&u(4, 3).mul(&u(4, 4))));
        let same = Vertex::Singular { crossing: 0, out_left: 0, out_right: 1, in_left: 0, in_right: 1 };
        assert!(q_of(&same, 4).unwrap().is_zero());
        let b = Vertex::Bivalent(crate::braid::Bivalent {
            kind: BivalentKind::Insertion { index: 1, decorated: false },
            input: 1,
            output: 4,
        });
        assert_eq!(l_of(&b, 6), u(6, 2).add(&u(6, 5)));
        assert!(matches!(q_of(&b, 6), Err(Error::WrongValence)));
        let lp = Vertex::Bivalent(crate::braid::Bivalent {
            kind: BivalentKind::Insertion { index: 1, decorated: false },
            input: 0,
            output: 0,
        });
        assert!(l_of(&lp, 1).is_zero());
    }

    #[test]
    fn transition_map_examples() {
        let n = 4;
        let l = u(n, 1).add(&u(n, 2)).add(&u(n, 3)).add(&u(n, 4));
        let q = u(n, 1).mul(&u(n, 2)).add(&u(n, 3).mul(&u(n, 4)));
        let a = u(n, 1).add(&u(n, 3));
        let b = u(n, 2).add(&u(n, 4));
        let one = PolyF2::one(n);
        let t = vec![vec![one.clone(), one.clone()], vec![u(n, 2), u(n, 3)]];
        let map = koszul_map_from_transition(&[l.clone(), q.clone()], &[a.clone(), b.clone()], &t, &one).unwrap();
        map.verify_chain_map().unwrap();
        let top = map.apply_basis(0b11).unwrap();
        assert_eq!(top.get(&0b11).unwrap(), &u(n, 2).add(&u(n, 3)));

        let s = u(n, 2).add(&u(n, 3));
        let adj = vec![vec![u(n, 3), one.clone()], vec![u(n, 2), one.clone()]];
        let back = koszul_map_from_transition(&[a.clone(), b.clone()], &[l.clone(), q.clone()], &adj, &s).unwrap();
        back.verify_chain_map().unwrap();

        let id = koszul_map_from_transition(
            &[l.clone(), q.clone()],
            &[l.clone(), q.clone()],
            &[vec![one.clone(), PolyF2::zero(n)], vec![PolyF2::zero(n), one.clone()]],
            &one,
        )
        .unwrap();
        assert_eq!(id.apply_basis(0b11).unwrap().get(&0b11).unwrap(), &one);

        let bad = koszul_map_from_transition(&[l], &[a], &[vec![one.clone()]], &one);
        assert!(matches!(bad, Err(Error::NotAChainMap(_))));
    }

    #[test]
    fn build_examples() {
        let d = close_braid(&parse_braid("1", 2).unwrap());
        let s = resolve(&d, &Resolution::new(vec![false])).unwrap();
        let vc = build_vertex_complex(&s, &Cycle::empty(), 0).unwrap();
        let keys: Vec<FactorKey> = vc.factors.iter().map(|f| f.key).collect();
        assert_eq!(keys, vec![FactorKey::Quad(0), FactorKey::Lin(0)]);
        vc.check_d_squared().unwrap();

        let s1 = resolve(&d, &Resolution::new(vec![true])).unwrap();
        let vc = build_vertex_complex(&s1, &Cycle::empty(), 1).unwrap();
        assert_eq!(vc.factors.len(), 2);
        assert_eq!(vc.factors[0].poly, u(3, 1).add(&u(3, 2)));
        assert!(vc.factors[1].poly.is_zero());

        assert!(matches!(build_vertex_complex(&s, &Cycle::from_edges(&[0]), 0), Err(Error::InvalidCycle(_))));
    }

    #[test]
    fn all_edge_maps_are_chain_maps() {
        for (w, b) in [("1 1 1", 2), ("1 -2 1 -2", 3), ("-1 2 2", 3)] {
            let d = close_braid(&parse_braid(w, b).unwrap());
            let c = d.crossing_count();
            for idx in 0..d.cube_size() {
                let s = resolve(&d, &Resolution::from_index(c, idx)).unwrap();
                for k in 0..c {
                    if idx >> k & 1 == 1 {
                        continue;
                    }
                    let t = resolve(&d, &Resolution::from_index(c, idx | 1 << k)).unwrap();
                    let tc = enumerate_cycles(&t);
                    for z in enumerate_cycles(&s) {
                        if !tc.contains(&z) {
                            continue;
                        }
                        let src = build_vertex_complex(&s, &z, 0).unwrap();
                        let tgt = build_vertex_complex(&t, &z, 1).unwrap();
                        if let Some(m) = crossing_edge_map(&d, k, &src, &tgt).unwrap() {
                            m.verify_chain_map().unwrap();
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn loops_count() {
        let d = close_braid(&parse_braid("1", 2).unwrap());
        let s = resolve(&d, &Resolution::new(vec![false])).unwrap();
        assert_eq!(cycle_loops(&s, &Cycle::from_edges(&[2])), 1);
        assert_eq!(cycle_loops(&s, &Cycle::empty()), 0);
    }
}
