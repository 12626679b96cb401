//! The cube of resolutions as a filtered complex: E1 from per-cycle Koszul
//! homology, the induced differential on it, E2, gradings, Euler
//! characteristic and the U-module structure of E2.
//!
//! Gradings are tracked as `(M, A, cube)`. The cube differential has degree
//! `(-1, 0, +1)` and U has degree `(-2, -1, 0)`, so E1 splits into independent
//! complexes indexed by `A` and `M + cube` (the "diagonal").
//!
//! Variants:
//! * middle: the decorated diagram itself;
//! * reduced: the cone of `U_i` on the middle E1 page, the source copy moved by
//!   `(-1, -1, -1)` so that `U_i` joins the cube differential;
//! * unreduced: the decoration moved to a split unknot on the left whose
//!   variable is set to zero.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::braid::{close_braid, resolve, with_split_unknot, ClosedDiagram, EdgeId, Resolution};
use crate::cycles::{enumerate_cycles, is_admissible, Cycle};
use crate::error::{Error, Result};
use crate::gf2::{kernel, rank_f2, BitVec, GradedMatrix, Homology, PolyF2};
use crate::homfly::LaurentAQ;
use crate::koszul::{
    build_vertex_complex, crossing_edge_map, multiplication_matrix, quotient_edge_map, quotient_map_matrix,
    GradedKoszul, PieceBasis, QuotientComplex, QuotientMap, QuotientRing,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Unreduced,
    Middle,
    Reduced { edge: EdgeId },
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Unreduced => write!(f, "unreduced"),
            Variant::Middle => write!(f, "middle"),
            Variant::Reduced { edge } => write!(f, "reduced(edge {edge})"),
        }
    }
}

impl Serialize for Variant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Raw `(M, A, cube)` of a generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Gradings {
    pub maslov: i64,
    pub alexander: i64,
    pub cube: i64,
}

impl Gradings {
    /// Vertical grading. The trailing `+ 1` puts knots on even `a`-exponents.
    pub fn gr_v(&self, crossings: usize, strands: usize) -> i64 {
        2 * self.cube - crossings as i64 - strands as i64 + 1
    }

    pub fn gr_q(&self, crossings: usize, strands: usize) -> i64 {
        -2 * self.maslov + 2 * self.alexander - self.gr_v(crossings, strands)
    }

    pub fn gr_h(&self, crossings: usize, strands: usize) -> i64 {
        -2 * self.maslov + 4 * self.alexander - self.gr_v(crossings, strands)
    }

    /// `(i, j, k) = (-gr_q + gr_h, -gr_h, gr_v)`.
    pub fn triple(&self, crossings: usize, strands: usize) -> (i64, i64, i64) {
        let (q, h, v) = (self.gr_q(crossings, strands), self.gr_h(crossings, strands), self.gr_v(crossings, strands));
        (-q + h, -h, v)
    }
}

/// Global `(M, A)` normalization, doubled: `(n+ - b + 1, (w - b + 1) / 2)`
/// with `n+` the positive crossings, `w` the writhe and `b` the strands of
/// the diagram whose cube is built.
pub fn normalization_doubled(d: &ClosedDiagram) -> (i64, i64) {
    let b = d.strand_count() as i64;
    let pos = d.crossings().iter().filter(|c| c.positive).count() as i64;
    let w = d.word().writhe();
    (2 * (pos - b + 1), w - b + 1)
}

pub struct CubeCycle {
    pub cycle: Cycle,
    pub complex: QuotientComplex,
    pub graded: GradedKoszul,
}

pub struct CubeVertex {
    pub resolution: usize,
    pub cube: usize,
    /// Admissible cycles only.
    pub cycles: Vec<CubeCycle>,
}

/// A nonzero edge map between the same cycle at two adjacent vertices.
pub struct CubeEdge {
    pub src: usize,
    pub tgt: usize,
    pub crossing: usize,
    pub src_cycle: usize,
    pub tgt_cycle: usize,
    pub map: QuotientMap,
}

pub struct Cube {
    pub diagram: ClosedDiagram,
    pub ring: QuotientRing,
    pub vertices: Vec<CubeVertex>,
    pub edges: Vec<CubeEdge>,
    /// The module variable U.
    pub u: PolyF2,
}

impl Cube {
    /// Cube of the decorated diagram over `R / (crossing relations)`.
    pub fn decorated(d: &ClosedDiagram) -> Result<Cube> {
        Self::build(d, QuotientRing::new(d), d.decorated().output)
    }

    /// Cube of `d` plus a split unknot carrying the decoration, with the unknot's variable set to zero.
    pub fn split_unknot(d: &ClosedDiagram) -> Result<Cube> {
        let dd = close_braid(&with_split_unknot(d.word()));
        let ring = QuotientRing::reduced(&dd, dd.decorated().output)?;
        let u_edge = (0..dd.num_edges())
            .find(|&e| dd.edge_position(e) == 1)
            .ok_or_else(|| Error::InternalInvariantViolation("split diagram has no edge on the knot".into()))?;
        Self::build(&dd, ring, u_edge)
    }

    fn build(d: &ClosedDiagram, ring: QuotientRing, u_edge: EdgeId) -> Result<Cube> {
        let c = d.crossing_count();
        let vertices: Vec<CubeVertex> = (0..d.cube_size())
            .into_par_iter()
            .map(|idx| {
                let r = Resolution::from_index(c, idx);
                let cube = r.bits().iter().filter(|&&b| b).count();
                let s = resolve(d, &r)?;
                let mut cycles = Vec::new();
                for z in enumerate_cycles(&s).into_iter().filter(|z| is_admissible(z, d)) {
                    let full = build_vertex_complex(&s, &z, cube)?;
                    let complex = QuotientComplex::new(d, &s, &ring, full)?;
                    let graded = GradedKoszul::from_quotient(&complex);
                    cycles.push(CubeCycle { cycle: z, complex, graded });
                }
                Ok(CubeVertex { resolution: idx, cube, cycles })
            })
            .collect::<Result<_>>()?;

        let mut jobs = Vec::new();
        for v in &vertices {
            for k in 0..c {
                if v.resolution >> k & 1 == 1 {
                    continue;
                }
                let w = v.resolution | 1 << k;
                for (i, zc) in v.cycles.iter().enumerate() {
                    if let Some(j) = vertices[w].cycles.iter().position(|t| t.cycle == zc.cycle) {
                        jobs.push((v.resolution, w, k, i, j));
                    }
                }
            }
        }
        let edges: Vec<CubeEdge> = jobs
            .into_par_iter()
            .map(|(v, w, k, i, j)| {
                let src = &vertices[v].cycles[i].complex;
                let tgt = &vertices[w].cycles[j].complex;
                Ok(match crossing_edge_map(d, k, &src.full, &tgt.full)? {
                    Some(m) => Some(CubeEdge {
                        src: v,
                        tgt: w,
                        crossing: k,
                        src_cycle: i,
                        tgt_cycle: j,
                        map: quotient_edge_map(&m, src, tgt, &ring)?,
                    }),
                    None => None,
                })
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        let u = ring.reduce(&PolyF2::var(d.num_edges(), u_edge));
        Ok(Cube { diagram: d.clone(), ring, vertices, edges, u })
    }

    /// No generator of any vertex complex lies above this Alexander grading.
    pub fn top_alexander(&self) -> i64 {
        self.vertices.iter().flat_map(|v| v.cycles.iter().map(|z| z.graded.base.1)).max().unwrap_or(0)
    }

    /// `U_e` in the cube's ground ring.
    pub fn edge_variable(&self, e: EdgeId) -> Result<PolyF2> {
        if e >= self.diagram.num_edges() {
            return Err(Error::Config(format!("edge {e} out of range (diagram has {})", self.diagram.num_edges())));
        }
        Ok(self.ring.reduce(&PolyF2::var(self.diagram.num_edges(), e)))
    }
}

/// Homology of one vertex complex in one `(A, h)` piece.
pub struct E1Block {
    pub vertex: usize,
    pub cycle: usize,
    pub h: usize,
    pub gradings: Gradings,
    basis: PieceBasis,
    homology: Homology,
}

impl E1Block {
    pub fn dim(&self) -> usize {
        self.homology.dim()
    }
}

/// A cochain complex over F2 with chain groups at consecutive cube gradings from `first`.
pub struct CubeChain {
    pub first: i64,
    pub dims: Vec<usize>,
    /// `d[n]` maps group `n` to group `n + 1` (relative indices).
    pub d: Vec<GradedMatrix>,
    homology: Vec<Homology>,
}

impl CubeChain {
    fn new(first: i64, dims: Vec<usize>, d: Vec<GradedMatrix>, what: &dyn Fn() -> String) -> Result<CubeChain> {
        for n in 0..d.len().saturating_sub(1) {
            if !d[n].then(&d[n + 1]).is_zero() {
                return Err(Error::ConventionError(format!(
                    "d1 squared is nonzero at {} from cube grading {}",
                    what(),
                    first + n as i64
                )));
            }
        }
        let mut homology = Vec::with_capacity(dims.len());
        for n in 0..dims.len() {
            let d_in = if n == 0 { GradedMatrix::zeros(0, dims[0]) } else { d[n - 1].clone() };
            homology.push(Homology::compute(&d_in, &d[n])?);
        }
        Ok(CubeChain { first, dims, d, homology })
    }

    /// Chain group dimension at cube grading `n`, zero outside.
    pub fn dim_at(&self, n: i64) -> usize {
        self.rel(n).map_or(0, |r| self.dims[r])
    }

    pub fn homology_dim(&self, n: i64) -> usize {
        self.rel(n).map_or(0, |r| self.homology[r].dim())
    }

    pub fn homology_at(&self, n: i64) -> Option<&Homology> {
        self.rel(n).map(|r| &self.homology[r])
    }

    fn rel(&self, n: i64) -> Option<usize> {
        let r = n - self.first;
        (r >= 0 && (r as usize) < self.dims.len()).then_some(r as usize)
    }

    pub fn range(&self) -> std::ops::Range<i64> {
        self.first..self.first + self.dims.len() as i64
    }

    /// Differential out of cube grading `n`.
    pub fn d_at(&self, n: i64) -> Option<&GradedMatrix> {
        self.rel(n).map(|r| &self.d[r])
    }
}

/// One summand of the middle E1 page cut out by `A` and `M + cube`.
pub struct E1Complex {
    pub alexander: i64,
    pub diagonal: i64,
    /// Block indices (into the level) at each cube grading.
    pub blocks: Vec<Vec<usize>>,
    /// Offset of each block inside its chain group.
    offsets: BTreeMap<usize, usize>,
    pub chain: CubeChain,
}

/// Everything at one Alexander grading of the cube.
pub struct Level {
    pub alexander: i64,
    pub blocks: Vec<E1Block>,
    index: BTreeMap<(usize, usize, usize), usize>,
    pub complexes: Vec<E1Complex>,
}

impl Level {
    fn compute(cube: &Cube, a: i64) -> Result<Level> {
        let units: Vec<(usize, usize)> =
            cube.vertices.iter().flat_map(|v| (0..v.cycles.len()).map(move |i| (v.resolution, i))).collect();
        let per_unit: Vec<Vec<E1Block>> = units
            .par_iter()
            .map(|&(v, i)| {
                let vx = &cube.vertices[v];
                let g = &vx.cycles[i].graded;
                let piece = g.piece(a)?;
                let mut out = Vec::new();
                for h in 0..=g.rank() {
                    if piece.bases[h].is_empty() {
                        continue;
                    }
                    let homology = Homology::compute(&piece.incoming(h), piece.outgoing(h))?;
                    if homology.dim() > 0 {
                        out.push(E1Block {
                            vertex: v,
                            cycle: i,
                            h,
                            gradings: Gradings { maslov: g.maslov(h, a), alexander: a, cube: vx.cube as i64 },
                            basis: piece.bases[h].clone(),
                            homology,
                        });
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let blocks: Vec<E1Block> = per_unit.into_iter().flatten().collect();
        let index = blocks.iter().enumerate().map(|(k, b)| ((b.vertex, b.cycle, b.h), k)).collect();
        let mut level = Level { alexander: a, blocks, index, complexes: Vec::new() };
        level.complexes = level.assemble(cube)?;
        Ok(level)
    }

    fn assemble(&self, cube: &Cube) -> Result<Vec<E1Complex>> {
        let c = cube.diagram.crossing_count();
        let mut groups: BTreeMap<i64, Vec<Vec<usize>>> = BTreeMap::new();
        for (k, b) in self.blocks.iter().enumerate() {
            let diag = b.gradings.maslov + b.gradings.cube;
            groups.entry(diag).or_insert_with(|| vec![Vec::new(); c + 1])[b.gradings.cube as usize].push(k);
        }
        groups.into_par_iter().map(|(diagonal, blocks)| self.assemble_one(cube, diagonal, blocks)).collect()
    }

    fn assemble_one(&self, cube: &Cube, diagonal: i64, blocks: Vec<Vec<usize>>) -> Result<E1Complex> {
        let mut offsets = BTreeMap::new();
        let mut dims = Vec::with_capacity(blocks.len());
        for group in &blocks {
            let mut off = 0;
            for &k in group {
                offsets.insert(k, off);
                off += self.blocks[k].dim();
            }
            dims.push(off);
        }
        let len = blocks.len();
        let mut d1: Vec<GradedMatrix> =
            (0..len).map(|n| GradedMatrix::zeros(dims[n], if n + 1 < len { dims[n + 1] } else { 0 })).collect();
        for e in &cube.edges {
            let n = cube.vertices[e.src].cube;
            let rank = cube.vertices[e.src].cycles[e.src_cycle].graded.rank();
            for h in 0..=rank {
                let (Some(&si), Some(&ti)) =
                    (self.index.get(&(e.src, e.src_cycle, h)), self.index.get(&(e.tgt, e.tgt_cycle, h)))
                else {
                    continue;
                };
                let (Some(&so), Some(&to)) = (offsets.get(&si), offsets.get(&ti)) else { continue };
                let (sb, tb) = (&self.blocks[si], &self.blocks[ti]);
                let m = quotient_map_matrix(&e.map, &sb.basis, &tb.basis)?;
                for (r, rep) in sb.homology.reps().iter().enumerate() {
                    let coords = tb.homology.coordinates(&m.apply(rep)).map_err(|_| {
                        Error::ConventionError(format!("edge map at crossing {} does not preserve cycles", e.crossing))
                    })?;
                    for col in coords.ones() {
                        d1[n].flip(so + r, to + col);
                    }
                }
            }
        }
        let a = self.alexander;
        let chain = CubeChain::new(0, dims, d1, &|| format!("A = {a}, M + cube = {diagonal}"))?;
        Ok(E1Complex { alexander: a, diagonal, blocks, offsets, chain })
    }

    fn complex(&self, diagonal: i64) -> Option<&E1Complex> {
        self.complexes.iter().find(|x| x.diagonal == diagonal)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Stage {
    E1,
    E2,
}

/// Entry key. E2 entries have no vertex or cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PageKey {
    pub i: i64,
    pub j: i64,
    pub k: i64,
    pub vertex: Option<usize>,
    pub cycle: Option<Cycle>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Page {
    pub variant: Variant,
    pub stage: Stage,
    pub entries: BTreeMap<PageKey, usize>,
    /// Alexander range computed, in raw gradings.
    pub window: (i64, i64),
    /// `(M, A)` shift applied to every generator, doubled.
    pub offset_doubled: (i64, i64),
    pub crossings: usize,
    pub strands: usize,
}

impl Page {
    pub fn total_dim(&self) -> usize {
        self.entries.values().sum()
    }

    /// Dimensions with vertex and cycle collapsed.
    pub fn collapsed(&self) -> BTreeMap<(i64, i64, i64), usize> {
        let mut out = BTreeMap::new();
        for (k, &d) in &self.entries {
            *out.entry((k.i, k.j, k.k)).or_insert(0) += d;
        }
        out
    }

    /// Moves every generator by `(dM, dA)`, given doubled.
    pub fn shifted(&self, by_doubled: (i64, i64)) -> Page {
        let (m2, a2) = by_doubled;
        let mut entries = BTreeMap::new();
        for (key, &d) in &self.entries {
            // i = 2A, j = 2M - 4A + k
            entries.insert(PageKey { i: key.i + a2, j: key.j + m2 - 2 * a2, ..*key }, d);
        }
        Page { entries, offset_doubled: (self.offset_doubled.0 + m2, self.offset_doubled.1 + a2), ..self.clone() }
    }

    /// Lowest `i` at which the page is complete.
    pub fn exact_from_i(&self) -> i64 {
        2 * self.window.0 + self.offset_doubled.1
    }
}

/// Gradings, the (vertex, cycle) it came from if not collapsed, and a dimension.
type RawEntry = (Gradings, Option<(usize, Cycle)>, usize);

/// Incrementally computed spectral sequence over an Alexander window.
pub struct SpectralSequence {
    pub variant: Variant,
    pub cube: Cube,
    levels: BTreeMap<i64, Level>,
    /// Reduced variant: cone complexes by `(A, diagonal)`.
    cones: BTreeMap<i64, BTreeMap<i64, CubeChain>>,
    /// `U_i` for the reduced variant.
    reducer: Option<PolyF2>,
}

/// Empty E2 levels at the bottom before a reduced page counts as finished.
pub const EMPTY_MARGIN: usize = 3;
/// Consecutive levels on which U must be an isomorphism before the free part counts as found.
pub const STABLE_LEVELS: usize = 3;

impl SpectralSequence {
    pub fn new(d: &ClosedDiagram, variant: Variant) -> Result<Self> {
        if !d.word().is_knot() {
            return Err(Error::NotAKnot { components: d.word().component_count() });
        }
        let cube = match variant {
            Variant::Unreduced => Cube::split_unknot(d)?,
            _ => Cube::decorated(d)?,
        };
        let reducer = match variant {
            Variant::Reduced { edge } => Some(cube.edge_variable(edge)?),
            _ => None,
        };
        Ok(SpectralSequence { variant, cube, levels: BTreeMap::new(), cones: BTreeMap::new(), reducer })
    }

    pub fn top(&self) -> i64 {
        self.cube.top_alexander()
    }

    /// Lowest Alexander grading computed so far.
    pub fn bottom(&self) -> Option<i64> {
        self.levels.keys().next().copied()
    }

    pub fn level(&self, a: i64) -> Option<&Level> {
        self.levels.get(&a)
    }

    /// Compute every level in `[lo, top]`.
    pub fn extend_to(&mut self, lo: i64) -> Result<()> {
        let top = self.top();
        for a in (lo..=top).rev() {
            if !self.levels.contains_key(&a) {
                let l = Level::compute(&self.cube, a)?;
                self.levels.insert(a, l);
            }
        }
        if let Some(p) = self.reducer.clone() {
            for a in (lo..=top).rev() {
                if !self.cones.contains_key(&a) {
                    let cone = self.cone_level(&p, a)?;
                    self.cones.insert(a, cone);
                }
            }
        }
        Ok(())
    }

    /// Starting window: `c + b` in doubled units below the top.
    pub fn default_depth(&self) -> i64 {
        let d = &self.cube.diagram;
        ((d.crossing_count() + d.strand_count()) as i64 + 1) / 2
    }

    /// Window policy: the reduced page runs until `EMPTY_MARGIN` empty E2
    /// levels, the others until U is stable on `STABLE_LEVELS` levels.
    /// `depth` overrides the initial window; `max_depth` bounds the extension.
    pub fn fill_window(&mut self, depth: Option<i64>, max_depth: i64) -> Result<()> {
        let top = self.top();
        let depth = depth.unwrap_or_else(|| self.default_depth());
        self.extend_to(top - depth)?;
        loop {
            let lo = self.bottom().unwrap_or(top);
            let done = match self.variant {
                Variant::Reduced { .. } => {
                    top - lo + 1 >= EMPTY_MARGIN as i64
                        && (0..EMPTY_MARGIN as i64).all(|k| self.e2_dims_at(lo + k).is_empty())
                }
                _ => self.stable_levels()? >= STABLE_LEVELS,
            };
            if done {
                return Ok(());
            }
            if top - lo >= max_depth {
                return Err(Error::InsufficientWindow(format!(
                    "no stabilization within {max_depth} Alexander gradings below the top"
                )));
            }
            self.extend_to(lo - 1)?;
        }
    }

    fn e1_complex(&self, a: i64, diagonal: i64) -> Option<&E1Complex> {
        self.levels.get(&a).and_then(|l| l.complex(diagonal))
    }

    /// Multiplication by a linear `p` on middle E1, from `(A, diag)` at cube `n` to `(A - 1, diag - 2)`.
    fn e1_multiplication(&self, p: &PolyF2, a: i64, diagonal: i64, n: i64) -> Result<GradedMatrix> {
        let src = self.e1_complex(a, diagonal);
        let tgt = self.e1_complex(a - 1, diagonal - 2);
        let rows = src.map_or(0, |x| x.chain.dim_at(n));
        let cols = tgt.map_or(0, |x| x.chain.dim_at(n));
        let mut out = GradedMatrix::zeros(rows, cols);
        let (Some(src), Some(tgt)) = (src, tgt) else { return Ok(out) };
        if rows == 0 || cols == 0 {
            return Ok(out);
        }
        let (sl, tl) = (&self.levels[&a], &self.levels[&(a - 1)]);
        for &bi in &src.blocks[n as usize] {
            let sb = &sl.blocks[bi];
            let Some(&ti) = tl.index.get(&(sb.vertex, sb.cycle, sb.h)) else { continue };
            let Some(&to) = tgt.offsets.get(&ti) else { continue };
            let tb = &tl.blocks[ti];
            let m = multiplication_matrix(p, &sb.basis, &tb.basis)?;
            let so = src.offsets[&bi];
            for (r, rep) in sb.homology.reps().iter().enumerate() {
                for col in tb.homology.coordinates(&m.apply(rep))?.ones() {
                    out.flip(so + r, to + col);
                }
            }
        }
        Ok(out)
    }

    /// Cone of `p` on middle E1 at Alexander grading `a`. Position `n` holds
    /// the target at cube `n` and the source (level `a + 1`) at cube `n + 1`.
    fn cone_level(&self, p: &PolyF2, a: i64) -> Result<BTreeMap<i64, CubeChain>> {
        let mut diagonals: Vec<i64> = Vec::new();
        if let Some(l) = self.levels.get(&a) {
            diagonals.extend(l.complexes.iter().map(|x| x.diagonal));
        }
        if let Some(l) = self.levels.get(&(a + 1)) {
            diagonals.extend(l.complexes.iter().map(|x| x.diagonal - 2));
        }
        diagonals.sort();
        diagonals.dedup();
        let c = self.cube.diagram.crossing_count() as i64;
        let mut out = BTreeMap::new();
        for s in diagonals {
            let tgt = self.e1_complex(a, s);
            let src = self.e1_complex(a + 1, s + 2);
            let td = |n: i64| tgt.map_or(0, |x| x.chain.dim_at(n));
            let sd = |n: i64| src.map_or(0, |x| x.chain.dim_at(n + 1));
            let dims: Vec<usize> = (-1..=c).map(|n| td(n) + sd(n)).collect();
            let mut d = Vec::with_capacity(dims.len());
            for n in -1..=c {
                let mut m = GradedMatrix::zeros(td(n) + sd(n), if n < c { td(n + 1) + sd(n + 1) } else { 0 });
                if n < c {
                    if let Some(dt) = tgt.and_then(|t| t.chain.d_at(n)) {
                        copy_block(&mut m, dt, 0, 0);
                    }
                    if let Some(ds) = src.and_then(|t| t.chain.d_at(n + 1)) {
                        if n + 1 < c {
                            copy_block(&mut m, ds, td(n), td(n + 1));
                        }
                    }
                    if sd(n) > 0 && td(n + 1) > 0 {
                        let u = self.e1_multiplication(p, a + 1, s + 2, n + 1)?;
                        copy_block(&mut m, &u, td(n), 0);
                    }
                }
                d.push(m);
            }
            out.insert(s, CubeChain::new(-1, dims, d, &|| format!("reduced A = {a}, M + cube = {s}"))?);
        }
        Ok(out)
    }

    /// Nonzero E2 dimensions at `A`, by `(diagonal, cube)`.
    pub fn e2_dims_at(&self, a: i64) -> BTreeMap<(i64, i64), usize> {
        let mut out = BTreeMap::new();
        let mut add = |s: i64, chain: &CubeChain| {
            for n in chain.range() {
                let d = chain.homology_dim(n);
                if d > 0 {
                    out.insert((s, n), d);
                }
            }
        };
        if self.reducer.is_some() {
            for (&s, chain) in self.cones.get(&a).into_iter().flatten() {
                add(s, chain);
            }
        } else if let Some(l) = self.levels.get(&a) {
            for cx in &l.complexes {
                add(cx.diagonal, &cx.chain);
            }
        }
        out
    }

    /// Nonzero E2 dimensions of the middle page (or the split page for unreduced).
    fn plain_e2_dims_at(&self, a: i64) -> BTreeMap<(i64, i64), usize> {
        let mut out = BTreeMap::new();
        if let Some(l) = self.levels.get(&a) {
            for cx in &l.complexes {
                for n in cx.chain.range() {
                    let d = cx.chain.homology_dim(n);
                    if d > 0 {
                        out.insert((cx.diagonal, n), d);
                    }
                }
            }
        }
        out
    }

    fn raw_entries(&self, stage: Stage) -> Vec<RawEntry> {
        let mut out = Vec::new();
        match stage {
            Stage::E1 => {
                for level in self.levels.values() {
                    for b in &level.blocks {
                        let z = self.cube.vertices[b.vertex].cycles[b.cycle].cycle;
                        out.push((b.gradings, Some((b.vertex, z)), b.dim()));
                        // the moved source copy of the cone
                        if self.reducer.is_some() && self.levels.contains_key(&(level.alexander - 1)) {
                            let g = Gradings {
                                maslov: b.gradings.maslov - 1,
                                alexander: b.gradings.alexander - 1,
                                cube: b.gradings.cube - 1,
                            };
                            out.push((g, Some((b.vertex, z)), b.dim()));
                        }
                    }
                }
            }
            Stage::E2 => {
                for &a in self.levels.keys() {
                    for ((s, n), d) in self.e2_dims_at(a) {
                        out.push((Gradings { maslov: s - n, alexander: a, cube: n }, None, d));
                    }
                }
            }
        }
        out
    }

    /// Page in normalized gradings.
    pub fn page(&self, stage: Stage) -> Page {
        let d = &self.cube.diagram;
        let (c, b) = (d.crossing_count(), d.strand_count());
        let mut entries = BTreeMap::new();
        for (g, at, dim) in self.raw_entries(stage) {
            let (i, j, k) = g.triple(c, b);
            let key = PageKey { i, j, k, vertex: at.map(|x| x.0), cycle: at.map(|x| x.1) };
            *entries.entry(key).or_insert(0) += dim;
        }
        let raw = Page {
            variant: self.variant,
            stage,
            entries,
            window: (self.bottom().unwrap_or(self.top()), self.top()),
            offset_doubled: (0, 0),
            crossings: c,
            strands: b,
        };
        raw.shifted(normalization_doubled(d))
    }

    /// The E1 differentials: `(A, M + cube, cube, matrix)`, nonempty ones only.
    /// For the reduced variant these are the cone differentials.
    pub fn d1_family(&self) -> Vec<(i64, i64, i64, &GradedMatrix)> {
        let chains: Vec<(i64, i64, &CubeChain)> = if self.reducer.is_some() {
            self.cones.iter().flat_map(|(&a, m)| m.iter().map(move |(&s, ch)| (a, s, ch))).collect()
        } else {
            self.levels
                .values()
                .flat_map(|l| l.complexes.iter().map(move |cx| (l.alexander, cx.diagonal, &cx.chain)))
                .collect()
        };
        let mut out = Vec::new();
        for (a, s, chain) in chains {
            for (r, m) in chain.d.iter().enumerate() {
                if m.nrows() > 0 && m.ncols() > 0 {
                    out.push((a, s, chain.first + r as i64, m));
                }
            }
        }
        out
    }

    /// Matrix of `p` on the plain E2 page, from `(A, diagonal, n)` to `(A - 1, diagonal - 2, n)`.
    pub fn multiplication_on_e2(&self, p: &PolyF2, a: i64, diagonal: i64, n: i64) -> Result<GradedMatrix> {
        let hs = self.e1_complex(a, diagonal).and_then(|x| x.chain.homology_at(n));
        let ht = self.e1_complex(a - 1, diagonal - 2).and_then(|x| x.chain.homology_at(n));
        let Some(hs) = hs else { return Ok(GradedMatrix::zeros(0, ht.map_or(0, |h| h.dim()))) };
        let Some(ht) = ht else { return Ok(GradedMatrix::zeros(hs.dim(), 0)) };
        let u1 = self.e1_multiplication(p, a, diagonal, n)?;
        let rows = hs.reps().iter().map(|rep| ht.coordinates(&u1.apply(rep))).collect::<Result<Vec<BitVec>>>()?;
        Ok(GradedMatrix::from_rows(ht.dim(), rows))
    }

    /// U from level `a` to `a - 1` is bijective on the plain E2 page.
    fn u_iso(&self, a: i64) -> Result<bool> {
        if !self.levels.contains_key(&(a - 1)) {
            return Ok(false);
        }
        let src = self.plain_e2_dims_at(a);
        let tgt = self.plain_e2_dims_at(a - 1);
        let moved: BTreeMap<(i64, i64), usize> = src.iter().map(|(&(s, n), &d)| ((s - 2, n), d)).collect();
        if moved != tgt {
            return Ok(false);
        }
        for &(s, n) in src.keys() {
            let m = self.multiplication_on_e2(&self.cube.u, a, s, n)?;
            if rank_f2(&m) != m.nrows() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Consecutive levels, from the bottom of the window up, into which U is an isomorphism.
    pub fn stable_levels(&self) -> Result<usize> {
        let Some(lo) = self.bottom() else { return Ok(0) };
        let mut n = 0;
        while lo + (n as i64) < self.top() && self.u_iso(lo + n as i64 + 1)? {
            n += 1;
        }
        Ok(n)
    }
}

fn copy_block(dst: &mut GradedMatrix, src: &GradedMatrix, row0: usize, col0: usize) {
    for r in 0..src.nrows() {
        for c in src.row(r).ones() {
            dst.flip(row0 + r, col0 + c);
        }
    }
}

/// E1 over the Alexander window `[top - depth, top]`.
pub fn compute_e1(d: &ClosedDiagram, variant: Variant, depth: i64) -> Result<(SpectralSequence, Page)> {
    if depth < 0 {
        return Err(Error::EmptyWindow);
    }
    let mut ss = SpectralSequence::new(d, variant)?;
    let top = ss.top();
    ss.extend_to(top - depth)?;
    let page = ss.page(Stage::E1);
    if page.entries.is_empty() {
        return Err(Error::EmptyWindow);
    }
    Ok((ss, page))
}

/// E2 with the default window policy; `depth` overrides the starting window.
pub fn compute_e2(d: &ClosedDiagram, variant: Variant, depth: Option<i64>) -> Result<(SpectralSequence, Page)> {
    let mut ss = SpectralSequence::new(d, variant)?;
    let d = &ss.cube.diagram;
    let max = 8 * (d.crossing_count() + d.strand_count()) as i64 + 8 + depth.unwrap_or(0);
    ss.fill_window(depth, max)?;
    let page = ss.page(Stage::E2);
    Ok((ss, page))
}

/// `sum (-1)^((k - j) / 2) q^i a^j dim`, truncated to the window for infinite variants.
pub fn euler_characteristic(page: &Page) -> Result<LaurentAQ> {
    let mut chi = LaurentAQ::zero();
    for (key, &d) in &page.entries {
        if (key.k - key.j).rem_euclid(2) != 0 {
            return Err(Error::ConventionError(format!("odd k - j at (i, j, k) = ({}, {}, {})", key.i, key.j, key.k)));
        }
        let sign = if ((key.k - key.j) / 2).rem_euclid(2) == 0 { 1 } else { -1 };
        chi.add_term(key.j, key.i, sign * d as i64);
    }
    Ok(chi)
}

/// Terms of `p` with `q`-exponent at least `min_q`.
pub fn truncate_q(p: &LaurentAQ, min_q: i64) -> LaurentAQ {
    let mut out = LaurentAQ::zero();
    for (a, q, c) in p.terms() {
        if q >= min_q {
            out.add_term(a, q, c);
        }
    }
    out
}

/// Expected Euler characteristic of a variant, as a series in `q^-1` cut
/// below `min_q`: reduced `P`, middle `P / (1 - q^-2)`, unreduced
/// `P (a^-1 - a) q^-1 / (1 - q^-2)`. The unreduced sign comes from the extra
/// strand, which makes `k` odd.
pub fn expected_euler(reduced_homfly: &LaurentAQ, variant: Variant, min_q: i64) -> LaurentAQ {
    let series = |p: &LaurentAQ| {
        let top = p.terms().iter().map(|t| t.1).max().unwrap_or(min_q);
        let mut acc = LaurentAQ::zero();
        let mut k = 0;
        while top - 2 * k >= min_q {
            acc = acc.add(&p.shift(0, -2 * k));
            k += 1;
        }
        truncate_q(&acc, min_q)
    };
    match variant {
        Variant::Reduced { .. } => reduced_homfly.clone(),
        Variant::Middle => series(reduced_homfly),
        Variant::Unreduced => series(&reduced_homfly.mul(&LaurentAQ::a_minus_inverse()).scale(-1).shift(0, -1)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Calibration {
    /// Extra `(M, A)` shift, doubled, that makes the Euler characteristic match, if one exists.
    pub offset_doubled: Option<(i64, i64)>,
    pub matched: bool,
    /// `oracle - chi` after the shift (or before, if none was found).
    pub residual: LaurentAQ,
}

/// Global `(M, A)` shift taking `chi` to `oracle`.
///
/// A doubled shift `(m, a)` moves `q^i a^j` to `q^(i + a) a^(j + m - 2a)` with
/// sign `(-1)^((m - 2a) / 2)`, so it is read off the leading terms and then
/// checked on the whole polynomial.
pub fn find_offset(chi: &LaurentAQ, oracle: &LaurentAQ) -> Result<Calibration> {
    if chi.is_zero() {
        return Err(Error::AmbiguousCalibration(
            "the Euler characteristic vanishes, so no global offset is determined".into(),
        ));
    }
    let unmatched = || Calibration { offset_doubled: None, matched: false, residual: oracle.sub(chi) };
    let (Some(&(ca, cq, cc)), Some(&(oa, oq, oc))) = (chi.terms().last(), oracle.terms().last()) else {
        return Ok(unmatched());
    };
    let (da, dq) = (oa - ca, oq - cq);
    if da % 2 != 0 {
        return Ok(unmatched());
    }
    let sign = if (da / 2).rem_euclid(2) == 0 { 1 } else { -1 };
    if sign * cc != oc {
        return Ok(unmatched());
    }
    let residual = oracle.sub(&chi.shift(da, dq).scale(sign));
    Ok(Calibration { offset_doubled: Some((da + 2 * dq, dq)), matched: residual.is_zero(), residual })
}

/// Shift `page` so that its Euler characteristic equals `oracle`.
///
/// Relative offsets between cycles are already fixed by edge-map homogeneity
/// (a violation surfaces as `ConventionError` while building the cube), so
/// only the global offset is solved for.
pub fn calibrate_gradings(page: &Page, oracle: &LaurentAQ) -> Result<(Page, Calibration)> {
    let chi = euler_characteristic(page)?;
    let cal = find_offset(&chi, oracle)?;
    let page = match cal.offset_doubled {
        Some(o) => page.shifted(o),
        None => page.clone(),
    };
    Ok((page, cal))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UModuleReport {
    pub free_rank: usize,
    /// Rank of the free part by `(j, k)`, read off the stable bottom of the window.
    pub free_dims: BTreeMap<(i64, i64), usize>,
    /// Torsion dimension by `(i, j, k)`.
    pub torsion_dims: BTreeMap<(i64, i64, i64), usize>,
    /// Smallest `n` with `U^n` killing all torsion.
    pub torsion_exponent: usize,
    /// Consecutive Alexander gradings at the bottom on which U is an isomorphism.
    pub stable_levels: usize,
}

impl UModuleReport {
    pub fn torsion_total(&self) -> usize {
        self.torsion_dims.values().sum()
    }
}

/// Free rank and torsion of E2 as a module over `F2[U]`.
///
/// Torsion in grading `A` is the kernel of `U^(A - bottom)` there; this is all
/// of it once the bottom of the window is stable.
pub fn u_module_structure(ss: &SpectralSequence) -> Result<UModuleReport> {
    if ss.reducer.is_some() {
        return Err(Error::Config("module structure needs the middle or unreduced variant".into()));
    }
    let Some(lo) = ss.bottom() else { return Err(Error::EmptyWindow) };
    let stable = ss.stable_levels()?;
    if stable < STABLE_LEVELS {
        return Err(Error::InsufficientWindow(format!("U is stable on only {stable} levels")));
    }
    let d = &ss.cube.diagram;
    let (c, b) = (d.crossing_count(), d.strand_count());
    let (m2, a2) = normalization_doubled(d);
    let gr = |a: i64, s: i64, n: i64| {
        let (i, j, k) = Gradings { maslov: s - n, alexander: a, cube: n }.triple(c, b);
        (i + a2, j + m2 - 2 * a2, k)
    };

    let mut free_dims = BTreeMap::new();
    for (&(s, n), &dim) in &ss.plain_e2_dims_at(lo) {
        let (_, j, k) = gr(lo, s, n);
        *free_dims.entry((j, k)).or_insert(0) += dim;
    }
    let free_rank = free_dims.values().sum();

    let mut torsion_dims = BTreeMap::new();
    let mut exponent = 0;
    for a in lo + 1..=ss.top() {
        for (&(s, n), &dim) in &ss.plain_e2_dims_at(a) {
            let (tors, killed_by) = torsion_at(ss, a, s, n, lo, dim)?;
            if tors > 0 {
                *torsion_dims.entry(gr(a, s, n)).or_insert(0) += tors;
                exponent = exponent.max(killed_by);
            }
        }
    }
    Ok(UModuleReport { free_rank, free_dims, torsion_dims, torsion_exponent: exponent, stable_levels: stable })
}

/// Dimension of `ker U^(a - lo)` at `(a, s, cube)` and the first power reaching it.
fn torsion_at(ss: &SpectralSequence, a: i64, s: i64, n: i64, lo: i64, dim: usize) -> Result<(usize, usize)> {
    let mut acc = GradedMatrix::identity(dim);
    let mut kernels = Vec::new();
    for step in 0..(a - lo) {
        let m = ss.multiplication_on_e2(&ss.cube.u, a - step, s - 2 * step, n)?;
        acc = acc.then(&m);
        kernels.push(kernel(&acc).len());
    }
    let full = kernels.last().copied().unwrap_or(0);
    let first = if full == 0 { 0 } else { kernels.iter().position(|&k| k == full).map_or(0, |p| p + 1) };
    Ok((full, first))
}
