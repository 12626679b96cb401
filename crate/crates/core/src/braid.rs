//! Braid words, their decorated closures, and complete resolutions.
//!
//! Braids are read bottom to top. Positions are numbered left to right from
//! zero; generator `i` (1-based, as in the text format) crosses positions
//! `i - 1` and `i`. At every crossing the four edges are labelled
//! `e1 = out_left`, `e2 = out_right`, `e3 = in_left`, `e4 = in_right`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Index of an edge of a closed diagram. Edge `i` carries the variable `U_{i+1}`.
pub type EdgeId = usize;

/// Largest edge count supported by the bit-set cycle representation.
pub const MAX_EDGES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Letter {
    /// 1-based generator index.
    pub generator: usize,
    pub positive: bool,
}

impl Letter {
    pub fn new(generator: usize, positive: bool) -> Self {
        Letter { generator, positive }
    }

    pub fn inverse(self) -> Self {
        Letter { positive: !self.positive, ..self }
    }

    pub fn signed(self) -> i64 {
        if self.positive {
            self.generator as i64
        } else {
            -(self.generator as i64)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BraidWord {
    strands: usize,
    letters: Vec<Letter>,
}

impl BraidWord {
    pub fn new(strands: usize, letters: Vec<Letter>) -> Result<Self> {
        if strands < 1 {
            return Err(Error::MalformedWord("strand count must be at least 1".into()));
        }
        for l in &letters {
            if l.generator < 1 || l.generator >= strands {
                return Err(Error::MalformedWord(format!(
                    "generator {} out of range for {} strands",
                    l.generator, strands
                )));
            }
        }
        Ok(BraidWord { strands, letters })
    }

    /// Build from signed integers (`+i` is σ_i, `-i` is σ_i⁻¹).
    pub fn from_signed(strands: usize, signed: &[i64]) -> Result<Self> {
        let mut letters = Vec::with_capacity(signed.len());
        for &s in signed {
            if s == 0 {
                return Err(Error::MalformedWord("generator index 0".into()));
            }
            letters.push(Letter::new(s.unsigned_abs() as usize, s > 0));
        }
        BraidWord::new(strands, letters)
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// c(D)
    pub fn crossing_count(&self) -> usize {
        self.letters.len()
    }

    pub fn writhe(&self) -> i64 {
        self.letters.iter().map(|l| if l.positive { 1 } else { -1 }).sum()
    }

    pub fn signed(&self) -> Vec<i64> {
        self.letters.iter().map(|l| l.signed()).collect()
    }

    /// Position at the top reached by the strand starting at each bottom position.
    pub fn permutation(&self) -> Vec<usize> {
        // track[p] = bottom position of the strand currently at position p
        let mut track: Vec<usize> = (0..self.strands).collect();
        for l in &self.letters {
            track.swap(l.generator - 1, l.generator);
        }
        let mut perm = vec![0; self.strands];
        for (top, &bottom) in track.iter().enumerate() {
            perm[bottom] = top;
        }
        perm
    }

    pub fn component_count(&self) -> usize {
        let perm = self.permutation();
        let mut seen = vec![false; self.strands];
        let mut count = 0;
        for start in 0..self.strands {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut p = start;
            while !seen[p] {
                seen[p] = true;
                p = perm[p];
            }
        }
        count
    }

    pub fn is_knot(&self) -> bool {
        self.component_count() == 1
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.signed().iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Parse whitespace-separated nonzero integers; the sign is the crossing sign.
pub fn parse_braid(text: &str, strands: usize) -> Result<BraidWord> {
    if strands < 1 {
        return Err(Error::MalformedWord("strand count must be at least 1".into()));
    }
    let mut signed = Vec::new();
    for tok in text.split_whitespace() {
        let v: i64 = tok.parse().map_err(|_| Error::MalformedWord(format!("not an integer: {tok:?}")))?;
        let g = v.unsigned_abs() as usize;
        if v == 0 || g >= strands {
            return Err(Error::MalformedWord(format!(
                "token {v} outside 1..={} in absolute value",
                strands.saturating_sub(1)
            )));
        }
        signed.push(v);
    }
    BraidWord::from_signed(strands, &signed)
}

/// Mirror image: every crossing sign flipped.
pub fn mirror(word: &BraidWord) -> BraidWord {
    BraidWord { strands: word.strands, letters: word.letters.iter().map(|l| l.inverse()).collect() }
}

/// The same braid with an extra strand on the left that no crossing touches.
/// Its closure is the original closure plus a split unknot.
pub fn with_split_unknot(word: &BraidWord) -> BraidWord {
    BraidWord {
        strands: word.strands + 1,
        letters: word.letters.iter().map(|l| Letter::new(l.generator + 1, l.positive)).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Crossing {
    pub positive: bool,
    pub out_left: EdgeId,
    pub out_right: EdgeId,
    pub in_left: EdgeId,
    pub in_right: EdgeId,
}

impl Crossing {
    /// `[e1, e2, e3, e4]`
    pub fn edges(&self) -> [EdgeId; 4] {
        [self.out_left, self.out_right, self.in_left, self.in_right]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BivalentKind {
    /// An insertion; index into the diagram's insertion list.
    Insertion { index: usize, decorated: bool },
    /// Smoothing bivalent joining `in_left -> out_left` of a crossing.
    SmoothLeft(usize),
    /// Smoothing bivalent joining `in_right -> out_right` of a crossing.
    SmoothRight(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bivalent {
    pub kind: BivalentKind,
    pub input: EdgeId,
    pub output: EdgeId,
}

impl Bivalent {
    pub fn is_decorated(&self) -> bool {
        matches!(self.kind, BivalentKind::Insertion { decorated: true, .. })
    }
}

/// The closure of a braid as an oriented graph with bivalent insertions.
#[derive(Clone, Debug, Serialize)]
pub struct ClosedDiagram {
    word: BraidWord,
    num_edges: usize,
    crossings: Vec<Crossing>,
    insertions: Vec<Bivalent>,
    /// Braid position each edge runs along.
    edge_position: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    Left(usize),
    Right(usize),
    Insertion(usize),
}

/// Close a braid, placing the decorated insertion at the bottom of the leftmost strand.
pub fn close_braid(word: &BraidWord) -> ClosedDiagram {
    close_braid_with_insertions(word, &[]).expect("no extra insertions cannot fail")
}

/// Close a braid with additional undecorated insertions at the bottom of the given positions.
pub fn close_braid_with_insertions(word: &BraidWord, extra: &[usize]) -> Result<ClosedDiagram> {
    let b = word.strands();
    for &p in extra {
        if p >= b {
            return Err(Error::MalformedWord(format!("insertion position {p} out of range")));
        }
    }
    let mut insertion_positions = vec![0usize];
    insertion_positions.extend_from_slice(extra);
    // Strands without crossings still need a vertex to carry their edge.
    for p in 0..b {
        let touched = word.letters().iter().any(|l| l.generator - 1 == p || l.generator == p);
        if !touched && !insertion_positions.contains(&p) {
            insertion_positions.push(p);
        }
    }

    let mut slots: Vec<Vec<Slot>> = vec![Vec::new(); b];
    for (idx, &p) in insertion_positions.iter().enumerate() {
        slots[p].push(Slot::Insertion(idx));
    }
    for (k, l) in word.letters().iter().enumerate() {
        slots[l.generator - 1].push(Slot::Left(k));
        slots[l.generator].push(Slot::Right(k));
    }

    let unset = usize::MAX;
    let mut crossings: Vec<Crossing> = word
        .letters()
        .iter()
        .map(|l| Crossing { positive: l.positive, out_left: unset, out_right: unset, in_left: unset, in_right: unset })
        .collect();
    let mut insertions: Vec<Bivalent> = insertion_positions
        .iter()
        .enumerate()
        .map(|(index, _)| Bivalent {
            kind: BivalentKind::Insertion { index, decorated: index == 0 },
            input: unset,
            output: unset,
        })
        .collect();

    let mut num_edges = 0;
    let mut edge_position = Vec::new();
    for (p, row) in slots.iter().enumerate() {
        let len = row.len();
        for t in 0..len {
            let id = num_edges;
            num_edges += 1;
            edge_position.push(p);
            match row[t] {
                Slot::Left(k) => crossings[k].out_left = id,
                Slot::Right(k) => crossings[k].out_right = id,
                Slot::Insertion(i) => insertions[i].output = id,
            }
            match row[(t + 1) % len] {
                Slot::Left(k) => crossings[k].in_left = id,
                Slot::Right(k) => crossings[k].in_right = id,
                Slot::Insertion(i) => insertions[i].input = id,
            }
        }
    }
    if num_edges > MAX_EDGES {
        return Err(Error::MalformedWord(format!("closure has {num_edges} edges; at most {MAX_EDGES} supported")));
    }
    Ok(ClosedDiagram { word: word.clone(), num_edges, crossings, insertions, edge_position })
}

impl ClosedDiagram {
    pub fn word(&self) -> &BraidWord {
        &self.word
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn insertions(&self) -> &[Bivalent] {
        &self.insertions
    }

    pub fn decorated(&self) -> &Bivalent {
        &self.insertions[0]
    }

    pub fn edge_position(&self, e: EdgeId) -> usize {
        self.edge_position[e]
    }

    /// c(D)
    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    /// b(D)
    pub fn strand_count(&self) -> usize {
        self.word.strands()
    }

    pub fn cube_size(&self) -> usize {
        1usize << self.crossings.len()
    }

    /// (in-degree sum, out-degree sum) over all vertices; both equal the edge count.
    pub fn degree_sums(&self) -> (usize, usize) {
        let n = 4 * self.crossings.len() / 2 + self.insertions.len();
        (n, n)
    }

    /// Number of times each edge appears as (head, tail) endpoint.
    pub fn endpoint_counts(&self) -> Vec<(usize, usize)> {
        let mut counts = vec![(0, 0); self.num_edges];
        for c in &self.crossings {
            counts[c.in_left].0 += 1;
            counts[c.in_right].0 += 1;
            counts[c.out_left].1 += 1;
            counts[c.out_right].1 += 1;
        }
        for b in &self.insertions {
            counts[b.input].0 += 1;
            counts[b.output].1 += 1;
        }
        counts
    }
}

/// A complete resolution: one bit per crossing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Resolution {
    bits: Vec<bool>,
}

impl Resolution {
    pub fn new(bits: Vec<bool>) -> Self {
        Resolution { bits }
    }

    /// Bit `k` of `index` is the resolution of crossing `k`.
    pub fn from_index(crossings: usize, index: usize) -> Self {
        Resolution { bits: (0..crossings).map(|k| (index >> k) & 1 == 1).collect() }
    }

    pub fn index(&self) -> usize {
        self.bits.iter().enumerate().map(|(k, &b)| (b as usize) << k).sum()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bit(&self, k: usize) -> Option<bool> {
        self.bits.get(k).copied()
    }
}

/// Sum of the resolution bits.
pub fn cube_grading(r: &Resolution) -> usize {
    r.bits.iter().filter(|&&b| b).count()
}

/// Whether crossing `c` is singularized under bit `bit`.
pub fn is_singular(positive: bool, bit: bool) -> bool {
    positive != bit
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Vertex {
    Singular { crossing: usize, out_left: EdgeId, out_right: EdgeId, in_left: EdgeId, in_right: EdgeId },
    Bivalent(Bivalent),
}

impl Vertex {
    pub fn inputs(&self) -> Vec<EdgeId> {
        match *self {
            Vertex::Singular { in_left, in_right, .. } => vec![in_left, in_right],
            Vertex::Bivalent(b) => vec![b.input],
        }
    }

    pub fn outputs(&self) -> Vec<EdgeId> {
        match *self {
            Vertex::Singular { out_left, out_right, .. } => vec![out_left, out_right],
            Vertex::Bivalent(b) => vec![b.output],
        }
    }

    pub fn edges(&self) -> Vec<EdgeId> {
        let mut v = self.outputs();
        v.extend(self.inputs());
        v
    }

    pub fn is_decorated(&self) -> bool {
        matches!(self, Vertex::Bivalent(b) if b.is_decorated())
    }
}

/// A complete resolution of a closed diagram.
#[derive(Clone, Debug, Serialize)]
pub struct SingularDiagram {
    num_edges: usize,
    vertices: Vec<Vertex>,
    singular: Vec<bool>,
    resolution: Resolution,
    crossings: Vec<Crossing>,
}

pub fn resolve(d: &ClosedDiagram, r: &Resolution) -> Result<SingularDiagram> {
    let mut vertices = Vec::new();
    let mut singular = Vec::with_capacity(d.crossings.len());
    for (k, c) in d.crossings.iter().enumerate() {
        let bit = r.bit(k).ok_or(Error::IncompleteResolution { crossing: k })?;
        if is_singular(c.positive, bit) {
            singular.push(true);
            vertices.push(Vertex::Singular {
                crossing: k,
                out_left: c.out_left,
                out_right: c.out_right,
                in_left: c.in_left,
                in_right: c.in_right,
            });
        } else {
            singular.push(false);
            vertices.push(Vertex::Bivalent(Bivalent {
                kind: BivalentKind::SmoothLeft(k),
                input: c.in_left,
                output: c.out_left,
            }));
            vertices.push(Vertex::Bivalent(Bivalent {
                kind: BivalentKind::SmoothRight(k),
                input: c.in_right,
                output: c.out_right,
            }));
        }
    }
    if r.bits().len() > d.crossings.len() {
        return Err(Error::InternalInvariantViolation(format!(
            "resolution has {} bits for {} crossings",
            r.bits().len(),
            d.crossings.len()
        )));
    }
    vertices.extend(d.insertions.iter().map(|b| Vertex::Bivalent(*b)));
    Ok(SingularDiagram {
        num_edges: d.num_edges,
        vertices,
        singular,
        resolution: r.clone(),
        crossings: d.crossings.clone(),
    })
}

impl SingularDiagram {
    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn resolution(&self) -> &Resolution {
        &self.resolution
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn is_singular(&self, crossing: usize) -> bool {
        self.singular[crossing]
    }

    pub fn four_valent_count(&self) -> usize {
        self.singular.iter().filter(|&&s| s).count()
    }

    pub fn bivalent_count(&self) -> usize {
        self.vertices.len() - self.four_valent_count()
    }
}
