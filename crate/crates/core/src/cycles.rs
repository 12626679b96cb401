//! Cycles of a resolved diagram and their local behaviour at crossings.

use std::fmt;

use serde::Serialize;

use crate::braid::{ClosedDiagram, Crossing, EdgeId, SingularDiagram, Vertex};
use crate::error::{Error, Result};

/// A set of edges, stored as a bit mask over edge ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub struct Cycle {
    mask: u64,
}

impl Cycle {
    pub fn empty() -> Self {
        Cycle { mask: 0 }
    }

    pub fn from_mask(mask: u64) -> Self {
        Cycle { mask }
    }

    pub fn from_edges(edges: &[EdgeId]) -> Self {
        Cycle { mask: edges.iter().fold(0, |m, &e| m | (1u64 << e)) }
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        (self.mask >> e) & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn edges(&self) -> Vec<EdgeId> {
        (0..64).filter(|&e| self.contains(e)).collect()
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.edges().iter().map(|e| e.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LocalType {
    Empty,
    Z13,
    Z24,
    Z23,
    Z14,
    Z1234,
}

impl LocalType {
    pub fn is_turn(self) -> bool {
        matches!(self, LocalType::Z13 | LocalType::Z24)
    }
}

/// Check the three cycle conditions against a resolved diagram.
pub fn is_cycle(s: &SingularDiagram, z: &Cycle) -> bool {
    if s.num_edges() < 64 && z.mask >> s.num_edges() != 0 {
        return false;
    }
    for v in s.vertices() {
        let ins = v.inputs().iter().filter(|&&e| z.contains(e)).count();
        let outs = v.outputs().iter().filter(|&&e| z.contains(e)).count();
        if ins != outs {
            return false;
        }
        match v {
            Vertex::Singular { .. } if ins == 2 => return false,
            Vertex::Bivalent(b) if b.is_decorated() && ins > 0 => return false,
            _ => {}
        }
    }
    true
}

/// Local patterns allowed at a vertex, as position subsets of `Vertex::edges()`.
fn local_patterns(v: &Vertex) -> &'static [&'static [usize]] {
    // positions: singular [e1, e2, e3, e4]; bivalent [out, in]
    match v {
        Vertex::Singular { .. } => &[&[], &[0, 2], &[1, 3], &[1, 2], &[0, 3]],
        Vertex::Bivalent(b) if b.is_decorated() => &[&[]],
        Vertex::Bivalent(_) => &[&[], &[0, 1]],
    }
}

/// All cycles of `s`, sorted by edge list.
pub fn enumerate_cycles(s: &SingularDiagram) -> Vec<Cycle> {
    let vertices: Vec<(Vec<EdgeId>, &'static [&'static [usize]])> =
        s.vertices().iter().map(|v| (v.edges(), local_patterns(v))).collect();
    let mut out = Vec::new();
    dfs(&vertices, 0, 0, 0, &mut out);
    out.sort_by_key(|z| z.edges());
    out
}

fn dfs(
    vertices: &[(Vec<EdgeId>, &'static [&'static [usize]])],
    idx: usize,
    decided: u64,
    chosen: u64,
    out: &mut Vec<Cycle>,
) {
    if idx == vertices.len() {
        out.push(Cycle::from_mask(chosen));
        return;
    }
    let (edges, patterns) = &vertices[idx];
    'pattern: for pat in patterns.iter() {
        let mut dec = decided;
        let mut ch = chosen;
        for (pos, &e) in edges.iter().enumerate() {
            let want = pat.contains(&pos);
            let bit = 1u64 << e;
            if dec & bit != 0 {
                if (ch & bit != 0) != want {
                    continue 'pattern;
                }
            } else {
                dec |= bit;
                if want {
                    ch |= bit;
                }
            }
        }
        dfs(vertices, idx + 1, dec, ch, out);
    }
}

pub fn local_type(z: &Cycle, c: &Crossing) -> Result<LocalType> {
    let b: Vec<bool> = c.edges().iter().map(|&e| z.contains(e)).collect();
    match (b[0], b[1], b[2], b[3]) {
        (false, false, false, false) => Ok(LocalType::Empty),
        (true, false, true, false) => Ok(LocalType::Z13),
        (false, true, false, true) => Ok(LocalType::Z24),
        (false, true, true, false) => Ok(LocalType::Z23),
        (true, false, false, true) => Ok(LocalType::Z14),
        (true, true, true, true) => Ok(LocalType::Z1234),
        other => Err(Error::InternalInvariantViolation(format!(
            "edge pattern {other:?} of cycle {z} at a crossing violates flow conservation"
        ))),
    }
}

/// Local types at every crossing, in crossing order.
pub fn local_types(z: &Cycle, d: &ClosedDiagram) -> Result<Vec<LocalType>> {
    d.crossings().iter().map(|c| local_type(z, c)).collect()
}

/// No left turn at a positive crossing and no right turn at a negative crossing.
pub fn is_admissible(z: &Cycle, d: &ClosedDiagram) -> bool {
    d.crossings().iter().all(|c| match local_type(z, c) {
        Ok(LocalType::Z13) => !c.positive,
        Ok(LocalType::Z24) => c.positive,
        Ok(_) => true,
        Err(_) => false,
    })
}

pub fn turn_count(z: &Cycle, d: &ClosedDiagram) -> usize {
    d.crossings().iter().filter(|c| local_type(z, c).map(LocalType::is_turn).unwrap_or(false)).count()
}
