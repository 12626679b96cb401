//! Dense bit-packed linear algebra over F2.
//!
//! A linear map is stored by rows: row `r` is the image of source basis vector `r`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in idx {
            v.flip(i);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, b: bool) {
        let w = &mut self.words[i / 64];
        if b {
            *w |= 1 << (i % 64);
        } else {
            *w &= !(1 << (i % 64));
        }
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn first_one(&self) -> Option<usize> {
        for (k, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(k * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + t)
            })
        })
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect();
        write!(f, "[{s}]")
    }
}

/// A linear map between two graded pieces; `rows[r]` is the image of source vector `r`.
#[derive(Clone, PartialEq, Eq)]
pub struct GradedMatrix {
    ncols: usize,
    rows: Vec<BitVec>,
}

impl GradedMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        GradedMatrix { ncols, rows: vec![BitVec::zeros(ncols); nrows] }
    }

    pub fn identity(n: usize) -> Self {
        GradedMatrix { ncols: n, rows: (0..n).map(|i| BitVec::unit(n, i)).collect() }
    }

    pub fn from_rows(ncols: usize, rows: Vec<BitVec>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == ncols));
        GradedMatrix { ncols, rows }
    }

    pub fn from_dense(rows: &[Vec<u8>]) -> Self {
        let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
        let rows =
            rows.iter().map(|r| BitVec::from_bools(&r.iter().map(|&x| x & 1 == 1).collect::<Vec<_>>())).collect();
        GradedMatrix { ncols, rows }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn row(&self, r: usize) -> &BitVec {
        &self.rows[r]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, b: bool) {
        self.rows[r].set(c, b)
    }

    pub fn flip(&mut self, r: usize, c: usize) {
        self.rows[r].flip(c)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitVec::is_zero)
    }

    /// Image of a source vector.
    pub fn apply(&self, v: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.ncols);
        for i in v.ones() {
            out.xor_assign(&self.rows[i]);
        }
        out
    }

    /// `other ∘ self`: first apply `self`, then `other`.
    pub fn then(&self, other: &GradedMatrix) -> GradedMatrix {
        assert_eq!(self.ncols, other.nrows());
        GradedMatrix { ncols: other.ncols, rows: self.rows.iter().map(|r| other.apply(r)).collect() }
    }

    pub fn add(&self, other: &GradedMatrix) -> GradedMatrix {
        let mut m = self.clone();
        for (a, b) in m.rows.iter_mut().zip(&other.rows) {
            a.xor_assign(b);
        }
        m
    }

    pub fn transpose(&self) -> GradedMatrix {
        let mut t = GradedMatrix::zeros(self.ncols, self.nrows());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.ones() {
                t.set(c, r, true);
            }
        }
        t
    }
}

impl fmt::Debug for GradedMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GradedMatrix {}x{}", self.nrows(), self.ncols)?;
        for r in &self.rows {
            writeln!(f, "  {r:?}")?;
        }
        Ok(())
    }
}

/// Row-echelon basis of a subspace where every row carries a tag vector.
///
/// Reduction of a vector against the basis tracks which inserted rows were used,
/// which is how homology coordinates are read off.
#[derive(Clone, Debug)]
pub struct Echelon {
    ncols: usize,
    tag_len: usize,
    rows: Vec<(usize, BitVec, BitVec)>,
}

impl Echelon {
    pub fn new(ncols: usize, tag_len: usize) -> Self {
        Echelon { ncols, tag_len, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Reduce `v` in place, returning the accumulated tag.
    pub fn reduce(&self, v: &mut BitVec) -> BitVec {
        let mut tag = BitVec::zeros(self.tag_len);
        for (p, row, t) in &self.rows {
            if v.get(*p) {
                v.xor_assign(row);
                tag.xor_assign(t);
            }
        }
        tag
    }

    /// Insert `v` with `tag`; returns `None` if `v` was independent, otherwise
    /// the tag of the dependency (`tag` plus the tags used to reduce `v` to zero).
    pub fn insert(&mut self, mut v: BitVec, mut tag: BitVec) -> Option<BitVec> {
        let used = self.reduce(&mut v);
        tag.xor_assign(&used);
        match v.first_one() {
            Some(p) => {
                self.rows.push((p, v, tag));
                None
            }
            None => Some(tag),
        }
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        let mut v = v.clone();
        self.reduce(&mut v);
        v.is_zero()
    }
}

pub fn rank_f2(m: &GradedMatrix) -> usize {
    let mut e = Echelon::new(m.ncols(), 0);
    for r in m.rows() {
        e.insert(r.clone(), BitVec::zeros(0));
    }
    e.rank()
}

/// Basis of the source vectors mapped to zero.
pub fn kernel(m: &GradedMatrix) -> Vec<BitVec> {
    let n = m.nrows();
    let mut e = Echelon::new(m.ncols(), n);
    let mut out = Vec::new();
    for (i, r) in m.rows().iter().enumerate() {
        if let Some(dep) = e.insert(r.clone(), BitVec::unit(n, i)) {
            out.push(dep);
        }
    }
    out
}

/// Basis of the image.
pub fn image(m: &GradedMatrix) -> Vec<BitVec> {
    let mut e = Echelon::new(m.ncols(), 0);
    let mut out = Vec::new();
    for r in m.rows() {
        if e.insert(r.clone(), BitVec::zeros(0)).is_none() {
            out.push(r.clone());
        }
    }
    out
}

fn check_composable(d_in: &GradedMatrix, d_out: &GradedMatrix) -> Result<()> {
    if d_in.ncols() != d_out.nrows() {
        return Err(Error::InternalError(format!(
            "incompatible maps: {} columns into {} rows",
            d_in.ncols(),
            d_out.nrows()
        )));
    }
    if !d_in.then(d_out).is_zero() {
        return Err(Error::NotAComplex);
    }
    Ok(())
}

/// `dim ker(d_out) - rank(d_in)` at the middle spot of `A -d_in-> B -d_out-> C`.
pub fn homology_dims(d_in: &GradedMatrix, d_out: &GradedMatrix) -> Result<usize> {
    check_composable(d_in, d_out)?;
    Ok(d_out.nrows() - rank_f2(d_out) - rank_f2(d_in))
}

/// Homology at the middle spot with chosen representatives and a coordinate map.
#[derive(Clone, Debug)]
pub struct Homology {
    reps: Vec<BitVec>,
    echelon: Echelon,
}

impl Homology {
    pub fn compute(d_in: &GradedMatrix, d_out: &GradedMatrix) -> Result<Self> {
        check_composable(d_in, d_out)?;
        let z = kernel(d_out);
        let mut boundaries = Echelon::new(d_out.nrows(), 0);
        for r in d_in.rows() {
            boundaries.insert(r.clone(), BitVec::zeros(0));
        }
        let mut reps = Vec::new();
        let mut probe = boundaries.clone();
        for v in z {
            if probe.insert(v.clone(), BitVec::zeros(0)).is_none() {
                reps.push(v);
            }
        }
        let h = reps.len();
        let mut echelon = Echelon::new(d_out.nrows(), h);
        for r in d_in.rows() {
            echelon.insert(r.clone(), BitVec::zeros(h));
        }
        for (i, v) in reps.iter().enumerate() {
            echelon.insert(v.clone(), BitVec::unit(h, i));
        }
        Ok(Homology { reps, echelon })
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn reps(&self) -> &[BitVec] {
        &self.reps
    }

    /// Coordinates of the class of cycle `v`; errors if `v` is not in ker + im span.
    pub fn coordinates(&self, v: &BitVec) -> Result<BitVec> {
        let mut w = v.clone();
        let tag = self.echelon.reduce(&mut w);
        if !w.is_zero() {
            return Err(Error::InternalInvariantViolation("vector is not a cycle of this piece".into()));
        }
        Ok(tag)
    }
}
