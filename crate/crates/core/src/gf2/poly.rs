//! Polynomials over F2 in a fixed number of variables.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Exponent vector. The derived order is lexicographic with `U1` most significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub Vec<u16>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming divisibility.
    fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial(other.0.iter().zip(&self.0).map(|(a, b)| a - b).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyF2 {
    nvars: usize,
    terms: BTreeSet<Monomial>,
}

impl PolyF2 {
    pub fn zero(nvars: usize) -> Self {
        PolyF2 { nvars, terms: BTreeSet::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::monomial(Monomial::one(nvars))
    }

    /// The variable with 0-based index `i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        Self::monomial(Monomial::var(nvars, i))
    }

    pub fn monomial(m: Monomial) -> Self {
        let nvars = m.0.len();
        let mut terms = BTreeSet::new();
        terms.insert(m);
        PolyF2 { nvars, terms }
    }

    /// Sum of the given variables, cancelling repeats.
    pub fn sum_of_vars(nvars: usize, vars: &[usize]) -> Self {
        let mut p = Self::zero(nvars);
        for &v in vars {
            p.add_monomial(Monomial::var(nvars, v));
        }
        p
    }

    pub fn from_monomials(nvars: usize, monomials: impl IntoIterator<Item = Monomial>) -> Self {
        let mut p = Self::zero(nvars);
        for m in monomials {
            p.add_monomial(m);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.iter().next().unwrap().degree() == 0
    }

    pub fn terms(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.terms.contains(m)
    }

    pub fn add_monomial(&mut self, m: Monomial) {
        if !self.terms.remove(&m) {
            self.terms.insert(m);
        }
    }

    pub fn add(&self, other: &PolyF2) -> PolyF2 {
        let mut r = self.clone();
        r.add_assign(other);
        r
    }

    pub fn add_assign(&mut self, other: &PolyF2) {
        for m in &other.terms {
            self.add_monomial(m.clone());
        }
    }

    pub fn mul(&self, other: &PolyF2) -> PolyF2 {
        let mut r = PolyF2::zero(self.nvars);
        for a in &self.terms {
            for b in &other.terms {
                r.add_monomial(a.mul(b));
            }
        }
        r
    }

    pub fn mul_monomial(&self, m: &Monomial) -> PolyF2 {
        PolyF2 { nvars: self.nvars, terms: self.terms.iter().map(|a| a.mul(m)).collect() }
    }

    pub fn pow(&self, k: usize) -> PolyF2 {
        let mut r = PolyF2::one(self.nvars);
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// `Some(d)` if every term has total degree `d`; `None` for zero or mixed.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let mut it = self.terms.iter().map(Monomial::degree);
        let d = it.next()?;
        it.all(|x| x == d).then_some(d)
    }

    fn leading(&self) -> Option<&Monomial> {
        self.terms.iter().next_back()
    }

    /// Exact quotient `self / divisor`; a nonzero remainder is an error.
    pub fn div_exact(&self, divisor: &PolyF2) -> Result<PolyF2> {
        let lead = divisor.leading().ok_or_else(|| Error::InternalError("division by zero polynomial".into()))?.clone();
        let mut rem = self.clone();
        let mut quot = PolyF2::zero(self.nvars);
        while let Some(lt) = rem.leading().cloned() {
            if !lead.divides(&lt) {
                return Err(Error::InternalError(format!("{self} is not divisible by {divisor}")));
            }
            let q = lead.quotient_of(&lt);
            rem.add_assign(&divisor.mul_monomial(&q));
            quot.add_monomial(q);
        }
        Ok(quot)
    }

    /// Ring map sending variable `i` to `images[i]`; all images share one variable count.
    pub fn substitute(&self, images: &[PolyF2]) -> PolyF2 {
        let target = images.first().map(|p| p.nvars).unwrap_or(0);
        let mut powers: HashMap<(usize, u16), PolyF2> = HashMap::new();
        let mut r = PolyF2::zero(target);
        for m in &self.terms {
            let mut t = PolyF2::one(target);
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let p = powers.entry((i, e)).or_insert_with(|| images[i].pow(e as usize));
                t = t.mul(p);
                if t.is_zero() {
                    break;
                }
            }
            r.add_assign(&t);
        }
        r
    }
}

impl fmt::Display for PolyF2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for m in self.terms.iter().rev() {
            let mut s = String::new();
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => s.push_str(&format!("U{}", i + 1)),
                    _ => s.push_str(&format!("U{}^{}", i + 1, e)),
                }
            }
            if s.is_empty() {
                s.push('1');
            }
            parts.push(s);
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Monomials of total degree `degree` in `nvars` variables, in descending lexicographic order.
pub fn graded_basis(nvars: usize, degree: i64) -> Vec<Monomial> {
    let mut out = Vec::new();
    if degree < 0 {
        return out;
    }
    if nvars == 0 {
        if degree == 0 {
            out.push(Monomial(vec![]));
        }
        return out;
    }
    let mut cur = vec![0u16; nvars];
    fill(&mut cur, 0, degree as usize, &mut out);
    out
}

fn fill(cur: &mut Vec<u16>, i: usize, left: usize, out: &mut Vec<Monomial>) {
    if i + 1 == cur.len() {
        cur[i] = left as u16;
        out.push(Monomial(cur.clone()));
        return;
    }
    for e in (0..=left).rev() {
        cur[i] = e as u16;
        fill(cur, i + 1, left - e, out);
    }
    cur[i] = 0;
}

/// Binomial coefficient, used for basis sizes.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}
