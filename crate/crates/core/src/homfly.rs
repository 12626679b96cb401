//! HOMFLY-PT polynomial of braid closures by skein recursion.
//!
//! Skein relation: `a P(D+) - a^-1 P(D-) = (q - q^-1) P(Ds)`, normalized so the
//! unknot has value 1. Values of intermediate links carry a power of
//! `z = q - q^-1` in the denominator, removed by exact division at the end.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::braid::{BraidWord, Letter};
use crate::error::{Error, Result};

/// Integer Laurent polynomial in `a` and `q`, keyed by `(a-exponent, q-exponent)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaurentAQ {
    coeffs: BTreeMap<(i64, i64), i64>,
}

impl LaurentAQ {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(1, 0, 0)
    }

    /// `c * a^i * q^j`
    pub fn monomial(c: i64, a: i64, q: i64) -> Self {
        let mut p = Self::zero();
        p.add_term(a, q, c);
        p
    }

    pub fn from_terms(terms: &[(i64, i64, i64)]) -> Self {
        let mut p = Self::zero();
        for &(a, q, c) in terms {
            p.add_term(a, q, c);
        }
        p
    }

    pub fn add_term(&mut self, a: i64, q: i64, c: i64) {
        if c == 0 {
            return;
        }
        let e = self.coeffs.entry((a, q)).or_insert(0);
        *e += c;
        if *e == 0 {
            self.coeffs.remove(&(a, q));
        }
    }

    pub fn coeff(&self, a: i64, q: i64) -> i64 {
        self.coeffs.get(&(a, q)).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Sorted `(a-exponent, q-exponent, coefficient)` triples.
    pub fn terms(&self) -> Vec<(i64, i64, i64)> {
        self.coeffs.iter().map(|(&(a, q), &c)| (a, q, c)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut r = self.clone();
        for (&(a, q), &c) in &other.coeffs {
            r.add_term(a, q, c);
        }
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, k: i64) -> Self {
        let mut r = Self::zero();
        for (&(a, q), &c) in &self.coeffs {
            r.add_term(a, q, c * k);
        }
        r
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut r = Self::zero();
        for (&(a1, q1), &c1) in &self.coeffs {
            for (&(a2, q2), &c2) in &other.coeffs {
                r.add_term(a1 + a2, q1 + q2, c1 * c2);
            }
        }
        r
    }

    /// Multiply by `a^da q^dq`.
    pub fn shift(&self, da: i64, dq: i64) -> Self {
        LaurentAQ { coeffs: self.coeffs.iter().map(|(&(a, q), &c)| ((a + da, q + dq), c)).collect() }
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut r = Self::one();
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// `q - q^-1`
    pub fn z() -> Self {
        Self::from_terms(&[(0, 1, 1), (0, -1, -1)])
    }

    /// `a - a^-1`
    pub fn a_minus_inverse() -> Self {
        Self::from_terms(&[(1, 0, 1), (-1, 0, -1)])
    }

    /// Exact division by `q - q^-1`.
    pub fn div_z(&self) -> Result<Self> {
        let mut by_a: BTreeMap<i64, BTreeMap<i64, i64>> = BTreeMap::new();
        for (&(a, q), &c) in &self.coeffs {
            by_a.entry(a).or_default().insert(q, c);
        }
        let mut out = Self::zero();
        for (a, row) in by_a {
            // n_e = Q_{e-1} - Q_{e+1}, solved from the top exponent down
            let top = *row.keys().next_back().unwrap();
            let bottom = *row.keys().next().unwrap();
            let mut quot: BTreeMap<i64, i64> = BTreeMap::new();
            let mut e = top;
            while e > bottom {
                let above = quot.get(&(e + 1)).copied().unwrap_or(0);
                let v = row.get(&e).copied().unwrap_or(0) + above;
                if v != 0 {
                    quot.insert(e - 1, v);
                }
                e -= 1;
            }
            for (q, c) in quot {
                out.add_term(a, q, c);
            }
        }
        if out.mul(&Self::z()) != *self {
            return Err(Error::InternalError(format!("{self} is not divisible by q - q^-1")));
        }
        Ok(out)
    }

    pub fn a_exponents(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.coeffs.keys().map(|&(a, _)| a).collect();
        v.dedup();
        v
    }
}

impl fmt::Display for LaurentAQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(a, q), &c) in self.coeffs.iter().rev() {
            let mut body = String::new();
            if a != 0 {
                body.push_str(&if a == 1 { "a".into() } else { format!("a^{a}") });
            }
            if q != 0 {
                body.push_str(&if q == 1 { "q".into() } else { format!("q^{q}") });
            }
            let mag = c.abs();
            let term = match (body.is_empty(), mag) {
                (true, _) => mag.to_string(),
                (false, 1) => body,
                (false, _) => format!("{mag}{body}"),
            };
            if first {
                write!(f, "{}{}", if c < 0 { "-" } else { "" }, term)?;
            } else {
                write!(f, " {} {}", if c < 0 { "-" } else { "+" }, term)?;
            }
            first = false;
        }
        Ok(())
    }
}

impl Serialize for LaurentAQ {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.terms().serialize(s)
    }
}

/// A link value `num / z^zpow`.
#[derive(Clone, Debug)]
struct Frac {
    num: LaurentAQ,
    zpow: u32,
}

impl Frac {
    fn raise(&self, zpow: u32) -> LaurentAQ {
        self.num.mul(&LaurentAQ::z().pow((zpow - self.zpow) as usize))
    }

    fn add(&self, other: &Frac) -> Frac {
        let zpow = self.zpow.max(other.zpow);
        Frac { num: self.raise(zpow).add(&other.raise(zpow)), zpow }
    }

    fn times(&self, p: &LaurentAQ) -> Frac {
        Frac { num: self.num.mul(p), zpow: self.zpow }
    }

    fn into_poly(self) -> Result<LaurentAQ> {
        let mut p = self.num;
        for _ in 0..self.zpow {
            p = p.div_z()?;
        }
        Ok(p)
    }
}

pub struct HomflyOracle {
    memo: Option<HashMap<(usize, Vec<i64>), Frac>>,
}

impl Default for HomflyOracle {
    fn default() -> Self {
        Self::new(true)
    }
}

impl HomflyOracle {
    pub fn new(memoize: bool) -> Self {
        HomflyOracle { memo: memoize.then(HashMap::new) }
    }

    /// Reduced HOMFLY-PT polynomial (unknot = 1) of the closure of `word`.
    pub fn reduced(&mut self, word: &BraidWord) -> Result<LaurentAQ> {
        self.value(word.strands(), word.letters()).into_poly()
    }

    /// `z^n * P(word)` as an exact Laurent polynomial; links need `n >= components - 1`.
    pub fn reduced_times_z(&mut self, word: &BraidWord, n: u32) -> Result<LaurentAQ> {
        let v = self.value(word.strands(), word.letters());
        if n >= v.zpow {
            Ok(v.raise(n))
        } else {
            Frac { num: v.num, zpow: v.zpow - n }.into_poly()
        }
    }

    fn value(&mut self, strands: usize, letters: &[Letter]) -> Frac {
        let key = (strands, letters.iter().map(|l| l.signed()).collect::<Vec<_>>());
        if let Some(v) = self.memo.as_ref().and_then(|m| m.get(&key)) {
            return v.clone();
        }
        let v = self.compute(strands, letters);
        if let Some(m) = self.memo.as_mut() {
            m.insert(key, v.clone());
        }
        v
    }

    fn compute(&mut self, strands: usize, letters: &[Letter]) -> Frac {
        let (components, bad) = descending_check(strands, letters);
        let Some(k) = bad else {
            // unlink: ((a - a^-1) / z)^(components - 1)
            return Frac { num: LaurentAQ::a_minus_inverse().pow(components - 1), zpow: (components - 1) as u32 };
        };
        let mut switched = letters.to_vec();
        switched[k] = switched[k].inverse();
        let mut smoothed = letters.to_vec();
        smoothed.remove(k);
        let p_switched = self.value(strands, &switched);
        let p_smoothed = self.value(strands, &smoothed);
        let z = LaurentAQ::z();
        let smooth_term = Frac { num: p_smoothed.num.mul(&z), zpow: p_smoothed.zpow };
        if letters[k].positive {
            // P+ = a^-2 P- + a^-1 z Ps
            p_switched.times(&LaurentAQ::monomial(1, -2, 0)).add(&smooth_term.times(&LaurentAQ::monomial(1, -1, 0)))
        } else {
            // P- = a^2 P+ - a z Ps
            p_switched.times(&LaurentAQ::monomial(1, 2, 0)).add(&smooth_term.times(&LaurentAQ::monomial(-1, 1, 0)))
        }
    }
}

/// Traverse components from the bottom of their leftmost position; return the
/// component count and the first crossing first met as an underpass, if any.
fn descending_check(strands: usize, letters: &[Letter]) -> (usize, Option<usize>) {
    let mut seen_pos = vec![false; strands];
    let mut seen_crossing = vec![false; letters.len()];
    let mut components = 0;
    for start in 0..strands {
        if seen_pos[start] {
            continue;
        }
        components += 1;
        let mut p = start;
        loop {
            seen_pos[p] = true;
            for (k, l) in letters.iter().enumerate() {
                let from_left = p + 1 == l.generator;
                let from_right = p == l.generator;
                if !from_left && !from_right {
                    continue;
                }
                let over = if l.positive { from_left } else { from_right };
                if !seen_crossing[k] {
                    seen_crossing[k] = true;
                    if !over {
                        return (0, Some(k));
                    }
                }
                p = if from_left { p + 1 } else { p - 1 };
            }
            if p == start {
                break;
            }
        }
    }
    (components, None)
}

/// Reduced HOMFLY-PT polynomial with a fresh memo table.
pub fn homfly_reduced(word: &BraidWord) -> Result<LaurentAQ> {
    HomflyOracle::new(true).reduced(word)
}

/// `(a, q) -> (a^-1, q^-1)`
pub fn apply_mirror(p: &LaurentAQ) -> LaurentAQ {
    let mut r = LaurentAQ::zero();
    for (a, q, c) in p.terms() {
        r.add_term(-a, -q, c);
    }
    r
}

/// `a -> a q`
pub fn substitute_aq(p: &LaurentAQ) -> LaurentAQ {
    let mut r = LaurentAQ::zero();
    for (a, q, c) in p.terms() {
        r.add_term(a, q + a, c);
    }
    r
}

#[derive(Clone, Debug, Serialize)]
pub struct EulerComparison {
    pub equal: bool,
    /// `chi - oracle`
    pub diff: LaurentAQ,
}

pub fn compare_euler(chi: &LaurentAQ, oracle: &LaurentAQ) -> EulerComparison {
    let diff = chi.sub(oracle);
    EulerComparison { equal: diff.is_zero(), diff }
}
