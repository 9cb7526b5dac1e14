//! Numeric invariants of the Ree curve X(q) and symbolic derivative indices.
//!
//! Integers that can exceed 64 bits (genus, point count, L-polynomial
//! exponents) are held in `u128` with checked arithmetic; every quantity is
//! exact for `s <= MAX_S`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `s` for which q^2 fits in 64 bits.
pub const MAX_S: u32 = 9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReeParams {
    pub s: u32,
    pub q0: u64,
    pub q: u64,
    /// Genus.
    pub g: u128,
    /// Number of F_q-rational points.
    pub n_points: u128,
    /// Coefficients of m(t), constant term first: [q^2, 3qq0, 2q, 3q0, 1].
    pub m_coeffs: [u128; 5],
    /// m = m(1).
    pub m_value: u128,
    /// Exponent of (1 + 3q0 t + q t^2) in the L-polynomial.
    pub l_exp1: u128,
    /// Exponent of (1 + q t^2) in the L-polynomial.
    pub l_exp2: u128,
}

fn ck(v: Option<u128>) -> Result<u128> {
    v.ok_or_else(|| Error::Overflow("Ree invariant exceeds 128 bits".into()))
}

impl ReeParams {
    pub fn new(s: u32) -> Result<Self> {
        if s < 1 {
            return Err(Error::InvalidParameter("s must be at least 1".into()));
        }
        if s > MAX_S {
            return Err(Error::InvalidParameter(format!(
                "s must be at most {MAX_S}"
            )));
        }
        let q0 = 3u64.pow(s);
        let q = 3u64.pow(2 * s + 1);
        let (q0w, qw) = (q0 as u128, q as u128);
        // g = 3/2 q0 (q-1)(q+q0+1); (q-1) is even.
        let g = ck((3 * q0w)
            .checked_mul((qw - 1) / 2)
            .and_then(|v| v.checked_mul(qw + q0w + 1)))?;
        let n_points = ck(qw
            .checked_mul(qw)
            .and_then(|v| v.checked_mul(qw))
            .and_then(|v| v.checked_add(1)))?;
        let q2 = qw * qw;
        let m_coeffs = [q2, 3 * qw * q0w, 2 * qw, 3 * q0w, 1];
        let m_value = m_coeffs.iter().sum();
        let l_exp1 = ck(q0w.checked_mul(q2 - 1))?;
        let l_exp2 = ck(q0w
            .checked_mul(qw - 1)
            .and_then(|v| v.checked_mul(qw + 3 * q0w + 1))
            .map(|v| v / 2))?;
        Ok(Self {
            s,
            q0,
            q,
            g,
            n_points,
            m_coeffs,
            m_value,
            l_exp1,
            l_exp2,
        })
    }

    pub fn qq0(&self) -> u64 {
        self.q * self.q0
    }

    pub fn q2(&self) -> u64 {
        self.q * self.q
    }

    /// Exponent k with q = 3^k.
    pub fn q_log3(&self) -> u32 {
        2 * self.s + 1
    }

    /// m(t) evaluated at an integer.
    pub fn m_at(&self, t: u128) -> u128 {
        self.m_coeffs
            .iter()
            .rev()
            .fold(0u128, |acc, &c| acc * t + c)
    }

    /// Checks every stated invariant, returning the first violation.
    pub fn check_invariants(&self) -> Result<()> {
        let (q0, q) = (self.q0 as u128, self.q as u128);
        let bad = |what: &str| Err(Error::AuditMismatch(what.into()));
        if 2 * self.g != 3 * q0 * (q - 1) * (q + q0 + 1) {
            return bad("genus");
        }
        if self.n_points != q * q * q + 1 {
            return bad("point count");
        }
        if self.m_value != 1 + 3 * q0 + 2 * q + 3 * q * q0 + q * q {
            return bad("m value");
        }
        if self.m_at(1) != self.m_value {
            return bad("m(1)");
        }
        if 2 * self.l_exp1 + 2 * self.l_exp2 != 2 * self.g {
            return bad("L-polynomial degree");
        }
        // m(t) = (t^2 + 3q0 t + q)(t^2 + q)
        let a = [q, 3 * q0, 1];
        let b = [q, 0, 1];
        let mut prod = [0u128; 5];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        if prod != self.m_coeffs {
            return bad("m(t) factorisation");
        }
        Ok(())
    }
}

/// A derivative index written as `a*qq0 + b*q + c*q0 + d`, or the atom q^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymbolicIndex {
    Lin { a: u8, b: u8, c: u8, d: u8 },
    Q2,
}

impl SymbolicIndex {
    pub const fn new(a: u8, b: u8, c: u8, d: u8) -> Self {
        SymbolicIndex::Lin { a, b, c, d }
    }

    pub const ZERO: Self = Self::new(0, 0, 0, 0);
    pub const ONE: Self = Self::new(0, 0, 0, 1);

    pub fn value(&self, p: &ReeParams) -> u64 {
        match *self {
            SymbolicIndex::Lin { a, b, c, d } => {
                a as u64 * p.qq0() + b as u64 * p.q + c as u64 * p.q0 + d as u64
            }
            SymbolicIndex::Q2 => p.q2(),
        }
    }

    /// Writes `n` in the canonical quadruple form when `s` is large enough
    /// for the mixed-radix digits to be unique (s >= 2). Returns `None` when
    /// no quadruple with a <= 6, b <= 3, c <= 3, d <= 1 represents it.
    pub fn decompose(n: u64, p: &ReeParams) -> Option<Self> {
        if n == p.q2() {
            return Some(SymbolicIndex::Q2);
        }
        let a = n / p.qq0();
        let r = n % p.qq0();
        let b = r / p.q;
        let r = r % p.q;
        let c = r / p.q0;
        let d = r % p.q0;
        if a <= 6 && b <= 3 && c <= 3 && d <= 1 {
            Some(Self::new(a as u8, b as u8, c as u8, d as u8))
        } else {
            None
        }
    }

    /// Plain-text label, e.g. `3qq0+2q+3q0+1` or `q^2`.
    pub fn label(&self) -> String {
        self.to_string()
    }

    /// LaTeX label in the style of printed tables, e.g. `3qq_0+q+1`.
    pub fn latex(&self) -> String {
        self.to_string().replace("q0", "q_0")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let t = t.replace("q_0", "q0").replace("q²", "q^2");
        if t == "q^2" {
            return Ok(SymbolicIndex::Q2);
        }
        let bad = || Error::InvalidParameter(format!("cannot parse index '{text}'"));
        let (mut a, mut b, mut c, mut d) = (0u8, 0u8, 0u8, 0u8);
        for term in t.split('+') {
            let split = term
                .find(|ch: char| !ch.is_ascii_digit())
                .unwrap_or(term.len());
            let (num, sym) = term.split_at(split);
            let coef: u8 = if num.is_empty() {
                1
            } else {
                num.parse().map_err(|_| bad())?
            };
            match sym {
                "qq0" => a += coef,
                "q" => b += coef,
                "q0" => c += coef,
                "" => d += coef,
                _ => return Err(bad()),
            }
        }
        Ok(Self::new(a, b, c, d))
    }

    /// Sort key that agrees with numeric order for every s >= 2.
    fn key(&self) -> (u8, u8, u8, u8, u8) {
        match *self {
            SymbolicIndex::Lin { a, b, c, d } => (0, a, b, c, d),
            SymbolicIndex::Q2 => (1, 0, 0, 0, 0),
        }
    }
}

impl PartialOrd for SymbolicIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SymbolicIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for SymbolicIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b, c, d) = match *self {
            SymbolicIndex::Q2 => return write!(f, "q^2"),
            SymbolicIndex::Lin { a, b, c, d } => (a, b, c, d),
        };
        let mut parts = Vec::new();
        for (coef, sym) in [(a, "qq0"), (b, "q"), (c, "q0")] {
            match coef {
                0 => {}
                1 => parts.push(sym.to_string()),
                n => parts.push(format!("{n}{sym}")),
            }
        }
        if d > 0 || parts.is_empty() {
            parts.push(d.to_string());
        }
        write!(f, "{}", parts.join("+"))
    }
}

/// True when distinct symbolic indices evaluate to distinct integers.
pub fn indices_injective<'a, I>(indices: I, p: &ReeParams) -> bool
where
    I: IntoIterator<Item = &'a SymbolicIndex>,
{
    let mut seen = BTreeSet::new();
    let mut distinct = BTreeSet::new();
    for idx in indices {
        if distinct.insert(*idx) && !seen.insert(idx.value(p)) {
            return false;
        }
    }
    true
}
