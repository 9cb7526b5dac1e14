//! Dense univariate polynomials over GF(3) in two bitplanes.
//!
//! Bit `i` of `lo` marks coefficient 1 at `x^i`, bit `i` of `hi` marks
//! coefficient 2. The word vectors never carry trailing zero words, so
//! structural equality is polynomial equality.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::field::{trit_add, FieldContext, FieldElement};
use crate::hasse::binom_mod3;

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Poly3 {
    lo: Vec<u64>,
    hi: Vec<u64>,
}

impl Poly3 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn x() -> Self {
        Self::monomial(1, 1)
    }

    pub fn constant(c: u8) -> Self {
        Self::monomial(0, c)
    }

    /// `c * x^e`.
    pub fn monomial(e: u64, c: u8) -> Self {
        let mut p = Self::zero();
        p.set_coeff(e, c);
        p
    }

    /// Sums the given terms; repeated exponents accumulate.
    pub fn from_terms<I: IntoIterator<Item = (u64, u8)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            let old = p.coeff(e);
            p.set_coeff(e, old + c);
        }
        p
    }

    /// Coefficients from the constant term upwards.
    pub fn from_coeffs(coeffs: &[u8]) -> Self {
        Self::from_terms(coeffs.iter().enumerate().map(|(e, &c)| (e as u64, c)))
    }

    pub fn is_zero(&self) -> bool {
        self.lo.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.lo.len() == 1 && self.lo[0] == 1 && self.hi[0] == 0
    }

    /// Number of 64-bit words per plane.
    pub fn words(&self) -> usize {
        self.lo.len()
    }

    pub fn degree(&self) -> Option<u64> {
        let n = self.lo.len();
        if n == 0 {
            return None;
        }
        let top = self.lo[n - 1] | self.hi[n - 1];
        Some((n as u64 - 1) * 64 + 63 - top.leading_zeros() as u64)
    }

    /// Exponent of the lowest nonzero term.
    pub fn valuation(&self) -> Option<u64> {
        for (i, (l, h)) in self.lo.iter().zip(&self.hi).enumerate() {
            let w = l | h;
            if w != 0 {
                return Some(i as u64 * 64 + w.trailing_zeros() as u64);
            }
        }
        None
    }

    /// Number of nonzero coefficients.
    pub fn nnz(&self) -> usize {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (l | h).count_ones() as usize)
            .sum()
    }

    pub fn coeff(&self, e: u64) -> u8 {
        let (w, b) = ((e / 64) as usize, e % 64);
        if w >= self.lo.len() {
            return 0;
        }
        ((self.lo[w] >> b) & 1) as u8 | ((((self.hi[w] >> b) & 1) as u8) << 1)
    }

    pub fn leading_coeff(&self) -> u8 {
        self.degree().map_or(0, |d| self.coeff(d))
    }

    fn set_coeff(&mut self, e: u64, c: u8) {
        let (w, b) = ((e / 64) as usize, e % 64);
        let c = c % 3;
        if w >= self.lo.len() {
            if c == 0 {
                return;
            }
            self.lo.resize(w + 1, 0);
            self.hi.resize(w + 1, 0);
        }
        let mask = 1u64 << b;
        self.lo[w] &= !mask;
        self.hi[w] &= !mask;
        match c {
            1 => self.lo[w] |= mask,
            2 => self.hi[w] |= mask,
            _ => {}
        }
        self.trim();
    }

    fn trim(&mut self) {
        while let (Some(&l), Some(&h)) = (self.lo.last(), self.hi.last()) {
            if l | h != 0 {
                break;
            }
            self.lo.pop();
            self.hi.pop();
        }
    }

    /// Nonzero terms `(exponent, coefficient)` in increasing exponent order.
    pub fn terms(&self) -> Terms<'_> {
        Terms {
            p: self,
            word: 0,
            rest: self.lo.first().map_or(0, |l| l | self.hi[0]),
        }
    }

    pub fn scale(&self, c: u8) -> Self {
        match c % 3 {
            0 => Self::zero(),
            1 => self.clone(),
            _ => -self,
        }
    }

    /// `self += c * x^shift * other`.
    pub fn add_scaled_shifted(&mut self, other: &Poly3, shift: u64, c: u8) {
        let c = c % 3;
        if c == 0 || other.is_zero() {
            return;
        }
        let (olo, ohi) = if c == 1 {
            (&other.lo, &other.hi)
        } else {
            (&other.hi, &other.lo)
        };
        let ws = (shift / 64) as usize;
        let bs = (shift % 64) as u32;
        let n = other.lo.len();
        let need = ws + n + usize::from(bs > 0);
        if self.lo.len() < need {
            self.lo.resize(need, 0);
            self.hi.resize(need, 0);
        }
        if bs == 0 {
            for i in 0..n {
                let (l, h) = trit_add(self.lo[ws + i], self.hi[ws + i], olo[i], ohi[i]);
                self.lo[ws + i] = l;
                self.hi[ws + i] = h;
            }
        } else {
            for i in 0..=n {
                let cur_lo = if i < n { olo[i] << bs } else { 0 };
                let cur_hi = if i < n { ohi[i] << bs } else { 0 };
                let prev_lo = if i > 0 { olo[i - 1] >> (64 - bs) } else { 0 };
                let prev_hi = if i > 0 { ohi[i - 1] >> (64 - bs) } else { 0 };
                let (l, h) = trit_add(
                    self.lo[ws + i],
                    self.hi[ws + i],
                    cur_lo | prev_lo,
                    cur_hi | prev_hi,
                );
                self.lo[ws + i] = l;
                self.hi[ws + i] = h;
            }
        }
        self.trim();
    }

    pub fn add_assign_ref(&mut self, other: &Poly3) {
        self.add_scaled_shifted(other, 0, 1);
    }

    pub fn sub_assign_ref(&mut self, other: &Poly3) {
        self.add_scaled_shifted(other, 0, 2);
    }

    /// `c * x^shift * self`.
    pub fn mul_monomial(&self, shift: u64, c: u8) -> Self {
        let mut out = Self::zero();
        out.add_scaled_shifted(self, shift, c);
        out
    }

    fn mul_ref(&self, other: &Poly3) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        // Walk the sparser factor term by term, shifting the denser one.
        let (sparse, dense) = if self.nnz() <= other.nnz() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = Self::zero();
        let cap = sparse.lo.len() + dense.lo.len() + 1;
        out.lo.reserve(cap);
        out.hi.reserve(cap);
        for (e, c) in sparse.terms() {
            out.add_scaled_shifted(dense, e, c);
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            let digit = e % 3;
            if digit == 1 {
                acc = &acc * &base;
            } else if digit == 2 {
                acc = &(&acc * &base) * &base;
            }
            e /= 3;
            if e > 0 {
                base = base.frobenius(1);
            }
        }
        acc
    }

    /// `self^(3^k)`: exponents scale by `3^k`, coefficients are fixed.
    pub fn frobenius(&self, k: u32) -> Self {
        if k == 0 || self.is_zero() {
            return self.clone();
        }
        let f = 3u64.pow(k);
        let mut out = Self::zero();
        let top = self.degree().unwrap() * f;
        let w = (top / 64) as usize + 1;
        out.lo.resize(w, 0);
        out.hi.resize(w, 0);
        for (e, c) in self.terms() {
            let t = e * f;
            let (wi, b) = ((t / 64) as usize, t % 64);
            if c == 1 {
                out.lo[wi] |= 1 << b;
            } else {
                out.hi[wi] |= 1 << b;
            }
        }
        out.trim();
        out
    }

    /// Hasse derivative `D^i` with respect to x.
    pub fn hasse(&self, i: u64) -> Self {
        if i == 0 {
            return self.clone();
        }
        let mut out = Self::zero();
        let Some(deg) = self.degree() else { return out };
        if deg < i {
            return out;
        }
        let w = ((deg - i) / 64) as usize + 1;
        out.lo.resize(w, 0);
        out.hi.resize(w, 0);
        for (e, c) in self.terms() {
            if e < i {
                continue;
            }
            let b = binom_mod3(e, i);
            if b == 0 {
                continue;
            }
            let t = e - i;
            let (wi, bit) = ((t / 64) as usize, t % 64);
            if (b * c) % 3 == 1 {
                out.lo[wi] |= 1 << bit;
            } else {
                out.hi[wi] |= 1 << bit;
            }
        }
        out.trim();
        out
    }

    /// Division with remainder; `None` when the divisor is zero.
    pub fn div_rem(&self, d: &Poly3) -> Option<(Poly3, Poly3)> {
        let dd = d.degree()?;
        // leading coefficient is its own inverse in GF(3)
        let inv = d.leading_coeff();
        let mut r = self.clone();
        let mut quo = Self::zero();
        while let Some(rd) = r.degree() {
            if rd < dd {
                break;
            }
            let c = (r.leading_coeff() * inv) % 3;
            let shift = rd - dd;
            quo.set_coeff(shift, c);
            r.add_scaled_shifted(d, shift, 3 - c);
        }
        Some((quo, r))
    }

    /// Exact quotient, or `None` when `d` does not divide `self`.
    pub fn exact_div(&self, d: &Poly3) -> Option<Poly3> {
        let (q, r) = self.div_rem(d)?;
        r.is_zero().then_some(q)
    }

    /// Monic greatest common divisor.
    pub fn gcd(a: &Poly3, b: &Poly3) -> Poly3 {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).unwrap().1;
            a = b;
            b = r;
        }
        let lc = a.leading_coeff();
        a.scale(lc)
    }

    /// Evaluates at a point of GF(3^m).
    pub fn eval(&self, ctx: &FieldContext, x0: FieldElement) -> FieldElement {
        let mut acc = ctx.zero();
        let mut pow = ctx.one();
        let mut at = 0u64;
        for (e, c) in self.terms() {
            pow = ctx.mul(pow, ctx.pow_u64(x0, e - at));
            at = e;
            acc = ctx.add(acc, ctx.scale(pow, c));
        }
        acc
    }
}

pub struct Terms<'a> {
    p: &'a Poly3,
    word: usize,
    rest: u64,
}

impl Iterator for Terms<'_> {
    type Item = (u64, u8);

    fn next(&mut self) -> Option<(u64, u8)> {
        loop {
            if self.rest != 0 {
                let b = self.rest.trailing_zeros();
                self.rest &= self.rest - 1;
                let c = if (self.p.lo[self.word] >> b) & 1 != 0 {
                    1
                } else {
                    2
                };
                return Some((self.word as u64 * 64 + b as u64, c));
            }
            self.word += 1;
            if self.word >= self.p.lo.len() {
                return None;
            }
            self.rest = self.p.lo[self.word] | self.p.hi[self.word];
        }
    }
}

impl Neg for &Poly3 {
    type Output = Poly3;
    fn neg(self) -> Poly3 {
        Poly3 {
            lo: self.hi.clone(),
            hi: self.lo.clone(),
        }
    }
}

impl Neg for Poly3 {
    type Output = Poly3;
    fn neg(self) -> Poly3 {
        Poly3 {
            lo: self.hi,
            hi: self.lo,
        }
    }
}

impl Add for &Poly3 {
    type Output = Poly3;
    fn add(self, rhs: &Poly3) -> Poly3 {
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl Sub for &Poly3 {
    type Output = Poly3;
    fn sub(self, rhs: &Poly3) -> Poly3 {
        let mut out = self.clone();
        out.sub_assign_ref(rhs);
        out
    }
}

impl Mul for &Poly3 {
    type Output = Poly3;
    fn mul(self, rhs: &Poly3) -> Poly3 {
        self.mul_ref(rhs)
    }
}

impl fmt::Debug for Poly3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<_> = self.terms().collect();
        for (k, &(e, c)) in terms.iter().rev().enumerate() {
            let sign = if c == 2 {
                "-"
            } else if k > 0 {
                "+"
            } else {
                ""
            };
            let sep = if k > 0 { " " } else { "" };
            let body = match e {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{e}"),
            };
            if k > 0 {
                write!(f, "{sep}{sign} {body}")?;
            } else {
                write!(f, "{sign}{body}")?;
            }
        }
        Ok(())
    }
}
