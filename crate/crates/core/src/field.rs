//! Arithmetic in GF(3) and its extensions GF(3^m).
//!
//! Elements are stored as two bitplanes: bit `i` of `lo` is set when the
//! coefficient of `t^i` is 1, bit `i` of `hi` when it is 2. Addition and
//! subtraction are word-parallel; multiplication is a schoolbook Horner loop
//! with reduction by the context modulus.
//!
//! The modulus for degree `m` is the smallest monic irreducible polynomial in
//! base-3 counting order, where the constant coefficient is the least
//! significant digit. Every context of a given degree is therefore identical,
//! and an element only needs to remember `m` to identify its field.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 63;

#[inline]
pub(crate) fn trit_add(a_lo: u64, a_hi: u64, b_lo: u64, b_hi: u64) -> (u64, u64) {
    let t = (a_lo | b_hi) ^ (a_hi | b_lo);
    ((a_hi | b_hi) ^ t, (a_lo | b_lo) ^ t)
}

/// An element of GF(3^m) in the polynomial basis of its context.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldElement {
    lo: u64,
    hi: u64,
    m: u8,
}

impl FieldElement {
    pub fn degree(&self) -> u32 {
        self.m as u32
    }

    pub fn is_zero(&self) -> bool {
        self.lo == 0 && self.hi == 0
    }

    pub fn is_one(&self) -> bool {
        self.lo == 1 && self.hi == 0
    }

    /// Coefficient of `t^i` in {0, 1, 2}.
    pub fn trit(&self, i: u32) -> u8 {
        ((self.lo >> i) & 1) as u8 | ((((self.hi >> i) & 1) as u8) << 1)
    }

    /// Coordinates in the polynomial basis, lowest degree first.
    pub fn coeffs(&self) -> Vec<u8> {
        (0..self.m as u32).map(|i| self.trit(i)).collect()
    }

    /// Raw bitplanes `(lo, hi)`.
    pub fn planes(&self) -> (u64, u64) {
        (self.lo, self.hi)
    }

    /// Element of the prime field GF(3) embedded in this element's field.
    pub fn is_prime_field(&self) -> bool {
        (self.lo | self.hi) <= 1
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Base-3 digit string, highest coefficient first.
        let s: String = (0..self.m as u32)
            .rev()
            .map(|i| char::from(b'0' + self.trit(i)))
            .collect();
        write!(f, "{}", s)
    }
}

/// Precomputed solver for `u^(3^e) - u = c` over one context.
#[derive(Debug)]
struct ArtinSchreierSolver {
    // Row-reduction transform applied to the right-hand side, one row per
    // equation, stored as bitplanes.
    transform: Vec<(u64, u64)>,
    // Pivot column of each of the first `rank` rows.
    pivots: Vec<u32>,
}

/// GF(3^m) with a fixed, deterministically chosen modulus.
pub struct FieldContext {
    m: u32,
    modulus: Vec<u8>,
    red_lo: u64,
    red_hi: u64,
    mask: u64,
    solvers: Mutex<HashMap<u32, Arc<ArtinSchreierSolver>>>,
}

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldContext")
            .field("m", &self.m)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldContext {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m
    }
}

impl Eq for FieldContext {}

impl FieldContext {
    /// Builds GF(3^m).
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 || m > MAX_DEGREE {
            return Err(Error::UnsupportedDegree { m, max: MAX_DEGREE });
        }
        let modulus = smallest_irreducible(m);
        Ok(Self::with_modulus(m, modulus))
    }

    /// Shared handle, the form most callers want.
    pub fn shared(m: u32) -> Result<Arc<Self>> {
        Self::new(m).map(Arc::new)
    }

    fn with_modulus(m: u32, modulus: Vec<u8>) -> Self {
        // t^m = -(low part of the modulus)
        let mut red_lo = 0u64;
        let mut red_hi = 0u64;
        for (i, &c) in modulus.iter().take(m as usize).enumerate() {
            match (3 - c) % 3 {
                1 => red_lo |= 1 << i,
                2 => red_hi |= 1 << i,
                _ => {}
            }
        }
        let mask = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
        Self {
            m,
            modulus,
            red_lo,
            red_hi,
            mask,
            solvers: Mutex::new(HashMap::new()),
        }
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    /// Monic modulus as trits, lowest degree first (length m + 1).
    pub fn modulus(&self) -> &[u8] {
        &self.modulus
    }

    /// Number of elements, 3^m.
    pub fn order(&self) -> u128 {
        3u128.pow(self.m)
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            lo: 0,
            hi: 0,
            m: self.m as u8,
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            lo: 1,
            hi: 0,
            m: self.m as u8,
        }
    }

    /// The generator `t` (class of the indeterminate). For m = 1 this is
    /// the element 0 of GF(3) reduced, so callers should not rely on it then.
    pub fn generator(&self) -> FieldElement {
        if self.m == 1 {
            // t = -modulus[0]
            return self.from_int(-(self.modulus[0] as i64));
        }
        FieldElement {
            lo: 2,
            hi: 0,
            m: self.m as u8,
        }
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, v: i64) -> FieldElement {
        match v.rem_euclid(3) {
            0 => self.zero(),
            1 => self.one(),
            _ => FieldElement {
                lo: 0,
                hi: 1,
                m: self.m as u8,
            },
        }
    }

    /// Element from polynomial-basis trits (lowest degree first).
    pub fn from_coeffs(&self, coeffs: &[u8]) -> Result<FieldElement> {
        if coeffs.len() > self.m as usize {
            return Err(Error::InvalidParameter(format!(
                "{} coefficients for degree {}",
                coeffs.len(),
                self.m
            )));
        }
        let mut lo = 0u64;
        let mut hi = 0u64;
        for (i, &c) in coeffs.iter().enumerate() {
            match c % 3 {
                1 => lo |= 1 << i,
                2 => hi |= 1 << i,
                _ => {}
            }
        }
        Ok(FieldElement {
            lo,
            hi,
            m: self.m as u8,
        })
    }

    /// Element whose base-3 digits (least significant first) are the
    /// coordinates. Inverse of [`FieldContext::to_index`].
    pub fn from_index(&self, mut n: u128) -> FieldElement {
        let mut lo = 0u64;
        let mut hi = 0u64;
        for i in 0..self.m {
            match n % 3 {
                1 => lo |= 1 << i,
                2 => hi |= 1 << i,
                _ => {}
            }
            n /= 3;
        }
        FieldElement {
            lo,
            hi,
            m: self.m as u8,
        }
    }

    pub fn to_index(&self, a: FieldElement) -> u128 {
        (0..self.m)
            .rev()
            .fold(0u128, |acc, i| acc * 3 + a.trit(i) as u128)
    }

    /// Element from raw bitplanes; bits above m are cleared and overlapping
    /// bits are rejected.
    pub fn from_planes(&self, lo: u64, hi: u64) -> Result<FieldElement> {
        if lo & hi != 0 {
            return Err(Error::InvalidParameter("overlapping bitplanes".into()));
        }
        Ok(FieldElement {
            lo: lo & self.mask,
            hi: hi & self.mask,
            m: self.m as u8,
        })
    }

    pub fn contains(&self, a: &FieldElement) -> bool {
        a.m as u32 == self.m
    }

    pub fn check(&self, a: &FieldElement) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(Error::ContextMismatch {
                expected: self.m,
                found: a.m as u32,
            })
        }
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let (lo, hi) = trit_add(a.lo, a.hi, b.lo, b.hi);
        FieldElement { lo, hi, m: a.m }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement {
            lo: a.hi,
            hi: a.lo,
            m: a.m,
        }
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    /// Multiplication by an element of GF(3).
    #[inline]
    pub fn scale(&self, a: FieldElement, c: u8) -> FieldElement {
        match c % 3 {
            0 => self.zero(),
            1 => a,
            _ => self.neg(a),
        }
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let m = self.m;
        let top = 1u64 << (m - 1);
        let (mut lo, mut hi) = (0u64, 0u64);
        for i in (0..m).rev() {
            // acc <- acc * t
            let carry_lo = lo & top != 0;
            let carry_hi = hi & top != 0;
            lo = (lo << 1) & self.mask;
            hi = (hi << 1) & self.mask;
            if carry_lo {
                (lo, hi) = trit_add(lo, hi, self.red_lo, self.red_hi);
            } else if carry_hi {
                (lo, hi) = trit_add(lo, hi, self.red_hi, self.red_lo);
            }
            // acc += b_i * a
            if (b.lo >> i) & 1 != 0 {
                (lo, hi) = trit_add(lo, hi, a.lo, a.hi);
            } else if (b.hi >> i) & 1 != 0 {
                (lo, hi) = trit_add(lo, hi, a.hi, a.lo);
            }
        }
        FieldElement { lo, hi, m: a.m }
    }

    #[inline]
    pub fn square(&self, a: FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    #[inline]
    pub fn cube(&self, a: FieldElement) -> FieldElement {
        self.mul(self.mul(a, a), a)
    }

    pub fn pow(&self, a: FieldElement, mut e: u128) -> FieldElement {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.square(base);
            e >>= 1;
        }
        acc
    }

    pub fn pow_u64(&self, a: FieldElement, e: u64) -> FieldElement {
        self.pow(a, e as u128)
    }

    /// `a^(3^k)`.
    pub fn frobenius_power(&self, a: FieldElement, k: u64) -> FieldElement {
        let k = k % self.m as u64;
        (0..k).fold(a, |acc, _| self.cube(acc))
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        self.check(&a)?;
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.order() - 2))
    }

    /// Checked multiplication.
    pub fn ff_mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        self.check(&a)?;
        self.check(&b)?;
        Ok(self.mul(a, b))
    }

    /// Checked addition.
    pub fn ff_add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        self.check(&a)?;
        self.check(&b)?;
        Ok(self.add(a, b))
    }

    /// Trace from GF(3^m) down to GF(3^d), returned as an element of this
    /// context lying in the subfield.
    pub fn trace_to_subfield(&self, a: FieldElement, d: u32) -> Result<FieldElement> {
        self.check(&a)?;
        if d == 0 || !self.m.is_multiple_of(d) {
            return Err(Error::NotASubfield { d, m: self.m });
        }
        let mut acc = self.zero();
        let mut cur = a;
        for _ in 0..self.m / d {
            acc = self.add(acc, cur);
            cur = self.frobenius_power(cur, d as u64);
        }
        Ok(acc)
    }

    /// True when `a` lies in the subfield GF(3^d).
    pub fn in_subfield(&self, a: FieldElement, d: u32) -> bool {
        self.m.is_multiple_of(d) && self.frobenius_power(a, d as u64) == a
    }

    /// Solves `u^(3^e) - u = c`. The solution set is `u + GF(3^e)`; the
    /// representative returned has all free coordinates set to zero.
    pub fn solve_artin_schreier(&self, c: FieldElement, e: u32) -> Result<FieldElement> {
        self.check(&c)?;
        if e == 0 || !self.m.is_multiple_of(e) {
            return Err(Error::NotASubfield { d: e, m: self.m });
        }
        let solver = self.as_solver(e);
        let m = self.m as usize;
        let mut rhs = vec![0u8; m];
        for (row, &(tlo, thi)) in solver.transform.iter().enumerate() {
            rhs[row] = dot3(tlo, thi, c.lo, c.hi);
        }
        let rank = solver.pivots.len();
        if rhs[rank..].iter().any(|&v| v != 0) {
            return Err(Error::NoSolution);
        }
        let mut lo = 0u64;
        let mut hi = 0u64;
        for (row, &col) in solver.pivots.iter().enumerate() {
            match rhs[row] {
                1 => lo |= 1 << col,
                2 => hi |= 1 << col,
                _ => {}
            }
        }
        Ok(FieldElement {
            lo,
            hi,
            m: self.m as u8,
        })
    }

    fn as_solver(&self, e: u32) -> Arc<ArtinSchreierSolver> {
        let mut cache = self.solvers.lock().expect("solver cache poisoned");
        cache
            .entry(e)
            .or_insert_with(|| Arc::new(self.build_as_solver(e)))
            .clone()
    }

    fn build_as_solver(&self, e: u32) -> ArtinSchreierSolver {
        let m = self.m as usize;
        // a[r][col] = coefficient r of L(t^col), augmented with identity.
        let mut a = vec![vec![0u8; 2 * m]; m];
        for col in 0..m {
            let basis = FieldElement {
                lo: 1 << col,
                hi: 0,
                m: self.m as u8,
            };
            let img = self.sub(self.frobenius_power(basis, e as u64), basis);
            for (r, row) in a.iter_mut().enumerate() {
                row[col] = img.trit(r as u32);
            }
        }
        for (r, row) in a.iter_mut().enumerate() {
            row[m + r] = 1;
        }
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m {
            let Some(p) = (row..m).find(|&r| a[r][col] != 0) else {
                continue;
            };
            a.swap(row, p);
            let inv = a[row][col]; // 1 and 2 are self-inverse mod 3
            for v in a[row].iter_mut() {
                *v = (*v * inv) % 3;
            }
            for r in 0..m {
                if r != row && a[r][col] != 0 {
                    let f = a[r][col];
                    for k in 0..2 * m {
                        a[r][k] = (a[r][k] + 3 * 3 - f * a[row][k]) % 3;
                    }
                }
            }
            pivots.push(col as u32);
            row += 1;
        }
        let transform = a
            .iter()
            .map(|r| {
                let mut lo = 0u64;
                let mut hi = 0u64;
                for (k, &v) in r[m..].iter().enumerate() {
                    match v {
                        1 => lo |= 1 << k,
                        2 => hi |= 1 << k,
                        _ => {}
                    }
                }
                (lo, hi)
            })
            .collect();
        ArtinSchreierSolver { transform, pivots }
    }

    /// Every element of the field, in index order. Only sensible for small m.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.order()).map(move |n| self.from_index(n))
    }
}

/// Inner product over GF(3) of two bitplane trit vectors.
#[inline]
fn dot3(a_lo: u64, a_hi: u64, b_lo: u64, b_hi: u64) -> u8 {
    let ones = ((a_lo & b_lo) | (a_hi & b_hi)).count_ones();
    let twos = ((a_lo & b_hi) | (a_hi & b_lo)).count_ones();
    ((ones + 2 * twos) % 3) as u8
}

fn smallest_irreducible(m: u32) -> Vec<u8> {
    let mut n: u128 = 0;
    loop {
        let mut poly: Vec<u8> = (0..m).map(|i| ((n / 3u128.pow(i)) % 3) as u8).collect();
        poly.push(1);
        if is_irreducible(&poly) {
            return poly;
        }
        n += 1;
    }
}

/// Ben-Or test: f of degree m is irreducible iff gcd(t^(3^k) - t, f) = 1
/// for every k <= m/2.
fn is_irreducible(f: &[u8]) -> bool {
    let m = f.len() - 1;
    if m == 1 {
        return true;
    }
    if f[0] == 0 {
        return false;
    }
    let ctx = FieldContext::with_modulus(m as u32, f.to_vec());
    let t = FieldElement {
        lo: 2,
        hi: 0,
        m: m as u8,
    };
    let mut power = t;
    for _ in 1..=m / 2 {
        power = ctx.cube(power);
        let diff = ctx.sub(power, t);
        let g = poly3_gcd(diff.coeffs(), f.to_vec());
        if g.len() > 1 {
            return false;
        }
    }
    true
}

fn trim(p: &mut Vec<u8>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

fn poly3_gcd(mut a: Vec<u8>, mut b: Vec<u8>) -> Vec<u8> {
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        // a <- a mod b
        let lead_inv = b[b.len() - 1]; // self-inverse mod 3
        while a.len() >= b.len() {
            let shift = a.len() - b.len();
            let f = (a[a.len() - 1] * lead_inv) % 3;
            for (i, &bc) in b.iter().enumerate() {
                a[shift + i] = (a[shift + i] + 3 * 3 - f * bc) % 3;
            }
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a
}
