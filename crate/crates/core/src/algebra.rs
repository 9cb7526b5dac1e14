//! A minimal commutative-ring interface over characteristic 3.
//!
//! Basis functions, identities and power series are written once against
//! this trait and run unchanged on exact ring elements, on field values at a
//! point, and on truncated series over either.

use crate::field::{FieldContext, FieldElement};

pub trait Algebra {
    type Elem: Clone;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// `a^(3^k)`.
    fn frobenius(&self, a: &Self::Elem, k: u32) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    /// Multiplication by an integer, reduced mod 3.
    fn scale(&self, a: &Self::Elem, c: i64) -> Self::Elem {
        match c.rem_euclid(3) {
            0 => self.zero(),
            1 => a.clone(),
            _ => self.neg(a),
        }
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            for _ in 0..e % 3 {
                acc = self.mul(&acc, &base);
            }
            e /= 3;
            if e > 0 {
                base = self.frobenius(&base, 1);
            }
        }
        acc
    }

    fn sum<'a, I>(&self, items: I) -> Self::Elem
    where
        I: IntoIterator<Item = &'a Self::Elem>,
        Self::Elem: 'a,
    {
        items
            .into_iter()
            .fold(self.zero(), |acc, x| self.add(&acc, x))
    }
}

impl Algebra for FieldContext {
    type Elem = FieldElement;

    fn zero(&self) -> FieldElement {
        FieldContext::zero(self)
    }
    fn one(&self) -> FieldElement {
        FieldContext::one(self)
    }
    fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldContext::add(self, *a, *b)
    }
    fn neg(&self, a: &FieldElement) -> FieldElement {
        FieldContext::neg(self, *a)
    }
    fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldContext::sub(self, *a, *b)
    }
    fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldContext::mul(self, *a, *b)
    }
    fn frobenius(&self, a: &FieldElement, k: u32) -> FieldElement {
        self.frobenius_power(*a, k as u64)
    }
    fn is_zero(&self, a: &FieldElement) -> bool {
        a.is_zero()
    }
}
