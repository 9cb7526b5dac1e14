//! The affine coordinate ring F_3[x, y, z] / (y^q - y - h, z^q - z - g) of the
//! Ree curve, with h = x^(q+q0) - x^(q0+1) and g = x^(q+2q0) - x^(2q0+1).
//!
//! Elements are stored in normal form: a map from `(b, c)` to the F_3[x]
//! coefficient of `y^b z^c`, with `b, c < q`. The two relations have leading
//! terms in distinct variables, so the normal form is unique.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::params::ReeParams;
use crate::poly3::Poly3;
use crate::series::CurvePoint;

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct CurveElement {
    groups: BTreeMap<(u32, u32), Poly3>,
}

impl CurveElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_poly(p: Poly3) -> Self {
        let mut out = Self::zero();
        if !p.is_zero() {
            out.groups.insert((0, 0), p);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.groups.is_empty()
    }

    /// The coefficient polynomials, keyed by the `(y, z)` exponents.
    pub fn groups(&self) -> impl Iterator<Item = (&(u32, u32), &Poly3)> {
        self.groups.iter()
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    /// Number of monomials with nonzero coefficient.
    pub fn num_terms(&self) -> usize {
        self.groups.values().map(Poly3::nnz).sum()
    }

    /// Returns the polynomial when the element lies in F_3[x].
    pub fn as_x_poly(&self) -> Option<Poly3> {
        match self.groups.len() {
            0 => Some(Poly3::zero()),
            1 => self.groups.get(&(0, 0)).cloned(),
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_x_poly().is_some_and(|p| p.is_one())
    }

    pub fn coeff(&self, a: u64, b: u32, c: u32) -> u8 {
        self.groups.get(&(b, c)).map_or(0, |p| p.coeff(a))
    }

    /// Largest x-exponent of any stored monomial.
    pub fn x_degree(&self) -> Option<u64> {
        self.groups.values().filter_map(Poly3::degree).max()
    }

    /// Sorted `(a, b, c, coeff)` list, lexicographic in `(a, b, c)`.
    pub fn to_quadruples(&self) -> Vec<(u64, u32, u32, u8)> {
        let mut out: Vec<_> = self
            .groups
            .iter()
            .flat_map(|(&(b, c), p)| p.terms().map(move |(a, k)| (a, b, c, k)))
            .collect();
        out.sort_unstable();
        out
    }

    /// One `a b c coeff` line per monomial, in serialization order.
    pub fn to_text(&self) -> String {
        self.to_quadruples()
            .iter()
            .map(|(a, b, c, k)| format!("{a} {b} {c} {k}\n"))
            .collect()
    }

    /// Multiplies every coefficient polynomial by `p`.
    pub fn mul_poly(&self, p: &Poly3) -> Self {
        let mut out = Self::zero();
        if p.is_zero() {
            return out;
        }
        for (k, v) in &self.groups {
            out.groups.insert(*k, v * p);
        }
        out
    }

    /// Evaluates at a point, using the point's coordinates for x, y and z.
    pub fn eval(&self, pt: &CurvePoint) -> FieldElement {
        let ctx = pt.ctx();
        let (x0, y0, z0) = pt.coords();
        let mut ypow: Vec<FieldElement> = vec![ctx.one()];
        let mut zpow: Vec<FieldElement> = vec![ctx.one()];
        let mut acc = ctx.zero();
        for (&(b, c), p) in &self.groups {
            while ypow.len() <= b as usize {
                let last = *ypow.last().unwrap();
                ypow.push(ctx.mul(last, y0));
            }
            while zpow.len() <= c as usize {
                let last = *zpow.last().unwrap();
                zpow.push(ctx.mul(last, z0));
            }
            let v = p.eval(ctx, x0);
            acc = ctx.add(acc, ctx.mul(v, ctx.mul(ypow[b as usize], zpow[c as usize])));
        }
        acc
    }
}

impl Serialize for CurveElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let quads = self.to_quadruples();
        let mut seq = serializer.serialize_seq(Some(quads.len()))?;
        for q in &quads {
            seq.serialize_element(q)?;
        }
        seq.end()
    }
}

impl fmt::Debug for CurveElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CurveElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(b, c), p) in self.groups.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mono = match (b, c) {
                (0, 0) => String::new(),
                _ => {
                    let part = |v: &str, e: u32| match e {
                        0 => String::new(),
                        1 => format!("*{v}"),
                        _ => format!("*{v}^{e}"),
                    };
                    format!("{}{}", part("y", b), part("z", c))
                }
            };
            write!(f, "({p}){mono}")?;
        }
        Ok(())
    }
}

/// Arithmetic context for a fixed `s`.
#[derive(Debug, Clone)]
pub struct ReeRing {
    params: ReeParams,
    q: u64,
    h: Poly3,
    g: Poly3,
    ell: Poly3,
}

impl ReeRing {
    pub fn new(params: &ReeParams) -> Self {
        let (q, q0) = (params.q, params.q0);
        let h = &Poly3::monomial(q + q0, 1) - &Poly3::monomial(q0 + 1, 1);
        let g = &Poly3::monomial(q + 2 * q0, 1) - &Poly3::monomial(2 * q0 + 1, 1);
        let ell = &Poly3::monomial(q, 1) - &Poly3::x();
        Self {
            params: params.clone(),
            q,
            h,
            g,
            ell,
        }
    }

    pub fn params(&self) -> &ReeParams {
        &self.params
    }

    /// `y^q - y` as a polynomial in x.
    pub fn h(&self) -> &Poly3 {
        &self.h
    }

    /// `z^q - z` as a polynomial in x.
    pub fn g(&self) -> &Poly3 {
        &self.g
    }

    pub fn ell_poly(&self) -> &Poly3 {
        &self.ell
    }

    pub fn ell(&self) -> CurveElement {
        CurveElement::from_poly(self.ell.clone())
    }

    pub fn x(&self) -> CurveElement {
        CurveElement::from_poly(Poly3::x())
    }

    pub fn y(&self) -> CurveElement {
        self.monomial(0, 1, 0, 1)
    }

    pub fn z(&self) -> CurveElement {
        self.monomial(0, 0, 1, 1)
    }

    pub fn constant(&self, c: i64) -> CurveElement {
        CurveElement::from_poly(Poly3::constant(c.rem_euclid(3) as u8))
    }

    pub fn monomial(&self, a: u64, b: u64, c: u64, coeff: u8) -> CurveElement {
        self.reduce([(a, b, c, coeff)])
    }

    /// Normal form of a sum of monomials `coeff * x^a y^b z^c` with
    /// arbitrary exponents.
    pub fn reduce<I: IntoIterator<Item = (u64, u64, u64, u8)>>(&self, terms: I) -> CurveElement {
        let mut raw: BTreeMap<(u64, u64), Poly3> = BTreeMap::new();
        for (a, b, c, k) in terms {
            raw.entry((b, c))
                .or_default()
                .add_scaled_shifted(&Poly3::one(), a, k);
        }
        self.reduce_map(raw)
    }

    /// Re-normalises an element whose exponents may reach `q` or beyond.
    fn reduce_map(&self, mut raw: BTreeMap<(u64, u64), Poly3>) -> CurveElement {
        let q = self.q;
        let mut out = CurveElement::zero();
        // Every rewrite produces strictly smaller keys, so popping from the top
        // sees each key once with all its contributions already merged.
        while let Some(((b, c), p)) = raw.pop_last() {
            if p.is_zero() {
                continue;
            }
            if b >= q {
                raw.entry((b - q + 1, c)).or_default().add_assign_ref(&p);
                raw.entry((b - q, c))
                    .or_default()
                    .add_assign_ref(&(&p * &self.h));
            } else if c >= q {
                raw.entry((b, c - q + 1)).or_default().add_assign_ref(&p);
                raw.entry((b, c - q))
                    .or_default()
                    .add_assign_ref(&(&p * &self.g));
            } else {
                out.groups.insert((b as u32, c as u32), p);
            }
        }
        out
    }

    /// Rebuilds an element from its serialized quadruples.
    pub fn from_quadruples(&self, quads: &[(u64, u32, u32, u8)]) -> CurveElement {
        self.reduce(quads.iter().map(|&(a, b, c, k)| (a, b as u64, c as u64, k)))
    }

    pub fn add(&self, a: &CurveElement, b: &CurveElement) -> CurveElement {
        self.combine(a, b, 1)
    }

    pub fn sub(&self, a: &CurveElement, b: &CurveElement) -> CurveElement {
        self.combine(a, b, 2)
    }

    fn combine(&self, a: &CurveElement, b: &CurveElement, sign: u8) -> CurveElement {
        let mut out = a.clone();
        for (k, p) in &b.groups {
            let slot = out.groups.entry(*k).or_default();
            slot.add_scaled_shifted(p, 0, sign);
            if slot.is_zero() {
                out.groups.remove(k);
            }
        }
        out
    }

    pub fn neg(&self, a: &CurveElement) -> CurveElement {
        CurveElement {
            groups: a.groups.iter().map(|(k, p)| (*k, -p)).collect(),
        }
    }

    pub fn mul(&self, a: &CurveElement, b: &CurveElement) -> CurveElement {
        if let Some(p) = a.as_x_poly() {
            return b.mul_poly(&p);
        }
        if let Some(p) = b.as_x_poly() {
            return a.mul_poly(&p);
        }
        let mut raw: BTreeMap<(u64, u64), Poly3> = BTreeMap::new();
        for (&(b1, c1), p1) in &a.groups {
            for (&(b2, c2), p2) in &b.groups {
                let key = ((b1 + b2) as u64, (c1 + c2) as u64);
                raw.entry(key).or_default().add_assign_ref(&(p1 * p2));
            }
        }
        self.reduce_map(raw)
    }

    /// `a^(3^k)`.
    pub fn frobenius(&self, a: &CurveElement, k: u32) -> CurveElement {
        let mut cur = a.clone();
        for _ in 0..k {
            let raw = cur
                .groups
                .iter()
                .map(|(&(b, c), p)| ((3 * b as u64, 3 * c as u64), p.frobenius(1)))
                .collect();
            cur = self.reduce_map(raw);
        }
        cur
    }

    /// `a^q`.
    pub fn qpow(&self, a: &CurveElement) -> CurveElement {
        self.frobenius(a, self.params.q_log3())
    }

    /// Pole order at P_inf for elements whose top-weight monomials do not
    /// cancel; `None` when they do.
    pub fn leading_pole_order(&self, f: &CurveElement) -> Result<Option<u128>> {
        if f.is_zero() {
            return Err(Error::ZeroElement);
        }
        let (wx, wy, wz) = monomial_weights(&self.params);
        let mut best = 0u128;
        let mut lead = 0u8;
        for (&(b, c), p) in &f.groups {
            let a = p.degree().unwrap();
            // Several exponents of x can share a weight only within one group
            // at the top degree, so only the leading coefficient matters.
            let w = a as u128 * wx + b as u128 * wy + c as u128 * wz;
            let k = p.leading_coeff();
            if w > best {
                best = w;
                lead = k;
            } else if w == best {
                lead = (lead + k) % 3;
            }
        }
        Ok((lead != 0).then_some(best))
    }
}

/// Pole orders of x, y and z at P_inf: q^2, q^2 + qq0, q^2 + 2qq0.
pub fn monomial_weights(p: &ReeParams) -> (u128, u128, u128) {
    let q2 = p.q2() as u128;
    let qq0 = p.qq0() as u128;
    (q2, q2 + qq0, q2 + 2 * qq0)
}

impl Algebra for ReeRing {
    type Elem = CurveElement;

    fn zero(&self) -> CurveElement {
        CurveElement::zero()
    }
    fn one(&self) -> CurveElement {
        self.constant(1)
    }
    fn add(&self, a: &CurveElement, b: &CurveElement) -> CurveElement {
        ReeRing::add(self, a, b)
    }
    fn sub(&self, a: &CurveElement, b: &CurveElement) -> CurveElement {
        ReeRing::sub(self, a, b)
    }
    fn neg(&self, a: &CurveElement) -> CurveElement {
        ReeRing::neg(self, a)
    }
    fn mul(&self, a: &CurveElement, b: &CurveElement) -> CurveElement {
        ReeRing::mul(self, a, b)
    }
    fn frobenius(&self, a: &CurveElement, k: u32) -> CurveElement {
        ReeRing::frobenius(self, a, k)
    }
    fn is_zero(&self, a: &CurveElement) -> bool {
        a.is_zero()
    }
}

/// Names of the functions spanning the linear series and the auxiliary `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    One,
    X,
    Y,
    Z,
    W(u8),
    V,
}

pub const D14: [Label; 14] = [
    Label::One,
    Label::X,
    Label::Y,
    Label::Z,
    Label::W(1),
    Label::W(2),
    Label::W(3),
    Label::W(4),
    Label::W(5),
    Label::W(6),
    Label::W(7),
    Label::W(8),
    Label::W(9),
    Label::W(10),
];

pub const E7: [Label; 7] = [
    Label::One,
    Label::X,
    Label::W(1),
    Label::W(2),
    Label::W(3),
    Label::W(6),
    Label::W(8),
];

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::One => write!(f, "1"),
            Label::X => write!(f, "x"),
            Label::Y => write!(f, "y"),
            Label::Z => write!(f, "z"),
            Label::W(i) => write!(f, "w{i}"),
            Label::V => write!(f, "v"),
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().replace(['_', '{', '}'], "");
        match t.as_str() {
            "1" => Ok(Label::One),
            "x" => Ok(Label::X),
            "y" => Ok(Label::Y),
            "z" => Ok(Label::Z),
            "v" => Ok(Label::V),
            _ => match t.strip_prefix('w').and_then(|n| n.parse::<u8>().ok()) {
                Some(i) if (1..=10).contains(&i) => Ok(Label::W(i)),
                _ => Err(Error::UnknownLabel(s.to_string())),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FunctionType {
    None,
    Type1,
    Type2,
}

/// Exponent applied to `f` in a term `f^e (b^q - b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelExponent {
    Q0,
    ThreeQ0,
}

impl RelExponent {
    pub fn value(self, p: &ReeParams) -> u64 {
        match self {
            RelExponent::Q0 => p.q0,
            RelExponent::ThreeQ0 => 3 * p.q0,
        }
    }

    /// Number of Frobenius steps: `q0 = 3^s`, `3q0 = 3^(s+1)`.
    pub fn log3(self, p: &ReeParams) -> u32 {
        match self {
            RelExponent::Q0 => p.s,
            RelExponent::ThreeQ0 => p.s + 1,
        }
    }
}

/// One term `sign * f^e (b^q - b)` on the right of an Artin-Schreier relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelTerm {
    pub sign: i8,
    pub f: Label,
    pub exponent: RelExponent,
    pub b: Label,
}

const fn term(sign: i8, f: Label, exponent: RelExponent, b: Label) -> RelTerm {
    RelTerm {
        sign,
        f,
        exponent,
        b,
    }
}

/// The relation `w^q - w = sum of terms` satisfied by `label`, if any.
pub fn relation(label: Label) -> Option<Vec<RelTerm>> {
    use Label::*;
    use RelExponent::*;
    let t1 = |f| vec![term(1, f, ThreeQ0, X)];
    let t2 = |f1, b1, f2, b2| vec![term(1, f1, Q0, b1), term(-1, f2, Q0, b2)];
    Some(match label {
        Y => vec![term(1, X, Q0, X)],
        Z => vec![term(1, X, Q0, Y)],
        W(1) => t1(X),
        W(2) => t1(Y),
        W(3) => t1(Z),
        W(6) => t1(W(4)),
        W(8) => t1(W(7)),
        W(4) => t2(W(2), X, W(1), Y),
        W(5) => t2(W(3), Y, W(2), Z),
        W(7) => t2(W(2), Y, W(3), X),
        W(9) => t2(W(2), W(4), W(6), Y),
        W(10) => t2(W(6), Z, W(3), W(4)),
        _ => return None,
    })
}

pub fn function_type(label: Label) -> FunctionType {
    match label {
        Label::W(1 | 2 | 3 | 6 | 8) => FunctionType::Type1,
        Label::W(4 | 5 | 7 | 9 | 10) => FunctionType::Type2,
        _ => FunctionType::None,
    }
}

/// Values of 1, x, y, z, w1..w10 and v in some algebra.
#[derive(Debug, Clone)]
pub struct BasisValues<E> {
    values: Vec<(Label, E)>,
}

impl<E: Clone> BasisValues<E> {
    pub fn get(&self, label: Label) -> &E {
        &self
            .values
            .iter()
            .find(|(l, _)| *l == label)
            .expect("every label is populated")
            .1
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Label, E)> {
        self.values.iter()
    }

    pub fn family(&self, labels: &[Label]) -> Vec<E> {
        labels.iter().map(|l| self.get(*l).clone()).collect()
    }
}

/// Builds the basis functions from images of x, y, z in any algebra.
pub fn build_basis<A: Algebra>(
    alg: &A,
    p: &ReeParams,
    x: &A::Elem,
    y: &A::Elem,
    z: &A::Elem,
) -> BasisValues<A::Elem> {
    let s = p.s;
    let fq0 = |e: &A::Elem| alg.frobenius(e, s);
    let f3q0 = |e: &A::Elem| alg.frobenius(e, s + 1);
    let m = |a: &A::Elem, b: &A::Elem| alg.mul(a, b);
    let w1 = alg.sub(&m(&f3q0(x), x), &f3q0(y));
    let w2 = alg.sub(&m(x, &f3q0(y)), &f3q0(z));
    let w3 = alg.sub(&m(x, &f3q0(z)), &f3q0(&w1));
    let w4 = alg.sub(&m(x, &fq0(&w2)), &m(y, &fq0(&w1)));
    let v = alg.sub(&m(x, &fq0(&w3)), &m(z, &fq0(&w1)));
    let w5 = alg.sub(&m(y, &fq0(&w3)), &m(z, &fq0(&w2)));
    let w6 = alg.add(&alg.sub(&f3q0(&v), &f3q0(&w2)), &m(x, &f3q0(&w4)));
    let w7 = alg.add(&w2, &v);
    let w8 = alg.add(&f3q0(&w5), &m(x, &f3q0(&w7)));
    let w9 = alg.sub(&m(&w4, &fq0(&w2)), &m(y, &fq0(&w6)));
    let w10 = alg.sub(&m(z, &fq0(&w6)), &m(&fq0(&w3), &w4));
    use Label::*;
    let values = vec![
        (One, alg.one()),
        (X, x.clone()),
        (Y, y.clone()),
        (Z, z.clone()),
        (W(1), w1),
        (W(2), w2),
        (W(3), w3),
        (W(4), w4),
        (W(5), w5),
        (W(6), w6),
        (W(7), w7),
        (W(8), w8),
        (W(9), w9),
        (W(10), w10),
        (V, v),
    ];
    BasisValues { values }
}

/// `(w^q - w) - rhs` for the relation attached to `label`, in any algebra.
pub fn relation_residual<A: Algebra>(
    alg: &A,
    p: &ReeParams,
    vals: &BasisValues<A::Elem>,
    label: Label,
) -> Result<A::Elem> {
    let terms = relation(label).ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
    let qk = p.q_log3();
    let as_q = |e: &A::Elem| alg.sub(&alg.frobenius(e, qk), e);
    let mut res = as_q(vals.get(label));
    for t in terms {
        let rhs = alg.mul(
            &alg.frobenius(vals.get(t.f), t.exponent.log3(p)),
            &as_q(vals.get(t.b)),
        );
        res = alg.sub(&res, &alg.scale(&rhs, t.sign as i64));
    }
    Ok(res)
}

#[derive(Debug, Clone)]
pub struct BasisFunction {
    pub label: Label,
    pub element: CurveElement,
    pub kind: FunctionType,
    pub relation: Option<Vec<RelTerm>>,
}

/// An ordered, labelled list of ring elements.
#[derive(Debug, Clone)]
pub struct FunctionFamily {
    pub name: String,
    pub members: Vec<BasisFunction>,
}

impl FunctionFamily {
    pub fn labels(&self) -> Vec<Label> {
        self.members.iter().map(|m| m.label).collect()
    }

    pub fn get(&self, label: Label) -> Option<&BasisFunction> {
        self.members.iter().find(|m| m.label == label)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn subfamily(&self, name: &str, labels: &[Label]) -> Result<FunctionFamily> {
        let members = labels
            .iter()
            .map(|l| {
                self.get(*l)
                    .cloned()
                    .ok_or_else(|| Error::UnknownLabel(l.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FunctionFamily {
            name: name.to_string(),
            members,
        })
    }
}

/// Exact normal forms of the basis, in the order 1, x, y, z, w1, ..., w10,
/// followed by v.
pub fn basis_values(ring: &ReeRing) -> BasisValues<CurveElement> {
    build_basis(ring, ring.params(), &ring.x(), &ring.y(), &ring.z())
}

/// The 14-element family D14 together with type and relation metadata.
pub fn basis_functions(ring: &ReeRing) -> FunctionFamily {
    let vals = basis_values(ring);
    family_from_values(&vals, "D", &D14)
}

pub fn family_from_values(
    vals: &BasisValues<CurveElement>,
    name: &str,
    labels: &[Label],
) -> FunctionFamily {
    let members = labels
        .iter()
        .map(|&label| BasisFunction {
            label,
            element: vals.get(label).clone(),
            kind: function_type(label),
            relation: relation(label),
        })
        .collect();
    FunctionFamily {
        name: name.to_string(),
        members,
    }
}

/// Exact residual of the relation for `label` (y, z or w1..w10).
pub fn pedersen_residual(ring: &ReeRing, label: Label) -> Result<CurveElement> {
    let vals = basis_values(ring);
    relation_residual(ring, ring.params(), &vals, label)
}

/// Pole orders at P_inf of 1, x, y, z, w1..w10 (and v), propagated through
/// the Artin-Schreier relations: if `w^q - w = R` then `q * pole(w) =
/// pole(R)`. Fails if two terms of some `R` tie for the top pole order.
pub fn basis_pole_orders(p: &ReeParams) -> Result<Vec<(Label, u128)>> {
    let q = p.q as u128;
    let mut known: Vec<(Label, u128)> = vec![(Label::One, 0), (Label::X, p.q2() as u128)];
    let get =
        |known: &Vec<(Label, u128)>, l: Label| known.iter().find(|(k, _)| *k == l).map(|x| x.1);
    let order = [
        Label::Y,
        Label::Z,
        Label::W(1),
        Label::W(2),
        Label::W(3),
        Label::W(4),
        Label::W(7),
        Label::W(5),
        Label::W(6),
        Label::W(8),
        Label::W(9),
        Label::W(10),
    ];
    for label in order {
        let terms = relation(label).unwrap();
        let mut poles = Vec::new();
        for t in &terms {
            let pf = get(&known, t.f).unwrap();
            let pb = get(&known, t.b).unwrap();
            poles.push(t.exponent.value(p) as u128 * pf + q * pb);
        }
        let top = *poles.iter().max().unwrap();
        if poles.iter().filter(|&&v| v == top).count() > 1 {
            return Err(Error::AuditMismatch(format!(
                "pole orders tie in relation for {label}"
            )));
        }
        if top % q != 0 {
            return Err(Error::AuditMismatch(format!(
                "pole order of {label} not integral"
            )));
        }
        known.push((label, top / q));
    }
    // v = w7 - w2, and the two poles differ.
    let (p7, p2) = (
        get(&known, Label::W(7)).unwrap(),
        get(&known, Label::W(2)).unwrap(),
    );
    if p7 == p2 {
        return Err(Error::AuditMismatch("pole order of v is ambiguous".into()));
    }
    known.push((Label::V, p7.max(p2)));
    let mut out = Vec::new();
    for l in D14.iter().chain([Label::V].iter()) {
        out.push((*l, get(&known, *l).unwrap()));
    }
    Ok(out)
}
