//! Points on the curve over extension fields and truncated power series in
//! the local parameter t = x - x0.
//!
//! Series are sparse: the generators x, y, z have only a handful of nonzero
//! Taylor coefficients, and every basis function is built from them with
//! products and Frobenius powers, which keep the support small.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::field::{FieldContext, FieldElement};
use crate::params::ReeParams;
use crate::ring::{build_basis, BasisValues, CurveElement};

/// A power series truncated below `t^prec`, stored as sorted nonzero terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries<E> {
    prec: u64,
    terms: Vec<(u64, E)>,
}

impl<E: Clone> TruncatedSeries<E> {
    pub fn zero(prec: u64) -> Self {
        Self {
            prec,
            terms: Vec::new(),
        }
    }

    /// Builds a series from `(index, coeff)` pairs, which must be strictly
    /// increasing; terms at or beyond `prec` are dropped.
    pub fn from_sorted<A: Algebra<Elem = E>>(alg: &A, prec: u64, terms: Vec<(u64, E)>) -> Self {
        let terms = terms
            .into_iter()
            .filter(|(i, c)| *i < prec && !alg.is_zero(c))
            .collect();
        Self { prec, terms }
    }

    pub fn prec(&self) -> u64 {
        self.prec
    }

    pub fn terms(&self) -> &[(u64, E)] {
        &self.terms
    }

    /// Number of nonzero coefficients.
    pub fn nnz(&self) -> usize {
        self.terms.len()
    }

    pub fn get(&self, i: u64) -> Option<&E> {
        self.terms
            .binary_search_by_key(&i, |t| t.0)
            .ok()
            .map(|k| &self.terms[k].1)
    }

    /// Coefficient of `t^i`; errors when `i` is beyond the precision.
    pub fn coeff<A: Algebra<Elem = E>>(&self, alg: &A, i: u64) -> Result<E> {
        if i >= self.prec {
            return Err(Error::PrecisionShortfall {
                needed: i + 1,
                prec: self.prec,
            });
        }
        Ok(self.get(i).cloned().unwrap_or_else(|| alg.zero()))
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<u64> {
        self.terms.first().map(|t| t.0)
    }

    /// Dense coefficient vector `c_0 .. c_{prec-1}`.
    pub fn dense<A: Algebra<Elem = E>>(&self, alg: &A) -> Vec<E> {
        let mut out = vec![alg.zero(); self.prec as usize];
        for (i, c) in &self.terms {
            out[*i as usize] = c.clone();
        }
        out
    }

    pub fn truncate(&self, prec: u64) -> Self {
        let prec = prec.min(self.prec);
        Self {
            prec,
            terms: self.terms.iter().filter(|t| t.0 < prec).cloned().collect(),
        }
    }

    pub fn map<F: Fn(&E) -> E>(&self, f: F) -> Self {
        Self {
            prec: self.prec,
            terms: self.terms.iter().map(|(i, c)| (*i, f(c))).collect(),
        }
    }
}

/// Truncated series over a base algebra, themselves forming an algebra.
#[derive(Debug, Clone, Copy)]
pub struct SeriesAlgebra<'a, A> {
    base: &'a A,
    prec: u64,
}

impl<'a, A: Algebra> SeriesAlgebra<'a, A> {
    pub fn new(base: &'a A, prec: u64) -> Self {
        Self { base, prec }
    }

    pub fn base(&self) -> &A {
        self.base
    }

    pub fn prec(&self) -> u64 {
        self.prec
    }

    fn collect(&self, acc: BTreeMap<u64, A::Elem>) -> TruncatedSeries<A::Elem> {
        let terms = acc
            .into_iter()
            .filter(|(_, c)| !self.base.is_zero(c))
            .collect();
        TruncatedSeries {
            prec: self.prec,
            terms,
        }
    }

    /// Multiplies every coefficient by a base element.
    pub fn scale_by(&self, a: &TruncatedSeries<A::Elem>, c: &A::Elem) -> TruncatedSeries<A::Elem> {
        let terms = a
            .terms
            .iter()
            .filter(|t| t.0 < self.prec)
            .map(|(i, v)| (*i, self.base.mul(v, c)))
            .filter(|(_, v)| !self.base.is_zero(v))
            .collect();
        TruncatedSeries {
            prec: self.prec.min(a.prec),
            terms,
        }
    }

    /// Only coefficient `k` of a product, without forming the rest.
    pub fn mul_coeff(
        &self,
        a: &TruncatedSeries<A::Elem>,
        b: &TruncatedSeries<A::Elem>,
        k: u64,
    ) -> A::Elem {
        let mut acc = self.base.zero();
        for (i, x) in &a.terms {
            if *i > k {
                break;
            }
            if let Some(y) = b.get(k - i) {
                acc = self.base.add(&acc, &self.base.mul(x, y));
            }
        }
        acc
    }
}

impl<A: Algebra> Algebra for SeriesAlgebra<'_, A> {
    type Elem = TruncatedSeries<A::Elem>;

    fn zero(&self) -> Self::Elem {
        TruncatedSeries::zero(self.prec)
    }

    fn one(&self) -> Self::Elem {
        TruncatedSeries {
            prec: self.prec,
            terms: vec![(0, self.base.one())],
        }
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let prec = self.prec.min(a.prec).min(b.prec);
        let mut acc: BTreeMap<u64, A::Elem> = BTreeMap::new();
        for (i, c) in a.terms.iter().chain(&b.terms) {
            if *i >= prec {
                continue;
            }
            match acc.get_mut(i) {
                Some(v) => *v = self.base.add(v, c),
                None => {
                    acc.insert(*i, c.clone());
                }
            }
        }
        let mut out = self.collect(acc);
        out.prec = prec;
        out
    }

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        a.map(|c| self.base.neg(c))
    }

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let prec = self.prec.min(a.prec).min(b.prec);
        let mut acc: BTreeMap<u64, A::Elem> = BTreeMap::new();
        for (i, x) in &a.terms {
            if *i >= prec {
                break;
            }
            for (j, y) in &b.terms {
                let k = i + j;
                if k >= prec {
                    break;
                }
                let v = self.base.mul(x, y);
                match acc.get_mut(&k) {
                    Some(slot) => *slot = self.base.add(slot, &v),
                    None => {
                        acc.insert(k, v);
                    }
                }
            }
        }
        let mut out = self.collect(acc);
        out.prec = prec;
        out
    }

    fn frobenius(&self, a: &Self::Elem, k: u32) -> Self::Elem {
        let f = 3u64.pow(k);
        let prec = self.prec.min(a.prec.saturating_mul(f));
        let terms = a
            .terms
            .iter()
            .filter(|t| t.0.saturating_mul(f) < prec)
            .map(|(i, c)| (i * f, self.base.frobenius(c, k)))
            .collect();
        TruncatedSeries { prec, terms }
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.terms.is_empty()
    }
}

/// A finite point of the curve with coordinates in GF(3^m).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurvePoint {
    ctx: Arc<FieldContext>,
    x: FieldElement,
    y: FieldElement,
    z: FieldElement,
}

impl CurvePoint {
    /// Checks both curve equations before accepting the coordinates.
    pub fn new(
        p: &ReeParams,
        ctx: Arc<FieldContext>,
        x: FieldElement,
        y: FieldElement,
        z: FieldElement,
    ) -> Result<Self> {
        for v in [&x, &y, &z] {
            ctx.check(v)?;
        }
        if !ctx.degree().is_multiple_of(p.q_log3()) {
            return Err(Error::NotASubfield {
                d: p.q_log3(),
                m: ctx.degree(),
            });
        }
        let pt = Self { ctx, x, y, z };
        let (ry, rz) = pt.residuals(p);
        if !ry.is_zero() || !rz.is_zero() {
            return Err(Error::InvalidParameter(
                "coordinates do not satisfy the curve equations".into(),
            ));
        }
        Ok(pt)
    }

    /// The point x = y = z = 0 over GF(3^((2s+1)k)).
    pub fn origin(p: &ReeParams, k: u32) -> Result<Self> {
        let ctx = FieldContext::shared(p.q_log3() * k.max(1))?;
        let zero = ctx.zero();
        Self::new(p, ctx, zero, zero, zero)
    }

    pub fn ctx(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn shared_ctx(&self) -> Arc<FieldContext> {
        self.ctx.clone()
    }

    pub fn coords(&self) -> (FieldElement, FieldElement, FieldElement) {
        (self.x, self.y, self.z)
    }

    /// `(y^q - y - x^q0 (x^q - x), z^q - z - x^q0 (y^q - y))` at the point.
    pub fn residuals(&self, p: &ReeParams) -> (FieldElement, FieldElement) {
        let c = &*self.ctx;
        let e = p.q_log3() as u64;
        let aq = |v: FieldElement| c.sub(c.frobenius_power(v, e), v);
        let xq0 = c.frobenius_power(self.x, p.s as u64);
        let ry = c.sub(aq(self.y), c.mul(xq0, aq(self.x)));
        let rz = c.sub(aq(self.z), c.mul(xq0, aq(self.y)));
        (ry, rz)
    }

    /// Coordinates as base-3 digit strings, with the field degree.
    pub fn describe(&self) -> String {
        format!(
            "GF(3^{}): x={} y={} z={}",
            self.ctx.degree(),
            self.x,
            self.y,
            self.z
        )
    }

    /// True when all coordinates lie in F_q.
    pub fn is_rational(&self, p: &ReeParams) -> bool {
        let d = p.q_log3();
        [self.x, self.y, self.z]
            .iter()
            .all(|v| self.ctx.in_subfield(*v, d))
    }
}

/// The seeded generator used everywhere randomness is needed.
pub fn rng_from_seed(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_element<R: Rng>(ctx: &FieldContext, rng: &mut R) -> FieldElement {
    ctx.from_index(rng.gen_range(0..ctx.order()))
}

/// A uniformly random element of the subfield F_q of `ctx`.
fn random_fq<R: Rng>(p: &ReeParams, ctx: &FieldContext, rng: &mut R) -> Result<FieldElement> {
    // The trace onto F_q is surjective and each fibre has the same size.
    ctx.trace_to_subfield(random_element(ctx, rng), p.q_log3())
}

/// Default cap on rejected x-coordinates: 100 q^2.
pub fn default_attempt_cap(p: &ReeParams) -> u64 {
    100u64.saturating_mul(p.q2())
}

/// Smallest extension degree over F_q with points that are not F_q-rational:
/// every point over GF(q^k) with k <= 5 is F_q-rational.
pub const MIN_GENERIC_K: u32 = 6;

/// Default extension degree for sampled points.
pub const DEFAULT_K: u32 = MIN_GENERIC_K;

/// Samples a point over GF(3^((2s+1)k)) that is not F_q-rational: x0 is
/// uniform outside F_q and accepted when both Artin-Schreier equations are
/// solvable; y0 and z0 are then shifted by random elements of F_q.
pub fn random_point(p: &ReeParams, k: u32, seed: u64) -> Result<CurvePoint> {
    random_point_capped(p, k, seed, default_attempt_cap(p))
}

pub fn random_point_capped(p: &ReeParams, k: u32, seed: u64, cap: u64) -> Result<CurvePoint> {
    if k < MIN_GENERIC_K {
        return Err(Error::InvalidParameter(format!(
            "every point over GF(q^{k}) is F_q-rational; use k >= {MIN_GENERIC_K}"
        )));
    }
    let e = p.q_log3();
    let ctx = FieldContext::shared(e * k)?;
    let mut rng = rng_from_seed(seed, 0);
    let c = &*ctx;
    for _ in 0..cap {
        let x0 = random_element(c, &mut rng);
        if c.in_subfield(x0, e) {
            continue;
        }
        let xq0 = c.frobenius_power(x0, p.s as u64);
        let rhs_y = c.mul(xq0, c.sub(c.frobenius_power(x0, e as u64), x0));
        let Ok(y0) = c.solve_artin_schreier(rhs_y, e) else {
            continue;
        };
        let rhs_z = c.mul(xq0, rhs_y);
        let Ok(z0) = c.solve_artin_schreier(rhs_z, e) else {
            continue;
        };
        let y0 = c.add(y0, random_fq(p, c, &mut rng)?);
        let z0 = c.add(z0, random_fq(p, c, &mut rng)?);
        return CurvePoint::new(p, ctx.clone(), x0, y0, z0);
    }
    Err(Error::SamplingExhausted { attempts: cap })
}

/// `trials` independent generic points; the per-point seeds are drawn from
/// a dedicated stream of `seed`.
pub fn sample_points(p: &ReeParams, k: u32, seed: u64, trials: u32) -> Result<Vec<CurvePoint>> {
    let mut rng = rng_from_seed(seed, 2);
    (0..trials).map(|_| random_point(p, k, rng.gen())).collect()
}

/// A random F_q-rational point over GF(3^((2s+1)k)); every choice of
/// coordinates in F_q satisfies both equations.
pub fn random_rational_point(p: &ReeParams, k: u32, seed: u64) -> Result<CurvePoint> {
    let ctx = FieldContext::shared(p.q_log3() * k.max(1))?;
    let mut rng = rng_from_seed(seed, 1);
    let x0 = random_fq(p, &ctx, &mut rng)?;
    let y0 = random_fq(p, &ctx, &mut rng)?;
    let z0 = random_fq(p, &ctx, &mut rng)?;
    CurvePoint::new(p, ctx.clone(), x0, y0, z0)
}

/// Expansion of `u = u0 + sum_i u_i t^i` from `u^q - u = rhs`, where `rhs`
/// is already expanded: `u_i = (u_{i/q})^q - rhs_i` for `i >= 1`.
pub fn solve_as_series<A: Algebra>(
    alg: &A,
    p: &ReeParams,
    u0: A::Elem,
    rhs: &TruncatedSeries<A::Elem>,
) -> TruncatedSeries<A::Elem> {
    let prec = rhs.prec();
    let q = p.q;
    let e = p.q_log3();
    let mut out: BTreeMap<u64, A::Elem> = BTreeMap::new();
    out.insert(0, u0);
    let mut pending: std::collections::BTreeSet<u64> = rhs
        .terms()
        .iter()
        .map(|t| t.0)
        .filter(|&i| i >= 1)
        .collect();
    while let Some(i) = pending.pop_first() {
        let mut v = match out.get(&(i / q)) {
            Some(prev) if i % q == 0 => alg.frobenius(prev, e),
            _ => alg.zero(),
        };
        if let Some(r) = rhs.get(i) {
            v = alg.sub(&v, r);
        }
        if !alg.is_zero(&v) {
            out.insert(i, v);
            if let Some(next) = i.checked_mul(q).filter(|&n| n < prec) {
                pending.insert(next);
            }
        }
    }
    let terms = out.into_iter().filter(|(_, c)| !alg.is_zero(c)).collect();
    TruncatedSeries { prec, terms }
}

/// Series of `x = x0 + t`, `y` and `z` over any algebra, given images of
/// the coordinates of the expansion point.
pub(crate) fn generator_series<A: Algebra>(
    alg: &A,
    p: &ReeParams,
    prec: u64,
    x0: A::Elem,
    y0: A::Elem,
    z0: A::Elem,
) -> [TruncatedSeries<A::Elem>; 3] {
    let sa = SeriesAlgebra::new(alg, prec);
    let tx = TruncatedSeries::from_sorted(alg, prec, vec![(0, x0), (1, alg.one())]);
    let xq0 = sa.frobenius(&tx, p.s);
    let ell = sa.sub(&sa.frobenius(&tx, p.q_log3()), &tx);
    let h = sa.mul(&xq0, &ell);
    let g = sa.mul(&xq0, &h);
    let ty = solve_as_series(alg, p, y0, &h);
    let tz = solve_as_series(alg, p, z0, &g);
    [tx, ty, tz]
}

/// Series of x, y and z at `pt` in the local parameter t = x - x0.
pub fn expand_generators(
    p: &ReeParams,
    pt: &CurvePoint,
    prec: u64,
) -> Result<[TruncatedSeries<FieldElement>; 3]> {
    if prec == 0 {
        return Err(Error::InvalidParameter("precision must be positive".into()));
    }
    let (x0, y0, z0) = pt.coords();
    Ok(generator_series(pt.ctx(), p, prec, x0, y0, z0))
}

/// Series of 1, x, y, z, w1..w10 and v at a point.
pub fn expand_basis(
    p: &ReeParams,
    pt: &CurvePoint,
    prec: u64,
) -> Result<BasisValues<TruncatedSeries<FieldElement>>> {
    let [tx, ty, tz] = expand_generators(p, pt, prec)?;
    let sa = SeriesAlgebra::new(pt.ctx(), prec);
    Ok(build_basis(&sa, p, &tx, &ty, &tz))
}

/// Series of an arbitrary ring element at a point.
pub fn expand_element(
    p: &ReeParams,
    f: &CurveElement,
    pt: &CurvePoint,
    prec: u64,
) -> Result<TruncatedSeries<FieldElement>> {
    let [_, ty, tz] = expand_generators(p, pt, prec)?;
    let ctx = pt.ctx();
    let sa = SeriesAlgebra::new(ctx, prec);
    let mut acc = sa.zero();
    let mut ycache: BTreeMap<u32, TruncatedSeries<FieldElement>> = BTreeMap::new();
    let mut zcache: BTreeMap<u32, TruncatedSeries<FieldElement>> = BTreeMap::new();
    for (&(b, c), poly) in f.groups() {
        let yb = ycache
            .entry(b)
            .or_insert_with(|| sa.pow(&ty, b as u64))
            .clone();
        let zc = zcache
            .entry(c)
            .or_insert_with(|| sa.pow(&tz, c as u64))
            .clone();
        // Taylor expansion of the x-coefficient around x0.
        let (x0, _, _) = pt.coords();
        let top = poly.degree().unwrap().min(prec - 1);
        let mut terms = Vec::new();
        for j in 0..=top {
            let v = poly.hasse(j).eval(ctx, x0);
            if !v.is_zero() {
                terms.push((j, v));
            }
        }
        let tp = TruncatedSeries { prec, terms };
        acc = sa.add(&acc, &sa.mul(&tp, &sa.mul(&yb, &zc)));
    }
    Ok(acc)
}

/// Coefficient `i` of the expansion of `f` at `pt`, i.e. `(D^i f)(pt)`.
pub fn hasse_at(
    p: &ReeParams,
    f: &CurveElement,
    pt: &CurvePoint,
    i: u64,
    prec: u64,
) -> Result<FieldElement> {
    if i >= prec {
        return Err(Error::PrecisionShortfall {
            needed: i + 1,
            prec,
        });
    }
    let s = expand_element(p, f, pt, i + 1)?;
    s.coeff(pt.ctx(), i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{basis_values, Label, ReeRing};

    #[test]
    fn origin_and_seeded_points() {
        let p = ReeParams::new(1).unwrap();
        let o = CurvePoint::origin(&p, 2).unwrap();
        assert!(o.is_rational(&p));
        let a = random_point(&p, 6, 7).unwrap();
        let b = random_point(&p, 6, 7).unwrap();
        assert_eq!(a, b);
        let (ry, rz) = a.residuals(&p);
        assert!(ry.is_zero() && rz.is_zero());
        assert!(!a.is_rational(&p));
        assert!(random_point(&p, 5, 7).is_err());
        let r = random_rational_point(&p, 2, 3).unwrap();
        assert!(r.is_rational(&p));
        assert!(matches!(
            random_point_capped(&p, 6, 1, 0),
            Err(Error::SamplingExhausted { attempts: 0 })
        ));
    }

    #[test]
    fn generator_series_satisfy_relations() {
        let p = ReeParams::new(1).unwrap();
        let pt = random_point(&p, 6, 11).unwrap();
        let prec = 800;
        let [tx, ty, tz] = expand_generators(&p, &pt, prec).unwrap();
        let sa = SeriesAlgebra::new(pt.ctx(), prec);
        let e = p.q_log3();
        let aq = |s: &TruncatedSeries<FieldElement>| sa.sub(&sa.frobenius(s, e), s);
        let xq0 = sa.frobenius(&tx, p.s);
        assert!(sa.is_zero(&sa.sub(&aq(&ty), &sa.mul(&xq0, &aq(&tx)))));
        assert!(sa.is_zero(&sa.sub(&aq(&tz), &sa.mul(&xq0, &aq(&ty)))));
    }

    #[test]
    fn origin_coefficients_of_y() {
        let p = ReeParams::new(1).unwrap();
        let o = CurvePoint::origin(&p, 1).unwrap();
        let [_, ty, _] = expand_generators(&p, &o, 800).unwrap();
        let c = o.ctx();
        assert!(ty.coeff(c, 1).unwrap().is_zero());
        assert!(ty.coeff(c, p.q0 + 1).unwrap().is_one());
        assert_eq!(ty.coeff(c, p.q + p.q0).unwrap(), c.from_int(-1));
    }

    #[test]
    fn basis_series_match_element_expansion() {
        let p = ReeParams::new(1).unwrap();
        let ring = ReeRing::new(&p);
        let vals = basis_values(&ring);
        let pt = random_point(&p, 6, 5).unwrap();
        let prec = 200;
        let fast = expand_basis(&p, &pt, prec).unwrap();
        for l in [Label::W(4), Label::W(8), Label::W(10)] {
            let slow = expand_element(&p, vals.get(l), &pt, prec).unwrap();
            assert_eq!(&slow, fast.get(l), "{l}");
            assert_eq!(
                fast.get(l).coeff(pt.ctx(), 0).unwrap(),
                vals.get(l).eval(&pt)
            );
        }
    }
}
