//! Hasse derivatives with respect to x on the coordinate ring.
//!
//! `f -> sum_k D^k f t^k` is a ring homomorphism commuting with Frobenius
//! (indices scale by 3), so the Taylor series of every basis function is
//! obtained by running the basis construction on the series of x, y and z
//! with exact ring coefficients.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::params::ReeParams;
use crate::poly3::Poly3;
use crate::ring::{build_basis, BasisValues, CurveElement, Label, ReeRing};
use crate::series::{generator_series, SeriesAlgebra, TruncatedSeries};

/// Binomial coefficient mod 3 by Lucas' theorem.
pub fn binom_mod3(mut n: u64, mut k: u64) -> u8 {
    let mut acc = 1u8;
    while k > 0 {
        let (a, b) = ((n % 3) as u8, (k % 3) as u8);
        if b > a {
            return 0;
        }
        // C(a, b) mod 3 for digits: only C(2, 1) = 2 differs from 1.
        if a == 2 && b == 1 {
            acc = (acc * 2) % 3;
        }
        n /= 3;
        k /= 3;
    }
    acc
}

/// `a <=_3 b`: every base-3 digit of `a` is at most the digit of `b`.
pub fn leq3(mut a: u64, mut b: u64) -> bool {
    while a > 0 {
        if a % 3 > b % 3 {
            return false;
        }
        a /= 3;
        b /= 3;
    }
    true
}

fn check_index(p: &ReeParams, i: u64) -> Result<()> {
    if i > p.q2() {
        return Err(Error::IndexOutOfRange {
            index: i,
            max: p.q2(),
        });
    }
    Ok(())
}

/// `D^i u` for the solution `u` of `u^q - u = r(x)`, as a polynomial in x;
/// `None` for `i = 0`, where the answer is `u` itself.
fn deriv_as(p: &ReeParams, r: &Poly3, i: u64) -> Option<Poly3> {
    if i == 0 {
        return None;
    }
    let mut out = -&r.hasse(i);
    if i.is_multiple_of(p.q) {
        if let Some(prev) = deriv_as(p, r, i / p.q) {
            out.add_assign_ref(&prev.frobenius(p.q_log3()));
        }
    }
    Some(out)
}

/// `D^i y`; a polynomial in x for `i >= 1`.
pub fn deriv_y(ring: &ReeRing, i: u64) -> Result<CurveElement> {
    check_index(ring.params(), i)?;
    Ok(match deriv_as(ring.params(), ring.h(), i) {
        Some(poly) => CurveElement::from_poly(poly),
        None => ring.y(),
    })
}

/// `D^i z`; a polynomial in x for `i >= 1`.
pub fn deriv_z(ring: &ReeRing, i: u64) -> Result<CurveElement> {
    check_index(ring.params(), i)?;
    Ok(match deriv_as(ring.params(), ring.g(), i) {
        Some(poly) => CurveElement::from_poly(poly),
        None => ring.z(),
    })
}

/// Row indices of the small derivative table for x, y, z and w4.
pub fn table_rows(p: &ReeParams) -> [u64; 8] {
    let (q0, q) = (p.q0, p.q);
    [
        1,
        q0 + 1,
        2 * q0 + 1,
        q + 1,
        q + q0,
        2 * q,
        q * q0 + 1,
        q * q0 + q0,
    ]
}

/// Closed-form `D^i b` for `b` in {x, y, z, w4} at the tabulated indices.
pub fn deriv_table_b(ring: &ReeRing, b: Label, i: u64) -> Result<CurveElement> {
    let p = ring.params();
    let rows = table_rows(p);
    let row = rows
        .iter()
        .position(|&r| r == i)
        .ok_or(Error::IndexOutOfRange {
            index: i,
            max: p.q2(),
        })?;
    let (q0, q) = (p.q0, p.q);
    let x = |e: u64| ring.monomial(e, 0, 0, 1);
    let ell = |e: u64| ring.pow(&ring.ell(), e);
    let one = ring.one();
    let zero = ring.zero();
    let out = match b {
        Label::X => {
            if row == 0 {
                one
            } else {
                zero
            }
        }
        Label::Y => match row {
            0 => x(q0),
            1 => one,
            4 => ring.constant(-1),
            _ => zero,
        },
        Label::Z => match row {
            0 => x(2 * q0),
            1 => ring.neg(&x(q0)),
            2 => one,
            4 => x(q0),
            _ => zero,
        },
        Label::W(4) => match row {
            0 => {
                let t = ring.add(&x(2 * q0 + 1), &ring.mul(&x(q0), &ring.y()));
                ring.neg(&ring.add(&t, &ring.z()))
            }
            1 => ring.sub(&x(q0 + 1), &ring.y()),
            2 => ring.neg(&x(q)),
            3 => ring.neg(&ell(2 * q0)),
            4 => ring.add(&ring.sub(&ell(q0 + 1), &x(q0 + 1)), &ring.y()),
            5 => ell(2 * q0),
            6 => ring.neg(&ell(q + q0)),
            _ => ring.neg(&ell(q + 1)),
        },
        other => return Err(Error::UnknownLabel(other.to_string())),
    };
    Ok(out)
}

/// Exact derivative engine for one parameter set, with cached Taylor
/// series of the generators, their powers and the basis functions.
pub struct HasseEngine {
    ring: ReeRing,
    top: u64,
    gens: [TruncatedSeries<CurveElement>; 3],
    basis: OnceLock<BasisValues<TruncatedSeries<CurveElement>>>,
    powers: Mutex<HashMap<(u8, u32), Arc<TruncatedSeries<CurveElement>>>>,
}

impl HasseEngine {
    pub fn new(p: &ReeParams) -> Self {
        let ring = ReeRing::new(p);
        let top = p.q2();
        let gens = generator_series(&ring, p, top + 1, ring.x(), ring.y(), ring.z());
        Self {
            ring,
            top,
            gens,
            basis: OnceLock::new(),
            powers: Mutex::new(HashMap::new()),
        }
    }

    pub fn ring(&self) -> &ReeRing {
        &self.ring
    }

    pub fn params(&self) -> &ReeParams {
        self.ring.params()
    }

    /// Largest supported derivative index, q^2.
    pub fn max_index(&self) -> u64 {
        self.top
    }

    pub fn series_algebra(&self) -> SeriesAlgebra<'_, ReeRing> {
        SeriesAlgebra::new(&self.ring, self.top + 1)
    }

    /// Taylor series of x, y and z up to `t^(q^2)`.
    pub fn generator_series(&self) -> &[TruncatedSeries<CurveElement>; 3] {
        &self.gens
    }

    /// Taylor series of 1, x, y, z, w1..w10 and v.
    pub fn basis_series(&self) -> &BasisValues<TruncatedSeries<CurveElement>> {
        self.basis.get_or_init(|| {
            let sa = self.series_algebra();
            let [tx, ty, tz] = &self.gens;
            build_basis(&sa, self.params(), tx, ty, tz)
        })
    }

    /// `D^i` of a basis function.
    pub fn basis_derivative(&self, label: Label, i: u64) -> Result<CurveElement> {
        check_index(self.params(), i)?;
        self.basis_series().get(label).coeff(&self.ring, i)
    }

    fn power(&self, var: u8, e: u32) -> Arc<TruncatedSeries<CurveElement>> {
        if let Some(hit) = self.powers.lock().unwrap().get(&(var, e)) {
            return hit.clone();
        }
        let sa = self.series_algebra();
        let base = &self.gens[var as usize];
        let val = Arc::new(sa.pow(base, e as u64));
        self.powers
            .lock()
            .unwrap()
            .entry((var, e))
            .or_insert(val)
            .clone()
    }

    /// `D^i f` by the Leibniz rule over `x^a * y^b * z^c`.
    pub fn hasse_derivative(&self, f: &CurveElement, i: u64) -> Result<CurveElement> {
        check_index(self.params(), i)?;
        let ring = &self.ring;
        let mut acc = ring.zero();
        for (&(b, c), poly) in f.groups() {
            let yb = self.power(1, b);
            let zc = self.power(2, c);
            for (j, ycoef) in yb.terms() {
                if *j > i {
                    break;
                }
                for (l, zcoef) in zc.terms() {
                    if j + l > i {
                        break;
                    }
                    let dp = poly.hasse(i - j - l);
                    if dp.is_zero() {
                        continue;
                    }
                    let term = ring.mul(ycoef, zcoef).mul_poly(&dp);
                    acc = ring.add(&acc, &term);
                }
            }
        }
        Ok(acc)
    }

    /// The whole Taylor series of `f` up to `t^(q^2)`.
    pub fn taylor_series(&self, f: &CurveElement) -> TruncatedSeries<CurveElement> {
        let sa = self.series_algebra();
        let mut acc = sa.zero();
        for (&(b, c), poly) in f.groups() {
            let yz = sa.mul(&self.power(1, b), &self.power(2, c));
            let top = poly.degree().unwrap_or(0).min(self.top);
            let terms = (0..=top)
                .map(|r| (r, CurveElement::from_poly(poly.hasse(r))))
                .collect();
            let tp = TruncatedSeries::from_sorted(&self.ring, self.top + 1, terms);
            acc = sa.add(&acc, &sa.mul(&tp, &yz));
        }
        acc
    }
}
