//! Vanishing orders at points, Weierstrass weights and the degree count of
//! the ramification divisor.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::orders::{Family, FieldEchelon};
use crate::params::ReeParams;
use crate::ring::Label;
use crate::series::{expand_basis, CurvePoint, TruncatedSeries};

/// The `(family, P)`-orders together with the generic orders they are
/// compared against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VanishingProfile {
    pub point: String,
    pub rational: bool,
    pub j: Vec<u64>,
    pub eps: Vec<u64>,
    pub weight: u128,
}

impl VanishingProfile {
    pub fn is_weierstrass(&self) -> bool {
        self.weight > 0
    }
}

/// Precision needed to see every order at a rational point.
pub fn default_precision(p: &ReeParams) -> u64 {
    p.m_value as u64 + 1
}

/// Orders of vanishing at `pt` of the sections of the family: the
/// coefficient indices where the rank of the truncated expansion matrix
/// goes up.
pub fn vanishing_orders(
    p: &ReeParams,
    labels: &[Label],
    pt: &CurvePoint,
    prec: u64,
) -> Result<Vec<u64>> {
    let basis = expand_basis(p, pt, prec)?;
    let series: Vec<TruncatedSeries<FieldElement>> = basis.family(labels);
    let ctx = pt.ctx();
    let n = labels.len();

    // Columns are sparse, so only indices where some expansion has a term
    // can raise the rank.
    let mut cols: Vec<u64> = series
        .iter()
        .flat_map(|s| s.terms().iter().map(|(i, _)| *i))
        .collect();
    cols.sort_unstable();
    cols.dedup();

    let mut ech = FieldEchelon::new(ctx);
    let mut out = Vec::with_capacity(n);
    for i in cols {
        let col: Vec<FieldElement> = series
            .iter()
            .map(|s| s.get(i).copied().unwrap_or_else(|| ctx.zero()))
            .collect();
        if ech.insert(col).is_some() {
            out.push(i);
            if out.len() == n {
                return Ok(out);
            }
        }
    }
    Err(Error::PrecisionShortfall {
        needed: prec + 1,
        prec,
    })
}

/// `sum (j_i - eps_i)`.
pub fn weierstrass_weight(j: &[u64], eps: &[u64]) -> Result<u128> {
    if j.len() != eps.len() {
        return Err(Error::InvalidParameter(format!(
            "{} vanishing orders against {} orders",
            j.len(),
            eps.len()
        )));
    }
    let mut w = 0u128;
    for (a, b) in j.iter().zip(eps) {
        if a < b {
            return Err(Error::InvalidParameter(format!(
                "vanishing order {a} below generic order {b}"
            )));
        }
        w += (a - b) as u128;
    }
    Ok(w)
}

pub fn profile(
    p: &ReeParams,
    labels: &[Label],
    pt: &CurvePoint,
    eps: &[u64],
    prec: u64,
) -> Result<VanishingProfile> {
    let j = vanishing_orders(p, labels, pt, prec)?;
    let weight = weierstrass_weight(&j, eps)?;
    Ok(VanishingProfile {
        point: pt.describe(),
        rational: pt.is_rational(p),
        j,
        eps: eps.to_vec(),
        weight,
    })
}

pub fn is_weierstrass(
    p: &ReeParams,
    labels: &[Label],
    pt: &CurvePoint,
    eps: &[u64],
) -> Result<bool> {
    Ok(profile(p, labels, pt, eps, default_precision(p))?.is_weierstrass())
}

/// Vanishing orders at the origin, in closed form.
pub fn origin_profile_formula(family: Family, p: &ReeParams) -> Vec<u64> {
    let (q0, q) = (p.q0, p.q);
    let qq0 = p.qq0();
    let q2 = p.q2();
    match family {
        Family::D => vec![
            0,
            1,
            1 + q0,
            1 + 2 * q0,
            1 + 3 * q0,
            1 + 2 * q0 + q,
            1 + 3 * q0 + q,
            1 + 3 * q0 + 2 * q,
            1 + 2 * q0 + q + qq0,
            1 + 3 * q0 + q + qq0,
            1 + 3 * q0 + 2 * q + qq0,
            1 + 3 * q0 + 2 * q + 2 * qq0,
            1 + 3 * q0 + 2 * q + 3 * qq0,
            1 + 3 * q0 + 2 * q + 3 * qq0 + q2,
        ],
        Family::E => vec![
            0,
            1,
            1 + 3 * q0,
            1 + 3 * q0 + q,
            1 + 3 * q0 + 2 * q,
            1 + 3 * q0 + 2 * q + 3 * qq0,
            1 + 3 * q0 + 2 * q + 3 * qq0 + q2,
        ],
    }
}

/// Weight at a rational point, in closed form.
pub fn rational_weight_formula(family: Family, p: &ReeParams) -> u128 {
    let (q0, q, qq0) = (p.q0 as u128, p.q as u128, p.qq0() as u128);
    match family {
        Family::D => 3 * qq0 + 9 * q + 23 * q0 + 12,
        Family::E => 3 * qq0 + 4 * q + 12 * q0 + 5,
    }
}

/// Both computations of the degree of the ramification divisor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeAudit {
    pub family: String,
    pub genus: u128,
    pub two_g_minus_2: u128,
    pub eps_sum: u128,
    pub dimension: u128,
    pub m: u128,
    /// `(2g - 2) sum eps + (r + 1) m`.
    pub degree: u128,
    pub rational_weight: u128,
    pub n_points: u128,
    /// Weight at a rational point times the number of rational points.
    pub weighted_count: u128,
}

impl DegreeAudit {
    pub fn equation(&self) -> String {
        format!(
            "{}*{} + {}*{} = {} = {}*{}",
            self.two_g_minus_2,
            self.eps_sum,
            self.dimension,
            self.m,
            self.degree,
            self.rational_weight,
            self.n_points
        )
    }
}

/// Checks `(2g - 2) sum eps + (r + 1) m = w N`, where `w` is the weight at a
/// rational point, so that the rational points carry the whole divisor.
pub fn divisor_degree_audit(p: &ReeParams, family: Family, eps: &[u64]) -> Result<DegreeAudit> {
    if eps.len() != family.labels().len() {
        return Err(Error::InvalidParameter(format!(
            "{} orders for a family of {}",
            eps.len(),
            family.labels().len()
        )));
    }
    let over = || Error::Overflow("degree audit".into());
    let two_g_minus_2 = (2 * p.g).checked_sub(2).ok_or_else(over)?;
    let eps_sum: u128 = eps.iter().map(|&e| e as u128).sum();
    let dimension = eps.len() as u128;
    let degree = two_g_minus_2
        .checked_mul(eps_sum)
        .and_then(|a| a.checked_add(dimension.checked_mul(p.m_value)?))
        .ok_or_else(over)?;
    let rational_weight = rational_weight_formula(family, p);
    let weighted_count = rational_weight.checked_mul(p.n_points).ok_or_else(over)?;
    let audit = DegreeAudit {
        family: family.name().to_string(),
        genus: p.g,
        two_g_minus_2,
        eps_sum,
        dimension,
        m: p.m_value,
        degree,
        rational_weight,
        n_points: p.n_points,
        weighted_count,
    };
    if degree != weighted_count {
        return Err(Error::AuditMismatch(audit.equation()));
    }
    Ok(audit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_arithmetic() {
        assert_eq!(weierstrass_weight(&[0, 2, 5], &[0, 1, 3]).unwrap(), 3);
        assert!(weierstrass_weight(&[0, 1], &[0, 2]).is_err());
        assert!(weierstrass_weight(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn closed_forms_at_s1() {
        let p = ReeParams::new(1).unwrap();
        let j = origin_profile_formula(Family::D, &p);
        assert_eq!(*j.last().unwrap() as u128, p.m_value);
        assert_eq!(rational_weight_formula(Family::D, &p), 567);
        assert_eq!(rational_weight_formula(Family::E, &p), 392);
    }
}
