//! Order sequences, Frobenius orders and the triangular matrices of
//! derivative rows, by greedy rank growth over the function field.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldContext, FieldElement};
use crate::hasse::{leq3, HasseEngine};
use crate::identities::Backend;
use crate::params::{ReeParams, SymbolicIndex};
use crate::ring::{CurveElement, Label, ReeRing, D14, E7};
use crate::series::{expand_basis, sample_points, CurvePoint, TruncatedSeries};
use crate::support::support_union;

/// Largest s for exact elimination; entry growth exhausts memory at s = 3.
pub const SYMBOLIC_ORDERS_MAX_S: u32 = 2;

/// The linear series spanned by all fourteen basis functions, or the
/// seven-dimensional subseries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    D,
    E,
}

impl Family {
    pub fn labels(self) -> &'static [Label] {
        match self {
            Family::D => &D14,
            Family::E => &E7,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::D => "D",
            Family::E => "E",
        }
    }

    /// The orders stated for the family, as symbolic indices.
    pub fn stated_orders(self) -> Vec<SymbolicIndex> {
        let texts: &[&str] = match self {
            Family::D => &[
                "0", "1", "q0", "2q0", "3q0", "q", "q+q0", "2q", "qq0", "qq0+q0", "qq0+q", "2qq0",
                "3qq0", "q^2",
            ],
            Family::E => &["0", "1", "3q0", "q", "2q", "3qq0", "q^2"],
        };
        texts
            .iter()
            .map(|t| SymbolicIndex::parse(t).expect("well formed"))
            .collect()
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D" | "d" => Ok(Family::D),
            "E" | "e" => Ok(Family::E),
            _ => Err(Error::UnknownLabel(s.to_string())),
        }
    }
}

/// Why an index was accepted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankWitness {
    pub order: u64,
    /// Symbolic form of the order when it is unambiguous.
    pub symbolic: Option<String>,
    /// Symbolic backend: the pivot column and the size of the pivot;
    /// series backend: the sample point where the rank went up.
    pub certificate: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderSequence {
    pub family: Vec<String>,
    pub orders: Vec<u64>,
    pub witnesses: Vec<RankWitness>,
    pub backend: String,
    pub points: u32,
}

impl OrderSequence {
    pub fn sum(&self) -> u128 {
        self.orders.iter().map(|&e| e as u128).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrobeniusOrders {
    pub nu: Vec<u64>,
    /// The order omitted from `nu`, when the order sequence is supplied.
    pub omitted: Option<u64>,
    /// Position of the omitted order in the order sequence.
    pub omitted_index: Option<usize>,
}

/// Symbolic label for `n` when the mixed-radix form is unique.
pub fn symbolic_label(n: u64, p: &ReeParams) -> Option<String> {
    if p.s < 2 {
        return None;
    }
    SymbolicIndex::decompose(n, p).map(|i| i.to_string())
}

/// Default scan range: the support union, capped at q^2.
pub fn default_candidates(p: &ReeParams) -> Result<BTreeSet<u64>> {
    Ok(support_union(p)?
        .into_iter()
        .filter(|&i| i <= p.q2())
        .collect())
}

/// Row echelon form over the coordinate ring, eliminating by
/// cross-multiplication. The ring is a domain, so a row reduces to zero
/// exactly when it lies in the span of the earlier rows over the function
/// field.
pub struct RingEchelon<'a> {
    ring: &'a ReeRing,
    rows: Vec<(usize, Vec<CurveElement>)>,
}

impl<'a> RingEchelon<'a> {
    pub fn new(ring: &'a ReeRing) -> Self {
        Self {
            ring,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds `row` if it is independent; returns the chosen pivot column.
    pub fn insert(&mut self, mut row: Vec<CurveElement>) -> Option<(usize, CurveElement)> {
        let ring = self.ring;
        for (pc, b) in &self.rows {
            if row[*pc].is_zero() {
                continue;
            }
            let (a, c) = (b[*pc].clone(), row[*pc].clone());
            for (r, bv) in row.iter_mut().zip(b) {
                let left = if a.is_one() {
                    r.clone()
                } else {
                    ring.mul(&a, r)
                };
                *r = ring.sub(&left, &ring.mul(&c, bv));
            }
        }
        // Smallest pivot keeps later cross-multiplications cheap.
        let pc = row
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .min_by_key(|(i, v)| (v.num_terms(), v.x_degree(), *i))?
            .0;
        let pivot = row[pc].clone();
        self.rows.push((pc, row));
        Some((pc, pivot))
    }
}

/// Row echelon form over a finite field with unit pivots.
pub struct FieldEchelon<'a> {
    ctx: &'a FieldContext,
    rows: Vec<(usize, Vec<FieldElement>)>,
}

impl<'a> FieldEchelon<'a> {
    pub fn new(ctx: &'a FieldContext) -> Self {
        Self {
            ctx,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, mut row: Vec<FieldElement>) -> Vec<FieldElement> {
        let ctx = self.ctx;
        for (pc, b) in &self.rows {
            let c = row[*pc];
            if c.is_zero() {
                continue;
            }
            for (r, bv) in row.iter_mut().zip(b) {
                *r = ctx.sub(*r, ctx.mul(c, *bv));
            }
        }
        row
    }

    /// True when `row` is independent of the rows already present.
    pub fn is_independent(&self, row: &[FieldElement]) -> bool {
        self.reduce(row.to_vec()).iter().any(|v| !v.is_zero())
    }

    /// Adds `row` if it is independent; returns its pivot column.
    pub fn insert(&mut self, row: Vec<FieldElement>) -> Option<usize> {
        let row = self.reduce(row);
        let pc = row.iter().position(|v| !v.is_zero())?;
        let inv = self.ctx.inv(row[pc]).expect("pivot is nonzero");
        let row: Vec<FieldElement> = row.iter().map(|v| self.ctx.mul(*v, inv)).collect();
        self.rows.push((pc, row));
        Some(pc)
    }
}

struct PointRows {
    point: CurvePoint,
    series: Vec<TruncatedSeries<FieldElement>>,
}

fn point_rows(
    p: &ReeParams,
    labels: &[Label],
    k: u32,
    seed: u64,
    trials: u32,
    prec: u64,
) -> Result<Vec<PointRows>> {
    if trials == 0 {
        return Err(Error::InvalidParameter(
            "at least one trial is required".into(),
        ));
    }
    sample_points(p, k, seed, trials)?
        .into_iter()
        .map(|point| {
            let basis = expand_basis(p, &point, prec)?;
            Ok(PointRows {
                series: basis.family(labels),
                point,
            })
        })
        .collect()
}

fn field_row(
    ctx: &FieldContext,
    series: &[TruncatedSeries<FieldElement>],
    i: u64,
) -> Result<Vec<FieldElement>> {
    series.iter().map(|s| s.coeff(ctx, i)).collect()
}

fn ring_row(engine: &HasseEngine, labels: &[Label], i: u64) -> Result<Vec<CurveElement>> {
    labels
        .iter()
        .map(|l| engine.basis_derivative(*l, i))
        .collect()
}

/// Rows fed to a greedy scan: an optional leading row, then `D^i` rows for
/// each candidate `i` in increasing order.
enum Lead {
    None,
    /// `(f^q)`.
    Frobenius,
}

struct ScanResult {
    accepted: Vec<(u64, String)>,
    points: u32,
}

fn scan_symbolic(
    engine: &HasseEngine,
    labels: &[Label],
    candidates: &BTreeSet<u64>,
    lead: Lead,
    target: usize,
) -> Result<ScanResult> {
    let ring = engine.ring();
    let mut ech = RingEchelon::new(ring);
    if let Lead::Frobenius = lead {
        let vals = crate::ring::basis_values(ring);
        let row = labels
            .iter()
            .map(|l| ring.frobenius(vals.get(*l), engine.params().q_log3()))
            .collect();
        ech.insert(row);
    }
    let mut accepted = Vec::new();
    for &i in candidates {
        if ech.rank() >= target {
            break;
        }
        let row = ring_row(engine, labels, i)?;
        if let Some((pc, pivot)) = ech.insert(row) {
            accepted.push((
                i,
                format!("pivot {} ({} terms)", labels[pc], pivot.num_terms()),
            ));
        }
    }
    Ok(ScanResult {
        accepted,
        points: 0,
    })
}

fn scan_series(
    p: &ReeParams,
    labels: &[Label],
    candidates: &BTreeSet<u64>,
    lead: Lead,
    target: usize,
    (k, trials, seed): (u32, u32, u64),
) -> Result<ScanResult> {
    let prec = candidates.last().copied().unwrap_or(0) + 1;
    let rows = point_rows(p, labels, k, seed, trials, prec)?;
    let mut echs: Vec<FieldEchelon> = rows
        .iter()
        .map(|r| FieldEchelon::new(r.point.ctx()))
        .collect();
    let mut selected = 0usize;
    if let Lead::Frobenius = lead {
        for (ech, pr) in echs.iter_mut().zip(&rows) {
            let ctx = pr.point.ctx();
            let row = field_row(ctx, &pr.series, 0)?
                .into_iter()
                .map(|v| ctx.frobenius_power(v, p.q_log3() as u64))
                .collect();
            ech.insert(row);
        }
        selected = 1;
    }
    let mut accepted = Vec::new();
    for &i in candidates {
        if selected >= target {
            break;
        }
        let mut witness = None;
        for (t, (ech, pr)) in echs.iter_mut().zip(&rows).enumerate() {
            let row = field_row(pr.point.ctx(), &pr.series, i)?;
            // A point whose rank already fell behind cannot certify.
            let full = ech.rank() == selected;
            if ech.insert(row).is_some() && full && witness.is_none() {
                witness = Some(t);
            }
        }
        if let Some(t) = witness {
            selected += 1;
            accepted.push((i, format!("rank {selected} at point {t}")));
        }
    }
    Ok(ScanResult {
        accepted,
        points: trials,
    })
}

/// Greedy scan over `candidates`: an index is an order when its derivative
/// row raises the rank of the rows already selected.
pub fn order_sequence(
    p: &ReeParams,
    labels: &[Label],
    candidates: &BTreeSet<u64>,
    backend: Backend,
    engine: Option<&HasseEngine>,
) -> Result<OrderSequence> {
    let n = labels.len();
    let scan = match backend {
        Backend::Symbolic => {
            let own;
            let eng = match engine {
                Some(e) => {
                    check_symbolic(p)?;
                    e
                }
                None => {
                    own = symbolic_engine(p)?;
                    &own
                }
            };
            scan_symbolic(eng, labels, candidates, Lead::None, n)?
        }
        Backend::Series { k, trials, seed } => {
            scan_series(p, labels, candidates, Lead::None, n, (k, trials, seed))?
        }
    };
    if scan.accepted.len() < n {
        return Err(Error::RankDeficiency(format!(
            "found {} of {} orders",
            scan.accepted.len(),
            n
        )));
    }
    Ok(OrderSequence {
        family: labels.iter().map(|l| l.to_string()).collect(),
        orders: scan.accepted.iter().map(|a| a.0).collect(),
        witnesses: scan
            .accepted
            .iter()
            .map(|(i, c)| RankWitness {
                order: *i,
                symbolic: symbolic_label(*i, p),
                certificate: c.clone(),
            })
            .collect(),
        backend: backend.name().to_string(),
        points: scan.points,
    })
}

fn check_symbolic(p: &ReeParams) -> Result<()> {
    if p.s > SYMBOLIC_ORDERS_MAX_S {
        return Err(Error::BackendUnavailable(format!(
            "exact elimination is limited to s <= {SYMBOLIC_ORDERS_MAX_S}"
        )));
    }
    Ok(())
}

fn symbolic_engine(p: &ReeParams) -> Result<HasseEngine> {
    check_symbolic(p)?;
    Ok(HasseEngine::new(p))
}

/// Frobenius orders: greedy scan starting from the row `(f^q)`. When
/// `eps` is given, the omitted order is identified.
pub fn frobenius_orders(
    p: &ReeParams,
    labels: &[Label],
    candidates: &BTreeSet<u64>,
    backend: Backend,
    engine: Option<&HasseEngine>,
    eps: Option<&OrderSequence>,
) -> Result<FrobeniusOrders> {
    let n = labels.len();
    let scan = match backend {
        Backend::Symbolic => {
            let own;
            let eng = match engine {
                Some(e) => {
                    check_symbolic(p)?;
                    e
                }
                None => {
                    own = symbolic_engine(p)?;
                    &own
                }
            };
            scan_symbolic(eng, labels, candidates, Lead::Frobenius, n)?
        }
        Backend::Series { k, trials, seed } => {
            scan_series(p, labels, candidates, Lead::Frobenius, n, (k, trials, seed))?
        }
    };
    let nu: Vec<u64> = scan.accepted.iter().map(|a| a.0).collect();
    if nu.len() + 1 < n {
        return Err(Error::RankDeficiency(format!(
            "found {} of {} Frobenius orders",
            nu.len(),
            n - 1
        )));
    }
    let (omitted, omitted_index) = match eps {
        Some(e) => {
            let missing: Vec<(usize, u64)> = e
                .orders
                .iter()
                .copied()
                .enumerate()
                .filter(|(_, o)| !nu.contains(o))
                .collect();
            match missing.as_slice() {
                [(i, o)] => (Some(*o), Some(*i)),
                _ => (None, None),
            }
        }
        None => (None, None),
    };
    Ok(FrobeniusOrders {
        nu,
        omitted,
        omitted_index,
    })
}

/// Orders below q of the morphism with coordinates `f - f^q` over the
/// non-constant functions of the family (every index below q is scanned).
pub fn difference_morphism_orders(
    p: &ReeParams,
    labels: &[Label],
    backend: Backend,
    engine: Option<&HasseEngine>,
) -> Result<Vec<u64>> {
    let labels: Vec<Label> = labels
        .iter()
        .copied()
        .filter(|l| *l != Label::One)
        .collect();
    let e = p.q_log3();
    let mut out = Vec::new();
    match backend {
        Backend::Symbolic => {
            let own;
            let eng = match engine {
                Some(x) => {
                    check_symbolic(p)?;
                    x
                }
                None => {
                    own = symbolic_engine(p)?;
                    &own
                }
            };
            let ring = eng.ring();
            let vals = crate::ring::basis_values(ring);
            let mut ech = RingEchelon::new(ring);
            for i in 0..p.q {
                let row = if i == 0 {
                    labels
                        .iter()
                        .map(|l| {
                            let f = vals.get(*l);
                            ring.sub(f, &ring.frobenius(f, e))
                        })
                        .collect()
                } else {
                    ring_row(eng, &labels, i)?
                };
                if ech.insert(row).is_some() {
                    out.push(i);
                }
            }
        }
        Backend::Series { k, trials, seed } => {
            let rows = point_rows(p, &labels, k, seed, trials, p.q)?;
            let mut echs: Vec<FieldEchelon> = rows
                .iter()
                .map(|r| FieldEchelon::new(r.point.ctx()))
                .collect();
            for i in 0..p.q {
                let mut up = false;
                for (ech, pr) in echs.iter_mut().zip(&rows) {
                    let ctx = pr.point.ctx();
                    let mut row = field_row(ctx, &pr.series, i)?;
                    if i == 0 {
                        row = row
                            .into_iter()
                            .map(|v| ctx.sub(v, ctx.frobenius_power(v, e as u64)))
                            .collect();
                    }
                    let full = ech.rank() == out.len();
                    if ech.insert(row).is_some() && full {
                        up = true;
                    }
                }
                if up {
                    out.push(i);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TriangularReport {
    pub diagonal: Vec<CurveElement>,
    /// `(row, column)` positions below the diagonal with nonzero entries.
    pub below_diagonal_nonzero: Vec<(usize, usize)>,
}

impl TriangularReport {
    pub fn is_upper_triangular(&self) -> bool {
        self.below_diagonal_nonzero.is_empty()
    }
}

/// The matrix `[D^i f]` for the given rows and columns, checked for zeros
/// below the diagonal.
pub fn triangular_check(
    engine: &HasseEngine,
    rows: &[SymbolicIndex],
    cols: &[Label],
) -> Result<TriangularReport> {
    if rows.len() != cols.len() {
        return Err(Error::InvalidParameter(format!(
            "{} rows but {} columns",
            rows.len(),
            cols.len()
        )));
    }
    let p = engine.params();
    let mut diagonal = Vec::new();
    let mut bad = Vec::new();
    for (r, idx) in rows.iter().enumerate() {
        for (c, l) in cols.iter().enumerate().take(r + 1) {
            let v = engine.basis_derivative(*l, idx.value(p))?;
            if c == r {
                diagonal.push(v);
            } else if !v.is_zero() {
                bad.push((r, c));
            }
        }
    }
    Ok(TriangularReport {
        diagonal,
        below_diagonal_nonzero: bad,
    })
}

/// Rows and columns of the 12 x 12 matrix for the full series.
pub fn twelve_by_twelve() -> (Vec<SymbolicIndex>, Vec<Label>) {
    let rows = [
        "0",
        "1",
        "q0+1",
        "2q0+1",
        "3q0+1",
        "q+3q0+1",
        "2q+3q0+1",
        "qq0+2q+q0",
        "qq0+q+2q0+1",
        "qq0+2q+3q0",
        "qq0+3q+3q0",
        "2qq0+3q0+1",
    ];
    let cols = [
        Label::One,
        Label::X,
        Label::Y,
        Label::Z,
        Label::W(1),
        Label::W(2),
        Label::W(3),
        Label::W(4),
        Label::W(7),
        Label::W(5),
        Label::W(9),
        Label::W(10),
    ];
    (
        rows.iter()
            .map(|t| SymbolicIndex::parse(t).expect("well formed"))
            .collect(),
        cols.to_vec(),
    )
}

/// Rows and columns of the 5 x 5 matrix for the subseries.
pub fn five_by_five() -> (Vec<SymbolicIndex>, Vec<Label>) {
    let rows = ["0", "1", "3q0+1", "q+3q0+1", "2q+3q0+1"];
    (
        rows.iter()
            .map(|t| SymbolicIndex::parse(t).expect("well formed"))
            .collect(),
        vec![Label::One, Label::X, Label::W(1), Label::W(2), Label::W(3)],
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PadicVerdict {
    pub closed: bool,
    /// `(mu, eps)` with `mu <=_3 eps`, `eps` in the set and `mu` not.
    pub missing: Vec<(u64, u64)>,
}

/// Checks that a set of orders is closed downward under digit dominance.
pub fn padic_closure_check(orders: &[u64]) -> PadicVerdict {
    let set: BTreeSet<u64> = orders.iter().copied().collect();
    let mut missing = Vec::new();
    for &e in &set {
        for mu in dominated(e) {
            if !set.contains(&mu) {
                missing.push((mu, e));
            }
        }
    }
    PadicVerdict {
        closed: missing.is_empty(),
        missing,
    }
}

/// Every `mu` with `mu <=_3 e`, by enumerating digit choices.
fn dominated(e: u64) -> Vec<u64> {
    let mut out = vec![0u64];
    let (mut rest, mut place) = (e, 1u64);
    while rest > 0 {
        let digit = rest % 3;
        let prev = out.clone();
        for d in 1..=digit {
            out.extend(prev.iter().map(|v| v + d * place));
        }
        rest /= 3;
        place *= 3;
    }
    debug_assert!(out.iter().all(|&m| leq3(m, e)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn padic_examples() {
        assert!(padic_closure_check(&[0, 1, 3]).closed);
        let v = padic_closure_check(&[0, 4]);
        assert!(!v.closed);
        assert!(v.missing.contains(&(1, 4)) && v.missing.contains(&(3, 4)));
        let mut d = dominated(13);
        d.sort();
        assert_eq!(d, vec![0, 1, 3, 4, 9, 10, 12, 13]);
    }

    #[test]
    fn trivial_family() {
        let p = ReeParams::new(1).unwrap();
        let c: BTreeSet<u64> = (0..10).collect();
        let eng = HasseEngine::new(&p);
        let s = order_sequence(
            &p,
            &[Label::One, Label::X],
            &c,
            Backend::Symbolic,
            Some(&eng),
        )
        .unwrap();
        assert_eq!(s.orders, vec![0, 1]);
        let t = triangular_check(&eng, &[SymbolicIndex::ZERO], &[Label::One]).unwrap();
        assert!(t.diagonal[0].is_one());
    }
}
