//! Support sets: index sets containing every `i <= q^2` with `D^i f != 0`.
//!
//! The constructed sets follow the Artin-Schreier relations of the basis:
//! `nA + B` for each term `f^n (b^q - b)`, then closure under `i -> qi`.
//! Set sums cannot see cancellation inside a product, so for w9 and w10 the
//! construction keeps a few indices whose derivatives vanish. `support_for`
//! drops those by checking the exact Taylor coefficients at the reference s.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::hasse::HasseEngine;
use crate::params::{ReeParams, SymbolicIndex};
use crate::ring::{relation, Label, D14};

pub use crate::hasse::leq3;

/// Reference parameter at which symbolic labels are recovered; mixed-radix
/// digits are unique from s = 2 on.
pub const REFERENCE_S: u32 = 2;

/// Columns of the two printed support tables, in printed order.
pub const TYPE1_COLUMNS: [Label; 6] = [
    Label::X,
    Label::W(1),
    Label::W(2),
    Label::W(3),
    Label::W(6),
    Label::W(8),
];
pub const TYPE2_COLUMNS: [Label; 7] = [
    Label::Y,
    Label::Z,
    Label::W(4),
    Label::W(7),
    Label::W(5),
    Label::W(9),
    Label::W(10),
];

/// `nA + B`, truncated to `[0, q^2]`.
pub fn combine(n: u64, a: &BTreeSet<u64>, b: &BTreeSet<u64>, p: &ReeParams) -> BTreeSet<u64> {
    let top = p.q2();
    let mut out = BTreeSet::new();
    for &x in a {
        let Some(nx) = x.checked_mul(n).filter(|&v| v <= top) else {
            continue;
        };
        for &y in b {
            if nx + y > top {
                break;
            }
            out.insert(nx + y);
        }
    }
    out
}

fn with_q_multiples(t: &BTreeSet<u64>, p: &ReeParams) -> BTreeSet<u64> {
    let mut out = t.clone();
    out.extend(combine(p.q, t, &BTreeSet::from([0]), p));
    out
}

fn set(v: &[u64]) -> BTreeSet<u64> {
    v.iter().copied().collect()
}

/// The hand-computed starting sets: `S_x`, `S_{x^q-x}`, `S_{y^q-y}`, `S_y`,
/// `S_{z^q-z}` and `S_z`.
pub fn support_base(p: &ReeParams) -> BTreeMap<&'static str, BTreeSet<u64>> {
    let (q0, q, qq0, q2) = (p.q0, p.q, p.qq0(), p.q2());
    let mut m = BTreeMap::new();
    m.insert("x", set(&[0, 1]));
    m.insert("x^q-x", set(&[0, 1, q]));
    m.insert("y^q-y", set(&[0, 1, q0, q0 + 1, q, q + q0]));
    m.insert("y", set(&[0, 1, q0, q0 + 1, q, q + q0, qq0, qq0 + q, q2]));
    m.insert(
        "z^q-z",
        set(&[0, 1, q0, q0 + 1, 2 * q0, 2 * q0 + 1, q, q + q0, q + 2 * q0]),
    );
    m.insert(
        "z",
        set(&[
            0,
            1,
            q0,
            q0 + 1,
            2 * q0,
            2 * q0 + 1,
            q,
            q + q0,
            q + 2 * q0,
            qq0,
            qq0 + q,
            2 * qq0,
            2 * qq0 + q,
            q2,
        ]),
    );
    m
}

/// Support sets of `b^q - b` (when `artin` is set) or of `b` itself.
struct Builder<'a> {
    p: &'a ReeParams,
    base: BTreeMap<&'static str, BTreeSet<u64>>,
    memo: BTreeMap<(Label, bool), BTreeSet<u64>>,
}

impl<'a> Builder<'a> {
    fn new(p: &'a ReeParams) -> Self {
        Self {
            p,
            base: support_base(p),
            memo: BTreeMap::new(),
        }
    }

    fn get(&mut self, label: Label, artin: bool) -> Result<BTreeSet<u64>> {
        if let Some(hit) = self.memo.get(&(label, artin)) {
            return Ok(hit.clone());
        }
        let key = match (label, artin) {
            (Label::One, _) => return Ok(set(&[0])),
            (Label::X, false) => Some("x"),
            (Label::X, true) => Some("x^q-x"),
            (Label::Y, false) => Some("y"),
            (Label::Y, true) => Some("y^q-y"),
            (Label::Z, false) => Some("z"),
            (Label::Z, true) => Some("z^q-z"),
            _ => None,
        };
        let out = if let Some(k) = key {
            self.base[k].clone()
        } else if artin {
            let terms = relation(label).ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            let mut t = BTreeSet::new();
            for term in terms {
                let sf = self.get(term.f, false)?;
                let sb = self.get(term.b, true)?;
                t.extend(combine(term.exponent.value(self.p), &sf, &sb, self.p));
            }
            t
        } else {
            let t = self.get(label, true)?;
            with_q_multiples(&t, self.p)
        };
        self.memo.insert((label, artin), out.clone());
        Ok(out)
    }
}

/// The constructed `S_f` at the given parameters.
pub fn support_constructed(label: Label, p: &ReeParams) -> Result<BTreeSet<u64>> {
    if label == Label::V {
        return Err(Error::UnknownLabel(label.to_string()));
    }
    Builder::new(p).get(label, false)
}

/// Indices of the nonzero Taylor coefficients of a basis function.
pub fn exact_support(engine: &HasseEngine, label: Label) -> BTreeSet<u64> {
    engine
        .basis_series()
        .get(label)
        .terms()
        .iter()
        .map(|t| t.0)
        .collect()
}

fn reference_engine() -> &'static HasseEngine {
    static ENGINE: OnceLock<HasseEngine> = OnceLock::new();
    ENGINE.get_or_init(|| HasseEngine::new(&ReeParams::new(REFERENCE_S).expect("valid s")))
}

/// `S`: the union of `S_f` over the fourteen basis functions, at `p`.
pub fn support_union(p: &ReeParams) -> Result<BTreeSet<u64>> {
    let mut out = BTreeSet::from([0]);
    for l in D14.iter().skip(1) {
        out.extend(support_for(*l)?.values(p));
    }
    Ok(out)
}

/// A support set with symbolic indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSet {
    pub label: String,
    pub indices: BTreeSet<SymbolicIndex>,
}

impl SupportSet {
    /// Numeric values at `p`; at s = 1 distinct labels may coincide.
    pub fn values(&self, p: &ReeParams) -> BTreeSet<u64> {
        self.indices.iter().map(|i| i.value(p)).collect()
    }

    pub fn contains(&self, i: &SymbolicIndex) -> bool {
        self.indices.contains(i)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

fn symbolize(values: &BTreeSet<u64>, reference: &ReeParams) -> Result<BTreeSet<SymbolicIndex>> {
    values
        .iter()
        .map(|&v| {
            SymbolicIndex::decompose(v, reference)
                .ok_or_else(|| Error::InvalidParameter(format!("index {v} has no symbolic form")))
        })
        .collect()
}

/// The constructed `S_f` with symbolic labels, read off at the reference s.
pub fn support_for_constructed(label: Label) -> Result<SupportSet> {
    let reference = ReeParams::new(REFERENCE_S)?;
    let values = support_constructed(label, &reference)?;
    Ok(SupportSet {
        label: label.to_string(),
        indices: symbolize(&values, &reference)?,
    })
}

/// `S_f` with symbolic labels: the constructed set, minus the indices whose
/// exact derivative vanishes at the reference s.
pub fn support_for(label: Label) -> Result<SupportSet> {
    let mut set = support_for_constructed(label)?;
    let engine = reference_engine();
    let exact = exact_support(engine, label);
    set.indices
        .retain(|i| exact.contains(&i.value(engine.params())));
    Ok(set)
}

/// Elements of `set` with no other element of `set` strictly below them
/// in the digit-wise order.
pub fn minimal_elements(set: &BTreeSet<u64>) -> BTreeSet<u64> {
    set.iter()
        .copied()
        .filter(|&e| !set.iter().any(|&m| m != e && leq3(m, e)))
        .collect()
}

/// One printed support table: symbolic rows, one column per function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppendixTable {
    pub columns: Vec<Label>,
    pub rows: Vec<(SymbolicIndex, Vec<bool>)>,
    /// Pairs of row labels that evaluate to the same integer at the
    /// requested s.
    pub collisions: Vec<(SymbolicIndex, SymbolicIndex)>,
}

impl AppendixTable {
    fn build(columns: &[Label], bound: Option<SymbolicIndex>, p: &ReeParams) -> Result<Self> {
        let sets: Vec<SupportSet> = columns
            .iter()
            .map(|&l| support_for(l))
            .collect::<Result<_>>()?;
        let mut rows: BTreeSet<SymbolicIndex> =
            sets.iter().flat_map(|s| s.indices.clone()).collect();
        if let Some(b) = bound {
            rows.retain(|r| *r <= b);
        }
        let rows: Vec<_> = rows
            .into_iter()
            .map(|r| (r, sets.iter().map(|s| s.contains(&r)).collect()))
            .collect();
        let mut by_value: BTreeMap<u64, SymbolicIndex> = BTreeMap::new();
        let mut collisions = Vec::new();
        for (r, _) in &rows {
            if let Some(prev) = by_value.insert(r.value(p), *r) {
                collisions.push((prev, *r));
            }
        }
        Ok(Self {
            columns: columns.to_vec(),
            rows,
            collisions,
        })
    }

    pub fn header(&self) -> Vec<String> {
        std::iter::once("i".to_string())
            .chain(self.columns.iter().map(|c| c.to_string()))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for (r, marks) in &self.rows {
            out.push_str(&r.label());
            for &m in marks {
                out.push(',');
                if m {
                    out.push('*');
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|(r, _)| r.label().len())
            .max()
            .unwrap_or(1)
            .max(1);
        let mut out = String::new();
        let _ = write!(out, "{:<width$}", "i");
        for c in &self.columns {
            let _ = write!(out, " {:>4}", c.to_string());
        }
        out.push('\n');
        for (r, marks) in &self.rows {
            let _ = write!(out, "{:<width$}", r.label());
            for &m in marks {
                let _ = write!(out, " {:>4}", if m { "*" } else { "" });
            }
            out.push('\n');
        }
        out
    }
}

/// Regenerates both support tables. The type-2 table lists rows up to
/// `2qq0+3q0+1`, the range needed for the order computation; its columns
/// continue above that bound.
pub fn emit_appendix_tables(p: &ReeParams) -> Result<(AppendixTable, AppendixTable)> {
    let t1 = AppendixTable::build(&TYPE1_COLUMNS, None, p)?;
    let t2 = AppendixTable::build(&TYPE2_COLUMNS, Some(SymbolicIndex::new(2, 0, 3, 1)), p)?;
    Ok((t1, t2))
}
