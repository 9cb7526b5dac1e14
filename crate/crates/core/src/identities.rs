//! Differential identities satisfied by the basis functions, encoded as small
//! expression trees and checked exactly, either on ring elements or on
//! series expansions at random points.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::hasse::HasseEngine;
use crate::params::{ReeParams, SymbolicIndex};
use crate::ring::{build_basis, relation, BasisValues, CurveElement, Label, D14, E7};
use crate::series::{
    expand_basis, sample_points, solve_as_series, CurvePoint, SeriesAlgebra, TruncatedSeries,
};
use crate::support::support_for;

/// Largest s accepted by the symbolic backend.
pub const SYMBOLIC_MAX_S: u32 = 3;

/// Which series a derivative leaf reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Operand {
    /// The function the identity is asserted for.
    Subject,
    /// The `f` of the relation defining the subject.
    F,
    /// The `b` of the relation defining the subject.
    B,
}

/// `g`, `g^q` or `g^q - g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Shape {
    Plain,
    Frob,
    FrobDiff,
}

/// Frobenius exponents that occur as outer powers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Power {
    Q0,
    ThreeQ0,
    Q,
}

impl Power {
    fn log3(self, p: &ReeParams) -> u32 {
        match self {
            Power::Q0 => p.s,
            Power::ThreeQ0 => p.s + 1,
            Power::Q => p.q_log3(),
        }
    }

    fn label(self) -> &'static str {
        match self {
            Power::Q0 => "q0",
            Power::ThreeQ0 => "3q0",
            Power::Q => "q",
        }
    }
}

/// Residual expression of an identity.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(i64),
    /// `l^e` with `l = x^q - x`.
    Ell(SymbolicIndex),
    /// `D^i` applied to an operand in a given shape.
    D(SymbolicIndex, Operand, Shape),
    Pow(Box<Expr>, Power),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
}

impl Expr {
    /// Every derivative leaf, with repetitions removed.
    pub fn leaves(&self) -> Vec<(SymbolicIndex, Operand, Shape)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<(SymbolicIndex, Operand, Shape)>) {
        match self {
            Expr::D(i, o, s) => {
                if !out.contains(&(*i, *o, *s)) {
                    out.push((*i, *o, *s));
                }
            }
            Expr::Pow(e, _) => e.collect_leaves(out),
            Expr::Sum(v) | Expr::Prod(v) => v.iter().for_each(|e| e.collect_leaves(out)),
            Expr::Int(_) | Expr::Ell(_) => {}
        }
    }

    /// Largest derivative index read from any operand.
    pub fn max_index(&self, p: &ReeParams) -> u64 {
        self.leaves()
            .iter()
            .map(|(i, _, _)| i.value(p))
            .max()
            .unwrap_or(0)
    }

    fn eval<A: Algebra>(&self, env: &Env<'_, A>) -> Result<A::Elem> {
        let alg = env.alg;
        Ok(match self {
            Expr::Int(c) => alg.scale(&alg.one(), *c),
            Expr::Ell(e) => alg.pow(&env.ell, e.value(env.p)),
            Expr::D(i, o, s) => env.deriv(i.value(env.p), *o, *s)?,
            Expr::Pow(e, w) => alg.frobenius(&e.eval(env)?, w.log3(env.p)),
            Expr::Sum(v) => {
                let mut acc = alg.zero();
                for e in v {
                    acc = alg.add(&acc, &e.eval(env)?);
                }
                acc
            }
            Expr::Prod(v) => {
                let mut acc = alg.one();
                for e in v {
                    if alg.is_zero(&acc) {
                        break;
                    }
                    acc = alg.mul(&acc, &e.eval(env)?);
                }
                acc
            }
        })
    }

    /// Plain-text rendering with the subject written as `subject`.
    pub fn render(&self, subject: &str) -> String {
        let mut s = String::new();
        self.render_into(subject, &mut s);
        s
    }

    fn render_into(&self, subject: &str, out: &mut String) {
        let name = |o: &Operand| match o {
            Operand::Subject => subject,
            Operand::F => "f",
            Operand::B => "b",
        };
        match self {
            Expr::Int(c) => {
                let _ = write!(out, "{c}");
            }
            Expr::Ell(e) if *e == SymbolicIndex::ONE => out.push('l'),
            Expr::Ell(e) => {
                let _ = write!(out, "l^({e})");
            }
            Expr::D(i, o, s) => {
                let g = name(o);
                let _ = match s {
                    Shape::Plain => write!(out, "D^({i}){g}"),
                    Shape::Frob => write!(out, "D^({i})({g}^q)"),
                    Shape::FrobDiff => write!(out, "D^({i})({g}^q-{g})"),
                };
            }
            Expr::Pow(e, w) => {
                out.push('(');
                e.render_into(subject, out);
                let _ = write!(out, ")^{}", w.label());
            }
            Expr::Sum(v) => {
                out.push('(');
                for (k, e) in v.iter().enumerate() {
                    if k > 0 {
                        out.push_str(" + ");
                    }
                    e.render_into(subject, out);
                }
                out.push(')');
            }
            Expr::Prod(v) => {
                for (k, e) in v.iter().enumerate() {
                    if k > 0 {
                        out.push('*');
                    }
                    e.render_into(subject, out);
                }
            }
        }
    }
}

struct Env<'a, A: Algebra> {
    alg: &'a A,
    p: &'a ReeParams,
    ell: A::Elem,
    subject: &'a TruncatedSeries<A::Elem>,
    f: Option<&'a TruncatedSeries<A::Elem>>,
    b: Option<&'a TruncatedSeries<A::Elem>>,
}

impl<A: Algebra> Env<'_, A> {
    fn deriv(&self, i: u64, o: Operand, s: Shape) -> Result<A::Elem> {
        let missing =
            || Error::InvalidParameter(format!("identity reads {o:?}, which is undefined"));
        let ser = match o {
            Operand::Subject => self.subject,
            Operand::F => self.f.ok_or_else(missing)?,
            Operand::B => self.b.ok_or_else(missing)?,
        };
        let alg = self.alg;
        let q = self.p.q;
        let frob = || -> Result<A::Elem> {
            if i.is_multiple_of(q) {
                Ok(alg.frobenius(&ser.coeff(alg, i / q)?, self.p.q_log3()))
            } else {
                Ok(alg.zero())
            }
        };
        Ok(match s {
            Shape::Plain => ser.coeff(alg, i)?,
            Shape::Frob => frob()?,
            Shape::FrobDiff => alg.sub(&frob()?, &ser.coeff(alg, i)?),
        })
    }
}

/// Functions an identity ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scope {
    /// All 14 functions 1, x, y, z, w1, ..., w10.
    AllBasis,
    /// w1, w2, w3, w6, w8, each with `w^q - w = f^(3q0) (x^q - x)`.
    TypeOne,
    /// The two parts `t` of each of w4, w5, w7, w9, w10, each with
    /// `t^q - t = f^q0 (b^q - b)`.
    TypeTwoPart,
}

/// A function an identity can be checked on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subject {
    Basis(Label),
    /// Term `index` (0 or 1) of the relation of a type-2 function.
    Part {
        owner: Label,
        index: u8,
    },
}

impl Subject {
    pub fn in_scope(scope: Scope) -> Vec<Subject> {
        match scope {
            Scope::AllBasis => D14.iter().map(|l| Subject::Basis(*l)).collect(),
            Scope::TypeOne => [1, 2, 3, 6, 8]
                .iter()
                .map(|i| Subject::Basis(Label::W(*i)))
                .collect(),
            Scope::TypeTwoPart => [4, 7, 5, 9, 10]
                .iter()
                .flat_map(|i| {
                    (0..2).map(move |index| Subject::Part {
                        owner: Label::W(*i),
                        index,
                    })
                })
                .collect(),
        }
    }

    /// The `(f, b)` labels of the relation term behind the subject.
    pub fn relation_pair(&self) -> Option<(Label, Label)> {
        let (owner, index) = match *self {
            Subject::Basis(l) => (l, 0),
            Subject::Part { owner, index } => (owner, index),
        };
        let terms = relation(owner)?;
        let t = terms.get(index as usize)?;
        Some((t.f, t.b))
    }

    pub fn name(&self) -> String {
        match self {
            Subject::Basis(l) => l.to_string(),
            Subject::Part { owner, index } => match self.relation_pair() {
                Some((f, b)) => format!("{owner}.t{}[f={f},b={b}]", index + 1),
                None => format!("{owner}.t{}", index + 1),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct IdentitySpec {
    pub name: String,
    pub scope: Scope,
    pub residual: Expr,
}

impl IdentitySpec {
    pub fn subjects(&self) -> Vec<Subject> {
        Subject::in_scope(self.scope)
    }

    /// The identity as `residual = 0`.
    pub fn formula(&self) -> String {
        let g = match self.scope {
            Scope::AllBasis => "f",
            Scope::TypeOne => "w",
            Scope::TypeTwoPart => "t",
        };
        format!("{} = 0", self.residual.render(g))
    }
}

fn ix(text: &str) -> SymbolicIndex {
    SymbolicIndex::parse(text).expect("catalog indices are well formed")
}

fn d(i: &str, o: Operand) -> Expr {
    Expr::D(ix(i), o, Shape::Plain)
}

fn dq(i: &str, o: Operand) -> Expr {
    Expr::D(ix(i), o, Shape::Frob)
}

fn dd(i: &str, o: Operand) -> Expr {
    Expr::D(ix(i), o, Shape::FrobDiff)
}

fn ell(e: &str) -> Expr {
    Expr::Ell(ix(e))
}

fn neg(e: Expr) -> Expr {
    Expr::Prod(vec![Expr::Int(-1), e])
}

fn sum(v: Vec<Expr>) -> Expr {
    Expr::Sum(v)
}

fn prod(v: Vec<Expr>) -> Expr {
    Expr::Prod(v)
}

fn pw(e: Expr, w: Power) -> Expr {
    Expr::Pow(Box::new(e), w)
}

fn spec(name: &str, scope: Scope, residual: Expr) -> IdentitySpec {
    IdentitySpec {
        name: name.to_string(),
        scope,
        residual,
    }
}

fn all_basis() -> Vec<IdentitySpec> {
    use Operand::Subject as S;
    let g = |i: &str| d(i, S);
    let l = ell;
    let lq_minus_l = || sum(vec![l("q"), neg(l("1"))]);
    let mut v = vec![spec(
        "frobenius-difference",
        Scope::AllBasis,
        sum(vec![dd("0", S), neg(prod(vec![l("1"), g("1")]))]),
    )];
    for (k, (a, b)) in [("q0", "q0+1"), ("2q0", "2q0+1"), ("3q0", "3q0+1")]
        .into_iter()
        .enumerate()
    {
        v.push(spec(
            &format!("kq0:{}", k + 1),
            Scope::AllBasis,
            sum(vec![g(a), prod(vec![l("1"), g(b)])]),
        ));
    }
    v.push(spec(
        "q-of-difference",
        Scope::AllBasis,
        sum(vec![
            dd("q", S),
            neg(g("1")),
            neg(prod(vec![l("1"), g("q+1")])),
        ]),
    ));
    let de = |name: &str, e: Expr| spec(&format!("de:{name}"), Scope::AllBasis, e);
    v.push(de(
        "q+1",
        sum(vec![
            prod(vec![l("q0"), g("q0+1")]),
            prod(vec![l("2q0"), g("2q0+1")]),
            prod(vec![l("3q0"), g("3q0+1")]),
            neg(g("q")),
            neg(prod(vec![l("1"), g("q+1")])),
        ]),
    ));
    v.push(de(
        "q+2q0",
        sum(vec![
            prod(vec![l("q0"), sum(vec![g("q+2q0"), g("2q0+1")])]),
            neg(g("q+q0")),
            neg(g("q0+1")),
        ]),
    ));
    v.push(de(
        "q+3q0",
        sum(vec![
            g("q"),
            prod(vec![l("q0"), g("q+q0")]),
            prod(vec![l("2q0"), g("q+2q0")]),
            prod(vec![l("3q0"), g("q+3q0")]),
        ]),
    ));
    v.push(de(
        "2q+q0",
        sum(vec![
            prod(vec![l("1"), g("2q+q0")]),
            neg(g("q0+1")),
            neg(g("q+q0")),
        ]),
    ));
    v.push(de(
        "3q",
        sum(vec![
            prod(vec![l("1"), g("3q")]),
            neg(g("2q")),
            neg(g("q+1")),
        ]),
    ));
    v.push(de(
        "qq0+1",
        sum(vec![
            prod(vec![l("1"), g("qq0+1")]),
            g("qq0"),
            neg(prod(vec![
                l("q"),
                sum(vec![prod(vec![l("q0"), g("2q0+1")]), neg(g("q0+1"))]),
            ])),
        ]),
    ));
    v.push(de(
        "qq0+2q0",
        sum(vec![
            prod(vec![l("2q0"), g("qq0+2q0")]),
            neg(prod(vec![l("q0"), g("qq0+q0")])),
            neg(prod(vec![l("q"), sum(vec![g("q0+1"), g("q+q0")])])),
        ]),
    ));
    v.push(de(
        "qq0+3q0",
        sum(vec![
            prod(vec![l("q0"), g("qq0+q0")]),
            prod(vec![l("2q0"), g("qq0+2q0")]),
            prod(vec![l("3q0"), g("qq0+3q0")]),
            neg(prod(vec![l("1"), g("qq0+1")])),
        ]),
    ));
    v.push(de(
        "qq0+q+q0",
        sum(vec![
            prod(vec![l("q+q0+1"), g("qq0+q+q0")]),
            neg(prod(vec![lq_minus_l(), l("q0"), g("qq0+q0")])),
        ]),
    ));
    v.push(de(
        "qq0+2q",
        sum(vec![
            prod(vec![
                l("2q"),
                sum(vec![prod(vec![l("1"), g("qq0+2q")]), neg(g("qq0+1"))]),
            ]),
            neg(prod(vec![
                lq_minus_l(),
                sum(vec![prod(vec![l("q"), g("qq0+q")]), g("qq0")]),
            ])),
        ]),
    ));
    v
}

fn type_one() -> Vec<IdentitySpec> {
    use Operand::{Subject as S, F};
    let w = |i: &str| d(i, S);
    let f3 = |i: &str| pw(d(i, F), Power::ThreeQ0);
    let l = ell;
    let closed = |name: &str, lhs: &str, rhs: Expr| {
        spec(
            &format!("w:{name}"),
            Scope::TypeOne,
            sum(vec![w(lhs), neg(rhs)]),
        )
    };
    vec![
        closed("3q0+1", "3q0+1", f3("1")),
        closed(
            "q",
            "q",
            sum(vec![
                pw(dd("0", F), Power::ThreeQ0),
                neg(prod(vec![l("1"), f3("q0")])),
            ]),
        ),
        closed("q+1", "q+1", f3("q0")),
        closed(
            "q+3q0",
            "q+3q0",
            sum(vec![neg(f3("1")), neg(prod(vec![l("1"), f3("q0+1")]))]),
        ),
        closed(
            "2q",
            "2q",
            sum(vec![neg(f3("q0")), neg(prod(vec![l("1"), f3("2q0")]))]),
        ),
        closed("3q", "3q", neg(f3("2q0"))),
        spec(
            "w-rel:2q+1",
            Scope::TypeOne,
            sum(vec![prod(vec![l("1"), w("2q+1")]), w("2q"), w("q+1")]),
        ),
        spec(
            "w-rel:q+1",
            Scope::TypeOne,
            sum(vec![
                w("q"),
                prod(vec![l("1"), w("q+1")]),
                neg(prod(vec![l("3q0"), w("3q0+1")])),
            ]),
        ),
        spec(
            "w-rel:q+3q0",
            Scope::TypeOne,
            sum(vec![prod(vec![l("3q0"), w("q+3q0")]), w("q")]),
        ),
    ]
}

fn type_two() -> Vec<IdentitySpec> {
    use Operand::{Subject as S, B, F};
    let l = ell;
    // (D^i f)^q0, with i = "0" meaning f^q0 itself.
    let fp = |i: &str| pw(d(i, F), Power::Q0);
    let fpq = |i: &str| pw(dq(i, F), Power::Q0);
    let b = |i: &str| d(i, B);
    let bq = |i: &str| dq(i, B);
    let bd = |i: &str| dd(i, B);
    let closed = |name: &str, terms: Vec<Expr>| {
        let mut v = vec![d(name, S)];
        v.extend(terms.into_iter().map(neg));
        spec(&format!("t:{name}"), Scope::TypeTwoPart, sum(v))
    };
    vec![
        closed(
            "q0+1",
            vec![prod(vec![fp("0"), b("q0+1")]), prod(vec![fp("1"), b("1")])],
        ),
        closed(
            "2q0+1",
            vec![
                prod(vec![fp("0"), b("2q0+1")]),
                prod(vec![fp("1"), b("q0+1")]),
            ],
        ),
        closed(
            "3q0+1",
            vec![
                prod(vec![fp("0"), b("3q0+1")]),
                prod(vec![fp("1"), b("2q0+1")]),
            ],
        ),
        closed(
            "q",
            vec![
                prod(vec![fp("0"), b("q")]),
                prod(vec![fp("1"), l("q0"), bq("q")]),
                prod(vec![fp("3q0+1"), l("q0+1"), b("1")]),
            ],
        ),
        closed(
            "q+1",
            vec![
                prod(vec![fp("0"), b("q+1")]),
                neg(prod(vec![fp("3q0+1"), l("q0"), b("1")])),
            ],
        ),
        closed(
            "q+q0",
            vec![
                prod(vec![fp("0"), b("q+q0")]),
                neg(prod(vec![fp("1"), bd("q")])),
                prod(vec![
                    fp("3q0+1"),
                    sum(vec![
                        prod(vec![l("q0+1"), b("q0+1")]),
                        neg(prod(vec![l("1"), b("1")])),
                    ]),
                ]),
            ],
        ),
        closed(
            "q+2q0",
            vec![
                prod(vec![fp("0"), b("q+2q0")]),
                prod(vec![fp("1"), b("q+q0")]),
                prod(vec![
                    fp("3q0+1"),
                    sum(vec![
                        prod(vec![l("q0+1"), b("2q0+1")]),
                        neg(prod(vec![l("1"), b("q0+1")])),
                    ]),
                ]),
            ],
        ),
        closed(
            "q+3q0",
            vec![
                prod(vec![fp("0"), b("q+3q0")]),
                prod(vec![fp("1"), b("q+2q0")]),
                neg(prod(vec![fp("3q0+1"), l("1"), b("2q0+1")])),
            ],
        ),
        closed(
            "2q",
            vec![
                prod(vec![fp("0"), b("2q")]),
                prod(vec![fp("3q0+1"), l("q0"), bd("q")]),
            ],
        ),
        closed(
            "2q+q0",
            vec![
                prod(vec![fp("0"), b("2q+q0")]),
                prod(vec![fp("1"), b("2q")]),
                neg(prod(vec![
                    fp("3q0+1"),
                    sum(vec![prod(vec![l("q0"), b("q+q0")]), bd("q")]),
                ])),
            ],
        ),
        closed(
            "3q",
            vec![
                prod(vec![fp("0"), b("3q")]),
                neg(prod(vec![fp("3q0+1"), l("q0"), b("2q")])),
            ],
        ),
        closed(
            "qq0",
            vec![
                prod(vec![fp("0"), b("qq0")]),
                prod(vec![fp("1"), l("q0"), bq("qq0")]),
                neg(prod(vec![fp("q"), l("1"), b("1")])),
                neg(prod(vec![fpq("q"), l("q"), bq("q")])),
            ],
        ),
        closed(
            "qq0+1",
            vec![prod(vec![fp("0"), b("qq0+1")]), prod(vec![fp("q"), b("1")])],
        ),
        closed(
            "qq0+q0",
            vec![
                prod(vec![fp("0"), b("qq0+q0")]),
                neg(prod(vec![fp("1"), bd("qq0")])),
                neg(prod(vec![fp("q"), l("1"), b("q0+1")])),
                neg(prod(vec![fp("q+1"), l("1"), b("1")])),
            ],
        ),
        closed(
            "qq0+2q0",
            vec![
                prod(vec![fp("0"), b("qq0+2q0")]),
                prod(vec![fp("1"), b("qq0+q0")]),
                neg(prod(vec![fp("q"), l("1"), b("2q0+1")])),
                neg(prod(vec![fp("q+1"), l("1"), b("q0+1")])),
            ],
        ),
        closed(
            "qq0+3q0",
            vec![
                prod(vec![fp("0"), b("qq0+3q0")]),
                neg(prod(vec![fp("q+1"), l("1"), b("2q0+1")])),
            ],
        ),
        closed(
            "qq0+q",
            vec![
                prod(vec![fp("0"), b("qq0+q")]),
                prod(vec![fp("1"), l("q0"), bq("qq0+q")]),
                neg(prod(vec![
                    fp("3q0+1"),
                    l("q0"),
                    sum(vec![b("qq0"), neg(bq("qq0"))]),
                ])),
                neg(prod(vec![fp("q"), bd("q")])),
                neg(prod(vec![fp("q+3q0"), l("1"), b("1")])),
                prod(vec![fpq("q"), bq("q")]),
            ],
        ),
        closed(
            "qq0+q+q0",
            vec![
                prod(vec![fp("0"), b("qq0+q+q0")]),
                neg(prod(vec![fp("1"), bd("qq0+q")])),
                neg(prod(vec![
                    fp("3q0+1"),
                    sum(vec![prod(vec![l("q0"), b("qq0+q0")]), bd("qq0")]),
                ])),
                prod(vec![fp("q"), b("q+q0")]),
                neg(prod(vec![fp("q+1"), bd("q")])),
                prod(vec![fp("q+3q0"), b("q0")]),
                neg(prod(vec![fp("q+3q0+1"), l("1"), b("1")])),
            ],
        ),
        closed(
            "qq0+2q",
            vec![
                prod(vec![fp("0"), b("qq0+2q")]),
                prod(vec![fp("3q0+1"), l("q0"), bd("qq0+q")]),
                neg(prod(vec![fp("q"), bd("2q")])),
                neg(prod(vec![fp("q+3q0"), bd("q")])),
            ],
        ),
    ]
}

/// The full catalog: identities for all basis functions, for type-1
/// functions, and closed forms for derivatives of type-2 parts.
pub fn identity_catalog() -> &'static [IdentitySpec] {
    static CATALOG: OnceLock<Vec<IdentitySpec>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let mut v = all_basis();
        v.extend(type_one());
        v.extend(type_two());
        v
    })
}

pub fn find_identity(name: &str) -> Result<&'static IdentitySpec> {
    identity_catalog()
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownLabel(name.to_string()))
}

/// Series precision that covers every derivative the catalog reads.
pub fn catalog_precision(p: &ReeParams) -> u64 {
    identity_catalog()
        .iter()
        .map(|s| s.residual.max_index(p))
        .max()
        .unwrap_or(0)
        + 1
}

/// Series of a part `t` with `t^q - t = f^q0 (b^q - b)`, normalised by
/// `t(0) = 0`; only coefficients from index 1 on are meaningful.
pub fn part_series<A: Algebra>(
    alg: &A,
    p: &ReeParams,
    prec: u64,
    f: &TruncatedSeries<A::Elem>,
    b: &TruncatedSeries<A::Elem>,
) -> TruncatedSeries<A::Elem> {
    let sa = SeriesAlgebra::new(alg, prec);
    let (f, b) = (f.truncate(prec), b.truncate(prec));
    let bq = sa.sub(&sa.frobenius(&b, p.q_log3()), &b);
    let h = sa.mul(&sa.frobenius(&f, p.s), &bq);
    solve_as_series(alg, p, alg.zero(), &h)
}

/// How identities are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Backend {
    /// Exact ring elements from the symbolic derivative engine.
    Symbolic,
    /// Series expansions at `trials` random points over GF(q^k).
    Series { k: u32, trials: u32, seed: u64 },
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Symbolic => "symbolic",
            Backend::Series { .. } => "series",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// The failing point; absent for symbolic residuals.
    pub point: Option<String>,
    pub residual: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub identity: String,
    pub subject: String,
    pub backend: String,
    pub passed: bool,
    /// Independent points evaluated; 0 for exact checks.
    pub points_tested: u32,
    pub witness: Option<Witness>,
    /// Indices `i` outside the support set of the subject at which the
    /// identity reads a nonzero `D^i`.
    pub support_exceptions: Vec<u64>,
}

fn clip(text: String) -> String {
    const MAX: usize = 400;
    if text.len() <= MAX {
        text
    } else {
        format!("{}...", &text[..MAX])
    }
}

struct PointData {
    point: CurvePoint,
    basis: BasisValues<TruncatedSeries<FieldElement>>,
    parts: HashMap<Subject, TruncatedSeries<FieldElement>>,
}

type PointKey = (u32, u64, u32, u64);

/// Identity checker for one parameter set, caching expansions between
/// checks.
pub struct Verifier {
    p: ReeParams,
    prec: u64,
    engine: OnceLock<Arc<HasseEngine>>,
    parts: Mutex<HashMap<Subject, Arc<TruncatedSeries<CurveElement>>>>,
    points: Mutex<HashMap<PointKey, Arc<Vec<PointData>>>>,
}

impl Verifier {
    pub fn new(p: &ReeParams) -> Self {
        Self {
            p: p.clone(),
            prec: catalog_precision(p),
            engine: OnceLock::new(),
            parts: Mutex::new(HashMap::new()),
            points: Mutex::new(HashMap::new()),
        }
    }

    /// Reuses an existing engine for the symbolic backend.
    pub fn with_engine(engine: Arc<HasseEngine>) -> Self {
        let v = Self::new(engine.params());
        let _ = v.engine.set(engine);
        v
    }

    pub fn params(&self) -> &ReeParams {
        &self.p
    }

    fn engine(&self) -> Result<&HasseEngine> {
        if self.p.s > SYMBOLIC_MAX_S && self.engine.get().is_none() {
            return Err(Error::BackendUnavailable(format!(
                "symbolic backend is limited to s <= {SYMBOLIC_MAX_S}"
            )));
        }
        Ok(self
            .engine
            .get_or_init(|| Arc::new(HasseEngine::new(&self.p))))
    }

    fn symbolic_part(&self, subject: Subject) -> Result<Arc<TruncatedSeries<CurveElement>>> {
        if let Some(hit) = self.parts.lock().unwrap().get(&subject) {
            return Ok(hit.clone());
        }
        let eng = self.engine()?;
        let (f, b) = subject
            .relation_pair()
            .ok_or_else(|| Error::UnknownLabel(subject.name()))?;
        let basis = eng.basis_series();
        let ser = part_series(eng.ring(), &self.p, self.prec, basis.get(f), basis.get(b));
        let ser = Arc::new(ser);
        self.parts.lock().unwrap().insert(subject, ser.clone());
        Ok(ser)
    }

    fn point_data(&self, k: u32, seed: u64, trials: u32, prec: u64) -> Result<Arc<Vec<PointData>>> {
        let key = (k, seed, trials, prec);
        if let Some(hit) = self.points.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let mut out = Vec::new();
        for point in sample_points(&self.p, k, seed, trials)? {
            let basis = expand_basis(&self.p, &point, prec)?;
            let mut parts = HashMap::new();
            for subject in Subject::in_scope(Scope::TypeTwoPart) {
                let (f, b) = subject
                    .relation_pair()
                    .expect("type-2 parts have relations");
                let ser = part_series(point.ctx(), &self.p, prec, basis.get(f), basis.get(b));
                parts.insert(subject, ser);
            }
            out.push(PointData {
                point,
                basis,
                parts,
            });
        }
        let out = Arc::new(out);
        self.points.lock().unwrap().insert(key, out.clone());
        Ok(out)
    }

    fn check_scope(spec: &IdentitySpec, subject: Subject) -> Result<()> {
        if spec.subjects().contains(&subject) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "{} is not asserted for {}",
                spec.name,
                subject.name()
            )))
        }
    }

    /// Checks one identity on one function.
    pub fn check_identity(
        &self,
        spec: &IdentitySpec,
        subject: Subject,
        backend: Backend,
    ) -> Result<Verdict> {
        let prec = spec.residual.max_index(&self.p) + 1;
        self.check_at(spec, subject, backend, prec)
    }

    fn check_at(
        &self,
        spec: &IdentitySpec,
        subject: Subject,
        backend: Backend,
        prec: u64,
    ) -> Result<Verdict> {
        Self::check_scope(spec, subject)?;
        let mut verdict = Verdict {
            identity: spec.name.clone(),
            subject: subject.name(),
            backend: backend.name().to_string(),
            passed: true,
            points_tested: 0,
            witness: None,
            support_exceptions: Vec::new(),
        };
        match backend {
            Backend::Symbolic => {
                let eng = self.engine()?;
                let ring = eng.ring();
                let basis = eng.basis_series();
                let part;
                let (subj, f, b) = match subject {
                    Subject::Basis(l) => {
                        let pair = subject.relation_pair();
                        (
                            basis.get(l),
                            pair.map(|(f, _)| basis.get(f)),
                            pair.map(|(_, b)| basis.get(b)),
                        )
                    }
                    Subject::Part { .. } => {
                        part = self.symbolic_part(subject)?;
                        let (f, b) = subject.relation_pair().expect("checked above");
                        (&*part, Some(basis.get(f)), Some(basis.get(b)))
                    }
                };
                let env = Env {
                    alg: ring,
                    p: &self.p,
                    ell: ring.ell(),
                    subject: subj,
                    f,
                    b,
                };
                let res = spec.residual.eval(&env)?;
                if !res.is_zero() {
                    verdict.passed = false;
                    verdict.witness = Some(Witness {
                        point: None,
                        residual: clip(res.to_text()),
                    });
                }
                if let Subject::Basis(l) = subject {
                    verdict.support_exceptions = self.support_exceptions(spec, l, subj)?;
                }
            }
            Backend::Series { k, trials, seed } => {
                let data = self.point_data(k, seed, trials, prec)?;
                for pd in data.iter() {
                    let ctx = pd.point.ctx();
                    let (x0, _, _) = pd.point.coords();
                    let ell = ctx.sub(ctx.frobenius_power(x0, self.p.q_log3() as u64), x0);
                    let (subj, pair) = match subject {
                        Subject::Basis(l) => (pd.basis.get(l), subject.relation_pair()),
                        Subject::Part { .. } => (&pd.parts[&subject], subject.relation_pair()),
                    };
                    let env = Env {
                        alg: ctx,
                        p: &self.p,
                        ell,
                        subject: subj,
                        f: pair.map(|(f, _)| pd.basis.get(f)),
                        b: pair.map(|(_, b)| pd.basis.get(b)),
                    };
                    let res = spec.residual.eval(&env)?;
                    verdict.points_tested += 1;
                    if !res.is_zero() {
                        verdict.passed = false;
                        verdict.witness = Some(Witness {
                            point: Some(pd.point.describe()),
                            residual: res.to_string(),
                        });
                        break;
                    }
                }
            }
        }
        Ok(verdict)
    }

    fn support_exceptions(
        &self,
        spec: &IdentitySpec,
        label: Label,
        ser: &TruncatedSeries<CurveElement>,
    ) -> Result<Vec<u64>> {
        let support: BTreeSet<u64> = if label == Label::One {
            BTreeSet::from([0])
        } else {
            support_for(label)?.values(&self.p)
        };
        let mut out = BTreeSet::new();
        for (i, o, _) in spec.residual.leaves() {
            let v = i.value(&self.p);
            if o == Operand::Subject && !support.contains(&v) && ser.get(v).is_some() {
                out.insert(v);
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Runs every catalog identity whose name matches `filter` (all when
    /// `None`) on every function it is asserted for.
    pub fn check_catalog(&self, filter: Option<&str>, backend: Backend) -> Result<Vec<Verdict>> {
        let specs: Vec<&IdentitySpec> = match filter {
            Some(name) => vec![find_identity(name)?],
            None => identity_catalog().iter().collect(),
        };
        let prec = specs
            .iter()
            .map(|s| s.residual.max_index(&self.p) + 1)
            .max()
            .unwrap_or(1);
        let mut out = Vec::new();
        for spec in specs {
            for subject in spec.subjects() {
                out.push(self.check_at(spec, subject, backend, prec)?);
            }
        }
        Ok(out)
    }

    /// The 2 x 14 matrix with rows `(f^q - f)` and `(D^1 f)` has rank 1:
    /// the second row is nonzero and the first is `l` times the second.
    pub fn check_rank1_remark(&self, backend: Backend) -> Result<Verdict> {
        let spec = find_identity("frobenius-difference")?;
        let verdicts = self.check_catalog(Some(&spec.name), backend)?;
        let failed = verdicts.iter().find(|v| !v.passed).cloned();
        // D^1 x = 1, so the derivative row never vanishes.
        let points_tested = verdicts.iter().map(|v| v.points_tested).min().unwrap_or(0);
        Ok(Verdict {
            identity: "rank-one".into(),
            subject: "basis".into(),
            backend: backend.name().into(),
            passed: failed.is_none(),
            points_tested,
            witness: failed.and_then(|v| v.witness),
            support_exceptions: Vec::new(),
        })
    }

    /// The hypersurface relation among 1, x, w1, w2, w3, w6, w8 and the four
    /// grouped relations its verification is assembled from.
    pub fn check_hypersurface(&self, backend: Backend) -> Result<HypersurfaceReport> {
        let names = hypersurface_names();
        let mut report = HypersurfaceReport {
            backend: backend.name().into(),
            points_tested: 0,
            checks: names
                .iter()
                .map(|n| HypersurfaceCheck {
                    name: n.to_string(),
                    passed: true,
                    witness: None,
                })
                .collect(),
        };
        let mut record = |k: usize, res_zero: bool, text: String, point: Option<String>| {
            if !res_zero && report.checks[k].passed {
                report.checks[k].passed = false;
                report.checks[k].witness = Some(Witness {
                    point,
                    residual: clip(text),
                });
            }
        };
        match backend {
            Backend::Symbolic => {
                let eng = self.engine()?;
                let ring = eng.ring();
                let vals = crate::ring::basis_values(ring);
                let res = hypersurface_residuals(ring, &self.p, &vals, &ring.ell());
                for (k, r) in res.iter().enumerate() {
                    record(k, r.is_zero(), r.to_text(), None);
                }
            }
            Backend::Series { k, trials, seed } => {
                for pt in sample_points(&self.p, k, seed, trials)? {
                    let ctx = pt.ctx();
                    let (x0, y0, z0) = pt.coords();
                    let vals = build_basis(ctx, &self.p, &x0, &y0, &z0);
                    let ell = ctx.sub(ctx.frobenius_power(x0, self.p.q_log3() as u64), x0);
                    let res = hypersurface_residuals(ctx, &self.p, &vals, &ell);
                    for (j, r) in res.iter().enumerate() {
                        record(j, r.is_zero(), r.to_string(), Some(pt.describe()));
                    }
                    report.points_tested += 1;
                }
            }
        }
        Ok(report)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HypersurfaceCheck {
    pub name: String,
    pub passed: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HypersurfaceReport {
    pub backend: String,
    pub points_tested: u32,
    /// The full relation first, then the four grouped relations.
    pub checks: Vec<HypersurfaceCheck>,
}

impl HypersurfaceReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn hypersurface_names() -> [&'static str; 5] {
    [
        "sum f_i^(q^2) f_(6-i)",
        "w8^(q^2) + w8",
        "x w6^(q^2) + x^(q^2) w6",
        "w1 w3^(q^2) + w1^(q^2) w3",
        "w2^(q^2+1)",
    ]
}

/// Residuals of the hypersurface relation and of its four groups, with
/// `(f_0, ..., f_6) = (1, x, w1, w2, w3, w6, w8)`.
pub fn hypersurface_residuals<A: Algebra>(
    alg: &A,
    p: &ReeParams,
    vals: &BasisValues<A::Elem>,
    ell: &A::Elem,
) -> [A::Elem; 5] {
    let e = p.q_log3();
    let fam = vals.family(&E7);
    let q2 = |a: &A::Elem| alg.frobenius(a, 2 * e);
    let fq = |a: &A::Elem| alg.frobenius(a, e);
    let f3 = |a: &A::Elem| alg.frobenius(a, p.s + 1);
    let m = |a: &A::Elem, b: &A::Elem| alg.mul(a, b);
    let ellq = fq(ell);
    let mut total = alg.zero();
    for i in 0..7 {
        total = alg.add(&total, &m(&q2(&fam[i]), &fam[6 - i]));
    }
    let g = |l: Label| vals.get(l).clone();
    let (x, y, z) = (g(Label::X), g(Label::Y), g(Label::Z));
    let (w1, w2, w3, w4) = (
        g(Label::W(1)),
        g(Label::W(2)),
        g(Label::W(3)),
        g(Label::W(4)),
    );
    let (w6, w7, w8) = (g(Label::W(6)), g(Label::W(7)), g(Label::W(8)));
    // Each group as lhs - (c_q l^q + c_1 l + c_0).
    let group = |lhs: A::Elem, cq: A::Elem, c1: A::Elem, c0: A::Elem| {
        let rhs = alg.add(&alg.add(&m(&cq, &ellq), &m(&c1, ell)), &c0);
        alg.sub(&lhs, &rhs)
    };
    let g8 = group(alg.add(&q2(&w8), &w8), fq(&f3(&w7)), f3(&w7), alg.neg(&w8));
    let g6 = group(
        alg.add(&m(&x, &q2(&w6)), &m(&q2(&x), &w6)),
        alg.add(&m(&fq(&f3(&w4)), &x), &w6),
        alg.add(&m(&f3(&w4), &x), &w6),
        alg.neg(&m(&x, &w6)),
    );
    let g13 = group(
        alg.add(&m(&w1, &q2(&w3)), &m(&q2(&w1), &w3)),
        alg.add(&m(&fq(&f3(&z)), &w1), &m(&fq(&f3(&x)), &w3)),
        alg.add(&m(&f3(&z), &w1), &m(&f3(&x), &w3)),
        alg.neg(&m(&w1, &w3)),
    );
    let g2 = group(
        m(&q2(&w2), &w2),
        m(&fq(&f3(&y)), &w2),
        m(&f3(&y), &w2),
        m(&w2, &w2),
    );
    [total, g8, g6, g13, g2]
}

/// Vanishing data of the osculating functions at a point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OsculatingReport {
    pub point: String,
    pub precision: u64,
    /// Order of `g_P` at P; `None` when every coefficient below the
    /// precision vanishes.
    pub order: Option<u64>,
    /// `h_P` only has terms at multiples of q^2.
    pub h_is_q2_power: bool,
}

impl OsculatingReport {
    /// Lower bound on the vanishing order of `g_P`.
    pub fn order_at_least(&self) -> u64 {
        self.order.unwrap_or(self.precision)
    }
}

/// Expands `g_P = sum f_i(P)^(q^2) f_(6-i)` and
/// `h_P = sum f_(6-i)(P) f_i^(q^2)` at `pt` to `prec` terms.
pub fn osculating_vanishing(p: &ReeParams, pt: &CurvePoint, prec: u64) -> Result<OsculatingReport> {
    let ctx = pt.ctx();
    let basis = expand_basis(p, pt, prec)?;
    let fam = basis.family(&E7);
    let at_p: Vec<FieldElement> = fam.iter().map(|s| s.coeff(ctx, 0)).collect::<Result<_>>()?;
    let sa = SeriesAlgebra::new(ctx, prec);
    let e2 = 2 * p.q_log3();
    let mut g = sa.zero();
    let mut h = sa.zero();
    for i in 0..7 {
        let c = ctx.frobenius_power(at_p[i], e2 as u64);
        g = sa.add(&g, &sa.scale_by(&fam[6 - i], &c));
        h = sa.add(&h, &sa.scale_by(&sa.frobenius(&fam[i], e2), &at_p[6 - i]));
    }
    let q2 = p.q2();
    Ok(OsculatingReport {
        point: pt.describe(),
        precision: prec,
        order: g.valuation(),
        h_is_q2_power: h.terms().iter().all(|(i, _)| i % q2 == 0) && h.get(0).is_none(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_shape() {
        let cat = identity_catalog();
        assert_eq!(cat.len(), 43);
        let count = |s: Scope| cat.iter().filter(|c| c.scope == s).count();
        assert_eq!(count(Scope::AllBasis), 15);
        assert_eq!(count(Scope::TypeOne), 9);
        assert_eq!(count(Scope::TypeTwoPart), 19);
        let names: BTreeSet<&str> = cat.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names.len(), cat.len());
        for s in [1, 2, 3] {
            let p = ReeParams::new(s).unwrap();
            for c in cat {
                assert!(c.residual.max_index(&p) <= p.q2());
            }
        }
    }

    #[test]
    fn simple_residuals_at_s1() {
        let p = ReeParams::new(1).unwrap();
        let v = Verifier::new(&p);
        let spec = find_identity("frobenius-difference").unwrap();
        let r = v
            .check_identity(spec, Subject::Basis(Label::X), Backend::Symbolic)
            .unwrap();
        assert!(r.passed);
        let bad = v.check_identity(
            spec,
            Subject::Part {
                owner: Label::W(4),
                index: 0,
            },
            Backend::Symbolic,
        );
        assert!(bad.is_err());
    }
}
