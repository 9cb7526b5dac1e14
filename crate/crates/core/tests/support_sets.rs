use std::collections::BTreeSet;

use ree_core::hasse::HasseEngine;
use ree_core::ring::{Label, D14};
use ree_core::support::{
    emit_appendix_tables, exact_support, leq3, minimal_elements, support_constructed, support_for,
    support_for_constructed, support_union, AppendixTable,
};
use ree_core::{ReeParams, SymbolicIndex};

fn golden(name: &str) -> String {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

fn idx(text: &str) -> SymbolicIndex {
    SymbolicIndex::parse(text).unwrap()
}

fn values(p: &ReeParams, labels: &[&str]) -> BTreeSet<u64> {
    labels.iter().map(|l| idx(l).value(p)).collect()
}

#[test]
fn tables_match_golden_files() {
    let p = ReeParams::new(2).unwrap();
    let (t1, t2) = emit_appendix_tables(&p).unwrap();
    assert_eq!(t1.rows.len(), 36);
    assert_eq!(t2.rows.len(), 56);
    assert_eq!(t1.to_csv(), golden("appendix_type1.csv"));
    assert_eq!(t2.to_csv(), golden("appendix_type2.csv"));
    assert!(t1.collisions.is_empty() && t2.collisions.is_empty());
}

#[test]
fn tables_at_s1_report_collisions() {
    let p = ReeParams::new(1).unwrap();
    let (_, t2) = emit_appendix_tables(&p).unwrap();
    let pair = (idx("3q"), idx("qq0"));
    assert!(t2.collisions.contains(&pair) || t2.collisions.contains(&(pair.1, pair.0)));
}

fn marked(t: &AppendixTable, row: &str, col: Label) -> bool {
    let c = t.columns.iter().position(|&l| l == col).unwrap();
    t.rows
        .iter()
        .find(|(r, _)| *r == idx(row))
        .map(|(_, m)| m[c])
        .unwrap_or(false)
}

#[test]
fn spot_entries() {
    let p = ReeParams::new(2).unwrap();
    let (t1, t2) = emit_appendix_tables(&p).unwrap();
    assert!(marked(&t1, "3q0", Label::W(1)));
    assert!(!marked(&t1, "q^2", Label::X));
    for c in 1..=5 {
        assert!(t1.rows.last().unwrap().1[c]);
    }
    let last = &t2.rows.last().unwrap();
    assert_eq!(last.0, idx("2qq0+3q0+1"));
    assert_eq!(last.1, vec![false, false, false, false, false, false, true]);
}

#[test]
fn inclusion_chains() {
    for s in [2, 3] {
        let p = ReeParams::new(s).unwrap();
        let get = |l| support_constructed(l, &p).unwrap();
        let chain1 = [Label::X, Label::W(1), Label::W(2), Label::W(3), Label::W(6)];
        for w in chain1.windows(2) {
            let (a, b) = (get(w[0]), get(w[1]));
            assert!(a.is_subset(&b) && a != b, "{} {}", w[0], w[1]);
        }
        assert_eq!(get(Label::W(6)), get(Label::W(8)));
        let chain2 = [
            Label::Y,
            Label::Z,
            Label::W(4),
            Label::W(7),
            Label::W(5),
            Label::W(9),
            Label::W(10),
        ];
        for w in chain2.windows(2) {
            let (a, b) = (get(w[0]), get(w[1]));
            assert!(a.is_subset(&b) && a != b, "{} {}", w[0], w[1]);
        }
    }
}

#[test]
fn symbolic_sets_evaluate_consistently() {
    for s in [2, 3, 4] {
        let p = ReeParams::new(s).unwrap();
        for l in D14.iter().skip(1) {
            assert_eq!(
                support_for_constructed(*l).unwrap().values(&p),
                support_constructed(*l, &p).unwrap()
            );
        }
    }
}

#[test]
fn refinement_only_touches_w9_and_w10() {
    for l in D14.iter().skip(1) {
        let refined = support_for(*l).unwrap().indices;
        let built = support_for_constructed(*l).unwrap().indices;
        assert!(refined.is_subset(&built));
        let dropped: Vec<String> = built.difference(&refined).map(|i| i.to_string()).collect();
        if matches!(l, Label::W(9) | Label::W(10)) {
            for i in [
                "2q+q0+1",
                "2q+2q0+1",
                "3q+q0",
                "3q+2q0",
                "qq0+2q+q0+1",
                "qq0+3q+2q0",
            ] {
                assert!(dropped.contains(&i.to_string()), "{l} keeps {i}");
            }
        } else {
            assert!(dropped.is_empty(), "{l}: {dropped:?}");
        }
    }
}

#[test]
fn refined_sets_are_exact_at_s3() {
    let p = ReeParams::new(3).unwrap();
    let eng = HasseEngine::new(&p);
    for l in D14.iter().skip(1) {
        assert_eq!(
            support_for(*l).unwrap().values(&p),
            exact_support(&eng, *l),
            "{l}"
        );
    }
}

const D_ORDERS: [&str; 14] = [
    "0", "1", "q0", "2q0", "3q0", "q", "q+q0", "2q", "qq0", "qq0+q0", "qq0+q", "2qq0", "3qq0",
    "q^2",
];

#[test]
fn minimal_non_orders_for_d() {
    for s in [2, 3] {
        let p = ReeParams::new(s).unwrap();
        let orders = values(&p, &D_ORDERS);
        let bound = idx("2qq0+3q0+1").value(&p);
        let rest: BTreeSet<u64> = support_union(&p)
            .unwrap()
            .into_iter()
            .filter(|i| !orders.contains(i) && *i <= bound)
            .collect();
        let want = values(
            &p,
            &[
                "q0+1", "3q0+1", "q+1", "q+2q0", "q+3q0", "2q+q0", "3q", "qq0+1", "qq0+2q0",
                "qq0+3q0", "qq0+q+q0", "qq0+2q", "2qq0+q0",
            ],
        );
        assert_eq!(minimal_elements(&rest), want);
    }
}

#[test]
fn minimal_non_orders_for_e() {
    let p = ReeParams::new(2).unwrap();
    let orders = values(&p, &["0", "1", "3q0", "q", "2q", "3qq0", "q^2"]);
    let rest: BTreeSet<u64> = support_constructed(Label::W(8), &p)
        .unwrap()
        .into_iter()
        .filter(|i| !orders.contains(i))
        .collect();
    let want = values(
        &p,
        &[
            "3q0+1", "q+1", "q+3q0", "3q", "3qq0+1", "3qq0+3q0", "3qq0+q", "6qq0",
        ],
    );
    assert_eq!(minimal_elements(&rest), want);
}

#[test]
fn d_orders_are_downward_closed() {
    for s in [1, 2, 3] {
        let p = ReeParams::new(s).unwrap();
        let orders = values(&p, &D_ORDERS);
        for &e in &orders {
            for mu in 0..=e {
                if leq3(mu, e) {
                    assert!(orders.contains(&mu), "s={s}: {mu} <=3 {e}");
                }
            }
        }
    }
}

#[test]
fn supports_are_sound_at_s1() {
    let p = ReeParams::new(1).unwrap();
    let eng = HasseEngine::new(&p);
    for l in D14 {
        let symbolic = if l == Label::One {
            BTreeSet::from([0])
        } else {
            support_for(l).unwrap().values(&p)
        };
        let numeric = support_constructed(l, &p).unwrap();
        let ser = eng.basis_series().get(l);
        for (i, _) in ser.terms() {
            assert!(
                symbolic.contains(i),
                "{l}: D^{i} != 0 outside symbolic support"
            );
            assert!(
                numeric.contains(i),
                "{l}: D^{i} != 0 outside numeric support"
            );
        }
    }
}
