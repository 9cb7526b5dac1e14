use std::collections::BTreeSet;

use ree_core::hasse::HasseEngine;
use ree_core::identities::{find_identity, Backend, Verifier};
use ree_core::orders::{
    default_candidates, difference_morphism_orders, five_by_five, frobenius_orders, order_sequence,
    padic_closure_check, triangular_check, twelve_by_twelve, Family, RingEchelon,
};
use ree_core::ring::Label;
use ree_core::{ReeParams, SymbolicIndex};

fn series(seed: u64) -> Backend {
    Backend::Series {
        k: 6,
        trials: 3,
        seed,
    }
}

fn stated(fam: Family, p: &ReeParams) -> Vec<u64> {
    fam.stated_orders().iter().map(|i| i.value(p)).collect()
}

#[test]
fn orders_at_s1_are_exact() {
    let p = ReeParams::new(1).unwrap();
    let eng = HasseEngine::new(&p);
    let c = default_candidates(&p).unwrap();
    let d = order_sequence(&p, Family::D.labels(), &c, Backend::Symbolic, Some(&eng)).unwrap();
    assert_eq!(
        d.orders,
        vec![0, 1, 3, 6, 9, 27, 30, 54, 81, 84, 108, 162, 243, 729]
    );
    let e = order_sequence(&p, Family::E.labels(), &c, Backend::Symbolic, Some(&eng)).unwrap();
    assert_eq!(e.orders, vec![0, 1, 9, 27, 54, 243, 729]);
    assert_eq!(d.witnesses.len(), 14);
    assert!(d.witnesses[0].certificate.starts_with("pivot 1"));
}

#[test]
fn orders_at_s2_on_both_backends() {
    let p = ReeParams::new(2).unwrap();
    let eng = HasseEngine::new(&p);
    let c = default_candidates(&p).unwrap();
    for fam in [Family::D, Family::E] {
        for b in [Backend::Symbolic, series(7)] {
            let r = order_sequence(&p, fam.labels(), &c, b, Some(&eng)).unwrap();
            assert_eq!(r.orders, stated(fam, &p), "{} {}", fam.name(), b.name());
        }
    }
}

#[test]
fn series_scan_is_stable_across_seeds() {
    for s in [1, 2] {
        let p = ReeParams::new(s).unwrap();
        let c = default_candidates(&p).unwrap();
        for fam in [Family::D, Family::E] {
            let runs: BTreeSet<Vec<u64>> = [1, 2, 3]
                .into_iter()
                .map(|seed| {
                    order_sequence(&p, fam.labels(), &c, series(seed), None)
                        .unwrap()
                        .orders
                })
                .collect();
            assert_eq!(runs.len(), 1);
            assert_eq!(runs.into_iter().next().unwrap(), stated(fam, &p));
        }
    }
}

#[test]
fn e_orders_are_d_orders() {
    for s in [1, 2] {
        let p = ReeParams::new(s).unwrap();
        let c = default_candidates(&p).unwrap();
        let eng = HasseEngine::new(&p);
        let d = order_sequence(&p, Family::D.labels(), &c, Backend::Symbolic, Some(&eng)).unwrap();
        let e = order_sequence(&p, Family::E.labels(), &c, Backend::Symbolic, Some(&eng)).unwrap();
        assert!(e.orders.iter().all(|o| d.orders.contains(o)));
    }
}

#[test]
fn symbolic_scan_is_bounded() {
    let p = ReeParams::new(3).unwrap();
    let c: BTreeSet<u64> = (0..2).collect();
    assert!(order_sequence(&p, &[Label::One, Label::X], &c, Backend::Symbolic, None).is_err());
}

#[test]
fn too_few_candidates_is_a_rank_deficiency() {
    let p = ReeParams::new(1).unwrap();
    let c: BTreeSet<u64> = (0..3).collect();
    let err = order_sequence(&p, Family::E.labels(), &c, Backend::Symbolic, None).unwrap_err();
    assert!(err.to_string().contains("rank deficiency"));
}

#[test]
fn frobenius_orders_omit_one() {
    for s in [1, 2] {
        let p = ReeParams::new(s).unwrap();
        let eng = HasseEngine::new(&p);
        let c = default_candidates(&p).unwrap();
        for b in [Backend::Symbolic, series(5)] {
            let d = order_sequence(&p, Family::D.labels(), &c, b, Some(&eng)).unwrap();
            let f = frobenius_orders(&p, Family::D.labels(), &c, b, Some(&eng), Some(&d)).unwrap();
            assert_eq!(f.nu[0], 0);
            assert_eq!(f.omitted, Some(1));
            assert_eq!(f.omitted_index, Some(1));
            let below: Vec<u64> = f.nu.iter().copied().filter(|&v| v < p.q).collect();
            assert_eq!(below, vec![0, p.q0, 2 * p.q0, 3 * p.q0]);
            let mut all = f.nu.clone();
            all.push(1);
            all.sort();
            assert_eq!(all, d.orders);
        }
    }
}

#[test]
fn difference_morphism_shortcut() {
    for s in [1, 2] {
        let p = ReeParams::new(s).unwrap();
        let eng = HasseEngine::new(&p);
        for b in [Backend::Symbolic, series(9)] {
            let d = difference_morphism_orders(&p, Family::D.labels(), b, Some(&eng)).unwrap();
            assert_eq!(d, vec![0, p.q0, 2 * p.q0, 3 * p.q0]);
            let e = difference_morphism_orders(&p, Family::E.labels(), b, Some(&eng)).unwrap();
            assert_eq!(e, vec![0, 3 * p.q0]);
        }
    }
}

#[test]
fn triangular_matrices() {
    for s in [1, 2, 3] {
        let p = ReeParams::new(s).unwrap();
        let eng = HasseEngine::new(&p);
        let ring = eng.ring();
        let (rows, cols) = twelve_by_twelve();
        let m = triangular_check(&eng, &rows, &cols).unwrap();
        assert!(
            m.is_upper_triangular(),
            "s={s}: {:?}",
            m.below_diagonal_nonzero
        );
        assert!(m.diagonal[..11].iter().all(|d| d.is_one()));
        // The last entry is l^(2q) = (x^q - x)^(2q), not x^(2q).
        let lq = ring.qpow(&ring.ell());
        assert_eq!(m.diagonal[11], ring.mul(&lq, &lq));
        let (rows, cols) = five_by_five();
        let m = triangular_check(&eng, &rows, &cols).unwrap();
        assert!(m.is_upper_triangular());
        assert!(m.diagonal.iter().all(|d| d.is_one()));
    }
    let p = ReeParams::new(1).unwrap();
    let eng = HasseEngine::new(&p);
    let one = triangular_check(&eng, &[SymbolicIndex::ZERO], &[Label::One]).unwrap();
    assert!(one.diagonal[0].is_one());
    let bad = triangular_check(
        &eng,
        &[SymbolicIndex::ZERO, SymbolicIndex::ONE],
        &[Label::X, Label::One],
    )
    .unwrap();
    assert_eq!(bad.below_diagonal_nonzero, vec![(1, 0)]);
    assert!(triangular_check(&eng, &[SymbolicIndex::ZERO], &[]).is_err());
}

#[test]
fn stated_order_sets_are_padic_closed() {
    for s in [1, 2, 3] {
        let p = ReeParams::new(s).unwrap();
        for fam in [Family::D, Family::E] {
            let v = padic_closure_check(&stated(fam, &p));
            assert!(v.closed, "s={s} {}: {:?}", fam.name(), v.missing);
        }
    }
    assert!(padic_closure_check(&[0, 1, 3]).closed);
    assert_eq!(padic_closure_check(&[0, 4]).missing, vec![(1, 4), (3, 4)]);
}

// Minimal non-orders below 2qq0+3q0+1, with the relation that expresses the
// derivative row through lower rows.
const J: [(&str, Option<&str>); 13] = [
    ("q0+1", Some("kq0:1")),
    ("3q0+1", Some("kq0:3")),
    ("q+1", Some("de:q+1")),
    ("q+2q0", Some("de:q+2q0")),
    ("q+3q0", Some("de:q+3q0")),
    ("2q+q0", Some("de:2q+q0")),
    ("3q", Some("de:3q")),
    ("qq0+1", Some("de:qq0+1")),
    ("qq0+2q0", Some("de:qq0+2q0")),
    ("qq0+3q0", Some("de:qq0+3q0")),
    ("qq0+q+q0", Some("de:qq0+q+q0")),
    ("qq0+2q", Some("de:qq0+2q")),
    ("2qq0+q0", None),
];

#[test]
fn j_rejections_match_identities() {
    let p = ReeParams::new(2).unwrap();
    let eng = HasseEngine::new(&p);
    let v = Verifier::new(&p);
    let orders = stated(Family::D, &p);
    let labels = Family::D.labels();
    let row = |i: u64| -> Vec<_> {
        labels
            .iter()
            .map(|l| eng.basis_derivative(*l, i).unwrap())
            .collect()
    };
    for (text, identity) in J {
        let j = SymbolicIndex::parse(text).unwrap().value(&p);
        assert!(!orders.contains(&j));
        let mut ech = RingEchelon::new(eng.ring());
        for &o in orders.iter().filter(|&&o| o < j) {
            assert!(ech.insert(row(o)).is_some());
        }
        assert!(ech.insert(row(j)).is_none(), "{text} raises the rank");
        if let Some(name) = identity {
            let spec = find_identity(name).unwrap();
            let verdicts = v
                .check_catalog(Some(&spec.name), Backend::Symbolic)
                .unwrap();
            assert!(verdicts.iter().all(|r| r.passed), "{name}");
        }
    }
}

#[test]
fn family_parsing() {
    assert_eq!("D".parse::<Family>().unwrap(), Family::D);
    assert_eq!("e".parse::<Family>().unwrap(), Family::E);
    assert!("F".parse::<Family>().is_err());
}
