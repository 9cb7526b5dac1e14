//! The acceptance run: one PASS/FAIL line per criterion.
//!
//! Two criteria are red for reasons that are understood: the identity suite
//! at s = 1 (index collisions 3q = qq0) and the literal last diagonal entry
//! of the 12 x 12 matrix (it is l^(2q), not x^(2q)). The test fails if any
//! other criterion fails, or if a red one fails for a different reason.

mod common;

use std::collections::BTreeSet;
use std::io::Write;
use std::time::Instant;

use ree_core::hasse::{deriv_table_b, table_rows, HasseEngine};
use ree_core::identities::{osculating_vanishing, Backend, Verifier};
use ree_core::orders::{
    default_candidates, five_by_five, order_sequence, triangular_check, twelve_by_twelve, Family,
};
use ree_core::ring::{basis_values, Label, D14};
use ree_core::series::{expand_basis, sample_points, CurvePoint};
use ree_core::support::{emit_appendix_tables, support_for};
use ree_core::weierstrass::{default_precision, divisor_degree_audit, profile};
use ree_core::ReeParams;

struct Outcome {
    passed: bool,
    detail: String,
    /// For a failing criterion: whether the failure is exactly the analysed one.
    explained: bool,
}

fn pass(detail: String) -> Outcome {
    Outcome {
        passed: true,
        detail,
        explained: true,
    }
}

fn fail(detail: String, explained: bool) -> Outcome {
    Outcome {
        passed: false,
        detail,
        explained,
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        pass(detail)
    } else {
        fail(detail, false)
    }
}

fn series(trials: u32, seed: u64) -> Backend {
    Backend::Series { k: 6, trials, seed }
}

fn stated(fam: Family, p: &ReeParams) -> Vec<u64> {
    fam.stated_orders().iter().map(|i| i.value(p)).collect()
}

fn c1_d_orders() -> Outcome {
    let p = ReeParams::new(1).unwrap();
    let c = default_candidates(&p).unwrap();
    let r = order_sequence(&p, Family::D.labels(), &c, Backend::Symbolic, None).unwrap();
    let want = vec![0, 1, 3, 6, 9, 27, 30, 54, 81, 84, 108, 162, 243, 729];
    check(r.orders == want, format!("{:?}", r.orders))
}

fn c2_e_orders() -> Outcome {
    let p = ReeParams::new(1).unwrap();
    let c = default_candidates(&p).unwrap();
    let r = order_sequence(&p, Family::E.labels(), &c, Backend::Symbolic, None).unwrap();
    check(
        r.orders == vec![0, 1, 9, 27, 54, 243, 729],
        format!("{:?}", r.orders),
    )
}

fn c3_identities() -> Outcome {
    let p1 = ReeParams::new(1).unwrap();
    let exact = Verifier::new(&p1)
        .check_catalog(None, Backend::Symbolic)
        .unwrap();
    let failed: BTreeSet<(String, String)> = exact
        .iter()
        .filter(|r| !r.passed)
        .map(|r| (r.identity.clone(), r.subject.clone()))
        .collect();
    let p2 = ReeParams::new(2).unwrap();
    let random = Verifier::new(&p2)
        .check_catalog(None, series(3, 11))
        .unwrap();
    let random_ok = random.iter().all(|r| r.passed && r.points_tested >= 3);
    let names: BTreeSet<&str> = failed.iter().map(|(n, _)| n.as_str()).collect();
    let detail = format!(
        "s=1 exact: {} of {} verdicts pass, failing {:?} (3q = qq0 = 81 at s=1); s=2 at 3 random points: {} of {} pass",
        exact.len() - failed.len(),
        exact.len(),
        names,
        random.iter().filter(|r| r.passed).count(),
        random.len()
    );
    if failed.is_empty() && random_ok {
        pass(detail)
    } else {
        fail(
            detail,
            random_ok && failed == common::expected_s1_failures(),
        )
    }
}

fn c4_hypersurface_and_osculating() -> Outcome {
    let p1 = ReeParams::new(1).unwrap();
    let exact = Verifier::new(&p1)
        .check_hypersurface(Backend::Symbolic)
        .unwrap();
    let p2 = ReeParams::new(2).unwrap();
    let random = Verifier::new(&p2)
        .check_hypersurface(series(3, 21))
        .unwrap();
    let mut orders = Vec::new();
    for pt in sample_points(&p1, 6, 9, 3).unwrap() {
        let r = osculating_vanishing(&p1, &pt, p1.q2() + 1).unwrap();
        orders.push(r.order_at_least());
    }
    let ok = exact.passed()
        && random.passed()
        && random.points_tested == 3
        && orders.iter().all(|&o| o >= p1.q2());
    check(
        ok,
        format!(
            "hypersurface exact at s=1: {}, s=2 at 3 points: {}; osculating orders at 3 points: {:?} (precision 730)",
            exact.passed(),
            random.passed(),
            orders
        ),
    )
}

fn c5_support_soundness(eng: &HasseEngine) -> Outcome {
    let p = eng.params();
    let mut computed = 0usize;
    let mut bad = Vec::new();
    for l in D14 {
        let support = if l == Label::One {
            BTreeSet::from([0])
        } else {
            support_for(l).unwrap().values(p)
        };
        for i in 0..=p.q2() {
            if support.contains(&i) {
                continue;
            }
            computed += 1;
            if !eng.basis_derivative(l, i).unwrap().is_zero() {
                bad.push(format!("{l}:{i}"));
            }
        }
    }
    check(
        bad.is_empty(),
        format!("{computed} derivatives outside the supports, nonzero: {bad:?}"),
    )
}

fn c6_appendix() -> Outcome {
    let p = ReeParams::new(2).unwrap();
    let (t1, t2) = emit_appendix_tables(&p).unwrap();
    let golden = |name: &str| {
        std::fs::read_to_string(format!(
            "{}/tests/golden/{name}",
            env!("CARGO_MANIFEST_DIR")
        ))
        .unwrap()
    };
    let ok1 = t1.to_csv() == golden("appendix_type1.csv");
    let ok2 = t2.to_csv() == golden("appendix_type2.csv");
    check(
        ok1 && ok2,
        format!(
            "type 1 ({} rows) identical: {ok1}; type 2 ({} rows) identical: {ok2}",
            t1.rows.len(),
            t2.rows.len()
        ),
    )
}

fn c7_table(eng: &HasseEngine) -> Outcome {
    let labels = [Label::X, Label::Y, Label::Z, Label::W(4)];
    let ring = eng.ring();
    let vals = basis_values(ring);
    let mut exact = 0;
    let mut bad = Vec::new();
    for b in labels {
        for i in table_rows(eng.params()) {
            let want = deriv_table_b(ring, b, i).unwrap();
            exact += 1;
            if eng.hasse_derivative(vals.get(b), i).unwrap() != want
                || eng.basis_derivative(b, i).unwrap() != want
            {
                bad.push(format!("s=1 {b} {i}"));
            }
        }
    }
    let p2 = ReeParams::new(2).unwrap();
    let ring2 = ree_core::ring::ReeRing::new(&p2);
    let rows = table_rows(&p2);
    let prec = rows.iter().max().unwrap() + 1;
    let mut evaluated = 0;
    for pt in sample_points(&p2, 6, 33, 3).unwrap() {
        let basis = expand_basis(&p2, &pt, prec).unwrap();
        for b in labels {
            for &i in &rows {
                evaluated += 1;
                let want = deriv_table_b(&ring2, b, i).unwrap().eval(&pt);
                if basis.get(b).coeff(pt.ctx(), i).unwrap() != want {
                    bad.push(format!("s=2 {b} {i} at {}", pt.describe()));
                }
            }
        }
    }
    check(
        bad.is_empty(),
        format!("{exact} exact entries at s=1, {evaluated} point evaluations at s=2, mismatches: {bad:?}"),
    )
}

fn c8_triangular(eng: &HasseEngine) -> Outcome {
    let ring = eng.ring();
    let (rows, cols) = twelve_by_twelve();
    let m = triangular_check(eng, &rows, &cols).unwrap();
    let (rows5, cols5) = five_by_five();
    let m5 = triangular_check(eng, &rows5, &cols5).unwrap();
    let ones = m.diagonal[..11].iter().all(|d| d.is_one());
    let x2q = ring.monomial(2 * eng.params().q, 0, 0, 1);
    let lq = ring.qpow(&ring.ell());
    let l2q = ring.mul(&lq, &lq);
    let last = &m.diagonal[11];
    let five_ok = m5.is_upper_triangular() && m5.diagonal.iter().all(|d| d.is_one());
    let detail = format!(
        "12x12 upper triangular: {}, first 11 diagonal entries 1: {ones}, last entry x^(2q): {}, last entry l^(2q): {}; 5x5 upper triangular with unit diagonal: {five_ok}",
        m.is_upper_triangular(),
        *last == x2q,
        *last == l2q
    );
    if m.is_upper_triangular() && ones && *last == x2q && five_ok {
        pass(detail)
    } else {
        fail(
            detail,
            m.is_upper_triangular() && ones && *last == l2q && five_ok,
        )
    }
}

fn c9_weierstrass() -> Outcome {
    let p = ReeParams::new(1).unwrap();
    let o = CurvePoint::origin(&p, 1).unwrap();
    let d = profile(
        &p,
        Family::D.labels(),
        &o,
        &stated(Family::D, &p),
        default_precision(&p),
    )
    .unwrap();
    let e = profile(
        &p,
        Family::E.labels(),
        &o,
        &stated(Family::E, &p),
        default_precision(&p),
    )
    .unwrap();
    let da = divisor_degree_audit(&p, Family::D, &d.eps).unwrap();
    let ea = divisor_degree_audit(&p, Family::E, &e.eps).unwrap();
    let mut ok = d.j == vec![0, 1, 4, 7, 10, 34, 37, 64, 115, 118, 145, 226, 307, 1036]
        && d.weight == 567
        && e.weight == 392
        && da.equation() == "7252*1537 + 14*1036 = 11160828 = 567*19684"
        && ea.equation() == "7252*1063 + 7*1036 = 7716128 = 392*19684";
    for s in [2, 3] {
        let p = ReeParams::new(s).unwrap();
        for fam in [Family::D, Family::E] {
            ok &= divisor_degree_audit(&p, fam, &stated(fam, &p)).is_ok();
        }
    }
    check(
        ok,
        format!(
            "j at P0 {:?}, weight {} (E: {}); {}; {}; audits at s=2, 3 pass: {ok}",
            d.j,
            d.weight,
            e.weight,
            da.equation(),
            ea.equation()
        ),
    )
}

fn c10_properties() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, run) in common::all_suites() {
        match run(common::CASES) {
            Ok(()) => parts.push(format!("{name} ok")),
            Err(e) => {
                ok = false;
                parts.push(format!("{name} FAILED: {e}"));
            }
        }
    }
    check(
        ok,
        format!("{} cases each: {}", common::CASES, parts.join(", ")),
    )
}

fn c11_determinism() -> Outcome {
    let report = || {
        let p = ReeParams::new(1).unwrap();
        let c = default_candidates(&p).unwrap();
        let orders = order_sequence(&p, Family::D.labels(), &c, series(3, 42), None).unwrap();
        let verdicts = Verifier::new(&p)
            .check_catalog(Some("de:qq0+q+q0"), series(2, 42))
            .unwrap();
        let pt = &sample_points(&p, 6, 42, 1).unwrap()[0];
        let prof = profile(&p, Family::D.labels(), pt, &orders.orders, p.q2() + 1).unwrap();
        serde_json::to_string(&(orders, verdicts, prof)).unwrap()
    };
    let (a, b) = (report(), report());
    check(a == b, format!("{} bytes, identical: {}", a.len(), a == b))
}

#[test]
fn acceptance() {
    let eng = HasseEngine::new(&ReeParams::new(1).unwrap());
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("order sequence of D at s=1", Box::new(c1_d_orders)),
        ("order sequence of E at s=1", Box::new(c2_e_orders)),
        ("identity suite", Box::new(c3_identities)),
        (
            "hypersurface and osculating functions",
            Box::new(c4_hypersurface_and_osculating),
        ),
        (
            "support soundness at s=1",
            Box::new(|| c5_support_soundness(&eng)),
        ),
        ("appendix tables", Box::new(c6_appendix)),
        ("derivative table", Box::new(|| c7_table(&eng))),
        ("triangular matrices", Box::new(|| c8_triangular(&eng))),
        ("Weierstrass bookkeeping", Box::new(c9_weierstrass)),
        ("property suites", Box::new(c10_properties)),
        ("determinism", Box::new(c11_determinism)),
    ];
    let mut out = std::io::stdout().lock();
    let mut unexplained = Vec::new();
    let mut red = Vec::new();
    for (n, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let status = if o.passed { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "criterion {:>2} {status}: {title} ({secs:.1}s): {}",
            n + 1,
            o.detail
        )
        .unwrap();
        if !o.passed {
            red.push(n + 1);
            if !o.explained {
                unexplained.push(n + 1);
            }
        }
    }
    writeln!(out, "red criteria: {red:?}").unwrap();
    out.flush().unwrap();
    assert!(
        unexplained.is_empty(),
        "unexpected failures: {unexplained:?}"
    );
    assert_eq!(red, vec![3, 8], "red criteria changed");
}
