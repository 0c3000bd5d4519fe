mod common;

use std::sync::Arc;
use std::thread;

use bipolar::bigstep::bigstep_nf;
use bipolar::contraction::{contract_nf, embed, System};
use bipolar::generate::{gen_extension, gen_random, GenParams};
use bipolar::session::{Session, SessionError, SharedSession, Verdict};
use bipolar::switching::{acyclic_oracle, connectable_oracle, o_correct_oracle, switching_count};
use bipolar::{Ebm, Label, Module};
use common::*;

const CAP: u128 = 1 << 14;

fn base(seed: u64) -> Option<Module> {
    let m = gen_random(&GenParams {
        seed,
        cells: 1 + seed as usize % 4,
        closure_probability: 0.0,
        ..GenParams::default()
    });
    (switching_count(&m) <= CAP).then_some(m)
}

fn check_pair(s: &Session) {
    assert_eq!(
        s.f().canonical(),
        bigstep_nf(s.module()).canonical(),
        "f of {}",
        s.module()
    );
    assert_eq!(
        s.g().canonical(),
        contract_nf(&embed(s.module()), System::Weak).canonical(),
        "g of {}",
        s.module()
    );
}

#[test]
fn sessions_agree_with_the_oracle() {
    let (mut sessions, mut accepted, mut rejected) = (0, 0, 0);
    for seed in 0..1500 {
        let Some(m) = base(seed) else { continue };
        let expected = o_correct_oracle(&m);
        let Ok(mut s) = Session::new(m.clone()) else {
            assert!(!expected, "{m}");
            continue;
        };
        assert!(expected, "{m}");
        check_pair(&s);
        sessions += 1;
        for i in 0..6 {
            let e = gen_extension(s.module(), seed * 31 + i, &GenParams::default());
            let direct = s.module().compose(&e).unwrap();
            if switching_count(&direct) > CAP {
                break;
            }
            let p = s.propose(&e).unwrap();
            assert_eq!(
                p.verdict.is_accept(),
                o_correct_oracle(&direct),
                "{e} on {}",
                s.module()
            );
            match &p.verdict {
                Verdict::RejectCyclic(report) => {
                    assert!(!report.acyclic);
                    assert!(!acyclic_oracle(&direct));
                }
                Verdict::RejectDisconnectable(_) => {
                    assert!(!connectable_oracle(&direct) || !acyclic_oracle(&direct));
                }
                Verdict::Accept => {}
            }
            if p.verdict.is_accept() {
                accepted += 1;
                s = s.commit(p).unwrap();
                assert_eq!(s.module(), &direct);
                check_pair(&s);
            } else {
                rejected += 1;
            }
        }
    }
    assert!(sessions >= 300, "only {sessions} sessions");
    assert!(
        accepted > 100 && rejected > 100,
        "{accepted} accepted, {rejected} rejected"
    );
}

fn labels(e: &Ebm) -> std::collections::BTreeSet<Label> {
    e.labels().cloned().collect()
}

/// Acceptance commutes. The rejection reason may not: connectability is
/// global, so a cyclic proposal can also become disconnected once an
/// unrelated part is committed, and disconnection is reported first.
#[test]
fn disjoint_footprints_commute() {
    let mut pairs = 0;
    for seed in 0..1500 {
        let Some(m) = base(seed) else { continue };
        let Ok(s) = Session::new(m) else { continue };
        let e1 = gen_extension(s.module(), seed, &GenParams::default());
        let Ok(after1) = s.module().compose(&e1) else {
            continue;
        };
        let e2 = gen_extension(&after1, seed + 7, &GenParams::default());
        if !labels(&e1).is_disjoint(&labels(&e2))
            || !s.footprint(&e1).is_disjoint(&s.footprint(&e2))
        {
            continue;
        }
        if switching_count(&after1.compose(&e2).unwrap()) > CAP {
            continue;
        }
        let v1 = s.propose(&e1).unwrap();
        let v2 = s.propose(&e2).unwrap();
        for (first, second, alone) in [(&v1, &e2, &v2), (&v2, &e1, &v1)] {
            if first.verdict.is_accept() {
                let next = s.commit(first.clone()).unwrap();
                let later = next.propose(second).unwrap();
                assert_eq!(
                    later.verdict.is_accept(),
                    alone.verdict.is_accept(),
                    "{} then {second} on {}",
                    first.ebm,
                    s.module()
                );
            }
        }
        pairs += 1;
    }
    assert!(pairs > 100, "only {pairs} pairs");
}

#[test]
fn named_sessions() {
    let s = Session::new(chain(&[ALPHA])).unwrap();
    assert_eq!(s.f(), &chain(&[ALPHA]));
    let p = s.propose(&ebm("[b c -o (k)]")).unwrap();
    assert!(p.verdict.is_accept());
    assert_eq!(p.f.cells().len(), 1);
    assert_eq!(p.f.cells()[0].to_string(), "[a -o (k)]");
    let s2 = s.commit(p.clone()).unwrap();
    assert_eq!(s2.generation(), 1);
    assert!(matches!(
        s2.commit(p),
        Err(SessionError::StaleCandidate { .. })
    ));

    assert!(matches!(
        Session::new(chain(&[BETA, EPS])),
        Err(SessionError::NotOCorrect)
    ));
    Session::new(chain(&[TBOT])).unwrap();

    let s = Session::new(chain(&["[-o (a b)]"])).unwrap();
    let p = s.propose(&ebm("[a -o ()]")).unwrap();
    assert!(matches!(p.verdict, Verdict::RejectDisconnectable(ref w) if !w.is_empty()));
    assert!(matches!(s.commit(p), Err(SessionError::NotAccepted)));

    let s = Session::new(chain(&[BETA])).unwrap();
    let p = s.propose(&ebm(EPS)).unwrap();
    assert!(matches!(p.verdict, Verdict::RejectCyclic(_)));
    assert!(p.verdict.to_string().starts_with("VERDICT reject-cyclic"));

    let s = Session::new(chain(&[ALPHA, BETA])).unwrap();
    assert!(s
        .footprint(&ebm("[d -o (m)]"))
        .contains(&Label::new("d").unwrap()));
    assert!(s.footprint(&ebm("[x -o (y)]")).is_empty());
    assert!(s.propose(&ebm("[b -o (z)]")).is_err());
}

#[test]
fn interface_free_proposals_depend_on_the_new_cell_alone() {
    for seed in 0..400 {
        let Some(m) = base(seed) else { continue };
        let Ok(s) = Session::new(m) else { continue };
        let fresh = gen_random(&GenParams {
            seed: seed + 1_000_000,
            cells: 1,
            closure_probability: 0.0,
            ..GenParams::default()
        });
        let cell = &fresh.cells()[0];
        let rename = |l: &Label| Label::new(format!("q{}", l.as_str())).unwrap();
        let e = Ebm::new(
            cell.hypotheses.iter().map(rename).collect(),
            cell.poles
                .iter()
                .map(|p| p.conclusions.iter().map(rename).collect())
                .collect(),
        )
        .unwrap();
        let alone = Module::from(&e);
        if s.module().border().is_empty() || alone.border().is_empty() {
            continue;
        }
        let p = s.propose(&e).unwrap();
        assert_eq!(
            p.verdict.is_accept(),
            o_correct_oracle(&alone),
            "{e} next to {}",
            s.module()
        );
    }
}

#[test]
fn shared_sessions_serialise_commits() {
    let shared = Arc::new(SharedSession::new(
        Session::new(chain(&["[-o (a)(b)]"])).unwrap(),
    ));
    let handles: Vec<_> = ["[a -o (x)]", "[b -o (y)]"]
        .into_iter()
        .map(|text| {
            let shared = Arc::clone(&shared);
            thread::spawn(move || shared.propose(&ebm(text)).unwrap())
        })
        .collect();
    let proposals: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert!(proposals.iter().all(|p| p.verdict.is_accept()));
    let mut proposals = proposals.into_iter();
    assert_eq!(shared.commit(proposals.next().unwrap()).unwrap(), 1);
    assert!(matches!(
        shared.commit(proposals.next().unwrap()),
        Err(SessionError::StaleCandidate {
            proposed: 0,
            current: 1
        })
    ));
    let again = shared.propose(&ebm("[b -o (y)]")).unwrap();
    assert_eq!(shared.commit(again).unwrap(), 2);
    check_pair(&shared.snapshot());
}
