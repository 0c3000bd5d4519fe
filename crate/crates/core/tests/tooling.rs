mod common;

use std::path::PathBuf;

use bipolar::bigstep::acyclic_decide;
use bipolar::contraction::{contract_nf, embed, System};
use bipolar::dot::{graph_to_dot, module_to_dot};
use bipolar::dsl::{self, DslError};
use bipolar::generate::{gen_random, GenParams};
use bipolar::switching::{acyclic_oracle, o_correct_oracle, switching_count};
use bipolar::SelfLinks;
use common::*;

const CORPUS: &str = include_str!("corpus/corpus.bm");

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

#[test]
fn corpus_round_trips() {
    let file = dsl::parse(CORPUS).unwrap();
    let text = dsl::render(&file);
    let again = dsl::parse(&text).unwrap();
    assert_eq!(again, file);
    assert_eq!(dsl::render(&again), text);
    assert_eq!(
        file.module("abgd").unwrap(),
        chain(&[ALPHA, BETA, GAMMA, DELTA])
    );
}

#[test]
fn generated_modules_round_trip() {
    for seed in 0..1000 {
        let m = gen_random(&GenParams {
            seed,
            cells: 1 + seed as usize % 6,
            ..GenParams::default()
        });
        let text = dsl::render_module("m", &m);
        let file = dsl::parse(&text).unwrap();
        assert_eq!(file.module("m").unwrap(), m, "{text}");
        assert_eq!(dsl::render(&file), text);
    }
}

#[test]
fn tbot_matches_golden_dot() {
    let dot = module_to_dot(&chain(&[TBOT]));
    let path = golden("tbot.dot");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &dot).unwrap();
    }
    assert_eq!(dot, std::fs::read_to_string(path).unwrap());
}

#[test]
fn dot_is_deterministic_on_the_corpus() {
    let file = dsl::parse(CORPUS).unwrap();
    for (name, m) in corpus() {
        let again = file.module(name).unwrap();
        assert_eq!(module_to_dot(&m), module_to_dot(&again), "{name}");
        for system in [System::Weak, System::Completion] {
            let a = graph_to_dot(&contract_nf(&embed(&m), system));
            let b = graph_to_dot(&contract_nf(&embed(&again), system));
            assert_eq!(a, b, "{name}");
        }
    }
}

#[test]
fn dot_marks_notcc_blobs() {
    let nf = contract_nf(&embed(&chain(&["[-o (a b)]", "[a -o ()]"])), System::Weak);
    let dot = graph_to_dot(&nf);
    assert_eq!(dot.matches("class=\"notcc\"").count(), 1, "{dot}");
    let clean = graph_to_dot(&contract_nf(&embed(&chain(&[ALPHA])), System::Weak));
    assert!(!clean.contains("notcc"));
}

#[test]
fn parse_errors_carry_positions() {
    let err = dsl::parse("ebm a { hyp x;\n pole y }").unwrap_err();
    assert!(matches!(err, DslError::Syntax { line: 2, .. }), "{err}");
    let err = dsl::parse("ebm a { hyp x; pole x; }").unwrap_err();
    assert!(
        matches!(err, DslError::DuplicateLabel { line: 1, .. }),
        "{err}"
    );
    let err = dsl::parse("ebm a { hyp; pole x; }\nmodule m = a . b;").unwrap_err();
    assert!(
        matches!(err, DslError::UnknownName { line: 2, .. }),
        "{err}"
    );
    let err = dsl::parse("ebm a { hyp; pole x; }\nebm b { hyp; pole x; }\nmodule m = a . b;")
        .unwrap_err();
    assert!(matches!(err, DslError::LabelClash { line: 3, .. }), "{err}");
    let err = dsl::parse("ebm a { hyp; pole x; }\nebm a { hyp; pole y; }").unwrap_err();
    assert!(
        matches!(err, DslError::DuplicateName { line: 2, .. }),
        "{err}"
    );
    assert!(dsl::parse("ebm t { hyp; pole; }")
        .unwrap()
        .ebm("t")
        .is_some());
}

#[test]
fn generator_is_deterministic_and_valid() {
    for seed in 0..200 {
        let p = GenParams {
            seed,
            cells: 6,
            ..GenParams::default()
        };
        let m = gen_random(&p);
        assert_eq!(m, gen_random(&p));
        m.validate(SelfLinks::Forbid).unwrap();
        assert!(m.cells().iter().all(|c| c.poles.len() <= 3));
        assert!(m
            .cells()
            .iter()
            .flat_map(|c| &c.poles)
            .all(|p| p.conclusions.len() <= 3));
    }
}

#[test]
fn transitory_modules_are_o_correct_iff_acyclic() {
    let mut n = 0;
    for seed in 0..400 {
        let m = gen_random(&GenParams {
            seed,
            cells: 1 + seed as usize % 6,
            transitory: true,
            ..GenParams::default()
        });
        if switching_count(&m) > 1 << 14 {
            continue;
        }
        for cell in m.cells() {
            assert!(!cell.hypotheses.is_empty() && cell.poles.iter().all(|p| !p.is_empty()));
        }
        let o = o_correct_oracle(&m);
        assert_eq!(o, acyclic_oracle(&m), "{m}");
        assert_eq!(o, acyclic_decide(&m), "{m}");
        n += 1;
    }
    assert!(n >= 300, "only {n} modules");
}
