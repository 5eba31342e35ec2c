//! Checks that the committed fixture files stay in sync with the built-in
//! terms and that every committed artifact parses, evaluates, and re-encodes
//! to the exact bytes on disk.

use lamhat::classify::{is_clash, is_clash_free_nf};
use lamhat::fixtures;
use lamhat::json::{derivation_from_json, derivation_to_json};
use lamhat::parse::{parse_term, parse_term_with};
use lamhat::reduction::{evaluate, EvalOutcome};
use lamhat::syntax::{alpha_eq, TagRegistry};
use lamhat::types::check_derivation;
use std::fs;
use std::path::{Path, PathBuf};

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn committed_derivation_matches_the_built_in_one() {
    let raw = fs::read_to_string(fixtures_dir().join("sigma.json")).expect("fixture exists");
    let value: serde_json::Value = serde_json::from_str(&raw).expect("fixture is valid json");
    let decoded = derivation_from_json(&value).expect("fixture decodes");
    check_derivation(&decoded).expect("fixture checks");
    assert_eq!(decoded.size(), 11);
    assert_eq!(decoded, fixtures::sigma());

    let reencoded = format!(
        "{}\n",
        serde_json::to_string_pretty(&derivation_to_json(&decoded)).unwrap()
    );
    assert_eq!(reencoded, raw, "sigma.json is not in canonical encoding");
}

#[test]
fn committed_sources_match_the_built_in_terms() {
    for (name, src, term) in fixtures::all_terms() {
        let file = fixtures_dir().join(format!("{}.lamhat", name.replace('-', "_")));
        let on_disk = fs::read_to_string(&file)
            .unwrap_or_else(|e| panic!("missing fixture {}: {e}", file.display()));
        assert_eq!(on_disk, format!("{src}\n"), "{name} source drifted");
        let (parsed, _) = parse_term(on_disk.trim()).expect("fixture parses");
        assert!(
            alpha_eq(&parsed, &term),
            "{name} parse drifted from built-in"
        );
    }
}

#[test]
fn fixture_terms_behave_as_documented() {
    match evaluate(&fixtures::running_example(), 100) {
        EvalOutcome::Normal { term, trace } => {
            assert_eq!(term.to_string(), "C0");
            assert_eq!(trace.counters.total(), 6);
        }
        other => panic!("running example did not normalize: {other:?}"),
    }

    assert!(matches!(
        evaluate(&fixtures::omega(), 200),
        EvalOutcome::OutOfFuel { .. }
    ));

    match evaluate(&fixtures::data_applied_clash(), 100) {
        EvalOutcome::Normal { term, .. } => {
            assert!(is_clash(&term).is_clash);
            assert!(!is_clash_free_nf(&term));
        }
        other => panic!("data-applied fixture did not stop: {other:?}"),
    }
}

#[test]
fn exception_fixtures_reduce_to_their_documented_results() {
    let [value_case, handled, propagated] = fixtures::exception_examples();
    for t in [&value_case, &handled, &propagated] {
        match evaluate(t, 100) {
            EvalOutcome::Normal { term, .. } => assert!(is_clash_free_nf(&term)),
            other => panic!("exception fixture did not normalize: {other:?}"),
        }
    }
}

#[test]
fn encoding_sources_parse_in_their_own_grammars() {
    use lamhat::encodings::{parse_bang, parse_cbn, parse_cbv};
    let dir = fixtures_dir();
    let cbn = fs::read_to_string(dir.join("beta_identity.cbn")).unwrap();
    let cbv = fs::read_to_string(dir.join("beta_identity.cbv")).unwrap();
    let bang = fs::read_to_string(dir.join("bang_identity.bang")).unwrap();
    parse_cbn(cbn.trim()).expect("cbn fixture parses");
    parse_cbv(cbv.trim()).expect("cbv fixture parses");
    parse_bang(bang.trim()).expect("bang fixture parses");
}

#[test]
fn every_lamhat_fixture_round_trips_through_the_printer() {
    let dir = fixtures_dir();
    for entry in fs::read_dir(&dir).expect("fixtures directory exists") {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("lamhat") {
            continue;
        }
        let src = fs::read_to_string(&path).unwrap();
        let mut reg = TagRegistry::new();
        let t = parse_term_with(src.trim(), &mut reg)
            .unwrap_or_else(|e| panic!("{} does not parse: {e}", path.display()));
        let printed = t.to_string();
        let back = parse_term_with(&printed, &mut reg).expect("printed form parses");
        assert!(
            alpha_eq(&t, &back),
            "{} print cycle drifted",
            path.display()
        );
    }
}
