//! The acceptance gate: one test per adequacy criterion, each ending in a
//! single printed pass line. Corpus sizes, bounds, and tolerances are fixed
//! here and are not meant to be tuned down.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use lamhat::classify::{closed_nf_shape, is_clash, is_clash_free_nf, nf_class, NfClass};
use lamhat::encodings::{check_simulation, CbvTerm, SourceTerm, SIM_SEARCH_BOUND};
use lamhat::fixtures;
use lamhat::gen::{
    gen_bang_term, gen_cbn_term, gen_cbv_term, gen_clash, gen_closed_term, gen_registry,
    gen_subst_instance, gen_term, mutate_derivation,
};
use lamhat::json::{derivation_from_json, derivation_to_json};
use lamhat::reduction::{
    all_paths_to_nf, apply_at, det_redex, enumerate_redexes, evaluate, step_det, Counters,
    EvalOutcome, PathEnumeration, RuleName, Trace,
};
use lamhat::syntax::{alpha_eq, substitute, well_formed};
use lamhat::synthesis::{
    anti_substitute, synthesize, transport_step, weighted_substitute, SynthesisOutcome,
};
use lamhat::types::{
    assert_clash_untypable, check_derivation, relevance_check, Derivation, TypeOf,
};
use lamhat::Term;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c0() -> Term {
    Term::data(lamhat::Tag::new("C0", 0), vec![])
}

fn endpoint(start: &Term, trace: &Trace) -> Term {
    trace
        .steps
        .last()
        .map(|s| s.after.clone())
        .unwrap_or_else(|| start.clone())
}

#[test]
fn criterion_1_running_example_replay() {
    let t0 = fixtures::running_example();
    let mut best = Duration::MAX;
    let mut result = None;
    for _ in 0..10 {
        let started = Instant::now();
        let out = evaluate(&t0, 1_000);
        best = best.min(started.elapsed());
        result = Some(out);
    }
    let EvalOutcome::Normal { term, trace } = result.expect("ten runs happened") else {
        panic!("the running example normalizes");
    };
    assert_eq!(term, c0());
    assert_eq!(trace.len(), 6);
    assert_eq!(
        trace.counters,
        Counters {
            b: 1,
            c: 1,
            m: 0,
            e: 4
        }
    );
    assert!(best < Duration::from_millis(1), "evaluation took {best:?}");
    println!("criterion 1: PASS (C0 in 6 steps, counters (1,1,0,4), best {best:?})");
}

#[test]
fn criterion_2_committed_derivation_fixture() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/sigma.json");
    let text = std::fs::read_to_string(path).expect("fixtures/sigma.json exists");
    let value: serde_json::Value = serde_json::from_str(&text).expect("fixture is valid JSON");
    let decoded = derivation_from_json(&value).expect("fixture decodes");
    check_derivation(&decoded).expect("fixture derivation checks");
    assert_eq!(decoded.size(), 11);
    assert_eq!(
        decoded,
        fixtures::sigma(),
        "committed fixture matches the built-in derivation"
    );
    assert_eq!(
        derivation_to_json(&decoded),
        value,
        "fixture re-encodes to the same JSON"
    );
    println!("criterion 2: PASS (sigma.json checks, size=11)");
}

#[test]
fn criterion_3_typability_with_step_bound() {
    let t0 = fixtures::running_example();
    let outcome = synthesize(&t0, 50).expect("the running example is closed");
    let SynthesisOutcome::Typable {
        derivation,
        bound,
        steps,
    } = outcome
    else {
        panic!("the running example is typable");
    };
    assert_eq!(steps, 6);
    assert!(bound >= 6, "bound {bound} must dominate the step count");

    let EvalOutcome::Normal { trace, .. } = evaluate(&t0, 50) else {
        panic!("the running example normalizes");
    };
    let mut sizes = vec![derivation.size()];
    let mut phi = derivation;
    for step in &trace.steps {
        phi = transport_step(&phi, step);
        check_derivation(&phi).expect("transported derivation checks");
        sizes.push(phi.size());
    }
    assert_eq!(sizes.len(), 7);
    assert!(
        sizes.windows(2).all(|w| w[0] > w[1]),
        "sizes not strictly decreasing: {sizes:?}"
    );
    println!(
        "criterion 3: PASS (steps=6, bound={}, transport sizes {sizes:?})",
        sizes[0]
    );
}

#[test]
fn criterion_4_metatheory_at_desk_scale() {
    let reg = gen_registry();
    let mut rng = ChaCha8Rng::seed_from_u64(0x4001);
    let mut complete = 0usize;
    for i in 0..10_000 {
        let t = if i % 2 == 0 {
            gen_term(&mut rng, 6)
        } else {
            gen_closed_term(&mut rng, 6)
        };
        well_formed(&t, &reg).expect("generated terms are well formed");

        let redexes = enumerate_redexes(&t);
        let det = det_redex(&t);
        assert_eq!(
            det.is_some(),
            !redexes.is_empty(),
            "determinism broke on {t}"
        );
        assert_eq!(
            det.as_ref(),
            redexes.first(),
            "strategy is not leftmost-outermost on {t}"
        );
        assert_eq!(step_det(&t).is_some(), !redexes.is_empty());

        if let PathEnumeration::Complete(traces) = all_paths_to_nf(&t, 40) {
            complete += 1;
            assert!(!traces.is_empty(), "complete enumeration is nonempty");
            let len0 = traces[0].len();
            let end0 = endpoint(&t, &traces[0]);
            for tr in &traces[1..] {
                assert_eq!(tr.len(), len0, "maximal traces of {t} differ in length");
                assert!(
                    alpha_eq(&endpoint(&t, tr), &end0),
                    "endpoints of {t} differ"
                );
            }
        }

        let cf = is_clash_free_nf(&t);
        let clash = is_clash(&t).is_clash;
        assert_eq!(
            cf,
            det.is_none() && !clash,
            "clash-free-nf disagrees on {t}"
        );
        assert_eq!(
            nf_class(&t) != NfClass::NotNormal,
            redexes.is_empty(),
            "nf_class on {t}"
        );
        if t.is_closed() && cf {
            closed_nf_shape(&t).expect("closed clash-free normal forms have a shape");
        }

        let u = gen_term(&mut rng, 3);
        let x = t
            .free_vars()
            .into_iter()
            .next()
            .unwrap_or_else(|| String::from("x"));
        let image = substitute(&t, &x, &u);
        let mut expected: BTreeSet<String> = t.free_vars();
        if expected.remove(&x) {
            expected.extend(u.free_vars());
        }
        assert_eq!(
            image.free_vars(),
            expected,
            "free variable equation failed on {t}"
        );

        let v = gen_closed_term(&mut rng, 2);
        let y = if x == "y" {
            String::from("z")
        } else {
            String::from("y")
        };
        let lhs = substitute(&substitute(&t, &x, &u), &y, &v);
        let rhs = substitute(&substitute(&t, &y, &v), &x, &substitute(&u, &y, &v));
        assert!(
            alpha_eq(&lhs, &rhs),
            "substitution composition failed on {t}"
        );

        if let Some((pos, rule)) = det {
            let after = apply_at(&t, &pos, rule).expect("the deterministic redex applies");
            let w = gen_closed_term(&mut rng, 2);
            let stepped = apply_at(&substitute(&t, &x, &w), &pos, rule)
                .expect("the redex survives substitution");
            assert!(
                alpha_eq(&stepped, &substitute(&after, &x, &w)),
                "steps are not preserved under substitution on {t}"
            );
        }
    }
    assert!(
        complete >= 5_000,
        "only {complete} of 10000 path enumerations completed"
    );
    println!("criterion 4: PASS (10000 terms, {complete} complete path enumerations)");
}

#[test]
fn criterion_5_weighted_size_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4005);
    for _ in 0..1_000 {
        let inst = gen_subst_instance(&mut rng);
        let TypeOf::Multi(m) = &inst.phi_u.conclusion.ty else {
            panic!("the argument derivation concludes a multiset");
        };
        let width = m.len();

        let composed = weighted_substitute(&inst.phi_t, &inst.x, &inst.phi_u)
            .expect("the instance demand matches");
        assert_eq!(
            composed.size(),
            inst.phi_t.size() + inst.phi_u.size() - width,
            "substitution size equation failed for {}",
            inst.t
        );
        check_derivation(&composed).expect("composed derivation checks");
        let image = substitute(&inst.t, &inst.x, &inst.u);
        assert_eq!(composed.subject_term(), Some(&image));

        let (phi_t, phi_u, m2) =
            anti_substitute(&composed, &inst.t, &inst.x, &inst.u).expect("the image decomposes");
        assert_eq!(m2.len(), width);
        assert_eq!(composed.size(), phi_t.size() + phi_u.size() - m2.len());
        check_derivation(&phi_t).expect("extracted body derivation checks");
        check_derivation(&phi_u).expect("extracted argument derivation checks");
    }
    println!("criterion 5: PASS (1000 instances, exact size equations both ways)");
}

/// What a fuel-bounded evaluation loop, using only the reduction and
/// classification modules, says about a closed term.
enum Verdict {
    ClashFreeNf,
    Clash,
    Fuel,
}

fn evaluation_verdict(t: &Term, fuel: usize) -> Verdict {
    let mut cur = t.clone();
    let mut used = 0;
    loop {
        if is_clash(&cur).is_clash {
            return Verdict::Clash;
        }
        match step_det(&cur) {
            None => return Verdict::ClashFreeNf,
            Some(_) if used == fuel => return Verdict::Fuel,
            Some((next, _)) => {
                cur = next;
                used += 1;
            }
        }
    }
}

#[test]
fn criterion_6_soundness_and_completeness_at_desk_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4006);
    let mut corpus: Vec<Term> = (0..10_000).map(|_| gen_closed_term(&mut rng, 6)).collect();
    corpus.extend((0..500).map(|_| gen_clash(&mut rng)));
    corpus.push(fixtures::omega());

    let (mut typable, mut untypable, mut unknown) = (0usize, 0usize, 0usize);
    for t in &corpus {
        let expected = evaluation_verdict(t, 200);
        let actual = synthesize(t, 200).expect("corpus terms are closed");
        match (expected, actual) {
            (Verdict::ClashFreeNf, SynthesisOutcome::Typable { derivation, .. }) => {
                typable += 1;
                check_derivation(&derivation).expect("typable derivation checks");
                relevance_check(&derivation).expect("typable derivation is relevant");
                assert!(
                    derivation.conclusion.context.is_empty(),
                    "closed term typed under a nonempty context: {t}"
                );
                assert_eq!(derivation.subject_term(), Some(t));
            }
            (Verdict::Clash, SynthesisOutcome::Untypable { witness, .. }) => {
                untypable += 1;
                assert!(
                    is_clash(&witness).is_clash,
                    "untypability witness is not a clash"
                );
            }
            (Verdict::Fuel, SynthesisOutcome::Unknown { fuel }) => {
                unknown += 1;
                assert_eq!(fuel, 200);
            }
            (expected, actual) => {
                let side = match expected {
                    Verdict::ClashFreeNf => "reaches a clash-free normal form",
                    Verdict::Clash => "reaches a clash",
                    Verdict::Fuel => "exhausts fuel",
                };
                panic!("{t} {side} but synthesize returned {actual:?}");
            }
        }
    }
    assert!(
        typable > 0 && untypable > 0 && unknown > 0,
        "all verdicts exercised"
    );
    println!(
        "criterion 6: PASS ({} terms: {typable} typable, {untypable} untypable, {unknown} unknown, 0 misclassified)",
        corpus.len()
    );
}

#[test]
fn criterion_7_simulation_certificates() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x4007);
    let mut totals = [0usize; 3];
    let mut base_cbv_steps = 0usize;
    for (kind, total) in totals.iter_mut().enumerate() {
        for _ in 0..200 {
            let src = match kind {
                0 => SourceTerm::Cbn(gen_cbn_term(&mut rng, 4)),
                1 => SourceTerm::Cbv(gen_cbv_term(&mut rng, 4)),
                _ => SourceTerm::Bang(gen_bang_term(&mut rng, 4)),
            };
            let certs = check_simulation(&src, 10, SIM_SEARCH_BOUND)
                .expect("every source step has a certificate");
            *total += certs.len();
            for c in &certs {
                assert!(!c.trace.is_empty(), "simulation traces are nonempty");
                assert_eq!(c.trace.steps[0].before, c.target_before);
                assert!(alpha_eq(
                    &c.trace.steps.last().expect("nonempty").after,
                    &c.target_after
                ));
                if let SourceTerm::Cbv(CbvTerm::App(f, a)) = &c.source_before {
                    if matches!(**f, CbvTerm::Abs(_, _)) && a.is_value() {
                        base_cbv_steps += 1;
                        let rules: Vec<RuleName> = c.trace.steps.iter().map(|s| s.rule).collect();
                        assert_eq!(
                            rules,
                            vec![
                                RuleName::M,
                                RuleName::E,
                                RuleName::M,
                                RuleName::E,
                                RuleName::DB,
                                RuleName::E
                            ],
                            "base value-beta certificate deviates for {}",
                            c.target_before
                        );
                    }
                }
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(
        base_cbv_steps > 0,
        "the corpus exercises base value-beta steps"
    );
    assert!(
        elapsed < Duration::from_secs(60),
        "simulations took {elapsed:?}"
    );
    println!(
        "criterion 7: PASS (certificates cbn={} cbv={} bang={}, {base_cbv_steps} base value-beta patterns, {elapsed:?})",
        totals[0], totals[1], totals[2]
    );
}

#[test]
fn criterion_8_exception_encodings() {
    let [t1, t2, t3] = fixtures::exception_examples();
    let run = |t: &Term| match evaluate(t, 100) {
        EvalOutcome::Normal { term, .. } => term,
        EvalOutcome::OutOfFuel { .. } => panic!("exception examples normalize"),
    };
    let u_after = substitute(&Term::var("u"), "x", &Term::var("v"));
    assert!(alpha_eq(&run(&t1), &u_after));
    assert!(alpha_eq(&run(&t2), &Term::var("r")));
    let raised = Term::data(lamhat::Tag::new("E", 1), vec![Term::var("r")]);
    assert!(alpha_eq(&run(&t3), &raised));
    println!("criterion 8: PASS (handler consumes the value, handles and propagates the raise)");
}

#[test]
fn criterion_9_clash_untypability() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4009);
    for _ in 0..1_000 {
        let cl = gen_clash(&mut rng);
        assert_clash_untypable(&cl).expect("generated clashes are untypable");
    }

    let mut bases: Vec<Derivation> = vec![fixtures::sigma()];
    match synthesize(&fixtures::running_example(), 50).expect("closed") {
        SynthesisOutcome::Typable { derivation, .. } => bases.push(derivation),
        other => panic!("the running example is typable, got {other:?}"),
    }
    while bases.len() < 8 {
        let t = gen_closed_term(&mut rng, 5);
        if let Ok(SynthesisOutcome::Typable { derivation, .. }) = synthesize(&t, 50) {
            bases.push(derivation);
        }
    }

    let mut accepted = 0usize;
    for i in 0..10_000 {
        let mutant = mutate_derivation(&mut rng, &bases[i % bases.len()]);
        if check_derivation(&mutant).is_ok() {
            accepted += 1;
            if let Some(subject) = mutant.subject_term() {
                assert!(
                    !is_clash(subject).is_clash,
                    "checker accepted a derivation of the clash {subject}"
                );
            }
        }
    }
    println!(
        "criterion 9: PASS (1000 clashes untypable, 10000 mutants fuzzed, {accepted} accepted, none with clash subjects)"
    );
}
