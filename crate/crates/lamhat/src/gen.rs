//! Seeded random generators used by the property and acceptance suites:
//! well-formed terms over a small tag registry, guaranteed clashes,
//! substitution instances with their derivations, and derivation mutations
//! for fuzzing the checker. Every generator is deterministic in the RNG.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::encodings::{BangTerm, CbnTerm, CbvTerm};
use crate::syntax::{fresh_name, Branch, Pattern, Tag, TagRegistry, Term};
use crate::synthesis::type_cf_normal_form;
use crate::types::{Derivation, MultisetType, RuleLabel, TermType, TypeOf};

/// The four-tag registry the random suites run over.
pub fn gen_registry() -> TagRegistry {
    let mut reg = TagRegistry::new();
    for (name, arity) in [("C0", 0), ("One", 1), ("Pair", 2), ("Triple", 3)] {
        reg.declare(name, arity)
            .expect("fresh registry has no conflicts");
    }
    reg
}

fn gen_tags() -> Vec<Tag> {
    vec![
        Tag::new("C0", 0),
        Tag::new("One", 1),
        Tag::new("Pair", 2),
        Tag::new("Triple", 3),
    ]
}

const NAME_POOL: [&str; 6] = ["a", "b", "c", "x", "y", "z"];

/// A random well-formed term of the given depth, possibly open. Binder and
/// free names are drawn from one small pool, so shadowing and capture
/// situations occur often.
pub fn gen_term<R: Rng>(rng: &mut R, depth: usize) -> Term {
    let mut scope = Vec::new();
    go(rng, depth, &mut scope, true)
}

/// A random well-formed closed term of the given depth.
pub fn gen_closed_term<R: Rng>(rng: &mut R, depth: usize) -> Term {
    let mut scope = Vec::new();
    go(rng, depth, &mut scope, false)
}

fn leaf<R: Rng>(rng: &mut R, scope: &[String], allow_free: bool) -> Term {
    if !scope.is_empty() && rng.gen_bool(0.6) {
        return Term::var(scope.choose(rng).expect("scope is nonempty").clone());
    }
    if allow_free && rng.gen_bool(0.5) {
        return Term::var(*NAME_POOL.choose(rng).expect("pool is nonempty"));
    }
    Term::data(Tag::new("C0", 0), vec![])
}

fn go<R: Rng>(rng: &mut R, depth: usize, scope: &mut Vec<String>, allow_free: bool) -> Term {
    if depth == 0 {
        return leaf(rng, scope, allow_free);
    }
    match rng.gen_range(0..20) {
        0..=2 => leaf(rng, scope, allow_free),
        3..=5 => {
            let p = gen_pattern(rng, 1);
            let n = scope.len();
            scope.extend(p.vars_ordered());
            let body = go(rng, depth - 1, scope, allow_free);
            scope.truncate(n);
            Term::abs(p, body)
        }
        6..=8 => Term::app(
            go(rng, depth - 1, scope, allow_free),
            go(rng, depth - 1, scope, allow_free),
        ),
        9..=11 => {
            let arg = go(rng, depth - 1, scope, allow_free);
            let p = gen_pattern(rng, 1);
            let n = scope.len();
            scope.extend(p.vars_ordered());
            let body = go(rng, depth - 1, scope, allow_free);
            scope.truncate(n);
            Term::match_closure(body, p, arg)
        }
        12..=15 => {
            let tags = gen_tags();
            let tag = tags.choose(rng).expect("tag list is nonempty").clone();
            let args = (0..tag.arity)
                .map(|_| go(rng, depth - 1, scope, allow_free))
                .collect();
            Term::Data(tag, args)
        }
        _ => {
            let scrut = go(rng, depth - 1, scope, allow_free);
            let mut tags = gen_tags();
            tags.shuffle(rng);
            tags.truncate(rng.gen_range(1..=3));
            let branches = tags
                .into_iter()
                .map(|tag| {
                    let pattern = gen_data_pattern(rng, tag, 0);
                    let n = scope.len();
                    scope.extend(pattern.vars_ordered());
                    let body = go(rng, depth - 1, scope, allow_free);
                    scope.truncate(n);
                    Branch { pattern, body }
                })
                .collect();
            Term::Case(Box::new(scrut), branches)
        }
    }
}

/// A random linear pattern. Variable names come from the shared pool, so
/// distinct patterns can reuse names.
pub fn gen_pattern<R: Rng>(rng: &mut R, depth: usize) -> Pattern {
    let mut used = BTreeSet::new();
    gen_pattern_inner(rng, depth, &mut used)
}

fn gen_pattern_inner<R: Rng>(rng: &mut R, depth: usize, used: &mut BTreeSet<String>) -> Pattern {
    if depth == 0 || rng.gen_bool(0.7) {
        return Pattern::var(pattern_name(rng, used));
    }
    let tags = gen_tags();
    let tag = tags.choose(rng).expect("tag list is nonempty").clone();
    let subs = (0..tag.arity)
        .map(|_| gen_pattern_inner(rng, depth - 1, used))
        .collect();
    Pattern::data(tag, subs)
}

fn gen_data_pattern<R: Rng>(rng: &mut R, tag: Tag, depth: usize) -> Pattern {
    let mut used = BTreeSet::new();
    let subs = (0..tag.arity)
        .map(|_| gen_pattern_inner(rng, depth, &mut used))
        .collect();
    Pattern::data(tag, subs)
}

fn pattern_name<R: Rng>(rng: &mut R, used: &mut BTreeSet<String>) -> String {
    let base = *NAME_POOL.choose(rng).expect("pool is nonempty");
    let name = if used.contains(base) {
        fresh_name(base, used)
    } else {
        base.to_string()
    };
    used.insert(name.clone());
    name
}

/// A random closed term that contains a clash: one of the five base clash
/// shapes, wrapped in a few evaluation-context layers.
pub fn gen_clash<R: Rng>(rng: &mut R) -> Term {
    fn filler<R: Rng>(rng: &mut R) -> Term {
        gen_closed_term(rng, 1)
    }
    fn frames<R: Rng>(rng: &mut R, mut core: Term) -> Term {
        for _ in 0..rng.gen_range(0..=2) {
            let p = gen_pattern(rng, 1);
            let arg = filler(rng);
            core = Term::match_closure(core, p, arg);
        }
        core
    }
    fn pair_term<R: Rng>(rng: &mut R) -> Term {
        let a = filler(rng);
        let b = filler(rng);
        Term::data(Tag::new("Pair", 2), vec![a, b])
    }
    fn abs_term<R: Rng>(rng: &mut R) -> Term {
        let body = filler(rng);
        Term::abs(Pattern::var("q"), body)
    }
    let one = Tag::new("One", 1);
    let one_branch = |body: Term| {
        vec![Branch {
            pattern: Pattern::data(Tag::new("One", 1), vec![Pattern::var("a")]),
            body,
        }]
    };
    let base = match rng.gen_range(0..5) {
        0 => {
            let head = pair_term(rng);
            let head = frames(rng, head);
            let arg = filler(rng);
            Term::app(head, arg)
        }
        1 => {
            let body = filler(rng);
            let abs = abs_term(rng);
            let arg = frames(rng, abs);
            Term::match_closure(
                body,
                Pattern::data(
                    Tag::new("Pair", 2),
                    vec![Pattern::var("a"), Pattern::var("b")],
                ),
                arg,
            )
        }
        2 => {
            let body = filler(rng);
            let data = pair_term(rng);
            let arg = frames(rng, data);
            Term::match_closure(
                body,
                Pattern::data(one.clone(), vec![Pattern::var("a")]),
                arg,
            )
        }
        3 => {
            let abs = abs_term(rng);
            let scrut = frames(rng, abs);
            let body = filler(rng);
            Term::Case(Box::new(scrut), one_branch(body))
        }
        _ => {
            let data = pair_term(rng);
            let scrut = frames(rng, data);
            let body = filler(rng);
            Term::Case(Box::new(scrut), one_branch(body))
        }
    };
    match rng.gen_range(0..4) {
        0 => base,
        1 => {
            let arg = filler(rng);
            Term::app(base, arg)
        }
        2 => {
            let p = gen_pattern(rng, 1);
            let arg = filler(rng);
            Term::match_closure(base, p, arg)
        }
        _ => {
            let body = filler(rng);
            Term::match_closure(
                body,
                Pattern::data(Tag::new("One", 1), vec![Pattern::var("h")]),
                base,
            )
        }
    }
}

fn lambda_name<R: Rng>(rng: &mut R) -> String {
    (*NAME_POOL.choose(rng).expect("pool is nonempty")).to_string()
}

/// A random closed call-by-name term. Applications of abstractions are
/// frequent, so most terms step at least once.
pub fn gen_cbn_term<R: Rng>(rng: &mut R, depth: usize) -> CbnTerm {
    fn go<R: Rng>(rng: &mut R, depth: usize, scope: &mut Vec<String>) -> CbnTerm {
        let shape = if depth == 0 { 0 } else { rng.gen_range(0..10) };
        match shape {
            0..=2 => {
                if !scope.is_empty() && rng.gen_bool(0.8) {
                    CbnTerm::var(scope.choose(rng).expect("scope is nonempty").clone())
                } else {
                    let x = lambda_name(rng);
                    CbnTerm::abs(x.clone(), CbnTerm::var(x))
                }
            }
            3..=5 => {
                let x = lambda_name(rng);
                scope.push(x.clone());
                let body = go(rng, depth - 1, scope);
                scope.pop();
                CbnTerm::abs(x, body)
            }
            _ => {
                let fun = go(rng, depth - 1, scope);
                let arg = go(rng, depth - 1, scope);
                CbnTerm::app(fun, arg)
            }
        }
    }
    go(rng, depth, &mut Vec::new())
}

/// A random closed call-by-value term, with the same shape mix as
/// [`gen_cbn_term`].
pub fn gen_cbv_term<R: Rng>(rng: &mut R, depth: usize) -> CbvTerm {
    fn convert(t: &CbnTerm) -> CbvTerm {
        match t {
            CbnTerm::Var(x) => CbvTerm::var(x.clone()),
            CbnTerm::Abs(x, b) => CbvTerm::abs(x.clone(), convert(b)),
            CbnTerm::App(f, a) => CbvTerm::app(convert(f), convert(a)),
        }
    }
    convert(&gen_cbn_term(rng, depth))
}

/// A random closed bang calculus term. Explicit substitution arguments are
/// biased towards banged terms so the `s` rule fires often.
pub fn gen_bang_term<R: Rng>(rng: &mut R, depth: usize) -> BangTerm {
    fn go<R: Rng>(rng: &mut R, depth: usize, scope: &mut Vec<String>) -> BangTerm {
        let shape = if depth == 0 { 0 } else { rng.gen_range(0..12) };
        match shape {
            0..=2 => {
                if !scope.is_empty() && rng.gen_bool(0.8) {
                    BangTerm::var(scope.choose(rng).expect("scope is nonempty").clone())
                } else {
                    let x = lambda_name(rng);
                    BangTerm::abs(x.clone(), BangTerm::var(x))
                }
            }
            3..=4 => {
                let x = lambda_name(rng);
                scope.push(x.clone());
                let body = go(rng, depth - 1, scope);
                scope.pop();
                BangTerm::abs(x, body)
            }
            5..=7 => {
                let fun = go(rng, depth - 1, scope);
                let arg = go(rng, depth - 1, scope);
                BangTerm::app(fun, arg)
            }
            8..=9 => BangTerm::bang(go(rng, depth - 1, scope)),
            _ => {
                let x = lambda_name(rng);
                scope.push(x.clone());
                let body = go(rng, depth - 1, scope);
                scope.pop();
                let arg = go(rng, depth - 1, scope);
                let arg = if rng.gen_bool(0.6) {
                    BangTerm::bang(arg)
                } else {
                    arg
                };
                BangTerm::sub(body, x, arg)
            }
        }
    }
    go(rng, depth, &mut Vec::new())
}

/// A substitution instance: `phi_t` types `t` using `x` with multiset `M`
/// and `phi_u` is a matching multiset derivation of a closed normal form
/// `u`. Feeding the pair to the weighted substitution and its inverse
/// exercises the size equations.
#[derive(Debug, Clone)]
pub struct SubstInstance {
    pub phi_t: Derivation,
    pub x: String,
    pub t: Term,
    pub phi_u: Derivation,
    pub u: Term,
}

pub fn gen_subst_instance<R: Rng>(rng: &mut R) -> SubstInstance {
    let u = if rng.gen_bool(0.5) {
        Term::abs(Pattern::var("w"), gen_closed_term(rng, 1))
    } else {
        let tags = gen_tags();
        let tag = tags.choose(rng).expect("tag list is nonempty").clone();
        let args = (0..tag.arity).map(|_| gen_closed_term(rng, 1)).collect();
        Term::Data(tag, args)
    };
    let psi = type_cf_normal_form(&u).expect("u is a closed clash-free normal form");
    let sigma = psi
        .term_type()
        .expect("normal form derivation concludes a term type")
        .clone();
    let mut demand = 0;
    let (t, phi_t) = gen_subst_body(rng, 2, &sigma, &mut demand);
    let premises = (0..demand).map(|_| psi.clone()).collect();
    let phi_u = Derivation::many(&u, premises);
    SubstInstance {
        phi_t,
        x: "s".into(),
        t,
        phi_u,
        u,
    }
}

/// Builds a term over data constructors and `s` leaves together with its
/// derivation, counting how many typed copies of `s` it demands.
fn gen_subst_body<R: Rng>(
    rng: &mut R,
    depth: usize,
    sigma: &TermType,
    demand: &mut usize,
) -> (Term, Derivation) {
    if depth == 0 || rng.gen_bool(0.3) {
        if rng.gen_bool(0.6) {
            *demand += 1;
            return (Term::var("s"), Derivation::ax("s", sigma.clone()));
        }
        let c0 = Term::data(Tag::new("C0", 0), vec![]);
        return (c0.clone(), Derivation::constant(Tag::new("C0", 0), vec![]));
    }
    let tags = gen_tags();
    let tag = tags.choose(rng).expect("tag list is nonempty").clone();
    let mut args = Vec::with_capacity(tag.arity);
    let mut children = Vec::with_capacity(tag.arity);
    for _ in 0..tag.arity {
        let copies = rng.gen_range(0..=2);
        let (arg, ds) = if copies == 0 {
            let (arg, _) = gen_subst_body(rng, depth - 1, sigma, &mut 0);
            (arg, vec![])
        } else {
            let (arg, first) = gen_subst_body(rng, depth - 1, sigma, demand);
            let mut ds = vec![first];
            for _ in 1..copies {
                let (_, d) = replay_subst_body(&arg, sigma, demand);
                ds.push(d);
            }
            (arg, ds)
        };
        children.push(Derivation::many(&arg, ds));
        args.push(arg);
    }
    (
        Term::Data(tag.clone(), args),
        Derivation::constant(tag, children),
    )
}

/// Re-derives an already generated substitution body, adding its demand.
fn replay_subst_body(t: &Term, sigma: &TermType, demand: &mut usize) -> (Term, Derivation) {
    match t {
        Term::Var(x) => {
            *demand += 1;
            (t.clone(), Derivation::ax(x.clone(), sigma.clone()))
        }
        Term::Data(tag, args) => {
            let children = args
                .iter()
                .map(|a| {
                    let (_, d) = replay_subst_body(a, sigma, demand);
                    Derivation::many(a, vec![d])
                })
                .collect();
            (t.clone(), Derivation::constant(tag.clone(), children))
        }
        _ => unreachable!("substitution bodies use only variables and data"),
    }
}

/// Applies one random structural corruption to a derivation: replacing a
/// subject (often with a clash), relabeling a rule, rewriting a type or
/// context, duplicating or dropping a child, or toggling the selected
/// branch. The result usually fails the checker; the fuzz property is that
/// whenever it still checks, its subject is not a clash.
pub fn mutate_derivation<R: Rng>(rng: &mut R, d: &Derivation) -> Derivation {
    let mut out = d.clone();
    let idx = rng.gen_range(0..node_count(&out));
    let node = node_at_mut(&mut out, idx).expect("index is in range");
    match rng.gen_range(0..7) {
        0 => {
            node.conclusion.subject = crate::types::Subject::Term(gen_clash(rng));
        }
        1 => {
            node.conclusion.subject = crate::types::Subject::Term(gen_closed_term(rng, 2));
        }
        2 => {
            let labels = [
                RuleLabel::Ax,
                RuleLabel::Many,
                RuleLabel::Abs,
                RuleLabel::AbsStar,
                RuleLabel::App,
                RuleLabel::Const,
                RuleLabel::Match,
                RuleLabel::Case,
            ];
            node.rule = *labels.choose(rng).expect("label list is nonempty");
        }
        3 => {
            node.conclusion.ty = if rng.gen_bool(0.5) {
                TypeOf::Term(TermType::Star)
            } else {
                TypeOf::Multi(MultisetType::empty())
            };
        }
        4 => {
            if node.children.is_empty() || rng.gen_bool(0.3) {
                let filler = Derivation::constant(Tag::new("C0", 0), vec![]);
                node.children.push(filler);
            } else if rng.gen_bool(0.5) {
                node.children.pop();
            } else {
                let dup = node.children[0].clone();
                node.children.push(dup);
            }
        }
        5 => {
            let extra = crate::types::TypingContext::bind(
                *NAME_POOL.choose(rng).expect("pool is nonempty"),
                MultisetType::singleton(TermType::Star),
            );
            node.conclusion.context = node.conclusion.context.union(&extra);
        }
        _ => {
            node.selected_branch = if rng.gen_bool(0.5) {
                None
            } else {
                Some(rng.gen_range(0..3))
            };
        }
    }
    out
}

fn node_count(d: &Derivation) -> usize {
    1 + d.children.iter().map(node_count).sum::<usize>()
}

fn node_at_mut(d: &mut Derivation, idx: usize) -> Option<&mut Derivation> {
    if idx == 0 {
        return Some(d);
    }
    let mut rest = idx - 1;
    for c in &mut d.children {
        let n = node_count(c);
        if rest < n {
            return node_at_mut(c, rest);
        }
        rest -= n;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::is_clash;
    use crate::syntax::well_formed;
    use crate::synthesis::{anti_substitute, weighted_substitute};
    use crate::types::check_derivation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        let a: Vec<Term> = (0..50)
            .map(|_| gen_term(&mut ChaCha8Rng::seed_from_u64(7), 4))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let first = gen_term(&mut rng, 4);
        assert!(a.iter().all(|t| *t == first));
    }

    #[test]
    fn generated_terms_are_well_formed() {
        let reg = gen_registry();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..500 {
            let t = if i % 2 == 0 {
                gen_term(&mut rng, 5)
            } else {
                gen_closed_term(&mut rng, 5)
            };
            well_formed(&t, &reg).expect("generated terms are well-formed");
            if i % 2 != 0 {
                assert!(t.is_closed(), "closed generator stays closed: {t}");
            }
        }
    }

    #[test]
    fn generated_clashes_clash() {
        let reg = gen_registry();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..300 {
            let t = gen_clash(&mut rng);
            assert!(is_clash(&t).is_clash, "not a clash: {t}");
            well_formed(&t, &reg).expect("clashes are still well-formed");
            assert!(t.is_closed(), "clash generator stays closed: {t}");
        }
    }

    #[test]
    fn substitution_instances_satisfy_the_size_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let inst = gen_subst_instance(&mut rng);
            check_derivation(&inst.phi_t).expect("body derivation checks");
            check_derivation(&inst.phi_u).expect("argument derivation checks");
            let m = inst.phi_t.conclusion.context.get(&inst.x);
            let phi = weighted_substitute(&inst.phi_t, &inst.x, &inst.phi_u)
                .expect("instance multisets agree");
            assert_eq!(phi.size(), inst.phi_t.size() + inst.phi_u.size() - m.len());
            check_derivation(&phi).expect("substituted derivation checks");
            let (back_t, back_u, back_m) =
                anti_substitute(&phi, &inst.t, &inst.x, &inst.u).expect("image matches");
            assert_eq!(back_m, m);
            assert_eq!(phi.size(), back_t.size() + back_u.size() - back_m.len());
            check_derivation(&back_t).expect("recovered body checks");
        }
    }

    #[test]
    fn accepted_mutants_never_have_clash_subjects() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let base = {
            use crate::synthesis::{synthesize, SynthesisOutcome};
            let t = crate::parse::parse_term(
                "(\\x. case x of {Pair(x,y)->y | Triple(x,y,z)->x}) Triple(C0,C1,C2)",
            )
            .expect("fixture parses")
            .0;
            match synthesize(&t, 100).expect("closed") {
                SynthesisOutcome::Typable { derivation, .. } => derivation,
                _ => panic!("fixture is typable"),
            }
        };
        for _ in 0..1_000 {
            let mutant = mutate_derivation(&mut rng, &base);
            if check_derivation(&mutant).is_ok() {
                let subject = mutant.subject_term().expect("term judgment");
                assert!(
                    !is_clash(subject).is_clash,
                    "checker accepted a clash: {subject}"
                );
            }
        }
    }

    #[test]
    fn node_addressing_visits_every_node() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let inst = gen_subst_instance(&mut rng);
        let mut d = inst.phi_t.clone();
        let n = node_count(&d);
        for i in 0..n {
            assert!(node_at_mut(&mut d, i).is_some());
        }
        assert!(node_at_mut(&mut d, n).is_none());
    }

    #[test]
    fn source_terms_are_closed_and_step_safely() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mut stepped = 0;
        for _ in 0..200 {
            let n = gen_cbn_term(&mut rng, 4);
            let v = gen_cbv_term(&mut rng, 4);
            let b = gen_bang_term(&mut rng, 4);
            assert!(n.free_vars().is_empty(), "open cbn term {n}");
            assert!(v.free_vars().is_empty(), "open cbv term {v}");
            assert!(b.free_vars().is_empty(), "open bang term {b}");
            assert!(crate::encodings::embed_cbn(&n).is_closed());
            if crate::encodings::cbn_step(&n).is_some() {
                stepped += 1;
            }
            crate::encodings::cbv_successors(&v);
            crate::encodings::bang_step(&b);
        }
        assert!(stepped > 50, "only {stepped} of 200 cbn terms step");
    }
}
