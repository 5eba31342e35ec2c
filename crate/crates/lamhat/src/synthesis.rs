//! Type synthesis by transporting derivations along the deterministic
//! strategy.
//!
//! A closed clash-free normal form is typable directly ([`type_cf_normal_form`]).
//! Each reduction step can then be undone on the derivation side: expanding
//! a derivation of the reduct yields a strictly larger derivation of the
//! redex with the same conclusion ([`expand_step`]), and the converse
//! direction shrinks it ([`transport_step`]). Folding expansion backwards
//! over an evaluation trace types the original term, and the resulting
//! derivation size bounds the number of steps taken ([`synthesize`]).
//!
//! The quantitative heart is [`weighted_substitute`]: grafting a multiset
//! derivation of the argument into the axiom leaves of the body derivation
//! costs exactly the multiset width, `sz = sz(body) + sz(arg) - |M|`.
//! [`anti_substitute`] is its inverse and recovers both halves from a
//! derivation of the substituted term.

use std::collections::{BTreeMap, BTreeSet};

use crate::classify::{closed_nf_shape, is_clash, ClosedNfShape, PreconditionViolated};
use crate::reduction::{apply_at, det_redex, PosStep, RedexPosition, RuleName, Step};
use crate::syntax::{
    all_names, alpha_eq, decompose_list_context, fresh_name, match_core, rename_free, substitute,
    Branch, Pattern, Term,
};
use crate::types::{Derivation, MultisetType, RuleLabel};

/// Result of running [`synthesize`] on a closed term.
#[derive(Debug, Clone)]
pub enum SynthesisOutcome {
    /// The term evaluates to a clash-free normal form. The derivation types
    /// the input in the empty context, `bound` is its size, and `steps` is
    /// the length of the evaluation, so `bound >= steps`.
    Typable {
        derivation: Derivation,
        bound: usize,
        steps: usize,
    },
    /// Evaluation reached a term containing a clash. `witness` is that term
    /// and `position` locates the base clash inside it.
    Untypable {
        witness: Term,
        position: RedexPosition,
    },
    /// Evaluation did not settle within the given fuel.
    Unknown { fuel: usize },
}

/// The term handed to [`synthesize`] has a free variable.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("the term has free variable {0}")]
pub struct OpenTerm(pub String);

/// The argument derivation does not supply the multiset the body demands.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("argument multiset {found} does not match the demand {expected}")]
pub struct MultisetMismatch {
    pub expected: MultisetType,
    pub found: MultisetType,
}

/// The derivation subject is not the image of the requested substitution.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("substitution image {expected} does not alpha-match the subject {found}")]
pub struct SubjectMismatch {
    pub expected: String,
    pub found: String,
}

/// Types a closed clash-free normal form with a size 1 derivation: an
/// abstraction gets `*` by the star rule, a constructor application gets
/// `c([], ..., [])` by typing every argument with the empty multiset.
pub fn type_cf_normal_form(t: &Term) -> Result<Derivation, PreconditionViolated> {
    match closed_nf_shape(t)? {
        ClosedNfShape::Abstraction => Ok(Derivation::absb(t)),
        ClosedNfShape::Data(tag) => {
            let Term::Data(_, args) = t else {
                unreachable!("data shape came from a data term")
            };
            let children = args.iter().map(|a| Derivation::many(a, vec![])).collect();
            Ok(Derivation::constant(tag, children))
        }
    }
}

/// Renames every binder in the derivation to a brand-new name. Subjects,
/// contexts, and pattern premises stay consistent, and the size does not
/// change. Afterwards no binder clashes with anything in `avoid`, so
/// grafting terms whose names are in `avoid` can never capture.
fn fresh_walk(
    d: &Derivation,
    map: &BTreeMap<String, String>,
    avoid: &mut BTreeSet<String>,
) -> Derivation {
    let subject = || d.subject_term().expect("term judgment");
    match d.rule {
        RuleLabel::Ax => {
            let Term::Var(x) = subject() else {
                unreachable!("ax subject is a variable")
            };
            let name = map.get(x).unwrap_or(x).clone();
            Derivation::ax(
                name,
                d.term_type().expect("ax concludes a term type").clone(),
            )
        }
        RuleLabel::AbsStar => Derivation::absb(&rename_free(subject(), map)),
        RuleLabel::Many => {
            let children = d
                .children
                .iter()
                .map(|c| fresh_walk(c, map, avoid))
                .collect();
            Derivation::many(&rename_free(subject(), map), children)
        }
        RuleLabel::App => {
            let fun = fresh_walk(&d.children[0], map, avoid);
            let arg = fresh_walk(&d.children[1], map, avoid);
            Derivation::app(fun, arg)
        }
        RuleLabel::Const => {
            let Term::Data(tag, _) = subject() else {
                unreachable!("const subject is data")
            };
            let tag = tag.clone();
            let children = d
                .children
                .iter()
                .map(|c| fresh_walk(c, map, avoid))
                .collect();
            Derivation::constant(tag, children)
        }
        RuleLabel::Abs => {
            let Term::Abs(p, _) = subject() else {
                unreachable!("abs subject")
            };
            let (p2, map2) = fresh_pattern(p, map, avoid);
            let body = fresh_walk(&d.children[0], &map2, avoid);
            rebuild_abs(&p2, body, d.children.len())
        }
        RuleLabel::Match => {
            let Term::Match(_, p, _) = subject() else {
                unreachable!("match subject")
            };
            let (p2, map2) = fresh_pattern(p, map, avoid);
            let body = fresh_walk(&d.children[0], &map2, avoid);
            let arg = fresh_walk(&d.children[2], map, avoid);
            Derivation::match_closure(body, &p2, arg)
        }
        RuleLabel::Case => {
            let k = d.selected_branch.expect("case selects a branch");
            let Term::Case(_, branches) = subject() else {
                unreachable!("case subject")
            };
            let (p2, map2) = fresh_pattern(&branches[k].pattern, map, avoid);
            let scrut = fresh_walk(&d.children[0], map, avoid);
            let body = fresh_walk(&d.children[2], &map2, avoid);
            let Term::Case(_, renamed) = rename_free(subject(), map) else {
                unreachable!()
            };
            let mut branches2 = renamed;
            branches2[k] = Branch {
                pattern: p2,
                body: body
                    .subject_term()
                    .expect("case body is a term judgment")
                    .clone(),
            };
            let term = Term::Case(
                Box::new(
                    scrut
                        .subject_term()
                        .expect("scrutinee is a term judgment")
                        .clone(),
                ),
                branches2,
            );
            Derivation::case(&term, k, scrut, body)
        }
        RuleLabel::PatVar | RuleLabel::PatData => {
            unreachable!("pattern premises are rebuilt by their parent")
        }
    }
}

/// Picks fresh names for every variable of `p` and extends the renaming.
fn fresh_pattern(
    p: &Pattern,
    map: &BTreeMap<String, String>,
    avoid: &mut BTreeSet<String>,
) -> (Pattern, BTreeMap<String, String>) {
    let mut map2 = map.clone();
    let mut pmap = BTreeMap::new();
    for v in p.vars_ordered() {
        let f = fresh_name(&v, avoid);
        avoid.insert(f.clone());
        map2.insert(v.clone(), f.clone());
        pmap.insert(v, f);
    }
    (p.rename(&pmap), map2)
}

/// Rebuilds an `abs` node over a new body, keeping the pattern premise
/// only when the original node carried one.
fn rebuild_abs(p: &Pattern, body: Derivation, n_children: usize) -> Derivation {
    let mut d = Derivation::abs(p, body);
    if n_children == 1 {
        d.children.truncate(1);
    }
    d
}

/// Rewrites a derivation so that its subject tree is exactly `target`,
/// which must be alpha-equivalent to the current subject. Axiom leaves take
/// the target's variable names and every conclusion is recomputed bottom-up,
/// so contexts follow the renaming while types and sizes are unchanged.
fn align(d: &Derivation, target: &Term) -> Derivation {
    match d.rule {
        RuleLabel::Ax => {
            let Term::Var(y) = target else {
                unreachable!("ax aligns to a variable")
            };
            Derivation::ax(y.clone(), d.term_type().expect("ax type").clone())
        }
        RuleLabel::AbsStar => Derivation::absb(target),
        RuleLabel::Many => {
            let children = d.children.iter().map(|c| align(c, target)).collect();
            Derivation::many(target, children)
        }
        RuleLabel::App => {
            let Term::App(f, u) = target else {
                unreachable!("app aligns to an application")
            };
            Derivation::app(align(&d.children[0], f), align(&d.children[1], u))
        }
        RuleLabel::Const => {
            let Term::Data(tag, args) = target else {
                unreachable!("const aligns to data")
            };
            let children = d
                .children
                .iter()
                .zip(args)
                .map(|(c, a)| align(c, a))
                .collect();
            Derivation::constant(tag.clone(), children)
        }
        RuleLabel::Abs => {
            let Term::Abs(p, b) = target else {
                unreachable!("abs aligns to an abstraction")
            };
            rebuild_abs(p, align(&d.children[0], b), d.children.len())
        }
        RuleLabel::Match => {
            let Term::Match(b, p, a) = target else {
                unreachable!("match aligns to a closure")
            };
            let body = align(&d.children[0], b);
            let arg = align(&d.children[2], a);
            Derivation::match_closure(body, p, arg)
        }
        RuleLabel::Case => {
            let k = d.selected_branch.expect("case selects a branch");
            let Term::Case(s, branches) = target else {
                unreachable!("case aligns to a case")
            };
            let scrut = align(&d.children[0], s);
            let body = align(&d.children[2], &branches[k].body);
            Derivation::case(target, k, scrut, body)
        }
        RuleLabel::PatVar | RuleLabel::PatData => {
            unreachable!("pattern premises are rebuilt by their parent")
        }
    }
}

/// Substitutes a multiset derivation of `u` for the variable `x` inside a
/// derivation of `t`. Every axiom leaf for `x` is replaced by one premise of
/// `phi_u` with the same type, so the result concludes
/// `(G without x) + D |- t{x/u} : s` and its size is exactly
/// `sz(phi_t) + sz(phi_u) - |M|`.
pub fn weighted_substitute(
    phi_t: &Derivation,
    x: &str,
    phi_u: &Derivation,
) -> Result<Derivation, MultisetMismatch> {
    let demand = phi_t.conclusion.context.get(x);
    let supply = phi_u
        .multi_type()
        .expect("argument derivation concludes a multiset")
        .clone();
    if demand != supply {
        return Err(MultisetMismatch {
            expected: demand,
            found: supply,
        });
    }
    let t = phi_t
        .subject_term()
        .expect("body derivation subject")
        .clone();
    let u = phi_u
        .subject_term()
        .expect("argument derivation subject")
        .clone();
    let mut avoid = all_names(&t);
    avoid.extend(all_names(&u));
    avoid.insert(x.to_string());
    let freshened = fresh_walk(phi_t, &BTreeMap::new(), &mut avoid);
    let mut pool: Vec<Option<Derivation>> = phi_u.children.iter().cloned().map(Some).collect();
    let out = wsub_walk(&freshened, x, &u, &mut pool)?;
    if let Some(stray) = pool.iter().flatten().next() {
        return Err(MultisetMismatch {
            expected: demand,
            found: MultisetType::singleton(
                stray
                    .term_type()
                    .expect("many premise concludes a term type")
                    .clone(),
            ),
        });
    }
    Ok(align(&out, &substitute(&t, x, &u)))
}

fn wsub_walk(
    d: &Derivation,
    x: &str,
    u: &Term,
    pool: &mut Vec<Option<Derivation>>,
) -> Result<Derivation, MultisetMismatch> {
    let subject = || d.subject_term().expect("term judgment");
    match d.rule {
        RuleLabel::Ax => {
            let Term::Var(y) = subject() else {
                unreachable!("ax subject is a variable")
            };
            if y != x {
                return Ok(d.clone());
            }
            let sigma = d.term_type().expect("ax concludes a term type");
            let idx = pool
                .iter()
                .position(|e| e.as_ref().is_some_and(|c| c.term_type() == Some(sigma)))
                .ok_or_else(|| MultisetMismatch {
                    expected: MultisetType::singleton(sigma.clone()),
                    found: MultisetType::new(
                        pool.iter()
                            .flatten()
                            .filter_map(|c| c.term_type().cloned())
                            .collect(),
                    ),
                })?;
            Ok(pool[idx].take().expect("position points at a live premise"))
        }
        RuleLabel::AbsStar => Ok(Derivation::absb(&substitute(subject(), x, u))),
        RuleLabel::Many => {
            let t2 = substitute(subject(), x, u);
            let children = d
                .children
                .iter()
                .map(|c| wsub_walk(c, x, u, pool))
                .collect::<Result<_, _>>()?;
            Ok(Derivation::many(&t2, children))
        }
        RuleLabel::App => {
            let fun = wsub_walk(&d.children[0], x, u, pool)?;
            let arg = wsub_walk(&d.children[1], x, u, pool)?;
            Ok(Derivation::app(fun, arg))
        }
        RuleLabel::Const => {
            let Term::Data(tag, _) = subject() else {
                unreachable!("const subject is data")
            };
            let tag = tag.clone();
            let children = d
                .children
                .iter()
                .map(|c| wsub_walk(c, x, u, pool))
                .collect::<Result<_, _>>()?;
            Ok(Derivation::constant(tag, children))
        }
        RuleLabel::Abs => {
            let Term::Abs(p, _) = subject() else {
                unreachable!("abs subject")
            };
            let p = p.clone();
            let body = wsub_walk(&d.children[0], x, u, pool)?;
            Ok(rebuild_abs(&p, body, d.children.len()))
        }
        RuleLabel::Match => {
            let Term::Match(_, p, _) = subject() else {
                unreachable!("match subject")
            };
            let p = p.clone();
            let body = wsub_walk(&d.children[0], x, u, pool)?;
            let arg = wsub_walk(&d.children[2], x, u, pool)?;
            Ok(Derivation::match_closure(body, &p, arg))
        }
        RuleLabel::Case => {
            let k = d.selected_branch.expect("case selects a branch");
            let term = substitute(subject(), x, u);
            let scrut = wsub_walk(&d.children[0], x, u, pool)?;
            let body = wsub_walk(&d.children[2], x, u, pool)?;
            Ok(Derivation::case(&term, k, scrut, body))
        }
        RuleLabel::PatVar | RuleLabel::PatData => {
            unreachable!("pattern premises are rebuilt by their parent")
        }
    }
}

/// Undoes a substitution on the derivation side. Given a derivation of
/// `t{x/u}` together with `t`, `x`, and `u`, splits it into a derivation of
/// `t` using `x` with multiset `M` and a multiset derivation of `u : M`,
/// with `sz(phi) = sz(phi_t) + sz(phi_u) - |M|`. The premises of `phi_u`
/// appear in the order the traversal of `t` discovers the occurrences of
/// `x`.
pub fn anti_substitute(
    phi: &Derivation,
    t: &Term,
    x: &str,
    u: &Term,
) -> Result<(Derivation, Derivation, MultisetType), SubjectMismatch> {
    let subject = phi.subject_term().expect("term judgment").clone();
    let want = substitute(t, x, u);
    if !alpha_eq(&subject, &want) {
        return Err(SubjectMismatch {
            expected: want.to_string(),
            found: subject.to_string(),
        });
    }
    let mut avoid = all_names(t);
    avoid.extend(all_names(u));
    avoid.extend(all_names(&subject));
    avoid.insert(x.to_string());
    let t2 = freshen_term(t, &mut avoid);
    let graft = substitute(&t2, x, u);
    let aligned = align(phi, &graft);
    let (phi_t2, pool) = anti_walk(&aligned, &t2, x);
    let m = MultisetType::new(
        pool.iter()
            .map(|c| {
                c.term_type()
                    .expect("extracted premise concludes a term type")
                    .clone()
            })
            .collect(),
    );
    let phi_u = Derivation::many(u, pool);
    Ok((align(&phi_t2, t), phi_u, m))
}

/// Renames every binder of `t` to a fresh name so that a later substitution
/// is a plain graft.
fn freshen_term(t: &Term, avoid: &mut BTreeSet<String>) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::App(f, a) => Term::app(freshen_term(f, avoid), freshen_term(a, avoid)),
        Term::Data(tag, args) => Term::Data(
            tag.clone(),
            args.iter().map(|a| freshen_term(a, avoid)).collect(),
        ),
        Term::Abs(p, b) => {
            let (p2, b2) = freshen_binder(p, b, avoid);
            Term::abs(p2, freshen_term(&b2, avoid))
        }
        Term::Match(b, p, a) => {
            let a2 = freshen_term(a, avoid);
            let (p2, b2) = freshen_binder(p, b, avoid);
            Term::Match(Box::new(freshen_term(&b2, avoid)), p2, Box::new(a2))
        }
        Term::Case(s, branches) => Term::Case(
            Box::new(freshen_term(s, avoid)),
            branches
                .iter()
                .map(|br| {
                    let (p2, b2) = freshen_binder(&br.pattern, &br.body, avoid);
                    Branch {
                        pattern: p2,
                        body: freshen_term(&b2, avoid),
                    }
                })
                .collect(),
        ),
    }
}

fn freshen_binder(p: &Pattern, b: &Term, avoid: &mut BTreeSet<String>) -> (Pattern, Term) {
    let mut map = BTreeMap::new();
    for v in p.vars_ordered() {
        let f = fresh_name(&v, avoid);
        avoid.insert(f.clone());
        map.insert(v, f);
    }
    (p.rename(&map), rename_free(b, &map))
}

/// Walks a derivation whose subject is the graft of `u` into `t` at `x`,
/// guided by `t`. Returns the derivation of `t` and the extracted premises
/// of `u`. `t` must have globally fresh binders.
fn anti_walk(d: &Derivation, t: &Term, x: &str) -> (Derivation, Vec<Derivation>) {
    if let Term::Var(y) = t {
        if y == x {
            if d.rule == RuleLabel::Many {
                let mut axes = Vec::with_capacity(d.children.len());
                let mut pool = Vec::with_capacity(d.children.len());
                for c in &d.children {
                    axes.push(Derivation::ax(
                        x,
                        c.term_type()
                            .expect("many premise concludes a term type")
                            .clone(),
                    ));
                    pool.push(c.clone());
                }
                return (Derivation::many(&Term::var(x), axes), pool);
            }
            let sigma = d
                .term_type()
                .expect("occurrence concludes a term type")
                .clone();
            return (Derivation::ax(x, sigma), vec![d.clone()]);
        }
        return (d.clone(), vec![]);
    }
    match d.rule {
        RuleLabel::Many => {
            let mut pool = Vec::new();
            let mut children = Vec::with_capacity(d.children.len());
            for c in &d.children {
                let (cd, cp) = anti_walk(c, t, x);
                children.push(cd);
                pool.extend(cp);
            }
            (Derivation::many(t, children), pool)
        }
        RuleLabel::AbsStar => (Derivation::absb(t), vec![]),
        RuleLabel::Abs => {
            let Term::Abs(p, b) = t else {
                unreachable!("abs derives an abstraction")
            };
            let (body, pool) = anti_walk(&d.children[0], b, x);
            (rebuild_abs(p, body, d.children.len()), pool)
        }
        RuleLabel::App => {
            let Term::App(f, a) = t else {
                unreachable!("app derives an application")
            };
            let (fun, mut pool) = anti_walk(&d.children[0], f, x);
            let (arg, pa) = anti_walk(&d.children[1], a, x);
            pool.extend(pa);
            (Derivation::app(fun, arg), pool)
        }
        RuleLabel::Const => {
            let Term::Data(tag, args) = t else {
                unreachable!("const derives data")
            };
            let mut pool = Vec::new();
            let mut children = Vec::with_capacity(args.len());
            for (c, a) in d.children.iter().zip(args) {
                let (cd, cp) = anti_walk(c, a, x);
                children.push(cd);
                pool.extend(cp);
            }
            (Derivation::constant(tag.clone(), children), pool)
        }
        RuleLabel::Match => {
            let Term::Match(b, p, a) = t else {
                unreachable!("match derives a closure")
            };
            let (body, mut pool) = anti_walk(&d.children[0], b, x);
            let (arg, pa) = anti_walk(&d.children[2], a, x);
            pool.extend(pa);
            (Derivation::match_closure(body, p, arg), pool)
        }
        RuleLabel::Case => {
            let k = d.selected_branch.expect("case selects a branch");
            let Term::Case(s, branches) = t else {
                unreachable!("case derives a case")
            };
            let (scrut, mut pool) = anti_walk(&d.children[0], s, x);
            let (body, pb) = anti_walk(&d.children[2], &branches[k].body, x);
            pool.extend(pb);
            (Derivation::case(t, k, scrut, body), pool)
        }
        RuleLabel::Ax | RuleLabel::PatVar | RuleLabel::PatData => {
            unreachable!("no other rule derives a composite subject")
        }
    }
}

/// Transports a derivation across one reduction step. The result derives
/// `step.after` with the same context and type, and its size strictly
/// decreases: by at least 1 for `dB`, by 2 for `m`, by 3 for `c`, and by
/// `1 + |M|` for `e`.
pub fn transport_step(phi: &Derivation, step: &Step) -> Derivation {
    let aligned = align(phi, &step.before);
    let out = transport_at(&aligned, &step.position.0, step.rule);
    align(&out, &step.after)
}

fn transport_at(phi: &Derivation, pos: &[PosStep], rule: RuleName) -> Derivation {
    let Some((seg, rest)) = pos.split_first() else {
        return transport_base(phi, rule);
    };
    match seg {
        PosStep::AppFun => {
            let fun = transport_at(&phi.children[0], rest, rule);
            Derivation::app(fun, phi.children[1].clone())
        }
        PosStep::MatchBody => {
            let Some(Term::Match(_, p, _)) = phi.subject_term() else {
                unreachable!("match position in a match derivation")
            };
            let p = p.clone();
            let body = transport_at(&phi.children[0], rest, rule);
            Derivation::match_closure(body, &p, phi.children[2].clone())
        }
        PosStep::MatchArg => {
            let Some(Term::Match(_, p, _)) = phi.subject_term() else {
                unreachable!("match position in a match derivation")
            };
            let p = p.clone();
            let inner = transport_at(&phi.children[2].children[0], rest, rule);
            let subj = inner
                .subject_term()
                .expect("argument is a term judgment")
                .clone();
            let arg = Derivation::many(&subj, vec![inner]);
            Derivation::match_closure(phi.children[0].clone(), &p, arg)
        }
        PosStep::CaseScrut => {
            let k = phi.selected_branch.expect("case selects a branch");
            let Some(Term::Case(_, branches)) = phi.subject_term() else {
                unreachable!("case position in a case derivation")
            };
            let branches = branches.clone();
            let inner = transport_at(&phi.children[0].children[0], rest, rule);
            let subj = inner
                .subject_term()
                .expect("scrutinee is a term judgment")
                .clone();
            let scrut = Derivation::many(&subj, vec![inner]);
            let term = Term::Case(Box::new(subj), branches);
            Derivation::case(&term, k, scrut, phi.children[2].clone())
        }
    }
}

fn transport_base(phi: &Derivation, rule: RuleName) -> Derivation {
    match rule {
        RuleName::DB => db_transport(phi),
        RuleName::M => m_transport(phi),
        RuleName::C => c_transport(phi),
        RuleName::E => e_transport(phi),
    }
}

/// `L<\p.t> u` becomes `L<t[p/u]>`: the application node and the
/// abstraction node disappear, a match node takes their place outside the
/// frames, and the argument premise moves under it unchanged.
fn db_transport(phi: &Derivation) -> Derivation {
    assert_eq!(phi.rule, RuleLabel::App, "dB fires at an application");
    let arg = phi.children[1].clone();
    let mut avoid = all_names(phi.subject_term().expect("application subject"));
    let fun = fresh_walk(&phi.children[0], &BTreeMap::new(), &mut avoid);
    let (frames, core) = peel_match_chain(&fun);
    assert_eq!(
        core.rule,
        RuleLabel::Abs,
        "a typed application head is an abstraction"
    );
    let Some(Term::Abs(p, _)) = core.subject_term() else {
        unreachable!("abs subject")
    };
    let p = p.clone();
    let body = core.children[0].clone();
    wrap_frames(frames, Derivation::match_closure(body, &p, arg))
}

/// `t[c(ps)/L<c(us)>]` becomes `L<t[p1/u1]...[pn/un]>`: the constructor node
/// and the pattern premise wrapper disappear and each argument premise
/// feeds one new match node.
fn m_transport(phi: &Derivation) -> Derivation {
    assert_eq!(phi.rule, RuleLabel::Match, "m fires at a matching closure");
    let mut avoid = all_names(phi.subject_term().expect("match subject"));
    let f = fresh_walk(phi, &BTreeMap::new(), &mut avoid);
    let Some(Term::Match(_, Pattern::Data(_, ps), _)) = f.subject_term() else {
        unreachable!("m fires on a data pattern")
    };
    let ps = ps.clone();
    let body = f.children[0].clone();
    let (frames, core) = peel_match_chain(&f.children[2].children[0]);
    assert_eq!(
        core.rule,
        RuleLabel::Const,
        "a typed data argument ends in a constructor"
    );
    let folded = ps.iter().zip(&core.children).fold(body, |acc, (p, arg)| {
        Derivation::match_closure(acc, p, arg.clone())
    });
    wrap_frames(frames, folded)
}

/// `case L<c(us)> of ...` becomes `L<tk[p1/u1]...[pn/un]>`: the case node,
/// the constructor node, and the pattern premise wrapper disappear.
fn c_transport(phi: &Derivation) -> Derivation {
    assert_eq!(phi.rule, RuleLabel::Case, "c fires at a case expression");
    let mut avoid = all_names(phi.subject_term().expect("case subject"));
    let f = fresh_walk(phi, &BTreeMap::new(), &mut avoid);
    let k = f.selected_branch.expect("case selects a branch");
    let Some(Term::Case(_, branches)) = f.subject_term() else {
        unreachable!("case subject")
    };
    let Pattern::Data(_, ps) = branches[k].pattern.clone() else {
        unreachable!("branch patterns are data patterns")
    };
    let body = f.children[2].clone();
    let (frames, core) = peel_match_chain(&f.children[0].children[0]);
    assert_eq!(
        core.rule,
        RuleLabel::Const,
        "a typed scrutinee ends in a constructor"
    );
    let folded = ps.iter().zip(&core.children).fold(body, |acc, (p, arg)| {
        Derivation::match_closure(acc, p, arg.clone())
    });
    wrap_frames(frames, folded)
}

/// `t[x/u]` becomes `t{x/u}` by the weighted substitution.
fn e_transport(phi: &Derivation) -> Derivation {
    assert_eq!(phi.rule, RuleLabel::Match, "e fires at a matching closure");
    let Some(Term::Match(_, Pattern::Var(x), _)) = phi.subject_term() else {
        unreachable!("e fires on a variable pattern")
    };
    let x = x.clone();
    weighted_substitute(&phi.children[0], &x, &phi.children[2])
        .expect("a checked match agrees on the multiset")
}

/// Strips the leading match nodes, returning the frame patterns with their
/// argument premises, outermost first, and the node underneath.
fn peel_match_chain(d: &Derivation) -> (Vec<(Pattern, Derivation)>, Derivation) {
    let mut frames = Vec::new();
    let mut cur = d;
    while cur.rule == RuleLabel::Match {
        let Some(Term::Match(_, p, _)) = cur.subject_term() else {
            unreachable!("match subject")
        };
        frames.push((p.clone(), cur.children[2].clone()));
        cur = &cur.children[0];
    }
    (frames, cur.clone())
}

/// Strips exactly `k` leading match nodes.
fn peel_n_frames(d: &Derivation, k: usize) -> (Vec<(Pattern, Derivation)>, Derivation) {
    let mut frames = Vec::with_capacity(k);
    let mut cur = d;
    for _ in 0..k {
        assert_eq!(cur.rule, RuleLabel::Match, "frame in a list context");
        let Some(Term::Match(_, p, _)) = cur.subject_term() else {
            unreachable!("match subject")
        };
        frames.push((p.clone(), cur.children[2].clone()));
        cur = &cur.children[0];
    }
    (frames, cur.clone())
}

fn wrap_frames(frames: Vec<(Pattern, Derivation)>, core: Derivation) -> Derivation {
    frames.into_iter().rev().fold(core, |acc, (p, arg)| {
        Derivation::match_closure(acc, &p, arg)
    })
}

/// Expands a derivation of `step.after` into a derivation of `step.before`
/// with the same context and type. Inverse of [`transport_step`]: the size
/// strictly increases, by 2 for `dB` and `m`, by 3 for `c`, and by
/// `1 + |M|` for `e`.
pub fn expand_step(phi: &Derivation, step: &Step) -> Derivation {
    let aligned = align(phi, &step.after);
    let out = expand_at(&aligned, &step.position.0, step.rule, &step.before);
    align(&out, &step.before)
}

fn expand_at(phi: &Derivation, pos: &[PosStep], rule: RuleName, before: &Term) -> Derivation {
    let Some((seg, rest)) = pos.split_first() else {
        return expand_base(phi, rule, before);
    };
    match (seg, before) {
        (PosStep::AppFun, Term::App(bf, _)) => {
            let fun = expand_at(&phi.children[0], rest, rule, bf);
            Derivation::app(fun, phi.children[1].clone())
        }
        (PosStep::MatchBody, Term::Match(bb, _, _)) => {
            let Some(Term::Match(_, p, _)) = phi.subject_term() else {
                unreachable!("match position in a match derivation")
            };
            let p = p.clone();
            let body = expand_at(&phi.children[0], rest, rule, bb);
            Derivation::match_closure(body, &p, phi.children[2].clone())
        }
        (PosStep::MatchArg, Term::Match(_, _, ba)) => {
            let Some(Term::Match(_, p, _)) = phi.subject_term() else {
                unreachable!("match position in a match derivation")
            };
            let p = p.clone();
            let inner = expand_at(&phi.children[2].children[0], rest, rule, ba);
            let subj = inner
                .subject_term()
                .expect("argument is a term judgment")
                .clone();
            let arg = Derivation::many(&subj, vec![inner]);
            Derivation::match_closure(phi.children[0].clone(), &p, arg)
        }
        (PosStep::CaseScrut, Term::Case(bs, _)) => {
            let k = phi.selected_branch.expect("case selects a branch");
            let Some(Term::Case(_, branches)) = phi.subject_term() else {
                unreachable!("case position in a case derivation")
            };
            let branches = branches.clone();
            let inner = expand_at(&phi.children[0].children[0], rest, rule, bs);
            let subj = inner
                .subject_term()
                .expect("scrutinee is a term judgment")
                .clone();
            let scrut = Derivation::many(&subj, vec![inner]);
            let term = Term::Case(Box::new(subj), branches);
            Derivation::case(&term, k, scrut, phi.children[2].clone())
        }
        _ => unreachable!("step position fits the term it was recorded on"),
    }
}

fn expand_base(phi: &Derivation, rule: RuleName, before: &Term) -> Derivation {
    match rule {
        RuleName::DB => db_expand(phi, before),
        RuleName::M => m_expand(phi, before),
        RuleName::C => c_expand(phi, before),
        RuleName::E => e_expand(phi, before),
    }
}

fn db_expand(phi: &Derivation, before: &Term) -> Derivation {
    let Term::App(fun_b, _) = before else {
        unreachable!("dB fired at an application")
    };
    let k = decompose_list_context(fun_b).0.frames.len();
    let (frames, core) = peel_n_frames(phi, k);
    assert_eq!(core.rule, RuleLabel::Match, "dB creates a match node");
    let Some(Term::Match(_, p, _)) = core.subject_term() else {
        unreachable!("match subject")
    };
    let p = p.clone();
    let abs = Derivation::abs(&p, core.children[0].clone());
    Derivation::app(wrap_frames(frames, abs), core.children[2].clone())
}

fn m_expand(phi: &Derivation, before: &Term) -> Derivation {
    let Term::Match(_, Pattern::Data(tag, ps), arg_b) = before else {
        unreachable!("m fired on a data pattern")
    };
    let k = decompose_list_context(arg_b).0.frames.len();
    let (frames, chain) = peel_n_frames(phi, k);
    let mut cur = chain;
    let mut collected = Vec::with_capacity(ps.len());
    for _ in 0..ps.len() {
        assert_eq!(
            cur.rule,
            RuleLabel::Match,
            "m creates one match per pattern argument"
        );
        let Some(Term::Match(_, p, _)) = cur.subject_term() else {
            unreachable!()
        };
        collected.push((p.clone(), cur.children[2].clone()));
        cur = cur.children[0].clone();
    }
    collected.reverse();
    let (pats, manies): (Vec<Pattern>, Vec<Derivation>) = collected.into_iter().unzip();
    let const_d = Derivation::constant(tag.clone(), manies);
    let inner = wrap_frames(frames, const_d);
    let subj = inner
        .subject_term()
        .expect("argument is a term judgment")
        .clone();
    let arg = Derivation::many(&subj, vec![inner]);
    Derivation::match_closure(cur, &Pattern::data(tag.clone(), pats), arg)
}

fn c_expand(phi: &Derivation, before: &Term) -> Derivation {
    let Term::Case(scrut_b, branches_b) = before else {
        unreachable!("c fired at a case")
    };
    let Term::Data(tag, _) = match_core(scrut_b) else {
        unreachable!("c fires on a constructor scrutinee")
    };
    let kb = branches_b
        .iter()
        .position(|br| matches!(&br.pattern, Pattern::Data(t2, _) if t2 == tag))
        .expect("some branch matched the fired constructor");
    let Pattern::Data(_, ps) = &branches_b[kb].pattern else {
        unreachable!()
    };
    let k = decompose_list_context(scrut_b).0.frames.len();
    let (frames, chain) = peel_n_frames(phi, k);
    let mut cur = chain;
    let mut collected = Vec::with_capacity(ps.len());
    for _ in 0..ps.len() {
        assert_eq!(
            cur.rule,
            RuleLabel::Match,
            "c creates one match per pattern argument"
        );
        let Some(Term::Match(_, p, _)) = cur.subject_term() else {
            unreachable!()
        };
        collected.push((p.clone(), cur.children[2].clone()));
        cur = cur.children[0].clone();
    }
    collected.reverse();
    let (pats, manies): (Vec<Pattern>, Vec<Derivation>) = collected.into_iter().unzip();
    let const_d = Derivation::constant(tag.clone(), manies);
    let inner = wrap_frames(frames, const_d);
    let subj = inner
        .subject_term()
        .expect("scrutinee is a term judgment")
        .clone();
    let scrut = Derivation::many(&subj, vec![inner]);
    let mut branches2 = branches_b.clone();
    branches2[kb] = Branch {
        pattern: Pattern::data(tag.clone(), pats),
        body: cur
            .subject_term()
            .expect("branch body is a term judgment")
            .clone(),
    };
    let term = Term::Case(Box::new(subj), branches2);
    Derivation::case(&term, kb, scrut, cur)
}

fn e_expand(phi: &Derivation, before: &Term) -> Derivation {
    let Term::Match(t_b, Pattern::Var(x), u_b) = before else {
        unreachable!("e fired on a variable pattern")
    };
    let (phi_t, phi_u, _m) =
        anti_substitute(phi, t_b, x, u_b).expect("the e step produced this substitution image");
    Derivation::match_closure(phi_t, &Pattern::var(x.clone()), phi_u)
}

/// Decides typability of a closed term by evaluating it. A clash anywhere
/// along the deterministic trace settles the question negatively. A
/// clash-free normal form is typed directly and the derivation is expanded
/// backwards across the trace, so the returned bound dominates the step
/// count. Fuel exhaustion yields [`SynthesisOutcome::Unknown`].
pub fn synthesize(t: &Term, fuel: usize) -> Result<SynthesisOutcome, OpenTerm> {
    if let Some(x) = t.free_vars().into_iter().next() {
        return Err(OpenTerm(x));
    }
    let mut steps: Vec<Step> = Vec::new();
    let mut cur = t.clone();
    loop {
        let report = is_clash(&cur);
        if report.is_clash {
            let w = report.witness.expect("a clash report carries its witness");
            return Ok(SynthesisOutcome::Untypable {
                witness: cur,
                position: w.position,
            });
        }
        let Some((pos, rule)) = det_redex(&cur) else {
            let mut phi =
                type_cf_normal_form(&cur).expect("a closed clash-free normal form is typable");
            for step in steps.iter().rev() {
                phi = expand_step(&phi, step);
            }
            let bound = phi.size();
            return Ok(SynthesisOutcome::Typable {
                derivation: phi,
                bound,
                steps: steps.len(),
            });
        };
        if steps.len() == fuel {
            return Ok(SynthesisOutcome::Unknown { fuel });
        }
        let after = apply_at(&cur, &pos, rule).expect("the deterministic redex applies");
        steps.push(Step {
            rule,
            position: pos,
            before: cur.clone(),
            after: after.clone(),
        });
        cur = after;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;
    use crate::reduction::{evaluate, EvalOutcome};
    use crate::syntax::Tag;
    use crate::types::{check_derivation, relevance_check, TermType};

    fn lt(src: &str) -> Term {
        parse_term(src).expect("test term parses").0
    }

    fn c0ty() -> TermType {
        TermType::data(Tag::new("C0", 0), vec![])
    }

    fn t0() -> Term {
        crate::fixtures::running_example()
    }

    fn sigma() -> Derivation {
        crate::fixtures::sigma()
    }

    fn trace_of(t: &Term) -> crate::reduction::Trace {
        match evaluate(t, 1_000) {
            EvalOutcome::Normal { trace, .. } => trace,
            EvalOutcome::OutOfFuel { .. } => panic!("test term normalizes"),
        }
    }

    #[test]
    fn types_normal_abstractions_and_data() {
        let abs = type_cf_normal_form(&lt("\\x.x")).expect("identity is typable");
        assert_eq!(abs.size(), 1);
        check_derivation(&abs).expect("star derivation checks");

        let data = type_cf_normal_form(&lt("Triple(C0,C1,C2)")).expect("data is typable");
        assert_eq!(data.size(), 1);
        assert_eq!(
            data.term_type().map(ToString::to_string),
            Some("Triple([],[],[])".into())
        );
        check_derivation(&data).expect("data derivation checks");
    }

    #[test]
    fn rejects_bad_normal_form_inputs() {
        assert!(matches!(
            type_cf_normal_form(&Term::var("x")),
            Err(PreconditionViolated::Open(_))
        ));
        assert!(matches!(
            type_cf_normal_form(&lt("I I")),
            Err(PreconditionViolated::Reducible)
        ));
        assert!(matches!(
            type_cf_normal_form(&lt("Pair(I,I) I")),
            Err(PreconditionViolated::Clash)
        ));
    }

    #[test]
    fn weighted_substitution_replaces_axioms() {
        let phi_t = Derivation::ax("x", c0ty());
        let phi_u = Derivation::many(
            &lt("C0"),
            vec![Derivation::constant(Tag::new("C0", 0), vec![])],
        );
        let out = weighted_substitute(&phi_t, "x", &phi_u).expect("multisets agree");
        assert_eq!(out.subject_term(), Some(&lt("C0")));
        assert_eq!(out.size(), phi_t.size() + phi_u.size() - 1);
        check_derivation(&out).expect("result checks");
    }

    #[test]
    fn weighted_substitution_ignores_absent_variables() {
        let phi_t = Derivation::ax("y", c0ty());
        let phi_u = Derivation::many(&lt("C0"), vec![]);
        let out = weighted_substitute(&phi_t, "x", &phi_u).expect("empty demand");
        assert_eq!(out, phi_t);
    }

    #[test]
    fn weighted_substitution_checks_the_multiset() {
        let phi_t = Derivation::ax("x", c0ty());
        let phi_u = Derivation::many(&lt("C0"), vec![]);
        let err = weighted_substitute(&phi_t, "x", &phi_u).expect_err("demand is [C0]");
        assert_eq!(err.expected, MultisetType::singleton(c0ty()));
        assert!(err.found.is_empty());
    }

    #[test]
    fn weighted_substitution_splits_a_doubled_variable() {
        let x1 = Derivation::many(&Term::var("x"), vec![Derivation::ax("x", c0ty())]);
        let x2 = Derivation::many(&Term::var("x"), vec![Derivation::ax("x", c0ty())]);
        let phi_t = Derivation::constant(Tag::new("Pair", 2), vec![x1, x2]);
        let c0 = || Derivation::constant(Tag::new("C0", 0), vec![]);
        let phi_u = Derivation::many(&lt("C0"), vec![c0(), c0()]);
        let out = weighted_substitute(&phi_t, "x", &phi_u).expect("two copies supplied");
        assert_eq!(out.subject_term(), Some(&lt("Pair(C0,C0)")));
        assert_eq!(out.size(), phi_t.size() + phi_u.size() - 2);
        assert!(out.conclusion.context.is_empty());
        check_derivation(&out).expect("result checks");
    }

    #[test]
    fn weighted_substitution_avoids_capture() {
        let body = Derivation::ax("x", TermType::Star);
        let phi_t = Derivation::abs(&Pattern::var("y"), body);
        let u = lt("\\z.y");
        let phi_u = Derivation::many(&u, vec![Derivation::absb(&u)]);
        let out = weighted_substitute(&phi_t, "x", &phi_u).expect("multisets agree");
        let want = substitute(phi_t.subject_term().unwrap(), "x", &u);
        assert_eq!(out.subject_term(), Some(&want));
        assert_ne!(
            want,
            lt("\\y.\\z.y"),
            "the binder was renamed away from the free y"
        );
        check_derivation(&out).expect("result checks");
    }

    #[test]
    fn anti_substitution_recovers_an_occurrence() {
        let phi = Derivation::constant(Tag::new("C0", 0), vec![]);
        let (phi_t, phi_u, m) =
            anti_substitute(&phi, &Term::var("x"), "x", &lt("C0")).expect("image matches");
        assert_eq!(phi_t, Derivation::ax("x", c0ty()));
        assert_eq!(m, MultisetType::singleton(c0ty()));
        assert_eq!(phi.size(), phi_t.size() + phi_u.size() - m.len());
        check_derivation(&phi_u).expect("argument derivation checks");
    }

    #[test]
    fn anti_substitution_handles_unused_variables() {
        let phi = Derivation::constant(Tag::new("C1", 0), vec![]);
        let (phi_t, phi_u, m) =
            anti_substitute(&phi, &lt("C1"), "x", &lt("C0")).expect("image matches");
        assert_eq!(phi_t, phi);
        assert!(m.is_empty());
        assert_eq!(phi_u, Derivation::many(&lt("C0"), vec![]));
    }

    #[test]
    fn anti_substitution_rejects_a_wrong_image() {
        let phi = Derivation::constant(Tag::new("C1", 0), vec![]);
        let err = anti_substitute(&phi, &Term::var("x"), "x", &lt("C0")).expect_err("C1 is not C0");
        assert_eq!(err.expected, "C0");
        assert_eq!(err.found, "C1");
    }

    #[test]
    fn substitution_round_trip_preserves_size() {
        let c0 = || Derivation::constant(Tag::new("C0", 0), vec![]);
        let pair = Derivation::constant(
            Tag::new("Pair", 2),
            vec![
                Derivation::many(&lt("C0"), vec![c0()]),
                Derivation::many(&lt("C0"), vec![c0()]),
            ],
        );
        let t = lt("Pair(x,x)");
        let (phi_t, phi_u, m) = anti_substitute(&pair, &t, "x", &lt("C0")).expect("image matches");
        assert_eq!(m.len(), 2);
        assert_eq!(phi_t.subject_term(), Some(&t));
        check_derivation(&phi_t).expect("body derivation checks");
        let back = weighted_substitute(&phi_t, "x", &phi_u).expect("round trip");
        assert_eq!(back.subject_term(), pair.subject_term());
        assert_eq!(back.size(), pair.size());
        check_derivation(&back).expect("round trip checks");
    }

    #[test]
    fn transport_shrinks_the_first_step_of_the_running_example() {
        let t = t0();
        let phi = sigma();
        assert_eq!(phi.size(), 11);
        let (pos, rule) = det_redex(&t).expect("t0 has a redex");
        assert_eq!(rule, RuleName::DB);
        let after = apply_at(&t, &pos, rule).expect("redex applies");
        let step = Step {
            rule,
            position: pos,
            before: t.clone(),
            after: after.clone(),
        };
        let out = transport_step(&phi, &step);
        assert_eq!(out.size(), 10);
        assert_eq!(out.rule, RuleLabel::Match);
        assert_eq!(out.subject_term(), Some(&after));
        assert!(out.conclusion.context.is_empty());
        check_derivation(&out).expect("transported derivation checks");
    }

    #[test]
    fn transport_charges_the_multiset_width_for_e() {
        let phi_u = Derivation::many(
            &lt("C0"),
            vec![Derivation::constant(Tag::new("C0", 0), vec![])],
        );
        let phi = Derivation::match_closure(Derivation::ax("x", c0ty()), &Pattern::var("x"), phi_u);
        assert_eq!(phi.size(), 3);
        let t = lt("x[x/C0]");
        let phi = align(&phi, &t);
        let (pos, rule) = det_redex(&t).expect("e redex");
        assert_eq!(rule, RuleName::E);
        let after = apply_at(&t, &pos, rule).expect("redex applies");
        let step = Step {
            rule,
            position: pos,
            before: t,
            after,
        };
        let out = transport_step(&phi, &step);
        assert_eq!(out.size(), 1, "drop is 1 + |M| = 2");
        check_derivation(&out).expect("transported derivation checks");
    }

    #[test]
    fn expansion_rebuilds_the_running_example() {
        let t = t0();
        let trace = trace_of(&t);
        assert_eq!(trace.steps.len(), 6);
        let mut phi = type_cf_normal_form(&lt("C0")).expect("C0 is a clash-free normal form");
        for step in trace.steps.iter().rev() {
            phi = expand_step(&phi, step);
            assert_eq!(phi.subject_term(), Some(&step.before));
            check_derivation(&phi).expect("every expansion checks");
        }
        assert_eq!(phi.subject_term(), Some(&t));
        assert!(phi.conclusion.context.is_empty());
        assert_eq!(phi.term_type(), Some(&c0ty()));
    }

    #[test]
    fn transport_fold_is_strictly_decreasing() {
        let t = t0();
        let trace = trace_of(&t);
        let outcome = synthesize(&t, 100).expect("t0 is closed");
        let SynthesisOutcome::Typable {
            derivation,
            bound,
            steps,
        } = outcome
        else {
            panic!("t0 is typable")
        };
        assert_eq!(steps, 6);
        assert!(bound >= steps);
        let mut phi = derivation;
        let mut sizes = vec![phi.size()];
        for step in &trace.steps {
            phi = transport_step(&phi, step);
            sizes.push(phi.size());
        }
        assert_eq!(sizes.len(), 7);
        assert!(
            sizes.windows(2).all(|w| w[0] > w[1]),
            "sizes {sizes:?} strictly decrease"
        );
        assert_eq!(phi.subject_term(), Some(&lt("C0")));
    }

    #[test]
    fn synthesis_types_the_running_example() {
        let outcome = synthesize(&t0(), 100).expect("t0 is closed");
        let SynthesisOutcome::Typable {
            derivation,
            bound,
            steps,
        } = outcome
        else {
            panic!("t0 is typable")
        };
        assert_eq!(steps, 6);
        assert!(bound >= 6);
        assert_eq!(derivation.subject_term(), Some(&t0()));
        assert!(derivation.conclusion.context.is_empty());
        check_derivation(&derivation).expect("synthesized derivation checks");
        relevance_check(&derivation).expect("synthesized derivation is relevant");
    }

    #[test]
    fn synthesis_walks_nested_positions() {
        let t = lt("((\\x.x) (\\y.y)) C0");
        let outcome = synthesize(&t, 100).expect("closed");
        let SynthesisOutcome::Typable {
            derivation, steps, ..
        } = outcome
        else {
            panic!("the term normalizes to C0")
        };
        assert_eq!(steps, 4);
        assert_eq!(derivation.subject_term(), Some(&t));
        check_derivation(&derivation).expect("derivation checks");
    }

    #[test]
    fn synthesis_distributes_data_matches_under_frames() {
        let t = lt("a[Pair(a,b)/Pair(C0,C1)[w/I]]");
        let outcome = synthesize(&t, 100).expect("closed");
        let SynthesisOutcome::Typable { derivation, .. } = outcome else {
            panic!("the term normalizes to C0")
        };
        assert_eq!(derivation.subject_term(), Some(&t));
        check_derivation(&derivation).expect("derivation checks");
        let trace = trace_of(&t);
        assert!(trace.steps.iter().any(|s| s.rule == RuleName::M));
    }

    #[test]
    fn synthesis_selects_case_branches_under_frames() {
        let t = lt("case Pair(C0,C1)[w/I] of {Pair(x,y)->y}");
        let outcome = synthesize(&t, 100).expect("closed");
        let SynthesisOutcome::Typable { derivation, .. } = outcome else {
            panic!("the term normalizes to C1")
        };
        assert_eq!(derivation.subject_term(), Some(&t));
        check_derivation(&derivation).expect("derivation checks");
        let EvalOutcome::Normal { term, .. } = evaluate(&t, 100) else {
            panic!()
        };
        assert_eq!(term, lt("C1"));
    }

    #[test]
    fn synthesis_reports_clashes() {
        let t = lt("((\\x.Pair(I,I)) I) I");
        let outcome = synthesize(&t, 100).expect("closed");
        let SynthesisOutcome::Untypable { witness, position } = outcome else {
            panic!("a data head applied to an argument clashes")
        };
        assert!(is_clash(&witness).is_clash);
        assert!(position.is_root());
    }

    #[test]
    fn synthesis_runs_out_of_fuel_on_loops() {
        let omega = lt("(\\x.x x) (\\x.x x)");
        let outcome = synthesize(&omega, 50).expect("closed");
        assert!(matches!(outcome, SynthesisOutcome::Unknown { fuel: 50 }));
    }

    #[test]
    fn synthesis_rejects_open_terms() {
        let err = synthesize(&Term::var("x"), 10).expect_err("x is open");
        assert_eq!(err, OpenTerm("x".into()));
    }
}
