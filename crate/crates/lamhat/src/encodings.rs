//! Source calculi, their translations into the pattern calculus, and
//! simulation-certificate checking.
//!
//! Three source calculi are supported:
//!
//! - call-by-name lambda terms, stepping under `N ::= <> | N t`;
//! - call-by-value lambda terms, stepping under `V ::= <> | V t | v V`
//!   (the argument side only under a value), with beta restricted to value
//!   arguments; the relation is nondeterministic;
//! - the bang calculus `t ::= x | \x.t | t u | !t | t[x/u]`, stepping
//!   deterministically under `W ::= <> | W t | W[x/u] | t[x/W]` with rules
//!   `L[\x.t] u -> L[t[x/u]]` and `t[x/L[!u]] -> L[t{x/u}]`.
//!
//! Call-by-name embeds by identity. Call-by-value tags values with `V` and
//! splits an application into two matching closures. The bang calculus tags
//! banged terms with `B`. A simulation certificate for a source step is a
//! nonempty weak head reduction from the translation of its left endpoint
//! to the translation of its right endpoint.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use crate::parse::{ParseError, Parser, TokKind};
use crate::reduction::{apply_at, enumerate_redexes, Step, Trace};
use crate::syntax::{all_names, alpha_canonical, alpha_eq, fresh_name, Pattern, Tag, Term};

fn v_tag() -> Tag {
    Tag::new("V", 1)
}

fn b_tag() -> Tag {
    Tag::new("B", 1)
}

/// Call-by-name lambda terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CbnTerm {
    Var(String),
    Abs(String, Box<CbnTerm>),
    App(Box<CbnTerm>, Box<CbnTerm>),
}

/// Call-by-value lambda terms. Values are variables and abstractions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CbvTerm {
    Var(String),
    Abs(String, Box<CbvTerm>),
    App(Box<CbvTerm>, Box<CbvTerm>),
}

/// Bang calculus terms. `Sub(t, x, u)` is the explicit substitution
/// `t[x/u]`; `x` binds in `t` only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BangTerm {
    Var(String),
    Abs(String, Box<BangTerm>),
    App(Box<BangTerm>, Box<BangTerm>),
    Bang(Box<BangTerm>),
    Sub(Box<BangTerm>, String, Box<BangTerm>),
}

macro_rules! lambda_core {
    ($ty:ident) => {
        impl $ty {
            pub fn var(name: impl Into<String>) -> Self {
                $ty::Var(name.into())
            }

            pub fn abs(name: impl Into<String>, body: Self) -> Self {
                $ty::Abs(name.into(), Box::new(body))
            }

            pub fn app(fun: Self, arg: Self) -> Self {
                $ty::App(Box::new(fun), Box::new(arg))
            }
        }
    };
}

lambda_core!(CbnTerm);
lambda_core!(CbvTerm);
lambda_core!(BangTerm);

impl BangTerm {
    pub fn bang(t: Self) -> Self {
        BangTerm::Bang(Box::new(t))
    }

    pub fn sub(body: Self, name: impl Into<String>, arg: Self) -> Self {
        BangTerm::Sub(Box::new(body), name.into(), Box::new(arg))
    }
}

fn cbn_names(t: &CbnTerm, out: &mut BTreeSet<String>) {
    match t {
        CbnTerm::Var(x) => {
            out.insert(x.clone());
        }
        CbnTerm::Abs(x, b) => {
            out.insert(x.clone());
            cbn_names(b, out);
        }
        CbnTerm::App(f, a) => {
            cbn_names(f, out);
            cbn_names(a, out);
        }
    }
}

fn cbv_names(t: &CbvTerm, out: &mut BTreeSet<String>) {
    match t {
        CbvTerm::Var(x) => {
            out.insert(x.clone());
        }
        CbvTerm::Abs(x, b) => {
            out.insert(x.clone());
            cbv_names(b, out);
        }
        CbvTerm::App(f, a) => {
            cbv_names(f, out);
            cbv_names(a, out);
        }
    }
}

fn bang_names(t: &BangTerm, out: &mut BTreeSet<String>) {
    match t {
        BangTerm::Var(x) => {
            out.insert(x.clone());
        }
        BangTerm::Abs(x, b) => {
            out.insert(x.clone());
            bang_names(b, out);
        }
        BangTerm::App(f, a) => {
            bang_names(f, out);
            bang_names(a, out);
        }
        BangTerm::Bang(b) => bang_names(b, out),
        BangTerm::Sub(b, x, a) => {
            out.insert(x.clone());
            bang_names(b, out);
            bang_names(a, out);
        }
    }
}

macro_rules! lambda_subst {
    ($ty:ident, $names:ident, $fv:ident, $subst:ident) => {
        fn $fv(t: &$ty, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match t {
                $ty::Var(x) => {
                    if !bound.iter().any(|b| b == x) {
                        out.insert(x.clone());
                    }
                }
                $ty::Abs(x, b) => {
                    bound.push(x.clone());
                    $fv(b, bound, out);
                    bound.pop();
                }
                $ty::App(f, a) => {
                    $fv(f, bound, out);
                    $fv(a, bound, out);
                }
            }
        }

        impl $ty {
            pub fn free_vars(&self) -> BTreeSet<String> {
                let mut out = BTreeSet::new();
                $fv(self, &mut Vec::new(), &mut out);
                out
            }
        }

        /// Capture-avoiding substitution, renaming binders lazily.
        pub fn $subst(t: &$ty, x: &str, u: &$ty) -> $ty {
            match t {
                $ty::Var(y) => {
                    if y == x {
                        u.clone()
                    } else {
                        t.clone()
                    }
                }
                $ty::App(f, a) => $ty::app($subst(f, x, u), $subst(a, x, u)),
                $ty::Abs(y, b) => {
                    if y == x || !b.free_vars().contains(x) {
                        return t.clone();
                    }
                    let fv_u = u.free_vars();
                    if fv_u.contains(y.as_str()) {
                        let mut avoid = fv_u;
                        let mut names = BTreeSet::new();
                        $names(b, &mut names);
                        avoid.extend(names);
                        avoid.insert(x.to_string());
                        avoid.insert(y.clone());
                        let fresh = fresh_name(y, &avoid);
                        let renamed = $subst(b, y, &$ty::var(fresh.clone()));
                        $ty::Abs(fresh, Box::new($subst(&renamed, x, u)))
                    } else {
                        $ty::Abs(y.clone(), Box::new($subst(b, x, u)))
                    }
                }
            }
        }
    };
}

lambda_subst!(CbnTerm, cbn_names, cbn_fv, cbn_substitute);
lambda_subst!(CbvTerm, cbv_names, cbv_fv, cbv_substitute);

fn bang_fv(t: &BangTerm, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match t {
        BangTerm::Var(x) => {
            if !bound.iter().any(|b| b == x) {
                out.insert(x.clone());
            }
        }
        BangTerm::Abs(x, b) => {
            bound.push(x.clone());
            bang_fv(b, bound, out);
            bound.pop();
        }
        BangTerm::App(f, a) => {
            bang_fv(f, bound, out);
            bang_fv(a, bound, out);
        }
        BangTerm::Bang(b) => bang_fv(b, bound, out),
        BangTerm::Sub(b, x, a) => {
            bound.push(x.clone());
            bang_fv(b, bound, out);
            bound.pop();
            bang_fv(a, bound, out);
        }
    }
}

impl BangTerm {
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        bang_fv(self, &mut Vec::new(), &mut out);
        out
    }
}

/// Capture-avoiding substitution for bang terms.
pub fn bang_substitute(t: &BangTerm, x: &str, u: &BangTerm) -> BangTerm {
    fn rename_binder(
        binder: &str,
        body: &BangTerm,
        x: &str,
        u: &BangTerm,
    ) -> Option<(String, BangTerm)> {
        if binder == x || !body.free_vars().contains(x) {
            return None;
        }
        let fv_u = u.free_vars();
        if fv_u.contains(binder) {
            let mut avoid = fv_u;
            let mut names = BTreeSet::new();
            bang_names(body, &mut names);
            avoid.extend(names);
            avoid.insert(x.to_string());
            avoid.insert(binder.to_string());
            let fresh = fresh_name(binder, &avoid);
            let renamed = bang_substitute(body, binder, &BangTerm::var(fresh.clone()));
            Some((fresh, bang_substitute(&renamed, x, u)))
        } else {
            Some((binder.to_string(), bang_substitute(body, x, u)))
        }
    }
    match t {
        BangTerm::Var(y) => {
            if y == x {
                u.clone()
            } else {
                t.clone()
            }
        }
        BangTerm::App(f, a) => BangTerm::app(bang_substitute(f, x, u), bang_substitute(a, x, u)),
        BangTerm::Bang(b) => BangTerm::bang(bang_substitute(b, x, u)),
        BangTerm::Abs(y, b) => match rename_binder(y, b, x, u) {
            Some((y2, b2)) => BangTerm::Abs(y2, Box::new(b2)),
            None => t.clone(),
        },
        BangTerm::Sub(b, y, a) => {
            let a2 = bang_substitute(a, x, u);
            match rename_binder(y, b, x, u) {
                Some((y2, b2)) => BangTerm::Sub(Box::new(b2), y2, Box::new(a2)),
                None => BangTerm::Sub(b.clone(), y.clone(), Box::new(a2)),
            }
        }
    }
}

impl CbvTerm {
    pub fn is_value(&self) -> bool {
        matches!(self, CbvTerm::Var(_) | CbvTerm::Abs(_, _))
    }
}

/// One call-by-name step: beta at the head of the leftmost application
/// spine.
pub fn cbn_step(t: &CbnTerm) -> Option<CbnTerm> {
    match t {
        CbnTerm::App(f, a) => match &**f {
            CbnTerm::Abs(x, body) => Some(cbn_substitute(body, x, a)),
            _ => cbn_step(f).map(|f2| CbnTerm::app(f2, (**a).clone())),
        },
        _ => None,
    }
}

/// Every one-step successor under call-by-value contexts, leftmost first:
/// the root redex when the function is an abstraction and the argument a
/// value, then function-side steps, then argument-side steps when the
/// function is a value.
pub fn cbv_successors(t: &CbvTerm) -> Vec<CbvTerm> {
    let mut out = Vec::new();
    if let CbvTerm::App(f, a) = t {
        if let CbvTerm::Abs(x, body) = &**f {
            if a.is_value() {
                out.push(cbv_substitute(body, x, a));
            }
        }
        for f2 in cbv_successors(f) {
            out.push(CbvTerm::app(f2, (**a).clone()));
        }
        if f.is_value() {
            for a2 in cbv_successors(a) {
                out.push(CbvTerm::app((**f).clone(), a2));
            }
        }
    }
    out
}

/// The first call-by-value successor, if any.
pub fn cbv_step(t: &CbvTerm) -> Option<CbvTerm> {
    cbv_successors(t).into_iter().next()
}

/// Peels the explicit-substitution spine of a bang term: `t = L[core]`.
fn bang_spine(t: &BangTerm) -> (Vec<(String, BangTerm)>, &BangTerm) {
    let mut frames = Vec::new();
    let mut cur = t;
    while let BangTerm::Sub(b, x, a) = cur {
        frames.push((x.clone(), (**a).clone()));
        cur = b;
    }
    frames.reverse();
    (frames, cur)
}

fn bang_plug(frames: Vec<(String, BangTerm)>, core: BangTerm) -> BangTerm {
    frames.into_iter().fold(core, |acc, (x, a)| {
        BangTerm::Sub(Box::new(acc), x, Box::new(a))
    })
}

/// Renames the spine binders of `t` apart from `avoid` so another term can
/// move under them.
fn bang_refresh(t: &BangTerm, avoid: &BTreeSet<String>) -> BangTerm {
    match t {
        BangTerm::Sub(b, x, a) => {
            let b2 = bang_refresh(b, avoid);
            if avoid.contains(x) {
                let mut pool = avoid.clone();
                let mut names = BTreeSet::new();
                bang_names(&b2, &mut names);
                pool.extend(names);
                let fresh = fresh_name(x, &pool);
                let b3 = bang_substitute(&b2, x, &BangTerm::var(fresh.clone()));
                BangTerm::Sub(Box::new(b3), fresh, a.clone())
            } else {
                BangTerm::Sub(Box::new(b2), x.clone(), a.clone())
            }
        }
        _ => t.clone(),
    }
}

fn bang_root_step(t: &BangTerm) -> Option<BangTerm> {
    match t {
        BangTerm::App(f, u) => {
            let (_, core) = bang_spine(f);
            let BangTerm::Abs(_, _) = core else {
                return None;
            };
            let f2 = bang_refresh(f, &u.free_vars());
            let (frames, core) = bang_spine(&f2);
            let BangTerm::Abs(x, body) = core else {
                unreachable!("spine core checked")
            };
            Some(bang_plug(
                frames,
                BangTerm::Sub(body.clone(), x.clone(), u.clone()),
            ))
        }
        BangTerm::Sub(body, x, arg) => {
            let (_, core) = bang_spine(arg);
            let BangTerm::Bang(_) = core else { return None };
            let arg2 = bang_refresh(arg, &body.free_vars());
            let (frames, core) = bang_spine(&arg2);
            let BangTerm::Bang(inner) = core else {
                unreachable!("spine core checked")
            };
            Some(bang_plug(frames, bang_substitute(body, x, inner)))
        }
        _ => None,
    }
}

/// One deterministic bang step at the leftmost position of
/// `W ::= <> | W t | W[x/u] | t[x/W]`.
pub fn bang_step(t: &BangTerm) -> Option<BangTerm> {
    if let Some(next) = bang_root_step(t) {
        return Some(next);
    }
    match t {
        BangTerm::App(f, a) => bang_step(f).map(|f2| BangTerm::app(f2, (**a).clone())),
        BangTerm::Sub(b, x, a) => match bang_step(b) {
            Some(b2) => Some(BangTerm::Sub(Box::new(b2), x.clone(), a.clone())),
            None => bang_step(a).map(|a2| BangTerm::Sub(b.clone(), x.clone(), Box::new(a2))),
        },
        _ => None,
    }
}

/// Identity embedding of call-by-name terms.
pub fn embed_cbn(t: &CbnTerm) -> Term {
    match t {
        CbnTerm::Var(x) => Term::var(x.clone()),
        CbnTerm::Abs(x, b) => Term::abs(Pattern::var(x.clone()), embed_cbn(b)),
        CbnTerm::App(f, a) => Term::app(embed_cbn(f), embed_cbn(a)),
    }
}

/// Call-by-value translation. A value `v` becomes `V(v*)` with `x* = x` and
/// `(\x.t)* = \x.(t translated)`; an application `t u` becomes
/// `(a b)[V(b)/u'][V(a)/t']`, forcing both sides to expose a `V` before the
/// application fires. The introduced binders are numbered deterministically
/// and avoid every name in the source term.
pub fn translate_cbv(t: &CbvTerm) -> Term {
    let mut avoid = BTreeSet::new();
    cbv_names(t, &mut avoid);
    translate_cbv_rec(t, &mut avoid)
}

fn translate_cbv_rec(t: &CbvTerm, avoid: &mut BTreeSet<String>) -> Term {
    match t {
        CbvTerm::Var(x) => Term::data(v_tag(), vec![Term::var(x.clone())]),
        CbvTerm::Abs(x, b) => Term::data(
            v_tag(),
            vec![Term::abs(
                Pattern::var(x.clone()),
                translate_cbv_rec(b, avoid),
            )],
        ),
        CbvTerm::App(f, u) => {
            let a = fresh_name("a", avoid);
            avoid.insert(a.clone());
            let b = fresh_name("b", avoid);
            avoid.insert(b.clone());
            let ft = translate_cbv_rec(f, avoid);
            let ut = translate_cbv_rec(u, avoid);
            let body = Term::app(Term::var(a.clone()), Term::var(b.clone()));
            let inner =
                Term::match_closure(body, Pattern::data(v_tag(), vec![Pattern::var(b)]), ut);
            Term::match_closure(inner, Pattern::data(v_tag(), vec![Pattern::var(a)]), ft)
        }
    }
}

/// The value part of the call-by-value translation, `\x.t` to `\x.t'` and
/// `x` to `x`, without the `V` wrapper. Defined only on values.
pub fn translate_cbv_value(v: &CbvTerm) -> Option<Term> {
    match translate_cbv(v) {
        Term::Data(tag, mut args) if tag == v_tag() => Some(args.remove(0)),
        _ => None,
    }
}

/// Bang calculus translation: banged terms and bound variables are wrapped
/// in the unary tag `B`.
pub fn translate_bang(t: &BangTerm) -> Term {
    match t {
        BangTerm::Var(x) => Term::var(x.clone()),
        BangTerm::Abs(x, b) => Term::abs(
            Pattern::data(b_tag(), vec![Pattern::var(x.clone())]),
            translate_bang(b),
        ),
        BangTerm::App(f, a) => Term::app(translate_bang(f), translate_bang(a)),
        BangTerm::Bang(b) => Term::data(b_tag(), vec![translate_bang(b)]),
        BangTerm::Sub(b, x, a) => Term::match_closure(
            translate_bang(b),
            Pattern::data(b_tag(), vec![Pattern::var(x.clone())]),
            translate_bang(a),
        ),
    }
}

/// A term of one of the three source calculi.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceTerm {
    Cbn(CbnTerm),
    Cbv(CbvTerm),
    Bang(BangTerm),
}

impl SourceTerm {
    pub fn translate(&self) -> Term {
        match self {
            SourceTerm::Cbn(t) => embed_cbn(t),
            SourceTerm::Cbv(t) => translate_cbv(t),
            SourceTerm::Bang(t) => translate_bang(t),
        }
    }

    /// All one-step successors, leftmost first. Call-by-name and bang have
    /// at most one.
    pub fn successors(&self) -> Vec<SourceTerm> {
        match self {
            SourceTerm::Cbn(t) => cbn_step(t).map(SourceTerm::Cbn).into_iter().collect(),
            SourceTerm::Cbv(t) => cbv_successors(t).into_iter().map(SourceTerm::Cbv).collect(),
            SourceTerm::Bang(t) => bang_step(t).map(SourceTerm::Bang).into_iter().collect(),
        }
    }
}

/// Default search bound for one simulation certificate.
pub const SIM_SEARCH_BOUND: usize = 64;

/// A verified simulation of one source step: a nonempty weak head reduction
/// between the translations of its endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationCertificate {
    pub source_before: SourceTerm,
    pub source_after: SourceTerm,
    pub target_before: Term,
    pub target_after: Term,
    pub trace: Trace,
}

/// Why certificate checking stopped.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimulationFailure {
    /// The reachable set was exhausted without meeting the translated
    /// successor: the simulation claim is false for this step.
    #[error("no weak head path from `{0}` to `{1}` exists")]
    Refuted(String, String),
    /// The search hit the step bound while paths were still open.
    #[error("no weak head path from `{0}` to `{1}` within {2} steps")]
    SearchBoundExceeded(String, String, usize),
}

/// Searches for a shortest nonempty weak head reduction from `start` to a
/// term alpha-equivalent to `target`. Breadth-first with alpha-canonical
/// deduplication, so the found path prefers earlier redexes.
pub fn find_reduction(
    start: &Term,
    target: &Term,
    bound: usize,
) -> Result<Trace, SimulationFailure> {
    struct Node {
        term: Term,
        parent: Option<(usize, Step)>,
        depth: usize,
    }
    let mut nodes = vec![Node {
        term: start.clone(),
        parent: None,
        depth: 0,
    }];
    let mut seen = BTreeSet::new();
    seen.insert(format!("{}", alpha_canonical(start)));
    let mut queue = VecDeque::new();
    queue.push_back(0usize);
    let mut truncated = false;
    while let Some(idx) = queue.pop_front() {
        let depth = nodes[idx].depth;
        if depth >= bound {
            truncated = true;
            continue;
        }
        let cur = nodes[idx].term.clone();
        for (pos, rule) in enumerate_redexes(&cur) {
            let next = apply_at(&cur, &pos, rule).expect("enumerated redexes apply");
            let step = Step {
                rule,
                position: pos,
                before: cur.clone(),
                after: next.clone(),
            };
            if alpha_eq(&next, target) {
                let mut steps = vec![step];
                let mut at = idx;
                while let Some((p, s)) = nodes[at].parent.clone() {
                    steps.push(s);
                    at = p;
                }
                steps.reverse();
                return Ok(Trace::new(steps));
            }
            let key = format!("{}", alpha_canonical(&next));
            if seen.insert(key) {
                nodes.push(Node {
                    term: next,
                    parent: Some((idx, step)),
                    depth: depth + 1,
                });
                queue.push_back(nodes.len() - 1);
            }
        }
    }
    let (s, t) = (start.to_string(), target.to_string());
    if truncated {
        Err(SimulationFailure::SearchBoundExceeded(s, t, bound))
    } else {
        Err(SimulationFailure::Refuted(s, t))
    }
}

/// Walks the source term for up to `max_steps` steps. At every intermediate
/// term, each enumerated source successor is verified by searching for a
/// certificate; the walk then advances along the first successor.
pub fn check_simulation(
    source: &SourceTerm,
    max_steps: usize,
    bound: usize,
) -> Result<Vec<SimulationCertificate>, SimulationFailure> {
    let mut certificates = Vec::new();
    let mut cur = source.clone();
    for _ in 0..max_steps {
        let succs = cur.successors();
        if succs.is_empty() {
            break;
        }
        for succ in &succs {
            let target_before = cur.translate();
            let target_after = succ.translate();
            let trace = find_reduction(&target_before, &target_after, bound)?;
            certificates.push(SimulationCertificate {
                source_before: cur.clone(),
                source_after: succ.clone(),
                target_before,
                target_after,
                trace,
            });
        }
        cur = succs.into_iter().next().expect("nonempty successors");
    }
    Ok(certificates)
}

/// Encodes an application in the exception fragment: scrutinize `t` for a
/// value or an exception, then `u`, propagating exceptions.
pub fn moggi_app(t: &Term, u: &Term) -> Term {
    let mut avoid = all_names(t);
    avoid.extend(all_names(u));
    let x = fresh_name("x", &avoid);
    avoid.insert(x.clone());
    let y = fresh_name("y", &avoid);
    avoid.insert(y.clone());
    let z = fresh_name("z", &avoid);
    let e_tag = Tag::new("E", 1);
    let propagate = |z: &str| crate::syntax::Branch {
        pattern: Pattern::data(e_tag.clone(), vec![Pattern::var(z)]),
        body: Term::data(e_tag.clone(), vec![Term::var(z)]),
    };
    let inner = Term::case(
        u.clone(),
        vec![
            crate::syntax::Branch {
                pattern: Pattern::data(v_tag(), vec![Pattern::var(y.clone())]),
                body: Term::app(Term::var(x.clone()), Term::var(y)),
            },
            propagate(&z),
        ],
    );
    Term::case(
        t.clone(),
        vec![
            crate::syntax::Branch {
                pattern: Pattern::data(v_tag(), vec![Pattern::var(x)]),
                body: inner,
            },
            propagate(&z),
        ],
    )
}

enum LamView<'a, T> {
    Var(&'a str),
    Abs(&'a str, &'a T),
    App(&'a T, &'a T),
    Bang(&'a T),
    Sub(&'a T, &'a str, &'a T),
}

trait LamDisplay: Sized {
    fn view(&self) -> LamView<'_, Self>;
}

/// Precedence levels: 0 top, 1 application function, 2 application
/// argument, 3 bang operand, 4 substitution body. A bang operand may be a
/// suffixed atom, so `!x[y/z]` reads as `!(x[y/z])` and a substitution
/// whose body is banged prints as `(!x)[y/z]`.
fn fmt_lambda<T: LamDisplay>(t: &T, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t.view() {
        LamView::Var(x) => write!(f, "{x}"),
        LamView::Abs(x, b) => {
            if prec >= 1 {
                write!(f, "(")?;
            }
            write!(f, "\\{x}.")?;
            fmt_lambda(b, 0, f)?;
            if prec >= 1 {
                write!(f, ")")?;
            }
            Ok(())
        }
        LamView::App(fun, arg) => {
            if prec >= 2 {
                write!(f, "(")?;
            }
            fmt_lambda(fun, 1, f)?;
            write!(f, " ")?;
            fmt_lambda(arg, 2, f)?;
            if prec >= 2 {
                write!(f, ")")?;
            }
            Ok(())
        }
        LamView::Bang(b) => {
            if prec >= 4 {
                write!(f, "(")?;
            }
            write!(f, "!")?;
            fmt_lambda(b, 3, f)?;
            if prec >= 4 {
                write!(f, ")")?;
            }
            Ok(())
        }
        LamView::Sub(b, x, a) => {
            fmt_lambda(b, 4, f)?;
            write!(f, "[{x}/")?;
            fmt_lambda(a, 0, f)?;
            write!(f, "]")
        }
    }
}

impl LamDisplay for CbnTerm {
    fn view(&self) -> LamView<'_, Self> {
        match self {
            CbnTerm::Var(x) => LamView::Var(x),
            CbnTerm::Abs(x, b) => LamView::Abs(x, b),
            CbnTerm::App(fun, arg) => LamView::App(fun, arg),
        }
    }
}

impl LamDisplay for CbvTerm {
    fn view(&self) -> LamView<'_, Self> {
        match self {
            CbvTerm::Var(x) => LamView::Var(x),
            CbvTerm::Abs(x, b) => LamView::Abs(x, b),
            CbvTerm::App(fun, arg) => LamView::App(fun, arg),
        }
    }
}

impl LamDisplay for BangTerm {
    fn view(&self) -> LamView<'_, Self> {
        match self {
            BangTerm::Var(x) => LamView::Var(x),
            BangTerm::Abs(x, b) => LamView::Abs(x, b),
            BangTerm::App(fun, arg) => LamView::App(fun, arg),
            BangTerm::Bang(b) => LamView::Bang(b),
            BangTerm::Sub(b, x, a) => LamView::Sub(b, x, a),
        }
    }
}

impl fmt::Display for CbnTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_lambda(self, 0, f)
    }
}

impl fmt::Display for CbvTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_lambda(self, 0, f)
    }
}

impl fmt::Display for BangTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_lambda(self, 0, f)
    }
}

impl fmt::Display for SourceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceTerm::Cbn(t) => write!(f, "{t}"),
            SourceTerm::Cbv(t) => write!(f, "{t}"),
            SourceTerm::Bang(t) => write!(f, "{t}"),
        }
    }
}

enum LamAst {
    Var(String),
    Abs(String, Box<LamAst>),
    App(Box<LamAst>, Box<LamAst>),
    Bang(Box<LamAst>),
    Sub(Box<LamAst>, String, Box<LamAst>),
}

/// Parses plain lambda syntax, optionally extended with `!t` and the
/// explicit substitution suffix `t[x/u]`. `I` abbreviates `\x.x`.
fn parse_lambda_ast(src: &str, allow_bang: bool) -> Result<LamAst, ParseError> {
    let mut registry = crate::syntax::TagRegistry::new();
    let mut p = Parser::new(src, &mut registry)?;
    let ast = lam_term(&mut p, allow_bang)?;
    p.expect_eof()?;
    Ok(ast)
}

fn lam_term(p: &mut Parser<'_>, allow_bang: bool) -> Result<LamAst, ParseError> {
    if p.peek().kind == TokKind::Backslash {
        p.bump();
        let x = match p.bump().kind {
            TokKind::Lower(x) => x,
            other => return Err(p.err(format!("expected a variable, found {}", other.describe()))),
        };
        p.expect(&TokKind::Dot)?;
        let body = lam_term(p, allow_bang)?;
        return Ok(LamAst::Abs(x, Box::new(body)));
    }
    let mut t = lam_suffixed(p, allow_bang)?;
    loop {
        match &p.peek().kind {
            TokKind::Lower(_) | TokKind::LParen => {}
            TokKind::Upper(u) if u == "I" => {}
            TokKind::Bang if allow_bang => {}
            _ => break,
        }
        let arg = lam_suffixed(p, allow_bang)?;
        t = LamAst::App(Box::new(t), Box::new(arg));
    }
    Ok(t)
}

fn lam_suffixed(p: &mut Parser<'_>, allow_bang: bool) -> Result<LamAst, ParseError> {
    let mut t = lam_atom(p, allow_bang)?;
    while allow_bang && p.peek().kind == TokKind::LBracket {
        p.bump();
        let x = match p.bump().kind {
            TokKind::Lower(x) => x,
            other => return Err(p.err(format!("expected a variable, found {}", other.describe()))),
        };
        p.expect(&TokKind::Slash)?;
        let u = lam_term(p, allow_bang)?;
        p.expect(&TokKind::RBracket)?;
        t = LamAst::Sub(Box::new(t), x, Box::new(u));
    }
    Ok(t)
}

fn lam_atom(p: &mut Parser<'_>, allow_bang: bool) -> Result<LamAst, ParseError> {
    match p.peek().kind.clone() {
        TokKind::Lower(x) => {
            p.bump();
            Ok(LamAst::Var(x))
        }
        TokKind::Upper(u) if u == "I" => {
            p.bump();
            Ok(LamAst::Abs("x".into(), Box::new(LamAst::Var("x".into()))))
        }
        TokKind::Bang if allow_bang => {
            p.bump();
            Ok(LamAst::Bang(Box::new(lam_suffixed(p, allow_bang)?)))
        }
        TokKind::LParen => {
            p.bump();
            let t = lam_term(p, allow_bang)?;
            p.expect(&TokKind::RParen)?;
            Ok(t)
        }
        other => Err(p.err(format!("expected a term, found {}", other.describe()))),
    }
}

fn ast_to_cbn(a: &LamAst) -> CbnTerm {
    match a {
        LamAst::Var(x) => CbnTerm::var(x.clone()),
        LamAst::Abs(x, b) => CbnTerm::abs(x.clone(), ast_to_cbn(b)),
        LamAst::App(f, u) => CbnTerm::app(ast_to_cbn(f), ast_to_cbn(u)),
        _ => unreachable!("bang forms are rejected at parse time"),
    }
}

fn ast_to_bang(a: &LamAst) -> BangTerm {
    match a {
        LamAst::Var(x) => BangTerm::var(x.clone()),
        LamAst::Abs(x, b) => BangTerm::abs(x.clone(), ast_to_bang(b)),
        LamAst::App(f, u) => BangTerm::app(ast_to_bang(f), ast_to_bang(u)),
        LamAst::Bang(b) => BangTerm::bang(ast_to_bang(b)),
        LamAst::Sub(b, x, u) => BangTerm::sub(ast_to_bang(b), x.clone(), ast_to_bang(u)),
    }
}

pub fn parse_cbn(src: &str) -> Result<CbnTerm, ParseError> {
    parse_lambda_ast(src, false).map(|a| ast_to_cbn(&a))
}

pub fn parse_cbv(src: &str) -> Result<CbvTerm, ParseError> {
    parse_lambda_ast(src, false).map(|a| {
        fn conv(a: &LamAst) -> CbvTerm {
            match a {
                LamAst::Var(x) => CbvTerm::var(x.clone()),
                LamAst::Abs(x, b) => CbvTerm::abs(x.clone(), conv(b)),
                LamAst::App(f, u) => CbvTerm::app(conv(f), conv(u)),
                _ => unreachable!("bang forms are rejected at parse time"),
            }
        }
        conv(&a)
    })
}

pub fn parse_bang(src: &str) -> Result<BangTerm, ParseError> {
    parse_lambda_ast(src, true).map(|a| ast_to_bang(&a))
}
