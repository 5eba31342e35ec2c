//! Quantitative typing for the pattern calculus.
//!
//! Types are multiset-based: an argument position carries a multiset of
//! term types, one occurrence per use, so type sizes account for work.
//! This module defines the type expressions, the context algebra, explicit
//! derivation trees with a local rule checker, the size measure that
//! underlies the quantitative results, pattern typing, split/merge of
//! multiset derivations, and the head-type conflict evidence showing why a
//! clash can never be typed.
//!
//! The ten rules, by label:
//!
//! ```text
//! patv:  x : M ||- x : M
//! patc:  (G_i ||- p_i : M_i)_i  =>  +G_i ||- c(ps) : [c(M_1,...,M_n)]
//! ax:    x : [s] |- x : s
//! many:  (G_i |- t : s_i)_i  =>  +G_i |- t : [s_1,...,s_k]
//! abs:   G |- t : s,  G|vars(p) ||- p : M  =>  G\vars(p) |- \p.t : M -> s
//! absb:  |- \p.t : *                        (empty context)
//! app:   G |- t : M -> s,  D |- u : M  =>  G+D |- t u : s
//! const: (G_i |- t_i : M_i)_i  =>  +G_i |- c(ts) : c(M_1,...,M_n)
//! match: G |- t : s,  G|vars(p) ||- p : M,  D |- u : M
//!          =>  (G\vars(p))+D |- t[p/u] : s
//! case:  D |- t : M,  G|vars(pk) ||- pk : M,  G |- u_k : s
//!          =>  (G\vars(pk))+D |- case t of bs : s      (selected branch k)
//! ```
//!
//! Multiset judgments are concluded only by `many` (and pattern judgments
//! only by `patv`/`patc`), so a term is *typable* exactly when some
//! derivation assigns it a term type; the empty-multiset judgment
//! `|- t : []` exists for every term and does not witness typability.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::classify::{is_clash, BaseClashKind};
use crate::reduction::{subterm_at, RedexPosition};
use crate::syntax::{Pattern, Tag, Term};

/// A term type: a data type with one multiset per constructor argument,
/// the untyped-abstraction constant `*`, or an arrow from a multiset.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermType {
    Data(Tag, Vec<MultisetType>),
    Star,
    Arrow(MultisetType, Box<TermType>),
}

impl TermType {
    pub fn data(tag: Tag, args: Vec<MultisetType>) -> Self {
        debug_assert_eq!(tag.arity, args.len(), "data type arity");
        TermType::Data(tag, args)
    }

    pub fn arrow(domain: MultisetType, codomain: TermType) -> Self {
        TermType::Arrow(domain, Box::new(codomain))
    }
}

impl fmt::Display for TermType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermType::Star => write!(f, "*"),
            TermType::Data(tag, args) => {
                write!(f, "{}", tag.name)?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, m) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{m}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
            TermType::Arrow(dom, cod) => write!(f, "{dom} -> {cod}"),
        }
    }
}

/// An unordered collection of term types with multiplicity. Stored sorted,
/// so equality and ordering are permutation-invariant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultisetType {
    items: Vec<TermType>,
}

impl MultisetType {
    pub fn new(mut items: Vec<TermType>) -> Self {
        items.sort();
        MultisetType { items }
    }

    pub fn empty() -> Self {
        MultisetType::default()
    }

    pub fn singleton(ty: TermType) -> Self {
        MultisetType { items: vec![ty] }
    }

    /// Additive union: multiplicities add.
    pub fn union(&self, other: &MultisetType) -> MultisetType {
        let mut items = self.items.clone();
        items.extend(other.items.iter().cloned());
        MultisetType::new(items)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[TermType] {
        &self.items
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TermType> {
        self.items.iter()
    }
}

impl fmt::Display for MultisetType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, t) in self.items.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, "]")
    }
}

/// A finite-support map from variables to multiset types; absent variables
/// mean the empty multiset, and empty multisets are never stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct TypingContext {
    map: BTreeMap<String, MultisetType>,
}

impl TypingContext {
    pub fn empty() -> Self {
        TypingContext::default()
    }

    pub fn bind(name: impl Into<String>, m: MultisetType) -> Self {
        let mut ctx = TypingContext::empty();
        if !m.is_empty() {
            ctx.map.insert(name.into(), m);
        }
        ctx
    }

    pub fn get(&self, name: &str) -> MultisetType {
        self.map.get(name).cloned().unwrap_or_default()
    }

    /// Pointwise additive union.
    pub fn union(&self, other: &TypingContext) -> TypingContext {
        let mut map = self.map.clone();
        for (x, m) in &other.map {
            let joined = match map.remove(x) {
                Some(prev) => prev.union(m),
                None => m.clone(),
            };
            map.insert(x.clone(), joined);
        }
        TypingContext { map }
    }

    /// Keeps only the variables in `keep`.
    pub fn restrict(&self, keep: &BTreeSet<String>) -> TypingContext {
        TypingContext {
            map: self
                .map
                .iter()
                .filter(|(x, _)| keep.contains(*x))
                .map(|(x, m)| (x.clone(), m.clone()))
                .collect(),
        }
    }

    /// Zeroes out the variables in `drop`.
    pub fn remove(&self, drop: &BTreeSet<String>) -> TypingContext {
        TypingContext {
            map: self
                .map
                .iter()
                .filter(|(x, _)| !drop.contains(*x))
                .map(|(x, m)| (x.clone(), m.clone()))
                .collect(),
        }
    }

    pub fn domain(&self) -> BTreeSet<String> {
        self.map.keys().cloned().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &MultisetType)> {
        self.map.iter()
    }
}

impl fmt::Display for TypingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, m)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}:{m}")?;
        }
        Ok(())
    }
}

/// What a judgment is about: a term or a pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Subject {
    Term(Term),
    Pattern(Pattern),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Term(t) => write!(f, "{t}"),
            Subject::Pattern(p) => write!(f, "{p}"),
        }
    }
}

/// The type side of a judgment: a term type or a multiset type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeOf {
    Term(TermType),
    Multi(MultisetType),
}

impl fmt::Display for TypeOf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeOf::Term(t) => write!(f, "{t}"),
            TypeOf::Multi(m) => write!(f, "{m}"),
        }
    }
}

/// One judgment: `ctx |- t : s`, `ctx |- t : M`, or `ctx ||- p : M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgment {
    pub context: TypingContext,
    pub subject: Subject,
    pub ty: TypeOf,
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.context.is_empty() {
            write!(f, "{} ", self.context)?;
        }
        let turnstile = match self.subject {
            Subject::Term(_) => "|-",
            Subject::Pattern(_) => "||-",
        };
        write!(f, "{turnstile} {} : {}", self.subject, self.ty)
    }
}

/// Rule labels for derivation nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleLabel {
    PatVar,
    PatData,
    Ax,
    Many,
    Abs,
    AbsStar,
    App,
    Const,
    Match,
    Case,
}

impl RuleLabel {
    pub fn name(self) -> &'static str {
        match self {
            RuleLabel::PatVar => "patv",
            RuleLabel::PatData => "patc",
            RuleLabel::Ax => "ax",
            RuleLabel::Many => "many",
            RuleLabel::Abs => "abs",
            RuleLabel::AbsStar => "absb",
            RuleLabel::App => "app",
            RuleLabel::Const => "const",
            RuleLabel::Match => "match",
            RuleLabel::Case => "case",
        }
    }

    pub fn from_name(name: &str) -> Option<RuleLabel> {
        Some(match name {
            "patv" => RuleLabel::PatVar,
            "patc" => RuleLabel::PatData,
            "ax" => RuleLabel::Ax,
            "many" => RuleLabel::Many,
            "abs" => RuleLabel::Abs,
            "absb" => RuleLabel::AbsStar,
            "app" => RuleLabel::App,
            "const" => RuleLabel::Const,
            "match" => RuleLabel::Match,
            "case" => RuleLabel::Case,
            _ => return None,
        })
    }
}

impl fmt::Display for RuleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// An explicit derivation tree. `selected_branch` is set exactly on case
/// nodes and names the branch the rule instance types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub rule: RuleLabel,
    pub conclusion: Judgment,
    pub children: Vec<Derivation>,
    pub selected_branch: Option<usize>,
}

impl Derivation {
    fn node(rule: RuleLabel, conclusion: Judgment, children: Vec<Derivation>) -> Self {
        Derivation {
            rule,
            conclusion,
            children,
            selected_branch: None,
        }
    }

    /// The derivation size: every node counts except `many` and `match`
    /// nodes. Pattern nodes count.
    pub fn size(&self) -> usize {
        let own = match self.rule {
            RuleLabel::Many | RuleLabel::Match => 0,
            _ => 1,
        };
        own + self.children.iter().map(Derivation::size).sum::<usize>()
    }

    pub fn subject_term(&self) -> Option<&Term> {
        match &self.conclusion.subject {
            Subject::Term(t) => Some(t),
            Subject::Pattern(_) => None,
        }
    }

    pub(crate) fn term_type(&self) -> Option<&TermType> {
        match &self.conclusion.ty {
            TypeOf::Term(t) => Some(t),
            TypeOf::Multi(_) => None,
        }
    }

    pub(crate) fn multi_type(&self) -> Option<&MultisetType> {
        match &self.conclusion.ty {
            TypeOf::Multi(m) => Some(m),
            TypeOf::Term(_) => None,
        }
    }

    /// `ax`: `x : [s] |- x : s`.
    pub fn ax(name: impl Into<String>, ty: TermType) -> Derivation {
        let name = name.into();
        Derivation::node(
            RuleLabel::Ax,
            Judgment {
                context: TypingContext::bind(name.clone(), MultisetType::singleton(ty.clone())),
                subject: Subject::Term(Term::var(name)),
                ty: TypeOf::Term(ty),
            },
            vec![],
        )
    }

    /// `many`: joins term-typed derivations of `t` into a multiset
    /// judgment. With no children it concludes `|- t : []`.
    pub fn many(t: &Term, children: Vec<Derivation>) -> Derivation {
        let context = children.iter().fold(TypingContext::empty(), |acc, c| {
            acc.union(&c.conclusion.context)
        });
        let m = MultisetType::new(
            children
                .iter()
                .map(|c| {
                    c.term_type()
                        .expect("many child concludes a term type")
                        .clone()
                })
                .collect(),
        );
        Derivation::node(
            RuleLabel::Many,
            Judgment {
                context,
                subject: Subject::Term(t.clone()),
                ty: TypeOf::Multi(m),
            },
            children,
        )
    }

    /// `absb`: `|- \p.t : *` for any abstraction.
    pub fn absb(t: &Term) -> Derivation {
        debug_assert!(matches!(t, Term::Abs(_, _)));
        Derivation::node(
            RuleLabel::AbsStar,
            Judgment {
                context: TypingContext::empty(),
                subject: Subject::Term(t.clone()),
                ty: TypeOf::Term(TermType::Star),
            },
            vec![],
        )
    }

    /// `abs` with the pattern premise materialized from the body context.
    pub fn abs(p: &Pattern, body: Derivation) -> Derivation {
        let gamma = body.conclusion.context.clone();
        let sigma = body
            .term_type()
            .expect("abs body concludes a term type")
            .clone();
        let t = body
            .subject_term()
            .expect("abs body is a term judgment")
            .clone();
        let (pi, m) = type_pattern(p, &gamma);
        Derivation::node(
            RuleLabel::Abs,
            Judgment {
                context: gamma.remove(&p.vars()),
                subject: Subject::Term(Term::abs(p.clone(), t)),
                ty: TypeOf::Term(TermType::arrow(m, sigma)),
            },
            vec![body, pi],
        )
    }

    /// `app`: the function child concludes an arrow, the argument child a
    /// matching multiset.
    pub fn app(fun: Derivation, arg: Derivation) -> Derivation {
        let TermType::Arrow(dom, cod) = fun
            .term_type()
            .expect("app function concludes a term type")
            .clone()
        else {
            panic!("app function must conclude an arrow type")
        };
        debug_assert_eq!(
            arg.multi_type(),
            Some(&dom),
            "argument multiset matches domain"
        );
        let t = fun
            .subject_term()
            .expect("app function is a term judgment")
            .clone();
        let u = arg
            .subject_term()
            .expect("app argument is a term judgment")
            .clone();
        Derivation::node(
            RuleLabel::App,
            Judgment {
                context: fun.conclusion.context.union(&arg.conclusion.context),
                subject: Subject::Term(Term::app(t, u)),
                ty: TypeOf::Term(*cod),
            },
            vec![fun, arg],
        )
    }

    /// `const`: one multiset child per constructor argument.
    pub fn constant(tag: Tag, children: Vec<Derivation>) -> Derivation {
        debug_assert_eq!(tag.arity, children.len());
        let context = children.iter().fold(TypingContext::empty(), |acc, c| {
            acc.union(&c.conclusion.context)
        });
        let args: Vec<Term> = children
            .iter()
            .map(|c| {
                c.subject_term()
                    .expect("const child is a term judgment")
                    .clone()
            })
            .collect();
        let tys: Vec<MultisetType> = children
            .iter()
            .map(|c| {
                c.multi_type()
                    .expect("const child concludes a multiset")
                    .clone()
            })
            .collect();
        Derivation::node(
            RuleLabel::Const,
            Judgment {
                context,
                subject: Subject::Term(Term::data(tag.clone(), args)),
                ty: TypeOf::Term(TermType::data(tag, tys)),
            },
            children,
        )
    }

    /// `match` with the pattern premise materialized from the body context.
    pub fn match_closure(body: Derivation, p: &Pattern, arg: Derivation) -> Derivation {
        let gamma = body.conclusion.context.clone();
        let sigma = body
            .term_type()
            .expect("match body concludes a term type")
            .clone();
        let t = body
            .subject_term()
            .expect("match body is a term judgment")
            .clone();
        let u = arg
            .subject_term()
            .expect("match argument is a term judgment")
            .clone();
        let (pi, m) = type_pattern(p, &gamma);
        debug_assert_eq!(
            arg.multi_type(),
            Some(&m),
            "argument multiset matches pattern"
        );
        Derivation::node(
            RuleLabel::Match,
            Judgment {
                context: gamma.remove(&p.vars()).union(&arg.conclusion.context),
                subject: Subject::Term(Term::match_closure(t, p.clone(), u)),
                ty: TypeOf::Term(sigma),
            },
            vec![body, pi, arg],
        )
    }

    /// `case` for the full case term, typing branch `k`; the pattern
    /// premise is materialized from the branch body context.
    pub fn case(term: &Term, k: usize, scrutinee: Derivation, body: Derivation) -> Derivation {
        let Term::Case(_, branches) = term else {
            panic!("case builder needs a case term")
        };
        let p = &branches[k].pattern;
        let gamma = body.conclusion.context.clone();
        let sigma = body
            .term_type()
            .expect("case body concludes a term type")
            .clone();
        let (pi, m) = type_pattern(p, &gamma);
        debug_assert_eq!(
            scrutinee.multi_type(),
            Some(&m),
            "scrutinee multiset matches pattern"
        );
        let mut node = Derivation::node(
            RuleLabel::Case,
            Judgment {
                context: gamma.remove(&p.vars()).union(&scrutinee.conclusion.context),
                subject: Subject::Term(term.clone()),
                ty: TypeOf::Term(sigma),
            },
            vec![scrutinee, pi, body],
        );
        node.selected_branch = Some(k);
        node
    }
}

/// Types a pattern against a context. Total and deterministic: a variable
/// takes whatever multiset the context gives it (empty when absent), a
/// data pattern takes the singleton of its constructor applied to the
/// children's multisets. The derivation concludes
/// `ctx|vars(p) ||- p : M`.
pub fn type_pattern(p: &Pattern, ctx: &TypingContext) -> (Derivation, MultisetType) {
    match p {
        Pattern::Var(x) => {
            let m = ctx.get(x);
            let d = Derivation::node(
                RuleLabel::PatVar,
                Judgment {
                    context: TypingContext::bind(x.clone(), m.clone()),
                    subject: Subject::Pattern(p.clone()),
                    ty: TypeOf::Multi(m.clone()),
                },
                vec![],
            );
            (d, m)
        }
        Pattern::Data(tag, ps) => {
            let mut children = Vec::with_capacity(ps.len());
            let mut context = TypingContext::empty();
            let mut args = Vec::with_capacity(ps.len());
            for sub in ps {
                let (d, m) = type_pattern(sub, ctx);
                context = context.union(&d.conclusion.context);
                args.push(m);
                children.push(d);
            }
            let m = MultisetType::singleton(TermType::data(tag.clone(), args));
            let d = Derivation::node(
                RuleLabel::PatData,
                Judgment {
                    context,
                    subject: Subject::Pattern(p.clone()),
                    ty: TypeOf::Multi(m.clone()),
                },
                children,
            );
            (d, m)
        }
    }
}

/// One broken rule instance, located by child indices from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: Vec<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "at root: {}", self.message)
        } else {
            let path: Vec<String> = self.path.iter().map(usize::to_string).collect();
            write!(f, "at {}: {}", path.join("."), self.message)
        }
    }
}

/// Checks every node of the derivation against its rule and reports all
/// violations, deepest nodes first within a subtree.
pub fn check_derivation(d: &Derivation) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    check_node(d, &mut Vec::new(), &mut out);
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn check_node(d: &Derivation, path: &mut Vec<usize>, out: &mut Vec<Violation>) {
    for (i, c) in d.children.iter().enumerate() {
        path.push(i);
        check_node(c, path, out);
        path.pop();
    }
    check_local(d, path, out);
}

fn violation(out: &mut Vec<Violation>, path: &[usize], message: impl Into<String>) {
    out.push(Violation {
        path: path.to_vec(),
        message: message.into(),
    });
}

fn check_local(d: &Derivation, path: &[usize], out: &mut Vec<Violation>) {
    if d.rule != RuleLabel::Case && d.selected_branch.is_some() {
        violation(
            out,
            path,
            format!("rule {} must not select a branch", d.rule),
        );
    }
    match d.rule {
        RuleLabel::PatVar => {
            if !d.children.is_empty() {
                violation(out, path, "patv takes no premises");
                return;
            }
            let Subject::Pattern(Pattern::Var(x)) = &d.conclusion.subject else {
                violation(out, path, "patv subject must be a variable pattern");
                return;
            };
            let Some(m) = d.multi_type() else {
                violation(out, path, "patv must conclude a multiset type");
                return;
            };
            if d.conclusion.context != TypingContext::bind(x.clone(), m.clone()) {
                violation(out, path, format!("patv context must be exactly {x}:{m}"));
            }
        }
        RuleLabel::PatData => {
            let Subject::Pattern(Pattern::Data(tag, ps)) = &d.conclusion.subject else {
                violation(out, path, "patc subject must be a data pattern");
                return;
            };
            if d.children.len() != ps.len() {
                violation(
                    out,
                    path,
                    format!(
                        "patc needs {} premises, found {}",
                        ps.len(),
                        d.children.len()
                    ),
                );
                return;
            }
            let mut args = Vec::with_capacity(ps.len());
            let mut ctx = TypingContext::empty();
            for (i, (c, sub)) in d.children.iter().zip(ps).enumerate() {
                if d.conclusion_pattern_child(c, sub).is_none() {
                    violation(
                        out,
                        path,
                        format!("patc premise {i} must type the subpattern {sub} with a multiset"),
                    );
                    return;
                }
                args.push(c.multi_type().expect("checked").clone());
                ctx = ctx.union(&c.conclusion.context);
            }
            let want = MultisetType::singleton(TermType::data(tag.clone(), args));
            if d.conclusion.ty != TypeOf::Multi(want.clone()) {
                violation(
                    out,
                    path,
                    format!("patc must conclude the singleton {want}"),
                );
            }
            if d.conclusion.context != ctx {
                violation(
                    out,
                    path,
                    "patc context must be the union of its premise contexts",
                );
            }
        }
        RuleLabel::Ax => {
            if !d.children.is_empty() {
                violation(out, path, "ax takes no premises");
                return;
            }
            let Subject::Term(Term::Var(x)) = &d.conclusion.subject else {
                violation(out, path, "ax subject must be a variable");
                return;
            };
            let Some(sigma) = d.term_type() else {
                violation(out, path, "ax must conclude a term type");
                return;
            };
            let want = TypingContext::bind(x.clone(), MultisetType::singleton(sigma.clone()));
            if d.conclusion.context != want {
                violation(
                    out,
                    path,
                    format!("ax context must be exactly {x}:[{sigma}]"),
                );
            }
        }
        RuleLabel::Many => {
            let Some(t) = d.subject_term() else {
                violation(out, path, "many subject must be a term");
                return;
            };
            let Some(m) = d.multi_type() else {
                violation(out, path, "many must conclude a multiset type");
                return;
            };
            let mut tys = Vec::new();
            let mut ctx = TypingContext::empty();
            for (i, c) in d.children.iter().enumerate() {
                if c.subject_term() != Some(t) {
                    violation(
                        out,
                        path,
                        format!("many premise {i} must type the same term"),
                    );
                    return;
                }
                let Some(s) = c.term_type() else {
                    violation(
                        out,
                        path,
                        format!("many premise {i} must conclude a term type"),
                    );
                    return;
                };
                tys.push(s.clone());
                ctx = ctx.union(&c.conclusion.context);
            }
            if *m != MultisetType::new(tys) {
                violation(
                    out,
                    path,
                    "many conclusion must collect exactly the premise types",
                );
            }
            if d.conclusion.context != ctx {
                violation(
                    out,
                    path,
                    "many context must be the union of its premise contexts",
                );
            }
        }
        RuleLabel::AbsStar => {
            if !d.children.is_empty() {
                violation(out, path, "absb takes no premises");
            }
            if !matches!(&d.conclusion.subject, Subject::Term(Term::Abs(_, _))) {
                violation(out, path, "absb subject must be an abstraction");
            }
            if d.conclusion.ty != TypeOf::Term(TermType::Star) {
                violation(out, path, "absb must conclude *");
            }
            if !d.conclusion.context.is_empty() {
                violation(out, path, "absb context must be empty");
            }
        }
        RuleLabel::Abs => {
            let Subject::Term(Term::Abs(p, body)) = &d.conclusion.subject else {
                violation(out, path, "abs subject must be an abstraction");
                return;
            };
            if d.children.is_empty() || d.children.len() > 2 {
                violation(
                    out,
                    path,
                    "abs takes a body premise and an optional pattern premise",
                );
                return;
            }
            let b = &d.children[0];
            if b.subject_term() != Some(body) {
                violation(out, path, "abs body premise must type the abstraction body");
                return;
            }
            let Some(sigma) = b.term_type() else {
                violation(out, path, "abs body premise must conclude a term type");
                return;
            };
            let (pi, m) = type_pattern(p, &b.conclusion.context);
            if let Some(pat) = d.children.get(1) {
                if pat.conclusion != pi.conclusion {
                    violation(
                        out,
                        path,
                        format!("abs pattern premise must conclude {}", pi.conclusion),
                    );
                }
            }
            let want = TypeOf::Term(TermType::arrow(m, sigma.clone()));
            if d.conclusion.ty != want {
                violation(out, path, format!("abs must conclude {want}"));
            }
            if d.conclusion.context != b.conclusion.context.remove(&p.vars()) {
                violation(
                    out,
                    path,
                    "abs context must be the body context minus the pattern variables",
                );
            }
        }
        RuleLabel::App => {
            let Subject::Term(Term::App(t, u)) = &d.conclusion.subject else {
                violation(out, path, "app subject must be an application");
                return;
            };
            if d.children.len() != 2 {
                violation(
                    out,
                    path,
                    "app takes a function premise and an argument premise",
                );
                return;
            }
            let (fun, arg) = (&d.children[0], &d.children[1]);
            if fun.subject_term() != Some(t) {
                violation(out, path, "app function premise must type the function");
                return;
            }
            let Some(TermType::Arrow(dom, cod)) = fun.term_type() else {
                violation(
                    out,
                    path,
                    "app function premise must conclude an arrow type",
                );
                return;
            };
            if arg.subject_term() != Some(u) {
                violation(out, path, "app argument premise must type the argument");
                return;
            }
            let Some(got) = arg.multi_type() else {
                violation(
                    out,
                    path,
                    "app argument premise must conclude a multiset type",
                );
                return;
            };
            if got != dom {
                violation(
                    out,
                    path,
                    format!("argument multiset {got} does not match the arrow domain {dom}"),
                );
            }
            if d.conclusion.ty != TypeOf::Term((**cod).clone()) {
                violation(out, path, format!("app must conclude the codomain {cod}"));
            }
            let want = fun.conclusion.context.union(&arg.conclusion.context);
            if d.conclusion.context != want {
                violation(
                    out,
                    path,
                    "app context must be the union of its premise contexts",
                );
            }
        }
        RuleLabel::Const => {
            let Subject::Term(Term::Data(tag, ts)) = &d.conclusion.subject else {
                violation(out, path, "const subject must be a data term");
                return;
            };
            if d.children.len() != ts.len() {
                violation(
                    out,
                    path,
                    format!(
                        "const needs {} premises, found {}",
                        ts.len(),
                        d.children.len()
                    ),
                );
                return;
            }
            let mut tys = Vec::with_capacity(ts.len());
            let mut ctx = TypingContext::empty();
            for (i, (c, arg)) in d.children.iter().zip(ts).enumerate() {
                if c.subject_term() != Some(arg) {
                    violation(
                        out,
                        path,
                        format!("const premise {i} must type the argument {arg}"),
                    );
                    return;
                }
                let Some(m) = c.multi_type() else {
                    violation(
                        out,
                        path,
                        format!("const premise {i} must conclude a multiset type"),
                    );
                    return;
                };
                tys.push(m.clone());
                ctx = ctx.union(&c.conclusion.context);
            }
            if d.conclusion.ty != TypeOf::Term(TermType::data(tag.clone(), tys)) {
                violation(
                    out,
                    path,
                    "const conclusion must apply the constructor to the premise multisets",
                );
            }
            if d.conclusion.context != ctx {
                violation(
                    out,
                    path,
                    "const context must be the union of its premise contexts",
                );
            }
        }
        RuleLabel::Match => {
            let Subject::Term(Term::Match(t, p, u)) = &d.conclusion.subject else {
                violation(out, path, "match subject must be a matching closure");
                return;
            };
            if d.children.len() != 3 {
                violation(
                    out,
                    path,
                    "match takes body, pattern, and argument premises",
                );
                return;
            }
            let (b, pat, arg) = (&d.children[0], &d.children[1], &d.children[2]);
            if b.subject_term() != Some(t) {
                violation(out, path, "match body premise must type the closure body");
                return;
            }
            let Some(sigma) = b.term_type() else {
                violation(out, path, "match body premise must conclude a term type");
                return;
            };
            let (pi, m) = type_pattern(p, &b.conclusion.context);
            if pat.conclusion != pi.conclusion {
                violation(
                    out,
                    path,
                    format!("match pattern premise must conclude {}", pi.conclusion),
                );
            }
            if arg.subject_term() != Some(u) {
                violation(
                    out,
                    path,
                    "match argument premise must type the closure argument",
                );
                return;
            }
            let Some(got) = arg.multi_type() else {
                violation(
                    out,
                    path,
                    "match argument premise must conclude a multiset type",
                );
                return;
            };
            if *got != m {
                violation(
                    out,
                    path,
                    format!("argument multiset {got} does not match the pattern multiset {m}"),
                );
            }
            if d.conclusion.ty != TypeOf::Term(sigma.clone()) {
                violation(out, path, "match must conclude the body type");
            }
            let want = b
                .conclusion
                .context
                .remove(&p.vars())
                .union(&arg.conclusion.context);
            if d.conclusion.context != want {
                violation(
                    out,
                    path,
                    "match context must join the body context minus pattern variables with the argument context",
                );
            }
        }
        RuleLabel::Case => {
            let Subject::Term(Term::Case(t, branches)) = &d.conclusion.subject else {
                violation(out, path, "case subject must be a case term");
                return;
            };
            let Some(k) = d.selected_branch else {
                violation(out, path, "case must select a branch");
                return;
            };
            if k >= branches.len() {
                violation(out, path, format!("selected branch {k} out of range"));
                return;
            }
            if d.children.len() != 3 {
                violation(
                    out,
                    path,
                    "case takes scrutinee, pattern, and branch-body premises",
                );
                return;
            }
            let (scrut, pat, b) = (&d.children[0], &d.children[1], &d.children[2]);
            if scrut.subject_term() != Some(t) {
                violation(out, path, "case scrutinee premise must type the scrutinee");
                return;
            }
            let Some(m_scrut) = scrut.multi_type() else {
                violation(
                    out,
                    path,
                    "case scrutinee premise must conclude a multiset type",
                );
                return;
            };
            let branch = &branches[k];
            if b.subject_term() != Some(&branch.body) {
                violation(
                    out,
                    path,
                    format!("case body premise must type branch {k}'s body"),
                );
                return;
            }
            let Some(sigma) = b.term_type() else {
                violation(out, path, "case body premise must conclude a term type");
                return;
            };
            let (pi, m) = type_pattern(&branch.pattern, &b.conclusion.context);
            if pat.conclusion != pi.conclusion {
                violation(
                    out,
                    path,
                    format!("case pattern premise must conclude {}", pi.conclusion),
                );
            }
            if *m_scrut != m {
                violation(
                    out,
                    path,
                    format!("scrutinee multiset {m_scrut} does not match the pattern multiset {m}"),
                );
            }
            if d.conclusion.ty != TypeOf::Term(sigma.clone()) {
                violation(out, path, "case must conclude the branch body type");
            }
            let want = b
                .conclusion
                .context
                .remove(&branch.pattern.vars())
                .union(&scrut.conclusion.context);
            if d.conclusion.context != want {
                violation(
                    out,
                    path,
                    "case context must join the body context minus pattern variables with the scrutinee context",
                );
            }
        }
    }
}

impl Derivation {
    fn conclusion_pattern_child(&self, c: &Derivation, want: &Pattern) -> Option<()> {
        match (&c.conclusion.subject, &c.conclusion.ty) {
            (Subject::Pattern(p), TypeOf::Multi(_)) if p == want => Some(()),
            _ => None,
        }
    }
}

/// Verifies that every node's context mentions only variables free in its
/// subject. Holds for every rule-correct derivation; a failure on a
/// checked derivation indicates a checker bug.
pub fn relevance_check(d: &Derivation) -> Result<(), Violation> {
    fn walk(d: &Derivation, path: &mut Vec<usize>) -> Result<(), Violation> {
        let allowed = match &d.conclusion.subject {
            Subject::Term(t) => t.free_vars(),
            Subject::Pattern(p) => p.vars(),
        };
        let dom = d.conclusion.context.domain();
        if let Some(x) = dom.difference(&allowed).next() {
            return Err(Violation {
                path: path.clone(),
                message: format!("context mentions {x}, which is not free in the subject"),
            });
        }
        for (i, c) in d.children.iter().enumerate() {
            path.push(i);
            walk(c, path)?;
            path.pop();
        }
        Ok(())
    }
    walk(d, &mut Vec::new())
}

/// A split or merge request that does not fit the derivation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct InvalidPartition(pub String);

/// Splits a `many`-rooted derivation along a partition of its multiset.
/// Each returned derivation is `many`-rooted, their multisets are the
/// parts, their contexts join to the original, and their sizes sum to the
/// original size.
pub fn split_derivation(
    d: &Derivation,
    parts: &[MultisetType],
) -> Result<Vec<Derivation>, InvalidPartition> {
    if d.rule != RuleLabel::Many {
        return Err(InvalidPartition(
            "split needs a many-rooted derivation".into(),
        ));
    }
    let m = d
        .multi_type()
        .ok_or_else(|| InvalidPartition("split needs a multiset conclusion".into()))?;
    let total = parts
        .iter()
        .fold(MultisetType::empty(), |acc, p| acc.union(p));
    if total != *m {
        return Err(InvalidPartition(format!(
            "parts join to {total}, which is not the conclusion multiset {m}"
        )));
    }
    let t = d.subject_term().expect("many subject is a term").clone();
    let mut remaining: Vec<&Derivation> = d.children.iter().collect();
    let mut out = Vec::with_capacity(parts.len());
    for part in parts {
        let mut chosen = Vec::with_capacity(part.len());
        for ty in part.iter() {
            let idx = remaining
                .iter()
                .position(|c| c.term_type() == Some(ty))
                .ok_or_else(|| InvalidPartition(format!("no unused premise concludes {ty}")))?;
            chosen.push(remaining.swap_remove(idx).clone());
        }
        out.push(Derivation::many(&t, chosen));
    }
    Ok(out)
}

/// Joins `many`-rooted derivations of the same term into one; the inverse
/// of [`split_derivation`] up to child order.
pub fn merge_derivations(parts: &[Derivation]) -> Result<Derivation, InvalidPartition> {
    let first = parts
        .first()
        .ok_or_else(|| InvalidPartition("merge needs at least one derivation".into()))?;
    let t = first
        .subject_term()
        .ok_or_else(|| InvalidPartition("merge needs term judgments".into()))?
        .clone();
    let mut children = Vec::new();
    for p in parts {
        if p.rule != RuleLabel::Many {
            return Err(InvalidPartition(
                "merge needs many-rooted derivations".into(),
            ));
        }
        if p.subject_term() != Some(&t) {
            return Err(InvalidPartition(
                "merge needs derivations of the same term".into(),
            ));
        }
        children.extend(p.children.iter().cloned());
    }
    Ok(Derivation::many(&t, children))
}

/// The input was expected to be a clash.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("term is not a clash")]
pub struct NotAClash;

/// Why no derivation can assign the term a term type: the base clash at
/// the witness position pits two incompatible head types against each
/// other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClashUntypabilityEvidence {
    pub position: RedexPosition,
    pub kind: BaseClashKind,
    pub core: Term,
    pub conflict: String,
}

impl fmt::Display for ClashUntypabilityEvidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "untypable at {}: {} ({})",
            self.position, self.conflict, self.kind
        )
    }
}

/// Builds the head-type conflict that rules out every derivation for a
/// clash. The conflict follows the base clash shape: a type that must be
/// a data type is forced to be an arrow or the other way around, or two
/// distinct constructors are forced to coincide.
pub fn assert_clash_untypable(t: &Term) -> Result<ClashUntypabilityEvidence, NotAClash> {
    let report = is_clash(t);
    let witness = report
        .witness
        .filter(|_| report.is_clash)
        .ok_or(NotAClash)?;
    let core = subterm_at(t, &witness.position)
        .expect("clash witness positions address weak head subterms")
        .clone();
    let conflict = match &witness.kind {
        BaseClashKind::DataApplied { tag } => format!(
            "the function position exposes the constructor {tag}, and a data term only takes \
             a data type, but applying it demands an arrow type"
        ),
        BaseClashKind::AbsAgainstDataPattern { pattern_tag } => format!(
            "the pattern {pattern_tag} forces the argument to a singleton data multiset, but \
             an abstraction only takes an arrow type or *"
        ),
        BaseClashKind::TagMismatch {
            pattern_tag,
            argument_tag,
        } => format!(
            "the pattern forces constructor {pattern_tag} while the argument exposes \
             constructor {argument_tag}"
        ),
        BaseClashKind::AbsScrutinized => "the selected branch pattern forces the scrutinee to \
             a singleton data multiset, but an abstraction only takes an arrow type or *"
            .to_string(),
        BaseClashKind::UnmatchedCaseTag { scrutinee_tag } => format!(
            "the scrutinee exposes the constructor {scrutinee_tag}, which no branch pattern \
             matches"
        ),
    };
    Ok(ClashUntypabilityEvidence {
        position: witness.position,
        kind: witness.kind,
        core,
        conflict,
    })
}
