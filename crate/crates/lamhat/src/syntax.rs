//! Terms, patterns, binding structure, substitution, and alpha-equivalence.
//!
//! Variables are named. Substitution is capture-avoiding with lazy renaming:
//! a binder is renamed only when it would actually capture, and the fresh
//! name is chosen deterministically (smallest `name_N` not in use), so every
//! operation is a pure function with reproducible output.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A constructor tag. Arity is carried inline and checked globally against a
/// [`TagRegistry`]: a tag name has exactly one arity within a program.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tag {
    pub name: String,
    pub arity: usize,
}

impl Tag {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Tag {
            name: name.into(),
            arity,
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// Maps tag names to arities. Arities are fixed at first use; conflicting
/// reuse is an error.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TagRegistry {
    arities: BTreeMap<String, usize>,
}

impl TagRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry with the tags used by the built-in examples and fixtures.
    pub fn standard() -> Self {
        let mut r = Self::new();
        for (name, arity) in [
            ("Pair", 2),
            ("Triple", 3),
            ("Duo", 2),
            ("C0", 0),
            ("C1", 0),
            ("C2", 0),
            ("One", 1),
            ("V", 1),
            ("E", 1),
            ("B", 1),
        ] {
            r.declare(name, arity)
                .expect("standard registry is consistent");
        }
        r
    }

    /// Declares `name` at `arity`, or checks consistency if already known.
    pub fn declare(&mut self, name: &str, arity: usize) -> Result<Tag, ArityConflict> {
        match self.arities.get(name) {
            Some(&known) if known != arity => Err(ArityConflict {
                name: name.to_string(),
                first: known,
                second: arity,
            }),
            _ => {
                self.arities.insert(name.to_string(), arity);
                Ok(Tag::new(name, arity))
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.arities.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.arities.iter().map(|(n, &a)| (n.as_str(), a))
    }
}

/// A tag name was used at two different arities.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("tag {name} used at arity {second} but declared at arity {first}")]
pub struct ArityConflict {
    pub name: String,
    pub first: usize,
    pub second: usize,
}

/// Patterns: a variable or a tag applied to exactly arity-many subpatterns.
/// Patterns are linear; [`well_formed`] enforces it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    Var(String),
    Data(Tag, Vec<Pattern>),
}

impl Pattern {
    pub fn var(name: impl Into<String>) -> Self {
        Pattern::Var(name.into())
    }

    pub fn data(tag: Tag, subpatterns: Vec<Pattern>) -> Self {
        Pattern::Data(tag, subpatterns)
    }

    /// The set of variables the pattern binds.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_into(&mut out);
        out
    }

    fn collect_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Pattern::Var(x) => {
                out.insert(x.clone());
            }
            Pattern::Data(_, ps) => {
                for p in ps {
                    p.collect_into(out);
                }
            }
        }
    }

    /// Binding occurrences in left-to-right order, with duplicates kept.
    pub fn vars_ordered(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Pattern::Var(x) => out.push(x.clone()),
            Pattern::Data(_, ps) => {
                for p in ps {
                    p.collect_vars(out);
                }
            }
        }
    }

    pub fn binds(&self, x: &str) -> bool {
        match self {
            Pattern::Var(y) => y == x,
            Pattern::Data(_, ps) => ps.iter().any(|p| p.binds(x)),
        }
    }

    /// Renames binding occurrences according to `map`.
    pub fn rename(&self, map: &BTreeMap<String, String>) -> Pattern {
        match self {
            Pattern::Var(x) => Pattern::Var(map.get(x).cloned().unwrap_or_else(|| x.clone())),
            Pattern::Data(tag, ps) => {
                Pattern::Data(tag.clone(), ps.iter().map(|p| p.rename(map)).collect())
            }
        }
    }
}

/// One branch of a case expression: a data pattern and a body.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Branch {
    pub pattern: Pattern,
    pub body: Term,
}

/// Terms of the calculus.
///
/// `Match(body, pattern, arg)` is the matching closure written `body[pattern/arg]`:
/// the pattern binds in `body` only, never in `arg`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Abs(Pattern, Box<Term>),
    App(Box<Term>, Box<Term>),
    Match(Box<Term>, Pattern, Box<Term>),
    Data(Tag, Vec<Term>),
    Case(Box<Term>, Vec<Branch>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn abs(pattern: Pattern, body: Term) -> Self {
        Term::Abs(pattern, Box::new(body))
    }

    pub fn app(fun: Term, arg: Term) -> Self {
        Term::App(Box::new(fun), Box::new(arg))
    }

    pub fn match_closure(body: Term, pattern: Pattern, arg: Term) -> Self {
        Term::Match(Box::new(body), pattern, Box::new(arg))
    }

    pub fn data(tag: Tag, args: Vec<Term>) -> Self {
        Term::Data(tag, args)
    }

    pub fn case(scrutinee: Term, branches: Vec<Branch>) -> Self {
        Term::Case(Box::new(scrutinee), branches)
    }

    /// The identity abstraction `\x. x`.
    pub fn ident() -> Self {
        Term::abs(Pattern::var("x"), Term::var("x"))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        free_vars_into(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }
}

/// Number of free occurrences of `x` in `t`.
pub fn free_occurrences(t: &Term, x: &str) -> usize {
    match t {
        Term::Var(y) => usize::from(y == x),
        Term::Abs(p, b) => {
            if p.binds(x) {
                0
            } else {
                free_occurrences(b, x)
            }
        }
        Term::App(f, a) => free_occurrences(f, x) + free_occurrences(a, x),
        Term::Match(b, p, a) => {
            let in_body = if p.binds(x) {
                0
            } else {
                free_occurrences(b, x)
            };
            in_body + free_occurrences(a, x)
        }
        Term::Data(_, args) => args.iter().map(|a| free_occurrences(a, x)).sum(),
        Term::Case(s, branches) => {
            free_occurrences(s, x)
                + branches
                    .iter()
                    .map(|b| {
                        if b.pattern.binds(x) {
                            0
                        } else {
                            free_occurrences(&b.body, x)
                        }
                    })
                    .sum::<usize>()
        }
    }
}

/// Number of term nodes in `t`, not counting pattern nodes.
pub fn term_size(t: &Term) -> usize {
    match t {
        Term::Var(_) => 1,
        Term::Abs(_, b) => 1 + term_size(b),
        Term::App(f, a) => 1 + term_size(f) + term_size(a),
        Term::Match(b, _, a) => 1 + term_size(b) + term_size(a),
        Term::Data(_, args) => 1 + args.iter().map(term_size).sum::<usize>(),
        Term::Case(s, branches) => {
            1 + term_size(s) + branches.iter().map(|b| term_size(&b.body)).sum::<usize>()
        }
    }
}

fn free_vars_into(t: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(x) => {
            if !bound.iter().any(|b| b == x) {
                out.insert(x.clone());
            }
        }
        Term::Abs(p, b) => {
            let n = push_pattern(bound, p);
            free_vars_into(b, bound, out);
            bound.truncate(bound.len() - n);
        }
        Term::App(f, a) => {
            free_vars_into(f, bound, out);
            free_vars_into(a, bound, out);
        }
        Term::Match(b, p, a) => {
            let n = push_pattern(bound, p);
            free_vars_into(b, bound, out);
            bound.truncate(bound.len() - n);
            free_vars_into(a, bound, out);
        }
        Term::Data(_, args) => {
            for a in args {
                free_vars_into(a, bound, out);
            }
        }
        Term::Case(s, branches) => {
            free_vars_into(s, bound, out);
            for br in branches {
                let n = push_pattern(bound, &br.pattern);
                free_vars_into(&br.body, bound, out);
                bound.truncate(bound.len() - n);
            }
        }
    }
}

fn push_pattern(bound: &mut Vec<String>, p: &Pattern) -> usize {
    let vars = p.vars_ordered();
    let n = vars.len();
    bound.extend(vars);
    n
}

/// Every name occurring in a term: free, bound, and binding occurrences.
/// Fresh-name choices avoid this whole set so that renaming can never be
/// captured by an inner binder.
pub fn all_names(t: &Term) -> BTreeSet<String> {
    fn go(t: &Term, out: &mut BTreeSet<String>) {
        match t {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Abs(p, b) => {
                out.extend(p.vars());
                go(b, out);
            }
            Term::App(f, a) => {
                go(f, out);
                go(a, out);
            }
            Term::Match(b, p, a) => {
                go(b, out);
                out.extend(p.vars());
                go(a, out);
            }
            Term::Data(_, args) => args.iter().for_each(|a| go(a, out)),
            Term::Case(s, branches) => {
                go(s, out);
                for br in branches {
                    out.extend(br.pattern.vars());
                    go(&br.body, out);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    go(t, &mut out);
    out
}

/// Smallest name of the form `stem` or `stem_N` not present in `avoid`.
/// The stem of `x_3` is `x`, so repeated renaming does not pile up suffixes.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem = match base.rsplit_once('_') {
        Some((s, digits)) if !s.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) => s,
        _ => base,
    };
    if !avoid.contains(stem) {
        return stem.to_string();
    }
    for k in 1.. {
        let candidate = format!("{stem}_{k}");
        if !avoid.contains(&candidate) {
            return candidate;
        }
    }
    unreachable!()
}

/// Renames the binders of `p` listed in `clashing` to fresh names, rewriting
/// their occurrences inside `body`. Returns the renamed pattern, body, and
/// the mapping used.
pub fn rename_binders(
    p: &Pattern,
    body: &Term,
    clashing: &BTreeSet<String>,
    avoid: &BTreeSet<String>,
) -> (Pattern, Term, BTreeMap<String, String>) {
    let mut map = BTreeMap::new();
    let mut avoid = avoid.clone();
    avoid.extend(all_names(body));
    avoid.extend(p.vars());
    for v in p.vars() {
        if clashing.contains(&v) {
            let fresh = fresh_name(&v, &avoid);
            avoid.insert(fresh.clone());
            map.insert(v, fresh);
        }
    }
    if map.is_empty() {
        return (p.clone(), body.clone(), map);
    }
    let p2 = p.rename(&map);
    let body2 = rename_free(body, &map);
    (p2, body2, map)
}

/// Renames free occurrences of the mapped variables. The replacement names
/// must not occur in `t` at all (callers pick them fresh), so no capture
/// check is needed beyond stopping at shadowing binders.
pub fn rename_free(t: &Term, map: &BTreeMap<String, String>) -> Term {
    if map.is_empty() {
        return t.clone();
    }
    match t {
        Term::Var(x) => Term::Var(map.get(x).cloned().unwrap_or_else(|| x.clone())),
        Term::Abs(p, b) => {
            let inner = shadow(map, p);
            Term::Abs(p.clone(), Box::new(rename_free(b, &inner)))
        }
        Term::App(f, a) => Term::app(rename_free(f, map), rename_free(a, map)),
        Term::Match(b, p, a) => {
            let inner = shadow(map, p);
            Term::Match(
                Box::new(rename_free(b, &inner)),
                p.clone(),
                Box::new(rename_free(a, map)),
            )
        }
        Term::Data(tag, args) => Term::Data(
            tag.clone(),
            args.iter().map(|a| rename_free(a, map)).collect(),
        ),
        Term::Case(s, branches) => Term::Case(
            Box::new(rename_free(s, map)),
            branches
                .iter()
                .map(|br| {
                    let inner = shadow(map, &br.pattern);
                    Branch {
                        pattern: br.pattern.clone(),
                        body: rename_free(&br.body, &inner),
                    }
                })
                .collect(),
        ),
    }
}

fn shadow(map: &BTreeMap<String, String>, p: &Pattern) -> BTreeMap<String, String> {
    let mut inner = map.clone();
    for v in p.vars() {
        inner.remove(&v);
    }
    inner
}

/// Capture-avoiding substitution `t{x/u}`.
pub fn substitute(t: &Term, x: &str, u: &Term) -> Term {
    match t {
        Term::Var(y) => {
            if y == x {
                u.clone()
            } else {
                t.clone()
            }
        }
        Term::App(f, a) => Term::app(substitute(f, x, u), substitute(a, x, u)),
        Term::Data(tag, args) => Term::Data(
            tag.clone(),
            args.iter().map(|a| substitute(a, x, u)).collect(),
        ),
        Term::Abs(p, b) => {
            let (p2, b2) = subst_under_binder(p, b, x, u);
            Term::Abs(p2, Box::new(b2))
        }
        Term::Match(b, p, a) => {
            let a2 = substitute(a, x, u);
            let (p2, b2) = subst_under_binder(p, b, x, u);
            Term::Match(Box::new(b2), p2, Box::new(a2))
        }
        Term::Case(s, branches) => Term::Case(
            Box::new(substitute(s, x, u)),
            branches
                .iter()
                .map(|br| {
                    let (p2, b2) = subst_under_binder(&br.pattern, &br.body, x, u);
                    Branch {
                        pattern: p2,
                        body: b2,
                    }
                })
                .collect(),
        ),
    }
}

/// Substitution under a pattern binder: skip if shadowed or the variable is
/// not free in the body, rename the binders that would capture `fv(u)`.
fn subst_under_binder(p: &Pattern, body: &Term, x: &str, u: &Term) -> (Pattern, Term) {
    if p.binds(x) || !body.free_vars().contains(x) {
        return (p.clone(), body.clone());
    }
    let fv_u = u.free_vars();
    let clashing: BTreeSet<String> = p.vars().intersection(&fv_u).cloned().collect();
    let mut avoid: BTreeSet<String> = fv_u;
    avoid.extend(all_names(u));
    avoid.insert(x.to_string());
    let (p2, body2, _) = rename_binders(p, body, &clashing, &avoid);
    (p2, substitute(&body2, x, u))
}

/// Alpha-equivalence: equality up to consistent renaming of bound variables.
pub fn alpha_eq(t: &Term, u: &Term) -> bool {
    alpha_canonical(t) == alpha_canonical(u)
}

/// Canonical representative of the alpha-equivalence class: binders are
/// renamed to `#0`, `#1`, ... in traversal order. The `#` prefix cannot be
/// produced by the parser, so canonical names never collide with free names.
pub fn alpha_canonical(t: &Term) -> Term {
    fn canon(t: &Term, env: &BTreeMap<String, String>, next: &mut usize) -> Term {
        match t {
            Term::Var(x) => Term::Var(env.get(x).cloned().unwrap_or_else(|| x.clone())),
            Term::App(f, a) => Term::app(canon(f, env, next), canon(a, env, next)),
            Term::Data(tag, args) => Term::Data(
                tag.clone(),
                args.iter().map(|a| canon(a, env, next)).collect(),
            ),
            Term::Abs(p, b) => {
                let (p2, env2) = canon_pattern(p, env, next);
                Term::Abs(p2, Box::new(canon(b, &env2, next)))
            }
            Term::Match(b, p, a) => {
                let a2 = canon(a, env, next);
                let (p2, env2) = canon_pattern(p, env, next);
                Term::Match(Box::new(canon(b, &env2, next)), p2, Box::new(a2))
            }
            Term::Case(s, branches) => Term::Case(
                Box::new(canon(s, env, next)),
                branches
                    .iter()
                    .map(|br| {
                        let (p2, env2) = canon_pattern(&br.pattern, env, next);
                        Branch {
                            pattern: p2,
                            body: canon(&br.body, &env2, next),
                        }
                    })
                    .collect(),
            ),
        }
    }

    fn canon_pattern(
        p: &Pattern,
        env: &BTreeMap<String, String>,
        next: &mut usize,
    ) -> (Pattern, BTreeMap<String, String>) {
        let mut env2 = env.clone();
        let mut map = BTreeMap::new();
        for v in p.vars_ordered() {
            let fresh = format!("#{next}");
            *next += 1;
            env2.insert(v.clone(), fresh.clone());
            map.insert(v, fresh);
        }
        (p.rename(&map), env2)
    }

    canon(t, &BTreeMap::new(), &mut 0)
}

/// A stack of matching frames around a hole: `L ::= <> | L[p/t]`.
/// `frames[0]` is the innermost frame, so plugging `core` yields
/// `core[p0/t0][p1/t1]...`. A frame's pattern binds everything to its left
/// (the core and all earlier frames), never its own or later arguments.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ListContext {
    pub frames: Vec<(Pattern, Term)>,
}

impl ListContext {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn plug(&self, core: Term) -> Term {
        self.frames.iter().fold(core, |acc, (p, u)| {
            Term::Match(Box::new(acc), p.clone(), Box::new(u.clone()))
        })
    }

    /// The bound variables of the context: all frame pattern variables.
    pub fn bound_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (p, _) in &self.frames {
            out.extend(p.vars());
        }
        out
    }
}

/// Peels the maximal suffix of matching frames: `t = L[core]` with `core`
/// not a matching closure. Plugging the result back reconstructs `t`.
pub fn decompose_list_context(t: &Term) -> (ListContext, Term) {
    let mut frames = Vec::new();
    let mut cur = t;
    while let Term::Match(b, p, a) = cur {
        frames.push((p.clone(), (**a).clone()));
        cur = b;
    }
    frames.reverse();
    (ListContext { frames }, cur.clone())
}

/// The core of `t` under its matching-frame suffix, without cloning.
pub fn match_core(t: &Term) -> &Term {
    let mut cur = t;
    while let Term::Match(b, _, _) = cur {
        cur = b;
    }
    cur
}

/// `abs(t)`: t is an abstraction under matching frames, `t = L[\p. u]`.
pub fn is_abs(t: &Term) -> bool {
    matches!(match_core(t), Term::Abs(_, _))
}

/// `case(t)`: t is a case expression under matching frames.
pub fn is_case(t: &Term) -> bool {
    matches!(match_core(t), Term::Case(_, _))
}

/// `const_c(t)`: t is a tagged product under matching frames, `t = L[c(..)]`;
/// returns the tag when so.
pub fn const_tag(t: &Term) -> Option<&Tag> {
    match match_core(t) {
        Term::Data(tag, _) => Some(tag),
        _ => None,
    }
}

/// Well-formedness violations. Each names the offending subterm or pattern
/// in concrete syntax.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WfViolation {
    #[error("arity mismatch: tag {tag} applied to {found} argument(s) in `{offender}`")]
    ArityMismatch {
        tag: Tag,
        found: usize,
        offender: String,
    },
    #[error("tag {name} used at arity {second} but registered at arity {first}")]
    UnknownArity {
        name: String,
        first: usize,
        second: usize,
    },
    #[error("nonlinear pattern: variable {var} bound twice in `{offender}`")]
    NonlinearPattern { var: String, offender: String },
    #[error("duplicate branch tag {tag} in `{offender}`")]
    DuplicateBranchTag { tag: String, offender: String },
    #[error("branch pattern `{pattern}` is not a data pattern in `{offender}`")]
    BranchPatternNotData { pattern: String, offender: String },
    #[error("case expression with no branches: `{offender}`")]
    EmptyCase { offender: String },
}

/// Checks registry arities for every data node and pattern, pattern
/// linearity, branch patterns being data patterns with pairwise-distinct
/// tags, and non-empty branch lists.
pub fn well_formed(t: &Term, registry: &TagRegistry) -> Result<(), Vec<WfViolation>> {
    let mut out = Vec::new();
    check_term(t, registry, &mut out);
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn check_tag(
    tag: &Tag,
    found: usize,
    offender: String,
    registry: &TagRegistry,
    out: &mut Vec<WfViolation>,
) {
    if tag.arity != found {
        out.push(WfViolation::ArityMismatch {
            tag: tag.clone(),
            found,
            offender: offender.clone(),
        });
    }
    match registry.get(&tag.name) {
        Some(a) if a != tag.arity => out.push(WfViolation::UnknownArity {
            name: tag.name.clone(),
            first: a,
            second: tag.arity,
        }),
        _ => {}
    }
}

fn check_pattern(p: &Pattern, registry: &TagRegistry, out: &mut Vec<WfViolation>) {
    let mut seen = BTreeSet::new();
    for v in p.vars_ordered() {
        if !seen.insert(v.clone()) {
            out.push(WfViolation::NonlinearPattern {
                var: v,
                offender: p.to_string(),
            });
        }
    }
    fn arity_walk(p: &Pattern, registry: &TagRegistry, out: &mut Vec<WfViolation>) {
        if let Pattern::Data(tag, ps) = p {
            check_tag(tag, ps.len(), p.to_string(), registry, out);
            for sub in ps {
                arity_walk(sub, registry, out);
            }
        }
    }
    arity_walk(p, registry, out);
}

fn check_term(t: &Term, registry: &TagRegistry, out: &mut Vec<WfViolation>) {
    match t {
        Term::Var(_) => {}
        Term::Abs(p, b) => {
            check_pattern(p, registry, out);
            check_term(b, registry, out);
        }
        Term::App(f, a) => {
            check_term(f, registry, out);
            check_term(a, registry, out);
        }
        Term::Match(b, p, a) => {
            check_pattern(p, registry, out);
            check_term(b, registry, out);
            check_term(a, registry, out);
        }
        Term::Data(tag, args) => {
            check_tag(tag, args.len(), t.to_string(), registry, out);
            for a in args {
                check_term(a, registry, out);
            }
        }
        Term::Case(s, branches) => {
            check_term(s, registry, out);
            if branches.is_empty() {
                out.push(WfViolation::EmptyCase {
                    offender: t.to_string(),
                });
            }
            let mut tags = BTreeSet::new();
            for br in branches {
                match &br.pattern {
                    Pattern::Data(tag, _) => {
                        if !tags.insert(tag.name.clone()) {
                            out.push(WfViolation::DuplicateBranchTag {
                                tag: tag.name.clone(),
                                offender: t.to_string(),
                            });
                        }
                    }
                    Pattern::Var(_) => out.push(WfViolation::BranchPatternNotData {
                        pattern: br.pattern.to_string(),
                        offender: t.to_string(),
                    }),
                }
                check_pattern(&br.pattern, registry, out);
                check_term(&br.body, registry, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg() -> TagRegistry {
        TagRegistry::standard()
    }

    fn tag(name: &str) -> Tag {
        let r = reg();
        Tag::new(name, r.get(name).unwrap())
    }

    #[test]
    fn free_vars_abs_removes_binder() {
        // \x. x y  has free variables {y}
        let t = Term::abs(Pattern::var("x"), Term::app(Term::var("x"), Term::var("y")));
        let fv = t.free_vars();
        assert_eq!(fv.into_iter().collect::<Vec<_>>(), vec!["y".to_string()]);
    }

    #[test]
    fn free_vars_case_removes_branch_binders() {
        // case w of { Pair(x, y) -> x z }  has free variables {w, z}
        let t = Term::case(
            Term::var("w"),
            vec![Branch {
                pattern: Pattern::data(tag("Pair"), vec![Pattern::var("x"), Pattern::var("y")]),
                body: Term::app(Term::var("x"), Term::var("z")),
            }],
        );
        let fv: Vec<_> = t.free_vars().into_iter().collect();
        assert_eq!(fv, vec!["w".to_string(), "z".to_string()]);
    }

    #[test]
    fn free_vars_match_removes_pattern_vars_from_body_only() {
        // y[Pair(x,y)/Duo(t,u)] with closed frame argument: fv = {} from the
        // body side, plus fv of the argument.
        let arg = Term::data(
            tag("Duo"),
            vec![Term::data(tag("C0"), vec![]), Term::data(tag("C1"), vec![])],
        );
        let t = Term::match_closure(
            Term::var("y"),
            Pattern::data(tag("Pair"), vec![Pattern::var("x"), Pattern::var("y")]),
            arg,
        );
        assert!(t.free_vars().is_empty());
    }

    #[test]
    fn substitute_simple() {
        let c0 = Term::data(tag("C0"), vec![]);
        assert_eq!(substitute(&Term::var("x"), "x", &c0), c0);
    }

    #[test]
    fn substitute_avoids_capture() {
        // (\y. x){x/y} must rename the binder: \y_1. y
        let t = Term::abs(Pattern::var("y"), Term::var("x"));
        let r = substitute(&t, "x", &Term::var("y"));
        match r {
            Term::Abs(Pattern::Var(b), body) => {
                assert_ne!(b, "y");
                assert_eq!(*body, Term::var("y"));
            }
            other => panic!("unexpected shape {other:?}"),
        }
    }

    #[test]
    fn substitute_no_op_when_not_free() {
        let t = Term::abs(Pattern::var("x"), Term::var("x"));
        assert_eq!(substitute(&t, "z", &Term::var("w")), t);
    }

    #[test]
    fn alpha_eq_basics() {
        let i1 = Term::abs(Pattern::var("x"), Term::var("x"));
        let i2 = Term::abs(Pattern::var("y"), Term::var("y"));
        assert!(alpha_eq(&i1, &i2));
        let t1 = Term::abs(Pattern::var("x"), Term::app(Term::var("x"), Term::var("y")));
        let t2 = Term::abs(Pattern::var("z"), Term::app(Term::var("z"), Term::var("w")));
        assert!(!alpha_eq(&t1, &t2));
    }

    #[test]
    fn alpha_eq_branch_binders() {
        let c0 = Term::data(tag("C0"), vec![]);
        let mk = |a: &str, b: &str| {
            Term::case(
                c0.clone(),
                vec![Branch {
                    pattern: Pattern::data(tag("Pair"), vec![Pattern::var(a), Pattern::var(b)]),
                    body: Term::var(a),
                }],
            )
        };
        assert!(alpha_eq(&mk("a", "b"), &mk("u", "v")));
    }

    #[test]
    fn decompose_and_replug() {
        let core = Term::abs(Pattern::var("p"), Term::var("p"));
        let t = Term::match_closure(
            Term::match_closure(core.clone(), Pattern::var("x"), Term::var("u")),
            Pattern::var("y"),
            Term::var("v"),
        );
        let (l, c) = decompose_list_context(&t);
        assert_eq!(c, core);
        assert_eq!(l.frames.len(), 2);
        assert_eq!(l.plug(c), t);
        assert!(is_abs(&t));
        assert!(!is_case(&t));
        assert_eq!(const_tag(&t), None);
    }

    #[test]
    fn well_formed_catches_violations() {
        let r = reg();
        let bad_arity = Term::data(Tag::new("Pair", 2), vec![Term::ident()]);
        assert!(matches!(
            well_formed(&bad_arity, &r).unwrap_err()[0],
            WfViolation::ArityMismatch { .. }
        ));

        let dup = Term::case(
            Term::var("t"),
            vec![
                Branch {
                    pattern: Pattern::data(tag("One"), vec![Pattern::var("x")]),
                    body: Term::var("x"),
                },
                Branch {
                    pattern: Pattern::data(tag("One"), vec![Pattern::var("y")]),
                    body: Term::var("y"),
                },
            ],
        );
        assert!(well_formed(&dup, &r)
            .unwrap_err()
            .iter()
            .any(|v| matches!(v, WfViolation::DuplicateBranchTag { .. })));

        let nonlinear = Term::abs(
            Pattern::data(tag("Pair"), vec![Pattern::var("x"), Pattern::var("x")]),
            Term::var("x"),
        );
        assert!(well_formed(&nonlinear, &r)
            .unwrap_err()
            .iter()
            .any(|v| matches!(v, WfViolation::NonlinearPattern { .. })));
    }

    #[test]
    fn size_and_occurrence_counting() {
        let t = Term::app(
            Term::abs(Pattern::var("x"), Term::app(Term::var("x"), Term::var("x"))),
            Term::var("x"),
        );
        assert_eq!(term_size(&t), 6);
        assert_eq!(
            free_occurrences(&t, "x"),
            1,
            "the abstraction shadows its body"
        );

        let m = Term::match_closure(
            Term::app(Term::var("x"), Term::var("x")),
            Pattern::var("x"),
            Term::var("x"),
        );
        assert_eq!(
            free_occurrences(&m, "x"),
            1,
            "the pattern binds the body, not the argument"
        );

        let c = Term::case(
            Term::var("x"),
            vec![
                Branch {
                    pattern: Pattern::data(tag("One"), vec![Pattern::var("x")]),
                    body: Term::var("x"),
                },
                Branch {
                    pattern: Pattern::data(tag("Pair"), vec![Pattern::var("a"), Pattern::var("b")]),
                    body: Term::var("x"),
                },
            ],
        );
        assert_eq!(
            free_occurrences(&c, "x"),
            2,
            "only the unshadowed branch body counts"
        );
        assert_eq!(term_size(&c), 4);
    }
}
