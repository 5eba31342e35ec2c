//! Weak head reduction.
//!
//! Four base rules fire under weak head contexts
//! `H ::= <> | H t | H[p/u] | t[P/H] | case H of bs` (the match-argument
//! position only for data patterns `P`):
//!
//! - `dB`: `L[\p.t] u` steps to `L[t[p/u]]`
//! - `m`:  `t[c(p1..pn)/L[c(u1..un)]]` steps to `L[t[p1/u1]..[pn/un]]`
//! - `c`:  `case L[c(us)] of {.. c(ps)->tk ..}` steps to `L[tk[p1/u1]..]`
//! - `e`:  `t[x/u]` steps to `t{x/u}`
//!
//! where `L` is a stack of matching frames. The frames' binders are renamed
//! apart from anything moved into their scope, and the pattern variables of
//! `m`/`c` are renamed apart from the matched arguments before the chain is
//! built, so a later frame's pattern never captures an earlier frame's
//! argument.
//!
//! [`enumerate_redexes`] lists every redex leftmost-outermost; [`step_det`]
//! follows the deterministic strategy (first reduce the function, then the
//! match body, then the match argument, then the scrutinee) and always picks
//! the first enumerated redex.

use std::collections::BTreeSet;
use std::fmt;

use crate::syntax::{
    all_names, const_tag, decompose_list_context, free_occurrences, is_abs, rename_binders,
    substitute, term_size, Pattern, Tag, Term,
};

/// Default step budget used by the command line.
pub const DEFAULT_FUEL: usize = 10_000;

/// Internal work budget for exhaustive path enumeration. Visiting a term
/// costs one unit; recording a finished trace costs one unit per term node
/// stored, so the budget also caps the memory the result can occupy.
pub const PATH_BUDGET: usize = 1_000_000;

/// Internal term size ceiling for exhaustive path enumeration. Matching
/// closures duplicate their argument once per pattern variable occurrence,
/// so intermediate terms can grow exponentially along a path; enumeration
/// gives up rather than materialize them.
pub const PATH_TERM_BUDGET: usize = 20_000;

/// The four base reduction rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleName {
    DB,
    C,
    M,
    E,
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleName::DB => "dB",
            RuleName::C => "c",
            RuleName::M => "m",
            RuleName::E => "e",
        };
        write!(f, "{s}")
    }
}

/// One descent through a weak head context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PosStep {
    /// Into the function of an application.
    AppFun,
    /// Into the body of a matching closure.
    MatchBody,
    /// Into the argument of a matching closure with a data pattern.
    MatchArg,
    /// Into the scrutinee of a case expression.
    CaseScrut,
}

impl PosStep {
    fn label(self) -> &'static str {
        match self {
            PosStep::AppFun => "fun",
            PosStep::MatchBody => "body",
            PosStep::MatchArg => "arg",
            PosStep::CaseScrut => "scrut",
        }
    }
}

/// A path through weak head contexts, from the root to a redex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct RedexPosition(pub Vec<PosStep>);

impl RedexPosition {
    pub fn root() -> Self {
        Self::default()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for RedexPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "here");
        }
        for (i, seg) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{}", seg.label())?;
        }
        Ok(())
    }
}

/// The subterm of `t` at a weak head position, if the path is valid for `t`.
pub fn subterm_at<'a>(t: &'a Term, pos: &RedexPosition) -> Option<&'a Term> {
    let mut cur = t;
    for seg in &pos.0 {
        cur = match (seg, cur) {
            (PosStep::AppFun, Term::App(f, _)) => f,
            (PosStep::MatchBody, Term::Match(b, _, _)) => b,
            (PosStep::MatchArg, Term::Match(_, Pattern::Data(_, _), a)) => a,
            (PosStep::CaseScrut, Term::Case(s, _)) => s,
            _ => return None,
        };
    }
    Some(cur)
}

/// One reduction step, recorded over whole terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub rule: RuleName,
    pub position: RedexPosition,
    pub before: Term,
    pub after: Term,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} @ {} : {} --> {}",
            self.rule, self.position, self.before, self.after
        )
    }
}

/// Per-rule step counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counters {
    pub b: usize,
    pub c: usize,
    pub m: usize,
    pub e: usize,
}

impl Counters {
    pub fn total(&self) -> usize {
        self.b + self.c + self.m + self.e
    }

    fn count(&mut self, rule: RuleName) {
        match rule {
            RuleName::DB => self.b += 1,
            RuleName::C => self.c += 1,
            RuleName::M => self.m += 1,
            RuleName::E => self.e += 1,
        }
    }
}

impl fmt::Display for Counters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.b, self.c, self.m, self.e)
    }
}

/// A reduction sequence with per-rule counters.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    pub steps: Vec<Step>,
    pub counters: Counters,
}

impl Trace {
    pub fn new(steps: Vec<Step>) -> Self {
        let mut counters = Counters::default();
        for s in &steps {
            counters.count(s.rule);
        }
        Trace { steps, counters }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// One line per step plus the final `steps=(b,c,m,e)` counter line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&s.to_string());
            out.push('\n');
        }
        out.push_str(&format!("steps={}", self.counters));
        out
    }
}

/// Rule firing at the root of `t`, if any. `m` requires the argument tag to
/// match the pattern tag; `e` has no side condition.
fn root_rule(t: &Term) -> Option<RuleName> {
    match t {
        Term::App(f, _) if is_abs(f) => Some(RuleName::DB),
        Term::Match(_, Pattern::Var(_), _) => Some(RuleName::E),
        Term::Match(_, Pattern::Data(tag, _), a) if const_tag(a) == Some(tag) => Some(RuleName::M),
        Term::Case(s, branches) => {
            let c = const_tag(s)?;
            branches
                .iter()
                .any(|b| matches!(&b.pattern, Pattern::Data(tag, _) if tag == c))
                .then_some(RuleName::C)
        }
        _ => None,
    }
}

/// All redex occurrences in `t`, leftmost-outermost: the root rule first,
/// then the function, then the match body before the match argument, then
/// the scrutinee.
pub fn enumerate_redexes(t: &Term) -> Vec<(RedexPosition, RuleName)> {
    fn walk(t: &Term, path: &mut Vec<PosStep>, out: &mut Vec<(RedexPosition, RuleName)>) {
        if let Some(rule) = root_rule(t) {
            out.push((RedexPosition(path.clone()), rule));
        }
        match t {
            Term::App(f, _) => {
                path.push(PosStep::AppFun);
                walk(f, path, out);
                path.pop();
            }
            Term::Match(b, p, a) => {
                path.push(PosStep::MatchBody);
                walk(b, path, out);
                path.pop();
                if matches!(p, Pattern::Data(_, _)) {
                    path.push(PosStep::MatchArg);
                    walk(a, path, out);
                    path.pop();
                }
            }
            Term::Case(s, _) => {
                path.push(PosStep::CaseScrut);
                walk(s, path, out);
                path.pop();
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk(t, &mut Vec::new(), &mut out);
    out
}

/// Renames the matching-frame binders along the spine of `t` apart from
/// `avoid`, so a term can be moved under those frames without capture.
fn refresh_frames(t: &Term, avoid: &BTreeSet<String>) -> Term {
    match t {
        Term::Match(b, p, a) => {
            let b2 = refresh_frames(b, avoid);
            let clashing: BTreeSet<String> = p.vars().intersection(avoid).cloned().collect();
            let (p2, b3, _) = rename_binders(p, &b2, &clashing, avoid);
            Term::Match(Box::new(b3), p2, Box::new((**a).clone()))
        }
        _ => t.clone(),
    }
}

/// `L[\p.b] u` to `L[b[p/u]]`: the argument moves under the frames.
fn fire_db(t: &Term) -> Option<Term> {
    let Term::App(f, u) = t else { return None };
    if !is_abs(f) {
        return None;
    }
    let f2 = refresh_frames(f, &u.free_vars());
    let (l, core) = decompose_list_context(&f2);
    let Term::Abs(p, body) = core else {
        unreachable!("is_abs checked the core")
    };
    Some(l.plug(Term::Match(body, p, Box::new((**u).clone()))))
}

/// Builds `L[body[p1/u1]..[pn/un]]` from `body`, the subpatterns of a
/// matched data pattern, and the matched argument `arg = L[c(us)]`. Shared
/// by the `m` and `c` rules. The body moves under `L`'s frames, and each
/// pattern binds everything to its left in the chain, so both the frame
/// binders and the pattern variables are renamed apart first.
fn distribute_match(body: &Term, tag: &Tag, pats: &[Pattern], arg: &Term) -> Option<Term> {
    if const_tag(arg) != Some(tag) {
        return None;
    }
    let whole_pat = Pattern::Data(tag.clone(), pats.to_vec());
    let mut frame_avoid = body.free_vars();
    frame_avoid.extend(whole_pat.vars());
    let arg2 = refresh_frames(arg, &frame_avoid);
    let (l, core) = decompose_list_context(&arg2);
    let Term::Data(_, args) = core else {
        unreachable!("const_tag checked the core")
    };
    debug_assert_eq!(pats.len(), args.len(), "well-formed terms agree on arity");

    let mut arg_fv = BTreeSet::new();
    for a in &args {
        arg_fv.extend(a.free_vars());
    }
    let clashing: BTreeSet<String> = whole_pat.vars().intersection(&arg_fv).cloned().collect();
    let mut pat_avoid = all_names(&arg2);
    pat_avoid.extend(arg_fv);
    let (pat2, body2, _) = rename_binders(&whole_pat, body, &clashing, &pat_avoid);
    let Pattern::Data(_, pats2) = pat2 else {
        unreachable!("rename preserves shape")
    };

    let chain = pats2.into_iter().zip(args).fold(body2, |acc, (p, u)| {
        Term::Match(Box::new(acc), p, Box::new(u))
    });
    Some(l.plug(chain))
}

fn fire_m(t: &Term) -> Option<Term> {
    let Term::Match(body, Pattern::Data(tag, pats), arg) = t else {
        return None;
    };
    distribute_match(body, tag, pats, arg)
}

fn fire_c(t: &Term) -> Option<Term> {
    let Term::Case(scrut, branches) = t else {
        return None;
    };
    let c = const_tag(scrut)?.clone();
    let branch = branches
        .iter()
        .find(|b| matches!(&b.pattern, Pattern::Data(tag, _) if *tag == c))?;
    let Pattern::Data(tag, pats) = &branch.pattern else {
        unreachable!("find matched a data pattern")
    };
    distribute_match(&branch.body, tag, pats, scrut)
}

fn fire_e(t: &Term) -> Option<Term> {
    let Term::Match(body, Pattern::Var(x), arg) = t else {
        return None;
    };
    Some(substitute(body, x, arg))
}

fn fire(t: &Term, rule: RuleName) -> Option<Term> {
    match rule {
        RuleName::DB => fire_db(t),
        RuleName::M => fire_m(t),
        RuleName::C => fire_c(t),
        RuleName::E => fire_e(t),
    }
}

/// The given rule does not apply at the given position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("rule {rule} does not apply at position {position}")]
pub struct NotARedex {
    pub rule: RuleName,
    pub position: RedexPosition,
}

/// Performs one step of `rule` at `pos`. The pair must be a redex occurrence
/// as returned by [`enumerate_redexes`].
pub fn apply_at(t: &Term, pos: &RedexPosition, rule: RuleName) -> Result<Term, NotARedex> {
    fn go(t: &Term, path: &[PosStep], rule: RuleName) -> Option<Term> {
        let Some((seg, rest)) = path.split_first() else {
            return fire(t, rule);
        };
        match (seg, t) {
            (PosStep::AppFun, Term::App(f, u)) => {
                Some(Term::App(Box::new(go(f, rest, rule)?), u.clone()))
            }
            (PosStep::MatchBody, Term::Match(b, p, a)) => Some(Term::Match(
                Box::new(go(b, rest, rule)?),
                p.clone(),
                a.clone(),
            )),
            (PosStep::MatchArg, Term::Match(b, p @ Pattern::Data(_, _), a)) => Some(Term::Match(
                b.clone(),
                p.clone(),
                Box::new(go(a, rest, rule)?),
            )),
            (PosStep::CaseScrut, Term::Case(s, branches)) => {
                Some(Term::Case(Box::new(go(s, rest, rule)?), branches.clone()))
            }
            _ => None,
        }
    }
    go(t, &pos.0, rule).ok_or(NotARedex {
        rule,
        position: pos.clone(),
    })
}

/// The redex the deterministic strategy fires, if any: reduce at the root
/// when possible, otherwise descend into the function, then the match body,
/// then the match argument (for data patterns with an unmatched argument),
/// then the scrutinee. Picks exactly the first redex of
/// [`enumerate_redexes`].
pub fn det_redex(t: &Term) -> Option<(RedexPosition, RuleName)> {
    fn descend(
        t: &Term,
        seg: PosStep,
        path: &mut Vec<PosStep>,
    ) -> Option<(RedexPosition, RuleName)> {
        path.push(seg);
        let found = go(t, path);
        path.pop();
        found
    }
    fn go(t: &Term, path: &mut Vec<PosStep>) -> Option<(RedexPosition, RuleName)> {
        if let Some(rule) = root_rule(t) {
            return Some((RedexPosition(path.clone()), rule));
        }
        match t {
            Term::App(f, _) => descend(f, PosStep::AppFun, path),
            Term::Match(b, Pattern::Data(_, _), a) => {
                descend(b, PosStep::MatchBody, path).or_else(|| descend(a, PosStep::MatchArg, path))
            }
            Term::Case(s, _) => descend(s, PosStep::CaseScrut, path),
            _ => None,
        }
    }
    go(t, &mut Vec::new())
}

/// One deterministic step, with the base rule that fired.
pub fn step_det(t: &Term) -> Option<(Term, RuleName)> {
    let (pos, rule) = det_redex(t)?;
    let next = apply_at(t, &pos, rule).expect("det_redex returns a valid redex");
    Some((next, rule))
}

/// True when the deterministic strategy stops, equivalently when there is no
/// weak head redex at all.
pub fn is_weak_head_normal(t: &Term) -> bool {
    det_redex(t).is_none()
}

/// Result of running the deterministic strategy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalOutcome {
    Normal { term: Term, trace: Trace },
    OutOfFuel { trace: Trace },
}

impl EvalOutcome {
    pub fn trace(&self) -> &Trace {
        match self {
            EvalOutcome::Normal { trace, .. } | EvalOutcome::OutOfFuel { trace } => trace,
        }
    }
}

/// Iterates [`step_det`] for at most `fuel` steps.
pub fn evaluate(t: &Term, fuel: usize) -> EvalOutcome {
    let mut cur = t.clone();
    let mut steps = Vec::new();
    for _ in 0..fuel {
        match det_redex(&cur) {
            None => {
                return EvalOutcome::Normal {
                    term: cur,
                    trace: Trace::new(steps),
                }
            }
            Some((pos, rule)) => {
                let next = apply_at(&cur, &pos, rule).expect("det_redex returns a valid redex");
                steps.push(Step {
                    rule,
                    position: pos,
                    before: cur,
                    after: next.clone(),
                });
                cur = next;
            }
        }
    }
    if det_redex(&cur).is_none() {
        EvalOutcome::Normal {
            term: cur,
            trace: Trace::new(steps),
        }
    } else {
        EvalOutcome::OutOfFuel {
            trace: Trace::new(steps),
        }
    }
}

/// Result of exhaustive path enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathEnumeration {
    /// Every maximal reduction sequence from the term, in leftmost-outermost
    /// discovery order.
    Complete(Vec<Trace>),
    /// Some path reached the length bound while still reducible, or the
    /// internal work budget ran out.
    Exceeded,
}

/// Enumerates every maximal weak head reduction sequence of length at most
/// `bound` by depth-first search over the redexes of each intermediate term.
pub fn all_paths_to_nf(t: &Term, bound: usize) -> PathEnumeration {
    fn dfs(
        cur: &Term,
        bound: usize,
        steps: &mut Vec<Step>,
        traces: &mut Vec<Trace>,
        budget: &mut usize,
    ) -> Result<(), ()> {
        if *budget == 0 || term_size(cur) > PATH_TERM_BUDGET {
            return Err(());
        }
        *budget -= 1;
        let redexes = enumerate_redexes(cur);
        if redexes.is_empty() {
            let stored: usize = steps
                .iter()
                .map(|s| term_size(&s.before) + term_size(&s.after))
                .sum();
            if stored >= *budget {
                return Err(());
            }
            *budget -= stored;
            traces.push(Trace::new(steps.clone()));
            return Ok(());
        }
        if steps.len() >= bound {
            return Err(());
        }
        for (pos, rule) in redexes {
            if rule == RuleName::E {
                if let Some(Term::Match(body, Pattern::Var(x), arg)) = subterm_at(cur, &pos) {
                    let grown = term_size(cur) + free_occurrences(body, x) * term_size(arg);
                    if grown > PATH_TERM_BUDGET {
                        return Err(());
                    }
                }
            }
            let next = apply_at(cur, &pos, rule).expect("enumerated redexes apply");
            steps.push(Step {
                rule,
                position: pos,
                before: cur.clone(),
                after: next.clone(),
            });
            let r = dfs(&next, bound, steps, traces, budget);
            steps.pop();
            r?;
        }
        Ok(())
    }
    let mut traces = Vec::new();
    let mut budget = PATH_BUDGET;
    match dfs(t, bound, &mut Vec::new(), &mut traces, &mut budget) {
        Ok(()) => PathEnumeration::Complete(traces),
        Err(()) => PathEnumeration::Exceeded,
    }
}
