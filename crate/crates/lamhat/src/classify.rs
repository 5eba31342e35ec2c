//! Syntactic classification of normal forms and clashes.
//!
//! Normal form grammars (weak head reduction leaves application arguments,
//! abstraction bodies, data arguments, and branch bodies untouched):
//!
//! ```text
//! ne   ::= x | na t | ne[c(ps)/no'] | case no'' of bs
//! na   ::= ne | c(ts) | na[c(ps)/no']
//! no   ::= na | \p.t | no[c(ps)/no']
//! ```
//!
//! where `no'` excludes terms whose exposed constructor equals the frame's
//! pattern tag, and `no''` excludes the branch tags. Clash-free normal forms
//! refine these:
//!
//! ```text
//! ncf  ::= x | ncf t | ncf[c(ps)/ncf] | case ncf of bs
//! cf   ::= ncf | \p.t | c(ts) | cf[c(ps)/ncf]
//! ```
//!
//! Base clashes are terms stuck on a structural conflict (data applied, an
//! abstraction or wrong-tag data against a data pattern, an abstraction or
//! unmatched data scrutinized); clashes are base clashes under weak head
//! contexts.

use std::fmt;

use crate::reduction::{PosStep, RedexPosition};
use crate::syntax::{const_tag, is_abs, Branch, Pattern, Tag, Term};

/// Where a term sits in the normal form grammars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NfClass {
    NotNormal,
    /// Irreducible, neither an abstraction nor data under frames: inert in
    /// every weak head context.
    Neutral,
    /// Irreducible and not an abstraction; the tag is the exposed
    /// constructor when there is one.
    NeutralData(Option<Tag>),
    /// Irreducible; the tag is the exposed constructor when there is one.
    Normal(Option<Tag>),
}

impl fmt::Display for NfClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn with_tag(f: &mut fmt::Formatter<'_>, name: &str, tag: &Option<Tag>) -> fmt::Result {
            match tag {
                Some(t) => write!(f, "{name}({})", t.name),
                None => write!(f, "{name}"),
            }
        }
        match self {
            NfClass::NotNormal => write!(f, "not-normal"),
            NfClass::Neutral => write!(f, "neutral"),
            NfClass::NeutralData(tag) => with_tag(f, "neutral-data", tag),
            NfClass::Normal(tag) => with_tag(f, "normal", tag),
        }
    }
}

/// `t` is in `ne`: irreducible and inert in every weak head context.
pub fn grammar_ne(t: &Term) -> bool {
    match t {
        Term::Var(_) => true,
        Term::App(f, _) => grammar_na(f),
        Term::Match(b, Pattern::Data(c, _), a) => {
            grammar_ne(b) && grammar_no(a) && const_tag(a) != Some(c)
        }
        Term::Case(s, branches) => {
            grammar_no(s)
                && match const_tag(s) {
                    Some(c) => !branch_with_tag(branches, c),
                    None => true,
                }
        }
        _ => false,
    }
}

/// `t` is in `na` for some tag: irreducible and not an abstraction, so it
/// produces no redex in function position.
pub fn grammar_na(t: &Term) -> bool {
    match t {
        Term::Data(_, _) => true,
        Term::Match(b, Pattern::Data(c, _), a) => {
            grammar_na(b) && grammar_no(a) && const_tag(a) != Some(c)
        }
        _ => grammar_ne(t),
    }
}

/// `t` is in `no` for some tag: irreducible.
pub fn grammar_no(t: &Term) -> bool {
    match t {
        Term::Abs(_, _) => true,
        Term::Match(b, Pattern::Data(c, _), a) => {
            grammar_no(b) && grammar_no(a) && const_tag(a) != Some(c)
        }
        _ => grammar_na(t),
    }
}

fn branch_with_tag(branches: &[Branch], c: &Tag) -> bool {
    branches
        .iter()
        .any(|b| matches!(&b.pattern, Pattern::Data(tag, _) if tag == c))
}

/// Classifies `t` against the normal form grammars. Returns `Neutral` for
/// `ne` members and otherwise `Normal` with the exposed constructor, so the
/// tag component always matches `const_tag`.
pub fn nf_class(t: &Term) -> NfClass {
    if !grammar_no(t) {
        NfClass::NotNormal
    } else if grammar_ne(t) {
        NfClass::Neutral
    } else {
        NfClass::Normal(const_tag(t).cloned())
    }
}

/// The structural conflict at the core of a base clash.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseClashKind {
    /// `L[c(ts)] u`: data in function position.
    DataApplied { tag: Tag },
    /// `t[c(ps)/L[\q.u]]`: abstraction against a data pattern.
    AbsAgainstDataPattern { pattern_tag: Tag },
    /// `t[c(ps)/L[c'(ts)]]` with `c' != c`.
    TagMismatch { pattern_tag: Tag, argument_tag: Tag },
    /// `case L[\p.t] of bs`: abstraction scrutinized.
    AbsScrutinized,
    /// `case L[c(ts)] of bs` where no branch carries `c`.
    UnmatchedCaseTag { scrutinee_tag: Tag },
}

impl fmt::Display for BaseClashKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseClashKind::DataApplied { tag } => {
                write!(f, "data {} applied as a function", tag.name)
            }
            BaseClashKind::AbsAgainstDataPattern { pattern_tag } => {
                write!(
                    f,
                    "abstraction matched against data pattern {}",
                    pattern_tag.name
                )
            }
            BaseClashKind::TagMismatch {
                pattern_tag,
                argument_tag,
            } => write!(
                f,
                "data {} matched against data pattern {}",
                argument_tag.name, pattern_tag.name
            ),
            BaseClashKind::AbsScrutinized => write!(f, "abstraction scrutinized by case"),
            BaseClashKind::UnmatchedCaseTag { scrutinee_tag } => {
                write!(f, "no branch for scrutinee tag {}", scrutinee_tag.name)
            }
        }
    }
}

/// Checks the five base clash shapes at the root of `t`.
pub fn base_clash(t: &Term) -> Option<BaseClashKind> {
    match t {
        Term::App(f, _) => const_tag(f).map(|tag| BaseClashKind::DataApplied { tag: tag.clone() }),
        Term::Match(_, Pattern::Data(c, _), a) => {
            if is_abs(a) {
                Some(BaseClashKind::AbsAgainstDataPattern {
                    pattern_tag: c.clone(),
                })
            } else {
                match const_tag(a) {
                    Some(c2) if c2 != c => Some(BaseClashKind::TagMismatch {
                        pattern_tag: c.clone(),
                        argument_tag: c2.clone(),
                    }),
                    _ => None,
                }
            }
        }
        Term::Case(s, branches) => {
            if is_abs(s) {
                Some(BaseClashKind::AbsScrutinized)
            } else {
                match const_tag(s) {
                    Some(c) if !branch_with_tag(branches, c) => {
                        Some(BaseClashKind::UnmatchedCaseTag {
                            scrutinee_tag: c.clone(),
                        })
                    }
                    _ => None,
                }
            }
        }
        _ => None,
    }
}

/// The innermost base clash under weak head contexts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClashWitness {
    pub position: RedexPosition,
    pub kind: BaseClashKind,
}

/// Whether `t` is a clash, with the witness when it is.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClashReport {
    pub is_clash: bool,
    pub witness: Option<ClashWitness>,
}

/// Detects membership in the clash set: a base clash at some weak head
/// position. The witness is the innermost base clash occurrence (deepest
/// position, first in leftmost-outermost order among ties).
pub fn is_clash(t: &Term) -> ClashReport {
    fn walk(t: &Term, path: &mut Vec<PosStep>, out: &mut Vec<ClashWitness>) {
        if let Some(kind) = base_clash(t) {
            out.push(ClashWitness {
                position: RedexPosition(path.clone()),
                kind,
            });
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
    let mut hits = Vec::new();
    walk(t, &mut Vec::new(), &mut hits);
    let deepest = hits.iter().map(|w| w.position.0.len()).max();
    let witness = deepest.and_then(|d| hits.into_iter().find(|w| w.position.0.len() == d));
    ClashReport {
        is_clash: witness.is_some(),
        witness,
    }
}

/// `t` is in `ncf`: a clash-free neutral form.
pub fn grammar_ncf(t: &Term) -> bool {
    match t {
        Term::Var(_) => true,
        Term::App(f, _) => grammar_ncf(f),
        Term::Match(b, Pattern::Data(_, _), a) => grammar_ncf(b) && grammar_ncf(a),
        Term::Case(s, _) => grammar_ncf(s),
        _ => false,
    }
}

/// `t` is in `cf`: a clash-free normal form.
pub fn grammar_cf(t: &Term) -> bool {
    match t {
        Term::Abs(_, _) | Term::Data(_, _) => true,
        Term::Match(b, Pattern::Data(_, _), a) => grammar_cf(b) && grammar_ncf(a),
        _ => grammar_ncf(t),
    }
}

/// Membership in `cf`, which coincides with being irreducible and not a
/// clash.
pub fn is_clash_free_nf(t: &Term) -> bool {
    grammar_cf(t)
}

/// The two shapes a closed clash-free normal form can take.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosedNfShape {
    Abstraction,
    Data(Tag),
}

/// Why [`closed_nf_shape`] refused its input.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PreconditionViolated {
    #[error("term is open: {0} occurs free")]
    Open(String),
    #[error("term is reducible")]
    Reducible,
    #[error("term is a clash")]
    Clash,
}

/// Reports which of the two possible shapes a closed clash-free normal form
/// has.
pub fn closed_nf_shape(t: &Term) -> Result<ClosedNfShape, PreconditionViolated> {
    if let Some(x) = t.free_vars().into_iter().next() {
        return Err(PreconditionViolated::Open(x));
    }
    if !grammar_no(t) {
        return Err(PreconditionViolated::Reducible);
    }
    if is_clash(t).is_clash {
        return Err(PreconditionViolated::Clash);
    }
    match t {
        Term::Abs(_, _) => Ok(ClosedNfShape::Abstraction),
        Term::Data(tag, _) => Ok(ClosedNfShape::Data(tag.clone())),
        _ => unreachable!("closed clash-free normal forms are abstractions or data"),
    }
}
