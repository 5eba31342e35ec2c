//! Worked examples shared by the test suites, the fixture files under
//! `fixtures/`, and the command line `examples` listing.

use crate::parse::parse_term;
use crate::syntax::{Pattern, Tag, Term};
use crate::types::{Derivation, MultisetType, TermType};

fn lt(src: &str) -> Term {
    parse_term(src).expect("fixture source parses").0
}

/// Source text of the running example: a case over a pattern-matching
/// abstraction applied to a data argument. Evaluates to `C0` in 6 steps.
pub const RUNNING_EXAMPLE_SRC: &str =
    "(\\x. case x of {Pair(x,y)->y | Triple(x,y,z)->x}) Triple(C0,C1,C2)";

/// Source text of the looping self-application.
pub const OMEGA_SRC: &str = "(\\x. x x) (\\x. x x)";

/// Source text of a base clash: a data term in function position.
pub const DATA_APPLIED_SRC: &str = "Pair(I I, I) I";

/// Source texts of the exception encodings: a raised value consumed by a
/// handler, a handled exception, and a propagated exception.
pub const EXCEPTION_SRCS: [&str; 3] = [
    "case V(v) of {V(x)->u | E(y)->y}",
    "case E(r) of {V(x)->u | E(y)->y}",
    "case E(r) of {V(x)->u | E(y)->E(y)}",
];

pub fn running_example() -> Term {
    lt(RUNNING_EXAMPLE_SRC)
}

pub fn omega() -> Term {
    lt(OMEGA_SRC)
}

pub fn data_applied_clash() -> Term {
    lt(DATA_APPLIED_SRC)
}

pub fn exception_examples() -> [Term; 3] {
    EXCEPTION_SRCS.map(lt)
}

/// Every named fixture term with its source text, in listing order.
pub fn all_terms() -> Vec<(&'static str, &'static str, Term)> {
    vec![
        ("running-example", RUNNING_EXAMPLE_SRC, running_example()),
        ("omega", OMEGA_SRC, omega()),
        ("data-applied", DATA_APPLIED_SRC, data_applied_clash()),
        ("exception-value", EXCEPTION_SRCS[0], lt(EXCEPTION_SRCS[0])),
        (
            "exception-handled",
            EXCEPTION_SRCS[1],
            lt(EXCEPTION_SRCS[1]),
        ),
        (
            "exception-propagated",
            EXCEPTION_SRCS[2],
            lt(EXCEPTION_SRCS[2]),
        ),
    ]
}

fn c0_ty() -> TermType {
    TermType::data(Tag::new("C0", 0), vec![])
}

fn triple_ty() -> TermType {
    TermType::data(
        Tag::new("Triple", 3),
        vec![
            MultisetType::singleton(c0_ty()),
            MultisetType::empty(),
            MultisetType::empty(),
        ],
    )
}

/// The hand-encoded derivation for the running example, with the
/// abstraction's pattern premise left implicit. Its size is 11.
pub fn sigma() -> Derivation {
    let t = running_example();
    let Term::App(abs_term, arg_term) = &t else {
        panic!("fixture is an application")
    };
    let Term::Abs(_, case_term) = &**abs_term else {
        panic!("head is an abstraction")
    };

    let scrut = Derivation::many(&Term::var("x"), vec![Derivation::ax("x", triple_ty())]);
    let body = Derivation::ax("x", c0_ty());
    let case = Derivation::case(case_term, 1, scrut, body);
    let mut abs = Derivation::abs(&Pattern::var("x"), case);
    abs.children.truncate(1);

    let const_c0 = Derivation::constant(Tag::new("C0", 0), vec![]);
    let arg_c0 = Derivation::many(&lt("C0"), vec![const_c0]);
    let arg_c1 = Derivation::many(&lt("C1"), vec![]);
    let arg_c2 = Derivation::many(&lt("C2"), vec![]);
    let triple = Derivation::constant(Tag::new("Triple", 3), vec![arg_c0, arg_c1, arg_c2]);
    let arg = Derivation::many(arg_term, vec![triple]);

    Derivation::app(abs, arg)
}
