//! Concrete-syntax printing with minimal parentheses.
//!
//! The printed form round-trips through the parser up to alpha-equivalence
//! (exactly, for terms the parser could have produced). Precedence, tightest
//! first: atoms and data, match suffixes `t[p/u]`, application, then lambda
//! and case which extend as far right as possible.

use std::fmt;

use crate::syntax::{Branch, Pattern, Term};

/// How tightly the surrounding context binds. Used to decide parentheses.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    /// Top level, lambda bodies, branch bodies, bracket and paren interiors.
    Top,
    /// Function position of an application.
    AppFun,
    /// Argument position of an application, or subject of a match suffix.
    AppArg,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Var(x) => write!(f, "{x}"),
            Pattern::Data(tag, ps) => {
                write!(f, "{}", tag.name)?;
                if !ps.is_empty() {
                    write!(f, "(")?;
                    for (i, p) in ps.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{p}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_term(self, Prec::Top, f)
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->", self.pattern)?;
        fmt_term(&self.body, Prec::Top, f)
    }
}

fn fmt_term(t: &Term, prec: Prec, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Var(x) => write!(f, "{x}"),
        Term::Data(tag, args) => {
            write!(f, "{}", tag.name)?;
            if !args.is_empty() {
                write!(f, "(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    fmt_term(a, Prec::Top, f)?;
                }
                write!(f, ")")?;
            }
            Ok(())
        }
        // A match suffix binds tighter than application, so it never needs
        // parentheses of its own; only its subject might.
        Term::Match(b, p, u) => {
            fmt_term(b, Prec::AppArg, f)?;
            write!(f, "[{p}/")?;
            fmt_term(u, Prec::Top, f)?;
            write!(f, "]")
        }
        Term::App(fun, arg) => {
            let parens = prec >= Prec::AppArg;
            if parens {
                write!(f, "(")?;
            }
            fmt_term(fun, Prec::AppFun, f)?;
            write!(f, " ")?;
            fmt_term(arg, Prec::AppArg, f)?;
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::Abs(p, b) => {
            let parens = prec >= Prec::AppFun;
            if parens {
                write!(f, "(")?;
            }
            write!(f, "\\{p}.")?;
            fmt_term(b, Prec::Top, f)?;
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::Case(s, branches) => {
            let parens = prec >= Prec::AppFun;
            if parens {
                write!(f, "(")?;
            }
            write!(f, "case ")?;
            fmt_term(s, Prec::Top, f)?;
            write!(f, " of {{")?;
            for (i, br) in branches.iter().enumerate() {
                if i > 0 {
                    write!(f, " | ")?;
                }
                write!(f, "{br}")?;
            }
            write!(f, "}}")?;
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::syntax::{Branch, Pattern, Tag, Term};

    fn pair() -> Tag {
        Tag::new("Pair", 2)
    }

    #[test]
    fn identity_prints_without_sugar() {
        assert_eq!(Term::ident().to_string(), "\\x.x");
    }

    #[test]
    fn application_is_left_associative() {
        let t = Term::app(Term::app(Term::var("f"), Term::var("a")), Term::var("b"));
        assert_eq!(t.to_string(), "f a b");
        let u = Term::app(Term::var("f"), Term::app(Term::var("a"), Term::var("b")));
        assert_eq!(u.to_string(), "f (a b)");
    }

    #[test]
    fn match_suffix_binds_tighter_than_application() {
        let m = Term::match_closure(Term::var("a"), Pattern::var("p"), Term::var("u"));
        let t = Term::app(Term::var("f"), m.clone());
        assert_eq!(t.to_string(), "f a[p/u]");
        let s = Term::match_closure(
            Term::app(Term::var("f"), Term::var("a")),
            Pattern::var("p"),
            Term::var("u"),
        );
        assert_eq!(s.to_string(), "(f a)[p/u]");
        let chain = Term::match_closure(m, Pattern::var("q"), Term::var("v"));
        assert_eq!(chain.to_string(), "a[p/u][q/v]");
    }

    #[test]
    fn lambda_and_case_need_parens_in_application() {
        let t = Term::app(Term::ident(), Term::ident());
        assert_eq!(t.to_string(), "(\\x.x) (\\x.x)");
        let c = Term::case(
            Term::var("s"),
            vec![Branch {
                pattern: Pattern::data(pair(), vec![Pattern::var("x"), Pattern::var("y")]),
                body: Term::var("x"),
            }],
        );
        let u = Term::app(c.clone(), Term::var("z"));
        assert_eq!(u.to_string(), "(case s of {Pair(x,y)->x}) z");
        assert_eq!(c.to_string(), "case s of {Pair(x,y)->x}");
    }

    #[test]
    fn data_prints_bare_when_nullary() {
        let t = Term::data(Tag::new("C0", 0), vec![]);
        assert_eq!(t.to_string(), "C0");
        let u = Term::data(pair(), vec![t.clone(), Term::ident()]);
        assert_eq!(u.to_string(), "Pair(C0,\\x.x)");
    }
}
