use std::fmt;

use super::{Formula, Term};

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::App(name, args) if args.is_empty() => f.write_str(name),
            Term::App(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

// Binding strength; higher binds tighter.
fn level(phi: &Formula) -> u8 {
    match phi {
        Formula::Forall(..) | Formula::Exists(..) => 0,
        Formula::Implies(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::StrongAnd(..) => 4,
        _ => 5,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, child: &Formula, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(p, args) => {
                f.write_str(p)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Bottom => f.write_str("0"),
            Formula::Top => f.write_str("1"),
            Formula::Truth(k) => write!(f, "@{k}"),
            Formula::StrongAnd(a, b)
            | Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b) => {
                let op = match self {
                    Formula::StrongAnd(..) => "&",
                    Formula::And(..) => "/\\",
                    Formula::Or(..) => "\\/",
                    _ => "->",
                };
                let me = level(self);
                let right_assoc = matches!(self, Formula::Implies(..));
                let (la, lb) = (level(a), level(b));
                let left_parens = la == 0 || la < me || (la == me && right_assoc);
                let right_parens = lb == 0 || lb < me || (lb == me && !right_assoc);
                write_operand(f, a, left_parens)?;
                write!(f, " {op} ")?;
                write_operand(f, b, right_parens)
            }
            Formula::Forall(..) | Formula::Exists(..) => {
                let (kw, is_exists) = match self {
                    Formula::Exists(..) => ("E", true),
                    _ => ("A", false),
                };
                f.write_str(kw)?;
                let mut cur = self;
                while let (Formula::Exists(x, body), true) | (Formula::Forall(x, body), false) =
                    (cur, is_exists)
                {
                    write!(f, " {x}")?;
                    cur = body;
                }
                write!(f, ". {cur}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::syntax::{parse_formula, Language};

    fn lang() -> Language {
        Language::new()
            .with_predicate("P", 1)
            .with_predicate("Q", 1)
            .with_predicate("R", 2)
            .with_function("f", 2)
            .with_function("c", 0)
    }

    #[test]
    fn printing_is_minimal_and_reparses() {
        let cases = [
            ("E x. P(x) & Q(x)", "E x. P(x) & Q(x)"),
            ("(P(x) & Q(x)) \\/ P(c)", "P(x) & Q(x) \\/ P(c)"),
            ("P(x) & (Q(x) & P(c))", "P(x) & (Q(x) & P(c))"),
            ("(P(x) -> Q(x)) -> P(c)", "(P(x) -> Q(x)) -> P(c)"),
            ("P(x) -> Q(x) -> P(c)", "P(x) -> Q(x) -> P(c)"),
            ("E x. E y. R(x, f(y, c))", "E x y. R(x, f(y, c))"),
            ("(E x. P(x)) & Q(c)", "(E x. P(x)) & Q(c)"),
            ("A x. E y. x = y /\\ @2", "A x. E y. x = y /\\ @2"),
            ("~P(c)", "P(c) -> 0"),
        ];
        let l = lang();
        for (input, expected) in cases {
            let f = parse_formula(input, &l).unwrap();
            let printed = f.to_string();
            assert_eq!(printed, expected);
            assert_eq!(parse_formula(&printed, &l).unwrap(), f);
        }
    }
}
