//! Signatures, terms and formulas, plus the pp/EP fragment machinery.

mod fragments;
mod parser;
mod print;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::algebra::Degree;

pub use fragments::{
    classify, ep_to_pp_disjunction, is_pp_normal_shape, pp_normal_form, split_exists_prefix,
    FragmentTags,
};
pub use parser::{parse_all_inferring, parse_formula, parse_formula_inferring};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("syntax error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("arity mismatch for `{name}`: declared {expected}, used with {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("symbol `{0}` is declared twice or clashes with another symbol kind")]
    NameClash(String),
    #[error("equality is not part of this language")]
    NoEquality,
    #[error("formula is not positive-primitive: {0}")]
    NotPp(String),
    #[error("formula is not existential positive: {0}")]
    NotEp(String),
}

/// A predicate language: predicate and function symbols with arities, crisp equality,
/// and optional algebra truth constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Language {
    predicates: BTreeMap<String, usize>,
    functions: BTreeMap<String, usize>,
    equality: bool,
    algebra_constants: BTreeMap<String, Degree>,
}

impl Default for Language {
    fn default() -> Self {
        Language {
            predicates: BTreeMap::new(),
            functions: BTreeMap::new(),
            equality: true,
            algebra_constants: BTreeMap::new(),
        }
    }
}

impl Language {
    pub fn new() -> Language {
        Language::default()
    }

    fn is_declared(&self, name: &str) -> bool {
        self.predicates.contains_key(name)
            || self.functions.contains_key(name)
            || self.algebra_constants.contains_key(name)
    }

    pub fn add_predicate(&mut self, name: &str, arity: usize) -> Result<(), SyntaxError> {
        if self.is_declared(name) || !is_identifier(name) {
            return Err(SyntaxError::NameClash(name.to_string()));
        }
        self.predicates.insert(name.to_string(), arity);
        Ok(())
    }

    /// Declares a function symbol; arity 0 declares an individual constant.
    pub fn add_function(&mut self, name: &str, arity: usize) -> Result<(), SyntaxError> {
        if self.is_declared(name) || !is_identifier(name) {
            return Err(SyntaxError::NameClash(name.to_string()));
        }
        self.functions.insert(name.to_string(), arity);
        Ok(())
    }

    pub fn add_algebra_constant(&mut self, name: &str, value: Degree) -> Result<(), SyntaxError> {
        if self.is_declared(name) || !is_identifier(name) {
            return Err(SyntaxError::NameClash(name.to_string()));
        }
        self.algebra_constants.insert(name.to_string(), value);
        Ok(())
    }

    pub fn with_predicate(mut self, name: &str, arity: usize) -> Language {
        self.add_predicate(name, arity).expect("fresh predicate");
        self
    }

    pub fn with_function(mut self, name: &str, arity: usize) -> Language {
        self.add_function(name, arity).expect("fresh function");
        self
    }

    pub fn set_equality(&mut self, on: bool) {
        self.equality = on;
    }

    pub fn has_equality(&self) -> bool {
        self.equality
    }

    pub fn predicate_arity(&self, name: &str) -> Option<usize> {
        self.predicates.get(name).copied()
    }

    pub fn function_arity(&self, name: &str) -> Option<usize> {
        self.functions.get(name).copied()
    }

    pub fn algebra_constant(&self, name: &str) -> Option<Degree> {
        self.algebra_constants.get(name).copied()
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&str, usize)> {
        self.predicates.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn functions(&self) -> impl Iterator<Item = (&str, usize)> {
        self.functions.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Individual constants, i.e. 0-ary function symbols.
    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.functions
            .iter()
            .filter(|(_, &a)| a == 0)
            .map(|(k, _)| k.as_str())
    }

    pub fn algebra_constants(&self) -> impl Iterator<Item = (&str, Degree)> {
        self.algebra_constants.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// True when `other` declares at least the symbols of `self` with the same arities.
    pub fn is_sublanguage_of(&self, other: &Language) -> bool {
        self.predicates
            .iter()
            .all(|(k, a)| other.predicates.get(k) == Some(a))
            && self
                .functions
                .iter()
                .all(|(k, a)| other.functions.get(k) == Some(a))
            && (!self.equality || other.equality)
    }

    /// Merges the symbols of `other` into `self`, failing on conflicting declarations.
    pub fn merge(&mut self, other: &Language) -> Result<(), SyntaxError> {
        for (name, arity) in other.predicates() {
            match self.predicate_arity(name) {
                Some(a) if a == arity => {}
                Some(_) => return Err(SyntaxError::NameClash(name.to_string())),
                None => self.add_predicate(name, arity)?,
            }
        }
        for (name, arity) in other.functions() {
            match self.function_arity(name) {
                Some(a) if a == arity => {}
                Some(_) => return Err(SyntaxError::NameClash(name.to_string())),
                None => self.add_function(name, arity)?,
            }
        }
        for (name, value) in other.algebra_constants() {
            match self.algebra_constant(name) {
                Some(v) if v == value => {}
                Some(_) => return Err(SyntaxError::NameClash(name.to_string())),
                None => self.add_algebra_constant(name, value)?,
            }
        }
        self.equality |= other.equality;
        Ok(())
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
        && s != "E"
        && s != "A"
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    /// Function application; individual constants are 0-ary applications.
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Term {
        Term::App(name.to_string(), Vec::new())
    }

    pub fn vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.vars_into(out)),
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_closed),
        }
    }

    fn substitute(&self, var: &str, by: &Term) -> Term {
        match self {
            Term::Var(v) if v == var => by.clone(),
            Term::Var(_) => self.clone(),
            Term::App(f, args) => Term::App(
                f.clone(),
                args.iter().map(|a| a.substitute(var, by)).collect(),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String, Vec<Term>),
    /// Crisp equality.
    Eq(Term, Term),
    Bottom,
    Top,
    /// Truth constant naming an algebra element.
    Truth(Degree),
    /// Strong conjunction `&`.
    StrongAnd(Box<Formula>, Box<Formula>),
    /// Weak conjunction (min).
    And(Box<Formula>, Box<Formula>),
    /// Weak disjunction (max).
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn atom(pred: &str, args: Vec<Term>) -> Formula {
        Formula::Atom(pred.to_string(), args)
    }

    pub fn strong_and(a: Formula, b: Formula) -> Formula {
        Formula::StrongAnd(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn negate(a: Formula) -> Formula {
        Formula::implies(a, Formula::Bottom)
    }

    pub fn exists(var: &str, body: Formula) -> Formula {
        Formula::Exists(var.to_string(), Box::new(body))
    }

    pub fn forall(var: &str, body: Formula) -> Formula {
        Formula::Forall(var.to_string(), Box::new(body))
    }

    /// Wraps `body` in `∃` quantifiers, the first variable outermost.
    pub fn exists_many<S: AsRef<str>>(vars: &[S], body: Formula) -> Formula {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Formula::exists(v.as_ref(), acc))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(
            self,
            Formula::Atom(..)
                | Formula::Eq(..)
                | Formula::Bottom
                | Formula::Top
                | Formula::Truth(_)
        )
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut out);
        out
    }

    fn free_vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(_, args) => args.iter().for_each(|t| t.vars_into(out)),
            Formula::Eq(a, b) => {
                a.vars_into(out);
                b.vars_into(out);
            }
            Formula::Bottom | Formula::Top | Formula::Truth(_) => {}
            Formula::StrongAnd(a, b)
            | Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b) => {
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let mut inner = body.free_vars();
                inner.remove(x);
                out.extend(inner);
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Every variable name occurring in the formula, bound or free.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Atom(_, args) => args.iter().for_each(|t| t.vars_into(&mut out)),
            Formula::Eq(a, b) => {
                a.vars_into(&mut out);
                b.vars_into(&mut out);
            }
            Formula::Forall(x, _) | Formula::Exists(x, _) => {
                out.insert(x.clone());
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::StrongAnd(a, b)
            | Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::Forall(_, body) | Formula::Exists(_, body) => body.visit(f),
            _ => {}
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Capture-avoiding substitution of `by` for the free occurrences of `var`.
    pub fn substitute(&self, var: &str, by: &Term) -> Formula {
        let mut by_vars = BTreeSet::new();
        by.vars_into(&mut by_vars);
        self.subst(var, by, &by_vars)
    }

    fn subst(&self, var: &str, by: &Term, by_vars: &BTreeSet<String>) -> Formula {
        let bin = |a: &Formula, b: &Formula| {
            (
                Box::new(a.subst(var, by, by_vars)),
                Box::new(b.subst(var, by, by_vars)),
            )
        };
        match self {
            Formula::Atom(p, args) => Formula::Atom(
                p.clone(),
                args.iter().map(|t| t.substitute(var, by)).collect(),
            ),
            Formula::Eq(a, b) => Formula::Eq(a.substitute(var, by), b.substitute(var, by)),
            Formula::Bottom | Formula::Top | Formula::Truth(_) => self.clone(),
            Formula::StrongAnd(a, b) => {
                let (a, b) = bin(a, b);
                Formula::StrongAnd(a, b)
            }
            Formula::And(a, b) => {
                let (a, b) = bin(a, b);
                Formula::And(a, b)
            }
            Formula::Or(a, b) => {
                let (a, b) = bin(a, b);
                Formula::Or(a, b)
            }
            Formula::Implies(a, b) => {
                let (a, b) = bin(a, b);
                Formula::Implies(a, b)
            }
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let rebuild = |x: String, body: Formula| match self {
                    Formula::Forall(..) => Formula::Forall(x, Box::new(body)),
                    _ => Formula::Exists(x, Box::new(body)),
                };
                if x == var || !body.free_vars().contains(var) {
                    return self.clone();
                }
                if by_vars.contains(x) {
                    let mut avoid = body.all_vars();
                    avoid.extend(by_vars.iter().cloned());
                    avoid.insert(var.to_string());
                    let fresh = fresh_name(x, &avoid);
                    let renamed = body.substitute(x, &Term::Var(fresh.clone()));
                    rebuild(fresh, renamed.subst(var, by, by_vars))
                } else {
                    rebuild(x.clone(), body.subst(var, by, by_vars))
                }
            }
        }
    }

    /// Renames bound variables so that every quantifier binds a distinct variable that
    /// is also distinct from every free variable.
    pub fn rename_apart(&self) -> Formula {
        let mut used = self.free_vars();
        let mut scope: Vec<(String, String)> = Vec::new();
        self.rename_rec(&mut used, &mut scope)
    }

    fn rename_rec(
        &self,
        used: &mut BTreeSet<String>,
        scope: &mut Vec<(String, String)>,
    ) -> Formula {
        fn rn_term(t: &Term, scope: &[(String, String)]) -> Term {
            match t {
                Term::Var(v) => Term::Var(
                    scope
                        .iter()
                        .rev()
                        .find(|(from, _)| from == v)
                        .map(|(_, to)| to.clone())
                        .unwrap_or_else(|| v.clone()),
                ),
                Term::App(f, args) => {
                    Term::App(f.clone(), args.iter().map(|a| rn_term(a, scope)).collect())
                }
            }
        }
        match self {
            Formula::Atom(p, args) => {
                Formula::Atom(p.clone(), args.iter().map(|t| rn_term(t, scope)).collect())
            }
            Formula::Eq(a, b) => Formula::Eq(rn_term(a, scope), rn_term(b, scope)),
            Formula::Bottom | Formula::Top | Formula::Truth(_) => self.clone(),
            Formula::StrongAnd(a, b) => Formula::StrongAnd(
                Box::new(a.rename_rec(used, scope)),
                Box::new(b.rename_rec(used, scope)),
            ),
            Formula::And(a, b) => Formula::And(
                Box::new(a.rename_rec(used, scope)),
                Box::new(b.rename_rec(used, scope)),
            ),
            Formula::Or(a, b) => Formula::Or(
                Box::new(a.rename_rec(used, scope)),
                Box::new(b.rename_rec(used, scope)),
            ),
            Formula::Implies(a, b) => Formula::Implies(
                Box::new(a.rename_rec(used, scope)),
                Box::new(b.rename_rec(used, scope)),
            ),
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let name = if used.contains(x) {
                    fresh_name(x, used)
                } else {
                    x.clone()
                };
                used.insert(name.clone());
                scope.push((x.clone(), name.clone()));
                let body = body.rename_rec(used, scope);
                scope.pop();
                match self {
                    Formula::Forall(..) => Formula::Forall(name, Box::new(body)),
                    _ => Formula::Exists(name, Box::new(body)),
                }
            }
        }
    }

    /// Alpha-equivalence: equal up to consistent renaming of bound variables.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        fn term_eq(a: &Term, b: &Term, env: &[(String, String)]) -> bool {
            match (a, b) {
                (Term::Var(x), Term::Var(y)) => {
                    let bx = env.iter().rev().find(|(l, _)| l == x);
                    let by = env.iter().rev().find(|(_, r)| r == y);
                    match (bx, by) {
                        (Some((l, r)), Some((l2, r2))) => l == l2 && r == r2,
                        (None, None) => x == y,
                        _ => false,
                    }
                }
                (Term::App(f, xs), Term::App(g, ys)) => {
                    f == g
                        && xs.len() == ys.len()
                        && xs.iter().zip(ys).all(|(x, y)| term_eq(x, y, env))
                }
                _ => false,
            }
        }
        fn go(a: &Formula, b: &Formula, env: &mut Vec<(String, String)>) -> bool {
            use Formula::*;
            match (a, b) {
                (Atom(p, xs), Atom(q, ys)) => {
                    p == q
                        && xs.len() == ys.len()
                        && xs.iter().zip(ys).all(|(x, y)| term_eq(x, y, env))
                }
                (Eq(a1, a2), Eq(b1, b2)) => term_eq(a1, b1, env) && term_eq(a2, b2, env),
                (Bottom, Bottom) | (Top, Top) => true,
                (Truth(x), Truth(y)) => x == y,
                (StrongAnd(a1, a2), StrongAnd(b1, b2))
                | (And(a1, a2), And(b1, b2))
                | (Or(a1, a2), Or(b1, b2))
                | (Implies(a1, a2), Implies(b1, b2)) => go(a1, b1, env) && go(a2, b2, env),
                (Forall(x, p), Forall(y, q)) | (Exists(x, p), Exists(y, q)) => {
                    env.push((x.clone(), y.clone()));
                    let r = go(p, q, env);
                    env.pop();
                    r
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new())
    }

    /// Checks every symbol against `lang`.
    pub fn check_language(&self, lang: &Language) -> Result<(), SyntaxError> {
        fn check_term(t: &Term, lang: &Language) -> Result<(), SyntaxError> {
            if let Term::App(f, args) = t {
                let arity = lang
                    .function_arity(f)
                    .ok_or_else(|| SyntaxError::UnknownSymbol(f.clone()))?;
                if arity != args.len() {
                    return Err(SyntaxError::Arity {
                        name: f.clone(),
                        expected: arity,
                        found: args.len(),
                    });
                }
                for a in args {
                    check_term(a, lang)?;
                }
            }
            Ok(())
        }
        let mut result = Ok(());
        self.visit(&mut |f| {
            if result.is_err() {
                return;
            }
            result = match f {
                Formula::Atom(p, args) => match lang.predicate_arity(p) {
                    None => Err(SyntaxError::UnknownSymbol(p.clone())),
                    Some(a) if a != args.len() => Err(SyntaxError::Arity {
                        name: p.clone(),
                        expected: a,
                        found: args.len(),
                    }),
                    Some(_) => args.iter().try_for_each(|t| check_term(t, lang)),
                },
                Formula::Eq(a, b) if lang.has_equality() => {
                    check_term(a, lang).and_then(|_| check_term(b, lang))
                }
                Formula::Eq(..) => Err(SyntaxError::NoEquality),
                _ => Ok(()),
            };
        });
        result
    }
}

/// Appends a numeric suffix to `base` until it avoids `used`.
pub(crate) fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    (1..)
        .map(|i| format!("{stem}{i}"))
        .find(|n| !used.contains(n))
        .expect("unbounded supply of names")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lang() -> Language {
        Language::new().with_predicate("P", 2).with_function("c", 0)
    }

    #[test]
    fn free_vars_and_substitution() {
        let l = lang();
        let f = parse_formula("E x. P(x, y)", &l).unwrap();
        assert_eq!(f.free_vars(), BTreeSet::from(["y".to_string()]));

        let l1 = Language::new().with_predicate("P", 1).with_function("c", 0);
        let p = parse_formula("P(x)", &l1).unwrap();
        assert_eq!(
            p.substitute("x", &Term::constant("c")),
            Formula::atom("P", vec![Term::constant("c")])
        );
        let q = parse_formula("E x. P(x)", &l1).unwrap();
        assert_eq!(q.substitute("x", &Term::constant("c")), q);
    }

    #[test]
    fn substitution_avoids_capture() {
        let f = parse_formula("E x. P(x, y)", &lang()).unwrap();
        let g = f.substitute("y", &Term::var("x"));
        let Formula::Exists(bound, body) = &g else {
            panic!("expected a quantifier, got {g}");
        };
        assert_ne!(bound, "x");
        assert_eq!(
            **body,
            Formula::atom("P", vec![Term::Var(bound.clone()), Term::var("x")])
        );
    }

    #[test]
    fn rename_apart_separates_binders() {
        let x = || Term::var("x");
        let f = Formula::and(
            Formula::exists("x", Formula::atom("P", vec![x(), x()])),
            Formula::exists("x", Formula::atom("P", vec![x(), Term::var("y")])),
        );
        let g = f.rename_apart();
        assert!(g.alpha_eq(&f));
        let mut binders = Vec::new();
        g.visit(&mut |h| {
            if let Formula::Exists(v, _) = h {
                binders.push(v.clone());
            }
        });
        assert_eq!(binders, vec!["x".to_string(), "x1".to_string()]);
    }

    #[test]
    fn language_clashes() {
        let mut l = lang();
        assert!(l.add_function("P", 1).is_err());
        assert!(l.add_algebra_constant("c", 0).is_err());
        assert!(l.add_predicate("E", 0).is_err());
        l.add_algebra_constant("d_1", 1).unwrap();
        assert_eq!(l.algebra_constant("d_1"), Some(1));
    }
}
