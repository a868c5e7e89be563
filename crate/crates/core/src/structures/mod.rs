//! Finite structures valued in a chain, and formula evaluation.

mod diagram;
mod io;

use std::collections::{BTreeMap, HashMap};

use smallvec::SmallVec;
use thiserror::Error;

use crate::algebra::{AlgebraError, Chain, Degree};
use crate::syntax::{Formula, Language, SyntaxError, Term};

pub use diagram::{
    diagram, element_constant_names, expand_with_names, expand_with_truth_constants,
};
pub use io::{FunctionFile, PredicateFile, StructureFile};

/// Domain elements are referred to by their position in the domain list.
pub type Element = usize;

/// Assignment of domain elements to variables.
pub type Valuation = BTreeMap<String, Element>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("domain must be nonempty")]
    EmptyDomain,
    #[error("invalid domain element name `{0}`")]
    BadElementName(String),
    #[error("duplicate domain element `{0}`")]
    DuplicateElement(String),
    #[error("unknown domain element `{0}`")]
    UnknownElement(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{name}` expects {expected} arguments, got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("function `{name}` is not defined on ({args})")]
    PartialFunction { name: String, args: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("truth constant @{0} is not an element of the chain")]
    TruthOutOfRange(Degree),
    #[error("expected a sentence, `{0}` has free variables")]
    NotASentence(String),
    #[error("malformed structure file: {0}")]
    Format(String),
}

/// A graded predicate: sparse entries over a default value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateTable {
    arity: usize,
    default: Degree,
    entries: HashMap<Vec<Element>, Degree>,
}

impl PredicateTable {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn default_value(&self) -> Degree {
        self.default
    }

    #[inline]
    pub fn get(&self, args: &[Element]) -> Degree {
        self.entries.get(args).copied().unwrap_or(self.default)
    }

    /// Entries that differ from the default.
    pub fn explicit(&self) -> impl Iterator<Item = (&[Element], Degree)> {
        self.entries
            .iter()
            .filter(|(_, &v)| v != self.default)
            .map(|(k, &v)| (k.as_slice(), v))
    }
}

/// A total function stored densely in mixed-radix order of its arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionTable {
    arity: usize,
    values: Vec<Element>,
}

impl FunctionTable {
    pub fn arity(&self) -> usize {
        self.arity
    }

    #[inline]
    pub fn get(&self, args: &[Element], domain_size: usize) -> Element {
        self.values[tuple_index(args, domain_size)]
    }
}

#[inline]
pub(crate) fn tuple_index(args: &[Element], domain_size: usize) -> usize {
    args.iter().fold(0, |acc, &a| acc * domain_size + a)
}

/// Iterates all tuples of length `arity` over `0..n` in lexicographic order.
pub fn tuples(n: usize, arity: usize) -> impl Iterator<Item = Vec<Element>> {
    let total = n
        .checked_pow(arity as u32)
        .expect("tuple space fits in usize");
    (0..total).map(move |mut code| {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = code % n;
            code /= n;
        }
        t
    })
}

/// A finite structure: a chain, a language, a domain, and interpretations.
///
/// Predicates default to bottom and functions to the first element until set.
/// Crisp equality and algebra truth constants are never stored; they are computed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    chain: Chain,
    lang: Language,
    domain: Vec<String>,
    index: HashMap<String, Element>,
    predicates: BTreeMap<String, PredicateTable>,
    functions: BTreeMap<String, FunctionTable>,
}

fn valid_element_name(name: &str) -> bool {
    !name.is_empty()
        && !name.contains(',')
        && !name.chars().any(|c| c.is_whitespace() || c.is_control())
}

impl Structure {
    pub fn new(
        chain: Chain,
        lang: Language,
        domain: Vec<String>,
    ) -> Result<Structure, StructureError> {
        if domain.is_empty() {
            return Err(StructureError::EmptyDomain);
        }
        let mut index = HashMap::new();
        for (i, name) in domain.iter().enumerate() {
            if !valid_element_name(name) {
                return Err(StructureError::BadElementName(name.clone()));
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(StructureError::DuplicateElement(name.clone()));
            }
        }
        for (_, v) in lang.algebra_constants() {
            chain.check(v)?;
        }
        let n = domain.len();
        let predicates = lang
            .predicates()
            .map(|(p, arity)| {
                (
                    p.to_string(),
                    PredicateTable {
                        arity,
                        default: 0,
                        entries: HashMap::new(),
                    },
                )
            })
            .collect();
        let functions = lang
            .functions()
            .map(|(f, arity)| {
                (
                    f.to_string(),
                    FunctionTable {
                        arity,
                        values: vec![0; n.pow(arity as u32)],
                    },
                )
            })
            .collect();
        Ok(Structure {
            chain,
            lang,
            domain,
            index,
            predicates,
            functions,
        })
    }

    /// Convenience constructor from `&str` element names.
    pub fn with_domain(
        chain: Chain,
        lang: Language,
        domain: &[&str],
    ) -> Result<Structure, StructureError> {
        Structure::new(chain, lang, domain.iter().map(|s| s.to_string()).collect())
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn language(&self) -> &Language {
        &self.lang
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    pub fn element(&self, name: &str) -> Result<Element, StructureError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| StructureError::UnknownElement(name.to_string()))
    }

    pub fn element_name(&self, e: Element) -> &str {
        &self.domain[e]
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateTable> {
        self.predicates.get(name)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionTable> {
        self.functions.get(name)
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&str, &PredicateTable)> {
        self.predicates.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn functions(&self) -> impl Iterator<Item = (&str, &FunctionTable)> {
        self.functions.iter().map(|(k, v)| (k.as_str(), v))
    }

    fn check_tuple(
        &self,
        name: &str,
        arity: usize,
        args: &[Element],
    ) -> Result<(), StructureError> {
        if args.len() != arity {
            return Err(StructureError::Arity {
                name: name.to_string(),
                expected: arity,
                found: args.len(),
            });
        }
        if let Some(&bad) = args.iter().find(|&&a| a >= self.domain.len()) {
            return Err(StructureError::UnknownElement(format!("#{bad}")));
        }
        Ok(())
    }

    pub fn set_predicate(
        &mut self,
        name: &str,
        args: &[Element],
        value: Degree,
    ) -> Result<(), StructureError> {
        self.chain.check(value)?;
        let arity = self
            .predicates
            .get(name)
            .ok_or_else(|| StructureError::UnknownSymbol(name.to_string()))?
            .arity;
        self.check_tuple(name, arity, args)?;
        let table = self.predicates.get_mut(name).expect("checked above");
        if value == table.default {
            table.entries.remove(args);
        } else {
            table.entries.insert(args.to_vec(), value);
        }
        Ok(())
    }

    /// Changes the default value; explicit entries keep their values.
    pub fn set_predicate_default(
        &mut self,
        name: &str,
        value: Degree,
    ) -> Result<(), StructureError> {
        self.chain.check(value)?;
        let table = self
            .predicates
            .get_mut(name)
            .ok_or_else(|| StructureError::UnknownSymbol(name.to_string()))?;
        let n = self.domain.len();
        let old = table.default;
        // Materialise tuples that relied on the old default.
        if old != value {
            for t in tuples(n, table.arity) {
                table.entries.entry(t).or_insert(old);
            }
            table.default = value;
            table.entries.retain(|_, v| *v != value);
        }
        Ok(())
    }

    pub fn set_predicate_named(
        &mut self,
        name: &str,
        args: &[&str],
        value: Degree,
    ) -> Result<(), StructureError> {
        let args = args
            .iter()
            .map(|a| self.element(a))
            .collect::<Result<Vec<_>, _>>()?;
        self.set_predicate(name, &args, value)
    }

    pub fn set_function(
        &mut self,
        name: &str,
        args: &[Element],
        value: Element,
    ) -> Result<(), StructureError> {
        let arity = self
            .functions
            .get(name)
            .ok_or_else(|| StructureError::UnknownSymbol(name.to_string()))?
            .arity;
        self.check_tuple(name, arity, args)?;
        if value >= self.domain.len() {
            return Err(StructureError::UnknownElement(format!("#{value}")));
        }
        let n = self.domain.len();
        self.functions.get_mut(name).expect("checked above").values[tuple_index(args, n)] = value;
        Ok(())
    }

    pub fn set_function_named(
        &mut self,
        name: &str,
        args: &[&str],
        value: &str,
    ) -> Result<(), StructureError> {
        let args = args
            .iter()
            .map(|a| self.element(a))
            .collect::<Result<Vec<_>, _>>()?;
        let value = self.element(value)?;
        self.set_function(name, &args, value)
    }

    /// Interprets the individual constant `name` as `value`.
    pub fn set_constant(&mut self, name: &str, value: Element) -> Result<(), StructureError> {
        self.set_function(name, &[], value)
    }

    pub fn constant(&self, name: &str) -> Option<Element> {
        self.functions
            .get(name)
            .filter(|t| t.arity == 0)
            .map(|t| t.values[0])
    }

    /// Adds a predicate symbol to both the language and the structure.
    pub fn add_predicate(
        &mut self,
        name: &str,
        arity: usize,
        default: Degree,
    ) -> Result<(), StructureError> {
        self.chain.check(default)?;
        self.lang.add_predicate(name, arity)?;
        self.predicates.insert(
            name.to_string(),
            PredicateTable {
                arity,
                default,
                entries: HashMap::new(),
            },
        );
        Ok(())
    }

    /// Adds a function symbol (arity 0 for constants) mapping everything to `value`.
    pub fn add_function(
        &mut self,
        name: &str,
        arity: usize,
        value: Element,
    ) -> Result<(), StructureError> {
        if value >= self.domain.len() {
            return Err(StructureError::UnknownElement(format!("#{value}")));
        }
        self.lang.add_function(name, arity)?;
        self.functions.insert(
            name.to_string(),
            FunctionTable {
                arity,
                values: vec![value; self.domain.len().pow(arity as u32)],
            },
        );
        Ok(())
    }

    pub(crate) fn add_algebra_constant(
        &mut self,
        name: &str,
        value: Degree,
    ) -> Result<(), StructureError> {
        self.chain.check(value)?;
        self.lang.add_algebra_constant(name, value)?;
        Ok(())
    }

    /// The value of a closed or open term under `v`.
    pub fn eval_term(&self, t: &Term, v: &Valuation) -> Result<Element, StructureError> {
        match t {
            Term::Var(x) => v
                .get(x)
                .copied()
                .ok_or_else(|| StructureError::UnboundVariable(x.clone())),
            Term::App(f, args) => {
                let table = self
                    .functions
                    .get(f)
                    .ok_or_else(|| StructureError::UnknownSymbol(f.clone()))?;
                if table.arity != args.len() {
                    return Err(StructureError::Arity {
                        name: f.clone(),
                        expected: table.arity,
                        found: args.len(),
                    });
                }
                let vals: SmallVec<[Element; 4]> = args
                    .iter()
                    .map(|a| self.eval_term(a, v))
                    .collect::<Result<_, _>>()?;
                Ok(table.get(&vals, self.domain.len()))
            }
        }
    }

    /// The truth value of `phi` under `v`.
    ///
    /// Quantifiers range over the whole domain; `∃` stops early at top and `∀` at
    /// bottom, which cannot change the extremum.
    pub fn evaluate(&self, phi: &Formula, v: &Valuation) -> Result<Degree, StructureError> {
        let mut env: Vec<(&str, Element)> = v.iter().map(|(k, &e)| (k.as_str(), e)).collect();
        self.eval(phi, &mut env)
    }

    /// Evaluates a sentence.
    pub fn evaluate_sentence(&self, phi: &Formula) -> Result<Degree, StructureError> {
        if !phi.is_sentence() {
            return Err(StructureError::NotASentence(phi.to_string()));
        }
        self.evaluate(phi, &Valuation::new())
    }

    fn term_in<'f>(
        &self,
        t: &'f Term,
        env: &[(&'f str, Element)],
    ) -> Result<Element, StructureError> {
        match t {
            Term::Var(x) => env
                .iter()
                .rev()
                .find(|(name, _)| *name == x)
                .map(|&(_, e)| e)
                .ok_or_else(|| StructureError::UnboundVariable(x.clone())),
            Term::App(f, args) => {
                let table = self
                    .functions
                    .get(f)
                    .ok_or_else(|| StructureError::UnknownSymbol(f.clone()))?;
                if table.arity != args.len() {
                    return Err(StructureError::Arity {
                        name: f.clone(),
                        expected: table.arity,
                        found: args.len(),
                    });
                }
                let mut vals: SmallVec<[Element; 4]> = SmallVec::new();
                for a in args {
                    vals.push(self.term_in(a, env)?);
                }
                Ok(table.get(&vals, self.domain.len()))
            }
        }
    }

    fn eval<'f>(
        &self,
        phi: &'f Formula,
        env: &mut Vec<(&'f str, Element)>,
    ) -> Result<Degree, StructureError> {
        let c = &self.chain;
        Ok(match phi {
            Formula::Atom(p, args) => {
                let table = self
                    .predicates
                    .get(p)
                    .ok_or_else(|| StructureError::UnknownSymbol(p.clone()))?;
                if table.arity != args.len() {
                    return Err(StructureError::Arity {
                        name: p.clone(),
                        expected: table.arity,
                        found: args.len(),
                    });
                }
                let mut vals: SmallVec<[Element; 4]> = SmallVec::new();
                for a in args {
                    vals.push(self.term_in(a, env)?);
                }
                table.get(&vals)
            }
            Formula::Eq(a, b) => {
                if self.term_in(a, env)? == self.term_in(b, env)? {
                    c.top()
                } else {
                    c.bottom()
                }
            }
            Formula::Bottom => c.bottom(),
            Formula::Top => c.top(),
            Formula::Truth(k) => {
                if !c.contains(*k) {
                    return Err(StructureError::TruthOutOfRange(*k));
                }
                *k
            }
            Formula::StrongAnd(a, b) => c.tnorm(self.eval(a, env)?, self.eval(b, env)?),
            Formula::And(a, b) => c.meet(self.eval(a, env)?, self.eval(b, env)?),
            Formula::Or(a, b) => c.join(self.eval(a, env)?, self.eval(b, env)?),
            Formula::Implies(a, b) => c.residuum(self.eval(a, env)?, self.eval(b, env)?),
            Formula::Exists(x, body) => {
                let mut best = c.bottom();
                for e in 0..self.domain.len() {
                    env.push((x, e));
                    let val = self.eval(body, env);
                    env.pop();
                    best = best.max(val?);
                    if best == c.top() {
                        break;
                    }
                }
                best
            }
            Formula::Forall(x, body) => {
                let mut worst = c.top();
                for e in 0..self.domain.len() {
                    env.push((x, e));
                    let val = self.eval(body, env);
                    env.pop();
                    worst = worst.min(val?);
                    if worst == c.bottom() {
                        break;
                    }
                }
                worst
            }
        })
    }

    /// For a quantified formula, its value together with the first element attaining it.
    pub fn quantifier_witness(
        &self,
        phi: &Formula,
        v: &Valuation,
    ) -> Result<Option<(Degree, Element)>, StructureError> {
        let (x, body, is_exists) = match phi {
            Formula::Exists(x, body) => (x, body, true),
            Formula::Forall(x, body) => (x, body, false),
            _ => return Ok(None),
        };
        let mut inner = v.clone();
        let mut best: Option<(Degree, Element)> = None;
        for e in 0..self.domain.len() {
            inner.insert(x.clone(), e);
            let val = self.evaluate(body, &inner)?;
            let better = match best {
                None => true,
                Some((b, _)) => (is_exists && val > b) || (!is_exists && val < b),
            };
            if better {
                best = Some((val, e));
            }
        }
        Ok(best)
    }

    /// True iff every sentence evaluates to top.
    pub fn is_model(&self, sentences: &[Formula]) -> Result<bool, StructureError> {
        for s in sentences {
            if self.evaluate_sentence(s)? != self.chain.top() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Renders an element tuple as comma-joined names.
    pub fn tuple_key(&self, args: &[Element]) -> String {
        args.iter()
            .map(|&a| self.domain[a].as_str())
            .collect::<Vec<_>>()
            .join(",")
    }
}
