//! Homomorphisms between structures over the same chain.
//!
//! A map `g: M -> N` is a homomorphism when it commutes with every function symbol
//! (constants included) and sends every predicate tuple valued top in `M` to a tuple
//! valued top in `N`. Values below top impose nothing.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::structures::{
    diagram, element_constant_names, tuples, Element, Structure, StructureError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error("structures are over different languages")]
    LanguageMismatch,
    #[error("structures are over different chains")]
    ChainMismatch,
    #[error("mapping has {found} entries but the source has {expected} elements")]
    NotTotal { expected: usize, found: usize },
    #[error("mapping sends {from} to element #{to}, which is not in the target")]
    OutOfRange { from: String, to: Element },
    #[error("diagram side says {diagram}, homomorphism search says {search}")]
    DiagramDisagreement { diagram: bool, search: bool },
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("malformed mapping file: {0}")]
    Format(String),
}

/// A total map from source elements to target elements, indexed by source position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mapping(pub Vec<Element>);

impl Mapping {
    pub fn identity(n: usize) -> Mapping {
        Mapping((0..n).collect())
    }

    pub fn apply(&self, e: Element) -> Element {
        self.0[e]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `other ∘ self`: first `self`, then `other`.
    pub fn then(&self, other: &Mapping) -> Mapping {
        Mapping(self.0.iter().map(|&e| other.apply(e)).collect())
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = self.0.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    pub fn is_surjective_onto(&self, target_size: usize) -> bool {
        let mut hit = vec![false; target_size];
        for &e in &self.0 {
            hit[e] = true;
        }
        hit.into_iter().all(|h| h)
    }

    pub fn to_file(&self, from: &Structure, to: &Structure) -> MappingFile {
        MappingFile {
            map: self
                .0
                .iter()
                .enumerate()
                .map(|(i, &e)| {
                    (
                        from.element_name(i).to_string(),
                        to.element_name(e).to_string(),
                    )
                })
                .collect(),
        }
    }

    pub fn from_file(
        file: &MappingFile,
        from: &Structure,
        to: &Structure,
    ) -> Result<Mapping, MorphismError> {
        let mut out = vec![None; from.size()];
        for (a, b) in &file.map {
            out[from.element(a)?] = Some(to.element(b)?);
        }
        let found = out.iter().filter(|e| e.is_some()).count();
        if found != from.size() {
            return Err(MorphismError::NotTotal {
                expected: from.size(),
                found,
            });
        }
        Ok(Mapping(out.into_iter().map(Option::unwrap).collect()))
    }
}

/// `{"map": {"a": "c", ...}}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingFile {
    pub map: BTreeMap<String, String>,
}

/// The first condition a candidate map breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `g(f(d̄)) != f(g(d̄))`.
    Function { symbol: String, args: Vec<Element> },
    /// `P(d̄)` is top in the source but `P(g(d̄))` is not top in the target.
    Predicate { symbol: String, args: Vec<Element> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Function { symbol, args } => write!(f, "function {symbol} at {args:?}"),
            Violation::Predicate { symbol, args } => write!(f, "predicate {symbol} at {args:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MorphismKind {
    None,
    Homomorphism,
    Embedding,
    Isomorphism,
}

pub fn check_compatible(m: &Structure, n: &Structure) -> Result<(), MorphismError> {
    let (lm, ln) = (m.language(), n.language());
    let same_symbols = lm.predicates().eq(ln.predicates()) && lm.functions().eq(ln.functions());
    if !same_symbols || lm.has_equality() != ln.has_equality() {
        return Err(MorphismError::LanguageMismatch);
    }
    if m.chain().size() != n.chain().size() || m.chain().tnorm_rows() != n.chain().tnorm_rows() {
        return Err(MorphismError::ChainMismatch);
    }
    Ok(())
}

fn check_total(g: &Mapping, m: &Structure, n: &Structure) -> Result<(), MorphismError> {
    if g.len() != m.size() {
        return Err(MorphismError::NotTotal {
            expected: m.size(),
            found: g.len(),
        });
    }
    if let Some((i, &e)) = g.0.iter().enumerate().find(|(_, &e)| e >= n.size()) {
        return Err(MorphismError::OutOfRange {
            from: m.element_name(i).to_string(),
            to: e,
        });
    }
    Ok(())
}

/// Tuples where `P` is top in `s`, in lexicographic order.
pub(crate) fn top_tuples(s: &Structure, pred: &str) -> Vec<Vec<Element>> {
    let table = s.predicate(pred).expect("predicate of the structure");
    let top = s.chain().top();
    let mut out: Vec<Vec<Element>> = if table.default_value() == top {
        tuples(s.size(), table.arity())
            .filter(|t| table.get(t) == top)
            .collect()
    } else {
        table
            .explicit()
            .filter(|&(_, v)| v == top)
            .map(|(t, _)| t.to_vec())
            .collect()
    };
    out.sort();
    out
}

/// Returns the first violated condition, or `None` when `g` is a homomorphism.
///
/// Functions are checked before predicates, each in symbol-name then tuple order.
pub fn find_violation(
    g: &Mapping,
    m: &Structure,
    n: &Structure,
) -> Result<Option<Violation>, MorphismError> {
    check_compatible(m, n)?;
    check_total(g, m, n)?;
    let size_m = m.size();
    let size_n = n.size();
    for (f, table) in m.functions() {
        let target = n.function(f).expect("compatible languages");
        for args in tuples(size_m, table.arity()) {
            let image: Vec<Element> = args.iter().map(|&a| g.apply(a)).collect();
            if g.apply(table.get(&args, size_m)) != target.get(&image, size_n) {
                return Ok(Some(Violation::Function {
                    symbol: f.to_string(),
                    args,
                }));
            }
        }
    }
    let top = n.chain().top();
    for (p, _) in m.predicates() {
        let target = n.predicate(p).expect("compatible languages");
        for args in top_tuples(m, p) {
            let image: Vec<Element> = args.iter().map(|&a| g.apply(a)).collect();
            if target.get(&image) != top {
                return Ok(Some(Violation::Predicate {
                    symbol: p.to_string(),
                    args,
                }));
            }
        }
    }
    Ok(None)
}

pub fn is_homomorphism(g: &Mapping, m: &Structure, n: &Structure) -> Result<bool, MorphismError> {
    Ok(find_violation(g, m, n)?.is_none())
}

pub fn classify_morphism(
    g: &Mapping,
    m: &Structure,
    n: &Structure,
) -> Result<MorphismKind, MorphismError> {
    if !is_homomorphism(g, m, n)? {
        return Ok(MorphismKind::None);
    }
    Ok(match (g.is_injective(), g.is_surjective_onto(n.size())) {
        (false, _) => MorphismKind::Homomorphism,
        (true, false) => MorphismKind::Embedding,
        (true, true) => MorphismKind::Isomorphism,
    })
}

// A condition that can be checked once all its source elements are assigned.
enum Constraint {
    Top {
        pred: String,
        args: Vec<Element>,
    },
    Commutes {
        func: String,
        args: Vec<Element>,
        value: Element,
    },
}

/// All homomorphisms `M -> N` (up to `limit`), by backtracking.
///
/// Source elements are assigned in domain order and candidates tried in target domain
/// order, so results come out lexicographically ordered. A constraint is checked as
/// soon as the last source element it mentions is assigned.
pub fn find_homomorphisms(
    m: &Structure,
    n: &Structure,
    limit: Option<usize>,
) -> Result<Vec<Mapping>, MorphismError> {
    check_compatible(m, n)?;
    let size_m = m.size();
    let mut by_last: Vec<Vec<Constraint>> = (0..size_m).map(|_| Vec::new()).collect();
    for (p, _) in m.predicates() {
        for args in top_tuples(m, p) {
            // 0-ary atoms have no element to hang on; check them up front.
            let last = args.iter().copied().max();
            let c = Constraint::Top {
                pred: p.to_string(),
                args,
            };
            match last {
                Some(l) => by_last[l].push(c),
                None => {
                    if n.predicate(p).expect("compatible").get(&[]) != n.chain().top() {
                        return Ok(Vec::new());
                    }
                }
            }
        }
    }
    for (f, table) in m.functions() {
        for args in tuples(size_m, table.arity()) {
            let value = table.get(&args, size_m);
            let last = args.iter().copied().chain([value]).max().expect("nonempty");
            by_last[last].push(Constraint::Commutes {
                func: f.to_string(),
                args,
                value,
            });
        }
    }

    let top = n.chain().top();
    let size_n = n.size();
    let holds = |c: &Constraint, g: &[Element]| -> bool {
        match c {
            Constraint::Top { pred, args } => {
                let image: smallvec::SmallVec<[Element; 4]> = args.iter().map(|&a| g[a]).collect();
                n.predicate(pred).expect("compatible").get(&image) == top
            }
            Constraint::Commutes { func, args, value } => {
                let image: smallvec::SmallVec<[Element; 4]> = args.iter().map(|&a| g[a]).collect();
                g[*value] == n.function(func).expect("compatible").get(&image, size_n)
            }
        }
    };

    let mut out = Vec::new();
    let mut g = vec![0; size_m];
    let want = limit.unwrap_or(usize::MAX);
    if want == 0 {
        return Ok(out);
    }
    fn search(
        i: usize,
        g: &mut Vec<Element>,
        size_n: usize,
        by_last: &[Vec<Constraint>],
        holds: &dyn Fn(&Constraint, &[Element]) -> bool,
        out: &mut Vec<Mapping>,
        want: usize,
    ) {
        if i == g.len() {
            out.push(Mapping(g.clone()));
            return;
        }
        for candidate in 0..size_n {
            g[i] = candidate;
            if by_last[i].iter().all(|c| holds(c, g)) {
                search(i + 1, g, size_n, by_last, holds, out, want);
                if out.len() >= want {
                    return;
                }
            }
        }
    }
    search(0, &mut g, size_n, &by_last, &holds, &mut out, want);
    Ok(out)
}

/// Checks that "some expansion of `n` models the diagram of `m`" agrees with "there is
/// a homomorphism `m -> n`", returning the shared answer.
///
/// The diagram side enumerates every interpretation of the element names of `m` in `n`
/// and evaluates the diagram sentences directly; it shares no code with the search.
pub fn check_diagram_lemma(m: &Structure, n: &Structure) -> Result<bool, MorphismError> {
    check_compatible(m, n)?;
    let diag = diagram(m)?;
    let names = element_constant_names(m);
    let mut expanded = n.clone();
    for name in &names {
        expanded.add_function(name, 0, 0)?;
    }
    let mut diagram_side = false;
    for assignment in tuples(n.size(), m.size()) {
        for (name, &e) in names.iter().zip(&assignment) {
            expanded.set_constant(name, e)?;
        }
        if expanded.is_model(&diag)? {
            diagram_side = true;
            break;
        }
    }
    let search_side = !find_homomorphisms(m, n, Some(1))?.is_empty();
    if diagram_side != search_side {
        return Err(MorphismError::DiagramDisagreement {
            diagram: diagram_side,
            search: search_side,
        });
    }
    Ok(diagram_side)
}
