//! Fragment classification and the distributivity-based rewriters.
//!
//! A pp-formula is an `∃`-prefix over a quantifier-free matrix built from atoms with
//! `∧` and `&`; existential positive formulas additionally allow `∨` in the matrix.
//! Truth constants and crisp equalities count as atoms.
//!
//! On any MTL-chain the t-norm and `min` are monotone, so they distribute over `min`
//! and `max`, and `∃` distributes over `max`. Both rewriters rely only on these
//! identities, hence they preserve the exact truth value, not just value top.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{Formula, SyntaxError};

/// Syntactic fragments a formula belongs to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FragmentTags {
    /// `∃x̄ ψ` with `ψ` built from atoms by `∧` only.
    pub wedge_primitive: bool,
    /// `∃x̄ ψ` with `ψ` built from atoms by `&` only.
    pub amp_primitive: bool,
    /// `∃x̄ ψ` with `ψ` built from atoms by `∧` and `&`.
    pub pp: bool,
    pub existential_positive: bool,
    pub sentence: bool,
}

impl FragmentTags {
    pub fn names(&self) -> Vec<&'static str> {
        [
            (self.wedge_primitive, "wedge_primitive"),
            (self.amp_primitive, "amp_primitive"),
            (self.pp, "pp"),
            (self.existential_positive, "existential_positive"),
            (self.sentence, "sentence"),
        ]
        .into_iter()
        .filter_map(|(on, n)| on.then_some(n))
        .collect()
    }
}

/// Splits off the leading `∃` quantifiers.
pub fn split_exists_prefix(phi: &Formula) -> (Vec<String>, &Formula) {
    let mut vars = Vec::new();
    let mut cur = phi;
    while let Formula::Exists(x, body) = cur {
        vars.push(x.clone());
        cur = body;
    }
    (vars, cur)
}

#[derive(Default)]
struct Connectives {
    strong: bool,
    weak_and: bool,
    weak_or: bool,
    other: bool,
}

fn scan(phi: &Formula, c: &mut Connectives) {
    match phi {
        Formula::StrongAnd(a, b) => {
            c.strong = true;
            scan(a, c);
            scan(b, c);
        }
        Formula::And(a, b) => {
            c.weak_and = true;
            scan(a, c);
            scan(b, c);
        }
        Formula::Or(a, b) => {
            c.weak_or = true;
            scan(a, c);
            scan(b, c);
        }
        Formula::Implies(..) | Formula::Forall(..) | Formula::Exists(..) => c.other = true,
        _ => {}
    }
}

pub fn classify(phi: &Formula) -> FragmentTags {
    let (_, matrix) = split_exists_prefix(phi);
    let mut c = Connectives::default();
    scan(matrix, &mut c);
    let ep = !c.other;
    let pp = ep && !c.weak_or;
    FragmentTags {
        wedge_primitive: pp && !c.strong,
        amp_primitive: pp && !c.weak_and,
        pp,
        existential_positive: ep,
        sentence: phi.is_sentence(),
    }
}

// A matrix in ∧-of-&-blocks form: each block is a multiset of atoms.
type Blocks = Vec<Vec<Formula>>;

fn blocks(matrix: &Formula) -> Blocks {
    match matrix {
        Formula::And(a, b) => {
            let mut out = blocks(a);
            out.extend(blocks(b));
            out
        }
        Formula::StrongAnd(a, b) => {
            let (left, right) = (blocks(a), blocks(b));
            let mut out = Vec::with_capacity(left.len() * right.len());
            for l in &left {
                for r in &right {
                    let mut block = l.clone();
                    block.extend(r.iter().cloned());
                    out.push(block);
                }
            }
            out
        }
        atom => vec![vec![atom.clone()]],
    }
}

fn rebuild(mut blocks: Blocks) -> Formula {
    // Canonical order: atoms by printed form inside each block, then blocks likewise.
    // `&` is not idempotent, so duplicate atoms inside a block stay; duplicate blocks
    // under `∧` are dropped.
    let mut keyed: Vec<(Vec<String>, Vec<Formula>)> = blocks
        .drain(..)
        .map(|mut b| {
            b.sort_by_cached_key(|a| a.to_string());
            (b.iter().map(|a| a.to_string()).collect(), b)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.dedup_by(|a, b| a.0 == b.0);
    keyed
        .into_iter()
        .map(|(_, block)| {
            block
                .into_iter()
                .reduce(Formula::strong_and)
                .expect("blocks are nonempty")
        })
        .reduce(Formula::and)
        .expect("at least one block")
}

/// Rewrites a pp-formula into `∃x̄ ⋀ᵢ ⨀ⱼ atomᵢⱼ` with canonically ordered layers.
pub fn pp_normal_form(phi: &Formula) -> Result<Formula, SyntaxError> {
    if !classify(phi).pp {
        return Err(SyntaxError::NotPp(phi.to_string()));
    }
    let (vars, matrix) = split_exists_prefix(phi);
    Ok(Formula::exists_many(&vars, rebuild(blocks(matrix))))
}

/// Checks the pp normal-form shape: `∃`-prefix, then an `∧`-layer, then `&`-blocks of atoms.
pub fn is_pp_normal_shape(phi: &Formula) -> bool {
    fn amp_layer(f: &Formula) -> bool {
        match f {
            Formula::StrongAnd(a, b) => amp_layer(a) && amp_layer(b),
            other => other.is_atomic(),
        }
    }
    fn and_layer(f: &Formula) -> bool {
        match f {
            Formula::And(a, b) => and_layer(a) && and_layer(b),
            other => amp_layer(other),
        }
    }
    let (_, matrix) = split_exists_prefix(phi);
    and_layer(matrix)
}

// Distributes & and ∧ over ∨; the result lists the ∨-free disjuncts.
fn disjuncts(matrix: &Formula) -> Vec<Formula> {
    match matrix {
        Formula::Or(a, b) => {
            let mut out = disjuncts(a);
            out.extend(disjuncts(b));
            out
        }
        Formula::StrongAnd(a, b) | Formula::And(a, b) => {
            let (left, right) = (disjuncts(a), disjuncts(b));
            let strong = matches!(matrix, Formula::StrongAnd(..));
            let mut out = Vec::with_capacity(left.len() * right.len());
            for l in &left {
                for r in &right {
                    out.push(if strong {
                        Formula::strong_and(l.clone(), r.clone())
                    } else {
                        Formula::and(l.clone(), r.clone())
                    });
                }
            }
            out
        }
        atom => vec![atom.clone()],
    }
}

/// Splits an existential positive formula into pp-formulas in normal form whose
/// pointwise maximum equals the input's value.
///
/// Quantified variables that no longer occur in a disjunct are dropped from its prefix
/// (domains are nonempty). Duplicate disjuncts are removed, keeping first occurrences.
pub fn ep_to_pp_disjunction(phi: &Formula) -> Result<Vec<Formula>, SyntaxError> {
    if !classify(phi).existential_positive {
        return Err(SyntaxError::NotEp(phi.to_string()));
    }
    let (vars, matrix) = split_exists_prefix(phi);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for d in disjuncts(matrix) {
        let free = d.free_vars();
        let used: Vec<&String> = vars.iter().filter(|v| free.contains(*v)).collect();
        let nf = pp_normal_form(&Formula::exists_many(&used, d))?;
        if seen.insert(nf.to_string()) {
            out.push(nf);
        }
    }
    Ok(out)
}
