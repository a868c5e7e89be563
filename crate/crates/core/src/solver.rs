//! Exact values and witnesses for pp and EP sentences.
//!
//! A pp-sentence is first put in normal form `∃x̄ ⋀ᵢ ⨀ⱼ atomᵢⱼ`. The search assigns the
//! quantified variables one at a time and keeps, for each `&`-block, the t-norm of the
//! atoms already fully assigned. Since the t-norm and `min` are monotone and top is
//! the unit, the minimum of these partial products bounds every completion, which
//! gives a branch-and-bound over the chain order.

use std::cmp::Reverse;
use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::algebra::Degree;
use crate::morphisms::top_tuples;
use crate::structures::{Structure, StructureError, Valuation};
use crate::syntax::{
    classify, ep_to_pp_disjunction, pp_normal_form, split_exists_prefix, Formula, SyntaxError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("expected a sentence, `{0}` has free variables")]
    NotASentence(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolveResult {
    pub value: Degree,
    /// Assignment of the outer `∃` variables attaining `value`; `None` without a prefix.
    pub witness: Option<Valuation>,
    pub decided_top: bool,
    /// For EP sentences, the index of the first pp-disjunct attaining the value.
    pub disjunct: Option<usize>,
}

struct Problem<'a> {
    structure: &'a Structure,
    /// Variables in search order.
    order: Vec<String>,
    blocks: Vec<Vec<Formula>>,
    /// `ready[d]` lists (block, atom) pairs whose variables are all among `order[..d]`.
    ready: Vec<Vec<(usize, usize)>>,
}

fn split_blocks(matrix: &Formula) -> Vec<Vec<Formula>> {
    fn amp(f: &Formula, out: &mut Vec<Formula>) {
        match f {
            Formula::StrongAnd(a, b) => {
                amp(a, out);
                amp(b, out);
            }
            atom => out.push(atom.clone()),
        }
    }
    fn and(f: &Formula, out: &mut Vec<Vec<Formula>>) {
        match f {
            Formula::And(a, b) => {
                and(a, out);
                and(b, out);
            }
            block => {
                let mut atoms = Vec::new();
                amp(block, &mut atoms);
                out.push(atoms);
            }
        }
    }
    let mut out = Vec::new();
    and(matrix, &mut out);
    out
}

impl<'a> Problem<'a> {
    fn new(structure: &'a Structure, phi: &Formula) -> Result<Problem<'a>, SolveError> {
        let nf = pp_normal_form(phi)?;
        let (vars, matrix) = split_exists_prefix(&nf);
        let blocks = split_blocks(matrix);

        // Most constrained first: fewer top-valued tuples across a variable's atoms.
        let top_counts: std::collections::BTreeMap<&str, usize> = structure
            .predicates()
            .map(|(p, _)| (p, top_tuples(structure, p).len()))
            .collect();
        let score = |v: &str| -> (Reverse<bool>, usize, String) {
            let mut total = 0usize;
            let mut occurs = false;
            for atom in blocks.iter().flatten() {
                if !atom.free_vars().contains(v) {
                    continue;
                }
                occurs = true;
                total += match atom {
                    Formula::Atom(p, _) => top_counts.get(p.as_str()).copied().unwrap_or(0),
                    _ => structure.size(),
                };
            }
            (Reverse(occurs), total, v.to_string())
        };
        let mut order: Vec<String> = vars.clone();
        order.sort_by_cached_key(|v| score(v));

        let mut ready = vec![Vec::new(); order.len() + 1];
        for (b, block) in blocks.iter().enumerate() {
            for (a, atom) in block.iter().enumerate() {
                let fv = atom.free_vars();
                let depth = order
                    .iter()
                    .rposition(|v| fv.contains(v))
                    .map_or(0, |p| p + 1);
                ready[depth].push((b, a));
            }
        }
        Ok(Problem {
            structure,
            order,
            blocks,
            ready,
        })
    }

    /// Branch and bound. With `threshold = Some(t)` every branch whose bound drops
    /// below `t` is cut and the search stops at the first leaf reaching `t`.
    fn search(&self, threshold: Option<Degree>) -> Result<Option<(Degree, Valuation)>, SolveError> {
        let top = self.structure.chain().top();
        let mut partial = vec![top; self.blocks.len()];
        let mut env = Valuation::new();
        let mut best: Option<(Degree, Valuation)> = None;
        self.descend(0, &mut partial, &mut env, &mut best, threshold, top)?;
        Ok(best)
    }

    fn descend(
        &self,
        depth: usize,
        partial: &mut Vec<Degree>,
        env: &mut Valuation,
        best: &mut Option<(Degree, Valuation)>,
        threshold: Option<Degree>,
        top: Degree,
    ) -> Result<(), SolveError> {
        let chain = self.structure.chain();
        let saved = partial.clone();
        for &(b, a) in &self.ready[depth] {
            let v = self.structure.evaluate(&self.blocks[b][a], env)?;
            partial[b] = chain.tnorm(partial[b], v);
        }
        let bound = partial.iter().copied().min().unwrap_or(top);
        let cut = match (threshold, best.as_ref()) {
            (Some(t), _) if bound < t => true,
            (_, Some((b, _))) if bound <= *b => true,
            _ => false,
        };
        if !cut {
            if depth == self.order.len() {
                *best = Some((bound, env.clone()));
            } else {
                let var = &self.order[depth];
                for e in 0..self.structure.size() {
                    env.insert(var.clone(), e);
                    self.descend(depth + 1, partial, env, best, threshold, top)?;
                    let done = match best.as_ref() {
                        Some((b, _)) => *b == top || threshold.is_some_and(|t| *b >= t),
                        None => false,
                    };
                    if done {
                        break;
                    }
                }
                env.remove(var);
            }
        }
        *partial = saved;
        Ok(())
    }
}

fn require_sentence(phi: &Formula) -> Result<(), SolveError> {
    if phi.is_sentence() {
        Ok(())
    } else {
        Err(SolveError::NotASentence(phi.to_string()))
    }
}

/// Exact value of a pp-sentence, with a witness for its `∃`-prefix.
pub fn solve_pp(s: &Structure, phi: &Formula) -> Result<SolveResult, SolveError> {
    if !classify(phi).pp {
        return Err(SyntaxError::NotPp(phi.to_string()).into());
    }
    require_sentence(phi)?;
    let problem = Problem::new(s, phi)?;
    let (value, witness) = problem
        .search(None)?
        .expect("an unconstrained search always reaches a leaf");
    let has_prefix = !split_exists_prefix(phi).0.is_empty();
    Ok(SolveResult {
        value,
        witness: has_prefix.then_some(witness),
        decided_top: value == s.chain().top(),
        disjunct: None,
    })
}

/// Decides whether a pp-sentence has value top, cutting every branch where some
/// fully assigned atom falls below top. Returns a witness when it does.
pub fn decide_top(s: &Structure, phi: &Formula) -> Result<Option<Valuation>, SolveError> {
    if !classify(phi).pp {
        return Err(SyntaxError::NotPp(phi.to_string()).into());
    }
    require_sentence(phi)?;
    let problem = Problem::new(s, phi)?;
    Ok(problem
        .search(Some(s.chain().top()))?
        .map(|(_, witness)| witness))
}

/// Exact value of an EP sentence: the best of its pp-disjuncts.
///
/// The witness covers the whole outer prefix; variables the winning disjunct does not
/// use are set to the first domain element.
pub fn solve_ep(s: &Structure, phi: &Formula) -> Result<SolveResult, SolveError> {
    if !classify(phi).existential_positive {
        return Err(SyntaxError::NotEp(phi.to_string()).into());
    }
    require_sentence(phi)?;
    let disjuncts = ep_to_pp_disjunction(phi)?;
    let mut best: Option<(usize, SolveResult)> = None;
    for (i, d) in disjuncts.iter().enumerate() {
        let r = solve_pp(s, d)?;
        if best.as_ref().is_none_or(|(_, b)| r.value > b.value) {
            let top = r.decided_top;
            best = Some((i, r));
            if top {
                break;
            }
        }
    }
    let (index, result) = best.expect("at least one disjunct");
    let prefix: BTreeSet<String> = split_exists_prefix(phi).0.into_iter().collect();
    let witness = (!prefix.is_empty()).then(|| {
        let mut w = result.witness.clone().unwrap_or_default();
        for v in prefix {
            w.entry(v).or_insert(0);
        }
        w
    });
    Ok(SolveResult {
        value: result.value,
        witness,
        decided_top: result.decided_top,
        disjunct: Some(index),
    })
}
