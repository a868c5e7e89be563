//! Seeded random generators. Every generator draws only from the wrapped RNG, so
//! output is a pure function of the seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Chain, Degree};
use crate::morphisms::Mapping;
use crate::structures::{tuples, Structure};
use crate::syntax::{Formula, Language, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Component {
    Lukasiewicz,
    Min,
    NilpotentMin,
}

/// Shape constraints for [`Gen::formula`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaSpec {
    /// Number of free variables `x0, x1, ...` available to atoms.
    pub free: usize,
    pub depth: usize,
    /// Cap on the `∃`-variables `y0, y1, ...` hoisted to the prefix.
    pub max_bound: usize,
    pub disjunction: bool,
    /// Makes the matrix an implication, and lets each binary connective below it come
    /// out as `→` half of the time.
    pub implication: bool,
}

pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Łukasiewicz, Gödel or an ordinal sum, of size `2..=max_size`.
    pub fn chain(&mut self, max_size: usize) -> Chain {
        let n = self.rng.gen_range(2..=max_size.max(2));
        match self.rng.gen_range(0..3) {
            0 => Chain::lukasiewicz(n).expect("size at least 2"),
            1 => Chain::godel(n).expect("size at least 2"),
            _ => self.ordinal_sum(n),
        }
    }

    /// A custom chain of size `n`: an ordinal sum of Łukasiewicz, minimum and
    /// nilpotent-minimum pieces glued at random idempotent cut points.
    pub fn ordinal_sum(&mut self, n: usize) -> Chain {
        let top = n - 1;
        let mut cuts = vec![0];
        cuts.extend((1..top).filter(|_| self.rng.gen_bool(0.5)));
        cuts.push(top);
        let pieces: Vec<(Degree, Degree, Component)> = cuts
            .windows(2)
            .map(|w| {
                let kind = *[
                    Component::Lukasiewicz,
                    Component::Min,
                    Component::NilpotentMin,
                ]
                .choose(&mut self.rng)
                .expect("nonempty");
                (w[0], w[1], kind)
            })
            .collect();
        let mut table = vec![vec![0; n]; n];
        for (x, row) in table.iter_mut().enumerate() {
            for (y, cell) in row.iter_mut().enumerate() {
                let (lo, hi) = (x.min(y), x.max(y));
                let piece = pieces.iter().find(|(a, b, _)| *a <= lo && hi <= *b);
                *cell = match piece {
                    Some(&(a, b, Component::Lukasiewicz)) => (x + y).saturating_sub(b).max(a),
                    Some(&(a, b, Component::NilpotentMin)) if x + y <= a + b => a,
                    _ => lo,
                };
            }
        }
        Chain::custom(n, &table).expect("ordinal sums of t-norms are t-norms")
    }

    /// One to three predicates (the first of positive arity when allowed), and
    /// sometimes a unary function `f` and a constant `k`. Equality is always on.
    pub fn language(&mut self, max_arity: usize) -> Language {
        let mut lang = Language::new();
        let count = self.rng.gen_range(1..=3);
        for (i, name) in ["P", "Q", "R"].into_iter().take(count).enumerate() {
            let low = usize::from(i == 0).min(max_arity);
            let arity = self.rng.gen_range(low..=max_arity);
            lang.add_predicate(name, arity).expect("fresh name");
        }
        if self.rng.gen_bool(0.25) {
            lang.add_function("f", 1).expect("fresh name");
        }
        if self.rng.gen_bool(0.25) {
            lang.add_function("k", 0).expect("fresh name");
        }
        lang
    }

    /// Elements `e0, e1, ...`. Each predicate entry is top with probability
    /// `top_prob`, otherwise uniform below top; functions are uniform.
    pub fn structure(
        &mut self,
        chain: &Chain,
        lang: &Language,
        size: usize,
        top_prob: f64,
    ) -> Structure {
        let names = (0..size).map(|i| format!("e{i}")).collect();
        let mut s = Structure::new(chain.clone(), lang.clone(), names).expect("valid names");
        let top = chain.top();
        for (p, arity) in lang.predicates() {
            for args in tuples(size, arity) {
                let v = if self.rng.gen_bool(top_prob) {
                    top
                } else {
                    self.rng.gen_range(0..top)
                };
                s.set_predicate(p, &args, v).expect("in range");
            }
        }
        for (f, arity) in lang.functions() {
            for args in tuples(size, arity) {
                let v = self.rng.gen_range(0..size);
                s.set_function(f, &args, v).expect("in range");
            }
        }
        s
    }

    pub fn mapping(&mut self, from: usize, to: usize) -> Mapping {
        Mapping((0..from).map(|_| self.rng.gen_range(0..to)).collect())
    }

    pub fn tuple(&mut self, size: usize, len: usize) -> Vec<usize> {
        (0..len).map(|_| self.rng.gen_range(0..size)).collect()
    }

    /// A prenex formula `∃ȳ. matrix` with free variables among `x0..`.
    ///
    /// Weights per node: atom 40, `&` 20, `∧` 20, `∨` 10 (folded into atoms without
    /// disjunction), `∃` 10. An `∃` node introduces a fresh `y` variable for the rest
    /// of the matrix and is hoisted to the prefix.
    pub fn formula(&mut self, lang: &Language, spec: &FormulaSpec) -> Formula {
        let mut scope = Scope {
            vars: (0..spec.free).map(|i| format!("x{i}")).collect(),
            bound: Vec::new(),
        };
        let matrix = if spec.implication && spec.depth > 0 {
            let a = self.node(lang, spec, &mut scope, spec.depth - 1);
            let b = self.node(lang, spec, &mut scope, spec.depth - 1);
            Formula::implies(a, b)
        } else {
            self.node(lang, spec, &mut scope, spec.depth)
        };
        let used = matrix.free_vars();
        let prefix: Vec<&String> = scope.bound.iter().filter(|v| used.contains(*v)).collect();
        Formula::exists_many(&prefix, matrix)
    }

    fn node(
        &mut self,
        lang: &Language,
        spec: &FormulaSpec,
        scope: &mut Scope,
        depth: usize,
    ) -> Formula {
        if depth == 0 {
            return self.atom(lang, spec, scope);
        }
        let roll = self.rng.gen_range(0..100);
        let binary = |g: &mut Gen, scope: &mut Scope, make: fn(Formula, Formula) -> Formula| {
            let a = g.node(lang, spec, scope, depth - 1);
            let b = g.node(lang, spec, scope, depth - 1);
            if spec.implication && g.rng.gen_bool(0.5) {
                Formula::implies(a, b)
            } else {
                make(a, b)
            }
        };
        match roll {
            0..40 => self.atom(lang, spec, scope),
            40..60 => binary(self, scope, Formula::strong_and),
            60..80 => binary(self, scope, Formula::and),
            80..90 if spec.disjunction => binary(self, scope, Formula::or),
            80..90 => self.atom(lang, spec, scope),
            _ => {
                scope.introduce(spec.max_bound);
                self.node(lang, spec, scope, depth - 1)
            }
        }
    }

    fn atom(&mut self, lang: &Language, spec: &FormulaSpec, scope: &mut Scope) -> Formula {
        let roll = self.rng.gen_range(0..100);
        if roll < 3 {
            return Formula::Top;
        }
        if roll < 12 && lang.has_equality() {
            let a = self.term(lang, spec, scope);
            let b = self.term(lang, spec, scope);
            return Formula::Eq(a, b);
        }
        let preds: Vec<(&str, usize)> = lang.predicates().collect();
        let Some(&(p, arity)) = preds.choose(&mut self.rng) else {
            return Formula::Top;
        };
        let args = (0..arity).map(|_| self.term(lang, spec, scope)).collect();
        Formula::atom(p, args)
    }

    fn term(&mut self, lang: &Language, spec: &FormulaSpec, scope: &mut Scope) -> Term {
        let constants: Vec<&str> = lang.constants().collect();
        if scope.vars.is_empty() && (constants.is_empty() || self.rng.gen_bool(0.5)) {
            scope.introduce(spec.max_bound.max(1));
        }
        if scope.vars.is_empty() {
            return Term::constant(constants.choose(&mut self.rng).expect("nonempty"));
        }
        let var = Term::var(scope.vars.choose(&mut self.rng).expect("nonempty"));
        let roll = self.rng.gen_range(0..100);
        if roll < 15 && !constants.is_empty() {
            Term::constant(constants.choose(&mut self.rng).expect("nonempty"))
        } else if roll < 25 && lang.function_arity("f") == Some(1) {
            Term::App("f".into(), vec![var])
        } else {
            var
        }
    }
}

struct Scope {
    vars: Vec<String>,
    bound: Vec<String>,
}

impl Scope {
    fn introduce(&mut self, cap: usize) {
        if self.bound.len() < cap {
            let y = format!("y{}", self.bound.len());
            self.vars.push(y.clone());
            self.bound.push(y);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::classify;

    #[test]
    fn ordinal_sums_are_valid_chains() {
        let mut g = Gen::new(3);
        for n in 2..=7 {
            for _ in 0..40 {
                let c = g.ordinal_sum(n);
                assert_eq!(c.size(), n);
            }
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let spec = FormulaSpec {
            free: 1,
            depth: 4,
            max_bound: 3,
            disjunction: true,
            implication: false,
        };
        let run = |seed| {
            let mut g = Gen::new(seed);
            let chain = g.chain(4);
            let lang = g.language(2);
            let s = g.structure(&chain, &lang, 3, 0.5);
            (s, g.formula(&lang, &spec))
        };
        assert_eq!(run(11), run(11));
    }

    #[test]
    fn fragments_respected() {
        let mut g = Gen::new(5);
        let lang = Language::new()
            .with_predicate("P", 1)
            .with_predicate("R", 2);
        for i in 0..300 {
            let spec = FormulaSpec {
                free: i % 3,
                depth: 4,
                max_bound: 3,
                disjunction: i % 2 == 0,
                implication: false,
            };
            let phi = g.formula(&lang, &spec);
            let tags = classify(&phi);
            assert!(tags.existential_positive, "{phi}");
            if !spec.disjunction {
                assert!(tags.pp, "{phi}");
            }
            assert!(phi.free_vars().len() <= spec.free);
        }
    }

    #[test]
    fn bounds_respected() {
        let mut g = Gen::new(9);
        for _ in 0..100 {
            let c = g.chain(4);
            assert!((2..=4).contains(&c.size()));
            let lang = g.language(2);
            assert!(lang.predicates().all(|(_, a)| a <= 2));
            let m = g.mapping(3, 2);
            assert!(m.0.iter().all(|&e| e < 2));
        }
    }
}
