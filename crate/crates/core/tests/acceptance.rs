//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mtlmodel::algebra::{Chain, ChainKind, Degree};
use mtlmodel::harness::gen::{FormulaSpec, Gen};
use mtlmodel::harness::{
    check_hom_preservation, check_pp_theory_closure, check_product_preservation,
    find_below_top_counterexample, GenConfig, Verdict,
};
use mtlmodel::morphisms::{check_diagram_lemma, is_homomorphism, Mapping};
use mtlmodel::products::{projection, weak_product, WeakPolicy};
use mtlmodel::solver::{decide_top, solve_pp};
use mtlmodel::structures::{tuples, Element, Structure, Valuation};
use mtlmodel::syntax::{
    ep_to_pp_disjunction, is_pp_normal_shape, parse_all_inferring, pp_normal_form,
    split_exists_prefix, Formula, Language, Term,
};

const SEED: u64 = 20240601;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

// ---------------------------------------------------------------------------
// Reference semantics, written directly from the definitions.

/// T-norm recomputed from the chain kind; custom chains supply their table.
fn reference_tnorm(c: &Chain) -> Vec<Vec<Degree>> {
    let n = c.size();
    let top = n - 1;
    match c.kind() {
        ChainKind::Lukasiewicz => (0..n)
            .map(|x| (0..n).map(|y| (x + y).saturating_sub(top)).collect())
            .collect(),
        ChainKind::Godel => (0..n).map(|x| (0..n).map(|y| x.min(y)).collect()).collect(),
        ChainKind::Custom => c.tnorm_rows(),
    }
}

struct Reference<'a> {
    s: &'a Structure,
    t: Vec<Vec<Degree>>,
    top: Degree,
}

impl<'a> Reference<'a> {
    fn new(s: &'a Structure) -> Self {
        Reference {
            s,
            t: reference_tnorm(s.chain()),
            top: s.chain().top(),
        }
    }

    fn residuum(&self, x: Degree, y: Degree) -> Degree {
        (0..=self.top)
            .filter(|&z| self.t[x][z] <= y)
            .max()
            .expect("0 always qualifies")
    }

    fn term(&self, t: &Term, env: &HashMap<String, Element>) -> Element {
        match t {
            Term::Var(v) => env[v],
            Term::App(f, args) => {
                let vals: Vec<Element> = args.iter().map(|a| self.term(a, env)).collect();
                self.s
                    .function(f)
                    .expect("function of the language")
                    .get(&vals, self.s.size())
            }
        }
    }

    fn eval(&self, phi: &Formula, env: &mut HashMap<String, Element>) -> Degree {
        match phi {
            Formula::Atom(p, args) => {
                if let Some(k) = self.s.language().algebra_constant(p) {
                    return k;
                }
                let vals: Vec<Element> = args.iter().map(|a| self.term(a, env)).collect();
                self.s
                    .predicate(p)
                    .expect("predicate of the language")
                    .get(&vals)
            }
            Formula::Eq(a, b) => {
                if self.term(a, env) == self.term(b, env) {
                    self.top
                } else {
                    0
                }
            }
            Formula::Bottom => 0,
            Formula::Top => self.top,
            Formula::Truth(k) => *k,
            Formula::StrongAnd(a, b) => {
                let (x, y) = (self.eval(a, env), self.eval(b, env));
                self.t[x][y]
            }
            Formula::And(a, b) => self.eval(a, env).min(self.eval(b, env)),
            Formula::Or(a, b) => self.eval(a, env).max(self.eval(b, env)),
            Formula::Implies(a, b) => {
                let (x, y) = (self.eval(a, env), self.eval(b, env));
                self.residuum(x, y)
            }
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let saved = env.get(x).copied();
                let values: Vec<Degree> = (0..self.s.size())
                    .map(|e| {
                        env.insert(x.clone(), e);
                        self.eval(body, env)
                    })
                    .collect();
                match saved {
                    Some(e) => env.insert(x.clone(), e),
                    None => env.remove(x),
                };
                if matches!(phi, Formula::Forall(..)) {
                    values.into_iter().min().expect("nonempty domain")
                } else {
                    values.into_iter().max().expect("nonempty domain")
                }
            }
        }
    }
}

/// Full-syntax random formulas over variables `u, v, w`.
fn random_formula(rng: &mut ChaCha8Rng, lang: &Language, chain: &Chain, depth: usize) -> Formula {
    const VARS: [&str; 3] = ["u", "v", "w"];
    let term = |rng: &mut ChaCha8Rng| -> Term {
        let var = Term::var(VARS.choose(rng).unwrap());
        let roll = rng.gen_range(0..10);
        if roll == 0 && lang.function_arity("f") == Some(1) {
            Term::App("f".into(), vec![var])
        } else if roll == 1 && lang.function_arity("k") == Some(0) {
            Term::constant("k")
        } else {
            var
        }
    };
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..10) {
            0 => Formula::Eq(term(rng), term(rng)),
            1 => match rng.gen_range(0..3) {
                0 => Formula::Bottom,
                1 => Formula::Top,
                _ => Formula::Truth(rng.gen_range(0..chain.size())),
            },
            _ => {
                let preds: Vec<(&str, usize)> = lang.predicates().collect();
                let (p, arity) = *preds.choose(rng).unwrap();
                Formula::atom(p, (0..arity).map(|_| term(rng)).collect())
            }
        };
    }
    let sub = |rng: &mut ChaCha8Rng| random_formula(rng, lang, chain, depth - 1);
    match rng.gen_range(0..7) {
        0 => Formula::strong_and(sub(rng), sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::implies(sub(rng), sub(rng)),
        4 => Formula::forall(VARS.choose(rng).unwrap(), sub(rng)),
        5 => Formula::exists(VARS.choose(rng).unwrap(), sub(rng)),
        _ => Formula::negate(sub(rng)),
    }
}

// ---------------------------------------------------------------------------

fn algebra_soundness() -> Outcome {
    let mut chains = Vec::new();
    for n in 2..=6 {
        chains.push(Chain::lukasiewicz(n).unwrap());
        chains.push(Chain::godel(n).unwrap());
    }
    let mut g = Gen::new(SEED);
    for _ in 0..50 {
        let n = g.rng().gen_range(2..=6);
        chains.push(g.ordinal_sum(n));
    }
    let mut violations = 0;
    for c in &chains {
        let t = reference_tnorm(c);
        let n = c.size();
        let top = n - 1;
        for x in 0..n {
            violations += usize::from(t[x][top] != x || t[x][0] != 0);
            for y in 0..n {
                violations += usize::from(c.tnorm(x, y) != t[x][y] || t[x][y] != t[y][x]);
                let r = c.residuum(x, y);
                for z in 0..n {
                    violations += usize::from((t[x][z] <= y) != (z <= r));
                    violations += usize::from(t[t[x][y]][z] != t[x][t[y][z]]);
                    if y <= z {
                        violations += usize::from(t[x][y] > t[x][z]);
                    }
                }
            }
        }
    }
    outcome(
        violations == 0,
        format!(
            "{} chains (10 standard, 50 custom), {violations} violations",
            chains.len()
        ),
    )
}

fn semantics_oracle() -> Outcome {
    let mut g = Gen::new(SEED + 2);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let chain = g.chain(4);
        let lang = g.language(2);
        let size = g.rng().gen_range(1..=3);
        let p = g.rng().gen_range(0.2..0.8);
        let s = g.structure(&chain, &lang, size, p);
        let depth = rng.gen_range(1..=4);
        let phi = random_formula(&mut rng, &lang, &chain, depth);
        let mut env: HashMap<String, Element> = ["u", "v", "w"]
            .iter()
            .map(|v| (v.to_string(), rng.gen_range(0..size)))
            .collect();
        let valuation: Valuation = env.iter().map(|(k, &v)| (k.clone(), v)).collect();
        let expected = Reference::new(&s).eval(&phi, &mut env);
        if s.evaluate(&phi, &valuation).unwrap() != expected {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("1000 triples, {mismatches} mismatches"),
    )
}

fn all_small_structures(chain: &Chain, lang: &Language) -> Vec<Structure> {
    let n = chain.size();
    let mut out = Vec::new();
    for size in 1..=2 {
        let names: Vec<String> = (0..size).map(|i| format!("e{i}")).collect();
        let slots: Vec<(String, Vec<Element>)> = lang
            .predicates()
            .flat_map(|(p, arity)| tuples(size, arity).map(move |t| (p.to_string(), t)))
            .collect();
        let count = n.pow(slots.len() as u32);
        for code in 0..count {
            let mut s = Structure::new(chain.clone(), lang.clone(), names.clone()).unwrap();
            let mut rest = code;
            for (p, t) in &slots {
                s.set_predicate(p, t, rest % n).unwrap();
                rest /= n;
            }
            out.push(s);
        }
    }
    out
}

fn normal_form_equivalence() -> Outcome {
    let chain = Chain::lukasiewicz(3).unwrap();
    let lang = Language::new()
        .with_predicate("P", 1)
        .with_predicate("R", 2);
    let structures = all_small_structures(&chain, &lang);
    let mut g = Gen::new(SEED + 3);
    let (mut violations, mut bad_shape) = (0, 0);
    for i in 0..500 {
        let spec = FormulaSpec {
            free: i % 2,
            depth: g.rng().gen_range(1..=4),
            max_bound: 3,
            disjunction: false,
            implication: false,
        };
        let phi = g.formula(&lang, &spec);
        let nf = pp_normal_form(&phi).unwrap();
        bad_shape += usize::from(!is_pp_normal_shape(&nf));
        let vars: Vec<String> = phi.free_vars().into_iter().collect();
        for s in &structures {
            for d in tuples(s.size(), vars.len()) {
                let v: Valuation = vars.iter().cloned().zip(d).collect();
                if s.evaluate(&phi, &v).unwrap() != s.evaluate(&nf, &v).unwrap() {
                    violations += 1;
                }
            }
        }
    }
    outcome(
        violations == 0 && bad_shape == 0,
        format!(
            "500 formulas x {} structures, {violations} value violations, {bad_shape} shape failures",
            structures.len()
        ),
    )
}

fn ep_decomposition() -> Outcome {
    let mut g = Gen::new(SEED + 4);
    let mut violations = 0;
    for _ in 0..500 {
        let chain = g.chain(4);
        let lang = g.language(2);
        let spec = FormulaSpec {
            free: 0,
            depth: g.rng().gen_range(1..=4),
            max_bound: 3,
            disjunction: true,
            implication: false,
        };
        let phi = g.formula(&lang, &spec);
        let parts = ep_to_pp_disjunction(&phi).unwrap();
        for _ in 0..3 {
            let size = g.rng().gen_range(1..=3);
            let s = g.structure(&chain, &lang, size, 0.5);
            let reference = Reference::new(&s);
            let best = parts
                .iter()
                .map(|p| reference.eval(p, &mut HashMap::new()))
                .max()
                .unwrap();
            if best != reference.eval(&phi, &mut HashMap::new())
                || best != s.evaluate_sentence(&phi).unwrap()
            {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("500 sentences x 3 structures, {violations} violations"),
    )
}

fn desk(trials: usize, seed: u64) -> GenConfig {
    GenConfig {
        seed,
        trials,
        ..GenConfig::default()
    }
}

fn hom_preservation() -> Outcome {
    let plain = check_hom_preservation(&desk(1000, SEED + 5)).unwrap();
    let mutated = check_hom_preservation(&GenConfig {
        implication: true,
        ..desk(1000, SEED + 5)
    })
    .unwrap();
    let below = find_below_top_counterexample(&desk(200, SEED + 5)).unwrap();
    let ok = plain.verdict == Verdict::Pass
        && plain.trials == 1000
        && !mutated.violations.is_empty()
        && below.is_some();
    outcome(
        ok,
        format!(
            "{} effective trials, {} violations; with implication {} violations; below-top counterexample {}",
            plain.trials,
            plain.violations.len(),
            mutated.violations.len(),
            if below.is_some() { "found" } else { "missing" }
        ),
    )
}

fn product_preservation() -> Outcome {
    let r = check_product_preservation(&desk(500, SEED + 6)).unwrap();
    outcome(
        r.verdict == Verdict::Pass && r.trials == 500,
        format!(
            "{} effective trials (canonical and scrambled each), {} violations",
            r.trials,
            r.violations.len()
        ),
    )
}

fn projections() -> Outcome {
    let mut g = Gen::new(SEED + 7);
    let mut failures = 0;
    let mut checked = 0;
    for i in 0..200 {
        let chain = g.chain(4);
        let lang = g.language(2);
        let k = g.rng().gen_range(1..=3);
        let max = if k == 3 { 2 } else { 3 };
        let factors: Vec<Structure> = (0..k)
            .map(|_| {
                let size = g.rng().gen_range(1..=max);
                g.structure(&chain, &lang, size, 0.6)
            })
            .collect();
        let policy = if i % 2 == 0 {
            WeakPolicy::Min
        } else {
            WeakPolicy::Scrambled {
                seed: g.rng().gen(),
            }
        };
        let product = weak_product(&factors, policy).unwrap();
        for (j, f) in factors.iter().enumerate() {
            checked += 1;
            let pi = projection(&product, j).unwrap();
            if !is_homomorphism(&pi, product.structure(), f).unwrap() {
                failures += 1;
            }
        }
    }
    outcome(
        failures == 0,
        format!("200 products, {checked} projections, {failures} failures"),
    )
}

/// Existence of a homomorphism by trying every map.
fn some_map_is_homomorphism(m: &Structure, n: &Structure) -> bool {
    tuples(n.size(), m.size()).any(|g| is_homomorphism(&Mapping(g), m, n).unwrap())
}

fn diagram_lemma() -> Outcome {
    let mut g = Gen::new(SEED + 8);
    let (mut disagreements, mut positive) = (0, 0);
    for _ in 0..300 {
        let chain = g.chain(4);
        let lang = g.language(2);
        let (a, b) = (g.rng().gen_range(1..=3), g.rng().gen_range(1..=3));
        let pm = g.rng().gen_range(0.1..0.6);
        let pn = g.rng().gen_range(0.4..0.95);
        let m = g.structure(&chain, &lang, a, pm);
        let n = g.structure(&chain, &lang, b, pn);
        match check_diagram_lemma(&m, &n) {
            Ok(found) if found == some_map_is_homomorphism(&m, &n) => {
                positive += usize::from(found)
            }
            _ => disagreements += 1,
        }
    }
    outcome(
        disagreements == 0,
        format!("300 pairs ({positive} with a homomorphism), {disagreements} disagreements"),
    )
}

fn theory_closure() -> Outcome {
    let sets: [&[&str]; 5] = [
        &["E x. P(x)"],
        &["E x y. R(x, y) & R(y, x)"],
        &["E x. P(x) /\\ Q(x)", "E x. R(x, x)"],
        &["E x y. R(x, y) & P(y) /\\ x = y"],
        &["E x. R(x, f(x)) & P(f(x))", "E x y. P(x) & P(y)"],
    ];
    let mut failures = Vec::new();
    let mut effective = 0;
    for (i, set) in sets.iter().enumerate() {
        let (axioms, lang) = parse_all_inferring(set).unwrap();
        let r = check_pp_theory_closure(&desk(100, SEED + 9 + i as u64), &lang, &axioms).unwrap();
        effective += r.trials;
        if r.verdict != Verdict::Pass {
            failures.push(i);
        }
    }
    outcome(
        failures.is_empty(),
        format!("5 axiom sets, {effective} effective trials, failing sets {failures:?}"),
    )
}

fn solver_equivalence() -> Outcome {
    let mut g = Gen::new(SEED + 10);
    let (mut value_bad, mut witness_bad, mut decide_bad, mut tops) = (0, 0, 0, 0);
    for _ in 0..500 {
        let chain = g.chain(4);
        let lang = g.language(2);
        let size = g.rng().gen_range(1..=3);
        let s = g.structure(&chain, &lang, size, 0.6);
        let spec = FormulaSpec {
            free: 0,
            depth: g.rng().gen_range(1..=4),
            max_bound: 3,
            disjunction: false,
            implication: false,
        };
        let phi = g.formula(&lang, &spec);
        let r = solve_pp(&s, &phi).unwrap();
        value_bad += usize::from(r.value != Reference::new(&s).eval(&phi, &mut HashMap::new()));
        let (prefix, matrix) = split_exists_prefix(&phi);
        match &r.witness {
            Some(w) => witness_bad += usize::from(s.evaluate(matrix, w).unwrap() != r.value),
            None => witness_bad += usize::from(!prefix.is_empty()),
        }
        let top = r.value == chain.top();
        tops += usize::from(top);
        decide_bad +=
            usize::from(decide_top(&s, &phi).unwrap().is_some() != top || r.decided_top != top);
    }
    outcome(
        value_bad + witness_bad + decide_bad == 0,
        format!(
            "500 instances ({tops} at top), {value_bad} value, {witness_bad} witness, {decide_bad} decision mismatches"
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let start = Instant::now();
    let criteria: [Criterion; 10] = [
        ("algebra soundness", algebra_soundness),
        ("semantics oracle", semantics_oracle),
        ("normal-form equivalence", normal_form_equivalence),
        ("EP decomposition", ep_decomposition),
        ("homomorphism preservation", hom_preservation),
        ("product preservation", product_preservation),
        ("projection homomorphisms", projections),
        ("diagram lemma", diagram_lemma),
        ("pp theory closure", theory_closure),
        ("solver equivalence", solver_equivalence),
    ];
    let mut all_ok = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let mut o = run();
        let elapsed = t.elapsed();
        if i == 0 && elapsed >= Duration::from_secs(1) {
            o.ok = false;
            o.detail += ", over the 1 s budget";
        }
        all_ok &= o.ok;
        println!(
            "{} {:>2} {name}: {} [{:.2?}]",
            if o.ok { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            elapsed
        );
    }
    let total = start.elapsed();
    let in_budget = total < Duration::from_secs(120);
    println!(
        "{} total time {:.2?} (budget 2 min)",
        if in_budget { "PASS" } else { "FAIL" },
        total
    );
    if !(all_ok && in_budget) {
        std::process::exit(1);
    }
}
