use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gen::{FormulaSpec, Gen};
use super::{CheckReport, Counterexample, GenConfig, HarnessError, Suite, Trial, Verdict};
use crate::morphisms::{find_homomorphisms, Mapping};
use crate::products::{direct_product, weak_product, Product, WeakPolicy};
use crate::structures::{tuples, Element, Structure, StructureFile, Valuation};
use crate::syntax::{classify, Formula, Language, SyntaxError};

/// Tuples checked per product and formula; larger tuple spaces are sampled.
const PRODUCT_TUPLES: usize = 12;
const CLOSURE_STRUCTURES: usize = 4;

pub fn check_hom_preservation(cfg: &GenConfig) -> Result<CheckReport, HarnessError> {
    run_suite(&Suite::Hom, cfg)
}

pub fn check_ep_preservation(cfg: &GenConfig) -> Result<CheckReport, HarnessError> {
    run_suite(&Suite::Ep, cfg)
}

pub fn check_product_preservation(cfg: &GenConfig) -> Result<CheckReport, HarnessError> {
    run_suite(&Suite::Product, cfg)
}

/// Fails with a syntax error if some axiom is not a pp-sentence.
pub fn check_pp_theory_closure(
    cfg: &GenConfig,
    language: &Language,
    axioms: &[Formula],
) -> Result<CheckReport, HarnessError> {
    run_suite(
        &Suite::Closure {
            language: language.clone(),
            axioms: axioms.to_vec(),
        },
        cfg,
    )
}

pub fn run_suite(suite: &Suite, cfg: &GenConfig) -> Result<CheckReport, HarnessError> {
    cfg.validate()?;
    if let Suite::Closure { language, axioms } = suite {
        for a in axioms {
            if !classify(a).pp {
                return Err(SyntaxError::NotPp(a.to_string()).into());
            }
            if !a.is_sentence() {
                return Err(HarnessError::Config(format!(
                    "axiom `{a}` has free variables"
                )));
            }
            a.check_language(language)?;
        }
    }
    let mut seeds = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut attempts, mut trials, mut skipped) = (0, 0, 0);
    let mut violations = Vec::new();
    while trials < cfg.trials && attempts < cfg.max_attempts() {
        attempts += 1;
        match replay(suite, cfg, seeds.gen())? {
            Trial::Skipped => skipped += 1,
            Trial::Passed => trials += 1,
            Trial::Failed(found) => {
                trials += 1;
                violations.extend(found);
            }
        }
    }
    let verdict = if !violations.is_empty() {
        Verdict::Violation
    } else if trials * 10 < attempts * 3 || trials == 0 {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(CheckReport {
        suite: suite.name().to_string(),
        config: cfg.clone(),
        attempts,
        trials,
        skipped,
        violations,
        verdict,
    })
}

/// Runs the single trial of `suite` driven by `seed`.
pub fn replay(suite: &Suite, cfg: &GenConfig, seed: u64) -> Result<Trial, HarnessError> {
    match suite {
        Suite::Hom => hom_trial(cfg, seed, false),
        Suite::Ep => hom_trial(cfg, seed, true),
        Suite::Product => product_trial(cfg, seed),
        Suite::Closure { language, axioms } => closure_trial(cfg, seed, language, axioms),
    }
}

fn valuation(vars: &[String], d: &[Element]) -> Valuation {
    vars.iter().cloned().zip(d.iter().copied()).collect()
}

fn names(s: &Structure, d: &[Element]) -> Vec<String> {
    d.iter().map(|&e| s.element_name(e).to_string()).collect()
}

struct HomSetup {
    structures: (Structure, Structure),
    mapping: Mapping,
    formula: Formula,
    vars: Vec<String>,
}

fn hom_setup(
    cfg: &GenConfig,
    g: &mut Gen,
    disjunction: bool,
    min_chain: usize,
) -> Result<Option<HomSetup>, HarnessError> {
    let chain = g.chain(cfg.max_chain.max(min_chain));
    let lang = g.language(cfg.max_arity);
    let m_size = g.rng().gen_range(1..=cfg.max_domain);
    let n_size = g.rng().gen_range(1..=cfg.max_domain);
    let (pm, pn) = (g.rng().gen_range(0.3..0.8), g.rng().gen_range(0.6..0.95));
    let m = g.structure(&chain, &lang, m_size, pm);
    let n = g.structure(&chain, &lang, n_size, pn);
    let spec = FormulaSpec {
        free: g.rng().gen_range(0..=2),
        depth: g.rng().gen_range(1..=cfg.max_depth),
        max_bound: 3,
        disjunction,
        implication: cfg.implication,
    };
    let formula = g.formula(&lang, &spec);
    let homs = find_homomorphisms(&m, &n, Some(16))?;
    let Some(mapping) = homs.choose(g.rng()).cloned() else {
        return Ok(None);
    };
    let vars = formula.free_vars().into_iter().collect();
    Ok(Some(HomSetup {
        structures: (m, n),
        mapping,
        formula,
        vars,
    }))
}

fn hom_trial(cfg: &GenConfig, seed: u64, disjunction: bool) -> Result<Trial, HarnessError> {
    let mut g = Gen::new(seed);
    let Some(setup) = hom_setup(cfg, &mut g, disjunction, 2)? else {
        return Ok(Trial::Skipped);
    };
    let (m, n) = &setup.structures;
    let top = m.chain().top();
    let mut premise = false;
    for d in tuples(m.size(), setup.vars.len()) {
        if m.evaluate(&setup.formula, &valuation(&setup.vars, &d))? != top {
            continue;
        }
        premise = true;
        let image: Vec<Element> = d.iter().map(|&e| setup.mapping.apply(e)).collect();
        let value = n.evaluate(&setup.formula, &valuation(&setup.vars, &image))?;
        if value != top {
            return Ok(Trial::Failed(vec![Counterexample {
                seed,
                structures: vec![StructureFile::from(m), StructureFile::from(n)],
                mapping: Some(setup.mapping.to_file(m, n)),
                formula: setup.formula.to_string(),
                tuple: names(m, &d),
                detail: format!("top in the source, {} at the image", m.chain().label(value)),
            }]));
        }
    }
    Ok(if premise {
        Trial::Passed
    } else {
        Trial::Skipped
    })
}

fn sample_tuples(g: &mut Gen, size: usize, len: usize) -> Vec<Vec<Element>> {
    let total = size.checked_pow(len as u32).unwrap_or(usize::MAX);
    if total <= PRODUCT_TUPLES {
        tuples(size, len).collect()
    } else {
        (0..PRODUCT_TUPLES).map(|_| g.tuple(size, len)).collect()
    }
}

fn product_trial(cfg: &GenConfig, seed: u64) -> Result<Trial, HarnessError> {
    let mut g = Gen::new(seed);
    let chain = g.chain(cfg.max_chain);
    let lang = g.language(cfg.max_arity);
    let k = g.rng().gen_range(2..=3);
    let max_size = if k == 3 {
        cfg.max_domain.min(2)
    } else {
        cfg.max_domain
    };
    let factors: Vec<Structure> = (0..k)
        .map(|_| {
            let size = g.rng().gen_range(1..=max_size);
            let p = g.rng().gen_range(0.5..0.95);
            g.structure(&chain, &lang, size, p)
        })
        .collect();
    let spec = FormulaSpec {
        free: g.rng().gen_range(0..=2),
        depth: g.rng().gen_range(1..=cfg.max_depth),
        max_bound: 2,
        disjunction: false,
        implication: false,
    };
    let phi = g.formula(&lang, &spec);
    let vars: Vec<String> = phi.free_vars().into_iter().collect();
    let scramble_seed = g.rng().gen();
    let products = [
        ("canonical", direct_product(&factors)?),
        (
            "scrambled",
            weak_product(
                &factors,
                WeakPolicy::Scrambled {
                    seed: scramble_seed,
                },
            )?,
        ),
    ];
    let top = chain.top();
    let sample = sample_tuples(&mut g, products[0].1.structure().size(), vars.len());
    for (label, product) in &products {
        for d in &sample {
            if let Some(detail) = biconditional(product, &factors, &phi, &vars, d, top)? {
                let mut structures: Vec<StructureFile> =
                    factors.iter().map(StructureFile::from).collect();
                structures.push(StructureFile::from(product.structure()));
                return Ok(Trial::Failed(vec![Counterexample {
                    seed,
                    structures,
                    mapping: None,
                    formula: phi.to_string(),
                    tuple: names(product.structure(), d),
                    detail: format!("{label} product: {detail}"),
                }]));
            }
        }
    }
    Ok(Trial::Passed)
}

/// `None` when the product is top at `d` exactly when every factor is top at its
/// coordinate; otherwise which side broke.
fn biconditional(
    product: &Product,
    factors: &[Structure],
    phi: &Formula,
    vars: &[String],
    d: &[Element],
    top: usize,
) -> Result<Option<String>, HarnessError> {
    let whole = product.structure().evaluate(phi, &valuation(vars, d))? == top;
    let mut failing = None;
    for (i, f) in factors.iter().enumerate() {
        let local: Vec<Element> = d.iter().map(|&e| product.coords(e)[i]).collect();
        if f.evaluate(phi, &valuation(vars, &local))? != top {
            failing = Some(i);
            break;
        }
    }
    Ok(match (whole, failing) {
        (true, Some(i)) => Some(format!("top in the product but not in factor {i}")),
        (false, None) => Some("top in every factor but not in the product".to_string()),
        _ => None,
    })
}

fn closure_trial(
    cfg: &GenConfig,
    seed: u64,
    language: &Language,
    axioms: &[Formula],
) -> Result<Trial, HarnessError> {
    let mut g = Gen::new(seed);
    let chain = g.chain(cfg.max_chain);
    let lang = if language.predicates().next().is_none() && axioms.is_empty() {
        g.language(cfg.max_arity)
    } else {
        language.clone()
    };
    let pool: Vec<Structure> = (0..CLOSURE_STRUCTURES)
        .map(|_| {
            let size = g.rng().gen_range(1..=cfg.max_domain);
            let p = g.rng().gen_range(0.5..0.95);
            g.structure(&chain, &lang, size, p)
        })
        .collect();
    let top = chain.top();
    let failed_axiom = |s: &Structure| -> Result<Option<&Formula>, HarnessError> {
        for a in axioms {
            if s.evaluate_sentence(a)? != top {
                return Ok(Some(a));
            }
        }
        Ok(None)
    };
    let mut models = Vec::new();
    for (i, s) in pool.iter().enumerate() {
        if failed_axiom(s)?.is_none() {
            models.push(i);
        }
    }
    if models.is_empty() {
        return Ok(Trial::Skipped);
    }
    let mut found = Vec::new();
    for (x, &i) in models.iter().enumerate() {
        for &j in &models[x..] {
            let product = direct_product(&[pool[i].clone(), pool[j].clone()])?;
            if let Some(a) = failed_axiom(product.structure())? {
                found.push(Counterexample {
                    seed,
                    structures: vec![
                        (&pool[i]).into(),
                        (&pool[j]).into(),
                        product.structure().into(),
                    ],
                    mapping: None,
                    formula: a.to_string(),
                    tuple: Vec::new(),
                    detail: "the product of two models is not a model".into(),
                });
            }
        }
        for (j, target) in pool.iter().enumerate() {
            if models.contains(&j) {
                continue;
            }
            if let Some(g) = find_homomorphisms(&pool[i], target, Some(1))?.first() {
                let a = failed_axiom(target)?.expect("not a model");
                found.push(Counterexample {
                    seed,
                    structures: vec![(&pool[i]).into(), target.into()],
                    mapping: Some(g.to_file(&pool[i], target)),
                    formula: a.to_string(),
                    tuple: Vec::new(),
                    detail: "a homomorphic image of a model is not a model".into(),
                });
            }
        }
    }
    Ok(if found.is_empty() {
        Trial::Passed
    } else {
        Trial::Failed(found)
    })
}

/// Searches for a homomorphism along which a pp-formula value strictly between
/// bottom and top drops. Homomorphisms only constrain top, so such cases exist.
pub fn find_below_top_counterexample(
    cfg: &GenConfig,
) -> Result<Option<Counterexample>, HarnessError> {
    cfg.validate()?;
    let cfg = GenConfig {
        implication: false,
        ..cfg.clone()
    };
    let mut seeds = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.max_attempts() {
        let seed = seeds.gen();
        let mut g = Gen::new(seed);
        let Some(setup) = hom_setup(&cfg, &mut g, false, 3)? else {
            continue;
        };
        let (m, n) = &setup.structures;
        let top = m.chain().top();
        for d in tuples(m.size(), setup.vars.len()) {
            let before = m.evaluate(&setup.formula, &valuation(&setup.vars, &d))?;
            if before == 0 || before == top {
                continue;
            }
            let image: Vec<Element> = d.iter().map(|&e| setup.mapping.apply(e)).collect();
            let after = n.evaluate(&setup.formula, &valuation(&setup.vars, &image))?;
            if after < before {
                return Ok(Some(Counterexample {
                    seed,
                    structures: vec![m.into(), n.into()],
                    mapping: Some(setup.mapping.to_file(m, n)),
                    formula: setup.formula.to_string(),
                    tuple: names(m, &d),
                    detail: format!(
                        "{} in the source drops to {} at the image",
                        m.chain().label(before),
                        m.chain().label(after)
                    ),
                }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_all_inferring;

    fn cfg(trials: usize) -> GenConfig {
        GenConfig {
            trials,
            seed: 42,
            ..GenConfig::default()
        }
    }

    #[test]
    fn hom_suite_passes_and_is_effective() {
        let r = check_hom_preservation(&cfg(150)).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        assert_eq!(r.trials, 150);
    }

    #[test]
    fn implication_breaks_preservation_and_replays() {
        let c = GenConfig {
            implication: true,
            ..cfg(400)
        };
        let r = check_hom_preservation(&c).unwrap();
        assert_eq!(r.verdict, Verdict::Violation);
        let first = &r.violations[0];
        assert_eq!(
            replay(&Suite::Hom, &c, first.seed).unwrap(),
            Trial::Failed(vec![first.clone()])
        );
    }

    #[test]
    fn product_and_ep_suites_pass() {
        assert!(check_product_preservation(&cfg(60)).unwrap().passed());
        assert!(check_ep_preservation(&cfg(100)).unwrap().passed());
    }

    #[test]
    fn closure_suite() {
        let (axioms, lang) = parse_all_inferring(&["E x. P(x)", "E x y. R(x, y) & P(y)"]).unwrap();
        assert!(check_pp_theory_closure(&cfg(40), &lang, &axioms)
            .unwrap()
            .passed());
        assert!(check_pp_theory_closure(&cfg(20), &Language::new(), &[])
            .unwrap()
            .passed());
        let (bad, lang) = parse_all_inferring(&["A x. P(x)"]).unwrap();
        assert!(matches!(
            check_pp_theory_closure(&cfg(5), &lang, &bad),
            Err(HarnessError::Syntax(SyntaxError::NotPp(_)))
        ));
    }

    #[test]
    fn below_top_values_are_not_preserved() {
        let found = find_below_top_counterexample(&cfg(100)).unwrap();
        assert!(found.is_some());
    }

    #[test]
    fn config_bounds() {
        let bad = GenConfig {
            max_chain: 1,
            ..cfg(1)
        };
        assert!(matches!(
            check_hom_preservation(&bad),
            Err(HarnessError::Config(_))
        ));
    }
}
