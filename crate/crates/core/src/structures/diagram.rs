//! Named expansions, standard truth-constant expansions, and diagrams.

use std::collections::BTreeSet;

use super::{tuples, Element, Structure, StructureError};
use crate::syntax::{Formula, Language, SyntaxError, Term};

const NAME_PREFIX: &str = "c_";
const TRUTH_PREFIX: &str = "d_";

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// The constant symbol naming each element: `c_<name>`, disambiguated by index when
/// two element names sanitize to the same identifier.
pub fn element_constant_names(s: &Structure) -> Vec<String> {
    let mut taken = BTreeSet::new();
    s.domain()
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let mut candidate = format!("{NAME_PREFIX}{}", sanitize(name));
            if taken.contains(&candidate) {
                candidate = format!("{candidate}_{i}");
            }
            taken.insert(candidate.clone());
            candidate
        })
        .collect()
}

fn symbols(lang: &Language) -> impl Iterator<Item = &str> {
    lang.predicates()
        .map(|(n, _)| n)
        .chain(lang.functions().map(|(n, _)| n))
        .chain(lang.algebra_constants().map(|(n, _)| n))
}

/// Adds a constant `c_m` interpreted as `m` for every element `m`.
///
/// A structure that already is such an expansion is returned unchanged. Otherwise any
/// existing symbol starting with `c_` is a clash.
pub fn expand_with_names(s: &Structure) -> Result<(Language, Structure), StructureError> {
    let names = element_constant_names(s);
    let already = names
        .iter()
        .enumerate()
        .all(|(i, n)| s.constant(n) == Some(i));
    if already {
        return Ok((s.language().clone(), s.clone()));
    }
    if let Some(clash) = symbols(s.language()).find(|n| n.starts_with(NAME_PREFIX)) {
        return Err(SyntaxError::NameClash(clash.to_string()).into());
    }
    let mut out = s.clone();
    for (i, name) in names.iter().enumerate() {
        out.add_function(name, 0, i)?;
    }
    Ok((out.language().clone(), out))
}

/// Adds a truth constant `d_k` valued `k` for every chain element `k`.
pub fn expand_with_truth_constants(s: &Structure) -> Result<Structure, StructureError> {
    let mut out = s.clone();
    for k in s.chain().elements() {
        let name = format!("{TRUTH_PREFIX}{k}");
        match s.language().algebra_constant(&name) {
            Some(v) if v == k => {}
            _ => out.add_algebra_constant(&name, k)?,
        }
    }
    Ok(out)
}

/// Closed terms of the named expansion: every element name, every original individual
/// constant, and each function symbol applied once to element names.
fn closed_terms(named: &Structure, names: &[String]) -> Vec<(Term, Element)> {
    let n = named.size();
    let mut out: Vec<(Term, Element)> = names
        .iter()
        .enumerate()
        .map(|(i, c)| (Term::constant(c), i))
        .collect();
    let name_set: BTreeSet<&str> = names.iter().map(String::as_str).collect();
    for (f, table) in named.functions() {
        if name_set.contains(f) {
            continue;
        }
        for args in tuples(n, table.arity()) {
            let term = Term::App(
                f.to_string(),
                args.iter().map(|&a| Term::constant(&names[a])).collect(),
            );
            out.push((term, table.get(&args, n)));
        }
    }
    out
}

/// All atomic sentences of the named expansion that hold with value top.
///
/// Atoms range over predicates applied to the closed terms described in
/// [`closed_terms`], plus crisp equalities between those terms. Since every element
/// has a name, deeper terms add nothing: `f(c_m) = c_{f(m)}` already fixes each
/// function's graph.
pub fn diagram(s: &Structure) -> Result<Vec<Formula>, StructureError> {
    let (_, named) = expand_with_names(s)?;
    let names = element_constant_names(s);
    let terms = closed_terms(&named, &names);
    let top = s.chain().top();
    let mut out = Vec::new();
    for (p, table) in named.predicates() {
        for combo in tuples(terms.len(), table.arity()) {
            let values: Vec<Element> = combo.iter().map(|&i| terms[i].1).collect();
            if table.get(&values) == top {
                out.push(Formula::atom(
                    p,
                    combo.iter().map(|&i| terms[i].0.clone()).collect(),
                ));
            }
        }
    }
    if s.language().has_equality() {
        for (t1, v1) in &terms {
            for (t2, v2) in &terms {
                if v1 == v2 {
                    out.push(Formula::Eq(t1.clone(), t2.clone()));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Chain;
    use crate::structures::Valuation;
    use crate::syntax::parse_formula;

    fn two_elements() -> Structure {
        let lang = Language::new().with_predicate("P", 1);
        let mut s =
            Structure::with_domain(Chain::lukasiewicz(3).unwrap(), lang, &["a", "b"]).unwrap();
        s.set_predicate_named("P", &["a"], 2).unwrap();
        s.set_predicate_named("P", &["b"], 1).unwrap();
        s
    }

    #[test]
    fn named_expansion() {
        let s = two_elements();
        let (lang, named) = expand_with_names(&s).unwrap();
        assert_eq!(lang.function_arity("c_a"), Some(0));
        assert_eq!(named.constant("c_a"), Some(0));
        assert_eq!(named.constant("c_b"), Some(1));
        let f = parse_formula("P(c_a)", &lang).unwrap();
        assert_eq!(named.evaluate(&f, &Valuation::new()), Ok(2));
        let (lang2, twice) = expand_with_names(&named).unwrap();
        assert_eq!(lang2, lang);
        assert_eq!(twice, named);
    }

    #[test]
    fn named_expansion_prefix_clash() {
        let lang = Language::new().with_function("c_x", 0);
        let s = Structure::with_domain(Chain::godel(2).unwrap(), lang, &["a"]).unwrap();
        assert!(matches!(
            expand_with_names(&s),
            Err(StructureError::Syntax(SyntaxError::NameClash(_)))
        ));
    }

    #[test]
    fn truth_constants() {
        let lang = Language::new().with_predicate("P", 1).with_function("a", 0);
        let s = Structure::with_domain(Chain::lukasiewicz(4).unwrap(), lang, &["a"]).unwrap();
        let t = expand_with_truth_constants(&s).unwrap();
        for k in 0..4 {
            let f = parse_formula(&format!("d_{k}"), t.language()).unwrap();
            assert_eq!(t.evaluate(&f, &Valuation::new()), Ok(k));
        }
        for v in 0..4 {
            let mut t = t.clone();
            t.set_predicate_named("P", &["a"], v).unwrap();
            let f = parse_formula("d_0 -> P(a)", t.language()).unwrap();
            assert_eq!(t.evaluate(&f, &Valuation::new()), Ok(3));
        }
        assert_eq!(expand_with_truth_constants(&t).unwrap(), t);
    }

    #[test]
    fn diagram_contents() {
        let mut s = two_elements();
        s.set_predicate_named("P", &["a"], 2).unwrap();
        let d: Vec<String> = diagram(&s).unwrap().iter().map(|f| f.to_string()).collect();
        assert!(d.contains(&"P(c_a)".to_string()));
        assert!(d.contains(&"c_a = c_a".to_string()));
        assert!(d.contains(&"c_b = c_b".to_string()));
        assert!(!d.contains(&"P(c_b)".to_string()));
        assert!(!d.contains(&"c_a = c_b".to_string()));
    }

    #[test]
    fn diagram_function_graph() {
        let lang = Language::new().with_function("f", 1);
        let mut s = Structure::with_domain(Chain::godel(2).unwrap(), lang, &["a", "b"]).unwrap();
        s.set_function_named("f", &["a"], "b").unwrap();
        s.set_function_named("f", &["b"], "b").unwrap();
        let d: Vec<String> = diagram(&s).unwrap().iter().map(|f| f.to_string()).collect();
        assert!(d.contains(&"f(c_a) = c_b".to_string()));
        assert!(!d.contains(&"f(c_a) = c_a".to_string()));
    }

    #[test]
    fn diagram_of_bottom_tables_is_reflexive_equalities() {
        let lang = Language::new()
            .with_predicate("P", 1)
            .with_predicate("R", 2);
        let s =
            Structure::with_domain(Chain::lukasiewicz(4).unwrap(), lang, &["a", "b", "c"]).unwrap();
        let d = diagram(&s).unwrap();
        assert_eq!(d.len(), 3);
        assert!(d.iter().all(|f| matches!(f, Formula::Eq(a, b) if a == b)));
    }
}
