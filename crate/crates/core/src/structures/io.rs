//! JSON structure files.
//!
//! Tuples are written as comma-joined element names. Saving is canonical: maps are
//! sorted by key and predicate entries equal to the default are omitted, so
//! `save(load(save(s)))` reproduces `save(s)` byte for byte.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{tuples, Structure, StructureError};
use crate::algebra::{AlgebraSpec, Degree};
use crate::syntax::Language;

fn is_true(b: &bool) -> bool {
    *b
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredicateFile {
    pub arity: usize,
    #[serde(default)]
    pub default: Degree,
    #[serde(default)]
    pub entries: BTreeMap<String, Degree>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionFile {
    pub arity: usize,
    pub map: BTreeMap<String, String>,
}

/// On-disk form of a [`Structure`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    pub algebra: AlgebraSpec,
    pub domain: Vec<String>,
    #[serde(default)]
    pub predicates: BTreeMap<String, PredicateFile>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub functions: BTreeMap<String, FunctionFile>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub truth_constants: BTreeMap<String, Degree>,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub equality: bool,
}

fn split_key(key: &str, arity: usize) -> Vec<&str> {
    if arity == 0 {
        Vec::new()
    } else {
        key.split(',').map(str::trim).collect()
    }
}

impl StructureFile {
    pub fn build(&self) -> Result<Structure, StructureError> {
        let chain = self.algebra.build()?;
        let mut lang = Language::new();
        lang.set_equality(self.equality);
        for (f, spec) in &self.functions {
            if spec.arity == 0 {
                return Err(StructureError::Format(format!(
                    "function `{f}` has arity 0; list it under \"constants\""
                )));
            }
            lang.add_function(f, spec.arity)?;
        }
        for c in self.constants.keys() {
            lang.add_function(c, 0)?;
        }
        for (d, &v) in &self.truth_constants {
            lang.add_algebra_constant(d, v)?;
        }
        let mut s = Structure::new(chain, lang, self.domain.clone())?;
        for (p, spec) in &self.predicates {
            s.add_predicate(p, spec.arity, spec.default)?;
            for (key, &v) in &spec.entries {
                let args = split_key(key, spec.arity);
                s.set_predicate_named(p, &args, v)?;
            }
        }
        for (f, spec) in &self.functions {
            let mut defined = std::collections::BTreeSet::new();
            for (key, value) in &spec.map {
                let args = split_key(key, spec.arity);
                s.set_function_named(f, &args, value)?;
                let idx = args
                    .iter()
                    .map(|a| s.element(a))
                    .collect::<Result<Vec<_>, _>>()?;
                defined.insert(idx);
            }
            if let Some(missing) = tuples(s.size(), spec.arity).find(|t| !defined.contains(t)) {
                return Err(StructureError::PartialFunction {
                    name: f.clone(),
                    args: s.tuple_key(&missing),
                });
            }
        }
        for (c, value) in &self.constants {
            let e = s.element(value)?;
            s.set_constant(c, e)?;
        }
        Ok(s)
    }
}

impl From<&Structure> for StructureFile {
    fn from(s: &Structure) -> Self {
        let n = s.size();
        let predicates = s
            .predicates()
            .map(|(p, table)| {
                let entries = table
                    .explicit()
                    .map(|(args, v)| (s.tuple_key(args), v))
                    .collect();
                (
                    p.to_string(),
                    PredicateFile {
                        arity: table.arity(),
                        default: table.default_value(),
                        entries,
                    },
                )
            })
            .collect();
        let mut functions = BTreeMap::new();
        let mut constants = BTreeMap::new();
        for (f, table) in s.functions() {
            if table.arity() == 0 {
                constants.insert(f.to_string(), s.element_name(table.get(&[], n)).to_string());
            } else {
                let map = tuples(n, table.arity())
                    .map(|t| {
                        (
                            s.tuple_key(&t),
                            s.element_name(table.get(&t, n)).to_string(),
                        )
                    })
                    .collect();
                functions.insert(
                    f.to_string(),
                    FunctionFile {
                        arity: table.arity(),
                        map,
                    },
                );
            }
        }
        StructureFile {
            algebra: AlgebraSpec::from(s.chain()),
            domain: s.domain().to_vec(),
            predicates,
            functions,
            constants,
            truth_constants: s
                .language()
                .algebra_constants()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            equality: s.language().has_equality(),
        }
    }
}

impl Structure {
    pub fn from_json(text: &str) -> Result<Structure, StructureError> {
        let file: StructureFile =
            serde_json::from_str(text).map_err(|e| StructureError::Format(e.to_string()))?;
        file.build()
    }

    /// Canonical pretty-printed JSON, newline terminated.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&StructureFile::from(self))
            .expect("structure files always serialize");
        out.push('\n');
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Structure, StructureError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| StructureError::Format(format!("{}: {e}", path.display())))?;
        Structure::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), StructureError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json())
            .map_err(|e| StructureError::Format(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "algebra": {"kind": "lukasiewicz", "size": 3},
        "domain": ["a", "b"],
        "predicates": {"P": {"arity": 1, "default": 0, "entries": {"a": 2}},
                       "R": {"arity": 2, "default": 1, "entries": {"a,b": 2, "b, b": 0}},
                       "Z": {"arity": 0, "entries": {"": 1}}},
        "functions": {"f": {"arity": 1, "map": {"a": "b", "b": "a"}}},
        "constants": {"c": "a"}
    }"#;

    #[test]
    fn load_sample() {
        let s = Structure::from_json(SAMPLE).unwrap();
        assert_eq!(s.predicate("P").unwrap().get(&[0]), 2);
        assert_eq!(s.predicate("P").unwrap().get(&[1]), 0);
        assert_eq!(s.predicate("R").unwrap().get(&[0, 1]), 2);
        assert_eq!(s.predicate("R").unwrap().get(&[1, 1]), 0);
        assert_eq!(s.predicate("R").unwrap().get(&[0, 0]), 1);
        assert_eq!(s.predicate("Z").unwrap().get(&[]), 1);
        assert_eq!(s.function("f").unwrap().get(&[0], 2), 1);
        assert_eq!(s.constant("c"), Some(0));
    }

    #[test]
    fn canonical_round_trip() {
        let s = Structure::from_json(SAMPLE).unwrap();
        let text = s.to_json();
        let again = Structure::from_json(&text).unwrap();
        assert_eq!(again, s);
        assert_eq!(again.to_json(), text);
    }

    #[test]
    fn rejects_bad_files() {
        let partial = SAMPLE.replace(r#", "b": "a"}"#, "}");
        assert!(matches!(
            Structure::from_json(&partial),
            Err(StructureError::PartialFunction { .. })
        ));
        let bad_value = SAMPLE.replace(r#"{"a": 2}"#, r#"{"a": 7}"#);
        assert!(Structure::from_json(&bad_value).is_err());
        let unknown = SAMPLE.replace(r#""a,b": 2"#, r#""a,q": 2"#);
        assert!(matches!(
            Structure::from_json(&unknown),
            Err(StructureError::UnknownElement(_))
        ));
        assert!(matches!(
            Structure::from_json(
                r#"{"algebra": {"kind": "godel", "size": 2}, "domain": [], "bogus": 1}"#
            ),
            Err(StructureError::Format(_))
        ));
        assert!(matches!(
            Structure::from_json(r#"{"algebra": {"kind": "godel", "size": 1}, "domain": ["a"]}"#),
            Err(StructureError::Algebra(_))
        ));
    }
}
