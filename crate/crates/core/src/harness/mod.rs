//! Randomised machine checks of preservation results.
//!
//! Each suite runs independent trials, each driven by its own seed drawn from the
//! configuration seed. A trial whose premise fails (no homomorphism, nothing valued
//! top in the source) is skipped. Violations carry the trial seed and serialized
//! inputs, and [`replay`] re-runs a single trial from its seed.

mod checks;
pub mod gen;

use serde::Serialize;
use thiserror::Error;

use crate::morphisms::{MappingFile, MorphismError};
use crate::products::ProductError;
use crate::structures::{StructureError, StructureFile};
use crate::syntax::{Formula, Language, SyntaxError};

pub use checks::{
    check_ep_preservation, check_hom_preservation, check_pp_theory_closure,
    check_product_preservation, find_below_top_counterexample, replay, run_suite,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Product(#[from] ProductError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenConfig {
    pub seed: u64,
    pub max_chain: usize,
    pub max_domain: usize,
    pub max_arity: usize,
    pub max_depth: usize,
    /// Target number of effective trials.
    pub trials: usize,
    /// Admit `→` into generated formulas (the negative control).
    pub implication: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            max_chain: 4,
            max_domain: 3,
            max_arity: 2,
            max_depth: 4,
            trials: 200,
            implication: false,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let fields = [
            ("max_domain", self.max_domain),
            ("max_arity", self.max_arity),
            ("max_depth", self.max_depth),
            ("trials", self.trials),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| *v == 0) {
            return Err(HarnessError::Config(format!("{name} must be at least 1")));
        }
        if self.max_chain < 2 {
            return Err(HarnessError::Config("max_chain must be at least 2".into()));
        }
        Ok(())
    }

    /// Attempts stop here even if fewer effective trials were collected.
    pub fn max_attempts(&self) -> usize {
        self.trials * 10 / 3
    }
}

/// Which property a run checks.
#[derive(Debug, Clone, PartialEq)]
pub enum Suite {
    Hom,
    Product,
    Ep,
    /// Closure of the model class of pp axioms over `language`.
    Closure {
        language: Language,
        axioms: Vec<Formula>,
    },
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Hom => "hom",
            Suite::Product => "product",
            Suite::Ep => "ep",
            Suite::Closure { .. } => "closure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub seed: u64,
    pub structures: Vec<StructureFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mapping: Option<MappingFile>,
    pub formula: String,
    pub tuple: Vec<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Trial {
    Skipped,
    Passed,
    Failed(Vec<Counterexample>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Violation,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub suite: String,
    pub config: GenConfig,
    pub attempts: usize,
    /// Effective trials: premise held and the property was checked.
    pub trials: usize,
    pub skipped: usize,
    pub violations: Vec<Counterexample>,
    pub verdict: Verdict,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("reports always serialize");
        out.push('\n');
        out
    }
}
