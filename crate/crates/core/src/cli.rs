//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error (including bad formulas), 2 check violation,
//! 3 inconclusive check, 4 unreadable or invalid input file.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::harness::{self, CheckReport, GenConfig, Suite, Verdict};
use crate::morphisms::{
    classify_morphism, find_homomorphisms, find_violation, Mapping, MappingFile, MorphismKind,
    Violation,
};
use crate::products::{weak_product, WeakPolicy};
use crate::solver::{solve_ep, solve_pp, SolveResult};
use crate::structures::{diagram, Structure, Valuation};
use crate::syntax::{
    classify, ep_to_pp_disjunction, parse_all_inferring, parse_formula, parse_formula_inferring,
    pp_normal_form, Formula,
};

#[derive(Debug, Parser)]
#[command(
    name = "mtlmodel",
    version,
    about = "Finite MTL-chain valued structures, pp/EP formulas and homomorphisms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeakArg {
    Min,
    Scrambled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Hom,
    Product,
    Closure,
    Ep,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Value of a formula in a structure.
    Eval {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        formula: String,
        /// Free variable assignments, `x=a`.
        #[arg(long, value_delimiter = ',')]
        assign: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Exact value and witness of a pp or EP sentence.
    Solve {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        json: bool,
    },
    /// Fragments a formula belongs to.
    Classify {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        json: bool,
    },
    /// Normal form of a pp-formula, or the pp-disjuncts of an EP formula.
    Normalize {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        json: bool,
    },
    /// Search for homomorphisms, or classify a given mapping.
    Hom {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        #[arg(long, conflicts_with = "limit")]
        all: bool,
        #[arg(long)]
        limit: Option<usize>,
        /// Mapping file to classify instead of searching.
        #[arg(long, conflicts_with_all = ["all", "limit"])]
        map: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Direct or weak direct product; writes a structure file.
    Product {
        #[arg(long = "structure", required = true)]
        structures: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "min")]
        weak: WeakArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Atomic sentences true (value top) in a structure, over names for its elements.
    Diagram {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Randomised preservation checks.
    Check {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 3)]
        max_domain: usize,
        #[arg(long, default_value_t = 4)]
        max_chain: usize,
        #[arg(long, default_value_t = 2)]
        max_arity: usize,
        #[arg(long, default_value_t = 4)]
        max_depth: usize,
        /// Admit `->` into generated formulas.
        #[arg(long)]
        implication: bool,
        /// pp axioms for the closure suite.
        #[arg(long)]
        axioms: Vec<String>,
        /// Write the full report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) => m,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn input(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

type Outcome = Result<i32, Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn load(path: &Path) -> Result<Structure, Failure> {
    Structure::load(path).map_err(input)
}

fn emit(out: &mut dyn Write, text: &str) -> Outcome {
    out.write_all(text.as_bytes()).map_err(input)?;
    Ok(0)
}

fn emit_json(out: &mut dyn Write, value: &serde_json::Value) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    emit(out, &text)
}

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Eval {
            structure,
            formula,
            assign,
            json,
        } => eval(&structure, &formula, &assign, json, out),
        Command::Solve {
            structure,
            formula,
            json,
        } => solve(&structure, &formula, json, out),
        Command::Classify { formula, json } => {
            let (phi, _) = parse_formula_inferring(&formula).map_err(usage)?;
            let tags = classify(&phi).names();
            if json {
                emit_json(out, &json!({"formula": phi.to_string(), "fragments": tags}))
            } else if tags.is_empty() {
                emit(out, "none\n")
            } else {
                emit(out, &format!("{}\n", tags.join(" ")))
            }
        }
        Command::Normalize { formula, json } => normalize(&formula, json, out),
        Command::Hom {
            from,
            to,
            all,
            limit,
            map,
            json,
        } => hom(&from, &to, all, limit, map.as_deref(), json, out),
        Command::Product {
            structures,
            weak,
            seed,
            output,
        } => {
            let factors = structures
                .iter()
                .map(|p| load(p))
                .collect::<Result<Vec<_>, _>>()?;
            let policy = match weak {
                WeakArg::Min => WeakPolicy::Min,
                WeakArg::Scrambled => WeakPolicy::Scrambled { seed },
            };
            let product = weak_product(&factors, policy).map_err(input)?;
            match output {
                Some(path) => {
                    product.structure().save(&path).map_err(input)?;
                    Ok(0)
                }
                None => emit(out, &product.structure().to_json()),
            }
        }
        Command::Diagram { structure, json } => {
            let s = load(&structure)?;
            let sentences: Vec<String> = diagram(&s)
                .map_err(input)?
                .iter()
                .map(Formula::to_string)
                .collect();
            if json {
                emit_json(out, &json!(sentences))
            } else {
                emit(
                    out,
                    &sentences
                        .iter()
                        .map(|l| format!("{l}\n"))
                        .collect::<String>(),
                )
            }
        }
        Command::Check {
            suite,
            seed,
            trials,
            max_domain,
            max_chain,
            max_arity,
            max_depth,
            implication,
            axioms,
            report,
            json,
        } => {
            let cfg = GenConfig {
                seed,
                max_chain,
                max_domain,
                max_arity,
                max_depth,
                trials,
                implication,
            };
            if suite != SuiteArg::Closure && !axioms.is_empty() {
                return Err(usage("--axioms only applies to --suite closure"));
            }
            let suite = match suite {
                SuiteArg::Hom => Suite::Hom,
                SuiteArg::Product => Suite::Product,
                SuiteArg::Ep => Suite::Ep,
                SuiteArg::Closure => {
                    let texts: Vec<&str> = axioms.iter().map(String::as_str).collect();
                    let (axioms, language) = parse_all_inferring(&texts).map_err(usage)?;
                    Suite::Closure { language, axioms }
                }
            };
            let r = harness::run_suite(&suite, &cfg).map_err(usage)?;
            if let Some(path) = report {
                std::fs::write(&path, r.to_json())
                    .map_err(|e| input(format!("{}: {e}", path.display())))?;
            }
            if json {
                emit(out, &r.to_json())?;
            } else {
                emit(out, &summary(&r))?;
            }
            Ok(match r.verdict {
                Verdict::Pass => 0,
                Verdict::Violation => 2,
                Verdict::Inconclusive => 3,
            })
        }
    }
}

fn summary(r: &CheckReport) -> String {
    let verdict = match r.verdict {
        Verdict::Pass => "pass",
        Verdict::Violation => "violation",
        Verdict::Inconclusive => "inconclusive",
    };
    let mut text = format!(
        "{}: {verdict} (effective {}, skipped {}, violations {})\n",
        r.suite,
        r.trials,
        r.skipped,
        r.violations.len()
    );
    if let Some(v) = r.violations.first() {
        text += &format!(
            "first violation: seed {} formula {} ({})\n",
            v.seed, v.formula, v.detail
        );
    }
    text
}

fn parse_assignments(s: &Structure, assign: &[String]) -> Result<Valuation, Failure> {
    let mut v = Valuation::new();
    for a in assign {
        let (var, elem) = a
            .split_once('=')
            .ok_or_else(|| usage(format!("assignment `{a}` is not of the form x=a")))?;
        let e = s.element(elem.trim()).map_err(usage)?;
        v.insert(var.trim().to_string(), e);
    }
    Ok(v)
}

fn eval(
    structure: &Path,
    formula: &str,
    assign: &[String],
    json: bool,
    out: &mut dyn Write,
) -> Outcome {
    let s = load(structure)?;
    let phi = parse_formula(formula, s.language()).map_err(usage)?;
    let v = parse_assignments(&s, assign)?;
    let value = s.evaluate(&phi, &v).map_err(usage)?;
    let label = s.chain().label(value);
    if json {
        emit_json(
            out,
            &json!({"formula": phi.to_string(), "value": value, "label": label}),
        )
    } else {
        emit(out, &format!("{value} ({label})\n"))
    }
}

fn witness_names(s: &Structure, r: &SolveResult) -> Option<Vec<(String, String)>> {
    r.witness.as_ref().map(|w| {
        w.iter()
            .map(|(x, &e)| (x.clone(), s.element_name(e).to_string()))
            .collect()
    })
}

fn solve(structure: &Path, formula: &str, json: bool, out: &mut dyn Write) -> Outcome {
    let s = load(structure)?;
    let phi = parse_formula(formula, s.language()).map_err(usage)?;
    let r = if classify(&phi).pp {
        solve_pp(&s, &phi)
    } else {
        solve_ep(&s, &phi)
    }
    .map_err(usage)?;
    let label = s.chain().label(r.value);
    let witness = witness_names(&s, &r);
    if json {
        let w = witness.map(|w| w.into_iter().collect::<std::collections::BTreeMap<_, _>>());
        return emit_json(
            out,
            &json!({
                "formula": phi.to_string(),
                "value": r.value,
                "label": label,
                "decided_top": r.decided_top,
                "witness": w,
                "disjunct": r.disjunct,
            }),
        );
    }
    let mut text = format!("{} ({label})\n", r.value);
    if let Some(w) = witness {
        let parts: Vec<String> = w.iter().map(|(x, e)| format!("{x}={e}")).collect();
        text += &format!("witness {}\n", parts.join(" "));
    }
    if let Some(d) = r.disjunct {
        text += &format!("disjunct {d}\n");
    }
    emit(out, &text)
}

fn normalize(formula: &str, json: bool, out: &mut dyn Write) -> Outcome {
    let (phi, _) = parse_formula_inferring(formula).map_err(usage)?;
    if classify(&phi).pp {
        let nf = pp_normal_form(&phi).map_err(usage)?.to_string();
        return if json {
            emit_json(out, &json!({"normal_form": nf}))
        } else {
            emit(out, &format!("{nf}\n"))
        };
    }
    let disjuncts: Vec<String> = ep_to_pp_disjunction(&phi)
        .map_err(usage)?
        .iter()
        .map(Formula::to_string)
        .collect();
    if json {
        emit_json(out, &json!({"disjuncts": disjuncts}))
    } else {
        emit(
            out,
            &disjuncts
                .iter()
                .map(|d| format!("{d}\n"))
                .collect::<String>(),
        )
    }
}

fn mapping_text(g: &Mapping, m: &Structure, n: &Structure) -> String {
    let parts: Vec<String> =
        g.0.iter()
            .enumerate()
            .map(|(i, &e)| format!("{}->{}", m.element_name(i), n.element_name(e)))
            .collect();
    parts.join(" ")
}

#[allow(clippy::too_many_arguments)]
fn hom(
    from: &Path,
    to: &Path,
    all: bool,
    limit: Option<usize>,
    map: Option<&Path>,
    json: bool,
    out: &mut dyn Write,
) -> Outcome {
    let m = load(from)?;
    let n = load(to)?;
    if let Some(path) = map {
        let text =
            std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
        let file: MappingFile =
            serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
        let g = Mapping::from_file(&file, &m, &n).map_err(input)?;
        let kind = classify_morphism(&g, &m, &n).map_err(input)?;
        let violation = find_violation(&g, &m, &n).map_err(input)?;
        let kind_name = match kind {
            MorphismKind::None => "none",
            MorphismKind::Homomorphism => "homomorphism",
            MorphismKind::Embedding => "embedding",
            MorphismKind::Isomorphism => "isomorphism",
        };
        let witness = violation.map(|v| match v {
            Violation::Function { symbol, args } | Violation::Predicate { symbol, args } => {
                format!("{symbol}({})", m.tuple_key(&args))
            }
        });
        return if json {
            emit_json(out, &json!({"kind": kind_name, "violation": witness}))
        } else {
            let mut text = format!("{kind_name}\n");
            if let Some(w) = witness {
                text += &format!("violation {w}\n");
            }
            emit(out, &text)
        };
    }
    let limit = if all { None } else { Some(limit.unwrap_or(1)) };
    let found = find_homomorphisms(&m, &n, limit).map_err(input)?;
    if json {
        let files: Vec<MappingFile> = found.iter().map(|g| g.to_file(&m, &n)).collect();
        return emit_json(
            out,
            &serde_json::to_value(files).expect("mapping files serialize"),
        );
    }
    if found.is_empty() {
        return emit(out, "no homomorphism\n");
    }
    emit(
        out,
        &found
            .iter()
            .map(|g| format!("{}\n", mapping_text(g, &m, &n)))
            .collect::<String>(),
    )
}
