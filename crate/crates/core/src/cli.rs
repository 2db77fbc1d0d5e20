//! The `sessub` command line.
//!
//! Exit codes: 0 subtype (or success), 1 not-subtype, 2 usage, parse or
//! validation error, 3 algorithms disagree (or a benchmark pair is refuted),
//! 4 step limit exceeded.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::inductive::{CheckError, CheckReport, DerivationNode, Verdict, DEFAULT_STEP_LIMIT};
use crate::subterms::{sub_bottom_up, sub_top_down};
use crate::syntax::{size, validate_closed, SessionType};
use crate::textio::{parse, print, JudgementRecord};
use crate::worstgen::{self, Algorithm};

pub const EXIT_SUBTYPE: i32 = 0;
pub const EXIT_NOT_SUBTYPE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DISAGREE: i32 = 3;
pub const EXIT_STEP_LIMIT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "sessub", about = "Subtyping checkers for recursive session types")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide LHS <= RHS. Types are given inline or as @path.
    Check {
        #[arg(long, value_enum, default_value_t = AlgChoice::Inductive)]
        alg: AlgChoice,
        /// Export the inductive derivation.
        #[arg(long, value_enum)]
        tree: Option<TreeFormat>,
        #[arg(long, default_value_t = DEFAULT_STEP_LIMIT)]
        step_limit: u64,
        /// Write the derivation here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        lhs: String,
        rhs: String,
    },
    /// Print the top-down and bottom-up subterm sets of a closed type.
    Subterms { ty: String },
    /// Print T_k from the worst-case family.
    Gen {
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
    },
    /// Check T_k <= T_{k+1} for k = 1..=kmax and report node counts.
    Bench {
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
        kmax: u64,
        #[arg(long, value_enum, default_value_t = AlgChoice::All)]
        alg: AlgChoice,
        #[arg(long, default_value_t = DEFAULT_STEP_LIMIT)]
        step_limit: u64,
        /// Write the JSON-lines records here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgChoice {
    Inductive,
    Memo,
    Oracle,
    All,
}

impl AlgChoice {
    fn algorithms(self) -> Vec<Algorithm> {
        match self {
            AlgChoice::Inductive => vec![Algorithm::Inductive],
            AlgChoice::Memo => vec![Algorithm::Memo],
            AlgChoice::Oracle => vec![Algorithm::Oracle],
            AlgChoice::All => Algorithm::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TreeFormat {
    Dot,
    Json,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&config, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn load(arg: &str) -> Result<SessionType, String> {
    let (origin, text) = match arg.strip_prefix('@') {
        Some(path) => (
            path.to_string(),
            fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?,
        ),
        None => ("<argument>".to_string(), arg.to_string()),
    };
    let t = parse(&text).map_err(|e| format!("{origin}: parse error at {e}"))?;
    validate_closed(&t).map_err(|e| format!("{origin}: invalid type: {e}"))?;
    Ok(t)
}

fn execute(config: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let io = |e: std::io::Error| e.to_string();
    match &config.command {
        Command::Check {
            alg,
            tree,
            step_limit,
            out: tree_out,
            lhs,
            rhs,
        } => {
            let (t, u) = (load(lhs)?, load(rhs)?);
            let mut reports: Vec<(Algorithm, CheckReport)> = Vec::new();
            let mut truncated = false;
            for algorithm in alg.algorithms() {
                let report = if algorithm == Algorithm::Inductive && tree.is_some() {
                    crate::inductive::derive_with(
                        &t,
                        &u,
                        &crate::inductive::DeriveOptions {
                            step_limit: *step_limit,
                            capture_tree: true,
                            ..Default::default()
                        },
                    )
                } else {
                    algorithm.check(&t, &u, *step_limit)
                };
                match report {
                    Ok(r) => reports.push((algorithm, r)),
                    Err(CheckError::StepLimit { limit }) => {
                        writeln!(err, "step-limit-exceeded: {algorithm} stopped after {limit} steps")
                            .map_err(io)?;
                        truncated = true;
                    }
                    Err(e) => return Err(e.to_string()),
                }
            }
            let verdicts: Vec<Verdict> = reports.iter().map(|(_, r)| r.verdict).collect();
            if let Some(first) = verdicts.first() {
                if verdicts.iter().all(|v| v == first) {
                    writeln!(out, "{first}").map_err(io)?;
                } else {
                    writeln!(out, "disagreement").map_err(io)?;
                }
            }
            for (algorithm, r) in &reports {
                writeln!(out, "{}", report_line(*algorithm, r)).map_err(io)?;
            }
            if let Some(format) = tree {
                let derivation = reports
                    .iter()
                    .find(|(a, _)| *a == Algorithm::Inductive)
                    .and_then(|(_, r)| r.derivation.as_ref());
                match derivation {
                    Some(d) => {
                        let text = export_derivation(d, *format);
                        match tree_out {
                            Some(path) => fs::write(path, text)
                                .map_err(|e| format!("{}: {e}", path.display()))?,
                            None => out.write_all(text.as_bytes()).map_err(io)?,
                        }
                    }
                    None => writeln!(err, "no derivation to export").map_err(io)?,
                }
            }
            Ok(if verdicts.windows(2).any(|w| w[0] != w[1]) {
                EXIT_DISAGREE
            } else if truncated {
                EXIT_STEP_LIMIT
            } else if verdicts.first() == Some(&Verdict::Subtype) {
                EXIT_SUBTYPE
            } else {
                EXIT_NOT_SUBTYPE
            })
        }
        Command::Subterms { ty } => {
            let t = load(ty)?;
            let n = size(&t);
            let top = sub_top_down(&t).map_err(|e| e.to_string())?;
            let bottom = sub_bottom_up(&t);
            writeln!(out, "size: {n}").map_err(io)?;
            for (name, set) in [("sub_top_down", &top), ("sub_bottom_up", &bottom)] {
                let verdict = if set.len() <= n { "holds" } else { "VIOLATED" };
                writeln!(out, "{name}: {} (bound {} <= {n} {verdict})", set.len(), set.len())
                    .map_err(io)?;
                for s in set.printed() {
                    writeln!(out, "  {s}").map_err(io)?;
                }
            }
            let contained = if top.is_subset(&bottom) { "holds" } else { "VIOLATED" };
            writeln!(out, "sub_top_down <= sub_bottom_up: {contained}").map_err(io)?;
            Ok(0)
        }
        Command::Gen { k } => {
            writeln!(out, "{}", print(&worstgen::gen_tk(*k as usize))).map_err(io)?;
            Ok(0)
        }
        Command::Bench {
            kmax,
            alg,
            step_limit,
            out: records_out,
        } => {
            let rows = match worstgen::bench(*kmax as usize, &alg.algorithms(), *step_limit) {
                Ok(rows) => rows,
                Err(e @ worstgen::BenchError::Refuted { .. }) => {
                    writeln!(err, "error: {e}").map_err(io)?;
                    return Ok(EXIT_DISAGREE);
                }
                Err(e) => return Err(e.to_string()),
            };
            out.write_all(worstgen::render_table(&rows).as_bytes())
                .map_err(io)?;
            let records = worstgen::to_records(&rows);
            match records_out {
                Some(path) => {
                    fs::write(path, records).map_err(|e| format!("{}: {e}", path.display()))?
                }
                None => out.write_all(records.as_bytes()).map_err(io)?,
            }
            Ok(0)
        }
    }
}

fn report_line(algorithm: Algorithm, r: &CheckReport) -> String {
    format!(
        "algorithm={algorithm} verdict={} nodes_expanded={} memo_hits={} max_context={} max_depth={} elapsed_ms={:.3}",
        r.verdict,
        r.nodes_expanded,
        r.memo_hits,
        r.max_context,
        r.max_depth,
        r.elapsed.as_secs_f64() * 1e3
    )
}

#[derive(Serialize)]
struct NodeRecord {
    rule: &'static str,
    judgement: JudgementRecord,
    children: Vec<NodeRecord>,
}

fn node_record(d: &DerivationNode) -> NodeRecord {
    NodeRecord {
        rule: d.rule.as_str(),
        judgement: JudgementRecord::from(&d.judgement),
        children: d.children.iter().map(node_record).collect(),
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders a derivation as a Graphviz digraph (nodes numbered in preorder,
/// edges in premise order) or as nested JSON records.
pub fn export_derivation(d: &DerivationNode, format: TreeFormat) -> String {
    match format {
        TreeFormat::Json => {
            serde_json::to_string(&node_record(d)).expect("derivation records serialize") + "\n"
        }
        TreeFormat::Dot => {
            let mut out = String::from("digraph derivation {\n  node [shape=box, fontname=\"monospace\"];\n");
            let mut next = 0usize;
            write_dot(d, &mut next, &mut out);
            out.push_str("}\n");
            out
        }
    }
}

fn write_dot(d: &DerivationNode, next: &mut usize, out: &mut String) -> usize {
    let id = *next;
    *next += 1;
    let label = format!(
        "{}\\n|sigma|={}\\n{} <= {}",
        d.rule,
        d.judgement.sigma.len(),
        dot_escape(&print(d.judgement.goal.lhs())),
        dot_escape(&print(d.judgement.goal.rhs()))
    );
    let _ = writeln!(out, "  n{id} [label=\"{label}\"];");
    for c in &d.children {
        let child = write_dot(c, next, out);
        let _ = writeln!(out, "  n{id} -> n{child};");
    }
    id
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("sessub").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn check_exit_codes() {
        let (code, out, _) = run_args(&["check", "--alg", "memo", "end", "end"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().next(), Some("subtype"));
        let (code, out, _) = run_args(&["check", "--alg", "inductive", "&{a: end}", "&{a: end, b: end}"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().next(), Some("subtype"));
        let (code, out, _) = run_args(&["check", "end", "?[end].end"]);
        assert_eq!(code, 1);
        assert_eq!(out.lines().next(), Some("not-subtype"));
    }

    #[test]
    fn usage_and_input_errors() {
        let (code, _, err) = run_args(&["check", "?[end", "end"]);
        assert_eq!(code, 2);
        assert!(err.contains("line 1, column 6"), "{err}");
        let (code, _, err) = run_args(&["check", "rec X. X", "end"]);
        assert_eq!(code, 2);
        assert!(err.contains("non-contractive"), "{err}");
        let (code, _, _) = run_args(&["check", "X", "end"]);
        assert_eq!(code, 2);
        let (code, _, _) = run_args(&["check", "end"]);
        assert_eq!(code, 2);
        let (code, _, _) = run_args(&["frobnicate"]);
        assert_eq!(code, 2);
        let (code, _, _) = run_args(&["gen", "0"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn step_limit_is_distinct_from_refutation() {
        let s = "rec X. ?[end].X";
        let (code, _, err) = run_args(&["check", "--step-limit", "2", s, s]);
        assert_eq!(code, EXIT_STEP_LIMIT);
        assert!(err.contains("step-limit-exceeded"));
    }

    #[test]
    fn all_algorithms_agree() {
        let (code, out, _) = run_args(&["check", "--alg", "all", "rec X. ?[end].X", "?[end].rec X. ?[end].X"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 4);
    }

    #[test]
    fn dot_export_of_a_leaf() {
        let (code, out, _) = run_args(&["check", "--tree", "dot", "end", "end"]);
        assert_eq!(code, 0);
        assert_eq!(out.matches("[label=").count(), 1);
        assert_eq!(out.matches("->").count(), 0);
        assert!(out.contains("AS-End"));
    }

    #[test]
    fn gen_and_subterms() {
        let (code, out, _) = run_args(&["gen", "1"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "rec X. ?[rec Y0. X].X");
        let (code, out, _) = run_args(&["subterms", "rec X. ?[end].X"]);
        assert_eq!(code, 0);
        assert!(out.contains("sub_top_down: 3"));
        assert!(out.contains("sub_bottom_up: 3"));
        assert!(out.contains("  ?[end].rec _0. ?[end]._0"));
    }
}
